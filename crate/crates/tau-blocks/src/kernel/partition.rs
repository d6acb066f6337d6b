use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::scalar::rat;
use super::KernelError;

/// A number in `(1/2)Z`, stored as twice its value.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(t: i32) -> Self {
        HalfInt(t)
    }

    pub const fn int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_rational(self) -> BigRational {
        rat(self.0 as i64, 2)
    }

    pub fn from_rational(r: &BigRational) -> Result<Self, KernelError> {
        let t = r * rat(2, 1);
        if !t.is_integer() {
            return Err(KernelError::NotHalfInteger(r.to_string()));
        }
        let v: i64 = t.to_integer().try_into().map_err(|_| KernelError::NotHalfInteger(r.to_string()))?;
        i32::try_from(v).map(HalfInt).map_err(|_| KernelError::NotHalfInteger(r.to_string()))
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl std::str::FromStr for HalfInt {
    type Err = KernelError;
    fn from_str(s: &str) -> Result<Self, KernelError> {
        let x: super::Scalar = s.parse()?;
        let r = x.as_real().ok_or_else(|| KernelError::NotHalfInteger(s.to_string()))?;
        HalfInt::from_rational(r)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Hash)]
pub enum Flavor {
    /// Weakly decreasing positive integers.
    Bosonic,
    /// Strictly decreasing positive half-odd integers.
    Fermionic,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Partition {
    parts: Vec<HalfInt>,
}

impl Partition {
    pub fn new(parts: Vec<HalfInt>) -> Self {
        Partition { parts }
    }

    pub fn from_ints(parts: &[i32]) -> Self {
        Partition { parts: parts.iter().map(|&p| HalfInt::int(p)).collect() }
    }

    pub fn parts(&self) -> &[HalfInt] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> HalfInt {
        self.parts.iter().fold(HalfInt::ZERO, |a, &b| a + b)
    }

    pub fn split_first(&self) -> Option<(HalfInt, Partition)> {
        self.parts.split_first().map(|(h, t)| (*h, Partition { parts: t.to_vec() }))
    }

    pub fn prepend(&self, p: HalfInt) -> Partition {
        let mut parts = Vec::with_capacity(self.parts.len() + 1);
        parts.push(p);
        parts.extend_from_slice(&self.parts);
        Partition { parts }
    }

    /// Multiplicities of each distinct part, largest first.
    pub fn multiplicities(&self) -> Vec<(HalfInt, usize)> {
        let mut out: Vec<(HalfInt, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of `n`, largest parts first (reverse lexicographic).
pub fn partitions_of(n: HalfInt, flavor: Flavor) -> Vec<Partition> {
    let mut out: Vec<Vec<HalfInt>> = Vec::new();
    if n.twice() < 0 {
        return Vec::new();
    }
    let mut cur = Vec::new();
    match flavor {
        Flavor::Bosonic => {
            if n.is_integer() {
                bosonic(n.twice() / 2, n.twice() / 2, &mut cur, &mut out);
            }
        }
        Flavor::Fermionic => fermionic(n.twice(), n.twice() | 1, &mut cur, &mut out),
    }
    out.into_iter().map(Partition::new).collect()
}

fn bosonic(rest: i32, max: i32, cur: &mut Vec<HalfInt>, out: &mut Vec<Vec<HalfInt>>) {
    if rest == 0 {
        out.push(cur.clone());
        return;
    }
    for p in (1..=max.min(rest)).rev() {
        cur.push(HalfInt::int(p));
        bosonic(rest - p, p, cur, out);
        cur.pop();
    }
}

/// Works on doubled values: parts are odd and strictly decreasing.
fn fermionic(rest: i32, max: i32, cur: &mut Vec<HalfInt>, out: &mut Vec<Vec<HalfInt>>) {
    if rest == 0 {
        out.push(cur.clone());
        return;
    }
    let mut p = max.min(rest);
    if p % 2 == 0 {
        p -= 1;
    }
    while p >= 1 {
        cur.push(HalfInt::from_twice(p));
        fermionic(rest - p, p - 2, cur, out);
        cur.pop();
        p -= 2;
    }
}

/// Number of bosonic partitions of each `n <= max`, from the product `prod (1-q^k)^{-1}`.
pub fn partition_counts(max: usize) -> Vec<u64> {
    let mut p = vec![0u64; max + 1];
    p[0] = 1;
    for k in 1..=max {
        for n in k..=max {
            p[n] += p[n - k];
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_bosonic() {
        let ps = partitions_of(HalfInt::int(3), Flavor::Bosonic);
        let shown: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["(3)", "(2,1)", "(1,1,1)"]);
        assert_eq!(partitions_of(HalfInt::ZERO, Flavor::Bosonic), vec![Partition::default()]);
    }

    #[test]
    fn two_fermionic() {
        let ps = partitions_of(HalfInt::int(2), Flavor::Fermionic);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].to_string(), "(3/2,1/2)");
        assert!(partitions_of(HalfInt::int(1), Flavor::Fermionic).is_empty());
    }

    #[test]
    fn counts_match_generating_function() {
        let gf = partition_counts(12);
        for n in 0..=12 {
            assert_eq!(partitions_of(HalfInt::int(n as i32), Flavor::Bosonic).len() as u64, gf[n]);
        }
    }
}
