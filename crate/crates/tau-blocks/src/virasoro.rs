//! Verma modules of a single Virasoro algebra and their conformal blocks.

use std::collections::HashMap;

use crate::kernel::{partitions_of, rat, solve, Flavor, GradedSeries, HalfInt, KernelError, Matrix, Partition, Scalar, StateVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VirasoroError {
    #[error("weight {delta} is degenerate (r={r}, s={s}) at level {level}")]
    DegenerateWeight { delta: String, r: i32, s: i32, level: i32 },
    #[error("central charge {c} is inconsistent with b^2 = {b_sq}")]
    InconsistentCharge { c: String, b_sq: String },
    #[error("weight {0} is not a real rational exponent")]
    NonRealWeight(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

type Result<T> = std::result::Result<T, VirasoroError>;

pub type VermaVector = StateVector<Partition>;

/// Central charge and highest weight.
#[derive(Clone, Debug, PartialEq)]
pub struct VirParams {
    c: Scalar,
    b_sq: Option<Scalar>,
    delta: Scalar,
}

/// `Q^2 = b^2 + 2 + b^{-2}`.
pub fn q_squared(b_sq: &Scalar) -> Result<Scalar> {
    Ok(b_sq + &Scalar::int(2) + b_sq.inv()?)
}

/// `Delta_{m,n} = (Q^2 - m^2 b^{-2} - n^2 b^2 - 2mn)/4`.
pub fn degenerate_weight(b_sq: &Scalar, m: i32, n: i32) -> Result<Scalar> {
    let q2 = q_squared(b_sq)?;
    let (m, n) = (m as i64, n as i64);
    let num = &q2 - &b_sq.inv()?.scale(&rat(m * m, 1)) - b_sq.scale(&rat(n * n, 1)) - Scalar::int(2 * m * n);
    Ok(num.scale(&rat(1, 4)))
}

impl VirParams {
    pub fn from_c(c: Scalar, delta: Scalar) -> Self {
        VirParams { c, b_sq: None, delta }
    }

    /// `c = 13 + 6(b^2 + b^{-2})`.
    pub fn from_b_sq(b_sq: Scalar, delta: Scalar) -> Result<Self> {
        let c = Scalar::int(13) + (&b_sq + &b_sq.inv()?).scale(&rat(6, 1));
        Ok(VirParams { c, b_sq: Some(b_sq), delta })
    }

    pub fn from_b(b: &Scalar, delta: Scalar) -> Result<Self> {
        Self::from_b_sq(b.square(), delta)
    }

    /// `Delta = Q^2/4 - P^2`.
    pub fn from_b_momentum(b: &Scalar, p: &Scalar) -> Result<Self> {
        let b_sq = b.square();
        let delta = q_squared(&b_sq)?.scale(&rat(1, 4)) - p.square();
        Self::from_b_sq(b_sq, delta)
    }

    pub fn with_c_and_b_sq(c: Scalar, b_sq: Scalar, delta: Scalar) -> Result<Self> {
        let p = Self::from_b_sq(b_sq.clone(), delta)?;
        if p.c != c {
            return Err(VirasoroError::InconsistentCharge { c: c.to_string(), b_sq: b_sq.to_string() });
        }
        Ok(p)
    }

    pub fn c(&self) -> &Scalar {
        &self.c
    }

    pub fn b_sq(&self) -> Option<&Scalar> {
        self.b_sq.as_ref()
    }

    pub fn delta(&self) -> &Scalar {
        &self.delta
    }

    pub fn with_delta(&self, delta: Scalar) -> Self {
        VirParams { delta, ..self.clone() }
    }

    /// Rejects weights whose Verma module has a singular vector at or below `level`.
    pub fn check_generic(&self, level: i32) -> Result<()> {
        for r in 1..=level.max(0) {
            for s in r..=level {
                if r * s > level {
                    break;
                }
                if kac_factor(&self.c, &self.delta, r, s).is_zero() {
                    return Err(VirasoroError::DegenerateWeight { delta: self.delta.to_string(), r, s, level });
                }
            }
        }
        Ok(())
    }
}

/// `(Delta - Delta_{r,s})(Delta - Delta_{s,r})` for `r < s`, or `Delta - Delta_{r,r}`, written through `c`.
pub fn kac_factor(c: &Scalar, delta: &Scalar, r: i32, s: i32) -> Scalar {
    let q2 = (c - &Scalar::one()).scale(&rat(1, 6));
    let (r, s) = (r as i64, s as i64);
    if r == s {
        return delta - &q2.scale(&rat(1 - r * r, 4));
    }
    let u_plus_v = &q2 - &Scalar::int(2);
    let a = (&q2 - &Scalar::int(2 * r * s)).scale(&rat(1, 4));
    let sum = (q2.scale(&rat(2, 1)) - u_plus_v.scale(&rat(r * r + s * s, 1)) - Scalar::int(4 * r * s)).scale(&rat(1, 4));
    let cross = (u_plus_v.square() - Scalar::int(2)).scale(&rat(r * r * s * s, 1)) + Scalar::int(r.pow(4) + s.pow(4));
    let prod = a.square() - (&a * &u_plus_v).scale(&rat(r * r + s * s, 4)) + cross.scale(&rat(1, 16));
    delta.square() - delta * &sum + prod
}

/// Action of Virasoro modes on the Verma basis `L_{-lambda}|Delta>`, memoized.
pub struct VermaModule {
    c: Scalar,
    delta: Scalar,
    cache: HashMap<(i32, Partition), VermaVector>,
}

impl VermaModule {
    pub fn new(p: &VirParams) -> Self {
        VermaModule { c: p.c.clone(), delta: p.delta.clone(), cache: HashMap::new() }
    }

    /// `L_n L_{-lambda}|Delta>` in the basis of descending words.
    pub fn apply(&mut self, n: i32, word: &Partition) -> VermaVector {
        if let Some(v) = self.cache.get(&(n, word.clone())) {
            return v.clone();
        }
        let out = self.apply_uncached(n, word);
        self.cache.insert((n, word.clone()), out.clone());
        out
    }

    fn apply_uncached(&mut self, n: i32, word: &Partition) -> VermaVector {
        let Some((head, rest)) = word.split_first() else {
            return match n {
                0 => VermaVector::basis(Partition::default()).scale(&self.delta),
                m if m < 0 => VermaVector::basis(Partition::from_ints(&[-m])),
                _ => VermaVector::new(),
            };
        };
        let k = head.twice() / 2;
        if n < 0 && -n >= k {
            return VermaVector::basis(word.prepend(HalfInt::int(-n)));
        }
        let inner = self.apply(n, &rest);
        let mut out = self.apply_vec(-k, &inner);
        if n + k != 0 {
            out.add_scaled(&self.apply(n - k, &rest), &Scalar::int((n + k) as i64));
        }
        if n == k {
            let n3 = (n as i64).pow(3) - n as i64;
            out.add_scaled(&VermaVector::basis(rest), &self.c.scale(&rat(n3, 12)));
        }
        out
    }

    pub fn apply_vec(&mut self, n: i32, v: &VermaVector) -> VermaVector {
        let mut out = VermaVector::new();
        for (w, c) in v.iter() {
            let image = self.apply(n, w);
            out.add_scaled(&image, c);
        }
        out
    }

    /// `<Delta| L_{lambda_k} ... L_{lambda_1} v`.
    pub fn pairing(&mut self, bra: &Partition, ket: &VermaVector) -> Scalar {
        let mut v = ket.clone();
        for p in bra.parts() {
            v = self.apply_vec(p.twice() / 2, &v);
            if v.is_zero() {
                return Scalar::zero();
            }
        }
        v.coeff(&Partition::default())
    }

    pub fn gram(&mut self, level: i32) -> Matrix {
        let basis = partitions_of(HalfInt::int(level), Flavor::Bosonic);
        basis
            .iter()
            .map(|bra| basis.iter().map(|ket| self.pairing(bra, &VermaVector::basis(ket.clone()))).collect())
            .collect()
    }
}

pub fn gram_matrix(p: &VirParams, level: i32) -> Result<Matrix> {
    p.check_generic(level)?;
    Ok(VermaModule::new(p).gram(level))
}

/// Source of a chain vector.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainSource {
    /// Vertex operator between `Delta_1` and `Delta_2`.
    Regular { delta1: Scalar, delta2: Scalar },
    /// Irregular limit: `L_1|N> = |N-1>`, `L_k|N> = 0` for `k >= 2`.
    Whittaker,
}

impl ChainSource {
    /// `<Delta| L_{lambda_k} ... L_{lambda_1} |N>`.
    fn projection(&self, delta: &Scalar, n: i32, lambda: &Partition) -> Scalar {
        match self {
            ChainSource::Whittaker => {
                if lambda.parts().iter().all(|p| p.twice() == 2) {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            }
            ChainSource::Regular { delta1, delta2 } => {
                let mut level = n as i64;
                let mut acc = Scalar::one();
                for p in lambda.parts() {
                    let k = (p.twice() / 2) as i64;
                    let a = delta2.scale(&rat(k, 1)) - delta1 + delta + Scalar::int(level - k);
                    acc = &acc * &a;
                    level -= k;
                }
                acc
            }
        }
    }

    /// Coefficient `a` in `L_k |N> = a |N-k>`.
    pub fn lowering_coefficient(&self, delta: &Scalar, n: i32, k: i32) -> Scalar {
        match self {
            ChainSource::Whittaker => Scalar::int(if k == 1 { 1 } else { 0 }),
            ChainSource::Regular { delta1, delta2 } => {
                delta2.scale(&rat(k as i64, 1)) - delta1 + delta + Scalar::int((n - k) as i64)
            }
        }
    }
}

/// Graded components `|N>`, `N = 0..=n_max`, of a chain vector.
#[derive(Clone, Debug)]
pub struct ChainVector {
    pub levels: Vec<VermaVector>,
    pub source: ChainSource,
    /// Projections `<lambda|N>` per level, in basis order.
    projections: Vec<Vec<Scalar>>,
}

impl ChainVector {
    pub fn level(&self, n: usize) -> &VermaVector {
        &self.levels[n]
    }

    pub fn projections(&self, n: usize) -> &[Scalar] {
        &self.projections[n]
    }
}

fn build_chain(p: &VirParams, source: ChainSource, n_max: i32) -> Result<ChainVector> {
    p.check_generic(n_max)?;
    let mut module = VermaModule::new(p);
    let mut levels = Vec::new();
    let mut projections = Vec::new();
    for n in 0..=n_max {
        let basis = partitions_of(HalfInt::int(n), Flavor::Bosonic);
        let gram = module.gram(n);
        let rhs: Vec<Scalar> = basis.iter().map(|l| source.projection(&p.delta, n, l)).collect();
        let x = solve(&gram, &rhs).map_err(|_| VirasoroError::DegenerateWeight {
            delta: p.delta.to_string(),
            r: 0,
            s: 0,
            level: n,
        })?;
        let mut v = VermaVector::new();
        for (w, c) in basis.into_iter().zip(x) {
            v.add_term(w, c);
        }
        levels.push(v);
        projections.push(rhs);
    }
    Ok(ChainVector { levels, source, projections })
}

pub fn chain_vector(p: &VirParams, delta1: &Scalar, delta2: &Scalar, n_max: i32) -> Result<ChainVector> {
    build_chain(p, ChainSource::Regular { delta1: delta1.clone(), delta2: delta2.clone() }, n_max)
}

pub fn whittaker_vector(p: &VirParams, n_max: i32) -> Result<ChainVector> {
    build_chain(p, ChainSource::Whittaker, n_max)
}

/// Pairing `<N|N>` of two chains through the Gram form: `x^T rhs`.
fn pair_levels(bra: &ChainVector, ket: &ChainVector, n: usize) -> Scalar {
    let basis = partitions_of(HalfInt::int(n as i32), Flavor::Bosonic);
    basis.iter().zip(ket.projections(n)).map(|(w, r)| bra.level(n).coeff(w) * r).sum()
}

/// Coefficients `B(N)` of the 4-point block with externals `(Delta_1, Delta_2, Delta_3, Delta_4)`.
pub fn regular_coefficients(p: &VirParams, externals: &[Scalar; 4], n_max: i32) -> Result<Vec<Scalar>> {
    let [d1, d2, d3, d4] = externals;
    let ket = chain_vector(p, d1, d2, n_max)?;
    let bra = chain_vector(p, d4, d3, n_max)?;
    Ok((0..=n_max as usize).map(|n| pair_levels(&bra, &ket, n)).collect())
}

/// Coefficients `B(N) = <N|N>` of the irregular block.
pub fn irregular_coefficients(p: &VirParams, n_max: i32) -> Result<Vec<Scalar>> {
    let w = whittaker_vector(p, n_max)?;
    Ok((0..=n_max as usize).map(|n| pair_levels(&w, &w, n)).collect())
}

pub(crate) fn real_weight(delta: &Scalar) -> Result<num_rational::BigRational> {
    delta.as_real().cloned().ok_or_else(|| VirasoroError::NonRealWeight(delta.to_string()))
}

/// `q^Delta sum_{N <= n_max} B(N) q^N`.
pub fn block_regular(p: &VirParams, externals: &[Scalar; 4], n_max: i32) -> Result<GradedSeries> {
    let d = real_weight(&p.delta)?;
    let coeffs = regular_coefficients(p, externals, n_max)?;
    Ok(GradedSeries::from_grid(&d, &rat(1, 1), &coeffs, Some(&d + rat(n_max as i64, 1))))
}

pub fn block_irregular(p: &VirParams, n_max: i32) -> Result<GradedSeries> {
    let d = real_weight(&p.delta)?;
    let coeffs = irregular_coefficients(p, n_max)?;
    Ok(GradedSeries::from_grid(&d, &rat(1, 1), &coeffs, Some(&d + rat(n_max as i64, 1))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> VirParams {
        VirParams::from_b_sq(Scalar::frac(3, 7), Scalar::frac(2, 9)).unwrap()
    }

    #[test]
    fn level_one_gram() {
        let p = generic();
        assert_eq!(gram_matrix(&p, 0).unwrap(), vec![vec![Scalar::one()]]);
        assert_eq!(gram_matrix(&p, 1).unwrap(), vec![vec![Scalar::frac(4, 9)]]);
    }

    #[test]
    fn level_two_gram_entries() {
        let p = generic();
        let g = gram_matrix(&p, 2).unwrap();
        let d = p.delta().clone();
        let c = p.c().clone();
        assert_eq!(g[0][0], d.scale(&rat(4, 1)) + c.scale(&rat(1, 2)));
        assert_eq!(g[0][1], d.scale(&rat(6, 1)));
        assert_eq!(g[1][0], g[0][1]);
        assert_eq!(g[1][1], d.scale(&rat(4, 1)) * (d.scale(&rat(2, 1)) + Scalar::one()));
    }

    #[test]
    fn zero_weight_rejected() {
        let p = VirParams::from_b_sq(Scalar::frac(3, 7), Scalar::zero()).unwrap();
        assert!(matches!(gram_matrix(&p, 1), Err(VirasoroError::DegenerateWeight { .. })));
        let d12 = degenerate_weight(&Scalar::frac(3, 7), 1, 2).unwrap();
        let p = VirParams::from_b_sq(Scalar::frac(3, 7), d12).unwrap();
        assert!(p.check_generic(1).is_ok());
        assert!(p.check_generic(2).is_err());
    }

    #[test]
    fn chain_level_one() {
        let p = generic();
        let (d1, d2) = (Scalar::frac(1, 3), Scalar::frac(5, 4));
        let ch = chain_vector(&p, &d1, &d2, 2).unwrap();
        let expect = (p.delta() + &d2 - &d1).checked_div(&p.delta().scale(&rat(2, 1))).unwrap();
        assert_eq!(ch.level(1).coeff(&Partition::from_ints(&[1])), expect);
        assert_eq!(ch.level(0).coeff(&Partition::default()), Scalar::one());
    }

    #[test]
    fn whittaker_level_one() {
        let p = generic();
        let w = whittaker_vector(&p, 3).unwrap();
        let expect = p.delta().scale(&rat(2, 1)).inv().unwrap();
        assert_eq!(w.level(1).coeff(&Partition::from_ints(&[1])), expect);
        let mut m = VermaModule::new(&p);
        assert!(m.apply_vec(2, w.level(3)).is_zero());
    }

    #[test]
    fn block_first_coefficients() {
        let p = generic();
        let ext = [Scalar::frac(1, 3), Scalar::frac(5, 4), Scalar::frac(-2, 5), Scalar::frac(7, 6)];
        let b = regular_coefficients(&p, &ext, 1).unwrap();
        let d = p.delta();
        let expect = ((d + &ext[1] - &ext[0]) * (d + &ext[2] - &ext[3])).checked_div(&d.scale(&rat(2, 1))).unwrap();
        assert_eq!(b[0], Scalar::one());
        assert_eq!(b[1], expect);
        let zero = [Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::zero()];
        assert_eq!(regular_coefficients(&p, &zero, 1).unwrap()[1], d.scale(&rat(1, 2)));
        let irr = irregular_coefficients(&p, 1).unwrap();
        assert_eq!(irr[1], d.scale(&rat(2, 1)).inv().unwrap());
    }
}
