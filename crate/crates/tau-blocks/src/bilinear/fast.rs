//! Recursive block coefficients from bilinear relations.
//!
//! Each relation, read at relative order `N`, is linear in the order-`N` coefficients of the
//! `n = 0` term and involves only lower orders elsewhere. Coefficients are produced on demand
//! and memoized per lattice point.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::Serialize;

use super::hirota::{d_iii, d_iii_b, d_vi, d_vi_b, BilinearOperator, HirotaSpec};
use super::{BilinearError, Result};
use crate::blowup::{beta12, c_ratio_p3, c_ratio_p6, l_n21_l34, l_n_irr, vir12_weights, Coupling};
use crate::kernel::{rat, solve, HalfInt, Scalar};
use crate::nsr::ns_weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scheme {
    C1Irregular,
    C1Regular,
    GenericIrregular,
    GenericRegular,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::C1Irregular => "c1-irregular",
            Scheme::C1Regular => "c1-regular",
            Scheme::GenericIrregular => "generic-irregular",
            Scheme::GenericRegular => "generic-regular",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        [Scheme::C1Irregular, Scheme::C1Regular, Scheme::GenericIrregular, Scheme::GenericRegular]
            .into_iter()
            .find(|x| x.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FastParams {
    /// Lattice `Delta_j = (sigma + j)^2` at `c = 1`.
    C1Irregular { sigma: Scalar },
    /// As above with externals `theta^2`.
    C1Regular { sigma: Scalar, theta: [Scalar; 4] },
    /// Lattice momenta `P + 2 j b + 2 k / b`.
    GenericIrregular { b: Scalar, p: Scalar },
    GenericRegular { b: Scalar, p: Scalar, momenta: [Scalar; 4] },
}

impl FastParams {
    pub fn scheme(&self) -> Scheme {
        match self {
            FastParams::C1Irregular { .. } => Scheme::C1Irregular,
            FastParams::C1Regular { .. } => Scheme::C1Regular,
            FastParams::GenericIrregular { .. } => Scheme::GenericIrregular,
            FastParams::GenericRegular { .. } => Scheme::GenericRegular,
        }
    }
}

/// `(j, k)`: shift of the center by `j` steps of the first kind and `k` of the second.
pub type LatticeKey = (i32, i32);

fn key_string(k: LatticeKey) -> String {
    format!("({}, {})", k.0, k.1)
}

/// Memoized coefficients: one entry per block at `c = 1`, a pair `(B^(1), B^(2))` otherwise.
#[derive(Clone, Debug, Serialize)]
pub struct CoeffTable {
    pub scheme: Scheme,
    pub n_max: usize,
    #[serde(serialize_with = "ser_entries")]
    pub entries: BTreeMap<(LatticeKey, usize), Vec<Scalar>>,
}

fn ser_entries<S: serde::Serializer>(
    e: &BTreeMap<(LatticeKey, usize), Vec<Scalar>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(e.len()))?;
    for ((key, n), v) in e {
        let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        seq.serialize_element(&serde_json::json!({"lattice": [key.0, key.1], "N": n, "B": vals}))?;
    }
    seq.end()
}

impl CoeffTable {
    pub fn get(&self, key: LatticeKey, n: usize) -> Option<&Vec<Scalar>> {
        self.entries.get(&(key, n))
    }

    /// Coefficients at the center for `N = 0..=n_max`.
    pub fn center(&self, slot: usize) -> Vec<Scalar> {
        (0..=self.n_max).map(|n| self.entries[&((0, 0), n)][slot].clone()).collect()
    }
}

/// Term `n` of a relation at a given center: weight, the two blocks' lattice keys, weights and
/// argument rescalings.
struct RelTerm {
    weight: Scalar,
    keys: (LatticeKey, LatticeKey),
    deltas: (Scalar, Scalar),
    scales: (Scalar, Scalar),
}

struct Engine {
    params: FastParams,
    coupling: Option<Coupling>,
    memo: HashMap<(LatticeKey, usize), Vec<Scalar>>,
    terms_cache: HashMap<(LatticeKey, i32), Option<RelTerm>>,
    ops: Vec<BilinearOperator>,
}

impl Engine {
    fn new(params: FastParams) -> Result<Self> {
        let coupling = match &params {
            FastParams::GenericIrregular { b, .. } | FastParams::GenericRegular { b, .. } => Some(Coupling::new(b)?),
            _ => None,
        };
        Ok(Engine { params, coupling, memo: HashMap::new(), terms_cache: HashMap::new(), ops: Vec::new() })
    }

    fn c1_center(&self, key: LatticeKey) -> Scalar {
        match &self.params {
            FastParams::C1Irregular { sigma } | FastParams::C1Regular { sigma, .. } => sigma + &Scalar::int(key.0 as i64),
            _ => unreachable!(),
        }
    }

    fn momentum(&self, key: LatticeKey) -> Scalar {
        let c = self.coupling.as_ref().unwrap();
        let p = match &self.params {
            FastParams::GenericIrregular { p, .. } | FastParams::GenericRegular { p, .. } => p,
            _ => unreachable!(),
        };
        p + &(c.b().scale(&rat(2 * key.0 as i64, 1)) + c.b_inv().scale(&rat(2 * key.1 as i64, 1)))
    }

    /// Term `n` of the relation centered at `key`.
    fn rel_term(&mut self, key: LatticeKey, n: i32) -> Result<&RelTerm> {
        if !self.terms_cache.contains_key(&(key, n)) {
            let t = self.build_term(key, n)?;
            self.terms_cache.insert((key, n), Some(t));
        }
        Ok(self.terms_cache[&(key, n)].as_ref().unwrap())
    }

    fn build_term(&self, key: LatticeKey, n: i32) -> Result<RelTerm> {
        let one = Scalar::one();
        match &self.params {
            FastParams::C1Irregular { .. } | FastParams::C1Regular { .. } => {
                let s = self.c1_center(key);
                let nn = Scalar::int(n as i64);
                let weight = match &self.params {
                    FastParams::C1Irregular { .. } => c_ratio_p3(&s, HalfInt::int(n), 0)?,
                    FastParams::C1Regular { theta, .. } => c_ratio_p6(&s, theta, HalfInt::int(n))?,
                    _ => unreachable!(),
                };
                Ok(RelTerm {
                    weight,
                    keys: ((key.0 + n, 0), (key.0 - n, 0)),
                    deltas: ((&s + &nn).square(), (&s - &nn).square()),
                    scales: (one.clone(), one),
                })
            }
            FastParams::GenericIrregular { .. } | FastParams::GenericRegular { .. } => {
                let c = self.coupling.as_ref().unwrap();
                let x = self.momentum(key);
                let hn = HalfInt::int(n);
                let (d1, d2) = vir12_weights(c, &x, hn)?;
                let (weight, scales) = match &self.params {
                    FastParams::GenericIrregular { .. } => (l_n_irr(c, &x, hn)?.reduced, beta12(c)?),
                    FastParams::GenericRegular { momenta, .. } => (l_n21_l34(c, &x, momenta, hn)?, (one.clone(), one)),
                    _ => unreachable!(),
                };
                Ok(RelTerm { weight, keys: ((key.0 + n, key.1), (key.0, key.1 + n)), deltas: (d1, d2), scales })
            }
        }
    }

    fn is_c1(&self) -> bool {
        matches!(self.params, FastParams::C1Irregular { .. } | FastParams::C1Regular { .. })
    }

    /// Coefficient of copy `slot` (0 or 1) at lattice point `key`, order `n`.
    fn coeff(&mut self, key: LatticeKey, slot: usize, n: usize) -> Result<Scalar> {
        Ok(self.entry(key, n)?[if self.is_c1() { 0 } else { slot }].clone())
    }

    fn ensure(&mut self, key: LatticeKey, n: usize) -> Result<()> {
        if !self.memo.contains_key(&(key, n)) {
            self.entry(key, n)?;
        }
        Ok(())
    }

    fn stored(&self, key: LatticeKey, slot: usize, n: usize) -> &Scalar {
        &self.memo[&(key, n)][if self.is_c1() { 0 } else { slot }]
    }

    fn entry(&mut self, key: LatticeKey, n: usize) -> Result<Vec<Scalar>> {
        if n == 0 {
            let one = vec![Scalar::one(); if self.is_c1() { 1 } else { 2 }];
            self.memo.insert((key, 0), one.clone());
            return Ok(one);
        }
        if let Some(v) = self.memo.get(&(key, n)) {
            return Ok(v.clone());
        }
        let v = if self.is_c1() { self.solve_c1(key, n)? } else { self.solve_generic(key, n)? };
        self.memo.insert((key, n), v.clone());
        Ok(v)
    }

    /// Order-`n` coefficient of `op` summed over the relation at `key`, skipping the `n = 0`
    /// products that contain an order-`n` coefficient; returns the known part and the
    /// coefficients of the two unknowns.
    fn relation_row(&mut self, op: &BilinearOperator, key: LatticeKey, order: usize) -> Result<(Scalar, Scalar, Scalar)> {
        let mut known = Scalar::zero();
        let mut lat = 0i32;
        while 2 * (lat + 1) * (lat + 1) <= order as i32 {
            lat += 1;
        }
        for n in -lat..=lat {
            let rel = order as i64 - 2 * (n as i64) * (n as i64);
            let (weight, keys, deltas, scales) = {
                let t = self.rel_term(key, n)?;
                (t.weight.clone(), t.keys, t.deltas.clone(), t.scales.clone())
            };
            let mut inner = Scalar::zero();
            for shift in 0..=op.max_shift().min(rel) {
                let budget = (rel - shift) as usize;
                for m1 in 0..=budget {
                    let m2 = budget - m1;
                    if n == 0 && ((m1 == order) || (m2 == order)) {
                        continue;
                    }
                    let wv = op.weight_at(&(&deltas.0 + &Scalar::int(m1 as i64)), &(&deltas.1 + &Scalar::int(m2 as i64)), shift);
                    if wv.is_zero() {
                        continue;
                    }
                    self.ensure(keys.0, m1)?;
                    self.ensure(keys.1, m2)?;
                    let b1 = self.stored(keys.0, 0, m1);
                    let b2 = self.stored(keys.1, 1, m2);
                    let mut term = &wv * &(b1 * b2);
                    if !scales.0.is_one() {
                        term *= &scales.0.pow(m1 as i64)?;
                    }
                    if !scales.1.is_one() {
                        term *= &scales.1.pow(m2 as i64)?;
                    }
                    inner += &term;
                }
            }
            known += &(&weight * &inner);
        }
        let t = self.rel_term(key, 0)?;
        let (w, d, sc) = (t.weight.clone(), t.deltas.clone(), t.scales.clone());
        let nn = Scalar::int(order as i64);
        let x = &w * &(op.weight_at(&(&d.0 + &nn), &d.1, 0) * sc.0.pow(order as i64)?);
        let y = &w * &(op.weight_at(&d.0, &(&d.1 + &nn), 0) * sc.1.pow(order as i64)?);
        Ok((known, x, y))
    }

    fn solve_c1(&mut self, key: LatticeKey, order: usize) -> Result<Vec<Scalar>> {
        let op = self.ops[0].clone();
        let (known, x, y) = self.relation_row(&op, key, order)?;
        let a = x + y;
        if a.is_zero() {
            return Err(BilinearError::Resonance { order, lattice: key_string(key) });
        }
        Ok(vec![(-known).checked_div(&a)?])
    }

    fn solve_generic(&mut self, key: LatticeKey, order: usize) -> Result<Vec<Scalar>> {
        let (first, second) = if order == 1 { (self.ops[0].clone(), self.ops[2].clone()) } else { (self.ops[0].clone(), self.ops[1].clone()) };
        let (k1, x1, y1) = self.relation_row(&first, key, order)?;
        let (k2, x2, y2) = self.relation_row(&second, key, order)?;
        let det = &x1 * &y2 - &x2 * &y1;
        if det.is_zero() {
            return Err(BilinearError::SingularSystem { order, lattice: key_string(key) });
        }
        let sol = solve(&vec![vec![x1, y1], vec![x2, y2]], &[-k1, -k2])?;
        Ok(sol)
    }
}

fn weighted(k: u32, b: &Scalar) -> BilinearOperator {
    let spec = HirotaSpec::weighted(k, b);
    BilinearOperator::single(spec.eps, k)
}

fn poly_times(p: &[(i64, Scalar)], op: &BilinearOperator) -> BilinearOperator {
    let mut out = BilinearOperator::new(op.eps.clone());
    for t in &op.terms {
        for (e, c) in p {
            out.terms.push(super::hirota::OpTerm { shift: t.shift + e, coeff: &t.coeff * c, euler: t.euler, hirota: t.hirota });
        }
    }
    out
}

/// Relations used by each scheme: `[primary, secondary, order-one replacement]`.
fn scheme_ops(params: &FastParams) -> Result<Vec<BilinearOperator>> {
    let one = Scalar::one();
    Ok(match params {
        FastParams::C1Irregular { .. } => vec![d_iii()],
        FastParams::C1Regular { theta, .. } => {
            vec![d_vi(&[theta[0].square(), theta[1].square(), theta[2].square(), theta[3].square()])]
        }
        FastParams::GenericIrregular { b, .. } => {
            let q = b + &b.inv()?;
            let relsh32 = weighted(3, b).plus(&weighted(2, b).scaled(&-q));
            vec![weighted(1, b), relsh32, d_iii_b(b)]
        }
        FastParams::GenericRegular { b, momenta, .. } => {
            let q = b + &b.inv()?;
            let b_sq = b.square();
            let ns = [
                ns_weight(&b_sq, &momenta[0])?,
                ns_weight(&b_sq, &momenta[1])?,
                ns_weight(&b_sq, &momenta[2])?,
                ns_weight(&b_sq, &momenta[3])?,
            ];
            let lhs = poly_times(&[(0, one.clone()), (1, -one.clone())], &weighted(3, b));
            let rhs = poly_times(&[(0, -q.clone()), (1, -q)], &weighted(2, b));
            vec![weighted(1, b), lhs.plus(&rhs), d_vi_b(b, &ns)]
        }
    })
}

/// Table of block coefficients up to `n_max`, including every lattice point the recursion
/// touched (and all points with `2 j^2 + N <= n_max` at `c = 1`).
pub fn fast_block(params: &FastParams, n_max: usize) -> Result<CoeffTable> {
    let mut engine = Engine::new(params.clone())?;
    engine.ops = scheme_ops(params)?;
    for n in 0..=n_max {
        engine.entry((0, 0), n)?;
    }
    if engine.is_c1() {
        let mut j = 1i32;
        while 2 * (j * j) as usize <= n_max {
            for key in [(j, 0), (-j, 0)] {
                for n in 0..=n_max - 2 * (j * j) as usize {
                    engine.entry(key, n)?;
                }
            }
            j += 1;
        }
    }
    let entries = engine.memo.into_iter().collect();
    Ok(CoeffTable { scheme: params.scheme(), n_max, entries })
}

/// `B_sigma(N)` at `c = 1` from the `s^1` relation centered at `sigma + 1/2`, with the other
/// coefficients taken from the `s^0` tables. Independent of the `s^0` relation at `sigma`.
/// Lower-order entries may be seeded from an existing `s^0` table; order `N` itself is never read.
pub fn c1_irregular_half_centered(sigma: &Scalar, order: usize, seed: Option<&CoeffTable>) -> Result<Scalar> {
    let params = FastParams::C1Irregular { sigma: sigma.clone() };
    let mut engine = Engine::new(params)?;
    engine.ops = vec![d_iii()];
    if let Some(table) = seed {
        if table.scheme != Scheme::C1Irregular {
            return Err(BilinearError::WrongParameters { id: "half-centered".into(), needs: "c1-irregular".into() });
        }
        engine.memo.extend(table.entries.iter().filter(|((key, n), _)| !(*key == (0, 0) && *n >= order)).map(|(k, v)| (*k, v.clone())));
    }
    let op = d_iii();
    // Terms `F_{sigma+n+1} F_{sigma-n}` at relative order `2u^2`, `u = n + 1/2`.
    let two_order = 2 * order as i64 + 1;
    let mut known = Scalar::zero();
    let mut coef = Scalar::zero();
    let mut umax = 1i64;
    while (umax + 2) * (umax + 2) <= two_order {
        umax += 2;
    }
    let mut t = -umax;
    while t <= umax {
        let n = ((t - 1) / 2) as i32;
        let w = c_ratio_p3(sigma, HalfInt::int(n), 1)?;
        let (kl, kr) = ((n + 1, 0), (-n, 0));
        let dl = (sigma + &Scalar::int((n + 1) as i64)).square();
        let dr = (sigma - &Scalar::int(n as i64)).square();
        // Relative order of the pair `(M1, M2)` with shift `s` is `t^2/2 + M1 + M2 + s`.
        let rel2 = two_order - t * t;
        for shift in 0..=op.max_shift() {
            let budget2 = rel2 - 2 * shift;
            if budget2 < 0 || budget2 % 2 != 0 {
                continue;
            }
            let budget = (budget2 / 2) as usize;
            for m1 in 0..=budget {
                let m2 = budget - m1;
                let wv = op.weight_at(&(&dl + &Scalar::int(m1 as i64)), &(&dr + &Scalar::int(m2 as i64)), shift);
                if wv.is_zero() {
                    continue;
                }
                let unknown_left = kl == (0, 0) && m1 == order;
                let unknown_right = kr == (0, 0) && m2 == order;
                if unknown_left {
                    coef += &(&w * &(wv * engine.coeff(kr, 0, m2)?));
                } else if unknown_right {
                    coef += &(&w * &(wv * engine.coeff(kl, 0, m1)?));
                } else {
                    known += &(&w * &(wv * (engine.coeff(kl, 0, m1)? * engine.coeff(kr, 0, m2)?)));
                }
            }
        }
        t += 2;
    }
    if coef.is_zero() {
        return Err(BilinearError::Resonance { order, lattice: "half-centered".into() });
    }
    Ok((-known).checked_div(&coef)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub scheme: String,
    pub n: usize,
    pub wall_ms: f64,
}

/// Wall-clock time to fill the fast table to each `N` (fresh table per entry).
pub fn benchmark(params: &FastParams, n_list: &[usize]) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let start = Instant::now();
        fast_block(params, n)?;
        rows.push(BenchRow { scheme: params.scheme().name().to_string(), n, wall_ms: start.elapsed().as_secs_f64() * 1e3 });
    }
    Ok(rows)
}

/// Least-squares slope of `log wall_ms` against `log N`.
pub fn growth_exponent(rows: &[BenchRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.wall_ms > 0.0).map(|r| ((r.n as f64).ln(), r.wall_ms.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
