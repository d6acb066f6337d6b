//! Neveu-Schwarz sector of the N=1 superconformal algebra: Verma modules, chains and blocks.

use std::collections::HashMap;

use crate::kernel::{partitions_of, rat, solve, Flavor, GradedSeries, HalfInt, KernelError, Matrix, Partition, Scalar, StateVector};
use crate::virasoro::{q_squared, real_weight, VirasoroError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NsrError {
    #[error("NS weight {delta} is degenerate (m={m}, n={n}) at level {level}")]
    DegenerateWeight { delta: String, m: i32, n: i32, level: String },
    #[error("b^2 must differ from 0 and 1, got {0}")]
    ForbiddenB(String),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

type Result<T> = std::result::Result<T, NsrError>;

/// Basis monomial `L_{-lambda} G_{-mu} |Delta>`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct NsrWord {
    pub bos: Partition,
    pub fer: Partition,
}

impl NsrWord {
    pub fn level(&self) -> HalfInt {
        self.bos.weight() + self.fer.weight()
    }
}

pub type NsrVector = StateVector<NsrWord>;

/// A single generator `L_n` or `G_r`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    L(i32),
    G(HalfInt),
}

impl Mode {
    fn is_odd(self) -> bool {
        matches!(self, Mode::G(_))
    }

    fn twice(self) -> i32 {
        match self {
            Mode::L(n) => 2 * n,
            Mode::G(r) => r.twice(),
        }
    }
}

/// Basis of level `n`: fermionic weight ascending, then bosonic and fermionic partitions.
pub fn nsr_basis(n: HalfInt) -> Vec<NsrWord> {
    let mut out = Vec::new();
    let mut w = n.twice() % 2;
    while w <= n.twice() {
        let fer_weight = HalfInt::from_twice(w);
        let bos_weight = n - fer_weight;
        for bos in partitions_of(bos_weight, Flavor::Bosonic) {
            for fer in partitions_of(fer_weight, Flavor::Fermionic) {
                out.push(NsrWord { bos: bos.clone(), fer });
            }
        }
        w += 2;
    }
    out
}

/// `c_NS = 1 + 2Q^2`, highest weight, and `b^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NsrParams {
    b_sq: Scalar,
    c_ns: Scalar,
    delta: Scalar,
}

impl NsrParams {
    pub fn from_b_sq(b_sq: Scalar, delta: Scalar) -> Result<Self> {
        if b_sq.is_zero() || b_sq.is_one() {
            return Err(NsrError::ForbiddenB(b_sq.to_string()));
        }
        let c_ns = Scalar::one() + q_squared(&b_sq)?.scale(&rat(2, 1));
        Ok(NsrParams { b_sq, c_ns, delta })
    }

    pub fn from_b(b: &Scalar, delta: Scalar) -> Result<Self> {
        Self::from_b_sq(b.square(), delta)
    }

    /// `Delta^NS = (Q^2/4 - P^2)/2`.
    pub fn from_b_momentum(b: &Scalar, p: &Scalar) -> Result<Self> {
        let b_sq = b.square();
        Self::from_b_sq(b_sq.clone(), ns_weight(&b_sq, p)?)
    }

    pub fn b_sq(&self) -> &Scalar {
        &self.b_sq
    }

    pub fn c_ns(&self) -> &Scalar {
        &self.c_ns
    }

    pub fn delta(&self) -> &Scalar {
        &self.delta
    }

    pub fn with_delta(&self, delta: Scalar) -> Self {
        NsrParams { delta, ..self.clone() }
    }

    /// Rejects `P = +-(m b^{-1} + n b)/2` with `m, n >= 1`, `mn/2 <= level`.
    pub fn check_generic(&self, level: HalfInt) -> Result<()> {
        let q2 = q_squared(&self.b_sq)?;
        let p_sq = q2.scale(&rat(1, 4)) - self.delta.scale(&rat(2, 1));
        let inv = self.b_sq.inv()?;
        for m in 1..=level.twice().max(0) {
            for n in 1..=level.twice() {
                if m * n > level.twice() {
                    break;
                }
                let (mm, nn) = (m as i64, n as i64);
                let target = (inv.scale(&rat(mm * mm, 1)) + Scalar::int(2 * mm * nn) + self.b_sq.scale(&rat(nn * nn, 1)))
                    .scale(&rat(1, 4));
                if target == p_sq {
                    return Err(NsrError::DegenerateWeight { delta: self.delta.to_string(), m, n, level: level.to_string() });
                }
            }
        }
        Ok(())
    }
}

pub fn ns_weight(b_sq: &Scalar, p: &Scalar) -> Result<Scalar> {
    Ok((q_squared(b_sq)?.scale(&rat(1, 4)) - p.square()).scale(&rat(1, 2)))
}

/// Super-commutator `[X, Y}` as an optional mode term plus a central constant.
fn supercommutator(x: Mode, y: Mode, c_ns: &Scalar) -> (Option<(Mode, Scalar)>, Scalar) {
    match (x, y) {
        (Mode::L(n), Mode::L(m)) => {
            let central = if n + m == 0 {
                let n = n as i64;
                c_ns.scale(&rat(n * n * n - n, 8))
            } else {
                Scalar::zero()
            };
            (Some((Mode::L(n + m), Scalar::int((n - m) as i64))), central)
        }
        (Mode::L(n), Mode::G(r)) => {
            (Some((Mode::G(HalfInt::int(n) + r), Scalar::frac((n - r.twice()) as i64, 2))), Scalar::zero())
        }
        (Mode::G(r), Mode::L(n)) => {
            (Some((Mode::G(HalfInt::int(n) + r), Scalar::frac((r.twice() - n) as i64, 2))), Scalar::zero())
        }
        (Mode::G(r), Mode::G(s)) => {
            let central = if r.twice() + s.twice() == 0 {
                let t = r.twice() as i64;
                c_ns.scale(&rat(t * t - 1, 8))
            } else {
                Scalar::zero()
            };
            (Some((Mode::L((r.twice() + s.twice()) / 2), Scalar::int(2))), central)
        }
    }
}

/// Action of NSR modes on the basis `L_{-lambda} G_{-mu}|Delta>`, memoized.
pub struct NsrModule {
    c_ns: Scalar,
    delta: Scalar,
    cache: HashMap<(Mode, NsrWord), NsrVector>,
}

impl NsrModule {
    pub fn new(p: &NsrParams) -> Self {
        NsrModule { c_ns: p.c_ns.clone(), delta: p.delta.clone(), cache: HashMap::new() }
    }

    pub fn apply(&mut self, x: Mode, word: &NsrWord) -> NsrVector {
        let key = (x, word.clone());
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let out = self.apply_uncached(x, word);
        self.cache.insert(key, out.clone());
        out
    }

    fn apply_uncached(&mut self, x: Mode, word: &NsrWord) -> NsrVector {
        let head = if let Some((h, rest)) = word.bos.split_first() {
            Some((Mode::L(-(h.twice() / 2)), NsrWord { bos: rest, fer: word.fer.clone() }))
        } else {
            word.fer.split_first().map(|(h, rest)| (Mode::G(-h), NsrWord { bos: Partition::default(), fer: rest }))
        };
        let Some((y, rest)) = head else {
            return match x {
                Mode::L(0) => NsrVector::basis(NsrWord::default()).scale(&self.delta),
                Mode::L(n) if n < 0 => NsrVector::basis(NsrWord { bos: Partition::from_ints(&[-n]), fer: Partition::default() }),
                Mode::G(r) if r.twice() < 0 => {
                    NsrVector::basis(NsrWord { bos: Partition::default(), fer: Partition::new(vec![-r]) })
                }
                _ => NsrVector::new(),
            };
        };
        if x.twice() < 0 {
            match (x, y) {
                (Mode::L(n), Mode::L(m)) if n <= m => {
                    return NsrVector::basis(NsrWord { bos: word.bos.prepend(HalfInt::int(-n)), fer: word.fer.clone() });
                }
                (Mode::L(n), Mode::G(_)) => {
                    return NsrVector::basis(NsrWord { bos: Partition::from_ints(&[-n]), fer: word.fer.clone() });
                }
                (Mode::G(r), Mode::G(s)) if r < s => {
                    return NsrVector::basis(NsrWord { bos: Partition::default(), fer: word.fer.prepend(-r) });
                }
                (Mode::G(r), Mode::G(s)) if r == s => {
                    return self.apply(Mode::L(r.twice()), &rest);
                }
                _ => {}
            }
        }
        let sign = if x.is_odd() && y.is_odd() { Scalar::int(-1) } else { Scalar::one() };
        let inner = self.apply(x, &rest);
        let mut out = NsrVector::new();
        for (w, c) in inner.iter() {
            let image = self.apply(y, w);
            out.add_scaled(&image, &(c * &sign));
        }
        let (term, central) = supercommutator(x, y, &self.c_ns);
        if let Some((z, k)) = term {
            let image = self.apply(z, &rest);
            out.add_scaled(&image, &k);
        }
        out.add_scaled(&NsrVector::basis(rest), &central);
        out
    }

    pub fn apply_vec(&mut self, x: Mode, v: &NsrVector) -> NsrVector {
        let mut out = NsrVector::new();
        for (w, c) in v.iter() {
            let image = self.apply(x, w);
            out.add_scaled(&image, c);
        }
        out
    }

    /// Lowering sequence dual to `word`: `L_{lambda_1}, ..., L_{lambda_k}, G_{mu_1}, ..., G_{mu_m}`.
    pub fn dual_sequence(word: &NsrWord) -> Vec<Mode> {
        let mut seq: Vec<Mode> = word.bos.parts().iter().map(|p| Mode::L(p.twice() / 2)).collect();
        seq.extend(word.fer.parts().iter().map(|&r| Mode::G(r)));
        seq
    }

    pub fn pairing(&mut self, bra: &NsrWord, ket: &NsrVector) -> Scalar {
        let mut v = ket.clone();
        for m in Self::dual_sequence(bra) {
            v = self.apply_vec(m, &v);
            if v.is_zero() {
                return Scalar::zero();
            }
        }
        v.coeff(&NsrWord::default())
    }

    pub fn gram(&mut self, level: HalfInt) -> Matrix {
        let basis = nsr_basis(level);
        basis
            .iter()
            .map(|bra| basis.iter().map(|ket| self.pairing(bra, &NsrVector::basis(ket.clone()))).collect())
            .collect()
    }
}

pub fn nsr_gram_matrix(p: &NsrParams, level: HalfInt) -> Result<Matrix> {
    p.check_generic(level)?;
    Ok(NsrModule::new(p).gram(level))
}

/// Source of a pair of NS chain vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum NsrSource {
    Regular { delta1: Scalar, delta2: Scalar },
    /// Irregular limit: `G_{1/2}|N> = |N-1/2>`, `G_{3/2}|N> = 0`.
    Whittaker,
}

impl NsrSource {
    /// Walks the dual sequence of `word` down from `|N>` (or `|N~>` if `tilded`).
    fn projection(&self, delta: &Scalar, n: HalfInt, tilded: bool, word: &NsrWord, seed: &Scalar) -> Scalar {
        let mut level = n;
        let mut tilde = tilded;
        let mut acc = Scalar::one();
        for m in NsrModule::dual_sequence(word) {
            let step = HalfInt::from_twice(m.twice());
            let k = match self {
                NsrSource::Whittaker => match m {
                    Mode::L(1) => Scalar::one(),
                    Mode::G(r) if r == HalfInt::HALF => Scalar::one(),
                    _ => Scalar::zero(),
                },
                NsrSource::Regular { delta1, delta2 } => {
                    let common = delta - delta1 + Scalar::real(level.to_rational());
                    match (m, tilde) {
                        (Mode::L(k), false) => common + delta2.scale(&rat(k as i64, 1)) - Scalar::int(k as i64),
                        (Mode::L(k), true) => common + delta2.scale(&rat(k as i64, 1)) - Scalar::frac(k as i64, 2),
                        (Mode::G(r), true) => {
                            tilde = false;
                            common + delta2.scale(&rat(r.twice() as i64, 1)) - Scalar::real(r.to_rational())
                        }
                        (Mode::G(_), false) => {
                            tilde = true;
                            Scalar::one()
                        }
                    }
                }
            };
            acc = &acc * &k;
            if acc.is_zero() {
                return acc;
            }
            level = level - step;
        }
        if matches!(self, NsrSource::Regular { .. }) && tilde {
            acc = &acc * seed;
        }
        acc
    }
}

/// Plain and tilded chain vectors, indexed by `2N`.
#[derive(Clone, Debug)]
pub struct NsrChainPair {
    pub plain: Vec<NsrVector>,
    pub tilded: Vec<NsrVector>,
    proj_plain: Vec<Vec<Scalar>>,
    proj_tilded: Vec<Vec<Scalar>>,
    pub source: NsrSource,
}

fn solve_level(module: &mut NsrModule, level: HalfInt, rhs: &[Scalar], delta: &Scalar) -> Result<NsrVector> {
    let basis = nsr_basis(level);
    let gram = module.gram(level);
    let x = solve(&gram, rhs).map_err(|_| NsrError::DegenerateWeight {
        delta: delta.to_string(),
        m: 0,
        n: 0,
        level: level.to_string(),
    })?;
    let mut v = NsrVector::new();
    for (w, c) in basis.into_iter().zip(x) {
        v.add_term(w, c);
    }
    Ok(v)
}

fn build_pair(p: &NsrParams, source: NsrSource, n_max: HalfInt, seed: &Scalar) -> Result<NsrChainPair> {
    p.check_generic(n_max)?;
    let mut module = NsrModule::new(p);
    let mut pair = NsrChainPair {
        plain: Vec::new(),
        tilded: Vec::new(),
        proj_plain: Vec::new(),
        proj_tilded: Vec::new(),
        source: source.clone(),
    };
    for t in 0..=n_max.twice() {
        let level = HalfInt::from_twice(t);
        let basis = nsr_basis(level);
        let rp: Vec<Scalar> = basis.iter().map(|w| source.projection(&p.delta, level, false, w, seed)).collect();
        let rt: Vec<Scalar> = basis.iter().map(|w| source.projection(&p.delta, level, true, w, seed)).collect();
        pair.plain.push(solve_level(&mut module, level, &rp, &p.delta)?);
        pair.tilded.push(if rt == rp { pair.plain[t as usize].clone() } else { solve_level(&mut module, level, &rt, &p.delta)? });
        pair.proj_plain.push(rp);
        pair.proj_tilded.push(rt);
    }
    Ok(pair)
}

pub fn nsr_chain_pair(p: &NsrParams, delta1: &Scalar, delta2: &Scalar, n_max: HalfInt) -> Result<NsrChainPair> {
    let src = NsrSource::Regular { delta1: delta1.clone(), delta2: delta2.clone() };
    build_pair(p, src, n_max, &Scalar::one())
}

pub fn nsr_whittaker(p: &NsrParams, n_max: HalfInt) -> Result<NsrChainPair> {
    build_pair(p, NsrSource::Whittaker, n_max, &Scalar::one())
}

/// `<N|N>` through the Gram form; the single place where bra and ket chains meet.
fn pair_chains(bra: &NsrVector, ket_proj: &[Scalar], two_n: usize) -> Scalar {
    let basis = nsr_basis(HalfInt::from_twice(two_n as i32));
    basis.iter().zip(ket_proj).map(|(w, r)| bra.coeff(w) * r).sum()
}

/// Coefficients of `(F, F~)` indexed by `2N`.
pub fn nsr_block_coefficients(p: &NsrParams, externals: &[Scalar; 4], n_max: HalfInt) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    nsr_block_coefficients_seeded(p, externals, n_max, &Scalar::one())
}

/// As [`nsr_block_coefficients`] with the tilded seed `|0~> = seed |Delta>`.
pub fn nsr_block_coefficients_seeded(
    p: &NsrParams,
    externals: &[Scalar; 4],
    n_max: HalfInt,
    seed: &Scalar,
) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    let [d1, d2, d3, d4] = externals;
    let ket = build_pair(p, NsrSource::Regular { delta1: d1.clone(), delta2: d2.clone() }, n_max, seed)?;
    let bra = build_pair(p, NsrSource::Regular { delta1: d4.clone(), delta2: d3.clone() }, n_max, seed)?;
    let plain = (0..=n_max.twice() as usize).map(|t| pair_chains(&bra.plain[t], &ket.proj_plain[t], t)).collect();
    let tilded = (0..=n_max.twice() as usize).map(|t| pair_chains(&bra.tilded[t], &ket.proj_tilded[t], t)).collect();
    Ok((plain, tilded))
}

/// Coefficients of the irregular block indexed by `2N`.
pub fn nsr_irregular_coefficients(p: &NsrParams, n_max: HalfInt) -> Result<Vec<Scalar>> {
    let w = nsr_whittaker(p, n_max)?;
    Ok((0..=n_max.twice() as usize).map(|t| pair_chains(&w.plain[t], &w.proj_plain[t], t)).collect())
}

fn half_grid(delta: &Scalar, coeffs: &[Scalar], n_max: HalfInt) -> Result<GradedSeries> {
    let d = real_weight(delta)?;
    Ok(GradedSeries::from_grid(&d, &rat(1, 2), coeffs, Some(&d + n_max.to_rational())))
}

pub fn nsr_blocks(p: &NsrParams, externals: &[Scalar; 4], n_max: HalfInt) -> Result<(GradedSeries, GradedSeries)> {
    let (f, ft) = nsr_block_coefficients(p, externals, n_max)?;
    Ok((half_grid(&p.delta, &f, n_max)?, half_grid(&p.delta, &ft, n_max)?))
}

pub fn nsr_block_irregular(p: &NsrParams, n_max: HalfInt) -> Result<GradedSeries> {
    let f = nsr_irregular_coefficients(p, n_max)?;
    half_grid(&p.delta, &f, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NsrParams {
        NsrParams::from_b_momentum(&Scalar::frac(2, 3), &Scalar::frac(1, 5)).unwrap()
    }

    fn ext() -> [Scalar; 4] {
        [Scalar::frac(1, 3), Scalar::frac(5, 4), Scalar::frac(-2, 5), Scalar::frac(7, 6)]
    }

    #[test]
    fn low_grams() {
        let p = params();
        assert_eq!(nsr_gram_matrix(&p, HalfInt::ZERO).unwrap(), vec![vec![Scalar::one()]]);
        assert_eq!(nsr_gram_matrix(&p, HalfInt::HALF).unwrap(), vec![vec![p.delta().scale(&rat(2, 1))]]);
        let g = nsr_gram_matrix(&p, HalfInt::from_twice(3)).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0][1], g[1][0]);
    }

    #[test]
    fn l0_weights() {
        let p = params();
        let mut m = NsrModule::new(&p);
        for w in nsr_basis(HalfInt::from_twice(5)) {
            let v = m.apply(Mode::L(0), &w);
            let expect = p.delta() + &Scalar::frac(5, 2);
            assert_eq!(v, NsrVector::basis(w).scale(&expect));
        }
    }

    #[test]
    fn chain_half_level() {
        let p = params();
        let e = ext();
        let ch = nsr_chain_pair(&p, &e[0], &e[1], HalfInt::int(1)).unwrap();
        let g = NsrWord { bos: Partition::default(), fer: Partition::new(vec![HalfInt::HALF]) };
        let two_d = p.delta().scale(&rat(2, 1));
        assert_eq!(ch.plain[1].coeff(&g), two_d.inv().unwrap());
        let tilde = (p.delta() + &e[1] - &e[0]).checked_div(&two_d).unwrap();
        assert_eq!(ch.tilded[1].coeff(&g), tilde);
        let mut m = NsrModule::new(&p);
        let back = m.apply_vec(Mode::G(HalfInt::HALF), &ch.tilded[1]);
        assert_eq!(back, NsrVector::basis(NsrWord::default()).scale(&(p.delta() + &e[1] - &e[0])));
    }

    #[test]
    fn block_half_coefficients() {
        let p = params();
        let e = ext();
        let (f, ft) = nsr_block_coefficients(&p, &e, HalfInt::int(1)).unwrap();
        let two_d = p.delta().scale(&rat(2, 1));
        assert_eq!(f[0], Scalar::one());
        assert_eq!(ft[0], Scalar::one());
        assert_eq!(f[1], two_d.inv().unwrap());
        let d = p.delta();
        let num = (d + &e[1] - &e[0]) * (d + &e[2] - &e[3]);
        assert_eq!(ft[1], num.checked_div(&two_d).unwrap());
        let irr = nsr_irregular_coefficients(&p, HalfInt::int(1)).unwrap();
        assert_eq!(irr[1], two_d.inv().unwrap());
    }
}
