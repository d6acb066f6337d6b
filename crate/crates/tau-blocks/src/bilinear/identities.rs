//! Residuals of the bilinear relations between `NSR` blocks and products of Virasoro blocks.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use super::hirota::{d_iii, d_iii_b, d_vi, d_vi_b, poly_series, q_pow, BilinearOperator, HirotaSpec};
use super::{BilinearError, Result};
use crate::blowup::{beta12, c_ratio_p3, c_ratio_p6, l_n21_l34, l_n_irr, vir12_b_sq, vir12_external, vir12_weights, Coupling};
use crate::kernel::{geometric, rat, GradedSeries, HalfInt, Scalar};
use crate::nsr::{ns_weight, nsr_block_irregular, nsr_blocks, NsrParams};
use crate::virasoro::{irregular_coefficients, regular_coefficients, VirParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IdentityId {
    BlockDecomp,
    Bilin,
    Bilin0,
    Bilin1,
    Relsh20,
    T1,
    T3,
    Relsh32,
    S0,
    S1,
    S0Pvi,
    S1Pvi,
    ChainDecomp,
    PviBilin,
    T1g,
    T2g,
    T3g,
    Relsh32g,
}

const NAMES: [(IdentityId, &str); 18] = [
    (IdentityId::BlockDecomp, "blockdecomp"),
    (IdentityId::Bilin, "bilin"),
    (IdentityId::Bilin0, "bilin0"),
    (IdentityId::Bilin1, "bilin1"),
    (IdentityId::Relsh20, "relsh20"),
    (IdentityId::T1, "t1"),
    (IdentityId::T3, "t3"),
    (IdentityId::Relsh32, "relsh32"),
    (IdentityId::S0, "s0"),
    (IdentityId::S1, "s1"),
    (IdentityId::S0Pvi, "s0pvi"),
    (IdentityId::S1Pvi, "s1pvi"),
    (IdentityId::ChainDecomp, "chdecomp"),
    (IdentityId::PviBilin, "pvibilin"),
    (IdentityId::T1g, "t1g"),
    (IdentityId::T2g, "t2g"),
    (IdentityId::T3g, "t3g"),
    (IdentityId::Relsh32g, "relsh32g"),
];

impl IdentityId {
    pub fn all() -> Vec<IdentityId> {
        NAMES.iter().map(|(i, _)| *i).collect()
    }

    pub fn name(self) -> &'static str {
        NAMES.iter().find(|(i, _)| *i == self).map(|(_, n)| *n).unwrap()
    }

    /// Which parameter family the identity takes.
    pub fn family(self) -> &'static str {
        use IdentityId::*;
        match self {
            BlockDecomp | Bilin | Bilin0 | Bilin1 | Relsh20 | T1 | T3 | Relsh32 => "irregular (b, P)",
            S0 | S1 => "third Painlevé (sigma)",
            S0Pvi | S1Pvi => "sixth Painlevé (sigma, theta)",
            ChainDecomp | PviBilin | T1g | T2g | T3g | Relsh32g => "regular (b, P, P1..P4)",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = BilinearError;
    fn from_str(s: &str) -> Result<Self> {
        NAMES.iter().find(|(_, n)| *n == s).map(|(i, _)| *i).ok_or_else(|| BilinearError::UnknownIdentity(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrregularPoint {
    pub b: Scalar,
    pub p: Scalar,
}

/// `momenta = [P_1, P_2, P_3, P_4]` of the external NS fields.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularPoint {
    pub b: Scalar,
    pub p: Scalar,
    pub momenta: [Scalar; 4],
}

impl RegularPoint {
    pub fn ns_externals(&self) -> Result<[Scalar; 4]> {
        let b_sq = self.b.square();
        let w = |p: &Scalar| ns_weight(&b_sq, p);
        Ok([w(&self.momenta[0])?, w(&self.momenta[1])?, w(&self.momenta[2])?, w(&self.momenta[3])?])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IdentityParams {
    Irregular(IrregularPoint),
    Regular(RegularPoint),
    P3 { sigma: Scalar },
    P6 { sigma: Scalar, theta: [Scalar; 4] },
}

/// Which lattice points `n` enter a decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    All,
    Integer,
    HalfOdd,
}

impl Sector {
    fn admits(self, n: HalfInt) -> bool {
        match self {
            Sector::All => true,
            Sector::Integer => n.is_integer(),
            Sector::HalfOdd => !n.is_integer(),
        }
    }
}

/// One summand `weight * F^(1)_n * F^(2)_n` of a block decomposition.
#[derive(Clone, Debug)]
pub struct DecompTerm {
    pub n: HalfInt,
    pub weight: Scalar,
    pub first: GradedSeries,
    pub second: GradedSeries,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub id: IdentityId,
    /// Exponent of the leading term; the residual is trusted to `base + order`.
    #[serde(serialize_with = "ser_rat")]
    pub base: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub order: BigRational,
    pub residual: GradedSeries,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::kernel::exponent_string(r))
}

impl Verification {
    pub fn pass(&self) -> bool {
        self.residual.vanishes_to(&(&self.base + &self.order)).unwrap_or(false)
    }

    /// Highest relative order at which the residual is known to vanish.
    pub fn residual_max_order(&self) -> BigRational {
        match self.residual.first_nonzero_to(&(&self.base + &self.order)) {
            Some(e) => e - &self.base,
            None => self.order.clone(),
        }
    }
}

pub(crate) fn real(x: &Scalar) -> Result<BigRational> {
    x.as_real().cloned().ok_or_else(|| BilinearError::NonRealExponent(x.to_string()))
}

/// Lattice `n` (as `2n`) with `2n^2 <= order`, widened by `extra_shells`.
fn shells(order: HalfInt, extra_shells: u32) -> Vec<i32> {
    let two_order = order.twice();
    let mut tmax = 0;
    while (tmax + 1) * (tmax + 1) <= two_order {
        tmax += 1;
    }
    let tmax = tmax + extra_shells as i32;
    (-tmax..=tmax).collect()
}

/// `q^delta sum_M coeffs[M] scale^M q^M` trusted to `q^{delta + rel}`.
fn grid_series(delta: &Scalar, coeffs: &[Scalar], scale: &Scalar, rel: &BigRational) -> Result<GradedSeries> {
    let d = real(delta)?;
    let mut s = GradedSeries::zero(Some(&d + rel));
    let mut k = Scalar::one();
    for (m, c) in coeffs.iter().enumerate() {
        s.add_term(&d + rat(m as i64, 1), c * &k);
        k = &k * scale;
    }
    Ok(s)
}

fn level_of(rel: &BigRational) -> i32 {
    if rel.is_negative() {
        0
    } else {
        rel.floor().to_integer().try_into().unwrap_or(i32::MAX)
    }
}

fn clamp(rel: BigRational) -> BigRational {
    if rel.is_negative() {
        rat(0, 1)
    } else {
        rel
    }
}

fn two_n_sq(t: i32) -> BigRational {
    rat((t * t) as i64, 2)
}

/// Terms of the irregular decomposition `F_NS = sum l_n^2 F^(1)_n(beta1 q) F^(2)_n(beta2 q)`,
/// with the base exponent `Delta_NS`.
pub fn irregular_terms(pt: &IrregularPoint, order: HalfInt, extra_shells: u32, sector: Sector) -> Result<(Vec<DecompTerm>, BigRational)> {
    let c = Coupling::new(&pt.b)?;
    let (b1_sq, b2_sq) = vir12_b_sq(&c)?;
    let (beta1, beta2) = beta12(&c)?;
    let base = real(&ns_weight(&c.b_sq(), &pt.p)?)?;
    let mut terms = Vec::new();
    for t in shells(order, extra_shells) {
        let n = HalfInt::from_twice(t);
        if !sector.admits(n) {
            continue;
        }
        let rel = clamp(order.to_rational() - two_n_sq(t));
        let lvl = level_of(&rel);
        let (d1, d2) = vir12_weights(&c, &pt.p, n)?;
        let weight = l_n_irr(&c, &pt.p, n)?.reduced;
        let c1 = irregular_coefficients(&VirParams::from_b_sq(b1_sq.clone(), d1.clone())?, lvl)?;
        let c2 = irregular_coefficients(&VirParams::from_b_sq(b2_sq.clone(), d2.clone())?, lvl)?;
        let first = grid_series(&d1, &c1, &beta1, &rel)?;
        let second = grid_series(&d2, &c2, &beta2, &rel)?;
        terms.push(DecompTerm { n, weight, first, second });
    }
    Ok((terms, base))
}

/// Terms of the chain decomposition `F_NS = sum l^21_n l^34_n F^(1)_n F^(2)_n`.
pub fn regular_terms(pt: &RegularPoint, order: HalfInt, extra_shells: u32, sector: Sector) -> Result<(Vec<DecompTerm>, BigRational)> {
    let c = Coupling::new(&pt.b)?;
    let (b1_sq, b2_sq) = vir12_b_sq(&c)?;
    let base = real(&ns_weight(&c.b_sq(), &pt.p)?)?;
    let ns = pt.ns_externals()?;
    let mut ext1 = Vec::new();
    let mut ext2 = Vec::new();
    for d in &ns {
        let (a, b) = vir12_external(&c, d)?;
        ext1.push(a);
        ext2.push(b);
    }
    let ext1: [Scalar; 4] = ext1.try_into().unwrap();
    let ext2: [Scalar; 4] = ext2.try_into().unwrap();
    let mut terms = Vec::new();
    for t in shells(order, extra_shells) {
        let n = HalfInt::from_twice(t);
        if !sector.admits(n) {
            continue;
        }
        let rel = clamp(order.to_rational() - two_n_sq(t));
        let lvl = level_of(&rel);
        let (d1, d2) = vir12_weights(&c, &pt.p, n)?;
        let weight = l_n21_l34(&c, &pt.p, &pt.momenta, n)?;
        let c1 = regular_coefficients(&VirParams::from_b_sq(b1_sq.clone(), d1.clone())?, &ext1, lvl)?;
        let c2 = regular_coefficients(&VirParams::from_b_sq(b2_sq.clone(), d2.clone())?, &ext2, lvl)?;
        let first = grid_series(&d1, &c1, &Scalar::one(), &rel)?;
        let second = grid_series(&d2, &c2, &Scalar::one(), &rel)?;
        terms.push(DecompTerm { n, weight, first, second });
    }
    Ok((terms, base))
}

fn weighted_sum(terms: &[DecompTerm], op: &BilinearOperator) -> GradedSeries {
    let mut acc: Option<GradedSeries> = None;
    for t in terms {
        let s = op.apply(&t.first, &t.second).scale(&t.weight);
        acc = Some(match acc {
            None => s,
            Some(a) => a.add(&s),
        });
    }
    acc.unwrap_or_else(|| GradedSeries::zero(None))
}

fn hirota_sum(terms: &[DecompTerm], b: &Scalar, k: u32) -> GradedSeries {
    let spec = HirotaSpec::weighted(k, b);
    weighted_sum(terms, &BilinearOperator::single(spec.eps, k))
}

fn sqrt_q() -> GradedSeries {
    q_pow(rat(1, 2))
}

fn finish(id: IdentityId, residual: GradedSeries, base: BigRational, order: HalfInt) -> Verification {
    let order = order.to_rational();
    let residual = residual.truncate(&(&base + &order));
    Verification { id, base, order, residual }
}

fn wrong(id: IdentityId) -> BilinearError {
    BilinearError::WrongParameters { id: id.name().to_string(), needs: id.family().to_string() }
}

/// Residual of the named identity to relative order `order`.
pub fn verify_identity(id: IdentityId, params: &IdentityParams, order: HalfInt) -> Result<Verification> {
    verify_identity_with(id, params, order, 0)
}

/// As [`verify_identity`], summing `extra_shells` more lattice shells than the truncation rule needs.
pub fn verify_identity_with(id: IdentityId, params: &IdentityParams, order: HalfInt, extra_shells: u32) -> Result<Verification> {
    use IdentityId::*;
    match (id, params) {
        (BlockDecomp | Bilin | Bilin0 | Bilin1 | Relsh20 | T1 | T3 | Relsh32, IdentityParams::Irregular(pt)) => {
            irregular_identity(id, pt, order, extra_shells)
        }
        (ChainDecomp | PviBilin | T1g | T2g | T3g | Relsh32g, IdentityParams::Regular(pt)) => {
            regular_identity(id, pt, order, extra_shells)
        }
        (S0 | S1, IdentityParams::P3 { sigma }) => {
            let m = if id == S0 { 0 } else { 1 };
            let (residual, base) = c1_p3_residual(sigma, m, order, extra_shells)?;
            Ok(finish(id, residual, base, order))
        }
        (S0Pvi | S1Pvi, IdentityParams::P6 { sigma, theta }) => {
            let m = if id == S0Pvi { 0 } else { 1 };
            let (residual, base) = c1_p6_residual(sigma, theta, m, order, extra_shells)?;
            Ok(finish(id, residual, base, order))
        }
        _ => Err(wrong(id)),
    }
}

fn irregular_identity(id: IdentityId, pt: &IrregularPoint, order: HalfInt, extra: u32) -> Result<Verification> {
    use IdentityId::*;
    let sector = match id {
        Bilin0 => Sector::Integer,
        Bilin1 => Sector::HalfOdd,
        _ => Sector::All,
    };
    let (terms, base) = irregular_terms(pt, order, extra, sector)?;
    let b = &pt.b;
    let qq = b + &b.inv()?;
    let f_ns = || -> Result<GradedSeries> { Ok(nsr_block_irregular(&NsrParams::from_b_momentum(b, &pt.p)?, order)?) };
    let residual = match id {
        BlockDecomp => hirota_sum(&terms, b, 0).sub(&f_ns()?),
        Bilin | Bilin0 | Bilin1 => weighted_sum(&terms, &d_iii_b(b)),
        Relsh20 => hirota_sum(&terms, b, 2).add(&sqrt_q().mul(&hirota_sum(&terms, b, 0))),
        T1 => hirota_sum(&terms, b, 1),
        T3 => hirota_sum(&terms, b, 3).add(&sqrt_q().mul(&f_ns()?).scale(&qq)),
        Relsh32 => hirota_sum(&terms, b, 3).sub(&hirota_sum(&terms, b, 2).scale(&qq)),
        _ => unreachable!(),
    };
    Ok(finish(id, residual, base, order))
}

fn regular_identity(id: IdentityId, pt: &RegularPoint, order: HalfInt, extra: u32) -> Result<Verification> {
    use IdentityId::*;
    let (terms, base) = regular_terms(pt, order, extra, Sector::All)?;
    let b = &pt.b;
    let qq = b + &b.inv()?;
    let ns = pt.ns_externals()?;
    let blocks = || -> Result<(GradedSeries, GradedSeries)> {
        Ok(nsr_blocks(&NsrParams::from_b_momentum(b, &pt.p)?, &ns, order)?)
    };
    let cut = &base + order.to_rational() + rat(1, 1);
    let inv_one_minus_q = geometric(&Scalar::one(), &rat(1, 1), &cut);
    let one = Scalar::one();
    let residual = match id {
        ChainDecomp => hirota_sum(&terms, b, 0).sub(&blocks()?.0),
        PviBilin => weighted_sum(&terms, &d_vi_b(b, &ns)),
        T1g => hirota_sum(&terms, b, 1),
        T2g => {
            let rhs = sqrt_q().mul(&inv_one_minus_q).mul(&blocks()?.1).neg();
            hirota_sum(&terms, b, 2).sub(&rhs)
        }
        T3g => {
            let opq = poly_series(&[(0, one.clone()), (1, one.clone())]);
            let rhs = sqrt_q().mul(&opq).mul(&inv_one_minus_q).mul(&inv_one_minus_q).mul(&blocks()?.1).scale(&-qq.clone());
            hirota_sum(&terms, b, 3).sub(&rhs)
        }
        Relsh32g => {
            let omq = poly_series(&[(0, one.clone()), (1, -one.clone())]);
            let opq = poly_series(&[(0, one.clone()), (1, one.clone())]);
            omq.mul(&hirota_sum(&terms, b, 3)).sub(&opq.mul(&hirota_sum(&terms, b, 2)).scale(&qq))
        }
        _ => unreachable!(),
    };
    Ok(finish(id, residual, base, order))
}

/// `(sigma + n + m)^2 + (sigma - n)^2 = 2 s^2 + 2 u^2` with `s = sigma + m/2`, `u = n + m/2`.
fn c1_pairs(sigma: &Scalar, m: i32, order: HalfInt, extra: u32) -> Vec<(HalfInt, i32, Scalar, Scalar)> {
    let mut out = Vec::new();
    let two_order = order.twice();
    let mut umax = 0;
    while (umax + 1) * (umax + 1) <= two_order {
        umax += 1;
    }
    let umax = umax + extra as i32;
    for t in -umax..=umax {
        if (t - m).rem_euclid(2) != 0 {
            continue;
        }
        let u = HalfInt::from_twice(t);
        let n = (t - m) / 2;
        let left = sigma + &Scalar::int((n + m) as i64);
        let right = sigma - &Scalar::int(n as i64);
        out.push((u, n, left.square(), right.square()));
    }
    out
}

fn c1_base(sigma: &Scalar, m: i32) -> Result<BigRational> {
    let s = sigma + &Scalar::frac(m as i64, 2);
    real(&s.square().scale(&rat(2, 1)))
}

/// Residual of the `s^m` coefficient of `D^III(tau, tau)` normalized by `C(sigma + m/2)^2`.
pub fn c1_p3_residual(sigma: &Scalar, m: i32, order: HalfInt, extra: u32) -> Result<(GradedSeries, BigRational)> {
    let base = c1_base(sigma, m)?;
    let op = d_iii();
    let mut acc = GradedSeries::zero(None);
    for (u, n, dl, dr) in c1_pairs(sigma, m, order, extra) {
        let rel = clamp(order.to_rational() - two_n_sq(u.twice()));
        let lvl = level_of(&rel);
        let w = c_ratio_p3(sigma, HalfInt::int(n), m)?;
        let f = c1_irregular(&dl, lvl, &rel)?;
        let g = c1_irregular(&dr, lvl, &rel)?;
        acc = acc.add(&op.apply(&f, &g).scale(&w));
    }
    Ok((acc, base))
}

/// Residual of the `s^m` coefficient of `D^VI(tau~, tau~)` up to an overall constant.
pub fn c1_p6_residual(sigma: &Scalar, theta: &[Scalar; 4], m: i32, order: HalfInt, extra: u32) -> Result<(GradedSeries, BigRational)> {
    let base = c1_base(sigma, m)?;
    let deltas = [theta[0].square(), theta[1].square(), theta[2].square(), theta[3].square()];
    let op = d_vi(&deltas);
    let s = sigma + &Scalar::frac(m as i64, 2);
    let mut acc = GradedSeries::zero(None);
    for (u, _, dl, dr) in c1_pairs(sigma, m, order, extra) {
        let rel = clamp(order.to_rational() - two_n_sq(u.twice()));
        let lvl = level_of(&rel);
        let w = c_ratio_p6(&s, theta, u)?;
        let f = c1_regular(&deltas, &dl, lvl, &rel)?;
        let g = c1_regular(&deltas, &dr, lvl, &rel)?;
        acc = acc.add(&op.apply(&f, &g).scale(&w));
    }
    Ok((acc, base))
}

pub(crate) fn c1_irregular(delta: &Scalar, lvl: i32, rel: &BigRational) -> Result<GradedSeries> {
    let coeffs = irregular_coefficients(&VirParams::from_c(Scalar::one(), delta.clone()), lvl)?;
    grid_series(delta, &coeffs, &Scalar::one(), rel)
}

pub(crate) fn c1_regular(externals: &[Scalar; 4], delta: &Scalar, lvl: i32, rel: &BigRational) -> Result<GradedSeries> {
    let coeffs = regular_coefficients(&VirParams::from_c(Scalar::one(), delta.clone()), externals, lvl)?;
    grid_series(delta, &coeffs, &Scalar::one(), rel)
}
