//! Painlevé III'_3 and VI tau functions as sums of `c = 1` blocks, their bilinear residuals,
//! and a high-precision numerical check of the zeta forms.

use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::bilinear::{d_iii, d_vi, fast_block, BilinearError, BilinearOperator, FastParams};
use crate::blowup::{kappa_p3, kappa_p6, BlowupError};
use crate::kernel::{rat, GradedSeries, HalfInt, KernelError, Scalar};
use crate::virasoro::{irregular_coefficients, regular_coefficients, VirParams, VirasoroError};

/// Binary floating point with a per-value precision.
pub type Real = FBig<HalfEven>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PainleveError {
    #[error("`{0}` must be a real rational here")]
    NonReal(String),
    #[error("shell n = {n} starts at exponent {exponent}, inside the trusted range; raise n_range")]
    MissingShell { n: i32, exponent: String },
    #[error("series tail estimate {estimate:e} exceeds tolerance {tolerance:e} at t = {t}")]
    TailTooLarge { t: f64, estimate: f64, tolerance: f64 },
    #[error("t = {0} is outside (0, 1)")]
    OutsideRange(f64),
    #[error("tau vanishes at t = {0}")]
    ZeroTau(f64),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("at least one sample is needed")]
    NoSamples,
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
    #[error(transparent)]
    Bilinear(#[from] BilinearError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, PainleveError>;

/// How the `c = 1` block coefficients of each shell are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum BlockSource {
    /// Inverse Gram matrix, level by level.
    #[default]
    Gram,
    /// The fast bilinear recursion centered at the shell's own `sigma + n`.
    Recursion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TauKind {
    /// Irregular blocks, operator `D^III`.
    P3,
    /// Four-point blocks with external weights `theta^2`, operator `D^VI`.
    P6 { theta: [Scalar; 4] },
}

/// `tau = sum_{|n| <= n_range} s^n kappa_n F((sigma+n)^2 | t)`, trusted up to `sigma^2 + n_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauSpec {
    pub kind: TauKind,
    pub sigma: Scalar,
    pub s: Scalar,
    pub n_range: u32,
    #[serde(serialize_with = "ser_rat")]
    pub n_max: BigRational,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// One shell of the tau sum.
#[derive(Clone, Debug)]
pub struct TauTerm {
    pub n: i32,
    /// `C(sigma+n)/(C(sigma) x^n)`.
    pub kappa: Scalar,
    /// `s^n kappa_n`.
    pub weight: Scalar,
    /// The block including its `t^{(sigma+n)^2}` prefactor.
    pub block: GradedSeries,
}

fn real_rational(x: &Scalar, what: &str) -> Result<BigRational> {
    x.as_real().cloned().ok_or_else(|| PainleveError::NonReal(format!("{what} = {x}")))
}

impl TauSpec {
    pub fn p3(sigma: Scalar, s: Scalar, n_range: u32, n_max: BigRational) -> Self {
        TauSpec { kind: TauKind::P3, sigma, s, n_range, n_max }
    }

    pub fn p6(sigma: Scalar, theta: [Scalar; 4], s: Scalar, n_range: u32, n_max: BigRational) -> Self {
        TauSpec { kind: TauKind::P6 { theta }, sigma, s, n_range, n_max }
    }

    /// Largest trusted exponent of the tau series.
    pub fn cutoff(&self) -> Result<BigRational> {
        let sigma = real_rational(&self.sigma, "sigma")?;
        Ok(&sigma * &sigma + &self.n_max)
    }

    /// `[Delta_0, Delta_t, Delta_1, Delta_inf]` for the sixth equation.
    pub fn deltas(&self) -> Option<[Scalar; 4]> {
        match &self.kind {
            TauKind::P3 => None,
            TauKind::P6 { theta } => Some([theta[0].square(), theta[1].square(), theta[2].square(), theta[3].square()]),
        }
    }

    pub fn kappa(&self, n: i32) -> Result<Scalar> {
        Ok(match &self.kind {
            TauKind::P3 => kappa_p3(&self.sigma, HalfInt::int(n))?,
            TauKind::P6 { theta } => kappa_p6(&self.sigma, theta, n)?,
        })
    }

    pub fn operator(&self) -> BilinearOperator {
        match self.deltas() {
            None => d_iii(),
            Some(d) => d_vi(&d),
        }
    }

    fn block(&self, n: i32, delta: &Scalar, level: i32, cutoff: &BigRational, source: BlockSource) -> Result<GradedSeries> {
        let coeffs = match source {
            BlockSource::Gram => {
                let p = VirParams::from_c(Scalar::one(), delta.clone());
                match self.deltas() {
                    None => irregular_coefficients(&p, level)?,
                    Some(d) => regular_coefficients(&p, &d, level)?,
                }
            }
            BlockSource::Recursion => {
                let sigma = &self.sigma + &Scalar::int(n as i64);
                let params = match &self.kind {
                    TauKind::P3 => FastParams::C1Irregular { sigma },
                    TauKind::P6 { theta } => FastParams::C1Regular { sigma, theta: theta.clone() },
                };
                fast_block(&params, level.max(0) as usize)?.center(0)
            }
        };
        let offset = real_rational(delta, "Delta")?;
        Ok(GradedSeries::from_grid(&offset, &rat(1, 1), &coeffs, Some(cutoff.clone())))
    }
}

/// The shells entering the tau series; every shell starting below the cutoff must be in range.
pub fn tau_terms(spec: &TauSpec) -> Result<Vec<TauTerm>> {
    tau_terms_with(spec, BlockSource::Gram)
}

pub fn tau_terms_with(spec: &TauSpec, source: BlockSource) -> Result<Vec<TauTerm>> {
    let cutoff = spec.cutoff()?;
    let sigma = real_rational(&spec.sigma, "sigma")?;
    let lead = |n: i32| -> BigRational {
        let x = &sigma + rat(n as i64, 1);
        &x * &x
    };
    let edge = spec.n_range as i32 + 1;
    for n in [-edge, edge] {
        if lead(n) <= cutoff {
            return Err(PainleveError::MissingShell { n, exponent: lead(n).to_string() });
        }
    }
    let mut terms = Vec::new();
    let r = spec.n_range as i32;
    for n in -r..=r {
        let delta = lead(n);
        if delta > cutoff {
            continue;
        }
        let level = (&cutoff - &delta).floor().to_integer().to_i32().unwrap_or(i32::MAX);
        let kappa = spec.kappa(n)?;
        let weight = &spec.s.pow(n as i64)? * &kappa;
        let block = spec.block(n, &Scalar::real(delta), level, &cutoff, source)?;
        terms.push(TauTerm { n, kappa, weight, block });
    }
    Ok(terms)
}

fn weighted_sum(terms: &[TauTerm], cutoff: &BigRational) -> GradedSeries {
    terms.iter().fold(GradedSeries::zero(Some(cutoff.clone())), |acc, t| acc.add(&t.block.scale(&t.weight)))
}

/// The tau series divided by `C(sigma)` (resp. `C(sigma, theta)`).
pub fn tau_series(spec: &TauSpec) -> Result<GradedSeries> {
    Ok(weighted_sum(&tau_terms(spec)?, &spec.cutoff()?))
}

/// As [`tau_series`] with the weight of shell `n` multiplied by `factor`.
pub fn tau_series_perturbed(spec: &TauSpec, n: i32, factor: &Scalar) -> Result<GradedSeries> {
    let mut terms = tau_terms(spec)?;
    for t in terms.iter_mut().filter(|t| t.n == n) {
        t.weight = &t.weight * factor;
    }
    Ok(weighted_sum(&terms, &spec.cutoff()?))
}

/// `D(tau, tau)` for the operator of `spec`, with the cutoff inherited from `tau`.
pub fn residual_of(spec: &TauSpec, tau: &GradedSeries) -> GradedSeries {
    spec.operator().apply(tau, tau)
}

pub fn tau_residual(spec: &TauSpec) -> Result<GradedSeries> {
    Ok(residual_of(spec, &tau_series(spec)?))
}

/// Coefficient of `s^m` in `D(tau, tau)`: `sum_{a+b=m} kappa_a kappa_b D(F_a, F_b)`.
pub fn tau_residual_sector(spec: &TauSpec, m: i32) -> Result<GradedSeries> {
    let terms = tau_terms(spec)?;
    let op = spec.operator();
    let mut acc: Option<GradedSeries> = None;
    for a in &terms {
        for b in terms.iter().filter(|b| a.n + b.n == m) {
            let part = op.apply(&a.block, &b.block).scale(&(&a.kappa * &b.kappa));
            acc = Some(match acc {
                None => part,
                Some(x) => x.add(&part),
            });
        }
    }
    Ok(acc.unwrap_or_else(|| GradedSeries::zero(None)))
}

/// Working precision and accepted tail of the truncated series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericOptions {
    pub digits: usize,
    pub tolerance: f64,
    pub blocks: BlockSource,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { digits: 60, tolerance: 1e-12, blocks: BlockSource::Recursion }
    }
}

impl NumericOptions {
    fn bits(&self) -> usize {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 16
    }
}

fn big_int(n: &num_bigint::BigInt) -> IBig {
    IBig::from_str(&n.to_string()).expect("decimal integer")
}

fn real_of(r: &BigRational, bits: usize) -> Real {
    let num = Real::from(big_int(r.numer())).with_precision(bits).value();
    let den = Real::from(big_int(r.denom())).with_precision(bits).value();
    num / den
}

fn real_f64(x: f64, bits: usize) -> Real {
    Real::try_from(x).expect("finite").with_precision(bits).value()
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

fn abs(x: &Real) -> Real {
    if *x < Real::ZERO {
        -x.clone()
    } else {
        x.clone()
    }
}

fn real_deltas(spec: &TauSpec, bits: usize) -> Result<Option<[Real; 4]>> {
    let Some(d) = spec.deltas() else { return Ok(None) };
    let mut out = Vec::new();
    for x in &d {
        out.push(real_of(&real_rational(x, "theta^2")?, bits));
    }
    Ok(Some(out.try_into().unwrap()))
}

/// `zeta`, `zeta'` and `zeta''` at one point.
#[derive(Clone, Debug)]
pub struct ZetaValues {
    pub t: Real,
    pub zeta: Real,
    pub d1: Real,
    pub d2: Real,
    /// Bound on the relative error (absolute below one) of `zeta`, `zeta'` and `zeta''`.
    pub tail_estimate: f64,
}

impl ZetaValues {
    /// `q = -1/zeta'` of the third equation.
    pub fn q(&self) -> Real {
        let one = Real::ONE.with_precision(self.zeta.precision()).value();
        -(one / &self.d1)
    }

    /// `p = t zeta''/2` of the third equation.
    pub fn p(&self) -> Real {
        let two = Real::from(2).with_precision(self.zeta.precision()).value();
        &self.t * &self.d2 / two
    }

    pub fn as_f64(&self) -> (f64, f64, f64) {
        (to_f64(&self.zeta), to_f64(&self.d1), to_f64(&self.d2))
    }
}

/// Float image of a tau series, evaluated term by term.
pub struct TauEvaluator {
    kind: TauKind,
    bits: usize,
    tolerance: f64,
    terms: Vec<(Real, Real)>,
    /// Last retained exponent and coefficient magnitude of each shell.
    tails: Vec<(f64, f64)>,
    /// `Delta_0 + Delta_t`: `tau~ = t^{Delta_0 + Delta_t} tau`.
    shift: Real,
}

impl TauEvaluator {
    pub fn new(spec: &TauSpec, options: &NumericOptions) -> Result<Self> {
        let bits = options.bits();
        let mut terms = Vec::new();
        let mut tails = Vec::new();
        for t in tau_terms_with(spec, options.blocks)? {
            let mut last = (0.0, 0.0);
            for (e, c) in t.block.terms() {
                let c = &t.weight * c;
                let cr = real_rational(&c, "tau coefficient")?;
                terms.push((real_of(e, bits), real_of(&cr, bits)));
                last = (e.to_f64().unwrap_or(f64::MAX), cr.abs().to_f64().unwrap_or(f64::MAX));
            }
            tails.push(last);
        }
        let deltas = real_deltas(spec, bits)?;
        let shift = match &deltas {
            Some([d0, dt, _, _]) => d0 + dt,
            None => Real::ZERO.with_precision(bits).value(),
        };
        Ok(TauEvaluator { kind: spec.kind.clone(), bits, tolerance: options.tolerance, terms, tails, shift })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Bounds on the omitted parts of `sum c e^k t^e / tau` for `k = 0..=3`.
    fn moment_tails(&self, t: f64, tau: f64) -> [f64; 4] {
        let geometric = 1.0 / (1.0 - t);
        let mut out = [0.0; 4];
        for &(e, c) in &self.tails {
            let base = c * t.powf(e + 1.0) * geometric / tau.abs();
            let mut w = base;
            for o in out.iter_mut() {
                *o += w;
                w *= (e + 1.0).max(1.0);
            }
        }
        out
    }

    /// Propagates the moment tails through the cumulants and the `1/t` factors of the derivatives.
    fn tail(&self, t: f64, tau: f64, m: [f64; 3], values: [f64; 3]) -> f64 {
        let d = self.moment_tails(t, tau);
        let [m1, m2, m3] = m.map(f64::abs);
        let dm = [d[1] + m1 * d[0], d[2] + m2 * d[0], d[3] + m3 * d[0]];
        let du1 = dm[0];
        let du2 = dm[1] + 2.0 * m1 * dm[0];
        let du3 = dm[2] + 3.0 * (m2 * dm[0] + m1 * dm[1]) + 6.0 * m1 * m1 * dm[0];
        let mut err = [du1, du2 / t, (du3 + du2) / (t * t)];
        if let TauKind::P6 { .. } = self.kind {
            err = [err[0], err[0] + err[1], 2.0 * err[1] + err[2]];
        }
        err.iter().zip(values).map(|(e, v)| 2.0 * e / v.abs().max(1.0)).fold(0.0, f64::max)
    }

    pub fn zeta(&self, t: f64) -> Result<ZetaValues> {
        if !(t > 0.0 && t < 1.0) {
            return Err(PainleveError::OutsideRange(t));
        }
        let tr = real_f64(t, self.bits);
        let lt = tr.ln();
        let zero = Real::ZERO.with_precision(self.bits).value();
        let mut s = [zero.clone(), zero.clone(), zero.clone(), zero];
        for (e, c) in &self.terms {
            let mut w = c * (e * &lt).exp();
            for sk in s.iter_mut() {
                *sk += &w;
                w *= e;
            }
        }
        if s[0] == Real::ZERO {
            return Err(PainleveError::ZeroTau(t));
        }
        let tau = to_f64(&s[0]);
        let m1 = &s[1] / &s[0];
        let m2 = &s[2] / &s[0];
        let m3 = &s[3] / &s[0];
        let two = Real::from(2).with_precision(self.bits).value();
        let three = Real::from(3).with_precision(self.bits).value();
        // Cumulants of t d/dt acting on log tau.
        let u1 = &m1 - &self.shift;
        let u2 = &m2 - &m1 * &m1;
        let u3 = &m3 - &three * &m2 * &m1 + &two * &m1 * &m1 * &m1;
        let g1 = &u2 / &tr;
        let g2 = (&u3 - &u2) / (&tr * &tr);
        let (zeta, d1, d2) = match self.kind {
            TauKind::P3 => (u1, g1, g2),
            TauKind::P6 { .. } => {
                let one = Real::ONE.with_precision(self.bits).value();
                let tm1 = &tr - &one;
                (&tm1 * &u1, &u1 + &tm1 * &g1, &two * &g1 + &tm1 * &g2)
            }
        };
        let moments = [to_f64(&m1), to_f64(&m2), to_f64(&m3)];
        let tail_estimate = self.tail(t, tau, moments, [to_f64(&zeta), to_f64(&d1), to_f64(&d2)]);
        if !(tail_estimate <= self.tolerance) {
            return Err(PainleveError::TailTooLarge { t, estimate: tail_estimate, tolerance: self.tolerance });
        }
        Ok(ZetaValues { t: tr, zeta, d1, d2, tail_estimate })
    }
}

/// `zeta = t d log tau/dt` (third) or `t(t-1) d log tau/dt` (sixth) and two derivatives.
pub fn zeta_eval(spec: &TauSpec, t: f64, options: &NumericOptions) -> Result<ZetaValues> {
    TauEvaluator::new(spec, options)?.zeta(t)
}

/// The zeta-form equations and their derivative solved for `zeta'''`.
#[derive(Clone, Debug)]
pub struct SigmaForm {
    kind: TauKind,
    bits: usize,
    deltas: Option<[Real; 4]>,
}

impl SigmaForm {
    pub fn new(spec: &TauSpec, options: &NumericOptions) -> Result<Self> {
        let bits = options.bits();
        let deltas = real_deltas(spec, bits)?;
        Ok(SigmaForm { kind: spec.kind.clone(), bits, deltas })
    }

    fn c(&self, n: i64) -> Real {
        Real::from(n).with_precision(self.bits).value()
    }

    /// `[[2D0, tz'-z, z'+K], [tz'-z, 2Dt, (t-1)z'-z], [z'+K, (t-1)z'-z, 2D1]]`, `K = D0+Dt+D1-Dinf`.
    fn matrix(&self, t: &Real, z: &Real, z1: &Real) -> [[Real; 3]; 3] {
        let [d0, dt, d1, dinf] = self.deltas.as_ref().expect("sixth equation");
        let two = self.c(2);
        let one = self.c(1);
        let k = d0 + dt + d1 - dinf;
        let a = t * z1 - z;
        let b = z1 + &k;
        let c = (t - &one) * z1 - z;
        [[&two * d0, a.clone(), b.clone()], [a, &two * dt, c.clone()], [b, c, &two * d1]]
    }

    /// LHS minus RHS of the zeta form.
    pub fn residual(&self, t: &Real, z: &Real, z1: &Real, z2: &Real) -> Real {
        match self.kind {
            TauKind::P3 => {
                let tz2 = t * z2;
                let four = self.c(4);
                &tz2 * &tz2 - &four * z1 * z1 * (z - t * z1) + &four * z1
            }
            TauKind::P6 { .. } => {
                let one = self.c(1);
                let lhs = t * (t - &one) * z2;
                let m = self.matrix(t, z, z1);
                &lhs * &lhs + self.c(2) * det3(&m)
            }
        }
    }

    /// `zeta'''` from the derivative of the zeta form divided by `zeta''`.
    pub fn third(&self, t: &Real, z: &Real, z1: &Real, z2: &Real) -> Real {
        match self.kind {
            TauKind::P3 => {
                let num = self.c(4) * z1 * (z - t * z1) - self.c(2) * t * z1 * z1 - self.c(2) - t * z2;
                num / (t * t)
            }
            TauKind::P6 { .. } => {
                let one = self.c(1);
                let m = self.matrix(t, z, z1);
                let tm1 = t - &one;
                let n = [
                    [self.c(0), t.clone(), one.clone()],
                    [t.clone(), self.c(0), tm1.clone()],
                    [one.clone(), tm1.clone(), self.c(0)],
                ];
                let mut contraction = self.c(0);
                for i in 0..3 {
                    for j in 0..3 {
                        contraction += cofactor(&m, i, j) * &n[i][j];
                    }
                }
                let tt = t * &tm1;
                let two_t_m1 = self.c(2) * t - &one;
                (-(contraction / &tt) - two_t_m1 * z2) / tt
            }
        }
    }
}

fn det3(m: &[[Real; 3]; 3]) -> Real {
    (0..3).map(|j| &m[0][j] * cofactor(m, 0, j)).fold(&m[0][0] - &m[0][0], |a, b| a + b)
}

fn cofactor(m: &[[Real; 3]; 3], i: usize, j: usize) -> Real {
    let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
    let c: Vec<usize> = (0..3).filter(|&x| x != j).collect();
    let minor = &m[r[0]][c[0]] * &m[r[1]][c[1]] - &m[r[0]][c[1]] * &m[r[1]][c[0]];
    if (i + j) % 2 == 0 {
        minor
    } else {
        -minor
    }
}

/// Controls of the numerical zeta-form check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaFormProblem {
    pub options: NumericOptions,
    /// Local error target of the embedded Runge-Kutta pair.
    pub rk_tolerance: f64,
}

impl Default for SigmaFormProblem {
    fn default() -> Self {
        SigmaFormProblem { options: NumericOptions::default(), rk_tolerance: 1e-14 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaSample {
    pub t: f64,
    pub zeta: f64,
    pub d1: f64,
    pub d2: f64,
    /// Zeta-form residual of the series values.
    pub residual: f64,
    /// Zeta from the Runge-Kutta integration started at the first sample.
    pub rk_zeta: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaFormReport {
    pub samples: Vec<SigmaSample>,
    pub max_residual: f64,
    pub max_deviation: f64,
    pub rk_steps: usize,
}

/// Dormand-Prince 5(4) tableau.
struct Tableau {
    c: Vec<Real>,
    a: Vec<Vec<Real>>,
    b5: Vec<Real>,
    b4: Vec<Real>,
}

impl Tableau {
    fn new(bits: usize) -> Self {
        let r = |n: i64, d: i64| real_of(&rat(n, d), bits);
        Tableau {
            c: vec![r(0, 1), r(1, 5), r(3, 10), r(4, 5), r(8, 9), r(1, 1), r(1, 1)],
            a: vec![
                vec![],
                vec![r(1, 5)],
                vec![r(3, 40), r(9, 40)],
                vec![r(44, 45), r(-56, 15), r(32, 9)],
                vec![r(19372, 6561), r(-25360, 2187), r(64448, 6561), r(-212, 729)],
                vec![r(9017, 3168), r(-355, 33), r(46732, 5247), r(49, 176), r(-5103, 18656)],
                vec![r(35, 384), r(0, 1), r(500, 1113), r(125, 192), r(-2187, 6784), r(11, 84)],
            ],
            b5: vec![r(35, 384), r(0, 1), r(500, 1113), r(125, 192), r(-2187, 6784), r(11, 84), r(0, 1)],
            b4: vec![r(5179, 57600), r(0, 1), r(7571, 16695), r(393, 640), r(-92097, 339200), r(187, 2100), r(1, 40)],
        }
    }
}

type State = [Real; 3];

fn rhs(form: &SigmaForm, t: &Real, y: &State) -> State {
    [y[1].clone(), y[2].clone(), form.third(t, &y[0], &y[1], &y[2])]
}

/// Adaptive integration of `(zeta, zeta', zeta'')` from `t0` to `t1`; returns the state and step count.
fn integrate(form: &SigmaForm, tab: &Tableau, t0: &Real, t1: &Real, y0: State, tol: f64) -> Result<(State, usize)> {
    let bits = form.bits;
    let mut t = t0.clone();
    let mut y = y0;
    let span = to_f64(&(t1 - t0));
    let mut h = span / 64.0;
    let mut steps = 0usize;
    while to_f64(&(t1 - &t)) > 0.0 {
        let remaining = to_f64(&(t1 - &t));
        let last = h >= remaining;
        let hr = if last { t1 - &t } else { real_f64(h, bits) };
        let mut k: Vec<State> = Vec::with_capacity(7);
        for s in 0..7 {
            let ts = &t + &tab.c[s] * &hr;
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = &tab.a[s][j] * &hr;
                for i in 0..3 {
                    ys[i] += &a * &kj[i];
                }
            }
            k.push(rhs(form, &ts, &ys));
        }
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..3 {
            let mut d5 = Real::ZERO.with_precision(bits).value();
            let mut d4 = d5.clone();
            for s in 0..7 {
                d5 += &tab.b5[s] * &k[s][i];
                d4 += &tab.b4[s] * &k[s][i];
            }
            y5[i] += &hr * &d5;
            let e = to_f64(&abs(&(&hr * (&d5 - &d4))));
            let scale = tol * (1.0 + to_f64(&abs(&y[i])));
            err = err.max(e / scale);
        }
        if err <= 1.0 {
            t = if last { t1.clone() } else { &t + &hr };
            y = y5;
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = to_f64(&hr) * factor;
        if h < 1e-14 * span {
            return Err(PainleveError::StepUnderflow(to_f64(&t)));
        }
    }
    Ok((y, steps))
}

/// Zeta-form residuals of the series at each sample, and the deviation of a Runge-Kutta solution
/// started from the series data at the first sample.
pub fn sigma_form_residual(problem: &SigmaFormProblem, spec: &TauSpec, samples: &[f64]) -> Result<SigmaFormReport> {
    if samples.is_empty() {
        return Err(PainleveError::NoSamples);
    }
    let eval = TauEvaluator::new(spec, &problem.options)?;
    let form = SigmaForm::new(spec, &problem.options)?;
    let tab = Tableau::new(eval.bits());
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::new();
    let mut state: Option<(Real, State)> = None;
    let mut steps = 0;
    for &t in &sorted {
        let z = eval.zeta(t)?;
        let residual = to_f64(&form.residual(&z.t, &z.zeta, &z.d1, &z.d2));
        let (t_rk, y) = match state.take() {
            None => (z.t.clone(), [z.zeta.clone(), z.d1.clone(), z.d2.clone()]),
            Some((t0, y0)) => {
                let (y, n) = integrate(&form, &tab, &t0, &z.t, y0, problem.rk_tolerance)?;
                steps += n;
                (z.t.clone(), y)
            }
        };
        let rk_zeta = to_f64(&y[0]);
        let deviation = to_f64(&abs(&(&y[0] - &z.zeta)));
        let (zeta, d1, d2) = z.as_f64();
        out.push(SigmaSample { t, zeta, d1, d2, residual, rk_zeta, deviation });
        state = Some((t_rk, y));
    }
    let max_residual = out.iter().map(|s| s.residual.abs()).fold(0.0, f64::max);
    let max_deviation = out.iter().map(|s| s.deviation).fold(0.0, f64::max);
    Ok(SigmaFormReport { samples: out, max_residual, max_deviation, rk_steps: steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::{c_ratio_p3, c_ratio_p6};

    fn p3(n_range: u32, n_max: i64) -> TauSpec {
        TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), n_range, rat(n_max, 1))
    }

    #[test]
    fn kappa_products_are_c_ratios() {
        let sigma = Scalar::frac(1, 5);
        let theta = [Scalar::frac(1, 7), Scalar::frac(1, 11), Scalar::frac(1, 13), Scalar::frac(1, 3)];
        for n in 1..=2 {
            let p = kappa_p3(&sigma, HalfInt::int(n)).unwrap() * kappa_p3(&sigma, HalfInt::int(-n)).unwrap();
            assert_eq!(p, c_ratio_p3(&sigma, HalfInt::int(n), 0).unwrap());
            let q = kappa_p6(&sigma, &theta, n).unwrap() * kappa_p6(&sigma, &theta, -n).unwrap();
            assert_eq!(q, c_ratio_p6(&sigma, &theta, HalfInt::int(n)).unwrap());
        }
    }

    #[test]
    fn single_shell_is_the_block() {
        let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 0, rat(1, 2));
        let tau = tau_series(&spec).unwrap();
        let d = rat(1, 25);
        assert_eq!(tau.terms().len(), 1);
        assert!(tau.coeff(&d).is_one());
        let wide = p3(2, 6);
        let terms = tau_terms(&wide).unwrap();
        let center = terms.iter().find(|t| t.n == 0).unwrap();
        let block = wide.block(0, &Scalar::real(d), 6, &wide.cutoff().unwrap(), BlockSource::Gram).unwrap();
        assert!(center.weight.is_one());
        assert_eq!(center.block.terms(), block.terms());
    }

    #[test]
    fn leading_exponents_and_s_dependence() {
        let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::frac(3, 2), 1, rat(2, 1));
        let tau = tau_series(&spec).unwrap();
        let up = rat(36, 25);
        let down = rat(16, 25);
        let k1 = kappa_p3(&spec.sigma, HalfInt::int(1)).unwrap();
        assert_eq!(tau.coeff(&up), Scalar::frac(3, 2) * k1);
        let km = kappa_p3(&spec.sigma, HalfInt::int(-1)).unwrap();
        assert_eq!(tau.coeff(&down), Scalar::frac(2, 3) * km);
    }

    #[test]
    fn missing_shell_is_reported() {
        assert!(matches!(tau_series(&p3(1, 4)), Err(PainleveError::MissingShell { .. })));
    }

    #[test]
    fn residual_vanishes_small() {
        let r = tau_residual(&p3(1, 3)).unwrap();
        assert!(r.is_zero(), "{r:?}");
        assert_eq!(r.cutoff(), Some(&(rat(2, 25) + rat(3, 1))));
    }

    #[test]
    fn p3_zeta_form_at_one_point() {
        let spec = p3(3, 10);
        let ev = TauEvaluator::new(&spec, &NumericOptions::default()).unwrap();
        let form = SigmaForm::new(&spec, &NumericOptions::default()).unwrap();
        let z = ev.zeta(0.02).unwrap();
        assert!(to_f64(&form.residual(&z.t, &z.zeta, &z.d1, &z.d2)).abs() < 1e-12);
        assert!(to_f64(&z.q()).is_finite());
    }

    #[test]
    fn block_sources_agree() {
        let theta = [Scalar::frac(1, 7), Scalar::frac(1, 11), Scalar::frac(1, 13), Scalar::frac(1, 3)];
        for spec in [p3(2, 5), TauSpec::p6(Scalar::frac(1, 5), theta, Scalar::frac(-2, 3), 2, rat(4, 1))] {
            let gram = tau_terms_with(&spec, BlockSource::Gram).unwrap();
            let fast = tau_terms_with(&spec, BlockSource::Recursion).unwrap();
            assert_eq!(gram.len(), fast.len());
            for (g, f) in gram.iter().zip(&fast) {
                assert_eq!(g.block.terms(), f.block.terms(), "n={}", g.n);
            }
        }
    }
}
