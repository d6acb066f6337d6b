//! Generalized Hirota derivatives in `log q` and the bilinear Painlevé operators built from them.

use num_rational::BigRational;

use crate::kernel::{rat, GradedSeries, Scalar};
use crate::mutation::{self, Mutation};

/// `D^k_{eps1, eps2}`: `f(e^{eps1 a} q) g(e^{eps2 a} q) = sum_k D^k(f, g) a^k / k!`.
#[derive(Clone, Debug, PartialEq)]
pub struct HirotaSpec {
    pub order: u32,
    pub eps: (Scalar, Scalar),
}

impl HirotaSpec {
    /// Weights `(1, -1)`.
    pub fn plain(order: u32) -> Self {
        HirotaSpec { order, eps: (Scalar::one(), Scalar::int(-1)) }
    }

    /// Weights `(b, 1/b)`.
    pub fn weighted(order: u32, b: &Scalar) -> Self {
        HirotaSpec { order, eps: (b.clone(), b.inv().expect("b != 0")) }
    }
}

/// Pairs every term of `f` with every term of `g`; `weight(a, b)` multiplies `q^{a+b}`.
fn bilinear_map<W>(f: &GradedSeries, g: &GradedSeries, weight: W) -> GradedSeries
where
    W: Fn(&Scalar, &Scalar) -> Vec<(i64, Scalar)>,
{
    let cut = match (f.min_exp(), g.min_exp()) {
        (Some(mf), Some(mg)) => {
            let a = f.cutoff().map(|c| c + &mg);
            let b = g.cutoff().map(|c| c + &mf);
            match (a, b) {
                (Some(x), Some(y)) => Some(if x < y { x } else { y }),
                (x, None) => x,
                (None, y) => y,
            }
        }
        _ => None,
    };
    let mut out = GradedSeries::zero(cut);
    for (ea, ca) in f.terms() {
        let a = Scalar::real(ea.clone());
        for (eb, cb) in g.terms() {
            let b = Scalar::real(eb.clone());
            let prod = ca * cb;
            for (shift, w) in weight(&a, &b) {
                out.add_term(ea + eb + rat(shift, 1), &prod * &w);
            }
        }
    }
    out
}

pub fn hirota(spec: &HirotaSpec, f: &GradedSeries, g: &GradedSeries) -> GradedSeries {
    let op = BilinearOperator::single(spec.eps.clone(), spec.order);
    op.apply(f, g)
}

/// `coeff q^shift (q d/dq)^euler D^hirota`; on monomials `(q d/dq)` acts as `a + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpTerm {
    pub shift: i64,
    pub coeff: Scalar,
    pub euler: u32,
    pub hirota: u32,
}

/// Finite sum of [`OpTerm`]s sharing the Hirota weights `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearOperator {
    pub eps: (Scalar, Scalar),
    pub terms: Vec<OpTerm>,
}

/// Polynomial in `q` as `(power, coefficient)` pairs.
type Poly = Vec<(i64, Scalar)>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out: Poly = Vec::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea + eb;
            let c = ca * cb;
            match out.iter_mut().find(|(x, _)| *x == e) {
                Some(slot) => slot.1 += &c,
                None => out.push((e, c)),
            }
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

fn poly(coeffs: &[Scalar]) -> Poly {
    coeffs.iter().enumerate().map(|(i, c)| (i as i64, c.clone())).filter(|(_, c)| !c.is_zero()).collect()
}

/// `1 - q`, `1 + q` and their powers.
fn one_minus_q() -> Poly {
    poly(&[Scalar::one(), Scalar::int(-1)])
}

fn one_plus_q() -> Poly {
    poly(&[Scalar::one(), Scalar::one()])
}

fn pow(p: &Poly, k: u32) -> Poly {
    (0..k).fold(vec![(0, Scalar::one())], |acc, _| poly_mul(&acc, p))
}

impl BilinearOperator {
    pub fn new(eps: (Scalar, Scalar)) -> Self {
        BilinearOperator { eps, terms: Vec::new() }
    }

    pub fn single(eps: (Scalar, Scalar), k: u32) -> Self {
        let mut op = Self::new(eps);
        op.push(&vec![(0, Scalar::one())], 0, k);
        op
    }

    /// Adds `p(q) (q d/dq)^euler D^hirota`.
    pub fn push(&mut self, p: &Poly, euler: u32, hirota: u32) {
        for (shift, coeff) in p {
            if !coeff.is_zero() {
                self.terms.push(OpTerm { shift: *shift, coeff: coeff.clone(), euler, hirota });
            }
        }
    }

    pub fn scaled(&self, k: &Scalar) -> Self {
        let terms = self.terms.iter().map(|t| OpTerm { coeff: &t.coeff * k, ..t.clone() }).collect();
        BilinearOperator { eps: self.eps.clone(), terms }
    }

    /// Sum of two operators with the same weights.
    pub fn plus(&self, other: &BilinearOperator) -> Self {
        assert_eq!(self.eps, other.eps);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        BilinearOperator { eps: self.eps.clone(), terms }
    }

    /// Image of `q^a` and `q^b`, as `(shift, coefficient)` of `q^{a+b+shift}`.
    pub fn weight(&self, a: &Scalar, b: &Scalar) -> Vec<(i64, Scalar)> {
        let h = &(&self.eps.0 * a) + &(&self.eps.1 * b);
        let s = a + b;
        let mut out: Vec<(i64, Scalar)> = Vec::new();
        for t in &self.terms {
            let w = &t.coeff * &(s.pow(t.euler as i64).unwrap() * h.pow(t.hirota as i64).unwrap());
            if w.is_zero() {
                continue;
            }
            match out.iter_mut().find(|(x, _)| *x == t.shift) {
                Some(slot) => slot.1 += &w,
                None => out.push((t.shift, w)),
            }
        }
        out
    }

    /// Coefficient of `q^{a+b+shift}` in the image of `q^a`, `q^b`.
    pub fn weight_at(&self, a: &Scalar, b: &Scalar, shift: i64) -> Scalar {
        let h = &(&self.eps.0 * a) + &(&self.eps.1 * b);
        let s = a + b;
        let mut acc = Scalar::zero();
        for t in self.terms.iter().filter(|t| t.shift == shift) {
            acc += &(&t.coeff * &(s.pow(t.euler as i64).unwrap() * h.pow(t.hirota as i64).unwrap()));
        }
        acc
    }

    pub fn apply(&self, f: &GradedSeries, g: &GradedSeries) -> GradedSeries {
        bilinear_map(f, g, |a, b| self.weight(a, b))
    }

    pub fn max_shift(&self) -> i64 {
        self.terms.iter().map(|t| t.shift).max().unwrap_or(0)
    }
}

fn c(n: i64, d: i64) -> Scalar {
    Scalar::frac(n, d)
}

fn constant(x: Scalar) -> Poly {
    vec![(0, x)]
}

fn q_times(x: Scalar) -> Poly {
    vec![(1, x)]
}

/// `1/2 D^4 - t d/dt D^2 + 1/2 D^2 + 2t D^0`.
pub fn d_iii() -> BilinearOperator {
    let mut op = BilinearOperator::new((Scalar::one(), Scalar::int(-1)));
    op.push(&constant(c(1, 2)), 0, 4);
    op.push(&constant(c(-1, 1)), 1, 2);
    op.push(&constant(c(1, 2)), 0, 2);
    op.push(&q_times(c(2, 1)), 0, 0);
    op
}

/// `D^4 + 2q d/dq D^2 - (1+Q^2) D^2 + q D^0` with weights `(b, 1/b)`.
pub fn d_iii_b(b: &Scalar) -> BilinearOperator {
    let bi = b.inv().expect("b != 0");
    let q = b + &bi;
    let mut op = BilinearOperator::new((b.clone(), bi));
    let euler_coeff = if mutation::is_active(Mutation::HirotaCoefficient) { c(1, 1) } else { c(2, 1) };
    op.push(&constant(c(1, 1)), 0, 4);
    op.push(&constant(euler_coeff), 1, 2);
    op.push(&constant(-(Scalar::one() + q.square())), 0, 2);
    op.push(&q_times(c(1, 1)), 0, 0);
    op
}

/// The sixth Painlevé operator in `t` with `deltas = [Delta_0, Delta_t, Delta_1, Delta_inf]`.
pub fn d_vi(deltas: &[Scalar; 4]) -> BilinearOperator {
    let [d0, dt, d1, dinf] = deltas;
    let one = Scalar::one();
    let omq = one_minus_q();
    let opq = one_plus_q();
    let mut op = BilinearOperator::new((Scalar::one(), Scalar::int(-1)));
    op.push(&poly_mul(&constant(c(-1, 2)), &pow(&omq, 3)), 0, 4);
    op.push(&poly_mul(&pow(&omq, 2), &opq), 1, 2);
    let s_t1 = dt + d1;
    let s_0inf = d0 + dinf;
    let inner = {
        let a = q_times(s_t1.scale(&rat(2, 1)));
        let b = poly_mul(&poly_mul(&omq, &q_times(Scalar::one())), &constant(-s_0inf.scale(&rat(2, 1))));
        let cc = poly(&[c(-1, 2), c(1, 2), c(-1, 2)]);
        sum_polys(&[a, b, cc])
    };
    op.push(&poly_mul(&omq, &inner), 0, 2);
    op.push(&poly_mul(&q_times(c(-1, 2)), &omq), 2, 0);
    let lin = sum_polys(&[
        poly_mul(&constant(s_0inf.clone()), &omq),
        poly_mul(&constant(-s_t1.clone()), &opq),
    ]);
    op.push(&poly_mul(&q_times(one.clone()), &lin), 1, 0);
    let zeroth = sum_polys(&[
        constant((d0 - dt) * (d1 - dinf)),
        q_times((d0 + dt) * (d1 + dinf)),
    ]);
    op.push(&poly_mul(&q_times(c(2, 1)), &zeroth), 0, 0);
    op
}

fn sum_polys(ps: &[Poly]) -> Poly {
    let mut out: Poly = Vec::new();
    for p in ps {
        for (e, c) in p {
            match out.iter_mut().find(|(x, _)| x == e) {
                Some(slot) => slot.1 += c,
                None => out.push((*e, c.clone())),
            }
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

/// The regular `NSR` bilinear operator with weights `(b, 1/b)` and NS externals
/// `deltas_ns = [Delta_1, Delta_2, Delta_3, Delta_4]`.
pub fn d_vi_b(b: &Scalar, deltas_ns: &[Scalar; 4]) -> BilinearOperator {
    let [d1, d2, d3, d4] = deltas_ns;
    let bi = b.inv().expect("b != 0");
    let q2 = (b + &bi).square();
    let omq = one_minus_q();
    let opq = one_plus_q();
    let mut op = BilinearOperator::new((b.clone(), bi));
    op.push(&poly_mul(&constant(c(-1, 2)), &pow(&omq, 3)), 0, 4);
    op.push(&poly_mul(&constant(c(-1, 1)), &poly_mul(&opq, &pow(&omq, 2))), 1, 2);
    let s23 = d2 + d3;
    let s14 = d1 + d4;
    let inner = sum_polys(&[
        q_times(-s23.clone()),
        poly_mul(&q_times(s14.clone()), &omq),
        poly_mul(&constant(c(1, 2)), &sum_polys(&[poly(&[q2.clone(), q2.scale(&rat(4, 1)), q2.clone()]), poly(&[c(1, 1), c(-1, 1), c(1, 1)])])),
    ]);
    op.push(&poly_mul(&omq, &inner), 0, 2);
    let zeroth = sum_polys(&[q_times((d2 + d1) * (d3 + d4)), constant(-((d2 - d1) * (d3 - d4)))]);
    op.push(&poly_mul(&q_times(c(1, 2)), &zeroth), 0, 0);
    let lin = sum_polys(&[poly_mul(&constant(s14), &omq), poly_mul(&constant(-s23), &opq)]);
    op.push(&poly_mul(&q_times(c(1, 2)), &lin), 1, 0);
    op.push(&poly_mul(&q_times(c(-1, 2)), &omq), 2, 0);
    op
}

pub fn apply_d_iii(f: &GradedSeries, g: &GradedSeries) -> GradedSeries {
    d_iii().apply(f, g)
}

pub fn apply_d_iii_b(b: &Scalar, f: &GradedSeries, g: &GradedSeries) -> GradedSeries {
    d_iii_b(b).apply(f, g)
}

pub fn apply_d_vi(deltas: &[Scalar; 4], f: &GradedSeries, g: &GradedSeries) -> GradedSeries {
    d_vi(deltas).apply(f, g)
}

pub fn apply_d_vi_b(b: &Scalar, deltas_ns: &[Scalar; 4], f: &GradedSeries, g: &GradedSeries) -> GradedSeries {
    d_vi_b(b, deltas_ns).apply(f, g)
}

/// Exact polynomial `p(q)` as a series.
pub fn poly_series(p: &[(i64, Scalar)]) -> GradedSeries {
    GradedSeries::from_terms(p.iter().map(|(e, c)| (rat(*e, 1), c.clone())), None)
}

/// `q^e` with exponent `e` as a rational.
pub fn q_pow(e: BigRational) -> GradedSeries {
    GradedSeries::monomial(e, Scalar::one(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(e: i64, k: i64) -> GradedSeries {
        GradedSeries::monomial(rat(e, 1), Scalar::int(k), None)
    }

    #[test]
    fn first_hirota_examples() {
        let f = mono(3, 2).add(&mono(5, 1));
        let g = mono(1, 7);
        assert_eq!(hirota(&HirotaSpec::plain(0), &f, &g), f.mul(&g));
        let d1 = f.log_derivative_weighted().mul(&g).sub(&f.mul(&g.log_derivative_weighted()));
        assert_eq!(hirota(&HirotaSpec::plain(1), &f, &g), d1);
    }

    #[test]
    fn d_iii_on_constants() {
        let one = GradedSeries::exact_one();
        assert_eq!(apply_d_iii(&one, &one), mono(1, 2));
        let t = GradedSeries::monomial(rat(2, 7), Scalar::one(), None);
        assert_eq!(apply_d_iii(&t, &t), GradedSeries::monomial(rat(11, 7), Scalar::int(2), None));
    }

    #[test]
    fn monomial_weights() {
        let b = Scalar::frac(3, 2);
        let spec = HirotaSpec::weighted(3, &b);
        let f = GradedSeries::monomial(rat(1, 3), Scalar::one(), None);
        let g = GradedSeries::monomial(rat(5, 2), Scalar::one(), None);
        let e = &b * &Scalar::frac(1, 3) + Scalar::frac(2, 3) * Scalar::frac(5, 2);
        let expect = GradedSeries::monomial(rat(17, 6), e.pow(3).unwrap(), None);
        assert_eq!(hirota(&spec, &f, &g), expect);
    }
}
