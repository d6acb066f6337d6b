//! Closed forms for the blow-up factors `l_{nn'}`, the normalizations `Omega_n` and the
//! coefficient ratios of the Painlevé tau series.

use crate::kernel::{rat, HalfInt, KernelError, Scalar};
use crate::mutation::{self, Mutation};
use crate::virasoro::{q_squared, VirasoroError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlowupError {
    #[error("pole: {0} vanishes")]
    Pole(String),
    #[error("b^2 = 1 is excluded")]
    UnitCoupling,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
}

type Result<T> = std::result::Result<T, BlowupError>;

fn div(num: &Scalar, den: &Scalar, what: &str) -> Result<Scalar> {
    if den.is_zero() {
        return Err(BlowupError::Pole(what.to_string()));
    }
    Ok(num.checked_div(den)?)
}

fn sign(k: i32) -> Scalar {
    if k.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        Scalar::int(-1)
    }
}

/// `b`, `1/b` and `Q = b + 1/b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    b: Scalar,
    b_inv: Scalar,
    q: Scalar,
}

impl Coupling {
    pub fn new(b: &Scalar) -> Result<Self> {
        let b_inv = b.inv()?;
        let q = b + &b_inv;
        Ok(Coupling { b: b.clone(), b_inv, q })
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn b_inv(&self) -> &Scalar {
        &self.b_inv
    }

    pub fn q(&self) -> &Scalar {
        &self.q
    }

    pub fn b_sq(&self) -> Scalar {
        self.b.square()
    }

    /// `x + i b + j/b`.
    fn shifted(&self, x: &Scalar, i: i32, j: i32) -> Scalar {
        x + &self.b.scale(&rat(i as i64, 1)) + self.b_inv.scale(&rat(j as i64, 1))
    }
}

/// Points `(i, j)` with `i, j >= 0`, `i + j < bound` and `i + j = parity (mod 2)`.
pub fn index_set(bound: i32, parity: i32) -> Vec<(i32, i32)> {
    let limit = if mutation::is_active(Mutation::SEvenBound) && parity == 0 { bound + 1 } else { bound };
    let mut out = Vec::new();
    for s in (parity..limit).step_by(2) {
        for i in 0..=s {
            out.push((i, s - i));
        }
    }
    out
}

fn lattice_product(c: &Scalar, coupling: &Coupling, pts: &[(i32, i32)]) -> Scalar {
    pts.iter().map(|&(i, j)| coupling.shifted(c, i, j)).product()
}

/// `s_even(x, m)` for integer `m`.
pub fn s_even(coupling: &Coupling, x: &Scalar, m: i32) -> Scalar {
    if m < 0 {
        return sign(m) * s_even(coupling, &(coupling.q() - x), -m);
    }
    lattice_product(x, coupling, &index_set(2 * m, 0))
}

/// `s_odd(x, m)` for `m` in `Z + 1/2`, without the constant `2^{1/8}`.
pub fn s_odd_bare(coupling: &Coupling, x: &Scalar, m: HalfInt) -> Scalar {
    if m.twice() < 0 {
        return s_odd_bare(coupling, &(coupling.q() - x), -m);
    }
    lattice_product(x, coupling, &index_set(m.twice(), 1))
}

/// `s_even` or bare `s_odd` according to the parity of `m`.
fn s_any(coupling: &Coupling, x: &Scalar, m: HalfInt) -> Scalar {
    if m.is_integer() {
        s_even(coupling, x, m.twice() / 2)
    } else {
        s_odd_bare(coupling, x, m)
    }
}

/// `Omega_n(P)^2`; negative `n` uses `Omega_n(P) = Omega_{-n}(-P)`.
pub fn omega_sq(coupling: &Coupling, p: &Scalar, n: HalfInt) -> Result<Scalar> {
    if n.twice() < 0 {
        return omega_sq(coupling, &-p, -n);
    }
    if n.twice() == 0 {
        return Ok(Scalar::one());
    }
    let two_n = n.twice();
    let two_p = p.scale(&rat(2, 1));
    let mut num = sign(two_n);
    for i in 1..2 * two_n {
        num = num * coupling.shifted(&two_p, i, 2 * two_n - i);
    }
    let mut den = Scalar::real(rat(1i64 << two_n, 1)) * &two_p;
    for i in 1..two_n {
        den = den * (&two_p + &coupling.b().scale(&rat(2 * i as i64, 1))) * (&two_p + &coupling.b_inv().scale(&rat(2 * i as i64, 1)));
    }
    div(&num, &den, "Omega denominator")
}

/// Right side of the three-term relation for `Omega^2_{n+1/2} Omega^2_{n-1/2} / Omega^4_n`.
pub fn omega_three_term(coupling: &Coupling, p: &Scalar, n: HalfInt) -> Result<Scalar> {
    let two_p = p.scale(&rat(2, 1));
    let shifted_q = &two_p + coupling.q();
    let k = 2 * n.twice();
    let mut num = Scalar::one();
    for i in 0..=k - 2 {
        num = num * coupling.shifted(&two_p, i, k - 2 - i);
    }
    for i in 0..=k {
        num = num * coupling.shifted(&shifted_q, i, k - i);
    }
    let mut den = Scalar::one();
    for i in 0..k {
        den = den * coupling.shifted(&two_p, i, k - i) * coupling.shifted(&two_p, k - i, i);
    }
    div(&num, &den, "three-term denominator")
}

/// Arguments of a matrix element `<P,n|Phi_alpha(1)|P',n'>`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorParams {
    pub coupling: Coupling,
    pub p: Scalar,
    pub p_prime: Scalar,
    pub alpha: Scalar,
    pub n: HalfInt,
    pub n_prime: HalfInt,
}

/// `l_{nn'}(P, alpha, P')^2`; negative indices go through `|P,n> = |-P,-n>`.
pub fn l_nn_sq(fp: &FactorParams) -> Result<Scalar> {
    if fp.n.twice() < 0 || fp.n_prime.twice() < 0 {
        let flip = |p: &Scalar, n: HalfInt| if n.twice() < 0 { (-p, -n) } else { (p.clone(), n) };
        let (p, n) = flip(&fp.p, fp.n);
        let (p_prime, n_prime) = flip(&fp.p_prime, fp.n_prime);
        return l_nn_sq(&FactorParams { p, p_prime, n, n_prime, ..fp.clone() });
    }
    let c = &fp.coupling;
    let sum = fp.n + fp.n_prime;
    let mut prod = Scalar::one();
    for eps in [1, -1] {
        for eps_p in [1, -1] {
            let x = &fp.alpha + &fp.p_prime.scale(&rat(eps, 1)) + fp.p.scale(&rat(eps_p, 1));
            let m = if eps > 0 { fp.n_prime } else { -fp.n_prime } + if eps_p > 0 { fp.n } else { -fp.n };
            prod = prod * s_any(c, &x, m);
        }
    }
    let two_p_q = fp.p.scale(&rat(2, 1)) + c.q();
    let two_pp_q = fp.p_prime.scale(&rat(2, 1)) + c.q();
    let den = s_even(c, &two_p_q, fp.n.twice()) * s_even(c, &two_pp_q, fp.n_prime.twice());
    let pow2 = Scalar::real(rat(2, 1)).pow(sum.twice() as i64)?;
    let odd = if sum.is_integer() { Scalar::one() } else { Scalar::int(2) };
    let num = pow2 * omega_sq(c, &fp.p, fp.n)? * omega_sq(c, &fp.p_prime, fp.n_prime)? * prod.square() * odd;
    div(&num, &den.square(), "s_even(2P+Q) factors")
}

/// `prod_{eps,eps'} s(P_2 + eps P_1 + eps' P + Q/2, eps' n)` with the `2^{1/8}` constants squared out.
fn chain_numerator(coupling: &Coupling, p: &Scalar, p1: &Scalar, p2: &Scalar, n: HalfInt) -> Scalar {
    let half_q = coupling.q().scale(&rat(1, 2));
    let mut prod = Scalar::one();
    for eps in [1, -1] {
        for eps_p in [1, -1] {
            let x = p2 + &p1.scale(&rat(eps, 1)) + p.scale(&rat(eps_p, 1)) + &half_q;
            prod = prod * s_any(coupling, &x, if eps_p > 0 { n } else { -n });
        }
    }
    prod
}

fn chain_denominator(coupling: &Coupling, p: &Scalar, n: HalfInt) -> Scalar {
    let two_p = p.scale(&rat(2, 1));
    s_even(coupling, &two_p, n.twice()) * s_even(coupling, &(&two_p + coupling.q()), n.twice())
}

/// `(l_n^{21})^2` for the chain vector from momentum `P_1` through the field of momentum `P_2`.
pub fn l_n21_sq(coupling: &Coupling, p: &Scalar, p1: &Scalar, p2: &Scalar, n: HalfInt) -> Result<Scalar> {
    let num = chain_numerator(coupling, p, p1, p2, n).square();
    let odd = if n.is_integer() { Scalar::one() } else { Scalar::int(2) };
    div(&(sign(n.twice()) * num * odd), &chain_denominator(coupling, p, n), "s_even(2P)s_even(2P+Q)")
}

/// `l_n^{21} l_n^{34}` for momenta `[P_1, P_2, P_3, P_4]`; the fourth vertex pairs as `P_3 + eps P_4`.
pub fn l_n21_l34(coupling: &Coupling, p: &Scalar, momenta: &[Scalar; 4], n: HalfInt) -> Result<Scalar> {
    let a = chain_numerator(coupling, p, &momenta[0], &momenta[1], n);
    let b = chain_numerator(coupling, p, &momenta[3], &momenta[2], n);
    let odd = if n.is_integer() { Scalar::one() } else { Scalar::int(2) };
    div(&(sign(n.twice()) * a * b * odd), &chain_denominator(coupling, p, n), "s_even(2P)s_even(2P+Q)")
}

/// `beta^(1) = (b^{-1}/(b^{-1}-b))^2`, `beta^(2) = (b/(b-b^{-1}))^2`.
pub fn beta12(coupling: &Coupling) -> Result<(Scalar, Scalar)> {
    let d = coupling.b_inv() - coupling.b();
    if d.is_zero() {
        return Err(BlowupError::UnitCoupling);
    }
    let b1 = coupling.b_inv().checked_div(&d)?.square();
    let b2 = coupling.b().checked_div(&-&d)?.square();
    Ok((b1, b2))
}

/// `b^2` of the two embedded Virasoro copies: `2b^2/(1-b^2)` and `(1-b^{-2})/(2b^{-2})`.
pub fn vir12_b_sq(coupling: &Coupling) -> Result<(Scalar, Scalar)> {
    let b_sq = coupling.b_sq();
    let one = Scalar::one();
    let d = &one - &b_sq;
    if d.is_zero() {
        return Err(BlowupError::UnitCoupling);
    }
    let first = b_sq.scale(&rat(2, 1)).checked_div(&d)?;
    let bi = b_sq.inv()?;
    let second = (&one - &bi).checked_div(&bi.scale(&rat(2, 1)))?;
    Ok((first, second))
}

/// `(Delta^(1)_n, Delta^(2)_n)` for momentum `P`.
pub fn vir12_weights(coupling: &Coupling, p: &Scalar, n: HalfInt) -> Result<(Scalar, Scalar)> {
    let (b1_sq, b2_sq) = vir12_b_sq(coupling)?;
    let nn = Scalar::real(n.to_rational());
    let one = Scalar::one();
    let x1 = p + &(coupling.b() * &nn).scale(&rat(2, 1));
    let x2 = p + &(coupling.b_inv() * &nn).scale(&rat(2, 1));
    let d1 = q_squared(&b1_sq)?.scale(&rat(1, 4)) - x1.square().checked_div(&(&one - &coupling.b_sq()).scale(&rat(2, 1)))?;
    let d2 = q_squared(&b2_sq)?.scale(&rat(1, 4)) - x2.square().checked_div(&(&one - &coupling.b_sq().inv()?).scale(&rat(2, 1)))?;
    Ok((d1, d2))
}

/// `Delta^(1) = Delta/(1-b^2)`, `Delta^(2) = Delta/(1-b^{-2})` for external NS weights.
pub fn vir12_external(coupling: &Coupling, delta_ns: &Scalar) -> Result<(Scalar, Scalar)> {
    let one = Scalar::one();
    let d1 = div(delta_ns, &(&one - &coupling.b_sq()), "1-b^2")?;
    let d2 = div(delta_ns, &(&one - &coupling.b_sq().inv()?), "1-b^-2")?;
    Ok((d1, d2))
}

/// `l_n(P,b)^2 = reduced * (beta^(1))^{-Delta^(1)_n} (beta^(2))^{-Delta^(2)_n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct IrregularFactor {
    pub reduced: Scalar,
    pub beta: (Scalar, Scalar),
    pub exponents: (Scalar, Scalar),
}

pub fn l_n_irr(coupling: &Coupling, p: &Scalar, n: HalfInt) -> Result<IrregularFactor> {
    let beta = beta12(coupling)?;
    let (d1, d2) = vir12_weights(coupling, p, n)?;
    let pow2 = Scalar::real(rat(2, 1)).pow((n.twice() * n.twice()) as i64)?;
    let reduced = div(&(sign(n.twice()) * pow2), &chain_denominator(coupling, p, n), "s_even(2P)s_even(2P+Q)")?;
    Ok(IrregularFactor { reduced, beta, exponents: (-d1, -d2) })
}

/// `prod_{k=1}^{2|n|-1} (k^2 - 4 sigma^2)^{2(2|n|-k)} (4 sigma^2)^{2|n|}`.
fn sigma_denominator(sigma: &Scalar, n: HalfInt) -> Result<Scalar> {
    let four_s2 = sigma.square().scale(&rat(4, 1));
    let t = n.abs().twice() as i64;
    let mut den = four_s2.pow(t)?;
    for k in 1..t {
        den = den * (Scalar::int(k * k) - &four_s2).pow(2 * (t - k))?;
    }
    if den.is_zero() {
        return Err(BlowupError::Pole(format!("resonant sigma {sigma}")));
    }
    Ok(den)
}

/// `C(sigma + n + m) C(sigma - n) / C(sigma + m/2)^2` for `C(sigma) = 1/(G(1-2 sigma) G(1+2 sigma))`.
pub fn c_ratio_p3(sigma: &Scalar, n: HalfInt, m: i32) -> Result<Scalar> {
    let s = sigma + &Scalar::frac(m as i64, 2);
    let nn = n + HalfInt::from_twice(m);
    let den = sigma_denominator(&s, nn)?;
    Ok(sign(nn.twice()) * den.inv()?)
}

/// `C(sigma+n) C(sigma-n) / C(sigma)^2` for the sixth Painlevé constants with `theta = [theta_0, theta_t, theta_1, theta_inf]`.
pub fn c_ratio_p6(sigma: &Scalar, theta: &[Scalar; 4], n: HalfInt) -> Result<Scalar> {
    let abs_n = n.abs();
    let s2 = sigma.square();
    let mut num = Scalar::one();
    for (u, v) in [(&theta[1], &theta[0]), (&theta[2], &theta[3])] {
        for eps in [1, -1] {
            let base = u + &v.scale(&rat(eps, 1));
            let mut t = 2 - abs_n.twice();
            while t <= abs_n.twice() - 2 {
                let i = Scalar::frac(t as i64, 2);
                let e = (abs_n.twice() - t.abs()) / 2;
                num = num * ((&base + &i).square() - &s2).pow(e as i64)?;
                t += 2;
            }
        }
    }
    Ok(num.checked_div(&sigma_denominator(sigma, n)?)?)
}

/// `P(a, m)` with `G(1+a+m)/G(1+a) = Gamma(1+a)^m P(a, m)`.
pub fn barnes_shift(a: &Scalar, m: i32) -> Scalar {
    let one = Scalar::one();
    let rising = |x: &Scalar, j: i32| -> Scalar { (0..j).map(|k| x + &Scalar::int(k as i64)).product() };
    if m >= 0 {
        let x = &one + a;
        (0..m).map(|j| rising(&x, j)).product()
    } else {
        (1..=-m).map(|j| rising(&(&one + a - Scalar::int(j as i64)), j)).product()
    }
}

/// `kappa_n` with `C(sigma+n)/C(sigma) = x^n kappa_n` for the third Painlevé constants.
pub fn kappa_p3(sigma: &Scalar, n: HalfInt) -> Result<Scalar> {
    let two_s = sigma.scale(&rat(2, 1));
    let den = barnes_shift(&-&two_s, -n.twice()) * barnes_shift(&two_s, n.twice());
    div(&Scalar::one(), &den, "Barnes shift")
}

/// `kappa_n` with `C(sigma+n, theta)/C(sigma, theta) = x^n kappa_n` for the sixth Painlevé constants.
pub fn kappa_p6(sigma: &Scalar, theta: &[Scalar; 4], n: i32) -> Result<Scalar> {
    let mut num = Scalar::one();
    for (u, v) in [(&theta[1], &theta[0]), (&theta[2], &theta[3])] {
        for eps in [1, -1] {
            for eps_p in [1, -1] {
                let a = u + &v.scale(&rat(eps, 1)) + sigma.scale(&rat(eps_p, 1));
                num = num * barnes_shift(&a, eps_p as i32 * n);
            }
        }
    }
    let two_s = sigma.scale(&rat(2, 1));
    let den = barnes_shift(&two_s, 2 * n) * barnes_shift(&-&two_s, -2 * n);
    div(&num, &den, "Barnes shift")
}

/// Blow-up factor `(-1)^{2n} s(2a, 2n) s(2a + e1 + e2, 2n)` with `s` built on `(e1, e2)`.
pub fn blowup_factor(a: &Scalar, e1: &Scalar, e2: &Scalar, n: HalfInt) -> Scalar {
    let s = |x: &Scalar, m: i32| -> Scalar {
        let (x, m, pre) = if m < 0 { (&(e1 + e2) - x, -m, sign(m)) } else { (x.clone(), m, Scalar::one()) };
        let mut acc = pre;
        for (i, j) in index_set(2 * m, 0) {
            acc = acc * (&x + &e1.scale(&rat(i as i64, 1)) + e2.scale(&rat(j as i64, 1)));
        }
        acc
    };
    let two_a = a.scale(&rat(2, 1));
    sign(n.twice()) * s(&two_a, n.twice()) * s(&(&two_a + e1 + e2), n.twice())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(b: i64) -> Coupling {
        Coupling::new(&Scalar::int(b)).unwrap()
    }

    #[test]
    fn s_even_small() {
        let c = cp(2);
        let x = Scalar::frac(1, 7);
        assert_eq!(s_even(&c, &x, 0), Scalar::one());
        assert_eq!(s_even(&c, &x, 1), x);
        assert_eq!(s_even(&c, &x, -1), -(c.q() - &x));
    }

    #[test]
    fn omega_initial_data() {
        let c = cp(2);
        let p = Scalar::frac(1, 3);
        assert_eq!(omega_sq(&c, &p, HalfInt::ZERO).unwrap(), Scalar::one());
        let expect = -(c.q().scale(&rat(1, 2)) + &p).checked_div(&p.scale(&rat(2, 1))).unwrap();
        assert_eq!(omega_sq(&c, &p, HalfInt::HALF).unwrap(), expect);
    }

    #[test]
    fn omega_three_term_at_half() {
        let c = cp(2);
        let p = Scalar::frac(1, 3);
        let n = HalfInt::HALF;
        let lhs = (omega_sq(&c, &p, n + HalfInt::HALF).unwrap() * omega_sq(&c, &p, n - HalfInt::HALF).unwrap())
            .checked_div(&omega_sq(&c, &p, n).unwrap().square())
            .unwrap();
        assert_eq!(lhs, omega_three_term(&c, &p, n).unwrap());
    }

    #[test]
    fn c_ratio_p3_small() {
        let s = Scalar::frac(1, 5);
        assert_eq!(c_ratio_p3(&s, HalfInt::ZERO, 0).unwrap(), Scalar::one());
        let four_s2 = s.square().scale(&rat(4, 1));
        let one = Scalar::one();
        assert_eq!(c_ratio_p3(&s, HalfInt::int(1), 0).unwrap(), ((&one - &four_s2).square() * four_s2.square()).inv().unwrap());
    }
}
