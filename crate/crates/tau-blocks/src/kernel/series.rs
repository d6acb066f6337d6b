use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::scalar::Scalar;
use super::KernelError;

/// Finitely supported series in a formal variable with rational exponents.
///
/// Coefficients at exponents `<= cutoff` are trusted; `cutoff == None` marks an exact
/// (finite) expression.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GradedSeries {
    terms: BTreeMap<BigRational, Scalar>,
    cutoff: Option<BigRational>,
}

fn min_opt(a: Option<BigRational>, b: Option<BigRational>) -> Option<BigRational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x < y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn add_opt(a: &Option<BigRational>, b: &BigRational) -> Option<BigRational> {
    a.as_ref().map(|x| x + b)
}

impl GradedSeries {
    pub fn zero(cutoff: Option<BigRational>) -> Self {
        GradedSeries { terms: BTreeMap::new(), cutoff }
    }

    pub fn exact_one() -> Self {
        GradedSeries::monomial(BigRational::zero(), Scalar::one(), None)
    }

    pub fn monomial(exp: BigRational, coeff: Scalar, cutoff: Option<BigRational>) -> Self {
        let mut s = GradedSeries::zero(cutoff);
        s.add_term(exp, coeff);
        s
    }

    pub fn from_terms<I>(terms: I, cutoff: Option<BigRational>) -> Self
    where
        I: IntoIterator<Item = (BigRational, Scalar)>,
    {
        let mut s = GradedSeries::zero(cutoff);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    /// `q^offset * sum_k coeffs[k] q^{k*step}`.
    pub fn from_grid(offset: &BigRational, step: &BigRational, coeffs: &[Scalar], cutoff: Option<BigRational>) -> Self {
        let mut s = GradedSeries::zero(cutoff);
        let mut e = offset.clone();
        for c in coeffs {
            s.add_term(e.clone(), c.clone());
            e += step;
        }
        s
    }

    /// Adds `coeff q^exp`, dropping it if beyond the cutoff.
    pub fn add_term(&mut self, exp: BigRational, coeff: Scalar) {
        if coeff.is_zero() || self.cutoff.as_ref().is_some_and(|c| &exp > c) {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<BigRational, Scalar> {
        &self.terms
    }

    pub fn cutoff(&self) -> Option<&BigRational> {
        self.cutoff.as_ref()
    }

    pub fn coeff(&self, exp: &BigRational) -> Scalar {
        self.terms.get(exp).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent known to carry weight; an empty series reports its cutoff.
    pub fn min_exp(&self) -> Option<BigRational> {
        self.terms.keys().next().cloned().or_else(|| self.cutoff.clone())
    }

    pub fn truncate(&self, cutoff: &BigRational) -> Self {
        let cut = min_opt(self.cutoff.clone(), Some(cutoff.clone()));
        GradedSeries::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), c.clone())), cut)
    }

    pub fn add(&self, other: &GradedSeries) -> Self {
        let mut s = GradedSeries::zero(min_opt(self.cutoff.clone(), other.cutoff.clone()));
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            s.add_term(e.clone(), c.clone());
        }
        s
    }

    pub fn sub(&self, other: &GradedSeries) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::int(-1))
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        let mut s = GradedSeries::zero(self.cutoff.clone());
        for (e, c) in &self.terms {
            s.add_term(e.clone(), c * k);
        }
        s
    }

    /// Multiplication by `q^shift`.
    pub fn shift(&self, shift: &BigRational) -> Self {
        GradedSeries {
            terms: self.terms.iter().map(|(e, c)| (e + shift, c.clone())).collect(),
            cutoff: add_opt(&self.cutoff, shift),
        }
    }

    pub fn mul(&self, other: &GradedSeries) -> Self {
        let cut = match (self.min_exp(), other.min_exp()) {
            (Some(mf), Some(mg)) => min_opt(add_opt(&self.cutoff, &mg), add_opt(&other.cutoff, &mf)),
            _ => None,
        };
        let mut s = GradedSeries::zero(cut);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if s.cutoff.as_ref().is_some_and(|c| &e > c) {
                    break;
                }
                s.add_term(e, ca * cb);
            }
        }
        s
    }

    /// The Euler operator `q d/dq`.
    pub fn log_derivative_weighted(&self) -> Self {
        let mut s = GradedSeries::zero(self.cutoff.clone());
        for (e, c) in &self.terms {
            s.add_term(e.clone(), c.scale(e));
        }
        s
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = GradedSeries::exact_one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// True when every coefficient up to `order` vanishes.
    pub fn vanishes_to(&self, order: &BigRational) -> Result<bool, KernelError> {
        self.require_trusted(order)?;
        Ok(self.terms.keys().all(|e| e > order))
    }

    pub fn require_trusted(&self, order: &BigRational) -> Result<(), KernelError> {
        match &self.cutoff {
            Some(c) if c < order => Err(KernelError::CutoffTooSmall { cutoff: c.to_string(), order: order.to_string() }),
            _ => Ok(()),
        }
    }

    /// Lowest exponent with a nonzero coefficient at or below `order`.
    pub fn first_nonzero_to(&self, order: &BigRational) -> Option<BigRational> {
        self.terms.keys().find(|e| *e <= order).cloned()
    }
}

/// `prod` of series, each factor exact or truncated.
pub fn product<'a, I: IntoIterator<Item = &'a GradedSeries>>(factors: I) -> GradedSeries {
    factors.into_iter().fold(GradedSeries::exact_one(), |acc, f| acc.mul(f))
}

/// `1/(1 - c q^step)` truncated at `cutoff`.
pub fn geometric(c: &Scalar, step: &BigRational, cutoff: &BigRational) -> GradedSeries {
    let mut s = GradedSeries::zero(Some(cutoff.clone()));
    let mut e = BigRational::zero();
    let mut k = Scalar::one();
    while &e <= cutoff {
        s.add_term(e.clone(), k.clone());
        e += step;
        k = &k * c;
    }
    s
}

pub fn exponent_string(e: &BigRational) -> String {
    if e.denom().is_one() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

impl Serialize for GradedSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<(String, String)> =
            self.terms.iter().map(|(e, c)| (exponent_string(e), c.to_string())).collect();
        let cutoff = self.cutoff.as_ref().map(exponent_string).unwrap_or_else(|| "inf".into());
        let mut st = s.serialize_struct("GradedSeries", 2)?;
        st.serialize_field("terms", &terms)?;
        st.serialize_field("cutoff", &cutoff)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct WireSeries {
    terms: Vec<(String, String)>,
    cutoff: String,
}

impl<'de> Deserialize<'de> for GradedSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let w = WireSeries::deserialize(d)?;
        let exp = |s: &str| -> Result<BigRational, D::Error> {
            let x: Scalar = s.parse().map_err(D::Error::custom)?;
            x.as_real().cloned().ok_or_else(|| D::Error::custom("complex exponent"))
        };
        let cutoff = if w.cutoff == "inf" { None } else { Some(exp(&w.cutoff)?) };
        let mut out = GradedSeries::zero(cutoff);
        for (e, c) in &w.terms {
            out.add_term(exp(e)?, c.parse().map_err(D::Error::custom)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::scalar::rat;
    use super::*;

    fn q(e: i64) -> BigRational {
        rat(e, 1)
    }

    #[test]
    fn half_powers_multiply() {
        let h = GradedSeries::monomial(rat(1, 2), Scalar::one(), None);
        assert_eq!(h.mul(&h), GradedSeries::monomial(q(1), Scalar::one(), None));
    }

    #[test]
    fn difference_of_squares_keeps_cutoff() {
        let a = GradedSeries::from_terms([(q(0), Scalar::one()), (q(1), Scalar::one())], Some(q(2)));
        let b = GradedSeries::from_terms([(q(0), Scalar::one()), (q(1), Scalar::int(-1))], Some(q(2)));
        let p = a.mul(&b);
        assert_eq!(p.cutoff(), Some(&q(2)));
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.coeff(&q(2)), Scalar::int(-1));
        assert_eq!(a.mul(&GradedSeries::exact_one()), a);
    }

    #[test]
    fn euler_operator() {
        let t = GradedSeries::monomial(rat(1, 4), Scalar::one(), None);
        assert_eq!(t.log_derivative_weighted().coeff(&rat(1, 4)), Scalar::frac(1, 4));
        assert!(GradedSeries::monomial(q(0), Scalar::int(5), None).log_derivative_weighted().is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let a = GradedSeries::from_terms([(rat(1, 2), "1/3+2*i".parse().unwrap())], Some(q(4)));
        let js = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<GradedSeries>(&js).unwrap(), a);
        let e = GradedSeries::exact_one();
        assert!(serde_json::to_string(&e).unwrap().contains("\"inf\""));
    }
}
