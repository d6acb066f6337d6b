use num_rational::BigRational;
use num_traits::Zero;

use super::scalar::{rat, Scalar};
use super::series::{geometric, GradedSeries};
use super::KernelError;

/// True iff all coefficients with exponent `<= order` coincide.
pub fn character_check(lhs: &GradedSeries, rhs: &GradedSeries, order: &BigRational) -> Result<bool, KernelError> {
    lhs.require_trusted(order)?;
    rhs.require_trusted(order)?;
    lhs.sub(rhs).truncate(order).vanishes_to(order)
}

fn binomial(c: i64, step: &BigRational, cutoff: &BigRational) -> GradedSeries {
    GradedSeries::from_terms([(BigRational::zero(), Scalar::one()), (step.clone(), Scalar::int(c))], Some(cutoff.clone()))
}

/// `prod_{k>=1} (1 - q^k)^{power}` with `power` in {-2,-1,1}, truncated at `order`.
pub fn euler_product(power: i32, order: &BigRational) -> GradedSeries {
    let mut acc = GradedSeries::exact_one().truncate(order);
    let mut k = 1i64;
    while rat(k, 1) <= *order {
        let step = rat(k, 1);
        let factor = if power > 0 { binomial(-1, &step, order) } else { geometric(&Scalar::one(), &step, order) };
        for _ in 0..power.unsigned_abs() {
            acc = acc.mul(&factor);
        }
        k += 1;
    }
    acc
}

/// `prod_{k>=1} (1 + q^{k-1/2})^2`, truncated at `order`.
pub fn neveu_schwarz_fermions(order: &BigRational) -> GradedSeries {
    let mut acc = GradedSeries::exact_one().truncate(order);
    let mut r = rat(1, 2);
    while r <= *order {
        let f = binomial(1, &r, order);
        acc = acc.mul(&f).mul(&f);
        r += rat(1, 1);
    }
    acc
}

/// Both sides of `prod (1-q^k)(1+q^{k-1/2})^2 = sum_{k in Z} q^{k^2/2}`.
pub fn triple_product_sides(order: &BigRational) -> (GradedSeries, GradedSeries) {
    let lhs = euler_product(1, order).mul(&neveu_schwarz_fermions(order));
    let mut rhs = GradedSeries::zero(Some(order.clone()));
    let mut k = 0i64;
    while rat(k * k, 2) <= *order {
        let mult = if k == 0 { 1 } else { 2 };
        rhs.add_term(rat(k * k, 2), Scalar::int(mult));
        k += 1;
    }
    (lhs, rhs)
}

/// Character of the fermion plus NSR Verma module against the sum over the momentum lattice,
/// both at relative order `order`.
pub fn fermion_nsr_character_sides(order: &BigRational) -> (GradedSeries, GradedSeries) {
    let lhs = neveu_schwarz_fermions(order).mul(&euler_product(-1, order));
    let inv2 = euler_product(-2, order);
    let mut rhs = GradedSeries::zero(Some(order.clone()));
    let mut two_n = 0i64;
    while rat(two_n * two_n, 2) <= *order {
        let shift = rat(two_n * two_n, 2);
        let term = inv2.shift(&shift).truncate(order);
        rhs = rhs.add(&term);
        if two_n > 0 {
            rhs = rhs.add(&term);
        }
        two_n += 1;
    }
    (lhs, rhs)
}

/// Both sides of
/// `(1-q^{1/2}) prod (1+q^{k-1/2})^2 (1-q^k) = sum_{m>=1} q^{(m-1)^2/2} (1-q^m)^2`.
pub fn vacuum_identity_sides(order: &BigRational) -> (GradedSeries, GradedSeries) {
    let lead = binomial(-1, &rat(1, 2), order);
    let lhs = lead.mul(&neveu_schwarz_fermions(order)).mul(&euler_product(1, order));
    let mut rhs = GradedSeries::zero(Some(order.clone()));
    let mut m = 1i64;
    while rat((m - 1) * (m - 1), 2) <= *order {
        let base = rat((m - 1) * (m - 1), 2);
        for (e, c) in [(0, 1), (m, -2), (2 * m, 1)] {
            rhs.add_term(&base + rat(e, 1), Scalar::int(c));
        }
        m += 1;
    }
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_semantics() {
        let one = GradedSeries::exact_one();
        let other = GradedSeries::from_terms([(rat(0, 1), Scalar::one()), (rat(11, 1), Scalar::one())], None);
        assert!(character_check(&one, &other, &rat(10, 1)).unwrap());
        assert!(!character_check(&one, &other, &rat(11, 1)).unwrap());
        let short = GradedSeries::exact_one().truncate(&rat(5, 1));
        assert!(matches!(character_check(&one, &short, &rat(6, 1)), Err(KernelError::CutoffTooSmall { .. })));
    }

    #[test]
    fn triple_product_to_ten() {
        let (l, r) = triple_product_sides(&rat(10, 1));
        assert!(character_check(&l, &r, &rat(10, 1)).unwrap());
    }

    #[test]
    fn fermion_nsr_to_ten() {
        let (l, r) = fermion_nsr_character_sides(&rat(10, 1));
        assert!(character_check(&l, &r, &rat(10, 1)).unwrap());
    }

    #[test]
    fn vacuum_to_twenty() {
        let (l, r) = vacuum_identity_sides(&rat(20, 1));
        assert!(character_check(&l, &r, &rat(20, 1)).unwrap());
    }
}
