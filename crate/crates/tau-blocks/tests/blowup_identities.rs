use proptest::prelude::*;
use tau_blocks::blowup::*;
use tau_blocks::kernel::{rat, HalfInt, Scalar};
use tau_blocks::nsr::ns_weight;

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::frac(n, d)
}

#[test]
fn index_set_sizes() {
    for m in 0..6 {
        assert_eq!(index_set(2 * m, 0).len() as i32, m * m);
    }
    for t in [1, 3, 5, 7] {
        let m = rat(t as i64, 2);
        let expect = &m * &m - rat(1, 4);
        assert_eq!(rat(index_set(t, 1).len() as i64, 1), expect);
    }
}

#[test]
fn s_even_degree_in_x() {
    let c = Coupling::new(&Scalar::int(2)).unwrap();
    for m in 1..4 {
        let big = Scalar::int(1_000_000_000);
        let val = s_even(&c, &big, m);
        let lead = big.pow((m * m) as i64).unwrap();
        let r = val.checked_div(&lead).unwrap();
        let (x, _) = r.to_f64_pair();
        assert!((x - 1.0).abs() < 1e-6, "m={m} ratio {x}");
    }
}

#[test]
fn half_half_printed() {
    let c = Coupling::new(&Scalar::int(2)).unwrap();
    let (p, alpha, pp) = (q(1, 3), q(2, 7), q(3, 5));
    let fp = FactorParams { coupling: c.clone(), p: p.clone(), p_prime: pp.clone(), alpha: alpha.clone(), n: h(1), n_prime: h(1) };
    let four = Scalar::int(4);
    let num = (c.q() + &p + &pp - &alpha) * (&p + &pp + &alpha);
    let den = four * &p * &pp * (p.scale(&rat(2, 1)) + c.q()) * (pp.scale(&rat(2, 1)) + c.q());
    assert_eq!(l_nn_sq(&fp).unwrap(), num.square().checked_div(&den).unwrap());
    let fp0 = FactorParams { n: HalfInt::ZERO, n_prime: HalfInt::ZERO, ..fp };
    assert_eq!(l_nn_sq(&fp0).unwrap(), Scalar::one());
}

#[test]
fn conjugation_symmetry() {
    let c = Coupling::new(&q(3, 2)).unwrap();
    let (p, alpha, pp) = (q(1, 3), q(2, 7), q(3, 5));
    for t in -3..=3 {
        for tp in -3..=3 {
            let a = FactorParams { coupling: c.clone(), p: p.clone(), p_prime: pp.clone(), alpha: alpha.clone(), n: h(t), n_prime: h(tp) };
            let b = FactorParams { coupling: c.clone(), p: pp.clone(), p_prime: p.clone(), alpha: alpha.clone(), n: h(tp), n_prime: h(t) };
            assert_eq!(l_nn_sq(&a).unwrap(), l_nn_sq(&b).unwrap());
        }
    }
}

#[test]
fn blowup_factor_matches_s_products() {
    let b = q(2, 3);
    let c = Coupling::new(&b).unwrap();
    let a = q(5, 11);
    for t in 0..=4 {
        let two_a = a.scale(&rat(2, 1));
        let ours = s_even(&c, &two_a, t) * s_even(&c, &(&two_a + c.q()), t);
        let f = blowup_factor(&a, &b, c.b_inv(), h(t));
        assert!(f == ours || f == -ours.clone());
    }
}

#[test]
fn c_ratio_p3_barnes_route() {
    let s = q(1, 5);
    for t in 0..=6 {
        let kk = kappa_p3(&s, h(t)).unwrap() * kappa_p3(&s, h(-t)).unwrap();
        assert_eq!(c_ratio_p3(&s, h(t), 0).unwrap(), kk, "n={}", h(t));
    }
    assert_eq!(c_ratio_p3(&s, h(1), 0).unwrap(), -(s.square().scale(&rat(4, 1))).inv().unwrap());
    for n in -2..=2 {
        let lhs = c_ratio_p3(&s, HalfInt::int(n), 1).unwrap();
        let k = |m: i32| kappa_p3(&s, HalfInt::int(m)).unwrap();
        let x_half = kappa_p3(&s, h(1)).unwrap();
        let rhs = (k(n + 1) * k(-n)).checked_div(&x_half.square()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn c_ratio_p6_barnes_route() {
    let s = q(1, 7);
    let theta = [q(1, 3), q(2, 9), q(-1, 5), q(3, 8)];
    for n in 0..=3 {
        let kk = kappa_p6(&s, &theta, n).unwrap() * kappa_p6(&s, &theta, -n).unwrap();
        assert_eq!(c_ratio_p6(&s, &theta, HalfInt::int(n)).unwrap(), kk);
    }
}

fn c1_momenta(sigma: &Scalar, theta: &[Scalar; 4]) -> (Scalar, [Scalar; 4]) {
    let two_i = Scalar::i().scale(&rat(2, 1));
    (&two_i * sigma, [&two_i * &theta[0], &two_i * &theta[1], &two_i * &theta[2], &two_i * &theta[3]])
}

#[test]
fn c_ratio_p6_is_chain_product() {
    let c = Coupling::new(&Scalar::i()).unwrap();
    let s = q(1, 7);
    let theta = [q(1, 3), q(2, 9), q(-1, 5), q(3, 8)];
    let (p, mom) = c1_momenta(&s, &theta);
    let sign = |t: i32| if t % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
    for t in [0, 2, 4] {
        let l = sign(t) * l_n21_l34(&c, &p, &mom, h(t)).unwrap();
        assert_eq!(c_ratio_p6(&s, &theta, h(t)).unwrap(), l, "n={}", h(t));
    }
    let ratio = |t: i32| {
        let l = sign(t) * l_n21_l34(&c, &p, &mom, h(t)).unwrap();
        c_ratio_p6(&s, &theta, h(t)).unwrap().checked_div(&l).unwrap()
    };
    assert_eq!(ratio(1), ratio(3));
    assert_eq!(ratio(1), ratio(5));
}

#[test]
fn irregular_factor_is_c_ratio() {
    let c = Coupling::new(&Scalar::i()).unwrap();
    let s = q(1, 5);
    let p = Scalar::i().scale(&rat(2, 1)) * &s;
    let delta = ns_weight(&Scalar::int(-1), &p).unwrap();
    for t in 0..=4 {
        let f = l_n_irr(&c, &p, h(t)).unwrap();
        assert_eq!(f.beta, (q(1, 4), q(1, 4)));
        let (e1, e2) = f.exponents.clone();
        let total = -(e1 + e2);
        assert_eq!(total, &delta + &Scalar::frac((t * t) as i64, 2));
        // beta^{-Delta1-Delta2} = 4^{Delta + 2n^2}; the 4^{Delta} part cancels against 4^{-Delta}.
        let four_pow = Scalar::int(4).pow((t * t / 2) as i64).unwrap() * if t % 2 == 0 { Scalar::one() } else { Scalar::int(2) };
        let lhs = c_ratio_p3(&s, h(t), 0).unwrap();
        let sign = if t % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
        assert_eq!(lhs, sign * four_pow * f.reduced, "n={}", h(t));
    }
}

#[test]
fn whittaker_limit_of_chain_factor() {
    let c = Coupling::new(&Scalar::int(2)).unwrap();
    let (p, p2) = (q(1, 3), q(3, 5));
    let p1 = Scalar::int(1414);
    let d1 = ns_weight(&c.b_sq(), &p1).unwrap();
    for t in [1, 2, 3] {
        let n = h(t);
        let k = (t * t / 2) as i64;
        let l21 = l_n21_sq(&c, &p, &p1, &p2, n).unwrap();
        let reduced = l_n_irr(&c, &p, n).unwrap().reduced;
        let ratio = l21.checked_div(&(d1.pow(2 * k).unwrap() * reduced)).unwrap();
        let (x, _) = ratio.to_f64_pair();
        assert!((x - 1.0).abs() < 1e-2, "n={n} ratio {x}");
    }
}

proptest! {
    #[test]
    fn omega_three_term_relation(pn in 1i64..40, pd in 1i64..40, bn in 2i64..6, t in 1i32..4) {
        let c = Coupling::new(&Scalar::int(bn)).unwrap();
        let p = Scalar::frac(pn, pd);
        let n = h(t);
        let lhs = (omega_sq(&c, &p, n + h(1)).unwrap() * omega_sq(&c, &p, n - h(1)).unwrap())
            .checked_div(&omega_sq(&c, &p, n).unwrap().square()).unwrap();
        prop_assert_eq!(lhs, omega_three_term(&c, &p, n).unwrap());
    }

    #[test]
    fn shifted_weights_sum(pn in -30i64..30, pd in 1i64..30, bn in 1i64..7, t in -4i32..5) {
        let c = Coupling::new(&Scalar::frac(bn, 7)).unwrap();
        let p = Scalar::frac(pn, pd);
        let (d1, d2) = vir12_weights(&c, &p, h(t)).unwrap();
        let ns = ns_weight(&c.b_sq(), &p).unwrap();
        prop_assert_eq!(d1 + d2, ns + Scalar::frac((t * t) as i64, 2));
    }
}
