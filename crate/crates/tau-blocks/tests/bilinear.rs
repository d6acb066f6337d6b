use num_rational::BigRational;
use proptest::prelude::*;
use tau_blocks::bilinear::*;
use tau_blocks::blowup::{vir12_b_sq, vir12_external, vir12_weights, Coupling};
use tau_blocks::kernel::{rat, GradedSeries, HalfInt, Scalar};
use tau_blocks::nsr::ns_weight;
use tau_blocks::virasoro::{irregular_coefficients, regular_coefficients, VirParams};

fn irregular_points() -> Vec<IrregularPoint> {
    vec![
        IrregularPoint { b: Scalar::int(2), p: Scalar::frac(1, 3) },
        IrregularPoint { b: Scalar::frac(3, 2), p: Scalar::frac(2, 7) },
        IrregularPoint { b: Scalar::frac(5, 3), p: Scalar::frac(-3, 11) },
    ]
}

fn regular_points() -> Vec<RegularPoint> {
    vec![
        RegularPoint {
            b: Scalar::int(2),
            p: Scalar::frac(1, 3),
            momenta: [Scalar::frac(1, 5), Scalar::frac(2, 7), Scalar::frac(-1, 4), Scalar::frac(3, 8)],
        },
        RegularPoint {
            b: Scalar::frac(3, 2),
            p: Scalar::frac(2, 9),
            momenta: [Scalar::frac(1, 6), Scalar::frac(-2, 5), Scalar::frac(3, 7), Scalar::frac(1, 10)],
        },
        RegularPoint {
            b: Scalar::frac(4, 3),
            p: Scalar::frac(-1, 7),
            momenta: [Scalar::frac(2, 11), Scalar::frac(1, 9), Scalar::frac(-3, 13), Scalar::frac(2, 5)],
        },
    ]
}

fn theta() -> [Scalar; 4] {
    [Scalar::frac(1, 7), Scalar::frac(1, 11), Scalar::frac(1, 13), Scalar::frac(1, 3)]
}

#[test]
fn irregular_catalog_vanishes_at_three_points() {
    let ids = ["blockdecomp", "bilin", "bilin0", "bilin1", "relsh20", "t1", "t3", "relsh32"];
    for pt in irregular_points() {
        let params = IdentityParams::Irregular(pt.clone());
        for id in ids {
            let v = verify_identity(id.parse().unwrap(), &params, HalfInt::int(3)).unwrap();
            assert!(v.pass(), "{id} at b={} P={}: {:?}", pt.b, pt.p, v.residual);
        }
    }
}

#[test]
fn regular_catalog_vanishes_at_three_points() {
    let ids = ["chdecomp", "pvibilin", "t1g", "t2g", "t3g", "relsh32g"];
    for pt in regular_points() {
        let params = IdentityParams::Regular(pt.clone());
        for id in ids {
            let v = verify_identity(id.parse().unwrap(), &params, HalfInt::from_twice(5)).unwrap();
            assert!(v.pass(), "{id} at b={} P={}: {:?}", pt.b, pt.p, v.residual);
        }
    }
}

#[test]
fn c1_relations_vanish_at_three_points() {
    for sigma in [Scalar::frac(1, 5), Scalar::frac(2, 7), Scalar::frac(3, 10)] {
        for id in ["s0", "s1"] {
            let v = verify_identity(id.parse().unwrap(), &IdentityParams::P3 { sigma: sigma.clone() }, HalfInt::int(4)).unwrap();
            assert!(v.pass(), "{id} at sigma={sigma}");
        }
        for id in ["s0pvi", "s1pvi"] {
            let params = IdentityParams::P6 { sigma: sigma.clone(), theta: theta() };
            let v = verify_identity(id.parse().unwrap(), &params, HalfInt::int(3)).unwrap();
            assert!(v.pass(), "{id} at sigma={sigma}");
        }
    }
}

#[test]
fn wrong_parameter_family_is_rejected() {
    let params = IdentityParams::P3 { sigma: Scalar::frac(1, 5) };
    let err = verify_identity(IdentityId::Bilin, &params, HalfInt::int(2)).unwrap_err();
    assert!(matches!(err, BilinearError::WrongParameters { .. }));
    assert!("nonsense".parse::<IdentityId>().is_err());
}

fn d0_sum(terms: &[DecompTerm]) -> GradedSeries {
    let op = BilinearOperator::single((Scalar::one(), -Scalar::one()), 0);
    terms.iter().fold(GradedSeries::zero(None), |acc, t| acc.add(&op.apply(&t.first, &t.second).scale(&t.weight)))
}

#[test]
fn extra_shell_changes_no_retained_coefficient() {
    let order = HalfInt::int(3);
    for pt in irregular_points().into_iter().take(2) {
        let (t0, base) = irregular_terms(&pt, order, 0, Sector::All).unwrap();
        let (t1, _) = irregular_terms(&pt, order, 1, Sector::All).unwrap();
        assert!(t1.len() > t0.len());
        let cut = &base + order.to_rational();
        assert_eq!(d0_sum(&t0).truncate(&cut).terms(), d0_sum(&t1).truncate(&cut).terms());
    }
    let pt = &regular_points()[0];
    let order = HalfInt::from_twice(5);
    let (t0, base) = regular_terms(pt, order, 0, Sector::All).unwrap();
    let (t1, _) = regular_terms(pt, order, 1, Sector::All).unwrap();
    let cut = &base + order.to_rational();
    assert_eq!(d0_sum(&t0).truncate(&cut).terms(), d0_sum(&t1).truncate(&cut).terms());
}

#[test]
fn s2_at_sigma_is_s0_at_sigma_plus_one() {
    let sigma = Scalar::frac(1, 5);
    let order = HalfInt::int(4);
    let (r2, base2) = c1_p3_residual(&sigma, 2, order, 0).unwrap();
    let (r0, base0) = c1_p3_residual(&(&sigma + &Scalar::one()), 0, order, 0).unwrap();
    assert_eq!(base2, base0);
    let cut = &base0 + order.to_rational();
    let (r2, r0) = (r2.truncate(&cut), r0.truncate(&cut));
    assert_eq!(r2.terms(), r0.terms());
}

#[test]
fn relsh20_interchanges_sectors() {
    let pt = irregular_points()[1].clone();
    let order = HalfInt::int(3);
    let (ints, base) = irregular_terms(&pt, order, 0, Sector::Integer).unwrap();
    let (halves, _) = irregular_terms(&pt, order, 0, Sector::HalfOdd).unwrap();
    let op2 = BilinearOperator::single(HirotaSpec::weighted(2, &pt.b).eps, 2);
    let lhs = halves.iter().fold(GradedSeries::zero(None), |a, t| a.add(&op2.apply(&t.first, &t.second).scale(&t.weight)));
    let rhs = q_pow(rat(1, 2)).mul(&d0_sum(&ints)).neg();
    let cut = &base + order.to_rational();
    assert_eq!(lhs.truncate(&cut).sub(&rhs.truncate(&cut)).truncate(&cut).terms().len(), 0);
}

fn series_from(coeffs: &[(i64, i64)], cutoff: i64) -> GradedSeries {
    GradedSeries::from_terms(
        coeffs.iter().enumerate().map(|(k, &(n, d))| (rat(k as i64, 1), Scalar::frac(n, d))),
        Some(rat(cutoff, 1)),
    )
}

#[test]
fn d_iii_b_at_imaginary_unit_is_twice_d_iii() {
    let f = series_from(&[(1, 1), (2, 3), (-1, 5), (4, 7), (1, 2)], 4);
    let g = series_from(&[(3, 1), (-1, 2), (5, 3), (0, 1), (2, 9)], 4);
    let four = Scalar::int(4);
    // q = 4t: a t^a coefficient becomes a q^a coefficient times 4^{-a}.
    let to_q = |s: &GradedSeries| {
        GradedSeries::from_terms(
            s.terms().iter().map(|(e, c)| (e.clone(), c.clone() * four.pow(-e.to_integer().try_into().unwrap_or(0i64)).unwrap())),
            s.cutoff().cloned(),
        )
    };
    let lhs = apply_d_iii_b(&Scalar::i(), &to_q(&f), &to_q(&g));
    let lhs_t = GradedSeries::from_terms(
        lhs.terms().iter().map(|(e, c)| (e.clone(), c.clone() * four.pow(e.to_integer().try_into().unwrap_or(0i64)).unwrap())),
        lhs.cutoff().cloned(),
    );
    let rhs = apply_d_iii(&f, &g).scale(&Scalar::int(2));
    assert_eq!(lhs_t.cutoff(), rhs.cutoff());
    assert_eq!(lhs_t.sub(&rhs).terms().len(), 0);
}

fn arb_series() -> impl Strategy<Value = GradedSeries> {
    prop::collection::vec((-20i64..20, 1i64..9, -5i64..5), 1..6).prop_map(|v| {
        GradedSeries::from_terms(
            v.iter().enumerate().map(|(k, &(n, d, im))| (rat(2 * k as i64 + 1, 2), Scalar::new(rat(n, d), rat(im, 1)))),
            Some(rat(6, 1)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hirota_antisymmetry(f in arb_series(), g in arb_series(), k in 0u32..6) {
        let spec = HirotaSpec::plain(k);
        let fg = hirota(&spec, &f, &g);
        let gf = hirota(&spec, &g, &f);
        let sign = if k % 2 == 0 { Scalar::one() } else { -Scalar::one() };
        prop_assert_eq!(fg.sub(&gf.scale(&sign)).terms().len(), 0);
    }

    #[test]
    fn hirota_on_monomials(a in -12i64..12, b in -12i64..12, k in 0u32..5, e1 in -4i64..4, e2 in -4i64..4) {
        let spec = HirotaSpec { order: k, eps: (Scalar::int(e1), Scalar::int(e2)) };
        let f = GradedSeries::monomial(rat(a, 2), Scalar::one(), None);
        let g = GradedSeries::monomial(rat(b, 3), Scalar::one(), None);
        let h = hirota(&spec, &f, &g);
        let w = Scalar::real(rat(e1 * a, 2) + rat(e2 * b, 3)).pow(k as i64).unwrap();
        let exp: BigRational = rat(a, 2) + rat(b, 3);
        prop_assert_eq!(h.coeff(&exp), w);
    }
}

fn assert_c1_irregular_matches(sigma: Scalar, n_max: usize) {
    let table = fast_block(&FastParams::C1Irregular { sigma: sigma.clone() }, n_max).unwrap();
    let mut j = 0i32;
    while 2 * (j * j) as usize <= n_max {
        for key in [(j, 0), (-j, 0)] {
            let center = &sigma + &Scalar::int(key.0 as i64);
            let lvl = n_max - 2 * (j * j) as usize;
            let gram = irregular_coefficients(&VirParams::from_c(Scalar::one(), center.square()), lvl as i32).unwrap();
            for (n, g) in gram.iter().enumerate() {
                assert_eq!(&table.get(key, n).unwrap()[0], g, "sigma={sigma} key={key:?} N={n}");
            }
        }
        j += 1;
    }
}

#[test]
fn fast_c1_irregular_matches_gram() {
    assert_c1_irregular_matches(Scalar::frac(1, 5), 8);
    assert_c1_irregular_matches(Scalar::frac(2, 7), 8);
}

#[test]
fn fast_c1_regular_matches_gram() {
    for sigma in [Scalar::frac(1, 5), Scalar::frac(2, 7)] {
        let th = theta();
        let table = fast_block(&FastParams::C1Regular { sigma: sigma.clone(), theta: th.clone() }, 8).unwrap();
        let ext = [th[0].square(), th[1].square(), th[2].square(), th[3].square()];
        let gram = regular_coefficients(&VirParams::from_c(Scalar::one(), sigma.square()), &ext, 8).unwrap();
        for (n, g) in gram.iter().enumerate() {
            assert_eq!(&table.get((0, 0), n).unwrap()[0], g, "sigma={sigma} N={n}");
        }
    }
}

#[test]
fn fast_generic_irregular_matches_gram() {
    for pt in irregular_points().into_iter().take(2) {
        let table = fast_block(&FastParams::GenericIrregular { b: pt.b.clone(), p: pt.p.clone() }, 8).unwrap();
        let c = Coupling::new(&pt.b).unwrap();
        let (b1, b2) = vir12_b_sq(&c).unwrap();
        let (d1, d2) = vir12_weights(&c, &pt.p, HalfInt::int(0)).unwrap();
        let g1 = irregular_coefficients(&VirParams::from_b_sq(b1, d1).unwrap(), 8).unwrap();
        let g2 = irregular_coefficients(&VirParams::from_b_sq(b2, d2).unwrap(), 8).unwrap();
        assert_eq!(table.center(0), g1);
        assert_eq!(table.center(1), g2);
    }
}

#[test]
fn fast_generic_regular_matches_gram() {
    let pt = &regular_points()[0];
    let n_max = 6;
    let params = FastParams::GenericRegular { b: pt.b.clone(), p: pt.p.clone(), momenta: pt.momenta.clone() };
    let table = fast_block(&params, n_max).unwrap();
    let c = Coupling::new(&pt.b).unwrap();
    let (b1, b2) = vir12_b_sq(&c).unwrap();
    let (d1, d2) = vir12_weights(&c, &pt.p, HalfInt::int(0)).unwrap();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for m in &pt.momenta {
        let (a, b) = vir12_external(&c, &ns_weight(&c.b_sq(), m).unwrap()).unwrap();
        e1.push(a);
        e2.push(b);
    }
    let g1 = regular_coefficients(&VirParams::from_b_sq(b1, d1).unwrap(), &e1.try_into().unwrap(), n_max as i32).unwrap();
    let g2 = regular_coefficients(&VirParams::from_b_sq(b2, d2).unwrap(), &e2.try_into().unwrap(), n_max as i32).unwrap();
    assert_eq!(table.center(0), g1);
    assert_eq!(table.center(1), g2);
}

#[test]
fn fast_c1_seeds_and_first_coefficient() {
    let sigma = Scalar::frac(1, 5);
    let table = fast_block(&FastParams::C1Irregular { sigma: sigma.clone() }, 8).unwrap();
    for j in -2..=2 {
        assert!(table.get((j, 0), 0).unwrap()[0].is_one());
    }
    let expected = sigma.square().scale(&rat(2, 1)).inv().unwrap();
    assert_eq!(table.get((0, 0), 1).unwrap()[0], expected);
}

#[test]
fn fast_c1_resonance_is_reported() {
    let err = fast_block(&FastParams::C1Irregular { sigma: Scalar::int(1) }, 3).unwrap_err();
    assert!(matches!(err, BilinearError::Resonance { .. }), "{err:?}");
}

#[test]
fn half_centered_relation_reproduces_table() {
    let sigma = Scalar::frac(1, 5);
    let table = fast_block(&FastParams::C1Irregular { sigma: sigma.clone() }, 12).unwrap();
    for n in 1..=12 {
        assert_eq!(c1_irregular_half_centered(&sigma, n, None).unwrap(), table.get((0, 0), n).unwrap()[0], "N={n}");
        assert_eq!(c1_irregular_half_centered(&sigma, n, Some(&table)).unwrap(), table.get((0, 0), n).unwrap()[0], "N={n}");
    }
}
