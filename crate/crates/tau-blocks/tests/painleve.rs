use tau_blocks::bilinear::c1_p3_residual;
use tau_blocks::kernel::{rat, HalfInt, Scalar};
use tau_blocks::painleve::*;

fn theta() -> [Scalar; 4] {
    [Scalar::frac(1, 7), Scalar::frac(1, 11), Scalar::frac(1, 13), Scalar::frac(1, 3)]
}

#[test]
fn p3_residual_vanishes_through_two_sigma_sq_plus_six() {
    let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 2, rat(6, 1));
    let r = tau_residual(&spec).unwrap();
    assert!(r.is_zero(), "{r:?}");
    assert!(r.cutoff().unwrap() >= &(rat(2, 25) + rat(6, 1)));
}

#[test]
fn p3_residual_vanishes_at_three_points() {
    for (sigma, s) in [(Scalar::frac(2, 7), Scalar::frac(3, 2)), (Scalar::frac(3, 10), Scalar::frac(-2, 3)), (Scalar::frac(-1, 9), Scalar::int(5))] {
        let spec = TauSpec::p3(sigma.clone(), s, 2, rat(4, 1));
        assert!(tau_residual(&spec).unwrap().is_zero(), "sigma={sigma}");
    }
}

#[test]
fn p6_residual_vanishes_at_two_points() {
    for (sigma, s, th) in [
        (Scalar::frac(1, 5), Scalar::one(), theta()),
        (Scalar::frac(2, 7), Scalar::frac(-3, 2), [Scalar::frac(1, 6), Scalar::frac(2, 9), Scalar::frac(1, 10), Scalar::frac(2, 5)]),
    ] {
        let spec = TauSpec::p6(sigma.clone(), th, s, 2, rat(3, 1));
        let r = tau_residual(&spec).unwrap();
        assert!(r.is_zero(), "sigma={sigma}: {r:?}");
    }
}

#[test]
fn doubled_shell_breaks_residual_at_two_sigma_sq_plus_two() {
    let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 2, rat(4, 1));
    let tau = tau_series_perturbed(&spec, 1, &Scalar::int(2)).unwrap();
    let r = residual_of(&spec, &tau);
    assert_eq!(r.first_nonzero_to(r.cutoff().unwrap()), Some(rat(2, 25) + rat(2, 1)));
}

#[test]
fn sectors_add_up_and_vanish() {
    let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 2, rat(4, 1));
    let full = tau_residual(&spec).unwrap();
    let mut sum = full.scale(&Scalar::zero());
    for m in -4..=4 {
        let sector = tau_residual_sector(&spec, m).unwrap();
        assert!(sector.truncate(full.cutoff().unwrap()).is_zero(), "m={m}");
        sum = sum.add(&sector);
    }
    assert!(sum.sub(&full).is_zero());
    // The s^0 sector is the s0 relation of the bilinear module.
    let (s0, base) = c1_p3_residual(&spec.sigma, 0, HalfInt::int(4), 0).unwrap();
    let cut = &base + rat(4, 1);
    assert_eq!(s0.truncate(&cut).terms(), tau_residual_sector(&spec, 0).unwrap().truncate(&cut).terms());
}

#[test]
fn zeta_derivative_matches_finite_difference() {
    let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 3, rat(10, 1));
    let ev = TauEvaluator::new(&spec, &NumericOptions::default()).unwrap();
    let t = 0.03;
    let h = 1e-6;
    let z = ev.zeta(t).unwrap();
    let (_, d1p, _) = ev.zeta(t + h).unwrap().as_f64();
    let (_, d1m, _) = ev.zeta(t - h).unwrap().as_f64();
    let (_, _, d2) = z.as_f64();
    let fd = (d1p - d1m) / (2.0 * h);
    assert!(((fd - d2) / d2).abs() < 1e-6, "{fd} vs {d2}");
    assert!(to_f64(&z.q()).is_finite());
    assert!(to_f64(&z.p()).is_finite());
}

#[test]
fn doubling_truncation_keeps_digits() {
    let opts = NumericOptions::default();
    let a = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 2, rat(5, 1));
    let b = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 3, rat(10, 1));
    let mut accepted = 0;
    for t in [0.0001, 0.0003, 0.001, 0.005, 0.01] {
        let Ok(za) = zeta_eval(&a, t, &opts) else { continue };
        accepted += 1;
        let zb = zeta_eval(&b, t, &opts).unwrap();
        for (x, y) in [(&za.zeta, &zb.zeta), (&za.d1, &zb.d1), (&za.d2, &zb.d2)] {
            let diff = to_f64(&(x - y)).abs();
            assert!(diff <= opts.tolerance * to_f64(y).abs().max(1.0), "t={t}: {diff}");
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn tail_guard_rejects_large_t() {
    let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::one(), 1, rat(2, 1));
    let err = zeta_eval(&spec, 0.9, &NumericOptions::default()).unwrap_err();
    assert!(matches!(err, PainleveError::TailTooLarge { .. }));
}

#[test]
fn p3_sigma_form_and_integration() {
    // s = 1 in the Gamma-normalized convention: (Gamma(3/5)/Gamma(7/5))^2 to six digits.
    let spec = TauSpec::p3(Scalar::frac(1, 5), Scalar::frac(140853, 50000), 3, rat(10, 1));
    let report = sigma_form_residual(&SigmaFormProblem::default(), &spec, &[0.01, 0.02, 0.05]).unwrap();
    assert!(report.max_residual < 1e-8, "{report:?}");
    assert!(report.max_deviation < 1e-6, "{report:?}");
}

#[test]
fn p6_sigma_form_and_integration() {
    let spec = TauSpec::p6(Scalar::frac(1, 5), theta(), Scalar::one(), 3, rat(12, 1));
    let report = sigma_form_residual(&SigmaFormProblem::default(), &spec, &[0.01, 0.02, 0.05]).unwrap();
    assert!(report.max_residual < 1e-8, "{report:?}");
    assert!(report.max_deviation < 1e-6, "{report:?}");
}
