use std::collections::VecDeque;
use std::io::Write;
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};

use tau_blocks::bilinear::{
    benchmark, fast_block, growth_exponent, verify_identity_with, BilinearError, FastParams, IdentityId, IdentityParams,
    IrregularPoint, RegularPoint,
};
use tau_blocks::blowup::{c_ratio_p3, c_ratio_p6, l_nn_sq, omega_sq, BlowupError, Coupling, FactorParams};
use tau_blocks::fnsr_oracle::{oracle_element, verify_highest_weight, OracleError};
use tau_blocks::kernel::{exponent_string, HalfInt, KernelError, Scalar};
use tau_blocks::mutation::{with_mutation, Mutation};
use tau_blocks::nsr::{nsr_block_irregular, nsr_blocks, NsrError, NsrParams};
use tau_blocks::painleve::{
    sigma_form_residual, tau_residual, tau_series, to_f64, NumericOptions, PainleveError, SigmaForm, SigmaFormProblem,
    TauEvaluator, TauKind, TauSpec,
};
use tau_blocks::virasoro::{block_irregular, block_regular, VirParams, VirasoroError};

use crate::args::*;
use crate::selftest::{run_criterion, CriterionReport, SelftestConfig};

/// Environment variable holding the worker count of `selftest`.
pub const THREADS_ENV: &str = "TAU_BLOCKS_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Flag { flag: &'static str, message: String },
    #[error(transparent)]
    Bilinear(#[from] BilinearError),
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Painleve(#[from] PainleveError),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
    #[error(transparent)]
    Nsr(#[from] NsrError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

/// What a command produced before it is wrapped in the report header.
struct Done {
    result: Value,
    residual_max_order: Option<String>,
    pass: bool,
    csv: Option<String>,
}

impl Done {
    fn value(result: Value) -> Self {
        Done { result, residual_max_order: None, pass: true, csv: None }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    params: Value,
    result: Value,
    residual_max_order: Option<String>,
    pass: bool,
}

fn flag(flag: &'static str, message: impl Into<String>) -> CliError {
    CliError::Flag { flag, message: message.into() }
}

fn need<T: Clone>(v: &Option<T>, name: &'static str) -> Result<T> {
    v.clone().ok_or_else(|| flag(name, "required here"))
}

fn four(v: &Option<Vec<Scalar>>, name: &'static str) -> Result<[Scalar; 4]> {
    let v = need(v, name)?;
    let n = v.len();
    v.try_into().map_err(|_| flag(name, format!("expected 4 comma-separated values, got {n}")))
}

fn real(x: &Scalar, name: &'static str) -> Result<num_rational::BigRational> {
    x.as_real().cloned().ok_or_else(|| flag(name, "must be real"))
}

pub fn run_command(cli: &Cli) -> Result<Outcome> {
    let (name, params, done) = match &cli.command {
        Command::Block(a) => ("block", serde_json::to_value(a)?, block(a)?),
        Command::NsrBlock(a) => ("nsr-block", serde_json::to_value(a)?, nsr_block(a)?),
        Command::Blowup(a) => ("blowup", serde_json::to_value(a)?, blowup(a)?),
        Command::OracleL(a) => ("oracle-l", serde_json::to_value(a)?, oracle_l(a)?),
        Command::VerifyHighestWeight(a) => ("verify-highest-weight", serde_json::to_value(a)?, highest_weight(a)?),
        Command::Verify(a) => ("verify", serde_json::to_value(a)?, verify(a)?),
        Command::FastBlock(a) => ("fast-block", serde_json::to_value(a)?, fast(a)?),
        Command::Tau3(a) => ("tau3", serde_json::to_value(a)?, tau(a, false)?),
        Command::Tau6(a) => ("tau6", serde_json::to_value(a)?, tau(a, true)?),
        Command::SigmaCheck(a) => ("sigma-check", serde_json::to_value(a)?, sigma_check(a)?),
        Command::Bench(a) => ("bench", serde_json::to_value(a)?, bench(a)?),
        Command::Selftest(a) => ("selftest", serde_json::to_value(a)?, selftest(a)?),
    };
    let text = match done.csv {
        Some(csv) => csv,
        None => {
            let report = Report { command: name, params, result: done.result, residual_max_order: done.residual_max_order, pass: done.pass };
            serde_json::to_string_pretty(&report)? + "\n"
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(if done.pass { Outcome::Pass } else { Outcome::Fail })
}

fn block(a: &BlockArgs) -> Result<Done> {
    let params = match (&a.c, &a.b) {
        (Some(_), Some(_)) => return Err(flag("--c", "give either --c or --b")),
        (None, Some(b)) => match (&a.p, &a.delta) {
            (Some(_), Some(_)) => return Err(flag("--delta", "give either --delta or --P")),
            (Some(p), None) => VirParams::from_b_momentum(b, p)?,
            (None, Some(d)) => VirParams::from_b(b, d.clone())?,
            (None, None) => return Err(flag("--delta", "give --delta or --P")),
        },
        (Some(c), None) => VirParams::from_c(c.clone(), need(&a.delta, "--delta")?),
        (None, None) => return Err(flag("--c", "give --c or --b")),
    };
    let (kind, series) = match a.externals {
        Some(_) => ("regular", block_regular(&params, &four(&a.externals, "--externals")?, a.order)?),
        None => ("irregular", block_irregular(&params, a.order)?),
    };
    Ok(Done::value(json!({ "kind": kind, "series": series })))
}

fn nsr_block(a: &NsrBlockArgs) -> Result<Done> {
    let params = match (&a.p, &a.delta) {
        (Some(p), None) => NsrParams::from_b_momentum(&a.b, p)?,
        (None, Some(d)) => NsrParams::from_b(&a.b, d.clone())?,
        _ => return Err(flag("--delta", "give exactly one of --delta and --P")),
    };
    Ok(Done::value(match a.externals {
        Some(_) => {
            let (f, ft) = nsr_blocks(&params, &four(&a.externals, "--externals")?, a.order.0)?;
            json!({ "kind": "regular", "F": f, "F_tilde": ft })
        }
        None => json!({ "kind": "irregular", "F": nsr_block_irregular(&params, a.order.0)? }),
    }))
}

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

fn blowup(a: &BlowupArgs) -> Result<Done> {
    let c = Coupling::new(&a.b)?;
    let fp = |n: HalfInt, np: HalfInt| FactorParams {
        coupling: c.clone(),
        p: a.p.clone(),
        p_prime: a.p_prime.clone(),
        alpha: a.alpha.clone(),
        n,
        n_prime: np,
    };
    let mut table = Vec::new();
    for t in 0..=2 {
        for u in 0..=2 {
            table.push(json!({ "n": h(t).to_string(), "np": h(u).to_string(), "l_sq": l_nn_sq(&fp(h(t), h(u)))? }));
        }
    }
    let mut result = json!({
        "l_sq": l_nn_sq(&fp(a.n.0, a.np.0))?,
        "omega_sq": { "P": omega_sq(&c, &a.p, a.n.0)?, "Pp": omega_sq(&c, &a.p_prime, a.np.0)? },
        "table": table,
    });
    if let Some(sigma) = &a.sigma {
        let mut p3 = Vec::new();
        for t in 1..=4 {
            p3.push(json!({ "n": h(t).to_string(), "c_ratio": c_ratio_p3(sigma, h(t), 0)? }));
        }
        result["c_ratio_p3"] = Value::Array(p3);
        if a.theta.is_some() {
            let theta = four(&a.theta, "--theta")?;
            let mut p6 = Vec::new();
            for n in 1..=2 {
                p6.push(json!({ "n": n.to_string(), "c_ratio": c_ratio_p6(sigma, &theta, HalfInt::int(n))? }));
            }
            result["c_ratio_p6"] = Value::Array(p6);
        }
    } else if a.theta.is_some() {
        return Err(flag("--theta", "needs --sigma"));
    }
    Ok(Done::value(result))
}

fn oracle_l(a: &OracleArgs) -> Result<Done> {
    let cut = match a.level_cut {
        Some(c) => c.0,
        None => {
            let t = a.n.0.twice().abs().max(a.np.0.twice().abs());
            h(t * t)
        }
    };
    let e = oracle_element(&a.b, &a.p, &a.alpha, &a.p_prime, a.n.0, a.np.0, cut)?;
    let oracle = e.l_squared()?;
    let fp = FactorParams {
        coupling: Coupling::new(&a.b)?,
        p: a.p.clone(),
        p_prime: a.p_prime.clone(),
        alpha: a.alpha.clone(),
        n: a.n.0,
        n_prime: a.np.0,
    };
    let closed = l_nn_sq(&fp)?;
    let pass = oracle == closed;
    Ok(Done {
        result: json!({
            "l_sq_oracle": oracle,
            "l_sq_closed_form": closed,
            "raw": e.raw,
            "norm_bra": e.norm_bra,
            "norm_ket": e.norm_ket,
            "level_cut": cut.to_string(),
        }),
        residual_max_order: None,
        pass,
        csv: None,
    })
}

fn highest_weight(a: &HighestWeightArgs) -> Result<Done> {
    let r = verify_highest_weight(&a.b, &a.p, a.n.0, a.k_max)?;
    Ok(Done {
        result: json!({
            "eigenvalues": [r.eigenvalues.0, r.eigenvalues.1],
            "expected": [r.expected.0, r.expected.1],
            "first_failure": r.first_failure.map(|(which, k)| format!("{which:?} k={k}")),
        }),
        residual_max_order: None,
        pass: r.pass,
        csv: None,
    })
}

fn verify(a: &VerifyArgs) -> Result<Done> {
    use IdentityId::*;
    let id: IdentityId = a.id.parse().map_err(|e: BilinearError| flag("--id", e.to_string()))?;
    let params = match id {
        BlockDecomp | Bilin | Bilin0 | Bilin1 | Relsh20 | T1 | T3 | Relsh32 => {
            IdentityParams::Irregular(IrregularPoint { b: need(&a.b, "--b")?, p: need(&a.p, "--P")? })
        }
        ChainDecomp | PviBilin | T1g | T2g | T3g | Relsh32g => IdentityParams::Regular(RegularPoint {
            b: need(&a.b, "--b")?,
            p: need(&a.p, "--P")?,
            momenta: four(&a.momenta, "--momenta")?,
        }),
        S0 | S1 => IdentityParams::P3 { sigma: need(&a.sigma, "--sigma")? },
        S0Pvi | S1Pvi => IdentityParams::P6 { sigma: need(&a.sigma, "--sigma")?, theta: four(&a.theta, "--theta")? },
    };
    let v = verify_identity_with(id, &params, a.order.0, a.extra_shells)?;
    Ok(Done {
        result: serde_json::to_value(&v)?,
        residual_max_order: Some(exponent_string(&v.residual_max_order())),
        pass: v.pass(),
        csv: None,
    })
}

fn fast_params(s: &SchemeParams) -> Result<FastParams> {
    Ok(match s.scheme {
        SchemeArg::C1Irregular => FastParams::C1Irregular { sigma: need(&s.sigma, "--sigma")? },
        SchemeArg::C1Regular => FastParams::C1Regular { sigma: need(&s.sigma, "--sigma")?, theta: four(&s.theta, "--theta")? },
        SchemeArg::GenericIrregular => FastParams::GenericIrregular { b: need(&s.b, "--b")?, p: need(&s.p, "--P")? },
        SchemeArg::GenericRegular => FastParams::GenericRegular {
            b: need(&s.b, "--b")?,
            p: need(&s.p, "--P")?,
            momenta: four(&s.momenta, "--momenta")?,
        },
    })
}

fn fast(a: &FastBlockArgs) -> Result<Done> {
    let table = fast_block(&fast_params(&a.scheme)?, a.order)?;
    Ok(Done::value(serde_json::to_value(&table)?))
}

fn tau_spec(sigma: &Scalar, s: &Scalar, theta: &Option<Vec<Scalar>>, sixth: bool, n_range: u32, n_max: &Scalar) -> Result<TauSpec> {
    let n_max = real(n_max, "--n-max")?;
    Ok(if sixth {
        TauSpec::p6(sigma.clone(), four(theta, "--theta")?, s.clone(), n_range, n_max)
    } else {
        if theta.is_some() {
            return Err(flag("--theta", "only for the sixth equation"));
        }
        TauSpec::p3(sigma.clone(), s.clone(), n_range, n_max)
    })
}

fn numeric(digits: usize, tolerance: f64) -> NumericOptions {
    NumericOptions { digits, tolerance, ..NumericOptions::default() }
}

fn tau(a: &TauArgs, sixth: bool) -> Result<Done> {
    let spec = tau_spec(&a.sigma, &a.s, &a.theta, sixth, a.n_range, &a.n_max)?;
    let series = tau_series(&spec)?;
    let residual = tau_residual(&spec)?;
    let cutoff = spec.cutoff()?;
    let base = series.min_exp().map(|e| &e + &e).unwrap_or_else(|| cutoff.clone());
    let through = residual.first_nonzero_to(&cutoff).unwrap_or_else(|| cutoff.clone());
    let pass = residual.vanishes_to(&cutoff)?;
    let opts = numeric(a.digits, a.tolerance);
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    if !a.samples.is_empty() {
        let ev = TauEvaluator::new(&spec, &opts)?;
        let form = SigmaForm::new(&spec, &opts)?;
        for &t in &a.samples {
            let z = ev.zeta(t)?;
            let r = to_f64(&form.residual(&z.t, &z.zeta, &z.d1, &z.d2));
            let (zeta, d1, d2) = z.as_f64();
            let mut sample = json!({ "t": t, "zeta": zeta, "d1": d1, "d2": d2, "sigma_residual": r, "tail_estimate": z.tail_estimate });
            if matches!(spec.kind, TauKind::P3) {
                sample["q"] = json!(to_f64(&z.q()));
                sample["p"] = json!(to_f64(&z.p()));
            }
            samples.push(sample);
            rows.push((t, zeta, r));
        }
    }
    let csv = match a.format {
        Format::Json => None,
        Format::Csv => {
            if a.samples.is_empty() {
                return Err(flag("--samples", "CSV output needs sample points"));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "zeta", "sigma_residual"])?;
            for (t, zeta, r) in rows {
                w.serialize((t, zeta, r))?;
            }
            Some(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("ascii csv"))
        }
    };
    Ok(Done {
        result: json!({ "series": series, "residual": residual, "samples": samples }),
        residual_max_order: Some(exponent_string(&(through - base))),
        pass,
        csv,
    })
}

fn sigma_check(a: &SigmaArgs) -> Result<Done> {
    let spec = tau_spec(&a.sigma, &a.s, &a.theta, a.equation == Equation::P6, a.n_range, &a.n_max)?;
    let problem = SigmaFormProblem { options: numeric(a.digits, a.tolerance), rk_tolerance: a.rk_tolerance };
    let report = sigma_form_residual(&problem, &spec, &a.samples)?;
    let pass = report.max_residual < a.residual_tol && report.max_deviation < a.deviation_tol;
    Ok(Done { result: serde_json::to_value(&report)?, residual_max_order: None, pass, csv: None })
}

fn bench(a: &BenchArgs) -> Result<Done> {
    let rows = benchmark(&fast_params(&a.scheme)?, &a.n_list)?;
    let exponent = if rows.len() >= 2 { Some(growth_exponent(&rows)) } else { None };
    let csv = match a.format {
        Format::Json => None,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["scheme", "N", "wall_ms"])?;
            for r in &rows {
                w.write_record([r.scheme.clone(), r.n.to_string(), format!("{:.3}", r.wall_ms)])?;
            }
            Some(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("ascii csv"))
        }
    };
    Ok(Done { result: json!({ "rows": rows, "growth_exponent": exponent }), residual_max_order: None, pass: true, csv })
}

fn worker_count() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()).filter(|&n| n > 0).unwrap_or(1)
}

fn run_one(id: usize, cfg: &SelftestConfig, mutation: Option<Mutation>) -> CriterionReport {
    match mutation {
        Some(m) => with_mutation(m, || run_criterion(id, cfg)),
        None => run_criterion(id, cfg),
    }
}

/// Criteria are independent; workers pull ids from a shared queue.
fn run_criteria(ids: &[usize], cfg: &SelftestConfig, mutation: Option<Mutation>) -> Vec<CriterionReport> {
    let workers = worker_count().min(ids.len()).max(1);
    if workers == 1 {
        return ids
            .iter()
            .map(|&id| {
                let r = run_one(id, cfg, mutation);
                eprintln!("{r}");
                r
            })
            .collect();
    }
    let queue = Mutex::new(ids.iter().copied().collect::<VecDeque<_>>());
    let done = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                while let Some(id) = queue.lock().expect("queue").pop_front() {
                    let r = run_one(id, cfg, mutation);
                    eprintln!("{r}");
                    done.lock().expect("results").push(r);
                }
            });
        }
    });
    let mut out = done.into_inner().expect("results");
    out.sort_by_key(|r| ids.iter().position(|&i| i == r.id));
    out
}

fn selftest(a: &SelftestArgs) -> Result<Done> {
    if let Some(bad) = a.criteria.iter().find(|&&c| !(1..=9).contains(&c)) {
        return Err(flag("--criteria", format!("no criterion {bad}; use 1..9")));
    }
    let cfg = SelftestConfig { seed: a.seed, quick: a.quick, fail_fast: a.fail_fast };
    let mutation = a.mutation.map(|m| match m {
        MutationArg::SEvenBound => Mutation::SEvenBound,
        MutationArg::HirotaCoefficient => Mutation::HirotaCoefficient,
    });
    let reports = run_criteria(&a.criteria, &cfg, mutation);
    let pass = reports.iter().all(|r| r.pass);
    Ok(Done { result: serde_json::to_value(&reports)?, residual_max_order: None, pass, csv: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_and_short_lists_name_the_flag() {
        let e = need::<Scalar>(&None, "--sigma").unwrap_err();
        assert!(e.to_string().starts_with("--sigma"));
        let e = four(&Some(vec![Scalar::int(1); 3]), "--theta").unwrap_err();
        assert!(e.to_string().starts_with("--theta"));
        assert_eq!(four(&Some(vec![Scalar::int(1); 4]), "--theta").unwrap().len(), 4);
    }

    #[test]
    fn complex_n_max_is_rejected() {
        let e = tau_spec(&Scalar::frac(1, 5), &Scalar::int(1), &None, false, 2, &"1+i".parse().unwrap()).unwrap_err();
        assert!(e.to_string().starts_with("--n-max"));
    }
}
