//! Full acceptance run: one PASS/FAIL line per criterion.

use tau_blocks_cli::selftest::*;

#[test]
fn acceptance() {
    println!(
        "tolerances: sigma residual {SIGMA_RESIDUAL_TOL:e}, sigma deviation {SIGMA_DEVIATION_TOL:e}, \
         growth exponent <= {MAX_GROWTH_EXPONENT}; exact identities compared with zero tolerance"
    );
    let cfg = SelftestConfig { seed: 20240601, quick: false, fail_fast: false };
    let mut failed = Vec::new();
    for id in 1..=9 {
        let report = run_criterion(id, &cfg);
        println!("{report}");
        for f in &report.failures {
            println!("    {f}");
        }
        if !report.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
