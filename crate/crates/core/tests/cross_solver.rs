//! Verdicts must not depend on the solver. The second solver is cvc5 through
//! its Python API; the test is skipped when that module is missing.

use std::path::PathBuf;
use std::process::Command;

use cltlb::driver::{check_sat, load_problem, Overrides, RunConfig};

fn cvc5_command() -> Option<String> {
    let ok = Command::new("python3").args(["-c", "import cvc5"]).output().ok()?.status.success();
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cvc5_stdin.py");
    ok.then(|| format!("python3 {}", script.display()))
}

#[test]
fn z3_and_cvc5_agree_on_suite() {
    let Some(cvc5) = cvc5_command() else {
        eprintln!("skipped: python module cvc5 not available");
        return;
    };
    let suite = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../suite");
    for name in ["increasing.cltl", "stalling_int.cltl", "stalling_real.cltl", "weak_monotone.cltl", "past_counter.cltl"] {
        let problem = load_problem(&suite.join(name)).unwrap();
        let z3 = RunConfig::resolve(&problem.options, &Overrides::default()).unwrap();
        let other = RunConfig::resolve(&problem.options, &Overrides { solver: Some(cvc5.clone()), ..Default::default() }).unwrap();
        let a = check_sat(&problem, &z3).unwrap();
        let b = check_sat(&problem, &other).unwrap();
        assert_eq!((a.name(), a.first_sat_k()), (b.name(), b.first_sat_k()), "{name}");
        if let Some(w) = b.witness() {
            assert!(w.verified, "{name}: cvc5 witness unverified");
        }
    }
}
