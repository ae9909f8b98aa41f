//! One test per verification check, so `cargo test --test acceptance`
//! prints a pass/fail line for each headline claim.

use tshape_core::verify::run_check;

fn run(name: &str) {
    let report = run_check(name).unwrap_or_else(|| panic!("unknown check {name}"));
    let status = if report.passed { "PASS" } else { "FAIL" };
    println!("{status} {name} ({:.2} s): {}", report.seconds, report.details);
    assert!(report.passed, "{name}: {}", report.details);
}

#[test]
fn gamma_qhat_consistency() {
    run("gamma-qhat-consistency");
}

#[test]
fn qhat_boundary_identity() {
    run("qhat-boundary-identity");
}

#[test]
fn remark_identity_1d() {
    run("remark-identity-1d");
}

#[test]
fn reduced_convexity() {
    run("reduced-convexity");
}

#[test]
fn reduced_bifurcation_1d() {
    run("reduced-bifurcation-1d");
}

#[test]
fn taylor_consistency() {
    run("taylor-consistency");
}

#[test]
fn shooting_anchors() {
    run("shooting-anchors");
}

#[test]
fn scaling_laws() {
    run("scaling-laws");
}

#[test]
fn oracle_equivalence() {
    run("oracle-equivalence");
}

#[test]
fn linear_case() {
    run("linear-case");
}

#[test]
fn bifurcation_1d_flagship() {
    run("bifurcation-1d-flagship");
}

#[test]
fn exploratory_2d_bound() {
    run("exploratory-2d-bound");
}
