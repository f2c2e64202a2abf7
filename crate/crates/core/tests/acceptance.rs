//! Acceptance criteria, one test each. Every test writes a single
//! `PASS`/`FAIL` line straight to stdout so it shows up without
//! `--nocapture`.

use std::io::Write;

use seqsched_core::verify::{self, Check, Fixtures};

fn criterion(number: usize, check: fn(&Fixtures) -> Check) {
    let c = check(&Fixtures::default());
    let status = if c.pass { "PASS" } else { "FAIL" };
    let line = format!(
        "\n{status} criterion {number} ({}): expected {}; computed {} [{:.2}s]\n",
        c.name,
        c.expected,
        c.computed,
        c.elapsed.as_secs_f64()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(c.pass, "{}", line.trim_end());
}

#[test]
fn criterion_01_thm1() {
    criterion(1, verify::check_thm1);
}

#[test]
fn criterion_02_thm2() {
    criterion(2, verify::check_thm2);
}

#[test]
fn criterion_03_thm3() {
    criterion(3, verify::check_thm3);
}

#[test]
fn criterion_04_thm4() {
    criterion(4, verify::check_thm4);
}

#[test]
fn criterion_05_thm5() {
    criterion(5, verify::check_thm5);
}

#[test]
fn criterion_06_appendix_d() {
    criterion(6, verify::check_appendix_d);
}

#[test]
fn criterion_07_example1() {
    criterion(7, verify::check_example1);
}

#[test]
fn criterion_08_structure_counts() {
    criterion(8, verify::check_structure_counts);
}

#[test]
fn criterion_09_lp() {
    criterion(9, verify::check_lp);
}

#[test]
fn criterion_10_measure_chain() {
    criterion(10, verify::check_measure_chain);
}
