//! End-to-end verification of a golden row: recover the matrix from the
//! solution series, rebuild the operator, and run the structural checks.

use dncalc_core::modular;
use dncalc_core::numth::rat;
use dncalc_core::pfit;
use dncalc_core::weyl::{dn_build, DPoly};

use crate::fixtures::GoldenFixture;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str) -> Self {
        CheckResult {
            name,
            passed: true,
            detail: String::from("ok"),
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: false,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairReport {
    pub pair: (u32, u32),
    pub checks: Vec<CheckResult>,
}

impl PairReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the full battery for one golden row at the given working precision.
pub fn verify_pair(f: &GoldenFixture, terms: usize) -> PairReport {
    let (n, d) = f.pair;
    let c0 = f.c0();
    let want_matrix = f.matrix.to_matrix().expect("fixture matrix parses");
    let want_op = f.operator.to_op().expect("fixture operator parses");
    let mut checks = Vec::new();

    // 1. Recover the matrix and operator from the solution series alone.
    match pfit::recover(n, d, &c0, terms) {
        Ok((m, l)) => {
            if m == want_matrix && l == want_op {
                checks.push(CheckResult::pass("recover"));
            } else {
                checks.push(CheckResult::fail(
                    "recover",
                    String::from("recovered matrix or operator differs from golden data"),
                ));
            }
        }
        Err(e) => checks.push(CheckResult::fail("recover", format!("{e}"))),
    }

    // 2. The determinant of the golden matrix reproduces the golden operator.
    match dn_build(&want_matrix) {
        Ok(l) if l == want_op => checks.push(CheckResult::pass("determinant")),
        Ok(_) => checks.push(CheckResult::fail(
            "determinant",
            String::from("determinant operator differs from golden data"),
        )),
        Err(e) => checks.push(CheckResult::fail("determinant", format!("{e}"))),
    }

    // 3. Eta-product identity for the normalized solution.
    match modular::eta_product_check(n, d, terms) {
        Ok(true) => checks.push(CheckResult::pass("eta-product")),
        Ok(false) => checks.push(CheckResult::fail(
            "eta-product",
            String::from("series differs from the squared eta product"),
        )),
        Err(e) => checks.push(CheckResult::fail("eta-product", format!("{e}"))),
    }

    // 4. Maximal unipotent monodromy at t = 0: indicial polynomial D^3.
    let d_cubed = DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)]);
    if want_op.indicial_at_zero() == d_cubed {
        checks.push(CheckResult::pass("indicial"));
    } else {
        checks.push(CheckResult::fail(
            "indicial",
            String::from("indicial polynomial at t = 0 is not D^3"),
        ));
    }

    // 5. Anti-self-adjointness: L* = -L.
    if want_op.adjoint() == want_op.neg() {
        checks.push(CheckResult::pass("adjoint"));
    } else {
        checks.push(CheckResult::fail(
            "adjoint",
            String::from("adjoint is not the negated operator"),
        ));
    }

    // 6. The operator annihilates the holomorphic solution to full precision.
    match modular::holomorphic_solution(n, d, &c0, terms) {
        Ok(phi) => {
            let image = want_op.apply(&phi);
            // Applying t^k shortens the reliable window by max_tdeg terms.
            let window = terms.saturating_sub(want_op.max_tdeg().unwrap_or(0).max(0) as usize);
            let all_zero = (0..window).all(|i| *image.coeff(i) == rat(0));
            if all_zero {
                checks.push(CheckResult::pass("annihilation"));
            } else {
                checks.push(CheckResult::fail(
                    "annihilation",
                    String::from("operator does not annihilate the solution series"),
                ));
            }
        }
        Err(e) => checks.push(CheckResult::fail("annihilation", format!("{e}"))),
    }

    PairReport {
        pair: f.pair,
        checks,
    }
}

/// Verifies every fixture, fanning out across at most `jobs` threads.
/// Reports come back sorted by `(d, N)` regardless of scheduling.
pub fn verify_all(fixtures: &[GoldenFixture], terms: usize, jobs: usize) -> Vec<PairReport> {
    let jobs = jobs.max(1).min(fixtures.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let done = std::sync::Mutex::new(Vec::with_capacity(fixtures.len()));
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= fixtures.len() {
                    break;
                }
                let report = verify_pair(&fixtures[i], terms);
                done.lock().unwrap().push(report);
            });
        }
    });
    let mut out = done.into_inner().unwrap();
    out.sort_by_key(|r| (r.pair.1, r.pair.0));
    out
}
