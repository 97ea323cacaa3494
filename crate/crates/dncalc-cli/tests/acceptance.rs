//! End-to-end acceptance gate. Each criterion is one test function and
//! prints one pass/fail line; every comparison is exact rational
//! arithmetic with tolerance zero.

use dncalc_core::numth::{rat, rat_frac, Rat};
use dncalc_core::series::RatSeries;
use dncalc_core::weyl::{d3_expand, dn_build, regularized_build, DNMatrix, DPoly, WeylOp};
use dncalc_core::{classify, curvature, modular, pfit};

use dncalc_cli::fixtures::{golden, pipeline_relation, GoldenFixture};

fn report(name: &str, outcome: Result<(), String>) {
    match outcome {
        Ok(()) => println!("criterion {name}: PASS"),
        Err(why) => {
            println!("criterion {name}: FAIL ({why})");
            panic!("criterion {name} failed: {why}");
        }
    }
}

/// Deterministic xorshift64 generator so the random suites are reproducible.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() % ((hi - lo + 1) as u64)) as i64
    }

    /// A rational with numerator and denominator bounded by 1000.
    fn rat(&mut self) -> Rat {
        rat_frac(self.int(-1000, 1000), self.int(1, 1000))
    }

    fn matrix(&mut self) -> DNMatrix {
        DNMatrix::d3(
            self.rat(),
            self.rat(),
            self.rat(),
            self.rat(),
            self.rat(),
            self.rat(),
        )
    }

    /// Small-integer coefficients: reversion and repeated composition at
    /// 60 terms are exponential in coefficient bit-size, so the property
    /// suites draw from single digits to stay within desk-scale runtime.
    fn small(&mut self) -> Rat {
        rat(self.int(-9, 9))
    }

    fn series(&mut self, prec: usize) -> RatSeries {
        let coeffs: Vec<Rat> = (0..prec).map(|_| self.small()).collect();
        RatSeries::from_prefix(&coeffs, prec)
    }

    /// A monic series of valuation exactly one (reversible / composable;
    /// the unit lead keeps every coefficient an integer, so the suites do
    /// not drown in rational gcd reduction at 60 terms).
    fn val_one_series(&mut self, prec: usize) -> RatSeries {
        let mut coeffs: Vec<Rat> = (0..prec).map(|_| self.small()).collect();
        coeffs[0] = rat(0);
        coeffs[1] = rat(1);
        RatSeries::from_prefix(&coeffs, prec)
    }
}

fn fixture_pairs() -> Vec<GoldenFixture> {
    let g = golden();
    assert_eq!(g.len(), 17, "golden table holds seventeen rows");
    g
}

#[test]
fn criterion_01_table_reproduction() {
    report("01 table-reproduction", (|| {
        for f in fixture_pairs() {
            let (n, d) = f.pair;
            let want = f.matrix.to_matrix().map_err(|e| e.to_string())?;
            let (m, _) =
                pfit::recover(n, d, &f.c0(), 48).map_err(|e| format!("({n},{d}): {e}"))?;
            if m != want {
                return Err(format!("({n},{d}): recovered matrix differs"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_02_operator_reproduction() {
    report("02 operator-reproduction", (|| {
        for f in fixture_pairs() {
            let (n, d) = f.pair;
            let m = f.matrix.to_matrix().map_err(|e| e.to_string())?;
            let want = f.operator.to_op().map_err(|e| e.to_string())?;
            let built = dn_build(&m).map_err(|e| format!("({n},{d}): {e}"))?;
            if built != want {
                return Err(format!("({n},{d}): determinant operator differs"));
            }
        }
        let mut rng = Rng::new(0x5eed_0002);
        for i in 0..100 {
            let m = rng.matrix();
            let det = dn_build(&m).map_err(|e| format!("random case {i}: {e}"))?;
            if d3_expand(&m) != det {
                return Err(format!("random case {i}: closed form differs"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_03_eta_product_formula() {
    report("03 eta-product-formula", (|| {
        for f in fixture_pairs() {
            let (n, d) = f.pair;
            match modular::eta_product_check(n, d, 40) {
                Ok(true) => {}
                Ok(false) => return Err(format!("({n},{d}): identity fails")),
                Err(e) => return Err(format!("({n},{d}): {e}")),
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_04_degree_rescaling() {
    report("04 degree-rescaling", (|| {
        // For the d > 1 rows with N in {1,2,3,5}, the solution and the
        // normalized solution are the d = 1 objects in q^d: the body is the
        // d-fold spread and the fractional offset scales by d, which is
        // exactly equality after Q -> q^(1/d).
        let terms = 30usize;
        for (n, d) in [(1u32, 2u32), (2, 2), (3, 2), (5, 2), (3, 3), (2, 4)] {
            let phi_d = modular::phi_q(n, d, terms * d as usize).map_err(|e| e.to_string())?;
            let phi_1 = modular::phi_q(n, 1, terms).map_err(|e| e.to_string())?;
            if phi_d != phi_1.spread(d as usize).truncate(terms * d as usize) {
                return Err(format!("({n},{d}): solution is not the spread"));
            }
            let c0 = modular::c0_for_level(n).map_err(|e| e.to_string())?;
            let i_d = modular::i_function(n, d, &c0, terms * d as usize)
                .map_err(|e| e.to_string())?;
            let i_1 = modular::i_function(n, 1, &c0, terms).map_err(|e| e.to_string())?;
            if *i_d.offset() != i_1.offset() * Rat::from_integer(d.into()) {
                return Err(format!("({n},{d}): offset does not scale by {d}"));
            }
            if *i_d.body() != i_1.body().spread(d as usize).truncate(terms * d as usize) {
                return Err(format!("({n},{d}): body is not the spread"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_05_classifier() {
    report("05 classifier", (|| {
        let got = classify::necessary_pairs(200, 6);
        let want: Vec<(u64, u64)> = fixture_pairs()
            .iter()
            .map(|f| (f.pair.0 as u64, f.pair.1 as u64))
            .collect();
        if got != want {
            return Err(format!("pair list differs: {got:?}"));
        }
        for (n, d, code) in [
            (10u64, 1u64, "budget B1=2>1"),
            (13, 2, "nu3=2>1"),
            (6, 2, "nu_inf=4>3"),
        ] {
            match classify::pass_filter(n, d) {
                Err(reason) if reason == code => {}
                other => return Err(format!("({n},{d}): expected {code:?}, got {other:?}")),
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_06_mum_invariant() {
    report("06 mum-invariant", (|| {
        let d_cubed = DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)]);
        for f in fixture_pairs() {
            let l = f.operator.to_op().map_err(|e| e.to_string())?;
            if l.indicial_at_zero() != d_cubed {
                return Err(format!("({},{}): indicial is not D^3", f.pair.0, f.pair.1));
            }
        }
        let mut rng = Rng::new(0x5eed_0006);
        for i in 0..100 {
            let l = dn_build(&rng.matrix()).map_err(|e| format!("random case {i}: {e}"))?;
            if l.indicial_at_zero() != d_cubed {
                return Err(format!("random case {i}: indicial is not D^3"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_07_adjoint_antisymmetry() {
    report("07 adjoint-antisymmetry", (|| {
        for f in fixture_pairs() {
            let l = f.operator.to_op().map_err(|e| e.to_string())?;
            if l.adjoint() != l.neg() {
                return Err(format!("({},{}): adjoint differs", f.pair.0, f.pair.1));
            }
        }
        let mut rng = Rng::new(0x5eed_0007);
        for i in 0..100 {
            let l = dn_build(&rng.matrix()).map_err(|e| format!("random case {i}: {e}"))?;
            if l.adjoint() != l.neg() {
                return Err(format!("random case {i}: adjoint differs"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_08_annihilation() {
    report("08 annihilation", (|| {
        let terms = 48usize;
        for f in fixture_pairs() {
            let (n, d) = f.pair;
            let l = f.operator.to_op().map_err(|e| e.to_string())?;
            let phi = modular::holomorphic_solution(n, d, &f.c0(), terms)
                .map_err(|e| format!("({n},{d}): {e}"))?;
            let image = l.apply(&phi);
            let window = terms.saturating_sub(l.max_tdeg().unwrap_or(0).max(0) as usize);
            if !(0..window).all(|i| *image.coeff(i) == rat(0)) {
                return Err(format!("({n},{d}): image is not zero"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_09_p_curvature() {
    report("09 p-curvature", (|| {
        let primes = curvature::DEFAULT_PRIMES;
        for f in fixture_pairs() {
            let (n, d) = f.pair;
            let l = f.operator.to_op().map_err(|e| e.to_string())?;
            let rep = curvature::nilpotence_report(&l, &primes);
            for (p, status) in &rep.per_prime {
                if matches!(status, curvature::PrimeStatus::NotNilpotent) {
                    return Err(format!("({n},{d}): not nilpotent at p={p}"));
                }
            }
        }
        // Control: D - t (an exponential solution; irregular at infinity)
        // must be caught as non-nilpotent at every prime in the window.
        let control = WeylOp::d().sub(&WeylOp::term(1, DPoly::one()));
        let rep = curvature::nilpotence_report(&control, &primes);
        if rep.consistent() {
            return Err(String::from("irregular control operator not rejected"));
        }
        Ok(())
    })());
}

#[test]
fn criterion_10_series_kernel_properties() {
    report("10 series-kernel-properties", (|| {
        let prec = 60usize;
        let mut rng = Rng::new(0x5eed_0010);
        let x = RatSeries::x(prec);
        for i in 0..100 {
            let f = rng.val_one_series(prec);
            let g = f.reversion().map_err(|e| format!("case {i}: {e}"))?;
            let fg = f.compose(&g).map_err(|e| format!("case {i}: {e}"))?;
            let gf = g.compose(&f).map_err(|e| format!("case {i}: {e}"))?;
            if fg != x || gf != x {
                return Err(format!("case {i}: reversion does not round-trip"));
            }
        }
        for i in 0..100 {
            let n = (2 + (i % 5)) as u64;
            let mut coeffs: Vec<Rat> = Vec::new();
            coeffs.push(rat(1));
            coeffs.extend((1..prec).map(|_| rng.small()));
            let f = RatSeries::from_prefix(&coeffs, prec);
            let root = f.nth_root(n).map_err(|e| format!("case {i}: {e}"))?;
            if root.pow(n) != f {
                return Err(format!("case {i}: nth_root does not power back"));
            }
        }
        for i in 0..100 {
            let f = rng.series(prec);
            let g = rng.val_one_series(prec);
            let h = rng.val_one_series(prec);
            let lhs = f
                .compose(&g)
                .and_then(|fg| fg.compose(&h))
                .map_err(|e| format!("case {i}: {e}"))?;
            let rhs = g
                .compose(&h)
                .and_then(|gh| f.compose(&gh))
                .map_err(|e| format!("case {i}: {e}"))?;
            if lhs != rhs {
                return Err(format!("case {i}: composition not associative"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_11_pipeline_consistency() {
    report("11 pipeline-consistency", (|| {
        let relation = pipeline_relation();
        if relation.relation != "equal" {
            return Err(format!("recorded relation is {:?}", relation.relation));
        }
        let mut rng = Rng::new(0x5eed_0011);
        for i in 0..25 {
            let m = rng.matrix();
            let det = dn_build(&m).map_err(|e| format!("random case {i}: {e}"))?;
            let reg = regularized_build(&m).map_err(|e| format!("random case {i}: {e}"))?;
            if reg != det {
                return Err(format!("random case {i}: pipelines disagree"));
            }
        }
        Ok(())
    })());
}
