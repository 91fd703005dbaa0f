//! Acceptance gate: one test per release criterion, each printing a single
//! verdict line. Tolerances and resolutions here are commitments, not
//! defaults; loosening them is a release decision, not a test fix.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use grandmorrey::constants::{admissible_sigma, cz_constant, maximal_constant};
use grandmorrey::dsl::{self, family_to_ast, FamilySpec};
use grandmorrey::grid::{make_grid, Domain, Grading, GridFunction};
use grandmorrey::norms::{
    delta_exponent, lebesgue_norm, phi_from_terms, phi_terms, SpaceParams, SweepGrids,
    SweepOptions,
};
use grandmorrey::operators::{maximal, singular, Kernel, OperatorKind};
use grandmorrey::verify::{
    default_corpus, refine_until, run_dominance_suite, run_reduction_suite, SuiteOptions,
};

/// Prints the verdict line when the test body finishes or panics.
struct Verdict {
    number: u32,
    label: &'static str,
}

impl Drop for Verdict {
    fn drop(&mut self) {
        let verdict = if std::thread::panicking() { "FAIL" } else { "PASS" };
        println!("[acceptance] criterion {:2} ({}): {verdict}", self.number, self.label);
    }
}

fn criterion(number: u32, label: &'static str) -> Verdict {
    Verdict { number, label }
}

fn unit_interval() -> Domain {
    Domain::interval(0.0, 1.0).unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

#[test]
fn criterion_01_grand_lebesgue_witness() {
    let _v = criterion(1, "grand Lebesgue witness");
    let start = Instant::now();
    let space = SpaceParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
    let domain = unit_interval();
    let grading = [Grading { point: [0.0, 0.0], ratio: 0.5, levels: 40 }];
    let out = refine_until(
        |level| {
            let grid = Arc::new(make_grid(&domain, &[1024 << level], &grading)?);
            let f = GridFunction::from_fn(&grid, |x| x[0].powf(-0.5));
            let sweep = SweepGrids::new(&grid, &space, &SweepOptions::default());
            Ok::<_, Box<dyn std::error::Error>>(
                grandmorrey::norms::grand_grand_norm(&f, &space, &sweep)?,
            )
        },
        2e-3,
        6,
    )
    .unwrap();
    assert!(out.converged, "no convergence within 6 levels: {out:?}");
    // sup over eps in (0,1) of eps^{1/(2-eps)} ||x^{-1/2}||_{2-eps} = 2.
    assert!(rel_err(out.value, 2.0) <= 0.02, "{out:?}");
    assert!(start.elapsed().as_secs() < 30, "{:?}", start.elapsed());
}

#[test]
fn criterion_02_power_function_lebesgue_norms() {
    let _v = criterion(2, "power-function Lebesgue norms");
    let domain = unit_interval();
    let grading = [Grading { point: [0.0, 0.0], ratio: 0.8, levels: 260 }];
    let grid = Arc::new(make_grid(&domain, &[1 << 14], &grading).unwrap());
    let mut combos = 0;
    for beta in [0.3, 0.45] {
        let f = GridFunction::from_fn(&grid, |x| x[0].powf(-beta));
        for p in [1.5, 2.0, 3.0] {
            for eps in [0.0, 0.1, 0.4] {
                let q = p - eps;
                if beta * q >= 1.0 {
                    continue;
                }
                combos += 1;
                let got = lebesgue_norm(&f, q).unwrap();
                let want = (1.0 - beta * q).powf(-1.0 / q);
                assert!(
                    rel_err(got, want) <= 0.005,
                    "beta {beta} q {q}: got {got}, want {want}"
                );
            }
        }
    }
    assert_eq!(combos, 15);
}

#[test]
fn criterion_03_maximal_operator_oracle() {
    let _v = criterion(3, "maximal-operator oracle");
    let n = 1 << 14;
    let h = 1.0 / n as f64;
    let grid = Arc::new(make_grid(&unit_interval(), &[n], &[]).unwrap());
    let f = GridFunction::from_fn(&grid, |x| if x[0] < 0.5 { 1.0 } else { 0.0 });
    let m = maximal(&f);
    let mut worst = 0.0f64;
    for (center, &got) in grid.centers().iter().zip(m.values()) {
        let x = center[0];
        if (x - 0.5).abs() < 2.0 * h {
            continue;
        }
        let want = if x < 0.5 { 1.0 } else { 0.5 };
        worst = worst.max(rel_err(got, want));
    }
    assert!(worst <= 0.01, "sup relative error {worst}");
}

#[test]
fn criterion_04_singular_operator_oracle() {
    let _v = criterion(4, "singular-operator oracle");
    let mut errs = Vec::new();
    for level in 0..3u32 {
        let n = (1 << 12) << level;
        let grid = Arc::new(make_grid(&unit_interval(), &[n], &[]).unwrap());
        let one = GridFunction::from_fn(&grid, |_| 1.0);
        let t = singular(&one, Kernel::Hilbert, 0.5).unwrap();
        let mut worst = 0.0f64;
        for (center, &got) in grid.centers().iter().zip(t.values()) {
            let x = center[0];
            if !(0.1..=0.9).contains(&x) {
                continue;
            }
            worst = worst.max(rel_err(got, (x / (1.0 - x)).ln()));
        }
        errs.push(worst);
    }
    // 2% at 2^14 cells, and no error growth while refining (10% slack).
    assert!(errs[2] <= 0.02, "{errs:?}");
    assert!(errs[1] <= 1.1 * errs[0] && errs[2] <= 1.1 * errs[1], "{errs:?}");
}

#[test]
fn criterion_05_dominance_under_random_caps() {
    let _v = criterion(5, "dominance under random caps");
    let space = SpaceParams::new(2.0, 0.5, 1.0, 0.3).unwrap();
    let corpus = default_corpus(&space);
    let opts = SuiteOptions { resolution: 256, levels: 1, ..SuiteOptions::default() };
    let s_max = space.s_max();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let s = s_max * (0.1 + 0.85 * rng.random::<f64>());
        let sigma = s * (0.05 + 0.9 * rng.random::<f64>());
        let report = run_dominance_suite(&corpus, &space, s, sigma, &opts).unwrap();
        assert!(
            report.passed(),
            "sigma {sigma}, s {s}: {} failures, max ratio {}",
            report.summary.n_fail,
            report.summary.max_ratio
        );
    }
}

#[test]
fn criterion_06_cap_monotonicity_and_slice_bounds() {
    let _v = criterion(6, "cap monotonicity and slice bounds");
    let spaces = [
        SpaceParams::new(2.0, 0.0, 1.0, 0.0).unwrap(),
        SpaceParams::new(2.0, 0.5, 1.0, 0.0).unwrap(),
        SpaceParams::new(2.0, 0.5, 1.0, 1.0).unwrap(),
        SpaceParams::new(1.5, 0.3, 0.7, 0.3).unwrap(),
        SpaceParams::new(3.0, 0.8, 2.0, 0.1).unwrap(),
    ];
    let domain = unit_interval();
    let mut sets = Vec::new();
    for space in &spaces {
        for entry in default_corpus(space) {
            let grid = Arc::new(make_grid(&domain, &[256], &entry.grading()).unwrap());
            let f = dsl::sample(&entry.ast, &grid).unwrap();
            let sweep = SweepGrids::new(&grid, space, &SweepOptions::default());
            let terms = phi_terms(&f, space, &sweep);
            let norm = phi_from_terms(&terms, space.s_max());
            sets.push((space.s_max(), terms, norm));
        }
    }
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let (s_max, terms, norm) = &sets[rng.random_range(0..sets.len())];
        let lo = s_max * (0.001 + 0.999 * rng.random::<f64>());
        let hi = lo + (s_max - lo) * rng.random::<f64>();
        let phi_lo = phi_from_terms(terms, lo);
        let phi_hi = phi_from_terms(terms, hi);
        assert!(phi_lo <= phi_hi * (1.0 + tol), "lo {lo} hi {hi}: {phi_lo} > {phi_hi}");
        let t = &terms[rng.random_range(0..terms.len())];
        assert!(t.term <= norm * (1.0 + tol), "eps {}: {} > {norm}", t.eps, t.term);
    }
}

#[test]
fn criterion_07_delta_identity_and_range() {
    let _v = criterion(7, "exponent gap identity and range");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let p = 1.05 + 2.95 * rng.random::<f64>();
        let lambda = 0.95 * rng.random::<f64>();
        let alpha = if lambda == 0.0 { 0.0 } else { 1.2 * rng.random::<f64>() };
        let space = SpaceParams::new(p, lambda, 1.0, alpha).unwrap();
        let eps = space.s_max() * 0.999_999 * rng.random::<f64>();
        let sigma = eps * rng.random::<f64>();
        let delta = delta_exponent(&space, sigma, eps).unwrap();
        let direct = (1.0 + alpha * eps - lambda) / (p - eps)
            - (1.0 + alpha * sigma - lambda) / (p - sigma);
        assert!(
            (delta - direct).abs() <= 1e-12,
            "p {p} lambda {lambda} alpha {alpha} sigma {sigma} eps {eps}: {delta} vs {direct}"
        );
        assert!((0.0..=1.0).contains(&delta), "delta {delta} out of range");
    }
}

#[test]
fn criterion_08_reduction_suites_self_consistent() {
    let _v = criterion(8, "calibrated reduction suites");
    let start = Instant::now();
    let opts = SuiteOptions {
        resolution: 1 << 13,
        levels: 1,
        calibrate: true,
        ..SuiteOptions::default()
    };

    let space = SpaceParams::new(2.0, 0.5, 1.0, 1.0).unwrap();
    let corpus = default_corpus(&space);
    let report =
        run_reduction_suite(OperatorKind::Maximal, &corpus, &space, 0.25, &opts).unwrap();
    assert!(report.passed(), "maximal: {} failures", report.summary.n_fail);

    let space = SpaceParams::new(1.5, 0.3, 1.0, 0.0).unwrap();
    let corpus = default_corpus(&space);
    let report =
        run_reduction_suite(OperatorKind::Singular(Kernel::Hilbert), &corpus, &space, 0.25, &opts)
            .unwrap();
    assert!(report.passed(), "singular: {} failures", report.summary.n_fail);

    assert!(start.elapsed().as_secs() < 300, "{:?}", start.elapsed());
}

#[test]
fn criterion_09_constant_evaluators() {
    let _v = criterion(9, "constant evaluators");
    let got = maximal_constant(2.0, 0.0, 1, 1.0).unwrap();
    assert!((got - (1.0 + 2.0f64.sqrt())).abs() <= 1e-12, "{got}");
    assert_eq!(cz_constant(1.5, 0.5, 1.0).unwrap(), 10.0);
    assert!(cz_constant(2.0, 0.5, 1.0).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..100 {
        let p = 1.05 + 2.45 * rng.random::<f64>();
        let lambda = 0.9 * rng.random::<f64>();
        let alpha = if lambda == 0.0 { 0.0 } else { rng.random::<f64>() };
        let space = SpaceParams::new(p, lambda, 1.0, alpha).unwrap();
        let s_max = space.s_max();
        let kind = if i % 2 == 0 {
            OperatorKind::Maximal
        } else {
            OperatorKind::Singular(Kernel::Hilbert)
        };
        let want_hi = match kind {
            OperatorKind::Maximal => s_max,
            OperatorKind::Singular(_) if p < 2.0 => s_max,
            OperatorKind::Singular(_) => (p - 2.0).min(s_max),
        };
        let range = admissible_sigma(&space, kind).unwrap();
        assert_eq!(range.lo, 0.0, "p {p} lambda {lambda} alpha {alpha}");
        assert_eq!(range.hi, want_hi, "p {p} lambda {lambda} alpha {alpha}");
    }
}

#[test]
fn criterion_10_parser_round_trips_and_families() {
    let _v = criterion(10, "parser round trips and families");
    let battery = [
        "-x^2",
        "1 - x*x + x^3",
        "sin(3.5*x) * exp(-x)",
        "abs(x - 0.25) ^ (-0.3)",
        "min(1, max(x, 0.2))",
        "step(x - 0.5) / (1 + x^2)",
        "ln(x + 1) * cos(x)",
        "2 ^ x ^ 2",
        "-(x - 0.5)^2 + 0.25",
    ];
    for src in battery {
        let ast = dsl::parse(src, 1).unwrap();
        let printed = dsl::print(&ast);
        let reparsed = dsl::parse(&printed, 1).unwrap();
        assert_eq!(ast, reparsed, "{src}");
        assert_eq!(printed, dsl::print(&reparsed), "{src}");
    }

    // Unary minus binds below the power: -x^2 is -(x^2).
    assert_eq!(dsl::parse("-x^2", 1).unwrap(), dsl::parse("-(x^2)", 1).unwrap());
    assert_ne!(dsl::parse("-x^2", 1).unwrap(), dsl::parse("(-x)^2", 1).unwrap());
    assert_eq!(dsl::eval(&dsl::parse("-x^2", 1).unwrap(), [3.0, 0.0]).unwrap(), -9.0);

    let pairs = [
        (
            FamilySpec::Power { beta: 0.3, point: [0.25, 0.0] },
            "abs(x - 0.25) ^ (-0.3)".to_string(),
        ),
        (
            FamilySpec::Indicator { lo: [0.2, 0.0], hi: [0.7, 0.0] },
            "step(x - 0.2) * step(0.7 - x)".to_string(),
        ),
        (
            FamilySpec::Oscillatory { k: 4.0 },
            format!("sin({} * x)", 4.0 * std::f64::consts::PI),
        ),
        (FamilySpec::Constant { c: 2.5 }, "2.5".to_string()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (spec, expr) in &pairs {
        let lowered = family_to_ast(spec, 1);
        let parsed = dsl::parse(expr, 1).unwrap();
        for _ in 0..1000 {
            let x = [rng.random::<f64>(), 0.0];
            let a = dsl::eval(&lowered, x).unwrap();
            let b = dsl::eval(&parsed, x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "{expr} at {}", x[0]);
        }
    }
}

#[test]
fn criterion_11_verify_reports_deterministic() {
    let _v = criterion(11, "deterministic verify reports");
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{
            "domain": {"type": "interval", "bounds": [0.0, 1.0]},
            "grid": {"cells": [256]},
            "function": {"expr": "1"},
            "space": {"p": 2.0, "lambda": 0.5, "alpha": 0.3},
            "suite": {"name": "dominance", "sigma": 0.1, "s": 0.4, "max_levels": 1, "seed": 42}
        }"#,
    )
    .unwrap();
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out_path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_grandmorrey"))
            .args([
                "verify",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out_path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        reports.push(std::fs::read(&out_path).unwrap());
    }
    assert!(!reports[0].is_empty());
    assert_eq!(reports[0], reports[1]);
}
