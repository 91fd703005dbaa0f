//! Randomized invariants: parser round-trips, norm homogeneity and
//! monotonicity, and the exponent-gap identity.

use std::sync::Arc;

use proptest::prelude::*;

use grandmorrey::dsl::{self, Ast, BinOp, Func, Var};
use grandmorrey::grid::{make_grid, Domain, Grid, GridFunction};
use grandmorrey::norms::{
    delta_exponent, eps_grid, lebesgue_norm, morrey_norm, phi, phi_terms, BallFamily, EpsSweep,
    SpaceParams, SweepGrids, SweepOptions,
};

fn unit_grid(n: u32) -> Arc<Grid> {
    Arc::new(make_grid(&Domain::interval(0.0, 1.0).unwrap(), &[n], &[]).unwrap())
}

/// Finite literals that survive printing and reparsing losslessly. Negative
/// zero is normalized away: it prints as "-0", which reparses as a negation.
fn literal() -> impl Strategy<Value = Ast> {
    (-100.0f64..100.0).prop_map(|v| Ast::num(if v == 0.0 { 0.0 } else { v }))
}

fn leaf(dim: usize) -> impl Strategy<Value = Ast> {
    let vars = if dim == 1 {
        vec![Ast::Var(Var::X)]
    } else {
        vec![Ast::Var(Var::X1), Ast::Var(Var::X2)]
    };
    prop_oneof![literal(), proptest::sample::select(vars)]
}

fn ast(dim: usize) -> impl Strategy<Value = Ast> {
    leaf(dim).prop_recursive(4, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ast::bin(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ast::bin(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ast::bin(BinOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ast::bin(BinOp::Div, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ast::bin(BinOp::Pow, a, b)),
            inner.clone().prop_map(|a| Ast::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Ast::Call(Func::Abs, vec![a])),
            inner.clone().prop_map(|a| Ast::Call(Func::Sin, vec![a])),
            inner.clone().prop_map(|a| Ast::Call(Func::Exp, vec![a])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ast::Call(Func::Min, vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Ast::Call(Func::Max, vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn printed_expressions_reparse_to_the_same_tree(tree in ast(1)) {
        let text = dsl::print(&tree);
        let back = dsl::parse(&text, 1).unwrap();
        prop_assert_eq!(dsl::print(&back), text.clone());
        prop_assert_eq!(&back, &tree);
    }

    #[test]
    fn printed_plane_expressions_reparse_to_the_same_tree(tree in ast(2)) {
        let text = dsl::print(&tree);
        let back = dsl::parse(&text, 2).unwrap();
        prop_assert_eq!(&back, &tree);
    }

    #[test]
    fn reparsed_expressions_evaluate_identically(
        tree in ast(1),
        x in 0.001f64..1.0,
    ) {
        let back = dsl::parse(&dsl::print(&tree), 1).unwrap();
        let a = dsl::eval(&tree, [x, 0.0]);
        let b = dsl::eval(&back, [x, 0.0]);
        match (a, b) {
            // Same tree, same operations: results agree bit for bit.
            (Ok(u), Ok(v)) => prop_assert_eq!(u.to_bits(), v.to_bits()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "diverged: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn norms_are_absolutely_homogeneous(
        values in proptest::collection::vec(-100.0f64..100.0, 48),
        scale in prop_oneof![-400.0f64..-0.01, 0.01f64..400.0],
        q in 1.01f64..4.0,
        lam in 0.0f64..0.95,
    ) {
        let grid = unit_grid(48);
        let f = GridFunction::from_values(&grid, values);
        let scaled = f.map(|v| scale * v);
        let family = BallFamily::for_grid(&grid, &SweepOptions::default().balls);

        let base = lebesgue_norm(&f, q).unwrap();
        let big = lebesgue_norm(&scaled, q).unwrap();
        prop_assert!((big - scale.abs() * base).abs() <= 1e-12 * big.max(1e-300));

        let base = morrey_norm(&f, q, lam, &family).unwrap();
        let big = morrey_norm(&scaled, q, lam, &family).unwrap();
        prop_assert!((big - scale.abs() * base).abs() <= 1e-12 * big.max(1e-300));
    }

    #[test]
    fn the_full_norm_is_absolutely_homogeneous(
        values in proptest::collection::vec(-10.0f64..10.0, 40),
        scale in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0],
    ) {
        let space = SpaceParams::new(2.0, 0.5, 1.0, 0.3).unwrap();
        let grid = unit_grid(40);
        let f = GridFunction::from_values(&grid, values);
        let scaled = f.map(|v| scale * v);
        let sweep = SweepGrids::new(&grid, &space, &SweepOptions::default());
        let s = space.s_max();
        let base = phi(&f, &space, s, &sweep).unwrap();
        let big = phi(&scaled, &space, s, &sweep).unwrap();
        prop_assert!((big - scale.abs() * base).abs() <= 1e-12 * big.max(1e-300));
    }

    #[test]
    fn phi_is_monotone_in_the_cap(
        values in proptest::collection::vec(0.0f64..10.0, 40),
        caps in (0.001f64..1.0, 0.001f64..1.0),
    ) {
        let space = SpaceParams::new(2.0, 0.5, 1.0, 0.3).unwrap();
        let s_max = space.s_max();
        let (a, b) = (caps.0 * s_max, caps.1 * s_max);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let grid = unit_grid(40);
        let f = GridFunction::from_values(&grid, values);
        let sweep = SweepGrids::new(&grid, &space, &SweepOptions::default());
        // One shared term sweep: a larger cap ranges over a superset.
        prop_assert!(
            phi(&f, &space, lo, &sweep).unwrap() <= phi(&f, &space, hi, &sweep).unwrap()
        );
    }

    #[test]
    fn every_sweep_term_is_below_the_norm(
        values in proptest::collection::vec(0.1f64..10.0, 40),
    ) {
        let space = SpaceParams::new(2.0, 0.5, 1.0, 0.3).unwrap();
        let grid = unit_grid(40);
        let f = GridFunction::from_values(&grid, values);
        let sweep = SweepGrids::new(&grid, &space, &SweepOptions::default());
        let norm = phi(&f, &space, space.s_max(), &sweep).unwrap();
        for t in phi_terms(&f, &space, &sweep) {
            prop_assert!(t.term <= norm);
        }
    }

    #[test]
    fn exponent_gap_matches_its_unfactored_form_and_stays_in_range(
        p in 1.05f64..6.0,
        lam_frac in 0.0f64..1.0,
        alpha in 0.0f64..3.0,
        eps_frac in 0.0f64..1.0,
        sigma_frac in 0.0f64..1.0,
    ) {
        let lambda = 0.95 * lam_frac;
        // lambda = 0 forces alpha = 0; otherwise s_max degenerates.
        let alpha = if lambda == 0.0 { 0.0 } else { alpha };
        let space = SpaceParams::new(p, lambda, 1.0, alpha).unwrap();
        let s_max = space.s_max();
        let eps = 0.999 * eps_frac * s_max;
        let sigma = sigma_frac * eps;
        let gap = delta_exponent(&space, sigma, eps).unwrap();
        let direct = (1.0 + alpha * eps - lambda) / (p - eps)
            - (1.0 + alpha * sigma - lambda) / (p - sigma);
        prop_assert!((gap - direct).abs() <= 1e-12, "{gap} vs {direct}");
        prop_assert!((0.0..=1.0).contains(&gap), "gap {gap} out of range");
    }

    #[test]
    fn eps_grids_are_strictly_increasing_inside_the_cap(s in 0.01f64..3.0) {
        let grid = eps_grid(s, &EpsSweep::default());
        prop_assert!(!grid.is_empty());
        prop_assert!(grid.iter().all(|&e| 0.0 < e && e < s));
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_space_parameters_are_rejected(
        p in prop_oneof![-2.0f64..1.0, Just(1.0)],
        lam in 1.0f64..3.0,
    ) {
        prop_assert!(SpaceParams::new(p, 0.0, 1.0, 0.0).is_err());
        prop_assert!(SpaceParams::new(2.0, lam, 1.0, 0.0).is_err());
        prop_assert!(SpaceParams::new(2.0, 0.0, -1.0, 0.0).is_err());
        prop_assert!(SpaceParams::new(2.0, 0.0, 1.0, -0.5).is_err());
        // Positive alpha with lambda = 0 leaves no admissible eps at all.
        let err = SpaceParams::new(2.0, 0.0, 1.0, 0.5).unwrap_err();
        prop_assert!(err.to_string().contains("degenerate s_max"));
    }
}
