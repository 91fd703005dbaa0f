//! Empirical verification: norm and operator inequalities checked on real
//! grids, reported case by case.
//!
//! Every suite builds its right-hand sides from the [`constants`](crate::constants)
//! and [`norms`](crate::norms) modules only, so a reported pass means the
//! advertised constant really covers the computed quantities on that grid.
//! Two tolerance regimes apply: bounds that hold exactly at grid level (sup
//! versus its own terms, discrete Hölder) are checked at `1e-10`; bounds
//! comparing independently discretized quantities default to `1e-2` and are
//! meant to be run at two refinement levels.
//!
//! Reports are plain data ([`Report`]) with deterministic field and case
//! ordering: the same inputs produce byte-identical serializations.

mod corpus;
mod report;
mod suites;

pub use corpus::{default_corpus, CorpusEntry};
pub use report::{Calibrated, Case, GridMeta, Report, Summary};
pub use suites::{
    run_dominance_suite, run_embedding_suite, run_operator_oracle_suite, run_reduction_suite,
    SuiteError, SuiteOptions,
};

/// Outcome of [`refine_until`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    /// The last value computed.
    pub value: f64,
    /// Whether two consecutive levels agreed to the requested tolerance.
    pub converged: bool,
    /// First level whose successor confirmed it, or `max_levels` when the
    /// sequence never settled. A resolution-independent quantity converges
    /// at level 0.
    pub levels_used: u32,
}

/// Run `compute` at refinement levels 0, 1, 2, ... (the callee doubles grid
/// resolution and sweep densities per level) until two consecutive values
/// agree to `rel_tol` relative or `max_levels` is reached. Non-convergence
/// is a flag, not an error: the caller decides what stagnation means.
pub fn refine_until<E>(
    mut compute: impl FnMut(u32) -> Result<f64, E>,
    rel_tol: f64,
    max_levels: u32,
) -> Result<Refined, E> {
    assert!(rel_tol > 0.0, "rel_tol must be positive");
    let mut prev = compute(0)?;
    for level in 1..=max_levels {
        let value = compute(level)?;
        if (value - prev).abs() <= rel_tol * value.abs() {
            return Ok(Refined {
                value,
                converged: true,
                levels_used: level - 1,
            });
        }
        prev = value;
    }
    Ok(Refined {
        value: prev,
        converged: false,
        levels_used: max_levels,
    })
}
