//! Test functions the suites run against.
//!
//! Each entry pairs an expression with the metadata the suites need to treat
//! it honestly: where it blows up (so meshes can grade there) and how fast
//! (so integrability of `|f|^q` can be decided without trusting the grid).

use crate::dsl::{family_to_ast, Ast, FamilySpec};
use crate::grid::Grading;
use crate::norms::SpaceParams;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub ast: Ast,
    /// Points where `|f|` is unbounded; meshes refine toward these.
    pub singular_points: Vec<[f64; 2]>,
    /// Growth order g with `|f(x)| <= dist(x, singular set)^{-g}` up to a
    /// bounded factor; 0 for bounded functions.
    pub growth: f64,
}

impl CorpusEntry {
    pub fn new(
        id: impl Into<String>,
        ast: Ast,
        singular_points: Vec<[f64; 2]>,
        growth: f64,
    ) -> Self {
        CorpusEntry {
            id: id.into(),
            ast,
            singular_points,
            growth,
        }
    }

    /// Whether `|f|^q` integrates: growth below the critical order `1/q`.
    pub fn lp_finite(&self, q: f64) -> bool {
        self.growth * q < 1.0
    }

    /// Mesh grading toward every declared singular point.
    pub fn grading(&self) -> Vec<Grading> {
        self.singular_points
            .iter()
            .map(|&pt| Grading::at(pt))
            .collect()
    }
}

/// Stock one-dimensional corpus on (0, 1), parameterized so the borderline
/// members sit exactly at the integrability edges of the given space: one
/// power just outside every Lebesgue exponent up to p, one just outside the
/// Morrey scale.
pub fn default_corpus(space: &SpaceParams) -> Vec<CorpusEntry> {
    let p = space.p();
    let lambda = space.lambda();
    let power = |beta: f64| {
        family_to_ast(
            &FamilySpec::Power {
                beta,
                point: [0.0; 2],
            },
            1,
        )
    };
    let origin = vec![[0.0; 2]];
    vec![
        CorpusEntry::new(
            "one",
            family_to_ast(&FamilySpec::Constant { c: 1.0 }, 1),
            vec![],
            0.0,
        ),
        CorpusEntry::new(
            "half-indicator",
            family_to_ast(
                &FamilySpec::Indicator {
                    lo: [0.0; 2],
                    hi: [0.5, 0.0],
                },
                1,
            ),
            vec![],
            0.0,
        ),
        CorpusEntry::new("pow-0.3", power(0.3), origin.clone(), 0.3),
        CorpusEntry::new("pow-grand-edge", power(1.0 / p), origin.clone(), 1.0 / p),
        CorpusEntry::new(
            "pow-morrey-edge",
            power((1.0 - lambda) / p),
            origin.clone(),
            (1.0 - lambda) / p,
        ),
        // sin(8 pi x) * x^{-0.2}: oscillation with a mild singular factor.
        // The sine vanishes at 0, so the product is bounded; the growth
        // bound 0.2 is still the honest envelope for |f|.
        CorpusEntry::new(
            "osc-pow",
            Ast::mul(
                family_to_ast(&FamilySpec::Oscillatory { k: 8.0 }, 1),
                power(0.2),
            ),
            origin,
            0.2,
        ),
    ]
}
