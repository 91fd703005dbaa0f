//! Lebesgue, Morrey and grand grand Morrey norms on grid functions.
//!
//! The grand grand scale over exponent `p`, Morrey weight `lambda`,
//! aggregation power `theta` and weight drift `alpha` is
//!
//! ```text
//! Phi(f, s) = sup { eps^(theta/(p-eps)) * ||f||_{p-eps, lambda-alpha*eps} : 0 < eps < s }
//! ```
//!
//! with the norm of the space equal to `Phi(f, s_max)`,
//! `s_max = min(p - 1, lambda/alpha)` (and `lambda/alpha` read as infinity
//! when `alpha = 0`). Suprema are evaluated on explicit finite sweeps: a
//! geometric-plus-uniform grid in `eps` and a family of balls with strided
//! centers and geometrically laddered radii. Everything downstream (the
//! inequality checks, the calibrated constants) uses these same sweeps, so
//! monotonicity in `s` and nesting under sweep refinement hold exactly.

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{ball_measure, Grid, GridFunction};

#[derive(Debug, Error, PartialEq)]
pub enum NormError {
    #[error("p must exceed 1, got {p}")]
    BadP { p: f64 },
    #[error("lambda must lie in [0, 1), got {lambda}")]
    BadLambda { lambda: f64 },
    #[error("theta must be positive, got {theta}")]
    BadTheta { theta: f64 },
    #[error("alpha must be nonnegative, got {alpha}")]
    BadAlpha { alpha: f64 },
    #[error("degenerate s_max: lambda = 0 with alpha > 0 leaves no admissible eps")]
    DegenerateSmax,
    #[error("integrability exponent must be positive, got {q}")]
    BadExponent { q: f64 },
    #[error("s must lie in (0, {s_max}], got {s}")]
    BadS { s: f64, s_max: f64 },
    #[error("need 0 <= sigma <= eps < s_max = {s_max}, got eps = {eps}, sigma = {sigma}")]
    BadEpsRange { eps: f64, sigma: f64, s_max: f64 },
}

/// Validated parameter tuple `(p, lambda, theta, alpha)` of a grand grand
/// Morrey space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    p: f64,
    lambda: f64,
    theta: f64,
    alpha: f64,
}

impl SpaceParams {
    pub fn new(p: f64, lambda: f64, theta: f64, alpha: f64) -> Result<Self, NormError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(NormError::BadP { p });
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(NormError::BadLambda { lambda });
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(NormError::BadTheta { theta });
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(NormError::BadAlpha { alpha });
        }
        if lambda == 0.0 && alpha > 0.0 {
            return Err(NormError::DegenerateSmax);
        }
        Ok(SpaceParams { p, lambda, theta, alpha })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper end of the admissible `eps` range, `min(p - 1, lambda/alpha)`;
    /// `alpha = 0` puts no weight-drift cap on it.
    pub fn s_max(&self) -> f64 {
        if self.alpha == 0.0 {
            self.p - 1.0
        } else {
            (self.p - 1.0).min(self.lambda / self.alpha)
        }
    }
}

/// Shape of the finite `eps` sweep under a cap `s`: geometric approaches to
/// both endpoints plus a uniform fill.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsSweep {
    /// Points `s * 2^-i` and `s * (1 - 2^-i)` for `i = 1..=approach_count`.
    pub approach_count: u32,
    /// Points `s * k / (uniform_count + 1)` for `k = 1..=uniform_count`.
    pub uniform_count: u32,
}

impl Default for EpsSweep {
    fn default() -> Self {
        EpsSweep { approach_count: 20, uniform_count: 64 }
    }
}

/// Shape of the ball family: centers at every `stride`-th cell per axis,
/// radii laddered geometrically from the domain diameter down to
/// `min_radius_cells` nominal cell widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSweep {
    /// 0 picks the default: every cell in one dimension, every fourth cell
    /// per axis in two.
    pub stride: u32,
    /// Radii per octave; the ladder is `diameter * 2^(-j/per_octave)`.
    pub per_octave: u32,
    pub min_radius_cells: f64,
}

impl Default for BallSweep {
    fn default() -> Self {
        BallSweep { stride: 0, per_octave: 8, min_radius_cells: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub eps: EpsSweep,
    pub balls: BallSweep,
}

/// Ascending `eps` values strictly inside `(0, s)`, deduplicated.
pub fn eps_grid(s: f64, sweep: &EpsSweep) -> Vec<f64> {
    assert!(s > 0.0 && s.is_finite(), "eps sweep needs a positive finite cap");
    let mut out = Vec::with_capacity(2 * sweep.approach_count as usize + sweep.uniform_count as usize);
    for i in 1..=sweep.approach_count {
        let scale = 0.5f64.powi(i.min(1000) as i32);
        out.push(s * scale);
        out.push(s * (1.0 - scale));
    }
    let denom = f64::from(sweep.uniform_count) + 1.0;
    for k in 1..=sweep.uniform_count {
        out.push(s * f64::from(k) / denom);
    }
    out.retain(|&e| e > 0.0 && e < s);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// A fixed family of balls over one grid, with the cell index ranges under
/// each ball precomputed so that any weighted integral over a ball is a few
/// prefix-table lookups.
#[derive(Debug, Clone)]
pub struct BallFamily {
    dim: usize,
    /// Distinct radii, descending; balls refer into this list.
    radii: Vec<f64>,
    centers: Vec<[f64; 2]>,
    radius_idx: Vec<u32>,
    range_offsets: Vec<u32>,
    ranges: Vec<(u32, u32)>,
}

impl BallFamily {
    /// Build the family for a grid: strided cell centers crossed with a
    /// geometric radius ladder.
    pub fn for_grid(grid: &Grid, sweep: &BallSweep) -> BallFamily {
        let stride = match sweep.stride {
            0 => {
                if grid.dim() == 1 {
                    1
                } else {
                    4
                }
            }
            s => s,
        } as usize;
        assert!(sweep.per_octave >= 1, "radius ladder needs at least one step per octave");

        let d = grid.domain().diameter();
        let min_r = (sweep.min_radius_cells * grid.nominal_h()).min(d);
        let mut radii = Vec::new();
        let mut j = 0u32;
        loop {
            let r = d * 2f64.powf(-f64::from(j) / f64::from(sweep.per_octave));
            if r < min_r {
                break;
            }
            radii.push(r);
            j += 1;
        }
        if radii.is_empty() {
            radii.push(d);
        }

        let mut centers = Vec::new();
        for (offset, [nx, ny]) in grid.box_shapes() {
            for jy in (0..ny).step_by(stride) {
                for ix in (0..nx).step_by(stride) {
                    centers.push(grid.centers()[offset + jy * nx + ix]);
                }
            }
        }

        let n_balls = centers.len() * radii.len();
        let mut radius_idx = Vec::with_capacity(n_balls);
        let mut all_centers = Vec::with_capacity(n_balls);
        let mut range_offsets = Vec::with_capacity(n_balls + 1);
        let mut ranges = Vec::new();
        range_offsets.push(0u32);
        for &c in &centers {
            for (ri, &r) in radii.iter().enumerate() {
                grid.for_ball_ranges(c, r, |lo, hi| {
                    ranges.push((lo as u32, hi as u32));
                });
                all_centers.push(c);
                radius_idx.push(ri as u32);
                range_offsets.push(ranges.len() as u32);
            }
        }

        BallFamily {
            dim: grid.dim(),
            radii,
            centers: all_centers,
            radius_idx,
            range_offsets,
            ranges,
        }
    }

    pub fn n_balls(&self) -> usize {
        self.radius_idx.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Center and radius of every ball, in construction order.
    pub fn balls(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.centers
            .iter()
            .zip(&self.radius_idx)
            .map(|(&c, &ri)| (c, self.radii[ri as usize]))
    }

    /// `max` over balls of `factor(radius) * integral(ball)` where the
    /// integral reads the caller's prefix table of per-cell weights.
    fn sup_weighted(&self, prefix: &[f64], radius_factor: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for b in 0..self.n_balls() {
            let lo = self.range_offsets[b] as usize;
            let hi = self.range_offsets[b + 1] as usize;
            let mut integral = 0.0;
            for &(a, z) in &self.ranges[lo..hi] {
                integral += prefix[z as usize] - prefix[a as usize];
            }
            let v = radius_factor[self.radius_idx[b] as usize] * integral;
            if v > best {
                best = v;
            }
        }
        best
    }

    fn lam_factors(&self, lam: f64) -> Vec<f64> {
        self.radii
            .iter()
            .map(|&r| ball_measure(self.dim, r).powf(-lam))
            .collect()
    }
}

fn weight_prefix(f: &GridFunction, q: f64, prefix: &mut Vec<f64>) {
    let grid = f.grid();
    prefix.clear();
    prefix.reserve(grid.n_cells() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for (v, mu) in f.values().iter().zip(grid.measures()) {
        acc += v.abs().powf(q) * mu;
        prefix.push(acc);
    }
}

/// `(integral of |f|^q)^(1/q)` by the midpoint rule.
pub fn lebesgue_norm(f: &GridFunction, q: f64) -> Result<f64, NormError> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(NormError::BadExponent { q });
    }
    let mut prefix = Vec::new();
    weight_prefix(f, q, &mut prefix);
    Ok(prefix.last().unwrap().powf(1.0 / q))
}

/// `sup` over the family of `(|B|^(-lam) * integral over B of |f|^q)^(1/q)`
/// with `|B|` the full ball measure, balls clipped to the domain.
pub fn morrey_norm(
    f: &GridFunction,
    q: f64,
    lam: f64,
    family: &BallFamily,
) -> Result<f64, NormError> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(NormError::BadExponent { q });
    }
    if !(0.0..1.0).contains(&lam) {
        return Err(NormError::BadLambda { lambda: lam });
    }
    let mut prefix = Vec::new();
    weight_prefix(f, q, &mut prefix);
    Ok(family.sup_weighted(&prefix, &family.lam_factors(lam)).powf(1.0 / q))
}

/// One evaluated point of the `eps` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiTerm {
    pub eps: f64,
    /// `||f||_{p-eps, lambda-alpha*eps}` over the ball family.
    pub morrey: f64,
    /// `eps^(theta/(p-eps))` times the above.
    pub term: f64,
}

/// The `eps` grid and ball family a norm evaluation sweeps over, tied to
/// one grid. The `eps` list covers `(0, s_max)` and optionally approaches
/// extra anchor points, so that caps below `s_max` still see points just
/// under the cap.
#[derive(Debug, Clone)]
pub struct SweepGrids {
    grid: Arc<Grid>,
    s_max: f64,
    eps: Vec<f64>,
    family: BallFamily,
}

impl SweepGrids {
    pub fn new(grid: &Arc<Grid>, space: &SpaceParams, opts: &SweepOptions) -> SweepGrids {
        SweepGrids::with_anchors(grid, space, opts, &[])
    }

    /// As [`SweepGrids::new`], with extra geometric approaches to each
    /// anchor in `(0, s_max)` merged into the `eps` grid. Anchors make
    /// suprema capped at those points effectively attained.
    pub fn with_anchors(
        grid: &Arc<Grid>,
        space: &SpaceParams,
        opts: &SweepOptions,
        anchors: &[f64],
    ) -> SweepGrids {
        let s_max = space.s_max();
        let mut eps = eps_grid(s_max, &opts.eps);
        for &a in anchors {
            assert!(a > 0.0 && a <= s_max, "anchor outside (0, s_max]");
            for i in 1..=opts.eps.approach_count {
                let scale = 0.5f64.powi(i.min(1000) as i32);
                eps.push(a * scale);
                eps.push(a * (1.0 - scale));
            }
            if a < s_max {
                eps.push(a);
            }
        }
        eps.retain(|&e| e > 0.0 && e < s_max);
        eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eps.dedup();
        SweepGrids {
            grid: Arc::clone(grid),
            s_max,
            eps,
            family: BallFamily::for_grid(grid, &opts.balls),
        }
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn family(&self) -> &BallFamily {
        &self.family
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
}

/// Evaluate every sweep point: the Morrey norm at exponent `p - eps`,
/// weight `lambda - alpha*eps`, and the weighted term.
pub fn phi_terms(f: &GridFunction, space: &SpaceParams, sweep: &SweepGrids) -> Vec<PhiTerm> {
    assert!(
        Arc::ptr_eq(f.grid(), &sweep.grid),
        "function and sweep must share a grid"
    );
    let (p, lambda, theta, alpha) = (space.p, space.lambda, space.theta, space.alpha);
    let mut prefix = Vec::new();
    let mut out = Vec::with_capacity(sweep.eps.len());
    for &eps in &sweep.eps {
        let q = p - eps;
        let lam = lambda - alpha * eps;
        weight_prefix(f, q, &mut prefix);
        let sup = sweep.family.sup_weighted(&prefix, &sweep.family.lam_factors(lam));
        let morrey = sup.powf(1.0 / q);
        let term = eps.powf(theta / q) * morrey;
        out.push(PhiTerm { eps, morrey, term });
    }
    out
}

/// `max` of the terms with `eps < s`; zero when no sweep point is below `s`.
pub fn phi_from_terms(terms: &[PhiTerm], s: f64) -> f64 {
    terms
        .iter()
        .filter(|t| t.eps < s)
        .fold(0.0f64, |m, t| m.max(t.term))
}

/// `Phi(f, s)` over the sweep; `s` must lie in `(0, s_max]`.
pub fn phi(
    f: &GridFunction,
    space: &SpaceParams,
    s: f64,
    sweep: &SweepGrids,
) -> Result<f64, NormError> {
    if !(s > 0.0 && s <= sweep.s_max) {
        return Err(NormError::BadS { s, s_max: sweep.s_max });
    }
    Ok(phi_from_terms(&phi_terms(f, space, sweep), s))
}

/// The norm of the space: `Phi(f, s_max)`.
pub fn grand_grand_norm(
    f: &GridFunction,
    space: &SpaceParams,
    sweep: &SweepGrids,
) -> Result<f64, NormError> {
    phi(f, space, sweep.s_max, sweep)
}

/// Exponent gap `(1 - lambda + alpha*p) * (eps - sigma) / ((p - sigma)(p - eps))`,
/// the factored form of `(1 + alpha*eps - lambda)/(p - eps) - (1 + alpha*sigma - lambda)/(p - sigma)`.
/// Needs `0 <= sigma <= eps < s_max`; on that range the value lies in [0, 1].
pub fn delta_exponent(space: &SpaceParams, sigma: f64, eps: f64) -> Result<f64, NormError> {
    if !(0.0 <= sigma && sigma <= eps && eps < space.s_max()) {
        return Err(NormError::BadEpsRange {
            eps,
            sigma,
            s_max: space.s_max(),
        });
    }
    let (p, lambda, alpha) = (space.p, space.lambda, space.alpha);
    Ok((1.0 - lambda + alpha * p) * (eps - sigma) / ((p - sigma) * (p - eps)))
}
