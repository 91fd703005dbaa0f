//! Discrete maximal and truncated singular integral operators.
//!
//! The maximal operator at a cell center is the exact supremum over all
//! discrete balls of the average of `|f|` over the cells they capture,
//! normalized by the captured measure (balls are clipped to the domain).
//! Because the average only changes when a new center enters the ball, the
//! supremum is a maximum over at most `n` nested windows per point; in one
//! dimension a two-pointer sweep over the globally sorted centers visits
//! them in order, in two dimensions a distance sort does. Centers at equal
//! distance enter together, so every evaluated window really is a ball.
//!
//! The singular operator is the truncated principal value on uniform grids:
//! cells closer than `delta_factor` nominal widths are excluded, everything
//! else is a plain kernel-weighted midpoint sum. Kernel admissibility (size
//! and smoothness bounds, Dini and doubling conditions on the modulus) is
//! checked empirically on seeded random samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::GridFunction;

#[derive(Debug, Error, PartialEq)]
pub enum OperatorError {
    #[error("truncated singular integrals need a uniform grid")]
    NonUniformGrid,
    #[error("kernel lives in dimension {kernel} but the grid has dimension {grid}")]
    DimensionMismatch { kernel: usize, grid: usize },
    #[error("exclusion delta factor must be positive and finite, got {0}")]
    BadDeltaFactor(f64),
    #[error("modulus exponent gamma = {gamma} is not Dini integrable; it must be positive")]
    NotDini { gamma: f64 },
    #[error("modulus must have a positive coefficient and nonnegative exponent")]
    BadModulus,
}

/// Convolution-type kernels for the truncated singular operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `1 / (x - y)` on intervals.
    Hilbert,
    /// First Riesz component `(x1 - y1) / |x - y|^3` in the plane.
    Riesz1,
    /// Second Riesz component `(x2 - y2) / |x - y|^3` in the plane.
    Riesz2,
}

impl Kernel {
    pub fn dim(self) -> usize {
        match self {
            Kernel::Hilbert => 1,
            Kernel::Riesz1 | Kernel::Riesz2 => 2,
        }
    }

    /// Kernel value; the caller guarantees `x != y`.
    pub fn eval(self, x: [f64; 2], y: [f64; 2]) -> f64 {
        match self {
            Kernel::Hilbert => 1.0 / (x[0] - y[0]),
            Kernel::Riesz1 | Kernel::Riesz2 => {
                let (dx, dy) = (x[0] - y[0], x[1] - y[1]);
                let dist = (dx * dx + dy * dy).sqrt();
                let num = if self == Kernel::Riesz1 { dx } else { dy };
                num / (dist * dist * dist)
            }
        }
    }
}

/// Which operator a sweep applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Maximal,
    Singular(Kernel),
}

/// Cells whose centers are at most this many nominal widths from the
/// evaluation point are excluded from truncated singular sums.
pub const DEFAULT_DELTA_FACTOR: f64 = 0.5;

/// Exact discrete centered maximal function of `|f|`.
pub fn maximal(f: &GridFunction) -> GridFunction {
    match f.grid().dim() {
        1 => maximal_1d(f),
        _ => maximal_2d(f),
    }
}

fn maximal_1d(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let n = grid.n_cells();
    let xs: Vec<f64> = grid.centers().iter().map(|c| c[0]).collect();
    let mu = grid.measures();

    // Prefix sums of |f| mu and mu over the globally ascending centers.
    let mut num = Vec::with_capacity(n + 1);
    let mut den = Vec::with_capacity(n + 1);
    num.push(0.0);
    den.push(0.0);
    for i in 0..n {
        num.push(num[i] + f.values()[i].abs() * mu[i]);
        den.push(den[i] + mu[i]);
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let xi = xs[i];
        let (mut a, mut b) = (i, i + 1);
        let mut best = f.values()[i].abs();
        while a > 0 || b < n {
            let dl = if a > 0 { xi - xs[a - 1] } else { f64::INFINITY };
            let dr = if b < n { xs[b] - xi } else { f64::INFINITY };
            // Equidistant neighbors enter the ball at the same radius.
            if dl <= dr {
                a -= 1;
            }
            if dr <= dl {
                b += 1;
            }
            let v = (num[b] - num[a]) / (den[b] - den[a]);
            if v > best {
                best = v;
            }
        }
        out.push(best);
    }
    GridFunction::from_values(grid, out)
}

fn maximal_2d(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let n = grid.n_cells();
    let centers = grid.centers();
    let mu = grid.measures();
    let mut order: Vec<(f64, u32)> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let [cx, cy] = centers[i];
        order.clear();
        for (k, &[x, y]) in centers.iter().enumerate() {
            let (dx, dy) = (x - cx, y - cy);
            order.push((dx * dx + dy * dy, k as u32));
        }
        order.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut best = 0.0f64;
        let (mut num, mut den) = (0.0, 0.0);
        let mut k = 0;
        while k < n {
            // Absorb the whole group at one distance before evaluating.
            let d = order[k].0;
            while k < n && order[k].0 == d {
                let idx = order[k].1 as usize;
                num += f.values()[idx].abs() * mu[idx];
                den += mu[idx];
                k += 1;
            }
            let v = num / den;
            if v > best {
                best = v;
            }
        }
        out.push(best);
    }
    GridFunction::from_values(grid, out)
}

/// Truncated principal value `sum of K(x_i, y_j) f(y_j) mu_j` over cells
/// with `|x_i - y_j|` above `delta_factor` nominal widths. Uniform grids
/// only: the symmetric exclusion window is what makes the odd kernels
/// cancel the way the principal value does.
pub fn singular(
    f: &GridFunction,
    kernel: Kernel,
    delta_factor: f64,
) -> Result<GridFunction, OperatorError> {
    let grid = f.grid();
    if !grid.is_uniform() {
        return Err(OperatorError::NonUniformGrid);
    }
    if kernel.dim() != grid.dim() {
        return Err(OperatorError::DimensionMismatch { kernel: kernel.dim(), grid: grid.dim() });
    }
    if !(delta_factor > 0.0) || !delta_factor.is_finite() {
        return Err(OperatorError::BadDeltaFactor(delta_factor));
    }
    let delta = delta_factor * grid.nominal_h();
    let delta_sq = delta * delta;
    let centers = grid.centers();
    let mu = grid.measures();
    let values = f.values();
    let n = grid.n_cells();

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let [cx, cy] = centers[i];
        let mut acc = 0.0;
        for j in 0..n {
            let [x, y] = centers[j];
            let (dx, dy) = (x - cx, y - cy);
            if dx * dx + dy * dy > delta_sq {
                acc += kernel.eval(centers[i], centers[j]) * values[j] * mu[j];
            }
        }
        out.push(acc);
    }
    Ok(GridFunction::from_values(grid, out))
}

/// Modulus of continuity `w(t) = coeff * t^gamma` used in the kernel
/// smoothness bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusW {
    coeff: f64,
    gamma: f64,
}

impl ModulusW {
    pub fn new(coeff: f64, gamma: f64) -> Result<Self, OperatorError> {
        if !(coeff > 0.0) || !coeff.is_finite() || !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(OperatorError::BadModulus);
        }
        Ok(ModulusW { coeff, gamma })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeff * t.powf(self.gamma)
    }

    /// The modulus a kernel's gradient bound yields: `2t` for the Hilbert
    /// kernel, `16t` for the Riesz components.
    pub fn for_kernel(kernel: Kernel) -> ModulusW {
        match kernel {
            Kernel::Hilbert => ModulusW { coeff: 2.0, gamma: 1.0 },
            Kernel::Riesz1 | Kernel::Riesz2 => ModulusW { coeff: 16.0, gamma: 1.0 },
        }
    }
}

/// `integral over (0,1) of w(t)/t dt`; finite exactly when `gamma > 0`.
pub fn dini_integral(w: &ModulusW) -> Result<f64, OperatorError> {
    if w.gamma > 0.0 {
        Ok(w.coeff / w.gamma)
    } else {
        Err(OperatorError::NotDini { gamma: w.gamma })
    }
}

/// Empirical supremum of `w(2t)/w(t)` over sampled `t` in `(0, 1/2]`; for
/// the power moduli this is exactly `2^gamma`.
pub fn doubling_check(w: &ModulusW, samples: u32, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup = 0.0f64;
    for _ in 0..samples {
        let t: f64 = rng.random_range(f64::MIN_POSITIVE..=0.5);
        sup = sup.max(w.eval(2.0 * t) / w.eval(t));
    }
    sup
}

/// Empirical size and smoothness constants of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheck {
    /// `sup |K(x,y)| * |x-y|^n` over sampled pairs.
    pub size_sup: f64,
    /// `sup |K(x,y) - K(x',y)| * |x-y|^n / w(|x-x'| / |x-y|)` over sampled
    /// triples with `|x-y| > 2 |x-x'|`.
    pub smoothness_sup: f64,
    /// Triples that passed the separation filter.
    pub samples_used: u32,
}

/// Sample triples `(x, x', y)` in the unit box and record the worst-case
/// ratios against the size bound `1/|x-y|^n` and the smoothness bound
/// `w(|x-x'|/|x-y|)/|x-y|^n`.
pub fn kernel_conditions(kernel: Kernel, w: &ModulusW, samples: u32, seed: u64) -> KernelCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = kernel.dim();
    let point = |rng: &mut ChaCha8Rng| -> [f64; 2] {
        let a = rng.random_range(0.0..1.0);
        let b = if dim == 2 { rng.random_range(0.0..1.0) } else { 0.0 };
        [a, b]
    };
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();

    let mut size_sup = 0.0f64;
    let mut smoothness_sup = 0.0f64;
    let mut used = 0;
    while used < samples {
        let (x, xp, y) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let r = dist(x, y);
        let step = dist(x, xp);
        if r == 0.0 || step == 0.0 || r <= 2.0 * step {
            continue;
        }
        used += 1;
        let rn = r.powi(dim as i32);
        size_sup = size_sup.max(kernel.eval(x, y).abs() * rn);
        let diff = (kernel.eval(x, y) - kernel.eval(xp, y)).abs();
        smoothness_sup = smoothness_sup.max(diff * rn / w.eval(step / r));
    }
    KernelCheck { size_sup, smoothness_sup, samples_used: used }
}
