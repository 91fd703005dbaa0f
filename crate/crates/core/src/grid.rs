//! Bounded open domains in one or two dimensions and midpoint-rule meshes on
//! them.
//!
//! A [`Domain`] is a box or a finite union of pairwise disjoint open boxes; a
//! [`Grid`] partitions each box into axis-aligned cells and carries one
//! quadrature node per cell (the cell center) together with the cell measure.
//! All integrals in this crate are plain midpoint sums over those nodes, and
//! membership of a cell in a [`Ball`] is decided by its center alone. Meshes
//! are uniform per axis unless a [`Grading`] asks for geometric refinement
//! toward a point, which is how integrands with a power singularity keep
//! their quadrature error under control.

use std::sync::Arc;

use thiserror::Error;

/// Volume of the unit ball: 2 in one dimension, pi in two.
const UNIT_BALL: [f64; 2] = [2.0, std::f64::consts::PI];

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("interval bounds must satisfy lo < hi, got [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("dimension must be 1 or 2, got {0}")]
    DimOutOfRange(usize),
    #[error("a domain needs at least one box")]
    NoBoxes,
    #[error("domain boxes must be pairwise disjoint")]
    OverlappingBoxes,
    #[error("resolution must be at least 2 per axis, got {got} on axis {axis}")]
    ResolutionTooSmall { axis: usize, got: u32 },
    #[error("expected {expected} per-axis resolutions, got {got}")]
    MismatchedResolutions { expected: usize, got: usize },
    #[error("grading point ({x}, {y}) lies outside the closure of the domain")]
    GradingOutsideDomain { x: f64, y: f64 },
    #[error("grading ratio must lie strictly between 0 and 1, got {0}")]
    BadGradingRatio(f64),
    #[error("grading with {levels} levels at ratio {ratio} exceeds floating-point range")]
    GradingTooDeep { levels: u32, ratio: f64 },
    #[error("ball radius must satisfy 0 < r <= diameter, got {0}")]
    BadRadius(f64),
    #[error("ball center must lie inside the domain")]
    CenterOutsideDomain,
    #[error("point has wrong dimension: expected {expected}, got {got}")]
    WrongPointDim { expected: usize, got: usize },
}

/// One axis-aligned open box. Unused coordinates are pinned to (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BoxBounds {
    fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    fn volume(&self, dim: usize) -> f64 {
        (0..dim).map(|a| self.extent(a)).product()
    }

    fn contains(&self, dim: usize, p: [f64; 2]) -> bool {
        (0..dim).all(|a| self.lo[a] < p[a] && p[a] < self.hi[a])
    }

    fn closure_contains(&self, dim: usize, p: [f64; 2]) -> bool {
        (0..dim).all(|a| self.lo[a] <= p[a] && p[a] <= self.hi[a])
    }

    fn overlaps(&self, dim: usize, other: &BoxBounds) -> bool {
        (0..dim).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }

    /// Largest distance between a point of this box and a point of `other`.
    fn max_corner_distance(&self, dim: usize, other: &BoxBounds) -> f64 {
        let mut sq = 0.0;
        for a in 0..dim {
            let d = (self.hi[a] - other.lo[a]).abs().max((other.hi[a] - self.lo[a]).abs());
            sq += d * d;
        }
        sq.sqrt()
    }
}

/// A bounded open set: one box or a finite union of disjoint boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dim: usize,
    boxes: Vec<BoxBounds>,
    diameter: f64,
    measure: f64,
}

impl Domain {
    /// Open interval (a, b).
    pub fn interval(a: f64, b: f64) -> Result<Self, GridError> {
        Self::from_boxes(1, vec![BoxBounds { lo: [a, 0.0], hi: [b, 1.0] }])
    }

    /// Open rectangle (x0, x1) x (y0, y1).
    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Result<Self, GridError> {
        Self::from_boxes(2, vec![BoxBounds { lo: [x.0, y.0], hi: [x.1, y.1] }])
    }

    /// Union of pairwise disjoint boxes. One-dimensional boxes are sorted by
    /// their lower bound so that cell centers come out globally ordered.
    pub fn from_boxes(dim: usize, mut boxes: Vec<BoxBounds>) -> Result<Self, GridError> {
        if dim == 0 || dim > 2 {
            return Err(GridError::DimOutOfRange(dim));
        }
        if boxes.is_empty() {
            return Err(GridError::NoBoxes);
        }
        for b in &boxes {
            for a in 0..dim {
                if !(b.lo[a] < b.hi[a]) || !b.lo[a].is_finite() || !b.hi[a].is_finite() {
                    return Err(GridError::BadInterval { lo: b.lo[a], hi: b.hi[a] });
                }
            }
        }
        boxes.sort_by(|p, q| p.lo[0].total_cmp(&q.lo[0]));
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].overlaps(dim, &boxes[j]) {
                    return Err(GridError::OverlappingBoxes);
                }
            }
        }
        let measure = boxes.iter().map(|b| b.volume(dim)).sum();
        let mut diameter: f64 = 0.0;
        for i in 0..boxes.len() {
            for j in i..boxes.len() {
                diameter = diameter.max(boxes[i].max_corner_distance(dim, &boxes[j]));
            }
        }
        Ok(Domain { dim, boxes, diameter, measure })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[BoxBounds] {
        &self.boxes
    }

    /// Exact diameter, attained at box corners.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Lebesgue measure of the union.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.boxes.iter().any(|b| b.contains(self.dim, p))
    }

    pub fn closure_contains(&self, p: [f64; 2]) -> bool {
        self.boxes.iter().any(|b| b.closure_contains(self.dim, p))
    }
}

/// Geometric refinement toward one point: the cell width shrinks by the
/// factor 1/ratio per level as the mesh approaches the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub point: [f64; 2],
    pub ratio: f64,
    pub levels: u32,
}

impl Grading {
    pub fn new(point: [f64; 2], ratio: f64, levels: u32) -> Self {
        Grading { point, ratio, levels }
    }

    /// Defaults: halve the nearest cell per level, twelve levels.
    pub fn at(point: [f64; 2]) -> Self {
        Grading { point, ratio: 0.5, levels: 12 }
    }
}

/// One-dimensional partition of a box edge: cell centers and widths.
#[derive(Debug, Clone)]
struct Axis {
    centers: Vec<f64>,
    widths: Vec<f64>,
}

/// Cell widths for a segment of length `len`, ordered from the graded end
/// outward. With few cells the whole segment is one geometric progression
/// (widths strictly increasing away from the point); otherwise only the
/// nominal cell nearest the point is subdivided geometrically and the rest
/// stay uniform.
fn graded_widths(len: f64, n: u32, ratio: f64, levels: u32) -> Result<Vec<f64>, GridError> {
    let g = 1.0 / ratio;
    let geometric = |length: f64, k: u32| -> Result<Vec<f64>, GridError> {
        let top = g.powi(k as i32) - 1.0;
        if !top.is_finite() {
            return Err(GridError::GradingTooDeep { levels, ratio });
        }
        let w0 = length * (g - 1.0) / top;
        Ok((0..k).map(|j| w0 * g.powi(j as i32)).collect())
    };
    if n <= levels + 1 {
        geometric(len, n)
    } else {
        let h = len / n as f64;
        let mut ws = geometric(h, levels + 1)?;
        ws.extend(std::iter::repeat(h).take(n as usize - 1));
        Ok(ws)
    }
}

/// Widths for a segment graded toward neither, one, or both endpoints.
fn segment_widths(
    len: f64,
    n: u32,
    grade_left: bool,
    grade_right: bool,
    ratio: f64,
    levels: u32,
) -> Result<Vec<f64>, GridError> {
    match (grade_left, grade_right) {
        (false, false) => Ok(vec![len / n as f64; n as usize]),
        (true, false) => graded_widths(len, n, ratio, levels),
        (false, true) => {
            let mut ws = graded_widths(len, n, ratio, levels)?;
            ws.reverse();
            Ok(ws)
        }
        (true, true) => {
            let n = n.max(2);
            let half = len / 2.0;
            let mut ws = graded_widths(half, n / 2 + n % 2, ratio, levels)?;
            let mut right = graded_widths(half, n / 2, ratio, levels)?;
            right.reverse();
            ws.extend(right);
            Ok(ws)
        }
    }
}

/// Partition (a, b) into roughly `res` cells, geometrically refined toward
/// each grading coordinate. Coordinates split the interval into segments;
/// cells are allotted to segments in proportion to length.
fn build_axis(a: f64, b: f64, res: u32, grades: &[(f64, f64, u32)]) -> Result<Axis, GridError> {
    let mut coords: Vec<f64> = grades.iter().map(|g| g.0).collect();
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    let grade_at = |x: f64| grades.iter().find(|g| g.0 == x).map(|g| (g.1, g.2));

    let mut cuts = vec![a];
    cuts.extend(coords.iter().copied().filter(|&c| a < c && c < b));
    cuts.push(b);

    // Largest-remainder allotment of `res` cells over the segments.
    let total = b - a;
    let nseg = cuts.len() - 1;
    let mut alloc: Vec<u32> = vec![0; nseg];
    let mut frac: Vec<(f64, usize)> = Vec::with_capacity(nseg);
    let mut assigned = 0;
    for i in 0..nseg {
        let ideal = res as f64 * (cuts[i + 1] - cuts[i]) / total;
        let fl = (ideal.floor() as u32).max(1);
        alloc[i] = fl;
        assigned += fl;
        frac.push((ideal - ideal.floor(), i));
    }
    frac.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
    let mut k = 0;
    while assigned < res {
        alloc[frac[k % nseg].1] += 1;
        assigned += 1;
        k += 1;
    }

    let mut widths: Vec<f64> = Vec::new();
    for i in 0..nseg {
        let (s0, s1) = (cuts[i], cuts[i + 1]);
        let gl = grade_at(s0);
        let gr = grade_at(s1);
        // Ratio and level counts come from whichever endpoint grades this side.
        let (ratio, levels) = gl.or(gr).unwrap_or((0.5, 12));
        widths.extend(segment_widths(s1 - s0, alloc[i], gl.is_some(), gr.is_some(), ratio, levels)?);
    }

    let mut bps = Vec::with_capacity(widths.len() + 1);
    bps.push(a);
    let mut x = a;
    for w in &widths {
        x += w;
        bps.push(x);
    }
    *bps.last_mut().unwrap() = b;

    let centers = bps.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let widths = bps.windows(2).map(|p| p[1] - p[0]).collect();
    Ok(Axis { centers, widths })
}

/// Tensor mesh of one box, with its offset into the global cell numbering.
#[derive(Debug, Clone)]
struct BoxMesh {
    axes: Vec<Axis>,
    offset: usize,
}

impl BoxMesh {
    fn n_cells(&self) -> usize {
        self.axes.iter().map(|a| a.centers.len()).product()
    }
}

/// Midpoint mesh over a domain: cell centers, cell measures, and prefix sums
/// of the measures in global cell order. In one dimension the global order
/// is ascending by center, so any open interval of centers is one contiguous
/// index range.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    boxes: Vec<BoxMesh>,
    centers: Vec<[f64; 2]>,
    measures: Vec<f64>,
    prefix: Vec<f64>,
    nominal_h: f64,
    uniform: bool,
}

/// Build a mesh with `res` cells per axis on every box of the domain,
/// geometrically refined toward each grading point.
pub fn make_grid(domain: &Domain, res: &[u32], grading: &[Grading]) -> Result<Grid, GridError> {
    let dim = domain.dim();
    if res.len() != dim {
        return Err(GridError::MismatchedResolutions { expected: dim, got: res.len() });
    }
    for (axis, &r) in res.iter().enumerate() {
        if r < 2 {
            return Err(GridError::ResolutionTooSmall { axis, got: r });
        }
    }
    for g in grading {
        if !(g.ratio > 0.0 && g.ratio < 1.0) {
            return Err(GridError::BadGradingRatio(g.ratio));
        }
        if g.levels == 0 {
            return Err(GridError::BadGradingRatio(g.ratio));
        }
        if !domain.closure_contains(g.point) {
            return Err(GridError::GradingOutsideDomain { x: g.point[0], y: g.point[1] });
        }
    }

    let mut boxes = Vec::with_capacity(domain.boxes().len());
    let mut offset = 0;
    let mut nominal_h: f64 = 0.0;
    for bb in domain.boxes() {
        let mut axes = Vec::with_capacity(dim);
        for a in 0..dim {
            let grades: Vec<(f64, f64, u32)> = grading
                .iter()
                .filter(|g| bb.closure_contains(dim, g.point))
                .map(|g| (g.point[a], g.ratio, g.levels))
                .collect();
            axes.push(build_axis(bb.lo[a], bb.hi[a], res[a], &grades)?);
            nominal_h = nominal_h.max(bb.extent(a) / res[a] as f64);
        }
        let mesh = BoxMesh { axes, offset };
        offset += mesh.n_cells();
        boxes.push(mesh);
    }

    let mut centers = Vec::with_capacity(offset);
    let mut measures = Vec::with_capacity(offset);
    for mesh in &boxes {
        match dim {
            1 => {
                let ax = &mesh.axes[0];
                for i in 0..ax.centers.len() {
                    centers.push([ax.centers[i], 0.0]);
                    measures.push(ax.widths[i]);
                }
            }
            _ => {
                let (ax, ay) = (&mesh.axes[0], &mesh.axes[1]);
                for j in 0..ay.centers.len() {
                    for i in 0..ax.centers.len() {
                        centers.push([ax.centers[i], ay.centers[j]]);
                        measures.push(ax.widths[i] * ay.widths[j]);
                    }
                }
            }
        }
    }

    let mut prefix = Vec::with_capacity(measures.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for m in &measures {
        acc += m;
        prefix.push(acc);
    }

    // Uniformity is structural: no grading, and the same nominal width on
    // every axis of every box. Realized widths may drift by accumulated
    // rounding, which does not count.
    let uniform = grading.is_empty() && {
        let mut hs = domain
            .boxes()
            .iter()
            .flat_map(|bb| (0..dim).map(move |a| bb.extent(a) / res[a] as f64));
        let h0 = hs.next().unwrap();
        hs.all(|h| (h - h0).abs() <= 1e-12 * h0)
    };

    Ok(Grid { domain: domain.clone(), boxes, centers, measures, prefix, nominal_h, uniform })
}

impl Grid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn n_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// Sum of all cell measures, as accumulated by the prefix table.
    pub fn total_measure(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Width of the unrefined cell; graded bands subdivide below this.
    pub fn nominal_h(&self) -> f64 {
        self.nominal_h
    }

    /// True when every cell width agrees to within 1e-12 relative.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Visit every maximal contiguous global index range of cells whose
    /// centers lie strictly inside the ball.
    pub fn for_ball_ranges(&self, center: [f64; 2], radius: f64, mut f: impl FnMut(usize, usize)) {
        match self.dim() {
            1 => {
                // Centers are globally ascending in one dimension.
                let lo = self.centers.partition_point(|c| c[0] <= center[0] - radius);
                let hi = self.centers.partition_point(|c| c[0] < center[0] + radius);
                if lo < hi {
                    f(lo, hi);
                }
            }
            _ => {
                let rsq = radius * radius;
                for mesh in &self.boxes {
                    let (ax, ay) = (&mesh.axes[0], &mesh.axes[1]);
                    let nx = ax.centers.len();
                    let jlo = ay.centers.partition_point(|&y| y <= center[1] - radius);
                    let jhi = ay.centers.partition_point(|&y| y < center[1] + radius);
                    for j in jlo..jhi {
                        let dy = ay.centers[j] - center[1];
                        let half = (rsq - dy * dy).max(0.0).sqrt();
                        let ilo = ax.centers.partition_point(|&x| x <= center[0] - half);
                        let ihi = ax.centers.partition_point(|&x| x < center[0] + half);
                        if ilo < ihi {
                            f(mesh.offset + j * nx + ilo, mesh.offset + j * nx + ihi);
                        }
                    }
                }
            }
        }
    }

    /// Per-box layout as (global offset, cells per axis); the second axis
    /// count is 1 in one dimension. Cells are row-major within a box.
    pub(crate) fn box_shapes(&self) -> Vec<(usize, [usize; 2])> {
        self.boxes
            .iter()
            .map(|m| {
                let nx = m.axes[0].centers.len();
                let ny = m.axes.get(1).map_or(1, |a| a.centers.len());
                (m.offset, [nx, ny])
            })
            .collect()
    }

    /// Measure of the cells whose centers lie in the ball, via prefix sums.
    pub fn measure_in_ball(&self, center: [f64; 2], radius: f64) -> f64 {
        let mut m = 0.0;
        self.for_ball_ranges(center, radius, |lo, hi| {
            m += self.prefix[hi] - self.prefix[lo];
        });
        m
    }
}

/// Open ball with center inside the domain and radius at most its diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn new(domain: &Domain, center: [f64; 2], radius: f64) -> Result<Self, GridError> {
        if !(radius > 0.0 && radius <= domain.diameter()) {
            return Err(GridError::BadRadius(radius));
        }
        if !domain.contains(center) {
            return Err(GridError::CenterOutsideDomain);
        }
        Ok(Ball { center, radius })
    }
}

/// Full Lebesgue measure of a ball of radius `r` in dimension `dim`.
pub fn ball_measure(dim: usize, r: f64) -> f64 {
    UNIT_BALL[dim - 1] * r.powi(dim as i32)
}

/// Sum of the measures of the grid cells whose centers fall in the ball.
/// Converges to the measure of the intersection of the ball with the domain
/// as the mesh refines.
pub fn intersected_measure(grid: &Grid, ball: &Ball) -> f64 {
    grid.measure_in_ball(ball.center, ball.radius)
}

/// Integration region: the whole domain or a single ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Whole,
    Ball(Ball),
}

/// Values attached to the cells of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Sample a closure at every cell center. Panics on non-finite values;
    /// use the expression sampler for fallible evaluation.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values: Vec<f64> = grid.centers().iter().map(|&c| f(c)).collect();
        assert!(
            values.iter().all(|v| v.is_finite()),
            "grid function values must be finite"
        );
        GridFunction { grid: Arc::clone(grid), values }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_cells());
        assert!(values.iter().all(|v| v.is_finite()), "grid function values must be finite");
        GridFunction { grid: Arc::clone(grid), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "grid functions live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridFunction { grid: Arc::clone(&self.grid), values }
    }
}

/// Midpoint sum of `f` over the cells whose centers lie in the region.
pub fn integrate(f: &GridFunction, region: &Region) -> f64 {
    let grid = f.grid();
    match region {
        Region::Whole => f
            .values()
            .iter()
            .zip(grid.measures())
            .map(|(v, m)| v * m)
            .sum(),
        Region::Ball(b) => {
            let mut acc = 0.0;
            grid.for_ball_ranges(b.center, b.radius, |lo, hi| {
                for i in lo..hi {
                    acc += f.values()[i] * grid.measures()[i];
                }
            });
            acc
        }
    }
}
