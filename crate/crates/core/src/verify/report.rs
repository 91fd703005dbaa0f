//! Structured results of a verification suite.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Grid a case was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMeta {
    pub cells: u64,
    /// Refinement level index, 0 for the base resolution.
    pub levels: u32,
}

/// One checked inequality: `pass` iff `lhs <= rhs` up to the suite's
/// tolerance on the ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub grid: GridMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibrated {
    pub c0: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max_ratio: f64,
    pub n_fail: u32,
    /// Constant scales in effect for the rhs values, calibrated or not.
    pub calibrated: Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub params: BTreeMap<String, f64>,
    pub cases: Vec<Case>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.n_fail == 0
    }
}

pub(crate) fn make_case(
    id: String,
    params: BTreeMap<String, f64>,
    lhs: f64,
    rhs: f64,
    tol: f64,
    cells: u64,
    level: u32,
) -> Case {
    // A zero lhs passes against any rhs; avoid 0/0 in the report.
    let ratio = if lhs == 0.0 { 0.0 } else { (lhs / rhs).min(f64::MAX) };
    Case {
        id,
        params,
        lhs,
        rhs,
        ratio,
        pass: lhs <= rhs * (1.0 + tol),
        grid: GridMeta { cells, levels: level },
    }
}

pub(crate) fn summarize(cases: &[Case], calibrated: Calibrated) -> Summary {
    Summary {
        max_ratio: cases.iter().fold(0.0f64, |m, c| m.max(c.ratio)),
        n_fail: cases.iter().filter(|c| !c.pass).count() as u32,
        calibrated,
    }
}

pub(crate) fn param_map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}
