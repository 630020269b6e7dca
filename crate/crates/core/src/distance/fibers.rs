//! Mod-`p` fibre statistics of planar sets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ring::PointSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    /// `#{(x1, x2) in E^2 : x1 = x2 mod p}`.
    pub pair_count: u128,
    /// `p^{2r - 7/3} |E|`.
    pub threshold: f64,
    pub satisfied: bool,
    /// Largest `#{x' in E : x' = x mod p}`.
    pub max_fiber: u64,
    /// `p^{2r - 7/3}`.
    pub fiber_threshold: f64,
    pub fiber_satisfied: bool,
}

fn require_plane(set: &PointSet) -> Result<()> {
    if set.arity() != 2 {
        return Err(LabError::WrongArity {
            expected: 2,
            found: set.arity(),
        });
    }
    Ok(())
}

/// Class sizes of `E` modulo `p^level`, keyed by the encoded residue.
fn class_sizes(set: &PointSet, level: u32) -> HashMap<u64, u64> {
    let modulus = set.modulus().pow_p(level);
    let mut out = HashMap::new();
    for pt in set.points() {
        *out.entry((pt[0] % modulus) + modulus * (pt[1] % modulus)).or_insert(0) += 1;
    }
    out
}

pub fn fiber_condition(set: &PointSet) -> Result<FiberReport> {
    require_plane(set)?;
    let m = set.modulus();
    let classes = class_sizes(set, 1);
    let pair_count = classes.values().map(|&c| c as u128 * c as u128).sum();
    let max_fiber = classes.values().copied().max().unwrap_or(0);
    let fiber_threshold = (m.p() as f64).powf(2.0 * m.r() as f64 - 7.0 / 3.0);
    let threshold = fiber_threshold * set.len() as f64;
    Ok(FiberReport {
        pair_count,
        threshold,
        satisfied: pair_count as f64 <= threshold,
        max_fiber,
        fiber_threshold,
        fiber_satisfied: max_fiber as f64 <= fiber_threshold,
    })
}

/// `g(y) = p^{-2(r - gamma)} #{x in E : x = y mod p^gamma}` over `(Z/p^gamma)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDensity {
    pub gamma: u32,
    /// `p^gamma`.
    pub modulus: u64,
    /// Indexed by `y1 + p^gamma y2`.
    pub counts: Vec<u64>,
    pub values: Vec<f64>,
}

impl ProjectionDensity {
    pub fn get(&self, y: [u64; 2]) -> f64 {
        self.values[(y[0] % self.modulus + self.modulus * (y[1] % self.modulus)) as usize]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn projection_density(set: &PointSet, gamma: u32) -> Result<ProjectionDensity> {
    require_plane(set)?;
    let m = set.modulus();
    if gamma == 0 || gamma > m.r() {
        return Err(LabError::BadLevel {
            level: gamma,
            r: m.r(),
        });
    }
    let modulus = m.pow_p(gamma);
    let mut counts = vec![0u64; (modulus * modulus) as usize];
    for (k, c) in class_sizes(set, gamma) {
        counts[k as usize] = c;
    }
    let scale = (m.p() as f64).powi(2 * (m.r() - gamma) as i32);
    let values = counts.iter().map(|&c| c as f64 / scale).collect();
    Ok(ProjectionDensity {
        gamma,
        modulus,
        counts,
        values,
    })
}
