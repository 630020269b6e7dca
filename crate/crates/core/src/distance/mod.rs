//! Distance sets, pair counts and their Fourier decomposition, pinned
//! distances and point-sphere incidences.

mod configs;
mod examples;
mod fibers;
mod threshold;

pub use configs::{
    count_chains, count_cycles4, count_cycles4_spectral, count_pinned_trees, count_rectangles,
    cycles4_rooted_spectral, TreeCount, TreeShape,
};
pub use examples::{sharpness_example_even, sharpness_example_odd, Construction, SharpnessExample};
pub use fibers::{fiber_condition, projection_density, FiberReport, ProjectionDensity};
pub use threshold::{random_subset, threshold_experiment, ThresholdRow};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ring::{DiagonalForm, Modulus, PointSet};
use crate::spectral::{
    difference_histogram, fourier_bound_profile_with, indicator, Transformer,
};
use crate::varieties::{form_values, sphere_points, SpherePath, SphereSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusPath {
    /// Difference histogram of `E1 - E2` pushed through `F`.
    Convolution,
    /// Every pair evaluated directly.
    Loop,
}

/// `N_{r,j} = #{(x, y) in E1 x E2 : F(x - y) = j}` for every `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCensus {
    pub p: u64,
    pub r: u32,
    pub n: usize,
    pub sizes: (usize, usize),
    pub counts: Vec<u128>,
    pub distance_set: Vec<u64>,
    /// `delta^2 = |E1||E2| / q^{2n}`.
    pub density_squared: Ratio<u128>,
    pub density: f64,
}

impl DistanceCensus {
    fn from_counts(m: &Modulus, n: usize, sizes: (usize, usize), counts: Vec<u128>) -> Self {
        let distance_set = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(j, _)| j as u64)
            .collect();
        let space = m.ambient_size(n);
        let prod = sizes.0 as u128 * sizes.1 as u128;
        DistanceCensus {
            p: m.p(),
            r: m.r(),
            n,
            sizes,
            counts,
            distance_set,
            density_squared: Ratio::new(prod, space * space),
            density: (prod as f64).sqrt() / space as f64,
        }
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn count(&self, j: u64) -> u128 {
        self.counts[j as usize]
    }

    /// Fraction of the units `U_r` that occur as distances.
    pub fn unit_coverage(&self) -> f64 {
        let p = self.p as usize;
        let (hit, units) = self
            .counts
            .iter()
            .enumerate()
            .filter(|(j, _)| j % p != 0)
            .fold((0usize, 0usize), |(h, u), (_, &c)| (h + (c > 0) as usize, u + 1));
        hit as f64 / units as f64
    }

    pub fn covers_units(&self) -> bool {
        let p = self.p as usize;
        self.counts
            .iter()
            .enumerate()
            .all(|(j, &c)| j % p == 0 || c > 0)
    }
}

pub fn distance_census(
    form: &DiagonalForm,
    e1: &PointSet,
    e2: &PointSet,
    path: CensusPath,
) -> Result<DistanceCensus> {
    e1.same_space(e2)?;
    let m = e1.modulus();
    let n = e1.arity();
    if form.arity() != n {
        return Err(LabError::ArityMismatch {
            expected: n,
            found: form.arity(),
        });
    }
    form.bind(m)?;
    let q = m.q() as usize;
    let counts = match path {
        CensusPath::Convolution => {
            let hist = difference_histogram(e1, e2)?;
            let values = form_values(form, m)?;
            let mut counts = vec![0u128; q];
            for (d, v) in hist.iter().zip(&values) {
                counts[*v as usize] += *d as u128;
            }
            counts
        }
        CensusPath::Loop => {
            let a = e1.flat_points();
            let b = e2.flat_points();
            a.par_chunks(n)
                .fold(
                    || (vec![0u128; q], vec![0u64; n]),
                    |(mut counts, mut diff), x| {
                        for y in b.chunks(n) {
                            for i in 0..n {
                                diff[i] = m.sub(x[i], y[i]);
                            }
                            counts[form.eval_unchecked(m, &diff) as usize] += 1;
                        }
                        (counts, diff)
                    },
                )
                .map(|(c, _)| c)
                .reduce(
                    || vec![0u128; q],
                    |mut l, r| {
                        l.iter_mut().zip(r).for_each(|(a, b)| *a += b);
                        l
                    },
                )
        }
    };
    Ok(DistanceCensus::from_counts(m, n, (e1.len(), e2.len()), counts))
}

/// Size of `S_{r,j}` together with `sup_{m != 0} |1^_S(m)| q p^{(n-1)/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereConstant {
    pub radius: u64,
    pub sphere_size: usize,
    /// `max(c2, c3)` with `kappa = (n-1)/2`.
    pub constant: f64,
}

pub fn sphere_constant(form: &DiagonalForm, m: &Modulus, j: u64) -> Result<SphereConstant> {
    let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
    spec.require_unit_radius()?;
    let n = form.arity();
    let profile = fourier_bound_profile_with(&spec, (n as f64 - 1.0) / 2.0)?;
    let constant = match (profile.strata.len(), profile.c3) {
        (1, _) => profile.c2,
        (_, Some(c3)) => profile.c2.max(c3),
        (_, None) => {
            return Err(LabError::SearchSpaceTooLarge {
                size: m.ambient_size(n),
                budget: crate::spectral::sphere::SHALLOW_TRANSFORM_CAP,
            })
        }
    };
    Ok(SphereConstant {
        radius: spec.radius,
        sphere_size: sphere_points(&spec, SpherePath::Auto)?.len(),
        constant,
    })
}

/// `N = M + E` with `M = |E1||E2||S_{r,j}| / q^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    pub radius: u64,
    pub count: u128,
    pub main: Ratio<i128>,
    pub error: Ratio<i128>,
    /// `C sqrt(|E1||E2|) q^{n-1} p^{-(n-1)/2}`.
    pub bound: f64,
    pub constant: f64,
    pub holds: bool,
}

impl ErrorDecomposition {
    pub fn error_f64(&self) -> f64 {
        *self.error.numer() as f64 / *self.error.denom() as f64
    }
}

pub fn decompose(census: &DistanceCensus, sphere: &SphereConstant) -> ErrorDecomposition {
    let q = (census.p as u128).pow(census.r);
    let space = q.pow(census.n as u32) as i128;
    let prod = census.sizes.0 as i128 * census.sizes.1 as i128;
    let count = census.count(sphere.radius);
    let main = Ratio::new(prod * sphere.sphere_size as i128, space);
    let error = Ratio::from_integer(count as i128) - main;
    let n = census.n as i32;
    let bound = sphere.constant
        * (prod as f64).sqrt()
        * (q as f64).powi(n - 1)
        * (census.p as f64).powf(-(n as f64 - 1.0) / 2.0);
    let err = (*error.numer() as f64 / *error.denom() as f64).abs();
    ErrorDecomposition {
        radius: sphere.radius,
        count,
        main,
        error,
        bound,
        constant: sphere.constant,
        holds: err <= bound * (1.0 + 1e-9) + 1e-9,
    }
}

pub fn error_decomposition(
    form: &DiagonalForm,
    e1: &PointSet,
    e2: &PointSet,
    j: u64,
) -> Result<ErrorDecomposition> {
    let sphere = sphere_constant(form, e1.modulus(), j)?;
    let census = distance_census(form, e1, e2, CensusPath::Convolution)?;
    Ok(decompose(&census, &sphere))
}

/// `{F(x - y) : y in E}`.
pub fn pinned_distance_set(form: &DiagonalForm, set: &PointSet, pin: &[u64]) -> Result<Vec<u64>> {
    let m = set.modulus();
    if pin.len() != set.arity() || form.arity() != set.arity() {
        return Err(LabError::ArityMismatch {
            expected: set.arity(),
            found: pin.len(),
        });
    }
    let mut seen = vec![false; m.q() as usize];
    let mut diff = vec![0; pin.len()];
    for y in set.points() {
        for i in 0..diff.len() {
            diff[i] = m.sub(pin[i] % m.q(), y[i]);
        }
        seen[form.eval_unchecked(m, &diff) as usize] = true;
    }
    Ok(seen
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(j, _)| j as u64)
        .collect())
}

/// An `F`-sphere `{y : F(center - y) = radius}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FSphere {
    pub center: Vec<u64>,
    pub radius: u64,
}

/// `#{(point, sphere) : F(center - point) = radius}`.
pub fn incidences(form: &DiagonalForm, points: &PointSet, spheres: &[FSphere]) -> Result<u128> {
    let m = points.modulus();
    let n = points.arity();
    for s in spheres {
        if s.center.len() != n {
            return Err(LabError::ArityMismatch {
                expected: n,
                found: s.center.len(),
            });
        }
        if !m.is_unit(s.radius) {
            return Err(LabError::NonUnitRadius {
                j: s.radius % m.q(),
                q: m.q(),
            });
        }
    }
    let flat = points.flat_points();
    Ok(spheres
        .par_iter()
        .map_init(
            || vec![0u64; n],
            |diff, s| {
                flat.chunks(n.max(1))
                    .filter(|y| {
                        for i in 0..n {
                            diff[i] = m.sub(s.center[i] % m.q(), y[i]);
                        }
                        form.eval_unchecked(m, diff) == s.radius % m.q()
                    })
                    .count() as u128
            },
        )
        .sum())
}

/// Constant for the incidence bound: the worst spectral constant over unit
/// radii plus the sphere-size excess `max_j ||S_j| / q^{n-1} - 1| p^{(n-1)/2}`
/// that the main term `|P||S|/q` leaves out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceConstant {
    pub spectral: f64,
    pub size_excess: f64,
    pub total: f64,
}

pub fn incidence_constant(form: &DiagonalForm, m: &Modulus) -> Result<IncidenceConstant> {
    let n = form.arity();
    form.bind(m)?;
    let transformer = Transformer::new(m, n)?;
    let values = form_values(form, m)?;
    let q = m.q();
    let pf = m.p() as f64;
    let scale = q as f64 * pf.powf((n as f64 - 1.0) / 2.0);
    let mut spectral: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for j in m.units() {
        let keys: Vec<u64> = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == j)
            .map(|(i, _)| i as u64)
            .collect();
        let size = keys.len();
        let sphere = PointSet::from_keys(m, n, keys);
        let table = transformer.forward(&indicator(&sphere))?;
        let sup = table.values.iter().skip(1).map(|v| v.norm()).fold(0.0, f64::max);
        spectral = spectral.max(sup * scale);
        let rel = size as f64 / (q as f64).powi(n as i32 - 1) - 1.0;
        excess = excess.max(rel.abs());
    }
    let size_excess = excess * pf.powf((n as f64 - 1.0) / 2.0);
    Ok(IncidenceConstant {
        spectral,
        size_excess,
        total: spectral + size_excess,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub incidences: u128,
    pub points: usize,
    pub spheres: usize,
    /// `|P||S|/q`.
    pub main_term: f64,
    /// `q^{n-1/2} p^{-(n-1)/2} (|P||S|)^{1/2}`.
    pub error_scale: f64,
    pub constant: f64,
    pub bound: f64,
    pub holds: bool,
    /// `(I - |P||S|/q) / error_scale`, the constant actually needed.
    pub empirical_ratio: f64,
}

pub fn incidence_report(
    form: &DiagonalForm,
    points: &PointSet,
    spheres: &[FSphere],
    constant: f64,
) -> Result<IncidenceReport> {
    let count = incidences(form, points, spheres)?;
    let m = points.modulus();
    let n = points.arity() as f64;
    let q = m.q() as f64;
    let prod = points.len() as f64 * spheres.len() as f64;
    let main_term = prod / q;
    let error_scale = q.powf(n - 0.5) * (m.p() as f64).powf(-(n - 1.0) / 2.0) * prod.sqrt();
    let bound = main_term + constant * error_scale;
    let empirical_ratio = if error_scale > 0.0 {
        (count as f64 - main_term) / error_scale
    } else {
        0.0
    };
    Ok(IncidenceReport {
        incidences: count,
        points: points.len(),
        spheres: spheres.len(),
        main_term,
        error_scale,
        constant,
        bound,
        holds: count as f64 <= bound * (1.0 + 1e-12) + 1e-9,
        empirical_ratio,
    })
}

/// Pins `x in E1` with `|{F(x - y) : y in E2} cap U_r| >= q / 32`.
pub fn rich_pins(form: &DiagonalForm, e1: &PointSet, e2: &PointSet) -> Result<Vec<Vec<u64>>> {
    e1.same_space(e2)?;
    let m = e1.modulus();
    let threshold = m.q() as f64 / 32.0;
    let pins: Vec<Vec<u64>> = e1.points().collect();
    let rich = pins
        .into_par_iter()
        .map(|x| {
            let set = pinned_distance_set(form, e2, &x)?;
            let units = set.iter().filter(|&&j| m.is_unit(j)).count();
            Ok((units as f64 >= threshold).then_some(x))
        })
        .collect::<Result<Vec<Option<Vec<u64>>>>>()?;
    Ok(rich.into_iter().flatten().collect())
}
