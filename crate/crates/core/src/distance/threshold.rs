//! Seeded random-set sweeps over the density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{distance_census, CensusPath};
use crate::error::Result;
use crate::limits::{check_work, search_budget};
use crate::ring::{DiagonalForm, Modulus, PointSet};

/// Every point of `(Z/qZ)^n` kept independently with probability `density`.
pub fn random_subset<R: Rng>(m: &Modulus, n: usize, density: f64, rng: &mut R) -> PointSet {
    let total = m.ambient_size(n) as u64;
    let keys = (0..total).filter(|_| rng.gen_bool(density.clamp(0.0, 1.0))).collect();
    PointSet::from_keys(m, n, keys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub density: f64,
    pub trials: usize,
    pub mean_size: f64,
    /// Mean of `|Delta(E, E)| / q`.
    pub mean_distance_fraction: f64,
    /// Smallest fraction of `U_r` covered by `Delta(E, E)` over the trials.
    pub min_unit_coverage: f64,
    /// Trials in which every unit occurred as a distance.
    pub full_coverage_trials: usize,
}

/// Trial `t` at density `d` draws from ChaCha8 seeded with `seed ^ bits(d)`
/// on stream `t`, so each row is reproducible regardless of the grid.
pub fn threshold_experiment(
    form: &DiagonalForm,
    m: &Modulus,
    n: usize,
    densities: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ThresholdRow>> {
    let space = m.ambient_size(n);
    check_work(space, search_budget())?;
    check_work(space * (densities.len() * trials) as u128, 64 * search_budget())?;
    let mut rows = Vec::with_capacity(densities.len());
    for &density in densities {
        let mut sizes = 0.0;
        let mut fractions = 0.0;
        let mut min_cov: f64 = 1.0;
        let mut full = 0;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ density.to_bits());
            rng.set_stream(t as u64);
            let set = random_subset(m, n, density, &mut rng);
            let census = distance_census(form, &set, &set, CensusPath::Convolution)?;
            let cov = census.unit_coverage();
            sizes += set.len() as f64;
            fractions += census.distance_set.len() as f64 / m.q() as f64;
            min_cov = min_cov.min(cov);
            full += census.covers_units() as usize;
        }
        let k = trials.max(1) as f64;
        rows.push(ThresholdRow {
            density,
            trials,
            mean_size: sizes / k,
            mean_distance_fraction: fractions / k,
            min_unit_coverage: if trials == 0 { 0.0 } else { min_cov },
            full_coverage_trials: full,
        });
    }
    rows.sort_by(|a, b| a.density.total_cmp(&b.density));
    Ok(rows)
}
