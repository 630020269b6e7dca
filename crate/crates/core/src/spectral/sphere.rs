//! Fourier coefficients of sphere indicators and the stratified bound profile.
//!
//! For `m' = p^nu m~` with `m~` primitive and `gamma = r - nu >= 1`, a smooth
//! unit-radius sphere satisfies
//! `1^_{S_r}(m') = p^{-rn + nu(n-1)} sum_{y in S_gamma} e_{p^gamma}(-m~.y)`,
//! so only a character sum modulo `p^gamma` is needed.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::Twiddles;
use super::transform::{indicator, Transformer};
use crate::error::{LabError, Result};
use crate::ring::vector::{all_vectors, dot, encode, split};
use crate::limits::check_search;
use crate::ring::{DiagonalForm, Modulus, PointSet};
use crate::varieties::{sphere_points, SpherePath, SphereSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FourierPath {
    Direct,
    Reduced,
}

struct Level {
    modulus: Modulus,
    twiddles: Twiddles,
    points: Vec<u64>,
}

impl Level {
    fn build(spec: &SphereSpec, gamma: u32) -> Result<Self> {
        let modulus = spec.modulus.truncate(gamma);
        let sub = SphereSpec {
            form: spec.form.clone(),
            modulus: modulus.clone(),
            radius: spec.radius % modulus.q(),
        };
        let points = sphere_points(&sub, SpherePath::Auto)?.flat_points();
        Ok(Level {
            twiddles: Twiddles::new(&modulus),
            modulus,
            points,
        })
    }

    // sum_{y in S} e(-m.y)
    fn character_sum(&self, n: usize, m: &[u64]) -> Complex64 {
        self.points
            .chunks(n)
            .map(|y| self.twiddles.e_neg(dot(&self.modulus, m, y)))
            .sum()
    }

    fn len(&self, n: usize) -> usize {
        self.points.len() / n
    }
}

/// Sphere Fourier coefficients with the sphere at each level cached.
pub struct SphereFourier {
    spec: SphereSpec,
    levels: Vec<OnceLock<Level>>,
}

impl SphereFourier {
    pub fn new(spec: &SphereSpec) -> Self {
        SphereFourier {
            spec: spec.clone(),
            levels: (0..spec.modulus.r()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn spec(&self) -> &SphereSpec {
        &self.spec
    }

    fn level(&self, gamma: u32) -> Result<&Level> {
        let cell = &self.levels[gamma as usize - 1];
        if let Some(l) = cell.get() {
            return Ok(l);
        }
        let built = Level::build(&self.spec, gamma)?;
        Ok(cell.get_or_init(|| built))
    }

    /// `|S_{r,j}|`.
    pub fn sphere_size(&self) -> Result<usize> {
        Ok(self.level(self.spec.modulus.r())?.len(self.spec.arity()))
    }

    /// `q^{-n} sum_{x in S} e_q(-m.x)` straight from the definition.
    pub fn direct(&self, m: &[u64]) -> Result<Complex64> {
        let n = self.check_arity(m)?;
        let modulus = &self.spec.modulus;
        let top = self.level(modulus.r())?;
        let m: Vec<u64> = m.iter().map(|&c| c % modulus.q()).collect();
        Ok(top.character_sum(n, &m) / modulus.ambient_size(n) as f64)
    }

    pub fn reduced(&self, m: &[u64]) -> Result<Complex64> {
        let n = self.check_arity(m)?;
        self.check_smooth()?;
        let modulus = &self.spec.modulus;
        let (p, r) = (modulus.p() as f64, modulus.r() as i32);
        let m: Vec<u64> = m.iter().map(|&c| c % modulus.q()).collect();
        let n_i = n as i32;
        match split(modulus, &m) {
            Err(LabError::ZeroVector) => {
                // |S_r| = |S_1| p^{(r-1)(n-1)} on the smooth locus
                let base = self.level(1)?.len(n) as f64;
                Ok(Complex64::new(base * p.powi((r - 1) * (n_i - 1) - r * n_i), 0.0))
            }
            Err(e) => Err(e),
            Ok((nu, prim)) => {
                let gamma = modulus.r() - nu;
                let level = self.level(gamma)?;
                let scale = p.powi(-r * n_i + nu as i32 * (n_i - 1));
                Ok(level.character_sum(n, &prim) * scale)
            }
        }
    }

    pub fn value(&self, m: &[u64], path: FourierPath) -> Result<Complex64> {
        match path {
            FourierPath::Direct => self.direct(m),
            FourierPath::Reduced => self.reduced(m),
        }
    }

    fn check_arity(&self, m: &[u64]) -> Result<usize> {
        let n = self.spec.arity();
        if m.len() != n {
            Err(LabError::ArityMismatch {
                expected: n,
                found: m.len(),
            })
        } else {
            Ok(n)
        }
    }

    fn check_smooth(&self) -> Result<()> {
        if !self.spec.unit_radius() {
            return Err(LabError::SmoothnessViolated(format!(
                "radius {} is not a unit",
                self.spec.radius
            )));
        }
        if !self.spec.form.is_smooth_mod(self.spec.modulus.p()) {
            return Err(LabError::SmoothnessViolated(
                "p divides some a_i k_i".to_string(),
            ));
        }
        Ok(())
    }
}

pub fn sphere_fourier(spec: &SphereSpec, m: &[u64], path: FourierPath) -> Result<Complex64> {
    SphereFourier::new(spec).value(m, path)
}

/// `1^_{S_j}(m)` for every radius `j` at once, by one pass over the whole
/// space bucketed by `F(x)`. Independent of any sphere enumeration.
pub fn sphere_fourier_all_radii(form: &DiagonalForm, m: &Modulus, freq: &[u64]) -> Result<Vec<Complex64>> {
    let n = form.arity();
    if freq.len() != n {
        return Err(LabError::ArityMismatch {
            expected: n,
            found: freq.len(),
        });
    }
    form.bind(m)?;
    check_search(m.ambient_size(n))?;
    let q = m.q();
    let total = m.ambient_size(n) as u64;
    let tw = Twiddles::new(m);
    let freq: Vec<u64> = freq.iter().map(|&c| c % q).collect();
    const BLOCK: u64 = 1 << 14;
    let sums = (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .fold(
            || vec![Complex64::new(0.0, 0.0); q as usize],
            |mut acc, b| {
                let mut x = vec![0u64; n];
                for key in b * BLOCK..((b + 1) * BLOCK).min(total) {
                    crate::ring::vector::decode_into(q, key, &mut x);
                    acc[form.eval_unchecked(m, &x) as usize] += tw.e_neg(dot(m, &freq, &x));
                }
                acc
            },
        )
        .reduce(
            || vec![Complex64::new(0.0, 0.0); q as usize],
            |mut l, r| {
                l.iter_mut().zip(r).for_each(|(a, b)| *a += b);
                l
            },
        );
    let scale = 1.0 / total as f64;
    Ok(sums.into_iter().map(|v| v * scale).collect())
}

/// Largest `p^{gamma n}` for which shallow strata are computed by a full
/// transform over `(Z/p^gamma Z)^n`.
pub const SHALLOW_TRANSFORM_CAP: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    /// `"deep"` for `nu = r - 1`, `"shallow"` otherwise.
    pub stratum: String,
    /// Common valuation `nu` of the frequencies in this stratum.
    pub nu: u32,
    pub frequencies: u128,
    pub computed: bool,
    pub max_magnitude: f64,
    pub effective_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub p: u64,
    pub r: u32,
    pub n: usize,
    pub radius: u64,
    pub kappa: f64,
    pub strata: Vec<StratumReport>,
    /// Deep-stratum constant, `max |1^| p^{r + (n-1)/2}`.
    pub c2: f64,
    /// Largest shallow-stratum constant, `max |1^| p^{r + n - 1 - kappa}`.
    pub c3: Option<f64>,
    /// Largest gradient-alignment count over nonzero `m mod p`.
    pub alignment_max: u64,
}

/// Default `kappa`: `(n - 1)/2`, or `0` in one variable.
pub fn default_kappa(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (n as f64 - 1.0) / 2.0
    }
}

pub fn fourier_bound_profile(spec: &SphereSpec) -> Result<BoundProfile> {
    fourier_bound_profile_with(spec, default_kappa(spec.arity()))
}

pub fn fourier_bound_profile_with(spec: &SphereSpec, kappa: f64) -> Result<BoundProfile> {
    spec.require_unit_radius()?;
    let m = &spec.modulus;
    let n = spec.arity();
    let (p, r) = (m.p(), m.r());
    let pf = p as f64;
    let engine = SphereFourier::new(spec);

    let mut strata = Vec::with_capacity(r as usize);
    for nu in 0..r {
        let gamma = r - nu;
        let frequencies = (p as u128).pow(gamma * n as u32) - (p as u128).pow((gamma - 1) * n as u32);
        let deep = nu == r - 1;
        let max = if deep {
            Some(deep_stratum_max(&engine)?)
        } else if (p as u128).pow(gamma * n as u32) <= SHALLOW_TRANSFORM_CAP {
            Some(shallow_stratum_max(&engine, nu)?)
        } else {
            None
        };
        let exponent = if deep {
            r as f64 + (n as f64 - 1.0) / 2.0
        } else {
            r as f64 + n as f64 - 1.0 - kappa
        };
        strata.push(StratumReport {
            stratum: if deep { "deep" } else { "shallow" }.to_string(),
            nu,
            frequencies,
            computed: max.is_some(),
            max_magnitude: max.unwrap_or(f64::NAN),
            effective_constant: max.map_or(f64::NAN, |v| v * pf.powf(exponent)),
        });
    }
    let c2 = strata.last().expect("r >= 1").effective_constant;
    let shallow: Vec<&StratumReport> = strata.iter().filter(|s| s.stratum == "shallow").collect();
    let c3 = if shallow.is_empty() || shallow.iter().any(|s| !s.computed) {
        None
    } else {
        Some(shallow.iter().map(|s| s.effective_constant).fold(0.0, f64::max))
    };
    Ok(BoundProfile {
        p,
        r,
        n,
        radius: spec.radius,
        kappa,
        strata,
        c2,
        c3,
        alignment_max: alignment_max(spec)?,
    })
}

// m' = p^{r-1} m~: the coefficient only sees x mod p, so histogram S_r by
// residue class and take all nonzero m~ mod p.
fn deep_stratum_max(engine: &SphereFourier) -> Result<f64> {
    let spec = engine.spec();
    let m = &spec.modulus;
    let n = spec.arity();
    let p = m.p();
    let top = engine.level(m.r())?;
    let mut hist = vec![0u64; (p as usize).pow(n as u32)];
    for x in top.points.chunks(n) {
        let red: Vec<u64> = x.iter().map(|&c| c % p).collect();
        hist[encode(p, &red) as usize] += 1;
    }
    let modp = m.truncate(1);
    let tw = Twiddles::new(&modp);
    let classes: Vec<(Vec<u64>, u64)> = all_vectors(p, n)
        .zip(hist)
        .filter(|(_, c)| *c > 0)
        .collect();
    let total = m.ambient_size(n) as f64;
    let max = all_vectors(p, n)
        .skip(1)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|mt| {
            let s: Complex64 = classes
                .iter()
                .map(|(y, c)| tw.e_neg(dot(&modp, mt, y)) * *c as f64)
                .sum();
            s.norm() / total
        })
        .reduce(|| 0.0, f64::max);
    Ok(max)
}

fn shallow_stratum_max(engine: &SphereFourier, nu: u32) -> Result<f64> {
    let spec = engine.spec();
    let m = &spec.modulus;
    let n = spec.arity();
    let gamma = m.r() - nu;
    let level = engine.level(gamma)?;
    let set = PointSet::from_flat(&level.modulus, n, &level.points);
    let table = Transformer::new(&level.modulus, n)?.forward(&indicator(&set))?;
    let p = m.p() as f64;
    let n_i = n as i32;
    // 1^_{S_r}(p^nu m~) = p^{-rn + nu(n-1) + gamma n} 1^_{S_gamma}(m~)
    let scale = p.powi(-(m.r() as i32) * n_i + nu as i32 * (n_i - 1) + gamma as i32 * n_i);
    let q = level.modulus.q();
    let max = table
        .values
        .par_iter()
        .enumerate()
        .filter(|(idx, _)| {
            let mt = crate::ring::vector::decode(q, *idx as u64, n);
            mt.iter().any(|&c| c % m.p() != 0)
        })
        .map(|(_, v)| v.norm() * scale)
        .reduce(|| 0.0, f64::max);
    Ok(max)
}

/// `max_{m != 0 mod p} #{y mod p : F(y) = j, grad F(y) != 0 parallel to m}`.
pub fn alignment_max(spec: &SphereSpec) -> Result<u64> {
    let modp = spec.modulus.truncate(1);
    let sub = SphereSpec {
        form: spec.form.clone(),
        modulus: modp.clone(),
        radius: spec.radius % modp.q(),
    };
    let p = modp.p();
    let mut counts = std::collections::HashMap::new();
    for y in sphere_points(&sub, SpherePath::Oracle)?.points() {
        let g = spec.form.gradient(&modp, &y);
        let Some(lead) = g.iter().position(|&c| c != 0) else {
            continue;
        };
        let inv = modp.unit_inverse(g[lead])?;
        let dir: Vec<u64> = g.iter().map(|&c| modp.mul(c, inv)).collect();
        *counts.entry(encode(p, &dir)).or_insert(0u64) += 1;
    }
    Ok(counts.values().copied().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_radii_pass_matches_per_sphere_values() {
        let m = Modulus::new(3, 2).unwrap();
        let form = DiagonalForm::distance(2);
        for freq in [[0u64, 0], [1, 0], [3, 6], [2, 5]] {
            let all = sphere_fourier_all_radii(&form, &m, &freq).unwrap();
            for j in 0..9 {
                let spec = SphereSpec::new(form.clone(), m.clone(), j).unwrap();
                let direct = sphere_fourier(&spec, &freq, FourierPath::Direct).unwrap();
                assert!((all[j as usize] - direct).norm() < 1e-12);
            }
        }
    }
    use crate::ring::DiagonalForm;

    #[test]
    fn small_circle_coefficients() {
        let m = Modulus::new(3, 1).unwrap();
        let spec = SphereSpec::circle(&m, 1);
        let at0 = sphere_fourier(&spec, &[0, 0], FourierPath::Direct).unwrap();
        assert!((at0 - 4.0 / 9.0).norm() < 1e-12);
        let at10 = sphere_fourier(&spec, &[1, 0], FourierPath::Direct).unwrap();
        assert!((at10 - 1.0 / 9.0).norm() < 1e-12);
    }

    #[test]
    fn reduced_matches_direct_at_depth_one() {
        let m = Modulus::new(3, 2).unwrap();
        let engine = SphereFourier::new(&SphereSpec::circle(&m, 1));
        for mv in [[3u64, 0], [0, 0], [1, 4], [6, 3]] {
            let a = engine.direct(&mv).unwrap();
            let b = engine.reduced(&mv).unwrap();
            assert!((a - b).norm() < 1e-12, "{mv:?}: {a} vs {b}");
        }
    }

    #[test]
    fn reduced_rejects_non_unit_radius() {
        let m = Modulus::new(3, 2).unwrap();
        let engine = SphereFourier::new(&SphereSpec::circle(&m, 3));
        assert!(matches!(engine.reduced(&[1, 0]), Err(LabError::SmoothnessViolated(_))));
        assert!(engine.direct(&[1, 0]).is_ok());
    }

    #[test]
    fn deep_constant_for_small_circle() {
        let m = Modulus::new(3, 1).unwrap();
        let prof = fourier_bound_profile(&SphereSpec::circle(&m, 1)).unwrap();
        // max at m = (1, 1): 2/9, scaled by 3^{3/2}
        assert!((prof.c2 - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(prof.strata.len(), 1);
        assert_eq!(prof.strata[0].frequencies, 8);
    }

    #[test]
    fn one_variable_shallow_constant() {
        let m = Modulus::new(5, 2).unwrap();
        let spec = SphereSpec::new(DiagonalForm::distance(1), m, 1).unwrap();
        let prof = fourier_bound_profile(&spec).unwrap();
        assert_eq!(prof.kappa, 0.0);
        assert_eq!(prof.strata.iter().map(|s| s.frequencies).sum::<u128>(), 24);
        assert!(prof.c3.unwrap().is_finite());
    }
}
