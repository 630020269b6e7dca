//! Spectra of Cayley graphs on `(Z/p^rZ)^n`.

use serde::{Deserialize, Serialize};

use super::transform::{indicator, SpectrumTable, Transformer};
use crate::error::Result;
use crate::ring::PointSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CayleySpectrum {
    /// `lambda_m = sum_{x in S} e_q(m.x) = q^n 1^_S(-m)`.
    pub eigenvalues: SpectrumTable,
    /// `S = -S`; only then is the spectrum real.
    pub symmetric: bool,
    pub degree: usize,
    pub max_nontrivial: f64,
}

pub fn cayley_spectrum(set: &PointSet) -> Result<CayleySpectrum> {
    let modulus = set.modulus();
    let n = set.arity();
    let transformer = Transformer::new(modulus, n)?;
    // the unnormalised inverse transform of 1_S is exactly lambda
    let source = SpectrumTable {
        modulus: modulus.clone(),
        arity: n,
        values: indicator(set),
    };
    let values = transformer.inverse(&source)?;
    let max_nontrivial = values.iter().skip(1).map(|v| v.norm()).fold(0.0, f64::max);
    Ok(CayleySpectrum {
        eigenvalues: SpectrumTable {
            modulus: modulus.clone(),
            arity: n,
            values,
        },
        symmetric: set.is_symmetric(),
        degree: set.len(),
        max_nontrivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Modulus;

    #[test]
    fn small_circle_spectrum() {
        let m = Modulus::new(3, 1).unwrap();
        let circle = PointSet::from_points(&m, 2, [[0, 1], [0, 2], [1, 0], [2, 0]]).unwrap();
        let spec = cayley_spectrum(&circle).unwrap();
        assert!(spec.symmetric);
        assert!((spec.eigenvalues.get(&[0, 0]).re - 4.0).abs() < 1e-9);
        assert!((spec.eigenvalues.get(&[1, 0]).re - 1.0).abs() < 1e-9);
        assert!(spec.eigenvalues.values.iter().all(|v| v.im.abs() < 1e-9));
    }

    #[test]
    fn trivial_sets() {
        let m = Modulus::new(5, 1).unwrap();
        let origin = PointSet::from_points(&m, 2, [[0, 0]]).unwrap();
        let spec = cayley_spectrum(&origin).unwrap();
        assert!(spec.eigenvalues.values.iter().all(|v| (v - 1.0).norm() < 1e-9));
        let full = cayley_spectrum(&PointSet::full(&m, 2)).unwrap();
        assert_eq!(full.degree, 25);
        assert!(full.max_nontrivial < 1e-9);
    }
}
