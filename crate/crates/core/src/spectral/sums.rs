//! Weil sums, complete diagonal sums over `(Z/p^rZ)^n`, and one-variable
//! second moments.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::Twiddles;
use super::sphere::default_kappa;
use crate::error::{LabError, Result};
use crate::ring::vector::{all_vectors, split};
use crate::ring::{DiagonalForm, Modulus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeilReport {
    pub p: u64,
    /// Degree of the polynomial after reduction mod `p`.
    pub degree: u32,
    pub value: Complex64,
    pub magnitude: f64,
    /// `(k - 1) sqrt(p)`.
    pub bound: f64,
    pub holds: bool,
}

/// `sum_{x mod p} e_p(f(x))` for `f = sum c_i x^i` (coefficients low to high).
pub fn weil_sum(coefficients: &[i64], p: u64) -> Result<WeilReport> {
    let m = Modulus::new(p, 1)?;
    let reduced: Vec<u64> = coefficients.iter().map(|&c| m.reduce_i64(c)).collect();
    let degree = match reduced.iter().rposition(|&c| c != 0) {
        Some(d) if d >= 1 => d as u32,
        _ => {
            return Err(LabError::InvalidParameter(
                "polynomial is constant modulo p".into(),
            ))
        }
    };
    if (degree as u64).is_multiple_of(p) {
        return Err(LabError::DegreeDivisibleByP { degree, p });
    }
    let tw = Twiddles::new(&m);
    let value: Complex64 = (0..p)
        .map(|x| {
            let fx = reduced
                .iter()
                .rev()
                .fold(0, |acc, &c| m.add(m.mul(acc, x), c));
            tw.e(fx)
        })
        .sum();
    let magnitude = value.norm();
    let bound = (degree as f64 - 1.0) * (p as f64).sqrt();
    Ok(WeilReport {
        p,
        degree,
        value,
        magnitude,
        bound,
        holds: magnitude <= bound + 1e-9,
    })
}

fn check_pair(form: &DiagonalForm, m: &Modulus, freq: &[u64], s: u64) -> Result<()> {
    if freq.len() != form.arity() {
        return Err(LabError::ArityMismatch {
            expected: form.arity(),
            found: freq.len(),
        });
    }
    form.bind(m)?;
    if s.is_multiple_of(m.q()) && freq.iter().all(|&c| c % m.q() == 0) {
        return Err(LabError::ZeroFrequencyPair);
    }
    Ok(())
}

/// `G_r(m, s) = sum_x e_q(s F(x) + m.x)`, evaluated as a product of
/// one-variable sums.
pub fn complete_sum(form: &DiagonalForm, m: &Modulus, freq: &[u64], s: u64) -> Result<Complex64> {
    check_pair(form, m, freq, s)?;
    let tw = Twiddles::new(m);
    Ok(factorized(form, m, &tw, freq, s % m.q()))
}

fn factorized(form: &DiagonalForm, m: &Modulus, tw: &Twiddles, freq: &[u64], s: u64) -> Complex64 {
    form.coefficients()
        .iter()
        .zip(form.exponents())
        .zip(freq)
        .map(|((&a, &k), &mi)| {
            let sa = m.mul(s, m.reduce_i64(a));
            let mi = mi % m.q();
            (0..m.q())
                .map(|x| tw.e(m.add(m.mul(sa, m.pow(x, k as u64)), m.mul(mi, x))))
                .sum::<Complex64>()
        })
        .product()
}

/// The same sum straight over all `q^n` points.
pub fn complete_sum_exhaustive(
    form: &DiagonalForm,
    m: &Modulus,
    freq: &[u64],
    s: u64,
) -> Result<Complex64> {
    check_pair(form, m, freq, s)?;
    crate::limits::check_search(m.ambient_size(form.arity()))?;
    let tw = Twiddles::new(m);
    let tables = form.term_tables(m);
    let s = s % m.q();
    Ok(all_vectors(m.q(), form.arity())
        .map(|x| {
            let mut phase = 0;
            for (i, &xi) in x.iter().enumerate() {
                phase = m.add(phase, m.mul(s, tables[i][xi as usize]));
                phase = m.add(phase, m.mul(freq[i] % m.q(), xi));
            }
            tw.e(phase)
        })
        .sum())
}

/// Depth of the pair `(m, s)`: the largest `nu` with `p^nu` dividing both.
pub fn pair_depth(m: &Modulus, freq: &[u64], s: u64) -> u32 {
    freq.iter()
        .map(|&c| m.ord_p(c))
        .chain(std::iter::once(m.ord_p(s)))
        .min()
        .unwrap_or(m.r())
}

/// Evaluates `G_r(p^nu m, p^nu s) = p^{nu n} G_{r - nu}(m, s)`.
pub fn complete_sum_reduced(
    form: &DiagonalForm,
    m: &Modulus,
    freq: &[u64],
    s: u64,
) -> Result<Complex64> {
    check_pair(form, m, freq, s)?;
    let mut joint: Vec<u64> = freq.iter().map(|&c| c % m.q()).collect();
    joint.push(s % m.q());
    let (nu, prim) = split(m, &joint)?;
    let inner = m.truncate(m.r() - nu);
    let (s_inner, freq_inner) = prim.split_last().expect("nonempty");
    let tw = Twiddles::new(&inner);
    let scale = (m.p() as f64).powi((nu as usize * form.arity()) as i32);
    Ok(factorized(form, &inner, &tw, freq_inner, *s_inner) * scale)
}

/// Constants for the two-stratum complete-sum bound, measured modulo `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteSumConstants {
    pub p: u64,
    pub kappa: f64,
    /// `max |G_1(m, s)| / p^{n/2}` over nonzero pairs mod `p`.
    pub c1: f64,
    /// `max #{x mod p : s grad F(x) + m = 0} / p^kappa` over nonzero pairs.
    pub c2: f64,
    pub max_critical_count: u64,
}

pub fn complete_sum_constants(form: &DiagonalForm, p: u64) -> Result<CompleteSumConstants> {
    complete_sum_constants_with(form, p, default_kappa(form.arity()))
}

pub fn complete_sum_constants_with(
    form: &DiagonalForm,
    p: u64,
    kappa: f64,
) -> Result<CompleteSumConstants> {
    let m = Modulus::new(p, 1)?;
    form.bind(&m)?;
    let n = form.arity();
    crate::limits::check_search((p as u128).pow(n as u32 + 1))?;
    let tw = Twiddles::new(&m);
    let pairs: Vec<(Vec<u64>, u64)> = (0..p)
        .flat_map(|s| all_vectors(p, n).map(move |f| (f, s)))
        .filter(|(f, s)| *s != 0 || f.iter().any(|&c| c != 0))
        .collect();
    let max_g = pairs
        .par_iter()
        .map(|(f, s)| factorized(form, &m, &tw, f, *s).norm())
        .reduce(|| 0.0, f64::max);

    // s grad F(x) + m = 0 fixes m once x and s are chosen, so histogram -s grad F
    let max_critical_count = (0..p)
        .into_par_iter()
        .map(|s| {
            let mut hist = std::collections::HashMap::new();
            for x in all_vectors(p, n) {
                let g = form.gradient(&m, &x);
                let target: Vec<u64> = g.iter().map(|&c| m.neg(m.mul(s, c))).collect();
                if s == 0 && target.iter().all(|&c| c == 0) {
                    continue;
                }
                *hist.entry(target).or_insert(0u64) += 1;
            }
            hist.into_values().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let pf = p as f64;
    Ok(CompleteSumConstants {
        p,
        kappa,
        c1: max_g / pf.powf(n as f64 / 2.0),
        c2: max_critical_count as f64 / pf.powf(kappa),
        max_critical_count,
    })
}

/// Bound for `|G_r(m, s)|`: `c1 p^{(r - 1/2) n}` when the pair is divisible
/// by `p^{r-1}`, `c2 p^{(r-1) n + kappa}` otherwise, where the lifted sum is
/// first reduced by the common depth.
pub fn complete_sum_bound(
    constants: &CompleteSumConstants,
    n: usize,
    m: &Modulus,
    freq: &[u64],
    s: u64,
) -> f64 {
    let nu = pair_depth(m, freq, s);
    let gamma = (m.r() - nu) as f64;
    let pf = m.p() as f64;
    let nf = n as f64;
    let lift = pf.powf(nu as f64 * nf);
    if gamma <= 1.0 {
        lift * constants.c1 * pf.powf(nf / 2.0)
    } else {
        lift * constants.c2 * pf.powf((gamma - 1.0) * nf + constants.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentRegime {
    /// `ord_p(m) < r - ceil(r/k)`: compared against `p^{2r}`.
    Generic,
    /// Otherwise: compared against `p^{(3 - 2/k) r}`.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentReport {
    pub value: f64,
    /// Same quantity through `q sum_v |sum_{a x^k = v} e_q(-m x)|^2`.
    pub via_fibers: f64,
    pub regime: MomentRegime,
    pub reference: f64,
    pub ratio: f64,
}

pub fn moment_regime(m: &Modulus, k: u32, freq: u64) -> MomentRegime {
    let threshold = m.r() - m.r().div_ceil(k);
    if m.ord_p(freq) < threshold {
        MomentRegime::Generic
    } else {
        MomentRegime::Degenerate
    }
}

/// `sum_s |sum_x e_q(-m x + s a x^k)|^2` over `s, x mod p^r`.
pub fn second_moment_one_var(a: i64, k: u32, freq: u64, r: u32, p: u64) -> Result<SecondMomentReport> {
    let m = Modulus::new(p, r)?;
    if a.unsigned_abs().is_multiple_of(p) {
        return Err(LabError::CoefficientDivisibleByP { coefficient: a, p });
    }
    if k < 2 {
        return Err(LabError::InvalidParameter("k must be at least 2".into()));
    }
    if (k as u64).is_multiple_of(p) {
        return Err(LabError::DegreeDivisibleByP { degree: k, p });
    }
    let q = m.q();
    let tw = Twiddles::new(&m);
    let a = m.reduce_i64(a);
    let freq = freq % q;
    let power: Vec<u64> = (0..q).map(|x| m.mul(a, m.pow(x, k as u64))).collect();
    let linear: Vec<u64> = (0..q).map(|x| m.neg(m.mul(freq, x))).collect();

    let value: f64 = (0..q)
        .into_par_iter()
        .map(|s| {
            (0..q as usize)
                .map(|x| tw.e(m.add(linear[x], m.mul(s, power[x]))))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();

    let mut fibers = vec![Complex64::new(0.0, 0.0); q as usize];
    for x in 0..q as usize {
        fibers[power[x] as usize] += tw.e(linear[x]);
    }
    let via_fibers = q as f64 * fibers.iter().map(|z| z.norm_sqr()).sum::<f64>();

    let regime = moment_regime(&m, k, freq);
    let pf = p as f64;
    let rf = r as f64;
    let reference = match regime {
        MomentRegime::Generic => pf.powf(2.0 * rf),
        MomentRegime::Degenerate => pf.powf((3.0 - 2.0 / k as f64) * rf),
    };
    Ok(SecondMomentReport {
        value,
        via_fibers,
        regime,
        reference,
        ratio: value / reference,
    })
}

/// `sum_j 1^_{S_j}(m) conj(1^_{S_j}(l))` for nonzero `m`, `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSumReport {
    /// Bucketed over the whole space.
    pub direct: Complex64,
    /// `q^{-2n-1} sum_{s != 0} G(-m, s) G(l, -s)` from one-variable sums.
    pub via_products: Complex64,
    /// `q^{-2/k} p^{-(n-1)}` with `k` the smallest exponent.
    pub reference: f64,
    /// `|direct| / reference`.
    pub ratio: f64,
}

pub fn radius_sum(form: &DiagonalForm, m: &Modulus, freq: &[u64], other: &[u64]) -> Result<RadiusSumReport> {
    let n = form.arity();
    for f in [freq, other] {
        if f.len() != n {
            return Err(LabError::ArityMismatch { expected: n, found: f.len() });
        }
        if f.iter().all(|&c| c % m.q() == 0) {
            return Err(LabError::ZeroVector);
        }
    }
    let a = super::sphere::sphere_fourier_all_radii(form, m, freq)?;
    let b = super::sphere::sphere_fourier_all_radii(form, m, other)?;
    let direct: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
    let tw = Twiddles::new(m);
    let neg: Vec<u64> = freq.iter().map(|&c| m.neg(c % m.q())).collect();
    let q = m.q() as f64;
    let via_products: Complex64 = (1..m.q())
        .into_par_iter()
        .map(|s| factorized(form, m, &tw, &neg, s) * factorized(form, m, &tw, other, m.neg(s)))
        .sum::<Complex64>()
        / q.powi(2 * n as i32 + 1);
    let reference = q.powf(-2.0 / form.min_exponent() as f64) * (m.p() as f64).powi(1 - n as i32);
    Ok(RadiusSumReport {
        direct,
        via_products,
        reference,
        ratio: direct.norm() / reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_sum_two_ways() {
        let m = Modulus::new(3, 2).unwrap();
        for form in [DiagonalForm::distance(2), DiagonalForm::new(vec![1, 2], vec![3, 3]).unwrap()] {
            for (f, g) in [([1u64, 0], [0u64, 1]), ([3, 1], [3, 1]), ([2, 7], [6, 3])] {
                let rep = radius_sum(&form, &m, &f, &g).unwrap();
                assert!((rep.direct - rep.via_products).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weil_examples() {
        let g = weil_sum(&[0, 0, 1], 5).unwrap();
        assert!((g.magnitude - 5f64.sqrt()).abs() < 1e-9);
        let c = weil_sum(&[0, 0, 0, 1], 7).unwrap();
        assert!((c.magnitude - 4.7409).abs() < 1e-3 && c.holds);
        assert!(weil_sum(&[0, 1], 11).unwrap().magnitude < 1e-9);
        assert!(matches!(
            weil_sum(&[0, 0, 0, 0, 0, 1], 5),
            Err(LabError::DegreeDivisibleByP { degree: 5, p: 5 })
        ));
    }

    #[test]
    fn gauss_sum_as_complete_sum() {
        let m = Modulus::new(5, 1).unwrap();
        let g = complete_sum(&DiagonalForm::distance(1), &m, &[0], 1).unwrap();
        assert!((g.norm() - 5f64.sqrt()).abs() < 1e-9);
        assert_eq!(
            complete_sum(&DiagonalForm::distance(2), &m, &[0, 0], 0),
            Err(LabError::ZeroFrequencyPair)
        );
    }

    #[test]
    fn reduction_by_depth() {
        let m = Modulus::new(3, 2).unwrap();
        let f = DiagonalForm::distance(2);
        let direct = complete_sum_exhaustive(&f, &m, &[3, 3], 3).unwrap();
        let reduced = complete_sum_reduced(&f, &m, &[3, 3], 3).unwrap();
        assert!((direct - reduced).norm() < 1e-9);
        assert_eq!(pair_depth(&m, &[3, 3], 3), 1);
    }

    #[test]
    fn second_moment_small() {
        let rep = second_moment_one_var(1, 2, 0, 1, 3).unwrap();
        assert!((rep.value - 15.0).abs() < 1e-9);
        assert!((rep.via_fibers - 15.0).abs() < 1e-9);
        let rep = second_moment_one_var(1, 2, 1, 2, 3).unwrap();
        assert_eq!(rep.regime, MomentRegime::Generic);
    }
}
