use std::fmt;

use serde::{Deserialize, Serialize};

use super::Modulus;
use crate::error::{LabError, Result};

/// A diagonal form `F(x) = sum a_i x_i^{k_i}`.
///
/// The plain distance form has every `a_i = 1` and `k_i = 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalForm {
    coefficients: Vec<i64>,
    exponents: Vec<u32>,
}

impl DiagonalForm {
    pub fn new(coefficients: Vec<i64>, exponents: Vec<u32>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(LabError::InvalidParameter("form needs at least one variable".into()));
        }
        if coefficients.len() != exponents.len() {
            return Err(LabError::ArityMismatch {
                expected: coefficients.len(),
                found: exponents.len(),
            });
        }
        if coefficients.contains(&0) {
            return Err(LabError::InvalidParameter("coefficients must be nonzero".into()));
        }
        if exponents.iter().any(|&k| k < 2) {
            return Err(LabError::InvalidParameter("exponents must be at least 2".into()));
        }
        Ok(DiagonalForm {
            coefficients,
            exponents,
        })
    }

    /// `x_1^2 + ... + x_n^2`.
    pub fn distance(n: usize) -> Self {
        Self::power_sum(n, 2)
    }

    /// `x_1^k + ... + x_n^k`.
    pub fn power_sum(n: usize, k: u32) -> Self {
        assert!(n >= 1 && k >= 2);
        DiagonalForm {
            coefficients: vec![1; n],
            exponents: vec![k; n],
        }
    }

    pub fn arity(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// `k_* = min k_i`.
    pub fn min_exponent(&self) -> u32 {
        *self.exponents.iter().min().unwrap()
    }

    pub fn is_distance(&self) -> bool {
        self.coefficients.iter().all(|&a| a == 1) && self.exponents.iter().all(|&k| k == 2)
    }

    pub fn all_exponents_even(&self) -> bool {
        self.exponents.iter().all(|&k| k % 2 == 0)
    }

    /// Checks that every coefficient is coprime to `p`.
    pub fn bind(&self, m: &Modulus) -> Result<()> {
        match self
            .coefficients
            .iter()
            .find(|&&a| (a.unsigned_abs() % m.p()) == 0)
        {
            Some(&a) => Err(LabError::CoefficientDivisibleByP {
                coefficient: a,
                p: m.p(),
            }),
            None => Ok(()),
        }
    }

    /// True when `p` divides no `a_i k_i`; then the gradient vanishes mod `p`
    /// only at points that are `0` mod `p`.
    pub fn is_smooth_mod(&self, p: u64) -> bool {
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .all(|(&a, &k)| a.unsigned_abs() % p != 0 && !(k as u64).is_multiple_of(p))
    }

    pub fn eval(&self, m: &Modulus, z: &[u64]) -> Result<u64> {
        if z.len() != self.arity() {
            return Err(LabError::ArityMismatch {
                expected: self.arity(),
                found: z.len(),
            });
        }
        Ok(self.eval_unchecked(m, z))
    }

    #[inline]
    pub fn eval_unchecked(&self, m: &Modulus, z: &[u64]) -> u64 {
        let mut acc = 0;
        for ((&a, &k), &x) in self.coefficients.iter().zip(&self.exponents).zip(z) {
            let term = m.mul(m.reduce_i64(a), m.pow(x, k as u64));
            acc = m.add(acc, term);
        }
        acc
    }

    /// Per-coordinate term tables `a_i x^{k_i} mod q` for every `x < q`.
    ///
    /// Hot loops that evaluate the form at every point of a box use these
    /// instead of repeated exponentiation.
    pub fn term_tables(&self, m: &Modulus) -> Vec<Vec<u64>> {
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .map(|(&a, &k)| {
                let a = m.reduce_i64(a);
                (0..m.q()).map(|x| m.mul(a, m.pow(x, k as u64))).collect()
            })
            .collect()
    }

    /// `(dF/dx_i)(z) = k_i a_i z_i^{k_i - 1}` reduced modulo `q`.
    pub fn gradient(&self, m: &Modulus, z: &[u64]) -> Vec<u64> {
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .zip(z)
            .map(|((&a, &k), &x)| {
                let c = m.reduce_i64(a * k as i64);
                m.mul(c, m.pow(x, (k - 1) as u64))
            })
            .collect()
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .zip(&self.exponents)
            .enumerate()
            .map(|(i, (&a, &k))| {
                if a == 1 {
                    format!("x{}^{}", i + 1, k)
                } else {
                    format!("{}*x{}^{}", a, i + 1, k)
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
