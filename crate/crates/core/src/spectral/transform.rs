use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{default_kernel, DftKernel, Twiddles};
use crate::error::{LabError, Result};
use crate::limits::check_search;
use crate::ring::vector::encode;
use crate::ring::{Modulus, PointSet};

/// Fourier data on `(Z/p^rZ)^n`, indexed by the encoded frequency `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub modulus: Modulus,
    pub arity: usize,
    pub values: Vec<Complex64>,
}

impl SpectrumTable {
    pub fn get(&self, m: &[u64]) -> Complex64 {
        self.values[encode(self.modulus.q(), m) as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Separable transform over `(Z/qZ)^n` driven by a [`DftKernel`].
pub struct Transformer {
    modulus: Modulus,
    arity: usize,
    twiddles: Twiddles,
    kernel: Arc<dyn DftKernel>,
}

impl Transformer {
    pub fn new(modulus: &Modulus, arity: usize) -> Result<Self> {
        Self::with_kernel(modulus, arity, default_kernel(modulus))
    }

    pub fn with_kernel(modulus: &Modulus, arity: usize, kernel: Arc<dyn DftKernel>) -> Result<Self> {
        check_search(modulus.ambient_size(arity))?;
        Ok(Transformer {
            modulus: modulus.clone(),
            arity,
            twiddles: Twiddles::new(modulus),
            kernel,
        })
    }

    pub fn kernel_name(&self) -> &'static str {
        self.kernel.name()
    }

    fn size(&self) -> usize {
        self.modulus.ambient_size(self.arity) as usize
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            Err(LabError::SizeMismatch {
                left: len,
                right: self.size(),
            })
        } else {
            Ok(())
        }
    }

    // Each pass transforms the contiguous axis and rotates the next axis
    // into contiguous position; after n passes the layout is restored.
    fn separable(&self, data: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let q = self.modulus.q() as usize;
        let rows = self.size() / q;
        let mut cur = data.to_vec();
        let mut buf = vec![Complex64::new(0.0, 0.0); cur.len()];
        for _ in 0..self.arity {
            buf.par_chunks_mut(q)
                .zip(cur.par_chunks(q))
                .for_each(|(out, line)| self.kernel.transform(&self.twiddles, line, out, inverse));
            cur.par_iter_mut().enumerate().for_each(|(o, slot)| {
                let (row, t) = (o % rows, o / rows);
                *slot = buf[row * q + t];
            });
        }
        cur
    }

    /// `f^(m) = q^{-n} sum_x f(x) e_q(-m.x)`.
    pub fn forward(&self, f: &[Complex64]) -> Result<SpectrumTable> {
        self.check_len(f.len())?;
        let scale = 1.0 / self.size() as f64;
        let mut values = self.separable(f, false);
        values.par_iter_mut().for_each(|v| *v *= scale);
        Ok(SpectrumTable {
            modulus: self.modulus.clone(),
            arity: self.arity,
            values,
        })
    }

    /// `f(x) = sum_m f^(m) e_q(m.x)`.
    pub fn inverse(&self, table: &SpectrumTable) -> Result<Vec<Complex64>> {
        self.check_len(table.values.len())?;
        Ok(self.separable(&table.values, true))
    }

    /// `(f1 * f2)(x) = q^{-n} sum_y f1(x - y) f2(y)`, computed through the
    /// convolution theorem.
    pub fn convolve(&self, f1: &[Complex64], f2: &[Complex64]) -> Result<Vec<Complex64>> {
        if f1.len() != f2.len() {
            return Err(LabError::SizeMismatch {
                left: f1.len(),
                right: f2.len(),
            });
        }
        let a = self.forward(f1)?;
        let b = self.forward(f2)?;
        let product = SpectrumTable {
            values: a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect(),
            ..a
        };
        self.inverse(&product)
    }
}

pub fn fourier(m: &Modulus, n: usize, f: &[Complex64]) -> Result<SpectrumTable> {
    Transformer::new(m, n)?.forward(f)
}

pub fn inverse(table: &SpectrumTable) -> Result<Vec<Complex64>> {
    Transformer::new(&table.modulus, table.arity)?.inverse(table)
}

pub fn convolve(m: &Modulus, n: usize, f1: &[Complex64], f2: &[Complex64]) -> Result<Vec<Complex64>> {
    Transformer::new(m, n)?.convolve(f1, f2)
}

/// The indicator function of a point set as a dense complex table.
pub fn indicator(set: &PointSet) -> Vec<Complex64> {
    let size = set.modulus().ambient_size(set.arity()) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); size];
    for &k in set.keys() {
        out[k as usize] = Complex64::new(1.0, 0.0);
    }
    out
}
