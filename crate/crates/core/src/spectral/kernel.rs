//! Length-`q` DFT kernels, selectable by name at run time.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::ring::Modulus;

/// Twiddle table `e^{2 pi i t / q}` for `t < q`.
#[derive(Debug, Clone)]
pub struct Twiddles {
    modulus: Modulus,
    table: Vec<Complex64>,
}

impl Twiddles {
    pub fn new(modulus: &Modulus) -> Self {
        let q = modulus.q();
        let table = (0..q)
            .map(|t| Complex64::from_polar(1.0, TAU * t as f64 / q as f64))
            .collect();
        Twiddles {
            modulus: modulus.clone(),
            table,
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// `e_q(t) = e^{2 pi i t / q}` for a canonical residue `t`.
    #[inline]
    pub fn e(&self, t: u64) -> Complex64 {
        self.table[t as usize]
    }

    /// `e_q(-t)`.
    #[inline]
    pub fn e_neg(&self, t: u64) -> Complex64 {
        self.table[self.modulus.neg(t) as usize]
    }
}

/// Computes `out[k] = sum_t line[t] e_q(sign * k t)` for one axis.
pub trait DftKernel: Send + Sync {
    fn name(&self) -> &'static str;
    fn transform(&self, tw: &Twiddles, line: &[Complex64], out: &mut [Complex64], inverse: bool);
}

/// `O(q^2)` evaluation of the definition.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectKernel;

impl DftKernel for DirectKernel {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn transform(&self, tw: &Twiddles, line: &[Complex64], out: &mut [Complex64], inverse: bool) {
        let q = line.len() as u64;
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0u64;
            for &x in line {
                acc += x * if inverse { tw.e(idx) } else { tw.e_neg(idx) };
                idx += k as u64;
                if idx >= q {
                    idx -= q;
                }
            }
            *slot = acc;
        }
    }
}

/// Mixed-radix Cooley-Tukey specialised to `q = p^r`: `r` passes of size-`p`
/// butterflies, `O(q p r)` per line.
#[derive(Debug, Default, Clone, Copy)]
pub struct RadixPKernel;

impl RadixPKernel {
    fn recurse(
        tw: &Twiddles,
        input: &[Complex64],
        offset: usize,
        stride: usize,
        len: usize,
        out: &mut [Complex64],
        inverse: bool,
    ) {
        if len == 1 {
            out[0] = input[offset];
            return;
        }
        let p = tw.modulus().p() as usize;
        let q = tw.modulus().q() as usize;
        let sub = len / p;
        let mut parts = vec![Complex64::new(0.0, 0.0); len];
        for s in 0..p {
            Self::recurse(
                tw,
                input,
                offset + s * stride,
                stride * p,
                sub,
                &mut parts[s * sub..(s + 1) * sub],
                inverse,
            );
        }
        let step = q / len;
        for (k, slot) in out.iter_mut().enumerate().take(len) {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..p {
                let idx = ((s * k) % len * step) as u64;
                let w = if inverse { tw.e(idx) } else { tw.e_neg(idx) };
                acc += parts[s * sub + k % sub] * w;
            }
            *slot = acc;
        }
    }
}

impl DftKernel for RadixPKernel {
    fn name(&self) -> &'static str {
        "radix-p"
    }

    fn transform(&self, tw: &Twiddles, line: &[Complex64], out: &mut [Complex64], inverse: bool) {
        Self::recurse(tw, line, 0, 1, line.len(), out, inverse);
    }
}

/// Names accepted by [`kernel_by_name`].
pub const KERNEL_NAMES: &[&str] = &["direct", "radix-p"];

pub fn kernel_by_name(name: &str) -> Result<Arc<dyn DftKernel>> {
    match name {
        "direct" => Ok(Arc::new(DirectKernel)),
        "radix-p" => Ok(Arc::new(RadixPKernel)),
        other => Err(LabError::InvalidParameter(format!(
            "unknown DFT kernel `{other}` (expected one of {KERNEL_NAMES:?})"
        ))),
    }
}

/// The direct kernel for `q <= 64`, radix-`p` above.
pub fn default_kernel(m: &Modulus) -> Arc<dyn DftKernel> {
    if m.q() > 64 {
        Arc::new(RadixPKernel)
    } else {
        Arc::new(DirectKernel)
    }
}
