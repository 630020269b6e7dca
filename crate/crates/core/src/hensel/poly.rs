use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::ring::{DiagonalForm, Modulus};

/// `coefficient * x_1^{e_1} * ... * x_n^{e_n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: i64,
    pub exponents: Vec<u32>,
}

/// Sparse integer polynomial in a fixed number of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    arity: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    /// Builds a polynomial from `(coefficient, exponent vector)` pairs, merging
    /// like terms and dropping zero coefficients.
    pub fn new(arity: usize, terms: impl IntoIterator<Item = (i64, Vec<u32>)>) -> Result<Self> {
        let mut merged: Vec<Monomial> = Vec::new();
        for (c, e) in terms {
            if e.len() != arity {
                return Err(LabError::InvalidPolySystem(format!(
                    "monomial has {} exponents, expected {arity}",
                    e.len()
                )));
            }
            match merged.iter_mut().find(|t| t.exponents == e) {
                Some(t) => t.coefficient += c,
                None => merged.push(Monomial {
                    coefficient: c,
                    exponents: e,
                }),
            }
        }
        merged.retain(|t| t.coefficient != 0);
        merged.sort_by(|a, b| b.exponents.cmp(&a.exponents));
        Ok(Polynomial {
            arity,
            terms: merged,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents[var] > 0)
            .map(|t| {
                let mut e = t.exponents.clone();
                let k = e[var];
                e[var] -= 1;
                (t.coefficient * k as i64, e)
            });
        Polynomial::new(self.arity, terms).expect("derivative keeps arity")
    }

    pub fn eval(&self, m: &Modulus, x: &[u64]) -> u64 {
        self.terms.iter().fold(0, |acc, t| {
            let mono = t
                .exponents
                .iter()
                .zip(x)
                .fold(m.reduce_i64(t.coefficient), |v, (&e, &xi)| {
                    if e == 0 {
                        v
                    } else {
                        m.mul(v, m.pow(xi, e as u64))
                    }
                });
            m.add(acc, mono)
        })
    }
}

/// A system `G = (G_1, ..., G_m)` of polynomials in `n` variables together
/// with its symbolic Jacobian.
#[derive(Debug, Clone)]
pub struct PolySystem {
    arity: usize,
    components: Vec<Polynomial>,
    jacobian: Vec<Vec<Polynomial>>,
}

/// Prime used for the finite-difference self-check of the derivative table.
const CHECK_PRIME: u64 = 10007;

impl PolySystem {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let arity = components
            .first()
            .map(Polynomial::arity)
            .ok_or_else(|| LabError::InvalidPolySystem("empty system".into()))?;
        if arity == 0 {
            return Err(LabError::InvalidPolySystem("no variables".into()));
        }
        if components.iter().any(|c| c.arity() != arity) {
            return Err(LabError::InvalidPolySystem("components disagree on arity".into()));
        }
        let jacobian = components
            .iter()
            .map(|g| (0..arity).map(|j| g.derivative(j)).collect())
            .collect();
        let sys = PolySystem {
            arity,
            components,
            jacobian,
        };
        sys.check_derivatives()?;
        Ok(sys)
    }

    /// `F(x) - j` for a diagonal form.
    pub fn from_form(form: &DiagonalForm, j: i64) -> Self {
        let n = form.arity();
        let mut terms: Vec<(i64, Vec<u32>)> = form
            .coefficients()
            .iter()
            .zip(form.exponents())
            .enumerate()
            .map(|(i, (&a, &k))| {
                let mut e = vec![0; n];
                e[i] = k;
                (a, e)
            })
            .collect();
        terms.push((-j, vec![0; n]));
        let poly = Polynomial::new(n, terms).expect("form terms have matching arity");
        PolySystem::new(vec![poly]).expect("diagonal forms give valid systems")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn eval(&self, m: &Modulus, x: &[u64]) -> Vec<u64> {
        self.components.iter().map(|g| g.eval(m, x)).collect()
    }

    pub fn vanishes(&self, m: &Modulus, x: &[u64]) -> bool {
        self.components.iter().all(|g| g.eval(m, x) == 0)
    }

    /// The Jacobian at `x` reduced modulo `m`, one row per component.
    pub fn jacobian_at(&self, m: &Modulus, x: &[u64]) -> Vec<Vec<u64>> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|d| d.eval(m, x)).collect())
            .collect()
    }

    // G(x + p e_j) - G(x) == p * dG/dx_j (x)  (mod p^2)
    fn check_derivatives(&self) -> Result<()> {
        let m = Modulus::new(CHECK_PRIME, 2).expect("check prime is valid");
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..4 {
            let x: Vec<u64> = (0..self.arity).map(|_| rng.gen_range(0..m.q())).collect();
            for (g, row) in self.components.iter().zip(&self.jacobian) {
                let base = g.eval(&m, &x);
                for (j, d) in row.iter().enumerate() {
                    let mut shifted = x.clone();
                    shifted[j] = m.add(shifted[j], CHECK_PRIME);
                    let diff = m.sub(g.eval(&m, &shifted), base);
                    if diff != m.mul(CHECK_PRIME, d.eval(&m, &x)) {
                        return Err(LabError::InvalidPolySystem(format!(
                            "derivative table inconsistent in variable {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
