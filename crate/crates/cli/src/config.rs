//! Experiment parameters, settable from flags or a TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use padic_lab::distance::TreeShape;
use padic_lab::{DiagonalForm, Modulus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleKind {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Path,
    Star,
}

/// Every parameter any subcommand reads. Flags win over the config file;
/// fields left unset in both take per-subcommand defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Odd prime p.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Exponent r of the modulus p^r.
    #[arg(long, global = true)]
    pub r: Option<u32>,
    /// Number of variables.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Radius j of F(x) = j.
    #[arg(long, global = true)]
    pub j: Option<u64>,
    /// Exponent of the power-sum form (2 selects the distance form).
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Form coefficients, comma separated; overrides --k.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<i64>>,
    /// Form exponents, comma separated; pairs with --coeffs.
    #[arg(long, global = true, value_delimiter = ',')]
    pub exponents: Option<Vec<u32>>,
    /// Frequency vector m.
    #[arg(long, global = true, value_delimiter = ',')]
    pub m: Option<Vec<u64>>,
    /// Scalar frequency s of a complete sum.
    #[arg(long, global = true)]
    pub s: Option<u64>,
    /// Orbit generator x.
    #[arg(long, global = true, value_delimiter = ',')]
    pub x: Option<Vec<u64>>,
    /// Seed for every random draw (ChaCha8).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random trials per setting.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Inclusion probability for random sets.
    #[arg(long, global = true)]
    pub density: Option<f64>,
    /// Density grid for `sweep`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub densities: Option<Vec<f64>>,
    /// Build the point set from a sharpness example.
    #[arg(long, global = true, value_enum)]
    pub example: Option<ExampleKind>,
    /// Number of summands x_1 = 1..l in the odd example.
    #[arg(long, global = true)]
    pub l: Option<u64>,
    /// Subgroup index C in the even example.
    #[arg(long, global = true)]
    pub c: Option<u64>,
    /// CSV file of points, one `x_1,...,x_n` row each.
    #[arg(long, global = true)]
    pub points: Option<PathBuf>,
    /// CSV file for the second set of a census; defaults to the first set.
    #[arg(long, global = true)]
    pub points2: Option<PathBuf>,
    /// Number of random spheres for `incidence`.
    #[arg(long, global = true)]
    pub spheres: Option<usize>,
    /// Edge count of chains and trees.
    #[arg(long, global = true)]
    pub length: Option<usize>,
    /// Tree shape for `configs trees`.
    #[arg(long, global = true, value_enum)]
    pub shape: Option<ShapeKind>,
    /// Pinned vertex for trees.
    #[arg(long, global = true, value_delimiter = ',')]
    pub pin: Option<Vec<u64>>,
    /// Require pairwise distinct vertices.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub distinct: Option<bool>,
    /// Projection level for `fiber`.
    #[arg(long, global = true)]
    pub gamma: Option<u32>,
    /// Output format; `sweep` defaults to CSV, everything else to JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Force brute-force paths.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub oracle: Option<bool>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),* $(,)?) => {
        ExperimentConfig { $($field: $flags.$field.or($file.$field),)* }
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// `self` with unset fields filled from `file`.
    pub fn over(self, file: ExperimentConfig) -> Self {
        overlay!(
            self, file, p, r, n, j, k, coeffs, exponents, m, s, x, seed, trials, density, densities,
            example, l, c, points, points2, spheres, length, shape, pin, distinct, gamma, format, oracle,
        )
    }

    pub fn oracle(&self) -> bool {
        self.oracle.unwrap_or(false)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn modulus(&self, default_p: u64, default_r: u32) -> anyhow::Result<Modulus> {
        Ok(Modulus::new(self.p.unwrap_or(default_p), self.r.unwrap_or(default_r))?)
    }

    /// The form from --coeffs/--exponents, else the power sum of degree --k.
    pub fn form(&self, default_n: usize) -> anyhow::Result<DiagonalForm> {
        match (&self.coeffs, &self.exponents) {
            (Some(c), Some(e)) => {
                if let Some(n) = self.n {
                    if n != c.len() {
                        bail!("--n {n} disagrees with {} coefficients", c.len());
                    }
                }
                Ok(DiagonalForm::new(c.clone(), e.clone())?)
            }
            (Some(c), None) => Ok(DiagonalForm::new(c.clone(), vec![self.k.unwrap_or(2); c.len()])?),
            (None, Some(_)) => bail!("--exponents needs --coeffs"),
            (None, None) => {
                let n = self.n.unwrap_or(default_n);
                Ok(match self.k.unwrap_or(2) {
                    2 => DiagonalForm::distance(n),
                    k => DiagonalForm::power_sum(n, k),
                })
            }
        }
    }

    pub fn tree_shape(&self) -> anyhow::Result<TreeShape> {
        let k = self.length.unwrap_or(1);
        Ok(match self.shape.unwrap_or(ShapeKind::Path) {
            ShapeKind::Path => TreeShape::path(k),
            ShapeKind::Star => TreeShape::star(k),
        })
    }
}
