//! Named verification runs. Each entry recomputes one family of exact
//! identities or inequalities on a parameter grid and reports every
//! comparison together with the constants it measured.

mod checks;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, Result};

/// Inputs shared by every verification; unset fields take per-check defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub p: Option<u64>,
    pub r: Option<u32>,
    pub n: Option<usize>,
    pub j: Option<u64>,
    pub k: Option<u32>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Force brute-force paths wherever a check has a choice.
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: Value,
    pub rhs: Value,
    /// `"=="`, `"<="` or `"~="`.
    pub relation: String,
    pub pass: bool,
}

fn int(v: u128) -> Value {
    u64::try_from(v).map_or_else(|_| Value::String(v.to_string()), Value::from)
}

fn real(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

impl Assertion {
    pub fn equal(name: impl Into<String>, lhs: u128, rhs: u128) -> Self {
        Assertion {
            name: name.into(),
            lhs: int(lhs),
            rhs: int(rhs),
            relation: "==".into(),
            pass: lhs == rhs,
        }
    }

    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs: real(lhs),
            rhs: real(rhs),
            relation: "<=".into(),
            pass: lhs <= rhs,
        }
    }

    pub fn at_most_int(name: impl Into<String>, lhs: u128, rhs: u128) -> Self {
        Assertion {
            name: name.into(),
            lhs: int(lhs),
            rhs: int(rhs),
            relation: "<=".into(),
            pass: lhs <= rhs,
        }
    }

    /// `|lhs - rhs| <= tol`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs: real(lhs),
            rhs: real(rhs),
            relation: "~=".into(),
            pass: (lhs - rhs).abs() <= tol,
        }
    }

    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Assertion {
            name: name.into(),
            lhs: Value::Bool(pass),
            rhs: Value::Bool(true),
            relation: "==".into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub lemma: String,
    pub params: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    pub constants: BTreeMap<String, Value>,
}

impl VerifyReport {
    pub fn new(lemma: &str) -> Self {
        VerifyReport {
            lemma: lemma.to_string(),
            params: BTreeMap::new(),
            assertions: Vec::new(),
            constants: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.into(), serde_json::to_value(value).expect("params serialize"));
        self
    }

    pub fn constant(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.constants.insert(key.into(), serde_json::to_value(value).expect("constants serialize"));
        self
    }

    pub fn check(&mut self, a: Assertion) -> &mut Self {
        self.assertions.push(a);
        self
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

pub trait Verification: Send + Sync {
    fn id(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, params: &VerifyParams) -> Result<VerifyReport>;
}

/// Verifications keyed by id, in registration order.
#[derive(Clone)]
pub struct Registry {
    entries: Vec<Arc<dyn Verification>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { entries: Vec::new() }
    }

    pub fn standard() -> Self {
        let mut reg = Self::empty();
        for v in checks::all() {
            reg.register(v);
        }
        reg
    }

    /// Replaces an existing entry with the same id.
    pub fn register(&mut self, v: Arc<dyn Verification>) {
        self.entries.retain(|e| e.id() != v.id());
        self.entries.push(v);
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.id()).collect()
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn Verification>> {
        self.entries
            .iter()
            .find(|e| e.id() == id)
            .cloned()
            .ok_or_else(|| LabError::UnknownVerification(id.to_string()))
    }

    pub fn run(&self, id: &str, params: &VerifyParams) -> Result<VerifyReport> {
        self.get(id)?.run(params)
    }
}

/// The ids accepted by `padic-lab verify`.
pub const VERIFY_IDS: [&str; 20] = [
    "hensel-2.1",
    "weil-2.2",
    "count-2.3",
    "fourier-2.5",
    "sums-2.6",
    "moment-2.7",
    "group-4.1",
    "orbit-4.2",
    "circle-4.4",
    "energy-4.5",
    "energy-4.6",
    "ext-4.1T",
    "ext-4.2T",
    "ext-4.3T",
    "circle-4.9",
    "energy-4.10",
    "energy-4.11",
    "decomp-3",
    "pinned-6.2",
    "incidence-6.3",
];

pub fn run_verification(id: &str, params: &VerifyParams) -> Result<VerifyReport> {
    Registry::standard().run(id, params)
}
