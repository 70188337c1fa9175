//! Structured pass/fail records shared by the sampled verifications.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Cap on witnesses stored per report; `failures` always holds the full count.
pub const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: Option<f64>,
    pub x: Complex64,
    pub y: Vec<Complex64>,
    pub gamma: Option<Complex64>,
    /// Gauge (or other measured quantity) at the failing sample.
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub name: String,
    pub ok: bool,
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    /// Set when no failure was found but the check could not be completed
    /// (e.g. a precondition does not hold).
    pub inconclusive: bool,
    pub measured: f64,
    pub predicted: f64,
    pub margin: f64,
    pub samples: usize,
    pub failures: usize,
    pub witnesses: Vec<Witness>,
    pub preconditions: Vec<Precondition>,
    pub details: Map<String, Value>,
}

impl VerificationReport {
    pub fn new(check: &str) -> Self {
        Self {
            check: check.to_owned(),
            pass: true,
            inconclusive: false,
            measured: 0.0,
            predicted: 0.0,
            margin: 0.0,
            samples: 0,
            failures: 0,
            witnesses: Vec::new(),
            preconditions: Vec::new(),
            details: Map::new(),
        }
    }

    pub fn precondition(&mut self, name: &str, ok: bool, value: Option<f64>, detail: impl Into<String>) {
        self.preconditions.push(Precondition { name: name.to_owned(), ok, value, detail: detail.into() });
    }

    pub fn preconditions_hold(&self) -> bool {
        self.preconditions.iter().all(|p| p.ok)
    }

    pub fn record_failure(&mut self, w: Witness) {
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_owned(), v);
    }

    /// Sets `pass` from the failure count and preconditions, keeping the
    /// rule that a failed report carries a witness or the inconclusive flag.
    pub fn finish(mut self) -> Self {
        let pre = self.preconditions_hold();
        self.pass = self.failures == 0 && pre && !self.inconclusive;
        if !self.pass && self.witnesses.is_empty() {
            self.inconclusive = true;
        }
        self
    }
}
