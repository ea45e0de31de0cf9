//! In-memory verification reports.

use alloc::string::String;
use alloc::vec::Vec;

/// Pass thresholds for the two kinds of residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Checks that involve no finite differences.
    pub exact: f64,
    /// Checks that contain at least one finite difference.
    pub fd: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { exact: 1e-9, fd: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Exact,
    Fd,
}

impl Thresholds {
    pub fn for_kind(&self, kind: Kind) -> f64 {
        match kind {
            Kind::Exact => self.exact,
            Kind::Fd => self.fd,
        }
    }
}

/// One checked identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    /// The identity being checked, written out.
    pub law: String,
    pub residual: f64,
    pub threshold: f64,
    pub kind: Kind,
    pub passed: bool,
    /// Sample indices (and basis indices) where the residual peaked.
    pub worst: String,
    /// False when the identity is vacuous or its inputs are missing.
    pub applicable: bool,
}

impl Entry {
    pub fn from_max(name: &str, law: &str, kind: Kind, max: &MaxTracker, th: &Thresholds) -> Entry {
        let threshold = th.for_kind(kind);
        Entry {
            name: name.into(),
            law: law.into(),
            residual: max.value,
            threshold,
            kind,
            passed: max.value.is_finite() && max.value <= threshold,
            worst: max.worst.clone(),
            applicable: true,
        }
    }

    pub fn not_applicable(name: &str, law: &str, kind: Kind, reason: &str, th: &Thresholds) -> Entry {
        Entry {
            name: name.into(),
            law: law.into(),
            residual: 0.0,
            threshold: th.for_kind(kind),
            kind,
            passed: true,
            worst: reason.into(),
            applicable: false,
        }
    }

    /// Boolean-valued checks (exactness of a sequence, a dimension count).
    pub fn boolean(name: &str, law: &str, ok: bool, detail: String) -> Entry {
        Entry {
            name: name.into(),
            law: law.into(),
            residual: if ok { 0.0 } else { 1.0 },
            threshold: 0.5,
            kind: Kind::Exact,
            passed: ok,
            worst: detail,
            applicable: true,
        }
    }
}

/// Running maximum of a residual, remembering where it was attained.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxTracker {
    pub value: f64,
    pub worst: String,
}

impl Default for MaxTracker {
    fn default() -> Self {
        MaxTracker { value: 0.0, worst: String::from("-") }
    }
}

impl MaxTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `r`; `label` is only built when `r` is a new maximum.
    /// NaN always wins so that broken evaluations surface.
    pub fn update<F: FnOnce() -> String>(&mut self, r: f64, label: F) {
        if r > self.value || (r.is_nan() && !self.value.is_nan()) {
            self.value = r;
            self.worst = label();
        }
    }

    pub fn merge(&mut self, other: &MaxTracker) {
        if other.value > self.value || (other.value.is_nan() && !self.value.is_nan()) {
            self.value = other.value;
            self.worst = other.worst.clone();
        }
    }
}

/// Entries produced by one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub entries: Vec<Entry>,
}

impl SuiteReport {
    pub fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), entries: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failing(&self) -> Vec<&Entry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }
}

/// Settings shared by every suite in one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    /// Rank threshold for every subspace decision.
    pub tol: f64,
    pub fd: crate::numkit::Fd,
    pub thresholds: Thresholds,
    /// Seed for the auxiliary fiber vectors used by the groupoid suite.
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { tol: 1e-8, fd: crate::numkit::Fd::central(1e-4), thresholds: Thresholds::default(), seed: 0 }
    }
}
