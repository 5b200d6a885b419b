//! Check suites over seeds and parameter grids, and their reports.

mod emit;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::ScanRow;

pub use emit::{emit_report, report_csv, report_json, scan_csv, Format};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckResult {
    /// `pass` is `max_residual <= tolerance`; a NaN residual fails.
    pub fn new(name: impl Into<String>, params: BTreeMap<String, Value>, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            params,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub suite: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
    /// Scan table of the MODEL_*_SCAN suites; written as CSV, not part of the JSON.
    #[serde(skip)]
    pub scan: Option<Vec<ScanRow>>,
}

impl Report {
    pub fn new(suite: impl Into<String>, params: BTreeMap<String, Value>, seed: u64) -> Self {
        Self {
            version: VERSION.to_string(),
            suite: suite.into(),
            params,
            seed,
            checks: Vec::new(),
            summary: Summary::default(),
            scan: None,
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        if check.pass {
            self.summary.pass += 1;
        } else {
            self.summary.fail += 1;
        }
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Ambient,
    PointIdentities,
    Subspaces,
    ResidualOracle,
    ModelAScan,
    ModelBScan,
    ProofSteps,
    Minimizer,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Ambient,
        Suite::PointIdentities,
        Suite::Subspaces,
        Suite::ResidualOracle,
        Suite::ModelAScan,
        Suite::ModelBScan,
        Suite::ProofSteps,
        Suite::Minimizer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ambient => "AMBIENT",
            Suite::PointIdentities => "POINT_IDENTITIES",
            Suite::Subspaces => "SUBSPACES",
            Suite::ResidualOracle => "RESIDUAL_ORACLE",
            Suite::ModelAScan => "MODEL_A_SCAN",
            Suite::ModelBScan => "MODEL_B_SCAN",
            Suite::ProofSteps => "PROOF_STEPS",
            Suite::Minimizer => "MINIMIZER",
        }
    }

    /// Trials per run when not given.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::ResidualOracle => 50,
            Suite::Minimizer => 10,
            _ => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Usage(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Inputs of a suite run. Unset options take suite defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteParams {
    pub m: usize,
    pub seed: u64,
    pub trials: Option<usize>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub steps: Option<usize>,
}

impl SuiteParams {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            seed: 0,
            trials: None,
            r_min: None,
            r_max: None,
            steps: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_grid(mut self, r_min: f64, r_max: f64, steps: usize) -> Self {
        self.r_min = Some(r_min);
        self.r_max = Some(r_max);
        self.steps = Some(steps);
        self
    }
}

/// Runs one suite. The report depends only on `(suite, params)`.
pub fn run_suite(suite: Suite, params: &SuiteParams) -> Result<Report> {
    if params.m < 3 {
        return Err(Error::param(format!("m must be at least 3, got {}", params.m)));
    }
    if params.trials == Some(0) || params.steps == Some(0) {
        return Err(Error::param("trials and steps must be positive"));
    }
    match suite {
        Suite::Ambient => suites::ambient(params),
        Suite::PointIdentities => suites::point_identities(params),
        Suite::Subspaces => suites::subspaces(params),
        Suite::ResidualOracle => suites::residual_oracle(params),
        Suite::ModelAScan => suites::model_scan(params, crate::model::Family::A),
        Suite::ModelBScan => suites::model_scan(params, crate::model::Family::B),
        Suite::ProofSteps => suites::proof_steps(params),
        Suite::Minimizer => suites::minimizer(params),
    }
}

/// Builds a parameter map from `(key, value)` pairs.
pub fn param_map<I, K, V>(items: I) -> BTreeMap<String, Value>
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<Value>,
{
    items.into_iter().map(|(k, v)| (k.into(), v.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_tolerance() {
        assert!(CheckResult::new("a", BTreeMap::new(), 1e-13, 1e-12).pass);
        assert!(!CheckResult::new("a", BTreeMap::new(), 2e-12, 1e-12).pass);
        assert!(!CheckResult::new("a", BTreeMap::new(), f64::NAN, 1.0).pass);
        assert!(CheckResult::new("a", BTreeMap::new(), 0.0, 0.0).pass);
    }

    #[test]
    fn summary_tallies_checks() {
        let mut r = Report::new("X", BTreeMap::new(), 0);
        r.push(CheckResult::new("a", BTreeMap::new(), 0.0, 1.0));
        r.push(CheckResult::new("b", BTreeMap::new(), 2.0, 1.0));
        assert_eq!(r.summary, Summary { pass: 1, fail: 1 });
        assert_eq!(r.failures().count(), 1);
        assert!(!r.all_pass());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("NOPE".parse::<Suite>(), Err(Error::Usage(_))));
    }

    #[test]
    fn small_m_rejected() {
        assert!(run_suite(Suite::Ambient, &SuiteParams::new(2)).is_err());
    }
}
