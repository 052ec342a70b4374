//! Report records produced by a scenario run.

use std::collections::BTreeMap;

use serde::Serialize;

use super::scenario::Check;
use crate::bergman::BergmanValue;
use crate::linalg::CVector;
use crate::volume::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Negative margin: the inequality is violated beyond the slack.
    Fail,
    /// The check does not apply to this backend or point.
    Skipped,
    /// The pipeline could not produce the inputs of the check.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: Check,
    pub status: Status,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// Exact value compared against `[lo, hi]`, when one exists.
    pub oracle: Option<f64>,
    /// Nonnegative exactly when the check passes.
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub(crate) fn scored(check: Check, lo: Option<f64>, hi: Option<f64>, oracle: Option<f64>, margin: f64) -> Self {
        Self {
            check,
            status: if margin >= 0.0 { Status::Pass } else { Status::Fail },
            lo,
            hi,
            oracle,
            margin: Some(margin),
            detail: None,
        }
    }

    pub(crate) fn skipped(check: Check, why: impl Into<String>) -> Self {
        Self {
            check,
            status: Status::Skipped,
            lo: None,
            hi: None,
            oracle: None,
            margin: None,
            detail: Some(why.into()),
        }
    }

    pub(crate) fn error(check: Check, why: impl Into<String>) -> Self {
        Self {
            status: Status::Error,
            ..Self::skipped(check, why)
        }
    }

    pub(crate) fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Summary of `A` and `T` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationRecord {
    pub alpha_max: f64,
    pub abs_det_t: f64,
    pub det_t_rel_error: f64,
    pub triangularity_leakage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: CVector,
    pub taus: Vec<f64>,
    pub p_d: Option<f64>,
    pub approximate: bool,
    /// Interval for `v_D(z)` from `p_D`.
    pub certified: Option<Interval>,
    /// Interval for `v_D(z)` from inscribed and circumscribed balls.
    pub monotonicity: Option<Interval>,
    pub exact_v: Option<f64>,
    pub bergman: Option<BergmanValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationRecord>,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PointRecord {
    /// `v p_D^2` when the exact volume element is known.
    pub fn v_p2(&self) -> Option<f64> {
        Some(self.exact_v? * self.p_d?.powi(2))
    }
}

/// Everything needed to rerun a failing point in isolation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    pub point: CVector,
    pub seed: u64,
    pub check: Check,
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub points: usize,
    pub failures: Vec<Failure>,
    /// Points whose pipeline stopped with an error.
    pub errors: usize,
    pub approximate: bool,
    pub min_margins: BTreeMap<Check, f64>,
    /// Observed `v p_D^2` over exact-oracle points; data only.
    pub empirical_v_p2: Option<Range>,
    /// Wall-clock time; the only field that differs between identical runs.
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    /// SHA-256 of the canonical JSON form of the scenario.
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub radius: f64,
    pub v_p2: f64,
    /// `1 / (1 + r)^2`, only for the unit ball.
    pub expected: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub dim: usize,
    pub class: &'static str,
    pub records: Vec<PointRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    pub summary: Summary,
    pub provenance: Provenance,
}

impl ScenarioReport {
    pub fn has_failures(&self) -> bool {
        !self.summary.failures.is_empty()
    }
}
