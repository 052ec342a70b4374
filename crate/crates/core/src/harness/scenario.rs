//! JSON scenario format.

use serde::{Deserialize, Serialize};

use crate::domain::DomainConfig;
use crate::linalg::CVector;
use crate::minimal_basis::BasisConfig;

/// Inequality checks a scenario can request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    TheoremGe,
    LemmaInclusion,
    Normalization,
    CorollaryQ,
    CorollaryV,
    BergmanSandwich,
    Ratio,
    Monotonicity,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::TheoremGe,
        Check::LemmaInclusion,
        Check::Normalization,
        Check::CorollaryQ,
        Check::CorollaryV,
        Check::BergmanSandwich,
        Check::Ratio,
        Check::Monotonicity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::TheoremGe => "theorem_ge",
            Check::LemmaInclusion => "lemma_inclusion",
            Check::Normalization => "normalization",
            Check::CorollaryQ => "corollary_q",
            Check::CorollaryV => "corollary_v",
            Check::BergmanSandwich => "bergman_sandwich",
            Check::Ratio => "ratio",
            Check::Monotonicity => "monotonicity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Rejection sampling in an axis-aligned box of `R^{2n}`.
    Box,
    /// Images of uniform points of `r B^n` under the domain's exact oracle.
    BallPushforward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub count: usize,
    /// Overrides the scenario seed for sampling only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Box center; defaults to the center of the domain's bounding ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<CVector>,
    /// Half side length of the box; defaults to the bounding-ball radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// Radius of the preimage ball for `ball_pushforward`.
    #[serde(default = "default_pushforward_radius")]
    pub radius: f64,
}

fn default_pushforward_radius() -> f64 {
    0.95
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative outward inflation of every certified interval.
    pub slack: f64,
    pub basis: BasisConfig,
    /// Samples per supporting-hyperplane test.
    pub support_samples: usize,
    /// Samples per normalization inclusion check.
    pub verify_samples: usize,
    /// Truncation degree of the Reinhardt series.
    pub bergman_degree: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slack: crate::volume::DEFAULT_SLACK,
            basis: BasisConfig::default(),
            support_samples: 200,
            verify_samples: 1000,
            bergman_degree: 40,
        }
    }
}

/// Points `r u` for `count` radii evenly spaced in `[0, max_radius]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSweep {
    pub count: usize,
    pub max_radius: f64,
    /// Unit direction `u`; defaults to `e_1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<CVector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub domain: DomainConfig,
    #[serde(default)]
    pub points: Vec<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_sweep: Option<RadialSweep>,
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn wants(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_uses_defaults() {
        let s = Scenario::from_json(
            r#"{"id": "b", "domain": {"variant": "polydisc", "n": 2,
                "center": [[0,0],[0,0]], "radii": [1, 1]}}"#,
        )
        .unwrap();
        assert_eq!(s.checks, Check::ALL.to_vec());
        assert_eq!(s.tolerances, Tolerances::default());
        assert!(s.points.is_empty());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r = Scenario::from_json(
            r#"{"id": "b", "domain": {"variant": "siegel", "n": 2}, "pionts": []}"#,
        );
        assert!(r.is_err());
        let r = Scenario::from_json(
            r#"{"id": "b", "domain": {"variant": "siegel", "n": 2}, "checks": ["theorem"]}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn round_trip() {
        let s = Scenario::from_json(
            r#"{"id": "s", "domain": {"variant": "siegel", "n": 2},
                "sampler": {"kind": "ball_pushforward", "count": 5},
                "checks": ["theorem_ge", "ratio"], "seed": 9,
                "tolerances": {"slack": 1e-6}}"#,
        )
        .unwrap();
        let back = Scenario::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.tolerances.support_samples, 200);
        assert_eq!(s.sampler.unwrap().radius, 0.95);
    }
}
