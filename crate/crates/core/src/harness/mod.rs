//! Scenario runner: basis, `p_D`, normalization, certified intervals,
//! Bergman kernel and every inequality check, point by point.
//!
//! Violations are recorded in the report, never raised. Each point draws
//! from its own ChaCha stream (`index + 1` under the run seed; stream 0 is
//! the sampler), so results do not depend on the worker count.

mod emit;
mod report;
mod scenario;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bergman::{
    bergman_closed, bergman_reinhardt, kernel_sandwich_check, ratio_check, BergmanError, BergmanValue,
    ReinhardtProfile,
};
use crate::domain::{uniform_in_ball, Backend, DomainSpec};
use crate::linalg::{CMatrix, CVector};
use crate::minimal_basis::{minimal_basis, BasisError, MinimalBasis};
use crate::normalization::{
    adversarial_lemma_point, beta_bound_ratio, c_n, lemma_l1, normalize, random_admissible_a, sample_sphere,
    verify_normalization, Normalization, NormalizationError,
};
use crate::volume::{
    bounded_domain_lower_bound, certified_interval_with_tau_error, monotonicity_bounds, p_d_within_diameter,
    quotient_lower_bound, Interval,
};

pub use emit::{emit, write_csv, write_json, write_sweep_csv, Format};
pub use report::{
    CheckRecord, Failure, NormalizationRecord, PointRecord, Provenance, Range, ScenarioReport, Status, Summary,
    SweepRow,
};
pub use scenario::{Check, RadialSweep, SamplerConfig, SamplerKind, Scenario, Tolerances};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    ConfigInvalid(String),
    #[error("domain rejected at the first point: step {step} of the basis found no boundary (witness {witness})")]
    DomainRejected { step: usize, witness: CVector },
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 picks the rayon default.
    pub workers: usize,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json(&text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))
}

struct Context<'a> {
    scenario: &'a Scenario,
    domain: DomainSpec,
    seed: u64,
}

/// Runs every requested check at every point of the scenario.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<ScenarioReport, HarnessError> {
    let start = Instant::now();
    let domain = scenario
        .domain
        .build()
        .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
    let n = domain.dim();
    let seed = options.seed.or(scenario.seed).unwrap_or(0);
    let slack = scenario.tolerances.slack;
    if !(slack.is_finite() && slack >= 0.0) {
        return Err(HarnessError::ConfigInvalid(format!("slack must be finite and non-negative, got {slack}")));
    }

    let mut points = Vec::with_capacity(scenario.points.len());
    for (i, z) in scenario.points.iter().enumerate() {
        match domain.contains(z) {
            Ok(true) => points.push(z.clone()),
            Ok(false) => return Err(HarnessError::ConfigInvalid(format!("point {i} lies outside the domain"))),
            Err(e) => return Err(HarnessError::ConfigInvalid(format!("point {i}: {e}"))),
        }
    }
    if let Some(sampler) = &scenario.sampler {
        points.extend(sample_points(&domain, sampler, seed)?);
    }

    // A degenerate domain is rejected outright rather than failing point by point.
    if let Some(z) = points.first() {
        if let Err(BasisError::DegenerateDomain { step, witness }) =
            minimal_basis(&domain, z, &scenario.tolerances.basis)
        {
            return Err(HarnessError::DomainRejected { step, witness });
        }
    }

    let ctx = Context {
        scenario,
        domain,
        seed,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| HarnessError::ConfigInvalid(format!("worker pool: {e}")))?;
    let records: Vec<PointRecord> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, z)| run_point(&ctx, i, z))
            .collect()
    });
    let sweep = match &scenario.radial_sweep {
        Some(s) => radial_sweep(&ctx.domain, s, &scenario.tolerances)?,
        None => Vec::new(),
    };

    let summary = summarize(&records, seed, start.elapsed().as_millis() as u64);
    let canonical = serde_json::to_vec(scenario).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
    Ok(ScenarioReport {
        id: scenario.id.clone(),
        dim: n,
        class: ctx.domain.class().as_str(),
        records,
        sweep,
        summary,
        provenance: Provenance {
            config_sha256: hex::encode(Sha256::digest(&canonical)),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn sample_points(domain: &DomainSpec, sampler: &SamplerConfig, seed: u64) -> Result<Vec<CVector>, HarnessError> {
    let n = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed.unwrap_or(seed));
    rng.set_stream(0);
    let mut out = Vec::with_capacity(sampler.count);
    let max_tries = 1000 * sampler.count.max(1);
    match sampler.kind {
        SamplerKind::Box => {
            let ball = domain.bounding_ball();
            let center = match (&sampler.center, &ball) {
                (Some(c), _) => c.clone(),
                (None, Some((c, _))) => c.clone(),
                (None, None) => return Err(HarnessError::ConfigInvalid("unbounded domain needs a sampling box".into())),
            };
            let half = match (sampler.half_width, &ball) {
                (Some(h), _) => h,
                (None, Some((_, r))) => *r,
                (None, None) => return Err(HarnessError::ConfigInvalid("unbounded domain needs a sampling box".into())),
            };
            if center.dim() != n || !(half > 0.0 && half.is_finite()) {
                return Err(HarnessError::ConfigInvalid("bad sampling box".into()));
            }
            let c = center.to_real();
            for _ in 0..max_tries {
                if out.len() == sampler.count {
                    break;
                }
                let x: Vec<f64> = c.iter().map(|ci| ci + half * (2.0 * rng.random::<f64>() - 1.0)).collect();
                let z = CVector::from_real_embedding(&x);
                if domain.contains(&z).unwrap_or(false) {
                    out.push(z);
                }
            }
        }
        SamplerKind::BallPushforward => {
            let oracle = domain
                .exact_oracle()
                .ok_or_else(|| HarnessError::ConfigInvalid("ball_pushforward needs an exact oracle".into()))?;
            if !(sampler.radius > 0.0 && sampler.radius < 1.0) {
                return Err(HarnessError::ConfigInvalid("pushforward radius must lie in (0, 1)".into()));
            }
            for _ in 0..max_tries {
                if out.len() == sampler.count {
                    break;
                }
                let z = oracle.forward(&uniform_in_ball(&mut rng, n).scale(sampler.radius));
                if z.is_finite() && domain.contains(&z).unwrap_or(false) {
                    out.push(z);
                }
            }
        }
    }
    if out.len() < sampler.count {
        log::warn!("sampler produced {} of {} points", out.len(), sampler.count);
    }
    Ok(out)
}

/// Closed form or transformation rule first, Reinhardt series second.
fn kernel(domain: &DomainSpec, z: &CVector, degree: usize) -> Result<Option<BergmanValue>, BergmanError> {
    match bergman_closed(domain, z) {
        Ok(k) => Ok(Some(k)),
        Err(BergmanError::UnsupportedDomain(_)) => match ReinhardtProfile::from_domain(domain) {
            Some(profile) => bergman_reinhardt(&profile, z, degree).map(Some),
            None => Ok(None),
        },
        Err(e) => Err(e),
    }
}

fn run_point(ctx: &Context<'_>, index: usize, z: &CVector) -> PointRecord {
    let scenario = ctx.scenario;
    let domain = &ctx.domain;
    let tol = &scenario.tolerances;
    let n = domain.dim();
    let class = domain.class();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    rng.set_stream(index as u64 + 1);

    let mut record = PointRecord {
        index,
        point: z.clone(),
        taus: Vec::new(),
        p_d: None,
        approximate: false,
        certified: None,
        monotonicity: None,
        exact_v: None,
        bergman: None,
        normalization: None,
        checks: Vec::new(),
        error: None,
    };
    let fail_all = |record: &mut PointRecord, msg: String| {
        record.checks = scenario.checks.iter().map(|&c| CheckRecord::error(c, msg.clone())).collect();
        record.error = Some(msg);
    };

    let basis = match minimal_basis(domain, z, &tol.basis) {
        Ok(b) => b,
        Err(e) => {
            fail_all(&mut record, format!("minimal basis: {e}"));
            return record;
        }
    };
    let p_d = basis.p_d();
    let eps = basis.tau_accuracy();
    record.taus = basis.taus.clone();
    record.p_d = Some(p_d);
    record.approximate = basis.approximate;

    let certified = match certified_interval_with_tau_error(class, n, p_d, eps, tol.slack) {
        Ok(i) => i,
        Err(e) => {
            fail_all(&mut record, format!("certified interval: {e}"));
            return record;
        }
    };
    let radius = domain.circumscribed_radius(z).unwrap_or(f64::INFINITY);
    let mono = monotonicity_bounds(&basis, radius);
    let exact_v = domain.exact_oracle().and_then(|_| domain.exact_volume_element(z).ok());
    record.certified = Some(certified);
    record.monotonicity = Some(mono);
    record.exact_v = exact_v;

    let wants_norm = scenario.wants(Check::Normalization) || scenario.wants(Check::LemmaInclusion);
    let norm = wants_norm.then(|| normalize(domain, &basis, tol.support_samples, &mut rng));
    if let Some(Ok(nm)) = &norm {
        record.normalization = Some(NormalizationRecord {
            alpha_max: nm.diagnostics.alpha_max,
            abs_det_t: nm.det_t.norm(),
            det_t_rel_error: nm.diagnostics.det_t_rel_error,
            triangularity_leakage: nm.diagnostics.triangularity_leakage,
        });
    }

    let wants_kernel = scenario.wants(Check::BergmanSandwich) || scenario.wants(Check::Ratio);
    let k = if wants_kernel {
        kernel(domain, z, tol.bergman_degree)
    } else {
        Ok(None)
    };
    if let Ok(Some(k)) = &k {
        record.bergman = Some(*k);
    }

    for &check in &scenario.checks {
        let rec = match check {
            Check::TheoremGe => match exact_v {
                Some(v) => CheckRecord::scored(check, Some(certified.lo), Some(certified.hi), Some(v), certified.containment_margin(v)),
                None => CheckRecord::scored(
                    check,
                    Some(certified.lo),
                    Some(certified.hi),
                    None,
                    certified.intersection_margin(&mono),
                )
                .with_detail("no exact oracle; overlap with the monotonicity interval"),
            },
            Check::Monotonicity => {
                let overlap = certified.intersection_margin(&mono);
                let margin = exact_v.map_or(overlap, |v| overlap.min(mono.containment_margin(v)));
                CheckRecord::scored(check, Some(mono.lo), Some(mono.hi), exact_v, margin)
            }
            Check::CorollaryQ => corollary_q(check, domain, exact_v),
            Check::CorollaryV => corollary_v(check, domain, &basis, &certified, exact_v),
            Check::Normalization => match &norm {
                Some(Ok(nm)) => normalization_check(check, domain, &basis, nm, tol.verify_samples, &mut rng),
                Some(Err(NormalizationError::UnsupportedBackend(b))) => {
                    CheckRecord::skipped(check, format!("no supporting hyperplanes for {b}"))
                }
                Some(Err(e)) => failed_normalization(check, e),
                None => unreachable!("normalization requested"),
            },
            Check::LemmaInclusion => {
                let a = match &norm {
                    Some(Ok(nm)) => nm.a.clone(),
                    _ => random_admissible_a(&mut rng, n, false),
                };
                lemma_check(check, &a, tol.verify_samples, &mut rng)
            }
            Check::BergmanSandwich | Check::Ratio => match &k {
                Ok(Some(k)) => {
                    if check == Check::BergmanSandwich {
                        let p_rel = (1.0 + eps).powi(n as i32) - 1.0;
                        let s = kernel_sandwich_check(class, n, k, p_d, p_rel);
                        CheckRecord::scored(check, Some(s.lower_bound), Some(s.upper_bound), Some(k.value * p_d * p_d), s.margin())
                    } else {
                        let r = ratio_check(class, n, &certified, k, exact_v);
                        CheckRecord::scored(check, Some(r.band.lo), Some(r.band.hi), r.exact_ratio, r.margin)
                    }
                }
                Ok(None) => CheckRecord::skipped(check, format!("no Bergman kernel for the {} backend", domain.backend().kind())),
                Err(e) => CheckRecord::error(check, format!("bergman kernel: {e}")),
            },
        };
        record.checks.push(rec);
    }
    record
}

fn corollary_q(check: Check, domain: &DomainSpec, exact_v: Option<f64>) -> CheckRecord {
    match quotient_lower_bound(domain.class(), domain.dim()) {
        // With an exact oracle c_D = k_D, so q_D = 1; otherwise only q_D <= 1 is known.
        Ok(q) => {
            let rec = CheckRecord::scored(check, Some(q.value), Some(1.0), exact_v.map(|_| 1.0), 1.0 / q.value - 1.0);
            if exact_v.is_some() {
                rec
            } else {
                rec.with_detail("bound compared with q_D <= 1 only")
            }
        }
        Err(e) => CheckRecord::error(check, e.to_string()),
    }
}

fn corollary_v(
    check: Check,
    domain: &DomainSpec,
    basis: &MinimalBasis,
    certified: &Interval,
    exact_v: Option<f64>,
) -> CheckRecord {
    let diam = domain.diameter();
    if !diam.is_finite() {
        return CheckRecord::skipped(check, "unbounded domain");
    }
    let lower = match bounded_domain_lower_bound(domain.class(), domain.dim(), diam) {
        Ok(l) => l,
        Err(e) => return CheckRecord::error(check, e.to_string()),
    };
    if !p_d_within_diameter(basis, diam, 1e-9) {
        return CheckRecord::scored(check, Some(lower), None, exact_v, -1.0).with_detail("some tau exceeds the diameter");
    }
    match exact_v {
        Some(v) => CheckRecord::scored(check, Some(lower), None, Some(v), v / lower - 1.0),
        None => CheckRecord::scored(check, Some(lower), None, None, certified.hi / lower - 1.0)
            .with_detail("no exact oracle; certified upper end compared with the bound"),
    }
}

fn normalization_check<R: Rng + ?Sized>(
    check: Check,
    domain: &DomainSpec,
    basis: &MinimalBasis,
    nm: &Normalization,
    samples: usize,
    rng: &mut R,
) -> CheckRecord {
    let d = &nm.diagnostics;
    let detail = format!(
        "alpha_max={:.6} det_t_rel_error={:.3e} leakage={:.3e}",
        d.alpha_max, d.det_t_rel_error, d.triangularity_leakage
    );
    if !d.within_tolerance() {
        return CheckRecord::scored(check, None, Some(1.0 + d.tolerances.alpha), Some(d.alpha_max), -1.0)
            .with_detail(format!("diagnostics out of tolerance: {detail}"));
    }
    match verify_normalization(domain, basis, nm, samples, rng) {
        Ok(v) => {
            let margin = v.halfspace_margin.map_or(v.en_inclusion_margin, |h| h.min(v.en_inclusion_margin));
            CheckRecord::scored(check, None, Some(1.0 + d.tolerances.alpha), Some(d.alpha_max), margin).with_detail(detail)
        }
        Err(e) => failed_normalization(check, &e),
    }
}

fn failed_normalization(check: Check, e: &NormalizationError) -> CheckRecord {
    let margin = match e {
        NormalizationError::InclusionViolated { margin, .. } => margin.min(-f64::MIN_POSITIVE),
        NormalizationError::NotSupporting { violation, .. } => -violation.abs(),
        NormalizationError::TriangularityViolated { leakage, .. } => -leakage.abs(),
        _ => return CheckRecord::error(check, e.to_string()),
    };
    CheckRecord::scored(check, None, None, None, margin).with_detail(e.to_string())
}

/// `1 - max sum_k |(A^{-1} w)_k|` over `|w| = (1 - 1e-6)/c_n`, combined with
/// the entrywise bound on `A^{-1}`.
fn lemma_check<R: Rng + ?Sized>(check: Check, a: &CMatrix, samples: usize, rng: &mut R) -> CheckRecord {
    let n = a.dim();
    let r = (1.0 - 1e-6) / c_n(n);
    let adversarial = (samples / 10).max(1);
    let mut max_l1: f64 = 0.0;
    for i in 0..samples.max(1) {
        let w = if i < adversarial {
            adversarial_lemma_point(rng, a, r)
        } else {
            sample_sphere(rng, n, r)
        };
        max_l1 = max_l1.max(lemma_l1(a, &w));
    }
    let beta = beta_bound_ratio(a);
    let margin = (1.0 - max_l1).min(1.0 + 1e-12 - beta);
    CheckRecord::scored(check, None, Some(1.0), Some(max_l1), margin).with_detail(format!("beta_ratio={beta:.6}"))
}

fn is_unit_ball(domain: &DomainSpec) -> bool {
    match domain.backend() {
        Backend::BallImage { matrix, center, .. } => {
            *matrix == CMatrix::identity(domain.dim()) && center.norm() == 0.0
        }
        _ => false,
    }
}

fn radial_sweep(domain: &DomainSpec, sweep: &RadialSweep, tol: &Tolerances) -> Result<Vec<SweepRow>, HarnessError> {
    let n = domain.dim();
    if domain.exact_oracle().is_none() {
        return Err(HarnessError::ConfigInvalid("radial sweep needs an exact oracle".into()));
    }
    let u = match &sweep.direction {
        Some(d) if d.dim() == n && d.norm() > 0.0 => d.scale(1.0 / d.norm()),
        Some(_) => return Err(HarnessError::ConfigInvalid("bad sweep direction".into())),
        None => CVector::basis(n, 0),
    };
    let unit_ball = is_unit_ball(domain);
    let mut rows = Vec::with_capacity(sweep.count);
    for i in 0..sweep.count {
        let r = if sweep.count > 1 {
            sweep.max_radius * i as f64 / (sweep.count - 1) as f64
        } else {
            0.0
        };
        let z = u.scale(r);
        if !domain.contains(&z).unwrap_or(false) {
            return Err(HarnessError::ConfigInvalid(format!("sweep radius {r} leaves the domain")));
        }
        let basis = minimal_basis(domain, &z, &tol.basis).map_err(|e| HarnessError::ConfigInvalid(format!("sweep radius {r}: {e}")))?;
        let v = domain
            .exact_volume_element(&z)
            .map_err(|e| HarnessError::ConfigInvalid(format!("sweep radius {r}: {e}")))?;
        rows.push(SweepRow {
            radius: r,
            v_p2: v * basis.p_d().powi(2),
            expected: unit_ball.then(|| (1.0 + r).powi(-2)),
        });
    }
    Ok(rows)
}

fn summarize(records: &[PointRecord], seed: u64, runtime_ms: u64) -> Summary {
    let mut failures = Vec::new();
    let mut min_margins: BTreeMap<Check, f64> = BTreeMap::new();
    let mut range: Option<Range> = None;
    for rec in records {
        for c in &rec.checks {
            if let Some(m) = c.margin.filter(|m| m.is_finite()) {
                let e = min_margins.entry(c.check).or_insert(m);
                *e = e.min(m);
            }
            if c.status == Status::Fail {
                failures.push(Failure {
                    index: rec.index,
                    point: rec.point.clone(),
                    seed,
                    check: c.check,
                    margin: c.margin,
                    detail: c.detail.clone(),
                });
            }
        }
        if let Some(x) = rec.v_p2() {
            range = Some(match range {
                Some(r) => Range {
                    min: r.min.min(x),
                    max: r.max.max(x),
                    count: r.count + 1,
                },
                None => Range { min: x, max: x, count: 1 },
            });
        }
    }
    Summary {
        points: records.len(),
        failures,
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        approximate: records.iter().any(|r| r.approximate),
        min_margins,
        empirical_v_p2: range,
        runtime_ms,
    }
}
