//! The normalizing maps `T` and `A` attached to a minimal basis.
//!
//! With `z` moved to the origin, `T` sends each `p^j - z` to `e_j`, and `A`
//! is the unit lower-triangular map that turns the supporting hyperplanes
//! at the `p^j` into the coordinate hyperplanes `{Re Z_j = 1}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Backend, ConvexityClass, DomainError, DomainSpec};
use crate::linalg::{c, CMatrix, CVector, LinalgError, C64};
use crate::minimal_basis::MinimalBasis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizationError {
    #[error("minimal basis directions are not orthogonal (residual {residual:e})")]
    SingularBasis { residual: f64 },
    #[error("normal {j} does not support the domain (worst relative violation {violation:e})")]
    NotSupporting {
        j: usize,
        violation: f64,
        witness: CVector,
    },
    #[error("no supporting hyperplane computation for {0}")]
    UnsupportedBackend(String),
    #[error("row {j} of A leaks into column {k} (|m_jk| = {leakage:e})")]
    TriangularityViolated { j: usize, k: usize, leakage: f64 },
    #[error("inclusion check '{check}' failed (margin {margin:e})")]
    InclusionViolated {
        check: &'static str,
        margin: f64,
        witness: CVector,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `c_n = sqrt(4^n - 1) / sqrt(3)`.
pub fn c_n(n: usize) -> f64 {
    ((4f64.powi(n as i32) - 1.0) / 3.0).sqrt()
}

/// Acceptance thresholds; looser for bases found by the sampled polar search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTolerances {
    pub removed_mass: f64,
    pub imag_residue: f64,
    pub support: f64,
    pub triangularity: f64,
    pub alpha: f64,
    pub inclusion: f64,
}

impl NormalizationTolerances {
    pub fn exact() -> Self {
        Self {
            removed_mass: 1e-6,
            imag_residue: 1e-8,
            support: 1e-6,
            triangularity: 1e-6,
            alpha: 1e-4,
            inclusion: 1e-9,
        }
    }

    pub fn approximate() -> Self {
        Self {
            removed_mass: 1e-2,
            imag_residue: 1e-3,
            support: 1e-2,
            triangularity: 1e-6,
            alpha: 1e-2,
            inclusion: 1e-3,
        }
    }

    pub fn for_basis(basis: &MinimalBasis) -> Self {
        if basis.approximate {
            Self::approximate()
        } else {
            Self::exact()
        }
    }
}

/// `T(x) = sum_j <x - z, p^j - z> / tau_j^2 e_j`, as a matrix acting on `x - z`.
pub fn build_t(basis: &MinimalBasis) -> Result<CMatrix, NormalizationError> {
    if basis.ortho_residual > 1e-5 {
        return Err(NormalizationError::SingularBasis {
            residual: basis.ortho_residual,
        });
    }
    let rows: Vec<Vec<C64>> = basis
        .boundary_points
        .iter()
        .zip(&basis.taus)
        .map(|(p, tau)| {
            let ph = p.sub(&basis.base_point);
            ph.entries().iter().map(|x| x.conj() / (tau * tau)).collect()
        })
        .collect();
    Ok(CMatrix::from_rows(&rows)?)
}

/// `T^{-1}`: its columns are the `p^j - z`.
fn t_inverse(basis: &MinimalBasis) -> CMatrix {
    let n = basis.dim();
    let cols: Vec<CVector> = basis
        .boundary_points
        .iter()
        .map(|p| p.sub(&basis.base_point))
        .collect();
    CMatrix::new(DMatrix::from_fn(n, n, |i, j| cols[j].get(i))).expect("finite points")
}

/// A supporting normal at `p^j` after triangular post-processing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportingNormal {
    /// Scaled so that `<p^j - z, normal> = 1`.
    pub normal: CVector,
    /// Relative norm of the part outside `span(d^1, .., d^j)` that was removed.
    pub removed_mass: f64,
    /// `|Im s| / |s|` for `s = <p^j - z, normal>` before rescaling.
    pub imag_residue: f64,
    /// Largest sampled `Re <x - p, normal> / (|normal| |x - p|)`; nonpositive when supporting.
    pub support_violation: f64,
}

/// Outward normals of the backend at `p`, each with the slack of its defining piece.
fn candidate_normals(
    domain: &DomainSpec,
    basis: &MinimalBasis,
    j: usize,
) -> Result<Vec<(CVector, f64)>, NormalizationError> {
    let p = &basis.boundary_points[j];
    let n = domain.dim();
    Ok(match domain.backend() {
        Backend::Halfspace { constraints, .. } => constraints
            .iter()
            .map(|con| (con.normal.clone(), con.slack(p) / con.normal.norm()))
            .collect(),
        Backend::BallImage {
            inverse, center, ..
        } => {
            let u = inverse.apply(&p.sub(center));
            vec![(inverse.adjoint().apply(&u), 0.0)]
        }
        Backend::Siegel => {
            let mut v = DVector::<C64>::zeros(n);
            for k in 0..n - 1 {
                v[k] = p.get(k) * 2.0;
            }
            v[n - 1] = c(0.0, -1.0);
            vec![(CVector::from_dvector(v), 0.0)]
        }
        Backend::Polydisc { center, radii } => (0..n)
            .map(|k| {
                let w = p.get(k) - center.get(k);
                let mut v = DVector::<C64>::zeros(n);
                v[k] = w;
                (CVector::from_dvector(v), radii[k] - w.norm())
            })
            .collect(),
        Backend::L1Ball { scale } => {
            let v = DVector::from_fn(n, |k, _| {
                let x = p.get(k);
                if x.norm() > 1e-12 * scale {
                    x / x.norm()
                } else {
                    c(0.0, 0.0)
                }
            });
            vec![(CVector::from_dvector(v), 0.0)]
        }
        Backend::Oracle(o) => match domain.class() {
            ConvexityClass::Convex => vec![(oracle_normal(domain, basis, j, o.search_radius), 0.0)],
            ConvexityClass::CConvex => {
                return Err(NormalizationError::UnsupportedBackend(format!(
                    "c_convex membership oracle '{}'",
                    o.name
                )))
            }
        },
    })
}

/// Exit radius along a unit direction from an interior point of a convex domain.
fn exit_radius(domain: &DomainSpec, z: &CVector, u: &CVector, hint: f64, limit: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = hint;
    while domain.contains_unchecked(&z.axpy(hi, u)) {
        lo = hi;
        hi *= 2.0;
        if hi > limit {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if domain.contains_unchecked(&z.axpy(mid, u)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Outward normal of a convex membership domain at `p^j` from central
/// differences of the radial boundary map around the direction `d^j`.
fn oracle_normal(domain: &DomainSpec, basis: &MinimalBasis, j: usize, limit: f64) -> CVector {
    let z = &basis.base_point;
    let d = basis.directions[j].to_real();
    let dim = d.len();
    let tau = basis.taus[j];
    let h = 1e-4;
    let tangents_basis = real_complement(&d);
    let mut tangents: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for e in &tangents_basis {
        let mut pts = Vec::with_capacity(2);
        for s in [1.0, -1.0] {
            let mut u: Vec<f64> = d.iter().zip(e).map(|(a, b)| a + s * h * b).collect();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            u.iter_mut().for_each(|x| *x /= norm);
            let uc = CVector::from_real_embedding(&u);
            let r = exit_radius(domain, z, &uc, tau, limit).unwrap_or(limit);
            pts.push(u.iter().map(|x| x * r).collect::<Vec<f64>>());
        }
        tangents.push(pts[0].iter().zip(&pts[1]).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    // Orthonormalize the tangents, then remove them from d.
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for t in tangents {
        let mut v = t;
        for _ in 0..2 {
            for q in &ortho {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= norm);
            ortho.push(v);
        }
    }
    let mut nu = d.clone();
    for q in &ortho {
        let dot: f64 = q.iter().zip(&nu).map(|(a, b)| a * b).sum();
        nu.iter_mut().zip(q).for_each(|(x, y)| *x -= dot * y);
    }
    CVector::from_real_embedding(&nu)
}

/// Orthonormal basis of the orthogonal complement of a unit vector in `R^m`.
fn real_complement(d: &[f64]) -> Vec<Vec<f64>> {
    let m = d.len();
    let mut accepted = vec![d.to_vec()];
    let mut out = Vec::new();
    for k in 0..m {
        if out.len() == m - 1 {
            break;
        }
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for _ in 0..2 {
            for q in &accepted {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            accepted.push(v.clone());
            out.push(v);
        }
    }
    out
}

/// Supporting normal at `p^j` (zero based `j`), projected onto
/// `span(d^1, .., d^{j+1})` and scaled so that `<p^j - z, nu> = 1`.
///
/// The support property is checked on `support_samples` points of `D`,
/// half near `z` and half near `p^j`.
pub fn supporting_normal<R: Rng + ?Sized>(
    domain: &DomainSpec,
    basis: &MinimalBasis,
    j: usize,
    support_samples: usize,
    rng: &mut R,
) -> Result<SupportingNormal, NormalizationError> {
    let n = domain.dim();
    if basis.dim() != n {
        return Err(DomainError::DimensionMismatch {
            expected: n,
            found: basis.dim(),
        }
        .into());
    }
    let tol = NormalizationTolerances::for_basis(basis);
    let z = &basis.base_point;
    let p = &basis.boundary_points[j];
    let ph = p.sub(z);
    let candidates = candidate_normals(domain, basis, j)?;
    let min_slack = candidates.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
    let active_tol = if basis.approximate { 1e-6 } else { 1e-9 } * (1.0 + p.norm());

    let project = |v: &CVector| -> CVector {
        let mut out = CVector::zeros(n);
        for d in &basis.directions[..=j] {
            out = out.add(&d.scale_complex(v.inner(d)));
        }
        out
    };

    let mut best: Option<(f64, CVector)> = None;
    for (nu, slack) in &candidates {
        let norm = nu.norm();
        if norm == 0.0 || *slack > min_slack.max(0.0) + active_tol {
            continue;
        }
        let projected = project(nu);
        let removed = nu.sub(&projected).norm() / norm;
        if best.as_ref().is_none_or(|(r, _)| removed < *r) {
            best = Some((removed, projected));
        }
    }
    let (removed_mass, projected) = best.ok_or_else(|| {
        NormalizationError::UnsupportedBackend(format!("{} backend without an active normal", domain.backend().kind()))
    })?;
    let s = ph.inner(&projected);
    if s.norm() == 0.0 {
        return Err(NormalizationError::NotSupporting {
            j,
            violation: f64::INFINITY,
            witness: p.clone(),
        });
    }
    let imag_residue = s.im.abs() / s.norm();
    // <ph, nu / conj(s)> = <ph, nu> / s = 1.
    let normal = projected.scale_complex(c(1.0, 0.0) / s.conj());

    let mut worst = f64::NEG_INFINITY;
    let mut witness = p.clone();
    let half = support_samples / 2;
    let tau_n = basis.taus.iter().cloned().fold(0.0, f64::max);
    let mut samples = domain.sample_in_ball(rng, z, 2.0 * tau_n, half);
    samples.extend(domain.sample_in_ball(rng, p, 0.5 * basis.taus[0], support_samples - half));
    let nn = normal.norm();
    for x in samples {
        let dx = x.sub(p);
        let dn = dx.norm();
        if dn == 0.0 {
            continue;
        }
        let v = dx.inner(&normal).re / (nn * dn);
        if v > worst {
            worst = v;
            witness = x;
        }
    }
    if worst > tol.support {
        return Err(NormalizationError::NotSupporting {
            j,
            violation: worst,
            witness,
        });
    }
    Ok(SupportingNormal {
        normal,
        removed_mass,
        imag_residue,
        support_violation: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AMatrix {
    pub a: CMatrix,
    /// `max |m_jk| / |m_j|` over `k > j`.
    pub triangularity_leakage: f64,
    pub alpha_max: f64,
    pub alpha_bound_violated: bool,
}

/// Builds `A` from normals scaled so that `<p^j - z, nu_j> = 1`.
///
/// Row `j` holds `conj(m_jk) / conj(m_jj)` with `m_jk = <nu_j, p^k - z>`, the
/// coefficients of the hyperplane `Re <x - z, nu_j> = 1` in `T` coordinates.
pub fn build_a(basis: &MinimalBasis, normals: &[CVector]) -> Result<AMatrix, NormalizationError> {
    let n = basis.dim();
    let tol = NormalizationTolerances::for_basis(basis);
    let ph: Vec<CVector> = basis
        .boundary_points
        .iter()
        .map(|p| p.sub(&basis.base_point))
        .collect();
    let mut rows = vec![vec![c(0.0, 0.0); n]; n];
    let mut leakage: f64 = 0.0;
    let mut alpha_max: f64 = 0.0;
    for j in 0..n {
        let m: Vec<C64> = (0..n).map(|k| normals[j].inner(&ph[k])).collect();
        let m_norm = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for (k, mk) in m.iter().enumerate().skip(j + 1) {
            let rel = mk.norm() / m_norm;
            leakage = leakage.max(rel);
            if rel > tol.triangularity {
                return Err(NormalizationError::TriangularityViolated {
                    j,
                    k,
                    leakage: rel,
                });
            }
        }
        let diag = m[j].conj();
        for k in 0..=j {
            rows[j][k] = if k == j { c(1.0, 0.0) } else { m[k].conj() / diag };
            if k < j {
                alpha_max = alpha_max.max(rows[j][k].norm());
            }
        }
    }
    Ok(AMatrix {
        a: CMatrix::from_rows(&rows)?,
        triangularity_leakage: leakage,
        alpha_max,
        alpha_bound_violated: alpha_max > 1.0 + tol.alpha,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationDiagnostics {
    pub removed_mass: Vec<f64>,
    pub imag_residue: Vec<f64>,
    pub support_violation: Vec<f64>,
    pub triangularity_leakage: f64,
    pub alpha_max: f64,
    pub alpha_bound_violated: bool,
    /// `| |det T| prod tau_j - 1 |`.
    pub det_t_rel_error: f64,
    pub tolerances: NormalizationTolerances,
}

impl NormalizationDiagnostics {
    /// True when every residual is inside its tolerance.
    pub fn within_tolerance(&self) -> bool {
        let t = &self.tolerances;
        self.removed_mass.iter().all(|&r| r <= t.removed_mass)
            && self.imag_residue.iter().all(|&r| r <= t.imag_residue)
            && !self.alpha_bound_violated
            && self.det_t_rel_error <= 1e-9
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub t: CMatrix,
    pub t_inverse: CMatrix,
    pub a: CMatrix,
    pub normals: Vec<CVector>,
    #[serde(with = "crate::linalg::complex_pair")]
    pub det_t: C64,
    pub class: ConvexityClass,
    pub diagnostics: NormalizationDiagnostics,
}

impl Normalization {
    /// `A T (x - z)`.
    pub fn apply(&self, z: &CVector, x: &CVector) -> CVector {
        self.a.apply(&self.t.apply(&x.sub(z)))
    }
}

/// Runs `build_t`, `supporting_normal` for every `j`, and `build_a`.
pub fn normalize<R: Rng + ?Sized>(
    domain: &DomainSpec,
    basis: &MinimalBasis,
    support_samples: usize,
    rng: &mut R,
) -> Result<Normalization, NormalizationError> {
    let t = build_t(basis)?;
    let n = basis.dim();
    let mut normals = Vec::with_capacity(n);
    let mut removed_mass = Vec::with_capacity(n);
    let mut imag_residue = Vec::with_capacity(n);
    let mut support_violation = Vec::with_capacity(n);
    for j in 0..n {
        let s = supporting_normal(domain, basis, j, support_samples, rng)?;
        removed_mass.push(s.removed_mass);
        imag_residue.push(s.imag_residue);
        support_violation.push(s.support_violation);
        normals.push(s.normal);
    }
    let a = build_a(basis, &normals)?;
    let det_t = t.determinant();
    let det_t_rel_error = (det_t.norm() * basis.p_d() - 1.0).abs();
    Ok(Normalization {
        t_inverse: t_inverse(basis),
        t,
        a: a.a,
        normals,
        det_t,
        class: domain.class(),
        diagnostics: NormalizationDiagnostics {
            removed_mass,
            imag_residue,
            support_violation,
            triangularity_leakage: a.triangularity_leakage,
            alpha_max: a.alpha_max,
            alpha_bound_violated: a.alpha_bound_violated,
            det_t_rel_error,
            tolerances: NormalizationTolerances::for_basis(basis),
        },
    })
}

/// Solves `A x = w` for unit lower-triangular `A`.
pub fn unit_lower_solve(a: &CMatrix, w: &CVector) -> CVector {
    let n = a.dim();
    let mut x = DVector::<C64>::zeros(n);
    for j in 0..n {
        let mut acc = w.get(j);
        for k in 0..j {
            acc -= a.get(j, k) * x[k];
        }
        x[j] = acc;
    }
    CVector::from_dvector(x)
}

/// `sum_k |(A^{-1} w)_k|`.
pub fn lemma_l1(a: &CMatrix, w: &CVector) -> f64 {
    unit_lower_solve(a, w).l1_norm()
}

/// Uniform point of the `l1` unit ball of `C^n` in moduli, with uniform phases.
pub fn sample_l1_ball<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let e: Vec<f64> = (0..=n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    let entries = (0..n)
        .map(|k| {
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            C64::from_polar(e[k] / total, theta)
        })
        .collect();
    CVector::new(entries).expect("finite sample")
}

/// Point of the sphere of radius `r` in `C^n`, uniformly distributed.
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> CVector {
    let g = crate::linalg::random_gaussian(rng, n);
    let norm = g.norm();
    CVector::from_dvector(g * c(r / norm, 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Smallest defining-function margin of `z + T^{-1} w` over sampled `w in E_n`.
    pub en_inclusion_margin: f64,
    /// `1 - max sum_k |(A^{-1} w)_k|` over sampled `|w| = (1 - 1e-6) / c_n`.
    pub lemma_margin: f64,
    /// `1 - max_j Re Z_j` over sampled `Z = A T (x - z)`, `x in D` (convex class only).
    pub halfspace_margin: Option<f64>,
    pub samples: usize,
}

impl VerificationReport {
    pub fn min_margin(&self) -> f64 {
        let m = self.en_inclusion_margin.min(self.lemma_margin);
        self.halfspace_margin.map_or(m, |h| m.min(h))
    }
}

/// Sampled checks of `E_n ⊂ T(D)`, `(1/c_n) B ⊂ A(E_n)` and, for convex
/// domains, `A T(D) ⊂ {Re Z_j < 1}`.
pub fn verify_normalization<R: Rng + ?Sized>(
    domain: &DomainSpec,
    basis: &MinimalBasis,
    norm: &Normalization,
    samples: usize,
    rng: &mut R,
) -> Result<VerificationReport, NormalizationError> {
    let n = domain.dim();
    let tol = NormalizationTolerances::for_basis(basis);
    let z = &basis.base_point;

    // E_n inside T(D): shrink by the inclusion tolerance.
    let shrink = 1.0 - tol.inclusion;
    let mut en_margin = f64::INFINITY;
    let mut en_witness = z.clone();
    for _ in 0..samples {
        let w = sample_l1_ball(rng, n).scale(shrink);
        let x = z.add(&norm.t_inverse.apply(&w));
        let m = domain.margin_unchecked(&x);
        if m < en_margin {
            en_margin = m;
            en_witness = x;
        }
    }
    if en_margin <= 0.0 {
        return Err(NormalizationError::InclusionViolated {
            check: "en_in_t_domain",
            margin: en_margin,
            witness: en_witness,
        });
    }

    let r = (1.0 - 1e-6) / c_n(n);
    let mut lemma_max: f64 = 0.0;
    let mut lemma_witness = z.clone();
    for _ in 0..samples {
        let w = sample_sphere(rng, n, r);
        let s = lemma_l1(&norm.a, &w);
        if s > lemma_max {
            lemma_max = s;
            lemma_witness = w;
        }
    }
    let lemma_margin = 1.0 - lemma_max;
    if lemma_margin <= 0.0 {
        return Err(NormalizationError::InclusionViolated {
            check: "lemma_ball_in_a_en",
            margin: lemma_margin,
            witness: lemma_witness,
        });
    }

    let halfspace_margin = if norm.class == ConvexityClass::Convex {
        let tau_n = basis.taus.iter().cloned().fold(0.0, f64::max);
        let (center, radius) = domain
            .bounding_ball()
            .unwrap_or_else(|| (z.clone(), 4.0 * tau_n));
        let half = samples / 2;
        let mut pts = domain.sample_in_ball(rng, &center, radius, half);
        let per_point = (samples - half) / n;
        for p in &basis.boundary_points {
            pts.extend(domain.sample_in_ball(rng, p, 0.5 * basis.taus[0], per_point));
        }
        let mut worst = f64::INFINITY;
        let mut witness = z.clone();
        for x in pts {
            let zz = norm.apply(z, &x);
            let m = zz.entries().iter().map(|v| 1.0 - v.re).fold(f64::INFINITY, f64::min);
            if m < worst {
                worst = m;
                witness = x;
            }
        }
        if worst < -tol.inclusion {
            return Err(NormalizationError::InclusionViolated {
                check: "at_domain_in_halfspaces",
                margin: worst,
                witness,
            });
        }
        Some(worst)
    } else {
        None
    };
    Ok(VerificationReport {
        en_inclusion_margin: en_margin,
        lemma_margin,
        halfspace_margin,
        samples,
    })
}

/// Random unit lower-triangular matrix with `|alpha_jk| <= 1`; moduli are
/// uniform in `[0, 1]`, or all equal to one when `extremal`.
pub fn random_admissible_a<R: Rng + ?Sized>(rng: &mut R, n: usize, extremal: bool) -> CMatrix {
    let rows: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    if k == j {
                        c(1.0, 0.0)
                    } else if k < j {
                        let modulus = if extremal { 1.0 } else { rng.random::<f64>() };
                        C64::from_polar(modulus, rng.random::<f64>() * std::f64::consts::TAU)
                    } else {
                        c(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    CMatrix::from_rows(&rows).expect("finite")
}

/// `max_{j>k} |beta_jk| / 2^{j-k-1}` for `B = A^{-1}`.
pub fn beta_bound_ratio(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let col = unit_lower_solve(a, &CVector::basis(n, k));
        for j in k + 1..n {
            worst = worst.max(col.get(j).norm() / 2f64.powi((j - k - 1) as i32));
        }
    }
    worst
}

/// A point of the sphere of radius `r` where `sum |(A^{-1} w)_k|` is locally
/// maximal, by alternating phase and direction updates.
pub fn adversarial_lemma_point<R: Rng + ?Sized>(rng: &mut R, a: &CMatrix, r: f64) -> CVector {
    let n = a.dim();
    let b = a.inverse().expect("unit triangular is invertible");
    let b_adj = b.adjoint();
    let mut w = sample_sphere(rng, n, r);
    for _ in 0..30 {
        let y = b.apply(&w);
        let u = CVector::from_dvector(DVector::from_fn(n, |k, _| {
            let v = y.get(k);
            if v.norm() > 0.0 {
                v / v.norm()
            } else {
                c(1.0, 0.0)
            }
        }));
        let g = b_adj.apply(&u);
        w = g.scale(r / g.norm());
    }
    w
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    pub trials: usize,
    pub points_per_trial: usize,
    pub max_l1: f64,
    pub max_beta_ratio: f64,
    pub l1_violations: usize,
    pub beta_violations: usize,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.l1_violations == 0 && self.beta_violations == 0
    }
}

/// Universal form of the ball inclusion over random admissible `A`.
///
/// A quarter of the trials use `|alpha_jk| = 1`; each trial spends a tenth of
/// its points on locally worst directions.
pub fn check_lemma<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    trials: usize,
    points_per_trial: usize,
) -> LemmaReport {
    let r = (1.0 - 1e-6) / c_n(n);
    let mut report = LemmaReport {
        n,
        trials,
        points_per_trial,
        max_l1: 0.0,
        max_beta_ratio: 0.0,
        l1_violations: 0,
        beta_violations: 0,
    };
    let adversarial = points_per_trial / 10;
    for t in 0..trials {
        let a = random_admissible_a(rng, n, t % 4 == 0);
        let beta = beta_bound_ratio(&a);
        report.max_beta_ratio = report.max_beta_ratio.max(beta);
        if beta > 1.0 + 1e-12 {
            report.beta_violations += 1;
        }
        for i in 0..points_per_trial {
            let w = if i < adversarial {
                adversarial_lemma_point(rng, &a, r)
            } else {
                sample_sphere(rng, n, r)
            };
            let s = lemma_l1(&a, &w);
            report.max_l1 = report.max_l1.max(s);
            if s >= 1.0 {
                report.l1_violations += 1;
            }
        }
    }
    report
}
