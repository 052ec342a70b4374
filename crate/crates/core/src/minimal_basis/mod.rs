//! Iterated nearest-boundary construction.
//!
//! Starting from `H_0 = C^n`, step `j` finds the distance `tau_j` from the
//! base point `z` to `∂D ∩ (z + H_{j-1})` and a point `p^j` realising it,
//! then restricts to the orthogonal complement of `p^j - z` inside
//! `H_{j-1}`. The product of the `tau_j` is `p_D(z)`.

mod polar;
mod quadric;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Backend, DomainError, DomainSpec};
use crate::linalg::{c, gram_residual, orthonormal_complement, CVector, C64};

use self::polar::{PolarOutcome, PolarParams};
use self::quadric::{Quadric, QuadricOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("point lies outside the domain")]
    PointOutsideDomain,
    #[error("no boundary point within the search radius along direction {witness:?}")]
    Unbounded { witness: CVector },
    #[error("degenerate domain: step {step} found no boundary point (ray along {witness:?} stays inside)")]
    DegenerateDomain { step: usize, witness: CVector },
    #[error("point is too close to the boundary (tau = {tau:e})")]
    PointTooCloseToBoundary { tau: f64 },
    #[error("invalid slice basis: {0}")]
    BadSlice(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Tolerances and resolution of the boundary searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisConfig {
    pub search_radius: f64,
    pub directions_per_pair: usize,
    pub max_grid_rays: usize,
    pub refine_rounds: usize,
    /// Smallest accepted `tau_1`.
    pub min_tau: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            search_radius: 1e6,
            directions_per_pair: 64,
            max_grid_rays: 1 << 17,
            refine_rounds: 3,
            min_tau: 1e-10,
        }
    }
}

/// Result of a single slice search.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceHit {
    pub tau: f64,
    pub point: CVector,
    /// True when the value came from the sampled polar search.
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalBasis {
    pub base_point: CVector,
    pub taus: Vec<f64>,
    pub boundary_points: Vec<CVector>,
    pub directions: Vec<CVector>,
    pub ortho_residual: f64,
    pub approximate: bool,
}

impl MinimalBasis {
    pub fn dim(&self) -> usize {
        self.taus.len()
    }

    /// `p_D(z) = tau_1 * ... * tau_n`.
    pub fn p_d(&self) -> f64 {
        p_d(&self.taus)
    }

    /// Relative accuracy of each `tau_j`.
    pub fn tau_accuracy(&self) -> f64 {
        if self.approximate {
            POLAR_TAU_ACCURACY
        } else {
            EXACT_TAU_ACCURACY
        }
    }
}

/// Relative `tau` accuracy of closed-form and Lagrange backends.
pub const EXACT_TAU_ACCURACY: f64 = 1e-9;
/// Relative `tau` accuracy of the polar search.
pub const POLAR_TAU_ACCURACY: f64 = 1e-4;

pub fn p_d(taus: &[f64]) -> f64 {
    taus.iter().product()
}

fn slice_matrix(basis: &[CVector], n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, basis.len(), |i, j| basis[j].get(i))
}

fn to_slice_coords(basis: &[CVector], v: &CVector) -> DVector<C64> {
    DVector::from_fn(basis.len(), |j, _| v.inner(&basis[j]))
}

fn from_slice_coords(basis: &[CVector], y: &DVector<C64>, n: usize) -> CVector {
    let mut x = DVector::<C64>::zeros(n);
    for (q, yj) in basis.iter().zip(y.iter()) {
        x += q.as_dvector() * *yj;
    }
    CVector::from_dvector(x)
}

/// Coordinate indices when every basis vector is a unimodular multiple of a
/// distinct standard basis vector.
fn aligned_coordinates(basis: &[CVector]) -> Option<Vec<usize>> {
    let mut used = Vec::new();
    for q in basis {
        let mut hit = None;
        for (i, x) in q.entries().iter().enumerate() {
            let m = x.norm();
            if m > 1.0 - 1e-12 {
                hit = Some(i);
            } else if m > 1e-12 {
                return None;
            }
        }
        let i = hit?;
        if used.contains(&i) {
            return None;
        }
        used.push(i);
    }
    Some(used)
}

fn unit_phase(x: C64) -> C64 {
    let m = x.norm();
    if m > 0.0 {
        x / m
    } else {
        c(1.0, 0.0)
    }
}

/// Distance from `z` to `∂D ∩ (z + span(slice_basis))` and a nearest point.
pub fn boundary_distance_in_slice(
    domain: &DomainSpec,
    z: &CVector,
    slice_basis: &[CVector],
    config: &BasisConfig,
) -> Result<SliceHit, BasisError> {
    let n = domain.dim();
    if z.dim() != n {
        return Err(DomainError::DimensionMismatch {
            expected: n,
            found: z.dim(),
        }
        .into());
    }
    if slice_basis.is_empty() {
        return Err(BasisError::BadSlice("empty slice basis".into()));
    }
    if slice_basis.iter().any(|q| q.dim() != n) {
        return Err(BasisError::BadSlice("slice vector of wrong dimension".into()));
    }
    let residual = gram_residual(slice_basis);
    if residual >= 1e-10 {
        return Err(BasisError::BadSlice(format!(
            "slice basis not orthonormal (residual {residual:e})"
        )));
    }
    if !domain.contains_unchecked(z) {
        return Err(BasisError::PointOutsideDomain);
    }

    let hit = match domain.backend() {
        Backend::Halfspace { constraints, .. } => {
            let mut best: Option<(f64, CVector)> = None;
            for con in constraints {
                let coords = to_slice_coords(slice_basis, &con.normal);
                let proj = from_slice_coords(slice_basis, &coords, n);
                let pn = proj.norm();
                if pn < 1e-12 * con.normal.norm() {
                    continue;
                }
                let slack = con.slack(z);
                let dist = slack / pn;
                if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                    best = Some((dist, z.axpy(slack / (pn * pn), &proj)));
                }
            }
            match best {
                Some((tau, point)) if tau <= config.search_radius => SliceHit {
                    tau,
                    point,
                    approximate: false,
                },
                _ => {
                    return Err(BasisError::Unbounded {
                        witness: slice_basis[0].clone(),
                    })
                }
            }
        }
        Backend::BallImage {
            inverse, center, ..
        } => {
            let u = inverse.apply(&z.sub(center)).into_dvector();
            let g = inverse.entries() * slice_matrix(slice_basis, n);
            let q = Quadric {
                h: g.adjoint() * &g,
                g: g.adjoint() * &u * c(2.0, 0.0),
                c: u.norm_squared() - 1.0,
            };
            quadric_hit(&q, z, slice_basis, n, config)?
        }
        Backend::Siegel => {
            let qm = slice_matrix(slice_basis, n);
            let qp = qm.rows(0, n - 1).into_owned();
            let zp = DVector::from_fn(n - 1, |i, _| z.get(i));
            let mut g = qp.adjoint() * &zp * c(2.0, 0.0);
            for j in 0..slice_basis.len() {
                g[j] += c(0.0, -1.0) * qm[(n - 1, j)].conj();
            }
            let q = Quadric {
                h: qp.adjoint() * &qp,
                g,
                c: zp.norm_squared() - z.get(n - 1).im,
            };
            quadric_hit(&q, z, slice_basis, n, config)?
        }
        Backend::Polydisc { center, radii } => match aligned_coordinates(slice_basis) {
            Some(coords) => {
                let mut best: Option<(f64, usize)> = None;
                for &i in &coords {
                    let d = radii[i] - (z.get(i) - center.get(i)).norm();
                    if best.is_none_or(|(b, _)| d < b) {
                        best = Some((d, i));
                    }
                }
                let (tau, i) = best.expect("nonempty slice");
                let dir = unit_phase(z.get(i) - center.get(i));
                let mut p = z.as_dvector().clone();
                p[i] += dir * tau;
                SliceHit {
                    tau,
                    point: CVector::from_dvector(p),
                    approximate: false,
                }
            }
            None => polar_hit(domain, z, slice_basis, config, config.search_radius, config.refine_rounds)?,
        },
        Backend::L1Ball { scale } => match aligned_coordinates(slice_basis) {
            Some(coords) => {
                // Supporting hyperplane Re sum x_j e^{-i t_j} = s' with t_j = arg z_j.
                let outside: f64 = (0..n)
                    .filter(|i| !coords.contains(i))
                    .map(|i| z.get(i).norm())
                    .sum();
                let inside: f64 = coords.iter().map(|&i| z.get(i).norm()).sum();
                let k = coords.len() as f64;
                let tau = (scale - outside - inside) / k.sqrt();
                let mut p = z.as_dvector().clone();
                for &i in &coords {
                    p[i] += unit_phase(z.get(i)) * (tau / k.sqrt());
                }
                SliceHit {
                    tau,
                    point: CVector::from_dvector(p),
                    approximate: false,
                }
            }
            None => polar_hit(domain, z, slice_basis, config, config.search_radius, config.refine_rounds)?,
        },
        Backend::Oracle(o) => {
            polar_hit(domain, z, slice_basis, config, o.search_radius, o.refine_iters.max(1))?
        }
    };
    if hit.tau < config.min_tau {
        return Err(BasisError::PointTooCloseToBoundary { tau: hit.tau });
    }
    Ok(hit)
}

fn quadric_hit(
    q: &Quadric,
    z: &CVector,
    basis: &[CVector],
    n: usize,
    config: &BasisConfig,
) -> Result<SliceHit, BasisError> {
    match q.solve() {
        QuadricOutcome::Boundary(y) => {
            let h = from_slice_coords(basis, &y, n);
            let tau = h.norm();
            if tau > config.search_radius {
                return Err(BasisError::Unbounded {
                    witness: h.scale(1.0 / tau),
                });
            }
            Ok(SliceHit {
                tau,
                point: z.add(&h),
                approximate: false,
            })
        }
        QuadricOutcome::Unbounded(dir) => {
            let w = from_slice_coords(basis, &dir, n);
            let norm = w.norm().max(f64::MIN_POSITIVE);
            Err(BasisError::Unbounded {
                witness: w.scale(1.0 / norm),
            })
        }
    }
}

fn polar_hit(
    domain: &DomainSpec,
    z: &CVector,
    basis: &[CVector],
    config: &BasisConfig,
    search_radius: f64,
    refine_rounds: usize,
) -> Result<SliceHit, BasisError> {
    let params = PolarParams {
        directions_per_pair: config.directions_per_pair,
        max_grid_rays: config.max_grid_rays,
        refine_rounds,
        search_radius,
        convex: domain.class() == crate::domain::ConvexityClass::Convex,
    };
    let inside = |x: &CVector| domain.contains_unchecked(x);
    let n = domain.dim();
    match polar::search(&inside, z, basis, &params) {
        PolarOutcome::Hit(hit) => {
            let d = from_slice_coords(basis, &hit.direction, n);
            let d = d.scale(1.0 / d.norm());
            Ok(SliceHit {
                tau: hit.radius,
                point: z.axpy(hit.radius, &d),
                approximate: true,
            })
        }
        PolarOutcome::Unbounded(dir) => Err(BasisError::Unbounded {
            witness: from_slice_coords(basis, &dir, n),
        }),
    }
}

/// Runs the full construction at `z`.
pub fn minimal_basis(
    domain: &DomainSpec,
    z: &CVector,
    config: &BasisConfig,
) -> Result<MinimalBasis, BasisError> {
    let n = domain.dim();
    if z.dim() != n {
        return Err(DomainError::DimensionMismatch {
            expected: n,
            found: z.dim(),
        }
        .into());
    }
    if !domain.contains_unchecked(z) {
        return Err(BasisError::PointOutsideDomain);
    }
    let mut taus = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut directions: Vec<CVector> = Vec::with_capacity(n);
    let mut approximate = false;
    let mut slice: Vec<CVector> = (0..n).map(|j| CVector::basis(n, j)).collect();
    for step in 1..=n {
        let hit = match boundary_distance_in_slice(domain, z, &slice, config) {
            Ok(hit) => hit,
            Err(BasisError::Unbounded { witness }) => {
                return Err(BasisError::DegenerateDomain { step, witness })
            }
            Err(e) => return Err(e),
        };
        let d = hit.point.sub(z).scale(1.0 / hit.tau);
        approximate |= hit.approximate;
        taus.push(hit.tau);
        points.push(hit.point);
        directions.push(d);
        if step < n {
            slice = orthonormal_complement(&directions, n);
        }
    }
    let mut ortho_residual: f64 = 0.0;
    for (j, a) in directions.iter().enumerate() {
        for b in &directions[j + 1..] {
            ortho_residual = ortho_residual.max(a.inner(b).norm());
        }
    }
    Ok(MinimalBasis {
        base_point: z.clone(),
        taus,
        boundary_points: points,
        directions,
        ortho_residual,
        approximate,
    })
}
