//! Concrete domains in `C^n`: membership, geometric queries and exact
//! volume-element oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, random_gaussian, CMatrix, CVector, LinalgError, C64};
use crate::polytope;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("point has dimension {found}, domain has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("domain has no exact volume-element oracle")]
    NoOracle,
    #[error("point lies outside the domain")]
    PointOutsideDomain,
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("operation not supported for the {0} backend")]
    Unsupported(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    Convex,
    CConvex,
}

impl ConvexityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvexityClass::Convex => "convex",
            ConvexityClass::CConvex => "c_convex",
        }
    }
}

/// `Re <z, normal> < offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceConstraint {
    #[serde(rename = "a")]
    pub normal: CVector,
    #[serde(rename = "b")]
    pub offset: f64,
}

impl HalfspaceConstraint {
    pub fn new(normal: CVector, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn slack(&self, z: &CVector) -> f64 {
        self.offset - z.inner(&self.normal).re
    }
}

pub type MembershipPredicate = Arc<dyn Fn(&CVector) -> bool + Send + Sync>;

/// A domain known only through a membership test.
#[derive(Clone)]
pub struct OracleDomain {
    pub name: String,
    pub predicate: MembershipPredicate,
    pub search_radius: f64,
    pub refine_iters: usize,
    /// Ball `(center, radius)` known to contain the domain, if any.
    pub bounding_ball: Option<(CVector, f64)>,
}

impl fmt::Debug for OracleDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleDomain")
            .field("name", &self.name)
            .field("search_radius", &self.search_radius)
            .field("refine_iters", &self.refine_iters)
            .field("bounding_ball", &self.bounding_ball)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    Halfspace {
        constraints: Vec<HalfspaceConstraint>,
        /// Vertices of the polytope (real embedding); `None` if unbounded.
        vertices: Option<Vec<Vec<f64>>>,
    },
    /// `{ z : ||M^{-1}(z - c)|| < 1 }`.
    BallImage {
        matrix: CMatrix,
        inverse: CMatrix,
        center: CVector,
    },
    Polydisc {
        center: CVector,
        radii: Vec<f64>,
    },
    /// `scale * { |w_1| + ... + |w_n| < 1 }`.
    L1Ball {
        scale: f64,
    },
    /// `{ Im z_n > |z_1|^2 + ... + |z_{n-1}|^2 }`.
    Siegel,
    Oracle(OracleDomain),
}

impl Backend {
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::Halfspace { .. } => "halfspace",
            Backend::BallImage { .. } => "ball_image",
            Backend::Polydisc { .. } => "polydisc",
            Backend::L1Ball { .. } => "l1ball",
            Backend::Siegel => "siegel",
            Backend::Oracle(_) => "oracle",
        }
    }
}

/// A biholomorphism `F` from the unit ball onto a domain.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactOracle {
    /// `F(w) = M w + c`.
    Affine {
        matrix: CMatrix,
        inverse: CMatrix,
        center: CVector,
    },
    /// `F(w', w_n) = ( w' / (1 + w_n), i (1 - w_n) / (1 + w_n) )`.
    Cayley { n: usize },
}

impl ExactOracle {
    pub fn forward(&self, w: &CVector) -> CVector {
        match self {
            ExactOracle::Affine { matrix, center, .. } => matrix.apply(w).add(center),
            ExactOracle::Cayley { n } => cayley(w, *n),
        }
    }

    pub fn inverse(&self, z: &CVector) -> CVector {
        match self {
            ExactOracle::Affine {
                inverse, center, ..
            } => inverse.apply(&z.sub(center)),
            ExactOracle::Cayley { n } => {
                let n = *n;
                let i = c(0.0, 1.0);
                let zn = z.get(n - 1);
                let denom = i + zn;
                let mut out = DVector::zeros(n);
                for k in 0..n - 1 {
                    out[k] = c(0.0, 2.0) * z.get(k) / denom;
                }
                out[n - 1] = (i - zn) / denom;
                CVector::from_dvector(out)
            }
        }
    }

    /// `det F'(w)`.
    pub fn jacobian_det(&self, w: &CVector) -> C64 {
        match self {
            ExactOracle::Affine { matrix, .. } => matrix.determinant(),
            ExactOracle::Cayley { n } => {
                let one_plus = c(1.0, 0.0) + w.get(n - 1);
                c(0.0, -2.0) / one_plus.powi(*n as i32 + 1)
            }
        }
    }
}

/// Cayley transform of the unit ball onto the Siegel half-space.
pub fn cayley(w: &CVector, n: usize) -> CVector {
    let wn = w.get(n - 1);
    let one_plus = c(1.0, 0.0) + wn;
    let mut out = DVector::zeros(n);
    for k in 0..n - 1 {
        out[k] = w.get(k) / one_plus;
    }
    out[n - 1] = c(0.0, 1.0) * (c(1.0, 0.0) - wn) / one_plus;
    CVector::from_dvector(out)
}

/// Membership test of the symmetrized bidisc `{(z + w, zw) : |z|, |w| < 1}`.
pub fn symmetrized_bidisc_contains(x: &CVector) -> bool {
    let s = x.get(0);
    let p = x.get(1);
    (s - s.conj() * p).norm() < 1.0 - p.norm_sqr()
}

/// A domain in `C^n` together with its convexity class.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    n: usize,
    backend: Backend,
    class: ConvexityClass,
    bounded: bool,
    exact_oracle: Option<ExactOracle>,
}

impl DomainSpec {
    pub fn halfspace(n: usize, constraints: Vec<HalfspaceConstraint>) -> Result<Self, DomainError> {
        check_dim(n)?;
        if constraints.is_empty() {
            return Err(DomainError::Invalid("halfspace body needs constraints".into()));
        }
        for con in &constraints {
            if con.normal.dim() != n {
                return Err(DomainError::DimensionMismatch {
                    expected: n,
                    found: con.normal.dim(),
                });
            }
            if con.normal.norm() == 0.0 || !con.offset.is_finite() {
                return Err(DomainError::Invalid("degenerate constraint".into()));
            }
        }
        let rows: Vec<Vec<f64>> = constraints.iter().map(|con| con.normal.to_real()).collect();
        let rhs: Vec<f64> = constraints.iter().map(|con| con.offset).collect();
        let verts = polytope::enumerate_vertices(&rows, &rhs);
        let vertices = if verts.touches_box || verts.points.is_empty() {
            None
        } else {
            Some(verts.points)
        };
        let bounded = vertices.is_some();
        Ok(Self {
            n,
            backend: Backend::Halfspace {
                constraints,
                vertices,
            },
            class: ConvexityClass::Convex,
            bounded,
            exact_oracle: None,
        })
    }

    pub fn ball_image(matrix: CMatrix, center: CVector) -> Result<Self, DomainError> {
        let n = matrix.dim();
        check_dim(n)?;
        if center.dim() != n {
            return Err(DomainError::DimensionMismatch {
                expected: n,
                found: center.dim(),
            });
        }
        let inverse = matrix.inverse()?;
        Ok(Self {
            n,
            backend: Backend::BallImage {
                matrix: matrix.clone(),
                inverse: inverse.clone(),
                center: center.clone(),
            },
            class: ConvexityClass::Convex,
            bounded: true,
            exact_oracle: Some(ExactOracle::Affine {
                matrix,
                inverse,
                center,
            }),
        })
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::ball_image(CMatrix::identity(n), CVector::zeros(n)).expect("unit ball")
    }

    /// `{ sum |z_j|^2 / a_j^2 < 1 }`.
    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Self, DomainError> {
        let diag: Vec<C64> = semi_axes.iter().map(|&a| c(a, 0.0)).collect();
        Self::ball_image(CMatrix::diagonal(&diag), CVector::zeros(semi_axes.len()))
    }

    pub fn polydisc(center: CVector, radii: Vec<f64>) -> Result<Self, DomainError> {
        let n = center.dim();
        check_dim(n)?;
        if radii.len() != n {
            return Err(DomainError::DimensionMismatch {
                expected: n,
                found: radii.len(),
            });
        }
        if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(DomainError::Invalid("polydisc radii must be positive".into()));
        }
        Ok(Self {
            n,
            backend: Backend::Polydisc { center, radii },
            class: ConvexityClass::Convex,
            bounded: true,
            exact_oracle: None,
        })
    }

    pub fn unit_polydisc(n: usize) -> Self {
        Self::polydisc(CVector::zeros(n), vec![1.0; n]).expect("unit polydisc")
    }

    pub fn l1_ball(n: usize, scale: f64) -> Result<Self, DomainError> {
        check_dim(n)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(DomainError::Invalid("l1 ball scale must be positive".into()));
        }
        Ok(Self {
            n,
            backend: Backend::L1Ball { scale },
            class: ConvexityClass::Convex,
            bounded: true,
            exact_oracle: None,
        })
    }

    pub fn siegel(n: usize) -> Result<Self, DomainError> {
        check_dim(n)?;
        Ok(Self {
            n,
            backend: Backend::Siegel,
            class: ConvexityClass::Convex,
            bounded: false,
            exact_oracle: Some(ExactOracle::Cayley { n }),
        })
    }

    /// A membership-oracle domain with a caller-declared convexity class.
    pub fn oracle(
        n: usize,
        oracle: OracleDomain,
        class: ConvexityClass,
    ) -> Result<Self, DomainError> {
        check_dim(n)?;
        if oracle.search_radius.is_nan() || oracle.search_radius <= 0.0 || oracle.refine_iters == 0 {
            return Err(DomainError::Invalid(
                "oracle search radius and refine iterations must be positive".into(),
            ));
        }
        let bounded = oracle.bounding_ball.is_some();
        Ok(Self {
            n,
            backend: Backend::Oracle(oracle),
            class,
            bounded,
            exact_oracle: None,
        })
    }

    /// A registered membership predicate by name.
    pub fn named_oracle(
        name: &str,
        n: usize,
        class: Option<ConvexityClass>,
        search_radius: f64,
        refine_iters: usize,
    ) -> Result<Self, DomainError> {
        let (predicate, default_class, bounding_ball): (MembershipPredicate, _, _) = match name {
            "symmetrized_bidisc" => {
                if n != 2 {
                    return Err(DomainError::Invalid("symmetrized bidisc lives in C^2".into()));
                }
                (
                    Arc::new(symmetrized_bidisc_contains),
                    ConvexityClass::CConvex,
                    Some((CVector::zeros(2), 5f64.sqrt())),
                )
            }
            "unit_ball" => (
                Arc::new(|z: &CVector| z.norm_squared() < 1.0),
                ConvexityClass::Convex,
                Some((CVector::zeros(n), 1.0)),
            ),
            "unit_polydisc" => (
                Arc::new(|z: &CVector| z.entries().iter().all(|x| x.norm() < 1.0)),
                ConvexityClass::Convex,
                Some((CVector::zeros(n), (n as f64).sqrt())),
            ),
            "strip" => (
                Arc::new(|z: &CVector| z.get(0).re.abs() < 1.0),
                ConvexityClass::Convex,
                None,
            ),
            other => return Err(DomainError::Invalid(format!("unknown predicate '{other}'"))),
        };
        Self::oracle(
            n,
            OracleDomain {
                name: name.to_string(),
                predicate,
                search_radius,
                refine_iters,
                bounding_ball,
            },
            class.unwrap_or(default_class),
        )
    }

    pub fn symmetrized_bidisc() -> Self {
        Self::named_oracle("symmetrized_bidisc", 2, None, 1e6, 3).expect("registered")
    }

    pub fn with_class(mut self, class: ConvexityClass) -> Self {
        self.class = class;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn class(&self) -> ConvexityClass {
        self.class
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn exact_oracle(&self) -> Option<&ExactOracle> {
        self.exact_oracle.as_ref()
    }

    fn check_point(&self, z: &CVector) -> Result<(), DomainError> {
        if z.dim() != self.n {
            return Err(DomainError::DimensionMismatch {
                expected: self.n,
                found: z.dim(),
            });
        }
        Ok(())
    }

    /// Open-set membership; boundary points are outside.
    pub fn contains(&self, z: &CVector) -> Result<bool, DomainError> {
        self.check_point(z)?;
        Ok(self.contains_unchecked(z))
    }

    pub(crate) fn contains_unchecked(&self, z: &CVector) -> bool {
        match &self.backend {
            Backend::Oracle(o) => (o.predicate)(z),
            _ => self.margin_unchecked(z) > 0.0,
        }
    }

    /// Signed membership margin, positive exactly on the domain.
    ///
    /// For geometric backends this is the value of a defining function;
    /// oracle domains only report `+1` / `-1`.
    pub fn margin(&self, z: &CVector) -> Result<f64, DomainError> {
        self.check_point(z)?;
        Ok(self.margin_unchecked(z))
    }

    pub(crate) fn margin_unchecked(&self, z: &CVector) -> f64 {
        match &self.backend {
            Backend::Halfspace { constraints, .. } => constraints
                .iter()
                .map(|con| con.slack(z) / con.normal.norm())
                .fold(f64::INFINITY, f64::min),
            Backend::BallImage {
                inverse, center, ..
            } => 1.0 - inverse.apply(&z.sub(center)).norm(),
            Backend::Polydisc { center, radii } => z
                .entries()
                .iter()
                .zip(center.entries())
                .zip(radii)
                .map(|((x, c0), r)| r - (x - c0).norm())
                .fold(f64::INFINITY, f64::min),
            Backend::L1Ball { scale } => scale - z.l1_norm(),
            Backend::Siegel => {
                let n = self.n;
                let tail: f64 = (0..n - 1).map(|k| z.get(k).norm_sqr()).sum();
                z.get(n - 1).im - tail
            }
            Backend::Oracle(o) => {
                if (o.predicate)(z) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Diameter of the domain, `+inf` when unbounded.
    ///
    /// Exact for polydiscs, ball images, l1 balls and bounded halfspace
    /// bodies (maximum vertex distance). For oracle domains the diameter of
    /// the declared bounding ball is returned, an upper bound.
    pub fn diameter(&self) -> f64 {
        match &self.backend {
            Backend::Halfspace { vertices, .. } => match vertices {
                Some(v) => polytope::max_pairwise_distance(v) * (1.0 + 1e-12),
                None => f64::INFINITY,
            },
            Backend::BallImage { matrix, .. } => 2.0 * matrix.operator_norm(),
            Backend::Polydisc { radii, .. } => 2.0 * radii.iter().map(|r| r * r).sum::<f64>().sqrt(),
            Backend::L1Ball { scale } => 2.0 * scale,
            Backend::Siegel => f64::INFINITY,
            Backend::Oracle(o) => o
                .bounding_ball
                .as_ref()
                .map(|(_, r)| 2.0 * r)
                .unwrap_or(f64::INFINITY),
        }
    }

    /// Upper bound on `sup_{x in D} ||x - z||`; `+inf` for unbounded domains.
    pub fn circumscribed_radius(&self, z: &CVector) -> Result<f64, DomainError> {
        self.check_point(z)?;
        Ok(match &self.backend {
            Backend::Halfspace { vertices, .. } => match vertices {
                Some(v) => {
                    let zr = z.to_real();
                    v.iter()
                        .map(|p| p.iter().zip(&zr).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                        .fold(0.0, f64::max)
                        .sqrt()
                        * (1.0 + 1e-12)
                }
                None => f64::INFINITY,
            },
            Backend::BallImage { matrix, center, .. } => {
                matrix.operator_norm() + z.sub(center).norm()
            }
            Backend::Polydisc { center, radii } => z
                .entries()
                .iter()
                .zip(center.entries())
                .zip(radii)
                .map(|((x, c0), r)| (r + (x - c0).norm()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Backend::L1Ball { scale } => {
                // Convex function, maximised at an extreme point s e^{it} e_k.
                let zz = z.norm_squared();
                let best = z.entries().iter().map(|x| x.norm()).fold(0.0, f64::max);
                (zz + 2.0 * scale * best + scale * scale).sqrt()
            }
            Backend::Siegel => f64::INFINITY,
            Backend::Oracle(o) => match &o.bounding_ball {
                Some((center, r)) => r + z.sub(center).norm(),
                None => f64::INFINITY,
            },
        })
    }

    /// A ball containing the domain, if the domain is bounded.
    pub fn bounding_ball(&self) -> Option<(CVector, f64)> {
        match &self.backend {
            Backend::Halfspace { vertices, .. } => {
                let v = vertices.as_ref()?;
                let d = v[0].len();
                let mut mean = vec![0.0; d];
                for p in v {
                    for (m, x) in mean.iter_mut().zip(p) {
                        *m += x / v.len() as f64;
                    }
                }
                let r = v
                    .iter()
                    .map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                    .fold(0.0, f64::max)
                    .sqrt();
                Some((CVector::from_real_embedding(&mean), r * (1.0 + 1e-9)))
            }
            Backend::BallImage { matrix, center, .. } => {
                Some((center.clone(), matrix.operator_norm()))
            }
            Backend::Polydisc { center, radii } => Some((
                center.clone(),
                radii.iter().map(|r| r * r).sum::<f64>().sqrt(),
            )),
            Backend::L1Ball { scale } => Some((CVector::zeros(self.n), *scale)),
            Backend::Siegel => None,
            Backend::Oracle(o) => o.bounding_ball.clone(),
        }
    }

    /// `v_D(z) = |det F'(w)|^{-2} (1 - |w|^2)^{-(n+1)}` with `w = F^{-1}(z)`,
    /// valid for both the Caratheodory and the Kobayashi-Eisenman element.
    pub fn exact_volume_element(&self, z: &CVector) -> Result<f64, DomainError> {
        self.check_point(z)?;
        let oracle = self.exact_oracle.as_ref().ok_or(DomainError::NoOracle)?;
        if !self.contains_unchecked(z) {
            return Err(DomainError::PointOutsideDomain);
        }
        let w = oracle.inverse(z);
        let rho = w.norm_squared();
        if rho >= 1.0 {
            return Err(DomainError::PointOutsideDomain);
        }
        let jac = oracle.jacobian_det(&w).norm_sqr();
        Ok((1.0 - rho).powi(-(self.n as i32 + 1)) / jac)
    }

    /// Translate the domain by `w`.
    pub fn translate(&self, w: &CVector) -> Result<DomainSpec, DomainError> {
        self.check_point(w)?;
        let out = match &self.backend {
            Backend::Halfspace { constraints, .. } => DomainSpec::halfspace(
                self.n,
                constraints
                    .iter()
                    .map(|con| {
                        HalfspaceConstraint::new(
                            con.normal.clone(),
                            con.offset + w.inner(&con.normal).re,
                        )
                    })
                    .collect(),
            )?,
            Backend::BallImage { matrix, center, .. } => {
                DomainSpec::ball_image(matrix.clone(), center.add(w))?
            }
            Backend::Polydisc { center, radii } => {
                DomainSpec::polydisc(center.add(w), radii.clone())?
            }
            Backend::Oracle(o) => {
                let inner = o.predicate.clone();
                let shift = w.clone();
                let mut shifted = o.clone();
                shifted.predicate = Arc::new(move |x: &CVector| inner(&x.sub(&shift)));
                shifted.name = format!("{}+shift", o.name);
                shifted.bounding_ball = o
                    .bounding_ball
                    .as_ref()
                    .map(|(cen, r)| (cen.add(w), *r));
                DomainSpec::oracle(self.n, shifted, self.class)?
            }
            other => return Err(DomainError::Unsupported(other.kind())),
        };
        Ok(out.with_class(self.class))
    }

    /// Image of the domain under an invertible linear map `L`.
    pub fn linear_image(&self, l: &CMatrix) -> Result<DomainSpec, DomainError> {
        if l.dim() != self.n {
            return Err(DomainError::DimensionMismatch {
                expected: self.n,
                found: l.dim(),
            });
        }
        let out = match &self.backend {
            Backend::Halfspace { constraints, .. } => {
                // Re<L^{-1} y, a> = Re<y, L^{-*} a>.
                let inv_adj = l.inverse()?.adjoint();
                DomainSpec::halfspace(
                    self.n,
                    constraints
                        .iter()
                        .map(|con| HalfspaceConstraint::new(inv_adj.apply(&con.normal), con.offset))
                        .collect(),
                )?
            }
            Backend::BallImage { matrix, center, .. } => {
                DomainSpec::ball_image(l.mul(matrix), l.apply(center))?
            }
            other => return Err(DomainError::Unsupported(other.kind())),
        };
        Ok(out.with_class(self.class))
    }

    /// Rejection sample of `count` points of `D ∩ B(center, radius)`.
    ///
    /// Gives up after `100 * count` proposals and returns what it found.
    pub fn sample_in_ball<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        center: &CVector,
        radius: f64,
        count: usize,
    ) -> Vec<CVector> {
        let mut out = Vec::with_capacity(count);
        let max_tries = 100 * count.max(1);
        for _ in 0..max_tries {
            if out.len() == count {
                break;
            }
            let x = center.add(&uniform_in_ball(rng, self.n).scale(radius));
            if self.contains_unchecked(&x) {
                out.push(x);
            }
        }
        out
    }
}

/// Uniform point of the unit ball of `C^n`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let g = random_gaussian(rng, n);
    let u: f64 = rng.random();
    let r = u.powf(1.0 / (2 * n) as f64);
    let norm = g.norm();
    CVector::from_dvector(g * c(r / norm, 0.0))
}

fn check_dim(n: usize) -> Result<(), DomainError> {
    if n < 2 {
        return Err(DomainError::Linalg(LinalgError::DimensionTooSmall(n)));
    }
    Ok(())
}

/// JSON form of a domain: `{ "variant": ..., "n": ..., ..., "class": ... }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ConvexityClass>,
    #[serde(flatten)]
    pub variant: VariantConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum VariantConfig {
    Halfspace {
        constraints: Vec<HalfspaceConstraint>,
    },
    BallImage {
        matrix: CMatrix,
        center: CVector,
    },
    Polydisc {
        center: CVector,
        radii: Vec<f64>,
    },
    #[serde(rename = "l1ball")]
    L1Ball {
        scale: f64,
    },
    Siegel {},
    Oracle {
        predicate: String,
        #[serde(default = "default_search_radius")]
        search_radius: f64,
        #[serde(default = "default_refine_iters")]
        refine_iters: usize,
    },
}

fn default_search_radius() -> f64 {
    1e6
}

fn default_refine_iters() -> usize {
    3
}

impl DomainConfig {
    pub fn build(&self) -> Result<DomainSpec, DomainError> {
        let n = self.n;
        let check = |found: usize| {
            if found != n {
                Err(DomainError::DimensionMismatch { expected: n, found })
            } else {
                Ok(())
            }
        };
        let spec = match &self.variant {
            VariantConfig::Halfspace { constraints } => {
                DomainSpec::halfspace(n, constraints.clone())?
            }
            VariantConfig::BallImage { matrix, center } => {
                check(matrix.dim())?;
                DomainSpec::ball_image(matrix.clone(), center.clone())?
            }
            VariantConfig::Polydisc { center, radii } => {
                check(center.dim())?;
                DomainSpec::polydisc(center.clone(), radii.clone())?
            }
            VariantConfig::L1Ball { scale } => DomainSpec::l1_ball(n, *scale)?,
            VariantConfig::Siegel {} => DomainSpec::siegel(n)?,
            VariantConfig::Oracle {
                predicate,
                search_radius,
                refine_iters,
            } => {
                return DomainSpec::named_oracle(
                    predicate,
                    n,
                    self.class,
                    *search_radius,
                    *refine_iters,
                )
            }
        };
        Ok(match self.class {
            // Geometric backends are convex; a c_convex tag only weakens the claims.
            Some(class) => spec.with_class(class),
            None => spec,
        })
    }
}

impl DomainSpec {
    /// JSON-serializable description; `None` for oracle domains built from closures.
    pub fn to_config(&self) -> Option<DomainConfig> {
        let variant = match &self.backend {
            Backend::Halfspace { constraints, .. } => VariantConfig::Halfspace {
                constraints: constraints.clone(),
            },
            Backend::BallImage { matrix, center, .. } => VariantConfig::BallImage {
                matrix: matrix.clone(),
                center: center.clone(),
            },
            Backend::Polydisc { center, radii } => VariantConfig::Polydisc {
                center: center.clone(),
                radii: radii.clone(),
            },
            Backend::L1Ball { scale } => VariantConfig::L1Ball { scale: *scale },
            Backend::Siegel => VariantConfig::Siegel {},
            Backend::Oracle(o) => {
                if o.name.contains('+') {
                    return None;
                }
                VariantConfig::Oracle {
                    predicate: o.name.clone(),
                    search_radius: o.search_radius,
                    refine_iters: o.refine_iters,
                }
            }
        };
        Some(DomainConfig {
            n: self.n,
            class: Some(self.class),
            variant,
        })
    }
}
