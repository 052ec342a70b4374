//! The Bergman kernel on the diagonal, from closed forms, from the
//! transformation rule, and from monomial series on Reinhardt domains.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Backend, ConvexityClass, DomainError, DomainSpec, ExactOracle};
use crate::linalg::{CMatrix, CVector};
use crate::quadrature::beta_quadrature;
use crate::volume::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BergmanError {
    #[error("no Bergman kernel computation for the {0} backend")]
    UnsupportedDomain(&'static str),
    #[error("point lies outside the domain")]
    PointOutsideDomain,
    #[error("series tail does not contract (shell ratio {ratio:.4}) at degree {degree}")]
    TailDiverges { degree: usize, ratio: f64 },
    #[error("invalid Reinhardt profile: {0}")]
    BadProfile(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BergmanMethod {
    ClosedForm,
    ReinhardtQuadrature,
    Transformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BergmanValue {
    pub value: f64,
    /// Upper bound on the omitted part; the true kernel lies in `[value, value + truncation_error]`.
    pub truncation_error: f64,
    pub method: BergmanMethod,
}

impl BergmanValue {
    pub fn upper(&self) -> f64 {
        self.value + self.truncation_error
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `n! / pi^n (1 - |w|^2)^{-(n+1)}`.
fn ball_kernel(w: &CVector) -> Result<f64, BergmanError> {
    let n = w.dim();
    let rho = w.norm_squared();
    if rho >= 1.0 {
        return Err(BergmanError::PointOutsideDomain);
    }
    Ok(factorial(n) / std::f64::consts::PI.powi(n as i32) * (1.0 - rho).powi(-(n as i32 + 1)))
}

/// Closed-form kernel on balls and polydiscs, and the pushforward
/// `K_{F(B)}(F w) = K_B(w) / |det F'(w)|^2` through an exact oracle.
pub fn bergman_closed(domain: &DomainSpec, z: &CVector) -> Result<BergmanValue, BergmanError> {
    if !domain.contains(z)? {
        return Err(BergmanError::PointOutsideDomain);
    }
    match (domain.backend(), domain.exact_oracle()) {
        (Backend::Polydisc { center, radii }, _) => {
            let mut value = 1.0;
            for ((x, c0), r) in z.entries().iter().zip(center.entries()).zip(radii) {
                let r2 = r * r;
                let d = r2 - (x - c0).norm_sqr();
                value *= r2 / (std::f64::consts::PI * d * d);
            }
            Ok(BergmanValue {
                value,
                truncation_error: 0.0,
                method: BergmanMethod::ClosedForm,
            })
        }
        (_, Some(oracle)) => {
            let w = oracle.inverse(z);
            let jac = oracle.jacobian_det(&w).norm_sqr();
            let is_unit_ball = matches!(oracle, ExactOracle::Affine { matrix, center, .. }
                if *matrix == CMatrix::identity(z.dim()) && center.norm() == 0.0);
            Ok(BergmanValue {
                value: ball_kernel(&w)? / jac,
                truncation_error: 0.0,
                method: if is_unit_ball {
                    BergmanMethod::ClosedForm
                } else {
                    BergmanMethod::Transformed
                },
            })
        }
        (backend, None) => Err(BergmanError::UnsupportedDomain(backend.kind())),
    }
}

/// A bounded complete Reinhardt domain centered at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReinhardtProfile {
    /// `{ |z| < radius }`; exact moments.
    Ball { n: usize, radius: f64 },
    /// `{ |z_j| < r_j }`; exact moments.
    Polydisc { radii: Vec<f64> },
    /// `{ sum_j (|z_j| / a_j)^{2 p_j} < 1 }`; moments by quadrature.
    Egg { scales: Vec<f64>, exponents: Vec<f64> },
    /// The polydisc with moments by quadrature.
    PolydiscQuadrature { radii: Vec<f64> },
}

/// Relative tolerance of the quadrature moments.
pub const MOMENT_TOL: f64 = 1e-12;

impl ReinhardtProfile {
    pub fn dim(&self) -> usize {
        match self {
            ReinhardtProfile::Ball { n, .. } => *n,
            ReinhardtProfile::Polydisc { radii } | ReinhardtProfile::PolydiscQuadrature { radii } => radii.len(),
            ReinhardtProfile::Egg { scales, .. } => scales.len(),
        }
    }

    fn validate(&self) -> Result<(), BergmanError> {
        let positive = |v: &[f64]| v.iter().all(|x| *x > 0.0 && x.is_finite());
        let ok = match self {
            ReinhardtProfile::Ball { n, radius } => *n >= 1 && *radius > 0.0 && radius.is_finite(),
            ReinhardtProfile::Polydisc { radii } | ReinhardtProfile::PolydiscQuadrature { radii } => {
                !radii.is_empty() && positive(radii)
            }
            ReinhardtProfile::Egg { scales, exponents } => {
                !scales.is_empty() && scales.len() == exponents.len() && positive(scales) && positive(exponents)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(BergmanError::BadProfile(format!("{self:?}")))
        }
    }

    pub fn contains(&self, z: &CVector) -> bool {
        match self {
            ReinhardtProfile::Ball { radius, .. } => z.norm() < *radius,
            ReinhardtProfile::Polydisc { radii } | ReinhardtProfile::PolydiscQuadrature { radii } => {
                z.entries().iter().zip(radii).all(|(x, r)| x.norm() < *r)
            }
            ReinhardtProfile::Egg { scales, exponents } => {
                z.entries()
                    .iter()
                    .zip(scales.iter().zip(exponents))
                    .map(|(x, (a, p))| (x.norm() / a).powf(2.0 * p))
                    .sum::<f64>()
                    < 1.0
            }
        }
    }

    /// Reinhardt description of a domain centered at the origin, when one exists.
    pub fn from_domain(domain: &DomainSpec) -> Option<ReinhardtProfile> {
        let n = domain.dim();
        match domain.backend() {
            Backend::Polydisc { center, radii } if center.norm() == 0.0 => {
                Some(ReinhardtProfile::Polydisc { radii: radii.clone() })
            }
            Backend::BallImage { matrix, center, .. } if center.norm() == 0.0 => {
                let m = matrix.entries();
                let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() == 0.0));
                // Unit-modulus phases on the diagonal do not change the image.
                if !diagonal {
                    return None;
                }
                Some(ReinhardtProfile::Egg {
                    scales: (0..n).map(|i| m[(i, i)].norm()).collect(),
                    exponents: vec![1.0; n],
                })
            }
            Backend::L1Ball { scale } => Some(ReinhardtProfile::Egg {
                scales: vec![*scale; n],
                exponents: vec![0.5; n],
            }),
            _ => None,
        }
    }

    /// `ln ∫_D |z^alpha|^2 dV`.
    fn ln_moment(&self, alpha: &[usize]) -> f64 {
        let pi = std::f64::consts::PI;
        match self {
            ReinhardtProfile::Ball { n, radius } => {
                // pi^n alpha! R^{2|alpha| + 2n} / (|alpha| + n)!
                let total: usize = alpha.iter().sum();
                let ln_fact = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
                *n as f64 * pi.ln() + alpha.iter().map(|&a| ln_fact(a)).sum::<f64>() - ln_fact(total + n)
                    + (2 * total + 2 * n) as f64 * radius.ln()
            }
            ReinhardtProfile::Polydisc { radii } => alpha
                .iter()
                .zip(radii)
                .map(|(&a, r)| pi.ln() + (2 * a + 2) as f64 * r.ln() - ((a + 1) as f64).ln())
                .sum(),
            ReinhardtProfile::PolydiscQuadrature { radii } => alpha
                .iter()
                .zip(radii)
                .map(|(&a, r)| {
                    // 2 pi r^{2a+2} ∫_0^1 t^{2a+1} dt
                    let q = beta_quadrature((2 * a + 2) as f64, 1.0, MOMENT_TOL).value;
                    (2.0 * pi).ln() + (2 * a + 2) as f64 * r.ln() + q.ln()
                })
                .sum(),
            ReinhardtProfile::Egg { scales, exponents } => {
                // Polar coordinates and u_j = (r_j / a_j)^{2 p_j} give
                // (2 pi)^n prod_j a_j^{2 alpha_j + 2} / (2 p_j) times the
                // Dirichlet integral of prod u_j^{s_j - 1} over the simplex,
                // s_j = (alpha_j + 1) / p_j, evaluated as iterated Beta integrals.
                let s: Vec<f64> = alpha
                    .iter()
                    .zip(exponents)
                    .map(|(&a, p)| (a + 1) as f64 / p)
                    .collect();
                let mut ln = 0.0;
                for (j, (&a, (sc, p))) in alpha.iter().zip(scales.iter().zip(exponents)).enumerate() {
                    ln += (2.0 * pi).ln() + (2 * a + 2) as f64 * sc.ln() - (2.0 * p).ln();
                    let rest: f64 = s[j + 1..].iter().sum();
                    ln += beta_quadrature(s[j], rest + 1.0, MOMENT_TOL).value.ln();
                }
                ln
            }
        }
    }
}

/// Multi-indices of total degree `d` in `n` variables, lexicographically descending.
pub fn shell(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, d: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=d).rev() {
            prefix.push(first);
            rec(n - 1, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Shell ratio above which the tail is declared divergent.
pub const TAIL_RATIO_LIMIT: f64 = 0.9;

/// `K(z) = sum_alpha |z^alpha|^2 / ||z^alpha||^2` over `|alpha| <= max_degree`,
/// summed shell by shell in graded-lex order. The tail is bounded by a
/// geometric series with the largest of the last two shell ratios.
pub fn bergman_reinhardt(
    profile: &ReinhardtProfile,
    z: &CVector,
    max_degree: usize,
) -> Result<BergmanValue, BergmanError> {
    profile.validate()?;
    let n = profile.dim();
    if z.dim() != n {
        return Err(DomainError::DimensionMismatch {
            expected: n,
            found: z.dim(),
        }
        .into());
    }
    if !profile.contains(z) {
        return Err(BergmanError::PointOutsideDomain);
    }
    let ln_abs: Vec<f64> = z.entries().iter().map(|x| x.norm().ln()).collect();
    let mut shells = Vec::with_capacity(max_degree + 1);
    for d in 0..=max_degree {
        let mut s = 0.0;
        for alpha in shell(n, d) {
            let mut ln_num = 0.0;
            let mut zero = false;
            for (&a, &l) in alpha.iter().zip(&ln_abs) {
                if a > 0 {
                    if l == f64::NEG_INFINITY {
                        zero = true;
                        break;
                    }
                    ln_num += 2.0 * a as f64 * l;
                }
            }
            if !zero {
                s += (ln_num - profile.ln_moment(&alpha)).exp();
            }
        }
        shells.push(s);
    }
    let value: f64 = shells.iter().sum();
    let last = shells[max_degree];
    // At the origin only the constant term survives.
    let truncation_error = if z.norm() == 0.0 {
        0.0
    } else if max_degree < 2 {
        return Err(BergmanError::TailDiverges {
            degree: max_degree,
            ratio: f64::INFINITY,
        });
    } else {
        let r1 = shells[max_degree - 1] / shells[max_degree - 2];
        let r2 = last / shells[max_degree - 1];
        let ratio = r1.max(r2);
        if ratio.is_nan() || ratio > TAIL_RATIO_LIMIT {
            return Err(BergmanError::TailDiverges {
                degree: max_degree,
                ratio,
            });
        }
        last * ratio / (1.0 - ratio)
    };
    if truncation_error >= value {
        return Err(BergmanError::TailDiverges {
            degree: max_degree,
            ratio: f64::NAN,
        });
    }
    Ok(BergmanValue {
        value,
        truncation_error,
        method: BergmanMethod::ReinhardtQuadrature,
    })
}

/// Constants bounding `K_D p_D^2`.
pub fn sandwich_constants(class: ConvexityClass, n: usize) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let lower = match class {
        ConvexityClass::Convex => (4.0 * pi).powi(-(n as i32)),
        ConvexityClass::CConvex => (16.0 * pi).powi(-(n as i32)),
    };
    (lower, factorial(2 * n) / (2.0 * pi).powi(n as i32))
}

/// Band containing `v_D / K_D`.
pub fn ratio_band(class: ConvexityClass, n: usize) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let nf = n as f64;
    let four_n = 4f64.powi(n as i32);
    let (k, m) = match class {
        ConvexityClass::Convex => (2.0, 4.0),
        ConvexityClass::CConvex => (8.0, 16.0),
    };
    (
        pi.powi(n as i32) / (factorial(2 * n) * (k * nf).powi(n as i32)),
        (m * pi * (four_n - 1.0) / 3.0).powi(n as i32),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichMargins {
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Range of `K p_D^2` allowed by the truncation and `p_D` errors.
    pub kp2: Interval,
    /// `kp2.hi / lower_bound - 1`.
    pub lower_margin: f64,
    /// `1 - kp2.lo / upper_bound`.
    pub upper_margin: f64,
}

impl SandwichMargins {
    pub fn margin(&self) -> f64 {
        self.lower_margin.min(self.upper_margin)
    }

    pub fn passed(&self) -> bool {
        self.margin() >= 0.0
    }
}

/// Margins of `lower <= K p_D^2 <= upper`; a negative margin means the
/// inequality fails for every value consistent with the error bars.
pub fn kernel_sandwich_check(
    class: ConvexityClass,
    n: usize,
    k: &BergmanValue,
    p_d: f64,
    p_rel_error: f64,
) -> SandwichMargins {
    let (lower_bound, upper_bound) = sandwich_constants(class, n);
    let p2 = p_d * p_d;
    let spread = (1.0 + p_rel_error).powi(2);
    let kp2 = Interval::new(k.value * p2 / spread, k.upper() * p2 * spread, crate::volume::DEFAULT_SLACK);
    SandwichMargins {
        lower_bound,
        upper_bound,
        lower_margin: kp2.hi / lower_bound - 1.0,
        upper_margin: 1.0 - kp2.lo / upper_bound,
        kp2,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioMargins {
    pub band: Interval,
    /// `[v_lo / K_hi, v_hi / K_lo]`.
    pub ratio: Interval,
    pub exact_ratio: Option<f64>,
    /// Containment margin of the exact ratio when available, otherwise the
    /// overlap margin of `ratio` and `band`.
    pub margin: f64,
}

impl RatioMargins {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Compares `v / K` with the band, by point containment when `exact_v` is
/// known and by interval overlap otherwise.
pub fn ratio_check(
    class: ConvexityClass,
    n: usize,
    v: &Interval,
    k: &BergmanValue,
    exact_v: Option<f64>,
) -> RatioMargins {
    let (lo, hi) = ratio_band(class, n);
    let band = Interval::new(lo, hi, 0.0);
    let ratio = Interval::new(v.lo / k.upper(), v.hi / k.value, 0.0);
    match exact_v {
        Some(ev) => {
            // With a truncated K the ratio lies in [ev / K_hi, ev / K_lo].
            let r_lo = ev / k.upper();
            let r_hi = ev / k.value;
            let margin = (r_hi / band.lo - 1.0).min(1.0 - r_lo / band.hi);
            RatioMargins {
                band,
                ratio,
                exact_ratio: Some(ev / k.value),
                margin,
            }
        }
        None => RatioMargins {
            margin: ratio.intersection_margin(&band),
            band,
            ratio,
            exact_ratio: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn egg_ball(n: usize) -> ReinhardtProfile {
        ReinhardtProfile::Egg {
            scales: vec![1.0; n],
            exponents: vec![1.0; n],
        }
    }

    #[test]
    fn closed_form_values() {
        let z = CVector::zeros(2);
        let b = bergman_closed(&DomainSpec::unit_ball(2), &z).unwrap();
        assert!(rel(b.value, 2.0 / (PI * PI)) < 1e-15);
        assert_eq!(b.method, BergmanMethod::ClosedForm);
        let d = bergman_closed(&DomainSpec::unit_polydisc(2), &z).unwrap();
        assert!(rel(d.value, 1.0 / (PI * PI)) < 1e-15);
        let e = bergman_closed(&DomainSpec::ellipsoid(&[2.0, 1.0]).unwrap(), &z).unwrap();
        assert!(rel(e.value, 1.0 / (2.0 * PI * PI)) < 1e-15);
        assert_eq!(e.method, BergmanMethod::Transformed);
        assert!(matches!(
            bergman_closed(&DomainSpec::l1_ball(2, 1.0).unwrap(), &z),
            Err(BergmanError::UnsupportedDomain("l1ball"))
        ));
    }

    #[test]
    fn moments_at_center() {
        let z = CVector::zeros(2);
        for deg in [0, 1, 5] {
            let b = bergman_reinhardt(&egg_ball(2), &z, deg).unwrap();
            assert!(rel(b.value, 2.0 / (PI * PI)) < 1e-10, "{b:?}");
            assert_eq!(b.truncation_error, 0.0);
        }
        let exact = bergman_reinhardt(&ReinhardtProfile::Ball { n: 2, radius: 1.0 }, &z, 0).unwrap();
        assert!(rel(exact.value, 2.0 / (PI * PI)) < 1e-15);
        let d = bergman_reinhardt(&ReinhardtProfile::PolydiscQuadrature { radii: vec![1.0, 1.0] }, &z, 3).unwrap();
        assert!(rel(d.value, 1.0 / (PI * PI)) < 1e-10);
    }

    #[test]
    fn series_matches_closed_form_off_center() {
        let z = CVector::from_real(&[0.5, 0.0]).unwrap();
        let closed = bergman_closed(&DomainSpec::unit_ball(2), &z).unwrap().value;
        assert!(rel(closed, 2.0 / (PI * PI) * (0.75f64).powi(-3)) < 1e-14);
        for profile in [egg_ball(2), ReinhardtProfile::Ball { n: 2, radius: 1.0 }] {
            let s = bergman_reinhardt(&profile, &z, 40).unwrap();
            assert!(rel(s.value, closed) < 1e-8, "{profile:?} {s:?}");
            assert!(s.truncation_error < 1e-8 * closed);
        }
    }

    #[test]
    fn polydisc_series_both_moment_rules() {
        let z = CVector::from_pairs(&[(0.3, 0.1), (-0.2, 0.25)]).unwrap();
        let closed = bergman_closed(&DomainSpec::unit_polydisc(2), &z).unwrap().value;
        for profile in [
            ReinhardtProfile::Polydisc { radii: vec![1.0, 1.0] },
            ReinhardtProfile::PolydiscQuadrature { radii: vec![1.0, 1.0] },
        ] {
            let s = bergman_reinhardt(&profile, &z, 30).unwrap();
            assert!(rel(s.value, closed) < 1e-8, "{s:?} vs {closed}");
        }
    }

    #[test]
    fn ellipsoid_transformation_rule_against_moments() {
        let e = DomainSpec::ball_image(
            CMatrix::diagonal(&[c(2.0, 0.0), c(0.7, 0.0)]),
            CVector::zeros(2),
        )
        .unwrap();
        let profile = ReinhardtProfile::from_domain(&e).unwrap();
        let z = CVector::from_pairs(&[(0.4, 0.3), (0.1, -0.05)]).unwrap();
        let closed = bergman_closed(&e, &z).unwrap();
        let series = bergman_reinhardt(&profile, &z, 60).unwrap();
        assert!(rel(series.value, closed.value) < 1e-6, "{series:?} {closed:?}");
    }

    #[test]
    fn tail_divergence_near_boundary() {
        let z = CVector::from_real(&[0.99, 0.0]).unwrap();
        assert!(matches!(
            bergman_reinhardt(&egg_ball(2), &z, 10),
            Err(BergmanError::TailDiverges { .. })
        ));
    }

    #[test]
    fn shells_in_order() {
        assert_eq!(shell(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(shell(3, 4).len(), 15);
    }

    #[test]
    fn sandwich_examples() {
        let (lo, hi) = sandwich_constants(ConvexityClass::Convex, 2);
        assert!(rel(lo, 6.332573977646111e-3) < 1e-12);
        assert!(rel(hi, 24.0 / (4.0 * PI * PI)) < 1e-15);
        let z = CVector::zeros(2);
        for d in [
            DomainSpec::unit_ball(2),
            DomainSpec::unit_polydisc(2),
            DomainSpec::ellipsoid(&[2.0, 1.0]).unwrap(),
        ] {
            let k = bergman_closed(&d, &z).unwrap();
            let p = crate::minimal_basis::minimal_basis(&d, &z, &Default::default()).unwrap().p_d();
            assert!(kernel_sandwich_check(ConvexityClass::Convex, 2, &k, p, 1e-9).passed());
        }
    }

    #[test]
    fn ratio_bands() {
        let (lo, hi) = ratio_band(ConvexityClass::Convex, 2);
        assert!(rel(lo, PI * PI / 384.0) < 1e-14);
        assert!(rel(hi, 400.0 * PI * PI) < 1e-14);
        let (lo, hi) = ratio_band(ConvexityClass::CConvex, 2);
        assert!(rel(lo, PI * PI / (24.0 * 256.0)) < 1e-14);
        assert!(rel(hi, 6400.0 * PI * PI) < 1e-14);

        let b = DomainSpec::unit_ball(2);
        let z = CVector::zeros(2);
        let k = bergman_closed(&b, &z).unwrap();
        let v = b.exact_volume_element(&z).unwrap();
        let r = ratio_check(ConvexityClass::Convex, 2, &Interval::new(v, v, 0.0), &k, Some(v));
        assert!(rel(r.exact_ratio.unwrap(), PI * PI / 2.0) < 1e-14);
        assert!(r.passed());
    }

    proptest! {
        #[test]
        fn partial_sums_nondecreasing(x in 0.0f64..0.3, y in 0.0f64..0.3, d in 2usize..20) {
            let z = CVector::from_real(&[x, y]).unwrap();
            let p = ReinhardtProfile::Ball { n: 2, radius: 1.0 };
            let a = bergman_reinhardt(&p, &z, d).unwrap().value;
            let b = bergman_reinhardt(&p, &z, d + 1).unwrap().value;
            prop_assert!(b >= a);
        }
    }
}
