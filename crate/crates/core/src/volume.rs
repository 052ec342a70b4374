//! Certified bounds for the Carathéodory and Kobayashi-Eisenman volume
//! elements in terms of `p_D`, plus the auxiliary maps used in the proofs.
//!
//! Every bound here holds for both volume elements at once; the two are
//! never computed separately.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::ConvexityClass;
use crate::linalg::{c, CVector, C64};
use crate::minimal_basis::MinimalBasis;

/// Values above this are reported as `+inf`.
pub const OVERFLOW: f64 = 1e300;
/// Default relative outward inflation of certified intervals.
pub const DEFAULT_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolumeError {
    #[error("dimension {0} is below 2")]
    BadDimension(usize),
    #[error("p_D must be positive and finite, got {0}")]
    BadPd(f64),
    #[error("domain is unbounded")]
    UnboundedDomain,
    #[error("pole of the Moebius map at coordinate {0}")]
    Pole(usize),
}

fn cap(x: f64) -> f64 {
    if x > OVERFLOW {
        f64::INFINITY
    } else {
        x
    }
}

/// Closed interval `[lo, hi]` of nonnegative reals, `hi` possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Relative outward inflation already applied.
    pub slack: f64,
}

impl Interval {
    /// `[lo, hi]` inflated outward by the relative `slack`.
    pub fn new(lo: f64, hi: f64, slack: f64) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: {lo} > {hi}");
        Self {
            lo: cap((lo * (1.0 - slack)).max(0.0)),
            hi: cap(hi * (1.0 + slack)),
            slack,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        if !self.intersects(other) {
            return None;
        }
        Some(Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
            slack: self.slack.max(other.slack),
        })
    }

    /// Relative containment margin of `x`: `min(x/lo - 1, 1 - x/hi)`,
    /// nonnegative exactly when `x` lies in the interval.
    pub fn containment_margin(&self, x: f64) -> f64 {
        let lower = if self.lo > 0.0 { x / self.lo - 1.0 } else { f64::INFINITY };
        let upper = if self.hi.is_finite() { 1.0 - x / self.hi } else { f64::INFINITY };
        lower.min(upper)
    }

    /// Relative overlap margin: nonnegative exactly when the intervals meet.
    pub fn intersection_margin(&self, other: &Interval) -> f64 {
        let a = if other.lo > 0.0 { self.hi / other.lo - 1.0 } else { f64::INFINITY };
        let b = if self.lo > 0.0 { other.hi / self.lo - 1.0 } else { f64::INFINITY };
        a.min(b)
    }
}

/// Lower and upper constants bounding `v_D p_D^2`.
pub fn theorem_constants(class: ConvexityClass, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let upper = ((4f64.powi(n as i32) - 1.0) / 3.0).powi(n as i32);
    let lower = match class {
        ConvexityClass::Convex => (4.0 * nf).powi(-(n as i32)),
        ConvexityClass::CConvex => (16.0 * nf).powi(-(n as i32)),
    };
    (lower, upper)
}

/// Interval for `v_D(z)` given `p_D(z)`, with the default slack.
pub fn certified_interval(class: ConvexityClass, n: usize, p_d: f64) -> Result<Interval, VolumeError> {
    certified_interval_with_tau_error(class, n, p_d, 0.0, DEFAULT_SLACK)
}

/// Interval for `v_D(z)` when each `tau_j` carries relative error `tau_error`;
/// both ends move outward by `(1 + tau_error)^{2n}`.
pub fn certified_interval_with_tau_error(
    class: ConvexityClass,
    n: usize,
    p_d: f64,
    tau_error: f64,
    slack: f64,
) -> Result<Interval, VolumeError> {
    if n < 2 {
        return Err(VolumeError::BadDimension(n));
    }
    if !(p_d > 0.0 && p_d.is_finite()) {
        return Err(VolumeError::BadPd(p_d));
    }
    let (lo, hi) = theorem_constants(class, n);
    let spread = (1.0 + tau_error).powi(2 * n as i32);
    let p2 = p_d * p_d;
    Ok(Interval::new(lo / p2 / spread, hi / p2 * spread, slack))
}

/// Lower bound on the quotient invariant `c_D / k_D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientBound {
    pub n: usize,
    pub class: ConvexityClass,
    pub value: f64,
}

/// `(3 / (4n(4^n - 1)))^n` for convex and `(3 / (16n(4^n - 1)))^n` for C-convex domains.
pub fn quotient_lower_bound(class: ConvexityClass, n: usize) -> Result<QuotientBound, VolumeError> {
    if n < 2 {
        return Err(VolumeError::BadDimension(n));
    }
    let (lo, hi) = theorem_constants(class, n);
    Ok(QuotientBound {
        n,
        class,
        value: lo / hi,
    })
}

/// `1 / (4n diam^2)^n` (convex) or `1 / (16n diam^2)^n` (C-convex).
pub fn bounded_domain_lower_bound(class: ConvexityClass, n: usize, diam: f64) -> Result<f64, VolumeError> {
    if n < 2 {
        return Err(VolumeError::BadDimension(n));
    }
    if !diam.is_finite() {
        return Err(VolumeError::UnboundedDomain);
    }
    let (lo, _) = theorem_constants(class, n);
    Ok(lo / diam.powi(2 * n as i32))
}

/// `p_D^2 <= diam^{2n}`, which reduces the bounded-domain bound to the
/// `p_D` bound; allows relative slack `rel`.
pub fn p_d_within_diameter(basis: &MinimalBasis, diam: f64, rel: f64) -> bool {
    basis.taus.iter().all(|&t| t <= diam * (1.0 + rel))
}

/// `[R^{-2n}, tau_1^{-2n}]` from `B(z, tau_1) ⊂ D ⊂ B(z, R)`.
///
/// `tau_1` is treated as carrying the basis' relative accuracy.
pub fn monotonicity_bounds(basis: &MinimalBasis, circumscribed_radius: f64) -> Interval {
    let n = basis.dim() as i32;
    let eps = basis.tau_accuracy();
    let tau1 = basis.taus[0] * (1.0 - eps);
    let lo = if circumscribed_radius.is_finite() {
        circumscribed_radius.powi(-2 * n)
    } else {
        0.0
    };
    let hi = tau1.powi(-2 * n);
    Interval::new(lo.min(hi), hi, DEFAULT_SLACK)
}

/// `Psi(z) = (z_1 / (2 - z_1), .., z_n / (2 - z_n))`.
pub fn psi_map(z: &CVector) -> Result<CVector, VolumeError> {
    let two = c(2.0, 0.0);
    let mut out = Vec::with_capacity(z.dim());
    for (k, x) in z.entries().iter().enumerate() {
        let den = two - x;
        if den.norm() == 0.0 {
            return Err(VolumeError::Pole(k));
        }
        out.push(x / den);
    }
    Ok(CVector::new(out).expect("finite away from the pole"))
}

/// `det Psi'(z) = prod_k 2 / (2 - z_k)^2`.
pub fn psi_jacobian_det(z: &CVector) -> Result<C64, VolumeError> {
    let two = c(2.0, 0.0);
    let mut det = c(1.0, 0.0);
    for (k, x) in z.entries().iter().enumerate() {
        let den = two - x;
        if den.norm() == 0.0 {
            return Err(VolumeError::Pole(k));
        }
        det *= two / (den * den);
    }
    Ok(det)
}

/// `n^{-n}`, the lower bound for the unit polydisc at its center.
pub fn scaling_bound_polydisc(n: usize) -> f64 {
    (n as f64).powi(-(n as i32))
}
