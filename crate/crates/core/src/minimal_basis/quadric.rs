//! Nearest boundary point of a convex quadric region inside a complex slice.
//!
//! In slice coordinates `y in C^k` the region is `{ f(y) < 0 }` with
//!
//! ```text
//! f(y) = y* H y + Re(g* y) + c,   H Hermitian PSD,  c = f(0) < 0.
//! ```
//!
//! The closest point of `{f = 0}` to the origin satisfies `y = nu (H y + g/2)`
//! for a multiplier `nu in (0, 1/lambda_max(H)]`. In the eigenbasis of `H` the
//! constraint value along that curve is increasing in `nu`, so the multiplier
//! is found by bisection. When the gradient has no weight on the top
//! eigenspace the root sits at the pole (the "hard case" of the trust-region
//! subproblem) and the top-eigenspace component is solved for directly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::linalg::{c, C64};

pub(crate) struct Quadric {
    pub h: DMatrix<C64>,
    pub g: DVector<C64>,
    pub c: f64,
}

#[derive(Debug)]
pub(crate) enum QuadricOutcome {
    Boundary(DVector<C64>),
    /// `f < 0` on the whole slice (no boundary point); carries a direction.
    Unbounded(DVector<C64>),
}

impl Quadric {
    #[cfg(test)]
    pub fn value(&self, y: &DVector<C64>) -> f64 {
        let hy = &self.h * y;
        y.dotc(&hy).re + self.g.dotc(y).re + self.c
    }

    /// Positive `s` with `f(s y) = 0`.
    fn ray_root(&self, y: &DVector<C64>) -> Option<f64> {
        let a = y.dotc(&(&self.h * y)).re.max(0.0);
        let b = self.g.dotc(y).re;
        let c0 = self.c;
        if a <= f64::MIN_POSITIVE {
            if b > 0.0 {
                return Some(-c0 / b);
            }
            return None;
        }
        let disc = (b * b - 4.0 * a * c0).max(0.0).sqrt();
        // Stable form of (-b + disc) / (2a).
        let s = if b >= 0.0 {
            -2.0 * c0 / (b + disc)
        } else {
            (disc - b) / (2.0 * a)
        };
        Some(s)
    }

    pub fn solve(&self) -> QuadricOutcome {
        let k = self.g.len();
        let eig = SymmetricEigen::new(self.h.clone());
        let lambdas: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
        let v = eig.eigenvectors;
        let gt = v.adjoint() * &self.g;
        let lambda_max = lambdas.iter().cloned().fold(0.0, f64::max);
        let g_norm2: f64 = gt.iter().map(|x| x.norm_sqr()).sum();
        let h_scale = lambda_max.max(f64::MIN_POSITIVE);

        let top: Vec<bool> = lambdas
            .iter()
            .map(|&l| lambda_max > 1e-14 * (1.0 + g_norm2.sqrt()) && l >= lambda_max * (1.0 - 1e-10))
            .collect();

        let psi = |nu: f64, skip_top: bool| -> f64 {
            let mut acc = self.c;
            for i in 0..k {
                if skip_top && top[i] {
                    continue;
                }
                let w = gt[i].norm_sqr();
                let den = 1.0 - nu * lambdas[i];
                acc += w * (nu / 2.0) * (1.0 - nu * lambdas[i] / 2.0) / (den * den);
            }
            acc
        };
        let y_of = |nu: f64, skip_top: bool| -> DVector<C64> {
            DVector::from_fn(k, |i, _| {
                if skip_top && top[i] {
                    c(0.0, 0.0)
                } else {
                    gt[i] * (nu / 2.0 / (1.0 - nu * lambdas[i]))
                }
            })
        };

        let yt = if lambda_max <= 1e-14 * (1.0 + g_norm2.sqrt()) {
            // f is affine on the slice.
            if g_norm2 <= 1e-300 {
                let mut dir = DVector::zeros(k);
                dir[0] = c(1.0, 0.0);
                return QuadricOutcome::Unbounded(&v * dir);
            }
            let nu = -2.0 * self.c / g_norm2;
            y_of(nu, false)
        } else {
            let nu_max = 1.0 / h_scale;
            let nu_hi = nu_max * (1.0 - 1e-13);
            if psi(nu_hi, false) < 0.0 {
                // Hard case: the multiplier sits at the pole.
                let y_rest = y_of(nu_max, true);
                let g_top: DVector<C64> =
                    DVector::from_fn(k, |i, _| if top[i] { gt[i] } else { c(0.0, 0.0) });
                let top_norm = g_top.norm();
                let dir_t = if top_norm > 1e-12 * g_norm2.sqrt().max(1e-300) && top_norm > 0.0 {
                    g_top / c(top_norm, 0.0)
                } else {
                    deterministic_top_direction(&v, &top)
                };
                let rest_val = psi_value_at(&lambdas, &gt, &y_rest, self.c);
                let a = lambda_max;
                let b = dir_t.dotc(&gt).re;
                let disc = (b * b - 4.0 * a * rest_val).max(0.0).sqrt();
                let t = (disc - b) / (2.0 * a);
                y_rest + dir_t * c(t.max(0.0), 0.0)
            } else {
                let (mut lo, mut hi) = (0.0, nu_hi);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if psi(mid, false) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                y_of(0.5 * (lo + hi), false)
            }
        };
        let y = &v * yt;
        match self.ray_root(&y) {
            Some(s) if s.is_finite() && s > 0.0 => QuadricOutcome::Boundary(y * c(s, 0.0)),
            _ => QuadricOutcome::Unbounded(y),
        }
    }
}

/// `f` evaluated in eigen-coordinates.
fn psi_value_at(lambdas: &[f64], gt: &DVector<C64>, yt: &DVector<C64>, c0: f64) -> f64 {
    let mut acc = c0;
    for i in 0..lambdas.len() {
        acc += lambdas[i] * yt[i].norm_sqr() + (gt[i].conj() * yt[i]).re;
    }
    acc
}

/// Unit vector (eigen-coordinates) in the top eigenspace, chosen as the
/// normalized projection of the slice coordinate vector with the largest
/// projection (first index on ties).
fn deterministic_top_direction(v: &DMatrix<C64>, top: &[bool]) -> DVector<C64> {
    let k = top.len();
    let mut best = 0;
    let mut best_norm = -1.0;
    for i in 0..k {
        // Projection of e_i in eigen coordinates: components conj(V[i, j]) for top j.
        let norm: f64 = (0..k)
            .filter(|&j| top[j])
            .map(|j| v[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > best_norm * (1.0 + 1e-9) {
            best = i;
            best_norm = norm;
        }
    }
    let mut dir = DVector::from_fn(k, |j, _| if top[j] { v[(best, j)].conj() } else { c(0.0, 0.0) });
    let n = dir.norm();
    dir /= c(n, 0.0);
    dir
}
