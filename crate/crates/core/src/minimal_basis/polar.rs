//! Generic boundary search for domains known through membership only.
//!
//! Directions on the unit sphere of a `k`-dimensional complex slice are
//! parametrized by `k - 1` modulus angles and `k` phases. A fixed grid is
//! scanned in lexicographic order (ties keep the earlier direction), each ray
//! is marched to its first exit, and the best few directions are polished by
//! coordinate-wise golden-section search.

use nalgebra::DVector;

use crate::linalg::{c, CVector, C64};

#[derive(Clone, Debug)]
pub(crate) struct PolarParams {
    pub directions_per_pair: usize,
    pub max_grid_rays: usize,
    pub refine_rounds: usize,
    pub search_radius: f64,
    /// Convex domains cannot re-enter along a ray, so a single probe at the
    /// current best radius decides whether a ray can improve.
    pub convex: bool,
}

pub(crate) struct PolarHit {
    pub radius: f64,
    pub direction: DVector<C64>,
}

pub(crate) enum PolarOutcome {
    Hit(PolarHit),
    Unbounded(DVector<C64>),
}

const MARCH_STEPS: usize = 16;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Slice-coordinate unit vector for the angle parameters.
fn direction(params: &[f64], k: usize) -> DVector<C64> {
    let (chis, phis) = params.split_at(k - 1);
    let mut moduli = vec![1.0; k];
    let mut prod = 1.0;
    for j in 0..k {
        if j < k - 1 {
            moduli[j] = prod * chis[j].cos();
            prod *= chis[j].sin();
        } else {
            moduli[j] = prod;
        }
    }
    DVector::from_fn(k, |j, _| C64::from_polar(moduli[j], phis[j]))
}

struct Ray<'a, F: Fn(&CVector) -> bool> {
    inside: &'a F,
    z: &'a CVector,
    basis: &'a [CVector],
    params: &'a PolarParams,
}

impl<F: Fn(&CVector) -> bool> Ray<'_, F> {
    fn point(&self, y: &DVector<C64>, r: f64) -> CVector {
        let mut x = self.z.as_dvector().clone();
        for (q, yj) in self.basis.iter().zip(y.iter()) {
            x += q.as_dvector() * (yj * c(r, 0.0));
        }
        CVector::from_dvector(x)
    }

    fn is_inside(&self, y: &DVector<C64>, r: f64) -> bool {
        (self.inside)(&self.point(y, r))
    }

    fn bisect(&self, y: &DVector<C64>, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
        while hi - lo > rel_tol * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.is_inside(y, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// First exit radius below `bound`, if any.
    fn exit_below(&self, y: &DVector<C64>, bound: f64, rel_tol: f64) -> Option<f64> {
        if self.params.convex {
            if self.is_inside(y, bound) {
                return None;
            }
            return Some(self.bisect(y, 0.0, bound, rel_tol));
        }
        let mut prev = 0.0;
        for step in 1..=MARCH_STEPS {
            let r = bound * step as f64 / MARCH_STEPS as f64;
            if !self.is_inside(y, r) {
                return Some(self.bisect(y, prev, r, rel_tol));
            }
            prev = r;
        }
        None
    }

    /// First exit radius with no prior bound: doubling, then a march.
    fn exit_unbounded(&self, y: &DVector<C64>, rel_tol: f64) -> Option<f64> {
        let mut lo = 0.0;
        let mut r = (self.params.search_radius * 1e-6).min(1.0);
        while r <= self.params.search_radius {
            if !self.is_inside(y, r) {
                let steps = MARCH_STEPS;
                let mut prev = lo;
                for s in 1..=steps {
                    let t = lo + (r - lo) * s as f64 / steps as f64;
                    if !self.is_inside(y, t) {
                        return Some(self.bisect(y, prev, t, rel_tol));
                    }
                    prev = t;
                }
                return Some(self.bisect(y, prev, r, rel_tol));
            }
            lo = r;
            r *= 2.0;
        }
        None
    }
}

fn grid(k: usize, params: &PolarParams) -> (usize, usize) {
    let mut m_phase = params.directions_per_pair.max(4);
    loop {
        let m_chi = (m_phase / 4).max(1);
        let total = m_phase.pow(k as u32) * (m_chi + 1).pow(k as u32 - 1);
        if total <= params.max_grid_rays || m_phase <= 4 {
            return (m_phase, m_chi);
        }
        m_phase /= 2;
    }
}

pub(crate) fn search<F: Fn(&CVector) -> bool>(
    inside: &F,
    z: &CVector,
    basis: &[CVector],
    params: &PolarParams,
) -> PolarOutcome {
    let k = basis.len();
    let ray = Ray {
        inside,
        z,
        basis,
        params,
    };
    let (m_phase, m_chi) = grid(k, params);
    let dims = 2 * k - 1;
    let sizes: Vec<usize> = (0..dims)
        .map(|i| if i < k - 1 { m_chi + 1 } else { m_phase })
        .collect();
    let value = |i: usize, t: usize| -> f64 {
        if i < k - 1 {
            std::f64::consts::FRAC_PI_2 * t as f64 / m_chi as f64
        } else {
            std::f64::consts::TAU * t as f64 / m_phase as f64
        }
    };
    let coarse_tol = 1e-7;
    let fine_tol = 1e-13;

    let mut best = f64::INFINITY;
    // Improving directions, most recent (best) last.
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut first_direction: Option<DVector<C64>> = None;
    let mut counter = vec![0usize; dims];
    'grid: loop {
        let theta: Vec<f64> = counter.iter().enumerate().map(|(i, &t)| value(i, t)).collect();
        let y = direction(&theta, k);
        if first_direction.is_none() {
            first_direction = Some(y.clone());
        }
        let hit = if best.is_finite() {
            ray.exit_below(&y, best, coarse_tol)
        } else {
            ray.exit_unbounded(&y, coarse_tol)
        };
        if let Some(r) = hit {
            if r < best {
                best = r;
                candidates.push((r, theta));
            }
        }
        // Advance the odometer, last coordinate fastest.
        let mut i = dims;
        loop {
            if i == 0 {
                break 'grid;
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < sizes[i] {
                break;
            }
            counter[i] = 0;
        }
    }
    if candidates.is_empty() {
        return PolarOutcome::Unbounded(first_direction.expect("grid is nonempty"));
    }

    let spacing: Vec<f64> = (0..dims)
        .map(|i| {
            if i < k - 1 {
                std::f64::consts::FRAC_PI_2 / m_chi as f64
            } else {
                std::f64::consts::TAU / m_phase as f64
            }
        })
        .collect();

    let radius_at = |theta: &[f64], bound: f64| -> f64 {
        let y = direction(theta, k);
        ray.exit_below(&y, bound, fine_tol).unwrap_or(bound)
    };

    let mut overall: Option<(f64, Vec<f64>)> = None;
    for (_, start) in candidates.iter().rev().take(3) {
        let mut theta = start.clone();
        let cap = 4.0 * best;
        let mut current = radius_at(&theta, cap);
        let mut h: Vec<f64> = spacing.clone();
        let max_rounds = (4 * params.refine_rounds).max(params.refine_rounds + 8);
        for round in 0..max_rounds {
            let before = current;
            for i in 0..dims {
                let (lo, hi) = (theta[i] - h[i], theta[i] + h[i]);
                let mut a = lo;
                let mut b = hi;
                let mut x1 = b - GOLDEN * (b - a);
                let mut x2 = a + GOLDEN * (b - a);
                let eval = |x: f64, theta: &mut Vec<f64>| {
                    let keep = theta[i];
                    theta[i] = x;
                    let r = radius_at(theta, cap);
                    theta[i] = keep;
                    r
                };
                let mut f1 = eval(x1, &mut theta);
                let mut f2 = eval(x2, &mut theta);
                // The floor keeps the loop finite once h is below the resolution of theta.
                let tol = (1e-9 * h[i]).max(8.0 * f64::EPSILON * (lo.abs().max(hi.abs()).max(1.0)));
                let mut iters = 0;
                while b - a > tol && iters < 200 {
                    iters += 1;
                    if f1 <= f2 {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - GOLDEN * (b - a);
                        f1 = eval(x1, &mut theta);
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + GOLDEN * (b - a);
                        f2 = eval(x2, &mut theta);
                    }
                }
                let (xm, fm) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
                if fm < current {
                    current = fm;
                    theta[i] = xm;
                }
            }
            for hi in h.iter_mut() {
                *hi *= 0.25;
            }
            let change = (before - current).abs() / current;
            if round + 1 >= params.refine_rounds && change < 1e-7 {
                break;
            }
        }
        if overall.as_ref().is_none_or(|(r, _)| current < *r) {
            overall = Some((current, theta));
        }
    }
    let (radius, theta) = overall.expect("at least one candidate");
    PolarOutcome::Hit(PolarHit {
        radius,
        direction: direction(&theta, k),
    })
}
