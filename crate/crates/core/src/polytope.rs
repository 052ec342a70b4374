//! Vertex enumeration for H-polytopes `{x in R^d : a_i . x <= b_i}`.
//!
//! Only meant for the small real dimensions that arise here (`d = 2n`,
//! `n <= 3`). Every `d`-subset of constraints is solved; feasible solutions
//! are vertices. A large bounding box is appended so unbounded polyhedra show
//! up as vertices on the box.

use nalgebra::{DMatrix, DVector};

/// Half-width of the auxiliary box used to detect unboundedness.
pub const BOX_RADIUS: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct Vertices {
    pub points: Vec<Vec<f64>>,
    /// True when some vertex lies on the auxiliary box, i.e. the polyhedron
    /// is unbounded (or extends beyond the box).
    pub touches_box: bool,
}

fn combinations(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Enumerates vertices of `{a_i . x <= b_i} ∩ [-BOX_RADIUS, BOX_RADIUS]^d`.
pub fn enumerate_vertices(rows: &[Vec<f64>], rhs: &[f64]) -> Vertices {
    let d = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut all_rows: Vec<Vec<f64>> = rows.to_vec();
    let mut all_rhs: Vec<f64> = rhs.to_vec();
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut r = vec![0.0; d];
            r[k] = sign;
            all_rows.push(r);
            all_rhs.push(BOX_RADIUS);
        }
    }
    let m = all_rows.len();
    let norms: Vec<f64> = all_rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut touches_box = false;
    combinations(m, d, |subset| {
        let a = DMatrix::from_fn(d, d, |i, j| all_rows[subset[i]][j]);
        let b = DVector::from_fn(d, |i, _| all_rhs[subset[i]]);
        let Some(x) = a.lu().solve(&b) else {
            return;
        };
        if !x.iter().all(|v| v.is_finite()) {
            return;
        }
        let scale = 1.0 + x.norm();
        let feasible = all_rows.iter().zip(&all_rhs).zip(&norms).all(|((r, &bi), &nr)| {
            let lhs: f64 = r.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            lhs <= bi + 1e-9 * scale * nr.max(1.0)
        });
        if !feasible {
            return;
        }
        let v: Vec<f64> = x.iter().cloned().collect();
        if v.iter().any(|c| c.abs() >= BOX_RADIUS * (1.0 - 1e-9)) {
            touches_box = true;
        }
        let dup = points.iter().any(|p| {
            p.iter()
                .zip(&v)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                <= 1e-9 * scale
        });
        if !dup {
            points.push(v);
        }
    });
    Vertices {
        points,
        touches_box,
    }
}

/// Maximum pairwise distance between points.
pub fn max_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let d = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            best = best.max(d);
        }
    }
    best.sqrt()
}
