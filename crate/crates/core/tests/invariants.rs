//! Cross-module invariants: symmetry of the minimal basis, agreement of the
//! closed-form and polar boundary searches, and soundness of the certified
//! intervals against the exact oracles.

use std::sync::Arc;

use holovol_core::bergman::bergman_closed;
use holovol_core::constants::constants_for;
use holovol_core::domain::{uniform_in_ball, Backend, ConvexityClass, DomainSpec, HalfspaceConstraint, OracleDomain};
use holovol_core::linalg::{random_gaussian, random_invertible, random_unitary, CMatrix, CVector};
use holovol_core::minimal_basis::{boundary_distance_in_slice, minimal_basis, BasisConfig, MinimalBasis};
use holovol_core::volume::{certified_interval, certified_interval_with_tau_error, monotonicity_bounds};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::new(random_gaussian(rng, n).iter().copied().collect()).unwrap()
}

fn column(m: &CMatrix, j: usize) -> CVector {
    CVector::new((0..m.dim()).map(|i| m.get(i, j)).collect()).unwrap()
}

/// Bounded polytope containing the origin: normals with a positive null
/// combination plus a few random cuts.
fn random_polytope<R: Rng>(rng: &mut R, n: usize) -> DomainSpec {
    let mut normals: Vec<CVector> = (0..2 * n).map(|_| gaussian_vector(rng, n)).collect();
    let mut last = CVector::zeros(n);
    for a in &normals {
        last = last.axpy(-(0.2 + rng.random::<f64>()), a);
    }
    normals.push(last);
    for _ in 0..rng.random_range(0..3) {
        normals.push(gaussian_vector(rng, n));
    }
    let constraints = normals
        .into_iter()
        .map(|a| HalfspaceConstraint::new(a, 0.3 + rng.random::<f64>()))
        .collect();
    DomainSpec::halfspace(n, constraints).unwrap()
}

fn random_ball_image<R: Rng>(rng: &mut R, n: usize) -> DomainSpec {
    DomainSpec::ball_image(random_invertible(rng, n), gaussian_vector(rng, n)).unwrap()
}

/// A point on a random ray from `anchor`, a random fraction of the way to the
/// boundary. Rejection sampling is hopeless for thin polytopes.
fn interior_point<R: Rng>(rng: &mut R, d: &DomainSpec, anchor: &CVector) -> CVector {
    let n = d.dim();
    let u = gaussian_vector(rng, n);
    let u = u.scale(1.0 / u.norm());
    let (_, radius) = d.bounding_ball().unwrap();
    let (mut lo, mut hi) = (0.0, 2.0 * radius + anchor.norm());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if d.contains(&anchor.axpy(mid, &u)).unwrap() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    anchor.axpy(lo * rng.random_range(0.05..0.95), &u)
}

fn basis(d: &DomainSpec, z: &CVector) -> MinimalBasis {
    minimal_basis(d, z, &BasisConfig::default()).unwrap()
}

fn ball_image_point<R: Rng>(rng: &mut R, d: &DomainSpec) -> CVector {
    let Backend::BallImage { matrix, center, .. } = d.backend() else {
        unreachable!()
    };
    matrix.apply(&uniform_in_ball(rng, d.dim()).scale(0.98)).add(center)
}

#[test]
fn translation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let n = 2 + trial % 2;
        let d = if trial % 3 == 0 {
            random_ball_image(&mut rng, n)
        } else if trial % 3 == 1 {
            random_polytope(&mut rng, n)
        } else {
            let radii: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
            DomainSpec::polydisc(gaussian_vector(&mut rng, n), radii).unwrap()
        };
        let anchor = match d.backend() {
            Backend::Halfspace { .. } => CVector::zeros(n),
            _ => d.bounding_ball().unwrap().0,
        };
        let z = interior_point(&mut rng, &d, &anchor);
        let w = gaussian_vector(&mut rng, n).scale(3.0);
        let moved = d.translate(&w).unwrap();
        let a = basis(&d, &z);
        let b = basis(&moved, &z.add(&w));
        for (s, t) in a.taus.iter().zip(&b.taus) {
            assert!(rel(*t, *s) < 1e-12, "trial {trial}: {:?} vs {:?}", a.taus, b.taus);
        }
    }
}

#[test]
fn unitary_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..60 {
        let n = 2 + trial % 2;
        let (d, z) = if trial % 2 == 0 {
            let d = random_ball_image(&mut rng, n);
            let z = ball_image_point(&mut rng, &d);
            (d, z)
        } else {
            let d = random_polytope(&mut rng, n);
            let z = interior_point(&mut rng, &d, &CVector::zeros(n));
            (d, z)
        };
        let u = random_unitary(&mut rng, n);
        let rotated = d.linear_image(&u).unwrap();
        let a = basis(&d, &z);
        let b = basis(&rotated, &u.apply(&z));
        for j in 0..n {
            assert!(rel(b.taus[j], a.taus[j]) < 1e-9, "trial {trial}: {:?} vs {:?}", a.taus, b.taus);
            // Generic data has a unique nearest point in every slice.
            let moved = u.apply(&a.boundary_points[j]);
            assert!(
                moved.sub(&b.boundary_points[j]).norm() < 1e-6 * a.taus[j].max(1.0),
                "trial {trial}, step {j}"
            );
        }
    }
}

#[test]
fn basis_structure_on_all_backends() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut cases: Vec<(DomainSpec, CVector)> = Vec::new();
    for n in [2usize, 3] {
        for _ in 0..5 {
            let d = random_ball_image(&mut rng, n);
            let z = ball_image_point(&mut rng, &d);
            cases.push((d, z));
            let d = random_polytope(&mut rng, n);
            let z = interior_point(&mut rng, &d, &CVector::zeros(n));
            cases.push((d, z));
        }
        let pd = DomainSpec::polydisc(CVector::zeros(n), (1..=n).map(|k| k as f64).collect()).unwrap();
        let z = interior_point(&mut rng, &pd, &CVector::zeros(n));
        cases.push((pd, z));
        let l1 = DomainSpec::l1_ball(n, 1.5).unwrap();
        let z = interior_point(&mut rng, &l1, &CVector::zeros(n));
        cases.push((l1, z));
        let siegel = DomainSpec::siegel(n).unwrap();
        let w = uniform_in_ball(&mut rng, n).scale(0.9);
        cases.push((siegel.clone(), siegel.exact_oracle().unwrap().forward(&w)));
    }
    let bidisc = DomainSpec::symmetrized_bidisc();
    for _ in 0..3 {
        let z = interior_point(&mut rng, &bidisc, &CVector::zeros(2));
        cases.push((bidisc.clone(), z));
    }
    for (i, (d, z)) in cases.iter().enumerate() {
        let b = basis(d, z);
        let n = d.dim();
        let tau_n = b.taus[n - 1];
        assert!(b.ortho_residual <= 1e-7, "case {i}: residual {}", b.ortho_residual);
        let nest_tol = if b.approximate { 1e-4 } else { 1e-8 };
        for j in 0..n - 1 {
            assert!(b.taus[j + 1] >= b.taus[j] - nest_tol * tau_n, "case {i}: {:?}", b.taus);
        }
        // p^j sits on the boundary: just inside and just outside along the ray.
        let eps = if b.approximate { 1e-3 } else { 1e-7 };
        for p in &b.boundary_points {
            let ray = p.sub(z);
            assert!(d.contains(&z.axpy(1.0 - eps, &ray)).unwrap(), "case {i}: inner probe");
            assert!(!d.contains(&z.axpy(1.0 + eps, &ray)).unwrap(), "case {i}: outer probe");
        }
    }
}

/// The same domain seen only through its membership test.
fn as_oracle(d: &DomainSpec) -> DomainSpec {
    let inner = d.clone();
    DomainSpec::oracle(
        d.dim(),
        OracleDomain {
            name: "wrapped".into(),
            predicate: Arc::new(move |x: &CVector| inner.contains(x).unwrap_or(false)),
            search_radius: 1e3,
            refine_iters: 3,
            bounding_ball: d.bounding_ball(),
        },
        ConvexityClass::Convex,
    )
    .unwrap()
}

#[test]
fn slice_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let config = BasisConfig::default();
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = 2 + trial % 2;
        let (d, z) = if trial % 2 == 0 {
            let d = random_ball_image(&mut rng, n);
            let z = ball_image_point(&mut rng, &d);
            (d, z)
        } else {
            let d = random_polytope(&mut rng, n);
            let z = interior_point(&mut rng, &d, &CVector::zeros(n));
            (d, z)
        };
        let k = 1 + (trial / 2) % 2;
        let u = random_unitary(&mut rng, n);
        let slice: Vec<CVector> = (0..k).map(|j| column(&u, j)).collect();
        let exact = boundary_distance_in_slice(&d, &z, &slice, &config).unwrap();
        let polar = boundary_distance_in_slice(&as_oracle(&d), &z, &slice, &config).unwrap();
        assert!(!exact.approximate && polar.approximate);
        let e = rel(polar.tau, exact.tau);
        worst = worst.max(e);
        assert!(e <= 1e-4, "trial {trial} (n={n}, k={k}): polar {} vs exact {}", polar.tau, exact.tau);
    }
    println!("slice-oracle equivalence: worst relative gap {worst:.2e}");
}

#[test]
fn biholomorphic_covariance_of_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for n in 2..=4 {
        for _ in 0..50 {
            let l = random_invertible(&mut rng, n);
            let image = DomainSpec::ball_image(l.clone(), CVector::zeros(n)).unwrap();
            let z = uniform_in_ball(&mut rng, n).scale(0.99);
            let expected = (1.0 - z.norm_squared()).powi(-(n as i32 + 1)) / l.determinant().norm_sqr();
            let v = image.exact_volume_element(&l.apply(&z)).unwrap();
            assert!(rel(v, expected) < 1e-9);
            // Pre-rotating the ball by a unitary fixing 0 changes nothing.
            let u = random_unitary(&mut rng, n);
            let rotated = DomainSpec::ball_image(l.mul(&u), CVector::zeros(n)).unwrap();
            assert!(rel(rotated.exact_volume_element(&l.apply(&z)).unwrap(), v) < 1e-9);
        }
    }
}

#[test]
fn ratio_is_linearly_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for n in 2..=3 {
        for _ in 0..50 {
            let d = random_ball_image(&mut rng, n);
            let z = ball_image_point(&mut rng, &d);
            let l = random_invertible(&mut rng, n);
            let image = d.linear_image(&l).unwrap();
            let lz = l.apply(&z);
            let r1 = d.exact_volume_element(&z).unwrap() / bergman_closed(&d, &z).unwrap().value;
            let r2 = image.exact_volume_element(&lz).unwrap() / bergman_closed(&image, &lz).unwrap().value;
            assert!(rel(r2, r1) < 1e-9, "{r1} vs {r2}");
        }
    }
}

#[test]
fn quotient_bounds_ratio_is_a_power_of_four() {
    for n in 2..=12u64 {
        let c = constants_for(n);
        let ratio = c.iter().find(|x| x.key == "mu_n/nu_n").unwrap();
        assert_eq!(ratio.exact, 4u64.pow(n as u32).to_string());
        let mu = c.iter().find(|x| x.key == "mu_n").unwrap().value;
        let nu = c.iter().find(|x| x.key == "nu_n").unwrap().value;
        assert!(1.0 >= mu && mu >= nu);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_containment(seed in any::<u64>(), n in 2usize..=4, siegel in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, z) = if siegel {
            let d = DomainSpec::siegel(n).unwrap();
            let w = uniform_in_ball(&mut rng, n).scale(0.99);
            let z = d.exact_oracle().unwrap().forward(&w);
            (d, z)
        } else {
            let d = random_ball_image(&mut rng, n);
            let z = ball_image_point(&mut rng, &d);
            (d, z)
        };
        let b = basis(&d, &z);
        let v = d.exact_volume_element(&z).unwrap();
        let iv = certified_interval(d.class(), n, b.p_d()).unwrap();
        prop_assert!(iv.contains(v), "v = {v}, interval {iv:?}");
        let cc = certified_interval(ConvexityClass::CConvex, n, b.p_d()).unwrap();
        prop_assert!(cc.contains(v));
    }

    #[test]
    fn certified_and_monotonicity_intervals_meet(seed in any::<u64>(), n in 2usize..=3, kind in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = match kind {
            0 => random_polytope(&mut rng, n),
            1 => DomainSpec::polydisc(gaussian_vector(&mut rng, n), (0..n).map(|_| 0.2 + rng.random::<f64>()).collect()).unwrap(),
            2 => DomainSpec::l1_ball(n, 0.5 + rng.random::<f64>()).unwrap(),
            _ => random_ball_image(&mut rng, n),
        };
        let anchor = match d.backend() {
            Backend::Halfspace { .. } => CVector::zeros(n),
            _ => d.bounding_ball().unwrap().0,
        };
        let z = interior_point(&mut rng, &d, &anchor);
        let b = basis(&d, &z);
        let iv = certified_interval_with_tau_error(d.class(), n, b.p_d(), b.tau_accuracy(), 1e-9).unwrap();
        let mono = monotonicity_bounds(&b, d.circumscribed_radius(&z).unwrap());
        prop_assert!(iv.intersects(&mono), "{iv:?} vs {mono:?}");
    }
}

