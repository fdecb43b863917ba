//! Geometry validation: the property suite over every manifold kind, plus
//! closed-form and ODE-integration oracles for individual operators.

use riemopt::array::Array;
use riemopt::checks::{run_manifold_suite, Plain};
use riemopt::error::Error;
use riemopt::manifolds::Manifold;

fn assert_close(a: f64, b: f64, tol: f64, label: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{label}: {a} vs {b} (|diff| = {:.3e}, tol {tol:.1e})",
        (a - b).abs()
    );
}

fn arr(v: Vec<f64>) -> Array {
    Array::from_vec(v)
}

fn mat(r: usize, c: usize, v: Vec<f64>) -> Array {
    Array::from_vec(v).reshaped(vec![r, c]).unwrap()
}

fn catalog() -> Vec<Manifold> {
    vec![
        Manifold::euclidean(vec![3]).unwrap(),
        Manifold::euclidean(vec![2, 2]).unwrap(),
        Manifold::sphere(4).unwrap(),
        Manifold::hyperboloid(4).unwrap(),
        Manifold::poincare(3, 1.0).unwrap(),
        Manifold::poincare(2, 0.5).unwrap(),
        Manifold::stiefel(5, 2).unwrap(),
        Manifold::grassmannian(5, 2).unwrap(),
        Manifold::special_orthogonal(3).unwrap(),
        Manifold::special_orthogonal(4).unwrap(),
        Manifold::spd_affine_invariant(3).unwrap(),
        Manifold::spd_log_euclidean(3).unwrap(),
        Manifold::spd_log_cholesky(3).unwrap(),
        Manifold::cholesky(3).unwrap(),
        Manifold::product(vec![
            Manifold::sphere(3).unwrap(),
            Manifold::euclidean(vec![2]).unwrap(),
        ])
        .unwrap(),
    ]
}

#[test]
fn property_suite_over_catalog() {
    for m in catalog() {
        let report = run_manifold_suite(&Plain(&m), 30, 42, None).unwrap();
        for rec in &report.records {
            assert!(
                rec.pass,
                "{}: property {} failed (max_error {:.3e}, tol {:.1e})",
                m.kind_name(),
                rec.property,
                rec.max_error,
                rec.tol
            );
        }
    }
}

#[test]
fn sphere_quarter_circle() {
    let m = Manifold::sphere(3).unwrap();
    let x = arr(vec![1.0, 0.0, 0.0]);
    let u = arr(vec![0.0, std::f64::consts::FRAC_PI_2, 0.0]);
    let y = m.exp(&x, &u).unwrap();
    for (a, b) in y.data().iter().zip([0.0, 1.0, 0.0]) {
        assert_close(*a, b, 1e-15, "sphere exp quarter circle");
    }
    assert_close(
        m.dist(&x, &y).unwrap().data()[0],
        std::f64::consts::FRAC_PI_2,
        1e-12,
        "sphere quarter-circle distance",
    );
}

/// Transport the tangent (0,0,1)-style frame along the quarter circle from
/// e1 to e2: parallel transport carries e2-direction motion into -e1.
#[test]
fn sphere_ptransp_quarter_circle() {
    let m = Manifold::sphere(3).unwrap();
    let x = arr(vec![1.0, 0.0, 0.0]);
    let y = arr(vec![0.0, 1.0, 0.0]);
    let v = arr(vec![0.0, 1.0, 0.0]);
    let got = m.ptransp(&x, &y, &v).unwrap();
    for (a, b) in got.data().iter().zip([-1.0, 0.0, 0.0]) {
        assert_close(*a, b, 1e-12, "sphere ptransp closed form");
    }
}

/// Independent oracle: integrate the parallel-transport ODE v' = -<v, x'> x
/// along the great circle x(t) = cos t * x0 + sin t * e with classical RK4.
#[test]
fn sphere_ptransp_matches_transport_ode() {
    let m = Manifold::sphere(4).unwrap();
    let x = m.random(&[], 11);
    let u = m.random_tangent(&x, 0.8, 12).unwrap();
    let v = m.random_tangent(&x, 1.0, 13).unwrap();
    let y = m.exp(&x, &u).unwrap();
    let theta = m.norm(&x, &u).unwrap().data()[0];
    let e: Vec<f64> = u.data().iter().map(|a| a / theta).collect();
    let x0 = x.data().to_vec();

    let deriv = |t: f64, v: &[f64]| -> Vec<f64> {
        // x(t), x'(t) on the unit-speed great circle
        let (s, c) = t.sin_cos();
        let xt: Vec<f64> = x0.iter().zip(&e).map(|(a, b)| c * a + s * b).collect();
        let xp: Vec<f64> = x0.iter().zip(&e).map(|(a, b)| -s * a + c * b).collect();
        let vdotxp: f64 = v.iter().zip(&xp).map(|(a, b)| a * b).sum();
        xt.iter().map(|a| -vdotxp * a).collect()
    };
    let mut vt = v.data().to_vec();
    let n_steps = 2000;
    let h = theta / n_steps as f64;
    for k in 0..n_steps {
        let t = k as f64 * h;
        let k1 = deriv(t, &vt);
        let s2: Vec<f64> = vt.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = deriv(t + 0.5 * h, &s2);
        let s3: Vec<f64> = vt.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = deriv(t + 0.5 * h, &s3);
        let s4: Vec<f64> = vt.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = deriv(t + h, &s4);
        for i in 0..vt.len() {
            vt[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    let got = m.ptransp(&x, &y, &v).unwrap();
    for (a, b) in got.data().iter().zip(&vt) {
        assert_close(*a, *b, 1e-8, "sphere ptransp vs transport ODE");
    }
}

/// Independent oracle: integrate the Poincare-ball geodesic equation
/// x'' = (2c / (1 - c|x|^2)) (<x', x'> x ... ) — implemented via the
/// Christoffel symbols of the conformal metric — and compare with exp.
#[test]
fn poincare_exp_matches_geodesic_ode() {
    let c = 1.0;
    let m = Manifold::poincare(2, c).unwrap();
    let x = arr(vec![0.1, -0.2]);
    let u = arr(vec![0.3, 0.25]);
    let y = m.exp(&x, &u).unwrap();

    // state (p, w): p' = w, w_k' = -sum Gamma^k_{ij} w_i w_j with
    // Gamma^k_{ij} = s (d_ik x_j + d_jk x_i - d_ij x_k), s = 2c/(1-c|p|^2)
    let deriv = |state: &[f64]| -> Vec<f64> {
        let (p, w) = state.split_at(2);
        let n2: f64 = p.iter().map(|a| a * a).sum();
        let s = 2.0 * c / (1.0 - c * n2);
        let wdotp: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
        let wdotw: f64 = w.iter().map(|a| a * a).sum();
        let mut out = vec![0.0; 4];
        out[..2].copy_from_slice(w);
        for k in 0..2 {
            out[2 + k] = -s * (2.0 * wdotp * w[k] - wdotw * p[k]);
        }
        out
    };
    let mut state = vec![x.data()[0], x.data()[1], u.data()[0], u.data()[1]];
    let n_steps = 4000;
    let h = 1.0 / n_steps as f64;
    for _ in 0..n_steps {
        let k1 = deriv(&state);
        let s2: Vec<f64> = state.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = deriv(&s2);
        let s3: Vec<f64> = state.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = deriv(&s3);
        let s4: Vec<f64> = state.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = deriv(&s4);
        for i in 0..4 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    assert_close(y.data()[0], state[0], 1e-9, "poincare exp vs geodesic ODE (x)");
    assert_close(y.data()[1], state[1], 1e-9, "poincare exp vs geodesic ODE (y)");
}

#[test]
fn poincare_exp_from_origin() {
    // from the origin the geodesic is radial: exp_0(u) = tanh(|u|) u/|u|
    // at unit curvature, via the conformal factor 2 at 0
    let m = Manifold::poincare(2, 1.0).unwrap();
    let x = arr(vec![0.0, 0.0]);
    let u = arr(vec![0.5, 0.0]);
    let y = m.exp(&x, &u).unwrap();
    assert_close(y.data()[0], 0.5_f64.tanh(), 1e-15, "poincare radial exp");
    assert_close(y.data()[1], 0.0, 1e-15, "poincare radial exp (y)");
}

#[test]
fn poincare_dist_matches_arc_length() {
    // d(0, (r,0)) = int_0^r 2/(1-t^2) dt = 2 artanh r; check the library
    // distance against composite-Simpson quadrature of the metric length
    let m = Manifold::poincare(2, 1.0).unwrap();
    let r = 0.5;
    let x = arr(vec![0.0, 0.0]);
    let y = arr(vec![r, 0.0]);
    let f = |t: f64| 2.0 / (1.0 - t * t);
    let n = 1000;
    let h = r / n as f64;
    let mut quad = f(0.0) + f(r);
    for k in 1..n {
        quad += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    quad *= h / 3.0;
    let d = m.dist(&x, &y).unwrap().data()[0];
    assert_close(d, quad, 1e-10, "poincare dist vs quadrature");
    assert_close(d, 2.0 * 0.5_f64.atanh(), 1e-14, "poincare dist closed form");
}

#[test]
fn poincare_norm_at_origin() {
    // conformal factor at the origin is 2 for c = 1
    let m = Manifold::poincare(3, 1.0).unwrap();
    let x = arr(vec![0.0, 0.0, 0.0]);
    let u = arr(vec![1.0, 0.0, 0.0]);
    assert_close(m.norm(&x, &u).unwrap().data()[0], 2.0, 1e-15, "poincare norm at 0");
}

#[test]
fn hyperboloid_matches_poincare_distance() {
    // the stereographic projection z = s/(1+x0) is an isometry onto the
    // unit-curvature ball; distances must agree
    let hyp = Manifold::hyperboloid(3).unwrap();
    let ball = Manifold::poincare(2, 1.0).unwrap();
    let x = hyp.random(&[], 3);
    let y = hyp.random(&[], 4);
    let to_ball = |p: &Array| {
        let d = p.data();
        arr(vec![d[1] / (1.0 + d[0]), d[2] / (1.0 + d[0])])
    };
    let dh = hyp.dist(&x, &y).unwrap().data()[0];
    let db = ball.dist(&to_ball(&x), &to_ball(&y)).unwrap().data()[0];
    assert_close(dh, db, 1e-10, "hyperboloid vs poincare distance");
}

#[test]
fn spd_affine_invariant_closed_forms() {
    let m = Manifold::spd_affine_invariant(2).unwrap();
    let eye = mat(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
    // commuting case: dist(I, diag(e^2, 1)) = |diag(2, 0)|_F = 2
    let y = mat(2, 2, vec![(2.0_f64).exp(), 0.0, 0.0, 1.0]);
    assert_close(m.dist(&eye, &y).unwrap().data()[0], 2.0, 1e-10, "spd dist");
    // log at I of diag(e^2, 1) is diag(2, 0)
    let l = m.log(&eye, &y).unwrap();
    assert_close(l.data()[0], 2.0, 1e-10, "spd log diag");
    assert_close(l.data()[3], 0.0, 1e-10, "spd log diag");
    // metric at I is the Frobenius inner product
    let u = mat(2, 2, vec![1.0, 2.0, 2.0, -1.0]);
    let v = mat(2, 2, vec![0.5, 1.0, 1.0, 3.0]);
    let expect: f64 = u.data().iter().zip(v.data()).map(|(a, b)| a * b).sum();
    assert_close(
        m.inner(&eye, &u, &v).unwrap().data()[0],
        expect,
        1e-12,
        "spd inner at I",
    );
}

#[test]
fn spd_variants_agree_on_commuting_pairs() {
    // for simultaneously diagonal matrices all three SPD geometries reduce
    // to the same log-coordinate distance
    let a = mat(2, 2, vec![2.0, 0.0, 0.0, 0.5]);
    let b = mat(2, 2, vec![3.0, 0.0, 0.0, 1.0]);
    let expect = ((3.0_f64 / 2.0).ln().powi(2) + (1.0_f64 / 0.5).ln().powi(2)).sqrt();
    for m in [
        Manifold::spd_affine_invariant(2).unwrap(),
        Manifold::spd_log_euclidean(2).unwrap(),
    ] {
        assert_close(
            m.dist(&a, &b).unwrap().data()[0],
            expect,
            1e-10,
            m.kind_name(),
        );
    }
}

#[test]
fn so3_log_recovers_rotation_angle() {
    let m = Manifold::special_orthogonal(3).unwrap();
    let eye = mat(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let th: f64 = 0.7;
    let rz = mat(3, 3, vec![
        th.cos(),
        -th.sin(),
        0.0,
        th.sin(),
        th.cos(),
        0.0,
        0.0,
        0.0,
        1.0,
    ]);
    // log_I(R_z(th)) is the skew generator with entries +-th
    let l = m.log(&eye, &rz).unwrap();
    assert_close(l.data()[1], -th, 1e-12, "so3 log generator");
    assert_close(l.data()[3], th, 1e-12, "so3 log generator");
    // bi-invariant Frobenius distance of a planar rotation: sqrt(2) * th
    assert_close(
        m.dist(&eye, &rz).unwrap().data()[0],
        2.0_f64.sqrt() * th,
        1e-12,
        "so3 dist",
    );
}

#[test]
fn so_n_projx_restores_special_orthogonality() {
    let m = Manifold::special_orthogonal(3).unwrap();
    // a reflection (det = -1) must be pushed back into SO(3)
    let refl = mat(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
    let fixed = m.projx(&refl).unwrap();
    assert!(m.check_point(&fixed, 1e-9).unwrap());

    let noisy = mat(3, 3, vec![1.01, 0.02, 0.0, -0.01, 0.98, 0.03, 0.0, -0.02, 1.0]);
    let fixed = m.projx(&noisy).unwrap();
    assert!(m.check_point(&fixed, 1e-9).unwrap());
}

#[test]
fn stiefel_exact_maps_unsupported() {
    let m = Manifold::stiefel(4, 2).unwrap();
    let x = m.random(&[], 5);
    let u = m.random_tangent(&x, 0.3, 6).unwrap();
    let y = m.retr(&x, &u).unwrap();
    assert!(matches!(m.exp(&x, &u), Err(Error::Unsupported(_))));
    assert!(matches!(m.log(&x, &y), Err(Error::Unsupported(_))));
    assert!(matches!(m.dist(&x, &y), Err(Error::Unsupported(_))));
    assert!(matches!(m.ptransp(&x, &y, &u), Err(Error::Unsupported(_))));
    // retraction and projection transport remain available
    assert!(m.check_point(&y, 1e-9).unwrap());
    let w = m.transp(&x, &y, &u).unwrap();
    assert!(m.check_vector(&y, &w, 1e-8).unwrap());
}

#[test]
fn grassmann_dist_is_principal_angles() {
    let m = Manifold::grassmannian(4, 2).unwrap();
    // span{e1, e2} vs a subspace rotated by angle a in the (e1, e3) plane:
    // principal angles are (a, 0), so dist = a
    let x = mat(4, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let a: f64 = 0.6;
    let y = mat(4, 2, vec![a.cos(), 0.0, 0.0, 1.0, a.sin(), 0.0, 0.0, 0.0]);
    assert_close(m.dist(&x, &y).unwrap().data()[0], a, 1e-12, "grassmann dist");
}

#[test]
fn product_is_componentwise() {
    let s = Manifold::sphere(3).unwrap();
    let e = Manifold::euclidean(vec![2]).unwrap();
    let p = Manifold::product(vec![s.clone(), e.clone()]).unwrap();

    let xs = s.random(&[], 21);
    let xe = e.random(&[], 22);
    let us = s.random_tangent(&xs, 0.4, 23).unwrap();
    let ue = e.random_tangent(&xe, 0.4, 24).unwrap();

    let mut xv = xs.data().to_vec();
    xv.extend_from_slice(xe.data());
    let mut uv = us.data().to_vec();
    uv.extend_from_slice(ue.data());
    let x = arr(xv);
    let u = arr(uv);

    let y = p.exp(&x, &u).unwrap();
    let ys = s.exp(&xs, &us).unwrap();
    let ye = e.exp(&xe, &ue).unwrap();
    assert_eq!(&y.data()[..3], ys.data(), "product exp sphere block");
    assert_eq!(&y.data()[3..], ye.data(), "product exp euclidean block");

    // distance composes as the square root of the sum of squares
    let d = p.dist(&x, &y).unwrap().data()[0];
    let ds = s.dist(&xs, &ys).unwrap().data()[0];
    let de = e.dist(&xe, &ye).unwrap().data()[0];
    assert_close(d, (ds * ds + de * de).sqrt(), 1e-14, "product dist");
}

#[test]
fn batched_ops_match_per_row() {
    for m in [
        Manifold::sphere(4).unwrap(),
        Manifold::spd_affine_invariant(2).unwrap(),
    ] {
        let xb = m.random(&[3], 31);
        let ub = m.random_tangent(&xb, 0.3, 32).unwrap();
        let yb = m.exp(&xb, &ub).unwrap();
        let n = m.point_len();
        for r in 0..3 {
            let xr = arr(xb.data()[r * n..(r + 1) * n].to_vec())
                .reshaped(m.point_shape())
                .unwrap();
            let ur = arr(ub.data()[r * n..(r + 1) * n].to_vec())
                .reshaped(m.point_shape())
                .unwrap();
            let yr = m.exp(&xr, &ur).unwrap();
            assert_eq!(
                &yb.data()[r * n..(r + 1) * n],
                yr.data(),
                "{} batched row {r}",
                m.kind_name()
            );
        }
        // broadcast: one base point against a batch of tangents
        let x1 = arr(xb.data()[..n].to_vec()).reshaped(m.point_shape()).unwrap();
        let u1 = m.random_tangent(&x1, 0.3, 33).unwrap();
        let n1 = m.norm(&x1, &u1).unwrap();
        assert_eq!(n1.shape(), &[] as &[usize]);
    }
}

#[test]
fn random_is_deterministic_and_on_manifold() {
    for m in catalog() {
        let a = m.random(&[4], 99);
        let b = m.random(&[4], 99);
        assert_eq!(a.data(), b.data(), "{} random determinism", m.kind_name());
        assert!(
            m.check_point(&a, 1e-8).unwrap(),
            "{} random membership",
            m.kind_name()
        );
        let c = m.random(&[4], 100);
        assert_ne!(a.data(), c.data(), "{} seed sensitivity", m.kind_name());
    }
}

#[test]
fn check_vector_flags_normal_components() {
    let m = Manifold::sphere(3).unwrap();
    let x = arr(vec![0.0, 0.0, 1.0]);
    assert!(m.check_vector(&x, &arr(vec![1.0, 2.0, 0.0]), 1e-8).unwrap());
    assert!(!m.check_vector(&x, &arr(vec![1.0, 2.0, 0.1]), 1e-8).unwrap());
}

#[test]
fn hyperboloid_gradient_conversion_flips_time_component() {
    let m = Manifold::hyperboloid(3).unwrap();
    let x = arr(vec![1.0, 0.0, 0.0]);
    let g = arr(vec![0.0, 0.3, -0.4]);
    // at the apex the spatial part is already tangent and the Minkowski
    // correction vanishes
    let r = m.egrad2rgrad(&x, &g).unwrap();
    assert_close(r.data()[0], 0.0, 1e-15, "hyperboloid rgrad time");
    assert_close(r.data()[1], 0.3, 1e-15, "hyperboloid rgrad space");
    assert_close(r.data()[2], -0.4, 1e-15, "hyperboloid rgrad space");
}

#[test]
fn shape_mismatch_is_an_error() {
    let m = Manifold::sphere(3).unwrap();
    let x = arr(vec![1.0, 0.0, 0.0]);
    let bad = arr(vec![1.0, 0.0]);
    assert!(matches!(m.exp(&x, &bad), Err(Error::Shape(_))));
    assert!(matches!(m.dist(&x, &bad), Err(Error::Shape(_))));
}
