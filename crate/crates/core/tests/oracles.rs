//! Independent evaluations of the ambient and Gauss curvatures and of the
//! model principal curvatures.

use num_complex::Complex64;
use rand::Rng;

use semipar::ambient::AmbientModel;
use semipar::curvature::{gauss_curvature, ShapeOperator};
use semipar::hyperpoint::{oblique_normal, random_unit_normal, HypersurfacePoint};
use semipar::linalg::{dot, max_abs, norm, normalized, sub, Mat};
use semipar::model::{build_type_a, build_type_b, TypeASpec, TypeBSpec};
use semipar::rng::{gaussian_symmetric, gaussian_vec, stream_rng};

type CMat = Vec<Vec<Complex64>>;

/// Element of `𝔭 ⊂ 𝔰𝔲(m+2)` for a vector of `ℍ^m`: slot `k` holds
/// `q = z₁ + z₂ j`, which becomes row `k` of an `m × 2` block `Z`.
fn to_p(v: &[f64], m: usize) -> CMat {
    let mut p = vec![vec![Complex64::new(0.0, 0.0); m + 2]; m + 2];
    for k in 0..m {
        let q = &v[4 * k..4 * k + 4];
        let z = [Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3])];
        for c in 0..2 {
            p[2 + k][c] = z[c];
            p[c][2 + k] = -z[c].conj();
        }
    }
    p
}

fn from_p(p: &CMat, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; 4 * m];
    for k in 0..m {
        let (a, b) = (p[2 + k][0], p[2 + k][1]);
        v[4 * k..4 * k + 4].copy_from_slice(&[a.re, a.im, b.re, b.im]);
    }
    v
}

fn bracket(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] += a[i][k] * b[k][j] - b[i][k] * a[k][j];
            }
        }
    }
    out
}

/// `R(X,Y)Z = −2[[X,Y],Z]` on `SU(m+2)/S(U(2)×U(m))` with the metric scaled
/// to maximal sectional curvature 8.
fn lie_curvature(x: &[f64], y: &[f64], z: &[f64], m: usize) -> Vec<f64> {
    let b = bracket(&bracket(&to_p(x, m), &to_p(y, m)), &to_p(z, m));
    from_p(&b, m).iter().map(|v| -2.0 * v).collect()
}

#[test]
fn ambient_curvature_matches_lie_bracket() {
    for m in 3..=5 {
        let model = AmbientModel::build(m).unwrap();
        let mut rng = stream_rng(31, m as u64);
        for _ in 0..40 {
            let [x, y, z] = [0; 3].map(|_| gaussian_vec(&mut rng, 4 * m));
            let a = model.curvature(&x, &y, &z).unwrap();
            let b = lie_curvature(&x, &y, &z, m);
            let scale = norm(&x) * norm(&y) * norm(&z);
            assert!(max_abs(&sub(&a, &b)) <= 1e-12 * scale, "m = {m}");
        }
    }
}

#[test]
fn maximal_sectional_curvature_is_eight() {
    let m = 3;
    let model = AmbientModel::build(m).unwrap();
    let mut x = vec![0.0; 4 * m];
    x[2] = 1.0;
    let jx = model.j().mul_vec(&x);
    assert!(max_abs(&sub(&jx, &model.ja()[0].mul_vec(&x))) < 1e-15);
    let k = dot(&lie_curvature(&x, &jx, &jx, m), &x);
    assert!((k - 8.0).abs() < 1e-12);
    let mut rng = stream_rng(32, 0);
    for _ in 0..200 {
        let x = normalized(&gaussian_vec(&mut rng, 4 * m));
        let mut y = gaussian_vec(&mut rng, 4 * m);
        let c = dot(&x, &y);
        y = normalized(&sub(&y, &x.iter().map(|v| c * v).collect::<Vec<_>>()));
        let k = model.curvature_form(&x, &y, &y, &x).unwrap();
        assert!((-1e-12..=8.0 + 1e-12).contains(&k), "{k}");
    }
}

/// The Gauss equation written out term by term in `φ, φ_a, θ_a`.
fn gauss_explicit(p: &HypersurfacePoint, a: &Mat, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.dim()];
    let mut add = |c: f64, v: &[f64]| {
        for (o, vi) in out.iter_mut().zip(v) {
            *o += c * vi;
        }
    };
    add(dot(y, z), x);
    add(-dot(x, z), y);
    let mut skew = |s: &Mat| {
        let (sx, sy, sz) = (s.mul_vec(x), s.mul_vec(y), s.mul_vec(z));
        add(dot(&sy, z), &sx);
        add(-dot(&sx, z), &sy);
        add(-2.0 * dot(&sx, y), &sz);
    };
    skew(p.phi());
    for s in p.phi_a() {
        skew(s);
    }
    for t in p.theta().iter().chain([a]) {
        let (tx, ty) = (t.mul_vec(x), t.mul_vec(y));
        add(dot(&ty, z), &tx);
        add(-dot(&tx, z), &ty);
    }
    out
}

fn random_tangent(p: &HypersurfacePoint, rng: &mut impl Rng) -> Vec<f64> {
    p.tangent_part(&gaussian_vec(rng, p.dim()))
}

#[test]
fn gauss_operator_matches_explicit_formula_and_ambient_projection() {
    let model = AmbientModel::build(3).unwrap();
    let mut rng = stream_rng(33, 0);
    for trial in 0..20 {
        let n = if trial % 4 == 0 {
            oblique_normal(&model, 0.1 * trial as f64 / 4.0 + 0.05)
        } else {
            random_unit_normal(&model, &mut rng)
        };
        let p = HypersurfacePoint::build(&model, &n).unwrap();
        let s = gaussian_symmetric(&mut rng, p.tangent_dim(), 1.0);
        let a = ShapeOperator::from_frame(&p, &s).unwrap();
        let r = gauss_curvature(&p, &a).unwrap();
        for _ in 0..5 {
            let [x, y, z] = [0; 3].map(|_| random_tangent(&p, &mut rng));
            let got = r.apply(&x, &y, &z);
            let explicit = gauss_explicit(&p, a.matrix(), &x, &y, &z);
            assert!(max_abs(&sub(&got, &explicit)) < 1e-11);

            let mut ambient = p.tangent_part(&model.curvature(&x, &y, &z).unwrap());
            let (ax, ay) = (a.apply(&x), a.apply(&y));
            let (c1, c2) = (dot(&ay, &z), dot(&ax, &z));
            for i in 0..ambient.len() {
                ambient[i] += c1 * ax[i] - c2 * ay[i];
            }
            assert!(max_abs(&sub(&got, &ambient)) < 1e-11);
        }
    }
}

/// Principal value of a tube over a focal set whose Jacobi eigenvalue along
/// the direction is `kappa`: `√κ cot(√κ r)` on the directions normal to the
/// focal set, `−√κ tan(√κ r)` on those tangent to it.
fn tube_value(kappa: f64, r: f64, cot: bool) -> f64 {
    let s = kappa.sqrt();
    if cot {
        s / (s * r).tan()
    } else {
        -s * (s * r).tan()
    }
}

fn check_tube(p: &HypersurfacePoint, spaces: &[(&str, f64, &[Vec<f64>])], table: &[(&str, bool)], r: f64) {
    let model = p.model();
    let n = p.normal();
    for (label, value, basis) in spaces {
        let cot = table.iter().find(|t| t.0 == *label).unwrap().1;
        for v in basis.iter() {
            let jac = model.curvature(v, n, n).unwrap();
            let kappa = dot(&jac, v);
            // v is an eigenvector of the Jacobi operator
            assert!(max_abs(&sub(&jac, &v.iter().map(|x| kappa * x).collect::<Vec<_>>())) < 1e-10);
            let expected = tube_value(kappa.max(0.0), r, cot);
            assert!((expected - value).abs() < 1e-10, "{label}: kappa {kappa}, {expected} vs {value}");
        }
    }
}

#[test]
fn type_a_principal_values_follow_jacobi_spectrum() {
    let m = 3;
    let model = AmbientModel::build(m).unwrap();
    for r in [0.1, std::f64::consts::PI / (8.0 * 2f64.sqrt()), 0.9] {
        let s = build_type_a(&model, &TypeASpec::new(m, r).unwrap()).unwrap();
        let spaces: Vec<_> = s.eigenspaces.iter().map(|e| (e.label, e.value, e.basis.as_slice())).collect();
        check_tube(
            &s.point,
            &spaces,
            &[("alpha", true), ("beta", true), ("lambda", false), ("mu", false)],
            r,
        );
    }
}

#[test]
fn type_b_principal_values_follow_jacobi_spectrum() {
    let m = 4;
    let model = AmbientModel::build(m).unwrap();
    for r in [0.1, std::f64::consts::FRAC_PI_8, 0.7] {
        let s = build_type_b(&model, &TypeBSpec::new(m, r, 3).unwrap()).unwrap();
        let spaces: Vec<_> = s.eigenspaces.iter().map(|e| (e.label, e.value, e.basis.as_slice())).collect();
        check_tube(
            &s.point,
            &spaces,
            &[("alpha", false), ("beta", true), ("gamma", false), ("lambda", true), ("mu", false)],
            r,
        );
    }
}
