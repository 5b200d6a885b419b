//! Structures induced on a real hypersurface at a single point.
//!
//! All tangent tensors are kept in ambient coordinates as `4m × 4m` matrices
//! that annihilate the unit normal `N`; a separate orthonormal tangent frame
//! (`4m × (4m-1)`) is carried for computations that need a tangent basis.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::ambient::{AmbientModel, GaugeRotation, Q_J, Q_ONE};
use crate::error::{Error, Result};
use crate::linalg::{
    add, axpy, dot, max_abs, norm, normalized, orthonormality_defect, projector_range, scaled,
    span_basis, span_projector, sub, Mat,
};

/// Tolerance on `|N| = 1` accepted by [`HypersurfacePoint::build`].
pub const NORMAL_TOL: f64 = 1e-10;
/// Singular values of the `ℋ^⊥` spanning family at or below this are rank-deficient.
pub const HPERP_RANK_TOL: f64 = 1e-8;
/// Default threshold for classifying the position of `ξ`.
pub const POSITION_TOL: f64 = 1e-6;
/// Below this `|u|` the gauge is left unchanged (`u` is zero up to rounding).
pub const GAUGE_ZERO_TOL: f64 = 1e-14;

/// Normal of the oblique test family, `cos t·e₀ + sin t·(e₁·j)`.
///
/// Gives `u = (-cos 2t, 0, 0)`: `ξ ∈ 𝔇^⊥` at `t = 0`, `ξ ∈ 𝔇` at `t = π/4`.
pub fn oblique_normal(model: &AmbientModel, t: f64) -> Vec<f64> {
    let (s, c) = t.sin_cos();
    model.quat_vector(&[(0, Q_ONE.map(|x| c * x)), (1, Q_J.map(|x| s * x))])
}

/// Uniformly distributed unit normal.
pub fn random_unit_normal<R: Rng + ?Sized>(model: &AmbientModel, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..model.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-6 {
            return scaled(1.0 / n, &v);
        }
    }
}

/// Position of the Reeb vector relative to `𝔇 ⊕ 𝔇^⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Position {
    DPerp,
    D,
    Oblique,
}

#[derive(Clone, Debug)]
pub struct HypersurfacePoint {
    model: AmbientModel,
    normal: Vec<f64>,
    proj: Mat,
    phi: Mat,
    phi_a: [Mat; 3],
    xi: Vec<f64>,
    xi_a: [Vec<f64>; 3],
    theta: [Mat; 3],
    u: [f64; 3],
    frame: Mat,
}

impl HypersurfacePoint {
    /// Induces `φ, ξ, φ_a, ξ_a, θ_a, u_a` from a unit normal.
    pub fn build(model: &AmbientModel, normal: &[f64]) -> Result<Self> {
        let n = model.dim();
        if normal.len() != n {
            return Err(Error::param(format!(
                "normal has length {}, expected {n}",
                normal.len()
            )));
        }
        let len = norm(normal);
        if !((len - 1.0).abs() <= NORMAL_TOL) {
            return Err(Error::param(format!("normal must be a unit vector, |N| = {len}")));
        }
        let frame = default_frame(normal);
        Ok(Self::assemble(model.clone(), normal.to_vec(), frame))
    }

    fn assemble(model: AmbientModel, normal: Vec<f64>, frame: Mat) -> Self {
        let n = model.dim();
        let proj = Mat::identity(n).sub(&Mat::outer(&normal, &normal));
        let tangential = |m: &Mat| proj.matmul(&m.matmul(&proj));
        let phi = tangential(model.j());
        let phi_a = std::array::from_fn(|a| tangential(&model.ja()[a]));
        // θ_a = tan(J_a J ·); J_aJ = JJ_a
        let theta = std::array::from_fn(|a| tangential(&model.jja()[a]));
        let xi = scaled(-1.0, &model.j().mul_vec(&normal));
        let xi_a: [Vec<f64>; 3] = std::array::from_fn(|a| scaled(-1.0, &model.ja()[a].mul_vec(&normal)));
        let u = std::array::from_fn(|a| dot(&xi, &xi_a[a]));
        Self {
            model,
            normal,
            proj,
            phi,
            phi_a,
            xi,
            xi_a,
            theta,
            u,
            frame,
        }
    }

    /// Replaces the tangent frame; columns must be orthonormal and normal to `N`.
    pub fn with_frame(mut self, frame: Mat) -> Result<Self> {
        let n = self.dim();
        if frame.rows() != n || frame.cols() != n - 1 {
            return Err(Error::param(format!(
                "frame must be {n}x{}, got {}x{}",
                n - 1,
                frame.rows(),
                frame.cols()
            )));
        }
        let cols = frame.columns();
        let orth = orthonormality_defect(&cols);
        let normal_part = max_abs(&frame.tr_mul_vec(&self.normal));
        if orth > 1e-10 || normal_part > 1e-10 {
            return Err(Error::param(format!(
                "frame is not an orthonormal tangent basis (orthonormality {orth:e}, normal component {normal_part:e})"
            )));
        }
        self.frame = frame;
        Ok(self)
    }

    /// Same point and frame in the rotated quaternionic gauge.
    pub fn rotate_gauge(&self, rot: &GaugeRotation) -> Self {
        Self::assemble(
            self.model.rotate_gauge(rot),
            self.normal.clone(),
            self.frame.clone(),
        )
    }

    /// Rotates the gauge so that `u = (|u|, 0, 0)`.
    pub fn adapt_gauge(&self) -> (Self, GaugeRotation) {
        let rot = aligning_rotation(self.u);
        (self.rotate_gauge(&rot), rot)
    }

    pub fn model(&self) -> &AmbientModel {
        &self.model
    }
    pub fn dim(&self) -> usize {
        self.model.dim()
    }
    /// Dimension of the tangent space, `4m - 1`.
    pub fn tangent_dim(&self) -> usize {
        self.model.dim() - 1
    }
    pub fn normal(&self) -> &[f64] {
        &self.normal
    }
    /// Tangent projector `Id - N⊗N`.
    pub fn projector(&self) -> &Mat {
        &self.proj
    }
    pub fn phi(&self) -> &Mat {
        &self.phi
    }
    pub fn phi_a(&self) -> &[Mat; 3] {
        &self.phi_a
    }
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn xi_a(&self) -> &[Vec<f64>; 3] {
        &self.xi_a
    }
    pub fn theta(&self) -> &[Mat; 3] {
        &self.theta
    }
    pub fn u(&self) -> [f64; 3] {
        self.u
    }
    pub fn u_norm(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
    pub fn frame(&self) -> &Mat {
        &self.frame
    }
    pub fn frame_vector(&self, i: usize) -> Vec<f64> {
        self.frame.column(i)
    }

    /// `φξ_a`
    pub fn phi_xi_a(&self, a: usize) -> Vec<f64> {
        self.phi.mul_vec(&self.xi_a[a])
    }

    pub fn tangent_part(&self, v: &[f64]) -> Vec<f64> {
        self.proj.mul_vec(v)
    }

    pub fn position(&self, tol: f64) -> Position {
        let un = self.u_norm();
        if un >= 1.0 - tol {
            Position::DPerp
        } else if un <= tol {
            Position::D
        } else {
            Position::Oblique
        }
    }

    /// Residuals of the induced-structure and `θ_a` identities.
    pub fn identities(&self) -> PointIdentities {
        let mut r = PointIdentities::default();
        let n = &self.normal;
        let outer = Mat::outer;
        r.normal_unit = (norm(n) - 1.0).abs();
        for v in std::iter::once(&self.xi).chain(self.xi_a.iter()) {
            r.reeb_tangent_unit = r
                .reeb_tangent_unit
                .max(dot(v, n).abs())
                .max((norm(v) - 1.0).abs());
        }
        let (phi, xi) = (&self.phi, &self.xi);
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let (pa, pb, pc) = (&self.phi_a[a], &self.phi_a[b], &self.phi_a[c]);
            let (xa, xb, xc) = (&self.xi_a[a], &self.xi_a[b], &self.xi_a[c]);
            let th = &self.theta[a];

            // φ_aφ_{a+1} - ξ_a⊗η_{a+1} = φ_{a+2} = -φ_{a+1}φ_a + ξ_{a+1}⊗η_a
            let lhs = pa.matmul(pb).sub(&outer(xa, xb));
            let rhs = pb.matmul(pa).scale(-1.0).add(&outer(xb, xa));
            r.contact3_phi = r
                .contact3_phi
                .max(lhs.sub(pc).max_abs())
                .max(rhs.sub(pc).max_abs());
            // φ_aξ_{a+1} = ξ_{a+2} = -φ_{a+1}ξ_a
            r.contact3_xi = r
                .contact3_xi
                .max(max_abs(&sub(&pa.mul_vec(xb), xc)))
                .max(max_abs(&add(&pb.mul_vec(xa), xc)));
            // φ_aφ - ξ_a⊗η = φφ_a - ξ⊗η_a ; φξ_a = φ_aξ
            let left = pa.matmul(phi).sub(&outer(xa, xi));
            let right = phi.matmul(pa).sub(&outer(xi, xa));
            r.mixed_phi = r.mixed_phi.max(left.sub(&right).max_abs());
            r.mixed_xi = r
                .mixed_xi
                .max(max_abs(&sub(&phi.mul_vec(xa), &pa.mul_vec(xi))));
            // θ_a = φ_aφ - ξ_a⊗η = φφ_a - ξ⊗η_a
            r.theta_definition = r
                .theta_definition
                .max(th.sub(&left).max_abs())
                .max(th.sub(&right).max_abs());

            // (a)-(c)
            r.theta_symmetric = r.theta_symmetric.max(th.asymmetry());
            r.theta_trace = r.theta_trace.max((th.trace() - self.u[a]).abs());
            let pxa = phi.mul_vec(xa);
            let sq = self.proj.sub(&outer(&pxa, &pxa));
            r.theta_square = r.theta_square.max(th.matmul(th).sub(&sq).max_abs());

            // (d) θ_aξ = -ξ_a ; θ_aξ_a = -ξ ; θ_aφξ_a = u_a φξ_a
            let d = [
                max_abs(&add(&th.mul_vec(xi), xa)),
                max_abs(&add(&th.mul_vec(xa), xi)),
                max_abs(&sub(&th.mul_vec(&pxa), &scaled(self.u[a], &pxa))),
            ];
            r.theta_d = d.into_iter().fold(r.theta_d, f64::max);

            // (e) θ_aξ_{a+1} = φξ_{a+2} = -θ_{a+1}ξ_a
            let thb = &self.theta[b];
            let pxc = phi.mul_vec(xc);
            r.theta_e = r
                .theta_e
                .max(max_abs(&sub(&th.mul_vec(xb), &pxc)))
                .max(max_abs(&add(&thb.mul_vec(xa), &pxc)));

            // (f) θ_aφξ_{a+1} = -ξ_{a+2} + u_{a+1}φξ_a
            let pxb = phi.mul_vec(xb);
            let f_rhs = add(&scaled(-1.0, xc), &scaled(self.u[b], &pxa));
            r.theta_f = r.theta_f.max(max_abs(&sub(&th.mul_vec(&pxb), &f_rhs)));

            // (g) θ_{a+1}φξ_a = ξ_{a+2} + u_aφξ_{a+1}
            let g_rhs = add(xc, &scaled(self.u[a], &pxb));
            r.theta_g = r.theta_g.max(max_abs(&sub(&thb.mul_vec(&pxa), &g_rhs)));
        }
        r
    }

    /// Decomposition `T_xM = ℋ ⊕ ℋ^⊥` and the `θ_a` eigenspaces of `ℋ`.
    pub fn subspace_analysis(&self, tol: f64) -> Result<SubspaceReport> {
        let n = self.dim();
        let mut family = vec![self.xi.clone()];
        family.extend(self.xi_a.iter().cloned());
        family.extend((0..3).map(|a| self.phi_xi_a(a)));
        let (hperp_basis, singular_values) = span_basis(&family, HPERP_RANK_TOL)?;

        let h_proj = self.proj.sub(&span_projector(n, &hperp_basis));
        let mut ha_bases: [[Vec<Vec<f64>>; 2]; 3] = Default::default();
        for a in 0..3 {
            for (slot, eps) in [1.0, -1.0].into_iter().enumerate() {
                let q = eigen_projector(&h_proj, &self.theta[a], eps);
                ha_bases[a][slot] = projector_range(&q)?;
            }
        }

        let u_norm = self.u_norm();
        let position = self.position(tol);
        let near_threshold = position == Position::Oblique
            && (u_norm < 100.0 * tol || u_norm > 1.0 - 100.0 * tol);
        let rank_mismatch = (hperp_basis.len() == 3) != (position == Position::DPerp);
        Ok(SubspaceReport {
            h_dim: self.tangent_dim() - hperp_basis.len(),
            hperp_basis,
            hperp_singular_values: singular_values,
            ha_bases,
            h_projector: h_proj,
            position,
            u_norm,
            warning: near_threshold || rank_mismatch,
        })
    }

    /// The orthogonal `θ₁`-eigenvectors at an oblique point in adapted gauge,
    /// with their eigenvalues: `φξ₁ (u₁)`, `ξ±ξ₁ (∓1)`, `ξ₂±φξ₃ (±1)`, `ξ₃±φξ₂ (∓1)`.
    pub fn theta1_eigenvectors(&self) -> Vec<(&'static str, Vec<f64>, f64)> {
        let x = &self.xi;
        let [x1, x2, x3] = &self.xi_a;
        let p2 = self.phi_xi_a(1);
        let p3 = self.phi_xi_a(2);
        vec![
            ("phi_xi1", self.phi_xi_a(0), self.u[0]),
            ("xi+xi1", add(x, x1), -1.0),
            ("xi-xi1", sub(x, x1), 1.0),
            ("xi2+phi_xi3", add(x2, &p3), 1.0),
            ("xi2-phi_xi3", sub(x2, &p3), -1.0),
            ("xi3+phi_xi2", add(x3, &p2), -1.0),
            ("xi3-phi_xi2", sub(x3, &p2), 1.0),
        ]
    }

    /// Largest `|θ₁v - λv|` over the normalized eigenvector list, and the largest
    /// mutual inner product among the normalized vectors.
    pub fn theta1_eigen_residual(&self) -> Result<(f64, f64)> {
        let list = self.theta1_eigenvectors();
        let mut units = Vec::with_capacity(list.len());
        let mut worst = 0.0f64;
        for (name, v, lambda) in &list {
            let len = norm(v);
            if len < 1e-8 {
                return Err(Error::param(format!(
                    "eigenvector {name} degenerates (norm {len:e}); the point is not oblique"
                )));
            }
            let v = scaled(1.0 / len, v);
            worst = worst.max(max_abs(&sub(&self.theta[0].mul_vec(&v), &scaled(*lambda, &v))));
            units.push(v);
        }
        Ok((worst, orthonormality_defect(&units)))
    }
}

/// `½ P_H (Id + εθ) P_H`, symmetrized.
fn eigen_projector(h_proj: &Mat, theta: &Mat, eps: f64) -> Mat {
    let n = h_proj.rows();
    let mut inner = Mat::identity(n);
    inner.add_scaled(eps, theta);
    h_proj.matmul(&inner).matmul(h_proj).scale(0.5).symmetric_part()
}

/// Orthonormal tangent basis by Gram–Schmidt on the standard basis.
fn default_frame(normal: &[f64]) -> Mat {
    let n = normal.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            let c = dot(&v, normal);
            axpy(-c, normal, &mut v);
            for b in &basis {
                let c = dot(&v, b);
                axpy(-c, b, &mut v);
            }
        }
        if norm(&v) > 1e-3 {
            basis.push(normalized(&v));
        }
    }
    Mat::from_columns(&basis)
}

/// Rotation taking `u` to `(|u|, 0, 0)`; identity when `|u| <= GAUGE_ZERO_TOL`.
fn aligning_rotation(u: [f64; 3]) -> GaugeRotation {
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if un <= GAUGE_ZERO_TOL {
        return GaugeRotation::identity();
    }
    let r1 = u.map(|x| x / un);
    // axis least aligned with r1, first one on ties
    let mut k = 0;
    for i in 1..3 {
        if r1[i].abs() < r1[k].abs() {
            k = i;
        }
    }
    let mut r2 = [0.0; 3];
    r2[k] = 1.0;
    let c = r1[k];
    for i in 0..3 {
        r2[i] -= c * r1[i];
    }
    let l2 = r2.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r2 = r2.map(|x| x / l2);
    let r3 = [
        r1[1] * r2[2] - r1[2] * r2[1],
        r1[2] * r2[0] - r1[0] * r2[2],
        r1[0] * r2[1] - r1[1] * r2[0],
    ];
    GaugeRotation::new([r1, r2, r3]).expect("orthonormal rows with positive orientation")
}

/// Residuals of the pointwise identities, all expected to vanish.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointIdentities {
    pub normal_unit: f64,
    pub reeb_tangent_unit: f64,
    pub contact3_phi: f64,
    pub contact3_xi: f64,
    pub mixed_phi: f64,
    pub mixed_xi: f64,
    pub theta_definition: f64,
    pub theta_symmetric: f64,
    pub theta_trace: f64,
    pub theta_square: f64,
    pub theta_d: f64,
    pub theta_e: f64,
    pub theta_f: f64,
    pub theta_g: f64,
}

impl PointIdentities {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("normal_unit", self.normal_unit),
            ("reeb_tangent_unit", self.reeb_tangent_unit),
            ("contact3_phi", self.contact3_phi),
            ("contact3_xi", self.contact3_xi),
            ("mixed_phi", self.mixed_phi),
            ("mixed_xi", self.mixed_xi),
            ("theta_definition", self.theta_definition),
            ("theta_a_symmetric", self.theta_symmetric),
            ("theta_b_trace", self.theta_trace),
            ("theta_c_square", self.theta_square),
            ("theta_d", self.theta_d),
            ("theta_e", self.theta_e),
            ("theta_f", self.theta_f),
            ("theta_g", self.theta_g),
        ]
    }

    pub fn max(&self) -> f64 {
        self.named().into_iter().fold(0.0, |m, (_, v)| m.max(v))
    }

    /// Componentwise maximum.
    pub fn merge(&self, other: &PointIdentities) -> PointIdentities {
        let a = self.named();
        let b = other.named();
        let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.1.max(y.1)).collect();
        PointIdentities {
            normal_unit: v[0],
            reeb_tangent_unit: v[1],
            contact3_phi: v[2],
            contact3_xi: v[3],
            mixed_phi: v[4],
            mixed_xi: v[5],
            theta_definition: v[6],
            theta_symmetric: v[7],
            theta_trace: v[8],
            theta_square: v[9],
            theta_d: v[10],
            theta_e: v[11],
            theta_f: v[12],
            theta_g: v[13],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubspaceReport {
    /// Orthonormal basis of `ℋ^⊥ = span{ξ, ξ_a, φξ_a}`.
    pub hperp_basis: Vec<Vec<f64>>,
    /// Singular values of the seven spanning vectors, descending.
    pub hperp_singular_values: Vec<f64>,
    pub h_dim: usize,
    /// `ha_bases[a][0]` spans `ℋ_a(+1)`, `ha_bases[a][1]` spans `ℋ_a(-1)`.
    pub ha_bases: [[Vec<Vec<f64>>; 2]; 3],
    /// Orthogonal projector onto `ℋ` (ambient coordinates).
    pub h_projector: Mat,
    pub position: Position,
    pub u_norm: f64,
    /// Set when the classification sits near its threshold or disagrees with the rank.
    pub warning: bool,
}

/// Residuals of the eigenspace mapping properties on `ℋ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EigenspaceResiduals {
    /// `θ_a x = εx` on the computed bases.
    pub eigen: f64,
    /// `φ ℋ_a(ε) ⊂ ℋ_a(ε)`
    pub phi_preserves: f64,
    /// `θ_b ℋ_a(ε) ⊂ ℋ_a(-ε)`, `b ≠ a`
    pub theta_swaps: f64,
    /// `φ_b ℋ_a(ε) ⊂ ℋ_a(-ε)`, `b ≠ a`
    pub phi_b_swaps: f64,
    /// Orthonormality of every reported basis.
    pub orthonormal: f64,
}

impl SubspaceReport {
    pub fn hperp_dim(&self) -> usize {
        self.hperp_basis.len()
    }

    pub fn ha_dims(&self, a: usize) -> (usize, usize) {
        (self.ha_bases[a][0].len(), self.ha_bases[a][1].len())
    }

    /// `dim ℋ_a(+1) = dim ℋ_a(-1)`, both even, for every `a`.
    pub fn ha_dims_balanced(&self) -> bool {
        (0..3).all(|a| {
            let (p, m) = self.ha_dims(a);
            p == m && p % 2 == 0 && p + m == self.h_dim
        })
    }

    pub fn eigenspace_residuals(&self, point: &HypersurfacePoint) -> EigenspaceResiduals {
        let n = point.dim();
        let mut r = EigenspaceResiduals {
            orthonormal: orthonormality_defect(&self.hperp_basis),
            ..Default::default()
        };
        let projs: Vec<[Mat; 2]> = (0..3)
            .map(|a| std::array::from_fn(|s| span_projector(n, &self.ha_bases[a][s])))
            .collect();
        let leak = |p: &Mat, v: &[f64]| max_abs(&sub(v, &p.mul_vec(v)));
        for a in 0..3 {
            for s in 0..2 {
                let eps = if s == 0 { 1.0 } else { -1.0 };
                let basis = &self.ha_bases[a][s];
                r.orthonormal = r.orthonormal.max(orthonormality_defect(basis));
                for x in basis {
                    r.eigen = r
                        .eigen
                        .max(max_abs(&sub(&point.theta()[a].mul_vec(x), &scaled(eps, x))));
                    r.phi_preserves = r.phi_preserves.max(leak(&projs[a][s], &point.phi().mul_vec(x)));
                    for b in (0..3).filter(|&b| b != a) {
                        let other = &projs[a][1 - s];
                        r.theta_swaps = r.theta_swaps.max(leak(other, &point.theta()[b].mul_vec(x)));
                        r.phi_b_swaps = r.phi_b_swaps.max(leak(other, &point.phi_a()[b].mul_vec(x)));
                    }
                }
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn model3() -> AmbientModel {
        AmbientModel::build(3).unwrap()
    }

    #[test]
    fn rejects_non_unit_normal() {
        let m = model3();
        let n = scaled(1.1, &m.quat_vector(&[(0, Q_ONE)]));
        assert!(matches!(HypersurfacePoint::build(&m, &n), Err(Error::Parameter(_))));
    }

    #[test]
    fn quaternionic_line_normal_has_reeb_in_dperp() {
        let m = model3();
        let p = HypersurfacePoint::build(&m, &m.quat_vector(&[(0, Q_ONE)])).unwrap();
        assert!((p.u_norm() - 1.0).abs() < 1e-14);
        assert_eq!(p.position(POSITION_TOL), Position::DPerp);
    }

    #[test]
    fn balanced_normal_has_reeb_in_d() {
        let m = model3();
        let p = HypersurfacePoint::build(&m, &oblique_normal(&m, FRAC_PI_4)).unwrap();
        assert!(p.u().iter().all(|x| x.abs() < 1e-15), "{:?}", p.u());
        assert_eq!(p.position(POSITION_TOL), Position::D);
    }

    #[test]
    fn oblique_family_closed_form() {
        // Independent route: u_a = ⟨JN, J_aN⟩ from quaternion arithmetic gives (-cos 2t, 0, 0).
        let m = model3();
        for t in [0.1, 0.3, FRAC_PI_8, 0.7] {
            let p = HypersurfacePoint::build(&m, &oblique_normal(&m, t)).unwrap();
            let u = p.u();
            assert!((u[0] + (2.0 * t).cos()).abs() < 1e-14);
            assert!(u[1].abs() < 1e-15 && u[2].abs() < 1e-15);
        }
    }

    #[test]
    fn adapt_gauge_examples() {
        let m = model3();
        let p = HypersurfacePoint::build(&m, &oblique_normal(&m, FRAC_PI_8)).unwrap();
        let (q, rot) = p.adapt_gauge();
        let u = q.u();
        assert!((u[0] - FRAC_PI_4.cos()).abs() < 1e-10);
        assert!(u[1].abs() < 1e-10 && u[2].abs() < 1e-10);
        let ru = rot.apply(p.u());
        assert!((0..3).all(|a| (ru[a] - u[a]).abs() < 1e-12));

        let r = aligning_rotation([0.3, 0.0, 0.4]);
        let v = r.apply([0.3, 0.0, 0.4]);
        assert!((v[0] - 0.5).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);

        let d = HypersurfacePoint::build(&m, &oblique_normal(&m, FRAC_PI_4)).unwrap();
        let (d2, rot) = d.adapt_gauge();
        assert_eq!(rot, GaugeRotation::identity());
        assert_eq!(d2.u(), d.u());
    }

    #[test]
    fn default_frame_is_orthonormal_tangent() {
        let m = model3();
        let p = HypersurfacePoint::build(&m, &oblique_normal(&m, 0.3)).unwrap();
        assert!(orthonormality_defect(&p.frame().columns()) < 1e-13);
        assert!(max_abs(&p.frame().tr_mul_vec(p.normal())) < 1e-14);
        assert!(p.clone().with_frame(Mat::identity(12)).is_err());
    }

    #[test]
    fn dperp_subspaces() {
        let m = model3();
        let p = HypersurfacePoint::build(&m, &m.quat_vector(&[(0, Q_ONE)])).unwrap();
        let rep = p.subspace_analysis(POSITION_TOL).unwrap();
        assert_eq!(rep.hperp_dim(), 3);
        assert_eq!(rep.ha_dims(0), (4, 4));
        assert!(rep.ha_dims_balanced());
        assert!(!rep.warning);
    }

    #[test]
    fn d_subspaces_orthonormal_family() {
        let m = model3();
        let p = HypersurfacePoint::build(&m, &oblique_normal(&m, FRAC_PI_4)).unwrap();
        let rep = p.subspace_analysis(POSITION_TOL).unwrap();
        assert_eq!(rep.hperp_dim(), 7);
        let mut fam = vec![p.xi().to_vec()];
        fam.extend(p.xi_a().iter().cloned());
        fam.extend((0..3).map(|a| p.phi_xi_a(a)));
        assert!(orthonormality_defect(&fam) < 1e-14);
    }

    #[test]
    fn oblique_theta1_eigenvectors() {
        let m = model3();
        let (p, _) = HypersurfacePoint::build(&m, &oblique_normal(&m, FRAC_PI_8))
            .unwrap()
            .adapt_gauge();
        let rep = p.subspace_analysis(POSITION_TOL).unwrap();
        assert_eq!(rep.hperp_dim(), 7);
        assert_eq!(rep.position, Position::Oblique);
        let (res, orth) = p.theta1_eigen_residual().unwrap();
        assert!(res <= 1e-9, "{res}");
        assert!(orth <= 1e-9, "{orth}");
    }
}
