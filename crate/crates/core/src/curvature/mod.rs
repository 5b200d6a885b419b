//! Gauss-equation curvature of the hypersurface and the semi-parallel defect `R·A`.

pub mod defect;
pub mod minimize;
pub mod residual;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperpoint::HypersurfacePoint;
use crate::linalg::{axpy, dot, max_abs, Mat};

pub use defect::{defect_gradient, defect_objective, semiparallel_defect, DefectReport};
pub use minimize::{minimize_defect, IterRecord, MinimizeOptions, MinimizeOutcome, StepRule};
pub use residual::{residual_pair, ResidualArgs, ResidualId};

pub const SHAPE_TOL: f64 = 1e-12;

/// Symmetric endomorphism of `T_xM`, stored in ambient coordinates (`A N = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeOperator {
    a: Mat,
}

impl ShapeOperator {
    pub fn new(point: &HypersurfacePoint, a: Mat) -> Result<Self> {
        let n = point.dim();
        if a.rows() != n || a.cols() != n {
            return Err(Error::param(format!(
                "shape operator must be {n}x{n}, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let asym = a.asymmetry();
        let normal = max_abs(&a.mul_vec(point.normal()));
        if !(asym <= SHAPE_TOL) || !(normal <= SHAPE_TOL) {
            return Err(Error::param(format!(
                "shape operator must be symmetric and annihilate N (asymmetry {asym:e}, |AN| {normal:e})"
            )));
        }
        Ok(Self { a })
    }

    /// Lifts a symmetric matrix given in the point's tangent frame.
    pub fn from_frame(point: &HypersurfacePoint, s: &Mat) -> Result<Self> {
        let e = point.frame();
        if s.rows() != e.cols() || s.cols() != e.cols() {
            return Err(Error::param(format!(
                "frame matrix must be {0}x{0}, got {1}x{2}",
                e.cols(),
                s.rows(),
                s.cols()
            )));
        }
        if !(s.asymmetry() <= SHAPE_TOL) {
            return Err(Error::param("frame matrix is not symmetric"));
        }
        let a = e.matmul(&s.symmetric_part()).matmul(&e.transpose()).symmetric_part();
        Self::new(point, a)
    }

    pub fn zero(point: &HypersurfacePoint) -> Self {
        let n = point.dim();
        Self { a: Mat::zeros(n, n) }
    }

    /// `c·P`, a multiple of the tangent projector.
    pub fn scaled_identity(point: &HypersurfacePoint, c: f64) -> Self {
        Self {
            a: point.projector().scale(c),
        }
    }

    /// `Σ_k c_k v_k v_kᵀ` over tangent vectors.
    pub fn from_spectral(point: &HypersurfacePoint, parts: &[(f64, &[Vec<f64>])]) -> Result<Self> {
        let n = point.dim();
        let mut a = Mat::zeros(n, n);
        for (c, vs) in parts {
            for v in *vs {
                a.add_scaled(*c, &Mat::outer(v, v));
            }
        }
        Self::new(point, a.symmetric_part())
    }

    pub fn matrix(&self) -> &Mat {
        &self.a
    }

    /// `Eᵀ A E` in the point's tangent frame.
    pub fn frame_matrix(&self, point: &HypersurfacePoint) -> Mat {
        self.a.congruence(point.frame()).symmetric_part()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.a.mul_vec(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    /// `⟨TY,Z⟩TX − ⟨TX,Z⟩TY`
    Symmetric,
    /// `⟨SY,Z⟩SX − ⟨SX,Z⟩SY − 2⟨SX,Y⟩SZ`
    Skew,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub label: &'static str,
    pub kind: GeneratorKind,
    pub op: Mat,
    pub coeff: f64,
}

/// Curvature tensor as a sum of generator terms, each applied in `O(n²)`.
#[derive(Clone, Debug)]
pub struct CurvatureOperator {
    generators: Vec<Generator>,
    dim: usize,
}

impl CurvatureOperator {
    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R(X,Y)Z`
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for g in &self.generators {
            let (gx, gy) = (g.op.mul_vec(x), g.op.mul_vec(y));
            axpy(g.coeff * dot(&gy, z), &gx, &mut out);
            axpy(-g.coeff * dot(&gx, z), &gy, &mut out);
            if g.kind == GeneratorKind::Skew {
                let gz = g.op.mul_vec(z);
                axpy(-2.0 * g.coeff * dot(&gx, y), &gz, &mut out);
            }
        }
        out
    }

    /// `⟨R(X,Y)Z, W⟩`
    pub fn form(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        dot(&self.apply(x, y, z), w)
    }

    /// `⟨(R(X,Y)A)Z, W⟩ = ⟨R(X,Y)AZ − A R(X,Y)Z, W⟩`
    pub fn derivation_form(&self, a: &Mat, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let raz = self.apply(x, y, &a.mul_vec(z));
        let arz = a.mul_vec(&self.apply(x, y, z));
        dot(&raz, w) - dot(&arz, w)
    }

    /// Same tensor expressed in an orthonormal frame (`Eᵀ G E` for every generator).
    pub fn compress(&self, frame: &Mat) -> CurvatureOperator {
        CurvatureOperator {
            generators: self
                .generators
                .iter()
                .map(|g| Generator {
                    op: g.op.congruence(frame),
                    ..g.clone()
                })
                .collect(),
            dim: frame.cols(),
        }
    }
}

/// Curvature of the hypersurface from the Gauss equation:
/// identity, `φ`, `φ_a`, `θ_a` and `A` generator terms.
pub fn gauss_curvature(point: &HypersurfacePoint, a: &ShapeOperator) -> Result<CurvatureOperator> {
    let n = point.dim();
    if a.matrix().rows() != n {
        return Err(Error::param(format!(
            "shape operator has dimension {}, point has {n}",
            a.matrix().rows()
        )));
    }
    let mut generators = vec![
        Generator {
            label: "identity",
            kind: GeneratorKind::Symmetric,
            op: point.projector().clone(),
            coeff: 1.0,
        },
        Generator {
            label: "phi",
            kind: GeneratorKind::Skew,
            op: point.phi().clone(),
            coeff: 1.0,
        },
    ];
    const PHI_A: [&str; 3] = ["phi_1", "phi_2", "phi_3"];
    const THETA_A: [&str; 3] = ["theta_1", "theta_2", "theta_3"];
    for k in 0..3 {
        generators.push(Generator {
            label: PHI_A[k],
            kind: GeneratorKind::Skew,
            op: point.phi_a()[k].clone(),
            coeff: 1.0,
        });
        generators.push(Generator {
            label: THETA_A[k],
            kind: GeneratorKind::Symmetric,
            op: point.theta()[k].clone(),
            coeff: 1.0,
        });
    }
    generators.push(Generator {
        label: "shape",
        kind: GeneratorKind::Symmetric,
        op: a.matrix().clone(),
        coeff: 1.0,
    });
    Ok(CurvatureOperator { generators, dim: n })
}

/// `α = ⟨Aξ,ξ⟩`, `α_a = ⟨Aξ_a,ξ_a⟩`, `u_a = η_a(ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarSummary {
    pub alpha: f64,
    pub alpha_a: [f64; 3],
    pub u: [f64; 3],
}

pub fn scalar_summary(point: &HypersurfacePoint, a: &ShapeOperator) -> ScalarSummary {
    let form = |v: &[f64]| a.matrix().form(v, v);
    ScalarSummary {
        alpha: form(point.xi()),
        alpha_a: std::array::from_fn(|k| form(&point.xi_a()[k])),
        u: point.u(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientModel, Q_J, Q_ONE};
    use crate::linalg::sub;

    fn point(m: usize) -> HypersurfacePoint {
        let model = AmbientModel::build(m).unwrap();
        let n = model.quat_vector(&[(0, Q_ONE)]);
        HypersurfacePoint::build(&model, &n).unwrap()
    }

    #[test]
    fn shape_operator_validation() {
        let p = point(3);
        let mut bad = Mat::zeros(12, 12);
        bad[(1, 2)] = 1.0;
        assert!(ShapeOperator::new(&p, bad).is_err());
        let mut along_normal = Mat::zeros(12, 12);
        along_normal[(0, 0)] = 1.0;
        assert!(ShapeOperator::new(&p, along_normal).is_err());
        assert!(ShapeOperator::new(&p, p.projector().scale(2.0)).is_ok());
    }

    #[test]
    fn flat_shape_generic_plane_curvature_one() {
        // m = 4, N = e₀; X = (e₁ + e₂·j)/√2 has ⟨θ_aX,X⟩ = 0 and Y = e₃ ⊥ ℍℂX.
        let p = point(4);
        let model = p.model();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = model.quat_vector(&[(1, [s, 0.0, 0.0, 0.0]), (2, [0.0, 0.0, s, 0.0])]);
        let y = model.quat_vector(&[(3, Q_ONE)]);
        let r = gauss_curvature(&p, &ShapeOperator::zero(&p)).unwrap();
        assert!((r.form(&x, &y, &y, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_shape_complex_quaternionic_plane_curvature_eight() {
        let p = point(3);
        let x = p.model().quat_vector(&[(1, Q_J)]);
        let phix = p.phi().mul_vec(&x);
        let r = gauss_curvature(&p, &ShapeOperator::zero(&p)).unwrap();
        assert!((r.form(&x, &phix, &phix, &x) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_vanishes_for_equal_arguments() {
        let p = point(3);
        let a = ShapeOperator::scaled_identity(&p, 0.7);
        let r = gauss_curvature(&p, &a).unwrap();
        let x = p.tangent_part(&(0..12).map(|i| (i as f64 * 0.3).sin()).collect::<Vec<_>>());
        let z = p.tangent_part(&(0..12).map(|i| (i as f64 * 0.7).cos()).collect::<Vec<_>>());
        assert!(max_abs(&r.apply(&x, &x, &z)) < 1e-14);
    }

    #[test]
    fn compressed_operator_agrees_with_ambient() {
        let p = point(3);
        let a = ShapeOperator::scaled_identity(&p, -1.3);
        let r = gauss_curvature(&p, &a).unwrap();
        let rc = r.compress(p.frame());
        let e = p.frame();
        let (i, j, k) = (0, 4, 7);
        let amb = r.apply(&e.column(i), &e.column(j), &e.column(k));
        let loc = rc.apply(
            &crate::linalg::unit_vector(11, i),
            &crate::linalg::unit_vector(11, j),
            &crate::linalg::unit_vector(11, k),
        );
        assert!(max_abs(&sub(&e.tr_mul_vec(&amb), &loc)) < 1e-13);
    }

    #[test]
    fn summary_of_zero_operator() {
        let p = point(3);
        let s = scalar_summary(&p, &ShapeOperator::zero(&p));
        assert_eq!(s.alpha, 0.0);
        assert_eq!(s.alpha_a, [0.0; 3]);
        assert_eq!(s.u, p.u());
    }
}
