//! The semi-parallel defect `⟨(R(e_i,e_j)A)e_k, e_l⟩` over an orthonormal tangent
//! frame, its squared Frobenius norm `f(A)`, and the gradient of `f`.
//!
//! For a frame pair `(i, j)` write `K^{ij}_{kl} = ⟨R(e_i,e_j)e_k, e_l⟩`. Then the
//! defect slice is the commutator `D^{ij} = A K^{ij} − K^{ij} A`. Every
//! generator contributes rank-one pieces to `K^{ij}` (plus a fixed matrix for
//! the `−2⟨SX,Y⟩SZ` terms), so `D^{ij}` is assembled in `O(n²)` per generator
//! from precomputed columns `G e_i` and `A G e_i`.

use rayon::prelude::*;
use serde::Serialize;

use super::{gauss_curvature, CurvatureOperator, GeneratorKind, ShapeOperator};
use crate::error::Result;
use crate::hyperpoint::HypersurfacePoint;
use crate::linalg::{pairwise_sum, CompensatedSum, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    /// `√Σ ⟨(R(e_i,e_j)A)e_k, e_l⟩²`
    pub frobenius: f64,
    pub max_abs: f64,
    /// Lexicographically first `(i, j, k, l)` attaining `max_abs`.
    pub argmax: [usize; 4],
}

struct GeneratorImages {
    coeff: f64,
    /// columns `G e_i`
    cols: Vec<Vec<f64>>,
    /// columns `A G e_i`
    a_cols: Vec<Vec<f64>>,
    /// skew generators: `(G[j][i], [A, Gᵀ])`
    skew: Option<(Mat, Mat)>,
}

/// Frame-compressed data shared by the defect and its gradient.
struct FrameData {
    n: usize,
    a: Mat,
    curvature: CurvatureOperator,
}

impl FrameData {
    fn new(point: &HypersurfacePoint, a: &ShapeOperator) -> Result<Self> {
        let curvature = gauss_curvature(point, a)?.compress(point.frame());
        Ok(Self {
            n: point.tangent_dim(),
            a: a.frame_matrix(point),
            curvature,
        })
    }

    fn images(&self) -> Vec<GeneratorImages> {
        self.curvature
            .generators()
            .iter()
            .map(|g| {
                let ag = self.a.matmul(&g.op);
                let skew = (g.kind == GeneratorKind::Skew).then(|| {
                    let gt = g.op.transpose();
                    (g.op.clone(), self.a.matmul(&gt).sub(&gt.matmul(&self.a)))
                });
                GeneratorImages {
                    coeff: g.coeff,
                    cols: g.op.columns(),
                    a_cols: ag.columns(),
                    skew,
                }
            })
            .collect()
    }

    /// `K^{ij}` built explicitly.
    fn pair_tensor(&self, i: usize, j: usize) -> Mat {
        let n = self.n;
        let mut k = Mat::zeros(n, n);
        for g in self.curvature.generators() {
            let c = g.coeff;
            for r in 0..n {
                let (gri, grj) = (g.op[(r, i)], g.op[(r, j)]);
                for l in 0..n {
                    k[(r, l)] += c * (grj * g.op[(l, i)] - gri * g.op[(l, j)]);
                }
            }
            if g.kind == GeneratorKind::Skew {
                let s = -2.0 * c * g.op[(j, i)];
                for r in 0..n {
                    for l in 0..n {
                        k[(r, l)] += s * g.op[(l, r)];
                    }
                }
            }
        }
        k
    }
}

/// `D^{ij}` from the rank-one decomposition.
fn defect_slice(images: &[GeneratorImages], n: usize, i: usize, j: usize, out: &mut Mat) {
    *out = Mat::zeros(n, n);
    for g in images {
        let c = g.coeff;
        let (ti, tj, ati, atj) = (&g.cols[i], &g.cols[j], &g.a_cols[i], &g.a_cols[j]);
        // K += c (t_j t_iᵀ − t_i t_jᵀ);  [A, x yᵀ] = (Ax) yᵀ − x (Ay)ᵀ
        for r in 0..n {
            let (a1, a2, a3, a4) = (c * atj[r], c * tj[r], c * ati[r], c * ti[r]);
            for l in 0..n {
                out[(r, l)] += a1 * ti[l] - a2 * ati[l] - a3 * tj[l] + a4 * atj[l];
            }
        }
        if let Some((op, comm)) = &g.skew {
            out.add_scaled(-2.0 * c * op[(j, i)], comm);
        }
    }
}

struct RowStats {
    sum_sq: f64,
    max_abs: f64,
    argmax: [usize; 4],
}

/// Defect over the point's tangent frame.
pub fn semiparallel_defect(point: &HypersurfacePoint, a: &ShapeOperator) -> Result<DefectReport> {
    let data = FrameData::new(point, a)?;
    let images = data.images();
    let n = data.n;
    let rows: Vec<RowStats> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = CompensatedSum::default();
            let mut best = RowStats {
                sum_sq: 0.0,
                max_abs: 0.0,
                argmax: [0, 0, 0, 0],
            };
            let mut slice = Mat::zeros(n, n);
            for j in (i + 1)..n {
                defect_slice(&images, n, i, j, &mut slice);
                for k in 0..n {
                    for l in 0..n {
                        let v = slice[(k, l)];
                        acc.add(v * v);
                        if v.abs() > best.max_abs {
                            best.max_abs = v.abs();
                            best.argmax = [i, j, k, l];
                        }
                    }
                }
            }
            best.sum_sq = acc.value();
            best
        })
        .collect();

    // slices with i > j are negatives of those with i < j
    let total = 2.0 * pairwise_sum(&rows.iter().map(|r| r.sum_sq).collect::<Vec<_>>());
    let mut max_abs = 0.0;
    let mut argmax = [0, 0, 0, 0];
    for r in &rows {
        if r.max_abs > max_abs {
            max_abs = r.max_abs;
            argmax = r.argmax;
        }
    }
    Ok(DefectReport {
        frobenius: total.sqrt(),
        max_abs,
        argmax,
    })
}

/// Single entry `⟨(R(e_i,e_j)A)e_k, e_l⟩` in frame indices.
pub fn defect_entry(point: &HypersurfacePoint, a: &ShapeOperator, idx: [usize; 4]) -> Result<f64> {
    let data = FrameData::new(point, a)?;
    let e = |t: usize| crate::linalg::unit_vector(data.n, t);
    Ok(data
        .curvature
        .derivation_form(&data.a, &e(idx[0]), &e(idx[1]), &e(idx[2]), &e(idx[3])))
}

/// `f(A) = ‖R·A‖²_F`, with `R` depending on `A` through the Gauss equation.
pub fn defect_objective(point: &HypersurfacePoint, a: &ShapeOperator) -> Result<f64> {
    let r = semiparallel_defect(point, a)?;
    Ok(r.frobenius * r.frobenius)
}

/// Objective and gradient of `f` with respect to a symmetric frame matrix.
pub(crate) fn objective_and_gradient_frame(point: &HypersurfacePoint, s: &Mat) -> Result<(f64, Mat)> {
    let a = ShapeOperator::from_frame(point, s)?;
    let mut data = FrameData::new(point, &a)?;
    // use the caller's exact matrix, not its round trip through the ambient space
    data.a = s.symmetric_part();
    if let Some(g) = data
        .curvature
        .generators
        .iter_mut()
        .find(|g| g.label == "shape")
    {
        g.op = data.a.clone();
    }
    let n = data.n;
    let am = &data.a;
    let a_cols = am.columns();

    let parts: Vec<(f64, Mat)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut grad = Mat::zeros(n, n);
            let mut acc = CompensatedSum::default();
            for j in (i + 1)..n {
                let k = data.pair_tensor(i, j);
                let d = am.matmul(&k).sub(&k.matmul(am));
                acc.add(d.inner(&d));
                let kt = k.transpose();
                grad.add_scaled(1.0, &d.matmul(&kt).sub(&kt.matmul(&d)));
                let g = am.matmul(&d).sub(&d.matmul(am));
                let gt = g.transpose();
                let wi: Vec<f64> = crate::linalg::sub(&g.mul_vec(&a_cols[i]), &gt.mul_vec(&a_cols[i]));
                let wj: Vec<f64> = crate::linalg::sub(&gt.mul_vec(&a_cols[j]), &g.mul_vec(&a_cols[j]));
                for r in 0..n {
                    grad[(r, j)] += wi[r];
                    grad[(r, i)] += wj[r];
                }
            }
            (acc.value(), grad)
        })
        .collect();

    let value = 2.0 * pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let grad = pairwise_matrix_sum(&parts.iter().map(|p| &p.1).collect::<Vec<_>>(), n);
    // ordered pairs count twice, and df = 2⟨D, dD⟩
    Ok((value, grad.scale(4.0).symmetric_part()))
}

fn pairwise_matrix_sum(ms: &[&Mat], n: usize) -> Mat {
    match ms.len() {
        0 => Mat::zeros(n, n),
        1 => ms[0].clone(),
        len => {
            let (lo, hi) = ms.split_at(len / 2);
            pairwise_matrix_sum(lo, n).add(&pairwise_matrix_sum(hi, n))
        }
    }
}

/// Gradient of `f` as a symmetric endomorphism annihilating `N` (ambient coordinates).
pub fn defect_gradient(point: &HypersurfacePoint, a: &ShapeOperator) -> Result<Mat> {
    let (_, g) = objective_and_gradient_frame(point, &a.frame_matrix(point))?;
    let e = point.frame();
    Ok(e.matmul(&g).matmul(&e.transpose()).symmetric_part())
}

#[cfg(test)]
pub(crate) fn slice_structured(point: &HypersurfacePoint, a: &ShapeOperator, i: usize, j: usize) -> Mat {
    let data = FrameData::new(point, a).unwrap();
    let mut out = Mat::zeros(data.n, data.n);
    defect_slice(&data.images(), data.n, i, j, &mut out);
    out
}

#[cfg(test)]
pub(crate) fn slice_explicit(point: &HypersurfacePoint, a: &ShapeOperator, i: usize, j: usize) -> Mat {
    let data = FrameData::new(point, a).unwrap();
    let k = data.pair_tensor(i, j);
    data.a.matmul(&k).sub(&k.matmul(&data.a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientModel;
    use crate::hyperpoint::oblique_normal;
    use crate::linalg::unit_vector;

    fn setup() -> (HypersurfacePoint, ShapeOperator) {
        let model = AmbientModel::build(3).unwrap();
        let p = HypersurfacePoint::build(&model, &oblique_normal(&model, 0.3)).unwrap();
        let n = p.tangent_dim();
        let s = Mat::from_fn(n, n, |i, j| ((i * 7 + j * 7 + i * j) as f64 * 0.37).sin() * 0.5);
        let a = ShapeOperator::from_frame(&p, &s.symmetric_part()).unwrap();
        (p, a)
    }

    #[test]
    fn structured_slice_matches_explicit_commutator() {
        let (p, a) = setup();
        for (i, j) in [(0, 1), (2, 9), (5, 10)] {
            let s = slice_structured(&p, &a, i, j);
            let e = slice_explicit(&p, &a, i, j);
            assert!(s.sub(&e).max_abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_slice_matches_pointwise_definition() {
        let (p, a) = setup();
        let data = FrameData::new(&p, &a).unwrap();
        let e = |t| unit_vector(11, t);
        let slice = slice_explicit(&p, &a, 3, 8);
        for k in [0, 4, 10] {
            for l in [1, 6] {
                let direct = data.curvature.derivation_form(&data.a, &e(3), &e(8), &e(k), &e(l));
                assert!((direct - slice[(k, l)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_and_scalar_operators_have_no_defect() {
        let (p, _) = setup();
        assert_eq!(semiparallel_defect(&p, &ShapeOperator::zero(&p)).unwrap().frobenius, 0.0);
        let r = semiparallel_defect(&p, &ShapeOperator::scaled_identity(&p, 1.7)).unwrap();
        assert!(r.frobenius < 1e-12, "{}", r.frobenius);
    }

    #[test]
    fn frobenius_dominates_max_entry() {
        let (p, a) = setup();
        let r = semiparallel_defect(&p, &a).unwrap();
        assert!(r.frobenius >= r.max_abs && r.max_abs > 0.0);
        let entry = defect_entry(&p, &a, r.argmax).unwrap();
        assert!((entry.abs() - r.max_abs).abs() < 1e-12);
        let (value, _) = objective_and_gradient_frame(&p, &a.frame_matrix(&p)).unwrap();
        assert!((value - r.frobenius * r.frobenius).abs() < 1e-10 * value);
    }

    #[test]
    fn gradient_vanishes_on_scalar_ray() {
        let (p, _) = setup();
        assert_eq!(defect_gradient(&p, &ShapeOperator::zero(&p)).unwrap().max_abs(), 0.0);
        let g = defect_gradient(&p, &ShapeOperator::scaled_identity(&p, 0.8)).unwrap();
        assert!(g.max_abs() < 1e-10, "{}", g.max_abs());
    }
}
