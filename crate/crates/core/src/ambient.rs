//! Point model of the ambient tangent space `T_x G₂(ℂ^{m+2}) ≅ ℝ^{4m}`.
//!
//! `ℝ^{4m}` is identified with `ℍ^m`: coordinates `4k..4k+4` hold the
//! quaternion `a + b i + c j + d k` of slot `k`. The Kähler structure is left
//! multiplication by `i`; the quaternionic basis `J₁, J₂, J₃` is right
//! multiplication by `-i, -j, -k`. Left and right multiplications commute, and
//! the conjugate units make `J₁J₂ = J₃`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, max_abs, Mat};

/// Tolerance every freshly built model must meet.
pub const BUILD_TOL: f64 = 1e-12;
/// Tolerance for accepting a gauge rotation.
pub const ROTATION_TOL: f64 = 1e-10;

/// Quaternion `[re, i, j, k]`.
pub type Quat = [f64; 4];

pub const Q_ONE: Quat = [1.0, 0.0, 0.0, 0.0];
pub const Q_I: Quat = [0.0, 1.0, 0.0, 0.0];
pub const Q_J: Quat = [0.0, 0.0, 1.0, 0.0];
pub const Q_K: Quat = [0.0, 0.0, 0.0, 1.0];

pub fn qmul(p: Quat, q: Quat) -> Quat {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

fn qneg(q: Quat) -> Quat {
    [-q[0], -q[1], -q[2], -q[3]]
}

/// Real matrix of a slot-wise quaternion map on `ℍ^m`.
fn slotwise(m: usize, f: impl Fn(Quat) -> Quat) -> Mat {
    let n = 4 * m;
    let mut out = Mat::zeros(n, n);
    for slot in 0..m {
        for c in 0..4 {
            let mut q = [0.0; 4];
            q[c] = 1.0;
            let img = f(q);
            for (r, v) in img.iter().enumerate() {
                out[(4 * slot + r, 4 * slot + c)] = *v;
            }
        }
    }
    out
}

/// Rotation of the quaternionic gauge `J_a -> Σ_b R_ab J_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeRotation {
    r: [[f64; 3]; 3],
}

impl GaugeRotation {
    pub fn new(r: [[f64; 3]; 3]) -> Result<Self> {
        let g = Self { r };
        let orth = g.orthogonality_defect();
        let det = g.det();
        if !(orth <= ROTATION_TOL) || !((det - 1.0).abs() <= ROTATION_TOL) {
            return Err(Error::param(format!(
                "gauge rotation must lie in SO(3): |RRᵀ - I| = {orth:e}, det = {det}"
            )));
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        Self {
            r: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation from a (not necessarily unit) quaternion.
    pub fn from_quaternion(q: Quat) -> Result<Self> {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::param("zero quaternion has no rotation"));
        }
        let [w, x, y, z] = q.map(|c| c / n);
        Self::new([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    /// Haar-distributed rotation (normalized Gaussian quaternion).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q: Quat = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
            if let Ok(g) = Self::from_quaternion(q) {
                return g;
            }
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.r
    }

    pub fn apply(&self, u: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|a| (0..3).map(|b| self.r[a][b] * u[b]).sum())
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &GaugeRotation) -> GaugeRotation {
        GaugeRotation {
            r: std::array::from_fn(|a| {
                std::array::from_fn(|c| (0..3).map(|b| self.r[a][b] * other.r[b][c]).sum())
            }),
        }
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                let s: f64 = (0..3).map(|c| self.r[a][c] * self.r[b][c]).sum();
                worst = worst.max((s - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    pub fn det(&self) -> f64 {
        let r = &self.r;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Linear combination `Σ_b R_ab X_b` of a triple.
    pub fn combine<T, F>(&self, items: &[T; 3], zero: impl Fn() -> T, mut acc: F) -> [T; 3]
    where
        F: FnMut(&mut T, f64, &T),
    {
        std::array::from_fn(|a| {
            let mut out = zero();
            for (b, item) in items.iter().enumerate() {
                acc(&mut out, self.r[a][b], item);
            }
            out
        })
    }
}

/// Residuals of the structural identities of an [`AmbientModel`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AmbientInvariants {
    /// `max |J² + Id|`
    pub j_squared: f64,
    /// `max_a |J_a² + Id|`
    pub ja_squared: f64,
    /// `max_a |J_aJ_{a+1} - J_{a+2}|, |J_{a+1}J_a + J_{a+2}|`
    pub quaternion: f64,
    /// `max_a |JJ_a - J_aJ|`
    pub commute: f64,
    /// skew-symmetry of `J`, `J_a`
    pub skew: f64,
    /// `|MᵀM - Id|` for `J`, `J_a`
    pub orthogonal: f64,
    /// `max_a |tr(JJ_a)|`
    pub trace: f64,
}

impl AmbientInvariants {
    pub fn max(&self) -> f64 {
        [
            self.j_squared,
            self.ja_squared,
            self.quaternion,
            self.commute,
            self.skew,
            self.orthogonal,
            self.trace,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("j_squared", self.j_squared),
            ("ja_squared", self.ja_squared),
            ("quaternion_relations", self.quaternion),
            ("j_commutes_ja", self.commute),
            ("skew_symmetric", self.skew),
            ("orthogonal", self.orthogonal),
            ("trace_j_ja", self.trace),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct AmbientModel {
    m: usize,
    j: Mat,
    ja: [Mat; 3],
    jja: [Mat; 3],
}

impl AmbientModel {
    /// Builds the model for `G₂(ℂ^{m+2})`, `m >= 3`.
    pub fn build(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::param(format!("m must be at least 3, got {m}")));
        }
        let j = slotwise(m, |q| qmul(Q_I, q));
        let ja = [Q_I, Q_J, Q_K].map(|unit| slotwise(m, move |q| qmul(q, qneg(unit))));
        let model = Self::assemble(m, j, ja);
        let inv = model.invariants();
        if !(inv.max() <= BUILD_TOL) {
            return Err(Error::Construction(format!(
                "ambient model failed its structural identities: {inv:?}"
            )));
        }
        Ok(model)
    }

    fn assemble(m: usize, j: Mat, ja: [Mat; 3]) -> Self {
        let jja = std::array::from_fn(|a| j.matmul(&ja[a]));
        Self { m, j, ja, jja }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        4 * self.m
    }

    pub fn j(&self) -> &Mat {
        &self.j
    }

    pub fn ja(&self) -> &[Mat; 3] {
        &self.ja
    }

    /// `J J_a` for each `a`.
    pub fn jja(&self) -> &[Mat; 3] {
        &self.jja
    }

    /// Same point, quaternionic basis replaced by `J'_a = Σ_b R_ab J_b`.
    pub fn rotate_gauge(&self, rot: &GaugeRotation) -> AmbientModel {
        let n = self.dim();
        let ja = rot.combine(&self.ja, || Mat::zeros(n, n), |out, c, x| out.add_scaled(c, x));
        Self::assemble(self.m, self.j.clone(), ja)
    }

    pub fn invariants(&self) -> AmbientInvariants {
        let n = self.dim();
        let id = Mat::identity(n);
        let mut inv = AmbientInvariants {
            j_squared: self.j.matmul(&self.j).add(&id).max_abs(),
            skew: self.j.skewness_defect(),
            orthogonal: self.j.transpose().matmul(&self.j).sub(&id).max_abs(),
            ..Default::default()
        };
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let ja = &self.ja[a];
            inv.ja_squared = inv.ja_squared.max(ja.matmul(ja).add(&id).max_abs());
            let ab = ja.matmul(&self.ja[b]);
            let ba = self.ja[b].matmul(ja);
            inv.quaternion = inv
                .quaternion
                .max(ab.sub(&self.ja[c]).max_abs())
                .max(ba.add(&self.ja[c]).max_abs());
            inv.commute = inv
                .commute
                .max(self.j.matmul(ja).sub(&ja.matmul(&self.j)).max_abs());
            inv.skew = inv.skew.max(ja.skewness_defect());
            inv.orthogonal = inv
                .orthogonal
                .max(ja.transpose().matmul(ja).sub(&id).max_abs());
            inv.trace = inv.trace.max(self.jja[a].trace().abs());
        }
        inv
    }

    /// Vector of `ℝ^{4m}` with the given quaternion entries in the given slots.
    pub fn quat_vector(&self, entries: &[(usize, Quat)]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (slot, q) in entries {
            assert!(*slot < self.m, "slot {slot} out of range for m = {}", self.m);
            for (c, x) in q.iter().enumerate() {
                v[4 * slot + c] += x;
            }
        }
        v
    }

    fn check_dim(&self, vs: &[&[f64]]) -> Result<()> {
        for v in vs {
            if v.len() != self.dim() {
                return Err(Error::param(format!(
                    "vector has length {}, expected {}",
                    v.len(),
                    self.dim()
                )));
            }
        }
        Ok(())
    }

    /// Ambient curvature tensor `R̂(X,Y)Z`.
    pub fn curvature(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(&[x, y, z])?;
        let mut out = vec![0.0; self.dim()];
        let mut acc = |c: f64, v: &[f64]| crate::linalg::axpy(c, v, &mut out);
        acc(dot(y, z), x);
        acc(-dot(x, z), y);

        // Kähler-type terms: <SY,Z>SX - <SX,Z>SY - 2<SX,Y>SZ
        let skew_term = |s: &Mat, acc: &mut dyn FnMut(f64, &[f64])| {
            let (sx, sy, sz) = (s.mul_vec(x), s.mul_vec(y), s.mul_vec(z));
            acc(dot(&sy, z), &sx);
            acc(-dot(&sx, z), &sy);
            acc(-2.0 * dot(&sx, y), &sz);
        };
        skew_term(&self.j, &mut acc);
        for a in 0..3 {
            skew_term(&self.ja[a], &mut acc);
            let t = &self.jja[a];
            let (tx, ty) = (t.mul_vec(x), t.mul_vec(y));
            acc(dot(&ty, z), &tx);
            acc(-dot(&tx, z), &ty);
        }
        Ok(out)
    }

    /// `⟨R̂(X,Y)Z, W⟩`
    pub fn curvature_form(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        self.check_dim(&[w])?;
        Ok(dot(&self.curvature(x, y, z)?, w))
    }
}

/// Convenience: largest entry of a vector residual.
pub fn vec_residual(a: &[f64], b: &[f64]) -> f64 {
    max_abs(&crate::linalg::sub(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quaternion_units_multiply() {
        assert_eq!(qmul(Q_I, Q_J), Q_K);
        assert_eq!(qmul(Q_J, Q_I), qneg(Q_K));
        assert_eq!(qmul(Q_I, Q_I), qneg(Q_ONE));
    }

    #[test]
    fn m3_model_has_expected_size_and_complex_structure() {
        let model = AmbientModel::build(3).unwrap();
        assert_eq!(model.dim(), 12);
        let id = Mat::identity(12);
        assert!(model.j().matmul(model.j()).add(&id).max_abs() <= 1e-12);
    }

    #[test]
    fn j1_j2_is_j3() {
        let model = AmbientModel::build(3).unwrap();
        let prod = model.ja()[0].matmul(&model.ja()[1]);
        assert!(prod.sub(&model.ja()[2]).max_abs() <= 1e-12);
    }

    #[test]
    fn trace_of_j_ja_vanishes() {
        let model = AmbientModel::build(4).unwrap();
        for a in 0..3 {
            assert!(model.jja()[a].trace().abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_small_m() {
        assert!(matches!(AmbientModel::build(2), Err(Error::Parameter(_))));
    }

    #[test]
    fn identity_rotation_leaves_model_unchanged() {
        let model = AmbientModel::build(3).unwrap();
        let rotated = model.rotate_gauge(&GaugeRotation::identity());
        for a in 0..3 {
            assert_eq!(rotated.ja()[a], model.ja()[a]);
        }
    }

    #[test]
    fn signed_flip_negates_first_two() {
        let model = AmbientModel::build(3).unwrap();
        let rot = GaugeRotation::new([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let rotated = model.rotate_gauge(&rot);
        assert_eq!(rotated.ja()[0], model.ja()[0].scale(-1.0));
        assert_eq!(rotated.ja()[1], model.ja()[1].scale(-1.0));
        assert_eq!(rotated.ja()[2], model.ja()[2]);
        assert_eq!(rotated.j(), model.j());
        assert!(rotated.invariants().max() <= 1e-12);
    }

    #[test]
    fn random_rotations_preserve_invariants() {
        let model = AmbientModel::build(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let rot = GaugeRotation::random(&mut rng);
            assert!(model.rotate_gauge(&rot).invariants().max() <= 1e-10);
        }
    }

    #[test]
    fn rotation_validation() {
        assert!(GaugeRotation::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]).is_err());
        assert!(GaugeRotation::new([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn curvature_vanishes_on_equal_arguments() {
        let model = AmbientModel::build(3).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let z: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        assert!(max_abs(&model.curvature(&x, &x, &z).unwrap()) < 1e-14);
    }

    #[test]
    fn curvature_dimension_mismatch() {
        let model = AmbientModel::build(3).unwrap();
        let v = vec![0.0; 12];
        assert!(model.curvature(&v, &v, &[0.0; 5]).is_err());
    }

    #[test]
    fn complex_quaternionic_plane_has_curvature_eight() {
        // X = j in slot 0 satisfies JX = J₁X.
        let model = AmbientModel::build(3).unwrap();
        let x = model.quat_vector(&[(0, Q_J)]);
        let jx = model.j().mul_vec(&x);
        assert!(vec_residual(&jx, &model.ja()[0].mul_vec(&x)) == 0.0);
        let k = model.curvature_form(&x, &jx, &jx, &x).unwrap();
        assert!((k - 8.0).abs() <= 1e-12, "{k}");
    }

    #[test]
    fn generic_plane_has_curvature_one() {
        // X = (e₀ + e₁·j)/√2 has ⟨JJ_aX, X⟩ = 0 for every a; Y = e₂ is orthogonal to ℍℂX.
        let model = AmbientModel::build(3).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = model.quat_vector(&[(0, [s, 0.0, 0.0, 0.0]), (1, [0.0, 0.0, s, 0.0])]);
        let y = model.quat_vector(&[(2, Q_ONE)]);
        let k = model.curvature_form(&x, &y, &y, &x).unwrap();
        assert!((k - 1.0).abs() <= 1e-12, "{k}");
    }
}
