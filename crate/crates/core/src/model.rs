//! Shape operators of the type A and type B model hypersurfaces at a point,
//! their principal spectra, and the scalar quantities used in the
//! nonexistence argument.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{AmbientModel, Q_J, Q_ONE};
use crate::curvature::residual::principal_braces;
use crate::curvature::{gauss_curvature, semiparallel_defect, ShapeOperator};
use crate::error::{Error, Result};
use crate::hyperpoint::{HypersurfacePoint, Position, POSITION_TOL};
use crate::linalg::{
    dot, max_abs, norm, normalized, orthonormality_defect, projector_range, scaled, span_projector, sub,
    sym_eigen, Mat,
};
use crate::rng::{gaussian_vec, stream_rng};

/// Default eigenvalue clustering tolerance.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Tolerance for the structural checks of constructed eigenspaces.
pub const MODEL_TOL: f64 = 1e-10;
/// Attempts allowed when drawing an `ℍℂ`-line for the type B splitting.
pub const MAX_LINE_ATTEMPTS: usize = 64;

/// `π/√8`, upper end of the type A radius interval.
pub fn type_a_r_max() -> f64 {
    std::f64::consts::PI / 8f64.sqrt()
}

/// `π/4`, upper end of the type B radius interval.
pub fn type_b_r_max() -> f64 {
    FRAC_PI_4
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypeASpec {
    pub m: usize,
    pub r: f64,
}

impl TypeASpec {
    pub fn new(m: usize, r: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::param(format!("type A requires m >= 3, got {m}")));
        }
        if !(r > 0.0 && r < type_a_r_max()) {
            return Err(Error::param(format!(
                "type A radius must lie in the open interval (0, pi/sqrt(8)) = (0, {:.10}), got {r}",
                type_a_r_max()
            )));
        }
        Ok(Self { m, r })
    }

    pub fn alpha(&self) -> f64 {
        let s = 8f64.sqrt();
        s / (s * self.r).tan()
    }

    pub fn beta(&self) -> f64 {
        SQRT_2 / (SQRT_2 * self.r).tan()
    }

    pub fn lambda(&self) -> f64 {
        -SQRT_2 * (SQRT_2 * self.r).tan()
    }

    pub fn mu(&self) -> f64 {
        0.0
    }

    /// `(value, multiplicity)` for `α, β, λ, μ`.
    pub fn principal_table(&self) -> Vec<(f64, usize)> {
        let k = 2 * self.m - 2;
        vec![(self.alpha(), 1), (self.beta(), 2), (self.lambda(), k), (self.mu(), k)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypeBSpec {
    pub m: usize,
    pub r: f64,
    /// Seed for the random directions of the `T_λ`/`T_μ` splitting.
    pub seed: u64,
}

impl TypeBSpec {
    pub fn new(m: usize, r: f64, seed: u64) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::param(format!("type B requires an even m >= 4, got {m}")));
        }
        if !(r > 0.0 && r < type_b_r_max()) {
            return Err(Error::param(format!(
                "type B radius must lie in the open interval (0, pi/4) = (0, {:.10}), got {r}",
                type_b_r_max()
            )));
        }
        Ok(Self { m, r, seed })
    }

    pub fn alpha(&self) -> f64 {
        -2.0 * (2.0 * self.r).tan()
    }

    pub fn beta(&self) -> f64 {
        2.0 / (2.0 * self.r).tan()
    }

    pub fn gamma(&self) -> f64 {
        0.0
    }

    pub fn lambda(&self) -> f64 {
        1.0 / self.r.tan()
    }

    pub fn mu(&self) -> f64 {
        -self.r.tan()
    }

    /// `(value, multiplicity)` for `α, β, γ, λ, μ`.
    pub fn principal_table(&self) -> Vec<(f64, usize)> {
        let k = 2 * self.m - 4;
        vec![
            (self.alpha(), 1),
            (self.beta(), 3),
            (self.gamma(), 3),
            (self.lambda(), k),
            (self.mu(), k),
        ]
    }
}

/// Labelled orthonormal eigenspace basis of a model operator.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub label: &'static str,
    pub value: f64,
    pub basis: Vec<Vec<f64>>,
}

/// A model point together with its shape operator. The point's tangent frame
/// is the concatenation of the eigenspace bases.
#[derive(Clone, Debug)]
pub struct ModelSurface {
    pub point: HypersurfacePoint,
    pub shape: ShapeOperator,
    pub eigenspaces: Vec<Eigenspace>,
}

impl ModelSurface {
    pub fn eigenspace(&self, label: &str) -> Option<&Eigenspace> {
        self.eigenspaces.iter().find(|e| e.label == label)
    }

    /// Largest `|AX − λX|` over every reported basis vector.
    pub fn eigen_residual(&self) -> f64 {
        self.eigenspaces
            .iter()
            .flat_map(|e| {
                e.basis
                    .iter()
                    .map(move |v| max_abs(&sub(&self.shape.apply(v), &scaled(e.value, v))))
            })
            .fold(0.0, f64::max)
    }

    fn assemble(point: HypersurfacePoint, eigenspaces: Vec<Eigenspace>) -> Result<Self> {
        let columns: Vec<Vec<f64>> = eigenspaces.iter().flat_map(|e| e.basis.iter().cloned()).collect();
        let parts: Vec<(f64, &[Vec<f64>])> = eigenspaces.iter().map(|e| (e.value, e.basis.as_slice())).collect();
        let shape = ShapeOperator::from_spectral(&point, &parts)?;
        let point = point.with_frame(Mat::from_columns(&columns))?;
        Ok(Self {
            point,
            shape,
            eigenspaces,
        })
    }
}

/// Type A point: `N = e₀` in the gauge with `J₁N = JN`, so `ξ₁ = ξ`.
/// `T_β = span{ξ₂, ξ₃}`, `T_λ = ℋ₁(−1)` (`JX = J₁X`), `T_μ = ℋ₁(+1)`.
pub fn build_type_a(model: &AmbientModel, spec: &TypeASpec) -> Result<ModelSurface> {
    let spec = TypeASpec::new(spec.m, spec.r)?;
    if model.m() != spec.m {
        return Err(Error::param(format!("model has m = {}, spec has m = {}", model.m(), spec.m)));
    }
    let raw = HypersurfacePoint::build(model, &model.quat_vector(&[(0, Q_ONE)]))?;
    let (point, _) = raw.adapt_gauge();
    let sub_report = point.subspace_analysis(POSITION_TOL)?;
    if sub_report.hperp_dim() != 3 {
        return Err(Error::Construction(format!(
            "type A point has dim H-perp = {}, expected 3",
            sub_report.hperp_dim()
        )));
    }
    let xi_a = point.xi_a();
    let eigenspaces = vec![
        Eigenspace {
            label: "alpha",
            value: spec.alpha(),
            basis: vec![point.xi().to_vec()],
        },
        Eigenspace {
            label: "beta",
            value: spec.beta(),
            basis: vec![xi_a[1].clone(), xi_a[2].clone()],
        },
        Eigenspace {
            label: "lambda",
            value: spec.lambda(),
            basis: sub_report.ha_bases[0][1].clone(),
        },
        Eigenspace {
            label: "mu",
            value: spec.mu(),
            basis: sub_report.ha_bases[0][0].clone(),
        },
    ];
    ModelSurface::assemble(point, eigenspaces)
}

/// Residual of `ξ₂, ξ₃ ∈ ℍξ ⊖ ℂξ` at a point: distance of each from `ℍξ`
/// and its components along `ξ` and `Jξ`.
pub fn t_beta_membership(point: &HypersurfacePoint) -> f64 {
    let model = point.model();
    let xi = point.xi();
    let mut h_xi = vec![xi.to_vec()];
    h_xi.extend(model.ja().iter().map(|ja| ja.mul_vec(xi)));
    let proj = span_projector(point.dim(), &gram_schmidt(&h_xi));
    let j_xi = model.j().mul_vec(xi);
    (1..3)
        .map(|b| {
            let v = &point.xi_a()[b];
            max_abs(&sub(v, &proj.mul_vec(v)))
                .max(dot(v, xi).abs())
                .max(dot(v, &j_xi).abs())
        })
        .fold(0.0, f64::max)
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = dot(&w, b);
                crate::linalg::axpy(-c, b, &mut w);
            }
        }
        if norm(&w) > 1e-10 {
            out.push(normalized(&w));
        }
    }
    out
}

/// Type B point: `N = (e₀ + e₁·j)/√2`, so `u = 0`.
/// `T_β = span{ξ_a}`, `T_γ = span{φξ_a}`, and `T_λ ⊕ T_μ = (ℍℂξ)^⊥` split by
/// a greedy sequence of `ℍℂ`-lines.
pub fn build_type_b(model: &AmbientModel, spec: &TypeBSpec) -> Result<ModelSurface> {
    let spec = TypeBSpec::new(spec.m, spec.r, spec.seed)?;
    if model.m() != spec.m {
        return Err(Error::param(format!("model has m = {}, spec has m = {}", model.m(), spec.m)));
    }
    let s = FRAC_1_SQRT_2;
    let normal = model.quat_vector(&[(0, Q_ONE.map(|x| x * s)), (1, Q_J.map(|x| x * s))]);
    let point = HypersurfacePoint::build(model, &normal)?;
    let sub_report = point.subspace_analysis(POSITION_TOL)?;
    if sub_report.position != Position::D || sub_report.hperp_dim() != 7 {
        return Err(Error::Construction("type B normal does not give xi in D".into()));
    }
    let (t_lambda, t_mu) = split_hc_lines(model, &sub_report.h_projector, spec.seed)?;
    let eigenspaces = vec![
        Eigenspace {
            label: "alpha",
            value: spec.alpha(),
            basis: vec![point.xi().to_vec()],
        },
        Eigenspace {
            label: "beta",
            value: spec.beta(),
            basis: point.xi_a().to_vec(),
        },
        Eigenspace {
            label: "gamma",
            value: spec.gamma(),
            basis: (0..3).map(|a| point.phi_xi_a(a)).collect(),
        },
        Eigenspace {
            label: "lambda",
            value: spec.lambda(),
            basis: t_lambda,
        },
        Eigenspace {
            label: "mu",
            value: spec.mu(),
            basis: t_mu,
        },
    ];
    ModelSurface::assemble(point, eigenspaces)
}

/// Splits the `J`- and `𝔍`-invariant subspace with projector `h` into
/// `T_λ ⊕ T_μ` with `𝔍T_λ = T_λ`, `JT_λ = T_μ`.
///
/// Each step draws `X = (x₊ + x₋)/√2` with `x_± ∈ ker(JJ₁ ∓ 1)` and
/// `x₋ ⊥ JJ₂x₊, JJ₃x₊`. Then `⟨JJ_aX, X⟩ = 0` for every `a`, so `ℍX ⊥ ℍJX`
/// and `ℍℂX` is 8-dimensional; `ℍX` goes to `T_λ`, `ℍJX` to `T_μ`.
fn split_hc_lines(model: &AmbientModel, h: &Mat, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = model.dim();
    let j = model.j();
    let [j1, j2, j3] = model.ja();
    let [s1, s2, s3] = model.jja();
    let mut remaining = h.clone();
    let mut t_lambda = Vec::new();
    let mut t_mu = Vec::new();
    let mut rng = stream_rng(seed, 0);
    let mut attempts = 0;
    while remaining.trace() > 0.5 {
        let half = |eps: f64| {
            let mut inner = Mat::identity(n);
            inner.add_scaled(eps, s1);
            remaining.matmul(&inner).matmul(&remaining).scale(0.5).symmetric_part()
        };
        let (e_plus, e_minus) = (projector_range(&half(1.0))?, projector_range(&half(-1.0))?);
        let line = loop {
            attempts += 1;
            if attempts > MAX_LINE_ATTEMPTS {
                return Err(Error::Construction(format!(
                    "no 8-dimensional HC-line found after {MAX_LINE_ATTEMPTS} attempts"
                )));
            }
            if let Some(line) = draw_line(&mut rng, &e_plus, &e_minus, [j, j1, j2, j3], [s2, s3]) {
                break line;
            }
        };
        let (hx, hjx) = line;
        let mut assigned = hx.clone();
        assigned.extend(hjx.iter().cloned());
        remaining = remaining.sub(&span_projector(n, &assigned)).symmetric_part();
        t_lambda.extend(hx);
        t_mu.extend(hjx);
    }
    Ok((t_lambda, t_mu))
}

type Line = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn draw_line<R: Rng + ?Sized>(
    rng: &mut R,
    e_plus: &[Vec<f64>],
    e_minus: &[Vec<f64>],
    [j, j1, j2, j3]: [&Mat; 4],
    [s2, s3]: [&Mat; 2],
) -> Option<Line> {
    let combine = |basis: &[Vec<f64>], coeffs: &[f64]| {
        let mut v = vec![0.0; basis.first()?.len()];
        for (c, b) in coeffs.iter().zip(basis) {
            crate::linalg::axpy(*c, b, &mut v);
        }
        Some(v)
    };
    let xp = combine(e_plus, &gaussian_vec(rng, e_plus.len()))?;
    if norm(&xp) < 1e-6 {
        return None;
    }
    let xp = normalized(&xp);
    let mut xm = combine(e_minus, &gaussian_vec(rng, e_minus.len()))?;
    for s in [s2, s3] {
        let w = normalized(&s.mul_vec(&xp));
        let c = dot(&xm, &w);
        crate::linalg::axpy(-c, &w, &mut xm);
    }
    if norm(&xm) < 1e-6 {
        return None;
    }
    let xm = normalized(&xm);
    let x: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| (a + b) * FRAC_1_SQRT_2).collect();
    let hx = vec![x.clone(), j1.mul_vec(&x), j2.mul_vec(&x), j3.mul_vec(&x)];
    let hjx: Vec<Vec<f64>> = hx.iter().map(|v| j.mul_vec(v)).collect();
    let mut all = hx.clone();
    all.extend(hjx.iter().cloned());
    (orthonormality_defect(&all) <= MODEL_TOL).then_some((hx, hjx))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    /// `(mean eigenvalue, multiplicity)`, ascending.
    pub clusters: Vec<(f64, usize)>,
    pub cluster_tol: f64,
    /// Largest `|Av − λv|` over the computed eigenpairs.
    pub accuracy: f64,
    pub eigenvalues: Vec<f64>,
}

impl SpectrumReport {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.1).collect()
    }
}

/// Principal curvatures of `A` on the tangent space (the `N` direction is
/// excluded by working in the point's tangent frame), clustered by `cluster_tol`.
pub fn principal_spectrum(point: &HypersurfacePoint, a: &ShapeOperator, cluster_tol: f64) -> Result<SpectrumReport> {
    if !(cluster_tol > 0.0) {
        return Err(Error::param("cluster tolerance must be positive"));
    }
    let s = a.frame_matrix(point);
    let eig = sym_eigen(&s)?;
    let accuracy = (0..eig.values.len())
        .map(|k| {
            let v = eig.vector(k);
            max_abs(&sub(&s.mul_vec(&v), &scaled(eig.values[k], &v)))
        })
        .fold(0.0, f64::max);
    if cluster_tol < accuracy {
        return Err(Error::param(format!(
            "cluster tolerance {cluster_tol:e} is below the achieved eigensolver accuracy {accuracy:e}"
        )));
    }
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut members: Vec<f64> = Vec::new();
    for &v in &eig.values {
        if let Some(&last) = members.last() {
            if v - last > cluster_tol {
                clusters.push((members.iter().sum::<f64>() / members.len() as f64, members.len()));
                members.clear();
            }
        }
        members.push(v);
    }
    if !members.is_empty() {
        clusters.push((members.iter().sum::<f64>() / members.len() as f64, members.len()));
    }
    Ok(SpectrumReport {
        clusters,
        cluster_tol,
        accuracy,
        eigenvalues: eig.values,
    })
}

/// Expected clusters from a principal table: entries closer than `tol` are
/// merged, with a note naming the merge.
pub fn expected_clusters(table: &[(f64, usize)], labels: &[&str], tol: f64) -> (Vec<(f64, usize)>, Option<String>) {
    let mut idx: Vec<usize> = (0..table.len()).collect();
    idx.sort_by(|&a, &b| table[a].0.total_cmp(&table[b].0));
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut notes = Vec::new();
    let mut prev: Option<usize> = None;
    for i in idx {
        let (v, k) = table[i];
        match (out.last_mut(), prev) {
            (Some(last), Some(p)) if (v - last.0).abs() <= tol => {
                last.1 += k;
                notes.push(format!("{} and {} coincide", labels[p], labels[i]));
            }
            _ => out.push((v, k)),
        }
        prev = Some(i);
    }
    (out, (!notes.is_empty()).then(|| notes.join("; ")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ProofStep {
    TypeAFinal,
    TypeBAxi,
    ObliqueTheta1,
}

impl ProofStep {
    pub const ALL: [ProofStep; 3] = [ProofStep::TypeAFinal, ProofStep::TypeBAxi, ProofStep::ObliqueTheta1];

    pub fn name(self) -> &'static str {
        match self {
            ProofStep::TypeAFinal => "TYPE_A_FINAL",
            ProofStep::TypeBAxi => "TYPE_B_AXI",
            ProofStep::ObliqueTheta1 => "OBLIQUE_THETA1",
        }
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProofStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProofStep::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown proof step {s:?}")))
    }
}

fn principal_value(a: &ShapeOperator, v: &[f64], name: &str) -> Result<f64> {
    let lambda = a.matrix().form(v, v) / dot(v, v);
    let r = max_abs(&sub(&a.apply(v), &scaled(lambda, v)));
    if r > 1e-8 {
        return Err(Error::param(format!("{name} is not a principal vector (residual {r:e})")));
    }
    Ok(lambda)
}

/// Named scalars of one step of the nonexistence argument.
///
/// * `TYPE_A_FINAL`: `ξ ∈ 𝔇^⊥` in adapted gauge; `Y_j` is the first basis
///   vector of `ℋ₁(+1)`. Returns `braces`, `defect_entry = ⟨(R(ξ₂,Y_j)A)Y_j,ξ₂⟩`,
///   `beta = ⟨Aξ₂,ξ₂⟩`, `lambda_j` and `reference = (λ_j − β)·braces`.
/// * `TYPE_B_AXI`: `ξ ∈ 𝔇`, `ξ` principal. Returns `d = ⟨(R(φξ₁,ξ)A)ξ,φξ₁⟩`,
///   `alpha` and `reference = 4α`.
/// * `OBLIQUE_THETA1`: oblique point. Returns the largest eigen-equation
///   `residual` of the `θ₁` eigenvector list (in adapted gauge) and their
///   mutual `orthogonality` defect.
pub fn proof_step(point: &HypersurfacePoint, a: &ShapeOperator, step: ProofStep) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let u = point.u();
    match step {
        ProofStep::TypeAFinal => {
            if (u[0] - 1.0).abs() > MODEL_TOL || u[1].abs() > MODEL_TOL || u[2].abs() > MODEL_TOL {
                return Err(Error::param(format!(
                    "TYPE_A_FINAL needs xi in D-perp with adapted gauge u = (1,0,0), got {u:?}"
                )));
            }
            let report = point.subspace_analysis(POSITION_TOL)?;
            let y_j = report.ha_bases[0][0]
                .first()
                .cloned()
                .ok_or_else(|| Error::param("H_1(+1) is empty"))?;
            let xi2 = point.xi_a()[1].clone();
            let beta = principal_value(a, &xi2, "xi_2")?;
            let lambda_j = principal_value(a, &y_j, "Y_j")?;
            let mut braces = 1.0;
            for th in point.theta() {
                braces += th.form(&y_j, &y_j) * th.form(&xi2, &xi2);
            }
            let r = gauss_curvature(point, a)?;
            let entry = r.derivation_form(a.matrix(), &xi2, &y_j, &y_j, &xi2);
            out.insert("braces".into(), braces);
            out.insert("principal_braces".into(), principal_braces(point, &xi2, beta, &y_j, lambda_j));
            out.insert("defect_entry".into(), entry);
            out.insert("beta".into(), beta);
            out.insert("lambda_j".into(), lambda_j);
            out.insert("reference".into(), (lambda_j - beta) * braces);
        }
        ProofStep::TypeBAxi => {
            if point.u_norm() > POSITION_TOL {
                return Err(Error::param(format!("TYPE_B_AXI needs xi in D, got |u| = {:e}", point.u_norm())));
            }
            let xi = point.xi().to_vec();
            let alpha = principal_value(a, &xi, "xi")?;
            let pxi1 = point.phi_xi_a(0);
            let r = gauss_curvature(point, a)?;
            let d = r.derivation_form(a.matrix(), &pxi1, &xi, &xi, &pxi1);
            out.insert("d".into(), d);
            out.insert("alpha".into(), alpha);
            out.insert("reference".into(), 4.0 * alpha);
        }
        ProofStep::ObliqueTheta1 => {
            if point.position(POSITION_TOL) != Position::Oblique {
                return Err(Error::param(format!(
                    "OBLIQUE_THETA1 needs an oblique point, got |u| = {}",
                    point.u_norm()
                )));
            }
            let (adapted, _) = point.adapt_gauge();
            let (residual, orthogonality) = adapted.theta1_eigen_residual()?;
            out.insert("residual".into(), residual);
            out.insert("orthogonality".into(), orthogonality);
            out.insert("u1".into(), adapted.u()[0]);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    A,
    B,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            _ => Err(Error::Usage(format!("unknown family {s:?} (expected A or B)"))),
        }
    }
}

/// One row of a radius scan; `gamma` is present for type B only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub defect_frobenius: f64,
    pub defect_max_abs: f64,
    /// Single-entry lower bound: `2β` (type A) or `|4α|` (type B).
    pub bound: f64,
}

/// Builds the family member at radius `r`.
pub fn build_family(model: &AmbientModel, family: Family, r: f64, seed: u64) -> Result<ModelSurface> {
    match family {
        Family::A => build_type_a(model, &TypeASpec::new(model.m(), r)?),
        Family::B => build_type_b(model, &TypeBSpec::new(model.m(), r, seed)?),
    }
}

pub fn scan_row(model: &AmbientModel, family: Family, r: f64, seed: u64) -> Result<ScanRow> {
    let surface = build_family(model, family, r, seed)?;
    let defect = semiparallel_defect(&surface.point, &surface.shape)?;
    Ok(match family {
        Family::A => {
            let s = TypeASpec::new(model.m(), r)?;
            ScanRow {
                r,
                alpha: s.alpha(),
                beta: s.beta(),
                gamma: None,
                lambda: s.lambda(),
                mu: s.mu(),
                defect_frobenius: defect.frobenius,
                defect_max_abs: defect.max_abs,
                bound: 2.0 * s.beta(),
            }
        }
        Family::B => {
            let s = TypeBSpec::new(model.m(), r, seed)?;
            ScanRow {
                r,
                alpha: s.alpha(),
                beta: s.beta(),
                gamma: Some(s.gamma()),
                lambda: s.lambda(),
                mu: s.mu(),
                defect_frobenius: defect.frobenius,
                defect_max_abs: defect.max_abs,
                bound: (4.0 * s.alpha()).abs(),
            }
        }
    })
}

/// `steps` evenly spaced radii from `r_min` to `r_max` inclusive.
pub fn radius_grid(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(r_min <= r_max) {
        return Err(Error::param(format!(
            "invalid grid: r_min = {r_min}, r_max = {r_max}, steps = {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![r_min]);
    }
    let h = (r_max - r_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { r_max } else { r_min + h * i as f64 })
        .collect())
}

/// Scan over a radius grid, evaluated as a parallel map keyed by grid index.
pub fn scan_family(model: &AmbientModel, family: Family, grid: &[f64], seed: u64) -> Result<Vec<ScanRow>> {
    grid.par_iter().map(|&r| scan_row(model, family, r, seed)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyMinimum {
    pub r: f64,
    pub frobenius: f64,
    pub evaluations: usize,
}

/// Minimum of the defect Frobenius norm along `r ↦ A(r)` on `[r_min, r_max]`:
/// grid search followed by golden-section refinement around the best grid point.
pub fn minimize_family(
    model: &AmbientModel,
    family: Family,
    r_min: f64,
    r_max: f64,
    grid_steps: usize,
    seed: u64,
) -> Result<FamilyMinimum> {
    let grid = radius_grid(r_min, r_max, grid_steps.max(3))?;
    let rows = scan_family(model, family, &grid, seed)?;
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.defect_frobenius < rows[best].defect_frobenius {
            best = i;
        }
    }
    let f = |r: f64| scan_row(model, family, r, seed).map(|row| row.defect_frobenius);
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let mut evaluations = rows.len() + 2;
    let (mut best_r, mut best_f) = (grid[best], rows[best].defect_frobenius);
    for _ in 0..60 {
        if hi - lo <= 1e-10 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
        evaluations += 1;
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if fx < best_f {
                best_r = x;
                best_f = fx;
            }
        }
    }
    Ok(FamilyMinimum {
        r: best_r,
        frobenius: best_f,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spec_validation() {
        assert!(TypeASpec::new(3, 0.0).is_err());
        assert!(TypeASpec::new(3, type_a_r_max()).is_err());
        assert!(TypeASpec::new(2, 0.5).is_err());
        assert!(TypeBSpec::new(5, 0.3, 0).is_err());
        assert!(TypeBSpec::new(4, FRAC_PI_4, 0).is_err());
        assert!(TypeBSpec::new(4, 0.3, 0).is_ok());
    }

    #[test]
    fn type_a_table_values() {
        let s = TypeASpec::new(3, PI / (8.0 * SQRT_2)).unwrap();
        assert!((s.alpha() - 2.0 * SQRT_2).abs() < 1e-14);
        assert!((s.beta() - (2.0 + SQRT_2)).abs() < 1e-14);
        assert!((s.lambda() + (2.0 - SQRT_2)).abs() < 1e-14);
        let k: usize = s.principal_table().iter().map(|t| t.1).sum();
        assert_eq!(k, 11);
    }

    #[test]
    fn type_a_lambda_space_has_jx_equal_j1x() {
        let model = AmbientModel::build(3).unwrap();
        let s = build_type_a(&model, &TypeASpec::new(3, 0.4).unwrap()).unwrap();
        assert_eq!(s.point.u(), [1.0, 0.0, 0.0]);
        let gauged = s.point.model();
        for x in &s.eigenspace("lambda").unwrap().basis {
            let d = sub(&gauged.j().mul_vec(x), &gauged.ja()[0].mul_vec(x));
            assert!(max_abs(&d) < 1e-10);
        }
        assert!(s.eigen_residual() < 1e-12);
        assert!(t_beta_membership(&s.point) < 1e-12);
    }

    #[test]
    fn merged_clusters_are_noted() {
        let s = TypeASpec::new(3, PI / (4.0 * SQRT_2)).unwrap();
        let (c, note) = expected_clusters(&s.principal_table(), &["alpha", "beta", "lambda", "mu"], CLUSTER_TOL);
        assert_eq!(c.len(), 3);
        assert_eq!(c.iter().find(|x| x.0.abs() < 1e-9).unwrap().1, 5);
        let note = note.unwrap();
        assert!(note.contains("alpha") && note.contains("mu"), "{note}");
    }

    #[test]
    fn type_b_splitting() {
        let model = AmbientModel::build(4).unwrap();
        let s = build_type_b(&model, &TypeBSpec::new(4, PI / 8.0, 3).unwrap()).unwrap();
        let lam = &s.eigenspace("lambda").unwrap().basis;
        let mu = &s.eigenspace("mu").unwrap().basis;
        assert_eq!((lam.len(), mu.len()), (4, 4));
        let p_mu = span_projector(16, mu);
        for x in lam {
            let px = s.point.phi().mul_vec(x);
            assert!(max_abs(&sub(&px, &p_mu.mul_vec(&px))) < 1e-10);
        }
        assert!(s.eigen_residual() < 1e-12);
    }

    #[test]
    fn spectrum_of_zero_operator() {
        let model = AmbientModel::build(3).unwrap();
        let p = HypersurfacePoint::build(&model, &model.quat_vector(&[(0, Q_ONE)])).unwrap();
        let r = principal_spectrum(&p, &ShapeOperator::zero(&p), CLUSTER_TOL).unwrap();
        assert_eq!(r.clusters, vec![(0.0, 11)]);
        assert!(principal_spectrum(&p, &ShapeOperator::zero(&p), 0.0).is_err());
    }

    #[test]
    fn hypothesis_mismatch_is_rejected() {
        let model = AmbientModel::build(4).unwrap();
        let b = build_type_b(&model, &TypeBSpec::new(4, 0.3, 0).unwrap()).unwrap();
        assert!(proof_step(&b.point, &b.shape, ProofStep::TypeAFinal).is_err());
        assert!(proof_step(&b.point, &b.shape, ProofStep::ObliqueTheta1).is_err());
        let a = build_type_a(&model, &TypeASpec::new(4, 0.3).unwrap()).unwrap();
        assert!(proof_step(&a.point, &a.shape, ProofStep::TypeBAxi).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = radius_grid(0.1, 1.0, 50).unwrap();
        assert_eq!((g.len(), g[0], g[49]), (50, 0.1, 1.0));
        assert!(radius_grid(1.0, 0.1, 5).is_err());
    }
}
