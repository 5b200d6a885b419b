use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};

use rayon::prelude::*;
use serde_json::Value;

use super::{param_map, CheckResult, Report, Suite, SuiteParams};
use crate::ambient::{AmbientModel, GaugeRotation, Q_J, Q_ONE};
use crate::curvature::residual::{ResidualArgs, ResidualId};
use crate::curvature::{
    defect_gradient, defect_objective, gauss_curvature, minimize_defect, residual_pair, MinimizeOptions, ShapeOperator,
};
use crate::error::{Error, Result};
use crate::hyperpoint::{oblique_normal, random_unit_normal, HypersurfacePoint, Position, POSITION_TOL};
use crate::linalg::{dot, max_abs, normalized, orthonormality_defect, span_projector, sub, sym_eigen, Mat};
use crate::model::{
    build_type_a, build_type_b, expected_clusters, minimize_family, principal_spectrum, proof_step, radius_grid,
    scan_row, t_beta_membership, Family, ModelSurface, ProofStep, TypeASpec, TypeBSpec, CLUSTER_TOL,
};
use crate::rng::{gaussian_symmetric, gaussian_vec, stream_rng};

const STRUCT_TOL: f64 = 1e-12;
const GAUGE_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-9;
const BASIS_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-9;
const SPECTRUM_TOL: f64 = 1e-10;
const ENTRY_TOL: f64 = 1e-8;
const FD_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;
const MINIMIZER_TARGET: f64 = 1e-8;

fn base(m: usize) -> BTreeMap<String, Value> {
    param_map([("m", m)])
}

fn with(mut p: BTreeMap<String, Value>, key: &str, v: impl Into<Value>) -> BTreeMap<String, Value> {
    p.insert(key.to_string(), v.into());
    p
}

fn fmax(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

fn count(xs: impl IntoIterator<Item = bool>) -> f64 {
    xs.into_iter().filter(|&b| b).count() as f64
}

fn new_report(suite: Suite, params: &SuiteParams, extra: &[(&str, Value)]) -> Report {
    let mut p = base(params.m);
    for (k, v) in extra {
        p.insert((*k).to_string(), v.clone());
    }
    Report::new(suite.name(), p, params.seed)
}

/// `(m, r, seed, trial)`-style parameter map for a check.
fn trial_params(m: usize, seed: u64, trials: usize) -> BTreeMap<String, Value> {
    with(with(base(m), "seed", seed), "trials", trials)
}

fn orthonormal_pair(rng: &mut impl rand::Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = normalized(&gaussian_vec(rng, n));
    let mut y = gaussian_vec(rng, n);
    let c = dot(&y, &x);
    crate::linalg::axpy(-c, &x, &mut y);
    (x, normalized(&y))
}

pub(super) fn ambient(params: &SuiteParams) -> Result<Report> {
    let m = params.m;
    let trials = params.trials.unwrap_or(Suite::Ambient.default_trials());
    let samples = trials.max(200);
    let seed = params.seed;
    let mut report = new_report(Suite::Ambient, params, &[("trials", trials.into())]);
    let model = AmbientModel::build(m)?;
    for (name, v) in model.invariants().named() {
        report.push(CheckResult::new(format!("ambient.{name}"), base(m), v, STRUCT_TOL));
    }

    let rotated: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rot = GaugeRotation::random(&mut stream_rng(seed, t as u64));
            let r = model.rotate_gauge(&rot);
            (r.invariants().max(), r.j().sub(model.j()).max_abs())
        })
        .collect();
    let p = trial_params(m, seed, trials);
    report.push(CheckResult::new(
        "ambient.gauge_rotation_invariants",
        p.clone(),
        fmax(rotated.iter().map(|r| r.0)),
        GAUGE_TOL,
    ));
    report.push(CheckResult::new(
        "ambient.gauge_rotation_fixes_j",
        p,
        fmax(rotated.iter().map(|r| r.1)),
        STRUCT_TOL,
    ));

    let flip = GaugeRotation::new([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])?;
    let fm = model.rotate_gauge(&flip);
    let flip_res = fmax([
        fm.ja()[0].add(&model.ja()[0]).max_abs(),
        fm.ja()[1].add(&model.ja()[1]).max_abs(),
        fm.ja()[2].sub(&model.ja()[2]).max_abs(),
        fm.invariants().max(),
    ]);
    report.push(CheckResult::new("ambient.signed_flip_rotation", base(m), flip_res, STRUCT_TOL));

    let n = model.dim();
    let props: Vec<[f64; 4]> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, (trials + t) as u64);
            let (x, y) = orthonormal_pair(&mut rng, n);
            let z = normalized(&gaussian_vec(&mut rng, n));
            let w = normalized(&gaussian_vec(&mut rng, n));
            let rot = GaugeRotation::random(&mut rng);
            let gm = model.rotate_gauge(&rot);
            let f = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| model.curvature_form(a, b, c, d).unwrap();
            let r = |a: &[f64], b: &[f64], c: &[f64]| model.curvature(a, b, c).unwrap();
            let antisym = (f(&x, &y, &z, &w) + f(&y, &x, &z, &w)).abs();
            let skew = (f(&x, &y, &z, &w) + f(&x, &y, &w, &z)).abs();
            let cyc: Vec<f64> = r(&x, &y, &z)
                .iter()
                .zip(r(&y, &z, &x))
                .zip(r(&z, &x, &y))
                .map(|((a, b), c)| a + b + c)
                .collect();
            let gauge = max_abs(&sub(&r(&x, &y, &z), &gm.curvature(&x, &y, &z).unwrap()));
            [antisym, skew, max_abs(&cyc), gauge]
        })
        .collect();
    let p = with(with(base(m), "seed", seed), "samples", samples);
    for (k, name) in ["antisymmetric_xy", "skew_zw", "first_bianchi", "gauge_invariant"].iter().enumerate() {
        report.push(CheckResult::new(
            format!("ambient.curvature_{name}"),
            p.clone(),
            fmax(props.iter().map(|v| v[k])),
            GAUGE_TOL,
        ));
    }

    // closed-form values
    let x = model.quat_vector(&[(0, Q_J)]);
    let jx = model.j().mul_vec(&x);
    let eight = model.curvature_form(&x, &jx, &jx, &x)?;
    report.push(CheckResult::new("ambient.curvature_j_equals_j1_plane", base(m), (eight - 8.0).abs(), STRUCT_TOL));
    let s = FRAC_1_SQRT_2;
    let gx = model.quat_vector(&[(0, Q_ONE.map(|v| v * s)), (1, Q_J.map(|v| v * s))]);
    let gy = model.quat_vector(&[(2, Q_ONE)]);
    let one = model.curvature_form(&gx, &gy, &gy, &gx)?;
    report.push(
        CheckResult::new("ambient.curvature_generic_plane", base(m), (one - 1.0).abs(), STRUCT_TOL)
            .with_note("X = (e0 + e1*j)/sqrt2 has <JJ_a X, X> = 0; Y = e2 is orthogonal to HC X"),
    );
    let z = model.quat_vector(&[(1, Q_ONE)]);
    let zero = max_abs(&model.curvature(&x, &x, &z)?);
    report.push(CheckResult::new("ambient.curvature_equal_arguments", base(m), zero, STRUCT_TOL));
    Ok(report)
}

pub(super) fn point_identities(params: &SuiteParams) -> Result<Report> {
    let m = params.m;
    let trials = params.trials.unwrap_or(Suite::PointIdentities.default_trials());
    let seed = params.seed;
    let mut report = new_report(Suite::PointIdentities, params, &[("trials", trials.into())]);
    let model = AmbientModel::build(m)?;
    let per_trial: Vec<(Vec<(&'static str, f64)>, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut rng = stream_rng(seed, t as u64);
            let p = HypersurfacePoint::build(&model, &random_unit_normal(&model, &mut rng))?;
            let rot = GaugeRotation::random(&mut rng);
            let q = p.rotate_gauge(&rot);
            let u_res = fmax((0..3).map(|a| (q.u()[a] - rot.apply(p.u())[a]).abs()));
            let expected = rot.combine(p.theta(), || Mat::zeros(p.dim(), p.dim()), |acc, c, th| acc.add_scaled(c, th));
            let th_res = fmax((0..3).map(|a| q.theta()[a].sub(&expected[a]).max_abs()));
            Ok((p.identities().named(), u_res, th_res))
        })
        .collect::<Result<_>>()?;
    let p = trial_params(m, seed, trials);
    for (k, (name, _)) in per_trial[0].0.iter().enumerate() {
        let mut c = CheckResult::new(
            format!("point.{name}"),
            p.clone(),
            fmax(per_trial.iter().map(|t| t.0[k].1)),
            IDENTITY_TOL,
        );
        if *name == "theta_b_trace" {
            c = c.with_note("absolute |tr(theta_a) - u_a|");
        }
        report.push(c);
    }
    report.push(CheckResult::new(
        "point.gauge_covariance_u",
        p.clone(),
        fmax(per_trial.iter().map(|t| t.1)),
        GAUGE_TOL,
    ));
    report.push(CheckResult::new(
        "point.gauge_covariance_theta",
        p,
        fmax(per_trial.iter().map(|t| t.2)),
        GAUGE_TOL,
    ));

    let e0 = HypersurfacePoint::build(&model, &model.quat_vector(&[(0, Q_ONE)]))?;
    report.push(CheckResult::new("point.quaternionic_normal_u_unit", base(m), (e0.u_norm() - 1.0).abs(), STRUCT_TOL));
    let d = HypersurfacePoint::build(&model, &oblique_normal(&model, FRAC_PI_4))?;
    report.push(
        CheckResult::new("point.balanced_normal_u_zero", base(m), d.u_norm(), STRUCT_TOL)
            .with_note("N = (e0 + e1*j)/sqrt2"),
    );
    let ob = HypersurfacePoint::build(&model, &oblique_normal(&model, FRAC_PI_8))?;
    let (adapted, rot) = ob.adapt_gauge();
    let u = adapted.u();
    let res = fmax([
        (u[0] - FRAC_PI_4.cos()).abs(),
        u[1].abs(),
        u[2].abs(),
        (adapted.u_norm() - ob.u_norm()).abs(),
        rot.orthogonality_defect(),
    ]);
    report.push(CheckResult::new(
        "point.adapt_gauge_oblique",
        with(base(m), "t", FRAC_PI_8),
        res,
        GAUGE_TOL,
    ));
    let (same, rot) = d.adapt_gauge();
    let ident = if rot == GaugeRotation::identity() && same.u() == d.u() { 0.0 } else { 1.0 };
    report.push(CheckResult::new("point.adapt_gauge_zero_u_identity", base(m), ident, 0.0));
    Ok(report)
}

pub(super) fn subspaces(params: &SuiteParams) -> Result<Report> {
    let m = params.m;
    let trials = params.trials.unwrap_or(Suite::Subspaces.default_trials());
    let seed = params.seed;
    let mut report = new_report(Suite::Subspaces, params, &[("trials", trials.into())]);
    let model = AmbientModel::build(m)?;

    // random normals, random quaternionic-line normals (|u| = 1)
    type Row = (bool, bool, [f64; 5], bool, bool);
    let rows: Vec<Row> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Row> {
            let mut rng = stream_rng(seed, t as u64);
            let p = HypersurfacePoint::build(&model, &random_unit_normal(&model, &mut rng))?;
            let s = p.subspace_analysis(POSITION_TOL)?;
            let e = s.eigenspace_residuals(&p);
            let balanced = s.ha_dims_balanced();
            let rank_ok = (s.hperp_dim() == 3) == (s.position == Position::DPerp);

            let slot = t % m;
            let q = normalized(&gaussian_vec(&mut rng, 4));
            let line = HypersurfacePoint::build(&model, &model.quat_vector(&[(slot, [q[0], q[1], q[2], q[3]])]))?;
            let ls = line.subspace_analysis(POSITION_TOL)?;
            let k = 2 * m - 2;
            let line_ok = ls.hperp_dim() == 3
                && ls.position == Position::DPerp
                && (0..3).all(|a| ls.ha_dims(a) == (k, k));
            Ok((
                balanced,
                rank_ok,
                [e.eigen, e.phi_preserves, e.theta_swaps, e.phi_b_swaps, e.orthonormal],
                line_ok,
                ls.ha_dims_balanced(),
            ))
        })
        .collect::<Result<_>>()?;
    let p = trial_params(m, seed, trials);
    report.push(CheckResult::new("subspaces.ha_dims_equal_even", p.clone(), count(rows.iter().map(|r| !r.0 || !r.4)), 0.0));
    report.push(CheckResult::new("subspaces.hperp_rank_matches_position", p.clone(), count(rows.iter().map(|r| !r.1)), 0.0));
    let names = ["theta_eigen", "phi_preserves_ha", "theta_b_swaps_ha", "phi_b_swaps_ha"];
    for (k, name) in names.iter().enumerate() {
        report.push(CheckResult::new(
            format!("subspaces.{name}"),
            p.clone(),
            fmax(rows.iter().map(|r| r.2[k])),
            IDENTITY_TOL,
        ));
    }
    report.push(CheckResult::new("subspaces.bases_orthonormal", p.clone(), fmax(rows.iter().map(|r| r.2[4])), BASIS_TOL));
    report.push(
        CheckResult::new("subspaces.quaternionic_line_hperp_3", p, count(rows.iter().map(|r| !r.3)), 0.0)
            .with_note("N = q e_k for unit quaternions q: dim H-perp = 3 and dim H_a(+-1) = 2m-2"),
    );

    // oblique family t in (0, π/4]: dim H-perp = 7; θ₁ eigenvector list for t < π/4
    let steps = 20;
    let ts: Vec<f64> = (1..=steps).map(|i| FRAC_PI_4 * i as f64 / steps as f64).collect();
    let fam: Vec<(bool, f64, f64)> = ts
        .par_iter()
        .map(|&t| -> Result<_> {
            let p = HypersurfacePoint::build(&model, &oblique_normal(&model, t))?;
            let s = p.subspace_analysis(POSITION_TOL)?;
            let ok = s.hperp_dim() == 7 && s.ha_dims_balanced();
            let (res, orth) = if p.position(POSITION_TOL) == Position::Oblique {
                p.adapt_gauge().0.theta1_eigen_residual()?
            } else {
                (0.0, 0.0)
            };
            Ok((ok, res, orth))
        })
        .collect::<Result<_>>()?;
    let p = with(with(base(m), "t_min", ts[0]), "t_max", FRAC_PI_4);
    report.push(CheckResult::new("subspaces.oblique_family_hperp_7", p.clone(), count(fam.iter().map(|f| !f.0)), 0.0));
    report.push(CheckResult::new("subspaces.theta1_eigenvectors", p.clone(), fmax(fam.iter().map(|f| f.1)), IDENTITY_TOL));
    report.push(CheckResult::new(
        "subspaces.theta1_eigenvectors_orthogonal",
        p,
        fmax(fam.iter().map(|f| f.2)),
        IDENTITY_TOL,
    ));

    let d = HypersurfacePoint::build(&model, &oblique_normal(&model, FRAC_PI_4))?;
    let mut family = vec![d.xi().to_vec()];
    family.extend(d.xi_a().iter().cloned());
    family.extend((0..3).map(|a| d.phi_xi_a(a)));
    report.push(CheckResult::new(
        "subspaces.d_family_orthonormal",
        with(base(m), "t", FRAC_PI_4),
        orthonormality_defect(&family),
        BASIS_TOL,
    ));
    Ok(report)
}

fn tangent_unit(p: &HypersurfacePoint, rng: &mut impl rand::Rng) -> Vec<f64> {
    normalized(&p.tangent_part(&gaussian_vec(rng, p.dim())))
}

pub(super) fn residual_oracle(params: &SuiteParams) -> Result<Report> {
    let m = params.m;
    let trials = params.trials.unwrap_or(Suite::ResidualOracle.default_trials());
    let seed = params.seed;
    let mut report = new_report(Suite::ResidualOracle, params, &[("trials", trials.into())]);
    let model = AmbientModel::build(m)?;

    type Row = (Vec<(f64, f64)>, [f64; 6]);
    let rows: Vec<Row> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Row> {
            let mut rng = stream_rng(seed, t as u64);
            let p = HypersurfacePoint::build(&model, &random_unit_normal(&model, &mut rng))?;
            let n = p.tangent_dim();
            let s = gaussian_symmetric(&mut rng, n, 1.0);
            let a = ShapeOperator::from_frame(&p, &s)?;
            let y = tangent_unit(&p, &mut rng);
            let z = tangent_unit(&p, &mut rng);
            let eig = sym_eigen(&s)?;
            let (k, j) = (t % n, (t + 1 + t / n) % n);
            let (k, j) = if k == j { (k, (j + 1) % n) } else { (k, j) };
            let lift = |v: Vec<f64>| p.frame().mul_vec(&v);
            let vectors = || ResidualArgs::Vectors { y: y.clone(), z: z.clone() };
            let mut out = Vec::new();
            for id in ResidualId::ALL {
                let args = match id {
                    ResidualId::E700 => ResidualArgs::Indexed {
                        b: t % 3,
                        y: y.clone(),
                        z: z.clone(),
                    },
                    ResidualId::ECURV => ResidualArgs::Principal {
                        y_k: lift(eig.vector(k)),
                        lambda_k: eig.values[k],
                        y_j: lift(eig.vector(j)),
                        lambda_j: eig.values[j],
                    },
                    _ => vectors(),
                };
                let r = residual_pair(&p, &a, id, &args)?;
                out.push((r.expanded, r.direct));
            }
            let get = |id: ResidualId, v: &ResidualArgs| residual_pair(&p, &a, id, v);
            let swapped = ResidualArgs::Vectors { y: z.clone(), z: y.clone() };
            let e130 = get(ResidualId::E130, &vectors())?;
            let e130s = get(ResidualId::E130, &swapped)?;
            let e120 = get(ResidualId::E120, &vectors())?;
            let e140 = get(ResidualId::E140, &vectors())?;
            let e160 = get(ResidualId::E160, &vectors())?;
            let e180 = get(ResidualId::E180, &vectors())?;
            let e200 = get(ResidualId::E200, &vectors())?;
            let rel = |lhs: f64, rhs: f64| (lhs - rhs).abs() / (1.0 + lhs.abs());
            // ⟨(R(X,Y)A)Z,W⟩ evaluated from R(X,Y)(AZ) − A R(X,Y)Z
            let r = gauss_curvature(&p, &a)?;
            let ra = |x: &[f64], y: &[f64], z: &[f64], w: &[f64]| {
                dot(&sub(&r.apply(x, y, &a.apply(z)), &a.apply(&r.apply(x, y, z))), w)
            };
            let xi = p.xi();
            let c140 = ra(xi, &y, &z, xi) - ra(xi, &z, &y, xi);
            let c160 = ra(&z, &y, xi, xi);
            let c120: f64 = p
                .frame()
                .columns()
                .iter()
                .map(|e| ra(e, &y, &z, e) - ra(e, &z, &y, e))
                .sum();
            let comb = [
                rel(e140.direct, c140),
                rel(e200.direct, c140 - 2.0 * c160),
                rel(e180.direct, c140 + c120 - c160),
                rel(e140.expanded, e130.expanded - e130s.expanded),
                rel(e200.expanded, e140.expanded - 2.0 * e160.expanded),
                rel(e180.expanded, e140.expanded + e120.expanded - e160.expanded),
            ];
            Ok((out, comb))
        })
        .collect::<Result<_>>()?;

    let p = trial_params(m, seed, trials);
    for (i, id) in ResidualId::ALL.iter().enumerate() {
        let gaps = rows.iter().map(|r| {
            let (e, d) = r.0[i];
            (e - d).abs() / (1.0 + d.abs())
        });
        let ratios: Vec<f64> = rows
            .iter()
            .filter(|r| r.0[i].1.abs() > 1e-6)
            .map(|r| r.0[i].0 / r.0[i].1)
            .collect();
        let note = if ratios.is_empty() {
            "direct values all below 1e-6".to_string()
        } else {
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let spread = fmax(ratios.iter().map(|x| (x - mean).abs()));
            format!("expanded/direct ratio mean {mean:.12} spread {spread:.3e}")
        };
        report.push(CheckResult::new(format!("residual.{id}"), p.clone(), fmax(gaps), ORACLE_TOL).with_note(note));
    }
    let names = [
        "combination_direct.E140_antisymmetrization",
        "combination_direct.E200_eq_E140_minus_2E160",
        "combination_direct.E180_eq_E140_plus_E120_minus_E160",
        "combination_expanded.E140_antisymmetrization",
        "combination_expanded.E200_eq_E140_minus_2E160",
        "combination_expanded.E180_eq_E140_plus_E120_minus_E160",
    ];
    for (k, name) in names.iter().enumerate() {
        report.push(CheckResult::new(
            format!("residual.{name}"),
            p.clone(),
            fmax(rows.iter().map(|r| r.1[k])),
            ORACLE_TOL,
        ));
    }
    Ok(report)
}

/// Structural residuals of a model surface.
fn surface_checks(surface: &ModelSurface, family: Family) -> Vec<(&'static str, f64)> {
    let p = &surface.point;
    let model = p.model();
    let a = surface.shape.matrix();
    let n = p.dim();
    let mut out = vec![("eigenbasis", surface.eigen_residual())];
    match family {
        Family::A => {
            let lam = &surface.eigenspace("lambda").expect("lambda space").basis;
            let jx = fmax(
                lam.iter()
                    .map(|x| max_abs(&sub(&model.j().mul_vec(x), &model.ja()[0].mul_vec(x)))),
            );
            let h: Vec<Vec<f64>> = ["lambda", "mu"]
                .iter()
                .flat_map(|l| surface.eigenspace(l).expect("space").basis.clone())
                .collect();
            let ph = span_projector(n, &h);
            let th = &p.theta()[0];
            let comm = ph.matmul(&a.matmul(th).sub(&th.matmul(a))).matmul(&ph).max_abs();
            out.push(("t_lambda_jx_eq_j1x", jx));
            out.push(("a_commutes_theta1_on_h", comm));
            out.push(("t_beta_in_hxi_minus_cxi", t_beta_membership(p)));
        }
        Family::B => {
            let lam = &surface.eigenspace("lambda").expect("lambda space").basis;
            let mu = &surface.eigenspace("mu").expect("mu space").basis;
            let (pl, pm) = (span_projector(n, lam), span_projector(n, mu));
            let leak = |proj: &Mat, v: &[f64]| max_abs(&sub(v, &proj.mul_vec(v)));
            let phi_in_mu = fmax(lam.iter().map(|x| leak(&pm, &p.phi().mul_vec(x))));
            let quat = fmax(lam.iter().flat_map(|x| model.ja().iter().map(|ja| leak(&pl, &ja.mul_vec(x)))))
                .max(fmax(mu.iter().flat_map(|x| model.ja().iter().map(|ja| leak(&pm, &ja.mul_vec(x))))));
            let a_phi_xi = fmax((0..3).map(|k| max_abs(&a.mul_vec(&p.phi_xi_a(k)))));
            out.push(("phi_t_lambda_in_t_mu", phi_in_mu));
            out.push(("quaternionic_invariance", quat));
            out.push(("a_phi_xi_a_zero", a_phi_xi));
        }
    }
    out
}

fn family_labels(family: Family) -> &'static [&'static str] {
    match family {
        Family::A => &["alpha", "beta", "lambda", "mu"],
        Family::B => &["alpha", "beta", "gamma", "lambda", "mu"],
    }
}

fn build_member(model: &AmbientModel, family: Family, r: f64, seed: u64) -> Result<(ModelSurface, Vec<(f64, usize)>)> {
    Ok(match family {
        Family::A => {
            let s = TypeASpec::new(model.m(), r)?;
            (build_type_a(model, &s)?, s.principal_table())
        }
        Family::B => {
            let s = TypeBSpec::new(model.m(), r, seed)?;
            (build_type_b(model, &s)?, s.principal_table())
        }
    })
}

pub(super) fn model_scan(params: &SuiteParams, family: Family) -> Result<Report> {
    let m = params.m;
    let (suite, default_max) = match family {
        Family::A => (Suite::ModelAScan, 1.0),
        Family::B => (Suite::ModelBScan, 0.68),
    };
    if family == Family::B && (m < 4 || m % 2 != 0) {
        return Err(Error::param(format!("MODEL_B_SCAN requires an even m >= 4, got {m}")));
    }
    let (r_min, r_max, steps) = (
        params.r_min.unwrap_or(0.1),
        params.r_max.unwrap_or(default_max),
        params.steps.unwrap_or(50),
    );
    let grid = radius_grid(r_min, r_max, steps)?;
    let model = AmbientModel::build(m)?;
    let seed = params.seed;
    let mut report = new_report(
        suite,
        params,
        &[("r_min", r_min.into()), ("r_max", r_max.into()), ("steps", steps.into())],
    );

    type Row = (crate::model::ScanRow, Vec<(&'static str, f64)>, bool, f64, Option<String>);
    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&r| -> Result<Row> {
            let row = scan_row(&model, family, r, seed)?;
            let (surface, table) = build_member(&model, family, r, seed)?;
            let spec = principal_spectrum(&surface.point, &surface.shape, CLUSTER_TOL)?;
            let (expected, note) = expected_clusters(&table, family_labels(family), CLUSTER_TOL);
            let mult_ok = spec.multiplicities() == expected.iter().map(|c| c.1).collect::<Vec<_>>();
            let value_err = if mult_ok {
                fmax(spec.clusters.iter().zip(&expected).map(|(a, b)| (a.0 - b.0).abs()))
            } else {
                f64::NAN
            };
            Ok((row, surface_checks(&surface, family), mult_ok, value_err, note))
        })
        .collect::<Result<_>>()?;

    let p = with(with(with(base(m), "r_min", r_min), "r_max", r_max), "steps", steps);
    let p = with(p, "seed", seed);
    let scan: Vec<_> = rows.iter().map(|r| r.0).collect();
    let bound_name = match family {
        Family::A => "2beta",
        Family::B => "|4alpha|",
    };
    report.push(
        CheckResult::new(
            "scan.frobenius_above_single_entry_bound",
            p.clone(),
            fmax(scan.iter().map(|r| (r.bound - r.defect_frobenius).max(0.0))),
            0.0,
        )
        .with_note(format!("shortfall of defect_frobenius below {bound_name}(r)")),
    );
    report.push(
        CheckResult::new(
            "scan.max_entry_reaches_bound",
            p.clone(),
            fmax(scan.iter().map(|r| (r.bound - r.defect_max_abs).max(0.0))),
            ENTRY_TOL,
        )
        .with_note(format!("shortfall of defect_max_abs below {bound_name}(r)")),
    );
    let (min_row, min_bound) = (
        scan.iter().min_by(|a, b| a.defect_frobenius.total_cmp(&b.defect_frobenius)).expect("nonempty grid"),
        scan.iter().map(|r| r.bound).fold(f64::INFINITY, f64::min),
    );
    report.push(
        CheckResult::new(
            "scan.min_frobenius_above_min_bound",
            with(with(p.clone(), "min_frobenius", min_row.defect_frobenius), "min_bound", min_bound),
            (min_bound - min_row.defect_frobenius).max(0.0),
            0.0,
        )
        .with_note(format!("minimum at r = {}", min_row.r)),
    );
    report.push(CheckResult::new(
        "scan.spectrum_multiplicities",
        p.clone(),
        count(rows.iter().map(|r| !r.2)),
        0.0,
    ));
    let merged: Vec<String> = rows.iter().filter_map(|r| r.4.clone()).collect();
    let mut c = CheckResult::new("scan.spectrum_values", p.clone(), fmax(rows.iter().map(|r| r.3)), SPECTRUM_TOL);
    if !merged.is_empty() {
        c = c.with_note(format!("merged clusters: {}", merged.join("; ")));
    }
    report.push(c);
    for (k, (name, _)) in rows[0].1.iter().enumerate() {
        let tol = if *name == "eigenbasis" { IDENTITY_TOL } else { BASIS_TOL };
        report.push(CheckResult::new(
            format!("scan.{name}"),
            p.clone(),
            fmax(rows.iter().map(|r| r.1[k].1)),
            tol,
        ));
    }
    report.scan = Some(scan);
    Ok(report)
}

pub(super) fn proof_steps(params: &SuiteParams) -> Result<Report> {
    let m_a = params.m;
    let m_b = if params.m % 2 == 0 { params.m.max(4) } else { (params.m + 1).max(4) };
    let steps = params.steps.unwrap_or(50);
    let seed = params.seed;
    let mut report = new_report(
        Suite::ProofSteps,
        params,
        &[("m_type_b", m_b.into()), ("steps", steps.into())],
    );

    let model_a = AmbientModel::build(m_a)?;
    let grid_a = radius_grid(0.05, crate::model::type_a_r_max() - 0.05, steps)?;
    let a_rows: Vec<[f64; 3]> = grid_a
        .par_iter()
        .map(|&r| -> Result<[f64; 3]> {
            let spec = TypeASpec::new(m_a, r)?;
            let s = build_type_a(&model_a, &spec)?;
            let v = proof_step(&s.point, &s.shape, ProofStep::TypeAFinal)?;
            Ok([
                (v["braces"] - 2.0).abs(),
                (v["defect_entry"] + 2.0 * spec.beta()).abs(),
                (v["defect_entry"] - v["reference"]).abs(),
            ])
        })
        .collect::<Result<_>>()?;
    let pa = with(
        with(with(base(m_a), "r_min", grid_a[0]), "r_max", grid_a[grid_a.len() - 1]),
        "steps",
        steps,
    );
    report.push(
        CheckResult::new("proof.type_a_final_braces_eq_2", pa.clone(), fmax(a_rows.iter().map(|r| r[0])), IDENTITY_TOL)
            .with_note("1 + sum_a <theta_a Y_j, Y_j><theta_a xi_2, xi_2> = 2 contradicts 0"),
    );
    report.push(CheckResult::new(
        "proof.type_a_final_entry_eq_minus_2beta",
        pa.clone(),
        fmax(a_rows.iter().map(|r| r[1])),
        ENTRY_TOL,
    ));
    report.push(CheckResult::new(
        "proof.type_a_final_entry_eq_principal_pair",
        pa,
        fmax(a_rows.iter().map(|r| r[2])),
        ENTRY_TOL,
    ));
    let r0 = PI / (8.0 * SQRT_2);
    let s = build_type_a(&model_a, &TypeASpec::new(m_a, r0)?)?;
    let v = proof_step(&s.point, &s.shape, ProofStep::TypeAFinal)?;
    report.push(CheckResult::new(
        "proof.type_a_final_entry_at_pi_over_8sqrt2",
        with(base(m_a), "r", r0),
        (v["defect_entry"] + 2.0 * (SQRT_2 + 2.0)).abs(),
        ENTRY_TOL,
    ));

    let model_b = AmbientModel::build(m_b)?;
    let grid_b = radius_grid(0.05, FRAC_PI_4 - 0.05, steps)?;
    let b_rows: Vec<(f64, f64)> = grid_b
        .par_iter()
        .map(|&r| -> Result<(f64, f64)> {
            let spec = TypeBSpec::new(m_b, r, seed)?;
            let s = build_type_b(&model_b, &spec)?;
            let v = proof_step(&s.point, &s.shape, ProofStep::TypeBAxi)?;
            Ok(((v["d"] - 4.0 * spec.alpha()).abs(), spec.alpha().abs()))
        })
        .collect::<Result<_>>()?;
    let pb = with(
        with(with(with(base(m_b), "r_min", grid_b[0]), "r_max", grid_b[grid_b.len() - 1]), "steps", steps),
        "seed",
        seed,
    );
    report.push(
        CheckResult::new("proof.type_b_axi_d_eq_4alpha", pb.clone(), fmax(b_rows.iter().map(|r| r.0)), ENTRY_TOL)
            .with_note("d = <(R(phi xi_1, xi)A)xi, phi xi_1>"),
    );
    let min_alpha = b_rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    report.push(
        CheckResult::new("proof.type_b_alpha_nonzero", pb, count(b_rows.iter().map(|r| !(r.1 > 0.0))), 0.0)
            .with_note(format!("min |alpha| on grid = {min_alpha:.6e}")),
    );
    let s = build_type_b(&model_b, &TypeBSpec::new(m_b, FRAC_PI_8, seed)?)?;
    let v = proof_step(&s.point, &s.shape, ProofStep::TypeBAxi)?;
    report.push(CheckResult::new(
        "proof.type_b_axi_at_pi_over_8",
        with(base(m_b), "r", FRAC_PI_8),
        (v["d"] + 8.0).abs().max((v["reference"] + 8.0).abs()),
        ENTRY_TOL,
    ));

    let ts: Vec<f64> = (1..steps + 1).map(|i| FRAC_PI_4 * i as f64 / (steps + 1) as f64).collect();
    let ob: Vec<f64> = ts
        .par_iter()
        .map(|&t| -> Result<f64> {
            let p = HypersurfacePoint::build(&model_a, &oblique_normal(&model_a, t))?;
            let v = proof_step(&p, &ShapeOperator::zero(&p), ProofStep::ObliqueTheta1)?;
            Ok(v["residual"].max(v["orthogonality"]))
        })
        .collect::<Result<_>>()?;
    report.push(CheckResult::new(
        "proof.oblique_theta1_eigenvectors",
        with(with(base(m_a), "t_min", ts[0]), "t_max", ts[ts.len() - 1]),
        fmax(ob),
        IDENTITY_TOL,
    ));
    Ok(report)
}

pub(super) fn minimizer(params: &SuiteParams) -> Result<Report> {
    let m = params.m;
    let trials = params.trials.unwrap_or(Suite::Minimizer.default_trials());
    let seed = params.seed;
    let mut report = new_report(Suite::Minimizer, params, &[("trials", trials.into())]);
    let model = AmbientModel::build(m)?;
    let mut rng = stream_rng(seed, 0);
    let p = HypersurfacePoint::build(&model, &random_unit_normal(&model, &mut rng))?;
    let n = p.tangent_dim();
    let unit = |s: Mat| {
        let f = s.frobenius();
        s.scale(1.0 / f)
    };
    let a = ShapeOperator::from_frame(&p, &unit(gaussian_symmetric(&mut rng, n, 1.0)))?;
    let grad = defect_gradient(&p, &a)?;
    let errs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut r = stream_rng(seed, 1 + t as u64);
            let d = ShapeOperator::from_frame(&p, &unit(gaussian_symmetric(&mut r, n, 1.0)))?;
            let shifted = |h: f64| ShapeOperator::new(&p, a.matrix().add(&d.matrix().scale(h)));
            let fd = (defect_objective(&p, &shifted(FD_STEP)?)? - defect_objective(&p, &shifted(-FD_STEP)?)?)
                / (2.0 * FD_STEP);
            let an = grad.inner(d.matrix());
            Ok((an - fd).abs() / fd.abs().max(an.abs()).max(f64::MIN_POSITIVE))
        })
        .collect::<Result<_>>()?;
    let pt = trial_params(m, seed, trials);
    report.push(
        CheckResult::new("minimizer.gradient_vs_finite_difference", with(pt.clone(), "h", FD_STEP), fmax(errs), FD_TOL)
            .with_note("relative error of <grad f, D> against central differences, unit-Frobenius A and D"),
    );
    let shape_res = grad
        .asymmetry()
        .max(max_abs(&grad.mul_vec(p.normal())));
    report.push(CheckResult::new("minimizer.gradient_symmetric_tangent", pt.clone(), shape_res, STRUCT_TOL));
    let g0 = defect_gradient(&p, &ShapeOperator::zero(&p))?.max_abs();
    let gp = defect_gradient(&p, &ShapeOperator::scaled_identity(&p, 0.7))?.max_abs();
    report.push(CheckResult::new("minimizer.gradient_zero_at_origin", base(m), g0, STRUCT_TOL));
    report.push(CheckResult::new("minimizer.gradient_zero_on_scalar_ray", with(base(m), "c", 0.7), gp, GAUGE_TOL));

    let opts = MinimizeOptions {
        seed,
        ..MinimizeOptions::default()
    };
    let a0 = ShapeOperator::from_frame(&p, &gaussian_symmetric(&mut stream_rng(seed, u64::MAX), n, opts.init_scale))?;
    let out = minimize_defect(&p, &a0, &opts)?;
    let again = minimize_defect(&p, &a0, &opts)?;
    report.push(
        CheckResult::new("minimizer.unconstrained_reaches_zero", with(pt.clone(), "iterations", out.trace.len()), out.value, MINIMIZER_TARGET)
            .with_note(
                "pointwise solutions of R.A = 0 exist (A = 0, A = cP); nonexistence needs the global classification, not a single point",
            ),
    );
    let increases = count(out.trace.windows(2).map(|w| w[1].restart == w[0].restart && w[1].value > w[0].value));
    report.push(CheckResult::new("minimizer.monotone_trace", pt.clone(), increases, 0.0));
    let same = if out.trace == again.trace && out.value == again.value { 0.0 } else { 1.0 };
    report.push(CheckResult::new("minimizer.deterministic", pt, same, 0.0));

    let fa = minimize_family(&model, Family::A, 0.1, 1.0, 50, seed)?;
    let bound_a = 2.0 * TypeASpec::new(m, 1.0)?.beta();
    report.push(
        CheckResult::new(
            "minimizer.family_a_min_above_2beta_at_1",
            with(with(with(base(m), "min_frobenius", fa.frobenius), "argmin_r", fa.r), "bound", bound_a),
            (bound_a - fa.frobenius).max(0.0),
            0.0,
        )
        .with_note("r in [0.1, 1.0]"),
    );
    let m_b = if m % 2 == 0 { m.max(4) } else { (m + 1).max(4) };
    let model_b = AmbientModel::build(m_b)?;
    let fb = minimize_family(&model_b, Family::B, 0.1, 0.68, 50, seed)?;
    let bound_b = (4.0 * TypeBSpec::new(m_b, 0.1, seed)?.alpha()).abs();
    report.push(
        CheckResult::new(
            "minimizer.family_b_min_above_4alpha_at_0_1",
            with(with(with(base(m_b), "min_frobenius", fb.frobenius), "argmin_r", fb.r), "bound", bound_b),
            (bound_b - fb.frobenius).max(0.0),
            0.0,
        )
        .with_note("r in [0.1, 0.68]"),
    );
    Ok(report)
}
