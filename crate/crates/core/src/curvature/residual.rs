//! Closed-form residual expressions of the semi-parallel condition, each paired
//! with the curvature contraction it is expanded from.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{gauss_curvature, CurvatureOperator, ShapeOperator};
use crate::error::{Error, Result};
use crate::hyperpoint::HypersurfacePoint;
use crate::linalg::{dot, norm, sub, Mat};

/// Maximum `|AY − λY|` accepted for principal vectors.
pub const PRINCIPAL_TOL: f64 = 1e-8;
/// Maximum normal component and orthonormality defect accepted for vector arguments.
pub const ARG_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ResidualId {
    E130,
    E120,
    E140,
    E160,
    E180,
    E200,
    E700,
    ECURV,
}

impl ResidualId {
    pub const ALL: [ResidualId; 8] = [
        ResidualId::E130,
        ResidualId::E120,
        ResidualId::E140,
        ResidualId::E160,
        ResidualId::E180,
        ResidualId::E200,
        ResidualId::E700,
        ResidualId::ECURV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidualId::E130 => "E130",
            ResidualId::E120 => "E120",
            ResidualId::E140 => "E140",
            ResidualId::E160 => "E160",
            ResidualId::E180 => "E180",
            ResidualId::E200 => "E200",
            ResidualId::E700 => "E700",
            ResidualId::ECURV => "ECURV",
        }
    }
}

impl fmt::Display for ResidualId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResidualId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ResidualId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown residual id {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResidualArgs {
    Vectors { y: Vec<f64>, z: Vec<f64> },
    /// `b` is zero-based (`ξ_{b+1}`).
    Indexed { b: usize, y: Vec<f64>, z: Vec<f64> },
    Principal {
        y_k: Vec<f64>,
        lambda_k: f64,
        y_j: Vec<f64>,
        lambda_j: f64,
    },
}

/// Value of the expanded expression and of the defining contraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualPair {
    pub expanded: f64,
    pub direct: f64,
}

impl ResidualPair {
    /// `|expanded − direct| / (1 + |direct|)`
    pub fn relative_gap(&self) -> f64 {
        (self.expanded - self.direct).abs() / (1.0 + self.direct.abs())
    }
}

struct Ctx<'a> {
    p: &'a HypersurfacePoint,
    a: &'a Mat,
    r: CurvatureOperator,
}

impl Ctx<'_> {
    fn ip(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, y)
    }

    fn am(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_vec(x)
    }

    fn phi_xi(&self, a: usize) -> Vec<f64> {
        self.p.phi().mul_vec(&self.p.xi_a()[a])
    }

    /// `⟨(R(X,Y)A)Z, W⟩`
    fn ra(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        self.r.derivation_form(self.a, x, y, z, w)
    }

    fn d130(&self, y: &[f64], z: &[f64]) -> f64 {
        let xi = self.p.xi();
        self.ra(xi, y, z, xi)
    }

    fn d140(&self, y: &[f64], z: &[f64]) -> f64 {
        self.d130(y, z) - self.d130(z, y)
    }

    fn d120(&self, y: &[f64], z: &[f64]) -> f64 {
        let frame = self.p.frame();
        (0..frame.cols())
            .map(|j| {
                let e = frame.column(j);
                self.ra(&e, y, z, &e) - self.ra(&e, z, y, &e)
            })
            .sum()
    }

    fn d160(&self, y: &[f64], z: &[f64]) -> f64 {
        let xi = self.p.xi();
        self.ra(z, y, xi, xi)
    }

    fn d700(&self, b: usize, y: &[f64], z: &[f64]) -> f64 {
        let xb = &self.p.xi_a()[b];
        self.ra(z, y, xb, xb)
    }

    fn e130(&self, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let xi = p.xi();
        let ax = self.am(xi);
        let a2x = self.am(&ax);
        let al = self.ip(xi, &ax);
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = al * ip(&self.am(y), &self.am(z)) + (1.0 - ip(&ax, &ax)) * ip(y, &self.am(z))
            - al * ip(y, z)
            - ip(&a2x, z) * ip(&ax, y)
            + ip(&a2x, y) * ip(&ax, z)
            - ip(&ax, z) * ip(xi, y)
            + ip(&ax, y) * ip(xi, z);
        for a in 0..3 {
            let px = self.phi_xi(a);
            let fa = &p.phi_a()[a];
            let th = &p.theta()[a];
            let xa = &p.xi_a()[a];
            s += 3.0 * ip(&self.am(&px), z) * ip(&px, y)
                - ip(&fa.mul_vec(y), z) * ip(&ax, &px)
                - ip(&fa.mul_vec(&ax), y) * ip(&px, z)
                - 2.0 * ip(&fa.mul_vec(&ax), z) * ip(&px, y)
                - p.u()[a] * ip(&self.am(&th.mul_vec(y)), z)
                - ip(&self.am(xa), z) * ip(xa, y)
                + ip(&th.mul_vec(y), z) * ip(&self.am(xa), xi)
                - ip(&th.mul_vec(&ax), y) * ip(xa, z);
        }
        s
    }

    fn e140(&self, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let xi = p.xi();
        let ax = self.am(xi);
        let a2x = self.am(&ax);
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = -2.0 * ip(&a2x, z) * ip(&ax, y) + 2.0 * ip(&a2x, y) * ip(&ax, z)
            - 2.0 * ip(&ax, z) * ip(xi, y)
            + 2.0 * ip(&ax, y) * ip(xi, z);
        for a in 0..3 {
            let px = self.phi_xi(a);
            let apx = self.am(&px);
            let fa = &p.phi_a()[a];
            let th = &p.theta()[a];
            let xa = &p.xi_a()[a];
            let axa = self.am(xa);
            s += 3.0 * ip(&apx, z) * ip(&px, y) - 3.0 * ip(&apx, y) * ip(&px, z)
                - 2.0 * ip(&fa.mul_vec(y), z) * ip(&ax, &px)
                - ip(&fa.mul_vec(&ax), z) * ip(&px, y)
                + ip(&fa.mul_vec(&ax), y) * ip(&px, z)
                - ip(&axa, z) * ip(xa, y)
                + ip(&axa, y) * ip(xa, z)
                + ip(&th.mul_vec(&ax), z) * ip(xa, y)
                - ip(&th.mul_vec(&ax), y) * ip(xa, z)
                - p.u()[a] * self.commutator_form(th, y, z);
        }
        s
    }

    /// `⟨Aθ_aY − θ_aAY, Z⟩`
    fn commutator_form(&self, th: &Mat, y: &[f64], z: &[f64]) -> f64 {
        let v = sub(&self.am(&th.mul_vec(y)), &th.mul_vec(&self.am(y)));
        self.ip(&v, z)
    }

    fn e120(&self, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let xi = p.xi();
        let ax = self.am(xi);
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = -3.0 * ip(&ax, z) * ip(xi, y) + 3.0 * ip(&ax, y) * ip(xi, z);
        for a in 0..3 {
            let px = self.phi_xi(a);
            let apx = self.am(&px);
            let xa = &p.xi_a()[a];
            let axa = self.am(xa);
            s += -3.0 * ip(&axa, z) * ip(xa, y) + 3.0 * ip(&axa, y) * ip(xa, z)
                + ip(&apx, z) * ip(&px, y)
                - ip(&apx, y) * ip(&px, z)
                + p.u()[a] * self.commutator_form(&p.theta()[a], y, z);
        }
        s
    }

    fn e160(&self, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let xi = p.xi();
        let ax = self.am(xi);
        let a2x = self.am(&ax);
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = -ip(&a2x, z) * ip(&ax, y) + ip(&a2x, y) * ip(&ax, z) - ip(&ax, z) * ip(xi, y)
            + ip(&ax, y) * ip(xi, z);
        for a in 0..3 {
            let px = self.phi_xi(a);
            let fa = &p.phi_a()[a];
            let th = &p.theta()[a];
            let xa = &p.xi_a()[a];
            s += -ip(&fa.mul_vec(&ax), z) * ip(&px, y) + ip(&fa.mul_vec(&ax), y) * ip(&px, z)
                - 2.0 * ip(&fa.mul_vec(y), z) * ip(&ax, &px)
                + ip(&th.mul_vec(&ax), z) * ip(xa, y)
                - ip(&th.mul_vec(&ax), y) * ip(xa, z);
        }
        s
    }

    fn e200(&self, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let ax = self.am(p.xi());
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = 0.0;
        for a in 0..3 {
            let px = self.phi_xi(a);
            let apx = self.am(&px);
            let fa = &p.phi_a()[a];
            let th = &p.theta()[a];
            let xa = &p.xi_a()[a];
            let axa = self.am(xa);
            s += 3.0 * ip(&apx, z) * ip(&px, y) - 3.0 * ip(&apx, y) * ip(&px, z)
                + 2.0 * ip(&fa.mul_vec(y), z) * ip(&ax, &px)
                + ip(&fa.mul_vec(&ax), z) * ip(&px, y)
                - ip(&fa.mul_vec(&ax), y) * ip(&px, z)
                - ip(&axa, z) * ip(xa, y)
                + ip(&axa, y) * ip(xa, z)
                - ip(&th.mul_vec(&ax), z) * ip(xa, y)
                + ip(&th.mul_vec(&ax), y) * ip(xa, z)
                - p.u()[a] * self.commutator_form(th, y, z);
        }
        s
    }

    fn e180(&self, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let xi = p.xi();
        let ax = self.am(xi);
        let a2x = self.am(&ax);
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = -ip(&a2x, z) * ip(&ax, y) + ip(&a2x, y) * ip(&ax, z)
            - 4.0 * ip(&ax, z) * ip(xi, y)
            + 4.0 * ip(&ax, y) * ip(xi, z);
        for a in 0..3 {
            let px = self.phi_xi(a);
            let apx = self.am(&px);
            let xa = &p.xi_a()[a];
            let axa = self.am(xa);
            s += 4.0 * ip(&apx, z) * ip(&px, y) - 4.0 * ip(&apx, y) * ip(&px, z)
                - 4.0 * ip(&axa, z) * ip(xa, y)
                + 4.0 * ip(&axa, y) * ip(xa, z);
        }
        s
    }

    fn e700(&self, b: usize, y: &[f64], z: &[f64]) -> f64 {
        let p = self.p;
        let xb = &p.xi_a()[b];
        let axb = self.am(xb);
        let a2 = self.am(&axb);
        let phi = p.phi();
        let ip = |x: &[f64], y: &[f64]| self.ip(x, y);
        let mut s = -ip(&a2, z) * ip(&axb, y) + ip(&a2, y) * ip(&axb, z) - ip(&axb, z) * ip(xb, y)
            + ip(&axb, y) * ip(xb, z)
            + ip(&phi.mul_vec(&axb), y) * ip(&phi.mul_vec(xb), z)
            - ip(&phi.mul_vec(&axb), z) * ip(&phi.mul_vec(xb), y)
            + 2.0 * ip(&phi.mul_vec(z), y) * ip(&axb, &phi.mul_vec(xb));
        for a in 0..3 {
            let fa = &p.phi_a()[a];
            let th = &p.theta()[a];
            s += ip(&fa.mul_vec(&axb), y) * ip(&fa.mul_vec(xb), z)
                - ip(&fa.mul_vec(&axb), z) * ip(&fa.mul_vec(xb), y)
                + 2.0 * ip(&fa.mul_vec(z), y) * ip(&axb, &fa.mul_vec(xb))
                + ip(&th.mul_vec(&axb), y) * ip(&th.mul_vec(xb), z)
                - ip(&th.mul_vec(&axb), z) * ip(&th.mul_vec(xb), y);
        }
        s
    }
}

/// The bracketed factor of the principal-pair expression:
/// `λ_jλ_k + 1 + 3⟨Y_k,φY_j⟩² + Σ_a {3⟨Y_k,φ_aY_j⟩² + ⟨θ_aY_j,Y_j⟩⟨θ_aY_k,Y_k⟩ − ⟨θ_aY_k,Y_j⟩²}`
pub fn principal_braces(p: &HypersurfacePoint, y_k: &[f64], lambda_k: f64, y_j: &[f64], lambda_j: f64) -> f64 {
    let mut s = lambda_j * lambda_k + 1.0 + 3.0 * dot(y_k, &p.phi().mul_vec(y_j)).powi(2);
    for a in 0..3 {
        let th = &p.theta()[a];
        s += 3.0 * dot(y_k, &p.phi_a()[a].mul_vec(y_j)).powi(2) + th.form(y_j, y_j) * th.form(y_k, y_k)
            - th.form(y_k, y_j).powi(2);
    }
    s
}

fn check_tangent(p: &HypersurfacePoint, name: &str, v: &[f64]) -> Result<()> {
    if v.len() != p.dim() {
        return Err(Error::param(format!(
            "argument {name} has dimension {}, expected {}",
            v.len(),
            p.dim()
        )));
    }
    let normal = dot(v, p.normal()).abs();
    if !(normal <= ARG_TOL) || !v.iter().all(|x| x.is_finite()) {
        return Err(Error::param(format!(
            "argument {name} is not tangent (normal component {normal:e})"
        )));
    }
    Ok(())
}

fn check_principal(a: &Mat, name: &str, v: &[f64], lambda: f64) -> Result<()> {
    let r = norm(&sub(&a.mul_vec(v), &crate::linalg::scaled(lambda, v)));
    if !(r <= PRINCIPAL_TOL) {
        return Err(Error::param(format!(
            "{name} is not a principal vector for eigenvalue {lambda} (residual {r:e})"
        )));
    }
    Ok(())
}

/// Evaluates residual `id` both from its expanded expression and from the
/// curvature contraction it comes from.
///
/// `E160` and `E700` contract with `⟨(R(Z,Y)A)ξ,ξ⟩` and `⟨(R(Z,Y)A)ξ_b,ξ_b⟩`;
/// `E200` and `E180` contract with `E140 − 2·E160` and `E140 + E120 − E160`.
pub fn residual_pair(
    point: &HypersurfacePoint,
    a: &ShapeOperator,
    id: ResidualId,
    args: &ResidualArgs,
) -> Result<ResidualPair> {
    let ctx = Ctx {
        p: point,
        a: a.matrix(),
        r: gauss_curvature(point, a)?,
    };
    let mismatch = || Error::param(format!("arguments do not match the signature of {id}"));
    let (expanded, direct) = match (id, args) {
        (ResidualId::E700, ResidualArgs::Indexed { b, y, z }) => {
            if *b > 2 {
                return Err(Error::param(format!("index b must be 0, 1 or 2, got {b}")));
            }
            check_tangent(point, "Y", y)?;
            check_tangent(point, "Z", z)?;
            (ctx.e700(*b, y, z), ctx.d700(*b, y, z))
        }
        (
            ResidualId::ECURV,
            ResidualArgs::Principal {
                y_k,
                lambda_k,
                y_j,
                lambda_j,
            },
        ) => {
            check_tangent(point, "Y_k", y_k)?;
            check_tangent(point, "Y_j", y_j)?;
            let defect = (dot(y_k, y_k) - 1.0)
                .abs()
                .max((dot(y_j, y_j) - 1.0).abs())
                .max(dot(y_k, y_j).abs());
            if !(defect <= ARG_TOL) {
                return Err(Error::param(format!(
                    "principal vectors are not orthonormal (defect {defect:e})"
                )));
            }
            check_principal(ctx.a, "Y_k", y_k, *lambda_k)?;
            check_principal(ctx.a, "Y_j", y_j, *lambda_j)?;
            let braces = principal_braces(point, y_k, *lambda_k, y_j, *lambda_j);
            ((lambda_j - lambda_k) * braces, ctx.ra(y_k, y_j, y_j, y_k))
        }
        (ResidualId::E700 | ResidualId::ECURV, _) => return Err(mismatch()),
        (_, ResidualArgs::Vectors { y, z }) => {
            check_tangent(point, "Y", y)?;
            check_tangent(point, "Z", z)?;
            match id {
                ResidualId::E130 => (ctx.e130(y, z), ctx.d130(y, z)),
                ResidualId::E140 => (ctx.e140(y, z), ctx.d140(y, z)),
                ResidualId::E120 => (ctx.e120(y, z), ctx.d120(y, z)),
                ResidualId::E160 => (ctx.e160(y, z), ctx.d160(y, z)),
                ResidualId::E200 => (ctx.e200(y, z), ctx.d140(y, z) - 2.0 * ctx.d160(y, z)),
                ResidualId::E180 => (
                    ctx.e180(y, z),
                    ctx.d140(y, z) + ctx.d120(y, z) - ctx.d160(y, z),
                ),
                ResidualId::E700 | ResidualId::ECURV => unreachable!(),
            }
        }
        _ => return Err(mismatch()),
    };
    Ok(ResidualPair { expanded, direct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientModel;
    use crate::hyperpoint::oblique_normal;

    fn setup() -> (HypersurfacePoint, ShapeOperator, Vec<f64>, Vec<f64>) {
        let model = AmbientModel::build(3).unwrap();
        let p = HypersurfacePoint::build(&model, &oblique_normal(&model, 0.4)).unwrap();
        let s = Mat::from_fn(11, 11, |i, j| ((3 * i + 5 * j + i * j) as f64 * 0.61).cos());
        let a = ShapeOperator::from_frame(&p, &s.symmetric_part()).unwrap();
        let y = p.tangent_part(&(0..12).map(|i| (i as f64 * 1.3).sin()).collect::<Vec<_>>());
        let z = p.tangent_part(&(0..12).map(|i| (i as f64 * 0.4 + 1.0).cos()).collect::<Vec<_>>());
        (p, a, y, z)
    }

    #[test]
    fn faithful_expansions_match_contraction() {
        let (p, a, y, z) = setup();
        for id in [ResidualId::E130, ResidualId::E140, ResidualId::E120] {
            let r = residual_pair(&p, &a, id, &ResidualArgs::Vectors { y: y.clone(), z: z.clone() }).unwrap();
            assert!(r.relative_gap() < 1e-9, "{id}: {r:?}");
        }
    }

    #[test]
    fn half_normalized_expansions() {
        let (p, a, y, z) = setup();
        let args = ResidualArgs::Vectors { y: y.clone(), z: z.clone() };
        let e160 = residual_pair(&p, &a, ResidualId::E160, &args).unwrap();
        assert!((2.0 * e160.expanded - e160.direct).abs() < 1e-9 * (1.0 + e160.direct.abs()));
        for b in 0..3 {
            let r = residual_pair(&p, &a, ResidualId::E700, &ResidualArgs::Indexed { b, y: y.clone(), z: z.clone() })
                .unwrap();
            assert!((2.0 * r.expanded - r.direct).abs() < 1e-9 * (1.0 + r.direct.abs()));
        }
    }

    #[test]
    fn zero_operator_gives_zero() {
        let (p, _, y, z) = setup();
        let a = ShapeOperator::zero(&p);
        for id in ResidualId::ALL {
            let args = match id {
                ResidualId::E700 => ResidualArgs::Indexed { b: 1, y: y.clone(), z: z.clone() },
                ResidualId::ECURV => ResidualArgs::Principal {
                    y_k: p.frame().column(0),
                    lambda_k: 0.0,
                    y_j: p.frame().column(1),
                    lambda_j: 0.0,
                },
                _ => ResidualArgs::Vectors { y: y.clone(), z: z.clone() },
            };
            let r = residual_pair(&p, &a, id, &args).unwrap();
            assert_eq!((r.expanded, r.direct), (0.0, 0.0), "{id}");
        }
    }

    #[test]
    fn argument_validation() {
        let (p, a, y, z) = setup();
        let vectors = ResidualArgs::Vectors { y: y.clone(), z: z.clone() };
        assert!(residual_pair(&p, &a, ResidualId::E700, &vectors).is_err());
        assert!(residual_pair(&p, &a, ResidualId::ECURV, &vectors).is_err());
        let normal = ResidualArgs::Vectors { y: p.normal().to_vec(), z };
        assert!(residual_pair(&p, &a, ResidualId::E130, &normal).is_err());
        let not_principal = ResidualArgs::Principal {
            y_k: p.frame().column(0),
            lambda_k: 0.0,
            y_j: p.frame().column(1),
            lambda_j: 0.0,
        };
        assert!(residual_pair(&p, &a, ResidualId::ECURV, &not_principal).is_err());
        assert_eq!("e200".parse::<ResidualId>().unwrap(), ResidualId::E200);
        assert!("E999".parse::<ResidualId>().is_err());
    }
}
