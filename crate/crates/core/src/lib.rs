//! Pointwise numerics for real hypersurfaces in the complex two-plane Grassmannian
//! `G₂(ℂ^{m+2})`: ambient structure, induced tensors, Gauss curvature, the
//! semi-parallel defect `R·A`, and the model tubes of types A and B.

// range checks are written `!(x <= tol)` so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod curvature;
pub mod error;
pub mod hyperpoint;
pub mod linalg;
pub mod rng;
pub mod verify;
pub mod model;
