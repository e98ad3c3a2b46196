//! Numerical laboratory for flows of holomorphic-type vector fields, interval
//! domains along their orbits, quasiholomorphicity obstructions, hermitian
//! boundary singularities and analytic continuation of univariate germs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod continuation;
pub mod domains;
pub mod fields;
pub mod form;
pub mod linearfields;
pub mod quasihol;
pub mod registry;
pub mod singularities;
pub mod types;

pub use calculus::{DiffConfig, ScalarField, Scheme};
pub use continuation::{Germ, PathSpec};
pub use domains::{DomainSpec, OrbitIntersectionReport, Verdict};
pub use fields::{FlowConfig, Trajectory, TransportMap, VectorFieldSpec};
pub use form::QuadraticForm;
pub use linearfields::LinearFieldAnalysis;
pub use num_complex::Complex64;
pub use types::ComplexVec;
