//! Curvature data at the vertex `p`, constraint validation, null decomposition
//! over the sphere of directions, and the Bel–Robinson tensor.

pub mod bel_robinson;
pub mod fields;
pub mod generator;
pub mod identities;
pub mod jet;
pub mod tensor;

pub use bel_robinson::{bel_robinson, bel_robinson_u, u_from_components};
pub use fields::{decompose, CurvatureFields, DerivedFields, NullComponents, WeylSphereFields};
pub use generator::{dust, parallel_family, pure_electric, Depth, JetGenerator};
pub use identities::identity_suite;
pub use jet::{einstein_ricci, validate, ConstraintRow, CurvatureJet, Mode, ValidationReport};
pub use tensor::{electric_part, weyl_from_electric_magnetic, Tensor4, M4, V4};
