//! Small-sphere limit of quasi-local energy with an anti-de Sitter reference.
//!
//! The library is generic over the scalar type through [`Real`]; the `f64`
//! aliases at the bottom are what the command line front-end uses.

#![allow(clippy::needless_range_loop)]

pub mod curvature;
pub mod embedding;
pub mod energy;
pub mod error;
pub mod expansion;
pub mod linalg;
pub mod observer;
pub mod scalar;
pub mod series;
pub mod sphere;
pub mod transport;

pub use error::{QleError, Result};
pub use scalar::Real;

pub type Grid = sphere::SphereGrid<f64>;
pub type Jet = curvature::CurvatureJet<f64>;
pub type Fields = curvature::WeylSphereFields<f64>;
