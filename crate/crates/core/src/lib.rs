//! Rotation of style vectors inside a learnable 2-D plane.
//!
//! The crate covers the rotation algebra ([`plane`]), its derivatives
//! ([`grad`]), fitting the plane to domain-labeled vectors ([`learn`]),
//! synthetic circular-manifold fixtures with closed-form oracles
//! ([`manifold`]), rotation versus linear interpolation paths ([`interp`]),
//! and cosine-similarity patch matching on images ([`patch`]).

pub mod cli;
pub mod data;
pub mod error;
pub mod grad;
pub mod interp;
pub mod learn;
pub mod linalg;
pub mod manifold;
pub mod patch;
pub mod plane;

pub use data::{DomainChart, LabeledStyleDataset};
pub use error::{Error, Result};
pub use grad::{Pair, PlaneGradient};
pub use plane::{gram_schmidt, RotationPlane, StyleVector};
