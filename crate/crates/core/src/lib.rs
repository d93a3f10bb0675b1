//! Numerical toolkit for contact domains with boundary whose Reeb flow is
//! traversing: Reeb dynamics and boundary tangency strata, causality maps,
//! volume invariants and their inequalities, boundary holography, and
//! Legendrian shadows.
//!
//! Coordinates are ordered (z, x_1, y_1, …, x_n, y_n) with n ∈ {1, 2}.

pub mod cli;
pub mod contact_fields;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod holography;
pub mod invariants;
pub mod legendrian;
pub mod nonsqueezing;
pub mod quadrature;
pub mod report;
pub mod sampled;
pub mod scene;
pub mod scene_file;
pub mod selftest;
pub mod strata;

pub use error::{Error, Result};
pub use geometry::{ContactForm, Domain, Point, ScalarField, Vector};
pub use scene::{ContactScene, FlowConfig};
