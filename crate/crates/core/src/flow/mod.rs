//! Reeb trajectories with boundary events, tangency words and the causality map.

pub mod ode;
pub mod trace;
pub mod trajectory;

pub use trace::{classify_start, integrate, next_boundary_hit, trace, HitEvent, Path, StartKind, Traced};
pub use trajectory::{
    boundary_grid, causality_map, format_word, inflow_grid, property_a_check, trajectory_through, BoundarySample,
    CausalityPair, PropertyAReport, Trajectory,
};
