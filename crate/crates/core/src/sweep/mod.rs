//! One-dimensional eigenvalue sweeps with branch continuation, sweeps with
//! the rate balance broken, and two-dimensional discriminant phase diagrams.

mod branch;
pub mod contour;
mod phase;

pub use branch::{
    broken_ph_sweep, eigen_sweep, match_branches, min_gap, path_is_pseudo_hermitian, BranchSet, Coalescence, GapDip,
    SweepOptions, SweepPoint, DEFAULT_SWEEP_POINTS,
};
pub use phase::{phase_diagram, AxisSpec, Ep3Marker, PhaseCell, PhaseDiagram, PhaseMode, DEFAULT_PHASE_GRID};
