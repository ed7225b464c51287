//! Energies, dissipation potentials, neighborhood norms and trajectory
//! containers.
//!
//! A rate-independent system is the triple `(E, Psi, x0)`: a C^1 energy
//! `E(t, x) >= 0`, a convex, positively 1-homogeneous and non-degenerate
//! dissipation `Psi`, and an initial state that locally minimizes
//! `x -> E(0, x) + Psi(x - x0)`. The neighborhood norm `||.||` fixes both the
//! epsilon-ball of the local scheme and the viscous weight of jump costs.
//!
//! Pairing used throughout: the neighborhood norm `||.||` measures
//! displacements and its dual `||.||_*` measures covectors (gradients), so
//! an `l^p` neighborhood comes with `l^q` dual gaps.

pub mod catalog;
pub mod dissipation_spec;
pub mod energy;
pub mod norm;
pub mod trajectory;

pub use catalog::{
    by_name, example2_reference, make_double_well_2d, make_example2, random_double_well, DoubleWell,
    SeparablePolynomial, SexticBenchmark, CATALOG, EXAMPLE2_ENERGETIC_JUMP, EXAMPLE2_LOCAL_JUMP,
};
pub use dissipation_spec::{dual_gap_weighted_l1, Dissipation, DualKind};
pub use energy::{estimate_lambda, DomainBox, Energy, EnergyModel, LAMBDA_GRID};
pub use norm::NeighborhoodNorm;
pub use trajectory::{BVTrajectory, DiscreteTrajectory, JumpRecord, SchemeKind, TransitionPath};
