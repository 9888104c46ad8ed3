//! Charge distributions on box domains whose pairwise forces realize a
//! selective sign pattern: each "lock" attracts its matching "key" while
//! every other pairing among the four bodies repels.
//!
//! The crate discretizes an attractive radial interaction kernel on a
//! uniform grid, diagonalizes it, projects eigenfields onto the
//! electro-neutral subspace, and assembles lock/key quartets whose ten
//! pairwise interactions carry prescribed signs. Supporting analyses —
//! feasibility windows for the mixing weight, perturbation bounds, and a
//! domain-scaling study — are exposed alongside the construction itself.

pub mod construction;
mod eigensolver;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod operator;
pub mod rng;
pub mod scaling;
pub mod spectral;

pub use construction::{
    build_quartet, feasible_alpha, quartet_interactions, search_parameters,
    verify_complementarity, Complementarity, FeasibleWindow, InteractionReport, PairInteraction,
    Quartet, SearchHit, SearchOutcome, SearchSpace, PAIR_NAMES,
};
pub use error::{Error, Result};
pub use grid::{build_grid, distance, scale_domain, DomainGrid, Field, MAX_NODES};
pub use kernel::{Kernel, KernelFamily};
pub use operator::{
    apply_operator, assemble_operator, interaction_force, r_one, r_one_max, OperatorMatrix,
};
pub use rng::SpecLcg;
pub use scaling::{scaling_study, RowFailure, ScalingRow, ScalingStudy};
pub use spectral::{
    eigendecompose, eigendecompose_with_tolerance, f_matrix, is_neutral, project_neutral,
    schwartz_bounds, FMatrix, SchwartzBounds, SpectralDecomposition,
};
