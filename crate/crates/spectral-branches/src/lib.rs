//! Eigenvalue branches of Witten Laplacians and their virtually small package.
//!
//! [`track_branches`] follows the lowest eigenpairs of `Δ^q(t)` along a
//! parameter grid as analytic branches, [`classify`] separates the branches
//! that vanish identically, decay, or grow, and
//! [`assign_to_critical_points`] attaches each decaying branch to the
//! critical point it concentrates at.

pub mod classify;
pub mod eig;
pub mod error;
pub mod localize;
pub mod matching;
pub mod tracking;

pub use classify::{classify, ClassSummary, ClassifyOptions, DegreePackage, SpectralPackage};
pub use eig::{eig_sym, symmetry_residual, EigenPairs, EigenScalar};
pub use error::SpectralError;
pub use localize::{assign_to_critical_points, ball_rule, local_gram, LocalizeOptions, Site};
pub use matching::{clusters, match_resolved, match_step, resolve_window, MatchOptions, StepMatch};
pub use tracking::{track_branches, track_family, uniform_grid, EigenBranch, Label, Sample, TrackOptions};
