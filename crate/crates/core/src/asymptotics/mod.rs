//! Explicit asymptotic construction: free-boundary law, limit profile,
//! corrector, wall layers and the composite approximation.

pub mod approximation;
pub mod corrector;
pub mod evolution;
pub mod layer;
pub mod profile;

pub use approximation::{AsymptoticApproximation, AsymptoticOptions, AsymptoticSnapshot};
pub use corrector::{solve_corrector, CorrectorField};
pub use evolution::{compute_h0, FreeBoundaryEvolution};
pub use layer::{boundary_layer, BoundaryLayerSolution, LayerSide};
pub use profile::{solve_limit_profile, LimitProfile};
