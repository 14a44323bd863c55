//! Reference solver for the moving-boundary problem on the mapped rectangle.

pub mod laplace;
pub mod linear;
pub mod mapping;
pub mod separable;
pub mod stefan;
pub mod trajectory;

pub use laplace::{
    solve_flux_step, solve_laplace_step, solve_mapped, LinearSolverKind, MappedPressureGrid, MixedProblem, SolveReport,
    TopCondition, TopData,
};
pub use mapping::{transform_coefficients, ColumnGeometry, MappedCoefficients};
pub use stefan::{mass_balance, normal_speed, stefan_velocity};
pub use trajectory::{
    advance, angle_preservation_check, prescribed_trajectory, run, wall_slope, AngleReport, SolverConfig,
    TimeIntegrator, Trajectory, TrajectorySnapshot,
};
