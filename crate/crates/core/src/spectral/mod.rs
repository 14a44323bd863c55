//! Eigenbases, Fourier series, the initial pressure series and the kernel identities.

pub mod basis;
pub mod kernel;
pub mod pressure;

pub use basis::{fourier_coefficients, BasisKind, EigenBasis, SpectralSeries};
pub use kernel::{KernelBounds, SmoothingKernel};
pub use pressure::InitialPressureSeries;
