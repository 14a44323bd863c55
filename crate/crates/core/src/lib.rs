pub mod analysis;
pub mod asymptotics;
pub mod config;
pub mod error;
pub mod experiment;
pub mod model;
pub mod quadrature;
pub mod solver;
pub mod spectral;
