//! Config-driven experiment runner for the lattice fractional-diffusion
//! solver. See the `latfrac` binary for the command-line entry points.

pub mod config;
pub mod experiments;
pub mod output;
