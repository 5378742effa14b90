//! Helically symmetric transonic Euler flows in a concentric annulus.
//!
//! The crate builds the cylindrically symmetric background flow, tabulates
//! its linearization coefficients, and constructs a perturbed helical flow by
//! iterating a map that couples characteristic transport of the Bernoulli
//! function, entropy and helical swirl with a first-order elliptic system for
//! the radial and axial velocity perturbations.

pub mod assembly;
pub mod background;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod fields;
pub mod io;
pub mod linalg;
pub mod solver;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
