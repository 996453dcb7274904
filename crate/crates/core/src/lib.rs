//! Three-dimensional quantum polarization tomography.
//!
//! The crate reconstructs the polarization quasiprobability distribution
//! (QPD) of a light state from histograms of rotated Stokes observables:
//!
//! 1. [`stokes`]: Poincaré-sphere geometry, the HWP/QWP waveplate mapping,
//!    hemisphere grids and degrees of polarization.
//! 2. [`states`]: Gaussian Stokes-statistics models of macroscopic Bell
//!    states, pseudo-coherent light and electronic noise, with a seeded
//!    pulse simulator.
//! 3. [`histogram`]: histograms, Gaussian fits, electronic-noise
//!    deconvolution and tomograms.
//! 4. [`radon`]: the discrete hemisphere inverse Radon sum and its
//!    closed-form Gaussian counterpart.
//! 5. [`analysis`]: isosurfaces, volume moments and squeezing reports.
//! 6. [`io`] and [`pipeline`]: file formats and the
//!    simulate → fit → reconstruct → analyze driver behind the `tomo` binary.

pub mod analysis;
pub mod error;
pub mod histogram;
pub mod io;
mod mc_tables;
pub mod pipeline;
pub mod radon;
pub mod states;
pub mod stokes;

pub use error::{Result, TomoError};
