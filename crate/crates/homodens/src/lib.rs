//! Estimation of the invariant density of a homogenized Langevin diffusion
//! from a trajectory of the full multiscale system.
//!
//! The pipeline: simulate (or read) a trajectory of the multiscale SDE
//! `dX = -V'(X) dt - (1/eps) p'(X/eps) dt + sqrt(2 sigma^2) dW`, accumulate
//! ergodic time averages of Hermite functions along it, and assemble the
//! truncated spectral density estimate. A frequency-domain scan of the
//! estimate recovers the scale-separation parameter `eps` when it is unknown.

pub mod basis;
pub mod cli;
pub mod estimator;
pub mod model;
pub mod numerics;
pub mod oracles;
pub mod sim;
pub mod spectral;
