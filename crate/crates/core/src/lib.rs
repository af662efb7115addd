//! Analytical engine and Monte-Carlo oracle for secondary multimedia
//! transmission over TDMA cognitive-radio links.
//!
//! The pipeline runs bottom-up:
//!
//! - [`traffic`]: per-subchannel free-time laws under Markovian and
//!   Poissonian primary traffic.
//! - [`link`]: delivered-packet PMFs, their convolution across a
//!   secondary user link, and `Pr(N_T >= N)`.
//! - [`access`]: opportunistic-access collision probability, end-to-end
//!   success and spectral efficiency.
//! - [`montecarlo`]: seeded sampling of the same quantities.
//! - [`fountain`]: LT codec with the Robust Soliton degree distribution.
//! - [`scenario`], [`sweep`], [`output`]: experiment description, parameter
//!   sweeps and CSV emission used by the `crnsim` binary.

pub mod access;
pub mod error;
pub mod fountain;
pub mod link;
pub mod montecarlo;
pub mod output;
pub mod scenario;
pub mod sweep;
pub mod traffic;

pub use error::{Error, Result};

pub(crate) fn check_probability(field: &str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::invalid(field, value, "out of [0,1]"))
    }
}
