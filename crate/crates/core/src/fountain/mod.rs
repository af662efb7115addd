//! LT fountain code with the Robust Soliton degree distribution.

mod codec;
pub mod fixture;
mod soliton;

pub use codec::{lt_decode, lt_encode, measure_dep, packets_for_overhead, DecodeOutcome, EncodedPacket, LtCode};
pub use soliton::{ideal_soliton, robust_soliton, DegreeSampler, SolitonParams};
