//! Delivered-packet distributions per subchannel and across a secondary user
//! link.
//!
//! A subchannel with loss `pi` and common capacity `R0` delivers packets of
//! `L` bits at rate `c = (1 - pi) * R0 / L` packets per second while it is
//! free, so `N_s = floor(c * T_s)`. The link total `N_T` is the sum over the
//! chosen subchannels and its PMF is the convolution of the per-subchannel
//! PMFs.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::traffic::{markov_availability_pmf, FramePlan, MarkovChainParams, PoissonParams};
use crate::{check_probability, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrafficModel {
    Markov(MarkovChainParams),
    Poisson(PoissonParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubchannelProfile {
    model: TrafficModel,
    loss: f64,
}

impl SubchannelProfile {
    pub fn new(model: TrafficModel, loss: f64) -> Result<Self> {
        Ok(SubchannelProfile {
            model,
            loss: check_probability("loss", loss)?,
        })
    }

    pub fn markov(p_stay: f64, gamma: f64, loss: f64) -> Result<Self> {
        Self::new(TrafficModel::Markov(MarkovChainParams::new(p_stay, gamma)?), loss)
    }

    pub fn poisson(lambda: f64, loss: f64) -> Result<Self> {
        Self::new(TrafficModel::Poisson(PoissonParams::new(lambda)?), loss)
    }

    pub fn model(&self) -> &TrafficModel {
        &self.model
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }
}

/// The subchannels making up one secondary user link plus the constants they
/// share.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    profiles: Vec<SubchannelProfile>,
    capacity_bps: f64,
    packet_bits: u32,
    bandwidth_hz: f64,
}

impl LinkSpec {
    pub fn new(
        profiles: Vec<SubchannelProfile>,
        capacity_bps: f64,
        packet_bits: u32,
        bandwidth_hz: f64,
    ) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::invalid("subchannels", 0, "must be >= 1"));
        }
        if !(capacity_bps.is_finite() && capacity_bps > 0.0) {
            return Err(Error::invalid("link.capacity_bps", capacity_bps, "must be finite and > 0"));
        }
        if packet_bits == 0 {
            return Err(Error::invalid("link.packet_bits", packet_bits, "must be >= 1"));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::invalid("link.bandwidth_hz", bandwidth_hz, "must be finite and > 0"));
        }
        Ok(LinkSpec {
            profiles,
            capacity_bps,
            packet_bits,
            bandwidth_hz,
        })
    }

    pub fn profiles(&self) -> &[SubchannelProfile] {
        &self.profiles
    }

    pub fn subchannels(&self) -> usize {
        self.profiles.len()
    }

    pub fn capacity_bps(&self) -> f64 {
        self.capacity_bps
    }

    pub fn packet_bits(&self) -> u32 {
        self.packet_bits
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Delivery rate `(1 - pi) * R0 / L` in packets per second.
    pub fn packet_rate(&self, profile: &SubchannelProfile) -> f64 {
        (1.0 - profile.loss()) * self.capacity_bps / f64::from(self.packet_bits)
    }
}

/// Whole packets delivered in `seconds` at `rate` packets per second.
///
/// Partial packets are dropped. Products that land within a relative 1e-9 of
/// an integer count as that integer, so slot-boundary rounding noise such as
/// `9949.999999999998` yields 9950.
pub fn packets_delivered(rate: f64, seconds: f64) -> u64 {
    let x = rate * seconds;
    (x + 1e-9 * x.abs().max(1.0)).floor() as u64
}

/// PMF over integer packet counts `0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketPmf {
    masses: Vec<f64>,
}

impl PacketPmf {
    /// Wraps raw masses. Fails on an empty vector or a negative or
    /// non-finite mass; normalization is the caller's responsibility.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::invalid("masses", "[]", "must not be empty"));
        }
        if let Some((k, &m)) = masses.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::invalid(format!("masses[{k}]"), m, "must be finite and >= 0"));
        }
        Ok(PacketPmf { masses })
    }

    pub fn point(k: usize) -> Self {
        let mut masses = vec![0.0; k + 1];
        masses[k] = 1.0;
        PacketPmf { masses }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn k_max(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.masses.iter().enumerate().map(|(k, m)| k as f64 * m).sum()
    }

    fn nonzero(&self) -> usize {
        self.masses.iter().filter(|&&m| m != 0.0).count()
    }
}

/// Maximum packets one subchannel can deliver in a frame.
pub fn packet_capacity(profile: &SubchannelProfile, frame: &FramePlan, link: &LinkSpec) -> u64 {
    packets_delivered(link.packet_rate(profile), frame.data_s())
}

/// Distribution of `N_s` for one subchannel.
///
/// For Poisson traffic the free time is `min(tau, D)` with `D` the data
/// horizon, so `Pr(N_s = k) = Pr(k/c <= tau < (k+1)/c)` below the top bin and
/// the top bin `floor(c * D)` takes the remaining survival mass.
pub fn packets_pmf(profile: &SubchannelProfile, frame: &FramePlan, link: &LinkSpec) -> PacketPmf {
    let rate = link.packet_rate(profile);
    let top = packets_delivered(rate, frame.data_s()) as usize;
    let mut masses = vec![0.0; top + 1];
    match profile.model() {
        TrafficModel::Markov(chain) => {
            let slots = markov_availability_pmf(chain, frame);
            for (m, &mass) in slots.masses().iter().enumerate() {
                let k = packets_delivered(rate, frame.slots_duration(m as u32)) as usize;
                masses[k] += mass;
            }
        }
        TrafficModel::Poisson(params) => {
            let lambda = params.lambda();
            if top == 0 || lambda == 0.0 {
                masses[top] = 1.0;
            } else {
                // survival at k/c is exp(-lambda k / c); each bin is the
                // difference of consecutive survivals
                let step = lambda / rate;
                let bin = -(-step).exp_m1();
                for (k, mass) in masses.iter_mut().take(top).enumerate() {
                    *mass = (-step * k as f64).exp() * bin;
                }
                masses[top] = (-step * top as f64).exp();
            }
        }
    }
    PacketPmf { masses }
}

/// Above this many multiply-adds the FFT path is used.
const DIRECT_WORK_LIMIT: usize = 4_000_000;

/// Distribution of the sum of two independent packet counts.
pub fn convolve(a: &PacketPmf, b: &PacketPmf) -> PacketPmf {
    let (sparse, dense) = if a.nonzero() <= b.nonzero() { (a, b) } else { (b, a) };
    let work = sparse.nonzero().saturating_mul(dense.masses.len());
    let masses = if work <= DIRECT_WORK_LIMIT {
        convolve_direct(&sparse.masses, &dense.masses)
    } else {
        convolve_fft(&a.masses, &b.masses)
    };
    PacketPmf { masses }
}

fn convolve_direct(sparse: &[f64], dense: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; sparse.len() + dense.len() - 1];
    for (i, &x) in sparse.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (acc, &y) in out[i..i + dense.len()].iter_mut().zip(dense) {
            *acc += x * y;
        }
    }
    out
}

fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let lift = |xs: &[f64]| {
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for (slot, &x) in buf.iter_mut().zip(xs) {
            slot.re = x;
        }
        buf
    };
    let mut fa = lift(a);
    let mut fb = lift(b);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inverse.process(&mut fa);

    let scale = 1.0 / n as f64;
    // round-off can leave values of order -1e-17 where the exact mass is 0
    fa[..len].iter().map(|z| (z.re * scale).max(0.0)).collect()
}

/// Per-subchannel PMFs in profile order.
pub fn subchannel_pmfs(link: &LinkSpec, frame: &FramePlan) -> Vec<PacketPmf> {
    link.profiles()
        .par_iter()
        .map(|p| packets_pmf(p, frame, link))
        .collect()
}

/// PMFs of `N_T` for the links made of the first `1..=S` subchannels.
pub fn prefix_link_pmfs(link: &LinkSpec, frame: &FramePlan) -> Vec<PacketPmf> {
    let mut out: Vec<PacketPmf> = Vec::with_capacity(link.subchannels());
    for pmf in subchannel_pmfs(link, frame) {
        let next = match out.last() {
            Some(acc) => convolve(acc, &pmf),
            None => pmf,
        };
        out.push(next);
    }
    out
}

/// PMF of `N_T` over the whole link: a left fold of [`convolve`] in profile
/// order.
pub fn link_pmf(link: &LinkSpec, frame: &FramePlan) -> PacketPmf {
    subchannel_pmfs(link, frame)
        .into_iter()
        .reduce(|acc, pmf| convolve(&acc, &pmf))
        .expect("LinkSpec holds at least one subchannel")
}

/// `Pr(N_T >= needed)`.
pub fn success_probability(pmf: &PacketPmf, needed: u64) -> f64 {
    let start = usize::try_from(needed).unwrap_or(usize::MAX);
    let tail: f64 = pmf.masses.get(start..).map_or(0.0, |t| t.iter().sum());
    tail.clamp(0.0, 1.0)
}

/// Encoded packets needed to decode a block of `k` source packets: `ceil(1.05 k)`.
pub fn required_packets(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::invalid("k", k, "must be >= 1"));
    }
    Ok((105 * k).div_ceil(100))
}
