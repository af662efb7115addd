//! Primary-traffic occupancy models and the free time they leave to the
//! secondary user within one TDMA frame.
//!
//! Two models are supported:
//!
//! - a two-state (free/busy) Markov chain stepped once per slot, started from
//!   the sensing prior `(gamma, 1 - gamma)`. The subchannel is usable for the
//!   initial run of free slots and lost for the rest of the frame once the
//!   primary user reclaims it.
//! - a Poisson arrival process: the subchannel is free at the start of the data
//!   phase and lost at the first primary arrival `tau ~ Exp(lambda)`.

use crate::{check_probability, Error, Result};

/// Two-state chain parameters: the stay-free probability `P(SU -> SU)` and
/// the probability `gamma` that the subchannel is really free at sensing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovChainParams {
    p_stay: f64,
    gamma: f64,
}

impl MarkovChainParams {
    pub fn new(p_stay: f64, gamma: f64) -> Result<Self> {
        Ok(MarkovChainParams {
            p_stay: check_probability("p_stay", p_stay)?,
            gamma: check_probability("gamma", gamma)?,
        })
    }

    pub fn p_stay(&self) -> f64 {
        self.p_stay
    }

    pub fn p_leave(&self) -> f64 {
        1.0 - self.p_stay
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Row of the transition matrix leaving the free state: `(P(SU,SU), P(SU,PU))`.
    pub fn free_row(&self) -> [f64; 2] {
        [self.p_stay, self.p_leave()]
    }

    /// Initial distribution over `(free, busy)` at the sensing instant.
    pub fn initial_distribution(&self) -> [f64; 2] {
        [self.gamma, 1.0 - self.gamma]
    }
}

/// Validates raw chain parameters.
pub fn validate_markov(p_stay: f64, gamma: f64) -> Result<MarkovChainParams> {
    MarkovChainParams::new(p_stay, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    lambda: f64,
}

impl PoissonParams {
    /// `lambda` is the primary arrival rate in events per second. Zero means
    /// the primary user never arrives.
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 0.0 {
            Ok(PoissonParams { lambda })
        } else {
            Err(Error::invalid("lambda", lambda, "must be finite and >= 0"))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// TDMA frame timing: a sensing phase followed by `slots` equal data slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePlan {
    frame_s: f64,
    sensing_s: f64,
    slots: u32,
    slot_s: f64,
}

impl FramePlan {
    pub fn new(frame_s: f64, sensing_s: f64, slots: u32) -> Result<Self> {
        if !(frame_s.is_finite() && frame_s > 0.0) {
            return Err(Error::invalid("frame.frame_s", frame_s, "must be finite and > 0"));
        }
        if !(sensing_s.is_finite() && (0.0..frame_s).contains(&sensing_s)) {
            return Err(Error::invalid("frame.sensing_s", sensing_s, "must lie in [0, frame_s)"));
        }
        if slots == 0 {
            return Err(Error::invalid("frame.slots", slots, "must be >= 1"));
        }
        let slot_s = (frame_s - sensing_s) / f64::from(slots);
        Ok(FramePlan {
            frame_s,
            sensing_s,
            slots,
            slot_s,
        })
    }

    pub fn frame_s(&self) -> f64 {
        self.frame_s
    }

    pub fn sensing_s(&self) -> f64 {
        self.sensing_s
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }

    pub fn slot_s(&self) -> f64 {
        self.slot_s
    }

    /// Duration of `m` whole slots.
    pub fn slots_duration(&self, m: u32) -> f64 {
        f64::from(m) * self.slot_s
    }

    /// Longest usable transmission time, `slots * slot_s`.
    pub fn data_s(&self) -> f64 {
        self.slots_duration(self.slots)
    }
}

/// Distribution of the number of free data slots, indexed by `m = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityPmf {
    masses: Vec<f64>,
}

impl AvailabilityPmf {
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Closed-form distribution of the free-slot count for a Markov subchannel.
///
/// `m = 0` collects a busy sensing outcome and an immediate departure;
/// `0 < m < M` is a run of `m` free slots followed by a reclaim; `m = M` is a
/// subchannel that stays free for the whole data phase.
pub fn markov_availability_pmf(chain: &MarkovChainParams, frame: &FramePlan) -> AvailabilityPmf {
    let slots = frame.slots() as usize;
    let (stay, leave, gamma) = (chain.p_stay(), chain.p_leave(), chain.gamma());
    let mut masses = vec![0.0; slots + 1];
    masses[0] = gamma * leave + (1.0 - gamma);
    let mut run = 1.0;
    for mass in masses.iter_mut().take(slots).skip(1) {
        run *= stay;
        *mass = gamma * run * leave;
    }
    masses[slots] += gamma * stay.powi(slots as i32);
    AvailabilityPmf { masses }
}

/// `Pr(tau <= t)` for the first primary arrival `tau ~ Exp(lambda)`.
///
/// Callers clamp the free time at the data horizon, so the survival
/// `exp(-lambda * horizon)` becomes an atom at the horizon.
pub fn poisson_availability_cdf(params: &PoissonParams, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid("t", t, "must be >= 0"));
    }
    Ok(-(-params.lambda() * t).exp_m1())
}
