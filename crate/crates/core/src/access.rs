//! Opportunistic TDMA access: collision probability, end-to-end success and
//! spectral efficiency.

use rayon::prelude::*;

use crate::{check_probability, Error, Result};

/// Each secondary user transmits in its own slot with probability `q` and in
/// each of the other `slots - 1` slots with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessParams {
    p: f64,
    q: f64,
    slots: u32,
    degree: u32,
    links: u32,
}

impl AccessParams {
    /// `degree` is the receiver's neighbor count and `links` the number of
    /// disjoint secondary user links. Both must be at least 1.
    pub fn new(p: f64, q: f64, slots: u32, degree: u32, links: u32) -> Result<Self> {
        check_probability("access.p", p)?;
        check_probability("access.q", q)?;
        if slots == 0 {
            return Err(Error::invalid("access.slots", slots, "must be >= 1"));
        }
        if degree == 0 {
            return Err(Error::invalid("access.degree", degree, "must be >= 1"));
        }
        if links == 0 {
            return Err(Error::invalid("access.links", links, "must be >= 1"));
        }
        Ok(AccessParams {
            p,
            q,
            slots,
            degree,
            links,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn links(&self) -> u32 {
        self.links
    }

    /// Same parameters with a different foreign-slot probability.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(p, self.q, self.slots, self.degree, self.links)
    }
}

/// Collision probability over `N_sul` links:
/// `(1 - h)^N_sul` with
/// `h = [q(1-p) + (M-1) p (2-p-q)] / M * (1-p)^(Deg_v - 1)`.
pub fn collision_probability(a: &AccessParams) -> f64 {
    let (p, q, m) = (a.p, a.q, f64::from(a.slots));
    let h = (q * (1.0 - p) + (m - 1.0) * p * (2.0 - p - q)) / m * (1.0 - p).powi(a.degree as i32 - 1);
    (1.0 - h).powi(a.links as i32)
}

/// `P_success * (1 - P_collision)`.
pub fn end_to_end_success(p_success: f64, p_collision: f64) -> f64 {
    p_success * (1.0 - p_collision)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyInputs {
    dep: f64,
    gop_packets: u64,
    packet_bits: u32,
    subchannels: usize,
    bandwidth_hz: f64,
    frame_s: f64,
}

impl EfficiencyInputs {
    pub fn new(
        dep: f64,
        gop_packets: u64,
        packet_bits: u32,
        subchannels: usize,
        bandwidth_hz: f64,
        frame_s: f64,
    ) -> Result<Self> {
        check_probability("coding.dep_target", dep)?;
        if gop_packets == 0 {
            return Err(Error::invalid("coding.k", gop_packets, "must be >= 1"));
        }
        if packet_bits == 0 {
            return Err(Error::invalid("link.packet_bits", packet_bits, "must be >= 1"));
        }
        if subchannels == 0 {
            return Err(Error::invalid("subchannels", subchannels, "must be >= 1"));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::invalid("link.bandwidth_hz", bandwidth_hz, "must be finite and > 0"));
        }
        if !(frame_s.is_finite() && frame_s > 0.0) {
            return Err(Error::invalid("frame.frame_s", frame_s, "must be finite and > 0"));
        }
        Ok(EfficiencyInputs {
            dep,
            gop_packets,
            packet_bits,
            subchannels,
            bandwidth_hz,
            frame_s,
        })
    }

    /// Efficiency with every probability factor at 1: `K L / (S W T)`.
    pub fn ceiling(&self) -> f64 {
        self.gop_packets as f64 * f64::from(self.packet_bits)
            / (self.subchannels as f64 * self.bandwidth_hz * self.frame_s)
    }
}

/// Spectral efficiency in bit/s/Hz:
/// `(1 - DEP)(1 - P_collision) P_success K L / (S W T)`.
pub fn spectral_efficiency(e: &EfficiencyInputs, p_success: f64, p_collision: f64) -> f64 {
    (1.0 - e.dep) * (1.0 - p_collision) * p_success * e.ceiling()
}

/// Points `0, step, 2 step, ...` up to and including 1.
pub fn p_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::invalid("grid_step", step, "must lie in (0, 0.5]"));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    if *grid.last().unwrap() < 1.0 - 1e-12 {
        grid.push(1.0);
    } else {
        *grid.last_mut().unwrap() = 1.0;
    }
    Ok(grid)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Grid search for the foreign-slot probability maximizing `1 - P_collision`.
///
/// The other efficiency factors do not depend on `p`, so the same `p`
/// maximizes spectral efficiency. Returns `(p_star, 1 - P_collision(p_star))`,
/// preferring the smallest `p` on ties.
pub fn optimize_p(a: &AccessParams, grid_step: f64) -> Result<(f64, f64)> {
    let grid = p_grid(grid_step)?;
    let values = grid
        .par_iter()
        .map(|&p| a.with_p(p).map(|ap| 1.0 - collision_probability(&ap)))
        .collect::<Result<Vec<f64>>>()?;
    let best = argmax(&values).expect("grid is never empty");
    Ok((grid[best], values[best]))
}
