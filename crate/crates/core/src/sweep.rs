//! Parameter sweeps over the link size `S` and the foreign-slot probability
//! `p`, each paired with a Monte-Carlo estimate of `P_success`.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::access::{argmax, collision_probability, spectral_efficiency, EfficiencyInputs};
use crate::link::{prefix_link_pmfs, required_packets, success_probability};
use crate::montecarlo::{estimate_success, McEstimate, TrialConfig};
use crate::scenario::{ModelKind, Scenario};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// `S` for subchannel sweeps, `p` for access sweeps.
    pub sweep_var: f64,
    pub model: ModelKind,
    pub p_success: f64,
    pub p_collision: f64,
    pub se: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
}

impl SweepRow {
    fn new(sweep_var: f64, model: ModelKind, p_success: f64, p_collision: f64, se: f64, mc: &McEstimate) -> Self {
        SweepRow {
            sweep_var,
            model,
            p_success,
            p_collision,
            se,
            mc_mean: mc.mean,
            mc_stderr: mc.std_error,
        }
    }

    pub fn mc_estimate(&self, trials: u64) -> McEstimate {
        McEstimate {
            mean: self.mc_mean,
            std_error: self.mc_stderr,
            trials,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_for(&self, model: ModelKind) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.model == model)
    }

    /// Row with the highest spectral efficiency for `model`; ties go to the
    /// smaller sweep value.
    pub fn best(&self, model: ModelKind) -> Option<&SweepRow> {
        let rows: Vec<&SweepRow> = self.rows_for(model).collect();
        let se: Vec<f64> = rows.iter().map(|r| r.se).collect();
        argmax(&se).map(|i| rows[i])
    }
}

fn efficiency(scenario: &Scenario, s: usize) -> Result<EfficiencyInputs> {
    let c = scenario.coding();
    let l = scenario.link_constants();
    EfficiencyInputs::new(c.dep_target, c.k, l.packet_bits, s, l.bandwidth_hz, scenario.frame().frame_s())
}

/// Analytic `P_success` for links of size `1..=max_s`, indexed by `S - 1`.
pub fn success_by_size(scenario: &Scenario, model: ModelKind, max_s: usize) -> Result<Vec<f64>> {
    let needed = required_packets(scenario.coding().k)?;
    let link = scenario.link(model, max_s)?;
    Ok(prefix_link_pmfs(&link, scenario.frame())
        .iter()
        .map(|pmf| success_probability(pmf, needed))
        .collect())
}

fn mc_success(scenario: &Scenario, model: ModelKind, s: usize, cfg: &TrialConfig) -> Result<McEstimate> {
    let needed = required_packets(scenario.coding().k)?;
    let link = scenario.link(model, s)?;
    Ok(estimate_success(&link, scenario.frame(), needed, cfg))
}

/// For each `S` in `s_range` and each model, builds the link from the first
/// `S` pool entries (Poisson rates from `lambdas`) and reports `P_success`,
/// `P_collision` at the scenario's `p`, spectral efficiency and a
/// Monte-Carlo estimate. Rows are ordered by `(S, model)`.
pub fn sweep_subchannels(
    scenario: &Scenario,
    lambdas: &[f64],
    s_range: RangeInclusive<usize>,
    cfg: &TrialConfig,
) -> Result<SweepResult> {
    let (lo, hi) = (*s_range.start(), *s_range.end());
    if lo == 0 {
        return Err(Error::invalid("S", lo, "must satisfy S ≥ 1"));
    }
    if hi < lo {
        return Err(Error::invalid("S", format!("{lo}..={hi}"), "range is empty"));
    }
    let scenario = scenario.clone().with_lambdas(lambdas)?;
    let p_collision = collision_probability(scenario.access());

    let analytic = ModelKind::ALL
        .par_iter()
        .map(|&m| success_by_size(&scenario, m, hi))
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<(usize, usize)> = (lo..=hi).flat_map(|s| (0..ModelKind::ALL.len()).map(move |m| (s, m))).collect();
    let rows = points
        .par_iter()
        .map(|&(s, m)| {
            let model = ModelKind::ALL[m];
            let p_success = analytic[m][s - 1];
            let se = spectral_efficiency(&efficiency(&scenario, s)?, p_success, p_collision);
            let mc = mc_success(&scenario, model, s, cfg)?;
            Ok(SweepRow::new(s as f64, model, p_success, p_collision, se, &mc))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// For each `p` in `grid` and each model, reports `P_collision`, `P_success`
/// at the scenario's link size and the resulting spectral efficiency. The
/// Monte-Carlo estimate does not depend on `p` and is repeated on each row.
pub fn sweep_p(scenario: &Scenario, grid: &[f64], lambdas: &[f64], cfg: &TrialConfig) -> Result<SweepResult> {
    let scenario = scenario.clone().with_lambdas(lambdas)?;
    let s = scenario.subchannels();
    let eff = efficiency(&scenario, s)?;

    let per_model = ModelKind::ALL
        .par_iter()
        .map(|&m| {
            let p_success = success_by_size(&scenario, m, s)?[s - 1];
            Ok((p_success, mc_success(&scenario, m, s, cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let collisions = grid
        .iter()
        .map(|&p| Ok(collision_probability(&scenario.access().with_p(p)?)))
        .collect::<Result<Vec<f64>>>()?;

    let mut rows = Vec::with_capacity(grid.len() * ModelKind::ALL.len());
    for (&p, &p_collision) in grid.iter().zip(&collisions) {
        for (model, (p_success, mc)) in ModelKind::ALL.iter().zip(&per_model) {
            let se = spectral_efficiency(&eff, *p_success, p_collision);
            rows.push(SweepRow::new(p, *model, *p_success, p_collision, se, mc));
        }
    }
    Ok(SweepResult { rows })
}
