//! Experiment descriptions: the subchannel pool, frame timing, access and
//! coding parameters, loaded from and saved to JSON.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::access::AccessParams;
use crate::fountain::SolitonParams;
use crate::link::{LinkSpec, SubchannelProfile};
use crate::traffic::FramePlan;
use crate::{check_probability, Error, Result};

/// Poisson arrival rates for the low-traffic comparison.
pub const LAMBDA_LOW: [f64; 9] = [3.0, 2.0, 1.0, 2.5, 3.6, 4.0, 6.0, 2.4, 3.2];
/// Moderate traffic, six times [`LAMBDA_LOW`].
pub const LAMBDA_MODERATE: [f64; 9] = [18.0, 12.0, 6.0, 15.0, 21.6, 24.0, 36.0, 14.4, 19.2];
/// High traffic, ten times [`LAMBDA_LOW`].
pub const LAMBDA_HIGH: [f64; 9] = [30.0, 20.0, 10.0, 25.0, 36.0, 40.0, 60.0, 24.0, 32.0];

const BASELINE_JSON: &str = include_str!("../scenarios/baseline.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Markov,
    Poisson,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Markov, ModelKind::Poisson];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Markov => "markov",
            ModelKind::Poisson => "poisson",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One pool entry: parameters for both traffic models plus the loss rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEntry {
    pub p_stay: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingParams {
    pub k: u64,
    pub c: f64,
    pub delta: f64,
    pub dep_target: f64,
}

impl CodingParams {
    pub fn soliton(&self) -> Result<SolitonParams> {
        let k = usize::try_from(self.k).map_err(|_| Error::invalid("coding.k", self.k, "too large"))?;
        SolitonParams::new(k, self.c, self.delta).map_err(|e| prefix_field("coding", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConstants {
    pub capacity_bps: f64,
    pub packet_bits: u32,
    pub bandwidth_hz: f64,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pool: Vec<PoolEntry>,
    frame: FramePlan,
    access: AccessParams,
    coding: CodingParams,
    link: LinkConstants,
    subchannels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    pool: PoolFile,
    frame: FrameFile,
    access: AccessFile,
    coding: CodingParams,
    link: LinkConstants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subchannels: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolFile {
    p_stay: Vec<f64>,
    gamma: Vec<f64>,
    lambda: Vec<f64>,
    loss: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    frame_s: f64,
    sensing_s: f64,
    slots: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccessFile {
    p: f64,
    q: f64,
    slots: u32,
    degree: u32,
    links: u32,
}

fn prefix_field(prefix: &str, err: Error) -> Error {
    match err {
        Error::Invalid { field, value, reason } => Error::Invalid {
            field: format!("{prefix}.{field}"),
            value,
            reason,
        },
        other => other,
    }
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(file: ScenarioFile) -> Result<Self> {
        let PoolFile {
            p_stay,
            gamma,
            lambda,
            loss,
        } = file.pool;
        let size = p_stay.len();
        if size == 0 || size > 9 {
            return Err(Error::invalid("pool.p_stay", format!("{size} entries"), "must hold 1 to 9 subchannels"));
        }
        for (name, len) in [("pool.gamma", gamma.len()), ("pool.lambda", lambda.len()), ("pool.loss", loss.len())] {
            if len != size {
                return Err(Error::invalid(name, format!("{len} entries"), format!("must match pool.p_stay ({size})")));
            }
        }
        let mut pool = Vec::with_capacity(size);
        for i in 0..size {
            check_probability(&format!("pool.p_stay[{i}]"), p_stay[i])?;
            check_probability(&format!("pool.gamma[{i}]"), gamma[i])?;
            check_probability(&format!("pool.loss[{i}]"), loss[i])?;
            if !(lambda[i].is_finite() && lambda[i] >= 0.0) {
                return Err(Error::invalid(format!("pool.lambda[{i}]"), lambda[i], "must be finite and >= 0"));
            }
            pool.push(PoolEntry {
                p_stay: p_stay[i],
                gamma: gamma[i],
                lambda: lambda[i],
                loss: loss[i],
            });
        }

        let frame = FramePlan::new(file.frame.frame_s, file.frame.sensing_s, file.frame.slots)?;
        let a = file.access;
        let access = AccessParams::new(a.p, a.q, a.slots, a.degree, a.links)?;
        if access.slots() != frame.slots() {
            return Err(Error::invalid("access.slots", a.slots, format!("must equal frame.slots ({})", frame.slots())));
        }

        check_probability("coding.dep_target", file.coding.dep_target)?;
        if file.coding.k == 0 {
            return Err(Error::invalid("coding.k", 0, "must be >= 1"));
        }
        file.coding.soliton()?;

        let l = file.link;
        // validates the shared link constants
        LinkSpec::new(vec![SubchannelProfile::poisson(0.0, 0.0)?], l.capacity_bps, l.packet_bits, l.bandwidth_hz)?;

        let subchannels = file.subchannels.unwrap_or(size);
        if subchannels == 0 || subchannels > size {
            return Err(Error::invalid("subchannels", subchannels, format!("must lie in [1, {size}]")));
        }

        Ok(Scenario {
            pool,
            frame,
            access,
            coding: file.coding,
            link: file.link,
            subchannels,
        })
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            pool: PoolFile {
                p_stay: s.pool.iter().map(|e| e.p_stay).collect(),
                gamma: s.pool.iter().map(|e| e.gamma).collect(),
                lambda: s.pool.iter().map(|e| e.lambda).collect(),
                loss: s.pool.iter().map(|e| e.loss).collect(),
            },
            frame: FrameFile {
                frame_s: s.frame.frame_s(),
                sensing_s: s.frame.sensing_s(),
                slots: s.frame.slots(),
            },
            access: AccessFile {
                p: s.access.p(),
                q: s.access.q(),
                slots: s.access.slots(),
                degree: s.access.degree(),
                links: s.access.links(),
            },
            coding: s.coding,
            link: s.link,
            subchannels: Some(s.subchannels),
        }
    }
}

impl Scenario {
    /// The bundled baseline: nine-subchannel pool, 1 s frames with 5 ms
    /// sensing and 10 slots, K = 3000 packets of 1000 bits, 10 Mbps
    /// subchannels of 100 kHz.
    pub fn baseline() -> Self {
        Self::from_json(BASELINE_JSON).expect("bundled baseline is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            path: "<inline>".into(),
            source,
        })?;
        Scenario::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serializes")
    }

    pub fn pool(&self) -> &[PoolEntry] {
        &self.pool
    }

    pub fn frame(&self) -> &FramePlan {
        &self.frame
    }

    pub fn access(&self) -> &AccessParams {
        &self.access
    }

    pub fn coding(&self) -> &CodingParams {
        &self.coding
    }

    pub fn link_constants(&self) -> &LinkConstants {
        &self.link
    }

    /// Link size used by the `p` sweeps.
    pub fn subchannels(&self) -> usize {
        self.subchannels
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pool.iter().map(|e| e.lambda).collect()
    }

    pub fn with_access(mut self, access: AccessParams) -> Result<Self> {
        if access.slots() != self.frame.slots() {
            return Err(Error::invalid("access.slots", access.slots(), "must equal frame.slots"));
        }
        self.access = access;
        Ok(self)
    }

    pub fn with_subchannels(mut self, s: usize) -> Result<Self> {
        if s == 0 || s > self.pool.len() {
            return Err(Error::invalid("subchannels", s, format!("must lie in [1, {}]", self.pool.len())));
        }
        self.subchannels = s;
        Ok(self)
    }

    /// Replaces the pool's Poisson rates.
    pub fn with_lambdas(mut self, lambdas: &[f64]) -> Result<Self> {
        if lambdas.len() != self.pool.len() {
            return Err(Error::invalid(
                "pool.lambda",
                format!("{} entries", lambdas.len()),
                format!("must match the pool size ({})", self.pool.len()),
            ));
        }
        for (i, (entry, &l)) in self.pool.iter_mut().zip(lambdas).enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::invalid(format!("pool.lambda[{i}]"), l, "must be finite and >= 0"));
            }
            entry.lambda = l;
        }
        Ok(self)
    }

    /// Link made of the first `s` pool entries under `model`.
    pub fn link(&self, model: ModelKind, s: usize) -> Result<LinkSpec> {
        if s == 0 {
            return Err(Error::invalid("S", s, "must satisfy S ≥ 1"));
        }
        if s > self.pool.len() {
            return Err(Error::invalid("S", s, format!("exceeds the pool size {}", self.pool.len())));
        }
        let profiles = self.pool[..s]
            .iter()
            .map(|e| match model {
                ModelKind::Markov => SubchannelProfile::markov(e.p_stay, e.gamma, e.loss),
                ModelKind::Poisson => SubchannelProfile::poisson(e.lambda, e.loss),
            })
            .collect::<Result<Vec<_>>>()?;
        LinkSpec::new(profiles, self.link.capacity_bps, self.link.packet_bits, self.link.bandwidth_hz)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::try_from(file)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    fs::write(path, scenario.to_json() + "\n").map_err(|e| Error::io(path, e))
}
