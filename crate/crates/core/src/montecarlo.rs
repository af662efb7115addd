//! Seeded sampling of subchannel availability and link delivery, used as an
//! independent check on the analytical PMFs.
//!
//! Trial `t` draws from its own `ChaCha8Rng` seeded with
//! [`trial_seed`]`(master_seed, t)`, so an estimate depends only on the
//! configuration and never on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::link::{packets_delivered, LinkSpec, SubchannelProfile, TrafficModel};
use crate::traffic::FramePlan;
use crate::{Error, Result};

/// Identity of the generator and seed-splitting rule, recorded with outputs.
pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(trial)))";

/// Zero-variance guard used by [`agreement_check`].
pub const STD_ERROR_FLOOR: f64 = 1e-6;

const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    trials: u64,
    master_seed: u64,
}

impl TrialConfig {
    pub fn new(trials: u64, master_seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", trials, "must be >= 1"));
        }
        Ok(TrialConfig { trials, master_seed })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl McEstimate {
    /// Estimate of a Bernoulli mean from an integer success count.
    pub fn from_successes(successes: u64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = successes as f64 / n;
        let std_error = if trials > 1 {
            let var = successes as f64 * (trials - successes) as f64 / (n * (n - 1.0));
            (var / n).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error,
            trials,
        }
    }

    /// Estimate from per-trial samples, summed in trial order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = if samples.len() > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error,
            trials: samples.len() as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `t` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial))
}

pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master_seed, trial))
}

/// Draws the free time of one subchannel in one frame, in seconds.
pub fn sample_available_time<R: Rng + ?Sized>(profile: &SubchannelProfile, frame: &FramePlan, rng: &mut R) -> f64 {
    match profile.model() {
        TrafficModel::Markov(chain) => {
            if rng.random::<f64>() >= chain.gamma() {
                return 0.0;
            }
            let mut free = 0;
            while free < frame.slots() && rng.random::<f64>() < chain.p_stay() {
                free += 1;
            }
            frame.slots_duration(free)
        }
        TrafficModel::Poisson(params) => {
            let horizon = frame.data_s();
            if params.lambda() == 0.0 {
                return horizon;
            }
            let tau: f64 = rng.sample::<f64, _>(Exp1) / params.lambda();
            tau.min(horizon)
        }
    }
}

/// One draw of the free time with a generator seeded from `seed`.
pub fn simulate_available_time(profile: &SubchannelProfile, frame: &FramePlan, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_available_time(profile, frame, &mut rng)
}

/// Mean free time of one subchannel over `cfg.trials()` frames.
pub fn estimate_available_time(profile: &SubchannelProfile, frame: &FramePlan, cfg: &TrialConfig) -> McEstimate {
    let samples: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| sample_available_time(profile, frame, &mut trial_rng(cfg.master_seed, t)))
        .collect();
    McEstimate::from_samples(&samples)
}

/// Packets delivered over the whole link in one sampled frame.
pub fn sample_link_packets<R: Rng + ?Sized>(link: &LinkSpec, frame: &FramePlan, rng: &mut R) -> u64 {
    link.profiles()
        .iter()
        .map(|p| packets_delivered(link.packet_rate(p), sample_available_time(p, frame, rng)))
        .sum()
}

/// Fraction of sampled frames delivering at least `needed` packets.
pub fn estimate_success(link: &LinkSpec, frame: &FramePlan, needed: u64, cfg: &TrialConfig) -> McEstimate {
    let batches = cfg.trials.div_ceil(BATCH);
    let successes: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let end = ((b + 1) * BATCH).min(cfg.trials);
            (b * BATCH..end)
                .filter(|&t| sample_link_packets(link, frame, &mut trial_rng(cfg.master_seed, t)) >= needed)
                .count() as u64
        })
        .sum();
    McEstimate::from_successes(successes, cfg.trials)
}

/// `|analytic - mean| <= k_sigma * max(std_error, STD_ERROR_FLOOR)`.
pub fn agreement_check(analytic: f64, estimate: &McEstimate, k_sigma: f64) -> bool {
    (analytic - estimate.mean).abs() <= k_sigma * estimate.std_error.max(STD_ERROR_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{link_pmf, success_probability};

    fn frame() -> FramePlan {
        FramePlan::new(1.0, 0.005, 10).unwrap()
    }

    #[test]
    fn markov_extremes() {
        let f = frame();
        let always = SubchannelProfile::markov(1.0, 1.0, 0.0).unwrap();
        let never = SubchannelProfile::markov(0.6, 0.0, 0.0).unwrap();
        for seed in 0..200 {
            assert_eq!(simulate_available_time(&always, &f, seed), f.data_s());
            assert_eq!(simulate_available_time(&never, &f, seed), 0.0);
        }
    }

    #[test]
    fn poisson_mean_matches_clamped_exponential() {
        let f = frame();
        let p = SubchannelProfile::poisson(3.0, 0.0).unwrap();
        let est = estimate_available_time(&p, &f, &TrialConfig::new(100_000, 42).unwrap());
        // E[min(tau, D)] = (1 - e^{-lambda D}) / lambda
        let d = f.data_s();
        let closed = (1.0 - (-3.0 * d).exp()) / 3.0;
        // trapezoid rule on the survival function as a second opinion
        let n = 100_000;
        let h = d / n as f64;
        let quad: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (-3.0 * i as f64 * h).exp()
            })
            .sum::<f64>()
            * h;
        assert!((closed - quad).abs() < 1e-9);
        assert!((est.mean - closed).abs() <= 3.0 * est.std_error, "{est:?} vs {closed}");
    }

    #[test]
    fn deterministic_link_is_certain() {
        let f = frame();
        let link = LinkSpec::new(
            vec![
                SubchannelProfile::markov(1.0, 1.0, 0.0).unwrap(),
                SubchannelProfile::poisson(0.0, 0.5).unwrap(),
            ],
            1e7,
            1000,
            1e5,
        )
        .unwrap();
        let est = estimate_success(&link, &f, 3150, &TrialConfig::new(1000, 1).unwrap());
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(agreement_check(1.0, &est, 3.0));
    }

    #[test]
    fn repeat_runs_are_identical() {
        let f = frame();
        let link = LinkSpec::new(
            vec![
                SubchannelProfile::markov(0.8, 1.0, 0.03).unwrap(),
                SubchannelProfile::poisson(4.0, 0.01).unwrap(),
            ],
            1e7,
            1000,
            1e5,
        )
        .unwrap();
        let cfg = TrialConfig::new(20_000, 99).unwrap();
        let a = estimate_success(&link, &f, 3150, &cfg);
        let b = estimate_success(&link, &f, 3150, &cfg);
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| estimate_success(&link, &f, 3150, &cfg));
        assert_eq!(a, c);
    }

    #[test]
    fn agrees_with_analytic_engine() {
        let f = frame();
        let link = LinkSpec::new(
            vec![
                SubchannelProfile::markov(0.9, 1.0, 0.03).unwrap(),
                SubchannelProfile::markov(0.7, 0.8, 0.04).unwrap(),
            ],
            1e7,
            1000,
            1e5,
        )
        .unwrap();
        let analytic = success_probability(&link_pmf(&link, &f), 3150);
        let est = estimate_success(&link, &f, 3150, &TrialConfig::new(100_000, 5).unwrap());
        assert!(agreement_check(analytic, &est, 4.0), "{analytic} vs {est:?}");
    }

    #[test]
    fn std_error_halves_when_trials_quadruple() {
        let f = frame();
        let link = LinkSpec::new(vec![SubchannelProfile::poisson(3.0, 0.03).unwrap()], 1e7, 1000, 1e5).unwrap();
        let small = estimate_success(&link, &f, 3150, &TrialConfig::new(25_000, 3).unwrap());
        let large = estimate_success(&link, &f, 3150, &TrialConfig::new(100_000, 3).unwrap());
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    }

    #[test]
    fn agreement_examples() {
        let est = |mean, std_error| McEstimate {
            mean,
            std_error,
            trials: 100,
        };
        assert!(agreement_check(0.5, &est(0.5, 0.01), 3.0));
        assert!(!agreement_check(0.5, &est(0.6, 0.01), 3.0));
        assert!(agreement_check(1.0, &est(1.0, 0.0), 3.0));
        assert!(!agreement_check(0.99, &est(1.0, 0.0), 3.0));
    }

    #[test]
    fn bernoulli_std_error() {
        let e = McEstimate::from_successes(50, 100);
        assert_eq!(e.mean, 0.5);
        // sample variance 50*50/(100*99)
        assert!((e.std_error - (2500.0 / 9900.0 / 100.0f64).sqrt()).abs() < 1e-15);
        let from_samples = McEstimate::from_samples(&[[1.0; 50], [0.0; 50]].concat());
        assert!((from_samples.std_error - e.std_error).abs() < 1e-15);
        assert!(TrialConfig::new(0, 1).is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|t| trial_seed(42, t)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(trial_seed(1, 0), trial_seed(0, 1));
    }
}
