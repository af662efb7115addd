use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::soliton::{robust_soliton, DegreeSampler, SolitonParams};
use crate::montecarlo::trial_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPacket {
    /// Seed from which `degree` and `neighbors` are re-derived.
    pub packet_seed: u64,
    pub degree: usize,
    /// Distinct source indices, ascending.
    pub neighbors: Vec<usize>,
    pub payload: Vec<u8>,
}

/// An LT code over `k` source packets: Robust Soliton degrees, uniformly
/// chosen neighbors, both derived from a per-packet seed.
#[derive(Debug, Clone)]
pub struct LtCode {
    params: SolitonParams,
    sampler: DegreeSampler,
}

impl LtCode {
    pub fn new(params: SolitonParams) -> Result<Self> {
        let mu = robust_soliton(&params)?;
        Ok(LtCode {
            params,
            sampler: DegreeSampler::new(&mu),
        })
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    /// Seed of the `index`-th packet of a stream started from `stream_seed`.
    pub fn packet_seed(stream_seed: u64, index: u64) -> u64 {
        trial_seed(stream_seed, index)
    }

    /// Neighbor set encoded by a packet seed.
    pub fn neighbors(&self, packet_seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(packet_seed);
        let degree = self.sampler.sample(&mut rng);
        let mut picked = index::sample(&mut rng, self.k(), degree).into_vec();
        picked.sort_unstable();
        picked
    }

    /// Rebuilds a packet from its seed and payload.
    pub fn packet(&self, packet_seed: u64, payload: Vec<u8>) -> EncodedPacket {
        let neighbors = self.neighbors(packet_seed);
        EncodedPacket {
            packet_seed,
            degree: neighbors.len(),
            neighbors,
            payload,
        }
    }

    pub fn encode(&self, source: &[Vec<u8>], count: usize, seed: u64) -> Result<Vec<EncodedPacket>> {
        let len = check_source(source)?;
        if source.len() != self.k() {
            return Err(Error::invalid("source", source.len(), format!("must hold k = {} packets", self.k())));
        }
        Ok((0..count as u64)
            .map(|i| {
                let packet_seed = Self::packet_seed(seed, i);
                let neighbors = self.neighbors(packet_seed);
                let mut payload = vec![0u8; len];
                for &j in &neighbors {
                    xor_into(&mut payload, &source[j]);
                }
                EncodedPacket {
                    packet_seed,
                    degree: neighbors.len(),
                    neighbors,
                    payload,
                }
            })
            .collect())
    }
}

fn check_source(source: &[Vec<u8>]) -> Result<usize> {
    let len = source.first().ok_or(Error::EmptySource)?.len();
    if let Some((index, p)) = source.iter().enumerate().find(|(_, p)| p.len() != len) {
        return Err(Error::PayloadLength {
            index,
            expected: len,
            found: p.len(),
        });
    }
    Ok(len)
}

fn xor_into(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Encodes `count` packets from `source` (whose length is `params.k`).
pub fn lt_encode(params: &SolitonParams, source: &[Vec<u8>], count: usize, seed: u64) -> Result<Vec<EncodedPacket>> {
    LtCode::new(*params)?.encode(source, count, seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Complete(Vec<Vec<u8>>),
    /// Peeling stalled with `missing` source indices unresolved.
    Incomplete { recovered: usize, missing: Vec<usize> },
}

impl DecodeOutcome {
    pub fn is_complete(&self) -> bool {
        matches!(self, DecodeOutcome::Complete(_))
    }
}

/// Peeling decoder: resolve degree-one packets, substitute each recovered
/// source into the packets that cover it, repeat until done or stalled.
pub fn lt_decode(packets: &[EncodedPacket], k: usize) -> Result<DecodeOutcome> {
    let len = packets.first().map_or(0, |p| p.payload.len());
    for (index, p) in packets.iter().enumerate() {
        if p.payload.len() != len {
            return Err(Error::PayloadLength {
                index,
                expected: len,
                found: p.payload.len(),
            });
        }
        if let Some(&j) = p.neighbors.iter().find(|&&j| j >= k) {
            return Err(Error::invalid(format!("packets[{index}].neighbors"), j, format!("must be < k = {k}")));
        }
    }

    let mut remaining: Vec<Vec<usize>> = packets.iter().map(|p| p.neighbors.clone()).collect();
    let mut payloads: Vec<Vec<u8>> = packets.iter().map(|p| p.payload.clone()).collect();
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, ns) in remaining.iter().enumerate() {
        for &j in ns {
            covering[j].push(i);
        }
    }

    let mut source: Vec<Option<Vec<u8>>> = vec![None; k];
    let mut recovered = 0;
    let mut ripple: Vec<usize> = (0..packets.len()).filter(|&i| remaining[i].len() == 1).collect();

    while let Some(i) = ripple.pop() {
        if remaining[i].len() != 1 {
            continue;
        }
        let j = remaining[i][0];
        remaining[i].clear();
        let value = std::mem::take(&mut payloads[i]);
        for &other in &covering[j] {
            if let Some(pos) = remaining[other].iter().position(|&x| x == j) {
                remaining[other].swap_remove(pos);
                xor_into(&mut payloads[other], &value);
                if remaining[other].len() == 1 {
                    ripple.push(other);
                }
            }
        }
        source[j] = Some(value);
        recovered += 1;
        if recovered == k {
            break;
        }
    }

    if recovered == k {
        Ok(DecodeOutcome::Complete(source.into_iter().map(Option::unwrap).collect()))
    } else {
        let missing = source.iter().enumerate().filter(|(_, s)| s.is_none()).map(|(j, _)| j).collect();
        Ok(DecodeOutcome::Incomplete { recovered, missing })
    }
}

/// Packets sent for a block of `k` with fractional `overhead`.
pub fn packets_for_overhead(k: usize, overhead: f64) -> usize {
    ((1.0 + overhead) * k as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Fraction of `trials` independent encode/decode rounds that fail to
/// recover all `params.k` sources from `ceil((1 + overhead) k)` packets.
pub fn measure_dep(params: &SolitonParams, overhead: f64, trials: u64, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials", trials, "must be >= 1"));
    }
    if !(overhead.is_finite() && overhead >= -1.0) {
        return Err(Error::invalid("overhead", overhead, "must be finite and >= -1"));
    }
    let code = LtCode::new(*params)?;
    let k = code.k();
    let n = packets_for_overhead(k, overhead);
    if n < k {
        return Ok(1.0);
    }
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let round_seed = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(round_seed);
            let source: Vec<Vec<u8>> = (0..k).map(|_| rng.random::<[u8; 4]>().to_vec()).collect();
            let packets = code.encode(&source, n, round_seed)?;
            Ok(match lt_decode(&packets, k)? {
                DecodeOutcome::Complete(out) => {
                    debug_assert_eq!(out, source);
                    0
                }
                DecodeOutcome::Incomplete { .. } => 1,
            })
        })
        .sum::<Result<u64>>()?;
    Ok(failures as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn params(k: usize) -> SolitonParams {
        SolitonParams::new(k, 0.1, 0.5).unwrap()
    }

    fn source(k: usize, len: usize, seed: u64) -> Vec<Vec<u8>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k).map(|_| (0..len).map(|_| rng.random()).collect()).collect()
    }

    fn systematic(src: &[Vec<u8>]) -> Vec<EncodedPacket> {
        src.iter()
            .enumerate()
            .map(|(j, p)| EncodedPacket {
                packet_seed: j as u64,
                degree: 1,
                neighbors: vec![j],
                payload: p.clone(),
            })
            .collect()
    }

    #[test]
    fn degree_one_packet_copies_source() {
        let src = source(20, 16, 1);
        let packets = lt_encode(&params(20), &src, 400, 9).unwrap();
        let ones: Vec<_> = packets.iter().filter(|p| p.degree == 1).collect();
        assert!(!ones.is_empty());
        for p in ones {
            assert_eq!(p.payload, src[p.neighbors[0]]);
        }
        for p in &packets {
            let mut expect = vec![0u8; 16];
            for &j in &p.neighbors {
                xor_into(&mut expect, &src[j]);
            }
            assert_eq!(p.payload, expect);
            assert_eq!(p.neighbors.len(), p.degree);
            assert!(p.neighbors.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn encoding_is_deterministic() {
        let src = source(50, 8, 2);
        assert_eq!(lt_encode(&params(50), &src, 80, 3).unwrap(), lt_encode(&params(50), &src, 80, 3).unwrap());
        assert_ne!(lt_encode(&params(50), &src, 80, 3).unwrap(), lt_encode(&params(50), &src, 80, 4).unwrap());
    }

    #[test]
    fn single_source_packet() {
        let src = vec![vec![1, 2, 3]];
        let packets = lt_encode(&params(1), &src, 5, 0).unwrap();
        assert!(packets.iter().all(|p| p.degree == 1 && p.payload == src[0]));
        assert_eq!(lt_decode(&packets[..1], 1).unwrap(), DecodeOutcome::Complete(src));
    }

    #[test]
    fn encode_errors() {
        assert!(matches!(lt_encode(&params(1), &[], 5, 0), Err(Error::EmptySource)));
        let ragged = vec![vec![1, 2], vec![3]];
        assert!(matches!(lt_encode(&params(2), &ragged, 5, 0), Err(Error::PayloadLength { index: 1, .. })));
        assert!(lt_encode(&params(3), &ragged[..1], 5, 0).is_err());
    }

    #[test]
    fn decode_systematic() {
        let src = source(30, 10, 5);
        assert_eq!(lt_decode(&systematic(&src), 30).unwrap(), DecodeOutcome::Complete(src));
    }

    #[test]
    fn uncovered_source_fails() {
        let src = source(10, 4, 6);
        let mut packets = systematic(&src);
        packets.remove(7);
        match lt_decode(&packets, 10).unwrap() {
            DecodeOutcome::Incomplete { recovered, missing } => {
                assert_eq!(recovered, 9);
                assert_eq!(missing, vec![7]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decode_rejects_ragged_payloads() {
        let src = source(3, 4, 7);
        let mut packets = systematic(&src);
        packets[2].payload.pop();
        assert!(matches!(lt_decode(&packets, 3), Err(Error::PayloadLength { index: 2, .. })));
        assert!(lt_decode(&systematic(&src), 2).is_err());
    }

    #[test]
    fn too_few_packets_always_fail() {
        assert_eq!(measure_dep(&params(100), -0.05, 10, 1).unwrap(), 1.0);
        assert_eq!(packets_for_overhead(3000, 0.05), 3150);
        assert_eq!(packets_for_overhead(500, 1.0), 1000);
    }

    #[test]
    fn dep_with_double_overhead() {
        let dep = measure_dep(&params(500), 1.0, 200, 2024).unwrap();
        assert!(dep <= 0.01, "dep = {dep}");
    }

    #[test]
    fn dep_decreases_with_overhead() {
        let trials = 300;
        let low = measure_dep(&params(200), 0.1, trials, 8).unwrap();
        let high = measure_dep(&params(200), 0.4, trials, 8).unwrap();
        let slack = 3.0 * (high * (1.0 - high) / trials as f64).sqrt();
        assert!(low >= high - slack, "{low} vs {high}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn success_monotone_in_packet_set(k in 1usize..120, extra in 0usize..120, more in 1usize..60, seed in any::<u64>()) {
            let src = source(k, 4, seed);
            let packets = lt_encode(&params(k), &src, k + extra + more, seed).unwrap();
            let before = lt_decode(&packets[..k + extra], k).unwrap();
            let after = lt_decode(&packets, k).unwrap();
            if before.is_complete() {
                prop_assert_eq!(after, DecodeOutcome::Complete(src));
            }
        }
    }
}
