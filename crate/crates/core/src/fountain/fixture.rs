//! Golden-file form of an encoded packet stream.
//!
//! The binary file is a sequence of records `packet_seed (u64 LE) ||
//! payload (L/8 bytes)`. A JSON sidecar next to it (same stem, `.json`
//! extension) carries `{"k", "c", "delta", "L"}`, which is enough to re-derive
//! every packet's degree and neighbors from its seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::codec::{EncodedPacket, LtCode};
use super::soliton::SolitonParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureMeta {
    pub k: usize,
    pub c: f64,
    pub delta: f64,
    /// Packet size in bits.
    #[serde(rename = "L")]
    pub packet_bits: usize,
}

impl FixtureMeta {
    pub fn soliton(&self) -> Result<SolitonParams> {
        SolitonParams::new(self.k, self.c, self.delta)
    }

    pub fn payload_len(&self) -> Result<usize> {
        if self.packet_bits == 0 || !self.packet_bits.is_multiple_of(8) {
            return Err(Error::invalid("L", self.packet_bits, "must be a positive multiple of 8"));
        }
        Ok(self.packet_bits / 8)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_fixture(path: &Path, meta: &FixtureMeta, packets: &[EncodedPacket]) -> Result<()> {
    let len = meta.payload_len()?;
    let mut bytes = Vec::with_capacity(packets.len() * (8 + len));
    for (index, p) in packets.iter().enumerate() {
        if p.payload.len() != len {
            return Err(Error::PayloadLength {
                index,
                expected: len,
                found: p.payload.len(),
            });
        }
        bytes.extend_from_slice(&p.packet_seed.to_le_bytes());
        bytes.extend_from_slice(&p.payload);
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let sidecar = sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).expect("fixture metadata serializes");
    fs::write(&sidecar, json + "\n").map_err(|e| Error::io(sidecar, e))
}

pub fn read_fixture(path: &Path) -> Result<(FixtureMeta, Vec<EncodedPacket>)> {
    let sidecar = sidecar_path(path);
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let meta: FixtureMeta = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: sidecar.clone(),
        source,
    })?;
    let len = meta.payload_len()?;
    let code = LtCode::new(meta.soliton()?)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let record = 8 + len;
    if bytes.len() % record != 0 {
        return Err(Error::invalid(
            path.display().to_string(),
            bytes.len(),
            format!("length is not a multiple of the {record}-byte record"),
        ));
    }
    let packets = bytes
        .chunks_exact(record)
        .map(|r| {
            let seed = u64::from_le_bytes(r[..8].try_into().expect("8-byte seed"));
            code.packet(seed, r[8..].to_vec())
        })
        .collect();
    Ok((meta, packets))
}
