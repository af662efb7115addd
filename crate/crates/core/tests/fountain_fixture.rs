use std::fs;
use std::path::{Path, PathBuf};

use crnsim::fountain::fixture::{read_fixture, sidecar_path, write_fixture, FixtureMeta};
use crnsim::fountain::{lt_decode, lt_encode, DecodeOutcome};
use crnsim::Error;

const STREAM_SEED: u64 = 7;
const PACKETS: usize = 32;

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/lt_k16.bin")
}

fn meta() -> FixtureMeta {
    FixtureMeta {
        k: 16,
        c: 0.1,
        delta: 0.5,
        packet_bits: 64,
    }
}

fn source(meta: &FixtureMeta) -> Vec<Vec<u8>> {
    let len = meta.packet_bits / 8;
    (0..meta.k)
        .map(|j| (0..len).map(|i| (j * 31 + i * 7 + 3) as u8).collect())
        .collect()
}

/// Rewrites the committed fixture. Run with `--ignored` after a deliberate
/// change to the encoder.
#[test]
#[ignore]
fn regenerate_golden() {
    let m = meta();
    let packets = lt_encode(&m.soliton().unwrap(), &source(&m), PACKETS, STREAM_SEED).unwrap();
    write_fixture(&golden(), &m, &packets).unwrap();
}

#[test]
fn golden_fixture_decodes_to_source() {
    let (m, packets) = read_fixture(&golden()).unwrap();
    assert_eq!(m, meta());
    assert_eq!(packets.len(), PACKETS);
    match lt_decode(&packets, m.k).unwrap() {
        DecodeOutcome::Complete(decoded) => assert_eq!(decoded, source(&m)),
        other => panic!("golden stream failed to decode: {other:?}"),
    }
}

#[test]
fn encoder_reproduces_golden_bytes() {
    let m = meta();
    let packets = lt_encode(&m.soliton().unwrap(), &source(&m), PACKETS, STREAM_SEED).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("again.bin");
    write_fixture(&out, &m, &packets).unwrap();
    assert_eq!(fs::read(&out).unwrap(), fs::read(golden()).unwrap());

    let (_, stored) = read_fixture(&golden()).unwrap();
    assert_eq!(stored, packets);
}

#[test]
fn sidecar_uses_documented_keys() {
    let text = fs::read_to_string(sidecar_path(&golden())).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["L", "c", "delta", "k"]);
}

#[test]
fn truncated_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.bin");
    let bytes = fs::read(golden()).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
    fs::copy(sidecar_path(&golden()), sidecar_path(&path)).unwrap();
    assert!(matches!(read_fixture(&path), Err(Error::Invalid { .. })));
}

#[test]
fn missing_sidecar_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lonely.bin");
    fs::copy(golden(), &path).unwrap();
    let err = read_fixture(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn bad_sidecar_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("odd.bin");
    fs::copy(golden(), &path).unwrap();
    fs::write(sidecar_path(&path), r#"{"k": 16, "c": 0.1, "delta": 0.5}"#).unwrap();
    assert!(matches!(read_fixture(&path), Err(Error::Parse { .. })));
}

#[test]
fn write_rejects_wrong_payload_size() {
    let m = FixtureMeta { packet_bits: 72, ..meta() };
    let packets = lt_encode(&meta().soliton().unwrap(), &source(&meta()), 4, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = write_fixture(&dir.path().join("x.bin"), &m, &packets).unwrap_err();
    assert!(matches!(err, Error::PayloadLength { expected: 9, found: 8, .. }));
}
