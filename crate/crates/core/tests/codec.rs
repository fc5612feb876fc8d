mod common;

use common::{mixed_density_stream, rng};
use proptest::prelude::*;
use rand::Rng;
use spikelight::stream::SPK_HEADER_LEN;
use spikelight::{decode_stream, encode_stream, Error, SpikeStream};

fn encode(s: &SpikeStream) -> Vec<u8> {
    let mut out = Vec::new();
    let n = encode_stream(s, &mut out).unwrap();
    assert_eq!(n as usize, out.len());
    out
}

#[test]
fn hundred_random_streams_roundtrip() {
    let mut r = rng(1);
    for _ in 0..100 {
        let s = mixed_density_stream(&mut r, 16, 16, 41);
        let bytes = encode(&s);
        assert_eq!(bytes.len(), SPK_HEADER_LEN + 41 * 32);
        assert_eq!(decode_stream(&mut bytes.as_slice()).unwrap(), s);
    }
}

#[test]
fn file_roundtrip_and_trailing_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.spk");
    let s = mixed_density_stream(&mut rng(2), 5, 3, 17);
    s.write_file(&path).unwrap();
    assert_eq!(SpikeStream::read_file(&path).unwrap(), s);

    let mut bytes = std::fs::read(&path).unwrap();
    bytes.push(0);
    std::fs::write(&path, bytes).unwrap();
    assert!(matches!(SpikeStream::read_file(&path), Err(Error::Format(_))));
}

#[test]
fn failing_sink_is_io_error() {
    struct Broken;
    impl std::io::Write for Broken {
        fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("disk full"))
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }
    let s = SpikeStream::zeros(1, 1, 1, 0).unwrap();
    assert!(matches!(encode_stream(&s, &mut Broken), Err(Error::Io(_))));
}

#[test]
fn fuzzed_headers_never_panic() {
    let mut r = rng(3);
    let valid = encode(&mixed_density_stream(&mut r, 4, 5, 6));
    for _ in 0..20_000 {
        let mut bytes = valid.clone();
        // mutate a few header bytes, sometimes truncate
        for _ in 0..r.random_range(1..4) {
            let i = r.random_range(0..SPK_HEADER_LEN);
            bytes[i] = r.random();
        }
        if r.random_bool(0.2) {
            bytes.truncate(r.random_range(0..bytes.len()));
        }
        let _ = decode_stream(&mut bytes.as_slice());
    }
    for _ in 0..5_000 {
        let len = r.random_range(0..64);
        let mut bytes: Vec<u8> = (0..len).map(|_| r.random()).collect();
        if r.random_bool(0.5) && bytes.len() >= 6 {
            bytes[..4].copy_from_slice(b"SPKS");
            bytes[4..6].copy_from_slice(&1u16.to_le_bytes());
        }
        assert!(decode_stream(&mut bytes.as_slice()).is_err());
    }
}

#[test]
fn forged_huge_header_is_cheap_length_error() {
    let mut bytes = b"SPKS".to_vec();
    bytes.extend_from_slice(&1u16.to_le_bytes());
    for d in [u32::MAX, u32::MAX, u32::MAX] {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    bytes.extend_from_slice(&0u64.to_le_bytes());
    bytes.extend_from_slice(&[0; 16]);
    assert!(matches!(
        decode_stream(&mut bytes.as_slice()),
        Err(Error::Length { .. } | Error::Format(_))
    ));
}

proptest! {
    #[test]
    fn roundtrip_identity(h in 1usize..20, w in 1usize..20, n in 1usize..30, origin in any::<u32>(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = mixed_density_stream(&mut r, h, w, n);
        let s = SpikeStream::from_packed(h, w, n, origin as u64, s.packed().to_vec()).unwrap();
        let bytes = encode(&s);
        prop_assert_eq!(decode_stream(&mut bytes.as_slice()).unwrap(), s);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = decode_stream(&mut bytes.as_slice());
    }
}
