//! Binary basis files.
//!
//! Layout (all integers and floats little-endian):
//!
//! | field        | type            |
//! |--------------|-----------------|
//! | magic        | `b"GFTB"`       |
//! | version      | u32 (= 1)       |
//! | n            | u32             |
//! | k            | u32             |
//! | topology     | u32 (= 1)       |
//! | Ψ            | f64 × n·n, row-major |
//! | σ            | f64 × n         |
//! | Γ            | f64 × n·n, row-major |
//! | content hash | SHA-256 of every preceding byte |

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::{GraphBasis, TOPOLOGY_FORWARD_CYCLIC};
use crate::error::{Error, Result};

pub const BASIS_MAGIC: &[u8; 4] = b"GFTB";
pub const BASIS_VERSION: u32 = 1;

const HEADER_LEN: usize = 20;
const HASH_LEN: usize = 32;

fn encode(basis: &GraphBasis) -> Vec<u8> {
    let n = basis.n();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * (2 * n * n + n) + HASH_LEN);
    buf.extend_from_slice(BASIS_MAGIC);
    buf.extend_from_slice(&BASIS_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&(basis.k() as u32).to_le_bytes());
    buf.extend_from_slice(&TOPOLOGY_FORWARD_CYCLIC.to_le_bytes());
    for v in basis
        .psi()
        .iter()
        .chain(basis.sigma().iter())
        .chain(basis.gamma().iter())
    {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let hash = Sha256::digest(&buf);
    buf.extend_from_slice(&hash);
    buf
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

fn decode(bytes: &[u8]) -> Result<GraphBasis> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != BASIS_MAGIC {
        return Err(Error::MalformedHeader(format!(
            "bad magic {:?}, expected \"GFTB\"",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let version = u32_at(bytes, 4);
    if version != BASIS_VERSION {
        return Err(Error::VersionMismatch {
            expected: BASIS_VERSION,
            found: version,
        });
    }
    let n = u32_at(bytes, 8) as usize;
    let k = u32_at(bytes, 12) as usize;
    let topology = u32_at(bytes, 16);
    if topology != TOPOLOGY_FORWARD_CYCLIC {
        return Err(Error::MalformedHeader(format!(
            "unknown topology id {topology}"
        )));
    }
    if n < 2 || k < 1 || k >= n {
        return Err(Error::MalformedHeader(format!(
            "invalid graph parameters n={n} k={k}"
        )));
    }
    let expected = HEADER_LEN + 8 * (2 * n * n + n) + HASH_LEN;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::MalformedHeader(format!(
            "{} trailing bytes after the content hash",
            bytes.len() - expected
        )));
    }
    let body = &bytes[..expected - HASH_LEN];
    let recorded = &bytes[expected - HASH_LEN..];
    let computed = Sha256::digest(body);
    if computed.as_slice() != recorded {
        return Err(Error::FingerprintMismatch {
            context: "basis file content hash",
            expected: hex(recorded),
            found: hex(&computed),
        });
    }

    let mut floats = body[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let psi = Array2::from_shape_vec((n, n), floats.by_ref().take(n * n).collect())
        .expect("sized by header");
    let sigma = Array1::from_iter(floats.by_ref().take(n));
    let gamma =
        Array2::from_shape_vec((n, n), floats.take(n * n).collect()).expect("sized by header");
    GraphBasis::from_parts(n, k, psi, sigma, gamma)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_basis<W: Write>(basis: &GraphBasis, mut w: W) -> Result<()> {
    w.write_all(&encode(basis))?;
    Ok(())
}

/// Reads a basis, validating magic, version, length, content hash and orthogonality of `Ψ`.
pub fn read_basis<R: Read>(mut r: R) -> Result<GraphBasis> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save_basis(basis: &GraphBasis, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(basis))?;
    Ok(())
}

pub fn load_basis(path: impl AsRef<Path>) -> Result<GraphBasis> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_basis::{build_adjacency, decompose_svd};

    fn sample() -> GraphBasis {
        decompose_svd(&build_adjacency(16, 3).unwrap()).unwrap()
    }

    #[test]
    fn layout_size_and_header() {
        let b = sample();
        let bytes = encode(&b);
        assert_eq!(bytes.len(), 20 + 8 * (2 * 256 + 16) + 32);
        assert_eq!(&bytes[..4], b"GFTB");
        assert_eq!(u32_at(&bytes, 4), 1);
        assert_eq!(u32_at(&bytes, 8), 16);
        assert_eq!(u32_at(&bytes, 12), 3);
        assert_eq!(u32_at(&bytes, 16), 1);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let b = sample();
        let back = decode(&encode(&b)).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.fingerprint(), b.fingerprint());
    }

    #[test]
    fn corrupted_magic_is_malformed_header() {
        let mut bytes = encode(&sample());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn flipped_payload_byte_is_fingerprint_mismatch() {
        let mut bytes = encode(&sample());
        bytes[HEADER_LEN + 100] ^= 0x01;
        assert!(matches!(
            decode(&bytes),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn truncated_payload() {
        let bytes = encode(&sample());
        assert!(matches!(
            decode(&bytes[..bytes.len() - 40]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = encode(&sample());
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            decode(&bytes),
            Err(Error::VersionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }
}
