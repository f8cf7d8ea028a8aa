//! Estimator checkpoint files.
//!
//! Layout (little-endian): magic `b"GFTM"`, version u32 (= 1), layer-size
//! count u32, sizes u32 each, output scale f64, then per layer the weight
//! matrix (row-major, `out × in`) and bias as f64, seed u64, the 32-byte
//! fingerprint of the basis the estimator was trained against, and a
//! SHA-256 hash of every preceding byte.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::mlp::{Layer, MlpParams};
use crate::error::{Error, Result};
use crate::graph_basis::{Fingerprint, GraphBasis};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"GFTM";
pub const CHECKPOINT_VERSION: u32 = 1;

const MAX_LAYERS: usize = 64;

/// Trained estimator parameters as stored on disk.
pub type Checkpoint = MlpParams;

fn encode(params: &MlpParams) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let sizes = params.sizes();
    buf.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for s in sizes {
        buf.extend_from_slice(&(s as u32).to_le_bytes());
    }
    buf.extend_from_slice(&params.output_scale.to_le_bytes());
    for layer in &params.layers {
        for v in layer.weight.iter().chain(layer.bias.iter()) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf.extend_from_slice(&params.seed.to_le_bytes());
    buf.extend_from_slice(params.basis_fingerprint.as_bytes());
    let hash = Sha256::digest(&buf);
    buf.extend_from_slice(&hash);
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    expected_len: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Truncated {
                expected: self.expected_len.max(self.pos + n),
                found: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(bytes: &[u8]) -> Result<MlpParams> {
    if bytes.len() < 12 {
        return Err(Error::MalformedHeader(format!(
            "checkpoint is {} bytes, shorter than its header",
            bytes.len()
        )));
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::MalformedHeader(format!(
            "bad magic {:?}, expected \"GFTM\"",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let mut cur = Cursor {
        bytes,
        pos: 4,
        expected_len: 0,
    };
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            expected: CHECKPOINT_VERSION,
            found: version,
        });
    }
    let count = cur.u32()? as usize;
    if !(2..=MAX_LAYERS).contains(&count) {
        return Err(Error::MalformedHeader(format!(
            "implausible layer-size count {count}"
        )));
    }
    let sizes = (0..count)
        .map(|_| cur.u32().map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    if sizes.contains(&0) {
        return Err(Error::MalformedHeader(format!(
            "zero layer size in {sizes:?}"
        )));
    }
    let n_params: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    cur.expected_len = cur.pos + 8 + 8 * n_params + 8 + 32 + 32;
    if bytes.len() < cur.expected_len {
        return Err(Error::Truncated {
            expected: cur.expected_len,
            found: bytes.len(),
        });
    }
    if bytes.len() > cur.expected_len {
        return Err(Error::MalformedHeader(format!(
            "{} trailing bytes after the content hash",
            bytes.len() - cur.expected_len
        )));
    }
    let body_len = cur.expected_len - 32;
    let computed = Sha256::digest(&bytes[..body_len]);
    if computed.as_slice() != &bytes[body_len..] {
        return Err(Error::FingerprintMismatch {
            context: "checkpoint content hash",
            expected: hex(&bytes[body_len..]),
            found: hex(&computed),
        });
    }

    let output_scale = cur.f64()?;
    let mut layers = Vec::with_capacity(count - 1);
    for w in sizes.windows(2) {
        let (inputs, outputs) = (w[0], w[1]);
        let weight = (0..inputs * outputs)
            .map(|_| cur.f64())
            .collect::<Result<Vec<_>>>()?;
        let bias = (0..outputs)
            .map(|_| cur.f64())
            .collect::<Result<Vec<_>>>()?;
        layers.push(Layer {
            weight: Array2::from_shape_vec((outputs, inputs), weight).expect("sized"),
            bias: Array1::from(bias),
        });
    }
    let seed = u64::from_le_bytes(cur.take(8)?.try_into().unwrap());
    let fingerprint = Fingerprint(cur.take(32)?.try_into().unwrap());
    let params = MlpParams {
        layers,
        output_scale,
        seed,
        basis_fingerprint: fingerprint,
    };
    params.validate()?;
    Ok(params)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_checkpoint<W: Write>(params: &MlpParams, mut w: W) -> Result<()> {
    w.write_all(&encode(params))?;
    Ok(())
}

/// Reads a checkpoint; when `basis` is given, rejects a checkpoint trained against another basis.
pub fn read_checkpoint<R: Read>(mut r: R, basis: Option<&GraphBasis>) -> Result<MlpParams> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let params = decode(&bytes)?;
    if let Some(b) = basis {
        params.check_basis(b)?;
    }
    Ok(params)
}

pub fn save_checkpoint(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(params))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>, basis: Option<&GraphBasis>) -> Result<MlpParams> {
    read_checkpoint(fs::File::open(path)?, basis)
}
