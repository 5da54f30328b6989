//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! magic "SMRK" | u32 version | u32 D | u32 H | u64 t
//! params (w1, b1, w2, b2) | adam m (same layout) | adam v (same layout)   all f64
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{AdamState, ModelParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SMRK";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub state: AdamState,
}

impl Checkpoint {
    pub fn expect_dims(&self, d: usize, h: Option<usize>) -> Result<()> {
        let (found_d, found_h) = (self.params.input_dim(), self.params.hidden_dim());
        if found_d != d || h.is_some_and(|h| h != found_h) {
            return Err(Error::CheckpointDims {
                found_d,
                found_h,
                expected_d: d,
                expected_h: h.unwrap_or(found_h),
            });
        }
        Ok(())
    }
}

pub fn encode(params: &ModelParams, state: &AdamState) -> Result<Vec<u8>> {
    if !params.same_shape(&state.m) || !params.same_shape(&state.v) {
        return Err(Error::ShapeMismatch("optimizer state does not match parameters".into()));
    }
    let n = params.num_params();
    let mut out = Vec::with_capacity(HEADER_LEN + 3 * n * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.input_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(params.hidden_dim() as u32).to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    for x in params.iter().chain(state.m.iter()).chain(state.v.iter()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptCheckpoint(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::CorruptCheckpoint("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = u32_at(4);
    if version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let d = u32_at(8) as usize;
    let h = u32_at(12) as usize;
    let t = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    if d == 0 || h == 0 {
        return Err(Error::CorruptCheckpoint(format!("invalid dims {d}x{h}")));
    }
    let n = ModelParams::count(d, h);
    let expected = HEADER_LEN + 3 * n * 8;
    if bytes.len() != expected {
        return Err(Error::CorruptCheckpoint(format!(
            "expected {expected} bytes for {d}x{h}, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Checkpoint {
        params: ModelParams::from_parts(d, h, &values[..n]),
        state: AdamState {
            m: ModelParams::from_parts(d, h, &values[n..2 * n]),
            v: ModelParams::from_parts(d, h, &values[2 * n..]),
            t,
        },
    })
}

/// Writes to a sibling temp file and renames it into place.
pub fn save_checkpoint(params: &ModelParams, state: &AdamState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(params, state)?;
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
