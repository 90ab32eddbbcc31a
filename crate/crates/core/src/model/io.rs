//! Binary weight files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "DODOMDL\0"
//! version    u32      1
//! q, m, layers, channels, kernel, max_len   6 x u32
//! step       u64
//! count      u64      number of trainable parameters
//! theta      count x f64   (order given by ParamLayout)
//! running mean  m x f64
//! running var   m x f64
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::train::{EvalReport, TrainConfig};
use super::{ModelConfig, ModelParams};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DODOMDL\0";
pub const VERSION: u32 = 1;

pub fn params_to_bytes(params: &ModelParams) -> Vec<u8> {
    let c = &params.config;
    let mut out = Vec::with_capacity(64 + 8 * (params.theta.len() + 2 * c.m));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [c.q as u32, c.m as u32, c.layers as u32, c.channels as u32, c.kernel as u32, c.max_len as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&params.step.to_le_bytes());
    out.extend_from_slice(&(params.theta.len() as u64).to_le_bytes());
    for x in params.theta.iter().chain(&params.running_mean).chain(&params.running_var) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.buf.len() < n {
            return Err(Error::ModelFormat("truncated file".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::ModelFormat("size overflow".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader { buf: bytes };
    if r.take(8)? != MAGIC {
        return Err(Error::ModelFormat("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let mut f = [0u32; 6];
    for v in &mut f {
        *v = r.u32()?;
    }
    let config = ModelConfig {
        q: u8::try_from(f[0]).map_err(|_| Error::ModelFormat("bad alphabet".into()))?,
        m: f[1] as usize,
        layers: f[2] as usize,
        channels: f[3] as usize,
        kernel: f[4] as usize,
        max_len: f[5] as usize,
    };
    config.validate().map_err(|e| Error::ModelFormat(e.to_string()))?;
    let step = r.u64()?;
    let count = r.u64()? as usize;
    let expected = config.layout().total;
    if count != expected {
        return Err(Error::ConfigMismatch(format!("{count} parameters stored, configuration needs {expected}")));
    }
    let theta = r.f64s(count)?;
    let running_mean = r.f64s(config.m)?;
    let running_var = r.f64s(config.m)?;
    if !r.buf.is_empty() {
        return Err(Error::ConfigMismatch(format!("{} trailing bytes", r.buf.len())));
    }
    let params = ModelParams { config, theta, running_mean, running_var, step };
    params.check()?;
    Ok(params)
}

pub fn save_params(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    params.check()?;
    fs::write(path, params_to_bytes(params))?;
    Ok(())
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ModelParams> {
    params_from_bytes(&fs::read(path)?)
}

/// Loads and additionally checks the stored configuration against `expected`.
pub fn load_params_expecting(path: impl AsRef<Path>, expected: &ModelConfig) -> Result<ModelParams> {
    let params = load_params(path)?;
    if &params.config != expected {
        return Err(Error::ConfigMismatch(format!("file has {:?}, expected {:?}", params.config, expected)));
    }
    Ok(params)
}

/// Short content hash used to tie codebooks and reports to a model.
pub fn params_hash(params: &ModelParams) -> String {
    short_hash(&params_to_bytes(params))
}

pub fn short_hash(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

/// JSON description written next to a weight file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub model_hash: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// Mean batch loss over the last 1000 steps (or fewer).
    pub final_loss: f64,
    pub eval: Option<EvalReport>,
    /// Hash of the weights training started from, if not a fresh initialization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_hash: Option<String>,
}

impl ModelManifest {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Manifest path for a weight file: `model.bin` -> `model.json`.
pub fn manifest_path(weights: &Path) -> std::path::PathBuf {
    weights.with_extension("json")
}
