//! Binary weight files.
//!
//! Layout: `b"CSNTCKPT"`, `u32` version, `u32` header length, a JSON header
//! (`kind`, free-form `meta`, and the shape table), then every tensor's
//! values as little-endian `f64` in table order. Base weights, the
//! appearance adapter and camera modules live in separate files so that
//! dropping an adapter is a matter of not opening its file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Adapter, AdapterRole, Affine, Denoiser, LoraFactors, ModelConfig, ToyError, TrajectoryEncoder};

pub const MAGIC: &[u8; 8] = b"CSNTCKPT";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: Value,
    tensors: Vec<TensorInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub meta: Value,
    pub tensors: Vec<(TensorInfo, Vec<f64>)>,
}

fn bad(msg: impl Into<String>) -> ToyError {
    ToyError::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn new(kind: &str, meta: Value) -> Self {
        Self { kind: kind.into(), meta, tensors: Vec::new() }
    }

    pub fn push(&mut self, name: &str, shape: &[usize], data: &[f64]) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.tensors.push((TensorInfo { name: name.into(), shape: shape.to_vec() }, data.to_vec()));
    }

    pub fn tensor(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>, ToyError> {
        let (info, data) =
            self.tensors.iter().find(|(i, _)| i.name == name).ok_or_else(|| bad(format!("missing tensor `{name}`")))?;
        if info.shape != shape {
            return Err(bad(format!("tensor `{name}` has shape {:?}, expected {shape:?}", info.shape)));
        }
        Ok(data.clone())
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = Header {
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            tensors: self.tensors.iter().map(|(i, _)| i.clone()).collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(16 + json.len() + 8 * self.tensors.iter().map(|t| t.1.len()).sum::<usize>());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, data) in &self.tensors {
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ToyError> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        let version = word(8);
        if version != VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let hlen = word(12) as usize;
        let hbytes = bytes.get(16..16 + hlen).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(hbytes).map_err(|e| bad(format!("header: {e}")))?;
        let mut at = 16 + hlen;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for info in header.tensors {
            let n: usize = info.shape.iter().product();
            let raw = bytes.get(at..at + 8 * n).ok_or_else(|| bad(format!("truncated data for `{}`", info.name)))?;
            let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            tensors.push((info, data));
            at += 8 * n;
        }
        if at != bytes.len() {
            return Err(bad(format!("{} trailing bytes", bytes.len() - at)));
        }
        Ok(Self { kind: header.kind, meta: header.meta, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<(), ToyError> {
        fs::write(path, self.encode()).map_err(|source| ToyError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ToyError> {
        let bytes = fs::read(path).map_err(|source| ToyError::Io { path: path.to_path_buf(), source })?;
        Self::decode(&bytes)
    }

    fn expect_kind(&self, kind: &str) -> Result<(), ToyError> {
        if self.kind != kind {
            return Err(bad(format!("expected a `{kind}` checkpoint, found `{}`", self.kind)));
        }
        Ok(())
    }
}

fn push_affine(c: &mut Checkpoint, name: &str, a: &Affine) {
    c.push(&format!("{name}.w"), &[a.rows, a.cols], &a.w);
    c.push(&format!("{name}.b"), &[a.rows], &a.b);
}

fn read_affine(c: &Checkpoint, name: &str, rows: usize, cols: usize) -> Result<Affine, ToyError> {
    Ok(Affine {
        rows,
        cols,
        w: c.tensor(&format!("{name}.w"), &[rows, cols])?,
        b: c.tensor(&format!("{name}.b"), &[rows])?,
    })
}

#[derive(Serialize, Deserialize)]
struct BaseMeta {
    model: ModelConfig,
    extra: Value,
}

/// Base denoiser plus the (frozen) encoder base weights.
pub fn base_checkpoint(model: &Denoiser, encoder: &TrajectoryEncoder, extra: Value) -> Checkpoint {
    let meta = serde_json::to_value(BaseMeta { model: model.config.clone(), extra }).expect("meta serializes");
    let mut c = Checkpoint::new("base", meta);
    push_affine(&mut c, "l1", &model.l1);
    push_affine(&mut c, "l2", &model.l2);
    push_affine(&mut c, "encoder", &encoder.base);
    c
}

pub fn base_from_checkpoint(c: &Checkpoint) -> Result<(Denoiser, TrajectoryEncoder, Value), ToyError> {
    c.expect_kind("base")?;
    let meta: BaseMeta = serde_json::from_value(c.meta.clone()).map_err(|e| bad(format!("base meta: {e}")))?;
    let cfg = meta.model;
    cfg.validate()?;
    let l1 = read_affine(c, "l1", cfg.hidden, cfg.input_dim())?;
    let l2 = read_affine(c, "l2", cfg.video_len(), cfg.hidden)?;
    let enc = read_affine(c, "encoder", cfg.n_motion, cfg.feature_dim())?;
    let encoder = TrajectoryEncoder { delta: Affine::zeros(enc.rows, enc.cols), base: enc };
    Ok((Denoiser { config: cfg, l1, l2 }, encoder, meta.extra))
}

#[derive(Serialize, Deserialize)]
struct AdapterMeta {
    role: AdapterRole,
    layers: Vec<[usize; 3]>,
    alpha: f64,
}

pub fn adapter_checkpoint(a: &Adapter) -> Checkpoint {
    let meta = AdapterMeta {
        role: a.role,
        layers: a.layers.iter().map(|l| [l.rows, l.cols, l.rank]).collect(),
        alpha: a.layers.first().map_or(1.0, |l| l.alpha),
    };
    let mut c = Checkpoint::new("adapter", serde_json::to_value(meta).expect("meta serializes"));
    for (i, l) in a.layers.iter().enumerate() {
        c.push(&format!("layer{i}.a"), &[l.rank, l.cols], &l.a);
        c.push(&format!("layer{i}.b"), &[l.rows, l.rank], &l.b);
    }
    c
}

pub fn adapter_from_checkpoint(c: &Checkpoint) -> Result<Adapter, ToyError> {
    c.expect_kind("adapter")?;
    let meta: AdapterMeta = serde_json::from_value(c.meta.clone()).map_err(|e| bad(format!("adapter meta: {e}")))?;
    let layers = meta
        .layers
        .iter()
        .enumerate()
        .map(|(i, &[rows, cols, rank])| {
            Ok(LoraFactors {
                rows,
                cols,
                rank,
                alpha: meta.alpha,
                a: c.tensor(&format!("layer{i}.a"), &[rank, cols])?,
                b: c.tensor(&format!("layer{i}.b"), &[rows, rank])?,
            })
        })
        .collect::<Result<_, ToyError>>()?;
    Ok(Adapter { role: meta.role, layers })
}

pub fn encoder_delta_checkpoint(delta: &Affine) -> Checkpoint {
    let mut c = Checkpoint::new("encoder_delta", Value::Null);
    push_affine(&mut c, "delta", delta);
    c
}

pub fn encoder_delta_from_checkpoint(c: &Checkpoint, encoder: &TrajectoryEncoder) -> Result<Affine, ToyError> {
    c.expect_kind("encoder_delta")?;
    read_affine(c, "delta", encoder.base.rows, encoder.base.cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trips_are_bit_exact() {
        let cfg = ModelConfig { frames: 2, height: 3, width: 3, hidden: 5, ..ModelConfig::default() };
        let m = Denoiser::new(cfg.clone(), 4).unwrap();
        let e = TrajectoryEncoder::new(&cfg, 5);
        let c = base_checkpoint(&m, &e, json!({"note": 1}));
        let back = Checkpoint::decode(&c.encode()).unwrap();
        let (m2, e2, extra) = base_from_checkpoint(&back).unwrap();
        assert_eq!((m2.checksum(), e2.base_checksum()), (m.checksum(), e.base_checksum()));
        assert_eq!(extra, json!({"note": 1}));

        let mut a = Adapter::new(AdapterRole::Camera, &cfg, 3, Some(1.5), 6).unwrap();
        a.layers[1].b[2] = 0.25;
        let a2 = adapter_from_checkpoint(&Checkpoint::decode(&adapter_checkpoint(&a).encode()).unwrap()).unwrap();
        assert_eq!(a, a2);
        assert!(adapter_from_checkpoint(&back).is_err());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let cfg = ModelConfig { frames: 2, height: 2, width: 2, hidden: 3, ..ModelConfig::default() };
        let a = Adapter::new(AdapterRole::Appearance, &cfg, 2, None, 1).unwrap();
        let bytes = adapter_checkpoint(&a).encode();
        assert!(bytes.starts_with(MAGIC));
        assert!(Checkpoint::decode(&bytes[..bytes.len() - 3]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(Checkpoint::decode(&wrong).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(Checkpoint::decode(&extra).is_err());
    }
}
