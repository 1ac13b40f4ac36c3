//! Versioned binary model container. Byte layout is documented in
//! `docs/model-format.md`; all integers and floats are little-endian.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::stage::Stage;

use super::model::{Activation, AdamConfig, Aggregation, GcnConfig, GcnModel, Parameters, TargetNorm, OUTPUTS};

pub const MAGIC: &[u8; 8] = b"EDAPGCN\0";
pub const FORMAT_VERSION: u32 = 1;

/// Upper bound on any stored dimension; guards allocation on corrupt input.
const MAX_DIM: u32 = 1 << 16;

pub fn model_to_bytes(model: &GcnModel) -> Vec<u8> {
    let cfg = &model.config;
    let mut out = Vec::with_capacity(64 + 8 * model.params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(model.application.tag());
    out.push(match cfg.activation {
        Activation::Relu => 0,
        Activation::Identity => 1,
    });
    out.push(match cfg.aggregation {
        Aggregation::InNeighbors => 0,
        Aggregation::Undirected => 1,
    });
    out.push(model.target_norm.is_some() as u8);
    out.extend_from_slice(&model.seed.to_le_bytes());
    let mut put_u32 = |v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    put_u32(cfg.input_dim);
    put_u32(cfg.gcn_dims.len());
    for &d in &cfg.gcn_dims {
        put_u32(d);
    }
    put_u32(cfg.head_hidden);
    put_u32(OUTPUTS);
    let norm = model.target_norm.unwrap_or(TargetNorm {
        mean: [0.0; OUTPUTS],
        std: [0.0; OUTPUTS],
    });
    let floats = [cfg.adam.lr, cfg.adam.beta1, cfg.adam.beta2, cfg.adam.eps]
        .into_iter()
        .chain(norm.mean)
        .chain(norm.std);
    for f in floats {
        out.extend_from_slice(&f.to_le_bytes());
    }
    out.extend_from_slice(&(model.params.len() as u64).to_le_bytes());
    for t in model.params.tensors() {
        for v in t.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::ModelFormat("file is truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn dim(&mut self, what: &str) -> Result<usize> {
        let v = self.u32()?;
        if v == 0 || v > MAX_DIM {
            return Err(Error::ModelFormat(format!("implausible {what} {v}")));
        }
        Ok(v as usize)
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<GcnModel> {
    if bytes.len() < MAGIC.len() + 4 {
        return Err(Error::ModelFormat("file is truncated".into()));
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::ModelFormat("not a model file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    if bytes.len() < 16 {
        return Err(Error::ModelFormat("file is truncated".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(Error::ModelFormat("checksum mismatch (truncated or corrupt file)".into()));
    }

    let mut r = Reader { buf: body, pos: 12 };
    let application = Stage::from_tag(r.u8()?).ok_or_else(|| Error::ModelFormat("unknown application tag".into()))?;
    let activation = match r.u8()? {
        0 => Activation::Relu,
        1 => Activation::Identity,
        t => return Err(Error::ModelFormat(format!("unknown activation tag {t}"))),
    };
    let aggregation = match r.u8()? {
        0 => Aggregation::InNeighbors,
        1 => Aggregation::Undirected,
        t => return Err(Error::ModelFormat(format!("unknown aggregation tag {t}"))),
    };
    let has_norm = match r.u8()? {
        0 => false,
        1 => true,
        t => return Err(Error::ModelFormat(format!("bad normalization flag {t}"))),
    };
    let seed = r.u64()?;
    let input_dim = r.dim("input width")?;
    let layers = r.dim("layer count")?;
    if layers > 16 {
        return Err(Error::ModelFormat(format!("implausible layer count {layers}")));
    }
    let gcn_dims = (0..layers).map(|_| r.dim("layer width")).collect::<Result<Vec<_>>>()?;
    let head_hidden = r.dim("head width")?;
    let outputs = r.u32()?;
    if outputs as usize != OUTPUTS {
        return Err(Error::ModelFormat(format!("expected {OUTPUTS} outputs, file has {outputs}")));
    }
    let adam = AdamConfig {
        lr: r.f64()?,
        beta1: r.f64()?,
        beta2: r.f64()?,
        eps: r.f64()?,
    };
    let mut mean = [0.0; OUTPUTS];
    let mut std = [0.0; OUTPUTS];
    for m in &mut mean {
        *m = r.f64()?;
    }
    for s in &mut std {
        *s = r.f64()?;
    }
    let target_norm = if has_norm {
        Some(TargetNorm::new(mean, std).map_err(|_| Error::ModelFormat("invalid normalization statistics".into()))?)
    } else {
        None
    };
    let config = GcnConfig {
        input_dim,
        gcn_dims,
        head_hidden,
        activation,
        aggregation,
        adam,
    };
    let mut params = Parameters::zeros(&config);
    let count = r.u64()?;
    if count != params.len() as u64 {
        return Err(Error::ModelFormat(format!(
            "parameter count {count} does not match the architecture ({})",
            params.len()
        )));
    }
    for t in params.tensors_mut() {
        fill(t, &mut r)?;
    }
    if r.pos != body.len() {
        return Err(Error::ModelFormat("trailing bytes after parameters".into()));
    }
    Ok(GcnModel {
        config,
        params,
        target_norm,
        application,
        seed,
    })
}

fn fill(t: &mut DenseMatrix, r: &mut Reader<'_>) -> Result<()> {
    for v in t.as_mut_slice() {
        *v = r.f64()?;
    }
    Ok(())
}

/// Write atomically: the model goes to a sibling temp file that is then renamed.
pub fn save_model(model: &GcnModel, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp-model");
    std::fs::write(&tmp, model_to_bytes(model))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<GcnModel> {
    model_from_bytes(&std::fs::read(path)?)
}
