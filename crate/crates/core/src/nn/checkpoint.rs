//! Debug checkpoints.
//!
//! Layout, all integers little-endian `u32` unless noted:
//!
//! ```text
//! magic            8 bytes  "SSTMLNN1"
//! input_side, stem_channels, n_stages, stage_channels[n_stages],
//! blocks_per_stage, n_classes
//! normalization    u8       0 = batch, 1 = none
//! variant          u8       0 = compact, 1 = resnet18
//! dtype            u8       4 = f32, 8 = f64
//! n_params
//!   per param: ndim, dims[ndim], values[prod(dims)]   (dtype width)
//! n_stats
//!   per stats: channels, mean[channels], var[channels] (dtype width)
//! ```

use std::io::{Read, Write};

use super::network::{init_network, ModelState, NetworkConfig, Normalization, Variant};
use super::tensor::Real;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SSTMLNN1";

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_real<T: Real>(out: &mut Vec<u8>, v: T) {
    if std::mem::size_of::<T>() == 4 {
        out.extend_from_slice(&v.to_f32().unwrap().to_le_bytes());
    } else {
        out.extend_from_slice(&v.to_f64().unwrap().to_le_bytes());
    }
}

pub fn to_bytes<T: Real>(model: &ModelState<T>) -> Vec<u8> {
    let c = model.config();
    let mut out = MAGIC.to_vec();
    put_u32(&mut out, c.input_side);
    put_u32(&mut out, c.stem_channels);
    put_u32(&mut out, c.stage_channels.len());
    c.stage_channels.iter().for_each(|s| put_u32(&mut out, *s));
    put_u32(&mut out, c.blocks_per_stage);
    put_u32(&mut out, c.n_classes);
    out.push(match c.normalization {
        Normalization::Batch => 0,
        Normalization::None => 1,
    });
    out.push(match c.variant {
        Variant::Compact => 0,
        Variant::Resnet18 => 1,
    });
    out.push(std::mem::size_of::<T>() as u8);
    put_u32(&mut out, model.params().len());
    for p in model.params() {
        put_u32(&mut out, p.shape().len());
        p.shape().iter().for_each(|d| put_u32(&mut out, *d));
        p.data().iter().for_each(|v| put_real(&mut out, *v));
    }
    put_u32(&mut out, model.running_stats().len());
    for r in model.running_stats() {
        put_u32(&mut out, r.mean.len());
        r.mean.iter().chain(&r.var).for_each(|v| put_real(&mut out, *v));
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::InvalidInput("checkpoint is truncated".into()));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn real<T: Real>(&mut self, width: u8) -> Result<T> {
        Ok(match width {
            4 => T::of(f64::from(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))),
            _ => T::of(f64::from_le_bytes(self.take(8)?.try_into().unwrap())),
        })
    }
}

pub fn from_bytes<T: Real>(buf: &[u8]) -> Result<ModelState<T>> {
    let mut cur = Cursor { buf, at: 0 };
    if cur.take(8)? != MAGIC {
        return Err(Error::InvalidInput("not a checkpoint (bad magic)".into()));
    }
    let input_side = cur.u32()?;
    let stem_channels = cur.u32()?;
    let n_stages = cur.u32()?;
    let stage_channels = (0..n_stages).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
    let blocks_per_stage = cur.u32()?;
    let n_classes = cur.u32()?;
    let normalization = match cur.u8()? {
        0 => Normalization::Batch,
        1 => Normalization::None,
        v => return Err(Error::InvalidInput(format!("unknown normalization code {v}"))),
    };
    let variant = match cur.u8()? {
        0 => Variant::Compact,
        1 => Variant::Resnet18,
        v => return Err(Error::InvalidInput(format!("unknown variant code {v}"))),
    };
    let width = cur.u8()?;
    if width != 4 && width != 8 {
        return Err(Error::InvalidInput(format!("unknown dtype width {width}")));
    }
    let config = NetworkConfig {
        input_side,
        stem_channels,
        stage_channels,
        blocks_per_stage,
        n_classes,
        normalization,
        variant,
    };
    let mut model = init_network::<T>(&config, 0)?;
    let n_params = cur.u32()?;
    if n_params != model.params().len() {
        return Err(Error::InvalidInput("parameter count does not match config".into()));
    }
    for p in model.params_mut() {
        let ndim = cur.u32()?;
        let shape = (0..ndim).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        p.expect_shape(&shape)?;
        for v in p.data_mut() {
            *v = cur.real(width)?;
        }
    }
    let n_stats = cur.u32()?;
    if n_stats != model.running_stats().len() {
        return Err(Error::InvalidInput("normalization layer count does not match config".into()));
    }
    for r in model.running_stats_mut() {
        if cur.u32()? != r.mean.len() {
            return Err(Error::InvalidInput("normalization width mismatch".into()));
        }
        for v in r.mean.iter_mut() {
            *v = cur.real(width)?;
        }
        for v in r.var.iter_mut() {
            *v = cur.real(width)?;
        }
    }
    if cur.at != buf.len() {
        return Err(Error::InvalidInput("trailing bytes after checkpoint".into()));
    }
    Ok(model)
}

pub fn save<T: Real>(model: &ModelState<T>, path: &std::path::Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load<T: Real>(path: &std::path::Path) -> Result<ModelState<T>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    from_bytes(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = NetworkConfig::compact(20);
        cfg.stage_channels = vec![4, 8];
        cfg.stem_channels = 4;
        let mut m = init_network::<f32>(&cfg, 9).unwrap();
        m.running_stats_mut()[0].mean[1] = 0.25;
        let bytes = to_bytes(&m);
        assert_eq!(&bytes[..8], MAGIC);
        let back: ModelState<f32> = from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert!(from_bytes::<f32>(&bytes[..bytes.len() - 1]).is_err());
    }
}
