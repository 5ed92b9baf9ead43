//! `DSIN` model container.
//!
//! ```text
//! magic   b"DSIN"
//! version u32 = 1
//! input   u32 rank (= 3), then rank × u32 dims (c, h, w)
//! layers  u32 count, then per layer:
//!         u8 kind (0 conv2d, 1 dense, 2 relu, 3 maxpool2x2, 4 flatten)
//!         u32 rank, rank × u32 weight dims (rank 0 for parameter-free layers)
//!         weight payload, then bias payload of dims[0] values, both f64
//! ```
//! Integers and floats are little-endian; payloads are row-major.

use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{LayerSpec, Network, NetworkSpec, Params};
use crate::numerics::Tensor;

pub const MAGIC: &[u8; 4] = b"DSIN";
pub const VERSION: u32 = 1;

fn tag(layer: &LayerSpec) -> u8 {
    match layer {
        LayerSpec::Conv2d { .. } => 0,
        LayerSpec::Dense { .. } => 1,
        LayerSpec::Relu => 2,
        LayerSpec::MaxPool2x2 => 3,
        LayerSpec::Flatten => 4,
    }
}

pub fn encode_model(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    let put_u32 = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION as usize);
    put_u32(&mut out, 3);
    for d in net.spec().input_shape() {
        put_u32(&mut out, d);
    }
    put_u32(&mut out, net.spec().layers().len());
    let mut params = net.params().iter();
    for layer in net.spec().layers() {
        out.push(tag(layer));
        match layer.weight_shape() {
            Some(shape) => {
                put_u32(&mut out, shape.len());
                for &d in &shape {
                    put_u32(&mut out, d);
                }
                let p = params.next().expect("one parameter set per affine layer");
                for v in p.weight.data().iter().chain(p.bias.data()) {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            None => put_u32(&mut out, 0),
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::format(
                    self.bytes.len() as u64,
                    format!("truncated: needed {n} bytes at offset {}", self.pos),
                )
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::format(self.pos as u64, "payload too large"))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Network> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::format(0, "bad magic, not a DSIN model"));
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: VERSION,
        });
    }
    let rank_at = r.pos;
    if r.u32()? != 3 {
        return Err(Error::format(
            rank_at as u64,
            "input shape must have rank 3",
        ));
    }
    let input = [r.u32()?, r.u32()?, r.u32()?];
    let count = r.u32()?;
    let mut layers = Vec::with_capacity(count.min(1024));
    let mut params = Vec::new();
    for _ in 0..count {
        let at = r.pos as u64;
        let kind = r.u8()?;
        let rank = r.u32()?;
        if rank > 4 {
            return Err(Error::format(at, format!("implausible weight rank {rank}")));
        }
        let dims = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let layer = match (kind, dims.as_slice()) {
            (0, &[n, c, m, m2]) if m == m2 => LayerSpec::Conv2d {
                out_channels: n,
                kernel: m,
                in_channels: c,
            },
            (1, &[fan_out, fan_in]) => LayerSpec::Dense { fan_in, fan_out },
            (2, []) => LayerSpec::Relu,
            (3, []) => LayerSpec::MaxPool2x2,
            (4, []) => LayerSpec::Flatten,
            _ => {
                return Err(Error::format(
                    at,
                    format!("bad layer record: kind {kind} dims {dims:?}"),
                ))
            }
        };
        if layer.is_affine() {
            let n: usize = dims.iter().product();
            if n == 0 {
                return Err(Error::format(at, "zero-sized weight"));
            }
            let weight = Tensor::new(dims.clone(), r.f64s(n)?)?;
            let bias = Tensor::vector(r.f64s(dims[0])?);
            params.push(Params { weight, bias });
        }
        layers.push(layer);
    }
    if r.pos != bytes.len() {
        return Err(Error::format(
            r.pos as u64,
            "trailing bytes after last layer",
        ));
    }
    let class_count = match layers.last() {
        Some(LayerSpec::Dense { fan_out, .. }) => *fan_out,
        _ => {
            return Err(Error::format(
                bytes.len() as u64,
                "model does not end in a dense layer",
            ))
        }
    };
    let spec = NetworkSpec::new(input, layers, class_count)
        .map_err(|e| Error::format(0, format!("inconsistent layer chain: {e}")))?;
    Network::from_params(spec, params)
}

pub fn save_model(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), encode_model(net)).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Network> {
    let bytes = std::fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    decode_model(&bytes)
}
