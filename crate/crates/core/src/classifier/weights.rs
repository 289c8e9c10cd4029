//! `PSDW1` weights container.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic        5 bytes  "PSDW1"
//! manifest     u32 byte length, then UTF-8 category names, one per line,
//!              in logit order
//! layer count  u32
//! descriptors  per layer: u8 kind, then u32 shape fields
//!                1 conv1d   input, output, kernel, relu (0|1)
//!                2 bilstm   input, hidden
//!                3 pool     -
//!                4 dense    input, output
//!                5 softmax  -
//! parameters   f32 blocks, row-major, in layer order
//!                conv1d  weights [out][kernel][in], bias [out]
//!                bilstm  forward w_ih [4H][in], w_hh [4H][H], bias [4H],
//!                        then the same three blocks for backward
//!                dense   weights [out][in], bias [out]
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::neural::{Activation, BiLstm, Conv1d, Dense, Layer, LstmDirection, NeuralModel};
use crate::category::Category;
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 5] = b"PSDW1";

const KIND_CONV: u8 = 1;
const KIND_BILSTM: u8 = 2;
const KIND_POOL: u8 = 3;
const KIND_DENSE: u8 = 4;
const KIND_SOFTMAX: u8 = 5;

/// Upper bound on any single block, guards allocations on corrupt headers.
const MAX_BLOCK: usize = 1 << 28;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::ModelFormat(format!("truncated weights file at byte {}", self.pos))
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        if n > MAX_BLOCK {
            return Err(Error::ModelFormat(format!("parameter block of {n} values is too large")));
        }
        Ok(self
            .take(n * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

enum Descriptor {
    Conv { input: usize, output: usize, kernel: usize, relu: bool },
    BiLstm { input: usize, hidden: usize },
    Pool,
    Dense { input: usize, output: usize },
    Softmax,
}

fn checked_product(parts: &[usize]) -> Result<usize> {
    parts
        .iter()
        .try_fold(1usize, |acc, &p| acc.checked_mul(p))
        .filter(|&n| n <= MAX_BLOCK)
        .ok_or_else(|| Error::ModelFormat("layer shape is too large".into()))
}

pub fn decode_weights(bytes: &[u8]) -> Result<NeuralModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(WEIGHTS_MAGIC.len()).map_err(|_| {
        Error::ModelFormat("file too short for a weights header".into())
    })?;
    if magic != WEIGHTS_MAGIC {
        if magic.starts_with(b"PSDW") {
            return Err(Error::VersionMismatch {
                expected: String::from_utf8_lossy(WEIGHTS_MAGIC).into_owned(),
                found: String::from_utf8_lossy(magic).into_owned(),
            });
        }
        return Err(Error::ModelFormat("not a weights file (bad magic)".into()));
    }

    let manifest_len = cur.u32()?;
    let manifest = std::str::from_utf8(cur.take(manifest_len)?)
        .map_err(|_| Error::ModelFormat("manifest is not UTF-8".into()))?;
    let categories = manifest
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.parse::<Category>()
                .map_err(|_| Error::ModelFormat(format!("unknown category `{l}` in manifest")))
        })
        .collect::<Result<Vec<_>>>()?;

    let count = cur.u32()?;
    let mut descriptors = Vec::new();
    for _ in 0..count {
        descriptors.push(match cur.u8()? {
            KIND_CONV => Descriptor::Conv {
                input: cur.u32()?,
                output: cur.u32()?,
                kernel: cur.u32()?,
                relu: match cur.u32()? {
                    0 => false,
                    1 => true,
                    other => return Err(Error::ModelFormat(format!("bad relu flag {other}"))),
                },
            },
            KIND_BILSTM => Descriptor::BiLstm {
                input: cur.u32()?,
                hidden: cur.u32()?,
            },
            KIND_POOL => Descriptor::Pool,
            KIND_DENSE => Descriptor::Dense {
                input: cur.u32()?,
                output: cur.u32()?,
            },
            KIND_SOFTMAX => Descriptor::Softmax,
            other => return Err(Error::ModelFormat(format!("unknown layer kind {other}"))),
        });
    }

    let mut layers = Vec::with_capacity(descriptors.len());
    for d in descriptors {
        layers.push(match d {
            Descriptor::Conv { input, output, kernel, relu } => Layer::Conv1d(Conv1d {
                input,
                output,
                kernel,
                activation: if relu { Activation::Relu } else { Activation::Linear },
                weights: cur.f32s(checked_product(&[output, kernel, input])?)?,
                bias: cur.f32s(output)?,
            }),
            Descriptor::BiLstm { input, hidden } => {
                let dir = |cur: &mut Cursor| -> Result<LstmDirection> {
                    Ok(LstmDirection {
                        w_ih: cur.f32s(checked_product(&[4, hidden, input])?)?,
                        w_hh: cur.f32s(checked_product(&[4, hidden, hidden])?)?,
                        bias: cur.f32s(checked_product(&[4, hidden])?)?,
                    })
                };
                let forward = dir(&mut cur)?;
                let backward = dir(&mut cur)?;
                Layer::BiLstm(BiLstm {
                    input,
                    hidden,
                    forward,
                    backward,
                })
            }
            Descriptor::Pool => Layer::MaskedMeanPool,
            Descriptor::Dense { input, output } => Layer::Dense(Dense {
                input,
                output,
                weights: cur.f32s(checked_product(&[output, input])?)?,
                bias: cur.f32s(output)?,
            }),
            Descriptor::Softmax => Layer::Softmax,
        });
    }
    if cur.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes after parameters",
            bytes.len() - cur.pos
        )));
    }
    NeuralModel::new(layers, categories)
}

pub fn encode_weights(model: &NeuralModel) -> Vec<u8> {
    let mut out = WEIGHTS_MAGIC.to_vec();
    let u32le = |out: &mut Vec<u8>, v: usize| out.extend((v as u32).to_le_bytes());
    let manifest: String = model
        .categories()
        .iter()
        .map(|c| format!("{c}\n"))
        .collect();
    u32le(&mut out, manifest.len());
    out.extend(manifest.as_bytes());
    u32le(&mut out, model.layers().len());
    for layer in model.layers() {
        match layer {
            Layer::Conv1d(c) => {
                out.push(KIND_CONV);
                for v in [c.input, c.output, c.kernel, (c.activation == Activation::Relu) as usize] {
                    u32le(&mut out, v);
                }
            }
            Layer::BiLstm(l) => {
                out.push(KIND_BILSTM);
                u32le(&mut out, l.input);
                u32le(&mut out, l.hidden);
            }
            Layer::MaskedMeanPool => out.push(KIND_POOL),
            Layer::Dense(d) => {
                out.push(KIND_DENSE);
                u32le(&mut out, d.input);
                u32le(&mut out, d.output);
            }
            Layer::Softmax => out.push(KIND_SOFTMAX),
        }
    }
    let floats = |out: &mut Vec<u8>, v: &[f32]| {
        for x in v {
            out.extend(x.to_le_bytes());
        }
    };
    for layer in model.layers() {
        match layer {
            Layer::Conv1d(c) => {
                floats(&mut out, &c.weights);
                floats(&mut out, &c.bias);
            }
            Layer::BiLstm(l) => {
                for d in [&l.forward, &l.backward] {
                    floats(&mut out, &d.w_ih);
                    floats(&mut out, &d.w_hh);
                    floats(&mut out, &d.bias);
                }
            }
            Layer::Dense(d) => {
                floats(&mut out, &d.weights);
                floats(&mut out, &d.bias);
            }
            Layer::MaskedMeanPool | Layer::Softmax => {}
        }
    }
    out
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<NeuralModel> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes)
}

pub fn write_weights(model: &NeuralModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&encode_weights(model)))
        .map_err(|e| Error::io(path, e))
}
