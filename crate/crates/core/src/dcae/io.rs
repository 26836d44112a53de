//! Binary model file (little-endian):
//!
//! ```text
//! "DCAE" | version u32 | input length u32 | widths 6 x u32 | rng seed u64
//! layer count u32, then per layer:
//!   kind u8 | name length u16 | name | in u32 | out u32 | kernel u32
//!   | stride u32 | factor u32 | activation u8 | has_bias u8
//! per layer: tensor count u32, then per tensor: length u32 | f64 values
//!   (batch-norm layers also carry eps f64 and momentum f64)
//! Adam: step u64 | tensor count u32 | first moments | second moments
//! CRC-32 of all preceding bytes, u32
//! ```

use super::{AdamState, Architecture, DcaeError, DcaeModel, LayerParams};
use crate::neural::{Activation, BatchNorm, ConvKernel, DenseWeights, LayerKind, LayerSpec};
use std::path::Path;

pub const MODEL_MAGIC: &[u8; 4] = b"DCAE";
pub const MODEL_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn tensor(&mut self, values: &[f64]) {
        self.u32(values.len() as u32);
        for &v in values {
            self.f64(v);
        }
    }
}

fn activation_code(a: Option<Activation>) -> u8 {
    match a {
        None => 0,
        Some(Activation::Relu) => 1,
        Some(Activation::Sigmoid) => 2,
    }
}

pub fn encode_model(model: &DcaeModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MODEL_MAGIC);
    w.u32(MODEL_VERSION);
    w.u32(model.architecture.input_length as u32);
    for &width in &model.architecture.widths {
        w.u32(width as u32);
    }
    w.u64(model.rng_seed);
    w.u32(model.layers.len() as u32);
    for spec in &model.layers {
        w.u8(spec.kind.code());
        w.u16(spec.name.len() as u16);
        w.0.extend_from_slice(spec.name.as_bytes());
        for v in [
            spec.in_channels,
            spec.out_channels,
            spec.kernel_size,
            spec.stride,
            spec.factor,
        ] {
            w.u32(v as u32);
        }
        w.u8(activation_code(spec.activation));
        w.u8(spec.has_bias as u8);
    }
    for p in &model.params {
        match p {
            LayerParams::Conv(k) => {
                w.u32(1);
                w.tensor(&k.data);
            }
            LayerParams::Dense(d) => {
                w.u32(1);
                w.tensor(&d.data);
            }
            LayerParams::BatchNorm(bn) => {
                w.u32(4);
                w.tensor(&bn.gamma);
                w.tensor(&bn.beta);
                w.tensor(&bn.running_mean);
                w.tensor(&bn.running_var);
                w.f64(bn.eps);
                w.f64(bn.momentum);
            }
            LayerParams::None => w.u32(0),
        }
    }
    let opt = &model.optimizer;
    w.u64(opt.step);
    w.u32(opt.first_moment.len() as u32);
    for m in opt.first_moment.iter().chain(&opt.second_moment) {
        w.tensor(m);
    }
    let crc = crc32fast::hash(&w.0);
    w.u32(crc);
    w.0
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DcaeError> {
        if self.bytes.len() - self.pos < n {
            return Err(DcaeError::CorruptFile(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, DcaeError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, DcaeError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, DcaeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, DcaeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, DcaeError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn tensor(&mut self, expected: usize) -> Result<Vec<f64>, DcaeError> {
        let n = self.u32()? as usize;
        if n != expected {
            return Err(DcaeError::CorruptFile(format!(
                "tensor of {n} values where {expected} were expected"
            )));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<DcaeModel, DcaeError> {
    if bytes.len() < 8 || &bytes[..4] != MODEL_MAGIC {
        return Err(DcaeError::CorruptFile("not a DCAE model file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(DcaeError::VersionMismatch {
            found: version,
            supported: MODEL_VERSION,
        });
    }
    if bytes.len() < 12 {
        return Err(DcaeError::CorruptFile("truncated".into()));
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
        return Err(DcaeError::CorruptFile("checksum mismatch".into()));
    }

    let mut r = Reader { bytes: body, pos: 8 };
    let input_length = r.u32()? as usize;
    let mut widths = [0usize; 6];
    for w in &mut widths {
        *w = r.u32()? as usize;
    }
    let architecture = Architecture {
        input_length,
        widths,
    };
    let rng_seed = r.u64()?;
    let mut model = DcaeModel::new(architecture, rng_seed)
        .map_err(|e| DcaeError::CorruptFile(e.to_string()))?;
    model.rng_seed = rng_seed;

    let n_layers = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n_layers.min(64));
    for _ in 0..n_layers {
        let kind = LayerKind::from_code(r.u8()?)
            .ok_or_else(|| DcaeError::CorruptFile("unknown layer kind".into()))?;
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| DcaeError::CorruptFile("layer name is not UTF-8".into()))?
            .to_string();
        let mut dims = [0usize; 5];
        for d in &mut dims {
            *d = r.u32()? as usize;
        }
        let activation = match r.u8()? {
            0 => None,
            1 => Some(Activation::Relu),
            2 => Some(Activation::Sigmoid),
            b => return Err(DcaeError::CorruptFile(format!("activation code {b}"))),
        };
        let has_bias = r.u8()? != 0;
        layers.push(LayerSpec {
            name,
            kind,
            in_channels: dims[0],
            out_channels: dims[1],
            kernel_size: dims[2],
            stride: dims[3],
            factor: dims[4],
            activation,
            has_bias,
        });
    }
    if layers != model.layers {
        return Err(DcaeError::CorruptFile(
            "layer table does not match the stored architecture".into(),
        ));
    }

    for (i, p) in model.params.iter_mut().enumerate() {
        let count = r.u32()?;
        match p {
            LayerParams::Conv(k) if count == 1 => {
                let data = r.tensor(k.data.len())?;
                *k = ConvKernel::from_vec(k.taps, k.in_channels, k.out_channels, data);
            }
            LayerParams::Dense(d) if count == 1 => {
                let data = r.tensor(d.data.len())?;
                *d = DenseWeights::from_vec(d.in_channels, d.out_channels, data);
            }
            LayerParams::BatchNorm(bn) if count == 4 => {
                let ch = bn.channels();
                *bn = BatchNorm {
                    gamma: r.tensor(ch)?,
                    beta: r.tensor(ch)?,
                    running_mean: r.tensor(ch)?,
                    running_var: r.tensor(ch)?,
                    eps: r.f64()?,
                    momentum: r.f64()?,
                };
            }
            LayerParams::None if count == 0 => {}
            _ => {
                return Err(DcaeError::CorruptFile(format!(
                    "layer {i}: unexpected tensor count {count}"
                )))
            }
        }
    }

    let step = r.u64()?;
    let n = r.u32()? as usize;
    let sizes: Vec<usize> = model.trainable_slices_mut().iter().map(|s| s.len()).collect();
    if n != 0 && n != sizes.len() {
        return Err(DcaeError::CorruptFile(format!("{n} optimizer tensors")));
    }
    let sizes = &sizes[..n];
    let first_moment = sizes.iter().map(|&s| r.tensor(s)).collect::<Result<_, _>>()?;
    let second_moment = sizes.iter().map(|&s| r.tensor(s)).collect::<Result<_, _>>()?;
    model.optimizer = AdamState {
        step,
        first_moment,
        second_moment,
    };
    if r.pos != body.len() {
        return Err(DcaeError::CorruptFile("trailing bytes".into()));
    }
    Ok(model)
}

pub fn save_model(model: &DcaeModel, path: &Path) -> Result<(), DcaeError> {
    std::fs::write(path, encode_model(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<DcaeModel, DcaeError> {
    decode_model(&std::fs::read(path)?)
}
