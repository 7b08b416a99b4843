//! Binary tensor container.
//!
//! ```text
//! "TBF1" | version u8 | dtype u8 | ndim u8 | ndim × u64 LE dims | LE payload
//! ```
//!
//! Payload is row-major with the last index fastest; complex values are
//! interleaved `re, im`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::{Complex32, Complex64};

use crate::error::{FormatError, Result};

pub const MAGIC: [u8; 4] = *b"TBF1";
pub const VERSION: u8 = 1;
const FIXED_HEADER: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Dtype {
    F32 = 0,
    F64 = 1,
    C64 = 2,
    C128 = 3,
}

impl Dtype {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self, FormatError> {
        Ok(match code {
            0 => Self::F32,
            1 => Self::F64,
            2 => Self::C64,
            3 => Self::C128,
            c => return Err(FormatError::UnsupportedDtype(c)),
        })
    }

    /// Bytes per element.
    pub fn width(self) -> usize {
        match self {
            Self::F32 => 4,
            Self::F64 | Self::C64 => 8,
            Self::C128 => 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlobData {
    F32(Vec<f32>),
    F64(Vec<f64>),
    C64(Vec<Complex32>),
    C128(Vec<Complex64>),
}

impl BlobData {
    pub fn dtype(&self) -> Dtype {
        match self {
            Self::F32(_) => Dtype::F32,
            Self::F64(_) => Dtype::F64,
            Self::C64(_) => Dtype::C64,
            Self::C128(_) => Dtype::C128,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::F32(v) => v.len(),
            Self::F64(v) => v.len(),
            Self::C64(v) => v.len(),
            Self::C128(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorBlob {
    pub dims: Vec<usize>,
    pub data: BlobData,
}

fn element_count(dims: &[usize]) -> Result<usize, FormatError> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(FormatError::TruncatedHeader)
}

impl TensorBlob {
    pub fn new(dims: Vec<usize>, data: BlobData) -> Result<Self, FormatError> {
        if dims.is_empty() {
            return Err(FormatError::ZeroDims);
        }
        if dims.len() > u8::MAX as usize {
            return Err(FormatError::TooManyDims(dims.len()));
        }
        let expected = element_count(&dims)?;
        if expected != data.len() {
            return Err(FormatError::Length { expected, found: data.len() });
        }
        Ok(Self { dims, data })
    }

    pub fn dtype(&self) -> Dtype {
        self.data.dtype()
    }

    pub fn from_f64(a: &ArrayD<f64>) -> Result<Self, FormatError> {
        Self::new(a.shape().to_vec(), BlobData::F64(a.iter().copied().collect()))
    }

    pub fn from_f32(a: &ArrayD<f32>) -> Result<Self, FormatError> {
        Self::new(a.shape().to_vec(), BlobData::F32(a.iter().copied().collect()))
    }

    pub fn from_c128(a: &ArrayD<Complex64>) -> Result<Self, FormatError> {
        Self::new(a.shape().to_vec(), BlobData::C128(a.iter().copied().collect()))
    }

    /// Real view as `f64`; `None` for complex blobs.
    pub fn to_f64(&self) -> Option<ArrayD<f64>> {
        let v: Vec<f64> = match &self.data {
            BlobData::F32(v) => v.iter().map(|&x| f64::from(x)).collect(),
            BlobData::F64(v) => v.clone(),
            _ => return None,
        };
        ArrayD::from_shape_vec(IxDyn(&self.dims), v).ok()
    }

    /// Complex view as `Complex64`; `None` for real blobs.
    pub fn to_c128(&self) -> Option<ArrayD<Complex64>> {
        let v: Vec<Complex64> = match &self.data {
            BlobData::C64(v) => v.iter().map(|z| Complex64::new(z.re.into(), z.im.into())).collect(),
            BlobData::C128(v) => v.clone(),
            _ => return None,
        };
        ArrayD::from_shape_vec(IxDyn(&self.dims), v).ok()
    }
}

pub fn encode(blob: &TensorBlob) -> Vec<u8> {
    let mut out = Vec::with_capacity(FIXED_HEADER + 8 * blob.dims.len() + blob.data.len() * blob.dtype().width());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(blob.dtype().code());
    out.push(blob.dims.len() as u8);
    for &d in &blob.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match &blob.data {
        BlobData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        BlobData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        BlobData::C64(v) => v.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
        BlobData::C128(v) => v.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
    }
    out
}

fn f32_at(b: &[u8], i: usize) -> f32 {
    f32::from_le_bytes(b[4 * i..4 * i + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], i: usize) -> f64 {
    f64::from_le_bytes(b[8 * i..8 * i + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<TensorBlob, FormatError> {
    if bytes.len() < 4 {
        return Err(FormatError::TruncatedHeader);
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    if bytes.len() < FIXED_HEADER {
        return Err(FormatError::TruncatedHeader);
    }
    if bytes[4] != VERSION {
        return Err(FormatError::UnsupportedVersion(bytes[4]));
    }
    let dtype = Dtype::from_code(bytes[5])?;
    let ndim = bytes[6] as usize;
    if ndim == 0 {
        return Err(FormatError::ZeroDims);
    }
    let header = FIXED_HEADER + 8 * ndim;
    if bytes.len() < header {
        return Err(FormatError::TruncatedHeader);
    }
    let dims = bytes[FIXED_HEADER..header]
        .chunks_exact(8)
        .map(|c| usize::try_from(u64::from_le_bytes(c.try_into().unwrap())).map_err(|_| FormatError::TruncatedHeader))
        .collect::<Result<Vec<_>, _>>()?;
    let n = element_count(&dims)?;
    let expected = n.checked_mul(dtype.width()).ok_or(FormatError::TruncatedHeader)?;
    let payload = &bytes[header..];
    if payload.len() < expected {
        return Err(FormatError::TruncatedPayload { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(FormatError::TrailingBytes(payload.len() - expected));
    }
    let data = match dtype {
        Dtype::F32 => BlobData::F32((0..n).map(|i| f32_at(payload, i)).collect()),
        Dtype::F64 => BlobData::F64((0..n).map(|i| f64_at(payload, i)).collect()),
        Dtype::C64 => BlobData::C64((0..n).map(|i| Complex32::new(f32_at(payload, 2 * i), f32_at(payload, 2 * i + 1))).collect()),
        Dtype::C128 => BlobData::C128((0..n).map(|i| Complex64::new(f64_at(payload, 2 * i), f64_at(payload, 2 * i + 1))).collect()),
    };
    TensorBlob::new(dims, data)
}

pub fn write_tensor(path: impl AsRef<Path>, blob: &TensorBlob) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(blob))?;
    f.flush()?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<TensorBlob> {
    Ok(decode(&fs::read(path)?)?)
}
