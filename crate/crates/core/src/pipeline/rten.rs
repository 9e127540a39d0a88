//! RTEN v1, the canonical tensor byte format.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic   4 bytes  52 54 45 4E ("RTEN")
//! version u8       1
//! dtype   u8       1 = u8, 2 = f32
//! rank    u8
//! layout  u8       0 = none, 1 = NHWC, 2 = NCHW
//! dims    rank × u32
//! data    elements, row-major
//! ```
//!
//! The digest hash is FNV-1a-64 over exactly these bytes, so any change to
//! shape, dtype, layout tag, or data changes the digest.

use thiserror::Error;

use crate::imaging::{Dtype, Layout, Tensor, TensorData};

pub const RTEN_MAGIC: [u8; 4] = [0x52, 0x54, 0x45, 0x4E];
pub const RTEN_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum RtenError {
    #[error("bad magic, not an RTEN file")]
    BadMagic,
    #[error("unsupported RTEN version {0}")]
    BadVersion(u8),
    #[error("unknown dtype code {0}")]
    BadDtype(u8),
    #[error("unknown layout code {0}")]
    BadLayout(u8),
    #[error("truncated RTEN file: need {expected} bytes, found {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{got} trailing bytes after tensor payload")]
    TrailingBytes { got: usize },
    #[error("invalid tensor shape: {0}")]
    Shape(#[from] crate::imaging::ImagingError),
}

fn dtype_code(dtype: Dtype) -> u8 {
    match dtype {
        Dtype::U8 => 1,
        Dtype::F32 => 2,
    }
}

fn layout_code(layout: Option<Layout>) -> u8 {
    match layout {
        None => 0,
        Some(Layout::Nhwc) => 1,
        Some(Layout::Nchw) => 2,
    }
}

pub fn encode(t: &Tensor) -> Vec<u8> {
    let elem_size = match t.dtype() {
        Dtype::U8 => 1,
        Dtype::F32 => 4,
    };
    let mut out = Vec::with_capacity(8 + t.dims().len() * 4 + t.len() * elem_size);
    out.extend_from_slice(&RTEN_MAGIC);
    out.push(RTEN_VERSION);
    out.push(dtype_code(t.dtype()));
    out.push(t.dims().len() as u8);
    out.push(layout_code(t.layout()));
    for &d in t.dims() {
        out.extend_from_slice(&d.to_le_bytes());
    }
    match t.data() {
        TensorData::U8(v) => out.extend_from_slice(v),
        TensorData::F32(v) => {
            for &x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Tensor, RtenError> {
    if bytes.len() < 8 {
        return Err(RtenError::Truncated {
            expected: 8,
            got: bytes.len(),
        });
    }
    if bytes[0..4] != RTEN_MAGIC {
        return Err(RtenError::BadMagic);
    }
    if bytes[4] != RTEN_VERSION {
        return Err(RtenError::BadVersion(bytes[4]));
    }
    let dtype = match bytes[5] {
        1 => Dtype::U8,
        2 => Dtype::F32,
        other => return Err(RtenError::BadDtype(other)),
    };
    let rank = bytes[6] as usize;
    let layout = match bytes[7] {
        0 => None,
        1 => Some(Layout::Nhwc),
        2 => Some(Layout::Nchw),
        other => return Err(RtenError::BadLayout(other)),
    };
    let dims_end = 8 + rank * 4;
    if bytes.len() < dims_end {
        return Err(RtenError::Truncated {
            expected: dims_end,
            got: bytes.len(),
        });
    }
    let dims: Vec<u32> = (0..rank)
        .map(|i| {
            let at = 8 + i * 4;
            u32::from_le_bytes(bytes[at..at + 4].try_into().expect("bounds checked"))
        })
        .collect();
    let count: usize = dims.iter().map(|&d| d as usize).product();
    let elem_size = match dtype {
        Dtype::U8 => 1,
        Dtype::F32 => 4,
    };
    let payload_end = dims_end + count * elem_size;
    if bytes.len() < payload_end {
        return Err(RtenError::Truncated {
            expected: payload_end,
            got: bytes.len(),
        });
    }
    if bytes.len() > payload_end {
        return Err(RtenError::TrailingBytes {
            got: bytes.len() - payload_end,
        });
    }
    let payload = &bytes[dims_end..payload_end];
    let data = match dtype {
        Dtype::U8 => TensorData::U8(payload.to_vec()),
        Dtype::F32 => TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("chunks of 4")))
                .collect(),
        ),
    };
    Ok(Tensor::new(dims, layout, data)?)
}
