//! Tensor digests: a canonical hash plus summary statistics, used as the
//! divergence witness wherever two pipelines should (or should not) agree.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::imaging::{Dtype, Tensor, TensorData};

use super::rten;

pub const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a-64 over a byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_continue(FNV_OFFSET_BASIS, bytes)
}

/// Fold more bytes into an existing FNV-1a-64 state.
pub fn fnv1a64_continue(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= b as u64;
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// Summary of a tensor: dims, dtype, element sum (binary64 accumulation in
/// index order), min, max, and the FNV-1a-64 hash of the canonical RTEN
/// serialization. Tensors with equal canonical bytes have equal digests.
#[derive(Debug, Clone, PartialEq)]
pub struct Digest {
    pub dims: Vec<u32>,
    pub dtype: Dtype,
    pub sum: f64,
    pub min: f64,
    pub max: f64,
    pub hash: u64,
}

impl Digest {
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash)
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Digest", 6)?;
        s.serialize_field("dims", &self.dims)?;
        s.serialize_field("dtype", &self.dtype)?;
        s.serialize_field("sum", &self.sum)?;
        s.serialize_field("min", &self.min)?;
        s.serialize_field("max", &self.max)?;
        s.serialize_field("hash", &self.hash_hex())?;
        s.end()
    }
}

pub fn digest(t: &Tensor) -> Digest {
    let bytes = rten::encode(t);
    let hash = fnv1a64(&bytes);
    let mut sum = 0.0f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    match t.data() {
        TensorData::U8(v) => {
            for &x in v {
                let x = x as f64;
                sum += x;
                min = min.min(x);
                max = max.max(x);
            }
        }
        TensorData::F32(v) => {
            for &x in v {
                let x = x as f64;
                sum += x;
                min = min.min(x);
                max = max.max(x);
            }
        }
    }
    Digest {
        dims: t.dims().to_vec(),
        dtype: t.dtype(),
        sum,
        min,
        max,
        hash,
    }
}
