//! Per-channel mean/stddev normalization.
//!
//! The arithmetic is a per-channel affine `(v − mean)/stddev` in binary32;
//! what differs between conversion orders is the value domain the tensor is
//! expected to carry. A domain tag inconsistent with the order is a hard
//! error here; the validator warns about the same combination earlier.

use crate::imaging::{Dtype, Layout, Tensor, TensorData};
use crate::manifest::{ConversionOrder, NormDomain, Normalization};

use super::PipelineErrorKind;

pub fn normalize(
    t: &Tensor,
    norm: &Normalization,
    order: ConversionOrder,
) -> Result<Tensor, PipelineErrorKind> {
    let expected = match order {
        ConversionOrder::ConvertFirst => NormDomain::UnitScale,
        ConversionOrder::NormalizeFirst => NormDomain::ByteScale,
    };
    if norm.domain != expected {
        return Err(PipelineErrorKind::DomainOrderMismatch {
            order,
            domain: norm.domain,
            expected,
        });
    }
    if norm.stddev.contains(&0.0) {
        return Err(PipelineErrorKind::ZeroStddev);
    }
    if t.dtype() != Dtype::F32 {
        return Err(PipelineErrorKind::NormalizeDtype(t.dtype()));
    }
    let layout = t.layout().ok_or(PipelineErrorKind::NormalizeNoLayout)?;
    let dims = t.dims();
    let channels = match layout {
        Layout::Nhwc => dims[3],
        Layout::Nchw => dims[1],
    };
    if channels != 3 {
        return Err(PipelineErrorKind::NormalizeChannels(channels));
    }

    let mean: [f32; 3] = [
        norm.mean[0] as f32,
        norm.mean[1] as f32,
        norm.mean[2] as f32,
    ];
    let stddev: [f32; 3] = [
        norm.stddev[0] as f32,
        norm.stddev[1] as f32,
        norm.stddev[2] as f32,
    ];

    let src = match t.data() {
        TensorData::F32(v) => v,
        TensorData::U8(_) => unreachable!("dtype checked above"),
    };
    let mut out = Vec::with_capacity(src.len());
    match layout {
        Layout::Nhwc => {
            for (i, &v) in src.iter().enumerate() {
                let c = i % 3;
                out.push((v - mean[c]) / stddev[c]);
            }
        }
        Layout::Nchw => {
            let plane = (dims[2] as usize) * (dims[3] as usize);
            for (i, &v) in src.iter().enumerate() {
                let c = (i / plane) % 3;
                out.push((v - mean[c]) / stddev[c]);
            }
        }
    }
    Ok(Tensor::from_f32(dims.to_vec(), Some(layout), out).expect("normalization preserves shape"))
}
