//! Divergence metrics between two images or two tensors: the silent-error
//! detector. Differing means differing exactly; there is no epsilon.

mod viz;

pub use viz::{dilate_gray, visualize_diff};

use serde::Serialize;
use thiserror::Error;

use crate::imaging::{Image, Tensor, TensorData};

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("image dimensions differ: {a_h}x{a_w} vs {b_h}x{b_w}")]
    DimensionMismatch {
        a_h: u32,
        a_w: u32,
        b_h: u32,
        b_w: u32,
    },
    #[error("color modes differ: {a} vs {b}")]
    ColorModeMismatch { a: String, b: String },
    #[error("tensor shapes differ: {a:?} vs {b:?}")]
    ShapeMismatch { a: Vec<u32>, b: Vec<u32> },
    #[error("tensor dtypes differ: {a:?} vs {b:?}")]
    DtypeMismatch { a: String, b: String },
    #[error("tensor layouts differ: {a:?} vs {b:?}")]
    LayoutMismatch { a: String, b: String },
    #[error("extreme thresholds must satisfy low < high, got {low} >= {high}")]
    BadThresholds { low: u8, high: u8 },
}

/// Byte-intensity cutoffs for "extreme" samples. Defaults approximate the
/// bottom and top decile of the byte range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremeThresholds {
    pub low: u8,
    pub high: u8,
}

impl Default for ExtremeThresholds {
    fn default() -> Self {
        Self { low: 25, high: 230 }
    }
}

impl ExtremeThresholds {
    pub fn new(low: u8, high: u8) -> Result<Self, DiffError> {
        if low >= high {
            return Err(DiffError::BadThresholds { low, high });
        }
        Ok(Self { low, high })
    }

    fn is_extreme(&self, v: u8) -> bool {
        v <= self.low || v >= self.high
    }
}

/// Element-level divergence between two sources.
///
/// `extreme_concentration` is the fraction of differing samples whose value
/// in either source sits at the extreme ends of the intensity range, the
/// signature of decoder divergence, which concentrates on edge pixels.
/// It is 0 when nothing differs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub count_differing: u64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub extreme_concentration: f64,
    pub total_elements: u64,
    pub provenance_a: String,
    pub provenance_b: String,
}

impl DiffReport {
    pub fn any_differ(&self) -> bool {
        self.count_differing > 0
    }
}

struct MetricAccumulator {
    count_differing: u64,
    extreme_differing: u64,
    sum_abs: f64,
    max_abs: f64,
    total: u64,
}

impl MetricAccumulator {
    fn new() -> Self {
        Self {
            count_differing: 0,
            extreme_differing: 0,
            sum_abs: 0.0,
            max_abs: 0.0,
            total: 0,
        }
    }

    fn push(&mut self, abs_diff: f64, extreme: bool) {
        self.total += 1;
        if abs_diff > 0.0 {
            self.count_differing += 1;
            if extreme {
                self.extreme_differing += 1;
            }
        }
        self.sum_abs += abs_diff;
        self.max_abs = self.max_abs.max(abs_diff);
    }

    fn report(self, provenance_a: String, provenance_b: String) -> DiffReport {
        DiffReport {
            count_differing: self.count_differing,
            max_abs: self.max_abs,
            mean_abs: if self.total == 0 {
                0.0
            } else {
                self.sum_abs / self.total as f64
            },
            extreme_concentration: if self.count_differing == 0 {
                0.0
            } else {
                self.extreme_differing as f64 / self.count_differing as f64
            },
            total_elements: self.total,
            provenance_a,
            provenance_b,
        }
    }
}

pub fn image_diff(a: &Image, b: &Image) -> Result<DiffReport, DiffError> {
    image_diff_with(a, b, ExtremeThresholds::default())
}

pub fn image_diff_with(
    a: &Image,
    b: &Image,
    thresholds: ExtremeThresholds,
) -> Result<DiffReport, DiffError> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(DiffError::DimensionMismatch {
            a_h: a.height(),
            a_w: a.width(),
            b_h: b.height(),
            b_w: b.width(),
        });
    }
    if a.color_mode() != b.color_mode() {
        return Err(DiffError::ColorModeMismatch {
            a: a.color_mode().to_string(),
            b: b.color_mode().to_string(),
        });
    }
    let mut acc = MetricAccumulator::new();
    for (&va, &vb) in a.samples().iter().zip(b.samples()) {
        let abs = (va as i16 - vb as i16).unsigned_abs() as f64;
        acc.push(abs, thresholds.is_extreme(va) || thresholds.is_extreme(vb));
    }
    Ok(acc.report(a.provenance().to_string(), b.provenance().to_string()))
}

pub fn tensor_diff(a: &Tensor, b: &Tensor) -> Result<DiffReport, DiffError> {
    tensor_diff_with(a, b, ExtremeThresholds::default())
}

/// Elementwise |a−b| metrics. For u8 tensors the extreme concentration uses
/// the byte thresholds; for f32 tensors it is not meaningful and stays 0.
pub fn tensor_diff_with(
    a: &Tensor,
    b: &Tensor,
    thresholds: ExtremeThresholds,
) -> Result<DiffReport, DiffError> {
    if a.dims() != b.dims() {
        return Err(DiffError::ShapeMismatch {
            a: a.dims().to_vec(),
            b: b.dims().to_vec(),
        });
    }
    if a.dtype() != b.dtype() {
        return Err(DiffError::DtypeMismatch {
            a: format!("{:?}", a.dtype()),
            b: format!("{:?}", b.dtype()),
        });
    }
    if a.layout() != b.layout() {
        return Err(DiffError::LayoutMismatch {
            a: format!("{:?}", a.layout()),
            b: format!("{:?}", b.layout()),
        });
    }
    let mut acc = MetricAccumulator::new();
    match (a.data(), b.data()) {
        (TensorData::U8(va), TensorData::U8(vb)) => {
            for (&xa, &xb) in va.iter().zip(vb) {
                let abs = (xa as i16 - xb as i16).unsigned_abs() as f64;
                acc.push(abs, thresholds.is_extreme(xa) || thresholds.is_extreme(xb));
            }
        }
        (TensorData::F32(va), TensorData::F32(vb)) => {
            for (&xa, &xb) in va.iter().zip(vb) {
                acc.push((xa as f64 - xb as f64).abs(), false);
            }
        }
        _ => unreachable!("dtype equality checked above"),
    }
    Ok(acc.report("tensor".into(), "tensor".into()))
}
