//! N-dimensional numeric arrays with explicit dtype and layout tags.
//!
//! The layout tag travels with the data so a consumer expecting NCHW can
//! detect an NHWC tensor instead of silently reading transposed values.

use serde::Serialize;

use super::{Image, ImagingError, Layout, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U8,
    F32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            TensorData::U8(_) => Dtype::U8,
            TensorData::F32(_) => Dtype::F32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<u32>,
    layout: Option<Layout>,
    data: TensorData,
}

impl Tensor {
    pub fn new(
        dims: Vec<u32>,
        layout: Option<Layout>,
        data: TensorData,
    ) -> Result<Self, ImagingError> {
        if dims.is_empty() {
            return Err(ImagingError::NoDims);
        }
        let count = dims.iter().try_fold(1usize, |acc, &d| {
            if d == 0 {
                None
            } else {
                acc.checked_mul(d as usize)
            }
        });
        match count {
            Some(n) if n == data.len() => {}
            _ => {
                return Err(ImagingError::DimsMismatch {
                    dims,
                    got: data.len(),
                })
            }
        }
        if let Some(layout) = layout {
            if dims.len() != 4 {
                return Err(ImagingError::LayoutRank {
                    layout,
                    rank: dims.len(),
                });
            }
        }
        Ok(Self { dims, layout, data })
    }

    pub fn from_u8(
        dims: Vec<u32>,
        layout: Option<Layout>,
        data: Vec<u8>,
    ) -> Result<Self, ImagingError> {
        Self::new(dims, layout, TensorData::U8(data))
    }

    pub fn from_f32(
        dims: Vec<u32>,
        layout: Option<Layout>,
        data: Vec<f32>,
    ) -> Result<Self, ImagingError> {
        Self::new(dims, layout, TensorData::F32(data))
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn layout(&self) -> Option<Layout> {
        self.layout
    }

    pub fn dtype(&self) -> Dtype {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            TensorData::F32(v) => Some(v),
            TensorData::U8(_) => None,
        }
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.data {
            TensorData::U8(v) => Some(v),
            TensorData::F32(_) => None,
        }
    }

    /// Element min/max as f64, for trace summaries.
    pub fn value_range(&self) -> (f64, f64) {
        match &self.data {
            TensorData::U8(v) => {
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for &x in v {
                    min = min.min(x as f64);
                    max = max.max(x as f64);
                }
                (min, max)
            }
            TensorData::F32(v) => {
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for &x in v {
                    min = min.min(x as f64);
                    max = max.max(x as f64);
                }
                (min, max)
            }
        }
    }
}

/// Pack a decoded image into a rank-4 tensor with batch dimension 1.
///
/// NHWC keeps the interleaved sample order; NCHW gathers each channel
/// plane. `Dtype::F32` applies the x/255 convert rule to every sample.
pub fn to_tensor(img: &Image, layout: Layout, dtype: Dtype) -> Tensor {
    let h = img.height();
    let w = img.width();
    let c = CHANNELS;
    let dims = match layout {
        Layout::Nhwc => vec![1, h, w, c],
        Layout::Nchw => vec![1, c, h, w],
    };
    let n = img.samples().len();
    let gather: Box<dyn Fn(usize) -> u8> = match layout {
        Layout::Nhwc => {
            let s = img.samples();
            Box::new(move |i| s[i])
        }
        Layout::Nchw => {
            let s = img.samples();
            let (hu, wu, cu) = (h as usize, w as usize, c as usize);
            Box::new(move |i| {
                // output index (c, y, x) -> input index (y, x, c)
                let ch = i / (hu * wu);
                let rem = i % (hu * wu);
                let y = rem / wu;
                let x = rem % wu;
                s[(y * wu + x) * cu + ch]
            })
        }
    };
    let data = match dtype {
        Dtype::U8 => TensorData::U8((0..n).map(&gather).collect()),
        Dtype::F32 => TensorData::F32(
            (0..n)
                .map(|i| crate::pipeline::byte_to_float(gather(i)))
                .collect(),
        ),
    };
    Tensor::new(dims, Some(layout), data).expect("image dims always form a valid tensor")
}

/// Reorder a rank-4 tensor to the target layout, preserving logical
/// (n, c, y, x) addressing. Transposing to the current layout is the
/// identity.
pub fn transpose_layout(t: &Tensor, target: Layout) -> Result<Tensor, ImagingError> {
    let current = t.layout().ok_or(ImagingError::NoLayoutTag)?;
    if current == target {
        return Ok(t.clone());
    }
    let d = t.dims();
    let (n, c, h, w) = match current {
        Layout::Nhwc => (d[0], d[3], d[1], d[2]),
        Layout::Nchw => (d[0], d[1], d[2], d[3]),
    };
    let (nu, cu, hu, wu) = (n as usize, c as usize, h as usize, w as usize);
    // index of logical (b, ch, y, x) in a buffer of the given layout
    let src_index = |b: usize, ch: usize, y: usize, x: usize| -> usize {
        match current {
            Layout::Nhwc => ((b * hu + y) * wu + x) * cu + ch,
            Layout::Nchw => ((b * cu + ch) * hu + y) * wu + x,
        }
    };
    let dims = match target {
        Layout::Nhwc => vec![n, h, w, c],
        Layout::Nchw => vec![n, c, h, w],
    };
    let total = nu * cu * hu * wu;
    let data = match t.data() {
        TensorData::U8(src) => {
            let mut out = Vec::with_capacity(total);
            fill_transposed(&mut out, src, target, (nu, cu, hu, wu), src_index);
            TensorData::U8(out)
        }
        TensorData::F32(src) => {
            let mut out = Vec::with_capacity(total);
            fill_transposed(&mut out, src, target, (nu, cu, hu, wu), src_index);
            TensorData::F32(out)
        }
    };
    Tensor::new(dims, Some(target), data)
}

fn fill_transposed<T: Copy>(
    out: &mut Vec<T>,
    src: &[T],
    target: Layout,
    shape: (usize, usize, usize, usize),
    src_index: impl Fn(usize, usize, usize, usize) -> usize,
) {
    let (n, c, h, w) = shape;
    match target {
        Layout::Nchw => {
            for b in 0..n {
                for ch in 0..c {
                    for y in 0..h {
                        for x in 0..w {
                            out.push(src[src_index(b, ch, y, x)]);
                        }
                    }
                }
            }
        }
        Layout::Nhwc => {
            for b in 0..n {
                for y in 0..h {
                    for x in 0..w {
                        for ch in 0..c {
                            out.push(src[src_index(b, ch, y, x)]);
                        }
                    }
                }
            }
        }
    }
}
