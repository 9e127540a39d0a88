//! Image representation, decode adapters with provenance, and the
//! color-mode / tensor-layout transforms that silently change model inputs
//! when left unpinned.

mod adapters;
mod ppm;
mod tensor;

pub use adapters::{AdapterRegistry, ContainerFormat, DecodeAdapter};
pub use ppm::{decode_ppm, encode_ppm, PPM_REFERENCE_ID};
pub use tensor::{to_tensor, transpose_layout, Dtype, Tensor, TensorData};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Channel ordering of decoded pixels. OpenCV-lineage stacks decode BGR,
/// most others RGB; feeding one where the other is expected runs without
/// any visible failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    Rgb,
    Bgr,
}

impl std::fmt::Display for ColorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColorMode::Rgb => write!(f, "rgb"),
            ColorMode::Bgr => write!(f, "bgr"),
        }
    }
}

/// Memory ordering of a rank-4 input tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Nhwc,
    Nchw,
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Layout::Nhwc => write!(f, "nhwc"),
            Layout::Nchw => write!(f, "nchw"),
        }
    }
}

pub const CHANNELS: u32 = 3;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("sample buffer holds {got} bytes, expected {expected} for {height}x{width}x3")]
    SampleCountMismatch {
        height: u32,
        width: u32,
        expected: usize,
        got: usize,
    },
    #[error("image dimensions must be at least 1x1, got {height}x{width}")]
    EmptyImage { height: u32, width: u32 },
    #[error("unsupported PPM variant (magic {magic:?}, only binary P6 is accepted)")]
    PpmVariant { magic: String },
    #[error("malformed PPM header: {0}")]
    PpmHeader(String),
    #[error("PPM maxval {0} unsupported, only 255 is accepted")]
    PpmMaxval(u32),
    #[error("truncated PPM payload: need {expected} bytes, found {got}")]
    PpmTruncated { expected: usize, got: usize },
    #[error("unknown decode adapter `{id}`; registered: {registered}")]
    UnknownAdapter { id: String, registered: String },
    #[error("adapter `{id}` failed to decode: {message}")]
    DecodeFailed { id: String, message: String },
    #[error("adapter `{id}` rejected input: {message}")]
    UnsupportedInput { id: String, message: String },
    #[error("tensor dims {dims:?} do not match {got} elements")]
    DimsMismatch { dims: Vec<u32>, got: usize },
    #[error("tensor must have at least one dimension")]
    NoDims,
    #[error("layout {layout} requires rank 4, got rank {rank}")]
    LayoutRank { layout: Layout, rank: usize },
    #[error("tensor carries no layout tag, cannot transpose")]
    NoLayoutTag,
}

/// Decoded raster: H×W×3 interleaved 8-bit samples with a color-mode tag
/// and the identity of the decoder that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    height: u32,
    width: u32,
    samples: Vec<u8>,
    color_mode: ColorMode,
    provenance: String,
}

impl Image {
    pub fn from_samples(
        height: u32,
        width: u32,
        samples: Vec<u8>,
        color_mode: ColorMode,
        provenance: impl Into<String>,
    ) -> Result<Self, ImagingError> {
        if height == 0 || width == 0 {
            return Err(ImagingError::EmptyImage { height, width });
        }
        let expected = height as usize * width as usize * CHANNELS as usize;
        if samples.len() != expected {
            return Err(ImagingError::SampleCountMismatch {
                height,
                width,
                expected,
                got: samples.len(),
            });
        }
        Ok(Self {
            height,
            width,
            samples,
            color_mode,
            provenance: provenance.into(),
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn channels(&self) -> u32 {
        CHANNELS
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn color_mode(&self) -> ColorMode {
        self.color_mode
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Sample at (row, column, channel), row-major interleaved.
    pub fn sample(&self, y: u32, x: u32, c: u32) -> u8 {
        debug_assert!(y < self.height && x < self.width && c < CHANNELS);
        let idx =
            ((y as usize * self.width as usize) + x as usize) * CHANNELS as usize + c as usize;
        self.samples[idx]
    }

    /// Swap to the target channel order. Identity when the tag already
    /// matches; otherwise channels 0 and 2 are exchanged per pixel.
    pub fn convert_color(self, target: ColorMode) -> Image {
        if self.color_mode == target {
            return self;
        }
        let mut out = self;
        for px in out.samples.chunks_exact_mut(CHANNELS as usize) {
            px.swap(0, 2);
        }
        out.color_mode = target;
        out
    }

    pub(crate) fn value_range(&self) -> (f64, f64) {
        let mut min = u8::MAX;
        let mut max = u8::MIN;
        for &v in &self.samples {
            min = min.min(v);
            max = max.max(v);
        }
        (min as f64, max as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb_1x1(r: u8, g: u8, b: u8) -> Image {
        Image::from_samples(1, 1, vec![r, g, b], ColorMode::Rgb, "test").unwrap()
    }

    #[test]
    fn sample_count_enforced() {
        let err = Image::from_samples(2, 2, vec![0; 11], ColorMode::Rgb, "test").unwrap_err();
        assert!(matches!(
            err,
            ImagingError::SampleCountMismatch {
                expected: 12,
                got: 11,
                ..
            }
        ));
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(
            Image::from_samples(0, 3, vec![], ColorMode::Rgb, "test"),
            Err(ImagingError::EmptyImage { .. })
        ));
    }

    #[test]
    fn color_swap_permutes_channels() {
        let img = rgb_1x1(10, 20, 30).convert_color(ColorMode::Bgr);
        assert_eq!(img.samples(), &[30, 20, 10]);
        assert_eq!(img.color_mode(), ColorMode::Bgr);
    }

    #[test]
    fn color_swap_is_involution() {
        let img = rgb_1x1(1, 2, 3);
        let back = img
            .clone()
            .convert_color(ColorMode::Bgr)
            .convert_color(ColorMode::Rgb);
        assert_eq!(img, back);
    }

    #[test]
    fn same_mode_is_identity() {
        let img = rgb_1x1(9, 8, 7);
        let out = img.clone().convert_color(ColorMode::Rgb);
        assert_eq!(img, out);
    }
}
