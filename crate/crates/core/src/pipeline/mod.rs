//! Deterministic execution of a manifest over raw input bytes.
//!
//! Stage order is fixed: decode → color → crop → resize → convert →
//! normalize → layout. Every stage is recorded in a [`StageTrace`];
//! identical (manifest, input) pairs produce bitwise-identical tensors and
//! digests run after run.

mod convert;
mod digest;
mod geometry;
mod normalize;
pub mod rten;

pub use convert::{byte_to_float, float_to_byte};
pub use digest::{digest, fnv1a64, fnv1a64_continue, Digest, FNV_OFFSET_BASIS, FNV_PRIME};
pub use geometry::{center_crop, resize};
pub use normalize::normalize;

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::imaging::{
    to_tensor, transpose_layout, AdapterRegistry, Dtype, Image, ImagingError, Layout, Tensor,
    CHANNELS,
};
use crate::manifest::{ConversionOrder, Manifest, NormDomain};

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: &'static str,
    pub duration_ns: u64,
    pub dims: Vec<u32>,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTrace {
    pub stages: Vec<StageRecord>,
    pub end_to_end_ns: u64,
}

impl StageTrace {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn stage_sum_ns(&self) -> u64 {
        self.stages.iter().map(|s| s.duration_ns).sum()
    }
}

#[derive(Debug, Error)]
pub enum PipelineErrorKind {
    #[error(transparent)]
    Decode(#[from] ImagingError),
    #[error("conversion order {order} requires domain {expected}, manifest declares {domain}")]
    DomainOrderMismatch {
        order: ConversionOrder,
        domain: NormDomain,
        expected: NormDomain,
    },
    #[error("stddev must be nonzero")]
    ZeroStddev,
    #[error("normalize requires an f32 tensor, got {0:?}")]
    NormalizeDtype(Dtype),
    #[error("normalize requires a layout-tagged rank-4 tensor")]
    NormalizeNoLayout,
    #[error("normalize requires 3 channels, got {0}")]
    NormalizeChannels(u32),
}

/// A stage failure, carrying the trace of everything that completed
/// before it.
#[derive(Debug, Error)]
#[error("pipeline stage `{stage}` failed: {kind}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub kind: PipelineErrorKind,
    pub partial_trace: StageTrace,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub tensor: Tensor,
    pub trace: StageTrace,
}

/// Anything a stage can emit into the trace summary.
pub trait StageOutput {
    fn summary_dims(&self) -> Vec<u32>;
    fn summary_range(&self) -> (f64, f64);
}

impl StageOutput for Image {
    fn summary_dims(&self) -> Vec<u32> {
        vec![self.height(), self.width(), CHANNELS]
    }

    fn summary_range(&self) -> (f64, f64) {
        self.value_range()
    }
}

impl StageOutput for Tensor {
    fn summary_dims(&self) -> Vec<u32> {
        self.dims().to_vec()
    }

    fn summary_range(&self) -> (f64, f64) {
        self.value_range()
    }
}

/// Times stages and accumulates their trace records. This is the one
/// dispatch path every stage goes through, which is also what the bench
/// harness measures when estimating its own overhead.
pub struct TraceBuilder {
    started: Instant,
    stages: Vec<StageRecord>,
}

impl TraceBuilder {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        Self {
            started: Instant::now(),
            stages: Vec::new(),
        }
    }

    /// Run a fallible stage. Only successful stages are recorded, so a
    /// failure leaves the trace at "everything up to the failure".
    pub fn run<T: StageOutput, E>(
        &mut self,
        stage: &'static str,
        f: impl FnOnce() -> Result<T, E>,
    ) -> Result<T, E> {
        let t0 = Instant::now();
        let out = f()?;
        let duration_ns = t0.elapsed().as_nanos() as u64;
        let (min, max) = out.summary_range();
        self.stages.push(StageRecord {
            stage,
            duration_ns,
            dims: out.summary_dims(),
            min,
            max,
        });
        Ok(out)
    }

    pub fn run_ok<T: StageOutput>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let result: Result<T, std::convert::Infallible> = self.run(stage, || Ok(f()));
        match result {
            Ok(v) => v,
        }
    }

    pub fn finish(self) -> StageTrace {
        StageTrace {
            end_to_end_ns: self.started.elapsed().as_nanos() as u64,
            stages: self.stages,
        }
    }
}

type StageFailure = (&'static str, PipelineErrorKind);

fn image_stages(
    m: &Manifest,
    input: &[u8],
    registry: &AdapterRegistry,
    tb: &mut TraceBuilder,
) -> Result<Image, StageFailure> {
    let img = tb
        .run("decode", || registry.decode_with(&m.decoder, input))
        .map_err(|e| ("decode", PipelineErrorKind::Decode(e)))?;
    let img = tb.run_ok("color", || img.convert_color(m.color_mode));
    let img = match &m.crop {
        Some(crop) => tb.run_ok("crop", || center_crop(&img, crop.fraction)),
        None => img,
    };
    Ok(tb.run_ok("resize", || {
        resize(&img, m.resize.method, m.resize.width, m.resize.height)
    }))
}

fn tensor_stages(m: &Manifest, img: &Image, tb: &mut TraceBuilder) -> Result<Tensor, StageFailure> {
    let t = tb.run_ok("convert", || match m.conversion_order {
        ConversionOrder::ConvertFirst => to_tensor(img, Layout::Nhwc, Dtype::F32),
        ConversionOrder::NormalizeFirst => byte_magnitude_tensor(img),
    });
    let t = tb
        .run("normalize", || {
            normalize(&t, &m.normalization, m.conversion_order)
        })
        .map_err(|kind| ("normalize", kind))?;
    Ok(tb.run_ok("layout", || {
        transpose_layout(&t, m.layout).expect("convert stage always tags layout")
    }))
}

/// Rank-4 NHWC f32 tensor of raw byte magnitudes (0..255), the value
/// domain NORMALIZE_FIRST arithmetic runs in.
fn byte_magnitude_tensor(img: &Image) -> Tensor {
    let dims = vec![1, img.height(), img.width(), CHANNELS];
    let data: Vec<f32> = img.samples().iter().map(|&x| x as f32).collect();
    Tensor::from_f32(dims, Some(Layout::Nhwc), data).expect("image dims always form a valid tensor")
}

/// Execute every stage of `m` over `input`.
pub fn run_pipeline(
    m: &Manifest,
    input: &[u8],
    registry: &AdapterRegistry,
) -> Result<PipelineRun, PipelineError> {
    let mut tb = TraceBuilder::new();
    let result =
        image_stages(m, input, registry, &mut tb).and_then(|img| tensor_stages(m, &img, &mut tb));
    match result {
        Ok(tensor) => Ok(PipelineRun {
            tensor,
            trace: tb.finish(),
        }),
        Err((stage, kind)) => Err(PipelineError {
            stage,
            kind,
            partial_trace: tb.finish(),
        }),
    }
}

/// Run only the image-valued stages (decode → color → crop → resize).
/// This is the byte-comparable intermediate the diff visualizer works on.
pub fn run_image_stages(
    m: &Manifest,
    input: &[u8],
    registry: &AdapterRegistry,
) -> Result<(Image, StageTrace), PipelineError> {
    let mut tb = TraceBuilder::new();
    match image_stages(m, input, registry, &mut tb) {
        Ok(img) => Ok((img, tb.finish())),
        Err((stage, kind)) => Err(PipelineError {
            stage,
            kind,
            partial_trace: tb.finish(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{encode_ppm, ColorMode};
    use crate::manifest::{
        CropKind, CropSpec, ManifestDtype, Normalization, ResizeMethod, ResizeSpec,
    };

    fn manifest(crop: Option<f64>, layout: Layout, color_mode: ColorMode) -> Manifest {
        Manifest {
            name: "test".into(),
            decoder: "ppm".into(),
            color_mode,
            crop: crop.map(|fraction| CropSpec {
                kind: CropKind::Center,
                fraction,
            }),
            resize: ResizeSpec {
                method: ResizeMethod::Bilinear,
                width: 4,
                height: 4,
            },
            conversion_order: ConversionOrder::ConvertFirst,
            normalization: Normalization {
                mean: [0.5; 3],
                stddev: [0.5; 3],
                domain: NormDomain::UnitScale,
            },
            layout,
            dtype: ManifestDtype::Float32,
        }
    }

    fn checker_ppm(h: u32, w: u32) -> Vec<u8> {
        let mut samples = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = if (x + y) % 2 == 0 { 200 } else { 30 };
                samples.extend_from_slice(&[v, v / 2, v / 3]);
            }
        }
        let img = Image::from_samples(h, w, samples, ColorMode::Rgb, "gen").unwrap();
        encode_ppm(&img)
    }

    #[test]
    fn stage_order_is_fixed_and_recorded() {
        let reg = AdapterRegistry::with_builtins();
        let m = manifest(Some(0.875), Layout::Nchw, ColorMode::Bgr);
        let run = run_pipeline(&m, &checker_ppm(16, 16), &reg).unwrap();
        let names: Vec<&str> = run.trace.stages.iter().map(|s| s.stage).collect();
        assert_eq!(
            names,
            [
                "decode",
                "color",
                "crop",
                "resize",
                "convert",
                "normalize",
                "layout"
            ]
        );
        assert_eq!(run.tensor.dims(), &[1, 3, 4, 4]);
        assert!(run.trace.stage_sum_ns() <= run.trace.end_to_end_ns);
    }

    #[test]
    fn crop_absent_means_no_crop_stage() {
        let reg = AdapterRegistry::with_builtins();
        let m = manifest(None, Layout::Nhwc, ColorMode::Rgb);
        let run = run_pipeline(&m, &checker_ppm(8, 8), &reg).unwrap();
        assert!(run.trace.stage("crop").is_none());
        assert_eq!(run.tensor.dims(), &[1, 4, 4, 3]);
    }

    #[test]
    fn color_mode_changes_digest_when_r_differs_from_b() {
        let reg = AdapterRegistry::with_builtins();
        let input = checker_ppm(8, 8); // R and B channels differ everywhere
        let rgb =
            run_pipeline(&manifest(None, Layout::Nhwc, ColorMode::Rgb), &input, &reg).unwrap();
        let bgr =
            run_pipeline(&manifest(None, Layout::Nhwc, ColorMode::Bgr), &input, &reg).unwrap();
        assert_ne!(digest(&rgb.tensor).hash, digest(&bgr.tensor).hash);
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let reg = AdapterRegistry::with_builtins();
        let m = manifest(Some(0.5), Layout::Nchw, ColorMode::Rgb);
        let input = checker_ppm(12, 10);
        let a = run_pipeline(&m, &input, &reg).unwrap();
        let b = run_pipeline(&m, &input, &reg).unwrap();
        assert_eq!(a.tensor, b.tensor);
        assert_eq!(digest(&a.tensor), digest(&b.tensor));
    }

    #[test]
    fn failed_stage_returns_partial_trace() {
        let reg = AdapterRegistry::with_builtins();
        let mut m = manifest(None, Layout::Nhwc, ColorMode::Rgb);
        m.normalization.domain = NormDomain::ByteScale; // inconsistent with convert_first
        let err = run_pipeline(&m, &checker_ppm(8, 8), &reg).unwrap_err();
        assert_eq!(err.stage, "normalize");
        let names: Vec<&str> = err.partial_trace.stages.iter().map(|s| s.stage).collect();
        assert_eq!(names, ["decode", "color", "resize", "convert"]);
    }

    #[test]
    fn decode_failure_aborts_with_empty_trace() {
        let reg = AdapterRegistry::with_builtins();
        let m = manifest(None, Layout::Nhwc, ColorMode::Rgb);
        let err = run_pipeline(&m, b"P5 not a p6", &reg).unwrap_err();
        assert_eq!(err.stage, "decode");
        assert!(err.partial_trace.stages.is_empty());
    }

    #[test]
    fn normalize_first_runs_on_byte_magnitudes() {
        let reg = AdapterRegistry::with_builtins();
        let mut m = manifest(None, Layout::Nhwc, ColorMode::Rgb);
        m.conversion_order = ConversionOrder::NormalizeFirst;
        m.normalization = Normalization {
            mean: [127.5; 3],
            stddev: [127.5; 3],
            domain: NormDomain::ByteScale,
        };
        let run = run_pipeline(&m, &checker_ppm(4, 4), &reg).unwrap();
        let (min, max) = run.tensor.value_range();
        assert!(min >= -1.0 && max <= 1.0, "range [{min}, {max}]");
    }
}
