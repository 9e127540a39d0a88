//! Shared oracles and fixture builders for the integration suites.
//!
//! Every oracle here is a deliberately naive, straight-line implementation
//! coded independently of the engine it checks. They share the normative
//! conventions (the half-pixel resize mapping, nearest-rank percentiles,
//! the 5×5 structuring element) but never the engine's code path.

#![allow(dead_code)]

use pixelproof_core::imaging::{ColorMode, Image, Layout, Tensor, TensorData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- fixtures

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, height: u32, width: u32) -> Image {
    let samples: Vec<u8> = (0..(height * width * 3)).map(|_| rng.gen()).collect();
    Image::from_samples(height, width, samples, ColorMode::Rgb, "fixture").unwrap()
}

/// Binary P6 bytes with a canonical header and the given raster payload.
pub fn ppm_bytes(height: u32, width: u32, payload: &[u8]) -> Vec<u8> {
    assert_eq!(payload.len(), (height * width * 3) as usize);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(payload);
    out
}

/// 4×4 gradient where every pixel value is 16·(4y + x) in all channels.
pub fn gradient_4x4() -> Image {
    let mut samples = Vec::new();
    for y in 0..4u32 {
        for x in 0..4u32 {
            let v = (16 * (4 * y + x)) as u8;
            samples.extend_from_slice(&[v, v, v]);
        }
    }
    Image::from_samples(4, 4, samples, ColorMode::Rgb, "fixture").unwrap()
}

// ------------------------------------------------------------- resize oracle

fn clamp_src(src: f64, in_dim: u32) -> f64 {
    if src < 0.0 {
        0.0
    } else if src > (in_dim - 1) as f64 {
        (in_dim - 1) as f64
    } else {
        src
    }
}

/// Straight-line nearest-neighbor interpolator: per output pixel, evaluate
/// the half-pixel mapping inline and round half up.
pub fn oracle_resize_nearest(img: &Image, out_w: u32, out_h: u32) -> Vec<u8> {
    let mut out = Vec::new();
    for dy in 0..out_h {
        for dx in 0..out_w {
            let sy = clamp_src(
                (dy as f64 + 0.5) * (img.height() as f64 / out_h as f64) - 0.5,
                img.height(),
            );
            let sx = clamp_src(
                (dx as f64 + 0.5) * (img.width() as f64 / out_w as f64) - 0.5,
                img.width(),
            );
            let mut iy = (sy + 0.5).floor() as i64;
            let mut ix = (sx + 0.5).floor() as i64;
            if iy > (img.height() - 1) as i64 {
                iy = (img.height() - 1) as i64;
            }
            if ix > (img.width() - 1) as i64 {
                ix = (img.width() - 1) as i64;
            }
            for c in 0..3 {
                out.push(img.sample(iy as u32, ix as u32, c));
            }
        }
    }
    out
}

/// Straight-line bilinear interpolator: fractional weights in binary32,
/// accumulation in binary32, round half up to bytes.
pub fn oracle_resize_bilinear(img: &Image, out_w: u32, out_h: u32) -> Vec<u8> {
    let mut out = Vec::new();
    for dy in 0..out_h {
        for dx in 0..out_w {
            let sy = clamp_src(
                (dy as f64 + 0.5) * (img.height() as f64 / out_h as f64) - 0.5,
                img.height(),
            );
            let sx = clamp_src(
                (dx as f64 + 0.5) * (img.width() as f64 / out_w as f64) - 0.5,
                img.width(),
            );
            let y0 = sy.floor() as u32;
            let x0 = sx.floor() as u32;
            let y1 = if y0 + 1 > img.height() - 1 {
                img.height() - 1
            } else {
                y0 + 1
            };
            let x1 = if x0 + 1 > img.width() - 1 {
                img.width() - 1
            } else {
                x0 + 1
            };
            let fy = (sy - y0 as f64) as f32;
            let fx = (sx - x0 as f64) as f32;
            for c in 0..3 {
                let v00 = img.sample(y0, x0, c) as f32;
                let v01 = img.sample(y0, x1, c) as f32;
                let v10 = img.sample(y1, x0, c) as f32;
                let v11 = img.sample(y1, x1, c) as f32;
                let top = (1.0 - fx) * v00 + fx * v01;
                let bottom = (1.0 - fx) * v10 + fx * v11;
                let value = (1.0 - fy) * top + fy * bottom;
                let rounded = (value + 0.5).floor();
                out.push(if rounded <= 0.0 {
                    0
                } else if rounded >= 255.0 {
                    255
                } else {
                    rounded as u8
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------- transpose oracle

/// Brute-force NHWC→NCHW data reorder by exhaustive index enumeration,
/// with strides recomputed from scratch.
pub fn oracle_nhwc_to_nchw(t: &Tensor) -> Vec<u8> {
    assert_eq!(t.layout(), Some(Layout::Nhwc));
    let d = t.dims();
    let (n, h, w, c) = (d[0] as usize, d[1] as usize, d[2] as usize, d[3] as usize);
    let src = match t.data() {
        TensorData::U8(v) => v,
        TensorData::F32(_) => panic!("oracle handles u8 tensors"),
    };
    let mut out = Vec::with_capacity(src.len());
    for b in 0..n {
        for ch in 0..c {
            for y in 0..h {
                for x in 0..w {
                    let flat_in = b * (h * w * c) + y * (w * c) + x * c + ch;
                    out.push(src[flat_in]);
                }
            }
        }
    }
    out
}

// ----------------------------------------------------------- dilation oracle

/// Nested-loop grayscale dilation with a 5×5 square structuring element;
/// the window is intersected with the image at the borders.
pub fn oracle_dilate(plane: &[u8], width: u32, height: u32) -> Vec<u8> {
    let w = width as i64;
    let h = height as i64;
    let mut out = Vec::with_capacity(plane.len());
    for y in 0..h {
        for x in 0..w {
            let mut best = 0u8;
            for dy in -2..=2i64 {
                for dx in -2..=2i64 {
                    let ny = y + dy;
                    let nx = x + dx;
                    if ny >= 0 && ny < h && nx >= 0 && nx < w {
                        let v = plane[(ny * w + nx) as usize];
                        if v > best {
                            best = v;
                        }
                    }
                }
            }
            out.push(best);
        }
    }
    out
}

// -------------------------------------------------------------- stats oracle

pub struct OracleStats {
    pub count: u64,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    pub median: u64,
    pub p90: u64,
    pub p99: u64,
    pub stddev: f64,
}

/// Sort-and-index statistics: nearest-rank percentile `⌈p/100·n⌉−1` on the
/// sorted copy, population stddev accumulated in ascending order.
pub fn oracle_stats(samples: &[u64]) -> OracleStats {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort();
    let n = sorted.len();
    let pick = |p: f64| -> u64 {
        let mut rank = (p / 100.0 * n as f64).ceil() as usize;
        if rank == 0 {
            rank = 1;
        }
        sorted[rank - 1]
    };
    let mean = sorted.iter().map(|&v| v as u128).sum::<u128>() as f64 / n as f64;
    let variance = sorted
        .iter()
        .map(|&v| {
            let d = v as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    OracleStats {
        count: n as u64,
        min: sorted[0],
        max: sorted[n - 1],
        mean,
        median: pick(50.0),
        p90: pick(90.0),
        p99: pick(99.0),
        stddev: variance.sqrt(),
    }
}

// ------------------------------------------------------- manifest generator

pub fn random_manifest(rng: &mut ChaCha8Rng) -> pixelproof_core::manifest::Manifest {
    use pixelproof_core::manifest::*;

    let name_pool = [
        "inception-v3",
        "resnet 50",
        "model \"quoted\"",
        "x",
        "vision/backbone@2",
    ];
    let decoder_pool = [
        "ppm",
        "ppm:reference",
        "jpeg:zune@0.5",
        "jpeg:jpeg-decoder@0.3",
    ];
    let order = if rng.gen() {
        ConversionOrder::ConvertFirst
    } else {
        ConversionOrder::NormalizeFirst
    };
    // keep the domain consistent with the order so generated manifests are
    // runnable as well as parseable
    let domain = match order {
        ConversionOrder::ConvertFirst => NormDomain::UnitScale,
        ConversionOrder::NormalizeFirst => NormDomain::ByteScale,
    };
    let scale = match domain {
        NormDomain::UnitScale => 1.0,
        NormDomain::ByteScale => 255.0,
    };
    let mut stddev = [0.0; 3];
    for s in &mut stddev {
        let v: f64 = rng.gen_range(0.05..1.0) * scale;
        *s = if rng.gen() { v } else { -v };
    }
    Manifest {
        name: name_pool[rng.gen_range(0..name_pool.len())].to_string(),
        decoder: decoder_pool[rng.gen_range(0..decoder_pool.len())].to_string(),
        color_mode: if rng.gen() {
            ColorMode::Rgb
        } else {
            ColorMode::Bgr
        },
        crop: if rng.gen() {
            Some(CropSpec {
                kind: CropKind::Center,
                fraction: rng.gen_range(0.001..=1.0),
            })
        } else {
            None
        },
        resize: ResizeSpec {
            method: if rng.gen() {
                ResizeMethod::Nearest
            } else {
                ResizeMethod::Bilinear
            },
            width: rng.gen_range(1..=2048),
            height: rng.gen_range(1..=2048),
        },
        conversion_order: order,
        normalization: Normalization {
            mean: [
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            ],
            stddev,
            domain,
        },
        layout: if rng.gen() {
            Layout::Nhwc
        } else {
            Layout::Nchw
        },
        dtype: ManifestDtype::Float32,
    }
}
