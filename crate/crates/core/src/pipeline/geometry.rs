//! Center crop and resize.
//!
//! The resize convention is normative for every pipeline built on this
//! engine: half-pixel centers, `src = (dst + 0.5) · (in/out) − 0.5`,
//! clamped to [0, in−1]. Nearest rounds half up; bilinear accumulates in
//! binary32 and rounds half up to bytes. Same-size resize is bitwise
//! identity for both methods.

use crate::imaging::{Image, CHANNELS};
use crate::manifest::ResizeMethod;

/// Symmetric center crop retaining `fraction` of each spatial dimension.
///
/// Offsets are `⌊dim·(1−fraction)/2⌋`, so small images may crop to
/// themselves (a 10×10 at 0.875 is a no-op). `fraction` must be in (0, 1].
pub fn center_crop(img: &Image, fraction: f64) -> Image {
    assert!(
        fraction > 0.0 && fraction <= 1.0,
        "crop fraction must be in (0, 1], got {fraction}"
    );
    let h = img.height();
    let w = img.width();
    let offset_y = (h as f64 * (1.0 - fraction) / 2.0).floor() as u32;
    let offset_x = (w as f64 * (1.0 - fraction) / 2.0).floor() as u32;
    if offset_y == 0 && offset_x == 0 {
        return img.clone();
    }
    let out_h = h - 2 * offset_y;
    let out_w = w - 2 * offset_x;
    let c = CHANNELS as usize;
    let row_bytes = out_w as usize * c;
    let mut samples = Vec::with_capacity(out_h as usize * row_bytes);
    for y in 0..out_h {
        let src_y = (y + offset_y) as usize;
        let start = (src_y * w as usize + offset_x as usize) * c;
        samples.extend_from_slice(&img.samples()[start..start + row_bytes]);
    }
    Image::from_samples(out_h, out_w, samples, img.color_mode(), img.provenance())
        .expect("crop output dims are always at least 1x1")
}

/// Source coordinate for an output index under half-pixel mapping,
/// clamped to the valid range.
#[inline]
fn source_coord(dst: u32, in_dim: u32, out_dim: u32) -> f64 {
    let src = (dst as f64 + 0.5) * (in_dim as f64 / out_dim as f64) - 0.5;
    src.clamp(0.0, (in_dim - 1) as f64)
}

pub fn resize(img: &Image, method: ResizeMethod, out_w: u32, out_h: u32) -> Image {
    assert!(
        out_w >= 1 && out_h >= 1,
        "resize target must be at least 1x1"
    );
    match method {
        ResizeMethod::Nearest => resize_nearest(img, out_w, out_h),
        ResizeMethod::Bilinear => resize_bilinear(img, out_w, out_h),
    }
}

fn nearest_index(dst: u32, in_dim: u32, out_dim: u32) -> usize {
    let idx = (source_coord(dst, in_dim, out_dim) + 0.5).floor();
    (idx as usize).min(in_dim as usize - 1)
}

fn resize_nearest(img: &Image, out_w: u32, out_h: u32) -> Image {
    let in_w = img.width();
    let in_h = img.height();
    let c = CHANNELS as usize;
    let col_map: Vec<usize> = (0..out_w).map(|x| nearest_index(x, in_w, out_w)).collect();
    let row_map: Vec<usize> = (0..out_h).map(|y| nearest_index(y, in_h, out_h)).collect();
    let src = img.samples();
    let mut samples = Vec::with_capacity(out_h as usize * out_w as usize * c);
    for &sy in &row_map {
        let row_base = sy * in_w as usize;
        for &sx in &col_map {
            let base = (row_base + sx) * c;
            samples.extend_from_slice(&src[base..base + c]);
        }
    }
    finish(img, out_h, out_w, samples)
}

struct AxisTap {
    lo: usize,
    hi: usize,
    frac: f32,
}

fn axis_taps(in_dim: u32, out_dim: u32) -> Vec<AxisTap> {
    (0..out_dim)
        .map(|dst| {
            let src = source_coord(dst, in_dim, out_dim);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(in_dim as usize - 1);
            AxisTap {
                lo,
                hi,
                frac: (src - lo as f64) as f32,
            }
        })
        .collect()
}

fn resize_bilinear(img: &Image, out_w: u32, out_h: u32) -> Image {
    let in_w = img.width() as usize;
    let c = CHANNELS as usize;
    let cols = axis_taps(img.width(), out_w);
    let rows = axis_taps(img.height(), out_h);
    let src = img.samples();
    let mut samples = Vec::with_capacity(out_h as usize * out_w as usize * c);
    for row in &rows {
        let fy = row.frac;
        for col in &cols {
            let fx = col.frac;
            let p00 = (row.lo * in_w + col.lo) * c;
            let p01 = (row.lo * in_w + col.hi) * c;
            let p10 = (row.hi * in_w + col.lo) * c;
            let p11 = (row.hi * in_w + col.hi) * c;
            for ch in 0..c {
                let top = (1.0 - fx) * src[p00 + ch] as f32 + fx * src[p01 + ch] as f32;
                let bottom = (1.0 - fx) * src[p10 + ch] as f32 + fx * src[p11 + ch] as f32;
                let value = (1.0 - fy) * top + fy * bottom;
                samples.push(round_half_up(value));
            }
        }
    }
    finish(img, out_h, out_w, samples)
}

#[inline]
fn round_half_up(v: f32) -> u8 {
    let r = (v + 0.5).floor();
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

fn finish(img: &Image, out_h: u32, out_w: u32, samples: Vec<u8>) -> Image {
    Image::from_samples(out_h, out_w, samples, img.color_mode(), img.provenance())
        .expect("resize output length matches dims by construction")
}
