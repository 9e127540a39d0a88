//! Difference visualization: max-channel absolute difference, grayscale
//! dilation with a 5×5 square structuring element (Chebyshev radius 2),
//! then a linear min-max rescale to the full byte range so faint decoder
//! differences become visible.

use crate::imaging::{ColorMode, Image, CHANNELS};

use super::DiffError;

const RADIUS: usize = 2;

/// Grayscale dilation: each output pixel is the max over the 5×5
/// neighborhood of the input, clamped at the borders. Output ≥ input
/// pointwise.
pub fn dilate_gray(plane: &[u8], width: u32, height: u32) -> Vec<u8> {
    let w = width as usize;
    let h = height as usize;
    debug_assert_eq!(plane.len(), w * h);
    // separable: horizontal max then vertical max
    let mut horiz = vec![0u8; w * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        let out = &mut horiz[y * w..(y + 1) * w];
        for (x, slot) in out.iter_mut().enumerate() {
            let lo = x.saturating_sub(RADIUS);
            let hi = (x + RADIUS).min(w - 1);
            *slot = row[lo..=hi]
                .iter()
                .copied()
                .max()
                .expect("non-empty window");
        }
    }
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(RADIUS);
        let hi = (y + RADIUS).min(h - 1);
        for x in 0..w {
            let mut m = 0u8;
            for row in lo..=hi {
                m = m.max(horiz[row * w + x]);
            }
            out[y * w + x] = m;
        }
    }
    out
}

fn rescale_min_max(plane: &mut [u8]) {
    let max = plane.iter().copied().max().unwrap_or(0);
    let min = plane.iter().copied().min().unwrap_or(0);
    if max == 0 {
        return; // all-zero diff stays all-zero
    }
    if max == min {
        plane.iter_mut().for_each(|v| *v = 255);
        return;
    }
    let span = (max - min) as f64;
    for v in plane.iter_mut() {
        let scaled = (*v - min) as f64 * 255.0 / span;
        *v = (scaled + 0.5).floor().clamp(0.0, 255.0) as u8;
    }
}

/// Render the per-pixel divergence between two same-sized images.
pub fn visualize_diff(a: &Image, b: &Image) -> Result<Image, DiffError> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(DiffError::DimensionMismatch {
            a_h: a.height(),
            a_w: a.width(),
            b_h: b.height(),
            b_w: b.width(),
        });
    }
    let c = CHANNELS as usize;
    let mut plane: Vec<u8> = a
        .samples()
        .chunks_exact(c)
        .zip(b.samples().chunks_exact(c))
        .map(|(pa, pb)| {
            pa.iter()
                .zip(pb)
                .map(|(&va, &vb)| (va as i16 - vb as i16).unsigned_abs() as u8)
                .max()
                .expect("three channels")
        })
        .collect();
    plane = dilate_gray(&plane, a.width(), a.height());
    rescale_min_max(&mut plane);
    let samples: Vec<u8> = plane.iter().flat_map(|&v| [v, v, v]).collect();
    Image::from_samples(
        a.height(),
        a.width(),
        samples,
        ColorMode::Rgb,
        "diff:visualize",
    )
    .map_err(|_| unreachable!("dims come from a validated image"))
}
