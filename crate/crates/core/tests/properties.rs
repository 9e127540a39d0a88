//! Cross-module property tests. Oracles live in `common` and are coded
//! independently of the engine paths they check.

mod common;

use proptest::prelude::*;

use pixelproof_core::bench::{iter_records, pack_records, summarize};
use pixelproof_core::diff::{dilate_gray, image_diff, tensor_diff};
use pixelproof_core::imaging::{
    decode_ppm, encode_ppm, to_tensor, transpose_layout, ColorMode, Dtype, Image, Layout, Tensor,
};
use pixelproof_core::manifest::{
    parse_manifest, serialize_manifest, ConversionOrder, NormDomain, Normalization,
};
use pixelproof_core::pipeline::{byte_to_float, digest, float_to_byte, normalize, resize, rten};

use common::{
    oracle_dilate, oracle_nhwc_to_nchw, oracle_resize_bilinear, oracle_resize_nearest,
    oracle_stats, ppm_bytes, random_image, random_manifest, rng,
};

fn image_strategy(max: u32) -> impl Strategy<Value = Image> {
    (1..=max, 1..=max, any::<u64>()).prop_map(|(h, w, seed)| {
        let mut r = rng(seed);
        random_image(&mut r, h, w)
    })
}

#[test]
fn batched_transpose_matches_permutation_oracle() {
    // 24 elements with data 0..23: batch of two 2x2x3 rasters
    let t = Tensor::from_u8(vec![2, 2, 2, 3], Some(Layout::Nhwc), (0..24).collect()).unwrap();
    let engine = transpose_layout(&t, Layout::Nchw).unwrap();
    assert_eq!(engine.dims(), &[2, 3, 2, 2]);
    assert_eq!(engine.as_u8().unwrap(), &oracle_nhwc_to_nchw(&t)[..]);
    let back = transpose_layout(&engine, Layout::Nhwc).unwrap();
    assert_eq!(back, t);
}

proptest! {
    #[test]
    fn ppm_decode_is_bit_exact(h in 1u32..=12, w in 1u32..=12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let payload: Vec<u8> = (0..(h * w * 3)).map(|_| rand::Rng::gen(&mut r)).collect();
        let img = decode_ppm(&ppm_bytes(h, w, &payload)).unwrap();
        prop_assert_eq!((img.height(), img.width()), (h, w));
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    prop_assert_eq!(
                        img.sample(y, x, c),
                        payload[((y * w + x) * 3 + c) as usize],
                        "sample ({}, {}, {})", y, x, c
                    );
                }
            }
        }
    }

    #[test]
    fn ppm_encode_decode_round_trips(img in image_strategy(12)) {
        let back = decode_ppm(&encode_ppm(&img)).unwrap();
        prop_assert_eq!(back.samples(), img.samples());
    }

    #[test]
    fn color_swap_involution(img in image_strategy(12)) {
        let back = img.clone().convert_color(ColorMode::Bgr).convert_color(ColorMode::Rgb);
        prop_assert_eq!(&back, &img);
        let swapped = img.clone().convert_color(ColorMode::Bgr);
        for i in 0..(img.height() * img.width()) as usize {
            prop_assert_eq!(swapped.samples()[i * 3], img.samples()[i * 3 + 2]);
            prop_assert_eq!(swapped.samples()[i * 3 + 1], img.samples()[i * 3 + 1]);
            prop_assert_eq!(swapped.samples()[i * 3 + 2], img.samples()[i * 3]);
        }
    }

    #[test]
    fn layout_transpose_matches_oracle_and_inverts(img in image_strategy(10)) {
        let nhwc = to_tensor(&img, Layout::Nhwc, Dtype::U8);
        let nchw = transpose_layout(&nhwc, Layout::Nchw).unwrap();
        prop_assert_eq!(nchw.as_u8().unwrap(), &oracle_nhwc_to_nchw(&nhwc)[..]);
        prop_assert_eq!(&to_tensor(&img, Layout::Nchw, Dtype::U8), &nchw);
        let back = transpose_layout(&nchw, Layout::Nhwc).unwrap();
        prop_assert_eq!(&back, &nhwc);
    }

    #[test]
    fn mismatched_layout_tag_is_detectable(img in image_strategy(10)) {
        // a transposed tensor digests differently whenever H != W or the
        // data is non-symmetric under the transpose
        let nhwc = to_tensor(&img, Layout::Nhwc, Dtype::U8);
        let nchw = transpose_layout(&nhwc, Layout::Nchw).unwrap();
        if img.height() != img.width() || nhwc.as_u8() != nchw.as_u8() {
            prop_assert_ne!(digest(&nhwc).hash, digest(&nchw).hash);
        }
    }

    #[test]
    fn byte_float_conversion_properties(x in any::<u8>(), y in any::<u8>()) {
        let fx = byte_to_float(x);
        prop_assert!((0.0..=1.0).contains(&fx));
        prop_assert_eq!(float_to_byte(fx), x);
        if x <= y {
            prop_assert!(byte_to_float(x) <= byte_to_float(y));
        }
    }

    #[test]
    fn float_to_byte_is_monotone_and_saturating(a in -10.0f32..10.0, b in -10.0f32..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(float_to_byte(lo) <= float_to_byte(hi));
    }

    #[test]
    fn resize_matches_oracle(
        img in image_strategy(16),
        out_w in 1u32..=16,
        out_h in 1u32..=16,
    ) {
        let nearest = resize(&img, pixelproof_core::manifest::ResizeMethod::Nearest, out_w, out_h);
        prop_assert_eq!(nearest.samples(), &oracle_resize_nearest(&img, out_w, out_h)[..]);
        let bilinear = resize(&img, pixelproof_core::manifest::ResizeMethod::Bilinear, out_w, out_h);
        prop_assert_eq!(bilinear.samples(), &oracle_resize_bilinear(&img, out_w, out_h)[..]);
    }

    #[test]
    fn bilinear_is_bounded_by_channel_extremes(
        img in image_strategy(12),
        out_w in 1u32..=20,
        out_h in 1u32..=20,
    ) {
        let out = resize(&img, pixelproof_core::manifest::ResizeMethod::Bilinear, out_w, out_h);
        for c in 0..3u32 {
            let mut min = u8::MAX;
            let mut max = u8::MIN;
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let v = img.sample(y, x, c);
                    min = min.min(v);
                    max = max.max(v);
                }
            }
            for y in 0..out_h {
                for x in 0..out_w {
                    let v = out.sample(y, x, c);
                    prop_assert!(v >= min && v <= max, "channel {} value {} outside [{}, {}]", c, v, min, max);
                }
            }
        }
    }

    #[test]
    fn dilation_matches_oracle_and_is_extensive(
        h in 1u32..=16,
        w in 1u32..=16,
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let plane: Vec<u8> = (0..(h * w)).map(|_| rand::Rng::gen(&mut r)).collect();
        let out = dilate_gray(&plane, w, h);
        prop_assert_eq!(&out, &oracle_dilate(&plane, w, h));
        for (i, (&before, &after)) in plane.iter().zip(&out).enumerate() {
            prop_assert!(after >= before, "pixel {} shrank", i);
        }
        let again = dilate_gray(&out, w, h);
        for (&once, &twice) in out.iter().zip(&again) {
            prop_assert!(twice >= once);
        }
    }

    #[test]
    fn summarize_matches_sort_oracle(samples in proptest::collection::vec(0u64..1_000_000, 1..200)) {
        let got = summarize(&samples).unwrap();
        let want = oracle_stats(&samples);
        prop_assert_eq!(got.count, want.count);
        prop_assert_eq!(got.min, want.min);
        prop_assert_eq!(got.max, want.max);
        prop_assert_eq!(got.median, want.median);
        prop_assert_eq!(got.p90, want.p90);
        prop_assert_eq!(got.p99, want.p99);
        prop_assert_eq!(got.mean, want.mean);
        prop_assert_eq!(got.stddev, want.stddev);
        prop_assert!(got.min <= got.median && got.median <= got.max);
        prop_assert!(got.p90 <= got.p99 && got.p99 <= got.max);
    }

    #[test]
    fn rpak_round_trip_is_lossless_and_ordered(
        records in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 1..64), 1..40)
    ) {
        let packed = pack_records(&records).unwrap();
        let out: Vec<Vec<u8>> = iter_records(&packed)
            .unwrap()
            .map(|r| r.unwrap().to_vec())
            .collect();
        prop_assert_eq!(out, records);
    }

    #[test]
    fn manifest_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_manifest(&mut r);
        let text = serialize_manifest(&m);
        let parsed = parse_manifest(&text).unwrap();
        prop_assert_eq!(&parsed, &m);
        prop_assert_eq!(serialize_manifest(&parsed), text);
    }

    #[test]
    fn rten_round_trip_u8(img in image_strategy(8)) {
        let t = to_tensor(&img, Layout::Nhwc, Dtype::U8);
        prop_assert_eq!(&rten::decode(&rten::encode(&t)).unwrap(), &t);
        let f = to_tensor(&img, Layout::Nchw, Dtype::F32);
        prop_assert_eq!(&rten::decode(&rten::encode(&f)).unwrap(), &f);
    }

    #[test]
    fn image_diff_is_symmetric(a in image_strategy(8), seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = random_image(&mut r, a.height(), a.width());
        let fwd = image_diff(&a, &b).unwrap();
        let rev = image_diff(&b, &a).unwrap();
        prop_assert_eq!(fwd.count_differing, rev.count_differing);
        prop_assert_eq!(fwd.max_abs, rev.max_abs);
        prop_assert_eq!(fwd.mean_abs, rev.mean_abs);
        prop_assert_eq!(fwd.extreme_concentration, rev.extreme_concentration);
        prop_assert!(fwd.max_abs >= fwd.mean_abs);
        prop_assert!((0.0..=1.0).contains(&fwd.extreme_concentration));
    }

    #[test]
    fn normalization_orders_agree_for_consistent_params(
        mean_f in -1.0f64..1.0,
        std_mag in 0.25f64..1.0,
        negate in any::<bool>(),
    ) {
        let std_f = if negate { -std_mag } else { std_mag };
        let unit_values: Vec<f32> = (0..=255u8).flat_map(|x| [byte_to_float(x); 3]).collect();
        let byte_values: Vec<f32> = (0..=255u8).flat_map(|x| [x as f32; 3]).collect();
        let unit_t = Tensor::from_f32(vec![1, 1, 256, 3], Some(Layout::Nhwc), unit_values).unwrap();
        let byte_t = Tensor::from_f32(vec![1, 1, 256, 3], Some(Layout::Nhwc), byte_values).unwrap();
        let a = normalize(
            &unit_t,
            &Normalization { mean: [mean_f; 3], stddev: [std_f; 3], domain: NormDomain::UnitScale },
            ConversionOrder::ConvertFirst,
        ).unwrap();
        let b = normalize(
            &byte_t,
            &Normalization {
                mean: [255.0 * mean_f; 3],
                stddev: [255.0 * std_f; 3],
                domain: NormDomain::ByteScale,
            },
            ConversionOrder::NormalizeFirst,
        ).unwrap();
        let report = tensor_diff(&a, &b).unwrap();
        // mathematically equal; only binary32 rounding order differs
        prop_assert!(report.max_abs <= 4e-6, "max_abs {}", report.max_abs);
    }
}
