//! The model-manifest format: a declarative record of every preprocessing
//! decision that can silently change a model's input tensor.
//!
//! Grammar: line-oriented `key = value` pairs with one optional
//! `[preprocess]` section header. `#` starts a comment. Values are bare
//! tokens, quoted strings, or comma-separated tuples. Unknown keys are hard
//! errors, never ignored. The full ABNF is in `docs/manifest-grammar.md`.

mod parse;
mod validate;

pub use parse::{parse_manifest, ManifestError};
pub use validate::{validate, Issue, IssueCode, Severity};

use serde::{Deserialize, Serialize};

use crate::imaging::{ColorMode, Layout};

/// Fully-resolved manifest. Every field is mandatory in the text form
/// except `crop`, which is absent by default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub name: String,
    /// Decode adapter id, e.g. `ppm` or `jpeg:zune@0.5`.
    pub decoder: String,
    pub color_mode: ColorMode,
    pub crop: Option<CropSpec>,
    pub resize: ResizeSpec,
    pub conversion_order: ConversionOrder,
    pub normalization: Normalization,
    pub layout: Layout,
    pub dtype: ManifestDtype,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CropSpec {
    pub kind: CropKind,
    /// Retained fraction of each spatial dimension, in (0, 1].
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CropKind {
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResizeSpec {
    pub method: ResizeMethod,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeMethod {
    Nearest,
    Bilinear,
}

impl std::fmt::Display for ResizeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResizeMethod::Nearest => write!(f, "nearest"),
            ResizeMethod::Bilinear => write!(f, "bilinear"),
        }
    }
}

/// Whether byte→float conversion happens before or after mean/stddev
/// normalization. The two orders demand parameters in different domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConversionOrder {
    ConvertFirst,
    NormalizeFirst,
}

impl std::fmt::Display for ConversionOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConversionOrder::ConvertFirst => write!(f, "convert_first"),
            ConversionOrder::NormalizeFirst => write!(f, "normalize_first"),
        }
    }
}

/// Which value domain the mean/stddev parameters live in: raw byte
/// magnitudes (0..255) or unit-scale floats (0..1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormDomain {
    ByteScale,
    UnitScale,
}

impl std::fmt::Display for NormDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormDomain::ByteScale => write!(f, "byte_scale"),
            NormDomain::UnitScale => write!(f, "unit_scale"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub stddev: [f64; 3],
    pub domain: NormDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestDtype {
    Float32,
}

/// Canonical text form: fixed key order, lowercase keys, `[preprocess]`
/// section always emitted, reals in shortest round-trip decimal.
/// `parse_manifest(serialize_manifest(m))` is structurally `m`, and equal
/// manifests serialize byte-identically.
pub fn serialize_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", quote(&m.name)));
    out.push_str("[preprocess]\n");
    out.push_str(&format!("decoder = {}\n", bare_or_quoted(&m.decoder)));
    out.push_str(&format!("color_mode = {}\n", m.color_mode));
    if let Some(crop) = &m.crop {
        let CropKind::Center = crop.kind;
        out.push_str(&format!("crop = center:{}\n", crop.fraction));
    }
    out.push_str(&format!(
        "resize = {}:{}x{}\n",
        m.resize.method, m.resize.width, m.resize.height
    ));
    out.push_str(&format!("conversion_order = {}\n", m.conversion_order));
    out.push_str(&format!("mean = {}\n", triple(&m.normalization.mean)));
    out.push_str(&format!("stddev = {}\n", triple(&m.normalization.stddev)));
    out.push_str(&format!("domain = {}\n", m.normalization.domain));
    out.push_str(&format!("layout = {}\n", m.layout));
    out.push_str("dtype = float32\n");
    out
}

fn triple(values: &[f64; 3]) -> String {
    format!("{}, {}, {}", values[0], values[1], values[2])
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

fn bare_or_quoted(s: &str) -> String {
    if !s.is_empty() && s.chars().all(parse::is_bare_char) {
        s.to_string()
    } else {
        quote(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn inception_style() -> Manifest {
        Manifest {
            name: "inception-v3".into(),
            decoder: "ppm".into(),
            color_mode: ColorMode::Rgb,
            crop: Some(CropSpec {
                kind: CropKind::Center,
                fraction: 0.875,
            }),
            resize: ResizeSpec {
                method: ResizeMethod::Bilinear,
                width: 299,
                height: 299,
            },
            conversion_order: ConversionOrder::ConvertFirst,
            normalization: Normalization {
                mean: [0.5, 0.5, 0.5],
                stddev: [0.5, 0.5, 0.5],
                domain: NormDomain::UnitScale,
            },
            layout: Layout::Nhwc,
            dtype: ManifestDtype::Float32,
        }
    }

    #[test]
    fn round_trip_identity() {
        let m = inception_style();
        let text = serialize_manifest(&m);
        let parsed = parse_manifest(&text).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn equal_manifests_serialize_identically() {
        let a = inception_style();
        let b = inception_style();
        assert_eq!(serialize_manifest(&a), serialize_manifest(&b));
    }

    #[test]
    fn reals_use_shortest_form() {
        let text = serialize_manifest(&inception_style());
        assert!(text.contains("crop = center:0.875\n"), "got:\n{text}");
        assert!(!text.contains("0.8750"));
    }

    #[test]
    fn crop_is_omitted_when_absent() {
        let mut m = inception_style();
        m.crop = None;
        let text = serialize_manifest(&m);
        assert!(!text.contains("crop"));
        assert_eq!(parse_manifest(&text).unwrap(), m);
    }

    #[test]
    fn quoted_name_with_spaces_round_trips() {
        let mut m = inception_style();
        m.name = "resnet 50 \"v2\"".into();
        let parsed = parse_manifest(&serialize_manifest(&m)).unwrap();
        assert_eq!(parsed.name, m.name);
    }
}
