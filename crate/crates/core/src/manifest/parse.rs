//! Strict parser for the manifest grammar.
//!
//! Every key outside the grammar is a hard error, as is any duplicate or
//! missing mandatory key. Parsing is a pure function of the input bytes.

use thiserror::Error;

use crate::imaging::{ColorMode, Layout};

use super::{
    ConversionOrder, CropKind, CropSpec, Manifest, ManifestDtype, NormDomain, Normalization,
    ResizeMethod, ResizeSpec,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key `{key}` at line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("duplicate key `{key}` at line {line}")]
    DuplicateKey { line: usize, key: String },
    #[error("missing mandatory key `{key}`")]
    MissingKey { key: &'static str },
    #[error("invalid value for `{key}` at line {line}: {message}")]
    OutOfDomain {
        line: usize,
        key: String,
        message: String,
    },
}

impl ManifestError {
    /// Line the error was reported at, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ManifestError::Syntax { line, .. }
            | ManifestError::UnknownKey { line, .. }
            | ManifestError::DuplicateKey { line, .. }
            | ManifestError::OutOfDomain { line, .. } => Some(*line),
            ManifestError::MissingKey { .. } => None,
        }
    }
}

pub(super) fn is_bare_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, ':' | '.' | '_' | '-' | '@' | '/' | '+')
}

const KEYS: &[&str] = &[
    "name",
    "decoder",
    "color_mode",
    "crop",
    "resize",
    "conversion_order",
    "mean",
    "stddev",
    "domain",
    "layout",
    "dtype",
];

#[derive(Debug)]
enum RawValue {
    Quoted(String),
    Bare(String),
}

struct LineScanner {
    chars: Vec<char>,
    line: usize,
    pos: usize,
}

impl LineScanner {
    fn new(raw: &str, line: usize) -> Self {
        Self {
            chars: raw.chars().collect(),
            line,
            pos: 0,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    /// True once only trailing whitespace or a comment remains.
    fn at_end(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), None | Some('#'))
    }

    fn error(&self, message: impl Into<String>) -> ManifestError {
        ManifestError::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn quoted_string(&mut self) -> Result<String, ManifestError> {
        debug_assert_eq!(self.peek(), Some('"'));
        let open_col = self.column();
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(ManifestError::Syntax {
                        line: self.line,
                        column: open_col,
                        message: "unterminated string".into(),
                    })
                }
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => out.push(c),
                    _ => return Err(self.error("unsupported escape, only \\\" and \\\\")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    /// Everything up to the comment or end of line, trimmed. Quotes are not
    /// allowed inside bare values.
    fn bare_value(&mut self) -> Result<String, ManifestError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c == '#' {
                break;
            }
            if c == '"' {
                return Err(self.error("quote inside unquoted value"));
            }
            out.push(c);
            self.pos += 1;
        }
        Ok(out.trim().to_string())
    }
}

/// Parse manifest text into a fully-populated [`Manifest`].
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut fields: Vec<(String, RawValue, usize)> = Vec::new();
    let mut section_seen = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut sc = LineScanner::new(raw, line_no);
        if sc.at_end() {
            continue;
        }
        if sc.peek() == Some('[') {
            let open_col = sc.column();
            sc.bump();
            let mut name = String::new();
            loop {
                match sc.bump() {
                    None => {
                        return Err(ManifestError::Syntax {
                            line: line_no,
                            column: open_col,
                            message: "unterminated section header".into(),
                        })
                    }
                    Some(']') => break,
                    Some(c) => name.push(c),
                }
            }
            if name != "preprocess" {
                return Err(ManifestError::Syntax {
                    line: line_no,
                    column: open_col,
                    message: format!("unknown section `[{name}]`, only [preprocess] is defined"),
                });
            }
            if section_seen {
                return Err(ManifestError::Syntax {
                    line: line_no,
                    column: open_col,
                    message: "duplicate [preprocess] section".into(),
                });
            }
            section_seen = true;
            if !sc.at_end() {
                return Err(sc.error("unexpected text after section header"));
            }
            continue;
        }

        // key
        let key_start = sc.pos;
        while matches!(sc.peek(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        {
            sc.pos += 1;
        }
        if sc.pos == key_start {
            return Err(sc.error("expected a lowercase key"));
        }
        let key: String = sc.chars[key_start..sc.pos].iter().collect();

        sc.skip_ws();
        if sc.peek() != Some('=') {
            return Err(sc.error(format!("expected `=` after key `{key}`")));
        }
        sc.bump();
        sc.skip_ws();

        let value = if sc.peek() == Some('"') {
            let s = sc.quoted_string()?;
            if !sc.at_end() {
                return Err(sc.error("unexpected text after quoted value"));
            }
            RawValue::Quoted(s)
        } else {
            let s = sc.bare_value()?;
            if s.is_empty() {
                return Err(sc.error(format!("empty value for key `{key}`")));
            }
            RawValue::Bare(s)
        };

        if !KEYS.contains(&key.as_str()) {
            return Err(ManifestError::UnknownKey { line: line_no, key });
        }
        if fields.iter().any(|(k, _, _)| *k == key) {
            return Err(ManifestError::DuplicateKey { line: line_no, key });
        }
        fields.push((key, value, line_no));
    }

    build_manifest(fields)
}

fn build_manifest(fields: Vec<(String, RawValue, usize)>) -> Result<Manifest, ManifestError> {
    let mut name = None;
    let mut decoder = None;
    let mut color_mode = None;
    let mut crop = None;
    let mut resize = None;
    let mut conversion_order = None;
    let mut mean = None;
    let mut stddev = None;
    let mut domain = None;
    let mut layout = None;
    let mut dtype = None;

    for (key, value, line) in fields {
        match key.as_str() {
            "name" => {
                let s = string_value(&value);
                if s.is_empty() {
                    return Err(out_of_domain(line, "name", "name must be non-empty"));
                }
                name = Some(s);
            }
            "decoder" => {
                let s = string_value(&value);
                if s.is_empty() {
                    return Err(out_of_domain(line, "decoder", "decoder must be non-empty"));
                }
                decoder = Some(s);
            }
            "color_mode" => {
                color_mode = Some(enum_value(
                    line,
                    "color_mode",
                    &value,
                    &[("rgb", ColorMode::Rgb), ("bgr", ColorMode::Bgr)],
                )?);
            }
            "crop" => crop = Some(parse_crop(line, &value)?),
            "resize" => resize = Some(parse_resize(line, &value)?),
            "conversion_order" => {
                conversion_order = Some(enum_value(
                    line,
                    "conversion_order",
                    &value,
                    &[
                        ("convert_first", ConversionOrder::ConvertFirst),
                        ("normalize_first", ConversionOrder::NormalizeFirst),
                    ],
                )?);
            }
            "mean" => mean = Some(parse_triple(line, "mean", &value)?),
            "stddev" => {
                let v = parse_triple(line, "stddev", &value)?;
                if v.contains(&0.0) {
                    return Err(out_of_domain(line, "stddev", "stddev must be nonzero"));
                }
                stddev = Some(v);
            }
            "domain" => {
                domain = Some(enum_value(
                    line,
                    "domain",
                    &value,
                    &[
                        ("byte_scale", NormDomain::ByteScale),
                        ("unit_scale", NormDomain::UnitScale),
                    ],
                )?);
            }
            "layout" => {
                layout = Some(enum_value(
                    line,
                    "layout",
                    &value,
                    &[("nhwc", Layout::Nhwc), ("nchw", Layout::Nchw)],
                )?);
            }
            "dtype" => {
                dtype = Some(enum_value(
                    line,
                    "dtype",
                    &value,
                    &[("float32", ManifestDtype::Float32)],
                )?);
            }
            _ => unreachable!("keys filtered against the grammar before dispatch"),
        }
    }

    let missing = |key: &'static str| ManifestError::MissingKey { key };
    Ok(Manifest {
        name: name.ok_or(missing("name"))?,
        decoder: decoder.ok_or(missing("decoder"))?,
        color_mode: color_mode.ok_or(missing("color_mode"))?,
        crop,
        resize: resize.ok_or(missing("resize"))?,
        conversion_order: conversion_order.ok_or(missing("conversion_order"))?,
        normalization: Normalization {
            mean: mean.ok_or(missing("mean"))?,
            stddev: stddev.ok_or(missing("stddev"))?,
            domain: domain.ok_or(missing("domain"))?,
        },
        layout: layout.ok_or(missing("layout"))?,
        dtype: dtype.ok_or(missing("dtype"))?,
    })
}

fn string_value(value: &RawValue) -> String {
    match value {
        RawValue::Quoted(s) | RawValue::Bare(s) => s.clone(),
    }
}

fn out_of_domain(line: usize, key: &str, message: impl Into<String>) -> ManifestError {
    ManifestError::OutOfDomain {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn enum_value<T: Copy>(
    line: usize,
    key: &str,
    value: &RawValue,
    table: &[(&str, T)],
) -> Result<T, ManifestError> {
    let raw = string_value(value);
    let lowered = raw.to_ascii_lowercase();
    table
        .iter()
        .find(|(name, _)| *name == lowered)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let allowed: Vec<&str> = table.iter().map(|(name, _)| *name).collect();
            out_of_domain(
                line,
                key,
                format!("`{raw}` is not one of {{{}}}", allowed.join(", ")),
            )
        })
}

fn parse_real(line: usize, key: &str, raw: &str) -> Result<f64, ManifestError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| out_of_domain(line, key, format!("`{raw}` is not a real number")))?;
    if !v.is_finite() {
        return Err(out_of_domain(line, key, "value must be finite"));
    }
    Ok(v)
}

fn parse_triple(line: usize, key: &str, value: &RawValue) -> Result<[f64; 3], ManifestError> {
    let raw = string_value(value);
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(out_of_domain(
            line,
            key,
            format!(
                "expected exactly 3 comma-separated values, got {}",
                parts.len()
            ),
        ));
    }
    Ok([
        parse_real(line, key, parts[0])?,
        parse_real(line, key, parts[1])?,
        parse_real(line, key, parts[2])?,
    ])
}

fn parse_crop(line: usize, value: &RawValue) -> Result<CropSpec, ManifestError> {
    let raw = string_value(value);
    let (kind, fraction) = raw
        .split_once(':')
        .ok_or_else(|| out_of_domain(line, "crop", "expected `center:<fraction>`"))?;
    if !kind.eq_ignore_ascii_case("center") {
        return Err(out_of_domain(
            line,
            "crop",
            format!("`{kind}` is not one of {{center}}"),
        ));
    }
    let fraction = parse_real(line, "crop", fraction)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(out_of_domain(line, "crop", "fraction must be in (0, 1]"));
    }
    Ok(CropSpec {
        kind: CropKind::Center,
        fraction,
    })
}

fn parse_resize(line: usize, value: &RawValue) -> Result<ResizeSpec, ManifestError> {
    let raw = string_value(value);
    let (method, dims) = raw
        .split_once(':')
        .ok_or_else(|| out_of_domain(line, "resize", "expected `<method>:<width>x<height>`"))?;
    let method = match method.to_ascii_lowercase().as_str() {
        "nearest" => ResizeMethod::Nearest,
        "bilinear" => ResizeMethod::Bilinear,
        other => {
            return Err(out_of_domain(
                line,
                "resize",
                format!("`{other}` is not one of {{nearest, bilinear}}"),
            ))
        }
    };
    let (w, h) = dims
        .split_once(['x', 'X'])
        .ok_or_else(|| out_of_domain(line, "resize", "expected `<width>x<height>`"))?;
    let width: u32 = w
        .trim()
        .parse()
        .map_err(|_| out_of_domain(line, "resize", format!("`{w}` is not a positive integer")))?;
    let height: u32 = h
        .trim()
        .parse()
        .map_err(|_| out_of_domain(line, "resize", format!("`{h}` is not a positive integer")))?;
    if width == 0 || height == 0 {
        return Err(out_of_domain(
            line,
            "resize",
            "width and height must be at least 1",
        ));
    }
    Ok(ResizeSpec {
        method,
        width,
        height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# Inception-style preprocessing
name = \"inception-v3\"
[preprocess]
decoder = ppm
color_mode = rgb
crop = center:0.875
resize = bilinear:299x299
conversion_order = convert_first
mean = 0.5, 0.5, 0.5
stddev = 0.5, 0.5, 0.5
domain = unit_scale
layout = nhwc
dtype = float32
";

    #[test]
    fn full_manifest_parses() {
        let m = parse_manifest(FULL).unwrap();
        assert_eq!(m.name, "inception-v3");
        assert_eq!(m.crop.unwrap().fraction, 0.875);
        assert_eq!(m.resize.width, 299);
        assert_eq!(m.resize.height, 299);
        assert_eq!(m.color_mode, ColorMode::Rgb);
        assert_eq!(m.layout, Layout::Nhwc);
    }

    #[test]
    fn zero_stddev_is_rejected() {
        let text = FULL.replace("stddev = 0.5, 0.5, 0.5", "stddev = 0, 0, 0");
        let err = parse_manifest(&text).unwrap_err();
        assert!(err.to_string().contains("stddev must be nonzero"), "{err}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = FULL.replace("color_mode = rgb", "colour_mode = rgb");
        let err = parse_manifest(&text).unwrap_err();
        assert_eq!(
            err,
            ManifestError::UnknownKey {
                line: 5,
                key: "colour_mode".into()
            }
        );
        assert!(err.to_string().contains("line 5"));
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = format!("{FULL}layout = nchw\n");
        let err = parse_manifest(&text).unwrap_err();
        assert!(
            matches!(err, ManifestError::DuplicateKey { line: 14, .. }),
            "{err}"
        );
    }

    #[test]
    fn missing_mandatory_key_is_reported() {
        let text = FULL.replace("resize = bilinear:299x299\n", "");
        assert_eq!(
            parse_manifest(&text).unwrap_err(),
            ManifestError::MissingKey { key: "resize" }
        );
    }

    #[test]
    fn crop_is_optional() {
        let text = FULL.replace("crop = center:0.875\n", "");
        let m = parse_manifest(&text).unwrap();
        assert!(m.crop.is_none());
    }

    #[test]
    fn fraction_domain_is_enforced() {
        for bad in ["center:0", "center:1.5", "center:-0.2", "center:inf"] {
            let text = FULL.replace("center:0.875", bad);
            assert!(parse_manifest(&text).is_err(), "accepted {bad}");
        }
        let text = FULL.replace("center:0.875", "center:1");
        assert_eq!(parse_manifest(&text).unwrap().crop.unwrap().fraction, 1.0);
    }

    #[test]
    fn zero_resize_is_rejected() {
        let text = FULL.replace("bilinear:299x299", "bilinear:0x299");
        let err = parse_manifest(&text).unwrap_err();
        assert!(err.to_string().contains("at least 1"), "{err}");
    }

    #[test]
    fn missing_equals_reports_column() {
        let err = parse_manifest("name \"x\"\n").unwrap_err();
        assert_eq!(
            err,
            ManifestError::Syntax {
                line: 1,
                column: 6,
                message: "expected `=` after key `name`".into()
            }
        );
    }

    #[test]
    fn unknown_section_is_rejected() {
        let err = parse_manifest("[postprocess]\n").unwrap_err();
        assert!(
            matches!(err, ManifestError::Syntax { line: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("\n# leading comment\n{FULL}\n   # trailing\n");
        assert!(parse_manifest(&text).is_ok());
    }

    #[test]
    fn inline_comment_after_value() {
        let text = FULL.replace("layout = nhwc", "layout = nhwc  # channels last");
        assert_eq!(parse_manifest(&text).unwrap().layout, Layout::Nhwc);
    }

    #[test]
    fn tuple_arity_is_enforced() {
        let text = FULL.replace("mean = 0.5, 0.5, 0.5", "mean = 0.5, 0.5");
        let err = parse_manifest(&text).unwrap_err();
        assert!(err.to_string().contains("exactly 3"), "{err}");
    }

    #[test]
    fn empty_name_is_rejected() {
        let text = FULL.replace("name = \"inception-v3\"", "name = \"\"");
        let err = parse_manifest(&text).unwrap_err();
        assert!(err.to_string().contains("non-empty"), "{err}");
    }

    #[test]
    fn parsing_is_deterministic() {
        let a = parse_manifest(FULL).unwrap();
        let b = parse_manifest(FULL).unwrap();
        assert_eq!(a, b);
    }
}
