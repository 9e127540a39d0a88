//! Decode adapters and their registry.
//!
//! The JPEG standard does not require bit-by-bit decoding accuracy, so
//! adapters carry a stable identity string and the divergence between them
//! is measured rather than forbidden. Grayscale and alpha inputs are
//! rejected outright; auto-conversion is a silent-error vector.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{decode_ppm, ColorMode, Image, ImagingError, PPM_REFERENCE_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainerFormat {
    Ppm,
    Jpeg,
}

impl std::fmt::Display for ContainerFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContainerFormat::Ppm => write!(f, "ppm"),
            ContainerFormat::Jpeg => write!(f, "jpeg"),
        }
    }
}

/// A registered decode implementation. The id must stay stable across runs
/// on the same build; it becomes the provenance of every image it decodes.
pub trait DecodeAdapter: Send + Sync {
    fn id(&self) -> &str;
    fn formats(&self) -> &[ContainerFormat];
    fn decode(&self, bytes: &[u8]) -> Result<Image, ImagingError>;
}

/// Adapter registry keyed by id string. Iteration order is sorted so error
/// listings and reports are deterministic.
pub struct AdapterRegistry {
    adapters: BTreeMap<String, Arc<dyn DecodeAdapter>>,
    aliases: BTreeMap<String, String>,
}

impl AdapterRegistry {
    pub fn empty() -> Self {
        Self {
            adapters: BTreeMap::new(),
            aliases: BTreeMap::new(),
        }
    }

    /// Registry with the reference PPM decoder and the built-in JPEG
    /// adapters. `ppm` is an alias for the reference decoder.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(PpmReferenceAdapter));
        reg.register(Arc::new(JpegDecoderAdapter));
        reg.register(Arc::new(ZuneJpegAdapter));
        reg.alias("ppm", PPM_REFERENCE_ID);
        reg
    }

    pub fn register(&mut self, adapter: Arc<dyn DecodeAdapter>) {
        self.adapters.insert(adapter.id().to_string(), adapter);
    }

    pub fn alias(&mut self, alias: &str, target: &str) {
        self.aliases.insert(alias.to_string(), target.to_string());
    }

    pub fn ids(&self) -> Vec<&str> {
        self.adapters.keys().map(String::as_str).collect()
    }

    pub fn get(&self, id: &str) -> Result<&dyn DecodeAdapter, ImagingError> {
        let resolved = self.aliases.get(id).map(String::as_str).unwrap_or(id);
        self.adapters
            .get(resolved)
            .map(|a| a.as_ref())
            .ok_or_else(|| ImagingError::UnknownAdapter {
                id: id.to_string(),
                registered: self.ids().join(", "),
            })
    }

    pub fn decode_with(&self, id: &str, bytes: &[u8]) -> Result<Image, ImagingError> {
        self.get(id)?.decode(bytes)
    }
}

impl Default for AdapterRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

struct PpmReferenceAdapter;

impl DecodeAdapter for PpmReferenceAdapter {
    fn id(&self) -> &str {
        PPM_REFERENCE_ID
    }

    fn formats(&self) -> &[ContainerFormat] {
        &[ContainerFormat::Ppm]
    }

    fn decode(&self, bytes: &[u8]) -> Result<Image, ImagingError> {
        decode_ppm(bytes)
    }
}

pub const JPEG_DECODER_ID: &str = "jpeg:jpeg-decoder@0.3";
pub const ZUNE_JPEG_ID: &str = "jpeg:zune@0.5";

struct JpegDecoderAdapter;

impl DecodeAdapter for JpegDecoderAdapter {
    fn id(&self) -> &str {
        JPEG_DECODER_ID
    }

    fn formats(&self) -> &[ContainerFormat] {
        &[ContainerFormat::Jpeg]
    }

    fn decode(&self, bytes: &[u8]) -> Result<Image, ImagingError> {
        let mut decoder = jpeg_decoder::Decoder::new(bytes);
        let pixels = decoder.decode().map_err(|e| ImagingError::DecodeFailed {
            id: self.id().to_string(),
            message: e.to_string(),
        })?;
        let info = decoder.info().ok_or_else(|| ImagingError::DecodeFailed {
            id: self.id().to_string(),
            message: "decoder returned no image info".into(),
        })?;
        if info.pixel_format != jpeg_decoder::PixelFormat::RGB24 {
            return Err(ImagingError::UnsupportedInput {
                id: self.id().to_string(),
                message: format!(
                    "only 3-channel color JPEG is accepted, got {:?}",
                    info.pixel_format
                ),
            });
        }
        Image::from_samples(
            info.height as u32,
            info.width as u32,
            pixels,
            ColorMode::Rgb,
            self.id(),
        )
    }
}

struct ZuneJpegAdapter;

impl DecodeAdapter for ZuneJpegAdapter {
    fn id(&self) -> &str {
        ZUNE_JPEG_ID
    }

    fn formats(&self) -> &[ContainerFormat] {
        &[ContainerFormat::Jpeg]
    }

    fn decode(&self, bytes: &[u8]) -> Result<Image, ImagingError> {
        use zune_core::bytestream::ZCursor;
        use zune_core::colorspace::ColorSpace;
        use zune_core::options::DecoderOptions;

        let options = DecoderOptions::default().jpeg_set_out_colorspace(ColorSpace::RGB);
        let mut decoder = zune_jpeg::JpegDecoder::new_with_options(ZCursor::new(bytes), options);
        decoder
            .decode_headers()
            .map_err(|e| ImagingError::DecodeFailed {
                id: self.id().to_string(),
                message: e.to_string(),
            })?;
        let info = decoder.info().ok_or_else(|| ImagingError::DecodeFailed {
            id: self.id().to_string(),
            message: "decoder returned no image info".into(),
        })?;
        if info.components != 3 {
            return Err(ImagingError::UnsupportedInput {
                id: self.id().to_string(),
                message: format!(
                    "only 3-channel color JPEG is accepted, got {} components",
                    info.components
                ),
            });
        }
        let pixels = decoder.decode().map_err(|e| ImagingError::DecodeFailed {
            id: self.id().to_string(),
            message: e.to_string(),
        })?;
        Image::from_samples(
            info.height as u32,
            info.width as u32,
            pixels,
            ColorMode::Rgb,
            self.id(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::encode_ppm;

    #[test]
    fn ppm_adapter_matches_reference_decoder() {
        let img = Image::from_samples(1, 2, vec![1, 2, 3, 4, 5, 6], ColorMode::Rgb, "x").unwrap();
        let bytes = encode_ppm(&img);
        let reg = AdapterRegistry::with_builtins();
        let via_adapter = reg.decode_with(PPM_REFERENCE_ID, &bytes).unwrap();
        let direct = decode_ppm(&bytes).unwrap();
        assert_eq!(via_adapter, direct);
    }

    #[test]
    fn ppm_alias_resolves() {
        let img = Image::from_samples(1, 1, vec![7, 8, 9], ColorMode::Rgb, "x").unwrap();
        let reg = AdapterRegistry::with_builtins();
        let out = reg.decode_with("ppm", &encode_ppm(&img)).unwrap();
        assert_eq!(out.provenance(), PPM_REFERENCE_ID);
    }

    #[test]
    fn unknown_adapter_lists_registered_ids() {
        let reg = AdapterRegistry::with_builtins();
        let err = reg.decode_with("jpeg:imaginary", b"").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("jpeg:imaginary"));
        assert!(msg.contains(PPM_REFERENCE_ID));
        assert!(msg.contains(JPEG_DECODER_ID));
        assert!(msg.contains(ZUNE_JPEG_ID));
    }

    #[test]
    fn decode_failure_carries_adapter_id() {
        let reg = AdapterRegistry::with_builtins();
        let err = reg.decode_with(ZUNE_JPEG_ID, b"not a jpeg").unwrap_err();
        assert!(err.to_string().contains(ZUNE_JPEG_ID));
    }

    #[test]
    fn jpeg_adapters_have_distinct_stable_ids() {
        let reg = AdapterRegistry::with_builtins();
        assert_ne!(JPEG_DECODER_ID, ZUNE_JPEG_ID);
        assert_eq!(reg.get(JPEG_DECODER_ID).unwrap().id(), JPEG_DECODER_ID);
        assert_eq!(reg.get(ZUNE_JPEG_ID).unwrap().id(), ZUNE_JPEG_ID);
        assert_eq!(
            reg.get(ZUNE_JPEG_ID).unwrap().formats(),
            &[ContainerFormat::Jpeg]
        );
    }
}
