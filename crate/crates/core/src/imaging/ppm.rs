//! Binary PPM (P6, maxval 255) reader and writer.
//!
//! PPM is the reference container: lossless and trivial to decode, so
//! pipeline correctness tests never route through codec-defined behavior.
//! Sample (y, x, c) is the byte at `data_start + (y*W + x)*3 + c`, bit-exact.

use super::{ColorMode, Image, ImagingError};

pub const PPM_REFERENCE_ID: &str = "ppm:reference";

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    /// Next whitespace-delimited token; `#` comments run to end of line.
    fn token(&mut self) -> Result<&'a [u8], ImagingError> {
        loop {
            match self.bytes.get(self.pos) {
                None => return Err(ImagingError::PpmHeader("unexpected end of header".into())),
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
            }
        }
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32, ImagingError> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                ImagingError::PpmHeader(format!(
                    "{what} is not a decimal integer: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decode a binary PPM into an RGB image with `ppm:reference` provenance.
pub fn decode_ppm(bytes: &[u8]) -> Result<Image, ImagingError> {
    let mut cur = HeaderCursor::new(bytes);
    let magic = cur.token()?;
    if magic != b"P6" {
        let shown = &magic[..magic.len().min(8)];
        return Err(ImagingError::PpmVariant {
            magic: String::from_utf8_lossy(shown).into_owned(),
        });
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(ImagingError::PpmMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(ImagingError::EmptyImage { height, width });
    }
    // Exactly one whitespace byte separates the maxval from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(ImagingError::PpmHeader(
                "expected single whitespace byte before raster".into(),
            ))
        }
    }
    let expected = height as usize * width as usize * 3;
    let data = &bytes[cur.pos..];
    if data.len() < expected {
        return Err(ImagingError::PpmTruncated {
            expected,
            got: data.len(),
        });
    }
    Image::from_samples(
        height,
        width,
        data[..expected].to_vec(),
        ColorMode::Rgb,
        PPM_REFERENCE_ID,
    )
}

/// Encode as binary P6 with maxval 255. Samples are written as stored;
/// the PPM convention is RGB, so a BGR-tagged image will render swapped.
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.samples().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.samples());
    out
}
