//! Byte ↔ float sample conversion.
//!
//! `float_to_byte(byte_to_float(x)) == x` for every byte value; the
//! acceptance suite asserts this exhaustively rather than assuming it.

/// Exactly x/255.0 in binary32.
#[inline]
pub fn byte_to_float(x: u8) -> f32 {
    x as f32 / 255.0
}

/// clamp(⌊255·x⌋, 0, 255). Saturates out-of-range input; NaN maps to 0.
#[inline]
pub fn float_to_byte(x: f32) -> u8 {
    if x.is_nan() {
        return 0;
    }
    let scaled = (255.0f32 * x).floor();
    if scaled <= 0.0 {
        0
    } else if scaled >= 255.0 {
        255
    } else {
        scaled as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(byte_to_float(255), 1.0);
        assert_eq!(byte_to_float(0), 0.0);
        assert_eq!(float_to_byte(1.0), 255);
        assert_eq!(float_to_byte(0.0), 0);
    }

    #[test]
    fn midpoint_follows_floor() {
        // 255 * 0.5 = 127.5, floored
        assert_eq!(float_to_byte(0.5), 127);
    }

    #[test]
    fn saturation_and_nan() {
        assert_eq!(float_to_byte(1.2), 255);
        assert_eq!(float_to_byte(-0.1), 0);
        assert_eq!(float_to_byte(f32::NAN), 0);
        assert_eq!(float_to_byte(f32::INFINITY), 255);
        assert_eq!(float_to_byte(f32::NEG_INFINITY), 0);
    }

    #[test]
    fn byte_128_matches_binary64_route() {
        let narrowed = (128.0f64 / 255.0) as f32;
        assert_eq!(byte_to_float(128), narrowed);
        assert!((byte_to_float(128) as f64 - 0.501_960_78).abs() < 1e-7);
    }

    #[test]
    fn round_trip_exhaustive() {
        for x in 0..=255u8 {
            assert_eq!(float_to_byte(byte_to_float(x)), x, "byte {x}");
        }
    }
}
