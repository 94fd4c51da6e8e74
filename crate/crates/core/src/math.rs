/// Rounds to the nearest integer, ties away from zero.
///
/// This is the single rounding rule used by binning, truncation,
/// quantization, colour conversion, and every real-to-sample conversion.
#[inline]
pub fn round_half_away(v: f64) -> f64 {
    libm::round(v)
}

#[inline]
pub(crate) fn clamp_u8(v: f64) -> u8 {
    let r = round_half_away(v);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_away_from_zero() {
        assert_eq!(round_half_away(2.5), 3.0);
        assert_eq!(round_half_away(-2.5), -3.0);
        assert_eq!(round_half_away(0.49999), 0.0);
        assert_eq!(round_half_away(-0.5), -1.0);
    }

    #[test]
    fn clamp_saturates() {
        assert_eq!(clamp_u8(-3.2), 0);
        assert_eq!(clamp_u8(255.5), 255);
        assert_eq!(clamp_u8(127.5), 128);
    }
}
