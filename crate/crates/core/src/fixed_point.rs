use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{PrepError, Result};

/// Interprets an unsigned bit string as `integer * 2^-point`.
///
/// `point = 0` is a plain integer (`α.0`), `point = width` a pure fraction
/// (`0.j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointFormat {
    width: usize,
    point: usize,
}

impl FixedPointFormat {
    pub fn new(width: usize, point: usize) -> Result<Self> {
        if point > width {
            return Err(PrepError::InvalidFormat { width, point });
        }
        Ok(Self { width, point })
    }

    pub fn integer(width: usize) -> Self {
        Self { width, point: 0 }
    }

    pub fn fraction(width: usize) -> Self {
        Self {
            width,
            point: width,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn max_label(&self) -> u64 {
        if self.width >= 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    pub fn fits(&self, label: u64) -> bool {
        label <= self.max_label()
    }

    /// Real value of `label`. Only for reporting; comparisons go through
    /// [`compare_values`] which is exact.
    pub fn value(&self, label: u64) -> f64 {
        label as f64 * (-(self.point as f64)).exp2()
    }
}

/// Exact comparison of two fixed-point values held in possibly different
/// formats. Both sides are aligned to the larger binary point by left shift.
pub fn compare_values(a: u64, fa: FixedPointFormat, b: u64, fb: FixedPointFormat) -> Ordering {
    let point = fa.point.max(fb.point);
    let a = (a as u128) << (point - fa.point);
    let b = (b as u128) << (point - fb.point);
    a.cmp(&b)
}

/// Exact test of `a * b < 1` for fixed-point operands.
///
/// The product of the raw labels carries `pa + pb` fractional bits, so the
/// test is `a_label * b_label < 2^(pa + pb)`. Fails when the product cannot
/// be represented in 128 bits.
pub fn product_less_than_one(
    a: u64,
    fa: FixedPointFormat,
    b: u64,
    fb: FixedPointFormat,
) -> Result<bool> {
    let point = fa.point + fb.point;
    if fa.width + fb.width > 127 || point > 127 {
        return Err(PrepError::InvalidArgument(format!(
            "product of {}-bit and {}-bit operands overflows the comparator",
            fa.width, fb.width
        )));
    }
    Ok((a as u128) * (b as u128) < (1u128 << point))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_beyond_width_rejected() {
        assert!(FixedPointFormat::new(3, 4).is_err());
        assert!(FixedPointFormat::new(3, 3).is_ok());
    }

    #[test]
    fn values() {
        let f = FixedPointFormat::new(4, 2).unwrap();
        assert_eq!(f.value(0b1011), 2.75);
        assert_eq!(FixedPointFormat::integer(3).value(5), 5.0);
        assert_eq!(FixedPointFormat::fraction(4).value(8), 0.5);
    }

    #[test]
    fn mixed_format_comparison() {
        // 0.5 (fraction, 4 bits) against 1 (integer)
        let half = FixedPointFormat::fraction(4);
        let int = FixedPointFormat::integer(2);
        assert_eq!(compare_values(8, half, 1, int), Ordering::Less);
        assert_eq!(compare_values(8, half, 0, int), Ordering::Greater);
        // 2/4 == 8/16
        let quarter = FixedPointFormat::fraction(2);
        assert_eq!(compare_values(2, quarter, 8, half), Ordering::Equal);
    }

    #[test]
    fn product_boundary() {
        let g = FixedPointFormat::integer(3);
        let h = FixedPointFormat::fraction(8);
        // 4 * 49/256 < 1, 4 * 64/256 == 1
        assert!(product_less_than_one(4, g, 49, h).unwrap());
        assert!(!product_less_than_one(4, g, 64, h).unwrap());
    }
}
