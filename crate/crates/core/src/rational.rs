//! Exact rational helpers.

use num_rational::Ratio;

/// Exact rational number used for every expansion value and threshold.
pub type Rational = Ratio<i64>;

/// `num / den` as a reduced rational.
///
/// Panics if `den == 0`.
pub fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

/// `count <= threshold * scale * size`, evaluated without rounding.
pub fn le_scaled(count: usize, threshold: Rational, scale: Rational, size: usize) -> bool {
    let lhs = count as i128 * *threshold.denom() as i128 * *scale.denom() as i128;
    let rhs = *threshold.numer() as i128 * *scale.numer() as i128 * size as i128;
    lhs <= rhs
}

/// `a/b < c/d` for non-negative integers with positive denominators.
#[inline]
pub(crate) fn frac_lt(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) < (c as u128) * (b as u128)
}

#[inline]
pub(crate) fn frac_eq(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) == (c as u128) * (b as u128)
}
