//! Standard normal distribution function from a linearly interpolated table,
//! accurate to about 1e-7 in absolute terms, which is far below the
//! resolution of the coder's frequency tables.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

/// Arguments beyond this are clamped to it.
pub const TAIL_LIMIT: f64 = 9.0;
const STEPS_PER_UNIT: f64 = 512.0;

/// `P(Z > i / STEPS_PER_UNIT)`.
pub fn tail_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let len = (TAIL_LIMIT * STEPS_PER_UNIT) as usize + 2;
        (0..len).map(|i| 0.5 * libm::erfc(i as f64 / STEPS_PER_UNIT * FRAC_1_SQRT_2)).collect()
    })
}

/// `P(Z < x)`, branch free since the sign of `x` is unpredictable in the
/// coder.
#[inline]
#[cfg(test)]
pub fn cdf(x: f64) -> f64 {
    cdf_with(tail_table(), x)
}

/// [`cdf`] with the table already fetched.
#[inline]
pub fn cdf_with(t: &[f64], x: f64) -> f64 {
    let u = x.abs().min(TAIL_LIMIT) * STEPS_PER_UNIT;
    // Through i32: the direct conversion to usize is several times slower.
    let i = u as i32 as usize;
    let s = u - i as f64;
    let q = t[i] + s * (t[i + 1] - t[i]);
    let positive = (x >= 0.0) as u8 as f64;
    positive + (1.0 - 2.0 * positive) * q
}
