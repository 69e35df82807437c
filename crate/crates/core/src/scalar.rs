//! Floating-point abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Scalar`] so they run in `f32` or `f64`.
//! The `f64` instantiation is the reference one; `f32` is useful for quick
//! exploratory sweeps where the extra precision is not needed.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts a literal. Panics only if the literal is not representable at
    /// all, which cannot happen for the finite constants used in this crate.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal must be representable")
    }

    fn from_index(n: usize) -> Self {
        Self::from_usize(n).expect("index must be representable")
    }

    /// Lossy widening used for diagnostics and text output.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute guard used when snapping fractional grid positions: the larger
    /// of `1e-12` and a few ulps of the working precision.
    fn grid_guard() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(4.0))
    }

    /// `v` if it is finite in this precision, otherwise the largest finite
    /// value with the same sign.
    fn clamp_finite(v: f64) -> Self {
        match Self::from_f64(v) {
            Some(x) if x.is_finite() => x,
            _ => Self::max_value().copysign(Self::lit(v.signum())),
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Formats like C's `%.17g`: shortest fixed or exponent notation carrying 17
/// significant digits, trailing zeros removed. Round-trips every `f64`.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
