//! Exact power-series solution of the linear pantograph equation
//! `x'(t) = a x(t) + b x(qt)`.
//!
//! The solution is `x(t) = x0 * sum_n t^n / n! * prod_{j<n} (a + b q^j)`. Because the
//! factorial eventually dominates, the series converges for every finite `t`,
//! so it serves as the reference against which the integrator is checked.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients of `x'(t) = a x(t) + b x(qt)` with `0 < q < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PantographParams<T> {
    a: T,
    b: T,
    q: T,
}

impl<T: Scalar> PantographParams<T> {
    pub fn new(a: T, b: T, q: T) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::invalid("a", "a finite value", a.as_f64()));
        }
        if !b.is_finite() {
            return Err(Error::invalid("b", "a finite value", b.as_f64()));
        }
        validate_q(q)?;
        Ok(Self { a, b, q })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// The right-hand side `a x + b x_delayed`.
    pub fn rhs(&self, x: T, x_delayed: T) -> T {
        self.a * x + self.b * x_delayed
    }
}

pub(crate) fn validate_q<T: Scalar>(q: T) -> Result<()> {
    if q > T::zero() && q < T::one() {
        Ok(())
    } else {
        Err(Error::invalid("q", "0 < q < 1", q.as_f64()))
    }
}

/// `prod_{j<n} (a + b q^j)`, with overflow reported instead of propagated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCoefficient<T> {
    /// The product, clamped to the largest finite magnitude when saturated.
    pub value: T,
    pub saturated: bool,
}

pub fn product_coefficient<T: Scalar>(
    params: &PantographParams<T>,
    n: usize,
) -> ProductCoefficient<T> {
    let mut value = T::one();
    let mut q_pow = T::one();
    for _ in 0..n {
        value = value * (params.a + params.b * q_pow);
        q_pow = q_pow * params.q;
        if !value.is_finite() {
            return ProductCoefficient {
                value: T::max_value().copysign(value),
                saturated: true,
            };
        }
    }
    ProductCoefficient {
        value,
        saturated: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions<T> {
    /// Relative truncation threshold for individual terms.
    pub tolerance: T,
    pub max_terms: usize,
}

impl<T: Scalar> Default for SeriesOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-12),
            max_terms: 500,
        }
    }
}

/// Number of consecutive negligible terms required before truncating. Terms
/// can change sign and pass through small values when `a + b q^j` crosses zero.
const SMALL_TERM_RUN: usize = 3;

/// Partial sums beyond this magnitude are reported as saturated.
const SATURATION: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult<T> {
    pub value: T,
    pub terms_used: usize,
    pub converged: bool,
    /// `|last term| / max(1, |partial sum|)` at the point summation stopped.
    pub last_term_magnitude: T,
    /// The partial sum passed the saturation bound; `value` is the clamped sum.
    pub saturated: bool,
}

/// Sums the series at `t >= 0`.
///
/// Summation stops after three consecutive terms each smaller than
/// `tolerance * max(1, |partial sum|)`. Reaching `max_terms` first yields
/// `converged = false` rather than an error.
pub fn evaluate_series<T: Scalar>(
    params: &PantographParams<T>,
    x0: T,
    t: T,
    options: &SeriesOptions<T>,
) -> Result<SeriesResult<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::invalid("t", "t >= 0", t.as_f64()));
    }
    if !(options.tolerance > T::zero()) {
        return Err(Error::invalid(
            "tolerance",
            "tolerance > 0",
            options.tolerance.as_f64(),
        ));
    }
    if options.max_terms == 0 {
        return Err(Error::invalid("max_terms", "max_terms >= 1", 0.0));
    }

    let bound = T::clamp_finite(SATURATION);
    // Summed with x0 = 1 and scaled at the end, so the result is linear in x0.
    let mut sum = T::one();
    let mut term = T::one();
    let mut q_pow = T::one();
    let mut terms_used = 1;
    let mut small_run = 0;
    let mut last = T::zero();
    let mut converged = false;
    let mut saturated = false;

    for n in 1..options.max_terms {
        term = term * t / T::from_index(n) * (params.a + params.b * q_pow);
        q_pow = q_pow * params.q;
        sum = sum + term;
        terms_used += 1;

        if !term.is_finite() || !sum.is_finite() || sum.abs() > bound {
            saturated = true;
            sum = bound.copysign(if sum.is_nan() { term } else { sum });
            last = T::infinity();
            break;
        }

        last = term.abs() / sum.abs().max(T::one());
        if last < options.tolerance {
            small_run += 1;
            if small_run >= SMALL_TERM_RUN {
                converged = true;
                break;
            }
        } else {
            small_run = 0;
        }
    }

    Ok(SeriesResult {
        value: x0 * sum,
        terms_used,
        converged,
        last_term_magnitude: last,
        saturated,
    })
}

/// Exponential lower bound on the `x0 = 1` solution implied by the
/// series whenever every factor `a + b q^j` is bounded below by a positive
/// constant: `e^{at}` when `a, b > 0`, `e^{(a+b)t}` when `a > -b > 0`.
pub fn exponential_lower_bound<T: Scalar>(params: &PantographParams<T>, t: T) -> Option<T> {
    let (a, b) = (params.a, params.b);
    let zero = T::zero();
    if a > zero && b > zero {
        Some((a * t).exp())
    } else if b < zero && a + b > zero {
        Some(((a + b) * t).exp())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64, q: f64) -> PantographParams<f64> {
        PantographParams::new(a, b, q).unwrap()
    }

    #[test]
    fn q_outside_unit_interval_is_rejected() {
        for q in [0.0, 1.0, -0.3, 1.5, f64::NAN] {
            let err = PantographParams::new(1.0, 1.0, q).unwrap_err();
            assert!(
                err.to_string().contains("q must satisfy 0 < q < 1"),
                "{err}"
            );
        }
        assert!(PantographParams::new(f64::INFINITY, 1.0, 0.5).is_err());
    }

    #[test]
    fn product_coefficient_examples() {
        assert_eq!(product_coefficient(&p(2.5, 1.0, 0.2), 0).value, 1.0);
        assert_eq!(product_coefficient(&p(1.0, 0.0, 0.5), 7).value, 1.0);
        // (2.5 + 1)(2.5 + 0.2)
        let c = product_coefficient(&p(2.5, 1.0, 0.2), 2);
        assert!((c.value - 9.45).abs() < 1e-14);
        assert!(!c.saturated);
    }

    #[test]
    fn product_coefficient_reports_overflow() {
        let c = product_coefficient(&p(1e200, 1e200, 0.5), 3);
        assert!(c.saturated);
        assert!(c.value.is_finite());
    }

    #[test]
    fn series_at_origin_is_initial_value() {
        let r = evaluate_series(&p(-3.0, 2.0, 0.4), 1.0, 0.0, &SeriesOptions::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.converged);
    }

    #[test]
    fn series_with_zero_delay_coefficient_is_exponential() {
        let r = evaluate_series(&p(1.0, 0.0, 0.5), 1.0, 1.0, &SeriesOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - std::f64::consts::E).abs() / std::f64::consts::E < 1e-12);
        assert!(r.last_term_magnitude <= 1e-12);
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        assert!(evaluate_series(&p(1.0, 1.0, 0.5), 1.0, -1.0, &SeriesOptions::default()).is_err());
    }

    #[test]
    fn term_budget_exhaustion_is_flagged() {
        let opts = SeriesOptions {
            tolerance: 1e-12,
            max_terms: 5,
        };
        let r = evaluate_series(&p(2.0, 1.0, 0.5), 1.0, 10.0, &opts).unwrap();
        assert!(!r.converged);
        assert!(r.terms_used <= 5);
    }

    #[test]
    fn huge_arguments_saturate_instead_of_overflowing() {
        let opts = SeriesOptions {
            tolerance: 1e-12,
            max_terms: 5000,
        };
        let r = evaluate_series(&p(3.0, 3.0, 0.9), 1.0, 400.0, &opts).unwrap();
        assert!(r.saturated);
        assert!(!r.converged);
        assert!(r.value.is_finite());
    }

    #[test]
    fn lower_bound_examples() {
        let b1 = exponential_lower_bound(&p(2.5, 1.0, 0.2), 1.0).unwrap();
        assert!((b1 - 2.5f64.exp()).abs() < 1e-12);
        assert!((b1 - 12.18249).abs() < 1e-5);
        let b2 = exponential_lower_bound(&p(2.5, -2.0, 0.7), 2.0).unwrap();
        assert!((b2 - 1.0f64.exp()).abs() < 1e-12);
        assert_eq!(exponential_lower_bound(&p(-1.0, 0.5, 0.5), 1.0), None);
        assert_eq!(exponential_lower_bound(&p(1.0, 0.0, 0.5), 1.0), None);
    }

    #[test]
    fn works_in_single_precision() {
        let params = PantographParams::<f32>::new(1.0, 0.0, 0.5).unwrap();
        let opts = SeriesOptions {
            tolerance: 1e-7,
            max_terms: 100,
        };
        let r = evaluate_series(&params, 1.0, 1.0, &opts).unwrap();
        assert!((r.value - std::f32::consts::E).abs() < 1e-6);
    }
}
