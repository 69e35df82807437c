//! Predictor-corrector integration of `x'(t) = f(x(t), x(qt))` on a uniform grid.
//!
//! Each step predicts with the rectangle rule and corrects once with the
//! trapezoidal rule. The delayed value `x(q t_n)` is the linear interpolant of
//! the two stored grid values bracketing `q n`. For the first few steps
//! (`n + 1 <= k = floor(1/(1-q))`) the bracket of `q(n+1)` includes the
//! unknown `x_{n+1}`; there the predicted value stands in until the corrector
//! has run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::validate_q;

/// Integration stops once `|x|` exceeds this bound.
pub const SATURATION_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig<T> {
    step: T,
    horizon: T,
    x0: T,
    steps: usize,
}

impl<T: Scalar> SolverConfig<T> {
    /// The number of steps is `round(horizon / step)` and the step is then
    /// adjusted to land exactly on the horizon.
    pub fn new(step: T, horizon: T, x0: T) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::invalid("h", "h > 0", step.as_f64()));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::invalid("T", "T > 0", horizon.as_f64()));
        }
        if !x0.is_finite() {
            return Err(Error::invalid("x0", "a finite value", x0.as_f64()));
        }
        let ratio = horizon / step;
        if ratio < T::one() {
            return Err(Error::invalid("T/h", "T/h >= 1", ratio.as_f64()));
        }
        let steps = ratio.round().to_usize().ok_or(Error::invalid(
            "T/h",
            "T/h fits in memory",
            ratio.as_f64(),
        ))?;
        Ok(Self {
            step: horizon / T::from_index(steps),
            horizon,
            x0,
            steps,
        })
    }

    /// The effective step `T / N`.
    pub fn step(&self) -> T {
        self.step
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    /// Grid points beyond `t = 0`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn with_x0(mut self, x0: T) -> Self {
        self.x0 = x0;
        self
    }
}

/// Uniform-grid solution `x_0 .. x_N` with `t_i = i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    step: T,
    q: T,
    values: Vec<T>,
    saturated_at: Option<usize>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn step(&self) -> T {
        self.step
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Index of the first value whose magnitude passed [`SATURATION_BOUND`].
    /// When set, that value is the last one stored.
    pub fn saturated_at(&self) -> Option<usize> {
        self.saturated_at
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated_at.is_some()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> T {
        T::from_index(i) * self.step
    }

    pub fn last(&self) -> T {
        *self.values.last().expect("trajectory holds x0")
    }

    /// `(t_i, x_i)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &x)| (self.time(i), x))
    }

    /// Applies `f` to every stored value, keeping grid and saturation index.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            step: self.step,
            q: self.q,
            values: self.values.iter().map(|&x| f(x)).collect(),
            saturated_at: self.saturated_at,
        }
    }

    /// Builds a trajectory from externally produced samples, e.g. for tests
    /// of downstream analysis.
    pub fn from_values(step: T, q: T, values: Vec<T>) -> Result<Self> {
        validate_q(q)?;
        if values.is_empty() {
            return Err(Error::invalid("values", "at least one sample", 0.0));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "finite samples", bad.as_f64()));
        }
        Ok(Self {
            step,
            q,
            values,
            saturated_at: None,
        })
    }
}

/// One point of the `(x(t), x(qt))` delay-coordinate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayedSample<T> {
    pub t: T,
    pub x: T,
    pub x_delayed: T,
}

/// `floor(1 / (1 - q))`: from this step index on, the delayed abscissa of the
/// next grid point never reaches the point being computed.
pub fn transition_index<T: Scalar>(q: T) -> usize {
    (T::one() / (T::one() - q))
        .floor()
        .to_usize()
        .unwrap_or(usize::MAX)
}

/// Position of `q n` relative to the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stencil<T> {
    /// `q n` coincides with grid index `m`.
    Exact(usize),
    /// `q n` lies strictly between `m` and `m + 1`, at fraction `delta`.
    Between(usize, T),
}

pub(crate) fn stencil<T: Scalar>(q: T, n: usize) -> Stencil<T> {
    let qn = q * T::from_index(n);
    let guard = T::grid_guard() * T::from_index(n);
    let m_real = (qn + guard).floor();
    let m = m_real.to_usize().expect("q n is a nonnegative index");
    let delta = qn - m_real;
    if delta <= guard {
        Stencil::Exact(m)
    } else if delta >= T::one() - guard {
        Stencil::Exact(m + 1)
    } else {
        Stencil::Between(m, delta)
    }
}

impl<T: Scalar> Stencil<T> {
    fn interpolate(self, values: &[T]) -> Result<T> {
        match self {
            Stencil::Exact(m) => values.get(m).copied().ok_or(Error::DelayIndex {
                index: m,
                len: values.len(),
            }),
            Stencil::Between(m, delta) => {
                let (lo, hi) = match (values.get(m), values.get(m + 1)) {
                    (Some(&lo), Some(&hi)) => (lo, hi),
                    _ => {
                        return Err(Error::DelayIndex {
                            index: m + 1,
                            len: values.len(),
                        })
                    }
                };
                // Rounding must not push the blend outside its endpoints.
                let blend = (T::one() - delta) * lo + delta * hi;
                Ok(blend.max(lo.min(hi)).min(lo.max(hi)))
            }
        }
    }
}

/// Approximation of `x(q t_n)` from the stored values `x_0 ..`.
pub fn delayed_value<T: Scalar>(values: &[T], q: T, n: usize) -> Result<T> {
    stencil(q, n).interpolate(values)
}

/// Whether computing `x_{n+1}` needs the predicted value inside the delayed
/// interpolant, i.e. `q (n+1) > n`.
pub fn uses_predicted_delay<T: Scalar>(q: T, n: usize) -> bool {
    matches!(stencil(q, n + 1), Stencil::Between(m, _) if m == n)
}

/// Integrates with an infallible right-hand side `f(x, x_delayed)`.
pub fn integrate<T, F>(mut rhs: F, q: T, config: &SolverConfig<T>) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: FnMut(T, T) -> T,
{
    try_integrate(|x, xd| Ok(rhs(x, xd)), q, config)
}

/// Integrates with a right-hand side that may reject its arguments; the
/// message is reported together with the step index.
pub fn try_integrate<T, F>(mut rhs: F, q: T, config: &SolverConfig<T>) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: FnMut(T, T) -> std::result::Result<T, String>,
{
    validate_q(q)?;
    let h = config.step;
    let half = h / T::lit(2.0);
    let bound = T::lit(SATURATION_BOUND);
    let k = transition_index(q);

    let mut eval = |x: T, xd: T, step: usize| -> Result<T> {
        let v = rhs(x, xd).map_err(|message| Error::RhsDomain { step, message })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                step,
                x: x.as_f64(),
                x_delayed: xd.as_f64(),
            })
        }
    };

    let mut values = Vec::with_capacity(config.steps + 1);
    values.push(config.x0);
    let mut saturated_at = None;
    let mut mu_n = config.x0;

    for n in 0..config.steps {
        let x_n = values[n];
        let f_n = eval(x_n, mu_n, n)?;
        let predicted = x_n + h * f_n;

        let mu_next = match stencil(q, n + 1) {
            Stencil::Between(m, delta) if m == n => {
                debug_assert!(n < k, "predicted delay beyond transition index");
                (T::one() - delta) * x_n + delta * predicted
            }
            s => s.interpolate(&values)?,
        };

        let f_predicted = eval(predicted, mu_next, n + 1)?;
        let x_next = x_n + half * (f_predicted + f_n);

        if !x_next.is_finite() || x_next.abs() > bound {
            if x_next.is_finite() {
                values.push(x_next);
            }
            saturated_at = Some(n + 1);
            break;
        }
        values.push(x_next);
        // Recomputed from the corrected x_{n+1} when it was part of the bracket.
        mu_n = delayed_value(&values, q, n + 1)?;
    }

    Ok(Trajectory {
        step: h,
        q,
        values,
        saturated_at,
    })
}

/// `(t_n, x_n, x(q t_n))` for every stored grid point, using the same
/// interpolation as the integrator.
pub fn resample_delayed<T: Scalar>(traj: &Trajectory<T>) -> Vec<DelayedSample<T>> {
    (0..traj.values.len())
        .map(|n| DelayedSample {
            t: traj.time(n),
            x: traj.values[n],
            x_delayed: delayed_value(&traj.values, traj.q, n)
                .expect("q n never exceeds n for stored indices"),
        })
        .collect()
}
