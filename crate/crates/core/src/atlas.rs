//! Stability classification of the linear pantograph equation.
//!
//! Two independent views of the `(a, b, q)` parameter space live here:
//! the analytic verdict assembled from the instability and stability theorems
//! plus the numerically observed regions, and the empirical verdict obtained
//! by integrating from `x0 = 1` and inspecting the trajectory. Sweeps run both
//! and flag points where they disagree.
//!
//! Region map for `a + b < 0` (boundaries excluded):
//!
//! * `a < 0, a < b < -a`: stable; proven when `q > b²/a²`, observed otherwise.
//! * `b < 0, b < a < -b`: for `a <= 0` stable for large enough `q` when
//!   `b > b*(a)` and unstable for every `q` when `b < b*(a)`; for `a > 0`
//!   unstable for every `q`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{validate_q, PantographParams};
use crate::solver::{integrate, SolverConfig, Trajectory};
use crate::threshold::{ThresholdCurve, ThresholdTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VerdictKind {
    UnstableAllQ,
    StableAllQ,
    StableForThisQ,
    DelayDependent,
    TheoremSilent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Provenance {
    Theorem1,
    Theorem2,
    Theorem3,
    Theorem4,
    #[serde(rename = "Conjecture_Region1")]
    ConjectureRegion1,
    #[serde(rename = "Conjecture_Region2")]
    ConjectureRegion2,
    None,
}

impl Provenance {
    pub fn is_conjecture(self) -> bool {
        matches!(
            self,
            Provenance::ConjectureRegion1 | Provenance::ConjectureRegion2
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Theorem1 => "Theorem1",
            Provenance::Theorem2 => "Theorem2",
            Provenance::Theorem3 => "Theorem3",
            Provenance::Theorem4 => "Theorem4",
            Provenance::ConjectureRegion1 => "Conjecture_Region1",
            Provenance::ConjectureRegion2 => "Conjecture_Region2",
            Provenance::None => "None",
        }
    }
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::UnstableAllQ => "UnstableAllQ",
            VerdictKind::StableAllQ => "StableAllQ",
            VerdictKind::StableForThisQ => "StableForThisQ",
            VerdictKind::DelayDependent => "DelayDependent",
            VerdictKind::TheoremSilent => "TheoremSilent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StabilityVerdict {
    pub kind: VerdictKind,
    pub provenance: Provenance,
}

impl StabilityVerdict {
    const fn new(kind: VerdictKind, provenance: Provenance) -> Self {
        Self { kind, provenance }
    }

    const SILENT: Self = Self::new(VerdictKind::TheoremSilent, Provenance::None);

    pub fn is_stable(&self) -> bool {
        matches!(
            self.kind,
            VerdictKind::StableAllQ | VerdictKind::StableForThisQ
        )
    }
}

/// Analytic verdict using the bundled threshold table for `b*(a)`.
pub fn classify_analytic<T: Scalar>(a: T, b: T, q: T) -> Result<StabilityVerdict> {
    classify_analytic_with(a, b, q, &ThresholdTable::<T>::bundled())
}

/// Analytic verdict with an explicit `b*(a)` provider.
///
/// Theorem 4 (`a + b > 0`) is checked first; the provenance then names the
/// most specific theorem whose hypothesis holds. Points on `a + b = 0`,
/// `b = ±a`, `q = b²/a²` or `b = b*(a)` are reported as `TheoremSilent`.
pub fn classify_analytic_with<T, C>(a: T, b: T, q: T, curve: &C) -> Result<StabilityVerdict>
where
    T: Scalar,
    C: ThresholdCurve<T> + ?Sized,
{
    validate_q(q)?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("a, b", "finite values", (a + b).as_f64()));
    }
    use Provenance as P;
    use VerdictKind as K;
    let zero = T::zero();

    if a + b > zero {
        let provenance = if a > zero && b > zero {
            P::Theorem1
        } else if b < zero && a > -b {
            P::Theorem2
        } else {
            P::Theorem4
        };
        return Ok(StabilityVerdict::new(K::UnstableAllQ, provenance));
    }
    if a + b == zero || b == a || b == -a {
        return Ok(StabilityVerdict::SILENT);
    }

    // Region 1: a < 0, a < b < -a
    if a < zero && a < b && b < -a {
        let ratio = (b * b) / (a * a);
        return Ok(if q > ratio {
            StabilityVerdict::new(K::StableForThisQ, P::Theorem3)
        } else if q < ratio {
            StabilityVerdict::new(K::StableForThisQ, P::ConjectureRegion1)
        } else {
            StabilityVerdict::SILENT
        });
    }

    // Region 2: b < 0, b < a < -b
    if b < zero && b < a && a < -b {
        if a > zero {
            return Ok(StabilityVerdict::new(K::UnstableAllQ, P::ConjectureRegion2));
        }
        let b_star = curve.b_star(a);
        return Ok(if b > b_star {
            StabilityVerdict::new(K::DelayDependent, P::ConjectureRegion2)
        } else if b < b_star {
            StabilityVerdict::new(K::UnstableAllQ, P::ConjectureRegion2)
        } else {
            StabilityVerdict::SILENT
        });
    }

    Ok(StabilityVerdict::SILENT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrajectoryKind {
    ConvergentMonotone,
    ConvergentOscillatory,
    DivergentMonotone,
    DivergentOscillatory,
    Indeterminate,
}

impl TrajectoryKind {
    pub fn is_convergent(self) -> bool {
        matches!(
            self,
            TrajectoryKind::ConvergentMonotone | TrajectoryKind::ConvergentOscillatory
        )
    }

    pub fn is_divergent(self) -> bool {
        matches!(
            self,
            TrajectoryKind::DivergentMonotone | TrajectoryKind::DivergentOscillatory
        )
    }

    pub fn is_oscillatory(self) -> bool {
        matches!(
            self,
            TrajectoryKind::ConvergentOscillatory | TrajectoryKind::DivergentOscillatory
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryKind::ConvergentMonotone => "ConvergentMonotone",
            TrajectoryKind::ConvergentOscillatory => "ConvergentOscillatory",
            TrajectoryKind::DivergentMonotone => "DivergentMonotone",
            TrajectoryKind::DivergentOscillatory => "DivergentOscillatory",
            TrajectoryKind::Indeterminate => "Indeterminate",
        }
    }

    fn convergent(oscillatory: bool) -> Self {
        if oscillatory {
            TrajectoryKind::ConvergentOscillatory
        } else {
            TrajectoryKind::ConvergentMonotone
        }
    }

    fn divergent(oscillatory: bool) -> Self {
        if oscillatory {
            TrajectoryKind::DivergentOscillatory
        } else {
            TrajectoryKind::DivergentMonotone
        }
    }
}

/// What decided a [`TrajectoryClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Evidence {
    /// The integrator hit its saturation bound.
    Saturation,
    /// The final window is below the convergence threshold or above the
    /// divergence threshold.
    Magnitude,
    /// Neither threshold was reached; the sign of the envelope's log-log slope
    /// decided.
    Trend,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationThresholds<T> {
    /// `ε_conv`: final-window deviation below this is convergence. A tenth of
    /// it is the dead-band for sign-change counting.
    pub convergence: T,
    /// `M_div`: final-window deviation above this (and above everything
    /// before the window) is divergence.
    pub divergence: T,
    /// Minimum magnitude of the envelope growth exponent `s` in `|d| ~ t^s`
    /// for a trend-based decision.
    pub trend_exponent: T,
}

impl<T: Scalar> Default for ClassificationThresholds<T> {
    fn default() -> Self {
        Self {
            convergence: T::lit(1e-5),
            divergence: T::lit(1e4),
            trend_exponent: T::lit(1e-4),
        }
    }
}

impl<T: Scalar> ClassificationThresholds<T> {
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            convergence: self.convergence * factor,
            divergence: self.divergence * factor,
            trend_exponent: self.trend_exponent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryClass<T> {
    pub kind: TrajectoryKind,
    /// Largest `|x - reference|` over the final 20% of the run.
    pub final_magnitude: T,
    pub sign_changes: usize,
    /// Estimated exponent `s` of the envelope `|x - reference| ~ t^s` near
    /// the end of the run, when the trajectory allows one.
    pub growth_exponent: Option<T>,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy)]
struct Lobe<T> {
    peak: T,
    peak_index: usize,
}

/// Splits the deviation sequence into lobes of constant sign, ignoring
/// samples inside the dead-band.
fn lobes<T: Scalar>(dev: &[T], deadband: T) -> Vec<Lobe<T>> {
    let mut out = Vec::new();
    let mut sign = 0i8;
    let mut current = Lobe {
        peak: T::zero(),
        peak_index: 0,
    };
    for (i, &d) in dev.iter().enumerate() {
        let s = if d > deadband {
            1
        } else if d < -deadband {
            -1
        } else {
            0
        };
        if s != 0 && sign != 0 && s != sign {
            out.push(current);
            current = Lobe {
                peak: T::zero(),
                peak_index: i,
            };
        }
        if s != 0 {
            sign = s;
        }
        if d.abs() > current.peak {
            current = Lobe {
                peak: d.abs(),
                peak_index: i,
            };
        }
    }
    out.push(current);
    out
}

fn log_slope<T: Scalar>(m0: T, t0: T, m1: T, t1: T) -> Option<T> {
    let zero = T::zero();
    (m0 > zero && m1 > zero && t0 > zero && t1 > t0).then(|| (m1 / m0).ln() / (t1 / t0).ln())
}

/// Least-squares slope of `ln peak` against `ln t`, returned only when it is
/// at least three standard errors away from zero.
fn significant_log_slope<T: Scalar>(points: &[(T, T)]) -> Option<T> {
    let n = T::from_index(points.len());
    let logs: Vec<(T, T)> = points.iter().map(|&(t, m)| (t.ln(), m.ln())).collect();
    let mx = logs.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = logs.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxx = logs
        .iter()
        .fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    let sxy = logs
        .iter()
        .fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    if !(sxx > T::zero()) {
        return None;
    }
    let slope = sxy / sxx;
    let ssr = logs.iter().fold(T::zero(), |s, p| {
        let r = p.1 - my - slope * (p.0 - mx);
        s + r * r
    });
    let se = (ssr / (n - T::lit(2.0)) / sxx).sqrt();
    (slope.abs() > T::lit(3.0) * se).then_some(slope)
}

/// Envelope growth exponent.
///
/// Oscillating runs use the peaks of the complete lobes in the second half
/// of the run, skipping the lobe that starts at `t = 0`. With four or more
/// such lobes the exponent is a regression over all of them; otherwise it
/// compares the last two lobes of the same sign, and a running lobe that
/// already exceeds its same-sign predecessor counts as growth.
/// Non-oscillating runs use the deviation at both ends of the final window.
fn envelope_exponent<T: Scalar>(
    traj: &Trajectory<T>,
    dev: &[T],
    lobes: &[Lobe<T>],
    window_start: usize,
) -> Option<T> {
    let t = |i: usize| traj.time(i);
    if lobes.len() < 3 {
        let end = dev.len() - 1;
        let (d0, d1) = (dev[window_start], dev[end]);
        if d0.signum() != d1.signum() {
            return None;
        }
        return log_slope(d0.abs(), t(window_start), d1.abs(), t(end));
    }

    let interior = &lobes[1..];
    let (complete, running) = interior.split_at(interior.len() - 1);
    let running = running[0];
    let half = dev.len() / 2;
    let late: Vec<(T, T)> = complete
        .iter()
        .filter(|l| l.peak_index >= half)
        .map(|l| (t(l.peak_index), l.peak))
        .collect();
    if late.len() >= 4 {
        return significant_log_slope(&late);
    }

    let k = complete.len();
    let last = complete[k - 1];
    let pair = |earlier: Lobe<T>, later: Lobe<T>| {
        log_slope(
            earlier.peak,
            t(earlier.peak_index),
            later.peak,
            t(later.peak_index),
        )
    };
    let mut s = match k {
        0 | 1 => None,
        2 => pair(complete[0], last),
        _ => pair(complete[k - 3], last),
    };
    let same_sign = if k >= 2 { complete[k - 2] } else { last };
    if running.peak > same_sign.peak {
        let rising = pair(same_sign, running);
        s = match (s, rising) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
    s
}

/// Empirical class of a trajectory relative to `reference`.
///
/// In order: saturation or a final window above `M_div` that also exceeds
/// everything before it is divergence; a final window below `ε_conv` is
/// convergence; otherwise the envelope exponent decides when its magnitude
/// exceeds `trend_exponent`, and the run is `Indeterminate` when it does not.
/// Two or more sign changes of `x - reference` (outside a dead-band of
/// `ε_conv / 10`) make the class oscillatory.
pub fn classify_trajectory<T: Scalar>(
    traj: &Trajectory<T>,
    reference: T,
    thresholds: &ClassificationThresholds<T>,
) -> TrajectoryClass<T> {
    let dev: Vec<T> = traj.values().iter().map(|&x| x - reference).collect();
    let n = dev.len();
    let window_start = n - (n / 5).max(1);
    let window_start = window_start.min(n - 1);
    let final_magnitude = dev[window_start..]
        .iter()
        .fold(T::zero(), |m, d| m.max(d.abs()));
    let earlier_max = dev[..window_start]
        .iter()
        .fold(T::zero(), |m, d| m.max(d.abs()));

    let deadband = thresholds.convergence / T::lit(10.0);
    let lobes = lobes(&dev, deadband);
    let sign_changes = lobes.len() - 1;
    let oscillatory = sign_changes >= 2;
    let growth_exponent = if n >= 2 {
        envelope_exponent(traj, &dev, &lobes, window_start)
    } else {
        None
    };

    let (kind, evidence) = if traj.is_saturated() {
        (TrajectoryKind::divergent(oscillatory), Evidence::Saturation)
    } else if final_magnitude > thresholds.divergence && final_magnitude > earlier_max {
        (TrajectoryKind::divergent(oscillatory), Evidence::Magnitude)
    } else if final_magnitude < thresholds.convergence {
        (TrajectoryKind::convergent(oscillatory), Evidence::Magnitude)
    } else {
        match growth_exponent {
            Some(s) if s > thresholds.trend_exponent => {
                (TrajectoryKind::divergent(oscillatory), Evidence::Trend)
            }
            Some(s) if s < -thresholds.trend_exponent => {
                (TrajectoryKind::convergent(oscillatory), Evidence::Trend)
            }
            _ => (TrajectoryKind::Indeterminate, Evidence::None),
        }
    };

    TrajectoryClass {
        kind,
        final_magnitude,
        sign_changes,
        growth_exponent,
        evidence,
    }
}

/// Integration settings and thresholds for empirical probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig<T> {
    pub step: T,
    pub horizon: T,
    pub thresholds: ClassificationThresholds<T>,
}

impl<T: Scalar> ProbeConfig<T> {
    /// Single probes: `h = 1e-3`, `T = 50`.
    pub fn single() -> Self {
        Self {
            step: T::lit(1e-3),
            horizon: T::lit(50.0),
            thresholds: ClassificationThresholds::default(),
        }
    }

    /// Sweeps: `h = 1e-2`, `T = 50`.
    pub fn sweep() -> Self {
        Self {
            step: T::lit(1e-2),
            ..Self::single()
        }
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_step(mut self, step: T) -> Self {
        self.step = step;
        self
    }

    pub fn solver_config(&self, x0: T) -> Result<SolverConfig<T>> {
        SolverConfig::new(self.step, self.horizon, x0)
    }
}

impl<T: Scalar> Default for ProbeConfig<T> {
    fn default() -> Self {
        Self::single()
    }
}

/// Integrates the linear equation from `x0 = 1` and classifies against 0.
pub fn probe_stability<T: Scalar>(
    a: T,
    b: T,
    q: T,
    probe: &ProbeConfig<T>,
) -> Result<TrajectoryClass<T>> {
    let params = PantographParams::new(a, b, q)?;
    let traj = integrate(
        |x, xd| params.rhs(x, xd),
        q,
        &probe.solver_config(T::one())?,
    )?;
    Ok(classify_trajectory(&traj, T::zero(), &probe.thresholds))
}

/// Evenly spaced values on `[lo, hi]`. A single point requires `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange<T> {
    lo: T,
    hi: T,
    points: usize,
}

impl<T: Scalar> AxisRange<T> {
    pub fn new(lo: T, hi: T, points: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("range", "finite bounds", (hi - lo).as_f64()));
        }
        if points == 1 && lo != hi {
            return Err(Error::invalid(
                "resolution",
                "resolution >= 2 unless the range is a single point",
                1.0,
            ));
        }
        if points == 0 || hi < lo {
            return Err(Error::invalid(
                "range",
                "lo <= hi and resolution >= 1",
                points as f64,
            ));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn point(v: T) -> Self {
        Self {
            lo: v,
            hi: v,
            points: 1,
        }
    }

    pub fn values(&self) -> Vec<T> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let span = self.hi - self.lo;
        let last = T::from_index(self.points - 1);
        (0..self.points)
            .map(|i| {
                if i == self.points - 1 {
                    self.hi
                } else {
                    self.lo + span * T::from_index(i) / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    pub a: T,
    pub b: T,
    pub q: T,
    pub verdict: StabilityVerdict,
    pub empirical: std::result::Result<TrajectoryClass<T>, Error>,
    /// The analytic and empirical verdicts contradict each other.
    pub flagged: bool,
}

impl<T: Scalar> SweepRecord<T> {
    pub fn empirical_label(&self) -> String {
        match &self.empirical {
            Ok(class) => class.kind.as_str().to_string(),
            Err(e) => format!("error: {e}"),
        }
    }
}

fn disagree<T>(verdict: &StabilityVerdict, class: &TrajectoryClass<T>) -> bool {
    (verdict.is_stable() && class.kind.is_divergent())
        || (verdict.kind == VerdictKind::UnstableAllQ && class.kind.is_convergent())
}

/// Evaluates both verdicts on the grid `q × a × b` (in that nesting order).
/// Points are processed in parallel; the output order is the grid order.
pub fn sweep_region<T, C>(
    a_range: &AxisRange<T>,
    b_range: &AxisRange<T>,
    q_list: &[T],
    probe: &ProbeConfig<T>,
    curve: &C,
) -> Result<Vec<SweepRecord<T>>>
where
    T: Scalar,
    C: ThresholdCurve<T> + ?Sized,
{
    if q_list.is_empty() {
        return Err(Error::invalid("q", "a nonempty q list", 0.0));
    }
    for &q in q_list {
        validate_q(q)?;
    }
    probe.solver_config(T::one())?;

    let a_values = a_range.values();
    let b_values = b_range.values();
    let grid: Vec<(T, T, T)> = q_list
        .iter()
        .flat_map(|&q| {
            let b_values = &b_values;
            a_values
                .iter()
                .flat_map(move |&a| b_values.iter().map(move |&b| (a, b, q)))
        })
        .collect();

    grid.into_par_iter()
        .map(|(a, b, q)| {
            let verdict = classify_analytic_with(a, b, q, curve)?;
            let empirical = probe_stability(a, b, q, probe);
            let flagged = match &empirical {
                Ok(class) => disagree(&verdict, class),
                Err(_) => false,
            };
            Ok(SweepRecord {
                a,
                b,
                q,
                verdict,
                empirical,
                flagged,
            })
        })
        .collect()
}
