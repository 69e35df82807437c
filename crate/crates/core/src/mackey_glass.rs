//! The Mackey–Glass analogue with proportional delay,
//! `x'(t) = -β x(t) + α x(qt) / (1 + x(qt)^c)`.

use serde::Serialize;

use crate::atlas::{classify_analytic_with, StabilityVerdict, VerdictKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{validate_q, PantographParams};
use crate::solver::{resample_delayed, try_integrate, DelayedSample, SolverConfig, Trajectory};
use crate::threshold::ThresholdCurve;

/// Default initial value for simulations.
pub const DEFAULT_X0: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MGParams<T> {
    alpha: T,
    beta: T,
    c: T,
    q: T,
}

fn validate_shape<T: Scalar>(alpha: T, beta: T, c: T) -> Result<()> {
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(Error::invalid("beta", "beta > 0", beta.as_f64()));
    }
    if !(alpha > beta && alpha.is_finite()) {
        return Err(Error::invalid("alpha", "alpha > beta", alpha.as_f64()));
    }
    if !(c > T::lit(2.0) && c.is_finite()) {
        return Err(Error::invalid("c", "c > 2", c.as_f64()));
    }
    Ok(())
}

impl<T: Scalar> MGParams<T> {
    pub fn new(alpha: T, beta: T, c: T, q: T) -> Result<Self> {
        validate_shape(alpha, beta, c)?;
        validate_q(q)?;
        Ok(Self { alpha, beta, c, q })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// `c` as an integer exponent, when it is one.
    fn integer_exponent(&self) -> Option<i32> {
        (self.c.fract() == T::zero() && self.c < T::lit(i32::MAX as f64))
            .then(|| self.c.as_f64() as i32)
    }
}

/// Right-hand side. Integer `c` uses exact integer powers; otherwise a
/// negative delayed value has no real power and is rejected.
pub fn mg_rhs<T: Scalar>(x: T, x_delayed: T, params: &MGParams<T>) -> Result<T> {
    rhs_value(x, x_delayed, params).map_err(|message| Error::RhsDomain { step: 0, message })
}

fn rhs_value<T: Scalar>(
    x: T,
    x_delayed: T,
    params: &MGParams<T>,
) -> std::result::Result<T, String> {
    let power = match params.integer_exponent() {
        Some(n) => x_delayed.powi(n),
        None if x_delayed < T::zero() => {
            return Err(format!(
                "x_delayed = {x_delayed} is negative and c = {} is not an integer",
                params.c
            ))
        }
        None => x_delayed.powf(params.c),
    };
    let value = -params.beta * x + params.alpha * x_delayed / (T::one() + power);
    if !power.is_finite() || !value.is_finite() {
        return Err(format!(
            "non-finite value at x = {x}, x_delayed = {x_delayed} (x_delayed^c = {power})"
        ));
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibria<T> {
    pub zero: T,
    pub positive: T,
    pub negative: T,
}

/// `0` and `±((α - β)/β)^(1/c)`.
pub fn mg_equilibria<T: Scalar>(alpha: T, beta: T, c: T) -> Result<Equilibria<T>> {
    validate_shape(alpha, beta, c)?;
    let positive = ((alpha - beta) / beta).powf(c.recip());
    Ok(Equilibria {
        zero: T::zero(),
        positive,
        negative: -positive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Equilibrium {
    Zero,
    NonZero,
}

/// Pantograph coefficients of the linearisation about an equilibrium. Both
/// nonzero equilibria share the same coefficients.
pub fn mg_linearize<T: Scalar>(
    equilibrium: Equilibrium,
    params: &MGParams<T>,
) -> PantographParams<T> {
    let MGParams { alpha, beta, c, q } = *params;
    let b = match equilibrium {
        Equilibrium::Zero => alpha,
        Equilibrium::NonZero => (beta - alpha) * beta * c / alpha + beta,
    };
    PantographParams::new(-beta, b, q)
        .expect("validated parameters linearise to valid coefficients")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MgRegime {
    StableAllQ,
    DelayDependent,
    UnstableAllQ,
}

impl MgRegime {
    /// Regime implied by the analytic verdict for the linearised nonzero
    /// equilibria. Silent verdicts have no regime.
    pub fn from_verdict(verdict: &StabilityVerdict) -> Option<Self> {
        match verdict.kind {
            VerdictKind::StableAllQ | VerdictKind::StableForThisQ => Some(MgRegime::StableAllQ),
            VerdictKind::DelayDependent => Some(MgRegime::DelayDependent),
            VerdictKind::UnstableAllQ => Some(MgRegime::UnstableAllQ),
            VerdictKind::TheoremSilent => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MgRegime::StableAllQ => "StableAllQ",
            MgRegime::DelayDependent => "DelayDependent",
            MgRegime::UnstableAllQ => "UnstableAllQ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MGBifurcation<T> {
    pub alpha1: T,
    pub alpha2: T,
    pub b_star_used: T,
    pub beta: T,
    pub c: T,
}

impl<T: Scalar> MGBifurcation<T> {
    /// `None` at and below `β` and exactly at either bifurcation value.
    pub fn regime_of(&self, alpha: T) -> Option<MgRegime> {
        if alpha > self.beta && alpha < self.alpha1 {
            Some(MgRegime::StableAllQ)
        } else if alpha > self.alpha1 && alpha < self.alpha2 {
            Some(MgRegime::DelayDependent)
        } else if alpha > self.alpha2 {
            Some(MgRegime::UnstableAllQ)
        } else {
            None
        }
    }
}

/// `α₁ = βc/(c-2)` where the linearisation has `b = a`, and
/// `α₂ = β²c/(b* + β(c-1))` where it has `b = b*`.
pub fn mg_bifurcation<T: Scalar>(beta: T, c: T, b_star: T) -> Result<MGBifurcation<T>> {
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(Error::invalid("beta", "beta > 0", beta.as_f64()));
    }
    if !(c > T::lit(2.0) && c.is_finite()) {
        return Err(Error::invalid("c", "c > 2", c.as_f64()));
    }
    let denominator = b_star + beta * (c - T::one());
    if !(denominator > T::zero()) {
        return Err(Error::invalid(
            "b_star",
            "b_star + beta(c - 1) > 0",
            b_star.as_f64(),
        ));
    }
    Ok(MGBifurcation {
        alpha1: beta * c / (c - T::lit(2.0)),
        alpha2: beta * beta * c / denominator,
        b_star_used: b_star,
        beta,
        c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgSimulation<T> {
    pub trajectory: Trajectory<T>,
    pub attractor: Vec<DelayedSample<T>>,
}

/// Integrates from `config.x0()`; the attractor holds `(t, x(t), x(qt))`
/// on the grid.
pub fn mg_simulate<T: Scalar>(
    params: &MGParams<T>,
    config: &SolverConfig<T>,
) -> Result<MgSimulation<T>> {
    let trajectory = try_integrate(|x, xd| rhs_value(x, xd, params), params.q, config)?;
    let attractor = resample_delayed(&trajectory);
    Ok(MgSimulation {
        trajectory,
        attractor,
    })
}

/// Analytic verdict for the nonzero equilibria.
pub fn mg_classify<T, C>(alpha: T, beta: T, c: T, q: T, curve: &C) -> Result<StabilityVerdict>
where
    T: Scalar,
    C: ThresholdCurve<T> + ?Sized,
{
    let params = MGParams::new(alpha, beta, c, q)?;
    let lin = mg_linearize(Equilibrium::NonZero, &params);
    classify_analytic_with(lin.a(), lin.b(), lin.q(), curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threshold::FixedThreshold;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rhs_examples() {
        let p = MGParams::new(2.0, 1.0, 10.0, 0.5).unwrap();
        assert_eq!(mg_rhs(0.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(mg_rhs(1.0, 1.0, &p).unwrap(), 0.0);
        let e = mg_equilibria(2.0, 1.0, 10.0).unwrap();
        assert_eq!(e.positive, 1.0);
    }

    #[test]
    fn non_integer_exponent_rejects_negative_delay() {
        let p = MGParams::new(2.0, 1.0, 2.5, 0.5).unwrap();
        assert!(matches!(
            mg_rhs(0.1, -0.1, &p),
            Err(Error::RhsDomain { .. })
        ));
        assert!(mg_rhs(0.1, 0.1, &p).is_ok());
    }

    #[test]
    fn equilibria_match_reference_values() {
        for (alpha, expected) in [(1.24, 0.867004), (1.28, 0.880473), (1.6, 0.9502)] {
            let e = mg_equilibria(alpha, 1.0, 10.0).unwrap();
            assert!(close(e.positive, expected, 5e-5), "{alpha}: {}", e.positive);
            assert_eq!(e.negative, -e.positive);
            assert_eq!(e.zero, 0.0);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(MGParams::new(1.0, 1.0, 10.0, 0.5).is_err());
        assert!(MGParams::new(2.0, 1.0, 2.0, 0.5).is_err());
        assert!(MGParams::new(2.0, 0.0, 10.0, 0.5).is_err());
        assert!(MGParams::new(2.0, 1.0, 10.0, 1.0).is_err());
        assert!(mg_equilibria(0.5, 1.0, 10.0).is_err());
    }

    #[test]
    fn linearisation_examples() {
        let p = MGParams::new(1.6, 1.0, 10.0, 0.5).unwrap();
        let z = mg_linearize(Equilibrium::Zero, &p);
        assert_eq!((z.a(), z.b()), (-1.0, 1.6));
        let p = MGParams::new(1.25, 1.0, 10.0, 0.5).unwrap();
        let nz = mg_linearize(Equilibrium::NonZero, &p);
        assert!(close(nz.b(), -1.0, 1e-12));
    }

    #[test]
    fn bifurcation_values() {
        let bif = mg_bifurcation(1.0, 10.0, -1.4).unwrap();
        assert!(close(bif.alpha1, 1.25, 1e-12));
        assert!(close(bif.alpha2, 1.31579, 5e-6));
        assert_eq!(bif.regime_of(1.24), Some(MgRegime::StableAllQ));
        assert_eq!(bif.regime_of(1.28), Some(MgRegime::DelayDependent));
        assert_eq!(bif.regime_of(1.6), Some(MgRegime::UnstableAllQ));
        assert_eq!(bif.regime_of(1.25), None);
        assert!(close(
            mg_bifurcation(2.0, 4.0, 0.0).unwrap().alpha1,
            4.0,
            1e-12
        ));
        assert!(mg_bifurcation(1.0, 10.0, -9.0).is_err());
    }

    #[test]
    fn classify_agrees_with_bifurcation_regimes() {
        let curve = FixedThreshold(-1.4);
        let bif = mg_bifurcation(1.0, 10.0, -1.4).unwrap();
        for alpha in [1.1, 1.24, 1.28, 1.3, 1.6, 2.5] {
            let v = mg_classify(alpha, 1.0, 10.0, 0.7, &curve).unwrap();
            assert_eq!(
                MgRegime::from_verdict(&v),
                bif.regime_of(alpha),
                "alpha = {alpha}"
            );
        }
    }

    #[test]
    fn simulation_reports_domain_errors_with_step() {
        let p = MGParams::new(2.0, 1.0, 2.5, 0.5).unwrap();
        let cfg = SolverConfig::new(0.01, 1.0, -0.2).unwrap();
        assert!(matches!(
            mg_simulate(&p, &cfg),
            Err(Error::RhsDomain { .. })
        ));
    }
}
