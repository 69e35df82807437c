//! Linear pantograph equation `x'(t) = a x(t) + b x(qt)` and its
//! Mackey–Glass analogue: power-series solutions, a predictor–corrector
//! integrator, analytic and empirical stability classification, the
//! delay-dependence threshold `b*(a)`, and the bifurcation analysis of the
//! nonlinear model.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.

// Validation is written as `!(x > 0)` and similar so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod error;
pub mod io;
pub mod mackey_glass;
pub mod scalar;
pub mod series;
pub mod solver;
pub mod threshold;

pub use atlas::{
    classify_analytic, classify_analytic_with, classify_trajectory, probe_stability, sweep_region,
    AxisRange, ClassificationThresholds, Evidence, ProbeConfig, Provenance, StabilityVerdict,
    SweepRecord, TrajectoryClass, TrajectoryKind, VerdictKind,
};
pub use error::{Error, Result};
pub use mackey_glass::{
    mg_bifurcation, mg_classify, mg_equilibria, mg_linearize, mg_rhs, mg_simulate, Equilibria,
    Equilibrium, MGBifurcation, MGParams, MgRegime, MgSimulation,
};
pub use scalar::{format_g17, Scalar};
pub use series::{
    evaluate_series, exponential_lower_bound, product_coefficient, PantographParams,
    ProductCoefficient, SeriesOptions, SeriesResult,
};
pub use solver::{
    delayed_value, integrate, resample_delayed, transition_index, try_integrate,
    uses_predicted_delay, DelayedSample, SolverConfig, Trajectory, SATURATION_BOUND,
};
pub use threshold::{
    find_bstar, fit_quadratic, parse_table_csv, tabulate_bstar, BstarConfig, FixedThreshold,
    QuadraticFit, ThresholdCurve, ThresholdEstimate, ThresholdTable, TABLE1_CSV,
};

pub type Params = PantographParams<f64>;
pub type Config = SolverConfig<f64>;
pub type Traj = Trajectory<f64>;
pub type Probe = ProbeConfig<f64>;
pub type Thresholds = ClassificationThresholds<f64>;
pub type Class = TrajectoryClass<f64>;
pub type Record = SweepRecord<f64>;
pub type Table = ThresholdTable<f64>;
pub type Fit = QuadraticFit<f64>;
pub type Estimate = ThresholdEstimate<f64>;
pub type MgParams = MGParams<f64>;
pub type Bifurcation = MGBifurcation<f64>;
