use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use pantograph_core::io::{
    write_attractor_csv, write_bstar_csv, write_series_csv, write_sweep_csv, write_trajectory_csv,
};
use pantograph_core::{
    classify_analytic_with, classify_trajectory, evaluate_series, fit_quadratic, integrate,
    mg_bifurcation, mg_equilibria, mg_simulate, parse_table_csv, probe_stability, sweep_region,
    tabulate_bstar, AxisRange, BstarConfig, Config, Error, MgParams, Params, Probe, SeriesOptions,
    Table, ThresholdCurve, Thresholds,
};
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::output::{flag_line, parameters, print_json, with_output, RunManifest};

pub const TABLE_ENV: &str = "PANTOGRAPH_TABLE1";

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(io::Error),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                Error::NonFinite { .. } | Error::RhsDomain { .. } | Error::DelayIndex { .. },
            ) => 3,
            CliError::Core(Error::BracketNotFound { .. }) => 4,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Input(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Outcome = Result<(), CliError>;

/// The threshold table: the file named by `PANTOGRAPH_TABLE1` if set,
/// otherwise the bundled one.
pub fn threshold_table() -> Result<Table, CliError> {
    match std::env::var_os(TABLE_ENV) {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Input(format!(
                    "cannot read {TABLE_ENV}={}: {e}",
                    path.to_string_lossy()
                ))
            })?;
            Ok(Table::from_csv(&text)?)
        }
        None => Ok(Table::bundled()),
    }
}

struct Run {
    manifest: RunManifest,
    header: String,
}

impl Run {
    fn new<A: serde::Serialize>(command: &str, args: &A) -> Self {
        let params = parameters(args);
        let header = flag_line(command, &params);
        Self {
            manifest: RunManifest::new(command, params),
            header,
        }
    }

    fn csv<F>(&mut self, path: Option<&Path>, body: F) -> io::Result<()>
    where
        F: FnOnce(&mut dyn io::Write, &str) -> io::Result<()>,
    {
        let header = self.header.clone();
        with_output(path, |w| body(w, &header))?;
        if let Some(p) = path {
            self.manifest.outputs.push(p.to_path_buf());
        }
        Ok(())
    }

    fn finish(self) -> io::Result<()> {
        self.manifest.write()
    }
}

fn class_json(class: &pantograph_core::Class) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("kind".into(), json!(class.kind.as_str()));
    m.insert("final_magnitude".into(), json!(class.final_magnitude));
    m.insert("sign_changes".into(), json!(class.sign_changes));
    m.insert("growth_exponent".into(), json!(class.growth_exponent));
    m.insert("evidence".into(), json!(class.evidence));
    m
}

pub fn series(args: &SeriesArgs) -> Outcome {
    let params = Params::new(args.a, args.b, args.q)?;
    let options = SeriesOptions {
        tolerance: args.tolerance,
        max_terms: args.max_terms,
    };
    let rows = args
        .t
        .iter()
        .map(|&t| Ok((t, evaluate_series(&params, args.x0, t, &options)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut run = Run::new("series", args);
    run.csv(args.out.as_deref(), |w, h| {
        write_series_csv(w, Some(h), &rows)
    })?;
    Ok(run.finish()?)
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    let params = Params::new(args.a, args.b, args.q)?;
    let config = Config::new(args.h, args.horizon, args.x0)?;
    let traj = integrate(|x, xd| params.rhs(x, xd), args.q, &config)?;
    let mut run = Run::new("simulate", args);
    run.csv(args.out.as_deref(), |w, h| {
        write_trajectory_csv(w, Some(h), &traj)
    })?;
    run.manifest.saturated = Some(traj.is_saturated());
    if args.out.is_some() {
        let class = classify_trajectory(&traj, 0.0, &Thresholds::default());
        let mut summary = class_json(&class);
        summary.insert("points".into(), json!(traj.len()));
        summary.insert("final".into(), json!(traj.last()));
        summary.insert("saturated".into(), json!(traj.is_saturated()));
        print_json(&summary)?;
    }
    Ok(run.finish()?)
}

pub fn classify(args: &ClassifyArgs) -> Outcome {
    let table = threshold_table()?;
    let verdict = classify_analytic_with(args.a, args.b, args.q, &table)?;
    let mut out = Map::new();
    out.insert("a".into(), json!(args.a));
    out.insert("b".into(), json!(args.b));
    out.insert("q".into(), json!(args.q));
    out.insert("kind".into(), json!(verdict.kind.as_str()));
    out.insert("provenance".into(), json!(verdict.provenance.as_str()));
    if args.probe {
        let probe = Probe::single().with_step(args.h).with_horizon(args.horizon);
        let class = probe_stability(args.a, args.b, args.q, &probe)?;
        out.insert("empirical".into(), Value::Object(class_json(&class)));
    }
    Ok(print_json(&out)?)
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let a = AxisRange::new(args.a_min, args.a_max, args.resolution)?;
    let b = AxisRange::new(args.b_min, args.b_max, args.resolution)?;
    let probe = Probe::sweep().with_step(args.h).with_horizon(args.horizon);
    let table = threshold_table()?;
    let records = sweep_region(&a, &b, &args.q_list, &probe, &table)?;
    let mut run = Run::new("sweep", args);
    run.csv(args.out.as_deref(), |w, h| {
        write_sweep_csv(w, Some(h), &records)
    })?;
    let flagged = records.iter().filter(|r| r.flagged).count();
    eprintln!("{} points, {} flagged", records.len(), flagged);
    Ok(run.finish()?)
}

fn bstar_a_values(args: &BstarArgs) -> Result<Vec<f64>, CliError> {
    match (args.a_min, args.a_max) {
        (Some(lo), Some(hi)) => {
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let mut values = AxisRange::new(lo, hi, args.points)?.values();
            values.reverse();
            values.extend(&args.a);
            Ok(values)
        }
        _ if args.a.is_empty() => Err(CliError::Input("no a values given".into())),
        _ => Ok(args.a.clone()),
    }
}

pub fn bstar(args: &BstarArgs) -> Outcome {
    let a_values = bstar_a_values(args)?;
    let cfg = BstarConfig {
        tolerance: args.tolerance,
        q_probes: args.q_probes.clone(),
        probe: Probe::sweep().with_step(args.h).with_horizon(args.horizon),
    };
    let results = tabulate_bstar(&a_values, &cfg);
    let mut estimates = Vec::new();
    let mut first_error = None;
    for (a, r) in a_values.iter().zip(results) {
        match r {
            Ok(e) => estimates.push(e),
            Err(e) => {
                eprintln!("a = {a}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    let mut run = Run::new("bstar", args);
    run.csv(args.out.as_deref(), |w, h| {
        write_bstar_csv(w, Some(h), &estimates)
    })?;
    run.finish()?;
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn fit(args: &FitArgs) -> Outcome {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let points = parse_table_csv(&text)?;
    let fit = fit_quadratic(&points)?;
    let report = json!({
        "c2": fit.c2,
        "c1": fit.c1,
        "c0": fit.c0,
        "rms_residual": fit.rms_residual,
        "n_points": fit.n_points,
    });
    let mut run = Run::new("fit", args);
    if let Some(path) = &args.out {
        fs::write(path, format!("{report}\n"))?;
        run.manifest.outputs.push(path.clone());
    }
    print_json(&report)?;
    Ok(run.finish()?)
}

pub fn mg(args: &MgArgs) -> Outcome {
    let params = MgParams::new(args.alpha, args.beta, args.c, args.q)?;
    let config = Config::new(args.h, args.horizon, args.x0)?;
    let sim = mg_simulate(&params, &config)?;
    let traj = &sim.trajectory;
    let mut run = Run::new("mg", args);
    let to_stdout = args.out.is_none() && args.attractor.is_none();
    if args.out.is_some() || to_stdout {
        run.csv(args.out.as_deref(), |w, h| {
            write_trajectory_csv(w, Some(h), traj)
        })?;
    }
    if let Some(path) = &args.attractor {
        run.csv(Some(path), |w, h| {
            write_attractor_csv(w, Some(h), &sim.attractor)
        })?;
    }
    run.manifest.saturated = Some(traj.is_saturated());
    if !to_stdout {
        let eq = mg_equilibria(args.alpha, args.beta, args.c)?;
        let reference = if traj.last() < 0.0 {
            eq.negative
        } else {
            eq.positive
        };
        let class = classify_trajectory(traj, reference, &Thresholds::default());
        let mut summary = class_json(&class);
        summary.insert("equilibrium".into(), json!(reference));
        summary.insert("final".into(), json!(traj.last()));
        let max_abs = traj.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        summary.insert("max_abs".into(), json!(max_abs));
        summary.insert("saturated".into(), json!(traj.is_saturated()));
        print_json(&summary)?;
    }
    Ok(run.finish()?)
}

pub fn mg_bifurcation_cmd(args: &MgBifurcationArgs) -> Outcome {
    let b_star = match args.b_star {
        Some(b) => b,
        None => threshold_table()?.b_star(-args.beta),
    };
    let bif = mg_bifurcation(args.beta, args.c, b_star)?;
    let report = json!({
        "alpha1": bif.alpha1,
        "alpha2": bif.alpha2,
        "b_star_used": bif.b_star_used,
        "beta": bif.beta,
        "c": bif.c,
    });
    let mut run = Run::new("mg-bifurcation", args);
    if let Some(path) = &args.out {
        fs::write(path, format!("{report}\n"))?;
        run.manifest.outputs.push(path.clone());
    }
    print_json(&report)?;
    Ok(run.finish()?)
}

pub fn table1(args: &Table1Args) -> Outcome {
    let table = threshold_table()?;
    let mut run = Run::new("table1", args);
    run.csv(args.out.as_deref(), |w, h| {
        writeln!(w, "# {h}")?;
        writeln!(w, "a,b_star")?;
        for &(a, b) in table.points().iter().rev() {
            writeln!(w, "{a},{b}")?;
        }
        Ok(())
    })?;
    Ok(run.finish()?)
}
