//! The delay-dependence threshold `b*(a)`: the bundled reference table, its
//! bisection-based re-estimation, and the quadratic fit through it.

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::atlas::{probe_stability, ProbeConfig, TrajectoryKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::validate_q;

/// Anything that maps `a` to a threshold value `b*(a)`.
pub trait ThresholdCurve<T>: Sync {
    fn b_star(&self, a: T) -> T;
}

/// The same `b*` for every `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedThreshold<T>(pub T);

impl<T: Scalar> ThresholdCurve<T> for FixedThreshold<T> {
    fn b_star(&self, _a: T) -> T {
        self.0
    }
}

impl<T, F> ThresholdCurve<T> for F
where
    F: Fn(T) -> T + Sync,
{
    fn b_star(&self, a: T) -> T {
        self(a)
    }
}

/// Bundled `(a, b*)` reference data, CSV with header `a,b_star`.
pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");

/// Parses `a,b_star` CSV text. Blank lines and `#` comments are skipped.
/// Columns after the first two (such as `bracket_width` in search output)
/// are ignored when the header names them.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header.replace(' ', "").starts_with("a,b_star") => {}
        Some((i, header)) => {
            return Err(Error::Table(format!(
                "line {}: expected header `a,b_star`, found `{header}`",
                i + 1
            )))
        }
        None => return Err(Error::Table("empty table".into())),
    }
    let columns = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map_or(2, |h| h.split(',').count());
    let mut rows = Vec::new();
    for (i, line) in lines {
        let mut fields = line.split(',').map(str::trim);
        let parse = |f: Option<&str>| -> Result<f64> {
            let f = f.ok_or_else(|| Error::Table(format!("line {}: missing field", i + 1)))?;
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::Table(format!("line {}: `{f}` is not a finite number", i + 1))
                })
        };
        let a = parse(fields.next())?;
        let b = parse(fields.next())?;
        if fields.count() != columns - 2 {
            return Err(Error::Table(format!(
                "line {}: expected {columns} fields",
                i + 1
            )));
        }
        rows.push((a, b));
    }
    Ok(rows)
}

/// Piecewise-linear `b*(a)` through tabulated points, continued outside the
/// tabulated range by the least-squares quadratic through the same points.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable<T> {
    points: Vec<(T, T)>,
    fit: QuadraticFit<T>,
}

impl<T: Scalar> ThresholdTable<T> {
    /// The bundled table.
    pub fn bundled() -> Self {
        let rows = parse_table_csv(TABLE1_CSV).expect("bundled table is well formed");
        Self::from_points(
            rows.into_iter()
                .map(|(a, b)| (T::lit(a), T::lit(b)))
                .collect(),
        )
        .expect("bundled table is well formed")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_table_csv(text)?;
        Self::from_points(
            rows.into_iter()
                .map(|(a, b)| (T::lit(a), T::lit(b)))
                .collect(),
        )
    }

    /// Needs at least three distinct `a` values; duplicates are rejected.
    pub fn from_points(mut points: Vec<(T, T)>) -> Result<Self> {
        let fit = fit_quadratic(&points)?;
        points.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite table entries"));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Table("duplicate a values".into()));
        }
        Ok(Self { points, fit })
    }

    /// Points sorted by increasing `a`.
    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn fit(&self) -> &QuadraticFit<T> {
        &self.fit
    }
}

impl<T: Scalar> ThresholdCurve<T> for ThresholdTable<T> {
    fn b_star(&self, a: T) -> T {
        let pts = &self.points;
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if a < first.0 || a > last.0 {
            return self.fit.eval(a);
        }
        let i = pts.partition_point(|p| p.0 <= a);
        if i == pts.len() {
            return last.1;
        }
        let (lo, hi) = (pts[i - 1], pts[i]);
        lo.1 + (hi.1 - lo.1) * (a - lo.0) / (hi.0 - lo.0)
    }
}

/// `c2·a² + c1·a + c0` fitted by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit<T> {
    pub c2: T,
    pub c1: T,
    pub c0: T,
    pub rms_residual: T,
    pub n_points: usize,
}

impl<T: Scalar> QuadraticFit<T> {
    pub fn eval(&self, a: T) -> T {
        (self.c2 * a + self.c1) * a + self.c0
    }
}

/// Solves the 3×3 symmetric positive definite system `m·x = r` by Cholesky.
fn cholesky_solve<T: Scalar>(m: [[T; 3]; 3], r: [T; 3]) -> Result<[T; 3]> {
    let mut l = [[T::zero(); 3]; 3];
    let trace = m[0][0] + m[1][1] + m[2][2];
    let floor = trace * T::epsilon() * T::lit(64.0);
    for i in 0..3 {
        for j in 0..=i {
            let s = (0..j).fold(m[i][j], |s, k| s - l[i][k] * l[j][k]);
            if i == j {
                if s <= floor {
                    return Err(Error::RankDeficient(format!(
                        "normal matrix pivot {i} is {:e}",
                        s.as_f64()
                    )));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [T::zero(); 3];
    for i in 0..3 {
        y[i] = (0..i).fold(r[i], |s, k| s - l[i][k] * y[k]) / l[i][i];
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        x[i] = (i + 1..3).fold(y[i], |s, k| s - l[k][i] * x[k]) / l[i][i];
    }
    Ok(x)
}

/// Least-squares quadratic through `(a, b*)` pairs.
///
/// The abscissae are centred and scaled to `[-1, 1]` before forming the
/// normal equations, which keeps the Gram matrix well conditioned; the
/// coefficients are mapped back afterwards.
pub fn fit_quadratic<T: Scalar>(points: &[(T, T)]) -> Result<QuadraticFit<T>> {
    if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::invalid("points", "finite coordinates", f64::NAN));
    }
    let mut abscissae: Vec<T> = points.iter().map(|p| p.0).collect();
    abscissae.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    abscissae.dedup();
    if abscissae.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "{} distinct a values, at least 3 needed",
            abscissae.len()
        )));
    }

    let (lo, hi) = (abscissae[0], abscissae[abscissae.len() - 1]);
    let two = T::lit(2.0);
    let centre = (lo + hi) / two;
    let scale = (hi - lo) / two;

    let mut m = [[T::zero(); 3]; 3];
    let mut r = [T::zero(); 3];
    for &(a, b) in points {
        let u = (a - centre) / scale;
        let basis = [u * u, u, T::one()];
        for i in 0..3 {
            r[i] = r[i] + basis[i] * b;
            for j in 0..3 {
                m[i][j] = m[i][j] + basis[i] * basis[j];
            }
        }
    }
    let [d2, d1, d0] = cholesky_solve(m, r)?;

    let c2 = d2 / (scale * scale);
    let c1 = d1 / scale - two * centre * c2;
    let c0 = d0 - d1 * centre / scale + d2 * centre * centre / (scale * scale);

    let mut fit = QuadraticFit {
        c2,
        c1,
        c0,
        rms_residual: T::zero(),
        n_points: points.len(),
    };
    let sse = points
        .iter()
        .map(|&(a, b)| {
            let e = b - fit.eval(a);
            e * e
        })
        .fold(T::zero(), |s, e| s + e);
    fit.rms_residual = (sse / T::from_index(points.len())).sqrt();
    Ok(fit)
}

/// Settings for [`find_bstar`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BstarConfig<T> {
    pub tolerance: T,
    pub q_probes: Vec<T>,
    pub probe: ProbeConfig<T>,
}

impl<T: Scalar> Default for BstarConfig<T> {
    /// `tolerance = 0.05`, a single probe at `q = 0.9`, `h = 1e-2`, `T = 250`.
    ///
    /// Probes closer to `q = 1` decay so slowly near the threshold that they
    /// read as convergent well below the tabulated `b*`; the horizon was
    /// chosen so the finite-time level set matches the table across
    /// `-10 <= a <= 0`.
    fn default() -> Self {
        Self {
            tolerance: T::lit(0.05),
            q_probes: vec![T::lit(0.9)],
            probe: ProbeConfig::sweep().with_horizon(T::lit(250.0)),
        }
    }
}

impl<T: Scalar> BstarConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero() && self.tolerance.is_finite()) {
            return Err(Error::invalid(
                "tolerance",
                "tolerance > 0",
                self.tolerance.as_f64(),
            ));
        }
        if self.q_probes.is_empty() {
            return Err(Error::invalid("q_probes", "a nonempty list", 0.0));
        }
        for &q in &self.q_probes {
            validate_q(q)?;
        }
        if !self.q_probes.iter().any(|&q| q >= T::lit(0.9)) {
            let top = self.q_probes.iter().fold(T::zero(), |m, &q| m.max(q));
            return Err(Error::invalid(
                "q_probes",
                "at least one q >= 0.9",
                top.as_f64(),
            ));
        }
        self.probe.solver_config(T::one())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate<T> {
    pub a: T,
    /// Midpoint of the final bracket.
    pub b_star: T,
    pub bracket_width: T,
    /// Final bracket `[lower, upper]`.
    pub lower: T,
    pub upper: T,
    pub q_probes: Vec<T>,
    pub horizon_used: T,
    pub iterations: usize,
}

/// Convergent for at least one probe. Indeterminate counts as not
/// convergent.
fn stable_at<T: Scalar>(a: T, b: T, cfg: &BstarConfig<T>) -> Result<bool> {
    for &q in &cfg.q_probes {
        let class = probe_stability(a, b, q, &cfg.probe)?;
        if class.kind == TrajectoryKind::Indeterminate {
            debug!(
                "indeterminate probe at a={a}, b={b}, q={q} (final {:e}, exponent {:?}); counted as divergent",
                class.final_magnitude.as_f64(),
                class.growth_exponent.map(|s| s.as_f64())
            );
        }
        if class.kind.is_convergent() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Locates `b*(a)` by bisection on `[b_lo, a]`.
///
/// `b_lo` starts half a unit below `a` and moves down with doubling steps
/// until every probe is non-convergent, giving up below `-(10|a| + 20)`.
pub fn find_bstar<T: Scalar>(a: T, cfg: &BstarConfig<T>) -> Result<ThresholdEstimate<T>> {
    if !(a <= T::zero()) {
        return Err(Error::invalid("a", "a <= 0", a.as_f64()));
    }
    cfg.validate()?;

    let limit = -(T::lit(10.0) * a.abs() + T::lit(20.0));
    let mut step = T::lit(0.5);
    let mut lower = a - step;
    loop {
        if lower < limit {
            lower = limit;
        }
        if !stable_at(a, lower, cfg)? {
            break;
        }
        if lower == limit {
            return Err(Error::BracketNotFound {
                a: a.as_f64(),
                limit: limit.as_f64(),
            });
        }
        step = step * T::lit(2.0);
        lower = a - step;
    }

    let mut upper = a;
    let mut iterations = 0;
    while upper - lower > cfg.tolerance {
        let mid = (lower + upper) / T::lit(2.0);
        if stable_at(a, mid, cfg)? {
            upper = mid;
        } else {
            lower = mid;
        }
        iterations += 1;
    }

    Ok(ThresholdEstimate {
        a,
        b_star: (lower + upper) / T::lit(2.0),
        bracket_width: upper - lower,
        lower,
        upper,
        q_probes: cfg.q_probes.clone(),
        horizon_used: cfg.probe.horizon,
        iterations,
    })
}

/// [`find_bstar`] for each `a`, concurrently, in input order.
pub fn tabulate_bstar<T: Scalar>(
    a_values: &[T],
    cfg: &BstarConfig<T>,
) -> Vec<Result<ThresholdEstimate<T>>> {
    a_values.par_iter().map(|&a| find_bstar(a, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_has_52_rows() {
        let t = ThresholdTable::<f64>::bundled();
        assert_eq!(t.points().len(), 52);
        assert_eq!(t.points()[0], (-10.2, -12.7));
        assert_eq!(t.points()[51], (0.0, 0.0));
    }

    #[test]
    fn lookup_hits_rows_and_interpolates() {
        let t = ThresholdTable::<f64>::bundled();
        assert_eq!(t.b_star(-3.0), -4.1);
        assert_eq!(t.b_star(0.0), 0.0);
        assert_eq!(t.b_star(-10.2), -12.7);
        assert!((t.b_star(-2.9) - (-3.95)).abs() < 1e-12);
        let fit = *t.fit();
        assert_eq!(t.b_star(-11.0), fit.eval(-11.0));
        assert_eq!(t.b_star(0.5), fit.eval(0.5));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(parse_table_csv("").is_err());
        assert!(parse_table_csv("x,y\n1,2\n").is_err());
        assert!(parse_table_csv("a,b_star\n1,two\n").is_err());
        assert!(parse_table_csv("a,b_star\n1,2,3\n").is_err());
        assert!(parse_table_csv("a,b_star\n1\n").is_err());
        assert_eq!(
            parse_table_csv("a,b_star,bracket_width\n-1,-1.4,0.03\n").unwrap(),
            vec![(-1.0, -1.4)]
        );
        assert_eq!(
            parse_table_csv("# note\na,b_star\n\n-1,-1.4\n").unwrap(),
            vec![(-1.0, -1.4)]
        );
    }

    #[test]
    fn duplicate_a_rejected() {
        let pts = vec![(0.0, 0.0), (-1.0, -1.0), (-1.0, -2.0), (-2.0, -3.0)];
        assert!(ThresholdTable::from_points(pts).is_err());
    }

    #[test]
    fn fit_exact_parabola() {
        let pts: Vec<(f64, f64)> = (-5..=5).map(|i| (i as f64, (i * i) as f64)).collect();
        let f = fit_quadratic(&pts).unwrap();
        assert!((f.c2 - 1.0).abs() < 1e-12);
        assert!(f.c1.abs() < 1e-12);
        assert!(f.c0.abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
        assert_eq!(f.n_points, 11);
    }

    #[test]
    fn fit_collinear_points() {
        let f = fit_quadratic(&[(0.0_f64, 0.0), (-1.0, -1.4), (-2.0, -2.8)]).unwrap();
        assert!(f.c2.abs() < 1e-9);
        assert!((f.c1 - 1.4).abs() < 1e-9);
        assert!(f.c0.abs() < 1e-9);
    }

    #[test]
    fn fit_rank_deficient() {
        let same = [(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)];
        assert!(matches!(fit_quadratic(&same), Err(Error::RankDeficient(_))));
        let two = [(1.0, 1.0), (2.0, 2.0), (1.0, 3.0)];
        assert!(matches!(fit_quadratic(&two), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn find_bstar_preconditions() {
        let cfg = BstarConfig::<f64>::default();
        assert!(find_bstar(0.5, &cfg).is_err());
        let low_q = BstarConfig {
            q_probes: vec![0.5],
            ..cfg.clone()
        };
        assert!(find_bstar(-1.0, &low_q).is_err());
        let no_q = BstarConfig {
            q_probes: vec![],
            ..cfg.clone()
        };
        assert!(find_bstar(-1.0, &no_q).is_err());
        let zero_tol = BstarConfig {
            tolerance: 0.0,
            ..cfg
        };
        assert!(find_bstar(-1.0, &zero_tol).is_err());
    }
}
