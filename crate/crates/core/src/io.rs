//! CSV output. Reals are written with 17 significant digits so that files
//! round-trip exactly; each writer takes an optional comment that becomes a
//! leading `#` line.

use std::io::{self, Write};

use crate::atlas::SweepRecord;
use crate::scalar::{format_g17, Scalar};
use crate::series::SeriesResult;
use crate::solver::{DelayedSample, Trajectory};
use crate::threshold::ThresholdEstimate;

fn g<T: Scalar>(v: T) -> String {
    format_g17(v.as_f64())
}

fn preamble<W: Write + ?Sized>(w: &mut W, comment: Option<&str>, header: &str) -> io::Result<()> {
    if let Some(c) = comment {
        writeln!(w, "# {}", c.replace(['\n', '\r'], " "))?;
    }
    writeln!(w, "{header}")
}

pub fn write_trajectory_csv<T: Scalar, W: Write + ?Sized>(
    w: &mut W,
    comment: Option<&str>,
    traj: &Trajectory<T>,
) -> io::Result<()> {
    preamble(w, comment, "t,x")?;
    for (t, x) in traj.points() {
        writeln!(w, "{},{}", g(t), g(x))?;
    }
    Ok(())
}

pub fn write_attractor_csv<T: Scalar, W: Write + ?Sized>(
    w: &mut W,
    comment: Option<&str>,
    samples: &[DelayedSample<T>],
) -> io::Result<()> {
    preamble(w, comment, "t,x,x_delayed")?;
    for s in samples {
        writeln!(w, "{},{},{}", g(s.t), g(s.x), g(s.x_delayed))?;
    }
    Ok(())
}

pub fn write_series_csv<T: Scalar, W: Write + ?Sized>(
    w: &mut W,
    comment: Option<&str>,
    rows: &[(T, SeriesResult<T>)],
) -> io::Result<()> {
    preamble(w, comment, "t,value,terms_used,converged")?;
    for (t, r) in rows {
        writeln!(
            w,
            "{},{},{},{}",
            g(*t),
            g(r.value),
            r.terms_used,
            r.converged
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<T: Scalar, W: Write + ?Sized>(
    w: &mut W,
    comment: Option<&str>,
    records: &[SweepRecord<T>],
) -> io::Result<()> {
    preamble(
        w,
        comment,
        "a,b,q,verdict,provenance,empirical_class,flagged",
    )?;
    for r in records {
        let empirical = match &r.empirical {
            Ok(class) => class.kind.as_str().to_string(),
            Err(e) => format!("\"error: {}\"", e.to_string().replace('"', "'")),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            g(r.a),
            g(r.b),
            g(r.q),
            r.verdict.kind.as_str(),
            r.verdict.provenance.as_str(),
            empirical,
            r.flagged
        )?;
    }
    Ok(())
}

pub fn write_bstar_csv<T: Scalar, W: Write + ?Sized>(
    w: &mut W,
    comment: Option<&str>,
    estimates: &[ThresholdEstimate<T>],
) -> io::Result<()> {
    preamble(w, comment, "a,b_star,bracket_width")?;
    for e in estimates {
        writeln!(w, "{},{},{}", g(e.a), g(e.b_star), g(e.bracket_width))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_csv_layout() {
        let traj = Trajectory::from_values(0.5, 0.5, vec![1.0, 0.1, 1.0 / 3.0]).unwrap();
        let mut out = Vec::new();
        write_trajectory_csv(&mut out, Some("flags\nmore"), &traj).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "# flags more\nt,x\n0,1\n0.5,0.10000000000000001\n1,0.33333333333333331\n"
        );
    }
}
