//! CSV tables. Floats use Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use csv::Writer;

use crate::error::Result;
use crate::harness::{EnsembleSummary, SweepRow, Verdict, QUANTITIES};
use crate::integrator::{residual, Trajectory};
use crate::model::CrispModel;

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Creates `path` and hands a CSV writer over it to `body`.
pub fn write_csv_file<F>(path: impl AsRef<Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut Writer<File>) -> Result<()>,
{
    let mut w = Writer::from_path(path)?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "t",
    "S",
    "x",
    "y",
    "meanS",
    "meanx",
    "meany",
    "lnx_over_t",
    "lny_over_t",
    "phi",
];

pub fn write_trajectory<W: Write>(w: &mut Writer<W>, traj: &Trajectory, model: &CrispModel) -> Result<()> {
    w.write_record(TRAJECTORY_HEADER)?;
    for k in 0..traj.len() {
        let s = traj.states[k];
        let m = traj.means[k];
        let r = traj.log_ratios[k];
        let row = [traj.times[k], s.s, s.x, s.y, m[0], m[1], m[2], r[0], r[1], residual(model, &m)];
        w.write_record(row.map(num))?;
    }
    Ok(())
}

pub fn write_jumps<W: Write>(w: &mut Writer<W>, traj: &Trajectory) -> Result<()> {
    w.write_record(["t", "mark"])?;
    for j in &traj.jumps {
        w.write_record([num(j.time), j.mark.to_string()])?;
    }
    Ok(())
}

/// One row per recorded time: mean and percentiles of every quantity, then
/// the extinction fractions.
pub fn write_ensemble_summary<W: Write>(w: &mut Writer<W>, summary: &EnsembleSummary) -> Result<()> {
    let mut header = vec!["t".to_string()];
    for q in QUANTITIES {
        for stat in ["mean", "p5", "p50", "p95"] {
            header.push(format!("{q}_{stat}"));
        }
    }
    header.push("extinct_x".into());
    header.push("extinct_y".into());
    w.write_record(&header)?;
    for (k, t) in summary.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        for b in &summary.bands[k] {
            row.extend([b.mean, b.p5, b.p50, b.p95].map(num));
        }
        row.extend(summary.extinct_fraction[k].map(num));
        w.write_record(&row)?;
    }
    Ok(())
}

pub fn write_paths<W: Write>(w: &mut Writer<W>, summary: &EnsembleSummary) -> Result<()> {
    w.write_record([
        "path", "S", "x", "y", "meanS", "meanx", "meany", "lyap_x", "lyap_y", "phi", "extinct_x_at",
        "extinct_y_at", "floored_x_at", "floored_y_at", "n_jumps", "M1", "M2", "M3", "Mtilde1", "Mtilde2",
        "Mtilde3",
    ])?;
    for p in &summary.paths {
        let m = p.terminal_means();
        let mut row = vec![p.path.to_string()];
        row.extend([p.terminal.s, p.terminal.x, p.terminal.y, m[0], m[1], m[2]].map(num));
        row.extend(p.lyapunov.map(num));
        row.push(num(p.phi));
        row.extend([p.extinct_at[1], p.extinct_at[2], p.floored_at[1], p.floored_at[2]].map(opt));
        row.push(p.n_jumps.to_string());
        row.extend(p.martingales.brownian.map(num));
        row.extend(p.martingales.jump.map(num));
        w.write_record(&row)?;
    }
    Ok(())
}

pub fn write_failures<W: Write>(w: &mut Writer<W>, summary: &EnsembleSummary) -> Result<()> {
    w.write_record(["path", "message"])?;
    for f in &summary.failures {
        w.write_record([f.path.to_string(), f.message.clone()])?;
    }
    Ok(())
}

pub fn write_verdict<W: Write>(w: &mut Writer<W>, verdict: &Verdict) -> Result<()> {
    w.write_record(["claim", "statistic", "kind", "predicted", "empirical", "tolerance", "passed"])?;
    for c in &verdict.claims {
        w.write_record([
            c.id.to_string(),
            c.statistic.to_string(),
            c.kind.as_str().to_string(),
            num(c.predicted),
            num(c.empirical),
            num(c.tolerance),
            c.passed.to_string(),
        ])?;
    }
    Ok(())
}

pub const SWEEP_HEADER: [&str; 25] = [
    "p", "D", "m1", "delta1", "sigma1", "m2", "delta2", "sigma2", "sigma3", "beta1", "beta2", "beta3", "R0s",
    "R1s", "regime", "S_p50", "x_p50", "y_p50", "extinct_x", "extinct_y", "failures", "claims", "claims_passed",
    "verdict", "error",
];

pub fn write_sweep<W: Write>(w: &mut Writer<W>, rows: &[SweepRow]) -> Result<()> {
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let mut row = vec![num(r.p)];
        match &r.model {
            Some(m) => row.extend(
                [m.d, m.m1, m.delta1, m.sigma1, m.m2, m.delta2, m.sigma2, m.sigma3].map(num),
            ),
            None => row.extend(std::iter::repeat(String::new()).take(8)),
        }
        match &r.report {
            Some(t) => {
                row.extend(t.beta.map(num));
                row.extend([num(t.r0s), num(t.r1s), t.regime.to_string()]);
            }
            None => row.extend(std::iter::repeat(String::new()).take(6)),
        }
        match &r.terminal {
            Some(t) => {
                row.extend([t.s.p50, t.x.p50, t.y.p50].map(num));
                row.extend(t.extinct_fraction.map(num));
                row.push(t.failures.to_string());
            }
            None => row.extend(std::iter::repeat(String::new()).take(6)),
        }
        match &r.verdict {
            Some(v) => {
                row.push(v.claims.len().to_string());
                row.push(v.claims.iter().filter(|c| c.passed).count().to_string());
                row.push(if v.passed() { "PASS" } else { "FAIL" }.to_string());
            }
            None => row.extend(std::iter::repeat(String::new()).take(3)),
        }
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    Ok(())
}
