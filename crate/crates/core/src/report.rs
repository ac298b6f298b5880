//! CSV reports for sweeps, slope fits, bound checks and traces.
//!
//! Numbers are written with 12 significant digits in the shortest form that
//! reads back to the same rounded value, so equal inputs give identical
//! files and parsed rows equal the written ones at that precision.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::bounds::BoundReport;
use crate::diagnostics::BurnTrace;
use crate::error::{Error, Result};
use crate::experiment::{fit_slope, RunOutput, SlopeFit, SweepRow};

pub const SWEEP_HEADER: [&str; 8] = [
    "A",
    "kappa",
    "v_avg",
    "v_std",
    "bound_two_layer",
    "bound_multi_layer",
    "genbound_pass",
    "wall_time_s",
];
pub const SLOPES_HEADER: [&str; 4] = ["kappa", "slope", "intercept", "r2"];
pub const TRACE_HEADER: [&str; 4] = ["t", "v_reaction", "v_timederiv", "front_pos"];
pub const BOUNDS_HEADER: [&str; 10] = [
    "A",
    "kappa",
    "bound",
    "tau",
    "rhs",
    "measured",
    "margin",
    "pass",
    "constant_verified",
    "at_time",
];

/// `x` rounded to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12 significant digits, plain notation for magnitudes in `[1e-5, 1e12)`
/// and exponent notation otherwise.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let r = round_sig12(x);
    let e = r.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn parse_num(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{what}: not a number: {field:?}")))
}

fn parse_bool(field: &str, what: &str) -> Result<bool> {
    match field.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::InvalidArgument(format!(
            "{what}: not a boolean: {other:?}"
        ))),
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_num(r.a),
            fmt_num(r.kappa),
            fmt_num(r.v_avg),
            fmt_num(r.v_std),
            fmt_num(r.bound_two_layer),
            fmt_num(r.bound_multi_layer),
            r.genbound_pass.to_string(),
            fmt_num(r.wall_time),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a sweep CSV written by [`write_sweep`]; the header must match.
pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::InvalidArgument(format!(
            "unexpected sweep header {:?}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let what = format!("row {}", k + 1);
        let f = |i: usize| parse_num(&rec[i], &what);
        rows.push(SweepRow {
            a: f(0)?,
            kappa: f(1)?,
            v_avg: f(2)?,
            v_std: f(3)?,
            bound_two_layer: f(4)?,
            bound_multi_layer: f(5)?,
            genbound_pass: parse_bool(&rec[6], &what)?,
            wall_time: f(7)?,
        });
    }
    Ok(rows)
}

pub fn read_sweep_file(path: &Path) -> Result<Vec<SweepRow>> {
    let f = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_sweep(f)
}

pub fn write_slopes<W: Write>(out: W, fits: &[(f64, SlopeFit)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SLOPES_HEADER)?;
    for (k, f) in fits {
        w.write_record([fmt_num(*k), fmt_num(f.slope), fmt_num(f.intercept), fmt_num(f.r2)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace<W: Write>(out: W, trace: &BurnTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for i in 0..trace.len() {
        w.write_record([
            fmt_num(trace.times[i]),
            fmt_num(trace.v_reaction[i]),
            fmt_num(trace.v_timederiv[i]),
            fmt_num(trace.front_pos[i]),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One line per bound report of every run.
pub fn write_bounds<W: Write>(out: W, runs: &[(f64, f64, &[BoundReport])]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUNDS_HEADER)?;
    for (a, kappa, reports) in runs {
        for b in reports.iter() {
            w.write_record([
                fmt_num(*a),
                fmt_num(*kappa),
                b.kind.to_string(),
                fmt_num(b.tau),
                fmt_num(b.rhs),
                fmt_num(b.measured),
                fmt_num(b.margin),
                b.pass.to_string(),
                b.constant_verified.to_string(),
                b.at_time.map_or(String::new(), fmt_num),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Fits for every coupling value with at least three distinct drifts.
pub fn fittable_slopes(rows: &[SweepRow]) -> Vec<(f64, SlopeFit)> {
    let mut kappas: Vec<f64> = rows.iter().map(|r| r.kappa).collect();
    kappas.sort_by(f64::total_cmp);
    kappas.dedup();
    kappas
        .into_iter()
        .filter_map(|k| {
            let group: Vec<SweepRow> = rows.iter().filter(|r| r.kappa == k).copied().collect();
            fit_slope(&group).ok().map(|f| (k, f))
        })
        .collect()
}

pub fn trace_file_name(a: f64, kappa: f64) -> String {
    format!("trace_A{}_kappa{}.csv", fmt_num(a), fmt_num(kappa))
}

/// Files written by [`emit_reports`].
#[derive(Debug, Clone, Default)]
pub struct ReportPaths {
    pub sweep: PathBuf,
    pub slopes: PathBuf,
    pub bounds: PathBuf,
    pub traces: Vec<PathBuf>,
}

/// Writes `sweep.csv`, `slopes.csv`, `bounds.csv` and, if asked, one trace
/// per run under `traces/`.
pub fn emit_reports(dir: &Path, runs: &[RunOutput], traces: bool) -> Result<ReportPaths> {
    let mkdir = |p: &Path| {
        std::fs::create_dir_all(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    mkdir(dir)?;
    let rows: Vec<SweepRow> = runs.iter().map(|r| r.row).collect();
    let mut paths = ReportPaths {
        sweep: dir.join("sweep.csv"),
        slopes: dir.join("slopes.csv"),
        bounds: dir.join("bounds.csv"),
        traces: Vec::new(),
    };
    write_sweep(create(&paths.sweep)?, &rows)?;
    write_slopes(create(&paths.slopes)?, &fittable_slopes(&rows))?;
    let reports: Vec<(f64, f64, &[BoundReport])> = runs
        .iter()
        .map(|r| (r.row.a, r.row.kappa, r.bounds.as_slice()))
        .collect();
    write_bounds(create(&paths.bounds)?, &reports)?;
    if traces {
        let tdir = dir.join("traces");
        mkdir(&tdir)?;
        for r in runs {
            let p = tdir.join(trace_file_name(r.row.a, r.row.kappa));
            write_trace(create(&p)?, &r.trace)?;
            paths.traces.push(p);
        }
    }
    Ok(paths)
}
