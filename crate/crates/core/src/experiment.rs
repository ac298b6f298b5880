//! Parameter sweeps over drift strength and coupling.
//!
//! Each sweep point builds a balanced layer system, simulates sigmoid data
//! on an automatically sized moving window, records a [`BurnTrace`], and
//! evaluates the bound checks. Points run in a worker pool; results come
//! back sorted by `(kappa, A)` and do not depend on the pool size.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{check_bounds, BoundConstants, BoundReport, C_TWO_LAYER};
use crate::diagnostics::{time_average, time_average_timederiv, time_std, BurnTrace, TraceRecorder};
use crate::error::{Error, Result};
use crate::model::{balance_drifts, make_front_initial_data, LayerSystem, Window, DELTA_EDGE};
use crate::solver::{RunStats, Solver, SolverConfig};
use crate::spreading::{burnt_side_rate, linear_spreading_speed};

/// Steps between window shifts in sweeps. The front moves well under the
/// window margins in this many steps.
pub const RECENTER_EVERY: usize = 10;

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "FRONTBURN_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_layers: usize,
    /// Relative drifts, scaled by each sweep value of `A` and then balanced.
    /// Defaults to `+1, -1, +1, ...`.
    pub drift_pattern: Option<Vec<f64>>,
    /// Layer widths; all 1 by default.
    pub widths: Option<Vec<f64>>,
    pub sweep_a: Vec<f64>,
    pub sweep_kappa: Vec<f64>,
    pub dx: f64,
    pub dt: f64,
    /// Total window width; sized automatically when `None`.
    pub window: Option<f64>,
    /// Relative front position; chosen with the window when `None`.
    pub recenter_target: Option<f64>,
    pub t_transient: f64,
    pub t_end: f64,
    /// Averaging horizon of the bound checks; `t_end` when `None`.
    pub tau: Option<f64>,
    /// Decay rate of the initial sigmoid.
    pub lambda: f64,
    /// Steps between trace samples.
    pub sample_every: usize,
    /// Seed for the random profiles of the inequality self-test.
    pub seed: u64,
    pub c_two: f64,
    pub c_multi: f64,
    pub output_dir: Option<PathBuf>,
    pub write_traces: bool,
    /// Record wall-clock time per run; when false the column is 0 so that
    /// reports are byte-for-byte reproducible.
    pub wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_layers: 2,
            drift_pattern: None,
            widths: None,
            sweep_a: Vec::new(),
            sweep_kappa: Vec::new(),
            dx: 0.05,
            dt: 0.005,
            window: None,
            recenter_target: None,
            t_transient: 20.0,
            t_end: 120.0,
            tau: None,
            lambda: 1.0,
            sample_every: 10,
            seed: 0,
            c_two: C_TWO_LAYER,
            c_multi: C_TWO_LAYER,
            output_dir: None,
            write_traces: true,
            wall_time: true,
        }
    }
}

/// How a key given more than once combines with earlier values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assign {
    /// List keys accumulate; used when reading a config file.
    Append,
    /// Every key replaces its old value; used for command-line overrides.
    Replace,
}

fn parse_f64(key: &str, v: &str) -> std::result::Result<f64, String> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("{key}: expected a number, got {v:?}"))
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("{key}: expected true or false, got {other:?}")),
    }
}

/// Comma or whitespace separated numbers; `start:stop:step` expands to an
/// inclusive range.
fn parse_list(key: &str, v: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
    {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_f64(key, x)?),
            [a, b, s] => {
                let (a, b, s) = (parse_f64(key, a)?, parse_f64(key, b)?, parse_f64(key, s)?);
                if !(s > 0.0) || b < a {
                    return Err(format!("{key}: bad range {item:?}"));
                }
                let n = ((b - a) / s + 1e-9).floor() as usize;
                // Round to 12 digits so 0.1:1:0.1 gives 0.3, not 0.30000000000000004.
                out.extend((0..=n).map(|i| {
                    let x = a + i as f64 * s;
                    format!("{x:.12e}").parse::<f64>().unwrap_or(x)
                }));
            }
            _ => return Err(format!("{key}: bad list item {item:?}")),
        }
    }
    if out.is_empty() {
        return Err(format!("{key}: empty list"));
    }
    Ok(out)
}

fn auto_or<T>(
    v: &str,
    f: impl FnOnce(&str) -> std::result::Result<T, String>,
) -> std::result::Result<Option<T>, String> {
    if v.trim() == "auto" {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config {
                path: origin.to_string(),
                line: k + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            cfg.set(key.trim(), value.trim(), Assign::Append).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// Sets one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str, mode: Assign) -> std::result::Result<(), String> {
        let list_into = |dst: &mut Vec<f64>, v: Vec<f64>| match mode {
            Assign::Append => dst.extend(v),
            Assign::Replace => *dst = v,
        };
        match key {
            "n_layers" => {
                self.n_layers = value
                    .parse()
                    .map_err(|_| format!("n_layers: expected an integer, got {value:?}"))?
            }
            "drift_pattern" => self.drift_pattern = Some(parse_list(key, value)?),
            "widths" => self.widths = Some(parse_list(key, value)?),
            "sweep_A" => list_into(&mut self.sweep_a, parse_list(key, value)?),
            "sweep_kappa" | "kappa" => list_into(&mut self.sweep_kappa, parse_list(key, value)?),
            "dx" => self.dx = parse_f64(key, value)?,
            "dt" => self.dt = parse_f64(key, value)?,
            "window" => self.window = auto_or(value, |v| parse_f64(key, v))?,
            "recenter_target" => self.recenter_target = auto_or(value, |v| parse_f64(key, v))?,
            "t_transient" => self.t_transient = parse_f64(key, value)?,
            "t_end" => self.t_end = parse_f64(key, value)?,
            "tau" => {
                self.tau = if value == "t_end" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "lambda" => self.lambda = parse_f64(key, value)?,
            "sample_every" => {
                self.sample_every = value
                    .parse()
                    .map_err(|_| format!("sample_every: expected an integer, got {value:?}"))?
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("seed: expected an integer, got {value:?}"))?
            }
            "c_two" => self.c_two = parse_f64(key, value)?,
            "c_multi" => self.c_multi = parse_f64(key, value)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "write_traces" => self.write_traces = parse_bool(key, value)?,
            "wall_time" => self.wall_time = parse_bool(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.t_end)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_layers < 2 {
            return bad(format!("n_layers = {} must be at least 2", self.n_layers));
        }
        for (name, v) in [("drift_pattern", &self.drift_pattern), ("widths", &self.widths)] {
            if let Some(v) = v {
                if v.len() != self.n_layers {
                    return bad(format!(
                        "{name} has {} entries for {} layers",
                        v.len(),
                        self.n_layers
                    ));
                }
            }
        }
        if self.sweep_a.is_empty() || self.sweep_kappa.is_empty() {
            return bad("sweep_A and sweep_kappa need at least one value each".into());
        }
        if let Some(a) = self.sweep_a.iter().find(|a| !(**a >= 0.0)) {
            return bad(format!("sweep_A value {a} must be nonnegative"));
        }
        if let Some(k) = self.sweep_kappa.iter().find(|k| !(**k > 0.0)) {
            return bad(format!("sweep_kappa value {k} must be positive"));
        }
        for (name, v) in [
            ("dx", self.dx),
            ("dt", self.dt),
            ("lambda", self.lambda),
            ("t_end", self.t_end),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.t_transient >= 0.0 && self.t_transient < self.t_end) {
            return bad(format!(
                "need 0 <= t_transient < t_end, got {} and {}",
                self.t_transient, self.t_end
            ));
        }
        if !(self.tau() > 0.0 && self.tau() <= self.t_end) {
            return bad(format!("tau = {} must lie in (0, t_end]", self.tau()));
        }
        if let Some(w) = self.window {
            if !(w > 0.0) {
                return bad(format!("window = {w} must be positive"));
            }
        }
        if let Some(t) = self.recenter_target {
            if !(0.1..=0.9).contains(&t) {
                return bad(format!("recenter_target = {t} outside [0.1, 0.9]"));
            }
        }
        if self.sample_every == 0 {
            return bad("sample_every must be positive".into());
        }
        if !(self.c_two > 0.0 && self.c_multi > 0.0) {
            return bad("bound constants must be positive".into());
        }
        Ok(())
    }

    /// Balanced system for one sweep point.
    pub fn system(&self, a: f64, kappa: f64) -> Result<LayerSystem> {
        let n = self.n_layers;
        let widths = self.widths.clone().unwrap_or_else(|| vec![1.0; n]);
        let raw: Vec<f64> = match &self.drift_pattern {
            Some(p) => p.iter().map(|s| s * a).collect(),
            None => (0..n).map(|j| if j % 2 == 0 { a } else { -a }).collect(),
        };
        let drifts = balance_drifts(&raw, &widths)?;
        LayerSystem::new(drifts, widths, kappa)
    }

    /// Sweep points sorted by `(kappa, A)`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self
            .sweep_kappa
            .iter()
            .flat_map(|&k| self.sweep_a.iter().map(move |&a| (a, k)))
            .collect();
        pts.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0)));
        pts.dedup();
        pts
    }
}

/// Window placement for one run: the initial front sits at `x = 0`, which
/// is at relative position `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPlan {
    pub x_lo: f64,
    pub x_hi: f64,
    pub target: f64,
}

/// Sizes the window from the linear decay rates on either side of the
/// front so that both edges stay within `DELTA_EDGE` of their limits.
pub fn plan_window(sys: &LayerSystem, lambda0: f64) -> WindowPlan {
    let spread = linear_spreading_speed(sys);
    let log_tol = (1.0 / DELTA_EDGE).ln();
    let ahead_rate = spread.lambda.min(lambda0);
    // The leading tail is slower than the linear rate during the transient.
    let mut right = 2.0 * log_tol / ahead_rate + 20.0;
    let behind_rate = burnt_side_rate(sys, spread.speed);
    let mut left = (log_tol + 4.0) / behind_rate + 10.0;
    let min_total = 40.0 + 4.0 * sys.max_abs_drift();
    if left + right < min_total {
        let extra = 0.5 * (min_total - left - right);
        left += extra;
        right += extra;
    }
    left = left.max(right / 9.0);
    // The front keeps widening over a run, and at weak coupling its leading
    // tail outruns the linear estimate; tie the margin to the burnt side,
    // which grows the same way with A and 1/kappa.
    right = right.max(left / 4.0);
    WindowPlan {
        x_lo: -left,
        x_hi: right,
        target: (left / (left + right)).clamp(0.1, 0.9),
    }
}

fn window_for(cfg: &ExperimentConfig, sys: &LayerSystem) -> WindowPlan {
    let auto = plan_window(sys, cfg.lambda);
    let target = cfg.recenter_target.unwrap_or(auto.target);
    let width = cfg.window.unwrap_or(auto.x_hi - auto.x_lo);
    WindowPlan {
        x_lo: -target * width,
        x_hi: (1.0 - target) * width,
        target,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub kappa: f64,
    /// Post-transient time average of the reaction-route burning rate.
    pub v_avg: f64,
    pub v_std: f64,
    /// NaN when the system is not a symmetric unit-width pair.
    pub bound_two_layer: f64,
    pub bound_multi_layer: f64,
    pub genbound_pass: bool,
    pub wall_time: f64,
}

/// Everything measured on one sweep point.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub row: SweepRow,
    pub system: LayerSystem,
    pub window: WindowPlan,
    pub trace: BurnTrace,
    pub bounds: Vec<BoundReport>,
    /// Post-transient average of the mass-derivative route.
    pub v_avg_timederiv: f64,
    pub stats: RunStats,
}

impl RunOutput {
    pub fn bounds_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass)
    }
}

/// Simulates one sweep point.
pub fn run_single(cfg: &ExperimentConfig, a: f64, kappa: f64) -> Result<RunOutput> {
    let started = Instant::now();
    let sys = cfg.system(a, kappa)?;
    let plan = window_for(cfg, &sys);
    let state = make_front_initial_data(&sys, cfg.lambda, Window::new(plan.x_lo, plan.x_hi, cfg.dx))?;
    let solver_cfg = SolverConfig {
        dt: cfg.dt,
        recenter_every: RECENTER_EVERY,
        recenter_target: plan.target,
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(&sys, solver_cfg, state.grid_spacing, state.n_points())?;
    let mut rec = TraceRecorder::new(&sys);
    rec.record(&state)?;
    let last = ((cfg.t_end - state.time) / cfg.dt - 1e-9).ceil() as usize;
    let mut k = 0usize;
    let (_, stats) = solver.run(state, cfg.t_end, |_, st| {
        k += 1;
        if k.is_multiple_of(cfg.sample_every) || k == last {
            rec.record(st)?;
        }
        Ok(())
    })?;
    let trace = rec.finish();
    let v_avg = time_average(&trace, cfg.t_transient, cfg.t_end)?;
    let v_std = time_std(&trace, cfg.t_transient, cfg.t_end)?;
    let v_avg_timederiv = time_average_timederiv(&trace, cfg.t_transient, cfg.t_end)?;
    let bounds = check_bounds(
        &sys,
        &trace,
        cfg.tau(),
        BoundConstants {
            c_two: cfg.c_two,
            c_multi: cfg.c_multi,
        },
    )?;
    let rhs_of = |kind| bounds.iter().find(|b| b.kind == kind).map_or(f64::NAN, |b| b.rhs);
    let row = SweepRow {
        a,
        kappa,
        v_avg,
        v_std,
        bound_two_layer: rhs_of(crate::bounds::BoundKind::TwoLayer),
        bound_multi_layer: rhs_of(crate::bounds::BoundKind::MultiLayer),
        genbound_pass: bounds
            .iter()
            .filter(|b| b.kind == crate::bounds::BoundKind::Universal)
            .all(|b| b.pass),
        wall_time: if cfg.wall_time {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        },
    };
    Ok(RunOutput {
        row,
        system: sys,
        window: plan,
        trace,
        bounds,
        v_avg_timederiv,
        stats,
    })
}

/// Worker count: `FRONTBURN_THREADS` if set to a positive integer, else the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every sweep point with [`worker_count`] workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutput>> {
    run_experiment_with(cfg, worker_count())
}

/// Runs every sweep point on a pool of `threads` workers. Output order is
/// `(kappa, A)` regardless of `threads`.
pub fn run_experiment_with(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<RunOutput>> {
    cfg.validate()?;
    let points = cfg.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let results: Vec<Result<RunOutput>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(a, kappa)| {
                run_single(cfg, a, kappa).map_err(|e| Error::RunFailed {
                    a,
                    kappa,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares fit of `v_avg` against `A`. Needs three distinct `A`.
/// An exact fit, including constant data, has `r2 = 1`.
pub fn fit_slope(rows: &[SweepRow]) -> Result<SlopeFit> {
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.a).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} distinct A values, need at least 3",
            distinct.len()
        )));
    }
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.a).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.v_avg).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.a - mx).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| (r.a - mx) * (r.v_avg - my)).sum();
    let syy: f64 = rows.iter().map(|r| (r.v_avg - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = rows
        .iter()
        .map(|r| (r.v_avg - intercept - slope * r.a).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit { slope, intercept, r2 })
}

/// One fit per coupling value, in increasing `kappa`.
pub fn fit_slopes(rows: &[SweepRow]) -> Result<Vec<(f64, SlopeFit)>> {
    let mut kappas: Vec<f64> = rows.iter().map(|r| r.kappa).collect();
    kappas.sort_by(f64::total_cmp);
    kappas.dedup();
    kappas
        .into_iter()
        .map(|k| {
            let group: Vec<SweepRow> = rows.iter().filter(|r| r.kappa == k).copied().collect();
            fit_slope(&group).map(|f| (k, f))
        })
        .collect()
}
