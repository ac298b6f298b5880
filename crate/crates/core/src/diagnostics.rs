//! Bulk burning rate, front position and time averages.
//!
//! The burning rate has two routes: the width-weighted reaction integral
//! (one state) and the time derivative of the width-weighted mass (two
//! states). For mean-zero drift they agree; the first is the primary one.

use crate::error::{Error, Result};
use crate::model::{DecayEnvelope, FrontState, LayerSystem};

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dx * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

fn trapezoid_map(values: &[f64], dx: f64, f: impl Fn(f64) -> f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => {
            dx * (0.5 * (f(*first) + f(*last)) + inner.iter().map(|&v| f(v)).sum::<f64>())
        }
    }
}

/// `(1/H) sum_j h_j int T_j (1 - T_j) dx`
pub fn burning_rate_reaction(sys: &LayerSystem, state: &FrontState) -> f64 {
    let weighted: f64 = state
        .profiles
        .iter()
        .zip(&sys.widths)
        .map(|(p, h)| h * trapezoid_map(p, state.grid_spacing, |t| t * (1.0 - t)))
        .sum();
    weighted / sys.total_width()
}

/// `int (T_j - 1_{x<0}) dx` over the real line, taking the profile as 1 left
/// of the window and 0 right of it. Unlike the raw window integral this does
/// not jump when the window is shifted.
pub fn layer_mass(state: &FrontState, j: usize) -> f64 {
    trapezoid(&state.profiles[j], state.grid_spacing) + state.window_offset
}

/// Width-weighted mean of [`layer_mass`].
pub fn total_mass(sys: &LayerSystem, state: &FrontState) -> f64 {
    (0..state.n_layers())
        .map(|j| sys.widths[j] * layer_mass(state, j))
        .sum::<f64>()
        / sys.total_width()
}

/// Finite-difference burning rate between two states on windows of equal
/// size and spacing. Windows may be offset by whole cells.
pub fn burning_rate_timederiv(sys: &LayerSystem, prev: &FrontState, next: &FrontState) -> Result<f64> {
    if prev.grid_spacing != next.grid_spacing
        || prev.n_points() != next.n_points()
        || prev.n_layers() != next.n_layers()
    {
        return Err(Error::WindowMismatch(format!(
            "dx {} vs {}, {} vs {} points, {} vs {} layers",
            prev.grid_spacing,
            next.grid_spacing,
            prev.n_points(),
            next.n_points(),
            prev.n_layers(),
            next.n_layers()
        )));
    }
    let dt = next.time - prev.time;
    if dt == 0.0 && prev == next {
        return Ok(0.0);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "next.time {} must exceed prev.time {}",
            next.time, prev.time
        )));
    }
    Ok((total_mass(sys, next) - total_mass(sys, prev)) / dt)
}

/// Rightmost 0.5-crossing of the width-weighted mean profile, linearly
/// interpolated.
pub fn front_position(sys: &LayerSystem, state: &FrontState) -> Result<f64> {
    let h_total = sys.total_width();
    let mean = |i: usize| -> f64 {
        state
            .profiles
            .iter()
            .zip(&sys.widths)
            .map(|(p, h)| h * p[i])
            .sum::<f64>()
            / h_total
    };
    let n = state.n_points();
    let mut right = mean(n - 1);
    for i in (0..n - 1).rev() {
        let left = mean(i);
        if left >= 0.5 && right < 0.5 {
            let frac = (left - 0.5) / (left - right);
            return Ok(state.x(i) + frac * state.grid_spacing);
        }
        right = left;
    }
    Err(Error::FrontNotBracketed)
}

/// Burning-rate time series recorded along a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BurnTrace {
    pub times: Vec<f64>,
    pub v_reaction: Vec<f64>,
    pub v_timederiv: Vec<f64>,
    pub front_pos: Vec<f64>,
}

impl BurnTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times.first().copied().unwrap_or(f64::NAN)
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }
}

/// Builds a [`BurnTrace`] from a stream of states.
///
/// `v_timederiv[k]` is the backward difference of [`total_mass`] over
/// `(t_{k-1}, t_k]`; the first sample borrows the forward difference of the
/// first interval. Only the previous mass is kept, so samples may be spaced
/// several steps apart and straddle window shifts.
#[derive(Debug)]
pub struct TraceRecorder<'a> {
    sys: &'a LayerSystem,
    prev: Option<(f64, f64, f64, usize)>,
    pub trace: BurnTrace,
}

impl<'a> TraceRecorder<'a> {
    pub fn new(sys: &'a LayerSystem) -> Self {
        TraceRecorder {
            sys,
            prev: None,
            trace: BurnTrace::default(),
        }
    }

    pub fn record(&mut self, state: &FrontState) -> Result<()> {
        let mass = total_mass(self.sys, state);
        let td = match self.prev {
            Some((t0, m0, dx, n)) => {
                if dx != state.grid_spacing || n != state.n_points() {
                    return Err(Error::WindowMismatch(format!(
                        "dx {dx} vs {}, {n} vs {} points",
                        state.grid_spacing,
                        state.n_points()
                    )));
                }
                if !(state.time > t0) {
                    return Err(Error::InvalidArgument(format!(
                        "sample time {} does not advance past {t0}",
                        state.time
                    )));
                }
                Some((mass - m0) / (state.time - t0))
            }
            None => None,
        };
        let t = &mut self.trace;
        t.times.push(state.time);
        t.v_reaction.push(burning_rate_reaction(self.sys, state));
        t.front_pos
            .push(front_position(self.sys, state).unwrap_or(f64::NAN));
        match td {
            Some(v) => {
                if t.v_timederiv.len() == 1 {
                    t.v_timederiv[0] = v;
                }
                t.v_timederiv.push(v);
            }
            None => t.v_timederiv.push(f64::NAN),
        }
        self.prev = Some((state.time, mass, state.grid_spacing, state.n_points()));
        Ok(())
    }

    pub fn finish(self) -> BurnTrace {
        self.trace
    }
}

fn check_range(times: &[f64], lo: f64, hi: f64) -> Result<()> {
    let (start, end) = match (times.first(), times.last()) {
        (Some(&s), Some(&e)) => (s, e),
        _ => (f64::NAN, f64::NAN),
    };
    // Accept endpoints that miss the grid by rounding only.
    let slack = 1e-9 * (1.0 + end.abs());
    if !(lo < hi) || !(lo >= start - slack) || !(hi <= end + slack) {
        return Err(Error::TraceRange { lo, hi, start, end });
    }
    Ok(())
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&s| s < t);
    if k == 0 {
        return values[0];
    }
    if k >= times.len() {
        return values[times.len() - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// Trapezoidal mean of a sampled series over `[lo, hi]`, with linear
/// interpolation at the ends.
pub fn average_series(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    check_range(times, lo, hi)?;
    let lo = lo.max(times[0]);
    let hi = hi.min(times[times.len() - 1]);
    let mut acc = 0.0;
    let mut t_prev = lo;
    let mut v_prev = interp(times, values, lo);
    for (&t, &v) in times.iter().zip(values) {
        if t <= lo {
            continue;
        }
        if t >= hi {
            break;
        }
        acc += 0.5 * (v + v_prev) * (t - t_prev);
        t_prev = t;
        v_prev = v;
    }
    let v_hi = interp(times, values, hi);
    acc += 0.5 * (v_hi + v_prev) * (hi - t_prev);
    Ok(acc / (hi - lo))
}

/// Time average of the reaction-route burning rate over `[t_lo, t_hi]`.
pub fn time_average(trace: &BurnTrace, t_lo: f64, t_hi: f64) -> Result<f64> {
    average_series(&trace.times, &trace.v_reaction, t_lo, t_hi)
}

/// Time average of the mass-derivative route over `[t_lo, t_hi]`.
pub fn time_average_timederiv(trace: &BurnTrace, t_lo: f64, t_hi: f64) -> Result<f64> {
    average_series(&trace.times, &trace.v_timederiv, t_lo, t_hi)
}

/// Time-weighted standard deviation of the reaction route over `[t_lo, t_hi]`.
pub fn time_std(trace: &BurnTrace, t_lo: f64, t_hi: f64) -> Result<f64> {
    let mean = time_average(trace, t_lo, t_hi)?;
    let sq: Vec<f64> = trace.v_reaction.iter().map(|v| (v - mean).powi(2)).collect();
    Ok(average_series(&trace.times, &sq, t_lo, t_hi)?.max(0.0).sqrt())
}

/// Absolute slack subtracted from both margins. `1 - T` near `T = 1` is only
/// resolved to about 1e-16 in f64, and rounding in the solver adds a few
/// ulps per step, so smaller violations carry no information.
pub const ENVELOPE_SLACK: f64 = 1e-12;

/// Largest signed violation of the two decay envelopes over all layers and
/// grid points. Negative values mean the envelope holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeMargin {
    /// `max T_j - c0 exp(-lambda (x - c1 t))`, less the slack
    pub upper: f64,
    /// `max (1 - T_j) - c0 exp(lambda (x + c1 t))`, less the slack
    pub lower: f64,
}

impl EnvelopeMargin {
    pub fn worst(&self) -> f64 {
        self.upper.max(self.lower)
    }
}

/// Evaluates both envelopes on `state`. `env` should be admissible for `sys`
/// (see [`DecayEnvelope::is_admissible`]); no check is made here.
pub fn check_envelope(sys: &LayerSystem, state: &FrontState, env: &DecayEnvelope) -> EnvelopeMargin {
    debug_assert_eq!(sys.n_layers(), state.n_layers());
    let t = state.time;
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for p in &state.profiles {
        for (i, &v) in p.iter().enumerate() {
            let x = state.x(i);
            let up_env = env.c0 * (-env.lambda * (x - env.c1 * t)).exp();
            let lo_env = env.c0 * (env.lambda * (x + env.c1 * t)).exp();
            upper = upper.max(v - up_env - ENVELOPE_SLACK);
            lower = lower.max((1.0 - v) - lo_env - ENVELOPE_SLACK);
        }
    }
    EnvelopeMargin { upper, lower }
}
