//! Implicit-explicit Crank–Nicolson time stepping on a moving window.
//!
//! Per layer, advection and diffusion are treated with the trapezoidal rule
//! using centred second-order differences; reaction and inter-layer coupling
//! are taken explicitly at the old time level. Each layer therefore solves
//! its own constant tridiagonal system, factored once per [`Solver`].
//!
//! The window carries Dirichlet values 1 on the left and 0 on the right and
//! is shifted by whole cells to keep the front at a fixed relative position.

use crate::diagnostics::front_position;
use crate::error::{Error, Result};
use crate::model::{validate_system, FrontState, LayerSystem};
use crate::tridiag::{ThomasFactor, Tridiagonal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// Steps between window recentering.
    pub recenter_every: usize,
    /// Desired relative front position inside the window, in `[0.1, 0.9]`.
    pub recenter_target: f64,
    /// Cells next to each edge excluded from the adequacy check; the
    /// Dirichlet rows pin the outermost values regardless of the solution.
    pub boundary_pad: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.005,
            recenter_every: 1,
            recenter_target: 0.5,
            boundary_pad: 2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if self.recenter_every == 0 {
            return Err(Error::InvalidArgument("recenter_every must be positive".into()));
        }
        if !(0.1..=0.9).contains(&self.recenter_target) {
            return Err(Error::InvalidArgument(format!(
                "recenter_target = {} outside [0.1, 0.9]",
                self.recenter_target
            )));
        }
        if self.boundary_pad == 0 {
            return Err(Error::InvalidArgument("boundary_pad must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    /// Largest distance any value was moved to bring it into `[0, 1]`.
    pub max_clamp: f64,
    /// Cells the window moved (positive: to the right).
    pub shifted_cells: isize,
}

/// Aggregate statistics of a [`Solver::run`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub max_clamp: f64,
    pub total_shift: isize,
}

/// Non-fatal warnings about the discretization.
pub fn advisories(sys: &LayerSystem, dx: f64, cfg: &SolverConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.dt * sys.max_abs_drift() > dx {
        out.push(format!(
            "advection resolution: dt * max|A| = {} exceeds dx = {dx}",
            cfg.dt * sys.max_abs_drift()
        ));
    }
    let stiff = cfg.dt * (1.0 + 2.0 * sys.max_alpha());
    if stiff > 0.5 {
        out.push(format!(
            "explicit coupling: dt * (1 + 2 max alpha) = {stiff} exceeds 0.5"
        ));
    }
    out
}

/// Stencil of `T_xx - A T_x` at an interior point: `(lower, centre, upper)`.
fn stencil(drift: f64, dx: f64) -> (f64, f64, f64) {
    let d = 1.0 / (dx * dx);
    let a = drift / (2.0 * dx);
    (d + a, -2.0 * d, d - a)
}

/// Dirichlet data at the window edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EdgeValues {
    /// 1 on the left, 0 on the right, with the front-like adequacy check
    /// after every step.
    #[default]
    Limits,
    /// Keep each layer's current edge values; no adequacy check. For
    /// non-front data such as constant states.
    Hold,
}

/// Time stepper bound to one system, grid size and configuration.
#[derive(Debug)]
pub struct Solver<'a> {
    sys: &'a LayerSystem,
    cfg: SolverConfig,
    edges: EdgeValues,
    dx: f64,
    n: usize,
    factors: Vec<ThomasFactor>,
    stencils: Vec<(f64, f64, f64)>,
    scratch: Vec<Vec<f64>>,
}

impl<'a> Solver<'a> {
    pub fn new(sys: &'a LayerSystem, cfg: SolverConfig, dx: f64, n_points: usize) -> Result<Self> {
        validate_system(sys).map_err(|v| {
            Error::InvalidSystem(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        cfg.validate()?;
        if !(dx > 0.0) || n_points < 2 * cfg.boundary_pad + 3 {
            return Err(Error::InvalidArgument(format!(
                "grid with dx = {dx} and {n_points} points is too small"
            )));
        }
        let n = n_points;
        let half = 0.5 * cfg.dt;
        let mut factors = Vec::with_capacity(sys.n_layers());
        let mut stencils = Vec::with_capacity(sys.n_layers());
        for (layer, &a) in sys.drifts.iter().enumerate() {
            let (lo, mid, up) = stencil(a, dx);
            let mut m = Tridiagonal {
                lower: vec![-half * lo; n],
                diag: vec![1.0 - half * mid; n],
                upper: vec![-half * up; n],
            };
            m.diag[0] = 1.0;
            m.upper[0] = 0.0;
            m.diag[n - 1] = 1.0;
            m.lower[n - 1] = 0.0;
            let f = m.factor().map_err(|row| Error::SingularSystem { layer, row })?;
            factors.push(f);
            stencils.push((lo, mid, up));
        }
        Ok(Solver {
            sys,
            cfg,
            edges: EdgeValues::Limits,
            dx,
            n,
            factors,
            stencils,
            scratch: vec![vec![0.0; n]; sys.n_layers()],
        })
    }

    pub fn with_edges(mut self, edges: EdgeValues) -> Self {
        self.edges = edges;
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn check_grid(&self, state: &FrontState) -> Result<()> {
        if state.grid_spacing != self.dx
            || state.n_points() != self.n
            || state.n_layers() != self.sys.n_layers()
        {
            return Err(Error::WindowMismatch(format!(
                "solver built for {} layers x {} points at dx = {}, state has {} x {} at dx = {}",
                self.sys.n_layers(),
                self.n,
                self.dx,
                state.n_layers(),
                state.n_points(),
                state.grid_spacing
            )));
        }
        Ok(())
    }

    /// Advances `state` by one time step without recentering.
    pub fn step_in_place(&mut self, state: &mut FrontState) -> Result<StepReport> {
        self.check_grid(state)?;
        let n = self.n;
        let dt = self.cfg.dt;
        let nl = self.sys.n_layers();
        // Solve for the increment (I - dt/2 L) d = dt (L T + S(T)), so constant
        // states give an exactly zero right-hand side.
        for j in 0..nl {
            let t = &state.profiles[j];
            let tp = &state.profiles[self.sys.prev(j)];
            let tn = &state.profiles[self.sys.next(j)];
            let alpha = self.sys.alpha(j);
            let (lo, _, up) = self.stencils[j];
            let rhs = &mut self.scratch[j];
            let (left, right) = match self.edges {
                EdgeValues::Limits => (1.0, 0.0),
                EdgeValues::Hold => (t[0], t[n - 1]),
            };
            rhs[0] = left - t[0];
            rhs[n - 1] = right - t[n - 1];
            let inner = rhs[1..n - 1]
                .iter_mut()
                .zip(t.windows(3))
                .zip(tp[1..n - 1].iter().zip(&tn[1..n - 1]));
            for ((r, w), (&a, &b)) in inner {
                let v = w[1];
                let transport = lo * (w[0] - v) + up * (w[2] - v);
                let source = v * (1.0 - v) + alpha * (a - v) + alpha * (b - v);
                *r = dt * (transport + source);
            }
        }
        for (f, r) in self.factors.chunks(2).zip(self.scratch.chunks_mut(2)) {
            match (f, r) {
                ([fa, fb], [ra, rb]) => ThomasFactor::solve_pair_in_place(fa, ra, fb, rb),
                ([fa], [ra]) => fa.solve_in_place(ra),
                _ => unreachable!("factors and scratch have one entry per layer"),
            }
        }
        // Values are clamped, so only the edges need checking afterwards.
        let mut max_clamp: f64 = 0.0;
        for (p, d) in state.profiles.iter_mut().zip(&self.scratch) {
            for (v, dv) in p.iter_mut().zip(d) {
                let w = *v + dv;
                let c = w.clamp(0.0, 1.0);
                max_clamp = max_clamp.max((w - c).abs());
                *v = c;
            }
        }
        state.time += dt;
        if self.edges == EdgeValues::Limits {
            state.check_edges(self.cfg.boundary_pad)?;
        }
        Ok(StepReport {
            max_clamp,
            shifted_cells: 0,
        })
    }

    /// Steps until `t_end`, recentering every `recenter_every` steps. The
    /// observer sees every post-step state before any recentering.
    pub fn run<F>(&mut self, state: FrontState, t_end: f64, mut observer: F) -> Result<(FrontState, RunStats)>
    where
        F: FnMut(f64, &FrontState) -> Result<()>,
    {
        let mut st = state;
        let t0 = st.time;
        let mut stats = RunStats::default();
        if !(t_end > t0) {
            return Ok((st, stats));
        }
        let n_steps = ((t_end - t0) / self.cfg.dt - 1e-9).ceil() as usize;
        for k in 1..=n_steps {
            let rep = self.step_in_place(&mut st)?;
            st.time = t0 + k as f64 * self.cfg.dt;
            stats.max_clamp = stats.max_clamp.max(rep.max_clamp);
            observer(st.time, &st)?;
            if k % self.cfg.recenter_every == 0 {
                let shift = recenter_in_place(self.sys, &mut st, &self.cfg)?;
                stats.total_shift += shift;
            }
        }
        stats.steps = n_steps;
        Ok((st, stats))
    }
}

/// One time step of `state`; see [`Solver`] for the scheme.
pub fn step(sys: &LayerSystem, state: &FrontState, cfg: &SolverConfig) -> Result<(FrontState, StepReport)> {
    let mut solver = Solver::new(sys, *cfg, state.grid_spacing, state.n_points())?;
    let mut next = state.clone();
    let rep = solver.step_in_place(&mut next)?;
    Ok((next, rep))
}

/// Shifts the window by whole cells so the front sits at the configured
/// relative position. Returns the shift in cells.
pub fn recenter_in_place(sys: &LayerSystem, state: &mut FrontState, cfg: &SolverConfig) -> Result<isize> {
    let front = front_position(sys, state)?;
    let target = state.window_offset + cfg.recenter_target * state.width();
    let shift = ((front - target) / state.grid_spacing).round() as isize;
    if shift == 0 {
        return Ok(0);
    }
    let n = state.n_points();
    let k = shift.unsigned_abs().min(n);
    for p in &mut state.profiles {
        if shift > 0 {
            p.copy_within(k.., 0);
            p[n - k..].fill(0.0);
        } else {
            p.copy_within(..n - k, k);
            p[..k].fill(1.0);
        }
    }
    state.window_offset += shift as f64 * state.grid_spacing;
    Ok(shift)
}

pub fn recenter(sys: &LayerSystem, state: &FrontState, cfg: &SolverConfig) -> Result<(FrontState, isize)> {
    let mut st = state.clone();
    let shift = recenter_in_place(sys, &mut st, cfg)?;
    Ok((st, shift))
}

/// Runs `state` to `t_end`; see [`Solver::run`].
pub fn run<F>(
    sys: &LayerSystem,
    state: FrontState,
    cfg: &SolverConfig,
    t_end: f64,
    observer: F,
) -> Result<FrontState>
where
    F: FnMut(f64, &FrontState) -> Result<()>,
{
    let mut solver = Solver::new(sys, *cfg, state.grid_spacing, state.n_points())?;
    Ok(solver.run(state, t_end, observer)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_front_initial_data, Window};

    fn sigmoid_state(sys: &LayerSystem) -> FrontState {
        make_front_initial_data(sys, 1.0, Window::new(-20.0, 30.0, 0.05)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            recenter_target: 0.95,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_states_are_fixed_points() {
        let sys = LayerSystem::two_layer(3.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let w = Window::new(-5.0, 5.0, 0.05);
        for value in [0.0, 1.0] {
            let mut st = FrontState::uniform(2, w, value).unwrap();
            let mut solver = Solver::new(&sys, cfg, w.dx, st.n_points())
                .unwrap()
                .with_edges(EdgeValues::Hold);
            for _ in 0..50 {
                let rep = solver.step_in_place(&mut st).unwrap();
                assert_eq!(rep.max_clamp, 0.0);
            }
            assert!(st.profiles.iter().flatten().all(|&v| v == value));
        }
    }

    #[test]
    fn stencil_annihilates_constants() {
        for a in [0.0, 3.0, -50.0] {
            let (lo, mid, up) = stencil(a, 0.05);
            assert!((lo + mid + up).abs() < 1e-9);
        }
    }

    #[test]
    fn fully_burnt_state_stays_burnt_with_limit_edges() {
        let sys = LayerSystem::two_layer(3.0, 1.0).unwrap();
        let w = Window::new(-5.0, 5.0, 0.05);
        let mut st = FrontState::uniform(2, w, 1.0).unwrap();
        let mut solver = Solver::new(&sys, SolverConfig::default(), w.dx, st.n_points()).unwrap();
        // The right edge is pinned to 0, so only the adequacy check fails.
        assert!(matches!(
            solver.step_in_place(&mut st),
            Err(Error::WindowInadequate {
                side: crate::error::Side::Right,
                ..
            })
        ));
        assert_eq!(st.profiles[0][0], 1.0);
    }

    #[test]
    fn symmetric_layers_stay_identical() {
        let sys = LayerSystem::two_layer(0.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let st = sigmoid_state(&sys);
        let mut count = 0;
        let end = run(&sys, st, &cfg, 1.0, |_, s| {
            count += 1;
            assert_eq!(s.profiles[0], s.profiles[1]);
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 200);
        assert!((end.time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observer_count_and_empty_run() {
        let sys = LayerSystem::two_layer(0.0, 1.0).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            ..Default::default()
        };
        let st = sigmoid_state(&sys);
        let mut count = 0;
        run(&sys, st.clone(), &cfg, 1.0, |_, _| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 100);

        let mut called = false;
        let same = run(&sys, st.clone(), &cfg, st.time, |_, _| {
            called = true;
            Ok(())
        })
        .unwrap();
        assert!(!called);
        assert_eq!(same, st);
    }

    #[test]
    fn recenter_examples() {
        let sys = LayerSystem::two_layer(0.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let st = make_front_initial_data(&sys, 1.0, Window::new(-20.0, 20.0, 0.05)).unwrap();
        let (same, shift) = recenter(&sys, &st, &cfg).unwrap();
        assert_eq!(shift, 0);
        assert_eq!(same, st);

        let cfg = SolverConfig {
            recenter_target: 0.4875,
            ..Default::default()
        };
        // Target sits 0.5 length units (10 cells) left of the front.
        let (moved, shift) = recenter(&sys, &st, &cfg).unwrap();
        assert_eq!(shift, 10);
        assert!((moved.window_offset - (st.window_offset + 0.5)).abs() < 1e-12);
        assert_eq!(moved.profiles[0][0], st.profiles[0][10]);
        assert_eq!(*moved.profiles[0].last().unwrap(), 0.0);
        let f = front_position(&sys, &moved).unwrap();
        let target = moved.window_offset + cfg.recenter_target * moved.width();
        assert!((f - target).abs() <= moved.grid_spacing);

        let cfg = SolverConfig {
            recenter_target: 0.8,
            ..Default::default()
        };
        let (moved, shift) = recenter(&sys, &st, &cfg).unwrap();
        assert!(shift < 0);
        assert_eq!(moved.profiles[1][0], 1.0);
    }

    #[test]
    fn advisory_guards() {
        let sys = LayerSystem::two_layer(50.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let adv = advisories(&sys, 0.05, &cfg);
        assert_eq!(adv.len(), 1);
        assert!(adv[0].contains("advection"));
        let sys = LayerSystem::two_layer(1.0, 100.0).unwrap();
        assert!(advisories(&sys, 0.05, &cfg)[0].contains("coupling"));
    }
}
