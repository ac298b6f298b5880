//! The N-layer model: parameters, admissibility rules and front-like initial data.
//!
//! Each layer `j` carries a drift `A_j`, a width `h_j`, and is coupled to its
//! cyclic neighbours with strength `alpha_j = kappa / h_j`:
//!
//! ```text
//! (T_j)_t + A_j (T_j)_x - (T_j)_xx = T_j (1 - T_j)
//!                                    + alpha_j (T_{j-1} - T_j) + alpha_j (T_{j+1} - T_j)
//! ```
//!
//! Reaction strength and along-layer diffusivity are both normalized to one.

use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance on the weighted drift sum `|sum h_j A_j|`.
pub const EPS_FLOW: f64 = 1e-12;
/// Values within this distance outside `[0, 1]` are clamped silently.
pub const TOL_MAX: f64 = 1e-10;
/// Window adequacy: edge values must be within this of their limits.
pub const DELTA_EDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSystem {
    pub drifts: Vec<f64>,
    pub widths: Vec<f64>,
    pub kappa: f64,
}

/// One failed admissibility rule of a [`LayerSystem`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewLayers { n: usize },
    LengthMismatch { drifts: usize, widths: usize },
    MeanZeroFlow { weighted_sum: f64, scale: f64 },
    WidthNotPositive { index: usize, value: f64 },
    KappaNotPositive { value: f64 },
    NonFiniteDrift { index: usize, value: f64 },
}

impl Violation {
    /// Short name of the violated invariant.
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::TooFewLayers { .. } => "at least two layers",
            Violation::LengthMismatch { .. } => "matching lengths",
            Violation::MeanZeroFlow { .. } => "mean-zero flow",
            Violation::WidthNotPositive { .. } => "width positive",
            Violation::KappaNotPositive { .. } => "kappa positive",
            Violation::NonFiniteDrift { .. } => "finite drift",
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Violation::WidthNotPositive { index, .. } | Violation::NonFiniteDrift { index, .. } => {
                Some(*index)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewLayers { n } => write!(f, "{}: N = {n}", self.invariant()),
            Violation::LengthMismatch { drifts, widths } => {
                write!(f, "{}: {drifts} drifts vs {widths} widths", self.invariant())
            }
            Violation::MeanZeroFlow { weighted_sum, scale } => write!(
                f,
                "{}: sum h_j A_j = {weighted_sum:e} exceeds {EPS_FLOW:e} * {scale:e}",
                self.invariant()
            ),
            Violation::WidthNotPositive { index, value } => {
                write!(f, "{}: h[{index}] = {value}", self.invariant())
            }
            Violation::KappaNotPositive { value } => {
                write!(f, "{}: kappa = {value}", self.invariant())
            }
            Violation::NonFiniteDrift { index, value } => {
                write!(f, "{}: A[{index}] = {value}", self.invariant())
            }
        }
    }
}

/// Checks every admissibility rule and reports all violations found.
pub fn validate_system(sys: &LayerSystem) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = sys.drifts.len();
    if n < 2 {
        out.push(Violation::TooFewLayers { n });
    }
    if sys.widths.len() != n {
        out.push(Violation::LengthMismatch {
            drifts: n,
            widths: sys.widths.len(),
        });
    }
    for (index, &value) in sys.drifts.iter().enumerate() {
        if !value.is_finite() {
            out.push(Violation::NonFiniteDrift { index, value });
        }
    }
    for (index, &value) in sys.widths.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            out.push(Violation::WidthNotPositive { index, value });
        }
    }
    if !(sys.kappa > 0.0 && sys.kappa.is_finite()) {
        out.push(Violation::KappaNotPositive { value: sys.kappa });
    }
    if sys.widths.len() == n {
        let weighted_sum: f64 = sys.widths.iter().zip(&sys.drifts).map(|(h, a)| h * a).sum();
        let scale: f64 = sys.widths.iter().zip(&sys.drifts).map(|(h, a)| h * a.abs()).sum();
        if weighted_sum.abs() > EPS_FLOW * scale {
            out.push(Violation::MeanZeroFlow { weighted_sum, scale });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Removes the width-weighted mean from `raw`.
pub fn balance_drifts(raw: &[f64], widths: &[f64]) -> Result<Vec<f64>> {
    if raw.len() != widths.len() {
        return Err(Error::LengthMismatch {
            what: "widths",
            expected: raw.len(),
            got: widths.len(),
        });
    }
    if let Some((j, h)) = widths.iter().enumerate().find(|(_, &h)| !(h > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "width h[{j}] = {h} is not positive"
        )));
    }
    let total: f64 = widths.iter().sum();
    let mean = raw.iter().zip(widths).map(|(a, h)| a * h).sum::<f64>() / total;
    if mean == 0.0 {
        return Ok(raw.to_vec());
    }
    Ok(raw.iter().map(|a| a - mean).collect())
}

impl LayerSystem {
    /// Builds a system and rejects it unless every invariant holds.
    pub fn new(drifts: Vec<f64>, widths: Vec<f64>, kappa: f64) -> Result<Self> {
        let sys = LayerSystem {
            drifts,
            widths,
            kappa,
        };
        validate_system(&sys).map_err(|v| {
            Error::InvalidSystem(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        Ok(sys)
    }

    /// The two-layer system with drifts `(A, -A)` and unit widths.
    pub fn two_layer(a: f64, kappa: f64) -> Result<Self> {
        Self::new(vec![a, -a], vec![1.0, 1.0], kappa)
    }

    /// Unit-width layers with alternating drifts `(+A, -A, ...)`, balanced.
    pub fn alternating(n: usize, a: f64, kappa: f64) -> Result<Self> {
        let widths = vec![1.0; n];
        let raw: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { a } else { -a }).collect();
        let drifts = balance_drifts(&raw, &widths)?;
        Self::new(drifts, widths, kappa)
    }

    pub fn n_layers(&self) -> usize {
        self.drifts.len()
    }

    /// Coupling strength `kappa / h_j`.
    pub fn alpha(&self, j: usize) -> f64 {
        self.kappa / self.widths[j]
    }

    pub fn max_alpha(&self) -> f64 {
        (0..self.n_layers()).map(|j| self.alpha(j)).fold(0.0, f64::max)
    }

    pub fn total_width(&self) -> f64 {
        self.widths.iter().sum()
    }

    pub fn max_abs_drift(&self) -> f64 {
        self.drifts.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `1 + max_j 1/h_j`
    pub fn r1(&self) -> f64 {
        1.0 + self.widths.iter().fold(0.0, |m: f64, h| m.max(1.0 / h))
    }

    /// `1 + max_j h_j / h_{j-1}`, cyclic in `j`.
    pub fn r2(&self) -> f64 {
        let n = self.n_layers();
        1.0 + (0..n)
            .map(|j| self.widths[j] / self.widths[(j + n - 1) % n])
            .fold(0.0, f64::max)
    }

    /// Index of the cyclic predecessor of layer `j`.
    pub fn prev(&self, j: usize) -> usize {
        (j + self.n_layers() - 1) % self.n_layers()
    }

    /// Index of the cyclic successor of layer `j`.
    pub fn next(&self, j: usize) -> usize {
        (j + 1) % self.n_layers()
    }
}

/// Discretized profiles of all layers on a uniform window.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontState {
    pub grid_spacing: f64,
    /// x-coordinate of grid point 0.
    pub window_offset: f64,
    pub profiles: Vec<Vec<f64>>,
    pub time: f64,
}

impl FrontState {
    pub fn n_points(&self) -> usize {
        self.profiles.first().map_or(0, Vec::len)
    }

    pub fn n_layers(&self) -> usize {
        self.profiles.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.window_offset + i as f64 * self.grid_spacing
    }

    pub fn x_hi(&self) -> f64 {
        self.x(self.n_points() - 1)
    }

    pub fn width(&self) -> f64 {
        (self.n_points() - 1) as f64 * self.grid_spacing
    }

    /// A state with every layer constant.
    pub fn uniform(n_layers: usize, window: Window, value: f64) -> Result<Self> {
        let n = window.n_points()?;
        Ok(FrontState {
            grid_spacing: window.dx,
            window_offset: window.x_lo,
            profiles: vec![vec![value; n]; n_layers],
            time: 0.0,
        })
    }

    /// Checks the range invariant and the front-like edge condition at
    /// `pad` cells in from each edge.
    pub fn check_front_like(&self, pad: usize) -> Result<()> {
        for (layer, p) in self.profiles.iter().enumerate() {
            if let Some(&v) = p.iter().find(|v| !(**v >= -TOL_MAX && **v <= 1.0 + TOL_MAX)) {
                return Err(Error::InvalidArgument(format!(
                    "layer {layer} value {v} outside [0, 1]"
                )));
            }
        }
        self.check_edges(pad)
    }

    /// The edge part of [`check_front_like`](Self::check_front_like): the
    /// values `pad` cells in from each edge are within `DELTA_EDGE` of 1
    /// and 0.
    pub fn check_edges(&self, pad: usize) -> Result<()> {
        let n = self.n_points();
        let (il, ir) = (pad.min(n - 1), n - 1 - pad.min(n - 1));
        for (layer, p) in self.profiles.iter().enumerate() {
            if p[il] < 1.0 - DELTA_EDGE {
                return Err(Error::WindowInadequate {
                    time: self.time,
                    layer,
                    side: crate::error::Side::Left,
                    value: p[il],
                    offset: self.window_offset,
                });
            }
            if p[ir] > DELTA_EDGE {
                return Err(Error::WindowInadequate {
                    time: self.time,
                    layer,
                    side: crate::error::Side::Right,
                    value: p[ir],
                    offset: self.window_offset,
                });
            }
        }
        Ok(())
    }
}

/// Uniform grid `x_lo, x_lo + dx, ..., x_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub dx: f64,
}

impl Window {
    pub fn new(x_lo: f64, x_hi: f64, dx: f64) -> Self {
        Window { x_lo, x_hi, dx }
    }

    pub fn n_points(&self) -> Result<usize> {
        if !(self.dx > 0.0) || !(self.x_hi > self.x_lo) {
            return Err(Error::InvalidArgument(format!(
                "bad window [{}, {}] with dx = {}",
                self.x_lo, self.x_hi, self.dx
            )));
        }
        let n = ((self.x_hi - self.x_lo) / self.dx).round() as usize + 1;
        if n < 3 {
            return Err(Error::InvalidArgument(format!("window has only {n} points")));
        }
        Ok(n)
    }
}

/// Logistic front `1 / (1 + e^{lambda x})`, evaluated without overflow.
pub fn sigmoid_front(lambda: f64, x: f64) -> f64 {
    let z = lambda * x;
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Every layer starts from the logistic front of rate `lambda` centred at 0.
pub fn make_front_initial_data(sys: &LayerSystem, lambda: f64, window: Window) -> Result<FrontState> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    if !(window.x_lo < 0.0 && 0.0 < window.x_hi) {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] must contain 0 in its interior",
            window.x_lo, window.x_hi
        )));
    }
    let n = window.n_points()?;
    let x_hi = window.x_lo + (n - 1) as f64 * window.dx;
    let left_gap = 1.0 - sigmoid_front(lambda, window.x_lo);
    let right_val = sigmoid_front(lambda, x_hi);
    if left_gap > DELTA_EDGE || right_val > DELTA_EDGE {
        return Err(Error::WindowTooNarrow {
            x_lo: window.x_lo,
            x_hi,
            value: left_gap.max(right_val),
            tol: DELTA_EDGE,
        });
    }
    let profile: Vec<f64> = (0..n)
        .map(|i| sigmoid_front(lambda, window.x_lo + i as f64 * window.dx))
        .collect();
    Ok(FrontState {
        grid_spacing: window.dx,
        window_offset: window.x_lo,
        profiles: vec![profile; sys.n_layers()],
        time: 0.0,
    })
}

/// `max_j |A_j| + lambda + (1 + 2 max_j alpha_j) / lambda`
pub fn decay_speed_bound(sys: &LayerSystem, lambda: f64) -> f64 {
    sys.max_abs_drift() + lambda + (1.0 + 2.0 * sys.max_alpha()) / lambda
}

/// Travelling exponential barrier `c0 exp(-lambda (x - c1 t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub c0: f64,
    pub lambda: f64,
    pub c1: f64,
}

impl DecayEnvelope {
    /// The envelope with the smallest admissible upper speed.
    pub fn for_system(sys: &LayerSystem, c0: f64, lambda: f64) -> Self {
        DecayEnvelope {
            c0,
            lambda,
            c1: decay_speed_bound(sys, lambda),
        }
    }

    pub fn is_admissible(&self, sys: &LayerSystem) -> bool {
        self.c0 > 0.0 && self.lambda > 0.0 && self.c1 >= decay_speed_bound(sys, self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a: &[f64], h: &[f64], kappa: f64) -> LayerSystem {
        LayerSystem {
            drifts: a.to_vec(),
            widths: h.to_vec(),
            kappa,
        }
    }

    #[test]
    fn validate_examples() {
        assert!(validate_system(&sys(&[5.0, -5.0], &[1.0, 1.0], 1.0)).is_ok());

        let v = validate_system(&sys(&[5.0, 0.0], &[1.0, 1.0], 1.0)).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant(), "mean-zero flow");

        let v = validate_system(&sys(&[1.0, 1.0, -2.0], &[1.0; 3], 0.0)).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant(), "kappa positive");
    }

    #[test]
    fn validate_reports_every_violation_with_index() {
        let v = validate_system(&sys(&[1.0], &[-1.0], -2.0)).unwrap_err();
        let names: Vec<_> = v.iter().map(Violation::invariant).collect();
        assert!(names.contains(&"at least two layers"));
        assert!(names.contains(&"kappa positive"));
        let w = v.iter().find(|v| v.invariant() == "width positive").unwrap();
        assert_eq!(w.index(), Some(0));
    }

    #[test]
    fn balance_examples() {
        assert_eq!(
            balance_drifts(&[10.0, 0.0], &[1.0, 1.0]).unwrap(),
            vec![5.0, -5.0]
        );
        assert_eq!(
            balance_drifts(&[3.0, -3.0], &[1.0, 1.0]).unwrap(),
            vec![3.0, -3.0]
        );
        assert_eq!(
            balance_drifts(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert!(matches!(
            balance_drifts(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn decay_speed_examples() {
        let s = sys(&[5.0, -5.0], &[1.0, 1.0], 1.0);
        assert_eq!(decay_speed_bound(&s, 1.0), 9.0);
        let s = sys(&[0.0, 0.0], &[1.0, 1.0], 1.0);
        assert_eq!(decay_speed_bound(&s, 1.0), 4.0);
        let s = sys(&[2.0, -2.0], &[0.5, 0.5], 1.0);
        assert_eq!(decay_speed_bound(&s, 2.0), 6.5);
    }

    #[test]
    fn geometry_constants() {
        let s = sys(&[2.0, -1.0], &[1.0, 2.0], 1.0);
        assert_eq!(s.r1(), 2.0);
        assert_eq!(s.r2(), 3.0);
        assert_eq!(s.total_width(), 3.0);
        assert_eq!(s.alpha(1), 0.5);
    }

    #[test]
    fn initial_data_examples() {
        let s = LayerSystem::two_layer(5.0, 1.0).unwrap();
        let st = make_front_initial_data(&s, 1.0, Window::new(-20.0, 20.0, 0.05)).unwrap();
        let mid = st.n_points() / 2;
        assert_eq!(st.x(mid), 0.0);
        for p in &st.profiles {
            assert_eq!(p[mid], 0.5);
            assert!(1.0 - p[0] < 1e-6);
        }
        assert!(sigmoid_front(2.0, 10.0) < (-20.0f64).exp());
        st.check_front_like(0).unwrap();
    }

    #[test]
    fn initial_data_rejects_narrow_window() {
        let s = LayerSystem::two_layer(5.0, 1.0).unwrap();
        let err = make_front_initial_data(&s, 1.0, Window::new(-5.0, 20.0, 0.05)).unwrap_err();
        assert!(matches!(err, Error::WindowTooNarrow { .. }));
        assert!(make_front_initial_data(&s, 1.0, Window::new(1.0, 20.0, 0.05)).is_err());
        assert!(make_front_initial_data(&s, -1.0, Window::new(-20.0, 20.0, 0.05)).is_err());
    }

    #[test]
    fn alternating_pattern_is_balanced() {
        let s = LayerSystem::alternating(3, 4.0, 0.5).unwrap();
        let sum: f64 = s.drifts.iter().sum();
        assert!(sum.abs() < 1e-12);
        assert!(LayerSystem::alternating(4, 4.0, 0.5).unwrap().drifts == vec![4.0, -4.0, 4.0, -4.0]);
    }
}
