//! Quadrature checks of the functional inequalities behind the bounds.
//!
//! For any C¹ front `T` going from 1 at `-inf` to 0 at `+inf`,
//!
//! ```text
//! int (T_x)^2 dx * int T (1 - T) dx >= (pi/8)^2
//! ```
//!
//! with equality for `T = (1 - sin x) / 2` on `[-pi/2, pi/2]` (flat outside).
//! For any pair of such profiles,
//!
//! ```text
//! int |T1 - T2| <= 3 [ int (T1 - T2)^2 + int T1 (1 - T1) + T2 (1 - T2) ].
//! ```

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::trapezoid;
use crate::error::{Error, Result};

/// The sharp constant `(pi/8)^2`.
pub const FINEQ_CONSTANT: f64 = (PI / 8.0) * (PI / 8.0);
/// Quadrature allowance on the product at `dx <= 1e-3`.
pub const TOL_Q: f64 = 1e-3;
/// Edge tolerance for admissible profiles.
pub const PROFILE_EDGE_TOL: f64 = 1e-6;

/// A sampled front on a uniform grid, taken as 1 to the left of the grid and
/// 0 to the right.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x_lo: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(x_lo: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || values.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "profile needs dx > 0 and at least 3 samples (dx = {dx}, n = {})",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "value {v} at index {i} outside [0, 1]"
            )));
        }
        let (first, last) = (values[0], values[values.len() - 1]);
        if first < 1.0 - PROFILE_EDGE_TOL || last > PROFILE_EDGE_TOL {
            return Err(Error::InvalidArgument(format!(
                "profile not front-like: first = {first}, last = {last}"
            )));
        }
        Ok(Profile { x_lo, dx, values })
    }

    /// Samples `f` on `[x_lo, x_lo + (n - 1) dx]`.
    pub fn sample(x_lo: f64, dx: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(x_lo, dx, (0..n).map(|i| f(x_lo + i as f64 * dx)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    /// Centred differences inside, one-sided at the two ends.
    pub fn derivative(&self) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        let mut d = vec![0.0; n];
        d[0] = (v[1] - v[0]) / self.dx;
        d[n - 1] = (v[n - 1] - v[n - 2]) / self.dx;
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * self.dx);
        }
        d
    }

    fn same_grid(&self, other: &Profile) -> bool {
        self.values.len() == other.values.len()
            && self.dx == other.dx
            && (self.x_lo - other.x_lo).abs() <= 1e-9 * self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineqProduct {
    /// `int (T_x)^2`
    pub dirichlet: f64,
    /// `int T (1 - T)`
    pub reaction: f64,
    pub product: f64,
}

impl FineqProduct {
    /// `product / (pi/8)^2`
    pub fn ratio(&self) -> f64 {
        self.product / FINEQ_CONSTANT
    }
}

pub fn fineq_product(p: &Profile) -> FineqProduct {
    let d = p.derivative();
    let sq: Vec<f64> = d.iter().map(|v| v * v).collect();
    let react: Vec<f64> = p.values.iter().map(|t| t * (1.0 - t)).collect();
    let dirichlet = trapezoid(&sq, p.dx);
    let reaction = trapezoid(&react, p.dx);
    FineqProduct {
        dirichlet,
        reaction,
        product: dirichlet * reaction,
    }
}

/// `(int T_x sqrt(T (1 - T)) dx)^2`, the Cauchy–Schwarz lower bound of the
/// product. Tends to `(pi/8)^2` for any monotone front.
pub fn cauchy_schwarz_cross(p: &Profile) -> f64 {
    let d = p.derivative();
    let cross: Vec<f64> = d
        .iter()
        .zip(&p.values)
        .map(|(dt, t)| dt * (t * (1.0 - t)).max(0.0).sqrt())
        .collect();
    trapezoid(&cross, p.dx).powi(2)
}

/// The equality case: 1 for `x <= -pi/2`, `(1 - sin x)/2` in between, 0 for
/// `x >= pi/2`, sampled from `-pi` to at least `pi`.
pub fn extremal_profile(dx: f64) -> Result<Profile> {
    if !(dx > 0.0 && dx < PI / 4.0) {
        return Err(Error::InvalidArgument(format!("dx = {dx} must lie in (0, pi/4)")));
    }
    let n = (2.0 * PI / dx).ceil() as usize + 1;
    Profile::sample(-PI, dx, n, |x| {
        if x <= -PI / 2.0 {
            1.0
        } else if x >= PI / 2.0 {
            0.0
        } else {
            0.5 * (1.0 - x.sin())
        }
    })
}

/// `(lhs, rhs)` of the L¹ coupling inequality for profiles on a shared grid.
pub fn l1_coupling_bound(p: &Profile, q: &Profile) -> Result<(f64, f64)> {
    if !p.same_grid(q) {
        return Err(Error::WindowMismatch(format!(
            "profiles on different grids: ({}, {}, {}) vs ({}, {}, {})",
            p.x_lo,
            p.dx,
            p.len(),
            q.x_lo,
            q.dx,
            q.len()
        )));
    }
    let (lhs, sq, react) = l1_coupling_terms(&p.values, &q.values, p.dx);
    Ok((lhs, 3.0 * (sq + react)))
}

/// Quadratures `int |a - b|`, `int (a - b)^2`, `int a(1-a) + b(1-b)` on a
/// shared uniform grid.
pub fn l1_coupling_terms(a: &[f64], b: &[f64], dx: f64) -> (f64, f64, f64) {
    let abs: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    let react: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x * (1.0 - x) + y * (1.0 - y))
        .collect();
    (trapezoid(&abs, dx), trapezoid(&sq, dx), trapezoid(&react, dx))
}

/// Parameters of one random front; see [`random_admissible_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFront {
    /// `(centre, rate)` of each logistic factor.
    pub factors: Vec<(f64, f64)>,
    /// Amplitude of the `T (1 - T) sin(omega x + phase)` perturbation, `< 1`.
    pub wiggle: f64,
    pub omega: f64,
    pub phase: f64,
}

impl RandomFront {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=3);
        let factors = (0..k)
            .map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(0.5..4.0)))
            .collect();
        RandomFront {
            factors,
            wiggle: rng.gen_range(0.0..0.9),
            omega: rng.gen_range(0.2..6.0),
            phase: rng.gen_range(0.0..2.0 * PI),
        }
    }

    /// Product of logistic factors times `1 + wiggle (1 - T) sin(...)`.
    /// Stays in `[0, 1]` because `T + T (1 - T) <= 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let t: f64 = self
            .factors
            .iter()
            .map(|&(c, rate)| crate::model::sigmoid_front(rate, x - c))
            .product();
        let s = (self.omega * x + self.phase).sin();
        (t + self.wiggle * t * (1.0 - t) * s).clamp(0.0, 1.0)
    }

    /// Interval outside which the front is within `1e-7` of its limits.
    pub fn support(&self) -> (f64, f64) {
        let c_min = self.factors.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
        let c_max = self.factors.iter().map(|f| f.0).fold(f64::NEG_INFINITY, f64::max);
        let r_min = self.factors.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
        let r_max = self.factors.iter().map(|f| f.1).fold(0.0, f64::max);
        // 1 - T <= 3 e^{r_min (x - c_min)} left of c_min; the perturbation
        // at most doubles either tail.
        (c_min - (6e7f64).ln() / r_min, c_max + (2e7f64).ln() / r_max)
    }
}

/// Deterministic admissible front for property sweeps.
pub fn random_admissible_profile(seed: u64, dx: f64) -> Result<Profile> {
    if !(dx > 0.0) {
        return Err(Error::InvalidArgument(format!("dx = {dx} must be positive")));
    }
    let front = RandomFront::from_seed(seed);
    let (lo, hi) = front.support();
    let n = ((hi - lo) / dx).ceil() as usize + 1;
    Profile::sample(lo, dx, n, |x| front.eval(x))
}

/// Two independent random fronts on a common grid covering both supports.
/// Seeds `2 seed` and `2 seed + 1` of [`RandomFront`] are used.
pub fn random_admissible_pair(seed: u64, dx: f64) -> Result<(Profile, Profile)> {
    if !(dx > 0.0) {
        return Err(Error::InvalidArgument(format!("dx = {dx} must be positive")));
    }
    let a = RandomFront::from_seed(seed.wrapping_mul(2));
    let b = RandomFront::from_seed(seed.wrapping_mul(2).wrapping_add(1));
    let (a_lo, a_hi) = a.support();
    let (b_lo, b_hi) = b.support();
    let (lo, hi) = (a_lo.min(b_lo), a_hi.max(b_hi));
    let n = ((hi - lo) / dx).ceil() as usize + 1;
    Ok((
        Profile::sample(lo, dx, n, |x| a.eval(x))?,
        Profile::sample(lo, dx, n, |x| b.eval(x))?,
    ))
}

/// Extremal value error allowed by [`fineq_selftest`].
pub const EXTREMAL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestReport {
    pub dx: f64,
    pub extremal: FineqProduct,
    /// `|product - (pi/8)^2|` on the extremal profile.
    pub extremal_error: f64,
    pub seeds: u64,
    /// Seed with the smallest product ratio, and that ratio.
    pub worst_seed: u64,
    pub worst_ratio: f64,
}

impl SelftestReport {
    pub fn extremal_pass(&self) -> bool {
        self.extremal_error <= EXTREMAL_TOL
    }

    pub fn random_pass(&self) -> bool {
        self.seeds == 0 || self.worst_ratio >= 1.0 - TOL_Q
    }

    pub fn pass(&self) -> bool {
        self.extremal_pass() && self.random_pass()
    }
}

/// Evaluates the product on the extremal profile and on `seeds` random
/// admissible profiles with seeds `seed_base, seed_base + 1, ...`.
pub fn fineq_selftest(dx: f64, seeds: u64, seed_base: u64) -> Result<SelftestReport> {
    let extremal = fineq_product(&extremal_profile(dx)?);
    let mut worst = (seed_base, f64::INFINITY);
    for seed in seed_base..seed_base + seeds {
        let r = fineq_product(&random_admissible_profile(seed, dx)?).ratio();
        if r < worst.1 {
            worst = (seed, r);
        }
    }
    Ok(SelftestReport {
        dx,
        extremal,
        extremal_error: (extremal.product - FINEQ_CONSTANT).abs(),
        seeds,
        worst_seed: worst.0,
        worst_ratio: worst.1,
    })
}
