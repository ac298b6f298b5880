//! Linear spreading speed of the layered system.
//!
//! Linearizing at `T = 0` and inserting `T_j = v_j exp(-lambda (x - c t))`
//! gives `lambda c v = M(lambda) v` with
//!
//! ```text
//! M_jj = lambda^2 + A_j lambda + 1 - 2 alpha_j,   M_{j,j+-1} += alpha_j.
//! ```
//!
//! `M` is similar to a symmetric matrix under `diag(sqrt h)`, so its top
//! eigenvalue is real. The cooperative KPP system spreads at
//! `c* = min_lambda sigma_max(lambda) / lambda`; the minimizer `lambda*` is
//! the decay rate of the leading edge, which sizes the window ahead of the
//! front.
//!
//! Behind a front moving at speed `c`, `u = 1 - T` decays like `exp(mu xi)`
//! where `mu` is the smallest positive root of
//! `sigma_max(diag(mu^2 + (c - A_j) mu - 1 - 2 alpha_j) + coupling) = 0`.
//! A layer drifting against the front makes `mu` small, so this sizes the
//! window behind the front.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::model::LayerSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadingSpeed {
    pub speed: f64,
    pub lambda: f64,
}

/// Largest eigenvalue of `diag(d_j - 2 alpha_j) + coupling`, symmetrized.
fn principal_eigenvalue(sys: &LayerSystem, d: impl Fn(usize) -> f64) -> f64 {
    let n = sys.n_layers();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] += d(j) - 2.0 * sys.alpha(j);
        for k in [sys.prev(j), sys.next(j)] {
            m[(j, k)] += sys.kappa / (sys.widths[j] * sys.widths[k]).sqrt();
        }
    }
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue of the symmetrized linearization at decay rate `lambda`.
pub fn growth_rate(sys: &LayerSystem, lambda: f64) -> f64 {
    principal_eigenvalue(sys, |j| lambda * lambda + sys.drifts[j] * lambda + 1.0)
}

/// Decay rate of `1 - T` behind a front moving at `speed`.
pub fn burnt_side_rate(sys: &LayerSystem, speed: f64) -> f64 {
    let f = |mu: f64| principal_eigenvalue(sys, |j| mu * mu + (speed - sys.drifts[j]) * mu - 1.0);
    // f(0) = -1; step out geometrically to the first sign change.
    let (mut lo, mut hi) = (0.0, 1e-4);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes `sigma_max(lambda) / lambda` by a log-spaced scan followed by
/// golden-section refinement.
pub fn linear_spreading_speed(sys: &LayerSystem) -> SpreadingSpeed {
    let speed_at = |l: f64| growth_rate(sys, l) / l;
    let (lo, hi) = (-8.0f64, 5.0f64);
    let steps = 260;
    let mut best = (f64::INFINITY, 0usize);
    let grid = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    for k in 0..=steps {
        let c = speed_at(grid(k).exp());
        if c < best.0 {
            best = (c, k);
        }
    }
    let mut a = grid(best.1.saturating_sub(1));
    let mut b = grid((best.1 + 1).min(steps));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (speed_at(x1.exp()), speed_at(x2.exp()));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = speed_at(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = speed_at(x2.exp());
        }
    }
    let l = (0.5 * (a + b)).exp();
    SpreadingSpeed {
        speed: speed_at(l),
        lambda: l,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_kpp_speed_is_two() {
        for kappa in [0.1, 1.0, 3.0] {
            let s = linear_spreading_speed(&LayerSystem::two_layer(0.0, kappa).unwrap());
            assert!((s.speed - 2.0).abs() < 1e-9, "{s:?}");
            assert!((s.lambda - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn two_layer_closed_form() {
        // For N = 2 both neighbours are the other layer, so the top
        // eigenvalue is l^2 + 1 - 2k + sqrt(A^2 l^2 + 4k^2).
        let (a, k) = (12.0, 0.35);
        let sys = LayerSystem::two_layer(a, k).unwrap();
        for l in [0.1, 0.7, 2.0] {
            let closed = l * l + 1.0 - 2.0 * k + (a * a * l * l + 4.0 * k * k).sqrt();
            assert!((growth_rate(&sys, l) - closed).abs() < 1e-10);
        }
        let s = linear_spreading_speed(&sys);
        let brute = (1..200_000)
            .map(|i| {
                let l = i as f64 * 1e-5;
                (l * l + 1.0 - 2.0 * k + (a * a * l * l + 4.0 * k * k).sqrt()) / l
            })
            .fold(f64::INFINITY, f64::min);
        assert!((s.speed - brute).abs() < 1e-6, "{} vs {brute}", s.speed);
    }

    #[test]
    fn burnt_side_rate_examples() {
        // Pure KPP: mu^2 + c mu - 1 = 0.
        let sys = LayerSystem::two_layer(0.0, 1.0).unwrap();
        let mu = burnt_side_rate(&sys, 2.0);
        assert!((mu - (2f64.sqrt() - 1.0)).abs() < 1e-10);
        // Weak coupling: the layer drifting backwards sets the rate.
        let sys = LayerSystem::two_layer(30.0, 1e-6).unwrap();
        let mu = burnt_side_rate(&sys, 32.0);
        let c = 32.0 + 30.0;
        let expect = 0.5 * (-c + (c * c + 4.0f64).sqrt());
        assert!((mu - expect).abs() < 1e-4 * expect, "{mu} vs {expect}");
        // Coupling can only speed up the decay.
        let strong = burnt_side_rate(&LayerSystem::two_layer(30.0, 1.0).unwrap(), 32.0);
        assert!(strong > mu);
    }

    #[test]
    fn speed_grows_with_drift() {
        let mut prev = 0.0;
        for a in [0.0, 5.0, 10.0, 20.0] {
            let s = linear_spreading_speed(&LayerSystem::two_layer(a, 0.5).unwrap()).speed;
            assert!(s > prev);
            prev = s;
        }
    }
}
