//! Tridiagonal systems by direct elimination (Thomas algorithm).
//!
//! The implicit half of each time step solves the same matrix every step, so
//! the elimination is split into a one-off factorization and a cheap solve.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals.
///
/// `lower[0]` and `upper[n - 1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Forward-elimination coefficients of a [`Tridiagonal`]. The lower band is
/// stored pre-divided by the pivots so each elimination step is a single
/// multiply-subtract on the dependency chain.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower_scaled: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = M x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// Fails on a zero (or non-finite) pivot; `row` is the offending row.
    pub fn factor(&self) -> std::result::Result<ThomasFactor, usize> {
        let n = self.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.lower[i] * prev_upper
            };
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(i);
            }
            inv_pivot[i] = 1.0 / pivot;
            upper_mod[i] = if i + 1 < n {
                self.upper[i] * inv_pivot[i]
            } else {
                0.0
            };
            prev_upper = upper_mod[i];
        }
        let lower_scaled = (0..n)
            .map(|i| if i == 0 { 0.0 } else { self.lower[i] * inv_pivot[i] })
            .collect();
        Ok(ThomasFactor {
            lower_scaled,
            upper_mod,
            inv_pivot,
        })
    }
}

impl ThomasFactor {
    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        let (ls, ip, um) = (
            &self.lower_scaled[..n],
            &self.inv_pivot[..n],
            &self.upper_mod[..n],
        );
        rhs[0] *= ip[0];
        for i in 1..n {
            rhs[i] = rhs[i] * ip[i] - ls[i] * rhs[i - 1];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= um[i] * rhs[i + 1];
        }
    }

    /// Solves two independent systems of equal size in lockstep. Same result
    /// as two calls to [`solve_in_place`](Self::solve_in_place), but the two
    /// elimination chains overlap in the pipeline.
    pub fn solve_pair_in_place(a: &Self, ra: &mut [f64], b: &Self, rb: &mut [f64]) {
        let n = a.len();
        assert!(b.len() == n && ra.len() == n && rb.len() == n);
        if n == 0 {
            return;
        }
        let (ls_a, ip_a, um_a) = (&a.lower_scaled[..n], &a.inv_pivot[..n], &a.upper_mod[..n]);
        let (ls_b, ip_b, um_b) = (&b.lower_scaled[..n], &b.inv_pivot[..n], &b.upper_mod[..n]);
        ra[0] *= ip_a[0];
        rb[0] *= ip_b[0];
        for i in 1..n {
            ra[i] = ra[i] * ip_a[i] - ls_a[i] * ra[i - 1];
            rb[i] = rb[i] * ip_b[i] - ls_b[i] * rb[i - 1];
        }
        for i in (0..n - 1).rev() {
            ra[i] -= um_a[i] * ra[i + 1];
            rb[i] -= um_b[i] * rb[i + 1];
        }
    }
}

/// One-shot solve of `M x = rhs`.
pub fn solve_tridiagonal(m: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.len() || m.lower.len() != m.len() || m.upper.len() != m.len() {
        return Err(Error::LengthMismatch {
            what: "tridiagonal system",
            expected: m.len(),
            got: rhs.len(),
        });
    }
    let f = m
        .factor()
        .map_err(|row| Error::SingularSystem { layer: 0, row })?;
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    fn dense_solve(m: &Tridiagonal, rhs: &[f64]) -> Vec<f64> {
        let n = m.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = m.diag[i];
            if i > 0 {
                a[i][i - 1] = m.lower[i];
            }
            if i + 1 < n {
                a[i][i + 1] = m.upper[i];
            }
            a[i][n] = rhs[i];
        }
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..=n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][n] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn small_system_matches_dense() {
        let m = Tridiagonal {
            lower: vec![0.0, -1.0, 2.0, 0.5],
            diag: vec![4.0, 5.0, 6.0, 3.0],
            upper: vec![1.0, 1.5, -1.0, 0.0],
        };
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(&m, &rhs).unwrap();
        let y = dense_solve(&m, &rhs);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let m = Tridiagonal {
            lower: vec![0.0, 1.0, 0.0],
            diag: vec![1.0, 1.0, 1.0],
            upper: vec![1.0, 0.0, 0.0],
        };
        assert!(matches!(m.factor(), Err(1)));
        assert!(matches!(
            solve_tridiagonal(&m, &[1.0, 1.0, 1.0]),
            Err(Error::SingularSystem { row: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn dominant_systems_have_small_residual(
            rows in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -5.0f64..5.0), 1..40)
        ) {
            let n = rows.len();
            let lower: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let upper: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + lower[i].abs() + upper[i].abs()).collect();
            let m = Tridiagonal { lower, diag, upper };
            let rhs: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let x = solve_tridiagonal(&m, &rhs).unwrap();
            let mut y = vec![0.0; n];
            m.apply(&x, &mut y);
            for (a, b) in y.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let d = dense_solve(&m, &rhs);
            for (a, b) in x.iter().zip(&d) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let f = m.factor().unwrap();
            let mut p = rhs.clone();
            let mut q: Vec<f64> = rhs.iter().map(|v| -2.0 * v).collect();
            ThomasFactor::solve_pair_in_place(&f, &mut p, &f, &mut q);
            for ((a, b), c) in p.iter().zip(&q).zip(&x) {
                prop_assert_eq!(a, c);
                prop_assert!((b + 2.0 * c).abs() < 1e-12);
            }
        }
    }
}
