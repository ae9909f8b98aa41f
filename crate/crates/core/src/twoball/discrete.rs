//! Discretization of the two-ball quotient: functional values, gradients,
//! and Hessian blocks over the stacked node vector.
//!
//! Each ball carries a uniform grid of `m` cells on `[0, R]`; the boundary
//! node is pinned to 0 and the remaining `m` node values are unknowns. The
//! unknown vector `z` stacks the positive ball first, so `dof = 2m`.
//! Gradient energies use midpoint quadrature over cells (slopes live on
//! cells), mass-type integrals use trapezoid node weights.

use crate::params;
use crate::scalar::{lit, Real};
use crate::error::Result;

/// Geometry and quadrature weights of one ball's grid.
#[derive(Debug, Clone)]
pub(crate) struct BallGrid<T> {
    pub m: usize,
    pub h: T,
    /// `ω_{n-1} ρ̄_i^{n-1} h` at cell midpoints, `i = 0..m-1`.
    pub seg_w: Vec<T>,
    /// Trapezoid node weights `ω_{n-1} h ρ_j^{n-1} τ_j`, `τ = 1/2` at the
    /// ends, `j = 0..m`.
    pub node_w: Vec<T>,
}

impl<T: Real> BallGrid<T> {
    pub fn new(n: u32, radius: T, m: usize) -> Result<Self> {
        let omega = params::geometry::<T>(n)?.unit_sphere_area;
        let h = radius / T::of_usize(m);
        let half = lit::<T>(0.5);
        let nm1 = n as i32 - 1;
        let seg_w = (0..m)
            .map(|i| {
                let mid = (T::of_usize(i) + half) * h;
                omega * mid.powi(nm1) * h
            })
            .collect();
        let node_w = (0..=m)
            .map(|j| {
                let rho = T::of_usize(j) * h;
                let tau = if j == 0 || j == m { half } else { T::one() };
                omega * h * rho.powi(nm1) * tau
            })
            .collect();
        Ok(Self { m, h, seg_w, node_w })
    }
}

/// Values of the three integral functionals at a point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Funcs<T> {
    /// Gradient energy `I_+ + I_-`.
    pub i: T,
    /// Mass `J_+ + J_-`.
    pub j: T,
    pub m_plus: T,
    pub m_minus: T,
}

impl<T: Real> Funcs<T> {
    /// Relative moment gap, invariant under rescaling of `z`.
    pub fn gap_rel(&self) -> T {
        (self.m_plus - self.m_minus) / (self.m_plus + self.m_minus)
    }

    /// `ln(I^{1/p} / J^{1/q})`.
    pub fn ln_quotient(&self, p: T, q: T) -> T {
        self.i.ln() / p - self.j.ln() / q
    }
}

/// The fixed data of one discretized two-ball problem.
#[derive(Debug, Clone)]
pub(crate) struct Problem<T> {
    pub p: T,
    pub q: T,
    pub r: T,
    /// Squared slope regularization (0 for p >= 2).
    pub eps2: T,
    pub plus: BallGrid<T>,
    pub minus: BallGrid<T>,
}

/// `u^e` at nonnegative `u`, with `0^0 = 1` so first derivatives stay exact
/// when an exponent degenerates to zero (e.g. `u^{r-2}` at `r = 2`), and
/// `0^e = 0` for negative exponents: the singular curvature of a node on the
/// bound is owned by the active set, not by the matrix.
fn dpow<T: Real>(u: T, e: T) -> T {
    if u > T::zero() {
        u.powf(e)
    } else if e == T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

impl<T: Real> Problem<T> {
    pub fn dof(&self) -> usize {
        self.plus.m + self.minus.m
    }

    fn phi(&self, s: T) -> T {
        if self.eps2 == T::zero() {
            s.abs().powf(self.p)
        } else {
            (s * s + self.eps2).powf(self.p * lit::<T>(0.5))
        }
    }

    fn dphi(&self, s: T) -> T {
        let p = self.p;
        if self.eps2 == T::zero() {
            if s == T::zero() {
                T::zero()
            } else {
                p * s.abs().powf(p - lit::<T>(2.0)) * s
            }
        } else {
            p * s * (s * s + self.eps2).powf(p * lit::<T>(0.5) - T::one())
        }
    }

    fn d2phi(&self, s: T) -> T {
        let p = self.p;
        let one = T::one();
        if self.eps2 == T::zero() {
            p * (p - one) * s.abs().powf(p - lit::<T>(2.0))
        } else {
            let w = s * s + self.eps2;
            p * w.powf(p * lit::<T>(0.5) - lit::<T>(2.0)) * ((p - one) * s * s + self.eps2)
        }
    }

    /// Split the stacked vector into per-ball slices.
    pub fn split<'a>(&self, z: &'a [T]) -> (&'a [T], &'a [T]) {
        z.split_at(self.plus.m)
    }

    pub fn funcs(&self, z: &[T]) -> Funcs<T> {
        let (zp, zm) = self.split(z);
        let (ip, jp, mp) = self.ball_funcs(&self.plus, zp);
        let (im, jm, mm) = self.ball_funcs(&self.minus, zm);
        Funcs { i: ip + im, j: jp + jm, m_plus: mp, m_minus: mm }
    }

    fn ball_funcs(&self, grid: &BallGrid<T>, u: &[T]) -> (T, T, T) {
        let m = grid.m;
        let rm1 = self.r - T::one();
        let mut i_acc = T::zero();
        let mut j_acc = T::zero();
        let mut m_acc = T::zero();
        for k in 0..m {
            let next = if k + 1 < m { u[k + 1] } else { T::zero() };
            let s = (next - u[k]) / grid.h;
            i_acc += grid.seg_w[k] * self.phi(s);
            j_acc += grid.node_w[k] * dpow(u[k], self.q);
            m_acc += grid.node_w[k] * dpow(u[k], rm1);
        }
        (i_acc, j_acc, m_acc)
    }

    /// Gradients of I, J, and the raw gap `g = M_+ - M_-` (the gap gradient
    /// already carries the minus-ball sign).
    pub fn gradients(&self, z: &[T]) -> (Vec<T>, Vec<T>, Vec<T>) {
        let dof = self.dof();
        let mut gi = vec![T::zero(); dof];
        let mut gj = vec![T::zero(); dof];
        let mut gg = vec![T::zero(); dof];
        let (zp, zm) = self.split(z);
        self.ball_gradients(&self.plus, zp, T::one(), &mut gi[..self.plus.m], &mut gj[..self.plus.m], &mut gg[..self.plus.m]);
        self.ball_gradients(
            &self.minus,
            zm,
            -T::one(),
            &mut gi[self.plus.m..],
            &mut gj[self.plus.m..],
            &mut gg[self.plus.m..],
        );
        (gi, gj, gg)
    }

    fn ball_gradients(
        &self,
        grid: &BallGrid<T>,
        u: &[T],
        gap_sign: T,
        gi: &mut [T],
        gj: &mut [T],
        gg: &mut [T],
    ) {
        let m = grid.m;
        let one = T::one();
        let rm1 = self.r - one;
        for k in 0..m {
            let next = if k + 1 < m { u[k + 1] } else { T::zero() };
            let s = (next - u[k]) / grid.h;
            // seg k couples nodes k and k+1 through s = (u_{k+1} - u_k)/h.
            let d = grid.seg_w[k] * self.dphi(s) / grid.h;
            gi[k] -= d;
            if k + 1 < m {
                gi[k + 1] += d;
            }
            gj[k] += self.q * grid.node_w[k] * dpow(u[k], self.q - one);
            gg[k] += gap_sign * rm1 * grid.node_w[k] * dpow(u[k], self.r - lit::<T>(2.0));
        }
    }

    /// Tridiagonal part of the KKT Jacobian over the full dof vector:
    /// `ci·H_I + cj·H_J + cg·H_gap + sigma·Id`. The two ball blocks never
    /// couple, so the seam off-diagonal entries stay zero. Returns
    /// `(sub, diag, sup)` with `sub[k]` coupling rows `k` and `k-1`.
    pub fn tridiagonal(
        &self,
        z: &[T],
        ci: T,
        cj: T,
        cg: T,
        sigma: T,
    ) -> (Vec<T>, Vec<T>, Vec<T>) {
        let dof = self.dof();
        let mut sub = vec![T::zero(); dof];
        let mut diag = vec![sigma; dof];
        let mut sup = vec![T::zero(); dof];
        let (zp, zm) = self.split(z);
        self.ball_tridiagonal(&self.plus, zp, ci, cj, cg, 0, &mut sub, &mut diag, &mut sup);
        self.ball_tridiagonal(
            &self.minus,
            zm,
            ci,
            cj,
            -cg,
            self.plus.m,
            &mut sub,
            &mut diag,
            &mut sup,
        );
        (sub, diag, sup)
    }

    #[allow(clippy::too_many_arguments)]
    fn ball_tridiagonal(
        &self,
        grid: &BallGrid<T>,
        u: &[T],
        ci: T,
        cj: T,
        cg: T,
        offset: usize,
        sub: &mut [T],
        diag: &mut [T],
        sup: &mut [T],
    ) {
        let m = grid.m;
        let one = T::one();
        let two = lit::<T>(2.0);
        let rm1 = self.r - one;
        for k in 0..m {
            let next = if k + 1 < m { u[k + 1] } else { T::zero() };
            let s = (next - u[k]) / grid.h;
            let c = grid.seg_w[k] * self.d2phi(s) / (grid.h * grid.h);
            diag[offset + k] += ci * c;
            if k + 1 < m {
                diag[offset + k + 1] += ci * c;
                sup[offset + k] -= ci * c;
                sub[offset + k + 1] -= ci * c;
            }
            diag[offset + k] += cj * self.q * (self.q - one) * grid.node_w[k] * dpow(u[k], self.q - two);
            diag[offset + k] += cg * rm1 * (self.r - two) * grid.node_w[k] * dpow(u[k], self.r - lit::<T>(3.0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_problem() -> Problem<f64> {
        Problem {
            p: 2.0,
            q: 3.0,
            r: 3.0,
            eps2: 0.0,
            plus: BallGrid::new(2, 1.0, 8).unwrap(),
            minus: BallGrid::new(2, 0.8, 8).unwrap(),
        }
    }

    fn bump(m: usize, amp: f64) -> Vec<f64> {
        (0..m).map(|k| amp * (1.0 - (k as f64 / m as f64).powi(2))).collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let prob = toy_problem();
        let mut z = bump(8, 1.0);
        z.extend(bump(8, 0.7));
        let (gi, gj, gg) = prob.gradients(&z);
        let f0 = prob.funcs(&z);
        let h = 1e-6;
        for k in 0..z.len() {
            let mut zp = z.clone();
            zp[k] += h;
            let mut zm = z.clone();
            zm[k] -= h;
            let fp = prob.funcs(&zp);
            let fm = prob.funcs(&zm);
            let di = (fp.i - fm.i) / (2.0 * h);
            let dj = (fp.j - fm.j) / (2.0 * h);
            let dg = ((fp.m_plus - fp.m_minus) - (fm.m_plus - fm.m_minus)) / (2.0 * h);
            assert!((gi[k] - di).abs() <= 1e-6 * (1.0 + di.abs()), "gi[{k}]: {} vs {di}", gi[k]);
            assert!((gj[k] - dj).abs() <= 1e-6 * (1.0 + dj.abs()), "gj[{k}]: {} vs {dj}", gj[k]);
            assert!((gg[k] - dg).abs() <= 1e-6 * (1.0 + dg.abs()), "gg[{k}]: {} vs {dg}", gg[k]);
        }
        assert!(f0.i > 0.0 && f0.j > 0.0);
    }

    #[test]
    fn tridiagonal_matches_gradient_differences() {
        // Directional check: Tri(z) * e_k ~ d(grad)(z)/dz_k for the
        // separable combination ci*I + cj*J + cg*gap.
        let prob = toy_problem();
        let mut z = bump(8, 1.2);
        z.extend(bump(8, 0.9));
        let (ci, cj, cg) = (0.7, -0.3, 0.2);
        let (sub, diag, sup) = prob.tridiagonal(&z, ci, cj, cg, 0.0);
        let h = 1e-6;
        let combo = |z: &[f64]| -> Vec<f64> {
            let (gi, gj, gg) = prob.gradients(z);
            gi.iter()
                .zip(&gj)
                .zip(&gg)
                .map(|((a, b), c)| ci * a + cj * b + cg * c)
                .collect()
        };
        for k in 0..z.len() {
            let mut zp = z.clone();
            zp[k] += h;
            let mut zm = z.clone();
            zm[k] -= h;
            let dp = combo(&zp);
            let dm = combo(&zm);
            for row in 0..z.len() {
                let fd = (dp[row] - dm[row]) / (2.0 * h);
                let analytic = if row == k {
                    diag[row]
                } else if row + 1 == k {
                    sup[row]
                } else if row == k + 1 {
                    sub[row]
                } else {
                    0.0
                };
                assert!(
                    (fd - analytic).abs() <= 1e-5 * (1.0 + fd.abs()),
                    "H[{row},{k}]: fd {fd} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn node_weights_integrate_the_ball_volume() {
        // Sum of node weights = omega * R^n / n = n-volume of the ball.
        let grid = BallGrid::<f64>::new(3, 2.0, 400).unwrap();
        let total: f64 = grid.node_w.iter().sum();
        let want = 4.0 / 3.0 * std::f64::consts::PI * 8.0;
        assert!((total - want).abs() <= 1e-4 * want, "{total} vs {want}");
        let seg_total: f64 = grid.seg_w.iter().sum();
        assert!((seg_total - want).abs() <= 1e-4 * want);
    }
}
