//! The reduced functional of the dilation family.
//!
//! Restricting the two-ball problem to pairs of dilated ground states turns
//! it into a scalar problem: with `y in (-1, 1)` the signed volume split
//! (`y = 0` is the equal pair), the quotient is proportional to `F(y)^{1/p}`
//! where
//!
//! ```text
//! F(y) = [(1+y)^a + (1-y)^a] / [(1+y)^b + (1-y)^b]^{p/q}
//! a = 1 - p/n - p/(r-1),   b = 1 - q/(r-1)
//! ```
//!
//! `F` is even, equals `2^{1-p/q}` at `y = 0`, blows up as `|y| -> 1` (the
//! numerator exponent `a` is negative for admissible exponents), and has
//! Taylor curvature `F''(0) = 2^{1-p/q} gamma` with `gamma` from
//! [`crate::params::gamma_coeff`]. Minimizing `F` decides symmetry within
//! the restricted family.

use crate::error::{CoreError, Result};
use crate::opt::{bisect_transition, golden_section_min};
use crate::params::{self, ProblemParams};
use crate::scalar::{lit, Real};

/// Default bracket tolerance for [`minimize_reduced_f`].
pub const DEFAULT_MIN_TOL: f64 = 1e-10;

/// Asymmetry is declared when the minimizing `y` exceeds this.
pub const ASYMMETRY_DECLARED: f64 = 1e-6;

/// Scan density of the global grid stage before golden-section refinement.
const SCAN_POINTS: usize = 1024;

/// One tabulated point of the reduced curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCurvePoint<T> {
    pub y: T,
    pub f: T,
}

/// Result of minimizing the reduced functional over `y in [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMinimum<T> {
    /// Minimizing asymmetry coordinate (the even reflection `-y_star` ties).
    pub y_star: T,
    /// Functional value at the minimizer.
    pub f_star: T,
    /// True when `y_star < 10 * tol`, i.e. the minimum sits at the symmetric
    /// point to within bracket resolution.
    pub is_symmetric: bool,
}

/// Threshold location within the restricted family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedThreshold<T> {
    /// First quotient exponent at which the family minimizer turns
    /// asymmetric, to within the bisection tolerance.
    pub q_critical: T,
    /// Closed-form curvature threshold for the same `(p, r, n)`.
    pub q_hat: T,
    /// True when the observed transition sits below `q_hat` by more than
    /// twice the bisection tolerance (a first-order, not curvature-driven,
    /// transition).
    pub subcritical: bool,
}

fn shape_exponents<T: Real>(params: &ProblemParams<T>) -> (T, T) {
    let rm1 = params.r - T::one();
    let a = T::one() - params.p / params.nf() - params.p / rm1;
    let b = T::one() - params.q / rm1;
    (a, b)
}

/// `log(exp(a) + exp(b))` without overflow.
fn log_sum_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Evaluate the reduced functional at asymmetry coordinate `y`, `|y| < 1`.
///
/// Powers of `1 ± y` are evaluated as `exp(e * ln_1p(±y))` and combined in
/// log space, which stays accurate near the endpoints and cannot produce
/// NaN from an inf/inf ratio; a genuinely enormous value overflows to `+inf`.
pub fn reduced_f<T: Real>(y: T, params: &ProblemParams<T>) -> Result<T> {
    if !(y.abs() < T::one()) {
        return Err(CoreError::InvalidArgument(format!(
            "asymmetry coordinate must satisfy |y| < 1, got y = {y}"
        )));
    }
    let (a, b) = shape_exponents(params);
    let lp = y.ln_1p();
    let lm = (-y).ln_1p();
    let ln_num = log_sum_exp(a * lp, a * lm);
    let ln_den = log_sum_exp(b * lp, b * lm);
    Ok((ln_num - (params.p / params.q) * ln_den).exp())
}

/// Tabulate the reduced curve at the given coordinates.
pub fn curve<T: Real>(params: &ProblemParams<T>, ys: &[T]) -> Result<Vec<ReducedCurvePoint<T>>> {
    ys.iter()
        .map(|&y| Ok(ReducedCurvePoint { y, f: reduced_f(y, params)? }))
        .collect()
}

/// Closed-form second derivative of `F` at the symmetric point:
/// `F''(0) = 2^{1-p/q} * gamma`.
pub fn second_derivative_at_zero<T: Real>(params: &ProblemParams<T>) -> T {
    let exponent = T::one() - params.p / params.q;
    lit::<T>(2.0).powf(exponent) * params::gamma_coeff(params)
}

/// Minimize `F` over `y in [0, 1)` (evenness makes the negative half
/// redundant): a global grid scan of [`SCAN_POINTS`] points followed by
/// golden-section refinement of the bracketing cell pair down to `tol`.
pub fn minimize_reduced_f<T: Real>(params: &ProblemParams<T>, tol: T) -> Result<ReducedMinimum<T>> {
    if !(tol > T::zero()) {
        return Err(CoreError::InvalidArgument(format!(
            "minimize_reduced_f needs tol > 0, got {tol}"
        )));
    }
    let margin = lit::<T>(1e-12).max(T::epsilon() * lit::<T>(16.0));
    let y_max = T::one() - margin;

    let mut best_j = 0usize;
    let mut best_f = T::infinity();
    for j in 0..=SCAN_POINTS {
        let y = y_max * T::of_usize(j) / T::of_usize(SCAN_POINTS);
        let f = reduced_f(y, params)?;
        if f.is_nan() {
            return Err(CoreError::NonFinite(format!("reduced functional at y = {y}")));
        }
        if f < best_f {
            best_f = f;
            best_j = j;
        }
    }
    let cell = y_max / T::of_usize(SCAN_POINTS);
    let lo = cell * T::of_usize(best_j.saturating_sub(1));
    let hi = (cell * T::of_usize(best_j + 1)).min(y_max);
    let (y_star, f_star) = golden_section_min(
        |y| reduced_f(y, params).unwrap_or(T::infinity()),
        lo,
        hi,
        tol,
    )?;
    Ok(ReducedMinimum {
        y_star,
        f_star,
        is_symmetric: y_star < lit::<T>(10.0) * tol,
    })
}

/// Locate the first `q` in `(q_lo, q_hi)` at which the restricted-family
/// minimizer turns asymmetric (`y_star >` [`ASYMMETRY_DECLARED`]), by
/// bisection to `tol_q`.
///
/// Both bracket endpoints must be admissible and must disagree on the
/// indicator, otherwise an error is returned.
pub fn restricted_threshold<T: Real>(
    n: u32,
    p: T,
    r: T,
    q_bracket: (T, T),
    tol_q: T,
) -> Result<RestrictedThreshold<T>> {
    let (q_lo, q_hi) = q_bracket;
    // Surface parameter problems before bisection starts.
    ProblemParams::new(n, p, q_lo, r)?;
    ProblemParams::new(n, p, q_hi, r)?;
    let declared = lit::<T>(ASYMMETRY_DECLARED);
    let min_tol = lit::<T>(DEFAULT_MIN_TOL);
    let indicator = |q: T| -> Result<bool> {
        let params = ProblemParams::new(n, p, q, r)?;
        Ok(minimize_reduced_f(&params, min_tol)?.y_star > declared)
    };
    let q_critical = bisect_transition(indicator, q_lo, q_hi, tol_q)?;
    let q_hat = params::q_hat(p, r, n)?;
    Ok(RestrictedThreshold {
        q_critical,
        q_hat,
        subcritical: q_critical < q_hat - lit::<T>(2.0) * tol_q,
    })
}

/// One entry of a reduced-family sweep.
#[derive(Debug, Clone)]
pub struct ReducedSweepPoint<T> {
    pub q: T,
    pub outcome: Result<ReducedMinimum<T>>,
}

/// Minimize the reduced functional for each `q` in `q_values`.
///
/// Per-point failures (e.g. an inadmissible `q`) are recorded in the output
/// and never abort the remaining points.
pub fn sweep_reduced<T: Real>(n: u32, p: T, r: T, q_values: &[T]) -> Vec<ReducedSweepPoint<T>> {
    q_values
        .iter()
        .map(|&q| {
            let outcome = ProblemParams::new(n, p, q, r)
                .and_then(|params| minimize_reduced_f(&params, lit::<T>(DEFAULT_MIN_TOL)));
            ReducedSweepPoint { q, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p64(n: u32, p: f64, q: f64, r: f64) -> ProblemParams<f64> {
        ProblemParams::new(n, p, q, r).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    /// Rejection-sample a random admissible tuple with moderate exponents.
    fn random_params(rng: &mut ChaCha8Rng) -> ProblemParams<f64> {
        loop {
            let n = rng.gen_range(1..=5u32);
            let p = rng.gen_range(1.1..6.0);
            let q = rng.gen_range(1.1..8.0);
            let r = 1.0 + rng.gen_range(0.2..5.0);
            if let Ok(params) = ProblemParams::new(n, p, q, r) {
                return params;
            }
        }
    }

    #[test]
    fn symmetric_point_value() {
        for params in [p64(2, 2.0, 3.0, 2.0), p64(1, 2.0, 6.0, 2.0), p64(3, 2.5, 4.0, 3.0)] {
            let f0 = reduced_f(0.0, &params).unwrap();
            let want = 2f64.powf(1.0 - params.p / params.q);
            assert!(close(f0, want, 1e-15), "F(0) = {f0}, want {want}");
        }
    }

    #[test]
    fn hand_value_collapses_to_rational_function() {
        // (n=2, p=2, r=3, q=2): a = -1, b = 0, so F(y) = 1/(1 - y^2).
        let params = p64(2, 2.0, 2.0, 3.0);
        for &y in &[0.0, 0.25, 0.5, -0.5, 0.9] {
            let want = 1.0 / (1.0 - y * y);
            let got = reduced_f(y, &params).unwrap();
            assert!(close(got, want, 1e-14), "F({y}) = {got}, want {want}");
        }
        assert!(close(reduced_f(0.5, &params).unwrap(), 4.0 / 3.0, 1e-15));
    }

    #[test]
    fn rejects_coordinates_outside_open_interval() {
        let params = p64(2, 2.0, 2.0, 3.0);
        assert!(reduced_f(1.0, &params).is_err());
        assert!(reduced_f(-1.0, &params).is_err());
        assert!(reduced_f(1.5, &params).is_err());
    }

    #[test]
    fn even_in_y_over_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let params = random_params(&mut rng);
            let y: f64 = rng.gen_range(-0.999..0.999);
            let fp = reduced_f(y, &params).unwrap();
            let fm = reduced_f(-y, &params).unwrap();
            if fp.is_finite() && fm.is_finite() {
                assert!(
                    (fp - fm).abs() <= 1e-12 * fp.abs().max(1.0),
                    "asymmetry at y = {y} for {params:?}: {fp} vs {fm}"
                );
            }
        }
    }

    #[test]
    fn blows_up_toward_the_endpoints() {
        let params = p64(2, 2.0, 2.0, 3.0);
        let near = reduced_f(1.0 - 1e-9, &params).unwrap();
        assert!(near > 1e8, "F near 1 should be enormous, got {near}");
        assert!(reduced_f(1.0 - 1e-6, &params).unwrap() < near);
    }

    #[test]
    fn second_derivative_hand_values() {
        // (n=1, p=2, r=2): gamma = 12 - 2(q-1); threshold at q = 7.
        assert!(second_derivative_at_zero(&p64(1, 2.0, 7.0, 2.0)).abs() <= 1e-13);
        let at6 = second_derivative_at_zero(&p64(1, 2.0, 6.0, 2.0));
        assert!(close(at6, 2f64.powf(5.0 / 3.0), 1e-14), "got {at6}");
        let at8 = second_derivative_at_zero(&p64(1, 2.0, 8.0, 2.0));
        assert!(close(at8, -2.0 * 2f64.powf(0.75), 1e-14), "got {at8}");
    }

    /// Central second difference with Richardson extrapolation in h.
    fn fd_second_derivative(params: &ProblemParams<f64>) -> f64 {
        let d2 = |h: f64| {
            (reduced_f(h, params).unwrap() - 2.0 * reduced_f(0.0, params).unwrap()
                + reduced_f(-h, params).unwrap())
                / (h * h)
        };
        (100.0 * d2(1e-4) - d2(1e-3)) / 99.0
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let cases = [
            p64(1, 2.0, 6.0, 2.0),
            p64(2, 2.0, 2.0, 3.0),
            p64(3, 2.5, 3.0, 2.2),
            p64(1, 3.0, 9.0, 2.0),
        ];
        for params in cases {
            let closed = second_derivative_at_zero(&params);
            let fd = fd_second_derivative(&params);
            assert!(
                (closed - fd).abs() <= 1e-6 * closed.abs().max(1.0),
                "{params:?}: closed {closed} vs fd {fd}"
            );
        }
    }

    #[test]
    fn convex_at_matched_exponent() {
        // q = r - 1 keeps the pair equal; F should be convex through y = 0.
        let params = p64(2, 2.0, 2.0, 3.0);
        let m = 200;
        let ys: Vec<f64> = (0..=m).map(|j| -0.99 + 1.98 * j as f64 / m as f64).collect();
        let f: Vec<f64> = ys.iter().map(|&y| reduced_f(y, &params).unwrap()).collect();
        for i in 1..m {
            let second = f[i + 1] - 2.0 * f[i] + f[i - 1];
            assert!(second > 0.0, "second difference at y = {} is {second}", ys[i]);
        }
    }

    #[test]
    fn minimize_symmetric_case() {
        let params = p64(2, 2.0, 2.0, 3.0);
        let min = minimize_reduced_f(&params, 1e-10).unwrap();
        assert!(min.is_symmetric);
        assert!(min.y_star < 1e-9, "y_star = {}", min.y_star);
        assert!(close(min.f_star, 1.0, 1e-12));
    }

    #[test]
    fn minimize_just_below_threshold_stays_symmetric() {
        // q = 6.9 < q_hat = 7 at (n=1, p=2, r=2): curvature positive and the
        // global scan finds nothing better than the symmetric point.
        let params = p64(1, 2.0, 6.9, 2.0);
        let min = minimize_reduced_f(&params, 1e-10).unwrap();
        assert!(min.y_star < 1e-6, "y_star = {}", min.y_star);
    }

    #[test]
    fn minimize_past_threshold_matches_grid_oracle() {
        // q = 8 > q_hat = 7: the minimum moves off center. Oracle: dense
        // grid enumeration, independent of the scan+golden-section path.
        let params = p64(1, 2.0, 8.0, 2.0);
        let min = minimize_reduced_f(&params, 1e-10).unwrap();
        assert!(!min.is_symmetric);
        assert!(min.y_star > 1e-3);

        let n_grid = 200_000;
        let mut best = (0.0f64, f64::INFINITY);
        for j in 0..=n_grid {
            let y = 0.9999 * j as f64 / n_grid as f64;
            let f = reduced_f(y, &params).unwrap();
            if f < best.1 {
                best = (y, f);
            }
        }
        assert!(
            (min.y_star - best.0).abs() <= 1e-5,
            "minimizer {} vs oracle {}",
            min.y_star,
            best.0
        );
        assert!(min.f_star <= best.1 + 1e-12);
    }

    #[test]
    fn threshold_in_one_dimension_sits_at_q_hat() {
        let th = restricted_threshold::<f64>(1, 2.0, 2.0, (5.0, 9.0), 1e-3).unwrap();
        assert!(
            (th.q_critical - 7.0).abs() <= 2e-3,
            "restricted threshold {} should sit at q_hat = 7",
            th.q_critical
        );
        assert!(close(th.q_hat, 7.0, 1e-14));
        assert!(!th.subcritical);
    }

    #[test]
    fn threshold_rejects_degenerate_bracket() {
        // Both ends below the transition: indicator never flips.
        let err = restricted_threshold(1, 2.0, 2.0, (5.0, 6.0), 1e-3).unwrap_err();
        assert!(matches!(err, CoreError::NonStraddlingBracket { .. }));
    }

    #[test]
    fn sweep_records_per_point_failures() {
        let points = sweep_reduced(2, 2.0, 3.0, &[2.0, 0.5, 4.0]);
        assert_eq!(points.len(), 3);
        assert!(points[0].outcome.is_ok());
        assert!(points[1].outcome.is_err());
        assert!(points[2].outcome.is_ok());
        let first = points[0].outcome.as_ref().unwrap();
        assert!(first.is_symmetric);
    }

    #[test]
    fn sweep_of_empty_grid_is_empty() {
        assert!(sweep_reduced(2, 2.0, 3.0, &[]).is_empty());
    }
}
