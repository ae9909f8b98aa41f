//! Exponent bookkeeping for the twisted eigenvalue problem.
//!
//! A problem instance is the tuple `(n, p, q, r)`: space dimension `n`,
//! gradient exponent `p`, quotient exponent `q`, and moment exponent `r`.
//! The standing hypotheses are `1 < p < ∞`, `1 < q < p*`, and
//! `0 < r - 1 < p*`, where `p*` is the critical Sobolev exponent.

use crate::error::{CoreError, Result};
use crate::scalar::{lit, Real};

/// Critical Sobolev exponent `p*` defined by `1/p* = max{1/p - 1/n, 0}`.
///
/// For `p >= n` this returns `+∞` (the IEEE infinity, so comparisons such as
/// `q < p_star` are exact); no finite stand-in is ever used.
///
/// Errors when `p < 1` or `n < 1`.
pub fn critical_exponent<T: Real>(p: T, n: u32) -> Result<T> {
    if !(p >= T::one()) {
        return Err(CoreError::InvalidArgument(format!(
            "critical exponent needs p >= 1, got p = {p}"
        )));
    }
    if n < 1 {
        return Err(CoreError::InvalidArgument(
            "critical exponent needs n >= 1".into(),
        ));
    }
    let nt = T::of(f64::from(n));
    if p >= nt {
        return Ok(T::infinity());
    }
    Ok(nt * p / (nt - p))
}

/// Outcome of admissibility validation: every violated hypothesis, spelled out.
#[derive(Debug, Clone)]
pub struct AdmissibilityVerdict {
    pub violations: Vec<String>,
}

impl AdmissibilityVerdict {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the standing hypotheses for a raw exponent tuple.
///
/// Collects all violations rather than stopping at the first.
pub fn validate<T: Real>(n: u32, p: T, q: T, r: T) -> AdmissibilityVerdict {
    let mut violations = Vec::new();
    if n < 1 {
        violations.push(format!("dimension must satisfy n >= 1, got n = {n}"));
    }
    for (name, v) in [("p", p), ("q", q), ("r", r)] {
        if !v.is_finite() {
            violations.push(format!("{name} must be finite, got {v}"));
        }
    }
    if !(p > T::one() && p.is_finite()) {
        violations.push(format!("gradient exponent must satisfy 1 < p < inf, got p = {p}"));
    }
    if !(q > T::one()) {
        violations.push(format!("quotient exponent must satisfy q > 1, got q = {q}"));
    }
    if !(r > T::one()) {
        violations.push(format!("moment exponent must satisfy r - 1 > 0, got r = {r}"));
    }
    if violations.is_empty() {
        let p_star = critical_exponent(p, n).expect("p, n already checked");
        if !(q < p_star) {
            violations.push(format!(
                "quotient exponent must satisfy q < p* = {p_star}, got q = {q}"
            ));
        }
        if !(r - T::one() < p_star) {
            violations.push(format!(
                "moment exponent must satisfy r - 1 < p* = {p_star}, got r - 1 = {}",
                r - T::one()
            ));
        }
    }
    AdmissibilityVerdict { violations }
}

/// Validated exponent tuple for one problem instance.
///
/// Construction goes through [`ProblemParams::new`], which enforces the
/// standing hypotheses; `p_star` is cached at construction (`+∞` for
/// `p >= n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams<T> {
    pub n: u32,
    pub p: T,
    pub q: T,
    pub r: T,
    pub p_star: T,
}

impl<T: Real> ProblemParams<T> {
    /// Validate and build. Errors list every violated hypothesis.
    pub fn new(n: u32, p: T, q: T, r: T) -> Result<Self> {
        let verdict = validate(n, p, q, r);
        if !verdict.is_admissible() {
            return Err(CoreError::Inadmissible(verdict.violations));
        }
        let p_star = critical_exponent(p, n)?;
        Ok(Self { n, p, q, r, p_star })
    }

    /// Same instance with a different quotient exponent (revalidated).
    pub fn with_q(&self, q: T) -> Result<Self> {
        Self::new(self.n, self.p, q, self.r)
    }

    /// Dimension as a scalar.
    pub fn nf(&self) -> T {
        T::of(f64::from(self.n))
    }
}

/// Curvature coefficient of the reduced functional at the symmetric point:
///
/// `gamma = s(s - 1) - (p/(r-1)) (q/(r-1) - 1)` with `s = p/n + p/(r-1)`.
///
/// Positive `gamma` means the equal-ball configuration is a local minimum of
/// the reduced functional; `gamma` vanishes exactly at `q = q_hat`.
pub fn gamma_coeff<T: Real>(params: &ProblemParams<T>) -> T {
    let rm1 = params.r - T::one();
    let s = params.p / params.nf() + params.p / rm1;
    s * (s - T::one()) - (params.p / rm1) * (params.q / rm1 - T::one())
}

/// Threshold exponent `q_hat = ((r-1)/n + 1)^2 p - (r-1)^2 / n`.
///
/// For `q > q_hat` the reduced functional has `gamma < 0`, so the optimal
/// pair of balls is strictly unequal. In dimension one this simplifies to
/// `q_hat = r^2 p - (r-1)^2`.
pub fn q_hat<T: Real>(p: T, r: T, n: u32) -> Result<T> {
    if !(p > T::one() && p.is_finite()) || !(r > T::one() && r.is_finite()) || n < 1 {
        return Err(CoreError::InvalidArgument(format!(
            "threshold exponent needs p > 1, r > 1, n >= 1; got p = {p}, r = {r}, n = {n}"
        )));
    }
    let nt = T::of(f64::from(n));
    let rm1 = r - T::one();
    let ratio = rm1 / nt + T::one();
    Ok(ratio * ratio * p - rm1 * rm1 / nt)
}

/// Unit-ball volume and unit-sphere area in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConstants<T> {
    pub n: u32,
    /// `|B_1| = pi^(n/2) / Gamma(n/2 + 1)`; equals 2 for `n = 1`.
    pub unit_ball_volume: T,
    /// `omega_{n-1} = 2 pi^(n/2) / Gamma(n/2)`; equals 2 for `n = 1`
    /// (the two endpoints of an interval).
    pub unit_sphere_area: T,
}

/// Gamma function at half-integer arguments: `Gamma(k/2)` for `k >= 1`.
///
/// Computed by the exact recursion `Gamma(x+1) = x Gamma(x)` from
/// `Gamma(1/2) = sqrt(pi)` and `Gamma(1) = 1`, so half-integer values carry
/// only rounding error.
pub fn gamma_half_integer<T: Real>(k: u32) -> Result<T> {
    if k < 1 {
        return Err(CoreError::InvalidArgument(
            "gamma_half_integer needs k >= 1".into(),
        ));
    }
    let mut value = if k % 2 == 1 { T::PI().sqrt() } else { T::one() };
    let mut arg = if k % 2 == 1 { 1u32 } else { 2u32 };
    while arg < k {
        value = value * (T::of(f64::from(arg)) / lit::<T>(2.0));
        arg += 2;
    }
    Ok(value)
}

/// Geometry constants for dimension `n >= 1`.
pub fn geometry<T: Real>(n: u32) -> Result<GeometryConstants<T>> {
    if n < 1 {
        return Err(CoreError::InvalidArgument("geometry needs n >= 1".into()));
    }
    let half_pow = T::PI().powf(T::of(f64::from(n)) / lit::<T>(2.0));
    let volume = half_pow / gamma_half_integer::<T>(n + 2)?;
    let area = lit::<T>(2.0) * half_pow / gamma_half_integer::<T>(n)?;
    Ok(GeometryConstants {
        n,
        unit_ball_volume: volume,
        unit_sphere_area: area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn critical_exponent_subcritical_case() {
        // n = 3, p = 2: p* = np/(n-p) = 6.
        assert!(close(critical_exponent(2.0, 3).unwrap(), 6.0, 1e-15));
    }

    #[test]
    fn critical_exponent_infinite_for_p_at_least_n() {
        let ps: f64 = critical_exponent(2.0, 2).unwrap();
        assert!(ps.is_infinite() && ps > 0.0);
        // Comparisons against the infinite case must be exact.
        assert!(1e300 < ps);
        let ps1: f64 = critical_exponent(1.5, 1).unwrap();
        assert!(ps1.is_infinite());
    }

    #[test]
    fn critical_exponent_p_slightly_below_n() {
        // n = 2, p = 1.5: p* = 2*1.5/0.5 = 6.
        assert!(close(critical_exponent(1.5, 2).unwrap(), 6.0, 1e-14));
    }

    #[test]
    fn critical_exponent_rejects_bad_inputs() {
        assert!(critical_exponent(0.5, 2).is_err());
        assert!(critical_exponent(2.0, 0).is_err());
        assert!(critical_exponent(f64::NAN, 2).is_err());
    }

    #[test]
    fn validate_accepts_supercritical_q_when_p_star_infinite() {
        // n = 2, p = 2 gives p* = inf, so q = 10, r = 4 is fine.
        let v = validate(2, 2.0, 10.0, 4.0);
        assert!(v.is_admissible(), "violations: {:?}", v.violations);
    }

    #[test]
    fn validate_rejects_q_beyond_critical() {
        // n = 3, p = 2: p* = 6, so q = 7 violates q < p*.
        let v = validate(3, 2.0, 7.0, 3.0);
        assert_eq!(v.violations.len(), 1);
        assert!(v.violations[0].contains("q < p*"));
    }

    #[test]
    fn validate_collects_multiple_violations() {
        let v = validate(2, 1.0, 0.5, 1.0);
        assert_eq!(v.violations.len(), 3);
    }

    #[test]
    fn params_new_rejects_inadmissible() {
        assert!(ProblemParams::new(3, 2.0, 7.0, 3.0).is_err());
        assert!(ProblemParams::new(2, 2.0, 3.0, 2.0).is_ok());
    }

    #[test]
    fn gamma_coeff_matches_hand_values() {
        // (n=1, p=2, q=7, r=2): s = 4, s(s-1) = 12, second term 2*6 = 12.
        let a = ProblemParams::<f64>::new(1, 2.0, 7.0, 2.0).unwrap();
        assert!(gamma_coeff(&a).abs() <= 1e-14);
        // (n=1, p=2, q=6, r=2): 12 - 2*5 = 2.
        let b = ProblemParams::new(1, 2.0, 6.0, 2.0).unwrap();
        assert!(close(gamma_coeff(&b), 2.0, 1e-14));
        // (n=2, p=2, q=2, r=2): s = 3, 3*2 - 2*1 = 4. Confirmed against a
        // direct Taylor expansion of the reduced functional, which for these
        // exponents collapses to (1 + y^2)/(1 - y^2) = 1 + 2 y^2 + O(y^4),
        // i.e. F''(0) = 4 = 2^{1-p/q} * gamma.
        let c = ProblemParams::new(2, 2.0, 2.0, 2.0).unwrap();
        assert!(close(gamma_coeff(&c), 4.0, 1e-14));
    }

    #[test]
    fn gamma_coeff_vanishes_at_threshold() {
        for &(p, r, n) in &[(2.0f64, 2.0f64, 1u32), (2.0, 2.0, 2), (3.0, 2.5, 3), (1.5, 3.0, 2)] {
            let qh = q_hat(p, r, n).unwrap();
            let params = ProblemParams::new(n, p, qh, r);
            if let Ok(params) = params {
                assert!(
                    gamma_coeff(&params).abs() <= 1e-12,
                    "gamma at threshold for p={p}, r={r}, n={n}: {}",
                    gamma_coeff(&params)
                );
            }
        }
    }

    #[test]
    fn q_hat_matches_hand_values() {
        assert!(close(q_hat(2.0, 2.0, 1).unwrap(), 7.0, 1e-15));
        assert!(close(q_hat(2.0, 2.0, 2).unwrap(), 4.0, 1e-15));
        assert!(close(q_hat(2.0, 2.0, 3).unwrap(), 29.0 / 9.0, 1e-15));
    }

    #[test]
    fn q_hat_one_dimensional_form() {
        // n = 1: q_hat = r^2 p - (r-1)^2.
        for &(p, r) in &[(2.0f64, 2.0f64), (3.5, 1.7), (1.2, 4.0)] {
            let direct = q_hat(p, r, 1).unwrap();
            let simplified = r * r * p - (r - 1.0) * (r - 1.0);
            assert!(close(direct, simplified, 1e-14));
        }
    }

    #[test]
    fn q_hat_exceeds_right_hand_exponent_in_1d() {
        // q_hat - (2r-1)p = (r-1)^2 (p-1) > 0 for p > 1.
        for &(p, r) in &[(2.0f64, 2.0f64), (1.5, 3.0), (4.0, 1.3)] {
            let gap = q_hat(p, r, 1).unwrap() - (2.0 * r - 1.0) * p;
            let identity = (r - 1.0) * (r - 1.0) * (p - 1.0);
            assert!((gap - identity).abs() <= 1e-12, "gap {gap} vs {identity}");
            assert!(gap > 0.0);
        }
    }

    #[test]
    fn q_hat_increasing_in_r_up_to_critical() {
        // For p < n the threshold grows in r-1 on (0, p*] and meets p* there.
        let (p, n) = (2.0f64, 3u32);
        let p_star: f64 = critical_exponent(p, n).unwrap();
        let samples = 200;
        let mut prev = q_hat(p, 1.0 + p_star * 1e-3, n).unwrap();
        for k in 1..=samples {
            let rm1 = p_star * (1e-3 + (1.0 - 1e-3) * k as f64 / samples as f64);
            let qh = q_hat(p, 1.0 + rm1, n).unwrap();
            assert!(qh > prev, "not increasing at r-1 = {rm1}");
            prev = qh;
        }
        assert!(close(q_hat(p, 1.0 + p_star, n).unwrap(), p_star, 1e-12));
    }

    #[test]
    fn geometry_low_dimensions() {
        let g1: GeometryConstants<f64> = geometry(1).unwrap();
        assert!(close(g1.unit_ball_volume, 2.0, 1e-15));
        assert!(close(g1.unit_sphere_area, 2.0, 1e-15));
        let g2: GeometryConstants<f64> = geometry(2).unwrap();
        assert!(close(g2.unit_ball_volume, PI, 1e-15));
        assert!(close(g2.unit_sphere_area, 2.0 * PI, 1e-15));
        let g3: GeometryConstants<f64> = geometry(3).unwrap();
        assert!(close(g3.unit_ball_volume, 4.0 * PI / 3.0, 1e-15));
        assert!(close(g3.unit_sphere_area, 4.0 * PI, 1e-15));
    }

    #[test]
    fn geometry_area_is_n_times_volume() {
        for n in 1..=10u32 {
            let g: GeometryConstants<f64> = geometry(n).unwrap();
            assert!(
                close(g.unit_sphere_area, f64::from(n) * g.unit_ball_volume, 1e-14),
                "n = {n}"
            );
        }
    }

    #[test]
    fn gamma_half_integer_values_are_exact() {
        let cases: [(u32, f64); 6] = [
            (1, PI.sqrt()),              // Gamma(1/2)
            (2, 1.0),                    // Gamma(1)
            (3, PI.sqrt() / 2.0),        // Gamma(3/2)
            (4, 1.0),                    // Gamma(2)
            (5, 0.75 * PI.sqrt()),       // Gamma(5/2)
            (7, 15.0 / 8.0 * PI.sqrt()), // Gamma(7/2)
        ];
        for (k, want) in cases {
            let got: f64 = gamma_half_integer(k).unwrap();
            assert!(
                (got - want).abs() <= 1e-14 * want,
                "Gamma({k}/2): got {got}, want {want}"
            );
        }
    }
}
