//! Embedded Runge–Kutta integration for the two-component shooting system.
//!
//! A hand-rolled Dormand–Prince 5(4) pair with per-component error scales.
//! The state is always the pair `[v, w]` (profile value and flux), which
//! keeps the integrator monomorphic in shape while staying generic over the
//! scalar type.

use crate::error::{CoreError, Result};
use crate::scalar::{lit, Real};

pub type State<T> = [T; 2];

/// Adaptive step-size parameters.
#[derive(Debug, Clone, Copy)]
pub struct StepControl<T> {
    /// Relative tolerance applied to both components.
    pub rtol: T,
    /// Per-component absolute floors (the flux component wants a floor
    /// proportional to its final magnitude, not a universal constant).
    pub atol: [T; 2],
    /// First trial step.
    pub h_init: T,
    /// Accepted + rejected step budget before giving up.
    pub max_steps: usize,
}

/// Result of [`integrate_with_event`].
#[derive(Debug, Clone, Copy)]
pub enum Outcome<T> {
    /// Integrated to `t_end` without the event firing.
    Reached(State<T>),
    /// The event fired between two accepted steps; both bracketing states
    /// are returned for the caller to refine.
    Event {
        t_before: T,
        y_before: State<T>,
        t_after: T,
        y_after: State<T>,
    },
}

// Dormand–Prince 5(4) tableau. Rows are the stage couplings for k2..k7;
// the seventh stage doubles as the fifth-order solution (FSAL form, unused
// here for simplicity). E is the difference between the fifth- and
// fourth-order weights.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One trial step: returns the fifth-order solution and the embedded error
/// estimate.
fn dp54_step<T: Real>(
    f: &impl Fn(T, State<T>) -> State<T>,
    t: T,
    y: State<T>,
    h: T,
) -> (State<T>, State<T>) {
    let mut k = [[T::zero(); 2]; 7];
    k[0] = f(t, y);
    for stage in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            let a = lit::<T>(A[stage][j]);
            ys[0] += h * a * kj[0];
            ys[1] += h * a * kj[1];
        }
        k[stage + 1] = f(t + lit::<T>(C[stage]) * h, ys);
    }
    // The last stage row of A is also the fifth-order weight vector.
    let mut y5 = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let b = lit::<T>(A[5][j]);
        y5[0] += h * b * kj[0];
        y5[1] += h * b * kj[1];
    }
    let mut err = [T::zero(); 2];
    for (j, kj) in k.iter().enumerate() {
        let e = lit::<T>(E[j]);
        err[0] += h * e * kj[0];
        err[1] += h * e * kj[1];
    }
    (y5, err)
}

/// One classical fourth-order Runge–Kutta step (fixed-step studies).
pub fn rk4_step<T: Real>(
    f: &impl Fn(T, State<T>) -> State<T>,
    t: T,
    y: State<T>,
    h: T,
) -> State<T> {
    let half = lit::<T>(0.5);
    let sixth = T::one() / lit::<T>(6.0);
    let k1 = f(t, y);
    let k2 = f(t + half * h, [y[0] + half * h * k1[0], y[1] + half * h * k1[1]]);
    let k3 = f(t + half * h, [y[0] + half * h * k2[0], y[1] + half * h * k2[1]]);
    let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    let two = lit::<T>(2.0);
    [
        y[0] + sixth * h * (k1[0] + two * k2[0] + two * k3[0] + k4[0]),
        y[1] + sixth * h * (k1[1] + two * k2[1] + two * k3[1] + k4[1]),
    ]
}

/// Integrate from `(t0, y0)` to `t_end`, stopping early when `event` turns
/// true at an accepted step end. The event is only tested at step ends; the
/// caller refines the returned bracket.
pub fn integrate_with_event<T: Real>(
    f: &impl Fn(T, State<T>) -> State<T>,
    t0: T,
    y0: State<T>,
    t_end: T,
    ctrl: &StepControl<T>,
    mut event: impl FnMut(T, State<T>) -> bool,
) -> Result<Outcome<T>> {
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "integration span [{t0}, {t_end}] must be finite and increasing"
        )));
    }
    let span = t_end - t0;
    let snap = span * lit::<T>(1e-14);
    let mut t = t0;
    let mut y = y0;
    let mut h = ctrl.h_init.min(span).max(snap);
    for _ in 0..ctrl.max_steps {
        let rem = t_end - t;
        if rem <= snap {
            return Ok(Outcome::Reached(y));
        }
        h = h.min(rem);
        let (y_new, err) = dp54_step(f, t, y, h);
        let mut norm_sq = T::zero();
        for i in 0..2 {
            let scale = ctrl.atol[i] + ctrl.rtol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / scale;
            norm_sq += e * e;
        }
        let norm = (norm_sq / lit::<T>(2.0)).sqrt();
        if !norm.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
            return Err(CoreError::StepFailure(format!(
                "non-finite state near t = {t}"
            )));
        }
        if norm <= T::one() {
            let t_prev = t;
            let y_prev = y;
            t = t + h;
            y = y_new;
            if event(t, y) {
                return Ok(Outcome::Event {
                    t_before: t_prev,
                    y_before: y_prev,
                    t_after: t,
                    y_after: y,
                });
            }
        }
        let factor = if norm == T::zero() {
            lit::<T>(5.0)
        } else {
            (lit::<T>(0.9) * norm.powf(lit::<T>(-0.2)))
                .min(lit::<T>(5.0))
                .max(lit::<T>(0.2))
        };
        h = h * factor;
        if h < span * lit::<T>(1e-15) {
            return Err(CoreError::StepFailure(format!(
                "step size underflow near t = {t}"
            )));
        }
    }
    Err(CoreError::StepFailure(format!(
        "step budget {} exhausted before t = {t_end}",
        ctrl.max_steps
    )))
}

/// Integrate from `(t0, y0)` to `t_end` with no event.
pub fn integrate<T: Real>(
    f: &impl Fn(T, State<T>) -> State<T>,
    t0: T,
    y0: State<T>,
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<State<T>> {
    match integrate_with_event(f, t0, y0, t_end, ctrl, |_, _| false)? {
        Outcome::Reached(y) => Ok(y),
        Outcome::Event { .. } => unreachable!("event closure is constant false"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl() -> StepControl<f64> {
        StepControl {
            rtol: 1e-10,
            atol: [1e-12, 1e-12],
            h_init: 0.01,
            max_steps: 100_000,
        }
    }

    #[test]
    fn integrates_harmonic_oscillator() {
        // y'' = -y as a first-order pair: (v, w) with v' = w, w' = -v.
        let f = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let y = integrate(&f, 0.0, [1.0, 0.0], std::f64::consts::PI, &ctrl()).unwrap();
        assert!((y[0] + 1.0).abs() < 1e-9, "cos(pi) = -1, got {}", y[0]);
        assert!(y[1].abs() < 1e-9, "-sin(pi) = 0, got {}", y[1]);
    }

    #[test]
    fn event_brackets_the_crossing() {
        let f = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let out =
            integrate_with_event(&f, 0.0, [1.0, 0.0], 10.0, &ctrl(), |_, y| y[0] <= 0.0).unwrap();
        match out {
            Outcome::Event { t_before, t_after, y_before, y_after } => {
                let half_pi = std::f64::consts::FRAC_PI_2;
                assert!(t_before < half_pi && half_pi <= t_after);
                assert!(y_before[0] > 0.0 && y_after[0] <= 0.0);
            }
            Outcome::Reached(_) => panic!("cosine must cross zero before t = 10"),
        }
    }

    #[test]
    fn rejects_backward_span() {
        let f = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        assert!(integrate(&f, 1.0, [1.0, 0.0], 0.5, &ctrl()).is_err());
    }

    #[test]
    fn rk4_step_is_fourth_order() {
        // One step of y' = y from 1: compare against exp(h).
        let f = |_t: f64, y: [f64; 2]| [y[0], 0.0];
        let coarse = (rk4_step(&f, 0.0, [1.0, 0.0], 0.1)[0] - 0.1f64.exp()).abs();
        let fine = {
            let mid = rk4_step(&f, 0.0, [1.0, 0.0], 0.05);
            (rk4_step(&f, 0.05, mid, 0.05)[0] - 0.1f64.exp()).abs()
        };
        let ratio = coarse / fine;
        assert!(ratio > 12.0, "halving should cut error ~16x, got {ratio}");
    }
}
