//! Minimization machinery for the discrete two-ball quotient.
//!
//! The constrained problem (quotient over nonnegative node values, moment
//! gap pinned to zero, mass normalized) is attacked in two phases:
//!
//! 1. a spectral projected-gradient method on an augmented Lagrangian of
//!    the relative gap, which is globally robust and discovers the active
//!    set, then
//! 2. a damped Newton iteration on the stationarity system with the two
//!    multipliers as explicit unknowns, which polishes the iterate to near
//!    machine precision so downstream bisections in `q` and `t` see a
//!    noiseless objective.
//!
//! The Newton matrix is a pair of per-ball tridiagonal blocks bordered by
//! two dense multiplier columns and two dense constraint rows. It is
//! eliminated with partial pivoting across the borders, which keeps the
//! factorization stable even where the tridiagonal core alone is singular
//! — at `p = q` the core is the eigen-operator `H_I - alpha H_J`, and the
//! solution vector itself spans its kernel.

use super::discrete::{Funcs, Problem};
use crate::error::{CoreError, Result};
use crate::scalar::{lit, Real};

/// Outcome of one start: the polished node vector plus everything the
/// public solution type reports.
#[derive(Debug, Clone)]
pub(crate) struct SolveReport<T> {
    pub z: Vec<T>,
    pub lambda_value: T,
    pub lambda_euler: T,
    pub mu_euler: T,
    pub kkt_residual: T,
    pub moment: T,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn solve2<T: Real>(m: [[T; 2]; 2], rhs: [T; 2]) -> Result<[T; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs().max(m[0][1].abs()).max(m[1][0].abs()).max(m[1][1].abs());
    if det.abs() <= lit::<T>(1e-300) + scale * scale * lit::<T>(1e-16) {
        return Err(CoreError::NonConvergence("degenerate 2x2 system".into()));
    }
    Ok([
        (rhs[0] * m[1][1] - rhs[1] * m[0][1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// One row of the bordered system during elimination. A band row holds at
/// most three in-band coefficients starting at column `j0` plus the two
/// border-column entries; a row hit by a dense pivot graduates to a full
/// coefficient vector over all `n + 2` columns.
enum Row<T> {
    Band { j0: usize, c: [T; 3], t: [T; 2], rhs: T },
    Dense { coef: Vec<T>, rhs: T },
}

impl<T: Real> Row<T> {
    fn entry(&self, col: usize, n: usize) -> T {
        match self {
            Row::Band { j0, c, t, .. } => {
                if col >= n {
                    t[col - n]
                } else if col >= *j0 && col < j0 + 3 {
                    c[col - j0]
                } else {
                    T::zero()
                }
            }
            Row::Dense { coef, .. } => coef[col],
        }
    }

    fn rhs(&self) -> T {
        match self {
            Row::Band { rhs, .. } => *rhs,
            Row::Dense { rhs, .. } => *rhs,
        }
    }

    fn to_dense(&self, n: usize) -> (Vec<T>, T) {
        match self {
            Row::Band { j0, c, t, rhs } => {
                let mut coef = vec![T::zero(); n + 2];
                for (off, &ck) in c.iter().enumerate() {
                    if j0 + off < n {
                        coef[j0 + off] = ck;
                    }
                }
                coef[n] = t[0];
                coef[n + 1] = t[1];
                (coef, *rhs)
            }
            Row::Dense { coef, rhs } => (coef.clone(), *rhs),
        }
    }
}

/// `target -= m * pivot`, where both rows have their entries below column
/// `k` already eliminated.
fn subtract_scaled<T: Real>(target: &mut Row<T>, pivot: &Row<T>, m: T, k: usize, n: usize) {
    match pivot {
        Row::Band { j0: pj, c: pc, t: pt, rhs: prhs } => match target {
            Row::Band { j0: tj, c: tc, t: tt, rhs: trhs } => {
                let ent = |j0: usize, c: &[T; 3], col: usize| -> T {
                    if col < n && col >= j0 && col < j0 + 3 {
                        c[col - j0]
                    } else {
                        T::zero()
                    }
                };
                let e1 = ent(*tj, tc, k + 1) - m * ent(*pj, pc, k + 1);
                let e2 = ent(*tj, tc, k + 2) - m * ent(*pj, pc, k + 2);
                *tj = k;
                *tc = [T::zero(), e1, e2];
                tt[0] -= m * pt[0];
                tt[1] -= m * pt[1];
                *trhs -= m * *prhs;
            }
            Row::Dense { coef, rhs } => {
                for (off, &pck) in pc.iter().enumerate() {
                    if pj + off < n {
                        coef[pj + off] -= m * pck;
                    }
                }
                coef[n] -= m * pt[0];
                coef[n + 1] -= m * pt[1];
                *rhs -= m * *prhs;
            }
        },
        Row::Dense { coef: pcoef, rhs: prhs } => {
            if let Row::Band { .. } = target {
                let (coef, rhs) = target.to_dense(n);
                *target = Row::Dense { coef, rhs };
            }
            if let Row::Dense { coef, rhs } = target {
                for col in k..n + 2 {
                    coef[col] -= m * pcoef[col];
                }
                *rhs -= m * *prhs;
            }
        }
    }
}

/// Solve the bordered tridiagonal system
///
/// ```text
/// [ W    u   v ] [x]   [r0]
/// [ c^T  0   0 ] [y] = [r1]
/// [ d^T  0   0 ] [w]   [r2]
/// ```
///
/// where `W` is the `n x n` tridiagonal `(sub, diag, sup)` with `sub[k]`
/// coupling row `k` to column `k-1`. Gaussian elimination with partial
/// pivoting over all unpivoted rows; band rows that a dense pivot touches
/// fall back to dense storage, so the worst case stays `O(n^2)` while the
/// generic path is linear.
#[allow(clippy::too_many_arguments)]
fn bordered_solve<T: Real>(
    sub: &[T],
    diag: &[T],
    sup: &[T],
    u: &[T],
    v: &[T],
    c_row: &[T],
    d_row: &[T],
    r0: &[T],
    r1: T,
    r2: T,
) -> Result<(Vec<T>, T, T)> {
    let n = diag.len();
    let border = |row: &[T], rhs: T| -> Row<T> {
        let mut coef = row.to_vec();
        coef.push(T::zero());
        coef.push(T::zero());
        Row::Dense { coef, rhs }
    };
    let mut unpivoted: Vec<Row<T>> = vec![border(c_row, r1), border(d_row, r2)];
    let mut pivots: Vec<Row<T>> = Vec::with_capacity(n);
    let mut next_band = 0usize;
    for k in 0..n {
        while next_band < n && next_band <= k + 1 {
            let i = next_band;
            let (j0, c) = if i == 0 {
                (0, [diag[0], if n > 1 { sup[0] } else { T::zero() }, T::zero()])
            } else {
                (i - 1, [sub[i], diag[i], if i + 1 < n { sup[i] } else { T::zero() }])
            };
            unpivoted.push(Row::Band { j0, c, t: [u[i], v[i]], rhs: r0[i] });
            next_band += 1;
        }
        let mut best = 0usize;
        let mut best_abs = T::neg_infinity();
        for (idx, row) in unpivoted.iter().enumerate() {
            let a = row.entry(k, n).abs();
            if a > best_abs {
                best_abs = a;
                best = idx;
            }
        }
        if !(best_abs > T::zero()) {
            return Err(CoreError::NonConvergence("Newton system is singular".into()));
        }
        let piv = unpivoted.swap_remove(best);
        let piv_k = piv.entry(k, n);
        for row in unpivoted.iter_mut() {
            let e = row.entry(k, n);
            if e != T::zero() {
                subtract_scaled(row, &piv, e / piv_k, k, n);
            }
        }
        pivots.push(piv);
    }
    debug_assert_eq!(unpivoted.len(), 2);
    let m2 = [
        [unpivoted[0].entry(n, n), unpivoted[0].entry(n + 1, n)],
        [unpivoted[1].entry(n, n), unpivoted[1].entry(n + 1, n)],
    ];
    let tail = solve2(m2, [unpivoted[0].rhs(), unpivoted[1].rhs()])?;
    let mut x = vec![T::zero(); n + 2];
    x[n] = tail[0];
    x[n + 1] = tail[1];
    for k in (0..n).rev() {
        let row = &pivots[k];
        let mut acc = row.rhs();
        match row {
            Row::Band { j0, c, t, .. } => {
                for (off, &ck) in c.iter().enumerate() {
                    let col = j0 + off;
                    if col > k && col < n {
                        acc -= ck * x[col];
                    }
                }
                acc -= t[0] * x[n] + t[1] * x[n + 1];
                x[k] = acc / row.entry(k, n);
            }
            Row::Dense { coef, .. } => {
                for (col, &ck) in coef.iter().enumerate().skip(k + 1) {
                    acc -= ck * x[col];
                }
                x[k] = acc / coef[k];
            }
        }
    }
    let y = x[n];
    let w = x[n + 1];
    x.truncate(n);
    Ok((x, y, w))
}

/// Rescale `z` so that `J(z) = 1`. The quotient and gap are untouched
/// (both are scale-free), so this only pins the normalization.
pub(crate) fn normalize<T: Real>(prob: &Problem<T>, z: &mut [T]) -> Result<Funcs<T>> {
    let f = prob.funcs(z);
    if !(f.j > T::zero()) || !f.j.is_finite() {
        return Err(CoreError::NonConvergence(format!(
            "mass functional J = {} is not positive",
            f.j
        )));
    }
    let c = f.j.powf(-T::one() / prob.q);
    for v in z.iter_mut() {
        *v = *v * c;
    }
    Ok(prob.funcs(z))
}

/// Least-squares fit of the stationarity condition
/// `grad I = alpha * grad J + beta * grad g` over the strictly positive
/// nodes. Returns `(alpha, beta, relative residual)`.
pub(crate) fn multiplier_fit<T: Real>(prob: &Problem<T>, z: &[T]) -> (T, T, T) {
    let (gi, gj, gg) = prob.gradients(z);
    let mut bb = T::zero();
    let mut bc = T::zero();
    let mut cc = T::zero();
    let mut ba = T::zero();
    let mut ca = T::zero();
    for k in 0..z.len() {
        if z[k] > T::zero() {
            bb += gj[k] * gj[k];
            bc += gj[k] * gg[k];
            cc += gg[k] * gg[k];
            ba += gj[k] * gi[k];
            ca += gg[k] * gi[k];
        }
    }
    let (alpha, beta) = match solve2([[bb, bc], [bc, cc]], [ba, ca]) {
        Ok([a, b]) => (a, b),
        Err(_) => (T::zero(), T::zero()),
    };
    let mut worst = T::zero();
    let mut scale = T::zero();
    for k in 0..z.len() {
        if z[k] > T::zero() {
            worst = worst.max((gi[k] - alpha * gj[k] - beta * gg[k]).abs());
            scale = scale.max(gi[k].abs());
        }
    }
    let res = worst / (scale + T::min_positive_value());
    (alpha, beta, res)
}

/// KKT residual components at `(z, alpha, beta)`: stationarity of
/// `grad I - alpha grad J - beta grad g` relative to the gradient scale,
/// the relative gap, and the normalization drift. Nodes on the bound
/// `z = 0` are scored by complementarity — only an inward-pointing
/// gradient counts as a violation there.
fn kkt_measure<T: Real>(prob: &Problem<T>, z: &[T], alpha: T, beta: T) -> (T, Funcs<T>) {
    let f = prob.funcs(z);
    let (gi, gj, gg) = prob.gradients(z);
    let mut stat = T::zero();
    let mut scale = T::zero();
    for k in 0..z.len() {
        let phi = gi[k] - alpha * gj[k] - beta * gg[k];
        if z[k] > T::zero() {
            stat = stat.max(phi.abs());
            scale = scale
                .max(gi[k].abs())
                .max((alpha * gj[k]).abs())
                .max((beta * gg[k]).abs());
        } else {
            stat = stat.max((-phi).max(T::zero()));
        }
    }
    let rel_stat = stat / (scale + T::min_positive_value());
    let gap = f.gap_rel().abs();
    let norm_drift = (f.j - T::one()).abs();
    (rel_stat.max(gap).max(norm_drift), f)
}

/// Sum-of-squares merit for the projected Newton iteration: stationarity
/// over the interior nodes, complementarity violation on the bound, plus
/// both constraint defects. `None` when the functionals degenerate.
fn merit_of<T: Real>(prob: &Problem<T>, z: &[T], alpha: T, beta: T) -> Option<T> {
    let f = prob.funcs(z);
    if !(f.i > T::zero()) || !(f.j > T::zero()) {
        return None;
    }
    let (gi, gj, gg) = prob.gradients(z);
    let mut m = T::zero();
    for k in 0..z.len() {
        let phi = gi[k] - alpha * gj[k] - beta * gg[k];
        let viol = if z[k] > T::zero() { phi } else { phi.min(T::zero()) };
        m += viol * viol;
    }
    let g_raw = f.m_plus - f.m_minus;
    let jm1 = f.j - T::one();
    m += g_raw * g_raw + jm1 * jm1;
    m.is_finite().then_some(m)
}

/// Projected, damped Newton iteration on the system
/// `[grad I - alpha grad J - beta grad g; J - 1; g] = 0` in the unknowns
/// `(z, alpha, beta)`. The working set follows the bound actively: a step
/// may land nodes exactly on `z = 0`, and a bound node whose stationarity
/// gradient points inward is released again.
fn newton<T: Real>(prob: &Problem<T>, z: &mut Vec<T>, alpha: &mut T, beta: &mut T) -> Result<T> {
    let one = T::one();
    let dof = prob.dof();
    for _iter in 0..80 {
        let f = prob.funcs(z);
        if !(f.i > T::zero()) || !(f.j > T::zero()) {
            return Err(CoreError::NonConvergence(
                "functional collapsed during Newton polish".into(),
            ));
        }
        let (gi, gj, gg) = prob.gradients(z);
        let phi_at = |k: usize| gi[k] - *alpha * gj[k] - *beta * gg[k];
        let free: Vec<usize> = (0..dof)
            .filter(|&k| z[k] > T::zero() || phi_at(k) < T::zero())
            .collect();
        if free.is_empty() {
            return Err(CoreError::NonConvergence("all nodes hit the bound".into()));
        }
        let nf = free.len();
        let phi: Vec<T> = free.iter().map(|&k| phi_at(k)).collect();
        let g_raw = f.m_plus - f.m_minus;
        let jm1 = f.j - one;

        let (res, _) = kkt_measure(prob, z, *alpha, *beta);
        if res <= lit::<T>(1e-13) {
            return Ok(res);
        }

        // Tridiagonal part over the free nodes. Consecutive free indices
        // couple only when they are grid-adjacent within one ball.
        let (sub_full, diag_full, sup_full) =
            prob.tridiagonal(z, one, -*alpha, -*beta, T::zero());
        let mut sub = vec![T::zero(); nf];
        let mut diag = vec![T::zero(); nf];
        let mut sup = vec![T::zero(); nf];
        for (row, &k) in free.iter().enumerate() {
            diag[row] = diag_full[k];
            if row > 0 && free[row - 1] + 1 == k && k != prob.plus.m {
                sub[row] = sub_full[k];
                sup[row - 1] = sup_full[k - 1];
            }
        }
        let gj_f: Vec<T> = free.iter().map(|&k| gj[k]).collect();
        let gg_f: Vec<T> = free.iter().map(|&k| gg[k]).collect();
        let zf: Vec<T> = free.iter().map(|&k| z[k]).collect();
        let u: Vec<T> = gj_f.iter().map(|&x| -x).collect();
        let v: Vec<T> = gg_f.iter().map(|&x| -x).collect();
        let rhs0: Vec<T> = phi.iter().map(|&x| -x).collect();
        let (dz, dalpha, dbeta) =
            bordered_solve(&sub, &diag, &sup, &u, &v, &gj_f, &gg_f, &rhs0, -jm1, -g_raw)?;

        // Backtrack on the merit, projecting each trial onto the cone.
        let mut step = one;
        let merit0 = merit_of(prob, z, *alpha, *beta).unwrap_or_else(T::infinity);
        let mut accepted = false;
        for _ in 0..30 {
            let mut z_try = z.clone();
            for (row, &k) in free.iter().enumerate() {
                z_try[k] = (zf[row] + step * dz[row]).max(T::zero());
            }
            let a_try = *alpha + step * dalpha;
            let b_try = *beta + step * dbeta;
            if let Some(m_try) = merit_of(prob, &z_try, a_try, b_try) {
                if m_try < merit0 {
                    *z = z_try;
                    *alpha = a_try;
                    *beta = b_try;
                    accepted = true;
                    break;
                }
            }
            step = step * lit::<T>(0.5);
        }
        if !accepted {
            // No step strictly decreases the merit: the iterate sits at the
            // numerical floor. Let the residual gate below judge it.
            break;
        }
    }
    let (res, _) = kkt_measure(prob, z, *alpha, *beta);
    if res <= lit::<T>(1e-8) {
        Ok(res)
    } else {
        Err(CoreError::NonConvergence(format!(
            "Newton polish stopped at KKT residual {res}"
        )))
    }
}

/// One inner minimization of the augmented Lagrangian
/// `ln I/p - ln J/q + kappa_hat*gap + (mu/2)*gap^2` over the nonnegative
/// cone, by the nonmonotone spectral projected gradient method.
fn spg_inner<T: Real>(
    prob: &Problem<T>,
    z: &mut Vec<T>,
    kappa_hat: T,
    mu: T,
    max_iter: usize,
    tol: T,
) -> Result<()> {
    let one = T::one();
    let eval = |z: &[T]| -> Result<(T, Vec<T>)> {
        let f = prob.funcs(z);
        if !(f.i > T::zero()) || !(f.j > T::zero()) {
            return Err(CoreError::NonConvergence("iterate left the feasible cone".into()));
        }
        let s = f.m_plus + f.m_minus;
        if !(s > T::zero()) {
            return Err(CoreError::NonConvergence("moment mass vanished".into()));
        }
        let gap = f.gap_rel();
        let val = f.ln_quotient(prob.p, prob.q) + kappa_hat * gap + mu * lit::<T>(0.5) * gap * gap;
        let (gi, gj, gg) = prob.gradients(z);
        let w = kappa_hat + mu * gap;
        let ci = one / (prob.p * f.i);
        let cj = one / (prob.q * f.j);
        let cplus = (one - gap) / s;
        let cminus = (one + gap) / s;
        let mut grad = Vec::with_capacity(z.len());
        for k in 0..z.len() {
            let cgap = if k < prob.plus.m { cplus } else { cminus };
            grad.push(gi[k] * ci - gj[k] * cj + w * cgap * gg[k]);
        }
        Ok((val, grad))
    };

    let (mut val, mut grad) = eval(z)?;
    let mut history = vec![val; 10];
    let gmax = grad.iter().fold(T::zero(), |acc, g| acc.max(g.abs()));
    let mut alpha = if gmax > T::zero() { one / gmax } else { one };
    for _ in 0..max_iter {
        let mut d = vec![T::zero(); z.len()];
        let mut dmax = T::zero();
        for k in 0..z.len() {
            d[k] = (z[k] - alpha * grad[k]).max(T::zero()) - z[k];
            dmax = dmax.max(d[k].abs());
        }
        if dmax <= tol {
            return Ok(());
        }
        let slope = dot(&grad, &d);
        let bound = history.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        let mut lam = one;
        let mut z_new = Vec::new();
        let mut ok = false;
        for _ in 0..30 {
            z_new = z.iter().zip(&d).map(|(&zi, &di)| zi + lam * di).collect();
            if let Ok((v_new, _)) = eval(&z_new) {
                if v_new <= bound + lit::<T>(1e-4) * lam * slope {
                    ok = true;
                    val = v_new;
                    break;
                }
            }
            lam = lam * lit::<T>(0.5);
        }
        if !ok {
            return Ok(()); // stagnated; caller polishes from here
        }
        let (_, grad_new) = eval(&z_new)?;
        let mut ss = T::zero();
        let mut sy = T::zero();
        for k in 0..z.len() {
            let sk = z_new[k] - z[k];
            let yk = grad_new[k] - grad[k];
            ss += sk * sk;
            sy += sk * yk;
        }
        alpha = if sy > T::zero() {
            (ss / sy).max(lit::<T>(1e-12)).min(lit::<T>(1e12))
        } else {
            lit::<T>(1e12)
        };
        *z = z_new;
        grad = grad_new;
        history.rotate_left(1);
        *history.last_mut().unwrap() = val;
    }
    Ok(())
}

/// Augmented-Lagrangian driver around the projected-gradient phase.
/// Returns an estimate of the raw-gap multiplier for Newton warm-up.
fn al_spg<T: Real>(prob: &Problem<T>, z: &mut Vec<T>) -> Result<T> {
    normalize(prob, z)?;
    let mut kappa_hat = T::zero();
    let mut mu = lit::<T>(10.0);
    let mut gap_prev = T::infinity();
    let tols = [1e-3, 1e-4, 1e-5, 1e-6];
    for (outer, &tol) in tols.iter().enumerate() {
        spg_inner(prob, z, kappa_hat, mu, 350, lit(tol))?;
        let f = prob.funcs(z);
        let gap = f.gap_rel();
        kappa_hat += mu * gap;
        if outer > 0 && gap.abs() > lit::<T>(0.25) * gap_prev.abs() {
            mu = (mu * lit::<T>(10.0)).min(lit::<T>(1e8));
        }
        gap_prev = gap;
        normalize(prob, z)?;
    }
    let f = prob.funcs(z);
    Ok(kappa_hat / (f.m_plus + f.m_minus))
}

/// Solve from one starting vector: Newton straight away (cheap when the
/// start is good), falling back to the globalized phase when it stalls.
/// Never errors out of a finite start: a stalled run is returned flagged.
pub(crate) fn solve_from_start<T: Real>(prob: &Problem<T>, z0: &[T]) -> Result<SolveReport<T>> {
    let mut z: Vec<T> = z0.iter().map(|&v| v.max(T::zero())).collect();
    if z.len() != prob.dof() {
        return Err(CoreError::InvalidArgument(format!(
            "start vector has {} entries, problem has {} unknowns",
            z.len(),
            prob.dof()
        )));
    }
    normalize(prob, &mut z)?;

    let (a0, b0, _) = multiplier_fit(prob, &z);
    let mut z_try = z.clone();
    let (mut a_try, mut b_try) = (a0, b0);
    if let Ok(res) = newton(prob, &mut z_try, &mut a_try, &mut b_try) {
        return Ok(finalize_polished(prob, z_try, a_try, b_try, res));
    }

    al_spg(prob, &mut z)?;
    let (a1, b1, _) = multiplier_fit(prob, &z);
    let mut z_polish = z.clone();
    let (mut a_polish, mut b_polish) = (a1, b1);
    match newton(prob, &mut z_polish, &mut a_polish, &mut b_polish) {
        Ok(res) => Ok(finalize_polished(prob, z_polish, a_polish, b_polish, res)),
        Err(_) => Ok(finalize_flagged(prob, z)),
    }
}

/// Report a Newton-polished iterate. `alpha` and `beta` are the converged
/// multipliers of `grad I = alpha grad J + beta grad g`; the Euler
/// coefficients of the strong equation follow by the homogeneity scalings.
fn finalize_polished<T: Real>(
    prob: &Problem<T>,
    z: Vec<T>,
    alpha: T,
    beta: T,
    res: T,
) -> SolveReport<T> {
    let f = prob.funcs(&z);
    SolveReport {
        lambda_value: f.i.powf(T::one() / prob.p) / f.j.powf(T::one() / prob.q),
        lambda_euler: alpha * prob.q / prob.p,
        mu_euler: beta * (prob.r - T::one()) / prob.p,
        kkt_residual: res,
        moment: f.m_plus,
        converged: res <= lit::<T>(1e-7),
        z,
    }
}

/// Report a stalled iterate: multipliers from the least-squares fit, the
/// residual from the fit defect plus constraint violations, and the
/// convergence flag down.
fn finalize_flagged<T: Real>(prob: &Problem<T>, z: Vec<T>) -> SolveReport<T> {
    let f = prob.funcs(&z);
    let (alpha, beta, stat_res) = multiplier_fit(prob, &z);
    let kkt = stat_res.max(f.gap_rel().abs()).max((f.j - T::one()).abs());
    SolveReport {
        lambda_value: f.i.powf(T::one() / prob.p) / f.j.powf(T::one() / prob.q),
        lambda_euler: alpha * prob.q / prob.p,
        mu_euler: beta * (prob.r - T::one()) / prob.p,
        kkt_residual: kkt,
        moment: f.m_plus,
        converged: false,
        z,
    }
}
