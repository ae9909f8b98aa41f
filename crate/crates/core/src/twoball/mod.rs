//! The true two-ball optimum of the twisted quotient.
//!
//! For a fixed partition (volume fraction `t` of the positive ball) the
//! quotient is minimized over free radial node profiles on both balls,
//! subject to the moment-equality constraint and nonnegativity — no dilation
//! ansatz. The outer problems then optimize the partition itself and trace
//! the asymmetry of the optimal partition as the quotient exponent `q`
//! moves, locating the onset of symmetry breaking.

pub(crate) mod discrete;
mod solver;

use crate::error::{CoreError, Result};
use crate::opt::{bisect_transition, golden_section_min};
use crate::params::ProblemParams;
use crate::radial::{self, ground_state, RadialProfile};
use crate::reduced;
use crate::scalar::{lit, Real};
use discrete::{BallGrid, Problem};
use solver::{solve_from_start, SolveReport};

/// Asymmetry below this threshold counts as a symmetric partition in sweeps
/// and bisection indicators.
const Y_ONSET: f64 = 1e-3;

/// Partition of the total volume into two balls.
///
/// `t` is the volume fraction of the positive ball (`t = R_+^n / C`), `c`
/// the total scaled volume (both ball volumes divided by the unit-ball
/// volume), and `y = 2t - 1` the asymmetry coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBallConfig<T> {
    pub n: u32,
    pub t: T,
    pub c: T,
    pub r_plus: T,
    pub r_minus: T,
    pub y: T,
}

impl<T: Real> TwoBallConfig<T> {
    /// Build the partition from the volume fraction: `R_± = (c t_±)^{1/n}`
    /// with `t_+ = t`, `t_- = 1 - t`, so `R_+^n + R_-^n = c` holds to
    /// rounding error.
    pub fn new(n: u32, t: T, c: T) -> Result<Self> {
        if n < 1 {
            return Err(CoreError::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(t > T::zero() && t < T::one()) {
            return Err(CoreError::InvalidArgument(format!(
                "volume fraction must lie in (0, 1), got t = {t}"
            )));
        }
        if !(c > T::zero()) || !c.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "total volume must be positive and finite, got c = {c}"
            )));
        }
        let inv_n = T::one() / T::of(f64::from(n));
        Ok(Self {
            n,
            t,
            c,
            r_plus: (c * t).powf(inv_n),
            r_minus: (c * (T::one() - t)).powf(inv_n),
            y: lit::<T>(2.0) * t - T::one(),
        })
    }

    /// The equal-ball partition `t = 1/2`.
    pub fn symmetric(n: u32, c: T) -> Result<Self> {
        Self::new(n, lit::<T>(0.5), c)
    }
}

/// Knobs for a fixed-partition solve.
#[derive(Debug, Clone)]
pub struct SolveOptions<T> {
    /// Grid cells per ball.
    pub mesh: usize,
    /// Slope regularization `ε` (the gradient integrand becomes
    /// `(s² + ε²)^{p/2}`); `None` picks `1e-10` for `p < 2` and `0`
    /// otherwise.
    pub epsilon: Option<T>,
    /// Extra starting profiles (node values on each ball, boundary node
    /// included), tried alongside the built-in dilation-family starts.
    pub extra_start: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self { mesh: 400, epsilon: None, extra_start: None }
    }
}

/// Constrained optimum over one fixed partition.
///
/// Both profiles are stored nonnegative; the minimizer itself is `u_+` on
/// the positive ball and `-u_-` on the negative one. The multipliers follow
/// that sign convention: the negative-ball profile satisfies the Euler
/// equation with `multiplier_mu` negated.
#[derive(Debug, Clone)]
pub struct TwoBallSolution<T> {
    pub config: TwoBallConfig<T>,
    pub profile_plus: RadialProfile<T>,
    pub profile_minus: RadialProfile<T>,
    /// The quotient `(I_+ + I_-)^{1/p} / (J_+ + J_-)^{1/q}` at the optimum.
    pub lambda_value: T,
    pub multiplier_lambda: T,
    pub multiplier_mu: T,
    /// Moment of one ball, `M = ∫ u_+^{r-1}` (equal to the other side's
    /// moment up to the constraint residual).
    pub moment: T,
    /// `max(relative stationarity defect, relative moment gap, |J - 1|)`.
    pub kkt_residual: T,
    pub converged: bool,
    pub mesh: usize,
    /// Regularization actually used.
    pub epsilon: T,
}

impl<T: Real> TwoBallSolution<T> {
    /// Serialize as a `key,value` scalar header followed by a blank line and
    /// `ball,radius,value,flux` rows for both profiles (12 significant
    /// digits).
    pub fn to_csv(&self, params: &ProblemParams<T>) -> Result<String> {
        let mut out = String::from("key,value\n");
        out.push_str(&format!("n,{}\n", params.n));
        for (key, val) in [
            ("p", params.p),
            ("q", params.q),
            ("r", params.r),
            ("t", self.config.t),
            ("c", self.config.c),
            ("r_plus", self.config.r_plus),
            ("r_minus", self.config.r_minus),
            ("y", self.config.y),
            ("lambda_value", self.lambda_value),
            ("multiplier_lambda", self.multiplier_lambda),
            ("multiplier_mu", self.multiplier_mu),
            ("moment", self.moment),
            ("kkt_residual", self.kkt_residual),
            ("epsilon", self.epsilon),
        ] {
            out.push_str(&format!("{key},{:.11e}\n", val.as_f64()));
        }
        out.push_str(&format!("converged,{}\n", self.converged));
        out.push_str(&format!("mesh,{}\n", self.mesh));
        out.push('\n');
        out.push_str("ball,radius,value,flux\n");
        for (label, profile) in [("plus", &self.profile_plus), ("minus", &self.profile_minus)] {
            let flux = radial::node_flux(profile)?;
            for i in 0..profile.radii.len() {
                out.push_str(&format!(
                    "{label},{:.11e},{:.11e},{:.11e}\n",
                    profile.radii[i].as_f64(),
                    profile.values[i].as_f64(),
                    flux[i].as_f64()
                ));
            }
        }
        Ok(out)
    }
}

/// Asymmetry of the optimal partition as the quotient exponent moves.
#[derive(Debug, Clone)]
pub struct BifurcationDiagram<T> {
    /// Grid points that produced a converged optimum, in increasing order.
    pub q_values: Vec<T>,
    /// Optimal asymmetry `2 t* - 1` per recorded point.
    pub y_star: Vec<T>,
    /// Optimal quotient per recorded point.
    pub lambda_star: Vec<T>,
    /// KKT residual of the recorded optimum per point.
    pub kkt_residual: Vec<T>,
    /// Onset of `y_star > 1e-3`, bisection-refined between the bracketing
    /// grid points; `None` when the onset lies outside the sweep.
    pub q_critical: Option<T>,
    pub mesh: usize,
    /// `n >= 2`: no external ground truth for the onset; estimates only.
    pub exploratory: bool,
    /// Grid points that failed, with the error that stopped them.
    pub failures: Vec<(T, CoreError)>,
}

impl<T: Real> BifurcationDiagram<T> {
    /// Serialize as `q,y_star,lambda_star,kkt_residual,mesh` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,y_star,lambda_star,kkt_residual,mesh\n");
        for k in 0..self.q_values.len() {
            out.push_str(&format!(
                "{:.11e},{:.11e},{:.11e},{:.11e},{}\n",
                self.q_values[k].as_f64(),
                self.y_star[k].as_f64(),
                self.lambda_star[k].as_f64(),
                self.kkt_residual[k].as_f64(),
                self.mesh
            ));
        }
        out
    }
}

fn resolve_epsilon<T: Real>(params: &ProblemParams<T>, opts: &SolveOptions<T>) -> Result<T> {
    match opts.epsilon {
        Some(e) if e >= T::zero() && e.is_finite() => Ok(e),
        Some(e) => Err(CoreError::InvalidArgument(format!(
            "regularization must be a finite nonnegative number, got {e}"
        ))),
        None => Ok(if params.p < lit::<T>(2.0) { lit(1e-10) } else { T::zero() }),
    }
}

fn build_problem<T: Real>(
    params: &ProblemParams<T>,
    config: &TwoBallConfig<T>,
    mesh: usize,
    epsilon: T,
) -> Result<Problem<T>> {
    if config.n != params.n {
        return Err(CoreError::InvalidArgument(format!(
            "partition dimension {} does not match problem dimension {}",
            config.n, params.n
        )));
    }
    if mesh < 100 {
        return Err(CoreError::InvalidArgument(format!(
            "two-ball solves need mesh >= 100 cells per ball, got {mesh}"
        )));
    }
    Ok(Problem {
        p: params.p,
        q: params.q,
        r: params.r,
        eps2: epsilon * epsilon,
        plus: BallGrid::new(params.n, config.r_plus, mesh)?,
        minus: BallGrid::new(params.n, config.r_minus, mesh)?,
    })
}

/// Unit-ball ground-state node values, shared across starts and partitions.
fn start_basis<T: Real>(params: &ProblemParams<T>, mesh: usize) -> Result<Vec<T>> {
    Ok(ground_state(params.p, params.q, params.n, mesh)?.profile.values)
}

/// Dilation-family start: `u_± = c_± v(ρ/R_±)` with `c_+ = 1` and `c_-`
/// chosen so the discrete moments match exactly (both balls share the
/// relative grid, so the moment sums differ only by `c_±^{r-1} R_±^n`).
fn family_start<T: Real>(
    basis: &[T],
    params: &ProblemParams<T>,
    config: &TwoBallConfig<T>,
    mesh: usize,
) -> Vec<T> {
    let ratio = (config.r_plus / config.r_minus)
        .powf(params.nf() / (params.r - T::one()));
    let mut z = Vec::with_capacity(2 * mesh);
    z.extend_from_slice(&basis[..mesh]);
    z.extend(basis[..mesh].iter().map(|&v| v * ratio));
    z
}

fn better<T: Real>(a: &SolveReport<T>, b: &SolveReport<T>) -> bool {
    match (a.converged, b.converged) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.lambda_value < b.lambda_value,
        (false, false) => a.kkt_residual < b.kkt_residual,
    }
}

/// Run every start and keep the best report: converged beats flagged,
/// then lower quotient (lower residual among flagged).
fn solve_discrete<T: Real>(
    prob: &Problem<T>,
    basis: &[T],
    params: &ProblemParams<T>,
    config: &TwoBallConfig<T>,
    extra: Option<&[T]>,
    warm: Option<&[T]>,
) -> Result<SolveReport<T>> {
    let mesh = prob.plus.m;
    let mut starts: Vec<Vec<T>> = Vec::new();
    if let Some(z) = warm {
        starts.push(z.to_vec());
    }
    if let Some(z) = extra {
        starts.push(z.to_vec());
    }
    let fam = family_start(basis, params, config, mesh);
    let mut asym_plus = fam.clone();
    let mut asym_minus = fam.clone();
    for k in 0..mesh {
        asym_plus[k] = asym_plus[k] * lit::<T>(1.1);
        asym_plus[mesh + k] = asym_plus[mesh + k] * lit::<T>(0.9);
        asym_minus[k] = asym_minus[k] * lit::<T>(0.9);
        asym_minus[mesh + k] = asym_minus[mesh + k] * lit::<T>(1.1);
    }
    starts.push(fam);
    starts.push(asym_plus);
    starts.push(asym_minus);

    let mut best: Option<SolveReport<T>> = None;
    let mut last_err = None;
    for z0 in &starts {
        match solve_from_start(prob, z0) {
            Ok(rep) => {
                if best.as_ref().map_or(true, |cur| better(&rep, cur)) {
                    best = Some(rep);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or_else(|| CoreError::NonConvergence("no start produced an iterate".into()))
    })
}

fn report_to_solution<T: Real>(
    params: &ProblemParams<T>,
    config: &TwoBallConfig<T>,
    mesh: usize,
    epsilon: T,
    rep: SolveReport<T>,
) -> TwoBallSolution<T> {
    let profile = |radius: T, u: &[T]| -> RadialProfile<T> {
        let h = radius / T::of_usize(mesh);
        let mut values = u.to_vec();
        values.push(T::zero());
        RadialProfile {
            n: params.n,
            p: params.p,
            radii: (0..=mesh).map(|j| T::of_usize(j) * h).collect(),
            values,
            flux: None,
            radius,
        }
    };
    let (zp, zm) = rep.z.split_at(mesh);
    TwoBallSolution {
        config: *config,
        profile_plus: profile(config.r_plus, zp),
        profile_minus: profile(config.r_minus, zm),
        lambda_value: rep.lambda_value,
        multiplier_lambda: rep.lambda_euler,
        multiplier_mu: rep.mu_euler,
        moment: rep.moment,
        kkt_residual: rep.kkt_residual,
        converged: rep.converged,
        mesh,
        epsilon,
    }
}

/// Minimize the quotient over both profiles at a fixed partition.
///
/// Starts from the dilation family (plus two amplitude-perturbed variants
/// and any caller-supplied profiles) and keeps the best outcome. A run
/// where no start reaches the KKT tolerance still returns the best iterate,
/// flagged `converged = false`.
pub fn solve_fixed_partition<T: Real>(
    params: &ProblemParams<T>,
    config: &TwoBallConfig<T>,
    opts: &SolveOptions<T>,
) -> Result<TwoBallSolution<T>> {
    let epsilon = resolve_epsilon(params, opts)?;
    let prob = build_problem(params, config, opts.mesh, epsilon)?;
    let basis = start_basis(params, opts.mesh)?;
    let stacked_extra = match &opts.extra_start {
        Some((up, um)) => {
            if up.len() != opts.mesh + 1 || um.len() != opts.mesh + 1 {
                return Err(CoreError::InvalidArgument(format!(
                    "extra start must carry mesh+1 = {} node values per ball, got {} and {}",
                    opts.mesh + 1,
                    up.len(),
                    um.len()
                )));
            }
            if up.iter().chain(um).any(|v| !v.is_finite()) {
                return Err(CoreError::NonFinite("extra start contains a non-finite value".into()));
            }
            let mut z = Vec::with_capacity(2 * opts.mesh);
            z.extend_from_slice(&up[..opts.mesh]);
            z.extend_from_slice(&um[..opts.mesh]);
            Some(z)
        }
        None => None,
    };
    let rep = solve_discrete(&prob, &basis, params, config, stacked_extra.as_deref(), None)?;
    Ok(report_to_solution(params, config, opts.mesh, epsilon, rep))
}

/// Quotient of the optimal dilation family at `q = r - 1`, where the inner
/// profile problem has the closed-form solution `u_± = c_± v(ρ/R_±)`:
///
/// `λ(t) = Q_v · (c/2)^{1/p - 1/n - 1/q} · F(2t - 1)^{1/p}`,
///
/// with `Q_v` the unit-ball ground-state quotient and `F` the reduced
/// functional. Serves as the exact oracle for [`solve_fixed_partition`].
pub fn closed_form_at_q_eq_rm1<T: Real>(
    params: &ProblemParams<T>,
    config: &TwoBallConfig<T>,
) -> Result<T> {
    let rm1 = params.r - T::one();
    if (params.q - rm1).abs() > lit::<T>(1e-12) * rm1.max(T::one()) {
        return Err(CoreError::InvalidArgument(format!(
            "closed form requires q = r - 1 exactly, got q = {} and r - 1 = {rm1}",
            params.q
        )));
    }
    if config.n != params.n {
        return Err(CoreError::InvalidArgument(format!(
            "partition dimension {} does not match problem dimension {}",
            config.n, params.n
        )));
    }
    let gs = ground_state(params.p, params.q, params.n, 400)?;
    let one = T::one();
    let exponent = one / params.p - one / params.nf() - one / params.q;
    let f = reduced::reduced_f(config.y, params)?;
    Ok(gs.quotient * (config.c / lit::<T>(2.0)).powf(exponent) * f.powf(one / params.p))
}

/// Shared grid bounds of the partition scan: the `t ↔ 1-t` symmetry halves
/// the domain, and the upper cap keeps the vanishing ball resolvable.
const T_SCAN_LO: f64 = 0.5;
const T_SCAN_HI: f64 = 0.98;

struct PartitionOptimum<T> {
    t_star: T,
    solution: TwoBallSolution<T>,
    z: Vec<T>,
}

fn optimize_inner<T: Real>(
    params: &ProblemParams<T>,
    c: T,
    mesh: usize,
    scan_points: usize,
    tol_t: T,
    seed: Option<&[T]>,
) -> Result<PartitionOptimum<T>> {
    if scan_points < 33 {
        return Err(CoreError::InvalidArgument(format!(
            "partition scan needs at least 33 points, got {scan_points}"
        )));
    }
    if !(tol_t > T::zero()) || !tol_t.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "partition tolerance must be positive, got {tol_t}"
        )));
    }
    let epsilon = resolve_epsilon(params, &SolveOptions { mesh, ..SolveOptions::default() })?;
    let basis = start_basis(params, mesh)?;
    let lo = lit::<T>(T_SCAN_LO);
    let hi = lit::<T>(T_SCAN_HI);

    let mut warm: Option<Vec<T>> = seed.map(|z| z.to_vec());
    let mut best: Option<(T, SolveReport<T>)> = None;
    let mut scan: Vec<(T, T)> = Vec::with_capacity(scan_points);
    let mut failed = 0usize;
    for k in 0..scan_points {
        let t = lo + (hi - lo) * T::of_usize(k) / T::of_usize(scan_points - 1);
        let attempt = TwoBallConfig::new(params.n, t, c).and_then(|config| {
            let prob = build_problem(params, &config, mesh, epsilon)?;
            solve_discrete(&prob, &basis, params, &config, None, warm.as_deref())
        });
        match attempt {
            Ok(rep) if rep.converged => {
                warm = Some(rep.z.clone());
                scan.push((t, rep.lambda_value));
                if best.as_ref().map_or(true, |(_, cur)| rep.lambda_value < cur.lambda_value) {
                    best = Some((t, rep));
                }
            }
            _ => failed += 1,
        }
    }
    if failed * 5 > scan_points || best.is_none() {
        return Err(CoreError::TooManyFailures { failed, total: scan_points });
    }
    let (t_best, best_rep) = best.expect("checked above");

    // Bracket the scan minimum by its neighbors and refine.
    let idx = scan.iter().position(|&(t, _)| t == t_best).expect("t_best came from scan");
    let a = if idx == 0 { scan[0].0 } else { scan[idx - 1].0 };
    let b = if idx + 1 == scan.len() { scan[idx].0 } else { scan[idx + 1].0 };
    let penalty = best_rep.lambda_value * lit::<T>(2.0);
    let mut cache: Option<(T, SolveReport<T>)> = None;
    let objective = |t: T| -> T {
        let attempt = TwoBallConfig::new(params.n, t, c).and_then(|config| {
            let prob = build_problem(params, &config, mesh, epsilon)?;
            solve_discrete(&prob, &basis, params, &config, None, warm.as_deref())
        });
        match attempt {
            Ok(rep) if rep.converged => {
                let value = rep.lambda_value;
                warm = Some(rep.z.clone());
                cache = Some((t, rep));
                value
            }
            _ => penalty,
        }
    };
    let refined = if b > a {
        golden_section_min(objective, a, b, tol_t).map(|(t, _)| t)
    } else {
        Ok(t_best)
    };

    // Final solve at the refined partition; fall back to the best scan
    // point if refinement failed or did not beat it.
    let mut chosen = (t_best, best_rep);
    if let Ok(t_star) = refined {
        let from_cache = match cache {
            Some((tc, rep)) if tc == t_star => Some(rep),
            _ => None,
        };
        let rep = match from_cache {
            Some(rep) => Ok(rep),
            None => TwoBallConfig::new(params.n, t_star, c).and_then(|config| {
                let prob = build_problem(params, &config, mesh, epsilon)?;
                solve_discrete(&prob, &basis, params, &config, None, warm.as_deref())
            }),
        };
        if let Ok(rep) = rep {
            if rep.converged && rep.lambda_value <= chosen.1.lambda_value {
                chosen = (t_star, rep);
            }
        }
    }
    let (t_star, rep) = chosen;
    let config = TwoBallConfig::new(params.n, t_star, c)?;
    let z = rep.z.clone();
    let solution = report_to_solution(params, &config, mesh, epsilon, rep);
    Ok(PartitionOptimum { t_star, solution, z })
}

/// Optimize the partition: a coarse scan of `λ(t)` on `t ∈ [1/2, 0.98]`
/// (the `t ↔ 1-t` symmetry makes the lower half redundant), warm-starting
/// each solve from its neighbor, followed by golden-section refinement of
/// the bracketing interval down to `tol_t`.
pub fn optimize_partition<T: Real>(
    params: &ProblemParams<T>,
    c: T,
    mesh: usize,
    scan_points: usize,
    tol_t: T,
) -> Result<(T, TwoBallSolution<T>)> {
    let opt = optimize_inner(params, c, mesh, scan_points, tol_t, None)?;
    Ok((opt.t_star, opt.solution))
}

/// Weak-form residual of the Euler equation
/// `-(ρ^{n-1}|u'|^{p-2}u')' = ρ^{n-1}(λ u^{q-1} ± μ u^{r-2})`
/// on each ball with the solution's extracted multipliers (`+μ` on the
/// positive ball, `-μ` on the negative one); returns the larger of the two
/// normalized residuals.
pub fn euler_residual<T: Real>(
    solution: &TwoBallSolution<T>,
    params: &ProblemParams<T>,
) -> Result<T> {
    let one = T::one();
    let qm1 = params.q - one;
    let rm2 = params.r - lit::<T>(2.0);
    let nm1 = params.n as i32 - 1;
    let pow0 = |u: T, e: T| if u > T::zero() { u.powf(e) } else { T::zero() };
    let mut worst = T::zero();
    for (profile, sign) in [(&solution.profile_plus, one), (&solution.profile_minus, -one)] {
        profile.validate()?;
        if profile.segments() < 4 {
            return Err(CoreError::InvalidArgument(
                "Euler residual needs at least 4 cells per ball".into(),
            ));
        }
        let h = profile.uniform_step().ok_or_else(|| {
            CoreError::InvalidArgument("Euler residual needs uniform grids".into())
        })?;
        let w = radial::node_flux(profile)?;
        let load: Vec<T> = profile
            .radii
            .iter()
            .zip(&profile.values)
            .map(|(&rho, &u)| {
                rho.powi(nm1)
                    * (solution.multiplier_lambda * pow0(u, qm1)
                        + sign * solution.multiplier_mu * pow0(u, rm2))
            })
            .collect();
        worst = worst.max(radial::weak_flux_residual(h, &w, &load));
    }
    Ok(worst)
}

/// Trace the optimal asymmetry across a grid of quotient exponents.
///
/// Each admissible grid point runs a partition optimization, warm-started
/// from its predecessor; failures are recorded and the sweep continues. The
/// onset of `y_star > 1e-3` is refined by [`critical_q`] between the
/// bracketing grid points.
pub fn bifurcation_sweep<T: Real>(
    n: u32,
    p: T,
    r: T,
    q_grid: &[T],
    c: T,
    mesh: usize,
) -> Result<BifurcationDiagram<T>> {
    if q_grid.is_empty() {
        return Err(CoreError::InvalidArgument("sweep grid is empty".into()));
    }
    if q_grid.iter().any(|q| !q.is_finite()) {
        return Err(CoreError::InvalidArgument("sweep grid contains a non-finite value".into()));
    }
    if q_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CoreError::InvalidArgument(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    let admissible: Vec<Option<ProblemParams<T>>> =
        q_grid.iter().map(|&q| ProblemParams::new(n, p, q, r).ok()).collect();
    if admissible.iter().all(Option::is_none) {
        let verdict = ProblemParams::<T>::new(n, p, q_grid[0], r).unwrap_err();
        return Err(verdict);
    }

    let mut diagram = BifurcationDiagram {
        q_values: Vec::new(),
        y_star: Vec::new(),
        lambda_star: Vec::new(),
        kkt_residual: Vec::new(),
        q_critical: None,
        mesh,
        exploratory: n >= 2,
        failures: Vec::new(),
    };
    let mut warm: Option<Vec<T>> = None;
    for (slot, &q) in admissible.iter().zip(q_grid) {
        let params = match slot {
            Some(params) => params,
            None => {
                let err = ProblemParams::<T>::new(n, p, q, r).unwrap_err();
                diagram.failures.push((q, err));
                continue;
            }
        };
        match optimize_inner(params, c, mesh, 33, lit::<T>(2.5e-4), warm.as_deref()) {
            Ok(opt) => {
                warm = Some(opt.z);
                diagram.q_values.push(q);
                diagram.y_star.push((lit::<T>(2.0) * opt.t_star - T::one()).max(T::zero()));
                diagram.lambda_star.push(opt.solution.lambda_value);
                diagram.kkt_residual.push(opt.solution.kkt_residual);
            }
            Err(e) => diagram.failures.push((q, e)),
        }
    }

    let onset = lit::<T>(Y_ONSET);
    if let Some(first) = diagram.y_star.iter().position(|&y| y > onset) {
        if first > 0 && diagram.y_star[first - 1] <= onset {
            let lo = diagram.q_values[first - 1];
            let hi = diagram.q_values[first];
            let tol = (hi - lo) / lit::<T>(8.0);
            diagram.q_critical =
                Some(critical_q(n, p, r, (lo, hi), tol, c, mesh).unwrap_or(hi));
        }
        // A first point already past the onset leaves the crossing outside
        // the sweep; q_critical stays absent.
    }
    Ok(diagram)
}

/// Bisect the symmetry-breaking exponent: the indicator is "the optimal
/// partition is asymmetric" (`y_star > 1e-3` after a partition optimization
/// at that `q`). The bracket must straddle the transition.
pub fn critical_q<T: Real>(
    n: u32,
    p: T,
    r: T,
    bracket: (T, T),
    tol_q: T,
    c: T,
    mesh: usize,
) -> Result<T> {
    let onset = lit::<T>(Y_ONSET);
    let mut warm: Option<Vec<T>> = None;
    bisect_transition(
        |q| {
            let params = ProblemParams::new(n, p, q, r)?;
            let opt = optimize_inner(&params, c, mesh, 33, lit::<T>(2.5e-4), warm.as_deref())?;
            warm = Some(opt.z);
            Ok(lit::<T>(2.0) * opt.t_star - T::one() > onset)
        },
        bracket.0,
        bracket.1,
        tol_q,
    )
}
