//! `tshape` — command-line front end for the twisted `p,q,r` eigenvalue
//! toolkit.
//!
//! One subcommand per object: the closed-form exponents (`pstar`, `qhat`,
//! `gamma`), the reduced dilation family (`reduced`), the single-ball
//! ground state (`ground-state`), the genuine two-ball solver (`twoball`),
//! and the built-in verification runner (`verify`).
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 solver
//! non-convergence, 4 verification failure.

mod config;
mod emit;

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tshape_core::params::{critical_exponent, gamma_coeff, q_hat, ProblemParams};
use tshape_core::radial::{ground_state, node_flux, AmplitudeScaling, RadialProfile};
use tshape_core::reduced::{minimize_reduced_f, reduced_f, sweep_reduced, DEFAULT_MIN_TOL};
use tshape_core::twoball::{
    bifurcation_sweep, critical_q, optimize_partition, solve_fixed_partition, SolveOptions,
    TwoBallConfig, TwoBallSolution,
};
use tshape_core::verify::run_checks;
use tshape_core::CoreError;

use config::{CommonFlags, Format, RunConfig};

/// A run that must stop with a specific exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, configuration, or parameters.
    Usage(String),
    /// A solver gave up, or the returned iterate is not converged.
    Solver(String),
    /// One or more verification checks failed.
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Verify(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Solver(msg) | Failure::Verify(msg) => f.write_str(msg),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Inadmissible(_) | CoreError::InvalidArgument(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Solver(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tshape",
    version,
    about = "Twisted p,q,r eigenvalue problem on pairs of balls",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    flags: CommonFlags,
    #[command(subcommand)]
    command: Command,
}

/// The full exponent set of one problem instance.
#[derive(Debug, Args)]
struct Quartet {
    /// Space dimension.
    #[arg(long)]
    n: u32,
    /// Gradient-norm exponent, p > 1.
    #[arg(long)]
    p: f64,
    /// Function-norm exponent, 1 <= q < p*.
    #[arg(long)]
    q: f64,
    /// Moment exponent, 2 <= r < p* + 1.
    #[arg(long)]
    r: f64,
}

impl Quartet {
    fn params(&self) -> Result<ProblemParams<f64>, Failure> {
        Ok(ProblemParams::new(self.n, self.p, self.q, self.r)?)
    }
}

/// Exponents of a family swept over `q`.
#[derive(Debug, Args)]
struct Triple {
    /// Space dimension.
    #[arg(long)]
    n: u32,
    /// Gradient-norm exponent, p > 1.
    #[arg(long)]
    p: f64,
    /// Moment exponent, 2 <= r < p* + 1.
    #[arg(long)]
    r: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Critical Sobolev exponent p* (np/(n-p) for p < n, infinite otherwise).
    Pstar {
        /// Gradient-norm exponent, p > 1.
        #[arg(long)]
        p: f64,
        /// Space dimension.
        #[arg(long)]
        n: u32,
    },
    /// Threshold exponent: above it the symmetric pair is not optimal.
    Qhat {
        /// Gradient-norm exponent, p > 1.
        #[arg(long)]
        p: f64,
        /// Moment exponent, r >= 2.
        #[arg(long)]
        r: f64,
        /// Space dimension.
        #[arg(long)]
        n: u32,
    },
    /// Curvature coefficient of the reduced functional at the symmetric point.
    Gamma(Quartet),
    /// Reduced functional over the dilation family of ball pairs.
    #[command(subcommand)]
    Reduced(ReducedCmd),
    /// Ground state of the radial p-Laplace problem on the unit ball.
    GroundState {
        /// Gradient-norm exponent, p > 1.
        #[arg(long)]
        p: f64,
        /// Source exponent, 1 <= q < p*.
        #[arg(long)]
        q: f64,
        /// Space dimension.
        #[arg(long)]
        n: u32,
    },
    /// Constrained two-ball solves, partition optimization, and sweeps.
    #[command(subcommand)]
    Twoball(TwoballCmd),
    /// Run the built-in verification checks.
    Verify {
        /// Only run checks whose name contains this substring.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Subcommand)]
enum ReducedCmd {
    /// Evaluate F at one asymmetry coordinate.
    Eval {
        #[command(flatten)]
        quartet: Quartet,
        /// Asymmetry coordinate, |y| < 1.
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Minimize F over y in [0, 1). `--tol` sets the bracket resolution.
    Minimize {
        #[command(flatten)]
        quartet: Quartet,
    },
    /// Minimize F for each q on a grid ("lo:hi:points" or a comma list).
    Sweep {
        #[command(flatten)]
        triple: Triple,
        /// Grid of q values.
        #[arg(long, value_name = "GRID")]
        q_grid: String,
    },
}

#[derive(Subcommand)]
enum TwoballCmd {
    /// Solve the constrained problem on one fixed partition.
    Solve {
        #[command(flatten)]
        quartet: Quartet,
        /// Volume fraction of the positive ball, in (0, 1).
        #[arg(long)]
        t: f64,
    },
    /// Optimize the partition fraction. `--tol` sets the resolution in t.
    Optimize {
        #[command(flatten)]
        quartet: Quartet,
    },
    /// Partition optimization across a q grid, with onset refinement.
    Sweep {
        #[command(flatten)]
        triple: Triple,
        /// Grid of q values ("lo:hi:points" or a comma list).
        #[arg(long, value_name = "GRID")]
        q_grid: String,
    },
    /// Bisect the symmetry-breaking exponent. `--tol` sets the q resolution.
    Qcrit {
        #[command(flatten)]
        triple: Triple,
        /// Bracket whose endpoints straddle the transition.
        #[arg(long, value_name = "LO,HI")]
        bracket: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Pstar { p, n } => emit_scalar(&cfg, "p_star", critical_exponent(p, n)?),
        Command::Qhat { p, r, n } => emit_scalar(&cfg, "q_hat", q_hat(p, r, n)?),
        Command::Gamma(quartet) => {
            let params = quartet.params()?;
            emit_scalar(&cfg, "gamma", gamma_coeff(&params))
        }
        Command::Reduced(cmd) => run_reduced(cmd, &cfg),
        Command::GroundState { p, q, n } => run_ground_state(p, q, n, &cfg),
        Command::Twoball(cmd) => run_twoball(cmd, &cfg),
        Command::Verify { only } => run_verify(only.as_deref()),
    }
}

fn run_reduced(cmd: ReducedCmd, cfg: &RunConfig) -> Result<(), Failure> {
    match cmd {
        ReducedCmd::Eval { quartet, y } => {
            let params = quartet.params()?;
            emit_scalar(cfg, "f", reduced_f(y, &params)?)
        }
        ReducedCmd::Minimize { quartet } => {
            let params = quartet.params()?;
            let tol = cfg.tol.unwrap_or(DEFAULT_MIN_TOL);
            let min = minimize_reduced_f(&params, tol)?;
            emit_record(
                cfg,
                &[
                    ("y_star", Field::Num(min.y_star)),
                    ("f_star", Field::Num(min.f_star)),
                    ("is_symmetric", Field::Bool(min.is_symmetric)),
                ],
            )
        }
        ReducedCmd::Sweep { triple, q_grid } => {
            let grid = parse_grid(&q_grid)?;
            let points = sweep_reduced(triple.n, triple.p, triple.r, &grid);
            let mut csv = String::from("q,y_star,f_star\n");
            let mut rows = Vec::new();
            for point in &points {
                match &point.outcome {
                    Ok(min) => {
                        csv.push_str(&format!(
                            "{},{},{}\n",
                            emit::num(point.q),
                            emit::num(min.y_star),
                            emit::num(min.f_star)
                        ));
                        rows.push(emit::json_object(&[
                            ("q", emit::json_num(point.q)),
                            ("y_star", emit::json_num(min.y_star)),
                            ("f_star", emit::json_num(min.f_star)),
                            ("is_symmetric", min.is_symmetric.to_string()),
                        ]));
                    }
                    Err(e) => eprintln!("note: q = {}: {e}", point.q),
                }
            }
            let content = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => csv,
                Format::Json => format!("{}\n", emit::json_object(&[("rows", emit::json_array(rows))])),
            };
            emit::write(cfg, &content)
        }
    }
}

fn run_ground_state(p: f64, q: f64, n: u32, cfg: &RunConfig) -> Result<(), Failure> {
    let gs = ground_state(p, q, n, cfg.mesh)?;
    let (kind, value) = match gs.scaling {
        AmplitudeScaling::PowerLaw { amplitude } => ("power-law", amplitude),
        AmplitudeScaling::Eigenvalue { lambda } => ("eigenvalue", lambda),
    };
    let fields = [
        ("p", Field::Num(p)),
        ("q", Field::Num(q)),
        ("n", Field::Int(n as u64)),
        ("first_zero", Field::Num(gs.first_zero)),
        ("quotient", Field::Num(gs.quotient)),
        ("scaling_kind", Field::Text(kind.to_string())),
        ("scaling_value", Field::Num(value)),
    ];
    let content = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = record_csv(&fields);
            out.push('\n');
            out.push_str(&profile_csv(&gs.profile)?);
            out
        }
        Format::Json => {
            let mut json_fields: Vec<(&str, String)> =
                fields.iter().map(|(k, v)| (*k, v.json())).collect();
            json_fields.push(("profile", profile_json(&gs.profile)?));
            format!("{}\n", emit::json_object(&json_fields))
        }
    };
    emit::write(cfg, &content)
}

fn run_twoball(cmd: TwoballCmd, cfg: &RunConfig) -> Result<(), Failure> {
    match cmd {
        TwoballCmd::Solve { quartet, t } => {
            let params = quartet.params()?;
            let config = TwoBallConfig::new(quartet.n, t, cfg.c)?;
            let opts = SolveOptions { mesh: cfg.mesh, epsilon: None, extra_start: None };
            let sol = solve_fixed_partition(&params, &config, &opts)?;
            let content = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => sol.to_csv(&params)?,
                Format::Json => format!("{}\n", solution_json(&sol, &params)?),
            };
            emit::write(cfg, &content)?;
            ensure_converged(sol.converged, sol.kkt_residual)
        }
        TwoballCmd::Optimize { quartet } => {
            let params = quartet.params()?;
            let tol_t = cfg.tol.unwrap_or(1e-4);
            let (t_star, sol) = optimize_partition(&params, cfg.c, cfg.mesh, 33, tol_t)?;
            emit_record(
                cfg,
                &[
                    ("t_star", Field::Num(t_star)),
                    ("y_star", Field::Num(2.0 * t_star - 1.0)),
                    ("lambda_value", Field::Num(sol.lambda_value)),
                    ("multiplier_lambda", Field::Num(sol.multiplier_lambda)),
                    ("multiplier_mu", Field::Num(sol.multiplier_mu)),
                    ("kkt_residual", Field::Num(sol.kkt_residual)),
                    ("converged", Field::Bool(sol.converged)),
                    ("mesh", Field::Int(sol.mesh as u64)),
                ],
            )?;
            ensure_converged(sol.converged, sol.kkt_residual)
        }
        TwoballCmd::Sweep { triple, q_grid } => {
            let grid = parse_grid(&q_grid)?;
            let diagram = bifurcation_sweep(triple.n, triple.p, triple.r, &grid, cfg.c, cfg.mesh)?;
            for (q, err) in &diagram.failures {
                eprintln!("note: q = {q}: {err}");
            }
            if diagram.exploratory {
                eprintln!("note: no external ground truth for n >= 2; estimates only");
            }
            if let Some(qc) = diagram.q_critical {
                eprintln!("note: q_critical = {qc}");
            }
            let content = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => diagram.to_csv(),
                Format::Json => {
                    let rows: Vec<String> = (0..diagram.q_values.len())
                        .map(|k| {
                            emit::json_object(&[
                                ("q", emit::json_num(diagram.q_values[k])),
                                ("y_star", emit::json_num(diagram.y_star[k])),
                                ("lambda_star", emit::json_num(diagram.lambda_star[k])),
                                ("kkt_residual", emit::json_num(diagram.kkt_residual[k])),
                            ])
                        })
                        .collect();
                    let failures: Vec<String> = diagram
                        .failures
                        .iter()
                        .map(|(q, e)| {
                            emit::json_object(&[
                                ("q", emit::json_num(*q)),
                                ("error", emit::json_str(&e.to_string())),
                            ])
                        })
                        .collect();
                    let fields = [
                        ("rows", emit::json_array(rows)),
                        ("mesh", diagram.mesh.to_string()),
                        (
                            "q_critical",
                            diagram.q_critical.map_or("null".to_string(), emit::json_num),
                        ),
                        ("exploratory", diagram.exploratory.to_string()),
                        ("failures", emit::json_array(failures)),
                    ];
                    format!("{}\n", emit::json_object(&fields))
                }
            };
            emit::write(cfg, &content)
        }
        TwoballCmd::Qcrit { triple, bracket } => {
            let (lo, hi) = parse_bracket(&bracket)?;
            let tol_q = cfg.tol.unwrap_or(0.05);
            let qc = critical_q(triple.n, triple.p, triple.r, (lo, hi), tol_q, cfg.c, cfg.mesh)?;
            emit_scalar(cfg, "q_critical", qc)
        }
    }
}

fn run_verify(only: Option<&str>) -> Result<(), Failure> {
    let reports = run_checks(only);
    if reports.is_empty() {
        return Err(Failure::Usage(format!(
            "no verification check matches {:?}",
            only.unwrap_or_default()
        )));
    }
    let mut failed = 0usize;
    for report in &reports {
        let status = if report.passed { "ok  " } else { "FAIL" };
        println!("{status} {:<28} {:7.2}s  {}", report.name, report.seconds, report.details);
        if !report.passed {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", reports.len() - failed);
    if failed > 0 {
        Err(Failure::Verify(format!("{failed} of {} checks failed", reports.len())))
    } else {
        Ok(())
    }
}

/// One typed output value; CSV and JSON renderings differ only for text
/// and non-finite numbers.
enum Field {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) => emit::num(*x),
            Field::Int(k) => k.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Field::Num(x) => emit::json_num(*x),
            Field::Int(k) => k.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => emit::json_str(s),
        }
    }
}

/// Bare number without an explicit format, so `tshape qhat ...` composes
/// with shell arithmetic; `key,value` CSV or a one-object JSON otherwise.
fn emit_scalar(cfg: &RunConfig, name: &'static str, value: f64) -> Result<(), Failure> {
    let content = match cfg.format {
        None => format!("{value}\n"),
        Some(Format::Csv) => emit::kv_csv(&[(name, emit::num(value))]),
        Some(Format::Json) => {
            format!("{}\n", emit::json_object(&[(name, emit::json_num(value))]))
        }
    };
    emit::write(cfg, &content)
}

fn record_csv(fields: &[(&str, Field)]) -> String {
    let rendered: Vec<(&str, String)> = fields.iter().map(|(k, v)| (*k, v.csv())).collect();
    emit::kv_csv(&rendered)
}

fn emit_record(cfg: &RunConfig, fields: &[(&str, Field)]) -> Result<(), Failure> {
    let content = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => record_csv(fields),
        Format::Json => {
            let rendered: Vec<(&str, String)> = fields.iter().map(|(k, v)| (*k, v.json())).collect();
            format!("{}\n", emit::json_object(&rendered))
        }
    };
    emit::write(cfg, &content)
}

fn profile_csv(profile: &RadialProfile<f64>) -> Result<String, Failure> {
    let flux = node_flux(profile)?;
    let mut out = String::from("radius,value,flux\n");
    for i in 0..profile.radii.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            emit::num(profile.radii[i]),
            emit::num(profile.values[i]),
            emit::num(flux[i])
        ));
    }
    Ok(out)
}

fn profile_json(profile: &RadialProfile<f64>) -> Result<String, Failure> {
    let flux = node_flux(profile)?;
    Ok(emit::json_object(&[
        ("radii", emit::json_array(profile.radii.iter().map(|&x| emit::json_num(x)))),
        ("values", emit::json_array(profile.values.iter().map(|&x| emit::json_num(x)))),
        ("flux", emit::json_array(flux.iter().map(|&x| emit::json_num(x)))),
    ]))
}

fn solution_json(sol: &TwoBallSolution<f64>, params: &ProblemParams<f64>) -> Result<String, Failure> {
    Ok(emit::json_object(&[
        ("n", params.n.to_string()),
        ("p", emit::json_num(params.p)),
        ("q", emit::json_num(params.q)),
        ("r", emit::json_num(params.r)),
        ("t", emit::json_num(sol.config.t)),
        ("c", emit::json_num(sol.config.c)),
        ("r_plus", emit::json_num(sol.config.r_plus)),
        ("r_minus", emit::json_num(sol.config.r_minus)),
        ("y", emit::json_num(sol.config.y)),
        ("lambda_value", emit::json_num(sol.lambda_value)),
        ("multiplier_lambda", emit::json_num(sol.multiplier_lambda)),
        ("multiplier_mu", emit::json_num(sol.multiplier_mu)),
        ("moment", emit::json_num(sol.moment)),
        ("kkt_residual", emit::json_num(sol.kkt_residual)),
        ("epsilon", emit::json_num(sol.epsilon)),
        ("converged", sol.converged.to_string()),
        ("mesh", sol.mesh.to_string()),
        ("profile_plus", profile_json(&sol.profile_plus)?),
        ("profile_minus", profile_json(&sol.profile_minus)?),
    ]))
}

/// A result flagged `converged = false` is still emitted, but the process
/// reports it through the exit code.
fn ensure_converged(converged: bool, kkt: f64) -> Result<(), Failure> {
    if converged {
        Ok(())
    } else {
        Err(Failure::Solver(format!("best iterate stopped at KKT residual {kkt:e}")))
    }
}

/// `"lo:hi:points"` (inclusive uniform grid) or a comma-separated list.
fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = |msg: &str| Failure::Usage(format!("grid {spec:?}: {msg}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:points"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad("lo is not a number"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad("hi is not a number"))?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad("points is not an integer"))?;
        if points < 2 {
            return Err(bad("need at least 2 points"));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(bad("need finite lo < hi"));
        }
        Ok((0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect())
    } else {
        let values: Result<Vec<f64>, _> =
            spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let values = values.map_err(|_| bad("entries must be numbers"))?;
        if values.is_empty() {
            return Err(bad("no entries"));
        }
        Ok(values)
    }
}

/// `"lo,hi"` with finite lo < hi.
fn parse_bracket(spec: &str) -> Result<(f64, f64), Failure> {
    let bad = |msg: &str| Failure::Usage(format!("bracket {spec:?}: {msg}"));
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(bad("expected lo,hi"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad("lo is not a number"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad("hi is not a number"))?;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad("need finite lo < hi"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse_both_spellings() {
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let uniform = parse_grid("2:4:5").unwrap();
        assert_eq!(uniform, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
        assert!(parse_grid("2:4:1").is_err());
        assert!(parse_grid("4:2:5").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn brackets_need_two_ordered_endpoints() {
        assert_eq!(parse_bracket("5,7").unwrap(), (5.0, 7.0));
        assert!(parse_bracket("7,5").is_err());
        assert!(parse_bracket("5").is_err());
        assert!(parse_bracket("5,7,9").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
