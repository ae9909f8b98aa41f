//! Numerical toolkit for the twisted `p,q,r` eigenvalue problem on pairs of
//! balls.
//!
//! The quantity of interest is the twisted Rayleigh quotient
//! `‖∇u‖_p / ‖u‖_q` minimized over functions that vanish on the domain
//! boundary and satisfy the moment constraint `∫ |u|^{r-2} u = 0`. Over
//! domains of fixed volume the optimal shape is a pair of disjoint balls,
//! which reduces everything to one-dimensional radial computations:
//!
//! * [`params`] — exponent bookkeeping: admissibility, the critical Sobolev
//!   exponent, the curvature coefficient of the reduced functional, the
//!   threshold exponent `q_hat`, and unit-ball geometry in dimension `n`.
//! * [`reduced`] — the closed-form reduced functional `F(y)` over the
//!   dilation-family of ball pairs, its minimization in the asymmetry
//!   coordinate `y`, and threshold location within that family.
//! * [`radial`] — radial ground states of the p-Laplace equation on a ball
//!   by shooting in the flux variable, rescaling, quotients, and residuals.
//! * [`twoball`] — the genuine two-ball minimizer: constrained optimization
//!   over free radial profiles on both balls, partition optimization, and
//!   bifurcation sweeps tracking where the optimal pair stops being equal.
//! * [`verify`] — self-contained acceptance checks wired into both the
//!   `acceptance` test target and the CLI `verify` subcommand.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the aliases below fix `f64`, which every documented tolerance assumes.

pub mod error;
pub mod opt;
pub mod params;
pub mod radial;
pub mod reduced;
pub mod scalar;
pub mod twoball;
pub mod verify;

pub use error::CoreError;
pub use scalar::Real;

/// `f64` problem parameters; the default working type.
pub type ProblemParams64 = params::ProblemParams<f64>;
/// `f32` problem parameters, for callers that trade accuracy for size.
pub type ProblemParams32 = params::ProblemParams<f32>;
/// `f64` unit-ball geometry.
pub type GeometryConstants64 = params::GeometryConstants<f64>;
/// `f64` reduced-functional minimum.
pub type ReducedMinimum64 = reduced::ReducedMinimum<f64>;
/// `f64` radial profile.
pub type RadialProfile64 = radial::RadialProfile<f64>;
/// `f64` ground state.
pub type GroundState64 = radial::GroundState<f64>;
/// `f64` two-ball configuration.
pub type TwoBallConfig64 = twoball::TwoBallConfig<f64>;
/// `f64` two-ball solution.
pub type TwoBallSolution64 = twoball::TwoBallSolution<f64>;
/// `f64` bifurcation diagram.
pub type BifurcationDiagram64 = twoball::BifurcationDiagram<f64>;
