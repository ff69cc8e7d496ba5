//! Numerical core for the resonance-correlation approach to small gaps
//! between consecutive zeros of the Riemann zeta function.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`arithfn`] sieves the arithmetic functions (von Mangoldt, Liouville,
//!   generalized divisor function) and the Dirichlet coefficients `g_h(k)`.
//! * [`quadrature`] provides adaptive Gauss-Legendre integration, including the
//!   nested simplex integrals with a `v^(ell^2 - 1)` endpoint weight.
//! * [`bound`] evaluates the limiting gap functional and searches for the
//!   smallest certified normalized gap `phi*`.
//! * [`optimize`] runs a Nelder-Mead search over polynomial weights.
//! * [`oracle`] evaluates the finite Dirichlet sums exactly and compares them
//!   with the asymptotic integral formula.
//! * [`zeros`] ingests tables of zero ordinates and computes empirical gap
//!   statistics.

pub mod arithfn;
pub mod bound;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod sum;
pub mod zeros;

pub use arithfn::{ArithError, ArithTables, GhCoefficient};
pub use bound::{
    eval_i_f, eval_m, gap_lower_bound, minimize_phi, BoundError, BoundParams, GapBoundResult,
    MTerms, PhiScan, PhiSearch, WeightPolynomial,
};
pub use optimize::{optimize_weights, SearchReport, SearchSpec};
pub use oracle::{OracleError, OracleInstance, OracleResult, ResonatorMode};
pub use quadrature::{QuadError, QuadResult};
pub use zeros::{GapStats, ZeroTable, ZeroTableError};
