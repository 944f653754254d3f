//! Jacobi predictor-corrector solver for `D^{α,λ} u = f(t, u)`, 0 < α ≤ 2.
//!
//! The problem is rewritten as the Volterra equation
//!
//! ```text
//! u(t) = e^{-λt} Σ a_k(t) + e^{-λt}/Γ(α) ∫_a^t (t-s)^{α-1} e^{λs} f(s, u(s)) ds
//! ```
//!
//! and at every grid point the memory integral is evaluated with the
//! Jacobi–Gauss–Lobatto rule for the weight `(1-z)^{α-1}`. The integrand at
//! the quadrature nodes is obtained by Lagrange interpolation of stored
//! `f(t_j, u_j)` values on `N_I` neighbouring grid nodes, so the cost per step
//! does not grow with the step index.

mod examples;
mod interp;
mod problem;
mod start;
mod step;

pub use examples::{exact_example2, exact_example3, example2_problem, example3_problem};
pub use interp::interpolate_f;
pub use problem::{
    volterra_forcing, DerivativeKind, ExactFn, Problem, Rhs, SolutionTrace, SolverConfig, SolverError, StartMode,
    BLOW_UP_THRESHOLD,
};
pub use start::starting_values;
pub use step::{jpc_step, solve, solve_split};
