use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    SpecFun(#[from] crate::specfun::SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] crate::quadrature::QuadratureError),
    #[error(transparent)]
    Ops(#[from] crate::ops::OpsError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
    #[error(transparent)]
    Config(#[from] crate::harness::ConfigError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}
