use thiserror::Error;

/// Every failure the pipeline can report.
///
/// `kind()` gives the stable machine-readable tag used by the CLI and the
/// scan log.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular curve: discriminant is zero")]
    SingularCurve,

    #[error("composite cofactor with {digits} digits could not be factored within the effort bound")]
    FactorTooHard { digits: usize },

    #[error("bad reduction at p = {p}")]
    BadReduction { p: u64 },

    #[error("{m} terms needed but the budget is {max_terms}")]
    BudgetExceeded { m: u64, max_terms: u64 },

    #[error("L(E,1) is numerically zero; apparent positive analytic rank")]
    ApparentPositiveRank,

    #[error("analytic Sha {value} is not a perfect square (residual {residual:.3e})")]
    NotASquare { value: String, residual: f64 },

    #[error("isogeny class inconsistent: {0}")]
    ClassInconsistent(String),

    #[error("degenerate family parameters n = {n}, p = {p}")]
    DegenerateParameters { n: u32, p: i64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularCurve => "singular-curve",
            Error::FactorTooHard { .. } => "unfactored",
            Error::BadReduction { .. } => "bad-reduction",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::ApparentPositiveRank => "apparent-positive-rank",
            Error::NotASquare { .. } => "not-a-square",
            Error::ClassInconsistent(_) => "class-inconsistent",
            Error::DegenerateParameters { .. } => "degenerate-parameters",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
