use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge within {iterations} iterations")]
    IterationLimit {
        what: &'static str,
        iterations: usize,
    },

    #[error("frame is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("{classes} classes cannot embed in a {dim}-dimensional space")]
    TooManyClasses { classes: usize, dim: usize },

    #[error("class {class} has {size} samples, at least {min} required")]
    ClassTooSmall {
        class: usize,
        size: usize,
        min: usize,
    },

    #[error("dataset needs at least two classes")]
    SingleClass,

    #[error("Gram matrix retains rank {retained}, need at least {required}")]
    DegenerateGram { retained: usize, required: usize },

    #[error("no sign change found while bracketing the multiplier of class {class}")]
    BracketFailure { class: usize },

    #[error("dense eigenproblem of size {size} exceeds the budget of {budget}")]
    BudgetExceeded { size: usize, budget: usize },

    #[error("requested {requested} components but only {available} are available")]
    RankDeficient { requested: usize, available: usize },
}
