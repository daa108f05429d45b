use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular linear system")]
    Singular,
    #[error("linear solve residual {0:e} above tolerance")]
    Residual(f64),
    #[error("mapping is not surjective: abstract state {0} has an empty block")]
    NotSurjective(usize),
    #[error("ground state {state} is not inside block {block}")]
    OutsideBlock { state: usize, block: usize },
    #[error("predecessor {pred} equals block {block}; only distinct or start predecessors are valid")]
    InvalidTuple { pred: usize, block: usize },
    #[error("degenerate self-loop for tuple ({pred}, {block}, {action})")]
    DegenerateSelfLoop {
        pred: usize,
        block: usize,
        action: usize,
    },
    #[error("occupancy kind mismatch: expected {expected}")]
    KindMismatch { expected: &'static str },
    #[error("option enumeration needs {count} candidates, above the cap of {cap}; undecided at this scale")]
    EnumerationCap { count: f64, cap: f64 },
    #[error("target inversion infeasible; minimal feasible gamma_bar is {min_gamma_bar}")]
    InversionInfeasible { min_gamma_bar: f64 },
    #[error("entry distribution puts mass on state {0}, which is not an entry")]
    SupportOutsideEntries(usize),
    #[error("option initiation ({pred}, {block}) does not match ({want_pred}, {want_block})")]
    InitiationMismatch {
        pred: usize,
        block: usize,
        want_pred: usize,
        want_block: usize,
    },
    #[error("abstract value target {target} exceeds current value {current} or leaves [0, 1/(1-gamma)]")]
    TargetOutOfRange { target: f64, current: f64 },
    #[error("linear program hit the iteration cap of {0}")]
    IterationCap(usize),
    #[error("realizer queried before enough samples were collected")]
    NotReady,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
