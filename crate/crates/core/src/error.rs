use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
    #[error("p = 2 is not supported; the modulus must be an odd prime power")]
    EvenPrimeRejected,
    #[error("p^r = {p}^{r} exceeds the cap {cap}")]
    Overflow { p: u64, r: u32, cap: u64 },
    #[error("zero vector has no primitive part")]
    ZeroVector,
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("{x} is not a unit modulo {q}")]
    NotAUnit { x: u64, q: u64 },
    #[error("coefficient {coefficient} is divisible by p = {p}")]
    CoefficientDivisibleByP { coefficient: i64, p: u64 },
    #[error("base point is not a solution modulo p^{level}")]
    BaseNotASolution { level: u32 },
    #[error("search space of size {size} exceeds the budget {budget}")]
    SearchSpaceTooLarge { size: u128, budget: u128 },
    #[error("invalid polynomial system: {0}")]
    InvalidPolySystem(String),
    #[error("operation requires p = 3 (mod 4), got p = {p}")]
    WrongResidueClass { p: u64 },
    #[error("smoothness hypothesis violated: {0}")]
    SmoothnessViolated(String),
    #[error("radius {j} is not a unit modulo {q}")]
    NonUnitRadius { j: u64, q: u64 },
    #[error("table size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("degree {degree} is divisible by p = {p}")]
    DegreeDivisibleByP { degree: u32, p: u64 },
    #[error("frequency pair (m, s) is zero")]
    ZeroFrequencyPair,
    #[error("orbit carrier is isotropic (norm of primitive part divisible by p)")]
    IsotropicOrbit,
    #[error("point sets live over different moduli or arities")]
    ModulusMismatch,
    #[error("ambient arity {0} is odd; rectangles need an even split")]
    OddArity(usize),
    #[error("pinned point is not a member of the set")]
    PinNotInSet,
    #[error("operation requires arity {expected}, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("projection level {level} outside 1..={r}")]
    BadLevel { level: u32, r: u32 },
    #[error("-1 has no {k}-th root modulo {p}")]
    NoKthRootOfMinusOne { k: u32, p: u64 },
    #[error("parameter l = {l} must satisfy 1 <= l < p/2 (p = {p})")]
    BadL { l: u64, p: u64 },
    #[error("C = {c} does not divide p + 1 = {p_plus_one}")]
    DivisibilityFailed { c: u64, p_plus_one: u64 },
    #[error("unsupported construction branch: {0}")]
    UnsupportedBranch(String),
    #[error("work estimate {size} exceeds the budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("invalid tree shape: {0}")]
    InvalidTree(String),
    #[error("unknown verification id `{0}`")]
    UnknownVerification(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
