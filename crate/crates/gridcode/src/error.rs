use thiserror::Error;

/// Errors produced by code construction, decoding, and IO.
#[derive(Debug, Error)]
pub enum Error {
    /// An input parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The colour count does not fit the one-byte-per-cell storage.
    #[error("colour byte overflow: k = {k} exceeds 255")]
    ColourByteOverflow { k: u64 },

    /// The instance would allocate more cells than the configured budget.
    #[error("instance too large: {cells} cells exceed the budget of {budget}")]
    InstanceTooLarge { cells: u128, budget: u64 },

    /// A verification scan would examine more items than the configured cap.
    #[error("verification cap exceeded: {needed} items exceed the cap of {cap}")]
    CapExceeded { needed: u128, cap: u64 },

    /// No window of the code realizes the queried value.
    #[error("no such window")]
    NoSuchWindow,

    /// A colour multiset does not sum to the window volume.
    #[error("inconsistent total: expected {expected}, got {got}")]
    InconsistentTotal { expected: u64, got: u64 },

    /// A serialized grid or multiset file violates its format.
    #[error("format violation: {0}")]
    FormatViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
