use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element has rank {found}, order expects rank {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("element kind does not match the order ({0})")]
    KindMismatch(&'static str),

    #[error("the order has no least positive element")]
    NoLeastPositive,

    #[error("element {0} is not strictly positive")]
    NotPositive(String),

    #[error("point {re}+{im}i is not strictly inside the unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("tail bound {tail:e} exceeds tolerance {tol:e}; increase the truncation")]
    TailTooLarge { tail: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
