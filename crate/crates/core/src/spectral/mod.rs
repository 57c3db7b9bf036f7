//! Singular values, rank, compactness and approximation numbers of truncated
//! Hankel operators.

pub mod aak;
pub mod compactness;
pub mod family;
pub mod kronecker;
pub mod nehari;
pub mod norms;
pub mod svd;

pub use aak::{aak_approximate, aak_approximate_with, AakOptions, AakResult, AakStrategy};
pub use compactness::{compactness_witness, CompactnessReport, Verdict};
pub use family::{CircleTruncations, GroupTruncations, TruncationFamily};
pub use kronecker::{kronecker_check, KroneckerReport};
pub use nehari::{nehari_distance_lower, NehariReport};
pub use norms::{besov_quasinorm, nuclear_bound_check, schatten_norm, BesovEstimate, NuclearReport};
pub use svd::{decompose, numerical_rank, operator_norm, singular_values, svd_report, Decomposition, SpectralReport};
