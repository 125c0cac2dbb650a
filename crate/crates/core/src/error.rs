//! Crate-wide error type for lattice, storage, transform, and check
//! operations. Series-level arithmetic has its own error enum in
//! [`crate::genus_series`] and converts into this one.

use thiserror::Error;

use crate::genus_series::SeriesError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),

    #[error("rank mismatch: class has {got} coordinates, lattice has rank {expected}")]
    RankMismatch { expected: usize, got: usize },

    #[error("operands belong to different presets: {left} vs {right}")]
    PresetMismatch { left: String, right: String },

    #[error("exponential argument has a nonzero term at the zero class")]
    NonNilpotentArgument,

    #[error("logarithm argument does not have constant term 1 at the zero class")]
    NonUnitConstantTerm,

    #[error("cannot parse rational `{input}`: {reason}")]
    RationalParse { input: String, reason: String },

    #[error("dataset schema error in `{field}`: {detail}")]
    Schema { field: String, detail: String },

    #[error("missing invariant {kind} at class {class} genus {genus}")]
    MissingInvariant {
        kind: String,
        class: String,
        genus: i64,
    },

    #[error("missing stationary invariant (h={h}, a={a:?}, m={m}, d={d})")]
    MissingStationary { h: i64, a: Vec<i64>, m: i64, d: i64 },

    #[error("class has tangency {0} against the anticanonical divisor; expected > 0")]
    ZeroTangency(i64),

    #[error("series is not in the image of the multiple-cover resummation: residual at class {class}, h^2-power {upow}")]
    NotInImage { class: String, upow: i64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn schema(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            detail: detail.into(),
        }
    }
}
