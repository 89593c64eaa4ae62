use alloc::string::String;

/// Crate-wide result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter failed validation. `field` names the offending input so
    /// front ends can point at the exact scenario key.
    #[error("invalid {field}: {message}")]
    InvalidField {
        field: &'static str,
        message: String,
    },

    /// The requested quantity only exists for ON-OFF strategies.
    #[error("operation is only defined for ON-OFF strategies")]
    NotOnOff,

    /// The measurement window would include sessions still ramping up.
    #[error(
        "warmup of {warmup} s is shorter than the longest possible session \
         download of {required} s; raise warmup or allow short warmups explicitly"
    )]
    WarmupTooShort { warmup: f64, required: f64 },

    /// Strategy comparison requires a level playing field.
    #[error("compared strategies must share a common on_rate")]
    MismatchedOnRate,

    /// Nothing to aggregate.
    #[error("cannot pool an empty set of replications")]
    EmptyPool,
}

impl Error {
    pub(crate) fn field(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            message: message.into(),
        }
    }
}
