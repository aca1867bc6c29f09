use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter set or configuration broke one of its invariants.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The molecular susceptibility is singular (ω = ω₀ with no dephasing).
    #[error("susceptibility pole at omega = {omega} eV (gammaPhi = 0)")]
    Pole { omega: f64 },

    /// A field norm exceeded the blow-up threshold during integration.
    #[error("integration became unstable at t = {time} fs (|{field}| = {norm:e})")]
    Instability {
        time: f64,
        field: &'static str,
        norm: f64,
    },

    /// A record does not carry a field an observable needs.
    #[error("record has no field named `{0}`")]
    MissingField(String),

    /// Weighted moments were requested on a snapshot with no weight.
    #[error("snapshot {snapshot} has zero total weight")]
    EmptyWeight { snapshot: usize },

    /// A spatial fit range was too short or held non-positive values.
    #[error("fit range rejected: {0}")]
    FitRange(String),

    /// A least-squares line fit had no usable spread in its data.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Array lengths did not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        what,
        reason: reason.into(),
    }
}
