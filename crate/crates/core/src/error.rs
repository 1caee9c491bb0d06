use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The coupling matrix is numerically singular at this probe frequency,
    /// typically a lossless dark pole.
    #[error("singular coupling matrix at delta_omega = {delta_omega} (condition estimate {condition:.3e})")]
    SingularMatrix { delta_omega: f64, condition: f64 },

    /// A multiple-scattering denominator vanished (lossless standing-wave pole).
    #[error("resonant divergence at delta_omega = {delta_omega}")]
    ResonantDivergence { delta_omega: f64 },

    #[error("eigenchannel expansion unavailable: eigenbasis is near-defective")]
    ModalUnavailable,

    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("dispersion pole: cos(Kd) = cos(kd) at kd = {kd}, Kd = {bloch}")]
    DispersionPole { kd: f64, bloch: f64 },

    #[error("band gap diverges at Bragg phase kd = {kd}")]
    BraggDivergence { kd: f64 },

    #[error("no window with R >= {threshold} in [{lo}, {hi}]")]
    NoWindow { threshold: f64, lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.into(), reason: reason.into() }
    }

    /// True for failures caused by probing exactly on a pole; a small frequency
    /// nudge is expected to clear them.
    pub fn is_singular_probe(&self) -> bool {
        matches!(self, Error::SingularMatrix { .. } | Error::ResonantDivergence { .. })
    }
}
