//! Atom-array mirrors in a one-dimensional waveguide.
//!
//! Single-photon reflection and transmission of a chain of two-level emitters
//! coupled to a waveguide, computed by four independent engines, together with
//! collective eigenmodes, infinite-chain band structure and spectral analysis
//! of high-reflectivity windows.

pub mod analysis;
pub mod classical;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod model;
pub mod scatter;

pub use error::{Error, Result};
pub use model::{ChainSpec, Emitter, EmitterChain, FrequencyGrid, PhaseModel, Reference};
pub use scatter::{Engine, MirrorCoefficients, ScatterPoint, SingularPolicy, Spectrum};
