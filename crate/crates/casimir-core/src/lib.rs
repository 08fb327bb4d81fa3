//! Zero-temperature Casimir force fluctuations for force microscopy.
//!
//! The crate computes, from a microscopic damped-quantum-oscillator model
//! upward, the temperature-independent force noise and companion damping
//! shift that accompany a measured spring-constant change as a microscope
//! tip approaches a sample:
//!
//! * [`specfun`] — the exponential integral g(z) = ∫₀^∞ cos t/(t+z) dt, the
//!   thermal noise kernel, and the adaptive-quadrature / Monte Carlo
//!   engines shared by everything else;
//! * [`oscillator`] — one damped quantum oscillator in an
//!   independent-oscillator bath: autocorrelations, spectra, band power;
//! * [`pair`] — the coupled pair: cross-expectation ⟨q_aq_b⟩, the exact
//!   normal-mode oracle, and the factorized pair-noise spectrum;
//! * [`ensemble`] — Debye (or tabulated) frequency averaging;
//! * [`geometry`] — pairwise force/spring/noise tensors, the closed-form
//!   sphere-over-half-space totals with Monte Carlo oracles, and the
//!   cantilever mode length;
//! * [`predict`] — the experiment-facing noise and damping predictions;
//! * [`simulate`] — a time-domain Brownian-motion simulator with the
//!   autocorrelation-fit measurement pipeline;
//! * [`verify`] — every closed form cross-checked against its independent
//!   numerical oracle.
//!
//! All interface units are SI; atomic-scale correlations carry explicit
//! factors of ħ.

pub mod constants;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod oscillator;
pub mod pair;
pub mod predict;
pub mod quad;
pub mod simulate;
pub mod specfun;
pub mod verify;

pub use constants::{PhysicalConstants, CODATA_2018, HBAR, K_B};
pub use ensemble::SpectralDistribution;
pub use error::{Error, Result};
pub use geometry::{
    DipoleCoupling, ForceNoiseTensor, MaterialSpec, ModeShape, TipSampleGeometry,
};
pub use oscillator::{CorrelationConvention, OscillatorSpec};
pub use pair::PairSpec;
pub use predict::{CantileverParams, GeometryPrediction, PredictionResult, VibrationMode};
pub use quad::{McRegion, QuadratureSettings};
pub use simulate::{FitResult, SimulationConfig, TimeSeries};
pub use specfun::ComplexValue;
pub use verify::{Check, Suite, VerifyOptions};
