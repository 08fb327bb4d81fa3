//! Physical constants (CODATA 2018) and the dimensionless coefficient layer.
//!
//! Every headline coefficient of the model is a closed form in π and
//! ln(4/e).  They are kept symbolic here — computed from `f64::consts`
//! rather than typed in as decimals — so that the exact ratio identities
//! between them hold to machine precision:
//!
//! ```text
//! noise_per_stiffness_normal = noise_geometry_coeff / spring_geometry_coeff
//!                            = 2 · damping_per_stiffness_normal · k_B T / ħ-units
//! ```

use std::f64::consts::{LN_2, PI};

/// Reduced Planck constant, J·s (CODATA 2018, exact by definition).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (CODATA 2018, exact by definition).
pub const K_B: f64 = 1.380_649e-23;

/// Fixed physical constants used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
}

/// The CODATA 2018 values. There is deliberately no other constructor.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants { hbar: HBAR, k_b: K_B };

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

/// ln(4/e) = 2 ln 2 − 1, the constant produced by the Debye frequency average.
#[inline]
pub fn ln_4_over_e() -> f64 {
    2.0 * LN_2 - 1.0
}

/// 9 ln(4/e)/10 — Debye-averaged cross-expectation coefficient:
/// ⟨q_a q_b⟩ᵃᵛ = coeff · ħβ/ω_D.
#[inline]
pub fn debye_cross_average_coeff() -> f64 {
    0.9 * ln_4_over_e()
}

/// 9π/20 — Debye-averaged low-frequency pair-noise coefficient:
/// Sᵃᵛ(ω→0) = coeff · ħ²/ω_D.
#[inline]
pub fn debye_dc_noise_coeff() -> f64 {
    0.45 * PI
}

/// 3 ln(4/e) π²/10 — sphere-over-half-space total force coefficient.
#[inline]
pub fn force_geometry_coeff() -> f64 {
    0.3 * ln_4_over_e() * PI * PI
}

/// 6 ln(4/e) π²/5 — sphere-over-half-space spring-constant coefficient
/// (= 4 × the force coefficient, from ∂G_f/∂h = −4 G_k).
#[inline]
pub fn spring_geometry_coeff() -> f64 {
    1.2 * ln_4_over_e() * PI * PI
}

/// 27π³/100 — sphere-over-half-space force-noise coefficient
/// (normal component).
#[inline]
pub fn noise_geometry_coeff() -> f64 {
    0.27 * PI * PI * PI
}

/// 9π/(40 ln(4/e)) — temperature-independent force noise per unit of
/// (negative) spring-constant shift, normal geometry: δS_f = coeff · ħ (−δk).
#[inline]
pub fn noise_per_stiffness_normal() -> f64 {
    9.0 * PI / (40.0 * ln_4_over_e())
}

/// 9π/(80 ln(4/e)) — damping shift per unit of (−δk), normal geometry:
/// δ(mω₀/Q) = coeff · (ħ/k_B T)(−δk).
#[inline]
pub fn damping_per_stiffness_normal() -> f64 {
    4.5 * PI / (40.0 * ln_4_over_e())
}

/// 3π/(160 ln(4/e)) — force noise per unit of δk·(l/h), transverse
/// (end-on) geometry.
#[inline]
pub fn noise_per_stiffness_transverse() -> f64 {
    3.0 * PI / (160.0 * ln_4_over_e())
}

/// 3π/(320 ln(4/e)) — damping shift per unit of δk·(l/h)/(k_B T),
/// transverse geometry.
#[inline]
pub fn damping_per_stiffness_transverse() -> f64 {
    1.5 * PI / (160.0 * ln_4_over_e())
}
