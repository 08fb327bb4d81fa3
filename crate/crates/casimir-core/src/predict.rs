//! Experiment-facing layer: the thermal measurement relations and the
//! headline Casimir noise/damping predictions, plus the end-to-end chain
//! from tip-sample geometry to observables.
//!
//! Sign conventions follow the measurements: for tip vibration normal to
//! the sample the spring constant softens on approach (δk ≤ 0) and the
//! force noise rises by 9π/(40 ln(4/e))·ħ·(−δk); in the end-on (transverse)
//! geometry δk ≥ 0 and the noise rises by 3π/(160 ln(4/e))·(l/h)·ħ·δk.
//! Both damping shifts are δS_f/(2k_BT) — the fluctuation-dissipation
//! closure — so they grow as temperature falls.

use crate::constants::{
    damping_per_stiffness_normal, damping_per_stiffness_transverse, noise_per_stiffness_normal,
    noise_per_stiffness_transverse, HBAR, K_B,
};
use crate::error::{Error, Result};
use crate::geometry::{
    any_transverse, mode_length, total_force, total_noise, total_spring, MaterialSpec, ModeShape,
    TipSampleGeometry,
};
use crate::quad::QuadratureSettings;
use serde::{Deserialize, Serialize};

/// Cantilever parameters as measured; the spring constant is derived,
/// k = mω₀².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantileverParams {
    pub mass: f64,
    pub omega0: f64,
    pub quality: f64,
    pub temperature: f64,
}

impl CantileverParams {
    pub fn new(mass: f64, omega0: f64, quality: f64, temperature: f64) -> Result<Self> {
        let p = CantileverParams { mass, omega0, quality, temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("omega0", self.omega0),
            ("quality", self.quality),
            ("temperature", self.temperature),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!("cantilever {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Spring constant k = mω₀².
    pub fn spring_constant(&self) -> f64 {
        self.mass * self.omega0 * self.omega0
    }

    /// Damping coefficient mω₀/Q.
    pub fn damping_coefficient(&self) -> f64 {
        self.mass * self.omega0 / self.quality
    }
}

/// Predicted Casimir shifts of the measured quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    /// Spring-constant shift δk, N/m (carries its physical sign).
    pub delta_k: f64,
    /// Force-noise increase δS_f, N²/Hz.
    pub delta_sf: f64,
    /// √δS_f, N/√Hz.
    pub sqrt_delta_sf: f64,
    /// Damping increase δ(mω₀/Q), kg/s; `None` when no temperature given.
    pub delta_damping: Option<f64>,
}

/// Thermal force noise of the cantilever: S_f = (mω₀/Q)·2k_BT.
pub fn thermal_force_psd(params: &CantileverParams) -> f64 {
    params.damping_coefficient() * 2.0 * K_B * params.temperature
}

/// Equipartition mean-square displacement ⟨x²⟩ = k_BT/k.
pub fn equipartition_x2(params: &CantileverParams) -> f64 {
    K_B * params.temperature / params.spring_constant()
}

/// Temperature-independent Casimir force noise for normal-geometry approach:
/// δS_f = 9π/(40 ln(4/e)) · ħ · (−δk), requiring δk ≤ 0.
pub fn casimir_noise_normal(delta_k: f64) -> Result<f64> {
    casimir_noise_normal_with_coefficient(delta_k, noise_per_stiffness_normal())
}

/// [`casimir_noise_normal`] with the dimensionless prefactor overridden.
/// The default descends from the Debye frequency average; it is an
/// order-unity number whose exact value depends on material properties and
/// tip shape, so experiments may calibrate their own.
pub fn casimir_noise_normal_with_coefficient(delta_k: f64, coefficient: f64) -> Result<f64> {
    if !(coefficient > 0.0) || !coefficient.is_finite() {
        return Err(Error::InvalidSpec(format!("coefficient must be positive, got {coefficient}")));
    }
    if !(delta_k <= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "normal geometry requires delta_k <= 0 (spring softens on approach), got {delta_k}"
        )));
    }
    // + 0.0 keeps a delta_k of zero from producing negative zero.
    Ok(coefficient * HBAR * (-delta_k) + 0.0)
}

/// Damping increase accompanying [`casimir_noise_normal`]:
/// δ(mω₀/Q) = δS_f/(2k_BT); grows as 1/T and diverges at T = 0, where the
/// leading-order model breaks down.
pub fn casimir_damping_normal(delta_k: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidSpec(
            "damping prediction diverges at T = 0; temperature must be positive".into(),
        ));
    }
    if !(delta_k <= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "normal geometry requires delta_k <= 0, got {delta_k}"
        )));
    }
    Ok(damping_per_stiffness_normal() * HBAR / (K_B * temperature) * (-delta_k) + 0.0)
}

/// Casimir force noise for the end-on (transverse) geometry:
/// δS_f = 3π/(160 ln(4/e)) · (l/h) · ħ · δk, requiring δk ≥ 0.
pub fn casimir_noise_transverse(delta_k: f64, mode_l: f64, gap: f64) -> Result<f64> {
    casimir_noise_transverse_with_coefficient(delta_k, mode_l, gap, noise_per_stiffness_transverse())
}

/// [`casimir_noise_transverse`] with the order-unity prefactor overridden.
pub fn casimir_noise_transverse_with_coefficient(
    delta_k: f64,
    mode_l: f64,
    gap: f64,
    coefficient: f64,
) -> Result<f64> {
    if !(coefficient > 0.0) || !coefficient.is_finite() {
        return Err(Error::InvalidSpec(format!("coefficient must be positive, got {coefficient}")));
    }
    if !(delta_k >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "end-on geometry yields delta_k >= 0, got {delta_k}"
        )));
    }
    if !(mode_l > 0.0) || !(gap > 0.0) {
        return Err(Error::InvalidSpec("mode length and gap must be positive".into()));
    }
    Ok(coefficient * (mode_l / gap) * HBAR * delta_k + 0.0)
}

/// Damping increase accompanying [`casimir_noise_transverse`]; equals
/// exactly the noise divided by 2k_BT.
pub fn casimir_damping_transverse(delta_k: f64, mode_l: f64, gap: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidSpec(
            "damping prediction diverges at T = 0; temperature must be positive".into(),
        ));
    }
    if !(delta_k >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "end-on geometry yields delta_k >= 0, got {delta_k}"
        )));
    }
    if !(mode_l > 0.0) || !(gap > 0.0) {
        return Err(Error::InvalidSpec("mode length and gap must be positive".into()));
    }
    Ok(damping_per_stiffness_transverse() * HBAR / (K_B * temperature) * (mode_l / gap) * delta_k)
}

/// Tip vibration direction relative to the sample.
#[derive(Debug, Clone, PartialEq)]
pub enum VibrationMode {
    /// Vibration along the surface normal.
    Normal,
    /// Vibration in the sample plane; the Casimir force stiffens the mode
    /// through the cantilever shape, δk = f/l.
    Transverse(ModeShape),
}

/// Prediction chained from geometry, with an advisory when the small-gap
/// coefficient is being applied outside its regime.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryPrediction {
    pub result: PredictionResult,
    /// Set when h/r > 0.1 in the transverse mode: the (l/h) form assumes
    /// h ≪ r.
    pub aspect_warning: Option<String>,
}

/// End-to-end chain from tip-sample geometry to the measured observables.
///
/// Normal mode: δk is the nn-component of the total spring tensor and δS_f
/// follows the exact noise/stiffness proportionality (identical to the
/// tensor's nn-component for every r, h). Transverse mode: δk = |f|/l with
/// l from the mode shape, and δS_f is the transverse eigenvalue of the
/// noise tensor — compare with [`casimir_noise_transverse`] to read off the
/// finite-gap deviation from the small-gap coefficient.
pub fn predict_from_geometry(
    geom: &TipSampleGeometry,
    material: &MaterialSpec,
    vibration: &VibrationMode,
    temperature: Option<f64>,
    settings: &QuadratureSettings,
) -> Result<GeometryPrediction> {
    if let Some(t) = temperature {
        if !(t > 0.0) {
            return Err(Error::InvalidSpec("temperature must be positive when given".into()));
        }
    }
    let n = geom.normal();
    let (delta_k, delta_sf, warning) = match vibration {
        VibrationMode::Normal => {
            let k = total_spring(geom, material, settings)?;
            let mut knn = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    knn += n[i] * k[i][j] * n[j];
                }
            }
            (knn, casimir_noise_normal(knn)?, None)
        }
        VibrationMode::Transverse(shape) => {
            let l = mode_length(shape)?;
            let f = total_force(geom, material, settings)?;
            let fmag = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt();
            let delta_k = fmag / l;
            let noise = total_noise(geom, material)?;
            let t = any_transverse(&n);
            let warn = if geom.gap / geom.radius > 0.1 {
                Some(format!(
                    "h/r = {:.3} exceeds 0.1; the small-gap (l/h) coefficient does not apply",
                    geom.gap / geom.radius
                ))
            } else {
                None
            };
            (delta_k, noise.component(&t, &t), warn)
        }
    };
    let delta_damping = temperature.map(|t| delta_sf / (2.0 * K_B * t));
    Ok(GeometryPrediction {
        result: PredictionResult {
            delta_k,
            delta_sf,
            sqrt_delta_sf: delta_sf.sqrt(),
            delta_damping,
        },
        aspect_warning: warning,
    })
}
