//! Single damped quantum oscillator in an independent-oscillator heat bath:
//! zero-temperature position autocorrelations (closed form, weak-damping
//! form, and the quadrature oracle), the position spectrum, the zero-point
//! band power, and the Langevin force noise spectrum.
//!
//! Correlations are returned in units where ⟨q²⟩ carries ħ (the scaled
//! atomic coordinate); an undamped oscillator has C(0) = ħ/2.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, integrate_adaptive_split, oscillatory_tail, QuadratureSettings};
use crate::specfun::{expint_g, thermal_kernel};
use num_complex::Complex64;
use std::f64::consts::PI;

/// One damped atomic oscillator: bare frequency ω and damping rate Γ, both
/// in rad/s, with Γ < 2ω so the shifted frequency ω̄ = √(ω² − Γ²/4) is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    omega: f64,
    gamma: f64,
}

impl OscillatorSpec {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidSpec(format!("omega must be positive, got {omega}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() || gamma >= 2.0 * omega {
            return Err(Error::InvalidSpec(format!(
                "gamma must satisfy 0 <= gamma < 2*omega, got gamma={gamma}, omega={omega}"
            )));
        }
        Ok(OscillatorSpec { omega, gamma })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Shifted oscillation frequency ω̄ = √(ω² − Γ²/4) = √((ω−Γ/2)(ω+Γ/2)).
    pub fn omega_bar(&self) -> f64 {
        ((self.omega - 0.5 * self.gamma) * (self.omega + 0.5 * self.gamma)).sqrt()
    }
}

/// Marker documenting the correlation and spectral-density conventions used
/// throughout this crate:
///
/// ```text
/// C_AB(τ) = ½ ⟨A(t)B(t+τ) + B(t+τ)A(t)⟩
/// S_A(ω)  = ∫ dτ e^{iωτ} C_AA(τ)
/// ```
///
/// Under these conventions every autospectrum is real, even in ω, and
/// (1/2π)∫S_A dω = C_AA(0).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorrelationConvention;

/// Zero-temperature position autocorrelation C_qq(τ), closed form:
///
/// ```text
/// (ħ/2)(ω/ω̄)[e^{−Γ|τ|/2} cos(ω̄τ) + (2/π) Im g((ω̄ + iΓ/2)|τ|)]
/// ```
///
/// The Im g term is the squeezing of the zero-point motion by the bath; it
/// starts at −atan(Γ/2ω̄) and decays like −Γω̄/(τ²ω⁴). Even in τ.
pub fn autocorr_exact(spec: &OscillatorSpec, tau: f64) -> Result<f64> {
    let (omega, gamma) = (spec.omega(), spec.gamma());
    if gamma == 0.0 {
        return Ok(0.5 * HBAR * (omega * tau).cos());
    }
    let wbar = spec.omega_bar();
    let at = tau.abs();
    let im_g = if at == 0.0 {
        -(0.5 * gamma / wbar).atan()
    } else {
        expint_g(Complex64::new(wbar * at, 0.5 * gamma * at))?.im
    };
    Ok(0.5 * HBAR * (omega / wbar) * ((-0.5 * gamma * at).exp() * (wbar * tau).cos() + (2.0 / PI) * im_g))
}

/// Weak-damping form (ħ/2) e^{−Γ|τ|/2} cos(ω̄τ); differs from
/// [`autocorr_exact`] by O(Γ/ω).
pub fn autocorr_weak(spec: &OscillatorSpec, tau: f64) -> f64 {
    0.5 * HBAR * (-0.5 * spec.gamma() * tau.abs()).exp() * (spec.omega_bar() * tau).cos()
}

/// Quadrature oracle: (ħ/π) ∫₀^∞ dω Γω_aω cos(ωτ) / ((ω_a²−ω²)² + Γ²ω²).
///
/// This is the module's independent reference for [`autocorr_exact`].
pub fn autocorr_quadrature(spec: &OscillatorSpec, tau: f64, settings: &QuadratureSettings) -> Result<f64> {
    let (omega, gamma) = (spec.omega(), spec.gamma());
    if gamma == 0.0 {
        // Undamped limit of the Lorentzian is a delta line at omega.
        return Ok(0.5 * HBAR * (omega * tau).cos());
    }
    // Dimensionless variables: x = w/omega, theta = omega*|tau|, gp = gamma/omega.
    let gp = gamma / omega;
    let theta = omega * tau.abs();
    let xbar = spec.omega_bar() / omega;
    let integrand = move |x: f64| {
        let d1 = 1.0 - x * x;
        gp * x * (x * theta).cos() / (d1 * d1 + gp * gp * x * x)
    };

    let cut = 3.0f64;
    let mut pts = vec![0.0];
    for p in [xbar - 20.0 * gp, xbar - gp, xbar, xbar + gp, xbar + 20.0 * gp] {
        if p > 1e-12 && p < cut && p > *pts.last().unwrap() {
            pts.push(p);
        }
    }
    pts.push(cut);

    let head_settings = QuadratureSettings {
        rel_tol: settings.rel_tol.min(1e-11),
        abs_tol: 1e-13,
        max_subdivisions: settings.max_subdivisions.max(4000),
        ..*settings
    };
    let head = integrate_adaptive_split(integrand, &pts, &head_settings)?;

    let tail = if theta == 0.0 {
        integrate_adaptive(integrand, cut, f64::INFINITY, &head_settings)?
    } else {
        // Align the tail start to a zero of cos(x*theta) so half-period
        // windows alternate in sign.
        let k = ((cut * theta - 0.5 * PI) / PI).ceil().max(0.0);
        let x0 = (0.5 * PI + k * PI) / theta;
        let bridge = integrate_adaptive(integrand, cut, x0, &head_settings)?;
        bridge + oscillatory_tail(integrand, x0, PI / theta, settings, 1e-14)?
    };

    Ok(HBAR / PI * (head + tail))
}

/// Zero-temperature position spectrum S_q(ω) = ħΓω_a|ω| / ((ω_a²−ω²)² + Γ²ω²),
/// even and nonnegative, vanishing at ω = 0.
pub fn position_spectrum(spec: &OscillatorSpec, omega: f64) -> Result<f64> {
    let (wa, gamma) = (spec.omega(), spec.gamma());
    if gamma == 0.0 {
        return Err(Error::InvalidSpec(
            "position spectrum requires gamma > 0 (undamped line is a delta)".into(),
        ));
    }
    let w = omega.abs();
    let d = (wa * wa - w * w).powi(2) + gamma * gamma * w * w;
    Ok(HBAR * gamma * wa * w / d)
}

/// Fraction of the total zero-lag power (1/2π)∫S_q dω carried within
/// |ω ∓ ω̄| ≤ `half_width` around the two carriers (positive and negative
/// frequency). Tends to 1 as the window widens; a lightly damped oscillator
/// holds half its ħ/2 zero-point power inside the Lorentzian half-width Γ/2.
pub fn band_power_fraction(
    spec: &OscillatorSpec,
    half_width: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidSpec("half_width must be positive".into()));
    }
    let gamma = spec.gamma();
    if gamma == 0.0 {
        return Err(Error::InvalidSpec("band power requires gamma > 0".into()));
    }
    if half_width.is_infinite() {
        return Ok(1.0);
    }
    let wbar = spec.omega_bar();
    // Union of the two carrier windows folded onto omega >= 0. When the
    // windows reach past zero they merge into [0, wbar + half_width], so the
    // folded union is always the single interval [lo, hi].
    let hi = wbar + half_width;
    let lo = (wbar - half_width).max(0.0);

    let s = QuadratureSettings {
        rel_tol: settings.rel_tol.min(1e-10),
        abs_tol: 1e-13 * HBAR / gamma,
        max_subdivisions: settings.max_subdivisions.max(2000),
        ..*settings
    };
    let f = |w: f64| position_spectrum(spec, w).expect("gamma > 0 checked");
    let mut pts = vec![lo];
    if wbar > lo && wbar < hi {
        pts.push(wbar);
    }
    pts.push(hi);
    let num = integrate_adaptive_split(f, &pts, &s)?;
    // Total zero-lag power: pi * C(0) from the closed form.
    let total = PI * autocorr_exact(spec, 0.0)?;
    Ok(num.min(total) / total)
}

/// Langevin force noise spectrum S_F(ω) = Γ_a ω_a · ħω coth(ħω/2k_BT); the
/// white classical limit is Γ_a ω_a · 2k_BT and the T = 0 limit is linear in
/// |ω| with slope Γ_a ω_a ħ.
pub fn langevin_force_spectrum(spec: &OscillatorSpec, omega: f64, temperature: f64) -> f64 {
    spec.gamma() * spec.omega() * thermal_kernel(omega, temperature)
}
