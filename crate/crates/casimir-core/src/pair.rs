//! Coupled oscillator pair: the perturbative cross-expectation ⟨q_a q_b⟩
//! with its damping correction, an exact undamped oracle by normal-mode
//! diagonalization, and the factorized pair-noise autocorrelation and
//! spectrum.
//!
//! The coupling β is in the Hamiltonian convention (−β q_a q_b with q²
//! carrying ħ), so β has units of rad/s and the leading cross-expectation is
//! ħβ/(2(ω_a+ω_b)).

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::oscillator::{autocorr_weak, OscillatorSpec};
use crate::quad::{integrate_adaptive, QuadratureSettings};
use std::f64::consts::PI;

/// Weakly coupled pair of damped oscillators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub a: OscillatorSpec,
    pub b: OscillatorSpec,
    beta: f64,
}

impl PairSpec {
    pub fn new(a: OscillatorSpec, b: OscillatorSpec, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta.abs() >= a.omega().min(b.omega()) {
            return Err(Error::InvalidSpec(format!(
                "coupling must satisfy |beta| < min(omega_a, omega_b), got beta={beta}"
            )));
        }
        Ok(PairSpec { a, b, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// φ(t) = 1 − t + ln t, evaluated as φ(t)/(t−1)² which is analytic through
/// t = 1 (series −1/2 + (t−1)/3 − (t−1)²/4 + …). This is the scalar the
/// damping correction is built from; computing the ratio directly removes
/// the 0/0 at equal frequencies.
fn phi_over_sq(t: f64) -> f64 {
    let s = t - 1.0;
    if s.abs() < 0.25 {
        // ln(1+s) = s - s^2/2 + s^3/3 - ...  =>  phi = -s^2/2 + s^3/3 - s^4/4 + ...
        // so phi/s^2 = -1/2 + s/3 - s^2/4 + ...
        let mut sum = 0.0;
        let mut pow = 1.0;
        for k in 2..=48u32 {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * pow / k as f64;
            pow *= s;
            if pow.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (1.0 - t + t.ln()) / (s * s)
    }
}

/// Zero-temperature cross-expectation ⟨q_a q_b⟩ to leading order in β and
/// linear order in the damping rates:
///
/// ```text
/// ħβ/(2(ω_a+ω_b)) + (ħβ ω_aω_b / 2π(ω_a²−ω_b²)²)
///                   × [Γ_a(1 − ω_a²/ω_b² + ln(ω_a²/ω_b²)) + (a↔b)]
/// ```
///
/// Finite through ω_a = ω_b (the bracket's double zero cancels the
/// denominator's; evaluated via the analytic ratio form).
pub fn cross_expectation(pair: &PairSpec) -> f64 {
    let (wa, wb) = (pair.a.omega(), pair.b.omega());
    let (ga, gb) = (pair.a.gamma(), pair.b.gamma());
    let beta = pair.beta();

    let leading = HBAR * beta / (2.0 * (wa + wb));

    // bracket / (wa^2 - wb^2)^2 written in t = wa^2/wb^2:
    //   [ga phi(t) + gb phi(1/t)] / (wb^4 (t-1)^2),
    // with phi(1/t)/(t-1)^2 = phi_over_sq(1/t)/t^2.
    let t = (wa * wa) / (wb * wb);
    let ratio = (ga * phi_over_sq(t) + gb * phi_over_sq(1.0 / t) / (t * t)) / wb.powi(4);
    let correction = HBAR * beta * wa * wb / (2.0 * PI) * ratio;
    leading + correction
}

/// Exact ground-state ⟨q_a q_b⟩ of the coupled Hamiltonian with the bath
/// switched off, by normal-mode diagonalization of ω̃² = D K D with
/// D = diag(√ω_a, √ω_b): ⟨q qᵀ⟩ = (ħ/2) D W⁻¹ D, W = (DKD)^{1/2}.
///
/// This is the module's oracle for [`cross_expectation`] at Γ = 0.
pub fn cross_expectation_exact_undamped(pair: &PairSpec) -> Result<f64> {
    if pair.a.gamma() != 0.0 || pair.b.gamma() != 0.0 {
        return Err(Error::InvalidSpec("exact oracle requires gamma_a = gamma_b = 0".into()));
    }
    let (wa, wb) = (pair.a.omega(), pair.b.omega());
    let beta = pair.beta();
    if beta == 0.0 {
        return Ok(0.0);
    }

    // W^2 = [[wa^2, c], [c, wb^2]] with c = -beta sqrt(wa wb).
    let a = wa * wa;
    let b = wb * wb;
    let c = -beta * (wa * wb).sqrt();
    if a * b - c * c <= 0.0 {
        return Err(Error::InvalidSpec(
            "quadratic form not positive definite (coupling too strong)".into(),
        ));
    }

    // Jacobi rotation: angle th with tan(2 th) = 2c/(a-b).
    let (cos_t, sin_t) = if (a - b).abs() < f64::EPSILON * (a + b) {
        (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
    } else {
        let th = 0.5 * (2.0 * c / (a - b)).atan();
        (th.cos(), th.sin())
    };
    // Eigenvalues of W^2.
    let l1 = a * cos_t * cos_t + b * sin_t * sin_t + 2.0 * c * cos_t * sin_t;
    let l2 = a * sin_t * sin_t + b * cos_t * cos_t - 2.0 * c * cos_t * sin_t;
    if l1 <= 0.0 || l2 <= 0.0 {
        return Err(Error::InvalidSpec("normal-mode frequencies not real".into()));
    }
    // (W^{-1})_{ab} = R diag(1/sqrt(l)) R^T off-diagonal element.
    let w_inv_ab = cos_t * sin_t * (1.0 / l1.sqrt() - 1.0 / l2.sqrt());
    Ok(0.5 * HBAR * (wa * wb).sqrt() * w_inv_ab)
}

/// Pair-noise autocorrelation C_{(q_aq_b)}(τ) = C_aa(τ)·C_bb(τ) in the
/// weak-damping approximation (O(β²) corrections dropped).
pub fn pair_noise_autocorr(pair: &PairSpec, tau: f64) -> f64 {
    autocorr_weak(&pair.a, tau) * autocorr_weak(&pair.b, tau)
}

/// Closed-form pair-noise spectrum: four Lorentzians of half-width
/// Γ̄ = (Γ_a+Γ_b)/2 at ±(ω̄_a−ω̄_b) and ±(ω̄_a+ω̄_b), each of weight ħ²/8.
pub fn pair_noise_spectrum(pair: &PairSpec, omega: f64) -> Result<f64> {
    let gbar = 0.5 * (pair.a.gamma() + pair.b.gamma());
    if gbar <= 0.0 {
        return Err(Error::InvalidSpec(
            "pair noise spectrum requires gamma_a + gamma_b > 0".into(),
        ));
    }
    let delta = pair.a.omega_bar() - pair.b.omega_bar();
    let sigma = pair.a.omega_bar() + pair.b.omega_bar();
    let lor = |center: f64| gbar / ((omega - center).powi(2) + gbar * gbar);
    Ok(HBAR * HBAR / 8.0 * (lor(delta) + lor(-delta) + lor(sigma) + lor(-sigma)))
}

/// Numerical Fourier transform of [`pair_noise_autocorr`] — the oracle for
/// [`pair_noise_spectrum`]: S(ω) = 2∫₀^∞ cos(ωτ) C(τ) dτ.
pub fn pair_noise_spectrum_quadrature(
    pair: &PairSpec,
    omega: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let gbar = 0.5 * (pair.a.gamma() + pair.b.gamma());
    if gbar <= 0.0 {
        return Err(Error::InvalidSpec("quadrature oracle requires damping".into()));
    }
    let cutoff = 42.0 / gbar; // e^{-42} below double precision
    let s = QuadratureSettings {
        rel_tol: settings.rel_tol.min(1e-10),
        abs_tol: 1e-12 * HBAR * HBAR / gbar,
        max_subdivisions: settings.max_subdivisions.max(20_000),
        ..*settings
    };
    let f = move |tau: f64| 2.0 * (omega * tau).cos() * pair_noise_autocorr(pair, tau);
    integrate_adaptive(f, 0.0, cutoff, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn osc(w: f64, g: f64) -> OscillatorSpec {
        OscillatorSpec::new(w, g).unwrap()
    }

    #[test]
    fn leading_term_undamped() {
        let p = PairSpec::new(osc(1.0, 0.0), osc(2.0, 0.0), 1e-3).unwrap();
        assert_relative_eq!(cross_expectation(&p) / HBAR, 1e-3 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn damping_correction_example() {
        // wa=1, wb=2, Ga=Gb=1e-3, beta=1e-3: bracket sum is exactly -2.25e-3
        // (the logs cancel for equal damping), total 1.6658708919512072e-4 hbar.
        let p = PairSpec::new(osc(1.0, 1e-3), osc(2.0, 1e-3), 1e-3).unwrap();
        let v = cross_expectation(&p) / HBAR;
        assert_relative_eq!(v, 1.665_870_891_951_207_2e-4, max_relative = 1e-12);
        let correction = v - 1e-3 / 6.0;
        assert_relative_eq!(correction, -7.957_747_154_594_767e-8, max_relative = 1e-10);
    }

    #[test]
    fn degeneracy_is_finite_and_continuous() {
        // No blow-up at omega_b -> omega_a, including exactly equal.
        let near = PairSpec::new(osc(1.0, 0.0), osc(1.0 + 1e-9, 0.0), 1e-3).unwrap();
        assert_relative_eq!(cross_expectation(&near) / HBAR, 1e-3 / 4.0, max_relative = 1e-8);

        let damped_eq = PairSpec::new(osc(1.0, 1e-3), osc(1.0, 2e-3), 1e-3).unwrap();
        let v_eq = cross_expectation(&damped_eq);
        assert!(v_eq.is_finite());
        // No jumps: adjacent evaluations 1e-12 apart agree to first order
        // everywhere, including across the internal series switch
        // (|t - 1| = 0.25, i.e. wb ~ 0.894 and 1.155) and at degeneracy.
        let mut max_jump = 0.0f64;
        for &wb in &[0.894_427, 0.894_428, 0.999_999_9, 1.0, 1.000_000_1, 1.154_700, 1.154_701] {
            let v0 = cross_expectation(&PairSpec::new(osc(1.0, 1e-3), osc(wb, 2e-3), 1e-4).unwrap());
            let v1 = cross_expectation(&PairSpec::new(osc(1.0, 1e-3), osc(wb + 1e-12, 2e-3), 1e-4).unwrap());
            max_jump = max_jump.max((v1 - v0).abs() / v0.abs());
        }
        assert!(max_jump < 1e-10, "max relative jump {max_jump:.3e}");
    }

    #[test]
    fn equal_frequency_analytic_oracle() {
        // (hbar/4)(sqrt(10/9) - sqrt(10/11)) at omega=1, beta=0.1.
        let p = PairSpec::new(osc(1.0, 0.0), osc(1.0, 0.0), 0.1).unwrap();
        let v = cross_expectation_exact_undamped(&p).unwrap();
        assert_relative_eq!(v / HBAR, 0.025_157_491_035_966_865, max_relative = 1e-12);
    }

    #[test]
    fn oracle_reduces_to_leading_term() {
        for &(wa, wb) in &[(1.0f64, 1.0f64), (1.0, 2.0), (2.0, 3.0)] {
            for &bw in &[1e-1, 1e-2, 1e-3] {
                let beta = bw * wa.min(wb);
                let p = PairSpec::new(osc(wa, 0.0), osc(wb, 0.0), beta).unwrap();
                let exact = cross_expectation_exact_undamped(&p).unwrap();
                let lead = cross_expectation(&p);
                let rel = (exact - lead).abs() / lead.abs();
                assert!(rel <= 2.0 * bw * bw, "remainder {rel:.3e} at beta/omega={bw}");
            }
        }
    }

    #[test]
    fn oracle_rejects_damped_and_strong_coupling() {
        let damped = PairSpec::new(osc(1.0, 0.1), osc(1.0, 0.0), 0.01).unwrap();
        assert!(cross_expectation_exact_undamped(&damped).is_err());
        assert!(PairSpec::new(osc(1.0, 0.0), osc(2.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn damping_shift_is_linear_in_gamma() {
        // |cross(G) - cross(0)| scales linearly in Ga+Gb.
        let base = PairSpec::new(osc(1.0, 0.0), osc(1.7, 0.0), 1e-3).unwrap();
        let v0 = cross_expectation(&base);
        let d1 = cross_expectation(&PairSpec::new(osc(1.0, 1e-3), osc(1.7, 1e-3), 1e-3).unwrap()) - v0;
        let d2 = cross_expectation(&PairSpec::new(osc(1.0, 2e-3), osc(1.7, 2e-3), 1e-3).unwrap()) - v0;
        assert_relative_eq!(d2 / d1, 2.0, max_relative = 1e-9);
        assert!(d1.abs() <= (1e-3 + 1e-3) * HBAR * 1e-3 / 1.0);
    }

    #[test]
    fn pair_autocorr_values() {
        let p = PairSpec::new(osc(1.0, 0.0), osc(2.0, 0.0), 1e-4).unwrap();
        assert_relative_eq!(pair_noise_autocorr(&p, 0.0), 0.25 * HBAR * HBAR, max_relative = 1e-15);
        assert_relative_eq!(
            pair_noise_autocorr(&p, 0.7),
            0.25 * HBAR * HBAR * (0.7f64).cos() * (1.4f64).cos(),
            max_relative = 1e-14
        );
        // Damped example: (hbar^2/4) e^{-1} cos^2(wbar tau) at tau = 100.
        let pd = PairSpec::new(osc(1.0, 0.01), osc(1.0, 0.01), 1e-4).unwrap();
        let wbar = (1.0f64 - 2.5e-5).sqrt();
        assert_relative_eq!(
            pair_noise_autocorr(&pd, 100.0),
            0.25 * HBAR * HBAR * (-1.0f64).exp() * (wbar * 100.0).cos().powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn spectrum_against_fourier_oracle() {
        let p = PairSpec::new(osc(1.0, 0.02), osc(1.3, 0.04), 1e-4).unwrap();
        let s = QuadratureSettings::default();
        for &w in &[0.0, 0.15, 0.3, 1.0, 2.3, 3.0] {
            let closed = pair_noise_spectrum(&p, w).unwrap();
            let numeric = pair_noise_spectrum_quadrature(&p, w, &s).unwrap();
            assert_relative_eq!(closed, numeric, max_relative = 1e-6);
        }
    }

    #[test]
    fn spectrum_shape_and_parseval() {
        let p = PairSpec::new(osc(1.0, 0.01), osc(1.0, 0.01), 1e-4).unwrap();
        let gbar = 0.01;
        // Coincident difference-Lorentzians at the origin: ~ hbar^2/(4 gbar).
        let dc = pair_noise_spectrum(&p, 0.0).unwrap();
        assert_relative_eq!(dc, HBAR * HBAR / (4.0 * gbar), max_relative = 1e-4);
        // Decay at large omega.
        assert!(pair_noise_spectrum(&p, 50.0).unwrap() < 1e-4 * dc);
        // Parseval: (1/2pi) int S = C(0) = hbar^2/4. Four Lorentzians
        // integrate to pi each with weight hbar^2/8.
        let s = QuadratureSettings { abs_tol: 1e-16 * HBAR * HBAR, max_subdivisions: 4000, ..Default::default() };
        let total = integrate_adaptive(
            |w| pair_noise_spectrum(&p, w).unwrap(),
            0.0,
            f64::INFINITY,
            &s,
        )
        .unwrap() / PI; // even: (1/2pi)*2*int_0^inf
        assert_relative_eq!(total, 0.25 * HBAR * HBAR, max_relative = 1e-6);
    }
}
