//! Property-based invariants of the model layer.

use casimir_core::ensemble::{averaged_cross_expectation, SpectralDistribution};
use casimir_core::geometry::{
    pairwise_noise, pairwise_spring, DipoleCoupling, MaterialSpec, TipSampleGeometry,
};
use casimir_core::geometry::{total_noise, any_transverse};
use casimir_core::oscillator::{autocorr_exact, autocorr_weak, position_spectrum, OscillatorSpec};
use casimir_core::pair::{cross_expectation, pair_noise_spectrum, PairSpec};
use casimir_core::quad::QuadratureSettings;
use casimir_core::specfun::thermal_kernel;
use proptest::prelude::*;

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thermal_kernel_even_nonnegative_monotone(
        omega in -1e12f64..1e12,
        t1 in 0.0f64..400.0,
        dt in 0.0f64..100.0,
    ) {
        let a = thermal_kernel(omega, t1);
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a.to_bits(), thermal_kernel(-omega, t1).to_bits());
        prop_assert!(thermal_kernel(omega, t1 + dt) >= a);
    }

    #[test]
    fn autocorrelation_even_in_lag(
        gamma_frac in 0.0f64..0.9,
        tau in 0.0f64..60.0,
    ) {
        let spec = OscillatorSpec::new(1.0, 2.0 * gamma_frac).unwrap();
        let plus = autocorr_exact(&spec, tau).unwrap();
        let minus = autocorr_exact(&spec, -tau).unwrap();
        prop_assert_eq!(plus.to_bits(), minus.to_bits());
        // The weak form is even too, and both are bounded by hbar/2 x (w/wbar).
        prop_assert_eq!(autocorr_weak(&spec, tau).to_bits(), autocorr_weak(&spec, -tau).to_bits());
    }

    #[test]
    fn position_spectrum_even_nonnegative(
        gamma_frac in 1e-3f64..0.9,
        omega in -8.0f64..8.0,
    ) {
        let spec = OscillatorSpec::new(1.0, 2.0 * gamma_frac).unwrap();
        let s = position_spectrum(&spec, omega).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert_eq!(s.to_bits(), position_spectrum(&spec, -omega).unwrap().to_bits());
    }

    #[test]
    fn cross_expectation_symmetries(
        wa in 0.5f64..3.0,
        wb in 0.5f64..3.0,
        ga_frac in 0.0f64..0.2,
        gb_frac in 0.0f64..0.2,
        beta_frac in 1e-4f64..0.3,
    ) {
        let beta = beta_frac * wa.min(wb);
        let a = OscillatorSpec::new(wa, ga_frac * wa).unwrap();
        let b = OscillatorSpec::new(wb, gb_frac * wb).unwrap();
        let v = cross_expectation(&PairSpec::new(a, b, beta).unwrap());
        // Antisymmetric under beta -> -beta.
        let neg = cross_expectation(&PairSpec::new(a, b, -beta).unwrap());
        prop_assert_eq!(v.to_bits(), (-neg).to_bits());
        // Symmetric under (a <-> b).
        let swapped = cross_expectation(&PairSpec::new(b, a, beta).unwrap());
        prop_assert!((v - swapped).abs() <= 1e-12 * v.abs().max(swapped.abs()));
    }

    #[test]
    fn pair_spectrum_even_nonnegative(
        wa in 0.5f64..2.0,
        wb in 0.5f64..2.0,
        ga_frac in 1e-3f64..0.2,
        omega in -6.0f64..6.0,
    ) {
        let a = OscillatorSpec::new(wa, ga_frac * wa).unwrap();
        let b = OscillatorSpec::new(wb, ga_frac * wb).unwrap();
        let p = PairSpec::new(a, b, 1e-3 * wa.min(wb)).unwrap();
        let s = pair_noise_spectrum(&p, omega).unwrap();
        prop_assert!(s >= 0.0);
        let s_neg = pair_noise_spectrum(&p, -omega).unwrap();
        prop_assert!((s - s_neg).abs() <= 1e-12 * s.max(s_neg));
    }

    #[test]
    fn averaged_cross_expectation_linear_in_beta(
        omega_d in 0.5f64..5.0,
        beta in -1.0f64..1.0,
    ) {
        let d = SpectralDistribution::debye(omega_d).unwrap();
        let s = settings();
        let unit = averaged_cross_expectation(&d, 1.0, &s).unwrap();
        let v = averaged_cross_expectation(&d, beta, &s).unwrap();
        prop_assert!((v - beta * unit).abs() <= 1e-12 * unit.abs().max(v.abs()));
    }

    #[test]
    fn pairwise_tensors_well_formed(
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
        z in 0.2f64..2.0,
    ) {
        let m = MaterialSpec::new(
            1.0,
            1.0,
            DipoleCoupling::new(1.0).unwrap(),
            SpectralDistribution::debye(1.0).unwrap(),
        )
        .unwrap();
        let s = settings();
        let r = [x, y, z];
        let k = pairwise_spring(&m, &r, &s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((k[i][j] - k[j][i]).abs() <= 1e-12 * k[i][j].abs().max(1e-300));
            }
        }
        let t = pairwise_noise(&m, &r).unwrap();
        // Positive semidefinite (rank one): u^T S u >= 0 along random axes.
        for u in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.6, -0.8, 0.0]] {
            prop_assert!(t.component(&u, &u) >= -1e-16 * t.trace());
        }
    }

    #[test]
    fn total_noise_psd_with_normal_eigenvector(
        r_exp in -7.0f64..-5.0,
        aspect in 0.01f64..2.0,
        nx in -1.0f64..1.0,
        ny in -1.0f64..1.0,
    ) {
        let radius = 10f64.powf(r_exp);
        let gap = aspect * radius;
        let nz = (1.0 - 0.5 * (nx * nx + ny * ny)).max(0.25);
        let norm = (nx * nx * 0.25 + ny * ny * 0.25 + nz * nz).sqrt();
        let n = [0.5 * nx / norm, 0.5 * ny / norm, nz / norm];
        let geom = TipSampleGeometry::new(radius, gap, n).unwrap();
        let m = MaterialSpec::new(
            1e28,
            1e28,
            DipoleCoupling::new(1e-39).unwrap(),
            SpectralDistribution::debye(1e13).unwrap(),
        )
        .unwrap();
        let t = total_noise(&geom, &m).unwrap();
        let snn = t.component(&n, &n);
        let tv = any_transverse(&n);
        let stt = t.component(&tv, &tv);
        prop_assert!(snn > 0.0 && stt > 0.0);
        // n is an eigenvector and carries the major axis.
        let mut sv = [0.0f64; 3];
        for i in 0..3 {
            for j in 0..3 {
                sv[i] += t.matrix()[i][j] * n[j];
            }
        }
        for i in 0..3 {
            prop_assert!((sv[i] - snn * n[i]).abs() <= 1e-10 * snn);
        }
        prop_assert!((snn / stt - 6.0).abs() <= 1e-9);
        // Mixed component vanishes: n^T S t = 0.
        prop_assert!(t.component(&n, &tv).abs() <= 1e-12 * snn);
    }
}
