//! Time-domain simulator of the cantilever's Brownian motion and the
//! measurement pipeline built on it: generate x(t), estimate its
//! autocorrelation, fit the damped-cosine model, and extract the force
//! noise density.
//!
//! The integrator is the exact one-step discretization of the linear SDE
//! (state-transition matrix plus the exact process-noise covariance from
//! the stationary Lyapunov relation Q = P∞ − ΦP∞Φᵀ), so the sampled
//! process has no timestep bias; dt only has to resolve the oscillation for
//! the autocorrelation fit. The simulation is classical (⟨x²⟩ = k_BT/k):
//! injected Casimir shifts enter as an extra white force density and an
//! extra damping coefficient.

use crate::constants::K_B;
use crate::error::{Error, Result};
use crate::predict::CantileverParams;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Configuration of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub params: CantileverParams,
    /// Injected extra white force noise δS_f, N²/Hz.
    #[serde(default)]
    pub extra_force_psd: f64,
    /// Injected extra damping δ(mω₀/Q), kg/s.
    #[serde(default)]
    pub extra_damping: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let period = 2.0 * PI / self.params.omega0;
        if !(self.dt > 0.0) || self.dt >= 0.05 * period {
            return Err(Error::InvalidSpec(format!(
                "dt must satisfy 0 < dt < 0.05*(2pi/omega0) = {:.3e}, got {:.3e}",
                0.05 * period,
                self.dt
            )));
        }
        let ringdown = 2.0 * self.params.quality / self.params.omega0;
        if !(self.duration >= 100.0 * ringdown) {
            return Err(Error::InvalidSpec(format!(
                "duration must be at least 100 ring-down times ({:.3e} s), got {:.3e}",
                100.0 * ringdown,
                self.duration
            )));
        }
        if self.extra_force_psd < 0.0 || self.extra_damping < 0.0 {
            return Err(Error::InvalidSpec("injected noise and damping must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Uniformly sampled displacement record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Biased sample variance about the sample mean.
    pub fn variance(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = self.samples.iter().sum::<f64>() / n;
        self.samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n
    }

    /// Serialize as `t,x` CSV at full round-trip precision.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,x")?;
        for (i, x) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 * self.dt, x)?;
        }
        Ok(())
    }

    /// Parse a `t,x` CSV; the grid must be uniform.
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty time-series file".into()))??;
        if header.trim() != "t,x" {
            return Err(Error::Parse(format!("expected header 't,x', got '{header}'")));
        }
        let mut ts = Vec::new();
        let mut xs = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let t: f64 = parse_field(cols.next(), i, "t")?;
            let x: f64 = parse_field(cols.next(), i, "x")?;
            if !x.is_finite() || !t.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite value", i + 2)));
            }
            ts.push(t);
            xs.push(x);
        }
        if xs.len() < 2 {
            return Err(Error::Parse("time series needs at least two samples".into()));
        }
        let dt = ts[1] - ts[0];
        if !(dt > 0.0) {
            return Err(Error::Parse("time grid must be increasing".into()));
        }
        for (i, w) in ts.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
                return Err(Error::Parse(format!("non-uniform time grid near row {}", i + 2)));
            }
        }
        Ok(TimeSeries { dt, samples: xs })
    }
}

fn parse_field(field: Option<&str>, row: usize, name: &str) -> Result<f64> {
    field
        .ok_or_else(|| Error::Parse(format!("row {}: missing column '{name}'", row + 2)))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("row {}: bad {name} value ({e})", row + 2)))
}

/// Results of the autocorrelation fit; `sf_extracted` is filled by
/// [`extract_force_psd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Fitted mean-square displacement ⟨x²⟩, m².
    pub x2_mean: f64,
    /// Fitted resonance frequency, rad/s.
    pub omega0_fit: f64,
    /// Fitted quality factor.
    pub q_fit: f64,
    /// Langevin force density from the fluctuation-dissipation relation,
    /// N²/Hz.
    pub sf_extracted: Option<f64>,
    /// Normalized RMS misfit of the model.
    pub fit_residual: f64,
}

/// Generate the stationary Brownian series by exact one-step propagation.
///
/// Total damping is mω₀/Q + `extra_damping`; the driving white-noise
/// density is 2k_BT·(mω₀/Q) + `extra_force_psd`, so equal injections
/// related by δS_f = 2k_BT·δγ keep the process in equilibrium. Starts from
/// rest and discards a transient of ten ring-down times. Deterministic for
/// a fixed seed.
pub fn simulate_brownian(config: &SimulationConfig) -> Result<TimeSeries> {
    config.validate()?;
    let p = &config.params;
    let m = p.mass;
    let k = p.spring_constant();
    let gamma_thermal = p.damping_coefficient();
    let gamma = gamma_thermal + config.extra_damping;
    let s_tot = 2.0 * K_B * p.temperature * gamma_thermal + config.extra_force_psd;

    let omega_n = p.omega0;
    let zeta = gamma / (2.0 * m * omega_n);
    if zeta >= 1.0 {
        return Err(Error::InvalidSpec(format!(
            "configuration is overdamped (zeta = {zeta:.3}); the discretization assumes zeta < 1"
        )));
    }
    let wd = omega_n * (1.0 - zeta * zeta).sqrt();

    let dt = config.dt;
    let e = (-zeta * omega_n * dt).exp();
    let (c, s) = ((wd * dt).cos(), (wd * dt).sin());
    let f11 = e * (c + zeta * omega_n / wd * s);
    let f12 = e * s / wd;
    let f21 = -e * omega_n * omega_n * s / wd;
    let f22 = e * (c - zeta * omega_n / wd * s);

    // Stationary covariance (diagonal) and the exact per-step process noise
    // Q = P - Phi P Phi^T.
    let p1 = s_tot / (2.0 * gamma * k);
    let p2 = s_tot / (2.0 * gamma * m);
    let q11 = p1 - (f11 * f11 * p1 + f12 * f12 * p2);
    let q12 = -(f11 * f21 * p1 + f12 * f22 * p2);
    let q22 = p2 - (f21 * f21 * p1 + f22 * f22 * p2);
    if q11 <= 0.0 || q22 <= 0.0 || q11 * q22 - q12 * q12 <= 0.0 {
        return Err(Error::InvalidSpec("process-noise covariance lost positivity".into()));
    }
    let l11 = q11.sqrt();
    let l21 = q12 / l11;
    let l22 = (q22 - l21 * l21).sqrt();

    let ringdown = 2.0 * p.quality / p.omega0;
    let warmup = (10.0 * ringdown / dt).ceil() as usize;
    let n = (config.duration / dt).round() as usize;

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let normal = rand_distr::StandardNormal;
    let mut x = 0.0f64;
    let mut v = 0.0f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..warmup + n {
        let z1: f64 = normal.sample(&mut rng);
        let z2: f64 = normal.sample(&mut rng);
        let xn = f11 * x + f12 * v + l11 * z1;
        let vn = f21 * x + f22 * v + l21 * z1 + l22 * z2;
        x = xn;
        v = vn;
        if i >= warmup {
            samples.push(x);
        }
    }
    Ok(TimeSeries { dt, samples })
}

/// Biased (1/N) time-average autocorrelation estimate up to `max_lag`,
/// computed exactly by block FFT correlation. C(0) is the sample variance.
pub fn estimate_autocorrelation(ts: &TimeSeries, max_lag: f64) -> Result<Vec<(f64, f64)>> {
    let n = ts.samples.len();
    if n < 16 {
        return Err(Error::InvalidSpec("time series too short".into()));
    }
    let lags = (max_lag / ts.dt).floor() as usize;
    if lags + 1 > n / 10 {
        return Err(Error::InvalidSpec(format!(
            "max_lag must not exceed a tenth of the record ({} lags vs {} samples)",
            lags, n
        )));
    }

    let mean = ts.samples.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = ts.samples.iter().map(|&v| v - mean).collect();

    // Block cross-correlation: A is one block, B the same block extended by
    // `lags` samples; summing the circular correlations of the zero-padded
    // pair over all blocks reproduces sum_t x_t x_{t+l} exactly.
    let fft_len = (4 * (lags + 1)).next_power_of_two().max(1 << 12);
    let block = fft_len - lags;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);

    let mut acc = vec![0.0f64; lags + 1];
    let mut a_buf = vec![Complex::new(0.0, 0.0); fft_len];
    let mut b_buf = vec![Complex::new(0.0, 0.0); fft_len];
    let mut start = 0usize;
    while start < n {
        let a_end = (start + block).min(n);
        let b_end = (start + block + lags).min(n);
        for c in a_buf.iter_mut() {
            *c = Complex::new(0.0, 0.0);
        }
        for c in b_buf.iter_mut() {
            *c = Complex::new(0.0, 0.0);
        }
        for (i, &v) in x[start..a_end].iter().enumerate() {
            a_buf[i] = Complex::new(v, 0.0);
        }
        for (i, &v) in x[start..b_end].iter().enumerate() {
            b_buf[i] = Complex::new(v, 0.0);
        }
        fwd.process(&mut a_buf);
        fwd.process(&mut b_buf);
        for (a, b) in a_buf.iter_mut().zip(&b_buf) {
            *a = a.conj() * b;
        }
        inv.process(&mut a_buf);
        for (l, a) in acc.iter_mut().zip(&a_buf) {
            *l += a.re / fft_len as f64;
        }
        start += block;
    }

    Ok(acc
        .iter()
        .enumerate()
        .map(|(l, &s)| (l as f64 * ts.dt, s / n as f64))
        .collect())
}

/// Fit ⟨x²⟩·e^{−ω₀τ/(2Q)}·cos(ω₀τ) to an autocorrelation estimate by
/// Levenberg–Marquardt, initialized from zero crossings (frequency) and a
/// log-envelope regression (damping).
pub fn fit_autocorrelation(acf: &[(f64, f64)]) -> Result<FitResult> {
    if acf.len() < 32 {
        return Err(Error::FitFailure("autocorrelation too short to fit".into()));
    }
    let c0 = acf[0].1;
    if !(c0 > 0.0) {
        return Err(Error::FitFailure("nonpositive zero-lag power".into()));
    }

    // Zero crossings, counted while the local envelope is still well above
    // the estimator noise floor.
    let mut crossings = Vec::new();
    for w in acf.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        if (v0 == 0.0 || (v0 < 0.0) != (v1 < 0.0)) && envelope_ok(acf, t0, c0) {
            let frac = v0 / (v0 - v1);
            crossings.push(t0 + frac * (t1 - t0));
        }
    }
    if crossings.len() < 40 {
        return Err(Error::FitFailure(format!(
            "need at least 20 oscillation periods in the window, found {} half-periods",
            crossings.len()
        )));
    }
    // Regress crossing time on crossing index (t_k ~ t_0 + k pi/omega);
    // averaging over all crossings beats first-to-last spacing when the
    // estimate is noisy.
    let omega_init = {
        let n = crossings.len() as f64;
        let (mut sk, mut st, mut skk, mut skt) = (0.0, 0.0, 0.0, 0.0);
        for (k, &t) in crossings.iter().enumerate() {
            let kf = k as f64;
            sk += kf;
            st += t;
            skk += kf * kf;
            skt += kf * t;
        }
        let slope = (n * skt - sk * st) / (n * skk - sk * sk);
        PI / slope
    };

    // Log-envelope regression over extrema in the clean region.
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut cnt = 0.0;
    for i in 1..acf.len() - 1 {
        let (t, v) = acf[i];
        if v.abs() > 0.15 * c0 && v.abs() >= acf[i - 1].1.abs() && v.abs() >= acf[i + 1].1.abs() {
            let y = v.abs().ln();
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
            cnt += 1.0;
        }
    }
    let decay_init = if cnt >= 2.0 {
        let denom = cnt * sxx - sx * sx;
        (-(cnt * sxy - sx * sy) / denom).max(1e-12 * omega_init)
    } else {
        1e-3 * omega_init
    };

    // Levenberg-Marquardt on (amplitude, omega, decay).
    let mut a = c0;
    let mut w = omega_init;
    let mut d = decay_init;
    let mut lambda = 1e-3;
    let cost = |a: f64, w: f64, d: f64| -> f64 {
        acf.iter()
            .map(|&(t, v)| {
                let r = v - a * (-d * t).exp() * (w * t).cos();
                r * r
            })
            .sum()
    };
    let mut current = cost(a, w, d);
    let mut stalls = 0u32;
    for _ in 0..400 {
        // Accumulate J^T J and J^T r.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for &(t, v) in acf {
            let env = (-d * t).exp();
            let (cs, sn) = ((w * t).cos(), (w * t).sin());
            let model = a * env * cs;
            let r = v - model;
            let j = [env * cs, -a * t * env * sn, -a * t * env * cs];
            for i in 0..3 {
                jtr[i] += j[i] * r;
                for l in 0..3 {
                    jtj[i][l] += j[i] * j[l];
                }
            }
        }
        // Solve (J^T J + lambda diag) step = J^T r.
        let mut m = jtj;
        for i in 0..3 {
            m[i][i] *= 1.0 + lambda;
        }
        let step = match solve3(&m, &jtr) {
            Some(s) => s,
            None => return Err(Error::FitFailure("singular normal equations".into())),
        };
        let (an, wn, dn) = (a + step[0], w + step[1], d + step[2]);
        let trial = if an > 0.0 && wn > 0.0 && dn > 0.0 { cost(an, wn, dn) } else { f64::INFINITY };
        if trial < current {
            let rel_step = (step[0] / a).abs().max((step[1] / w).abs()).max((step[2] / d).abs());
            a = an;
            w = wn;
            d = dn;
            let improved = (current - trial) / current.max(1e-300);
            current = trial;
            lambda = (lambda * 0.3).max(1e-12);
            if rel_step < 1e-12 {
                break;
            }
            stalls = if improved < 1e-14 { stalls + 1 } else { 0 };
            if stalls >= 3 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let q = w / (2.0 * d);
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::FitFailure(format!("fitted quality factor is unphysical: {q}")));
    }
    Ok(FitResult {
        x2_mean: a,
        omega0_fit: w,
        q_fit: q,
        sf_extracted: None,
        fit_residual: (current / acf.len() as f64).sqrt() / c0,
    })
}

// Crossing filter: accept crossings only where the local oscillation
// amplitude (max |C| over a short neighborhood) is still above ~12% of the
// zero-lag power, which keeps estimator noise out of the frequency seed.
fn envelope_ok(acf: &[(f64, f64)], t: f64, c0: f64) -> bool {
    let dt = acf[1].0 - acf[0].0;
    let i = (t / dt) as usize;
    let lo = i.saturating_sub(64);
    let hi = (i + 64).min(acf.len() - 1);
    let local = acf[lo..=hi].iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
    local > 0.12 * c0
}

fn solve3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut a = *m;
    let mut x = *b;
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    let mut out = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = x[col];
        for k in col + 1..3 {
            acc -= a[col][k] * out[k];
        }
        out[col] = acc / a[col][col];
    }
    Some(out)
}

/// Langevin force density from the fit: S_f = (2k²/(Qω₀))·⟨x²⟩ with
/// k = m·ω₀_fit².
pub fn extract_force_psd(fit: &FitResult, mass: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::InvalidSpec("mass must be positive".into()));
    }
    let k = mass * fit.omega0_fit * fit.omega0_fit;
    Ok(2.0 * k * k / (fit.q_fit * fit.omega0_fit) * fit.x2_mean)
}
