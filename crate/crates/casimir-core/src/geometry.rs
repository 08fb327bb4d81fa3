//! Spatial layer: the dipole coupling and its gradients, pairwise
//! force/spring/noise tensors, closed-form sphere-over-half-space totals,
//! Monte Carlo + nested-quadrature oracles for them, and the cantilever
//! mode-shape length l.
//!
//! Geometry conventions: the sample fills the half-space below the surface,
//! n̂ is the outward surface normal, the spherical tip of radius r hovers
//! with its lowest point a gap h above the surface. Closed forms carry the
//! two geometric factors
//!
//! ```text
//! G_f = r³ / (h²(2r+h)²)        G_k = r³(r+h) / (h³(2r+h)³)
//! ```
//!
//! with ∂G_f/∂h = −4 G_k, which is why the normal spring is exactly the
//! h-derivative of the normal force.
//!
//! The total force-noise tensor integrates the pairwise rank-1 tensor
//! (∇β ⊗ ∇β) over tip and sample. The half-space sum of r̂⊗r̂/r⁸ has a
//! normal:transverse eigenvalue ratio of exactly 6, so the total is
//!
//! ```text
//! S_tot = [n̂⊗n̂ + (1/6)(I − n̂⊗n̂)] · (3π²/5) ρ_aρ_bκ² S_dc G_k
//! ```
//!
//! (S_dc is the frequency-averaged dc pair-noise density; the Monte Carlo
//! oracle reproduces both eigenvalues.)

use crate::ensemble::{averaged_cross_expectation, averaged_pair_noise_dc, SpectralDistribution};
use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, integrate_mc, McRegion, QuadratureSettings};
use std::f64::consts::PI;
use std::io::BufRead;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Spatial dipole coupling strength: β(r) = κ/|r|³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoupling {
    kappa: f64,
}

impl DipoleCoupling {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::InvalidSpec("kappa must be finite".into()));
        }
        Ok(DipoleCoupling { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// β at separation r.
    pub fn beta(&self, r: f64) -> f64 {
        self.kappa / (r * r * r)
    }
}

/// Spherical tip of radius `radius` separated from the half-space sample by
/// `gap`, with outward surface normal `normal` (unit vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipSampleGeometry {
    pub radius: f64,
    pub gap: f64,
    normal: Vec3,
}

impl TipSampleGeometry {
    pub fn new(radius: f64, gap: f64, normal: Vec3) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSpec(format!("radius must be positive, got {radius}")));
        }
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(Error::InvalidSpec(format!("gap must be positive, got {gap}")));
        }
        let n = norm(&normal);
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::InvalidSpec(format!("normal must be a unit vector, |n| = {n}")));
        }
        Ok(TipSampleGeometry { radius, gap, normal })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }
}

/// Tip and sample material data: atomic number densities, the dipole
/// coupling, and the atomic frequency distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub rho_a: f64,
    pub rho_b: f64,
    pub coupling: DipoleCoupling,
    pub dist: SpectralDistribution,
}

impl MaterialSpec {
    pub fn new(rho_a: f64, rho_b: f64, coupling: DipoleCoupling, dist: SpectralDistribution) -> Result<Self> {
        if !(rho_a > 0.0) || !(rho_b > 0.0) || !rho_a.is_finite() || !rho_b.is_finite() {
            return Err(Error::InvalidSpec("densities must be positive".into()));
        }
        Ok(MaterialSpec { rho_a, rho_b, coupling, dist })
    }

    /// ⟨q_a q_b⟩ᵃᵛ per unit coupling (J·s per rad/s).
    fn avg_per_beta(&self, settings: &QuadratureSettings) -> Result<f64> {
        averaged_cross_expectation(&self.dist, 1.0, settings)
    }
}

/// Symmetric positive-semidefinite force-noise tensor, N²/Hz per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceNoiseTensor {
    mat: Mat3,
}

impl ForceNoiseTensor {
    /// Tensor with eigenvalue `normal` along n̂ and `transverse` in the
    /// perpendicular plane: t·I + (n−t)·n̂⊗n̂.
    pub fn axial(normal_value: f64, transverse_value: f64, n: &Vec3) -> Self {
        let mut mat = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                mat[i][j] = transverse_value * id + (normal_value - transverse_value) * n[i] * n[j];
            }
        }
        ForceNoiseTensor { mat }
    }

    /// Rank-1 tensor s·(u ⊗ u).
    pub fn rank_one(s: f64, u: &Vec3) -> Self {
        let mut mat = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                mat[i][j] = s * u[i] * u[j];
            }
        }
        ForceNoiseTensor { mat }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.mat
    }

    /// uᵀ S v.
    pub fn component(&self, u: &Vec3, v: &Vec3) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += u[i] * self.mat[i][j] * v[j];
            }
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        self.mat[0][0] + self.mat[1][1] + self.mat[2][2]
    }
}

fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn unit(v: &Vec3) -> Vec3 {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Any unit vector perpendicular to n.
pub fn any_transverse(n: &Vec3) -> Vec3 {
    let pick = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = pick[0] * n[0] + pick[1] * n[1] + pick[2] * n[2];
    unit(&[pick[0] - d * n[0], pick[1] - d * n[1], pick[2] - d * n[2]])
}

/// G_f = r³/(h²(2r+h)²): gap dependence of the total force.
pub fn geometric_force_factor(radius: f64, gap: f64) -> f64 {
    radius.powi(3) / (gap * gap * (2.0 * radius + gap).powi(2))
}

/// G_k = r³(r+h)/(h³(2r+h)³): gap dependence of the total spring and noise.
pub fn geometric_spring_factor(radius: f64, gap: f64) -> f64 {
    radius.powi(3) * (radius + gap) / (gap.powi(3) * (2.0 * radius + gap).powi(3))
}

/// Pairwise Casimir force between one tip atom and one sample atom at
/// separation `r_vec`: (∇β)·⟨q_aq_b⟩ᵃᵛ = −3κ²·⟨qq⟩ᵃᵛ/β · r̂/r⁷,
/// an attractive central r⁻⁷ force.
pub fn pairwise_force(material: &MaterialSpec, r_vec: &Vec3, settings: &QuadratureSettings) -> Result<Vec3> {
    let r = norm(r_vec);
    if !(r > 0.0) {
        return Err(Error::Domain("pairwise force singular at zero separation".into()));
    }
    let c2 = material.coupling.kappa().powi(2) * material.avg_per_beta(settings)?;
    let scale = -3.0 * c2 / r.powi(8); // times r_vec gives -3 C r_hat / r^7
    Ok([scale * r_vec[0], scale * r_vec[1], scale * r_vec[2]])
}

/// Pairwise spring tensor k_ij = −∇_i f_j = 3C(δ_ij − 8 r̂_i r̂_j)/r⁸ with
/// C = κ²·⟨qq⟩ᵃᵛ/β. Symmetric, scales as r⁻⁸.
pub fn pairwise_spring(material: &MaterialSpec, r_vec: &Vec3, settings: &QuadratureSettings) -> Result<Mat3> {
    let r = norm(r_vec);
    if !(r > 0.0) {
        return Err(Error::Domain("pairwise spring singular at zero separation".into()));
    }
    let c2 = material.coupling.kappa().powi(2) * material.avg_per_beta(settings)?;
    let u = unit(r_vec);
    let s = 3.0 * c2 / r.powi(8);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            k[i][j] = s * (id - 8.0 * u[i] * u[j]);
        }
    }
    Ok(k)
}

/// Pairwise force-noise tensor (∇β ⊗ ∇β)·S_dc = 9κ² S_dc (r̂⊗r̂)/r⁸:
/// rank 1 with eigenvector r̂, positive semidefinite.
pub fn pairwise_noise(material: &MaterialSpec, r_vec: &Vec3) -> Result<ForceNoiseTensor> {
    let r = norm(r_vec);
    if !(r > 0.0) {
        return Err(Error::Domain("pairwise noise singular at zero separation".into()));
    }
    let s_dc = averaged_pair_noise_dc(&material.dist)?;
    let u = unit(r_vec);
    Ok(ForceNoiseTensor::rank_one(
        9.0 * material.coupling.kappa().powi(2) * s_dc / r.powi(8),
        &u,
    ))
}

/// Total Casimir force on the tip: −n̂ · (π²/3) ρ_aρ_bκ² (⟨qq⟩ᵃᵛ/β) G_f.
/// For the Debye distribution the prefactor is (3 ln(4/e)π²/10)·ħρρκ²/ω_D.
pub fn total_force(geom: &TipSampleGeometry, material: &MaterialSpec, settings: &QuadratureSettings) -> Result<Vec3> {
    let mag = PI * PI / 3.0
        * material.rho_a
        * material.rho_b
        * material.coupling.kappa().powi(2)
        * material.avg_per_beta(settings)?
        * geometric_force_factor(geom.radius, geom.gap);
    let n = geom.normal();
    Ok([-mag * n[0], -mag * n[1], -mag * n[2]])
}

/// Total spring tensor: −(n̂⊗n̂) · (4π²/3) ρ_aρ_bκ² (⟨qq⟩ᵃᵛ/β) G_k; the
/// transverse components vanish identically (lateral translation
/// invariance over the half-space). Debye prefactor: 6 ln(4/e)π²/5.
pub fn total_spring(geom: &TipSampleGeometry, material: &MaterialSpec, settings: &QuadratureSettings) -> Result<Mat3> {
    let knn = -(4.0 * PI * PI / 3.0)
        * material.rho_a
        * material.rho_b
        * material.coupling.kappa().powi(2)
        * material.avg_per_beta(settings)?
        * geometric_spring_factor(geom.radius, geom.gap);
    let n = geom.normal();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = knn * n[i] * n[j];
        }
    }
    Ok(k)
}

/// Total force-noise tensor: eigenvalue (3π²/5)ρρκ²S_dc·G_k along n̂ and
/// one sixth of that in the transverse plane. Debye normal prefactor:
/// 27π³/100.
pub fn total_noise(geom: &TipSampleGeometry, material: &MaterialSpec) -> Result<ForceNoiseTensor> {
    let s_dc = averaged_pair_noise_dc(&material.dist)?;
    let nn = 0.6 * PI * PI
        * material.rho_a
        * material.rho_b
        * material.coupling.kappa().powi(2)
        * s_dc
        * geometric_spring_factor(geom.radius, geom.gap);
    Ok(ForceNoiseTensor::axial(nn, nn / 6.0, &geom.normal()))
}

// ---------------------------------------------------------------------------
// Monte Carlo oracles
//
// The 6-D pairwise sum is reduced once analytically: for a tip atom at
// height d the lateral (in-plane) integral of each kernel collapses to a
// power profile in the depth coordinate zeta,
//
//   force_z:  -pi C2 zeta^-5        spring_zz: -5 pi C2 zeta^-6
//   noise_zz: (9 pi/4) K  zeta^-6   noise_xx:  (3 pi/8) K  zeta^-6
//
// (C2 = kappa^2 <qq>/beta, K = kappa^2 S_dc). The depth integral over
// [d, inf) is then done by adaptive quadrature per sample point, and the
// sphere volume by plain Monte Carlo. Transverse force and spring vanish in
// the lateral reduction (parity and translation invariance), so their MC
// estimates are exact zeros.
// ---------------------------------------------------------------------------

fn depth_integral(profile: impl Fn(f64) -> f64, d: f64, settings: &QuadratureSettings) -> f64 {
    let s = QuadratureSettings {
        rel_tol: 1e-9,
        abs_tol: 0.0,
        max_subdivisions: 200,
        ..*settings
    };
    integrate_adaptive(profile, d, f64::INFINITY, &s).expect("power-law depth profile converges")
}

fn mc_region(geom: &TipSampleGeometry) -> McRegion {
    McRegion::SphereOverHalfSpace { radius: geom.radius, gap: geom.gap }
}

/// Monte Carlo estimate of [`total_force`]: (force vector, standard error of
/// the normal component), in the caller's frame.
pub fn total_force_mc(
    geom: &TipSampleGeometry,
    material: &MaterialSpec,
    settings: &QuadratureSettings,
) -> Result<(Vec3, f64)> {
    let c2 = material.coupling.kappa().powi(2) * material.avg_per_beta(settings)?;
    let rho = material.rho_a * material.rho_b;
    let f = move |p: &[f64]| {
        let d = p[2];
        depth_integral(|z| -PI * c2 * z.powi(-5), d, settings)
    };
    let (est, se) = integrate_mc(f, &mc_region(geom), settings)?;
    let n = geom.normal();
    let fz = rho * est; // negative: toward the sample
    Ok(([fz * n[0], fz * n[1], fz * n[2]], rho * se))
}

/// Monte Carlo estimate of [`total_spring`]: (tensor, standard error of the
/// nn component). Transverse components are exact zeros of the lateral
/// reduction.
pub fn total_spring_mc(
    geom: &TipSampleGeometry,
    material: &MaterialSpec,
    settings: &QuadratureSettings,
) -> Result<(Mat3, f64)> {
    let c2 = material.coupling.kappa().powi(2) * material.avg_per_beta(settings)?;
    let rho = material.rho_a * material.rho_b;
    let mc_settings = settings.with_seed(settings.seed.wrapping_add(1));
    let f = move |p: &[f64]| {
        let d = p[2];
        depth_integral(|z| -5.0 * PI * c2 * z.powi(-6), d, settings)
    };
    let (est, se) = integrate_mc(f, &mc_region(geom), &mc_settings)?;
    let knn = rho * est;
    let n = geom.normal();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = knn * n[i] * n[j];
        }
    }
    Ok((k, rho * se))
}

/// Monte Carlo estimate of [`total_noise`]: (tensor, [σ_normal, σ_transverse]).
pub fn total_noise_mc(
    geom: &TipSampleGeometry,
    material: &MaterialSpec,
    settings: &QuadratureSettings,
) -> Result<(ForceNoiseTensor, [f64; 2])> {
    let k2 = material.coupling.kappa().powi(2) * averaged_pair_noise_dc(&material.dist)?;
    let rho = material.rho_a * material.rho_b;
    let region = mc_region(geom);

    let f_nn = move |p: &[f64]| depth_integral(|z| 2.25 * PI * k2 * z.powi(-6), p[2], settings);
    let f_tt = move |p: &[f64]| depth_integral(|z| 0.375 * PI * k2 * z.powi(-6), p[2], settings);

    let (nn, se_nn) = integrate_mc(f_nn, &region, &settings.with_seed(settings.seed.wrapping_add(2)))?;
    let (tt, se_tt) = integrate_mc(f_tt, &region, &settings.with_seed(settings.seed.wrapping_add(3)))?;
    Ok((
        ForceNoiseTensor::axial(rho * nn, rho * tt, &geom.normal()),
        [rho * se_nn, rho * se_tt],
    ))
}

// ---------------------------------------------------------------------------
// Cantilever mode shape
// ---------------------------------------------------------------------------

/// Cantilever modal eigenfunction, normalized to φ(L) = 1 at the tip with
/// φ(0) = 0 at the clamp.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeShape {
    /// φ(z) = z/L.
    Linear { length: f64 },
    /// Clamped-free Euler–Bernoulli eigenfunction of the given mode index
    /// (1-based).
    EulerBernoulli { mode: u32, length: f64 },
    /// Sampled shape on an ascending grid z ∈ [0, L].
    Tabulated { z: Vec<f64>, phi: Vec<f64> },
}

impl ModeShape {
    /// Load a tabulated shape from a two-column CSV with header `z,phi`.
    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut z = Vec::new();
        let mut phi = Vec::new();
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty mode-shape file".into()))??;
        if header.trim() != "z,phi" {
            return Err(Error::Parse(format!("expected header 'z,phi', got '{header}'")));
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            z.push(parse_field(cols.next(), i, "z")?);
            phi.push(parse_field(cols.next(), i, "phi")?);
        }
        Ok(ModeShape::Tabulated { z, phi })
    }
}

fn parse_field(field: Option<&str>, row: usize, name: &str) -> Result<f64> {
    field
        .ok_or_else(|| Error::Parse(format!("row {}: missing column '{name}'", row + 2)))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("row {}: bad {name} value ({e})", row + 2)))
}

/// Root of cos λ cosh λ = −1 for the n-th clamped-free mode, via Newton on
/// cos λ + sech λ (overflow-free).
fn clamped_free_root(mode: u32) -> f64 {
    let n = mode as f64;
    let mut lam = if mode == 1 { 1.875 } else { (2.0 * n - 1.0) * PI / 2.0 };
    for _ in 0..60 {
        let f = lam.cos() + 1.0 / lam.cosh();
        let fp = -lam.sin() - lam.sinh() / lam.cosh().powi(2);
        let step = f / fp;
        lam -= step;
        if step.abs() < 1e-15 * lam {
            break;
        }
    }
    lam
}

/// Effective mode length l, defined by l⁻¹ = ∫₀^L [∂φ/∂z]² dz.
///
/// Linear shapes give l = L exactly; the first Euler–Bernoulli mode gives
/// l/L ≈ 0.8606; tabulated shapes are differentiated piecewise.
pub fn mode_length(shape: &ModeShape) -> Result<f64> {
    match shape {
        ModeShape::Linear { length } => {
            if !(*length > 0.0) {
                return Err(Error::InvalidSpec("mode length must be positive".into()));
            }
            Ok(*length)
        }
        ModeShape::EulerBernoulli { mode, length } => {
            if !(*length > 0.0) {
                return Err(Error::InvalidSpec("mode length must be positive".into()));
            }
            if *mode < 1 || *mode > 50 {
                return Err(Error::InvalidSpec("mode index must be in 1..=50".into()));
            }
            let lam = clamped_free_root(*mode);
            let sig = (lam.sinh() - lam.sin()) / (lam.cosh() + lam.cos());
            let raw = |u: f64| {
                (lam * u).cosh() - (lam * u).cos() - sig * ((lam * u).sinh() - (lam * u).sin())
            };
            let tip = raw(1.0);
            let dpsi = |u: f64| {
                (lam * u).sinh() + (lam * u).sin() - sig * ((lam * u).cosh() - (lam * u).cos())
            };
            let s = QuadratureSettings::default();
            let integral = integrate_adaptive(|u| dpsi(u).powi(2), 0.0, 1.0, &s)?;
            // l^-1 = (lambda^2/L) * integral / tip^2
            Ok(length * tip * tip / (lam * lam * integral))
        }
        ModeShape::Tabulated { z, phi } => {
            if z.len() < 2 || z.len() != phi.len() {
                return Err(Error::InvalidSpec("tabulated shape needs two congruent columns".into()));
            }
            if z.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidSpec("z grid must be strictly increasing".into()));
            }
            if z[0] != 0.0 {
                return Err(Error::InvalidSpec("tabulated shape must start at z = 0".into()));
            }
            if phi[0].abs() > 1e-6 {
                return Err(Error::InvalidSpec(format!("clamped end must have phi(0) = 0, got {}", phi[0])));
            }
            let tip = *phi.last().unwrap();
            if (tip - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidSpec(format!(
                    "tip normalization violated: phi(L) = {tip}, expected 1 within 1e-6"
                )));
            }
            let mut inv_l = 0.0;
            for i in 0..z.len() - 1 {
                let dz = z[i + 1] - z[i];
                let slope = (phi[i + 1] - phi[i]) / dz;
                inv_l += slope * slope * dz;
            }
            if !(inv_l > 0.0) {
                return Err(Error::InvalidSpec("degenerate mode shape".into()));
            }
            Ok(1.0 / inv_l)
        }
    }
}
