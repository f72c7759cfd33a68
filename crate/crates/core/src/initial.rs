//! Initial data: flat vortex sheet, fractional Brownian bridge, Taylor-Green.
//!
//! Every constructor returns a Leray-projected field with Nyquist modes
//! removed, ready to be used as a solver state.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, PhysicalField, SpectralField, Trig};

const TWO_PI: f64 = 2.0 * PI;

/// Parameters of the perturbed double shear layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VortexSheetParams {
    /// Smoothing width of the tanh profile.
    pub rho: f64,
    /// Interface perturbation amplitude.
    pub delta: f64,
    /// Number of perturbation modes.
    pub p_modes: usize,
}

impl Default for VortexSheetParams {
    fn default() -> Self {
        VortexSheetParams {
            rho: 0.1,
            delta: 0.025,
            p_modes: 10,
        }
    }
}

impl VortexSheetParams {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.rho > 0.0) {
            errs.push(format!("initial_condition.rho must be > 0, got {}", self.rho));
        }
        if !(self.delta >= 0.0) {
            errs.push(format!("initial_condition.delta must be >= 0, got {}", self.delta));
        }
        if self.p_modes == 0 {
            errs.push("initial_condition.p_modes must be >= 1".to_string());
        }
        errs
    }
}

/// Random interface displacement `delta * sum_k alpha_k sin(2 pi k x1 - beta_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfacePerturbation {
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl InterfacePerturbation {
    pub fn eval(&self, x1: f64) -> f64 {
        self.delta
            * self
                .alphas
                .iter()
                .zip(&self.betas)
                .enumerate()
                .map(|(k, (a, b))| a * (TWO_PI * (k + 1) as f64 * x1 - b).sin())
                .sum::<f64>()
    }

    /// Profile at the collocation abscissae `m / n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|m| self.eval(m as f64 / n as f64)).collect()
    }
}

/// Draws `alpha_k ~ U[0,1]`, `beta_k ~ U[0, 2 pi]` for `k = 1..=p`,
/// interleaved `(alpha_1, beta_1, alpha_2, ...)`.
pub fn perturbation_sigma_delta<R: Rng + ?Sized>(
    params: &VortexSheetParams,
    rng: &mut R,
) -> InterfacePerturbation {
    let mut alphas = Vec::with_capacity(params.p_modes);
    let mut betas = Vec::with_capacity(params.p_modes);
    for _ in 0..params.p_modes {
        alphas.push(rng.gen_range(0.0..=1.0));
        betas.push(rng.gen_range(0.0..=TWO_PI));
    }
    InterfacePerturbation {
        delta: params.delta,
        alphas,
        betas,
    }
}

/// Unprojected double shear layer for a given interface perturbation.
pub fn vortex_sheet_profile(
    grid: &Grid,
    rho: f64,
    perturbation: &InterfacePerturbation,
) -> PhysicalField {
    let n = grid.n();
    let shift = perturbation.sample(n);
    let mut field = PhysicalField::zeros(grid);
    let u1 = field.component_mut(0);
    for (m1, s) in shift.iter().enumerate() {
        for m2 in 0..n {
            let x2 = m2 as f64 / n as f64;
            u1[m1 * n + m2] = if x2 + s <= 0.5 {
                (TWO_PI * (x2 - 0.25) / rho).tanh()
            } else {
                (TWO_PI * (0.75 - x2) / rho).tanh()
            };
        }
    }
    field
}

/// Flat vortex sheet with random interface, Leray-projected.
pub fn flat_vortex_sheet<R: Rng + ?Sized>(
    grid: &Grid,
    params: &VortexSheetParams,
    rng: &mut R,
) -> Result<SpectralField> {
    let errs = params.validate();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let pert = perturbation_sigma_delta(params, rng);
    Ok(vortex_sheet_profile(grid, params.rho, &pert)
        .to_spectral()
        .leray_project())
}

/// Hurst index of the fractional Brownian bridge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbbParams {
    pub hurst: f64,
}

impl Default for FbbParams {
    fn default() -> Self {
        FbbParams { hurst: 0.75 }
    }
}

impl FbbParams {
    pub fn validate(&self) -> Vec<String> {
        if self.hurst > 0.0 && self.hurst < 1.0 {
            Vec::new()
        } else {
            vec![format!(
                "initial_condition.hurst must lie in (0, 1), got {}",
                self.hurst
            )]
        }
    }
}

/// One scalar bridge sample
/// `sum_k |k|^{-(H+1)} sum_{m,n} alpha_k^{mn} sc_m(2 pi k1 x1) sc_n(2 pi k2 x2)`
/// over `1 <= k1, k2 <= kmax`.
///
/// Draws are consumed with `k1` outermost, then `k2`, then
/// `(m, n) = (sin,sin), (sin,cos), (cos,sin), (cos,cos)`.
pub fn fbb_component<R: Rng + ?Sized>(
    grid: &Grid,
    hurst: f64,
    kmax: usize,
    rng: &mut R,
    out: &mut [num_complex::Complex64],
) {
    const PAIRS: [(Trig, Trig); 4] = [
        (Trig::Sin, Trig::Sin),
        (Trig::Sin, Trig::Cos),
        (Trig::Cos, Trig::Sin),
        (Trig::Cos, Trig::Cos),
    ];
    let kmax = kmax as i64;
    for k1 in 1..=kmax {
        for k2 in 1..=kmax {
            let amp = ((k1 * k1 + k2 * k2) as f64).powf(-(hurst + 1.0) / 2.0);
            for (f1, f2) in PAIRS {
                let alpha: f64 = rng.gen_range(-1.0..=1.0);
                crate::spectral::add_separable(grid, out, amp * alpha, (f1, k1), (f2, k2));
            }
        }
    }
}

/// Fractional Brownian bridge velocity: one independent sample per
/// component, Leray-projected.
pub fn fractional_brownian_bridge<R: Rng + ?Sized>(
    grid: &Grid,
    params: &FbbParams,
    rng: &mut R,
) -> Result<SpectralField> {
    let errs = params.validate();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let mut u = SpectralField::zeros(grid);
    for c in 0..2 {
        fbb_component(grid, params.hurst, grid.kmax(), rng, u.component_mut(c));
    }
    Ok(u.leray_project())
}

/// `u = A (-cos(2 pi x1) sin(2 pi x2), sin(2 pi x1) cos(2 pi x2))`.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zeros(grid);
    u.add_separable(0, -amplitude, (Trig::Cos, 1), (Trig::Sin, 1));
    u.add_separable(1, amplitude, (Trig::Sin, 1), (Trig::Cos, 1));
    u
}

/// Divergence-free field with independent uniform coefficients on
/// `0 < max(|k1|, |k2|) <= kmax`, Leray-projected.
pub fn random_band_limited<R: Rng + ?Sized>(grid: &Grid, kmax: usize, rng: &mut R) -> Result<SpectralField> {
    if kmax == 0 || kmax > grid.kmax() {
        return Err(Error::InvalidArgument(format!(
            "band limit {kmax} must lie in [1, {}]",
            grid.kmax()
        )));
    }
    let k = kmax as i64;
    let mut u = SpectralField::zeros(grid);
    for c in 0..2 {
        for k1 in -k..=k {
            for k2 in 0..=k {
                if k2 == 0 && k1 <= 0 {
                    continue;
                }
                let z = num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                u.add_real_mode(c, k1, k2, z);
            }
        }
    }
    Ok(u.leray_project())
}

/// Shell-summed energy spectrum `E(k) = sum_{k - 1/2 <= |q| < k + 1/2} |u_q|^2`.
pub fn shell_spectrum(u: &SpectralField) -> Vec<f64> {
    let g = u.grid();
    let mut shells = vec![0.0; g.n() / 2 + 1];
    for (s, _, b, k1, k2) in g.modes() {
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt().round() as usize;
        if k < shells.len() {
            let e = u.component(0)[s].norm_sqr() + u.component(1)[s].norm_sqr();
            shells[k] += g.weight(b) * e;
        }
    }
    shells
}
