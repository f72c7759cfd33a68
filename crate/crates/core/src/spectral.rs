//! Fourier representation of periodic fields on the unit torus `[0,1)^2`.
//!
//! Coefficients are stored in half-spectrum layout: row index `a` carries the
//! first wavenumber `k1` (wrapped, `a > n/2` maps to `a - n`), column index
//! `b` carries `k2 = b >= 0`. The forward transform divides by `n^2`, so the
//! stored values are Fourier-series coefficients and Parseval reads
//! `sum_k |u_k|^2 = \int |u|^2`.
//!
//! Differentiation uses the multiplier `2 pi i k`. Nyquist indices
//! (`|k1| = n/2` or `k2 = n/2`) have no well-defined derivative on the grid and
//! are differentiated to zero; the Leray projector removes them entirely.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Square-grid 2D real FFT with unit-torus normalisation.
pub(crate) struct Fft2 {
    m: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static FFT_CACHE: LazyLock<Mutex<HashMap<usize, Arc<Fft2>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

impl Fft2 {
    pub(crate) fn get(m: usize) -> Arc<Fft2> {
        let mut cache = FFT_CACHE.lock().unwrap_or_else(|e| e.into_inner());
        cache
            .entry(m)
            .or_insert_with(|| {
                let mut real = RealFftPlanner::<f64>::new();
                let mut cplx = FftPlanner::<f64>::new();
                Arc::new(Fft2 {
                    m,
                    r2c: real.plan_fft_forward(m),
                    c2r: real.plan_fft_inverse(m),
                    fwd: cplx.plan_fft_forward(m),
                    inv: cplx.plan_fft_inverse(m),
                })
            })
            .clone()
    }

    pub(crate) fn half(&self) -> usize {
        self.m / 2 + 1
    }

    /// Real `m x m` values to normalised half-spectrum coefficients.
    pub(crate) fn forward(&self, input: &[f64], out: &mut [Complex64]) {
        let m = self.m;
        let mh = self.half();
        debug_assert_eq!(input.len(), m * m);
        debug_assert_eq!(out.len(), m * mh);
        let mut rows = input.to_vec();
        let mut tmp = vec![Complex64::new(0.0, 0.0); m * mh];
        for (row_in, row_out) in rows.chunks_exact_mut(m).zip(tmp.chunks_exact_mut(mh)) {
            self.r2c
                .process(row_in, row_out)
                .expect("r2c buffer lengths match plan");
        }
        let mut cols = vec![Complex64::new(0.0, 0.0); m * mh];
        for a in 0..m {
            for b in 0..mh {
                cols[b * m + a] = tmp[a * mh + b];
            }
        }
        self.fwd.process(&mut cols);
        let scale = 1.0 / (m * m) as f64;
        for a in 0..m {
            for b in 0..mh {
                out[a * mh + b] = cols[b * m + a] * scale;
            }
        }
    }

    /// Half-spectrum coefficients to real `m x m` values.
    pub(crate) fn inverse(&self, input: &[Complex64], out: &mut [f64]) {
        let m = self.m;
        let mh = self.half();
        debug_assert_eq!(input.len(), m * mh);
        debug_assert_eq!(out.len(), m * m);
        let mut cols = vec![Complex64::new(0.0, 0.0); m * mh];
        for a in 0..m {
            for b in 0..mh {
                cols[b * m + a] = input[a * mh + b];
            }
        }
        self.inv.process(&mut cols);
        let mut tmp = vec![Complex64::new(0.0, 0.0); m * mh];
        for a in 0..m {
            for b in 0..mh {
                tmp[a * mh + b] = cols[b * m + a];
            }
        }
        for (row_in, row_out) in tmp.chunks_exact_mut(mh).zip(out.chunks_exact_mut(m)) {
            // DC and Nyquist bins of a Hermitian row are real; drop round-off.
            row_in[0].im = 0.0;
            row_in[mh - 1].im = 0.0;
            self.c2r
                .process(row_in, row_out)
                .expect("c2r buffer lengths match plan");
        }
    }
}

/// Uniform `n x n` collocation grid on the unit torus.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    fft: Arc<Fft2>,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!(
                "grid size n must be even and >= 8, got {n}"
            )));
        }
        Ok(Grid {
            n,
            fft: Fft2::get(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored columns (`k2 = 0..=n/2`).
    pub fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn spectral_len(&self) -> usize {
        self.n * self.half()
    }

    pub fn physical_len(&self) -> usize {
        self.n * self.n
    }

    /// Largest wavenumber (per axis) carried by solver states.
    pub fn kmax(&self) -> usize {
        self.n / 2 - 1
    }

    /// Signed first wavenumber of row `a`.
    #[inline]
    pub fn k1(&self, a: usize) -> i64 {
        if a <= self.n / 2 {
            a as i64
        } else {
            a as i64 - self.n as i64
        }
    }

    #[inline]
    pub(crate) fn is_nyquist(&self, a: usize, b: usize) -> bool {
        a == self.n / 2 || b == self.n / 2
    }

    /// Multiplicity of a stored column in the full spectrum.
    #[inline]
    pub(crate) fn weight(&self, b: usize) -> f64 {
        if b == 0 || b == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Storage slot of wavevector `(k1, k2)` with `k2 >= 0`, if representable.
    pub(crate) fn slot(&self, k1: i64, k2: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if k2 < 0 || k2 > h || k1 < -h || k1 > h {
            return None;
        }
        let a = if k1 >= 0 { k1 } else { k1 + self.n as i64 } as usize;
        Some(a * self.half() + k2 as usize)
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Iterates stored modes as `(slot, a, b, k1, k2)`.
    pub(crate) fn modes(&self) -> impl Iterator<Item = (usize, usize, usize, i64, i64)> + '_ {
        let mh = self.half();
        (0..self.n).flat_map(move |a| {
            let k1 = self.k1(a);
            (0..mh).map(move |b| (a * mh + b, a, b, k1, b as i64))
        })
    }

    /// Derivative wavenumbers with Nyquist entries zeroed.
    pub(crate) fn deriv_k(&self, a: usize, b: usize) -> (f64, f64) {
        let k1 = if a == self.n / 2 { 0 } else { self.k1(a) };
        let k2 = if b == self.n / 2 { 0 } else { b as i64 };
        (k1 as f64, k2 as f64)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

fn zeros_c(len: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); len]
}

/// Adds `c e^{2 pi i k.x} + conj(c) e^{-2 pi i k.x}` to a half-spectrum array.
pub(crate) fn add_real_mode(grid: &Grid, coeffs: &mut [Complex64], k1: i64, k2: i64, c: Complex64) {
    if k1 == 0 && k2 == 0 {
        coeffs[0] += Complex64::new(2.0 * c.re, 0.0);
        return;
    }
    let (k1, k2, c) = if k2 < 0 { (-k1, -k2, c.conj()) } else { (k1, k2, c) };
    let slot = grid
        .slot(k1, k2)
        .unwrap_or_else(|| panic!("mode ({k1}, {k2}) not representable on n = {}", grid.n));
    coeffs[slot] += c;
    if k2 == 0 {
        let partner = grid.slot(-k1, 0).expect("partner of representable mode");
        coeffs[partner] += c.conj();
    }
}

/// One-dimensional trigonometric factor of a separable mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    /// Coefficients of `e^{+i theta}` and `e^{-i theta}`.
    fn exp_coeffs(self) -> [Complex64; 2] {
        match self {
            Trig::Sin => [Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)],
            Trig::Cos => [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)],
        }
    }
}

/// Adds `amp * f1(2 pi k1 x1) * f2(2 pi k2 x2)` with exact coefficients.
pub(crate) fn add_separable(
    grid: &Grid,
    coeffs: &mut [Complex64],
    amp: f64,
    (f1, k1): (Trig, i64),
    (f2, k2): (Trig, i64),
) {
    let c1 = f1.exp_coeffs();
    let c2 = f2.exp_coeffs();
    for (i1, s1) in [1i64, -1].into_iter().enumerate() {
        for (i2, s2) in [1i64, -1].into_iter().enumerate() {
            let (q1, q2) = (s1 * k1, s2 * k2);
            let c = c1[i1] * c2[i2] * amp;
            if q1 == 0 && q2 == 0 {
                add_real_mode(grid, coeffs, 0, 0, c * 0.5);
            } else if q2 > 0 || (q2 == 0 && q1 > 0) {
                add_real_mode(grid, coeffs, q1, q2, c);
            }
        }
    }
}

/// Real scalar field in Fourier space (e.g. vorticity).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScalar {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralScalar {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralScalar {
            grid: grid.clone(),
            coeffs: zeros_c(grid.spectral_len()),
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::Config(format!(
                "expected {} coefficients, got {}",
                grid.spectral_len(),
                coeffs.len()
            )));
        }
        Ok(SpectralScalar {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wavevector `(k1, k2)`; zero if not representable.
    pub fn mode(&self, k1: i64, k2: i64) -> Complex64 {
        mode_of(&self.grid, &self.coeffs, k1, k2)
    }

    pub fn add_real_mode(&mut self, k1: i64, k2: i64, c: Complex64) {
        add_real_mode(&self.grid, &mut self.coeffs, k1, k2, c);
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.physical_len()];
        self.grid.fft().inverse(&self.coeffs, &mut out);
        out
    }

    pub fn from_physical(grid: &Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.physical_len() {
            return Err(Error::Config(format!(
                "expected {} physical values, got {}",
                grid.physical_len(),
                values.len()
            )));
        }
        let mut coeffs = zeros_c(grid.spectral_len());
        grid.fft().forward(values, &mut coeffs);
        Ok(SpectralScalar {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn l2_norm_sq(&self) -> f64 {
        weighted_sum(&self.grid, &self.coeffs, |_, _| 1.0)
    }

    pub fn grad_l2_norm_sq(&self) -> f64 {
        weighted_sum(&self.grid, &self.coeffs, |k1, k2| {
            TWO_PI * TWO_PI * (k1 * k1 + k2 * k2) as f64
        })
    }

    /// Gradient field `2 pi i k phi_k`.
    pub fn gradient(&self) -> SpectralField {
        let g = &self.grid;
        let mut out = SpectralField::zeros(g);
        for (s, a, b, _, _) in g.modes() {
            let (k1, k2) = g.deriv_k(a, b);
            let c = self.coeffs[s] * Complex64::new(0.0, TWO_PI);
            out.comps[0][s] = c * k1;
            out.comps[1][s] = c * k2;
        }
        out
    }
}

fn mode_of(grid: &Grid, coeffs: &[Complex64], k1: i64, k2: i64) -> Complex64 {
    if k2 < 0 {
        grid.slot(-k1, -k2)
            .map(|s| coeffs[s].conj())
            .unwrap_or_default()
    } else {
        grid.slot(k1, k2).map(|s| coeffs[s]).unwrap_or_default()
    }
}

fn weighted_sum(grid: &Grid, coeffs: &[Complex64], mult: impl Fn(i64, i64) -> f64) -> f64 {
    grid.modes()
        .map(|(s, _, b, k1, k2)| grid.weight(b) * mult(k1, k2) * coeffs[s].norm_sqr())
        .sum()
}

/// Two-component real vector field in Fourier space. This is the solver state.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: [Vec<Complex64>; 2],
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            comps: [zeros_c(grid.spectral_len()), zeros_c(grid.spectral_len())],
        }
    }

    pub fn from_components(u1: SpectralScalar, u2: SpectralScalar) -> Result<Self> {
        u1.grid.check_same(&u2.grid)?;
        Ok(SpectralField {
            grid: u1.grid,
            comps: [u1.coeffs, u2.coeffs],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn scalar(&self, c: usize) -> SpectralScalar {
        SpectralScalar {
            grid: self.grid.clone(),
            coeffs: self.comps[c].clone(),
        }
    }

    pub fn mode(&self, c: usize, k1: i64, k2: i64) -> Complex64 {
        mode_of(&self.grid, &self.comps[c], k1, k2)
    }

    pub fn add_real_mode(&mut self, c: usize, k1: i64, k2: i64, value: Complex64) {
        add_real_mode(&self.grid, &mut self.comps[c], k1, k2, value);
    }

    /// Adds `amp * f1(2 pi k1 x1) * f2(2 pi k2 x2)` to component `c`.
    pub fn add_separable(&mut self, c: usize, amp: f64, x1: (Trig, i64), x2: (Trig, i64)) {
        add_separable(&self.grid, &mut self.comps[c], amp, x1, x2);
    }

    pub fn to_physical(&self) -> PhysicalField {
        let g = &self.grid;
        let mut u1 = vec![0.0; g.physical_len()];
        let mut u2 = vec![0.0; g.physical_len()];
        g.fft().inverse(&self.comps[0], &mut u1);
        g.fft().inverse(&self.comps[1], &mut u2);
        PhysicalField {
            grid: g.clone(),
            comps: [u1, u2],
        }
    }

    /// Leray projection onto divergence-free fields.
    ///
    /// `u_k <- u_k - k (k.u_k)/|k|^2` for `k != 0`; the mean mode is kept and
    /// Nyquist modes are zeroed.
    pub fn leray_project(&self) -> SpectralField {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        let g = self.grid.clone();
        let [u1, u2] = &mut self.comps;
        for (s, a, b, k1, k2) in g.modes() {
            if s == 0 {
                continue;
            }
            if g.is_nyquist(a, b) {
                u1[s] = Complex64::new(0.0, 0.0);
                u2[s] = Complex64::new(0.0, 0.0);
                continue;
            }
            let (k1, k2) = (k1 as f64, k2 as f64);
            let kk = k1 * k1 + k2 * k2;
            let dot = (u1[s] * k1 + u2[s] * k2) / kk;
            u1[s] -= dot * k1;
            u2[s] -= dot * k2;
        }
    }

    /// Zeroes every mode with `|k|_inf > n_keep`.
    pub fn fourier_truncate(&self, n_keep: usize) -> Result<SpectralField> {
        let mut out = self.clone();
        out.fourier_truncate_in_place(n_keep)?;
        Ok(out)
    }

    pub fn fourier_truncate_in_place(&mut self, n_keep: usize) -> Result<()> {
        if n_keep > self.grid.n / 2 {
            return Err(Error::InvalidArgument(format!(
                "truncation {n_keep} exceeds n/2 = {}",
                self.grid.n / 2
            )));
        }
        let g = self.grid.clone();
        let keep = n_keep as i64;
        for (s, _, _, k1, k2) in g.modes() {
            if k1.abs() > keep || k2 > keep {
                self.comps[0][s] = Complex64::new(0.0, 0.0);
                self.comps[1][s] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    /// Scalar vorticity `curl u = d1 u2 - d2 u1`.
    pub fn curl(&self) -> SpectralScalar {
        let g = &self.grid;
        let mut eta = SpectralScalar::zeros(g);
        for (s, a, b, _, _) in g.modes() {
            let (k1, k2) = g.deriv_k(a, b);
            eta.coeffs[s] =
                Complex64::new(0.0, TWO_PI) * (self.comps[1][s] * k1 - self.comps[0][s] * k2);
        }
        eta
    }

    /// Divergence `d1 u1 + d2 u2` as a scalar field.
    pub fn divergence(&self) -> SpectralScalar {
        let g = &self.grid;
        let mut d = SpectralScalar::zeros(g);
        for (s, a, b, _, _) in g.modes() {
            let (k1, k2) = g.deriv_k(a, b);
            d.coeffs[s] =
                Complex64::new(0.0, TWO_PI) * (self.comps[0][s] * k1 + self.comps[1][s] * k2);
        }
        d
    }

    /// `||u||^2_{L^2}` via Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        weighted_sum(&self.grid, &self.comps[0], |_, _| 1.0)
            + weighted_sum(&self.grid, &self.comps[1], |_, _| 1.0)
    }

    /// `||grad u||^2_{L^2} = sum_k 4 pi^2 |k|^2 |u_k|^2`.
    pub fn grad_l2_norm_sq(&self) -> f64 {
        let m = |k1: i64, k2: i64| TWO_PI * TWO_PI * (k1 * k1 + k2 * k2) as f64;
        weighted_sum(&self.grid, &self.comps[0], m) + weighted_sum(&self.grid, &self.comps[1], m)
    }

    /// `L^2` inner product `(u, v)`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for c in 0..2 {
            for (s, _, b, _, _) in g.modes() {
                acc += g.weight(b) * (self.comps[c][s] * other.comps[c][s].conj()).re;
            }
        }
        acc
    }

    /// `max_k |k.u_k| / (|k| ||u||)`, zero for the zero field.
    pub fn divergence_residual(&self) -> f64 {
        let norm = self.l2_norm_sq().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (s, _, _, k1, k2) in self.grid.modes() {
            if s == 0 {
                continue;
            }
            let (k1, k2) = (k1 as f64, k2 as f64);
            let d = (self.comps[0][s] * k1 + self.comps[1][s] * k2).norm() / k1.hypot(k2);
            worst = worst.max(d);
        }
        worst / norm
    }

    /// Mean (`k = 0`) velocity.
    pub fn mean(&self) -> [f64; 2] {
        [self.comps[0][0].re, self.comps[1][0].re]
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.comps {
            for v in c.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        for c in 0..2 {
            for (d, s) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *d += *s * alpha;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub(crate) fn comps_mut(&mut self) -> &mut [Vec<Complex64>; 2] {
        &mut self.comps
    }

    pub(crate) fn comps(&self) -> &[Vec<Complex64>; 2] {
        &self.comps
    }
}

/// Two-component field sampled at the collocation points `x_m = m / n`.
///
/// Values are stored row-major with the `x1` index outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    comps: [Vec<f64>; 2],
}

impl PhysicalField {
    pub fn new(grid: &Grid, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        let len = grid.physical_len();
        if u1.len() != len || u2.len() != len {
            return Err(Error::Config(format!(
                "physical field needs {len} values per component, got {} and {}",
                u1.len(),
                u2.len()
            )));
        }
        Ok(PhysicalField {
            grid: grid.clone(),
            comps: [u1, u2],
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let len = grid.physical_len();
        PhysicalField {
            grid: grid.clone(),
            comps: [vec![0.0; len], vec![0.0; len]],
        }
    }

    /// Samples `f(x1, x2) -> [u1, u2]` at the collocation points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.n;
        let mut out = PhysicalField::zeros(grid);
        for m1 in 0..n {
            let x1 = m1 as f64 / n as f64;
            for m2 in 0..n {
                let x2 = m2 as f64 / n as f64;
                let v = f(x1, x2);
                out.comps[0][m1 * n + m2] = v[0];
                out.comps[1][m1 * n + m2] = v[1];
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn at(&self, m1: usize, m2: usize) -> [f64; 2] {
        let i = m1 * self.grid.n + m2;
        [self.comps[0][i], self.comps[1][i]]
    }

    pub fn to_spectral(&self) -> SpectralField {
        let g = &self.grid;
        let mut c1 = zeros_c(g.spectral_len());
        let mut c2 = zeros_c(g.spectral_len());
        g.fft().forward(&self.comps[0], &mut c1);
        g.fft().forward(&self.comps[1], &mut c2);
        SpectralField {
            grid: g.clone(),
            comps: [c1, c2],
        }
    }

    /// Collocation quadrature of `int |u|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        let n2 = self.grid.physical_len() as f64;
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum::<f64>()
            / n2
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}
