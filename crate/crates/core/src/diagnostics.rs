//! Measured quantities: energies, dissipation integrals, energy-balance
//! residuals, structure functions, fractional Sobolev seminorms and the
//! disk-average / Poincare-type checks on single snapshots.
//!
//! Structure functions use shifts `h` on the integer lattice of the grid
//! (`|h| <= r n` in grid units) with periodic wraparound. Under the default
//! [`SfNormalization::Average`] every admissible offset has weight
//! `1 / #offsets`, i.e. the ball average `fint_{B_r}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensemble::CellStats;
use crate::error::{Error, Result};
use crate::spectral::{Grid, PhysicalField, SpectralField};

const TWO_PI: f64 = 2.0 * PI;

/// Diameter of the unit torus used as the largest admissible radius.
pub const R0: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Per-record scalar diagnostics of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `||u||^2_{L^2}` (no factor 1/2).
    pub energy: f64,
    /// `||grad u||^2_{L^2}`.
    pub grad_sq: f64,
    /// `||curl u||^2_{L^2}`.
    pub enstrophy: f64,
    /// Running `2 nu int_0^t ||grad u||^2 ds`.
    pub cumulative_dissipation: f64,
    /// `sigma_bar * t`.
    pub noise_input_theoretical: f64,
}

impl DiagnosticsRecord {
    pub fn measure(u: &SpectralField, t: f64, cumulative_dissipation: f64, sigma_bar: f64) -> Self {
        DiagnosticsRecord {
            t,
            energy: u.l2_norm_sq(),
            grad_sq: u.grad_l2_norm_sq(),
            enstrophy: u.curl().l2_norm_sq(),
            cumulative_dissipation,
            noise_input_theoretical: sigma_bar * t,
        }
    }

    /// `energy(t) + dissipation(t) - energy(0)` relative to a reference energy.
    pub fn measured_input(&self, initial_energy: f64) -> f64 {
        self.energy + self.cumulative_dissipation - initial_energy
    }
}

/// Ball measure used in the structure function.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SfNormalization {
    /// `fint_{B_r} dh` (ball average).
    #[default]
    Average,
    /// `int_{B_r} dh`.
    Integral,
}

/// Integer offsets `h` with `|h| <= radius_cells`, in a fixed order.
pub fn ball_offsets(radius_cells: f64) -> Vec<(i64, i64)> {
    let m = radius_cells.floor() as i64;
    let r2 = radius_cells * radius_cells * (1.0 + 1e-12);
    let mut out = Vec::new();
    for h1 in -m..=m {
        for h2 in -m..=m {
            if ((h1 * h1 + h2 * h2) as f64) <= r2 {
                out.push((h1, h2));
            }
        }
    }
    out
}

fn check_radius(grid: &Grid, r: f64) -> Result<()> {
    let n = grid.n();
    if !(r * n as f64 >= 1.0) {
        return Err(Error::RadiusUnresolved { r, n });
    }
    if r > R0 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} exceeds the torus diameter {R0}"
        )));
    }
    Ok(())
}

/// Second-order increments `D(h) = int_D |v(x+h) - v(x)|^2 dx` for all grid
/// offsets, from the autocorrelation `D(h) = 2 (C(0) - C(h))`.
pub struct IncrementMap {
    n: usize,
    values: Vec<f64>,
}

impl IncrementMap {
    pub fn new(v: &SpectralField) -> Self {
        let g = v.grid();
        let mut power = vec![num_complex::Complex64::new(0.0, 0.0); g.spectral_len()];
        for (s, p) in power.iter_mut().enumerate() {
            p.re = v.component(0)[s].norm_sqr() + v.component(1)[s].norm_sqr();
        }
        let mut corr = vec![0.0; g.physical_len()];
        g.fft().inverse(&power, &mut corr);
        let c0 = corr[0];
        let values = corr.iter().map(|c| (2.0 * (c0 - c)).max(0.0)).collect();
        IncrementMap { n: g.n(), values }
    }

    #[inline]
    pub fn at(&self, h1: i64, h2: i64) -> f64 {
        let n = self.n as i64;
        let a = h1.rem_euclid(n) as usize;
        let b = h2.rem_euclid(n) as usize;
        self.values[a * self.n + b]
    }

    /// `S_2(v; r)^2` under the given normalisation.
    pub fn structure_sq(&self, r: f64, norm: SfNormalization) -> f64 {
        let offsets = ball_offsets(r * self.n as f64);
        let sum: f64 = offsets.iter().map(|&(a, b)| self.at(a, b)).sum();
        match norm {
            SfNormalization::Average => sum / offsets.len() as f64,
            SfNormalization::Integral => sum / (self.n * self.n) as f64,
        }
    }
}

/// `int_D |v(x+h) - v(x)|^p dx` by direct summation over collocation points.
pub fn increment_moment(v: &PhysicalField, h1: i64, h2: i64, p: f64) -> f64 {
    let n = v.grid().n();
    let ni = n as i64;
    let mut acc = 0.0;
    for m1 in 0..n {
        let s1 = (m1 as i64 + h1).rem_euclid(ni) as usize;
        for m2 in 0..n {
            let s2 = (m2 as i64 + h2).rem_euclid(ni) as usize;
            let a = v.at(m1, m2);
            let b = v.at(s1, s2);
            let d = (b[0] - a[0]).hypot(b[1] - a[1]);
            acc += if p == 2.0 { d * d } else { d.powf(p) };
        }
    }
    acc / (n * n) as f64
}

/// `S_p(v; r)`: the `p`-th root of the (averaged or integrated) ball sum of
/// `int_D |v(x+h) - v(x)|^p dx`.
pub fn structure_function(v: &PhysicalField, r: f64, p: u32, norm: SfNormalization) -> Result<f64> {
    check_radius(v.grid(), r)?;
    if p == 0 {
        return Err(Error::InvalidArgument("structure function order p must be >= 1".into()));
    }
    let n = v.grid().n();
    let sp = if p == 2 {
        IncrementMap::new(&v.to_spectral()).structure_sq(r, norm)
    } else {
        let offsets = ball_offsets(r * n as f64);
        let sum: f64 = offsets
            .iter()
            .map(|&(a, b)| increment_moment(v, a, b, p as f64))
            .sum();
        match norm {
            SfNormalization::Average => sum / offsets.len() as f64,
            SfNormalization::Integral => sum / (n * n) as f64,
        }
    };
    Ok(sp.max(0.0).powf(1.0 / p as f64))
}

/// `S_2(v; r)^2` for several radii of one spectral snapshot.
pub fn structure_sq_table(v: &SpectralField, radii: &[f64], norm: SfNormalization) -> Result<Vec<f64>> {
    for &r in radii {
        check_radius(v.grid(), r)?;
    }
    let map = IncrementMap::new(v);
    Ok(radii.iter().map(|&r| map.structure_sq(r, norm)).collect())
}

/// Trapezoidal `int S^p dt` over the sample times.
pub fn time_integrate(times: &[f64], values_pow_p: &[f64]) -> Result<f64> {
    if times.len() != values_pow_p.len() {
        return Err(Error::InvalidArgument(format!(
            "{} times but {} values",
            times.len(),
            values_pow_p.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::InvalidArgument(
            "time integration needs at least two snapshots".into(),
        ));
    }
    Ok(times
        .windows(2)
        .zip(values_pow_p.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum())
}

/// `S_p^T(v; r) = (int_0^T S_p(v(t); r)^p dt)^{1/p}` by the trapezoid rule.
pub fn structure_function_time_integrated(
    times: &[f64],
    snapshots: &[PhysicalField],
    r: f64,
    p: u32,
    norm: SfNormalization,
) -> Result<f64> {
    if let Some(first) = snapshots.first() {
        for s in snapshots {
            first.grid().check_same(s.grid())?;
        }
    }
    let vals = snapshots
        .iter()
        .map(|v| structure_function(v, r, p, norm).map(|s| s.powi(p as i32)))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_integrate(times, &vals)?.powf(1.0 / p as f64))
}

/// Structure functions over a radius grid, per snapshot and time-integrated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionTable {
    pub radii: Vec<f64>,
    pub p: u32,
    pub values_snapshot: Vec<f64>,
    pub values_time_integrated: Vec<f64>,
}

/// Power-law fit `S(r) ~ prefactor * r^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub fit_range: (f64, f64),
    /// Largest absolute deviation of `log S` from the fitted line.
    pub residual: f64,
}

/// Least-squares slope of `log S` against `log r` within `fit_range`.
pub fn fit_modulus(radii: &[f64], values: &[f64], fit_range: (f64, f64)) -> Result<ModulusFit> {
    if radii.len() != values.len() {
        return Err(Error::InvalidArgument("radii and values differ in length".into()));
    }
    let tol = 1e-12;
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(r, _)| **r >= fit_range.0 * (1.0 - tol) && **r <= fit_range.1 * (1.0 + tol))
        .map(|(r, v)| (*r, *v))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "modulus fit needs at least 4 radii in range, found {}",
            pts.len()
        )));
    }
    if let Some((r, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "structure function value {v} at r = {r} is not positive"
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - icpt - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(ModulusFit {
        exponent: slope,
        prefactor: icpt.exp(),
        fit_range,
        residual,
    })
}

/// Both sides of `int_D fint_{B_r} |h . grad v|^2 dh dx = (r^2/4) ||grad v||^2`.
///
/// The left side averages over the lattice shifts of the grid; for a
/// band-limited field the `x` integral is exact, so it reduces to
/// `sum_{a,b} M_ab fint h_a h_b` with `M_ab = int d_a v . d_b v`.
pub fn disk_average_identity_check(v: &SpectralField, r: f64) -> Result<(f64, f64)> {
    let g = v.grid();
    check_radius(g, r)?;
    let mut m = [[0.0; 2]; 2];
    for (s, _, b, k1, k2) in g.modes() {
        let w = g.weight(b)
            * TWO_PI
            * TWO_PI
            * (v.component(0)[s].norm_sqr() + v.component(1)[s].norm_sqr());
        let k = [k1 as f64, k2 as f64];
        for a in 0..2 {
            for c in 0..2 {
                m[a][c] += w * k[a] * k[c];
            }
        }
    }
    let n = g.n() as f64;
    let offsets = ball_offsets(r * n);
    let mut mom = [[0.0; 2]; 2];
    for &(h1, h2) in &offsets {
        let h = [h1 as f64 / n, h2 as f64 / n];
        for a in 0..2 {
            for c in 0..2 {
                mom[a][c] += h[a] * h[c];
            }
        }
    }
    let cnt = offsets.len() as f64;
    let mut lhs = 0.0;
    for a in 0..2 {
        for c in 0..2 {
            lhs += m[a][c] * mom[a][c] / cnt;
        }
    }
    Ok((lhs, 0.25 * r * r * v.grad_l2_norm_sq()))
}

/// Terms of `||eta||^2 <= (8/r^2) S_2(v;r)^2 + C r^2 ||grad eta||^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareTerms {
    pub vorticity_sq: f64,
    pub structure_term: f64,
    pub curvature_term: f64,
}

impl PoincareTerms {
    pub fn holds(&self) -> bool {
        self.vorticity_sq <= self.structure_term + self.curvature_term
    }

    /// `rhs / lhs`; infinite for zero vorticity.
    pub fn margin(&self) -> f64 {
        (self.structure_term + self.curvature_term) / self.vorticity_sq
    }
}

/// Evaluates the vorticity inequality with ball-averaged `S_2`.
pub fn poincare_terms(v: &SpectralField, r: f64, c: f64) -> Result<PoincareTerms> {
    check_radius(v.grid(), r)?;
    let eta = v.curl();
    let s2 = IncrementMap::new(v).structure_sq(r, SfNormalization::Average);
    Ok(PoincareTerms {
        vorticity_sq: eta.l2_norm_sq(),
        structure_term: 8.0 / (r * r) * s2,
        curvature_term: c * r * r * eta.grad_l2_norm_sq(),
    })
}

pub fn poincare_inequality_check(v: &SpectralField, r: f64, c: f64) -> Result<bool> {
    Ok(poincare_terms(v, r, c)?.holds())
}

/// Fractional seminorm estimates of `|v|_{W^{s,p}}^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevEstimate {
    /// `sum_i r_{i+1}^{-(2+sp)} int_D int_{A_i} |v(x+h) - v(x)|^p dh dx`.
    pub annulus_sum: f64,
    /// `sum_k |2 pi k|^{2s} |v_k|^2` (only for `p = 2`).
    pub spectral: Option<f64>,
    /// Number of dyadic annuli above the grid scale.
    pub levels: usize,
}

/// Dyadic-annulus estimator with `r_0 = sqrt(2)/2`, `r_i = 2^{-i} r_0`,
/// stopping once `r_i < 2/n`. Shifts inside the innermost retained radius are
/// dropped, so the estimate is a lower bound near the grid scale.
pub fn sobolev_seminorm(v: &PhysicalField, s: f64, p: u32) -> Result<SobolevEstimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fractional order s must lie in (0, 1), got {s}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("order p must be >= 1".into()));
    }
    let n = v.grid().n();
    let nf = n as f64;
    let pf = p as f64;
    let spec = v.to_spectral();
    let map = (p == 2).then(|| IncrementMap::new(&spec));
    let moment = |h1: i64, h2: i64| match &map {
        Some(m) => m.at(h1, h2),
        None => increment_moment(v, h1, h2, pf),
    };
    let cell = 1.0 / (nf * nf);
    let mut total = 0.0;
    let mut levels = 0;
    let mut r_out = R0;
    while r_out >= 2.0 / nf {
        let r_in = 0.5 * r_out;
        let (o2, i2) = ((r_out * nf).powi(2), (r_in * nf).powi(2));
        let m = (r_out * nf).floor() as i64;
        let mut shell = 0.0;
        for h1 in -m..=m {
            for h2 in -m..=m {
                let d2 = (h1 * h1 + h2 * h2) as f64;
                if d2 > i2 && d2 <= o2 * (1.0 + 1e-12) {
                    shell += moment(h1, h2) * cell;
                }
            }
        }
        total += shell / r_in.powf(2.0 + s * pf);
        levels += 1;
        r_out = r_in;
    }
    let spectral = (p == 2).then(|| {
        let g = spec.grid();
        g.modes()
            .map(|(sl, _, b, k1, k2)| {
                let kk = TWO_PI * TWO_PI * (k1 * k1 + k2 * k2) as f64;
                g.weight(b)
                    * kk.powf(s)
                    * (spec.component(0)[sl].norm_sqr() + spec.component(1)[sl].norm_sqr())
            })
            .sum()
    });
    Ok(SobolevEstimate {
        annulus_sum: total,
        spectral,
        levels,
    })
}

/// Left-endpoint Riemann sum of `2 nu ||grad u||^2` over `n_rect` equal
/// rectangles on `[0, t]`, sampling the series at the nearest recorded time
/// at or before each left endpoint.
pub fn dissipation_integral(series: &[(f64, f64)], nu: f64, t: f64, n_rect: usize) -> Result<f64> {
    if n_rect == 0 {
        return Err(Error::InvalidArgument("n_rect must be >= 1".into()));
    }
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return Err(Error::InvalidArgument("empty gradient series".into()));
    };
    if first.0 > 0.0 || last.0 < t * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "gradient series covers [{}, {}], need [0, {t}]",
            first.0, last.0
        )));
    }
    let h = t / n_rect as f64;
    let mut idx = 0;
    let mut acc = 0.0;
    for j in 0..n_rect {
        let s = j as f64 * h;
        while idx + 1 < series.len() && series[idx + 1].0 <= s {
            idx += 1;
        }
        acc += series[idx].1;
    }
    Ok(2.0 * nu * h * acc)
}

/// Trapezoidal `2 nu int ||grad u||^2` over the full series.
pub fn dissipation_trapezoid(series: &[(f64, f64)], nu: f64) -> f64 {
    2.0 * nu
        * series
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum::<f64>()
}

/// Mean energy-balance residual of an ensemble cell at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceResidual {
    pub t: f64,
    /// `E||u(t)||^2 + 2 nu E int ||grad u||^2 - E||u(0)||^2 - sigma_bar t`.
    pub residual: f64,
    /// Monte Carlo standard error of the measured-input combination.
    pub stderr: f64,
}

pub fn energy_balance_residual(stats: &CellStats, sigma_bar: f64, t: f64) -> Result<BalanceResidual> {
    let e_t = stats.energy.mean_at(&stats.times, t)?;
    let d_t = stats.cum_dissipation.mean_at(&stats.times, t)?;
    let e_0 = stats.energy.mean.first().copied().unwrap_or(0.0);
    let stderr = stats.measured_input.stderr_at(&stats.times, t)?;
    Ok(BalanceResidual {
        t,
        residual: e_t + d_t - e_0 - sigma_bar * t,
        stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn shear(grid: &Grid) -> SpectralField {
        let mut u = SpectralField::zeros(grid);
        u.add_real_mode(0, 0, 1, Complex64::new(0.0, -0.5));
        u
    }

    #[test]
    fn constant_field_has_zero_structure_function() {
        let g = Grid::new(16).unwrap();
        let v = PhysicalField::from_fn(&g, |_, _| [1.5, -2.0]);
        for r in [0.1, 0.3] {
            for p in [1, 2, 3] {
                assert_abs_diff_eq!(
                    structure_function(&v, r, p, SfNormalization::Average).unwrap(),
                    0.0,
                    epsilon = 1e-7
                );
            }
        }
    }

    #[test]
    fn autocorrelation_matches_brute_force() {
        let g = Grid::new(16).unwrap();
        let v = PhysicalField::from_fn(&g, |x, y| {
            [
                (TWO_PI * x).sin() * (TWO_PI * 2.0 * y).cos() + 0.3 * (TWO_PI * 3.0 * y).sin(),
                (TWO_PI * (x + y)).cos(),
            ]
        });
        let map = IncrementMap::new(&v.to_spectral());
        for (h1, h2) in [(0, 1), (2, -3), (5, 5), (-7, 0)] {
            assert_abs_diff_eq!(map.at(h1, h2), increment_moment(&v, h1, h2, 2.0), epsilon = 1e-12);
        }
        for r in [0.1, 0.25] {
            let fast = structure_function(&v, r, 2, SfNormalization::Average).unwrap();
            let offsets = ball_offsets(r * 16.0);
            let slow: f64 = offsets
                .iter()
                .map(|&(a, b)| increment_moment(&v, a, b, 2.0))
                .sum::<f64>()
                / offsets.len() as f64;
            assert_abs_diff_eq!(fast, slow.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn shear_small_radius_limit() {
        let g = Grid::new(256).unwrap();
        let v = shear(&g);
        let r = 0.02;
        let s2 = IncrementMap::new(&v).structure_sq(r, SfNormalization::Average);
        let (lhs, rhs) = disk_average_identity_check(&v, r).unwrap();
        assert_abs_diff_eq!(rhs, r * r / 4.0 * 2.0 * PI * PI, epsilon = 1e-15);
        // small-r expansion: S_2^2 = lhs (1 + O(r^2 k^2))
        assert!((s2 / lhs - 1.0).abs() < 0.02, "{}", s2 / lhs);
    }

    #[test]
    fn jump_has_first_order_scaling() {
        let g = Grid::new(256).unwrap();
        let v = PhysicalField::from_fn(&g, |_, y| [if y < 0.5 { 1.0 } else { 0.0 }, 0.0]);
        let radii = [0.02, 0.04, 0.08, 0.16];
        let vals: Vec<f64> = radii
            .iter()
            .map(|&r| structure_function(&v, r, 2, SfNormalization::Average).unwrap().powi(2))
            .collect();
        let fit = fit_modulus(&radii, &vals, (0.02, 0.16)).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.05, "{}", fit.exponent);
    }

    #[test]
    fn radius_below_cell_is_rejected() {
        let g = Grid::new(16).unwrap();
        let v = PhysicalField::zeros(&g);
        assert!(matches!(
            structure_function(&v, 0.05, 2, SfNormalization::Average),
            Err(Error::RadiusUnresolved { .. })
        ));
    }

    #[test]
    fn time_integration_cases() {
        assert_abs_diff_eq!(time_integrate(&[0.0, 1.0], &[2.0, 4.0]).unwrap(), 3.0);
        assert!(time_integrate(&[0.0], &[1.0]).is_err());
        let g = Grid::new(16).unwrap();
        let v = shear(&g).to_physical();
        let snaps = vec![v.clone(), v.clone(), v.clone()];
        let s = structure_function(&v, 0.2, 2, SfNormalization::Average).unwrap();
        let st = structure_function_time_integrated(&[0.0, 1.0, 4.0], &snaps, 0.2, 2, SfNormalization::Average)
            .unwrap();
        assert_abs_diff_eq!(st, 2.0 * s, epsilon = 1e-12);
        let zeros = vec![PhysicalField::zeros(&g); 2];
        assert_eq!(
            structure_function_time_integrated(&[0.0, 1.0], &zeros, 0.2, 2, SfNormalization::Average).unwrap(),
            0.0
        );
    }

    #[test]
    fn exact_power_law_fits() {
        let radii: Vec<f64> = (0..8).map(|i| 0.01 * 1.5f64.powi(i)).collect();
        let half: Vec<f64> = radii.iter().map(|r| r.sqrt()).collect();
        let fit = fit_modulus(&radii, &half, (0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(fit.exponent, 0.5, epsilon = 1e-12);
        let lin: Vec<f64> = radii.iter().map(|r| 3.0 * r).collect();
        let fit = fit_modulus(&radii, &lin, (0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(fit.exponent, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.prefactor, 3.0, epsilon = 1e-10);
        assert!(fit_modulus(&radii[..3], &lin[..3], (0.0, 1.0)).is_err());
        let mut bad = lin.clone();
        bad[2] = 0.0;
        assert!(fit_modulus(&radii, &bad, (0.0, 1.0)).is_err());
    }

    #[test]
    fn disk_identity_zero_and_shear() {
        let g = Grid::new(256).unwrap();
        let (l, r) = disk_average_identity_check(&SpectralField::zeros(&g), 0.1).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let (l, r) = disk_average_identity_check(&shear(&g), 0.1).unwrap();
        assert!((l / r - 1.0).abs() < 0.02);
    }

    #[test]
    fn poincare_zero_and_single_mode() {
        let g = Grid::new(256).unwrap();
        assert!(poincare_inequality_check(&SpectralField::zeros(&g), 0.1, 1.0).unwrap());
        let t = poincare_terms(&shear(&g), 0.05, 1.0).unwrap();
        assert!(t.holds());
        // small r: (8/r^2) S_2^2 ~ 2 ||eta||^2
        assert!((t.structure_term / t.vorticity_sq - 2.0).abs() < 0.1);
        // monotone in C
        let t2 = poincare_terms(&shear(&g), 0.05, 2.0).unwrap();
        assert!(t2.margin() >= t.margin());
    }

    #[test]
    fn riemann_sum_cases() {
        let series: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 * 0.01, 5.0)).collect();
        for n_rect in [1, 7, 1000] {
            assert_abs_diff_eq!(
                dissipation_integral(&series, 0.1, 1.0, n_rect).unwrap(),
                2.0 * 0.1 * 5.0,
                epsilon = 1e-12
            );
        }
        // linear integrand g(s) = s sampled finely: error O(1/n_rect)
        let lin: Vec<(f64, f64)> = (0..=100_000).map(|i| (i as f64 * 1e-5, i as f64 * 1e-5)).collect();
        let e1 = (dissipation_integral(&lin, 0.5, 1.0, 100).unwrap() - 0.5).abs();
        let e2 = (dissipation_integral(&lin, 0.5, 1.0, 1000).unwrap() - 0.5).abs();
        assert!(e1 > 5.0 * e2 && e2 < 1e-3);
        assert!(dissipation_integral(&series, 0.1, 2.0, 10).is_err());
        assert!(dissipation_integral(&[], 0.1, 1.0, 10).is_err());
    }

    #[test]
    fn sobolev_constant_and_validation() {
        let g = Grid::new(32).unwrap();
        let v = PhysicalField::from_fn(&g, |_, _| [2.0, 1.0]);
        let est = sobolev_seminorm(&v, 0.5, 2).unwrap();
        assert!(est.annulus_sum.abs() < 1e-20);
        assert!(sobolev_seminorm(&v, 1.0, 2).is_err());
        assert!(sobolev_seminorm(&v, 0.0, 2).is_err());
    }
}
