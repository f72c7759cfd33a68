//! Additive colored-in-space, white-in-time forcing `sigma dW`.
//!
//! The noise is expanded in the divergence-free family
//!
//! ```text
//! e_{i,j}(x) = 2 / sqrt(i^2 + j^2) * ( j cos(2 pi i x1) cos(2 pi j x2),
//!                                      i sin(2 pi i x1) sin(2 pi j x2) )
//! ```
//!
//! for `1 <= i, j <= n_b`, each element with unit `L^2` norm and
//! `||curl e_{i,j}||^2 = 4 pi^2 (i^2 + j^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField, Trig};

/// Exact Fourier coefficients of the basis element `e_{i,j}`.
pub fn eval_basis(grid: &Grid, i: usize, j: usize) -> Result<SpectralField> {
    if i == 0 || j == 0 || 2 * i.max(j) > grid.n() / 2 {
        return Err(Error::UnrepresentableMode { i, j, n: grid.n() });
    }
    let (fi, fj) = (i as f64, j as f64);
    let c = 2.0 / fi.hypot(fj);
    let (ki, kj) = (i as i64, j as i64);
    let mut e = SpectralField::zeros(grid);
    e.add_separable(0, c * fj, (Trig::Cos, ki), (Trig::Cos, kj));
    e.add_separable(1, c * fi, (Trig::Sin, ki), (Trig::Sin, kj));
    Ok(e)
}

/// Nonzero stored coefficients of one basis element.
#[derive(Clone, Debug)]
struct SparseElement {
    entries: Vec<(usize, [Complex64; 2])>,
}

impl SparseElement {
    fn from_dense(e: &SpectralField) -> Self {
        let entries = (0..e.grid().spectral_len())
            .filter_map(|s| {
                let v = [e.component(0)[s], e.component(1)[s]];
                (v[0].norm_sqr() + v[1].norm_sqr() > 0.0).then_some((s, v))
            })
            .collect();
        SparseElement { entries }
    }
}

/// The truncated forcing family `{b_{i,j}, e_{i,j}}` on a grid.
#[derive(Clone, Debug)]
pub struct ForcingBasis {
    grid: Grid,
    n_b: usize,
    /// `b_{i,j}` row-major in `(i, j)`, `i, j = 1..=n_b`.
    coeffs: Vec<f64>,
    elements: Vec<SparseElement>,
}

impl ForcingBasis {
    /// All `n_b^2` coefficients equal to `sigma`.
    pub fn uniform(grid: &Grid, n_b: usize, sigma: f64) -> Result<Self> {
        Self::with_coeffs(grid, n_b, vec![sigma; n_b * n_b])
    }

    /// Explicit coefficient table, row-major in `(i, j)`.
    pub fn with_coeffs(grid: &Grid, n_b: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != n_b * n_b {
            return Err(Error::InvalidArgument(format!(
                "forcing table needs {} coefficients, got {}",
                n_b * n_b,
                coeffs.len()
            )));
        }
        if let Some(b) = coeffs.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "forcing coefficient {b} is not finite"
            )));
        }
        let mut elements = Vec::with_capacity(n_b * n_b);
        for i in 1..=n_b {
            for j in 1..=n_b {
                elements.push(SparseElement::from_dense(&eval_basis(grid, i, j)?));
            }
        }
        Ok(ForcingBasis {
            grid: grid.clone(),
            n_b,
            coeffs,
            elements,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[(i - 1) * self.n_b + (j - 1)]
    }

    /// `sigma_bar = sum b_{i,j}^2`, the mean energy input rate.
    pub fn sigma_bar(&self) -> f64 {
        self.coeffs.iter().map(|b| b * b).sum()
    }

    /// `rho_bar = sum b_{i,j}^2 ||curl e_{i,j}||^2`.
    pub fn rho_bar(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..=self.n_b {
            for j in 1..=self.n_b {
                let b = self.coeff(i, j);
                acc += b * b * 4.0 * PI * PI * (i * i + j * j) as f64;
            }
        }
        acc
    }

    /// Builds `sum b_{i,j} xi_{i,j} sqrt(dt) e_{i,j}` from given draws.
    pub fn increment_from_gaussians(&self, dt: f64, gaussians: Vec<f64>) -> Result<NoiseIncrement> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if gaussians.len() != self.elements.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} gaussian draws, got {}",
                self.elements.len(),
                gaussians.len()
            )));
        }
        let sq = dt.sqrt();
        let mut field = SpectralField::zeros(&self.grid);
        for ((el, b), xi) in self.elements.iter().zip(&self.coeffs).zip(&gaussians) {
            let w = b * xi * sq;
            if w == 0.0 {
                continue;
            }
            for (s, v) in &el.entries {
                field.component_mut(0)[*s] += v[0] * w;
                field.component_mut(1)[*s] += v[1] * w;
            }
        }
        Ok(NoiseIncrement {
            dt,
            field,
            gaussians,
        })
    }

    /// Draws one increment `sigma dW` over a step of length `dt`.
    ///
    /// Consumes `n_b^2` standard normals from `rng` in `(i, j)` row-major order.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Result<NoiseIncrement> {
        let gaussians = (0..self.elements.len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.increment_from_gaussians(dt, gaussians)
    }
}

/// Value of `sigma (W(t + dt) - W(t))` together with its raw draws.
#[derive(Clone, Debug)]
pub struct NoiseIncrement {
    pub dt: f64,
    pub field: SpectralField,
    pub gaussians: Vec<f64>,
}

impl NoiseIncrement {
    pub fn zero(grid: &Grid, dt: f64) -> Self {
        NoiseIncrement {
            dt,
            field: SpectralField::zeros(grid),
            gaussians: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn basis_is_divergence_free_with_unit_norm() {
        let g = Grid::new(64).unwrap();
        for i in 1..=9 {
            for j in 1..=9 {
                let e = eval_basis(&g, i, j).unwrap();
                assert_abs_diff_eq!(e.l2_norm_sq(), 1.0, epsilon = 1e-12);
                assert!(e.divergence().l2_norm_sq().sqrt() < 1e-12);
                assert_eq!(e.mean(), [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn basis_matches_pointwise_formula() {
        let g = Grid::new(16).unwrap();
        let (i, j) = (2usize, 3usize);
        let p = eval_basis(&g, i, j).unwrap().to_physical();
        let c = 2.0 / 13f64.sqrt();
        for m1 in 0..16 {
            for m2 in 0..16 {
                let (x1, x2) = (m1 as f64 / 16.0, m2 as f64 / 16.0);
                let a = 2.0 * PI * i as f64 * x1;
                let b = 2.0 * PI * j as f64 * x2;
                let v = p.at(m1, m2);
                assert_abs_diff_eq!(v[0], c * 3.0 * a.cos() * b.cos(), epsilon = 1e-13);
                assert_abs_diff_eq!(v[1], c * 2.0 * a.sin() * b.sin(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn curl_norm_closed_form() {
        let g = Grid::new(16).unwrap();
        let e = eval_basis(&g, 2, 3).unwrap();
        assert_abs_diff_eq!(e.curl().l2_norm_sq(), 52.0 * PI * PI, epsilon = 1e-10);
        let e11 = eval_basis(&g, 1, 1).unwrap();
        assert_abs_diff_eq!(e11.curl().l2_norm_sq(), 8.0 * PI * PI, epsilon = 1e-11);
    }

    #[test]
    fn unrepresentable_index() {
        let g = Grid::new(16).unwrap();
        assert!(eval_basis(&g, 5, 1).is_err());
        assert!(eval_basis(&g, 0, 1).is_err());
        assert!(eval_basis(&g, 4, 4).is_ok());
    }

    #[test]
    fn trace_constants() {
        let g = Grid::new(64).unwrap();
        let b = ForcingBasis::uniform(&g, 9, 0.01).unwrap();
        assert_abs_diff_eq!(b.sigma_bar(), 0.0081, epsilon = 1e-15);
        assert_abs_diff_eq!(
            b.rho_bar(),
            4.0 * PI * PI * 1e-4 * 5130.0,
            epsilon = 1e-10
        );
        let z = ForcingBasis::uniform(&g, 9, 0.0).unwrap();
        assert_eq!(z.sigma_bar(), 0.0);
        assert_eq!(z.rho_bar(), 0.0);
        let one = ForcingBasis::uniform(&g, 1, 1.0).unwrap();
        assert_abs_diff_eq!(one.rho_bar(), 8.0 * PI * PI, epsilon = 1e-12);
        let table = ForcingBasis::with_coeffs(&g, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(table.sigma_bar(), 30.0);
    }

    #[test]
    fn zero_sigma_gives_zero_increment() {
        let g = Grid::new(16).unwrap();
        let b = ForcingBasis::uniform(&g, 3, 0.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let inc = b.sample_increment(0.1, &mut rng).unwrap();
        assert_eq!(inc.field.l2_norm_sq(), 0.0);
        assert_eq!(inc.gaussians.len(), 9);
    }

    #[test]
    fn single_element_increment() {
        let g = Grid::new(16).unwrap();
        let b = ForcingBasis::uniform(&g, 1, 0.3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let inc = b.sample_increment(1.0, &mut rng).unwrap();
        let mut expect = eval_basis(&g, 1, 1).unwrap();
        expect.scale(0.3 * inc.gaussians[0]);
        assert_eq!(inc.field, expect);
    }

    #[test]
    fn increment_scales_linearly_in_coefficients() {
        let g = Grid::new(32).unwrap();
        let b1 = ForcingBasis::uniform(&g, 4, 0.2).unwrap();
        let b2 = ForcingBasis::uniform(&g, 4, 0.4).unwrap();
        let xi: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut i1 = b1.increment_from_gaussians(0.01, xi.clone()).unwrap().field;
        let i2 = b2.increment_from_gaussians(0.01, xi).unwrap().field;
        i1.scale(2.0);
        i1.axpy(-1.0, &i2);
        assert!(i1.l2_norm_sq() < 1e-30);
    }

    #[test]
    fn increments_are_divergence_free_mean_zero() {
        let g = Grid::new(64).unwrap();
        let b = ForcingBasis::uniform(&g, 9, 0.1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..10 {
            let inc = b.sample_increment(0.01, &mut rng).unwrap();
            assert!(inc.field.divergence_residual() < 1e-12);
            assert_eq!(inc.field.mean(), [0.0, 0.0]);
        }
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let g = Grid::new(16).unwrap();
        let b = ForcingBasis::uniform(&g, 1, 1.0).unwrap();
        assert!(b.increment_from_gaussians(0.0, vec![1.0]).is_err());
    }
}
