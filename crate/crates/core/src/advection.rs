//! Projected advection term `-P P_N (u . grad u)`.
//!
//! The product is formed in rotational form, `(u . grad) u = grad |u|^2/2 +
//! eta (-u2, u1)`, so only `u1`, `u2` and `eta` need to be synthesised. The
//! gradient part is discarded by the Leray projector.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{Fft2, Grid, SpectralField};

/// Treatment of quadratic aliasing in the pseudo-spectral product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Product on the collocation grid, then truncation.
    None,
    /// Orszag 2/3 rule: modes above `n/3` are removed before and after.
    TwoThirds,
    /// Zero-padding to a `3n/2` grid.
    #[default]
    ThreeHalves,
}

impl Dealias {
    /// Largest `|k|_inf` retained by the Galerkin truncation.
    pub fn kmax(self, n: usize) -> usize {
        match self {
            Dealias::None | Dealias::ThreeHalves => n / 2 - 1,
            Dealias::TwoThirds => n.div_ceil(3) - 1,
        }
    }

    fn product_grid(self, n: usize) -> usize {
        match self {
            Dealias::ThreeHalves => 3 * n / 2,
            _ => n,
        }
    }
}

/// Evaluator for the nonlinear term on a fixed grid.
pub struct Advection {
    grid: Grid,
    dealias: Dealias,
    kmax: i64,
    fft: Arc<Fft2>,
    m: usize,
}

impl Advection {
    pub fn new(grid: &Grid, dealias: Dealias) -> Self {
        let m = dealias.product_grid(grid.n());
        Advection {
            grid: grid.clone(),
            dealias,
            kmax: dealias.kmax(grid.n()) as i64,
            fft: Fft2::get(m),
            m,
        }
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    pub fn kmax(&self) -> usize {
        self.kmax as usize
    }

    /// Copies retained modes of an `n`-grid array into an `m`-grid array.
    fn pad(&self, src: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let mh = self.m / 2 + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); self.m * mh];
        for (s, _, _, k1, k2) in g.modes() {
            if k1.abs() > self.kmax || k2 > self.kmax {
                continue;
            }
            let a = if k1 >= 0 { k1 as usize } else { (k1 + self.m as i64) as usize };
            out[a * mh + k2 as usize] = src[s];
        }
        out
    }

    fn unpad(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let g = &self.grid;
        let mh = self.m / 2 + 1;
        for (s, _, _, k1, k2) in g.modes() {
            dst[s] = if k1.abs() > self.kmax || k2 > self.kmax {
                Complex64::new(0.0, 0.0)
            } else {
                let a = if k1 >= 0 { k1 as usize } else { (k1 + self.m as i64) as usize };
                src[a * mh + k2 as usize]
            };
        }
    }

    /// Returns `-P P_N (u . grad u)`; divergence-free and truncated.
    pub fn nonlinear_term(&self, u: &SpectralField) -> SpectralField {
        let m = self.m;
        let eta = u.curl();
        let mut u1 = vec![0.0; m * m];
        let mut u2 = vec![0.0; m * m];
        let mut w = vec![0.0; m * m];
        self.fft.inverse(&self.pad(u.component(0)), &mut u1);
        self.fft.inverse(&self.pad(u.component(1)), &mut u2);
        self.fft.inverse(&self.pad(eta.coeffs()), &mut w);
        // -(eta (-u2, u1)) = (eta u2, -eta u1)
        for i in 0..m * m {
            let e = w[i];
            let (a, b) = (u1[i], u2[i]);
            u1[i] = e * b;
            u2[i] = -e * a;
        }
        let mh = m / 2 + 1;
        let mut spec = vec![Complex64::new(0.0, 0.0); m * mh];
        let mut out = SpectralField::zeros(&self.grid);
        self.fft.forward(&u1, &mut spec);
        self.unpad(&spec, out.component_mut(0));
        self.fft.forward(&u2, &mut spec);
        self.unpad(&spec, out.component_mut(1));
        out.leray_project_in_place();
        out
    }
}

/// One-shot evaluation with the default 3/2 dealiasing.
pub fn nonlinear_term(u: &SpectralField) -> SpectralField {
    Advection::new(u.grid(), Dealias::default()).nonlinear_term(u)
}
