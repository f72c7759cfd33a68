//! Analytic self-checks run by the `verify` subcommand.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::diagnostics::{disk_average_identity_check, poincare_terms};
use crate::error::Result;
use crate::forcing::{eval_basis, ForcingBasis};
use crate::initial::{random_band_limited, taylor_green};
use crate::integrator::{run, IntegratorConfig, TimeStep};
use crate::spectral::Grid;

/// Outcome of one check: the measured error against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<28} measured {:.3e} tolerance {:.1e}  {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Unforced Taylor-Green decay against `E0 exp(-16 pi^2 nu t)`.
pub fn taylor_green_decay() -> Result<[Check; 2]> {
    let grid = Grid::new(64)?;
    let nu = 1e-2;
    let t_end = 0.1;
    let u0 = taylor_green(&grid, 1.0);
    let cfg = IntegratorConfig {
        nu,
        t_end,
        dt: TimeStep::Fixed(1e-3),
        ..Default::default()
    };
    let basis = ForcingBasis::uniform(&grid, 1, 0.0)?;
    let traj = run(&grid, &u0, &cfg, &basis, &mut ChaCha20Rng::seed_from_u64(0)).map_err(|f| f.error)?;
    let e0 = u0.l2_norm_sq();
    let decay = (-16.0 * PI * PI * nu * t_end).exp();
    let last = traj.records.last().expect("final record");
    Ok([
        Check {
            name: "taylor_green_energy",
            measured: rel(last.energy, e0 * decay),
            tolerance: 1e-6,
            detail: format!("E(T) = {:.12e}", last.energy),
        },
        Check {
            name: "taylor_green_dissipation",
            measured: rel(last.cumulative_dissipation, e0 * (1.0 - decay)),
            tolerance: 1e-3,
            detail: format!("D(T) = {:.12e}", last.cumulative_dissipation),
        },
    ])
}

/// Unit norm, zero divergence and curl norm of every `e_{i,j}` with `i, j <= 9`,
/// and `rho_bar` against its closed form.
pub fn basis_identities() -> Result<[Check; 4]> {
    let grid = Grid::new(64)?;
    let (mut norm, mut div, mut curl) = (0.0f64, 0.0f64, 0.0f64);
    for i in 1..=9 {
        for j in 1..=9 {
            let e = eval_basis(&grid, i, j)?;
            norm = norm.max((e.l2_norm_sq().sqrt() - 1.0).abs());
            div = div.max(e.divergence().to_physical().iter().fold(0.0, |m, x| m.max(x.abs())));
            let exact = 4.0 * PI * PI * (i * i + j * j) as f64;
            curl = curl.max((e.curl().l2_norm_sq() - exact).abs() / exact);
        }
    }
    let sigma = 0.01;
    let basis = ForcingBasis::uniform(&grid, 9, sigma)?;
    // sum_{i,j<=9} (i^2 + j^2) = 2 * 9 * 285
    let rho_exact = 4.0 * PI * PI * sigma * sigma * 2.0 * 9.0 * 285.0;
    Ok([
        Check {
            name: "basis_unit_norm",
            measured: norm,
            tolerance: 1e-12,
            detail: "max | ||e_ij|| - 1 |".into(),
        },
        Check {
            name: "basis_divergence",
            measured: div,
            tolerance: 1e-12,
            detail: "max |div e_ij|".into(),
        },
        Check {
            name: "basis_curl_norm",
            measured: curl,
            tolerance: 1e-10,
            detail: "max relative error of ||curl e_ij||^2".into(),
        },
        Check {
            name: "rho_bar_closed_form",
            measured: rel(basis.rho_bar(), rho_exact),
            tolerance: 1e-10,
            detail: format!("rho_bar = {:.12e}", basis.rho_bar()),
        },
    ])
}

/// Physical and spectral `L^2` norms agree for random fields.
pub fn parseval() -> Result<Check> {
    let grid = Grid::new(64)?;
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let u = random_band_limited(&grid, 20, &mut rng)?;
        worst = worst.max(rel(u.to_physical().l2_norm_sq(), u.l2_norm_sq()));
    }
    Ok(Check {
        name: "parseval",
        measured: worst,
        tolerance: 1e-12,
        detail: "8 random fields, n = 64".into(),
    })
}

/// Lattice ball identity `fint |h . grad v|^2 = (r^2/4) ||grad v||^2`.
pub fn disk_average_identity() -> Result<Check> {
    let grid = Grid::new(128)?;
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let u = random_band_limited(&grid, 16, &mut rng)?;
        for r in [0.05, 0.1, 0.2] {
            let (lhs, rhs) = disk_average_identity_check(&u, r)?;
            worst = worst.max((lhs / rhs - 1.0).abs());
        }
    }
    Ok(Check {
        name: "disk_average_identity",
        measured: worst,
        tolerance: 0.02,
        detail: "max |lhs/rhs - 1|, 4 fields x 3 radii, n = 128".into(),
    })
}

/// Vorticity inequality with `C = 1`; the measured value is the number of
/// violations.
pub fn poincare() -> Result<Check> {
    let grid = Grid::new(64)?;
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let mut violations = 0usize;
    let mut margin = f64::INFINITY;
    for _ in 0..10 {
        let u = random_band_limited(&grid, 12, &mut rng)?;
        for r in [0.05, 0.1, 0.2] {
            let t = poincare_terms(&u, r, 1.0)?;
            margin = margin.min(t.margin());
            if !t.holds() {
                violations += 1;
            }
        }
    }
    Ok(Check {
        name: "poincare_inequality",
        measured: violations as f64,
        tolerance: 0.0,
        detail: format!("30 cases, smallest rhs/lhs {margin:.3}"),
    })
}

/// The full battery in a fixed order.
pub fn run_all() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    out.extend(taylor_green_decay()?);
    out.extend(basis_identities()?);
    out.push(parseval()?);
    out.push(disk_average_identity()?);
    out.push(poincare()?);
    Ok(out)
}
