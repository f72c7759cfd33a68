use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use stoch_euler::diagnostics::{dissipation_integral, dissipation_trapezoid};
use stoch_euler::initial::{fractional_brownian_bridge, shell_spectrum, taylor_green, FbbParams};
use stoch_euler::integrator::{run, IntegratorConfig, TimeStep};
use stoch_euler::{ForcingBasis, Grid};

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    num / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>()
}

#[test]
fn fbb_shell_spectrum_has_expected_slope() {
    let grid = Grid::new(64).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for hurst in [0.25, 0.5, 0.75] {
        let mut mean = vec![0.0; grid.n() / 2 + 1];
        for _ in 0..200 {
            let u = fractional_brownian_bridge(&grid, &FbbParams { hurst }, &mut rng).unwrap();
            for (m, e) in mean.iter_mut().zip(shell_spectrum(&u)) {
                *m += e;
            }
        }
        let ks: Vec<f64> = (4..=16).map(|k| (k as f64).ln()).collect();
        let es: Vec<f64> = (4..=16).map(|k| mean[k].ln()).collect();
        let slope = fit_slope(&ks, &es);
        let expected = -(2.0 * hurst + 1.0);
        assert!((slope - expected).abs() <= 0.3, "H = {hurst}: slope {slope}, expected {expected}");
    }
}

#[test]
fn taylor_green_balance_and_dissipation_quadratures() {
    let grid = Grid::new(32).unwrap();
    let nu = 0.01;
    let u0 = taylor_green(&grid, 1.0);
    let e0 = u0.l2_norm_sq();
    let cfg = IntegratorConfig { nu, t_end: 1.0, ..Default::default() };
    let basis = ForcingBasis::uniform(&grid, 1, 0.0).unwrap();
    let traj = run(&grid, &u0, &cfg, &basis, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
    let last = traj.records.last().unwrap();
    let residual = last.energy + last.cumulative_dissipation - e0;
    assert!(residual.abs() <= 1e-3 * e0, "balance residual {residual}");

    let exact = e0 * (1.0 - (-16.0 * std::f64::consts::PI.powi(2) * nu).exp());
    let trap = dissipation_trapezoid(&traj.grad_series, nu);
    assert!((trap - exact).abs() <= 1e-3 * exact, "trapezoid {trap} vs {exact}");

    // the Riemann sum holds the last step value, so its error scales with dt
    let fine = IntegratorConfig { dt: TimeStep::Fixed(2.5e-4), ..cfg };
    let traj = run(&grid, &u0, &fine, &basis, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
    let riemann = dissipation_integral(&traj.grad_series, nu, 1.0, 10_000).unwrap();
    assert!((riemann - exact).abs() <= 1e-3 * exact, "riemann {riemann} vs {exact}");
}
