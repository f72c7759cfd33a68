use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use stoch_euler::integrator::{IntegratorConfig, Scheme, Stepper, TimeStep};
use stoch_euler::{eval_basis, ForcingBasis, Grid};

#[test]
fn increment_energy_matches_sigma_bar() {
    let grid = Grid::new(16).unwrap();
    let sigma = 0.1;
    let dt = 0.01;
    let basis = ForcingBasis::uniform(&grid, 3, sigma).unwrap();
    let expected = 9.0 * sigma * sigma;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let m = 100_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..m {
        let x = basis.sample_increment(dt, &mut rng).unwrap().field.l2_norm_sq() / dt;
        s1 += x;
        s2 += x * x;
    }
    let mean = s1 / m as f64;
    let se = ((s2 / m as f64 - mean * mean) / (m as f64 - 1.0)).sqrt();
    assert!((mean - expected).abs() <= 3.0 * se, "mean {mean} vs {expected}, se {se}");
}

#[test]
fn basis_is_orthonormal() {
    let grid = Grid::new(32).unwrap();
    let elems: Vec<_> = (1..=4)
        .flat_map(|i| (1..=4).map(move |j| (i, j)))
        .map(|(i, j)| eval_basis(&grid, i, j).unwrap())
        .collect();
    for (a, ea) in elems.iter().enumerate() {
        for (b, eb) in elems.iter().enumerate() {
            let expected = if a == b { 1.0 } else { 0.0 };
            assert!((ea.inner(eb) - expected).abs() < 1e-13, "({a},{b})");
        }
    }
}

#[test]
fn increment_coordinates_are_scaled_gaussians() {
    let grid = Grid::new(16).unwrap();
    let coeffs = vec![0.5, 0.0, 1.5, 2.0];
    let basis = ForcingBasis::with_coeffs(&grid, 2, coeffs.clone()).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let dt = 0.04;
    let inc = basis.sample_increment(dt, &mut rng).unwrap();
    for (idx, (i, j)) in [(1, 1), (1, 2), (2, 1), (2, 2)].into_iter().enumerate() {
        let proj = inc.field.inner(&eval_basis(&grid, i, j).unwrap());
        let expected = coeffs[idx] * dt.sqrt() * inc.gaussians[idx];
        assert!((proj - expected).abs() < 1e-14, "({i},{j})");
    }
}

/// Weak error of `E||u(T)||^2` for the explicit scheme on the single-mode
/// Ornstein-Uhlenbeck problem `u = X e_{1,1}`, `dX = -lambda X dt + dW`.
/// Coarse paths are driven by sums of the fine Gaussians, so all step
/// sizes see the same Brownian path.
#[test]
fn euler_maruyama_has_weak_order_one() {
    let grid = Grid::new(8).unwrap();
    let nu = 0.05;
    let lambda = nu * 8.0 * PI * PI;
    let t_end = 1.0;
    let basis = ForcingBasis::uniform(&grid, 1, 1.0).unwrap();
    let e11 = eval_basis(&grid, 1, 1).unwrap();
    let x0 = 1.0;
    let exact = x0 * x0 * (-2.0 * lambda * t_end).exp() + (1.0 - (-2.0 * lambda * t_end).exp()) / (2.0 * lambda);

    let levels = [10usize, 20, 40, 80];
    let fine = 640usize;
    let steppers: Vec<Stepper> = levels
        .iter()
        .map(|&m| {
            let cfg = IntegratorConfig {
                nu,
                dt: TimeStep::Fixed(t_end / m as f64),
                t_end,
                scheme: Scheme::EulerMaruyama,
                ..Default::default()
            };
            Stepper::new(&grid, &cfg).unwrap()
        })
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let paths = 4000;
    let mut sums = vec![0.0; levels.len()];
    for _ in 0..paths {
        let xi: Vec<f64> = (0..fine).map(|_| StandardNormal.sample(&mut rng)).collect();
        for (l, &m) in levels.iter().enumerate() {
            let h = t_end / m as f64;
            let per = fine / m;
            let mut u = e11.clone();
            u.scale(x0);
            for step in 0..m {
                let g: f64 = xi[step * per..(step + 1) * per].iter().sum::<f64>() / (per as f64).sqrt();
                let noise = basis.increment_from_gaussians(h, vec![g]).unwrap();
                u = steppers[l].advance(&u, &noise, None);
            }
            sums[l] += u.l2_norm_sq();
        }
    }
    let errs: Vec<f64> = sums.iter().map(|s| (s / paths as f64 - exact).abs()).collect();
    let xs: Vec<f64> = levels.iter().map(|&m| (t_end / m as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((slope - 1.0).abs() <= 0.3, "slope {slope}, errors {errs:?}");
}

/// The explicit recursion for the second moment, `m' = (1 - lambda h)^2 m + h`,
/// is reproduced exactly by the scheme when the noise is switched off and
/// the variance is accumulated analytically.
#[test]
fn euler_maruyama_single_mode_matches_recursion() {
    let grid = Grid::new(8).unwrap();
    let nu = 0.05;
    let lambda = nu * 8.0 * PI * PI;
    let h = 0.01;
    let cfg = IntegratorConfig {
        nu,
        dt: TimeStep::Fixed(h),
        scheme: Scheme::EulerMaruyama,
        ..Default::default()
    };
    let stepper = Stepper::new(&grid, &cfg).unwrap();
    let basis = ForcingBasis::uniform(&grid, 1, 0.0).unwrap();
    let mut u = eval_basis(&grid, 1, 1).unwrap();
    let mut x = 1.0;
    for _ in 0..50 {
        u = stepper.advance(&u, &basis.increment_from_gaussians(h, vec![0.0]).unwrap(), None);
        x *= 1.0 - lambda * h;
    }
    assert!((u.l2_norm_sq() - x * x).abs() < 1e-13);
}
