//! Time stepping of the truncated stochastic Navier-Stokes system
//!
//! ```text
//! du + P_N (u . grad u) dt + grad p dt = nu Lap u dt + f dt + sigma dW
//! ```
//!
//! Two schemes are provided. `EulerMaruyama` is fully explicit. `ImexCnEm`
//! integrates the viscous term exactly per mode with the factor
//! `exp(-4 pi^2 nu |k|^2 t)`, advances advection (and deterministic forcing)
//! with the classical Lawson fourth-order integrating-factor Runge-Kutta
//! stages, and adds the Euler-Maruyama noise increment after the factor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::advection::{Advection, Dealias};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::forcing::{ForcingBasis, NoiseIncrement};
use crate::spectral::{Grid, SpectralField};

const FOUR_PI_SQ: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "euler_maruyama")]
    EulerMaruyama,
    #[default]
    #[serde(rename = "imex_cn_em")]
    ImexCnEm,
}

/// Step size: fixed or CFL-controlled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl TimeStep {
    pub const AUTO: TimeStep = TimeStep::Auto(AutoTag::Auto);
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::AUTO
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub nu: f64,
    pub dt: TimeStep,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl: f64,
    /// Upper bound on automatically chosen steps.
    pub dt_max: f64,
    /// Largest relative change of `||grad u||^2` from viscous decay allowed
    /// in one automatic step (0 disables the limit).
    pub dissipation_tol: f64,
    pub record_every: usize,
    pub dealias: Dealias,
    pub project_every_step: bool,
    /// Keep a snapshot every this many records (0 disables snapshots).
    pub snapshot_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            nu: 0.0,
            dt: TimeStep::AUTO,
            t_end: 1.0,
            scheme: Scheme::default(),
            cfl: 0.4,
            dt_max: 1e-2,
            dissipation_tol: 0.05,
            record_every: 1,
            dealias: Dealias::default(),
            project_every_step: true,
            snapshot_every: 0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            errs.push(format!("integrator.nu must be >= 0, got {}", self.nu));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                errs.push(format!("integrator.dt must be > 0 or \"auto\", got {dt}"));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            errs.push(format!("integrator.t_end must be >= 0, got {}", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            errs.push(format!("integrator.cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            errs.push(format!("integrator.dt_max must be > 0, got {}", self.dt_max));
        }
        if !(self.dissipation_tol >= 0.0) || !self.dissipation_tol.is_finite() {
            errs.push(format!(
                "integrator.dissipation_tol must be >= 0, got {}",
                self.dissipation_tol
            ));
        }
        if self.record_every == 0 {
            errs.push("integrator.record_every must be >= 1".to_string());
        }
        errs
    }
}

/// Deterministic part of the right-hand side and the per-step update.
pub struct Stepper {
    grid: Grid,
    cfg: IntegratorConfig,
    advection: Advection,
    /// `4 pi^2 |k|^2` per stored mode.
    ksq: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &Grid, cfg: &IntegratorConfig) -> Result<Self> {
        let errs = cfg.validate();
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let ksq = grid
            .modes()
            .map(|(_, _, _, k1, k2)| FOUR_PI_SQ * (k1 * k1 + k2 * k2) as f64)
            .collect();
        Ok(Stepper {
            grid: grid.clone(),
            cfg: cfg.clone(),
            advection: Advection::new(grid, cfg.dealias),
            ksq,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn advection(&self) -> &Advection {
        &self.advection
    }

    fn rhs(&self, u: &SpectralField, f_det: Option<&SpectralField>) -> SpectralField {
        let mut n = self.advection.nonlinear_term(u);
        if let Some(f) = f_det {
            n.axpy(1.0, f);
        }
        n
    }

    fn factor(&self, h: f64) -> Vec<f64> {
        let nu = self.cfg.nu;
        self.ksq.iter().map(|k| (-nu * k * h).exp()).collect()
    }

    fn apply(u: &mut SpectralField, factor: &[f64]) {
        for c in u.comps_mut().iter_mut() {
            for (z, f) in c.iter_mut().zip(factor) {
                *z *= *f;
            }
        }
    }

    fn scaled(u: &SpectralField, factor: &[f64]) -> SpectralField {
        let mut out = u.clone();
        Self::apply(&mut out, factor);
        out
    }

    /// One step without the finiteness check.
    pub fn advance(
        &self,
        u: &SpectralField,
        noise: &NoiseIncrement,
        f_det: Option<&SpectralField>,
    ) -> SpectralField {
        let h = noise.dt;
        let mut next = match self.cfg.scheme {
            Scheme::EulerMaruyama => {
                let mut next = u.clone();
                let mut drift = self.rhs(u, f_det);
                let nu = self.cfg.nu;
                for (d, s) in drift.comps_mut().iter_mut().zip(u.comps().iter()) {
                    for ((dz, sz), k) in d.iter_mut().zip(s).zip(&self.ksq) {
                        *dz -= *sz * (nu * k);
                    }
                }
                next.axpy(h, &drift);
                next
            }
            Scheme::ImexCnEm => {
                let e_half = self.factor(0.5 * h);
                let e_full = self.factor(h);
                let u_half = Self::scaled(u, &e_half);

                let k1 = self.rhs(u, f_det);
                let mut a = u.clone();
                a.axpy(0.5 * h, &k1);
                Self::apply(&mut a, &e_half);
                let k2 = self.rhs(&a, f_det);

                let mut b = u_half.clone();
                b.axpy(0.5 * h, &k2);
                let k3 = self.rhs(&b, f_det);

                let mut c = Self::scaled(u, &e_full);
                c.axpy(h, &Self::scaled(&k3, &e_half));
                let k4 = self.rhs(&c, f_det);

                let mut mid = k2;
                mid.axpy(1.0, &k3);
                Self::apply(&mut mid, &e_half);
                let mut next = Self::scaled(u, &e_full);
                next.axpy(h / 6.0, &Self::scaled(&k1, &e_full));
                next.axpy(h / 3.0, &mid);
                next.axpy(h / 6.0, &k4);
                next
            }
        };
        next.axpy(1.0, &noise.field);
        if self.cfg.project_every_step {
            next.leray_project_in_place();
        }
        next.fourier_truncate_in_place(self.advection.kmax())
            .expect("retained modes fit the grid");
        next
    }

    /// One step; a non-finite result is reported as an instability.
    pub fn step(
        &self,
        u: &SpectralField,
        noise: &NoiseIncrement,
        f_det: Option<&SpectralField>,
    ) -> Result<SpectralField> {
        let next = self.advance(u, noise, f_det);
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::Unstable { step: 0, t: f64::NAN })
        }
    }

    /// CFL-limited step for the current state, capped by `dt_max` and by
    /// the viscous decay rate of `||grad u||^2`.
    pub fn auto_dt(&self, u: &SpectralField) -> f64 {
        let dt = auto_dt(&self.grid, u.to_physical().max_abs(), &self.cfg, self.advection.kmax());
        let tol = self.cfg.dissipation_tol;
        if tol == 0.0 || self.cfg.nu == 0.0 {
            return dt;
        }
        dt.min(tol / self.dissipation_rate(u))
    }

    /// `2 nu ||Lap u||^2 / ||grad u||^2`, the decay rate of `||grad u||^2`
    /// under the viscous term alone.
    pub fn dissipation_rate(&self, u: &SpectralField) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (s, _, b, _, _) in self.grid.modes() {
            let w = self.grid.weight(b)
                * (u.component(0)[s].norm_sqr() + u.component(1)[s].norm_sqr());
            num += w * self.ksq[s] * self.ksq[s];
            den += w * self.ksq[s];
        }
        if den > 0.0 {
            2.0 * self.cfg.nu * num / den
        } else {
            0.0
        }
    }
}

/// `dt = cfl * min(1 / (n max|u| + eps), viscous cap)` capped by `dt_max`.
///
/// The viscous cap `2 / (nu 4 pi^2 |k|^2_max)` only applies to the fully
/// explicit scheme.
pub fn auto_dt(grid: &Grid, max_speed: f64, cfg: &IntegratorConfig, kmax: usize) -> f64 {
    let n = grid.n() as f64;
    let adv = 1.0 / (n * max_speed + f64::MIN_POSITIVE);
    let mut limit = adv;
    if cfg.scheme == Scheme::EulerMaruyama && cfg.nu > 0.0 {
        let kk = FOUR_PI_SQ * 2.0 * (kmax * kmax) as f64;
        limit = limit.min(2.0 / (cfg.nu * kk));
    }
    (cfg.cfl * limit).min(cfg.dt_max)
}

/// Recorded output of one realization.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// `(t, ||grad u||^2)` after every step, starting at `t = 0`.
    pub grad_series: Vec<(f64, f64)>,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub steps: usize,
    pub final_state: SpectralField,
}

impl Trajectory {
    fn empty(grid: &Grid) -> Self {
        Trajectory {
            records: Vec::new(),
            grad_series: Vec::new(),
            snapshots: Vec::new(),
            steps: 0,
            final_state: SpectralField::zeros(grid),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// A failed run with everything recorded up to the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for RunFailure {}

/// Integrates from `ic` to `cfg.t_end`.
pub fn run<R: Rng + ?Sized>(
    grid: &Grid,
    ic: &SpectralField,
    cfg: &IntegratorConfig,
    basis: &ForcingBasis,
    rng: &mut R,
) -> std::result::Result<Trajectory, RunFailure> {
    run_with_observer(grid, ic, cfg, basis, None, rng, &mut |_, _| {})
}

/// As [`run`], with deterministic forcing and a callback invoked with the
/// state at every record time (including `t = 0` and `t_end`).
pub fn run_with_observer<R: Rng + ?Sized>(
    grid: &Grid,
    ic: &SpectralField,
    cfg: &IntegratorConfig,
    basis: &ForcingBasis,
    f_det: Option<&SpectralField>,
    rng: &mut R,
    observer: &mut dyn FnMut(f64, &SpectralField),
) -> std::result::Result<Trajectory, RunFailure> {
    let early = |error: Error| RunFailure {
        error,
        partial: Trajectory::empty(grid),
    };
    grid.check_same(ic.grid()).map_err(early)?;
    grid.check_same(basis.grid()).map_err(early)?;
    if let Some(f) = f_det {
        grid.check_same(f.grid()).map_err(early)?;
    }
    let stepper = Stepper::new(grid, cfg).map_err(early)?;
    let sigma_bar = basis.sigma_bar();
    let nu = cfg.nu;

    let mut u = ic.clone();
    let mut t = 0.0;
    let mut cum = 0.0;
    let mut g_prev = u.grad_l2_norm_sq();
    let mut traj = Trajectory {
        records: vec![DiagnosticsRecord::measure(&u, 0.0, 0.0, sigma_bar)],
        grad_series: vec![(0.0, g_prev)],
        snapshots: Vec::new(),
        steps: 0,
        final_state: u.clone(),
    };
    observer(0.0, &u);
    if cfg.snapshot_every > 0 {
        traj.snapshots.push((0.0, u.clone()));
    }

    let t_end = cfg.t_end;
    let eps = 1e-12 * t_end.max(1.0);
    while t < t_end - eps {
        let mut dt = match cfg.dt {
            TimeStep::Fixed(d) => d,
            TimeStep::Auto(_) => stepper.auto_dt(&u),
        };
        let last = t + dt >= t_end - eps;
        if last {
            dt = t_end - t;
        }
        let noise = match basis.sample_increment(dt, rng) {
            Ok(n) => n,
            Err(error) => {
                traj.final_state = u;
                return Err(RunFailure { error, partial: traj });
            }
        };
        let next = stepper.advance(&u, &noise, f_det);
        let step = traj.steps + 1;
        if !next.is_finite() {
            traj.final_state = u;
            return Err(RunFailure {
                error: Error::Unstable { step, t: t + dt },
                partial: traj,
            });
        }
        u = next;
        t = if last { t_end } else { t + dt };
        traj.steps = step;
        let g = u.grad_l2_norm_sq();
        cum += nu * dt * (g_prev + g);
        g_prev = g;
        traj.grad_series.push((t, g));
        if step % cfg.record_every == 0 || last {
            traj.records
                .push(DiagnosticsRecord::measure(&u, t, cum, sigma_bar));
            observer(t, &u);
            if cfg.snapshot_every > 0 && (traj.records.len() - 1) % cfg.snapshot_every == 0 {
                traj.snapshots.push((t, u.clone()));
            }
        }
    }
    traj.final_state = u;
    Ok(traj)
}
