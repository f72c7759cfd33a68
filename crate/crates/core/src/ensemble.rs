//! Monte Carlo ensembles over `(viscosity, realization)` cells.
//!
//! Every realization owns two ChaCha20 streams derived from the master seed:
//! one for its initial data (shared by all viscosities) and one for its
//! Brownian increments (per viscosity, or shared with `common_noise`).
//! Realizations run on a rayon pool and results are collected in index
//! order, so statistics do not depend on the worker count.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{structure_sq_table, DiagnosticsRecord, SfNormalization, StructureFunctionTable};
use crate::error::{Error, Result};
use crate::forcing::ForcingBasis;
use crate::initial::{flat_vortex_sheet, fractional_brownian_bridge, taylor_green, FbbParams, VortexSheetParams};
use crate::integrator::{run_with_observer, IntegratorConfig};
use crate::spectral::{Grid, SpectralField};

/// Initial-condition law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IcSpec {
    FlatVortexSheet(VortexSheetParams),
    Fbb(FbbParams),
    TaylorGreen { amplitude: f64 },
    File { path: PathBuf },
}

impl IcSpec {
    pub fn build(&self, grid: &Grid, rng: &mut ChaCha20Rng) -> Result<SpectralField> {
        match self {
            IcSpec::FlatVortexSheet(p) => flat_vortex_sheet(grid, p, rng),
            IcSpec::Fbb(p) => fractional_brownian_bridge(grid, p, rng),
            IcSpec::TaylorGreen { amplitude } => Ok(taylor_green(grid, *amplitude)),
            IcSpec::File { path } => {
                let snap = crate::io::read_snapshot(path)?;
                grid.check_same(snap.field.grid())?;
                let mut u = snap.field.to_spectral().leray_project();
                u.fourier_truncate_in_place(grid.kmax())?;
                Ok(u)
            }
        }
    }

    /// True when the law has no random component.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, IcSpec::TaylorGreen { .. } | IcSpec::File { .. })
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            IcSpec::FlatVortexSheet(p) => p.validate(),
            IcSpec::Fbb(p) => p.validate(),
            IcSpec::TaylorGreen { amplitude } if !amplitude.is_finite() => {
                vec!["initial_condition.amplitude must be finite".into()]
            }
            _ => Vec::new(),
        }
    }
}

/// Forcing coefficients: uniform `sigma` or an explicit `n_b x n_b` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub sigma: f64,
    pub n_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<f64>>>,
}

impl ForcingSpec {
    pub fn build(&self, grid: &Grid) -> Result<ForcingBasis> {
        match &self.coeffs {
            None => ForcingBasis::uniform(grid, self.n_b, self.sigma),
            Some(rows) => {
                ForcingBasis::with_coeffs(grid, self.n_b, rows.iter().flatten().copied().collect())
            }
        }
    }

    pub fn validate(&self, grid_n: usize) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            errs.push(format!("forcing.sigma must be >= 0, got {}", self.sigma));
        }
        if self.n_b == 0 {
            errs.push("forcing.n_b must be >= 1".into());
        } else if 2 * self.n_b > grid_n / 2 {
            errs.push(format!(
                "forcing.n_b = {} needs grid.n >= {}",
                self.n_b,
                4 * self.n_b
            ));
        }
        if let Some(rows) = &self.coeffs {
            if rows.len() != self.n_b || rows.iter().any(|r| r.len() != self.n_b) {
                errs.push(format!("forcing.coeffs must be a {0} x {0} table", self.n_b));
            }
        }
        errs
    }
}

/// The experiment matrix of one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub realizations: usize,
    pub viscosities: Vec<f64>,
    pub grid_n: usize,
    pub master_seed: u64,
    pub ic: IcSpec,
    pub forcing: ForcingSpec,
    /// Time-stepping settings; `nu` is replaced per cell.
    pub integrator: IntegratorConfig,
    pub sf_radii: Vec<f64>,
    pub sf_normalization: SfNormalization,
    pub common_noise: bool,
    pub skip_failed: bool,
    pub agg_points: usize,
    pub workers: usize,
}

impl EnsembleSpec {
    /// Dyadic radii `2^j / n` from two cells up to `n/4` cells.
    pub fn default_radii(n: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut cells = 2usize;
        while cells <= n / 4 {
            out.push(cells as f64 / n as f64);
            cells *= 2;
        }
        out
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.realizations == 0 {
            errs.push("ensemble.realizations must be >= 1".into());
        }
        if self.viscosities.is_empty() {
            errs.push("ensemble.viscosities must not be empty".into());
        }
        for nu in &self.viscosities {
            if !(*nu >= 0.0) || !nu.is_finite() {
                errs.push(format!("ensemble.viscosities entries must be >= 0, got {nu}"));
            }
        }
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            errs.push(format!("grid.n must be even and >= 8, got {}", self.grid_n));
        }
        errs.extend(self.forcing.validate(self.grid_n));
        errs.extend(self.ic.validate());
        errs.extend(
            self.integrator
                .validate()
                .into_iter()
                .filter(|e| !e.starts_with("integrator.nu")),
        );
        let nf = self.grid_n as f64;
        for r in &self.sf_radii {
            if !(*r * nf >= 1.0) || *r > crate::diagnostics::R0 {
                errs.push(format!(
                    "output.sf_radii entry {r} must lie in [1/n, sqrt(2)/2]"
                ));
            }
        }
        if self.agg_points < 2 {
            errs.push("ensemble.agg_points must be >= 2".into());
        }
        if self.workers == 0 {
            errs.push("ensemble.workers must be >= 1".into());
        }
        errs
    }

    pub fn cell_config(&self, nu_idx: usize) -> IntegratorConfig {
        IntegratorConfig {
            nu: self.viscosities[nu_idx],
            ..self.integrator.clone()
        }
    }

    pub fn aggregation_times(&self) -> Vec<f64> {
        let t_end = self.integrator.t_end;
        let m = self.agg_points;
        (0..m)
            .map(|i| {
                if i + 1 == m {
                    t_end
                } else {
                    t_end * i as f64 / (m - 1) as f64
                }
            })
            .collect()
    }
}

/// Random stream purposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Initial { realization: usize },
    Noise { nu_idx: Option<usize>, realization: usize },
}

impl Stream {
    /// ChaCha stream identifier; distinct for distinct purposes.
    pub fn id(self) -> u64 {
        match self {
            Stream::Initial { realization } => (1 << 62) | realization as u64,
            Stream::Noise { nu_idx, realization } => {
                let tag = nu_idx.map_or(0xFFFF_FFFF, |i| i as u64 & 0x3FFF_FFFF);
                (2 << 62) | (tag << 30) ^ realization as u64
            }
        }
    }
}

pub fn stream_rng(master_seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(stream.id());
    rng
}

/// Seeds reported in the manifest for one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub nu_idx: usize,
    pub realization: usize,
    pub initial_stream: u64,
    pub noise_stream: u64,
}

pub fn seed_table(spec: &EnsembleSpec) -> Vec<SeedRecord> {
    jobs(spec)
        .into_iter()
        .map(|(nu_idx, r)| SeedRecord {
            nu_idx,
            realization: r,
            initial_stream: Stream::Initial { realization: r }.id(),
            noise_stream: noise_stream(spec, nu_idx, r).id(),
        })
        .collect()
}

fn noise_stream(spec: &EnsembleSpec, nu_idx: usize, realization: usize) -> Stream {
    Stream::Noise {
        nu_idx: (!spec.common_noise).then_some(nu_idx),
        realization,
    }
}

fn jobs(spec: &EnsembleSpec) -> Vec<(usize, usize)> {
    (0..spec.viscosities.len())
        .flat_map(|i| (0..spec.realizations).map(move |r| (i, r)))
        .collect()
}

/// Raw output of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationOutput {
    pub nu_idx: usize,
    pub realization: usize,
    pub nu: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub grad_series: Vec<(f64, f64)>,
    /// `S_2(u(t); r)` at each record time (rows) and radius (columns).
    pub sf: Vec<Vec<f64>>,
    /// `S_2^T(u; r)` per radius.
    pub sf_time_integrated: Vec<f64>,
    /// States kept every `snapshot_every` records.
    pub snapshots: Vec<(f64, SpectralField)>,
}

/// Runs a single `(viscosity, realization)` job.
pub fn run_realization(spec: &EnsembleSpec, nu_idx: usize, realization: usize) -> Result<RealizationOutput> {
    let grid = Grid::new(spec.grid_n)?;
    let basis = spec.forcing.build(&grid)?;
    let ic = spec.ic.build(&grid, &mut stream_rng(spec.master_seed, Stream::Initial { realization }))?;
    let mut noise_rng = stream_rng(spec.master_seed, noise_stream(spec, nu_idx, realization));
    let cfg = spec.cell_config(nu_idx);
    let radii = &spec.sf_radii;
    let norm = spec.sf_normalization;
    let mut sf: Vec<Vec<f64>> = Vec::new();
    let mut sf_err = None;
    let traj = run_with_observer(&grid, &ic, &cfg, &basis, None, &mut noise_rng, &mut |_, u| {
        if radii.is_empty() {
            return;
        }
        match structure_sq_table(u, radii, norm) {
            Ok(v) => sf.push(v.into_iter().map(f64::sqrt).collect()),
            Err(e) => sf_err = Some(e),
        }
    })
    .map_err(|f| f.error)?;
    if let Some(e) = sf_err {
        return Err(e);
    }
    let times = traj.times();
    let sf_time_integrated = time_integrated_columns(&times, &sf)?;
    Ok(RealizationOutput {
        nu_idx,
        realization,
        nu: cfg.nu,
        records: traj.records,
        grad_series: traj.grad_series,
        sf,
        sf_time_integrated,
        snapshots: traj.snapshots,
    })
}

/// `(int S^2 dt)^{1/2}` per radius column.
pub fn time_integrated_columns(times: &[f64], sf: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = sf.first() else {
        return Ok(Vec::new());
    };
    if times.len() < 2 {
        return Ok(vec![0.0; first.len()]);
    }
    (0..first.len())
        .map(|j| {
            let sq: Vec<f64> = sf.iter().map(|row| row[j] * row[j]).collect();
            crate::diagnostics::time_integrate(times, &sq).map(f64::sqrt)
        })
        .collect()
}

/// Pointwise sample statistics of a family of series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SeriesStats {
    pub fn mean_at(&self, times: &[f64], t: f64) -> Result<f64> {
        interpolate_at(times, &self.mean, t)
    }

    pub fn stderr_at(&self, times: &[f64], t: f64) -> Result<f64> {
        interpolate_at(times, &self.stderr, t)
    }
}

/// Mean, unbiased standard deviation and standard error at every index.
pub fn aggregate(series: &[Vec<f64>]) -> Result<SeriesStats> {
    let Some(first) = series.first() else {
        return Err(Error::InvalidArgument("cannot aggregate an empty collection".into()));
    };
    let len = first.len();
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    let r = series.len() as f64;
    let mut out = SeriesStats {
        mean: vec![0.0; len],
        std: vec![0.0; len],
        stderr: vec![0.0; len],
    };
    for i in 0..len {
        let mean = series.iter().map(|s| s[i]).sum::<f64>() / r;
        let std = if series.len() > 1 {
            (series.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
        } else {
            0.0
        };
        out.mean[i] = mean;
        out.std[i] = std;
        out.stderr[i] = std / r.sqrt();
    }
    Ok(out)
}

/// Piecewise-linear interpolation of `(times, values)` at `t`.
pub fn interpolate_at(times: &[f64], values: &[f64], t: f64) -> Result<f64> {
    if times.is_empty() || times.len() != values.len() {
        return Err(Error::InvalidArgument("interpolation needs matching non-empty series".into()));
    }
    let last = times.len() - 1;
    let tol = 1e-12 * times[last].abs().max(1.0);
    if t < times[0] - tol || t > times[last] + tol {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside [{}, {}]",
            times[0], times[last]
        )));
    }
    if last == 0 || t <= times[0] {
        return Ok(values[0]);
    }
    if t >= times[last] {
        return Ok(values[last]);
    }
    let i = times.partition_point(|&s| s <= t).clamp(1, last);
    let (t0, t1) = (times[i - 1], times[i]);
    let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
    Ok(values[i - 1] * (1.0 - w) + values[i] * w)
}

/// Resamples a series onto `grid`.
pub fn resample(times: &[f64], values: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&t| interpolate_at(times, values, t)).collect()
}

/// Statistics of one viscosity cell on the common aggregation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub nu: f64,
    pub realizations: usize,
    pub times: Vec<f64>,
    pub energy: SeriesStats,
    pub grad_sq: SeriesStats,
    pub enstrophy: SeriesStats,
    pub cum_dissipation: SeriesStats,
    pub noise_input_theoretical: SeriesStats,
    /// `||u(t)||^2 + 2 nu int ||grad u||^2 - ||u(0)||^2` per realization.
    pub measured_input: SeriesStats,
    pub sf: Option<StructureFunctionTable>,
}

impl CellStats {
    /// Quantities in CSV column order.
    pub fn quantities(&self) -> [(&'static str, &SeriesStats); 6] {
        [
            ("energy", &self.energy),
            ("grad_sq", &self.grad_sq),
            ("enstrophy", &self.enstrophy),
            ("cum_dissipation", &self.cum_dissipation),
            ("noise_input_theoretical", &self.noise_input_theoretical),
            ("measured_input", &self.measured_input),
        ]
    }
}

/// Aggregates the realizations of one cell onto `times`.
pub fn aggregate_cell(nu: f64, outputs: &[RealizationOutput], times: &[f64], radii: &[f64]) -> Result<CellStats> {
    if outputs.is_empty() {
        return Err(Error::InvalidArgument(format!("no realizations for nu = {nu}")));
    }
    let mut cols: [Vec<Vec<f64>>; 6] = Default::default();
    for out in outputs {
        let t: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        let e0 = out.records.first().map_or(0.0, |r| r.energy);
        let pick = |f: &dyn Fn(&DiagnosticsRecord) -> f64| -> Result<Vec<f64>> {
            let v: Vec<f64> = out.records.iter().map(f).collect();
            resample(&t, &v, times)
        };
        cols[0].push(pick(&|r| r.energy)?);
        cols[1].push(pick(&|r| r.grad_sq)?);
        cols[2].push(pick(&|r| r.enstrophy)?);
        cols[3].push(pick(&|r| r.cumulative_dissipation)?);
        cols[4].push(pick(&|r| r.noise_input_theoretical)?);
        cols[5].push(pick(&|r| r.measured_input(e0))?);
    }
    let [e, g, w, d, th, mi] = cols;
    let sf = if radii.is_empty() || outputs.iter().any(|o| o.sf.is_empty()) {
        None
    } else {
        let r = outputs.len() as f64;
        let mut snap = vec![0.0; radii.len()];
        let mut ti = vec![0.0; radii.len()];
        for o in outputs {
            let last = o.sf.last().expect("non-empty");
            for j in 0..radii.len() {
                snap[j] += last[j] / r;
                ti[j] += o.sf_time_integrated[j] / r;
            }
        }
        Some(StructureFunctionTable {
            radii: radii.to_vec(),
            p: 2,
            values_snapshot: snap,
            values_time_integrated: ti,
        })
    };
    Ok(CellStats {
        nu,
        realizations: outputs.len(),
        times: times.to_vec(),
        energy: aggregate(&e)?,
        grad_sq: aggregate(&g)?,
        enstrophy: aggregate(&w)?,
        cum_dissipation: aggregate(&d)?,
        noise_input_theoretical: aggregate(&th)?,
        measured_input: aggregate(&mi)?,
        sf,
    })
}

/// A realization that did not complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub nu_idx: usize,
    pub realization: usize,
    pub error: String,
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub nu_idx: usize,
    pub stats: CellStats,
    pub raw: Vec<RealizationOutput>,
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub cells: Vec<CellResult>,
    pub failures: Vec<FailedRun>,
}

/// Executes every `(viscosity, realization)` job and aggregates per cell.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    let errs = spec.validate();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let jobs = jobs(spec);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RealizationOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, r)| run_realization(spec, i, r))
            .collect()
    });
    let mut failures = Vec::new();
    let mut ok = Vec::new();
    for ((nu_idx, realization), res) in jobs.into_iter().zip(results) {
        match res {
            Ok(o) => ok.push(o),
            Err(e) => failures.push(FailedRun {
                nu_idx,
                realization,
                error: e.to_string(),
            }),
        }
    }
    if !failures.is_empty() && !spec.skip_failed {
        return Err(Error::Validation(
            failures
                .iter()
                .map(|f| format!("realization {} at nu index {}: {}", f.realization, f.nu_idx, f.error))
                .collect(),
        ));
    }
    let times = spec.aggregation_times();
    let mut cells = Vec::new();
    for (nu_idx, &nu) in spec.viscosities.iter().enumerate() {
        let raw: Vec<RealizationOutput> = ok.iter().filter(|o| o.nu_idx == nu_idx).cloned().collect();
        if raw.is_empty() {
            continue;
        }
        let stats = aggregate_cell(nu, &raw, &times, &spec.sf_radii)?;
        cells.push(CellResult { nu_idx, stats, raw });
    }
    Ok(EnsembleResult { cells, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    pub(crate) fn small_spec() -> EnsembleSpec {
        EnsembleSpec {
            realizations: 3,
            viscosities: vec![0.01, 0.02],
            grid_n: 16,
            master_seed: 7,
            ic: IcSpec::Fbb(FbbParams { hurst: 0.5 }),
            forcing: ForcingSpec {
                sigma: 0.05,
                n_b: 2,
                coeffs: None,
            },
            integrator: IntegratorConfig {
                t_end: 0.05,
                ..Default::default()
            },
            sf_radii: vec![0.125, 0.25],
            sf_normalization: SfNormalization::Average,
            common_noise: false,
            skip_failed: false,
            agg_points: 11,
            workers: 1,
        }
    }

    #[test]
    fn aggregate_arithmetic() {
        let s = aggregate(&[vec![2.0], vec![4.0]]).unwrap();
        assert_eq!(s.mean, vec![3.0]);
        assert_abs_diff_eq!(s.std[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.stderr[0], 1.0, epsilon = 1e-15);
        let same = aggregate(&vec![vec![1.0, 2.0]; 4]).unwrap();
        assert_eq!(same.std, vec![0.0, 0.0]);
        assert!(aggregate(&[]).is_err());
        let single = aggregate(&[vec![5.0]]).unwrap();
        assert_eq!((single.mean[0], single.std[0]), (5.0, 0.0));
    }

    #[test]
    fn aggregate_gaussian_sanity() {
        let mut rng = stream_rng(3, Stream::Initial { realization: 0 });
        let points = 50;
        let series: Vec<Vec<f64>> = (0..10_000)
            .map(|_| (0..points).map(|_| rng.sample(rand_distr::StandardNormal)).collect())
            .collect();
        let s = aggregate(&series).unwrap();
        let inside = (0..points).filter(|&i| s.mean[i].abs() <= 4.0 * s.stderr[i]).count();
        assert_eq!(inside, points);
    }

    #[test]
    fn interpolation() {
        let t = [0.0, 1.0, 3.0];
        let v = [0.0, 2.0, 4.0];
        assert_eq!(interpolate_at(&t, &v, 0.5).unwrap(), 1.0);
        assert_eq!(interpolate_at(&t, &v, 2.0).unwrap(), 3.0);
        assert_eq!(interpolate_at(&t, &v, 3.0).unwrap(), 4.0);
        assert!(interpolate_at(&t, &v, 3.5).is_err());
    }

    #[test]
    fn stream_ids_are_distinct() {
        let mut ids = std::collections::HashSet::new();
        for r in 0..50 {
            assert!(ids.insert(Stream::Initial { realization: r }.id()));
            assert!(ids.insert(Stream::Noise { nu_idx: None, realization: r }.id()));
            for i in 0..3 {
                assert!(ids.insert(Stream::Noise { nu_idx: Some(i), realization: r }.id()));
            }
        }
    }

    #[test]
    fn single_realization_has_zero_spread() {
        let spec = EnsembleSpec {
            realizations: 1,
            viscosities: vec![0.01],
            ..small_spec()
        };
        let res = run_ensemble(&spec).unwrap();
        let cell = &res.cells[0].stats;
        assert!(cell.energy.std.iter().all(|&s| s == 0.0));
        assert_eq!(cell.times.len(), 11);
    }

    #[test]
    fn deterministic_cell_has_zero_spread() {
        let spec = EnsembleSpec {
            ic: IcSpec::TaylorGreen { amplitude: 1.0 },
            forcing: ForcingSpec {
                sigma: 0.0,
                n_b: 2,
                coeffs: None,
            },
            ..small_spec()
        };
        let res = run_ensemble(&spec).unwrap();
        for c in &res.cells {
            assert!(c.stats.energy.std.iter().all(|&s| s <= 1e-12));
        }
    }

    #[test]
    fn seed_isolation_and_extension() {
        let spec = small_spec();
        let a = run_realization(&spec, 0, 1).unwrap();
        let more = EnsembleSpec {
            realizations: 5,
            ..spec.clone()
        };
        assert_eq!(run_realization(&more, 0, 1).unwrap(), a);
        let other = EnsembleSpec {
            master_seed: 8,
            ..spec.clone()
        };
        assert_ne!(run_realization(&other, 0, 1).unwrap().records, a.records);
    }

    #[test]
    fn common_noise_couples_viscosities() {
        let spec = EnsembleSpec {
            common_noise: true,
            viscosities: vec![0.01, 0.01],
            ..small_spec()
        };
        let a = run_realization(&spec, 0, 2).unwrap();
        let b = run_realization(&spec, 1, 2).unwrap();
        assert_eq!(a.records, b.records);
        let indep = EnsembleSpec {
            common_noise: false,
            ..spec
        };
        let c = run_realization(&indep, 0, 2).unwrap();
        let d = run_realization(&indep, 1, 2).unwrap();
        assert_ne!(c.records, d.records);
        // initial data is shared regardless of the noise coupling
        assert_eq!(c.records[0], d.records[0]);
    }

    #[test]
    fn invalid_spec_lists_every_problem() {
        let spec = EnsembleSpec {
            realizations: 0,
            viscosities: vec![-1.0],
            workers: 0,
            ..small_spec()
        };
        match run_ensemble(&spec) {
            Err(Error::Validation(v)) => assert!(v.len() >= 3, "{v:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
