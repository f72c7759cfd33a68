//! TOML run configuration.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//!
//! [grid]
//! n = 128
//!
//! [integrator]
//! dt = "auto"            # or a number
//! t_end = 1.0
//! scheme = "imex_cn_em"  # or "euler_maruyama"
//!
//! [forcing]
//! sigma = 0.01           # required
//! n_b = 9
//!
//! [initial_condition]
//! kind = "fbb"           # flat_vortex_sheet | fbb | taylor_green | file
//! hurst = 0.75
//!
//! [ensemble]
//! realizations = 32
//! viscosities = ["0.05/N", "0.1/N", "0.2/N"]
//!
//! [output]
//! sf_radii = [0.0078125, 0.015625]
//! sf_normalization = "average"
//! n_rect = 10000
//! ```
//!
//! Every problem in a file is collected before reporting: unknown keys,
//! wrong types and out-of-range values all appear in one
//! [`Error::Validation`]. Command-line overrides are applied with
//! [`Overrides::apply`] before validation and take precedence over the file.

use std::path::{Path, PathBuf};

use toml::Value;

use crate::advection::Dealias;
use crate::diagnostics::SfNormalization;
use crate::ensemble::{EnsembleSpec, ForcingSpec, IcSpec};
use crate::error::{Error, Result};
use crate::initial::VortexSheetParams;
use crate::integrator::{IntegratorConfig, Scheme, TimeStep};

/// Environment variable consulted when no worker count is configured.
pub const WORKERS_ENV: &str = "STOCH_EULER_WORKERS";

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_N_B: usize = 9;
pub const DEFAULT_REALIZATIONS: usize = 32;
pub const DEFAULT_N_RECT: usize = 10_000;
pub const DEFAULT_AGG_POINTS: usize = 512;

/// A viscosity, possibly scaled by the grid size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Viscosity {
    Absolute(f64),
    /// `value / N`.
    PerN(f64),
}

impl Viscosity {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Viscosity::Absolute(v) => v,
            Viscosity::PerN(v) => v / n as f64,
        }
    }

    /// Parses `"0.05"`, `"0.05/N"` or `"0.05/n"`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((a, b)) if matches!(b.trim(), "N" | "n") => a.trim().parse().ok().map(Viscosity::PerN),
            Some(_) => None,
            None => s.parse().ok().map(Viscosity::Absolute),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid_n: usize,
    /// `nu` is ignored; viscosities come from `viscosities`.
    pub integrator: IntegratorConfig,
    /// Required; `None` until supplied by the file or an override.
    pub sigma: Option<f64>,
    pub n_b: usize,
    pub coeffs: Option<Vec<Vec<f64>>>,
    pub ic: IcSpec,
    pub realizations: usize,
    pub viscosities: Vec<Viscosity>,
    pub common_noise: bool,
    pub skip_failed: bool,
    pub agg_points: usize,
    pub workers: Option<usize>,
    /// Defaults to dyadic radii from two cells to `n/4` cells.
    pub sf_radii: Option<Vec<f64>>,
    pub sf_normalization: SfNormalization,
    pub n_rect: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            grid_n: DEFAULT_N,
            integrator: IntegratorConfig::default(),
            sigma: None,
            n_b: DEFAULT_N_B,
            coeffs: None,
            ic: IcSpec::FlatVortexSheet(VortexSheetParams::default()),
            realizations: DEFAULT_REALIZATIONS,
            viscosities: vec![
                Viscosity::PerN(0.05),
                Viscosity::PerN(0.1),
                Viscosity::PerN(0.2),
            ],
            common_noise: false,
            skip_failed: false,
            agg_points: DEFAULT_AGG_POINTS,
            workers: None,
            sf_radii: None,
            sf_normalization: SfNormalization::default(),
            n_rect: DEFAULT_N_RECT,
        }
    }
}

/// Command-line values that replace configured ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nu: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub realizations: Option<usize>,
    pub workers: Option<usize>,
    pub common_noise: Option<bool>,
    pub skip_failed: Option<bool>,
    pub sf_normalization: Option<SfNormalization>,
    pub project_every_step: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.nu {
            cfg.viscosities = v.iter().map(|&x| Viscosity::Absolute(x)).collect();
        }
        if let Some(v) = self.sigma {
            cfg.sigma = Some(v);
        }
        if let Some(v) = self.n {
            cfg.grid_n = v;
        }
        if let Some(v) = self.t_end {
            cfg.integrator.t_end = v;
        }
        if let Some(v) = self.realizations {
            cfg.realizations = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = Some(v);
        }
        if let Some(v) = self.common_noise {
            cfg.common_noise = v;
        }
        if let Some(v) = self.skip_failed {
            cfg.skip_failed = v;
        }
        if let Some(v) = self.sf_normalization {
            cfg.sf_normalization = v;
        }
        if let Some(v) = self.project_every_step {
            cfg.integrator.project_every_step = v;
        }
    }
}

const TOP_KEYS: &[&str] = &["seed", "output_dir", "grid", "integrator", "forcing", "initial_condition", "ensemble", "output"];
const GRID_KEYS: &[&str] = &["n"];
const INTEGRATOR_KEYS: &[&str] = &[
    "dt",
    "t_end",
    "scheme",
    "cfl",
    "dt_max",
    "dissipation_tol",
    "record_every",
    "dealias",
    "project_every_step",
];
const FORCING_KEYS: &[&str] = &["sigma", "n_b", "coeffs"];
const ENSEMBLE_KEYS: &[&str] = &["realizations", "viscosities", "common_noise", "skip_failed", "agg_points", "workers"];
const OUTPUT_KEYS: &[&str] = &["sf_radii", "sf_normalization", "n_rect", "snapshot_every"];

/// Reads typed values out of a TOML table, collecting every problem.
struct Reader<'a> {
    errs: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn section<'v>(&mut self, root: &'v toml::Table, name: &str, known: &[&str]) -> Option<&'v toml::Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => {
                for k in t.keys() {
                    if !known.contains(&k.as_str()) {
                        self.errs.push(format!("unknown key `{name}.{k}`"));
                    }
                }
                Some(t)
            }
            Some(_) => {
                self.errs.push(format!("`{name}` must be a table"));
                None
            }
        }
    }

    fn float(&mut self, t: &toml::Table, sec: &str, key: &str, out: &mut f64) {
        match t.get(key) {
            None => {}
            Some(Value::Float(v)) => *out = *v,
            Some(Value::Integer(v)) => *out = *v as f64,
            Some(v) => self.errs.push(format!("`{sec}{key}` must be a number, got {}", v.type_str())),
        }
    }

    fn opt_float(&mut self, t: &toml::Table, sec: &str, key: &str, out: &mut Option<f64>) {
        if t.contains_key(key) {
            let mut v = f64::NAN;
            self.float(t, sec, key, &mut v);
            if !v.is_nan() {
                *out = Some(v);
            }
        }
    }

    fn uint(&mut self, t: &toml::Table, sec: &str, key: &str, out: &mut usize) {
        match t.get(key) {
            None => {}
            Some(Value::Integer(v)) if *v >= 0 => *out = *v as usize,
            Some(Value::Integer(v)) => self.errs.push(format!("`{sec}{key}` must be >= 0, got {v}")),
            Some(v) => self.errs.push(format!("`{sec}{key}` must be an integer, got {}", v.type_str())),
        }
    }

    fn boolean(&mut self, t: &toml::Table, sec: &str, key: &str, out: &mut bool) {
        match t.get(key) {
            None => {}
            Some(Value::Boolean(v)) => *out = *v,
            Some(v) => self.errs.push(format!("`{sec}{key}` must be a boolean, got {}", v.type_str())),
        }
    }

    fn float_list(&mut self, v: &Value, name: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = v else {
            self.errs.push(format!("`{name}` must be an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(x) => out.push(*x),
                Value::Integer(x) => out.push(*x as f64),
                _ => {
                    self.errs.push(format!("`{name}` must be an array of numbers"));
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Deserializes an enum-like string through serde.
    fn variant<T: serde::de::DeserializeOwned>(&mut self, t: &toml::Table, sec: &str, key: &str, allowed: &str, out: &mut T) {
        if let Some(v) = t.get(key) {
            match v.clone().try_into::<T>() {
                Ok(x) => *out = x,
                Err(_) => self.errs.push(format!("`{sec}{key}` must be one of {allowed}, got {v}")),
            }
        }
    }
}

impl RunConfig {
    /// Parses TOML text, reporting syntax errors, unknown keys and type
    /// errors. Value ranges are checked separately by [`RunConfig::validate`].
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let root: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut errs = Vec::new();
        let mut cfg = RunConfig::default();
        let mut rd = Reader { errs: &mut errs };

        for k in root.keys() {
            if !TOP_KEYS.contains(&k.as_str()) {
                rd.errs.push(format!("unknown key `{k}`"));
            }
        }
        match root.get("seed") {
            None => {}
            Some(Value::Integer(v)) => cfg.seed = *v as u64,
            Some(v) => rd.errs.push(format!("`seed` must be an integer, got {}", v.type_str())),
        }
        match root.get("output_dir") {
            None => {}
            Some(Value::String(s)) => cfg.output_dir = PathBuf::from(s),
            Some(v) => rd.errs.push(format!("`output_dir` must be a string, got {}", v.type_str())),
        }

        if let Some(t) = rd.section(&root, "grid", GRID_KEYS) {
            rd.uint(t, "grid.", "n", &mut cfg.grid_n);
        }

        if let Some(t) = rd.section(&root, "integrator", INTEGRATOR_KEYS) {
            let s = "integrator.";
            let ic = &mut cfg.integrator;
            match t.get("dt") {
                None => {}
                Some(Value::String(x)) if x == "auto" => ic.dt = TimeStep::AUTO,
                Some(Value::Float(x)) => ic.dt = TimeStep::Fixed(*x),
                Some(Value::Integer(x)) => ic.dt = TimeStep::Fixed(*x as f64),
                Some(v) => rd.errs.push(format!("`integrator.dt` must be a number or \"auto\", got {v}")),
            }
            rd.float(t, s, "t_end", &mut ic.t_end);
            rd.variant::<Scheme>(t, s, "scheme", "\"imex_cn_em\", \"euler_maruyama\"", &mut ic.scheme);
            rd.float(t, s, "cfl", &mut ic.cfl);
            rd.float(t, s, "dt_max", &mut ic.dt_max);
            rd.float(t, s, "dissipation_tol", &mut ic.dissipation_tol);
            rd.uint(t, s, "record_every", &mut ic.record_every);
            rd.variant::<Dealias>(t, s, "dealias", "\"three_halves\", \"two_thirds\", \"none\"", &mut ic.dealias);
            rd.boolean(t, s, "project_every_step", &mut ic.project_every_step);
        }

        if let Some(t) = rd.section(&root, "forcing", FORCING_KEYS) {
            rd.opt_float(t, "forcing.", "sigma", &mut cfg.sigma);
            rd.uint(t, "forcing.", "n_b", &mut cfg.n_b);
            if let Some(v) = t.get("coeffs") {
                match v {
                    Value::Array(rows) => {
                        let parsed: Option<Vec<Vec<f64>>> = rows.iter().map(|r| rd.float_list(r, "forcing.coeffs")).collect();
                        cfg.coeffs = parsed;
                    }
                    _ => rd.errs.push("`forcing.coeffs` must be an array of arrays".into()),
                }
            }
        }

        if let Some(v) = root.get("initial_condition") {
            match v.clone().try_into::<IcSpec>() {
                Ok(ic) => cfg.ic = ic,
                Err(e) => rd.errs.push(format!(
                    "`initial_condition`: {} (kind must be one of flat_vortex_sheet, fbb, taylor_green, file)",
                    e.message().trim()
                )),
            }
        }

        if let Some(t) = rd.section(&root, "ensemble", ENSEMBLE_KEYS) {
            let s = "ensemble.";
            rd.uint(t, s, "realizations", &mut cfg.realizations);
            if let Some(v) = t.get("viscosities") {
                match v {
                    Value::Array(items) => {
                        let mut out = Vec::new();
                        for item in items {
                            let parsed = match item {
                                Value::Float(x) => Some(Viscosity::Absolute(*x)),
                                Value::Integer(x) => Some(Viscosity::Absolute(*x as f64)),
                                Value::String(x) => Viscosity::parse(x),
                                _ => None,
                            };
                            match parsed {
                                Some(p) => out.push(p),
                                None => rd.errs.push(format!(
                                    "`ensemble.viscosities` entry {item} must be a number or \"<value>/N\""
                                )),
                            }
                        }
                        cfg.viscosities = out;
                    }
                    _ => rd.errs.push("`ensemble.viscosities` must be an array".into()),
                }
            }
            rd.boolean(t, s, "common_noise", &mut cfg.common_noise);
            rd.boolean(t, s, "skip_failed", &mut cfg.skip_failed);
            rd.uint(t, s, "agg_points", &mut cfg.agg_points);
            if t.contains_key("workers") {
                let mut w = 0;
                rd.uint(t, s, "workers", &mut w);
                cfg.workers = Some(w);
            }
        }

        if let Some(t) = rd.section(&root, "output", OUTPUT_KEYS) {
            let s = "output.";
            if let Some(v) = t.get("sf_radii") {
                cfg.sf_radii = rd.float_list(v, "output.sf_radii");
            }
            rd.variant::<SfNormalization>(t, s, "sf_normalization", "\"average\", \"integral\"", &mut cfg.sf_normalization);
            rd.uint(t, s, "n_rect", &mut cfg.n_rect);
            rd.uint(t, s, "snapshot_every", &mut cfg.integrator.snapshot_every);
        }

        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Reads a file without range validation (overrides may still apply).
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn viscosities_resolved(&self) -> Vec<f64> {
        self.viscosities.iter().map(|v| v.resolve(self.grid_n)).collect()
    }

    /// Worker count: configured value, else `STOCH_EULER_WORKERS`, else the
    /// available parallelism.
    pub fn resolved_workers(&self) -> Result<usize> {
        if let Some(w) = self.workers {
            return Ok(w);
        }
        match std::env::var(WORKERS_ENV) {
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{s}`"))),
            Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    /// All range errors, including those of the derived ensemble spec.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        match self.sigma {
            None => errs.push("missing required key `forcing.sigma`".into()),
            Some(s) if !(s >= 0.0) || !s.is_finite() => {
                errs.push(format!("forcing.sigma must be >= 0, got {s}"));
            }
            _ => {}
        }
        if self.n_rect == 0 {
            errs.push("output.n_rect must be >= 1".into());
        }
        if self.workers == Some(0) {
            errs.push("ensemble.workers must be >= 1".into());
        }
        let spec = self.spec_unchecked(self.workers.unwrap_or(1));
        errs.extend(
            spec.validate()
                .into_iter()
                .filter(|e| !e.starts_with("forcing.sigma") && !e.starts_with("ensemble.workers")),
        );
        errs
    }

    fn spec_unchecked(&self, workers: usize) -> EnsembleSpec {
        EnsembleSpec {
            realizations: self.realizations,
            viscosities: self.viscosities_resolved(),
            grid_n: self.grid_n,
            master_seed: self.seed,
            ic: self.ic.clone(),
            forcing: ForcingSpec {
                sigma: self.sigma.unwrap_or(0.0),
                n_b: self.n_b,
                coeffs: self.coeffs.clone(),
            },
            integrator: self.integrator.clone(),
            sf_radii: self
                .sf_radii
                .clone()
                .unwrap_or_else(|| EnsembleSpec::default_radii(self.grid_n)),
            sf_normalization: self.sf_normalization,
            common_noise: self.common_noise,
            skip_failed: self.skip_failed,
            agg_points: self.agg_points,
            workers,
        }
    }

    /// Validated ensemble specification.
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        let errs = self.validate();
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(self.spec_unchecked(self.resolved_workers()?))
    }
}

/// Reads, validates and returns a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let cfg = RunConfig::load(path)?;
    let errs = cfg.validate();
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Validation(errs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::FbbParams;

    fn errors(text: &str) -> Vec<String> {
        match RunConfig::from_toml_str(text) {
            Err(Error::Validation(e)) => e,
            Ok(cfg) => cfg.validate(),
            Err(e) => vec![e.to_string()],
        }
    }

    #[test]
    fn empty_file_gives_defaults_and_requires_sigma() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.grid_n, 256);
        assert_eq!(cfg.n_b, 9);
        assert_eq!(cfg.realizations, 32);
        assert_eq!(cfg.n_rect, 10_000);
        assert_eq!(cfg.viscosities_resolved(), vec![0.05 / 256.0, 0.1 / 256.0, 0.2 / 256.0]);
        let errs = cfg.validate();
        assert!(errs.iter().any(|e| e.contains("forcing.sigma")), "{errs:?}");
        assert_eq!(errs.len(), 1, "{errs:?}");
    }

    #[test]
    fn per_n_viscosity_resolves_against_grid() {
        let cfg = RunConfig::from_toml_str("[ensemble]\nviscosities = [\"0.05/N\", 0.001]\n").unwrap();
        assert_eq!(cfg.viscosities_resolved(), vec![0.05 / 256.0, 0.001]);
        assert_eq!(Viscosity::parse("0.1 / n"), Some(Viscosity::PerN(0.1)));
        assert_eq!(Viscosity::parse("0.1/M"), None);
    }

    #[test]
    fn negative_sigma_names_key() {
        let errs = errors("[forcing]\nsigma = -0.1\n");
        assert!(errs.iter().any(|e| e.contains("forcing.sigma")), "{errs:?}");
    }

    #[test]
    fn all_unknown_keys_reported() {
        let errs = errors("sed = 1\n[grid]\nN = 64\n[forcing]\nsigma = 0.1\nsgima = 2\n[bogus]\n");
        for key in ["`sed`", "`grid.N`", "`forcing.sgima`", "`bogus`"] {
            assert!(errs.iter().any(|e| e.contains(key)), "{key} missing from {errs:?}");
        }
    }

    #[test]
    fn type_and_range_errors_accumulate() {
        let errs = errors("[grid]\nn = 7\n[forcing]\nsigma = 0.1\n[integrator]\ncfl = 3.0\nscheme = \"rk9\"\n");
        assert!(errs.iter().any(|e| e.contains("integrator.scheme")), "{errs:?}");
        let cfg = RunConfig::from_toml_str("[grid]\nn = 7\n[forcing]\nsigma = 0.1\n[integrator]\ncfl = 3.0\n").unwrap();
        let errs = cfg.validate();
        assert!(errs.iter().any(|e| e.contains("grid.n")), "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("integrator.cfl")), "{errs:?}");
    }

    #[test]
    fn initial_condition_variants_parse() {
        let cfg = RunConfig::from_toml_str("[initial_condition]\nkind = \"fbb\"\nhurst = 0.5\n").unwrap();
        assert_eq!(cfg.ic, IcSpec::Fbb(FbbParams { hurst: 0.5 }));
        let cfg = RunConfig::from_toml_str("[initial_condition]\nkind = \"flat_vortex_sheet\"\ndelta = 0.0\n").unwrap();
        assert_eq!(
            cfg.ic,
            IcSpec::FlatVortexSheet(VortexSheetParams {
                delta: 0.0,
                ..Default::default()
            })
        );
        assert!(!errors("[initial_condition]\nkind = \"fbb\"\nhurts = 0.5\n").is_empty());
        assert!(!errors("[initial_condition]\nkind = \"spiral\"\n").is_empty());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::from_toml_str("seed = 1\n[forcing]\nsigma = 0.1\n[grid]\nn = 64\n").unwrap();
        Overrides {
            seed: Some(9),
            sigma: Some(0.2),
            n: Some(32),
            nu: Some(vec![0.01]),
            project_every_step: Some(false),
            ..Default::default()
        }
        .apply(&mut cfg);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sigma, Some(0.2));
        assert_eq!(cfg.grid_n, 32);
        assert_eq!(cfg.viscosities_resolved(), vec![0.01]);
        assert!(!cfg.integrator.project_every_step);
    }

    #[test]
    fn per_n_viscosity_follows_grid_override() {
        let mut cfg = RunConfig::from_toml_str("[forcing]\nsigma = 0.1\n").unwrap();
        Overrides {
            n: Some(128),
            ..Default::default()
        }
        .apply(&mut cfg);
        assert_eq!(cfg.viscosities_resolved()[1], 0.1 / 128.0);
    }

    #[test]
    fn spec_uses_default_radii() {
        let mut cfg = RunConfig::from_toml_str("[forcing]\nsigma = 0.1\n[grid]\nn = 64\n[ensemble]\nworkers = 2\n").unwrap();
        cfg.workers = Some(2);
        let spec = cfg.ensemble_spec().unwrap();
        assert_eq!(spec.sf_radii, EnsembleSpec::default_radii(64));
        assert_eq!(spec.workers, 2);
    }
}
