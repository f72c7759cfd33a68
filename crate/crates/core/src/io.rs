//! On-disk formats: diagnostics CSVs, structure-function CSVs, binary
//! velocity snapshots and the ensemble manifest.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly.
//!
//! Ensemble layout under an output directory:
//!
//! ```text
//! manifest.json
//! failures.json
//! nu_<i>/real_<rrrr>.csv        per-record diagnostics
//! nu_<i>/real_<rrrr>_grad.csv   ||grad u||^2 after every step
//! nu_<i>/real_<rrrr>_sf.csv     S_2 per record and time-integrated
//! nu_<i>/real_<rrrr>_snap_<kkkk>.bin  optional velocity snapshots
//! nu_<i>/mean_diagnostics.csv   mean/std/stderr per quantity
//! nu_<i>/mean_sf.csv
//! nu_<i>/balance.csv
//! nu_<i>/dissipation.csv
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{dissipation_integral, dissipation_trapezoid, energy_balance_residual, DiagnosticsRecord, SfNormalization, StructureFunctionTable};
use crate::ensemble::{aggregate_cell, seed_table, CellStats, EnsembleResult, EnsembleSpec, FailedRun, RealizationOutput, SeedRecord};
use crate::error::{Error, Result};
use crate::spectral::{Grid, PhysicalField};

pub const DIAGNOSTICS_HEADER: &str = "t,energy,grad_sq,enstrophy,cum_dissipation,noise_input_theoretical";
pub const GRAD_HEADER: &str = "t,grad_sq";
pub const SF_HEADER: &str = "t_or_total,r,p,value";

/// Marker used in the `t_or_total` column for time-integrated rows.
pub const SF_TOTAL: &str = "total";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Splits a CSV text into numbered data rows after checking the header.
fn rows<'a>(path: &Path, text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                msg: format!("expected header `{header}`, found `{h}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                msg: "missing header".into(),
            })
        }
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("expected {width} fields, found {}", cells.len()),
            });
        }
        out.push((i + 1, cells));
    }
    Ok(out)
}

fn num(path: &Path, line: usize, cell: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::Parse {
        path: path.into(),
        line,
        msg: format!("`{cell}` is not a number"),
    })
}

pub fn format_diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(110 * (records.len() + 1));
    s.push_str(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt(r.t),
            fmt(r.energy),
            fmt(r.grad_sq),
            fmt(r.enstrophy),
            fmt(r.cumulative_dissipation),
            fmt(r.noise_input_theoretical)
        );
    }
    s
}

/// Parses diagnostics CSV text; `path` is only used in error messages.
pub fn parse_diagnostics_csv(path: &Path, text: &str) -> Result<Vec<DiagnosticsRecord>> {
    rows(path, text, DIAGNOSTICS_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            let v = |i: usize| num(path, line, c[i]);
            Ok(DiagnosticsRecord {
                t: v(0)?,
                energy: v(1)?,
                grad_sq: v(2)?,
                enstrophy: v(3)?,
                cumulative_dissipation: v(4)?,
                noise_input_theoretical: v(5)?,
            })
        })
        .collect()
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_file(path, &format_diagnostics_csv(records))
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    parse_diagnostics_csv(path, &read_file(path)?)
}

pub fn write_grad_csv(path: &Path, series: &[(f64, f64)]) -> Result<()> {
    let mut s = String::from(GRAD_HEADER);
    s.push('\n');
    for (t, g) in series {
        let _ = writeln!(s, "{},{}", fmt(*t), fmt(*g));
    }
    write_file(path, &s)
}

pub fn read_grad_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    rows(path, &read_file(path)?, GRAD_HEADER)?
        .into_iter()
        .map(|(line, c)| Ok((num(path, line, c[0])?, num(path, line, c[1])?)))
        .collect()
}

/// One row of a structure-function CSV. `t = None` marks a time-integrated value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SfRow {
    pub t: Option<f64>,
    pub r: f64,
    pub p: u32,
    pub value: f64,
}

pub fn format_sf_csv(rows_: &[SfRow]) -> String {
    let mut s = String::from(SF_HEADER);
    s.push('\n');
    for row in rows_ {
        let t = row.t.map_or_else(|| SF_TOTAL.to_string(), fmt);
        let _ = writeln!(s, "{t},{},{},{}", fmt(row.r), row.p, fmt(row.value));
    }
    s
}

pub fn write_sf_csv(path: &Path, rows_: &[SfRow]) -> Result<()> {
    write_file(path, &format_sf_csv(rows_))
}

pub fn read_sf_csv(path: &Path) -> Result<Vec<SfRow>> {
    rows(path, &read_file(path)?, SF_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            let t = if c[0] == SF_TOTAL {
                None
            } else {
                Some(num(path, line, c[0])?)
            };
            let p = c[2].parse::<u32>().map_err(|_| Error::Parse {
                path: path.into(),
                line,
                msg: format!("`{}` is not an integer order", c[2]),
            })?;
            Ok(SfRow {
                t,
                r: num(path, line, c[1])?,
                p,
                value: num(path, line, c[3])?,
            })
        })
        .collect()
}

/// Rows for a table of `S_p` values; snapshot rows carry time `t`.
pub fn sf_table_rows(table: &StructureFunctionTable, t: f64) -> Vec<SfRow> {
    let snap = table.radii.iter().zip(&table.values_snapshot).map(|(&r, &v)| SfRow {
        t: Some(t),
        r,
        p: table.p,
        value: v,
    });
    let total = table
        .radii
        .iter()
        .zip(&table.values_time_integrated)
        .map(|(&r, &v)| SfRow {
            t: None,
            r,
            p: table.p,
            value: v,
        });
    snap.chain(total).collect()
}

/// Header of a mean CSV: `t` then `<q>_mean,<q>_std,<q>_stderr` per quantity.
pub fn mean_header(stats: &CellStats) -> String {
    let mut h = String::from("t");
    for (name, _) in stats.quantities() {
        let _ = write!(h, ",{name}_mean,{name}_std,{name}_stderr");
    }
    h
}

pub fn format_mean_csv(stats: &CellStats) -> String {
    let mut s = mean_header(stats);
    s.push('\n');
    let q = stats.quantities();
    for (i, &t) in stats.times.iter().enumerate() {
        s.push_str(&fmt(t));
        for (_, st) in &q {
            let _ = write!(s, ",{},{},{}", fmt(st.mean[i]), fmt(st.std[i]), fmt(st.stderr[i]));
        }
        s.push('\n');
    }
    s
}

pub fn write_mean_csv(path: &Path, stats: &CellStats) -> Result<()> {
    write_file(path, &format_mean_csv(stats))
}

pub const BALANCE_HEADER: &str = "t,measured_input,predicted_input,residual,stderr";

pub fn write_balance_csv(path: &Path, stats: &CellStats, sigma_bar: f64) -> Result<()> {
    let mut s = String::from(BALANCE_HEADER);
    s.push('\n');
    for &t in &stats.times {
        let b = energy_balance_residual(stats, sigma_bar, t)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt(t),
            fmt(b.residual + sigma_bar * t),
            fmt(sigma_bar * t),
            fmt(b.residual),
            fmt(b.stderr)
        );
    }
    write_file(path, &s)
}

pub const DISSIPATION_HEADER: &str = "realization,trapezoid,riemann,relative_difference";

/// Per-realization comparison of the left Riemann sum with the trapezoid.
pub fn write_dissipation_csv(path: &Path, raw: &[RealizationOutput], n_rect: usize) -> Result<()> {
    let mut s = String::from(DISSIPATION_HEADER);
    s.push('\n');
    for o in raw {
        let t_end = o.grad_series.last().map_or(0.0, |p| p.0);
        let trap = dissipation_trapezoid(&o.grad_series, o.nu);
        let riem = if t_end > 0.0 {
            dissipation_integral(&o.grad_series, o.nu, t_end, n_rect)?
        } else {
            0.0
        };
        let rel = if trap != 0.0 { (riem - trap).abs() / trap.abs() } else { 0.0 };
        let _ = writeln!(s, "{},{},{},{}", o.realization, fmt(trap), fmt(riem), fmt(rel));
    }
    write_file(path, &s)
}

// Snapshots.

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SEULSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;
const ENDIAN_TAG: u32 = 0x0102_0304;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 8 + 4 + 4;

/// What a snapshot payload holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Velocity = 1,
}

impl FieldKind {
    fn from_u32(v: u32) -> Option<Self> {
        (v == 1).then_some(FieldKind::Velocity)
    }
}

/// A velocity field in physical space at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub kind: FieldKind,
    pub field: PhysicalField,
}

/// Layout: magic, version, endianness tag, `n` (u64), `t` (f64), kind (u32),
/// reserved (u32), then `u1` and `u2` as row-major little-endian f64.
pub fn encode_snapshot(snap: &Snapshot) -> Vec<u8> {
    let n = snap.field.grid().n();
    let mut b = Vec::with_capacity(HEADER_LEN + 16 * n * n);
    b.extend_from_slice(SNAPSHOT_MAGIC);
    b.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    b.extend_from_slice(&ENDIAN_TAG.to_le_bytes());
    b.extend_from_slice(&(n as u64).to_le_bytes());
    b.extend_from_slice(&snap.t.to_le_bytes());
    b.extend_from_slice(&(snap.kind as u32).to_le_bytes());
    b.extend_from_slice(&0u32.to_le_bytes());
    for c in 0..2 {
        for x in snap.field.component(c) {
            b.extend_from_slice(&x.to_le_bytes());
        }
    }
    b
}

pub fn decode_snapshot(path: &Path, bytes: &[u8]) -> Result<Snapshot> {
    let bad = |msg: String| Error::Parse {
        path: path.into(),
        line: 0,
        msg,
    };
    if bytes.len() < HEADER_LEN || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("not a snapshot file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported snapshot version {version}")));
    }
    if u32_at(12) != ENDIAN_TAG {
        return Err(bad("unexpected endianness tag".into()));
    }
    let n = usize::try_from(u64_at(16)).map_err(|_| bad("grid size overflow".into()))?;
    let t = f64::from_bits(u64_at(24));
    let kind = FieldKind::from_u32(u32_at(32)).ok_or_else(|| bad(format!("unknown field kind {}", u32_at(32))))?;
    let len = n.checked_mul(n).ok_or_else(|| bad("grid size overflow".into()))?;
    if bytes.len() != HEADER_LEN + 16 * len {
        return Err(bad(format!(
            "payload has {} bytes, expected {} for n = {n}",
            bytes.len() - HEADER_LEN,
            16 * len
        )));
    }
    let grid = Grid::new(n)?;
    let comp = |c: usize| -> Vec<f64> {
        let start = HEADER_LEN + 8 * c * len;
        bytes[start..start + 8 * len]
            .chunks_exact(8)
            .map(|ch| f64::from_le_bytes(ch.try_into().unwrap()))
            .collect()
    };
    Ok(Snapshot {
        t,
        kind,
        field: PhysicalField::new(&grid, comp(0), comp(1))?,
    })
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, encode_snapshot(snap)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(path, &bytes)
}

// Ensemble directories.

/// Everything needed to re-execute an ensemble bit-identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub spec: EnsembleSpec,
    pub sf_normalization: SfNormalization,
    pub n_rect: usize,
    pub seeds: Vec<SeedRecord>,
}

impl Manifest {
    pub fn new(spec: &EnsembleSpec, n_rect: usize) -> Self {
        Manifest {
            version: crate::VERSION.to_string(),
            spec: spec.clone(),
            sf_normalization: spec.sf_normalization,
            n_rect,
            seeds: seed_table(spec),
        }
    }
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join("manifest.json"), &(json + "\n"))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    serde_json::from_str(&read_file(&path)?).map_err(|e| Error::Parse {
        path,
        line: e.line(),
        msg: e.to_string(),
    })
}

pub fn cell_dir(out: &Path, nu_idx: usize) -> PathBuf {
    out.join(format!("nu_{nu_idx}"))
}

fn real_stem(out: &Path, nu_idx: usize, realization: usize) -> PathBuf {
    cell_dir(out, nu_idx).join(format!("real_{realization:04}"))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn realization_paths(out: &Path, nu_idx: usize, realization: usize) -> [PathBuf; 3] {
    let stem = real_stem(out, nu_idx, realization);
    [
        with_suffix(&stem, ".csv"),
        with_suffix(&stem, "_grad.csv"),
        with_suffix(&stem, "_sf.csv"),
    ]
}

/// `real_<rrrr>_snap_<kkkk>.bin` for the `k`-th kept state.
pub fn snapshot_path(out: &Path, nu_idx: usize, realization: usize, k: usize) -> PathBuf {
    with_suffix(&real_stem(out, nu_idx, realization), &format!("_snap_{k:04}.bin"))
}

pub fn write_realization(out: &Path, o: &RealizationOutput, radii: &[f64]) -> Result<()> {
    let [diag, grad, sf] = realization_paths(out, o.nu_idx, o.realization);
    for (k, (t, u)) in o.snapshots.iter().enumerate() {
        let snap = Snapshot {
            t: *t,
            kind: FieldKind::Velocity,
            field: u.to_physical(),
        };
        write_snapshot(&snapshot_path(out, o.nu_idx, o.realization, k), &snap)?;
    }
    write_diagnostics_csv(&diag, &o.records)?;
    write_grad_csv(&grad, &o.grad_series)?;
    let mut rows_ = Vec::new();
    for (rec, vals) in o.records.iter().zip(&o.sf) {
        for (&r, &v) in radii.iter().zip(vals) {
            rows_.push(SfRow {
                t: Some(rec.t),
                r,
                p: 2,
                value: v,
            });
        }
    }
    for (&r, &v) in radii.iter().zip(&o.sf_time_integrated) {
        rows_.push(SfRow {
            t: None,
            r,
            p: 2,
            value: v,
        });
    }
    write_sf_csv(&sf, &rows_)
}

pub fn read_realization(out: &Path, nu_idx: usize, realization: usize, nu: f64, radii: &[f64]) -> Result<RealizationOutput> {
    let [diag, grad, sf_path] = realization_paths(out, nu_idx, realization);
    let records = read_diagnostics_csv(&diag)?;
    let grad_series = read_grad_csv(&grad)?;
    let sf_rows = read_sf_csv(&sf_path)?;
    let k = radii.len();
    let (snap, total): (Vec<SfRow>, Vec<SfRow>) = sf_rows.into_iter().partition(|r| r.t.is_some());
    let inconsistent = |msg: &str| Error::Parse {
        path: sf_path.clone(),
        line: 0,
        msg: msg.into(),
    };
    if k == 0 {
        if !snap.is_empty() || !total.is_empty() {
            return Err(inconsistent("structure-function rows present but no radii configured"));
        }
    } else if snap.len() != k * records.len() || total.len() != k {
        return Err(inconsistent("row count does not match records x radii"));
    }
    let sf = if k == 0 {
        Vec::new()
    } else {
        snap.chunks(k).map(|c| c.iter().map(|r| r.value).collect()).collect()
    };
    Ok(RealizationOutput {
        nu_idx,
        realization,
        nu,
        records,
        grad_series,
        sf,
        sf_time_integrated: total.iter().map(|r| r.value).collect(),
        snapshots: Vec::new(),
    })
}

/// Writes the per-cell statistics files.
pub fn write_cell_outputs(out: &Path, nu_idx: usize, stats: &CellStats, raw: &[RealizationOutput], sigma_bar: f64, n_rect: usize) -> Result<()> {
    let dir = cell_dir(out, nu_idx);
    write_mean_csv(&dir.join("mean_diagnostics.csv"), stats)?;
    let sf_rows = stats
        .sf
        .as_ref()
        .map(|t| sf_table_rows(t, stats.times.last().copied().unwrap_or(0.0)))
        .unwrap_or_default();
    write_sf_csv(&dir.join("mean_sf.csv"), &sf_rows)?;
    write_balance_csv(&dir.join("balance.csv"), stats, sigma_bar)?;
    write_dissipation_csv(&dir.join("dissipation.csv"), raw, n_rect)
}

pub fn write_failures(out: &Path, failures: &[FailedRun]) -> Result<()> {
    let json = serde_json::to_string_pretty(failures).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&out.join("failures.json"), &(json + "\n"))
}

pub fn read_failures(out: &Path) -> Result<Vec<FailedRun>> {
    let path = out.join("failures.json");
    if !path.exists() {
        return Ok(Vec::new());
    }
    serde_json::from_str(&read_file(&path)?).map_err(|e| Error::Parse {
        path,
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Persists manifest, raw realizations, failures and cell statistics.
pub fn write_ensemble(out: &Path, spec: &EnsembleSpec, result: &EnsembleResult, n_rect: usize) -> Result<()> {
    write_manifest(out, &Manifest::new(spec, n_rect))?;
    write_failures(out, &result.failures)?;
    let sigma_bar = spec.forcing.build(&Grid::new(spec.grid_n)?)?.sigma_bar();
    for cell in &result.cells {
        for o in &cell.raw {
            write_realization(out, o, &spec.sf_radii)?;
        }
        write_cell_outputs(out, cell.nu_idx, &cell.stats, &cell.raw, sigma_bar, n_rect)?;
    }
    Ok(())
}

/// Recomputes all statistics files from the raw outputs under `out`.
pub fn analyze(out: &Path) -> Result<Vec<CellStats>> {
    let manifest = read_manifest(out)?;
    let spec = &manifest.spec;
    let failed = read_failures(out)?;
    let sigma_bar = spec.forcing.build(&Grid::new(spec.grid_n)?)?.sigma_bar();
    let times = spec.aggregation_times();
    let mut cells = Vec::new();
    for (nu_idx, &nu) in spec.viscosities.iter().enumerate() {
        let mut raw = Vec::new();
        for r in 0..spec.realizations {
            if failed.iter().any(|f| f.nu_idx == nu_idx && f.realization == r) {
                continue;
            }
            raw.push(read_realization(out, nu_idx, r, nu, &spec.sf_radii)?);
        }
        if raw.is_empty() {
            continue;
        }
        let stats = aggregate_cell(nu, &raw, &times, &spec.sf_radii)?;
        write_cell_outputs(out, nu_idx, &stats, &raw, sigma_bar, manifest.n_rect)?;
        cells.push(stats);
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize) -> DiagnosticsRecord {
        let x = i as f64;
        DiagnosticsRecord {
            t: x * 0.1,
            energy: 1.0 / (x + 3.0),
            grad_sq: std::f64::consts::PI * x,
            enstrophy: x.sqrt(),
            cumulative_dissipation: 1e-300 * x,
            noise_input_theoretical: -x / 7.0,
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(format_diagnostics_csv(&[]), format!("{DIAGNOSTICS_HEADER}\n"));
        assert!(parse_diagnostics_csv(Path::new("x"), &format_diagnostics_csv(&[])).unwrap().is_empty());
    }

    #[test]
    fn diagnostics_round_trip_exactly() {
        let recs: Vec<_> = (0..1000).map(rec).collect();
        let back = parse_diagnostics_csv(Path::new("x"), &format_diagnostics_csv(&recs)).unwrap();
        assert_eq!(recs, back);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{DIAGNOSTICS_HEADER}\n1,2,3,4,5,6\n1,2,x,4,5,6\n");
        match parse_diagnostics_csv(Path::new("f.csv"), &text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = format!("{DIAGNOSTICS_HEADER}\n1,2,3\n");
        assert!(matches!(
            parse_diagnostics_csv(Path::new("f.csv"), &short),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(parse_diagnostics_csv(Path::new("f"), "a,b\n").is_err());
        assert!(parse_diagnostics_csv(Path::new("f"), "").is_err());
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let g = Grid::new(8).unwrap();
        let f = PhysicalField::from_fn(&g, |x, y| [(x * 7.1).sin() + 1e-310, y.exp()]);
        let snap = Snapshot {
            t: 0.123456789,
            kind: FieldKind::Velocity,
            field: f,
        };
        let bytes = encode_snapshot(&snap);
        let back = decode_snapshot(Path::new("s"), &bytes).unwrap();
        assert_eq!(encode_snapshot(&back), bytes);
        assert_eq!(back.t.to_bits(), snap.t.to_bits());
    }

    #[test]
    fn corrupt_snapshot_rejected() {
        let g = Grid::new(8).unwrap();
        let snap = Snapshot {
            t: 0.0,
            kind: FieldKind::Velocity,
            field: PhysicalField::zeros(&g),
        };
        let bytes = encode_snapshot(&snap);
        assert!(decode_snapshot(Path::new("s"), &bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_snapshot(Path::new("s"), &bad).is_err());
    }

    #[test]
    fn sf_rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sf.csv");
        let rows_ = vec![
            SfRow { t: Some(0.5), r: 0.25, p: 2, value: 1.0 / 3.0 },
            SfRow { t: None, r: 0.25, p: 2, value: 2.0 / 3.0 },
        ];
        write_sf_csv(&p, &rows_).unwrap();
        assert_eq!(read_sf_csv(&p).unwrap(), rows_);
    }
}
