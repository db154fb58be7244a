//! Metric parsing, trajectory export, grid sweeps and run configuration.
//!
//! Floats are written as the shortest decimal that parses back to the same
//! bits, so exported files reparse exactly and re-export byte for byte.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ancient_form_metric;
use crate::error::{Error, Result};
use crate::flow::FlowKind;
use crate::geometry::{scalar_curvature, MetricParams, ModelParams};
use crate::integrator::{integrate, Direction, IntegratorConfig, TerminalKind, Trajectory};

/// Parses `"x,y,z,s"` or `"slice:x,y,z"` (volume one, `s` filled in).
pub fn parse_metric(text: &str, p: &ModelParams) -> Result<MetricParams> {
    let text = text.trim();
    let (slice, body) = match text.strip_prefix("slice:") {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let mut values = Vec::new();
    for token in body.split(',') {
        let token = token.trim();
        let v: f64 = token
            .parse()
            .map_err(|e: std::num::ParseFloatError| Error::parse(token, e.to_string()))?;
        values.push(v);
    }
    let expected = if slice { 3 } else { 4 };
    if values.len() != expected {
        let form = if slice { "slice:x,y,z" } else { "x,y,z,s" };
        return Err(Error::parse(text, format!("expected {expected} comma-separated numbers ({form})")));
    }
    if slice {
        MetricParams::from_slice(values[0], values[1], values[2], p)
    } else {
        MetricParams::new(values[0], values[1], values[2], values[3])
    }
}

/// Shortest round-trip decimal.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub const CSV_HEADER: [&str; 15] = [
    "t", "x", "y", "z", "s", "S", "r_i", "r_j", "r_k", "r_h", "ric0_sq", "vol", "x_over_z", "y_over_z",
    "y_over_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::parse(s, "expected 'csv' or 'json'")),
        }
    }
}

/// One CSV row, in [`CSV_HEADER`] order.
pub fn trajectory_rows(traj: &Trajectory) -> Vec<[f64; 15]> {
    traj.samples
        .iter()
        .map(|s| {
            let d = &s.diagnostics;
            let r = d.ricci;
            [
                s.t, s.metric.x, s.metric.y, s.metric.z, s.metric.s, d.scalar, r.r_i, r.r_j, r.r_k, r.r_h,
                d.ric0_sq, d.volume, d.x_over_z, d.y_over_z, d.y_over_s,
            ]
        })
        .collect()
}

pub fn write_rows_csv<W: Write>(rows: &[[f64; 15]], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for row in rows {
        wr.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    write_rows_csv(&trajectory_rows(traj), w)
}

/// Reads rows written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Vec<[f64; 15]>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse(header.as_slice(), "unexpected trajectory header"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 15 {
            return Err(Error::parse(rec.as_slice(), "expected 15 fields"));
        }
        let mut row = [0.0; 15];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::parse(field, e.to_string()))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_trajectory_json<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, traj)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_trajectory_json<R: Read>(r: R) -> Result<Trajectory> {
    Ok(serde_json::from_reader(r)?)
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => write_trajectory_csv(traj, w),
        Format::Json => write_trajectory_json(traj, w),
    }
}

pub fn export_trajectory(traj: &Trajectory, format: Format, out: &Path) -> Result<()> {
    let file = std::fs::File::create(out)?;
    let mut buf = std::io::BufWriter::new(file);
    write_trajectory(traj, format, &mut buf)?;
    buf.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Grids and sweeps.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let a = Axis {
            name: name.to_string(),
            min,
            max,
            count,
            spacing,
        };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::parse(&self.name, "axis count must be at least 2"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::parse(&self.name, "axis needs finite min < max"));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::parse(&self.name, "log spacing needs min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == self.count - 1 {
                    return self.max;
                }
                let f = k as f64 / last;
                match self.spacing {
                    Spacing::Lin => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    /// `name:min:max:count[:lin|log]`.
    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if !(parts.len() == 4 || parts.len() == 5) {
            return Err(Error::parse(text, "expected name:min:max:count[:lin|log]"));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse()
                .map_err(|e: std::num::ParseFloatError| Error::parse(t, e.to_string()))
        };
        let count: usize = parts[3]
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::parse(parts[3], e.to_string()))?;
        let spacing = match parts.get(4).copied().unwrap_or("lin") {
            "lin" => Spacing::Lin,
            "log" => Spacing::Log,
            other => return Err(Error::parse(other, "spacing must be lin or log")),
        };
        Axis::new(parts[0], num(parts[1])?, num(parts[2])?, count, spacing)
    }
}

/// Coordinates a grid is laid out in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    /// `(s, y/s)` with `x = 1/(y^2 s^{4n})`, `z = y`.
    AncientForm,
    /// Volume-one slice `(x, y, z)`.
    Slice,
    /// Volume-one slice with `y = z`, axes `(x, y)`.
    SliceYEqualsZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub plane: Plane,
    pub axes: Vec<Axis>,
}

impl GridSpec {
    /// Infers the plane from the axis names: `s, ys` or `x, y, z` or `x, y`.
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
        let plane = match names.as_slice() {
            ["s", "ys"] => Plane::AncientForm,
            ["x", "y", "z"] => Plane::Slice,
            ["x", "y"] => Plane::SliceYEqualsZ,
            _ => {
                return Err(Error::parse(
                    names.join(","),
                    "axes must be (s, ys), (x, y, z) or (x, y) in that order",
                ))
            }
        };
        Ok(GridSpec { plane, axes })
    }

    /// Grid points in row-major order (first axis outermost).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for vals in &values {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn metric_at(&self, coords: &[f64], p: &ModelParams) -> Result<MetricParams> {
        match self.plane {
            Plane::AncientForm => ancient_form_metric(coords[1] * coords[0], coords[0], p),
            Plane::Slice => MetricParams::from_slice(coords[0], coords[1], coords[2], p),
            Plane::SliceYEqualsZ => MetricParams::from_slice(coords[0], coords[1], coords[1], p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitRow {
    pub index: usize,
    pub coords: Vec<f64>,
    pub metric: Option<MetricParams>,
    pub scalar: Option<f64>,
    pub forward: Option<TerminalKind>,
    pub forward_t_end: Option<f64>,
    pub backward: Option<TerminalKind>,
    pub backward_t_end: Option<f64>,
    pub ys_limit: Option<f64>,
    pub error: Option<String>,
}

fn portrait_point(index: usize, coords: Vec<f64>, grid: &GridSpec, p: &ModelParams, cfg: &IntegratorConfig) -> PortraitRow {
    let mut row = PortraitRow {
        index,
        coords,
        metric: None,
        scalar: None,
        forward: None,
        forward_t_end: None,
        backward: None,
        backward_t_end: None,
        ys_limit: None,
        error: None,
    };
    let mut errors = Vec::new();
    let m = match grid.metric_at(&row.coords, p) {
        Ok(m) => m,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.metric = Some(m);
    row.scalar = scalar_curvature(&m, p).ok();
    let mut run_cfg = cfg.clone();
    run_cfg.dense_output = false;
    run_cfg.samples_per_step = 1;
    match integrate(FlowKind::Normalized, &m, Direction::Forward, p, &run_cfg) {
        Ok(t) => {
            row.forward = Some(t.terminal.kind);
            row.forward_t_end = Some(t.terminal.t_end);
        }
        Err(e) => errors.push(format!("forward: {e}")),
    }
    match integrate(FlowKind::Normalized, &m, Direction::Backward, p, &run_cfg) {
        Ok(t) => {
            row.backward = Some(t.terminal.kind);
            row.backward_t_end = Some(t.terminal.t_end);
            if let TerminalKind::BackwardCollapse { ratio_limit } = t.terminal.kind {
                row.ys_limit = Some(ratio_limit);
            }
        }
        Err(e) => errors.push(format!("backward: {e}")),
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

/// Thread cap from `RSF_THREADS`; `0` or unset means automatic.
pub fn thread_cap() -> Result<usize> {
    match std::env::var("RSF_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::parse(v.clone(), e.to_string())),
        _ => Ok(0),
    }
}

/// Classifies every grid point forward and backward. Rows come back in
/// row-major order whatever the completion order; failures stay in-row.
pub fn portrait(grid: &GridSpec, p: &ModelParams, cfg: &IntegratorConfig) -> Result<Vec<PortraitRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let points = grid.points();
    Ok(pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(i, c)| portrait_point(i, c, grid, p, cfg))
            .collect()
    }))
}

pub fn portrait_header(grid: &GridSpec) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    h.extend(grid.axes.iter().map(|a| a.name.clone()));
    h.extend(PORTRAIT_COLUMNS.iter().map(|c| c.to_string()));
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

const PORTRAIT_COLUMNS: [&str; 11] = [
    "x", "y", "z", "s", "S", "forward", "forward_t_end", "backward", "backward_t_end", "ys_limit", "error",
];

pub fn write_portrait_csv<W: Write>(grid: &GridSpec, rows: &[PortraitRow], w: W) -> Result<()> {
    let names: Vec<String> = grid.axes.iter().map(|a| a.name.clone()).collect();
    write_portrait_rows_csv(&names, rows, w)
}

/// Portrait CSV with the given coordinate column names.
pub fn write_portrait_rows_csv<W: Write>(axis_names: &[String], rows: &[PortraitRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["index".to_string()];
    header.extend(axis_names.iter().cloned());
    header.extend(PORTRAIT_COLUMNS.iter().map(|c| c.to_string()));
    wr.write_record(header)?;
    for r in rows {
        let mut rec = vec![r.index.to_string()];
        rec.extend(r.coords.iter().map(|v| fmt_f64(*v)));
        let g = r.metric.map(|m| m.to_array());
        for k in 0..4 {
            rec.push(opt(g.map(|g| g[k])));
        }
        rec.push(opt(r.scalar));
        rec.push(r.forward.map(|k| k.label().to_string()).unwrap_or_default());
        rec.push(opt(r.forward_t_end));
        rec.push(r.backward.map(|k| k.label().to_string()).unwrap_or_default());
        rec.push(opt(r.backward_t_end));
        rec.push(opt(r.ys_limit));
        rec.push(r.error.clone().unwrap_or_default());
        wr.write_record(rec)?;
    }
    wr.flush()?;
    Ok(())
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|e: std::num::ParseFloatError| Error::parse(field, e.to_string()))
}

fn parse_kind(label: &str, ys_limit: Option<f64>) -> Result<Option<TerminalKind>> {
    Ok(Some(match label {
        "" => return Ok(None),
        "ConvergedRound" => TerminalKind::ConvergedRound,
        "ConvergedJensen" => TerminalKind::ConvergedJensen,
        "ForwardBlowup" => TerminalKind::ForwardBlowup,
        "BackwardSingularity" => TerminalKind::BackwardSingularity,
        "HorizonReached" => TerminalKind::HorizonReached,
        "BackwardCollapse" => TerminalKind::BackwardCollapse {
            ratio_limit: ys_limit.ok_or_else(|| Error::parse(label, "collapse row without ys_limit"))?,
        },
        other => return Err(Error::parse(other, "unknown terminal kind")),
    }))
}

/// Reads a portrait CSV back into its coordinate names and rows.
pub fn read_portrait_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<PortraitRow>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let ncoord = header.len().saturating_sub(1 + PORTRAIT_COLUMNS.len());
    if header.first().map(String::as_str) != Some("index")
        || header[1 + ncoord..].iter().ne(PORTRAIT_COLUMNS.iter())
    {
        return Err(Error::parse(header.join(","), "unexpected portrait header"));
    }
    let axis_names = header[1..1 + ncoord].to_vec();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::parse(rec.as_slice(), "wrong number of portrait fields"));
        }
        let f: Vec<&str> = rec.iter().collect();
        let index = f[0]
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::parse(f[0], e.to_string()))?;
        let coords = f[1..1 + ncoord]
            .iter()
            .map(|t| t.parse().map_err(|e: std::num::ParseFloatError| Error::parse(*t, e.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        let c = &f[1 + ncoord..];
        let g = [parse_opt(c[0])?, parse_opt(c[1])?, parse_opt(c[2])?, parse_opt(c[3])?];
        let metric = match g {
            [Some(x), Some(y), Some(z), Some(s)] => Some(MetricParams { x, y, z, s }),
            [None, None, None, None] => None,
            _ => return Err(Error::parse(rec.as_slice(), "partial metric")),
        };
        let ys_limit = parse_opt(c[9])?;
        rows.push(PortraitRow {
            index,
            coords,
            metric,
            scalar: parse_opt(c[4])?,
            forward: parse_kind(c[5], None)?,
            forward_t_end: parse_opt(c[6])?,
            backward: parse_kind(c[7], ys_limit)?,
            backward_t_end: parse_opt(c[8])?,
            ys_limit,
            error: (!c[10].is_empty()).then(|| c[10].to_string()),
        });
    }
    Ok((axis_names, rows))
}

#[derive(Serialize)]
struct PortraitTableRef<'a> {
    grid: &'a GridSpec,
    rows: &'a [PortraitRow],
}

/// A portrait as stored in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitTable {
    pub grid: GridSpec,
    pub rows: Vec<PortraitRow>,
}

pub fn write_portrait<W: Write>(grid: &GridSpec, rows: &[PortraitRow], format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => write_portrait_csv(grid, rows, w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &PortraitTableRef { grid, rows })?;
            w.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub fn read_portrait_json<R: Read>(r: R) -> Result<PortraitTable> {
    Ok(serde_json::from_reader(r)?)
}

// ---------------------------------------------------------------------------
// Run configuration.

/// Everything a CLI run needs. Loaded from an optional TOML file; flags win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub integrator: IntegratorConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1,
            integrator: IntegratorConfig::default(),
            out: None,
            format: Format::Csv,
            seed: 20_240_601,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.n)
    }
}
