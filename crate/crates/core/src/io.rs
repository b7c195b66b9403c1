//! Text formats for solution snapshots and run configuration.
//!
//! `field1d`: a header `# field1d v1 k=<k> n=<n> t=<t>` then `n` rows
//! `x,c1,...,ck`.
//!
//! `field2d`: a header
//! `# field2d v1 nx=<nx> ny=<ny> xmin=<a> xmax=<b> ymin=<c> ymax=<d> t=<t>`
//! then one block per component: `ny` rows (bottom row first) of `nx`
//! space-separated values, blocks separated by a blank line.
//!
//! Numbers are written with 17 significant digits.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use crate::bench_suite::{problem_by_name, LawKind, Problem};
use crate::central_upwind::SpeedMode;
use crate::diagnostics::fmt_num;
use crate::driver::{SchemeKind, SchemeOptions};
use crate::error::{Error, Result};
use crate::incompressible::VelocityField;
use crate::limiters::LimiterKind;
use crate::mesh::{Field1D, Field2D};
use crate::reconstruct::Basis;
use crate::time_integration::Integrator;

pub const FORMAT_VERSION: &str = "v1";

/// Cell-centered 1D data as written to a `field1d` file.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1dData {
    pub t: f64,
    pub x: Vec<f64>,
    /// One row per cell, `k` values each.
    pub rows: Vec<Vec<f64>>,
}

impl Field1dData {
    pub fn k(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn from_field<const K: usize>(field: &Field1D<K>) -> Self {
        Field1dData {
            t: field.t,
            x: (0..field.n() as isize).map(|j| field.center(j)).collect(),
            rows: field.interior().iter().map(|u| u.iter().copied().collect()).collect(),
        }
    }

    pub fn column(&self, m: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[m]).collect()
    }
}

/// Cell-centered 2D data as written to a `field2d` file.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2dData {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub t: f64,
    /// One row-major `nx * ny` array per component, bottom row first.
    pub blocks: Vec<Vec<f64>>,
}

impl Field2dData {
    pub fn from_field<const K: usize>(field: &Field2D<K>) -> Self {
        let (nx, ny) = (field.grid.nx(), field.grid.ny());
        let blocks = (0..K)
            .map(|m| {
                (0..ny as isize)
                    .flat_map(|j| (0..nx as isize).map(move |i| (i, j)))
                    .map(|(i, j)| field.at(i, j)[m])
                    .collect()
            })
            .collect();
        Field2dData {
            nx,
            ny,
            x_range: (field.grid.x.x_min, field.grid.x.x_max),
            y_range: (field.grid.y.x_min, field.grid.y.x_max),
            t: field.t,
            blocks,
        }
    }

    /// Blocks `u`, `v` and vorticity.
    pub fn from_velocity(field: &VelocityField) -> Self {
        let n = field.grid.n;
        Field2dData {
            nx: n,
            ny: n,
            x_range: (0.0, field.grid.length),
            y_range: (0.0, field.grid.length),
            t: field.t,
            blocks: vec![field.u.clone(), field.v.clone(), field.vorticity()],
        }
    }
}

pub fn write_field1d(data: &Field1dData, mut w: impl Write) -> Result<()> {
    let k = data.k();
    writeln!(
        w,
        "# field1d {FORMAT_VERSION} k={k} n={} t={}",
        data.rows.len(),
        fmt_num(data.t)
    )?;
    for (x, row) in data.x.iter().zip(&data.rows) {
        let mut cols = vec![fmt_num(*x)];
        cols.extend(row.iter().map(|&v| fmt_num(v)));
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

pub fn write_field2d(data: &Field2dData, mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "# field2d {FORMAT_VERSION} nx={} ny={} xmin={} xmax={} ymin={} ymax={} t={}",
        data.nx,
        data.ny,
        fmt_num(data.x_range.0),
        fmt_num(data.x_range.1),
        fmt_num(data.y_range.0),
        fmt_num(data.y_range.1),
        fmt_num(data.t)
    )?;
    for (b, block) in data.blocks.iter().enumerate() {
        if b > 0 {
            writeln!(w)?;
        }
        for row in block.chunks(data.nx) {
            let cols: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
            writeln!(w, "{}", cols.join(" "))?;
        }
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Splits a header into its `key=value` pairs after checking the magic
/// word and version.
fn parse_header(line: &str, kind: &str) -> Result<BTreeMap<String, String>> {
    let mut words = line.split_whitespace();
    if words.next() != Some("#") || words.next() != Some(kind) {
        return Err(parse_err(1, format!("expected a '# {kind}' header, got '{line}'")));
    }
    match words.next() {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(parse_err(1, format!("unsupported {kind} version '{v}'"))),
        None => return Err(parse_err(1, "missing format version")),
    }
    let mut map = BTreeMap::new();
    for w in words {
        let (key, value) = w
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("malformed header field '{w}'")))?;
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

fn header_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| parse_err(1, format!("header is missing '{key}'")))?;
    raw.parse()
        .map_err(|_| parse_err(1, format!("bad header value {key}={raw}")))
}

fn parse_numbers(line: &str, sep: char, lineno: usize) -> Result<Vec<f64>> {
    line.split(sep)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("not a number: '{s}'")))
        })
        .collect()
}

pub fn read_field1d(r: impl BufRead) -> Result<Field1dData> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))??;
    let map = parse_header(&header, "field1d")?;
    let k: usize = header_value(&map, "k")?;
    let n: usize = header_value(&map, "n")?;
    let t: f64 = header_value(&map, "t")?;
    let mut data = Field1dData {
        t,
        x: Vec::with_capacity(n),
        rows: Vec::with_capacity(n),
    };
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = parse_numbers(&line, ',', lineno)?;
        if vals.len() != k + 1 {
            return Err(parse_err(lineno, format!("expected {} columns, got {}", k + 1, vals.len())));
        }
        data.x.push(vals[0]);
        data.rows.push(vals[1..].to_vec());
    }
    if data.rows.len() != n {
        return Err(parse_err(1, format!("header says n={n}, found {} rows", data.rows.len())));
    }
    Ok(data)
}

pub fn read_field2d(r: impl BufRead) -> Result<Field2dData> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))??;
    let map = parse_header(&header, "field2d")?;
    let nx: usize = header_value(&map, "nx")?;
    let ny: usize = header_value(&map, "ny")?;
    let mut data = Field2dData {
        nx,
        ny,
        x_range: (header_value(&map, "xmin")?, header_value(&map, "xmax")?),
        y_range: (header_value(&map, "ymin")?, header_value(&map, "ymax")?),
        t: header_value(&map, "t")?,
        blocks: Vec::new(),
    };
    let mut current: Vec<f64> = Vec::new();
    let mut rows_in_block = 0usize;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            if rows_in_block > 0 {
                if rows_in_block != ny {
                    return Err(parse_err(lineno, format!("block has {rows_in_block} rows, expected {ny}")));
                }
                data.blocks.push(std::mem::take(&mut current));
                rows_in_block = 0;
            }
            continue;
        }
        let vals = parse_numbers(&line, ' ', lineno)?;
        if vals.len() != nx {
            return Err(parse_err(lineno, format!("expected {nx} values, got {}", vals.len())));
        }
        current.extend(vals);
        rows_in_block += 1;
    }
    if rows_in_block > 0 {
        if rows_in_block != ny {
            return Err(parse_err(0, format!("last block has {rows_in_block} rows, expected {ny}")));
        }
        data.blocks.push(current);
    }
    Ok(data)
}

/// `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(idx + 1, format!("expected key=value, got '{line}'")))?;
        map.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(map)
}

pub const LIMITER_NAMES: [&str; 4] = ["minmod", "minmod-theta", "va", "va-eps"];

pub const DEFAULT_MINMOD_THETA: f64 = 1.5;

/// Resolves a limiter name. `va-eps` without `eps` uses `Δx³`.
pub fn parse_limiter(name: &str, theta: Option<f64>, eps: Option<f64>, dx: f64) -> Result<LimiterKind> {
    let kind = match name {
        "minmod" | "minmod1" => LimiterKind::Minmod,
        "minmod-theta" => LimiterKind::MinmodTheta {
            theta: theta.unwrap_or(DEFAULT_MINMOD_THETA),
        },
        "va" | "van-albada" => LimiterKind::VanAlbada,
        "va-eps" => LimiterKind::VanAlbadaEps {
            eps: eps.unwrap_or(dx * dx * dx),
        },
        other => {
            return Err(Error::Config(format!(
                "unknown limiter '{other}'; valid limiters: {}",
                LIMITER_NAMES.join(", ")
            )))
        }
    };
    kind.validate()?;
    Ok(kind)
}

/// A run request as read from flags and config files. Unset fields fall
/// back to the problem's defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub scheme: Option<String>,
    pub limiter: Option<String>,
    pub theta: Option<f64>,
    pub eps: Option<f64>,
    pub cfl: Option<f64>,
    pub n: Option<usize>,
    pub ny: Option<usize>,
    pub t_end: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub snapshots: Vec<f64>,
    pub basis: Option<String>,
    pub speed_mode: Option<String>,
    pub integrator: Option<String>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: '{value}'")))
}

impl RunConfig {
    pub const KEYS: [&'static str; 14] = [
        "problem",
        "scheme",
        "limiter",
        "theta",
        "eps",
        "cfl",
        "n",
        "ny",
        "t_end",
        "out_dir",
        "snapshots",
        "basis",
        "speed_mode",
        "integrator",
    ];

    /// Sets one key. Later calls override earlier ones, so applying the
    /// file first and the flags second gives flags precedence.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.to_string(),
            "scheme" => self.scheme = Some(value.to_string()),
            "limiter" => self.limiter = Some(value.to_string()),
            "theta" => self.theta = Some(parse_value(key, value)?),
            "eps" => self.eps = Some(parse_value(key, value)?),
            "cfl" => self.cfl = Some(parse_value(key, value)?),
            "n" => self.n = Some(parse_value(key, value)?),
            "ny" => self.ny = Some(parse_value(key, value)?),
            "t_end" => self.t_end = Some(parse_value(key, value)?),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "snapshots" => {
                self.snapshots = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_value(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "basis" => self.basis = Some(value.to_string()),
            "speed_mode" => self.speed_mode = Some(value.to_string()),
            "integrator" => self.integrator = Some(value.to_string()),
            other => {
                return Err(Error::Config(format!(
                    "unknown config key '{other}'; valid keys: {}",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn apply_map(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        map.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Checks every field and fills in problem defaults.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        if self.problem.is_empty() {
            return Err(Error::Config("no problem given".into()));
        }
        let problem = problem_by_name(&self.problem)?;
        let scheme = match &self.scheme {
            Some(s) => SchemeKind::parse(s)?,
            None => problem.default_scheme,
        };
        let n = self.n.unwrap_or(problem.n);
        let ny = match problem.law {
            LawKind::Euler2d | LawKind::Incompressible => Some(self.ny.or(problem.ny).unwrap_or(n)),
            _ => None,
        };
        if problem.law == LawKind::Incompressible && ny != Some(n) {
            return Err(Error::Config("the shear layer needs a square grid (ny = n)".into()));
        }
        let dx = (problem.x_range.1 - problem.x_range.0) / n.max(1) as f64;
        let limiter = parse_limiter(self.limiter.as_deref().unwrap_or("va"), self.theta, self.eps, dx)?;
        let mut opts = SchemeOptions::new(scheme, limiter).with_cfl(self.cfl.unwrap_or(problem.cfl_for(scheme)));
        if let Some(b) = &self.basis {
            opts.basis = match b.as_str() {
                "characteristic" => Basis::Characteristic,
                "componentwise" => Basis::Componentwise,
                other => {
                    return Err(Error::Config(format!(
                        "unknown basis '{other}'; valid: characteristic, componentwise"
                    )))
                }
            };
        }
        if let Some(m) = &self.speed_mode {
            opts.speed_mode = match m.as_str() {
                "knp" => SpeedMode::Knp,
                "kt" => SpeedMode::Kt,
                other => return Err(Error::Config(format!("unknown speed mode '{other}'; valid: knp, kt"))),
            };
        }
        if let Some(i) = &self.integrator {
            opts.integrator = match i.as_str() {
                "ssprk3" => Integrator::SspRk3,
                "euler" => Integrator::ForwardEuler,
                other => return Err(Error::Config(format!("unknown integrator '{other}'; valid: ssprk3, euler"))),
            };
        }
        opts.validate()?;
        if problem.law == LawKind::Euler2d && scheme != SchemeKind::Cu {
            return Err(Error::Config("2D problems use the cu scheme".into()));
        }
        if problem.law == LawKind::Incompressible && scheme != SchemeKind::Cu {
            return Err(Error::Config("the shear layer uses the cu scheme".into()));
        }
        let t_end = self.t_end.unwrap_or(problem.t_end);
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be positive, got {t_end}")));
        }
        if let Some(&s) = self.snapshots.iter().find(|&&s| !(s > 0.0 && s <= t_end)) {
            return Err(Error::Parameter(format!("snapshot time {s} lies outside (0, {t_end}]")));
        }
        if n < 4 {
            return Err(Error::Parameter(format!("n must be at least 4, got {n}")));
        }
        Ok(ResolvedRun {
            problem,
            opts,
            n,
            ny,
            t_end,
            snapshots: self.snapshots.clone(),
        })
    }
}

/// A fully validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedRun {
    pub problem: Problem,
    pub opts: SchemeOptions,
    pub n: usize,
    pub ny: Option<usize>,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
}

impl ResolvedRun {
    /// `<problem>_<scheme>_<limiter>`.
    pub fn stem(&self) -> String {
        format!(
            "{}_{}_{}",
            self.problem.name,
            self.opts.scheme.short_name(),
            self.opts.limiter.short_name()
        )
    }
}
