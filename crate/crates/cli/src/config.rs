//! Run configuration and its flat `key=value` file format.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! `RunConfig::from_text(&cfg.to_text())` reproduces `cfg` exactly.

use cpm_schwarz::experiment::{Forcing, CIRCLE_SPACINGS, MOBIUS_SPACINGS};
use cpm_schwarz::schwarz::Interface;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
}

/// A length given either absolutely or as a multiple of the curve length (`0.1L`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Absolute(f64),
    Relative(f64),
}

impl Length {
    pub fn resolve(self, curve_length: f64) -> f64 {
        match self {
            Length::Absolute(v) => v,
            Length::Relative(f) => f * curve_length,
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Absolute(v) => write!(f, "{v:?}"),
            Length::Relative(v) => write!(f, "{v:?}L"),
        }
    }
}

impl FromStr for Length {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.strip_suffix('L') {
            Some(v) => parse_f64(v).map(Length::Relative),
            None => parse_f64(s).map(Length::Absolute),
        }
    }
}

/// Linear solver for the single-domain system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    #[default]
    Direct,
    Gmres,
}

impl LinearSolver {
    pub fn name(self) -> &'static str {
        match self {
            LinearSolver::Direct => "direct",
            LinearSolver::Gmres => "gmres",
        }
    }
}

impl FromStr for LinearSolver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(LinearSolver::Direct),
            "gmres" => Ok(LinearSolver::Gmres),
            _ => Err("expected direct or gmres".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curve: String,
    pub h: f64,
    pub degree: usize,
    pub c: f64,
    pub forcing: Forcing,
    /// Arclength fractions of the two disjoint subdomains.
    pub split: [f64; 2],
    pub overlap: [Length; 2],
    /// Tolerance of the iterative single-domain solver.
    pub inner_tol: f64,
    /// Absolute RAS stopping tolerance on the max-norm error.
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
    /// Grid spacings of the experiments.
    pub hs: Vec<f64>,
    /// Overlaps of the sweeps.
    pub deltas: Vec<Length>,
    pub interface: Interface,
    pub solver: LinearSolver,
    /// Number of uniform arclength samples written by `solve`.
    pub samples: usize,
}

pub const KEYS: [&str; 16] = [
    "curve", "h", "degree", "c", "f", "split", "overlap", "inner_tol", "tol", "max_iter", "out", "hs", "deltas",
    "interface", "solver", "samples",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curve: "circle".into(),
            h: 0.05,
            degree: 4,
            c: 1.0,
            forcing: Forcing::SinMode(1),
            split: [0.5, 0.5],
            overlap: [Length::Relative(0.1); 2],
            inner_tol: 1e-12,
            tol: 1e-10,
            max_iter: 200,
            out: PathBuf::from("out"),
            hs: MOBIUS_SPACINGS.to_vec(),
            deltas: (1..=10).map(|k| Length::Relative(0.02 * k as f64)).collect(),
            interface: Interface::Algebraic,
            solver: LinearSolver::Direct,
            samples: 256,
        }
    }
}

impl RunConfig {
    /// Moebius-boundary study: 1:2 split, `h` in {0.05, 0.02, 0.01}.
    pub fn mobius() -> Self {
        Self {
            curve: "mobius-boundary".into(),
            h: 0.01,
            split: [1.0 / 3.0, 2.0 / 3.0],
            hs: MOBIUS_SPACINGS.to_vec(),
            ..Self::default()
        }
    }

    /// Overlap sweep on the unit circle with an equal split.
    pub fn circle_overlap() -> Self {
        Self { hs: CIRCLE_SPACINGS.to_vec(), ..Self::default() }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let bad = |reason: String| ConfigError::InvalidValue { key: key.into(), value: v.into(), reason };
        match key {
            "curve" => self.curve = v.to_string(),
            "h" => self.h = parse_f64(v).map_err(bad)?,
            "degree" => self.degree = v.parse().map_err(|e| bad(format!("{e}")))?,
            "c" => self.c = parse_f64(v).map_err(bad)?,
            "f" => self.forcing = v.parse().map_err(|e| bad(format!("{e}")))?,
            "split" => self.split = parse_split(v).map_err(bad)?,
            "overlap" => self.overlap = parse_overlap(v).map_err(bad)?,
            "inner_tol" => self.inner_tol = parse_f64(v).map_err(bad)?,
            "tol" => self.tol = parse_f64(v).map_err(bad)?,
            "max_iter" => self.max_iter = v.parse().map_err(|e| bad(format!("{e}")))?,
            "out" => self.out = PathBuf::from(v),
            "hs" => self.hs = parse_list(v, parse_f64).map_err(bad)?,
            "deltas" => self.deltas = parse_list(v, str::parse).map_err(bad)?,
            "interface" => self.interface = v.parse().map_err(|e| bad(format!("{e}")))?,
            "solver" => self.solver = v.parse().map_err(bad)?,
            "samples" => self.samples = v.parse().map_err(|e| bad(format!("{e}")))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let join = |items: Vec<String>| items.join(",");
        Some(match key {
            "curve" => self.curve.clone(),
            "h" => format!("{:?}", self.h),
            "degree" => self.degree.to_string(),
            "c" => format!("{:?}", self.c),
            "f" => self.forcing.to_string(),
            "split" => format!("{:?},{:?}", self.split[0], self.split[1]),
            "overlap" => format!("{},{}", self.overlap[0], self.overlap[1]),
            "inner_tol" => format!("{:?}", self.inner_tol),
            "tol" => format!("{:?}", self.tol),
            "max_iter" => self.max_iter.to_string(),
            "out" => self.out.display().to_string(),
            "hs" => join(self.hs.iter().map(|h| format!("{h:?}")).collect()),
            "deltas" => join(self.deltas.iter().map(Length::to_string).collect()),
            "interface" => self.interface.name().to_string(),
            "solver" => self.solver.name().to_string(),
            "samples" => self.samples.to_string(),
            _ => return None,
        })
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored; a later key overrides an earlier one.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: k + 1, text: line.to_string() })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), reason: e.to_string() })?;
        self.apply_text(&text)
    }

    pub fn to_text(&self) -> String {
        KEYS.iter().map(|k| format!("{k}={}\n", self.get(k).unwrap_or_default())).collect()
    }

    /// Overlaps resolved against the curve length.
    pub fn overlaps(&self, curve_length: f64) -> [f64; 2] {
        [self.overlap[0].resolve(curve_length), self.overlap[1].resolve(curve_length)]
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("{e}"))
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| item(x.trim())).collect()
}

/// `f1,f2` fractions, a single `f1` (with `f2 = 1 - f1`) or an `m:n` ratio.
fn parse_split(s: &str) -> Result<[f64; 2], String> {
    if let Some((m, n)) = s.split_once(':') {
        let (m, n) = (parse_f64(m)?, parse_f64(n)?);
        return Ok([m / (m + n), n / (m + n)]);
    }
    match parse_list(s, parse_f64)?.as_slice() {
        [f] => Ok([*f, 1.0 - f]),
        [f1, f2] => Ok([*f1, *f2]),
        _ => Err("expected f1,f2 or m:n".into()),
    }
}

/// One overlap used for both interfaces, or a `d1,d2` pair.
fn parse_overlap(s: &str) -> Result<[Length; 2], String> {
    match parse_list(s, str::parse::<Length>)?.as_slice() {
        [d] => Ok([*d, *d]),
        [d1, d2] => Ok([*d1, *d2]),
        _ => Err("expected one or two lengths".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_text_round_trips() {
        for cfg in [RunConfig::default(), RunConfig::mobius(), RunConfig::circle_overlap()] {
            assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        }
    }

    #[test]
    fn comments_blank_lines_and_overrides() {
        let text = "# study\n\nh = 0.02\ncurve=mobius-boundary\n  # indented comment\nh=0.01\n";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.h, 0.01);
        assert_eq!(cfg.curve, "mobius-boundary");
    }

    #[test]
    fn split_and_overlap_forms() {
        let mut cfg = RunConfig::default();
        cfg.set("split", "1:2").unwrap();
        assert_eq!(cfg.split, [1.0 / 3.0, 2.0 / 3.0]);
        cfg.set("split", "0.25").unwrap();
        assert_eq!(cfg.split, [0.25, 0.75]);
        cfg.set("overlap", "0.5").unwrap();
        assert_eq!(cfg.overlap, [Length::Absolute(0.5); 2]);
        cfg.set("overlap", "0.1L, 0.3").unwrap();
        assert_eq!(cfg.overlap, [Length::Relative(0.1), Length::Absolute(0.3)]);
        assert_eq!(cfg.overlaps(10.0), [1.0, 0.3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::from_text("h"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::from_text("colour=red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RunConfig::from_text("h=small"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(RunConfig::from_text("f=cos"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(RunConfig::from_text("overlap=1,2,3"), Err(ConfigError::InvalidValue { .. })));
    }
}
