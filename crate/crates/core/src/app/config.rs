//! Run configuration: defaults, the key=value config file and overrides.
//!
//! ```text
//! # trap
//! n = 10000
//! mass-amu = 23
//! omega-hz = 21
//! lambda = 32
//! z1-grid = 0:8:0.1
//! ```

use super::AppError;
use crate::spectrum::{BracketRefinement, SolverSettings, TrapConfig, AMU};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Evenly spaced grid start, start + step, …, stop (inclusive).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, String> {
        let g = Grid { start, stop, step };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if !(self.step > 0.0) || self.stop < self.start {
            return Err(format!(
                "grid needs step > 0 and stop >= start (got {}:{}:{})",
                self.start, self.stop, self.step
            ));
        }
        if self.len() > 10_000_000 {
            return Err("grid has more than 10^7 points".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points as start + i·step, so every run produces the same bits.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }

    /// `start:stop:step`
    pub fn parse(s: &str) -> Result<Grid, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|_| format!("bad number {p:?} in grid {s:?}"));
        Grid::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    CsvSvg,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "csv+svg" => Ok(OutputFormat::CsvSvg),
            _ => Err(format!("format must be csv or csv+svg, got {s:?}")),
        }
    }

    pub fn svg(self) -> bool {
        self == OutputFormat::CsvSvg
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trap: TrapConfig,
    /// Dimple strength for Figs. 1–4 and the single-point commands.
    pub lambda: f64,
    /// Dimple position for the single-point commands.
    pub z1: f64,
    /// Temperature of the single-point commands, in units of T_c⁰.
    pub t_ratio: f64,
    pub fig5_lambda: f64,
    pub fig5_z1: f64,
    /// z₁ sweep of Figs. 1 and 4.
    pub z1_grid: Grid,
    /// T/T_c⁰ sweep of Figs. 2 and 3.
    pub t_grid: Grid,
    /// Position grid of density profiles.
    pub z_grid: Grid,
    pub solver: SolverSettings,
    /// Levels per spectrum; defaults to M2.
    pub levels: Option<usize>,
    /// Multiply densities by N₀ at `t_ratio`.
    pub scale_n0: bool,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trap: TrapConfig::default(),
            lambda: 32.0,
            z1: 0.0,
            t_ratio: 0.5,
            fig5_lambda: 3.6,
            fig5_z1: 1.0,
            z1_grid: Grid { start: 0.0, stop: 8.0, step: 0.1 },
            t_grid: Grid { start: 0.02, stop: 1.5, step: 0.02 },
            z_grid: Grid { start: -6.0, stop: 6.0, step: 0.01 },
            solver: SolverSettings::default(),
            levels: None,
            scale_n0: false,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn levels(&self) -> usize {
        self.levels.unwrap_or(self.solver.perturbative_levels)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |msg: String| Err(AppError::Config { location: "config".into(), msg });
        if let Err(e) = self.trap.validate() {
            return bad(e.to_string());
        }
        if let Err(e) = self.solver.validate() {
            return bad(e.to_string());
        }
        for (name, v) in
            [("lambda", self.lambda), ("z1", self.z1), ("fig5-lambda", self.fig5_lambda), ("fig5-z1", self.fig5_z1)]
        {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.t_ratio > 0.0 && self.t_ratio.is_finite()) {
            return bad(format!("t-ratio must be positive, got {}", self.t_ratio));
        }
        if !(self.t_grid.start > 0.0) {
            return bad("t-grid must start above zero".into());
        }
        if self.levels() < 2 {
            return bad("levels must be at least 2".into());
        }
        if self.trap.n_particles < 2 {
            return bad("n must be at least 2".into());
        }
        Ok(())
    }

    /// Hash of every setting that changes computed numbers (not the output
    /// location or format).
    pub fn digest(&self) -> String {
        let mut s = String::new();
        let bits = |x: f64| format!("{:016x}", x.to_bits());
        let grid = |g: &Grid| format!("{}:{}:{}", bits(g.start), bits(g.stop), bits(g.step));
        let _ = write!(
            s,
            "mass={};omega={};n={};hbar={};kb={};lambda={};z1={};t={};f5l={};f5z={};z1g={};tg={};zg={};solver={};levels={};n0={}",
            bits(self.trap.mass),
            bits(self.trap.omega),
            self.trap.n_particles,
            bits(self.trap.hbar),
            bits(self.trap.k_b),
            bits(self.lambda),
            bits(self.z1),
            bits(self.t_ratio),
            bits(self.fig5_lambda),
            bits(self.fig5_z1),
            grid(&self.z1_grid),
            grid(&self.t_grid),
            grid(&self.z_grid),
            self.solver.digest(),
            self.levels(),
            self.scale_n0
        );
        hex::encode(&Sha256::digest(s.as_bytes())[..8])
    }

    /// Human-readable resolved settings, one `key = value` per line; reads
    /// back through [`ConfigPatch::parse`].
    pub fn to_config_text(&self) -> String {
        let g = |g: &Grid| format!("{}:{}:{}", g.start, g.stop, g.step);
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.trap.n_particles);
        let _ = writeln!(s, "mass-amu = {}", self.trap.mass / AMU);
        let _ = writeln!(s, "omega-hz = {}", self.trap.omega / (2.0 * PI));
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "z1 = {}", self.z1);
        let _ = writeln!(s, "t-ratio = {}", self.t_ratio);
        let _ = writeln!(s, "fig5-lambda = {}", self.fig5_lambda);
        let _ = writeln!(s, "fig5-z1 = {}", self.fig5_z1);
        let _ = writeln!(s, "z1-grid = {}", g(&self.z1_grid));
        let _ = writeln!(s, "t-grid = {}", g(&self.t_grid));
        let _ = writeln!(s, "z-grid = {}", g(&self.z_grid));
        let _ = writeln!(s, "m1 = {}", self.solver.exact_levels);
        let _ = writeln!(s, "m2 = {}", self.solver.perturbative_levels);
        let _ = writeln!(s, "root-tol = {}", self.solver.root_tol);
        let _ = writeln!(s, "refine = {}", self.solver.bracket_refinement);
        let _ = writeln!(s, "levels = {}", self.levels());
        let _ = writeln!(s, "scale-n0 = {}", self.scale_n0);
        s
    }
}

/// Optional overrides, from a config file or command-line flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigPatch {
    pub n: Option<u64>,
    pub mass_amu: Option<f64>,
    pub omega_hz: Option<f64>,
    pub lambda: Option<f64>,
    pub z1: Option<f64>,
    pub t_ratio: Option<f64>,
    pub fig5_lambda: Option<f64>,
    pub fig5_z1: Option<f64>,
    pub z1_grid: Option<Grid>,
    pub t_grid: Option<Grid>,
    pub z_grid: Option<Grid>,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub root_tol: Option<f64>,
    pub refine: Option<BracketRefinement>,
    pub levels: Option<usize>,
    pub scale_n0: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

pub fn parse_refinement(s: &str) -> Result<BracketRefinement, String> {
    match s {
        "brent" => Ok(BracketRefinement::Brent),
        "bisection" => Ok(BracketRefinement::Bisection),
        _ => Err(format!("refine must be brent or bisection, got {s:?}")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?} as a number"))
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = parse_num(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{v:?} is not finite"))
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

impl ConfigPatch {
    /// Parse config text; `source` names the file in error messages.
    pub fn parse(text: &str, source: &str) -> Result<ConfigPatch, AppError> {
        let mut patch = ConfigPatch::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| AppError::Config { location: format!("{source}:{line}"), msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("missing value for {key}")));
            }
            patch.set(key, value).map_err(err)?;
        }
        Ok(patch)
    }

    pub fn from_file(path: &Path) -> Result<ConfigPatch, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        ConfigPatch::parse(&text, &path.display().to_string())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "n" => self.n = Some(parse_num(v)?),
            "mass-amu" => self.mass_amu = Some(parse_f64(v)?),
            "omega-hz" => self.omega_hz = Some(parse_f64(v)?),
            "lambda" => self.lambda = Some(parse_f64(v)?),
            "z1" => self.z1 = Some(parse_f64(v)?),
            "t-ratio" => self.t_ratio = Some(parse_f64(v)?),
            "fig5-lambda" => self.fig5_lambda = Some(parse_f64(v)?),
            "fig5-z1" => self.fig5_z1 = Some(parse_f64(v)?),
            "z1-grid" => self.z1_grid = Some(Grid::parse(v)?),
            "t-grid" => self.t_grid = Some(Grid::parse(v)?),
            "z-grid" => self.z_grid = Some(Grid::parse(v)?),
            "m1" => self.m1 = Some(parse_num(v)?),
            "m2" => self.m2 = Some(parse_num(v)?),
            "root-tol" => self.root_tol = Some(parse_f64(v)?),
            "refine" => self.refine = Some(parse_refinement(v)?),
            "levels" => self.levels = Some(parse_num(v)?),
            "scale-n0" => self.scale_n0 = Some(parse_bool(v)?),
            "out-dir" => self.out_dir = Some(PathBuf::from(v)),
            "format" => self.format = Some(OutputFormat::parse(v)?),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Apply on top of `cfg`; set fields win.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), AppError> {
        let mass_amu = self.mass_amu.unwrap_or(cfg.trap.mass / AMU);
        let omega = self.omega_hz.map(|f| 2.0 * PI * f).unwrap_or(cfg.trap.omega);
        let n = self.n.unwrap_or(cfg.trap.n_particles);
        if self.mass_amu.is_some() || self.omega_hz.is_some() || self.n.is_some() {
            cfg.trap = TrapConfig::new(mass_amu * AMU, omega, n)
                .map_err(|e| AppError::Config { location: "trap".into(), msg: e.to_string() })?;
        }
        macro_rules! take {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        take!(
            lambda => cfg.lambda,
            z1 => cfg.z1,
            t_ratio => cfg.t_ratio,
            fig5_lambda => cfg.fig5_lambda,
            fig5_z1 => cfg.fig5_z1,
            z1_grid => cfg.z1_grid,
            t_grid => cfg.t_grid,
            z_grid => cfg.z_grid,
            m1 => cfg.solver.exact_levels,
            m2 => cfg.solver.perturbative_levels,
            root_tol => cfg.solver.root_tol,
            refine => cfg.solver.bracket_refinement,
            scale_n0 => cfg.scale_n0,
            out_dir => cfg.out_dir,
            format => cfg.format,
        );
        if let Some(l) = self.levels {
            cfg.levels = Some(l);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_have_the_documented_sizes() {
        let c = RunConfig::default();
        assert_eq!(c.z1_grid.len(), 81);
        assert_eq!(c.t_grid.len(), 75);
        assert_eq!(c.z_grid.len(), 1201);
        assert_eq!(c.z1_grid.points()[80], 8.0);
        assert_eq!(c.levels(), 8192);
    }

    #[test]
    fn parses_and_applies() {
        let text =
            "# comment\nn = 500\nlambda=3.5 # trailing\n\nz1-grid = 0:2:0.5\nformat = csv+svg\nrefine = bisection\n";
        let p = ConfigPatch::parse(text, "x.conf").unwrap();
        let mut c = RunConfig::default();
        p.apply(&mut c).unwrap();
        assert_eq!(c.trap.n_particles, 500);
        assert_eq!(c.lambda, 3.5);
        assert_eq!(c.z1_grid.points(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(c.format.svg());
        assert_eq!(c.solver.bracket_refinement, BracketRefinement::Bisection);
    }

    #[test]
    fn errors_carry_location() {
        let e = ConfigPatch::parse("n = 5\nbogus = 1\n", "run.conf").unwrap_err();
        assert_eq!(e.to_string(), "run.conf:2: unknown key \"bogus\"");
        let e = ConfigPatch::parse("lambda\n", "a").unwrap_err();
        assert!(e.to_string().starts_with("a:1:"));
        assert!(ConfigPatch::parse("z1-grid = 1:0:0.1\n", "a").is_err());
        assert!(ConfigPatch::parse("lambda = nan\n", "a").is_err());
    }

    #[test]
    fn resolved_text_round_trips() {
        let mut c = RunConfig::default();
        c.lambda = 7.25;
        c.levels = Some(300);
        let mut back = RunConfig::default();
        ConfigPatch::parse(&c.to_config_text(), "t").unwrap().apply(&mut back).unwrap();
        assert_eq!(back.digest(), c.digest());
    }

    #[test]
    fn digest_ignores_output_location() {
        let a = RunConfig::default();
        let b = RunConfig { out_dir: "elsewhere".into(), format: OutputFormat::CsvSvg, ..RunConfig::default() };
        assert_eq!(a.digest(), b.digest());
        let c = RunConfig { lambda: 31.0, ..RunConfig::default() };
        assert_ne!(a.digest(), c.digest());
    }
}
