//! The five figure pipelines and the files they write.

use super::output::{render_svg, FigureDataset};
use super::{AppError, Context, RunConfig};
use crate::density::{density_profile, ground_state};
use crate::spectrum::{DimpleSpec, Spectrum, SpectrumCache};
use crate::thermo::{solve_tc_reduced, solve_x_reduced};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Name of the spectrum cache directory inside the output directory.
pub const CACHE_DIR: &str = "spectrum-cache";

/// A resolved configuration plus the spectrum cache shared by all pipelines.
pub struct Session {
    pub cfg: RunConfig,
    pub cache: SpectrumCache,
}

impl Session {
    /// Cache persisted under the output directory.
    pub fn new(cfg: RunConfig) -> Result<Session, AppError> {
        cfg.validate()?;
        let cache = SpectrumCache::with_dir(cfg.out_dir.join(CACHE_DIR));
        Ok(Session { cfg, cache })
    }

    /// Memory-only cache.
    pub fn in_memory(cfg: RunConfig) -> Result<Session, AppError> {
        cfg.validate()?;
        Ok(Session { cfg, cache: SpectrumCache::new() })
    }

    pub fn spectrum(&self, lambda: f64, z1: f64) -> Result<Arc<Spectrum>, AppError> {
        let ctx = || format!("spectrum for lambda={lambda}, z1={z1}");
        let d = DimpleSpec::new(lambda, z1).ctx(ctx)?;
        self.cache.get_or_solve(&d, &self.cfg.solver, self.cfg.levels()).ctx(ctx)
    }

    fn n(&self) -> f64 {
        self.cfg.trap.n_particles as f64
    }

    /// k_B T_c/ħω for one dimple.
    pub fn tc_reduced(&self, lambda: f64, z1: f64) -> Result<f64, AppError> {
        let spec = self.spectrum(lambda, z1)?;
        solve_tc_reduced(&spec, self.n()).ctx(|| format!("T_c for lambda={lambda}, z1={z1}"))
    }

    /// k_B T_c⁰/ħω.
    pub fn tc0_reduced(&self) -> Result<f64, AppError> {
        self.tc_reduced(0.0, 0.0)
    }

    /// (μ/ħω, N₀/N) at reduced temperature t.
    pub fn mu_fraction(&self, lambda: f64, z1: f64, t: f64) -> Result<(f64, f64), AppError> {
        let spec = self.spectrum(lambda, z1)?;
        let x = solve_x_reduced(&spec, self.n(), t).ctx(|| format!("mu for lambda={lambda}, z1={z1}, t={t}"))?;
        Ok((spec.xis[0] + 0.5 - x * t, 1.0 / x.exp_m1() / self.n()))
    }

    fn dataset(&self, figure: u8, title: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> FigureDataset {
        FigureDataset {
            figure,
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
            config_digest: self.cfg.digest(),
            notes: Vec::new(),
            plot_columns: (1..columns.len()).collect(),
            y_label: String::new(),
        }
    }
}

/// T_c against dimple position.
pub fn run_fig1(s: &Session) -> Result<FigureDataset, AppError> {
    let lambda = s.cfg.lambda;
    let tc0 = s.tc0_reduced()?;
    let kelvin = s.cfg.trap.kelvin_per_unit();
    let rows = s
        .cfg
        .z1_grid
        .points()
        .into_par_iter()
        .map(|z1| {
            let tc = s.tc_reduced(lambda, z1)?;
            Ok(vec![z1, tc * kelvin, tc / tc0])
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    let mut d = s.dataset(1, &format!("T_c vs z1, Lambda={lambda}"), &["z1", "tc_kelvin", "tc_over_tc0"], rows);
    d.plot_columns = vec![2];
    d.y_label = "T_c / T_c0".into();
    d.notes.push(format!("tc0_kelvin = {}", super::format_g(tc0 * kelvin)));
    Ok(d)
}

/// Chemical potential against temperature.
pub fn run_fig2(s: &Session) -> Result<FigureDataset, AppError> {
    let lambda = s.cfg.lambda;
    let tc0 = s.tc0_reduced()?;
    let cases = [(0.0, 0.0), (lambda, 0.0), (lambda, 1.0)];
    for &(l, z) in &cases {
        s.spectrum(l, z)?;
    }
    let rows = s
        .cfg
        .t_grid
        .points()
        .into_par_iter()
        .map(|r| {
            let mut row = vec![r];
            for &(l, z) in &cases {
                row.push(s.mu_fraction(l, z, r * tc0)?.0);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    let mut d = s.dataset(
        2,
        &format!("mu vs T/T_c0 (Lambda=0; Lambda={lambda} at z1=0 and z1=1)"),
        &["t_over_tc0", "mu_lambda0", "mu_z1_0", "mu_z1_1"],
        rows,
    );
    d.y_label = "mu / hbar omega".into();
    d.notes.push("mu columns in units of hbar*omega".into());
    Ok(d)
}

/// Condensate fraction against temperature at z₁ = 0 and 1.
pub fn run_fig3(s: &Session) -> Result<FigureDataset, AppError> {
    let lambda = s.cfg.lambda;
    let tc0 = s.tc0_reduced()?;
    s.spectrum(lambda, 0.0)?;
    s.spectrum(lambda, 1.0)?;
    let rows = s
        .cfg
        .t_grid
        .points()
        .into_par_iter()
        .map(|r| {
            let a = s.mu_fraction(lambda, 0.0, r * tc0)?.1;
            let b = s.mu_fraction(lambda, 1.0, r * tc0)?.1;
            Ok(vec![r, a, b])
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    let mut d = s.dataset(
        3,
        &format!("N0/N vs T/T_c0, Lambda={lambda}"),
        &["t_over_tc0", "fraction_z1_0", "fraction_z1_1"],
        rows,
    );
    d.y_label = "N0 / N".into();
    Ok(d)
}

/// Condensate fraction at T = T_c⁰ against dimple position.
pub fn run_fig4(s: &Session) -> Result<FigureDataset, AppError> {
    let lambda = s.cfg.lambda;
    let tc0 = s.tc0_reduced()?;
    let rows = s
        .cfg
        .z1_grid
        .points()
        .into_par_iter()
        .map(|z1| Ok(vec![z1, s.mu_fraction(lambda, z1, tc0)?.1]))
        .collect::<Result<Vec<_>, AppError>>()?;
    let mut d = s.dataset(4, &format!("N0/N at T=T_c0 vs z1, Lambda={lambda}"), &["z1", "fraction_at_tc0"], rows);
    d.y_label = "N0 / N".into();
    d.notes.push("fraction vs dimple position at fixed T=T_c0, not vs temperature; see fig3 for N0/N vs T/T_c0".into());
    Ok(d)
}

/// Ground-state densities with and without the dimple.
pub fn run_fig5(s: &Session) -> Result<FigureDataset, AppError> {
    let (lambda, z1) = (s.cfg.fig5_lambda, s.cfg.fig5_z1);
    let grid = s.cfg.z_grid.points();
    let profile = |l: f64, z: f64| -> Result<Vec<f64>, AppError> {
        let spec = s.spectrum(l, z)?;
        let ctx = || format!("density for lambda={l}, z1={z}");
        let gs = ground_state(&spec.dimple, &spec).ctx(ctx)?;
        let n0 = if s.cfg.scale_n0 {
            let t = s.cfg.t_ratio * s.tc0_reduced()?;
            Some(s.mu_fraction(l, z, t)?.1 * s.n())
        } else {
            None
        };
        Ok(density_profile(&gs, &grid, n0).ctx(ctx)?.values)
    };
    let decorated = profile(lambda, z1)?;
    let bare = profile(0.0, 0.0)?;
    let rows = grid.iter().zip(decorated.iter().zip(&bare)).map(|(&z, (&a, &b))| vec![z, a, b]).collect();
    let mut d = s.dataset(
        5,
        &format!("ground-state density, Lambda={lambda}, z1={z1} vs harmonic"),
        &["z", "rho_decorated", "rho_harmonic"],
        rows,
    );
    d.y_label = if s.cfg.scale_n0 { "N0 |psi|^2" } else { "|psi|^2" }.into();
    d.notes.push(
        "Lambda=3.2 is also quoted for this profile; the default is 3.6, use --fig5-lambda 3.2 for the other".into(),
    );
    d.notes.push(if s.cfg.scale_n0 {
        format!("densities scaled by N0 at T = {} T_c0", s.cfg.t_ratio)
    } else {
        "densities are unit-normalized |psi|^2".into()
    });
    Ok(d)
}

pub fn run_figure(s: &Session, figure: u8) -> Result<FigureDataset, AppError> {
    match figure {
        1 => run_fig1(s),
        2 => run_fig2(s),
        3 => run_fig3(s),
        4 => run_fig4(s),
        5 => run_fig5(s),
        _ => Err(AppError::Config { location: "fig".into(), msg: format!("figure must be 1..5, got {figure}") }),
    }
}

pub fn run_all(s: &Session) -> Result<Vec<FigureDataset>, AppError> {
    (1..=5).map(|f| run_figure(s, f)).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

/// CSV, metadata sidecar and (optionally) SVG; returns the paths written.
pub fn write_dataset(dir: &Path, d: &FigureDataset, svg: bool) -> Result<Vec<PathBuf>, AppError> {
    let stem = d.file_stem();
    let mut written = Vec::new();
    let csv = dir.join(format!("{stem}.csv"));
    write_file(&csv, &d.to_csv())?;
    written.push(csv);
    let meta = dir.join(format!("{stem}.meta"));
    write_file(&meta, &d.metadata_text())?;
    written.push(meta);
    if svg {
        let path = dir.join(format!("{stem}.svg"));
        write_file(&path, &render_svg(&[d])?)?;
        written.push(path);
    }
    Ok(written)
}

/// `manifest.txt`: digests, cache statistics, resolved settings and the
/// hash of every artifact.
pub fn write_manifest(s: &Session, artifacts: &[PathBuf]) -> Result<PathBuf, AppError> {
    let mut m = String::new();
    let _ = writeln!(m, "config-digest = {}", s.cfg.digest());
    let _ = writeln!(m, "solver-digest = {}", s.cfg.solver.digest());
    let _ = writeln!(m, "fresh-root-solves = {}", s.cache.fresh_solves());
    let _ = writeln!(m, "disk-cache-hits = {}", s.cache.disk_hits());
    for path in artifacts {
        let bytes = fs::read(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(m, "artifact = {name} sha256:{}", hex::encode(Sha256::digest(&bytes)));
    }
    m.push_str("\n# resolved configuration\n");
    for line in s.cfg.to_config_text().lines() {
        let _ = writeln!(m, "# {line}");
    }
    let path = s.cfg.out_dir.join("manifest.txt");
    write_file(&path, &m)?;
    Ok(path)
}
