use super::config::{parse_refinement, ConfigPatch, Grid, OutputFormat, RunConfig};
use super::figures::{run_all, run_figure, write_dataset, write_manifest, Session};
use super::output::format_g;
use super::{AppError, Context};
use crate::density::{density_profile, ground_state};
use crate::spectrum::BracketRefinement;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

/// Spectrum and Bose-gas thermodynamics of a harmonic trap with a delta dimple.
#[derive(Parser, Debug)]
#[command(name = "dimple", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the lowest eigenvalues ξₙ (10 unless --levels is given).
    Spectrum,
    /// Critical temperature of the dimple and of the bare trap.
    Tc,
    /// Chemical potential at --t-ratio × T_c⁰.
    Mu,
    /// Condensate fraction at --t-ratio × T_c⁰.
    Fraction,
    /// Ground-state density on the z grid, written to density.csv.
    Density,
    /// One figure dataset.
    Fig {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        figure: u8,
    },
    /// All five figures plus a run manifest.
    All,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Plain-text key = value file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of particles.
    #[arg(long, global = true)]
    n: Option<u64>,
    #[arg(long, global = true)]
    mass_amu: Option<f64>,
    /// Linear trap frequency (Hz).
    #[arg(long, global = true)]
    omega_hz: Option<f64>,
    /// Dimensionless delta strength (positive attracts).
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Dimensionless delta position.
    #[arg(long, global = true, allow_hyphen_values = true)]
    z1: Option<f64>,
    /// Levels per spectrum (defaults to M2).
    #[arg(long, global = true)]
    levels: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// csv or csv+svg.
    #[arg(long, global = true, value_parser = OutputFormat::parse)]
    format: Option<OutputFormat>,
    /// Levels solved exactly.
    #[arg(long, global = true)]
    m1: Option<usize>,
    /// Levels below this get the first-order shift.
    #[arg(long, global = true)]
    m2: Option<usize>,
    #[arg(long, global = true)]
    root_tol: Option<f64>,
    /// brent or bisection.
    #[arg(long, global = true, value_parser = parse_refinement)]
    refine: Option<BracketRefinement>,
    /// Temperature in units of T_c⁰ for mu, fraction and N₀ scaling.
    #[arg(long, global = true)]
    t_ratio: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    fig5_lambda: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    fig5_z1: Option<f64>,
    /// start:stop:step
    #[arg(long, global = true, value_parser = Grid::parse, allow_hyphen_values = true)]
    z1_grid: Option<Grid>,
    /// start:stop:step, in units of T_c⁰
    #[arg(long, global = true, value_parser = Grid::parse)]
    t_grid: Option<Grid>,
    /// start:stop:step
    #[arg(long, global = true, value_parser = Grid::parse, allow_hyphen_values = true)]
    z_grid: Option<Grid>,
    /// Scale densities by N₀.
    #[arg(long, global = true)]
    scale_n0: bool,
}

impl Opts {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            n: self.n,
            mass_amu: self.mass_amu,
            omega_hz: self.omega_hz,
            lambda: self.lambda,
            z1: self.z1,
            t_ratio: self.t_ratio,
            fig5_lambda: self.fig5_lambda,
            fig5_z1: self.fig5_z1,
            z1_grid: self.z1_grid,
            t_grid: self.t_grid,
            z_grid: self.z_grid,
            m1: self.m1,
            m2: self.m2,
            root_tol: self.root_tol,
            refine: self.refine,
            levels: self.levels,
            scale_n0: self.scale_n0.then_some(true),
            out_dir: self.out_dir.clone(),
            format: self.format,
        }
    }

    fn resolve(&self) -> Result<RunConfig, AppError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            ConfigPatch::from_file(path)?.apply(&mut cfg)?;
        }
        self.patch().apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn io(e: std::io::Error) -> AppError {
    AppError::Io(e.to_string())
}

/// Run with explicit argv (program name first), printing to `out`.
pub fn cli_run<I, T>(argv: I, out: &mut dyn Write) -> Result<(), AppError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli =
        Cli::try_parse_from(argv).map_err(|e| AppError::Config { location: "arguments".into(), msg: e.to_string() })?;
    let mut cfg = cli.opts.resolve()?;
    if matches!(cli.command, Command::Spectrum) && cfg.levels.is_none() {
        cfg.levels = Some(10);
    }
    let session = Session::new(cfg)?;
    let cfg = &session.cfg;
    let kelvin = cfg.trap.kelvin_per_unit();
    let hw = cfg.trap.hbar_omega();

    match cli.command {
        Command::Spectrum => {
            let spec = session.spectrum(cfg.lambda, cfg.z1)?;
            for xi in &spec.xis {
                writeln!(out, "{}", format_g(*xi)).map_err(io)?;
            }
        }
        Command::Tc => {
            let tc = session.tc_reduced(cfg.lambda, cfg.z1)?;
            let tc0 = session.tc0_reduced()?;
            writeln!(
                out,
                "T_c = {} K (k_B T_c / hbar omega = {}), T_c0 = {} K, T_c/T_c0 = {}",
                format_g(tc * kelvin),
                format_g(tc),
                format_g(tc0 * kelvin),
                format_g(tc / tc0)
            )
            .map_err(io)?;
        }
        Command::Mu | Command::Fraction => {
            let t = cfg.t_ratio * session.tc0_reduced()?;
            let (mu, fraction) = session.mu_fraction(cfg.lambda, cfg.z1, t)?;
            let eps0 = session.spectrum(cfg.lambda, cfg.z1)?.xis[0] + 0.5;
            if matches!(cli.command, Command::Mu) {
                writeln!(
                    out,
                    "T = {} K: mu = {} J ({} hbar omega), eps0 = {} hbar omega",
                    format_g(t * kelvin),
                    format_g(mu * hw),
                    format_g(mu),
                    format_g(eps0)
                )
                .map_err(io)?;
            } else {
                writeln!(
                    out,
                    "T = {} K: N0/N = {} (N0 = {})",
                    format_g(t * kelvin),
                    format_g(fraction),
                    format_g(fraction * cfg.trap.n_particles as f64)
                )
                .map_err(io)?;
            }
        }
        Command::Density => {
            let spec = session.spectrum(cfg.lambda, cfg.z1)?;
            let ctx = || format!("density for lambda={}, z1={}", cfg.lambda, cfg.z1);
            let gs = ground_state(&spec.dimple, &spec).ctx(ctx)?;
            let n0 = if cfg.scale_n0 {
                let t = cfg.t_ratio * session.tc0_reduced()?;
                Some(session.mu_fraction(cfg.lambda, cfg.z1, t)?.1 * cfg.trap.n_particles as f64)
            } else {
                None
            };
            let p = density_profile(&gs, &cfg.z_grid.points(), n0).ctx(ctx)?;
            let mut csv = String::from("z,rho\n");
            for (z, v) in p.grid.iter().zip(&p.values) {
                csv.push_str(&format!("{},{}\n", format_g(*z), format_g(*v)));
            }
            std::fs::create_dir_all(&cfg.out_dir)
                .map_err(|e| AppError::Io(format!("{}: {e}", cfg.out_dir.display())))?;
            let path = cfg.out_dir.join("density.csv");
            std::fs::write(&path, csv).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            writeln!(out, "wrote {} ({} rows, peak at z={})", path.display(), p.grid.len(), format_g(p.argmax()))
                .map_err(io)?;
        }
        Command::Fig { figure } => {
            let d = run_figure(&session, figure)?;
            let files = write_dataset(&cfg.out_dir, &d, cfg.format.svg())?;
            report(out, &files, &d.rows.len(), &d.config_digest)?;
            let manifest = write_manifest(&session, &files)?;
            writeln!(out, "wrote {} ({} fresh root solves)", manifest.display(), session.cache.fresh_solves())
                .map_err(io)?;
        }
        Command::All => {
            let mut files = Vec::new();
            for d in run_all(&session)? {
                let written = write_dataset(&cfg.out_dir, &d, cfg.format.svg())?;
                report(out, &written, &d.rows.len(), &d.config_digest)?;
                files.extend(written);
            }
            let manifest = write_manifest(&session, &files)?;
            writeln!(out, "wrote {} ({} fresh root solves)", manifest.display(), session.cache.fresh_solves())
                .map_err(io)?;
        }
    }
    Ok(())
}

fn report(out: &mut dyn Write, files: &[PathBuf], rows: &usize, digest: &str) -> Result<(), AppError> {
    for f in files {
        writeln!(out, "wrote {} ({rows} rows, config {digest})", f.display()).map_err(io)?;
    }
    Ok(())
}

/// Process entry point: 0 on success, 2 for usage/config errors, 1 otherwise.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // let clap print help and version itself
    if let Err(e) = Cli::try_parse_from(&argv) {
        let code = e.exit_code();
        let _ = e.print();
        return code;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match cli_run(argv, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dimple: error: {e}");
            match e {
                AppError::Config { .. } => 2,
                _ => 1,
            }
        }
    }
}
