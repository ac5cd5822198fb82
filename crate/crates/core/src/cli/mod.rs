//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 for
//! numerical or geometry failures.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::error::SimError;
use crate::experiments::{
    optimal_distance, refine_distance, run_sweep, SweepParam, SweepSpec,
};
use crate::scenario::ScenarioConfig;
use crate::simulator::{irs_gain, MonteCarloConfig};
use config::{parse_config, ConfigError};
use manifest::RunManifest;
use svg::PlotKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(e) if !e.is_validation() => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "irs-uav",
    version,
    about = "IRS-assisted cellular downlink to UAVs: gain evaluation, sweeps and IRS placement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the IRS gain for one scenario (CSV on stdout).
    Gain {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep one parameter, optionally for several values of a second one.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to sweep: k, h-uav, l, h-irs or f.
        #[arg(long)]
        sweep: String,
        /// START:STOP:STEP (inclusive) or a comma list; defaults to a per-parameter grid.
        #[arg(long)]
        values: Option<String>,
        /// NAME=V1,V2,... drawn as separate curves.
        #[arg(long)]
        overlay: Option<String>,
        /// Write an SVG line plot.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// What the SVG shows: gain or components.
        #[arg(long, default_value = "gain")]
        plot: String,
    },
    /// Find the BS-IRS distance that maximises the gain.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        /// Distance grid START:STOP:STEP in meters (or a comma list).
        #[arg(long, default_value = "10:100:5")]
        l_grid: String,
        /// Golden-section refinement between the grid neighbours of the best point.
        #[arg(long)]
        refine: bool,
        /// Stopping width of the refinement, meters.
        #[arg(long, default_value_t = 0.1)]
        refine_tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file (`key = value` lines) or a run manifest (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path (default: stdout). A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Explicit manifest path.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,

    #[arg(long = "seed", visible_alias = "master-seed", value_name = "N")]
    pub seed: Option<String>,
    #[arg(long = "f", visible_alias = "f-ghz", value_name = "GHZ")]
    pub f_ghz: Option<String>,
    #[arg(long = "p-t", visible_alias = "p-t-dbm", value_name = "DBM")]
    pub p_t_dbm: Option<String>,
    #[arg(long = "theta-etilt", visible_alias = "theta-etilt-deg", value_name = "DEG")]
    pub theta_etilt_deg: Option<String>,
    #[arg(long = "pl-irs", visible_alias = "pl-irs-db", value_name = "DB")]
    pub pl_irs_db: Option<String>,
    #[arg(long = "pl-wall", visible_alias = "pl-wall-db", value_name = "DB")]
    pub pl_wall_db: Option<String>,
    #[arg(long = "h-bs", visible_alias = "h-bs-m", value_name = "M")]
    pub h_bs_m: Option<String>,
    #[arg(long = "h-uav", visible_alias = "h-uav-m", value_name = "M")]
    pub h_uav_m: Option<String>,
    #[arg(long = "h-irs", visible_alias = "h-irs-m", value_name = "M")]
    pub h_irs_m: Option<String>,
    #[arg(long = "irs-rows", value_name = "M")]
    pub irs_rows: Option<String>,
    #[arg(long = "irs-cols", value_name = "N")]
    pub irs_cols: Option<String>,
    #[arg(long = "k", value_name = "K")]
    pub k: Option<String>,
    #[arg(long = "l", visible_alias = "l-m", value_name = "M")]
    pub l_m: Option<String>,
    #[arg(long = "n-rays", value_name = "N")]
    pub n_rays: Option<String>,
    #[arg(long = "n-runs", value_name = "N")]
    pub n_runs: Option<String>,
    /// in-phase, geometric or uniform-phase.
    #[arg(long = "baseline-mode", value_name = "MODE")]
    pub baseline_mode: Option<String>,
    #[arg(long = "element-pitch", visible_alias = "element-pitch-m", value_name = "M")]
    pub element_pitch_m: Option<String>,
    #[arg(long = "uav-x", visible_alias = "uav-x-m", value_name = "M")]
    pub uav_x_m: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs: [(&str, &Option<String>); 18] = [
            ("master_seed", &self.seed),
            ("f_ghz", &self.f_ghz),
            ("p_t_dbm", &self.p_t_dbm),
            ("theta_etilt_deg", &self.theta_etilt_deg),
            ("pl_irs_db", &self.pl_irs_db),
            ("pl_wall_db", &self.pl_wall_db),
            ("h_bs_m", &self.h_bs_m),
            ("h_uav_m", &self.h_uav_m),
            ("h_irs_m", &self.h_irs_m),
            ("irs_rows", &self.irs_rows),
            ("irs_cols", &self.irs_cols),
            ("k", &self.k),
            ("l_m", &self.l_m),
            ("n_rays", &self.n_rays),
            ("n_runs", &self.n_runs),
            ("baseline_mode", &self.baseline_mode),
            ("element_pitch_m", &self.element_pitch_m),
            ("uav_x_m", &self.uav_x_m),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    /// Resolves defaults, the config file (or manifest) and flags.
    pub fn resolve(&self) -> Result<(ScenarioConfig, MonteCarloConfig), CliError> {
        let text = match &self.config {
            Some(path) => {
                let raw = read(path)?;
                if raw.trim_start().starts_with('{') {
                    RunManifest::from_json(&raw)
                        .map_err(|e| CliError::Usage(format!("{}: bad manifest: {e}", path.display())))?
                        .config_text()
                } else {
                    raw
                }
            }
            None => String::new(),
        };
        Ok(parse_config(&text, &self.overrides())?)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `START:STOP:STEP` (inclusive) or `a,b,c` or a single number.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Usage(format!("bad value list `{spec}`: {msg}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("`{}`: {e}", s.trim())))
            .and_then(|v| if v.is_finite() { Ok(v) } else { Err(bad("non-finite value".into())) })
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected START:STOP:STEP".into()));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 {
            return Err(bad("step must be > 0".into()));
        }
        if stop < start {
            return Err(bad("empty range (STOP < START)".into()));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(bad("too many grid points".into()));
        }
        Ok((0..=n)
            .map(|i| {
                let v = start + i as f64 * step;
                (v * 1e9).round() / 1e9
            })
            .collect())
    } else {
        let vals = spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if vals.is_empty() {
            return Err(bad("empty list".into()));
        }
        Ok(vals)
    }
}

/// Parses `NAME=V1,V2,...`.
pub fn parse_overlay(spec: &str) -> Result<(SweepParam, Vec<f64>), CliError> {
    let (name, vals) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("bad overlay `{spec}`: expected NAME=V1,V2,...")))?;
    let param = name.parse::<SweepParam>().map_err(CliError::Usage)?;
    Ok((param, parse_values(vals)?))
}

struct Output<'a> {
    stdout: &'a mut (dyn Write + Send),
    stderr: &'a mut (dyn Write + Send),
}

impl Output<'_> {
    fn emit(&mut self, out: Option<&Path>, body: &str) -> Result<(), CliError> {
        match out {
            Some(p) => write_file(p, body),
            None => self.stdout.write_all(body.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
        }
    }
}

fn manifest_path(common: &CommonArgs) -> Option<PathBuf> {
    common.manifest.clone().or_else(|| {
        common.out.as_ref().map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn write_manifest(
    common: &CommonArgs,
    cfg: &ScenarioConfig,
    mc: &MonteCarloConfig,
    argv: &[String],
    notes: Vec<String>,
) -> Result<(), CliError> {
    if let Some(path) = manifest_path(common) {
        let mut m = RunManifest::new(cfg, mc, argv.to_vec());
        m.notes = notes;
        write_file(&path, &m.to_json())?;
    }
    Ok(())
}

fn execute(cli: Cli, argv: &[String], io: &mut Output<'_>) -> Result<(), CliError> {
    match cli.command {
        Command::Gain { common } => {
            let (cfg, mc) = common.resolve()?;
            let r = irs_gain(&cfg, &mc)?;
            io.emit(common.out.as_deref(), &csv::gain_csv(&r))?;
            write_manifest(&common, &cfg, &mc, argv, vec![])
        }
        Command::Sweep {
            common,
            sweep,
            values,
            overlay,
            svg,
            plot,
        } => {
            let (cfg, mc) = common.resolve()?;
            let param = sweep.parse::<SweepParam>().map_err(CliError::Usage)?;
            let plot = plot.parse::<PlotKind>().map_err(CliError::Usage)?;
            let values = match values {
                Some(v) => parse_values(&v)?,
                None => param.default_values(),
            };
            let mut spec = SweepSpec::new(param, values, cfg.clone(), mc);
            if let Some(ov) = overlay {
                let (p, vals) = parse_overlay(&ov)?;
                spec = spec.with_overlay(p, vals);
            }
            let res = run_sweep(&spec)?;
            io.emit(common.out.as_deref(), &csv::sweep_csv(&res))?;
            if let Some(path) = svg {
                write_file(&path, &svg::sweep_svg(&res, plot))?;
            }
            write_manifest(&common, &cfg, &mc, argv, res.metadata.notes.clone())
        }
        Command::Optimize {
            common,
            l_grid,
            refine,
            refine_tol,
        } => {
            let (cfg, mc) = common.resolve()?;
            let grid = parse_values(&l_grid)?;
            let opt = optimal_distance(&cfg, &grid, &mc)?;
            let spec = SweepSpec::new(SweepParam::L, grid, cfg.clone(), mc);
            let table = crate::experiments::SweepResult {
                rows: opt
                    .grid
                    .iter()
                    .map(|(l, r)| crate::experiments::SweepRow {
                        value: *l,
                        overlay: None,
                        irs_rows: cfg.irs_rows,
                        irs_cols: cfg.irs_cols,
                        result: *r,
                    })
                    .collect(),
                metadata: crate::experiments::SweepMetadata {
                    spec,
                    generator: crate::simulator::GENERATOR_ID.to_string(),
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    notes: vec![],
                },
            };
            io.emit(common.out.as_deref(), &csv::sweep_csv(&table))?;
            let mut summary = format!(
                "l_star={} gain_at_star_db={}",
                csv::fmt_sig6(opt.l_star),
                csv::fmt_sig6(opt.gain_at_star)
            );
            if refine {
                if !(refine_tol > 0.0) {
                    return Err(CliError::Usage("--refine-tol must be > 0".into()));
                }
                let (l, g) = refine_distance(&cfg, &opt, &mc, refine_tol)?;
                summary.push_str(&format!(
                    " l_refined={} gain_refined_db={}",
                    csv::fmt_sig6(l),
                    csv::fmt_sig6(g)
                ));
            }
            summary.push('\n');
            // keep stdout pure CSV when the table goes there
            let sink: &mut (dyn Write + Send) = if common.out.is_some() {
                &mut *io.stdout
            } else {
                &mut *io.stderr
            };
            sink.write_all(summary.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<output>"),
                source,
            })?;
            write_manifest(&common, &cfg, &mc, argv, vec![summary.trim_end().to_string()])
        }
    }
}

fn threads_of(cli: &Cli) -> Option<usize> {
    match &cli.command {
        Command::Gain { common } | Command::Sweep { common, .. } | Command::Optimize { common, .. } => {
            common.threads
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut io = Output { stdout, stderr };
    let result = match threads_of(&cli) {
        Some(0) => Err(CliError::Usage("--threads must be >= 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli, &argv, &mut io)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(cli, &argv, &mut io),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::default_l_grid;

    #[test]
    fn value_ranges() {
        assert_eq!(parse_values("25:100:25").unwrap(), vec![25.0, 50.0, 75.0, 100.0]);
        assert_eq!(parse_values("42:42:1").unwrap(), vec![42.0]);
        assert_eq!(parse_values("2,4,5").unwrap(), vec![2.0, 4.0, 5.0]);
        assert_eq!(parse_values("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_values("10:100:5").unwrap(), default_l_grid());
        assert!(parse_values("10:5:1").is_err());
        assert!(parse_values("1:5:0").is_err());
        assert!(parse_values("1:5").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn overlay_parsing() {
        let (p, v) = parse_overlay("h-uav=30,40,50").unwrap();
        assert_eq!(p, SweepParam::HUav);
        assert_eq!(v, vec![30.0, 40.0, 50.0]);
        assert!(parse_overlay("wind=3").is_err());
        assert!(parse_overlay("h-uav").is_err());
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::Sim(SimError::invalid("k", "bad")).exit_code(), EXIT_CONFIG);
        assert_eq!(
            CliError::Sim(SimError::DegenerateGeometry("x".into())).exit_code(),
            EXIT_NUMERIC
        );
        assert_eq!(CliError::Sim(SimError::InvalidDistance(0.0)).exit_code(), EXIT_NUMERIC);
    }
}
