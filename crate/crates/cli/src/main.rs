use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swe_core::analysis::well_balance_residual;
use swe_core::harness::{
    format_chain, format_exact_profile, format_profile, format_spike_table, format_table, lookup,
    parse_config_file, registry, run_experiment, sweep, verify_registry, write_file, FileConfig, RunOptions,
};
use swe_core::{Error, GammaChoice, Preset, Topography, GRAVITY};

/// Shallow-water solver laboratory for flows over a bottom step.
#[derive(Debug, Parser)]
#[command(name = "swe-lab", version)]
struct Cli {
    /// `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scheme on one mesh and write the final profile.
    Run(Common),
    /// Sweep schemes and meshes and emit an L1 error table.
    Table(Common),
    /// Print the exact state chain and write a sampled profile.
    Exact(Common),
    /// Measured against predicted spike heights at the step.
    Spike(Common),
    /// Lake-at-rest residual of each scheme.
    WbCheck(Common),
    /// List the built-in tests.
    List,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    test: Option<String>,
    /// Scheme preset; repeat for several.
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    /// Cell count; repeat for several.
    #[arg(long = "cells")]
    cells: Vec<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Pressure weight for the plain flux schemes: `sgn` or `zero`.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extend default sweeps to the finest meshes.
    #[arg(long)]
    deep: bool,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Samples for `exact`.
    #[arg(long)]
    samples: Option<usize>,
    /// Time steps for `wb-check`.
    #[arg(long)]
    steps: Option<usize>,
}

/// Flags merged with the config file.
struct Settings {
    test: Option<String>,
    schemes: Vec<Preset>,
    cells: Vec<usize>,
    cfl: Option<f64>,
    gamma: Option<GammaChoice>,
    out: Option<PathBuf>,
    deep: bool,
    jobs: Option<usize>,
    samples: usize,
    steps: usize,
}

impl Settings {
    fn merge(c: Common, file: FileConfig) -> Result<Self, Error> {
        let schemes = if c.schemes.is_empty() {
            file.schemes.unwrap_or_default()
        } else {
            c.schemes.iter().map(|s| Preset::parse(s)).collect::<Result<_, _>>()?
        };
        let gamma = match c.gamma {
            Some(g) => Some(GammaChoice::parse(&g)?),
            None => file.gamma,
        };
        Ok(Self {
            test: c.test.or(file.test),
            schemes,
            cells: if c.cells.is_empty() { file.cells.unwrap_or_default() } else { c.cells },
            cfl: c.cfl.or(file.cfl),
            gamma,
            out: c.out.or(file.out.map(PathBuf::from)),
            deep: c.deep || file.deep.unwrap_or(false),
            jobs: c.jobs.or(file.jobs),
            samples: c.samples.or(file.samples).unwrap_or(2000),
            steps: c.steps.or(file.steps).unwrap_or(100),
        })
    }

    fn test(&self) -> Result<swe_core::ExperimentConfig, Error> {
        let name = self
            .test
            .as_deref()
            .ok_or_else(|| Error::Config("--test is required (see `swe-lab list`)".into()))?;
        lookup(name)
    }

    fn options(&self, config: &swe_core::ExperimentConfig) -> RunOptions {
        RunOptions {
            cfl: self.cfl.unwrap_or(config.cfl),
            gamma: self.gamma,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        2
    } else if e.is_validation() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => parse_config_file(&fs::read_to_string(path)?)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::List => list(),
        Command::Run(c) => run(Settings::merge(c, file)?),
        Command::Table(c) => table(Settings::merge(c, file)?),
        Command::Exact(c) => exact(Settings::merge(c, file)?),
        Command::Spike(c) => spike(Settings::merge(c, file)?),
        Command::WbCheck(c) => wb_check(Settings::merge(c, file)?),
    }
}

fn list() -> Result<(), Error> {
    println!("{:<18} {:<12} {:>5} {:<11} {:<7} summary", "name", "domain", "T", "pattern", "gamma");
    for c in registry() {
        println!(
            "{:<18} {:<12} {:>5} {:<11} {:<7} {}",
            c.name,
            format!("[{}, {}]", c.domain.0, c.domain.1),
            c.t_final,
            c.pattern,
            c.gamma.label(),
            c.summary
        );
    }
    println!("schemes: {}", Preset::ALL.map(|p| p.name()).join(", "));
    verify_registry()
}

fn default_out(name: String) -> PathBuf {
    Path::new("results").join(name)
}

fn run(s: Settings) -> Result<(), Error> {
    let config = s.test()?;
    let preset = match s.schemes.as_slice() {
        [p] => *p,
        [] => return Err(Error::Config("run needs exactly one --scheme".into())),
        _ => return Err(Error::Config("run takes a single --scheme; use `table` for sweeps".into())),
    };
    let n = match s.cells.as_slice() {
        [n] => *n,
        _ => return Err(Error::Config("run needs exactly one --cells".into())),
    };
    let opts = s.options(&config);
    let reference = config.reference()?;
    let out = run_experiment(&config, &reference, preset, n, opts)?;
    let spec = config.scheme_spec(preset, opts.gamma);
    let path = s
        .out
        .clone()
        .unwrap_or_else(|| default_out(format!("{}-{}-{n}.dat", config.name, preset.name())));
    write_file(&path, &format_profile(&config, preset, &spec, opts.cfl, &out.state, &reference))?;
    let r = &out.record;
    println!(
        "{} {} N={}: e_h = {:.6e}, e_m = {:.6e}, steps = {}, min h = {:.4e}, wrote {}",
        config.name,
        preset.name(),
        n,
        r.error.e_h,
        r.error.e_m,
        r.steps,
        r.diagnostics.min_h,
        path.display()
    );
    Ok(())
}

fn sweep_args(s: &Settings, config: &swe_core::ExperimentConfig) -> (Vec<Preset>, Vec<usize>) {
    let schemes = if s.schemes.is_empty() { config.schemes.clone() } else { s.schemes.clone() };
    let cells = if s.cells.is_empty() { config.sweep_cells(s.deep) } else { s.cells.clone() };
    (schemes, cells)
}

fn table(s: Settings) -> Result<(), Error> {
    let config = s.test()?;
    let (schemes, cells) = sweep_args(&s, &config);
    let report = sweep(&config, &schemes, &cells, s.options(&config), s.jobs)?;
    let csv = format_table(&config, &report);
    print!("{csv}");
    let path = s.out.clone().unwrap_or_else(|| default_out(format!("{}-table.csv", config.name)));
    write_file(&path, &csv)?;
    write_file(&path.with_extension("json"), &report.to_json()?)?;
    Ok(())
}

fn spike(s: Settings) -> Result<(), Error> {
    let config = s.test()?;
    let (schemes, cells) = sweep_args(&s, &config);
    let report = sweep(&config, &schemes, &cells, s.options(&config), s.jobs)?;
    let csv = format_spike_table(&config, &report);
    print!("{csv}");
    let path = s.out.clone().unwrap_or_else(|| default_out(format!("{}-spike.csv", config.name)));
    write_file(&path, &csv)?;
    write_file(&path.with_extension("json"), &report.to_json()?)?;
    Ok(())
}

fn exact(s: Settings) -> Result<(), Error> {
    let config = s.test()?;
    let reference = config.reference()?;
    println!("# {} at T = {}", config.name, config.t_final);
    println!("{}", format_chain(&reference));
    let path = s.out.clone().unwrap_or_else(|| default_out(format!("{}-exact.dat", config.name)));
    write_file(&path, &format_exact_profile(&config, &reference, s.samples)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn wb_check(s: Settings) -> Result<(), Error> {
    let topo = Topography::step(0.0, 0.7)?;
    let schemes = if s.schemes.is_empty() { Preset::ALL.to_vec() } else { s.schemes.clone() };
    let n = match s.cells.as_slice() {
        [] => 100,
        [n] => *n,
        _ => return Err(Error::Config("wb-check takes a single --cells".into())),
    };
    println!("# lake at rest h + b = 1 over a 0.7 step, N={n}, {} steps", s.steps);
    println!("scheme,max_abs_m");
    for p in schemes {
        let spec = match s.gamma {
            Some(g) if p.gamma_follows_experiment() => p.spec().with_gamma(g),
            _ => p.spec(),
        };
        let r = well_balance_residual(&spec, &topo, 1.0, GRAVITY, n, s.steps)?;
        println!("{},{:.3e}", p.name(), r);
    }
    Ok(())
}
