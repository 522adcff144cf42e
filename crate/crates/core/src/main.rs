use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use junction_asym::composite::{write_error_csv, CompositeRegime, Ingredients};
use junction_asym::experiments::{
    error_sweep, run, run_config, standard_config, ConvergenceReport, ExperimentName, ExperimentPlan, LoadedConfig,
};
use junction_asym::geometry::{mesh_plate, Alpha, LateralBc, PlateSource, Shape};
use junction_asym::poisson2d::{green_functions, GreenBc};
use junction_asym::reference_axisym::{solve_reference, MeshControls};

#[derive(Parser)]
#[command(name = "junction-asym", version, about = "Asymptotics and reference solves for plate-rod junctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file or directory of *.toml files; repeatable.
    #[arg(long, short)]
    config: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Green functions and the G matrix of the plate.
    Green(Common),
    /// Logarithmic capacities, flux identity and compatibility integrals.
    Capacity(Common),
    /// Matching coefficients over the sweep steps.
    Match(Common),
    /// Composite field sampled on a probe grid at the configured h.
    Asym(Common),
    /// Axisymmetric reference solve of a one-rod junction.
    Reference(ReferenceArgs),
    /// Error reports of the composite field against reference solves.
    Errors(Common),
    /// Experiments listed in each configuration, with their targets.
    Converge(Common),
    /// Every artifact and experiment of each configuration.
    All(Common),
}

#[derive(Args)]
struct ReferenceArgs {
    /// Base configuration; the standard one-rod configuration when absent.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<Alpha>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Rod radius in stretched variables.
    #[arg(long)]
    a: Option<f64>,
    /// Rod length.
    #[arg(long)]
    l: Option<f64>,
    #[arg(long = "R-plate")]
    r_plate: Option<f64>,
    #[arg(long)]
    mesh_level: Option<u32>,
    /// Constant plate source.
    #[arg(long)]
    f0: Option<f64>,
    /// Zero value instead of zero flux on the plate edge.
    #[arg(long)]
    dirichlet_lateral: bool,
}

fn parse_alpha(s: &str) -> std::result::Result<Alpha, String> {
    s.parse::<u8>().map_err(|e| e.to_string()).and_then(Alpha::try_from)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Expands directories into their sorted *.toml files.
fn config_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if paths.is_empty() {
        bail!("no --config given");
    }
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .filter(|f| f.extension().is_some_and(|x| x == "toml"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load_all(common: &Common) -> Result<Vec<Arc<LoadedConfig>>> {
    config_files(&common.config)?
        .iter()
        .map(|p| LoadedConfig::load(p).map(Arc::new).with_context(|| format!("loading {}", p.display())))
        .collect()
}

fn out_dir(common: &Common, cfg: &LoadedConfig) -> Result<PathBuf> {
    let d = common.out.join(cfg.stem());
    fs::create_dir_all(&d)?;
    Ok(d)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Reference(args) => reference(&args).map(|_| true),
        Command::Green(c) => for_each(&c, green).map(|_| true),
        Command::Capacity(c) => for_each(&c, |c, l| single(c, l, ExperimentName::Capacity)).map(|_| true),
        Command::Match(c) => for_each(&c, |c, l| single(c, l, ExperimentName::MatchSweep)).map(|_| true),
        Command::Asym(c) => for_each(&c, asym).map(|_| true),
        Command::Errors(c) => for_each(&c, errors).map(|_| true),
        Command::Converge(c) => converge(&c),
        Command::All(c) => {
            for_each(&c, |c, l| {
                green(c, l)?;
                single(c, l, ExperimentName::Capacity)?;
                if CompositeRegime::of(&l.config.junction) != CompositeRegime::DirichletAlpha0 {
                    single(c, l, ExperimentName::MatchSweep)?;
                }
                asym(c, l)
            })?;
            converge(&c)
        }
    }
}

fn for_each(common: &Common, f: impl Fn(&Common, &Arc<LoadedConfig>) -> Result<()>) -> Result<()> {
    for cfg in load_all(common)? {
        f(common, &cfg).with_context(|| format!("{}", cfg.path.display()))?;
    }
    Ok(())
}

fn green(common: &Common, cfg: &Arc<LoadedConfig>) -> Result<()> {
    let j = &cfg.config.junction;
    let p = &cfg.config.pipeline;
    let mesh = Arc::new(mesh_plate(&j.plate, p.green_mesh_size, p.grade)?);
    let bc = match j.plate.lateral_bc {
        LateralBc::Neumann => GreenBc::NeumannMeanZero,
        LateralBc::Dirichlet => GreenBc::Dirichlet,
    };
    let g = green_functions(mesh, &j.plate.anchors, j.plate.cutoff(), bc)?;
    let dir = out_dir(common, cfg)?.join("green");
    g.write_csv(&dir)?;
    println!("{}: G matrix written to {}, symmetry defect {:.3e}", cfg.path.display(), dir.display(), g.symmetry_defect());
    Ok(())
}

fn single(common: &Common, cfg: &Arc<LoadedConfig>, e: ExperimentName) -> Result<()> {
    let plan = ExperimentPlan::new(cfg.clone(), e, Some(common.out.clone()));
    let report = run(&plan)?;
    println!("{}: {e} written ({} rows)", cfg.path.display(), report.table.rows.len());
    Ok(())
}

fn asym(common: &Common, cfg: &Arc<LoadedConfig>) -> Result<()> {
    let c = &cfg.config;
    let ing = Ingredients::compute(&c.junction, &c.options())?;
    let sol = ing.solution(c.junction.h)?;
    let path = out_dir(common, cfg)?.join(format!("asym_h{:.6}.csv", c.junction.h));
    sol.write_probe_csv(fs::File::create(&path)?, c.probe.n)?;
    println!("{}: probe grid written to {}", cfg.path.display(), path.display());
    Ok(())
}

fn errors(common: &Common, cfg: &Arc<LoadedConfig>) -> Result<()> {
    let c = &cfg.config;
    let rows = error_sweep(c, &c.sweep.h)?;
    let path = out_dir(common, cfg)?.join("errors.csv");
    write_error_csv(&path, &rows)?;
    println!("{}: {} error reports written to {}", cfg.path.display(), rows.len(), path.display());
    Ok(())
}

fn print_report(r: &ConvergenceReport) {
    println!("{} [{}]", r.experiment, r.config.display());
    for f in &r.fits {
        println!("  slope {:<28} {:>7.3} ± {:.3} (residual {:.2e})", f.column, f.fit.slope, f.fit.slope_ci95, f.fit.residual);
    }
    for c in &r.checks {
        println!("  {c}");
    }
}

fn converge(common: &Common) -> Result<bool> {
    let mut all_passed = true;
    let mut n_checks = 0;
    for cfg in load_all(common)? {
        let reports = run_config(cfg.clone(), Some(&common.out)).with_context(|| format!("{}", cfg.path.display()))?;
        for r in &reports {
            print_report(r);
            n_checks += r.checks.len();
            all_passed &= r.passed();
        }
    }
    println!("{} targets, {}", n_checks, if all_passed { "all passed" } else { "some FAILED" });
    Ok(all_passed)
}

fn reference(args: &ReferenceArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => LoadedConfig::load(p)?.config.junction,
        None => standard_config(Alpha::One, LateralBc::Neumann, 0.05),
    };
    let mut level = 2;
    if let Some(p) = &args.config {
        level = LoadedConfig::load(p)?.config.reference.level;
    }
    if let Some(h) = args.h {
        cfg.h = h;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if cfg.rods.len() != 1 {
        bail!("the reference solve needs exactly one rod");
    }
    if let Some(g) = args.gamma {
        cfg.rods[0].gamma = g;
    }
    if let Some(a) = args.a {
        cfg.rods[0].shape = Shape::Disk { radius: a };
    }
    if let Some(l) = args.l {
        cfg.rods[0].length = l;
    }
    if let Some(r) = args.r_plate {
        cfg.plate.shape = Shape::Disk { radius: r };
    }
    if let Some(f) = args.f0 {
        cfg.sources.plate = PlateSource::Constant { value: f };
    }
    if args.dirichlet_lateral {
        cfg.plate.lateral_bc = LateralBc::Dirichlet;
    }
    if let Some(l) = args.mesh_level {
        level = l;
    }
    let sol = solve_reference(&cfg, &MeshControls::default().refined(level))?;
    fs::create_dir_all(&args.out)?;
    let path: PathBuf = Path::new(&args.out).join(format!("reference_alpha{}_h{:.6}.csv", u8::from(cfg.alpha), cfg.h));
    sol.field().write_csv_file(&path)?;
    println!("{}", sol.summary());
    println!("solution written to {}", path.display());
    Ok(())
}
