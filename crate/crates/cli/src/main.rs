//! `histopolate`: classical vs enriched histopolation sweeps and parameter tuning.

use std::error::Error as StdError;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use edge_histopolation::bench::{run_workflow, FrankeVariant, TestFunction, WorkflowConfig};
use edge_histopolation::densities::{load_density_table, ortho_quadratic_canonical};
use edge_histopolation::geometry::{friedrichs_keller, Point2};
use edge_histopolation::quadrature::Rule1D;
use edge_histopolation::tuning::{
    grid_search, DensityFamily, ParameterGrid, TuningConfig, ValidationFn,
};
use edge_histopolation::LocalOperatorSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "general")]
    General,
}

/// Compare classical and enriched edge histopolation on Friedrichs–Keller
/// meshes of [-1, 1]², or tune the density parameters by grid search.
#[derive(Debug, Parser)]
#[command(name = "histopolate", version, about)]
struct Cli {
    /// Test functions to run (f1..f6).
    #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3,f4,f5,f6")]
    functions: Vec<TestFunction>,

    /// Mesh levels n; level n has 2(n+1)² triangles.
    #[arg(long, value_delimiter = ',', default_value = "20,30,40,50")]
    levels: Vec<usize>,

    /// Edge density family of the enriched operator.
    #[arg(long, value_enum, default_value = "1")]
    family: Family,

    /// Shape parameter μ (≥ 1).
    #[arg(long, default_value_t = 2.0)]
    mu: f64,

    /// Scale parameter σ (> 0).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,

    /// Table of `t, ω(t)` samples for `--family general`.
    #[arg(long)]
    density_file: Option<PathBuf>,

    /// Gauss–Legendre nodes on each half of an edge.
    #[arg(long, default_value_t = 50)]
    edge_nodes: usize,

    /// CSV output path (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,

    /// Square the y part of the second Franke term.
    #[arg(long, alias = "franke-classic")]
    franke_squared_y: bool,

    /// Run the parameter grid search instead of the sweep.
    #[arg(long)]
    tune: bool,

    /// μ candidates for `--tune`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    grid_mu: Vec<f64>,

    /// σ candidates for `--tune`.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    grid_sigma: Vec<f64>,

    /// Mesh levels used for `--tune`.
    #[arg(long, value_delimiter = ',', default_value = "10,20")]
    tune_levels: Vec<usize>,

    /// Validation functions used for `--tune`.
    #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3,f4,f5,f6")]
    tune_functions: Vec<TestFunction>,

    /// Where to write the `mu,sigma,total_l1_error` surface for `--tune`.
    #[arg(long)]
    surface_out: Option<PathBuf>,
}

type AnyResult<T> = Result<T, Box<dyn StdError>>;

fn franke_variant(cli: &Cli) -> FrankeVariant {
    if cli.franke_squared_y {
        FrankeVariant::SquaredY
    } else {
        FrankeVariant::Standard
    }
}

fn enriched_spec(cli: &Cli) -> AnyResult<LocalOperatorSpec> {
    let spec = match cli.family {
        Family::One => LocalOperatorSpec::enriched1(cli.sigma, cli.mu)?,
        Family::Two => LocalOperatorSpec::enriched2(cli.sigma, cli.mu)?,
        Family::General => {
            let path = cli
                .density_file
                .as_ref()
                .ok_or("--family general requires --density-file")?;
            let loaded = load_density_table(path, Rule1D::split_at_origin(cli.edge_nodes))?;
            eprintln!(
                "loaded {} samples from {} (mass before normalization {:.6})",
                loaded.samples,
                path.display(),
                loaded.raw_mass
            );
            let q = ortho_quadratic_canonical(&loaded.density)?;
            LocalOperatorSpec::generic(loaded.density.into(), q)?
        }
    };
    Ok(spec.with_edge_nodes(cli.edge_nodes)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> AnyResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sweep(cli: &Cli) -> AnyResult<()> {
    if cli.edge_nodes == 0 {
        return Err("--edge-nodes must be positive".into());
    }
    let variant = franke_variant(cli);
    let functions = cli
        .functions
        .iter()
        .map(|f| f.with_franke_variant(variant))
        .collect();
    let mut config = WorkflowConfig::new(functions, cli.levels.clone(), enriched_spec(cli)?);
    config.classical = config.classical.with_edge_nodes(cli.edge_nodes)?;
    let report = run_workflow(&config)?;
    emit(&cli.out, &report.to_csv())
}

fn tune(cli: &Cli) -> AnyResult<()> {
    let family = match cli.family {
        Family::One => DensityFamily::First,
        Family::Two => DensityFamily::Second,
        Family::General => return Err("--tune supports --family 1 or 2".into()),
    };
    let variant = franke_variant(cli);
    let functions: Vec<TestFunction> = cli
        .tune_functions
        .iter()
        .map(|f| f.with_franke_variant(variant))
        .collect();
    let closures: Vec<Box<dyn Fn(Point2) -> f64 + Sync>> = functions
        .iter()
        .map(|&tf| Box::new(move |p| tf.eval(p)) as Box<dyn Fn(Point2) -> f64 + Sync>)
        .collect();
    let refs: Vec<ValidationFn> = closures.iter().map(|c| c.as_ref()).collect();
    let meshes: Vec<_> = cli
        .tune_levels
        .iter()
        .map(|&n| friedrichs_keller(n))
        .collect();
    let grid = ParameterGrid::new(&cli.grid_mu, &cli.grid_sigma)?;
    let mut config = TuningConfig::new(family);
    config.edge_nodes = cli.edge_nodes;
    let result = grid_search(&refs, &meshes, &grid, &config)?;
    if let Some(path) = &cli.surface_out {
        result.write_surface(path)?;
    }
    let summary = format!(
        "best mu={} sigma={} total_l1_error={:.14e}\n",
        result.best_mu, result.best_sigma, result.best_total_error
    );
    if cli.surface_out.is_none() {
        emit(&cli.out, &(summary.clone() + &result.surface_csv()))?;
    } else {
        emit(&cli.out, &summary)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = if cli.tune { tune(&cli) } else { sweep(&cli) };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                msg.push_str(&format!(": {s}"));
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
