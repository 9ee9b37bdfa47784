//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{gamma_star, ThresholdConfig, DEFAULT_C, DEFAULT_DELTA_GRID};
use crate::dendrogram::{complete_linkage, cut_at_threshold};
use crate::directions::sample_directions;
use crate::distance::{distance_matrix, ks_gof_test};
use crate::error::{Error, Result};
use crate::grid::{validate_common_grid, DataSet};
use crate::io::{self, DataFormat, RunManifest};
use crate::projection::project_set;
use crate::simulate::{run_experiment, ExperimentConfig, Model, STUDY_N_VALUES, STUDY_SIGMA_VALUES};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lawclust", version, about = "Cluster sets of functional data by their generating law")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster data sets and write the distance matrix, dendrogram, partition and manifest.
    Cluster(ClusterArgs),
    /// Run the Monte Carlo study and write a report CSV.
    Simulate(SimulateArgs),
    /// Compute the averaged distance matrix only.
    Distance(DistanceArgs),
    /// Two-sample Kolmogorov-Smirnov test of two data sets along one random direction.
    GofTest(GofArgs),
    /// Compute the cut threshold for given sizes and variance.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Wide,
    Long,
}

impl From<FormatArg> for DataFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Wide => DataFormat::WideCsv,
            FormatArg::Long => DataFormat::LongCsv,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input files: one per data set (wide) or any number of long files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "wide")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct DirectionArgs {
    /// Number of random directions M.
    #[arg(long = "directions", conflicts_with = "sigma")]
    directions: Option<usize>,
    /// Set M = sigma * (smallest set size); default 10.
    #[arg(long)]
    sigma: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DirectionArgs {
    fn resolve(&self, min_n: usize) -> Result<(usize, Option<usize>)> {
        match (self.directions, self.sigma) {
            (Some(m), _) => Ok((m, None)),
            (None, s) => {
                let s = s.unwrap_or(10);
                if s == 0 {
                    return Err(Error::InvalidConfig("sigma must be at least 1".into()));
                }
                Ok((s * min_n, Some(s)))
            }
        }
    }
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dirs: DirectionArgs,
    /// Level alpha; defaults to sqrt(1 / N) with N the smallest set size.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "constant-c", default_value_t = DEFAULT_C)]
    constant_c: f64,
    #[arg(long = "delta-grid", default_value_t = DEFAULT_DELTA_GRID)]
    delta_grid: usize,
    #[arg(long, default_value = "lawclust-out")]
    out: PathBuf,
    /// Also write the directions used, one column per direction.
    #[arg(long)]
    export_directions: bool,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dirs: DirectionArgs,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GofArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, value_enum, default_value = "wide")]
    format: FormatArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Index of the direction within the seeded stream.
    #[arg(long, default_value_t = 0)]
    direction: usize,
    /// Significance level for the reported decision.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long = "v-star")]
    v_star: f64,
    #[arg(long = "constant-c", default_value_t = DEFAULT_C)]
    constant_c: f64,
    #[arg(long = "delta-grid", default_value_t = DEFAULT_DELTA_GRID)]
    delta_grid: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Sbb,
    Ar,
    Both,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "both")]
    model: ModelArg,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// Sample sizes (comma separated).
    #[arg(long = "n", value_delimiter = ',', default_values_t = STUDY_N_VALUES)]
    n_values: Vec<usize>,
    /// Direction multipliers, M = sigma * N (comma separated).
    #[arg(long = "sigma", value_delimiter = ',', default_values_t = STUDY_SIGMA_VALUES)]
    sigma_values: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "grid-points", default_value_t = 80)]
    grid_points: usize,
    /// Fixed level; defaults to sqrt(1 / N) per cell.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "constant-c", default_value_t = DEFAULT_C)]
    constant_c: f64,
    #[arg(long = "delta-grid", default_value_t = DEFAULT_DELTA_GRID)]
    delta_grid: usize,
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// Directory for one SVG chart per model.
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Cluster(a) => cluster_command(&a),
        Command::Simulate(a) => simulate_command(&a),
        Command::Distance(a) => distance_command(&a),
        Command::GofTest(a) => gof_command(&a),
        Command::Threshold(a) => threshold_command(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                EXIT_DATA
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn min_n(sets: &[DataSet]) -> usize {
    sets.iter().map(DataSet::len).min().unwrap_or(0)
}

fn cluster_command(a: &ClusterArgs) -> Result<()> {
    let format: DataFormat = a.input.format.into();
    let sets = io::load_datasets(&a.input.inputs, format)?;
    if sets.len() < 2 {
        return Err(Error::TooFewSets(sets.len()));
    }
    let grid = validate_common_grid(&sets)?;
    let n = min_n(&sets);
    let (m, sigma) = a.dirs.resolve(n)?;
    let alpha = a.alpha.unwrap_or_else(|| (1.0 / n as f64).sqrt());
    // Validate before the expensive part.
    let mut threshold_cfg = ThresholdConfig {
        alpha,
        c: a.constant_c,
        delta_grid_size: a.delta_grid,
        m,
        n,
        v_star: 0.0,
    };
    threshold_cfg.validate()?;

    let directions = sample_directions(&grid, m, a.dirs.seed)?;
    let matrix = distance_matrix(&sets, &directions)?;
    threshold_cfg.v_star = matrix.max_variance();
    let threshold = gamma_star(&threshold_cfg)?;
    let dendro = complete_linkage(&matrix)?;
    let partition = cut_at_threshold(&dendro, threshold.gamma_star);

    let out = &a.out;
    let matrix_path = out.join("distance_matrix.csv");
    let dendro_path = out.join("dendrogram.json");
    let partition_path = out.join("partition.csv");
    let gamma_path = out.join("gamma_star.txt");
    io::write_file(&matrix_path, &io::distance_matrix_csv(&matrix))?;
    io::write_file(&dendro_path, &io::dendrogram_json(&dendro))?;
    io::write_file(&partition_path, &io::partition_csv(&partition))?;
    io::write_file(&gamma_path, &format!("{}\n", io::fmt_full(threshold.gamma_star)))?;
    if a.export_directions {
        io::write_file(&out.join("directions.csv"), &io::directions_csv(&grid, &directions))?;
    }

    let inputs = a
        .input
        .inputs
        .iter()
        .map(|p| {
            Ok(io::InputFingerprint {
                path: p.display().to_string(),
                sha256: io::sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: io::ManifestConfig {
            alpha,
            directions: m,
            sigma,
            constant_c: a.constant_c,
            seed: a.dirs.seed,
            quadrature: "trapezoid".into(),
            delta_grid_size: a.delta_grid,
            format,
        },
        inputs,
        grid: io::GridSummary {
            points: grid.len(),
            horizon: grid.horizon(),
            sets: sets
                .iter()
                .map(|s| io::SetSummary {
                    id: s.id().to_string(),
                    n: s.len(),
                })
                .collect(),
        },
        outputs: io::ManifestOutputs {
            gamma_star: threshold.gamma_star,
            delta: threshold.delta,
            v_star: threshold_cfg.v_star,
            num_clusters: partition.num_clusters(),
            distance_matrix: file_name(&matrix_path),
            dendrogram: file_name(&dendro_path),
            partition: file_name(&partition_path),
            gamma_star_file: file_name(&gamma_path),
        },
    };
    io::write_file(&out.join("manifest.json"), &manifest.to_json())?;

    println!("sets: {}  N(min): {n}  M: {m}  alpha: {alpha:.6}", sets.len());
    println!("V*: {:.6}  delta: {:.6e}", threshold_cfg.v_star, threshold.delta);
    println!("gamma*: {:.6}", threshold.gamma_star);
    println!("clusters: {}", partition.num_clusters());
    for (k, members) in partition.clusters().iter().enumerate() {
        println!("  {k}: {}", members.join(" "));
    }
    println!("outputs written to {}", out.display());
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn distance_command(a: &DistanceArgs) -> Result<()> {
    let sets = io::load_datasets(&a.input.inputs, a.input.format.into())?;
    if sets.len() < 2 {
        return Err(Error::TooFewSets(sets.len()));
    }
    let grid = validate_common_grid(&sets)?;
    let (m, _) = a.dirs.resolve(min_n(&sets))?;
    let directions = sample_directions(&grid, m, a.dirs.seed)?;
    let matrix = distance_matrix(&sets, &directions)?;
    let csv = io::distance_matrix_csv(&matrix);
    match &a.out {
        Some(p) => io::write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn gof_command(a: &GofArgs) -> Result<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {}", a.level)));
    }
    let sets = io::load_datasets(&[a.first.clone(), a.second.clone()], a.format.into())?;
    if sets.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "expected exactly two data sets, found {}",
            sets.len()
        )));
    }
    let grid = validate_common_grid(&sets)?;
    let all = sample_directions(&grid, a.direction + 1, a.seed)?;
    let one = crate::directions::DirectionSet::from_paths(
        vec![all.paths()[a.direction].clone()],
        a.seed,
    )?;
    let x = project_set(&sets[0], &one)?.column(0);
    let y = project_set(&sets[1], &one)?.column(0);
    let test = ks_gof_test(&x, &y)?;
    println!("sets: {} (N = {}) vs {} (N = {})", sets[0].id(), x.len(), sets[1].id(), y.len());
    println!("statistic: {:.6}", test.statistic);
    println!("p-value: {:.6}", test.p_value);
    println!(
        "{} at level {}",
        if test.p_value < a.level {
            "reject equal laws"
        } else {
            "do not reject equal laws"
        },
        a.level
    );
    Ok(())
}

fn threshold_command(a: &ThresholdArgs) -> Result<()> {
    let cfg = ThresholdConfig {
        alpha: a.alpha,
        c: a.constant_c,
        delta_grid_size: a.delta_grid,
        m: a.m,
        n: a.n,
        v_star: a.v_star,
    };
    let t = gamma_star(&cfg)?;
    let (var_term, dkw_term, eps_term) = cfg.terms(t.delta);
    println!("gamma_star: {}", t.gamma_star);
    println!("delta: {}", t.delta);
    println!("terms: variance {var_term}  dkw {dkw_term}  epsilon {eps_term}");
    Ok(())
}

fn simulate_command(a: &SimulateArgs) -> Result<()> {
    let models = match a.model {
        ModelArg::Sbb => vec![Model::Sbb],
        ModelArg::Ar => vec![Model::Ar],
        ModelArg::Both => vec![Model::Sbb, Model::Ar],
    };
    let mut reports = Vec::new();
    for model in models {
        let cfg = ExperimentConfig {
            model,
            thetas: model.default_thetas(),
            n_values: a.n_values.clone(),
            sigma_values: a.sigma_values.clone(),
            replicates: a.replicates,
            grid_points: a.grid_points,
            seed: a.seed,
            c: a.constant_c,
            delta_grid_size: a.delta_grid,
            alpha: a.alpha,
        };
        cfg.validate()?;
        ThresholdConfig {
            alpha: a.alpha.unwrap_or(0.5),
            c: a.constant_c,
            delta_grid_size: a.delta_grid,
            m: 2,
            n: 2,
            v_star: 0.0,
        }
        .validate()?;
        let report = run_experiment(&cfg)?;
        for c in &report.cells {
            println!(
                "{model:>3}  N={:<4} sigma={:<3} correct={:.2} type1={:.3} type2={:.3}",
                c.n, c.sigma, c.proportion_correct, c.type1_rate, c.type2_rate
            );
        }
        reports.push(report);
    }
    io::write_file(&a.out, &io::report_csv(&reports))?;
    if let Some(dir) = &a.svg {
        for r in &reports {
            io::write_file(&dir.join(format!("{}.svg", r.model)), &io::report_svg(r))?;
        }
    }
    Ok(())
}
