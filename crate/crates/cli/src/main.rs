//! deficitlab: evaluate information functionals, check the inequality
//! suites, and run reproducible experiments with CSV/JSON/SVG reports.
//!
//! Exit codes: 0 clean, 1 when an asserted (non-conjecture) check reports a
//! `violated` verdict, 2 for usage/config errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deficitlab::density::{standard_gaussian, Density};
use deficitlab::functionals::{catalog, EvalCtx};
use deficitlab::geometry::Generator;
use deficitlab::ineq;
use deficitlab::report::Verdict;
use deficitlab::runner::{
    self, csv, report_row, CltBase, RunConfig, SuiteSpec, INEQ_NAMES, REPORT_HEADER,
};
use deficitlab::transport::OtSettings;

const SEED_ENV: &str = "DEFICITLAB_SEED";
const DEFAULT_SEED: u64 = 0x0def_1c17;

#[derive(Parser)]
#[command(name = "deficitlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the suites described by a JSON config
    Run {
        /// Path to the run configuration
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 means auto (results are identical at any value)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Override the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the functional catalog of one density
    Eval {
        /// Builtin name (std-gaussian-1d, two-point-mixture, rho-x, …) or a
        /// JSON density file
        #[arg(long)]
        density: String,
        /// Emit a CSV row instead of aligned text
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate one inequality (or all) over a θ-grid for a density pair
    Check {
        /// Inequality name or `all`
        #[arg(long)]
        ineq: String,
        /// Comma-separated pair of densities (builtin names or files)
        #[arg(long, default_value = "rho-x,rho-y")]
        pair: String,
        /// Grid as start:end:step
        #[arg(long, value_name = "A:B:STEP", default_value = "0:1:0.1")]
        theta_grid: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the normalized-sum bounds for a base law
    Clt {
        #[arg(long, default_value = "two-point-mixture")]
        base: String,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for CSV and the SVG chart
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Hypercontractivity sweeps (Nelson, Gross derivative, two-function)
    Hyper {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Search random polytope pairs for conjecture counterexamples
    Geom {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, value_enum, default_value_t = CliGenerator::Gaussian)]
        generator: CliGenerator,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Merge prior CSV reports into one JSON summary
    Report {
        /// CSV files to merge
        files: Vec<PathBuf>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliGenerator {
    Gaussian,
    Sphere,
    Anisotropic,
}

impl From<CliGenerator> for Generator {
    fn from(g: CliGenerator) -> Self {
        match g {
            CliGenerator::Gaussian => Generator::GaussianCloud,
            CliGenerator::Sphere => Generator::Sphere,
            CliGenerator::Anisotropic => Generator::Anisotropic,
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var(SEED_ENV).ok().and_then(|s| s.parse().ok())
}

fn pick_seed(flag: Option<u64>) -> u64 {
    flag.or_else(env_seed).unwrap_or(DEFAULT_SEED)
}

fn resolve_density(spec: &str) -> deficitlab::Result<Density> {
    use nalgebra::{DMatrix, DVector};
    match spec {
        "std-gaussian-1d" => standard_gaussian(1),
        "std-gaussian-2d" => standard_gaussian(2),
        "std-gaussian-3d" => standard_gaussian(3),
        "two-point-mixture" => CltBase::TwoPoint {
            mean: 1.0,
            variance: 0.25,
        }
        .density(),
        "rho-x" | "rho-y" => {
            let rho: f64 = if spec == "rho-x" { 0.5 } else { -0.5 };
            Density::gaussian(
                DVector::zeros(2),
                DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]),
            )
        }
        path => {
            if let Some(var) = path.strip_prefix("scaled-gaussian-") {
                let v: f64 = var.parse().map_err(|_| {
                    deficitlab::Error::InvalidConfig(format!("bad variance in `{path}`"))
                })?;
                return Density::gaussian_1d(0.0, v);
            }
            let text = std::fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn parse_grid(spec: &str) -> deficitlab::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(deficitlab::Error::InvalidConfig(format!(
            "grid must be start:end:step, got `{spec}`"
        )));
    }
    let parse = |s: &str| -> deficitlab::Result<f64> {
        s.parse()
            .map_err(|_| deficitlab::Error::InvalidConfig(format!("bad grid number `{s}`")))
    };
    let (a, b, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if step <= 0.0 || b < a {
        return Err(deficitlab::Error::InvalidConfig(
            "grid needs end ≥ start and step > 0".into(),
        ));
    }
    let n = ((b - a) / step).round() as usize;
    Ok((0..=n).map(|k| (a + step * k as f64).min(b)).collect())
}

fn emit_rows(
    out: &Option<PathBuf>,
    header: &[&str],
    rows: &[Vec<String>],
) -> deficitlab::Result<()> {
    let text = csv::render(header, rows);
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_eval(density: &str, as_csv: bool, seed: Option<u64>) -> deficitlab::Result<i32> {
    let x = resolve_density(density)?;
    let ctx = EvalCtx::with_seed(pick_seed(seed));
    let cat = catalog(&x, &ctx)?;
    if as_csv {
        let mut header = vec!["density"];
        let mut row = vec![density.to_string()];
        for (name, e) in cat.fields() {
            header.push(name);
            row.push(csv::fmt_f64(e.value));
        }
        print!("{}", csv::render(&header, &[row]));
    } else {
        println!("functional catalog for {density}");
        for (name, e) in cat.fields() {
            println!(
                "  {:<5} = {:>22} ± {:<12} [{}]",
                name,
                csv::fmt_f64(e.value),
                csv::fmt_f64(e.stderr),
                match e.method {
                    deficitlab::Method::ClosedForm => "closed form",
                    deficitlab::Method::Quadrature => "quadrature",
                    deficitlab::Method::MonteCarlo => "monte carlo",
                }
            );
        }
    }
    Ok(0)
}

fn cmd_check(
    which: &str,
    pair: &str,
    grid: &str,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> deficitlab::Result<i32> {
    if which != "all" && !INEQ_NAMES.contains(&which) {
        return Err(deficitlab::Error::InvalidConfig(format!(
            "unknown inequality `{which}`; known: all, {}",
            INEQ_NAMES.join(", ")
        )));
    }
    let (sx, sy) = pair.split_once(',').ok_or_else(|| {
        deficitlab::Error::InvalidConfig("--pair needs two comma-separated densities".into())
    })?;
    let x = resolve_density(sx.trim())?;
    let y = resolve_density(sy.trim())?;
    let thetas = parse_grid(grid)?;
    let seed = pick_seed(seed);
    let ctx = EvalCtx::with_seed(seed);
    let ot = OtSettings {
        seed,
        ..OtSettings::default()
    };

    let names: Vec<&str> = if which == "all" {
        INEQ_NAMES.to_vec()
    } else {
        vec![which]
    };
    let mut rows = Vec::new();
    let mut violated = false;
    let mut push = |r: deficitlab::DeficitReport| {
        violated |= r.verdict == Verdict::Violated;
        rows.push(report_row(&r));
    };
    for name in names {
        match name {
            "epi" | "fii" | "interpolation" | "fii_form" | "conv_lsi" => {
                for &theta in &thetas {
                    push(match name {
                        "epi" => ineq::epi_deficit(&x, &y, theta, &ctx)?,
                        "fii" => ineq::fii_deficit(&x, &y, theta, &ctx)?,
                        "interpolation" => ineq::interpolation_deficit(&x, &y, theta, &ctx)?,
                        "fii_form" => ineq::fii_form_deficit(&x, &y, theta, &ctx)?,
                        _ => ineq::conv_lsi_deficit(&x, &y, theta, &ctx)?,
                    });
                }
            }
            "sandwich" => {
                let (lo, hi) = ineq::sandwich_check(&x, &y, &thetas, &ctx)?;
                push(lo);
                push(hi);
            }
            "reverse_epi" => {
                let (a, b) = ineq::reverse_epi_deficit(&x, &y, &ctx)?;
                push(a);
                push(b);
            }
            "reverse_fii" => {
                let (a, b) = ineq::reverse_fii_deficit(&x, &y, &ctx)?;
                push(a);
                push(b);
            }
            "stam_submult" => push(ineq::stam_submult_deficit(&x, &y, &ctx)?),
            "three_epi" => {
                for t in [0.1, 1.0, 10.0] {
                    push(ineq::three_epi_deficit(&x, &y, t, &ctx)?);
                }
            }
            "concavity" => {
                for r in ineq::concavity_check(&x, &[0.1, 0.5, 1.0], &ctx)?.per_t {
                    push(r);
                }
            }
            "hwi_jump" => {
                if let Some(r) = ineq::hwi_jump_check(&x, &ctx, &ot)?.report {
                    push(r);
                }
            }
            _ => unreachable!(),
        }
    }
    emit_rows(out, &REPORT_HEADER, &rows)?;
    Ok(if violated { 1 } else { 0 })
}

fn run_single_suite(
    spec: SuiteSpec,
    seed: Option<u64>,
    out: &std::path::Path,
) -> deficitlab::Result<i32> {
    let cfg = RunConfig {
        schema_version: runner::SCHEMA_VERSION,
        master_seed: pick_seed(seed),
        output_dir: out.display().to_string(),
        suites: vec![spec],
    };
    let summary = runner::run(&cfg, 0)?;
    for s in &summary.suites {
        eprintln!(
            "{}: {} rows, {} holds, {} within error, {} violated",
            s.kind, s.rows, s.holds, s.holds_within_error, s.violated
        );
    }
    Ok(summary.exit_code)
}

fn real_main() -> deficitlab::Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            jobs,
            out,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = RunConfig::from_json(&text)?;
            if let Some(seed) = seed.or_else(env_seed) {
                cfg.master_seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out.display().to_string();
            }
            let summary = runner::run(&cfg, jobs)?;
            for s in &summary.suites {
                eprintln!(
                    "{}: {} rows, {} holds, {} within error, {} violated{}",
                    s.kind,
                    s.rows,
                    s.holds,
                    s.holds_within_error,
                    s.violated,
                    if s.asserted { "" } else { " (not asserted)" }
                );
            }
            Ok(summary.exit_code)
        }
        Command::Eval { density, csv, seed } => cmd_eval(&density, csv, seed),
        Command::Check {
            ineq,
            pair,
            theta_grid,
            seed,
            out,
        } => cmd_check(&ineq, &pair, &theta_grid, seed, &out),
        Command::Clt {
            base,
            n_max,
            seed,
            out,
        } => {
            let base = match base.as_str() {
                "two-point-mixture" => CltBase::TwoPoint {
                    mean: 1.0,
                    variance: 0.25,
                },
                "std-gaussian-1d" => CltBase::Gaussian { variance: 1.0 },
                other => {
                    if let Some(v) = other.strip_prefix("scaled-gaussian-") {
                        CltBase::Gaussian {
                            variance: v.parse().map_err(|_| {
                                deficitlab::Error::InvalidConfig(format!("bad base `{other}`"))
                            })?,
                        }
                    } else {
                        return Err(deficitlab::Error::InvalidConfig(format!(
                            "unknown clt base `{other}`"
                        )));
                    }
                }
            };
            run_single_suite(
                SuiteSpec::Clt {
                    base,
                    n_max,
                    subadd_pairs: vec![(1, 1), (1, 2), (2, 2), (1, 3), (3, 4), (4, 4)],
                    tolerance: 1e-9,
                },
                seed,
                &out,
            )
        }
        Command::Hyper { seed, out } => run_single_suite(
            SuiteSpec::Hyper {
                a_values: vec![0.25, 0.5, 1.0, 2.0],
                p_values: vec![1.5, 2.0, 4.0],
                t_values: vec![0.1, 0.5, 1.0],
                tolerance: 1e-10,
            },
            seed,
            &out,
        ),
        Command::Geom {
            dim,
            pairs,
            points,
            generator,
            seed,
            out,
        } => run_single_suite(
            SuiteSpec::Geom {
                dim,
                pairs,
                points_per_body: points,
                generator: generator.into(),
            },
            seed,
            &out,
        ),
        Command::Report { files } => {
            if files.is_empty() {
                return Err(deficitlab::Error::InvalidConfig(
                    "report needs at least one CSV file".into(),
                ));
            }
            let merged = runner::merge_reports(&files)?;
            println!("{}", serde_json::to_string_pretty(&merged)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                deficitlab::Error::InvalidConfig(_)
                | deficitlab::Error::Json(_)
                | deficitlab::Error::Io(_) => 2,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
