//! `pfspectra` command line: exact spectra, decompositions, resolvents, and
//! simulations of transfer operators on shift spaces.

mod check;
mod fspec;

use clap::{Parser, Subcommand};
use pfspectra_core::json::{
    observable_from_json, system_from_json, DecompositionJson, EigenSystemJson,
    HistogramSummaryJson, IterateJson, IterateStepJson, JordanJson, OperatorJson, PoleOrderJson,
    ResolventJson, TermJson,
};
use pfspectra_core::scalar::Scalar;
use pfspectra_core::shift::ShiftSystem;
use pfspectra_core::spectral::EigenSystem;
use pfspectra_core::twosided::{build_operator, pole_order_check};
use pfspectra_core::{histogram_simulation, IntervalMap, Observable};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit codes: 0 success, 2 configuration error, 3 engine precondition,
/// 4 truncation instability under --strict.
const EXIT_CONFIG: u8 = 2;
const EXIT_ENGINE: u8 = 3;
const EXIT_UNSTABLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pfspectra",
    version,
    about = "Exact generalized spectra of transfer operators on shift spaces",
    long_about = None
)]
struct Cli {
    /// Write the primary output here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for the simulation commands
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Treat truncation instability as a failure (exit code 4)
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, eigenfunctions and dual functionals of the transfer
    /// operator on the degree-n test space
    Spectrum {
        /// Preset name (full2-uniform, fullbeta-uniform, fullbeta-weighted,
        /// golden-mean, twosided-full2) or path to a JSON config
        #[arg(long)]
        system: String,
        /// Truncation degree
        #[arg(long)]
        n: usize,
    },
    /// Eigenfunction coefficient lists only
    Eigenfunctions {
        #[arg(long)]
        system: String,
        #[arg(long)]
        n: usize,
    },
    /// Expand an observable over the eigenfunctions
    Decompose {
        #[arg(long)]
        system: String,
        /// Truncation degree (defaults to the observable degree)
        #[arg(long)]
        n: Option<usize>,
        /// Observable spec: `phi:K`, `poly:c0,c1,...`, `block:c0,..;d0,..`,
        /// or `@file.json`
        #[arg(long)]
        f: String,
    },
    /// Pole table of the analytically continued resolvent, with an optional
    /// float evaluation grid
    Resolvent {
        #[arg(long)]
        system: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        f: String,
        /// Complex grid points "re,im;re,im;..." evaluated in floats
        #[arg(long)]
        grid: Option<String>,
        /// CSV destination for the grid values (defaults next to --output)
        #[arg(long)]
        grid_output: Option<PathBuf>,
    },
    /// Iterate the transfer operator and report the mixing data
    Iterate {
        #[arg(long)]
        system: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        f: String,
        /// Number of iterations
        #[arg(long)]
        k: u64,
    },
    /// Two-sided full 2-shift analyses
    Twosided {
        #[command(subcommand)]
        sub: TwosidedCommand,
    },
    /// Histogram simulation of an interval map against its exact density
    Simulate {
        /// Map name: renyi2, renyi3, ..., or golden
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iterations applied to each seeded start before binning
        #[arg(long, default_value_t = 24)]
        burnin: u32,
        /// Write a JSON summary here as well
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run the full exact-invariant battery
    Check,
}

#[derive(Subcommand)]
enum TwosidedCommand {
    /// Jordan structure of the generalized eigenvalue 2^-k
    Jordan {
        #[arg(long)]
        k: usize,
        /// Coupling strength (exact scalar string)
        #[arg(long, default_value = "1/1")]
        eps: String,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Pole-order search for the order-k perturbation coefficient
    AkPoles {
        #[arg(long)]
        k: usize,
    },
    /// Sparse exact dump of the truncated operator
    Operator {
        #[arg(long, default_value = "1/1")]
        eps: String,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Engine(String),
    Unstable(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Engine(_) => EXIT_ENGINE,
            CliError::Unstable(_) => EXIT_UNSTABLE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Engine(m) | CliError::Unstable(m) => m,
        }
    }
}

fn load_system(spec: &str) -> Result<ShiftSystem, CliError> {
    if ShiftSystem::preset_names().contains(&spec) {
        return ShiftSystem::preset(spec).map_err(|e| CliError::Config(e.to_string()));
    }
    let path = PathBuf::from(spec);
    if path.exists() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {spec:?}: {e}")))?;
        return system_from_json(&text).map_err(|e| CliError::Config(e.to_string()));
    }
    Err(CliError::Config(format!(
        "unknown system {spec:?}; presets are {:?}",
        ShiftSystem::preset_names()
    )))
}

fn load_observable(sys: &ShiftSystem, es: &EigenSystem, spec: &str) -> Result<Observable, CliError> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {path:?}: {e}")))?;
        return observable_from_json(sys, &text).map_err(|e| CliError::Config(e.to_string()));
    }
    fspec::parse(es, spec).map_err(CliError::Config)
}

fn emit(output: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    match output {
        None => {
            println!("{body}");
            Ok(())
        }
        Some(path) => std::fs::write(path, format!("{body}\n"))
            .map_err(|e| CliError::Config(format!("cannot write {path:?}: {e}"))),
    }
}

fn to_pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn observable_degree(f: &Observable) -> usize {
    match f {
        Observable::Poly(p) => p.poly.degree().unwrap_or(0),
        Observable::Block(b) => b.parts.iter().filter_map(|p| p.degree()).max().unwrap_or(0),
        Observable::Cyl(c) => c.depth(),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Spectrum { system, n } => {
            let sys = load_system(system)?;
            let es = EigenSystem::new(&sys, *n).map_err(|e| CliError::Engine(e.to_string()))?;
            emit(&cli.output, &to_pretty(&EigenSystemJson::from_eigen_system(&es)))
        }
        Command::Eigenfunctions { system, n } => {
            let sys = load_system(system)?;
            let es = EigenSystem::new(&sys, *n).map_err(|e| CliError::Engine(e.to_string()))?;
            let dto = EigenSystemJson::from_eigen_system(&es);
            let body = serde_json::json!({
                "eigenvalues": dto.eigenvalues,
                "eigenpolys": dto.eigenpolys,
            });
            emit(&cli.output, &serde_json::to_string_pretty(&body).unwrap())
        }
        Command::Decompose { system, n, f } => {
            let sys = load_system(system)?;
            let probe = EigenSystem::new(&sys, n.unwrap_or(8).max(1))
                .map_err(|e| CliError::Engine(e.to_string()))?;
            let obs = load_observable(&sys, &probe, f)?;
            let degree = n.unwrap_or_else(|| observable_degree(&obs).max(1));
            let es =
                EigenSystem::new(&sys, degree).map_err(|e| CliError::Engine(e.to_string()))?;
            let d = es.decompose(&obs).map_err(|e| CliError::Engine(e.to_string()))?;
            emit(&cli.output, &to_pretty(&DecompositionJson::from_decomposition(&d)))
        }
        Command::Resolvent { system, n, f, grid, grid_output } => {
            let sys = load_system(system)?;
            let probe = EigenSystem::new(&sys, n.unwrap_or(8).max(1))
                .map_err(|e| CliError::Engine(e.to_string()))?;
            let obs = load_observable(&sys, &probe, f)?;
            let degree = n.unwrap_or_else(|| observable_degree(&obs).max(1));
            let es =
                EigenSystem::new(&sys, degree).map_err(|e| CliError::Engine(e.to_string()))?;
            let r = es.resolvent(&obs).map_err(|e| CliError::Engine(e.to_string()))?;
            let dto = ResolventJson::from_resolvent(&es, &r);
            emit(&cli.output, &to_pretty(&dto))?;
            if let Some(grid) = grid {
                let points = parse_grid(grid)?;
                let mut csv = String::from("lambda_re,lambda_im,value_norm,pole_hit\n");
                for (re, im) in points {
                    // sum of residue-norm / |lambda - pole| in floats
                    let mut acc = 0.0_f64;
                    let mut hit = false;
                    for (pole, residue) in &r.terms {
                        let dr = re - pole.to_f64();
                        let di = im;
                        let dist2 = dr * dr + di * di;
                        if dist2 == 0.0 {
                            hit = true;
                            continue;
                        }
                        let coords = es
                            .coords(residue)
                            .map_err(|e| CliError::Engine(e.to_string()))?;
                        let norm2: f64 = coords.iter().map(|c| c.to_f64().powi(2)).sum();
                        acc += (norm2 / dist2).sqrt();
                    }
                    csv.push_str(&format!("{re},{im},{acc},{hit}\n"));
                }
                match grid_output {
                    Some(path) => std::fs::write(path, csv)
                        .map_err(|e| CliError::Config(format!("cannot write grid CSV: {e}")))?,
                    None => print!("{csv}"),
                }
            }
            Ok(())
        }
        Command::Iterate { system, n, f, k } => {
            let sys = load_system(system)?;
            let probe = EigenSystem::new(&sys, n.unwrap_or(8).max(1))
                .map_err(|e| CliError::Engine(e.to_string()))?;
            let obs = load_observable(&sys, &probe, f)?;
            let degree = n.unwrap_or_else(|| observable_degree(&obs).max(1));
            let es =
                EigenSystem::new(&sys, degree).map_err(|e| CliError::Engine(e.to_string()))?;
            let d = es.decompose(&obs).map_err(|e| CliError::Engine(e.to_string()))?;
            let report = es.iterate(&obs, *k).map_err(|e| CliError::Engine(e.to_string()))?;
            let trajectory: Vec<IterateStepJson> = (0..=*k)
                .map(|step| IterateStepJson {
                    step,
                    terms: d
                        .terms
                        .iter()
                        .map(|(l, c)| TermJson {
                            eigenvalue: l.to_string(),
                            coefficient: (c * &l.pow(step as i64)).to_string(),
                        })
                        .collect(),
                })
                .collect();
            let body = IterateJson {
                limit: report.limit.to_string(),
                rate: report.rate.as_ref().map(Scalar::to_string),
                trajectory,
            };
            emit(&cli.output, &to_pretty(&body))
        }
        Command::Twosided { sub } => match sub {
            TwosidedCommand::Jordan { k, eps, m, n } => {
                let eps: Scalar = eps
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad scalar {eps:?}")))?;
                if *m < *k || *n < *k {
                    return Err(CliError::Engine(format!(
                        "truncation (M={m}, N={n}) too small for k={k}"
                    )));
                }
                let op = build_operator(eps, *m, *n);
                let report =
                    op.jordan_analysis(*k).map_err(|e| CliError::Engine(e.to_string()))?;
                let body = to_pretty(&JordanJson::from_report(&report));
                emit(&cli.output, &body)?;
                if cli.strict && !report.stable {
                    return Err(CliError::Unstable(format!(
                        "Jordan data at k={k} changed when the truncation grew"
                    )));
                }
                Ok(())
            }
            TwosidedCommand::AkPoles { k } => {
                let report =
                    pole_order_check(*k).map_err(|e| CliError::Engine(e.to_string()))?;
                emit(&cli.output, &to_pretty(&PoleOrderJson::from_report(&report)))
            }
            TwosidedCommand::Operator { eps, m, n } => {
                let eps: Scalar = eps
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad scalar {eps:?}")))?;
                let op = build_operator(eps, *m, *n);
                emit(&cli.output, &to_pretty(&OperatorJson::from_operator(&op)))
            }
        },
        Command::Simulate { map, samples, bins, seed, burnin, summary } => {
            let map =
                IntervalMap::by_name(map).map_err(|e| CliError::Config(e.to_string()))?;
            let report =
                histogram_simulation(&map, *samples, *bins, *seed, *burnin, cli.threads)
                    .map_err(|e| CliError::Engine(e.to_string()))?;
            let csv = pfspectra_core::json::histogram_to_csv(&report);
            match &cli.output {
                None => print!("{csv}"),
                Some(path) => std::fs::write(path, &csv)
                    .map_err(|e| CliError::Config(format!("cannot write CSV: {e}")))?,
            }
            if let Some(path) = summary {
                let dto = HistogramSummaryJson::from_report(&report);
                std::fs::write(path, format!("{}\n", to_pretty(&dto)))
                    .map_err(|e| CliError::Config(format!("cannot write summary: {e}")))?;
            }
            Ok(())
        }
        Command::Check => {
            let failures = check::run_all();
            if failures == 0 {
                Ok(())
            } else {
                Err(CliError::Engine(format!("{failures} checks failed")))
            }
        }
    }
}

fn parse_grid(grid: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out = Vec::new();
    for part in grid.split(';').filter(|p| !p.trim().is_empty()) {
        let (re, im) = part
            .split_once(',')
            .ok_or_else(|| CliError::Config(format!("grid point {part:?} is not re,im")))?;
        let re: f64 = re
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid value {re:?}")))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid value {im:?}")))?;
        out.push((re, im));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
