use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use accbound::montecarlo::Verdict;
use accbound_cli::args::{parse_dist, parse_family, parse_table};
use accbound_cli::config::{parse_config, ExperimentConfig, NamedTable, OutputFormat, Suite};
use accbound_cli::runner::{run_experiment, run_suite, RunOptions};
use accbound_cli::{defaults, Overrides};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(name = "accbound", version, about = "Exponential tail bounds for acceptable random variables: checks and tables")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed (overrides the config seed for `run`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replications per simulated case.
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// Output directory; without it `verify`/`table` print CSV to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads for simulations; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Check the lemma with the sharper constant exp(K lambda / 2).
    #[arg(long, global = true)]
    proof_tight_lemma: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Confront a result with exact or simulated values.
    #[command(subcommand)]
    Verify(Verify),
    /// Print constants and bounds.
    #[command(subcommand)]
    Table(TableCmd),
    /// Run every suite of a JSON config.
    Run { config: PathBuf },
}

#[derive(Subcommand)]
enum Verify {
    /// Scan both scalar majorants of exp(x).
    Scalar {
        #[arg(long, default_value_t = -30.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 100_000)]
        random_points: u64,
    },
    /// Centered MGF against exp(K lambda) for lambda in {delta/8, delta/4, delta/2}.
    Lemma {
        #[arg(long = "dist")]
        dists: Vec<String>,
        #[arg(long = "delta")]
        deltas: Vec<f64>,
    },
    /// Two-sided tail probability against the exponential bound, eps from K to K+2.
    Theorem1 {
        #[arg(long = "family")]
        families: Vec<String>,
        /// delta for shorthand families
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Joint MGF over the product of marginal MGFs on a lambda grid in [-delta, delta].
    Acceptability {
        #[arg(long = "family")]
        families: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Smallest END constant of bivariate tables.
    End {
        #[arg(long = "table")]
        tables: Vec<String>,
    },
}

#[derive(Subcommand)]
enum TableCmd {
    /// Moment constants K and K_sung.
    K {
        #[arg(long = "dist")]
        dists: Vec<String>,
        #[arg(long = "delta")]
        deltas: Vec<f64>,
    },
    /// New bound against the reference bound over n.
    Compare {
        #[arg(long = "dist")]
        dists: Vec<String>,
        #[arg(long = "delta")]
        deltas: Vec<f64>,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [10u64, 100, 1000, 10_000])]
        n_grid: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
    },
}

fn dists_or_default(given: &[String]) -> Result<Vec<accbound::catalog::DistributionSpec>> {
    if given.is_empty() {
        Ok(defaults::catalog())
    } else {
        given.iter().map(|d| parse_dist(d).with_context(|| format!("--dist {d}"))).collect()
    }
}

fn deltas_or_default(given: &[f64]) -> Vec<f64> {
    if given.is_empty() {
        defaults::deltas()
    } else {
        given.to_vec()
    }
}

fn families_or(given: &[String], delta: f64, fallback: fn() -> Vec<accbound::families::FamilySpec>) -> Result<Vec<accbound::families::FamilySpec>> {
    if given.is_empty() {
        Ok(fallback())
    } else {
        given.iter().map(|f| parse_family(f, delta).with_context(|| format!("--family {f}"))).collect()
    }
}

const DEFAULT_REPS: u64 = 100_000;

fn single_suite(command: Command, g: &Global) -> Result<Suite> {
    let reps = g.reps.unwrap_or(DEFAULT_REPS);
    Ok(match command {
        Command::Verify(Verify::Scalar {
            lo,
            hi,
            step,
            random_points,
        }) => {
            let d = accbound::scalar::ScanConfig::default();
            Suite::Scalar {
                lo,
                hi,
                step,
                random_points,
                random_lo: d.random_lo,
                random_hi: d.random_hi,
                variants: accbound::scalar::BoundVariant::ALL.to_vec(),
            }
        }
        Command::Verify(Verify::Lemma { dists, deltas }) => Suite::Lemma {
            dists: dists_or_default(&dists)?,
            deltas: deltas_or_default(&deltas),
            lambda_fractions: vec![0.125, 0.25, 0.5],
            reps,
            proof_tight: g.proof_tight_lemma,
        },
        Command::Verify(Verify::Theorem1 { families, delta }) => Suite::Theorem1 {
            families: families_or(&families, delta, defaults::theorem1_families)?,
            eps_offsets: (0..=8).map(|i| f64::from(i) * 0.25).collect(),
            reps,
        },
        Command::Verify(Verify::Acceptability { families, delta }) => Suite::Acceptability {
            families: families_or(&families, delta, defaults::acceptability_families)?,
            lambda_fractions: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            reps,
        },
        Command::Verify(Verify::End { tables }) => Suite::EndCheck {
            tables: if tables.is_empty() {
                defaults::end_tables()
            } else {
                tables
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        Ok(NamedTable {
                            name: format!("table{i}"),
                            table: parse_table(t).with_context(|| format!("--table {t}"))?,
                            expect: None,
                        })
                    })
                    .collect::<Result<_>>()?
            },
        },
        Command::Table(TableCmd::K { dists, deltas }) => Suite::KTable {
            dists: dists_or_default(&dists)?,
            deltas: deltas_or_default(&deltas),
        },
        Command::Table(TableCmd::Compare {
            dists,
            deltas,
            n_grid,
            alpha,
            m,
        }) => Suite::Compare {
            dists: if dists.is_empty() {
                vec![accbound::catalog::DistributionSpec::Rademacher]
            } else {
                dists_or_default(&dists)?
            },
            deltas: if deltas.is_empty() { vec![1.0] } else { deltas },
            n_grid,
            alpha,
            m,
        },
        Command::Run { .. } => unreachable!("handled by the caller"),
    })
}

fn report(manifest_verdict: Verdict, what: &str) -> ExitCode {
    eprintln!("{what}: {manifest_verdict}");
    if manifest_verdict == Verdict::Fail {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    let opts = RunOptions {
        workers: g.workers.max(1),
    };
    let overrides = Overrides {
        seed: g.seed,
        reps: g.reps,
        out: g.out.clone(),
        format: g.format,
        proof_tight_lemma: g.proof_tight_lemma,
    };
    if let Command::Run { config } = &cli.command {
        let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
        let mut cfg = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
        overrides.apply(&mut cfg);
        let manifest = run_experiment(&cfg, opts)?;
        for s in &manifest.suites {
            eprintln!("{:>14}: {} rows, {} FAIL", s.suite, s.rows, s.fails);
        }
        return Ok(report(manifest.verdict, &format!("wrote {}", cfg.output.display())));
    }

    let suite = single_suite(cli.command, g)?;
    let mut cfg = ExperimentConfig {
        seed: DEFAULT_SEED,
        suites: vec![suite],
        output: PathBuf::from("out"),
        format: OutputFormat::Csv,
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    if g.out.is_some() {
        let manifest = run_experiment(&cfg, opts)?;
        return Ok(report(manifest.verdict, &format!("wrote {}", cfg.output.display())));
    }
    let out = run_suite(&cfg.suites[0], accbound_cli::runner::suite_seed(cfg.seed, 0), opts)?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(&out.primary().to_csv()?)?;
    stdout.flush()?;
    Ok(report(out.verdict(), out.suite))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
