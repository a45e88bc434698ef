//! Executes configured suites and writes their tables plus a manifest.

use std::path::{Path, PathBuf};

use accbound::bounds::compare_bounds;
use accbound::catalog::moment_profile;
use accbound::families::{acceptability_ratio, end_min_m};
use accbound::montecarlo::{verify_lemma, verify_theorem1, Sampling, Verdict, VerificationRow, DEFAULT_CI_LEVEL};
use accbound::rng::derive_seed;
use accbound::scalar::{scan_points, scan_slice, slack_at};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{ExperimentConfig, Suite};
use crate::report::{json_bytes, write_file, write_table, Cell, Table};

pub const K_TABLE_HEADER: &[&str] = &["dist", "delta", "mean", "second_abs_moment", "abs_exp_moment", "k", "k_sung"];
pub const THEOREM1_HEADER: &[&str] = &["family", "n", "delta", "epsilon", "k", "m", "lhs", "lhs_ci_high", "log_bound", "verdict"];
pub const COMPARE_HEADER: &[&str] = &["dist", "delta", "n", "alpha", "eps_new", "log_bound_new", "eps_sung", "log_bound_sung", "k_ratio"];
pub const SCALAR_HEADER: &[&str] = &["x", "variant", "exp_value", "bound_value", "slack", "domain"];
const SCALAR_SUMMARY_HEADER: &[&str] = &[
    "variant",
    "points",
    "violations",
    "min_slack",
    "argmin",
    "zero_slack_points",
    "crossover_mismatches",
    "verdict",
];
const LEMMA_HEADER: &[&str] = &[
    "dist", "delta", "lambda", "k", "lhs", "lhs_ci_low", "lhs_ci_high", "method", "rhs", "margin", "verdict",
];
const ACCEPTABILITY_HEADER: &[&str] = &[
    "family",
    "delta",
    "lambda",
    "m",
    "ratio",
    "std_error",
    "ci_high",
    "log_denominator",
    "verdict",
];
const COMPARE_SHARED_HEADER: &[&str] = &[
    "dist",
    "delta",
    "n",
    "alpha",
    "shared_epsilon",
    "shared_log_bound_new",
    "shared_log_bound_ksung",
];
const END_HEADER: &[&str] = &["name", "end_min_m", "expect", "verdict"];

/// Tolerance for expected END constants.
const END_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 1 }
    }
}

/// Tables produced by one suite; the first is the primary one.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub suite: &'static str,
    pub tables: Vec<(&'static str, Table)>,
    pub fails: u64,
}

impl SuiteOutput {
    pub fn primary(&self) -> &Table {
        &self.tables[0].1
    }

    pub fn verdict(&self) -> Verdict {
        if self.fails > 0 {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }
}

fn verdict_cell(v: Verdict) -> Cell {
    Cell::from(v.as_str())
}

fn count_fails<'a>(rows: impl IntoIterator<Item = &'a VerificationRow>) -> u64 {
    rows.into_iter().filter(|r| r.verdict == Verdict::Fail).count() as u64
}

pub fn run_suite(suite: &Suite, seed: u64, opts: RunOptions) -> Result<SuiteOutput> {
    let sampling = |case: u64, reps: u64| Sampling::new(reps, derive_seed(seed, case)).with_workers(opts.workers);
    let mut fails = 0;
    let tables = match suite {
        Suite::Scalar { variants, .. } => {
            let scan = suite.scan_config().expect("scalar suite");
            let points = scan_points(&scan, seed)?;
            let mut table = Table::new(SCALAR_HEADER);
            let mut summary = Table::new(SCALAR_SUMMARY_HEADER);
            for &variant in variants {
                for &x in &points {
                    let s = slack_at(x, variant)?;
                    table.push(vec![
                        s.x.into(),
                        variant.as_str().into(),
                        s.exp_value.into(),
                        s.bound_value.into(),
                        s.slack.into(),
                        s.domain.as_str().into(),
                    ]);
                }
                let r = scan_slice(&points, variant)?;
                fails += r.violations;
                summary.push(vec![
                    variant.as_str().into(),
                    r.points.into(),
                    r.violations.into(),
                    r.min_slack.into(),
                    r.argmin.into(),
                    r.zero_slack_points.into(),
                    r.crossover_mismatches.into(),
                    verdict_cell(if r.violations > 0 { Verdict::Fail } else { Verdict::Pass }),
                ]);
            }
            vec![("", table), ("_summary", summary)]
        }
        Suite::KTable { dists, deltas } => {
            let mut table = Table::new(K_TABLE_HEADER);
            for dist in dists {
                for &delta in deltas {
                    let p = moment_profile(dist, delta)?;
                    table.push(vec![
                        dist.to_string().into(),
                        delta.into(),
                        p.mean.into(),
                        p.second_abs_moment.into(),
                        p.abs_exp_moment.into(),
                        p.k_constant.into(),
                        p.k_sung.into(),
                    ]);
                }
            }
            vec![("", table)]
        }
        Suite::Lemma {
            dists,
            deltas,
            lambda_fractions,
            reps,
            ..
        } => {
            let mut table = Table::new(LEMMA_HEADER);
            let mut case = 0;
            for dist in dists {
                for &delta in deltas {
                    let grid: Vec<f64> = lambda_fractions.iter().map(|f| f * delta).collect();
                    let rows = verify_lemma(dist, delta, &grid, sampling(case, *reps), suite.lemma_form())?;
                    case += 1;
                    fails += count_fails(rows.iter().map(|r| &r.row));
                    for r in rows {
                        table.push(vec![
                            r.dist.into(),
                            r.delta.into(),
                            r.lambda.into(),
                            r.k.into(),
                            r.row.lhs.into(),
                            r.row.lhs_ci_low.into(),
                            r.row.lhs_ci_high.into(),
                            r.row.method.as_str().into(),
                            r.row.rhs.into(),
                            r.row.margin.into(),
                            verdict_cell(r.row.verdict),
                        ]);
                    }
                }
            }
            vec![("", table)]
        }
        Suite::Acceptability {
            families,
            lambda_fractions,
            reps,
        } => {
            let mut table = Table::new(ACCEPTABILITY_HEADER);
            let mut case = 0;
            for family in families {
                let delta = family.declared_delta();
                let m = family.declared_m();
                for f in lambda_fractions {
                    let lambda = f * delta;
                    let est = acceptability_ratio(family, lambda, *reps, derive_seed(seed, case), opts.workers)?;
                    case += 1;
                    let verdict = if est.lower_limit(DEFAULT_CI_LEVEL) > m {
                        fails += 1;
                        Verdict::Fail
                    } else {
                        Verdict::Pass
                    };
                    table.push(vec![
                        family.to_string().into(),
                        delta.into(),
                        lambda.into(),
                        m.into(),
                        est.ratio.into(),
                        est.std_error.into(),
                        est.upper_limit(DEFAULT_CI_LEVEL).into(),
                        est.log_denominator.into(),
                        verdict_cell(verdict),
                    ]);
                }
            }
            vec![("", table)]
        }
        Suite::Theorem1 {
            families,
            eps_offsets,
            reps,
        } => {
            let mut table = Table::new(THEOREM1_HEADER);
            for (case, family) in families.iter().enumerate() {
                let delta = family.declared_delta();
                let k = family.max_marginal_k(delta)?;
                let grid: Vec<f64> = eps_offsets.iter().map(|o| k + o).collect();
                let rows = verify_theorem1(family, delta, &grid, sampling(case as u64, *reps))?;
                fails += count_fails(rows.iter().map(|r| &r.row));
                for r in rows {
                    table.push(vec![
                        r.family.into(),
                        r.n.into(),
                        r.delta.into(),
                        r.epsilon.into(),
                        r.k.into(),
                        r.m.into(),
                        r.row.lhs.into(),
                        r.row.lhs_ci_high.into(),
                        r.log_bound.into(),
                        verdict_cell(r.row.verdict),
                    ]);
                }
            }
            vec![("", table)]
        }
        Suite::Compare {
            dists,
            deltas,
            n_grid,
            alpha,
            m,
        } => {
            let mut table = Table::new(COMPARE_HEADER);
            let mut shared = Table::new(COMPARE_SHARED_HEADER);
            for dist in dists {
                for &delta in deltas {
                    for r in compare_bounds(dist, delta, n_grid, *alpha, *m)? {
                        table.push(vec![
                            dist.to_string().into(),
                            delta.into(),
                            r.n.into(),
                            r.alpha.into(),
                            r.epsilon_new.into(),
                            r.log_bound_new.into(),
                            r.epsilon_sung.into(),
                            r.log_bound_sung.into(),
                            r.k_ratio.into(),
                        ]);
                        shared.push(vec![
                            dist.to_string().into(),
                            delta.into(),
                            r.n.into(),
                            r.alpha.into(),
                            r.shared_epsilon.into(),
                            r.shared_log_bound_new.into(),
                            r.shared_log_bound_ksung.into(),
                        ]);
                    }
                }
            }
            vec![("", table), ("_shared", shared)]
        }
        Suite::EndCheck { tables } => {
            let mut table = Table::new(END_HEADER);
            for t in tables {
                let m = end_min_m(&t.table)?;
                let (expect, verdict) = match t.expect {
                    Some(e) if (m - e).abs() <= END_TOL * e.abs().max(1.0) => (Cell::from(e), "PASS"),
                    Some(e) => {
                        fails += 1;
                        (Cell::from(e), "FAIL")
                    }
                    None => (Cell::from(""), "UNCHECKED"),
                };
                table.push(vec![t.name.clone().into(), m.into(), expect, verdict.into()]);
            }
            vec![("", table)]
        }
    };
    Ok(SuiteOutput {
        suite: suite.name(),
        tables,
        fails,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub suite: String,
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub fails: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub suites: Vec<SuiteEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Seed of suite `index`; independent of the other suites in the config.
pub fn suite_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

/// Run every suite in order and write `NN_<suite>.{csv,json}` plus `manifest.json` into `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Manifest> {
    cfg.validate()?;
    let dir: &Path = &cfg.output;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = Vec::with_capacity(cfg.suites.len());
    for (i, suite) in cfg.suites.iter().enumerate() {
        let out = run_suite(suite, suite_seed(cfg.seed, i), opts).with_context(|| format!("suite {i} ({})", suite.name()))?;
        let mut files = Vec::new();
        for (suffix, table) in &out.tables {
            let stem = format!("{i:02}_{}{suffix}", out.suite);
            files.extend(write_table(dir, &stem, table, cfg.format.csv(), cfg.format.json())?);
        }
        entries.push(SuiteEntry {
            suite: out.suite.to_string(),
            files,
            rows: out.primary().rows.len(),
            fails: out.fails,
        });
    }
    let verdict = if entries.iter().any(|e| e.fails > 0) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    let manifest = Manifest {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        verdict,
        suites: entries,
    };
    write_file(&dir.join(MANIFEST_FILE), &json_bytes(&serde_json::to_value(&manifest)?)?)?;
    Ok(manifest)
}
