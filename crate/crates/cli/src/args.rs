//! Command-line shorthands for distributions, families and tables.
//!
//! Every argument also accepts the JSON form used in config files, or
//! `@path` to read that JSON from a file.

use accbound::catalog::DistributionSpec;
use accbound::families::{BivariateTable, FamilyKind, FamilySpec};
use anyhow::{anyhow, bail, Context, Result};

fn json_or_file(text: &str) -> Option<Result<String>> {
    if let Some(path) = text.strip_prefix('@') {
        return Some(std::fs::read_to_string(path).with_context(|| format!("reading {path}")));
    }
    if text.trim_start().starts_with('{') {
        return Some(Ok(text.to_string()));
    }
    None
}

fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad number {t:?}: {e}")))
        .collect()
}

/// `rademacher`, `uniform:A,B`, `bernoulli:P`, `centered_bernoulli:P`,
/// `laplace:SCALE`, `gaussian:SIGMA` or `gaussian:MEAN,SIGMA`, or JSON.
pub fn parse_dist(text: &str) -> Result<DistributionSpec> {
    let dist = if let Some(json) = json_or_file(text) {
        serde_json::from_str(&json?)?
    } else {
        let (kind, params) = text.split_once(':').unwrap_or((text, ""));
        let p = if params.is_empty() { Vec::new() } else { numbers(params)? };
        let arity = |n: usize| -> Result<()> {
            if p.len() != n {
                bail!("{kind} takes {n} parameter(s), got {}", p.len());
            }
            Ok(())
        };
        match kind {
            "rademacher" => {
                arity(0)?;
                DistributionSpec::Rademacher
            }
            "uniform" => {
                arity(2)?;
                DistributionSpec::Uniform { a: p[0], b: p[1] }
            }
            "bernoulli" => {
                arity(1)?;
                DistributionSpec::Bernoulli { p: p[0] }
            }
            "centered_bernoulli" => {
                arity(1)?;
                DistributionSpec::CenteredBernoulli { p: p[0] }
            }
            "laplace" => {
                arity(1)?;
                DistributionSpec::Laplace { scale: p[0] }
            }
            "gaussian" if p.len() == 1 => DistributionSpec::Gaussian { mean: 0.0, sigma: p[0] },
            "gaussian" => {
                arity(2)?;
                DistributionSpec::Gaussian { mean: p[0], sigma: p[1] }
            }
            other => bail!("unknown distribution {other:?}"),
        }
    };
    dist.validate()?;
    Ok(dist)
}

/// `iid:N:DIST`, `permutation:V1,V2,...`, or the JSON family form
/// (`{"family": {...}, "declared_delta": ..}`). Shorthands use `delta` and `M = 1`.
pub fn parse_family(text: &str, delta: f64) -> Result<FamilySpec> {
    if let Some(json) = json_or_file(text) {
        return Ok(serde_json::from_str(&json?)?);
    }
    let kind = if let Some(rest) = text.strip_prefix("iid:") {
        let (n, dist) = rest.split_once(':').ok_or_else(|| anyhow!("expected iid:N:DIST"))?;
        FamilyKind::Iid {
            dist: parse_dist(dist)?,
            n: n.parse()?,
        }
    } else if let Some(rest) = text.strip_prefix("permutation:") {
        FamilyKind::RandomPermutation { values: numbers(rest)? }
    } else {
        bail!("unknown family {text:?}; use iid:N:DIST, permutation:V,.. or JSON")
    };
    Ok(FamilySpec::new(kind, 1.0, delta)?)
}

pub fn parse_table(text: &str) -> Result<BivariateTable> {
    let json = json_or_file(text).ok_or_else(|| anyhow!("tables are given as JSON or @file"))??;
    let table: BivariateTable = serde_json::from_str(&json)?;
    table.validate()?;
    Ok(table)
}
