//! Experiment configuration: a JSON document listing suites to run.

use std::fmt;
use std::path::PathBuf;

use accbound::bounds::LemmaForm;
use accbound::catalog::{moment_profile, DistributionSpec};
use accbound::families::{BivariateTable, FamilySpec, MIN_REPS};
use accbound::scalar::{BoundVariant, ScanConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub suites: Vec<Suite>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn scan_default_lo() -> f64 {
    ScanConfig::default().lo
}

fn scan_default_hi() -> f64 {
    ScanConfig::default().hi
}

fn scan_default_step() -> f64 {
    ScanConfig::default().step
}

fn scan_default_random_points() -> u64 {
    ScanConfig::default().random_points
}

fn scan_default_random_lo() -> f64 {
    ScanConfig::default().random_lo
}

fn scan_default_random_hi() -> f64 {
    ScanConfig::default().random_hi
}

fn default_variants() -> Vec<BoundVariant> {
    BoundVariant::ALL.to_vec()
}

fn default_lambda_fractions() -> Vec<f64> {
    vec![0.125, 0.25, 0.5]
}

fn default_signed_fractions() -> Vec<f64> {
    vec![-1.0, -0.5, 0.0, 0.5, 1.0]
}

fn default_eps_offsets() -> Vec<f64> {
    (0..=8).map(|i| f64::from(i) * 0.25).collect()
}

fn default_reps() -> u64 {
    100_000
}

fn default_m() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTable {
    pub name: String,
    pub table: BivariateTable,
    /// Expected constant; the row fails when the computed one differs by more than 1e-12.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case", deny_unknown_fields)]
pub enum Suite {
    /// Scan of the scalar majorants; one CSV row per point and variant.
    Scalar {
        #[serde(default = "scan_default_lo")]
        lo: f64,
        #[serde(default = "scan_default_hi")]
        hi: f64,
        #[serde(default = "scan_default_step")]
        step: f64,
        #[serde(default = "scan_default_random_points")]
        random_points: u64,
        #[serde(default = "scan_default_random_lo")]
        random_lo: f64,
        #[serde(default = "scan_default_random_hi")]
        random_hi: f64,
        #[serde(default = "default_variants")]
        variants: Vec<BoundVariant>,
    },
    KTable {
        dists: Vec<DistributionSpec>,
        deltas: Vec<f64>,
    },
    Lemma {
        dists: Vec<DistributionSpec>,
        deltas: Vec<f64>,
        /// `lambda = fraction * delta`, each in (0, 1/2].
        #[serde(default = "default_lambda_fractions")]
        lambda_fractions: Vec<f64>,
        #[serde(default = "default_reps")]
        reps: u64,
        #[serde(default)]
        proof_tight: bool,
    },
    Acceptability {
        families: Vec<FamilySpec>,
        /// `lambda = fraction * declared_delta`, each in [-1, 1].
        #[serde(default = "default_signed_fractions")]
        lambda_fractions: Vec<f64>,
        #[serde(default = "default_reps")]
        reps: u64,
    },
    Theorem1 {
        families: Vec<FamilySpec>,
        /// `eps = K + offset`, each offset >= 0.
        #[serde(default = "default_eps_offsets")]
        eps_offsets: Vec<f64>,
        #[serde(default = "default_reps")]
        reps: u64,
    },
    Compare {
        dists: Vec<DistributionSpec>,
        deltas: Vec<f64>,
        n_grid: Vec<u64>,
        alpha: f64,
        #[serde(default = "default_m")]
        m: f64,
    },
    EndCheck {
        tables: Vec<NamedTable>,
    },
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Scalar { .. } => "scalar",
            Suite::KTable { .. } => "k_table",
            Suite::Lemma { .. } => "lemma",
            Suite::Acceptability { .. } => "acceptability",
            Suite::Theorem1 { .. } => "theorem1",
            Suite::Compare { .. } => "compare",
            Suite::EndCheck { .. } => "end_check",
        }
    }

    /// The scan parameters of a scalar suite.
    pub fn scan_config(&self) -> Option<ScanConfig> {
        match *self {
            Suite::Scalar {
                lo,
                hi,
                step,
                random_points,
                random_lo,
                random_hi,
                ..
            } => Some(ScanConfig {
                lo,
                hi,
                step,
                random_points,
                random_lo,
                random_hi,
            }),
            _ => None,
        }
    }

    pub fn lemma_form(&self) -> LemmaForm {
        match self {
            Suite::Lemma { proof_tight: true, .. } => LemmaForm::ProofTight,
            _ => LemmaForm::Stated,
        }
    }

    /// Overwrite the replication count of simulation suites.
    pub fn set_reps(&mut self, value: u64) {
        match self {
            Suite::Lemma { reps, .. } | Suite::Acceptability { reps, .. } | Suite::Theorem1 { reps, .. } => *reps = value,
            _ => {}
        }
    }

    pub fn set_proof_tight(&mut self, value: bool) {
        if let Suite::Lemma { proof_tight, .. } = self {
            *proof_tight = value;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse(String),
    Invalid { context: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid { context, message } => write!(f, "{context}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(context: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        context: context.to_string(),
        message: message.to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn check_profiles(ctx: &str, dists: &[DistributionSpec], deltas: &[f64]) -> Result<(), ConfigError> {
    if dists.is_empty() || deltas.is_empty() {
        return Err(invalid(ctx, "dists and deltas must be non-empty"));
    }
    for d in dists {
        d.validate().map_err(|e| invalid(ctx, e))?;
        for &delta in deltas {
            moment_profile(d, delta).map_err(|e| invalid(&format!("{ctx}: {d} at delta={delta}"), e))?;
        }
    }
    Ok(())
}

fn check_reps(ctx: &str, reps: u64) -> Result<(), ConfigError> {
    if reps < MIN_REPS {
        return Err(invalid(ctx, format!("reps = {reps} is below the minimum {MIN_REPS}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.suites.is_empty() {
            return Err(invalid("suites", "at least one suite is required"));
        }
        for (i, suite) in self.suites.iter().enumerate() {
            let ctx = format!("suites[{i}] ({})", suite.name());
            suite.validate(&ctx)?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canonical = self.clone();
        canonical.output = PathBuf::new();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

impl Suite {
    fn validate(&self, ctx: &str) -> Result<(), ConfigError> {
        match self {
            Suite::Scalar { variants, .. } => {
                let scan = self.scan_config().expect("scalar suite");
                if variants.is_empty() {
                    return Err(invalid(ctx, "variants must be non-empty"));
                }
                accbound::scalar::grid(scan.lo, scan.hi, scan.step).map_err(|e| invalid(ctx, e))?;
                if scan.random_points > 0 && !(scan.random_lo < scan.random_hi) {
                    return Err(invalid(ctx, "random_lo must be below random_hi"));
                }
            }
            Suite::KTable { dists, deltas } => check_profiles(ctx, dists, deltas)?,
            Suite::Compare {
                dists,
                deltas,
                n_grid,
                alpha,
                m,
            } => {
                check_profiles(ctx, dists, deltas)?;
                if n_grid.is_empty() || n_grid.iter().any(|&n| n < 2) {
                    return Err(invalid(ctx, "n_grid must be non-empty with every n >= 2"));
                }
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(invalid(ctx, format!("alpha must be positive, got {alpha}")));
                }
                if !(*m >= 1.0) {
                    return Err(invalid(ctx, format!("m must be >= 1, got {m}")));
                }
            }
            Suite::Lemma {
                dists,
                deltas,
                lambda_fractions,
                reps,
                ..
            } => {
                check_profiles(ctx, dists, deltas)?;
                check_reps(ctx, *reps)?;
                if lambda_fractions.is_empty() || lambda_fractions.iter().any(|f| !(*f > 0.0 && *f <= 0.5)) {
                    return Err(invalid(ctx, "lambda_fractions must lie in (0, 0.5]"));
                }
            }
            Suite::Acceptability {
                families,
                lambda_fractions,
                reps,
            } => {
                check_reps(ctx, *reps)?;
                if families.is_empty() {
                    return Err(invalid(ctx, "families must be non-empty"));
                }
                if lambda_fractions.is_empty() || lambda_fractions.iter().any(|f| !(f.abs() <= 1.0)) {
                    return Err(invalid(ctx, "lambda_fractions must lie in [-1, 1]"));
                }
                for f in families {
                    let delta = f.declared_delta();
                    for i in 0..f.len() {
                        let m = f.marginal(i).and_then(|d| {
                            let lo = d.mgf(-delta)?;
                            let hi = d.mgf(delta)?;
                            Ok(lo.max(hi))
                        });
                        match m {
                            Ok(v) if v.is_finite() => {}
                            Ok(_) => return Err(invalid(&format!("{ctx}: {f}"), "marginal MGF is infinite on [-delta, delta]")),
                            Err(e) => return Err(invalid(&format!("{ctx}: {f}"), e)),
                        }
                    }
                }
            }
            Suite::Theorem1 {
                families,
                eps_offsets,
                reps,
            } => {
                check_reps(ctx, *reps)?;
                if families.is_empty() {
                    return Err(invalid(ctx, "families must be non-empty"));
                }
                if eps_offsets.is_empty() || eps_offsets.iter().any(|o| !(*o >= 0.0 && o.is_finite())) {
                    return Err(invalid(ctx, "eps_offsets must be finite and non-negative"));
                }
                for f in families {
                    f.max_marginal_k(f.declared_delta())
                        .map_err(|e| invalid(&format!("{ctx}: {f}"), e))?;
                }
            }
            Suite::EndCheck { tables } => {
                if tables.is_empty() {
                    return Err(invalid(ctx, "tables must be non-empty"));
                }
                for t in tables {
                    t.table.validate().map_err(|e| invalid(&format!("{ctx}: {}", t.name), e))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scalar_config() {
        let cfg = parse_config(r#"{"seed": 1, "suites": [{"suite": "scalar", "lo": -1, "hi": 1, "step": 0.5, "random_points": 0, "random_lo": 0, "random_hi": 1}]}"#).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.output, PathBuf::from("out"));
        match &cfg.suites[0] {
            Suite::Scalar { variants, .. } => assert_eq!(variants.len(), 2),
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn divergent_laplace_is_rejected() {
        let err = parse_config(r#"{"seed": 1, "suites": [{"suite": "k_table", "dists": [{"kind": "laplace", "scale": 1}], "deltas": [1]}]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("abs_exp_moment diverges"), "{err}");
        assert!(err.contains("suites[0]"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(r#"{"seed": 1, "suites": [{"suite": "compare", "dists": [{"kind": "rademacher"}], "deltas": [1], "n_grid": [10], "alpha": 1, "epsilonn": 2}]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("epsilonn"), "{err}");
        let top = parse_config(r#"{"seed": 1, "suites": [], "colour": 1}"#).unwrap_err().to_string();
        assert!(top.contains("colour"), "{top}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_config("{\"seed\": 1,\n \"suites\": [}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = parse_config(r#"{"seed": 3, "suites": [{"suite": "end_check", "tables": [{"name": "t", "table": {"support_x": [0, 1], "support_y": [0, 1], "joint_probs": [[0.5, 0], [0, 0.5]]}}]}]}"#).unwrap();
        let h = a.hash();
        a.output = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), h);
        a.seed = 4;
        assert_ne!(a.hash(), h);
        assert_eq!(h.len(), 64);
    }

    #[test]
    fn reps_floor() {
        let err = parse_config(r#"{"seed": 1, "suites": [{"suite": "lemma", "dists": [{"kind": "rademacher"}], "deltas": [1], "reps": 10}]}"#).unwrap_err();
        assert!(err.to_string().contains("minimum"));
    }
}
