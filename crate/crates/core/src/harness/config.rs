//! Experiment configuration: typed fields, key=value config files, and
//! one-field sweeps.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::agents::{BetaPrimeHorizon, Delta0Policy, LPolicy};
use crate::error::{Error, Result};

/// Which policy runs the post-exploration phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    MtlBeta,
    MtlBetaPrime,
    IndependentOful,
    Random,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AgentKind::MtlBeta => "mtl_beta",
            AgentKind::MtlBetaPrime => "mtl_beta_prime",
            AgentKind::IndependentOful => "independent_oful",
            AgentKind::Random => "random",
        };
        f.write_str(s)
    }
}

impl FromStr for AgentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mtl_beta" => Ok(AgentKind::MtlBeta),
            "mtl_beta_prime" => Ok(AgentKind::MtlBetaPrime),
            "independent_oful" => Ok(AgentKind::IndependentOful),
            "random" => Ok(AgentKind::Random),
            other => Err(Error::Config(format!(
                "unknown agent `{other}` (expected mtl_beta, mtl_beta_prime, independent_oful, random)"
            ))),
        }
    }
}

impl fmt::Display for Delta0Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta0Policy::Fixed(v) => write!(f, "fixed:{v}"),
            Delta0Policy::MeasuredSd => f.write_str("measured_sd"),
            Delta0Policy::ScheduleInvSqrt => f.write_str("schedule_inv_sqrt"),
        }
    }
}

impl FromStr for Delta0Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "measured_sd" {
            return Ok(Delta0Policy::MeasuredSd);
        }
        if s == "schedule_inv_sqrt" {
            return Ok(Delta0Policy::ScheduleInvSqrt);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad fixed delta0 value `{v}`")))?;
            return Ok(Delta0Policy::Fixed(v));
        }
        Err(Error::Config(format!(
            "unknown delta0 policy `{s}` (expected measured_sd, schedule_inv_sqrt, fixed:<v>)"
        )))
    }
}

impl fmt::Display for LPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LPolicy::RunningMax => f.write_str("running_max"),
            LPolicy::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for LPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "running_max" {
            return Ok(LPolicy::RunningMax);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad fixed L value `{v}`")))?;
            return Ok(LPolicy::Fixed(v));
        }
        Err(Error::Config(format!(
            "unknown L policy `{s}` (expected running_max, fixed:<v>)"
        )))
    }
}

impl fmt::Display for BetaPrimeHorizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaPrimeHorizon::Theorem => f.write_str("theorem"),
            BetaPrimeHorizon::Proof => f.write_str("proof"),
        }
    }
}

impl FromStr for BetaPrimeHorizon {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(BetaPrimeHorizon::Theorem),
            "proof" => Ok(BetaPrimeHorizon::Proof),
            other => Err(Error::Config(format!(
                "unknown beta_prime_horizon `{other}` (expected theorem, proof)"
            ))),
        }
    }
}

/// Field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepField {
    D,
    R,
    TCount,
    N1,
    KActions,
    Sigma,
}

impl fmt::Display for SweepField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepField::D => "d",
            SweepField::R => "r",
            SweepField::TCount => "t",
            SweepField::N1 => "n1",
            SweepField::KActions => "k",
            SweepField::Sigma => "sigma",
        };
        f.write_str(s)
    }
}

impl FromStr for SweepField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(SweepField::D),
            "r" => Ok(SweepField::R),
            "t" | "t_count" => Ok(SweepField::TCount),
            "n1" => Ok(SweepField::N1),
            "k" | "k_actions" => Ok(SweepField::KActions),
            "sigma" => Ok(SweepField::Sigma),
            other => Err(Error::Config(format!(
                "unknown sweep field `{other}` (expected d, r, t, n1, k, sigma)"
            ))),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Sweep {
    pub field: SweepField,
    pub values: Vec<f64>,
}

/// Fully resolved experiment description. Hashable, echoable, and the
/// unit of reproducibility: identical configs give identical outputs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub t_count: usize,
    pub r: usize,
    pub n1: usize,
    pub n_total: usize,
    pub k_actions: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub agent: AgentKind,
    pub delta0_policy: Delta0Policy,
    pub l_policy: LPolicy,
    pub beta_prime_horizon: BetaPrimeHorizon,
    /// Truncation multiplier override; `None` means the oracle value
    /// 9κ²μ² computed from the instance statistics.
    pub c_tilde: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub output_dir: PathBuf,
    pub diagnostics: bool,
    pub dump_spectral: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.t_count == 0 || self.r == 0 || self.n1 == 0 || self.trials == 0 {
            return Err(Error::Config("all counts must be at least 1".into()));
        }
        if self.r > self.d.min(self.t_count) {
            return Err(Error::Config(format!(
                "rank {} violates r <= min(d={}, T={})",
                self.r, self.d, self.t_count
            )));
        }
        if self.n1 >= self.n_total {
            return Err(Error::Config(format!(
                "exploration length n1={} must be below the horizon n={}",
                self.n1, self.n_total
            )));
        }
        if self.k_actions < 2 {
            return Err(Error::Config(format!(
                "k_actions {} must be at least 2",
                self.k_actions
            )));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma {} must be >= 0", self.sigma)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda {} must be positive",
                self.lambda
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta {} must lie in (0,1)",
                self.delta
            )));
        }
        if let Some(c) = self.c_tilde {
            if !(c > 0.0) {
                return Err(Error::Config(format!("c_tilde {c} must be positive")));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep needs at least one value".into()));
            }
            for &v in &sweep.values {
                self.with_field(sweep.field, v)?.validate_arm()?;
            }
        }
        Ok(())
    }

    fn validate_arm(&self) -> Result<()> {
        let mut arm = self.clone();
        arm.sweep = None;
        arm.validate()
    }

    /// Copy with one field replaced by a sweep value.
    pub fn with_field(&self, field: SweepField, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = self.clone();
        cfg.sweep = None;
        let as_count = |name: &str| -> Result<usize> {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "sweep value {value} is not a valid count for `{name}`"
                )));
            }
            Ok(value as usize)
        };
        match field {
            SweepField::D => cfg.d = as_count("d")?,
            SweepField::R => cfg.r = as_count("r")?,
            SweepField::TCount => cfg.t_count = as_count("t")?,
            SweepField::N1 => cfg.n1 = as_count("n1")?,
            SweepField::KActions => cfg.k_actions = as_count("k")?,
            SweepField::Sigma => {
                if !(value >= 0.0) {
                    return Err(Error::Config(format!("sweep sigma {value} must be >= 0")));
                }
                cfg.sigma = value;
            }
        }
        Ok(cfg)
    }

    /// The sweep arms: `(label, arm config)` pairs, or the config itself
    /// labeled by its agent when no sweep is present.
    pub fn arms(&self) -> Result<Vec<(String, Option<f64>, ExperimentConfig)>> {
        match &self.sweep {
            None => {
                let mut arm = self.clone();
                arm.sweep = None;
                Ok(vec![(self.agent.to_string(), None, arm)])
            }
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| {
                    let arm = self.with_field(sweep.field, v)?;
                    Ok((format!("{}={}", sweep.field, v), Some(v), arm))
                })
                .collect(),
        }
    }

    /// Stable `key = value` rendering: config echo, file format, and the
    /// hash source.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("d = {}\n", self.d));
        s.push_str(&format!("t_count = {}\n", self.t_count));
        s.push_str(&format!("r = {}\n", self.r));
        s.push_str(&format!("n1 = {}\n", self.n1));
        s.push_str(&format!("n_total = {}\n", self.n_total));
        s.push_str(&format!("k_actions = {}\n", self.k_actions));
        s.push_str(&format!("sigma = {}\n", self.sigma));
        s.push_str(&format!("lambda = {}\n", self.lambda));
        s.push_str(&format!("delta = {}\n", self.delta));
        s.push_str(&format!("agent = {}\n", self.agent));
        s.push_str(&format!("delta0_policy = {}\n", self.delta0_policy));
        s.push_str(&format!("l_policy = {}\n", self.l_policy));
        s.push_str(&format!("beta_prime_horizon = {}\n", self.beta_prime_horizon));
        match self.c_tilde {
            Some(c) => s.push_str(&format!("c_tilde = {c}\n")),
            None => s.push_str("c_tilde = oracle\n"),
        }
        s.push_str(&format!("trials = {}\n", self.trials));
        s.push_str(&format!("seed = {}\n", self.seed));
        if let Some(sweep) = &self.sweep {
            let values: Vec<String> = sweep.values.iter().map(|v| format!("{v}")).collect();
            s.push_str(&format!("sweep = {}:{}\n", sweep.field, values.join(",")));
        }
        s
    }

    /// FNV-1a over the canonical text; tags every trial and aggregate so
    /// mixed-config aggregation is rejected.
    pub fn config_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in self.canonical_text().bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash
    }
}

/// Partially specified configuration collected from a config file and
/// command-line flags; flags override the file.
#[derive(Debug, Clone, Default)]
pub struct ConfigDraft {
    pub d: Option<usize>,
    pub t_count: Option<usize>,
    pub r: Option<usize>,
    pub n1: Option<usize>,
    pub n_total: Option<usize>,
    pub k_actions: Option<usize>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub agent: Option<AgentKind>,
    pub delta0_policy: Option<Delta0Policy>,
    pub l_policy: Option<LPolicy>,
    pub beta_prime_horizon: Option<BetaPrimeHorizon>,
    pub c_tilde: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub diagnostics: Option<bool>,
    pub dump_spectral: Option<bool>,
}

impl ConfigDraft {
    /// Parse `key = value` lines; `#` starts a comment, blank lines skip.
    pub fn from_file_text(text: &str) -> Result<Self> {
        let mut draft = ConfigDraft::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: bad {what} `{value}`", lineno + 1));
            match key {
                "d" => draft.d = Some(value.parse().map_err(|_| bad("count"))?),
                "t_count" | "t" => draft.t_count = Some(value.parse().map_err(|_| bad("count"))?),
                "r" => draft.r = Some(value.parse().map_err(|_| bad("count"))?),
                "n1" => draft.n1 = Some(value.parse().map_err(|_| bad("count"))?),
                "n_total" | "n" => draft.n_total = Some(value.parse().map_err(|_| bad("count"))?),
                "k_actions" | "k" => {
                    draft.k_actions = Some(value.parse().map_err(|_| bad("count"))?)
                }
                "sigma" => draft.sigma = Some(value.parse().map_err(|_| bad("number"))?),
                "lambda" => draft.lambda = Some(value.parse().map_err(|_| bad("number"))?),
                "delta" => draft.delta = Some(value.parse().map_err(|_| bad("number"))?),
                "agent" => draft.agent = Some(value.parse()?),
                "delta0_policy" => draft.delta0_policy = Some(value.parse()?),
                "l_policy" => draft.l_policy = Some(value.parse()?),
                "beta_prime_horizon" => draft.beta_prime_horizon = Some(value.parse()?),
                "c_tilde" => draft.c_tilde = Some(value.parse().map_err(|_| bad("number"))?),
                "trials" => draft.trials = Some(value.parse().map_err(|_| bad("count"))?),
                "seed" => draft.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "output_dir" => draft.output_dir = Some(PathBuf::from(value)),
                "diagnostics" => draft.diagnostics = Some(value.parse().map_err(|_| bad("bool"))?),
                "dump_spectral" => {
                    draft.dump_spectral = Some(value.parse().map_err(|_| bad("bool"))?)
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown config key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(draft)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_file_text(&text)
    }

    /// Overlay `self` on top of `base`: fields set here win.
    pub fn over(self, base: ConfigDraft) -> ConfigDraft {
        ConfigDraft {
            d: self.d.or(base.d),
            t_count: self.t_count.or(base.t_count),
            r: self.r.or(base.r),
            n1: self.n1.or(base.n1),
            n_total: self.n_total.or(base.n_total),
            k_actions: self.k_actions.or(base.k_actions),
            sigma: self.sigma.or(base.sigma),
            lambda: self.lambda.or(base.lambda),
            delta: self.delta.or(base.delta),
            agent: self.agent.or(base.agent),
            delta0_policy: self.delta0_policy.or(base.delta0_policy),
            l_policy: self.l_policy.or(base.l_policy),
            beta_prime_horizon: self.beta_prime_horizon.or(base.beta_prime_horizon),
            c_tilde: self.c_tilde.or(base.c_tilde),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            output_dir: self.output_dir.or(base.output_dir),
            diagnostics: self.diagnostics.or(base.diagnostics),
            dump_spectral: self.dump_spectral.or(base.dump_spectral),
        }
    }

    /// Fill defaults, demand the required fields, validate.
    pub fn finish(self, sweep: Option<Sweep>) -> Result<ExperimentConfig> {
        let mut missing: Vec<&'static str> = Vec::new();
        let mut need = |name: &'static str, present: bool| {
            if !present {
                missing.push(name);
            }
        };
        need("--d", self.d.is_some());
        need("--t", self.t_count.is_some());
        need("--r", self.r.is_some());
        need("--n1", self.n1.is_some());
        need("--n", self.n_total.is_some());
        need("--seed", self.seed.is_some());
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing required flags: {}",
                missing.join(", ")
            )));
        }
        let cfg = ExperimentConfig {
            d: self.d.unwrap(),
            t_count: self.t_count.unwrap(),
            r: self.r.unwrap(),
            n1: self.n1.unwrap(),
            n_total: self.n_total.unwrap(),
            k_actions: self.k_actions.unwrap_or(20),
            sigma: self.sigma.unwrap_or(0.1),
            lambda: self.lambda.unwrap_or(1.0),
            delta: self.delta.unwrap_or(1e-3),
            agent: self.agent.unwrap_or(AgentKind::MtlBeta),
            delta0_policy: self.delta0_policy.unwrap_or(Delta0Policy::ScheduleInvSqrt),
            l_policy: self.l_policy.unwrap_or(LPolicy::RunningMax),
            beta_prime_horizon: self.beta_prime_horizon.unwrap_or(BetaPrimeHorizon::Theorem),
            c_tilde: self.c_tilde,
            trials: self.trials.unwrap_or(10),
            seed: self.seed.unwrap(),
            sweep,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            diagnostics: self.diagnostics.unwrap_or(false),
            dump_spectral: self.dump_spectral.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_draft() -> ConfigDraft {
        ConfigDraft {
            d: Some(10),
            t_count: Some(8),
            r: Some(2),
            n1: Some(5),
            n_total: Some(30),
            seed: Some(7),
            ..ConfigDraft::default()
        }
    }

    #[test]
    fn defaults_fill_in_and_validate() {
        let cfg = minimal_draft().finish(None).unwrap();
        assert_eq!(cfg.k_actions, 20);
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.agent, AgentKind::MtlBeta);
        assert!(matches!(cfg.delta0_policy, Delta0Policy::ScheduleInvSqrt));
    }

    #[test]
    fn missing_required_fields_are_named() {
        let err = ConfigDraft::default().finish(None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("--d") && msg.contains("--seed"), "{msg}");
    }

    #[test]
    fn config_file_parses_comments_and_aliases() {
        let text = "# comment\nd = 12\nt = 6\nr = 2\nn1 = 4 # trailing\nn = 20\nseed = 3\nagent = independent_oful\ndelta0_policy = fixed:0.05\n";
        let cfg = ConfigDraft::from_file_text(text).unwrap().finish(None).unwrap();
        assert_eq!(cfg.d, 12);
        assert_eq!(cfg.t_count, 6);
        assert_eq!(cfg.agent, AgentKind::IndependentOful);
        assert_eq!(cfg.delta0_policy, Delta0Policy::Fixed(0.05));
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigDraft::from_file_text("d = 12\nt = 6\nr = 2\nn1 = 4\nn = 20\nseed = 3\n").unwrap();
        let flags = ConfigDraft {
            d: Some(24),
            ..ConfigDraft::default()
        };
        let cfg = flags.over(file).finish(None).unwrap();
        assert_eq!(cfg.d, 24);
        assert_eq!(cfg.t_count, 6);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(ConfigDraft::from_file_text("frobnicate = 1\n").is_err());
    }

    #[test]
    fn sweep_arms_and_labels() {
        let mut cfg = minimal_draft().finish(None).unwrap();
        cfg.sweep = Some(Sweep {
            field: SweepField::R,
            values: vec![1.0, 2.0],
        });
        cfg.validate().unwrap();
        let arms = cfg.arms().unwrap();
        assert_eq!(arms.len(), 2);
        assert_eq!(arms[0].0, "r=1");
        assert_eq!(arms[1].2.r, 2);
        assert!(arms[1].2.sweep.is_none());
    }

    #[test]
    fn sweep_rejects_fractional_counts() {
        let cfg = minimal_draft().finish(None).unwrap();
        assert!(cfg.with_field(SweepField::D, 2.5).is_err());
    }

    #[test]
    fn hash_distinguishes_configs() {
        let a = minimal_draft().finish(None).unwrap();
        let mut b = a.clone();
        b.seed = 8;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash(), a.clone().config_hash());
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let mut cfg = minimal_draft().finish(None).unwrap();
        cfg.n1 = cfg.n_total;
        assert!(cfg.validate().is_err());
        let mut cfg = minimal_draft().finish(None).unwrap();
        cfg.delta = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = minimal_draft().finish(None).unwrap();
        cfg.k_actions = 1;
        assert!(cfg.validate().is_err());
    }
}
