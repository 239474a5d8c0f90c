//! Scenario configuration and its flat `key = value` text form.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// How assignment is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    /// Fair coin independent of everything else.
    Randomized,
    /// Treatment uptake `Bernoulli(logistic(lambda . c))`; breaks randomization.
    Observational,
}

impl Design {
    fn as_str(self) -> &'static str {
        match self {
            Design::Randomized => "randomized",
            Design::Observational => "observational",
        }
    }
}

/// Full parameterization of the data-generating process.
///
/// Logistic coefficient vectors are laid out as
/// `[intercept, arm, c_1, ..., c_k]`; the deviation mechanism appends a
/// final coefficient for concomitant therapy. `None` switches a mechanism
/// off entirely (rate exactly zero; for tolerability, everyone tolerates).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub design: Design,
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma: f64,
    /// Correlation of the residuals at the two assessments.
    pub rho: f64,
    /// Standard deviation of individual treatment-effect heterogeneity.
    pub sigma_effect: f64,
    pub delta_m: f64,
    pub m_logit: Option<Vec<f64>>,
    pub death_logit: Option<Vec<f64>>,
    /// Probability that a death by the second assessment happens before the first.
    pub death_early_prob: f64,
    pub tol_logit: Option<Vec<f64>>,
    pub monotone_tolerability: bool,
    /// Weight of an unobserved standard-normal trait in both the
    /// tolerability logit and the endpoints. Zero keeps principal ignorability.
    pub tol_unobserved: f64,
    pub withdraw_prob: f64,
    pub deviation_mechanism: Option<Vec<f64>>,
    pub undosed_prob: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n: 1000,
            k: 2,
            seed: 42,
            design: Design::Randomized,
            alpha1: 5.0,
            alpha2: 5.0,
            tau1: 1.0,
            tau2: 1.0,
            gamma: vec![0.5, -0.3],
            lambda: vec![0.0, 0.0],
            sigma: 1.0,
            rho: 0.5,
            sigma_effect: 0.0,
            delta_m: 0.0,
            m_logit: None,
            death_logit: None,
            death_early_prob: 0.5,
            tol_logit: None,
            monotone_tolerability: true,
            tol_unobserved: 0.0,
            withdraw_prob: 0.0,
            deviation_mechanism: None,
            undosed_prob: 0.0,
        }
    }
}

const KEYS: &[&str] = &[
    "n",
    "k",
    "seed",
    "design",
    "alpha1",
    "alpha2",
    "tau1",
    "tau2",
    "gamma",
    "lambda",
    "sigma",
    "rho",
    "sigma_effect",
    "delta_m",
    "m_logit",
    "death_logit",
    "death_early_prob",
    "tol_logit",
    "monotone_tolerability",
    "tol_unobserved",
    "withdraw_prob",
    "deviation_mechanism",
    "undosed_prob",
];

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| cfg_err(line, format!("`{key}` expects a number, got `{v}`")))
}

fn parse_vec(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_f64(line, key, s.trim())).collect()
}

fn parse_opt_vec(line: usize, key: &str, v: &str) -> Result<Option<Vec<f64>>> {
    if v == "off" {
        Ok(None)
    } else {
        parse_vec(line, key, v).map(Some)
    }
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(cfg_err(line, format!("`{key}` expects true or false, got `{v}`"))),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn fmt_opt_vec(v: &Option<Vec<f64>>) -> String {
    v.as_deref().map_or_else(|| "off".to_string(), fmt_vec)
}

impl ScenarioConfig {
    /// Parses the `key = value` form. Keys not present keep their defaults;
    /// unknown or repeated keys are errors. `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| cfg_err(line, "expected `key = value`"))?;
            let (key, v) = (key.trim(), value.trim());
            let Some(&canonical) = KEYS.iter().find(|&&k| k == key) else {
                return Err(cfg_err(line, format!("unknown key `{key}`")));
            };
            if seen.contains(&canonical) {
                return Err(cfg_err(line, format!("duplicate key `{key}`")));
            }
            seen.push(canonical);
            match canonical {
                "n" => {
                    cfg.n = v
                        .parse()
                        .map_err(|_| cfg_err(line, format!("`n` expects a non-negative integer, got `{v}`")))?
                }
                "k" => {
                    cfg.k = v
                        .parse()
                        .map_err(|_| cfg_err(line, format!("`k` expects a non-negative integer, got `{v}`")))?
                }
                "seed" => {
                    cfg.seed = v
                        .parse()
                        .map_err(|_| cfg_err(line, format!("`seed` expects an unsigned 64-bit integer, got `{v}`")))?
                }
                "design" => {
                    cfg.design = match v {
                        "randomized" => Design::Randomized,
                        "observational" => Design::Observational,
                        _ => return Err(cfg_err(line, format!("unknown design `{v}`"))),
                    }
                }
                "alpha1" => cfg.alpha1 = parse_f64(line, key, v)?,
                "alpha2" => cfg.alpha2 = parse_f64(line, key, v)?,
                "tau1" => cfg.tau1 = parse_f64(line, key, v)?,
                "tau2" => cfg.tau2 = parse_f64(line, key, v)?,
                "gamma" => cfg.gamma = parse_vec(line, key, v)?,
                "lambda" => cfg.lambda = parse_vec(line, key, v)?,
                "sigma" => cfg.sigma = parse_f64(line, key, v)?,
                "rho" => cfg.rho = parse_f64(line, key, v)?,
                "sigma_effect" => cfg.sigma_effect = parse_f64(line, key, v)?,
                "delta_m" => cfg.delta_m = parse_f64(line, key, v)?,
                "m_logit" => cfg.m_logit = parse_opt_vec(line, key, v)?,
                "death_logit" => cfg.death_logit = parse_opt_vec(line, key, v)?,
                "death_early_prob" => cfg.death_early_prob = parse_f64(line, key, v)?,
                "tol_logit" => cfg.tol_logit = parse_opt_vec(line, key, v)?,
                "monotone_tolerability" => cfg.monotone_tolerability = parse_bool(line, key, v)?,
                "tol_unobserved" => cfg.tol_unobserved = parse_f64(line, key, v)?,
                "withdraw_prob" => cfg.withdraw_prob = parse_f64(line, key, v)?,
                "deviation_mechanism" => cfg.deviation_mechanism = parse_opt_vec(line, key, v)?,
                "undosed_prob" => cfg.undosed_prob = parse_f64(line, key, v)?,
                _ => unreachable!("key table and match arms out of sync"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form: every key, fixed order, one per line.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("n", self.n.to_string());
        put("k", self.k.to_string());
        put("seed", self.seed.to_string());
        put("design", self.design.as_str().to_string());
        put("alpha1", self.alpha1.to_string());
        put("alpha2", self.alpha2.to_string());
        put("tau1", self.tau1.to_string());
        put("tau2", self.tau2.to_string());
        put("gamma", fmt_vec(&self.gamma));
        put("lambda", fmt_vec(&self.lambda));
        put("sigma", self.sigma.to_string());
        put("rho", self.rho.to_string());
        put("sigma_effect", self.sigma_effect.to_string());
        put("delta_m", self.delta_m.to_string());
        put("m_logit", fmt_opt_vec(&self.m_logit));
        put("death_logit", fmt_opt_vec(&self.death_logit));
        put("death_early_prob", self.death_early_prob.to_string());
        put("tol_logit", fmt_opt_vec(&self.tol_logit));
        put("monotone_tolerability", self.monotone_tolerability.to_string());
        put("tol_unobserved", self.tol_unobserved.to_string());
        put("withdraw_prob", self.withdraw_prob.to_string());
        put("deviation_mechanism", fmt_opt_vec(&self.deviation_mechanism));
        put("undosed_prob", self.undosed_prob.to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        let scalars = [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("sigma", self.sigma),
            ("rho", self.rho),
            ("sigma_effect", self.sigma_effect),
            ("delta_m", self.delta_m),
            ("death_early_prob", self.death_early_prob),
            ("tol_unobserved", self.tol_unobserved),
            ("withdraw_prob", self.withdraw_prob),
            ("undosed_prob", self.undosed_prob),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return bad(format!("`{name}` must be finite"));
            }
        }
        for (name, v) in [("sigma", self.sigma), ("sigma_effect", self.sigma_effect)] {
            if v < 0.0 {
                return bad(format!("`{name}` must be non-negative"));
            }
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return bad("`rho` must lie in [-1, 1]".into());
        }
        for (name, p) in [
            ("death_early_prob", self.death_early_prob),
            ("withdraw_prob", self.withdraw_prob),
            ("undosed_prob", self.undosed_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("`{name}` must lie in [0, 1]"));
            }
        }
        let k = self.k;
        let vectors = [
            ("gamma", Some(&self.gamma), k),
            ("lambda", Some(&self.lambda), k),
            ("m_logit", self.m_logit.as_ref(), k + 2),
            ("death_logit", self.death_logit.as_ref(), k + 2),
            ("tol_logit", self.tol_logit.as_ref(), k + 2),
            ("deviation_mechanism", self.deviation_mechanism.as_ref(), k + 3),
        ];
        for (name, v, len) in vectors {
            if let Some(v) = v {
                if v.len() != len {
                    return bad(format!("`{name}` needs {len} values for k = {k}, got {}", v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return bad(format!("`{name}` must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Same scenario with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        ScenarioConfig { seed, ..self.clone() }
    }
}
