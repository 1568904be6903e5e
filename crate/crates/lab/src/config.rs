//! Experiment configuration: `key = value` files, `--set` overrides and
//! per-experiment defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use nudlab_core::norms::Exponent;

use crate::error::{LabError, LabResult};

/// Every runnable experiment, in registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    PartitionCheck,
    NormOracle,
    LemmaTlemp,
    LemmaTlemnp,
    NudPeriodic,
    NudNonperiodic,
    HolderVanishing,
    SolverVerify,
    TransportBound,
    InequalitySuite,
    ResidualDecay,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::PartitionCheck,
        Experiment::NormOracle,
        Experiment::LemmaTlemp,
        Experiment::LemmaTlemnp,
        Experiment::NudPeriodic,
        Experiment::NudNonperiodic,
        Experiment::HolderVanishing,
        Experiment::SolverVerify,
        Experiment::TransportBound,
        Experiment::InequalitySuite,
        Experiment::ResidualDecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PartitionCheck => "partition-check",
            Experiment::NormOracle => "norm-oracle",
            Experiment::LemmaTlemp => "lemma-tlemp",
            Experiment::LemmaTlemnp => "lemma-tlemnp",
            Experiment::NudPeriodic => "nud-periodic",
            Experiment::NudNonperiodic => "nud-nonperiodic",
            Experiment::HolderVanishing => "holder-vanishing",
            Experiment::SolverVerify => "solver-verify",
            Experiment::TransportBound => "transport-bound",
            Experiment::InequalitySuite => "inequality-suite",
            Experiment::ResidualDecay => "residual-decay",
        }
    }

    /// One-line statement of the claim the experiment checks.
    pub fn claim(self) -> &'static str {
        match self {
            Experiment::PartitionCheck => "dyadic symbols sum to one, stay in their annuli and rebuild every field",
            Experiment::NormOracle => "block Besov norms agree with direct summation over Fourier modes",
            Experiment::LemmaTlemp => "periodic cos(n x) and sin(n x) have Besov norm comparable to n^s",
            Experiment::LemmaTlemnp => "dilated bumps scale like lambda^(delta/2); modulated ones like lambda^(sigma+delta/2)",
            Experiment::NudPeriodic => "the periodic shear families are bounded, converge at t=0 and separate like sin t",
            Experiment::NudNonperiodic => "approximate and exact plane solutions stay close while the exact pair separates",
            Experiment::HolderVanishing => "the derivative Hölder quotient of the shear family is below (n h)^(1-sigma)",
            Experiment::SolverVerify => "the Euler solver reproduces exact solutions, conserves energy and is fourth order",
            Experiment::TransportBound => "forced transport obeys the exponential a priori Besov bound",
            Experiment::InequalitySuite => "product, algebra and interpolation inequalities hold with one constant each",
            Experiment::ResidualDecay => "the Euler residual of the approximate solutions decays like d1(lambda)",
        }
    }

    pub fn parse(name: &str) -> LabResult<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| LabError::Usage(format!("unknown experiment '{name}'; run `nudlab list`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one experiment run.
///
/// `freqs` holds the n or lambda sweep. `instances` is the corpus size or
/// the number of randomized instances, depending on the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub freqs: Vec<f64>,
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub p: Vec<Exponent>,
    pub q: Vec<Exponent>,
    pub delta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub k: f64,
    pub grid: Option<usize>,
    pub dt: Vec<f64>,
    pub seed: u64,
    pub instances: usize,
    pub three_d: bool,
    pub quick: bool,
    pub snapshots: bool,
    pub out: Option<PathBuf>,
}

const KEYS: [&str; 17] = [
    "experiment", "freqs", "times", "s", "p", "q", "delta", "sigma", "k", "grid", "dt", "seed", "instances", "three_d",
    "quick", "snapshots", "out",
];

fn inf() -> Exponent {
    Exponent::Infinity
}

fn fin(v: f64) -> Exponent {
    Exponent::Finite(v)
}

impl ExperimentConfig {
    /// Defaults for `experiment`; `quick` selects the reduced sweeps.
    pub fn defaults(experiment: Experiment, quick: bool) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            freqs: vec![],
            times: vec![0.0],
            s: vec![2.0],
            p: vec![fin(2.0)],
            q: vec![fin(2.0)],
            delta: vec![0.25],
            sigma: vec![1.25],
            k: 3.0,
            grid: None,
            dt: vec![0.01],
            seed: 20_240_917,
            instances: 0,
            three_d: false,
            quick,
            snapshots: false,
            out: None,
        };
        match experiment {
            Experiment::PartitionCheck => {
                c.instances = 1000;
                c.grid = Some(64);
            }
            Experiment::NormOracle => {
                c.freqs = vec![1.0, 3.0, 4.0, 6.0, 11.0, 16.0, 37.0];
                c.s = vec![0.5, 2.0];
                c.p = vec![fin(2.0), inf()];
                c.q = vec![fin(1.0), fin(2.0), inf()];
                c.grid = Some(256);
            }
            Experiment::LemmaTlemp => {
                c.freqs = if quick { vec![16.0, 32.0, 64.0, 128.0] } else { pow2_range(16, 512) };
                c.s = vec![0.5, 2.0];
                c.p = vec![fin(2.0), inf()];
                c.q = vec![fin(1.0), fin(2.0), inf()];
            }
            Experiment::LemmaTlemnp => {
                c.freqs = if quick { vec![8.0, 16.0, 32.0, 64.0] } else { pow2_range(8, 128) };
                c.delta = vec![0.25, 0.45];
                c.sigma = vec![1.25, 1.5];
                c.q = vec![fin(2.0), inf()];
                c.grid = Some(if quick { 16384 } else { 32768 });
            }
            Experiment::NudPeriodic => {
                c.freqs = if quick { pow2_range(16, 128) } else { pow2_range(16, 512) };
                c.times = vec![0.0, 0.25, 0.5, 1.0];
                c.dt = vec![0.01];
            }
            Experiment::NudNonperiodic => {
                c.freqs = if quick { vec![8.0, 10.0, 12.0, 16.0] } else { vec![8.0, 12.0, 16.0, 24.0, 32.0] };
                c.times = vec![0.5, 1.0];
                c.s = vec![2.5];
                c.delta = vec![0.25];
                c.sigma = vec![1.25];
                c.dt = vec![0.05];
                c.grid = Some(if quick { 1024 } else { 2048 });
            }
            Experiment::HolderVanishing => {
                c.freqs = vec![64.0];
                c.sigma = vec![0.25, 0.5, 0.75];
                c.grid = Some(256);
            }
            Experiment::SolverVerify => {
                c.freqs = vec![16.0, 32.0, 64.0];
                c.dt = if quick { vec![1e-2] } else { vec![1e-3] };
                c.grid = Some(256);
            }
            Experiment::TransportBound => {
                c.instances = 20;
                c.sigma = vec![1.5];
                c.grid = Some(64);
                c.dt = vec![0.02];
                c.times = vec![1.0];
            }
            Experiment::InequalitySuite => {
                c.instances = 50;
                c.s = vec![1.5];
                c.grid = Some(64);
            }
            Experiment::ResidualDecay => {
                c.freqs = if quick { vec![8.0, 10.0, 12.0, 16.0] } else { vec![8.0, 12.0, 16.0, 24.0, 32.0] };
                c.times = vec![0.5, 1.0];
                c.s = vec![2.5];
                c.delta = vec![0.25];
                c.sigma = vec![1.25];
                c.dt = vec![0.05];
                c.grid = Some(if quick { 1024 } else { 2048 });
            }
        }
        c
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> LabResult<()> {
        let bad = |what: &str| LabError::Usage(format!("key '{key}': cannot parse '{value}' as {what}"));
        match key {
            "experiment" => {
                if Experiment::parse(value)? != self.experiment {
                    return Err(LabError::Usage(format!(
                        "key 'experiment': '{value}' conflicts with the selected experiment '{}'",
                        self.experiment
                    )));
                }
            }
            "freqs" => self.freqs = parse_list(value).ok_or_else(|| bad("a list of numbers"))?,
            "times" => self.times = parse_list(value).ok_or_else(|| bad("a list of numbers"))?,
            "s" => self.s = parse_list(value).ok_or_else(|| bad("a list of numbers"))?,
            "delta" => self.delta = parse_list(value).ok_or_else(|| bad("a list of numbers"))?,
            "sigma" => self.sigma = parse_list(value).ok_or_else(|| bad("a list of numbers"))?,
            "dt" => self.dt = parse_list(value).ok_or_else(|| bad("a list of numbers"))?,
            "p" => self.p = parse_exponents(value).ok_or_else(|| bad("a list of exponents"))?,
            "q" => self.q = parse_exponents(value).ok_or_else(|| bad("a list of exponents"))?,
            "k" => self.k = value.trim().parse().map_err(|_| bad("a number"))?,
            "grid" => self.grid = Some(value.trim().parse().map_err(|_| bad("a grid size"))?),
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("an unsigned integer"))?,
            "instances" => self.instances = value.trim().parse().map_err(|_| bad("an unsigned integer"))?,
            "three_d" => self.three_d = parse_bool(value).ok_or_else(|| bad("a boolean"))?,
            "quick" => self.quick = parse_bool(value).ok_or_else(|| bad("a boolean"))?,
            "snapshots" => self.snapshots = parse_bool(value).ok_or_else(|| bad("a boolean"))?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => {
                return Err(LabError::Usage(format!(
                    "unknown key '{key}'; expected one of {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Checks sweep lists and the preconditions of the operations the
    /// experiment will call.
    pub fn validate(&self) -> LabResult<()> {
        let cfg = |msg: String| Err(LabError::Config(msg));
        let lists: [(&str, usize); 7] = [
            ("times", self.times.len()),
            ("s", self.s.len()),
            ("p", self.p.len()),
            ("q", self.q.len()),
            ("delta", self.delta.len()),
            ("sigma", self.sigma.len()),
            ("dt", self.dt.len()),
        ];
        for (name, len) in lists {
            if len == 0 {
                return cfg(format!("sweep list '{name}' is empty"));
            }
        }
        let needs_freqs = !matches!(
            self.experiment,
            Experiment::PartitionCheck | Experiment::TransportBound | Experiment::InequalitySuite
        );
        if needs_freqs && self.freqs.is_empty() {
            return cfg("sweep list 'freqs' is empty".into());
        }
        if self.freqs.iter().any(|f| !(f.is_finite() && *f >= 1.0)) {
            return cfg("frequencies must be finite and at least 1".into());
        }
        if self.dt.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return cfg("time steps must be positive".into());
        }
        if self.times.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return cfg("times must lie in [0, 1]".into());
        }
        if let Some(n) = self.grid {
            if n < 4 || !n.is_power_of_two() {
                return cfg(format!("grid size {n} must be a power of two >= 4"));
            }
        }
        match self.experiment {
            Experiment::NudNonperiodic | Experiment::ResidualDecay => {
                for &d in &self.delta {
                    if !(d > 0.0 && d < 0.5) {
                        return cfg(format!("delta = {d} violates 0 < delta < 1/2"));
                    }
                }
                for &s in &self.s {
                    if s <= 2.0 {
                        return cfg(format!("s = {s} violates s > 2"));
                    }
                    for &sig in &self.sigma {
                        if !(sig > 1.0 && sig < 2.0_f64.min(s - 1.0)) {
                            return cfg(format!("sigma = {sig} violates 1 < sigma < min(2, s - 1)"));
                        }
                    }
                    if self.experiment == Experiment::NudNonperiodic && self.k <= s {
                        return cfg(format!("k = {} violates k > s", self.k));
                    }
                }
                if self.freqs.len() < 4 {
                    return cfg("a rate fit needs at least 4 values of lambda".into());
                }
            }
            Experiment::LemmaTlemp | Experiment::LemmaTlemnp => {
                if self.freqs.len() < 4 {
                    return cfg("a rate fit needs at least 4 frequencies".into());
                }
                if self.experiment == Experiment::LemmaTlemnp && self.delta.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
                    return cfg("delta must lie in (0, 1)".into());
                }
            }
            Experiment::NudPeriodic => {
                if self.freqs.len() < 4 {
                    return cfg("a rate fit needs at least 4 frequencies".into());
                }
            }
            Experiment::HolderVanishing => {
                if self.sigma.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
                    return cfg("sigma must lie in (0, 1)".into());
                }
            }
            Experiment::TransportBound => {
                if self.instances == 0 {
                    return cfg("instances must be positive".into());
                }
            }
            Experiment::InequalitySuite => {
                if self.instances == 0 {
                    return cfg("corpus size must be positive".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The configuration as `key -> value` strings, in the file syntax.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let exps = |v: &[Exponent]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), self.experiment.name().into());
        m.insert("freqs".into(), list(&self.freqs));
        m.insert("times".into(), list(&self.times));
        m.insert("s".into(), list(&self.s));
        m.insert("p".into(), exps(&self.p));
        m.insert("q".into(), exps(&self.q));
        m.insert("delta".into(), list(&self.delta));
        m.insert("sigma".into(), list(&self.sigma));
        m.insert("k".into(), self.k.to_string());
        m.insert("grid".into(), self.grid.map(|n| n.to_string()).unwrap_or_else(|| "auto".into()));
        m.insert("dt".into(), list(&self.dt));
        m.insert("seed".into(), self.seed.to_string());
        m.insert("instances".into(), self.instances.to_string());
        m.insert("three_d".into(), self.three_d.to_string());
        m.insert("quick".into(), self.quick.to_string());
        m.insert("snapshots".into(), self.snapshots.to_string());
        m
    }
}

/// Builds a configuration from optional file text and `key=value` flags.
///
/// The experiment comes from `experiment` when given, otherwise from the
/// file's `experiment` key. Flags are applied after the file, so they win.
pub fn parse_config(
    experiment: Option<&str>,
    file_text: Option<&str>,
    flags: &[String],
    quick: bool,
) -> LabResult<ExperimentConfig> {
    let mut entries = Vec::new();
    if let Some(text) = file_text {
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Usage(format!("line {}: expected key = value, got '{line}'", line_no + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    for flag in flags {
        let (k, v) = flag
            .split_once('=')
            .ok_or_else(|| LabError::Usage(format!("--set expects key=value, got '{flag}'")))?;
        entries.push((k.trim().to_string(), v.trim().to_string()));
    }
    let quick = quick
        || entries
            .iter()
            .rev()
            .find(|(k, _)| k == "quick")
            .map(|(_, v)| parse_bool(v).unwrap_or(false))
            .unwrap_or(false);
    let name = match experiment {
        Some(n) => n.to_string(),
        None => entries
            .iter()
            .rev()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| LabError::Usage("no experiment given".into()))?,
    };
    let mut cfg = ExperimentConfig::defaults(Experiment::parse(&name)?, quick);
    for (k, v) in &entries {
        cfg.set(k, v)?;
    }
    cfg.quick = quick;
    cfg.validate()?;
    Ok(cfg)
}

fn pow2_range(lo: u32, hi: u32) -> Vec<f64> {
    let mut v = Vec::new();
    let mut n = lo;
    while n <= hi {
        v.push(n as f64);
        n *= 2;
    }
    v
}

fn parse_list(value: &str) -> Option<Vec<f64>> {
    let value = value.trim();
    if value.is_empty() {
        return Some(Vec::new());
    }
    value.split(',').map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite())).collect()
}

fn parse_exponents(value: &str) -> Option<Vec<Exponent>> {
    let value = value.trim();
    if value.is_empty() {
        return Some(Vec::new());
    }
    value
        .split(',')
        .map(|x| match x.trim() {
            "inf" | "infinity" => Some(Exponent::Infinity),
            v => v.parse::<f64>().ok().and_then(|p| Exponent::finite(p).ok()),
        })
        .collect()
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = parse_config(None, Some("experiment = lemma-tlemp\n"), &[], false).unwrap();
        assert_eq!(cfg.experiment, Experiment::LemmaTlemp);
        assert_eq!(cfg.freqs, vec![16.0, 32.0, 64.0, 128.0, 256.0, 512.0]);
        assert_eq!(cfg.q.len(), 3);
    }

    #[test]
    fn flags_override_file() {
        let flags = vec!["s=1.5".to_string()];
        let cfg = parse_config(None, Some("experiment=lemma-tlemp\ns = 0.5, 2\n"), &flags, false).unwrap();
        assert_eq!(cfg.s, vec![1.5]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(Some("norm-oracle"), Some("colour = blue"), &[], false).unwrap_err();
        assert!(matches!(&err, LabError::Usage(m) if m.contains("colour")), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn delta_out_of_range_is_a_config_error() {
        let flags = vec!["delta=0.7".to_string()];
        let err = parse_config(Some("nud-nonperiodic"), None, &flags, false).unwrap_err();
        assert!(matches!(&err, LabError::Config(m) if m.contains("0 < delta < 1/2")), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn empty_sweep_is_a_config_error() {
        let flags = vec!["freqs=".to_string()];
        let err = parse_config(Some("lemma-tlemp"), None, &flags, false).unwrap_err();
        assert!(matches!(err, LabError::Config(_)));
    }

    #[test]
    fn unknown_experiment_is_a_usage_error() {
        assert!(matches!(parse_config(Some("nope"), None, &[], false), Err(LabError::Usage(_))));
    }

    #[test]
    fn exponents_parse() {
        let flags = vec!["p=1, inf".to_string()];
        let cfg = parse_config(Some("norm-oracle"), None, &flags, false).unwrap();
        assert_eq!(cfg.p, vec![Exponent::Finite(1.0), Exponent::Infinity]);
    }
}
