use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::coding::Metric;
use crate::dmc_core::{BinaryDmc, CovertChannelPair, FiniteDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    /// Converts a value in nats.
    pub fn scale(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Unit::Nats),
            "bits" => Ok(Unit::Bits),
            _ => Err(Error::ConfigError(format!(
                "unit must be nats or bits, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    #[default]
    Kl,
    Tv,
    Beta,
}

impl MetricName {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Kl => "kl",
            MetricName::Tv => "tv",
            MetricName::Beta => "beta",
        }
    }
}

/// An experiment description read from flat `key = value` lines.
///
/// Keys: `p_m`, `p_w`, `bob_w0`, `bob_w1`, `willie_w0`, `willie_w1` (comma-separated pmfs,
/// overriding the BSC parameters), `metric`, `eps`, `delta`, `alpha`, `rho`, `n_grid`,
/// `seed`, `out`, `unit`, `trials`, `messages`, `keys`, `ell`, `gamma`. `#` starts a comment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub p_m: f64,
    pub p_w: f64,
    pub bob_w0: Option<Vec<f64>>,
    pub bob_w1: Option<Vec<f64>>,
    pub willie_w0: Option<Vec<f64>>,
    pub willie_w1: Option<Vec<f64>>,
    pub metric: MetricName,
    pub eps: f64,
    pub delta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub n_grid: Vec<usize>,
    pub seed: u64,
    pub out: Option<String>,
    pub unit: Unit,
    pub trials: u64,
    pub messages: usize,
    pub keys: usize,
    pub ell: Option<usize>,
    pub gamma: Option<f64>,
}

/// `10²..10⁸` with four points per decade.
pub fn default_n_grid() -> Vec<usize> {
    (0..=24)
        .map(|k| 10f64.powf(2.0 + k as f64 / 4.0).round() as usize)
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p_m: 0.11,
            p_w: 0.45,
            bob_w0: None,
            bob_w1: None,
            willie_w0: None,
            willie_w1: None,
            metric: MetricName::Kl,
            eps: 1e-3,
            delta: 1e-2,
            alpha: 0.2,
            rho: 0.1,
            n_grid: default_n_grid(),
            seed: 0,
            out: None,
            unit: Unit::Nats,
            trials: 10_000,
            messages: 4,
            keys: 2,
            ell: None,
            gamma: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::ConfigError(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| parse(key, x.trim())).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ConfigError(format!("line {}: expected key = value", no + 1))
            })?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "p_m" => c.p_m = parse(key, v)?,
                "p_w" => c.p_w = parse(key, v)?,
                "bob_w0" => c.bob_w0 = Some(parse_list(key, v)?),
                "bob_w1" => c.bob_w1 = Some(parse_list(key, v)?),
                "willie_w0" => c.willie_w0 = Some(parse_list(key, v)?),
                "willie_w1" => c.willie_w1 = Some(parse_list(key, v)?),
                "metric" => {
                    c.metric = match v {
                        "kl" => MetricName::Kl,
                        "tv" => MetricName::Tv,
                        "beta" => MetricName::Beta,
                        _ => {
                            return Err(Error::ConfigError(format!(
                                "metric must be kl, tv or beta, got {v:?}"
                            )))
                        }
                    }
                }
                "eps" => c.eps = parse(key, v)?,
                "delta" => c.delta = parse(key, v)?,
                "alpha" => c.alpha = parse(key, v)?,
                "rho" => c.rho = parse(key, v)?,
                "n_grid" => c.n_grid = parse_list(key, v)?,
                "seed" => c.seed = parse(key, v)?,
                "out" => c.out = Some(v.to_string()),
                "unit" => c.unit = v.parse()?,
                "trials" => c.trials = parse(key, v)?,
                "messages" => c.messages = parse(key, v)?,
                "keys" => c.keys = parse(key, v)?,
                "ell" => c.ell = Some(parse(key, v)?),
                "gamma" => c.gamma = Some(parse(key, v)?),
                _ => {
                    return Err(Error::ConfigError(format!(
                        "line {}: unknown key {key:?}",
                        no + 1
                    )))
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty()
            || self.n_grid.windows(2).any(|w| w[0] >= w[1])
            || self.n_grid[0] == 0
        {
            return Err(Error::ConfigError(
                "n_grid must be a strictly increasing list of positive integers".into(),
            ));
        }
        for (name, v) in [
            ("eps", self.eps),
            ("delta", self.delta),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::ConfigError(format!(
                    "{name} = {v} must lie in (0, 1)"
                )));
            }
        }
        if !(self.rho > 0.0) {
            return Err(Error::ConfigError(format!(
                "rho = {} must be positive",
                self.rho
            )));
        }
        self.pair().map(|_| ())
    }

    /// Writes every key; `parse(to_text())` reproduces the config exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "p_m = {}", self.p_m);
        let _ = writeln!(s, "p_w = {}", self.p_w);
        for (k, v) in [
            ("bob_w0", &self.bob_w0),
            ("bob_w1", &self.bob_w1),
            ("willie_w0", &self.willie_w0),
            ("willie_w1", &self.willie_w1),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {}", join(v));
            }
        }
        let _ = writeln!(s, "metric = {}", self.metric.as_str());
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "n_grid = {}", join(&self.n_grid));
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {o}");
        }
        let _ = writeln!(s, "unit = {}", self.unit.as_str());
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "messages = {}", self.messages);
        let _ = writeln!(s, "keys = {}", self.keys);
        if let Some(l) = self.ell {
            let _ = writeln!(s, "ell = {l}");
        }
        if let Some(g) = self.gamma {
            let _ = writeln!(s, "gamma = {g}");
        }
        s
    }

    pub fn metric(&self) -> Metric {
        match self.metric {
            MetricName::Kl => Metric::Kl,
            MetricName::Tv => Metric::Tv,
            MetricName::Beta => Metric::Beta(self.alpha),
        }
    }

    pub fn pair(&self) -> Result<CovertChannelPair> {
        let explicit = |w0: &Option<Vec<f64>>,
                        w1: &Option<Vec<f64>>,
                        who: &str|
         -> Result<Option<BinaryDmc>> {
            match (w0, w1) {
                (None, None) => Ok(None),
                (Some(a), Some(b)) => {
                    let err = |e: Error| Error::ConfigError(format!("{who}: {e}"));
                    let a = FiniteDistribution::from_probs(a.clone()).map_err(err)?;
                    let b = FiniteDistribution::from_probs(b.clone()).map_err(err)?;
                    BinaryDmc::new(a, b).map(Some).map_err(err)
                }
                _ => Err(Error::ConfigError(format!(
                    "{who}: give both {who}_w0 and {who}_w1"
                ))),
            }
        };
        let cfg = |e: Error| Error::ConfigError(e.to_string());
        let bob = match explicit(&self.bob_w0, &self.bob_w1, "bob")? {
            Some(b) => b,
            None => BinaryDmc::bsc(self.p_m).map_err(cfg)?,
        };
        let willie = match explicit(&self.willie_w0, &self.willie_w1, "willie")? {
            Some(w) => w,
            None => BinaryDmc::bsc(self.p_w).map_err(cfg)?,
        };
        CovertChannelPair::new(bob, willie).map_err(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::default();
        assert_eq!(c.n_grid.first(), Some(&100));
        assert_eq!(c.n_grid.last(), Some(&100_000_000));
        let mut d = c.clone();
        d.bob_w0 = Some(vec![0.7, 0.2, 0.1]);
        d.bob_w1 = Some(vec![0.1, 0.2, 0.7]);
        d.ell = Some(3);
        d.gamma = Some(0.1 + 0.2);
        d.unit = Unit::Bits;
        d.metric = MetricName::Beta;
        assert_eq!(ExperimentConfig::parse(&d.to_text()).unwrap(), d);
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "n_grid = 10,10",
            "n_grid = 100,10",
            "eps = 2",
            "colour = blue",
            "p_m",
            "metric = hellinger",
            "bob_w0 = 0.5,0.5",
            "unit = furlongs",
            "p_w = 0.5",
        ] {
            assert!(
                matches!(ExperimentConfig::parse(text), Err(Error::ConfigError(_))),
                "{text}"
            );
        }
        let c = ExperimentConfig::parse("# comment\n\n n_grid = 64 # one point\nseed=7").unwrap();
        assert_eq!((c.n_grid, c.seed), (vec![64], 7));
    }
}
