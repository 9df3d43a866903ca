use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σp − 1|` accepted for user-supplied pmfs.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Looser tolerance for pmfs that are the output of long floating point sums.
const COMPUTED_TOLERANCE: f64 = 1e-9;

/// Symbol labels of a finite alphabet.
///
/// `Words` is the alphabet of all length-`len` strings over `base`, enumerated in
/// lexicographic order with the first letter most significant. Labels are built on demand so
/// that product alphabets with a million entries stay cheap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alphabet {
    Labels(Vec<String>),
    Words { base: Vec<String>, len: usize },
}

impl Alphabet {
    pub fn indexed(k: usize) -> Self {
        Alphabet::Labels((0..k).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            Alphabet::Labels(v) => v.len(),
            Alphabet::Words { base, len } => base.len().pow(*len as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            Alphabet::Labels(v) => v[i].clone(),
            Alphabet::Words { base, len } => {
                let k = base.len();
                let mut digits = vec![0usize; *len];
                let mut rest = i;
                for d in digits.iter_mut().rev() {
                    *d = rest % k;
                    rest /= k;
                }
                digits
                    .iter()
                    .map(|&d| base[d].as_str())
                    .collect::<Vec<_>>()
                    .join("")
            }
        }
    }

    fn check_unique(&self) -> Result<()> {
        let labels: &[String] = match self {
            Alphabet::Labels(v) => v,
            Alphabet::Words { base, .. } => base,
        };
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams(
                "alphabet labels must be unique".into(),
            ));
        }
        Ok(())
    }
}

/// A probability mass function over a small labeled alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        Self::with_alphabet(Alphabet::Labels(labels), probs, PMF_TOLERANCE)
    }

    /// Distribution over the indexed alphabet `"0", "1", …`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let k = probs.len();
        Self::with_alphabet(Alphabet::indexed(k), probs, PMF_TOLERANCE)
    }

    /// Constructor for pmfs produced by large numerical sums; accepts a `1e-9` mass defect.
    pub fn from_computed(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        Self::with_alphabet(alphabet, probs, COMPUTED_TOLERANCE)
    }

    fn with_alphabet(alphabet: Alphabet, probs: Vec<f64>, tol: f64) -> Result<Self> {
        if alphabet.len() != probs.len() {
            return Err(Error::InvalidParams(format!(
                "{} labels for {} probabilities",
                alphabet.len(),
                probs.len()
            )));
        }
        if probs.is_empty() {
            return Err(Error::InvalidParams("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "probability {p} is not in [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidParams(format!(
                "probabilities sum to {total}"
            )));
        }
        alphabet.check_unique()?;
        Ok(Self { alphabet, probs })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("empty alphabet".into()));
        }
        Self::from_probs(vec![1.0 / k as f64; k])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Smallest strictly positive probability (the `μ` of a random variable).
    pub fn min_positive(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn expectation(&self, f: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(f)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, v)| p * v)
            .sum()
    }

    pub fn same_alphabet(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
    }

    /// The `n`-fold product distribution on words of length `n`.
    pub fn power(&self, n: usize) -> Result<Self> {
        let base = match &self.alphabet {
            Alphabet::Labels(v) => v.clone(),
            Alphabet::Words { .. } => {
                return Err(Error::InvalidParams("power of a product alphabet".into()))
            }
        };
        let probs = product_probs(&vec![self.probs.as_slice(); n]);
        Self::from_computed(Alphabet::Words { base, len: n }, probs)
    }
}

/// Joint pmf of independent coordinates, first coordinate most significant.
pub(crate) fn product_probs(factors: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for &a in &out {
            for &b in f.iter() {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_pmfs() {
        assert!(FiniteDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::from_probs(vec![-0.1, 1.1]).is_err());
        assert!(FiniteDistribution::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
        assert!(FiniteDistribution::from_probs(vec![]).is_err());
    }

    #[test]
    fn word_labels_are_lexicographic() {
        let d = FiniteDistribution::new(vec!["0".into(), "1".into()], vec![0.25, 0.75]).unwrap();
        let p = d.power(3).unwrap();
        assert_eq!(p.len(), 8);
        assert_eq!(p.alphabet().label(0), "000");
        assert_eq!(p.alphabet().label(5), "101");
        assert!((p.prob(5) - 0.75 * 0.25 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn min_positive_skips_zeros() {
        let d = FiniteDistribution::from_probs(vec![0.0, 0.3, 0.7]).unwrap();
        assert_eq!(d.min_positive(), 0.3);
    }
}
