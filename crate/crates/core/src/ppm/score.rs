use serde::Serialize;

use crate::dmc_core::BinaryDmc;

/// Per-symbol radiometer score `A(z) = (Q₁(z) − Q₀(z))/Q₀(z)`, set to 0 where `Q₀(z) = 0`
/// (such symbols never occur when `Q₁ ≪ Q₀`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreA {
    values: Vec<f64>,
}

impl ScoreA {
    pub fn new(willie: &BinaryDmc) -> Self {
        let values = (0..willie.output_size())
            .map(|z| {
                let (q0, q1) = (willie.w0().prob(z), willie.w1().prob(z));
                if q0 > 0.0 {
                    (q1 - q0) / q0
                } else {
                    0.0
                }
            })
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `E[A^k]` under `Q₀` (`input = 0`) or `Q₁` (`input = 1`).
    pub fn moment(&self, willie: &BinaryDmc, input: u8, k: i32) -> f64 {
        willie
            .law(input)
            .probs()
            .iter()
            .zip(&self.values)
            .map(|(p, a)| p * a.powi(k))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc_core::{raw, FiniteDistribution};

    #[test]
    fn score_identities() {
        let w = BinaryDmc::new(
            FiniteDistribution::from_probs(vec![0.5, 0.3, 0.2]).unwrap(),
            FiniteDistribution::from_probs(vec![0.2, 0.3, 0.5]).unwrap(),
        )
        .unwrap();
        let a = ScoreA::new(&w);
        let chi2 = raw::chi2(w.w1().probs(), w.w0().probs()).unwrap();
        assert!(a.moment(&w, 0, 1).abs() < 1e-15);
        assert!((a.moment(&w, 0, 2) - chi2).abs() < 1e-15);
        assert!((a.moment(&w, 1, 1) - chi2).abs() < 1e-15);
    }
}
