use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use super::distribution::FiniteDistribution;
use super::sums::GaussianMoments;
use crate::error::{Error, Result};

/// Magnitude at which log-likelihood ratios of degenerate test channels are clamped.
pub const LLR_CLAMP: f64 = 700.0;

/// A binary-input DMC described by its two output laws `W(·|0)` and `W(·|1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryDmc {
    w0: FiniteDistribution,
    w1: FiniteDistribution,
    degenerate: bool,
}

impl BinaryDmc {
    /// Checked constructor: both laws share an alphabet and `W(·|1) ≪ W(·|0)`.
    pub fn new(w0: FiniteDistribution, w1: FiniteDistribution) -> Result<Self> {
        let ch = Self::build(w0, w1, false)?;
        if let Some(y) = (0..ch.w0.len()).find(|&y| ch.w1.prob(y) > 0.0 && ch.w0.prob(y) == 0.0) {
            return Err(Error::AssumptionViolation(format!(
                "W({y}|1) > 0 while W({y}|0) = 0"
            )));
        }
        Ok(ch)
    }

    /// Unchecked constructor for test doubles such as noiseless channels. Infinite
    /// log-likelihood ratios are clamped to `±LLR_CLAMP`.
    pub fn degenerate(w0: FiniteDistribution, w1: FiniteDistribution) -> Result<Self> {
        Self::build(w0, w1, true)
    }

    fn build(w0: FiniteDistribution, w1: FiniteDistribution, degenerate: bool) -> Result<Self> {
        if !w0.same_alphabet(&w1) {
            return Err(Error::AlphabetMismatch(
                "W(·|0) and W(·|1) differ in alphabet".into(),
            ));
        }
        Ok(Self { w0, w1, degenerate })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "crossover {p} outside [0, 1]"
            )));
        }
        let w0 = FiniteDistribution::from_probs(vec![1.0 - p, p])?;
        let w1 = FiniteDistribution::from_probs(vec![p, 1.0 - p])?;
        if p == 0.0 || p == 1.0 {
            Self::degenerate(w0, w1)
        } else {
            Self::new(w0, w1)
        }
    }

    pub fn w0(&self) -> &FiniteDistribution {
        &self.w0
    }

    pub fn w1(&self) -> &FiniteDistribution {
        &self.w1
    }

    pub fn output_size(&self) -> usize {
        self.w0.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn law(&self, x: u8) -> &FiniteDistribution {
        if x == 0 {
            &self.w0
        } else {
            &self.w1
        }
    }

    /// `log W(y|1)/W(y|0)`, clamped to `±LLR_CLAMP`.
    pub fn llr(&self, y: usize) -> f64 {
        let (a, b) = (self.w1.prob(y), self.w0.prob(y));
        let v = if a == 0.0 && b == 0.0 {
            0.0
        } else if b == 0.0 {
            LLR_CLAMP
        } else if a == 0.0 {
            -LLR_CLAMP
        } else {
            (a / b).ln()
        };
        v.clamp(-LLR_CLAMP, LLR_CLAMP)
    }

    pub fn llr_vector(&self) -> Vec<f64> {
        (0..self.output_size()).map(|y| self.llr(y)).collect()
    }

    /// Moments of `log W(Y|1)/W(Y|0)` with `Y ~ W(·|1)`: mean `D`, variance `V`, third absolute
    /// central moment `T`.
    pub fn llr_moments(&self) -> GaussianMoments {
        let atoms: Vec<(f64, f64)> = (0..self.output_size())
            .map(|y| (self.llr(y), self.w1.prob(y)))
            .collect();
        GaussianMoments::of_atoms(&atoms)
    }

    /// `W^⊗n(z|x)` for an output word of symbol indices and an input given by its sorted,
    /// 1-based pulse positions.
    pub fn word_prob(&self, z: &[usize], pulses: &[usize]) -> f64 {
        let mut p = 1.0;
        let mut next = pulses.iter().peekable();
        for (i, &zi) in z.iter().enumerate() {
            if next.peek() == Some(&&(i + 1)) {
                next.next();
                p *= self.w1.prob(zi);
            } else {
                p *= self.w0.prob(zi);
            }
        }
        p
    }

    /// Output pmf over all `|Z|^n` words, first letter most significant, of a uniform
    /// mixture of inputs given as pulse-position lists.
    pub fn mixture_output_probs(
        &self,
        n: usize,
        inputs: &[Vec<usize>],
        cap: u128,
    ) -> Result<Vec<f64>> {
        let k = self.output_size();
        let words = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if words > cap {
            return Err(Error::CombinatorialBlowup { count: words, cap });
        }
        if inputs.is_empty() {
            return Err(Error::InvalidParams("empty input mixture".into()));
        }
        let weight = 1.0 / inputs.len() as f64;
        Ok((0..words as usize)
            .into_par_iter()
            .map_init(
                || vec![0usize; n],
                |z, idx| {
                    let mut rest = idx;
                    for d in z.iter_mut().rev() {
                        *d = rest % k;
                        rest /= k;
                    }
                    inputs.iter().map(|x| self.word_prob(z, x)).sum::<f64>() * weight
                },
            )
            .collect())
    }

    /// Whether `W(·|0) ≪ W(·|1)`.
    pub fn w0_ll_w1(&self) -> bool {
        (0..self.output_size()).all(|y| self.w0.prob(y) == 0.0 || self.w1.prob(y) > 0.0)
    }
}

/// Bob's channel `(P₀, P₁)` and Willie's channel `(Q₀, Q₁)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovertChannelPair {
    pub bob: BinaryDmc,
    pub willie: BinaryDmc,
}

impl CovertChannelPair {
    /// Requires `P₁ ≪ P₀`, `Q₁ ≪ Q₀` (enforced by checked channels) and `Q₁ ≠ Q₀`.
    pub fn new(bob: BinaryDmc, willie: BinaryDmc) -> Result<Self> {
        if willie.w0 == willie.w1 {
            return Err(Error::AssumptionViolation(
                "Q₁ = Q₀ leaves nothing to hide".into(),
            ));
        }
        Ok(Self { bob, willie })
    }

    /// Both channels binary symmetric.
    pub fn bsc_pair(p_m: f64, p_w: f64) -> Result<Self> {
        Self::new(BinaryDmc::bsc(p_m)?, BinaryDmc::bsc(p_w)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn llr_moments_of_bsc() {
        let m = BinaryDmc::bsc(0.11).unwrap().llr_moments();
        let l = (0.89f64 / 0.11).ln();
        assert!((m.mean - 0.78 * l).abs() < 1e-12);
        assert!((m.variance - 4.0 * 0.89 * 0.11 * l * l).abs() < 1e-12);
    }

    #[test]
    fn mixture_of_two_pulses() {
        let ch = BinaryDmc::bsc(0.25).unwrap();
        let probs = ch
            .mixture_output_probs(2, &[vec![1], vec![2]], 1 << 20)
            .unwrap();
        // words 00, 01, 10, 11
        let expect = [0.1875, 0.3125, 0.3125, 0.1875];
        for (a, b) in probs.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(ch.mixture_output_probs(30, &[vec![1]], 1 << 20).is_err());
    }

    #[test]
    fn rejects_singular_channels() {
        let w0 = FiniteDistribution::from_probs(vec![1.0, 0.0]).unwrap();
        let w1 = FiniteDistribution::from_probs(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            BinaryDmc::new(w0.clone(), w1.clone()),
            Err(Error::AssumptionViolation(_))
        ));
        let ch = BinaryDmc::degenerate(w0, w1).unwrap();
        assert_eq!(ch.llr(1), LLR_CLAMP);
        assert!((ch.llr(0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn identical_willie_laws_rejected() {
        assert!(CovertChannelPair::bsc_pair(0.1, 0.5).is_err());
        assert!(CovertChannelPair::bsc_pair(0.11, 0.45).is_ok());
    }

    #[test]
    fn noiseless_bsc_is_a_test_double() {
        let ch = BinaryDmc::bsc(0.0).unwrap();
        assert!(ch.is_degenerate());
        assert_eq!(ch.llr(0), -LLR_CLAMP);
        assert_eq!(ch.llr(1), LLR_CLAMP);
    }
}
