use serde::Serialize;

use crate::dmc_core::{raw, CovertChannelPair};
use crate::error::{Error, Result};
use crate::ppm::mu_z;

/// First- and second-order channel constants, in nats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelConstants {
    /// `D(P₁‖P₀)`.
    pub d_p: f64,
    /// `Var[log P₁(Y)/P₀(Y)]` under `P₁`.
    pub v_p: f64,
    /// `E|log P₁(Y)/P₀(Y) − D_P|³` under `P₁`.
    pub t_p: f64,
    /// `D(Q₁‖Q₀)`.
    pub d_q: f64,
    pub chi2_q: f64,
    pub chi2_p: f64,
    pub mu_z: f64,
    /// Smallest positive `Q₀` entry.
    pub min_q0: f64,
    /// Whether `Q₀ ≪ Q₁`.
    pub q0_ll_q1: bool,
    #[serde(skip)]
    pub pair: CovertChannelPair,
}

impl ChannelConstants {
    /// Berry–Esseen constant `6T_P/V_P^{3/2}` of Bob's LLR.
    pub fn berry_esseen_p(&self) -> Result<f64> {
        if !(self.v_p > 0.0) {
            return Err(Error::DegenerateVariance("V_P = 0".into()));
        }
        Ok(6.0 * self.t_p / self.v_p.powf(1.5))
    }
}

pub fn channel_constants(pair: &CovertChannelPair) -> Result<ChannelConstants> {
    let (bob, willie) = (&pair.bob, &pair.willie);
    if bob.is_degenerate() || willie.is_degenerate() {
        return Err(Error::AssumptionViolation(
            "P₁ ≪ P₀ and Q₁ ≪ Q₀ are required".into(),
        ));
    }
    let mom = bob.llr_moments();
    let (q0, q1) = (willie.w0().probs(), willie.w1().probs());
    let chi2_q = raw::chi2(q1, q0)?;
    if !(chi2_q > 0.0) {
        return Err(Error::AssumptionViolation("Q₁ = Q₀".into()));
    }
    Ok(ChannelConstants {
        d_p: mom.mean,
        v_p: mom.variance,
        t_p: mom.third_abs_central_moment,
        d_q: raw::kl(q1, q0)?,
        chi2_q,
        chi2_p: raw::chi2(bob.w1().probs(), bob.w0().probs())?,
        mu_z: mu_z(willie),
        min_q0: willie.w0().min_positive(),
        q0_ll_q1: willie.w0_ll_w1(),
        pair: pair.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc_core::{BinaryDmc, FiniteDistribution};

    #[test]
    fn fig2_constants() {
        let c = channel_constants(&CovertChannelPair::bsc_pair(0.11, 0.45).unwrap()).unwrap();
        let l = (0.89f64 / 0.11).ln();
        assert!((c.d_p - 0.78 * l).abs() < 1e-12);
        assert!((c.d_p - 1.6308).abs() < 1e-4);
        assert!((c.v_p - 4.0 * 0.89 * 0.11 * l * l).abs() < 1e-12);
        assert!((c.v_p - 1.7118).abs() < 1e-4);
        assert!((c.chi2_q - 0.040404).abs() < 1e-6);
        assert_eq!(c.mu_z, 0.45);
        assert!(c.q0_ll_q1);
    }

    #[test]
    fn identical_bob_laws_give_zero_constants() {
        let w = BinaryDmc::new(
            FiniteDistribution::from_probs(vec![0.3, 0.7]).unwrap(),
            FiniteDistribution::from_probs(vec![0.3, 0.7]).unwrap(),
        )
        .unwrap();
        let pair = CovertChannelPair::new(w, BinaryDmc::bsc(0.4).unwrap()).unwrap();
        let c = channel_constants(&pair).unwrap();
        assert_eq!((c.d_p, c.v_p, c.t_p), (0.0, 0.0, 0.0));
        assert!(c.berry_esseen_p().is_err());
    }

    #[test]
    fn degenerate_channels_are_rejected() {
        let noiseless = BinaryDmc::degenerate(
            FiniteDistribution::from_probs(vec![1.0, 0.0]).unwrap(),
            FiniteDistribution::from_probs(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let pair = CovertChannelPair::new(noiseless, BinaryDmc::bsc(0.4).unwrap()).unwrap();
        assert!(matches!(
            channel_constants(&pair),
            Err(Error::AssumptionViolation(_))
        ));
    }
}
