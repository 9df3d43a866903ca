use serde::Serialize;

use super::params::PpmParams;
use super::score::ScoreA;
use crate::dmc_core::same_value;
use crate::dmc_core::{
    beta_alpha_items_with_budget, iid_sum_distribution_with_cap, raw, Alphabet, BetaAlpha,
    BinaryDmc, FiniteDistribution, SumDistribution, DEFAULT_TYPE_CLASS_CAP, NODE_BUDGET,
};
use crate::error::{Error, Result};

/// Largest `|Z|^n` the full-enumeration oracles accept.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// Law of the block log-ratio `C = log(1 + (1/m)ΣA(Z_j))` for one PPM window.
///
/// `under_q0` is the law with `Z ~ Q₀^⊗m`; when some window has `1 + B = 0` (possible only if
/// `Q₀ ≪ Q₁` fails) that mass is kept apart in `q0_singular_mass` and `under_q0` is a
/// sub-probability law. `under_ppm` is the law with `Z ~ P_Z^{m,1}`, built by placing the
/// pulse in the first position (every moment of `C` is permutation invariant).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockLlrLaw {
    pub m: usize,
    pub under_q0: SumDistribution,
    pub under_ppm: SumDistribution,
    pub q0_singular_mass: f64,
}

pub fn ppm_block_llr_law(willie: &BinaryDmc, m: usize) -> Result<BlockLlrLaw> {
    ppm_block_llr_law_with_cap(willie, m, DEFAULT_TYPE_CLASS_CAP)
}

pub fn ppm_block_llr_law_with_cap(willie: &BinaryDmc, m: usize, cap: u128) -> Result<BlockLlrLaw> {
    if m == 0 {
        return Err(Error::InvalidParams("window size m = 0".into()));
    }
    let a = ScoreA::new(willie);
    let sum_q0 = iid_sum_distribution_with_cap(a.values(), willie.w0(), m, cap)?;
    let mut singular = 0.0;
    let mf = m as f64;
    let rho_floor = 0.5 * min_positive_ratio(willie) / mf;
    let mut q0_atoms = Vec::with_capacity(sum_q0.atoms().len());
    for &(s, p) in sum_q0.atoms() {
        if 1.0 + s / mf < rho_floor {
            singular += p;
        } else {
            q0_atoms.push(((s / mf).ln_1p(), p));
        }
    }

    let rest = iid_sum_distribution_with_cap(a.values(), willie.w0(), m - 1, cap)?;
    let mut ppm_atoms = Vec::new();
    for (z, &q1) in willie.w1().probs().iter().enumerate() {
        if q1 > 0.0 {
            for &(s, p) in rest.atoms() {
                ppm_atoms.push((((a.values()[z] + s) / mf).ln_1p(), q1 * p));
            }
        }
    }
    Ok(BlockLlrLaw {
        m,
        under_q0: SumDistribution::from_atoms(q0_atoms, m),
        under_ppm: SumDistribution::from_atoms(ppm_atoms, m),
        q0_singular_mass: singular,
    })
}

fn min_positive_ratio(willie: &BinaryDmc) -> f64 {
    (0..willie.output_size())
        .filter(|&z| willie.w0().prob(z) > 0.0 && willie.w1().prob(z) > 0.0)
        .map(|z| willie.w1().prob(z) / willie.w0().prob(z))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn check_q1_ll_q0(willie: &BinaryDmc) -> Result<()> {
    if (0..willie.output_size()).any(|z| willie.w1().prob(z) > 0.0 && willie.w0().prob(z) == 0.0) {
        return Err(Error::AbsoluteContinuityViolation("Q₁ ≪ Q₀ fails".into()));
    }
    Ok(())
}

/// One level set of the likelihood ratio `P_Z^{n,ℓ}/Q₀^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrClass {
    /// `log P_Z^{n,ℓ}(z)/Q₀^⊗n(z)` on the class.
    pub llr: f64,
    pub q0: f64,
    pub p: f64,
}

/// The likelihood-ratio level sets of `P_Z^{n,ℓ}` against `Q₀^⊗n`, plus the `Q₀` mass of the
/// words that `P_Z^{n,ℓ}` never produces.
///
/// Divergence and variational distance depend on the two laws only through these classes.
/// Missed-detection probabilities are taken over tests that are unions of classes, i.e.
/// tests that look at the word only through its likelihood ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrClasses {
    pub classes: Vec<LrClass>,
    pub q0_singular: f64,
}

impl LrClasses {
    /// Classes of `P_Z^{n,ℓ}` from the block product structure.
    pub fn from_blocks(willie: &BinaryDmc, params: &PpmParams, cap: u128) -> Result<Self> {
        check_q1_ll_q0(willie)?;
        let block = ppm_block_llr_law_with_cap(willie, params.m, cap)?;
        let mut law = SumDistribution::zero();
        let mut base = block.under_q0.clone();
        let mut e = params.ell;
        while e > 0 {
            if e & 1 == 1 {
                law = law.convolve_with_cap(&base, cap)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.convolve_with_cap(&base, cap)?;
            }
        }
        let classes = law
            .atoms()
            .iter()
            .map(|&(l, q0)| LrClass {
                llr: l,
                q0,
                p: l.exp() * q0,
            })
            .collect();
        let regular = 1.0 - block.q0_singular_mass;
        Ok(Self {
            classes,
            q0_singular: 1.0 - regular.powi(params.ell as i32),
        })
    }

    /// Classes from two pmfs over the same enumerated alphabet.
    pub fn from_pmfs(p: &[f64], q0: &[f64]) -> Result<Self> {
        if p.len() != q0.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} vs {} atoms",
                p.len(),
                q0.len()
            )));
        }
        let mut singular = 0.0;
        let mut atoms = Vec::with_capacity(p.len());
        for (&pi, &qi) in p.iter().zip(q0) {
            match (pi > 0.0, qi > 0.0) {
                (true, true) => atoms.push(LrClass {
                    llr: (pi / qi).ln(),
                    q0: qi,
                    p: pi,
                }),
                (false, true) => singular += qi,
                (true, false) => {
                    return Err(Error::AbsoluteContinuityViolation(
                        "P(z) > 0 = Q₀(z)".into(),
                    ))
                }
                (false, false) => {}
            }
        }
        atoms.sort_by(|a, b| a.llr.total_cmp(&b.llr));
        let mut classes: Vec<LrClass> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match classes.last_mut() {
                Some(c) if same_value(c.llr, a.llr) => {
                    c.q0 += a.q0;
                    c.p += a.p;
                }
                _ => classes.push(a),
            }
        }
        Ok(Self {
            classes,
            q0_singular: singular,
        })
    }

    /// `D(P‖Q₀)`.
    pub fn divergence(&self) -> f64 {
        self.classes.iter().map(|c| c.p * c.llr).sum()
    }

    /// `V(P, Q₀)`.
    pub fn total_variation(&self) -> f64 {
        let regular: f64 = self.classes.iter().map(|c| (c.p - c.q0).abs()).sum();
        (0.5 * (regular + self.q0_singular)).min(1.0)
    }

    /// `β_α(Q₀, P)` over unions of classes: the smallest `P(T)` with `Q₀(complement of T) ≤ α`.
    pub fn beta(&self, alpha: f64) -> Result<BetaAlpha> {
        self.beta_with_budget(alpha, NODE_BUDGET)
    }

    pub fn beta_with_budget(&self, alpha: f64, budget: u64) -> Result<BetaAlpha> {
        let mut items: Vec<(f64, f64)> = self.classes.iter().map(|c| (c.q0, c.p)).collect();
        if self.q0_singular > 0.0 {
            items.push((self.q0_singular, 0.0));
        }
        beta_alpha_items_with_budget(alpha, &items, budget)
    }
}

/// `D(P_Z^{n,ℓ}‖Q₀^⊗n) = ℓ·E_{Q₀^⊗m}[(1+B) log(1+B)]`.
pub fn ppm_divergence_exact(willie: &BinaryDmc, params: &PpmParams) -> Result<f64> {
    check_q1_ll_q0(willie)?;
    let block = ppm_block_llr_law(willie, params.m)?;
    let d: f64 = block
        .under_q0
        .atoms()
        .iter()
        .map(|&(c, p)| p * c.exp() * c)
        .sum();
    Ok(params.ell as f64 * d)
}

/// `V(P_Z^{n,ℓ}, Q₀^⊗n)` from the likelihood-ratio classes.
pub fn ppm_tv_exact(willie: &BinaryDmc, params: &PpmParams) -> Result<f64> {
    Ok(LrClasses::from_blocks(willie, params, DEFAULT_TYPE_CLASS_CAP)?.total_variation())
}

/// `β_α(Q₀^⊗n, P_Z^{n,ℓ})` over likelihood-ratio tests.
pub fn ppm_beta_exact(willie: &BinaryDmc, params: &PpmParams, alpha: f64) -> Result<BetaAlpha> {
    LrClasses::from_blocks(willie, params, DEFAULT_TYPE_CLASS_CAP)?.beta(alpha)
}

/// `P_Z^{n,ℓ}` over all `|Z|^n` words, by averaging `W^⊗n(·|x)` over the whole PPM support.
pub fn ppm_output_distribution(
    willie: &BinaryDmc,
    params: &PpmParams,
) -> Result<FiniteDistribution> {
    let inputs = params.support(ENUMERATION_CAP)?;
    let probs = willie.mixture_output_probs(params.n, &inputs, ENUMERATION_CAP)?;
    FiniteDistribution::from_computed(word_alphabet(willie, params.n), probs)
}

pub fn word_alphabet(ch: &BinaryDmc, n: usize) -> Alphabet {
    let base = (0..ch.output_size())
        .map(|z| ch.w0().alphabet().label(z))
        .collect();
    Alphabet::Words { base, len: n }
}

/// `E_{P_Y}[P_Y/Q_Y]` for the PPM output `P_Y = P_Y^{n,ℓ}` at Bob against `Q_Y = P₀^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioExpectation {
    /// `(1 + χ²(P₁‖P₀)/m)^ℓ`.
    pub exact: f64,
    /// `exp(ℓ(ℓ+1)χ²(P₁‖P₀)/n)`; an upper bound on `exact` whenever `ℓ(ℓ+1) ≤ n`.
    pub bound: f64,
}

pub fn ppm_ratio_expectation(bob: &BinaryDmc, params: &PpmParams) -> Result<RatioExpectation> {
    let chi2 = raw::chi2(bob.w1().probs(), bob.w0().probs())?;
    let (l, n, m) = (params.ell as f64, params.n as f64, params.m as f64);
    Ok(RatioExpectation {
        exact: (1.0 + chi2 / m).powf(l),
        bound: (l * (l + 1.0) * chi2 / n).exp(),
    })
}
