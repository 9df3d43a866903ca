use serde::Serialize;

use super::exact::check_q1_ll_q0;
use super::moments::closed_form_b_moments;
use super::params::PpmParams;
use super::score::ScoreA;
use crate::dmc_core::{
    berry_esseen_bound, iid_sum_distribution_with_cap, q_function, q_inverse, raw, BinaryDmc,
    SumDistribution, DEFAULT_TYPE_CLASS_CAP,
};
use crate::error::{Error, Result};

/// Order of the remainder every leading-term bound below leaves unevaluated.
pub const PPM_RESIDUAL_ORDER: &str = "O(1/sqrt(n))";

/// A leading-term covertness bound for `P_Z^{n,ℓ}` against `Q₀^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PpmBound {
    /// The displayed leading expression; the `O(1/√n)` remainder is not added.
    pub value: f64,
    /// A rigorous, explicitly evaluated remainder when one is available.
    pub remainder: Option<f64>,
    /// `false` when `ℓ > m`, outside the `ℓ = Θ(m)` regime.
    pub in_regime: bool,
}

fn chi2_q(willie: &BinaryDmc) -> Result<f64> {
    raw::chi2(willie.w1().probs(), willie.w0().probs())
}

fn regime(n: usize, ell: usize) -> bool {
    ell == 0 || ell <= n / ell
}

fn check_q0_ll_q1(willie: &BinaryDmc) -> Result<()> {
    if !willie.w0_ll_w1() {
        return Err(Error::AbsoluteContinuityViolation("Q₀ ≪ Q₁ fails".into()));
    }
    Ok(())
}

/// `D(P_Z^{n,ℓ}‖Q₀^⊗n) ≲ ℓ²χ²(Q₁‖Q₀)/(2n)`.
///
/// The remainder is `ℓχ²/(2m) − ℓ²χ²/(2n) + (ℓ/2)(E[B⁴])^{3/4}`, from
/// `(1+x)log(1+x) ≤ x + x²/2 + max(0, −x)³/2` on `x ≥ −1`.
pub fn ppm_divergence_bound(willie: &BinaryDmc, n: usize, ell: usize) -> Result<PpmBound> {
    check_q1_ll_q0(willie)?;
    if ell == 0 {
        return Ok(PpmBound {
            value: 0.0,
            remainder: Some(0.0),
            in_regime: true,
        });
    }
    if ell > n {
        return Err(Error::InvalidParams(format!("ℓ = {ell} exceeds n = {n}")));
    }
    let chi2 = chi2_q(willie)?;
    let (l, nf, m) = (ell as f64, n as f64, (n / ell) as f64);
    let value = l * l * chi2 / (2.0 * nf);
    let b4 = closed_form_b_moments(willie, n / ell).q0[3];
    let remainder = l * chi2 / (2.0 * m) - value + 0.5 * l * b4.powf(0.75);
    Ok(PpmBound {
        value,
        remainder: Some(remainder),
        in_regime: regime(n, ell),
    })
}

/// `V(P_Z^{n,ℓ}, Q₀^⊗n) ≲ 1 − 2Q((ℓ/2)√(χ²/n)) + 2/√ℓ`, clipped to `[0, 1]`.
pub fn ppm_tv_bound(willie: &BinaryDmc, n: usize, ell: usize) -> Result<PpmBound> {
    check_q1_ll_q0(willie)?;
    check_q0_ll_q1(willie)?;
    let chi2 = chi2_q(willie)?;
    let l = ell as f64;
    let raw_value = 1.0 - 2.0 * q_function(0.5 * l * (chi2 / n as f64).sqrt()) + 2.0 / l.sqrt();
    Ok(PpmBound {
        value: raw_value.clamp(0.0, 1.0),
        remainder: None,
        in_regime: regime(n, ell),
    })
}

/// `β_α(Q₀^⊗n, P_Z^{n,ℓ}) ≳ Q(ℓ√(χ²/n) − Q⁻¹(α + 1/√ℓ)) − 1/√ℓ`.
pub fn ppm_beta_bound(willie: &BinaryDmc, n: usize, ell: usize, alpha: f64) -> Result<PpmBound> {
    check_q1_ll_q0(willie)?;
    check_q0_ll_q1(willie)?;
    let l = ell as f64;
    let shifted = alpha + 1.0 / l.sqrt();
    if !(alpha > 0.0 && shifted < 1.0) {
        return Err(Error::DomainError(format!(
            "α + 1/√ℓ = {shifted} must lie in (0, 1)"
        )));
    }
    let chi2 = chi2_q(willie)?;
    let value = q_function(l * (chi2 / n as f64).sqrt() - q_inverse(shifted)?) - 1.0 / l.sqrt();
    Ok(PpmBound {
        value,
        remainder: None,
        in_regime: regime(n, ell),
    })
}

/// A tail bound together with the exact tail when the latter is computable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub bound: f64,
    pub exact: Option<f64>,
}

/// `F_{XY|Q_Y}(γ) = P{Σ_{pulses} log P₁(Y)/P₀(Y) ≤ γ}` for a weight-`ℓ` PPM input, bounded by
/// `Q((ℓD_P − γ)/√(ℓV_P)) + 6T_P/(√ℓ V_P^{3/2})`.
pub fn f_xy_bound(bob: &BinaryDmc, ell: usize, gamma: f64) -> Result<TailBound> {
    let per = bob.llr_moments();
    let total = per.iid(ell);
    let be = berry_esseen_bound(&total, 0.0)?;
    let bound = q_function((total.mean - gamma) / total.sigma()) + be;
    let exact = match iid_sum_distribution_with_cap(
        &bob.llr_vector(),
        bob.w1(),
        ell,
        DEFAULT_TYPE_CLASS_CAP,
    ) {
        Ok(law) => Some(law.cdf(gamma)),
        Err(Error::CombinatorialBlowup { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(TailBound { bound, exact })
}

/// `μ_Z`: the smallest positive entry of `Q₀` and `Q₁`.
pub fn mu_z(willie: &BinaryDmc) -> f64 {
    willie.w0().min_positive().min(willie.w1().min_positive())
}

/// Exact law of the PPM information density `log W^⊗n(Z|X)/P_Z^{n,ℓ}(Z)` under the joint law
/// of input and output: per window `log((1 + A(z_j))/(1 + B))` with the pulse symbol
/// `z_j ~ Q₁` and the others `~ Q₀`, summed over `ℓ` independent windows.
pub fn information_density_law(
    willie: &BinaryDmc,
    params: &PpmParams,
    cap: u128,
) -> Result<SumDistribution> {
    check_q1_ll_q0(willie)?;
    let a = ScoreA::new(willie);
    let m = params.m as f64;
    let rest = iid_sum_distribution_with_cap(a.values(), willie.w0(), params.m - 1, cap)?;
    let mut atoms = Vec::new();
    for z in 0..willie.output_size() {
        let (q0, q1) = (willie.w0().prob(z), willie.w1().prob(z));
        if q1 > 0.0 {
            let head = (q1 / q0).ln();
            for &(s, p) in rest.atoms() {
                atoms.push((head - ((a.values()[z] + s) / m).ln_1p(), q1 * p));
            }
        }
    }
    let block = SumDistribution::from_atoms(atoms, params.m);
    let mut law = SumDistribution::zero();
    let mut base = block;
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
    Ok(law)
}

/// `F̄_{XZ}(γ) = P{log W^⊗n(Z|X)/P_Z^{n,ℓ}(Z) ≥ γ} ≤ exp(−(γ − ℓD_Q)²/(2ℓ log²μ_Z))` for
/// `γ ≥ ℓD_Q`.
pub fn f_xz_bound(willie: &BinaryDmc, params: &PpmParams, gamma: f64) -> Result<TailBound> {
    let d_q = raw::kl(willie.w1().probs(), willie.w0().probs())?;
    let l = params.ell as f64;
    if gamma < l * d_q {
        return Err(Error::DomainError(format!(
            "γ = {gamma} is below ℓD_Q = {}",
            l * d_q
        )));
    }
    let lm = mu_z(willie).ln();
    let bound = (-(gamma - l * d_q).powi(2) / (2.0 * l * lm * lm)).exp();
    let exact = match information_density_law(willie, params, DEFAULT_TYPE_CLASS_CAP) {
        Ok(law) => Some(law.tail_ge(gamma)),
        Err(Error::CombinatorialBlowup { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(TailBound { bound, exact })
}
