use serde::Serialize;

use super::codebook::Codebook;
use super::Provenance;
use crate::dmc_core::{
    iid_sum_distribution_with_cap, raw, BinaryDmc, CovertChannelPair, FiniteDistribution,
    DEFAULT_TYPE_CLASS_CAP,
};
use crate::error::{Error, Result};
use crate::ppm::{
    f_xy_bound, information_density_law, mu_z, ppm_beta_bound, ppm_beta_exact,
    ppm_divergence_bound, ppm_divergence_exact, ppm_tv_bound, ppm_tv_exact, word_alphabet,
    PpmParams, ENUMERATION_CAP,
};

/// Covertness criterion. `Beta(α)` measures `1 − α − β_α(Q₀^⊗n, P̂_Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Metric {
    Kl,
    Tv,
    Beta(f64),
}

impl Metric {
    pub fn name(&self) -> String {
        match self {
            Metric::Kl => "KL".into(),
            Metric::Tv => "TV".into(),
            Metric::Beta(a) => format!("BETA({a})"),
        }
    }
}

/// `P̂_Z = (1/MK) Σ_{s,w} W^⊗n(·|x_{sw})` over all `|Z|^n` output words.
pub fn induced_output_distribution(
    codebook: &Codebook,
    willie: &BinaryDmc,
) -> Result<FiniteDistribution> {
    let words: Vec<Vec<usize>> = codebook.codewords().cloned().collect();
    let probs = willie.mixture_output_probs(codebook.n(), &words, ENUMERATION_CAP)?;
    FiniteDistribution::from_computed(word_alphabet(willie, codebook.n()), probs)
}

/// `log(1 + e^x)` without overflow.
fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(1/μ)` for the `n`-letter floor `μ_Z^n ≤ min_z P_Z^{n,ℓ}(z)`.
pub fn log_inv_mu_n(willie: &BinaryDmc, n: usize) -> f64 {
    -(n as f64) * mu_z(willie).ln()
}

/// `F̄_{XZ}(γ)` for the PPM ensemble: exact when the information-density law fits the cap,
/// otherwise the Hoeffding form (or the trivial 1 below `ℓD_Q`).
pub fn f_xz_tail(willie: &BinaryDmc, params: &PpmParams, gamma: f64) -> Result<(f64, Provenance)> {
    match information_density_law(willie, params, DEFAULT_TYPE_CLASS_CAP) {
        Ok(law) => return Ok((law.tail_ge(gamma), Provenance::Exact)),
        Err(Error::CombinatorialBlowup { .. }) => {}
        Err(e) => return Err(e),
    }
    let d_q = raw::kl(willie.w1().probs(), willie.w0().probs())?;
    let l = params.ell as f64;
    if gamma < l * d_q {
        return Ok((1.0, Provenance::Bound));
    }
    let lm = mu_z(willie).ln();
    Ok((
        (-(gamma - l * d_q).powi(2) / (2.0 * l * lm * lm)).exp(),
        Provenance::Bound,
    ))
}

/// `F_{XY|P₀^⊗n}(γ)`: exact for moderate type counts, Berry–Esseen otherwise.
pub fn f_xy_tail(bob: &BinaryDmc, ell: usize, gamma: f64) -> Result<(f64, Provenance)> {
    match iid_sum_distribution_with_cap(&bob.llr_vector(), bob.w1(), ell, DEFAULT_TYPE_CLASS_CAP) {
        Ok(law) => Ok((law.cdf(gamma), Provenance::Exact)),
        Err(Error::CombinatorialBlowup { .. }) => Ok((
            f_xy_bound(bob, ell, gamma)?.bound.min(1.0),
            Provenance::Bound,
        )),
        Err(e) => Err(e),
    }
}

/// `log(1/μ + 1)·F̄_{XZ}(γ₂) + e^{γ₂}/(MK)`, bounding `E[D(P̂_Z‖P_Z^{n,ℓ})]`.
/// `MK` and `μ` enter through `log(MK)` and `log(1/μ)`.
pub fn resolvability_expectation_bound(
    gamma2: f64,
    log_mk: f64,
    log_inv_mu: f64,
    willie: &BinaryDmc,
    params: &PpmParams,
) -> Result<f64> {
    let (f_bar, _) = f_xz_tail(willie, params, gamma2)?;
    Ok(resolvability_from_tail(gamma2, log_mk, log_inv_mu, f_bar))
}

pub fn resolvability_from_tail(gamma2: f64, log_mk: f64, log_inv_mu: f64, f_bar: f64) -> f64 {
    let head = if f_bar > 0.0 {
        log1p_exp(log_inv_mu) * f_bar
    } else {
        0.0
    };
    head + (gamma2 - log_mk).exp()
}

/// Bounded-difference constants of `V(P̂_Z, P_Z)` and `D(P̂_Z‖P_Z)` as functions of the
/// `M` codewords: `(1/M, (1/M)·log(M|Z|/μ²))`.
pub fn bounded_difference_constants(m_total: f64, z_size: f64, mu: f64) -> Result<(f64, f64)> {
    if !(m_total >= 2.0) {
        return Err(Error::InvalidParams(format!(
            "need M ≥ 2 codewords, got {m_total}"
        )));
    }
    if !(mu > 0.0 && z_size >= 1.0) {
        return Err(Error::InvalidParams(format!("|Z| = {z_size}, μ = {mu}")));
    }
    Ok((1.0 / m_total, (m_total * z_size / (mu * mu)).ln() / m_total))
}

/// `exp(−2λ²/(M c²))`.
pub fn mcdiarmid_tail(lambda: f64, m_total: f64, c: f64) -> f64 {
    (-2.0 * lambda * lambda / (m_total * c * c)).exp()
}

/// Parameters of the one-shot existence argument; `M` and `K` are given in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateInputs {
    pub log_m: f64,
    pub log_k: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl CertificateInputs {
    /// `λ₁ = 1/n, λ₂ = n, λ₃ = 1/n⁴, γ₁ = log(n²M), γ₂ = log(MK/n⁴)`.
    pub fn asymptotic(n: usize, log_m: f64, log_k: f64) -> Self {
        let ln_n = (n as f64).ln();
        Self {
            log_m,
            log_k,
            lambda1: 1.0 / n as f64,
            lambda2: n as f64,
            lambda3: (n as f64).powi(-4),
            gamma1: log_m + 2.0 * ln_n,
            gamma2: log_m + log_k - 4.0 * ln_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneShotCertificate {
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Threshold on `P*_err` in the reliability event.
    pub reliability_bound: f64,
    /// Threshold on `D(P̂_Z‖P_Z)` in the resolvability event.
    pub resolvability_bound: f64,
    /// `(1 − e^{−2Mλ₁²} − 1/λ₂)^K − exp(−2MKλ₃²/log²(MK|Z^n|/μ²))`.
    pub existence_margin: f64,
    pub exists: bool,
    pub reliability_mode: Provenance,
    pub resolvability_mode: Provenance,
}

/// `log(MK|Z^n|/μ²)` with the `n`-letter floor on `μ`.
fn kl_difference_log(log_mk: f64, willie: &BinaryDmc, n: usize) -> f64 {
    log_mk + n as f64 * (willie.output_size() as f64).ln() + 2.0 * log_inv_mu_n(willie, n)
}

/// `exp(−e^x)`.
fn exp_neg_exp(x: f64) -> f64 {
    (-x.exp()).exp()
}

pub fn existence_certificate(
    inputs: &CertificateInputs,
    pair: &CovertChannelPair,
    params: &PpmParams,
) -> Result<OneShotCertificate> {
    let c = inputs;
    if !(c.lambda2 > 1.0) {
        return Err(Error::InvalidParams(format!(
            "λ₂ = {} must exceed 1",
            c.lambda2
        )));
    }
    if !(c.lambda1 > 0.0 && c.lambda3 > 0.0) {
        return Err(Error::InvalidParams("λ₁ and λ₃ must be positive".into()));
    }
    let (bob, willie, n) = (&pair.bob, &pair.willie, params.n);
    let (f, reliability_mode) = f_xy_tail(bob, params.ell, c.gamma1)?;
    let chi2_p = raw::chi2(bob.w1().probs(), bob.w0().probs())?;
    let log_ratio = params.ell as f64 * (chi2_p / params.m as f64).ln_1p();
    let reliability_bound = f + c.lambda1 + (c.lambda2.ln() + c.log_m - c.gamma1 + log_ratio).exp();
    let (f_bar, resolvability_mode) = f_xz_tail(willie, params, c.gamma2)?;
    let log_mk = c.log_m + c.log_k;
    let resolvability_bound =
        resolvability_from_tail(c.gamma2, log_mk, log_inv_mu_n(willie, n), f_bar) + c.lambda3;

    let base = 1.0
        - exp_neg_exp(std::f64::consts::LN_2 + c.log_m + 2.0 * c.lambda1.ln())
        - 1.0 / c.lambda2;
    let reliable = if base <= 0.0 {
        0.0
    } else {
        (c.log_k.exp() * base.ln()).exp()
    };
    let l = kl_difference_log(log_mk, willie, n);
    let resolvable_fail =
        exp_neg_exp(std::f64::consts::LN_2 + log_mk + 2.0 * c.lambda3.ln() - 2.0 * l.ln());
    let existence_margin = reliable - resolvable_fail;
    Ok(OneShotCertificate {
        gamma1: c.gamma1,
        gamma2: c.gamma2,
        lambda1: c.lambda1,
        lambda2: c.lambda2,
        lambda3: c.lambda3,
        reliability_bound,
        resolvability_bound,
        existence_margin,
        exists: existence_margin > 0.0,
        reliability_mode,
        resolvability_mode,
    })
}

/// One row of an achievability report; `slack ≥ 0` iff the condition holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub mode: Provenance,
}

impl ConditionCheck {
    fn at_most(name: &'static str, lhs: f64, rhs: f64, mode: Provenance) -> Self {
        Self {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs,
            mode,
        }
    }

    fn positive(name: &'static str, lhs: f64, mode: Provenance) -> Self {
        Self {
            name,
            lhs,
            rhs: 0.0,
            slack: lhs,
            pass: lhs > 0.0,
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AchievabilityReport {
    pub n: usize,
    pub log_m: f64,
    pub log_k: f64,
    pub metric: Metric,
    /// `positive_probability`, `reliability_tail`, `resolvability_tail`, `covertness`, then the
    /// informational `covertness_chain` and `existence_margin`.
    pub conditions: Vec<ConditionCheck>,
}

impl AchievabilityReport {
    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// The four sufficient conditions as displayed.
    pub fn all_pass(&self) -> bool {
        [
            "positive_probability",
            "reliability_tail",
            "resolvability_tail",
            "covertness",
        ]
        .iter()
        .all(|n| self.get(n).is_some_and(|c| c.pass))
    }

    /// As `all_pass`, with the covertness margin the proof's inequality chain actually uses.
    pub fn chain_pass(&self) -> bool {
        [
            "positive_probability",
            "reliability_tail",
            "resolvability_tail",
            "covertness_chain",
        ]
        .iter()
        .all(|n| self.get(n).is_some_and(|c| c.pass))
    }
}

/// `d(P_Z^{n,ℓ}, Q₀^⊗n)`: exact through the block structure when possible, else the
/// leading-term bound (KL adds its rigorous remainder).
pub fn ppm_metric_value(
    willie: &BinaryDmc,
    params: &PpmParams,
    metric: Metric,
) -> Result<(f64, Provenance)> {
    let fallback = |e: Error| matches!(e, Error::CombinatorialBlowup { .. });
    match metric {
        Metric::Kl => match ppm_divergence_exact(willie, params) {
            Ok(v) => Ok((v, Provenance::Exact)),
            Err(e) if fallback(e.clone()) => {
                let b = ppm_divergence_bound(willie, params.n, params.ell)?;
                Ok((b.value + b.remainder.unwrap_or(0.0), Provenance::Bound))
            }
            Err(e) => Err(e),
        },
        Metric::Tv => match ppm_tv_exact(willie, params) {
            Ok(v) => Ok((v, Provenance::Exact)),
            Err(e) if fallback(e.clone()) => Ok((
                ppm_tv_bound(willie, params.n, params.ell)?.value,
                Provenance::Bound,
            )),
            Err(e) => Err(e),
        },
        Metric::Beta(alpha) => match ppm_beta_exact(willie, params, alpha) {
            Ok(b) => Ok(((1.0 - alpha - b.beta).max(0.0), Provenance::Exact)),
            Err(e) if fallback(e.clone()) => {
                let b = ppm_beta_bound(willie, params.n, params.ell, alpha)?;
                Ok(((1.0 - alpha - b.value).max(0.0), Provenance::Bound))
            }
            Err(e) => Err(e),
        },
    }
}

/// `3/n⁴ + √(3/n⁴)·max(1, log 1/min_z Q₀^⊗n(z))`, the covertness slack the proof consumes.
pub fn chain_margin(willie: &BinaryDmc, n: usize) -> f64 {
    let nf = n as f64;
    let e = 3.0 / nf.powi(4);
    e + e.sqrt() * (nf * -willie.w0().min_positive().ln()).max(1.0)
}

/// Evaluates the sufficient conditions for `M*_d(n, ε, δ) ≥ M_n` with PPM ensemble `params`.
/// Failures are reported, not raised; errors signal invalid inputs.
#[allow(clippy::too_many_arguments)]
pub fn verify_achievability_conditions(
    n: usize,
    log_m: f64,
    log_k: f64,
    metric: Metric,
    pair: &CovertChannelPair,
    params: &PpmParams,
    delta: f64,
    eps: f64,
) -> Result<AchievabilityReport> {
    if params.n != n {
        return Err(Error::InvalidParams(format!(
            "PPM blocklength {} ≠ n = {n}",
            params.n
        )));
    }
    let (bob, willie) = (&pair.bob, &pair.willie);
    let (nf, ln_n) = (n as f64, (n as f64).ln());
    let log_mk = log_m + log_k;
    let l = kl_difference_log(log_mk, willie, n);
    let positive = 1.0
        - exp_neg_exp(std::f64::consts::LN_2 + log_m - 8.0 * ln_n - 2.0 * l.ln())
        - exp_neg_exp(std::f64::consts::LN_2 + log_m - 2.0 * ln_n)
        - 1.0 / nf;

    let (f, f_mode) = f_xy_tail(bob, params.ell, log_m + 2.0 * ln_n)?;
    let chi2_p = raw::chi2(bob.w1().probs(), bob.w0().probs())?;
    let ratio = (params.ell as f64 * (chi2_p / params.m as f64).ln_1p()).exp();
    let reliability = f + (1.0 + ratio) / nf;

    let (f_bar, fz_mode) = f_xz_tail(willie, params, log_mk - 4.0 * ln_n)?;
    let (d, d_mode) = ppm_metric_value(willie, params, metric)?;

    let cert = existence_certificate(
        &CertificateInputs::asymptotic(n, log_m, log_k),
        pair,
        params,
    )?;
    let conditions = vec![
        ConditionCheck::positive("positive_probability", positive, Provenance::Exact),
        ConditionCheck::at_most("reliability_tail", reliability, eps, f_mode),
        ConditionCheck::at_most("resolvability_tail", f_bar, nf.powi(-6), fz_mode),
        ConditionCheck::at_most("covertness", d, delta - 1.0 / nf.sqrt(), d_mode),
        ConditionCheck::at_most(
            "covertness_chain",
            d,
            delta - chain_margin(willie, n),
            d_mode,
        ),
        ConditionCheck::positive("existence_margin", cert.existence_margin, Provenance::Exact),
    ];
    Ok(AchievabilityReport {
        n,
        log_m,
        log_k,
        metric,
        conditions,
    })
}
