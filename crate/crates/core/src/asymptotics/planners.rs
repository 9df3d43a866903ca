use serde::Serialize;

use super::constants::ChannelConstants;
use crate::coding::{chain_margin, Metric};
use crate::dmc_core::q_inverse;
use crate::error::{Error, Result};
use crate::ppm::{ppm_beta_bound, ppm_divergence_bound, ppm_tv_bound};

const SQRT_2PI: f64 = 2.5066282746310002;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("ε = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// `ω = √(2δ/χ²(Q₁‖Q₀))`.
pub fn omega(delta: f64, c: &ChannelConstants) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::DomainError(format!("δ = {delta} must be positive")));
    }
    Ok((2.0 * delta / c.chi2_q).sqrt())
}

/// `Γ = Q⁻¹((1 − δ)/2)`.
pub fn gamma_tv(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DomainError(format!(
            "δ = {delta} must lie in (0, 1)"
        )));
    }
    q_inverse((1.0 - delta) / 2.0)
}

/// `(Λ, Υ) = (Q⁻¹(1 − α − δ), Q⁻¹(α))`.
pub fn lambda_upsilon(delta: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && alpha + delta < 1.0) {
        return Err(Error::DomainError(format!(
            "need α ∈ (0,1), δ ∈ (0, 1−α); got α = {alpha}, δ = {delta}"
        )));
    }
    Ok((q_inverse(1.0 - alpha - delta)?, q_inverse(alpha)?))
}

/// Weight scale `g` with `ℓₙ ≈ g√n`: `ω`, `2Γ/√χ²` or `(Λ + Υ)/√χ²`.
pub fn weight_scale(metric: Metric, delta: f64, c: &ChannelConstants) -> Result<f64> {
    match metric {
        Metric::Kl => omega(delta, c),
        Metric::Tv => Ok(2.0 * gamma_tv(delta)? / c.chi2_q.sqrt()),
        Metric::Beta(alpha) => {
            let (l, u) = lambda_upsilon(delta, alpha)?;
            Ok((l + u) / c.chi2_q.sqrt())
        }
    }
}

/// First-order constant `lim log M/√n = g·D_P`.
pub fn first_order_slope(metric: Metric, delta: f64, c: &ChannelConstants) -> Result<f64> {
    Ok(weight_scale(metric, delta, c)? * c.d_p)
}

/// Second-order evaluation `a√n − b·n^{1/4}`, without the `O(log n)` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrder {
    pub value: f64,
    pub first_order: f64,
    pub second_order: f64,
    /// Half-width `2 log n` of the excluded `O(log n)` term.
    pub log_band: f64,
}

/// `ωD_P√n − √(ωV_P)Q⁻¹(ε)n^{1/4}`.
pub fn second_order_d(n: f64, eps: f64, delta: f64, c: &ChannelConstants) -> Result<SecondOrder> {
    check_eps(eps)?;
    two_term(omega(delta, c)?, n, eps, c)
}

fn two_term(g: f64, n: f64, eps: f64, c: &ChannelConstants) -> Result<SecondOrder> {
    let first_order = g * c.d_p * n.sqrt();
    let second_order = -(g.max(0.0) * c.v_p).sqrt() * q_inverse(eps)? * n.powf(0.25);
    Ok(SecondOrder {
        value: first_order + second_order,
        first_order,
        second_order,
        log_band: 2.0 * n.ln(),
    })
}

/// Upper and lower second-order envelopes, `O(log n)` excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelopes {
    pub lower: f64,
    pub upper: f64,
}

/// `2ΓD_P/√χ²·√n − √(2ΓV_P/√χ²)Q⁻¹(ε)n^{1/4}`, and the lower envelope with the extra
/// `2√π e^{Γ²/2}D_P/(√Γ χ²^{1/4})·n^{1/4}` penalty.
pub fn envelopes_v(n: f64, eps: f64, delta: f64, c: &ChannelConstants) -> Result<Envelopes> {
    check_eps(eps)?;
    let g = gamma_tv(delta)?;
    let upper = two_term(2.0 * g / c.chi2_q.sqrt(), n, eps, c)?.value;
    let penalty = 2.0 * std::f64::consts::PI.sqrt() * (g * g / 2.0).exp() * c.d_p
        / (g.sqrt() * c.chi2_q.powf(0.25));
    Ok(Envelopes {
        lower: upper - penalty * n.powf(0.25),
        upper,
    })
}

/// Envelopes for `β_α`; the lower one carries `√(2π)(e^{Λ²/2} + e^{Υ²/2})D_P/(√(Λ+Υ) χ²^{1/4})`.
pub fn envelopes_beta(
    n: f64,
    eps: f64,
    delta: f64,
    alpha: f64,
    c: &ChannelConstants,
) -> Result<Envelopes> {
    check_eps(eps)?;
    let (l, u) = lambda_upsilon(delta, alpha)?;
    let s = l + u;
    let upper = two_term(s / c.chi2_q.sqrt(), n, eps, c)?.value;
    if s <= 0.0 {
        return Ok(Envelopes {
            lower: f64::NEG_INFINITY,
            upper,
        });
    }
    let penalty = SQRT_2PI * ((l * l / 2.0).exp() + (u * u / 2.0).exp()) * c.d_p
        / (s.sqrt() * c.chi2_q.powf(0.25));
    Ok(Envelopes {
        lower: upper - penalty * n.powf(0.25),
        upper,
    })
}

/// Largest real root `2√(p/3)·cos((1/3)·arccos(−(3q/(2p))·√(3/p)))` of `x³ − px + q = 0`.
pub fn cubic_root_trig(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::ComplexRootRegime(f64::NAN));
    }
    let arg = -(3.0 * q / (2.0 * p)) * (3.0 / p).sqrt();
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::ComplexRootRegime(arg));
    }
    Ok(2.0 * (p / 3.0).sqrt() * (arg.acos() / 3.0).cos())
}

/// A blocklength-`n` PPM code plan. Lengths are in nats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodePlan {
    pub n: usize,
    pub metric: Metric,
    pub ell_n: usize,
    pub log_m_n: f64,
    pub log_k_n: f64,
    pub rho: f64,
    /// Number of unit steps `ℓₙ` was lowered from its leading-order value to meet the
    /// covertness margin.
    pub shift: usize,
    /// `ε − (1 + 6T_P/V_P^{3/2})/√ℓₙ`.
    pub q_inv_argument: f64,
    /// The covertness value `d(P_Z^{n,ℓₙ}, Q₀^⊗n)` from the PPM bound used by the planner.
    pub covertness_bound: f64,
    pub envelopes: Option<Envelopes>,
    /// Asymptotic terms left out of the point values.
    pub dropped_terms: Vec<&'static str>,
}

/// `log Mₙ = ℓD_P − √(ℓV_P)Q⁻¹(ε − (1 + 6T_P/V_P^{3/2})/√ℓ) − 2 log n`.
pub fn planned_log_m(ell: usize, n: usize, eps: f64, c: &ChannelConstants) -> Result<(f64, f64)> {
    check_eps(eps)?;
    let l = ell as f64;
    let arg = eps - (1.0 + c.berry_esseen_p()?) / l.sqrt();
    if !(arg > 0.0) {
        return Err(Error::InfeasibleBlocklength(format!(
            "n = {n}, ℓ = {ell}: Q⁻¹ argument {arg:.6} ≤ 0"
        )));
    }
    let log_m = l * c.d_p - (l * c.v_p).sqrt() * q_inverse(arg)? - 2.0 * (n as f64).ln();
    Ok((log_m, arg))
}

fn finish(
    n: usize,
    metric: Metric,
    ell: usize,
    shift: usize,
    covertness_bound: f64,
    eps: f64,
    rho: f64,
    c: &ChannelConstants,
    envelopes: Option<Envelopes>,
    dropped_terms: Vec<&'static str>,
) -> Result<CodePlan> {
    if !(rho > 0.0) {
        return Err(Error::DomainError(format!("ρ = {rho} must be positive")));
    }
    let (log_m_n, q_inv_argument) = planned_log_m(ell, n, eps, c)?;
    let total = log_m_n.max((1.0 + rho) * ell as f64 * c.d_q);
    Ok(CodePlan {
        n,
        metric,
        ell_n: ell,
        log_m_n,
        log_k_n: total - log_m_n,
        rho,
        shift,
        q_inv_argument,
        covertness_bound,
        envelopes,
        dropped_terms,
    })
}

/// Lowers `ℓ` from `start` until `bound(ℓ) ≤ target`.
fn lower_until(
    start: usize,
    target: f64,
    bound: impl Fn(usize) -> Result<f64>,
) -> Result<(usize, usize, f64)> {
    let mut ell = start;
    loop {
        let b = bound(ell)?;
        if b <= target {
            return Ok((ell, start - ell, b));
        }
        if ell == 1 {
            return Err(Error::InfeasibleBlocklength(format!(
                "no ℓ ≤ {start} meets covertness target {target:.3e}"
            )));
        }
        ell -= 1;
    }
}

/// Relative-entropy planner: `ℓₙ = ⌊ω√n − t⌋` with the smallest `t ≥ 0` for which the
/// rigorous PPM divergence bound stays within `δ` minus the resolvability slack.
pub fn plan_d(n: usize, eps: f64, delta: f64, rho: f64, c: &ChannelConstants) -> Result<CodePlan> {
    check_eps(eps)?;
    let w = omega(delta, c)?;
    let start = ((w * (n as f64).sqrt()).floor() as usize).min(n);
    if start == 0 {
        return Err(Error::InfeasibleBlocklength(format!("ω√n < 1 at n = {n}")));
    }
    let willie = &c.pair.willie;
    let target = delta - chain_margin(willie, n);
    let (ell, shift, b) = lower_until(start, target, |l| {
        let b = ppm_divergence_bound(willie, n, l)?;
        Ok(b.value + b.remainder.unwrap_or(0.0))
    })?;
    finish(
        n,
        Metric::Kl,
        ell,
        shift,
        b,
        eps,
        rho,
        c,
        None,
        vec!["O(1) in log M_n"],
    )
}

/// Variational-distance planner: `√ℓₙ` is the trigonometric root of
/// `x³ − 2Γ√(n/χ²)·x + 2√(2π)e^{Γ²/2}√(n/χ²) = 0`.
pub fn plan_v(n: usize, eps: f64, delta: f64, rho: f64, c: &ChannelConstants) -> Result<CodePlan> {
    check_eps(eps)?;
    if !c.q0_ll_q1 {
        return Err(Error::AbsoluteContinuityViolation("Q₀ ≪ Q₁ fails".into()));
    }
    let g = gamma_tv(delta)?;
    let s = (n as f64 / c.chi2_q).sqrt();
    let x = cubic_root_trig(2.0 * g * s, 2.0 * SQRT_2PI * (g * g / 2.0).exp() * s)?;
    let start = ((x * x).floor() as usize).clamp(1, n);
    let willie = &c.pair.willie;
    let target = delta - chain_margin(willie, n);
    let (ell, shift, b) = lower_until(start, target, |l| Ok(ppm_tv_bound(willie, n, l)?.value))?;
    let env = envelopes_v(n as f64, eps, delta, c)?;
    finish(
        n,
        Metric::Tv,
        ell,
        shift,
        b,
        eps,
        rho,
        c,
        Some(env),
        vec!["O(1) in ℓ_n", "O(1/√n) in Γ", "O(log n)"],
    )
}

/// Missed-detection planner: `√ℓₙ` is the root of
/// `x³ − (Λ+Υ)√(n/χ²)·x + √(2π)(e^{Λ²/2} + e^{Υ²/2})√(n/χ²) = 0`.
/// With `Λ + Υ ≤ 0` the planner falls back to `ℓₙ = 1`.
pub fn plan_beta(
    n: usize,
    eps: f64,
    delta: f64,
    alpha: f64,
    rho: f64,
    c: &ChannelConstants,
) -> Result<CodePlan> {
    check_eps(eps)?;
    if !c.q0_ll_q1 {
        return Err(Error::AbsoluteContinuityViolation("Q₀ ≪ Q₁ fails".into()));
    }
    let (l, u) = lambda_upsilon(delta, alpha)?;
    let s = (n as f64 / c.chi2_q).sqrt();
    let start = if l + u <= 0.0 {
        1
    } else {
        let q = SQRT_2PI * ((l * l / 2.0).exp() + (u * u / 2.0).exp()) * s;
        let x = cubic_root_trig((l + u) * s, q)?;
        ((x * x).floor() as usize).clamp(1, n)
    };
    let willie = &c.pair.willie;
    let target = delta - chain_margin(willie, n);
    let (ell, shift, b) = lower_until(start, target, |ell| {
        if alpha + 1.0 / (ell as f64).sqrt() >= 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok((1.0 - alpha - ppm_beta_bound(willie, n, ell, alpha)?.value).max(0.0))
    })?;
    let env = envelopes_beta(n as f64, eps, delta, alpha, c)?;
    finish(
        n,
        Metric::Beta(alpha),
        ell,
        shift,
        b,
        eps,
        rho,
        c,
        Some(env),
        vec!["O(1) in ℓ_n", "O(1/√n) in Λ+Υ", "O(log n)"],
    )
}

/// First-order slopes at `δ` (KL) and `√(δ/2)` (TV, `β` minimised over an `α` grid).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub slope_d: f64,
    pub slope_v: f64,
    pub slope_beta_min: f64,
    pub alpha_at_min: f64,
    /// `second_order_d` and the upper envelopes at the report's `n`.
    pub second_order_d: f64,
    pub upper_v: f64,
    pub upper_beta_at_min: f64,
    pub holds: bool,
}

pub const ORDERING_ALPHA_GRID: usize = 199;

pub fn metric_ordering_check(
    n: f64,
    eps: f64,
    delta: f64,
    c: &ChannelConstants,
) -> Result<OrderingReport> {
    let dv = (delta / 2.0).sqrt();
    let slope_d = first_order_slope(Metric::Kl, delta, c)?;
    let slope_v = first_order_slope(Metric::Tv, dv, c)?;
    let (mut slope_beta_min, mut alpha_at_min) = (f64::INFINITY, f64::NAN);
    for i in 1..=ORDERING_ALPHA_GRID {
        let alpha = (1.0 - dv) * i as f64 / (ORDERING_ALPHA_GRID + 1) as f64;
        let s = first_order_slope(Metric::Beta(alpha), dv, c)?;
        if s < slope_beta_min {
            slope_beta_min = s;
            alpha_at_min = alpha;
        }
    }
    let tol = 1e-12 * slope_v.abs().max(1.0);
    Ok(OrderingReport {
        slope_d,
        slope_v,
        slope_beta_min,
        alpha_at_min,
        second_order_d: second_order_d(n, eps, delta, c)?.value,
        upper_v: envelopes_v(n, eps, dv, c)?.upper,
        upper_beta_at_min: envelopes_beta(n, eps, dv, alpha_at_min, c)?.upper,
        holds: slope_d <= slope_v + tol && slope_v <= slope_beta_min + tol,
    })
}
