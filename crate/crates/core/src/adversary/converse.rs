use serde::Serialize;

use super::detector::detector_constants;
use crate::asymptotics::{weight_scale, ChannelConstants};
use crate::coding::Metric;
use crate::dmc_core::{iid_sum_distribution, q_inverse, BinaryDmc};
use crate::error::{Error, Result};

const FIXED_POINT_ITERATIONS: usize = 500;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("ε = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// `wD_P + √(wV_P)Q⁻¹(1 − ε − 2B/√w) − log(B/√w)` with `B = 6T_P/V_P^{3/2}`.
pub fn converse_logm_from_weight(w: f64, eps: f64, c: &ChannelConstants) -> Result<f64> {
    check_eps(eps)?;
    if !(w >= 1.0) {
        return Err(Error::DomainError(format!("weight {w} must be at least 1")));
    }
    let b = c.berry_esseen_p()?;
    let arg = 1.0 - eps - 2.0 * b / w.sqrt();
    if !(arg > 0.0 && arg < 1.0) {
        return Err(Error::InfeasibleWeight(format!(
            "1 − ε − 2B/√w = {arg:.4} at w = {w}"
        )));
    }
    Ok(w * c.d_p + (w * c.v_p).sqrt() * q_inverse(arg)? - (b / w.sqrt()).ln())
}

/// The same bound with the Berry–Esseen shift moved into the `O(1)` term:
/// `wD_P + √(wV_P)Q⁻¹(1 − ε) − log(B/√w)`.
pub fn converse_logm_asymptotic(w: f64, eps: f64, c: &ChannelConstants) -> Result<f64> {
    check_eps(eps)?;
    if !(w >= 1.0) {
        return Err(Error::DomainError(format!("weight {w} must be at least 1")));
    }
    let b = c.berry_esseen_p()?;
    Ok(w * c.d_p + (w * c.v_p).sqrt() * q_inverse(1.0 - eps)? - (b / w.sqrt()).ln())
}

/// `inf_γ [γ − log(1 − ε − P{S ≥ γ})]` with `S` the exact `w`-fold LLR sum under `P₁`.
pub fn converse_logm_exact(w: usize, eps: f64, bob: &BinaryDmc) -> Result<f64> {
    check_eps(eps)?;
    let law = iid_sum_distribution(&bob.llr_vector(), bob.w1(), w)?;
    law.atoms()
        .iter()
        .filter_map(|&(s, _)| {
            let slack = 1.0 - eps - law.tail_gt(s);
            (slack > 0.0).then(|| s - slack.ln())
        })
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::InfeasibleWeight(format!("no feasible threshold at w = {w}")))
}

/// `D(Q_μ‖Q₀) = Σ Q₀(z) h(μA(z))` with `h(x) = (1 + x)log(1 + x) − x`, stable for small `μ`.
fn mixture_divergence(mu: f64, q0: &[f64], q1: &[f64]) -> f64 {
    let h = |x: f64| {
        if x.abs() < 1e-4 {
            x * x * (0.5 - x / 6.0 + x * x / 12.0)
        } else if x <= -1.0 {
            1.0
        } else {
            (1.0 + x) * x.ln_1p() - x
        }
    };
    q0.iter()
        .zip(q1)
        .map(|(&a, &b)| {
            if a > 0.0 {
                a * h(mu * (b - a) / a)
            } else {
                mu * b * (mu * b).ln().max(0.0)
            }
        })
        .sum()
}

/// Weight cap per `√n`: the largest `√n·μ` with `n·D(Q_μ‖Q₀) ≤ δ`, `Q_μ = (1 − μ)Q₀ + μQ₁`.
pub fn weight_bound_d(delta: f64, n: usize, c: &ChannelConstants) -> Result<f64> {
    if !(delta > 0.0) || n == 0 {
        return Err(Error::DomainError(format!(
            "need δ > 0 and n ≥ 1, got δ = {delta}, n = {n}"
        )));
    }
    let w = &c.pair.willie;
    let (q0, q1) = (w.w0().probs(), w.w1().probs());
    let nf = n as f64;
    let div = |mu: f64| -> Result<f64> { Ok(nf * mixture_divergence(mu, q0, q1)) };
    if div(1.0)? <= delta {
        return Ok(nf.sqrt());
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if div(mid)? <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(nf.sqrt() * lo)
}

/// A weight cap `max wt/√n` together with the proof constant it was solved with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightCap {
    pub per_sqrt_n: f64,
    pub c2: f64,
    pub b: f64,
}

fn solve_cap(
    b: f64,
    c2_of: impl Fn(f64) -> f64,
    cap_of: impl Fn(f64) -> Result<f64>,
) -> Result<WeightCap> {
    let mut c2 = c2_of(cap_of(0.0)?);
    for _ in 0..FIXED_POINT_ITERATIONS {
        let a = cap_of(c2)?;
        let next = c2_of(a);
        if (next - c2).abs() <= 1e-12 * (1.0 + c2) {
            return Ok(WeightCap {
                per_sqrt_n: cap_of(next)?,
                c2: next,
                b,
            });
        }
        c2 = next;
    }
    Err(Error::DomainError(
        "proof constant C₂ has no fixed point at this n".into(),
    ))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::DomainError(format!(
            "γ = {gamma} must lie in [0, 1]"
        )));
    }
    Ok(())
}

fn q_inverse_open(arg: f64) -> Result<f64> {
    if !(arg > 0.0 && arg < 1.0) {
        return Err(Error::DomainError(format!(
            "Q⁻¹ argument {arg:.6} leaves (0, 1)"
        )));
    }
    q_inverse(arg)
}

/// `(2/√χ²)Q⁻¹((1 − δ)/2 − C₂/√n − γ)` with `C₂ = ½B(1 + A²)`, `B = max(B₀ + B₁, B₃)`.
pub fn weight_bound_v(delta: f64, n: usize, gamma: f64, c: &ChannelConstants) -> Result<WeightCap> {
    check_gamma(gamma)?;
    let k = detector_constants(&c.pair.willie)?;
    let b = (k.b0 + k.b1).max(k.b3);
    let s = (n as f64).sqrt();
    let r = c.chi2_q.sqrt();
    solve_cap(
        b,
        |a| 0.5 * b * (1.0 + a * a),
        |c2| Ok(2.0 / r * q_inverse_open((1.0 - delta) / 2.0 - c2 / s - gamma)?),
    )
}

/// `(1/√χ²)(Q⁻¹(1 − α − δ − C₂/√n − γ) + Q⁻¹(α))` with `C₂ = B(1 + A²)`, `B = B₀ + B₁ + B₃`.
pub fn weight_bound_beta(
    delta: f64,
    alpha: f64,
    n: usize,
    gamma: f64,
    c: &ChannelConstants,
) -> Result<WeightCap> {
    check_gamma(gamma)?;
    let k = detector_constants(&c.pair.willie)?;
    let b = k.b0 + k.b1 + k.b3;
    let s = (n as f64).sqrt();
    let r = c.chi2_q.sqrt();
    let qa = q_inverse_open(alpha)?;
    solve_cap(
        b,
        |a| b * (1.0 + a * a),
        |c2| Ok((q_inverse_open(1.0 - alpha - delta - c2 / s - gamma)? + qa) / r),
    )
}

/// Rate limit `g(δ)` of the all-codes first-order converse.
pub fn weight_limit(metric: Metric, delta: f64, c: &ChannelConstants) -> Result<f64> {
    weight_scale(metric, delta, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverseSecondOrder {
    /// `gD_P√n − √(gV_P)Q⁻¹(ε)n^{1/4} + log(√n·g + C)`.
    pub value: f64,
    pub g: f64,
    /// `C = w_cap − √n·g`.
    pub c: f64,
    pub weight_cap: f64,
    /// The asymptotic message-length bound evaluated at `weight_cap`.
    pub at_weight_cap: f64,
    /// Width of the excluded `O(1)` term, `|C|·D_P + |log B|`.
    pub band: f64,
    /// `false` when the metric's weight lemma has no admissible constant at this `n` and the
    /// trivial cap `w ≤ n` was used.
    pub lemma_cap: bool,
}

pub fn converse_secondorder(
    metric: Metric,
    n: usize,
    eps: f64,
    delta: f64,
    c: &ChannelConstants,
) -> Result<ConverseSecondOrder> {
    check_eps(eps)?;
    let g = weight_limit(metric, delta, c)?;
    let s = (n as f64).sqrt();
    let cap = match metric {
        Metric::Kl => weight_bound_d(delta, n, c),
        Metric::Tv => weight_bound_v(delta, n, 0.0, c).map(|w| w.per_sqrt_n),
        Metric::Beta(alpha) => weight_bound_beta(delta, alpha, n, 0.0, c).map(|w| w.per_sqrt_n),
    };
    let (w_cap, lemma_cap) = match cap {
        Ok(a) => ((s * a).min(n as f64), true),
        Err(Error::DomainError(_)) if g > 0.0 => (n as f64, false),
        Err(e) => return Err(e),
    };
    if !(w_cap > 0.0) {
        return Err(Error::DomainError(format!(
            "weight cap {w_cap} is not positive"
        )));
    }
    let value = g * c.d_p * s - (g * c.v_p).sqrt() * q_inverse(eps)? * s.sqrt() + w_cap.ln();
    let at_weight_cap = converse_logm_asymptotic(w_cap.max(1.0), eps, c)?;
    let cc = w_cap - s * g;
    Ok(ConverseSecondOrder {
        value,
        g,
        c: cc,
        weight_cap: w_cap,
        at_weight_cap,
        band: cc.abs() * c.d_p + c.berry_esseen_p()?.ln().abs(),
        lemma_cap,
    })
}
