use serde::Serialize;

use crate::dmc_core::{
    iid_sum_distribution_with_cap, q_function, BinaryDmc, SumDistribution, DEFAULT_TYPE_CLASS_CAP,
};
use crate::error::{Error, Result};
use crate::ppm::ScoreA;

const SQRT_2PI: f64 = 2.5066282746310002;

/// The radiometer test `1{Σ A(zᵢ) > τ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorSpec {
    pub score: ScoreA,
    pub tau: f64,
}

impl DetectorSpec {
    pub fn new(willie: &BinaryDmc, tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::DomainError(format!("τ = {tau} must be finite")));
        }
        Ok(Self {
            score: ScoreA::new(willie),
            tau,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RocMode {
    Exact,
    BerryEsseen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub false_alarm: f64,
    pub missed_detection: f64,
    pub mode: RocMode,
}

/// A named constant with the formula it was evaluated from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedConstant {
    pub name: &'static str,
    pub formula: &'static str,
    pub value: f64,
}

/// Moments of `A(Z)` under `Q₀` and `Q₁` and the proof constants built from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorConstants {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub t0: f64,
    pub t1: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub log: Vec<NamedConstant>,
}

fn moments(score: &[f64], probs: &[f64]) -> (f64, f64, f64) {
    let mean: f64 = probs.iter().zip(score).map(|(p, a)| p * a).sum();
    let var: f64 = probs
        .iter()
        .zip(score)
        .map(|(p, a)| p * (a - mean).powi(2))
        .sum();
    let t: f64 = probs
        .iter()
        .zip(score)
        .map(|(p, a)| p * (a - mean).abs().powi(3))
        .sum();
    (mean, var, t)
}

/// `max_{f ∈ [0,1]} 6(t₀ + f(t₁ − t₀))/(σ₀² + f(σ₁² − σ₀²))^{3/2}`.
fn b1_constant(t0: f64, t1: f64, v0: f64, v1: f64) -> f64 {
    let (a, b, c, d) = (t0, t1 - t0, v0, v1 - v0);
    let h = |f: f64| 6.0 * (a + f * b) / (c + f * d).powf(1.5);
    let mut best = h(0.0).max(h(1.0));
    if b != 0.0 && d != 0.0 {
        let f = (1.5 * d * a - b * c) / (-0.5 * b * d);
        if (0.0..=1.0).contains(&f) {
            best = best.max(h(f));
        }
    }
    best
}

pub fn detector_constants(willie: &BinaryDmc) -> Result<DetectorConstants> {
    let score = ScoreA::new(willie);
    let (mu0, v0, t0) = moments(score.values(), willie.w0().probs());
    let (mu1, v1, t1) = moments(score.values(), willie.w1().probs());
    if !(v0 > 0.0) {
        return Err(Error::DegenerateVariance("Var_{Q₀} A(Z) = 0".into()));
    }
    let (sigma0, sigma1) = (v0.sqrt(), v1.sqrt());
    let b0 = 6.0 * t0 / sigma0.powi(3);
    let b1 = b1_constant(t0, t1, v0, v1);
    let b2 = sigma1 * (v1 - v0) / (2.0 * sigma0.powi(3));
    let b3 = if sigma1 < sigma0 {
        0.0
    } else {
        (mu1 - mu0) * b2 / (SQRT_2PI * 2.0 * sigma0)
    };
    let log = vec![
        NamedConstant {
            name: "B0",
            formula: "6 t0 / sigma0^3",
            value: b0,
        },
        NamedConstant {
            name: "B1",
            formula:
                "max_{f in [0,1]} 6 (t0 + f (t1 - t0)) / (sigma0^2 + f (sigma1^2 - sigma0^2))^{3/2}",
            value: b1,
        },
        NamedConstant {
            name: "B2",
            formula: "sigma1 (sigma1^2 - sigma0^2) / (2 sigma0^3)",
            value: b2,
        },
        NamedConstant {
            name: "B3",
            formula: "(mu1 - mu0) B2 / (2 sqrt(2 pi) sigma0), or 0 when sigma1 < sigma0",
            value: b3,
        },
    ];
    Ok(DetectorConstants {
        mu0,
        mu1,
        sigma0,
        sigma1,
        t0,
        t1,
        b0,
        b1,
        b2,
        b3,
        log,
    })
}

/// Exact law of `Σ A(Zᵢ)` given a weight-`w` codeword.
pub fn detector_statistic_law(n: usize, w: usize, willie: &BinaryDmc) -> Result<SumDistribution> {
    detector_statistic_law_with_cap(n, w, willie, DEFAULT_TYPE_CLASS_CAP)
}

pub fn detector_statistic_law_with_cap(
    n: usize,
    w: usize,
    willie: &BinaryDmc,
    cap: u128,
) -> Result<SumDistribution> {
    if w > n {
        return Err(Error::InvalidParams(format!("weight {w} exceeds n = {n}")));
    }
    let score = ScoreA::new(willie);
    let ones = iid_sum_distribution_with_cap(score.values(), willie.w1(), w, cap)?;
    let zeros = iid_sum_distribution_with_cap(score.values(), willie.w0(), n - w, cap)?;
    ones.convolve_with_cap(&zeros, cap)
}

/// The proof's threshold `τ = nμ₀ + (w/2)(μ₁ − μ₀)`.
pub fn midpoint_threshold(n: usize, w: usize, k: &DetectorConstants) -> f64 {
    n as f64 * k.mu0 + 0.5 * w as f64 * (k.mu1 - k.mu0)
}

/// Exact and Berry–Esseen operating points of the radiometer at `τ` against a weight-`w` codeword.
pub fn detector_roc(
    n: usize,
    w: usize,
    willie: &BinaryDmc,
    tau: f64,
) -> Result<(RocPoint, RocPoint)> {
    if w == 0 || w > n {
        return Err(Error::InvalidParams(format!(
            "need 0 < w ≤ n, got w = {w}, n = {n}"
        )));
    }
    DetectorSpec::new(willie, tau)?;
    let k = detector_constants(willie)?;
    let h0 = detector_statistic_law(n, 0, willie)?;
    let h1 = detector_statistic_law(n, w, willie)?;
    let exact = RocPoint {
        false_alarm: h0.tail_gt(tau),
        missed_detection: h1.cdf(tau),
        mode: RocMode::Exact,
    };
    let (nf, wf) = (n as f64, w as f64);
    let alpha = q_function((tau - nf * k.mu0) / (nf.sqrt() * k.sigma0)) + k.b0 / nf.sqrt();
    let f = wf / nf;
    let (v0, v1) = (k.sigma0.powi(2), k.sigma1.powi(2));
    let var = nf * v0 + wf * (v1 - v0);
    let beta = q_function((nf * k.mu0 + wf * (k.mu1 - k.mu0) - tau) / var.sqrt())
        + 6.0 * (k.t0 + f * (k.t1 - k.t0)) / ((v0 + f * (v1 - v0)).powf(1.5) * nf.sqrt());
    let bound = RocPoint {
        false_alarm: alpha.clamp(0.0, 1.0),
        missed_detection: beta.clamp(0.0, 1.0),
        mode: RocMode::BerryEsseen,
    };
    Ok((exact, bound))
}

/// `β ≤ Q(w(μ₁ − μ₀)/(2√n σ₀)) + w²B₃/n^{3/2} + B₁/√n` at the midpoint threshold, for any code
/// with minimum weight `w_min`.
pub fn missed_detection_bound(n: usize, w_min: usize, k: &DetectorConstants) -> f64 {
    let (nf, wf) = (n as f64, w_min as f64);
    let v = q_function(wf * (k.mu1 - k.mu0) / (2.0 * nf.sqrt() * k.sigma0))
        + wf * wf * k.b3 / nf.powf(1.5)
        + k.b1 / nf.sqrt();
    v.clamp(0.0, 1.0)
}

/// `1 − 2Q(w√χ²/(2√n)) − (B₀ + B₁)/√n − w²B₃/n^{3/2}`.
pub fn tv_lower_bound_from_wmin(n: usize, w_min: usize, willie: &BinaryDmc) -> Result<f64> {
    let k = detector_constants(willie)?;
    let (nf, wf) = (n as f64, w_min as f64);
    let chi2 = k.mu1;
    Ok(1.0
        - 2.0 * q_function(wf * chi2.sqrt() / (2.0 * nf.sqrt()))
        - (k.b0 + k.b1) / nf.sqrt()
        - wf * wf * k.b3 / nf.powf(1.5))
}

/// `Q(w√(χ²/n) − Q⁻¹(α)) + B/√n + w²B/n^{3/2}` with `B = B₀ + B₁ + B₃`.
pub fn beta_upper_bound_from_wmin(
    n: usize,
    w_min: usize,
    alpha: f64,
    willie: &BinaryDmc,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!(
            "α = {alpha} must lie in (0, 1)"
        )));
    }
    let k = detector_constants(willie)?;
    let (nf, wf) = (n as f64, w_min as f64);
    let chi2 = k.mu1;
    let qa = crate::dmc_core::q_inverse(alpha)?;
    if !(wf > nf.sqrt() * qa / chi2.sqrt()) {
        return Err(Error::PreconditionViolation(format!(
            "w_min = {w_min} must exceed √n·Q⁻¹(α)/√χ² = {:.4}",
            nf.sqrt() * qa / chi2.sqrt()
        )));
    }
    let b = k.b0 + k.b1 + k.b3;
    Ok(q_function(wf * (chi2 / nf).sqrt() - qa) + b / nf.sqrt() + wf * wf * b / nf.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{induced_output_distribution, Codebook};
    use crate::dmc_core::{beta_alpha, total_variation, FiniteDistribution};

    fn bsc45() -> BinaryDmc {
        BinaryDmc::bsc(0.45).unwrap()
    }

    #[test]
    fn law_means() {
        let w = bsc45();
        let k = detector_constants(&w).unwrap();
        assert!(detector_statistic_law(9, 0, &w).unwrap().mean().abs() < 1e-12);
        assert!((detector_statistic_law(9, 9, &w).unwrap().mean() - 9.0 * k.mu1).abs() < 1e-12);
        assert!((k.mu1 - k.sigma0.powi(2)).abs() < 1e-12);
        assert!(k.mu0.abs() < 1e-15);
    }

    #[test]
    fn law_matches_enumeration() {
        let w = bsc45();
        let a = ScoreA::new(&w);
        let law = detector_statistic_law(6, 2, &w).unwrap();
        let mut atoms = Vec::new();
        for z in 0..64u32 {
            let (mut s, mut p) = (0.0, 1.0);
            for i in 0..6 {
                let zi = ((z >> i) & 1) as usize;
                s += a.values()[zi];
                p *= w.law(u8::from(i < 2)).prob(zi);
            }
            atoms.push((s, p));
        }
        let brute = SumDistribution::from_atoms(atoms, 6);
        for &(x, _) in brute.atoms() {
            assert!((law.cdf(x) - brute.cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn roc_limits_and_domination() {
        let w = bsc45();
        let (e, _) = detector_roc(8, 3, &w, 1e9).unwrap();
        assert!(e.false_alarm.abs() < 1e-12 && (e.missed_detection - 1.0).abs() < 1e-12);
        let k = detector_constants(&w).unwrap();
        for n in 2..=14 {
            for wt in 1..=n {
                let (e, b) = detector_roc(n, wt, &w, midpoint_threshold(n, wt, &k)).unwrap();
                assert!(e.false_alarm <= b.false_alarm + 1e-12);
                assert!(e.missed_detection <= b.missed_detection + 1e-12);
                assert!(b.missed_detection <= missed_detection_bound(n, wt, &k) + 1e-12);
            }
        }
    }

    #[test]
    fn constants_are_logged() {
        let k = detector_constants(&bsc45()).unwrap();
        let names: Vec<_> = k.log.iter().map(|c| c.name).collect();
        assert_eq!(names, ["B0", "B1", "B2", "B3"]);
        assert!(k.b1 >= k.b0 - 1e-12);
        assert!(k.b3 >= 0.0);
    }

    fn single_weight(n: usize, w: usize) -> Codebook {
        let words = vec![(1..=w).collect(), (n - w + 1..=n).collect()];
        Codebook::new(n, w, vec![words]).unwrap()
    }

    /// `β` of the radiometer at the smallest threshold with exact false alarm at most `α`,
    /// an upper bound on `β_α`.
    fn detector_beta_at_level(n: usize, w: usize, alpha: f64, willie: &BinaryDmc) -> f64 {
        let h0 = detector_statistic_law(n, 0, willie).unwrap();
        let h1 = detector_statistic_law(n, w, willie).unwrap();
        h0.atoms()
            .iter()
            .map(|a| a.0)
            .filter(|&t| h0.tail_gt(t) <= alpha)
            .map(|t| h1.cdf(t))
            .fold(1.0, f64::min)
    }

    #[test]
    fn tv_and_beta_bounds_against_exact() {
        let w = bsc45();
        let k = detector_constants(&w).unwrap();
        let q0n = FiniteDistribution::from_probs(w.w0().probs().to_vec()).unwrap();
        for n in 3..=10 {
            let q0 = q0n.power(n).unwrap();
            for wt in 1..n {
                let p = induced_output_distribution(&single_weight(n, wt), &w).unwrap();
                let tv = total_variation(&p, &q0).unwrap();
                let (e, _) = detector_roc(n, wt, &w, midpoint_threshold(n, wt, &k)).unwrap();
                assert!(1.0 - e.false_alarm - e.missed_detection <= tv + 1e-12);
                assert!(tv_lower_bound_from_wmin(n, wt, &w).unwrap() <= tv + 1e-12);
                for &alpha in &[0.05, 0.2, 0.5] {
                    if let Ok(b) = beta_upper_bound_from_wmin(n, wt, alpha, &w) {
                        assert!(b >= detector_beta_at_level(n, wt, alpha, &w) - 1e-12);
                        if n <= 6 {
                            assert!(b >= beta_alpha(alpha, &q0, &p).unwrap() - 1e-12);
                        }
                    }
                }
            }
        }
        assert!(tv_lower_bound_from_wmin(10, 0, &w).unwrap() <= 0.0);
    }

    #[test]
    fn tv_bound_monotone_beta_precondition() {
        let w = bsc45();
        let n = 10_000;
        let mut prev = f64::NEG_INFINITY;
        for wt in (0..=n).step_by(50) {
            let b = tv_lower_bound_from_wmin(n, wt, &w).unwrap();
            if prev > 0.0 {
                assert!(b >= prev - 1e-12);
            }
            prev = prev.max(b);
        }
        assert!(matches!(
            beta_upper_bound_from_wmin(n, 0, 0.5, &w),
            Err(Error::PreconditionViolation(_))
        ));
        let big = 100_000_000;
        let a = beta_upper_bound_from_wmin(big, 90_000, 0.05, &w).unwrap();
        let b = beta_upper_bound_from_wmin(big, 100_000, 0.05, &w).unwrap();
        assert!(b < a);
        assert!(matches!(
            beta_upper_bound_from_wmin(big, 80_000, 0.05, &w),
            Err(Error::PreconditionViolation(_))
        ));
    }
}
