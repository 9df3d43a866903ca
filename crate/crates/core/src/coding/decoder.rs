use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::Codebook;
use crate::dmc_core::{iid_sum_distribution_with_cap, BinaryDmc, DEFAULT_TYPE_CLASS_CAP};
use crate::error::{Error, Result};
use crate::ppm::{ppm_ratio_expectation, sample_ppm_with, PpmParams};

/// Output of the threshold decoder. Messages are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Message(usize),
    Erasure,
}

/// Information density `Σᵢ log W(yᵢ|xᵢ)/P₀(yᵢ)` of a pulse-position codeword, given the
/// per-symbol clamped LLR table.
fn density(llr: &[f64], x: &[usize], y: &[usize]) -> f64 {
    x.iter().map(|&i| llr[y[i - 1]]).sum()
}

fn decode_with(llr: &[f64], subcode: &[Vec<usize>], y: &[usize], gamma: f64) -> Decision {
    let mut found = None;
    for (w, x) in subcode.iter().enumerate() {
        if density(llr, x, y) > gamma {
            if found.is_some() {
                return Decision::Erasure;
            }
            found = Some(w);
        }
    }
    found.map_or(Decision::Erasure, Decision::Message)
}

/// Declares `w` iff it is the only codeword of the sub-code whose information density against
/// `Q_Y = P₀^⊗n` exceeds `γ`.
pub fn threshold_decode(
    bob: &BinaryDmc,
    subcode: &[Vec<usize>],
    y: &[usize],
    gamma: f64,
) -> Decision {
    decode_with(&bob.llr_vector(), subcode, y, gamma)
}

/// The two terms of the random-coding error bound at threshold `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBounds {
    /// `F_{XY|Q_Y}(γ)`, exact.
    pub eps1_expectation: f64,
    /// `(M/e^γ)·E_{P_Y}[P_Y/Q_Y]`.
    pub eps2_bound: f64,
}

impl ErrorBounds {
    pub fn total(&self) -> f64 {
        self.eps1_expectation + self.eps2_bound
    }
}

pub fn error_expectation_bounds(
    bob: &BinaryDmc,
    params: &PpmParams,
    m: f64,
    gamma: f64,
) -> Result<ErrorBounds> {
    let law = iid_sum_distribution_with_cap(
        &bob.llr_vector(),
        bob.w1(),
        params.ell,
        DEFAULT_TYPE_CLASS_CAP,
    )?;
    let ratio = ppm_ratio_expectation(bob, params)?.exact;
    Ok(ErrorBounds {
        eps1_expectation: law.cdf(gamma),
        eps2_bound: m * (-gamma).exp() * ratio,
    })
}

/// Error counts of a Bernoulli experiment with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialEstimate {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub sigma: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

pub const WILSON_Z: f64 = 1.959963984540054;

impl BinomialEstimate {
    pub fn new(errors: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let p = errors as f64 / n;
        let z2 = WILSON_Z * WILSON_Z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
        Self {
            errors,
            trials,
            rate: p,
            sigma: (p * (1.0 - p) / n).sqrt(),
            wilson_lo: if errors == 0 {
                0.0
            } else {
                (centre - half).max(0.0)
            },
            wilson_hi: if errors >= trials {
                1.0
            } else {
                (centre + half).min(1.0)
            },
        }
    }
}

/// Which error probability a Monte Carlo run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum ErrorCriterion {
    /// `max_s` of the per-key average error.
    #[default]
    MaxOverKeys,
    /// Average over keys and messages.
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McErrorEstimate {
    pub criterion: ErrorCriterion,
    pub per_key: Vec<BinomialEstimate>,
    /// The key attaining the maximum, or the pooled estimate when averaged.
    pub estimate: BinomialEstimate,
}

impl McErrorEstimate {
    fn reduce(per_key: Vec<BinomialEstimate>, criterion: ErrorCriterion) -> Self {
        let estimate = match criterion {
            ErrorCriterion::MaxOverKeys => *per_key
                .iter()
                .max_by(|a, b| a.rate.total_cmp(&b.rate))
                .expect("at least one key"),
            ErrorCriterion::Averaged => BinomialEstimate::new(
                per_key.iter().map(|e| e.errors).sum(),
                per_key.iter().map(|e| e.trials).sum(),
            ),
        };
        Self {
            criterion,
            per_key,
            estimate,
        }
    }
}

/// Trials per independently seeded task.
pub const MC_CHUNK: u64 = 4096;

fn sample_symbol<R: Rng>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

struct Simulator {
    llr: Vec<f64>,
    cdf0: Vec<f64>,
    cdf1: Vec<f64>,
    n: usize,
    gamma: f64,
}

impl Simulator {
    fn new(bob: &BinaryDmc, n: usize, gamma: f64) -> Self {
        Self {
            llr: bob.llr_vector(),
            cdf0: cumulative(bob.w0().probs()),
            cdf1: cumulative(bob.w1().probs()),
            n,
            gamma,
        }
    }

    /// Sends a uniformly chosen message of `subcode` once; returns whether it was lost.
    fn trial<R: Rng>(&self, subcode: &[Vec<usize>], y: &mut [usize], rng: &mut R) -> bool {
        let w = rng.gen_range(0..subcode.len());
        let mut pulses = subcode[w].iter().peekable();
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let cdf = if pulses.peek() == Some(&&(i + 1)) {
                pulses.next();
                &self.cdf1
            } else {
                &self.cdf0
            };
            *yi = sample_symbol(cdf, rng);
        }
        decode_with(&self.llr, subcode, y, self.gamma) != Decision::Message(w)
    }
}

fn chunk_rng(seed: u64, key: usize, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((key as u64) << 32) ^ chunk);
    rng
}

fn run_chunks(trials: u64, per_chunk: impl Fn(u64, u64) -> u64 + Sync) -> u64 {
    let chunks = trials.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| per_chunk(c, MC_CHUNK.min(trials - c * MC_CHUNK)))
        .sum()
}

/// Average error of every sub-code of a fixed codebook, using `trials_per_key` uniformly
/// drawn messages per key. Deterministic in `seed` regardless of the thread count.
pub fn montecarlo_error(
    codebook: &Codebook,
    bob: &BinaryDmc,
    gamma: f64,
    trials_per_key: u64,
    seed: u64,
    criterion: ErrorCriterion,
) -> McErrorEstimate {
    let sim = Simulator::new(bob, codebook.n(), gamma);
    let per_key = (0..codebook.k())
        .map(|s| {
            let errors = run_chunks(trials_per_key, |c, t| {
                let mut rng = chunk_rng(seed, s, c);
                let mut y = vec![0; codebook.n()];
                (0..t)
                    .filter(|_| sim.trial(codebook.subcode(s), &mut y, &mut rng))
                    .count() as u64
            });
            BinomialEstimate::new(errors, trials_per_key)
        })
        .collect();
    McErrorEstimate::reduce(per_key, criterion)
}

/// Ensemble error: every trial draws a fresh random PPM sub-code of `m` codewords, so each
/// key's rate estimates the random-coding average error.
pub fn montecarlo_ensemble_error(
    params: &PpmParams,
    m: usize,
    keys: usize,
    bob: &BinaryDmc,
    gamma: f64,
    trials_per_key: u64,
    seed: u64,
    criterion: ErrorCriterion,
) -> Result<McErrorEstimate> {
    if m == 0 || keys == 0 {
        return Err(Error::InvalidParams(format!(
            "need M·K ≥ 1, got M = {m}, K = {keys}"
        )));
    }
    let sim = Simulator::new(bob, params.n, gamma);
    let per_key = (0..keys)
        .map(|s| {
            let errors = run_chunks(trials_per_key, |c, t| {
                let mut rng = chunk_rng(seed, s, c);
                let mut y = vec![0; params.n];
                (0..t)
                    .filter(|_| {
                        let sub: Vec<Vec<usize>> =
                            (0..m).map(|_| sample_ppm_with(params, &mut rng)).collect();
                        sim.trial(&sub, &mut y, &mut rng)
                    })
                    .count() as u64
            });
            BinomialEstimate::new(errors, trials_per_key)
        })
        .collect();
    Ok(McErrorEstimate::reduce(per_key, criterion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::generate_codebook;
    use crate::dmc_core::FiniteDistribution;
    use crate::ppm::make_ppm;

    fn bsc(p: f64) -> BinaryDmc {
        BinaryDmc::bsc(p).unwrap()
    }

    #[test]
    fn single_message_always_decodes() {
        let code = vec![vec![2, 5]];
        for y in [[0, 0, 0, 0, 0, 0], [1, 1, 0, 1, 0, 1]] {
            assert_eq!(
                threshold_decode(&bsc(0.2), &code, &y, -1e9),
                Decision::Message(0)
            );
        }
    }

    #[test]
    fn noiseless_double_is_always_correct() {
        let bob = BinaryDmc::degenerate(
            FiniteDistribution::from_probs(vec![1.0, 0.0]).unwrap(),
            FiniteDistribution::from_probs(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let params = make_ppm(12, 3).unwrap();
        let code = generate_codebook(&params, 16, 1, 3).unwrap();
        let mut distinct = code.subcode(0).to_vec();
        distinct.sort();
        distinct.dedup();
        let est = montecarlo_error(
            &Codebook::new(12, 3, vec![distinct]).unwrap(),
            &bob,
            1800.0,
            2000,
            1,
            ErrorCriterion::MaxOverKeys,
        );
        assert_eq!(est.estimate.errors, 0);
    }

    #[test]
    fn two_codewords_collide_to_erasure() {
        let code = vec![vec![1], vec![2]];
        assert_eq!(
            threshold_decode(&bsc(0.1), &code, &[1, 1], 0.0),
            Decision::Erasure
        );
        assert_eq!(
            threshold_decode(&bsc(0.1), &code, &[1, 0], 0.0),
            Decision::Message(0)
        );
        assert_eq!(
            threshold_decode(&bsc(0.1), &code, &[0, 0], 0.0),
            Decision::Erasure
        );
    }

    #[test]
    fn eps1_matches_brute_force() {
        let bob = bsc(0.11);
        let params = make_ppm(8, 2).unwrap();
        let b = error_expectation_bounds(&bob, &params, 4.0, 1.0).unwrap();
        let llr = bob.llr_vector();
        let mut brute = 0.0;
        for y1 in 0..2 {
            for y2 in 0..2 {
                if llr[y1] + llr[y2] <= 1.0 {
                    brute += bob.w1().prob(y1) * bob.w1().prob(y2);
                }
            }
        }
        assert!((b.eps1_expectation - brute).abs() < 1e-15);
        let ratio = (1.0f64 + (0.89f64 - 0.11).powi(2) / (0.89 * 0.11) / 4.0).powi(2);
        assert!((b.eps2_bound - 4.0 * (-1.0f64).exp() * ratio).abs() < 1e-12);
        let hi = error_expectation_bounds(&bob, &params, 4.0, 1e3).unwrap();
        assert_eq!(hi.eps1_expectation, 1.0);
        assert!(hi.eps2_bound < 1e-300);
        assert_eq!(
            error_expectation_bounds(&bob, &params, 4.0, -1e3)
                .unwrap()
                .eps1_expectation,
            0.0
        );
    }

    #[test]
    fn wilson_interval() {
        let e = BinomialEstimate::new(0, 100);
        assert_eq!(e.wilson_lo, 0.0);
        assert!(e.wilson_hi > 0.03 && e.wilson_hi < 0.04);
        let e = BinomialEstimate::new(50, 100);
        assert!((e.wilson_lo + e.wilson_hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_respects_random_coding_bound_and_is_reproducible() {
        let bob = bsc(0.11);
        let params = make_ppm(32, 4).unwrap();
        let gamma = 3.0;
        let bound = error_expectation_bounds(&bob, &params, 4.0, gamma)
            .unwrap()
            .total();
        let a = montecarlo_ensemble_error(
            &params,
            4,
            2,
            &bob,
            gamma,
            20_000,
            9,
            ErrorCriterion::MaxOverKeys,
        )
        .unwrap();
        let b = montecarlo_ensemble_error(
            &params,
            4,
            2,
            &bob,
            gamma,
            20_000,
            9,
            ErrorCriterion::MaxOverKeys,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(
            a.estimate.rate <= bound + 3.0 * a.estimate.sigma,
            "{} > {bound}",
            a.estimate.rate
        );
        let c = montecarlo_ensemble_error(
            &params,
            4,
            2,
            &bob,
            gamma,
            20_000,
            10,
            ErrorCriterion::Averaged,
        )
        .unwrap();
        let pooled = (a.estimate.sigma.powi(2) + c.estimate.sigma.powi(2)).sqrt();
        assert!((a.estimate.rate - c.estimate.rate).abs() <= 3.0 * pooled + 3.0 * a.estimate.sigma);
    }
}
