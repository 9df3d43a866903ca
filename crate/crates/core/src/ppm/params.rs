use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(n, ℓ)`-PPM: `ℓ` windows of `m = ⌊n/ℓ⌋` contiguous positions, one pulse per window, and
/// a trailing all-zero remainder of `r = n mod ℓ` positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpmParams {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
    pub r: usize,
}

pub fn make_ppm(n: usize, ell: usize) -> Result<PpmParams> {
    if ell == 0 || ell > n {
        return Err(Error::InvalidParams(format!(
            "PPM needs 1 ≤ ℓ ≤ n, got n = {n}, ℓ = {ell}"
        )));
    }
    Ok(PpmParams {
        n,
        ell,
        m: n / ell,
        r: n % ell,
    })
}

impl PpmParams {
    /// 1-based positions of window `i` (0-based window index).
    pub fn window(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i * self.m + 1..=(i + 1) * self.m
    }

    /// `m^ℓ`, saturating.
    pub fn support_size(&self) -> u128 {
        (self.m as u128)
            .checked_pow(self.ell as u32)
            .unwrap_or(u128::MAX)
    }

    /// Every codeword of the support in lexicographic order of pulse positions.
    pub fn support(&self, cap: u128) -> Result<Vec<Vec<usize>>> {
        let size = self.support_size();
        if size > cap {
            return Err(Error::CombinatorialBlowup { count: size, cap });
        }
        let mut out = Vec::with_capacity(size as usize);
        let mut offsets = vec![0usize; self.ell];
        loop {
            out.push(
                offsets
                    .iter()
                    .enumerate()
                    .map(|(i, &o)| i * self.m + o + 1)
                    .collect(),
            );
            let mut i = self.ell;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                offsets[i] += 1;
                if offsets[i] < self.m {
                    break;
                }
                offsets[i] = 0;
            }
        }
    }

    /// Whether the block-count regime `ℓ = Θ(m)` of the divergence lemma is plausible; here
    /// `ℓ ≤ m`, i.e. roughly `ℓ ≤ √n`.
    pub fn in_regime(&self) -> bool {
        self.ell <= self.m
    }
}

/// One PPM codeword as sorted 1-based pulse positions, reproducible from `seed`.
pub fn sample_ppm_codeword(params: &PpmParams, seed: u64) -> Vec<usize> {
    sample_ppm_with(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_ppm_with<R: Rng + ?Sized>(params: &PpmParams, rng: &mut R) -> Vec<usize> {
    (0..params.ell)
        .map(|i| i * params.m + rng.gen_range(0..params.m) + 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let p = make_ppm(4, 2).unwrap();
        assert_eq!((p.m, p.r), (2, 0));
        assert_eq!(
            p.support(64).unwrap(),
            vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]]
        );
        let p = make_ppm(5, 2).unwrap();
        assert_eq!((p.m, p.r), (2, 1));
        assert!(p.support(64).unwrap().iter().all(|x| !x.contains(&5)));
        let p = make_ppm(7, 1).unwrap();
        assert_eq!(p.support(64).unwrap().len(), 7);
        assert!(make_ppm(3, 0).is_err());
        assert!(make_ppm(3, 4).is_err());
    }

    #[test]
    fn sampler_stays_in_windows() {
        let p = make_ppm(4, 2).unwrap();
        for seed in 0..50 {
            let x = sample_ppm_codeword(&p, seed);
            assert_eq!(x.len(), 2);
            assert!(p.window(0).contains(&x[0]) && p.window(1).contains(&x[1]));
        }
        assert_eq!(sample_ppm_codeword(&p, 9), sample_ppm_codeword(&p, 9));
    }

    #[test]
    fn sampler_hits_whole_support() {
        let p = make_ppm(6, 3).unwrap();
        let support = p.support(64).unwrap();
        assert_eq!(support.len(), 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            seen.insert(sample_ppm_with(&p, &mut rng));
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn window_marginals_are_uniform() {
        let p = make_ppm(12, 3).unwrap();
        let trials = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [[0u32; 4]; 3];
        for _ in 0..trials {
            for (i, pos) in sample_ppm_with(&p, &mut rng).into_iter().enumerate() {
                counts[i][pos - i * p.m - 1] += 1;
            }
        }
        let sd = (trials as f64 * 0.25 * 0.75).sqrt();
        for c in counts.iter().flatten() {
            assert!((*c as f64 - trials as f64 / 4.0).abs() < 3.0 * sd, "{c}");
        }
    }
}
