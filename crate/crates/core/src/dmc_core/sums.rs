use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::distribution::FiniteDistribution;
use crate::error::{Error, Result};

/// Relative tolerance under which two atom values are treated as one.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Default cap on enumerated type classes (and on atoms produced by a convolution).
pub const DEFAULT_TYPE_CLASS_CAP: u128 = 10_000_000;

pub(crate) fn same_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

/// Exact law of a sum of finite-valued variables as sorted `value → probability` atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumDistribution {
    atoms: Vec<(f64, f64)>,
    count: usize,
}

impl SumDistribution {
    /// The law of the empty sum.
    pub fn zero() -> Self {
        Self {
            atoms: vec![(0.0, 1.0)],
            count: 0,
        }
    }

    /// Builds a law from unsorted atoms, merging values that coincide within tolerance and
    /// dropping zero-probability atoms.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>, count: usize) -> Self {
        atoms.retain(|&(_, p)| p > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if same_value(last.0, v) => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Self {
            atoms: merged,
            count,
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * f(v)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.expect(|v| (v - mu) * (v - mu))
    }

    pub fn raw_moment(&self, k: i32) -> f64 {
        self.expect(|v| v.powi(k))
    }

    pub fn central_abs_moment(&self, k: i32) -> f64 {
        let mu = self.mean();
        self.expect(|v| (v - mu).abs().powi(k))
    }

    /// Mean, variance and third absolute central moment of the whole sum.
    pub fn moments(&self) -> GaussianMoments {
        GaussianMoments {
            mean: self.mean(),
            variance: self.variance(),
            third_abs_central_moment: self.central_abs_moment(3),
        }
    }

    /// `P{S ≤ x}`; atoms within merge tolerance of `x` count as equal to it.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v <= x || same_value(v, x))
            .map(|a| a.1)
            .sum()
    }

    /// `P{S > x}` with the same tie convention as [`SumDistribution::cdf`].
    pub fn tail_gt(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v > x && !same_value(v, x))
            .map(|a| a.1)
            .sum()
    }

    /// `P{S ≥ x}`.
    pub fn tail_ge(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v >= x || same_value(v, x))
            .map(|a| a.1)
            .sum()
    }

    /// Law of `f(S)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_atoms(
            self.atoms.iter().map(|&(v, p)| (f(v), p)).collect(),
            self.count,
        )
    }

    /// Law of the sum of two independent variables.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_with_cap(other, DEFAULT_TYPE_CLASS_CAP)
    }

    pub fn convolve_with_cap(&self, other: &Self, cap: u128) -> Result<Self> {
        let pairs = self.atoms.len() as u128 * other.atoms.len() as u128;
        if pairs > cap {
            return Err(Error::CombinatorialBlowup { count: pairs, cap });
        }
        let mut atoms = Vec::with_capacity(pairs as usize);
        for &(a, p) in &self.atoms {
            for &(b, q) in &other.atoms {
                atoms.push((a + b, p * q));
            }
        }
        Ok(Self::from_atoms(atoms, self.count + other.count))
    }

    /// Law of the sum of `k` independent copies, by repeated squaring.
    pub fn convolve_power(&self, k: usize) -> Result<Self> {
        let mut result = Self::zero();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.convolve(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.convolve(&base)?;
            }
        }
        Ok(result)
    }
}

/// Number of type classes of `count` draws from `k` symbols, saturating at `u128::MAX`.
pub fn type_class_count(count: usize, k: usize) -> u128 {
    if k == 0 {
        return if count == 0 { 1 } else { 0 };
    }
    let (n, r) = ((count + k - 1) as u128, (k - 1).min(count) as u128);
    let mut c: u128 = 1;
    for i in 0..r {
        c = match c.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Exact law of `Σ score(X_i)` for `count` i.i.d. draws from `base`, by type-class enumeration.
pub fn iid_sum_distribution(
    score: &[f64],
    base: &FiniteDistribution,
    count: usize,
) -> Result<SumDistribution> {
    iid_sum_distribution_with_cap(score, base, count, DEFAULT_TYPE_CLASS_CAP)
}

pub fn iid_sum_distribution_with_cap(
    score: &[f64],
    base: &FiniteDistribution,
    count: usize,
    cap: u128,
) -> Result<SumDistribution> {
    if score.len() != base.len() {
        return Err(Error::AlphabetMismatch(format!(
            "{} scores for {} symbols",
            score.len(),
            base.len()
        )));
    }
    let support: Vec<(f64, f64)> = base
        .probs()
        .iter()
        .zip(score)
        .filter(|(p, _)| **p > 0.0)
        .map(|(&p, &s)| (p.ln(), s))
        .collect();
    let classes = type_class_count(count, support.len());
    if classes > cap {
        return Err(Error::CombinatorialBlowup {
            count: classes,
            cap,
        });
    }
    let mut atoms = Vec::with_capacity(classes as usize);
    let mut counts = vec![0usize; support.len()];
    let weight = TypeWeight::new(&support, count);
    enumerate_types(&support, &weight, count, 0, &mut counts, &mut atoms);
    Ok(SumDistribution::from_atoms(atoms, count))
}

/// Probability of one type class. Small counts use direct products, which are exact up to
/// rounding; large counts go through log-factorials.
struct TypeWeight {
    direct: bool,
    ln_fact: Vec<f64>,
}

const DIRECT_MAX_COUNT: usize = 120;

impl TypeWeight {
    fn new(support: &[(f64, f64)], count: usize) -> Self {
        let direct = count <= DIRECT_MAX_COUNT && !support.is_empty();
        let ln_fact = if direct {
            Vec::new()
        } else {
            (0..=count).map(|i| ln_gamma(i as f64 + 1.0)).collect()
        };
        Self { direct, ln_fact }
    }

    fn prob(&self, support: &[(f64, f64)], counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        if self.direct {
            let mut p = 1.0;
            let mut rest = n;
            for (&(lnp, _), &k) in support.iter().zip(counts) {
                p *= binomial_f64(rest, k) * lnp.exp().powi(k as i32);
                rest -= k;
            }
            p
        } else {
            let mut lp = self.ln_fact[n];
            for (&(lnp, _), &k) in support.iter().zip(counts) {
                if k > 0 {
                    lp += k as f64 * lnp - self.ln_fact[k];
                }
            }
            lp.exp()
        }
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

fn enumerate_types(
    support: &[(f64, f64)],
    weight: &TypeWeight,
    remaining: usize,
    idx: usize,
    counts: &mut Vec<usize>,
    out: &mut Vec<(f64, f64)>,
) {
    if support.is_empty() {
        return;
    }
    if idx + 1 == support.len() {
        counts[idx] = remaining;
        let value = support
            .iter()
            .zip(counts.iter())
            .map(|(&(_, s), &k)| k as f64 * s)
            .sum();
        out.push((value, weight.prob(support, counts)));
        return;
    }
    for k in 0..=remaining {
        counts[idx] = k;
        enumerate_types(support, weight, remaining - k, idx + 1, counts, out);
    }
}

/// Totals `Σμ_k`, `σ² = Σσ_k²` and `T = Σt_k` for a sum of independent summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianMoments {
    pub mean: f64,
    pub variance: f64,
    pub third_abs_central_moment: f64,
}

impl GaussianMoments {
    /// Moments of a single variable given as `(value, probability)` atoms.
    pub fn of_atoms(atoms: &[(f64, f64)]) -> Self {
        SumDistribution::from_atoms(atoms.to_vec(), 1).moments()
    }

    /// Totals for `n` i.i.d. copies.
    pub fn iid(self, n: usize) -> Self {
        let k = n as f64;
        Self {
            mean: k * self.mean,
            variance: k * self.variance,
            third_abs_central_moment: k * self.third_abs_central_moment,
        }
    }

    /// Totals for the sum of independent parts.
    pub fn plus(self, other: Self) -> Self {
        Self {
            mean: self.mean + other.mean,
            variance: self.variance + other.variance,
            third_abs_central_moment: self.third_abs_central_moment
                + other.third_abs_central_moment,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Berry–Esseen bound `6T/σ³` on `|P{Σ(X_k − μ_k) ≥ λσ} − Q(λ)|`. The bound is uniform in `λ`.
pub fn berry_esseen_bound(moments: &GaussianMoments, _lambda: f64) -> Result<f64> {
    if !(moments.variance > 0.0) {
        return Err(Error::DegenerateVariance(format!(
            "σ² = {}",
            moments.variance
        )));
    }
    Ok(6.0 * moments.third_abs_central_moment / moments.variance.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc_core::q_function;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> FiniteDistribution {
        FiniteDistribution::from_probs(p.to_vec()).unwrap()
    }

    /// Brute force over all `|X|^count` outcome sequences.
    fn brute(score: &[f64], base: &[f64], count: usize) -> SumDistribution {
        let k = base.len();
        let mut atoms = Vec::new();
        for idx in 0..k.pow(count as u32) {
            let (mut rest, mut v, mut p) = (idx, 0.0, 1.0);
            for _ in 0..count {
                let s = rest % k;
                rest /= k;
                v += score[s];
                p *= base[s];
            }
            atoms.push((v, p));
        }
        SumDistribution::from_atoms(atoms, count)
    }

    #[test]
    fn empty_sum() {
        let s = iid_sum_distribution(&[1.0, 2.0], &d(&[0.5, 0.5]), 0).unwrap();
        assert_eq!(s.atoms(), &[(0.0, 1.0)]);
    }

    #[test]
    fn binomial() {
        let s = iid_sum_distribution(&[0.0, 1.0], &d(&[0.5, 0.5]), 2).unwrap();
        let want = [(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)];
        for (a, b) in s.atoms().iter().zip(want) {
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn llr_on_bsc() {
        let l = (0.89f64 / 0.11).ln();
        let s = iid_sum_distribution(&[l, -l], &d(&[0.89, 0.11]), 3).unwrap();
        assert_eq!(s.atoms().len(), 4);
        let b = brute(&[l, -l], &[0.89, 0.11], 3);
        for (a, b) in s.atoms().iter().zip(b.atoms()) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
        assert!((s.atoms()[3].1 - 0.89f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn blowup_is_reported() {
        let base = FiniteDistribution::uniform(6).unwrap();
        let r = iid_sum_distribution_with_cap(&[0., 1., 2., 3., 4., 5.], &base, 30, 1000);
        assert!(matches!(r, Err(Error::CombinatorialBlowup { .. })));
        assert_eq!(type_class_count(30, 6), 324_632);
    }

    #[test]
    fn convolution_power_matches_enumeration() {
        let base = d(&[0.2, 0.5, 0.3]);
        let score = [-1.0, 0.25, 2.0];
        let one = iid_sum_distribution(&score, &base, 1).unwrap();
        let five = one.convolve_power(5).unwrap();
        let direct = iid_sum_distribution(&score, &base, 5).unwrap();
        assert_eq!(five.atoms().len(), direct.atoms().len());
        for (a, b) in five.atoms().iter().zip(direct.atoms()) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn berry_esseen_constant() {
        let m = GaussianMoments::of_atoms(&[(-1.0, 0.5), (1.0, 0.5)]);
        assert_eq!(berry_esseen_bound(&m, 0.0).unwrap(), 6.0);
        let z = GaussianMoments {
            mean: 0.0,
            variance: 0.0,
            third_abs_central_moment: 0.0,
        };
        assert!(matches!(
            berry_esseen_bound(&z, 0.0),
            Err(Error::DegenerateVariance(_))
        ));
    }

    fn pmf(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.05f64..1.0, k).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn type_enumeration_equals_brute_force(
            (base, score) in (2usize..=3).prop_flat_map(|k| (pmf(k), proptest::collection::vec(-3.0f64..3.0, k))),
            count in 0usize..=8,
        ) {
            let s = iid_sum_distribution(&score, &d(&base), count).unwrap();
            let b = brute(&score, &base, count);
            prop_assert_eq!(s.atoms().len(), b.atoms().len());
            for (x, y) in s.atoms().iter().zip(b.atoms()) {
                prop_assert!((x.0 - y.0).abs() < 1e-12);
                prop_assert!((x.1 - y.1).abs() < 1e-12);
            }
        }

        #[test]
        fn berry_esseen_envelope(
            (base, score) in (2usize..=3).prop_flat_map(|k| (pmf(k), proptest::collection::vec(-3.0f64..3.0, k))),
            count in 1usize..=12,
        ) {
            let per = GaussianMoments::of_atoms(&score.iter().copied().zip(base.iter().copied()).collect::<Vec<_>>());
            prop_assume!(per.variance > 1e-6);
            let tot = per.iid(count);
            let bound = berry_esseen_bound(&tot, 0.0).unwrap();
            let s = iid_sum_distribution(&score, &d(&base), count).unwrap();
            for &(v, _) in s.atoms() {
                let lambda = (v - tot.mean) / tot.sigma();
                prop_assert!((s.tail_ge(v) - q_function(lambda)).abs() <= bound + 1e-12);
                prop_assert!((s.tail_gt(v) - q_function(lambda)).abs() <= bound + 1e-12);
            }
        }
    }
}
