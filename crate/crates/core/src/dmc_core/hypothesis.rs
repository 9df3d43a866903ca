use super::distribution::FiniteDistribution;
use crate::error::{Error, Result};

/// Largest alphabet the exhaustive subset oracle accepts.
pub const EXHAUSTIVE_MAX_ATOMS: usize = 20;

/// Slack on the false-alarm constraint, absorbing rounding in summed masses.
const ALPHA_SLACK: f64 = 1e-12;

/// Default number of branch-and-bound nodes before `β_α` reports a blowup.
pub const NODE_BUDGET: u64 = 50_000_000;

/// Result of an optimal deterministic test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaAlpha {
    /// `inf Q(T)` over deterministic sets with `P(X∖T) ≤ α`.
    pub beta: f64,
    /// `P(X∖T)` of the minimizing set, which can be strictly below `α`.
    pub achieved_alpha: f64,
}

/// Optimal missed-detection probability `β_α(P, Q)` over deterministic tests.
pub fn beta_alpha(alpha: f64, p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    beta_alpha_detail(alpha, p, q).map(|b| b.beta)
}

pub fn beta_alpha_detail(
    alpha: f64,
    p: &FiniteDistribution,
    q: &FiniteDistribution,
) -> Result<BetaAlpha> {
    if !p.same_alphabet(q) {
        return Err(Error::AlphabetMismatch(
            "β_α needs a common alphabet".into(),
        ));
    }
    let items: Vec<(f64, f64)> = p
        .probs()
        .iter()
        .copied()
        .zip(q.probs().iter().copied())
        .collect();
    beta_alpha_items(alpha, &items)
}

/// `β_α` over atoms given as `(P-mass, Q-mass)` pairs. Sets are unions of whole atoms.
///
/// Excluding atoms from `T` is a 0/1 knapsack: capacity `α` in `P`-mass, value in `Q`-mass.
/// It is solved exactly by depth-first branch and bound over atoms in decreasing `Q/P` order,
/// pruning with the fractional relaxation; identical atoms are grouped so that ties do not
/// multiply branches.
pub fn beta_alpha_items(alpha: f64, items: &[(f64, f64)]) -> Result<BetaAlpha> {
    beta_alpha_items_with_budget(alpha, items, NODE_BUDGET)
}

/// [`beta_alpha_items`] with an explicit node budget.
pub fn beta_alpha_items_with_budget(
    alpha: f64,
    items: &[(f64, f64)],
    budget: u64,
) -> Result<BetaAlpha> {
    check_alpha(alpha)?;
    let q_total: f64 = items.iter().map(|&(_, q)| q).sum();
    let cap = alpha + ALPHA_SLACK;

    let mut free_q = 0.0;
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for &(p, q) in items {
        if p <= 0.0 {
            free_q += q;
        } else if q > 0.0 {
            raw.push((p, q));
        }
    }
    raw.sort_by(|a, b| {
        (b.1 / b.0)
            .total_cmp(&(a.1 / a.0))
            .then(a.0.total_cmp(&b.0))
    });
    let mut groups: Vec<Group> = Vec::new();
    for (p, q) in raw {
        match groups.last_mut() {
            Some(g) if g.p == p && g.q == q => g.count += 1,
            _ => groups.push(Group { p, q, count: 1 }),
        }
    }

    let mut search = Search::new(&groups, cap, budget);
    search.dfs(0, 0.0, 0.0)?;
    let beta = (q_total - free_q - search.best_q).max(0.0);
    Ok(BetaAlpha {
        beta,
        achieved_alpha: search.best_p.min(1.0),
    })
}

/// Exhaustive oracle over all `2^k` subsets; only for `k ≤ 20` atoms.
pub fn beta_alpha_exhaustive(alpha: f64, items: &[(f64, f64)]) -> Result<BetaAlpha> {
    check_alpha(alpha)?;
    let k = items.len();
    if k > EXHAUSTIVE_MAX_ATOMS {
        return Err(Error::CombinatorialBlowup {
            count: 1u128 << k.min(127),
            cap: 1u128 << EXHAUSTIVE_MAX_ATOMS,
        });
    }
    let mut best = BetaAlpha {
        beta: f64::INFINITY,
        achieved_alpha: 0.0,
    };
    for mask in 0u32..(1u32 << k) {
        let (mut excl_p, mut in_q) = (0.0, 0.0);
        for (i, &(p, q)) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                excl_p += p;
            } else {
                in_q += q;
            }
        }
        if excl_p <= alpha + ALPHA_SLACK && in_q < best.beta {
            best = BetaAlpha {
                beta: in_q,
                achieved_alpha: excl_p,
            };
        }
    }
    Ok(best)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::DomainError(format!("α = {alpha} is outside [0, 1]")));
    }
    Ok(())
}

struct Group {
    p: f64,
    q: f64,
    count: u64,
}

struct Search<'a> {
    groups: &'a [Group],
    cap: f64,
    best_q: f64,
    best_p: f64,
    nodes: u64,
    budget: u64,
}

impl<'a> Search<'a> {
    fn new(groups: &'a [Group], cap: f64, budget: u64) -> Self {
        Self {
            groups,
            cap,
            best_q: 0.0,
            best_p: 0.0,
            nodes: 0,
            budget,
        }
    }

    /// Fractional-knapsack value achievable from group `idx` onward with `room` capacity.
    fn relaxation(&self, idx: usize, mut room: f64) -> f64 {
        let mut v = 0.0;
        for g in &self.groups[idx..] {
            let mass = g.p * g.count as f64;
            if mass <= room {
                v += g.q * g.count as f64;
                room -= mass;
            } else {
                v += g.q * room / g.p;
                break;
            }
        }
        v
    }

    fn dfs(&mut self, idx: usize, used_p: f64, got_q: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::CombinatorialBlowup {
                count: self.nodes as u128,
                cap: self.budget as u128,
            });
        }
        if got_q > self.best_q {
            self.best_q = got_q;
            self.best_p = used_p;
        }
        if idx == self.groups.len() {
            return Ok(());
        }
        let room = self.cap - used_p;
        if got_q + self.relaxation(idx, room) <= self.best_q * (1.0 + 1e-15) {
            return Ok(());
        }
        let g = &self.groups[idx];
        let fit = ((room / g.p).floor().max(0.0) as u64).min(g.count);
        for k in (0..=fit).rev() {
            let kf = k as f64;
            self.dfs(idx + 1, used_p + kf * g.p, got_q + kf * g.q)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> FiniteDistribution {
        FiniteDistribution::from_probs(p.to_vec()).unwrap()
    }

    #[test]
    fn disjoint_supports_give_perfect_test() {
        assert_eq!(
            beta_alpha(0.0, &d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn blind_test_keeps_largest_achievable_alpha() {
        let p = d(&[0.5, 0.25, 0.25]);
        for &(alpha, expect) in &[(0.0, 1.0), (0.3, 0.75), (0.6, 0.5), (0.74, 0.5), (1.0, 0.0)] {
            let b = beta_alpha_detail(alpha, &p, &p).unwrap();
            assert!((b.beta - expect).abs() < 1e-15, "α={alpha}");
            assert!((b.beta - (1.0 - b.achieved_alpha)).abs() < 1e-15);
        }
    }

    #[test]
    fn three_atom_brute_force() {
        let p = [0.5, 0.25, 0.25];
        let q = [0.1, 0.45, 0.45];
        // Hand enumeration of the eight subsets: excluding one of the 0.25-atoms is optimal.
        let b = beta_alpha(0.25, &d(&p), &d(&q)).unwrap();
        assert!((b - 0.55).abs() < 1e-15);
        let items: Vec<_> = p.iter().copied().zip(q).collect();
        assert_eq!(beta_alpha_exhaustive(0.25, &items).unwrap().beta, b);
    }

    #[test]
    fn greedy_prefix_is_not_enough() {
        // Highest ratio atom does not fit completely; optimal solution skips it.
        let items = [(0.3, 0.42), (0.2, 0.27), (0.2, 0.27), (0.3, 0.04)];
        let exact = beta_alpha_exhaustive(0.4, &items).unwrap();
        let bnb = beta_alpha_items(0.4, &items).unwrap();
        assert!((exact.beta - bnb.beta).abs() < 1e-15);
        assert!((bnb.beta - 0.46).abs() < 1e-12);
        assert!((bnb.achieved_alpha - 0.4).abs() < 1e-12);
    }

    #[test]
    fn alpha_domain() {
        assert!(beta_alpha(1.5, &d(&[0.5, 0.5]), &d(&[0.5, 0.5])).is_err());
        assert!(matches!(
            beta_alpha(0.1, &d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    fn pmf(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0], k).prop_map(|w| {
            let mut w: Vec<f64> = w
                .into_iter()
                .map(|x| if x == 0.0 { 0.0 } else { x + 1e-3 })
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn branch_and_bound_equals_subset_oracle(
            (p, q) in (1usize..=12).prop_flat_map(|k| (pmf(k), pmf(k))),
            alpha in 0.0f64..1.0,
        ) {
            let items: Vec<_> = p.iter().copied().zip(q.iter().copied()).collect();
            let a = beta_alpha_items(alpha, &items).unwrap();
            let b = beta_alpha_exhaustive(alpha, &items).unwrap();
            prop_assert!((a.beta - b.beta).abs() < 1e-12, "{} vs {}", a.beta, b.beta);
            prop_assert!(a.achieved_alpha <= alpha + 1e-12);
        }

        #[test]
        fn hypothesis_testing_bound(
            (p, q) in (2usize..=10).prop_flat_map(|k| (pmf(k), pmf(k))),
            alpha in 0.0f64..1.0,
        ) {
            let items: Vec<_> = p.iter().copied().zip(q.iter().copied()).collect();
            let b = beta_alpha_items(alpha, &items).unwrap();
            let tv = super::super::divergence::raw::tv(&p, &q).unwrap();
            prop_assert!(b.achieved_alpha + b.beta >= 1.0 - tv - 1e-12);
        }
    }
}
