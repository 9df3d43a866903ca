//! Finite-alphabet probability primitives: distributions, divergences, optimal
//! binary hypothesis testing, Gaussian helpers and exact laws of i.i.d. sums.

mod channel;
mod distribution;
mod divergence;
mod gaussian;
mod hypothesis;
mod sums;

pub use channel::{BinaryDmc, CovertChannelPair, LLR_CLAMP};
pub use distribution::{Alphabet, FiniteDistribution, PMF_TOLERANCE};
pub use divergence::{chi_squared, kl_divergence, raw, total_variation};
pub use gaussian::{phi, q_function, q_inverse};
pub use hypothesis::{
    beta_alpha, beta_alpha_detail, beta_alpha_exhaustive, beta_alpha_items,
    beta_alpha_items_with_budget, BetaAlpha, EXHAUSTIVE_MAX_ATOMS, NODE_BUDGET,
};
pub(crate) use sums::same_value;
pub use sums::{
    berry_esseen_bound, iid_sum_distribution, iid_sum_distribution_with_cap, type_class_count,
    GaussianMoments, SumDistribution, DEFAULT_TYPE_CLASS_CAP, MERGE_TOLERANCE,
};
