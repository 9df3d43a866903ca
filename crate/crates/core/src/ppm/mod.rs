//! `(n, ℓ)`-PPM input laws, the exact statistics they induce at the adversary, leading-term
//! covertness bounds, and window moments.

mod bounds;
mod exact;
mod moments;
mod params;
mod score;

pub use bounds::{
    f_xy_bound, f_xz_bound, information_density_law, mu_z, ppm_beta_bound, ppm_divergence_bound,
    ppm_tv_bound, PpmBound, TailBound, PPM_RESIDUAL_ORDER,
};
pub use exact::{
    ppm_beta_exact, ppm_block_llr_law, ppm_block_llr_law_with_cap, ppm_divergence_exact,
    ppm_output_distribution, ppm_ratio_expectation, ppm_tv_exact, word_alphabet, BlockLlrLaw,
    LrClass, LrClasses, RatioExpectation, ENUMERATION_CAP,
};
pub use moments::{fit_order, ppm_moments, ppm_moments_with_cap, MomentSet, OrderFit, PpmMoments};
pub use params::{make_ppm, sample_ppm_codeword, sample_ppm_with, PpmParams};
pub use score::ScoreA;
