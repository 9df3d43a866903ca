//! Random PPM codebooks, the threshold decoder, one-shot existence certificates and
//! all-zero dilution.

mod codebook;
mod decoder;
mod oneshot;

use serde::Serialize;

pub use codebook::{dilute_codebook, generate_codebook, Codebook, DilutedCodebook};
pub use decoder::{
    error_expectation_bounds, montecarlo_ensemble_error, montecarlo_error, threshold_decode,
    BinomialEstimate, Decision, ErrorBounds, ErrorCriterion, McErrorEstimate, MC_CHUNK, WILSON_Z,
};
pub use oneshot::{
    bounded_difference_constants, chain_margin, existence_certificate, f_xy_tail, f_xz_tail,
    induced_output_distribution, log_inv_mu_n, mcdiarmid_tail, ppm_metric_value,
    resolvability_expectation_bound, resolvability_from_tail, verify_achievability_conditions,
    AchievabilityReport, CertificateInputs, ConditionCheck, Metric, OneShotCertificate,
};

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Exact,
    Bound,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Bound => "bound",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}
