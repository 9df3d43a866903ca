//! The radiometer adversary and converse bounds.

mod converse;
mod detector;

pub use converse::{
    converse_logm_asymptotic, converse_logm_exact, converse_logm_from_weight, converse_secondorder,
    weight_bound_beta, weight_bound_d, weight_bound_v, weight_limit, ConverseSecondOrder,
    WeightCap,
};
pub use detector::{
    beta_upper_bound_from_wmin, detector_constants, detector_roc, detector_statistic_law,
    detector_statistic_law_with_cap, midpoint_threshold, missed_detection_bound,
    tv_lower_bound_from_wmin, DetectorConstants, DetectorSpec, NamedConstant, RocMode, RocPoint,
};
