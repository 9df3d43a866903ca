//! Channel constants, second-order approximations and finite-`n` code planners.

mod constants;
mod planners;

pub use constants::{channel_constants, ChannelConstants};
pub use planners::{
    cubic_root_trig, envelopes_beta, envelopes_v, first_order_slope, gamma_tv, lambda_upsilon,
    metric_ordering_check, omega, plan_beta, plan_d, plan_v, planned_log_m, second_order_d,
    weight_scale, CodePlan, Envelopes, OrderingReport, SecondOrder, ORDERING_ALPHA_GRID,
};
