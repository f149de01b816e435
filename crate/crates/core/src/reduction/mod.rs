//! Reduction of the linear-form bounds with the Dujella-Pethő lemma.

pub mod campaign;
pub mod lemma;

pub use campaign::{
    mu_value, run_campaign, run_stage, run_stage0, run_stage1, run_stage2, run_stage3, tau_value, Base, CampaignConfig,
    CampaignError, CampaignOptions, CampaignReport, Gap, InstanceKey, MuExpr, Sign, StageReport, DEFAULT_CONFIG,
    N_CEILING,
};
pub use lemma::{
    bound_for_epsilon, dujella_bound, dujella_epsilon, EpsilonStatus, ReductionError, ReductionInstance,
    ReductionOutcome,
};
