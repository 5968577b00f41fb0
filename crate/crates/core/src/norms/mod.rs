//! Norm hypotheses, their life cycle in a sequence, and their posterior log
//! odds against the no-norm hypothesis.

mod counts;
mod hypothesis;
mod likelihood;
mod machine;
mod mine;

pub use counts::{
    count_all, count_norm_stats, count_norm_stats_with, estimate_params, trace, NormCounts,
    NormParams, Trace,
};
pub use hypothesis::{
    enumerate_hypotheses, Condition, Modality, NormHypothesis, RelDir, HYPOTHESIS_COUNT,
};
pub use likelihood::{
    branch_logliks, log_ratio, logsumexp, norm_loglik, seq_loglik_norm, seq_loglik_norm_with,
    step_distribution, Branches, ScoringTables,
};
pub use machine::{
    nsm_new, nsm_receive, nsm_resolve, Assumption, NormState, NormStateMachine, SanctionDirection,
    Semantics,
};
pub use mine::{
    mine, mine_with, positive_count, scores_csv, MineOptions, NormScore, SCORES_CSV_HEADER,
};
