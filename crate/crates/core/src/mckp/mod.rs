//! Multi-choice knapsack deployment planning: pick one machine size per
//! stage so the summed runtime meets a deadline at the best objective value.

mod dp;
mod instance;
mod oracle;
mod report;

pub use dp::{solve_deadlines, solve_dp, DeploymentPlan, DpTable, Objective, Selection};
pub use instance::{build_instance, Choice, MckpInstance, StageChoices, MAX_CAPACITY};
pub use oracle::{brute_force_oracle, ORACLE_LIMIT};
pub use report::{
    compute_savings, compute_speedups, render_csv, render_table, speedups_of, PlanReport, RuntimesFile,
    SavingsReport, StageRuntimes,
};
