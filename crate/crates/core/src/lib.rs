//! Runtime prediction and cost-optimal cloud deployment planning for EDA
//! flows.
//!
//! The pipeline: parse a design into a [`graph::DesignGraph`], predict its
//! per-stage runtimes on 1/2/4/8 vCPUs with a [`gcn::GcnModel`], price each
//! option with a [`pricing::PricingTable`], then pick one machine size per
//! stage with the multi-choice knapsack solver in [`mckp`].

pub mod error;
pub mod exec;
pub mod gcn;
pub mod graph;
pub mod matrix;
pub mod mckp;
pub mod pricing;
pub mod stage;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
pub use stage::{RuntimeEstimate, Stage, VCPU_OPTIONS};
