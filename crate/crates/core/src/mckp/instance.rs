use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::{job_cost, recommend_family, PricingTable};
use crate::stage::{RuntimeEstimate, Stage, VCPU_OPTIONS};

/// Largest deadline the solver accepts, in seconds.
pub const MAX_CAPACITY: u64 = 10_000_000;

/// One machine option for a stage: whole-second runtime and its total cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub vcpus: u32,
    pub runtime: u64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageChoices {
    pub stage: Stage,
    choices: Vec<Choice>,
}

impl StageChoices {
    /// Choices are sorted ascending by vCPUs; sizes must be unique.
    pub fn new(stage: Stage, mut choices: Vec<Choice>) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::Validation(format!("{stage}: at least one machine choice is required")));
        }
        for c in &choices {
            if !VCPU_OPTIONS.contains(&c.vcpus) {
                return Err(Error::Validation(format!("{stage}: unsupported vCPU count {}", c.vcpus)));
            }
            if c.runtime == 0 {
                return Err(Error::Validation(format!("{stage}: runtime on {} vCPUs must be positive", c.vcpus)));
            }
            if !(c.cost.is_finite() && c.cost > 0.0) {
                return Err(Error::Validation(format!("{stage}: cost on {} vCPUs must be positive", c.vcpus)));
            }
        }
        choices.sort_by_key(|c| c.vcpus);
        if choices.windows(2).any(|w| w[0].vcpus == w[1].vcpus) {
            return Err(Error::Validation(format!("{stage}: duplicate vCPU option")));
        }
        Ok(StageChoices { stage, choices })
    }

    pub fn choices(&self) -> &[Choice] {
        &self.choices
    }

    pub fn min_runtime(&self) -> u64 {
        self.choices.iter().map(|c| c.runtime).min().unwrap_or(0)
    }

    pub fn max_runtime(&self) -> u64 {
        self.choices.iter().map(|c| c.runtime).max().unwrap_or(0)
    }
}

/// Pick exactly one choice per stage with total runtime ≤ `capacity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MckpInstance {
    stages: Vec<StageChoices>,
    capacity: u64,
}

impl MckpInstance {
    pub fn new(stages: Vec<StageChoices>, capacity: u64) -> Result<Self> {
        if capacity > MAX_CAPACITY {
            return Err(Error::Config(format!(
                "deadline {capacity} s exceeds the supported maximum of {MAX_CAPACITY} s"
            )));
        }
        Ok(MckpInstance { stages, capacity })
    }

    pub fn stages(&self) -> &[StageChoices] {
        &self.stages
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn with_capacity(&self, capacity: u64) -> Result<Self> {
        MckpInstance::new(self.stages.clone(), capacity)
    }

    /// Number of complete assignments (product of per-stage choice counts).
    pub fn assignment_count(&self) -> u128 {
        self.stages.iter().map(|s| s.choices.len() as u128).product()
    }

    /// Least total runtime any assignment can reach.
    pub fn min_total_runtime(&self) -> u64 {
        self.stages.iter().map(StageChoices::min_runtime).sum()
    }
}

/// Instance from per-stage runtime estimates, priced on each stage's
/// recommended VM family: `cost = seconds / 3600 × hourly price`.
pub fn build_instance(
    estimates: &[(Stage, RuntimeEstimate)],
    pricing: &PricingTable,
    deadline_seconds: u64,
) -> Result<MckpInstance> {
    for s in Stage::ALL {
        if !estimates.iter().any(|(st, _)| *st == s) {
            return Err(Error::Config(format!("missing runtime estimate for {s}")));
        }
    }
    let stages = estimates
        .iter()
        .map(|(stage, est)| {
            let family = recommend_family(*stage);
            let choices = est
                .iter()
                .map(|(vcpus, runtime)| {
                    let price = pricing.require(family, vcpus)?;
                    Ok(Choice {
                        vcpus,
                        runtime,
                        cost: job_cost(runtime, price)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            StageChoices::new(*stage, choices)
        })
        .collect::<Result<Vec<_>>>()?;
    MckpInstance::new(stages, deadline_seconds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{PriceRow, VmFamily};

    fn pricing() -> PricingTable {
        let mut rows = Vec::new();
        for (f, base) in [(VmFamily::GeneralPurpose, 0.1), (VmFamily::MemoryOptimized, 0.12)] {
            for v in VCPU_OPTIONS {
                rows.push(PriceRow {
                    family: f,
                    vcpus: v,
                    price_per_hour: base * v as f64,
                });
            }
        }
        PricingTable::new(rows, "", "USD").unwrap()
    }

    fn estimates() -> Vec<(Stage, RuntimeEstimate)> {
        Stage::ALL
            .iter()
            .map(|&s| (s, RuntimeEstimate::new([3600, 2000, 1200, 900]).unwrap()))
            .collect()
    }

    #[test]
    fn prices_on_recommended_family() {
        let inst = build_instance(&estimates(), &pricing(), 10_000).unwrap();
        assert_eq!(inst.stages().len(), 4);
        assert!(inst.stages().iter().all(|s| s.choices().len() == 4));
        let synth = &inst.stages()[0].choices()[0];
        assert!((synth.cost - 0.1).abs() < 1e-12);
        let place = &inst.stages()[1].choices()[0];
        assert!((place.cost - 0.12).abs() < 1e-12);
    }

    #[test]
    fn zero_deadline_is_valid() {
        assert_eq!(build_instance(&estimates(), &pricing(), 0).unwrap().capacity(), 0);
    }

    #[test]
    fn missing_price_names_the_row() {
        let rows: Vec<_> = pricing().rows().iter().copied().filter(|r| r.vcpus != 8).collect();
        let p = PricingTable::new(rows, "", "USD").unwrap();
        match build_instance(&estimates(), &p, 10) {
            Err(Error::Config(m)) => assert!(m.contains("general-purpose, 8")),
            other => panic!("{other:?}"),
        }
        assert!(build_instance(&estimates()[..3], &pricing(), 10).is_err());
    }

    #[test]
    fn degenerate_and_invalid_stages() {
        let one = StageChoices::new(Stage::Sta, vec![Choice { vcpus: 2, runtime: 5, cost: 1.0 }]).unwrap();
        let inst = MckpInstance::new(vec![one], 5).unwrap();
        assert_eq!((inst.stages().len(), inst.stages()[0].choices().len()), (1, 1));
        assert!(StageChoices::new(Stage::Sta, vec![]).is_err());
        let dup = vec![Choice { vcpus: 2, runtime: 5, cost: 1.0 }, Choice { vcpus: 2, runtime: 4, cost: 2.0 }];
        assert!(StageChoices::new(Stage::Sta, dup).is_err());
        assert!(StageChoices::new(Stage::Sta, vec![Choice { vcpus: 2, runtime: 0, cost: 1.0 }]).is_err());
        assert!(StageChoices::new(Stage::Sta, vec![Choice { vcpus: 2, runtime: 1, cost: 0.0 }]).is_err());
        assert!(MckpInstance::new(vec![], MAX_CAPACITY + 1).is_err());
        let unsorted = vec![Choice { vcpus: 8, runtime: 1, cost: 4.0 }, Choice { vcpus: 1, runtime: 6, cost: 1.0 }];
        let s = StageChoices::new(Stage::Routing, unsorted).unwrap();
        assert_eq!(s.choices()[0].vcpus, 1);
    }
}
