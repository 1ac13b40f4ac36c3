use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::stage::Stage;

use super::instance::{Choice, MckpInstance};

/// What the solver maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Σ 1/p over the selected choices.
    #[default]
    PaperReciprocalCost,
    /// Σ −p, i.e. the cheapest feasible assignment.
    MinTotalCost,
}

impl Objective {
    /// Per-choice value, computed once so every solver sums identical terms.
    pub fn value(self, choice: &Choice) -> f64 {
        match self {
            Objective::PaperReciprocalCost => 1.0 / choice.cost,
            Objective::MinTotalCost => -choice.cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selection {
    pub stage: Stage,
    pub vcpus: u32,
    pub runtime: u64,
    pub cost: f64,
}

/// Solver output. Infeasible plans carry no selection and a `-inf` objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeploymentPlan {
    pub selections: Vec<Selection>,
    pub total_runtime: u64,
    pub total_cost: f64,
    pub objective_value: f64,
    pub feasible: bool,
}

impl DeploymentPlan {
    pub fn infeasible() -> Self {
        DeploymentPlan {
            selections: Vec::new(),
            total_runtime: 0,
            total_cost: 0.0,
            objective_value: f64::NEG_INFINITY,
            feasible: false,
        }
    }

    /// Plan from one choice index per stage. Totals are summed in stage order.
    pub(crate) fn from_indices(instance: &MckpInstance, picks: &[usize], objective_value: f64) -> Self {
        let selections: Vec<Selection> = instance
            .stages()
            .iter()
            .zip(picks)
            .map(|(s, &j)| {
                let c = s.choices()[j];
                Selection {
                    stage: s.stage,
                    vcpus: c.vcpus,
                    runtime: c.runtime,
                    cost: c.cost,
                }
            })
            .collect();
        DeploymentPlan {
            total_runtime: selections.iter().map(|s| s.runtime).sum(),
            total_cost: selections.iter().map(|s| s.cost).sum(),
            selections,
            objective_value,
            feasible: true,
        }
    }

    pub fn vcpus(&self) -> Vec<u32> {
        self.selections.iter().map(|s| s.vcpus).collect()
    }
}

const NO_CHOICE: u8 = u8::MAX;

/// `z[i][c]`: best value over the first `i` stages within `c` seconds, with
/// `-inf` where no assignment fits. The capacity axis stops at the largest
/// total runtime any assignment can reach, since `z` is flat beyond it.
#[derive(Debug, Clone)]
pub struct DpTable {
    stages: usize,
    width: usize,
    values: Vec<f64>,
    choice: Vec<u8>,
}

impl DpTable {
    pub fn build(instance: &MckpInstance, objective: Objective) -> Self {
        let reach: u64 = instance.stages().iter().map(|s| s.max_runtime()).sum();
        let cap = instance.capacity().min(reach) as usize;
        let width = cap + 1;
        let l = instance.stages().len();
        let mut values = vec![f64::NEG_INFINITY; (l + 1) * width];
        let mut choice = vec![NO_CHOICE; (l + 1) * width];
        values[..width].fill(0.0);

        for (i, stage) in instance.stages().iter().enumerate() {
            let gains: Vec<(usize, f64)> = stage
                .choices()
                .iter()
                .map(|c| (c.runtime as usize, objective.value(c)))
                .collect();
            let (prev, cur) = values[i * width..(i + 2) * width].split_at_mut(width);
            let back = &mut choice[(i + 1) * width..(i + 2) * width];
            for c in 0..width {
                let mut best = f64::NEG_INFINITY;
                let mut arg = NO_CHOICE;
                // Ascending vCPU scan with strict improvement: ties keep the smaller machine.
                for (j, &(t, gain)) in gains.iter().enumerate() {
                    if t > c {
                        continue;
                    }
                    let base = prev[c - t];
                    if base == f64::NEG_INFINITY {
                        continue;
                    }
                    let v = base + gain;
                    if v > best {
                        best = v;
                        arg = j as u8;
                    }
                }
                cur[c] = best;
                back[c] = arg;
            }
        }
        DpTable {
            stages: l,
            width,
            values,
            choice,
        }
    }

    /// Last capacity column stored; larger capacities have identical values.
    pub fn max_capacity(&self) -> u64 {
        (self.width - 1) as u64
    }

    pub fn value(&self, stage: usize, capacity: u64) -> f64 {
        let c = capacity.min(self.max_capacity()) as usize;
        self.values[stage * self.width + c]
    }

    fn choice_at(&self, stage: usize, capacity: usize) -> u8 {
        self.choice[stage * self.width + capacity]
    }

    /// Walk the backpointers from `(l, capacity)`.
    pub fn plan(&self, instance: &MckpInstance, capacity: u64) -> DeploymentPlan {
        let best = self.value(self.stages, capacity);
        if best == f64::NEG_INFINITY {
            return DeploymentPlan::infeasible();
        }
        let mut c = capacity.min(self.max_capacity()) as usize;
        let mut picks = vec![0usize; self.stages];
        for i in (1..=self.stages).rev() {
            let j = self.choice_at(i, c);
            debug_assert_ne!(j, NO_CHOICE);
            picks[i - 1] = j as usize;
            c -= instance.stages()[i - 1].choices()[j as usize].runtime as usize;
        }
        DeploymentPlan::from_indices(instance, &picks, best)
    }
}

/// Exact pseudo-polynomial solve, `O(l · C · N)` time and `O(l · C)` memory.
pub fn solve_dp(instance: &MckpInstance, objective: Objective) -> DeploymentPlan {
    DpTable::build(instance, objective).plan(instance, instance.capacity())
}

/// Solve the same stages under each deadline independently, in input order.
pub fn solve_deadlines(
    instance: &MckpInstance,
    deadlines: &[u64],
    objective: Objective,
    exec: Exec,
) -> Result<Vec<DeploymentPlan>> {
    exec.map(deadlines, |&c| Ok(solve_dp(&instance.with_capacity(c)?, objective)))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mckp::instance::StageChoices;

    fn stage(choices: &[(u32, u64, f64)]) -> StageChoices {
        StageChoices::new(
            Stage::Sta,
            choices
                .iter()
                .map(|&(vcpus, runtime, cost)| Choice { vcpus, runtime, cost })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn only_feasible_choice_is_taken() {
        let inst = MckpInstance::new(vec![stage(&[(1, 5, 2.0), (2, 3, 4.0)])], 4).unwrap();
        for obj in [Objective::PaperReciprocalCost, Objective::MinTotalCost] {
            let plan = solve_dp(&inst, obj);
            assert!(plan.feasible);
            assert_eq!(plan.vcpus(), vec![2]);
        }
    }

    #[test]
    fn zero_capacity_is_infeasible() {
        let inst = MckpInstance::new(vec![stage(&[(1, 1, 1.0)])], 0).unwrap();
        let plan = solve_dp(&inst, Objective::MinTotalCost);
        assert!(!plan.feasible);
        assert!(plan.selections.is_empty());
        assert_eq!(plan.objective_value, f64::NEG_INFINITY);
    }

    #[test]
    fn ties_prefer_fewer_vcpus() {
        let inst = MckpInstance::new(vec![stage(&[(1, 10, 0.04), (2, 7, 0.04), (4, 5, 0.05)])], 100).unwrap();
        assert_eq!(solve_dp(&inst, Objective::PaperReciprocalCost).vcpus(), vec![1]);
    }

    #[test]
    fn empty_instance_is_trivially_feasible() {
        let inst = MckpInstance::new(vec![], 0).unwrap();
        let plan = solve_dp(&inst, Objective::PaperReciprocalCost);
        assert!(plan.feasible);
        assert_eq!(plan.objective_value, 0.0);
    }

    #[test]
    fn table_rows_are_monotone_in_capacity() {
        let inst = MckpInstance::new(
            vec![stage(&[(1, 7, 1.0), (2, 4, 1.5), (8, 2, 3.0)]), stage(&[(1, 9, 0.5), (4, 3, 2.5)])],
            30,
        )
        .unwrap();
        let t = DpTable::build(&inst, Objective::PaperReciprocalCost);
        for i in 0..=2 {
            for c in 1..=t.max_capacity() {
                assert!(t.value(i, c) >= t.value(i, c - 1));
            }
        }
        assert!((0..=30).all(|c| t.value(0, c) == 0.0));
    }
}
