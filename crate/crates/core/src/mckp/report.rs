//! Speedups, savings against fixed-size baselines, and plan rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::{display_cost, PricingTable};
use crate::stage::{RuntimeEstimate, Stage, VCPU_OPTIONS};

use super::dp::{DeploymentPlan, Objective};
use super::instance::{build_instance, Choice, MckpInstance, StageChoices};

/// `s_k = t_1 / t_k` for k in 1, 2, 4, 8.
pub fn compute_speedups(estimate: &RuntimeEstimate) -> [f64; 4] {
    let t = estimate.seconds();
    t.map(|tk| t[0] as f64 / tk as f64)
}

/// Speedups of real-valued runtimes, such as raw model predictions.
pub fn speedups_of(seconds: &[f64; 4]) -> Result<[f64; 4]> {
    if seconds.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::Contract(format!("speedups need positive runtimes, got {seconds:?}")));
    }
    Ok(seconds.map(|s| seconds[0] / s))
}

/// Plan cost against running every stage on its largest (over-provisioned)
/// or smallest (under-provisioned) machine. Percentages are in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SavingsReport {
    pub over_prov_cost: f64,
    pub under_prov_cost: f64,
    pub savings_vs_over_pct: f64,
    pub savings_vs_under_pct: f64,
    /// Extra wall-clock time relative to over-provisioning, in percent.
    pub runtime_overhead_vs_over: f64,
}

pub fn compute_savings(plan: &DeploymentPlan, instance: &MckpInstance) -> Result<SavingsReport> {
    if !plan.feasible {
        return Err(Error::State("savings are undefined for an infeasible plan".into()));
    }
    let pick = |last: bool| -> Vec<Choice> {
        instance
            .stages()
            .iter()
            .map(|s| if last { *s.choices().last().unwrap() } else { s.choices()[0] })
            .collect()
    };
    let over = pick(true);
    let under = pick(false);
    let over_cost: f64 = over.iter().map(|c| c.cost).sum();
    let under_cost: f64 = under.iter().map(|c| c.cost).sum();
    let over_runtime: u64 = over.iter().map(|c| c.runtime).sum();
    let pct = |base: f64| (base - plan.total_cost) / base * 100.0;
    Ok(SavingsReport {
        over_prov_cost: over_cost,
        under_prov_cost: under_cost,
        savings_vs_over_pct: pct(over_cost),
        savings_vs_under_pct: pct(under_cost),
        runtime_overhead_vs_over: (plan.total_runtime as f64 - over_runtime as f64) / over_runtime as f64 * 100.0,
    })
}

/// Literal per-stage runtimes, optionally with literal costs.
///
/// ```json
/// {"stages": [{"stage": "synthesis",
///              "runtimes": {"1": 6100, "2": 4342, "4": 3449, "8": 3352},
///              "costs": {"1": 0.16, "2": 0.15, "4": 0.19, "8": 0.37}}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimesFile {
    pub stages: Vec<StageRuntimes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRuntimes {
    pub stage: Stage,
    pub runtimes: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<BTreeMap<String, f64>>,
}

fn by_vcpu<T: Copy>(stage: Stage, what: &str, map: &BTreeMap<String, T>) -> Result<[T; 4]> {
    if let Some(k) = map.keys().find(|k| !VCPU_OPTIONS.iter().any(|v| v.to_string() == **k)) {
        return Err(Error::Validation(format!("{stage}: unexpected {what} key `{k}`")));
    }
    let get = |v: u32| {
        map.get(&v.to_string())
            .copied()
            .ok_or_else(|| Error::Validation(format!("{stage}: missing {what} for {v} vCPU(s)")))
    };
    Ok([get(1)?, get(2)?, get(4)?, get(8)?])
}

impl RuntimesFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: RuntimesFile = serde_json::from_str(text)?;
        for s in Stage::ALL {
            if file.stages.iter().filter(|r| r.stage == s).count() != 1 {
                return Err(Error::Validation(format!("runtimes file needs exactly one entry for {s}")));
            }
        }
        Ok(file)
    }

    pub fn estimates(&self) -> Result<Vec<(Stage, RuntimeEstimate)>> {
        self.stages
            .iter()
            .map(|s| Ok((s.stage, RuntimeEstimate::new(by_vcpu(s.stage, "runtime", &s.runtimes)?)?)))
            .collect()
    }

    pub fn has_costs(&self) -> bool {
        self.stages.iter().all(|s| s.costs.is_some())
    }

    /// Literal costs win when every stage has them; otherwise costs come from `pricing`.
    pub fn to_instance(&self, pricing: Option<&PricingTable>, deadline: u64) -> Result<MckpInstance> {
        if self.has_costs() {
            let stages = self
                .stages
                .iter()
                .map(|s| {
                    let t = by_vcpu(s.stage, "runtime", &s.runtimes)?;
                    let p = by_vcpu(s.stage, "cost", s.costs.as_ref().unwrap())?;
                    let choices = (0..4)
                        .map(|j| Choice {
                            vcpus: VCPU_OPTIONS[j],
                            runtime: t[j],
                            cost: p[j],
                        })
                        .collect();
                    StageChoices::new(s.stage, choices)
                })
                .collect::<Result<Vec<_>>>()?;
            return MckpInstance::new(stages, deadline);
        }
        let pricing = pricing.ok_or_else(|| {
            Error::Config("runtimes file has no costs for every stage; a pricing table is required".into())
        })?;
        build_instance(&self.estimates()?, pricing, deadline)
    }
}

/// Everything a plan report shows: the instance, the plan and its savings.
#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub capacity: u64,
    pub objective: Objective,
    pub objective_value: Option<f64>,
    pub feasible: bool,
    pub selections: BTreeMap<Stage, u32>,
    pub total_runtime: Option<u64>,
    pub total_cost: Option<f64>,
    pub savings: Option<SavingsReport>,
}

impl PlanReport {
    pub fn new(instance: &MckpInstance, plan: &DeploymentPlan, objective: Objective) -> Self {
        let savings = compute_savings(plan, instance).ok();
        PlanReport {
            capacity: instance.capacity(),
            objective,
            objective_value: plan.feasible.then_some(plan.objective_value),
            feasible: plan.feasible,
            selections: plan.selections.iter().map(|s| (s.stage, s.vcpus)).collect(),
            total_runtime: plan.feasible.then_some(plan.total_runtime),
            total_cost: plan.feasible.then_some(plan.total_cost),
            savings,
        }
    }
}

/// Grid with one column per (stage, vCPU) option, the runtime and cost of
/// each option, and one row per deadline marking the selected options.
pub fn render_table(instance: &MckpInstance, reports: &[PlanReport]) -> String {
    const LABEL: usize = 14;
    const CELL: usize = 7;
    let mut out = String::new();
    let stages = instance.stages();

    let _ = write!(out, "{:LABEL$}", "");
    for s in stages {
        let w = CELL * s.choices().len();
        let _ = write!(out, "|{:^w$}", s.stage.as_str());
    }
    let _ = writeln!(out, "| {:>8} {:>8}", "runtime", "cost");

    let mut row = |label: &str, cell: &dyn Fn(&Choice) -> String| {
        let _ = write!(out, "{label:<LABEL$}");
        for s in stages {
            out.push('|');
            for c in s.choices() {
                let _ = write!(out, "{:>CELL$}", cell(c));
            }
        }
        out.push_str("|\n");
    };
    row("vCPUs", &|c| c.vcpus.to_string());
    row("runtime (s)", &|c| c.runtime.to_string());
    row("cost", &|c| display_cost(c.cost));

    for r in reports {
        let _ = write!(out, "{:<LABEL$}", format!("C={}", r.capacity));
        for s in stages {
            out.push('|');
            for c in s.choices() {
                let mark = if r.selections.get(&s.stage) == Some(&c.vcpus) { "x" } else { "" };
                let _ = write!(out, "{mark:>CELL$}");
            }
        }
        match (r.total_runtime, r.total_cost) {
            (Some(t), Some(p)) => {
                let _ = writeln!(out, "| {t:>8} {:>8}", display_cost(p));
            }
            _ => {
                let _ = writeln!(out, "| {:>8} {:>8}", "NA", "NA");
            }
        }
    }

    for r in reports.iter().filter(|r| r.savings.is_some()) {
        let s = r.savings.unwrap();
        let _ = writeln!(
            out,
            "\nC={}: over-provisioned cost {}, under-provisioned cost {}\n  savings vs over {:.2}%, vs under {:.2}%, runtime overhead vs over {:.2}%",
            r.capacity,
            display_cost(s.over_prov_cost),
            display_cost(s.under_prov_cost),
            s.savings_vs_over_pct,
            s.savings_vs_under_pct,
            s.runtime_overhead_vs_over
        );
    }
    out
}

/// One CSV row per (deadline, stage): the chosen machine or `NA`.
pub fn render_csv(reports: &[PlanReport], instance: &MckpInstance) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["deadline", "stage", "vcpus", "runtime", "cost", "feasible"])
        .map_err(csv_err)?;
    for r in reports {
        for s in instance.stages() {
            let chosen = r
                .selections
                .get(&s.stage)
                .and_then(|v| s.choices().iter().find(|c| c.vcpus == *v));
            let (v, t, p) = match chosen {
                Some(c) => (c.vcpus.to_string(), c.runtime.to_string(), format!("{}", c.cost)),
                None => ("NA".into(), "NA".into(), "NA".into()),
            };
            w.write_record([
                r.capacity.to_string(),
                s.stage.to_string(),
                v,
                t,
                p,
                r.feasible.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mckp::solve_dp;

    fn stage(st: Stage, rows: [(u64, f64); 4]) -> StageChoices {
        StageChoices::new(
            st,
            rows.iter()
                .zip(VCPU_OPTIONS)
                .map(|(&(runtime, cost), vcpus)| Choice { vcpus, runtime, cost })
                .collect(),
        )
        .unwrap()
    }

    fn small() -> MckpInstance {
        MckpInstance::new(
            vec![
                stage(Stage::Synthesis, [(40, 1.0), (25, 1.2), (15, 1.5), (10, 2.0)]),
                stage(Stage::Sta, [(10, 0.2), (8, 0.3), (7, 0.5), (6, 1.0)]),
            ],
            45,
        )
        .unwrap()
    }

    #[test]
    fn speedups_start_at_one() {
        let s = compute_speedups(&RuntimeEstimate::new([50, 50, 50, 50]).unwrap());
        assert_eq!(s, [1.0; 4]);
        assert!(speedups_of(&[1.0, 0.0, 1.0, 1.0]).is_err());
        assert_eq!(speedups_of(&[8.0, 4.0, 2.0, 1.0]).unwrap(), [1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn savings_against_baselines() {
        let inst = small();
        let plan = solve_dp(&inst, Objective::MinTotalCost);
        assert_eq!(plan.vcpus(), vec![2, 1]);
        let s = compute_savings(&plan, &inst).unwrap();
        assert!((s.over_prov_cost - 3.0).abs() < 1e-12);
        assert!((s.under_prov_cost - 1.2).abs() < 1e-12);
        assert!((s.savings_vs_over_pct - 160.0 / 3.0).abs() < 1e-9);
        assert!((s.runtime_overhead_vs_over - 118.75).abs() < 1e-9);
        let none = solve_dp(&inst.with_capacity(3).unwrap(), Objective::MinTotalCost);
        assert!(matches!(compute_savings(&none, &inst), Err(Error::State(_))));
    }

    #[test]
    fn renders_na_for_infeasible() {
        let inst = small();
        let reports: Vec<_> = [45, 3]
            .iter()
            .map(|&c| {
                let i = inst.with_capacity(c).unwrap();
                PlanReport::new(&i, &solve_dp(&i, Objective::PaperReciprocalCost), Objective::PaperReciprocalCost)
            })
            .collect();
        let table = render_table(&inst, &reports);
        assert!(table.contains("C=3"));
        assert!(table.contains("NA"));
        let csv = render_csv(&reports, &inst).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        let json = serde_json::to_value(&reports[1]).unwrap();
        assert_eq!(json["feasible"], false);
        assert!(json["total_cost"].is_null());
    }

    #[test]
    fn runtimes_file_requires_every_stage() {
        let one = r#"{"stages":[{"stage":"sta","runtimes":{"1":4,"2":3,"4":2,"8":1}}]}"#;
        assert!(RuntimesFile::parse(one).is_err());
    }
}
