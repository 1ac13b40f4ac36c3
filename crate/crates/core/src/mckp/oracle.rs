use crate::error::{Error, Result};

use super::dp::{DeploymentPlan, Objective};
use super::instance::MckpInstance;

/// Enumeration refuses instances with more assignments than this.
pub const ORACLE_LIMIT: u128 = 1_000_000;

/// Exact optimum by full enumeration.
///
/// Ties are broken the way the DP backtrack breaks them: walking from the
/// last stage to the first, a larger prefix value wins, then a smaller
/// choice index at that stage. Prefix values are left-to-right sums in stage
/// order, which are exactly the cell values the DP stores.
pub fn brute_force_oracle(instance: &MckpInstance, objective: Objective) -> Result<DeploymentPlan> {
    let count = instance.assignment_count();
    if count > ORACLE_LIMIT {
        return Err(Error::Config(format!(
            "{count} assignments exceed the enumeration limit of {ORACLE_LIMIT}"
        )));
    }
    let stages = instance.stages();
    let l = stages.len();
    let gains: Vec<Vec<f64>> = stages
        .iter()
        .map(|s| s.choices().iter().map(|c| objective.value(c)).collect())
        .collect();

    let mut picks = vec![0usize; l];
    let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
    loop {
        let runtime: u64 = picks.iter().zip(stages).map(|(&j, s)| s.choices()[j].runtime).sum();
        if runtime <= instance.capacity() {
            let prefix = prefix_values(&picks, &gains);
            let better = match &best {
                None => true,
                Some((bp, bv)) => beats(&picks, &prefix, bp, bv),
            };
            if better {
                best = Some((picks.clone(), prefix));
            }
        }
        if !advance(&mut picks, stages.iter().map(|s| s.choices().len())) {
            break;
        }
    }
    Ok(match best {
        Some((p, v)) => DeploymentPlan::from_indices(instance, &p, v.last().copied().unwrap_or(0.0)),
        None => DeploymentPlan::infeasible(),
    })
}

fn prefix_values(picks: &[usize], gains: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = 0.0;
    picks
        .iter()
        .zip(gains)
        .map(|(&j, g)| {
            acc += g[j];
            acc
        })
        .collect()
}

fn beats(a: &[usize], av: &[f64], b: &[usize], bv: &[f64]) -> bool {
    for i in (0..a.len()).rev() {
        if av[i] != bv[i] {
            return av[i] > bv[i];
        }
        if a[i] != b[i] {
            return a[i] < b[i];
        }
    }
    false
}

/// Odometer step over mixed radices; false once every assignment was seen.
fn advance(picks: &mut [usize], radices: impl Iterator<Item = usize>) -> bool {
    for (p, r) in picks.iter_mut().zip(radices) {
        *p += 1;
        if *p < r {
            return true;
        }
        *p = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mckp::instance::{Choice, StageChoices};
    use crate::stage::Stage;

    #[test]
    fn guard_rejects_large_instances() {
        let s = StageChoices::new(
            Stage::Sta,
            [1, 2, 4, 8]
                .into_iter()
                .map(|v| Choice { vcpus: v, runtime: 1, cost: 1.0 })
                .collect(),
        )
        .unwrap();
        let inst = MckpInstance::new(vec![s; 11], 100).unwrap();
        assert!(brute_force_oracle(&inst, Objective::MinTotalCost).is_err());
    }

    #[test]
    fn empty_capacity_is_infeasible() {
        let s = StageChoices::new(Stage::Sta, vec![Choice { vcpus: 1, runtime: 3, cost: 1.0 }]).unwrap();
        let inst = MckpInstance::new(vec![s], 0).unwrap();
        assert!(!brute_force_oracle(&inst, Objective::PaperReciprocalCost).unwrap().feasible);
    }

    #[test]
    fn lexicographic_tie_break() {
        assert!(beats(&[0, 1], &[1.0, 2.0], &[1, 1], &[1.0, 2.0]));
        assert!(!beats(&[0, 1], &[1.0, 2.0], &[0, 0], &[1.0, 2.0]));
        assert!(beats(&[1, 1], &[1.5, 2.0], &[0, 1], &[1.0, 2.0]));
    }
}
