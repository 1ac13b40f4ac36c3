mod common;

use eda_planner::gcn::{evaluate, train, train_many, GcnConfig, GcnModel};
use eda_planner::mckp::{solve_deadlines, solve_dp, Objective};
use eda_planner::synth::{gen_dataset, OracleParams, SizeClass};
use eda_planner::{Exec, Stage};

use common::published_instance;

#[test]
fn dataset_generation_matches_across_modes() {
    let p = OracleParams::for_stage(Stage::Routing, 1);
    let sizes = [SizeClass::Small, SizeClass::Medium];
    let a = gen_dataset(24, &p, &sizes, 6, Exec::Sequential).unwrap();
    let b = gen_dataset(24, &p, &sizes, 6, Exec::Parallel).unwrap();
    assert_eq!(a.seeds, b.seeds);
    assert_eq!(a.train, b.train);
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.graph, y.graph);
        assert_eq!(x.runtimes.map(f64::to_bits), y.runtimes.map(f64::to_bits));
    }
}

#[test]
fn evaluation_and_training_match_across_modes() {
    let jobs: Vec<_> = [Stage::Synthesis, Stage::Sta]
        .into_iter()
        .map(|app| {
            let ds = gen_dataset(10, &OracleParams::for_stage(app, 2), &[SizeClass::Small], 8, Exec::Sequential).unwrap();
            (GcnModel::new(GcnConfig::narrow(vec![8, 6], 6), app, 4).unwrap(), ds.samples)
        })
        .collect();
    let seq = train_many(jobs.clone(), 3, Exec::Sequential);
    let par = train_many(jobs.clone(), 3, Exec::Parallel);
    for ((s, p), (model, data)) in seq.into_iter().zip(par).zip(&jobs) {
        let (s, p) = (s.unwrap(), p.unwrap());
        assert_eq!(s.loss_history, p.loss_history);
        assert_eq!(s.model.params, p.model.params);
        let direct = train(model.clone(), data, 3).unwrap();
        assert_eq!(direct.loss_history, s.loss_history);
        assert_eq!(
            evaluate(&s.model, data, Exec::Sequential).unwrap(),
            evaluate(&s.model, data, Exec::Parallel).unwrap()
        );
    }
}

#[test]
fn deadline_sweep_matches_across_modes() {
    let inst = published_instance(10_000);
    let deadlines: Vec<u64> = (5000..=12_000).step_by(250).collect();
    for objective in [Objective::PaperReciprocalCost, Objective::MinTotalCost] {
        let seq = solve_deadlines(&inst, &deadlines, objective, Exec::Sequential).unwrap();
        let par = solve_deadlines(&inst, &deadlines, objective, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        for (plan, &c) in seq.iter().zip(&deadlines) {
            assert_eq!(plan, &solve_dp(&inst.with_capacity(c).unwrap(), objective));
        }
    }
    assert!(solve_deadlines(&inst, &[u64::MAX], Objective::MinTotalCost, Exec::Parallel).is_err());
}
