use std::collections::HashSet;

use eda_planner::gcn::load_dataset;
use eda_planner::graph::{write_dump, SourceKind};
use eda_planner::synth::{gen_dataset, gen_graph, oracle_runtimes, GraphStyle, OracleParams, SerialFraction, SizeClass};
use eda_planner::{Exec, Stage};

fn params(app: Stage) -> OracleParams {
    OracleParams::for_stage(app, 17)
}

#[test]
fn split_is_eighty_twenty_with_four_labels_each() {
    let ds = gen_dataset(250, &params(Stage::Routing), &[SizeClass::Small], 3, Exec::Sequential).unwrap();
    assert_eq!(ds.samples.len(), 250);
    assert_eq!((ds.train.len(), ds.test.len()), (200, 50));
    let labels: usize = ds.samples.iter().map(|s| s.runtimes.len()).sum();
    assert_eq!(labels, 1000);
    let train: HashSet<usize> = ds.train.iter().copied().collect();
    assert!(ds.test.iter().all(|i| !train.contains(i)));
    assert!(ds.samples.iter().all(|s| s.runtimes.iter().all(|&r| r > 0.0 && r.is_finite())));
}

#[test]
fn designs_are_unique_and_seeds_disjoint() {
    let ds = gen_dataset(120, &params(Stage::Synthesis), &[SizeClass::Small], 5, Exec::Sequential).unwrap();
    let dumps: HashSet<String> = ds.samples.iter().map(|s| write_dump(&s.graph)).collect();
    assert_eq!(dumps.len(), ds.samples.len());
    let seeds: HashSet<u64> = ds.seeds.iter().copied().collect();
    assert_eq!(seeds.len(), ds.seeds.len());
}

#[test]
fn generation_is_deterministic() {
    let p = params(Stage::Placement);
    let a = gen_dataset(20, &p, &[SizeClass::Small, SizeClass::Medium], 9, Exec::Sequential).unwrap();
    let b = gen_dataset(20, &p, &[SizeClass::Small, SizeClass::Medium], 9, Exec::Sequential).unwrap();
    assert_eq!(a.seeds, b.seeds);
    assert_eq!((&a.train, &a.test), (&b.train, &b.test));
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.graph, y.graph);
        assert_eq!(x.runtimes.map(f64::to_bits), y.runtimes.map(f64::to_bits));
    }
    let c = gen_dataset(20, &p, &[SizeClass::Small, SizeClass::Medium], 10, Exec::Sequential).unwrap();
    assert_ne!(a.seeds, c.seeds);
}

#[test]
fn size_classes_hit_their_ranges() {
    for size in SizeClass::ALL {
        let (lo, hi) = size.node_range();
        for seed in 0..3 {
            let g = gen_graph(seed, size, GraphStyle::Netlist);
            assert!((lo..=hi).contains(&g.node_count()), "{size}: {}", g.node_count());
        }
    }
    let large = gen_graph(1, SizeClass::Large, GraphStyle::Aig);
    let n = large.node_count() as f64;
    assert!((n - 1e4).abs() <= 0.2 * 1e4, "{n}");
}

#[test]
fn aig_style_graphs_are_acyclic() {
    for seed in 0..20 {
        let g = gen_graph(seed, SizeClass::Small, GraphStyle::Aig);
        assert_eq!(g.source(), SourceKind::Aig);
        assert!(g.topological_order().is_some());
    }
    assert_eq!(gen_graph(0, SizeClass::Small, GraphStyle::Netlist).source(), SourceKind::Netlist);
}

#[test]
fn oracle_speedups_flatten_on_small_designs() {
    let mut p = params(Stage::Routing);
    p.noise_rel = 0.0;
    let small = oracle_runtimes(&gen_graph(4, SizeClass::Small, GraphStyle::Netlist), &p);
    let large = oracle_runtimes(&gen_graph(4, SizeClass::Large, GraphStyle::Netlist), &p);
    assert!(small.windows(2).all(|w| w[1] <= w[0]));
    assert!(large.windows(2).all(|w| w[1] < w[0]));
    assert!(large[0] / large[3] > small[0] / small[3]);

    p.serial = SerialFraction::Fixed(1.0);
    let flat = oracle_runtimes(&gen_graph(4, SizeClass::Small, GraphStyle::Netlist), &p);
    assert!(flat.iter().all(|&r| r == flat[0]));
}

#[test]
fn invalid_requests_are_rejected() {
    let p = params(Stage::Sta);
    assert!(gen_dataset(9, &p, &[SizeClass::Small], 0, Exec::Sequential).is_err());
    assert!(gen_dataset(10, &p, &[], 0, Exec::Sequential).is_err());
    let mut bad = p;
    bad.noise_rel = -0.1;
    assert!(gen_dataset(10, &bad, &[SizeClass::Small], 0, Exec::Sequential).is_err());
}

#[test]
fn written_dataset_loads_back() {
    let ds = gen_dataset(15, &params(Stage::Synthesis), &[SizeClass::Small], 2, Exec::Sequential).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ds.write_to(dir.path()).unwrap();
    let train = load_dataset(&dir.path().join("train.jsonl")).unwrap();
    let test = load_dataset(&dir.path().join("test.jsonl")).unwrap();
    assert_eq!((train.len(), test.len()), (12, 3));
    for (loaded, orig) in train.iter().zip(ds.train_samples()) {
        assert_eq!(write_dump(&loaded.graph), write_dump(&orig.graph));
        assert_eq!(loaded.runtimes, orig.runtimes);
        assert_eq!(loaded.application, Stage::Synthesis);
    }
}
