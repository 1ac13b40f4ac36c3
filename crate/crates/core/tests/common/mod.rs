#![allow(dead_code)]

use std::path::PathBuf;

use eda_planner::gcn::{gcn_forward, mse_loss, GcnModel, TargetNorm};
use eda_planner::graph::{build_features, DesignGraph, NodeKind, SourceKind};
use eda_planner::mckp::{Choice, MckpInstance, RuntimesFile, StageChoices};
use eda_planner::{Stage, VCPU_OPTIONS};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn published_file(with_costs: bool) -> RuntimesFile {
    let name = if with_costs { "published_runtimes_costs.json" } else { "published_runtimes.json" };
    RuntimesFile::parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

/// The published four-stage instance with its literal costs.
pub fn published_instance(capacity: u64) -> MckpInstance {
    published_file(true).to_instance(None, capacity).unwrap()
}

/// Random instance within the oracle-sized bounds: l ≤ 5, N_i ≤ 4,
/// t in [1, 200], p in (0, 10]. Costs are drawn from a small grid so ties
/// actually occur.
pub fn random_instance(rng: &mut impl Rng) -> MckpInstance {
    let l = rng.gen_range(1..=5);
    let stages = (0..l)
        .map(|i| {
            let n = rng.gen_range(1..=4);
            let mut sizes = VCPU_OPTIONS.to_vec();
            sizes.shuffle(rng);
            let choices = sizes[..n]
                .iter()
                .map(|&vcpus| Choice {
                    vcpus,
                    runtime: rng.gen_range(1..=200),
                    cost: if rng.gen_bool(0.5) {
                        rng.gen_range(1..=20) as f64 * 0.5
                    } else {
                        rng.gen_range(1e-3..=10.0)
                    },
                })
                .collect();
            StageChoices::new(Stage::ALL[i % 4], choices).unwrap()
        })
        .collect::<Vec<_>>();
    let max: u64 = stages.iter().map(|s| s.max_runtime()).sum();
    let capacity = rng.gen_range(0..=max + 10);
    MckpInstance::new(stages, capacity).unwrap()
}

/// Random small graph. Netlist graphs may contain cycles; AIG graphs are
/// built in topological order.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, source: SourceKind) -> DesignGraph {
    let n = rng.gen_range(2..=max_nodes);
    let kinds: &[NodeKind] = match source {
        SourceKind::Aig => &[
            NodeKind::PrimaryInput,
            NodeKind::AndGate,
            NodeKind::Inverter,
            NodeKind::PrimaryOutput,
            NodeKind::Constant,
        ],
        SourceKind::Netlist => &[NodeKind::PrimaryInput, NodeKind::Cell, NodeKind::PrimaryOutput],
    };
    let nodes: Vec<(String, NodeKind)> = (0..n)
        .map(|i| (format!("n{i}"), kinds[rng.gen_range(0..kinds.len())]))
        .collect();
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(0..=2 * n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            continue;
        }
        let e = if source == SourceKind::Aig { (a.min(b), a.max(b)) } else { (a, b) };
        edges.push(e);
    }
    DesignGraph::new("random", source, nodes, edges).unwrap()
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Randomize every parameter (biases included) and attach target statistics.
pub fn randomize(model: &mut GcnModel, rng: &mut impl Rng) {
    for t in model.params.tensors_mut() {
        for v in t.as_mut_slice() {
            *v += rng.gen_range(-0.2..0.2);
        }
    }
    let mean = std::array::from_fn(|_| rng.gen_range(100.0..1000.0));
    let std = std::array::from_fn(|_| rng.gen_range(10.0..200.0));
    model.target_norm = Some(TargetNorm::new(mean, std).unwrap());
}

/// Loss through the public prediction path, for finite differences.
pub fn loss_at(model: &GcnModel, graph: &DesignGraph, target: &[f64; 4]) -> f64 {
    let out = gcn_forward(model, graph, &build_features(graph)).unwrap();
    mse_loss(&out.prediction, target, &model.target_norm.unwrap())
}

pub const FD_STEP: f64 = 1e-5;
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR)
}

/// Central-difference gradient of one parameter.
pub fn fd_gradient(model: &mut GcnModel, graph: &DesignGraph, target: &[f64; 4], tensor: usize, index: usize) -> f64 {
    let orig = model.params.tensors()[tensor].as_slice()[index];
    model.params.tensors_mut()[tensor].as_mut_slice()[index] = orig + FD_STEP;
    let up = loss_at(model, graph, target);
    model.params.tensors_mut()[tensor].as_mut_slice()[index] = orig - FD_STEP;
    let down = loss_at(model, graph, target);
    model.params.tensors_mut()[tensor].as_mut_slice()[index] = orig;
    (up - down) / (2.0 * FD_STEP)
}
