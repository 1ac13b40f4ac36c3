//! Synthetic designs with ground-truth runtimes from an Amdahl-style model,
//! used to train and check the runtime predictor without real flow data.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gcn::{write_dataset_records, DatasetRecord, TrainSample};
use crate::graph::{star_expand, write_dump, Cell, DesignGraph, Net, Netlist, NodeKind, Port, PortDir, SourceKind};
use crate::stage::{Stage, VCPU_OPTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];

    /// Inclusive node-count range the generator targets.
    pub fn node_range(self) -> (usize, usize) {
        match self {
            SizeClass::Small => (50, 150),
            SizeClass::Medium => (600, 1400),
            SizeClass::Large => (8500, 11500),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SizeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SizeClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown size class `{s}` (small, medium, large)")))
    }
}

/// Which front-end a generated graph imitates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphStyle {
    /// Layered AND/inverter DAG with fan-in at most two.
    Aig,
    /// Random cell netlist, star-expanded.
    Netlist,
}

impl GraphStyle {
    pub fn for_stage(stage: Stage) -> Self {
        if stage.expects_aig() {
            GraphStyle::Aig
        } else {
            GraphStyle::Netlist
        }
    }
}

/// Serial fraction of the Amdahl model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerialFraction {
    Fixed(f64),
    /// Log-linear in node count from `small` at 100 nodes to `large` at
    /// 10 000 nodes, clamped outside that range.
    SizeScaled { small: f64, large: f64 },
}

impl SerialFraction {
    pub fn at(self, nodes: usize) -> f64 {
        match self {
            SerialFraction::Fixed(f) => f,
            SerialFraction::SizeScaled { small, large } => {
                let x = ((nodes.max(1) as f64).log10() - 2.0) / 2.0;
                let x = x.clamp(0.0, 1.0);
                (small.ln() + (large.ln() - small.ln()) * x).exp()
            }
        }
    }

    fn validate(self) -> Result<()> {
        let ok = |f: f64| f > 0.0 && f <= 1.0;
        let valid = match self {
            SerialFraction::Fixed(f) => ok(f),
            SerialFraction::SizeScaled { small, large } => ok(small) && ok(large),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Config(format!("serial fraction must lie in (0, 1]: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub application: Stage,
    /// Seconds per node.
    pub a_v: f64,
    /// Seconds per edge.
    pub a_e: f64,
    /// Base seconds.
    pub c0: f64,
    pub serial: SerialFraction,
    pub noise_rel: f64,
    pub seed: u64,
}

impl OracleParams {
    pub const DEFAULT_NOISE: f64 = 0.05;

    pub fn for_stage(application: Stage, seed: u64) -> Self {
        let (a_v, a_e, c0) = match application {
            Stage::Synthesis => (1.5, 0.8, 60.0),
            Stage::Placement => (1.0, 1.2, 90.0),
            Stage::Routing => (2.5, 2.0, 150.0),
            Stage::Sta => (0.6, 0.4, 40.0),
        };
        OracleParams {
            application,
            a_v,
            a_e,
            c0,
            serial: SerialFraction::SizeScaled { small: 0.7, large: 0.05 },
            noise_rel: Self::DEFAULT_NOISE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [self.a_v, self.a_e, self.c0].iter().all(|v| v.is_finite() && *v >= 0.0);
        if !nonneg || self.a_v + self.a_e <= 0.0 {
            return Err(Error::Config("oracle coefficients must be non-negative with a_v + a_e > 0".into()));
        }
        if !(self.noise_rel.is_finite() && self.noise_rel >= 0.0) {
            return Err(Error::Config("noise_rel must be non-negative".into()));
        }
        self.serial.validate()
    }
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Ground-truth runtime on `k` vCPUs. The noise draw is a pure function of
/// the oracle seed, the graph structure and `k`.
pub fn oracle_runtime(graph: &DesignGraph, params: &OracleParams, k: u32) -> f64 {
    debug_assert!(VCPU_OPTIONS.contains(&k));
    let t1 = params.c0 + params.a_v * graph.node_count() as f64 + params.a_e * graph.edge_count() as f64;
    let f = params.serial.at(graph.node_count());
    let base = (t1 * (f + (1.0 - f) / k as f64)).round();
    let eps = if params.noise_rel > 0.0 {
        let fingerprint = crc32fast::hash(write_dump(graph).as_bytes()) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(params.seed, fingerprint), k as u64));
        rng.gen_range(-params.noise_rel..=params.noise_rel)
    } else {
        0.0
    };
    (base * (1.0 + eps)).max(1.0)
}

pub fn oracle_runtimes(graph: &DesignGraph, params: &OracleParams) -> [f64; 4] {
    VCPU_OPTIONS.map(|k| oracle_runtime(graph, params, k))
}

/// Deterministic random design of the given size class and style.
pub fn gen_graph(seed: u64, size: SizeClass, style: GraphStyle) -> DesignGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = size.node_range();
    let target = rng.gen_range(lo..=hi);
    let name = format!("synth-{}-{seed}", size.as_str());
    match style {
        GraphStyle::Aig => gen_aig(&mut rng, target, name),
        GraphStyle::Netlist => gen_netlist(&mut rng, target, name),
    }
}

fn gen_aig(rng: &mut ChaCha8Rng, target: usize, name: String) -> DesignGraph {
    let pis = (target / 10).max(2);
    let pos = (target / 20).max(1);
    let gates = target - pis - pos;
    let mut nodes: Vec<(String, NodeKind)> = (0..pis).map(|i| (format!("pi{i}"), NodeKind::PrimaryInput)).collect();
    let mut edges = Vec::new();
    // Signals that can feed a gate; each may get one shared inverter.
    let mut signals: Vec<usize> = (0..pis).collect();
    let mut inverted: Vec<Option<usize>> = vec![None; pis];
    let window = ((target as f64).sqrt() as usize).max(4);

    let pick = |rng: &mut ChaCha8Rng, len: usize| -> usize {
        if rng.gen_bool(0.6) {
            rng.gen_range(len.saturating_sub(window)..len)
        } else {
            rng.gen_range(0..len)
        }
    };

    let (mut ands, mut invs) = (0usize, 0usize);
    while nodes.len() < pis + gates {
        let room = pis + gates - nodes.len();
        let a = pick(rng, signals.len());
        if room >= 2 && rng.gen_bool(0.25) && inverted[a].is_none() {
            let id = nodes.len();
            nodes.push((format!("inv{invs}"), NodeKind::Inverter));
            invs += 1;
            edges.push((signals[a], id));
            inverted[a] = Some(id);
            continue;
        }
        let mut b = pick(rng, signals.len());
        if b == a {
            b = (a + 1) % signals.len();
        }
        let id = nodes.len();
        nodes.push((format!("and{ands}"), NodeKind::AndGate));
        ands += 1;
        for s in [a, b] {
            let src = match inverted[s] {
                Some(inv) if rng.gen_bool(0.5) => inv,
                _ => signals[s],
            };
            edges.push((src, id));
        }
        signals.push(id);
        inverted.push(None);
    }
    for i in 0..pos {
        let s = signals[signals.len() - 1 - (i % signals.len())];
        let id = nodes.len();
        nodes.push((format!("po{i}"), NodeKind::PrimaryOutput));
        edges.push((s, id));
    }
    DesignGraph::new(name, SourceKind::Aig, nodes, edges).expect("generated AIG is well formed")
}

const CELL_TYPES: [&str; 8] = ["NAND2", "NOR2", "INV", "AOI21", "OAI21", "XOR2", "MUX2", "DFF"];

fn gen_netlist(rng: &mut ChaCha8Rng, target: usize, name: String) -> DesignGraph {
    let inputs = (target / 12).max(2);
    let outputs = (target / 16).max(1);
    let cells = target - inputs - outputs;
    let ports: Vec<Port> = (0..inputs)
        .map(|i| Port { id: format!("in{i}"), dir: PortDir::In })
        .chain((0..outputs).map(|i| Port { id: format!("out{i}"), dir: PortDir::Out }))
        .collect();
    let cell_list: Vec<Cell> = (0..cells)
        .map(|i| Cell {
            id: format!("u{i}"),
            cell_type: CELL_TYPES[rng.gen_range(0..CELL_TYPES.len())].to_string(),
        })
        .collect();

    let mut nets = Vec::new();
    let drivers = (0..inputs).map(|i| format!("in{i}")).chain((0..cells).map(|i| format!("u{i}")));
    for (d, driver) in drivers.enumerate() {
        // Geometric fan-out with mean ~2.5, favoring nearby downstream cells.
        let mut fanout = 1;
        while fanout < 16 && rng.gen_bool(0.6) {
            fanout += 1;
        }
        let mut sinks = HashSet::new();
        let self_cell = d.checked_sub(inputs);
        for _ in 0..fanout {
            let c = if rng.gen_bool(0.8) {
                let base = self_cell.map_or(0, |c| c + 1);
                (base + rng.gen_range(0..32)).min(cells - 1)
            } else {
                rng.gen_range(0..cells)
            };
            if Some(c) != self_cell {
                sinks.insert(format!("u{c}"));
            }
        }
        let mut sinks: Vec<String> = sinks.into_iter().collect();
        sinks.sort();
        if !sinks.is_empty() {
            nets.push(Net { driver, sinks });
        }
    }
    for o in 0..outputs {
        let c = cells - 1 - (o * 7) % cells;
        nets.push(Net { driver: format!("u{c}"), sinks: vec![format!("out{o}")] });
    }
    let netlist = Netlist::new(name, cell_list, ports, nets).expect("generated netlist is well formed");
    star_expand(&netlist).expect("generated netlist expands")
}

/// Labeled synthetic designs with a design-disjoint train/test split.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub samples: Vec<TrainSample>,
    pub seeds: Vec<u64>,
    pub sizes: Vec<SizeClass>,
    pub params: OracleParams,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SyntheticDataset {
    pub fn train_samples(&self) -> Vec<TrainSample> {
        self.train.iter().map(|&i| self.samples[i].clone()).collect()
    }

    pub fn test_samples(&self) -> Vec<TrainSample> {
        self.test.iter().map(|&i| self.samples[i].clone()).collect()
    }

    /// Write graph dumps under `dir/graphs/` plus `train.jsonl` and `test.jsonl`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let gdir = dir.join("graphs");
        std::fs::create_dir_all(&gdir)?;
        let mut records = Vec::with_capacity(self.samples.len());
        for (i, s) in self.samples.iter().enumerate() {
            let rel = format!("graphs/g{i:04}.graph");
            std::fs::write(dir.join(&rel), write_dump(&s.graph))?;
            records.push(DatasetRecord::new(rel, s.application, s.runtimes));
        }
        let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
        write_dataset_records(&dir.join("train.jsonl"), &pick(&self.train))?;
        write_dataset_records(&dir.join("test.jsonl"), &pick(&self.test))?;
        Ok(())
    }
}

/// `n_graphs` designs cycling through `sizes`, each from its own seed, labeled
/// by the oracle and split 80/20 by design.
pub fn gen_dataset(
    n_graphs: usize,
    params: &OracleParams,
    sizes: &[SizeClass],
    seed: u64,
    exec: Exec,
) -> Result<SyntheticDataset> {
    if n_graphs < 10 {
        return Err(Error::Config(format!("a dataset needs at least 10 graphs, got {n_graphs}")));
    }
    if sizes.is_empty() {
        return Err(Error::Config("at least one size class is required".into()));
    }
    params.validate()?;
    let style = GraphStyle::for_stage(params.application);
    let class_of = |i: usize| sizes[i % sizes.len()];

    let mut seeds: Vec<u64> = (0..n_graphs as u64).map(|i| mix(seed, i)).collect();
    let mut graphs = exec.map_range(n_graphs, |i| gen_graph(seeds[i], class_of(i), style));
    // Redraw the rare structural duplicate so every design is unique.
    let mut seen = HashSet::new();
    for i in 0..n_graphs {
        let mut salt = n_graphs as u64;
        while !seen.insert(write_dump(&graphs[i])) {
            seeds[i] = mix(seed, salt + i as u64);
            salt += n_graphs as u64;
            graphs[i] = gen_graph(seeds[i], class_of(i), style);
        }
    }

    let labeled = exec.map(&graphs, |g| oracle_runtimes(g, params));
    let samples = graphs
        .into_iter()
        .zip(labeled)
        .map(|(g, r)| TrainSample::new(Arc::new(g), params.application, r))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..n_graphs).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix(seed, u64::MAX)));
    let n_train = n_graphs * 4 / 5;
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();

    Ok(SyntheticDataset {
        samples,
        seeds,
        sizes: (0..n_graphs).map(class_of).collect(),
        params: *params,
        train,
        test,
    })
}
