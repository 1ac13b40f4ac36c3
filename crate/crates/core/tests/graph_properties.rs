mod common;

use std::collections::BTreeSet;

use eda_planner::graph::{
    build_features, graph_stats, load_design, parse_aiger, parse_dump, parse_netlist_json, parse_verilog_subset,
    star_expand, write_dump, Cell, Depth, Net, Netlist, NodeKind, Port, PortDir, SourceKind, VerilogOptions,
    FEATURE_DIM,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

/// Random well-formed aag text: inputs, then ANDs whose operands refer only
/// to earlier variables (or the constants), then outputs on any literal.
fn aag_strategy() -> impl Strategy<Value = (String, usize, usize, usize, Vec<u64>)> {
    (1usize..6, 0usize..8, 1usize..4)
        .prop_flat_map(|(i, a, o)| {
            let rhs = (0..a)
                .map(|k| {
                    let max = 2 * (i + k) as u64 + 1;
                    (0..=max, 0..=max)
                })
                .collect::<Vec<_>>();
            let outs = proptest::collection::vec(0..=2 * (i + a) as u64 + 1, o);
            (Just(i), Just(a), rhs, outs)
        })
        .prop_map(|(i, a, rhs, outs)| {
            let mut text = format!("aag {} {i} 0 {} {a}\n", i + a, outs.len());
            for k in 1..=i {
                text.push_str(&format!("{}\n", 2 * k));
            }
            for l in &outs {
                text.push_str(&format!("{l}\n"));
            }
            let mut refs: Vec<u64> = outs.clone();
            for (k, (r0, r1)) in rhs.iter().enumerate() {
                text.push_str(&format!("{} {r0} {r1}\n", 2 * (i + k + 1)));
                refs.extend([*r0, *r1]);
            }
            (text, i, a, outs.len(), refs)
        })
}

fn random_netlist(rng: &mut ChaCha8Rng) -> Netlist {
    use rand::Rng;
    let n_in = rng.gen_range(1..4);
    let n_out = rng.gen_range(1..3);
    let n_cells = rng.gen_range(1..8);
    let ports: Vec<Port> = (0..n_in)
        .map(|k| Port { id: format!("i{k}"), dir: PortDir::In })
        .chain((0..n_out).map(|k| Port { id: format!("o{k}"), dir: PortDir::Out }))
        .collect();
    let cells: Vec<Cell> = (0..n_cells)
        .map(|k| Cell { id: format!("c{k}"), cell_type: "NAND2".into() })
        .collect();
    let drivers: Vec<String> = (0..n_in).map(|k| format!("i{k}")).chain(cells.iter().map(|c| c.id.clone())).collect();
    let mut sinks_pool: Vec<String> = cells.iter().map(|c| c.id.clone()).collect();
    sinks_pool.extend((0..n_out).map(|k| format!("o{k}")));
    let mut nets = Vec::new();
    for d in &drivers {
        let sinks: Vec<String> = sinks_pool
            .iter()
            .filter(|s| *s != d && rng.gen_bool(0.3))
            .cloned()
            .collect();
        nets.push(Net { driver: d.clone(), sinks });
    }
    Netlist::new("rand", cells, ports, nets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aiger_counts_follow_construction((text, i, a, o, refs) in aag_strategy()) {
        let g = parse_aiger(text.as_bytes()).unwrap();
        let inverted: BTreeSet<u64> = refs.iter().copied().filter(|l| l % 2 == 1).collect();
        let constant = refs.iter().any(|l| l / 2 == 0);
        prop_assert_eq!(g.node_count(), i + a + o + inverted.len() + usize::from(constant));
        prop_assert_eq!(g.edge_count(), 2 * a + o + inverted.len());
        prop_assert!(g.topological_order().is_some());
        let stats = graph_stats(&g);
        prop_assert_eq!(stats.count(NodeKind::Inverter), inverted.len());
        prop_assert_eq!(stats.count(NodeKind::Constant), usize::from(constant));
        prop_assert!(matches!(stats.depth, Depth::Acyclic(_)));
    }

    #[test]
    fn aiger_parse_is_deterministic((text, ..) in aag_strategy()) {
        let a = parse_aiger(text.as_bytes()).unwrap();
        let b = parse_aiger(text.as_bytes()).unwrap();
        prop_assert_eq!(write_dump(&a), write_dump(&b));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dump_round_trip_aig((text, ..) in aag_strategy()) {
        let g = parse_aiger(text.as_bytes()).unwrap();
        let back = parse_dump(&write_dump(&g)).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(write_dump(&back), write_dump(&g));
    }

    #[test]
    fn star_edges_equal_total_sinks(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nl = random_netlist(&mut rng);
        let g = star_expand(&nl).unwrap();
        prop_assert_eq!(g.edge_count(), nl.nets.iter().map(|n| n.sinks.len()).sum::<usize>());
        prop_assert_eq!(g.node_count(), nl.ports.len() + nl.cells.len());
        prop_assert_eq!(g.source(), SourceKind::Netlist);
    }

    #[test]
    fn netlist_json_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nl = random_netlist(&mut rng);
        let back = parse_netlist_json(nl.to_json().as_bytes()).unwrap();
        prop_assert_eq!(&back, &nl);
        prop_assert_eq!(star_expand(&back).unwrap(), star_expand(&nl).unwrap());
    }

    #[test]
    fn features_are_permutation_equivariant(seed in any::<u64>(), aig in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source = if aig { SourceKind::Aig } else { SourceKind::Netlist };
        let g = random_graph(&mut rng, 12, source);
        let perm = random_permutation(&mut rng, g.node_count());
        let pg = g.permuted(&perm).unwrap();
        let (x, px) = (build_features(&g), build_features(&pg));
        prop_assert_eq!(x.shape(), (g.node_count(), FEATURE_DIM));
        for (old, &new) in perm.iter().enumerate() {
            prop_assert_eq!(x.row(old), px.row(new));
        }
        prop_assert_eq!(graph_stats(&g), graph_stats(&pg));
    }

    #[test]
    fn dump_round_trip_random(seed in any::<u64>(), aig in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source = if aig { SourceKind::Aig } else { SourceKind::Netlist };
        let g = random_graph(&mut rng, 20, source);
        prop_assert_eq!(parse_dump(&write_dump(&g)).unwrap(), g);
    }
}

#[test]
fn features_one_hot_and_log_degrees() {
    let g = load_design(&fixture("designs/and1.aag")).unwrap();
    let x = build_features(&g);
    for (v, node) in g.nodes().iter().enumerate() {
        let row = x.row(v);
        let hot: Vec<usize> = (0..6).filter(|&j| row[j] != 0.0).collect();
        assert_eq!(hot, vec![node.kind.index()]);
        assert_eq!(row[node.kind.index()], 1.0);
        assert!((row[6] - (1.0 + node.in_degree as f64).ln()).abs() < 1e-15);
        assert!((row[7] - (1.0 + node.out_degree as f64).ln()).abs() < 1e-15);
    }
}

#[test]
fn verilog_and_json_describe_the_same_graph() {
    let from_json = load_design(&fixture("designs/inv.json")).unwrap();
    let from_v = load_design(&fixture("designs/inv.v")).unwrap();
    assert_eq!(write_dump(&from_json), write_dump(&from_v));
    assert_eq!((from_v.node_count(), from_v.edge_count()), (3, 2));

    let text = std::fs::read_to_string(fixture("designs/inv.v")).unwrap();
    let nl = parse_verilog_subset(&text, &VerilogOptions::default()).unwrap();
    assert_eq!(nl, parse_netlist_json(&std::fs::read(fixture("designs/inv.json")).unwrap()).unwrap());
}

#[test]
fn load_design_by_extension() {
    let aag = load_design(&fixture("designs/and1.aag")).unwrap();
    assert_eq!(aag.source(), SourceKind::Aig);
    assert_eq!(aag.name(), "and1");
    let stats = graph_stats(&aag);
    assert_eq!((stats.nodes, stats.edges, stats.depth), (4, 3, Depth::Acyclic(2)));

    let two = load_design(&fixture("designs/two_and.aag")).unwrap();
    assert!(two.topological_order().is_some());

    let ha = load_design(&fixture("designs/half_adder.v")).unwrap();
    assert_eq!(ha.source(), SourceKind::Netlist);
    assert!(graph_stats(&ha).count(NodeKind::Cell) > 0);

    let dir = tempfile::tempdir().unwrap();
    let dumped = dir.path().join("ha.graph");
    std::fs::write(&dumped, write_dump(&ha)).unwrap();
    assert_eq!(load_design(&dumped).unwrap(), ha);

    let bad = dir.path().join("x.blif");
    std::fs::write(&bad, "").unwrap();
    assert!(load_design(&bad).is_err());
}

#[test]
fn malformed_inputs_are_rejected() {
    for text in [
        "aag 1 1 0 1 0\n2\n4\n",         // output references an undefined literal
        "aag 2 1 0 1 1\n2\n4\n4 4 2\n",  // AND depends on itself
        "aig 1 1 0 1 0\n2\n2\n",         // binary format
        "aag 1 1 1 1 0\n2\n2 3\n2\n",    // latches
    ] {
        assert!(parse_aiger(text.as_bytes()).is_err(), "{text:?}");
    }
    let dup = r#"{"name":"d","ports":[{"id":"a","dir":"in"},{"id":"a","dir":"out"}]}"#;
    assert!(parse_netlist_json(dup.as_bytes()).is_err());
    let two_drivers = r#"{"name":"d","ports":[{"id":"a","dir":"in"},{"id":"b","dir":"in"},{"id":"y","dir":"out"}],
        "nets":[{"driver":["a","b"],"sinks":["y"]}]}"#;
    assert!(parse_netlist_json(two_drivers.as_bytes()).is_err());
    let undeclared = r#"{"name":"d","ports":[{"id":"a","dir":"in"}],"nets":[{"driver":"a","sinks":["zz"]}]}"#;
    assert!(parse_netlist_json(undeclared.as_bytes()).is_err());
}
