use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use eda_planner::gcn::{self, load_dataset, load_model, predict_runtimes, save_model, GcnConfig, GcnModel};
use eda_planner::graph::{graph_stats, load_design, write_dump, DesignGraph, NodeKind, SourceKind};
use eda_planner::mckp::{
    build_instance, compute_speedups, render_csv, render_table, solve_deadlines, MckpInstance, Objective, PlanReport,
    RuntimesFile, StageChoices,
};
use eda_planner::pricing::{load_pricing, PricingTable};
use eda_planner::synth::{gen_dataset, OracleParams, SerialFraction};
use eda_planner::{Exec, RuntimeEstimate, Stage, VCPU_OPTIONS};
use serde::Serialize;

use crate::{
    svg, OptimizeArgs, ParseArgs, PlanArgs, PlanOutput, PredictArgs, ReportFormat, StatsFormat, SynthArgs, TrainArgs,
};

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_design(path: &Path) -> Result<DesignGraph> {
    load_design(path).with_context(|| format!("loading design {}", path.display()))
}

pub fn parse(args: ParseArgs) -> Result<()> {
    let graph = read_design(&args.design)?;
    let stats = graph_stats(&graph);
    let text = match args.format {
        StatsFormat::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                design: &'a str,
                source: &'a str,
                nodes: usize,
                edges: usize,
                per_kind: BTreeMap<&'static str, usize>,
                max_fan_out: usize,
                depth: eda_planner::graph::Depth,
            }
            let report = Report {
                design: graph.name(),
                source: graph.source().as_str(),
                nodes: stats.nodes,
                edges: stats.edges,
                per_kind: NodeKind::ALL.iter().map(|k| (k.as_str(), stats.count(*k))).collect(),
                max_fan_out: stats.max_fan_out,
                depth: stats.depth,
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
        StatsFormat::Table => {
            let mut s = String::new();
            writeln!(s, "design      {}", graph.name())?;
            writeln!(s, "source      {}", graph.source())?;
            writeln!(s, "nodes       {}", stats.nodes)?;
            writeln!(s, "edges       {}", stats.edges)?;
            for k in NodeKind::ALL {
                writeln!(s, "  {:<10}{}", k.as_str(), stats.count(k))?;
            }
            writeln!(s, "max fan-out {}", stats.max_fan_out)?;
            writeln!(s, "depth       {}", stats.depth)?;
            s
        }
    };
    print!("{text}");
    if let Some(dump) = &args.dump {
        write_output(Some(dump), &write_dump(&graph))?;
    }
    Ok(())
}

pub fn synth(args: SynthArgs, exec: Exec) -> Result<()> {
    let mut params = OracleParams::for_stage(args.application, args.seed);
    if let Some(n) = args.noise {
        params.noise_rel = n;
    }
    if let Some(f) = args.serial_fraction {
        params.serial = SerialFraction::Fixed(f);
    }
    let ds = gen_dataset(args.count, &params, &args.sizes, args.seed, exec)?;
    ds.write_to(&args.out)
        .with_context(|| format!("writing dataset to {}", args.out.display()))?;
    std::fs::write(args.out.join("oracle.json"), serde_json::to_string_pretty(&params)? + "\n")?;
    println!(
        "{} designs for {} ({} train / {} test) written to {}",
        ds.samples.len(),
        args.application,
        ds.train.len(),
        ds.test.len(),
        args.out.display()
    );
    Ok(())
}

pub fn train(args: TrainArgs, exec: Exec) -> Result<()> {
    let data = load_dataset(&args.dataset).with_context(|| format!("loading {}", args.dataset.display()))?;
    let mut config = GcnConfig::narrow(args.gcn_dims.clone(), args.head_hidden);
    if args.undirected {
        config.aggregation = gcn::Aggregation::Undirected;
    }
    let model = GcnModel::new(config, args.application, args.seed)?;
    log::info!("training {} on {} samples for {} epochs", args.application, data.len(), args.epochs);
    let trained = gcn::train(model, &data, args.epochs)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_model(&trained.model, &args.out).with_context(|| format!("writing {}", args.out.display()))?;

    let history = args.history.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".loss.csv");
        PathBuf::from(p)
    });
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in trained.loss_history.iter().enumerate() {
        writeln!(csv, "{},{l}", i + 1)?;
    }
    std::fs::write(&history, csv).with_context(|| format!("writing {}", history.display()))?;

    let last = trained.loss_history.last().copied().unwrap_or(f64::NAN);
    println!("{} model: {} samples, {} epochs, final loss {last:.6}", args.application, data.len(), args.epochs);
    if let Some(test) = &args.test {
        let held_out = load_dataset(test).with_context(|| format!("loading {}", test.display()))?;
        let report = gcn::evaluate(&trained.model, &held_out, exec)?;
        println!("held-out MAPE {:.2}% over {} samples", 100.0 * report.mape, report.samples);
    }
    Ok(())
}

#[derive(Serialize)]
struct Prediction {
    design: String,
    application: Stage,
    runtimes: BTreeMap<String, u64>,
    speedups: BTreeMap<String, f64>,
}

impl Prediction {
    fn new(design: &DesignGraph, application: Stage, est: &RuntimeEstimate) -> Self {
        let keys = VCPU_OPTIONS.map(|v| v.to_string());
        Prediction {
            design: design.name().to_string(),
            application,
            runtimes: keys.iter().cloned().zip(est.seconds()).collect(),
            speedups: keys.into_iter().zip(compute_speedups(est)).collect(),
        }
    }
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model).with_context(|| format!("loading model {}", args.model.display()))?;
    let graph = read_design(&args.design)?;
    let est = predict_runtimes(&model, &graph)?;
    let text = serde_json::to_string_pretty(&Prediction::new(&graph, model.application, &est))? + "\n";
    write_output(args.output.as_deref(), &text)
}

fn load_models(paths: &[PathBuf], dir: Option<&Path>) -> Result<BTreeMap<Stage, GcnModel>> {
    let mut models = BTreeMap::new();
    for p in paths {
        let m = load_model(p).with_context(|| format!("loading model {}", p.display()))?;
        if models.insert(m.application, m).is_some() {
            bail!("more than one model given for a stage ({})", p.display());
        }
    }
    for stage in Stage::ALL {
        if models.contains_key(&stage) {
            continue;
        }
        let Some(dir) = dir else { continue };
        let p = dir.join(format!("{stage}.gcn"));
        if p.exists() {
            let m = load_model(&p).with_context(|| format!("loading model {}", p.display()))?;
            if m.application != stage {
                bail!("{} holds a {} model, expected {stage}", p.display(), m.application);
            }
            models.insert(stage, m);
        }
    }
    if let Some(missing) = Stage::ALL.into_iter().find(|s| !models.contains_key(s)) {
        bail!("no model for stage `{missing}`");
    }
    Ok(models)
}

/// Predict every stage on the design whose source kind it expects.
fn predict_stages(
    models: &BTreeMap<Stage, GcnModel>,
    designs: &[DesignGraph],
    exec: Exec,
) -> Result<Vec<Prediction>> {
    let jobs = Stage::ALL
        .into_iter()
        .map(|stage| {
            let want = if stage.expects_aig() { SourceKind::Aig } else { SourceKind::Netlist };
            let design = designs
                .iter()
                .find(|d| d.source() == want)
                .ok_or_else(|| anyhow!("no {want}-sourced design given for stage `{stage}`"))?;
            Ok((&models[&stage], design))
        })
        .collect::<Result<Vec<_>>>()?;
    exec.map(&jobs, |(model, design)| {
        predict_runtimes(model, design).map(|est| Prediction::new(design, model.application, &est))
    })
    .into_iter()
    .map(|r| r.map_err(anyhow::Error::from))
    .collect()
}

fn estimates_of(predictions: &[Prediction]) -> Result<Vec<(Stage, RuntimeEstimate)>> {
    predictions
        .iter()
        .map(|p| {
            let secs = VCPU_OPTIONS.map(|v| p.runtimes[&v.to_string()]);
            Ok((p.application, RuntimeEstimate::new(secs)?))
        })
        .collect()
}

fn read_pricing(path: &Path) -> Result<PricingTable> {
    let table = load_pricing(path).with_context(|| format!("loading pricing {}", path.display()))?;
    for w in table.warnings() {
        log::warn!("{w}");
    }
    Ok(table)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    objective: Objective,
    stages: &'a [StageChoices],
    #[serde(skip_serializing_if = "Option::is_none")]
    predictions: Option<BTreeMap<Stage, &'a Prediction>>,
    plans: &'a [PlanReport],
}

fn report(
    instance: &MckpInstance,
    deadlines: &[u64],
    predictions: Option<&[Prediction]>,
    out: &PlanOutput,
    exec: Exec,
) -> Result<()> {
    let objective = Objective::from(out.objective);
    let plans = solve_deadlines(instance, deadlines, objective, exec)?;
    let reports: Vec<PlanReport> = plans
        .iter()
        .zip(deadlines)
        .map(|(plan, &c)| Ok(PlanReport::new(&instance.with_capacity(c)?, plan, objective)))
        .collect::<Result<_>>()?;
    for r in reports.iter().filter(|r| !r.feasible) {
        log::info!("deadline {} s is infeasible", r.capacity);
    }

    let text = match out.format {
        ReportFormat::Table => {
            let mut s = String::new();
            if let Some(preds) = predictions {
                for p in preds {
                    let rt: Vec<String> = p.runtimes.values().map(u64::to_string).collect();
                    writeln!(s, "{:<10} {:<16} predicted runtimes (s): {}", p.application.as_str(), p.design, rt.join(" / "))?;
                }
                s.push('\n');
            }
            s + &render_table(instance, &reports)
        }
        ReportFormat::Csv => render_csv(&reports, instance)?,
        ReportFormat::Json => {
            let json = JsonReport {
                objective,
                stages: instance.stages(),
                predictions: predictions.map(|ps| ps.iter().map(|p| (p.application, p)).collect()),
                plans: &reports,
            };
            serde_json::to_string_pretty(&json)? + "\n"
        }
    };
    write_output(out.output.as_deref(), &text)?;
    if let Some(path) = &out.emit_svg {
        std::fs::write(path, svg::cost_chart(&reports)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn optimize(args: OptimizeArgs, exec: Exec) -> Result<()> {
    let pricing = args.pricing.as_deref().map(read_pricing).transpose()?;
    let first = args.deadline[0];
    if let Some(path) = &args.runtimes {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file = RuntimesFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        let instance = match &pricing {
            Some(p) => build_instance(&file.estimates()?, p, first)?,
            None => file.to_instance(None, first)?,
        };
        return report(&instance, &args.deadline, None, &args.out, exec);
    }
    let pricing = pricing.ok_or_else(|| anyhow!("--pricing is required when runtimes come from models"))?;
    let models = load_models(&args.model, None)?;
    let designs = args.design.iter().map(|p| read_design(p)).collect::<Result<Vec<_>>>()?;
    let predictions = predict_stages(&models, &designs, exec)?;
    let instance = build_instance(&estimates_of(&predictions)?, &pricing, first)?;
    report(&instance, &args.deadline, Some(&predictions), &args.out, exec)
}

pub fn plan(args: PlanArgs, exec: Exec) -> Result<()> {
    let pricing = read_pricing(&args.pricing)?;
    let models = load_models(&args.model, args.model_dir.as_deref())?;
    let designs = args.design.iter().map(|p| read_design(p)).collect::<Result<Vec<_>>>()?;
    let predictions = predict_stages(&models, &designs, exec)?;
    let instance = build_instance(&estimates_of(&predictions)?, &pricing, args.deadline[0])?;
    report(&instance, &args.deadline, Some(&predictions), &args.out, exec)
}
