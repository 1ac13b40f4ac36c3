use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{build_features, DesignGraph, SourceKind};
use crate::matrix::DenseMatrix;
use crate::stage::{RuntimeEstimate, Stage, VCPU_OPTIONS};

use super::adam::{adam_step, AdamState};
use super::model::{GcnModel, TargetNorm, OUTPUTS};
use super::network::{backward_from_cache, forward_cached, gcn_forward, normalized_mse};

pub const DEFAULT_EPOCHS: usize = 200;

/// Stream offset so weight init and epoch shuffling draw independent sequences.
const SHUFFLE_STREAM: u64 = 0x5348_5546_464c_4521;

/// One labeled graph: runtimes in seconds on 1, 2, 4 and 8 vCPUs.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub graph: Arc<DesignGraph>,
    pub features: DenseMatrix,
    pub runtimes: [f64; OUTPUTS],
    pub application: Stage,
}

impl TrainSample {
    pub fn new(graph: Arc<DesignGraph>, application: Stage, runtimes: [f64; OUTPUTS]) -> Result<Self> {
        if let Some(j) = runtimes.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Validation(format!(
                "sample `{}`: runtime for {} vCPU(s) must be positive",
                graph.name(),
                VCPU_OPTIONS[j]
            )));
        }
        let features = build_features(&graph);
        Ok(TrainSample {
            graph,
            features,
            runtimes,
            application,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: GcnModel,
    /// Mean per-sample loss of each epoch, measured before each update.
    pub loss_history: Vec<f64>,
}

fn check_source(model: &GcnModel, graph: &DesignGraph) -> Result<()> {
    let want = if model.application.expects_aig() {
        SourceKind::Aig
    } else {
        SourceKind::Netlist
    };
    if graph.source() != want {
        return Err(Error::Config(format!(
            "{} model expects a {want}-sourced graph, got `{}` from a {}",
            model.application,
            graph.name(),
            graph.source()
        )));
    }
    Ok(())
}

/// Pure stochastic training: one Adam step per sample, samples reshuffled
/// every epoch with an RNG derived from the model seed. Target statistics are
/// fitted on `dataset` before the first epoch.
pub fn train(mut model: GcnModel, dataset: &[TrainSample], epochs: usize) -> Result<Trained> {
    if dataset.is_empty() {
        return Err(Error::Config("training dataset is empty".into()));
    }
    if let Some(s) = dataset.iter().find(|s| s.application != model.application) {
        return Err(Error::Config(format!(
            "sample `{}` belongs to {}, model is for {}",
            s.graph.name(),
            s.application,
            model.application
        )));
    }
    for s in dataset {
        check_source(&model, &s.graph)?;
    }
    let norm = TargetNorm::fit(&dataset.iter().map(|s| s.runtimes).collect::<Vec<_>>())?;
    model.target_norm = Some(norm);
    let targets: Vec<[f64; OUTPUTS]> = dataset.iter().map(|s| norm.normalize(&s.runtimes)).collect();

    let mut adam = AdamState::new(&model.params, model.config.adam);
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed ^ SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut loss_history = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let sample = &dataset[i];
            let cache = forward_cached(&model, &sample.graph, &sample.features)?;
            total += normalized_mse(&cache.output.normalized, &targets[i]);
            let grads = backward_from_cache(&model, &cache, &targets[i])?;
            adam_step(&mut model.params, &grads, &mut adam)?;
        }
        let mean = total / dataset.len() as f64;
        log::debug!("{} epoch {epoch}: loss {mean:.6}", model.application);
        loss_history.push(mean);
    }
    Ok(Trained { model, loss_history })
}

/// Train several independent models (typically one per application).
pub fn train_many(jobs: Vec<(GcnModel, Vec<TrainSample>)>, epochs: usize, exec: Exec) -> Vec<Result<Trained>> {
    exec.map(&jobs, |(model, data)| train(model.clone(), data, epochs))
}

/// Clamp to at least one second and round to whole seconds.
pub fn to_billable_seconds(raw: f64) -> u64 {
    if raw.is_finite() {
        raw.round().max(1.0) as u64
    } else if raw > 0.0 {
        u64::MAX
    } else {
        1
    }
}

/// Runtime estimate for `graph` on 1/2/4/8 vCPUs, in whole seconds (≥ 1).
pub fn predict_runtimes(model: &GcnModel, graph: &DesignGraph) -> Result<RuntimeEstimate> {
    if !model.is_trained() {
        return Err(Error::State(format!(
            "{} model has no target normalization; train it first",
            model.application
        )));
    }
    check_source(model, graph)?;
    let out = gcn_forward(model, graph, &build_features(graph))?;
    RuntimeEstimate::new(out.prediction.map(to_billable_seconds))
}

/// Mean absolute percentage error of a trained model on labeled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub samples: usize,
    pub mape_per_output: [f64; OUTPUTS],
    pub mape: f64,
}

pub fn evaluate(model: &GcnModel, samples: &[TrainSample], exec: Exec) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::Config("evaluation set is empty".into()));
    }
    let errors = exec.map(samples, |s| -> Result<[f64; OUTPUTS]> {
        let est = predict_runtimes(model, &s.graph)?.seconds();
        Ok(std::array::from_fn(|j| (est[j] as f64 - s.runtimes[j]).abs() / s.runtimes[j]))
    });
    let mut sums = [0.0; OUTPUTS];
    for e in errors {
        let e = e?;
        for j in 0..OUTPUTS {
            sums[j] += e[j];
        }
    }
    let n = samples.len() as f64;
    let mape_per_output = sums.map(|s| 100.0 * s / n);
    Ok(EvalReport {
        samples: samples.len(),
        mape_per_output,
        mape: mape_per_output.iter().sum::<f64>() / OUTPUTS as f64,
    })
}
