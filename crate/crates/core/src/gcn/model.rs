use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::FEATURE_DIM;
use crate::matrix::DenseMatrix;
use crate::stage::Stage;

/// One runtime per vCPU option.
pub const OUTPUTS: usize = 4;

/// Node activation inside the GCN layers and the hidden FC layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Linear pass-through; a test hook for checking aggregation by hand.
    Identity,
}

impl Activation {
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    pub(crate) fn grad(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Which neighbors a node averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Sources of incoming edges (follows edge direction).
    InNeighbors,
    /// Both incoming and outgoing neighbors.
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Architecture and optimizer settings stored alongside the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnConfig {
    pub input_dim: usize,
    /// Output width of each GCN layer.
    pub gcn_dims: Vec<usize>,
    pub head_hidden: usize,
    pub activation: Activation,
    pub aggregation: Aggregation,
    pub adam: AdamConfig,
}

impl Default for GcnConfig {
    /// 8 → 256 → 128 GCN, 128 → 128 ReLU head, 128 → 4 linear output.
    fn default() -> Self {
        GcnConfig {
            input_dim: FEATURE_DIM,
            gcn_dims: vec![256, 128],
            head_hidden: 128,
            activation: Activation::Relu,
            aggregation: Aggregation::InNeighbors,
            adam: AdamConfig::default(),
        }
    }
}

impl GcnConfig {
    /// Narrow variant with the same topology, for finite-difference checks.
    pub fn narrow(gcn_dims: Vec<usize>, head_hidden: usize) -> Self {
        GcnConfig {
            gcn_dims,
            head_hidden,
            ..GcnConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.gcn_dims.is_empty() || self.gcn_dims.contains(&0) || self.head_hidden == 0 || self.input_dim == 0 {
            return Err(Error::Config("GCN dimensions must be non-empty and positive".into()));
        }
        Ok(())
    }

    pub fn embedding_dim(&self) -> usize {
        *self.gcn_dims.last().expect("validated non-empty")
    }
}

/// Neighbor transform `w` and self transform `b`, both `d_in × d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayer {
    pub w: DenseMatrix,
    pub b: DenseMatrix,
}

/// Fully connected layer; `bias` is a `1 × d_out` row.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weights: DenseMatrix,
    pub bias: DenseMatrix,
}

/// Every trainable tensor. Gradients and Adam moments use the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub layers: Vec<GcnLayer>,
    pub fc_hidden: Linear,
    pub fc_out: Linear,
}

impl Parameters {
    pub fn zeros(config: &GcnConfig) -> Self {
        let mut dims = vec![config.input_dim];
        dims.extend(&config.gcn_dims);
        let layers = dims
            .windows(2)
            .map(|d| GcnLayer {
                w: DenseMatrix::zeros(d[0], d[1]),
                b: DenseMatrix::zeros(d[0], d[1]),
            })
            .collect();
        let emb = config.embedding_dim();
        Parameters {
            layers,
            fc_hidden: Linear {
                weights: DenseMatrix::zeros(emb, config.head_hidden),
                bias: DenseMatrix::zeros(1, config.head_hidden),
            },
            fc_out: Linear {
                weights: DenseMatrix::zeros(config.head_hidden, OUTPUTS),
                bias: DenseMatrix::zeros(1, OUTPUTS),
            },
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |m: &DenseMatrix| DenseMatrix::zeros(m.rows(), m.cols());
        Parameters {
            layers: self.layers.iter().map(|l| GcnLayer { w: z(&l.w), b: z(&l.b) }).collect(),
            fc_hidden: Linear {
                weights: z(&self.fc_hidden.weights),
                bias: z(&self.fc_hidden.bias),
            },
            fc_out: Linear {
                weights: z(&self.fc_out.weights),
                bias: z(&self.fc_out.bias),
            },
        }
    }

    /// Tensors in canonical order: `W_1, B_1, ..., W_K, B_K`, hidden
    /// weights, hidden bias, output weights, output bias.
    pub fn tensors(&self) -> Vec<&DenseMatrix> {
        let mut v: Vec<&DenseMatrix> = self.layers.iter().flat_map(|l| [&l.w, &l.b]).collect();
        v.extend([
            &self.fc_hidden.weights,
            &self.fc_hidden.bias,
            &self.fc_out.weights,
            &self.fc_out.bias,
        ]);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut v: Vec<&mut DenseMatrix> = self
            .layers
            .iter_mut()
            .flat_map(|l| [&mut l.w, &mut l.b])
            .collect();
        v.extend([
            &mut self.fc_hidden.weights,
            &mut self.fc_hidden.bias,
            &mut self.fc_out.weights,
            &mut self.fc_out.bias,
        ]);
        v
    }

    /// Human-readable tensor names matching [`Parameters::tensors`].
    pub fn tensor_names(&self) -> Vec<String> {
        let mut v: Vec<String> = (1..=self.layers.len())
            .flat_map(|k| [format!("W_{k}"), format!("B_{k}")])
            .collect();
        v.extend(["fc_hidden.weights", "fc_hidden.bias", "fc_out.weights", "fc_out.bias"].map(String::from));
        v
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.as_slice().len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tensor shapes `config` implies, in canonical order.
    pub fn expected_shapes(config: &GcnConfig) -> Vec<(usize, usize)> {
        let mut dims = vec![config.input_dim];
        dims.extend(&config.gcn_dims);
        let mut shapes: Vec<(usize, usize)> = dims.windows(2).flat_map(|d| [(d[0], d[1]); 2]).collect();
        let emb = config.embedding_dim();
        shapes.extend([(emb, config.head_hidden), (1, config.head_hidden), (config.head_hidden, OUTPUTS), (1, OUTPUTS)]);
        shapes
    }

    pub fn matches(&self, config: &GcnConfig) -> bool {
        let shapes = Parameters::expected_shapes(config);
        let tensors = self.tensors();
        shapes.len() == tensors.len() && tensors.iter().zip(&shapes).all(|(t, &s)| t.shape() == s)
    }

    pub fn same_shape(&self, other: &Parameters) -> bool {
        let (a, b) = (self.tensors(), other.tensors());
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.shape() == y.shape())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }
}

/// Per-output z-score statistics of the training targets (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetNorm {
    pub mean: [f64; OUTPUTS],
    pub std: [f64; OUTPUTS],
}

impl TargetNorm {
    pub fn new(mean: [f64; OUTPUTS], std: [f64; OUTPUTS]) -> Result<Self> {
        if std.iter().any(|s| !(s.is_finite() && *s > 0.0)) || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Contract("target normalization needs finite means and positive deviations".into()));
        }
        Ok(TargetNorm { mean, std })
    }

    /// Identity transform.
    pub fn identity() -> Self {
        TargetNorm {
            mean: [0.0; OUTPUTS],
            std: [1.0; OUTPUTS],
        }
    }

    /// Population statistics over `targets`. A zero spread falls back to the
    /// mean magnitude so the transform still scales with the data.
    pub fn fit(targets: &[[f64; OUTPUTS]]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Config("cannot fit target normalization on an empty dataset".into()));
        }
        let n = targets.len() as f64;
        let mut mean = [0.0; OUTPUTS];
        let mut std = [0.0; OUTPUTS];
        for j in 0..OUTPUTS {
            mean[j] = targets.iter().map(|t| t[j]).sum::<f64>() / n;
            let var = targets.iter().map(|t| (t[j] - mean[j]).powi(2)).sum::<f64>() / n;
            std[j] = var.sqrt();
            if std[j] == 0.0 {
                std[j] = mean[j].abs();
            }
        }
        TargetNorm::new(mean, std)
    }

    pub fn normalize(&self, seconds: &[f64; OUTPUTS]) -> [f64; OUTPUTS] {
        std::array::from_fn(|j| (seconds[j] - self.mean[j]) / self.std[j])
    }

    pub fn denormalize(&self, z: &[f64; OUTPUTS]) -> [f64; OUTPUTS] {
        std::array::from_fn(|j| z[j] * self.std[j] + self.mean[j])
    }
}

/// A runtime model for one application.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub config: GcnConfig,
    pub params: Parameters,
    /// Absent until the model has been trained.
    pub target_norm: Option<TargetNorm>,
    pub application: Stage,
    pub seed: u64,
}

impl GcnModel {
    /// Fresh model with Xavier-uniform weights and zero biases.
    pub fn new(config: GcnConfig, application: Stage, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut params = Parameters::zeros(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xavier = |m: &mut DenseMatrix, rng: &mut ChaCha8Rng| {
            let a = (6.0 / (m.rows() + m.cols()) as f64).sqrt();
            m.as_mut_slice().iter_mut().for_each(|v| *v = rng.gen_range(-a..a));
        };
        for layer in &mut params.layers {
            xavier(&mut layer.w, &mut rng);
            xavier(&mut layer.b, &mut rng);
        }
        xavier(&mut params.fc_hidden.weights, &mut rng);
        xavier(&mut params.fc_out.weights, &mut rng);
        Ok(GcnModel {
            config,
            params,
            target_norm: None,
            application,
            seed,
        })
    }

    pub fn is_trained(&self) -> bool {
        self.target_norm.is_some()
    }

    pub(crate) fn norm_or_identity(&self) -> TargetNorm {
        self.target_norm.unwrap_or_else(TargetNorm::identity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_architecture_shapes() {
        let m = GcnModel::new(GcnConfig::default(), Stage::Routing, 1).unwrap();
        let shapes: Vec<_> = m.params.tensors().iter().map(|t| t.shape()).collect();
        assert_eq!(
            shapes,
            vec![(8, 256), (8, 256), (256, 128), (256, 128), (128, 128), (1, 128), (128, 4), (1, 4)]
        );
        assert_eq!(m.params.tensor_names().len(), shapes.len());
        assert!(!m.is_trained());
    }

    #[test]
    fn init_is_seeded() {
        let a = GcnModel::new(GcnConfig::default(), Stage::Sta, 9).unwrap();
        let b = GcnModel::new(GcnConfig::default(), Stage::Sta, 9).unwrap();
        let c = GcnModel::new(GcnConfig::default(), Stage::Sta, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
        let bound = (6.0f64 / (8 + 256) as f64).sqrt();
        assert!(a.params.layers[0].w.as_slice().iter().all(|v| v.abs() < bound));
    }

    #[test]
    fn norm_fit_and_scale() {
        let t = [[10.0, 5.0, 3.0, 2.0], [30.0, 15.0, 9.0, 6.0]];
        let n = TargetNorm::fit(&t).unwrap();
        assert_eq!(n.mean, [20.0, 10.0, 6.0, 4.0]);
        assert_eq!(n.std, [10.0, 5.0, 3.0, 2.0]);
        assert_eq!(n.normalize(&t[0]), [-1.0; 4]);
        assert_eq!(n.denormalize(&[1.0; 4]), t[1]);
        let single = TargetNorm::fit(&[[7.0, 6.0, 5.0, 4.0]]).unwrap();
        assert_eq!(single.std, [7.0, 6.0, 5.0, 4.0]);
        assert!(TargetNorm::fit(&[]).is_err());
        assert!(TargetNorm::new([0.0; 4], [1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_empty_dims() {
        assert!(GcnModel::new(GcnConfig::narrow(vec![], 4), Stage::Sta, 0).is_err());
    }
}
