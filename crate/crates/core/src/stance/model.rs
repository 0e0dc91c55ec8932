use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureConfig, FeatureVector, Featurizer};
use super::{StanceDistribution, StanceError, StanceLabel};

const MAGIC: &[u8; 6] = b"FCSTM\0";
const FORMAT_VERSION: u32 = 1;

/// Two-level linear stance classifier: a logistic related/unrelated head
/// and a softmax agree/disagree/discuss head.
#[derive(Debug, Clone, PartialEq)]
pub struct StanceModel {
    pub config: FeatureConfig,
    pub seed: u64,
    pub level1_w: Vec<f64>,
    pub level1_b: f64,
    /// Row-major, one row per level-2 label.
    pub level2_w: Vec<f64>,
    pub level2_b: [f64; 3],
}

impl StanceModel {
    pub fn zeros(config: FeatureConfig) -> Self {
        let d = config.dim();
        StanceModel {
            config,
            seed: 0,
            level1_w: vec![0.0; d],
            level1_b: 0.0,
            level2_w: vec![0.0; 3 * d],
            level2_b: [0.0; 3],
        }
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn featurizer(&self) -> Featurizer {
        Featurizer::new(self.config)
    }

    pub fn predict_features(&self, x: &FeatureVector) -> Result<StanceDistribution, StanceError> {
        if x.dim != self.dim() {
            return Err(StanceError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim,
            });
        }
        let p_related = sigmoid(x.dot(&self.level1_w) + self.level1_b);
        let p = softmax(level2_logits(&self.level2_w, &self.level2_b, x));
        Ok(StanceDistribution {
            p_related,
            p_agree: p[0],
            p_disagree: p[1],
            p_discuss: p[2],
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u64::<LittleEndian>(self.config.hash())?;
        w.write_u64::<LittleEndian>(self.config.buckets as u64)?;
        w.write_u64::<LittleEndian>(self.config.hash_seed)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        for v in &self.level1_w {
            w.write_f64::<LittleEndian>(*v)?;
        }
        w.write_f64::<LittleEndian>(self.level1_b)?;
        for v in &self.level2_w {
            w.write_f64::<LittleEndian>(*v)?;
        }
        for v in &self.level2_b {
            w.write_f64::<LittleEndian>(*v)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, StanceError> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(StanceError::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(StanceError::Format(format!("unsupported version {version}")));
        }
        let stored_hash = r.read_u64::<LittleEndian>()?;
        let config = FeatureConfig {
            buckets: r.read_u64::<LittleEndian>()? as usize,
            hash_seed: r.read_u64::<LittleEndian>()?,
        };
        if config.hash() != stored_hash {
            return Err(StanceError::ModelMismatch {
                model: stored_hash,
                featurizer: config.hash(),
            });
        }
        let seed = r.read_u64::<LittleEndian>()?;
        let d = config.dim();
        let mut read_vec = |n: usize| -> Result<Vec<f64>, StanceError> {
            (0..n).map(|_| Ok(r.read_f64::<LittleEndian>()?)).collect()
        };
        let level1_w = read_vec(d)?;
        let level1_b = read_vec(1)?[0];
        let level2_w = read_vec(3 * d)?;
        let b = read_vec(3)?;
        Ok(StanceModel {
            config,
            seed,
            level1_w,
            level1_b,
            level2_w,
            level2_b: [b[0], b[1], b[2]],
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StanceError> {
        StanceModel::read(bytes)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), StanceError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, StanceError> {
        StanceModel::from_bytes(&std::fs::read(path)?)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn softmax(z: [f64; 3]) -> [f64; 3] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

fn level2_logits(w: &[f64], b: &[f64; 3], x: &FeatureVector) -> [f64; 3] {
    let d = x.dim;
    [0, 1, 2].map(|k| x.dot(&w[k * d..(k + 1) * d]) + b[k])
}

/// Loss and gradient of the mean binary cross-entropy plus
/// `l2 / 2 * |w|^2` over a batch.
pub fn level1_loss_grad(
    w: &[f64],
    b: f64,
    batch: &[(&FeatureVector, f64)],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = batch.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|wi| l2 * wi).collect();
    let mut gb = 0.0;
    let mut loss = 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (x, y) in batch {
        let z = x.dot(w) + b;
        // log(1 + e^z) - y z, computed stably
        let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        loss += (softplus - y * z) / n;
        let err = (sigmoid(z) - y) / n;
        for (i, v) in x.iter() {
            gw[i] += err * v;
        }
        gb += err;
    }
    (loss, gw, gb)
}

/// Loss and gradient of the mean softmax cross-entropy plus
/// `l2 / 2 * |W|^2` over a batch of (features, class index) pairs.
pub fn level2_loss_grad(
    w: &[f64],
    b: &[f64; 3],
    batch: &[(&FeatureVector, usize)],
    l2: f64,
) -> (f64, Vec<f64>, [f64; 3]) {
    let n = batch.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|wi| l2 * wi).collect();
    let mut gb = [0.0; 3];
    let mut loss = 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (x, y) in batch {
        let d = x.dim;
        let z = level2_logits(w, b, x);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += (lse - z[*y]) / n;
        let p = softmax(z);
        for k in 0..3 {
            let err = (p[k] - if k == *y { 1.0 } else { 0.0 }) / n;
            for (i, v) in x.iter() {
                gw[k * d + i] += err * v;
            }
            gb[k] += err;
        }
    }
    (loss, gw, gb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 60,
            l2: 1e-4,
            batch_size: Some(16),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub claim: String,
    pub document: String,
    pub stance: StanceLabel,
}

#[derive(Debug)]
pub struct TrainReport {
    pub model: StanceModel,
    /// Full-dataset losses measured after each epoch.
    pub level1_losses: Vec<f64>,
    pub level2_losses: Vec<f64>,
    /// Set when no related examples were available; level 2 stays uniform.
    pub warning: Option<StanceError>,
}

pub fn train(
    dataset: &[TrainingExample],
    config: FeatureConfig,
    hyper: &TrainConfig,
) -> Result<TrainReport, StanceError> {
    if dataset.is_empty() {
        return Err(StanceError::EmptyDataset);
    }
    let featurizer = Featurizer::new(config);
    let features: Vec<FeatureVector> = dataset
        .iter()
        .map(|ex| featurizer.featurize(&ex.claim, &ex.document))
        .collect::<Result<_, _>>()?;
    let level1: Vec<(&FeatureVector, f64)> = features
        .iter()
        .zip(dataset)
        .map(|(x, ex)| (x, if ex.stance.is_related() { 1.0 } else { 0.0 }))
        .collect();
    let level2: Vec<(&FeatureVector, usize)> = features
        .iter()
        .zip(dataset)
        .filter_map(|(x, ex)| ex.stance.level2_index().map(|k| (x, k)))
        .collect();

    let mut model = StanceModel::zeros(config);
    model.seed = hyper.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut level1_losses = Vec::with_capacity(hyper.epochs);
    let mut level2_losses = Vec::with_capacity(hyper.epochs);
    let warning = if level2.is_empty() {
        log::warn!("no related examples; level 2 left uniform");
        Some(StanceError::Level2Untrainable)
    } else {
        None
    };

    let mut order1: Vec<usize> = (0..level1.len()).collect();
    let mut order2: Vec<usize> = (0..level2.len()).collect();
    for _ in 0..hyper.epochs {
        for batch in batches(&mut order1, hyper.batch_size, &mut rng) {
            let items: Vec<_> = batch.iter().map(|&i| level1[i]).collect();
            let (_, gw, gb) = level1_loss_grad(&model.level1_w, model.level1_b, &items, hyper.l2);
            step(&mut model.level1_w, &gw, hyper.learning_rate);
            model.level1_b -= hyper.learning_rate * gb;
        }
        level1_losses.push(level1_loss_grad(&model.level1_w, model.level1_b, &level1, hyper.l2).0);
        if level2.is_empty() {
            continue;
        }
        for batch in batches(&mut order2, hyper.batch_size, &mut rng) {
            let items: Vec<_> = batch.iter().map(|&i| level2[i]).collect();
            let (_, gw, gb) = level2_loss_grad(&model.level2_w, &model.level2_b, &items, hyper.l2);
            step(&mut model.level2_w, &gw, hyper.learning_rate);
            for (b, g) in model.level2_b.iter_mut().zip(&gb) {
                *b -= hyper.learning_rate * g;
            }
        }
        level2_losses.push(level2_loss_grad(&model.level2_w, &model.level2_b, &level2, hyper.l2).0);
    }
    Ok(TrainReport {
        model,
        level1_losses,
        level2_losses,
        warning,
    })
}

fn step(w: &mut [f64], g: &[f64], lr: f64) {
    for (wi, gi) in w.iter_mut().zip(g) {
        *wi -= lr * gi;
    }
}

/// Index batches for one epoch; full-batch keeps dataset order.
fn batches(order: &mut [usize], batch_size: Option<usize>, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    match batch_size {
        Some(bs) if bs > 0 && bs < order.len() => {
            order.shuffle(rng);
            order.chunks(bs).map(<[usize]>::to_vec).collect()
        }
        _ => vec![order.to_vec()],
    }
}
