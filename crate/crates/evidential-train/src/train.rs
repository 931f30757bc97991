use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::config::TrainConfig;
use crate::data::MultimodalBatch;
use crate::error::TrainError;
use crate::loss::{annealing_coef, loss_trace, LossBreakdown, LossSettings};
use crate::network::EvidentialNetwork;

/// A trained network with its per-epoch loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: EvidentialNetwork,
    pub history: Vec<LossBreakdown>,
}

/// Train per-view evidential networks with plain gradient descent and
/// decoupled weight decay: w ← w·(1 − lr·wd) − lr·∇.
///
/// Fully deterministic for a given config: the seed fixes initialization
/// and the per-epoch shuffles, and minibatches are visited in order. Aborts
/// with a diagnostic as soon as a batch loss stops being finite.
pub fn train(batch: &MultimodalBatch, config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut net = EvidentialNetwork::init(
        &batch.feature_dims(),
        batch.n_classes(),
        config.hidden,
        &mut rng,
    );
    let n = batch.len();
    let views = batch.num_views();
    let mut params = net.params_flat();
    let mut history = Vec::with_capacity(config.epochs);
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        let settings = LossSettings {
            method: config.fusion,
            lambda: config.lambda,
            beta: config.beta,
            gamma: config.gamma,
            sigma_t: annealing_coef(epoch, config.annealing_epochs),
            detach_fusion: config.detach_fusion,
        };
        indices.shuffle(&mut rng);

        let mut sums = EpochSums::new(views);
        for (batch_no, chunk) in indices.chunks(config.batch_size).enumerate() {
            net.set_params_flat(&params)?;
            let trace = loss_trace(&batch.subset(chunk), &net, &settings)?;
            if !trace.breakdown.total.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                    value: trace.breakdown.total,
                });
            }
            let decay = 1.0 - config.learning_rate * config.weight_decay;
            for (p, g) in params.iter_mut().zip(&trace.gradient) {
                *p = *p * decay - config.learning_rate * g;
            }
            sums.add(&trace.breakdown, chunk.len());
        }
        history.push(sums.mean(settings.sigma_t));
    }
    net.set_params_flat(&params)?;
    Ok(TrainOutcome { network: net, history })
}

/// Sample-weighted accumulator for per-batch breakdowns.
struct EpochSums {
    n: usize,
    ace_fused: f64,
    kl_fused: f64,
    ace_views: Vec<f64>,
    kl_views: Vec<f64>,
    consistency: f64,
    total: f64,
}

impl EpochSums {
    fn new(views: usize) -> EpochSums {
        EpochSums {
            n: 0,
            ace_fused: 0.0,
            kl_fused: 0.0,
            ace_views: vec![0.0; views],
            kl_views: vec![0.0; views],
            consistency: 0.0,
            total: 0.0,
        }
    }

    fn add(&mut self, b: &LossBreakdown, samples: usize) {
        let w = samples as f64;
        self.n += samples;
        self.ace_fused += w * b.ace_fused;
        self.kl_fused += w * b.kl_fused;
        for (acc, v) in self.ace_views.iter_mut().zip(&b.ace_views) {
            *acc += w * v;
        }
        for (acc, v) in self.kl_views.iter_mut().zip(&b.kl_views) {
            *acc += w * v;
        }
        self.consistency += w * b.consistency;
        self.total += w * b.total;
    }

    fn mean(self, sigma_t: f64) -> LossBreakdown {
        let n = self.n as f64;
        LossBreakdown {
            ace_fused: self.ace_fused / n,
            kl_fused: self.kl_fused / n,
            ace_views: self.ace_views.iter().map(|v| v / n).collect(),
            kl_views: self.kl_views.iter().map(|v| v / n).collect(),
            consistency: self.consistency / n,
            sigma_t,
            total: self.total / n,
        }
    }
}

/// Write a loss history as CSV: one row per epoch, one column per
/// breakdown field (per-view terms expand to `ace_view_<i>`/`kl_view_<i>`).
pub fn write_loss_history(path: &Path, history: &[LossBreakdown]) -> Result<(), TrainError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let views = history.first().map(|b| b.ace_views.len()).unwrap_or(0);
    let mut header = String::from("epoch,ace_fused,kl_fused,consistency,sigma_t,total");
    for v in 0..views {
        header.push_str(&format!(",ace_view_{v},kl_view_{v}"));
    }
    writeln!(out, "{header}")?;
    for (epoch, b) in history.iter().enumerate() {
        let mut row = format!(
            "{epoch},{},{},{},{},{}",
            b.ace_fused, b.kl_fused, b.consistency, b.sigma_t, b.total
        );
        for v in 0..views {
            row.push_str(&format!(",{},{}", b.ace_views[v], b.kl_views[v]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}
