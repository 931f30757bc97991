use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sl_core::{opinion_from_evidence, Evidence, Opinion};

use crate::error::TrainError;
use crate::special::capped_exp;

/// Parameters of one per-view classifier: a 2-layer fully connected network
/// with a rectifier hidden layer and a capped-exponential output, so its
/// outputs live in (0, 1e13] and serve directly as Dirichlet evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewNet {
    in_dim: usize,
    hidden: usize,
    out: usize,
    /// hidden × in_dim, row-major
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    /// out × hidden, row-major
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

impl ViewNet {
    fn init(in_dim: usize, hidden: usize, out: usize, rng: &mut impl Rng) -> ViewNet {
        // Uniform ±sqrt(6/(fan_in+fan_out)) per layer; biases start at zero.
        let lim1 = (6.0 / (in_dim + hidden) as f64).sqrt();
        let d1 = Uniform::new_inclusive(-lim1, lim1);
        let w1 = (0..hidden * in_dim).map(|_| d1.sample(rng)).collect();
        let lim2 = (6.0 / (hidden + out) as f64).sqrt();
        let d2 = Uniform::new_inclusive(-lim2, lim2);
        let w2 = (0..out * hidden).map(|_| d2.sample(rng)).collect();
        ViewNet {
            in_dim,
            hidden,
            out,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; out],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    fn evidence(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.in_dim, "input width mismatch");
        let pre = |row: &[f64], input: &[f64], bias: f64| {
            bias + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>()
        };
        let h: Vec<f64> = self
            .w1
            .chunks(self.in_dim)
            .zip(&self.b1)
            .map(|(row, &b)| {
                let acc = pre(row, x, b);
                // NaN stays NaN so bad inputs surface as a non-finite loss.
                if acc > 0.0 || acc.is_nan() {
                    acc
                } else {
                    0.0
                }
            })
            .collect();
        self.w2
            .chunks(self.hidden)
            .zip(&self.b2)
            .map(|(row, &b)| capped_exp(pre(row, &h, b)))
            .collect()
    }

    fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }
}

/// One [`ViewNet`] per modality, sharing the class count.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidentialNetwork {
    views: Vec<ViewNet>,
    n_classes: usize,
}

impl EvidentialNetwork {
    /// Fresh network with seeded uniform initialization. Weights are drawn
    /// view by view (w1 then w2), so a given RNG state fixes the network.
    pub fn init(
        in_dims: &[usize],
        n_classes: usize,
        hidden: usize,
        rng: &mut impl Rng,
    ) -> EvidentialNetwork {
        assert!(!in_dims.is_empty(), "need at least one view");
        assert!(n_classes >= 2, "need at least two classes");
        assert!(hidden >= 1, "hidden width must be positive");
        let views = in_dims
            .iter()
            .map(|&d| ViewNet::init(d, hidden, n_classes, rng))
            .collect();
        EvidentialNetwork { views, n_classes }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    pub fn in_dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.in_dim).collect()
    }

    pub fn view(&self, v: usize) -> &ViewNet {
        &self.views[v]
    }

    /// Evidence vector produced by one view for one input row.
    pub fn evidence(&self, view: usize, x: &[f64]) -> Vec<f64> {
        self.views[view].evidence(x)
    }

    /// Per-view opinions for one sample (uniform base rates).
    pub fn opinions(&self, features: &[&[f64]]) -> Result<Vec<Opinion>, TrainError> {
        if features.len() != self.views.len() {
            return Err(TrainError::ViewCountMismatch {
                batch: features.len(),
                network: self.views.len(),
            });
        }
        let mut out = Vec::with_capacity(features.len());
        for (v, (net, x)) in self.views.iter().zip(features).enumerate() {
            if x.len() != net.in_dim {
                return Err(TrainError::InputDimMismatch {
                    view: v,
                    batch: x.len(),
                    network: net.in_dim,
                });
            }
            let ev = Evidence::try_new(net.evidence(x)).map_err(fusion_ops::FusionError::from)?;
            out.push(opinion_from_evidence(&ev, None).map_err(fusion_ops::FusionError::from)?);
        }
        Ok(out)
    }

    pub fn num_params(&self) -> usize {
        self.views.iter().map(|v| v.num_params()).sum()
    }

    /// All parameters as one flat vector: per view, w1 then b1 then w2 then
    /// b2. This order is shared by the gradient returned from the loss.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for v in &self.views {
            out.extend_from_slice(&v.w1);
            out.extend_from_slice(&v.b1);
            out.extend_from_slice(&v.w2);
            out.extend_from_slice(&v.b2);
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<(), TrainError> {
        if flat.len() != self.num_params() {
            return Err(TrainError::LengthMismatch {
                what: "flat parameter vector",
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut pos = 0;
        for v in &mut self.views {
            for dst in [&mut v.w1, &mut v.b1, &mut v.w2, &mut v.b2] {
                let len = dst.len();
                dst.copy_from_slice(&flat[pos..pos + len]);
                pos += len;
            }
        }
        Ok(())
    }

    /// Write the parameters as a JSON tensor dump with shape headers.
    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        let dump = NetworkDump {
            n_classes: self.n_classes,
            views: self
                .views
                .iter()
                .map(|v| ViewDump {
                    in_dim: v.in_dim,
                    hidden: v.hidden,
                    w1: TensorDump {
                        shape: vec![v.hidden, v.in_dim],
                        data: v.w1.clone(),
                    },
                    b1: TensorDump {
                        shape: vec![v.hidden],
                        data: v.b1.clone(),
                    },
                    w2: TensorDump {
                        shape: vec![self.n_classes, v.hidden],
                        data: v.w2.clone(),
                    },
                    b2: TensorDump {
                        shape: vec![self.n_classes],
                        data: v.b2.clone(),
                    },
                })
                .collect(),
        };
        let file = File::create(path)?;
        serde_json::to_writer(BufWriter::new(file), &dump)
            .map_err(|e| TrainError::ModelFormat(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<EvidentialNetwork, TrainError> {
        let file = File::open(path)?;
        let dump: NetworkDump = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| TrainError::ModelFormat(e.to_string()))?;
        let mut views = Vec::with_capacity(dump.views.len());
        for (i, v) in dump.views.into_iter().enumerate() {
            let w1 = v.w1.into_checked(&[v.hidden, v.in_dim], i, "w1")?;
            let b1 = v.b1.into_checked(&[v.hidden], i, "b1")?;
            let w2 = v.w2.into_checked(&[dump.n_classes, v.hidden], i, "w2")?;
            let b2 = v.b2.into_checked(&[dump.n_classes], i, "b2")?;
            views.push(ViewNet {
                in_dim: v.in_dim,
                hidden: v.hidden,
                out: dump.n_classes,
                w1,
                b1,
                w2,
                b2,
            });
        }
        if views.is_empty() {
            return Err(TrainError::ModelFormat("file contains no views".into()));
        }
        Ok(EvidentialNetwork {
            views,
            n_classes: dump.n_classes,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TensorDump {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TensorDump {
    fn into_checked(
        self,
        expect: &[usize],
        view: usize,
        name: &str,
    ) -> Result<Vec<f64>, TrainError> {
        if self.shape != expect {
            return Err(TrainError::ModelFormat(format!(
                "view {view} tensor {name}: shape {:?} does not match header {:?}",
                self.shape, expect
            )));
        }
        let len: usize = self.shape.iter().product();
        if self.data.len() != len {
            return Err(TrainError::ModelFormat(format!(
                "view {view} tensor {name}: {} values for shape {:?}",
                self.data.len(),
                self.shape
            )));
        }
        Ok(self.data)
    }
}

#[derive(Serialize, Deserialize)]
struct ViewDump {
    in_dim: usize,
    hidden: usize,
    w1: TensorDump,
    b1: TensorDump,
    w2: TensorDump,
    b2: TensorDump,
}

#[derive(Serialize, Deserialize)]
struct NetworkDump {
    n_classes: usize,
    views: Vec<ViewDump>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::EVIDENCE_CAP;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample_net(seed: u64) -> EvidentialNetwork {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        EvidentialNetwork::init(&[3, 5], 4, 8, &mut rng)
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        assert_eq!(sample_net(7), sample_net(7));
        assert_ne!(sample_net(7), sample_net(8));
    }

    #[test]
    fn evidence_respects_the_activation_cap() {
        let net = sample_net(1);
        let e = net.evidence(0, &[100.0, -50.0, 3.0]);
        assert_eq!(e.len(), 4);
        for v in e {
            assert!(v > 0.0 && v <= EVIDENCE_CAP);
        }
    }

    #[test]
    fn opinions_match_manual_evidence_mapping() {
        let net = sample_net(3);
        let x0 = [0.3, -0.7, 1.1];
        let x1 = [0.0, 0.5, -0.2, 0.9, 2.0];
        let ops = net.opinions(&[&x0, &x1]).unwrap();
        let e = net.evidence(0, &x0);
        let s: f64 = e.iter().map(|v| v + 1.0).sum();
        assert!((ops[0].uncertainty() - 4.0 / s).abs() < 1e-15);
        assert!((ops[0].beliefs()[2] - e[2] / s).abs() < 1e-15);
    }

    #[test]
    fn opinion_dim_errors() {
        let net = sample_net(3);
        let x0 = [0.3, -0.7, 1.1];
        assert!(matches!(
            net.opinions(&[&x0]),
            Err(TrainError::ViewCountMismatch { .. })
        ));
        assert!(matches!(
            net.opinions(&[&x0, &x0]),
            Err(TrainError::InputDimMismatch { view: 1, .. })
        ));
    }

    #[test]
    fn flat_parameter_round_trip() {
        let mut net = sample_net(5);
        let flat = net.params_flat();
        assert_eq!(flat.len(), net.num_params());
        let mut shifted = flat.clone();
        for p in &mut shifted {
            *p += 0.25;
        }
        net.set_params_flat(&shifted).unwrap();
        assert_eq!(net.params_flat(), shifted);
        assert!(net.set_params_flat(&flat[1..]).is_err());
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let net = sample_net(11);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        net.save(&path).unwrap();
        let loaded = EvidentialNetwork::load(&path).unwrap();
        assert_eq!(net, loaded);
    }

    #[test]
    fn load_rejects_mismatched_shapes() {
        let net = sample_net(11);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        net.save(&path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replacen("\"in_dim\":3", "\"in_dim\":4", 1);
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            EvidentialNetwork::load(&path),
            Err(TrainError::ModelFormat(_))
        ));
        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(
            EvidentialNetwork::load(&path),
            Err(TrainError::ModelFormat(_))
        ));
    }
}
