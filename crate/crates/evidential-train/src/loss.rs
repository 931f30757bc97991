//! The evidential losses, both as plain functions on Dirichlet parameters
//! and as a recorded tape computation whose gradient reaches the per-view
//! network parameters through the fusion operator.

use fusion_ops::{degree_of_conflict, FusionMethod};
use serde::Serialize;
use sl_core::{Real, SubjectiveOpinion};

use crate::data::MultimodalBatch;
use crate::error::TrainError;
use crate::network::EvidentialNetwork;
use crate::special::{digamma, lgamma};
use crate::tape::{Tape, Var};

/// Adapted cross-entropy: Σ_j y_j (ψ(S) − ψ(α_j)) with S = Σ α_j.
///
/// The expected cross-entropy of the label under a Dirichlet with
/// parameters `alpha`; decreases as evidence concentrates on the true class.
pub fn loss_ace<T: Real>(alpha: &[T], y: &[T]) -> Result<T, TrainError> {
    check_alpha(alpha)?;
    check_one_hot(y, alpha.len())?;
    let s = alpha.iter().copied().sum::<T>();
    let ds = digamma(s);
    let mut out = T::zero();
    for (&a, &yj) in alpha.iter().zip(y) {
        if yj > T::zero() {
            out += yj * (ds - digamma(a));
        }
    }
    Ok(out)
}

/// KL divergence from Dir(α̃) to the uniform Dirichlet, where
/// α̃ = y + (1−y)⊙α keeps only the misleading evidence.
///
/// Closed form: ln Γ(S̃) − ln Γ(K) − Σ ln Γ(α̃_j) + Σ (α̃_j−1)(ψ(α̃_j) − ψ(S̃)).
pub fn loss_kl<T: Real>(alpha: &[T], y: &[T]) -> Result<T, TrainError> {
    check_alpha(alpha)?;
    check_one_hot(y, alpha.len())?;
    let k = alpha.len();
    let tilde: Vec<T> = alpha
        .iter()
        .zip(y)
        .map(|(&a, &yj)| yj + (T::one() - yj) * a)
        .collect();
    let st = tilde.iter().copied().sum::<T>();
    let mut out = lgamma(st) - lgamma(T::count(k));
    for &t in &tilde {
        out -= lgamma(t);
    }
    let dst = digamma(st);
    for &t in &tilde {
        out += (t - T::one()) * (digamma(t) - dst);
    }
    Ok(out)
}

/// KL annealing coefficient min(1, t/T).
pub fn annealing_coef(epoch: usize, annealing_epochs: usize) -> f64 {
    if annealing_epochs == 0 {
        return 1.0;
    }
    (epoch as f64 / annealing_epochs as f64).min(1.0)
}

/// Mean pairwise degree of conflict over ordered view pairs:
/// (1/(V−1)) Σ_p Σ_{q≠p} DC(ω_p, ω_q). Zero for a single view.
pub fn loss_consistency<T: Real>(opinions: &[SubjectiveOpinion<T>]) -> Result<T, TrainError> {
    let v = opinions.len();
    if v <= 1 {
        return Ok(T::zero());
    }
    let mut total = T::zero();
    for i in 0..v {
        for j in i + 1..v {
            total += degree_of_conflict(&opinions[i], &opinions[j])?.dc;
        }
    }
    // Each unordered pair appears twice in the ordered double sum.
    Ok(total * (T::one() + T::one()) / T::count(v - 1))
}

fn check_alpha<T: Real>(alpha: &[T]) -> Result<(), TrainError> {
    if alpha.is_empty() {
        return Err(TrainError::LengthMismatch {
            what: "alpha",
            expected: 1,
            got: 0,
        });
    }
    for (i, &a) in alpha.iter().enumerate() {
        if a.is_nan() || a < T::one() {
            return Err(TrainError::AlphaBelowOne {
                index: i,
                value: a.as_f64(),
            });
        }
    }
    Ok(())
}

fn check_one_hot<T: Real>(y: &[T], k: usize) -> Result<(), TrainError> {
    if y.len() != k {
        return Err(TrainError::LengthMismatch {
            what: "one-hot label",
            expected: k,
            got: y.len(),
        });
    }
    let mut ones = 0usize;
    for &v in y {
        if v == T::one() {
            ones += 1;
        } else if v != T::zero() {
            return Err(TrainError::MalformedLabel {
                reason: format!("entry {} is neither 0 nor 1", v.as_f64()),
            });
        }
    }
    if ones != 1 {
        return Err(TrainError::MalformedLabel {
            reason: format!("{ones} entries set, expected exactly 1"),
        });
    }
    Ok(())
}

/// Weights and switches for one evaluation of the total loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSettings {
    pub method: FusionMethod,
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma_t: f64,
    pub detach_fusion: bool,
}

impl LossSettings {
    fn validate(&self) -> Result<(), TrainError> {
        let bad = |name: &str, v: f64| TrainError::Config(format!("{name} = {v} is invalid"));
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(bad("beta", self.beta));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(bad("gamma", self.gamma));
        }
        if !self.sigma_t.is_finite() || !(0.0..=1.0).contains(&self.sigma_t) {
            return Err(bad("sigma_t", self.sigma_t));
        }
        if self.method == FusionMethod::Dbf && (!self.lambda.is_finite() || self.lambda <= 0.0) {
            return Err(bad("lambda", self.lambda));
        }
        Ok(())
    }
}

/// Batch-averaged values of every term in the training objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub ace_fused: f64,
    pub kl_fused: f64,
    pub ace_views: Vec<f64>,
    pub kl_views: Vec<f64>,
    pub consistency: f64,
    pub sigma_t: f64,
    /// L_acc(fused) + β·Σ_v L_acc(view v) + γ·L_con with
    /// L_acc = L_ace + σ_t·L_KL, averaged over the batch.
    pub total: f64,
}

/// A loss evaluation together with its gradient (aligned with
/// [`EvidentialNetwork::params_flat`]) and the branch bits of every
/// nonsmooth primitive encountered during the forward pass.
pub struct LossTrace {
    pub breakdown: LossBreakdown,
    pub gradient: Vec<f64>,
    pub kinks: Vec<bool>,
}

/// Batch-averaged loss values without gradients.
pub fn total_loss(
    batch: &MultimodalBatch,
    net: &EvidentialNetwork,
    settings: &LossSettings,
) -> Result<LossBreakdown, TrainError> {
    loss_trace(batch, net, settings).map(|t| t.breakdown)
}

struct ViewLeaves {
    w1: Var<f64>,
    b1: Var<f64>,
    w2: Var<f64>,
    b2: Var<f64>,
    in_dim: usize,
    hidden: usize,
    out: usize,
}

/// An opinion's tape-level parts under uniform base rates.
struct OpinionVars {
    b: Var<f64>,
    u: Var<f64>,
    p: Var<f64>,
}

fn opinion_vars(evidence: &Var<f64>, k: usize) -> OpinionVars {
    let alpha = evidence.add_const(1.0);
    let s = alpha.sum();
    let b = evidence / &s;
    let u = s.powc(-1.0).mul_const(k as f64);
    let p = &b + &u.mul_const(1.0 / k as f64);
    OpinionVars { b, u, p }
}

fn conflict_var(a: &OpinionVars, b: &OpinionVars) -> Var<f64> {
    let pd = (&a.p - &b.p).abs().sum().mul_const(0.5);
    let cc = (-&a.u).add_const(1.0) * (-&b.u).add_const(1.0);
    &pd * &cc
}

fn ace_var(alpha: &Var<f64>, y: &[f64]) -> Var<f64> {
    let s = alpha.sum();
    &s.digamma() - &alpha.digamma().dot_const(y)
}

fn kl_var(tape: &Tape<f64>, alpha: &Var<f64>, y: &[f64]) -> Var<f64> {
    let k = y.len();
    let keep: Vec<f64> = y.iter().map(|&v| 1.0 - v).collect();
    let tilde = &(alpha * &tape.leaf(keep)) + &tape.leaf(y.to_vec());
    let st = tilde.sum();
    let head = st.lgamma().add_const(-lgamma(k as f64)) - tilde.lgamma().sum();
    let tail = (&tilde.add_const(-1.0) * &(&tilde.digamma() - &st.digamma())).sum();
    &head + &tail
}

fn bcf_pair(b1: &Var<f64>, u1: &Var<f64>, b2: &Var<f64>, u2: &Var<f64>) -> (Var<f64>, Var<f64>) {
    let s2 = b2.sum();
    let con = (&(&s2 - b2) * b1).sum();
    let den = (-&con).add_const(1.0);
    let num = &(&(b1 * b2) + &(b1 * u2)) + &(b2 * u1);
    (&num / &den, &(u1 * u2) / &den)
}

/// Fused Dirichlet parameters for one sample, built on the tape.
fn fused_alpha_var(evidences: &[Var<f64>], k: usize, method: FusionMethod, lambda: f64) -> Var<f64> {
    let v = evidences.len();
    match method {
        FusionMethod::Gbaf => {
            let mut acc = evidences[0].clone();
            for e in &evidences[1..] {
                acc = &acc + e;
            }
            acc.mul_const(1.0 / v as f64).add_const(1.0)
        }
        FusionMethod::Cbf => {
            let mut acc = evidences[0].clone();
            for e in &evidences[1..] {
                acc = &acc + e;
            }
            acc.add_const(1.0)
        }
        FusionMethod::Baf => {
            let mut acc = evidences[0].clone();
            for e in &evidences[1..] {
                acc = (&acc + e).mul_const(0.5);
            }
            acc.add_const(1.0)
        }
        FusionMethod::Bcf => {
            let parts: Vec<OpinionVars> = evidences.iter().map(|e| opinion_vars(e, k)).collect();
            let (mut b, mut u) = (parts[0].b.clone(), parts[0].u.clone());
            for p in &parts[1..] {
                (b, u) = bcf_pair(&b, &u, &p.b, &p.u);
            }
            // α = e + 1 with e = K·b/u.
            (&b.mul_const(k as f64) / &u).add_const(1.0)
        }
        FusionMethod::Dbf => {
            if v == 1 {
                return evidences[0].add_const(1.0);
            }
            let parts: Vec<OpinionVars> = evidences.iter().map(|e| opinion_vars(e, k)).collect();
            let mut agreement: Vec<Vec<Option<Var<f64>>>> = (0..v)
                .map(|_| (0..v).map(|_| None).collect())
                .collect();
            for i in 0..v {
                for j in i + 1..v {
                    let dc = conflict_var(&parts[i], &parts[j]);
                    let a = (-&dc.powc(lambda)).add_const(1.0).powc(1.0 / lambda);
                    agreement[i][j] = Some(a.clone());
                    agreement[j][i] = Some(a);
                }
            }
            let mut acc: Option<Var<f64>> = None;
            for i in 0..v {
                let mut eta: Option<Var<f64>> = None;
                for (j, slot) in agreement[i].iter().enumerate() {
                    if i == j {
                        continue; // diagonal agreement is the constant 1
                    }
                    let a = slot.as_ref().unwrap();
                    eta = Some(match eta {
                        None => a.clone(),
                        Some(e) => &e * a,
                    });
                }
                let eta = eta.unwrap();
                // u' = 1 − η(1−u); e' = K·η·b/u'.
                let u_prime = (-&(&eta * &(-&parts[i].u).add_const(1.0))).add_const(1.0);
                let e_prime = &(&parts[i].b * &eta).mul_const(k as f64) / &u_prime;
                acc = Some(match acc {
                    None => e_prime,
                    Some(a) => &a + &e_prime,
                });
            }
            acc.unwrap().mul_const(1.0 / v as f64).add_const(1.0)
        }
    }
}

fn check_dims(batch: &MultimodalBatch, net: &EvidentialNetwork) -> Result<(), TrainError> {
    if batch.num_views() != net.num_views() {
        return Err(TrainError::ViewCountMismatch {
            batch: batch.num_views(),
            network: net.num_views(),
        });
    }
    for (v, (&bd, nd)) in batch
        .feature_dims()
        .iter()
        .zip(net.in_dims())
        .enumerate()
    {
        if bd != nd {
            return Err(TrainError::InputDimMismatch {
                view: v,
                batch: bd,
                network: nd,
            });
        }
    }
    if batch.n_classes() != net.n_classes() {
        return Err(TrainError::ClassCountMismatch {
            batch: batch.n_classes(),
            network: net.n_classes(),
        });
    }
    Ok(())
}

/// Evaluate the total loss over a batch, recording the computation and
/// running one backward pass.
pub fn loss_trace(
    batch: &MultimodalBatch,
    net: &EvidentialNetwork,
    settings: &LossSettings,
) -> Result<LossTrace, TrainError> {
    check_dims(batch, net)?;
    settings.validate()?;

    let n = batch.len();
    let v = batch.num_views();
    let k = batch.n_classes();
    let tape: Tape<f64> = Tape::new();

    // Parameter leaves in params_flat order.
    let leaves: Vec<ViewLeaves> = (0..v)
        .map(|i| {
            let view = net.view(i);
            ViewLeaves {
                w1: tape.leaf(view.w1.clone()),
                b1: tape.leaf(view.b1.clone()),
                w2: tape.leaf(view.w2.clone()),
                b2: tape.leaf(view.b2.clone()),
                in_dim: view.in_dim(),
                hidden: view.hidden(),
                out: k,
            }
        })
        .collect();

    let mut sum_ace_fused = 0.0;
    let mut sum_kl_fused = 0.0;
    let mut sum_con = 0.0;
    let mut sum_ace_views = vec![0.0; v];
    let mut sum_kl_views = vec![0.0; v];
    let mut total_acc: Option<Var<f64>> = None;

    for s in 0..n {
        let y = batch.one_hot(s);

        let evidences: Vec<Var<f64>> = (0..v)
            .map(|i| {
                let lv = &leaves[i];
                let x = tape.leaf(batch.view(i)[s].clone());
                let z1 = &lv.w1.matvec(&x, lv.hidden, lv.in_dim) + &lv.b1;
                let z2 = &lv.w2.matvec(&z1.relu(), lv.out, lv.hidden) + &lv.b2;
                z2.capped_exp()
            })
            .collect();

        let mut sample = None;
        for (i, e) in evidences.iter().enumerate() {
            let alpha = e.add_const(1.0);
            let ace = ace_var(&alpha, &y);
            let kl = kl_var(&tape, &alpha, &y);
            sum_ace_views[i] += ace.scalar_value();
            sum_kl_views[i] += kl.scalar_value();
            let acc = &ace + &kl.mul_const(settings.sigma_t);
            sample = Some(match sample {
                None => acc,
                Some(t) => &t + &acc,
            });
        }
        let mut sample = sample.unwrap().mul_const(settings.beta);

        let fusion_inputs: Vec<Var<f64>> = if settings.detach_fusion {
            evidences.iter().map(|e| tape.leaf(e.value())).collect()
        } else {
            evidences.clone()
        };
        let alpha_f = fused_alpha_var(&fusion_inputs, k, settings.method, settings.lambda);
        let ace_f = ace_var(&alpha_f, &y);
        let kl_f = kl_var(&tape, &alpha_f, &y);
        sum_ace_fused += ace_f.scalar_value();
        sum_kl_fused += kl_f.scalar_value();
        sample = &sample + &(&ace_f + &kl_f.mul_const(settings.sigma_t));

        if v >= 2 {
            let parts: Vec<OpinionVars> = evidences.iter().map(|e| opinion_vars(e, k)).collect();
            let mut con: Option<Var<f64>> = None;
            for i in 0..v {
                for j in i + 1..v {
                    let dc = conflict_var(&parts[i], &parts[j]);
                    con = Some(match con {
                        None => dc,
                        Some(c) => &c + &dc,
                    });
                }
            }
            let con = con.unwrap().mul_const(2.0 / (v - 1) as f64);
            sum_con += con.scalar_value();
            sample = &sample + &con.mul_const(settings.gamma);
        }

        total_acc = Some(match total_acc {
            None => sample,
            Some(t) => &t + &sample,
        });
    }

    let total_var = total_acc.expect("batch is non-empty").mul_const(1.0 / n as f64);
    let grads = total_var.backward();
    let mut gradient = Vec::with_capacity(net.num_params());
    for lv in &leaves {
        gradient.extend(grads.wrt(&lv.w1));
        gradient.extend(grads.wrt(&lv.b1));
        gradient.extend(grads.wrt(&lv.w2));
        gradient.extend(grads.wrt(&lv.b2));
    }

    let nf = n as f64;
    let breakdown = LossBreakdown {
        ace_fused: sum_ace_fused / nf,
        kl_fused: sum_kl_fused / nf,
        ace_views: sum_ace_views.iter().map(|s| s / nf).collect(),
        kl_views: sum_kl_views.iter().map(|s| s / nf).collect(),
        consistency: sum_con / nf,
        sigma_t: settings.sigma_t,
        total: total_var.scalar_value(),
    };
    Ok(LossTrace {
        breakdown,
        gradient,
        kinks: tape.kink_signature(),
    })
}
