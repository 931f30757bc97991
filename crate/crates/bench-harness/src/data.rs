//! Synthetic multimodal class-conditional Gaussian data and conflict
//! injection.

use crate::error::HarnessError;
use evidential_train::MultimodalBatch;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Recipe for a synthetic multimodal classification problem: per modality,
/// one Gaussian cluster per class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub views: usize,
    /// Feature width per modality; must have `views` entries.
    pub dims: Vec<usize>,
    /// Minimum pairwise distance between class centers (per modality).
    pub separation: f64,
    /// Standard deviation of the isotropic noise around each center.
    pub noise: f64,
    /// Total sample count across all classes.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            classes: 4,
            views: 3,
            dims: vec![8, 8, 8],
            separation: 6.0,
            noise: 1.0,
            samples: 2000,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// Parse a `key = value` spec file (keys: classes, views, dims,
    /// separation, noise, samples, seed; `#` starts a comment). A single
    /// `dims` entry is replicated across all views.
    pub fn from_key_values(text: &str) -> Result<SyntheticSpec, HarnessError> {
        let mut spec = SyntheticSpec::default();
        let mut dims_explicit = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if stripped.trim().is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {line}: expected `key = value`, got `{raw}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad =
                |e: String| HarnessError::Config(format!("line {line}: bad value for {key}: {e}"));
            macro_rules! set {
                ($field:ident) => {
                    spec.$field = value.parse().map_err(|e| bad(format!("{e}")))?
                };
            }
            match key {
                "classes" => set!(classes),
                "views" => set!(views),
                "dims" => {
                    spec.dims = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|e| bad(format!("`{s}`: {e}"))))
                        .collect::<Result<_, _>>()?;
                    dims_explicit = true;
                }
                "separation" => set!(separation),
                "noise" => set!(noise),
                "samples" => set!(samples),
                "seed" => set!(seed),
                other => {
                    return Err(HarnessError::Config(format!(
                        "line {line}: unknown key `{other}` (known keys: classes, views, dims, \
                         separation, noise, samples, seed)"
                    )))
                }
            }
        }
        if spec.dims.len() == 1 && spec.views > 1 {
            spec.dims = vec![spec.dims[0]; spec.views];
        } else if !dims_explicit && spec.dims.len() != spec.views {
            spec.dims = vec![8; spec.views];
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |msg: String| Err(HarnessError::Spec(msg));
        if self.classes < 2 {
            return err(format!("need at least 2 classes, got {}", self.classes));
        }
        if self.views < 1 {
            return err("need at least 1 view".into());
        }
        if self.dims.len() != self.views {
            return err(format!(
                "dims has {} entries for {} views",
                self.dims.len(),
                self.views
            ));
        }
        if self.dims.contains(&0) {
            return err("every view needs at least 1 feature".into());
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return err(format!("separation must be positive, got {}", self.separation));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return err(format!("noise must be non-negative, got {}", self.noise));
        }
        if self.samples < 5 * self.classes {
            return err(format!(
                "need at least {} samples for an 80/20 split over {} classes, got {}",
                5 * self.classes,
                self.classes,
                self.samples
            ));
        }
        Ok(())
    }
}

/// A generated problem: stratified 80/20 train/test split plus the true
/// class centers (handy for nearest-center baselines).
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub train: MultimodalBatch,
    pub test: MultimodalBatch,
    /// `centers[view][class]` is the cluster center in that view.
    pub centers: Vec<Vec<Vec<f64>>>,
}

/// Draw class centers for one view: Gaussian proposals scaled so typical
/// pairwise distances land near the separation floor (two proposals at scale
/// s are ~s·sqrt(2·dim) apart in expectation), redrawn until every pair
/// clears it. Keeping distances close to `separation` is what lets the
/// noise knob move the problem from trivial to genuinely ambiguous.
fn draw_centers(
    rng: &mut ChaCha20Rng,
    classes: usize,
    dim: usize,
    separation: f64,
) -> Result<Vec<Vec<f64>>, HarnessError> {
    let scale = separation / (2.0 * dim as f64).sqrt();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
    for _ in 0..classes {
        let mut attempts = 0;
        loop {
            let cand: Vec<f64> = (0..dim)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let ok = centers.iter().all(|c| {
                let d2: f64 = c.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() >= separation
            });
            if ok {
                centers.push(cand);
                break;
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(HarnessError::Spec(format!(
                    "could not place {classes} centers {separation} apart in {dim} dimensions"
                )));
            }
        }
    }
    Ok(centers)
}

/// Generate a deterministic synthetic dataset: centers first, then samples
/// class by class, then a stratified 80/20 split (the last fifth of each
/// class run becomes test data).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset, HarnessError> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

    let mut centers = Vec::with_capacity(spec.views);
    for &d in &spec.dims {
        centers.push(draw_centers(&mut rng, spec.classes, d, spec.separation)?);
    }

    // Spread the total as evenly as possible: the first `samples % classes`
    // classes get one extra.
    let base = spec.samples / spec.classes;
    let extra = spec.samples % spec.classes;

    let mut train_views: Vec<Vec<Vec<f64>>> = vec![Vec::new(); spec.views];
    let mut test_views: Vec<Vec<Vec<f64>>> = vec![Vec::new(); spec.views];
    let mut train_labels = Vec::new();
    let mut test_labels = Vec::new();

    for class in 0..spec.classes {
        let n_class = base + usize::from(class < extra);
        let n_test = (n_class as f64 * 0.2).round().max(1.0) as usize;
        let n_train = n_class - n_test;
        for i in 0..n_class {
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(spec.views);
            for view_centers in &centers {
                let row: Vec<f64> = view_centers[class]
                    .iter()
                    .map(|&m| m + spec.noise * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                rows.push(row);
            }
            let (views, labels) = if i < n_train {
                (&mut train_views, &mut train_labels)
            } else {
                (&mut test_views, &mut test_labels)
            };
            for (v, row) in rows.into_iter().enumerate() {
                views[v].push(row);
            }
            labels.push(class);
        }
    }

    let train = MultimodalBatch::try_new(train_views, train_labels, spec.classes, None)?;
    let test = MultimodalBatch::try_new(test_views, test_labels, spec.classes, None)?;
    Ok(SyntheticDataset { train, test, centers })
}

/// Fraction of samples whose nearest class center (in one view) matches the
/// label. A pure geometry baseline, independent of any trained model.
pub fn nearest_center_accuracy(
    batch: &MultimodalBatch,
    centers: &[Vec<f64>],
    view: usize,
) -> f64 {
    let rows = batch.view(view);
    let mut hits = 0;
    for (row, &label) in rows.iter().zip(batch.labels()) {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (k, center) in centers.iter().enumerate() {
            let d2: f64 = center.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best_d2 {
                best_d2 = d2;
                best = k;
            }
        }
        if best == label {
            hits += 1;
        }
    }
    hits as f64 / rows.len() as f64
}

/// Replace one uniformly chosen modality of `round(rate·N)` samples with the
/// same modality taken from a donor of a different class, and flag them.
///
/// Selection uses a seeded shuffle prefix, so the flagged count is exact.
/// Donors contribute their original (pre-injection) features and are never
/// flagged by donating; labels are left untouched.
pub fn inject_conflict(
    batch: &MultimodalBatch,
    rate: f64,
    seed: u64,
) -> Result<MultimodalBatch, HarnessError> {
    if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
        return Err(HarnessError::RateOutOfRange(rate));
    }
    let n = batch.len();
    let n_views = batch.num_views();

    // Index samples by class; a donor of a different class must exist, and
    // the selection rule below assumes no class is a singleton.
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); batch.n_classes()];
    for (i, &label) in batch.labels().iter().enumerate() {
        by_class[label].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() == 1 {
            return Err(HarnessError::ClassTooSmall { class });
        }
    }
    if by_class.iter().filter(|m| !m.is_empty()).count() < 2 {
        return Err(HarnessError::SingleClass);
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_flag = (rate * n as f64).round() as usize;

    let mut views: Vec<Vec<Vec<f64>>> = batch.views().to_vec();
    let mut flags: Vec<bool> = (0..n).map(|i| batch.flag(i)).collect();

    for &sample in &order[..n_flag] {
        let modality = rng.gen_range(0..n_views);
        let class = batch.labels()[sample];
        // Uniform over every sample of a different class.
        let others = n - by_class[class].len();
        let mut pick = rng.gen_range(0..others);
        let mut donor = usize::MAX;
        for (c, members) in by_class.iter().enumerate() {
            if c == class {
                continue;
            }
            if pick < members.len() {
                donor = members[pick];
                break;
            }
            pick -= members.len();
        }
        views[modality][sample] = batch.view(modality)[donor].clone();
        flags[sample] = true;
    }

    Ok(MultimodalBatch::try_new(
        views,
        batch.labels().to_vec(),
        batch.n_classes(),
        Some(flags),
    )?)
}
