use crate::error::TrainError;

/// A multimodal dataset slice: per-view feature rows, integer class labels,
/// and optional per-sample conflict flags (used by evaluation harnesses;
/// `None` means a clean set).
///
/// All views hold the same number of samples and every row within a view has
/// the same width.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodalBatch {
    views: Vec<Vec<Vec<f64>>>,
    labels: Vec<usize>,
    n_classes: usize,
    conflict_flags: Option<Vec<bool>>,
}

impl MultimodalBatch {
    pub fn try_new(
        views: Vec<Vec<Vec<f64>>>,
        labels: Vec<usize>,
        n_classes: usize,
        conflict_flags: Option<Vec<bool>>,
    ) -> Result<Self, TrainError> {
        if views.is_empty() {
            return Err(TrainError::NoViews);
        }
        let n = labels.len();
        if n == 0 {
            return Err(TrainError::EmptyBatch);
        }
        for (v, rows) in views.iter().enumerate() {
            if rows.len() != n {
                return Err(TrainError::SampleCountMismatch {
                    view: v,
                    expected: n,
                    got: rows.len(),
                });
            }
            let width = rows[0].len();
            for (s, row) in rows.iter().enumerate() {
                if row.len() != width {
                    return Err(TrainError::FeatureWidthMismatch {
                        view: v,
                        sample: s,
                        expected: width,
                        got: row.len(),
                    });
                }
            }
        }
        for &label in &labels {
            if label >= n_classes {
                return Err(TrainError::LabelOutOfRange {
                    label,
                    classes: n_classes,
                });
            }
        }
        if let Some(flags) = &conflict_flags {
            if flags.len() != n {
                return Err(TrainError::FlagLengthMismatch {
                    expected: n,
                    got: flags.len(),
                });
            }
        }
        Ok(MultimodalBatch {
            views,
            labels,
            n_classes,
            conflict_flags,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn views(&self) -> &[Vec<Vec<f64>>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &[Vec<f64>] {
        &self.views[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn conflict_flags(&self) -> Option<&[bool]> {
        self.conflict_flags.as_deref()
    }

    /// Conflict flag for one sample; clean sets report false.
    pub fn flag(&self, sample: usize) -> bool {
        self.conflict_flags
            .as_ref()
            .map(|f| f[sample])
            .unwrap_or(false)
    }

    /// Per-view feature widths.
    pub fn feature_dims(&self) -> Vec<usize> {
        self.views.iter().map(|rows| rows[0].len()).collect()
    }

    /// Feature rows of one sample across all views.
    pub fn sample_features(&self, sample: usize) -> Vec<&[f64]> {
        self.views.iter().map(|rows| rows[sample].as_slice()).collect()
    }

    /// One-hot encoding of a sample's label.
    pub fn one_hot(&self, sample: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.n_classes];
        y[self.labels[sample]] = 1.0;
        y
    }

    /// A new batch holding the given samples (in the given order).
    /// Panics if an index is out of bounds.
    pub fn subset(&self, indices: &[usize]) -> MultimodalBatch {
        let views = self
            .views
            .iter()
            .map(|rows| indices.iter().map(|&i| rows[i].clone()).collect())
            .collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let conflict_flags = self
            .conflict_flags
            .as_ref()
            .map(|f| indices.iter().map(|&i| f[i]).collect());
        MultimodalBatch {
            views,
            labels,
            n_classes: self.n_classes,
            conflict_flags,
        }
    }
}
