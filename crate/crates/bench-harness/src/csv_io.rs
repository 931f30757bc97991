//! Plain numeric CSV ingestion (one file per modality plus a label file)
//! and per-column standardization fit on training data only.

use crate::error::HarnessError;
use evidential_train::MultimodalBatch;
use std::path::Path;

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Parse a headerless numeric CSV. Rows must be rectangular and every cell
/// finite; violations report 1-based row/column coordinates.
pub fn load_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (c, cell) in line.split(',').enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| HarnessError::BadCell {
                path: display(path),
                row: r + 1,
                col: c + 1,
                reason: format!("not a number: `{}`", cell.trim()),
            })?;
            if !value.is_finite() {
                return Err(HarnessError::BadCell {
                    path: display(path),
                    row: r + 1,
                    col: c + 1,
                    reason: format!("not finite: {value}"),
                });
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(HarnessError::RaggedRow {
                    path: display(path),
                    row: r + 1,
                    expected: first.len(),
                    got: row.len(),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parse one integer class id per line.
pub fn load_labels_csv(path: &Path) -> Result<Vec<usize>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        let label: usize = cell.parse().map_err(|_| HarnessError::BadLabel {
            path: display(path),
            row: r + 1,
            text: cell.to_string(),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

/// Load one feature file per modality plus a label file into a batch.
/// Class count is inferred as `max label + 1`.
pub fn load_feature_csv<P: AsRef<Path>>(
    feature_paths: &[P],
    label_path: &Path,
) -> Result<MultimodalBatch, HarnessError> {
    let labels = load_labels_csv(label_path)?;
    let mut views = Vec::with_capacity(feature_paths.len());
    for p in feature_paths {
        let p = p.as_ref();
        let rows = load_matrix_csv(p)?;
        if rows.len() != labels.len() {
            return Err(HarnessError::RowCountMismatch {
                first: display(p),
                first_rows: rows.len(),
                second: display(label_path),
                second_rows: labels.len(),
            });
        }
        views.push(rows);
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1).max(2);
    Ok(MultimodalBatch::try_new(views, labels, n_classes, None)?)
}

pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<(), HarnessError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<(), HarnessError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for label in labels {
        writeln!(out, "{label}")?;
    }
    Ok(())
}

/// Per-view, per-column affine rescaling to zero mean and unit variance.
/// Statistics are fit on the training split only and reused verbatim for
/// test data; near-constant columns are left centered but unscaled.
#[derive(Debug, Clone)]
pub struct Standardizer {
    means: Vec<Vec<f64>>,
    scales: Vec<Vec<f64>>,
}

impl Standardizer {
    pub fn fit(train: &MultimodalBatch) -> Standardizer {
        let mut means = Vec::with_capacity(train.num_views());
        let mut scales = Vec::with_capacity(train.num_views());
        for v in 0..train.num_views() {
            let rows = train.view(v);
            let d = rows[0].len();
            let n = rows.len() as f64;
            let mut mean = vec![0.0; d];
            for row in rows {
                for (m, x) in mean.iter_mut().zip(row) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= n;
            }
            let mut var = vec![0.0; d];
            for row in rows {
                for ((s, x), m) in var.iter_mut().zip(row).zip(&mean) {
                    *s += (x - m) * (x - m);
                }
            }
            let scale: Vec<f64> = var
                .iter()
                .map(|&s| {
                    let sd = (s / n).sqrt();
                    if sd > 1e-12 {
                        sd
                    } else {
                        1.0
                    }
                })
                .collect();
            means.push(mean);
            scales.push(scale);
        }
        Standardizer { means, scales }
    }

    pub fn apply(&self, batch: &MultimodalBatch) -> MultimodalBatch {
        let views: Vec<Vec<Vec<f64>>> = (0..batch.num_views())
            .map(|v| {
                batch
                    .view(v)
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&self.means[v])
                            .zip(&self.scales[v])
                            .map(|((x, m), s)| (x - m) / s)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MultimodalBatch::try_new(
            views,
            batch.labels().to_vec(),
            batch.n_classes(),
            batch.conflict_flags().map(|f| f.to_vec()),
        )
        .expect("standardization preserves batch shape")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_two_modalities() {
        let dir = TempDir::new().unwrap();
        let f0 = write(&dir, "f0.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
        let f1 = write(&dir, "f1.csv", "0.5\n0.6\n0.7\n");
        let labels = write(&dir, "labels.csv", "0\n1\n0\n");
        let batch = load_feature_csv(&[f0, f1], &labels).unwrap();
        assert_eq!(batch.len(), 3);
        assert_eq!(batch.num_views(), 2);
        assert_eq!(batch.n_classes(), 2);
        assert_eq!(batch.view(0)[1], vec![3.0, 4.0]);
    }

    #[test]
    fn ragged_rows_report_coordinates() {
        let dir = TempDir::new().unwrap();
        let f0 = write(&dir, "f0.csv", "1.0,2.0\n3.0\n");
        let err = load_matrix_csv(&f0).unwrap_err();
        match err {
            HarnessError::RaggedRow { row, expected, got, .. } => {
                assert_eq!((row, expected, got), (2, 2, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn nan_cell_reports_coordinates() {
        let dir = TempDir::new().unwrap();
        let f0 = write(&dir, "f0.csv", "1.0,2.0\n3.0,NaN\n");
        let err = load_matrix_csv(&f0).unwrap_err();
        match err {
            HarnessError::BadCell { row, col, .. } => assert_eq!((row, col), (2, 2)),
            other => panic!("unexpected error {other:?}"),
        }
        let junk = write(&dir, "f1.csv", "1.0,oops\n");
        assert!(matches!(
            load_matrix_csv(&junk),
            Err(HarnessError::BadCell { row: 1, col: 2, .. })
        ));
    }

    #[test]
    fn row_count_mismatch_names_both_files() {
        let dir = TempDir::new().unwrap();
        let f0 = write(&dir, "f0.csv", "1.0\n2.0\n");
        let labels = write(&dir, "labels.csv", "0\n1\n0\n");
        let err = load_feature_csv(std::slice::from_ref(&f0), &labels).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("f0.csv") && msg.contains("labels.csv"), "{msg}");
    }

    #[test]
    fn bad_label_is_rejected() {
        let dir = TempDir::new().unwrap();
        let labels = write(&dir, "labels.csv", "0\ncat\n");
        assert!(matches!(
            load_labels_csv(&labels),
            Err(HarnessError::BadLabel { row: 2, .. })
        ));
        let negative = write(&dir, "neg.csv", "-1\n");
        assert!(load_labels_csv(&negative).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = TempDir::new().unwrap();
        let rows = vec![vec![1.25, -3.5], vec![0.1, 2.0009765625]];
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &rows).unwrap();
        assert_eq!(load_matrix_csv(&path).unwrap(), rows);
        let lpath = dir.path().join("l.csv");
        write_labels_csv(&lpath, &[0, 2, 1]).unwrap();
        assert_eq!(load_labels_csv(&lpath).unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn standardizer_fits_train_only() {
        let train = MultimodalBatch::try_new(
            vec![vec![vec![0.0, 5.0], vec![2.0, 5.0], vec![4.0, 5.0]]],
            vec![0, 1, 0],
            2,
            None,
        )
        .unwrap();
        let test = MultimodalBatch::try_new(
            vec![vec![vec![6.0, 5.0]]],
            vec![1],
            2,
            None,
        )
        .unwrap();
        let std = Standardizer::fit(&train);
        let train_s = std.apply(&train);
        // Column 0: mean 2, population std sqrt(8/3).
        let s0 = (8.0f64 / 3.0).sqrt();
        assert!((train_s.view(0)[0][0] - (-2.0 / s0)).abs() < 1e-12);
        let col_sum: f64 = train_s.view(0).iter().map(|r| r[0]).sum();
        assert!(col_sum.abs() < 1e-12);
        // Constant column: centered, not rescaled.
        assert_eq!(train_s.view(0)[1][1], 0.0);
        // Test data reuses the training statistics (no refit).
        let test_s = std.apply(&test);
        assert!((test_s.view(0)[0][0] - 4.0 / s0).abs() < 1e-12);
    }
}
