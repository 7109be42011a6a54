//! Labeled high-dimensional datasets: CSV ingestion, normalization, a
//! synthetic survey generator, and partitioning of points by class.
//!
//! Missing feature cells are carried as NaN markers until
//! [`normalize_features`] imputes them; every downstream module requires a
//! fully finite matrix.

use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scalar::{sc, sc_usize, Scalar};
use crate::{Error, Result};

/// Default class-size threshold: classes with fewer members are dropped.
pub const DEFAULT_MIN_CLASS_SIZE: usize = 50;

/// An `n x m` matrix of points (rows) by features (columns).
#[derive(Debug, Clone)]
pub struct DataMatrix<F> {
    pub values: Array2<F>,
    pub point_ids: Vec<String>,
    pub feature_ids: Vec<String>,
}

impl<F: Scalar> DataMatrix<F> {
    pub fn new(values: Array2<F>, point_ids: Vec<String>, feature_ids: Vec<String>) -> Result<Self> {
        let (n, m) = values.dim();
        if n < 2 || m < 2 {
            return Err(Error::MatrixTooSmall { n, m });
        }
        if point_ids.len() != n || feature_ids.len() != m {
            return Err(Error::DimMismatch(format!(
                "{} point ids and {} feature ids for a {n} x {m} matrix",
                point_ids.len(),
                feature_ids.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &point_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicatePointId(id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for id in &feature_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicatePointId(format!("feature {id}")));
            }
        }
        Ok(DataMatrix {
            values,
            point_ids,
            feature_ids,
        })
    }

    pub fn n_points(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Per-point class labels plus the retention threshold.
#[derive(Debug, Clone)]
pub struct ClassLabeling {
    pub labels: Vec<String>,
    pub min_class_size: usize,
}

impl ClassLabeling {
    pub fn new(labels: Vec<String>, min_class_size: usize) -> Self {
        ClassLabeling {
            labels,
            min_class_size,
        }
    }

    /// Restrict the labeling to a subset of rows (after row-dropping
    /// normalization).
    pub fn retained(&self, keep: &[usize]) -> ClassLabeling {
        ClassLabeling {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            min_class_size: self.min_class_size,
        }
    }
}

/// Load a labeled matrix from a CSV file with a header row.
///
/// A column named `point_id` or `id` (in that order of preference) provides
/// point identifiers; otherwise rows get positional ids. Empty cells become
/// missing markers for [`normalize_features`] to impute.
pub fn load_matrix<F: Scalar>(
    path: impl AsRef<Path>,
    label_column: &str,
) -> Result<(DataMatrix<F>, ClassLabeling)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::LabelColumnNotFound(label_column.to_string()))?;
    let id_idx = headers
        .iter()
        .position(|h| h == "point_id")
        .or_else(|| headers.iter().position(|h| h == "id"));
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| j != label_idx && Some(j) != id_idx)
        .collect();
    let feature_ids: Vec<String> = feature_cols
        .iter()
        .map(|&j| headers[j].to_string())
        .collect();

    let mut rows: Vec<Vec<F>> = Vec::new();
    let mut labels = Vec::new();
    let mut point_ids = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::CsvParse {
            line: e
                .position()
                .map(|p| p.line())
                .unwrap_or((i + 2) as u64),
            msg: e.to_string(),
        })?;
        labels.push(rec[label_idx].to_string());
        point_ids.push(match id_idx {
            Some(j) => rec[j].to_string(),
            None => format!("p{i}"),
        });
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            let cell = &rec[j];
            if cell.is_empty() {
                row.push(F::nan());
            } else {
                match cell.parse::<f64>() {
                    Ok(v) => row.push(sc(v)),
                    Err(_) => {
                        return Err(Error::NonNumericCell {
                            row: i,
                            column: headers[j].to_string(),
                            value: cell.to_string(),
                        })
                    }
                }
            }
        }
        rows.push(row);
    }

    let n = rows.len();
    let m = feature_cols.len();
    if n < 2 || m < 2 {
        return Err(Error::MatrixTooSmall { n, m });
    }
    let mut values = Array2::zeros((n, m));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    let matrix = DataMatrix::new(values, point_ids, feature_ids)?;
    Ok((
        matrix,
        ClassLabeling::new(labels, DEFAULT_MIN_CLASS_SIZE),
    ))
}

/// Column scaling policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizePolicy {
    Zscore,
    None,
}

/// Missing-cell policy, applied before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputePolicy {
    ColumnMean,
    DropRow,
}

/// Result of [`normalize_features`]: the scaled matrix plus the surviving row
/// indices (identity unless rows were dropped).
#[derive(Debug, Clone)]
pub struct Normalized<F> {
    pub matrix: DataMatrix<F>,
    pub kept_rows: Vec<usize>,
}

/// Impute missing cells and scale columns.
///
/// Z-scoring maps each column to mean 0 and unit variance; constant columns
/// map to all zeros rather than NaN.
pub fn normalize_features<F: Scalar>(
    m: &DataMatrix<F>,
    policy: NormalizePolicy,
    impute: ImputePolicy,
) -> Result<Normalized<F>> {
    let (n, cols) = m.values.dim();
    // Columns with fewer than 2 observed values cannot be imputed or scaled.
    for j in 0..cols {
        let observed = (0..n).filter(|&i| !m.values[[i, j]].is_nan()).count();
        if observed < 2 {
            return Err(Error::EmptyFeature(m.feature_ids[j].clone()));
        }
    }

    let (mut values, kept_rows) = match impute {
        ImputePolicy::DropRow => {
            let keep: Vec<usize> = (0..n)
                .filter(|&i| (0..cols).all(|j| !m.values[[i, j]].is_nan()))
                .collect();
            if keep.len() < 2 {
                return Err(Error::MatrixTooSmall {
                    n: keep.len(),
                    m: cols,
                });
            }
            let mut v = Array2::zeros((keep.len(), cols));
            for (dst, &src) in keep.iter().enumerate() {
                for j in 0..cols {
                    v[[dst, j]] = m.values[[src, j]];
                }
            }
            (v, keep)
        }
        ImputePolicy::ColumnMean => {
            let mut v = m.values.clone();
            for j in 0..cols {
                let mut sum = F::zero();
                let mut count = 0usize;
                for i in 0..n {
                    let x = v[[i, j]];
                    if !x.is_nan() {
                        sum += x;
                        count += 1;
                    }
                }
                let mean = sum / sc_usize(count);
                for i in 0..n {
                    if v[[i, j]].is_nan() {
                        v[[i, j]] = mean;
                    }
                }
            }
            (v, (0..n).collect())
        }
    };

    if policy == NormalizePolicy::Zscore {
        let rows = values.nrows();
        for j in 0..cols {
            let mut mean = F::zero();
            for i in 0..rows {
                mean += values[[i, j]];
            }
            mean /= sc_usize(rows);
            let mut var = F::zero();
            for i in 0..rows {
                let d = values[[i, j]] - mean;
                var += d * d;
            }
            var /= sc_usize(rows);
            if var <= F::zero() {
                for i in 0..rows {
                    values[[i, j]] = F::zero();
                }
            } else {
                let sd = var.sqrt();
                for i in 0..rows {
                    values[[i, j]] = (values[[i, j]] - mean) / sd;
                }
            }
        }
    }

    let point_ids = kept_rows
        .iter()
        .map(|&i| m.point_ids[i].clone())
        .collect();
    Ok(Normalized {
        matrix: DataMatrix::new(values, point_ids, m.feature_ids.clone())?,
        kept_rows,
    })
}

/// Specification for the synthetic survey generator.
///
/// Each point is an archetype vector plus Gaussian noise; the class of a
/// point determines the distribution its archetype is drawn from. Generation
/// is a pure function of the spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub n_archetypes: usize,
    /// Inclusive range for the per-class point count.
    pub points_per_class: (usize, usize),
    pub feature_dim: usize,
    pub noise_scale: f64,
    /// `n_classes` rows of `n_archetypes` nonnegative weights, each summing to 1.
    pub mixing: Vec<Vec<f64>>,
    pub rng_seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 || self.n_archetypes == 0 {
            return Err(Error::InvalidSynthSpec(
                "need at least one class and one archetype".into(),
            ));
        }
        if self.feature_dim < 2 {
            return Err(Error::InvalidSynthSpec("feature_dim must be >= 2".into()));
        }
        let (lo, hi) = self.points_per_class;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidSynthSpec(format!(
                "points_per_class range ({lo}, {hi}) invalid"
            )));
        }
        if self.noise_scale < 0.0 {
            return Err(Error::InvalidSynthSpec("noise_scale must be >= 0".into()));
        }
        if self.mixing.len() != self.n_classes {
            return Err(Error::InvalidSynthSpec(format!(
                "mixing has {} rows for {} classes",
                self.mixing.len(),
                self.n_classes
            )));
        }
        for (c, w) in self.mixing.iter().enumerate() {
            if w.len() != self.n_archetypes {
                return Err(Error::InvalidSynthSpec(format!(
                    "mixing row {c} has {} weights for {} archetypes",
                    w.len(),
                    self.n_archetypes
                )));
            }
            if w.iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidSynthSpec(format!(
                    "mixing row {c} has a negative weight"
                )));
            }
            let s: f64 = w.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidSynthSpec(format!(
                    "mixing row {c} sums to {s}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Parameters for a group-structured synthetic spec: classes fall into
/// planted groups whose members share (jittered) archetype mixtures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedGroups {
    pub n_groups: usize,
    pub classes_per_group: usize,
    pub points_per_class: (usize, usize),
    pub feature_dim: usize,
    pub noise_scale: f64,
    /// Weight on the group's own archetype (the rest leaks to other groups).
    pub dominance: f64,
    /// Magnitude of the per-class mixing perturbation within a group.
    pub jitter: f64,
    pub seed: u64,
}

impl PlantedGroups {
    /// Build a [`SynthSpec`] plus the class -> group assignment.
    ///
    /// Leak proportions differ per group so that no two groups sit at the
    /// same distance from a third; this keeps the group geometry scalene.
    pub fn build(&self) -> Result<(SynthSpec, Vec<usize>)> {
        let g = self.n_groups;
        if g == 0 || self.classes_per_group == 0 {
            return Err(Error::InvalidSynthSpec(
                "need at least one group and one class per group".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.dominance) {
            return Err(Error::InvalidSynthSpec("dominance must be in [0, 1]".into()));
        }
        let n_classes = g * self.classes_per_group;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9);
        let mut mixing = Vec::with_capacity(n_classes);
        let mut groups = Vec::with_capacity(n_classes);
        for grp in 0..g {
            // Group-specific leak split over the other archetypes.
            let rem = 1.0 - self.dominance;
            for _ in 0..self.classes_per_group {
                let mut w = vec![0.0f64; g];
                w[grp] = self.dominance;
                if g > 1 {
                    let tilt = 0.25 + 0.5 * (grp as f64) / ((g - 1).max(1) as f64);
                    let next = (grp + 1) % g;
                    w[next] += rem * tilt;
                    let others: Vec<usize> =
                        (0..g).filter(|&a| a != grp && a != next).collect();
                    for &o in &others {
                        w[o] += rem * (1.0 - tilt) / others.len() as f64;
                    }
                    if others.is_empty() {
                        w[next] += rem * (1.0 - tilt);
                    }
                }
                for x in w.iter_mut() {
                    *x += self.jitter * rng.random::<f64>();
                    *x = x.max(0.0);
                }
                let s: f64 = w.iter().sum();
                for x in w.iter_mut() {
                    *x /= s;
                }
                mixing.push(w);
                groups.push(grp);
            }
        }
        let spec = SynthSpec {
            n_classes,
            n_archetypes: g,
            points_per_class: self.points_per_class,
            feature_dim: self.feature_dim,
            noise_scale: self.noise_scale,
            mixing,
            rng_seed: self.seed,
        };
        spec.validate()?;
        Ok((spec, groups))
    }
}

/// Ground truth emitted alongside synthetic data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub archetypes: Vec<Vec<f64>>,
    pub class_ids: Vec<String>,
    pub class_mixing: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_of_class: Option<Vec<usize>>,
}

/// Generate a synthetic labeled survey. Identical specs produce identical
/// output, bit for bit.
pub fn synthesize_survey<F: Scalar>(
    spec: &SynthSpec,
) -> Result<(DataMatrix<F>, ClassLabeling, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let normal = StandardNormal;

    let archetypes: Vec<Vec<f64>> = (0..spec.n_archetypes)
        .map(|_| {
            (0..spec.feature_dim)
                .map(|_| normal.sample(&mut rng))
                .collect()
        })
        .collect();

    let class_ids: Vec<String> = (0..spec.n_classes).map(|c| format!("c{c:04}")).collect();
    let (lo, hi) = spec.points_per_class;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for c in 0..spec.n_classes {
        let count = if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        };
        let weights = &spec.mixing[c];
        for _ in 0..count {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = spec.n_archetypes - 1;
            for (a, &w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = a;
                    break;
                }
            }
            let row: Vec<f64> = archetypes[pick]
                .iter()
                .map(|&base| base + spec.noise_scale * normal.sample(&mut rng))
                .collect();
            rows.push(row);
            labels.push(class_ids[c].clone());
        }
    }

    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidSynthSpec(
            "spec generates fewer than 2 points".into(),
        ));
    }
    let mut values = Array2::zeros((n, spec.feature_dim));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[[i, j]] = sc::<F>(v);
        }
    }
    let point_ids = (0..n).map(|i| format!("p{i:06}")).collect();
    let feature_ids = (0..spec.feature_dim).map(|j| format!("q{j:03}")).collect();
    let matrix = DataMatrix::new(values, point_ids, feature_ids)?;
    let truth = GroundTruth {
        archetypes,
        class_ids,
        class_mixing: spec.mixing.clone(),
        group_of_class: None,
    };
    Ok((
        matrix,
        ClassLabeling::new(labels, DEFAULT_MIN_CLASS_SIZE),
        truth,
    ))
}

/// One retained class: its id and member row indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGroup {
    pub id: String,
    pub members: Vec<usize>,
}

/// A class dropped by the size filter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DroppedClass {
    pub id: String,
    pub size: usize,
}

/// Disjoint per-class index sets after the size filter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassPartition {
    pub classes: Vec<ClassGroup>,
    pub dropped: Vec<DroppedClass>,
}

/// Partition points by class, dropping (and reporting) classes smaller than
/// the labeling's `min_class_size`.
pub fn partition_by_class<F: Scalar>(
    m: &DataMatrix<F>,
    labeling: &ClassLabeling,
) -> Result<ClassPartition> {
    if labeling.labels.len() != m.n_points() {
        return Err(Error::DimMismatch(format!(
            "{} labels for {} points",
            labeling.labels.len(),
            m.n_points()
        )));
    }
    let mut by_class: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, label) in labeling.labels.iter().enumerate() {
        match by_class.iter_mut().find(|(id, _)| id == label) {
            Some((_, members)) => members.push(i),
            None => by_class.push((label.clone(), vec![i])),
        }
    }
    by_class.sort_by(|a, b| a.0.cmp(&b.0));
    let total = by_class.len();
    let mut classes = Vec::new();
    let mut dropped = Vec::new();
    for (id, members) in by_class {
        if members.len() >= labeling.min_class_size {
            classes.push(ClassGroup { id, members });
        } else {
            dropped.push(DroppedClass {
                id,
                size: members.len(),
            });
        }
    }
    if classes.is_empty() {
        return Err(Error::NoClassesRetained(total));
    }
    Ok(ClassPartition { classes, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_small_matrix() {
        let f = write_csv("q1,q2,county\n1.0,2.0,a\n3.0,4.0,a\n5.0,6.0,b\n");
        let (m, l) = load_matrix::<f64>(f.path(), "county").unwrap();
        assert_eq!(m.n_points(), 3);
        assert_eq!(m.n_features(), 2);
        assert_eq!(l.labels, vec!["a", "a", "b"]);
        assert_eq!(m.values[[1, 1]], 4.0);
        assert_eq!(m.feature_ids, vec!["q1", "q2"]);
    }

    #[test]
    fn load_missing_cell_becomes_marker() {
        let f = write_csv("q0,q1,label\n1,2,a\n3,4,a\n5,,b\n");
        let (m, _) = load_matrix::<f64>(f.path(), "label").unwrap();
        assert!(m.values[[2, 1]].is_nan());
        assert!(m.has_missing());
    }

    #[test]
    fn load_missing_label_column_errors() {
        let f = write_csv("q1,q2\n1,2\n3,4\n");
        let err = load_matrix::<f64>(f.path(), "label").unwrap_err();
        assert!(matches!(err, Error::LabelColumnNotFound(_)));
    }

    #[test]
    fn load_non_numeric_cell_errors() {
        let f = write_csv("q1,q2,label\n1,2,a\n3,oops,b\n");
        let err = load_matrix::<f64>(f.path(), "label").unwrap_err();
        match err {
            Error::NonNumericCell { row, column, value } => {
                assert_eq!(row, 1);
                assert_eq!(column, "q2");
                assert_eq!(value, "oops");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_duplicate_point_id_errors() {
        let f = write_csv("id,q1,q2,label\nx,1,2,a\nx,3,4,b\n");
        let err = load_matrix::<f64>(f.path(), "label").unwrap_err();
        assert!(matches!(err, Error::DuplicatePointId(_)));
    }

    #[test]
    fn zscore_hand_computed() {
        let values = ndarray::array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let m = DataMatrix::new(
            values,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let out = normalize_features(&m, NormalizePolicy::Zscore, ImputePolicy::ColumnMean)
            .unwrap()
            .matrix;
        // Column (1,2,3): mean 2, variance (2/3), sd 0.8165.
        assert_abs_diff_eq!(out.values[[0, 0]], -1.224744871, epsilon = 1e-6);
        assert_abs_diff_eq!(out.values[[1, 0]], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.values[[2, 0]], 1.224744871, epsilon = 1e-6);
        // Constant column maps to zeros, not NaN.
        for i in 0..3 {
            assert_eq!(out.values[[i, 1]], 0.0);
        }
        // Mean 0, variance 1 after scaling.
        let col: Vec<f64> = (0..3).map(|i| out.values[[i, 0]]).collect();
        let mean: f64 = col.iter().sum::<f64>() / 3.0;
        let var: f64 = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(var, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zscore_idempotent() {
        let values = ndarray::array![[1.0, -3.0], [4.0, 0.5], [-2.0, 7.0], [0.0, 1.5]];
        let m = DataMatrix::new(
            values,
            (0..4).map(|i| format!("p{i}")).collect(),
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let once = normalize_features(&m, NormalizePolicy::Zscore, ImputePolicy::ColumnMean)
            .unwrap()
            .matrix;
        let twice = normalize_features(&once, NormalizePolicy::Zscore, ImputePolicy::ColumnMean)
            .unwrap()
            .matrix;
        for (a, b) in once.values.iter().zip(twice.values.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn policy_none_is_identity() {
        let values = ndarray::array![[1.0, 2.0], [3.0, 4.0]];
        let m = DataMatrix::new(
            values.clone(),
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let out = normalize_features(&m, NormalizePolicy::None, ImputePolicy::ColumnMean)
            .unwrap()
            .matrix;
        assert_eq!(out.values, values);
    }

    #[test]
    fn column_mean_impute() {
        let values = ndarray::array![[1.0, 2.0], [f64::NAN, 4.0], [3.0, 6.0]];
        let m = DataMatrix::new(
            values,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let out = normalize_features(&m, NormalizePolicy::None, ImputePolicy::ColumnMean)
            .unwrap()
            .matrix;
        assert_abs_diff_eq!(out.values[[1, 0]], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn drop_row_impute() {
        let values = ndarray::array![[1.0, 2.0], [f64::NAN, 4.0], [3.0, 6.0]];
        let m = DataMatrix::new(
            values,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let out =
            normalize_features(&m, NormalizePolicy::None, ImputePolicy::DropRow).unwrap();
        assert_eq!(out.kept_rows, vec![0, 2]);
        assert_eq!(out.matrix.n_points(), 2);
        assert_eq!(out.matrix.point_ids, vec!["a", "c"]);
    }

    #[test]
    fn entirely_missing_column_errors() {
        let values = ndarray::array![[1.0, f64::NAN], [2.0, f64::NAN], [3.0, f64::NAN]];
        let m = DataMatrix::new(
            values,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["x".into(), "bad".into()],
        )
        .unwrap();
        let err = normalize_features(&m, NormalizePolicy::Zscore, ImputePolicy::ColumnMean)
            .unwrap_err();
        match err {
            Error::EmptyFeature(name) => assert_eq!(name, "bad"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn tiny_spec() -> SynthSpec {
        SynthSpec {
            n_classes: 2,
            n_archetypes: 2,
            points_per_class: (5, 5),
            feature_dim: 3,
            noise_scale: 0.1,
            mixing: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            rng_seed: 42,
        }
    }

    #[test]
    fn synth_deterministic() {
        let spec = tiny_spec();
        let (a, la, _) = synthesize_survey::<f64>(&spec).unwrap();
        let (b, lb, _) = synthesize_survey::<f64>(&spec).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(la.labels, lb.labels);
    }

    #[test]
    fn synth_zero_noise_single_archetype() {
        let spec = SynthSpec {
            n_classes: 2,
            n_archetypes: 1,
            points_per_class: (4, 4),
            feature_dim: 3,
            noise_scale: 0.0,
            mixing: vec![vec![1.0], vec![1.0]],
            rng_seed: 1,
        };
        let (m, _, truth) = synthesize_survey::<f64>(&spec).unwrap();
        for i in 0..m.n_points() {
            for j in 0..3 {
                assert_eq!(m.values[[i, j]], truth.archetypes[0][j]);
            }
        }
    }

    #[test]
    fn synth_recoverable_by_kmeans() {
        // 3 classes with disjoint archetype supports and small noise: raw
        // k-means recovers the partition.
        let spec = SynthSpec {
            n_classes: 3,
            n_archetypes: 3,
            points_per_class: (40, 40),
            feature_dim: 6,
            noise_scale: 0.1,
            mixing: vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            rng_seed: 9,
        };
        let (m, labels, _) = synthesize_survey::<f64>(&spec).unwrap();
        let truth: Vec<usize> = labels
            .labels
            .iter()
            .map(|l| l.trim_start_matches('c').parse::<usize>().unwrap())
            .collect();
        let pred = crate::eval::kmeans(&m.values.view(), 3, 123, 100);
        let acc = crate::eval::clustering_accuracy(&pred, &truth);
        assert!(acc >= 0.95, "k-means accuracy {acc} below 0.95");
    }

    #[test]
    fn partition_thresholds() {
        let values = ndarray::array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        let m = DataMatrix::new(
            values,
            vec!["x".into(), "y".into(), "z".into()],
            vec!["f".into(), "g".into()],
        )
        .unwrap();
        let l = ClassLabeling::new(vec!["a".into(), "a".into(), "b".into()], 1);
        let p = partition_by_class(&m, &l).unwrap();
        assert_eq!(p.classes.len(), 2);
        assert_eq!(p.classes[0].members, vec![0, 1]);
        assert_eq!(p.classes[1].members, vec![2]);
        assert!(p.dropped.is_empty());

        let l2 = ClassLabeling::new(vec!["a".into(), "a".into(), "b".into()], 2);
        let p2 = partition_by_class(&m, &l2).unwrap();
        assert_eq!(p2.classes.len(), 1);
        assert_eq!(p2.dropped.len(), 1);
        assert_eq!(p2.dropped[0].id, "b");

        let l3 = ClassLabeling::new(vec!["a".into(), "a".into(), "b".into()], 5);
        assert!(matches!(
            partition_by_class(&m, &l3).unwrap_err(),
            Error::NoClassesRetained(2)
        ));
    }

    #[test]
    fn planted_groups_builds_valid_spec() {
        let pg = PlantedGroups {
            n_groups: 3,
            classes_per_group: 4,
            points_per_class: (10, 10),
            feature_dim: 8,
            noise_scale: 0.3,
            dominance: 0.8,
            jitter: 0.02,
            seed: 5,
        };
        let (spec, groups) = pg.build().unwrap();
        assert_eq!(spec.n_classes, 12);
        assert_eq!(groups.len(), 12);
        spec.validate().unwrap();
        let (_, labeling, _) = synthesize_survey::<f64>(&spec).unwrap();
        assert_eq!(labeling.labels.len(), 120);
    }
}
