//! Synthetic labeled datasets and CSV ingestion.
//!
//! CSV rows are `label,f0,f1,...` with no header unless requested.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LscError, Result};

/// Distance of every blob anchor from the origin.
pub const ANCHOR_NORM: f64 = 10.0;
/// Default within-class standard deviation.
pub const DEFAULT_SPREAD: f64 = 0.5;
/// Candidate directions drawn per anchor; the one farthest in angle from the
/// anchors already placed is kept.
const ANCHOR_CANDIDATES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    split: Split,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, n_classes: usize, split: Split) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(LscError::Shape(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(LscError::Shape("features need at least one column".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(LscError::InvalidInput("features contain non-finite values".into()));
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
            return Err(LscError::LabelRange { index, label, n_classes });
        }
        Ok(Self {
            features: features.as_standard_layout().into_owned(),
            labels,
            n_classes,
            split,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Declared class count; labels are below it.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Rows whose label satisfies `keep`, class count unchanged.
    pub fn filter_labels(&self, keep: impl Fn(usize) -> bool) -> Self {
        let rows: Vec<usize> = (0..self.len()).filter(|&i| keep(self.labels[i])).collect();
        self.select(&rows)
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        let features = self.features.select(ndarray::Axis(0), rows);
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Self {
            features,
            labels,
            n_classes: self.n_classes,
            split: self.split,
        }
    }

    /// Rows of `self` followed by rows of `other`; the class count is the larger one.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.feature_dim() != other.feature_dim() {
            return Err(LscError::Shape(format!(
                "cannot join datasets with {} and {} features",
                self.feature_dim(),
                other.feature_dim()
            )));
        }
        let features = ndarray::concatenate(ndarray::Axis(0), &[self.features.view(), other.features.view()])
            .map_err(|e| LscError::Shape(e.to_string()))?;
        let labels = self.labels.iter().chain(&other.labels).copied().collect();
        Self::new(features, labels, self.n_classes.max(other.n_classes), self.split)
    }

    /// Splits off every `every`-th row (starting at `offset`) as an eval set.
    pub fn holdout(&self, every: usize, offset: usize) -> (Self, Self) {
        let every = every.max(1);
        let (mut train, mut eval) = (Vec::new(), Vec::new());
        for i in 0..self.len() {
            if i % every == offset % every {
                eval.push(i);
            } else {
                train.push(i);
            }
        }
        (
            self.select(&train).with_split(Split::Train),
            self.select(&eval).with_split(Split::Eval),
        )
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn max_cos(dir: &[f64], placed: &[Vec<f64>]) -> f64 {
    placed
        .iter()
        .map(|p| p.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Class anchors: `k` seeded unit directions at norm [`ANCHOR_NORM`], each
/// picked as the best of a few random candidates so low-dimensional blobs
/// do not collide.
pub fn blob_anchors(k: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = unit_direction(&mut rng, d);
        let mut best_cos = max_cos(&best, &placed);
        for _ in 1..ANCHOR_CANDIDATES {
            let cand = unit_direction(&mut rng, d);
            let c = max_cos(&cand, &placed);
            if c < best_cos {
                best = cand;
                best_cos = c;
            }
        }
        placed.push(best);
    }
    Array2::from_shape_fn((k, d), |(i, j)| ANCHOR_NORM * placed[i][j])
}

/// `k` Gaussian blobs of `per_class` samples in `d` dimensions, rows grouped by class.
pub fn gen_blobs(k: usize, d: usize, per_class: usize, spread: f64, seed: u64) -> Result<LabeledDataset> {
    if k == 0 || d == 0 || per_class == 0 {
        return Err(LscError::InvalidInput("classes, dimension and per-class count must be positive".into()));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(LscError::InvalidInput(format!("spread must be non-negative, got {spread}")));
    }
    let anchors = blob_anchors(k, d, seed);
    // samples use their own stream so anchors do not depend on per_class
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let m = k * per_class;
    let mut features = Array2::<f64>::zeros((m, d));
    let mut labels = Vec::with_capacity(m);
    for (i, mut row) in features.outer_iter_mut().enumerate() {
        let class = i / per_class;
        for (j, x) in row.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(&mut rng);
            *x = anchors[(class, j)] + spread * noise;
        }
        labels.push(class);
    }
    LabeledDataset::new(features, labels, k, Split::Train)
}

/// Gives every row its own class, `0..m` in row order.
pub fn unique_label_expand(ds: &LabeledDataset) -> LabeledDataset {
    let m = ds.len();
    LabeledDataset {
        features: ds.features.clone(),
        labels: (0..m).collect(),
        n_classes: m,
        split: ds.split,
    }
}

/// Seeded row shuffle, handy for building held-out splits.
pub fn shuffled(ds: &LabeledDataset, seed: u64) -> LabeledDataset {
    use rand::seq::SliceRandom;
    let mut rows: Vec<usize> = (0..ds.len()).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ds.select(&rows)
}

fn parse_err(line: u64, message: impl Into<String>) -> LscError {
    LscError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads `label,f0,f1,...` rows. The class count is one past the largest label.
pub fn read_csv<R: Read>(reader: R, header: bool) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 2 {
            return Err(parse_err(line, "expected a label and at least one feature"));
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(line, format!("expected {w} fields, found {}", record.len())));
            }
            _ => {}
        }
        let label: usize = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("label {:?} is not a non-negative integer", &record[0])))?;
        labels.push(label);
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("feature {field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("feature {field:?} is not finite")));
            }
            values.push(v);
        }
    }
    let Some(width) = width else {
        return Err(parse_err(if header { 2 } else { 1 }, "no data rows"));
    };
    let n_classes = labels.iter().max().map_or(0, |&l| l + 1);
    let features = Array2::from_shape_vec((labels.len(), width - 1), values).map_err(|e| LscError::Shape(e.to_string()))?;
    LabeledDataset::new(features, labels, n_classes, Split::Train)
}

pub fn load_csv(path: impl AsRef<Path>, header: bool) -> Result<LabeledDataset> {
    read_csv(File::open(path)?, header)
}

/// Writes rows with shortest round-trip float formatting.
pub fn write_csv<W: Write>(ds: &LabeledDataset, writer: W, header: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| LscError::Io(std::io::Error::other(e));
    if header {
        let mut names = vec!["label".to_string()];
        names.extend((0..ds.feature_dim()).map(|j| format!("f{j}")));
        wtr.write_record(&names).map_err(to_io)?;
    }
    let mut fields = Vec::with_capacity(ds.feature_dim() + 1);
    for (label, row) in ds.labels.iter().zip(ds.features.outer_iter()) {
        fields.clear();
        fields.push(label.to_string());
        fields.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&fields).map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>, header: bool) -> Result<()> {
    write_csv(ds, File::create(path)?, header)
}

/// A random label permutation, used for mixed-label training.
pub fn random_label_permutation(n_classes: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n_classes).collect();
    p.shuffle(&mut rng);
    // a shuffle of two or more labels could come back unchanged; rotate it instead
    if n_classes > 1 && p.iter().enumerate().all(|(i, &v)| i == v) {
        p.rotate_left(rng.random_range(1..n_classes));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_spread_samples_sit_on_anchors() {
        let ds = gen_blobs(4, 3, 1, 0.0, 9).unwrap();
        let anchors = blob_anchors(4, 3, 9);
        assert_eq!(ds.features(), &anchors);
        assert_eq!(ds.labels(), &[0, 1, 2, 3]);
        for row in anchors.outer_iter() {
            let n = row.dot(&row).sqrt();
            assert!((n - ANCHOR_NORM).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_data_and_balanced() {
        let a = gen_blobs(7, 5, 13, 0.5, 3).unwrap();
        let b = gen_blobs(7, 5, 13, 0.5, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_blobs(7, 5, 13, 0.5, 4).unwrap());
        for c in 0..7 {
            assert_eq!(a.labels().iter().filter(|&&l| l == c).count(), 13);
        }
    }

    #[test]
    fn two_dimensional_blobs_are_separated() {
        for seed in 0..20 {
            let ds = gen_blobs(10, 2, 200, 0.5, seed).unwrap();
            let mut means = vec![[0.0; 2]; 10];
            let mut var = 0.0;
            for (l, row) in ds.labels().iter().zip(ds.features().outer_iter()) {
                means[*l][0] += row[0] / 200.0;
                means[*l][1] += row[1] / 200.0;
            }
            for (l, row) in ds.labels().iter().zip(ds.features().outer_iter()) {
                var += ((row[0] - means[*l][0]).powi(2) + (row[1] - means[*l][1]).powi(2)) / 2.0;
            }
            let std = (var / ds.len() as f64).sqrt();
            let mut min_sep = f64::INFINITY;
            for a in 0..10 {
                for b in a + 1..10 {
                    let d = ((means[a][0] - means[b][0]).powi(2) + (means[a][1] - means[b][1]).powi(2)).sqrt();
                    min_sep = min_sep.min(d);
                }
            }
            assert!(min_sep >= 5.0 * std, "seed {seed}: separation {min_sep} vs std {std}");
        }
    }

    #[test]
    fn unique_labels() {
        let ds = gen_blobs(2, 2, 3, 0.5, 0).unwrap();
        let u = unique_label_expand(&ds);
        assert_eq!(u.labels(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(u.n_classes(), 6);
        assert_eq!(unique_label_expand(&u), u);
        let big = unique_label_expand(&gen_blobs(10, 4, 100, 0.5, 1).unwrap());
        let mut l = big.labels().to_vec();
        l.dedup();
        assert_eq!(l.len(), 1000);
    }

    #[test]
    fn csv_row_parses() {
        let ds = read_csv("2,0.5,-1.0\n".as_bytes(), false).unwrap();
        assert_eq!(ds.labels(), &[2]);
        assert_eq!(ds.features().row(0).to_vec(), vec![0.5, -1.0]);
        assert_eq!(ds.n_classes(), 3);
    }

    #[test]
    fn csv_errors_cite_lines() {
        let text = "0,1,2\n0,1,2\n1,1,2\n1,1,2\n2,1,2\n2,1,2\n3,1\n";
        match read_csv(text.as_bytes(), false) {
            Err(LscError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        match read_csv("0,1\n1,x\n".as_bytes(), false) {
            Err(LscError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match read_csv("label,f0\n0,1\n-1,2\n".as_bytes(), true) {
            Err(LscError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_csv("".as_bytes(), false), Err(LscError::Parse { .. })));
    }

    proptest! {
        #[test]
        fn csv_round_trip(k in 1usize..5, d in 1usize..6, per in 1usize..5, seed in 0u64..1000, header: bool) {
            let ds = gen_blobs(k, d, per, 1.5, seed).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf, header).unwrap();
            let back = read_csv(buf.as_slice(), header).unwrap();
            prop_assert_eq!(back.labels(), ds.labels());
            for (a, b) in back.features().iter().zip(ds.features()) {
                prop_assert_eq!(*a as f32, *b as f32);
            }
        }

        #[test]
        fn label_permutation_is_a_permutation(n in 1usize..50, seed in 0u64..100) {
            let mut p = random_label_permutation(n, seed);
            if n > 1 {
                prop_assert!(p.iter().enumerate().any(|(i, &v)| i != v));
            }
            p.sort_unstable();
            prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
    }
}
