//! Metrics, losses, gradients and label functions for center matching.
//!
//! Two metrics are supported. The distance metric penalizes embeddings that
//! leave a ball of radius `r_c` around their class center,
//! `f_d(x, r_c) = exp(max(x - r_c, 0)) - 1`, summed over the batch, and labels
//! by the nearest center. The cosine metric averages `1 - cos(z_j, c_j)` over
//! the batch and labels by the most similar center.
//!
//! Label ties go to the lowest class index everywhere, so the brute-force
//! routines here and the structured search in [`crate::fastassign`] agree
//! exactly.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{LscError, Result};
use crate::rootsys::CenterMatrix;

/// A batch loss: the reduced value and the per-sample terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub per_sample: Vec<f64>,
}

/// Which loss drives training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    Cos,
    Dist,
    Combined { weight_dist: f64, weight_cos: f64 },
}

impl LossKind {
    pub const COMBINED_DEFAULT: LossKind = LossKind::Combined {
        weight_dist: 1.0,
        weight_cos: 1.0,
    };

    /// Distance-trained models are scored by nearest center, all others by cosine.
    pub fn label_metric(self) -> LabelMetric {
        match self {
            LossKind::Dist => LabelMetric::Distance,
            _ => LabelMetric::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMetric {
    Cosine,
    Distance,
}

/// Sequential dot product. Kept strictly left-to-right so that sparse
/// shortcuts can reproduce the exact same rounding.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity from a precomputed dot product and norms. Every cosine
/// in the crate goes through this expression.
#[inline]
pub fn cos_from_parts(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    dot / (norm_a * norm_b)
}

fn row_vec(row: ArrayView1<'_, f64>) -> std::borrow::Cow<'_, [f64]> {
    match row.to_slice() {
        Some(s) => std::borrow::Cow::Borrowed(s),
        None => std::borrow::Cow::Owned(row.to_vec()),
    }
}

fn nonzero_norm(v: &[f64], what: impl FnOnce() -> String) -> Result<f64> {
    let n = norm(v);
    if n == 0.0 {
        return Err(LscError::Degenerate(what()));
    }
    Ok(n)
}

/// `a . b / (|a| |b|)`.
pub fn cos_sim(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(LscError::Shape(format!("vector lengths {} and {}", a.len(), b.len())));
    }
    let na = nonzero_norm(a, || "first argument is the zero vector".into())?;
    let nb = nonzero_norm(b, || "second argument is the zero vector".into())?;
    Ok(cos_from_parts(dot(a, b), na, nb))
}

pub fn cos_dist(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(1.0 - cos_sim(a, b)?)
}

fn check_labels(labels: &[usize], n_classes: usize) -> Result<()> {
    match labels.iter().position(|&y| y >= n_classes) {
        Some(index) => Err(LscError::LabelRange {
            index,
            label: labels[index],
            n_classes,
        }),
        None => Ok(()),
    }
}

/// Row `j` of the result is the center of `labels[j]`. The result has one row
/// per label whatever the number of classes.
pub fn gather_centers(centers: &CenterMatrix, labels: &[usize]) -> Result<Array2<f64>> {
    check_labels(labels, centers.n_classes())?;
    let d = centers.n_dim();
    let mut out = Array2::<f64>::zeros((labels.len(), d));
    for (mut row, &y) in out.outer_iter_mut().zip(labels) {
        row.as_slice_mut()
            .expect("fresh array is contiguous")
            .copy_from_slice(centers.row(y));
    }
    Ok(out)
}

fn check_same_shape(z: ArrayView2<'_, f64>, c: ArrayView2<'_, f64>) -> Result<()> {
    if z.dim() != c.dim() {
        return Err(LscError::Shape(format!("embeddings {:?} vs centers {:?}", z.dim(), c.dim())));
    }
    if z.nrows() == 0 {
        return Err(LscError::EmptyInput("empty batch".into()));
    }
    Ok(())
}

/// Mean cosine distance between each embedding and its gathered center.
pub fn cos_loss(z: ArrayView2<'_, f64>, gathered: ArrayView2<'_, f64>) -> Result<LossValue> {
    check_same_shape(z, gathered)?;
    let mut per_sample = Vec::with_capacity(z.nrows());
    for (j, (zr, cr)) in z.outer_iter().zip(gathered.outer_iter()).enumerate() {
        let (zr, cr) = (row_vec(zr), row_vec(cr));
        let nz = nonzero_norm(&zr, || format!("embedding row {j} is zero"))?;
        let nc = nonzero_norm(&cr, || format!("center row {j} is zero"))?;
        per_sample.push(1.0 - cos_from_parts(dot(&zr, &cr), nz, nc));
    }
    let value = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    Ok(LossValue { value, per_sample })
}

/// Gradient of [`cos_loss`] with respect to the embeddings:
/// `-(1/b) (c/(|z||c|) - (z.c) z/(|z|^3 |c|))` per row.
pub fn cos_loss_grad(z: ArrayView2<'_, f64>, gathered: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_same_shape(z, gathered)?;
    let b = z.nrows() as f64;
    let mut grad = Array2::<f64>::zeros(z.dim());
    for (j, ((zr, cr), mut g)) in z
        .outer_iter()
        .zip(gathered.outer_iter())
        .zip(grad.outer_iter_mut())
        .enumerate()
    {
        let (zr, cr) = (row_vec(zr), row_vec(cr));
        let nz = nonzero_norm(&zr, || format!("embedding row {j} is zero"))?;
        let nc = nonzero_norm(&cr, || format!("center row {j} is zero"))?;
        let zc = dot(&zr, &cr);
        let a = 1.0 / (nz * nc);
        let s = zc / (nz * nz * nz * nc);
        for ((gk, zk), ck) in g.iter_mut().zip(zr.iter()).zip(cr.iter()) {
            *gk = -(a * ck - s * zk) / b;
        }
    }
    Ok(grad)
}

/// `exp(max(x - r_c, 0)) - 1`: zero inside the class ball, growing beyond it.
#[inline]
pub fn fd(x: f64, r_c: f64) -> f64 {
    (x - r_c).max(0.0).exp() - 1.0
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

fn check_dims(z: ArrayView2<'_, f64>, centers: &CenterMatrix) -> Result<()> {
    if z.ncols() != centers.n_dim() {
        return Err(LscError::Shape(format!(
            "embedding dimension {} vs center dimension {}",
            z.ncols(),
            centers.n_dim()
        )));
    }
    Ok(())
}

/// Sum over the batch of `f_d(|z_j - C[y_j]|, r_{y_j})`.
pub fn dist_loss(z: ArrayView2<'_, f64>, labels: &[usize], centers: &CenterMatrix) -> Result<LossValue> {
    check_dims(z, centers)?;
    if labels.len() != z.nrows() {
        return Err(LscError::Shape(format!("{} labels for {} embeddings", labels.len(), z.nrows())));
    }
    check_labels(labels, centers.n_classes())?;
    let per_sample: Vec<f64> = z
        .outer_iter()
        .zip(labels)
        .map(|(zr, &y)| fd(euclid(&row_vec(zr), centers.row(y)), centers.radius(y)))
        .collect();
    Ok(LossValue {
        value: per_sample.iter().sum(),
        per_sample,
    })
}

/// Gradient of [`dist_loss`]; zero for samples inside (or on) their class ball.
pub fn dist_loss_grad(z: ArrayView2<'_, f64>, labels: &[usize], centers: &CenterMatrix) -> Result<Array2<f64>> {
    check_dims(z, centers)?;
    check_labels(labels, centers.n_classes())?;
    let mut grad = Array2::<f64>::zeros(z.dim());
    for ((zr, &y), mut g) in z.outer_iter().zip(labels).zip(grad.outer_iter_mut()) {
        let zr = row_vec(zr);
        let c = centers.row(y);
        let x = euclid(&zr, c);
        let r = centers.radius(y);
        if x > r {
            let scale = (x - r).exp() / x;
            for ((gk, zk), ck) in g.iter_mut().zip(zr.iter()).zip(c) {
                *gk = scale * (zk - ck);
            }
        }
    }
    Ok(grad)
}

/// `weight_dist * dist_loss + weight_cos * cos_loss`.
pub fn combined_loss(
    z: ArrayView2<'_, f64>,
    labels: &[usize],
    centers: &CenterMatrix,
    weight_dist: f64,
    weight_cos: f64,
) -> Result<LossValue> {
    check_weights(weight_dist, weight_cos)?;
    let d = dist_loss(z, labels, centers)?;
    let gathered = gather_centers(centers, labels)?;
    let c = cos_loss(z, gathered.view())?;
    let b = z.nrows() as f64;
    // per-sample terms chosen so that their sum reproduces the combined value
    let per_sample = d
        .per_sample
        .iter()
        .zip(&c.per_sample)
        .map(|(dj, cj)| weight_dist * dj + weight_cos * cj / b)
        .collect();
    Ok(LossValue {
        value: weight_dist * d.value + weight_cos * c.value,
        per_sample,
    })
}

pub(crate) fn check_weights(weight_dist: f64, weight_cos: f64) -> Result<()> {
    if !(weight_dist >= 0.0 && weight_cos >= 0.0) || (weight_dist == 0.0 && weight_cos == 0.0) {
        return Err(LscError::InvalidConfig(format!(
            "loss weights must be non-negative and not both zero (dist {weight_dist}, cos {weight_cos})"
        )));
    }
    Ok(())
}

/// Cosine loss and gradient for training. An embedding row that is exactly
/// zero has no direction; it contributes `1 - 0` to the loss and no gradient
/// instead of failing the whole batch.
pub fn cos_loss_and_grad_lenient(z: ArrayView2<'_, f64>, gathered: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
    check_same_shape(z, gathered)?;
    let b = z.nrows() as f64;
    let mut total = 0.0;
    let mut grad = Array2::<f64>::zeros(z.dim());
    for (j, ((zr, cr), mut g)) in z
        .outer_iter()
        .zip(gathered.outer_iter())
        .zip(grad.outer_iter_mut())
        .enumerate()
    {
        let (zr, cr) = (row_vec(zr), row_vec(cr));
        let nc = nonzero_norm(&cr, || format!("center row {j} is zero"))?;
        let nz = norm(&zr);
        if nz == 0.0 {
            total += 1.0;
            continue;
        }
        let zc = dot(&zr, &cr);
        total += 1.0 - cos_from_parts(zc, nz, nc);
        let a = 1.0 / (nz * nc);
        let s = zc / (nz * nz * nz * nc);
        for ((gk, zk), ck) in g.iter_mut().zip(zr.iter()).zip(cr.iter()) {
            *gk = -(a * ck - s * zk) / b;
        }
    }
    Ok((total / b, grad))
}

/// Loss value and embedding gradient for any [`LossKind`], as used by the
/// training loop (see [`cos_loss_and_grad_lenient`] for zero embeddings).
pub fn loss_and_grad(
    kind: LossKind,
    z: ArrayView2<'_, f64>,
    labels: &[usize],
    centers: &CenterMatrix,
    gathered: ArrayView2<'_, f64>,
) -> Result<(f64, Array2<f64>)> {
    match kind {
        LossKind::Cos => cos_loss_and_grad_lenient(z, gathered),
        LossKind::Dist => Ok((dist_loss(z, labels, centers)?.value, dist_loss_grad(z, labels, centers)?)),
        LossKind::Combined {
            weight_dist,
            weight_cos,
        } => {
            check_weights(weight_dist, weight_cos)?;
            let mut value = 0.0;
            let mut grad = Array2::<f64>::zeros(z.dim());
            if weight_dist > 0.0 {
                value += weight_dist * dist_loss(z, labels, centers)?.value;
                grad.scaled_add(weight_dist, &dist_loss_grad(z, labels, centers)?);
            }
            if weight_cos > 0.0 {
                let (v, g) = cos_loss_and_grad_lenient(z, gathered)?;
                value += weight_cos * v;
                grad.scaled_add(weight_cos, &g);
            }
            Ok((value, grad))
        }
    }
}

/// Nearest center by Euclidean distance; ties go to the lowest class index.
pub fn assign_labels_dist(z: ArrayView2<'_, f64>, centers: &CenterMatrix) -> Result<Vec<usize>> {
    check_dims(z, centers)?;
    Ok(z
        .outer_iter()
        .map(|zr| {
            let zr = row_vec(zr);
            let mut best = (f64::INFINITY, 0);
            for class in 0..centers.n_classes() {
                let d = euclid(&zr, centers.row(class));
                if d < best.0 {
                    best = (d, class);
                }
            }
            best.1
        })
        .collect())
}

/// Precomputed center norms for repeated cosine labelling.
pub fn center_norms(centers: &CenterMatrix) -> Vec<f64> {
    (0..centers.n_classes()).map(|c| norm(centers.row(c))).collect()
}

/// Most cosine-similar center for one embedding, by brute force.
pub fn assign_one_cos(z: &[f64], centers: &CenterMatrix, norms: &[f64]) -> Result<usize> {
    let nz = nonzero_norm(z, || "embedding is the zero vector".into())?;
    let mut best = (f64::NEG_INFINITY, 0);
    for class in 0..centers.n_classes() {
        let s = cos_from_parts(dot(z, centers.row(class)), nz, norms[class]);
        if s > best.0 {
            best = (s, class);
        }
    }
    Ok(best.1)
}

/// Most cosine-similar center per row; ties go to the lowest class index.
pub fn assign_labels_cos(z: ArrayView2<'_, f64>, centers: &CenterMatrix) -> Result<Vec<usize>> {
    check_dims(z, centers)?;
    let norms = center_norms(centers);
    z.outer_iter()
        .enumerate()
        .map(|(j, zr)| {
            assign_one_cos(&row_vec(zr), centers, &norms).map_err(|_| {
                LscError::Degenerate(format!("embedding row {j} is the zero vector"))
            })
        })
        .collect()
}

pub fn assign_labels(metric: LabelMetric, z: ArrayView2<'_, f64>, centers: &CenterMatrix) -> Result<Vec<usize>> {
    match metric {
        LabelMetric::Cosine => assign_labels_cos(z, centers),
        LabelMetric::Distance => assign_labels_dist(z, centers),
    }
}
