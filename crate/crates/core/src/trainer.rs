//! Center-matching training: shuffled mini-batches, gather the target centers
//! of each batch, loss, backprop, AdamW.
//!
//! Only `batch_size x n_dim` center values are touched per step, whatever the
//! number of classes.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::encoder::{init_encoder, EncoderParams};
use crate::error::{LscError, Result};
use crate::metric::{
    assign_labels_dist, assign_one_cos, center_norms, gather_centers, loss_and_grad, norm, LabelMetric, LossKind,
};
use crate::optim::AdamW;
use crate::rootsys::{CenterMatrix, CenterSource};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub loss: LossKind,
    pub seed: u64,
    /// Train class `y` towards center `label_permutation[y]`.
    pub label_permutation: Option<Vec<usize>>,
    /// From this epoch count on (epochs numbered from 1, applied to epochs
    /// after it), use the second value as learning rate.
    pub lr_drop: Option<(usize, f64)>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let opt = AdamW::default();
        Self {
            epochs: 10,
            batch_size: 64,
            learning_rate: opt.learning_rate,
            weight_decay: opt.weight_decay,
            adam_beta1: opt.beta1,
            adam_beta2: opt.beta2,
            adam_eps: opt.eps,
            loss: LossKind::Cos,
            seed: 0,
            label_permutation: None,
            lr_drop: None,
        }
    }
}

impl TrainConfig {
    pub fn optimizer(&self, epoch: usize) -> AdamW {
        let learning_rate = match self.lr_drop {
            Some((after, rate)) if epoch > after => rate,
            _ => self.learning_rate,
        };
        AdamW {
            learning_rate,
            weight_decay: self.weight_decay,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(LscError::InvalidConfig("batch size must be positive".into()));
        }
        self.optimizer(0).validate()?;
        if let Some((_, rate)) = self.lr_drop {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(LscError::InvalidConfig(format!("dropped learning rate {rate} must be positive")));
            }
        }
        if let LossKind::Combined {
            weight_dist,
            weight_cos,
        } = self.loss
        {
            crate::metric::check_weights(weight_dist, weight_cos)?;
        }
        if let Some(p) = &self.label_permutation {
            check_permutation(p)?;
        }
        Ok(())
    }
}

fn check_permutation(p: &[usize]) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || std::mem::replace(&mut seen[v], true) {
            return Err(LscError::InvalidConfig("label permutation is not a permutation".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based, counted over the whole life of the state.
    pub epoch: usize,
    /// Mean batch loss.
    pub loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: EncoderParams,
    pub m: EncoderParams,
    pub v: EncoderParams,
    pub step: u64,
    pub history: Vec<EpochRecord>,
    pub rng: ChaCha8Rng,
}

impl TrainState {
    /// Fresh optimizer state around `params`; batch order is drawn from `seed`.
    pub fn new(params: EncoderParams, seed: u64) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            params,
            step: 0,
            history: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seeded encoder plus fresh state.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self> {
        Ok(Self::new(init_encoder(layer_dims, seed)?, seed))
    }

    pub fn epochs_done(&self) -> usize {
        self.history.len()
    }
}

/// What one optimizer step touched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub loss: f64,
    /// Center values materialized for the step (the gathered target rows).
    pub center_floats: usize,
}

fn targets(labels: &[usize], permutation: Option<&[usize]>) -> Vec<usize> {
    match permutation {
        Some(p) => labels.iter().map(|&y| p[y]).collect(),
        None => labels.to_vec(),
    }
}

fn check_compat(params: &EncoderParams, ds: &LabeledDataset, centers: &CenterMatrix) -> Result<()> {
    if params.output_dim() != centers.n_dim() {
        return Err(LscError::InvalidConfig(format!(
            "encoder output dimension {} differs from center dimension {}",
            params.output_dim(),
            centers.n_dim()
        )));
    }
    if params.input_dim() != ds.feature_dim() {
        return Err(LscError::InvalidConfig(format!(
            "encoder input dimension {} differs from feature dimension {}",
            params.input_dim(),
            ds.feature_dim()
        )));
    }
    if let Some((index, &label)) = ds.labels().iter().enumerate().find(|(_, &l)| l >= centers.n_classes()) {
        return Err(LscError::LabelRange {
            index,
            label,
            n_classes: centers.n_classes(),
        });
    }
    Ok(())
}

fn check_permutation_len(cfg: &TrainConfig, centers: &CenterMatrix) -> Result<()> {
    if let Some(p) = &cfg.label_permutation {
        if p.len() != centers.n_classes() {
            return Err(LscError::InvalidConfig(format!(
                "label permutation has {} entries for {} classes",
                p.len(),
                centers.n_classes()
            )));
        }
    }
    Ok(())
}

/// One forward/backward/update on a batch. `labels` are center indices
/// (already permuted if mixed labels are in use).
pub fn train_step(
    state: &mut TrainState,
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    centers: &CenterMatrix,
    loss: LossKind,
    opt: &AdamW,
) -> Result<StepReport> {
    let cache = state.params.forward_cached(x)?;
    let gathered = gather_centers(centers, labels)?;
    let (value, grad_z) = loss_and_grad(loss, cache.output().view(), labels, centers, gathered.view())?;
    if !value.is_finite() {
        return Err(LscError::Degenerate("non-finite batch loss".into()));
    }
    let grads = state.params.backward(&cache, grad_z.view())?;
    state.step += 1;
    opt.step(&mut state.params, &grads, &mut state.m, &mut state.v, state.step);
    Ok(StepReport {
        loss: value,
        center_floats: gathered.len(),
    })
}

/// Runs `cfg.epochs` epochs of shuffled mini-batches, appending one history
/// record per epoch. On a non-finite loss the state is rolled back to the
/// start of the failing epoch and a divergence error is returned.
pub fn train(state: &mut TrainState, ds: &LabeledDataset, centers: &CenterMatrix, cfg: &TrainConfig) -> Result<()> {
    cfg.validate()?;
    check_compat(&state.params, ds, centers)?;
    check_permutation_len(cfg, centers)?;
    if cfg.epochs > 0 && ds.is_empty() {
        return Err(LscError::EmptyInput("training set has no rows".into()));
    }
    let all_targets = targets(ds.labels(), cfg.label_permutation.as_deref());
    let metric = cfg.loss.label_metric();
    for _ in 0..cfg.epochs {
        let epoch = state.epochs_done() + 1;
        let snapshot = state.clone();
        let opt = cfg.optimizer(epoch);
        // a fresh permutation each epoch keeps resumed runs on the same path
        let mut order: Vec<usize> = (0..ds.len()).collect();
        order.shuffle(&mut state.rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let x = ds.features().select(Axis(0), chunk);
            let y: Vec<usize> = chunk.iter().map(|&i| all_targets[i]).collect();
            match train_step(state, x.view(), &y, centers, cfg.loss, &opt) {
                Ok(r) => total += r.loss,
                Err(LscError::Degenerate(_)) => {
                    *state = snapshot;
                    return Err(LscError::Divergence { epoch });
                }
                Err(e) => return Err(e),
            }
            batches += 1;
        }
        let loss = total / batches as f64;
        if !loss.is_finite() || !state.params.is_finite() {
            *state = snapshot;
            return Err(LscError::Divergence { epoch });
        }
        let train_accuracy = accuracy_against(&state.params, ds.features().view(), &all_targets, centers, metric)?;
        state.history.push(EpochRecord {
            epoch,
            loss,
            train_accuracy,
        });
    }
    Ok(())
}

fn accuracy_against(
    params: &EncoderParams,
    x: ArrayView2<'_, f64>,
    targets: &[usize],
    centers: &CenterMatrix,
    metric: LabelMetric,
) -> Result<f64> {
    if targets.is_empty() {
        return Err(LscError::EmptyInput("accuracy of an empty dataset".into()));
    }
    let z = params.forward(x)?;
    let hits = match metric {
        LabelMetric::Distance => {
            let predicted = assign_labels_dist(z.view(), centers)?;
            predicted.iter().zip(targets).filter(|(p, t)| p == t).count()
        }
        LabelMetric::Cosine => {
            // a zero embedding has no nearest direction and counts as a miss
            let norms = center_norms(centers);
            let mut hits = 0;
            for (row, &t) in z.outer_iter().zip(targets) {
                let row = row.to_vec();
                if norm(&row) > 0.0 && assign_one_cos(&row, centers, &norms)? == t {
                    hits += 1;
                }
            }
            hits
        }
    };
    Ok(hits as f64 / targets.len() as f64)
}

/// Fraction of rows whose most cosine-similar center is their own class.
pub fn eval_accuracy(params: &EncoderParams, ds: &LabeledDataset, centers: &CenterMatrix) -> Result<f64> {
    eval_accuracy_with(params, ds, centers, LabelMetric::Cosine, None)
}

/// [`eval_accuracy`] with an explicit label metric and optional label permutation.
pub fn eval_accuracy_with(
    params: &EncoderParams,
    ds: &LabeledDataset,
    centers: &CenterMatrix,
    metric: LabelMetric,
    permutation: Option<&[usize]>,
) -> Result<f64> {
    if ds.is_empty() {
        return Err(LscError::EmptyInput("evaluation set has no rows".into()));
    }
    check_compat(params, ds, centers)?;
    if let Some(p) = permutation {
        check_permutation(p)?;
        if p.len() != centers.n_classes() {
            return Err(LscError::InvalidConfig("label permutation does not match the class count".into()));
        }
    }
    accuracy_against(params, ds.features().view(), &targets(ds.labels(), permutation), centers, metric)
}

/// Per-class mean embeddings, usable as target centers.
pub fn extract_mean_embeddings(params: &EncoderParams, ds: &LabeledDataset) -> Result<CenterMatrix> {
    let z = params.forward(ds.features().view())?;
    let n = ds.n_classes();
    let mut sums = Array2::<f64>::zeros((n, z.ncols()));
    let mut counts = vec![0usize; n];
    for (&y, row) in ds.labels().iter().zip(z.outer_iter()) {
        let mut s = sums.row_mut(y);
        s += &row;
        counts[y] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(LscError::MissingClass(missing));
    }
    for (mut s, &c) in sums.outer_iter_mut().zip(&counts) {
        s /= c as f64;
    }
    CenterMatrix::new(sums, None, CenterSource::CEembs)
}

/// Trains a fresh student (seeded by `cfg.seed`) with the cosine loss against
/// the teacher's per-class mean embeddings. The teacher runs once, up front.
pub fn distill(
    teacher: &EncoderParams,
    student_layer_dims: &[usize],
    ds: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(TrainState, CenterMatrix)> {
    let out = *student_layer_dims
        .last()
        .ok_or_else(|| LscError::InvalidArchitecture("empty student dimensions".into()))?;
    if out != teacher.output_dim() {
        return Err(LscError::InvalidArchitecture(format!(
            "student output dimension {out} differs from teacher output dimension {}",
            teacher.output_dim()
        )));
    }
    if student_layer_dims[0] != teacher.input_dim() {
        return Err(LscError::InvalidArchitecture(format!(
            "student input dimension {} differs from teacher input dimension {}",
            student_layer_dims[0],
            teacher.input_dim()
        )));
    }
    let centers = extract_mean_embeddings(teacher, ds)?;
    let mut state = TrainState::init(student_layer_dims, cfg.seed)?;
    let cfg = TrainConfig {
        loss: LossKind::Cos,
        ..cfg.clone()
    };
    train(&mut state, ds, &centers, &cfg)?;
    Ok((state, centers))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinualReport {
    pub old_accuracy_before: f64,
    pub old_accuracy_after: f64,
    /// `None` when the new dataset is empty.
    pub new_accuracy_after: Option<f64>,
    pub param_count_before: usize,
    pub param_count_after: usize,
}

/// Resumes training on `old_data` plus `new_data` against `extended`, whose
/// leading rows must equal `old_centers` bit for bit.
pub fn continual_extend(
    state: &mut TrainState,
    old_centers: &CenterMatrix,
    old_data: &LabeledDataset,
    new_data: &LabeledDataset,
    extended: &CenterMatrix,
    cfg: &TrainConfig,
) -> Result<ContinualReport> {
    old_centers.check_prefix_of(extended)?;
    let metric = cfg.loss.label_metric();
    let param_count_before = state.params.param_count();
    let old_accuracy_before = eval_accuracy_with(&state.params, old_data, old_centers, metric, None)?;
    let combined = if new_data.is_empty() {
        old_data.clone()
    } else {
        old_data.concat(new_data)?
    };
    let combined = LabeledDataset::new(
        combined.features().clone(),
        combined.labels().to_vec(),
        extended.n_classes(),
        combined.split(),
    )?;
    train(state, &combined, extended, cfg)?;
    let old_accuracy_after = eval_accuracy_with(&state.params, &widen(old_data, extended)?, extended, metric, None)?;
    let new_accuracy_after = if new_data.is_empty() {
        None
    } else {
        Some(eval_accuracy_with(&state.params, &widen(new_data, extended)?, extended, metric, None)?)
    };
    Ok(ContinualReport {
        old_accuracy_before,
        old_accuracy_after,
        new_accuracy_after,
        param_count_before,
        param_count_after: state.params.param_count(),
    })
}

fn widen(ds: &LabeledDataset, centers: &CenterMatrix) -> Result<LabeledDataset> {
    LabeledDataset::new(ds.features().clone(), ds.labels().to_vec(), centers.n_classes(), ds.split())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_blobs, Split};
    use crate::encoder::Layer;
    use crate::rootsys::gen_rotation_2d;
    use ndarray::{array, Array1};
    use rand::Rng;

    fn blobs10() -> LabeledDataset {
        gen_blobs(10, 2, 30, 0.5, 1).unwrap()
    }

    fn quick_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 32,
            learning_rate: 3e-3,
            loss: LossKind::Dist,
            seed: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_changes_nothing() {
        let ds = blobs10();
        let c = gen_rotation_2d(10, 5.0, 1.0).unwrap();
        let mut s = TrainState::init(&[2, 16, 2], 3).unwrap();
        let before = s.clone();
        train(&mut s, &ds, &c, &quick_cfg(0)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let ds = blobs10();
        let c = gen_rotation_2d(10, 5.0, 1.0).unwrap();
        let run = || {
            let mut s = TrainState::init(&[2, 32, 32, 2], 3).unwrap();
            train(&mut s, &ds, &c, &quick_cfg(40)).unwrap();
            s
        };
        let a = run();
        assert_eq!(a, run());
        assert_eq!(a.history.len(), 40);
        assert_eq!(a.history[39].epoch, 40);
        assert!(a.history[39].train_accuracy > a.history[0].train_accuracy);
        assert!(a.history[39].loss < a.history[0].loss);
    }

    #[test]
    fn train_rejects_bad_inputs() {
        let ds = blobs10();
        let c = gen_rotation_2d(10, 5.0, 1.0).unwrap();
        let mut s = TrainState::init(&[2, 8, 3], 0).unwrap();
        assert!(matches!(train(&mut s, &ds, &c, &quick_cfg(1)), Err(LscError::InvalidConfig(_))));
        let c5 = gen_rotation_2d(5, 5.0, 1.0).unwrap();
        let mut s = TrainState::init(&[2, 8, 2], 0).unwrap();
        assert!(matches!(train(&mut s, &ds, &c5, &quick_cfg(1)), Err(LscError::LabelRange { .. })));
        let bad = TrainConfig {
            label_permutation: Some(vec![0, 0, 1]),
            ..quick_cfg(1)
        };
        assert!(matches!(train(&mut s, &ds, &c, &bad), Err(LscError::InvalidConfig(_))));
    }

    #[test]
    fn divergence_rolls_back_to_epoch_start() {
        let ds = blobs10();
        let c = gen_rotation_2d(10, 5.0, 1.0).unwrap();
        // huge weights push the distance loss to exp overflow
        let mut s = TrainState::init(&[2, 4, 2], 0).unwrap();
        for l in s.params.layers_mut() {
            l.weight.mapv_inplace(|w| w * 1e4);
        }
        let before = s.clone();
        let err = train(&mut s, &ds, &c, &quick_cfg(3)).unwrap_err();
        assert!(matches!(err, LscError::Divergence { epoch: 1 }));
        assert_eq!(err.exit_code(), crate::error::exit_code::DIVERGENCE);
        assert_eq!(s, before);
    }

    #[test]
    fn step_touches_batch_sized_center_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Array2::from_shape_simple_fn((16, 4), || rng.random_range(-1.0..1.0));
        for n_classes in [10usize, 1000, 100_000] {
            let c = CenterMatrix::new(
                Array2::from_shape_simple_fn((n_classes, 8), || rng.random_range(-1.0..1.0)),
                None,
                CenterSource::Custom,
            )
            .unwrap();
            let labels: Vec<usize> = (0..16).map(|i| (i * 7919) % n_classes).collect();
            let mut s = TrainState::init(&[4, 12, 8], 1).unwrap();
            let r = train_step(&mut s, x.view(), &labels, &c, LossKind::Cos, &AdamW::default()).unwrap();
            assert_eq!(r.center_floats, 16 * 8);
            assert_eq!(s.params.param_count(), 4 * 12 + 12 + 12 * 8 + 8);
        }
    }

    #[test]
    fn eval_examples() {
        // identity encoder on samples sitting on the centers
        let c = gen_rotation_2d(4, 5.0, 1.0).unwrap();
        let ds = LabeledDataset::new(c.centers().to_owned(), vec![0, 1, 2, 3], 4, Split::Eval).unwrap();
        let id = EncoderParams::from_layers(vec![Layer {
            weight: Array2::eye(2),
            bias: Array1::zeros(2),
        }])
        .unwrap();
        assert_eq!(eval_accuracy(&id, &ds, &c).unwrap(), 1.0);
        // every label moved to another class
        let shifted = LabeledDataset::new(c.centers().to_owned(), vec![1, 2, 3, 0], 4, Split::Eval).unwrap();
        assert_eq!(eval_accuracy(&id, &shifted, &c).unwrap(), 0.0);
        assert!(eval_accuracy(&id, &shifted, &c).unwrap() <= 1.0 - 1.0 / 4.0);
        let empty = ds.select(&[]);
        assert!(matches!(eval_accuracy(&id, &empty, &c), Err(LscError::EmptyInput(_))));
    }

    #[test]
    fn untrained_encoder_is_near_chance() {
        let c = gen_rotation_2d(10, 5.0, 1.0).unwrap();
        let mut total = 0.0;
        let seeds = 40;
        for seed in 0..seeds {
            let ds = gen_blobs(10, 2, 50, 0.5, seed).unwrap();
            let p = init_encoder(&[2, 32, 2], 1000 + seed).unwrap();
            total += eval_accuracy(&p, &ds, &c).unwrap();
        }
        let mean = total / seeds as f64;
        assert!((mean - 0.1).abs() <= 0.05, "mean untrained accuracy {mean}");
    }

    #[test]
    fn mean_embeddings_match_hand_computation() {
        let id = EncoderParams::from_layers(vec![Layer {
            weight: Array2::eye(2),
            bias: Array1::zeros(2),
        }])
        .unwrap();
        let x = array![[1.0, 2.0], [3.0, 4.0], [-1.0, 0.5], [5.0, 0.0]];
        let ds = LabeledDataset::new(x.clone(), vec![0, 1, 1, 0], 2, Split::Train).unwrap();
        let c = extract_mean_embeddings(&id, &ds).unwrap();
        assert_eq!(c.row(0), &[3.0, 1.0]);
        assert_eq!(c.row(1), &[1.0, 2.25]);
        assert_eq!(c.source(), &CenterSource::CEembs);
        // duplicating rows keeps the means
        let dup = ds.concat(&ds).unwrap();
        assert_eq!(extract_mean_embeddings(&id, &dup).unwrap(), c);
        // one sample per class is that sample
        let single = ds.select(&[0, 1]);
        let c1 = extract_mean_embeddings(&id, &single).unwrap();
        assert_eq!(c1.row(0), &[1.0, 2.0]);
        let missing = LabeledDataset::new(x, vec![0, 0, 2, 2], 3, Split::Train).unwrap();
        assert!(matches!(extract_mean_embeddings(&id, &missing), Err(LscError::MissingClass(1))));
    }

    #[test]
    fn distill_checks_dimensions() {
        let ds = blobs10();
        let teacher = init_encoder(&[2, 32, 3], 5).unwrap();
        assert!(matches!(
            distill(&teacher, &[2, 8, 4], &ds, &quick_cfg(0)),
            Err(LscError::InvalidArchitecture(_))
        ));
        let (s, c) = distill(&teacher, &[2, 4, 3], &ds, &quick_cfg(0)).unwrap();
        assert!(s.history.is_empty());
        assert_eq!(c.n_classes(), 10);
    }

    #[test]
    fn continual_guards_prefix_and_keeps_shape() {
        let all = gen_blobs(6, 2, 20, 0.5, 2).unwrap();
        let old = LabeledDataset::new(all.features().slice(ndarray::s![..80, ..]).to_owned(), all.labels()[..80].to_vec(), 4, Split::Train).unwrap();
        let new = all.select(&(80..120).collect::<Vec<_>>());
        let c4 = gen_rotation_2d(4, 5.0, 1.0).unwrap();
        let c6 = gen_rotation_2d(6, 5.0, 1.0).unwrap();
        let mut s = TrainState::init(&[2, 16, 2], 0).unwrap();
        let r = continual_extend(&mut s, &c4, &old, &new, &c6, &quick_cfg(2)).unwrap();
        assert_eq!(r.param_count_before, r.param_count_after);
        assert!(r.new_accuracy_after.is_some());

        let mut moved = c6.centers().to_owned();
        moved[[1, 0]] += 1e-12;
        let drifted = CenterMatrix::new(moved, c6.radii().map(|r| r.to_vec()), c6.source().clone()).unwrap();
        let before = s.clone();
        assert!(matches!(
            continual_extend(&mut s, &c4, &old, &new, &drifted, &quick_cfg(2)),
            Err(LscError::CenterDrift { row: 1 })
        ));
        assert_eq!(s, before);

        let empty = new.select(&[]);
        let r = continual_extend(&mut s, &c4, &old, &empty, &c4, &quick_cfg(1)).unwrap();
        assert_eq!(r.new_accuracy_after, None);
    }
}
