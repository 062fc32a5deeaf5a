//! The `lsc` command line. Every command is deterministic given its flags.
//!
//! Exit codes: 0 success, 1 other failure, 2 parse or format error,
//! 3 configuration error, 4 divergence, 5 capacity.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;

use crate::data::{gen_blobs, load_csv, random_label_permutation, save_csv, unique_label_expand, LabeledDataset};
use crate::error::{exit_code, LscError, Result};
use crate::fastassign::build_index;
use crate::io::{
    load_centers, load_checkpoint, save_centers, save_checkpoint, save_configuration, write_embeddings_csv,
    write_metrics_csv, Checkpoint, CentersMeta, LoadedCenters,
};
use crate::metric::{assign_labels_cos, LabelMetric, LossKind};
use crate::report::report_params;
use crate::rootsys::{
    gen_an_roots, gen_rotation_2d, interpolate, min_n_dim, positive_subset, project_drop, project_isometric, shuffle,
    CenterConfiguration, CenterMatrix, Family, Projection,
};
use crate::trainer::{continual_extend, distill, eval_accuracy_with, train, TrainConfig, TrainState};

#[derive(Debug, Parser)]
#[command(name = "lsc", version, about = "Center-matching training with predefined latent-space configurations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a center configuration file.
    Gen(GenArgs),
    /// Generate a synthetic Gaussian-blob dataset.
    Blobs(BlobsArgs),
    /// Train an encoder against a center file.
    Train(TrainArgs),
    /// Accuracy of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// One nearest-center label per input row.
    Assign(AssignArgs),
    /// Extend a trained model to new classes.
    Continual(ContinualArgs),
    /// Train a student on a teacher's per-class mean embeddings.
    Distill(DistillArgs),
    /// Parameter counts of center matching versus a classification head.
    ReportParams(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    An,
    Anp,
    Anr,
    Rotation2d,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProjectionArg {
    None,
    Drop,
    Isometric,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum LossArg {
    Cos,
    Dist,
    Combined,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Cos,
    Dist,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Root-system rank.
    #[arg(long, conflicts_with = "min_for")]
    pub n: Option<usize>,
    /// Pick the smallest rank that holds this many classes (and keep that many).
    #[arg(long)]
    pub min_for: Option<usize>,
    #[arg(long, value_enum, default_value = "none")]
    pub projection: ProjectionArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub interpolation: u32,
    /// Keep only the first k vectors.
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    pub circle_radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub base_radius: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BlobsArgs {
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub per_class: usize,
    #[arg(long, default_value_t = crate::data::DEFAULT_SPREAD)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Give every row its own class.
    #[arg(long)]
    pub unique_labels: bool,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimArgs {
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Switch to `--lr-drop-to` after this many epochs.
    #[arg(long, requires = "lr_drop_to")]
    pub lr_drop_after: Option<usize>,
    #[arg(long, requires = "lr_drop_after")]
    pub lr_drop_to: Option<f64>,
}

impl OptimArgs {
    fn config(&self, loss: LossKind) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            weight_decay: self.weight_decay,
            loss,
            seed: self.seed,
            lr_drop: self.lr_drop_after.zip(self.lr_drop_to),
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub centers: PathBuf,
    #[arg(long, value_enum, default_value = "cos")]
    pub loss: LossArg,
    #[arg(long, default_value_t = 1.0)]
    pub weight_dist: f64,
    #[arg(long, default_value_t = 1.0)]
    pub weight_cos: f64,
    #[command(flatten)]
    pub optim: OptimArgs,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    pub hidden: Vec<usize>,
    /// Train every class towards a seeded random other class's center.
    #[arg(long)]
    pub permute_labels: bool,
    /// Continue from this checkpoint instead of a fresh encoder.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Final embeddings of the training rows.
    #[arg(long)]
    pub embeddings_out: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub centers: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Label metric; defaults to the one the checkpoint was trained with.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[arg(long)]
    pub centers: PathBuf,
    /// CSV of vectors, one per row. Without `--checkpoint` they are embeddings.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// The first column is a label and is skipped.
    #[arg(long)]
    pub labeled: bool,
    /// Brute-force scan instead of the structured search.
    #[arg(long)]
    pub oracle: bool,
    /// Print the k best classes per row instead of one.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct ContinualArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub old_centers: PathBuf,
    #[arg(long)]
    pub extended_centers: PathBuf,
    #[arg(long)]
    pub old_data: PathBuf,
    #[arg(long)]
    pub new_data: PathBuf,
    #[command(flatten)]
    pub optim: OptimArgs,
    #[arg(long)]
    pub checkpoint_out: Option<PathBuf>,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    #[arg(long)]
    pub teacher: PathBuf,
    /// Centers the teacher was trained on, for reporting its accuracy.
    #[arg(long)]
    pub teacher_centers: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    pub hidden: Vec<usize>,
    #[command(flatten)]
    pub optim: OptimArgs,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub centers_out: Option<PathBuf>,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value_t = 384)]
    pub n_dim: u64,
    /// Backbone parameter count; scientific notation such as 22e6 is accepted.
    #[arg(long, value_parser = parse_count)]
    pub backbone: u64,
    #[arg(long, value_delimiter = ',', value_parser = parse_count, required = true)]
    pub classes: Vec<u64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 {
        Ok(f as u64)
    } else {
        Err(format!("{s:?} is not a whole non-negative count"))
    }
}

fn loss_kind(loss: LossArg, weight_dist: f64, weight_cos: f64) -> LossKind {
    match loss {
        LossArg::Cos => LossKind::Cos,
        LossArg::Dist => LossKind::Dist,
        LossArg::Combined => LossKind::Combined {
            weight_dist,
            weight_cos,
        },
    }
}

fn projection(p: ProjectionArg) -> Projection {
    match p {
        ProjectionArg::None => Projection::None,
        ProjectionArg::Drop => Projection::DropLast,
        ProjectionArg::Isometric => Projection::Isometric,
    }
}

/// Builds the configuration that `gen` writes.
pub fn build_configuration(
    family: Family,
    rank: usize,
    seed: u64,
    interpolation: u32,
    proj: Projection,
) -> Result<CenterConfiguration> {
    let full = gen_an_roots(rank)?;
    let base = match family {
        Family::An => full,
        Family::Anp => positive_subset(&full)?,
        Family::Anr => shuffle(&full, seed)?,
        other => return Err(LscError::InvalidInput(format!("{} is not a root family", other.as_str()))),
    };
    let cfg = interpolate(&base, interpolation)?;
    match proj {
        Projection::None => Ok(cfg),
        Projection::DropLast => project_drop(&cfg),
        Projection::Isometric => project_isometric(&cfg),
    }
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    if let FamilyArg::Rotation2d = a.family {
        let k = a
            .classes
            .or(a.min_for)
            .ok_or_else(|| LscError::InvalidConfig("rotation2d needs --classes".into()))?;
        let c = gen_rotation_2d(k, a.circle_radius, a.base_radius)?;
        save_centers(&a.out, &c, &CentersMeta::plain(Family::Rotation2D, c.radii()))?;
        writeln!(out, "wrote {} centers, n_dim 2, to {}", k, a.out.display())?;
        return Ok(());
    }
    let family = match a.family {
        FamilyArg::An => Family::An,
        FamilyArg::Anp => Family::Anp,
        _ => Family::Anr,
    };
    let (rank, wanted) = match (a.n, a.min_for) {
        (Some(n), _) => (n, a.classes),
        (None, Some(k)) => {
            // the positive subset holds half as many roots
            let need = if family == Family::Anp { k.saturating_mul(2) } else { k };
            (min_n_dim(need, a.interpolation)?, Some(a.classes.unwrap_or(k)))
        }
        (None, None) => return Err(LscError::InvalidConfig("give --n or --min-for".into())),
    };
    let cfg = build_configuration(family, rank, a.seed, a.interpolation, projection(a.projection))?;
    let k = wanted.unwrap_or(cfg.len());
    if k > cfg.len() {
        let need = if family == Family::Anp { k.saturating_mul(2) } else { k };
        return Err(LscError::Capacity {
            n_classes: k,
            suggested_rank: min_n_dim(need, a.interpolation)?,
        });
    }
    save_configuration(&a.out, &cfg, k)?;
    writeln!(
        out,
        "wrote {} of {} vectors (rank {}, n_dim {}) to {}",
        k,
        cfg.len(),
        rank,
        cfg.ambient_dim(),
        a.out.display()
    )?;
    Ok(())
}

fn cmd_blobs(a: &BlobsArgs, out: &mut dyn Write) -> Result<()> {
    let mut ds = gen_blobs(a.classes, a.dim, a.per_class, a.spread, a.seed)?;
    if a.unique_labels {
        ds = unique_label_expand(&ds);
    }
    save_csv(&ds, &a.out, a.header)?;
    writeln!(out, "wrote {} rows, {} classes, to {}", ds.len(), ds.n_classes(), a.out.display())?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_history(path: Option<&PathBuf>, state: &TrainState) -> Result<()> {
    if let Some(p) = path {
        write_metrics_csv(create(p)?, &state.history)?;
    }
    Ok(())
}

fn finish_run(
    state: &TrainState,
    loss: LossKind,
    label_permutation: Option<Vec<usize>>,
    checkpoint: Option<&PathBuf>,
    metrics: Option<&PathBuf>,
) -> Result<()> {
    write_history(metrics, state)?;
    if let Some(p) = checkpoint {
        save_checkpoint(
            p,
            &Checkpoint {
                state: state.clone(),
                loss,
                label_permutation,
            },
        )?;
    }
    Ok(())
}

fn dataset_for(ds: LabeledDataset, centers: &CenterMatrix) -> Result<LabeledDataset> {
    LabeledDataset::new(ds.features().clone(), ds.labels().to_vec(), centers.n_classes(), ds.split())
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let LoadedCenters { centers, .. } = load_centers(&a.centers)?;
    let ds = load_csv(&a.data, a.header)?;
    if let Some((index, &label)) = ds.labels().iter().enumerate().find(|(_, &l)| l >= centers.n_classes()) {
        return Err(LscError::LabelRange {
            index,
            label,
            n_classes: centers.n_classes(),
        });
    }
    let ds = dataset_for(ds, &centers)?;
    let loss = loss_kind(a.loss, a.weight_dist, a.weight_cos);
    let mut cfg = a.optim.config(loss);
    if a.permute_labels {
        cfg.label_permutation = Some(random_label_permutation(centers.n_classes(), a.optim.seed));
    }
    let mut state = match &a.resume {
        Some(p) => {
            let ck = load_checkpoint(p)?;
            if ck.label_permutation.is_some() && !a.permute_labels {
                cfg.label_permutation = ck.label_permutation.clone();
            }
            ck.state
        }
        None => {
            let mut dims = vec![ds.feature_dim()];
            dims.extend(&a.hidden);
            dims.push(centers.n_dim());
            TrainState::init(&dims, a.optim.seed)?
        }
    };
    if state.params.output_dim() != centers.n_dim() || state.params.input_dim() != ds.feature_dim() {
        return Err(LscError::InvalidConfig(format!(
            "encoder maps {} -> {} but data has {} features and centers have n_dim {}",
            state.params.input_dim(),
            state.params.output_dim(),
            ds.feature_dim(),
            centers.n_dim()
        )));
    }
    let result = train(&mut state, &ds, &centers, &cfg);
    finish_run(
        &state,
        loss,
        cfg.label_permutation.clone(),
        a.checkpoint.as_ref(),
        a.metrics_out.as_ref(),
    )?;
    result?;
    if let Some(p) = &a.embeddings_out {
        let z = state.params.forward(ds.features().view())?;
        write_embeddings_csv(create(p)?, ds.labels(), &z)?;
    }
    match state.history.last() {
        Some(h) => writeln!(out, "epoch {} loss {} train_accuracy {}", h.epoch, h.loss, h.train_accuracy)?,
        None => writeln!(out, "no epochs run")?,
    }
    Ok(())
}

fn metric_of(arg: Option<MetricArg>, loss: LossKind) -> LabelMetric {
    match arg {
        Some(MetricArg::Cos) => LabelMetric::Cosine,
        Some(MetricArg::Dist) => LabelMetric::Distance,
        None => loss.label_metric(),
    }
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let centers = load_centers(&a.centers)?.centers;
    let ds = dataset_for(load_csv(&a.data, a.header)?, &centers)?;
    let metric = metric_of(a.metric, ck.loss);
    let acc = eval_accuracy_with(&ck.state.params, &ds, &centers, metric, ck.label_permutation.as_deref())?;
    writeln!(out, "accuracy {acc}")?;
    Ok(())
}

/// Reads numeric CSV rows; an empty input gives zero rows.
fn read_vectors(path: &Path, header: bool, labeled: bool) -> Result<Array2<f64>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let skip = usize::from(labeled);
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| LscError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let n = rec.len().saturating_sub(skip);
        if n == 0 || width.is_some_and(|w| w != n) {
            return Err(LscError::Parse {
                line,
                message: "ragged or empty row".into(),
            });
        }
        width = Some(n);
        for f in rec.iter().skip(skip) {
            values.push(f.parse::<f64>().map_err(|_| LscError::Parse {
                line,
                message: format!("{f:?} is not a number"),
            })?);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, width.unwrap_or(0)), values).map_err(|e| LscError::Shape(e.to_string()))
}

fn cmd_assign(a: &AssignArgs, out: &mut dyn Write) -> Result<()> {
    let loaded = load_centers(&a.centers)?;
    let x = read_vectors(&a.input, a.header, a.labeled)?;
    if x.nrows() == 0 {
        return Ok(());
    }
    let z = match &a.checkpoint {
        Some(p) => load_checkpoint(p)?.state.params.forward(x.view())?,
        None => x,
    };
    if z.ncols() != loaded.centers.n_dim() {
        return Err(LscError::InvalidConfig(format!(
            "vectors have {} coordinates, centers have n_dim {}",
            z.ncols(),
            loaded.centers.n_dim()
        )));
    }
    let cfg = if a.oracle { None } else { loaded.configuration()? };
    let index = match &cfg {
        Some(cfg) => Some(build_index(cfg, &loaded.centers)?),
        None => None,
    };
    let mut w = BufWriter::new(out);
    if let Some(k) = a.top {
        let brute;
        let index = match &index {
            Some(i) => i,
            None => {
                brute = crate::fastassign::AssignmentIndex::brute_force(&loaded.centers);
                &brute
            }
        };
        for row in z.outer_iter() {
            let classes = index.assign_topk(&row.to_vec(), k)?;
            let line: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
    } else {
        let labels = match &index {
            Some(i) => i.assign_batch(z.view())?,
            None => assign_labels_cos(z.view(), &loaded.centers)?,
        };
        for l in labels {
            writeln!(w, "{l}")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_continual(a: &ContinualArgs, out: &mut dyn Write) -> Result<()> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let old = load_centers(&a.old_centers)?.centers;
    let extended = load_centers(&a.extended_centers)?.centers;
    old.check_prefix_of(&extended)?;
    let old_data = dataset_for(load_csv(&a.old_data, a.header)?, &old)?;
    let new_data = dataset_for(load_csv(&a.new_data, a.header)?, &extended)?;
    let cfg = a.optim.config(ck.loss);
    let mut state = ck.state;
    let report = continual_extend(&mut state, &old, &old_data, &new_data, &extended, &cfg);
    finish_run(&state, ck.loss, None, a.checkpoint_out.as_ref(), a.metrics_out.as_ref())?;
    let report = report?;
    writeln!(out, "old_accuracy_before {}", report.old_accuracy_before)?;
    writeln!(out, "old_accuracy_after {}", report.old_accuracy_after)?;
    if let Some(n) = report.new_accuracy_after {
        writeln!(out, "new_accuracy_after {n}")?;
    }
    Ok(())
}

fn cmd_distill(a: &DistillArgs, out: &mut dyn Write) -> Result<()> {
    let teacher = load_checkpoint(&a.teacher)?;
    let ds = load_csv(&a.data, a.header)?;
    if let Some(p) = &a.teacher_centers {
        let tc = load_centers(p)?.centers;
        let tds = dataset_for(ds.clone(), &tc)?;
        let acc = eval_accuracy_with(
            &teacher.state.params,
            &tds,
            &tc,
            teacher.loss.label_metric(),
            teacher.label_permutation.as_deref(),
        )?;
        writeln!(out, "teacher_accuracy {acc}")?;
    }
    let mut dims = vec![ds.feature_dim()];
    dims.extend(&a.hidden);
    dims.push(teacher.state.params.output_dim());
    let cfg = a.optim.config(LossKind::Cos);
    let (state, centers) = distill(&teacher.state.params, &dims, &ds, &cfg)?;
    finish_run(&state, LossKind::Cos, None, a.checkpoint.as_ref(), a.metrics_out.as_ref())?;
    if let Some(p) = &a.centers_out {
        save_centers(p, &centers, &CentersMeta::plain(Family::CEembs, None))?;
    }
    if let Some(h) = state.history.last() {
        writeln!(out, "student_accuracy {}", h.train_accuracy)?;
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    let report = report_params(a.n_dim, a.backbone, &a.classes)?;
    write!(out, "{report}")?;
    if let Some(p) = &a.csv {
        report.write_csv(create(p)?)?;
    }
    Ok(())
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Blobs(a) => cmd_blobs(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Assign(a) => cmd_assign(a, out),
        Command::Continual(a) => cmd_continual(a, out),
        Command::Distill(a) => cmd_distill(a, out),
        Command::ReportParams(a) => cmd_report(a, out),
    }
}

/// Parses process arguments, runs, and returns the exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit_code::PARSE } else { exit_code::SUCCESS };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => exit_code::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("22e6"), Ok(22_000_000));
        assert_eq!(parse_count("1000"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("x").is_err());
    }
}
