//! On-disk formats.
//!
//! Center files ("LSC1"): magic `LSC1`, `u32` LE `n_dim`, `u32` LE
//! `n_vectors`, then `n_vectors * n_dim` `f32` LE values, row-major. A TOML
//! sidecar at `<path>.meta` records where the vectors came from.
//!
//! Checkpoints ("LSCK" version 1): layer sizes, loss kind, optional label
//! permutation, step counter, epoch history, batch-order RNG state, then the
//! parameters and both Adam moments as `f64` LE blobs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::EncoderParams;
use crate::error::{LscError, Result};
use crate::metric::LossKind;
use crate::rootsys::{regenerate, CenterConfiguration, CenterMatrix, CenterSource, ConfigSummary, Family, Projection};
use crate::trainer::{EpochRecord, TrainState};

pub const CENTERS_MAGIC: &[u8; 4] = b"LSC1";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"LSCK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Sidecar metadata for a center file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentersMeta {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub projection: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub interpolation_level: u32,
    /// Length of the root list the centers were truncated from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

impl CentersMeta {
    /// Metadata for centers chosen from `cfg`.
    pub fn from_configuration(cfg: &CenterConfiguration, radii: Option<&[f64]>) -> Self {
        let root_count = cfg.rank().map(|n| match cfg.family() {
            Family::Anp => n * (n + 1) / 2,
            _ => cfg.root_pairs().map_or(n * (n + 1), |p| p.len()),
        });
        Self {
            family: cfg.family().as_str().to_string(),
            rank: cfg.rank(),
            projection: cfg.projection().as_str().to_string(),
            seed: cfg.seed(),
            interpolation_level: cfg.interpolation_level(),
            root_count,
            permutation: cfg.permutation().map(<[usize]>::to_vec),
            radii: radii.map(<[f64]>::to_vec),
        }
    }

    /// Metadata for a center matrix that does not come from a root configuration.
    pub fn plain(family: Family, radii: Option<&[f64]>) -> Self {
        Self {
            family: family.as_str().to_string(),
            rank: None,
            projection: Projection::None.as_str().to_string(),
            seed: None,
            interpolation_level: 0,
            root_count: None,
            permutation: None,
            radii: radii.map(<[f64]>::to_vec),
        }
    }

    pub fn family(&self) -> Result<Family> {
        Family::parse(&self.family).ok_or_else(|| LscError::Format(format!("unknown family {:?}", self.family)))
    }

    pub fn projection(&self) -> Result<Projection> {
        Projection::parse(&self.projection)
            .ok_or_else(|| LscError::Format(format!("unknown projection {:?}", self.projection)))
    }

    fn source(&self) -> Result<CenterSource> {
        Ok(match self.family()? {
            Family::CEembs => CenterSource::CEembs,
            Family::Custom => CenterSource::Custom,
            family => CenterSource::Configuration(ConfigSummary {
                family,
                rank: self.rank,
                projection: self.projection()?,
                seed: self.seed,
                interpolation_level: self.interpolation_level,
            }),
        })
    }

    /// Rebuilds the root configuration described here, if it is one, and
    /// checks the recorded permutation against the regenerated one.
    pub fn configuration(&self) -> Result<Option<CenterConfiguration>> {
        let family = self.family()?;
        if !family.is_root_family() {
            return Ok(None);
        }
        let rank = self.rank.ok_or_else(|| LscError::Format("root family without a rank".into()))?;
        let root_count = self.root_count.unwrap_or(match family {
            Family::Anp => rank * (rank + 1) / 2,
            _ => rank * (rank + 1),
        });
        let cfg = regenerate(family, rank, root_count, self.seed, self.interpolation_level, self.projection()?)?;
        if let Some(p) = &self.permutation {
            if cfg.permutation() != Some(p.as_slice()) {
                return Err(LscError::InconsistentProvenance(
                    "recorded permutation differs from the regenerated shuffle".into(),
                ));
            }
        }
        Ok(Some(cfg))
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the LSC1 payload only.
pub fn write_lsc1<W: Write>(w: W, centers: &Array2<f64>) -> Result<()> {
    let rows = centers.outer_iter().map(|r| r.to_vec());
    write_lsc1_rows(w, centers.ncols(), centers.nrows(), rows)
}

/// Streams `n_rows` rows of length `n_dim` as an LSC1 payload.
pub fn write_lsc1_rows<W, I, R>(mut w: W, n_dim: usize, n_rows: usize, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| LscError::Format(format!("{v} does not fit in u32")));
    w.write_all(CENTERS_MAGIC)?;
    w.write_u32::<LE>(to_u32(n_dim)?)?;
    w.write_u32::<LE>(to_u32(n_rows)?)?;
    let mut written = 0;
    for row in rows.into_iter().take(n_rows) {
        let row = row.as_ref();
        if row.len() != n_dim {
            return Err(LscError::Shape(format!("row of length {} in a {n_dim}-dimensional file", row.len())));
        }
        for &v in row {
            w.write_f32::<LE>(v as f32)?;
        }
        written += 1;
    }
    if written != n_rows {
        return Err(LscError::Shape(format!("expected {n_rows} rows, got {written}")));
    }
    w.flush()?;
    Ok(())
}

/// Saves the first `n_classes` vectors of `cfg` with their sidecar, without
/// building a dense center matrix.
pub fn save_configuration(path: impl AsRef<Path>, cfg: &CenterConfiguration, n_classes: usize) -> Result<()> {
    if n_classes == 0 || n_classes > cfg.len() {
        return Err(LscError::InsufficientVectors {
            requested: n_classes,
            available: cfg.len(),
        });
    }
    let path = path.as_ref();
    let rows = (0..n_classes).map(|k| cfg.vectors().dense_row(k));
    write_lsc1_rows(BufWriter::new(File::create(path)?), cfg.ambient_dim(), n_classes, rows)?;
    let text = toml::to_string(&CentersMeta::from_configuration(cfg, None)).map_err(|e| LscError::Format(e.to_string()))?;
    std::fs::write(meta_path(path), text)?;
    Ok(())
}

/// Reads an LSC1 payload as `f64` (each value is an exact `f32`).
pub fn read_lsc1<R: Read>(mut r: R) -> Result<Array2<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| LscError::Format("file too short for an LSC1 header".into()))?;
    if &magic != CENTERS_MAGIC {
        return Err(LscError::Format(format!("bad magic {magic:?}, expected LSC1")));
    }
    let cols = r.read_u32::<LE>()? as usize;
    let rows = r.read_u32::<LE>()? as usize;
    let mut values = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 28));
    for _ in 0..rows * cols {
        let v = r
            .read_f32::<LE>()
            .map_err(|_| LscError::Format(format!("truncated payload: expected {rows} x {cols} values")))?;
        values.push(f64::from(v));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(LscError::Format("trailing bytes after LSC1 payload".into()));
    }
    Array2::from_shape_vec((rows, cols), values).map_err(|e| LscError::Format(e.to_string()))
}

/// Writes `<path>` (LSC1) and `<path>.meta` (TOML).
pub fn save_centers(path: impl AsRef<Path>, centers: &CenterMatrix, meta: &CentersMeta) -> Result<()> {
    let path = path.as_ref();
    write_lsc1(BufWriter::new(File::create(path)?), &centers.centers().to_owned())?;
    let text = toml::to_string(meta).map_err(|e| LscError::Format(e.to_string()))?;
    std::fs::write(meta_path(path), text)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LoadedCenters {
    pub centers: CenterMatrix,
    pub meta: CentersMeta,
}

impl LoadedCenters {
    pub fn configuration(&self) -> Result<Option<CenterConfiguration>> {
        self.meta.configuration()
    }
}

/// Reads a center file and its sidecar; without a sidecar the centers are `Custom`.
pub fn load_centers(path: impl AsRef<Path>) -> Result<LoadedCenters> {
    let path = path.as_ref();
    let values = read_lsc1(BufReader::new(File::open(path)?))?;
    let mp = meta_path(path);
    let meta = if mp.exists() {
        toml::from_str::<CentersMeta>(&std::fs::read_to_string(&mp)?)
            .map_err(|e| LscError::Format(format!("{}: {e}", mp.display())))?
    } else {
        CentersMeta::plain(Family::Custom, None)
    };
    let centers = CenterMatrix::new(values, meta.radii.clone(), meta.source()?)?;
    Ok(LoadedCenters { centers, meta })
}

/// Everything needed to resume or evaluate a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: TrainState,
    pub loss: LossKind,
    pub label_permutation: Option<Vec<usize>>,
}

fn write_blob<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for &v in values {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

fn read_blob<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n)
        .map(|_| r.read_f64::<LE>().map_err(|_| LscError::Format("truncated checkpoint blob".into())))
        .collect()
}

pub fn write_checkpoint<W: Write>(mut w: W, ck: &Checkpoint) -> Result<()> {
    let s = &ck.state;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_u32::<LE>(CHECKPOINT_VERSION)?;
    let dims = s.params.layer_dims();
    w.write_u32::<LE>(dims.len() as u32)?;
    for &d in dims {
        w.write_u64::<LE>(d as u64)?;
    }
    match ck.loss {
        LossKind::Cos => w.write_u8(0)?,
        LossKind::Dist => w.write_u8(1)?,
        LossKind::Combined {
            weight_dist,
            weight_cos,
        } => {
            w.write_u8(2)?;
            w.write_f64::<LE>(weight_dist)?;
            w.write_f64::<LE>(weight_cos)?;
        }
    }
    match &ck.label_permutation {
        None => w.write_u8(0)?,
        Some(p) => {
            w.write_u8(1)?;
            w.write_u64::<LE>(p.len() as u64)?;
            for &v in p {
                w.write_u64::<LE>(v as u64)?;
            }
        }
    }
    w.write_u64::<LE>(s.step)?;
    w.write_u64::<LE>(s.history.len() as u64)?;
    for h in &s.history {
        w.write_u64::<LE>(h.epoch as u64)?;
        w.write_f64::<LE>(h.loss)?;
        w.write_f64::<LE>(h.train_accuracy)?;
    }
    w.write_all(&s.rng.get_seed())?;
    w.write_u64::<LE>(s.rng.get_stream())?;
    w.write_u128::<LE>(s.rng.get_word_pos())?;
    write_blob(&mut w, &s.params.flat())?;
    write_blob(&mut w, &s.m.flat())?;
    write_blob(&mut w, &s.v.flat())?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let bad = |what: &str| LscError::Format(format!("corrupt checkpoint: {what}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| bad("missing header"))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.read_u32::<LE>()?;
    if version != CHECKPOINT_VERSION {
        return Err(LscError::Format(format!("unsupported checkpoint version {version}")));
    }
    let n_dims = r.read_u32::<LE>()? as usize;
    if n_dims > 1 << 16 {
        return Err(bad("layer count"));
    }
    let dims: Vec<usize> = (0..n_dims).map(|_| r.read_u64::<LE>().map(|d| d as usize)).collect::<std::io::Result<_>>()?;
    let loss = match r.read_u8()? {
        0 => LossKind::Cos,
        1 => LossKind::Dist,
        2 => LossKind::Combined {
            weight_dist: r.read_f64::<LE>()?,
            weight_cos: r.read_f64::<LE>()?,
        },
        _ => return Err(bad("loss tag")),
    };
    let label_permutation = match r.read_u8()? {
        0 => None,
        1 => {
            let n = r.read_u64::<LE>()? as usize;
            Some((0..n).map(|_| r.read_u64::<LE>().map(|v| v as usize)).collect::<std::io::Result<_>>()?)
        }
        _ => return Err(bad("permutation tag")),
    };
    let step = r.read_u64::<LE>()?;
    let n_hist = r.read_u64::<LE>()? as usize;
    let mut history = Vec::with_capacity(n_hist.min(1 << 20));
    for _ in 0..n_hist {
        history.push(EpochRecord {
            epoch: r.read_u64::<LE>()? as usize,
            loss: r.read_f64::<LE>()?,
            train_accuracy: r.read_f64::<LE>()?,
        });
    }
    let mut seed = [0u8; 32];
    r.read_exact(&mut seed)?;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(r.read_u64::<LE>()?);
    rng.set_word_pos(r.read_u128::<LE>()?);

    let mut params = crate::encoder::init_encoder(&dims, 0)?;
    let count = params.param_count();
    params.set_flat(&read_blob(&mut r, count)?)?;
    let mut m = params.zeros_like();
    m.set_flat(&read_blob(&mut r, count)?)?;
    let mut v = params.zeros_like();
    v.set_flat(&read_blob(&mut r, count)?)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(Checkpoint {
        state: TrainState {
            params: EncoderParams::from_layers(params.layers().to_vec())?,
            m,
            v,
            step,
            history,
            rng,
        },
        loss,
        label_permutation,
    })
}

pub fn save_checkpoint(path: impl AsRef<Path>, ck: &Checkpoint) -> Result<()> {
    write_checkpoint(BufWriter::new(File::create(path)?), ck)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

/// Writes `epoch,loss,train_accuracy` rows with a header line.
pub fn write_metrics_csv<W: Write>(w: W, history: &[EpochRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| LscError::Io(std::io::Error::other(e));
    wtr.write_record(["epoch", "loss", "train_accuracy"]).map_err(to_io)?;
    for h in history {
        wtr.write_record([h.epoch.to_string(), h.loss.to_string(), h.train_accuracy.to_string()])
            .map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `label,z0,z1,...` rows of embeddings.
pub fn write_embeddings_csv<W: Write>(w: W, labels: &[usize], z: &Array2<f64>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| LscError::Io(std::io::Error::other(e));
    let mut head = vec!["label".to_string()];
    head.extend((0..z.ncols()).map(|j| format!("z{j}")));
    wtr.write_record(&head).map_err(to_io)?;
    for (l, row) in labels.iter().zip(z.outer_iter()) {
        let mut rec = vec![l.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&rec).map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_blobs;
    use crate::rootsys::{choose_centers, gen_an_roots, gen_rotation_2d, positive_subset, project_drop, shuffle};
    use crate::trainer::{train, TrainConfig};

    #[test]
    fn lsc1_layout_is_exact() {
        let m = ndarray::array![[1.0, -1.0, 0.0], [0.5, 2.0, -3.25]];
        let mut buf = Vec::new();
        write_lsc1(&mut buf, &m).unwrap();
        assert_eq!(&buf[..4], b"LSC1");
        assert_eq!(&buf[4..8], &3u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..16], &1.0f32.to_le_bytes());
        assert_eq!(&buf[24..28], &0.5f32.to_le_bytes());
        assert_eq!(buf.len(), 12 + 6 * 4);
        assert_eq!(read_lsc1(buf.as_slice()).unwrap(), m);
        assert!(read_lsc1(&buf[..20]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_lsc1(bad.as_slice()), Err(LscError::Format(_))));
    }

    #[test]
    fn center_files_round_trip_with_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let a9 = gen_an_roots(9).unwrap();
        for cfg in [
            project_drop(&shuffle(&a9, 7).unwrap()).unwrap(),
            a9.clone(),
            shuffle(&positive_subset(&a9).unwrap(), 3).unwrap(),
        ] {
            let c = choose_centers(&cfg, 30).unwrap();
            let path = dir.path().join("c.lsc");
            save_centers(&path, &c, &CentersMeta::from_configuration(&cfg, None)).unwrap();
            let back = load_centers(&path).unwrap();
            assert_eq!(back.centers, c);
            let regenerated = back.configuration().unwrap().unwrap();
            assert_eq!(regenerated, cfg);
            let first = std::fs::read(&path).unwrap();
            save_centers(&path, &back.centers, &back.meta).unwrap();
            assert_eq!(std::fs::read(&path).unwrap(), first);
        }
        let rot = gen_rotation_2d(9, 5.0, 1.0).unwrap();
        let path = dir.path().join("rot.lsc");
        save_centers(&path, &rot, &CentersMeta::plain(Family::Rotation2D, rot.radii())).unwrap();
        let back = load_centers(&path).unwrap();
        assert_eq!(back.centers.radii(), rot.radii());
        assert!(back.configuration().unwrap().is_none());
    }

    #[test]
    fn checkpoint_resume_is_bit_identical() {
        let ds = gen_blobs(4, 3, 20, 0.5, 0).unwrap();
        let cfg = project_drop(&gen_an_roots(3).unwrap()).unwrap();
        let c = choose_centers(&cfg, 4).unwrap();
        let tc = TrainConfig {
            epochs: 3,
            batch_size: 8,
            learning_rate: 1e-2,
            seed: 1,
            label_permutation: Some(vec![2, 0, 3, 1]),
            ..TrainConfig::default()
        };
        let mut straight = TrainState::init(&[3, 8, 3], 1).unwrap();
        train(&mut straight, &ds, &c, &TrainConfig { epochs: 6, ..tc.clone() }).unwrap();

        let mut half = TrainState::init(&[3, 8, 3], 1).unwrap();
        train(&mut half, &ds, &c, &tc).unwrap();
        let ck = Checkpoint {
            state: half,
            loss: LossKind::Combined {
                weight_dist: 0.5,
                weight_cos: 2.0,
            },
            label_permutation: tc.label_permutation.clone(),
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();
        let mut back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, ck);
        train(&mut back.state, &ds, &c, &tc).unwrap();
        assert_eq!(back.state, straight);
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn metrics_csv_schema() {
        let mut buf = Vec::new();
        let h = [EpochRecord {
            epoch: 1,
            loss: 0.5,
            train_accuracy: 0.25,
        }];
        write_metrics_csv(&mut buf, &h).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epoch,loss,train_accuracy\n1,0.5,0.25\n");
    }
}
