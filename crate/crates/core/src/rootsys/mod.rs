//! Predefined center-vector systems.
//!
//! The `A_n` root system is the set `{e_i - e_j : i != j}` in `n + 1`
//! dimensions: `n(n+1)` vectors of norm `sqrt(2)` whose nearest neighbours sit
//! at 60 degrees. This module generates it together with its variants:
//!
//! * positive roots (`i < j`), which contain no antipodal pair,
//! * seeded shuffles of the full list (truncation then picks a random subset),
//! * one level of interpolation (rescaled midpoints of 60 degree neighbours),
//! * projection to `n` dimensions, either by dropping the last coordinate or
//!   isometrically onto the sum-zero hyperplane.
//!
//! A [`CenterConfiguration`] is turned into the per-class [`CenterMatrix`] by
//! [`choose_centers`], which keeps the first `n_classes` vectors.

mod centers;
mod isometric;
mod vectors;

use std::f64::consts::SQRT_2;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use centers::{check_distinct_rows, CenterMatrix, CenterSource, ConfigSummary, DUPLICATE_COS};
pub use isometric::sum_zero_basis;
pub use vectors::{SparseRow, VectorSet};

use crate::error::{LscError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    An,
    Anp,
    Anr,
    Rotation2D,
    CEembs,
    Custom,
}

impl Family {
    pub fn is_root_family(self) -> bool {
        matches!(self, Family::An | Family::Anp | Family::Anr)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::An => "an",
            Family::Anp => "anp",
            Family::Anr => "anr",
            Family::Rotation2D => "rotation2d",
            Family::CEembs => "ceembs",
            Family::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "an" => Family::An,
            "anp" => Family::Anp,
            "anr" => Family::Anr,
            "rotation2d" => Family::Rotation2D,
            "ceembs" => Family::CEembs,
            "custom" => Family::Custom,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Projection {
    None,
    DropLast,
    Isometric,
}

impl Projection {
    pub fn as_str(self) -> &'static str {
        match self {
            Projection::None => "none",
            Projection::DropLast => "drop",
            Projection::Isometric => "isometric",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "none" => Projection::None,
            "drop" | "droplast" => Projection::DropLast,
            "isometric" => Projection::Isometric,
            _ => return None,
        })
    }
}

/// A root `e_i - e_j` identified by its coordinate pair.
pub type RootPair = (u32, u32);

/// A named family of center vectors plus the metadata needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterConfiguration {
    family: Family,
    rank: Option<usize>,
    vectors: VectorSet,
    seed: Option<u64>,
    interpolation_level: u32,
    projection: Projection,
    permutation: Option<Vec<usize>>,
    /// Coordinate pair of each leading root row, in current order.
    root_pairs: Option<Vec<RootPair>>,
}

impl CenterConfiguration {
    /// Wraps arbitrary vectors as a `Custom` configuration.
    pub fn custom(vectors: VectorSet) -> Result<Self> {
        Self::with_family(Family::Custom, vectors)
    }

    pub fn with_family(family: Family, vectors: VectorSet) -> Result<Self> {
        if vectors.dim() == 0 {
            return Err(LscError::InvalidInput("vectors must have positive length".into()));
        }
        if let Some(i) = vectors.rows().position(|r| r.nnz() == 0) {
            return Err(LscError::InvalidInput(format!("vector {i} is the zero vector")));
        }
        Ok(Self {
            family,
            rank: None,
            vectors,
            seed: None,
            interpolation_level: 0,
            projection: Projection::None,
            permutation: None,
            root_pairs: None,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Root-system rank `n`, when the configuration is an `A_n` variant.
    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn vectors(&self) -> &VectorSet {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn interpolation_level(&self) -> u32 {
        self.interpolation_level
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    /// The shuffle applied to the root list: output row `k` is input row `permutation[k]`.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// Coordinate pairs `(i, j)` of the leading root rows (before any interpolated rows).
    pub fn root_pairs(&self) -> Option<&[RootPair]> {
        self.root_pairs.as_deref()
    }

    pub fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            family: self.family,
            rank: self.rank,
            projection: self.projection,
            seed: self.seed,
            interpolation_level: self.interpolation_level,
        }
    }
}

fn root_entries(i: u32, j: u32) -> [(usize, f64); 2] {
    let (i, j) = (i as usize, j as usize);
    if i < j {
        [(i, 1.0), (j, -1.0)]
    } else {
        [(j, -1.0), (i, 1.0)]
    }
}

/// All roots `e_i - e_j` (`i != j`) of `A_n` in `n + 1` dimensions, ordered
/// lexicographically by `(i, j)`.
pub fn gen_an_roots(n: usize) -> Result<CenterConfiguration> {
    if n == 0 {
        return Err(LscError::InvalidRank(n));
    }
    let dim = n + 1;
    let mut vectors = VectorSet::with_capacity(dim, n * dim, 2);
    let mut pairs = Vec::with_capacity(n * dim);
    for i in 0..dim as u32 {
        for j in 0..dim as u32 {
            if i != j {
                vectors.push_sparse(root_entries(i, j));
                pairs.push((i, j));
            }
        }
    }
    Ok(CenterConfiguration {
        family: Family::An,
        rank: Some(n),
        vectors,
        seed: None,
        interpolation_level: 0,
        projection: Projection::None,
        permutation: None,
        root_pairs: Some(pairs),
    })
}

/// Drops the last coordinate of every vector.
pub fn project_drop(cfg: &CenterConfiguration) -> Result<CenterConfiguration> {
    if cfg.projection != Projection::None {
        return Err(LscError::InvalidState(format!(
            "configuration is already projected ({})",
            cfg.projection.as_str()
        )));
    }
    let dim = cfg.ambient_dim();
    if dim < 2 {
        return Err(LscError::InvalidInput("drop projection needs ambient dimension >= 2".into()));
    }
    let mut out = VectorSet::with_capacity(dim - 1, cfg.len(), 3);
    for (k, row) in cfg.vectors.rows().enumerate() {
        let before = out.len();
        out.push_sparse(row.iter().filter(|&(i, _)| i < dim - 1));
        if out.row(before).nnz() == 0 {
            return Err(LscError::InvalidInput(format!(
                "vector {k} becomes the zero vector after dropping the last coordinate"
            )));
        }
    }
    Ok(CenterConfiguration {
        vectors: out,
        projection: Projection::DropLast,
        ..cfg.clone()
    })
}

/// Re-expresses every vector in an orthonormal basis of the sum-zero
/// hyperplane, reducing the dimension by one while preserving all inner
/// products.
pub fn project_isometric(cfg: &CenterConfiguration) -> Result<CenterConfiguration> {
    if !cfg.family.is_root_family() {
        return Err(LscError::InvalidInput(format!(
            "isometric projection needs an A_n family, got {}",
            cfg.family.as_str()
        )));
    }
    if cfg.projection != Projection::None {
        return Err(LscError::InvalidState(format!(
            "configuration is already projected ({})",
            cfg.projection.as_str()
        )));
    }
    let dim = cfg.ambient_dim();
    for (k, row) in cfg.vectors.rows().enumerate() {
        let scale = row.norm_sq().sqrt();
        if row.sum().abs() > 1e-9 * scale.max(1.0) {
            return Err(LscError::InvalidInput(format!(
                "vector {k} does not lie in the sum-zero hyperplane"
            )));
        }
    }
    let basis = sum_zero_basis(dim);
    let mut out = VectorSet::with_capacity(dim - 1, cfg.len(), dim - 1);
    let mut coords = vec![0.0; dim - 1];
    for row in cfg.vectors.rows() {
        for (c, q) in coords.iter_mut().zip(&basis) {
            *c = row.iter().map(|(i, v)| q[i] * v).sum();
        }
        out.push_dense(&coords);
    }
    Ok(CenterConfiguration {
        vectors: out,
        projection: Projection::Isometric,
        ..cfg.clone()
    })
}

/// Keeps the positive roots `e_i - e_j` with `i < j`.
pub fn positive_subset(cfg: &CenterConfiguration) -> Result<CenterConfiguration> {
    if cfg.family != Family::An {
        return Err(LscError::InvalidInput(format!(
            "positive subset needs family an, got {}",
            cfg.family.as_str()
        )));
    }
    if cfg.interpolation_level != 0 {
        return Err(LscError::InvalidState("positive subset of an interpolated configuration".into()));
    }
    let pairs = cfg.root_pairs.as_ref().ok_or_else(|| {
        LscError::InconsistentProvenance("A_n configuration without root labels".into())
    })?;
    let keep: Vec<usize> = (0..pairs.len()).filter(|&k| pairs[k].0 < pairs[k].1).collect();
    Ok(CenterConfiguration {
        family: Family::Anp,
        vectors: cfg.vectors.reordered(&keep),
        root_pairs: Some(keep.iter().map(|&k| pairs[k]).collect()),
        ..cfg.clone()
    })
}

/// The seed-deterministic permutation used by [`shuffle`] for a list of `len` items.
pub fn shuffle_permutation(len: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

/// Reorders the full vector list by a seeded permutation (the `A_nr` variant).
pub fn shuffle(cfg: &CenterConfiguration, seed: u64) -> Result<CenterConfiguration> {
    if !matches!(cfg.family, Family::An | Family::Anp) {
        return Err(LscError::InvalidInput(format!(
            "shuffle needs family an or anp, got {}",
            cfg.family.as_str()
        )));
    }
    if cfg.interpolation_level != 0 {
        return Err(LscError::InvalidState("shuffle of an interpolated configuration".into()));
    }
    let perm = shuffle_permutation(cfg.len(), seed);
    Ok(CenterConfiguration {
        family: Family::Anr,
        vectors: cfg.vectors.reordered(&perm),
        seed: Some(seed),
        root_pairs: cfg
            .root_pairs
            .as_ref()
            .map(|p| perm.iter().map(|&k| p[k]).collect()),
        permutation: Some(perm),
        ..cfg.clone()
    })
}

/// Number of vectors one interpolation level adds to `A_n`.
pub fn interpolated_count(n: usize) -> usize {
    n * (n * n).saturating_sub(1)
}

/// Number of classes a rank-`n` configuration hosts at the given interpolation level.
pub fn capacity(n: usize, interpolation_levels: u32) -> u128 {
    let n = n as u128;
    match interpolation_levels {
        0 => n * (n + 1),
        _ => n * n * (n + 1),
    }
}

/// Iterator over every unordered pair of root rows at 60 degrees (inner
/// product 1), each emitted once as `(a, b)` with `a < b`, ordered by `a` and
/// then by the shared-coordinate partner.
pub struct InterpolationPairs<'a> {
    pairs: &'a [RootPair],
    pos: Vec<u32>,
    dim: usize,
    a: usize,
    k: usize,
    side: u8,
}

impl Iterator for InterpolationPairs<'_> {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        while self.a < self.pairs.len() {
            let (i, j) = (self.pairs[self.a].0 as usize, self.pairs[self.a].1 as usize);
            while self.k < self.dim {
                let k = self.k;
                let side = self.side;
                if side == 1 {
                    self.side = 0;
                    self.k += 1;
                } else {
                    self.side = 1;
                }
                if k == i || k == j {
                    continue;
                }
                // neighbours of e_i - e_j: e_i - e_k and e_k - e_j
                let b = if side == 0 {
                    self.pos[i * self.dim + k]
                } else {
                    self.pos[k * self.dim + j]
                };
                if b != u32::MAX && b as usize > self.a {
                    return Some((self.a, b as usize));
                }
            }
            self.a += 1;
            self.k = 0;
            self.side = 0;
        }
        None
    }
}

/// Neighbour pairs that one interpolation level turns into new vectors.
pub fn interpolation_pairs(cfg: &CenterConfiguration) -> Result<InterpolationPairs<'_>> {
    if !matches!(cfg.family, Family::An | Family::Anr) {
        return Err(LscError::InvalidInput(format!(
            "interpolation needs family an or anr, got {}",
            cfg.family.as_str()
        )));
    }
    if cfg.projection != Projection::None {
        return Err(LscError::InvalidState("interpolation must precede projection".into()));
    }
    if cfg.interpolation_level != 0 {
        return Err(LscError::InvalidState("configuration is already interpolated".into()));
    }
    let pairs = cfg.root_pairs.as_deref().ok_or_else(|| {
        LscError::InconsistentProvenance("A_n configuration without root labels".into())
    })?;
    let dim = cfg.ambient_dim();
    let mut pos = vec![u32::MAX; dim * dim];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        pos[i as usize * dim + j as usize] = k as u32;
    }
    Ok(InterpolationPairs { pairs, pos, dim, a: 0, k: 0, side: 0 })
}

/// Appends one level of interpolated vectors: for every pair of roots at 60
/// degrees, their midpoint rescaled to norm `sqrt(2)`, which sits at 30
/// degrees from both parents. Level 0 returns the input unchanged.
pub fn interpolate(cfg: &CenterConfiguration, levels: u32) -> Result<CenterConfiguration> {
    if levels > 1 {
        return Err(LscError::UnsupportedLevel(levels));
    }
    if levels == 0 {
        return Ok(cfg.clone());
    }
    let n = cfg.rank.unwrap_or(0);
    let mut added = VectorSet::with_capacity(cfg.ambient_dim(), interpolated_count(n), 3);
    let mut scratch: Vec<(usize, f64)> = Vec::with_capacity(4);
    for (a, b) in interpolation_pairs(cfg)? {
        scratch.clear();
        scratch.extend(cfg.vectors.row(a).iter());
        for (i, v) in cfg.vectors.row(b).iter() {
            match scratch.iter_mut().find(|(k, _)| *k == i) {
                Some(e) => e.1 += v,
                None => scratch.push((i, v)),
            }
        }
        scratch.sort_by_key(|e| e.0);
        let norm = scratch.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        let scale = SQRT_2 / norm;
        added.push_sparse(scratch.iter().map(|&(i, v)| (i, v * scale)));
    }
    let mut vectors = cfg.vectors.clone();
    vectors.extend_from(&added);
    Ok(CenterConfiguration {
        vectors,
        interpolation_level: 1,
        ..cfg.clone()
    })
}

/// The first `n_classes` vectors of `cfg` as a center matrix; class `i` is row `i`.
pub fn choose_centers(cfg: &CenterConfiguration, n_classes: usize) -> Result<CenterMatrix> {
    if n_classes == 0 {
        return Err(LscError::InvalidInput("n_classes must be positive".into()));
    }
    if n_classes > cfg.len() {
        return Err(LscError::InsufficientVectors {
            requested: n_classes,
            available: cfg.len(),
        });
    }
    let dim = cfg.ambient_dim();
    let mut m = Array2::<f64>::zeros((n_classes, dim));
    for (k, mut out) in m.outer_iter_mut().enumerate() {
        for (i, v) in cfg.vectors.row(k).iter() {
            out[i] = v;
        }
    }
    let source = match cfg.family {
        Family::CEembs => CenterSource::CEembs,
        Family::Custom => CenterSource::Custom,
        _ => CenterSource::Configuration(cfg.summary()),
    };
    CenterMatrix::new(m, None, source)
}

/// Angles (degrees) and generation index of the first `count` rotation-built
/// directions: four at 90 degree spacing, then each generation copies every
/// existing direction rotated by half the current spacing.
pub fn rotation_angles(count: usize) -> Vec<(f64, u32)> {
    let mut out: Vec<(f64, u32)> = (0..4.min(count)).map(|k| (90.0 * k as f64, 0)).collect();
    let mut generation = 0u32;
    while out.len() < count {
        generation += 1;
        let step = 90.0 / f64::from(1u32 << generation);
        let existing = out.len();
        for k in 0..existing {
            if out.len() == count {
                break;
            }
            out.push((out[k].0 + step, generation));
        }
    }
    out
}

/// Two-dimensional centers built by repeated rotation, with per-class radii
/// `base_cluster_radius / 2^g` for vectors created in generation `g`.
pub fn gen_rotation_2d(n_classes: usize, circle_radius: f64, base_cluster_radius: f64) -> Result<CenterMatrix> {
    if n_classes == 0 {
        return Err(LscError::InvalidInput("n_classes must be positive".into()));
    }
    if !(circle_radius > 0.0 && base_cluster_radius > 0.0) {
        return Err(LscError::InvalidInput("radii must be positive".into()));
    }
    let angles = rotation_angles(n_classes);
    let mut m = Array2::<f64>::zeros((n_classes, 2));
    let mut radii = Vec::with_capacity(n_classes);
    for (k, &(deg, generation)) in angles.iter().enumerate() {
        let theta = deg.to_radians();
        m[[k, 0]] = circle_radius * theta.cos();
        m[[k, 1]] = circle_radius * theta.sin();
        radii.push(base_cluster_radius / f64::from(1u32 << generation));
    }
    let source = CenterSource::Configuration(ConfigSummary {
        family: Family::Rotation2D,
        rank: None,
        projection: Projection::None,
        seed: None,
        interpolation_level: 0,
    });
    CenterMatrix::new(m, Some(radii), source)
}

/// Smallest rank `n` whose capacity at the given interpolation level holds `n_classes`.
pub fn min_n_dim(n_classes: usize, interpolation_levels: u32) -> Result<usize> {
    if interpolation_levels > 1 {
        return Err(LscError::UnsupportedLevel(interpolation_levels));
    }
    if n_classes == 0 {
        return Err(LscError::InvalidInput("n_classes must be positive".into()));
    }
    let target = n_classes as u128;
    let mut n = 1;
    while capacity(n, interpolation_levels) < target {
        n += 1;
    }
    Ok(n)
}

/// Rebuilds a root-family configuration from its recorded metadata.
///
/// `root_count` distinguishes a shuffled full root list from a shuffled
/// positive subset.
pub fn regenerate(
    family: Family,
    rank: usize,
    root_count: usize,
    seed: Option<u64>,
    interpolation_level: u32,
    projection: Projection,
) -> Result<CenterConfiguration> {
    let full = gen_an_roots(rank)?;
    let mut cfg = match family {
        Family::An => full,
        Family::Anp => positive_subset(&full)?,
        Family::Anr => {
            let base = if root_count == full.len() {
                full
            } else if root_count == full.len() / 2 {
                positive_subset(&full)?
            } else {
                return Err(LscError::InconsistentProvenance(format!(
                    "{root_count} roots do not match A_{rank} or its positive subset"
                )));
            };
            let seed = seed.ok_or_else(|| {
                LscError::InconsistentProvenance("shuffled configuration without a seed".into())
            })?;
            shuffle(&base, seed)?
        }
        other => {
            return Err(LscError::InvalidInput(format!(
                "{} configurations cannot be regenerated",
                other.as_str()
            )))
        }
    };
    cfg = interpolate(&cfg, interpolation_level)?;
    match projection {
        Projection::None => Ok(cfg),
        Projection::DropLast => project_drop(&cfg),
        Projection::Isometric => project_isometric(&cfg),
    }
}

#[cfg(test)]
mod tests;
