use ndarray::{Array2, ArrayView2};

use super::{Family, Projection};
use crate::error::{LscError, Result};

/// Two rows count as duplicates when their cosine similarity reaches this value.
pub const DUPLICATE_COS: f64 = 1.0 - 1e-9;

/// Where a center matrix came from.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterSource {
    Configuration(ConfigSummary),
    CEembs,
    Custom,
}

/// Provenance of a configuration-derived center matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSummary {
    pub family: Family,
    pub rank: Option<usize>,
    pub projection: Projection,
    pub seed: Option<u64>,
    pub interpolation_level: u32,
}

/// The `n_classes x n_dim` matrix of target centers; row `i` is the center of class `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterMatrix {
    centers: Array2<f64>,
    radii: Option<Vec<f64>>,
    source: CenterSource,
}

impl CenterMatrix {
    /// Builds a center matrix, checking shape, finiteness, radii and row distinctness.
    pub fn new(centers: Array2<f64>, radii: Option<Vec<f64>>, source: CenterSource) -> Result<Self> {
        let (rows, cols) = centers.dim();
        if rows == 0 || cols == 0 {
            return Err(LscError::EmptyInput("center matrix needs at least one row and column".into()));
        }
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(LscError::InvalidInput("center matrix has non-finite entries".into()));
        }
        if let Some(r) = &radii {
            if r.len() != rows {
                return Err(LscError::Shape(format!("{} radii for {} centers", r.len(), rows)));
            }
            if let Some(i) = r.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(LscError::InvalidInput(format!("radius of class {i} is not strictly positive")));
            }
        }
        let centers = centers.as_standard_layout().into_owned();
        check_distinct_rows(centers.view())?;
        Ok(Self { centers, radii, source })
    }

    pub fn n_classes(&self) -> usize {
        self.centers.nrows()
    }

    pub fn n_dim(&self) -> usize {
        self.centers.ncols()
    }

    pub fn centers(&self) -> ArrayView2<'_, f64> {
        self.centers.view()
    }

    pub fn row(&self, class: usize) -> &[f64] {
        let n = self.n_dim();
        let flat = self.centers.as_slice().expect("standard layout");
        &flat[class * n..(class + 1) * n]
    }

    /// Radius `r_c` of a class; 1 when no radii are attached.
    pub fn radius(&self, class: usize) -> f64 {
        self.radii.as_ref().map_or(1.0, |r| r[class])
    }

    pub fn radii(&self) -> Option<&[f64]> {
        self.radii.as_deref()
    }

    pub fn source(&self) -> &CenterSource {
        &self.source
    }

    /// Checks that `self` is an exact row prefix of `extended` (bitwise equality).
    pub fn check_prefix_of(&self, extended: &CenterMatrix) -> Result<()> {
        if extended.n_dim() != self.n_dim() {
            return Err(LscError::Shape(format!(
                "extended centers have dimension {}, expected {}",
                extended.n_dim(),
                self.n_dim()
            )));
        }
        if extended.n_classes() < self.n_classes() {
            return Err(LscError::CenterDrift { row: extended.n_classes() });
        }
        for i in 0..self.n_classes() {
            let same = self
                .row(i)
                .iter()
                .zip(extended.row(i))
                .all(|(a, b)| a.to_bits() == b.to_bits());
            if !same || self.radius(i).to_bits() != extended.radius(i).to_bits() {
                return Err(LscError::CenterDrift { row: i });
            }
        }
        Ok(())
    }
}

/// Rejects zero rows and pairs of rows whose cosine similarity is at least
/// [`DUPLICATE_COS`].
///
/// Rows are normalized and sorted by their projection onto a fixed direction;
/// near-parallel unit vectors lie within `sqrt(2 (1 - DUPLICATE_COS))` of each
/// other, so only rows inside that window of the sort key need comparing.
pub fn check_distinct_rows(rows: ArrayView2<'_, f64>) -> Result<()> {
    let (n, d) = rows.dim();
    let probe: Vec<f64> = {
        let raw: Vec<f64> = (0..d).map(|k| (1.7 * k as f64 + 0.3).sin() + 1.5).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        raw.into_iter().map(|x| x / norm).collect()
    };
    let mut unit = Vec::with_capacity(n * d);
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (i, row) in rows.outer_iter().enumerate() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LscError::InvalidInput(format!("center row {i} is the zero vector")));
        }
        let start = unit.len();
        unit.extend(row.iter().map(|x| x / norm));
        let key = unit[start..].iter().zip(&probe).map(|(a, b)| a * b).sum();
        keyed.push((key, i));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let window = (2.0 * (1.0 - DUPLICATE_COS)).sqrt() * (1.0 + 1e-6) + 1e-12;
    for (pos, &(key, i)) in keyed.iter().enumerate() {
        let ui = &unit[i * d..(i + 1) * d];
        for &(other_key, j) in &keyed[pos + 1..] {
            if other_key - key > window {
                break;
            }
            let uj = &unit[j * d..(j + 1) * d];
            let cos: f64 = ui.iter().zip(uj).map(|(a, b)| a * b).sum();
            if cos >= DUPLICATE_COS {
                let (a, b) = (i.min(j), i.max(j));
                return Err(LscError::InvalidInput(format!(
                    "center rows {a} and {b} are duplicates (cosine similarity {cos})"
                )));
            }
        }
    }
    Ok(())
}
