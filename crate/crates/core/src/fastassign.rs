//! Exact nearest-center search that exploits root-system structure.
//!
//! For a root `e_i - e_j` the cosine with a query `z` is
//! `(z_i - z_j) / (sqrt(2) |z|)`, and after the drop projection the residual
//! axis vectors `+e_i` and `-e_j` score `z_i / |z|` and `-z_j / |z|`. The best
//! root therefore pairs the largest coordinate with the smallest one:
//!
//! * `FullRoots`: every root is a class, so two passes over the coordinates
//!   (norm and extremes, then near-extreme groups) find the answer.
//! * `SubsetRoots`: only some roots are classes. Coordinate pairs are visited
//!   best-first in decreasing `z_i - z_j` order until no unvisited pair can
//!   beat the best class found, with a brute-force fallback after `n_dim^2`
//!   probes.
//! * `BruteForce`: interpolated, isometric or non-root centers.
//!
//! Candidate scores are computed with the same floating-point expression as
//! [`crate::metric::assign_labels_cos`], and ties go to the lowest class
//! index, so results are identical to the brute-force scan, not merely close.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use ndarray::ArrayView2;

use crate::error::{LscError, Result};
use crate::metric::{assign_one_cos, center_norms, cos_from_parts, dot, norm};
use crate::rootsys::{CenterConfiguration, CenterMatrix, CenterSource, Projection};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignMode {
    FullRoots,
    SubsetRoots,
    BruteForce,
}

/// What a class center looks like in query coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClassShape {
    Pair(u32, u32),
    PosAxis(u32),
    NegAxis(u32),
}

/// Per-query work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryTrace {
    /// Full sweeps over the query coordinates.
    pub coordinate_passes: usize,
    /// Coordinate pairs popped from the best-first queue.
    pub probes: usize,
    pub fell_back: bool,
}

#[derive(Debug, Clone)]
pub struct AssignmentIndex<'c> {
    mode: AssignMode,
    rank: Option<usize>,
    projection: Projection,
    pair_to_class: HashMap<(u32, u32), u32>,
    pos_axis: Vec<(u32, u32)>,
    neg_axis: Vec<(u32, u32)>,
    shapes: Vec<ClassShape>,
    centers: &'c CenterMatrix,
    norms: Vec<f64>,
}

fn rows_match_exactly(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x == y)
}

fn rows_match_loosely(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6 * x.abs().max(1.0))
}

/// Builds the search index for centers chosen from `cfg`.
pub fn build_index<'c>(cfg: &CenterConfiguration, centers: &'c CenterMatrix) -> Result<AssignmentIndex<'c>> {
    if centers.n_dim() != cfg.ambient_dim() {
        return Err(LscError::InconsistentProvenance(format!(
            "centers have dimension {}, configuration has {}",
            centers.n_dim(),
            cfg.ambient_dim()
        )));
    }
    if centers.n_classes() > cfg.len() {
        return Err(LscError::InconsistentProvenance(format!(
            "{} centers but the configuration holds {} vectors",
            centers.n_classes(),
            cfg.len()
        )));
    }
    if let CenterSource::Configuration(summary) = centers.source() {
        if *summary != cfg.summary() {
            return Err(LscError::InconsistentProvenance(format!(
                "centers were chosen from {summary:?}, not from {:?}",
                cfg.summary()
            )));
        }
    }

    let norms = center_norms(centers);
    let structured = cfg.family().is_root_family()
        && cfg.interpolation_level() == 0
        && cfg.projection() != Projection::Isometric
        && cfg.root_pairs().is_some();

    if !structured {
        for k in 0..centers.n_classes() {
            if !rows_match_loosely(centers.row(k), &cfg.vectors().dense_row(k)) {
                return Err(LscError::InconsistentProvenance(format!(
                    "center row {k} does not match configuration vector {k}"
                )));
            }
        }
        return Ok(AssignmentIndex {
            mode: AssignMode::BruteForce,
            rank: cfg.rank(),
            projection: cfg.projection(),
            pair_to_class: HashMap::new(),
            pos_axis: Vec::new(),
            neg_axis: Vec::new(),
            shapes: Vec::new(),
            centers,
            norms,
        });
    }

    let rank = cfg.rank().ok_or_else(|| LscError::InconsistentProvenance("root family without a rank".into()))?;
    let pairs = cfg.root_pairs().expect("checked above");
    let dropped = cfg.projection() == Projection::DropLast;
    let last = rank as u32;
    let mut shapes = Vec::with_capacity(centers.n_classes());
    let mut pair_to_class = HashMap::with_capacity(centers.n_classes());
    let mut pos_axis = Vec::new();
    let mut neg_axis = Vec::new();
    for (class, &(i, j)) in pairs.iter().take(centers.n_classes()).enumerate() {
        let c = class as u32;
        let shape = if dropped && j == last {
            pos_axis.push((i, c));
            ClassShape::PosAxis(i)
        } else if dropped && i == last {
            neg_axis.push((j, c));
            ClassShape::NegAxis(j)
        } else {
            pair_to_class.insert((i, j), c);
            ClassShape::Pair(i, j)
        };
        let mut expected = vec![0.0; centers.n_dim()];
        match shape {
            ClassShape::Pair(i, j) => {
                expected[i as usize] = 1.0;
                expected[j as usize] = -1.0;
            }
            ClassShape::PosAxis(i) => expected[i as usize] = 1.0,
            ClassShape::NegAxis(j) => expected[j as usize] = -1.0,
        }
        if !rows_match_exactly(centers.row(class), &expected) {
            return Err(LscError::InconsistentProvenance(format!(
                "center row {class} is not the root e_{i} - e_{j}"
            )));
        }
        shapes.push(shape);
    }
    let full = centers.n_classes() == rank * (rank + 1);
    Ok(AssignmentIndex {
        mode: if full { AssignMode::FullRoots } else { AssignMode::SubsetRoots },
        rank: Some(rank),
        projection: cfg.projection(),
        pair_to_class,
        pos_axis,
        neg_axis,
        shapes,
        centers,
        norms,
    })
}

/// Running best `(score, class)` with lowest-index tie-breaking.
#[derive(Debug, Clone, Copy)]
struct Best {
    score: f64,
    class: usize,
}

impl Best {
    fn new() -> Self {
        Self {
            score: f64::NEG_INFINITY,
            class: usize::MAX,
        }
    }

    fn offer(&mut self, score: f64, class: usize) {
        if score > self.score || (score == self.score && class < self.class) {
            self.score = score;
            self.class = class;
        }
    }
}

/// Heap entry for best-first pair enumeration: `diff = z[top[a]] - z[bottom[b]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairProbe {
    diff: f64,
    a: usize,
    b: usize,
}

impl Eq for PairProbe {}

impl PartialOrd for PairProbe {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PairProbe {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diff
            .total_cmp(&other.diff)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

impl<'c> AssignmentIndex<'c> {
    /// A brute-force index over any center matrix.
    pub fn brute_force(centers: &'c CenterMatrix) -> Self {
        Self {
            mode: AssignMode::BruteForce,
            rank: None,
            projection: Projection::None,
            pair_to_class: HashMap::new(),
            pos_axis: Vec::new(),
            neg_axis: Vec::new(),
            shapes: Vec::new(),
            centers,
            norms: center_norms(centers),
        }
    }

    pub fn mode(&self) -> AssignMode {
        self.mode
    }

    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn n_classes(&self) -> usize {
        self.centers.n_classes()
    }

    pub fn centers(&self) -> &'c CenterMatrix {
        self.centers
    }

    /// Same dot product the dense sequential loop produces for this class.
    /// Root centers hold only 0 and +-1, and adding exact zeros never changes
    /// a floating-point sum, so the sparse form is bit-identical.
    #[inline]
    fn class_dot(&self, z: &[f64], class: usize) -> f64 {
        match self.shapes[class] {
            ClassShape::Pair(i, j) => z[i as usize] - z[j as usize],
            ClassShape::PosAxis(i) => z[i as usize],
            ClassShape::NegAxis(j) => -z[j as usize],
        }
    }

    #[inline]
    fn class_score(&self, z: &[f64], nz: f64, class: usize) -> f64 {
        match self.mode {
            AssignMode::BruteForce => cos_from_parts(dot(z, self.centers.row(class)), nz, self.norms[class]),
            _ => cos_from_parts(self.class_dot(z, class), nz, self.norms[class]),
        }
    }

    fn check_query(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.centers.n_dim() {
            return Err(LscError::Shape(format!(
                "query has {} coordinates, centers have {}",
                z.len(),
                self.centers.n_dim()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(LscError::InvalidInput("query has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// Class whose center is most cosine-similar to `z`.
    pub fn assign_fast(&self, z: &[f64]) -> Result<usize> {
        self.assign_fast_traced(z).map(|(c, _)| c)
    }

    pub fn assign_fast_traced(&self, z: &[f64]) -> Result<(usize, QueryTrace)> {
        self.check_query(z)?;
        match self.mode {
            AssignMode::FullRoots => self.assign_full(z),
            AssignMode::SubsetRoots => self.assign_subset(z),
            AssignMode::BruteForce => {
                let class = assign_one_cos(z, self.centers, &self.norms)?;
                Ok((
                    class,
                    QueryTrace {
                        coordinate_passes: self.n_classes() + 1,
                        probes: 0,
                        fell_back: false,
                    },
                ))
            }
        }
    }

    fn degenerate() -> LscError {
        LscError::Degenerate("query is the zero vector".into())
    }

    fn assign_full(&self, z: &[f64]) -> Result<(usize, QueryTrace)> {
        let mut trace = QueryTrace::default();
        // pass 1: norm (same accumulation order as `metric::norm`) and extremes
        let mut sq = 0.0;
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for &v in z {
            sq += v * v;
            hi = hi.max(v);
            lo = lo.min(v);
        }
        let nz = sq.sqrt();
        trace.coordinate_passes += 1;
        if nz == 0.0 {
            return Err(Self::degenerate());
        }
        // pass 2: coordinates that could tie the extremes after rounding
        let eps = 64.0 * f64::EPSILON * hi.abs().max(lo.abs());
        let mut top = Vec::new();
        let mut bottom = Vec::new();
        for (k, &v) in z.iter().enumerate() {
            if v >= hi - eps {
                top.push(k as u32);
            }
            if v <= lo + eps {
                bottom.push(k as u32);
            }
        }
        trace.coordinate_passes += 1;

        let mut best = Best::new();
        for &i in &top {
            for &j in &bottom {
                if i != j {
                    if let Some(&c) = self.pair_to_class.get(&(i, j)) {
                        best.offer(self.class_score(z, nz, c as usize), c as usize);
                    }
                }
            }
        }
        if self.projection == Projection::DropLast {
            for &(i, c) in &self.pos_axis {
                if top.contains(&i) {
                    best.offer(self.class_score(z, nz, c as usize), c as usize);
                }
            }
            for &(j, c) in &self.neg_axis {
                if bottom.contains(&j) {
                    best.offer(self.class_score(z, nz, c as usize), c as usize);
                }
            }
        }
        Ok((best.class, trace))
    }

    fn assign_subset(&self, z: &[f64]) -> Result<(usize, QueryTrace)> {
        let mut trace = QueryTrace::default();
        let nz = norm(z);
        trace.coordinate_passes += 1;
        if nz == 0.0 {
            return Err(Self::degenerate());
        }
        let d = z.len();
        let mut best = Best::new();
        for &(_, c) in self.pos_axis.iter().chain(&self.neg_axis) {
            best.offer(self.class_score(z, nz, c as usize), c as usize);
        }
        if self.pair_to_class.is_empty() {
            return Ok((best.class, trace));
        }
        let pair_norm = self
            .pair_to_class
            .values()
            .next()
            .map(|&c| self.norms[c as usize])
            .expect("non-empty");

        let mut order: Vec<u32> = (0..d as u32).collect();
        order.sort_by(|&a, &b| z[b as usize].total_cmp(&z[a as usize]).then(a.cmp(&b)));
        trace.coordinate_passes += 1;
        let top = |a: usize| order[a] as usize;
        let bottom = |b: usize| order[d - 1 - b] as usize;
        let diff = |a: usize, b: usize| z[top(a)] - z[bottom(b)];

        let limit = d * d;
        let mut heap = BinaryHeap::new();
        heap.push(PairProbe { diff: diff(0, 0), a: 0, b: 0 });
        while let Some(p) = heap.pop() {
            trace.probes += 1;
            if trace.probes > limit {
                trace.fell_back = true;
                let class = assign_one_cos(z, self.centers, &self.norms)?;
                return Ok((class, trace));
            }
            // every unvisited pair has a difference no larger than this one
            if cos_from_parts(p.diff, nz, pair_norm) < best.score {
                break;
            }
            if p.b + 1 < d {
                heap.push(PairProbe { diff: diff(p.a, p.b + 1), a: p.a, b: p.b + 1 });
            }
            if p.b == 0 && p.a + 1 < d {
                heap.push(PairProbe { diff: diff(p.a + 1, 0), a: p.a + 1, b: 0 });
            }
            let (i, j) = (top(p.a), bottom(p.b));
            if i == j {
                continue;
            }
            if let Some(&c) = self.pair_to_class.get(&(i as u32, j as u32)) {
                best.offer(self.class_score(z, nz, c as usize), c as usize);
            }
        }
        Ok((best.class, trace))
    }

    /// The `k` most cosine-similar classes, best first, ties by class index.
    pub fn assign_topk(&self, z: &[f64], k: usize) -> Result<Vec<usize>> {
        self.check_query(z)?;
        if k == 0 || k > self.n_classes() {
            return Err(LscError::InvalidK {
                k,
                n_classes: self.n_classes(),
            });
        }
        let nz = norm(z);
        if nz == 0.0 {
            return Err(Self::degenerate());
        }
        let mut scored: Vec<(f64, usize)> = (0..self.n_classes())
            .map(|c| (self.class_score(z, nz, c), c))
            .collect();
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_by(by_rank);
        Ok(scored.into_iter().map(|(_, c)| c).collect())
    }

    /// [`Self::assign_fast`] over the rows of a batch.
    pub fn assign_batch(&self, z: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        z.outer_iter()
            .map(|row| match row.as_slice() {
                Some(s) => self.assign_fast(s),
                None => self.assign_fast(&row.to_vec()),
            })
            .collect()
    }
}
