//! Whitney decompositions of `R^n \ R^l` (and of the unit interval) into
//! dyadic cubes, with a smooth partition of unity subordinate to the
//! enlarged cubes.

mod export;
mod partition;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::discretize::Aabb;
use crate::error::{Error, Result};
use crate::geometry::PlaneSplit;

pub use export::{write_csv, write_json, write_svg};
pub use partition::{
    default_samples, partition_of_unity, partition_of_unity_sampled, DerivativeBound,
    PartitionOfUnity, RhoJet, MAX_BUMP_ORDER,
};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;
/// A cube is accepted once `dist(Q, boundary) >= ACCEPT_FACTOR * diam(Q)`.
pub const ACCEPT_FACTOR: f64 = 2.0;

/// Dyadic cube `prod [m_i 2^-j, (m_i + 1) 2^-j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    level: u32,
    dim: u8,
    idx: [i64; MAX_DIM],
}

impl DyadicCube {
    pub fn new(level: u32, index: &[i64]) -> Result<Self> {
        if index.is_empty() || index.len() > MAX_DIM {
            return Err(Error::param(format!(
                "cube dimension {} outside 1..={MAX_DIM}",
                index.len()
            )));
        }
        let mut idx = [0; MAX_DIM];
        idx[..index.len()].copy_from_slice(index);
        Ok(Self {
            level,
            dim: index.len() as u8,
            idx,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn dim(&self) -> usize {
        self.dim as usize
    }
    pub fn index(&self) -> &[i64] {
        &self.idx[..self.dim()]
    }

    /// Side length of the inner cube.
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn centre(&self) -> Vec<f64> {
        let s = self.side();
        self.index().iter().map(|&m| (m as f64 + 0.5) * s).collect()
    }

    /// Inner cube `Q^0`.
    pub fn inner(&self) -> Aabb {
        let s = self.side();
        Aabb::new(
            self.index().iter().map(|&m| m as f64 * s).collect(),
            self.index().iter().map(|&m| (m + 1) as f64 * s).collect(),
        )
    }

    /// Concentric cube `Q^1` of twice the side.
    pub fn outer(&self) -> Aabb {
        let s = self.side();
        let c = self.centre();
        Aabb::new(
            c.iter().map(|v| v - s).collect(),
            c.iter().map(|v| v + s).collect(),
        )
    }

    pub fn diam(&self) -> f64 {
        self.side() * (self.dim() as f64).sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim() as i32)
    }

    /// The cube of level `level <= self.level` containing this one.
    pub fn ancestor(&self, level: u32) -> Self {
        debug_assert!(level <= self.level);
        let k = self.level - level;
        let mut out = *self;
        out.level = level;
        for m in out.idx[..self.dim()].iter_mut() {
            *m >>= k;
        }
        out
    }

    pub fn children(&self) -> Vec<Self> {
        let n = self.dim();
        (0..1usize << n)
            .map(|bits| {
                let mut c = *self;
                c.level += 1;
                for a in 0..n {
                    c.idx[a] = 2 * self.idx[a] + ((bits >> (n - 1 - a)) & 1) as i64;
                }
                c
            })
            .collect()
    }

    fn shifted(&self, d: &[i64]) -> Self {
        let mut out = *self;
        for (m, s) in out.idx.iter_mut().zip(d) {
            *m += s;
        }
        out
    }

    /// Whether `other` is this cube or one of its descendants.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.dim == self.dim && other.level >= self.level && other.ancestor(self.level) == *self
    }

    /// Whether the closures intersect (exact integer arithmetic).
    pub fn touches(&self, other: &DyadicCube) -> bool {
        let top = self.level.max(other.level);
        let (a, b) = (1i64 << (top - self.level), 1i64 << (top - other.level));
        (0..self.dim()).all(|i| {
            let (lo1, hi1) = (self.idx[i] * a, (self.idx[i] + 1) * a);
            let (lo2, hi2) = (other.idx[i] * b, (other.idx[i] + 1) * b);
            lo1 <= hi2 && lo2 <= hi1
        })
    }

    /// Whether the open cubes intersect.
    pub fn overlaps(&self, other: &DyadicCube) -> bool {
        self.contains(other) || other.contains(self)
    }
}

/// The boundary `Gamma` the cubes accumulate at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Boundary {
    /// The plane `{x'' = 0}`; the domain is `R^n \ R^l`.
    Plane { split: PlaneSplit },
    /// The endpoints `{0, 1}` of the domain `(0, 1)`.
    UnitInterval,
}

impl Boundary {
    pub fn dim(&self) -> usize {
        match self {
            Boundary::Plane { split } => split.n(),
            Boundary::UnitInterval => 1,
        }
    }

    /// Distance of a closed box to the boundary, zero if it meets it.
    pub fn box_distance(&self, b: &Aabb) -> f64 {
        match self {
            Boundary::Plane { split } => split
                .normal_axes()
                .map(|a| {
                    let g = if b.lower[a] > 0.0 {
                        b.lower[a]
                    } else if b.upper[a] < 0.0 {
                        -b.upper[a]
                    } else {
                        0.0
                    };
                    g * g
                })
                .sum::<f64>()
                .sqrt(),
            Boundary::UnitInterval => b.lower[0].min(1.0 - b.upper[0]).max(0.0),
        }
    }

    pub fn point_distance(&self, x: &[f64]) -> f64 {
        match self {
            Boundary::Plane { split } => split.distance(x),
            Boundary::UnitInterval => x[0].min(1.0 - x[0]).max(0.0),
        }
    }

    /// Codimension of the boundary.
    fn codim(&self) -> usize {
        match self {
            Boundary::Plane { split } => split.codim(),
            Boundary::UnitInterval => 1,
        }
    }

    /// Volume of `{x in bbox : every normal coordinate within w of the boundary}`.
    fn slab_volume(&self, bbox: &Aabb, w: f64) -> f64 {
        let len = |lo: f64, hi: f64| (hi.min(w) - lo.max(-w)).max(0.0);
        match self {
            Boundary::Plane { split } => (0..split.n())
                .map(|a| {
                    if a < split.l() {
                        bbox.upper[a] - bbox.lower[a]
                    } else {
                        len(bbox.lower[a], bbox.upper[a])
                    }
                })
                .product(),
            Boundary::UnitInterval => {
                len(bbox.lower[0], bbox.upper[0]) + len(bbox.lower[0] - 1.0, bbox.upper[0] - 1.0)
            }
        }
    }
}

/// Whitney cubes of the domain inside a bounding box, truncated at level `j_max`.
#[derive(Clone, Debug)]
pub struct WhitneyDecomposition {
    boundary: Boundary,
    bbox: Aabb,
    j_max: u32,
    start_level: u32,
    cubes: Vec<DyadicCube>,
    dropped: Vec<DyadicCube>,
    adjacency: Vec<Vec<usize>>,
    lookup: HashMap<DyadicCube, usize>,
}

fn dyadic_start(bbox: &Aabb, j_max: u32) -> Result<u32> {
    for j in 0..=j_max {
        let s = 2f64.powi(j as i32);
        let ok = bbox.lower.iter().chain(&bbox.upper).all(|v| {
            let k = v * s;
            k == k.round() && k.abs() < 1e15
        });
        if ok {
            return Ok(j);
        }
    }
    Err(Error::param(format!(
        "bounding box corners are not multiples of 2^-{j_max}"
    )))
}

/// Decomposes `R^n \ R^l` restricted to `bbox`.
pub fn whitney_decompose(
    split: PlaneSplit,
    bbox: &Aabb,
    j_max: u32,
) -> Result<WhitneyDecomposition> {
    decompose(Boundary::Plane { split }, bbox, j_max)
}

/// Decomposes `(0, 1)`.
pub fn interval_decompose(j_max: u32) -> Result<WhitneyDecomposition> {
    decompose(
        Boundary::UnitInterval,
        &Aabb::new(vec![0.0], vec![1.0]),
        j_max,
    )
}

pub fn decompose(boundary: Boundary, bbox: &Aabb, j_max: u32) -> Result<WhitneyDecomposition> {
    let n = boundary.dim();
    if n > MAX_DIM {
        return Err(Error::param(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    if bbox.dim() != n {
        return Err(Error::param(
            "bounding box dimension does not match the boundary",
        ));
    }
    if j_max < 1 {
        return Err(Error::param("j_max must be at least 1"));
    }
    if (0..n).any(|a| !(bbox.upper[a] > bbox.lower[a])) {
        return Err(Error::param(
            "bounding box has empty interior and meets no part of the domain",
        ));
    }
    if boundary == Boundary::UnitInterval && !(bbox.lower[0] >= 0.0 && bbox.upper[0] <= 1.0) {
        return Err(Error::param("interval bounding box must lie in [0, 1]"));
    }
    let start = dyadic_start(bbox, j_max)?;
    let scale = 2f64.powi(start as i32);
    let lo: Vec<i64> = bbox
        .lower
        .iter()
        .map(|v| (v * scale).round() as i64)
        .collect();
    let hi: Vec<i64> = bbox
        .upper
        .iter()
        .map(|v| (v * scale).round() as i64)
        .collect();

    let mut accepted = Vec::new();
    let mut dropped = Vec::new();
    let mut stack = Vec::new();
    // row-major enumeration of the starting tiles, pushed in reverse for a
    // depth-first walk in storage order
    let mut tiles = Vec::new();
    let mut m = lo.clone();
    'tiles: loop {
        tiles.push(DyadicCube::new(start, &m)?);
        let mut a = n;
        while a > 0 {
            a -= 1;
            m[a] += 1;
            if m[a] < hi[a] {
                continue 'tiles;
            }
            m[a] = lo[a];
        }
        break;
    }
    stack.extend(tiles.into_iter().rev());
    while let Some(q) = stack.pop() {
        let dist = boundary.box_distance(&q.inner());
        if dist >= ACCEPT_FACTOR * q.diam() {
            accepted.push(q);
        } else if q.level >= j_max {
            dropped.push(q);
        } else {
            stack.extend(q.children().into_iter().rev());
        }
    }
    if accepted.is_empty() {
        return Err(Error::param(format!(
            "no Whitney cube of level <= {j_max} fits in the bounding box"
        )));
    }
    Ok(WhitneyDecomposition::assemble(
        boundary,
        bbox.clone(),
        j_max,
        start,
        accepted,
        dropped,
    ))
}

/// Measured Whitney invariants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhitneyDiagnostics {
    pub disjoint: bool,
    /// Volume of the bounding box not covered by inner cubes.
    pub covering_defect: f64,
    /// Volume of the truncation collar the defect is allowed to occupy.
    pub collar_allowance: f64,
    pub collar_width: f64,
    /// `[min, max]` of `dist(Q^1, Gamma) / 2^-j` over cubes below the starting level.
    pub distance_ratio_range: [f64; 2],
    /// Smallest `dist(Q^1, Gamma) / side` over all cubes, starting level included.
    pub min_distance_ratio: f64,
    pub max_adjacent_level_gap: u32,
    pub passed: bool,
}

/// Largest admissible `c2 / c1` of the distance bracket.
pub const MAX_RATIO_SPREAD: f64 = 8.0;

impl WhitneyDecomposition {
    /// Builds a decomposition from an explicit cube list (used to audit
    /// hand-made or perturbed lists).
    pub fn from_cubes(
        boundary: Boundary,
        bbox: Aabb,
        j_max: u32,
        cubes: Vec<DyadicCube>,
    ) -> Result<Self> {
        let start = dyadic_start(&bbox, j_max)?;
        if cubes.iter().any(|c| c.dim() != boundary.dim()) {
            return Err(Error::param("cube dimension does not match the boundary"));
        }
        Ok(Self::assemble(
            boundary,
            bbox,
            j_max,
            start,
            cubes,
            Vec::new(),
        ))
    }

    fn assemble(
        boundary: Boundary,
        bbox: Aabb,
        j_max: u32,
        start_level: u32,
        mut cubes: Vec<DyadicCube>,
        mut dropped: Vec<DyadicCube>,
    ) -> Self {
        cubes.sort();
        dropped.sort();
        let mut lookup = HashMap::with_capacity(cubes.len());
        for (i, c) in cubes.iter().enumerate() {
            lookup.entry(*c).or_insert(i);
        }
        let mut out = Self {
            boundary,
            bbox,
            j_max,
            start_level,
            cubes,
            dropped,
            adjacency: Vec::new(),
            lookup,
        };
        out.adjacency = out.build_adjacency();
        out
    }

    /// Every touching pair is found from its finer member: the coarser
    /// cube is an ancestor of one of the finer cube's same-level neighbours.
    fn build_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let min_level = self.cubes.iter().map(|c| c.level).min().unwrap_or(0);
        let dirs = directions(n);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.cubes.len()];
        for (i, q) in self.cubes.iter().enumerate() {
            for d in &dirs {
                let nb = q.shifted(d);
                for lv in (min_level..=q.level).rev() {
                    let a = nb.ancestor(lv);
                    if a.contains(q) {
                        break;
                    }
                    if let Some(&k) = self.lookup.get(&a) {
                        if k != i {
                            adj[i].push(k);
                            adj[k].push(i);
                        }
                        break;
                    }
                }
            }
        }
        for v in adj.iter_mut() {
            v.sort_unstable();
            v.dedup();
        }
        adj
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn dim(&self) -> usize {
        self.boundary.dim()
    }
    pub fn bbox(&self) -> &Aabb {
        &self.bbox
    }
    pub fn j_max(&self) -> u32 {
        self.j_max
    }
    pub fn start_level(&self) -> u32 {
        self.start_level
    }
    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }
    /// Cubes of level `j_max` still too close to the boundary; their union is
    /// the uncovered truncation collar.
    pub fn dropped(&self) -> &[DyadicCube] {
        &self.dropped
    }
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }
    pub fn find(&self, cube: &DyadicCube) -> Option<usize> {
        self.lookup.get(cube).copied()
    }

    /// Cube counts `M_j` per level.
    pub fn level_counts(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cubes {
            *out.entry(c.level).or_insert(0) += 1;
        }
        out
    }

    /// `dist(Q^1, Gamma) / side(Q^0)`.
    pub fn outer_distance_ratio(&self, cube: &DyadicCube) -> f64 {
        self.boundary.box_distance(&cube.outer()) / cube.side()
    }

    pub fn collar_width(&self) -> f64 {
        let n = self.dim() as f64;
        (ACCEPT_FACTOR * n.sqrt() + (self.boundary.codim() as f64).sqrt())
            * 0.5f64.powi(self.j_max as i32)
    }

    pub fn verify(&self) -> WhitneyDiagnostics {
        verify_whitney(self)
    }
}

fn directions(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let d: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if d.iter().any(|&v| v != 0) {
            out.push(d);
        }
    }
    out
}

pub fn verify_whitney(dec: &WhitneyDecomposition) -> WhitneyDiagnostics {
    let set: HashSet<DyadicCube> = dec.cubes.iter().copied().collect();
    let min_level = dec.cubes.iter().map(|c| c.level).min().unwrap_or(0);
    let mut disjoint = set.len() == dec.cubes.len();
    for c in &dec.cubes {
        if (min_level..c.level).any(|lv| set.contains(&c.ancestor(lv))) {
            disjoint = false;
            break;
        }
    }
    let bbox_volume: f64 = (0..dec.dim())
        .map(|a| dec.bbox.upper[a] - dec.bbox.lower[a])
        .product();
    let covered: f64 = dec.cubes.iter().map(|c| c.volume()).sum();
    let covering_defect = bbox_volume - covered;
    let collar_width = dec.collar_width();
    let collar_allowance = dec.boundary.slab_volume(&dec.bbox, collar_width);

    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut min_all = f64::INFINITY;
    for c in &dec.cubes {
        let r = dec.outer_distance_ratio(c);
        min_all = min_all.min(r);
        if c.level >= 1 && c.level > dec.start_level {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if !lo.is_finite() {
        lo = min_all;
        hi = min_all;
    }
    let mut gap = 0;
    for (i, nb) in dec.adjacency.iter().enumerate() {
        for &k in nb {
            gap = gap.max(dec.cubes[i].level.abs_diff(dec.cubes[k].level));
        }
    }
    let passed = disjoint
        && gap <= 1
        && min_all > 0.0
        && lo > 0.0
        && hi / lo <= MAX_RATIO_SPREAD
        && covering_defect <= collar_allowance * (1.0 + 1e-12) + 1e-15
        && covering_defect >= -1e-12;
    WhitneyDiagnostics {
        disjoint,
        covering_defect,
        collar_allowance,
        collar_width,
        distance_ratio_range: [lo, hi],
        min_distance_ratio: min_all,
        max_adjacent_level_gap: gap,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairwise_disjoint(cubes: &[DyadicCube]) -> bool {
        for i in 0..cubes.len() {
            for k in i + 1..cubes.len() {
                if cubes[i].overlaps(&cubes[k]) {
                    return false;
                }
            }
        }
        true
    }

    fn pairwise_gap(cubes: &[DyadicCube]) -> u32 {
        let mut gap = 0;
        for i in 0..cubes.len() {
            for k in i + 1..cubes.len() {
                if cubes[i].touches(&cubes[k]) {
                    gap = gap.max(cubes[i].level.abs_diff(cubes[k].level));
                }
            }
        }
        gap
    }

    fn split(n: usize, l: usize) -> PlaneSplit {
        PlaneSplit::new(n, l).unwrap()
    }

    #[test]
    fn interval_accumulates_at_both_ends() {
        let dec = interval_decompose(7).unwrap();
        let d = dec.verify();
        assert!(d.passed, "{d:?}");
        let first = dec
            .cubes()
            .iter()
            .min_by(|a, b| a.inner().lower[0].total_cmp(&b.inner().lower[0]))
            .unwrap();
        let last = dec
            .cubes()
            .iter()
            .max_by(|a, b| a.inner().upper[0].total_cmp(&b.inner().upper[0]))
            .unwrap();
        assert_eq!(first.level(), last.level());
        assert!(first.level() >= 6);
        assert!(d.max_adjacent_level_gap <= 1);
    }

    #[test]
    fn plane_in_two_dimensions() {
        let dec = whitney_decompose(split(2, 1), &Aabb::cube(2, 1.0), 6).unwrap();
        let d = dec.verify();
        assert!(d.passed, "{d:?}");
        assert!(pairwise_disjoint(dec.cubes()));
        assert_eq!(pairwise_gap(dec.cubes()), d.max_adjacent_level_gap);
        // frozen bracket for the enlarged cubes
        let [lo, hi] = d.distance_ratio_range;
        assert!(lo >= 2.0 * 2f64.sqrt() - 0.5 - 1e-12, "{lo}");
        assert!(hi < 6.0 * 2f64.sqrt(), "{hi}");
        assert!(hi / lo <= MAX_RATIO_SPREAD);
        let counts = dec.level_counts();
        assert_eq!(
            counts.keys().copied().collect::<Vec<_>>(),
            vec![2, 3, 4, 5, 6]
        );
    }

    #[test]
    fn adjacency_matches_brute_force() {
        let dec = whitney_decompose(split(2, 1), &Aabb::cube(2, 1.0), 5).unwrap();
        for (i, a) in dec.cubes().iter().enumerate() {
            let brute: Vec<usize> = (0..dec.cubes().len())
                .filter(|&k| k != i && a.touches(&dec.cubes()[k]))
                .collect();
            assert_eq!(dec.neighbours(i), brute.as_slice());
        }
    }

    #[test]
    fn punctured_plane_counts_are_level_uniform() {
        let dec = whitney_decompose(split(2, 0), &Aabb::cube(2, 1.0), 7).unwrap();
        assert!(dec.verify().passed);
        let counts = dec.level_counts();
        let inner: Vec<usize> = (3..=6).map(|j| counts[&j]).collect();
        assert!(inner.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
    }

    #[test]
    fn three_dimensions() {
        let dec = whitney_decompose(split(3, 1), &Aabb::cube(3, 1.0), 5).unwrap();
        let d = dec.verify();
        assert!(d.passed, "{d:?}");
    }

    #[test]
    fn cube_moved_onto_the_plane_fails() {
        let dec = whitney_decompose(split(2, 1), &Aabb::cube(2, 1.0), 4).unwrap();
        let mut cubes = dec.cubes().to_vec();
        let mut moved = cubes.pop().unwrap();
        moved = DyadicCube::new(moved.level(), &[moved.index()[0], 0]).unwrap();
        cubes.push(moved);
        let bad =
            WhitneyDecomposition::from_cubes(dec.boundary(), dec.bbox().clone(), 4, cubes).unwrap();
        let d = bad.verify();
        assert_eq!(d.min_distance_ratio, 0.0);
        assert!(!d.passed);
    }

    #[test]
    fn overlapping_list_is_not_disjoint() {
        let dec = whitney_decompose(split(2, 1), &Aabb::cube(2, 1.0), 4).unwrap();
        let mut cubes = dec.cubes().to_vec();
        cubes.push(cubes[0].children()[0]);
        let bad =
            WhitneyDecomposition::from_cubes(dec.boundary(), dec.bbox().clone(), 4, cubes).unwrap();
        assert!(!bad.verify().disjoint);
    }

    #[test]
    fn rejects_degenerate_and_misaligned_boxes() {
        assert!(
            whitney_decompose(split(2, 1), &Aabb::new(vec![0.0, 0.0], vec![1.0, 0.0]), 4).is_err()
        );
        assert!(
            whitney_decompose(split(2, 1), &Aabb::new(vec![0.0, 0.0], vec![0.3, 1.0]), 4).is_err()
        );
        assert!(whitney_decompose(split(2, 1), &Aabb::cube(2, 1.0), 0).is_err());
    }
}
