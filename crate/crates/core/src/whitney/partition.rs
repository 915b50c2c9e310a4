use rayon::prelude::*;
use serde::Serialize;

use super::{DyadicCube, WhitneyDecomposition};
use crate::discretize::GridBox;
use crate::error::{Error, Result};
use crate::geometry::MultiIndex;
use crate::profile::mollifier;

/// Highest derivative order with closed-form bump derivatives.
pub const MAX_BUMP_ORDER: u32 = 2;

/// Value, gradient and row-major Hessian of one bump at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl RhoJet {
    fn zero(n: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    fn add(&mut self, o: &RhoJet) {
        self.value += o.value;
        self.grad.iter_mut().zip(&o.grad).for_each(|(a, b)| *a += b);
        self.hess.iter_mut().zip(&o.hess).for_each(|(a, b)| *a += b);
    }

    /// `D^alpha` for `|alpha| <= 2`.
    pub fn component(&self, alpha: &MultiIndex) -> Option<f64> {
        let n = self.grad.len();
        let e = alpha.entries();
        match alpha.order() {
            0 => Some(self.value),
            1 => e.iter().position(|&k| k == 1).map(|a| self.grad[a]),
            2 => {
                let axes: Vec<usize> = (0..n)
                    .flat_map(|a| std::iter::repeat(a).take(e[a] as usize))
                    .collect();
                Some(self.hess[axes[0] * n + axes[1]])
            }
            _ => None,
        }
    }
}

/// Measured `sup |D^alpha rho_{j,.}| / 2^{j|alpha|}` over the cubes of one level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeBound {
    pub level: u32,
    pub alpha: Vec<u32>,
    pub sup: f64,
    pub ratio: f64,
}

/// Shepard-normalized tensor mollifier bumps, one per Whitney cube, each
/// supported in the cube's enlarged cube `Q^1`.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    dec: WhitneyDecomposition,
    order: u32,
    levels: Vec<u32>,
    bounds: Vec<DerivativeBound>,
}

/// Sample points per axis when measuring derivative bounds.
pub fn default_samples(dim: usize) -> usize {
    if dim <= 2 {
        9
    } else {
        3
    }
}

pub fn partition_of_unity(dec: &WhitneyDecomposition, order: u32) -> Result<PartitionOfUnity> {
    partition_of_unity_sampled(dec, order, default_samples(dec.dim()))
}

/// `samples = 0` skips the derivative-bound measurement.
pub fn partition_of_unity_sampled(
    dec: &WhitneyDecomposition,
    order: u32,
    samples: usize,
) -> Result<PartitionOfUnity> {
    if order < 1 || order > MAX_BUMP_ORDER {
        return Err(Error::param(format!(
            "bump derivative order {order} outside 1..={MAX_BUMP_ORDER}"
        )));
    }
    let diag = dec.verify();
    if !diag.disjoint || diag.covering_defect > diag.collar_allowance * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Precondition(format!(
            "covering defect {} exceeds the truncation collar allowance {}",
            diag.covering_defect, diag.collar_allowance
        )));
    }
    let mut levels: Vec<u32> = dec.level_counts().keys().copied().collect();
    levels.sort_unstable();
    let mut pou = PartitionOfUnity {
        dec: dec.clone(),
        order,
        levels,
        bounds: Vec::new(),
    };
    if samples > 0 {
        pou.bounds = pou.measure_bounds(samples);
    }
    Ok(pou)
}

impl PartitionOfUnity {
    pub fn decomposition(&self) -> &WhitneyDecomposition {
        &self.dec
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn bounds(&self) -> &[DerivativeBound] {
        &self.bounds
    }

    /// Unnormalized tensor bump of cube `q` with derivatives.
    pub fn raw_jet(&self, q: usize, x: &[f64]) -> RhoJet {
        bump_jet(&self.dec.cubes()[q], x)
    }

    /// Indices of cubes whose bump is nonzero at `x`, ascending.
    pub fn active(&self, x: &[f64]) -> Vec<usize> {
        let n = self.dec.dim();
        let mut out = Vec::new();
        let mut ranges = vec![(0i64, 0i64); n];
        let mut m = vec![0i64; n];
        for &j in &self.levels {
            let s = 0.5f64.powi(j as i32);
            for a in 0..n {
                let u = x[a] / s;
                ranges[a] = ((u - 1.5).floor() as i64 + 1, (u + 0.5).ceil() as i64 - 1);
            }
            for a in 0..n {
                m[a] = ranges[a].0;
            }
            'odo: loop {
                if let Ok(c) = DyadicCube::new(j, &m) {
                    if let Some(k) = self.dec.find(&c) {
                        if bump_value(&self.dec.cubes()[k], x) > 0.0 {
                            out.push(k);
                        }
                    }
                }
                let mut a = n;
                while a > 0 {
                    a -= 1;
                    m[a] += 1;
                    if m[a] <= ranges[a].1 {
                        continue 'odo;
                    }
                    m[a] = ranges[a].0;
                }
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// `sum_Q b_Q(x)` over the unnormalized bumps.
    pub fn covering_sum(&self, x: &[f64]) -> f64 {
        self.active(x)
            .iter()
            .map(|&k| bump_value(&self.dec.cubes()[k], x))
            .sum()
    }

    /// `rho_q(x)`.
    pub fn value(&self, q: usize, x: &[f64]) -> f64 {
        let b = bump_value(&self.dec.cubes()[q], x);
        if b == 0.0 {
            return 0.0;
        }
        b / self.covering_sum(x)
    }

    /// `(cube, rho(x))` for every bump that is nonzero at `x`.
    pub fn contributions(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let act = self.active(x);
        let vals: Vec<f64> = act
            .iter()
            .map(|&k| bump_value(&self.dec.cubes()[k], x))
            .collect();
        let total: f64 = vals.iter().sum();
        act.into_iter()
            .zip(vals)
            .map(|(k, v)| (k, v / total))
            .collect()
    }

    /// `sum_Q rho_Q(x)`: one on the covered region, zero off every `Q^1`.
    pub fn sum(&self, x: &[f64]) -> f64 {
        self.contributions(x).iter().map(|(_, v)| v).sum()
    }

    /// `rho_q` with gradient and Hessian at `x`.
    pub fn jet(&self, q: usize, x: &[f64]) -> RhoJet {
        let n = self.dec.dim();
        let b = bump_jet(&self.dec.cubes()[q], x);
        if b.value == 0.0 {
            return RhoJet::zero(n);
        }
        let mut s = RhoJet::zero(n);
        for k in self.active(x) {
            s.add(&bump_jet(&self.dec.cubes()[k], x));
        }
        quotient(&b, &s)
    }

    /// `D^alpha rho_q(x)` for `|alpha| <= order`.
    pub fn derivative(&self, q: usize, x: &[f64], alpha: &MultiIndex) -> Result<f64> {
        if alpha.order() > self.order || alpha.dim() != self.dec.dim() {
            return Err(Error::param(format!(
                "derivative {alpha} not available (order {})",
                self.order
            )));
        }
        Ok(self.jet(q, x).component(alpha).expect("order checked"))
    }

    /// Cubes whose bump can be nonzero on `Q^1` of cube `q` (including `q`),
    /// ascending. Overlapping Whitney cubes differ by at most a few levels, so
    /// only levels within three of `q` are searched.
    pub fn overlapping(&self, q: usize) -> Vec<usize> {
        let cube = self.dec.cubes()[q];
        let n = self.dec.dim();
        let c = cube.centre();
        let sq = cube.side();
        let jq = cube.level();
        let mut out = Vec::new();
        let mut ranges = vec![(0i64, 0i64); n];
        let mut m = vec![0i64; n];
        for &j in self.levels.iter().filter(|&&j| j + 3 >= jq && j <= jq + 3) {
            let t = 0.5f64.powi(j as i32);
            for a in 0..n {
                let lo = (c[a] - sq - t) / t - 0.5;
                let hi = (c[a] + sq + t) / t - 0.5;
                ranges[a] = (lo.floor() as i64 + 1, hi.ceil() as i64 - 1);
                m[a] = ranges[a].0;
            }
            'odo: loop {
                if let Ok(k) = DyadicCube::new(j, &m) {
                    if let Some(k) = self.dec.find(&k) {
                        out.push(k);
                    }
                }
                let mut a = n;
                while a > 0 {
                    a -= 1;
                    m[a] += 1;
                    if m[a] <= ranges[a].1 {
                        continue 'odo;
                    }
                    m[a] = ranges[a].0;
                }
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// `rho_q(x)` using a precomputed [`overlapping`](Self::overlapping) list.
    pub fn value_among(&self, q: usize, overlap: &[usize], x: &[f64]) -> f64 {
        let cubes = self.dec.cubes();
        let b = bump_value(&cubes[q], x);
        if b == 0.0 {
            return 0.0;
        }
        b / overlap
            .iter()
            .map(|&k| bump_value(&cubes[k], x))
            .sum::<f64>()
    }

    /// `rho_q` on every point of `grid`, given the overlap list of `q`.
    ///
    /// Bumps are tensor products, so each one is tabulated per axis and
    /// accumulated only over the part of the grid where `b_q` is nonzero.
    pub fn values_on_grid(&self, q: usize, overlap: &[usize], grid: &GridBox) -> Vec<f64> {
        let n = self.dec.dim();
        let coords: Vec<Vec<f64>> = (0..n).map(|a| grid.axis_coords(a)).collect();
        let table = |k: usize| -> Vec<Vec<f64>> {
            let c = &self.dec.cubes()[k];
            let s = c.side();
            c.index()
                .iter()
                .enumerate()
                .map(|(a, &m)| {
                    coords[a]
                        .iter()
                        .map(|x| mollifier((x - (m as f64 + 0.5) * s) / s).v)
                        .collect()
                })
                .collect()
        };
        let nonzero = |t: &[f64]| -> (usize, usize) {
            match t.iter().position(|v| *v != 0.0) {
                Some(lo) => (lo, t.iter().rposition(|v| *v != 0.0).unwrap() + 1),
                None => (0, 0),
            }
        };
        let shape = grid.shape();
        let mut out = vec![0.0; grid.len()];
        let own = table(q);
        let range: Vec<(usize, usize)> = own.iter().map(|t| nonzero(t)).collect();
        if range.iter().any(|r| r.0 >= r.1) {
            return out;
        }
        let sub: Vec<usize> = range.iter().map(|r| r.1 - r.0).collect();
        let sub_len: usize = sub.iter().product();
        let mut denom = vec![0.0; sub_len];
        for &k in overlap {
            let t = table(k);
            // index window of bump k inside the sub-box
            let win: Vec<(usize, usize)> = (0..n)
                .map(|a| {
                    let (lo, hi) = nonzero(&t[a][range[a].0..range[a].1]);
                    (lo, hi)
                })
                .collect();
            if win.iter().any(|w| w.0 >= w.1) {
                continue;
            }
            for_each_index(&win, |idx| {
                let mut v = 1.0;
                let mut lin = 0;
                for a in 0..n {
                    v *= t[a][range[a].0 + idx[a]];
                    lin = lin * sub[a] + idx[a];
                }
                denom[lin] += v;
            });
        }
        let full: Vec<(usize, usize)> = sub.iter().map(|&m| (0, m)).collect();
        for_each_index(&full, |idx| {
            let mut v = 1.0;
            let mut lin = 0;
            let mut glob = 0;
            for a in 0..n {
                v *= own[a][range[a].0 + idx[a]];
                lin = lin * sub[a] + idx[a];
                glob = glob * shape[a] + range[a].0 + idx[a];
            }
            if v != 0.0 {
                out[glob] = v / denom[lin];
            }
        });
        out
    }

    /// Multi-indices with `|alpha| <= order`.
    pub fn alphas(&self) -> Vec<MultiIndex> {
        let n = self.dec.dim();
        let mut out = vec![MultiIndex::zero(n)];
        for a in 0..n {
            out.push(MultiIndex::axis(n, a, 1));
        }
        if self.order >= 2 {
            for a in 0..n {
                for b in a..n {
                    let mut e = vec![0; n];
                    e[a] += 1;
                    e[b] += 1;
                    out.push(MultiIndex::new(e));
                }
            }
        }
        out
    }

    fn measure_bounds(&self, samples: usize) -> Vec<DerivativeBound> {
        let alphas = self.alphas();
        let n = self.dec.dim();
        let offsets: Vec<f64> = (0..samples)
            .map(|k| -1.0 + 2.0 * (k + 1) as f64 / (samples + 1) as f64)
            .collect();
        let per_cube: Vec<Vec<f64>> = (0..self.dec.cubes().len())
            .into_par_iter()
            .map(|q| {
                let cube = self.dec.cubes()[q];
                let c = cube.centre();
                let s = cube.side();
                let mut sup = vec![0.0f64; alphas.len()];
                let mut idx = vec![0usize; n];
                let mut x = vec![0.0; n];
                'pts: loop {
                    for a in 0..n {
                        x[a] = c[a] + offsets[idx[a]] * s;
                    }
                    let jet = self.jet(q, &x);
                    for (k, al) in alphas.iter().enumerate() {
                        sup[k] = sup[k].max(jet.component(al).unwrap_or(0.0).abs());
                    }
                    let mut a = n;
                    while a > 0 {
                        a -= 1;
                        idx[a] += 1;
                        if idx[a] < samples {
                            continue 'pts;
                        }
                        idx[a] = 0;
                    }
                    break;
                }
                sup
            })
            .collect();
        let mut out = Vec::new();
        for &j in &self.levels {
            for (k, al) in alphas.iter().enumerate() {
                let sup = self
                    .dec
                    .cubes()
                    .iter()
                    .zip(&per_cube)
                    .filter(|(c, _)| c.level() == j)
                    .fold(0.0f64, |m, (_, v)| m.max(v[k]));
                out.push(DerivativeBound {
                    level: j,
                    alpha: al.entries().to_vec(),
                    sup,
                    ratio: sup / 2f64.powi((j * al.order()) as i32),
                });
            }
        }
        out
    }

    /// `max / min` of the measured ratios for `alpha` over `levels`.
    pub fn bound_spread(&self, alpha: &[u32], levels: std::ops::RangeInclusive<u32>) -> f64 {
        let r: Vec<f64> = self
            .bounds
            .iter()
            .filter(|b| b.alpha == alpha && levels.contains(&b.level))
            .map(|b| b.ratio)
            .collect();
        let hi = r.iter().cloned().fold(0.0, f64::max);
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// Levels whose cubes see the same neighbourhood pattern as their
    /// dilates: two levels away from the coarsest level present and from the
    /// truncation level.
    pub fn interior_levels(&self) -> std::ops::RangeInclusive<u32> {
        let lo = self.levels.first().copied().unwrap_or(0) + 1;
        let hi = self.dec.j_max().saturating_sub(1);
        lo..=hi
    }
}

/// Calls `f` with every multi-index in the product of half-open ranges.
fn for_each_index(ranges: &[(usize, usize)], mut f: impl FnMut(&[usize])) {
    let n = ranges.len();
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&idx);
        let mut a = n;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < ranges[a].1 {
                break;
            }
            idx[a] = ranges[a].0;
        }
    }
}

fn bump_value(c: &DyadicCube, x: &[f64]) -> f64 {
    let s = c.side();
    let mut v = 1.0;
    for (a, &m) in c.index().iter().enumerate() {
        let t = (x[a] - (m as f64 + 0.5) * s) / s;
        if t.abs() >= 1.0 {
            return 0.0;
        }
        v *= mollifier(t).v;
    }
    v
}

fn bump_jet(c: &DyadicCube, x: &[f64]) -> RhoJet {
    let n = c.dim();
    let s = c.side();
    let jets: Vec<_> = c
        .index()
        .iter()
        .enumerate()
        .map(|(a, &m)| mollifier((x[a] - (m as f64 + 0.5) * s) / s))
        .collect();
    let mut out = RhoJet::zero(n);
    if jets.iter().any(|j| j.v == 0.0) {
        return out;
    }
    let prod_except = |skip: &[usize]| -> f64 {
        (0..n)
            .filter(|b| !skip.contains(b))
            .map(|b| jets[b].v)
            .product()
    };
    out.value = prod_except(&[]);
    for a in 0..n {
        out.grad[a] = jets[a].d1 / s * prod_except(&[a]);
        for b in 0..n {
            out.hess[a * n + b] = if a == b {
                jets[a].d2 / (s * s) * prod_except(&[a])
            } else {
                jets[a].d1 * jets[b].d1 / (s * s) * prod_except(&[a, b])
            };
        }
    }
    out
}

/// Jet of `b / s`.
fn quotient(b: &RhoJet, s: &RhoJet) -> RhoJet {
    let n = b.grad.len();
    let u = 1.0 / s.value;
    let du: Vec<f64> = s.grad.iter().map(|g| -g * u * u).collect();
    let mut out = RhoJet::zero(n);
    out.value = b.value * u;
    for i in 0..n {
        out.grad[i] = b.grad[i] * u + b.value * du[i];
        for j in 0..n {
            let duu = (2.0 * s.grad[i] * s.grad[j] - s.value * s.hess[i * n + j]) * u * u * u;
            out.hess[i * n + j] =
                b.hess[i * n + j] * u + b.grad[i] * du[j] + b.grad[j] * du[i] + b.value * duu;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Aabb;
    use crate::geometry::PlaneSplit;
    use crate::whitney::whitney_decompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pou(j_max: u32) -> PartitionOfUnity {
        let dec =
            whitney_decompose(PlaneSplit::new(2, 1).unwrap(), &Aabb::cube(2, 1.0), j_max).unwrap();
        partition_of_unity(&dec, 2).unwrap()
    }

    #[test]
    fn sums_to_one_away_from_collar() {
        let p = pou(6);
        let w = p.decomposition().collar_width();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut n = 0;
        while n < 200 {
            let x: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if x[1].abs() < w {
                continue;
            }
            n += 1;
            assert!((p.sum(&x) - 1.0).abs() < 1e-8, "{x:?}");
        }
    }

    #[test]
    fn zero_outside_every_enlarged_cube() {
        let p = pou(5);
        // far outside the bounding box
        assert_eq!(p.sum(&[5.0, 5.0]), 0.0);
        // inside the plane itself no bump reaches
        assert_eq!(p.sum(&[0.3, 0.0]), 0.0);
        let q = 7;
        let outer = p.decomposition().cubes()[q].outer();
        assert_eq!(
            p.value(q, &[outer.upper[0] + 1e-9, outer.lower[1] + 1e-3]),
            0.0
        );
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = pou(5);
        let q = 20;
        let c = p.decomposition().cubes()[q].centre();
        let x = [c[0] + 0.013, c[1] - 0.021];
        let h = 1e-5;
        let jet = p.jet(q, &x);
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let fd = (p.value(q, &xp) - p.value(q, &xm)) / (2.0 * h);
            assert!(
                (fd - jet.grad[a]).abs() < 1e-5 * (1.0 + jet.grad[a].abs()),
                "{fd} {}",
                jet.grad[a]
            );
            let fd2 = (p.jet(q, &xp).grad[a] - p.jet(q, &xm).grad[a]) / (2.0 * h);
            assert!((fd2 - jet.hess[a * 2 + a]).abs() < 1e-4 * (1.0 + jet.hess[a * 3].abs()));
        }
    }

    #[test]
    fn raw_bump_scales_exactly() {
        let a = DyadicCube::new(3, &[1, 2]).unwrap();
        let b = DyadicCube::new(4, &[2, 4]).unwrap();
        let xa = [
            a.centre()[0] + 0.3 * a.side(),
            a.centre()[1] - 0.2 * a.side(),
        ];
        let xb = [
            b.centre()[0] + 0.3 * b.side(),
            b.centre()[1] - 0.2 * b.side(),
        ];
        let (ja, jb) = (bump_jet(&a, &xa), bump_jet(&b, &xb));
        assert!((ja.value / jb.value - 1.0).abs() < 1e-14);
        for k in 0..2 {
            assert!((jb.grad[k] / ja.grad[k] - 2.0).abs() < 1e-14);
        }
        for k in 0..4 {
            assert!((jb.hess[k] / ja.hess[k] - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_ratios_are_level_uniform() {
        let p = pou(6);
        let levels = p.interior_levels();
        for al in p.alphas() {
            let spread = p.bound_spread(al.entries(), levels.clone());
            assert!(
                spread <= 1.01,
                "alpha={al} spread={spread} {:?}",
                p.bounds()
            );
        }
    }

    #[test]
    fn order_validation() {
        let dec =
            whitney_decompose(PlaneSplit::new(2, 1).unwrap(), &Aabb::cube(2, 1.0), 3).unwrap();
        assert!(partition_of_unity(&dec, 0).is_err());
        assert!(partition_of_unity(&dec, 3).is_err());
    }

    #[test]
    fn overlap_lists_reproduce_values() {
        let dec =
            whitney_decompose(PlaneSplit::new(2, 1).unwrap(), &Aabb::cube(2, 1.0), 5).unwrap();
        let pou = partition_of_unity(&dec, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in (0..dec.cubes().len()).step_by(7) {
            let ov = pou.overlapping(q);
            assert!(ov.contains(&q));
            let c = dec.cubes()[q].centre();
            let s = dec.cubes()[q].side();
            for _ in 0..20 {
                let x: Vec<f64> = c.iter().map(|v| v + s * rng.gen_range(-1.0..1.0)).collect();
                assert_eq!(pou.value_among(q, &ov, &x), pou.value(q, &x));
            }
        }
    }

    #[test]
    fn grid_values_match_pointwise() {
        use crate::discretize::Alignment;
        let dec =
            whitney_decompose(PlaneSplit::new(2, 1).unwrap(), &Aabb::cube(2, 1.0), 5).unwrap();
        let pou = partition_of_unity_sampled(&dec, 1, 0).unwrap();
        assert!(pou.bounds().is_empty());
        for q in (0..dec.cubes().len()).step_by(5) {
            let c = dec.cubes()[q].centre();
            let s = dec.cubes()[q].side();
            let grid = GridBox::new(
                c.iter().map(|v| v - 2.0 * s).collect(),
                c.iter().map(|v| v + 2.0 * s).collect(),
                vec![s / 8.0; 2],
                Alignment::CellCentered,
            )
            .unwrap();
            let ov = pou.overlapping(q);
            let vals = pou.values_on_grid(q, &ov, &grid);
            grid.for_each_point(|i, x| {
                let v = pou.value(q, x);
                assert!(
                    (vals[i] - v).abs() <= 1e-14 * v.max(1e-300) + 1e-300,
                    "{} {v}",
                    vals[i]
                );
            });
        }
    }
}
