//! Extremal families for the Hardy inequalities: the multi-level sums `f_J`
//! built on the shell lattices, and single dilated bumps at distance
//! `~2^-j` from the plane.

use rand::Rng;
use serde::Serialize;

use super::lattice::shell_lattice;
use crate::discretize::{Aabb, Alignment, Expr, GridBox, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::{conjugate, PlaneSplit};
use crate::profile::plateau;

/// `amplitude * psi(scale * |x - centre|)` with the radial plateau `psi`
/// (1 on `r <= 1/2`, 0 on `r >= 1`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub centre: Vec<f64>,
    pub scale: f64,
    pub amplitude: f64,
    pub level: u32,
}

impl Bump {
    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = self
            .centre
            .iter()
            .zip(x)
            .map(|(c, v)| (v - c) * (v - c))
            .sum();
        let r = r2.sqrt() * self.scale;
        if r >= 1.0 {
            0.0
        } else {
            self.amplitude * plateau(r)
        }
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.scale
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessKind {
    /// `J^{-1/p} sum_{j=1}^J sum_k psi(2^{j-1}(x - x^{j,k}))`
    MultiLevel { levels: u32, p: f64 },
    /// `2^{-j(s - n/p)} psi(2^j x - m)`, `m = 2 e_n`
    Subcritical { level: u32, s: f64, p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub split: PlaneSplit,
    pub bumps: Vec<Bump>,
}

pub fn fj_witness(levels: u32, p: f64, split: PlaneSplit) -> Result<Witness> {
    if levels < 2 {
        return Err(Error::param("f_J needs J >= 2"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("p={p} must lie in [1, inf)")));
    }
    let amplitude = (levels as f64).powf(-1.0 / p);
    let mut bumps = Vec::new();
    for j in 1..=levels {
        for c in shell_lattice(j, split)?.points {
            bumps.push(Bump {
                centre: c,
                scale: 2f64.powi(j as i32 - 1),
                amplitude,
                level: j,
            });
        }
    }
    Ok(Witness {
        kind: WitnessKind::MultiLevel { levels, p },
        split,
        bumps,
    })
}

pub fn subcritical_witness(level: u32, s: f64, p: f64, split: PlaneSplit) -> Result<Witness> {
    if !(p >= 1.0 && p.is_finite()) || !(s > 0.0) {
        return Err(Error::param(format!(
            "need s > 0 and p in [1, inf), got s={s}, p={p}"
        )));
    }
    let n = split.n();
    let side = 0.5f64.powi(level as i32);
    let mut centre = vec![0.0; n];
    centre[n - 1] = 2.0 * side;
    let amplitude = side.powf(s - n as f64 / p);
    Ok(Witness {
        kind: WitnessKind::Subcritical { level, s, p },
        split,
        bumps: vec![Bump {
            centre,
            scale: 1.0 / side,
            amplitude,
            level,
        }],
    })
}

impl Witness {
    pub fn finest_level(&self) -> u32 {
        self.bumps.iter().map(|b| b.level).max().unwrap_or(0)
    }

    /// Bounding box of all bump supports.
    pub fn support_box(&self) -> Aabb {
        let n = self.split.n();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for b in &self.bumps {
            for a in 0..n {
                lo[a] = lo[a].min(b.centre[a] - b.radius());
                hi[a] = hi[a].max(b.centre[a] + b.radius());
            }
        }
        Aabb::new(lo, hi)
    }

    /// Largest admissible spacing, `2^{-J-2}` for the finest level `J`.
    pub fn max_spacing(&self) -> f64 {
        match self.kind {
            WitnessKind::MultiLevel { levels, .. } => 0.5f64.powi(levels as i32 + 2),
            WitnessKind::Subcritical { level, .. } => 0.5f64.powi(level as i32 + 2),
        }
    }

    /// Cell-centered box twice the support box on every axis, symmetric
    /// about the origin, at spacing `h`.
    pub fn grid_with_spacing(&self, h: f64) -> Result<GridBox> {
        if h > self.max_spacing() * (1.0 + 1e-12) {
            return Err(Error::TooCoarse(format!(
                "spacing {h} does not resolve the finest bump (need <= {})",
                self.max_spacing()
            )));
        }
        let sup = self.support_box();
        let half: Vec<f64> = (0..self.split.n())
            .map(|a| {
                let ext = sup.lower[a].abs().max(sup.upper[a].abs());
                (2.0 * ext / h).ceil() * h
            })
            .collect();
        GridBox::new(
            half.iter().map(|v| -v).collect(),
            half.clone(),
            vec![h; half.len()],
            Alignment::CellCentered,
        )
    }

    /// Default grid: spacing `2^{-J-2}` for `f_J`, `2^{-j}/32` for the single bump.
    pub fn default_grid(&self) -> Result<GridBox> {
        let h = match self.kind {
            WitnessKind::MultiLevel { .. } => self.max_spacing(),
            WitnessKind::Subcritical { level, .. } => 0.5f64.powi(level as i32 + 5),
        };
        self.grid_with_spacing(h)
    }

    /// Samples by accumulating each bump over the cells it covers, in bump order.
    pub fn sample_on(&self, grid: &GridBox) -> Result<GridFunction> {
        let n = self.split.n();
        if grid.dim() != n {
            return Err(Error::param("grid dimension does not match the witness"));
        }
        let shape = grid.shape();
        let coords: Vec<Vec<f64>> = (0..n).map(|a| grid.axis_coords(a)).collect();
        let mut samples = vec![0.0; grid.len()];
        let mut ranges = vec![(0usize, 0usize); n];
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for b in &self.bumps {
            let r = b.radius();
            let mut empty = false;
            for a in 0..n {
                let c = &coords[a];
                let lo = c.partition_point(|v| *v <= b.centre[a] - r);
                let hi = c.partition_point(|v| *v < b.centre[a] + r);
                if lo >= hi {
                    empty = true;
                }
                ranges[a] = (lo, hi);
            }
            if empty {
                continue;
            }
            for a in 0..n {
                idx[a] = ranges[a].0;
            }
            'odo: loop {
                let mut lin = 0;
                for a in 0..n {
                    x[a] = coords[a][idx[a]];
                    lin = lin * shape[a] + idx[a];
                }
                samples[lin] += b.eval(&x);
                let mut a = n;
                while a > 0 {
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < ranges[a].1 {
                        continue 'odo;
                    }
                    idx[a] = ranges[a].0;
                }
                break;
            }
        }
        let mut g = GridFunction::new(grid.clone(), samples, self.describe())?;
        g.declare_support(&self.support_box());
        Ok(g)
    }

    /// Smallest value at `samples` uniform random points of
    /// `S_J^l = {|x'| < 1, |x''| < 2^-J}`.
    pub fn min_on_tube(&self, level: u32, samples: usize, rng: &mut impl Rng) -> f64 {
        let lat = shell_lattice(level.max(1), self.split).expect("level >= 1");
        let n = self.split.n();
        let s = lat.side();
        let mut m = f64::INFINITY;
        let mut k = 0;
        while k < samples {
            let x: Vec<f64> = (0..n)
                .map(|a| {
                    if a < self.split.l() {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        rng.gen_range(-s..s)
                    }
                })
                .collect();
            if !lat.in_tube(&x) || self.split.distance(&x) == 0.0 {
                continue;
            }
            k += 1;
            m = m.min(self.eval(&x));
        }
        m
    }

    /// Largest number of same-level bumps whose support contains a point,
    /// over `samples` random points of the support box.
    pub fn max_overlap_per_level(&self, samples: usize, rng: &mut impl Rng) -> usize {
        let sup = self.support_box();
        let top = self.finest_level();
        let mut worst = 0;
        let mut counts = vec![0usize; top as usize + 1];
        for _ in 0..samples {
            let x: Vec<f64> = (0..self.split.n())
                .map(|a| rng.gen_range(sup.lower[a]..sup.upper[a]))
                .collect();
            counts.iter_mut().for_each(|c| *c = 0);
            for b in &self.bumps {
                if b.eval(&x) > 0.0 {
                    counts[b.level as usize] += 1;
                }
            }
            worst = worst.max(counts.iter().copied().max().unwrap_or(0));
        }
        worst
    }

    /// `min dist(supp bump, plane) / 2^-level` over the bumps.
    pub fn relative_plane_distance(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| (self.split.distance(&b.centre) - b.radius()) * 2f64.powi(b.level as i32))
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower bound `J^{1/p'}` of `f_J` on `S_J^l`.
    pub fn tube_lower_bound(&self) -> Option<f64> {
        match self.kind {
            WitnessKind::MultiLevel { levels, p } => {
                let pc = conjugate(p);
                Some(if pc.is_infinite() {
                    1.0
                } else {
                    (levels as f64).powf(1.0 / pc)
                })
            }
            WitnessKind::Subcritical { .. } => None,
        }
    }
}

impl Expr for Witness {
    fn dim(&self) -> usize {
        self.split.n()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.bumps.iter().map(|b| b.eval(x)).sum()
    }
    fn describe(&self) -> String {
        match self.kind {
            WitnessKind::MultiLevel { levels, p } => format!("f_J(J={levels},p={p})"),
            WitnessKind::Subcritical { level, s, p } => format!("f_j(j={level},s={s},p={p})"),
        }
    }
    fn support(&self) -> Option<Aabb> {
        Some(self.support_box())
    }
}

/// `f_J` sampled on its default grid.
pub fn build_fj(levels: u32, p: f64, split: PlaneSplit) -> Result<GridFunction> {
    let w = fj_witness(levels, p, split)?;
    w.sample_on(&w.default_grid()?)
}

/// `f_J` at spacing `h <= 2^{-J-2}`.
pub fn build_fj_with_spacing(
    levels: u32,
    p: f64,
    split: PlaneSplit,
    h: f64,
) -> Result<GridFunction> {
    let w = fj_witness(levels, p, split)?;
    w.sample_on(&w.grid_with_spacing(h)?)
}

pub fn build_subcritical_witness(
    level: u32,
    s: f64,
    p: f64,
    split: PlaneSplit,
) -> Result<GridFunction> {
    let w = subcritical_witness(level, s, p, split)?;
    w.sample_on(&w.default_grid()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::grid::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn split() -> PlaneSplit {
        PlaneSplit::new(2, 1).unwrap()
    }

    #[test]
    fn splat_matches_pointwise_sampling() {
        let w = fj_witness(3, 2.0, split()).unwrap();
        let grid = w.default_grid().unwrap();
        let a = w.sample_on(&grid).unwrap();
        let b = sample(&w, &grid).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(a.is_inner_supported());
    }

    #[test]
    fn tube_lower_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = fj_witness(4, 2.0, split()).unwrap();
        let m = w.min_on_tube(4, 1000, &mut rng);
        assert!(m >= 2.0 - 1e-12, "{m}");
        assert_eq!(w.tube_lower_bound(), Some(2.0));
    }

    #[test]
    fn same_level_overlap_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = fj_witness(2, 2.0, split()).unwrap();
        assert!(w.max_overlap_per_level(2000, &mut rng) <= 10);
    }

    #[test]
    fn subcritical_support_distance() {
        for j in 2..=5 {
            let w = subcritical_witness(j, 0.25, 2.0, split()).unwrap();
            let d = w.relative_plane_distance();
            assert!((1.0..=3.0).contains(&d), "{d}");
            let g = w.sample_on(&w.default_grid().unwrap()).unwrap();
            assert!(g.is_inner_supported());
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let w = fj_witness(4, 2.0, split()).unwrap();
        assert!(matches!(
            w.grid_with_spacing(1.0 / 16.0),
            Err(Error::TooCoarse(_))
        ));
        assert!(fj_witness(1, 2.0, split()).is_err());
    }
}
