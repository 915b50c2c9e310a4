//! Separated point sets in the dyadic shells around the plane.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PlaneSplit;

/// Points `x^{j,k}` in the shell `S_j^* = {|x'| < 1, 2^-j-1 <= |x''| < 2^-j}`.
///
/// Tangential coordinates run over `2^-j (Z^l + 1/2)` with `|x'| < 1`; the
/// normal offsets are `+-3/4 2^-j` in codimension one, the corners
/// `(+-1/2, .., +-1/2) 2^-j` in codimension two and three, and `+-3/4 2^-j e_i`
/// beyond.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellLattice {
    pub level: u32,
    pub split: PlaneSplit,
    pub points: Vec<Vec<f64>>,
}

fn normal_offsets(codim: usize) -> Vec<Vec<f64>> {
    match codim {
        1 => vec![vec![-0.75], vec![0.75]],
        2 | 3 => (0..1usize << codim)
            .map(|bits| {
                (0..codim)
                    .map(|i| {
                        if (bits >> (codim - 1 - i)) & 1 == 1 {
                            0.5
                        } else {
                            -0.5
                        }
                    })
                    .collect()
            })
            .collect(),
        _ => (0..codim)
            .flat_map(|i| {
                [-0.75, 0.75].into_iter().map(move |s| {
                    let mut v = vec![0.0; codim];
                    v[i] = s;
                    v
                })
            })
            .collect(),
    }
}

fn tangential_points(l: usize, side: f64) -> Vec<Vec<f64>> {
    if l == 0 {
        return vec![Vec::new()];
    }
    let per_axis = (1.0 / side).round() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-per_axis; l];
    'odo: loop {
        let p: Vec<f64> = idx.iter().map(|&k| (k as f64 + 0.5) * side).collect();
        if p.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            out.push(p);
        }
        let mut a = l;
        while a > 0 {
            a -= 1;
            idx[a] += 1;
            if idx[a] < per_axis {
                continue 'odo;
            }
            idx[a] = -per_axis;
        }
        break;
    }
    out
}

pub fn shell_lattice(j: u32, split: PlaneSplit) -> Result<ShellLattice> {
    if j < 1 {
        return Err(Error::param("shell level j must be at least 1"));
    }
    let side = 0.5f64.powi(j as i32);
    let normals = normal_offsets(split.codim());
    let mut points = Vec::new();
    for t in tangential_points(split.l(), side) {
        for nrm in &normals {
            let mut p = t.clone();
            p.extend(nrm.iter().map(|v| v * side));
            points.push(p);
        }
    }
    Ok(ShellLattice {
        level: j,
        split,
        points,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl ShellLattice {
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// `C_j`.
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Whether `x` lies in `S_j^l = {|x'| < 1, |x''| < 2^-j}`.
    pub fn in_tube(&self, x: &[f64]) -> bool {
        let (t, n) = self.split.split(x);
        t.iter().map(|v| v * v).sum::<f64>() < 1.0
            && n.iter().map(|v| v * v).sum::<f64>().sqrt() < self.side()
    }

    /// Whether `x` lies in the shell `S_j^l \ S_{j+1}^l`.
    pub fn in_shell(&self, x: &[f64]) -> bool {
        self.in_tube(x) && self.split.distance(x) >= 0.5 * self.side()
    }

    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.points.len() {
            for k in i + 1..self.points.len() {
                m = m.min(dist(&self.points[i], &self.points[k]));
            }
        }
        m
    }

    /// Distance from `x` to the nearest lattice point.
    pub fn nearest_distance(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| dist(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Uniform random point of the shell (rejection sampling).
    pub fn random_shell_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        let n = self.split.n();
        let s = self.side();
        loop {
            let x: Vec<f64> = (0..n)
                .map(|a| {
                    if a < self.split.l() {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        rng.gen_range(-s..s)
                    }
                })
                .collect();
            if self.in_shell(&x) {
                return x;
            }
        }
    }

    /// Largest nearest-point distance over `samples` random shell points,
    /// in units of `2^-j`.
    pub fn covering_audit(&self, samples: usize, rng: &mut impl Rng) -> f64 {
        (0..samples)
            .map(|_| self.nearest_distance(&self.random_shell_point(rng)) / self.side())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_scale_with_tangential_volume() {
        let split = PlaneSplit::new(2, 1).unwrap();
        for j in 3..=6 {
            let lat = shell_lattice(j, split).unwrap();
            assert_eq!(lat.count() as f64 / 2f64.powi(j as i32), 4.0);
            assert!(lat.points.iter().all(|p| lat.in_shell(p)));
            assert!(lat.min_separation() >= lat.side() - 1e-15);
        }
    }

    #[test]
    fn shell_is_covered_within_unit_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, l) in [(2, 1), (3, 1), (2, 0), (3, 0)] {
            let lat = shell_lattice(4, PlaneSplit::new(n, l).unwrap()).unwrap();
            let r = lat.covering_audit(1000, &mut rng);
            assert!(r < 1.0, "n={n} l={l} r={r}");
            assert!(lat.points.iter().all(|p| lat.in_shell(p)));
            assert!(lat.min_separation() >= lat.side() - 1e-15);
        }
    }

    #[test]
    fn level_zero_rejected() {
        assert!(shell_lattice(0, PlaneSplit::new(2, 1).unwrap()).is_err());
    }
}
