use serde::{Deserialize, Serialize};

use super::expr::{Aabb, Expr};
use crate::error::{Error, Result};
use crate::geometry::PlaneSplit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    /// Samples at cell midpoints `lower + (k + 1/2) h`.
    CellCentered,
    /// Samples at nodes `lower + k h`, both ends included.
    NodeCentered,
}

/// Uniform tensor grid over an axis-aligned box. Samples are stored in
/// row-major order (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    h: Vec<f64>,
    cells: Vec<usize>,
    alignment: Alignment,
}

impl GridBox {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        h: Vec<f64>,
        alignment: Alignment,
    ) -> Result<Self> {
        let n = lower.len();
        if n == 0 || upper.len() != n || h.len() != n {
            return Err(Error::param(
                "grid box corners and spacing must share one dimension",
            ));
        }
        let mut cells = Vec::with_capacity(n);
        for i in 0..n {
            let len = upper[i] - lower[i];
            if !(len > 0.0 && h[i] > 0.0) {
                return Err(Error::param(format!(
                    "axis {i}: empty extent or non-positive spacing"
                )));
            }
            let c = len / h[i];
            let k = c.round();
            if (c - k).abs() > 1e-6 * c.max(1.0) || k < 1.0 {
                return Err(Error::param(format!(
                    "axis {i}: extent {len} is not a multiple of spacing {}",
                    h[i]
                )));
            }
            cells.push(k as usize);
        }
        Ok(Self {
            lower,
            upper,
            h,
            cells,
            alignment,
        })
    }

    /// Same spacing on every axis.
    pub fn uniform(bounds: &Aabb, h: f64, alignment: Alignment) -> Result<Self> {
        Self::new(
            bounds.lower.clone(),
            bounds.upper.clone(),
            vec![h; bounds.dim()],
            alignment,
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
    pub fn spacing(&self) -> &[f64] {
        &self.h
    }
    pub fn alignment(&self) -> Alignment {
        self.alignment
    }
    pub fn bounds(&self) -> Aabb {
        Aabb::new(self.lower.clone(), self.upper.clone())
    }

    /// Largest spacing.
    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    /// Samples per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.cells
            .iter()
            .map(|&c| match self.alignment {
                Alignment::CellCentered => c,
                Alignment::NodeCentered => c + 1,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    #[inline]
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        let off = match self.alignment {
            Alignment::CellCentered => 0.5,
            Alignment::NodeCentered => 0.0,
        };
        self.lower[axis] + (k as f64 + off) * self.h[axis]
    }

    /// Axis coordinates.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.shape()[axis])
            .map(|k| self.coord(axis, k))
            .collect()
    }

    /// Halved spacing on every axis.
    pub fn refined(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.h[i] *= 0.5;
            out.cells[i] *= 2;
        }
        out
    }

    pub fn with_alignment(&self, alignment: Alignment) -> Self {
        Self {
            alignment,
            ..self.clone()
        }
    }

    /// Visits every sample point in storage order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let shape = self.shape();
        let n = shape.len();
        let coords: Vec<Vec<f64>> = (0..n).map(|a| self.axis_coords(a)).collect();
        let mut idx = vec![0usize; n];
        let mut x: Vec<f64> = (0..n).map(|a| coords[a][0]).collect();
        let total = self.len();
        for lin in 0..total {
            f(lin, &x);
            // odometer increment, last axis fastest
            let mut a = n;
            while a > 0 {
                a -= 1;
                idx[a] += 1;
                if idx[a] < shape[a] {
                    x[a] = coords[a][idx[a]];
                    break;
                }
                idx[a] = 0;
                x[a] = coords[a][0];
            }
        }
    }

    /// Whether a cell-centered grid keeps every sample off the plane `{x''=0}`.
    pub fn avoids_plane(&self, split: PlaneSplit) -> bool {
        split.normal_axes().any(|a| {
            let c = self.axis_coords(a);
            c.iter().all(|v| v.abs() > 1e-14 * self.h[a])
        })
    }
}

/// Sampled function on a [`GridBox`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: GridBox,
    samples: Vec<f64>,
    provenance: String,
    inner_supported: bool,
}

impl GridFunction {
    pub fn new(grid: GridBox, samples: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::param(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            samples,
            provenance: provenance.into(),
            inner_supported: false,
        })
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }
    pub fn provenance(&self) -> &str {
        &self.provenance
    }
    pub fn is_inner_supported(&self) -> bool {
        self.inner_supported
    }

    /// Declares that the function vanishes outside `support`. The flag is set
    /// only if `support` lies in the central half of the box on every axis.
    pub fn declare_support(&mut self, support: &Aabb) -> bool {
        let g = &self.grid;
        self.inner_supported = (0..g.dim()).all(|a| {
            let c = 0.5 * (g.lower[a] + g.upper[a]);
            let q = 0.25 * (g.upper[a] - g.lower[a]);
            support.lower[a] >= c - q - 1e-12 && support.upper[a] <= c + q + 1e-12
        });
        self.inner_supported
    }

    pub(crate) fn set_inner_supported(&mut self) {
        self.inner_supported = true;
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>, provenance: String) -> Self {
        Self {
            grid: self.grid.clone(),
            samples,
            provenance,
            inner_supported: self.inner_supported,
        }
    }

    /// Every second node on each axis: the same box at spacing `2h`. `None`
    /// unless the grid is node-centered with an even cell count per axis.
    pub fn coarsened(&self) -> Option<Self> {
        let g = &self.grid;
        if g.alignment != Alignment::NodeCentered || g.cells.iter().any(|&c| c % 2 != 0) {
            return None;
        }
        let coarse = GridBox::new(
            g.lower.clone(),
            g.upper.clone(),
            g.h.iter().map(|h| 2.0 * h).collect(),
            Alignment::NodeCentered,
        )
        .ok()?;
        let shape = g.shape();
        let mut samples = Vec::with_capacity(coarse.len());
        coarse.for_each_point(|_, x| {
            let idx: Vec<usize> = (0..x.len())
                .map(|a| ((x[a] - g.lower[a]) / g.h[a]).round() as usize)
                .collect();
            let mut lin = 0;
            for (a, &i) in idx.iter().enumerate() {
                lin = lin * shape[a] + i;
            }
            samples.push(self.samples[lin]);
        });
        Some(Self {
            grid: coarse,
            samples,
            provenance: format!("{} (every second node)", self.provenance),
            inner_supported: self.inner_supported,
        })
    }

    /// Multi-index of the sample nearest to `x` (grid coordinates are not interpolated).
    pub fn nearest_index(&self, x: &[f64]) -> Vec<usize> {
        let shape = self.grid.shape();
        (0..self.grid.dim())
            .map(|a| {
                let off = match self.grid.alignment {
                    Alignment::CellCentered => 0.5,
                    Alignment::NodeCentered => 0.0,
                };
                let k = ((x[a] - self.grid.lower[a]) / self.grid.h[a] - off).round();
                (k.max(0.0) as usize).min(shape[a] - 1)
            })
            .collect()
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        let shape = self.grid.shape();
        let mut lin = 0;
        for (a, &i) in idx.iter().enumerate() {
            lin = lin * shape[a] + i;
        }
        self.samples[lin]
    }
}

/// Pointwise evaluation of `expr` on the grid.
pub fn sample(expr: &dyn Expr, grid: &GridBox) -> Result<GridFunction> {
    if expr.dim() != grid.dim() {
        return Err(Error::param(format!(
            "expression dimension {} does not match grid dimension {}",
            expr.dim(),
            grid.dim()
        )));
    }
    let mut samples = vec![0.0; grid.len()];
    let mut bad: Option<Vec<f64>> = None;
    grid.for_each_point(|i, x| {
        let v = expr.eval(x);
        if !v.is_finite() && bad.is_none() {
            bad = Some(x.to_vec());
        }
        samples[i] = v;
    });
    if let Some(node) = bad {
        return Err(Error::Singular { node });
    }
    let mut g = GridFunction::new(grid.clone(), samples, expr.describe())?;
    if let Some(sup) = expr.support() {
        g.declare_support(&sup);
    }
    Ok(g)
}

/// Pairwise summation in storage order; deterministic for a fixed input.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if v.len() <= LEAF {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::expr::FnExpr;

    #[test]
    fn coarsening_keeps_even_nodes() {
        let g = sample(
            &FnExpr::new(2, "xy", |x| x[0] + 10.0 * x[1]),
            &GridBox::uniform(&Aabb::cube(2, 1.0), 0.25, Alignment::NodeCentered).unwrap(),
        )
        .unwrap();
        let c = g.coarsened().unwrap();
        assert_eq!(c.grid().shape(), vec![5, 5]);
        c.grid().for_each_point(|i, x| assert_eq!(c.samples()[i], x[0] + 10.0 * x[1]));
        let odd = sample(
            &FnExpr::new(2, "1", |_| 1.0),
            &GridBox::uniform(&Aabb::cube(2, 0.75), 0.5, Alignment::NodeCentered).unwrap(),
        )
        .unwrap();
        assert!(odd.coarsened().is_none());
    }

    #[test]
    fn constant_cell_centered() {
        let g = GridBox::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.25, 0.25],
            Alignment::CellCentered,
        )
        .unwrap();
        let f = sample(&FnExpr::new(2, "one", |_| 1.0), &g).unwrap();
        assert_eq!(f.samples().len(), 16);
        assert!(f.samples().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn gaussian_at_origin_node() {
        let g = GridBox::uniform(&Aabb::cube(2, 1.0), 0.25, Alignment::NodeCentered).unwrap();
        let f = sample(
            &FnExpr::new(2, "gauss", |x| (-(x[0] * x[0] + x[1] * x[1])).exp()),
            &g,
        )
        .unwrap();
        assert_eq!(f.at(&[4, 4]), 1.0);
    }

    #[test]
    fn cell_centered_avoids_plane() {
        let split = PlaneSplit::new(2, 1).unwrap();
        let h = 1.0 / 16.0;
        let g = GridBox::uniform(&Aabb::cube(2, 1.0), h, Alignment::CellCentered).unwrap();
        assert!(g.avoids_plane(split));
        let zmin = g
            .axis_coords(1)
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs()));
        assert_eq!(zmin, h / 2.0);
        let f = sample(
            &FnExpr::new(2, "zg", |x| x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp()),
            &g,
        )
        .unwrap();
        assert!(f.samples().iter().all(|&v| v != 0.0));
        assert!(!g
            .with_alignment(Alignment::NodeCentered)
            .avoids_plane(split));
    }

    #[test]
    fn singular_node_is_named() {
        let g = GridBox::uniform(&Aabb::cube(1, 1.0), 0.5, Alignment::NodeCentered).unwrap();
        let err = sample(&FnExpr::new(1, "inv", |x| 1.0 / x[0]), &g).unwrap_err();
        match err {
            Error::Singular { node } => assert_eq!(node, vec![0.0]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn inner_support_flag() {
        let g = GridBox::uniform(&Aabb::cube(2, 4.0), 0.5, Alignment::CellCentered).unwrap();
        let f = FnExpr::new(2, "b", |_| 0.0);
        let s = sample(&f.clone().with_support(Aabb::cube(2, 2.0)), &g).unwrap();
        assert!(s.is_inner_supported());
        let s = sample(&f.with_support(Aabb::cube(2, 2.5)), &g).unwrap();
        assert!(!s.is_inner_supported());
    }

    #[test]
    fn refine_halves_spacing() {
        let g = GridBox::uniform(&Aabb::cube(2, 1.0), 0.25, Alignment::CellCentered).unwrap();
        let r = g.refined();
        assert_eq!(r.shape(), vec![16, 16]);
        assert_eq!(r.spacing(), &[0.125, 0.125]);
        assert!(GridBox::new(vec![0.0], vec![1.0], vec![0.3], Alignment::CellCentered).is_err());
    }
}
