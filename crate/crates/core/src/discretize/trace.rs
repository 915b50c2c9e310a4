//! Restriction of grid functions to the plane `{x'' = 0}`.

use super::grid::{Alignment, GridBox, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::PlaneSplit;

/// Per normal axis, the samples and weights of the trace stencil: the node on
/// the plane for node-centered grids; for cell-centered ones the Richardson
/// combination of the symmetric averages at `+-h/2` and `+-3h/2`.
fn plane_rows(grid: &GridBox, split: PlaneSplit) -> Result<Vec<Vec<(usize, f64)>>> {
    split
        .normal_axes()
        .map(|a| {
            let c = grid.axis_coords(a);
            let h = grid.spacing()[a];
            let tol = 1e-9 * h;
            let find = |x: f64| c.iter().position(|v| (v - x).abs() < tol);
            match grid.alignment() {
                Alignment::NodeCentered => find(0.0)
                    .map(|k| vec![(k, 1.0)])
                    .ok_or_else(|| Error::Alignment(format!("axis {a} has no node on the plane"))),
                Alignment::CellCentered => {
                    let near = (find(-0.5 * h), find(0.5 * h));
                    let far = (find(-1.5 * h), find(1.5 * h));
                    match (near, far) {
                        ((Some(i), Some(k)), (Some(i3), Some(k3))) => Ok(vec![
                            (i3, -1.0 / 16.0),
                            (i, 9.0 / 16.0),
                            (k, 9.0 / 16.0),
                            (k3, -1.0 / 16.0),
                        ]),
                        _ => Err(Error::Alignment(format!(
                            "axis {a}: cells are not symmetric about the plane"
                        ))),
                    }
                }
            }
        })
        .collect()
}

/// Grid of the plane: the tangential axes of `grid` (a single point if `l = 0`).
pub fn plane_grid(grid: &GridBox, split: PlaneSplit) -> Result<GridBox> {
    if split.l() == 0 {
        return GridBox::new(vec![-0.5], vec![0.5], vec![1.0], Alignment::CellCentered);
    }
    let l = split.l();
    GridBox::new(
        grid.lower()[..l].to_vec(),
        grid.upper()[..l].to_vec(),
        grid.spacing()[..l].to_vec(),
        grid.alignment(),
    )
}

/// `g(x', 0)`: exact restriction on node-centered grids, a fourth-order
/// extrapolation from the `4^(n-l)` nearest cells on cell-centered ones.
pub fn plane_trace(g: &GridFunction, split: PlaneSplit) -> Result<GridFunction> {
    let grid = g.grid();
    if grid.dim() != split.n() {
        return Err(Error::param(
            "grid dimension does not match the plane split",
        ));
    }
    let rows = plane_rows(grid, split)?;
    let shape = grid.shape();
    let l = split.l();
    let tshape = &shape[..l];
    let tlen: usize = tshape.iter().product();
    let combos: usize = rows.iter().map(|r| r.len()).product();
    let normal_stride: Vec<usize> = (0..shape.len())
        .map(|a| shape[a + 1..].iter().product())
        .collect();
    let mut out = vec![0.0; tlen];
    for (t, slot) in out.iter_mut().enumerate() {
        // tangential multi-index -> linear offset
        let mut rem = t;
        let mut base = 0;
        for a in (0..l).rev() {
            base += (rem % tshape[a]) * normal_stride[a];
            rem /= tshape[a];
        }
        let mut acc = 0.0;
        for c in 0..combos {
            let mut rem = c;
            let mut off = base;
            let mut w = 1.0;
            for (i, r) in rows.iter().enumerate().rev() {
                let (k, wk) = r[rem % r.len()];
                off += k * normal_stride[l + i];
                w *= wk;
                rem /= r.len();
            }
            acc += w * g.samples()[off];
        }
        *slot = acc;
    }
    GridFunction::new(
        plane_grid(grid, split)?,
        out,
        format!("tr {}", g.provenance()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::expr::{Aabb, FnExpr};
    use crate::discretize::grid::sample;

    #[test]
    fn node_trace_is_exact() {
        let split = PlaneSplit::new(2, 1).unwrap();
        let grid = GridBox::uniform(&Aabb::cube(2, 1.0), 0.125, Alignment::NodeCentered).unwrap();
        let g = sample(&FnExpr::new(2, "f", |x| (x[0] + 2.0) * (1.0 + x[1])), &grid).unwrap();
        let tr = plane_trace(&g, split).unwrap();
        for (y, v) in tr.grid().axis_coords(0).iter().zip(tr.samples()) {
            assert_eq!(*v, y + 2.0);
        }
    }

    #[test]
    fn cell_trace_cancels_odd_parts() {
        let split = PlaneSplit::new(3, 1).unwrap();
        let grid = GridBox::uniform(&Aabb::cube(3, 1.0), 0.125, Alignment::CellCentered).unwrap();
        let g = sample(
            &FnExpr::new(3, "f", |x| x[2] * (-x[0] * x[0]).exp() + x[1] * x[2]),
            &grid,
        )
        .unwrap();
        let tr = plane_trace(&g, split).unwrap();
        assert!(tr.max_abs() < 1e-16);
        let g = sample(
            &FnExpr::new(3, "f", |x| 1.0 + x[1] * x[1] - x[2] * x[2] * x[1] * x[1]),
            &grid,
        )
        .unwrap();
        let tr = plane_trace(&g, split).unwrap();
        assert!(tr.samples().iter().all(|v| (v - 1.0).abs() < 1e-15));
        let g = sample(&FnExpr::new(3, "f", |x| x[1].powi(4)), &grid).unwrap();
        let tr = plane_trace(&g, split).unwrap();
        // -9/16 h^4 for h = 1/8
        assert!(tr
            .samples()
            .iter()
            .all(|v| (v + 9.0 / 16.0 / 4096.0).abs() < 1e-15));
    }
}
