//! Fourth-order finite differences along grid axes.

use super::grid::GridFunction;
use crate::error::{Error, Result};
use crate::geometry::MultiIndex;

pub const MAX_ORDER: u32 = 4;
pub const MIN_POINTS: usize = 9;

/// `D^alpha g`, composed from first-derivative sweeps: `alpha_i` sweeps along axis `i`.
///
/// Interior nodes use the central stencil `(1, -8, 0, 8, -1)/12h`; the two
/// outermost nodes at each end use one-sided stencils of the same order.
pub fn derivative(g: &GridFunction, alpha: &MultiIndex) -> Result<GridFunction> {
    let grid = g.grid();
    if alpha.dim() != grid.dim() {
        return Err(Error::param(format!(
            "multi-index {alpha} has {} entries, grid has dimension {}",
            alpha.dim(),
            grid.dim()
        )));
    }
    if alpha.order() > MAX_ORDER {
        return Err(Error::param(format!(
            "derivative order {} exceeds {MAX_ORDER}",
            alpha.order()
        )));
    }
    let shape = grid.shape();
    for (a, &k) in alpha.entries().iter().enumerate() {
        if k > 0 && shape[a] < MIN_POINTS {
            return Err(Error::TooCoarse(format!(
                "axis {a} has {} points, differentiation needs at least {MIN_POINTS}",
                shape[a]
            )));
        }
    }
    let mut data = g.samples().to_vec();
    let mut line = Vec::new();
    let mut out = Vec::new();
    for (axis, &k) in alpha.entries().iter().enumerate() {
        let h = grid.spacing()[axis];
        for _ in 0..k {
            sweep(&mut data, &shape, axis, h, &mut line, &mut out);
        }
    }
    Ok(g.with_samples(data, format!("D^{alpha} {}", g.provenance())))
}

fn sweep(
    data: &mut [f64],
    shape: &[usize],
    axis: usize,
    h: f64,
    line: &mut Vec<f64>,
    out: &mut Vec<f64>,
) {
    let len = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * len * stride + inner;
            line.clear();
            line.extend((0..len).map(|k| data[base + k * stride]));
            first_derivative(line, h, out);
            for k in 0..len {
                data[base + k * stride] = out[k];
            }
        }
    }
}

/// Fourth-order first derivative of uniformly spaced samples.
pub fn first_derivative(f: &[f64], h: f64, out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, 0.0);
    let c = 1.0 / (12.0 * h);
    out[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    out[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        out[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    let m = n - 1;
    out[m - 1] = -c * (-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]);
    out[m] =
        -c * (-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::expr::{Aabb, FnExpr};
    use crate::discretize::grid::{sample, Alignment, GridBox};

    fn grid(h: f64) -> GridBox {
        GridBox::uniform(&Aabb::cube(2, 1.0), h, Alignment::NodeCentered).unwrap()
    }

    #[test]
    fn second_derivative_of_square_is_two() {
        let g = sample(&FnExpr::new(2, "z^2", |x| x[1] * x[1]), &grid(0.125)).unwrap();
        let d = derivative(&g, &MultiIndex::new(vec![0, 2])).unwrap();
        for v in d.samples() {
            assert!((v - 2.0).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn quartic_is_exact_everywhere() {
        let g = sample(
            &FnExpr::new(2, "q", |x| x[1].powi(4) - x[1] + x[0]),
            &grid(0.125),
        )
        .unwrap();
        let d = derivative(&g, &MultiIndex::new(vec![0, 1])).unwrap();
        g.grid().for_each_point(|i, x| {
            assert!((d.samples()[i] - (4.0 * x[1].powi(3) - 1.0)).abs() < 1e-10);
        });
    }

    #[test]
    fn sine_at_plane_row() {
        let h = 1.0 / 32.0;
        let g = sample(&FnExpr::new(2, "sin z", |x| x[1].sin()), &grid(h)).unwrap();
        let d = derivative(&g, &MultiIndex::new(vec![0, 1])).unwrap();
        let v = d.at(&[5, 32]);
        assert!((v - 1.0).abs() < 10.0 * h.powi(4));
    }

    #[test]
    fn composition_matches_second_order_request() {
        let g = sample(
            &FnExpr::new(2, "s", |x| (x[0] * 2.0).sin() * (x[1] * 3.0).cos()),
            &grid(1.0 / 16.0),
        )
        .unwrap();
        let once = derivative(&g, &MultiIndex::new(vec![0, 1])).unwrap();
        let twice = derivative(&once, &MultiIndex::new(vec![0, 1])).unwrap();
        let direct = derivative(&g, &MultiIndex::new(vec![0, 2])).unwrap();
        let scale = direct.max_abs();
        for (a, b) in twice.samples().iter().zip(direct.samples()) {
            assert!((a - b).abs() <= 10.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn rejects_coarse_and_high_order() {
        let g = sample(&FnExpr::new(2, "z", |x| x[1]), &grid(0.5)).unwrap();
        assert!(matches!(
            derivative(&g, &MultiIndex::new(vec![0, 1])),
            Err(Error::TooCoarse(_))
        ));
        let g = sample(&FnExpr::new(2, "z", |x| x[1]), &grid(0.125)).unwrap();
        assert!(derivative(&g, &MultiIndex::new(vec![3, 2])).is_err());
    }
}
