use serde::{Deserialize, Serialize};

/// Relative growth of an integral under `h -> h/2` above which the step
/// counts as unstable.
pub const GROWTH_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    WeightedLp,
    LpTriebel,
    SobolevFourier,
    Rloc,
    RlocEquiv,
    Reinforced,
}

/// One resolution of a refinement history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub h: f64,
    /// The integral `int |g|^p w` (before the p-th root).
    pub integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub method: NormMethod,
    pub s: Option<f64>,
    pub p: f64,
    pub q: Option<f64>,
    /// Finest spacing used.
    pub h: f64,
    pub refinement: Vec<RefinementStep>,
    /// Integral judged divergent: growth above [`GROWTH_TOL`] sustained over
    /// two consecutive halvings.
    pub divergent: bool,
    /// Relative change between the last two resolutions, when refined.
    pub discretization_error: Option<f64>,
    /// For `p = q = 2`: the Fourier-multiplier Sobolev norm of the same samples.
    pub cross_check: Option<f64>,
}

impl NormReport {
    pub fn single(value: f64, method: NormMethod, p: f64, h: f64) -> Self {
        Self {
            value,
            method,
            s: None,
            p,
            q: None,
            h,
            refinement: Vec::new(),
            divergent: false,
            discretization_error: None,
            cross_check: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.divergent && self.value.is_finite()
    }

    /// Relative growth between consecutive refinement steps.
    pub fn growths(&self) -> Vec<f64> {
        growths(&self.refinement)
    }
}

pub fn growths(steps: &[RefinementStep]) -> Vec<f64> {
    steps
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].integral, w[1].integral);
            if a == 0.0 {
                if b == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (b - a) / a.abs()
            }
        })
        .collect()
}

/// Increments shrinking by at least this factor per halving mark a
/// convergent sequence even while the growth is still above [`GROWTH_TOL`].
pub const CONVERGENT_SHRINK: f64 = 1.2;

/// Divergence verdict: the last two growth factors both exceed
/// [`GROWTH_TOL`] and the last increment has not shrunk by
/// [`CONVERGENT_SHRINK`] against the one before.
pub fn sustained_growth(steps: &[RefinementStep]) -> bool {
    let g = growths(steps);
    if g.len() < 2 || !g[g.len() - 2..].iter().all(|&x| x > GROWTH_TOL) {
        return false;
    }
    let k = steps.len();
    let d1 = steps[k - 2].integral - steps[k - 3].integral;
    let d2 = steps[k - 1].integral - steps[k - 2].integral;
    d2 * CONVERGENT_SHRINK > d1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(v: &[f64]) -> Vec<RefinementStep> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| RefinementStep {
                h: 0.5f64.powi(i as i32),
                integral: x,
            })
            .collect()
    }

    #[test]
    fn growth_verdicts() {
        assert!(sustained_growth(&steps(&[1.0, 1.1, 1.2])));
        assert!(!sustained_growth(&steps(&[1.0, 1.1, 1.12])));
        assert!(!sustained_growth(&steps(&[1.0, 1.01])));
        assert!(!sustained_growth(&steps(&[0.0, 0.0, 0.0])));
        // geometric convergence with ratio 1/sqrt(2): large growth, shrinking increments
        assert!(!sustained_growth(&steps(&[
            1.0,
            1.5,
            1.5 + 0.5 / 2f64.sqrt()
        ])));
        assert!(sustained_growth(&steps(&[1.0, 1.5, 2.0])));
    }
}
