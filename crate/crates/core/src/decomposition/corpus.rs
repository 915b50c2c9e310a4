//! Closed-form test functions with known behaviour on the plane.
//!
//! `G = exp(-|x|^2)`, `z = x_n` (a normal coordinate for every split used
//! here) and `y = x_1`. Gaussian-type entries declare the box `[-5, 5]^n`,
//! outside of which they stay below `1e-8` of their sup.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::discretize::{Aabb, Dilated, Expr, FnExpr};
use crate::error::{Error, Result};
use crate::geometry::PlaneSplit;
use crate::profile::plateau;

/// Exact vanishing behaviour of the perpendicular trace jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "order", rename_all = "kebab-case")]
pub enum TraceProfile {
    /// `tr f != 0`.
    Nonzero,
    /// Traces of all perpendicular derivatives of order `<= k` vanish, some
    /// of order `k + 1` does not.
    VanishesTo(u32),
    /// `f` vanishes near the plane.
    Vanishes,
}

impl TraceProfile {
    /// Whether the traces of all perpendicular derivatives of order `<= k`
    /// vanish.
    pub fn vanishes_up_to(&self, k: u32) -> bool {
        match *self {
            TraceProfile::Nonzero => false,
            TraceProfile::VanishesTo(m) => k <= m,
            TraceProfile::Vanishes => true,
        }
    }
}

impl fmt::Display for TraceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceProfile::Nonzero => write!(f, "nonzero"),
            TraceProfile::VanishesTo(k) => write!(f, "vanishes-to-{k}"),
            TraceProfile::Vanishes => write!(f, "vanishes"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Gaussian,
    ZPowGaussian(i32),
    SinZGaussian,
    CosYGaussian,
    Plateau,
    ZPowPlateau(i32),
    BumpOffPlane,
    BumpPairOffPlane,
    Radial2Gaussian,
    OnePlusZGaussian,
    ZCosYGaussian,
}

/// One closed-form corpus function, defined in every dimension `n >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    id: &'static str,
    formula: &'static str,
    shape: Shape,
}

const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        id: "gaussian",
        formula: "G",
        shape: Shape::Gaussian,
    },
    CorpusEntry {
        id: "z_gaussian",
        formula: "z G",
        shape: Shape::ZPowGaussian(1),
    },
    CorpusEntry {
        id: "z2_gaussian",
        formula: "z^2 G",
        shape: Shape::ZPowGaussian(2),
    },
    CorpusEntry {
        id: "z3_gaussian",
        formula: "z^3 G",
        shape: Shape::ZPowGaussian(3),
    },
    CorpusEntry {
        id: "sinz_gaussian",
        formula: "sin(z) G",
        shape: Shape::SinZGaussian,
    },
    CorpusEntry {
        id: "cosy_gaussian",
        formula: "cos(y) G",
        shape: Shape::CosYGaussian,
    },
    CorpusEntry {
        id: "plateau",
        formula: "psi(|x|/2)",
        shape: Shape::Plateau,
    },
    CorpusEntry {
        id: "z_plateau",
        formula: "z psi(|x|/2)",
        shape: Shape::ZPowPlateau(1),
    },
    CorpusEntry {
        id: "z2_plateau",
        formula: "z^2 psi(|x|/2)",
        shape: Shape::ZPowPlateau(2),
    },
    CorpusEntry {
        id: "bump_off_plane",
        formula: "psi(|x - 5/2 e_n|)",
        shape: Shape::BumpOffPlane,
    },
    CorpusEntry {
        id: "bump_pair_off_plane",
        formula: "psi(|x - 5/2 e_n|) - psi(|x + 5/2 e_n|)",
        shape: Shape::BumpPairOffPlane,
    },
    CorpusEntry {
        id: "radial2_gaussian",
        formula: "|x|^2 G",
        shape: Shape::Radial2Gaussian,
    },
    CorpusEntry {
        id: "one_plus_z_gaussian",
        formula: "(1 + z) G",
        shape: Shape::OnePlusZGaussian,
    },
    CorpusEntry {
        id: "z_cosy_gaussian",
        formula: "z cos(y) G",
        shape: Shape::ZCosYGaussian,
    },
];

/// The built-in corpus in its fixed order.
pub fn corpus() -> Vec<CorpusEntry> {
    ENTRIES.to_vec()
}

pub fn corpus_entry(id: &str) -> Result<CorpusEntry> {
    ENTRIES
        .iter()
        .find(|e| e.id == id)
        .copied()
        .ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

/// `all` or a comma-separated list of ids.
pub fn select_corpus(spec: &str) -> Result<Vec<CorpusEntry>> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok(corpus());
    }
    spec.split(',').map(|id| corpus_entry(id.trim())).collect()
}

fn sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl CorpusEntry {
    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn formula(&self) -> &'static str {
        self.formula
    }

    /// The function on `R^n`.
    pub fn expr(&self, n: usize) -> Result<Arc<dyn Expr>> {
        if n < 2 {
            return Err(Error::param(format!(
                "corpus functions are defined for n >= 2, got {n}"
            )));
        }
        let z = n - 1;
        let gauss_box = Aabb::cube(n, 5.0);
        let plateau_box = Aabb::cube(n, 2.0);
        let off_box = |lo: f64| {
            let mut b = Aabb::cube(n, 1.0);
            b.lower[z] = lo;
            b.upper[z] = 3.5;
            b
        };
        let name = format!("{}[n={n}]", self.id);
        let f = match self.shape {
            Shape::Gaussian => FnExpr::new(n, name, |x| (-sq(x)).exp()).with_support(gauss_box),
            Shape::ZPowGaussian(k) => {
                FnExpr::new(n, name, move |x| x[z].powi(k) * (-sq(x)).exp())
                    .with_support(gauss_box)
            }
            Shape::SinZGaussian => {
                FnExpr::new(n, name, move |x| x[z].sin() * (-sq(x)).exp()).with_support(gauss_box)
            }
            Shape::CosYGaussian => {
                FnExpr::new(n, name, |x| x[0].cos() * (-sq(x)).exp()).with_support(gauss_box)
            }
            Shape::Plateau => FnExpr::new(n, name, |x| plateau(sq(x).sqrt() / 2.0))
                .with_support(plateau_box),
            Shape::ZPowPlateau(k) => FnExpr::new(n, name, move |x| {
                x[z].powi(k) * plateau(sq(x).sqrt() / 2.0)
            })
            .with_support(plateau_box),
            Shape::BumpOffPlane => FnExpr::new(n, name, move |x| bump_at(x, z, 2.5))
                .with_support(off_box(1.5)),
            Shape::BumpPairOffPlane => FnExpr::new(n, name, move |x| {
                bump_at(x, z, 2.5) - bump_at(x, z, -2.5)
            })
            .with_support(off_box(-3.5)),
            Shape::Radial2Gaussian => {
                FnExpr::new(n, name, |x| {
                    let r2 = sq(x);
                    r2 * (-r2).exp()
                })
                .with_support(gauss_box)
            }
            Shape::OnePlusZGaussian => {
                FnExpr::new(n, name, move |x| (1.0 + x[z]) * (-sq(x)).exp())
                    .with_support(gauss_box)
            }
            Shape::ZCosYGaussian => FnExpr::new(n, name, move |x| {
                x[z] * x[0].cos() * (-sq(x)).exp()
            })
            .with_support(gauss_box),
        };
        Ok(Arc::new(f))
    }

    /// `x -> f(2^k x)`.
    pub fn dilated(&self, n: usize, k: u32) -> Result<Arc<dyn Expr>> {
        let f = self.expr(n)?;
        if k == 0 {
            return Ok(f);
        }
        Ok(Arc::new(Dilated::new(f, 2f64.powi(k as i32))))
    }

    /// Exact trace behaviour on `R^l`, worked out by hand from the formula.
    pub fn trace_profile(&self, split: PlaneSplit) -> TraceProfile {
        match self.shape {
            Shape::Gaussian
            | Shape::CosYGaussian
            | Shape::Plateau
            | Shape::OnePlusZGaussian => TraceProfile::Nonzero,
            Shape::ZPowGaussian(k) | Shape::ZPowPlateau(k) => TraceProfile::VanishesTo(k as u32 - 1),
            Shape::SinZGaussian | Shape::ZCosYGaussian => TraceProfile::VanishesTo(0),
            Shape::BumpOffPlane | Shape::BumpPairOffPlane => TraceProfile::Vanishes,
            // |x|^2 = |y|^2 + |z|^2 is nonzero on a plane of positive
            // dimension; at a point it vanishes with its gradient
            Shape::Radial2Gaussian if split.l() == 0 => TraceProfile::VanishesTo(1),
            Shape::Radial2Gaussian => TraceProfile::Nonzero,
        }
    }
}

fn bump_at(x: &[f64], axis: usize, c: f64) -> f64 {
    let r2: f64 = x
        .iter()
        .enumerate()
        .map(|(a, v)| if a == axis { (v - c) * (v - c) } else { v * v })
        .sum();
    if r2 >= 1.0 {
        0.0
    } else {
        plateau(r2.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{sample, Alignment, GridBox};

    #[test]
    fn ids_are_unique_and_resolvable() {
        let c = corpus();
        assert!(c.len() >= 12);
        for (i, e) in c.iter().enumerate() {
            assert!(c[..i].iter().all(|o| o.id() != e.id()));
            assert_eq!(corpus_entry(e.id()).unwrap(), *e);
        }
        assert!(matches!(corpus_entry("nope"), Err(Error::UnknownEntry(_))));
        assert_eq!(select_corpus("all").unwrap().len(), c.len());
        assert_eq!(
            select_corpus("gaussian, z_gaussian").unwrap(),
            vec![c[0], c[1]]
        );
        assert!(select_corpus("gaussian,bogus").is_err());
    }

    #[test]
    fn support_boxes_hold() {
        for e in corpus() {
            for n in [2, 3] {
                let f = e.expr(n).unwrap();
                let sup = f.support().unwrap();
                let wide = Aabb::cube(n, 7.0);
                let g = sample(
                    f.as_ref(),
                    &GridBox::uniform(&wide, 0.25, Alignment::NodeCentered).unwrap(),
                )
                .unwrap();
                let peak = g.max_abs();
                assert!(peak > 0.0, "{}", e.id());
                g.grid().for_each_point(|i, x| {
                    let inside = (0..n).all(|a| x[a] >= sup.lower[a] && x[a] <= sup.upper[a]);
                    if !inside {
                        assert!(g.samples()[i].abs() <= 1e-8 * peak, "{} at {x:?}", e.id());
                    }
                });
            }
        }
    }

    #[test]
    fn dilation_shrinks_support() {
        let e = corpus_entry("z_gaussian").unwrap();
        let f = e.dilated(2, 3).unwrap();
        assert_eq!(f.support().unwrap(), Aabb::cube(2, 5.0 / 8.0));
        assert_eq!(f.eval(&[0.0, 0.1]), e.expr(2).unwrap().eval(&[0.0, 0.8]));
        assert!(e.expr(1).is_err());
    }

    #[test]
    fn branches_have_members_on_both_sides() {
        let split = PlaneSplit::new(2, 1).unwrap();
        for k in 0..=2 {
            let (vanish, not): (Vec<_>, Vec<_>) = corpus()
                .into_iter()
                .partition(|e| e.trace_profile(split).vanishes_up_to(k));
            assert!(vanish.len() >= 2 && not.len() >= 2, "order {k}");
        }
    }
}
