use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Axis-aligned box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Aabb {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    /// `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        Self {
            lower: vec![-r; n],
            upper: vec![r; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..self.dim()).all(|i| self.lower[i] <= other.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// Image under `x -> x / factor`.
    pub fn shrink(&self, factor: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| v / factor).collect(),
            upper: self.upper.iter().map(|v| v / factor).collect(),
        }
    }

    pub fn union(&self, other: &Aabb) -> Self {
        Self {
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.min(*b))
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.max(*b))
                .collect(),
        }
    }
}

/// A closed-form function `R^n -> R`.
pub trait Expr: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    fn describe(&self) -> String;

    /// Box outside of which the function vanishes, or is below `1e-10` of its
    /// sup for rapidly decaying entries.
    fn support(&self) -> Option<Aabb> {
        None
    }
}

impl fmt::Debug for dyn Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.describe())
    }
}

/// Closure-backed expression.
#[derive(Clone)]
pub struct FnExpr {
    dim: usize,
    name: String,
    support: Option<Aabb>,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl FnExpr {
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            name: name.into(),
            support: None,
            f: Arc::new(f),
        }
    }

    pub fn with_support(mut self, support: Aabb) -> Self {
        self.support = Some(support);
        self
    }
}

impl Expr for FnExpr {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
    fn support(&self) -> Option<Aabb> {
        self.support.clone()
    }
}

/// `x -> f(factor * x)`.
#[derive(Clone)]
pub struct Dilated {
    inner: Arc<dyn Expr>,
    factor: f64,
}

impl Dilated {
    pub fn new(inner: Arc<dyn Expr>, factor: f64) -> Self {
        Self { inner, factor }
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl Expr for Dilated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let mut buf = [0.0; 8];
        let n = x.len();
        if n <= buf.len() {
            for (b, v) in buf.iter_mut().zip(x) {
                *b = v * self.factor;
            }
            self.inner.eval(&buf[..n])
        } else {
            let y: Vec<f64> = x.iter().map(|v| v * self.factor).collect();
            self.inner.eval(&y)
        }
    }
    fn describe(&self) -> String {
        format!("{}({}*x)", self.inner.describe(), self.factor)
    }
    fn support(&self) -> Option<Aabb> {
        self.inner.support().map(|b| b.shrink(self.factor))
    }
}

/// Linear combination `sum c_i f_i`.
#[derive(Clone)]
pub struct Combination {
    terms: Vec<(f64, Arc<dyn Expr>)>,
}

impl Combination {
    pub fn new(terms: Vec<(f64, Arc<dyn Expr>)>) -> Self {
        assert!(!terms.is_empty());
        Self { terms }
    }
}

impl Expr for Combination {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.eval(x)).sum()
    }
    fn describe(&self) -> String {
        self.terms
            .iter()
            .map(|(c, f)| format!("{c}*{}", f.describe()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
    fn support(&self) -> Option<Aabb> {
        let mut it = self.terms.iter().map(|(_, f)| f.support());
        let first = it.next()??;
        it.try_fold(first, |acc, b| Some(acc.union(&b?)))
    }
}
