//! Ambient geometry `R^n = R^l x R^(n-l)`, distance weights, multi-indices
//! and the scalar smoothness constants derived from `(s, p, q)`.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to detect `s - (n-l)/p` landing on an integer when the
/// exponents are given as floating point numbers.
pub const CRITICAL_TOL: f64 = 1e-9;

/// Default collar width.
pub const DEFAULT_EPS: f64 = 0.5;

/// The splitting `R^n = R^l x R^(n-l)`; the boundary is the plane `R^l`
/// embedded as `{x'' = 0}` in the first `l` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlaneSplit {
    n: usize,
    l: usize,
}

impl PlaneSplit {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("ambient dimension n must be positive"));
        }
        if l >= n {
            return Err(Error::param(format!(
                "plane dimension l={l} must be < n={n}"
            )));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Codimension `n - l`.
    pub fn codim(&self) -> usize {
        self.n - self.l
    }

    /// Splits `x` into `(x', x'')`.
    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        debug_assert_eq!(x.len(), self.n);
        x.split_at(self.l)
    }

    /// `d(x) = |x''|`.
    #[inline]
    pub fn distance(&self, x: &[f64]) -> f64 {
        x[self.l..].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Axes perpendicular to the plane.
    pub fn normal_axes(&self) -> std::ops::Range<usize> {
        self.l..self.n
    }
}

impl fmt::Display for PlaneSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R^{}\\R^{}", self.n, self.l)
    }
}

/// A multi-index `alpha in N_0^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `k` derivatives along `axis`.
    pub fn axis(n: usize, axis: usize, k: u32) -> Self {
        let mut e = vec![0; n];
        e[axis] = k;
        Self(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Membership in `N_l^n`: derivatives only in directions normal to `R^l`.
    pub fn is_perpendicular(&self, l: usize) -> bool {
        self.0[..l.min(self.0.len())].iter().all(|&a| a == 0)
    }

    /// All `alpha in N_l^n` with `|alpha| = order`, in lexicographic order.
    pub fn perpendicular_of_order(split: PlaneSplit, order: u32) -> Vec<MultiIndex> {
        let k = split.codim();
        let mut out = Vec::new();
        let mut cur = vec![0u32; k];
        compositions(order, 0, &mut cur, &mut |c| {
            let mut e = vec![0; split.l()];
            e.extend_from_slice(c);
            out.push(MultiIndex(e));
        });
        out.sort();
        out
    }

    /// All `alpha in N_l^n` with `|alpha| <= order`, sorted by order then lexicographically.
    pub fn perpendicular_up_to(split: PlaneSplit, order: u32) -> Vec<MultiIndex> {
        (0..=order)
            .flat_map(|o| Self::perpendicular_of_order(split, o))
            .collect()
    }
}

fn compositions(remaining: u32, pos: usize, cur: &mut Vec<u32>, emit: &mut impl FnMut(&[u32])) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        emit(cur);
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        compositions(remaining - v, pos + 1, cur, emit);
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Exponents `s`, `p`, `q`, the geometry and the collar width.
///
/// `s` and `p` keep an exact rational representation when one was supplied,
/// so the critical/non-critical branch never depends on rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    s: f64,
    p: f64,
    q: f64,
    split: PlaneSplit,
    eps: f64,
    #[serde(skip)]
    exact: Option<(Rational64, Rational64)>,
}

impl SmoothnessParams {
    /// `q = f64::INFINITY` denotes the sup-norm in the fine index.
    pub fn new(split: PlaneSplit, s: f64, p: f64, q: f64) -> Result<Self> {
        validate(s, p, q)?;
        Ok(Self {
            s,
            p,
            q,
            split,
            eps: DEFAULT_EPS,
            exact: None,
        })
    }

    pub fn exact(split: PlaneSplit, s: Rational64, p: Rational64, q: f64) -> Result<Self> {
        let sf = ratio_f64(s);
        let pf = ratio_f64(p);
        validate(sf, pf, q)?;
        Ok(Self {
            s: sf,
            p: pf,
            q,
            split,
            eps: DEFAULT_EPS,
            exact: Some((s, p)),
        })
    }

    /// Parses `s` and `p` from strings like `"3/2"` or `"0.75"`; fractions are kept exact.
    pub fn parse(split: PlaneSplit, s: &str, p: &str, q: f64) -> Result<Self> {
        match (parse_ratio(s), parse_ratio(p)) {
            (Some(s), Some(p)) => Self::exact(split, s, p, q),
            _ => {
                let sf = parse_number(s)?;
                let pf = parse_number(p)?;
                Self::new(split, sf, pf, q)
            }
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param(format!(
                "collar width eps={eps} must lie in (0,1)"
            )));
        }
        self.eps = eps;
        Ok(self)
    }

    /// Same geometry and exponents with a different smoothness.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        let mut out = Self::new(self.split, s, self.p, self.q)?;
        out.eps = self.eps;
        Ok(out)
    }

    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn split(&self) -> PlaneSplit {
        self.split
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `s - (n-l)/p`.
    pub fn excess(&self) -> f64 {
        self.s - self.split.codim() as f64 / self.p
    }

    /// Requires `q >= 1`; the `q < 1` regime needs moment conditions on the
    /// building blocks and is not computed.
    pub fn require_banach_q(&self) -> Result<()> {
        if self.q < 1.0 {
            return Err(Error::param(format!(
                "q={} < 1 is not supported: only q >= 1 is computed, where sigma_pq = 0 and \
                 no moment conditions are needed (s > sigma_pq must hold)",
                self.q
            )));
        }
        Ok(())
    }

    pub fn constants(&self) -> SmoothnessConstants {
        smoothness_constants(self)
    }

    pub fn classify(&self) -> CriticalityClass {
        classify_criticality(self)
    }

    /// Short human-readable label, e.g. `n2l1 s=3/2 p=2 q=2`.
    pub fn label(&self) -> String {
        let (s, p) = match self.exact {
            Some((s, p)) => (fmt_ratio(s), fmt_ratio(p)),
            None => (format!("{}", self.s), format!("{}", self.p)),
        };
        let q = if self.q.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", self.q)
        };
        format!("n{}l{} s={} p={} q={}", self.split.n, self.split.l, s, p, q)
    }
}

fn validate(s: f64, p: f64, q: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::param(format!("smoothness s={s} must be positive")));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param(format!(
            "integrability p={p} must lie in [1, inf)"
        )));
    }
    if q.is_nan() || q <= 0.0 {
        return Err(Error::param(format!(
            "fine index q={q} must lie in (0, inf]"
        )));
    }
    Ok(())
}

fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn fmt_ratio(r: Rational64) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_ratio(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().ok()?;
        let b: i64 = b.trim().parse().ok()?;
        if b == 0 {
            return None;
        }
        return Some(Rational64::new(a, b));
    }
    if let Ok(i) = s.parse::<i64>() {
        return Some(Rational64::from_integer(i));
    }
    // finite decimal expansions are exact rationals too
    let (int, frac) = s.split_once('.')?;
    if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let neg = int.starts_with('-');
    let int: i64 = if int.is_empty() || int == "-" {
        0
    } else {
        int.parse().ok()?
    };
    let den = 10i64.pow(frac.len() as u32);
    let num: i64 = frac.parse().ok()?;
    let mag = int.abs() * den + num;
    Some(Rational64::new(if neg { -mag } else { mag }, den))
}

/// A real number; `inf` is accepted.
pub fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::param(format!("cannot parse `{s}` as a number")))
}

/// Whether `s - (n-l)/p` is a non-negative integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", content = "r")]
pub enum CriticalityClass {
    /// `s - (n-l)/p = r in N_0`.
    Critical(u32),
    /// `r = floor(s - (n-l)/p) >= -1`.
    NonCritical(i32),
}

impl CriticalityClass {
    pub fn r(&self) -> i32 {
        match *self {
            CriticalityClass::Critical(r) => r as i32,
            CriticalityClass::NonCritical(r) => r,
        }
    }

    pub fn is_critical(&self) -> bool {
        matches!(self, CriticalityClass::Critical(_))
    }

    /// Highest perpendicular derivative order whose trace must vanish for
    /// membership in the refined localization space; `None` if no trace
    /// condition applies.
    pub fn trace_order(&self) -> Option<u32> {
        match *self {
            CriticalityClass::NonCritical(r) if r >= 0 => Some(r as u32),
            CriticalityClass::Critical(r) if r >= 1 => Some(r - 1),
            _ => None,
        }
    }
}

impl fmt::Display for CriticalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalityClass::Critical(r) => write!(f, "critical(r={r})"),
            CriticalityClass::NonCritical(r) => write!(f, "noncritical(r={r})"),
        }
    }
}

pub fn classify_criticality(params: &SmoothnessParams) -> CriticalityClass {
    let codim = params.split.codim() as i64;
    if let Some((s, p)) = params.exact {
        let x = s - Rational64::from_integer(codim) / p;
        if x.is_integer() && !x.is_negative() {
            return CriticalityClass::Critical(x.to_integer() as u32);
        }
        return CriticalityClass::NonCritical(x.floor().to_integer() as i32);
    }
    let x = params.excess();
    let nearest = x.round();
    if nearest >= 0.0 && (x - nearest).abs() < CRITICAL_TOL {
        return CriticalityClass::Critical(nearest as u32);
    }
    CriticalityClass::NonCritical(x.floor() as i32)
}

/// Distance of `x` to the plane, its truncation at 1 and collar membership.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceWeights {
    pub d: f64,
    pub delta: f64,
    pub in_collar: bool,
}

pub fn distance_weights(x: &[f64], split: PlaneSplit, eps: f64) -> Result<DistanceWeights> {
    if x.len() != split.n() {
        return Err(Error::param(format!(
            "point has dimension {} but the ambient space has n={}",
            x.len(),
            split.n()
        )));
    }
    let d = split.distance(x);
    Ok(DistanceWeights {
        d,
        delta: d.min(1.0),
        in_collar: d > 0.0 && d < eps,
    })
}

/// `sigma_p`, `sigma_{p,q}`, the split `s = floor_s + frac_s` with
/// `frac_s in (0,1]`, and the conjugate exponent `p'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothnessConstants {
    pub sigma_p: f64,
    pub sigma_pq: f64,
    pub floor_s: i64,
    pub frac_s: f64,
    pub p_conj: f64,
}

pub fn sigma_p(n: usize, p: f64) -> f64 {
    n as f64 * (1.0 / p - 1.0).max(0.0)
}

pub fn sigma_pq(n: usize, p: f64, q: f64) -> f64 {
    n as f64 * (1.0 / p.min(q) - 1.0).max(0.0)
}

/// `p'` with `1/p + 1/p' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// `s = floor_s + frac_s` with `frac_s in (0,1]`, so integers map to `(s-1, 1)`.
pub fn floor_frac(s: f64) -> (i64, f64) {
    let fl = s.ceil() as i64 - 1;
    (fl, s - fl as f64)
}

pub fn smoothness_constants(params: &SmoothnessParams) -> SmoothnessConstants {
    let n = params.split.n();
    let (floor_s, frac_s) = match params.exact {
        Some((s, _)) => {
            let fl = s.ceil().to_integer() - 1;
            (fl, ratio_f64(s - Rational64::from_integer(fl)))
        }
        None => floor_frac(params.s),
    };
    SmoothnessConstants {
        sigma_p: sigma_p(n, params.p),
        sigma_pq: sigma_pq(n, params.p, params.q),
        floor_s,
        frac_s,
        p_conj: conjugate(params.p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn criticality_examples() {
        let s21 = PlaneSplit::new(2, 1).unwrap();
        let p = SmoothnessParams::exact(s21, r(3, 2), r(2, 1), 2.0).unwrap();
        assert_eq!(p.classify(), CriticalityClass::Critical(1));
        let p = SmoothnessParams::exact(s21, r(1, 1), r(2, 1), 2.0).unwrap();
        assert_eq!(p.classify(), CriticalityClass::NonCritical(0));
        let s20 = PlaneSplit::new(2, 0).unwrap();
        let p = SmoothnessParams::exact(s20, r(1, 1), r(2, 1), 2.0).unwrap();
        assert_eq!(p.classify(), CriticalityClass::Critical(0));
    }

    #[test]
    fn subcritical_is_minus_one() {
        let s21 = PlaneSplit::new(2, 1).unwrap();
        let p = SmoothnessParams::new(s21, 0.25, 2.0, 2.0).unwrap();
        assert_eq!(p.classify(), CriticalityClass::NonCritical(-1));
        assert_eq!(p.classify().trace_order(), None);
    }

    #[test]
    fn float_classification_tolerates_noise() {
        let s21 = PlaneSplit::new(2, 1).unwrap();
        let p = SmoothnessParams::new(s21, 0.1 + 0.2 + 1.2, 2.0, 2.0).unwrap();
        assert_eq!(p.classify(), CriticalityClass::Critical(1));
        let p = SmoothnessParams::new(s21, 1.5 + 1e-6, 2.0, 2.0).unwrap();
        assert_eq!(p.classify(), CriticalityClass::NonCritical(1));
    }

    #[test]
    fn parse_keeps_fractions_exact() {
        let s21 = PlaneSplit::new(2, 1).unwrap();
        let p = SmoothnessParams::parse(s21, "5/3", "3/2", 2.0).unwrap();
        assert!(p.is_exact());
        assert_eq!(p.classify(), CriticalityClass::Critical(1));
        let p = SmoothnessParams::parse(s21, "0.75", "2", 2.0).unwrap();
        assert!(p.is_exact());
        assert_eq!(p.classify(), CriticalityClass::NonCritical(0));
        assert_eq!(p.label(), "n2l1 s=3/4 p=2 q=2");
    }

    #[test]
    fn distance_examples() {
        let s21 = PlaneSplit::new(2, 1).unwrap();
        let w = distance_weights(&[5.0, 0.0], s21, 0.5).unwrap();
        assert_eq!(w.d, 0.0);
        assert!(!w.in_collar);
        let s31 = PlaneSplit::new(3, 1).unwrap();
        let w = distance_weights(&[0.0, 3.0, 4.0], s31, 0.5).unwrap();
        assert_eq!(w.d, 5.0);
        assert_eq!(w.delta, 1.0);
        let w = distance_weights(&[0.7, 0.3], s21, 0.5).unwrap();
        assert!((w.d - 0.3).abs() < 1e-15);
        assert!(w.in_collar);
        assert!(distance_weights(&[0.0], s21, 0.5).is_err());
    }

    #[test]
    fn constants_examples() {
        let s3 = PlaneSplit::new(3, 1).unwrap();
        let c = SmoothnessParams::new(s3, 1.0, 2.0, 2.0)
            .unwrap()
            .constants();
        assert_eq!((c.sigma_p, c.sigma_pq), (0.0, 0.0));
        assert_eq!(c.p_conj, 2.0);
        assert_eq!(sigma_p(2, 0.5), 2.0);
        assert_eq!(sigma_pq(2, 2.0, 0.5), 2.0);
        let s21 = PlaneSplit::new(2, 1).unwrap();
        let c = SmoothnessParams::exact(s21, r(2, 1), r(1, 1), 2.0)
            .unwrap()
            .constants();
        assert_eq!((c.floor_s, c.frac_s), (1, 1.0));
        assert!(c.p_conj.is_infinite());
        assert_eq!(floor_frac(2.0), (1, 1.0));
        assert_eq!(floor_frac(2.25), (2, 0.25));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PlaneSplit::new(2, 2).is_err());
        assert!(PlaneSplit::new(0, 0).is_err());
        let s21 = PlaneSplit::new(2, 1).unwrap();
        assert!(SmoothnessParams::new(s21, 0.0, 2.0, 2.0).is_err());
        assert!(SmoothnessParams::new(s21, 1.0, 0.5, 2.0).is_err());
        assert!(SmoothnessParams::new(s21, 1.0, 2.0, 0.0).is_err());
        let p = SmoothnessParams::new(s21, 1.0, 2.0, 0.5).unwrap();
        assert!(p.require_banach_q().is_err());
        assert!(p.clone().with_eps(1.0).is_err());
    }

    #[test]
    fn perpendicular_multi_indices() {
        let s31 = PlaneSplit::new(3, 1).unwrap();
        let of2 = MultiIndex::perpendicular_of_order(s31, 2);
        assert_eq!(of2.len(), 3);
        assert!(of2.iter().all(|a| a.is_perpendicular(1) && a.order() == 2));
        assert_eq!(MultiIndex::perpendicular_up_to(s31, 2).len(), 6);
        assert!(!MultiIndex::new(vec![1, 0, 1]).is_perpendicular(1));
    }

    proptest! {
        #[test]
        fn sigma_vanishes_for_banach_exponents(p in 1.0f64..10.0, q in 1.0f64..10.0, n in 1usize..5) {
            prop_assert_eq!(sigma_p(n, p), 0.0);
            prop_assert_eq!(sigma_pq(n, p, q), 0.0);
        }

        #[test]
        fn floor_plus_frac_is_s(num in 1i64..400, den in 1i64..16) {
            let s21 = PlaneSplit::new(2, 1).unwrap();
            let p = SmoothnessParams::exact(s21, r(num, den), r(2, 1), 2.0).unwrap();
            let c = p.constants();
            prop_assert!(c.frac_s > 0.0 && c.frac_s <= 1.0);
            let back = Rational64::from_integer(c.floor_s) + r(num, den) - Rational64::from_integer(c.floor_s);
            prop_assert_eq!(back, r(num, den));
            prop_assert!((c.floor_s as f64 + c.frac_s - p.s()).abs() < 1e-12);
        }

        #[test]
        fn exact_and_real_classification_agree(num in 1i64..200, den in 1i64..12, pn in 1i64..8, pd in 1i64..4) {
            prop_assume!(pn >= pd);
            let s21 = PlaneSplit::new(3, 1).unwrap();
            let exact = SmoothnessParams::exact(s21, r(num, den), r(pn, pd), 2.0).unwrap();
            let real = SmoothnessParams::new(s21, exact.s(), exact.p(), 2.0).unwrap();
            prop_assert_eq!(exact.classify(), real.classify());
        }

        #[test]
        fn distance_ignores_tangential_and_symmetries(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, t in -9.0f64..9.0
        ) {
            let s = PlaneSplit::new(3, 1).unwrap();
            let d0 = distance_weights(&[a, b, c], s, 0.5).unwrap().d;
            let d1 = distance_weights(&[t, -c, b], s, 0.5).unwrap().d;
            prop_assert!((d0 - d1).abs() < 1e-12);
        }
    }
}
