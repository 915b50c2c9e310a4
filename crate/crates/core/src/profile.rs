//! Closed-form smooth profiles shared by the partition of unity, the
//! Littlewood-Paley filters and the witness bumps.

/// `exp(-1/u)` for `u > 0`, else 0.
#[inline]
fn e_inv(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// C-infinity step: 0 for `u <= 0`, 1 for `u >= 1`, monotone in between.
#[inline]
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = e_inv(u);
        a / (a + e_inv(1.0 - u))
    }
}

/// Radial plateau bump: 1 for `r <= 1/2`, 0 for `r >= 1`.
#[inline]
pub fn plateau(r: f64) -> f64 {
    smooth_step(2.0 * (1.0 - r))
}

/// Mollifier profile `exp(-1/(1-t^2))` on `|t| < 1` with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

#[inline]
pub fn mollifier(t: f64) -> Jet {
    let w = 1.0 - t * t;
    if w <= 0.0 {
        return Jet {
            v: 0.0,
            d1: 0.0,
            d2: 0.0,
        };
    }
    let v = (-1.0 / w).exp();
    let w2 = w * w;
    let d1 = v * (-2.0 * t / w2);
    let d2 = v * (6.0 * t.powi(4) - 2.0) / (w2 * w2);
    Jet { v, d1, d2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for k in 0..100 {
            let u = k as f64 / 100.0;
            let a = smooth_step(u);
            let b = smooth_step(u + 0.01);
            assert!(b >= a);
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn plateau_support() {
        assert_eq!(plateau(0.0), 1.0);
        assert_eq!(plateau(0.5), 1.0);
        assert_eq!(plateau(1.0), 0.0);
        assert!(plateau(0.75) > 0.0 && plateau(0.75) < 1.0);
    }

    #[test]
    fn mollifier_derivatives_match_differences() {
        let h = 1e-5;
        for &t in &[-0.8, -0.3, 0.0, 0.2, 0.65, 0.9] {
            let j = mollifier(t);
            let fd1 = (mollifier(t + h).v - mollifier(t - h).v) / (2.0 * h);
            let fd2 = (mollifier(t + h).v - 2.0 * j.v + mollifier(t - h).v) / (h * h);
            assert!((j.d1 - fd1).abs() < 1e-8, "t={t}");
            assert!((j.d2 - fd2).abs() < 1e-4, "t={t}");
        }
        assert_eq!(mollifier(1.0).v, 0.0);
    }
}
