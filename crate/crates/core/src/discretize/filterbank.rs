use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::smooth_step;

/// Inner edge of the low-pass transition: `Phi(t) = 1` for `t <= LOWPASS_FLAT`.
pub const LOWPASS_FLAT: f64 = 1.4;
/// Outer edge: `Phi(t) = 0` for `t >= LOWPASS_CUT`.
pub const LOWPASS_CUT: f64 = 1.6;

/// Radial low-pass profile.
#[inline]
pub fn lowpass(t: f64) -> f64 {
    smooth_step((LOWPASS_CUT - t) / (LOWPASS_CUT - LOWPASS_FLAT))
}

/// Dyadic Littlewood-Paley bank on `R^dim`:
/// `phi_0 = Phi(|xi|)`, `phi_j = Phi(2^-j |xi|) - Phi(2^(1-j) |xi|)` for
/// `1 <= j < levels` and the top level `phi_J = 1 - Phi(2^(1-J) |xi|)`
/// absorbing all higher frequencies, so the bank sums to one exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterBank {
    pub dim: usize,
    pub levels: u32,
}

pub fn lp_filterbank(dim: usize, levels: u32) -> Result<FilterBank> {
    if levels < 2 {
        return Err(Error::param("filter bank needs at least two levels"));
    }
    if dim == 0 {
        return Err(Error::param("filter bank dimension must be positive"));
    }
    Ok(FilterBank { dim, levels })
}

impl FilterBank {
    /// Smallest bank whose top level is still a genuine dyadic dilate for
    /// every frequency up to `xi_max`.
    pub fn covering(dim: usize, xi_max: f64) -> Self {
        let need = (xi_max / LOWPASS_FLAT).log2().ceil().max(0.0) as u32;
        Self {
            dim,
            levels: need.max(2),
        }
    }

    /// `phi_j(xi)` as a function of `|xi|`.
    #[inline]
    pub fn phi(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            lowpass(r)
        } else if j < self.levels {
            lowpass(r * 0.5f64.powi(j as i32)) - lowpass(r * 0.5f64.powi(j as i32 - 1))
        } else if j == self.levels {
            1.0 - lowpass(r * 0.5f64.powi(j as i32 - 1))
        } else {
            0.0
        }
    }

    /// Annulus `[2^(j-1) a, 2^j b]` containing the support of `phi_j`, `j >= 1`.
    pub fn annulus(&self, j: u32) -> (f64, f64) {
        let lo = LOWPASS_FLAT * 2f64.powi(j as i32 - 1);
        let hi = if j < self.levels {
            LOWPASS_CUT * 2f64.powi(j as i32)
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    /// Levels whose support meets `|xi| = r`.
    pub fn active_levels(&self, r: f64) -> std::ops::RangeInclusive<u32> {
        if r < LOWPASS_FLAT {
            return 0..=0;
        }
        let j = (r / LOWPASS_CUT).log2().floor().max(0.0) as u32;
        let hi = ((r / LOWPASS_FLAT).log2().floor() as u32 + 1).min(self.levels);
        j.min(self.levels)..=hi
    }
}
