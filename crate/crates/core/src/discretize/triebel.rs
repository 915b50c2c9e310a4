//! Littlewood-Paley Triebel-Lizorkin norms on periodized boxes.

use rustfft::num_complex::Complex64;

use super::fft::{fftn, fftn_with, frequency_magnitudes, plan_axes};
use super::filterbank::FilterBank;
use super::grid::{pairwise_sum, GridBox, GridFunction};
use super::report::{NormMethod, NormReport};
use crate::error::{Error, Result};

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param(format!("p={p} must lie in [1, inf)")));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::param(format!(
            "q={q} is outside [1, inf]; q < 1 (sigma_pq > 0) is not computed"
        )));
    }
    Ok(())
}

fn require_inner(g: &GridFunction) -> Result<()> {
    if !g.is_inner_supported() {
        return Err(Error::Support(format!(
            "`{}` is not declared to be supported in the inner half of its box; \
             periodization would corrupt the norm",
            g.provenance()
        )));
    }
    Ok(())
}

/// Plain `L_p` norm by the midpoint/node rule.
pub fn lp_norm(g: &GridFunction, p: f64) -> f64 {
    let vol = g.grid().cell_volume();
    let terms: Vec<f64> = g.samples().iter().map(|v| v.abs().powf(p)).collect();
    (pairwise_sum(&terms) * vol).powf(1.0 / p)
}

struct Spectrum {
    coeffs: Vec<Complex64>,
    radii: Vec<f64>,
    shape: Vec<usize>,
    bank: FilterBank,
}

fn spectrum(g: &GridFunction) -> Spectrum {
    let grid = g.grid();
    let shape = grid.shape();
    let mut coeffs: Vec<Complex64> = g
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fftn(&mut coeffs, &shape, false);
    let radii = frequency_magnitudes(&shape, grid.spacing());
    let xi_max = radii.iter().cloned().fold(0.0, f64::max);
    let bank = FilterBank::covering(grid.dim(), xi_max);
    Spectrum {
        coeffs,
        radii,
        shape,
        bank,
    }
}

/// `sum_xi |g^(xi)|^2 phi_j(xi)^2`, scaled to approximate `||phi_j(D) g||_2^2`.
///
/// For `p = q = 2` the norm is `sum_j 2^{2js} E_j` by Parseval, so these
/// energies can be reused across `s`.
pub fn level_energies(g: &GridFunction) -> Vec<f64> {
    let sp = spectrum(g);
    energies_of(&sp, g.grid().cell_volume())
}

fn energies_of(sp: &Spectrum, cell_volume: f64) -> Vec<f64> {
    let total = sp.coeffs.len() as f64;
    let mut per_level = vec![Vec::new(); sp.bank.levels as usize + 1];
    for (c, &r) in sp.coeffs.iter().zip(&sp.radii) {
        let e = c.norm_sqr();
        for j in sp.bank.active_levels(r) {
            let w = sp.bank.phi(j, r);
            if w != 0.0 {
                per_level[j as usize].push(e * w * w);
            }
        }
    }
    per_level
        .iter()
        .map(|v| pairwise_sum(v) * cell_volume / total)
        .collect()
}

/// Precomputed FFT plans and filter weights for repeated
/// [`level_energies`] on grids of one shape and spacing.
pub struct EnergyPlan {
    shape: Vec<usize>,
    plans: Vec<std::sync::Arc<dyn rustfft::Fft<f64>>>,
    /// Per DFT bin: `(level, phi_level^2)` pairs.
    weights: Vec<Vec<(usize, f64)>>,
    levels: usize,
    cell_volume: f64,
}

impl EnergyPlan {
    pub fn new(grid: &GridBox) -> Self {
        let shape = grid.shape();
        let radii = frequency_magnitudes(&shape, grid.spacing());
        let bank = FilterBank::covering(grid.dim(), radii.iter().cloned().fold(0.0, f64::max));
        let weights = radii
            .iter()
            .map(|&r| {
                bank.active_levels(r)
                    .filter_map(|j| {
                        let w = bank.phi(j, r);
                        (w != 0.0).then_some((j as usize, w * w))
                    })
                    .collect()
            })
            .collect();
        Self {
            plans: plan_axes(&shape, false),
            shape,
            weights,
            levels: bank.levels as usize + 1,
            cell_volume: grid.cell_volume(),
        }
    }

    /// Same values as [`level_energies`] for samples on the planned grid.
    pub fn energies(&self, samples: &[f64]) -> Vec<f64> {
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fftn_with(&mut coeffs, &self.shape, &self.plans);
        let total = coeffs.len() as f64;
        let mut per_level = vec![Vec::new(); self.levels];
        for (c, w) in coeffs.iter().zip(&self.weights) {
            let e = c.norm_sqr();
            for &(j, w2) in w {
                per_level[j].push(e * w2);
            }
        }
        per_level
            .iter()
            .map(|v| pairwise_sum(v) * self.cell_volume / total)
            .collect()
    }
}

/// Combines cached level energies into `||g | F^s_{2,2}||`.
pub fn norm_from_energies(energies: &[f64], s: f64) -> f64 {
    let terms: Vec<f64> = energies
        .iter()
        .enumerate()
        .map(|(j, e)| 2f64.powf(2.0 * j as f64 * s) * e)
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// `|| (sum_j 2^{jsq} |phi_j(D) g|^q)^{1/q} | L_p ||` on the periodized box.
///
/// For `p = q = 2` the value is evaluated spectrally and the Fourier
/// multiplier norm `||(1+|xi|^2)^{s/2} g^||_2` is attached as a cross-check.
pub fn triebel_norm(g: &GridFunction, s: f64, p: f64, q: f64) -> Result<NormReport> {
    check_exponents(p, q)?;
    require_inner(g)?;
    let grid = g.grid();
    let mut report = NormReport::single(0.0, NormMethod::LpTriebel, p, grid.h_max());
    report.s = Some(s);
    report.q = Some(q);
    if g.samples().iter().all(|&v| v == 0.0) {
        if p == 2.0 && q == 2.0 {
            report.cross_check = Some(0.0);
        }
        return Ok(report);
    }
    let sp = spectrum(g);
    if p == 2.0 && q == 2.0 {
        let e = energies_of(&sp, grid.cell_volume());
        report.value = norm_from_energies(&e, s);
        report.cross_check = Some(sobolev_from_spectrum(&sp, grid.cell_volume(), s));
        return Ok(report);
    }
    let n = sp.coeffs.len();
    let mut acc = vec![0.0f64; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..=sp.bank.levels {
        let mut any = false;
        for ((b, c), &r) in buf.iter_mut().zip(&sp.coeffs).zip(&sp.radii) {
            let w = sp.bank.phi(j, r);
            any |= w != 0.0;
            *b = c * w;
        }
        if !any {
            continue;
        }
        fftn(&mut buf, &sp.shape, true);
        let weight = 2f64.powf(j as f64 * s);
        for (a, b) in acc.iter_mut().zip(&buf) {
            let v = weight * (b.re / n as f64).abs();
            if q.is_infinite() {
                *a = a.max(v);
            } else {
                *a += v.powf(q);
            }
        }
    }
    let terms: Vec<f64> = acc
        .iter()
        .map(|&a| {
            if q.is_infinite() {
                a.powf(p)
            } else {
                a.powf(p / q)
            }
        })
        .collect();
    report.value = (pairwise_sum(&terms) * grid.cell_volume()).powf(1.0 / p);
    Ok(report)
}

fn sobolev_from_spectrum(sp: &Spectrum, cell_volume: f64, s: f64) -> f64 {
    let total = sp.coeffs.len() as f64;
    let terms: Vec<f64> = sp
        .coeffs
        .iter()
        .zip(&sp.radii)
        .map(|(c, &r)| (1.0 + r * r).powf(s) * c.norm_sqr())
        .collect();
    (pairwise_sum(&terms) * cell_volume / total).sqrt()
}

/// `||(1+|xi|^2)^{s/2} g^ | L_2||`, the Bessel-potential norm `H^s = F^s_{2,2}`.
pub fn sobolev_fourier_norm(g: &GridFunction, s: f64) -> Result<NormReport> {
    require_inner(g)?;
    let grid = g.grid();
    let sp = spectrum(g);
    let mut report = NormReport::single(
        sobolev_from_spectrum(&sp, grid.cell_volume(), s),
        NormMethod::SobolevFourier,
        2.0,
        grid.h_max(),
    );
    report.s = Some(s);
    report.q = Some(2.0);
    Ok(report)
}

/// Mixed norm `( int || g(.., x_axis = ., ..) | F^s_{p,p}(R) ||^p d(other axes) )^{1/p}`
/// with 1-D filter banks along `axis`.
pub fn line_triebel_norm(g: &GridFunction, axis: usize, s: f64, p: f64) -> Result<f64> {
    check_exponents(p, p)?;
    require_inner(g)?;
    let grid = g.grid();
    let shape = grid.shape();
    let len = shape[axis];
    let h = grid.spacing()[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let radii: Vec<f64> = super::fft::axis_frequencies(len, h)
        .iter()
        .map(|v| v.abs())
        .collect();
    let bank = FilterBank::covering(1, radii.iter().cloned().fold(0.0, f64::max));
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let rest_volume = grid.cell_volume() / h;
    let mut line_terms = Vec::with_capacity(outer * stride);
    let mut spec = vec![Complex64::new(0.0, 0.0); len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * len * stride + inner;
            for k in 0..len {
                spec[k] = Complex64::new(g.samples()[base + k * stride], 0.0);
            }
            if spec.iter().all(|c| c.re == 0.0) {
                line_terms.push(0.0);
                continue;
            }
            fwd.process(&mut spec);
            let mut line_sum = Vec::new();
            for j in 0..=bank.levels {
                for k in 0..len {
                    buf[k] = spec[k] * bank.phi(j, radii[k]);
                }
                inv.process(&mut buf);
                let w = 2f64.powf(j as f64 * s * p);
                let parts: Vec<f64> = buf
                    .iter()
                    .map(|c| (c.re / len as f64).abs().powf(p))
                    .collect();
                line_sum.push(w * pairwise_sum(&parts) * h);
            }
            line_terms.push(pairwise_sum(&line_sum));
        }
    }
    Ok((pairwise_sum(&line_terms) * rest_volume).powf(1.0 / p))
}
