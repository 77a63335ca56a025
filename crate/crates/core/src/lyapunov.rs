//! Exponent profiles of free operator products.
//!
//! For a positive operator with spectral measure `mu` of rank `r`, the
//! marginal exponent profile is `f(t) = -(1/2) ln S(-t)` for `t < r` and zero
//! for `t > r`, where `S` is the s-transform of `mu`. Its antiderivative
//!
//! `F(t) = (1/2) [ -∫_{-t}^{0} ln(-psi^{-1}(x)) dx + (1-t) ln(1-t) + t ln t ]`
//!
//! measures the growth rate of `t`-dimensional volumes and saturates at
//! `F(r)` beyond the rank. The distribution function of the exponents, the
//! extended determinant, and the stationary integral equation for the
//! fraction of directions growing slower than a threshold are all derived
//! from the same transforms, giving independent cross-checks of one another.

use crate::error::{Error, Result};
use crate::measure::{LogValue, SpectralMeasure, DEFAULT_LOG_CUTOFFS};
use crate::par::try_map_indices;
use crate::quad::{gl16, gl32, graded_toward_hi, graded_toward_lo, integrate_panels};
use crate::transform::{psi_inverse, psi_with_err, resolvent, s_transform};
use serde::{Deserialize, Serialize};

/// Default number of interior grid points for [`lyapunov_profile`].
pub const DEFAULT_PROFILE_POINTS: usize = 199;

/// Marginal and integrated exponent profile on a parameter grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovProfile {
    /// Interior grid in `(0, 1)`.
    pub t_grid: Vec<f64>,
    /// Integrated profile `F` at the grid points.
    #[serde(rename = "F_values")]
    pub big_f_values: Vec<f64>,
    /// Marginal profile `f` at the grid points.
    pub f_values: Vec<f64>,
    /// Rank of the source measure.
    pub rank_r: f64,
    /// Label of the source measure.
    pub source_label: String,
}

/// Distribution function of the exponents over a threshold grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentDistribution {
    pub x_grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub rank_r: f64,
    pub source_label: String,
}

/// The top of the exponent range.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LargestExponent {
    /// `(1/2) ln m1`, the supremum of the marginal profile.
    pub value: f64,
    /// True when the measure has no kernel atom, in which case the value is
    /// attained as the limit of the profile at small `t` under the invertible
    /// hypothesis; with a kernel the same limit still holds but falls outside
    /// that hypothesis.
    pub corollary_applies: bool,
}

/// Method selector for [`fk_determinant`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetMethod {
    /// `ln det = (1/2) ∫_{(0,∞)} ln x dmu` via the cutoff protocol.
    Definition,
    /// `ln det = F(1)`, the integral of the marginal profile; valid for
    /// invertible operators.
    SIntegral,
}

/// An extended-determinant evaluation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeterminantResult {
    pub method: DetMethod,
    pub log_det: LogValue,
    /// `exp(log_det)` (zero for a divergent logarithm).
    pub det: f64,
    pub achieved_error: f64,
}

/// Marginal exponent `f(t)`: `-(1/2) ln S(-t)` below the rank, zero above
/// it. Exactly at the rank (within `1e-9`) the profile is not defined.
pub fn marginal_exponent(mu: &SpectralMeasure, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!(
            "profile parameter {t} must lie in (0, 1)"
        )));
    }
    let r = mu.rank_r();
    if t > r {
        return Ok(0.0);
    }
    if t > r - 1e-9 {
        return Err(Error::Boundary(format!(
            "profile parameter {t} lies within 1e-9 of the rank threshold {r}"
        )));
    }
    let s = s_transform(mu, -t)?;
    if s.is_nan() || s <= 0.0 {
        return Err(Error::NoConvergence(format!(
            "s-transform returned a non-positive value {s} at -{t}"
        )));
    }
    Ok(-0.5 * s.ln())
}

fn xlnx(u: f64) -> f64 {
    if u > 0.0 {
        u * u.ln()
    } else {
        0.0
    }
}

/// `∫_0^tau ln(-psi^{-1}(-s)) ds` by panels graded toward both endpoints:
/// toward zero for the logarithmic singularity of the integrand, toward
/// `tau` for the blow-up of the inverse as `s` approaches the rank.
fn inner_log_integral(mu: &SpectralMeasure, tau: f64, refine: bool) -> Result<f64> {
    let r = mu.rank_r();
    let gap = r - tau;
    let upper = if gap < 2e-9 { r - 2e-9 } else { tau };
    if upper <= 0.0 {
        return Ok(0.0);
    }
    let split = 0.5 * upper;
    let lo_levels = if refine { 48 } else { 46 };
    let scale_lo = split * (0.5f64).powi(lo_levels);
    let edge_dist = (r - upper).max(2e-9);
    let hi_shrink = if refine { 0.25 } else { 0.5 };
    let scale_hi = (edge_dist * hi_shrink).max(1e-12);
    let rule = if refine { gl32() } else { gl16() };

    let mut failure: Option<Error> = None;
    let (left, right, tail) = {
        let mut q = |s: f64| match psi_inverse(mu, -s) {
            Ok(z) => (-z).ln(),
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
                0.0
            }
        };
        let bp_left = graded_toward_lo(0.0, split, scale_lo);
        let left = integrate_panels(rule, &bp_left, &mut q);
        let bp_right = graded_toward_hi(split, upper, scale_hi);
        let right = integrate_panels(rule, &bp_right, &mut q);
        // Remainder of the clipped sliver [upper, tau], linear in its width
        // of at most 2e-9.
        let tail = if upper < tau {
            q(upper) * (tau - upper)
        } else {
            0.0
        };
        (left, right, tail)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(left + right + tail)
}

/// Integrated exponent `F(t)` for `t` in `(0, 1]`; saturates at `F(rank)`
/// above the rank.
pub fn integrated_exponent(mu: &SpectralMeasure, t: f64) -> Result<f64> {
    integrated_exponent_impl(mu, t, false)
}

fn integrated_exponent_impl(mu: &SpectralMeasure, t: f64, refine: bool) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!(
            "profile parameter {t} must lie in (0, 1]"
        )));
    }
    let r = mu.rank_r();
    let teff = t.min(r);
    if teff < 1e-12 {
        return Ok(0.5 * (xlnx(1.0 - teff) + xlnx(teff)));
    }
    let inner = inner_log_integral(mu, teff, refine)?;
    Ok(0.5 * (-inner + xlnx(1.0 - teff) + xlnx(teff)))
}

/// Marginal and integrated profile over `n` uniform interior grid points
/// `t_i = i/(n+1)`. Points falling within `1e-6` of the rank threshold are
/// nudged to `rank - 1e-6`.
pub fn lyapunov_profile(mu: &SpectralMeasure, n: usize) -> Result<LyapunovProfile> {
    if n == 0 || n > 100_000 {
        return Err(Error::InvalidConfig(format!(
            "profile grid size {n} outside 1..=100000"
        )));
    }
    let r = mu.rank_r();
    let t_grid: Vec<f64> = (1..=n)
        .map(|i| {
            let t = i as f64 / (n + 1) as f64;
            if r > 2e-6 && t > r - 1e-6 && t <= r {
                r - 1e-6
            } else {
                t
            }
        })
        .collect();
    let rows = try_map_indices(n, |i| {
        let t = t_grid[i];
        let f = marginal_exponent(mu, t)?;
        let big_f = integrated_exponent(mu, t)?;
        Ok::<(f64, f64), Error>((f, big_f))
    })?;
    Ok(LyapunovProfile {
        t_grid,
        big_f_values: rows.iter().map(|r| r.1).collect(),
        f_values: rows.iter().map(|r| r.0).collect(),
        rank_r: r,
        source_label: mu.label().to_string(),
    })
}

/// Distribution function of the exponents at threshold `x`:
/// `(r - t*(x)) + (1 - r) 1{x >= 0}` where `t*` inverts the marginal
/// profile. Solved by bisection on the moment-transform curve, one transform
/// evaluation per iteration.
pub fn exponent_cdf(mu: &SpectralMeasure, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("threshold must be finite".into()));
    }
    let r = mu.rank_r();
    let m1 = mu.moment(1);
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "exponent distribution needs a positive part".into(),
        ));
    }
    let fmax = 0.5 * m1.ln();
    let jump = if x >= 0.0 { 1.0 - r } else { 0.0 };
    if x >= fmax {
        return Ok((r + jump).clamp(0.0, 1.0));
    }

    // Along z = -e^v the parameter is t(v) = -psi(z) and the marginal is
    // f(v) = -(1/2) ln[(1 + 1/psi(z)) z]; both are monotone in v.
    let probe = |v: f64| -> Result<(f64, f64)> {
        let (p, _) = psi_with_err(mu, -v.exp())?;
        let t = -p;
        let s = (1.0 + 1.0 / p) * (-v.exp());
        Ok((t, -0.5 * s.ln()))
    };

    let clamp_t = r - 1e-9;
    // Expand downward until the marginal exceeds x (always happens since
    // f -> fmax > x as t -> 0).
    let mut v_lo = 0.0;
    let mut t_lo;
    loop {
        let (t, f) = probe(v_lo)?;
        t_lo = t;
        if f > x && t < clamp_t {
            break;
        }
        v_lo -= 1.4;
        if v_lo < -700.0 {
            return Err(Error::NoConvergence(
                "exponent distribution bracket exhausted near t = 0".into(),
            ));
        }
    }
    // Expand upward until the marginal drops below x or t hits the rank
    // clamp.
    let mut v_hi = v_lo + 1.4;
    let mut t_hi;
    loop {
        let (t, f) = probe(v_hi)?;
        t_hi = t;
        if f <= x || t >= clamp_t {
            break;
        }
        v_hi += 1.4;
        if v_hi > 60.0 {
            t_hi = r;
            break;
        }
    }

    for _ in 0..90 {
        if (t_hi - t_lo).abs() <= 1e-11 {
            break;
        }
        let vm = 0.5 * (v_lo + v_hi);
        if vm <= v_lo || vm >= v_hi {
            break;
        }
        let (t, f) = probe(vm)?;
        if f > x && t < clamp_t {
            v_lo = vm;
            t_lo = t;
        } else {
            v_hi = vm;
            t_hi = t.min(r);
        }
    }
    let tstar = (0.5 * (t_lo + t_hi)).clamp(0.0, r);
    Ok(((r - tstar) + jump).clamp(0.0, 1.0))
}

/// Default threshold grid: the marginal range padded by two percent.
pub fn default_x_grid(mu: &SpectralMeasure, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidConfig("threshold grid needs at least 2 points".into()));
    }
    let m1 = mu.moment(1);
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "exponent distribution needs a positive part".into(),
        ));
    }
    let fmax = 0.5 * m1.ln();
    let r = mu.rank_r();
    let t_deep = if r > 2e-6 { r - 1e-6 } else { 0.5 * r };
    let fmin = marginal_exponent(mu, t_deep).unwrap_or(fmax);
    let (lo, hi) = if fmin < fmax {
        let pad = 0.02 * (fmax - fmin);
        (fmin - pad, fmax + pad)
    } else {
        (fmax - 0.5, fmax + 0.5)
    };
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Distribution function over a threshold grid (the default grid when `None`).
pub fn exponent_distribution(
    mu: &SpectralMeasure,
    x_grid: Option<&[f64]>,
) -> Result<ExponentDistribution> {
    let grid: Vec<f64> = match x_grid {
        Some(g) => {
            if g.len() < 2 || g.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::InvalidConfig(
                    "threshold grid must be strictly increasing with at least 2 points".into(),
                ));
            }
            g.to_vec()
        }
        None => default_x_grid(mu, 201)?,
    };
    let mut cdf = try_map_indices(grid.len(), |i| exponent_cdf(mu, grid[i]))?;
    // The solver is monotone up to its own tolerance; enforce exact
    // monotonicity of the emitted table.
    for i in 1..cdf.len() {
        if cdf[i] < cdf[i - 1] {
            cdf[i] = cdf[i - 1];
        }
    }
    Ok(ExponentDistribution {
        x_grid: grid,
        cdf,
        rank_r: mu.rank_r(),
        source_label: mu.label().to_string(),
    })
}

/// The supremum of the exponent profile, `(1/2) ln m1`.
pub fn largest_exponent(mu: &SpectralMeasure) -> Result<LargestExponent> {
    let m1 = mu.moment(1);
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "largest exponent needs a positive first moment".into(),
        ));
    }
    Ok(LargestExponent {
        value: 0.5 * m1.ln(),
        corollary_applies: mu.zero_mass() == 0.0,
    })
}

/// Extended determinant of the operator, through either the defining
/// logarithmic integral or the profile integral `F(1)`.
pub fn fk_determinant(mu: &SpectralMeasure, method: DetMethod) -> Result<DeterminantResult> {
    match method {
        DetMethod::Definition => {
            let (partials, lv) = mu.log_integral_partials(&DEFAULT_LOG_CUTOFFS)?;
            match lv {
                LogValue::Finite(v) => {
                    let log_det = 0.5 * v;
                    let last = *partials.last().unwrap();
                    Ok(DeterminantResult {
                        method,
                        log_det: LogValue::Finite(log_det),
                        det: log_det.exp(),
                        achieved_error: 0.5 * (v - last).abs() + 1e-12,
                    })
                }
                LogValue::MinusInfinity => Ok(DeterminantResult {
                    method,
                    log_det: LogValue::MinusInfinity,
                    det: 0.0,
                    achieved_error: 0.0,
                }),
            }
        }
        DetMethod::SIntegral => {
            if !mu.is_invertible() {
                return Err(Error::Precondition(
                    "profile-integral determinant needs support bounded away from zero".into(),
                ));
            }
            let base = integrated_exponent_impl(mu, 1.0, false)?;
            let refined = integrated_exponent_impl(mu, 1.0, true)?;
            Ok(DeterminantResult {
                method,
                log_det: LogValue::Finite(refined),
                det: refined.exp(),
                achieved_error: (refined - base).abs() + 5e-8,
            })
        }
    }
}

/// Recovers `ln S(-t)` from the integrated profile by a central difference:
/// `-(F(t+dt) - F(t-dt)) / dt`.
pub fn s_from_determinant(mu: &SpectralMeasure, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::Domain(format!("step {dt} must lie in (0, 0.1]")));
    }
    let r = mu.rank_r();
    if !(t - dt >= 1e-9 && t + dt <= r - 1e-9) {
        return Err(Error::Domain(format!(
            "stencil [{}, {}] must stay inside (0, rank - 1e-9)",
            t - dt,
            t + dt
        )));
    }
    let fp = integrated_exponent(mu, t + dt)?;
    let fm = integrated_exponent(mu, t - dt)?;
    Ok(-(fp - fm) / dt)
}

/// Solves the stationary integral equation
/// `∫ s / (H x^2 + (1 - H) s) dmu(s) = 1` for `H` in `[0, 1]`.
///
/// The root is found by a sign scan of the equivalent transversal form
/// `k(H) = x^2 J(zeta(H)) - (1 - H)`, `zeta = -H x^2 / (1 - H)`, which
/// removes the spurious fixed point at `H = 0`; `J` is the resolvent. When no
/// interior crossing exists the threshold sits outside the exponent range:
/// all-positive `k` means every direction grows slower than `x` (H = 1),
/// all-negative means faster (H = 0). A degenerate identically-zero `k`
/// (point mass exactly at `x^2`) resolves to 1 by right-continuity.
pub fn newman_solve(mu: &SpectralMeasure, x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("threshold {x} must be positive")));
    }
    let x2 = x * x;
    let k = |h: f64| -> Result<f64> {
        let zeta = -h * x2 / (1.0 - h);
        let (j, _) = resolvent(mu, zeta)?;
        Ok(x2 * j - (1.0 - h))
    };

    let mut grid: Vec<f64> = (2..=9).rev().map(|e| 10f64.powi(-e)).collect();
    grid.extend((1..=49).map(|i| 0.02 * i as f64));
    grid.extend((3..=9).map(|e| 1.0 - 10f64.powi(-e)));

    let mut vals = Vec::with_capacity(grid.len());
    let mut max_abs = 0.0f64;
    for &h in &grid {
        let v = k(h)?;
        max_abs = max_abs.max(v.abs());
        vals.push(v);
    }
    if max_abs <= 1e-10 {
        return Ok(1.0);
    }
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            return Ok(grid[i]);
        }
        if i + 1 < grid.len() && (vals[i] > 0.0) != (vals[i + 1] > 0.0) {
            let mut lo = grid[i];
            let mut hi = grid[i + 1];
            let lo_pos = vals[i] > 0.0;
            for _ in 0..100 {
                if hi - lo <= 1e-12 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let vm = k(mid)?;
                if vm == 0.0 {
                    return Ok(mid);
                }
                if (vm > 0.0) == lo_pos {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
    }
    if vals.iter().all(|&v| v > 0.0) {
        Ok(1.0)
    } else {
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xlnx_endpoints() {
        assert_eq!(xlnx(0.0), 0.0);
        assert_eq!(xlnx(1.0), 0.0);
        assert!((xlnx(0.5) - 0.5 * 0.5f64.ln()).abs() < 1e-15);
    }
}
