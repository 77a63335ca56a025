//! Analytic transforms of a spectral measure: the Cauchy transform, the
//! moment transform `psi`, its functional inverse, and the multiplicative
//! s-transform.
//!
//! `psi(z) = ∫ zx/(1-zx) dmu(x)` is strictly increasing on the negative axis
//! with range `(-rank, 0)`, so its inverse is found by monotone bracketing.
//! The s-transform is `S(w) = (1 + 1/w) psi^{-1}(w)`; it is multiplicative
//! over free products, which is what the exponent machinery builds on.

use crate::error::{Error, Result};
use crate::measure::SpectralMeasure;
use crate::quad::{gl16, graded_toward_lo, integrate_panels};
use std::f64::consts::PI;

/// Transform selector for [`evaluate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Cauchy,
    Psi,
    PsiInverse,
    STransform,
}

/// A transform evaluation with an accuracy estimate.
#[derive(Clone, Copy, Debug)]
pub struct TransformPoint {
    pub kind: TransformKind,
    pub argument: f64,
    pub value: f64,
    /// Upper estimate of the numerical error (for `PsiInverse` the residual
    /// `|psi(result) - argument|`).
    pub achieved_error: f64,
}

/// Rank data of a measure.
#[derive(Clone, Copy, Debug)]
pub struct RankInfo {
    /// Total mass minus the kernel atom: the upper end of the parameter range
    /// on which the exponent profile is nontrivial.
    pub rank_r: f64,
    /// Mass of the atom at zero.
    pub zero_mass: f64,
}

/// Rank data of `mu`.
pub fn rank_info(mu: &SpectralMeasure) -> RankInfo {
    RankInfo {
        rank_r: mu.rank_r(),
        zero_mass: mu.zero_mass(),
    }
}

/// `J(zeta) = ∫ dmu(x)/(x - zeta)` for `zeta` strictly outside the support.
/// Returns the value and an error estimate.
///
/// Far from the support the midpoint rule applies directly. Within one
/// percent of the support width the integrand develops a boundary layer; it
/// is then integrated in the angle variable on panels graded toward the near
/// edge, where `x - zeta = delta + (b-a) sin^2(phi/2)` is evaluated without
/// cancellation however small `delta` is.
pub(crate) fn resolvent(mu: &SpectralMeasure, zeta: f64) -> Result<(f64, f64)> {
    if !zeta.is_finite() {
        return Err(Error::Domain("resolvent argument must be finite".into()));
    }
    let mut val = 0.0;
    let mut err = 0.0;
    for at in mu.atoms() {
        if at.x == zeta {
            return Err(Error::Domain(format!(
                "resolvent argument {zeta} coincides with an atom"
            )));
        }
        val += at.mass / (at.x - zeta);
    }
    for seg in mu.segments() {
        let width = seg.b - seg.a;
        if zeta >= seg.a && zeta <= seg.b {
            return Err(Error::Domain(format!(
                "resolvent argument {zeta} lies inside support [{}, {}]",
                seg.a, seg.b
            )));
        }
        let (delta, left) = if zeta < seg.a {
            (seg.a - zeta, true)
        } else {
            (zeta - seg.b, false)
        };
        if delta >= 0.01 * width {
            let acc: f64 = seg.integrate(|x| 1.0 / (x - zeta));
            val += acc;
            err += PI * seg.tail / delta;
        } else {
            let tau = (2.0 * (delta / width).sqrt().asinh()).max(1e-9);
            let bp = graded_toward_lo(0.0, PI, tau);
            let acc = if left {
                integrate_panels(gl16(), &bp, |phi| {
                    let s = (0.5 * phi).sin();
                    seg.h0_near_left(phi) / (delta + width * s * s)
                })
            } else {
                -integrate_panels(gl16(), &bp, |theta| {
                    let s = (0.5 * theta).sin();
                    seg.h0_at_theta(theta) / (delta + width * s * s)
                })
            };
            val += acc;
            err += seg.tail * PI / (delta * (delta + width)).sqrt();
        }
    }
    Ok((val, err))
}

/// Cauchy transform `G(z) = ∫ dmu(x)/(z - x)`, defined here for `z < 0` or
/// `z` above the support.
pub fn cauchy(mu: &SpectralMeasure, z: f64) -> Result<f64> {
    cauchy_with_err(mu, z).map(|p| p.0)
}

fn cauchy_with_err(mu: &SpectralMeasure, z: f64) -> Result<(f64, f64)> {
    if !(z < 0.0 || z > mu.sup_support()) {
        return Err(Error::Domain(format!(
            "cauchy transform evaluated at {z}: argument must be negative or above the support"
        )));
    }
    let (j, jerr) = resolvent(mu, z)?;
    Ok((-j, jerr))
}

/// Moment transform `psi(z) = ∫ zx/(1 - zx) dmu(x)` for `z < 1/sup(support)`
/// (all negative `z` included).
pub fn psi(mu: &SpectralMeasure, z: f64) -> Result<f64> {
    psi_with_err(mu, z).map(|p| p.0)
}

pub(crate) fn psi_with_err(mu: &SpectralMeasure, z: f64) -> Result<(f64, f64)> {
    if !z.is_finite() {
        return Err(Error::Domain("psi argument must be finite".into()));
    }
    if z == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sup = mu.sup_support();
    if sup <= 0.0 {
        // All mass in the kernel: the integrand vanishes identically.
        return Ok((0.0, 0.0));
    }
    if z > 0.0 && z >= 1.0 / sup {
        return Err(Error::Domain(format!(
            "psi argument {z} must stay below 1/sup(support) = {}",
            1.0 / sup
        )));
    }
    if z.abs() * 2.0 * sup <= 1.0 {
        // The pole at x = 1/z sits at least sup(support) away from the
        // support: integrate the defining form directly. This also avoids the
        // cancellation in -mass - zeta J(zeta) when psi is small.
        let mut val = 0.0;
        let mut err = 0.0;
        for at in mu.atoms() {
            val += at.mass * z * at.x / (1.0 - z * at.x);
        }
        for seg in mu.segments() {
            val += seg.integrate(|x| z * x / (1.0 - z * x));
            err += seg.tail * PI;
        }
        Ok((val, err))
    } else {
        let zeta = 1.0 / z;
        let (j, jerr) = resolvent(mu, zeta)?;
        Ok((-mu.total_mass() - zeta * j, zeta.abs() * jerr))
    }
}

/// Functional inverse of `psi` on the negative axis. The argument must lie in
/// `(-rank + 1e-9, 0)`; values within `1e-9` of `-rank` are rejected because
/// the inverse blows up there.
pub fn psi_inverse(mu: &SpectralMeasure, w: f64) -> Result<f64> {
    psi_inverse_with_err(mu, w).map(|p| p.0)
}

pub(crate) fn psi_inverse_with_err(mu: &SpectralMeasure, w: f64) -> Result<(f64, f64)> {
    let r = mu.rank_r();
    if !w.is_finite() || w >= 0.0 {
        return Err(Error::Domain(format!(
            "psi inverse argument {w} must be negative"
        )));
    }
    if w <= -r + 1e-9 {
        return Err(Error::Domain(format!(
            "psi inverse argument {w} must exceed -rank = {} by more than 1e-9",
            -r
        )));
    }
    if w > -1e-6 {
        // Two-term inversion of the moment expansion psi(z) = m1 z + m2 z^2 + ...
        let m1 = mu.moment(1);
        let m2 = mu.moment(2);
        if m1 <= 0.0 {
            return Err(Error::Domain("psi inverse needs a positive first moment".into()));
        }
        let z = w / m1 - m2 / (m1 * m1 * m1) * w * w;
        return Ok((z, 50.0 * w.abs().powi(3)));
    }

    // Monotone bracket by doubling/halving from z = -1.
    let eval = |z: f64| psi_with_err(mu, z).map(|p| p.0);
    let mut z_lo;
    let mut z_hi;
    let p1 = eval(-1.0)?;
    if p1 == w {
        return Ok((-1.0, 0.0));
    } else if p1 > w {
        // Root deeper than -1.
        z_hi = -1.0;
        z_lo = -2.0;
        let mut guard = 0;
        while eval(z_lo)? > w {
            z_hi = z_lo;
            z_lo *= 2.0;
            guard += 1;
            if guard > 70 || z_lo < -1e19 {
                return Err(Error::NoConvergence(format!(
                    "psi inverse bracket exhausted at {z_lo} for argument {w}"
                )));
            }
        }
    } else {
        // Root between -1 and 0.
        z_lo = -1.0;
        z_hi = -0.5;
        let mut guard = 0;
        while eval(z_hi)? < w {
            z_lo = z_hi;
            z_hi *= 0.5;
            guard += 1;
            if guard > 80 {
                return Err(Error::NoConvergence(format!(
                    "psi inverse bracket exhausted near zero for argument {w}"
                )));
            }
        }
    }

    // Bisection in v = ln(-z), which keeps relative precision uniform across
    // the huge dynamic range near the rank boundary. psi decreases in v.
    let mut va = (-z_hi).ln();
    let mut vb = (-z_lo).ln();
    let mut pa = eval(-va.exp())?;
    let mut pb = eval(-vb.exp())?;
    for _ in 0..80 {
        if vb - va <= 1e-14 * (1.0 + va.abs()) {
            break;
        }
        let vm = 0.5 * (va + vb);
        if vm <= va || vm >= vb {
            break;
        }
        let pm = eval(-vm.exp())?;
        if pm >= w {
            va = vm;
            pa = pm;
        } else {
            vb = vm;
            pb = pm;
        }
    }
    // Secant polish on the bracket.
    let mut best_v = if (pa - w).abs() <= (pb - w).abs() { va } else { vb };
    let mut best_p = if (pa - w).abs() <= (pb - w).abs() { pa } else { pb };
    for _ in 0..2 {
        if pa == pb {
            break;
        }
        let vs = va + (pa - w) * (vb - va) / (pa - pb);
        if !(vs > va && vs < vb) {
            break;
        }
        let ps = eval(-vs.exp())?;
        if (ps - w).abs() < (best_p - w).abs() {
            best_v = vs;
            best_p = ps;
        }
        if ps >= w {
            va = vs;
            pa = ps;
        } else {
            vb = vs;
            pb = ps;
        }
    }
    Ok((-best_v.exp(), (best_p - w).abs()))
}

/// s-transform `S(w) = (1 + 1/w) psi^{-1}(w)` on `(-rank, 0)`, extended by
/// continuity to `S(0) = 1/m1`.
pub fn s_transform(mu: &SpectralMeasure, w: f64) -> Result<f64> {
    s_transform_with_err(mu, w).map(|p| p.0)
}

pub(crate) fn s_transform_with_err(mu: &SpectralMeasure, w: f64) -> Result<(f64, f64)> {
    if w == 0.0 {
        let m1 = mu.moment(1);
        if m1 <= 0.0 {
            return Err(Error::Domain(
                "s-transform at zero needs a positive first moment".into(),
            ));
        }
        return Ok((1.0 / m1, f64::EPSILON / m1));
    }
    if w > 0.0 {
        return Err(Error::Domain(format!(
            "s-transform argument {w} must lie in (-rank, 0]"
        )));
    }
    let (z, werr) = psi_inverse_with_err(mu, w)?;
    let s = (1.0 + 1.0 / w) * z;
    // Residual in w maps to a relative error of z of comparable size near the
    // origin; report a conservative estimate.
    let err = (1.0 + 1.0 / w).abs() * (werr * z.abs() / w.abs()).max(f64::EPSILON * z.abs())
        + f64::EPSILON * s.abs();
    Ok((s, err))
}

/// Evaluates one transform with an accuracy estimate attached.
pub fn evaluate(mu: &SpectralMeasure, kind: TransformKind, argument: f64) -> Result<TransformPoint> {
    let (value, achieved_error) = match kind {
        TransformKind::Cauchy => cauchy_with_err(mu, argument)?,
        TransformKind::Psi => psi_with_err(mu, argument)?,
        TransformKind::PsiInverse => psi_inverse_with_err(mu, argument)?,
        TransformKind::STransform => s_transform_with_err(mu, argument)?,
    };
    Ok(TransformPoint {
        kind,
        argument,
        value,
        achieved_error,
    })
}

/// Evaluator for the s-transform of a free product of factors.
///
/// The s-transform of the product is the product of the factor s-transforms.
/// Evaluation is restricted to `(-min_i rank_i, 0]`, where every factor
/// transform is defined; the identity represents the product law on the
/// sub-interval down to the product's own rank.
#[derive(Clone, Debug)]
pub struct SProduct {
    factors: Vec<SpectralMeasure>,
    rank: f64,
}

impl SProduct {
    pub fn new(factors: Vec<SpectralMeasure>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidConfig(
                "product evaluator needs at least one factor".into(),
            ));
        }
        let rank = factors.iter().map(|f| f.rank_r()).fold(f64::INFINITY, f64::min);
        Ok(SProduct { factors, rank })
    }

    /// Convenience constructor for two factors.
    pub fn of(m1: &SpectralMeasure, m2: &SpectralMeasure) -> Result<Self> {
        Self::new(vec![m1.clone(), m2.clone()])
    }

    pub fn factors(&self) -> &[SpectralMeasure] {
        &self.factors
    }

    /// Minimum of the factor ranks: the evaluability bound for [`SProduct::s`].
    pub fn rank_r(&self) -> f64 {
        self.rank
    }

    /// Product of the factor s-transforms at `w`.
    pub fn s(&self, w: f64) -> Result<f64> {
        let mut acc = 1.0;
        for f in &self.factors {
            acc *= s_transform(f, w)?;
        }
        Ok(acc)
    }

    /// Exponent-profile marginal of the product: `-(1/2) ln S(-t)` below the
    /// rank, zero above it.
    pub fn marginal_exponent(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!(
                "profile parameter {t} must lie in (0, 1)"
            )));
        }
        if (t - self.rank).abs() < 1e-12 {
            return Err(Error::Boundary(format!(
                "profile parameter {t} sits on the rank threshold {}",
                self.rank
            )));
        }
        if t > self.rank {
            return Ok(0.0);
        }
        Ok(-0.5 * self.s(-t)?.ln())
    }
}
