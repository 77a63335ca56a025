//! Spectral measures on `[0, ∞)`: finitely many atoms plus continuous
//! components with algebraic edge behavior.
//!
//! A continuous component on `[a, b]` has density
//! `rho(x) = (x-a)^{alpha_left} (b-x)^{alpha_right} s(x)` where `s` is smooth
//! and strictly positive up to the edges. The component is stored through the
//! substitution `x = a + (b-a) cos^2(theta/2)`, `theta in [0, pi]`, under
//! which every integral `∫ rho(x) g(x) dx` becomes `∫_0^pi h0(theta)
//! g(x(theta)) dtheta` with
//!
//! `h0(theta) = (b-a)^{aL+aR+1} cos^{2aL+1}(theta/2) sin^{2aR+1}(theta/2) s(x(theta))`.
//!
//! For half-integer edge exponents (the square-root and inverse-square-root
//! edges of the standard singular-value laws) `h0` extends to a smooth even
//! periodic function, so the midpoint rule in `theta` and the associated
//! cosine series converge spectrally fast. The cosine coefficients of `h0`
//! give closed-form masses, distribution functions, and logarithmic
//! integrals; all downstream consumers evaluate exact functionals of those
//! coefficients.

use crate::error::{Error, Result};
use crate::quad::{clenshaw_cos, gl16, graded_toward_hi, integrate_panels};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default node count for canonical sampling of a continuous component.
pub const DEFAULT_NODES: usize = 257;

/// Cutoff sequence used by the logarithmic-integral protocol when the caller
/// does not supply one.
pub const DEFAULT_LOG_CUTOFFS: [f64; 7] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14];

/// A possibly divergent logarithmic integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LogValue {
    /// The integral converged to the contained value.
    Finite(f64),
    /// The cutoff sequence indicates divergence to negative infinity.
    MinusInfinity,
}

impl LogValue {
    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            LogValue::Finite(v) => Some(v),
            LogValue::MinusInfinity => None,
        }
    }
}

/// A point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// One continuous component of a spectral measure. See the module docs for
/// the representation.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousSegment {
    /// Left support endpoint.
    pub a: f64,
    /// Right support endpoint.
    pub b: f64,
    /// Edge exponent at `a` (must exceed -1).
    pub alpha_left: f64,
    /// Edge exponent at `b` (must exceed -1).
    pub alpha_right: f64,
    /// Smooth factor sampled at the canonical nodes, in theta order
    /// (decreasing x).
    smooth: Vec<f64>,
    /// Node abscissae `x(theta_j)`, in theta order.
    pub(crate) nodes_x: Vec<f64>,
    /// Midpoint weights `(pi/n) h0(theta_j)`; `∫ rho g dx ≈ Σ w_j g(x_j)`.
    pub(crate) quad_w: Vec<f64>,
    /// Truncated cosine coefficients of `h0`: `h0 ≈ c_0 + Σ c_k cos(k
    /// theta)`.
    pub(crate) coeffs: Vec<f64>,
    /// Coefficients of `h0(pi - phi)` as a series in `cos(k phi)`.
    pub(crate) coeffs_flipped: Vec<f64>,
    /// Sum of the absolute values of the discarded coefficients; an estimate
    /// of the representation resolution.
    pub(crate) tail: f64,
    /// Total mass `pi c_0`.
    mass: f64,
}

/// Canonical angles `theta_j = (j + 1/2) pi / n`.
pub fn canonical_thetas(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect()
}

/// Canonical abscissae `x(theta_j)` on `[a, b]`, in theta order (decreasing
/// x).
pub fn canonical_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    canonical_thetas(n)
        .iter()
        .map(|&t| x_of_theta(a, b, t))
        .collect()
}

fn x_of_theta(a: f64, b: f64, theta: f64) -> f64 {
    let c = (0.5 * theta).cos();
    a + (b - a) * c * c
}

fn theta_of_x(a: f64, b: f64, x: f64) -> f64 {
    let ratio = ((x - a) / (b - a)).clamp(0.0, 1.0);
    2.0 * ratio.sqrt().acos()
}

impl ContinuousSegment {
    /// Builds a segment from smooth-factor samples in theta order (first
    /// sample nearest `b`).
    pub fn new(
        a: f64,
        b: f64,
        alpha_left: f64,
        alpha_right: f64,
        smooth: Vec<f64>,
    ) -> Result<Self> {
        for v in [a, b, alpha_left, alpha_right] {
            if !v.is_finite() {
                return Err(Error::InvalidMeasure("non-finite segment parameter".into()));
            }
        }
        if a < 0.0 || b <= a {
            return Err(Error::InvalidMeasure(format!(
                "segment endpoints must satisfy 0 <= a < b, got [{a}, {b}]"
            )));
        }
        if alpha_left <= -1.0 || alpha_right <= -1.0 {
            return Err(Error::InvalidMeasure(
                "edge exponents must exceed -1 for integrability".into(),
            ));
        }
        let n = smooth.len();
        if !(8..=8192).contains(&n) {
            return Err(Error::InvalidMeasure(format!(
                "segment needs between 8 and 8192 smooth samples, got {n}"
            )));
        }
        if smooth.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidMeasure(
                "smooth samples must be finite and nonnegative".into(),
            ));
        }

        let thetas = canonical_thetas(n);
        let width = b - a;
        let wpow = width.powf(alpha_left + alpha_right + 1.0);
        let mut nodes_x = Vec::with_capacity(n);
        let mut h0 = Vec::with_capacity(n);
        for (j, &theta) in thetas.iter().enumerate() {
            let half = 0.5 * theta;
            let c = half.cos();
            let s = half.sin();
            let w = wpow * c.powf(2.0 * alpha_left + 1.0) * s.powf(2.0 * alpha_right + 1.0);
            nodes_x.push(a + width * c * c);
            h0.push(w * smooth[j]);
        }
        let quad_w: Vec<f64> = h0.iter().map(|&h| PI / n as f64 * h).collect();

        // Cosine coefficients of h0 via the direct discrete transform.
        let mut raw = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = 0.0;
            for (j, &h) in h0.iter().enumerate() {
                acc += h * (k as f64 * thetas[j]).cos();
            }
            let scale = if k == 0 { 1.0 } else { 2.0 };
            raw.push(scale * acc / n as f64);
        }
        let max_abs = raw.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
        let mut keep = raw.len();
        while keep > 8 && raw[keep - 1].abs() <= 1e-15 * max_abs {
            keep -= 1;
        }
        let tail: f64 = raw[keep..].iter().map(|c| c.abs()).sum::<f64>()
            + f64::EPSILON * max_abs;
        let coeffs: Vec<f64> = raw[..keep].to_vec();
        let coeffs_flipped: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        let mass = PI * coeffs[0];
        if !mass.is_finite() {
            return Err(Error::InvalidMeasure("segment mass is not finite".into()));
        }

        Ok(ContinuousSegment {
            a,
            b,
            alpha_left,
            alpha_right,
            smooth,
            nodes_x,
            quad_w,
            coeffs,
            coeffs_flipped,
            tail,
            mass,
        })
    }

    /// Builds a segment from smooth-factor samples listed in increasing-x
    /// order (the on-disk convention).
    pub fn from_values_increasing_x(
        a: f64,
        b: f64,
        alpha_left: f64,
        alpha_right: f64,
        mut values: Vec<f64>,
    ) -> Result<Self> {
        values.reverse();
        Self::new(a, b, alpha_left, alpha_right, values)
    }

    /// Smooth-factor samples in increasing-x order.
    pub fn values_increasing_x(&self) -> Vec<f64> {
        let mut v = self.smooth.clone();
        v.reverse();
        v
    }

    /// Number of canonical nodes.
    pub fn node_count(&self) -> usize {
        self.smooth.len()
    }

    /// Total mass of the component.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `∫ rho(x) g(x) dx` by the midpoint rule in theta; spectrally accurate
    /// for g smooth on a neighbourhood of `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.quad_w
            .iter()
            .zip(self.nodes_x.iter())
            .map(|(&w, &x)| w * g(x))
            .sum()
    }

    /// `h0(theta)` evaluated from the stored cosine series.
    pub(crate) fn h0_at_theta(&self, theta: f64) -> f64 {
        clenshaw_cos(&self.coeffs, theta)
    }

    /// `h0(pi - phi)` evaluated from the sign-flipped series; accurate for
    /// small `phi` (near the left edge).
    pub(crate) fn h0_near_left(&self, phi: f64) -> f64 {
        clenshaw_cos(&self.coeffs_flipped, phi)
    }

    /// Measure of `[a, x]` within this component.
    pub fn cdf_within(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return self.mass;
        }
        let theta = theta_of_x(self.a, self.b, x);
        let mut acc = self.coeffs[0] * (PI - theta);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            acc -= c * (k as f64 * theta).sin() / k as f64;
        }
        acc.clamp(0.0, self.mass)
    }

    /// Density `rho(x)` strictly inside `(a, b)`, zero outside.
    pub fn density_at(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let theta = theta_of_x(self.a, self.b, x);
        2.0 * self.h0_at_theta(theta) / ((self.b - self.a) * theta.sin())
    }

    /// `∫ rho(x) ln(x - a) dx`, exactly in the stored coefficients:
    /// `pi c_0 ln((b-a)/4) + pi Σ_{k>=1} (-1)^{k+1} c_k / k`.
    fn log_shifted_series(&self) -> f64 {
        let mut acc = self.coeffs[0] * ((self.b - self.a) / 4.0).ln();
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * c / k as f64;
        }
        PI * acc
    }

    /// `∫ rho(x) ln x dx` over the whole component.
    pub fn log_full(&self) -> f64 {
        if self.a == 0.0 {
            return self.log_shifted_series();
        }
        let n = self.smooth.len() as f64;
        let ratio = self.a / (self.b - self.a);
        // The plain midpoint rule resolves ln x only when the node count
        // covers the analyticity strip, which shrinks like sqrt(a/(b-a)).
        if 2.0 * n * ratio.sqrt() >= 30.0 {
            return self.integrate(|x| x.ln());
        }
        // Otherwise: exact series for ln(x-a) plus a graded-panel correction
        // for ln(x) - ln(x-a) = ln(1 + ratio / cos^2(theta/2)), concentrated
        // near theta = pi.
        let scale = 2.0 * ratio.sqrt().asinh();
        let bp = graded_toward_hi(0.0, PI, scale.max(1e-13));
        let correction = integrate_panels(gl16(), &bp, |theta| {
            let phi = PI - theta;
            let half_sin = (0.5 * phi).sin();
            let c2 = half_sin * half_sin;
            self.h0_at_theta(theta) * (ratio / c2).ln_1p()
        });
        self.log_shifted_series() + correction
    }

    /// `∫_{max(a, c)}^{b} rho(x) ln x dx` for a positive cutoff `c`.
    pub fn log_partial(&self, c: f64) -> f64 {
        if c <= self.a {
            return self.log_full();
        }
        if c >= self.b {
            return 0.0;
        }
        let theta_c = theta_of_x(self.a, self.b, c);
        // x >= c corresponds to theta <= theta_c. ln x(theta) steepens only
        // as x approaches small values, i.e. toward theta_c itself when c is
        // near a left edge at small x; panels graded toward theta_c with the
        // natural scale pi - theta_c resolve that layer.
        let scale = (PI - theta_c).min(theta_c).max(1e-12);
        let bp = graded_toward_hi(0.0, theta_c, scale);
        integrate_panels(gl16(), &bp, |theta| {
            self.h0_at_theta(theta) * x_of_theta(self.a, self.b, theta).ln()
        })
    }
}

/// A spectral measure: atoms plus continuous components, with disjoint
/// supports inside `[0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    label: String,
    atoms: Vec<Atom>,
    segments: Vec<ContinuousSegment>,
    total_mass: f64,
}

impl SpectralMeasure {
    /// Builds a probability measure; total mass must be within `1e-10` of 1.
    pub fn new(atoms: Vec<Atom>, segments: Vec<ContinuousSegment>, label: &str) -> Result<Self> {
        let m = Self::assemble(atoms, segments, label)?;
        if (m.total_mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidMeasure(format!(
                "total mass {} is not 1 within 1e-10",
                m.total_mass
            )));
        }
        Ok(m)
    }

    /// Builds a sub-probability measure (positive total mass at most 1).
    pub fn new_sub_probability(
        atoms: Vec<Atom>,
        segments: Vec<ContinuousSegment>,
        label: &str,
    ) -> Result<Self> {
        let m = Self::assemble(atoms, segments, label)?;
        if m.total_mass <= 0.0 || m.total_mass > 1.0 + 1e-10 {
            return Err(Error::InvalidMeasure(format!(
                "sub-probability total mass {} outside (0, 1]",
                m.total_mass
            )));
        }
        Ok(m)
    }

    fn assemble(
        mut atoms: Vec<Atom>,
        mut segments: Vec<ContinuousSegment>,
        label: &str,
    ) -> Result<Self> {
        for at in &atoms {
            if !at.x.is_finite() || !at.mass.is_finite() {
                return Err(Error::InvalidMeasure("non-finite atom".into()));
            }
            if at.x < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} lies outside [0, ∞)",
                    at.x
                )));
            }
            if at.mass <= 0.0 {
                return Err(Error::InvalidMeasure("atom mass must be positive".into()));
            }
        }
        atoms.sort_by(|p, q| p.x.total_cmp(&q.x));
        for pair in atoms.windows(2) {
            if pair[0].x == pair[1].x {
                return Err(Error::InvalidMeasure(format!(
                    "duplicate atom at {}",
                    pair[0].x
                )));
            }
        }
        segments.sort_by(|p, q| p.a.total_cmp(&q.a));
        for pair in segments.windows(2) {
            if pair[1].a < pair[0].b {
                return Err(Error::InvalidMeasure(format!(
                    "segments [{}, {}] and [{}, {}] overlap",
                    pair[0].a, pair[0].b, pair[1].a, pair[1].b
                )));
            }
        }
        for at in &atoms {
            for seg in &segments {
                if at.x > seg.a && at.x < seg.b {
                    return Err(Error::InvalidMeasure(format!(
                        "atom at {} lies inside segment [{}, {}]",
                        at.x, seg.a, seg.b
                    )));
                }
            }
        }
        let total_mass =
            atoms.iter().map(|a| a.mass).sum::<f64>() + segments.iter().map(|s| s.mass()).sum::<f64>();
        if !total_mass.is_finite() {
            return Err(Error::InvalidMeasure("total mass is not finite".into()));
        }
        Ok(SpectralMeasure {
            label: label.to_string(),
            atoms,
            segments,
            total_mass,
        })
    }

    /// The unit point mass at `x`.
    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(vec![Atom { x, mass: 1.0 }], vec![], &format!("delta({x})"))
    }

    /// A purely atomic probability measure.
    pub fn from_atoms(points: &[(f64, f64)], label: &str) -> Result<Self> {
        let atoms = points.iter().map(|&(x, mass)| Atom { x, mass }).collect();
        Self::new(atoms, vec![], label)
    }

    /// Node count adequate for resolving an edge layer at distance `a` from
    /// zero relative to width `b - a`.
    fn adaptive_nodes(a: f64, width: f64) -> usize {
        if a <= 0.0 {
            return DEFAULT_NODES;
        }
        let eta = 2.0 * (a / width).sqrt();
        let needed = (35.0 / eta).ceil() as usize;
        needed.clamp(DEFAULT_NODES, 4097)
    }

    /// The squared-singular-value law with shape parameter `lambda > 0`:
    /// continuous density `sqrt((b-x)(x-a)) / (2 pi x)` on
    /// `[(1-sqrt(lambda))^2, (1+sqrt(lambda))^2]`, plus an atom of mass
    /// `1 - lambda` at zero when `lambda < 1`.
    pub fn mp(lambda: f64) -> Result<Self> {
        let (a, b) = mp_edges(lambda)?;
        let n = Self::adaptive_nodes(a, b - a);
        Self::mp_with_nodes(lambda, n)
    }

    /// Like [`SpectralMeasure::mp`] with an explicit node count.
    pub fn mp_with_nodes(lambda: f64, n: usize) -> Result<Self> {
        let (a, b) = mp_edges(lambda)?;
        let label = format!("mp({lambda})");
        let seg = square_root_bulk(a, b, n)?;
        let mut atoms = vec![];
        if lambda < 1.0 {
            atoms.push(Atom {
                x: 0.0,
                mass: 1.0 - lambda,
            });
        }
        Self::new(atoms, vec![seg], &label)
    }

    /// The law of the corner-compressed operator: compressing the
    /// `lambda`-shaped law by a projection of trace `t` yields the continuous
    /// density `sqrt((b-x)(x-a)) / (2 pi x)` on
    /// `[(sqrt(lambda)-sqrt(t))^2, (sqrt(lambda)+sqrt(t))^2]` with an atom of
    /// mass `max(1-lambda, 1-t)` at zero. Taking `t = 1` recovers
    /// [`SpectralMeasure::mp`] exactly.
    pub fn compressed_mp(t: f64, lambda: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "compression fraction t must lie in (0, 1], got {t}"
            )));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!("shape parameter must be positive, got {lambda}")));
        }
        let sl = lambda.sqrt();
        let st = t.sqrt();
        let a = (sl - st) * (sl - st);
        let b = (sl + st) * (sl + st);
        let n = Self::adaptive_nodes(a, b - a);
        let seg = square_root_bulk(a, b, n)?;
        let zero_mass = (1.0 - lambda).max(1.0 - t);
        let mut atoms = vec![];
        if zero_mass > 0.0 {
            atoms.push(Atom {
                x: 0.0,
                mass: zero_mass,
            });
        }
        Self::new(atoms, vec![seg], &format!("mp({lambda}) compressed t={t}"))
    }

    /// Measure label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Atoms in increasing position order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Continuous components in increasing position order.
    pub fn segments(&self) -> &[ContinuousSegment] {
        &self.segments
    }

    /// Total mass.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Mass of the atom at zero, if present.
    pub fn zero_mass(&self) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.x == 0.0)
            .map(|a| a.mass)
            .unwrap_or(0.0)
    }

    /// Rank: total mass minus the mass of the kernel atom.
    pub fn rank_r(&self) -> f64 {
        self.total_mass - self.zero_mass()
    }

    /// Supremum of the support (zero for the empty-support edge case).
    pub fn sup_support(&self) -> f64 {
        let seg = self.segments.last().map(|s| s.b).unwrap_or(0.0);
        let atom = self.atoms.last().map(|a| a.x).unwrap_or(0.0);
        seg.max(atom)
    }

    /// Infimum of the support.
    pub fn inf_support(&self) -> f64 {
        let seg = self.segments.first().map(|s| s.a).unwrap_or(f64::INFINITY);
        let atom = self.atoms.first().map(|a| a.x).unwrap_or(f64::INFINITY);
        seg.min(atom)
    }

    /// Whether the support is bounded away from zero.
    pub fn is_invertible(&self) -> bool {
        self.inf_support() > 0.0
    }

    /// `∫ g dmu` (atoms summed exactly, continuous parts by the midpoint
    /// rule).
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let atom_part: f64 = self.atoms.iter().map(|a| a.mass * g(a.x)).sum();
        let cont_part: f64 = self.segments.iter().map(|s| s.integrate(&g)).sum();
        atom_part + cont_part
    }

    /// k-th moment; `moment(0)` is the total mass.
    pub fn moment(&self, k: u32) -> f64 {
        self.integrate(|x| x.powi(k as i32))
    }

    /// Distribution function `mu([0, x])` (right-continuous).
    pub fn cdf(&self, x: f64) -> f64 {
        let atom_part: f64 = self
            .atoms
            .iter()
            .filter(|a| a.x <= x)
            .map(|a| a.mass)
            .sum();
        let cont_part: f64 = self.segments.iter().map(|s| s.cdf_within(x)).sum();
        atom_part + cont_part
    }

    /// Continuous density at `x` (atoms excluded).
    pub fn density_at(&self, x: f64) -> f64 {
        self.segments.iter().map(|s| s.density_at(x)).sum()
    }

    /// Generalized inverse of the distribution function: the smallest `x`
    /// with `cdf(x) >= p`, for `p` strictly between 0 and the total mass.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < self.total_mass) {
            return Err(Error::Domain(format!(
                "quantile level {p} outside (0, {})",
                self.total_mass
            )));
        }
        // Merge atoms and segments in support order.
        #[derive(Clone, Copy)]
        enum Item {
            At(usize),
            Seg(usize),
        }
        let mut items: Vec<(f64, u8, Item)> = vec![];
        for (i, a) in self.atoms.iter().enumerate() {
            items.push((a.x, 0, Item::At(i)));
        }
        for (i, s) in self.segments.iter().enumerate() {
            items.push((s.a, 1, Item::Seg(i)));
        }
        items.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        let mut cum = 0.0;
        for &(_, _, item) in &items {
            match item {
                Item::At(i) => {
                    let a = &self.atoms[i];
                    if cum + a.mass >= p {
                        return Ok(a.x);
                    }
                    cum += a.mass;
                }
                Item::Seg(i) => {
                    let s = &self.segments[i];
                    if cum + s.mass() >= p {
                        let target = p - cum;
                        let mut lo = s.a;
                        let mut hi = s.b;
                        for _ in 0..100 {
                            let mid = 0.5 * (lo + hi);
                            if mid <= lo || mid >= hi {
                                break;
                            }
                            if s.cdf_within(mid) >= target {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        return Ok(0.5 * (lo + hi));
                    }
                    cum += s.mass();
                }
            }
        }
        Ok(self.sup_support())
    }

    /// Partial logarithmic integrals `∫_{[c_i, ∞)} ln x dmu` along a
    /// decreasing positive cutoff sequence, together with the limit value.
    /// The kernel atom never enters any partial, so the limit is the integral
    /// over `(0, ∞)`.
    pub fn log_integral_partials(&self, cutoffs: &[f64]) -> Result<(Vec<f64>, LogValue)> {
        if cutoffs.is_empty() {
            return Err(Error::Domain("cutoff sequence must be non-empty".into()));
        }
        if cutoffs.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::Domain("cutoffs must be positive and finite".into()));
        }
        if cutoffs.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::Domain("cutoffs must decrease strictly".into()));
        }
        let mut partials = Vec::with_capacity(cutoffs.len());
        for &c in cutoffs {
            let atom_part: f64 = self
                .atoms
                .iter()
                .filter(|a| a.x >= c)
                .map(|a| a.mass * a.x.ln())
                .sum();
            let cont_part: f64 = self.segments.iter().map(|s| s.log_partial(c)).sum();
            partials.push(atom_part + cont_part);
        }
        let value = if divergence_rule(&partials) {
            LogValue::MinusInfinity
        } else {
            let atom_part: f64 = self
                .atoms
                .iter()
                .filter(|a| a.x > 0.0)
                .map(|a| a.mass * a.x.ln())
                .sum();
            let cont_part: f64 = self.segments.iter().map(|s| s.log_full()).sum();
            LogValue::Finite(atom_part + cont_part)
        };
        Ok((partials, value))
    }

    /// `∫_{(0, ∞)} ln x dmu` via the cutoff protocol.
    pub fn log_integral(&self, cutoffs: &[f64]) -> Result<LogValue> {
        Ok(self.log_integral_partials(cutoffs)?.1)
    }
}

/// Divergence heuristic for the cutoff protocol: three successive partial
/// values each dropping by more than 1 indicate an integrand whose negative
/// tail keeps accumulating mass.
pub fn divergence_rule(partials: &[f64]) -> bool {
    if partials.len() < 4 {
        return false;
    }
    partials
        .windows(2)
        .rev()
        .take(3)
        .all(|p| p[1] - p[0] < -1.0)
}

/// Support endpoints of the `lambda`-shaped law.
pub fn mp_edges(lambda: f64) -> Result<(f64, f64)> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "shape parameter must be positive, got {lambda}"
        )));
    }
    let s = lambda.sqrt();
    Ok(((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)))
}

/// Continuous component `sqrt((b-x)(x-a)) / (2 pi x)` on `[a, b]`, written in
/// the edge-exponent form. For `a > 0` both edges are square roots and the
/// smooth factor is `1/(2 pi x)`; for `a = 0` the left edge exponent is
/// `-1/2` and the smooth factor is the constant `1/(2 pi)`.
fn square_root_bulk(a: f64, b: f64, n: usize) -> Result<ContinuousSegment> {
    if a == 0.0 {
        let smooth = vec![1.0 / (2.0 * PI); n];
        ContinuousSegment::new(a, b, -0.5, 0.5, smooth)
    } else {
        let smooth = canonical_nodes(a, b, n)
            .iter()
            .map(|&x| 1.0 / (2.0 * PI * x))
            .collect();
        ContinuousSegment::new(a, b, 0.5, 0.5, smooth)
    }
}
