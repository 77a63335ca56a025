//! Quadrature primitives: Gauss–Legendre rules, graded panel layouts, and
//! Clenshaw evaluation of cosine series.
//!
//! The measure representation stores each continuous component as a cosine
//! series in the angle variable `theta`, where `x = a + (b-a) cos^2(theta/2)`.
//! Everything downstream (moments, resolvents, log functionals) is an
//! integral of a smooth factor against that series, evaluated either by a
//! midpoint rule in `theta` (spectrally accurate for periodic smooth
//! integrands) or by Gauss–Legendre panels graded toward an integrable
//! singularity.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre recurrence; accuracy is at
/// machine precision for the small n used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = if n == 1 {
                1.0
            } else {
                n as f64 * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn cached(cell: &'static OnceLock<(Vec<f64>, Vec<f64>)>, n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    cell.get_or_init(|| gauss_legendre(n))
}

/// Cached 16-point Gauss–Legendre rule.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    cached(&CELL, 16)
}

/// Cached 32-point Gauss–Legendre rule.
pub fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    cached(&CELL, 32)
}

/// Integrates `f` over `[a, b]` with the given rule.
pub fn integrate_rule<F: FnMut(f64) -> f64>(
    rule: &(Vec<f64>, Vec<f64>),
    a: f64,
    b: f64,
    mut f: F,
) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Integrates `f` over consecutive panels given by `breakpoints`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    rule: &(Vec<f64>, Vec<f64>),
    breakpoints: &[f64],
    mut f: F,
) -> f64 {
    let mut acc = 0.0;
    for pair in breakpoints.windows(2) {
        acc += integrate_rule(rule, pair[0], pair[1], &mut f);
    }
    acc
}

/// Panel breakpoints on `[lo, hi]` graded geometrically toward `lo`: widths
/// `scale, scale, 2*scale, 4*scale, ...` until `hi` is reached. Suited to
/// integrands with a logarithmic or algebraic singularity at `lo`.
pub fn graded_toward_lo(lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    assert!(hi > lo);
    let mut bp = vec![lo];
    if scale <= 0.0 || scale >= hi - lo {
        bp.push(hi);
        return bp;
    }
    let mut step = scale;
    let mut pos = lo + step;
    while pos < hi - 0.5 * step {
        bp.push(pos);
        step *= 2.0;
        pos += step;
    }
    bp.push(hi);
    bp
}

/// Mirror of [`graded_toward_lo`]: panels graded toward `hi`.
pub fn graded_toward_hi(lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    let mut bp = graded_toward_lo(0.0, hi - lo, scale);
    // Reflect: breakpoint t maps to hi - t, then reverse into ascending order.
    let mut out: Vec<f64> = bp.drain(..).map(|t| hi - t).collect();
    out.reverse();
    out
}

/// Evaluates `a_0 + sum_{k>=1} a_k cos(k theta)` by the Clenshaw recurrence.
pub fn clenshaw_cos(coeffs: &[f64], theta: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let y = theta.cos();
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &a in coeffs.iter().skip(1).rev() {
        let b0 = a + 2.0 * y * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + y * b1 - b2
}
