//! Independent reference computations used to freeze expected values.
//!
//! Everything in this module is deliberately low-tech and shares no code with
//! the library under test: composite Simpson rule with explicit edge
//! substitutions, plain interval bisection, and closed-form algebra for the
//! Marchenko-Pastur family. Production code uses cosine-series quadrature and
//! bracketed root-finding; agreement between the two routes is the point of
//! the test suite.

use std::f64::consts::PI;

/// Composite Simpson rule on [a, b] with n (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2) && n >= 2);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Plain bisection: assumes f(lo) and f(hi) have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Support endpoints of the Marchenko-Pastur law with rate `l`.
pub fn mp_edges(l: f64) -> (f64, f64) {
    let s = l.sqrt();
    ((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s))
}

/// Support endpoints of the compressed law (parameters t, l).
pub fn cmp_edges(t: f64, l: f64) -> (f64, f64) {
    let (st, sl) = (t.sqrt(), l.sqrt());
    ((st - sl) * (st - sl), (st + sl) * (st + sl))
}

/// Continuous Marchenko-Pastur density (zero off the bulk).
pub fn mp_density(l: f64, x: f64) -> f64 {
    let (a, b) = mp_edges(l);
    if x <= a || x >= b {
        return 0.0;
    }
    ((x - a) * (b - x)).sqrt() / (2.0 * PI * x)
}

/// Continuous part of the compressed density p_{t,l}.
pub fn cmp_density(t: f64, l: f64, x: f64) -> f64 {
    let (a, b) = cmp_edges(t, l);
    if x <= a || x >= b {
        return 0.0;
    }
    ((x - a) * (b - x)).sqrt() / (2.0 * PI * x)
}

/// ∫ g(x) p_l(x) dx over the continuous bulk, by Simpson with square-root
/// edge substitutions. `g` must be smooth on the closed bulk. For l = 1 the
/// 1/x factor meets the left edge at zero, so that half uses the explicit
/// reduced integrand (4/π)·sqrt(1-u²)·g(4u²) instead of the raw density.
pub fn mp_integral<G: Fn(f64) -> f64 + Copy>(l: f64, g: G, n: usize) -> f64 {
    let (a, b) = mp_edges(l);
    let w = b - a;
    let half = (0.5f64).sqrt();
    let left = if l == 1.0 {
        simpson(|u| (4.0 / PI) * (1.0 - u * u).sqrt() * g(4.0 * u * u), 0.0, half, n)
    } else {
        // x = a + w u^2: density*dx/du = sqrt(x-a)sqrt(b-x)/(2πx) * 2wu is
        // smooth and vanishes at u = 0.
        simpson(
            |u| {
                let x = a + w * u * u;
                if u == 0.0 {
                    return 0.0;
                }
                mp_density(l, x) * g(x) * 2.0 * w * u
            },
            0.0,
            half,
            n,
        )
    };
    let right = simpson(
        |v| {
            let x = b - w * v * v;
            if v == 0.0 {
                return 0.0;
            }
            mp_density(l, x) * g(x) * 2.0 * w * v
        },
        0.0,
        half,
        n,
    );
    left + right
}

/// Same construction for the compressed law; the degenerate t = l case
/// (left edge at zero) mirrors the l = 1 branch above.
pub fn cmp_integral<G: Fn(f64) -> f64 + Copy>(t: f64, l: f64, g: G, n: usize) -> f64 {
    let (a, b) = cmp_edges(t, l);
    let w = b - a;
    let half = (0.5f64).sqrt();
    let left = if a == 0.0 {
        // density reduces to sqrt(b-x)/(2π sqrt(x)); x = b u^2 gives
        // (b/π) sqrt(1-u^2) g(b u^2).
        simpson(|u| (b / PI) * (1.0 - u * u).sqrt() * g(b * u * u), 0.0, half, n)
    } else {
        simpson(
            |u| {
                let x = a + w * u * u;
                if u == 0.0 {
                    return 0.0;
                }
                cmp_density(t, l, x) * g(x) * 2.0 * w * u
            },
            0.0,
            half,
            n,
        )
    };
    let right = simpson(
        |v| {
            let x = b - w * v * v;
            if v == 0.0 {
                return 0.0;
            }
            cmp_density(t, l, x) * g(x) * 2.0 * w * v
        },
        0.0,
        half,
        n,
    );
    left + right
}

/// ∫ log x p_l(x) dx by quadrature. The log singularity at the l = 1 left
/// edge is tamed by the extra substitution u = s², which turns the integrand
/// into s·log s behaviour with an explicit zero limit at s = 0.
pub fn mp_log_integral_quad(l: f64) -> f64 {
    let n = 1 << 20;
    if l == 1.0 {
        let half_u = (0.5f64).sqrt(); // split point x = 2 in u = sqrt(x)/2
        let left = simpson(
            |s| {
                if s == 0.0 {
                    return 0.0;
                }
                let u = s * s;
                (4.0 / PI) * (1.0 - u * u).sqrt() * (4.0 * u * u).ln() * 2.0 * s
            },
            0.0,
            half_u.sqrt(),
            n,
        );
        let right = simpson(
            |v| {
                let x = 4.0 - 4.0 * v * v;
                if v == 0.0 {
                    return 0.0;
                }
                mp_density(1.0, x) * x.ln() * 8.0 * v
            },
            0.0,
            half_u,
            n,
        );
        left + right
    } else {
        mp_integral(l, |x| x.ln(), n)
    }
}

/// Closed form of ∫ log x p_l(x) dx for l ≥ 1.
pub fn mp_log_integral_closed(l: f64) -> f64 {
    let xlnx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    xlnx(l) - xlnx(l - 1.0) - 1.0
}

/// psi of the Marchenko-Pastur law from the quadratic
/// z w² + ((1+l)z − 1) w + l z = 0, branch with psi(0) = 0.
pub fn mp_psi_closed(l: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let a = z;
    let b = (1.0 + l) * z - 1.0;
    let c = l * z;
    let disc = (b * b - 4.0 * a * c).sqrt();
    2.0 * c / (-b + disc)
}

/// Cauchy transform of the Marchenko-Pastur law for z < 0.
pub fn mp_g_closed(l: f64, z: f64) -> f64 {
    (z + 1.0 - l + ((z - 1.0 - l) * (z - 1.0 - l) - 4.0 * l).sqrt()) / (2.0 * z)
}

/// Functional inverse of psi for the Marchenko-Pastur law.
pub fn mp_psi_inv_closed(l: f64, w: f64) -> f64 {
    w / ((1.0 + w) * (l + w))
}

/// S-transform of the Marchenko-Pastur law.
pub fn mp_s_closed(l: f64, w: f64) -> f64 {
    1.0 / (l + w)
}

/// Marginal exponent of the Marchenko-Pastur law, t < min(1, l).
pub fn mp_marginal_closed(l: f64, t: f64) -> f64 {
    0.5 * (l - t).ln()
}

/// Integrated exponent of the Marchenko-Pastur law,
/// F(t) = ½ [ l·log l − (l−t)·log(l−t) − t ] for t ≤ min(1, l).
pub fn mp_integrated_closed(l: f64, t: f64) -> f64 {
    let xlnx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    0.5 * (xlnx(l) - xlnx(l - t) - t)
}

/// Piecewise closed form of the exponent distribution for the
/// Marchenko-Pastur family.
pub fn mp_exponent_cdf_closed(l: f64, x: f64) -> f64 {
    let e2x = (2.0 * x).exp();
    if l >= 1.0 {
        (e2x + 1.0 - l).clamp(0.0, 1.0)
    } else if x >= 0.0 {
        1.0
    } else if x >= 0.5 * l.ln() {
        l
    } else {
        e2x
    }
}

/// Inverse of psi by plain bisection against the closed-form psi; shares no
/// code with the production bracketing root-finder.
pub fn mp_psi_inv_bisect(l: f64, w: f64) -> f64 {
    let mut lo = -1.0f64;
    while mp_psi_closed(l, lo) > w {
        lo *= 2.0;
        assert!(lo > -1e300, "no bracket for w = {w}");
    }
    bisect(|z| mp_psi_closed(l, z) - w, lo, 0.0, 200)
}

/// CDF of the continuous Marchenko-Pastur bulk up to x.
pub fn mp_cdf_quad(l: f64, x: f64) -> f64 {
    let (a, b) = mp_edges(l);
    let atom = (1.0 - l).max(0.0);
    if x <= a {
        return if x >= 0.0 { atom } else { 0.0 };
    }
    if x >= b {
        return 1.0;
    }
    // integrate density from a to x with a left-edge substitution
    let w = b - a;
    let u_hi = ((x - a) / w).sqrt();
    let bulk = if l == 1.0 {
        simpson(|u| (4.0 / PI) * (1.0 - u * u).sqrt(), 0.0, u_hi, 1 << 16)
    } else {
        simpson(
            |u| {
                let xx = a + w * u * u;
                if u == 0.0 {
                    return 0.0;
                }
                mp_density(l, xx) * 2.0 * w * u
            },
            0.0,
            u_hi,
            1 << 16,
        )
    };
    atom + bulk
}

/// CDF of the compressed law p_{t,l} (full-space normalization, atom at 0
/// of mass max{1−l, 1−t} included).
pub fn cmp_cdf_quad(t: f64, l: f64, x: f64) -> f64 {
    let (a, b) = cmp_edges(t, l);
    let atom = (1.0 - l).max(1.0 - t);
    if x <= a {
        return if x >= 0.0 { atom } else { 0.0 };
    }
    if x >= b {
        return 1.0;
    }
    let w = b - a;
    let u_hi = ((x - a) / w).sqrt();
    let bulk = if a == 0.0 {
        simpson(|u| (b / PI) * (1.0 - u * u).sqrt(), 0.0, u_hi, 1 << 16)
    } else {
        simpson(
            |u| {
                let xx = a + w * u * u;
                if u == 0.0 {
                    return 0.0;
                }
                cmp_density(t, l, xx) * 2.0 * w * u
            },
            0.0,
            u_hi,
            1 << 16,
        )
    };
    atom + bulk
}

/// Left side of the singular-value growth integral equation,
/// g(H) = ∫ s / (H x² + (1−H) s) dμ(s), for the Marchenko-Pastur law.
/// The atom at zero (l < 1) contributes nothing to the integrand.
pub fn newman_g_quad(l: f64, x: f64, h: f64) -> f64 {
    mp_integral(l, |s| s / (h * x * x + (1.0 - h) * s), 1 << 14)
}

/// Solve the integral equation by scanning for the interior sign change of
/// g(H) − 1 and bisecting; returns 0 or 1 when no interior root exists.
pub fn newman_solve_quad(l: f64, x: f64) -> f64 {
    let target = |h: f64| newman_g_quad(l, x, h) - 1.0;
    // Scan away from the spurious H = 0 root of the atomless equation.
    let grid: Vec<f64> = (1..=999).map(|i| i as f64 / 1000.0).collect();
    let mut prev_h = grid[0];
    let mut prev_v = target(prev_h);
    for &h in &grid[1..] {
        let v = target(h);
        if (v > 0.0) != (prev_v > 0.0) {
            return bisect(target, prev_h, h, 120);
        }
        prev_h = h;
        prev_v = v;
    }
    // No interior crossing. g < 1 everywhere means every singular direction
    // grows slower than x (x above the exponent range): H = 1. g > 1
    // everywhere means x is below the range: H = 0.
    if prev_v < 0.0 {
        1.0
    } else {
        0.0
    }
}
