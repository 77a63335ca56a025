//! Dense kernels for the product-of-rotations ensemble: Haar sampling,
//! QR-based growth accumulation, corner compression, and rank probes.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::ChaCha8Rng;

use super::rng::fill_gaussian;

/// How often the orthogonal frame is checked for drift, in steps.
const REORTH_INTERVAL: usize = 128;
/// Maximum tolerated departure of `QᵀQ` from the identity before the frame
/// is re-factored.
const REORTH_TOL: f64 = 1e-9;

/// A Haar-distributed real orthogonal matrix: QR of an iid Gaussian matrix
/// with the sign convention that makes the diagonal of `R` positive.
pub(crate) fn haar_orthogonal_from(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut data = vec![0.0; n * n];
    fill_gaussian(rng, &mut data);
    let g = DMatrix::from_vec(n, n, data);
    let (mut q, r) = g.qr().unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Scales row `i` of `m` by `d[i]`, i.e. forms `diag(d) · m` in place.
pub(crate) fn scale_rows(m: &mut DMatrix<f64>, d: &[f64]) {
    for (i, &di) in d.iter().enumerate() {
        m.row_mut(i).scale_mut(di);
    }
}

/// Scales column `j` of `m` by `d[j]`, i.e. forms `m · diag(d)` in place.
pub(crate) fn scale_cols(m: &mut DMatrix<f64>, d: &[f64]) {
    for (j, &dj) in d.iter().enumerate() {
        m.column_mut(j).scale_mut(dj);
    }
}

/// Largest absolute entry of `QᵀQ − I`.
fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let gram = q.transpose() * q;
    let n = gram.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Adds `ln |r_ii|` of the upper-triangular factor to the running log-volume
/// accumulators, flooring at the smallest positive double so exact zeros
/// contribute a large negative value instead of `-inf`.
fn accumulate_diagonal(r: &DMatrix<f64>, accum: &mut [f64]) {
    for (i, slot) in accum.iter_mut().enumerate() {
        *slot += r[(i, i)].abs().max(f64::MIN_POSITIVE).ln();
    }
}

/// Runs `steps` iterations of the QR growth recursion for one trial of the
/// product ensemble and returns the per-direction growth exponents, sorted
/// in decreasing order.
///
/// Step `idx` applies the factor `U_{order(idx)} · diag(d_sqrt)` to the
/// current frame, where each `U_k` is drawn from its own fixed stream
/// address; `rng_for_step` must hand back the generator positioned at the
/// address of step `k`. Growth is read off the diagonal of the QR
/// factorization after each step, and the frame is re-orthonormalized (with
/// exact bookkeeping of the correction's diagonal) whenever rounding drift
/// accumulates.
pub(crate) fn spectrum_trial(
    n: usize,
    steps: usize,
    d_for_step: &mut dyn FnMut(usize) -> Vec<f64>,
    rng_for_step: &mut dyn FnMut(usize) -> ChaCha8Rng,
    order: Option<&[usize]>,
) -> Vec<f64> {
    let mut frame = DMatrix::<f64>::identity(n, n);
    let mut accum = vec![0.0; n];
    for idx in 0..steps {
        let step = order.map_or(idx, |o| o[idx]);
        let mut rng = rng_for_step(step);
        let rotation = haar_orthogonal_from(&mut rng, n);
        scale_rows(&mut frame, &d_for_step(step));
        let product = &rotation * &frame;
        let (q, r) = product.qr().unpack();
        accumulate_diagonal(&r, &mut accum);
        frame = q;
        if (idx + 1) % REORTH_INTERVAL == 0 && orthonormality_defect(&frame) > REORTH_TOL {
            let (q2, r2) = frame.qr().unpack();
            accumulate_diagonal(&r2, &mut accum);
            frame = q2;
        }
    }
    let inv = 1.0 / steps as f64;
    let mut exps: Vec<f64> = accum.iter().map(|a| a * inv).collect();
    exps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    exps
}

/// Growth rate of the volume of a random `k`-frame under the same product,
/// normalized per step and per matrix dimension: the thin-QR analogue of
/// `spectrum_trial` started from `k` Haar-random orthonormal columns.
pub(crate) fn projected_growth_trial(
    n: usize,
    k: usize,
    steps: usize,
    d_for_step: &mut dyn FnMut(usize) -> Vec<f64>,
    rng_for_step: &mut dyn FnMut(usize) -> ChaCha8Rng,
    frame_rng: &mut ChaCha8Rng,
) -> f64 {
    let full = haar_orthogonal_from(frame_rng, n);
    let mut frame = full.columns(0, k).into_owned();
    let mut total = 0.0;
    for step in 0..steps {
        let mut rng = rng_for_step(step);
        let rotation = haar_orthogonal_from(&mut rng, n);
        let d = d_for_step(step);
        for (i, &di) in d.iter().enumerate() {
            frame.row_mut(i).scale_mut(di);
        }
        let product = &rotation * &frame;
        let (q, r) = product.qr().unpack();
        for i in 0..k {
            total += r[(i, i)].abs().max(f64::MIN_POSITIVE).ln();
        }
        frame = q;
    }
    total / (steps as f64 * n as f64)
}

/// Eigenvalues (ascending) of the leading `k × k` corner of `U diag(q) Uᵀ`
/// for a Haar rotation `U` drawn from `rng`.
pub(crate) fn compression_trial(rng: &mut ChaCha8Rng, quantiles: &[f64], k: usize) -> Vec<f64> {
    let n = quantiles.len();
    let u = haar_orthogonal_from(rng, n);
    let mut scaled = u.clone();
    scale_cols(&mut scaled, quantiles);
    let conjugated = scaled * u.transpose();
    let corner = conjugated.view((0, 0), (k, k)).into_owned();
    let sym = SymmetricEigen::new(corner);
    let mut eigs: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Numerical rank of the first `k` columns of `U · diag(d_sqrt)`: the count
/// of singular values above a relative threshold.
pub(crate) fn projected_rank_trial(rng: &mut ChaCha8Rng, d_sqrt: &[f64], k: usize) -> usize {
    let n = d_sqrt.len();
    let u = haar_orthogonal_from(rng, n);
    let mut x = u;
    scale_cols(&mut x, d_sqrt);
    let block = x.columns(0, k).into_owned();
    let svd = block.svd(false, false);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    if sigma_max == 0.0 {
        return 0;
    }
    let cut = 1e-8 * sigma_max;
    svd.singular_values.iter().filter(|&&s| s > cut).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt::rng::{rng_at, PURPOSE_HAAR_STEP};

    #[test]
    fn haar_matrix_is_orthogonal() {
        let mut rng = rng_at(11, PURPOSE_HAAR_STEP, 0, 0);
        let q = haar_orthogonal_from(&mut rng, 24);
        assert!(orthonormality_defect(&q) < 1e-12);
    }

    #[test]
    fn scalar_product_growth_is_exact() {
        // With d = c·1 the product is c^steps times an orthogonal matrix, so
        // every exponent equals ln c.
        let c: f64 = 1.7;
        let exps = spectrum_trial(
            6,
            40,
            &mut |_| vec![c; 6],
            &mut |step| rng_at(3, PURPOSE_HAAR_STEP, 0, 64 * step as u128),
            None,
        );
        for &e in &exps {
            assert!((e - c.ln()).abs() < 1e-12, "exponent {e} vs {}", c.ln());
        }
    }

    #[test]
    fn compression_of_identity_spectrum() {
        let mut rng = rng_at(5, PURPOSE_HAAR_STEP, 0, 0);
        let eigs = compression_trial(&mut rng, &[1.0; 12], 5);
        for &e in &eigs {
            assert!((e - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_of_scaled_columns() {
        let mut d = vec![0.0; 10];
        for slot in d.iter_mut().take(4) {
            *slot = 1.0;
        }
        let mut rng = rng_at(9, PURPOSE_HAAR_STEP, 0, 0);
        assert_eq!(projected_rank_trial(&mut rng, &d, 7), 4);
        let mut rng = rng_at(9, PURPOSE_HAAR_STEP, 0, 0);
        assert_eq!(projected_rank_trial(&mut rng, &d, 3), 3);
    }
}
