//! One-sided (Hestenes) Jacobi SVD for small dense square matrices.
//!
//! Columns of `G = A V` are rotated pairwise until every pair is orthogonal
//! to working precision; then `σ_i = ‖g_i‖`, `u_i = g_i / σ_i`, and
//! `A = U diag(σ) Vᵀ`. Plain cyclic sweeps keep the result deterministic.

use ndarray::Array2;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Unsorted, unnormalized factors: columns of `u` and `v` are stored contiguously.
pub(super) struct RawSvd {
    pub u: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}

fn dot3(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        xx += a * a;
        yy += b * b;
        xy += a * b;
    }
    (xx, yy, xy)
}

fn pair_mut(cols: &mut [Vec<f64>], i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(i < j);
    let (lo, hi) = cols.split_at_mut(j);
    (&mut lo[i], &mut hi[0])
}

pub(super) fn jacobi_svd(a: &Array2<f64>) -> Result<RawSvd> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "square matrix required, got {:?}",
            a.dim()
        )));
    }
    let mut g: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = n as f64 * f64::EPSILON;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (alpha, beta, gamma) = dot3(&g[i], &g[j]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (gi, gj) = pair_mut(&mut g, i, j);
                rotate(gi, gj, c, s);
                let (vi, vj) = pair_mut(&mut v, i, j);
                rotate(vi, vj, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Decomposition(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let sigma_raw: Vec<f64> = g
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let sigma_max = sigma_raw.iter().copied().fold(0.0, f64::max);
    let zero_cut = sigma_max * tol;

    let mut u: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for (col, &s) in g.into_iter().zip(&sigma_raw) {
        if s > zero_cut {
            u.push(Some(col.into_iter().map(|x| x / s).collect()));
            sigma.push(s);
        } else {
            u.push(None);
            sigma.push(0.0);
        }
    }
    let u = complete_orthonormal(u, n)?;
    Ok(RawSvd { u, sigma, v })
}

/// Fills missing columns (null-space directions) with an orthonormal completion.
///
/// Each gap takes the standard basis vector with the largest residual after
/// two rounds of Gram-Schmidt against all columns chosen so far.
fn complete_orthonormal(cols: Vec<Option<Vec<f64>>>, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut known: Vec<Vec<f64>> = cols.iter().flatten().cloned().collect();
    let mut out = Vec::with_capacity(n);
    for col in cols {
        if let Some(c) = col {
            out.push(c);
            continue;
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..n {
            let mut r = vec![0.0; n];
            r[e] = 1.0;
            for _ in 0..2 {
                for q in &known {
                    let p: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
                    r.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("n >= 1");
        if !(norm > 0.5 / (n as f64).sqrt()) {
            return Err(Error::Decomposition(
                "could not complete the left singular basis".into(),
            ));
        }
        let r: Vec<f64> = r.into_iter().map(|x| x / norm).collect();
        known.push(r.clone());
        out.push(r);
    }
    Ok(out)
}
