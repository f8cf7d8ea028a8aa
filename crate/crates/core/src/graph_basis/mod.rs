//! The k-neighbor cyclic shift graph over the samples of a frame and the
//! Fourier bases derived from it.
//!
//! Vertex `i` of the graph is sample `i` of a length-`n` frame. Each vertex
//! links forward to the next `k` samples, wrapping around at the frame end,
//! so the adjacency matrix is circulant:
//!
//! ```text
//! A[i][j] = 1  iff  (j - i) mod n  in  {1, ..., k}
//! ```
//!
//! The real-valued transform uses the left singular matrix of `A` (see
//! [`decompose_svd`]). The complex baseline uses its eigenvectors, which for a
//! circulant matrix are the columns of the unitary DFT matrix (see
//! [`decompose_evd`]).

mod file;
mod svd;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use file::{load_basis, read_basis, save_basis, write_basis, BASIS_MAGIC, BASIS_VERSION};

/// Maximum entry deviation of `ΨᵀΨ` (and `ΓᵀΓ`) from the identity.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Maximum entry deviation of `Ψ diag(σ) Γᵀ` from the adjacency matrix.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Topology identifier recorded in basis files: forward-linked cyclic circulant.
pub const TOPOLOGY_FORWARD_CYCLIC: u32 = 1;

/// SHA-256 digest tying spectrograms, masks and checkpoints to one exact basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn of_basis(n: usize, k: usize, psi: &Array2<f64>) -> Self {
        let mut hasher = Sha256::new();
        hasher.update((n as u32).to_le_bytes());
        hasher.update((k as u32).to_le_bytes());
        for v in psi.iter() {
            hasher.update(v.to_le_bytes());
        }
        Fingerprint(hasher.finalize().into())
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", &self.to_hex()[..16])
    }
}

/// The 0-1 adjacency matrix `A_k` of the k-neighbor cyclic shift graph.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    k: usize,
    entries: Array2<f64>,
}

impl AdjacencyMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn first_row(&self) -> Vec<f64> {
        self.entries.row(0).to_vec()
    }

    /// Whether vertex `i` links to vertex `j`.
    pub fn is_linked(&self, i: usize, j: usize) -> bool {
        let d = (j + self.n - i % self.n) % self.n;
        (1..=self.k).contains(&d)
    }
}

/// Builds `A_k` for a frame of `n` samples.
pub fn build_adjacency(n: usize, k: usize) -> Result<AdjacencyMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "graph size n must be at least 2, got {n}"
        )));
    }
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count k must satisfy 1 <= k < n (n = {n}), got {k}"
        )));
    }
    let entries = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = (j + n - i) % n;
        if (1..=k).contains(&d) {
            1.0
        } else {
            0.0
        }
    });
    Ok(AdjacencyMatrix { n, k, entries })
}

/// Real SVD factors `A_k = Ψ diag(σ) Γᵀ` in canonical form.
///
/// `Ψ` is the analysis basis of the real-valued graph Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBasis {
    n: usize,
    k: usize,
    psi: Array2<f64>,
    sigma: Array1<f64>,
    gamma: Array2<f64>,
    fingerprint: Fingerprint,
}

impl GraphBasis {
    /// Assembles a basis from raw factors, checking shapes and orthogonality of `Ψ`.
    ///
    /// The fingerprint is recomputed from the factors.
    pub fn from_parts(
        n: usize,
        k: usize,
        psi: Array2<f64>,
        sigma: Array1<f64>,
        gamma: Array2<f64>,
    ) -> Result<Self> {
        if psi.dim() != (n, n) || gamma.dim() != (n, n) || sigma.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "basis factors must be {n}x{n}, {n}, {n}x{n}; got {:?}, {}, {:?}",
                psi.dim(),
                sigma.len(),
                gamma.dim()
            )));
        }
        let dev = orthogonality_deviation(&psi);
        if !(dev < ORTHOGONALITY_TOL) {
            return Err(Error::Decomposition(format!(
                "left singular matrix is not orthogonal (max deviation {dev:e})"
            )));
        }
        let fingerprint = Fingerprint::of_basis(n, k, &psi);
        Ok(GraphBasis {
            n,
            k,
            psi,
            sigma,
            gamma,
            fingerprint,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Left singular matrix `Ψ`; column `j` is the `j`-th graph frequency atom.
    pub fn psi(&self) -> &Array2<f64> {
        &self.psi
    }

    pub fn sigma(&self) -> &Array1<f64> {
        &self.sigma
    }

    pub fn gamma(&self) -> &Array2<f64> {
        &self.gamma
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// Max entry deviation of `Ψ diag(σ) Γᵀ` from `a`.
    pub fn reconstruction_error(&self, a: &AdjacencyMatrix) -> f64 {
        let scaled = &self.psi * &self.sigma.view().insert_axis(Axis(0));
        let rebuilt = scaled.dot(&self.gamma.t());
        max_abs_diff(&rebuilt, a.entries())
    }
}

/// Max entry deviation of `QᵀQ` from the identity.
pub fn orthogonality_deviation(q: &Array2<f64>) -> f64 {
    let gram = q.t().dot(q);
    gram.indexed_iter()
        .map(|((i, j), &v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sign of a column: the entry of largest magnitude (first one on ties) is made positive.
fn canonical_sign(col: &[f64]) -> f64 {
    let mut best = 0usize;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Computes the canonical real SVD of `A_k`.
///
/// Columns are ordered by non-increasing singular value; columns with bitwise
/// equal singular values are ordered by lexicographic comparison of their
/// sign-canonicalized `Ψ` columns. The factors are verified before they are
/// returned.
pub fn decompose_svd(a: &AdjacencyMatrix) -> Result<GraphBasis> {
    let n = a.n();
    let raw = svd::jacobi_svd(a.entries())?;

    struct Triple {
        sigma: f64,
        psi: Vec<f64>,
        gamma: Vec<f64>,
    }
    let mut triples: Vec<Triple> = (0..n)
        .map(|j| {
            let mut psi = raw.u[j].clone();
            let mut gamma = raw.v[j].clone();
            let s = canonical_sign(&psi);
            if s < 0.0 {
                psi.iter_mut().for_each(|x| *x = -*x);
                gamma.iter_mut().for_each(|x| *x = -*x);
            }
            Triple {
                sigma: raw.sigma[j],
                psi,
                gamma,
            }
        })
        .collect();
    triples.sort_by(|x, y| {
        y.sigma
            .total_cmp(&x.sigma)
            .then_with(|| lexicographic(&x.psi, &y.psi))
    });

    let mut psi = Array2::zeros((n, n));
    let mut gamma = Array2::zeros((n, n));
    let mut sigma = Array1::zeros(n);
    for (j, t) in triples.iter().enumerate() {
        if !(t.sigma >= 0.0) {
            return Err(Error::Decomposition(format!(
                "singular value {j} is {}",
                t.sigma
            )));
        }
        sigma[j] = t.sigma;
        for i in 0..n {
            psi[(i, j)] = t.psi[i];
            gamma[(i, j)] = t.gamma[i];
        }
    }

    let gamma_dev = orthogonality_deviation(&gamma);
    if !(gamma_dev < ORTHOGONALITY_TOL) {
        return Err(Error::Decomposition(format!(
            "right singular matrix is not orthogonal (max deviation {gamma_dev:e})"
        )));
    }
    let basis = GraphBasis::from_parts(n, a.k(), psi, sigma, gamma)?;
    let rec = basis.reconstruction_error(a);
    if !(rec < RECONSTRUCTION_TOL) {
        return Err(Error::Decomposition(format!(
            "factors do not reconstruct the adjacency (max deviation {rec:e})"
        )));
    }
    Ok(basis)
}

/// Eigendecomposition `A_k = U diag(λ) Uᴴ` of the circulant adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGraphBasis {
    n: usize,
    k: usize,
    u: Array2<Complex64>,
    lambda: Array1<Complex64>,
}

impl ComplexGraphBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Unitary eigenvector matrix; column `m` is frequency `m`.
    pub fn u(&self) -> &Array2<Complex64> {
        &self.u
    }

    pub fn lambda(&self) -> &Array1<Complex64> {
        &self.lambda
    }

    /// Max entry deviation of `U diag(λ) Uᴴ` from `a`.
    pub fn reconstruction_error(&self, a: &AdjacencyMatrix) -> f64 {
        let scaled = &self.u * &self.lambda.view().insert_axis(Axis(0));
        let uh = self.u.t().mapv(|z| z.conj());
        let rebuilt = scaled.dot(&uh);
        rebuilt
            .iter()
            .zip(a.entries().iter())
            .map(|(z, &x)| (z - x).norm())
            .fold(0.0, f64::max)
    }
}

/// `exp(-2πi·r/n)` with the phase index reduced mod `n` first.
fn unit_root(r: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * (r % n) as f64 / n as f64)
}

/// Closed-form diagonalization of the circulant `A_k` by the unitary DFT matrix.
///
/// `U[j][m] = exp(-2πi·jm/n)/√n` and `λ_m = Σ_{d=1..k} exp(-2πi·md/n)`.
pub fn decompose_evd(a: &AdjacencyMatrix) -> ComplexGraphBasis {
    let n = a.n();
    let scale = 1.0 / (n as f64).sqrt();
    let u = Array2::from_shape_fn((n, n), |(j, m)| unit_root(j * m, n) * scale);
    let lambda = Array1::from_shape_fn(n, |m| {
        (1..=a.k()).map(|d| unit_root(m * d, n)).sum::<Complex64>()
    });
    ComplexGraphBasis {
        n,
        k: a.k(),
        u,
        lambda,
    }
}

/// Singular values of a circulant matrix from the DFT of its first row,
/// sorted non-increasing.
///
/// Evaluated by direct summation; this is an independent check on
/// [`decompose_svd`] and is not used by the transform path.
pub fn circulant_singular_oracle(a: &AdjacencyMatrix) -> Vec<f64> {
    let n = a.n();
    let row = a.first_row();
    let mut mags: Vec<f64> = (0..n)
        .map(|m| {
            row.iter()
                .enumerate()
                .map(|(j, &c)| unit_root(j * m, n) * c)
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    mags.sort_by(|x, y| y.total_cmp(x));
    mags
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_single_shift() {
        let a = build_adjacency(4, 1).unwrap();
        let ones: Vec<(usize, usize)> = a
            .entries()
            .indexed_iter()
            .filter(|(_, &v)| v == 1.0)
            .map(|(ij, _)| ij)
            .collect();
        assert_eq!(ones, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
    }

    #[test]
    fn adjacency_wraps() {
        let a = build_adjacency(4, 2).unwrap();
        assert_eq!(a.entries().row(0).to_vec(), vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(a.entries().row(3).to_vec(), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn adjacency_row_column_sums_and_circulant() {
        let a = build_adjacency(512, 3).unwrap();
        let e = a.entries();
        for i in 0..512 {
            assert_eq!(e.row(i).sum(), 3.0);
            assert_eq!(e.column(i).sum(), 3.0);
            assert_eq!(e[(i, i)], 0.0);
        }
        for i in 0..512 {
            for j in 0..512 {
                assert_eq!(e[(i, j)], e[((i + 1) % 512, (j + 1) % 512)]);
                assert_eq!(e[(i, j)] == 1.0, a.is_linked(i, j));
            }
        }
    }

    #[test]
    fn adjacency_rejects_bad_parameters() {
        for (n, k) in [(4, 4), (4, 5), (4, 0), (1, 1), (0, 0)] {
            assert!(
                matches!(build_adjacency(n, k), Err(Error::InvalidParameter(_))),
                "n={n} k={k}"
            );
        }
    }

    #[test]
    fn svd_of_permutation_has_unit_singular_values() {
        for n in [2, 5, 16, 33] {
            let basis = decompose_svd(&build_adjacency(n, 1).unwrap()).unwrap();
            for &s in basis.sigma() {
                assert!((s - 1.0).abs() < 1e-12, "n={n} sigma={s}");
            }
        }
    }

    #[test]
    fn svd_invariants_small() {
        for (n, k) in [(4, 2), (8, 3), (9, 4), (16, 5), (31, 7)] {
            let a = build_adjacency(n, k).unwrap();
            let b = decompose_svd(&a).unwrap();
            assert!(orthogonality_deviation(b.psi()) < ORTHOGONALITY_TOL);
            assert!(orthogonality_deviation(b.gamma()) < ORTHOGONALITY_TOL);
            assert!(b.reconstruction_error(&a) < RECONSTRUCTION_TOL);
            for w in b.sigma().as_slice().unwrap().windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(b.sigma().iter().all(|&s| s >= 0.0));
            for j in 0..n {
                let col: Vec<f64> = b.psi().column(j).to_vec();
                let mut best = 0;
                for i in 0..n {
                    if col[i].abs() > col[best].abs() {
                        best = i;
                    }
                }
                assert!(col[best] > 0.0, "n={n} k={k} column {j}");
            }
        }
    }

    #[test]
    fn svd_is_deterministic() {
        let a = build_adjacency(64, 3).unwrap();
        let x = decompose_svd(&a).unwrap();
        let y = decompose_svd(&a).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.fingerprint(), y.fingerprint());
    }

    #[test]
    fn evd_of_single_shift_is_roots_of_unity() {
        let a = build_adjacency(4, 1).unwrap();
        let c = decompose_evd(&a);
        let expected = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for (l, e) in c.lambda().iter().zip(expected) {
            assert!((l - e).norm() < 1e-12, "{l} vs {e}");
        }
        assert!(c.reconstruction_error(&a) < 1e-12);
    }

    #[test]
    fn evd_is_unitary_and_reconstructs() {
        for (n, k) in [(8, 3), (12, 5), (64, 7)] {
            let a = build_adjacency(n, k).unwrap();
            let c = decompose_evd(&a);
            assert!(c.reconstruction_error(&a) < 1e-9);
            let gram = c.u().t().mapv(|z| z.conj()).dot(c.u());
            for ((i, j), z) in gram.indexed_iter() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((z - target).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn oracle_small_cases() {
        let ones = circulant_singular_oracle(&build_adjacency(16, 1).unwrap());
        assert!(ones.iter().all(|&s| (s - 1.0).abs() < 1e-12));

        let two = circulant_singular_oracle(&build_adjacency(4, 2).unwrap());
        let expected = [2.0, 2f64.sqrt(), 2f64.sqrt(), 0.0];
        for (s, e) in two.iter().zip(expected) {
            assert!((s - e).abs() < 1e-12, "{two:?}");
        }
    }
}
