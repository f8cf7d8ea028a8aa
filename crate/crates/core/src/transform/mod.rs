//! Frame-wise transforms: the real graph Fourier transform defined by the
//! SVD basis, and the complex GFT-EVD and STFT baselines.
//!
//! Rows of every spectrogram are frames and columns are frequency bins. All
//! three transforms are orthonormal (unitary for the complex ones), so frame
//! energy is preserved and the inverse is the adjoint.

mod complex;
mod export;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::framing::{frame_signal, overlap_add, FrameMatrix, FramingConfig};
use crate::graph_basis::{Fingerprint, GraphBasis};

pub use complex::{
    gft_evd_forward, gft_evd_inverse, stft_forward, stft_full_magnitude, stft_inverse,
    ComplexSpectrogram, SpectrumKind, IMAG_RESIDUAL_TOL,
};
pub use export::{write_complex_csv, write_graph_csv};

/// Per-frame real graph-frequency coefficients (`F × N`) bound to the basis that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGraphSpectrogram {
    pub coeffs: Array2<f64>,
    pub basis_fingerprint: Fingerprint,
    pub framing: FramingConfig,
    pub original_len: usize,
}

impl TimeGraphSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Same binding and framing, new coefficients of the same shape.
    pub fn with_coeffs(&self, coeffs: Array2<f64>) -> Result<Self> {
        if coeffs.dim() != self.coeffs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient shape {:?} does not match {:?}",
                coeffs.dim(),
                self.coeffs.dim()
            )));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite graph coefficient".into()));
        }
        Ok(TimeGraphSpectrogram {
            coeffs,
            ..self.clone()
        })
    }

    pub fn check_basis(&self, basis: &GraphBasis) -> Result<()> {
        if self.basis_fingerprint != basis.fingerprint() {
            return Err(Error::FingerprintMismatch {
                context: "spectrogram vs graph basis",
                expected: basis.fingerprint().to_hex(),
                found: self.basis_fingerprint.to_hex(),
            });
        }
        Ok(())
    }
}

fn check_transform_len(frames: &FrameMatrix, n: usize) -> Result<()> {
    if frames.config.transform_len != n || frames.frames.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "frames of length {} cannot use a basis of size {n}",
            frames.frames.ncols()
        )));
    }
    Ok(())
}

/// `Y_G = Ψ y` for every frame `y`.
pub fn gft_svd_forward(frames: &FrameMatrix, basis: &GraphBasis) -> Result<TimeGraphSpectrogram> {
    check_transform_len(frames, basis.n())?;
    // Row form: (Ψ y)ᵀ = yᵀ Ψᵀ.
    let coeffs = frames.frames.dot(&basis.psi().t());
    Ok(TimeGraphSpectrogram {
        coeffs,
        basis_fingerprint: basis.fingerprint(),
        framing: frames.config,
        original_len: frames.original_len,
    })
}

/// `y = Ψᵀ Y_G` for every coefficient row; `Ψ` is orthogonal so `Ψ⁻¹ = Ψᵀ`.
pub fn gft_svd_inverse(spec: &TimeGraphSpectrogram, basis: &GraphBasis) -> Result<FrameMatrix> {
    spec.check_basis(basis)?;
    if spec.num_bins() != basis.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} bins cannot use a basis of size {}",
            spec.num_bins(),
            basis.n()
        )));
    }
    Ok(FrameMatrix {
        frames: spec.coeffs.dot(basis.psi()),
        config: spec.framing,
        original_len: spec.original_len,
        pad_pre: spec.framing.window_len,
    })
}

/// Frames `x` and applies the real graph Fourier transform.
pub fn analyze(x: &[f64], cfg: &FramingConfig, basis: &GraphBasis) -> Result<TimeGraphSpectrogram> {
    if cfg.transform_len != basis.n() {
        return Err(Error::DimensionMismatch(format!(
            "transform length {} does not match basis size {}",
            cfg.transform_len,
            basis.n()
        )));
    }
    gft_svd_forward(&frame_signal(x, cfg)?, basis)
}

/// Inverse transform followed by overlap-add.
pub fn synthesize(spec: &TimeGraphSpectrogram, basis: &GraphBasis) -> Result<Vec<f64>> {
    overlap_add(&gft_svd_inverse(spec, basis)?)
}

/// Largest `|v[j] − v[N−j]|` over `j = 1..N−1`: zero for a spectrum with mirror symmetry.
pub fn mirror_asymmetry(v: &[f64]) -> f64 {
    let n = v.len();
    (1..n).map(|j| (v[j] - v[n - j]).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_basis::{build_adjacency, decompose_svd};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(n: usize, k: usize) -> GraphBasis {
        decompose_svd(&build_adjacency(n, k).unwrap()).unwrap()
    }

    fn small_cfg() -> FramingConfig {
        FramingConfig::new(16000, 48, 12, 64, Default::default()).unwrap()
    }

    fn random(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn forward_preserves_frame_energy() {
        let b = basis(64, 3);
        let fm = frame_signal(&random(700, 1), &small_cfg()).unwrap();
        let spec = gft_svd_forward(&fm, &b).unwrap();
        for (f, c) in fm.frames.rows().into_iter().zip(spec.coeffs.rows()) {
            let ef = f.dot(&f).sqrt();
            let ec = c.dot(&c).sqrt();
            assert!((ef - ec).abs() < 1e-10);
        }
    }

    #[test]
    fn basis_atoms_map_to_unit_vectors() {
        let b = basis(64, 5);
        let cfg = small_cfg();
        let len = 40;
        let count = cfg.frame_count(len);
        let frames = Array2::from_shape_fn((count, 64), |(m, i)| b.psi()[(m % 64, i)]);
        let fm = FrameMatrix {
            frames,
            config: cfg,
            original_len: len,
            pad_pre: 48,
        };
        let spec = gft_svd_forward(&fm, &b).unwrap();
        for ((m, j), &v) in spec.coeffs.indexed_iter() {
            let target = if j == m % 64 { 1.0 } else { 0.0 };
            assert!((v - target).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_of_forward_is_identity() {
        let b = basis(64, 3);
        let fm = frame_signal(&random(1000, 2), &small_cfg()).unwrap();
        let back = gft_svd_inverse(&gft_svd_forward(&fm, &b).unwrap(), &b).unwrap();
        let err = (&back.frames - &fm.frames)
            .mapv(f64::abs)
            .fold(0.0f64, |a, &b| a.max(b));
        assert!(err < 1e-10);
    }

    #[test]
    fn zero_in_zero_out() {
        let b = basis(64, 3);
        let spec = analyze(&vec![0.0; 500], &small_cfg(), &b).unwrap();
        assert!(spec.coeffs.iter().all(|&v| v == 0.0));
        let y = synthesize(&spec, &b).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inverse_rejects_foreign_basis() {
        let b3 = basis(64, 3);
        let b5 = basis(64, 5);
        let spec = analyze(&random(300, 3), &small_cfg(), &b3).unwrap();
        assert!(matches!(
            gft_svd_inverse(&spec, &b5),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let b = basis(32, 3);
        let fm = frame_signal(&random(300, 3), &small_cfg()).unwrap();
        assert!(matches!(
            gft_svd_forward(&fm, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn synthesize_is_linear() {
        let b = basis(64, 3);
        let spec = analyze(&random(900, 5), &small_cfg(), &b).unwrap();
        let y = synthesize(&spec, &b).unwrap();
        let y3 = synthesize(
            &spec.with_coeffs(spec.coeffs.mapv(|v| 3.0 * v)).unwrap(),
            &b,
        )
        .unwrap();
        assert!(y.iter().zip(&y3).all(|(a, b)| (3.0 * a - b).abs() < 1e-10));
    }

    #[test]
    fn mirror_asymmetry_cases() {
        assert_eq!(mirror_asymmetry(&[5.0, 1.0, 2.0, 1.0]), 0.0);
        assert_eq!(mirror_asymmetry(&[0.0, 1.0, 2.0, 3.5]), 2.5);
        assert_eq!(mirror_asymmetry(&[]), 0.0);
    }
}
