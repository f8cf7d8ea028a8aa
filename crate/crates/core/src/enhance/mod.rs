//! Mask-based enhancement in the real graph-frequency domain.
//!
//! The noisy waveform is analyzed into `Y_G`, a real mask `M` is applied
//! elementwise (`Ŝ_G = M ⊙ Y_G`), and the estimate is synthesized back. Masks
//! come from the clean signal (oracle ratio mask) or from a trainable
//! per-frame estimator.

mod checkpoint;
mod loss;
mod mlp;
mod train;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::framing::{frame_signal, overlap_add, FramingConfig};
use crate::graph_basis::{ComplexGraphBasis, GraphBasis};
use crate::transform::{
    analyze, gft_evd_forward, gft_evd_inverse, stft_forward, stft_inverse, synthesize,
    ComplexSpectrogram, TimeGraphSpectrogram,
};

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use loss::si_sdr_value_and_grad;
pub use mlp::{mlp_forward, normalized_features, Layer, MlpParams};
pub use train::{
    chain_loss_and_grad, train, train_step, AdamState, TrainConfig, TrainLog, Utterance,
};

/// Default symmetric clip bound for ratio masks.
pub const DEFAULT_CLIP: f64 = 2.0;
/// Default regularizer in the ratio-mask denominator.
pub const DEFAULT_EPS: f64 = 1e-8;

/// A real multiplicative mask, `F × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub values: Array2<f64>,
    /// `None` means unbounded.
    pub clip_bound: Option<f64>,
}

impl Mask {
    pub fn new(values: Array2<f64>, clip_bound: Option<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite mask entry".into()));
        }
        if let Some(c) = clip_bound {
            if !(c > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "mask clip bound must be positive, got {c}"
                )));
            }
            if values.iter().any(|v| v.abs() > c) {
                return Err(Error::InvalidParameter(format!(
                    "mask entry exceeds clip bound {c}"
                )));
            }
        }
        Ok(Mask { values, clip_bound })
    }

    pub fn constant(frames: usize, bins: usize, value: f64) -> Self {
        Mask {
            values: Array2::from_elem((frames, bins), value),
            clip_bound: None,
        }
    }
}

fn check_pair(a: &TimeGraphSpectrogram, b: &TimeGraphSpectrogram) -> Result<()> {
    if a.coeffs.dim() != b.coeffs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "spectrogram shapes {:?} and {:?} differ",
            a.coeffs.dim(),
            b.coeffs.dim()
        )));
    }
    if a.basis_fingerprint != b.basis_fingerprint {
        return Err(Error::FingerprintMismatch {
            context: "spectrograms from different bases",
            expected: a.basis_fingerprint.to_hex(),
            found: b.basis_fingerprint.to_hex(),
        });
    }
    Ok(())
}

/// `Ŝ_G = M ⊙ Y_G`.
pub fn apply_mask(mask: &Mask, noisy: &TimeGraphSpectrogram) -> Result<TimeGraphSpectrogram> {
    if mask.values.dim() != noisy.coeffs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mask shape {:?} does not match spectrogram {:?}",
            mask.values.dim(),
            noisy.coeffs.dim()
        )));
    }
    noisy.with_coeffs(&mask.values * &noisy.coeffs)
}

/// Signed ratio mask `clamp(S / (Y + sign(Y)·eps), −clip, clip)`; `sign(0)` is taken as `+1`.
pub fn oracle_ratio_mask(
    clean: &TimeGraphSpectrogram,
    noisy: &TimeGraphSpectrogram,
    clip: Option<f64>,
    eps: f64,
) -> Result<Mask> {
    check_pair(clean, noisy)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be >= 0, got {eps}"
        )));
    }
    let bound = clip.unwrap_or(f64::INFINITY);
    let mut values = Array2::zeros(noisy.coeffs.dim());
    ndarray::Zip::from(&mut values)
        .and(&clean.coeffs)
        .and(&noisy.coeffs)
        .for_each(|m, &s, &y| {
            let denom = if y < 0.0 { y - eps } else { y + eps };
            let r = if denom == 0.0 { 0.0 } else { s / denom };
            *m = r.clamp(-bound, bound);
        });
    Mask::new(values, clip)
}

/// Complex ratio mask `S·conj(Y) / max(|Y|², eps²)` with magnitude clipped at `clip`.
///
/// Used for the STFT and GFT-EVD baselines. Clipping keeps the phase, so
/// conjugate symmetry of the masked spectrum is preserved.
pub fn oracle_complex_mask(
    clean: &ComplexSpectrogram,
    noisy: &ComplexSpectrogram,
    clip: Option<f64>,
    eps: f64,
) -> Result<Array2<Complex64>> {
    if clean.real.dim() != noisy.real.dim() || clean.kind != noisy.kind {
        return Err(Error::DimensionMismatch(format!(
            "{:?} {:?} vs {:?} {:?}",
            clean.kind,
            clean.real.dim(),
            noisy.kind,
            noisy.real.dim()
        )));
    }
    let bound = clip.unwrap_or(f64::INFINITY);
    Ok(Array2::from_shape_fn(noisy.real.dim(), |(m, j)| {
        let s = clean.get(m, j);
        let y = noisy.get(m, j);
        let r = s * y.conj() / y.norm_sqr().max(eps * eps);
        let mag = r.norm();
        if mag > bound {
            r * (bound / mag)
        } else {
            r
        }
    }))
}

/// Elementwise complex product of a mask and a spectrogram.
pub fn apply_complex_mask(
    mask: &Array2<Complex64>,
    noisy: &ComplexSpectrogram,
) -> Result<ComplexSpectrogram> {
    if mask.dim() != noisy.real.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mask shape {:?} does not match spectrogram {:?}",
            mask.dim(),
            noisy.real.dim()
        )));
    }
    let prod = Array2::from_shape_fn(mask.dim(), |(m, j)| mask[(m, j)] * noisy.get(m, j));
    Ok(ComplexSpectrogram {
        real: prod.mapv(|z| z.re),
        imag: prod.mapv(|z| z.im),
        ..noisy.clone()
    })
}

/// Where the mask in [`enhance_pipeline`] comes from.
#[derive(Debug, Clone, Copy)]
pub enum MaskSource<'a> {
    /// Ratio mask against the known clean waveform.
    Oracle {
        clean: &'a [f64],
        clip: Option<f64>,
        eps: f64,
    },
    /// Trained per-frame estimator.
    Estimator(&'a MlpParams),
    /// All-ones mask (round-trip check).
    Unity,
    /// All-zeros mask.
    Zero,
}

impl<'a> MaskSource<'a> {
    pub fn oracle(clean: &'a [f64]) -> Self {
        MaskSource::Oracle {
            clean,
            clip: Some(DEFAULT_CLIP),
            eps: DEFAULT_EPS,
        }
    }
}

/// analyze → mask → synthesize. The output has the length of `noisy`.
pub fn enhance_pipeline(
    noisy: &[f64],
    basis: &GraphBasis,
    framing: &FramingConfig,
    source: MaskSource<'_>,
) -> Result<Vec<f64>> {
    let y = analyze(noisy, framing, basis)?;
    let (frames, bins) = y.coeffs.dim();
    let mask = match source {
        MaskSource::Oracle { clean, clip, eps } => {
            if clean.len() != noisy.len() {
                return Err(Error::LengthMismatch {
                    left: clean.len(),
                    right: noisy.len(),
                });
            }
            let s = analyze(clean, framing, basis)?;
            oracle_ratio_mask(&s, &y, clip, eps)?
        }
        MaskSource::Estimator(params) => {
            params.check_basis(basis)?;
            mlp_forward(params, &normalized_features(&y, noisy))?
        }
        MaskSource::Unity => Mask::constant(frames, bins, 1.0),
        MaskSource::Zero => Mask::constant(frames, bins, 0.0),
    };
    synthesize(&apply_mask(&mask, &y)?, basis)
}

/// Complex-domain baseline for [`oracle_complex_pipeline`].
#[derive(Debug, Clone, Copy)]
pub enum ComplexBaseline<'a> {
    Stft,
    GftEvd(&'a ComplexGraphBasis),
}

/// analyze → complex oracle ratio mask → synthesize, for the STFT and GFT-EVD baselines.
pub fn oracle_complex_pipeline(
    noisy: &[f64],
    clean: &[f64],
    framing: &FramingConfig,
    baseline: ComplexBaseline<'_>,
    clip: Option<f64>,
    eps: f64,
) -> Result<Vec<f64>> {
    if clean.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            left: clean.len(),
            right: noisy.len(),
        });
    }
    let forward = |x: &[f64]| -> Result<ComplexSpectrogram> {
        let frames = frame_signal(x, framing)?;
        match baseline {
            ComplexBaseline::Stft => stft_forward(&frames),
            ComplexBaseline::GftEvd(cb) => gft_evd_forward(&frames, cb),
        }
    };
    let y = forward(noisy)?;
    let s = forward(clean)?;
    let masked = apply_complex_mask(&oracle_complex_mask(&s, &y, clip, eps)?, &y)?;
    let frames = match baseline {
        ComplexBaseline::Stft => stft_inverse(&masked)?,
        ComplexBaseline::GftEvd(cb) => gft_evd_inverse(&masked, cb)?,
    };
    overlap_add(&frames)
}
