//! Complex baselines: GFT-EVD (unitary DFT eigenbasis of the circulant
//! adjacency) and the one-sided STFT. Both use unitary `1/√N` scaling.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::check_transform_len;
use crate::error::{Error, Result};
use crate::framing::{FrameMatrix, FramingConfig};
use crate::graph_basis::ComplexGraphBasis;

/// Largest imaginary part tolerated when an inverse transform returns to real frames.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    Stft,
    GftEvd,
}

/// `F × B` complex spectrogram stored as separate real and imaginary planes.
///
/// `B = N` for GFT-EVD and `B = N/2 + 1` for the STFT.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    pub real: Array2<f64>,
    pub imag: Array2<f64>,
    pub kind: SpectrumKind,
    pub framing: FramingConfig,
    pub original_len: usize,
}

impl ComplexSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.real.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.real.ncols()
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        Complex64::new(self.real[(frame, bin)], self.imag[(frame, bin)])
    }

    fn expected_bins(&self) -> usize {
        match self.kind {
            SpectrumKind::Stft => self.framing.transform_len / 2 + 1,
            SpectrumKind::GftEvd => self.framing.transform_len,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.real.dim() != self.imag.dim() || self.num_bins() != self.expected_bins() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} spectrogram planes {:?}/{:?} do not match {} bins",
                self.kind,
                self.real.dim(),
                self.imag.dim(),
                self.expected_bins()
            )));
        }
        Ok(())
    }
}

fn real_frames(
    frames: Array2<f64>,
    imag_residual: f64,
    spec: &ComplexSpectrogram,
) -> Result<FrameMatrix> {
    if !(imag_residual < IMAG_RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "inverse {:?} left an imaginary residual of {imag_residual:e}",
            spec.kind
        )));
    }
    Ok(FrameMatrix {
        frames,
        config: spec.framing,
        original_len: spec.original_len,
        pad_pre: spec.framing.window_len,
    })
}

/// `S_G = Uᴴ s` for every frame.
pub fn gft_evd_forward(
    frames: &FrameMatrix,
    cbasis: &ComplexGraphBasis,
) -> Result<ComplexSpectrogram> {
    check_transform_len(frames, cbasis.n())?;
    let u_re = cbasis.u().mapv(|z| z.re);
    let u_im = cbasis.u().mapv(|z| z.im);
    Ok(ComplexSpectrogram {
        real: frames.frames.dot(&u_re),
        imag: -frames.frames.dot(&u_im),
        kind: SpectrumKind::GftEvd,
        framing: frames.config,
        original_len: frames.original_len,
    })
}

/// `s = U S_G`, keeping the real part.
pub fn gft_evd_inverse(
    spec: &ComplexSpectrogram,
    cbasis: &ComplexGraphBasis,
) -> Result<FrameMatrix> {
    if spec.kind != SpectrumKind::GftEvd {
        return Err(Error::DimensionMismatch(format!(
            "expected a GFT-EVD spectrogram, got {:?}",
            spec.kind
        )));
    }
    spec.validate()?;
    if spec.num_bins() != cbasis.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} bins cannot use an eigenbasis of size {}",
            spec.num_bins(),
            cbasis.n()
        )));
    }
    let u_re_t = cbasis.u().t().mapv(|z| z.re);
    let u_im_t = cbasis.u().t().mapv(|z| z.im);
    let real = spec.real.dot(&u_re_t) - spec.imag.dot(&u_im_t);
    let imag = spec.real.dot(&u_im_t) + spec.imag.dot(&u_re_t);
    let residual = imag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    real_frames(real, residual, spec)
}

/// One-sided unitary DFT of every frame (bins `0..=N/2`).
pub fn stft_forward(frames: &FrameMatrix) -> Result<ComplexSpectrogram> {
    let n = frames.config.transform_len;
    check_transform_len(frames, n)?;
    let bins = n / 2 + 1;
    let scale = 1.0 / (n as f64).sqrt();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let count = frames.num_frames();
    let mut real = Array2::zeros((count, bins));
    let mut imag = Array2::zeros((count, bins));
    let mut buf = vec![Complex64::default(); n];
    for (m, row) in frames.frames.rows().into_iter().enumerate() {
        for (b, &v) in buf.iter_mut().zip(row.iter()) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (j, z) in buf[..bins].iter().enumerate() {
            real[(m, j)] = z.re * scale;
            imag[(m, j)] = z.im * scale;
        }
    }
    Ok(ComplexSpectrogram {
        real,
        imag,
        kind: SpectrumKind::Stft,
        framing: frames.config,
        original_len: frames.original_len,
    })
}

/// Inverse of [`stft_forward`]; the upper half spectrum is restored by conjugate symmetry.
pub fn stft_inverse(spec: &ComplexSpectrogram) -> Result<FrameMatrix> {
    if spec.kind != SpectrumKind::Stft {
        return Err(Error::DimensionMismatch(format!(
            "expected an STFT spectrogram, got {:?}",
            spec.kind
        )));
    }
    spec.validate()?;
    let n = spec.framing.transform_len;
    let bins = spec.num_bins();
    let scale = 1.0 / (n as f64).sqrt();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut frames = Array2::zeros((spec.num_frames(), n));
    let mut buf = vec![Complex64::default(); n];
    let mut residual = 0.0f64;
    for m in 0..spec.num_frames() {
        for (j, z) in buf.iter_mut().enumerate() {
            *z = if j < bins {
                spec.get(m, j)
            } else {
                spec.get(m, n - j).conj()
            };
        }
        // Bins 0 and N/2 must be real for a real frame.
        buf[0].im = 0.0;
        if n.is_multiple_of(2) {
            buf[n / 2].im = 0.0;
        }
        ifft.process(&mut buf);
        for (j, z) in buf.iter().enumerate() {
            frames[(m, j)] = z.re * scale;
            residual = residual.max((z.im * scale).abs());
        }
    }
    real_frames(frames, residual, spec)
}

/// Unitary DFT magnitudes over all `N` bins of every frame.
pub fn stft_full_magnitude(frames: &FrameMatrix) -> Array2<f64> {
    let n = frames.frames.ncols();
    let scale = 1.0 / (n as f64).sqrt();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = Array2::zeros(frames.frames.dim());
    let mut buf = vec![Complex64::default(); n];
    for (m, row) in frames.frames.rows().into_iter().enumerate() {
        for (b, &v) in buf.iter_mut().zip(row.iter()) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (j, z) in buf.iter().enumerate() {
            out[(m, j)] = z.norm() * scale;
        }
    }
    out
}
