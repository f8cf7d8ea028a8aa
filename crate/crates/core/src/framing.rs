//! Windowed, zero-padded framing and weighted overlap-add (WOLA) synthesis.
//!
//! The waveform is padded with `W` zeros on both sides before framing, so
//! every original sample is covered by full windows and the analysis /
//! synthesis round trip is exact over the whole signal. Frame `m` holds
//! `window · x_padded[mH .. mH + W]` followed by `N - W` zeros.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Floor for the WOLA normalization denominator.
pub const WOLA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WindowKind {
    #[default]
    HannPeriodic,
    Rectangular,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::HannPeriodic => (0..len)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
                .collect(),
            WindowKind::Rectangular => vec![1.0; len],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FramingConfig {
    pub sample_rate: u32,
    /// Window length `W` in samples.
    pub window_len: usize,
    /// Hop `H` in samples.
    pub hop: usize,
    /// Transform length `N`; frames are zero-padded from `W` to `N`.
    pub transform_len: usize,
    pub window_kind: WindowKind,
}

impl Default for FramingConfig {
    /// 16 kHz, 25 ms window, 6.25 ms hop, 512-point transform, periodic Hann.
    fn default() -> Self {
        FramingConfig {
            sample_rate: 16_000,
            window_len: 400,
            hop: 100,
            transform_len: 512,
            window_kind: WindowKind::HannPeriodic,
        }
    }
}

impl FramingConfig {
    pub fn new(
        sample_rate: u32,
        window_len: usize,
        hop: usize,
        transform_len: usize,
        window_kind: WindowKind,
    ) -> Result<Self> {
        let cfg = FramingConfig {
            sample_rate,
            window_len,
            hop,
            transform_len,
            window_kind,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Derives window and hop lengths from durations in milliseconds, rounding to whole samples.
    pub fn from_millis(
        sample_rate: u32,
        window_ms: f64,
        hop_ms: f64,
        transform_len: usize,
        window_kind: WindowKind,
    ) -> Result<Self> {
        if !(window_ms > 0.0 && hop_ms > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window and hop durations must be positive, got {window_ms} ms / {hop_ms} ms"
            )));
        }
        let samples = |ms: f64| (ms * sample_rate as f64 / 1000.0).round() as usize;
        Self::new(
            sample_rate,
            samples(window_ms),
            samples(hop_ms),
            transform_len,
            window_kind,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 || self.hop == 0 {
            return Err(Error::InvalidParameter(
                "sample rate and hop must be positive".into(),
            ));
        }
        if !(self.hop <= self.window_len && self.window_len <= self.transform_len) {
            return Err(Error::InvalidParameter(format!(
                "framing requires hop <= window <= transform length, got {} <= {} <= {}",
                self.hop, self.window_len, self.transform_len
            )));
        }
        Ok(())
    }

    /// Number of frames for a signal of `len` samples: `ceil((len + W) / H) + 1`.
    pub fn frame_count(&self, len: usize) -> usize {
        let padded = len + 2 * self.window_len;
        (padded - self.window_len).div_ceil(self.hop) + 1
    }

    fn padded_len(&self, frames: usize) -> usize {
        (frames - 1) * self.hop + self.window_len
    }

    fn window(&self) -> Vec<f64> {
        self.window_kind.coefficients(self.window_len)
    }
}

/// Frames of one signal, `F × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    pub frames: Array2<f64>,
    pub config: FramingConfig,
    pub original_len: usize,
    pub pad_pre: usize,
}

impl FrameMatrix {
    pub fn num_frames(&self) -> usize {
        self.frames.nrows()
    }

    /// Replaces the frame data, keeping framing metadata.
    pub fn with_frames(&self, frames: Array2<f64>) -> Result<Self> {
        if frames.dim() != self.frames.dim() {
            return Err(Error::DimensionMismatch(format!(
                "frame matrix shape {:?} does not match {:?}",
                frames.dim(),
                self.frames.dim()
            )));
        }
        Ok(FrameMatrix {
            frames,
            ..self.clone()
        })
    }
}

pub fn frame_signal(x: &[f64], cfg: &FramingConfig) -> Result<FrameMatrix> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyInput("waveform"));
    }
    let (w, h, n) = (cfg.window_len, cfg.hop, cfg.transform_len);
    let count = cfg.frame_count(x.len());
    let mut padded = vec![0.0; cfg.padded_len(count).max(x.len() + 2 * w)];
    padded[w..w + x.len()].copy_from_slice(x);
    let window = cfg.window();

    let mut frames = Array2::zeros((count, n));
    for (m, mut row) in frames.rows_mut().into_iter().enumerate() {
        let seg = &padded[m * h..m * h + w];
        for ((dst, &s), &g) in row.iter_mut().zip(seg).zip(&window) {
            *dst = s * g;
        }
    }
    Ok(FrameMatrix {
        frames,
        config: *cfg,
        original_len: x.len(),
        pad_pre: w,
    })
}

fn check_layout(frames: &Array2<f64>, cfg: &FramingConfig, original_len: usize) -> Result<()> {
    cfg.validate()?;
    if original_len == 0 {
        return Err(Error::EmptyInput("original length"));
    }
    let expected = cfg.frame_count(original_len);
    if frames.nrows() != expected || frames.ncols() != cfg.transform_len {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} frames do not match a {original_len}-sample signal ({expected}x{})",
            frames.nrows(),
            frames.ncols(),
            cfg.transform_len
        )));
    }
    Ok(())
}

/// WOLA denominator `Σ_m w(t - mH)²` over the padded time axis, floored.
fn wola_denominator(cfg: &FramingConfig, count: usize) -> Vec<f64> {
    let window = cfg.window();
    let mut denom = vec![0.0; cfg.padded_len(count)];
    for m in 0..count {
        for (d, &g) in denom[m * cfg.hop..].iter_mut().zip(&window) {
            *d += g * g;
        }
    }
    denom.iter_mut().for_each(|d| *d = d.max(WOLA_FLOOR));
    denom
}

/// Weighted overlap-add synthesis; returns exactly `original_len` samples.
pub fn overlap_add(frames: &FrameMatrix) -> Result<Vec<f64>> {
    let cfg = &frames.config;
    check_layout(&frames.frames, cfg, frames.original_len)?;
    let (w, h) = (cfg.window_len, cfg.hop);
    let count = frames.num_frames();
    let window = cfg.window();
    let denom = wola_denominator(cfg, count);

    let mut acc = vec![0.0; denom.len()];
    for (m, row) in frames.frames.rows().into_iter().enumerate() {
        for ((a, &v), &g) in acc[m * h..].iter_mut().zip(row.iter()).zip(&window) {
            *a += v * g;
        }
    }
    Ok(acc[w..w + frames.original_len]
        .iter()
        .zip(&denom[w..])
        .map(|(a, d)| a / d)
        .collect())
}

/// Adjoint of [`overlap_add`] as a linear map from frames to waveform.
///
/// Maps a waveform-shaped gradient back onto an `F × N` frame gradient.
pub fn overlap_add_adjoint(
    grad: &[f64],
    cfg: &FramingConfig,
    original_len: usize,
) -> Result<Array2<f64>> {
    cfg.validate()?;
    if grad.len() != original_len {
        return Err(Error::LengthMismatch {
            left: grad.len(),
            right: original_len,
        });
    }
    let (w, h) = (cfg.window_len, cfg.hop);
    let count = cfg.frame_count(original_len);
    let window = cfg.window();
    let denom = wola_denominator(cfg, count);

    let mut scaled = vec![0.0; denom.len()];
    for (i, g) in grad.iter().enumerate() {
        scaled[w + i] = g / denom[w + i];
    }
    let mut out = Array2::zeros((count, cfg.transform_len));
    for (m, mut row) in out.rows_mut().into_iter().enumerate() {
        for ((dst, &s), &g) in row.iter_mut().zip(&scaled[m * h..]).zip(&window) {
            *dst = s * g;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn frame_count_for_one_second() {
        let cfg = FramingConfig::default();
        assert_eq!(cfg.frame_count(16000), 165);
        let fm = frame_signal(&vec![0.0; 16000], &cfg).unwrap();
        assert_eq!(fm.frames.dim(), (165, 512));
    }

    #[test]
    fn zero_input_gives_zero_frames() {
        let fm = frame_signal(&vec![0.0; 1234], &FramingConfig::default()).unwrap();
        assert!(fm.frames.iter().all(|&v| v == 0.0));
        assert!(overlap_add(&fm).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn padding_region_is_zero() {
        let fm = frame_signal(&random_signal(3000, 1), &FramingConfig::default()).unwrap();
        for row in fm.frames.rows() {
            assert!(row.iter().skip(400).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rectangular_impulse() {
        let cfg = FramingConfig {
            window_kind: WindowKind::Rectangular,
            ..FramingConfig::default()
        };
        let mut x = vec![0.0; 1000];
        x[0] = 0.75;
        let fm = frame_signal(&x, &cfg).unwrap();
        // Sample 0 sits at padded index 400: column 400 - 100m of frame m for m = 1..=4.
        for m in 1..=4 {
            assert_eq!(fm.frames[(m, 400 - 100 * m)], 0.75);
        }
        assert_eq!(fm.frames.iter().filter(|&&v| v != 0.0).count(), 4);
    }

    #[test]
    fn round_trip_one_second() {
        let x = random_signal(16000, 7);
        let y = overlap_add(&frame_signal(&x, &FramingConfig::default()).unwrap()).unwrap();
        let err = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn round_trip_rectangular() {
        let cfg = FramingConfig {
            window_kind: WindowKind::Rectangular,
            ..FramingConfig::default()
        };
        let x = random_signal(777, 8);
        let y = overlap_add(&frame_signal(&x, &cfg).unwrap()).unwrap();
        let err = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn rejects_empty_and_inconsistent() {
        let cfg = FramingConfig::default();
        assert!(matches!(frame_signal(&[], &cfg), Err(Error::EmptyInput(_))));
        let mut fm = frame_signal(&random_signal(500, 2), &cfg).unwrap();
        fm.original_len = 5000;
        assert!(matches!(overlap_add(&fm), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn config_validation() {
        assert!(FramingConfig::new(16000, 400, 500, 512, WindowKind::HannPeriodic).is_err());
        assert!(FramingConfig::new(16000, 600, 100, 512, WindowKind::HannPeriodic).is_err());
        let cfg =
            FramingConfig::from_millis(16000, 25.0, 6.25, 512, WindowKind::HannPeriodic).unwrap();
        assert_eq!(cfg, FramingConfig::default());
    }

    #[test]
    fn adjoint_matches_inner_products() {
        let cfg = FramingConfig::default();
        let len = 900;
        let count = cfg.frame_count(len);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames = Array2::from_shape_fn((count, 512), |(_, j)| {
            if j < 400 {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let g = random_signal(len, 4);
        let fm = FrameMatrix {
            frames: frames.clone(),
            config: cfg,
            original_len: len,
            pad_pre: 400,
        };
        let lhs: f64 = overlap_add(&fm)
            .unwrap()
            .iter()
            .zip(&g)
            .map(|(a, b)| a * b)
            .sum();
        let adj = overlap_add_adjoint(&g, &cfg, len).unwrap();
        let rhs: f64 = (&adj * &frames).sum();
        assert!(
            (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
            "{lhs} {rhs}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_any_length(len in 1usize..3000, seed in any::<u64>()) {
            let x = random_signal(len, seed);
            let y = overlap_add(&frame_signal(&x, &FramingConfig::default()).unwrap()).unwrap();
            prop_assert_eq!(y.len(), len);
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-8);
        }

        #[test]
        fn linear(len in 1usize..2000, seed in any::<u64>(), alpha in -4.0f64..4.0) {
            let cfg = FramingConfig::default();
            let x = random_signal(len, seed);
            let z = random_signal(len, seed ^ 0x5555);
            let sum: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            let fx = frame_signal(&x, &cfg).unwrap();
            let fz = frame_signal(&z, &cfg).unwrap();
            let fs = frame_signal(&sum, &cfg).unwrap();
            let add = &fx.frames + &fz.frames;
            prop_assert!(add.iter().zip(fs.frames.iter()).all(|(a, b)| (a - b).abs() < 1e-10));

            let scaled = fx.with_frames(fx.frames.mapv(|v| alpha * v)).unwrap();
            let y1 = overlap_add(&scaled).unwrap();
            let y0 = overlap_add(&fx).unwrap();
            prop_assert!(y1.iter().zip(&y0).all(|(a, b)| (a - alpha * b).abs() < 1e-10));
        }
    }
}
