//! Deterministic synthetic audio: speech-shaped clean signals, white and pink noise.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audio_io::{write_wav, AudioClip, WavEncoding, MANIFEST_HEADER};
use crate::error::{Error, Result};

/// Formant centre frequencies and bandwidths (Hz) of a few vowels.
const VOWELS: [[(f64, f64); 3]; 4] = [
    [(730.0, 90.0), (1090.0, 110.0), (2440.0, 170.0)],
    [(270.0, 60.0), (2290.0, 100.0), (3010.0, 200.0)],
    [(300.0, 60.0), (870.0, 90.0), (2240.0, 150.0)],
    [(530.0, 70.0), (1840.0, 100.0), (2480.0, 160.0)],
];

fn formant_gain(freq: f64, vowel: &[(f64, f64); 3]) -> f64 {
    vowel
        .iter()
        .map(|&(fc, bw)| 1.0 / (1.0 + ((freq - fc) / bw).powi(2)))
        .sum::<f64>()
        + 0.02
}

fn peak_normalize(x: &mut [f64], peak: f64) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        let g = peak / max;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

/// Voiced syllables with a drifting pitch, formant-shaped harmonics and a
/// little breath noise, separated by short pauses. Peak amplitude 0.5.
pub fn speech_like(len: usize, sample_rate: u32, seed: u64) -> Vec<f64> {
    let fs = sample_rate as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; len];
    let mut start = (rng.random_range(0.02..0.08) * fs) as usize;
    while start < len {
        let dur = (rng.random_range(0.12..0.30) * fs) as usize;
        let f0_start: f64 = rng.random_range(95.0..220.0);
        let f0_end = f0_start * rng.random_range(0.8..1.2);
        let vowel = &VOWELS[rng.random_range(0..VOWELS.len())];
        let amp: f64 = rng.random_range(0.5..1.0);
        let mut phase = rng.random_range(0.0..2.0 * PI);
        for t in 0..dur.min(len - start) {
            let u = t as f64 / dur as f64;
            let f0 = f0_start + (f0_end - f0_start) * u;
            phase += 2.0 * PI * f0 / fs;
            let env = (PI * u).sin().powf(0.7);
            let mut s = 0.0;
            let mut h = 1;
            while (h as f64) * f0 < 0.45 * fs && h <= 40 {
                s += formant_gain(h as f64 * f0, vowel) * (h as f64 * phase).sin()
                    / (h as f64).sqrt();
                h += 1;
            }
            let breath: f64 = StandardNormal.sample(&mut rng);
            out[start + t] += amp * env * (s + 0.03 * breath);
        }
        start += dur + (rng.random_range(0.03..0.12) * fs) as usize;
    }
    peak_normalize(&mut out, 0.5);
    out
}

/// Unit-variance Gaussian white noise.
pub fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// 1/f noise from Paul Kellet's filtered white noise, peak amplitude 0.5.
pub fn pink_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut b = [0.0f64; 7];
    let mut out: Vec<f64> = white_noise(len, seed)
        .into_iter()
        .map(|w| {
            b[0] = 0.99886 * b[0] + w * 0.0555179;
            b[1] = 0.99332 * b[1] + w * 0.0750759;
            b[2] = 0.96900 * b[2] + w * 0.1538520;
            b[3] = 0.86650 * b[3] + w * 0.3104856;
            b[4] = 0.55000 * b[4] + w * 0.5329522;
            b[5] = -0.7616 * b[5] - w * 0.0168980;
            let y = b[..6].iter().sum::<f64>() + b[6] + w * 0.5362;
            b[6] = w * 0.115926;
            y
        })
        .collect();
    peak_normalize(&mut out, 0.5);
    out
}

/// Layout of a generated fixture set.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSet {
    pub clean: Vec<PathBuf>,
    pub white: PathBuf,
    pub pink: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureConfig {
    pub count: usize,
    pub clean_secs: f64,
    pub noise_secs: f64,
    pub sample_rate: u32,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            count: 10,
            clean_secs: 1.0,
            noise_secs: 3.0,
            sample_rate: crate::audio_io::DEFAULT_SAMPLE_RATE,
            snr_db: 0.0,
            seed: 2024,
        }
    }
}

/// Writes `count` clean utterances, one white and one pink noise file, and a
/// manifest pairing even entries with white noise and odd entries with pink.
/// All files are float32 WAV.
pub fn write_fixture_set(dir: impl AsRef<Path>, cfg: &FixtureConfig) -> Result<FixtureSet> {
    if cfg.count == 0 || !(cfg.clean_secs > 0.0) || cfg.noise_secs < cfg.clean_secs {
        return Err(Error::InvalidParameter(
            "fixture count must be positive and noise at least as long as clean".into(),
        ));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let fs_hz = cfg.sample_rate;
    let clean_len = (cfg.clean_secs * fs_hz as f64).round() as usize;
    let noise_len = (cfg.noise_secs * fs_hz as f64).round() as usize;
    let as_f32 = |v: Vec<f64>| v.into_iter().map(|s| s as f32 as f64).collect::<Vec<_>>();

    let white = dir.join("noise_white.wav");
    let mut w = white_noise(noise_len, cfg.seed ^ 0x5748);
    peak_normalize(&mut w, 0.5);
    write_wav(
        &white,
        &AudioClip::new(as_f32(w), fs_hz)?,
        WavEncoding::Float32,
    )?;
    let pink = dir.join("noise_pink.wav");
    write_wav(
        &pink,
        &AudioClip::new(as_f32(pink_noise(noise_len, cfg.seed ^ 0x504b)), fs_hz)?,
        WavEncoding::Float32,
    )?;

    let mut manifest = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    manifest.write_record(MANIFEST_HEADER).map_err(csv_err)?;
    let mut clean = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let name = format!("clean_{i:02}.wav");
        let samples = as_f32(speech_like(clean_len, fs_hz, cfg.seed + i as u64));
        write_wav(
            dir.join(&name),
            &AudioClip::new(samples, fs_hz)?,
            WavEncoding::Float32,
        )?;
        let noise = if i % 2 == 0 {
            "noise_white.wav"
        } else {
            "noise_pink.wav"
        };
        manifest
            .write_record([
                format!("utt{i:02}"),
                name.clone(),
                noise.into(),
                format!("{}", cfg.snr_db),
            ])
            .map_err(csv_err)?;
        clean.push(dir.join(name));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(
        &manifest_path,
        manifest
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))?,
    )?;
    Ok(FixtureSet {
        clean,
        white,
        pink,
        manifest: manifest_path,
    })
}
