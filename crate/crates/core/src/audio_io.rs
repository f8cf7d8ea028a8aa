//! Mono WAV I/O, mixing at a target SNR, and dataset manifests.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter(
                "sample rate must be positive".into(),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite audio sample".into()));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    Pcm16,
    #[default]
    Float32,
}

fn wav_error(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::FormatError(msg) => Error::MalformedWav(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedLayout("unsupported WAV encoding".into()),
        other => Error::MalformedWav(other.to_string()),
    }
}

/// Reads a mono PCM16 or IEEE float32 WAV file. PCM16 samples are decoded as `v / 32768`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let reader = hound::WavReader::open(path).map_err(wav_error)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedLayout(format!(
            "{} channels; only mono is supported",
            spec.channels
        )));
    }
    let samples = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<Vec<_>, _>>(),
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<Vec<_>, _>>(),
        (fmt, bits) => {
            return Err(Error::UnsupportedLayout(format!(
                "{bits}-bit {fmt:?} samples; expected 16-bit PCM or 32-bit float"
            )))
        }
    }
    .map_err(wav_error)?;
    AudioClip::new(samples, spec.sample_rate)
}

/// Reads a WAV file and requires a specific sample rate.
pub fn read_wav_expect(path: impl AsRef<Path>, sample_rate: u32) -> Result<AudioClip> {
    let clip = read_wav(path)?;
    if clip.sample_rate != sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: sample_rate,
            found: clip.sample_rate,
        });
    }
    Ok(clip)
}

/// Writes a mono WAV file. PCM16 rounds to nearest and saturates.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip, encoding: WavEncoding) -> Result<()> {
    let (bits, format) = match encoding {
        WavEncoding::Pcm16 => (16, hound::SampleFormat::Int),
        WavEncoding::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_error)?;
    for &v in &clip.samples {
        match encoding {
            WavEncoding::Pcm16 => {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q).map_err(wav_error)?;
            }
            WavEncoding::Float32 => writer.write_sample(v as f32).map_err(wav_error)?,
        }
    }
    writer.finalize().map_err(wav_error)?;
    Ok(())
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Mixes `clean` with a seeded crop of `noise` scaled to give exactly `snr_db`.
///
/// Returns `(noisy, scaled_noise)`.
pub fn mix_at_snr(
    clean: &AudioClip,
    noise: &AudioClip,
    snr_db: f64,
    seed: u64,
) -> Result<(AudioClip, AudioClip)> {
    if clean.sample_rate != noise.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: clean.sample_rate,
            found: noise.sample_rate,
        });
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "SNR must be finite, got {snr_db}"
        )));
    }
    if clean.is_empty() {
        return Err(Error::EmptyInput("clean clip"));
    }
    if noise.len() < clean.len() {
        return Err(Error::InvalidParameter(format!(
            "noise ({} samples) is shorter than clean ({} samples)",
            noise.len(),
            clean.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = rng.random_range(0..=noise.len() - clean.len());
    let crop = &noise.samples[offset..offset + clean.len()];

    let clean_energy = energy(&clean.samples);
    let noise_energy = energy(crop);
    if !(clean_energy > 0.0) {
        return Err(Error::SilentSignal("clean"));
    }
    if !(noise_energy > 0.0) {
        return Err(Error::SilentSignal("noise crop"));
    }
    let gain = (clean_energy / (noise_energy * 10f64.powf(snr_db / 10.0))).sqrt();
    let scaled: Vec<f64> = crop.iter().map(|v| gain * v).collect();
    let noisy: Vec<f64> = clean
        .samples
        .iter()
        .zip(&scaled)
        .map(|(c, n)| c + n)
        .collect();
    Ok((
        AudioClip::new(noisy, clean.sample_rate)?,
        AudioClip::new(scaled, clean.sample_rate)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub clean_path: PathBuf,
    pub noise_path: PathBuf,
    pub snr_db: f64,
}

pub const MANIFEST_HEADER: [&str; 4] = ["id", "clean_path", "noise_path", "snr_db"];

/// Parses a manifest CSV. Relative paths resolve against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text, path)
}

fn manifest_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<ManifestEntry>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| manifest_error(path, 1, e.to_string()))?,
        None => return Err(manifest_error(path, 1, "missing header")),
    };
    if header.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        return Err(manifest_error(
            path,
            1,
            format!("expected header `{}`", MANIFEST_HEADER.join(",")),
        ));
    }

    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut entries = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            manifest_error(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 4 {
            return Err(manifest_error(
                path,
                line,
                format!("expected 4 fields, found {}", rec.len()),
            ));
        }
        let id = rec[0].to_string();
        if id.is_empty() || rec[1].is_empty() || rec[2].is_empty() {
            return Err(manifest_error(path, line, "empty id or path"));
        }
        let snr_db: f64 = rec[3]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| {
                manifest_error(path, line, format!("unparsable snr_db `{}`", &rec[3]))
            })?;
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(manifest_error(
                path,
                line,
                format!("duplicate id `{id}` (first on line {first})"),
            ));
        }
        entries.push(ManifestEntry {
            id,
            clean_path: resolve(&rec[1]),
            noise_path: resolve(&rec[2]),
            snr_db,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::snr;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16000).unwrap()
    }

    #[test]
    fn float32_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let samples: Vec<f64> = (0..1000)
            .map(|i| ((i as f64 * 0.37).sin() * 0.9) as f32 as f64)
            .collect();
        let c = clip(samples);
        write_wav(&path, &c, WavEncoding::Float32).unwrap();
        assert_eq!(read_wav(&path).unwrap(), c);
    }

    #[test]
    fn pcm16_decoding_and_saturation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.wav");
        write_wav(
            &path,
            &clip(vec![0.5, 1.5, -2.0, 0.25 / 32768.0, 0.75 / 32768.0]),
            WavEncoding::Pcm16,
        )
        .unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(
            back.samples,
            vec![0.5, 32767.0 / 32768.0, -1.0, 0.0, 1.0 / 32768.0]
        );
    }

    #[test]
    fn stereo_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 16000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..8 {
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(read_wav(&path), Err(Error::UnsupportedLayout(_))));
    }

    #[test]
    fn malformed_and_rate_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.wav");
        std::fs::write(&bad, b"RIFX0000WAVEjunkjunkjunk").unwrap();
        assert!(matches!(read_wav(&bad), Err(Error::MalformedWav(_))));

        let good = dir.path().join("g.wav");
        write_wav(
            &good,
            &AudioClip::new(vec![0.0; 4], 8000).unwrap(),
            WavEncoding::Float32,
        )
        .unwrap();
        assert!(matches!(
            read_wav_expect(&good, 16000),
            Err(Error::SampleRateMismatch {
                expected: 16000,
                found: 8000
            })
        ));
    }

    #[test]
    fn mixing_gains() {
        let c = clip(vec![1.0, -1.0, 1.0, -1.0]);
        let n = clip(vec![-1.0, 1.0, 1.0, -1.0]);
        let (noisy, scaled) = mix_at_snr(&c, &n, 0.0, 1).unwrap();
        assert!(scaled
            .samples
            .iter()
            .zip(&n.samples)
            .all(|(a, b)| (a - b).abs() < 1e-12));
        assert_eq!(noisy.samples, vec![0.0, 0.0, 2.0, -2.0]);
        let (_, scaled) = mix_at_snr(&c, &n, 20.0, 1).unwrap();
        assert!(scaled
            .samples
            .iter()
            .zip(&n.samples)
            .all(|(a, b)| (a - 0.1 * b).abs() < 1e-12));
    }

    #[test]
    fn mixing_hits_target_and_is_deterministic() {
        let c = clip((0..800).map(|i| (i as f64 * 0.05).sin()).collect());
        let n = clip((0..3000).map(|i| ((i * i) as f64 * 0.013).cos()).collect());
        for snr_db in [-5.0, 0.0, 7.5, 20.0] {
            let (a, sa) = mix_at_snr(&c, &n, snr_db, 9).unwrap();
            let (b, _) = mix_at_snr(&c, &n, snr_db, 9).unwrap();
            assert_eq!(a, b);
            assert!((snr(&c.samples, &sa.samples).unwrap() - snr_db).abs() < 1e-9);
        }
        let (a, _) = mix_at_snr(&c, &n, 0.0, 1).unwrap();
        let (b, _) = mix_at_snr(&c, &n, 0.0, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn mixing_rejects_silence() {
        let c = clip(vec![0.0; 4]);
        let n = clip(vec![1.0; 4]);
        assert!(matches!(
            mix_at_snr(&c, &n, 0.0, 0),
            Err(Error::SilentSignal(_))
        ));
        assert!(matches!(
            mix_at_snr(&n, &c, 0.0, 0),
            Err(Error::SilentSignal(_))
        ));
    }

    #[test]
    fn manifest_parsing() {
        let p = Path::new("/data/m.csv");
        assert!(parse_manifest("id,clean_path,noise_path,snr_db\n", p)
            .unwrap()
            .is_empty());
        let rows = parse_manifest(
            "id,clean_path,noise_path,snr_db\na,c1.wav,n1.wav,0\nb,/abs/c2.wav,n2.wav,-5\nc,c3.wav,n3.wav,12.5\n",
            p,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].clean_path, PathBuf::from("/data/c1.wav"));
        assert_eq!(rows[1].clean_path, PathBuf::from("/abs/c2.wav"));
        assert_eq!(rows[2].snr_db, 12.5);
        assert_eq!(
            rows.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn manifest_errors_carry_line_numbers() {
        let p = Path::new("m.csv");
        let line_of = |text: &str| match parse_manifest(text, p) {
            Err(Error::Manifest { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("id,clean,noise,snr\n"), 1);
        assert_eq!(
            line_of("id,clean_path,noise_path,snr_db\na,c,n,0\na,c,n,1\n"),
            3
        );
        assert_eq!(line_of("id,clean_path,noise_path,snr_db\na,c,n\n"), 2);
        assert_eq!(
            line_of("id,clean_path,noise_path,snr_db\na,c,n,0\nb,c,n,loud\n"),
            3
        );
    }
}
