pub mod basis;
pub mod compare;
pub mod enhance;
pub mod fixtures;
pub mod render;
pub mod train;

use std::path::{Path, PathBuf};

use gftsvd::audio_io::{mix_at_snr, read_wav_expect, ManifestEntry};

/// A manifest entry mixed at its SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub id: String,
    pub clean: Vec<f64>,
    pub noisy: Vec<f64>,
}

/// Mixing seed of manifest row `index`.
pub fn mixture_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

pub fn load_mixture(entry: &ManifestEntry, seed: u64, sample_rate: u32) -> gftsvd::Result<Mixture> {
    let clean = read_wav_expect(&entry.clean_path, sample_rate)?;
    let noise = read_wav_expect(&entry.noise_path, sample_rate)?;
    let (noisy, _) = mix_at_snr(&clean, &noise, entry.snr_db, seed)?;
    Ok(Mixture {
        id: entry.id.clone(),
        clean: clean.samples,
        noisy: noisy.samples,
    })
}

/// `dir/stem.csv` → `dir/stem<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// `prefix` + `suffix`, keeping any dots already in the prefix.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn basis_file_name(n: usize, k: usize) -> String {
    format!("basis_n{n}_k{k}.gftb")
}
