//! Evaluation measures: SI-SDR, SNR and waveform reconstruction error.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numfmt::sig9;

/// SI-SDR is reported within `±SI_SDR_LIMIT_DB`: the projection-to-residual
/// norm ratio is clamped to `[1e-12, 1e12]`.
pub const SI_SDR_RATIO_FLOOR: f64 = 1e-12;
pub const SI_SDR_LIMIT_DB: f64 = 240.0;
/// SNR values are clamped to `±SNR_LIMIT_DB`.
pub const SNR_LIMIT_DB: f64 = 120.0;

/// Intermediate quantities of the SI-SDR computation.
#[derive(Debug, Clone)]
pub(crate) struct SiSdrParts {
    pub value: f64,
    /// Target component `⟨ŝ,s⟩ s / ‖s‖²`.
    pub projection: Vec<f64>,
    /// Residual `ŝ − projection`.
    pub residual: Vec<f64>,
    pub projection_energy: f64,
    pub residual_energy: f64,
    /// The ratio hit a floor; the value is locally constant.
    pub clamped: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn si_sdr_parts(estimate: &[f64], reference: &[f64]) -> Result<SiSdrParts> {
    if estimate.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: estimate.len(),
            right: reference.len(),
        });
    }
    let ref_energy = dot(reference, reference);
    if !(ref_energy > 0.0) {
        return Err(Error::ZeroReference);
    }
    let scale = dot(estimate, reference) / ref_energy;
    let projection: Vec<f64> = reference.iter().map(|r| scale * r).collect();
    let residual: Vec<f64> = estimate
        .iter()
        .zip(&projection)
        .map(|(e, p)| e - p)
        .collect();
    let projection_energy = dot(&projection, &projection);
    let residual_energy = dot(&residual, &residual);

    let ratio = if residual_energy > 0.0 {
        (projection_energy / residual_energy).sqrt()
    } else if projection_energy > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let clamped = !(SI_SDR_RATIO_FLOOR..=1.0 / SI_SDR_RATIO_FLOOR).contains(&ratio);
    let value = 20.0
        * ratio
            .clamp(SI_SDR_RATIO_FLOOR, 1.0 / SI_SDR_RATIO_FLOOR)
            .log10();
    if !value.is_finite() {
        return Err(Error::Numerical("non-finite SI-SDR".into()));
    }
    Ok(SiSdrParts {
        value,
        projection,
        residual,
        projection_energy,
        residual_energy,
        clamped,
    })
}

/// Scale-invariant signal-to-distortion ratio in dB:
/// `20·log10(‖P ŝ‖ / ‖ŝ − P ŝ‖)` where `P` projects onto the reference.
pub fn si_sdr(estimate: &[f64], reference: &[f64]) -> Result<f64> {
    Ok(si_sdr_parts(estimate, reference)?.value)
}

/// `10·log10(‖signal‖² / ‖noise‖²)`, clamped to `±120` dB.
pub fn snr(signal: &[f64], noise: &[f64]) -> Result<f64> {
    let noise_energy = dot(noise, noise);
    if !(noise_energy > 0.0) {
        return Err(Error::SilentSignal("noise"));
    }
    let db = 10.0 * (dot(signal, signal) / noise_energy).log10();
    Ok(if db.is_nan() {
        -SNR_LIMIT_DB
    } else {
        db.clamp(-SNR_LIMIT_DB, SNR_LIMIT_DB)
    })
}

/// Returns `(max |x − x̂|, ‖x − x̂‖ / max(‖x‖, 1e-12))`.
pub fn reconstruction_error(x: &[f64], x_hat: &[f64]) -> Result<(f64, f64)> {
    if x.len() != x_hat.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: x_hat.len(),
        });
    }
    let mut max_abs = 0.0f64;
    let mut diff_energy = 0.0;
    for (a, b) in x.iter().zip(x_hat) {
        let d = a - b;
        max_abs = max_abs.max(d.abs());
        diff_energy += d * d;
    }
    let norm = dot(x, x).sqrt().max(1e-12);
    Ok((max_abs, diff_energy.sqrt() / norm))
}

/// Metrics for one enhanced utterance. Fields that cannot be computed (for
/// example without a clean reference) are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalReport {
    pub si_sdr_db: Option<f64>,
    pub si_sdr_improvement_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub rel_l2_error: Option<f64>,
}

impl EvalReport {
    /// Scores `enhanced` against `clean`; `snr_db` is the input SNR of `noisy`.
    pub fn evaluate(clean: Option<&[f64]>, noisy: &[f64], enhanced: &[f64]) -> Result<Self> {
        let Some(clean) = clean else {
            return Ok(EvalReport::default());
        };
        let enhanced_score = si_sdr(enhanced, clean)?;
        let noisy_score = si_sdr(noisy, clean)?;
        let noise: Vec<f64> = noisy.iter().zip(clean).map(|(y, s)| y - s).collect();
        let input_snr = if noise.iter().all(|&v| v == 0.0) {
            SNR_LIMIT_DB
        } else {
            snr(clean, &noise)?
        };
        let (max_abs, rel_l2) = reconstruction_error(clean, enhanced)?;
        Ok(EvalReport {
            si_sdr_db: Some(enhanced_score),
            si_sdr_improvement_db: Some(enhanced_score - noisy_score),
            snr_db: Some(input_snr),
            max_abs_error: Some(max_abs),
            rel_l2_error: Some(rel_l2),
        })
    }

    fn fields(&self) -> [Option<f64>; 5] {
        [
            self.si_sdr_db,
            self.si_sdr_improvement_db,
            self.snr_db,
            self.max_abs_error,
            self.rel_l2_error,
        ]
    }

    /// Field-wise mean over the reports that carry each field.
    pub fn mean<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> EvalReport {
        let mut sums = [0.0; 5];
        let mut counts = [0usize; 5];
        for r in reports {
            for (i, v) in r.fields().iter().enumerate() {
                if let Some(v) = v {
                    sums[i] += v;
                    counts[i] += 1;
                }
            }
        }
        let avg = |i: usize| (counts[i] > 0).then(|| sums[i] / counts[i] as f64);
        EvalReport {
            si_sdr_db: avg(0),
            si_sdr_improvement_db: avg(1),
            snr_db: avg(2),
            max_abs_error: avg(3),
            rel_l2_error: avg(4),
        }
    }
}

pub const METRICS_CSV_HEADER: &str = "file,si_sdr_db,si_sdr_imp_db,snr_db,max_abs_err,rel_l2_err";

fn opt(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

/// Writes one row per utterance followed by a `MEAN` row.
pub fn write_metrics_csv<W: Write>(rows: &[(String, EvalReport)], mut w: W) -> Result<()> {
    writeln!(w, "{METRICS_CSV_HEADER}")?;
    let mut line = |name: &str, r: &EvalReport| -> std::io::Result<()> {
        let cols: Vec<String> = r.fields().iter().map(|&v| opt(v)).collect();
        writeln!(w, "{name},{}", cols.join(","))
    };
    for (name, r) in rows {
        line(name, r)?;
    }
    line("MEAN", &EvalReport::mean(rows.iter().map(|(_, r)| r)))?;
    w.flush()?;
    Ok(())
}
