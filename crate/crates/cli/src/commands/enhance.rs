use std::fs::File;
use std::io::{BufWriter, Write};

use gftsvd::audio_io::{read_wav_expect, write_wav, AudioClip, WavEncoding};
use gftsvd::enhance::{
    enhance_pipeline, load_checkpoint, oracle_complex_pipeline, ComplexBaseline, MaskSource,
    DEFAULT_EPS,
};
use gftsvd::graph_basis::{build_adjacency, decompose_evd, load_basis};
use gftsvd::metrics::{write_metrics_csv, EvalReport};
use gftsvd::Error;

use crate::args::{require, EnhanceArgs, EnhanceMode, Transform};
use crate::error::{CliError, CliResult};

pub fn run(args: &EnhanceArgs, out: &mut dyn Write) -> CliResult<()> {
    let rate = args.framing.sample_rate;
    let noisy = read_wav_expect(&args.noisy, rate)?;
    let clean = args
        .clean
        .as_ref()
        .map(|p| read_wav_expect(p, rate))
        .transpose()?;
    if let Some(c) = &clean {
        if c.len() != noisy.len() {
            return Err(Error::LengthMismatch {
                left: c.len(),
                right: noisy.len(),
            }
            .into());
        }
    }
    let clean_samples = clean.as_ref().map(|c| c.samples.as_slice());
    let need_clean = || {
        clean_samples.ok_or_else(|| CliError::Usage("--clean is required in oracle mode".into()))
    };

    let enhanced = match args.transform {
        Transform::GftSvd => {
            let basis = load_basis(require(&args.basis, "--basis", "for gft-svd")?)?;
            let framing = args.framing.config(basis.n())?;
            let params;
            let source = match args.mode {
                EnhanceMode::Oracle => MaskSource::Oracle {
                    clean: need_clean()?,
                    clip: args.clip.0,
                    eps: DEFAULT_EPS,
                },
                EnhanceMode::Model => {
                    let path = require(&args.checkpoint, "--checkpoint", "in model mode")?;
                    params = load_checkpoint(path, Some(&basis))?;
                    MaskSource::Estimator(&params)
                }
                EnhanceMode::Unity => MaskSource::Unity,
            };
            enhance_pipeline(&noisy.samples, &basis, &framing, source)?
        }
        t => {
            if args.mode == EnhanceMode::Model {
                return Err(CliError::Usage(format!(
                    "model mode needs --transform gft-svd, got {t}"
                )));
            }
            let framing = args.framing.config(args.n)?;
            let cbasis = match t {
                Transform::GftEvd => Some(decompose_evd(&build_adjacency(args.n, args.k)?)),
                _ => None,
            };
            let baseline = cbasis
                .as_ref()
                .map_or(ComplexBaseline::Stft, ComplexBaseline::GftEvd);
            match args.mode {
                EnhanceMode::Unity => oracle_complex_pipeline(
                    &noisy.samples,
                    &noisy.samples,
                    &framing,
                    baseline,
                    None,
                    DEFAULT_EPS,
                )?,
                _ => oracle_complex_pipeline(
                    &noisy.samples,
                    need_clean()?,
                    &framing,
                    baseline,
                    args.clip.0,
                    DEFAULT_EPS,
                )?,
            }
        }
    };

    write_wav(
        &args.out,
        &AudioClip::new(enhanced.clone(), rate)?,
        WavEncoding::Float32,
    )?;
    let report = EvalReport::evaluate(clean_samples, &noisy.samples, &enhanced)?;
    let name = args
        .noisy
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let rows = [(name, report)];
    match &args.metrics {
        Some(path) => write_metrics_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => write_metrics_csv(&rows, &mut *out)?,
    }
    Ok(())
}
