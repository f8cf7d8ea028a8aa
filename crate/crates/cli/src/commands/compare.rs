//! Oracle-mask sweep: one row per (file, transform, k).

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use gftsvd::audio_io::load_manifest;
use gftsvd::enhance::{
    enhance_pipeline, oracle_complex_pipeline, ComplexBaseline, MaskSource, DEFAULT_EPS,
};
use gftsvd::framing::FramingConfig;
use gftsvd::graph_basis::{
    build_adjacency, decompose_evd, load_basis, ComplexGraphBasis, GraphBasis,
};
use gftsvd::metrics::si_sdr;
use gftsvd::numfmt::sig9;
use rayon::prelude::*;

use super::{basis_file_name, load_mixture, mixture_seed, sibling, Mixture};
use crate::args::{CompareArgs, Transform};
use crate::error::{CliError, CliResult};

pub const COMPARE_CSV_HEADER: [&str; 8] = [
    "file",
    "transform",
    "k",
    "status",
    "si_sdr_noisy_db",
    "si_sdr_enhanced_db",
    "si_sdr_imp_db",
    "error",
];

pub const TIMING_CSV_HEADER: [&str; 6] =
    ["file", "transform", "k", "seconds", "audio_seconds", "rtf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub noisy_db: f64,
    pub enhanced_db: f64,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub file: String,
    pub transform: Transform,
    pub k: usize,
    pub result: Result<Scores, String>,
    pub seconds: f64,
    pub audio_seconds: f64,
}

struct Bases {
    svd: BTreeMap<usize, Result<GraphBasis, String>>,
    evd: BTreeMap<usize, Result<ComplexGraphBasis, String>>,
}

fn load_bases(args: &CompareArgs) -> Bases {
    let mut svd = BTreeMap::new();
    let mut evd = BTreeMap::new();
    for &k in &args.k {
        if args.transform.contains(&Transform::GftSvd) {
            let path = args.basis.join(basis_file_name(args.n, k));
            let loaded = load_basis(&path)
                .map_err(|e| format!("{}: {e}", path.display()))
                .and_then(|b| {
                    if b.n() == args.n && b.k() == k {
                        Ok(b)
                    } else {
                        Err(format!(
                            "{} holds a basis for n={} k={}",
                            path.display(),
                            b.n(),
                            b.k()
                        ))
                    }
                });
            svd.insert(k, loaded);
        }
        if args.transform.contains(&Transform::GftEvd) {
            let cb = build_adjacency(args.n, k)
                .map(|a| decompose_evd(&a))
                .map_err(|e| e.to_string());
            evd.insert(k, cb);
        }
    }
    Bases { svd, evd }
}

fn score(
    mix: &Mixture,
    transform: Transform,
    k: usize,
    bases: &Bases,
    args: &CompareArgs,
) -> Result<Scores, String> {
    let stft_framing = || args.framing.config(args.n).map_err(|e| e.to_string());
    let enhanced = match transform {
        Transform::GftSvd => {
            let basis = bases.svd[&k].as_ref().map_err(Clone::clone)?;
            let framing: FramingConfig = stft_framing()?;
            let source = MaskSource::Oracle {
                clean: &mix.clean,
                clip: args.clip.0,
                eps: DEFAULT_EPS,
            };
            enhance_pipeline(&mix.noisy, basis, &framing, source)
        }
        Transform::GftEvd => {
            let cb = bases.evd[&k].as_ref().map_err(Clone::clone)?;
            oracle_complex_pipeline(
                &mix.noisy,
                &mix.clean,
                &stft_framing()?,
                ComplexBaseline::GftEvd(cb),
                args.clip.0,
                DEFAULT_EPS,
            )
        }
        Transform::Stft => oracle_complex_pipeline(
            &mix.noisy,
            &mix.clean,
            &stft_framing()?,
            ComplexBaseline::Stft,
            args.clip.0,
            DEFAULT_EPS,
        ),
    }
    .map_err(|e| e.to_string())?;
    let noisy_db = si_sdr(&mix.noisy, &mix.clean).map_err(|e| e.to_string())?;
    let enhanced_db = si_sdr(&enhanced, &mix.clean).map_err(|e| e.to_string())?;
    Ok(Scores {
        noisy_db,
        enhanced_db,
    })
}

/// Runs the sweep and returns rows in manifest order, then transform, then k.
pub fn sweep(args: &CompareArgs) -> CliResult<Vec<Row>> {
    if args.k.is_empty() || args.transform.is_empty() {
        return Err(CliError::Usage(
            "--k and --transform must not be empty".into(),
        ));
    }
    args.framing.config(args.n)?;
    let entries = load_manifest(&args.manifest)?;
    let rate = args.framing.sample_rate;
    let bases = load_bases(args);

    let work = || -> Vec<Row> {
        let mixtures: Vec<Result<Mixture, String>> = entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| {
                load_mixture(e, mixture_seed(args.seed, i), rate).map_err(|e| e.to_string())
            })
            .collect();
        let jobs: Vec<(usize, Transform, usize)> = (0..entries.len())
            .flat_map(|i| {
                args.transform
                    .iter()
                    .flat_map(move |&t| args.k.iter().map(move |&k| (i, t, k)))
            })
            .collect();
        jobs.par_iter()
            .map(|&(i, transform, k)| {
                let start = Instant::now();
                let (result, audio_seconds) = match &mixtures[i] {
                    Ok(mix) => (
                        score(mix, transform, k, &bases, args),
                        mix.noisy.len() as f64 / rate as f64,
                    ),
                    Err(e) => (Err(e.clone()), 0.0),
                };
                Row {
                    file: entries[i].id.clone(),
                    transform,
                    k,
                    result,
                    seconds: start.elapsed().as_secs_f64(),
                    audio_seconds,
                }
            })
            .collect()
    };
    match args.jobs {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))
            .map(|pool| pool.install(work)),
        None => Ok(work()),
    }
}

/// Data rows, then one `MEAN` row per (transform, k) over the successful rows.
pub fn write_results<W: Write>(rows: &[Row], args: &CompareArgs, w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COMPARE_CSV_HEADER)?;
    for r in rows {
        let (status, noisy, enhanced, imp, err) = match &r.result {
            Ok(s) => (
                "ok",
                sig9(s.noisy_db),
                sig9(s.enhanced_db),
                sig9(s.enhanced_db - s.noisy_db),
                String::new(),
            ),
            Err(e) => (
                "failed",
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ),
        };
        out.write_record([
            r.file.as_str(),
            r.transform.name(),
            &r.k.to_string(),
            status,
            &noisy,
            &enhanced,
            &imp,
            &err,
        ])?;
    }
    for &t in &args.transform {
        for &k in &args.k {
            let ok: Vec<&Scores> = rows
                .iter()
                .filter(|r| r.transform == t && r.k == k)
                .filter_map(|r| r.result.as_ref().ok())
                .collect();
            let mean = |f: fn(&Scores) -> f64| {
                if ok.is_empty() {
                    String::new()
                } else {
                    sig9(ok.iter().map(|s| f(s)).sum::<f64>() / ok.len() as f64)
                }
            };
            let status = if ok.is_empty() { "failed" } else { "ok" };
            out.write_record([
                "MEAN",
                t.name(),
                &k.to_string(),
                status,
                &mean(|s| s.noisy_db),
                &mean(|s| s.enhanced_db),
                &mean(|s| s.enhanced_db - s.noisy_db),
                "",
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_timing<W: Write>(rows: &[Row], w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TIMING_CSV_HEADER)?;
    for r in rows {
        let rtf = if r.audio_seconds > 0.0 {
            sig9(r.seconds / r.audio_seconds)
        } else {
            String::new()
        };
        out.write_record([
            r.file.as_str(),
            r.transform.name(),
            &r.k.to_string(),
            &sig9(r.seconds),
            &sig9(r.audio_seconds),
            &rtf,
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn run(args: &CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    let rows = sweep(args)?;
    write_results(&rows, args, std::fs::File::create(&args.out)?)?;
    let timing = sibling(&args.out, ".timing.csv");
    write_timing(&rows, std::fs::File::create(&timing)?)?;
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    writeln!(
        out,
        "{} rows ({} failed) -> {}; timings -> {}",
        rows.len(),
        failed,
        args.out.display(),
        timing.display()
    )?;
    if failed > 0 {
        return Err(CliError::Partial {
            failed,
            total: rows.len(),
        });
    }
    Ok(())
}
