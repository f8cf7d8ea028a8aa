use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use gftsvd::audio_io::read_wav_expect;
use gftsvd::framing::frame_signal;
use gftsvd::graph_basis::{build_adjacency, decompose_evd, load_basis};
use gftsvd::transform::{
    analyze, gft_evd_forward, stft_forward, write_complex_csv, write_graph_csv, ComplexSpectrogram,
};

use super::with_suffix;
use crate::args::{require, RenderArgs, Transform};
use crate::error::{CliError, CliResult};
use crate::pgm::{self, Plane};

fn plane(frames: usize, bins: usize, values: impl Iterator<Item = f64>) -> Plane {
    Plane {
        frames,
        bins,
        values: values.collect(),
    }
}

fn complex_planes(spec: &ComplexSpectrogram) -> [Plane; 2] {
    let (f, b) = spec.real.dim();
    [
        plane(f, b, spec.real.iter().copied()),
        plane(f, b, spec.imag.iter().copied()),
    ]
}

/// Reads a `frame,bin,value` or `frame,bin,real,imag` CSV back into planes.
pub fn read_spectrogram_csv(path: &Path) -> CliResult<Vec<Plane>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let columns = match header
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .as_slice()
    {
        ["frame", "bin", "value"] => 1,
        ["frame", "bin", "real", "imag"] => 2,
        other => {
            return Err(CliError::Format(format!(
                "{}: unrecognized spectrogram header {other:?}",
                path.display()
            )))
        }
    };
    let mut cells: Vec<(usize, usize, [f64; 2])> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = || CliError::Format(format!("{}: bad record on line {}", path.display(), i + 2));
        let idx = |j: usize| {
            rec.get(j)
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(bad)
        };
        let val = |j: usize| {
            rec.get(j)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(bad)
        };
        let mut v = [0.0; 2];
        for (c, slot) in v.iter_mut().enumerate().take(columns) {
            *slot = val(2 + c)?;
        }
        cells.push((idx(0)?, idx(1)?, v));
    }
    let frames = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let bins = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
    let mut planes = vec![plane(frames, bins, std::iter::repeat_n(0.0, frames * bins)); columns];
    for (m, j, v) in cells {
        for (c, p) in planes.iter_mut().enumerate() {
            p.values[m * bins + j] = v[c];
        }
    }
    Ok(planes)
}

fn write_pgms(prefix: &Path, planes: &[Plane], out: &mut dyn Write) -> CliResult<()> {
    let names: &[&str] = if planes.len() == 1 {
        &[".pgm"]
    } else {
        &[".real.pgm", ".imag.pgm"]
    };
    for (p, suffix) in planes.iter().zip(names) {
        let path = with_suffix(prefix, suffix);
        fs::write(&path, pgm::encode(p))?;
        writeln!(out, "wrote {} ({} x {})", path.display(), p.bins, p.frames)?;
    }
    Ok(())
}

pub fn run(args: &RenderArgs, out: &mut dyn Write) -> CliResult<()> {
    let csv_path = with_suffix(&args.out, ".csv");
    let is_csv = args
        .input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let planes = read_spectrogram_csv(&args.input)?;
        if args.input != csv_path {
            fs::copy(&args.input, &csv_path)?;
        }
        return write_pgms(&args.out, &planes, out);
    }

    let clip = read_wav_expect(&args.input, args.framing.sample_rate)?;
    let csv_out = || -> CliResult<BufWriter<File>> { Ok(BufWriter::new(File::create(&csv_path)?)) };
    let planes: Vec<Plane> = match args.transform {
        Transform::GftSvd => {
            let basis = load_basis(require(&args.basis, "--basis", "for gft-svd")?)?;
            let spec = analyze(&clip.samples, &args.framing.config(basis.n())?, &basis)?;
            write_graph_csv(&spec, csv_out()?)?;
            let (f, b) = spec.coeffs.dim();
            vec![plane(f, b, spec.coeffs.iter().copied())]
        }
        Transform::GftEvd => {
            let frames = frame_signal(&clip.samples, &args.framing.config(args.n)?)?;
            let spec = gft_evd_forward(&frames, &decompose_evd(&build_adjacency(args.n, args.k)?))?;
            write_complex_csv(&spec, csv_out()?)?;
            complex_planes(&spec).into()
        }
        Transform::Stft => {
            let frames = frame_signal(&clip.samples, &args.framing.config(args.n)?)?;
            let spec = stft_forward(&frames)?;
            write_complex_csv(&spec, csv_out()?)?;
            complex_planes(&spec).into()
        }
    };
    writeln!(out, "wrote {}", csv_path.display())?;
    write_pgms(&args.out, &planes, out)
}
