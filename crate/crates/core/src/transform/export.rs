//! CSV export of spectrograms: `frame,bin,value` for real graph spectra and
//! `frame,bin,real,imag` for complex ones, 9 significant digits.

use std::io::Write;

use super::{ComplexSpectrogram, TimeGraphSpectrogram};
use crate::error::Result;
use crate::numfmt::sig9;

pub fn write_graph_csv<W: Write>(spec: &TimeGraphSpectrogram, mut w: W) -> Result<()> {
    writeln!(w, "frame,bin,value")?;
    for ((m, j), &v) in spec.coeffs.indexed_iter() {
        writeln!(w, "{m},{j},{}", sig9(v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_complex_csv<W: Write>(spec: &ComplexSpectrogram, mut w: W) -> Result<()> {
    writeln!(w, "frame,bin,real,imag")?;
    for ((m, j), &re) in spec.real.indexed_iter() {
        writeln!(w, "{m},{j},{},{}", sig9(re), sig9(spec.imag[(m, j)]))?;
    }
    w.flush()?;
    Ok(())
}
