use std::io::Write;

use gftsvd::graph_basis::{build_adjacency, decompose_svd, save_basis};
use gftsvd::numfmt::sig9;

use crate::args::BasisArgs;
use crate::error::CliResult;

pub fn run(args: &BasisArgs, out: &mut dyn Write) -> CliResult<()> {
    let a = build_adjacency(args.n, args.k)?;
    let basis = decompose_svd(&a)?;
    save_basis(&basis, &args.out)?;
    let sigma = basis.sigma();
    writeln!(out, "fingerprint {}", basis.fingerprint().to_hex())?;
    writeln!(
        out,
        "n {} k {} sigma_max {} sigma_min {}",
        args.n,
        args.k,
        sig9(sigma[0]),
        sig9(sigma[sigma.len() - 1])
    )?;
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}
