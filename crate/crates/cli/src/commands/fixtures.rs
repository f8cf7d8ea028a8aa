use std::io::Write;

use gftsvd::fixtures::{write_fixture_set, FixtureConfig};

use crate::args::FixturesArgs;
use crate::error::CliResult;

pub fn run(args: &FixturesArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = FixtureConfig {
        count: args.count,
        clean_secs: args.clean_secs,
        noise_secs: args.noise_secs,
        snr_db: args.snr,
        seed: args.seed,
        ..Default::default()
    };
    let set = write_fixture_set(&args.out, &cfg)?;
    writeln!(
        out,
        "wrote {} clean files, 2 noise files and {}",
        set.clean.len(),
        set.manifest.display()
    )?;
    Ok(())
}
