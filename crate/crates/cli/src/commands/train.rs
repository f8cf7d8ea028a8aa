use std::fs::File;
use std::io::{BufWriter, Write};

use gftsvd::audio_io::load_manifest;
use gftsvd::enhance::{save_checkpoint, train, MlpParams, TrainConfig, Utterance};
use gftsvd::graph_basis::load_basis;
use gftsvd::numfmt::sig9;

use super::{load_mixture, mixture_seed, sibling};
use crate::args::TrainArgs;
use crate::error::{CliError, CliResult};

pub const LOSS_CSV_HEADER: &str = "step,loss";

pub fn run(args: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let output_scale = args
        .clip
        .0
        .ok_or_else(|| CliError::Usage("the estimator needs a finite --clip".into()))?;
    let basis = load_basis(&args.basis)?;
    let framing = args.framing.config(basis.n())?;
    let entries = load_manifest(&args.manifest)?;
    let utterances = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            load_mixture(e, mixture_seed(args.seed, i), framing.sample_rate).map(|m| Utterance {
                id: m.id,
                noisy: m.noisy,
                clean: m.clean,
            })
        })
        .collect::<gftsvd::Result<Vec<_>>>()?;

    let n = basis.n();
    let mut params = MlpParams::init(
        &[n, args.hidden, n],
        output_scale,
        args.seed,
        basis.fingerprint(),
    )?;
    let cfg = TrainConfig {
        learning_rate: args.lr,
        steps: args.steps,
        batch_size: args.batch_size,
        seed: args.seed,
        ..Default::default()
    };
    let log = train(&mut params, &utterances, &basis, &framing, &cfg, |_, _| {})?;
    save_checkpoint(&params, &args.out)?;

    let loss_path = args
        .loss_log
        .clone()
        .unwrap_or_else(|| sibling(&args.out, ".loss.csv"));
    let mut w = BufWriter::new(File::create(&loss_path)?);
    writeln!(w, "{LOSS_CSV_HEADER}")?;
    for (step, loss) in log.losses.iter().enumerate() {
        writeln!(w, "{step},{}", sig9(*loss))?;
    }
    w.flush()?;
    writeln!(
        out,
        "trained {} steps on {} utterances; loss {} -> {}",
        log.losses.len(),
        utterances.len(),
        sig9(log.losses[0]),
        sig9(log.losses[log.losses.len() - 1])
    )?;
    writeln!(
        out,
        "wrote {} and {}",
        args.out.display(),
        loss_path.display()
    )?;
    Ok(())
}
