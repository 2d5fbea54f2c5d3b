use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use crate::commands::{num, open_sink};
use crate::errors::CliResult;
use crate::model::ModelDocument;

#[derive(Args)]
pub struct SampleArgs {
    /// Model document to sample from
    pub model: PathBuf,
    /// Number of observations to draw
    #[arg(long)]
    pub n: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: SampleArgs) -> CliResult<()> {
    let params = ModelDocument::load(&args.model)?.to_mixture()?;
    let p = params.p();
    let (rows, labels) = skewtmix::dist::rfmmst(args.n, &params, args.seed)?;

    let mut sink = open_sink(args.out.as_deref())?;
    let mut text = String::new();
    for i in 1..=p {
        text.push_str(&format!("y{i},"));
    }
    text.push_str("component\n");
    for j in 0..args.n {
        for i in 0..p {
            text.push_str(&num(rows[(j, i)]));
            text.push(',');
        }
        text.push_str(&format!("{}\n", labels[j]));
    }
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}
