use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use crate::commands::{num, open_sink};
use crate::errors::{CliError, CliResult};
use crate::model::ModelDocument;
use crate::InputArgs;

#[derive(Args)]
pub struct ClassifyArgs {
    /// Model document
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    /// RNG seed for the CDF integrator
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target accuracy for the t-distribution CDF integrator
    #[arg(long, default_value_t = 1e-5)]
    pub cdf_tol: f64,
    /// Output CSV (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: ClassifyArgs) -> CliResult<()> {
    let params = ModelDocument::load(&args.model)?.to_mixture()?;
    let table = args.input.read()?;
    if table.data.p() != params.p() {
        return Err(CliError::Input(format!(
            "data has {} columns but the model is {}-dimensional",
            table.data.p(),
            params.p()
        )));
    }
    let opts = skewtmix::FitOptions {
        cdf_tol: args.cdf_tol,
        seed: args.seed,
        ..skewtmix::FitOptions::default()
    };
    let tau = skewtmix::inference::posterior_probabilities(&table.data, &params, &opts)?;
    // Highest posterior wins; ties go to the smallest component index.
    let clusters: Vec<usize> = (0..tau.ncols())
        .map(|j| {
            let col = tau.column(j);
            let mut best = 0;
            for h in 1..col.len() {
                if col[h] > col[best] {
                    best = h;
                }
            }
            best + 1
        })
        .collect();

    let g = params.g();
    let mut sink = open_sink(args.out.as_deref())?;
    let mut text = String::from("row_id,cluster");
    for h in 1..=g {
        text.push_str(&format!(",tau_{h}"));
    }
    text.push('\n');
    for (j, &row_id) in table.row_ids.iter().enumerate() {
        text.push_str(&format!("{row_id},{}", clusters[j]));
        for h in 0..g {
            text.push(',');
            text.push_str(&num(tau[(h, j)]));
        }
        text.push('\n');
    }
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}
