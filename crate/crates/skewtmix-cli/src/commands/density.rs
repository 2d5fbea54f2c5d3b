use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use crate::commands::{num, open_sink};
use crate::errors::{CliError, CliResult};
use crate::model::ModelDocument;
use crate::InputArgs;

#[derive(Args)]
pub struct DensityArgs {
    /// Model document
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    /// Report log-densities instead of densities
    #[arg(long)]
    pub log: bool,
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

pub fn run(args: DensityArgs) -> CliResult<()> {
    let params = ModelDocument::load(&args.model)?.to_mixture()?;
    let table = args.input.read()?;
    if table.data.p() != params.p() {
        return Err(CliError::Input(format!(
            "data has {} columns but the model is {}-dimensional",
            table.data.p(),
            params.p()
        )));
    }

    let mut sink = open_sink(args.out.as_deref())?;
    let mut text = String::from(if args.log {
        "row_id,log_density\n"
    } else {
        "row_id,density\n"
    });
    for (j, &row_id) in table.row_ids.iter().enumerate() {
        let y = table.data.rows.row(j).transpose();
        let lf = skewtmix::dist::dfmmst_log(&y, &params, args.cdf_tol, args.seed)?;
        let value = if args.log { lf } else { lf.exp() };
        text.push_str(&format!("{row_id},{}\n", num(value)));
    }
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}
