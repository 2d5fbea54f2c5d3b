use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use skewtmix::{fmmst, fmmt, FitOptions, InitSign, PartialParams};

use crate::commands::num;
use crate::errors::{CliError, CliResult};
use crate::model::{FitMeta, ModelDocument, PartialDocument};
use crate::InputArgs;

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of mixture components
    #[arg(long)]
    pub g: usize,
    /// Maximum EM iterations
    #[arg(long, default_value_t = 100)]
    pub itmax: usize,
    /// Convergence tolerance on the likelihood sequence
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// k-means restarts used to seed the initial partition
    #[arg(long, default_value_t = 20)]
    pub nkmeans: usize,
    /// RNG seed (integration and initialization)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target accuracy for the t-distribution CDF integrator
    #[arg(long, default_value_t = 1e-5)]
    pub cdf_tol: f64,
    /// JSON file pinning parameters at fixed values during the fit
    #[arg(long)]
    pub known: Option<PathBuf>,
    /// JSON file with starting values (any subset of parameters)
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Where to write the fitted model document
    #[arg(long, default_value = "model.json")]
    pub model_out: PathBuf,
    /// Where to write per-row assignments (row_id, cluster, tau_1..tau_g)
    #[arg(long, default_value = "assignments.csv")]
    pub assign_out: PathBuf,
    /// Suppress the per-iteration likelihood trace
    #[arg(long)]
    pub quiet: bool,
    /// Fit the symmetric special case (skewness pinned at zero)
    #[arg(long)]
    pub symmetric: bool,
    /// Starting-value scatter adjustment: deflate (moment) or inflate (paper)
    #[arg(long, value_parser = ["moment", "paper"], default_value = "moment")]
    pub init_sign: String,
}

pub fn run(args: FitArgs) -> CliResult<()> {
    if args.g == 0 {
        return Err(CliError::Input("--g must be at least 1".into()));
    }
    let table = args.input.read()?;
    let p = table.data.p();

    let load_partial = |path: &Option<PathBuf>| -> CliResult<PartialParams> {
        match path {
            Some(p_) => PartialDocument::load(p_)?.to_partial(p),
            None => Ok(PartialParams::default()),
        }
    };
    let known = load_partial(&args.known)?;
    let initial = load_partial(&args.initial)?;

    let opts = FitOptions {
        itmax: args.itmax,
        eps: args.eps,
        nkmeans: args.nkmeans,
        cdf_tol: args.cdf_tol,
        seed: args.seed,
        verbose: !args.quiet,
        init_sign: if args.init_sign == "paper" {
            InitSign::Paper
        } else {
            InitSign::Moment
        },
        ..FitOptions::default()
    };

    let initial = (!initial.is_empty()).then_some(&initial);
    let known = (!known.is_empty()).then_some(&known);
    let fit = if args.symmetric {
        fmmt(args.g, &table.data, initial, known, &opts)?
    } else {
        fmmst(args.g, &table.data, initial, known, &opts)?
    };

    let meta = FitMeta {
        loglik: fit.loglik,
        aic: fit.aic,
        bic: fit.bic,
        iterations: fit.iterations,
        converged: fit.converged,
        seed: args.seed,
        generator: if args.symmetric { "fmmt" } else { "fmmst" }.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
    };
    ModelDocument::from_mixture(&fit.params, Some(meta)).save(&args.model_out)?;

    let mut out = std::fs::File::create(&args.assign_out).map_err(|e| {
        CliError::Input(format!("cannot write {}: {e}", args.assign_out.display()))
    })?;
    let mut text = String::from("row_id,cluster");
    for h in 1..=args.g {
        text.push_str(&format!(",tau_{h}"));
    }
    text.push('\n');
    for (j, &row_id) in table.row_ids.iter().enumerate() {
        text.push_str(&format!("{row_id},{}", fit.clusters[j]));
        for h in 0..args.g {
            text.push(',');
            text.push_str(&num(fit.tau[(h, j)]));
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(e.to_string()))?;

    if !args.quiet {
        println!("loglik = {}", num(fit.loglik));
        println!("aic = {}", num(fit.aic));
        println!("bic = {}", num(fit.bic));
        println!(
            "iterations = {} converged = {}",
            fit.iterations, fit.converged
        );
        println!("model written to {}", args.model_out.display());
        println!("assignments written to {}", args.assign_out.display());
    }
    Ok(())
}
