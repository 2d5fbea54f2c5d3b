use std::path::PathBuf;

use clap::Args;
use skewtmix::inference::delta_test_from_logliks;

use crate::commands::num;
use crate::errors::{CliError, CliResult};
use crate::model::ModelDocument;

#[derive(Args)]
pub struct LrtestArgs {
    /// Fitted symmetric-t model document (null hypothesis)
    pub st_model: Option<PathBuf>,
    /// Fitted skew-t model document (alternative)
    pub t_model: Option<PathBuf>,
    /// Log-likelihood of the symmetric fit (explicit mode)
    #[arg(long)]
    pub st_loglik: Option<f64>,
    /// Log-likelihood of the skew fit (explicit mode)
    #[arg(long)]
    pub t_loglik: Option<f64>,
    /// Degrees of freedom of the test (explicit mode)
    #[arg(long)]
    pub r: Option<usize>,
}

pub fn run(args: LrtestArgs) -> CliResult<()> {
    let result = match (&args.st_model, &args.t_model) {
        (Some(st_path), Some(t_path)) => {
            if args.st_loglik.is_some() || args.t_loglik.is_some() || args.r.is_some() {
                return Err(CliError::Input(
                    "give either two model files or --st-loglik/--t-loglik/--r, not both".into(),
                ));
            }
            let st_doc = ModelDocument::load(st_path)?;
            let t_doc = ModelDocument::load(t_path)?;
            if st_doc.g != t_doc.g || st_doc.p != t_doc.p {
                return Err(CliError::Input(format!(
                    "mismatched models: ({}, {}) components/dimensions vs ({}, {})",
                    st_doc.g, st_doc.p, t_doc.g, t_doc.p
                )));
            }
            if st_doc
                .delta
                .iter()
                .any(|row| row.iter().any(|&v| v != 0.0))
            {
                return Err(CliError::Input(
                    "the null-hypothesis model must have zero skewness (all delta = 0)".into(),
                ));
            }
            let meta = |doc: &ModelDocument, path: &PathBuf| -> CliResult<f64> {
                doc.fit_meta.as_ref().map(|m| m.loglik).ok_or_else(|| {
                    CliError::Input(format!(
                        "{}: model has no fit_meta.loglik; use --st-loglik/--t-loglik",
                        path.display()
                    ))
                })
            };
            let loglik_st = meta(&st_doc, st_path)?;
            let loglik_t = meta(&t_doc, t_path)?;
            delta_test_from_logliks(loglik_st, loglik_t, st_doc.g * st_doc.p)
        }
        (None, None) => match (args.st_loglik, args.t_loglik, args.r) {
            (Some(lst), Some(lt), Some(r)) => delta_test_from_logliks(lst, lt, r),
            _ => {
                return Err(CliError::Input(
                    "explicit mode needs all of --st-loglik, --t-loglik, and --r".into(),
                ))
            }
        },
        _ => {
            return Err(CliError::Input(
                "model-file mode needs both the symmetric and the skew model paths".into(),
            ))
        }
    };

    if let Some(w) = &result.warning {
        eprintln!("warning: {w}");
    }
    println!(
        "LR={} r={} p={}",
        num(result.statistic),
        result.dof_r,
        num(result.p_value)
    );
    Ok(())
}
