use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use nalgebra::DVector;
use skewtmix::dist::{dmst_log, skew_mean_coefficient};
use skewtmix::{ComponentDerived, MixtureParams};

use crate::commands::{num, open_sink};
use crate::errors::{CliError, CliResult};
use crate::model::ModelDocument;

#[derive(Args)]
pub struct GridArgs {
    /// Model document
    pub model: PathBuf,
    /// 1-based coordinate plotted on the x axis
    #[arg(long, default_value_t = 1)]
    pub xcol: usize,
    /// 1-based coordinate plotted on the y axis
    #[arg(long, default_value_t = 2)]
    pub ycol: usize,
    /// x range as "lo,hi" (derived from the model when omitted)
    #[arg(long)]
    pub xlim: Option<String>,
    /// y range as "lo,hi" (derived from the model when omitted)
    #[arg(long)]
    pub ylim: Option<String>,
    /// Points per axis
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// What to evaluate: density | cluster | component[:1,3,...]
    #[arg(long, default_value = "density")]
    pub mode: String,
    /// Fix a non-axis coordinate, as "index=value" (repeatable; 1-based)
    #[arg(long = "fix")]
    pub fixes: Vec<String>,
    /// RNG seed for the CDF integrator (shared across the whole grid)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target accuracy for the t-distribution CDF integrator
    #[arg(long, default_value_t = 1e-5)]
    pub cdf_tol: f64,
    /// Output CSV (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Mode {
    Density,
    Cluster,
    Component(Vec<usize>),
}

fn parse_mode(spec: &str, g: usize) -> CliResult<Mode> {
    match spec {
        "density" => Ok(Mode::Density),
        "cluster" => Ok(Mode::Cluster),
        "component" => Ok(Mode::Component((1..=g).collect())),
        other => {
            let Some(list) = other.strip_prefix("component:") else {
                return Err(CliError::Input(format!(
                    "unknown mode {other:?} (expected density, cluster, or component[:list])"
                )));
            };
            let mut ids = Vec::new();
            for item in list.split(',') {
                let id: usize = item.trim().parse().map_err(|_| {
                    CliError::Input(format!("bad component id {item:?} in --mode"))
                })?;
                if id == 0 || id > g {
                    return Err(CliError::Input(format!(
                        "component id {id} out of range 1..={g}"
                    )));
                }
                ids.push(id);
            }
            if ids.is_empty() {
                return Err(CliError::Input("empty component list in --mode".into()));
            }
            Ok(Mode::Component(ids))
        }
    }
}

fn parse_lim(spec: &str, flag: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = spec.split(',').collect();
    let err = || CliError::Input(format!("--{flag} must be \"lo,hi\" with lo < hi"));
    if parts.len() != 2 {
        return Err(err());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| err())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(err());
    }
    Ok((lo, hi))
}

/// Data range covered by the mixture along coordinate `k` (0-based):
/// component centers (location plus the mean shift that skewness induces)
/// padded by four scale lengths.
fn auto_lim(params: &MixtureParams, k: usize) -> CliResult<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for comp in &params.components {
        let derived = ComponentDerived::new(comp).map_err(CliError::from)?;
        let center = if comp.nu > 1.0 {
            comp.mu[k] + skew_mean_coefficient(comp.nu) * comp.delta[k]
        } else {
            comp.mu[k]
        };
        let spread = 4.0 * derived.omega.matrix()[(k, k)].sqrt();
        lo = lo.min(center - spread);
        hi = hi.max(center + spread);
    }
    Ok((lo, hi))
}

pub fn run(args: GridArgs) -> CliResult<()> {
    let params = ModelDocument::load(&args.model)?.to_mixture()?;
    let p = params.p();
    let g = params.g();

    if args.xcol == 0 || args.xcol > p || args.ycol == 0 || args.ycol > p {
        return Err(CliError::Input(format!(
            "--xcol/--ycol must be in 1..={p} for this model"
        )));
    }
    if args.xcol == args.ycol {
        return Err(CliError::Input("--xcol and --ycol must differ".into()));
    }
    if args.grid < 2 {
        return Err(CliError::Input("--grid must be at least 2".into()));
    }
    let (xi, yi) = (args.xcol - 1, args.ycol - 1);

    // Every coordinate that is not on an axis must be pinned by --fix.
    let mut fixed: Vec<Option<f64>> = vec![None; p];
    for spec in &args.fixes {
        let (idx_s, val_s) = spec.split_once('=').ok_or_else(|| {
            CliError::Input(format!("--fix must be \"index=value\", got {spec:?}"))
        })?;
        let idx: usize = idx_s.trim().parse().map_err(|_| {
            CliError::Input(format!("bad coordinate index in --fix {spec:?}"))
        })?;
        if idx == 0 || idx > p {
            return Err(CliError::Input(format!(
                "--fix coordinate {idx} out of range 1..={p}"
            )));
        }
        if idx - 1 == xi || idx - 1 == yi {
            return Err(CliError::Input(format!(
                "--fix coordinate {idx} is an axis coordinate"
            )));
        }
        let val: f64 = val_s.trim().parse().map_err(|_| {
            CliError::Input(format!("bad value in --fix {spec:?}"))
        })?;
        if fixed[idx - 1].replace(val).is_some() {
            return Err(CliError::Input(format!(
                "coordinate {idx} fixed more than once"
            )));
        }
    }
    for k in 0..p {
        if k != xi && k != yi && fixed[k].is_none() {
            return Err(CliError::Input(format!(
                "coordinate {} must be fixed with --fix for a {p}-dimensional model",
                k + 1
            )));
        }
    }

    let mode = parse_mode(&args.mode, g)?;
    let (xlo, xhi) = match &args.xlim {
        Some(s) => parse_lim(s, "xlim")?,
        None => auto_lim(&params, xi)?,
    };
    let (ylo, yhi) = match &args.ylim {
        Some(s) => parse_lim(s, "ylim")?,
        None => auto_lim(&params, yi)?,
    };

    let m = args.grid;
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (m - 1) as f64;
    let ln_pro: Vec<f64> = params.pro.iter().map(|&w| w.ln()).collect();

    let mut sink = open_sink(args.out.as_deref())?;
    let mut text = String::from("x,y");
    match &mode {
        Mode::Density | Mode::Cluster => text.push_str(",value"),
        Mode::Component(ids) => {
            for id in ids {
                text.push_str(&format!(",f_{id}"));
            }
        }
    }
    text.push('\n');

    let mut point = DVector::zeros(p);
    for (k, v) in fixed.iter().enumerate() {
        if let Some(v) = v {
            point[k] = *v;
        }
    }
    for i in 0..m {
        let x = step(xlo, xhi, i);
        for j in 0..m {
            let y = step(ylo, yhi, j);
            point[xi] = x;
            point[yi] = y;
            text.push_str(&num(x));
            text.push(',');
            text.push_str(&num(y));
            match &mode {
                Mode::Density => {
                    let lf = skewtmix::dist::dfmmst_log(&point, &params, args.cdf_tol, args.seed)
                        .map_err(CliError::from)?;
                    text.push(',');
                    text.push_str(&num(lf.exp()));
                }
                Mode::Cluster => {
                    let mut best = 0usize;
                    let mut best_val = f64::NEG_INFINITY;
                    for (h, comp) in params.components.iter().enumerate() {
                        let lf = dmst_log(&point, comp, args.cdf_tol, args.seed)
                            .map_err(CliError::from)?;
                        let v = ln_pro[h] + lf;
                        if v > best_val {
                            best_val = v;
                            best = h;
                        }
                    }
                    text.push_str(&format!(",{}", best + 1));
                }
                Mode::Component(ids) => {
                    for &id in ids {
                        let lf = dmst_log(&point, &params.components[id - 1], args.cdf_tol, args.seed)
                            .map_err(CliError::from)?;
                        text.push(',');
                        text.push_str(&num(lf.exp()));
                    }
                }
            }
            text.push('\n');
        }
    }
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}
