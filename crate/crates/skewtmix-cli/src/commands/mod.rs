pub mod classify;
pub mod density;
pub mod fit;
pub mod grid;
pub mod lrtest;
pub mod sample;

use std::io::Write;
use std::path::Path;

use crate::errors::{CliError, CliResult};

/// Open `path` for writing, or standard output when `path` is `None`.
pub fn open_sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::BufWriter::new(std::io::stdout()))),
    }
}

/// Render a float for CSV/report output: 10 significant digits, no
/// trailing zeros, scientific only when fixed notation would be unwieldy.
pub fn num(x: f64) -> String {
    skewtmix::fmt::format_sig(x, 10)
}
