//! Plain-text transition kernels.
//!
//! ```text
//! # comments and blank lines are ignored
//! n 3
//! inputs 0 0.3333333333333333 1
//! outputs 0 0.3333333333333333 1
//! 1 0 0
//! 0 1 0
//! 0 0 1
//! ```
//!
//! One row per input yield, one column per output yield. Numbers are written
//! in shortest round-trip form, so export followed by import is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use uconc_core::postproc::TransitionKernel;

use crate::error::{CliError, Result};

pub fn to_text(kernel: &TransitionKernel) -> String {
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::from("# transition kernel: rows are true yields, columns claimed yields\n");
    let _ = writeln!(out, "n {}", kernel.n);
    let _ = writeln!(out, "inputs {}", join(&kernel.inputs));
    let _ = writeln!(out, "outputs {}", join(&kernel.outputs));
    for row in &kernel.rows {
        let _ = writeln!(out, "{}", join(row));
    }
    out
}

pub fn from_text(text: &str, origin: &Path) -> Result<TransitionKernel> {
    let bad = |line: usize, message: String| CliError::Format { path: origin.into(), line, message };
    let floats = |line: usize, items: &[&str]| -> Result<Vec<f64>> {
        items
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(line, format!("not a number: {s:?}"))))
            .collect()
    };
    let mut n = None;
    let mut inputs = None;
    let mut outputs = None;
    let mut rows = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        last_line = i + 1;
        if line.is_empty() {
            continue;
        }
        let items: Vec<&str> = line.split_whitespace().collect();
        match items[0] {
            "n" => {
                let v = items.get(1).and_then(|s| s.parse::<u32>().ok());
                n = Some(v.ok_or_else(|| bad(i + 1, "expected `n <copies>`".into()))?);
            }
            "inputs" => inputs = Some(floats(i + 1, &items[1..])?),
            "outputs" => outputs = Some(floats(i + 1, &items[1..])?),
            _ => {
                if n.is_none() || inputs.is_none() || outputs.is_none() {
                    return Err(bad(i + 1, "rows must follow the n/inputs/outputs header".into()));
                }
                rows.push(floats(i + 1, &items)?);
            }
        }
    }
    let (Some(n), Some(inputs), Some(outputs)) = (n, inputs, outputs) else {
        return Err(bad(last_line, "missing n/inputs/outputs header".into()));
    };
    Ok(TransitionKernel::new(n, inputs, outputs, rows)?)
}

pub fn read(path: &Path) -> Result<TransitionKernel> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_text(&text, path)
}

pub fn write(path: &Path, kernel: &TransitionKernel) -> Result<()> {
    fs::write(path, to_text(kernel)).map_err(|e| CliError::io(path, e))
}
