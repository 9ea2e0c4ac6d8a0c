//! Parsers for spectra, `n` ladders and figures of merit given on the command line.

use std::fs;
use std::path::Path;

use uconc_core::postproc::YieldMeasure;
use uconc_core::SchmidtSpectrum;

use crate::error::{CliError, Result};

fn arg(msg: impl Into<String>) -> CliError {
    CliError::Argument(msg.into())
}

/// `"3/4,1/4"` (exact) or `"0.75,0.25"` (floating point). A leading `@`
/// reads the list from a file, where newlines also separate entries.
pub fn parse_spectrum(text: &str) -> Result<SchmidtSpectrum> {
    let owned;
    let body = match text.strip_prefix('@') {
        Some(path) => {
            owned = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            owned.as_str()
        }
        None => text,
    };
    let items: Vec<&str> = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(arg("empty spectrum"));
    }
    let exact = items.iter().all(|s| s.chars().all(|c| c.is_ascii_digit() || c == '/'));
    if exact {
        let fracs = items
            .iter()
            .map(|s| {
                let (num, den) = s.split_once('/').unwrap_or((s, "1"));
                let num: i64 = num.parse().map_err(|_| arg(format!("bad numerator in {s:?}")))?;
                let den: i64 = den.parse().map_err(|_| arg(format!("bad denominator in {s:?}")))?;
                if den == 0 {
                    return Err(arg(format!("zero denominator in {s:?}")));
                }
                Ok((num, den))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SchmidtSpectrum::from_fractions(&fracs)?)
    } else {
        let floats = items
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| arg(format!("bad probability {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(SchmidtSpectrum::from_floats(floats)?)
    }
}

/// `"50,100,200"` or an inclusive range with step, `"10..=100:10"`.
pub fn parse_ladder(text: &str) -> Result<Vec<u32>> {
    if text.contains("..") {
        let (range, step) = text.split_once(':').unwrap_or((text, "1"));
        let (lo, hi) = range.split_once("..=").ok_or_else(|| arg(format!("expected a..=b, got {range:?}")))?;
        let lo: u32 = lo.trim().parse().map_err(|_| arg(format!("bad range start {lo:?}")))?;
        let hi: u32 = hi.trim().parse().map_err(|_| arg(format!("bad range end {hi:?}")))?;
        let step: usize = step.trim().parse().map_err(|_| arg(format!("bad step {step:?}")))?;
        if step == 0 || lo > hi {
            return Err(arg(format!("empty range {text:?}")));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    let v = text
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| arg(format!("bad copy count {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(arg("empty ladder"));
    }
    Ok(v)
}

/// `step@R`, `linear`, or `table:PATH` with one `x f(x)` pair per line.
pub fn parse_measure(text: &str) -> Result<YieldMeasure> {
    if text == "linear" {
        return Ok(YieldMeasure::Linear);
    }
    if let Some(r) = text.strip_prefix("step@") {
        let threshold: f64 = r.parse().map_err(|_| arg(format!("bad step threshold {r:?}")))?;
        return Ok(YieldMeasure::Step { threshold });
    }
    if let Some(path) = text.strip_prefix("table:") {
        return read_table(Path::new(path));
    }
    Err(arg(format!("unknown measure {text:?}; expected step@R, linear or table:PATH")))
}

fn read_table(path: &Path) -> Result<YieldMeasure> {
    let body = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut knots = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| CliError::Format { path: path.into(), line: i + 1, message: message.into() };
        let mut it = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let x: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("expected x"))?;
        let y: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("expected f(x)"))?;
        if it.next().is_some() {
            return Err(bad("expected exactly two columns"));
        }
        knots.push((x, y));
    }
    if knots.is_empty() {
        return Err(CliError::Format { path: path.into(), line: 0, message: "no knots".into() });
    }
    Ok(YieldMeasure::Table(knots))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectra() {
        let exact = parse_spectrum("1/4, 3/4").unwrap();
        assert!(exact.is_exact());
        assert_eq!(exact.to_f64(), vec![0.75, 0.25]);
        assert!(parse_spectrum("1,0").unwrap().is_exact());
        let float = parse_spectrum("0.6,0.4").unwrap();
        assert!(!float.is_exact());
        assert!(parse_spectrum("1/2,1/3").is_err());
        assert!(parse_spectrum("1/0,1").is_err());
        assert!(parse_spectrum("").is_err());
        assert!(parse_spectrum("a,b").is_err());
    }

    #[test]
    fn spectrum_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        fs::write(&path, "1/2\n1/3\n1/6\n").unwrap();
        let p = parse_spectrum(&format!("@{}", path.display())).unwrap();
        assert_eq!(p.d(), 3);
        assert!(matches!(parse_spectrum("@/nonexistent/x"), Err(CliError::Io { .. })));
    }

    #[test]
    fn ladders() {
        assert_eq!(parse_ladder("50,100").unwrap(), vec![50, 100]);
        assert_eq!(parse_ladder("10..=30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_ladder("1..=3").unwrap(), vec![1, 2, 3]);
        assert!(parse_ladder("3..=1").is_err());
        assert!(parse_ladder("x").is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(parse_measure("linear").unwrap(), YieldMeasure::Linear);
        assert_eq!(parse_measure("step@0.6").unwrap(), YieldMeasure::Step { threshold: 0.6 });
        assert!(parse_measure("cubic").is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        fs::write(&path, "# x f\n0 0\n0.5 0.2\n1 1\n").unwrap();
        let m = parse_measure(&format!("table:{}", path.display())).unwrap();
        assert_eq!(m, YieldMeasure::Table(vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]));
        fs::write(&path, "0 0 0\n").unwrap();
        assert!(matches!(parse_measure(&format!("table:{}", path.display())), Err(CliError::Format { .. })));
    }
}
