//! Deterministic artifact writers: CSV data, summary JSON, gnuplot scripts.
//!
//! CSV numbers carry 17 significant digits with '.' decimal separator and
//! LF line endings, so repeated runs of the same configuration produce
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{json, Value};

/// Format one value with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Write a CSV file with a header row and formatted float columns.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> anyhow::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Assemble the run summary: scalar results, diagnostics, thresholds, the
/// resolved configuration, and the tool version.
pub fn summary(
    scenario: &str,
    config: &Value,
    results: Value,
    diagnostics: Value,
    thresholds: Value,
) -> Value {
    json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario,
        "config": config,
        "results": results,
        "diagnostics": diagnostics,
        "thresholds": thresholds,
    })
}

/// Machine-readable error document for failed runs.
pub fn error_json(module: &str, operation: &str, message: &str) -> Value {
    json!({
        "module": module,
        "operation": operation,
        "message": message,
    })
}

/// Map a core error to the subsystem it came from.
pub fn error_module(e: &cavity_eit::Error) -> &'static str {
    use cavity_eit::Error::*;
    match e {
        InvalidParam { .. } | UndefinedCooperativity => "core-model",
        NoDissipation | IllConditioned { .. } | PhaseUndefined { .. } => "steady-state-engine",
        WindowTooShort { .. }
        | StepSizeUnderflow { .. }
        | LedgerViolation { .. }
        | VanishingOutput { .. }
        | NoTransparencyWindow { .. } => "pulse-engine",
        ProtocolInvalid { .. } | InfeasiblePulse { .. } => "storage-synthesis",
        ControlOverlap { .. } | GridTooCoarse { .. } => "gate-protocol",
    }
}

/// A minimal gnuplot script plotting the named CSV columns.
pub fn plot_script(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(&str, usize, usize, &str)],
) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\n"));
    s.push_str(&format!("set ylabel '{ylabel}'\n"));
    s.push_str("set key outside\n");
    s.push_str("plot ");
    let parts: Vec<String> = series
        .iter()
        .map(|(file, x, y, label)| {
            format!("'{file}' using {x}:{y} with lines title '{label}' skip 1")
        })
        .collect();
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_17_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.25), "-2.5000000000000000e-1");
        assert_eq!(fmt_float(f64::NAN), "NaN");
        let v = std::f64::consts::PI;
        let parsed: f64 = fmt_float(v).parse().unwrap();
        assert_eq!(parsed, v, "17 significant digits round-trip f64");
    }

    #[test]
    fn csv_is_lf_terminated() {
        let dir = std::env::temp_dir().join("cavity-eit-emit-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        write_csv(&path, &["a", "b"], vec![vec![1.0, 2.0]].into_iter()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
        assert!(!text.contains('\r'));
    }
}
