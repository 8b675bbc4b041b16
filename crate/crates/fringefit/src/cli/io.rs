//! CSV readers and writers for samples, estimates, comparison curves, and
//! visibility histograms.
//!
//! All files are UTF-8 with LF line endings.  Real numbers are written with
//! 17 significant digits so that parsing them back reproduces the exact
//! `f64`, and re-serializing a parsed file is byte-identical.  Writers go
//! through a temp-file-and-rename step so readers never observe a partially
//! written file.

use crate::error::{Error, Result};
use crate::harness::{DeltaECurve, VisibilityHistogram};
use crate::model::{AuxShiftGrid, EstimateStatus, FringeSample, PhaseEstimate};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

const SAMPLES_HEADER: &str = "sample_id,j,delta,n_o,n_h";
const ESTIMATES_HEADER: &str =
    "sample_id,method,status,phase,mean_o,mean_h,amplitude,norm_vis,converged";

/// Estimation method identifier carried in estimate files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GaussDft,
    PoissonMl,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::GaussDft => "gauss-dft",
            Method::PoissonMl => "poisson-ml",
        }
    }

    fn parse(s: &str) -> Option<Method> {
        match s {
            "gauss-dft" => Some(Method::GaussDft),
            "poisson-ml" => Some(Method::PoissonMl),
            _ => None,
        }
    }
}

/// One row of an estimate file: the per-sample estimate plus bookkeeping.
#[derive(Debug, Clone)]
pub struct EstimateRow {
    pub sample_id: u64,
    pub method: Method,
    pub estimate: PhaseEstimate,
    pub converged: bool,
}

/// Format a real number with enough digits to round-trip exactly.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `contents` to `path` atomically (temp file in the same directory,
/// then rename over the target).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path `{}` has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn parse_err(path: &Path, line: usize, msg: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    }
}

fn parse_f64(path: &Path, line: usize, field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|e| parse_err(path, line, format!("bad {field} `{s}`: {e}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite {field} `{s}`")));
    }
    Ok(v)
}

fn parse_u64(path: &Path, line: usize, field: &str, s: &str) -> Result<u64> {
    s.parse()
        .map_err(|e| parse_err(path, line, format!("bad {field} `{s}`: {e}")))
}

/// Serialize a batch of fringe samples.
pub fn render_samples(ids: &[u64], samples: &[FringeSample]) -> String {
    let mut out = String::from(SAMPLES_HEADER);
    out.push('\n');
    for (id, sample) in ids.iter().zip(samples) {
        let shifts = sample.grid().shifts();
        for (j, &delta) in shifts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{id},{j},{},{},{}",
                fmt_real(delta),
                sample.counts_o()[j],
                sample.counts_h()[j]
            );
        }
    }
    out
}

pub fn write_samples(path: &Path, ids: &[u64], samples: &[FringeSample]) -> Result<()> {
    write_atomic(path, &render_samples(ids, samples))
}

/// Read a sample file back into ids plus samples.  All samples must share
/// one equidistant shift grid and ids must not repeat across blocks.
pub fn read_samples(path: &Path) -> Result<(Vec<u64>, Vec<FringeSample>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SAMPLES_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(
                path,
                1,
                format!("expected header `{SAMPLES_HEADER}`, got `{header}`"),
            ))
        }
        None => return Err(Error::EmptyInput("sample file")),
    }

    struct Block {
        id: u64,
        deltas: Vec<f64>,
        counts_o: Vec<u64>,
        counts_h: Vec<u64>,
    }
    let mut blocks: Vec<Block> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let id = parse_u64(path, line_no, "sample_id", fields[0])?;
        let j = parse_u64(path, line_no, "position index", fields[1])? as usize;
        let delta = parse_f64(path, line_no, "delta", fields[2])?;
        let n_o = parse_u64(path, line_no, "n_o", fields[3])?;
        let n_h = parse_u64(path, line_no, "n_h", fields[4])?;

        let start_new = blocks.last().map(|b| b.id != id).unwrap_or(true);
        if start_new {
            blocks.push(Block {
                id,
                deltas: Vec::new(),
                counts_o: Vec::new(),
                counts_h: Vec::new(),
            });
        }
        let block = blocks.last_mut().expect("block was just ensured");
        if j != block.deltas.len() {
            return Err(parse_err(
                path,
                line_no,
                format!("position index {j} out of order (expected {})", block.deltas.len()),
            ));
        }
        block.deltas.push(delta);
        block.counts_o.push(n_o);
        block.counts_h.push(n_h);
    }
    if blocks.is_empty() {
        return Err(Error::EmptyInput("sample file"));
    }

    let mut seen = std::collections::HashSet::new();
    for b in &blocks {
        if !seen.insert(b.id) {
            return Err(Error::DataMismatch(format!(
                "sample id {} appears in more than one block",
                b.id
            )));
        }
    }

    let first = &blocks[0];
    let n = first.deltas.len();
    for (j, &delta) in first.deltas.iter().enumerate() {
        let expected = TAU * j as f64 / n as f64;
        if (delta - expected).abs() > 1e-9 {
            return Err(Error::DataMismatch(format!(
                "shift {delta} at position {j} is not on an equidistant {n}-point grid"
            )));
        }
    }
    for b in &blocks[1..] {
        if b.deltas.len() != n || b.deltas.iter().zip(&first.deltas).any(|(a, c)| a != c) {
            return Err(Error::DataMismatch(format!(
                "sample {} uses a different shift grid than sample {}",
                b.id, first.id
            )));
        }
    }

    let grid = AuxShiftGrid::from_shifts(first.deltas.clone())?;
    let mut ids = Vec::with_capacity(blocks.len());
    let mut samples = Vec::with_capacity(blocks.len());
    for b in blocks {
        ids.push(b.id);
        samples.push(FringeSample::new(b.counts_o, b.counts_h, grid.clone())?);
    }
    Ok((ids, samples))
}

/// Serialize estimate rows.  The phase column is empty for uninformative
/// estimates, and norm_vis is empty when the o-beam mean is zero.
pub fn render_estimates(rows: &[EstimateRow]) -> String {
    let mut out = String::from(ESTIMATES_HEADER);
    out.push('\n');
    for row in rows {
        let e = &row.estimate;
        let (status, phase) = match e.status() {
            EstimateStatus::Informative => (
                "informative",
                fmt_real(e.phase().expect("informative estimate carries a phase")),
            ),
            EstimateStatus::Uninformative => ("uninformative", String::new()),
        };
        let norm_vis = e.normalized_visibility().map(fmt_real).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{status},{phase},{},{},{},{norm_vis},{}",
            row.sample_id,
            row.method.as_str(),
            fmt_real(e.mean_o()),
            fmt_real(e.mean_h()),
            fmt_real(e.amplitude()),
            row.converged
        );
    }
    out
}

pub fn write_estimates(path: &Path, rows: &[EstimateRow]) -> Result<()> {
    write_atomic(path, &render_estimates(rows))
}

pub fn read_estimates(path: &Path) -> Result<Vec<EstimateRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == ESTIMATES_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(
                path,
                1,
                format!("expected header `{ESTIMATES_HEADER}`, got `{header}`"),
            ))
        }
        None => return Err(Error::EmptyInput("estimate file")),
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 9 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 9 fields, got {}", fields.len()),
            ));
        }
        let sample_id = parse_u64(path, line_no, "sample_id", fields[0])?;
        let method = Method::parse(fields[1])
            .ok_or_else(|| parse_err(path, line_no, format!("unknown method `{}`", fields[1])))?;
        let mean_o = parse_f64(path, line_no, "mean_o", fields[4])?;
        let mean_h = parse_f64(path, line_no, "mean_h", fields[5])?;
        let amplitude = parse_f64(path, line_no, "amplitude", fields[6])?;
        let estimate = match fields[2] {
            "informative" => {
                let phase = parse_f64(path, line_no, "phase", fields[3])?;
                PhaseEstimate::informative(phase, mean_o, mean_h, amplitude)
            }
            "uninformative" => {
                if !fields[3].is_empty() {
                    return Err(parse_err(
                        path,
                        line_no,
                        "uninformative row must leave the phase column empty".into(),
                    ));
                }
                PhaseEstimate::uninformative(mean_o, mean_h, amplitude)
            }
            other => {
                return Err(parse_err(path, line_no, format!("unknown status `{other}`")));
            }
        };
        let converged = match fields[8] {
            "true" => true,
            "false" => false,
            other => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("converged must be true or false, got `{other}`"),
                ))
            }
        };
        rows.push(EstimateRow {
            sample_id,
            method,
            estimate,
            converged,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("estimate file"));
    }
    Ok(rows)
}

/// Serialize a hit-frequency comparison curve; the error-bar column appears
/// only for ensemble-averaged curves.
pub fn render_curve(curve: &DeltaECurve) -> String {
    let mut out = String::new();
    match &curve.errbar {
        Some(_) => out.push_str("window_width,f_gauss,f_poisson,delta_e,errbar\n"),
        None => out.push_str("window_width,f_gauss,f_poisson,delta_e\n"),
    }
    for (i, &width) in curve.windows.widths().iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            fmt_real(width),
            fmt_real(curve.f_gauss[i]),
            fmt_real(curve.f_poisson[i]),
            fmt_real(curve.delta_e[i])
        );
        if let Some(errs) = &curve.errbar {
            let _ = write!(out, ",{}", fmt_real(errs[i]));
        }
        out.push('\n');
    }
    out
}

pub fn write_curve(path: &Path, curve: &DeltaECurve) -> Result<()> {
    write_atomic(path, &render_curve(curve))
}

/// Serialize a visibility histogram with a trailing summary comment.
pub fn render_histogram(hist: &VisibilityHistogram) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, &count) in hist.counts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{count}",
            fmt_real(hist.bin_edges[i]),
            fmt_real(hist.bin_edges[i + 1])
        );
    }
    let _ = writeln!(
        out,
        "# mean={} true={}",
        fmt_real(hist.mean),
        fmt_real(hist.true_value)
    );
    out
}

pub fn write_histogram(path: &Path, hist: &VisibilityHistogram) -> Result<()> {
    write_atomic(path, &render_histogram(hist))
}
