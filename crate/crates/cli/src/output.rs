//! Writers and readers for trajectory files and reports.

use std::io::Write;
use std::path::Path;

use majoflow::lindblad::Trajectory;
use majoflow::{CMatrix, Tolerances};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scenario::{matrix_from_literal, matrix_to_literal, MatrixLiteral};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Unix seconds, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Sends `contents` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub generated_at: u64,
    pub integrator: String,
    pub step: Option<f64>,
    pub fingerprint: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub max_clamp: f64,
    pub warnings: Vec<String>,
}

impl RunMetadata {
    pub fn new(traj: &Trajectory, seed: Option<u64>, tolerances: Tolerances) -> Self {
        Self {
            version: VERSION.to_string(),
            generated_at: timestamp(),
            integrator: traj.metadata.integrator.clone(),
            step: traj.metadata.step,
            fingerprint: traj.metadata.fingerprint.clone(),
            seed,
            tolerances,
            max_clamp: traj.metadata.max_clamp,
            warnings: traj.metadata.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub metadata: RunMetadata,
    pub dimension: usize,
    pub times: Vec<f64>,
    pub states: Vec<MatrixLiteral>,
}

pub fn trajectory_json(traj: &Trajectory, meta: RunMetadata) -> Result<String, CliError> {
    to_json(&TrajectoryFile {
        metadata: meta,
        dimension: traj.states.first().map_or(0, |s| s.dim()),
        times: traj.times.clone(),
        states: traj.states.iter().map(|s| matrix_to_literal(s.matrix())).collect(),
    })
}

/// CSV with `#` metadata lines, then `t` and row-major `re,im` columns.
pub fn trajectory_csv(traj: &Trajectory, meta: &RunMetadata) -> String {
    let n = traj.states.first().map_or(0, |s| s.dim());
    let tol = &meta.tolerances;
    let mut out = String::new();
    out.push_str("# majoflow trajectory\n");
    out.push_str(&format!("# version: {}\n", meta.version));
    out.push_str(&format!("# generated_at: {}\n", meta.generated_at));
    out.push_str(&format!("# integrator: {}\n", meta.integrator));
    out.push_str(&format!(
        "# step: {}\n",
        meta.step.map_or_else(|| "none".to_string(), fmt_f64)
    ));
    out.push_str(&format!("# fingerprint: {}\n", meta.fingerprint));
    out.push_str(&format!(
        "# seed: {}\n",
        meta.seed.map_or_else(|| "none".to_string(), |s| s.to_string())
    ));
    out.push_str(&format!(
        "# tolerances: herm={} trace={} psd={} recon={} majorization={} psd_trajectory={} trajectory={}\n",
        fmt_f64(tol.herm),
        fmt_f64(tol.trace),
        fmt_f64(tol.psd),
        fmt_f64(tol.recon),
        fmt_f64(tol.majorization),
        fmt_f64(tol.psd_trajectory),
        fmt_f64(tol.trajectory),
    ));
    out.push_str(&format!("# max_clamp: {}\n", fmt_f64(meta.max_clamp)));
    for w in &meta.warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    out.push('t');
    for i in 0..n {
        for j in 0..n {
            out.push_str(&format!(",re_{i}_{j},im_{i}_{j}"));
        }
    }
    out.push('\n');
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        out.push_str(&fmt_f64(*t));
        let m = rho.matrix();
        for i in 0..n {
            for j in 0..n {
                out.push(',');
                out.push_str(&fmt_f64(m[(i, j)].re));
                out.push(',');
                out.push_str(&fmt_f64(m[(i, j)].im));
            }
        }
        out.push('\n');
    }
    out
}

/// Reads a trajectory written by `simulate` in either format.
pub fn read_trajectory(text: &str) -> Result<(Vec<f64>, Vec<CMatrix>), CliError> {
    if text.trim_start().starts_with('{') {
        let file: TrajectoryFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let states = file
            .states
            .iter()
            .enumerate()
            .map(|(k, lit)| matrix_from_literal(lit, file.dimension, &format!("states[{k}]")))
            .collect::<Result<_, _>>()?;
        return Ok((file.times, states));
    }
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Parse("empty trajectory file".into()))?;
    let columns = header.split(',').count();
    let n = ((columns - 1) / 2).isqrt();
    if columns < 2 || 2 * n * n + 1 != columns {
        return Err(CliError::Parse(format!("header: {columns} columns do not form a square state")));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in lines {
        let values = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Parse(format!("line {}: {e}", lineno + 1)))?;
        if values.len() != columns {
            return Err(CliError::Parse(format!(
                "line {}: expected {columns} values, found {}",
                lineno + 1,
                values.len()
            )));
        }
        times.push(values[0]);
        states.push(CMatrix::from_fn(n, n, |i, j| {
            let k = 1 + 2 * (i * n + j);
            Complex64::new(values[k], values[k + 1])
        }));
    }
    Ok((times, states))
}
