//! Scenario files.
//!
//! A scenario is one JSON document. Matrices are lists of rows and every entry
//! is an `[re, im]` pair. The operator basis defaults to the normalized
//! generalized Gell-Mann basis in the order: symmetric pairs `(j, k)`, `j < k`,
//! lexicographic; then antisymmetric pairs in the same order; then the
//! diagonal operators. The GKS matrix is indexed in that order.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "basis": "gell-mann",
//!   "hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]],
//!   "gks": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]],
//!   "initial_state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
//!   "times": { "t_end": 1.0, "samples": 11 },
//!   "seed": 7
//! }
//! ```

use std::path::Path;

use majoflow::lindblad::{
    EvolveOptions, GksMatrix, HamiltonianSchedule, HamiltonianSegment, LindbladGenerator, Method,
};
use majoflow::{gell_mann_basis, validate_density, CMatrix, DensityMatrix, OperatorBasis, Tolerances};
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

/// Rows of `[re, im]` pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    dimension: usize,
    #[serde(default)]
    basis: Option<RawBasis>,
    #[serde(default)]
    hamiltonian: Option<RawHamiltonian>,
    gks: MatrixLiteral,
    #[serde(default)]
    initial_state: Option<MatrixLiteral>,
    #[serde(default)]
    times: Option<RawTimes>,
    #[serde(default)]
    tolerances: Option<Tolerances>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    method: Option<RawMethod>,
    #[serde(default)]
    rk4_step: Option<f64>,
    #[serde(default)]
    lambda0: Option<f64>,
    #[serde(default)]
    horizon: Option<f64>,
    #[serde(default)]
    t1: Option<f64>,
    #[serde(default)]
    t2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBasis {
    Named(String),
    Explicit(Vec<MatrixLiteral>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawHamiltonian {
    Constant(MatrixLiteral),
    Piecewise { segments: Vec<RawSegment> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    duration: f64,
    matrix: MatrixLiteral,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawTimes {
    Grid { t_end: f64, samples: usize },
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawMethod {
    Expm,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    GellMann,
    Explicit(Vec<CMatrix>),
}

/// A parsed scenario. Shapes are checked; physical invariants are not.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub dimension: usize,
    pub basis: BasisSpec,
    pub hamiltonian: HamiltonianSchedule,
    pub gks: CMatrix,
    pub initial_state: Option<CMatrix>,
    pub times: Option<Vec<f64>>,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub method: Method,
    pub lambda0: Option<f64>,
    pub horizon: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Parse(inner.to_string())
        } else {
            CliError::Parse(format!("{path}: {inner}"))
        }
    })?;
    Scenario::from_raw(raw)
}

pub fn matrix_from_literal(lit: &MatrixLiteral, n: usize, field: &str) -> Result<CMatrix, CliError> {
    if lit.len() != n {
        return Err(CliError::Parse(format!(
            "{field}: expected {n} rows, found {}",
            lit.len()
        )));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in lit.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Parse(format!(
                "{field}[{i}]: expected {n} entries, found {}",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::Parse(format!("{field}[{i}][{j}]: non-finite entry")));
            }
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn matrix_to_literal(m: &CMatrix) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn positive(value: f64, field: &str) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Parse(format!("{field}: must be a positive number, found {value}")))
    }
}

/// `samples` equally spaced points on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, samples: usize, field: &str) -> Result<Vec<f64>, CliError> {
    positive(t_end, &format!("{field}.t_end"))?;
    if samples < 2 {
        return Err(CliError::Parse(format!("{field}.samples: need at least 2 points")));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples).map(|k| t_end * k as f64 / last).collect())
}

impl Scenario {
    fn from_raw(raw: RawScenario) -> Result<Self, CliError> {
        let n = raw.dimension;
        if !(2..=32).contains(&n) {
            return Err(CliError::Parse(format!("dimension: must be in 2..=32, found {n}")));
        }
        let basis = match raw.basis {
            None => BasisSpec::GellMann,
            Some(RawBasis::Named(name)) if name == "gell-mann" => BasisSpec::GellMann,
            Some(RawBasis::Named(name)) => {
                return Err(CliError::Parse(format!(
                    "basis: unknown basis \"{name}\", expected \"gell-mann\" or a list of matrices"
                )))
            }
            Some(RawBasis::Explicit(ops)) => BasisSpec::Explicit(
                ops.iter()
                    .enumerate()
                    .map(|(k, op)| matrix_from_literal(op, n, &format!("basis[{k}]")))
                    .collect::<Result<_, _>>()?,
            ),
        };
        let hamiltonian = match raw.hamiltonian {
            None => HamiltonianSchedule::zero(n),
            Some(RawHamiltonian::Constant(lit)) => {
                HamiltonianSchedule::Constant(matrix_from_literal(&lit, n, "hamiltonian")?)
            }
            Some(RawHamiltonian::Piecewise { segments }) => {
                if segments.is_empty() {
                    return Err(CliError::Parse("hamiltonian.segments: empty".into()));
                }
                HamiltonianSchedule::Piecewise(
                    segments
                        .iter()
                        .enumerate()
                        .map(|(k, s)| {
                            let field = format!("hamiltonian.segments[{k}]");
                            Ok(HamiltonianSegment {
                                duration: positive(s.duration, &format!("{field}.duration"))?,
                                h: matrix_from_literal(&s.matrix, n, &format!("{field}.matrix"))?,
                            })
                        })
                        .collect::<Result<_, CliError>>()?,
                )
            }
        };
        let gks = matrix_from_literal(&raw.gks, n * n - 1, "gks")?;
        let initial_state = raw
            .initial_state
            .as_ref()
            .map(|lit| matrix_from_literal(lit, n, "initial_state"))
            .transpose()?;
        let times = match raw.times {
            None => None,
            Some(RawTimes::Grid { t_end, samples }) => Some(uniform_grid(t_end, samples, "times")?),
            Some(RawTimes::List(list)) => {
                if list.first() != Some(&0.0) {
                    return Err(CliError::Parse("times[0]: grid must start at 0".into()));
                }
                if let Some(k) = (1..list.len()).find(|&k| !(list[k] > list[k - 1] && list[k].is_finite())) {
                    return Err(CliError::Parse(format!("times[{k}]: grid must be strictly increasing")));
                }
                Some(list)
            }
        };
        let tolerances = raw.tolerances.unwrap_or_default();
        for (name, v) in [
            ("herm", tolerances.herm),
            ("trace", tolerances.trace),
            ("psd", tolerances.psd),
            ("recon", tolerances.recon),
            ("majorization", tolerances.majorization),
            ("psd_trajectory", tolerances.psd_trajectory),
            ("trajectory", tolerances.trajectory),
        ] {
            positive(v, &format!("tolerances.{name}"))?;
        }
        let method = match (raw.method, raw.rk4_step) {
            (None | Some(RawMethod::Expm), None) => Method::ExactExpm,
            (None | Some(RawMethod::Expm), Some(_)) => {
                return Err(CliError::Parse("rk4_step: only valid with \"method\": \"rk4\"".into()))
            }
            (Some(RawMethod::Rk4), step) => Method::Rk4 {
                step: step.map(|s| positive(s, "rk4_step")).transpose()?,
            },
        };
        if let Some(l) = raw.lambda0 {
            if !(0.0..=0.5).contains(&l) {
                return Err(CliError::Parse(format!("lambda0: must lie in [0, 0.5], found {l}")));
            }
        }
        let horizon = raw.horizon.map(|h| positive(h, "horizon")).transpose()?;
        Ok(Self {
            dimension: n,
            basis,
            hamiltonian,
            gks,
            initial_state,
            times,
            tolerances,
            seed: raw.seed,
            method,
            lambda0: raw.lambda0,
            horizon,
            t1: raw.t1,
            t2: raw.t2,
        })
    }

    pub fn with_tolerance_multiplier(mut self, factor: f64) -> Self {
        self.tolerances = self.tolerances.scaled(factor);
        self
    }

    pub fn operator_basis(&self) -> majoflow::Result<OperatorBasis> {
        match &self.basis {
            BasisSpec::GellMann => gell_mann_basis(self.dimension),
            BasisSpec::Explicit(ops) => OperatorBasis::new(ops.clone(), self.tolerances.herm),
        }
    }

    pub fn gks_matrix(&self) -> majoflow::Result<GksMatrix> {
        GksMatrix::new(self.gks.clone(), &self.tolerances)
    }

    pub fn generator(&self) -> majoflow::Result<LindbladGenerator> {
        LindbladGenerator::new(
            self.operator_basis()?,
            self.gks_matrix()?,
            self.hamiltonian.clone(),
            &self.tolerances,
        )
    }

    pub fn initial_density(&self) -> Result<DensityMatrix, CliError> {
        let m = self
            .initial_state
            .as_ref()
            .ok_or_else(|| CliError::Usage("scenario has no initial_state".into()))?;
        Ok(validate_density(m, &self.tolerances)?)
    }

    pub fn time_grid(&self) -> Result<Vec<f64>, CliError> {
        self.times
            .clone()
            .ok_or_else(|| CliError::Usage("scenario has no times".into()))
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            method: self.method,
            cross_check: false,
            tol: self.tolerances,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = r#"{
        "dimension": 2,
        "gks": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]],
        "initial_state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
        "times": { "t_end": 1.0, "samples": 5 }
    }"#;

    fn err(text: &str) -> String {
        match parse(text) {
            Err(CliError::Parse(m)) => m,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_qubit() {
        let s = parse(QUBIT).unwrap();
        assert_eq!(s.dimension, 2);
        assert_eq!(s.basis, BasisSpec::GellMann);
        assert_eq!(s.times.as_deref(), Some(&[0.0, 0.25, 0.5, 0.75, 1.0][..]));
        assert_eq!(s.method, Method::ExactExpm);
        assert!(s.generator().is_ok());
    }

    #[test]
    fn truncated_document_reports_position() {
        let m = err(&QUBIT[..60]);
        assert!(m.contains("line"), "{m}");
    }

    #[test]
    fn wrong_shapes_name_the_field() {
        let m = err(r#"{"dimension": 2, "gks": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#);
        assert!(m.starts_with("gks"), "{m}");
        let m = err(r#"{"dimension": 2, "gks": [[[1,0],[0,0],[0,0]],[[0,0],[1,0]],[[0,0],[0,0],[1,0]]]}"#);
        assert!(m.starts_with("gks[1]"), "{m}");
        let m = err(r#"{"dimension": 2, "gks": [[[1, 0, 3]]]}"#);
        assert!(m.contains("gks[0][0]"), "{m}");
        let m = err(r#"{"dimension": 2, "gks": [], "colour": 1}"#);
        assert!(m.contains("colour"), "{m}");
        let m = err(r#"{"dimension": 1, "gks": []}"#);
        assert!(m.starts_with("dimension"), "{m}");
    }

    #[test]
    fn piecewise_hamiltonian_and_explicit_times() {
        let text = r#"{
            "dimension": 2,
            "hamiltonian": {"segments": [
                {"duration": 0.5, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
                {"duration": 1.0, "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}
            ]},
            "gks": [[[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]],
            "times": [0, 0.25, 1.0],
            "method": "rk4",
            "rk4_step": 0.01
        }"#;
        let s = parse(text).unwrap();
        assert_eq!(s.hamiltonian.num_segments(), 2);
        assert_eq!(s.method, Method::Rk4 { step: Some(0.01) });
        let bad = text.replace("[0, 0.25, 1.0]", "[0, 0.25, 0.25]");
        assert!(err(&bad).starts_with("times[2]"));
        let bad = text.replace("\"duration\": 0.5", "\"duration\": -0.5");
        assert!(err(&bad).starts_with("hamiltonian.segments[0].duration"));
    }

    #[test]
    fn unknown_basis_name() {
        let text = QUBIT.replace("\"dimension\": 2,", "\"dimension\": 2, \"basis\": \"pauli\",");
        assert!(err(&text).starts_with("basis"));
    }
}
