//! The `gns` and `transpose` commands.

use nalgebra::{DMatrix, DVector};
use optaudit_core::faithful::{BipartiteState, FaithfulCalculus};
use optaudit_core::gns;
use optaudit_core::linalg::{CMatrix, C64};
use optaudit_core::theory::{Transformation, Weight};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::file::LoadedTheory;
use crate::report::float_value;

/// Failure of a command: usage problems exit with 1, numerical ones with 2.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandError {
    Usage(String),
    Numerical(String),
}

impl From<optaudit_core::Error> for CommandError {
    fn from(e: optaudit_core::Error) -> Self {
        CommandError::Numerical(e.to_string())
    }
}

pub fn matrix_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| float_value(m[(r, c)])).collect()))
            .collect(),
    )
}

fn vector_value(v: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(v.into_iter().map(float_value).collect())
}

/// Reads `arg` as inline JSON, or from a file when it starts with `@`.
pub fn json_argument(arg: &str) -> Result<String, CommandError> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CommandError::Usage(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn parse_argument<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T, CommandError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CommandError::Usage(format!("malformed {what}: field `{path}`: {}", e.into_inner()))
    })
}

/// Faithful state for `gns`: the `--state` coordinates when given,
/// otherwise the one in the theory file.
pub fn faithful_state(loaded: &LoadedTheory, state: Option<&str>) -> Result<BipartiteState, CommandError> {
    match state {
        Some(arg) => {
            let coords: Vec<f64> = parse_argument("state", &json_argument(arg)?)?;
            let c = loaded.composite()?;
            let w = Weight::new(c.joint(), DVector::from_vec(coords)).map_err(|e| CommandError::Usage(e.to_string()))?;
            BipartiteState::new(c, w).map_err(|e| CommandError::Usage(e.to_string()))
        }
        None => loaded
            .faithful
            .clone()
            .ok_or_else(|| CommandError::Usage("theory file has no faithful_state; pass --state".into())),
    }
}

pub fn gns_report(loaded: &LoadedTheory, phi: &BipartiteState, seed: u64) -> Result<Value, CommandError> {
    let form = gns::bilinear_form(phi)?;
    let tol = phi.theory().tolerances();
    let inv = gns::involution(&form.matrix, tol.rank);
    let mut m = Map::new();
    m.insert("theory".into(), Value::String(loaded.display_name()));
    m.insert("seed".into(), Value::from(seed));
    m.insert("form".into(), matrix_value(&form.matrix));
    m.insert("asymmetry".into(), float_value(form.asymmetry));
    let mut sig = Map::new();
    sig.insert("positive".into(), Value::from(inv.signature.positive));
    sig.insert("negative".into(), Value::from(inv.signature.negative));
    sig.insert("zero".into(), Value::from(inv.signature.zero));
    m.insert("signature".into(), Value::Object(sig));
    m.insert("sigma".into(), matrix_value(&inv.sigma));
    m.insert("identity_preserving".into(), Value::Bool(inv.is_identity_preserving(phi.theory().unit())));

    let calc = FaithfulCalculus::new(phi.clone());
    let gram = match &calc {
        Ok(calc) => gns::gram_matrix_with(calc, &inv)?,
        Err(_) => inv.gram(),
    };
    let positivity = gns::check_strict_positivity(&gram, tol.gram);
    m.insert("gram_eigenvalues".into(), vector_value(positivity.eigenvalues.iter().copied()));
    m.insert("gram_null_rank".into(), Value::from(positivity.null_rank));
    match calc {
        Ok(calc) => {
            let r = gns::check_adjoint_identity(&calc, &inv, 5, seed)?;
            let mut a = Map::new();
            a.insert("samples".into(), Value::from(r.samples));
            a.insert("adjoint_identity".into(), float_value(r.adjoint_identity));
            a.insert("involutivity".into(), float_value(r.involutivity));
            a.insert("anti_homomorphism".into(), float_value(r.anti_homomorphism));
            a.insert("local_form".into(), float_value(r.local_form));
            m.insert("adjoint".into(), Value::Object(a));
        }
        Err(e) => {
            m.insert("adjoint".into(), Value::Null);
            m.insert("not_faithful".into(), Value::String(e.to_string()));
        }
    }
    Ok(Value::Object(m))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformationSpec {
    Identity,
    /// Coordinate matrix acting on weights, row by row.
    Matrix(Vec<Vec<f64>>),
    /// Kraus operators; entries are `[re, im]` pairs.
    Kraus(Vec<Vec<Vec<[f64; 2]>>>),
}

pub fn parse_transformation(loaded: &LoadedTheory, text: &str) -> Result<Transformation, CommandError> {
    let spec: TransformationSpec = parse_argument("transformation", text)?;
    let t = &loaded.theory;
    let usage = |e: optaudit_core::Error| CommandError::Usage(e.to_string());
    match spec {
        TransformationSpec::Identity => Ok(Transformation::identity(t)),
        TransformationSpec::Matrix(rows) => {
            let n = t.dim();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(CommandError::Usage(format!("matrix must be {n} x {n}")));
            }
            Transformation::new(t, DMatrix::from_fn(n, n, |r, c| rows[r][c])).map_err(usage)
        }
        TransformationSpec::Kraus(ops) => {
            let basis = t
                .quantum_basis()
                .ok_or_else(|| CommandError::Usage("kraus operators need a quantum theory".into()))?;
            let d = basis.hilbert_dim();
            let mut kraus = Vec::new();
            for op in &ops {
                if op.len() != d || op.iter().any(|r| r.len() != d) {
                    return Err(CommandError::Usage(format!("kraus operators must be {d} x {d}")));
                }
                kraus.push(CMatrix::from_fn(d, d, |r, c| C64::new(op[r][c][0], op[r][c][1])));
            }
            Transformation::from_kraus(t, &kraus).map_err(usage)
        }
    }
}

pub fn transpose_report(loaded: &LoadedTheory, phi: &BipartiteState, a: &Transformation) -> Result<Value, CommandError> {
    let calc = FaithfulCalculus::new(phi.clone())?;
    let (at, residual) = calc.transpose_with_residual(a)?;
    let mut m = Map::new();
    m.insert("theory".into(), Value::String(loaded.display_name()));
    m.insert("transpose".into(), matrix_value(at.matrix()));
    m.insert("residual".into(), float_value(residual));
    Ok(Value::Object(m))
}
