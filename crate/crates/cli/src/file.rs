//! JSON theory files.
//!
//! ```json
//! { "version": 1, "name": "qubit", "kind": { "quantum": { "d": 2 } }, "faithful_state": "bell" }
//! { "version": 1, "unit_effect": [1, 0, 0], "extreme_states": [[1, 1, 0], ...] }
//! ```
//!
//! Either `kind` names a bundled builder or `unit_effect` and
//! `extreme_states` give an explicit polytope.

use std::fmt;
use std::path::Path;

use nalgebra::DVector;
use optaudit_core::composite::CompositeTheory;
use optaudit_core::faithful::BipartiteState;
use optaudit_core::geometry;
use optaudit_core::theories;
use optaudit_core::theory::{IdimWitness, Theory, TheorySpace, Weight};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Quantum { d: usize },
    Classical { k: usize },
    Gbit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub states: Vec<Vec<f64>>,
    pub effects: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaithfulSpec {
    /// Maximally entangled state; quantum kinds only.
    Bell,
    /// `sum_i p_i delta_i (x) delta_i`; classical kinds only.
    Correlated(Vec<f64>),
    /// Joint coordinates, row-major over the two factors.
    Coordinates(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_effect: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extreme_states: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_idim: Option<WitnessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faithful_state: Option<FaithfulSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(m) => write!(f, "cannot read theory file: {m}"),
            LoadError::Parse(m) => write!(f, "malformed theory file: {m}"),
            LoadError::Invalid(m) => write!(f, "invalid theory: {m}"),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<optaudit_core::Error> for LoadError {
    fn from(e: optaudit_core::Error) -> Self {
        LoadError::Invalid(e.to_string())
    }
}

/// A validated theory with its optional faithful state.
#[derive(Debug, Clone)]
pub struct LoadedTheory {
    pub source: TheoryFile,
    pub theory: Theory,
    pub faithful: Option<BipartiteState>,
}

impl LoadedTheory {
    /// The file's `name`, or the builder's name.
    pub fn display_name(&self) -> String {
        self.source.name.clone().unwrap_or_else(|| self.theory.name().to_string())
    }

    /// Composite of two copies, shared with the faithful state when present.
    pub fn composite(&self) -> optaudit_core::Result<std::sync::Arc<CompositeTheory>> {
        match &self.faithful {
            Some(phi) => Ok(phi.composite().clone()),
            None => CompositeTheory::new(&self.theory, &self.theory),
        }
    }
}

pub fn parse(text: &str) -> Result<TheoryFile, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse(format!("field `{path}`: {inner}"))
    })
}

pub fn read(path: &Path) -> Result<LoadedTheory, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    load(parse(&text)?)
}

fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn witness(spec: &WitnessSpec) -> IdimWitness {
    IdimWitness {
        states: spec.states.iter().map(|v| vector(v)).collect(),
        effects: spec.effects.iter().map(|v| vector(v)).collect(),
    }
}

/// Builds and re-validates the theory described by `file`.
pub fn load(file: TheoryFile) -> Result<LoadedTheory, LoadError> {
    if file.version != FORMAT_VERSION {
        return Err(LoadError::Parse(format!(
            "field `version`: unsupported version {}, expected {FORMAT_VERSION}",
            file.version
        )));
    }
    let explicit = file.unit_effect.is_some() || file.extreme_states.is_some();
    let theory = match (&file.kind, explicit) {
        (Some(_), true) => {
            return Err(LoadError::Parse(
                "`kind` and explicit `unit_effect`/`extreme_states` are mutually exclusive".into(),
            ))
        }
        (None, false) => return Err(LoadError::Parse("either `kind` or explicit polytope data is required".into())),
        (Some(kind), false) => {
            if file.declared_idim.is_some() {
                return Err(LoadError::Parse(
                    "field `declared_idim`: only allowed with explicit polytope data".into(),
                ));
            }
            match kind {
                Kind::Quantum { d } => theories::build_quantum(*d)?,
                Kind::Classical { k } => theories::build_classical(*k)?,
                Kind::Gbit => theories::build_gbit()?,
            }
        }
        (None, true) => {
            let unit = file
                .unit_effect
                .as_ref()
                .ok_or_else(|| LoadError::Parse("field `unit_effect`: missing".into()))?;
            let extremes = file
                .extreme_states
                .as_ref()
                .ok_or_else(|| LoadError::Parse("field `extreme_states`: missing".into()))?;
            let name = file.name.clone().unwrap_or_else(|| "explicit".into());
            let declared = file.declared_idim.as_ref().map(witness);
            let theory = TheorySpace::finite_extreme(name, vector(unit), extremes.iter().map(|v| vector(v)).collect(), declared)?;
            if let Some(verified) = geometry::informational_dimension(&theory, 1).declared_verified {
                if !verified {
                    return Err(LoadError::Invalid("declared_idim witness does not discriminate its states".into()));
                }
            }
            theory
        }
    };
    let faithful = match &file.faithful_state {
        None => None,
        Some(FaithfulSpec::Bell) => match file.kind {
            Some(Kind::Quantum { d }) => Some(theories::build_bell_state(d)?),
            _ => return Err(LoadError::Invalid("`bell` faithful state requires a quantum kind".into())),
        },
        Some(FaithfulSpec::Correlated(p)) => match file.kind {
            Some(Kind::Classical { k }) => Some(theories::build_classical_correlated(k, p)?),
            _ => return Err(LoadError::Invalid("`correlated` faithful state requires a classical kind".into())),
        },
        Some(FaithfulSpec::Coordinates(c)) => {
            let composite = CompositeTheory::new(&theory, &theory)?;
            let weight = Weight::new(composite.joint(), vector(c))?;
            Some(BipartiteState::new(composite, weight)?)
        }
    };
    Ok(LoadedTheory {
        source: file,
        theory,
        faithful,
    })
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// File form of a loaded theory, rebuilt from the validated coordinates.
pub fn to_file(loaded: &LoadedTheory) -> TheoryFile {
    let src = &loaded.source;
    let t = &loaded.theory;
    let explicit = src.kind.is_none();
    TheoryFile {
        version: FORMAT_VERSION,
        name: src.name.clone(),
        kind: src.kind.clone(),
        unit_effect: explicit.then(|| to_vec(t.unit())),
        extreme_states: explicit.then(|| t.extremes().unwrap_or_default().iter().map(to_vec).collect()),
        declared_idim: if explicit {
            t.declared_idim().map(|w| WitnessSpec {
                states: w.states.iter().map(to_vec).collect(),
                effects: w.effects.iter().map(to_vec).collect(),
            })
        } else {
            None
        },
        faithful_state: match (&src.faithful_state, &loaded.faithful) {
            (Some(FaithfulSpec::Coordinates(_)), Some(phi)) => Some(FaithfulSpec::Coordinates(to_vec(phi.weight().coords()))),
            (spec, _) => spec.clone(),
        },
    }
}

pub fn serialize(loaded: &LoadedTheory) -> String {
    serde_json::to_string_pretty(&to_file(loaded)).expect("theory file serializes") + "\n"
}
