//! Theories, weights, effects, transformations and experiments.
//!
//! Everything is stored as coordinates in one fixed basis per theory: a
//! weight and an effect are vectors of length `n`, their pairing is the plain
//! dot product, and a transformation is an `n x n` matrix acting on weight
//! coordinates. The dual action on effects is the matrix transpose.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::lp;

/// Numerical tolerances used by predicates and identity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Structural identities (duality, associativity).
    pub structural: f64,
    /// Cone membership, physicality, zero-probability conditioning.
    pub cone: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Eigenvalue threshold for Gram positivity.
    pub gram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-12,
            cone: 1e-9,
            rank: 1e-10,
            gram: 1e-10,
        }
    }
}

/// Orthonormal Hermitian basis identifying real coordinates with Hermitian
/// matrices: `H = sum_k c_k B_k` and `c_k = Tr[B_k H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumBasis {
    d: usize,
    elements: Vec<CMatrix>,
}

impl QuantumBasis {
    pub fn gell_mann(d: usize) -> Self {
        Self {
            d,
            elements: linalg::gell_mann_basis(d),
        }
    }

    pub fn from_elements(d: usize, elements: Vec<CMatrix>) -> Result<Self> {
        if elements.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: elements.len(),
            });
        }
        for (i, a) in elements.iter().enumerate() {
            if a.shape() != (d, d) || (a - a.adjoint()).norm() > 1e-12 {
                return Err(Error::InvalidTheory(format!("basis element {i} is not Hermitian {d}x{d}")));
            }
            for (j, b) in elements.iter().enumerate() {
                let t = linalg::trace_product(a, b);
                let expected = if i == j { 1.0 } else { 0.0 };
                if (t.re - expected).abs() > 1e-10 || t.im.abs() > 1e-10 {
                    return Err(Error::InvalidTheory(format!("basis elements {i},{j} not orthonormal")));
                }
            }
        }
        Ok(Self { d, elements })
    }

    /// Product basis `B_i (x) C_j` with row-major index `i * n2 + j`.
    pub fn tensor(&self, other: &QuantumBasis) -> QuantumBasis {
        let elements = self
            .elements
            .iter()
            .flat_map(|a| other.elements.iter().map(move |b| a.kronecker(b)))
            .collect();
        QuantumBasis {
            d: self.d * other.d,
            elements,
        }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn hermitian(&self, coords: &DVector<f64>) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for (c, b) in coords.iter().zip(&self.elements) {
            out += b * C64::new(*c, 0.0);
        }
        out
    }

    /// Coordinates of a Hermitian matrix (imaginary parts of the traces are
    /// dropped).
    pub fn coords(&self, h: &CMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.elements.len(),
            self.elements.iter().map(|b| linalg::trace_product(b, h).re),
        )
    }

    /// Complex coordinates of an arbitrary matrix.
    pub fn complex_coords(&self, x: &CMatrix) -> Vec<C64> {
        self.elements.iter().map(|b| linalg::trace_product(b, x)).collect()
    }

    /// Complex-linear extension of a real coordinate map to all matrices.
    pub fn apply_extended(&self, matrix: &DMatrix<f64>, x: &CMatrix) -> CMatrix {
        let c = self.complex_coords(x);
        let mut out = CMatrix::zeros(self.d, self.d);
        for (l, b) in self.elements.iter().enumerate() {
            let mut coeff = C64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                coeff += *ck * matrix[(l, k)];
            }
            out += b * coeff;
        }
        out
    }

    /// Coordinate matrix of the map `rho -> sum_i K_i rho K_i^dagger`.
    pub fn kraus_matrix(&self, kraus: &[CMatrix]) -> DMatrix<f64> {
        let n = self.elements.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, bk) in self.elements.iter().enumerate() {
            let mut image = CMatrix::zeros(self.d, self.d);
            for op in kraus {
                image += op * bk * op.adjoint();
            }
            let col = self.coords(&image);
            m.set_column(k, &col);
        }
        m
    }

    /// Choi matrix `sum_ij |i><j| (x) A(|i><j|)` of a coordinate map.
    pub fn choi(&self, matrix: &DMatrix<f64>) -> CMatrix {
        let d = self.d;
        let mut j = CMatrix::zeros(d * d, d * d);
        for r in 0..d {
            for c in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(r, c)] = C64::new(1.0, 0.0);
                let image = self.apply_extended(matrix, &e);
                for a in 0..d {
                    for b in 0..d {
                        j[(r * d + a, c * d + b)] = image[(a, b)];
                    }
                }
            }
        }
        j
    }

    /// Pure-state probes `|j>`, `(|j>+|k>)/sqrt2`, `(|j>+i|k>)/sqrt2`;
    /// their density matrices span all Hermitian matrices.
    pub fn probe_states(&self) -> Vec<DVector<f64>> {
        let d = self.d;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut kets: Vec<Vec<C64>> = Vec::new();
        for j in 0..d {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[j] = C64::new(1.0, 0.0);
            kets.push(v);
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[j] = C64::new(s, 0.0);
                v[k] = C64::new(s, 0.0);
                kets.push(v);
                let mut w = vec![C64::new(0.0, 0.0); d];
                w[j] = C64::new(s, 0.0);
                w[k] = C64::new(0.0, s);
                kets.push(w);
            }
        }
        kets.iter()
            .map(|ket| {
                let psi = DVector::from_vec(ket.clone());
                self.coords(&(&psi * psi.adjoint()))
            })
            .collect()
    }
}

/// How the state set of a theory is described.
#[derive(Debug, Clone, PartialEq)]
pub enum StateModel {
    /// Polytope given by its extreme states.
    FiniteExtreme { extremes: Vec<DVector<f64>> },
    /// Density matrices of a `d`-level system.
    QuantumSpectral { basis: QuantumBasis },
}

/// A perfectly discriminable set of states together with the observable
/// that discriminates it: `effects[j] . states[k] = delta_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdimWitness {
    pub states: Vec<DVector<f64>>,
    pub effects: Vec<DVector<f64>>,
}

impl IdimWitness {
    pub fn cardinality(&self) -> usize {
        self.states.len()
    }
}

/// A finite-dimensional operational theory.
#[derive(Debug, Clone)]
pub struct TheorySpace {
    name: String,
    unit: DVector<f64>,
    model: StateModel,
    declared_idim: Option<IdimWitness>,
    tol: Tolerances,
    ball_vertices: OnceLock<Vec<DVector<f64>>>,
}

pub type Theory = Arc<TheorySpace>;

impl TheorySpace {
    /// Polytope theory. Rejects extreme states that are not normalized by
    /// `unit` and lists that do not span the effect space.
    pub fn finite_extreme(
        name: impl Into<String>,
        unit: DVector<f64>,
        extremes: Vec<DVector<f64>>,
        declared_idim: Option<IdimWitness>,
    ) -> Result<Theory> {
        let n = unit.len();
        if n == 0 {
            return Err(Error::InvalidTheory("empty unit effect".into()));
        }
        if extremes.is_empty() {
            return Err(Error::InvalidTheory("no extreme states".into()));
        }
        for (i, v) in extremes.iter().enumerate() {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            let norm = unit.dot(v);
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidTheory(format!(
                    "extreme state {i} has unit-effect value {norm}, expected 1"
                )));
            }
        }
        // Normalized points: affine dimension n-1 iff linear rank n.
        let stacked = DMatrix::from_fn(extremes.len(), n, |r, c| extremes[r][c]);
        let r = linalg::rank(&stacked, 1e-10);
        if r != n {
            return Err(Error::InvalidTheory(format!(
                "extreme states have affine dimension {} but the effect space needs {}",
                r as isize - 1,
                n - 1
            )));
        }
        let theory = Self {
            name: name.into(),
            unit,
            model: StateModel::FiniteExtreme { extremes },
            declared_idim: None,
            tol: Tolerances::default(),
            ball_vertices: OnceLock::new(),
        };
        theory.with_declared_idim(declared_idim).map(Arc::new)
    }

    /// Quantum theory on the given orthonormal Hermitian basis.
    pub fn quantum(name: impl Into<String>, basis: QuantumBasis, declared_idim: Option<IdimWitness>) -> Result<Theory> {
        let d = basis.hilbert_dim();
        let unit = basis.coords(&CMatrix::identity(d, d));
        let theory = Self {
            name: name.into(),
            unit,
            model: StateModel::QuantumSpectral { basis },
            declared_idim: None,
            tol: Tolerances::default(),
            ball_vertices: OnceLock::new(),
        };
        theory.with_declared_idim(declared_idim).map(Arc::new)
    }

    fn with_declared_idim(mut self, witness: Option<IdimWitness>) -> Result<Self> {
        if let Some(w) = &witness {
            if w.states.len() != w.effects.len() || w.states.is_empty() {
                return Err(Error::InvalidTheory("idim witness needs equally many states and effects".into()));
            }
            for v in w.states.iter().chain(&w.effects) {
                if v.len() != self.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim(),
                        found: v.len(),
                    });
                }
            }
        }
        self.declared_idim = witness;
        Ok(self)
    }

    /// Copy with different tolerances.
    pub fn with_tolerances(&self, tol: Tolerances) -> Theory {
        let mut t = self.clone();
        t.tol = tol;
        Arc::new(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Dimension `n` of the effect space.
    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    /// Affine dimension of the state set, `n - 1`.
    pub fn affine_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn unit(&self) -> &DVector<f64> {
        &self.unit
    }

    pub fn model(&self) -> &StateModel {
        &self.model
    }

    pub fn declared_idim(&self) -> Option<&IdimWitness> {
        self.declared_idim.as_ref()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn extremes(&self) -> Option<&[DVector<f64>]> {
        match &self.model {
            StateModel::FiniteExtreme { extremes } => Some(extremes),
            StateModel::QuantumSpectral { .. } => None,
        }
    }

    pub fn quantum_basis(&self) -> Option<&QuantumBasis> {
        match &self.model {
            StateModel::QuantumSpectral { basis } => Some(basis),
            StateModel::FiniteExtreme { .. } => None,
        }
    }

    /// Simplex theories have exactly `n` extreme states.
    pub fn is_simplex(&self) -> bool {
        self.extremes().is_some_and(|e| e.len() == self.dim())
    }

    /// Minimum and maximum of `a(omega)` over all states.
    pub fn effect_range(&self, a: &DVector<f64>) -> (f64, f64) {
        match &self.model {
            StateModel::FiniteExtreme { extremes } => extremes.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), v| {
                    let x = a.dot(v);
                    (lo.min(x), hi.max(x))
                },
            ),
            StateModel::QuantumSpectral { basis } => {
                let eig = linalg::hermitian_eigenvalues(&basis.hermitian(a));
                (*eig.last().unwrap(), eig[0])
            }
        }
    }

    /// States spanning the weight space, used for dynamical-equivalence tests.
    pub fn probe_states(&self) -> Vec<DVector<f64>> {
        match &self.model {
            StateModel::FiniteExtreme { extremes } => extremes.clone(),
            StateModel::QuantumSpectral { basis } => basis.probe_states(),
        }
    }

    /// Vertices of the effect-norm unit ball `{a : |a . v| <= 1}` of a
    /// polytope theory, computed once on demand.
    pub(crate) fn unit_ball_vertices(&self) -> Option<&[DVector<f64>]> {
        let extremes = self.extremes()?;
        Some(self.ball_vertices.get_or_init(|| enumerate_ball_vertices(extremes, self.dim())))
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

impl fmt::Display for TheorySpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {})", self.name, self.dim())
    }
}

fn enumerate_ball_vertices(extremes: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    let m = extremes.len();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let rows = DMatrix::from_fn(n, n, |r, c| extremes[subset[r]][c]);
        if let Some(inv) = rows.clone().try_inverse() {
            if linalg::rank(&rows, 1e-10) == n {
                // First sign fixed to + ; the ball is centrally symmetric.
                for mask in 0..(1u64 << (n - 1)) {
                    let signs = DVector::from_fn(n, |i, _| {
                        if i == 0 || mask & (1 << (i - 1)) == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    });
                    let a = &inv * signs;
                    if extremes.iter().all(|v| a.dot(v).abs() <= 1.0 + 1e-9)
                        && !vertices.iter().any(|w| (w - &a).norm() < 1e-9)
                    {
                        vertices.push(-&a);
                        vertices.push(a);
                    }
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return vertices;
            }
            i -= 1;
            if subset[i] < m - n + i {
                subset[i] += 1;
                for j in (i + 1)..n {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A generalized weight: a real coordinate vector in the weight space.
#[derive(Debug, Clone)]
pub struct Weight {
    theory: Theory,
    coords: DVector<f64>,
}

impl Weight {
    pub fn new(theory: &Theory, coords: DVector<f64>) -> Result<Self> {
        theory.check_dim(coords.len())?;
        Ok(Self {
            theory: theory.clone(),
            coords,
        })
    }

    pub fn zero(theory: &Theory) -> Self {
        Self {
            theory: theory.clone(),
            coords: DVector::zeros(theory.dim()),
        }
    }

    /// State of a quantum theory from a density matrix.
    pub fn from_density(theory: &Theory, rho: &CMatrix) -> Result<Self> {
        let basis = theory.quantum_basis().ok_or(Error::WrongModel { expected: "quantum" })?;
        if rho.shape() != (basis.hilbert_dim(), basis.hilbert_dim()) {
            return Err(Error::DimensionMismatch {
                expected: basis.hilbert_dim(),
                found: rho.nrows(),
            });
        }
        Self::new(theory, basis.coords(rho))
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    /// Value of the unit effect, i.e. the total probability.
    pub fn normalization(&self) -> f64 {
        self.theory.unit.dot(&self.coords)
    }

    pub fn scaled(&self, factor: f64) -> Weight {
        Weight {
            theory: self.theory.clone(),
            coords: &self.coords * factor,
        }
    }

    pub fn add(&self, other: &Weight) -> Result<Weight> {
        self.theory.check_dim(other.coords.len())?;
        Ok(Weight {
            theory: self.theory.clone(),
            coords: &self.coords + &other.coords,
        })
    }

    pub fn sub(&self, other: &Weight) -> Result<Weight> {
        self.theory.check_dim(other.coords.len())?;
        Ok(Weight {
            theory: self.theory.clone(),
            coords: &self.coords - &other.coords,
        })
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &Weight) -> Result<Weight> {
        check_unit_interval(lambda)?;
        self.theory.check_dim(other.coords.len())?;
        Ok(Weight {
            theory: self.theory.clone(),
            coords: &self.coords * lambda + &other.coords * (1.0 - lambda),
        })
    }

    /// Hermitian matrix of a quantum weight.
    pub fn hermitian(&self) -> Option<CMatrix> {
        self.theory.quantum_basis().map(|b| b.hermitian(&self.coords))
    }
}

/// A generalized effect: a real covector on the weight space.
#[derive(Debug, Clone)]
pub struct GeneralizedEffect {
    theory: Theory,
    coords: DVector<f64>,
}

impl GeneralizedEffect {
    pub fn new(theory: &Theory, coords: DVector<f64>) -> Result<Self> {
        theory.check_dim(coords.len())?;
        Ok(Self {
            theory: theory.clone(),
            coords,
        })
    }

    pub fn unit(theory: &Theory) -> Self {
        Self {
            theory: theory.clone(),
            coords: theory.unit.clone(),
        }
    }

    pub fn from_hermitian(theory: &Theory, h: &CMatrix) -> Result<Self> {
        let basis = theory.quantum_basis().ok_or(Error::WrongModel { expected: "quantum" })?;
        Self::new(theory, basis.coords(h))
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn scaled(&self, factor: f64) -> GeneralizedEffect {
        GeneralizedEffect {
            theory: self.theory.clone(),
            coords: &self.coords * factor,
        }
    }

    pub fn add(&self, other: &GeneralizedEffect) -> Result<GeneralizedEffect> {
        self.theory.check_dim(other.coords.len())?;
        Ok(GeneralizedEffect {
            theory: self.theory.clone(),
            coords: &self.coords + &other.coords,
        })
    }

    pub fn sub(&self, other: &GeneralizedEffect) -> Result<GeneralizedEffect> {
        self.theory.check_dim(other.coords.len())?;
        Ok(GeneralizedEffect {
            theory: self.theory.clone(),
            coords: &self.coords - &other.coords,
        })
    }

    pub fn hermitian(&self) -> Option<CMatrix> {
        self.theory.quantum_basis().map(|b| b.hermitian(&self.coords))
    }
}

/// A generalized transformation acting on weight coordinates.
#[derive(Debug, Clone)]
pub struct Transformation {
    theory: Theory,
    matrix: DMatrix<f64>,
    label: Option<String>,
}

impl Transformation {
    pub fn new(theory: &Theory, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.shape() != (theory.dim(), theory.dim()) {
            return Err(Error::DimensionMismatch {
                expected: theory.dim(),
                found: if matrix.nrows() != theory.dim() {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        Ok(Self {
            theory: theory.clone(),
            matrix,
            label: None,
        })
    }

    pub fn identity(theory: &Theory) -> Self {
        Self {
            theory: theory.clone(),
            matrix: DMatrix::identity(theory.dim(), theory.dim()),
            label: Some("I".into()),
        }
    }

    pub fn zero(theory: &Theory) -> Self {
        Self {
            theory: theory.clone(),
            matrix: DMatrix::zeros(theory.dim(), theory.dim()),
            label: Some("0".into()),
        }
    }

    /// Quantum operation `rho -> sum_i K_i rho K_i^dagger`.
    pub fn from_kraus(theory: &Theory, kraus: &[CMatrix]) -> Result<Self> {
        let basis = theory.quantum_basis().ok_or(Error::WrongModel { expected: "quantum" })?;
        for k in kraus {
            if k.shape() != (basis.hilbert_dim(), basis.hilbert_dim()) {
                return Err(Error::DimensionMismatch {
                    expected: basis.hilbert_dim(),
                    found: k.nrows(),
                });
            }
        }
        Self::new(theory, basis.kraus_matrix(kraus))
    }

    /// Measure-and-prepare map `omega -> state * effect(omega)`.
    pub fn measure_prepare(effect: &GeneralizedEffect, state: &Weight) -> Result<Self> {
        effect.theory.check_dim(state.coords.len())?;
        Self::new(&effect.theory, &state.coords * effect.coords.transpose())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The induced effect `u o A`.
    pub fn effect(&self) -> GeneralizedEffect {
        GeneralizedEffect {
            theory: self.theory.clone(),
            coords: self.matrix.transpose() * &self.theory.unit,
        }
    }

    /// Probability `omega(A)` of the transformation occurring on a state.
    pub fn probability(&self, omega: &Weight) -> Result<f64> {
        probability(&self.effect(), omega)
    }

    pub fn scaled_unchecked(&self, factor: f64) -> Transformation {
        Transformation {
            theory: self.theory.clone(),
            matrix: &self.matrix * factor,
            label: None,
        }
    }

    /// Plain matrix sum, no coexistence check.
    pub fn sum_unchecked(&self, other: &Transformation) -> Result<Transformation> {
        self.theory.check_dim(other.matrix.nrows())?;
        Ok(Transformation {
            theory: self.theory.clone(),
            matrix: &self.matrix + &other.matrix,
            label: None,
        })
    }

    pub fn difference(&self, other: &Transformation) -> Result<Transformation> {
        self.theory.check_dim(other.matrix.nrows())?;
        Ok(Transformation {
            theory: self.theory.clone(),
            matrix: &self.matrix - &other.matrix,
            label: None,
        })
    }
}

fn check_unit_interval(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
        return Err(Error::ScalarOutOfRange(lambda));
    }
    Ok(())
}

/// Pairing `<a, omega>`.
pub fn probability(effect: &GeneralizedEffect, state: &Weight) -> Result<f64> {
    effect.theory.check_dim(state.coords.len())?;
    Ok(effect.coords.dot(&state.coords))
}

/// Schrodinger action `Op_A omega`.
pub fn schrodinger_apply(a: &Transformation, omega: &Weight) -> Result<Weight> {
    a.theory.check_dim(omega.coords.len())?;
    Ok(Weight {
        theory: a.theory.clone(),
        coords: &a.matrix * &omega.coords,
    })
}

/// Dual action `b -> b o A` on effects.
pub fn heisenberg_apply(a: &Transformation, b: &GeneralizedEffect) -> Result<GeneralizedEffect> {
    a.theory.check_dim(b.coords.len())?;
    Ok(GeneralizedEffect {
        theory: a.theory.clone(),
        coords: a.matrix.tr_mul(&b.coords),
    })
}

/// `outer o inner`: apply `inner` first, then `outer`.
pub fn compose(outer: &Transformation, inner: &Transformation) -> Result<Transformation> {
    outer.theory.check_dim(inner.matrix.nrows())?;
    Ok(Transformation {
        theory: outer.theory.clone(),
        matrix: &outer.matrix * &inner.matrix,
        label: match (&outer.label, &inner.label) {
            (Some(a), Some(b)) => Some(format!("{a}∘{b}")),
            _ => None,
        },
    })
}

/// Bayes-rule conditioning: `(Op_A omega / omega(A), omega(A))`.
pub fn conditional_state(omega: &Weight, a: &Transformation) -> Result<(Weight, f64)> {
    let out = schrodinger_apply(a, omega)?;
    let p = out.normalization();
    let tol = omega.theory.tol.cone;
    if p <= tol {
        return Err(Error::ZeroProbability {
            probability: p,
            tolerance: tol,
        });
    }
    Ok((out.scaled(1.0 / p), p))
}

/// Same induced effect, within the cone tolerance.
pub fn are_informationally_equivalent(a: &Transformation, b: &Transformation) -> Result<bool> {
    a.theory.check_dim(b.matrix.nrows())?;
    let diff = a.effect().coords - b.effect().coords;
    Ok(linalg::max_abs_vec(&diff) <= a.theory.tol.cone)
}

/// Same conditional states on every probe state. Probes on which both
/// transformations have zero probability impose no constraint.
pub fn are_dynamically_equivalent(a: &Transformation, b: &Transformation) -> Result<bool> {
    a.theory.check_dim(b.matrix.nrows())?;
    let tol = a.theory.tol.cone;
    for probe in a.theory.probe_states() {
        let oa = &a.matrix * &probe;
        let ob = &b.matrix * &probe;
        let pa = a.theory.unit.dot(&oa);
        let pb = a.theory.unit.dot(&ob);
        match (pa.abs() > tol, pb.abs() > tol) {
            (false, false) => {
                // Zero-probability outputs must themselves vanish.
                if linalg::max_abs_vec(&oa) > tol || linalg::max_abs_vec(&ob) > tol {
                    return Ok(false);
                }
            }
            (true, true) => {
                if linalg::max_abs_vec(&(oa / pa - ob / pb)) > tol {
                    return Ok(false);
                }
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Sum of two coexistent transformations.
pub fn add_coexistent(a: &Transformation, b: &Transformation) -> Result<Transformation> {
    a.theory.check_dim(b.matrix.nrows())?;
    let sum = a.effect().coords + b.effect().coords;
    let (_, sup) = a.theory.effect_range(&sum);
    if sup > 1.0 + a.theory.tol.cone {
        return Err(Error::NotCoexistent { sup });
    }
    a.sum_unchecked(b)
}

/// `lambda * A` for `lambda` in `[0, 1]`.
pub fn scalar_multiply(lambda: f64, a: &Transformation) -> Result<Transformation> {
    check_unit_interval(lambda)?;
    Ok(a.scaled_unchecked(lambda))
}

/// `lambda * A1 + (1 - lambda) * A2`.
pub fn convex_mix(lambda: f64, a1: &Transformation, a2: &Transformation) -> Result<Transformation> {
    check_unit_interval(lambda)?;
    a1.theory.check_dim(a2.matrix.nrows())?;
    Ok(Transformation {
        theory: a1.theory.clone(),
        matrix: &a1.matrix * lambda + &a2.matrix * (1.0 - lambda),
        label: None,
    })
}

pub fn is_physical_state(omega: &Weight) -> bool {
    let t = &omega.theory;
    let tol = t.tol.cone;
    if (omega.normalization() - 1.0).abs() > tol {
        return false;
    }
    match &t.model {
        StateModel::FiniteExtreme { extremes } => lp::combination_residual(extremes, &omega.coords, true) <= tol,
        StateModel::QuantumSpectral { basis } => {
            let eig = linalg::hermitian_eigenvalues(&basis.hermitian(&omega.coords));
            *eig.last().unwrap() >= -tol
        }
    }
}

/// `0 <= omega(a) <= 1` on every state.
pub fn is_physical_effect(a: &GeneralizedEffect) -> bool {
    let tol = a.theory.tol.cone;
    let (lo, hi) = a.theory.effect_range(&a.coords);
    lo >= -tol && hi <= 1.0 + tol
}

/// Polytope theories: every extreme state goes into the weight cone and
/// `u o A <= u`. Quantum: completely positive with `u o A <= u`.
pub fn is_physical_transformation(a: &Transformation) -> bool {
    let t = &a.theory;
    let tol = t.tol.cone;
    if !is_physical_effect(&a.effect()) {
        return false;
    }
    match &t.model {
        StateModel::FiniteExtreme { extremes } => extremes.iter().all(|v| {
            let out = &a.matrix * v;
            let scale = out.norm().max(1.0);
            lp::combination_residual(extremes, &out, false) <= tol * scale
        }),
        StateModel::QuantumSpectral { basis } => {
            let choi = basis.choi(&a.matrix);
            let eig = linalg::hermitian_eigenvalues(&choi);
            *eig.last().unwrap() >= -tol
        }
    }
}

/// A complete set of transformations.
#[derive(Debug, Clone)]
pub struct Experiment {
    theory: Theory,
    transformations: Vec<Transformation>,
    labels: Vec<String>,
}

impl Experiment {
    pub fn new(transformations: Vec<Transformation>) -> Result<Self> {
        let first = transformations.first().ok_or(Error::EmptyExperiment)?;
        let theory = first.theory.clone();
        for t in &transformations {
            theory.check_dim(t.matrix.nrows())?;
        }
        let labels = transformations
            .iter()
            .enumerate()
            .map(|(i, t)| t.label.clone().unwrap_or_else(|| format!("outcome {i}")))
            .collect();
        Ok(Self {
            theory,
            transformations,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.transformations.len() {
            return Err(Error::InvalidArgument("one label per transformation".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn transformations(&self) -> &[Transformation] {
        &self.transformations
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The deterministic transformation `sum_j A_j`.
    pub fn total(&self) -> Transformation {
        let mut m = DMatrix::zeros(self.theory.dim(), self.theory.dim());
        for t in &self.transformations {
            m += &t.matrix;
        }
        Transformation {
            theory: self.theory.clone(),
            matrix: m,
            label: Some("S(A)".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub completeness_deviation: f64,
    pub complete: bool,
    pub physical: Vec<bool>,
    pub passed: bool,
}

/// Completeness `u o sum_j A_j = u` and physicality of each member.
pub fn validate_experiment(e: &Experiment) -> ExperimentReport {
    let total = e.total().effect();
    let deviation = linalg::max_abs_vec(&(total.coords - &e.theory.unit));
    let complete = deviation <= e.theory.tol.cone;
    let physical: Vec<bool> = e.transformations.iter().map(is_physical_transformation).collect();
    let passed = complete && physical.iter().all(|&p| p);
    ExperimentReport {
        completeness_deviation: deviation,
        complete,
        physical,
        passed,
    }
}
