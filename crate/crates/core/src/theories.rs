//! Canonical theory builders and seeded random generators.
//!
//! All randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`), a
//! counter-based generator, seeded with `seed_from_u64`. A [`Sampler`] is a
//! plain value: cloning it forks an identical stream.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::composite::CompositeTheory;
use crate::error::{Error, Result};
use crate::faithful::BipartiteState;
use crate::geometry;
use crate::linalg::{self, CMatrix, C64};
use crate::theory::{
    Experiment, GeneralizedEffect, IdimWitness, QuantumBasis, Theory, TheorySpace, Transformation, Weight,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryKind {
    Classical { k: usize },
    Quantum { d: usize },
    Gbit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuilderConfig {
    pub kind: TheoryKind,
    pub seed: u64,
}

impl BuilderConfig {
    pub fn build(&self) -> Result<Theory> {
        match self.kind {
            TheoryKind::Classical { k } => build_classical(k),
            TheoryKind::Quantum { d } => build_quantum(d),
            TheoryKind::Gbit => build_gbit(),
        }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.seed)
    }
}

fn unit_vector(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Probability simplex with `k` outcomes in the delta basis.
pub fn build_classical(k: usize) -> Result<Theory> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("classical theory needs k >= 2, got {k}")));
    }
    let extremes: Vec<_> = (0..k).map(|i| unit_vector(k, i)).collect();
    let witness = IdimWitness {
        states: extremes.clone(),
        effects: extremes.clone(),
    };
    TheorySpace::finite_extreme(format!("classical({k})"), DVector::from_element(k, 1.0), extremes, Some(witness))
}

/// `d`-level quantum system on the generalized Gell-Mann basis, with the
/// computational basis declared as the discriminable set.
pub fn build_quantum(d: usize) -> Result<Theory> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("quantum theory needs d >= 2, got {d}")));
    }
    let basis = QuantumBasis::gell_mann(d);
    let projectors: Vec<_> = (0..d)
        .map(|j| {
            let mut p = CMatrix::zeros(d, d);
            p[(j, j)] = C64::new(1.0, 0.0);
            basis.coords(&p)
        })
        .collect();
    let witness = IdimWitness {
        states: projectors.clone(),
        effects: projectors,
    };
    TheorySpace::quantum(format!("quantum({d})"), basis, Some(witness))
}

/// Square state space: extreme states `(1, x, y)` with `x, y = +-1`,
/// unit effect `(1, 0, 0)`.
pub fn build_gbit() -> Result<Theory> {
    let extremes = vec![
        DVector::from_vec(vec![1.0, 1.0, 1.0]),
        DVector::from_vec(vec![1.0, -1.0, 1.0]),
        DVector::from_vec(vec![1.0, -1.0, -1.0]),
        DVector::from_vec(vec![1.0, 1.0, -1.0]),
    ];
    TheorySpace::finite_extreme("gbit", DVector::from_vec(vec![1.0, 0.0, 0.0]), extremes, None)
}

/// Maximally entangled state `|Phi+> = sum_j |jj> / sqrt(d)` of two
/// `d`-level systems.
pub fn build_bell_state(d: usize) -> Result<BipartiteState> {
    let q = build_quantum(d)?;
    let composite = CompositeTheory::new(&q, &q)?;
    let mut ket = DVector::from_element(d * d, C64::new(0.0, 0.0));
    for j in 0..d {
        ket[j * d + j] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    let rho = &ket * ket.adjoint();
    let weight = Weight::from_density(composite.joint(), &rho)?;
    BipartiteState::new(composite, weight)
}

/// `sum_i p_i delta_i (x) delta_i` on two copies of the `k`-simplex.
pub fn build_classical_correlated(k: usize, p: &[f64]) -> Result<BipartiteState> {
    if p.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: p.len(),
        });
    }
    if p.iter().any(|&x| x <= 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("weights must be positive and sum to 1".into()));
    }
    let c = build_classical(k)?;
    let composite = CompositeTheory::new(&c, &c)?;
    let mut coords = DVector::zeros(k * k);
    for (i, &pi) in p.iter().enumerate() {
        coords[i * k + i] = pi;
    }
    let weight = Weight::new(composite.joint(), coords)?;
    BipartiteState::new(composite, weight)
}

/// Value-typed random stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }

    fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| C64::new(self.normal(), self.normal()))
    }

    /// Flat Dirichlet sample.
    pub fn probability_vector(&mut self, k: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|x| x / total).collect()
    }

    pub fn unit_ket(&mut self, d: usize) -> DVector<C64> {
        let v = DVector::from_fn(d, |_, _| C64::new(self.normal(), self.normal()));
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }

    /// Random state: Hilbert-Schmidt density matrix for quantum theories,
    /// flat Dirichlet mixture of extreme states for polytopes.
    pub fn state(&mut self, theory: &Theory) -> Weight {
        if let Some(basis) = theory.quantum_basis() {
            let d = basis.hilbert_dim();
            let g = self.ginibre(d, d);
            let rho = &g * g.adjoint();
            let tr = rho.trace();
            Weight::from_density(theory, &(rho / tr)).expect("dimension fixed by basis")
        } else {
            let extremes = theory.extremes().expect("polytope");
            let p = self.probability_vector(extremes.len());
            let coords = extremes
                .iter()
                .zip(&p)
                .fold(DVector::zeros(theory.dim()), |acc, (v, &w)| acc + v * w);
            Weight::new(theory, coords).expect("dimension fixed by theory")
        }
    }

    /// Pure state for quantum theories, a random extreme state otherwise.
    pub fn pure_state(&mut self, theory: &Theory) -> Weight {
        if let Some(basis) = theory.quantum_basis() {
            let psi = self.unit_ket(basis.hilbert_dim());
            Weight::from_density(theory, &(&psi * psi.adjoint())).expect("dimension fixed by basis")
        } else {
            let extremes = theory.extremes().expect("polytope");
            let i = self.index(extremes.len());
            Weight::new(theory, extremes[i].clone()).expect("dimension fixed by theory")
        }
    }

    /// Random `d x d` Kraus operators `K_i` with `sum K_i^dagger K_i = I`,
    /// split into `groups` consecutive blocks of `per_group` operators.
    pub fn kraus_instrument(&mut self, d: usize, groups: usize, per_group: usize) -> Vec<Vec<CMatrix>> {
        let ops: Vec<CMatrix> = (0..groups * per_group).map(|_| self.ginibre(d, d)).collect();
        let mut s = CMatrix::zeros(d, d);
        for k in &ops {
            s += k.adjoint() * k;
        }
        let (vals, vecs) = linalg::hermitian_eigen(&s);
        let mut inv_sqrt = CMatrix::zeros(d, d);
        for (i, v) in vals.iter().enumerate() {
            let col = vecs.column(i);
            inv_sqrt += col * col.adjoint() * C64::new(1.0 / v.sqrt(), 0.0);
        }
        let normalized: Vec<CMatrix> = ops.iter().map(|k| k * &inv_sqrt).collect();
        normalized.chunks(per_group).map(|c| c.to_vec()).collect()
    }

    /// Random trace-preserving quantum operation with `d` Kraus operators.
    pub fn quantum_channel_kraus(&mut self, d: usize) -> Vec<CMatrix> {
        self.kraus_instrument(d, 1, d).pop().expect("one group")
    }

    /// Random deterministic transformation (channel) of any builder theory.
    pub fn channel(&mut self, theory: &Theory) -> Result<Transformation> {
        Ok(self.instrument(theory, 1)?.total().with_label("channel"))
    }

    /// Random `m`-outcome instrument whose members sum to a deterministic
    /// transformation. Quantum: random Kraus instrument. Simplex:
    /// sub-stochastic matrices with stochastic sum. Other polytopes:
    /// measure-and-prepare over a post-processed discriminating observable.
    pub fn instrument(&mut self, theory: &Theory, m: usize) -> Result<Experiment> {
        if m == 0 {
            return Err(Error::EmptyExperiment);
        }
        let members: Vec<Transformation> = if let Some(basis) = theory.quantum_basis() {
            let d = basis.hilbert_dim();
            self.kraus_instrument(d, m, d)
                .iter()
                .map(|k| Transformation::from_kraus(theory, k))
                .collect::<Result<_>>()?
        } else if theory.is_simplex() {
            let extremes = theory.extremes().expect("polytope");
            let k = extremes.len();
            let v = DMatrix::from_fn(k, k, |r, c| extremes[c][r]);
            let v_inv = v.clone().try_inverse().ok_or_else(|| Error::InvalidTheory("singular simplex".into()))?;
            let raw: Vec<DMatrix<f64>> = (0..m).map(|_| DMatrix::from_fn(k, k, |_, _| self.uniform())).collect();
            let total = raw.iter().fold(DMatrix::zeros(k, k), |acc, r| acc + r);
            let col_sums: Vec<f64> = (0..k).map(|c| total.column(c).sum()).collect();
            raw.iter()
                .map(|r| {
                    let s = DMatrix::from_fn(k, k, |i, j| r[(i, j)] / col_sums[j]);
                    Transformation::new(theory, &v * s * &v_inv)
                })
                .collect::<Result<_>>()?
        } else {
            let witness = match theory.declared_idim() {
                Some(w) => w.clone(),
                None => geometry::informational_dimension(theory, theory.dim()).witness,
            };
            let base = &witness.effects;
            let mut members = Vec::with_capacity(m);
            // Column-stochastic post-processing of the base observable.
            let weights: Vec<Vec<f64>> = (0..base.len()).map(|_| self.probability_vector(m)).collect();
            for j in 0..m {
                let coords = base
                    .iter()
                    .zip(&weights)
                    .fold(DVector::zeros(theory.dim()), |acc, (e, w)| acc + e * w[j]);
                let effect = GeneralizedEffect::new(theory, coords)?;
                let target = self.state(theory);
                members.push(Transformation::measure_prepare(&effect, &target)?);
            }
            members
        };
        let labels = (0..m).map(|j| format!("outcome {j}")).collect();
        Experiment::new(members)?.with_labels(labels)
    }

    /// Random physical effect: `U diag(x) U^dagger` with uniform spectrum
    /// for quantum theories; a random member of a random 2-outcome
    /// instrument otherwise.
    pub fn physical_effect(&mut self, theory: &Theory) -> Result<GeneralizedEffect> {
        if let Some(basis) = theory.quantum_basis() {
            let d = basis.hilbert_dim();
            let g = self.ginibre(d, d);
            let h = &g + g.adjoint();
            let (_, u) = linalg::hermitian_eigen(&h);
            let diag = CMatrix::from_diagonal(&DVector::from_fn(d, |_, _| C64::new(self.uniform(), 0.0)));
            GeneralizedEffect::from_hermitian(theory, &(&u * diag * u.adjoint()))
        } else {
            Ok(self.instrument(theory, 2)?.transformations()[0].effect())
        }
    }

    /// Gaussian `n x n` coordinate matrix.
    pub fn generalized_transformation(&mut self, theory: &Theory) -> Transformation {
        let n = theory.dim();
        Transformation::new(theory, DMatrix::from_fn(n, n, |_, _| self.normal())).expect("square of theory dimension")
    }

    pub fn generalized_effect(&mut self, theory: &Theory) -> GeneralizedEffect {
        let n = theory.dim();
        GeneralizedEffect::new(theory, DVector::from_fn(n, |_, _| self.normal())).expect("theory dimension")
    }

    pub fn generalized_weight(&mut self, theory: &Theory) -> Weight {
        let n = theory.dim();
        Weight::new(theory, DVector::from_fn(n, |_, _| self.normal())).expect("theory dimension")
    }

    /// Random state of a composite: quantum joint density matrix, or a
    /// random joint distribution over product extremes.
    pub fn joint_state(&mut self, composite: &Arc<CompositeTheory>) -> Weight {
        self.state(composite.joint())
    }
}

/// Random trace-preserving operation on `d` levels from `seed`.
pub fn random_quantum_operation(theory: &Theory, seed: u64) -> Result<Transformation> {
    let d = theory
        .quantum_basis()
        .ok_or(crate::error::Error::WrongModel { expected: "quantum" })?
        .hilbert_dim();
    let kraus = Sampler::new(seed).quantum_channel_kraus(d);
    Transformation::from_kraus(theory, &kraus)
}

pub fn random_state(theory: &Theory, seed: u64) -> Weight {
    Sampler::new(seed).state(theory)
}

pub fn random_instrument(theory: &Theory, m: usize, seed: u64) -> Result<Experiment> {
    Sampler::new(seed).instrument(theory, m)
}

/// Pauli-style helpers for tests and examples.
pub mod qubit {
    use super::*;

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn matrix(rows: &[[C64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |r, col| rows[r][col])
    }

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        matrix(&[[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
    }

    pub fn y() -> CMatrix {
        matrix(&[[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])
    }

    pub fn z() -> CMatrix {
        matrix(&[[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
    }

    /// `|i><j|`.
    pub fn ket_bra(i: usize, j: usize) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(i, j)] = c(1.0, 0.0);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{is_physical_effect, is_physical_state, is_physical_transformation, validate_experiment};

    #[test]
    fn classical_bit_dimensions() {
        let t = build_classical(2).unwrap();
        assert_eq!(t.affine_dim(), 1);
        assert_eq!(t.unit().as_slice(), &[1.0, 1.0]);
        assert_eq!(t.declared_idim().unwrap().cardinality(), 2);
    }

    #[test]
    fn quantum_dimensions_and_unit() {
        let q = build_quantum(2).unwrap();
        assert_eq!(q.dim(), 4);
        assert_eq!(q.affine_dim(), 3);
        let unit = q.quantum_basis().unwrap().hermitian(q.unit());
        assert!((unit - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn gbit_dimensions() {
        let g = build_gbit().unwrap();
        assert_eq!(g.affine_dim(), 2);
        assert!(g.declared_idim().is_none());
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(build_classical(1).is_err());
        assert!(build_quantum(1).is_err());
        assert!(build_classical_correlated(2, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn random_outputs_are_physical() {
        for theory in [build_quantum(2).unwrap(), build_quantum(3).unwrap(), build_classical(3).unwrap(), build_gbit().unwrap()] {
            let mut s = Sampler::new(7);
            for _ in 0..5 {
                assert!(is_physical_state(&s.state(&theory)));
                assert!(is_physical_state(&s.pure_state(&theory)));
                assert!(is_physical_effect(&s.physical_effect(&theory).unwrap()));
                let instrument = s.instrument(&theory, 3).unwrap();
                assert!(validate_experiment(&instrument).passed, "{}", theory.name());
                assert!(is_physical_transformation(&s.channel(&theory).unwrap()));
            }
        }
    }

    #[test]
    fn seeds_reproduce_bitwise() {
        let q = build_quantum(3).unwrap();
        let a = random_quantum_operation(&q, 42).unwrap();
        let b = random_quantum_operation(&q, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = random_quantum_operation(&q, 43).unwrap();
        assert_ne!(a.matrix(), c.matrix());
        assert_eq!(random_state(&q, 5).coords(), random_state(&q, 5).coords());
    }
}
