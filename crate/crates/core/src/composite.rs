//! Bipartite composition: tensor-product coordinates, local embeddings,
//! marginals and the no-signaling check.
//!
//! Joint coordinates are row-major over `(first index, second index)`, so a
//! product weight is `kron(w1, w2)` and a pair of local transformations acts
//! as `kron(A, B)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::theory::{
    self, Experiment, GeneralizedEffect, IdimWitness, StateModel, Theory, TheorySpace, Transformation, Weight,
};

/// Which side of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Factor {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct CompositeTheory {
    factors: [Theory; 2],
    joint: Theory,
}

fn product_witness(a: Option<&IdimWitness>, b: Option<&IdimWitness>) -> Option<IdimWitness> {
    let (a, b) = (a?, b?);
    let mut states = Vec::new();
    let mut effects = Vec::new();
    for (sa, ea) in a.states.iter().zip(&a.effects) {
        for (sb, eb) in b.states.iter().zip(&b.effects) {
            states.push(linalg::kron_vec(sa, sb));
            effects.push(linalg::kron_vec(ea, eb));
        }
    }
    Some(IdimWitness { states, effects })
}

impl CompositeTheory {
    /// Composite of two theories of the same kind: quantum factors give the
    /// quantum joint system on the product basis, polytope factors give the
    /// polytope whose extreme states are the products of local extremes
    /// (exact for classical systems).
    pub fn new(first: &Theory, second: &Theory) -> Result<Arc<Self>> {
        let name = format!("{} x {}", first.name(), second.name());
        let witness = product_witness(first.declared_idim(), second.declared_idim());
        let joint = match (first.model(), second.model()) {
            (StateModel::QuantumSpectral { basis: b1 }, StateModel::QuantumSpectral { basis: b2 }) => {
                TheorySpace::quantum(name, b1.tensor(b2), witness)?
            }
            (StateModel::FiniteExtreme { extremes: e1 }, StateModel::FiniteExtreme { extremes: e2 }) => {
                let extremes = e1
                    .iter()
                    .flat_map(|a| e2.iter().map(move |b| linalg::kron_vec(a, b)))
                    .collect();
                let unit = linalg::kron_vec(first.unit(), second.unit());
                TheorySpace::finite_extreme(name, unit, extremes, witness)?
            }
            _ => {
                return Err(Error::InvalidTheory(
                    "composites are defined only for two quantum or two polytope factors".into(),
                ))
            }
        };
        let joint = joint.with_tolerances(*first.tolerances());
        Ok(Arc::new(Self {
            factors: [first.clone(), second.clone()],
            joint,
        }))
    }

    pub fn factor(&self, which: Factor) -> &Theory {
        match which {
            Factor::First => &self.factors[0],
            Factor::Second => &self.factors[1],
        }
    }

    pub fn joint(&self) -> &Theory {
        &self.joint
    }

    fn dims(&self) -> (usize, usize) {
        (self.factors[0].dim(), self.factors[1].dim())
    }

    /// `(A, B)`: the joint transformation with `A` on the first factor and
    /// `B` on the second; `None` stands for the identity.
    pub fn embed_local(&self, first: Option<&Transformation>, second: Option<&Transformation>) -> Result<Transformation> {
        let (n1, n2) = self.dims();
        let a = match first {
            Some(t) => {
                check_len(n1, t.matrix().nrows())?;
                t.matrix().clone()
            }
            None => DMatrix::identity(n1, n1),
        };
        let b = match second {
            Some(t) => {
                check_len(n2, t.matrix().nrows())?;
                t.matrix().clone()
            }
            None => DMatrix::identity(n2, n2),
        };
        Transformation::new(&self.joint, a.kronecker(&b))
    }

    /// Product effect `a (x) b`.
    pub fn embed_effects(&self, first: &GeneralizedEffect, second: &GeneralizedEffect) -> Result<GeneralizedEffect> {
        let (n1, n2) = self.dims();
        check_len(n1, first.coords().len())?;
        check_len(n2, second.coords().len())?;
        GeneralizedEffect::new(&self.joint, linalg::kron_vec(first.coords(), second.coords()))
    }

    pub fn product_state(&self, first: &Weight, second: &Weight) -> Result<Weight> {
        let (n1, n2) = self.dims();
        check_len(n1, first.coords().len())?;
        check_len(n2, second.coords().len())?;
        Weight::new(&self.joint, linalg::kron_vec(first.coords(), second.coords()))
    }

    /// Joint weight as an `n1 x n2` coefficient matrix.
    pub fn weight_matrix(&self, omega: &Weight) -> Result<DMatrix<f64>> {
        let (n1, n2) = self.dims();
        check_len(n1 * n2, omega.coords().len())?;
        Ok(linalg::unvec_row_major(omega.coords(), n1, n2))
    }

    /// Marginal on one factor: `Omega|_1(a) = Omega(a (x) u)` and likewise
    /// for the second slot.
    pub fn local_state(&self, omega: &Weight, which: Factor) -> Result<Weight> {
        let w = self.weight_matrix(omega)?;
        match which {
            Factor::First => Weight::new(&self.factors[0], &w * self.factors[1].unit()),
            Factor::Second => Weight::new(&self.factors[1], w.tr_mul(self.factors[0].unit())),
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Largest entry of `[(A, I), (I, B)]`.
pub fn embedding_commutator(c: &CompositeTheory, a: &Transformation, b: &Transformation) -> Result<f64> {
    let left = c.embed_local(Some(a), None)?;
    let right = c.embed_local(None, Some(b))?;
    let both = c.embed_local(Some(a), Some(b))?;
    let lr = left.matrix() * right.matrix();
    let rl = right.matrix() * left.matrix();
    Ok(linalg::max_abs(&(&lr - &rl)).max(linalg::max_abs(&(&lr - both.matrix()))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignalingReport {
    /// Max coordinate deviation between the second marginal before and after
    /// the experiment ran on the first factor.
    pub deviation: f64,
    /// Max deviation of `sum_j p_j Omega_j|_2` from `Omega|_2`.
    pub consistency_deviation: f64,
    pub outcome_probabilities: Vec<f64>,
}

/// Runs `experiment` on the first factor of `omega` and measures how much the
/// second factor's local state moves.
pub fn check_no_signaling(c: &CompositeTheory, omega: &Weight, experiment: &Experiment) -> Result<NoSignalingReport> {
    let validation = theory::validate_experiment(experiment);
    if !validation.passed {
        return Err(Error::InvalidArgument(format!(
            "experiment is not valid (completeness deviation {:e}, physical {:?})",
            validation.completeness_deviation, validation.physical
        )));
    }
    let before = c.local_state(omega, Factor::Second)?;
    let total = c.embed_local(Some(&experiment.total()), None)?;
    let after = c.local_state(&theory::schrodinger_apply(&total, omega)?, Factor::Second)?;
    let deviation = linalg::max_abs_vec(&(after.coords() - before.coords()));

    let mut recombined = DVector::zeros(before.coords().len());
    let mut probabilities = Vec::new();
    for t in experiment.transformations() {
        let embedded = c.embed_local(Some(t), None)?;
        match theory::conditional_state(omega, &embedded) {
            Ok((cond, p)) => {
                recombined += c.local_state(&cond, Factor::Second)?.coords() * p;
                probabilities.push(p);
            }
            Err(Error::ZeroProbability { probability, .. }) => probabilities.push(probability),
            Err(e) => return Err(e),
        }
    }
    let consistency_deviation = linalg::max_abs_vec(&(recombined - before.coords()));
    Ok(NoSignalingReport {
        deviation,
        consistency_deviation,
        outcome_probabilities: probabilities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineDimensionReport {
    pub adm_joint: usize,
    pub adm_first: usize,
    pub adm_second: usize,
    /// `adm1 * adm2 + adm1 + adm2`.
    pub predicted: usize,
    pub passed: bool,
}

/// Local observability bookkeeping for the joint affine dimension.
pub fn affine_dimension_identity_check(c: &CompositeTheory) -> AffineDimensionReport {
    let a1 = c.factors[0].affine_dim();
    let a2 = c.factors[1].affine_dim();
    let joint = c.joint.affine_dim();
    let predicted = a1 * a2 + a1 + a2;
    AffineDimensionReport {
        adm_joint: joint,
        adm_first: a1,
        adm_second: a2,
        predicted,
        passed: joint == predicted,
    }
}
