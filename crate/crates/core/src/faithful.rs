//! Symmetric faithful bipartite states and the transposition they induce.
//!
//! For a joint weight `Phi` on two identical systems, the linear maps
//! `T -> (T, I) Phi` and `T -> (I, T) Phi` are built as explicit
//! `n^2 x n^2` matrices over row-major `vec(T)`. Dynamical faithfulness is
//! full column rank of the first one; the transpose `A'` of `A` is the
//! rank-thresholded least-squares solution of `(A, I) Phi = (I, A') Phi`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::composite::{CompositeTheory, Factor};
use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg::{self, RankedSvd};
use crate::theories::Sampler;
use crate::theory::{self, GeneralizedEffect, Theory, Transformation, Weight};

/// A normalized weight on a composite of two identical systems.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    composite: Arc<CompositeTheory>,
    weight: Weight,
}

impl BipartiteState {
    pub fn new(composite: Arc<CompositeTheory>, weight: Weight) -> Result<Self> {
        let n1 = composite.factor(Factor::First).dim();
        let n2 = composite.factor(Factor::Second).dim();
        if n1 != n2 {
            return Err(Error::InvalidArgument(format!(
                "faithful-state calculus needs identical factors, got dimensions {n1} and {n2}"
            )));
        }
        if weight.coords().len() != n1 * n2 {
            return Err(Error::DimensionMismatch {
                expected: n1 * n2,
                found: weight.coords().len(),
            });
        }
        let weight = Weight::new(composite.joint(), weight.into_coords())?;
        let norm = weight.normalization();
        let tol = composite.joint().tolerances().cone;
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("joint state has normalization {norm}")));
        }
        Ok(Self { composite, weight })
    }

    pub fn composite(&self) -> &Arc<CompositeTheory> {
        &self.composite
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// The (common) local theory.
    pub fn theory(&self) -> &Theory {
        self.composite.factor(Factor::First)
    }

    pub fn local_state(&self, which: Factor) -> Weight {
        self.composite
            .local_state(&self.weight, which)
            .expect("weight dimension checked at construction")
    }

    /// Joint weight as the `n x n` matrix `F[(i, j)] = Phi(e_i, e_j)`.
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        self.composite
            .weight_matrix(&self.weight)
            .expect("weight dimension checked at construction")
    }
}

/// `Phi((A, B))`: probability of the local pair `(A, B)` on `Phi`.
pub fn pairing(phi: &BipartiteState, a: &Transformation, b: &Transformation) -> Result<f64> {
    let joint = phi.composite.embed_local(Some(a), Some(b))?;
    let out = theory::schrodinger_apply(&joint, &phi.weight)?;
    Ok(out.normalization())
}

/// `Phi(a, b)` on a pair of generalized effects.
pub fn pairing_effects(phi: &BipartiteState, a: &GeneralizedEffect, b: &GeneralizedEffect) -> Result<f64> {
    let joint = phi.composite.embed_effects(a, b)?;
    theory::probability(&joint, &phi.weight)
}

/// Largest `|Phi(e_i, e_j) - Phi(e_j, e_i)|` over basis effect pairs.
pub fn symmetry_deviation(phi: &BipartiteState) -> f64 {
    let f = phi.coefficient_matrix();
    linalg::max_abs(&(&f - f.transpose()))
}

/// Bilinearity reduces the symmetry identity to basis effect pairs.
pub fn is_symmetric(phi: &BipartiteState) -> bool {
    symmetry_deviation(phi) <= 1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FaithfulnessRank {
    pub faithful: bool,
    pub rank: usize,
    pub expected: usize,
}

fn slot_matrix(phi: &BipartiteState, which: Factor) -> Result<DMatrix<f64>> {
    let n = phi.theory().dim();
    let theory = phi.theory().clone();
    let mut out = DMatrix::zeros(n * n, n * n);
    for k in 0..n {
        for l in 0..n {
            let mut e = DMatrix::zeros(n, n);
            e[(k, l)] = 1.0;
            let t = Transformation::new(&theory, e)?;
            let joint = match which {
                Factor::First => phi.composite.embed_local(Some(&t), None)?,
                Factor::Second => phi.composite.embed_local(None, Some(&t))?,
            };
            let col = theory::schrodinger_apply(&joint, &phi.weight)?;
            out.set_column(k * n + l, col.coords());
        }
    }
    Ok(out)
}

/// Rank of `T -> (T, I) Phi` against the full `n^2`.
pub fn is_dynamically_faithful(phi: &BipartiteState) -> Result<FaithfulnessRank> {
    let l = slot_matrix(phi, Factor::First)?;
    let n = phi.theory().dim();
    let rank = RankedSvd::new(&l, phi.theory().tolerances().rank).rank;
    Ok(FaithfulnessRank {
        faithful: rank == n * n,
        rank,
        expected: n * n,
    })
}

/// Cached linear algebra derived from one faithful state.
#[derive(Debug, Clone)]
pub struct FaithfulCalculus {
    phi: BipartiteState,
    first_slot: DMatrix<f64>,
    second_slot: DMatrix<f64>,
    first_slot_pinv: DMatrix<f64>,
    transpose_matrix: DMatrix<f64>,
    rank_first: usize,
    rank_second: usize,
}

/// Solution of a preparation problem `(T, I) Phi = p Omega`.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub transformation: Transformation,
    pub probability: f64,
    pub residual: f64,
    pub physical: bool,
}

impl FaithfulCalculus {
    /// Builds the slot maps and the transpose solver; fails unless both
    /// slots are injective.
    pub fn new(phi: BipartiteState) -> Result<Self> {
        let n = phi.theory().dim();
        let rel = phi.theory().tolerances().rank;
        let first_slot = slot_matrix(&phi, Factor::First)?;
        let second_slot = slot_matrix(&phi, Factor::Second)?;
        let svd_first = RankedSvd::new(&first_slot, rel);
        let svd_second = RankedSvd::new(&second_slot, rel);
        if svd_first.rank != n * n {
            return Err(Error::NotFaithful {
                rank: svd_first.rank,
                expected: n * n,
            });
        }
        if svd_second.rank != n * n {
            return Err(Error::NotFaithful {
                rank: svd_second.rank,
                expected: n * n,
            });
        }
        let transpose_matrix = svd_second.pseudo_inverse() * &first_slot;
        Ok(Self {
            first_slot_pinv: svd_first.pseudo_inverse(),
            rank_first: svd_first.rank,
            rank_second: svd_second.rank,
            phi,
            first_slot,
            second_slot,
            transpose_matrix,
        })
    }

    pub fn phi(&self) -> &BipartiteState {
        &self.phi
    }

    pub fn theory(&self) -> &Theory {
        self.phi.theory()
    }

    /// Matrix of `T -> (T, I) Phi` on row-major `vec(T)`.
    pub fn first_slot_matrix(&self) -> &DMatrix<f64> {
        &self.first_slot
    }

    /// Matrix of `T -> (I, T) Phi`.
    pub fn second_slot_matrix(&self) -> &DMatrix<f64> {
        &self.second_slot
    }

    /// Matrix of the linear map `vec(A) -> vec(A')`.
    pub fn transpose_matrix(&self) -> &DMatrix<f64> {
        &self.transpose_matrix
    }

    pub fn ranks(&self) -> (usize, usize) {
        (self.rank_first, self.rank_second)
    }

    /// `A'` together with the residual `|(A, I) Phi - (I, A') Phi|_max`.
    pub fn transpose_with_residual(&self, a: &Transformation) -> Result<(Transformation, f64)> {
        let n = self.theory().dim();
        if a.matrix().shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.matrix().nrows(),
            });
        }
        let v = linalg::vec_row_major(a.matrix());
        let vt = &self.transpose_matrix * &v;
        let residual = linalg::max_abs_vec(&(&self.second_slot * &vt - &self.first_slot * &v));
        let t = Transformation::new(self.theory(), linalg::unvec_row_major(&vt, n, n))?;
        let t = match a.label() {
            Some(l) => t.with_label(format!("{l}'")),
            None => t,
        };
        Ok((t, residual))
    }

    /// The transposed transformation `A'` with `(A, I) Phi = (I, A') Phi`.
    pub fn transpose(&self, a: &Transformation) -> Result<Transformation> {
        Ok(self.transpose_with_residual(a)?.0)
    }

    /// Local transformation `T` on the first factor with `(T, I) Phi = p Omega`.
    ///
    /// The scale of `T` is fixed so that its effect has norm one (largest
    /// achievable `p` among rescalings with `u o T <= u`).
    pub fn preparation_transformation(&self, omega: &Weight) -> Result<Preparation> {
        let n = self.theory().dim();
        if omega.coords().len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: omega.coords().len(),
            });
        }
        let v = &self.first_slot_pinv * omega.coords();
        let residual = linalg::max_abs_vec(&(&self.first_slot * &v - omega.coords()));
        if residual > 1e-8 {
            return Err(Error::NotPreparable { residual });
        }
        let raw = Transformation::new(self.theory(), linalg::unvec_row_major(&v, n, n))?;
        let scale = geometry::effect_norm(&raw.effect());
        if scale <= self.theory().tolerances().cone {
            return Err(Error::NotPreparable { residual: f64::INFINITY });
        }
        let t = raw.scaled_unchecked(1.0 / scale);
        let probability = pairing(&self.phi, &t, &Transformation::identity(self.theory()))?;
        let physical = theory::is_physical_transformation(&t);
        Ok(Preparation {
            transformation: t,
            probability,
            residual,
            physical,
        })
    }

    /// Transformation on the first factor that steers the second factor
    /// into `omega`: the preparation of `Phi|_1 (x) omega`.
    pub fn local_preparation(&self, omega: &Weight) -> Result<Preparation> {
        let first = self.phi.local_state(Factor::First);
        let target = self.phi.composite.product_state(&first, omega)?;
        self.preparation_transformation(&target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranspositionReport {
    pub samples: usize,
    pub max_residual: f64,
    pub linearity: f64,
    pub involutivity: f64,
    pub anti_homomorphism: f64,
    pub pairing_identity: f64,
    pub identity_fixed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn rel_dev(got: &DMatrix<f64>, expected: &DMatrix<f64>) -> f64 {
    linalg::max_abs(&(got - expected)) / linalg::max_abs(expected).max(1.0)
}

/// `(A+B)' = A'+B'`, `(A')' = A`, `(A o B)' = B' o A'`, the pairing
/// identity `Phi(B o A, C) = Phi(B, C o A')` and `I' = I`, on random
/// generalized transformations.
pub fn verify_transposition_axioms(calc: &FaithfulCalculus, samples: usize, seed: u64) -> Result<TranspositionReport> {
    let theory = calc.theory().clone();
    let mut s = Sampler::new(seed);
    let mut report = TranspositionReport {
        samples,
        max_residual: 0.0,
        linearity: 0.0,
        involutivity: 0.0,
        anti_homomorphism: 0.0,
        pairing_identity: 0.0,
        identity_fixed: 0.0,
        tolerance: 1e-10,
        passed: false,
    };
    let id = Transformation::identity(&theory);
    let (id_t, r) = calc.transpose_with_residual(&id)?;
    report.identity_fixed = linalg::max_abs(&(id_t.matrix() - id.matrix()));
    report.max_residual = r;
    for _ in 0..samples {
        let a = s.generalized_transformation(&theory);
        let b = s.generalized_transformation(&theory);
        let c = s.generalized_transformation(&theory);
        let (at, ra) = calc.transpose_with_residual(&a)?;
        let (bt, rb) = calc.transpose_with_residual(&b)?;
        report.max_residual = report.max_residual.max(ra).max(rb);

        let sum_t = calc.transpose(&a.sum_unchecked(&b)?)?;
        report.linearity = report
            .linearity
            .max(rel_dev(sum_t.matrix(), &(at.matrix() + bt.matrix())));

        let att = calc.transpose(&at)?;
        report.involutivity = report.involutivity.max(rel_dev(att.matrix(), a.matrix()));

        let ab_t = calc.transpose(&theory::compose(&a, &b)?)?;
        let expected = theory::compose(&bt, &at)?;
        report.anti_homomorphism = report
            .anti_homomorphism
            .max(rel_dev(ab_t.matrix(), expected.matrix()));

        let lhs = pairing(&calc.phi, &theory::compose(&b, &a)?, &c)?;
        let rhs = pairing(&calc.phi, &b, &theory::compose(&c, &at)?)?;
        report.pairing_identity = report.pairing_identity.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    report.passed = [
        report.max_residual,
        report.linearity,
        report.involutivity,
        report.anti_homomorphism,
        report.pairing_identity,
        report.identity_fixed,
    ]
    .iter()
    .all(|&x| x < report.tolerance);
    Ok(report)
}

/// Residual of preparing each of `targets` from `Phi`; `None` entries
/// were not preparable.
pub fn preparation_residuals(calc: &FaithfulCalculus, targets: &[DVector<f64>]) -> Vec<Option<f64>> {
    let joint = calc.phi.composite.joint().clone();
    targets
        .iter()
        .map(|t| {
            Weight::new(&joint, t.clone())
                .ok()
                .and_then(|w| calc.preparation_transformation(&w).ok())
                .map(|p| p.residual)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, C64};
    use crate::theories::{build_bell_state, build_classical, build_classical_correlated, build_quantum, qubit};

    fn kraus_oracle(theory: &Theory, k: &CMatrix) -> DMatrix<f64> {
        let kt = k.transpose();
        Transformation::from_kraus(theory, &[kt]).unwrap().matrix().clone()
    }

    #[test]
    fn bell_coefficient_matrix() {
        let phi = build_bell_state(2).unwrap();
        let f = phi.coefficient_matrix();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, -0.5, 0.5]));
        assert!(linalg::max_abs(&(f - expected)) < 1e-14);
        assert!(is_symmetric(&phi));
    }

    #[test]
    fn bell_is_faithful_and_product_is_not() {
        let phi = build_bell_state(2).unwrap();
        let r = is_dynamically_faithful(&phi).unwrap();
        assert!(r.faithful);
        assert_eq!(r.rank, 16);

        let q = build_quantum(2).unwrap();
        let c = CompositeTheory::new(&q, &q).unwrap();
        let mut s = Sampler::new(3);
        let w = c.product_state(&s.state(&q), &s.state(&q)).unwrap();
        let product = BipartiteState::new(c, w).unwrap();
        let r = is_dynamically_faithful(&product).unwrap();
        assert!(!r.faithful);
        assert_eq!(r.rank, 4);
        assert!(matches!(FaithfulCalculus::new(product), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn bell_transpose_is_kraus_transpose() {
        for d in [2, 3] {
            let calc = FaithfulCalculus::new(build_bell_state(d).unwrap()).unwrap();
            let t = calc.theory().clone();
            let mut s = Sampler::new(11);
            for _ in 0..5 {
                let kraus = s.quantum_channel_kraus(d);
                for k in &kraus {
                    let a = Transformation::from_kraus(&t, std::slice::from_ref(k)).unwrap();
                    let (at, residual) = calc.transpose_with_residual(&a).unwrap();
                    assert!(residual < 1e-10);
                    assert!(linalg::max_abs(&(at.matrix() - kraus_oracle(&t, k))) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn closed_form_transpose() {
        let phi = build_classical_correlated(3, &[0.2, 0.3, 0.5]).unwrap();
        let m = phi.coefficient_matrix();
        let m_inv = m.clone().try_inverse().unwrap();
        let calc = FaithfulCalculus::new(phi).unwrap();
        let mut s = Sampler::new(5);
        for _ in 0..5 {
            let a = s.generalized_transformation(calc.theory());
            let at = calc.transpose(&a).unwrap();
            let oracle = &m * a.matrix().transpose() * &m_inv;
            assert!(linalg::max_abs(&(at.matrix() - oracle)) < 1e-10);
        }
    }

    #[test]
    fn transposition_axioms() {
        for phi in [build_bell_state(2).unwrap(), build_bell_state(3).unwrap()] {
            let calc = FaithfulCalculus::new(phi).unwrap();
            let r = verify_transposition_axioms(&calc, 20, 1).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn preparation_of_phi_is_identity() {
        let phi = build_bell_state(2).unwrap();
        let calc = FaithfulCalculus::new(phi.clone()).unwrap();
        let p = calc.preparation_transformation(phi.weight()).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-12);
        assert!(linalg::max_abs(&(p.transformation.matrix() - DMatrix::identity(4, 4))) < 1e-10);
        assert!(p.physical);
    }

    #[test]
    fn preparation_of_psi_plus_is_x_conjugation() {
        let phi = build_bell_state(2).unwrap();
        let calc = FaithfulCalculus::new(phi.clone()).unwrap();
        let joint = phi.composite().joint().clone();
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut ket = nalgebra::DVector::from_element(4, C64::new(0.0, 0.0));
        ket[1] = h;
        ket[2] = h;
        let omega = Weight::from_density(&joint, &(&ket * ket.adjoint())).unwrap();
        let p = calc.preparation_transformation(&omega).unwrap();
        let x = Transformation::from_kraus(calc.theory(), &[qubit::x()]).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-12);
        assert!(linalg::max_abs(&(p.transformation.matrix() - x.matrix())) < 1e-10);
    }

    #[test]
    fn classical_filter_preparation() {
        let phi = build_classical_correlated(2, &[0.5, 0.5]).unwrap();
        let calc = FaithfulCalculus::new(phi.clone()).unwrap();
        let omega = Weight::new(phi.composite().joint(), DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])).unwrap();
        let p = calc.preparation_transformation(&omega).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-12);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        assert!(linalg::max_abs(&(p.transformation.matrix() - expected)) < 1e-12);
        assert!(p.physical);
    }

    #[test]
    fn rejects_mismatched_factors() {
        let c = CompositeTheory::new(&build_classical(2).unwrap(), &build_classical(3).unwrap()).unwrap();
        let w = Weight::new(c.joint(), DVector::from_element(6, 1.0 / 6.0)).unwrap();
        assert!(BipartiteState::new(c, w).is_err());
    }
}
