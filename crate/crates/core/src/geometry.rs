//! Norms, coexistence, predictability and the informational dimension.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::composite::{self, CompositeTheory};
use crate::error::{Error, Result};
use crate::faithful::FaithfulCalculus;
use crate::gns;
use crate::linalg::{self, CMatrix, C64};
use crate::lp;
use crate::theories::Sampler;
use crate::theory::{self, GeneralizedEffect, IdimWitness, StateModel, Theory, Transformation, Weight};

/// `sup |a(omega)|` over states.
pub fn effect_norm(a: &GeneralizedEffect) -> f64 {
    let (lo, hi) = a.theory().effect_range(a.coords());
    lo.abs().max(hi.abs())
}

/// Dual of the effect norm: `sup |a(w)|` over effects of unit norm.
///
/// Simplex: L1 norm of the coefficients in the extreme basis. Other
/// polytopes: maximum over the vertices of the effect unit ball. Quantum:
/// trace norm.
pub fn weight_norm(w: &Weight) -> f64 {
    let t = w.theory();
    match t.model() {
        StateModel::QuantumSpectral { basis } => linalg::trace_norm(&basis.hermitian(w.coords())),
        StateModel::FiniteExtreme { extremes } if t.is_simplex() => {
            let n = t.dim();
            let v = DMatrix::from_fn(n, n, |r, c| extremes[c][r]);
            match v.lu().solve(w.coords()) {
                Some(c) => c.iter().map(|x| x.abs()).sum(),
                None => ball_weight_norm(t, w.coords()),
            }
        }
        StateModel::FiniteExtreme { .. } => ball_weight_norm(t, w.coords()),
    }
}

fn ball_weight_norm(t: &Theory, w: &DVector<f64>) -> f64 {
    t.unit_ball_vertices()
        .expect("polytope theory")
        .iter()
        .map(|a| a.dot(w).abs())
        .fold(0.0, f64::max)
}

/// Settings of the multi-start ascent used for quantum transformation norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSearch {
    pub starts: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for NormSearch {
    fn default() -> Self {
        Self {
            starts: 20,
            tolerance: 1e-8,
            max_iterations: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformationNorm {
    pub value: f64,
    /// `false` when `value` is a lower bound from the numerical search.
    pub exact: bool,
    pub starts: usize,
    pub iterations: usize,
    pub seed: Option<u64>,
}

/// `sup |A omega|` over states, with the weight norm on the output.
pub fn transformation_norm(a: &Transformation) -> TransformationNorm {
    transformation_norm_with(a, &NormSearch::default())
}

pub fn transformation_norm_with(a: &Transformation, search: &NormSearch) -> TransformationNorm {
    let t = a.theory();
    match t.model() {
        StateModel::FiniteExtreme { extremes } => {
            let value = extremes
                .iter()
                .map(|v| weight_norm(&Weight::new(t, a.matrix() * v).expect("dimension")))
                .fold(0.0, f64::max);
            TransformationNorm {
                value,
                exact: true,
                starts: 0,
                iterations: 0,
                seed: None,
            }
        }
        StateModel::QuantumSpectral { basis } => {
            let d = basis.hilbert_dim();
            let mut sampler = Sampler::new(search.seed);
            // The extreme eigenvectors of [A]_eff start at or above |[A]_eff|.
            let (_, evecs) = linalg::hermitian_eigen(&basis.hermitian(a.effect().coords()));
            let mut starts: Vec<DVector<C64>> = vec![evecs.column(0).into_owned(), evecs.column(d - 1).into_owned()];
            starts.extend((0..search.starts).map(|_| sampler.unit_ket(d)));
            let mut best = 0.0f64;
            let mut iterations = 0;
            for psi in &starts {
                let (value, its) = ascend(basis, a.matrix(), psi.clone(), search);
                best = best.max(value);
                iterations += its;
            }
            TransformationNorm {
                value: best,
                exact: false,
                starts: starts.len(),
                iterations,
                seed: Some(search.seed),
            }
        }
    }
}

fn projector(psi: &DVector<C64>) -> CMatrix {
    psi * psi.adjoint()
}

/// Monotone ascent of `psi -> |A(psi psi^dagger)|_1`: with
/// `S = sign(A(psi psi^dagger))` the next `psi` is the top eigenvector of
/// `A^*(S)`.
fn ascend(
    basis: &crate::theory::QuantumBasis,
    a: &DMatrix<f64>,
    mut psi: DVector<C64>,
    search: &NormSearch,
) -> (f64, usize) {
    let objective = |psi: &DVector<C64>| {
        let out = a * basis.coords(&projector(psi));
        linalg::trace_norm(&basis.hermitian(&out))
    };
    let mut value = objective(&psi);
    for it in 0..search.max_iterations {
        let out = basis.hermitian(&(a * basis.coords(&projector(&psi))));
        let (vals, vecs) = linalg::hermitian_eigen(&out);
        let d = vals.len();
        let mut sign = CMatrix::zeros(d, d);
        for (i, &l) in vals.iter().enumerate() {
            let s = if l > 0.0 {
                1.0
            } else if l < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s != 0.0 {
                let v = vecs.column(i);
                sign += (v * v.adjoint()) * C64::new(s, 0.0);
            }
        }
        let dual = basis.hermitian(&a.tr_mul(&basis.coords(&sign)));
        let (_, dvecs) = linalg::hermitian_eigen(&dual);
        let next: DVector<C64> = dvecs.column(0).into_owned();
        let next_value = objective(&next);
        if next_value <= value + search.tolerance {
            if next_value > value {
                value = next_value;
            }
            return (value, it + 1);
        }
        psi = next;
        value = next_value;
    }
    (value, search.max_iterations)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBoundReport {
    pub effect_norm: f64,
    pub transformation_norm: f64,
    pub transformation_norm_exact: bool,
    /// `|[A]_eff| <= |A|`.
    pub bound_holds: bool,
    /// Whether `A` is a real multiple of a physical transformation.
    pub in_double_cone: bool,
    /// Equality of the two norms, checked only inside the double cone.
    pub equality_holds: Option<bool>,
    pub tolerance: f64,
}

/// Compares the effect norm of `[A]_eff` with the transformation norm.
pub fn check_norm_effect_bound(a: &Transformation, search: &NormSearch) -> NormBoundReport {
    let e = effect_norm(&a.effect());
    let tn = transformation_norm_with(a, search);
    let tolerance = if tn.exact { 1e-10 } else { 1e-6 };
    let scale = e.max(1.0);
    let in_double_cone = if e <= a.theory().tolerances().cone {
        linalg::max_abs(a.matrix()) <= a.theory().tolerances().cone
    } else {
        let p = a.scaled_unchecked(1.0 / e);
        theory::is_physical_transformation(&p) || theory::is_physical_transformation(&p.scaled_unchecked(-1.0))
    };
    NormBoundReport {
        effect_norm: e,
        transformation_norm: tn.value,
        transformation_norm_exact: tn.exact,
        bound_holds: e <= tn.value + tolerance * scale,
        in_double_cone,
        equality_holds: in_double_cone.then(|| (e - tn.value).abs() <= tolerance * scale),
        tolerance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoexistenceReport {
    /// `sup (a + b)(omega)` over states for the induced effects.
    pub sup_probability: f64,
    pub coexistent: bool,
    /// `|A + B|` when both are physical.
    pub contraction_norm: Option<f64>,
    pub contraction: Option<bool>,
    pub agree: Option<bool>,
}

/// Coexistence of two physical transformations: their effects sum to at
/// most the unit. Cross-checked against `|A + B| <= 1`.
pub fn coexistence_report(a: &Transformation, b: &Transformation, search: &NormSearch) -> Result<CoexistenceReport> {
    let sum = a.sum_unchecked(b)?;
    let tol = a.theory().tolerances().cone;
    let (_, sup) = a.theory().effect_range(sum.effect().coords());
    let coexistent = sup <= 1.0 + tol;
    let physical = theory::is_physical_transformation(a) && theory::is_physical_transformation(b);
    let (contraction_norm, contraction, agree) = if physical {
        let n = transformation_norm_with(&sum, search);
        let slack = if n.exact { tol } else { 1e-6 };
        let c = n.value <= 1.0 + slack;
        (Some(n.value), Some(c), Some(c == coexistent))
    } else {
        (None, None, None)
    };
    Ok(CoexistenceReport {
        sup_probability: sup,
        coexistent,
        contraction_norm,
        contraction,
        agree,
    })
}

pub fn are_coexistent(a: &Transformation, b: &Transformation) -> Result<bool> {
    let sum = a.sum_unchecked(b)?;
    let (_, sup) = a.theory().effect_range(sum.effect().coords());
    Ok(sup <= 1.0 + a.theory().tolerances().cone)
}

/// Some state gives `a` probability one and some state gives it zero.
pub fn is_predictable(a: &GeneralizedEffect) -> bool {
    let tol = a.theory().tolerances().cone;
    let (lo, hi) = a.theory().effect_range(a.coords());
    (hi - 1.0).abs() <= tol && lo.abs() <= tol
}

/// Predictable with a unique state of probability one.
pub fn is_resolved(a: &GeneralizedEffect) -> bool {
    if !is_predictable(a) {
        return false;
    }
    let t = a.theory();
    let tol = t.tolerances().cone;
    match t.model() {
        StateModel::FiniteExtreme { extremes } => {
            extremes.iter().filter(|v| a.coords().dot(v) >= 1.0 - tol).count() == 1
        }
        StateModel::QuantumSpectral { basis } => {
            let eig = linalg::hermitian_eigenvalues(&basis.hermitian(a.coords()));
            eig.len() == 1 || eig[1] < 1.0 - tol
        }
    }
}

/// A list of effects summing to the unit effect.
#[derive(Debug, Clone)]
pub struct Observable {
    theory: Theory,
    effects: Vec<GeneralizedEffect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InformationalCompleteness {
    pub rank: usize,
    pub complete: bool,
    /// Complete with exactly `dim` outcomes.
    pub minimal: bool,
}

impl Observable {
    pub fn new(theory: &Theory, effects: Vec<GeneralizedEffect>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::EmptyExperiment);
        }
        let mut total = DVector::zeros(theory.dim());
        for e in &effects {
            if e.coords().len() != theory.dim() {
                return Err(Error::DimensionMismatch {
                    expected: theory.dim(),
                    found: e.coords().len(),
                });
            }
            total += e.coords();
        }
        let deviation = linalg::max_abs_vec(&(total - theory.unit()));
        if deviation > theory.tolerances().cone {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self {
            theory: theory.clone(),
            effects,
        })
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn effects(&self) -> &[GeneralizedEffect] {
        &self.effects
    }

    pub fn is_informationally_complete(&self) -> InformationalCompleteness {
        let n = self.theory.dim();
        let m = DMatrix::from_fn(n, self.effects.len(), |r, c| self.effects[c].coords()[r]);
        let rank = linalg::rank(&m, self.theory.tolerances().rank);
        InformationalCompleteness {
            rank,
            complete: rank == n,
            minimal: rank == n && self.effects.len() == n,
        }
    }
}

/// A standard informationally complete observable.
///
/// Polytopes: `u/k + eps (v - mean)` over the `k` extreme states, with
/// `eps` halved until every effect is nonnegative. Quantum: computational
/// and two-level superposition projectors, conjugated by the inverse square
/// root of their sum.
pub fn informationally_complete_observable(theory: &Theory) -> Result<Observable> {
    let effects: Vec<DVector<f64>> = match theory.model() {
        StateModel::FiniteExtreme { extremes } => {
            let n = theory.dim();
            let k = extremes.len() as f64;
            let mean = extremes.iter().fold(DVector::zeros(n), |acc, x| acc + x) / k;
            let unit = theory.unit();
            let mut eps = 0.5;
            loop {
                let effects: Vec<DVector<f64>> = extremes.iter().map(|v| unit / k + (v - &mean) * eps).collect();
                if effects.iter().all(|e| theory.effect_range(e).0 >= 0.0) || eps < 1e-9 {
                    break effects;
                }
                eps /= 2.0;
            }
        }
        StateModel::QuantumSpectral { basis } => {
            let d = basis.hilbert_dim();
            let mut projectors: Vec<CMatrix> = Vec::new();
            for j in 0..d {
                let mut k = DVector::<C64>::zeros(d);
                k[j] = C64::new(1.0, 0.0);
                projectors.push(projector(&k));
            }
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for j in 0..d {
                for l in (j + 1)..d {
                    for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                        let mut k = DVector::<C64>::zeros(d);
                        k[j] = h;
                        k[l] = h * phase;
                        projectors.push(projector(&k));
                    }
                }
            }
            let total = projectors.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
            let (vals, vecs) = linalg::hermitian_eigen(&total);
            let mut inv_sqrt = CMatrix::zeros(d, d);
            for (i, &v) in vals.iter().enumerate() {
                let c = vecs.column(i);
                inv_sqrt += (c * c.adjoint()) * C64::new(1.0 / v.sqrt(), 0.0);
            }
            projectors
                .iter()
                .map(|p| basis.coords(&(&inv_sqrt * p * &inv_sqrt)))
                .collect()
        }
    };
    let effects = effects
        .into_iter()
        .map(|e| GeneralizedEffect::new(theory, e))
        .collect::<Result<_>>()?;
    Observable::new(theory, effects)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InformationalDimension {
    pub idim: usize,
    pub witness: IdimWitness,
    /// The search stopped at the cap, so `idim` is only a lower bound.
    pub lower_bound: bool,
    /// Whether a declared witness was present and verified.
    pub declared_verified: Option<bool>,
}

fn verify_witness(theory: &Theory, w: &IdimWitness) -> bool {
    let tol = theory.tolerances().cone;
    if w.states.len() != w.effects.len() || w.states.is_empty() {
        return false;
    }
    let mut total = DVector::zeros(theory.dim());
    for e in &w.effects {
        if e.len() != theory.dim() {
            return false;
        }
        total += e;
        let (lo, hi) = theory.effect_range(e);
        if lo < -tol || hi > 1.0 + tol {
            return false;
        }
    }
    if linalg::max_abs_vec(&(total - theory.unit())) > tol {
        return false;
    }
    for (k, s) in w.states.iter().enumerate() {
        let Ok(weight) = Weight::new(theory, s.clone()) else {
            return false;
        };
        if !theory::is_physical_state(&weight) {
            return false;
        }
        for (j, e) in w.effects.iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            if (e.dot(s) - target).abs() > tol {
                return false;
            }
        }
    }
    true
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest number of perfectly discriminable states, searched up to `cap`.
///
/// A verified declared witness is returned as is. Quantum theories without
/// one use the computational basis. Polytopes search subsets of extreme
/// states from the largest admissible size downward.
pub fn informational_dimension(theory: &Theory, cap: usize) -> InformationalDimension {
    let declared_verified = theory.declared_idim().map(|w| verify_witness(theory, w));
    if let (Some(true), Some(w)) = (declared_verified, theory.declared_idim()) {
        return InformationalDimension {
            idim: w.cardinality(),
            witness: w.clone(),
            lower_bound: false,
            declared_verified,
        };
    }
    match theory.model() {
        StateModel::QuantumSpectral { basis } => {
            let d = basis.hilbert_dim();
            let mut states = Vec::new();
            for j in 0..d {
                let mut k = DVector::<C64>::zeros(d);
                k[j] = C64::new(1.0, 0.0);
                states.push(basis.coords(&projector(&k)));
            }
            InformationalDimension {
                idim: d,
                witness: IdimWitness {
                    effects: states.clone(),
                    states,
                },
                lower_bound: false,
                declared_verified,
            }
        }
        StateModel::FiniteExtreme { extremes } => {
            let full = extremes.len().min(theory.dim());
            let top = full.min(cap.max(1));
            let tol = theory.tolerances().cone;
            // Perfectly discriminable sets are pairwise discriminable.
            let k = extremes.len();
            let mut pairwise = vec![vec![true; k]; k];
            for i in 0..k {
                for j in (i + 1)..k {
                    let pair = [extremes[i].clone(), extremes[j].clone()];
                    let ok = lp::discriminating_effects(extremes, theory.unit(), &pair, tol).is_some();
                    pairwise[i][j] = ok;
                    pairwise[j][i] = ok;
                }
            }
            for m in (1..=top).rev() {
                for subset in combinations(k, m) {
                    if !subset.iter().enumerate().all(|(a, &i)| subset[a + 1..].iter().all(|&j| pairwise[i][j])) {
                        continue;
                    }
                    let states: Vec<DVector<f64>> = subset.iter().map(|&i| extremes[i].clone()).collect();
                    if let Some(effects) = lp::discriminating_effects(extremes, theory.unit(), &states, tol) {
                        return InformationalDimension {
                            idim: m,
                            witness: IdimWitness { states, effects },
                            lower_bound: m == top && top < full,
                            declared_verified,
                        };
                    }
                }
            }
            InformationalDimension {
                idim: 1,
                witness: IdimWitness {
                    states: vec![extremes[0].clone()],
                    effects: vec![theory.unit().clone()],
                },
                lower_bound: false,
                declared_verified,
            }
        }
    }
}

/// Is `obs` a discriminating observable: as many outcomes as the
/// informational dimension, each effect reaching probability one.
pub fn is_discriminating(obs: &Observable) -> bool {
    let t = obs.theory();
    let tol = t.tolerances().cone;
    let idim = informational_dimension(t, t.dim()).idim;
    obs.effects().len() == idim
        && obs.effects().iter().all(|e| {
            let (lo, hi) = t.effect_range(e.coords());
            lo >= -tol && (hi - 1.0).abs() <= tol
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    pub note: Option<&'static str>,
}

impl IdentityCheck {
    fn new(name: &'static str, lhs: usize, rhs: usize) -> Self {
        Self {
            name,
            lhs,
            rhs,
            holds: lhs == rhs,
            note: None,
        }
    }

    fn with_note(mut self, note: &'static str) -> Self {
        self.note = Some(note);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionAudit {
    pub adm: usize,
    pub idim: usize,
    pub idim_lower_bound: bool,
    pub joint_idim: Option<usize>,
    pub gram_rank: Option<usize>,
    pub checks: Vec<IdentityCheck>,
}

impl DimensionAudit {
    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Dimension bookkeeping: affine and informational dimensions of the
/// system, its two-copy composite and the span of the faithful state's
/// scalar product. A failed identity is a finding about the theory.
pub fn dimension_audit(
    theory: &Theory,
    composite: Option<&CompositeTheory>,
    calc: Option<&FaithfulCalculus>,
) -> Result<DimensionAudit> {
    let adm = theory.affine_dim();
    let id = informational_dimension(theory, theory.dim());
    let mut checks = vec![IdentityCheck::new("adm_from_idim", adm, id.idim * id.idim - 1)];
    let mut joint_idim = None;
    if let Some(c) = composite {
        let joint = c.joint();
        let jid = informational_dimension(joint, id.idim * id.idim + 1);
        joint_idim = Some(jid.idim);
        let report = composite::affine_dimension_identity_check(c);
        checks.push(IdentityCheck::new("local_observability", report.adm_joint, report.predicted));
        checks.push(
            IdentityCheck::new("adm_from_pair_idim", adm, jid.idim.saturating_sub(1))
                .with_note("checked assuming minimality"),
        );
        checks.push(IdentityCheck::new("pair_idim", jid.idim, id.idim * id.idim));
    }
    let mut gram_rank = None;
    if let Some(calc) = calc {
        let g = gns::gram_matrix(calc)?;
        let r = linalg::rank(&g, theory.tolerances().gram);
        gram_rank = Some(r);
        checks.push(IdentityCheck::new("scalar_span_adm", r, adm + 1));
        checks.push(IdentityCheck::new("scalar_span_idim", r, id.idim * id.idim));
        let (rank_l, _) = calc.ranks();
        let joint_adm = calc.phi().composite().joint().affine_dim();
        checks.push(IdentityCheck::new("transformation_adm", rank_l, joint_adm + 1));
    }
    Ok(DimensionAudit {
        adm,
        idim: id.idim,
        idim_lower_bound: id.lower_bound,
        joint_idim,
        gram_rank,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::theories::{build_classical, build_gbit, build_quantum, qubit};

    fn effect(t: &Theory, v: &[f64]) -> GeneralizedEffect {
        GeneralizedEffect::new(t, DVector::from_column_slice(v)).unwrap()
    }

    #[test]
    fn effect_norms() {
        let c = build_classical(3).unwrap();
        assert_eq!(effect_norm(&effect(&c, &[0.2, -0.7, 0.4])), 0.7);
        let q = build_quantum(2).unwrap();
        let z = GeneralizedEffect::from_hermitian(&q, &qubit::z()).unwrap();
        assert!((effect_norm(&z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weight_norms_against_oracles() {
        let c = build_classical(3).unwrap();
        let w = Weight::new(&c, DVector::from_vec(vec![0.5, -0.25, 1.0])).unwrap();
        assert!((weight_norm(&w) - 1.75).abs() < 1e-12);

        let g = build_gbit().unwrap();
        let mut s = Sampler::new(2);
        for _ in 0..10 {
            let w = s.generalized_weight(&g);
            let lp = lp::base_norm(g.extremes().unwrap(), w.coords()).unwrap();
            assert!((weight_norm(&w) - lp).abs() < 1e-9, "{} vs {}", weight_norm(&w), lp);
        }

        let q = build_quantum(2).unwrap();
        let w = Weight::from_density(&q, &(qubit::z() * crate::linalg::C64::new(0.5, 0.0))).unwrap();
        assert!((weight_norm(&w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_norm_is_one() {
        let q = build_quantum(2).unwrap();
        let mut s = Sampler::new(4);
        let channel = s.channel(&q).unwrap();
        let n = transformation_norm(&channel);
        assert!(!n.exact);
        assert!((n.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn transpose_map_norm_is_one() {
        // Transposition on a qubit: positive and trace preserving.
        let q = build_quantum(2).unwrap();
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0, 1.0]));
        let t = Transformation::new(&q, m).unwrap();
        assert!((transformation_norm(&t).value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn norm_bound_in_double_cone() {
        let c = build_classical(3).unwrap();
        let mut s = Sampler::new(9);
        for e in s.instrument(&c, 3).unwrap().transformations() {
            let scaled = e.scaled_unchecked(-2.5);
            let r = check_norm_effect_bound(&scaled, &NormSearch::default());
            assert!(r.bound_holds && r.in_double_cone);
            assert_eq!(r.equality_holds, Some(true));
        }
    }

    #[test]
    fn coexistence_matches_contraction() {
        for t in [build_quantum(2).unwrap(), build_classical(3).unwrap(), build_gbit().unwrap()] {
            let mut s = Sampler::new(21);
            for _ in 0..10 {
                let a = s.channel(&t).unwrap().scaled_unchecked(s.uniform());
                let b = s.channel(&t).unwrap().scaled_unchecked(s.uniform());
                let r = coexistence_report(&a, &b, &NormSearch::default()).unwrap();
                assert_eq!(r.agree, Some(true), "{r:?}");
            }
        }
    }

    #[test]
    fn predictable_and_resolved() {
        let q = build_quantum(3).unwrap();
        let mut p = CMatrix::zeros(3, 3);
        p[(0, 0)] = crate::linalg::C64::new(1.0, 0.0);
        let rank1 = GeneralizedEffect::from_hermitian(&q, &p).unwrap();
        assert!(is_predictable(&rank1) && is_resolved(&rank1));
        p[(1, 1)] = crate::linalg::C64::new(1.0, 0.0);
        let rank2 = GeneralizedEffect::from_hermitian(&q, &p).unwrap();
        assert!(is_predictable(&rank2) && !is_resolved(&rank2));
        let half = GeneralizedEffect::unit(&q).scaled(0.5);
        assert!(!is_predictable(&half));
    }

    #[test]
    fn ic_observables() {
        for t in [build_quantum(2).unwrap(), build_quantum(3).unwrap(), build_classical(3).unwrap(), build_gbit().unwrap()] {
            let obs = informationally_complete_observable(&t).unwrap();
            assert!(obs.is_informationally_complete().complete);
            assert!(obs.effects().iter().all(theory::is_physical_effect));
        }
        let q = build_quantum(2).unwrap();
        let z0 = GeneralizedEffect::from_hermitian(&q, &qubit::ket_bra(0, 0)).unwrap();
        let z1 = GeneralizedEffect::from_hermitian(&q, &qubit::ket_bra(1, 1)).unwrap();
        let obs = Observable::new(&q, vec![z0, z1]).unwrap();
        assert!(!obs.is_informationally_complete().complete);
        assert!(is_discriminating(&obs));
        let half = GeneralizedEffect::unit(&q).scaled(0.5);
        assert!(matches!(Observable::new(&q, vec![half]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn informational_dimensions() {
        assert_eq!(informational_dimension(&build_classical(3).unwrap(), 3).idim, 3);
        assert_eq!(informational_dimension(&build_quantum(3).unwrap(), 9).idim, 3);
        let g = informational_dimension(&build_gbit().unwrap(), 3);
        assert_eq!(g.idim, 2);
        assert!(!g.lower_bound);
        let capped = informational_dimension(&build_gbit().unwrap(), 1);
        assert!(capped.lower_bound);
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn dimension_audit_findings() {
        let q = build_quantum(2).unwrap();
        let phi = crate::theories::build_bell_state(2).unwrap();
        let comp = phi.composite().clone();
        let calc = FaithfulCalculus::new(phi).unwrap();
        let audit = dimension_audit(&q, Some(&comp), Some(&calc)).unwrap();
        assert!(audit.checks.iter().all(|c| c.holds), "{audit:?}");

        let c = build_classical(2).unwrap();
        let audit = dimension_audit(&c, None, None).unwrap();
        let check = audit.check("adm_from_idim").unwrap();
        assert_eq!((check.lhs, check.rhs, check.holds), (1, 3, false));

        let g = build_gbit().unwrap();
        let audit = dimension_audit(&g, None, None).unwrap();
        let check = audit.check("adm_from_idim").unwrap();
        assert_eq!((check.lhs, check.rhs, check.holds), (2, 3, false));
    }
}
