//! Involution, scalar product, adjoint and the GNS representation induced
//! by a symmetric faithful state.
//!
//! Vectors of the representation space are the effects `[X']_eff` of
//! transposed transformations. In coordinates the bilinear form is the
//! matrix `M` of `Phi` on basis effects, the involution is
//! `sigma = P+ - P-` from its spectral decomposition and the Gram matrix is
//! `M sigma = |M|`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::faithful::{self, BipartiteState, FaithfulCalculus};
use crate::linalg;
use crate::theories::Sampler;
use crate::theory::{self, GeneralizedEffect, Theory, Transformation, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    /// Symmetrized `Phi(e_i, e_j)`.
    pub matrix: DMatrix<f64>,
    pub asymmetry: f64,
}

/// `Phi` evaluated on every pair of basis effects.
pub fn bilinear_form(phi: &BipartiteState) -> Result<BilinearForm> {
    let t = phi.theory().clone();
    let n = t.dim();
    let basis: Vec<GeneralizedEffect> = (0..n)
        .map(|i| GeneralizedEffect::new(&t, DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })))
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = faithful::pairing_effects(phi, &basis[i], &basis[j])?;
        }
    }
    let asymmetry = linalg::max_abs(&(&m - m.transpose()));
    Ok(BilinearForm {
        matrix: (&m + m.transpose()) * 0.5,
        asymmetry,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvolutionData {
    pub form: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub signature: Signature,
    /// `P+ - P-`; acts as the identity on the kernel of the form.
    pub sigma: DMatrix<f64>,
    pub degenerate: bool,
}

impl InvolutionData {
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.sigma * v
    }

    /// `M sigma`, the Gram matrix of the scalar product.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.form * &self.sigma
    }

    /// `max |sigma u - u|`.
    pub fn identity_deviation(&self, unit: &DVector<f64>) -> f64 {
        linalg::max_abs_vec(&(self.apply(unit) - unit))
    }

    pub fn is_identity_preserving(&self, unit: &DVector<f64>) -> bool {
        self.identity_deviation(unit) <= 1e-10
    }
}

/// Spectral involution of a symmetric form. Eigenvalues with
/// `|lambda| <= zero_tol * max |lambda|` count as zero.
pub fn involution(form: &DMatrix<f64>, zero_tol: f64) -> InvolutionData {
    let (vals, vecs) = linalg::symmetric_eigen(form);
    let n = form.nrows();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = zero_tol * scale.max(f64::MIN_POSITIVE);
    let mut sigma = DMatrix::zeros(n, n);
    let mut signature = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for i in 0..n {
        let s = if vals[i] > cut {
            signature.positive += 1;
            1.0
        } else if vals[i] < -cut {
            signature.negative += 1;
            -1.0
        } else {
            signature.zero += 1;
            1.0
        };
        let c = vecs.column(i);
        sigma += (c * c.transpose()) * s;
    }
    InvolutionData {
        form: form.clone(),
        eigenvalues: vals,
        eigenvectors: vecs,
        degenerate: signature.zero > 0,
        signature,
        sigma,
    }
}

/// Involution of the calculus' faithful state.
pub fn involution_for(calc: &FaithfulCalculus) -> Result<InvolutionData> {
    let form = bilinear_form(calc.phi())?;
    Ok(involution(&form.matrix, calc.theory().tolerances().rank))
}

/// The representation-space vector of `X`: `[X']_eff`.
pub fn vector_of(calc: &FaithfulCalculus, x: &Transformation) -> Result<DVector<f64>> {
    Ok(calc.transpose(x)?.effect().coords().clone())
}

/// A transformation whose vector is `a`: the transpose of the
/// measure-and-prepare map `a` followed by `Phi|_1`.
pub fn lift(calc: &FaithfulCalculus, a: &GeneralizedEffect) -> Result<Transformation> {
    let rho = calc.phi().local_state(crate::composite::Factor::First);
    let mp = Transformation::measure_prepare(a, &rho)?;
    calc.transpose(&mp)
}

/// `<B|A> = Phi(B', sigma(A'))` on effects of the transposes.
pub fn scalar_product_transformations(
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    a: &Transformation,
    b: &Transformation,
) -> Result<f64> {
    let t = calc.theory();
    let va = vector_of(calc, a)?;
    let vb = vector_of(calc, b)?;
    faithful::pairing_effects(
        calc.phi(),
        &GeneralizedEffect::new(t, vb)?,
        &GeneralizedEffect::new(t, inv.apply(&va))?,
    )
}

/// `<b|a>` on representation-space vectors, through lifted transformations.
pub fn scalar_product(
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    a: &GeneralizedEffect,
    b: &GeneralizedEffect,
) -> Result<f64> {
    scalar_product_transformations(calc, inv, &lift(calc, a)?, &lift(calc, b)?)
}

/// Gram matrix of the scalar product over basis vectors.
pub fn gram_matrix(calc: &FaithfulCalculus) -> Result<DMatrix<f64>> {
    let inv = involution_for(calc)?;
    gram_matrix_with(calc, &inv)
}

pub fn gram_matrix_with(calc: &FaithfulCalculus, inv: &InvolutionData) -> Result<DMatrix<f64>> {
    let t = calc.theory();
    let n = t.dim();
    let lifted: Vec<Transformation> = (0..n)
        .map(|i| {
            let e = GeneralizedEffect::new(t, DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }))?;
            lift(calc, &e)
        })
        .collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = scalar_product_transformations(calc, inv, &lifted[j], &lifted[i])?;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub eigenvalues: Vec<f64>,
    pub null_rank: usize,
    pub null_directions: Vec<Vec<f64>>,
    pub threshold: f64,
    pub passed: bool,
}

/// Strict positivity of a Gram matrix; eigenvectors at or below
/// `threshold` are returned as null directions.
pub fn check_strict_positivity(gram: &DMatrix<f64>, threshold: f64) -> PositivityReport {
    let sym = (gram + gram.transpose()) * 0.5;
    let (vals, vecs) = linalg::symmetric_eigen(&sym);
    let n = vals.len();
    let null_directions: Vec<Vec<f64>> = (0..n)
        .filter(|&i| vals[i] <= threshold)
        .map(|i| vecs.column(i).iter().copied().collect())
        .collect();
    let min_eigenvalue = vals.iter().copied().fold(f64::INFINITY, f64::min);
    PositivityReport {
        min_eigenvalue,
        eigenvalues: vals.iter().copied().collect(),
        null_rank: null_directions.len(),
        null_directions,
        threshold,
        passed: min_eigenvalue > threshold,
    }
}

/// `A^sigma = sigma A sigma`.
pub fn extend_involution(inv: &InvolutionData, a: &Transformation) -> Transformation {
    let m = &inv.sigma * a.matrix() * &inv.sigma;
    Transformation::new(a.theory(), m).expect("dimension preserved")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaPhysicalityReport {
    pub states_checked: usize,
    pub transformations_checked: usize,
    pub state_counterexamples: usize,
    pub transformation_counterexamples: usize,
    pub identity_deviation: f64,
    pub passed: bool,
}

/// Whether the involution maps states and transformations to physical ones.
pub fn check_sigma_physicality(
    inv: &InvolutionData,
    theory: &Theory,
    samples: usize,
    seed: u64,
) -> Result<SigmaPhysicalityReport> {
    let mut s = Sampler::new(seed);
    let mut states: Vec<Weight> = theory
        .probe_states()
        .into_iter()
        .map(|v| Weight::new(theory, v))
        .collect::<Result<_>>()?;
    for _ in 0..samples {
        states.push(s.state(theory));
    }
    let state_counterexamples = states
        .iter()
        .filter(|w| {
            let image = Weight::new(theory, inv.apply(w.coords())).expect("dimension");
            !theory::is_physical_state(&image)
        })
        .count();
    let mut transformations = Vec::new();
    for _ in 0..samples {
        transformations.extend(s.instrument(theory, 2)?.transformations().iter().cloned());
    }
    let transformation_counterexamples = transformations
        .iter()
        .filter(|a| !theory::is_physical_transformation(&extend_involution(inv, a)))
        .count();
    Ok(SigmaPhysicalityReport {
        states_checked: states.len(),
        transformations_checked: transformations.len(),
        state_counterexamples,
        transformation_counterexamples,
        identity_deviation: inv.identity_deviation(theory.unit()),
        passed: state_counterexamples == 0 && transformation_counterexamples == 0,
    })
}

/// `A^dagger = (A')^sigma`.
pub fn adjoint(calc: &FaithfulCalculus, inv: &InvolutionData, a: &Transformation) -> Result<Transformation> {
    let t = calc.transpose(a)?;
    let out = extend_involution(inv, &t);
    Ok(match a.label() {
        Some(l) => out.with_label(format!("{l}^dagger")),
        None => out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointReport {
    pub samples: usize,
    /// `<B|A o C> = <A^dagger o B|C>`.
    pub adjoint_identity: f64,
    /// `(A^dagger)^dagger = A`.
    pub involutivity: f64,
    /// `(A o B)^dagger = B^dagger o A^dagger`.
    pub anti_homomorphism: f64,
    /// `<B|A> = Phi(u, [A^dagger o B]_eff)`; holds exactly when
    /// `sigma u = u`.
    pub local_form: f64,
    pub identity_preserving: bool,
    pub tolerance: f64,
    pub passed: bool,
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

fn rel_mat(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    linalg::max_abs(&(x - y)) / linalg::max_abs(y).max(1.0)
}

pub fn check_adjoint_identity(
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    samples: usize,
    seed: u64,
) -> Result<AdjointReport> {
    let t = calc.theory().clone();
    let mut s = Sampler::new(seed);
    let unit = GeneralizedEffect::unit(&t);
    let mut r = AdjointReport {
        samples,
        adjoint_identity: 0.0,
        involutivity: 0.0,
        anti_homomorphism: 0.0,
        local_form: 0.0,
        identity_preserving: inv.is_identity_preserving(t.unit()),
        tolerance: 1e-9,
        passed: false,
    };
    for _ in 0..samples {
        let a = s.generalized_transformation(&t);
        let b = s.generalized_transformation(&t);
        let c = s.generalized_transformation(&t);
        let ad = adjoint(calc, inv, &a)?;

        let lhs = scalar_product_transformations(calc, inv, &theory::compose(&a, &c)?, &b)?;
        let rhs = scalar_product_transformations(calc, inv, &c, &theory::compose(&ad, &b)?)?;
        r.adjoint_identity = r.adjoint_identity.max(rel(lhs, rhs));

        r.involutivity = r.involutivity.max(rel_mat(adjoint(calc, inv, &ad)?.matrix(), a.matrix()));

        let ab = adjoint(calc, inv, &theory::compose(&a, &b)?)?;
        let expected = theory::compose(&adjoint(calc, inv, &b)?, &ad)?;
        r.anti_homomorphism = r.anti_homomorphism.max(rel_mat(ab.matrix(), expected.matrix()));

        let sp = scalar_product_transformations(calc, inv, &a, &b)?;
        let local = faithful::pairing_effects(calc.phi(), &unit, &theory::compose(&ad, &b)?.effect())?;
        r.local_form = r.local_form.max(rel(local, sp));
    }
    r.passed = r.adjoint_identity < r.tolerance && r.involutivity < r.tolerance && r.anti_homomorphism < r.tolerance;
    Ok(r)
}

/// The representation `pi(A) = A'^T` on vectors, with the Gram geometry
/// needed for operator norms.
#[derive(Debug, Clone)]
pub struct GnsRepresentation {
    pub gram: DMatrix<f64>,
    pub gram_sqrt: DMatrix<f64>,
    pub gram_inv_sqrt: DMatrix<f64>,
    pub null_rank: usize,
}

pub fn gns_representation(calc: &FaithfulCalculus, inv: &InvolutionData) -> Result<GnsRepresentation> {
    let gram = gram_matrix_with(calc, inv)?;
    let sym = (&gram + gram.transpose()) * 0.5;
    let floor = calc.theory().tolerances().gram;
    let positivity = check_strict_positivity(&sym, floor);
    let (gram_sqrt, gram_inv_sqrt) = linalg::psd_sqrt_pair(&sym, floor);
    Ok(GnsRepresentation {
        gram,
        gram_sqrt,
        gram_inv_sqrt,
        null_rank: positivity.null_rank,
    })
}

impl GnsRepresentation {
    pub fn represent(&self, calc: &FaithfulCalculus, a: &Transformation) -> Result<DMatrix<f64>> {
        Ok(calc.transpose(a)?.matrix().transpose())
    }

    /// Operator norm of `pi` for the scalar product.
    pub fn operator_norm(&self, pi: &DMatrix<f64>) -> f64 {
        linalg::spectral_norm(&(&self.gram_sqrt * pi * &self.gram_inv_sqrt))
    }

    /// `|A|_Phi`.
    pub fn norm(&self, calc: &FaithfulCalculus, a: &Transformation) -> Result<f64> {
        Ok(self.operator_norm(&self.represent(calc, a)?))
    }

    pub fn vector_norm(&self, v: &DVector<f64>) -> f64 {
        (v.transpose() * &self.gram * v)[(0, 0)].max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub samples: usize,
    pub null_rank: usize,
    /// `pi(I) = 1`.
    pub identity: f64,
    /// `pi(A o B) = pi(A) pi(B)`.
    pub homomorphism: f64,
    /// `pi(A) = M^-1 A M`.
    pub closed_form: f64,
    /// `pi(A^dagger) = G^-1 pi(A)^T G`.
    pub adjoint: f64,
    /// Samples with `|pi(A) x| > |A|_Phi |x|`.
    pub continuity_violations: usize,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn check_representation(
    rep: &GnsRepresentation,
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    samples: usize,
    seed: u64,
) -> Result<RepresentationReport> {
    let t = calc.theory().clone();
    let n = t.dim();
    let mut s = Sampler::new(seed);
    let m = &inv.form;
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotFaithful { rank: linalg::rank(m, 1e-10), expected: n })?;
    let g_inv = rep
        .gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular Gram matrix".into()))?;
    let mut r = RepresentationReport {
        samples,
        null_rank: rep.null_rank,
        identity: rel_mat(
            &rep.represent(calc, &Transformation::identity(&t))?,
            &DMatrix::identity(n, n),
        ),
        homomorphism: 0.0,
        closed_form: 0.0,
        adjoint: 0.0,
        continuity_violations: 0,
        tolerance: 1e-9,
        passed: false,
    };
    for _ in 0..samples {
        let a = s.generalized_transformation(&t);
        let b = s.generalized_transformation(&t);
        let pa = rep.represent(calc, &a)?;
        let pb = rep.represent(calc, &b)?;
        let pab = rep.represent(calc, &theory::compose(&a, &b)?)?;
        r.homomorphism = r.homomorphism.max(rel_mat(&pab, &(&pa * &pb)));
        r.closed_form = r.closed_form.max(rel_mat(&pa, &(&m_inv * a.matrix() * m)));
        let pad = rep.represent(calc, &adjoint(calc, inv, &a)?)?;
        r.adjoint = r.adjoint.max(rel_mat(&pad, &(&g_inv * pa.transpose() * &rep.gram)));
        let x = s.generalized_weight(&t).into_coords();
        let norm = rep.operator_norm(&pa);
        if rep.vector_norm(&(&pa * &x)) > norm * rep.vector_norm(&x) * (1.0 + 1e-9) + 1e-12 {
            r.continuity_violations += 1;
        }
    }
    r.passed = r.identity < r.tolerance
        && r.homomorphism < r.tolerance
        && r.closed_form < r.tolerance
        && r.adjoint < r.tolerance
        && r.continuity_violations == 0;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CStarReport {
    pub samples: usize,
    /// `|A^dagger o A| = |A|^2`, relative.
    pub cstar: f64,
    /// `|A^dagger| = |A|`, relative.
    pub adjoint_norm: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn check_cstar_identity(
    rep: &GnsRepresentation,
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    samples: usize,
    seed: u64,
) -> Result<CStarReport> {
    let t = calc.theory().clone();
    let mut s = Sampler::new(seed);
    let mut r = CStarReport {
        samples,
        cstar: 0.0,
        adjoint_norm: 0.0,
        tolerance: 1e-8,
        passed: false,
    };
    for _ in 0..samples {
        let a = s.generalized_transformation(&t);
        let ad = adjoint(calc, inv, &a)?;
        let na = rep.norm(calc, &a)?;
        let nad = rep.norm(calc, &ad)?;
        let nada = rep.norm(calc, &theory::compose(&ad, &a)?)?;
        r.cstar = r.cstar.max(rel(nada, na * na));
        r.adjoint_norm = r.adjoint_norm.max(rel(nad, na));
    }
    r.passed = r.cstar < r.tolerance && r.adjoint_norm < r.tolerance;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornReport {
    pub samples: usize,
    /// `omega(a) = <pi(a)|pi(omega)>`.
    pub state_deviation: f64,
    /// `omega(b o A) = <pi(b)|pi(A^sigma)|pi(omega)>`.
    pub transformation_deviation: f64,
    pub max_preparation_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Vector `pi(omega) = sigma [T_omega]_eff / p` of a state, where
/// `T_omega` prepares `Phi|_1 (x) omega`.
pub fn state_vector(calc: &FaithfulCalculus, inv: &InvolutionData, omega: &Weight) -> Result<(DVector<f64>, f64)> {
    let prep = calc.local_preparation(omega)?;
    let v = inv.apply(prep.transformation.effect().coords()) / prep.probability;
    Ok((v, prep.residual))
}

/// Born-rule form of probabilities on sampled states, effects and channels.
pub fn born_rule_check(
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    rep: &GnsRepresentation,
    samples: usize,
    seed: u64,
) -> Result<BornReport> {
    let t = calc.theory().clone();
    let mut s = Sampler::new(seed);
    let mut r = BornReport {
        samples,
        state_deviation: 0.0,
        transformation_deviation: 0.0,
        max_preparation_residual: 0.0,
        tolerance: 1e-8,
        passed: false,
    };
    for _ in 0..samples {
        let omega = s.state(&t);
        let a = s.physical_effect(&t)?;
        let b = s.physical_effect(&t)?;
        let channel = s.channel(&t)?;
        let (v, residual) = state_vector(calc, inv, &omega)?;
        r.max_preparation_residual = r.max_preparation_residual.max(residual);

        let direct = theory::probability(&a, &omega)?;
        let born = (a.coords().transpose() * &rep.gram * &v)[(0, 0)];
        r.state_deviation = r.state_deviation.max((direct - born).abs());

        let direct = theory::probability(&theory::heisenberg_apply(&channel, &b)?, &omega)?;
        let pi = rep.represent(calc, &extend_involution(inv, &channel))?;
        let born = (b.coords().transpose() * &rep.gram * pi * &v)[(0, 0)];
        r.transformation_deviation = r.transformation_deviation.max((direct - born).abs());
    }
    r.passed = r.state_deviation < r.tolerance && r.transformation_deviation < r.tolerance;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisStressReport {
    pub magnitude: f64,
    pub samples: usize,
    /// Involution rebuilt in the perturbed basis, mapped back.
    pub sigma_deviation: f64,
    pub adjoint_deviation: f64,
}

/// Rebuilds the involution after a random change of effect basis
/// `a = S a~`, `S = 1 + magnitude N`, and compares it and the resulting
/// adjoints with the original ones.
pub fn basis_change_stress(
    calc: &FaithfulCalculus,
    inv: &InvolutionData,
    magnitude: f64,
    samples: usize,
    seed: u64,
) -> Result<BasisStressReport> {
    let t = calc.theory().clone();
    let n = t.dim();
    let mut s = Sampler::new(seed);
    let change = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| s.normal()) * magnitude;
    let change_inv = change
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular basis change".into()))?;
    let form = change.transpose() * &inv.form * &change;
    let local = involution(&form, t.tolerances().rank);
    let sigma_back = &change * &local.sigma * &change_inv;
    let mut adjoint_deviation = 0.0f64;
    for _ in 0..samples {
        let a = s.generalized_transformation(&t);
        let expected = adjoint(calc, inv, &a)?;
        let at = calc.transpose(&a)?;
        let at_new = change.transpose() * at.matrix() * change_inv.transpose();
        let weight_sigma = local.sigma.transpose();
        let ad_new = &weight_sigma * at_new * &weight_sigma;
        let ad = change_inv.transpose() * ad_new * change.transpose();
        adjoint_deviation = adjoint_deviation.max(rel_mat(&ad, expected.matrix()));
    }
    Ok(BasisStressReport {
        magnitude,
        samples,
        sigma_deviation: linalg::max_abs(&(sigma_back - &inv.sigma)),
        adjoint_deviation,
    })
}
