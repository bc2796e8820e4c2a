//! The `audit` suite: every check over one loaded theory, in a fixed order.

use std::sync::Arc;

use nalgebra::DMatrix;
use optaudit_core::composite::{self, CompositeTheory};
use optaudit_core::faithful::{self, FaithfulCalculus};
use optaudit_core::geometry::{self, NormSearch};
use optaudit_core::gns::{self, GnsRepresentation, InvolutionData};
use optaudit_core::linalg;
use optaudit_core::theories::Sampler;
use optaudit_core::theory::{self, Transformation};
use optaudit_core::Result;

use crate::file::LoadedTheory;
use crate::report::{AuditReport, PostulateVerdict, Record, Status, Verdict};

pub const SAMPLES: usize = 20;

#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    pub seed: u64,
    /// Overrides the tolerance of every deviation check.
    pub tol: Option<f64>,
    /// Id prefixes to run; all checks when empty.
    pub checks: Vec<String>,
}

struct Context<'a> {
    loaded: &'a LoadedTheory,
    options: &'a AuditOptions,
    composite: Option<Arc<CompositeTheory>>,
    calc: Option<FaithfulCalculus>,
    inv: Option<InvolutionData>,
    rep: Option<GnsRepresentation>,
    audit: Option<geometry::DimensionAudit>,
}

impl Context<'_> {
    fn tol(&self, default: f64) -> f64 {
        self.options.tol.unwrap_or(default)
    }

    fn seed(&self, offset: u64) -> u64 {
        self.options.seed.wrapping_add(offset)
    }

    fn search(&self, offset: u64) -> NormSearch {
        NormSearch {
            seed: self.seed(offset),
            ..NormSearch::default()
        }
    }

    fn wanted(&self, id: &str) -> bool {
        self.options.checks.is_empty() || self.options.checks.iter().any(|p| id.starts_with(p.as_str()))
    }
}

fn pass_if(ok: bool, otherwise: Status) -> Status {
    if ok {
        Status::Pass
    } else {
        otherwise
    }
}

fn skipped(id: &str, anchor: &str, reason: &str) -> Record {
    Record::new(id, anchor).status(Status::Skipped).with("reason", reason)
}

fn errored(id: &str, anchor: &str, e: optaudit_core::Error) -> Record {
    Record::new(id, anchor).status(Status::Fail).with("error", e.to_string())
}

fn core_invariants(cx: &Context) -> Result<Record> {
    let t = &cx.loaded.theory;
    let tol = cx.tol(t.tolerances().cone);
    let seed = cx.seed(1);
    let mut s = Sampler::new(seed);
    let (mut bad_states, mut bad_effects, mut bad_maps, mut bad_instruments, mut bad_probabilities) = (0, 0, 0, 0, 0);
    for _ in 0..SAMPLES {
        let omega = s.state(t);
        bad_states += usize::from(!theory::is_physical_state(&omega));
        let a = s.physical_effect(t)?;
        bad_effects += usize::from(!theory::is_physical_effect(&a));
        let p = theory::probability(&a, &omega)?;
        bad_probabilities += usize::from(p < -tol || p > 1.0 + tol);
        let instrument = s.instrument(t, 3)?;
        bad_instruments += usize::from(!theory::validate_experiment(&instrument).passed);
        let c1 = s.channel(t)?;
        let c2 = s.channel(t)?;
        bad_maps += usize::from(!theory::is_physical_transformation(&theory::compose(&c1, &c2)?));
    }
    let ok = bad_states + bad_effects + bad_maps + bad_instruments + bad_probabilities == 0;
    Ok(Record::new(
        "core.invariants",
        "sampled states, effects, instruments and compositions stay physical",
    )
    .status(pass_if(ok, Status::Fail))
    .with("samples", SAMPLES)
    .with("unphysical_states", bad_states)
    .with("unphysical_effects", bad_effects)
    .with("unphysical_compositions", bad_maps)
    .with("incomplete_instruments", bad_instruments)
    .with("probabilities_out_of_range", bad_probabilities)
    .tolerance(tol)
    .seed(seed))
}

fn norm_axioms(cx: &Context) -> Result<Record> {
    let t = &cx.loaded.theory;
    let seed = cx.seed(2);
    let search = cx.search(2);
    let mut s = Sampler::new(seed);
    let exact = t.quantum_basis().is_none();
    let tol = cx.tol(if exact { 1e-10 } else { 1e-6 });
    let norm = |a: &Transformation| geometry::transformation_norm_with(a, &search).value;
    let (mut homogeneity, mut subadditivity, mut submultiplicativity) = (0.0f64, 0.0f64, 0.0f64);
    let (mut weight_law, mut effect_law) = (0.0f64, 0.0f64);
    let (mut bound_violations, mut equality_violations) = (0, 0);
    for _ in 0..SAMPLES {
        let a = s.generalized_transformation(t);
        let b = s.generalized_transformation(t);
        let lambda = 4.0 * s.uniform() - 2.0;
        let (na, nb) = (norm(&a), norm(&b));
        let scale = na.max(nb).max(1.0);
        homogeneity = homogeneity.max((norm(&a.scaled_unchecked(lambda)) - lambda.abs() * na).abs() / scale);
        subadditivity = subadditivity.max((norm(&a.sum_unchecked(&b)?) - na - nb).max(0.0) / scale);
        submultiplicativity =
            submultiplicativity.max((norm(&theory::compose(&a, &b)?) - na * nb).max(0.0) / (na * nb).max(1.0));

        let (v, w) = (s.generalized_weight(t), s.generalized_weight(t));
        let nv = geometry::weight_norm(&v);
        weight_law = weight_law.max((geometry::weight_norm(&v.add(&w)?) - nv - geometry::weight_norm(&w)).max(0.0));
        weight_law = weight_law.max((geometry::weight_norm(&v.scaled(lambda)) - lambda.abs() * nv).abs());
        let (e, f) = (s.generalized_effect(t), s.generalized_effect(t));
        let ne = geometry::effect_norm(&e);
        effect_law = effect_law.max((geometry::effect_norm(&e.add(&f)?) - ne - geometry::effect_norm(&f)).max(0.0));
        effect_law = effect_law.max((geometry::effect_norm(&e.scaled(lambda)) - lambda.abs() * ne).abs());

        if !geometry::check_norm_effect_bound(&a, &search).bound_holds {
            bound_violations += 1;
        }
        let physical = s.channel(t)?.scaled_unchecked(lambda);
        let r = geometry::check_norm_effect_bound(&physical, &search);
        if !r.bound_holds {
            bound_violations += 1;
        }
        if r.equality_holds != Some(true) {
            equality_violations += 1;
        }
    }
    let ok = [homogeneity, subadditivity, submultiplicativity, weight_law, effect_law]
        .iter()
        .all(|&x| x <= tol)
        && bound_violations == 0
        && equality_violations == 0;
    Ok(Record::new(
        "norms.axioms",
        "norm laws; effect norm bounded by transformation norm, equal on real multiples of physical maps",
    )
    .status(pass_if(ok, Status::Fail))
    .with("samples", SAMPLES)
    .with("transformation_norm_exact", exact)
    .with("homogeneity", homogeneity)
    .with("subadditivity_excess", subadditivity)
    .with("submultiplicativity_excess", submultiplicativity)
    .with("weight_norm_law", weight_law)
    .with("effect_norm_law", effect_law)
    .with("effect_bound_violations", bound_violations)
    .with("double_cone_equality_violations", equality_violations)
    .tolerance(tol)
    .seed(seed))
}

fn coexistence(cx: &Context) -> Result<Record> {
    let t = &cx.loaded.theory;
    let seed = cx.seed(3);
    let search = cx.search(3);
    let mut s = Sampler::new(seed);
    let (mut coexistent, mut disagreements) = (0, 0);
    for _ in 0..SAMPLES {
        let a = s.channel(t)?.scaled_unchecked(s.uniform());
        let b = s.channel(t)?.scaled_unchecked(s.uniform());
        let r = geometry::coexistence_report(&a, &b, &search)?;
        coexistent += usize::from(r.coexistent);
        disagreements += usize::from(r.agree != Some(true));
    }
    Ok(Record::new("coexistence.contraction", "coexistence of A and B is equivalent to |A + B| <= 1")
        .status(pass_if(disagreements == 0, Status::Fail))
        .with("samples", SAMPLES)
        .with("coexistent_pairs", coexistent)
        .with("disagreements", disagreements)
        .tolerance(cx.tol(if t.quantum_basis().is_some() { 1e-6 } else { t.tolerances().cone }))
        .seed(seed))
}

fn embeddings(cx: &Context, c: &CompositeTheory) -> Result<Record> {
    let t = &cx.loaded.theory;
    let seed = cx.seed(4);
    let tol = cx.tol(1e-12);
    let mut s = Sampler::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let a = s.generalized_transformation(t);
        let b = s.generalized_transformation(t);
        let scale = linalg::max_abs(a.matrix()).max(1.0) * linalg::max_abs(b.matrix()).max(1.0);
        worst = worst.max(composite::embedding_commutator(c, &a, &b)? / scale);
    }
    Ok(Record::new("composite.embeddings", "local transformations on different factors commute")
        .status(pass_if(worst <= tol, Status::Finding))
        .with("samples", SAMPLES)
        .with("commutator", worst)
        .tolerance(tol)
        .seed(seed))
}

fn no_signaling(cx: &Context, c: &Arc<CompositeTheory>) -> Result<Record> {
    let t = &cx.loaded.theory;
    let seed = cx.seed(5);
    let tol = cx.tol(1e-10);
    let mut s = Sampler::new(seed);
    let (mut deviation, mut consistency) = (0.0f64, 0.0f64);
    for _ in 0..SAMPLES {
        let omega = s.joint_state(c);
        let instrument = s.instrument(t, 3)?;
        let r = composite::check_no_signaling(c, &omega, &instrument)?;
        deviation = deviation.max(r.deviation);
        consistency = consistency.max(r.consistency_deviation);
    }
    Ok(Record::new("composite.no_signaling", "operations on one factor leave the other marginal unchanged")
        .status(pass_if(deviation <= tol && consistency <= tol, Status::Finding))
        .with("samples", SAMPLES)
        .with("marginal_deviation", deviation)
        .with("recombination_deviation", consistency)
        .tolerance(tol)
        .seed(seed))
}

fn dimension_anchor(name: &str) -> &'static str {
    match name {
        "adm_from_idim" => "affine dimension equals idim^2 - 1",
        "local_observability" => "joint affine dimension equals adm1 adm2 + adm1 + adm2",
        "adm_from_pair_idim" => "affine dimension equals idim of the pair minus one",
        "pair_idim" => "idim of the pair equals idim^2",
        "scalar_span_adm" => "rank of the scalar product equals adm + 1",
        "scalar_span_idim" => "rank of the scalar product equals idim^2",
        "transformation_adm" => "span of transformations has dimension adm of the pair plus one",
        _ => "dimension identity",
    }
}

fn dimension_records(cx: &Context) -> Vec<Record> {
    let Some(audit) = &cx.audit else {
        return vec![];
    };
    audit
        .checks
        .iter()
        .map(|c| {
            let mut r = Record::new(format!("dimension.{}", c.name), dimension_anchor(c.name))
                .status(pass_if(c.holds, Status::Finding))
                .with("lhs", c.lhs)
                .with("rhs", c.rhs)
                .with("adm", audit.adm)
                .with("idim", audit.idim)
                .with("idim_lower_bound", audit.idim_lower_bound);
            if let Some(j) = audit.joint_idim {
                r = r.with("pair_idim", j);
            }
            if let Some(note) = c.note {
                r = r.with("note", note);
            }
            r
        })
        .collect()
}

fn ic_observable(cx: &Context) -> Result<Record> {
    let t = &cx.loaded.theory;
    let obs = geometry::informationally_complete_observable(t)?;
    let ic = obs.is_informationally_complete();
    let physical = obs.effects().iter().all(theory::is_physical_effect);
    Ok(Record::new("observable.informationally_complete", "an informationally complete observable exists")
        .status(pass_if(ic.complete && physical, Status::Finding))
        .with("outcomes", obs.effects().len())
        .with("rank", ic.rank)
        .with("dim", t.dim())
        .with("physical", physical)
        .tolerance(t.tolerances().rank))
}

fn faithful_records(cx: &Context) -> Vec<Record> {
    let no_state = "no faithful state supplied";
    let ids = [
        ("faithful.symmetric", "Phi(a, b) = Phi(b, a)"),
        ("faithful.dynamical", "T -> (T, I) Phi is injective"),
        ("faithful.preparational", "every joint state is prepared from Phi by a local map"),
    ];
    let Some(phi) = &cx.loaded.faithful else {
        return ids.iter().map(|(id, a)| skipped(id, a, no_state)).collect();
    };
    let mut out = Vec::new();
    let tol = cx.tol(1e-10);
    let dev = faithful::symmetry_deviation(phi);
    out.push(
        Record::new(ids[0].0, ids[0].1)
            .status(pass_if(dev <= tol, Status::Finding))
            .with("asymmetry", dev)
            .tolerance(tol),
    );
    match faithful::is_dynamically_faithful(phi) {
        Ok(r) => out.push(
            Record::new(ids[1].0, ids[1].1)
                .status(pass_if(r.faithful, Status::Finding))
                .with("rank", r.rank)
                .with("expected", r.expected)
                .tolerance(phi.theory().tolerances().rank),
        ),
        Err(e) => out.push(errored(ids[1].0, ids[1].1, e)),
    }
    match &cx.calc {
        None => out.push(
            Record::new(ids[2].0, ids[2].1)
                .status(Status::Finding)
                .with("reason", "state is not dynamically faithful"),
        ),
        Some(calc) => {
            let seed = cx.seed(6);
            let mut s = Sampler::new(seed);
            let c = phi.composite().clone();
            let mut worst = 0.0f64;
            let mut failures = 0;
            for _ in 0..SAMPLES {
                let omega = s.joint_state(&c);
                match calc.preparation_transformation(&omega) {
                    Ok(p) => worst = worst.max(p.residual),
                    Err(_) => failures += 1,
                }
            }
            let tol = cx.tol(1e-8);
            out.push(
                Record::new(ids[2].0, ids[2].1)
                    .status(pass_if(failures == 0 && worst <= tol, Status::Finding))
                    .with("samples", SAMPLES)
                    .with("max_residual", worst)
                    .with("unpreparable", failures)
                    .tolerance(tol)
                    .seed(seed),
            );
        }
    }
    out
}

const GNS_CHECKS: [(&str, &str); 7] = [
    ("transpose.axioms", "transposition is linear, involutive, order reversing and moves maps across Phi"),
    ("gns.involution", "spectral involution of the bilinear form maps physical objects to physical ones"),
    ("gns.scalar_product", "scalar product computed through transposes agrees with M sigma"),
    ("gns.adjoint", "adjoint identity <B|A o C> = <A^dagger o B|C>"),
    ("gns.representation", "pi(A) = A'^T is a bounded *-homomorphism"),
    ("gns.cstar", "|A^dagger o A| = |A|^2 and |A^dagger| = |A|"),
    ("gns.born", "probabilities are reproduced as GNS matrix elements"),
];

fn gns_records(cx: &Context) -> Vec<Record> {
    let (Some(calc), Some(inv)) = (&cx.calc, &cx.inv) else {
        let reason = if cx.loaded.faithful.is_some() {
            "requires a dynamically faithful state"
        } else {
            "no faithful state supplied"
        };
        return GNS_CHECKS.iter().map(|(id, a)| skipped(id, a, reason)).collect();
    };
    let mut out = Vec::new();
    let run = |id: &str, anchor: &str, f: &dyn Fn() -> Result<Record>| match f() {
        Ok(r) => r,
        Err(e) => errored(id, anchor, e),
    };
    let t = calc.theory();

    let (id, anchor) = GNS_CHECKS[0];
    out.push(run(id, anchor, &|| {
        let seed = cx.seed(7);
        let r = faithful::verify_transposition_axioms(calc, SAMPLES, seed)?;
        let tol = cx.tol(r.tolerance);
        let worst = [
            r.max_residual,
            r.linearity,
            r.involutivity,
            r.anti_homomorphism,
            r.pairing_identity,
            r.identity_fixed,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok(Record::new(id, anchor)
            .status(pass_if(worst <= tol, Status::Fail))
            .with("samples", SAMPLES)
            .with("solver_residual", r.max_residual)
            .with("linearity", r.linearity)
            .with("involutivity", r.involutivity)
            .with("anti_homomorphism", r.anti_homomorphism)
            .with("pairing_identity", r.pairing_identity)
            .with("identity_fixed", r.identity_fixed)
            .tolerance(tol)
            .seed(seed))
    }));

    let (id, anchor) = GNS_CHECKS[1];
    out.push(run(id, anchor, &|| {
        let seed = cx.seed(8);
        let r = gns::check_sigma_physicality(inv, t, SAMPLES, seed)?;
        Ok(Record::new(id, anchor)
            .status(pass_if(r.passed && !inv.degenerate, Status::Finding))
            .with("signature", vec![inv.signature.positive, inv.signature.negative, inv.signature.zero])
            .with("degenerate", inv.degenerate)
            .with("identity_deviation", r.identity_deviation)
            .with("states_checked", r.states_checked)
            .with("state_counterexamples", r.state_counterexamples)
            .with("transformations_checked", r.transformations_checked)
            .with("transformation_counterexamples", r.transformation_counterexamples)
            .tolerance(t.tolerances().cone)
            .seed(seed))
    }));

    let (id, anchor) = GNS_CHECKS[2];
    out.push(run(id, anchor, &|| {
        let tol = cx.tol(1e-10);
        let g = cx.rep.as_ref().map(|r| r.gram.clone()).unwrap_or_else(|| DMatrix::zeros(0, 0));
        let dev = linalg::max_abs(&(&g - inv.gram()));
        Ok(Record::new(id, anchor)
            .status(pass_if(dev <= tol, Status::Fail))
            .with("deviation", dev)
            .tolerance(tol))
    }));

    let (id, anchor) = GNS_CHECKS[3];
    out.push(run(id, anchor, &|| {
        let seed = cx.seed(9);
        let r = gns::check_adjoint_identity(calc, inv, SAMPLES, seed)?;
        let tol = cx.tol(r.tolerance);
        let ok = r.adjoint_identity <= tol && r.involutivity <= tol && r.anti_homomorphism <= tol;
        Ok(Record::new(id, anchor)
            .status(pass_if(ok, Status::Fail))
            .with("samples", SAMPLES)
            .with("adjoint_identity", r.adjoint_identity)
            .with("involutivity", r.involutivity)
            .with("anti_homomorphism", r.anti_homomorphism)
            .with("local_form", r.local_form)
            .with("identity_preserving", r.identity_preserving)
            .tolerance(tol)
            .seed(seed))
    }));

    let Some(rep) = &cx.rep else {
        for (id, anchor) in &GNS_CHECKS[4..] {
            out.push(skipped(id, anchor, "representation unavailable"));
        }
        return out;
    };

    let (id, anchor) = GNS_CHECKS[4];
    out.push(run(id, anchor, &|| {
        let seed = cx.seed(10);
        let r = gns::check_representation(rep, calc, inv, SAMPLES, seed)?;
        let tol = cx.tol(r.tolerance);
        let ok = [r.identity, r.homomorphism, r.closed_form, r.adjoint].iter().all(|&x| x <= tol)
            && r.continuity_violations == 0;
        Ok(Record::new(id, anchor)
            .status(pass_if(ok, Status::Fail))
            .with("samples", SAMPLES)
            .with("null_rank", r.null_rank)
            .with("identity", r.identity)
            .with("homomorphism", r.homomorphism)
            .with("closed_form", r.closed_form)
            .with("adjoint", r.adjoint)
            .with("continuity_violations", r.continuity_violations)
            .tolerance(tol)
            .seed(seed))
    }));

    let (id, anchor) = GNS_CHECKS[5];
    out.push(run(id, anchor, &|| {
        let seed = cx.seed(11);
        let r = gns::check_cstar_identity(rep, calc, inv, SAMPLES, seed)?;
        let tol = cx.tol(r.tolerance);
        Ok(Record::new(id, anchor)
            .status(pass_if(r.cstar <= tol && r.adjoint_norm <= tol, Status::Fail))
            .with("samples", SAMPLES)
            .with("cstar", r.cstar)
            .with("adjoint_norm", r.adjoint_norm)
            .tolerance(tol)
            .seed(seed))
    }));

    let (id, anchor) = GNS_CHECKS[6];
    out.push(run(id, anchor, &|| {
        let seed = cx.seed(12);
        let r = gns::born_rule_check(calc, inv, rep, SAMPLES, seed)?;
        let tol = cx.tol(r.tolerance);
        Ok(Record::new(id, anchor)
            .status(pass_if(
                r.state_deviation <= tol && r.transformation_deviation <= tol,
                Status::Fail,
            ))
            .with("samples", SAMPLES)
            .with("state_deviation", r.state_deviation)
            .with("transformation_deviation", r.transformation_deviation)
            .with("max_preparation_residual", r.max_preparation_residual)
            .tolerance(tol)
            .seed(seed))
    }));
    out
}

fn positivity_record(cx: &Context) -> Record {
    let id = "gns.positivity";
    let anchor = "the scalar product is strictly positive";
    let Some(phi) = &cx.loaded.faithful else {
        return skipped(id, anchor, "no faithful state supplied");
    };
    let threshold = cx.tol(phi.theory().tolerances().gram);
    // Without a transpose the Gram matrix comes from the spectral form.
    let gram = match (&cx.rep, &cx.inv) {
        (Some(rep), _) => rep.gram.clone(),
        (None, Some(inv)) => inv.gram(),
        (None, None) => match gns::bilinear_form(phi) {
            Ok(f) => gns::involution(&f.matrix, phi.theory().tolerances().rank).gram(),
            Err(e) => return errored(id, anchor, e),
        },
    };
    let r = gns::check_strict_positivity(&gram, threshold);
    Record::new(id, anchor)
        .status(pass_if(r.passed, Status::Finding))
        .with("min_eigenvalue", r.min_eigenvalue)
        .with("eigenvalues", r.eigenvalues)
        .with("null_rank", r.null_rank)
        .tolerance(threshold)
}

fn postulate(
    report: &[Record],
    id: &'static str,
    statement: &'static str,
    basis: &[&str],
    undecided_if: bool,
) -> PostulateVerdict {
    let found: Vec<&Record> = basis.iter().filter_map(|b| report.iter().find(|r| r.id == *b)).collect();
    let verdict = if undecided_if || found.len() < basis.len() || found.iter().any(|r| r.status == Status::Skipped) {
        if found.iter().any(|r| matches!(r.status, Status::Fail | Status::Finding)) {
            Verdict::Inconsistent
        } else {
            Verdict::Undecided
        }
    } else if found.iter().all(|r| r.status == Status::Pass) {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    PostulateVerdict {
        id,
        statement,
        verdict,
        basis: basis.iter().map(|s| s.to_string()).collect(),
    }
}

/// Runs the audit suite.
pub fn run(loaded: &LoadedTheory, options: &AuditOptions) -> AuditReport {
    let mut records = Vec::new();
    let mut cx = Context {
        loaded,
        options,
        composite: None,
        calc: None,
        inv: None,
        rep: None,
        audit: None,
    };
    let composite = loaded.composite();
    cx.composite = composite.as_ref().ok().cloned();
    if let Some(phi) = &loaded.faithful {
        if let Ok(calc) = FaithfulCalculus::new(phi.clone()) {
            if let Ok(inv) = gns::involution_for(&calc) {
                cx.rep = gns::gns_representation(&calc, &inv).ok();
                cx.inv = Some(inv);
            }
            cx.calc = Some(calc);
        }
    }
    let want_dims = cx.wanted("dimension") || cx.options.checks.is_empty();
    if want_dims {
        cx.audit = geometry::dimension_audit(&loaded.theory, cx.composite.as_deref(), cx.calc.as_ref()).ok();
    }

    let mut push = |r: Record, cx: &Context| {
        if cx.wanted(&r.id) {
            records.push(r);
        }
    };
    let guarded = |id: &str, anchor: &str, f: &dyn Fn(&Context) -> Result<Record>, cx: &Context| {
        if !cx.wanted(id) {
            return None;
        }
        Some(f(cx).unwrap_or_else(|e| errored(id, anchor, e)))
    };

    let c_anchor = "sampled states, effects, instruments and compositions stay physical";
    if let Some(r) = guarded("core.invariants", c_anchor, &core_invariants, &cx) {
        push(r, &cx);
    }
    if let Some(r) = guarded("norms.axioms", "norm laws", &norm_axioms, &cx) {
        push(r, &cx);
    }
    if let Some(r) = guarded("coexistence.contraction", "coexistence and contraction", &coexistence, &cx) {
        push(r, &cx);
    }
    match &cx.composite {
        Some(c) => {
            let c = c.clone();
            if let Some(r) = guarded("composite.embeddings", "local embeddings", &|cx| embeddings(cx, &c), &cx) {
                push(r, &cx);
            }
            if let Some(r) = guarded("composite.no_signaling", "no signaling", &|cx| no_signaling(cx, &c), &cx) {
                push(r, &cx);
            }
        }
        None => {
            let reason = match &composite {
                Err(e) => e.to_string(),
                Ok(_) => "composite unavailable".into(),
            };
            push(skipped("composite.embeddings", "local embeddings", &reason), &cx);
            push(skipped("composite.no_signaling", "no signaling", &reason), &cx);
        }
    }
    for r in dimension_records(&cx) {
        push(r, &cx);
    }
    if let Some(r) = guarded("observable.informationally_complete", "IC observable", &ic_observable, &cx) {
        push(r, &cx);
    }
    for r in faithful_records(&cx) {
        push(r, &cx);
    }
    push(positivity_record(&cx), &cx);
    for r in gns_records(&cx) {
        push(r, &cx);
    }

    let idim_uncertain = cx.audit.as_ref().is_some_and(|a| a.idim_lower_bound);
    let postulates = vec![
        postulate(
            &records,
            "P1",
            "systems compose into independent subsystems",
            &["composite.embeddings", "composite.no_signaling"],
            false,
        ),
        postulate(
            &records,
            "P2",
            "an informationally complete observable exists",
            &["observable.informationally_complete"],
            false,
        ),
        postulate(
            &records,
            "P3",
            "joint states are determined by local measurements",
            &["dimension.local_observability"],
            false,
        ),
        postulate(
            &records,
            "P4",
            "a discriminating observable is informationally complete for the pair",
            &["dimension.adm_from_idim", "dimension.adm_from_pair_idim", "dimension.pair_idim"],
            idim_uncertain,
        ),
        postulate(
            &records,
            "P5",
            "a symmetric, faithful, strictly positive bipartite state exists",
            &[
                "faithful.symmetric",
                "faithful.dynamical",
                "faithful.preparational",
                "gns.positivity",
            ],
            false,
        ),
    ];
    AuditReport {
        theory: loaded.display_name(),
        seed: options.seed,
        records,
        postulates,
    }
}
