//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use optaudit_core::composite::{self, CompositeTheory};
use optaudit_core::faithful::{self, BipartiteState, FaithfulCalculus};
use optaudit_core::geometry::{self, NormSearch};
use optaudit_core::gns;
use optaudit_core::linalg::{self, CMatrix};
use optaudit_core::theories::{self, Sampler};
use optaudit_core::theory::{self, Theory, Transformation};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn bell(d: usize) -> Result<FaithfulCalculus, optaudit_core::Error> {
    FaithfulCalculus::new(theories::build_bell_state(d)?)
}

fn faithful_states() -> Result<Vec<(&'static str, FaithfulCalculus)>, optaudit_core::Error> {
    Ok(vec![
        ("qubit", bell(2)?),
        ("qutrit", bell(3)?),
        ("bit", FaithfulCalculus::new(theories::build_classical_correlated(2, &[0.5, 0.5])?)?),
        ("trit", FaithfulCalculus::new(theories::build_classical_correlated(3, &[0.5, 0.3, 0.2])?)?),
    ])
}

fn kraus_map(ops: &[CMatrix], f: impl Fn(&CMatrix) -> CMatrix) -> Vec<CMatrix> {
    ops.iter().map(f).collect()
}

fn quantum_self_consistency() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [2usize, 3] {
        let calc = bell(d)?;
        let t = calc.theory().clone();
        let inv = gns::involution_for(&calc)?;
        let mut s = Sampler::new(100 + d as u64);
        let (mut transpose_err, mut adjoint_err) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let kraus = s.quantum_channel_kraus(d);
            let a = Transformation::from_kraus(&t, &kraus)?;
            let oracle = Transformation::from_kraus(&t, &kraus_map(&kraus, |k| k.transpose()))?;
            let at = calc.transpose(&a)?;
            transpose_err = transpose_err.max(linalg::max_abs(&(at.matrix() - oracle.matrix())));
            let oracle = Transformation::from_kraus(&t, &kraus_map(&kraus, |k| k.adjoint()))?;
            let ad = gns::adjoint(&calc, &inv, &a)?;
            adjoint_err = adjoint_err.max(linalg::max_abs(&(ad.matrix() - oracle.matrix())));
        }
        let negative = inv.signature.negative;
        let gram = gns::gram_matrix_with(&calc, &inv)?;
        let null_rank = gns::check_strict_positivity(&gram, t.tolerances().gram).null_rank;
        ok &= transpose_err < 1e-9 && adjoint_err < 1e-9 && negative == d * (d - 1) / 2 && null_rank == 0;
        detail.push(format!(
            "d={d}: transpose {transpose_err:.1e}, adjoint {adjoint_err:.1e}, negative {negative}/{}, null rank {null_rank}",
            d * (d - 1) / 2
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn dimension_identities() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (d, adm, idim) in [(2usize, 3usize, 2usize), (3, 8, 3)] {
        let t = theories::build_quantum(d)?;
        let audit = geometry::dimension_audit(&t, None, None)?;
        let holds = audit.check("adm_from_idim").is_some_and(|c| c.holds);
        ok &= audit.adm == adm && audit.idim == idim && holds;
        detail.push(format!("d={d}: adm {} idim {} identity {holds}", audit.adm, audit.idim));
    }
    let q = theories::build_quantum(2)?;
    let c = CompositeTheory::new(&q, &q)?;
    let audit = geometry::dimension_audit(&q, Some(&c), None)?;
    let lo = audit.check("local_observability").ok_or("missing local observability check")?;
    let pair = audit.check("pair_idim").ok_or("missing pair idim check")?;
    ok &= lo.holds && lo.lhs == 15 && pair.holds && pair.lhs == 4;
    detail.push(format!("two qubits: adm {} = {}, idim {} = {}", lo.lhs, lo.rhs, pair.lhs, pair.rhs));
    for (name, t, lhs) in [("bit", theories::build_classical(2)?, 1usize), ("gbit", theories::build_gbit()?, 2)] {
        let audit = geometry::dimension_audit(&t, None, None)?;
        let check = audit.check("adm_from_idim").ok_or("missing identity")?;
        ok &= !check.holds && check.lhs == lhs && check.rhs == 3;
        detail.push(format!("{name}: {} vs {} reported", check.lhs, check.rhs));
    }
    Ok((ok, detail.join("; ")))
}

fn no_signaling() -> Outcome {
    let pairs = [
        ("2 qubits", theories::build_quantum(2)?, theories::build_quantum(2)?),
        ("2 qutrits", theories::build_quantum(3)?, theories::build_quantum(3)?),
        ("bit x trit", theories::build_classical(2)?, theories::build_classical(3)?),
        ("2 trits", theories::build_classical(3)?, theories::build_classical(3)?),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (name, a, b)) in pairs.iter().enumerate() {
        let c = CompositeTheory::new(a, b)?;
        let mut s = Sampler::new(300 + i as u64);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let omega = s.joint_state(&c);
            let instrument = s.instrument(a, 3)?;
            let r = composite::check_no_signaling(&c, &omega, &instrument)?;
            worst = worst.max(r.deviation).max(r.consistency_deviation);
        }
        ok &= worst < 1e-10;
        detail.push(format!("{name} {worst:.1e}"));
    }
    Ok((ok, detail.join(", ")))
}

fn banach_laws() -> Outcome {
    let theories_under_test = [
        ("qubit", theories::build_quantum(2)?),
        ("qutrit", theories::build_quantum(3)?),
        ("trit", theories::build_classical(3)?),
        ("gbit", theories::build_gbit()?),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (name, t)) in theories_under_test.iter().enumerate() {
        let (worst, failures) = banach_laws_for(t, 400 + i as u64)?;
        let tol = if t.quantum_basis().is_some() { 1e-6 } else { 1e-10 };
        ok &= worst <= tol && failures == 0;
        detail.push(format!("{name} {worst:.1e}/{failures}"));
    }
    Ok((ok, format!("max excess/failed predicates: {}", detail.join(", "))))
}

fn banach_laws_for(t: &Theory, seed: u64) -> Result<(f64, usize), optaudit_core::Error> {
    let search = NormSearch {
        seed,
        ..NormSearch::default()
    };
    let norm = |a: &Transformation| geometry::transformation_norm_with(a, &search).value;
    let mut s = Sampler::new(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let a = s.generalized_transformation(t);
        let b = s.generalized_transformation(t);
        let lambda = 4.0 * s.uniform() - 2.0;
        let (na, nb) = (norm(&a), norm(&b));
        let scale = na.max(nb).max(1.0);
        worst = worst.max((norm(&a.scaled_unchecked(lambda)) - lambda.abs() * na).abs() / scale);
        worst = worst.max((norm(&a.sum_unchecked(&b)?) - na - nb).max(0.0) / scale);
        worst = worst.max((norm(&theory::compose(&a, &b)?) - na * nb).max(0.0) / (na * nb).max(1.0));

        let (v, w) = (s.generalized_weight(t), s.generalized_weight(t));
        let nv = geometry::weight_norm(&v);
        worst = worst.max((geometry::weight_norm(&v.add(&w)?) - nv - geometry::weight_norm(&w)).max(0.0));
        worst = worst.max((geometry::weight_norm(&v.scaled(lambda)) - lambda.abs() * nv).abs());
        let (e, f) = (s.generalized_effect(t), s.generalized_effect(t));
        let ne = geometry::effect_norm(&e);
        worst = worst.max((geometry::effect_norm(&e.add(&f)?) - ne - geometry::effect_norm(&f)).max(0.0));
        worst = worst.max((geometry::effect_norm(&e.scaled(lambda)) - lambda.abs() * ne).abs());

        failures += usize::from(!geometry::check_norm_effect_bound(&a, &search).bound_holds);
        let r = geometry::check_norm_effect_bound(&s.channel(t)?.scaled_unchecked(lambda), &search);
        failures += usize::from(!r.bound_holds || r.equality_holds != Some(true));

        let c1 = s.channel(t)?.scaled_unchecked(s.uniform());
        let c2 = s.channel(t)?.scaled_unchecked(s.uniform());
        failures += usize::from(geometry::coexistence_report(&c1, &c2, &search)?.agree != Some(true));
    }
    Ok((worst, failures))
}

fn transposition_axioms() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (name, calc)) in faithful_states()?.iter().enumerate() {
        let r = faithful::verify_transposition_axioms(calc, 50, 500 + i as u64)?;
        let worst = [r.linearity, r.involutivity, r.anti_homomorphism, r.pairing_identity, r.identity_fixed]
            .into_iter()
            .fold(0.0f64, f64::max);
        ok &= worst < 1e-10;
        detail.push(format!("{name} {worst:.1e}"));
    }
    Ok((ok, detail.join(", ")))
}

fn cstar_identity() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [2usize, 3] {
        let calc = bell(d)?;
        let inv = gns::involution_for(&calc)?;
        let rep = gns::gns_representation(&calc, &inv)?;
        let r = gns::check_cstar_identity(&rep, &calc, &inv, 50, 600 + d as u64)?;
        ok &= r.cstar < 1e-8 && r.adjoint_norm < 1e-9;
        detail.push(format!("d={d}: C* {:.1e}, adjoint norm {:.1e}", r.cstar, r.adjoint_norm));
    }
    Ok((ok, detail.join("; ")))
}

fn born_rule() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (name, calc)) in faithful_states()?.iter().enumerate() {
        let inv = gns::involution_for(calc)?;
        let rep = gns::gns_representation(calc, &inv)?;
        let r = gns::born_rule_check(calc, &inv, &rep, 100, 700 + i as u64)?;
        let worst = r.state_deviation.max(r.transformation_deviation);
        ok &= worst < 1e-8;
        detail.push(format!("{name} {worst:.1e}"));
    }
    Ok((ok, detail.join(", ")))
}

fn gram_of(phi: &BipartiteState) -> Result<gns::PositivityReport, optaudit_core::Error> {
    let form = gns::bilinear_form(phi)?;
    let tol = phi.theory().tolerances();
    let inv = gns::involution(&form.matrix, tol.rank);
    Ok(gns::check_strict_positivity(&inv.gram(), tol.gram))
}

fn strict_positivity() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, t) in [("qubit", theories::build_quantum(2)?), ("trit", theories::build_classical(3)?)] {
        let c: Arc<CompositeTheory> = CompositeTheory::new(&t, &t)?;
        let omega = theories::random_state(&t, 800);
        let product = c.product_state(&omega, &omega)?;
        let phi = BipartiteState::new(c, product)?;
        let r = gram_of(&phi)?;
        ok &= r.null_rank > 0 && !r.passed;
        detail.push(format!("{name} product: null rank {}", r.null_rank));
    }
    for (d, pinned) in [(2usize, 0.5), (3, 1.0 / 3.0)] {
        let r = gram_of(&theories::build_bell_state(d)?)?;
        ok &= r.min_eigenvalue > 0.1 && (r.min_eigenvalue - pinned).abs() < 1e-12;
        detail.push(format!("bell d={d}: min eigenvalue {:.12}", r.min_eigenvalue));
    }
    Ok((ok, detail.join("; ")))
}

fn cli_determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("theories");
    let mut ok = true;
    let mut detail = Vec::new();
    for file in ["qubit.json", "classical_bit.json"] {
        let path = dir.join(file);
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_optaudit"))
                .args(["audit", "--json", "--seed", "7"])
                .arg(&path)
                .output()
        };
        let (first, second) = (run()?, run()?);
        let same = first.stdout == second.stdout && !first.stdout.is_empty();
        let parses = serde_json::from_slice::<serde_json::Value>(&first.stdout).is_ok();
        ok &= same && parses && first.status.success() && second.status.success();
        detail.push(format!("{file}: {} bytes, identical {same}", first.stdout.len()));
    }
    Ok((ok, detail.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("quantum self-consistency", quantum_self_consistency),
        ("dimension identities", dimension_identities),
        ("no-signaling", no_signaling),
        ("norm laws and coexistence", banach_laws),
        ("transposition axioms", transposition_axioms),
        ("C* identity", cstar_identity),
        ("Born rule", born_rule),
        ("strict positivity", strict_positivity),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!(
            "criterion {} {:<26} {}  {} ({:.1} s)",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
