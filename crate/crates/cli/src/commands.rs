use std::sync::Arc;

use mildkit::algebra::Context;
use mildkit::freeness::{
    anick_check, quotient_dimensions_with, series_admissibility, strongly_free_oracle,
    AdmissibilityStatus, FreenessStatus, FreenessVerdict, HilbertEngine,
};
use mildkit::lie::HallBasis;
use mildkit::magnus::{expand as magnus_expand, omega_tau, Presentation};
use mildkit::massey::{
    bn_map, check_mild, check_shuffles, demuskin_mildness, demuskin_type, massey_tensor,
    massey_value, one_relator_verdict, search_mild, zassenhaus_invariant, Decomposition,
    DemuskinMildness, DemuskinType, MildVerdict, OneRelatorStatus, Zassenhaus,
};
use mildkit::orders::MonomialOrder;
use mildkit::syntax::parse_presentation;
use mildkit::{Budget, IntSeries, Poly, PrimeField, Weights};
use serde_json::{json, Value};

use crate::{CliError, FileArgs, Report};

fn load(input: &FileArgs) -> Result<Presentation, CliError> {
    let text = std::fs::read_to_string(&input.file)
        .map_err(|e| CliError::input(format!("{}: {e}", input.file.display())))?;
    parse_presentation(&text).map_err(|e| CliError::input(format!("{}: {e}", input.file.display())))
}

/// `--cutoff`, or `max(8, 2·z)` with `z` estimated at precision 8.
fn cutoff_for(p: &Presentation, input: &FileArgs) -> Result<u32, CliError> {
    if let Some(c) = input.cutoff {
        if c < 1 {
            return Err(CliError::input("--cutoff must be at least 1"));
        }
        return Ok(c);
    }
    Ok(match zassenhaus_invariant(p, 8)? {
        Zassenhaus::Exact(z) => 8.max(2 * z),
        _ => 8,
    })
}

fn weights_for(p: &Presentation, tau: Option<&[u32]>) -> Result<Weights, CliError> {
    match tau {
        None => Ok(p.weights().clone()),
        Some(t) => {
            if t.len() != p.d() {
                return Err(CliError::input(format!(
                    "{} weights for {} generators",
                    t.len(),
                    p.d()
                )));
            }
            Ok(Weights::new(t.to_vec())?)
        }
    }
}

fn inputs(p: &Presentation, input: &FileArgs, tau: &Weights, cutoff: u32) -> Value {
    json!({
        "file": input.file.display().to_string(),
        "p": p.p(),
        "d": p.d(),
        "generators": p.names(),
        "tau": tau,
        "cutoff": cutoff,
        "relators": p.relators().iter().map(|r| json!({
            "name": r.name,
            "word": r.word.display_with(p.names()),
        })).collect::<Vec<_>>(),
    })
}

fn poly_text(f: &Poly, p: &Presentation) -> String {
    let upper: Vec<String> = p.names().iter().map(|n| n.to_uppercase()).collect();
    f.display_with(&upper)
}

fn series_text(s: &IntSeries) -> String {
    s.coeffs()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Initial forms at `tau` with precision scaled by the largest weight.
fn initial_forms_at(
    p: &Presentation,
    ctx: &Arc<Context>,
    cutoff: u32,
) -> Result<Vec<Poly>, CliError> {
    let scaled = cutoff.saturating_mul(ctx.weights.as_slice().iter().copied().max().unwrap_or(1));
    Ok(p.initial_forms(ctx, scaled)?)
}

pub fn expand(input: &FileArgs, degree: u32, tau: Option<&[u32]>) -> Result<Report, CliError> {
    let p = load(input)?;
    let w = weights_for(&p, tau)?;
    let ctx = Context::new(p.field(), w.clone());
    let mut text = Vec::new();
    let mut rels = Vec::new();
    for r in p.relators() {
        let e = magnus_expand(&r.word, &ctx, degree)?;
        let terms: Vec<Value> = e
            .poly
            .terms()
            .map(|(m, c)| {
                json!({
                    "monomial": m.to_string(),
                    "degree": m.degree(),
                    "coeff": c,
                })
            })
            .collect();
        text.push(format!("{}: {}", r.name, poly_text(&e.poly, &p)));
        rels.push(json!({ "name": r.name, "expansion": e.poly, "terms": terms }));
    }
    Ok(Report {
        inputs: inputs(&p, input, &w, degree),
        result: json!({ "relators": rels }),
        text,
        verdict: None,
        failed: false,
    })
}

pub fn zassenhaus(input: &FileArgs) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let z = zassenhaus_invariant(&p, cutoff)?;
    let ctx = p.uniform_context();
    let mut omegas = Vec::new();
    let mut text = Vec::new();
    for r in p.relators() {
        let o = omega_tau(&r.word, &ctx, cutoff)?;
        text.push(format!("ω({}) = {o}", r.name));
        omegas.push(json!({ "name": r.name, "omega": o }));
    }
    let mut note = None;
    match z {
        Zassenhaus::Exact(n) => text.push(format!("z(G) = {n}")),
        Zassenhaus::Infinite => text.push("z(G) = ∞ (no relators: G is free)".into()),
        Zassenhaus::Unknown(c) => {
            let msg = format!(
                "z(G) > {c}: every relator is trivial to degree {c}; raise --cutoff (relators equal to 1 stay unknown)"
            );
            text.push(msg.clone());
            note = Some(msg);
        }
    }
    Ok(Report {
        inputs: inputs(&p, input, &Weights::uniform(p.d()), cutoff),
        result: json!({ "z": z, "omegas": omegas, "note": note }),
        text,
        verdict: Some(match z {
            Zassenhaus::Unknown(c) => format!("z > {c}"),
            _ => format!("z = {z}"),
        }),
        failed: false,
    })
}

pub fn initial_forms(input: &FileArgs, tau: Option<&[u32]>) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let w = weights_for(&p, tau)?;
    let ctx = Context::new(p.field(), w.clone());
    let forms = initial_forms_at(&p, &ctx, cutoff)?;
    let mut text = Vec::new();
    let mut rels = Vec::new();
    for (r, f) in p.relators().iter().zip(&forms) {
        let deg = f.tau_valuation();
        text.push(format!("{} (τ-degree {deg}): {}", r.name, poly_text(f, &p)));
        rels.push(json!({ "name": r.name, "degree": deg, "initial_form": f }));
    }
    Ok(Report {
        inputs: inputs(&p, input, &w, cutoff),
        result: json!({ "relators": rels }),
        text,
        verdict: None,
        failed: false,
    })
}

fn anick_lines(v: &FreenessVerdict, lines: &mut Vec<String>) -> (String, bool) {
    if let mildkit::freeness::Evidence::Anick {
        order,
        high_terms,
        violation,
    } = &v.evidence
    {
        let hts: Vec<String> = high_terms.iter().map(|m| m.to_string()).collect();
        lines.push(format!("order: {order}"));
        lines.push(format!("high terms: {}", hts.join(", ")));
        if let Some(viol) = violation {
            lines.push(format!("not combinatorially free: {viol:?}"));
        }
    }
    if v.is_proven() {
        ("proven-strongly-free".into(), false)
    } else {
        ("inconclusive".into(), true)
    }
}

pub fn anick(input: &FileArgs, tau: Option<&[u32]>, order: &str) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let w = weights_for(&p, tau)?;
    let ctx = Context::new(p.field(), w.clone());
    let forms = initial_forms_at(&p, &ctx, cutoff)?;
    let order = MonomialOrder::parse(order, p.names(), &w)?;
    let v = anick_check(&forms, &order)?;
    let mut text = Vec::new();
    let (verdict, failed) = anick_lines(&v, &mut text);
    Ok(Report {
        inputs: inputs(&p, input, &w, cutoff),
        result: json!({ "initial_forms": forms, "anick": v }),
        text,
        verdict: Some(verdict),
        failed,
    })
}

fn oracle_verdict(v: &FreenessVerdict) -> (String, bool) {
    match &v.status {
        FreenessStatus::ProvenStronglyFree { .. } => ("proven-strongly-free".into(), false),
        FreenessStatus::Refuted { at_degree, witness } => (
            format!("refuted at degree {at_degree} (excess {witness})"),
            true,
        ),
        FreenessStatus::ConsistentToDegree { degree } => {
            (format!("consistent-to-degree {degree}"), false)
        }
    }
}

pub fn hilbert(
    input: &FileArgs,
    tau: Option<&[u32]>,
    degree: Option<u32>,
    engine: &str,
    budget: &Budget,
) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let n = degree.unwrap_or(cutoff);
    let engine = match engine {
        "recursive" => HilbertEngine::Recursive,
        "slice" => HilbertEngine::Slice,
        other => return Err(CliError::input(format!("unknown engine {other:?}"))),
    };
    let w = weights_for(&p, tau)?;
    let ctx = Context::new(p.field(), w.clone());
    let forms = initial_forms_at(&p, &ctx, cutoff)?;
    let quotient = quotient_dimensions_with(&ctx, &forms, n, budget, engine)?;
    let sigmas: Vec<u32> = forms
        .iter()
        .filter_map(|f| f.tau_valuation().finite())
        .collect();
    let target = IntSeries::relation_polynomial(&w, &sigmas, n as usize)
        .inverse()
        .expect("constant term is 1");
    let first_diff = (0..=n as usize).find(|&k| quotient.coeff(k) != target.coeff(k));
    let text = vec![
        format!("N = {n}"),
        format!("dim B_n:  {}", series_text(&quotient)),
        format!("target:   {}", series_text(&target)),
    ];
    let (verdict, failed) = match first_diff {
        None => (format!("matches target to degree {n}"), false),
        Some(k) => (format!("differs from target at degree {k}"), true),
    };
    Ok(Report {
        inputs: inputs(&p, input, &w, cutoff),
        result: json!({
            "degree": n,
            "quotient": quotient,
            "target": target,
            "first_difference": first_diff,
        }),
        text,
        verdict: Some(verdict),
        failed,
    })
}

pub fn strongly_free(
    input: &FileArgs,
    tau: Option<&[u32]>,
    degree: Option<u32>,
    order: Option<&str>,
    budget: &Budget,
) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let n = degree.unwrap_or(cutoff);
    let w = weights_for(&p, tau)?;
    let ctx = Context::new(p.field(), w.clone());
    let forms = initial_forms_at(&p, &ctx, cutoff)?;
    let v = strongly_free_oracle(&ctx, &forms, n, budget)?;
    let mut text = vec![format!("N = {n}")];
    for (r, f) in p.relators().iter().zip(&forms) {
        text.push(format!("{}: {}", r.name, poly_text(f, &p)));
    }
    if let mildkit::freeness::Evidence::Oracle {
        quotient, target, ..
    } = &v.evidence
    {
        text.push(format!("dim B_n:  {}", series_text(quotient)));
        text.push(format!("target:   {}", series_text(target)));
    }
    let (mut verdict, mut failed) = oracle_verdict(&v);
    let anick = match order {
        Some(o) => {
            let order = MonomialOrder::parse(o, p.names(), &w)?;
            let a = anick_check(&forms, &order)?;
            let (av, _) = anick_lines(&a, &mut text);
            if a.is_proven() {
                verdict = av;
                failed = false;
            }
            Some(a)
        }
        None => None,
    };
    Ok(Report {
        inputs: inputs(&p, input, &w, cutoff),
        result: json!({ "initial_forms": forms, "oracle": v, "anick": anick }),
        text,
        verdict: Some(verdict),
        failed,
    })
}

fn parse_matrix(s: &str, d: usize, field: PrimeField) -> Result<Vec<Vec<u32>>, CliError> {
    let rows: Vec<Vec<u32>> = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map(|v| field.reduce(v))
                        .map_err(|_| CliError::input(format!("bad matrix entry {x:?}")))
                })
                .collect::<Result<Vec<u32>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::input(format!("basis must be {d}×{d}")));
    }
    Ok(rows)
}

fn parse_vector(s: &str, d: usize, field: PrimeField) -> Result<Vec<u32>, CliError> {
    let v: Vec<u32> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map(|v| field.reduce(v))
                .map_err(|_| CliError::input(format!("bad vector entry {x:?}")))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != d {
        return Err(CliError::input(format!("vector {s:?} needs {d} entries")));
    }
    Ok(v)
}

fn mild_lines(v: &MildVerdict, p: &Presentation, text: &mut Vec<String>) {
    match v {
        MildVerdict::Mild {
            decomposition,
            certificate,
        } => {
            text.push(format!("c = {}, e = {}", decomposition.c, decomposition.e));
            text.push(format!(
                "basis change (columns): {:?}",
                decomposition.basis_change
            ));
            text.push(format!("order: {}", certificate.order));
            for (f, h) in certificate
                .initial_forms
                .iter()
                .zip(&certificate.high_terms)
            {
                text.push(format!("  {}   high term {h}", poly_text(f, p)));
            }
            text.push(
                "high terms are combinatorially free; Anick's criterion proves strong freeness"
                    .into(),
            );
        }
        MildVerdict::CriterionFailed { reason, .. } => text.push(format!("reason: {reason}")),
        MildVerdict::NotApplicable { reason } => text.push(format!("reason: {reason}")),
    }
}

pub fn mild(
    input: &FileArgs,
    search: bool,
    subset: Option<&[usize]>,
    e: u32,
    basis: Option<&str>,
    budget: &Budget,
) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let d = p.d();
    let basis = basis.map(|b| parse_matrix(b, d, p.field())).transpose()?;
    let mut text = Vec::new();
    let (verdict, tried) = match subset.filter(|_| !search) {
        None => {
            let extra: Vec<Vec<Vec<u32>>> = basis.into_iter().collect();
            let out = search_mild(&p, cutoff, &extra, budget)?;
            text.push(format!(
                "searched {} decompositions",
                out.decompositions_tried
            ));
            (out.verdict, Some(out.decompositions_tried))
        }
        Some(u) => {
            if u.iter().any(|&i| i < 1 || i > d) {
                return Err(CliError::input(format!(
                    "subset entries must lie in 1..={d}"
                )));
            }
            let mut perm: Vec<usize> = u.iter().map(|i| i - 1).collect();
            perm.extend((0..d).filter(|i| !u.contains(&(i + 1))));
            let base = basis.unwrap_or_else(|| {
                (0..d)
                    .map(|i| (0..d).map(|k| u32::from(i == k)).collect())
                    .collect()
            });
            let cols: Vec<Vec<u32>> = base
                .iter()
                .map(|row| perm.iter().map(|&k| row[k]).collect())
                .collect();
            (
                check_mild(&p, &Decomposition::new(cols, u.len(), e), cutoff, budget)?,
                None,
            )
        }
    };
    mild_lines(&verdict, &p, &mut text);
    let z = zassenhaus_invariant(&p, cutoff)?;
    Ok(Report {
        inputs: inputs(&p, input, &Weights::uniform(d), cutoff),
        result: json!({ "z": z, "mild": verdict, "decompositions_tried": tried }),
        text,
        verdict: Some(verdict.status_name().to_string()),
        failed: !verdict.is_mild(),
    })
}

pub fn massey(
    input: &FileArgs,
    n: Option<u32>,
    tuple: &[String],
    budget: &Budget,
) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let n = match n {
        Some(n) => n,
        None => match zassenhaus_invariant(&p, cutoff)? {
            Zassenhaus::Exact(z) => z,
            Zassenhaus::Infinite => {
                return Err(CliError::input("no relators: there is no Massey tensor"))
            }
            Zassenhaus::Unknown(c) => {
                return Err(mildkit::massey::MasseyError::ZassenhausUnknown { cutoff: c }.into());
            }
        },
    };
    if n < 2 {
        return Err(CliError::input("--n must be at least 2"));
    }
    let t = massey_tensor(&p, n, cutoff.max(n), budget)?;
    let mut text = vec![format!("n = {n}, nonzero ε entries:")];
    for e in t.nonzero_entries() {
        let name = &p.relators()[e.relator - 1].name;
        text.push(format!("  {name} {:?} = {}", e.index, e.value));
    }
    let bn = bn_map(&t);
    text.push(format!("B_{n}: {bn:?}"));
    let shuffles: Vec<_> = (1..n).map(|a| check_shuffles(&t, a, n - a)).collect();
    let all_hold = shuffles.iter().all(|s| s.holds());
    text.push(format!(
        "shuffle identities: {}",
        if all_hold { "hold" } else { "VIOLATED" }
    ));
    let value = if tuple.is_empty() {
        None
    } else {
        let xs: Vec<Vec<u32>> = tuple
            .iter()
            .map(|s| parse_vector(s, p.d(), p.field()))
            .collect::<Result<_, _>>()?;
        let v = massey_value(&t, &xs)?;
        text.push(format!("value: {v:?}"));
        Some(v)
    };
    Ok(Report {
        inputs: inputs(&p, input, &Weights::uniform(p.d()), cutoff),
        result: json!({
            "tensor": t,
            "bn": bn,
            "shuffles": shuffles,
            "value": value,
        }),
        text,
        verdict: None,
        failed: !all_hold,
    })
}

pub fn demuskin(input: &FileArgs, budget: &Budget) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let ty = demuskin_type(&p, cutoff, budget)?;
    let mut text = Vec::new();
    let (verdict, failed, mildness) = match &ty {
        DemuskinType::WitnessFailure { chi } => {
            text.push(format!("pairing vanishes at χ = {chi:?}"));
            ("not-demuskin-type".to_string(), true, None)
        }
        DemuskinType::IsDemuskinType => {
            let m = demuskin_mildness(&p, cutoff, budget)?;
            let (v, failed) = match &m {
                DemuskinMildness::Finite { order } => (
                    format!("demuskin-type, finite cyclic of order {order}"),
                    false,
                ),
                DemuskinMildness::Infinite { chi, psi, verdict } => {
                    text.push(format!("χ = {chi:?} spans ker B_n, ψ = {psi:?}"));
                    mild_lines(verdict, &p, &mut text);
                    (
                        format!("demuskin-type, {}", verdict.status_name()),
                        !verdict.is_mild(),
                    )
                }
            };
            (v, failed, Some(m))
        }
    };
    Ok(Report {
        inputs: inputs(&p, input, &Weights::uniform(p.d()), cutoff),
        result: json!({ "demuskin_type": ty, "mildness": mildness }),
        text,
        verdict: Some(verdict),
        failed,
    })
}

pub fn one_relator(
    input: &FileArgs,
    taus: &[String],
    with_demuskin: bool,
    budget: &Budget,
) -> Result<Report, CliError> {
    let p = load(input)?;
    let cutoff = cutoff_for(&p, input)?;
    let mut weights = vec![p.weights().clone()];
    for t in taus {
        let v: Vec<u32> = t
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| CliError::input(format!("bad weight {x:?}")))
            })
            .collect::<Result<_, _>>()?;
        weights.push(Weights::new(v)?);
    }
    let r = one_relator_verdict(&p, cutoff, &weights, with_demuskin, budget)?;
    let mut text = vec![
        format!("z(G) = {}", r.z),
        format!("z prime to p: {}", r.coprime_to_p),
    ];
    for c in &r.lie_checks {
        text.push(format!(
            "τ = {}: ω = {}, initial form {} is{} a Lie polynomial",
            c.weights,
            c.omega,
            poly_text(&c.initial_form, &p),
            if c.lie { "" } else { " not" }
        ));
    }
    let power: Vec<String> = r
        .split
        .power_part
        .iter()
        .map(|(e, a)| format!("{a}·{e}"))
        .collect();
    let lie: Vec<String> = r
        .split
        .lie_part
        .iter()
        .map(|(e, a)| format!("{a}·{e}"))
        .collect();
    text.push(format!(
        "p-power part: {}",
        if power.is_empty() {
            "0".into()
        } else {
            power.join(" + ")
        }
    ));
    text.push(format!(
        "commutator part: {}",
        if lie.is_empty() {
            "0".into()
        } else {
            lie.join(" + ")
        }
    ));
    if let Some(bp) = &r.bp {
        text.push(format!(
            "B_p: {:?}, kernel basis {:?}",
            bp.matrix, bp.kernel
        ));
    }
    if let Some(d) = &r.demuskin {
        text.push(format!("Demuškin type: {}", d.holds()));
    }
    let (verdict, failed) = match &r.status {
        OneRelatorStatus::Mild { reason } => (format!("mild ({reason})"), false),
        OneRelatorStatus::FiniteCyclic { order } => {
            (format!("finite cyclic of order {order}"), false)
        }
        OneRelatorStatus::Undecided => ("undecided".to_string(), true),
    };
    Ok(Report {
        inputs: inputs(&p, input, p.weights(), cutoff),
        result: serde_json::to_value(&r).expect("serializable"),
        text,
        verdict: Some(verdict),
        failed,
    })
}

pub fn hall(
    d: usize,
    n: u32,
    p: Option<u64>,
    weights: Option<&[u32]>,
    budget: &Budget,
) -> Result<Report, CliError> {
    if d == 0 || n == 0 {
        return Err(CliError::input("need d ≥ 1 and n ≥ 1"));
    }
    let w = match weights {
        Some(w) if w.len() != d => {
            return Err(CliError::input(format!("{} weights for d = {d}", w.len())))
        }
        Some(w) => Weights::new(w.to_vec())?,
        None => Weights::uniform(d),
    };
    let mut basis = HallBasis::new(w.clone());
    let elements: Vec<String> = match p {
        None => basis
            .of_tau_degree(n, budget)?
            .iter()
            .map(|e| e.to_string())
            .collect(),
        Some(p) => {
            let f = PrimeField::new(p)?;
            basis
                .restricted(n, f.modulus(), budget)?
                .iter()
                .map(|e| e.to_string())
                .collect()
        }
    };
    let mut text = vec![format!("{} elements", elements.len())];
    text.extend(elements.iter().cloned());
    Ok(Report {
        inputs: json!({ "d": d, "n": n, "p": p, "tau": w }),
        result: json!({ "size": elements.len(), "elements": elements }),
        text,
        verdict: None,
        failed: false,
    })
}

pub fn series_admissible(tau: &[u32], sigma: &[u32], degree: u32) -> Result<Report, CliError> {
    if tau.is_empty() {
        return Err(CliError::input("--tau needs at least one weight"));
    }
    let w = Weights::new(tau.to_vec())?;
    if sigma.contains(&0) {
        return Err(CliError::input("relator degrees must be positive"));
    }
    let a = series_admissibility(&w, sigma, degree);
    let text = vec![format!("1/(1 − Σt^τ + Σt^σ) = {}", series_text(&a.target))];
    let (verdict, failed) = match &a.status {
        AdmissibilityStatus::AdmissibleTo { degree } => {
            (format!("admissible to degree {degree}"), false)
        }
        AdmissibilityStatus::Inadmissible {
            at_degree,
            coefficient,
        } => (
            format!("inadmissible at degree {at_degree} (coefficient {coefficient})"),
            true,
        ),
    };
    Ok(Report {
        inputs: json!({ "tau": w, "sigma": sigma, "degree": degree }),
        result: serde_json::to_value(&a).expect("serializable"),
        text,
        verdict: Some(verdict),
        failed,
    })
}
