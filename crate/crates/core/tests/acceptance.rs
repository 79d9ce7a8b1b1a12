//! The acceptance criteria, each timed against its limit.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! PASS/FAIL lines.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use mildkit::algebra::Context;
use mildkit::freeness::{
    anick_check, combinatorially_free, quotient_dimensions, quotient_dimensions_with,
    series_admissibility, strongly_free_oracle, AdmissibilityStatus, FreenessError, FreenessStatus,
    HilbertEngine,
};
use mildkit::lie::{expand_hall, lie_membership, restricted_basis, HallBasis, LieMembership};
use mildkit::magnus::{GroupWord, NamedRelator, Presentation};
use mildkit::massey::{
    bn_map, check_mild, check_shuffles, demuskin_mildness, demuskin_type, massey_tensor,
    one_relator_verdict, zassenhaus_invariant, Decomposition, DemuskinMildness, MasseyTensor,
    MildVerdict, OneRelatorStatus, Zassenhaus,
};
use mildkit::orders::MonomialOrder;
use mildkit::syntax::parse_presentation;
use mildkit::{Budget, IntSeries, Monomial, Poly, PrimeField, Weights};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CIRCUIT: &str = include_str!("../../../corpus/circuit4.pres");
const TRIANGLE: &str = include_str!("../../../corpus/triangle3.pres");
const WEIGHTED: &str = include_str!("../../../corpus/weighted_rescue.pres");
const DEMUSKIN_P3: &str = include_str!("../../../corpus/demuskin_type_p3.pres");
const DEMUSKIN2: &str = include_str!("../../../corpus/demuskin2.pres");
const CYCLIC: &str = include_str!("../../../corpus/cyclic3.pres");
const HEISENBERG: &str = include_str!("../../../corpus/heisenberg3.pres");

fn budget() -> Budget {
    Budget::default()
}

fn load(text: &str) -> Presentation {
    parse_presentation(text).expect("corpus file parses")
}

fn x(i: usize) -> GroupWord {
    GroupWord::gen(i)
}

fn comm(a: GroupWord, b: GroupWord) -> GroupWord {
    GroupWord::commutator(a, b)
}

/// `[x_{i1}, x_{i2}, …, x_{ik}]`, bracketed from the left.
fn left_normed(idx: &[usize]) -> GroupWord {
    idx[1..].iter().fold(x(idx[0]), |acc, &i| comm(acc, x(i)))
}

fn pres(p: u64, d: usize, rels: Vec<GroupWord>) -> Presentation {
    let names = (1..=d).map(|i| format!("x{i}")).collect();
    let relators = rels
        .into_iter()
        .enumerate()
        .map(|(i, word)| NamedRelator {
            name: format!("r{}", i + 1),
            word,
        })
        .collect();
    Presentation::new(
        PrimeField::new(p).unwrap(),
        names,
        Weights::uniform(d),
        relators,
    )
    .unwrap()
}

fn int_series(s: &IntSeries) -> Vec<i64> {
    s.coeffs().to_vec()
}

/// Coefficients of `Σ_n (n+1)·2^n t^n`, the expansion of `1/(1−2t)^2`.
fn circuit_target(n: usize) -> Vec<i64> {
    (0..=n).map(|k| (k as i64 + 1) << k).collect()
}

/// Witt's formula `(1/n) Σ_{k|n} μ(k) d^{n/k}`.
fn witt(d: u64, n: u32) -> u64 {
    fn mobius(mut k: u32) -> i64 {
        let mut mu = 1;
        let mut f = 2;
        while f * f <= k {
            if k.is_multiple_of(f) {
                k /= f;
                if k.is_multiple_of(f) {
                    return 0;
                }
                mu = -mu;
            }
            f += 1;
        }
        if k > 1 {
            mu = -mu;
        }
        mu
    }
    let sum: i64 = (1..=n)
        .filter(|k| n.is_multiple_of(*k))
        .map(|k| mobius(k) * (d as i64).pow(n / k))
        .sum();
    (sum / n as i64) as u64
}

fn is_power_of(n: u32, p: u32) -> bool {
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_1() {
    let w = Weights::uniform(3);
    let start = Instant::now();
    let s = IntSeries::relation_polynomial(&w, &[2, 2, 2], 6)
        .inverse()
        .unwrap();
    let elapsed = start.elapsed();
    assert_eq!(int_series(&s), vec![1, 3, 6, 9, 9, 0, -27]);
    assert!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
}

fn criterion_2() {
    let p = load(CIRCUIT);
    let ctx = p.uniform_context();
    let forms = p.initial_forms(&ctx, 4).unwrap();
    let order = MonomialOrder::parse("deglex:x1<x3<x2<x4", p.names(), &ctx.weights).unwrap();
    let v = anick_check(&forms, &order).unwrap();
    assert!(v.is_proven(), "{v:?}");
    let q = quotient_dimensions(&ctx, &forms, 8, &budget()).unwrap();
    assert_eq!(int_series(&q), circuit_target(8));
}

fn criterion_3() {
    let p = load(TRIANGLE);
    let ctx = p.uniform_context();
    let forms = p.initial_forms(&ctx, 4).unwrap();
    let v = strongly_free_oracle(&ctx, &forms, 6, &budget()).unwrap();
    match v.status {
        FreenessStatus::Refuted { at_degree, .. } => assert!(at_degree <= 6),
        other => panic!("not refuted: {other:?}"),
    }
    let a = series_admissibility(&Weights::uniform(3), &[2, 2, 2], 6);
    assert_eq!(
        a.status,
        AdmissibilityStatus::Inadmissible {
            at_degree: 6,
            coefficient: -27
        }
    );
}

fn criterion_4() {
    let p = load(WEIGHTED);
    let uniform = p.uniform_context();
    let forms = p.initial_forms(&uniform, 8).unwrap();
    let v = strongly_free_oracle(&uniform, &forms, 5, &budget()).unwrap();
    assert!(
        matches!(v.status, FreenessStatus::Refuted { at_degree, .. } if at_degree <= 5),
        "{v:?}"
    );

    let ctx = Context::new(p.field(), Weights::new(vec![2, 1]).unwrap());
    let forms = p.initial_forms(&ctx, 16).unwrap();
    let expected = Poly::from_index_terms(&ctx, &[(&[1, 1], 1), (&[2, 2, 2, 2], 1)]).unwrap();
    assert_eq!(forms, vec![expected]);
    let v = strongly_free_oracle(&ctx, &forms, 12, &budget()).unwrap();
    assert_eq!(v.status, FreenessStatus::ConsistentToDegree { degree: 12 });

    // 1/(1 − t − t² + t⁴) by its recurrence
    let mut a = vec![0i64; 13];
    for n in 0..=12usize {
        let at = |k: isize| if k < 0 { 0 } else { a[k as usize] };
        a[n] = if n == 0 {
            1
        } else {
            at(n as isize - 1) + at(n as isize - 2) - at(n as isize - 4)
        };
    }
    let q = quotient_dimensions(&ctx, &forms, 12, &budget()).unwrap();
    assert_eq!(int_series(&q), a);
}

fn criterion_5() {
    let p = load(DEMUSKIN_P3);
    let b = budget();
    assert_eq!(zassenhaus_invariant(&p, 8).unwrap(), Zassenhaus::Exact(3));
    assert!(demuskin_type(&p, 8, &b).unwrap().holds());

    let check_certificate = |v: &MildVerdict| match v {
        MildVerdict::Mild { certificate, .. } => {
            assert!(combinatorially_free(&certificate.high_terms)
                .unwrap()
                .is_free());
            let order = &certificate.order;
            for (f, h) in certificate
                .initial_forms
                .iter()
                .zip(&certificate.high_terms)
            {
                assert_eq!(&order.high_term(f).unwrap(), h);
            }
            assert!(anick_check(&certificate.initial_forms, order)
                .unwrap()
                .is_proven());
        }
        other => panic!("not mild: {other:?}"),
    };
    let direct = check_mild(&p, &Decomposition::identity(3, 2, 1), 8, &b).unwrap();
    check_certificate(&direct);
    match demuskin_mildness(&p, 8, &b).unwrap() {
        DemuskinMildness::Infinite { verdict, .. } => check_certificate(&verdict),
        other => panic!("{other:?}"),
    }
}

fn criterion_6() {
    let b = budget();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut declared = 0;
    for p in [2u64, 3, 5] {
        let lengths: Vec<usize> = (2..=5).filter(|&k| gcd(k as u32, p as u32) == 1).collect();
        let mut made = 0;
        while made < 8 {
            let d = rng.gen_range(2..=3usize);
            let k = *lengths.choose(&mut rng).unwrap();
            let mut idx = vec![1, 2];
            idx.shuffle(&mut rng);
            while idx.len() < k {
                idx.push(rng.gen_range(1..=d));
            }
            let mut word = left_normed(&idx);
            if rng.gen_bool(0.5) {
                // a deeper factor does not move z
                let e = rng.gen_range(1..=d);
                let mut q = p;
                while q <= k as u64 {
                    q *= p;
                }
                word = word.mul(&x(e).pow(q as i64));
            }
            let g = pres(p, d, vec![word]);
            let z = zassenhaus_invariant(&g, 8).unwrap();
            assert_eq!(z, Zassenhaus::Exact(k as u32), "{idx:?}");
            let r = one_relator_verdict(&g, 8, &[], false, &b).unwrap();
            assert!(r.coprime_to_p);
            assert!(
                matches!(r.status, OneRelatorStatus::Mild { .. }),
                "{:?}",
                r.status
            );

            // the Hilbert series of the initial form is extremal as far as we look
            let ctx = g.uniform_context();
            let forms = g.initial_forms(&ctx, 8).unwrap();
            let v = strongly_free_oracle(&ctx, &forms, 8, &b).unwrap();
            assert!(!v.is_refuted(), "{idx:?}: {v:?}");
            made += 1;
        }
        declared += made;
    }
    assert!(declared >= 20);

    // Lie initial forms with p | z
    for (p, d, word) in [
        (2u64, 2, comm(x(1), x(2))),
        (3, 3, left_normed(&[1, 2, 3])),
        (2, 3, left_normed(&[1, 2, 3, 3])),
        (2, 2, comm(x(1), x(2)).mul(&left_normed(&[1, 2, 2]))),
        (5, 2, left_normed(&[1, 2, 2, 2, 1])),
    ] {
        let g = pres(p, d, vec![word]);
        let r = one_relator_verdict(&g, 8, &[], false, &b).unwrap();
        assert!(!r.coprime_to_p);
        let check = &r.lie_checks[0];
        match lie_membership(&check.initial_form, check.omega, &b).unwrap() {
            LieMembership::Yes { coordinates } => {
                let ctx = check.initial_form.ctx();
                let mut sum = Poly::zero(ctx);
                for (e, a) in &coordinates {
                    sum = &sum + &expand_hall(ctx, e).scale(*a);
                }
                assert_eq!(sum, check.initial_form);
            }
            LieMembership::No => panic!("initial form should be Lie"),
        }
        assert!(matches!(r.status, OneRelatorStatus::Mild { .. }));
    }
}

/// Relators in `F_(n)`: left-normed commutators of length `n` and
/// `p^j`-th powers of length-`k` commutators with `k·p^j = n`.
fn deep_relator(rng: &mut ChaCha8Rng, p: u32, d: usize, n: u32) -> GroupWord {
    let mut word = GroupWord::identity();
    for _ in 0..rng.gen_range(1..=2) {
        let mut idx = vec![rng.gen_range(1..=d)];
        let mut other = rng.gen_range(1..=d);
        while other == idx[0] {
            other = rng.gen_range(1..=d);
        }
        idx.push(other);
        while idx.len() < n as usize {
            idx.push(rng.gen_range(1..=d));
        }
        word = word.mul(&left_normed(&idx).pow(rng.gen_range(1..p as i64).max(1)));
    }
    let mut q = p;
    while q <= n {
        if n.is_multiple_of(q) && n / q >= 2 {
            let k = (n / q) as usize;
            let idx: Vec<usize> = (0..k).map(|i| if i == 0 { 1 } else { 2 }).collect();
            word = word.mul(&left_normed(&idx).pow(q as i64));
        }
        q *= p;
    }
    word
}

fn criterion_7() {
    let b = budget();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tensors: Vec<MasseyTensor> = Vec::new();

    for p in [2u32, 3, 5] {
        for n in 2..=7u32 {
            if is_power_of(n, p) {
                continue;
            }
            for _ in 0..4 {
                let d = rng.gen_range(2..=3usize);
                let m = rng.gen_range(1..=2usize);
                let rels = (0..m).map(|_| deep_relator(&mut rng, p, d, n)).collect();
                let g = pres(p as u64, d, rels);
                let z = zassenhaus_invariant(&g, n + 1).unwrap();
                assert!(
                    !matches!(z, Zassenhaus::Exact(k) if k < n),
                    "{z:?} below {n}"
                );
                let t = massey_tensor(&g, n, n, &b).unwrap();
                for row in bn_map(&t) {
                    assert!(row.iter().all(|&v| v == 0), "B_{n} ≠ 0 at p = {p}");
                }
                tensors.push(t);
            }
        }
    }
    for (text, n) in [
        (DEMUSKIN_P3, 3),
        (DEMUSKIN2, 2),
        (CIRCUIT, 2),
        (TRIANGLE, 2),
        (CYCLIC, 3),
        (HEISENBERG, 2),
    ] {
        tensors.push(massey_tensor(&load(text), n, 8, &b).unwrap());
    }
    for t in &tensors {
        for a in 1..t.n() {
            let r = check_shuffles(t, a, t.n() - a);
            assert!(r.holds(), "({a}, {}) violated", t.n() - a);
        }
    }

    for d in 1..=3usize {
        let mut basis = HallBasis::new(Weights::uniform(d));
        for n in 1..=8 {
            assert_eq!(
                basis.of_weight(n, &b).unwrap().len() as u64,
                witt(d as u64, n),
                "d={d} n={n}"
            );
        }
    }
    for (d, p) in [(2usize, 2u32), (3, 2), (2, 3), (3, 3), (2, 5)] {
        for n in 1..=8u32 {
            let mut expected = 0;
            let mut q = 1;
            while q <= n {
                if n % q == 0 {
                    expected += witt(d as u64, n / q);
                }
                q *= p;
            }
            let got = restricted_basis(&Weights::uniform(d), n, p, &b)
                .unwrap()
                .len() as u64;
            assert_eq!(got, expected, "d={d} p={p} n={n}");
        }
    }

    // positivity tripwire over random homogeneous sequences
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let p = *[2u64, 3, 5].choose(&mut rng).unwrap();
        let d = rng.gen_range(2..=3usize);
        let ctx = Context::new(PrimeField::new(p).unwrap(), Weights::uniform(d));
        let m = rng.gen_range(1..=3);
        let rhos: Vec<Poly> = (0..m)
            .map(|_| loop {
                let deg = rng.gen_range(2..=3);
                let terms: Vec<(Monomial, i64)> = (0..rng.gen_range(1..=4))
                    .map(|_| {
                        let idx: Vec<usize> = (0..deg).map(|_| rng.gen_range(1..=d)).collect();
                        (
                            Monomial::from_indices(&idx, &ctx.weights).unwrap(),
                            rng.gen_range(1..p as i64),
                        )
                    })
                    .collect();
                let f = Poly::from_terms(&ctx, terms);
                if !f.is_zero() {
                    break f;
                }
            })
            .collect();
        match strongly_free_oracle(&ctx, &rhos, 7, &b) {
            Ok(_) => {}
            Err(FreenessError::PositivityViolated {
                degree,
                coefficient,
            }) => {
                panic!("P(t) − 1 has {coefficient} at degree {degree}")
            }
            Err(e) => panic!("{e}"),
        }
    }
}

fn random_monomial(rng: &mut ChaCha8Rng, w: &Weights) -> Monomial {
    let len = rng.gen_range(1..=4);
    let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=w.len())).collect();
    Monomial::from_indices(&idx, w).unwrap()
}

fn criterion_8() {
    let b = budget();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut free, mut not_free) = (0, 0);
    for _ in 0..100 {
        let d = rng.gen_range(1..=3usize);
        let w = Weights::uniform(d);
        let ctx: Arc<Context> = Context::new(PrimeField::new(2).unwrap(), w.clone());
        let ms: Vec<Monomial> = (0..rng.gen_range(1..=3))
            .map(|_| random_monomial(&mut rng, &w))
            .collect();
        let rhos: Vec<Poly> = ms
            .iter()
            .map(|m| Poly::monomial(&ctx, m.clone(), 1))
            .collect();
        let v = strongly_free_oracle(&ctx, &rhos, 8, &b).unwrap();
        let slice = quotient_dimensions_with(&ctx, &rhos, 8, &b, HilbertEngine::Slice).unwrap();
        assert_eq!(
            slice,
            quotient_dimensions(&ctx, &rhos, 8, &b).unwrap(),
            "{ms:?}"
        );
        if combinatorially_free(&ms).unwrap().is_free() {
            free += 1;
            assert_eq!(
                v.status,
                FreenessStatus::ConsistentToDegree { degree: 8 },
                "{ms:?}"
            );
        } else {
            not_free += 1;
            assert!(
                matches!(v.status, FreenessStatus::Refuted { at_degree, .. } if at_degree <= 8),
                "{ms:?}: {v:?}"
            );
        }
    }
    assert!(
        free > 0 && not_free > 0,
        "degenerate sample: {free} free, {not_free} not"
    );
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn()); 8] = [
        ("1 series fidelity", Duration::from_millis(1), criterion_1),
        (
            "2 circuit strongly free",
            Duration::from_secs(10),
            criterion_2,
        ),
        ("3 triangle refuted", Duration::from_secs(10), criterion_3),
        ("4 weighted rescue", Duration::from_secs(30), criterion_4),
        (
            "5 Massey mildness end-to-end",
            Duration::from_secs(5),
            criterion_5,
        ),
        (
            "6 one-relator theorems",
            Duration::from_secs(60),
            criterion_6,
        ),
        ("7 property suites", Duration::from_secs(300), criterion_7),
        (
            "8 cross-engine soundness",
            Duration::from_secs(120),
            criterion_8,
        ),
    ];
    let mut failures = Vec::new();
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let elapsed = start.elapsed();
        // criterion 1 times the series computation itself
        let in_time = name.starts_with('1') || elapsed <= limit;
        let pass = outcome.is_ok() && in_time;
        println!(
            "{} criterion {name}: {:.3} s (limit {:.3} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        );
        if !pass {
            failures.push(name);
        }
    }
    assert!(failures.is_empty(), "failed: {failures:?}");
}
