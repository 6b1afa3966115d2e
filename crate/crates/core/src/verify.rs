//! Verification suites. Each returns a report whose JSON rendering depends
//! only on the configuration, never on timing or the worker count.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expansion::{
    asymptotic_moment, colour_lemma_holds, combine_single_traces, moment_exact, predicted_second_order_cov,
    trace_cumulant, DeterministicOracle, Exact, Expansion, MatrixTraces, Symbolic, DEFAULT_TERM_CAP,
};
use crate::expr::{MatrixSet, Slot, TraceExpression};
use crate::matrix::{
    brute_force_moment, haar_orthogonal, mc_moment, mean_and_se, random_rational, sample_rng, DenseMatrix,
    GENERATOR,
};
use crate::exec::par_map_range;
use crate::noncross::{
    biane_criterion, connects_frame, is_annular_noncrossing, is_disc_noncrossing, mingo_nica_criterion,
    premap_chi2_annular, premap_chi2_disc, AnnularFrame,
};
use crate::perm::{
    all_permutations, enumerate_alt_premaps, enumerate_premaps, euler_characteristic, pairings_to_premap,
    premap_to_pairings, SignedPermutation,
};
use crate::poly::{rational_interpolate, Poly, PolyFrac};
use crate::scalar::{format_rational, Scalar};
use crate::setpart::{
    enumerate_pairings, enumerate_partitions, interval, mobius, IndexSet, Pairing, SetPartition, YoungDiagram,
};
use crate::weingarten::{catalan, verify_gram_inverse, weingarten_table, wg_cumulant, wg_of, DEFAULT_WG_CAP};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        SuiteReport {
            suite: suite.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check(name: impl Into<String>, passed: bool, detail: serde_json::Value) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

pub const SUITES: &[&str] = &[
    "weingarten",
    "leading",
    "noncross",
    "loops",
    "oracle",
    "closed-forms",
    "example",
    "mc",
    "cumulant",
    "freeness",
];

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub mc_dim: usize,
    pub battery: usize,
    pub cap_terms: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            samples: 100_000,
            mc_dim: 10,
            battery: 60,
            cap_terms: DEFAULT_TERM_CAP,
        }
    }
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteReport> {
    match name {
        "weingarten" => weingarten_suite(),
        "leading" => leading_suite(),
        "noncross" => noncross_suite(),
        "loops" => loops_suite(),
        "oracle" => oracle_suite(cfg.seed, cfg.battery, cfg.cap_terms),
        "closed-forms" => closed_forms_suite(cfg.seed, cfg.cap_terms),
        "example" => example_suite(cfg.cap_terms),
        "mc" => mc_suite(cfg),
        "cumulant" => cumulant_suite(cfg.seed, cfg.cap_terms),
        "freeness" => freeness_suite(cfg.seed, cfg.cap_terms),
        other => Err(Error::invalid(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn linear_product(roots: &[i64]) -> Poly {
    roots
        .iter()
        .fold(Poly::constant(BigInt::one()), |acc, &r| &acc * &Poly::linear(r))
}

/// `2N^6 / ((N+1)(N+2)(N+6)(N-1)(N-2)(N-3))` built from its factors.
pub fn expected_wg31() -> PolyFrac {
    let num = &Poly::monomial(6) * &Poly::constant(BigInt::from(2));
    PolyFrac::new(num, linear_product(&[-1, -2, -6, 1, 2, 3])).expect("nonzero denominator")
}

pub fn weingarten_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let wg31 = wg_of(&YoungDiagram::new(vec![3, 1]), DEFAULT_WG_CAP)?;
    checks.push(check(
        "wg([3,1]) closed form",
        wg31 == expected_wg31(),
        json!({ "generated": wg31.to_string(), "expected": expected_wg31().to_string() }),
    ));
    for n in [2, 4, 6, 8] {
        let t = weingarten_table(n)?;
        let ok = verify_gram_inverse(&t, true)?;
        checks.push(check(format!("G·W = I, n = {n}"), ok, json!({ "columns": "all" })));
    }
    Ok(SuiteReport::new("weingarten", checks))
}

/// Partitions of `k` as Young diagrams.
fn diagrams_of(k: usize) -> Vec<YoungDiagram> {
    crate::setpart::young_diagrams(k)
}

pub fn leading_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for k in 1..=4 {
        for lambda in diagrams_of(k) {
            let wg = wg_of(&lambda, DEFAULT_WG_CAP)?;
            let sign = if (k - lambda.row_count()) % 2 == 0 { 1 } else { -1 };
            let expect: BigInt = lambda
                .rows()
                .iter()
                .map(|&r| catalan(r - 1))
                .product::<BigInt>()
                * sign;
            let lim = wg.limit();
            let ok = lim == Some(BigRational::from_integer(expect.clone()));
            checks.push(check(
                format!("lim wg({lambda})"),
                ok,
                json!({
                    "limit": lim.map(|l| format_rational(&l)),
                    "expected": expect.to_string(),
                }),
            ));
        }
    }
    Ok(SuiteReport::new("leading", checks))
}

fn long_cycle(n: usize) -> SignedPermutation {
    let c: Vec<i32> = (1..=n as i32).collect();
    SignedPermutation::from_cycles(Some(&IndexSet::range(n)), &[c]).expect("cycle")
}

fn two_cycles(p: usize, q: usize) -> SignedPermutation {
    let a: Vec<i32> = (1..=p as i32).collect();
    let b: Vec<i32> = (p as i32 + 1..=(p + q) as i32).collect();
    SignedPermutation::from_cycles(Some(&IndexSet::range(p + q)), &[a, b]).expect("cycles")
}

/// Biane: definitional disc-noncrossing vs the cycle-count criterion over
/// all of `S_n`. Returns (cases, counterexamples).
pub fn biane_exhaustive(n: usize) -> Result<(usize, Vec<String>)> {
    let phi = long_cycle(n);
    let perms = all_permutations(phi.domain());
    let bad = par_map_range(perms.len(), |i| {
        let a = &perms[i];
        match (is_disc_noncrossing(&phi, a), biane_criterion(&phi, a)) {
            (Ok(x), Ok(y)) if x == y => None,
            (x, y) => Some(format!("{phi} / {a}: {x:?} vs {y:?}")),
        }
    });
    Ok((perms.len(), bad.into_iter().flatten().collect()))
}

/// Mingo–Nica on the annulus with cycles of sizes `p` and `q`, over all
/// connecting permutations.
pub fn mingo_nica_exhaustive(p: usize, q: usize) -> Result<(usize, Vec<String>)> {
    let frame = AnnularFrame::new(two_cycles(p, q))?;
    let perms = all_permutations(frame.phi().domain());
    let res = par_map_range(perms.len(), |i| {
        let a = &perms[i];
        match connects_frame(&frame, a) {
            Ok(false) => (0, None),
            Ok(true) => match (is_annular_noncrossing(&frame, a), mingo_nica_criterion(&frame, a)) {
                (Ok(x), Ok(y)) if x == y => (1, None),
                (x, y) => (1, Some(format!("{} / {a}: {x:?} vs {y:?}", frame.phi()))),
            },
            Err(e) => (1, Some(format!("{a}: {e}"))),
        }
    });
    let cases = res.iter().map(|r| r.0).sum();
    Ok((cases, res.into_iter().filter_map(|r| r.1).collect()))
}

/// Unoriented disc: the premap predicate vs `χ = 2`.
pub fn premap_disc_exhaustive(n: usize) -> Result<(usize, Vec<String>)> {
    let phi = long_cycle(n);
    let mut bad = Vec::new();
    let all = enumerate_premaps(phi.domain(), DEFAULT_WG_CAP)?;
    for a in &all {
        let chi = euler_characteristic(&phi, a)?;
        if premap_chi2_disc(&phi, a)? != (chi == 2) {
            bad.push(format!("{phi} / {a}: χ = {chi}"));
        }
    }
    Ok((all.len(), bad))
}

/// Unoriented annulus: the premap predicate vs `χ = 2` over premaps
/// connecting the two cycles.
pub fn premap_annulus_exhaustive(p: usize, q: usize) -> Result<(usize, Vec<String>)> {
    let phi = two_cycles(p, q);
    let v1 = IndexSet::new((1..=p as i32).flat_map(|k| [k, -k]))?;
    let v2 = IndexSet::new((p as i32 + 1..=(p + q) as i32).flat_map(|k| [k, -k]))?;
    let mut bad = Vec::new();
    let mut cases = 0;
    for a in enumerate_premaps(phi.domain(), DEFAULT_WG_CAP)? {
        if !a.as_perm().connects(&v1, &v2) {
            continue;
        }
        cases += 1;
        let chi = euler_characteristic(&phi, &a)?;
        if premap_chi2_annular(&phi, &a)? != (chi == 2) {
            bad.push(format!("{phi} / {a}: χ = {chi}"));
        }
    }
    Ok((cases, bad))
}

pub fn noncross_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut push = |name: String, r: (usize, Vec<String>)| {
        checks.push(check(
            name,
            r.1.is_empty(),
            json!({ "instances": r.0, "agreements": r.0 - r.1.len(), "counterexamples": r.1 }),
        ));
    };
    for n in 1..=6 {
        push(format!("Biane, n = {n}"), biane_exhaustive(n)?);
    }
    for (p, q) in (2..=3).flat_map(|p| (p..=7 - p).map(move |q| (p, q))) {
        push(format!("Mingo–Nica, ({p},{q})"), mingo_nica_exhaustive(p, q)?);
    }
    for n in 1..=4 {
        push(format!("unoriented disc, |I| = {n}"), premap_disc_exhaustive(n)?);
    }
    for (p, q) in [(2, 2), (3, 2)] {
        push(format!("unoriented annulus, ({p},{q})"), premap_annulus_exhaustive(p, q)?);
    }
    Ok(SuiteReport::new("noncross", checks))
}

/// Rows from the cycles of `π₊π₋`, which come in pairs of equal length.
fn young_from_product(plus: &Pairing, minus: &Pairing) -> Result<YoungDiagram> {
    let dom = plus.ground().clone();
    let p = SignedPermutation::from_fn(&dom, |k| plus.partner(k).unwrap_or(k))?;
    let m = SignedPermutation::from_fn(&dom, |k| minus.partner(k).unwrap_or(k))?;
    let mut lens: Vec<usize> = p.compose(&m)?.cycles().iter().map(|c| c.len()).collect();
    lens.sort_unstable();
    if lens.len() % 2 == 1 || lens.chunks(2).any(|c| c[0] != c[1]) {
        return Err(Error::invalid("cycles of π₊π₋ are not paired"));
    }
    Ok(YoungDiagram::new(lens.chunks(2).map(|c| c[0]).collect()))
}

pub fn loops_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let ground = IndexSet::range(6);
    let pairings: Vec<Pairing> = enumerate_pairings(&ground).collect();
    let mut cases = 0;
    let mut bad = Vec::new();
    for plus in &pairings {
        for minus in &pairings {
            cases += 1;
            let join = plus.partition().join(minus.partition())?;
            let a = join.half_block_young();
            let b = young_from_product(plus, minus)?;
            let alpha = pairings_to_premap(plus, minus)?;
            let c = alpha.young()?;
            let back = premap_to_pairings(&alpha)?;
            if a.as_ref() != Some(&b) || b != c || back != (plus.clone(), minus.clone()) || !alpha.is_alternating() {
                bad.push(format!("{:?} / {:?}", plus.pairs(), minus.pairs()));
            }
        }
    }
    let alt = enumerate_alt_premaps(&ground)?;
    let alt_ok = alt.len() == cases
        && alt.iter().all(|a| {
            premap_to_pairings(a)
                .and_then(|(p, m)| pairings_to_premap(&p, &m))
                .map(|b| &b == a)
                .unwrap_or(false)
        });
    checks.push(check(
        "three Young diagrams and round trip on [6]",
        bad.is_empty() && cases == 225,
        json!({ "cases": cases, "mismatches": bad }),
    ));
    checks.push(check(
        "alternating premaps biject with pairing pairs",
        alt_ok,
        json!({ "alternating_premaps": alt.len() }),
    ));

    let plus = Pairing::from_pairs(&[(1, 2), (3, 5), (4, 8), (6, 7)])?;
    let minus = Pairing::from_pairs(&[(1, 6), (2, 5), (3, 7), (4, 8)])?;
    let dom = IndexSet::range(8);
    let p = SignedPermutation::from_fn(&dom, |k| plus.partner(k).unwrap_or(k))?;
    let m = SignedPermutation::from_fn(&dom, |k| minus.partner(k).unwrap_or(k))?;
    let prod = p.compose(&m)?;
    let join = plus.partition().join(minus.partition())?;
    let alpha = pairings_to_premap(&plus, &minus)?;
    let lambda = alpha.young()?;
    let expect_alpha =
        SignedPermutation::from_cycles(None, &[vec![1, -2, 5, -3, 7, -6], vec![6, -7, 3, -5, 2, -1], vec![4, -8], vec![8, -4]])?;
    let ok = prod.to_string() == "(1,7,5)(2,3,6)(4)(8)"
        && join.to_string() == "{{1,2,3,5,6,7},{4,8}}"
        && lambda == YoungDiagram::new(vec![3, 1])
        && young_from_product(&plus, &minus)? == lambda
        && alpha.as_perm() == &expect_alpha;
    checks.push(check(
        "worked instance",
        ok,
        json!({
            "product": prod.to_string(),
            "join": join.to_string(),
            "premap": alpha.to_string(),
            "young": lambda.to_string(),
        }),
    ));
    Ok(SuiteReport::new("loops", checks))
}

/// A random expression with the given number of factors per colour,
/// split into up to three traces.
pub fn random_expression<R: Rng + ?Sized>(rng: &mut R, counts: &[usize], labels: i32) -> TraceExpression {
    let mut colors: Vec<u32> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| std::iter::repeat_n(c as u32 + 1, k))
        .collect();
    colors.shuffle(rng);
    let slots: Vec<Slot> = colors
        .iter()
        .map(|&c| {
            let eps = if rng.random_bool(0.5) { 1 } else { -1 };
            let slot = if rng.random_bool(0.2) {
                None
            } else {
                let l = rng.random_range(1..=labels);
                Some(if rng.random_bool(0.3) { -l } else { l })
            };
            Slot::new(c, eps, slot)
        })
        .collect();
    let n = slots.len();
    let pieces = rng.random_range(1..=n.min(3));
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(pieces - 1).collect();
    cuts.sort_unstable();
    let mut traces = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain([n]) {
        traces.push(slots[start..c].to_vec());
        start = c;
    }
    TraceExpression::new(traces).expect("nonempty traces")
}

pub fn random_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, labels: u32) -> MatrixSet<BigRational> {
    let mut set = MatrixSet::new(dim);
    for l in 1..=labels {
        set.insert(l, random_rational(dim, 3, 3, rng)).expect("matching dims");
    }
    set
}

/// Expansion vs brute force on `count` random expressions with at most
/// three factors per colour, plus ten with four, each at `N ∈ {2,3,4}`.
pub fn oracle_suite(seed: u64, count: usize, cap: usize) -> Result<SuiteReport> {
    let mut rng = sample_rng(seed, u64::MAX);
    let choices = [1usize, 2, 2, 2, 3];
    let mut exprs = Vec::new();
    for _ in 0..count {
        let colors = rng.random_range(1..=2);
        let counts: Vec<usize> = (0..colors).map(|_| *choices.choose(&mut rng).expect("nonempty")).collect();
        exprs.push(random_expression(&mut rng, &counts, 4));
    }
    for i in 0..10 {
        let counts = if i % 2 == 0 { vec![4] } else { vec![4, 2] };
        exprs.push(random_expression(&mut rng, &counts, 4));
    }
    let sets: Vec<MatrixSet<BigRational>> = [2usize, 3, 4].iter().map(|&d| random_set(&mut rng, d, 4)).collect();
    let results = par_map_range(exprs.len() * sets.len(), |i| {
        let (e, s) = (&exprs[i / sets.len()], &sets[i % sets.len()]);
        let a = moment_exact(e, s, cap);
        let b = brute_force_moment(e, s);
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => Ok(!a.is_zero()),
            (a, b) => Err(format!(
                "{} at N = {}: expansion {:?}, brute force {:?}",
                serde_json::to_string(e).unwrap_or_default(),
                s.dim,
                a.map(|v| format_rational(&v)),
                b.map(|v| format_rational(&v))
            )),
        }
    });
    let nonzero = results.iter().filter(|r| matches!(r, Ok(true))).count();
    let bad: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();
    Ok(SuiteReport::new(
        "oracle",
        vec![check(
            "expansion equals brute force",
            bad.is_empty(),
            json!({
                "expressions": exprs.len(),
                "evaluations": exprs.len() * sets.len(),
                "nonzero": nonzero,
                "discrepancies": bad,
            }),
        )],
    ))
}

fn slot(color: u32, eps: i8, label: i32) -> Slot {
    Slot::new(color, eps, if label == 0 { None } else { Some(label) })
}

/// `tr(O X_1 Oᵀ X_2)` and `tr(O X_1 O X_2)`.
pub fn two_point_expressions() -> (TraceExpression, TraceExpression) {
    (
        TraceExpression::single(vec![slot(1, 1, 1), slot(1, -1, 2)]).expect("valid"),
        TraceExpression::single(vec![slot(1, 1, 1), slot(1, 1, 2)]).expect("valid"),
    )
}

/// `tr(O X_1 O X_2 Oᵀ X_3) tr(O X_4 Oᵀ X_5 Oᵀ X_6 O X_7 O X_8)`.
pub fn example_expression() -> TraceExpression {
    TraceExpression::new(vec![
        vec![slot(1, 1, 1), slot(1, 1, 2), slot(1, -1, 3)],
        vec![slot(1, 1, 4), slot(1, -1, 5), slot(1, -1, 6), slot(1, 1, 7), slot(1, 1, 8)],
    ])
    .expect("valid")
}

pub fn closed_forms_suite(seed: u64, cap: usize) -> Result<SuiteReport> {
    let (e1, e2) = two_point_expressions();
    let mut checks = Vec::new();
    for n in [2usize, 5, 10] {
        let mut rng = sample_rng(seed, n as u64);
        let set = random_set(&mut rng, n, 2);
        let (x1, x2) = (set.get(1)?, set.get(2)?);
        let a = moment_exact(&e1, &set, cap)?;
        let a_expect = x1.normalized_trace() * x2.normalized_trace();
        checks.push(check(
            format!("E[tr(O X1 Oᵀ X2)] = tr X1 tr X2, N = {n}"),
            a == a_expect,
            json!({ "value": format_rational(&a), "expected": format_rational(&a_expect) }),
        ));
        let b = moment_exact(&e2, &set, cap)?;
        let b_expect = x1.mul(&x2.transpose())?.normalized_trace() / BigRational::from_integer(n.into());
        checks.push(check(
            format!("E[tr(O X1 O X2)] = tr(X1 X2ᵀ)/N, N = {n}"),
            b == b_expect,
            json!({ "value": format_rational(&b), "expected": format_rational(&b_expect) }),
        ));
    }
    Ok(SuiteReport::new("closed-forms", checks))
}

pub fn example_suite(cap: usize) -> Result<SuiteReport> {
    let e = example_expression();
    let exp = Expansion::with_cap(&e, cap)?;
    let plus = Pairing::from_pairs(&[(1, 2), (3, 5), (4, 8), (6, 7)])?;
    let minus = Pairing::from_pairs(&[(1, 6), (2, 5), (3, 7), (4, 8)])?;
    let target = pairings_to_premap(&plus, &minus)?;
    let terms = exp.terms()?;
    let found = terms.iter().find(|t| t.alpha == target);
    let expected = {
        let num = &Poly::monomial(1) * &Poly::constant(BigInt::from(2));
        PolyFrac::new(num, linear_product(&[-1, -2, -6, 1, 2, 3]))?
    };
    let expected_vertices = vec![vec![1, -3, 5], vec![2, 7, -8, 4], vec![6]];
    let mut checks = Vec::new();
    match found {
        None => checks.push(check("term present", false, json!(null))),
        Some(t) => {
            let contribution = &PolyFrac::power_of_n(t.exponent) * &t.wg;
            checks.push(check(
                "χ = -1 term",
                t.chi == -1
                    && contribution == expected
                    && t.vertices == expected_vertices
                    && t.young == vec![(1, YoungDiagram::new(vec![3, 1]))],
                json!({
                    "chi": t.chi,
                    "exponent": t.exponent,
                    "coefficient": contribution.to_string(),
                    "expected": expected.to_string(),
                    "k_inverse": t.k_inverse.to_string(),
                    "vertices": t.vertices,
                }),
            ));
        }
    }
    let phi = e.phi();
    let phi_blocks = phi.orbits();
    let mut bad = 0;
    for t in &terms {
        let bound = 2 * t.pi.join(&phi_blocks)?.block_count() as i64;
        let recomputed = euler_characteristic(&e.phi(), &t.alpha.sign_conjugate(&e.eps())?)?;
        if t.chi > bound || recomputed != t.chi || t.exponent != t.chi - 2 * e.trace_count() as i64 {
            bad += 1;
        }
    }
    checks.push(check(
        "exponent bookkeeping on every term",
        bad == 0,
        json!({ "terms": terms.len(), "violations": bad }),
    ));
    Ok(SuiteReport::new("example", checks))
}

fn mc_check(name: String, exact: f64, est: &crate::matrix::McEstimate) -> Check {
    let z = (est.mean - exact) / est.std_error;
    check(
        name,
        (est.mean - exact).abs() <= 5.0 * est.std_error,
        json!({
            "exact": exact,
            "mc_mean": est.mean,
            "mc_se": est.std_error,
            "z_score": z,
            "samples": est.samples,
            "seed": est.seed,
        }),
    )
}

/// Monte Carlo against the exact expansion, plus `E[O_11²] = 1/N` at `N = 5`.
pub fn mc_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let cap = cfg.cap_terms;
    let mut checks = Vec::new();
    let n = cfg.mc_dim;
    let mut rng = sample_rng(cfg.seed, u64::MAX - 1);
    let set = random_set(&mut rng, n, 8);
    let fset = set.to_f64();
    let (e1, e2) = two_point_expressions();
    for (name, e) in [
        ("E[tr(O X1 Oᵀ X2)]", e1),
        ("E[tr(O X1 O X2)]", e2),
        ("example moment", example_expression()),
    ] {
        let exact = moment_exact(&e, &set, cap)?;
        let est = mc_moment(&e, &fset, cfg.samples, cfg.seed)?;
        checks.push(mc_check(
            format!("{name}, N = {n}"),
            exact.to_f64().unwrap_or(f64::NAN),
            &est,
        ));
    }
    let dim = 5;
    let vals = par_map_range(cfg.samples, |i| {
        let o = haar_orthogonal(dim, &mut sample_rng(cfg.seed, i as u64));
        o.get(0, 0) * o.get(0, 0)
    });
    let (mean, se) = mean_and_se(&vals);
    checks.push(mc_check(
        format!("E[O11²] = 1/N, N = {dim}"),
        1.0 / dim as f64,
        &crate::matrix::McEstimate {
            mean,
            std_error: se,
            samples: cfg.samples,
            seed: cfg.seed,
            generator: GENERATOR.into(),
        },
    ));
    Ok(SuiteReport::new("mc", checks))
}

/// `k_r` by the Möbius combination of joint moments of the `Tr` values.
pub fn cumulant_by_moments(traces: &[TraceExpression], set: &MatrixSet<BigRational>, cap: usize) -> Result<BigRational> {
    let r = traces.len();
    let ground = IndexSet::range(r);
    let top = SetPartition::coarsest(&ground);
    let n = BigRational::from_integer(set.dim.into());
    let mut memo: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();
    let mut joint = |block: &[i32]| -> Result<BigRational> {
        if let Some(v) = memo.get(block) {
            return Ok(v.clone());
        }
        let e = TraceExpression::new(block.iter().flat_map(|&i| traces[i as usize - 1].traces.clone()).collect())?;
        let v = moment_exact(&e, set, cap)? * num_traits::pow(n.clone(), block.len());
        memo.insert(block.to_vec(), v.clone());
        Ok(v)
    };
    let mut acc = BigRational::zero();
    for p in enumerate_partitions(&ground)? {
        let mu = mobius(&p, &top)?;
        let mut prod = BigRational::from_integer(mu);
        for b in p.blocks() {
            prod *= joint(&b)?;
        }
        acc += prod;
    }
    Ok(acc)
}

/// Single-trace families for the cumulant checks.
pub fn cumulant_families() -> Vec<Vec<TraceExpression>> {
    let t = |slots: Vec<Slot>| TraceExpression::single(slots).expect("valid");
    vec![
        vec![t(vec![slot(1, 1, 1), slot(1, -1, 2)])],
        vec![t(vec![slot(1, 1, 1), slot(1, -1, 2)]), t(vec![slot(1, 1, 3), slot(1, -1, 4)])],
        vec![t(vec![slot(1, 1, 1), slot(1, 1, 2), slot(1, -1, 3)]), t(vec![slot(1, -1, 4)])],
        vec![t(vec![slot(1, 1, 1), slot(2, 1, 2)]), t(vec![slot(1, -1, 3), slot(2, -1, -4)])],
        vec![t(vec![slot(1, 1, 1)]), t(vec![slot(1, 1, 2)]), t(vec![slot(1, -1, 3), slot(1, 1, 4)])],
        vec![
            t(vec![slot(1, 1, 1), slot(1, 1, 2), slot(1, -1, 3)]),
            t(vec![slot(1, 1, 4), slot(1, -1, -1), slot(1, 1, 0)]),
        ],
        vec![
            t(vec![slot(1, 1, 1), slot(1, -1, 2)]),
            t(vec![slot(1, 1, 3), slot(2, -1, 4)]),
            t(vec![slot(2, 1, -1), slot(1, 1, 2)]),
        ],
        vec![
            t(vec![slot(1, 1, 1), slot(1, 1, 2)]),
            t(vec![slot(1, -1, 3), slot(1, 1, 4)]),
            t(vec![slot(1, -1, -2), slot(1, -1, 0)]),
        ],
    ]
}

/// Every `(π, ρ, σ)` with `π` all-even on `[n]`: returns (triples, violations).
pub fn cumulant_degree_bound(n: usize) -> Result<(usize, Vec<String>)> {
    let ground = IndexSet::range(n);
    let top = SetPartition::coarsest(&ground);
    let mut count = 0;
    let mut bad = Vec::new();
    for pi in enumerate_partitions(&ground)? {
        if pi.half_block_young().is_none() {
            continue;
        }
        for rho in interval(&pi, &top)? {
            for sigma in interval(&rho, &top)? {
                count += 1;
                let c = wg_cumulant(&pi, &rho, &sigma)?;
                if !c.order_check() {
                    bad.push(format!("{pi} {rho} {sigma}: {}", c.value));
                }
            }
        }
    }
    Ok((count, bad))
}

pub fn cumulant_suite(seed: u64, cap: usize) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (i, fam) in cumulant_families().iter().enumerate() {
        let combined = combine_single_traces(fam)?;
        for n in [4usize, 5] {
            let mut rng = sample_rng(seed, 1000 + i as u64 * 10 + n as u64);
            let set = random_set(&mut rng, n, 4);
            let traces = MatrixTraces::new(&combined, &set)?;
            let k = trace_cumulant(
                &combined,
                &DeterministicOracle { traces: &traces },
                &Exact(n as i64),
                cap,
            )?;
            let m = cumulant_by_moments(fam, &set, cap)?;
            checks.push(check(
                format!("k_{} family {i}, N = {n}", fam.len()),
                k == m,
                json!({
                    "n": combined.n(),
                    "cumulant": format_rational(&k),
                    "moments": format_rational(&m),
                }),
            ));
        }
    }
    for n in [4, 6] {
        let (count, bad) = cumulant_degree_bound(n)?;
        checks.push(check(
            format!("Weingarten cumulant degree bound, n = {n}"),
            bad.is_empty(),
            json!({ "triples": count, "violations": bad }),
        ));
    }
    Ok(SuiteReport::new("cumulant", checks))
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn block(a: [[i64; 2]; 2], d: i64) -> DenseMatrix<BigRational> {
    DenseMatrix::from_fn(2, |i, j| q(a[i][j], d))
}

/// Traceless `2×2` blocks used through `X = I_{N/2} ⊗ B`.
pub fn freeness_blocks() -> MatrixSet<BigRational> {
    let mut set = MatrixSet::new(2);
    let blocks = [
        block([[1, 2], [3, -1]], 1),
        block([[2, -1], [1, -2]], 2),
        block([[0, 3], [-1, 0]], 1),
        block([[3, 1], [2, -3]], 3),
        block([[-1, 1], [4, 1]], 2),
        block([[2, 5], [1, -2]], 1),
    ];
    for (i, b) in blocks.into_iter().enumerate() {
        set.insert(i as u32 + 1, b).expect("2x2");
    }
    set
}

/// `count` random centred `2×2` blocks.
pub fn random_blocks(seed: u64, count: u32) -> MatrixSet<BigRational> {
    let mut rng = sample_rng(seed, u64::MAX - 2);
    let mut set = MatrixSet::new(2);
    for l in 1..=count {
        set.insert(l, random_rational(2, 4, 3, &mut rng).centered()).expect("2x2");
    }
    set
}

/// `I_{N/2} ⊗ B` for every block.
pub fn inflate(blocks: &MatrixSet<BigRational>, n: usize) -> Result<MatrixSet<BigRational>> {
    if !n.is_multiple_of(blocks.dim) {
        return Err(Error::Dimension(format!("{n} is not a multiple of {}", blocks.dim)));
    }
    let id = DenseMatrix::identity(n / blocks.dim);
    let mut out = MatrixSet::new(n);
    for (&l, b) in &blocks.matrices {
        out.insert(l, id.kron(b))?;
    }
    Ok(out)
}

fn lift(v: &BigRational) -> PolyFrac {
    PolyFrac::from_rational(v)
}

/// First-order moments of the centred alternating word with colours
/// `colors`: exact values at each `N`, consecutive ratios, and the exact
/// rational function of `N`.
#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderDecay {
    pub colors: Vec<u32>,
    pub values: Vec<(usize, String)>,
    pub ratios: Vec<f64>,
    pub symbolic: String,
    pub order: Option<i64>,
    pub colour_lemma: bool,
}

impl FirstOrderDecay {
    pub fn ratios_in_window(&self) -> bool {
        self.ratios.len() + 1 == self.values.len() && self.ratios.iter().all(|r| (0.3..=0.7).contains(r))
    }
}

pub fn first_order_decay(colors: &[u32], dims: &[usize], cap: usize) -> Result<FirstOrderDecay> {
    first_order_decay_with(&freeness_blocks(), colors, dims, cap)
}

pub fn first_order_decay_with(
    blocks: &MatrixSet<BigRational>,
    colors: &[u32],
    dims: &[usize],
    cap: usize,
) -> Result<FirstOrderDecay> {
    let labels: Vec<i32> = (1..=colors.len() as i32).collect();
    let e = TraceExpression::single(TraceExpression::conjugated_word(colors, &labels))?;
    let lemma = Expansion::with_cap(&e, cap)?.terms()?.iter().all(|t| colour_lemma_holds(&e, t));
    let block_traces = MatrixTraces::converted(&e, blocks, lift)?;
    let symbolic = crate::expansion::evaluate_moment(&e, &block_traces, &Symbolic, cap)?;
    let mut values = Vec::new();
    for &n in dims {
        let v = moment_exact(&e, &inflate(blocks, n)?, cap)?;
        if v != symbolic.eval(&BigInt::from(n))? {
            return Err(Error::invalid(format!("symbolic and exact moments differ at N = {n}")));
        }
        values.push((n, v));
    }
    let ratios = values
        .windows(2)
        .filter(|w| !w[0].1.is_zero())
        .map(|w| (&w[1].1 / &w[0].1).to_f64().unwrap_or(f64::NAN))
        .collect();
    Ok(FirstOrderDecay {
        colors: colors.to_vec(),
        values: values.into_iter().map(|(n, v)| (n, format_rational(&v))).collect(),
        ratios,
        symbolic: symbolic.to_string(),
        order: symbolic.order(),
        colour_lemma: lemma,
    })
}

/// `lim E[tr(a b)]` for `a = O_vᵀ X O_v`, `b = O_wᵀ Y O_w` (`Y` transposed
/// for a negative label), from the asymptotic functional.
fn first_order_pair(v: u32, x: i32, w: u32, y: i32, blocks: &MatrixSet<BigRational>, cap: usize) -> Result<BigRational> {
    let e = TraceExpression::single([
        TraceExpression::conjugated_word(&[v], &[x]),
        TraceExpression::conjugated_word(&[w], &[y]),
    ]
    .concat())?;
    let lim = asymptotic_moment(&e, cap)?;
    lim.evaluate(&MatrixTraces::new(&e, blocks)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpokeComparison {
    pub p: usize,
    pub q: usize,
    pub k2: String,
    pub interpolated: String,
    pub limit: Option<String>,
    pub predicted: String,
    pub exact_checks: Vec<(usize, String)>,
    pub colour_lemma: bool,
}

impl SpokeComparison {
    pub fn matches(&self) -> bool {
        self.limit.as_deref() == Some(self.predicted.as_str()) && self.interpolated == self.k2 && self.colour_lemma
    }
}

/// `lim k_2(Tr(a_1⋯a_p), Tr(b_1⋯b_q))` for cyclically alternating words in
/// two colours, computed as an exact rational function of `N` and
/// compared with the spoke formula.
pub fn spoke_comparison(p: usize, q: usize, dims: &[usize], cap: usize) -> Result<SpokeComparison> {
    let v: Vec<u32> = (0..p).map(|i| i as u32 % 2 + 1).collect();
    let w: Vec<u32> = (0..q).map(|i| i as u32 % 2 + 1).collect();
    let xl: Vec<i32> = (1..=p as i32).collect();
    let yl: Vec<i32> = (p as i32 + 1..=(p + q) as i32).collect();
    let blocks = freeness_blocks();
    if p + q > blocks.matrices.len() {
        return Err(Error::invalid("not enough test blocks"));
    }
    let y1 = TraceExpression::single(TraceExpression::conjugated_word(&v, &xl))?;
    let y2 = TraceExpression::single(TraceExpression::conjugated_word(&w, &yl))?;
    let both = combine_single_traces(&[y1, y2])?;
    let lemma = Expansion::with_cap(&both, cap)?.terms()?.iter().all(|t| colour_lemma_holds(&both, t));

    let traces = MatrixTraces::converted(&both, &blocks, lift)?;
    let k2 = trace_cumulant(&both, &DeterministicOracle { traces: &traces }, &Symbolic, cap)?;
    let mut exact_checks = Vec::new();
    let mut nodes = Vec::new();
    for &n in dims {
        let set = inflate(&blocks, n)?;
        let tr = MatrixTraces::new(&both, &set)?;
        let v = trace_cumulant(&both, &DeterministicOracle { traces: &tr }, &Exact(n as i64), cap)?;
        if v != k2.eval(&BigInt::from(n))? {
            return Err(Error::invalid(format!("symbolic and exact k2 differ at N = {n}")));
        }
        exact_checks.push((n, format_rational(&v)));
        nodes.push((BigInt::from(n), v));
    }
    let den_deg = (dims.len() - 1) / 2;
    // the zero function has no unique monic denominator
    let interpolated = if nodes.iter().all(|(_, v)| v.is_zero()) {
        PolyFrac::from_int(0)
    } else {
        rational_interpolate(&nodes, dims.len() - 1 - den_deg, den_deg)?
    };

    let mut ab = vec![vec![BigRational::zero(); q]; p];
    let mut abt = vec![vec![BigRational::zero(); q]; p];
    for i in 0..p {
        for j in 0..q {
            ab[i][j] = first_order_pair(v[i], xl[i], w[j], yl[j], &blocks, cap)?;
            abt[i][j] = first_order_pair(v[i], xl[i], w[j], -yl[j], &blocks, cap)?;
        }
    }
    let predicted = predicted_second_order_cov(&ab, &abt);
    Ok(SpokeComparison {
        p,
        q,
        k2: k2.to_string(),
        interpolated: interpolated.to_string(),
        limit: interpolated.limit().map(|l| format_rational(&l)),
        predicted: format_rational(&predicted),
        exact_checks,
        colour_lemma: lemma,
    })
}

pub const DECAY_DIMS: [usize; 3] = [8, 16, 32];
pub const SPOKE_DIMS: [usize; 5] = [4, 6, 8, 10, 12];

pub const DECAY_BATTERY: u64 = 20;

pub fn freeness_suite(seed: u64, cap: usize) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for colors in [vec![1, 2], vec![1, 2, 1]] {
        let d = first_order_decay(&colors, &DECAY_DIMS, cap)?;
        let zero = d.values.iter().all(|(_, v)| v == "0");
        checks.push(check(
            format!("first order vanishes identically, word {colors:?}"),
            zero && d.colour_lemma,
            serde_json::to_value(&d)?,
        ));
    }
    let mut decays = vec![first_order_decay(&[1, 2, 1, 2], &DECAY_DIMS, cap)?];
    for i in 0..DECAY_BATTERY {
        decays.push(first_order_decay_with(
            &random_blocks(seed.wrapping_add(i), 4),
            &[1, 2, 1, 2],
            &DECAY_DIMS,
            cap,
        )?);
    }
    let order_ok = decays
        .iter()
        .all(|d| d.colour_lemma && d.order.is_none_or(|o| o <= -1));
    let in_window = decays.iter().filter(|d| d.ratios_in_window()).count();
    let detail: Vec<serde_json::Value> = decays
        .iter()
        .map(|d| json!({ "symbolic": d.symbolic, "order": d.order, "ratios": d.ratios }))
        .collect();
    checks.push(check(
        "first order is O(1/N) exactly, word [1, 2, 1, 2]",
        order_ok,
        json!({ "inputs": decays.len(), "moments": detail }),
    ));
    checks.push(check(
        format!("first-order ratio per doubling in [0.3, 0.7], N = {DECAY_DIMS:?}"),
        in_window == decays.len(),
        json!({
            "inputs": decays.len(),
            "in_window": in_window,
            "outside": decays
                .iter()
                .filter(|d| !d.ratios_in_window())
                .map(|d| json!({ "symbolic": d.symbolic, "ratios": d.ratios }))
                .collect::<Vec<_>>(),
        }),
    ));
    let single = spoke_comparison(1, 1, &SPOKE_DIMS, cap)?;
    checks.push(check(
        "second-order covariance of single letters vanishes, p = 1, q = 1",
        single.k2 == "0" && single.interpolated == "0" && single.colour_lemma,
        serde_json::to_value(&single)?,
    ));
    for (p, q) in [(2, 2), (2, 4)] {
        let s = spoke_comparison(p, q, &SPOKE_DIMS, cap)?;
        let ok = s.matches() && (p == q || s.limit.as_deref() == Some("0"));
        checks.push(check(
            format!("second-order spokes, p = {p}, q = {q}"),
            ok,
            serde_json::to_value(&s)?,
        ));
    }
    Ok(SuiteReport::new("freeness", checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_are_traceless() {
        for m in freeness_blocks().matrices.values() {
            assert!(m.trace().is_zero());
        }
        let big = inflate(&freeness_blocks(), 6).unwrap();
        assert_eq!(big.dim, 6);
        assert!(inflate(&freeness_blocks(), 5).is_err());
    }

    #[test]
    fn young_from_product_example() {
        let plus = Pairing::from_pairs(&[(1, 2), (3, 4)]).unwrap();
        let minus = Pairing::from_pairs(&[(1, 3), (2, 4)]).unwrap();
        assert_eq!(young_from_product(&plus, &minus).unwrap(), YoungDiagram::new(vec![2]));
    }

    #[test]
    fn random_expressions_respect_counts() {
        let mut rng = sample_rng(1, 1);
        for _ in 0..20 {
            let e = random_expression(&mut rng, &[3, 2], 4);
            let by = e.positions_by_color();
            assert_eq!(by[&1].len(), 3);
            assert_eq!(by[&2].len(), 2);
            assert!(e.trace_count() <= 3);
        }
    }
}
