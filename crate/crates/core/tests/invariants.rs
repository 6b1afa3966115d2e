use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;

use orthowg::expansion::{moment_exact, DEFAULT_TERM_CAP};
use orthowg::expr::{MatrixSet, Slot, TraceExpression};
use orthowg::matrix::{
    brute_force_moment, canonical_word, haar_orthogonal, mc_moment, mean_and_se, random_rational, sample_rng,
    word_product, DenseMatrix,
};
use orthowg::noncross::biane_criterion;
use orthowg::perm::{all_permutations, SignedPermutation};
use orthowg::poly::{rational_interpolate, Poly, PolyFrac};
use orthowg::setpart::{enumerate_pairings, IndexSet, Pairing};
use orthowg::verify::{random_expression, random_set};
use orthowg::weingarten::{catalan, verify_at, weingarten_table};

/// `E[Π O_{i_k j_k}]` from the pairing sum with the Weingarten table.
fn entry_moment(rows: &[usize], cols: &[usize], n: i64) -> BigRational {
    let ground = IndexSet::range(rows.len());
    let table = weingarten_table(rows.len()).unwrap();
    let pairings: Vec<Pairing> = enumerate_pairings(&ground).collect();
    let respects = |p: &Pairing, idx: &[usize]| p.pairs().iter().all(|&(a, b)| idx[a as usize - 1] == idx[b as usize - 1]);
    let mut acc = BigRational::from_integer(0.into());
    for p in pairings.iter().filter(|p| respects(p, rows)) {
        for q in pairings.iter().filter(|q| respects(q, cols)) {
            acc += table.wg_pairings(p, q).unwrap().eval_i64(n).unwrap();
        }
    }
    acc
}

fn sampled_entry_moment(rows: &[usize], cols: &[usize], n: usize, samples: usize, seed: u64) -> (f64, f64) {
    let vals: Vec<f64> = (0..samples)
        .map(|i| {
            let o = haar_orthogonal(n, &mut sample_rng(seed, i as u64));
            rows.iter().zip(cols).map(|(&r, &c)| *o.get(r - 1, c - 1)).product()
        })
        .collect();
    mean_and_se(&vals)
}

#[test]
fn entry_moments_match_pairing_sums() {
    let n = 5;
    let n_big = BigInt::from(n);
    let four = entry_moment(&[1, 1, 1, 1], &[1, 1, 1, 1], n);
    let expect_four = PolyFrac::new(Poly::from_i64s(&[3]), Poly::from_i64s(&[0, 2, 1])).unwrap();
    assert_eq!(four, expect_four.eval(&n_big).unwrap());
    let mixed = entry_moment(&[1, 1, 2, 2], &[1, 1, 2, 2], n);
    let expect_mixed = PolyFrac::new(Poly::from_i64s(&[1, 1]), Poly::from_i64s(&[0, -2, 1, 1])).unwrap();
    assert_eq!(mixed, expect_mixed.eval(&n_big).unwrap());
    for (rows, cols, exact) in [
        (vec![1, 1], vec![1, 1], entry_moment(&[1, 1], &[1, 1], n)),
        (vec![1, 1, 1, 1], vec![1, 1, 1, 1], four),
        (vec![1, 1, 2, 2], vec![1, 1, 2, 2], mixed),
    ] {
        let (mean, se) = sampled_entry_moment(&rows, &cols, n as usize, 50_000, 3);
        let exact = exact.to_f64().unwrap();
        assert!((mean - exact).abs() <= 5.0 * se, "{rows:?}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn standard_error_shrinks_like_inverse_root() {
    let e = TraceExpression::single(vec![Slot::new(1, 1, Some(1)), Slot::new(1, -1, Some(2))]).unwrap();
    let mut rng = sample_rng(5, 0);
    let set = random_set(&mut rng, 4, 2).to_f64();
    let small = mc_moment(&e, &set, 5_000, 11).unwrap();
    let large = mc_moment(&e, &set, 20_000, 11).unwrap();
    let ratio = large.std_error / small.std_error;
    assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn left_translation_leaves_statistics_unchanged() {
    let n = 4;
    let q = haar_orthogonal(n, &mut sample_rng(99, 0));
    let mut rng = sample_rng(7, 7);
    let x = random_rational(n, 3, 2, &mut rng).map(|v| v.to_f64().unwrap());
    let y = random_rational(n, 3, 2, &mut rng).map(|v| v.to_f64().unwrap());
    let stat = |o: &DenseMatrix<f64>| {
        o.mul(&x).unwrap().mul(&o.transpose()).unwrap().mul(&y).unwrap().mul(o).unwrap().normalized_trace()
    };
    let samples = 20_000;
    let plain: Vec<f64> = (0..samples).map(|i| stat(&haar_orthogonal(n, &mut sample_rng(1, i)))).collect();
    let moved: Vec<f64> = (0..samples)
        .map(|i| stat(&q.mul(&haar_orthogonal(n, &mut sample_rng(2, i))).unwrap()))
        .collect();
    let (m1, s1) = mean_and_se(&plain);
    let (m2, s2) = mean_and_se(&moved);
    let z = (m1 - m2) / (s1 * s1 + s2 * s2).sqrt();
    assert!(z.abs() <= 5.0, "z = {z}");
}

#[test]
fn disc_noncrossing_count_is_catalan() {
    for n in 1..=7usize {
        let cycle: Vec<i32> = (1..=n as i32).collect();
        let phi = SignedPermutation::from_cycles(Some(&IndexSet::range(n)), &[cycle]).unwrap();
        let count = all_permutations(phi.domain())
            .iter()
            .filter(|a| biane_criterion(&phi, a).unwrap())
            .count();
        assert_eq!(BigInt::from(count), catalan(n), "n = {n}");
    }
}

#[test]
fn gram_identity_at_fixed_dimensions_for_ten_points() {
    let t = weingarten_table(10).unwrap();
    for n0 in [5, 6, 9, 13, 20] {
        assert!(verify_at(&t, n0).unwrap(), "N = {n0}");
    }
}

fn arb_word() -> impl Strategy<Value = Vec<(u32, bool)>> {
    proptest::collection::vec((1u32..=3, any::<bool>()), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_word_preserves_trace(word in arb_word(), seed in 0u64..1000) {
        let mut rng = sample_rng(seed, 0);
        let set = random_set(&mut rng, 3, 3);
        let a = word_product(&word, &set).unwrap().trace();
        let b = word_product(&canonical_word(&word), &set).unwrap().trace();
        prop_assert_eq!(a, b);
        let rotated: Vec<(u32, bool)> = word[1..].iter().chain(&word[..1]).copied().collect();
        prop_assert_eq!(canonical_word(&rotated), canonical_word(&word));
    }

    #[test]
    fn rational_product_matches_entrywise_sum(seed in 0u64..1000, dim in 1usize..5) {
        let mut rng = sample_rng(seed, 1);
        let a = random_rational(dim, 5, 4, &mut rng);
        let b = random_rational(dim, 5, 4, &mut rng);
        let c = a.mul(&b).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let mut s = BigRational::from_integer(0.into());
                for k in 0..dim {
                    s += a.get(i, k) * b.get(k, j);
                }
                prop_assert_eq!(c.get(i, j), &s);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_low_degree_functions(
        num in proptest::collection::vec(-6i64..=6, 1..3),
        roots in proptest::collection::vec(-3i64..=3, 0..3),
    ) {
        let den = roots.iter().fold(Poly::from_i64s(&[1]), |acc, &r| &acc * &Poly::linear(r));
        let f = PolyFrac::new(Poly::from_i64s(&num), den).unwrap();
        let pts: Vec<(BigInt, BigRational)> = [10, 12, 14, 16, 18]
            .iter()
            .map(|&n| (BigInt::from(n), f.eval(&BigInt::from(n)).unwrap()))
            .collect();
        match rational_interpolate(&pts, 2, 2) {
            Ok(g) => prop_assert_eq!(g, f),
            // (N - c) p / ((N - c) q) is a second solution exactly when both degrees are at most 1
            Err(_) => prop_assert!(
                f.numer().degree().unwrap_or(0) <= 1 && f.denom().degree().unwrap_or(0) <= 1
            ),
        }
    }

    #[test]
    fn expansion_equals_brute_force(seed in 0u64..10_000, dim in 2usize..=3) {
        let mut rng = sample_rng(seed, 2);
        let counts: Vec<usize> = (0..rng.random_range(1..=2)).map(|_| rng.random_range(1..=3)).collect();
        let e = random_expression(&mut rng, &counts, 3);
        let set: MatrixSet<BigRational> = random_set(&mut rng, dim, 3);
        prop_assert_eq!(moment_exact(&e, &set, DEFAULT_TERM_CAP).unwrap(), brute_force_moment(&e, &set).unwrap());
    }
}
