//! Genus expansion of `E[tr_φ(O^{ε(1)}X_1, …)]` and the cumulant formula for
//! traces in several independent Haar orthogonal matrices.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{chunks, par_map};
use crate::expr::{MatrixSet, TraceExpression};
use crate::matrix::{canonical_word, word_product, DenseMatrix};
use crate::perm::{euler_characteristic, k_inverse, EpsilonSigns, Premap, SignedPermutation};
use crate::poly::PolyFrac;
use crate::scalar::Scalar;
use crate::setpart::{
    enumerate_partitions_capped, interval, pairing_count, pairing_partners_by_index, IndexSet, SetPartition,
    UnionFind, YoungDiagram,
};
use crate::weingarten::{wg_cumulant_pi_pi_rho, wg_of, DEFAULT_WG_CAP};

pub const DEFAULT_TERM_CAP: usize = 2_000_000;
const CHUNK: usize = 256;

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn display_pairs<S: serde::Serializer>(v: &[(u32, YoungDiagram)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(v.len()))?;
    for (c, l) in v {
        m.serialize_entry(c, &l.to_string())?;
    }
    m.end()
}

/// One `α`-term of the expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionTerm {
    /// `α = Π_c α_c` before conjugation by `δ_ε`.
    pub alpha: Premap,
    #[serde(serialize_with = "display_pairs")]
    pub young: Vec<(u32, YoungDiagram)>,
    pub chi: i64,
    /// `χ(φ, δ_ε α δ_ε) - 2#(φ)`.
    pub exponent: i64,
    /// `Π_c wg(λ(α_c))`.
    #[serde(serialize_with = "display")]
    pub wg: PolyFrac,
    /// `K(φ, δ_ε α δ_ε)⁻¹`.
    pub k_inverse: Premap,
    /// Particular cycles of `K⁻¹`: the vertex traces.
    pub vertices: Vec<Vec<i32>>,
    /// `π₊ ∨ π₋` on `[n]`.
    #[serde(serialize_with = "display")]
    pub pi: SetPartition,
}

struct ColorBlock {
    color: u32,
    positions: Vec<i32>,
    pairings: u64,
}

/// Lazily indexed enumeration of the expansion terms, one per tuple of
/// pairing pairs `(π₊, π₋)_c`.
pub struct Expansion<'a> {
    expr: &'a TraceExpression,
    phi: SignedPermutation,
    eps: EpsilonSigns,
    blocks: Vec<ColorBlock>,
    total: usize,
    wg_cache: Mutex<HashMap<YoungDiagram, PolyFrac>>,
}

impl<'a> Expansion<'a> {
    pub fn new(expr: &'a TraceExpression) -> Result<Self> {
        Self::with_cap(expr, DEFAULT_TERM_CAP)
    }

    pub fn with_cap(expr: &'a TraceExpression, cap: usize) -> Result<Self> {
        let blocks: Vec<ColorBlock> = expr
            .positions_by_color()
            .into_iter()
            .map(|(color, positions)| ColorBlock {
                color,
                pairings: pairing_count(positions.len()),
                positions,
            })
            .collect();
        let mut total: u128 = 1;
        for b in &blocks {
            total = total.saturating_mul(b.pairings as u128 * b.pairings as u128);
        }
        if total > cap as u128 {
            return Err(Error::CapExceeded {
                what: "expansion terms",
                size: usize::try_from(total).unwrap_or(usize::MAX),
                cap,
            });
        }
        Ok(Expansion {
            expr,
            phi: expr.phi(),
            eps: expr.eps(),
            blocks,
            total: total as usize,
            wg_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn expression(&self) -> &TraceExpression {
        self.expr
    }

    pub fn phi(&self) -> &SignedPermutation {
        &self.phi
    }

    /// Number of terms; 0 when some colour occurs an odd number of times.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn wg(&self, lambda: &YoungDiagram) -> Result<PolyFrac> {
        if let Some(v) = self.wg_cache.lock().expect("wg cache").get(lambda) {
            return Ok(v.clone());
        }
        let v = wg_of(lambda, DEFAULT_WG_CAP)?;
        self.wg_cache.lock().expect("wg cache").insert(lambda.clone(), v.clone());
        Ok(v)
    }

    /// The term with the given index; the first colour's `π₊` varies fastest.
    pub fn term(&self, mut index: usize) -> Result<ExpansionTerm> {
        let n = self.expr.n();
        let mut plus = vec![0i32; n + 1];
        let mut minus = vec![0i32; n + 1];
        let mut young = Vec::with_capacity(self.blocks.len());
        let mut wg = PolyFrac::one();
        let mut uf = UnionFind::new(n);
        for b in &self.blocks {
            let p = b.pairings as usize;
            let ip = index % p;
            index /= p;
            let im = index % p;
            index /= p;
            let pp = pairing_partners_by_index(b.positions.len(), ip as u64);
            let pm = pairing_partners_by_index(b.positions.len(), im as u64);
            for (a, (&x, &y)) in pp.iter().zip(&pm).enumerate() {
                let k = b.positions[a];
                plus[k as usize] = b.positions[x];
                minus[k as usize] = b.positions[y];
                uf.union(k as usize - 1, b.positions[x] as usize - 1);
                uf.union(k as usize - 1, b.positions[y] as usize - 1);
            }
            let sizes = crate::weingarten::join_pairings(&pp, &pm).1;
            let lambda = YoungDiagram::new(sizes.into_iter().map(|s| s / 2).collect());
            wg = &wg * &self.wg(&lambda)?;
            young.push((b.color, lambda));
        }
        let dom = IndexSet::symmetric(&IndexSet::range(n))?;
        let alpha = Premap::new(SignedPermutation::from_fn(&dom, |k| {
            if k > 0 {
                -plus[k as usize]
            } else {
                minus[(-k) as usize]
            }
        })?)?;
        let conj = alpha.sign_conjugate(&self.eps)?;
        let chi = euler_characteristic(&self.phi, &conj)?;
        let kinv = k_inverse(&self.phi, &conj)?;
        let pi = SetPartition::from_labels(
            IndexSet::range(n),
            &uf.labels().iter().map(|&l| l as i64).collect::<Vec<_>>(),
        )?;
        Ok(ExpansionTerm {
            alpha,
            young,
            chi,
            exponent: chi - 2 * self.phi.cycle_count() as i64,
            wg,
            vertices: kinv.particular_cycles(),
            k_inverse: kinv,
            pi,
        })
    }

    /// All terms in enumeration order.
    pub fn terms(&self) -> Result<Vec<ExpansionTerm>> {
        self.map_terms(Ok)
    }

    /// `f` over all terms, computed chunk-wise in parallel, in order.
    pub fn map_terms<R: Send>(&self, f: impl Fn(ExpansionTerm) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
        let ranges = chunks(self.total, CHUNK);
        let parts = par_map(&ranges, |r| {
            r.clone()
                .map(|i| self.term(i).and_then(&f))
                .collect::<Result<Vec<R>>>()
        });
        let mut out = Vec::with_capacity(self.total);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    /// Sum of `f` over all terms: per-chunk ordered sums, then an ordered
    /// sum of the chunk totals.
    pub fn sum_terms<T: Scalar>(&self, f: impl Fn(&ExpansionTerm) -> Result<T> + Sync + Send) -> Result<T> {
        let ranges = chunks(self.total, CHUNK);
        let parts = par_map(&ranges, |r| {
            let vals = r
                .clone()
                .map(|i| self.term(i).and_then(|t| f(&t)))
                .collect::<Result<Vec<T>>>()?;
            Ok(T::sum_ordered(&vals))
        });
        let parts = parts.into_iter().collect::<Result<Vec<T>>>()?;
        Ok(T::sum_ordered(&parts))
    }
}

/// All terms of the expansion of `expr`.
pub fn expand_moment(expr: &TraceExpression, cap: usize) -> Result<Vec<ExpansionTerm>> {
    Expansion::with_cap(expr, cap)?.terms()
}

/// How `N^k` and Weingarten factors become values.
pub trait Evaluator: Sync {
    type Value: Scalar;

    fn n_pow(&self, k: i64) -> Self::Value;

    fn lift(&self, pf: &PolyFrac) -> Result<Self::Value>;
}

/// Exact rationals at a fixed dimension.
#[derive(Clone, Copy, Debug)]
pub struct Exact(pub i64);

/// Doubles at a fixed dimension; Weingarten factors are evaluated exactly
/// first.
#[derive(Clone, Copy, Debug)]
pub struct Float(pub i64);

/// Rational functions of `N`.
#[derive(Clone, Copy, Debug)]
pub struct Symbolic;

fn rational_pow(n: i64, k: i64) -> BigRational {
    let p = num_traits::pow(BigInt::from(n), k.unsigned_abs() as usize);
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

impl Evaluator for Exact {
    type Value = BigRational;

    fn n_pow(&self, k: i64) -> BigRational {
        rational_pow(self.0, k)
    }

    fn lift(&self, pf: &PolyFrac) -> Result<BigRational> {
        pf.eval(&BigInt::from(self.0))
    }
}

impl Evaluator for Float {
    type Value = f64;

    fn n_pow(&self, k: i64) -> f64 {
        (self.0 as f64).powi(k as i32)
    }

    fn lift(&self, pf: &PolyFrac) -> Result<f64> {
        Ok(<f64 as Scalar>::from_rational(&pf.eval(&BigInt::from(self.0))?))
    }
}

impl Evaluator for Symbolic {
    type Value = PolyFrac;

    fn n_pow(&self, k: i64) -> PolyFrac {
        PolyFrac::power_of_n(k)
    }

    fn lift(&self, pf: &PolyFrac) -> Result<PolyFrac> {
        Ok(pf.clone())
    }
}

/// Normalized traces `tr(X_{c_1} ⋯ X_{c_m})` along vertex cycles.
pub trait VertexTraces<T>: Sync {
    fn trace(&self, cycle: &[i32]) -> Result<T>;
}

/// Vertex traces computed from matrices, with the slot labels of an
/// expression. Values are converted by `convert`, which lets `I ⊗ B`
/// block inputs feed a symbolic evaluation.
pub struct MatrixTraces<'a, S, T> {
    expr: &'a TraceExpression,
    set: &'a MatrixSet<S>,
    convert: fn(&S) -> T,
    cache: Mutex<HashMap<Vec<(u32, bool)>, T>>,
}

impl<'a, S: Scalar> MatrixTraces<'a, S, S> {
    pub fn new(expr: &'a TraceExpression, set: &'a MatrixSet<S>) -> Result<Self> {
        Self::converted(expr, set, S::clone)
    }
}

impl<'a, S: Scalar, T: Scalar> MatrixTraces<'a, S, T> {
    pub fn converted(expr: &'a TraceExpression, set: &'a MatrixSet<S>, convert: fn(&S) -> T) -> Result<Self> {
        set.check_covers(expr)?;
        Ok(MatrixTraces {
            expr,
            set,
            convert,
            cache: Mutex::new(HashMap::new()),
        })
    }
}

impl<S: Scalar, T: Scalar> VertexTraces<T> for MatrixTraces<'_, S, T> {
    fn trace(&self, cycle: &[i32]) -> Result<T> {
        let word: Vec<(u32, bool)> = cycle.iter().filter_map(|&k| self.expr.resolve(k)).collect();
        let key = canonical_word(&word);
        if let Some(v) = self.cache.lock().expect("trace cache").get(&key) {
            return Ok(v.clone());
        }
        let m: DenseMatrix<S> = word_product(&key, self.set)?;
        let v = (self.convert)(&m.normalized_trace());
        self.cache.lock().expect("trace cache").insert(key, v.clone());
        Ok(v)
    }
}

/// `Σ_α N^{exponent} · wg · tr_{K⁻¹/2}(X)`.
pub fn evaluate_moment<E: Evaluator>(
    expr: &TraceExpression,
    traces: &dyn VertexTraces<E::Value>,
    ev: &E,
    cap: usize,
) -> Result<E::Value> {
    let exp = Expansion::with_cap(expr, cap)?;
    exp.sum_terms(|t| term_value(t, traces, ev))
}

fn term_value<E: Evaluator>(t: &ExpansionTerm, traces: &dyn VertexTraces<E::Value>, ev: &E) -> Result<E::Value> {
    let mut v = ev.n_pow(t.exponent) * ev.lift(&t.wg).map_err(|e| pole_context(e, t))?;
    for c in &t.vertices {
        if v.is_zero() {
            break;
        }
        v = v * traces.trace(c)?;
    }
    Ok(v)
}

fn pole_context(e: Error, t: &ExpansionTerm) -> Error {
    match e {
        Error::Pole { at, factor, .. } => {
            let lambdas: Vec<String> = t.young.iter().map(|(c, l)| format!("colour {c}: wg({l})")).collect();
            Error::Pole {
                at,
                factor,
                context: Some(lambdas.join(", ")),
            }
        }
        other => other,
    }
}

/// Exact moment with rational matrices at `N = set.dim`.
pub fn moment_exact(expr: &TraceExpression, set: &MatrixSet<BigRational>, cap: usize) -> Result<BigRational> {
    let traces = MatrixTraces::new(expr, set)?;
    evaluate_moment(expr, &traces, &Exact(set.dim as i64), cap)
}

pub fn moment_float(expr: &TraceExpression, set: &MatrixSet<f64>, cap: usize) -> Result<f64> {
    let traces = MatrixTraces::new(expr, set)?;
    evaluate_moment(expr, &traces, &Float(set.dim as i64), cap)
}

/// Normalized to unnormalized: `Tr_φ = N^{#(φ)} tr_φ`.
pub fn tr_to_tr_unnormalized<E: Evaluator>(value: E::Value, expr: &TraceExpression, ev: &E) -> E::Value {
    value * ev.n_pow(expr.trace_count() as i64)
}

/// A term of the limit functional.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticTerm {
    #[serde(serialize_with = "display")]
    pub coefficient: BigRational,
    pub vertices: Vec<Vec<i32>>,
}

/// `lim_{N→∞} E[tr_φ(...)]` as a combination of vertex trace patterns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticMoment {
    pub terms: Vec<AsymptoticTerm>,
}

impl AsymptoticMoment {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate<T: Scalar>(&self, traces: &dyn VertexTraces<T>) -> Result<T> {
        let mut vals = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut v = T::from_rational(&t.coefficient);
            for c in &t.vertices {
                v = v * traces.trace(c)?;
            }
            vals.push(v);
        }
        Ok(T::sum_ordered(&vals))
    }
}

/// Terms of exponent 0 with their Weingarten limits; identical patterns
/// are merged and zero coefficients dropped.
pub fn asymptotic_moment(expr: &TraceExpression, cap: usize) -> Result<AsymptoticMoment> {
    let exp = Expansion::with_cap(expr, cap)?;
    let parts = exp.map_terms(|t| {
        if t.exponent < 0 {
            return Ok(None);
        }
        debug_assert_eq!(t.exponent, 0);
        let lim = t
            .wg
            .limit()
            .ok_or_else(|| Error::invalid("Weingarten factor grows with N"))?;
        Ok(Some((t.vertices, lim)))
    })?;
    let mut merged: BTreeMap<Vec<Vec<i32>>, BigRational> = BTreeMap::new();
    for (v, c) in parts.into_iter().flatten() {
        *merged.entry(v).or_insert_with(BigRational::zero) += c;
    }
    Ok(AsymptoticMoment {
        terms: merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(vertices, coefficient)| AsymptoticTerm { coefficient, vertices })
            .collect(),
    })
}

/// Joint cumulants of the normalized vertex traces.
pub trait CumulantOracle<T>: Sync {
    /// `k_s(tr_{c_1}, …, tr_{c_s})`.
    fn cumulant(&self, cycles: &[&[i32]]) -> Result<T>;

    /// Only first-order cumulants are nonzero.
    fn is_deterministic(&self) -> bool {
        false
    }
}

/// Deterministic matrices: `k_1` is the trace, higher cumulants vanish.
pub struct DeterministicOracle<'a, T> {
    pub traces: &'a dyn VertexTraces<T>,
}

impl<T: Scalar> CumulantOracle<T> for DeterministicOracle<'_, T> {
    fn cumulant(&self, cycles: &[&[i32]]) -> Result<T> {
        match cycles {
            [c] => self.traces.trace(c),
            _ => Ok(T::zero()),
        }
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Concatenates single-trace expressions into one with `r` traces.
pub fn combine_single_traces(exprs: &[TraceExpression]) -> Result<TraceExpression> {
    if exprs.iter().any(|e| e.trace_count() != 1) {
        return Err(Error::invalid("cumulant arguments must be single traces"));
    }
    TraceExpression::new(exprs.iter().flat_map(|e| e.traces.clone()).collect())
}

/// `k_r(Tr Y_1, …, Tr Y_r)` for the traces of `expr`:
/// `Σ_α N^{χ-r} Σ_{ρ,τ: φ∨ρ∨τ_σ = 1} C_{π,π,ρ} k_τ(tr_{σ_1⁻¹}, …)`.
pub fn trace_cumulant<E: Evaluator>(
    expr: &TraceExpression,
    oracle: &dyn CumulantOracle<E::Value>,
    ev: &E,
    cap: usize,
) -> Result<E::Value> {
    let exp = Expansion::with_cap(expr, cap)?;
    let n = expr.n();
    let r = expr.trace_count() as i64;
    let ground = IndexSet::range(n);
    let phi_part = exp.phi().orbits();
    let kernel = expr.color_kernel();
    let one = SetPartition::coarsest(&ground);
    let c_cache: Mutex<HashMap<(SetPartition, SetPartition), PolyFrac>> = Mutex::new(HashMap::new());
    exp.sum_terms(|t| {
        let s = t.vertices.len();
        let taus: Vec<SetPartition> = if oracle.is_deterministic() {
            vec![SetPartition::finest(&IndexSet::range(s))]
        } else {
            enumerate_partitions_capped(&IndexSet::range(s), crate::setpart::DEFAULT_PARTITION_CAP)?.collect()
        };
        let mut vals = Vec::new();
        let nk = ev.n_pow(t.chi - r);
        for rho in interval(&t.pi, &kernel)? {
            let base = phi_part.join(&rho)?;
            let mut c_val: Option<E::Value> = None;
            for tau in &taus {
                let tau_sigma = induced_partition(&ground, &t.vertices, tau)?;
                if base.join(&tau_sigma)? != one {
                    continue;
                }
                if c_val.is_none() {
                    let key = (t.pi.clone(), rho.clone());
                    let cached = c_cache.lock().expect("cumulant cache").get(&key).cloned();
                    let c = match cached {
                        Some(c) => c,
                        None => {
                            let c = wg_cumulant_pi_pi_rho(&t.pi, &rho, DEFAULT_WG_CAP)?;
                            c_cache.lock().expect("cumulant cache").insert(key, c.clone());
                            c
                        }
                    };
                    c_val = Some(ev.lift(&c).map_err(|e| pole_context(e, t))?);
                }
                let mut v = nk.clone() * c_val.clone().expect("set above");
                for block in tau.blocks() {
                    if v.is_zero() {
                        break;
                    }
                    let cycles: Vec<&[i32]> = block.iter().map(|&b| t.vertices[b as usize - 1].as_slice()).collect();
                    v = v * oracle.cumulant(&cycles)?;
                }
                vals.push(v);
            }
        }
        Ok(E::Value::sum_ordered(&vals))
    })
}

/// `τ_σ`: the partition of `[n]` whose block for `V ∈ τ` collects `|k|`
/// over the cycles `σ_j`, `j ∈ V`.
pub fn induced_partition(ground: &IndexSet, cycles: &[Vec<i32>], tau: &SetPartition) -> Result<SetPartition> {
    let blocks: Vec<Vec<i32>> = tau
        .blocks()
        .iter()
        .map(|b| {
            b.iter()
                .flat_map(|&j| cycles[j as usize - 1].iter().map(|k| k.abs()))
                .collect()
        })
        .collect();
    SetPartition::from_blocks_on(ground, &blocks)
}

/// Second-order covariance predicted by the spoke diagrams:
/// `Σ_k Π_i φ(a_i b_{k-i}) + Σ_k Π_i φ(a_i b_{k+i}ᵗ)`, indices mod `p`.
/// `ab[i][j] = φ(a_{i+1} b_{j+1})`, `abt[i][j] = φ(a_{i+1} b_{j+1}ᵗ)`.
pub fn predicted_second_order_cov<T: Scalar>(ab: &[Vec<T>], abt: &[Vec<T>]) -> T {
    let p = ab.len();
    let q = ab.first().map(|r| r.len()).unwrap_or(0);
    if p != q || p == 0 {
        return T::zero();
    }
    let idx = |x: i64| ((x - 1).rem_euclid(p as i64)) as usize;
    let mut vals = Vec::with_capacity(2 * p);
    for k in 0..p as i64 {
        let mut prod = T::one();
        for i in 1..=p as i64 {
            prod = prod * ab[i as usize - 1][idx(k - i)].clone();
        }
        vals.push(prod);
    }
    for k in 0..p as i64 {
        let mut prod = T::one();
        for i in 1..=p as i64 {
            prod = prod * abt[i as usize - 1][idx(k + i)].clone();
        }
        vals.push(prod);
    }
    T::sum_ordered(&vals)
}

/// Replaces each matrix used by `expr` with `X - tr(X) I`.
pub fn center_slots<T: Scalar>(expr: &TraceExpression, set: &MatrixSet<T>) -> Result<MatrixSet<T>> {
    set.check_covers(expr)?;
    let mut out = set.clone();
    for l in expr.labels() {
        out.matrices.insert(l, set.get(l)?.centered());
    }
    Ok(out)
}

/// Whether `K⁻¹` keeps odd positions odd and preserves their colour.
pub fn colour_lemma_holds(expr: &TraceExpression, term: &ExpansionTerm) -> bool {
    let w = expr.word();
    term.k_inverse.domain().elements().iter().all(|&k| {
        if k % 2 == 0 {
            return true;
        }
        let j = term.k_inverse.apply(k);
        j % 2 != 0 && w[j.unsigned_abs() as usize - 1] == w[k.unsigned_abs() as usize - 1]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Slot;
    use crate::matrix::{brute_force_moment, random_rational, sample_rng};
    use crate::perm::pairings_to_premap;
    use crate::setpart::Pairing;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn s(color: u32, eps: i8, slot: i32) -> Slot {
        Slot::new(color, eps, if slot == 0 { None } else { Some(slot) })
    }

    fn random_set(dim: usize, labels: usize, seed: u64) -> MatrixSet<BigRational> {
        let mut rng = sample_rng(seed, 0);
        let mut set = MatrixSet::new(dim);
        for l in 1..=labels {
            set.insert(l as u32, random_rational(dim, 4, 3, &mut rng)).unwrap();
        }
        set
    }

    #[test]
    fn two_point_examples() {
        let e = TraceExpression::single(vec![s(1, 1, 1), s(1, -1, 2)]).unwrap();
        let terms = expand_moment(&e, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].exponent, 0);
        assert!(terms[0].wg.is_one());
        assert_eq!(terms[0].vertices, vec![vec![1], vec![2]]);

        let e2 = TraceExpression::single(vec![s(1, 1, 1), s(1, 1, 2)]).unwrap();
        let terms = expand_moment(&e2, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].exponent, -1);
        assert_eq!(terms[0].vertices, vec![vec![1, -2]]);

        for n in [2, 3, 5] {
            let set = random_set(n, 2, n as u64);
            let (x1, x2) = (set.get(1).unwrap(), set.get(2).unwrap());
            assert_eq!(
                moment_exact(&e, &set, DEFAULT_TERM_CAP).unwrap(),
                x1.normalized_trace() * x2.normalized_trace()
            );
            assert_eq!(
                moment_exact(&e2, &set, DEFAULT_TERM_CAP).unwrap(),
                x1.mul(&x2.transpose()).unwrap().normalized_trace() / q(n as i64, 1)
            );
        }
        let mut id = MatrixSet::new(4);
        id.insert(1, DenseMatrix::identity(4)).unwrap();
        id.insert(2, DenseMatrix::identity(4)).unwrap();
        assert_eq!(moment_exact(&e, &id, DEFAULT_TERM_CAP).unwrap(), q(1, 1));
        assert_eq!(moment_exact(&e2, &id, DEFAULT_TERM_CAP).unwrap(), q(1, 4));
        assert!(asymptotic_moment(&e2, DEFAULT_TERM_CAP).unwrap().is_zero());
        let a = asymptotic_moment(&e, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(a.terms.len(), 1);
        assert_eq!(a.terms[0].coefficient, q(1, 1));
    }

    fn example_expression() -> TraceExpression {
        TraceExpression::new(vec![
            vec![s(1, 1, 1), s(1, 1, 2), s(1, -1, 3)],
            vec![s(1, 1, 4), s(1, -1, 5), s(1, -1, 6), s(1, 1, 7), s(1, 1, 8)],
        ])
        .unwrap()
    }

    #[test]
    fn example_moment_term() {
        let e = example_expression();
        let exp = Expansion::new(&e).unwrap();
        assert_eq!(exp.len(), 105 * 105);
        let plus = Pairing::from_pairs(&[(1, 2), (3, 5), (4, 8), (6, 7)]).unwrap();
        let minus = Pairing::from_pairs(&[(1, 6), (2, 5), (3, 7), (4, 8)]).unwrap();
        let target = pairings_to_premap(&plus, &minus).unwrap();
        let terms = exp.terms().unwrap();
        let t = terms.iter().find(|t| t.alpha == target).unwrap();
        assert_eq!(t.chi, -1);
        assert_eq!(t.exponent, -5);
        assert_eq!(t.young, vec![(1, YoungDiagram::new(vec![3, 1]))]);
        assert_eq!(
            t.vertices,
            vec![vec![1, -3, 5], vec![2, 7, -8, 4], vec![6]]
        );
        let contribution = &PolyFrac::power_of_n(t.exponent) * &t.wg;
        assert_eq!(
            contribution.to_string(),
            "2*N/((N+1)*(N+2)*(N+6)*(N-1)*(N-2)*(N-3))"
        );
        // every generated term has a consistent χ
        for t in &terms {
            assert!(t.chi <= 2 * t.pi.join(&e.phi().orbits()).unwrap().block_count() as i64);
            assert_eq!(t.exponent, t.chi - 4);
        }
    }

    #[test]
    fn brute_force_agrees() {
        let cases = vec![
            vec![vec![s(1, 1, 1), s(1, -1, 2), s(1, 1, 3), s(1, -1, 4)]],
            vec![vec![s(1, 1, 1), s(1, 1, -2), s(2, -1, 3)], vec![s(2, 1, 1), s(1, -1, 0)]],
            vec![vec![s(1, -1, 2), s(2, 1, 1), s(1, 1, -1), s(2, 1, 0)]],
            vec![vec![s(1, 1, 1)], vec![s(1, 1, 2), s(1, -1, 1)], vec![s(1, -1, -2)]],
        ];
        for (i, traces) in cases.into_iter().enumerate() {
            let e = TraceExpression::new(traces).unwrap();
            for n in [2, 3] {
                let set = random_set(n, 4, 100 + i as u64);
                let a = moment_exact(&e, &set, DEFAULT_TERM_CAP).unwrap();
                let b = brute_force_moment(&e, &set).unwrap();
                assert_eq!(a, b, "case {i} at N = {n}");
            }
        }
    }

    #[test]
    fn cumulant_first_order_and_covariance() {
        let y1 = TraceExpression::single(vec![s(1, 1, 1), s(1, -1, 2)]).unwrap();
        let y2 = TraceExpression::single(vec![s(1, 1, 3), s(1, -1, 4)]).unwrap();
        let both = combine_single_traces(&[y1.clone(), y2.clone()]).unwrap();
        let set = random_set(4, 4, 9);
        let ev = Exact(4);
        let tr_both = MatrixTraces::new(&both, &set).unwrap();
        let oracle = DeterministicOracle { traces: &tr_both };
        let k2 = trace_cumulant(&both, &oracle, &ev, DEFAULT_TERM_CAP).unwrap();
        let m = |e: &TraceExpression| {
            let v = moment_exact(e, &set, DEFAULT_TERM_CAP).unwrap();
            tr_to_tr_unnormalized(v, e, &ev)
        };
        // Y2 uses labels 3, 4 through positions 3, 4 of the combined expression
        let y2_alone = TraceExpression::single(vec![s(1, 1, 3), s(1, -1, 4)]).unwrap();
        assert_eq!(k2, m(&both) - m(&y1) * m(&y2_alone));

        let tr1 = MatrixTraces::new(&y1, &set).unwrap();
        let k1 = trace_cumulant(&y1, &DeterministicOracle { traces: &tr1 }, &ev, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(k1, m(&y1));

        let z = TraceExpression::new(vec![
            vec![s(1, 1, 1), s(1, 1, 2)],
            vec![s(1, -1, 3), s(1, 1, 4)],
        ])
        .unwrap();
        let trz = MatrixTraces::new(&z, &set).unwrap();
        let k2 = trace_cumulant(&z, &DeterministicOracle { traces: &trz }, &ev, DEFAULT_TERM_CAP).unwrap();
        let za = TraceExpression::single(vec![s(1, 1, 1), s(1, 1, 2)]).unwrap();
        let zb = TraceExpression::single(vec![s(1, -1, 3), s(1, 1, 4)]).unwrap();
        assert_eq!(k2, m(&z) - m(&za) * m(&zb));
    }

    #[test]
    fn spoke_formula() {
        let ab = vec![vec![q(1, 1), q(2, 1)], vec![q(3, 1), q(4, 1)]];
        let abt = vec![vec![q(5, 1), q(6, 1)], vec![q(7, 1), q(8, 1)]];
        // k=0: ab[1][-1]=ab[1][1]·ab[2][-2]=ab[2][2]; k=1: ab[1][0]=ab[1][2]·ab[2][-1]=ab[2][1]
        // transposed: k=0: abt[1][1]·abt[2][2]; k=1: abt[1][2]·abt[2][1]
        let expect = q(4 + 2 * 3 + 5 * 8 + 6 * 7, 1);
        assert_eq!(predicted_second_order_cov(&ab, &abt), expect);
        assert_eq!(predicted_second_order_cov(&[vec![q(2, 1)]], &[vec![q(3, 1)]]), q(5, 1));
        let rect = vec![vec![q(1, 1), q(1, 1)]];
        assert!(predicted_second_order_cov(&rect, &rect).is_zero());
    }

    #[test]
    fn centering() {
        let e = TraceExpression::single(vec![s(1, 1, 1), s(1, -1, 2)]).unwrap();
        let mut set = random_set(3, 2, 4);
        set.insert(2, DenseMatrix::identity(3)).unwrap();
        let c = center_slots(&e, &set).unwrap();
        assert!(c.get(1).unwrap().normalized_trace().is_zero());
        assert_eq!(c.get(2).unwrap(), &DenseMatrix::zeros(3));
        assert_eq!(center_slots(&e, &c).unwrap(), c);
    }

    #[test]
    fn colour_lemma_on_alternating_words() {
        let w = TraceExpression::conjugated_word(&[1, 2, 1, 2], &[1, 2, 3, 4]);
        let e = TraceExpression::single(w).unwrap();
        let terms = expand_moment(&e, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(terms.len(), 81);
        assert!(terms.iter().all(|t| colour_lemma_holds(&e, t)));
        let mut set = random_set(4, 4, 12);
        set = center_slots(&e, &set).unwrap();
        let short = TraceExpression::single(TraceExpression::conjugated_word(&[1, 2], &[1, 2])).unwrap();
        assert!(moment_exact(&short, &set, DEFAULT_TERM_CAP).unwrap().is_zero());
        let lim = asymptotic_moment(&e, DEFAULT_TERM_CAP).unwrap();
        let traces = MatrixTraces::new(&e, &set).unwrap();
        assert!(lim.evaluate(&traces).unwrap().is_zero());
    }

    #[test]
    fn caps_and_poles() {
        let e = example_expression();
        assert!(matches!(
            Expansion::with_cap(&e, 1000),
            Err(Error::CapExceeded { .. })
        ));
        let odd = TraceExpression::single(vec![s(1, 1, 1), s(1, 1, 2), s(1, 1, 3)]).unwrap();
        assert!(Expansion::new(&odd).unwrap().is_empty());
        let set = random_set(2, 8, 1);
        let err = moment_exact(&e, &set, DEFAULT_TERM_CAP).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }), "{err}");
    }
}
