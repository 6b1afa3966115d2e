//! Dense matrices, traces along permutations, Haar orthogonal sampling,
//! Monte Carlo estimators and the entrywise brute-force moment.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::par_map_range;
use crate::expr::{MatrixSet, TraceExpression};
use crate::perm::SignedPermutation;
use crate::scalar::{neumaier_sum, Scalar};
use crate::setpart::{advance_odometer, pairing_count, pairing_partners_by_index, UnionFind};
use crate::weingarten::{join_pairings, weingarten_table};

/// Square `N×N` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { dim, data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        Ok(DenseMatrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| T::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(DenseMatrix {
            dim: self.dim,
            data: T::matmul(&self.data, &other.data, self.dim),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(DenseMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn trace(&self) -> T {
        let diag: Vec<T> = (0..self.dim).map(|i| self.get(i, i).clone()).collect();
        T::sum_ordered(&diag)
    }

    /// `tr = Tr / N`.
    pub fn normalized_trace(&self) -> T {
        self.trace() / T::from_i64(self.dim as i64)
    }

    /// `X - tr(X) I`.
    pub fn centered(&self) -> Self {
        let t = self.normalized_trace();
        Self::from_fn(self.dim, |i, j| {
            let v = self.get(i, j).clone();
            if i == j {
                v - t.clone()
            } else {
                v
            }
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let m = other.dim;
        Self::from_fn(self.dim * m, |i, j| {
            self.get(i / m, j / m).clone() * other.get(i % m, j % m).clone()
        })
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }
}

impl DenseMatrix<f64> {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Resolves a signed position to a label and a transpose flag (`None` is
/// the identity).
pub type Resolver<'a> = dyn Fn(i32) -> Option<(u32, bool)> + 'a;

/// The default resolution: position `k` is label `|k|`, transposed when
/// `k < 0`.
pub fn signed_labels(k: i32) -> Option<(u32, bool)> {
    Some((k.unsigned_abs(), k < 0))
}

/// `X_{c_1} ⋯ X_{c_m}` along one cycle.
pub fn cycle_product<T: Scalar>(
    cycle: &[i32],
    set: &MatrixSet<T>,
    resolve: &Resolver<'_>,
) -> Result<DenseMatrix<T>> {
    let word: Vec<(u32, bool)> = cycle.iter().filter_map(|&k| resolve(k)).collect();
    word_product(&word, set)
}

/// Product of labelled factors, each possibly transposed.
pub fn word_product<T: Scalar>(word: &[(u32, bool)], set: &MatrixSet<T>) -> Result<DenseMatrix<T>> {
    let mut acc: Option<DenseMatrix<T>> = None;
    for &(label, transposed) in word {
        let m = set.get(label)?;
        let factor = if transposed { m.transpose() } else { m.clone() };
        acc = Some(match acc {
            None => factor,
            Some(a) => a.mul(&factor)?,
        });
    }
    Ok(acc.unwrap_or_else(|| DenseMatrix::identity(set.dim)))
}

/// Smallest representative of a word under rotation and under reversal
/// with every factor transposed; both preserve the trace.
pub fn canonical_word(word: &[(u32, bool)]) -> Vec<(u32, bool)> {
    let n = word.len();
    let reversed: Vec<(u32, bool)> = word.iter().rev().map(|&(l, t)| (l, !t)).collect();
    let mut best = word.to_vec();
    for w in [word, &reversed[..]] {
        for r in 0..n {
            let cand: Vec<(u32, bool)> = w[r..].iter().chain(&w[..r]).copied().collect();
            if cand < best {
                best = cand;
            }
        }
    }
    best
}

/// `Tr_π = Π_cycles Tr(X_{c_1} ⋯ X_{c_m})`.
pub fn trace_along<T: Scalar>(
    pi: &SignedPermutation,
    set: &MatrixSet<T>,
    resolve: &Resolver<'_>,
) -> Result<T> {
    let mut acc = T::one();
    for c in pi.cycles() {
        acc = acc * cycle_product(&c, set, resolve)?.trace();
    }
    Ok(acc)
}

/// `tr_π`: each cycle's trace divided by `N`.
pub fn normalized_trace_along<T: Scalar>(
    pi: &SignedPermutation,
    set: &MatrixSet<T>,
    resolve: &Resolver<'_>,
) -> Result<T> {
    let mut acc = T::one();
    for c in pi.cycles() {
        acc = acc * cycle_product(&c, set, resolve)?.normalized_trace();
    }
    Ok(acc)
}

/// Haar orthogonal matrix: QR of a standard Gaussian matrix with the
/// diagonal of `R` made positive.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    DenseMatrix::from_fn(n, |i, j| q[(i, j)])
}

pub const GENERATOR: &str = "ChaCha8Rng(seed_from_u64(seed)), stream = sample index";

/// Generator for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Independent Haar matrices for the given colours, drawn in order.
pub fn sample_colors(n: usize, colors: &[u32], seed: u64, index: u64) -> BTreeMap<u32, DenseMatrix<f64>> {
    let mut rng = sample_rng(seed, index);
    colors
        .iter()
        .map(|&c| (c, haar_orthogonal(n, &mut rng)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub generator: String,
}

/// Trace products of each expression for one draw of the Haar matrices.
/// `normalized` selects `tr` over `Tr`.
pub fn sample_traces(
    exprs: &[TraceExpression],
    set: &MatrixSet<f64>,
    haar: &BTreeMap<u32, DenseMatrix<f64>>,
    normalized: bool,
) -> Result<Vec<f64>> {
    let n = set.dim;
    let mut transposed: BTreeMap<u32, DenseMatrix<f64>> = BTreeMap::new();
    for (&c, o) in haar {
        transposed.insert(c, o.transpose());
    }
    let mut out = Vec::with_capacity(exprs.len());
    for e in exprs {
        let mut value = 1.0;
        for t in &e.traces {
            let mut acc = DenseMatrix::<f64>::identity(n);
            for s in t {
                let o = if s.eps > 0 {
                    haar.get(&s.color)
                } else {
                    transposed.get(&s.color)
                }
                .ok_or_else(|| Error::MissingValue(format!("Haar matrix for colour {}", s.color)))?;
                acc = acc.mul(o)?;
                if let Some(l) = s.slot {
                    let x = set.get(l.unsigned_abs())?;
                    acc = if l < 0 { acc.mul(&x.transpose())? } else { acc.mul(x)? };
                }
            }
            value *= if normalized { acc.normalized_trace() } else { acc.trace() };
        }
        out.push(value);
    }
    Ok(out)
}

fn all_colors(exprs: &[TraceExpression]) -> Vec<u32> {
    let mut c: Vec<u32> = exprs.iter().flat_map(|e| e.colors()).collect();
    c.sort_unstable();
    c.dedup();
    c
}

/// Per-sample statistic vectors, in sample order.
pub fn sample_statistics(
    exprs: &[TraceExpression],
    set: &MatrixSet<f64>,
    samples: usize,
    seed: u64,
    normalized: bool,
) -> Result<Vec<Vec<f64>>> {
    for e in exprs {
        set.check_covers(e)?;
    }
    let colors = all_colors(exprs);
    par_map_range(samples, |i| {
        let haar = sample_colors(set.dim, &colors, seed, i as u64);
        sample_traces(exprs, set, &haar, normalized)
    })
    .into_iter()
    .collect()
}

/// Sample mean and standard error of `E[tr_φ(...)]`.
pub fn mc_moment(expr: &TraceExpression, set: &MatrixSet<f64>, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let values: Vec<f64> = sample_statistics(std::slice::from_ref(expr), set, samples, seed, true)?
        .into_iter()
        .map(|v| v[0])
        .collect();
    let (mean, se) = mean_and_se(&values);
    Ok(McEstimate {
        mean,
        std_error: se,
        samples,
        seed,
        generator: GENERATOR.into(),
    })
}

pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    let var = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased k-statistic for the joint cumulant of order 2 or 3 of the
/// columns of `rows`.
pub fn k_statistic(rows: &[Vec<f64>]) -> Result<f64> {
    let n = rows.len();
    let r = rows.first().map(|v| v.len()).unwrap_or(0);
    if !(2..=3).contains(&r) {
        return Err(Error::Unsupported(format!("cumulant order {r}")));
    }
    if n <= r {
        return Err(Error::invalid("too few samples for the k-statistic"));
    }
    let means: Vec<f64> = (0..r)
        .map(|j| neumaier_sum(rows.iter().map(|v| v[j])) / n as f64)
        .collect();
    let s = neumaier_sum(
        rows.iter()
            .map(|v| (0..r).map(|j| v[j] - means[j]).product::<f64>()),
    );
    let nf = n as f64;
    Ok(if r == 2 {
        s / (nf - 1.0)
    } else {
        nf * s / ((nf - 1.0) * (nf - 2.0))
    })
}

/// Leave-one-batch-out jackknife over `batches` contiguous batches.
pub fn jackknife_se(rows: &[Vec<f64>], batches: usize) -> Result<f64> {
    let b = batches.max(2).min(rows.len());
    let bounds: Vec<usize> = (0..=b).map(|i| i * rows.len() / b).collect();
    let mut est = Vec::with_capacity(b);
    for i in 0..b {
        let rest: Vec<Vec<f64>> = rows[..bounds[i]]
            .iter()
            .chain(&rows[bounds[i + 1]..])
            .cloned()
            .collect();
        est.push(k_statistic(&rest)?);
    }
    let mean = neumaier_sum(est.iter().copied()) / b as f64;
    let ss = neumaier_sum(est.iter().map(|e| (e - mean) * (e - mean)));
    Ok(((b as f64 - 1.0) / b as f64 * ss).sqrt())
}

pub const DEFAULT_BATCHES: usize = 20;

/// Joint cumulant of `Tr` values of single-trace expressions sharing the
/// Haar matrices of each colour.
pub fn mc_cumulant(
    exprs: &[TraceExpression],
    set: &MatrixSet<f64>,
    samples: usize,
    seed: u64,
    batches: usize,
) -> Result<McEstimate> {
    if !(2..=3).contains(&exprs.len()) {
        return Err(Error::Unsupported(format!("cumulant order {}", exprs.len())));
    }
    let rows = sample_statistics(exprs, set, samples, seed, false)?;
    Ok(McEstimate {
        mean: k_statistic(&rows)?,
        std_error: jackknife_se(&rows, batches)?,
        samples,
        seed,
        generator: GENERATOR.into(),
    })
}

pub const BRUTE_FORCE_MAX_PER_COLOR: usize = 4;
pub const BRUTE_FORCE_MAX_N: usize = 4;

/// Exact `E[tr_φ(O^{ε(1)} X_1, …)]` by expanding each colour's
/// `E[O_{i_1 j_1} ⋯ O_{i_m j_m}] = Σ Wg(π₊,π₋)` inside the explicit index
/// sum over `ι: ±[n] → [N]`.
pub fn brute_force_moment(expr: &TraceExpression, set: &MatrixSet<BigRational>) -> Result<BigRational> {
    let dim = set.dim;
    if dim > BRUTE_FORCE_MAX_N {
        return Err(Error::CapExceeded {
            what: "brute-force dimension",
            size: dim,
            cap: BRUTE_FORCE_MAX_N,
        });
    }
    set.check_covers(expr)?;
    let n = expr.n();
    let slots = expr.slots();
    let groups = expr.positions_by_color();
    for pos in groups.values() {
        if pos.len() > BRUTE_FORCE_MAX_PER_COLOR {
            return Err(Error::CapExceeded {
                what: "brute-force factors per colour",
                size: pos.len(),
                cap: BRUTE_FORCE_MAX_PER_COLOR,
            });
        }
        if pos.len() % 2 == 1 {
            return Ok(BigRational::zero());
        }
    }

    // Integer matrices: X = M / d.
    let mut d = BigInt::one();
    for m in set.matrices.values() {
        for v in m.data() {
            d = d.lcm(v.denom());
        }
    }
    let ints: BTreeMap<u32, Vec<BigInt>> = set
        .matrices
        .iter()
        .map(|(&l, m)| (l, m.data().iter().map(|v| (v * &d).to_integer()).collect()))
        .collect();

    // φ(k) for each position.
    let phi = expr.phi();
    // Variables: ι_k is `k - 1`, ι_{-k} is `n + k - 1`.
    let var = |k: i32| -> usize {
        if k > 0 {
            k as usize - 1
        } else {
            n + (-k) as usize - 1
        }
    };
    // X_k carries indices (ι_{-ε(k) k}, ι_{ε(φ(k)) φ(k)}).
    let entries: Vec<(Option<(u32, bool)>, usize, usize)> = (1..=n as i32)
        .map(|k| {
            let e = slots[k as usize - 1].eps as i32;
            let f = phi.apply(k);
            let ef = slots[f as usize - 1].eps as i32;
            let label = slots[k as usize - 1].slot.map(|l| (l.unsigned_abs(), l < 0));
            (label, var(-e * k), var(ef * f))
        })
        .collect();

    let color_list: Vec<(&u32, &Vec<i32>)> = groups.iter().collect();
    let tables = color_list
        .iter()
        .map(|(_, pos)| weingarten_table(pos.len()))
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<u64> = color_list.iter().map(|(_, p)| pairing_count(p.len())).collect();
    let radices: Vec<usize> = counts.iter().flat_map(|&c| [c as usize, c as usize]).collect();

    let mut total = BigRational::zero();
    let mut digits = vec![0usize; radices.len()];
    loop {
        let mut uf = UnionFind::new(2 * n);
        let mut weight = BigRational::one();
        for (ci, (_, pos)) in color_list.iter().enumerate() {
            let plus = pairing_partners_by_index(pos.len(), digits[2 * ci] as u64);
            let minus = pairing_partners_by_index(pos.len(), digits[2 * ci + 1] as u64);
            for (a, &b) in plus.iter().enumerate() {
                uf.union(var(pos[a]), var(pos[b]));
            }
            for (a, &b) in minus.iter().enumerate() {
                uf.union(var(-pos[a]), var(-pos[b]));
            }
            let (_, sizes) = join_pairings(&plus, &minus);
            let lambda = crate::setpart::YoungDiagram::new(sizes.into_iter().map(|s| s / 2).collect());
            let wg = tables[ci]
                .get(&lambda)
                .ok_or_else(|| Error::MissingValue(format!("Wg({lambda})")))?;
            weight *= wg.eval(&BigInt::from(dim))?;
        }
        let labels = uf.labels();
        let classes = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let s = index_sum(&entries, &labels, classes, dim, &ints);
        total += weight * BigRational::from_integer(s);
        if !advance_odometer(&mut digits, &radices) {
            break;
        }
    }
    let scale = num_traits::pow(d, n - identity_count(&entries))
        * num_traits::pow(BigInt::from(dim), phi.cycle_count());
    Ok(total / BigRational::from_integer(scale))
}

fn identity_count(entries: &[(Option<(u32, bool)>, usize, usize)]) -> usize {
    entries.iter().filter(|e| e.0.is_none()).count()
}

/// `Σ_{classes → [N]} Π_k M_k[row, col]` over integer matrices, with an
/// `i128` fast path.
fn index_sum(
    entries: &[(Option<(u32, bool)>, usize, usize)],
    labels: &[u32],
    classes: usize,
    dim: usize,
    ints: &BTreeMap<u32, Vec<BigInt>>,
) -> BigInt {
    let lookup: Vec<Option<(&Vec<BigInt>, bool)>> = entries
        .iter()
        .map(|(l, _, _)| l.map(|(label, t)| (&ints[&label], t)))
        .collect();
    let rows: Vec<usize> = entries.iter().map(|e| labels[e.1] as usize).collect();
    let cols: Vec<usize> = entries.iter().map(|e| labels[e.2] as usize).collect();
    let small: Option<Vec<Option<(Vec<i128>, bool)>>> = lookup
        .iter()
        .map(|o| match o {
            None => Some(None),
            Some((m, t)) => m
                .iter()
                .map(|v| v.to_i128())
                .collect::<Option<Vec<_>>>()
                .map(|v| Some((v, *t))),
        })
        .collect();
    let radices = vec![dim; classes];
    if let Some(small) = small {
        let mut assign = vec![0usize; classes];
        let mut acc: i128 = 0;
        let mut ok = true;
        loop {
            let mut prod: i128 = 1;
            for (k, m) in small.iter().enumerate() {
                let (i, j) = (assign[rows[k]], assign[cols[k]]);
                let v = match m {
                    None => i128::from(i == j),
                    Some((m, false)) => m[i * dim + j],
                    Some((m, true)) => m[j * dim + i],
                };
                match prod.checked_mul(v) {
                    Some(p) => prod = p,
                    None => {
                        ok = false;
                        break;
                    }
                }
                if prod == 0 {
                    break;
                }
            }
            match (ok, acc.checked_add(prod)) {
                (true, Some(a)) => acc = a,
                _ => {
                    ok = false;
                    break;
                }
            }
            if !advance_odometer(&mut assign, &radices) {
                break;
            }
        }
        if ok {
            return BigInt::from(acc);
        }
    }
    let mut assign = vec![0usize; classes];
    let mut acc = BigInt::zero();
    loop {
        let mut prod = BigInt::one();
        for (k, m) in lookup.iter().enumerate() {
            let (i, j) = (assign[rows[k]], assign[cols[k]]);
            match m {
                None if i == j => {}
                None => prod = BigInt::zero(),
                Some((m, false)) => prod *= &m[i * dim + j],
                Some((m, true)) => prod *= &m[j * dim + i],
            }
            if prod.is_zero() {
                break;
            }
        }
        acc += prod;
        if !advance_odometer(&mut assign, &radices) {
            break;
        }
    }
    acc
}

/// Rational matrix with entries `p/q`, `|p| ≤ range`, `q ∈ {1..=den}`.
pub fn random_rational<R: Rng + ?Sized>(dim: usize, range: i64, den: i64, rng: &mut R) -> DenseMatrix<BigRational> {
    let data = (0..dim * dim)
        .map(|_| {
            let p = rng.random_range(-range..=range);
            let q = rng.random_range(1..=den);
            BigRational::new(p.into(), q.into())
        })
        .collect();
    DenseMatrix { dim, data }
}

pub fn abs_f64(v: &BigRational) -> f64 {
    v.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Slot;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn set_of(ms: Vec<DenseMatrix<BigRational>>) -> MatrixSet<BigRational> {
        let mut s = MatrixSet::new(ms[0].dim());
        for (i, m) in ms.into_iter().enumerate() {
            s.insert(i as u32 + 1, m).unwrap();
        }
        s
    }

    fn literal_index_sum(pi: &SignedPermutation, set: &MatrixSet<BigRational>) -> BigRational {
        let dom = pi.domain().elements().to_vec();
        let n = set.dim;
        let radices = vec![n; dom.len()];
        let mut idx = vec![0usize; dom.len()];
        let mut acc = BigRational::zero();
        loop {
            let mut prod = BigRational::one();
            for (p, &k) in dom.iter().enumerate() {
                let i = idx[p];
                let j = idx[pi.domain().position(pi.apply(k)).unwrap()];
                let m = set.get(k.unsigned_abs()).unwrap();
                prod *= if k > 0 { m.get(i, j).clone() } else { m.get(j, i).clone() };
            }
            acc += prod;
            if !advance_odometer(&mut idx, &radices) {
                break;
            }
        }
        acc
    }

    #[test]
    fn trace_along_examples() {
        let mut rng = sample_rng(7, 0);
        let set = set_of((0..3).map(|_| random_rational(3, 4, 3, &mut rng)).collect());
        let p = SignedPermutation::from_cycles(None, &[vec![1], vec![2]]).unwrap();
        let v = trace_along(&p, &set, &signed_labels).unwrap();
        assert_eq!(v, set.get(1).unwrap().trace() * set.get(2).unwrap().trace());
        let p = SignedPermutation::from_cycles(None, &[vec![1, -2]]).unwrap();
        let v = trace_along(&p, &set, &signed_labels).unwrap();
        assert_eq!(v, set.get(1).unwrap().mul(&set.get(2).unwrap().transpose()).unwrap().trace());
        for cycles in [
            vec![vec![1, 2, 3]],
            vec![vec![1, -3], vec![2]],
            vec![vec![-1, 2, -3]],
            vec![vec![-2], vec![3, 1]],
        ] {
            let p = SignedPermutation::from_cycles(None, &cycles).unwrap();
            assert_eq!(trace_along(&p, &set, &signed_labels).unwrap(), literal_index_sum(&p, &set));
        }
        let p = SignedPermutation::from_cycles(None, &[vec![4]]).unwrap();
        assert!(trace_along(&p, &set, &signed_labels).is_err());
    }

    #[test]
    fn haar_is_orthogonal_and_reproducible() {
        let mut rng = sample_rng(1, 3);
        for n in [1, 2, 5, 12] {
            let o = haar_orthogonal(n, &mut rng);
            let p = o.mul(&o.transpose()).unwrap();
            assert!(p.max_abs_diff(&DenseMatrix::identity(n)) < 1e-12);
        }
        let a = sample_colors(4, &[1, 2], 9, 5);
        let b = sample_colors(4, &[1, 2], 9, 5);
        assert_eq!(a, b);
        assert_ne!(a[&1], a[&2]);
    }

    #[test]
    fn haar_second_moment() {
        let n = 5;
        let samples = 20_000;
        let v = par_map_range(samples, |i| {
            let o = haar_orthogonal(n, &mut sample_rng(11, i as u64));
            (*o.get(0, 0), o.get(0, 0) * o.get(0, 0))
        });
        let first: Vec<f64> = v.iter().map(|x| x.0).collect();
        let second: Vec<f64> = v.iter().map(|x| x.1).collect();
        let (m1, se1) = mean_and_se(&first);
        let (m2, se2) = mean_and_se(&second);
        assert!(m1.abs() < 5.0 * se1);
        assert!((m2 - 0.2).abs() < 5.0 * se2, "{m2} ± {se2}");
    }

    #[test]
    fn brute_force_closed_forms() {
        let mut rng = sample_rng(3, 0);
        for dim in [2, 3] {
            let set = set_of((0..2).map(|_| random_rational(dim, 5, 4, &mut rng)).collect());
            let (x1, x2) = (set.get(1).unwrap(), set.get(2).unwrap());
            let e = TraceExpression::single(vec![Slot::new(1, 1, Some(1)), Slot::new(1, -1, Some(2))]).unwrap();
            assert_eq!(
                brute_force_moment(&e, &set).unwrap(),
                x1.normalized_trace() * x2.normalized_trace()
            );
            let e = TraceExpression::single(vec![Slot::new(1, 1, Some(1)), Slot::new(1, 1, Some(2))]).unwrap();
            let expect = x1.mul(&x2.transpose()).unwrap().normalized_trace() / q(dim as i64, 1);
            assert_eq!(brute_force_moment(&e, &set).unwrap(), expect);
            let e = TraceExpression::single(vec![Slot::new(1, 1, Some(1))]).unwrap();
            assert!(brute_force_moment(&e, &set).unwrap().is_zero());
        }
        let set = set_of(vec![DenseMatrix::identity(5)]);
        let e = TraceExpression::single(vec![Slot::new(1, 1, Some(1)), Slot::new(1, -1, None)]).unwrap();
        assert!(matches!(brute_force_moment(&e, &set), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn k_statistics_small() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]];
        // cov: means 2, 2; products (-1)(0) + 0 + 1*1 = 1; / 2
        assert!((k_statistic(&rows).unwrap() - 0.5).abs() < 1e-15);
        assert!(k_statistic(&[vec![1.0]]).is_err());
        let rows3: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64; 3]).collect();
        // third cumulant of a symmetric sample is zero
        assert!(k_statistic(&rows3).unwrap().abs() < 1e-12);
        assert!(jackknife_se(&rows3, 5).unwrap() >= 0.0);
    }

    #[test]
    fn mc_simple_moment() {
        let mut rng = sample_rng(5, 0);
        let set = set_of((0..2).map(|_| random_rational(6, 3, 2, &mut rng)).collect()).to_f64();
        let e = TraceExpression::single(vec![Slot::new(1, 1, Some(1)), Slot::new(1, -1, Some(2))]).unwrap();
        let est = mc_moment(&e, &set, 4000, 42).unwrap();
        let exact = set.get(1).unwrap().normalized_trace() * set.get(2).unwrap().normalized_trace();
        assert!((est.mean - exact).abs() < 5.0 * est.std_error + 1e-12);
        let again = mc_moment(&e, &set, 4000, 42).unwrap();
        assert_eq!(est, again);
    }
}
