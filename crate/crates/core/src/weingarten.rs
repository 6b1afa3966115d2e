//! Orthogonal Weingarten functions as rational functions of the dimension.
//!
//! `Wg` is the inverse of the Gram matrix `G(π₊, π₋) = N^{#(π₊∨π₋)}` over
//! pairings of `[n]`. It only depends on the Young diagram `λ(π₊∨π₋)`, so
//! the table is computed by solving one small system per diagram class.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{par_map, par_map_range};
use crate::poly::{sum_polyfracs, Poly, PolyFrac};
use crate::setpart::{
    enumerate_partitions_capped, interval, mobius, pairing_count, pairing_partners_by_index,
    young_diagrams, IndexSet, Pairing, SetPartition, YoungDiagram,
};

/// Largest `n` computed without an explicit opt-in.
pub const DEFAULT_WG_CAP: usize = 10;
/// Hard ceiling on `n`; 10395 pairings.
pub const MAX_WG_N: usize = 12;

/// Blocks of `p ∨ q` for pairings given as partner arrays: the count and
/// the sizes, in order of the smallest element.
pub(crate) fn join_pairings(p: &[usize], q: &[usize]) -> (usize, Vec<usize>) {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // alternate p and q edges around the loop
        let mut k = start;
        let mut len = 0;
        loop {
            seen[k] = true;
            let a = p[k];
            seen[a] = true;
            len += 2;
            k = q[a];
            if k == start {
                break;
            }
        }
        sizes.push(len);
    }
    (sizes.len(), sizes)
}

fn half_young(sizes: &[usize]) -> YoungDiagram {
    YoungDiagram::new(sizes.iter().map(|s| s / 2).collect())
}

/// `{1,2},{3,4},...` as partner positions.
fn base_partners(n: usize) -> Vec<usize> {
    (0..n).map(|i| i ^ 1).collect()
}

/// A pairing `τ` with `λ(τ ∨ base) = lambda`: each row of length `L` joins
/// `L` consecutive base pairs into one loop.
fn class_representative(lambda: &YoungDiagram) -> Vec<usize> {
    let n = 2 * lambda.weight();
    let mut out = vec![0; n];
    let mut start = 0;
    for &len in lambda.rows() {
        let block: Vec<usize> = (start..start + 2 * len).collect();
        for j in 0..len {
            // odd slot of pair j goes to even slot of pair j+1, cyclically
            let a = block[2 * j + 1];
            let b = block[(2 * j + 2) % (2 * len)];
            out[a] = b;
            out[b] = a;
        }
        start += 2 * len;
    }
    out
}

/// `G(π₊, π₋)` as powers of `N` over all pairings of `[n]`, in the
/// enumeration order of [`crate::setpart::enumerate_pairings`].
pub fn gram_matrix(n: usize) -> Result<Vec<Vec<usize>>> {
    check_n(n, DEFAULT_WG_CAP)?;
    let total = pairing_count(n) as usize;
    let partners: Vec<Vec<usize>> = (0..total)
        .map(|i| pairing_partners_by_index(n, i as u64))
        .collect();
    Ok(par_map_range(total, |i| {
        partners
            .iter()
            .map(|q| join_pairings(&partners[i], q).0)
            .collect()
    }))
}

fn check_n(n: usize, cap: usize) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::invalid(format!("Weingarten order {n} is odd")));
    }
    let cap = cap.min(MAX_WG_N);
    if n > cap {
        return Err(Error::CapExceeded {
            what: "Weingarten order",
            size: n,
            cap,
        });
    }
    Ok(())
}

/// The unnormalized Weingarten function of order `n`, keyed by `λ ⊢ n/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeingartenTable {
    n: usize,
    entries: BTreeMap<YoungDiagram, PolyFrac>,
}

/// The class-quotient system for order `n`.
struct ClassData {
    classes: Vec<YoungDiagram>,
    /// `counts[μ][ν][k]` = #{σ in class ν : #(τ_μ ∨ σ) = k}
    counts: Vec<Vec<Vec<u64>>>,
}

fn class_data(n: usize) -> ClassData {
    let m = n / 2;
    let classes = young_diagrams(m);
    let index: HashMap<YoungDiagram, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), i))
        .collect();
    let base = base_partners(n);
    let reps: Vec<Vec<usize>> = classes.iter().map(class_representative).collect();
    let total = pairing_count(n) as usize;
    let per_sigma: Vec<(usize, Vec<usize>)> = par_map_range(total, |i| {
        let s = pairing_partners_by_index(n, i as u64);
        let cls = index[&half_young(&join_pairings(&base, &s).1)];
        let joins = reps.iter().map(|t| join_pairings(t, &s).0).collect();
        (cls, joins)
    });
    let mut counts = vec![vec![vec![0u64; m + 1]; classes.len()]; classes.len()];
    for (cls, joins) in per_sigma {
        for (mu, &k) in joins.iter().enumerate() {
            counts[mu][cls][k] += 1;
        }
    }
    ClassData { classes, counts }
}

fn count_poly(counts: &[u64]) -> Poly {
    Poly::new(counts.iter().map(|&c| BigInt::from(c)).collect())
}

/// Fraction-free elimination of `a·x = b` over `Z[N]`, then exact
/// back-substitution over `Q(N)`.
fn bareiss_solve(mut a: Vec<Vec<Poly>>, mut b: Vec<Poly>) -> Result<Vec<PolyFrac>> {
    let n = a.len();
    let mut prev = Poly::constant(BigInt::one());
    for k in 0..n {
        let piv = (k..n)
            .find(|&i| !a[i][k].is_zero())
            .ok_or_else(|| Error::invalid("singular Gram system"))?;
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = t.div_exact(&prev);
            }
            let t = &(&b[i] * &a[k][k]) - &(&a[i][k] * &b[k]);
            b[i] = t.div_exact(&prev);
            a[i][k] = Poly::default();
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![PolyFrac::zero(); n];
    for i in (0..n).rev() {
        let mut terms = vec![PolyFrac::from_poly(b[i].clone())];
        for j in i + 1..n {
            terms.push(-&(&PolyFrac::from_poly(a[i][j].clone()) * &x[j]));
        }
        let rhs = sum_polyfracs(terms.iter());
        x[i] = &rhs / &PolyFrac::from_poly(a[i][i].clone());
    }
    Ok(x)
}

fn compute_table(n: usize) -> Result<WeingartenTable> {
    if n == 0 {
        let mut entries = BTreeMap::new();
        entries.insert(YoungDiagram::new(vec![]), PolyFrac::one());
        return Ok(WeingartenTable { n, entries });
    }
    let data = class_data(n);
    let c = data.classes.len();
    let identity_class = data.classes.len() - 1; // (1,...,1) is last
    debug_assert!(data.classes[identity_class].rows().iter().all(|&r| r == 1));
    let a: Vec<Vec<Poly>> = (0..c)
        .map(|mu| (0..c).map(|nu| count_poly(&data.counts[mu][nu])).collect())
        .collect();
    let b: Vec<Poly> = (0..c)
        .map(|mu| Poly::constant(BigInt::from((mu == identity_class) as i64)))
        .collect();
    let x = bareiss_solve(a, b)?;
    let entries = data.classes.into_iter().zip(x).collect();
    Ok(WeingartenTable { n, entries })
}

static TABLES: [OnceLock<Arc<WeingartenTable>>; MAX_WG_N / 2 + 1] =
    [const { OnceLock::new() }; MAX_WG_N / 2 + 1];

/// The cached table for order `n ≤` [`DEFAULT_WG_CAP`].
pub fn weingarten_table(n: usize) -> Result<Arc<WeingartenTable>> {
    weingarten_table_capped(n, DEFAULT_WG_CAP)
}

/// The cached table for order `n ≤ min(cap, MAX_WG_N)`.
pub fn weingarten_table_capped(n: usize, cap: usize) -> Result<Arc<WeingartenTable>> {
    check_n(n, cap)?;
    let slot = &TABLES[n / 2];
    if let Some(t) = slot.get() {
        return Ok(t.clone());
    }
    let t = Arc::new(compute_table(n)?);
    Ok(slot.get_or_init(|| t).clone())
}

impl WeingartenTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &BTreeMap<YoungDiagram, PolyFrac> {
        &self.entries
    }

    /// `Wg(λ)`.
    pub fn get(&self, lambda: &YoungDiagram) -> Option<&PolyFrac> {
        self.entries.get(lambda)
    }

    /// `Wg(π₊, π₋)` for pairings of a common ground set of size `n`.
    pub fn wg_pairings(&self, p_plus: &Pairing, p_minus: &Pairing) -> Result<PolyFrac> {
        let lambda = pair_class(p_plus, p_minus, self.n)?;
        Ok(self.entries[&lambda].clone())
    }

    /// Normalized `wg(λ) = N^{n - r} Wg(λ)` with `r` rows.
    pub fn wg(&self, lambda: &YoungDiagram) -> Option<PolyFrac> {
        let w = self.entries.get(lambda)?;
        Some(w.mul_power_of_n(self.n as i64 - lambda.row_count() as i64))
    }

    pub fn to_golden(&self) -> GoldenTable {
        GoldenTable {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(l, v)| {
                    (
                        l.to_string(),
                        GoldenEntry {
                            num: coeff_strings(v.numer()),
                            den: coeff_strings(v.denom()),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn from_golden(g: &GoldenTable) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, e) in &g.entries {
            let lambda = YoungDiagram::parse(k)?;
            if 2 * lambda.weight() != g.n {
                return Err(Error::invalid(format!("diagram {k} does not have weight {}", g.n / 2)));
            }
            entries.insert(lambda, PolyFrac::new(parse_coeffs(&e.num)?, parse_coeffs(&e.den)?)?);
        }
        Ok(WeingartenTable { n: g.n, entries })
    }
}

fn pair_class(p_plus: &Pairing, p_minus: &Pairing, n: usize) -> Result<YoungDiagram> {
    if p_plus.ground() != p_minus.ground() {
        return Err(Error::GroundMismatch);
    }
    if p_plus.ground().len() != n {
        return Err(Error::invalid(format!(
            "pairings on {} points, table order {n}",
            p_plus.ground().len()
        )));
    }
    let (_, sizes) = join_pairings(&p_plus.partner_positions(), &p_minus.partner_positions());
    Ok(half_young(&sizes))
}

/// On-disk form: `{n, entries: {"[3,1]": {num: [...], den: [...]}}}`, with
/// coefficients from the constant term up, as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenTable {
    pub n: usize,
    pub entries: BTreeMap<String, GoldenEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub num: Vec<String>,
    pub den: Vec<String>,
}

fn coeff_strings(p: &Poly) -> Vec<String> {
    p.coeffs().iter().map(|c| c.to_string()).collect()
}

fn parse_coeffs(v: &[String]) -> Result<Poly> {
    v.iter()
        .map(|s| {
            s.parse::<BigInt>()
                .map_err(|e| Error::invalid(format!("coefficient {s:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Poly::new)
}

/// Normalized `wg(π₊, π₋) = N^{n - #(π₊∨π₋)} Wg(π₊, π₋)`.
pub fn wg_normalized(table: &WeingartenTable, p_plus: &Pairing, p_minus: &Pairing) -> Result<PolyFrac> {
    let lambda = pair_class(p_plus, p_minus, table.n)?;
    Ok(table.wg(&lambda).expect("complete table"))
}

/// Normalized `wg(λ)` from the cached table of order `2|λ|`.
pub fn wg_of(lambda: &YoungDiagram, cap: usize) -> Result<PolyFrac> {
    let t = weingarten_table_capped(2 * lambda.weight(), cap)?;
    Ok(t.wg(lambda).expect("complete table"))
}

/// Exact value at an integer dimension.
pub fn eval_at(pf: &PolyFrac, n0: i64) -> Result<BigRational> {
    pf.eval_i64(n0)
}

pub fn catalan(k: usize) -> BigInt {
    binomial(BigInt::from(2 * k), BigInt::from(k)) / BigInt::from(k + 1)
}

/// Leading term `sign · coefficient · N^exponent` of `Wg(λ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingOrder {
    pub sign: i8,
    pub coefficient: BigInt,
    pub exponent: i64,
}

impl LeadingOrder {
    /// `lim wg(λ)`: the signed coefficient.
    pub fn limit(&self) -> BigInt {
        if self.sign < 0 {
            -self.coefficient.clone()
        } else {
            self.coefficient.clone()
        }
    }
}

pub fn leading_order(lambda: &YoungDiagram) -> LeadingOrder {
    let m = lambda.weight() as i64;
    let r = lambda.row_count() as i64;
    LeadingOrder {
        sign: if (m - r) % 2 == 0 { 1 } else { -1 },
        coefficient: lambda.rows().iter().map(|&l| catalan(l - 1)).product(),
        exponent: -2 * m + r,
    }
}

/// A Weingarten cumulant `C_{π,ρ,σ}` with its indices.
#[derive(Clone, Debug, PartialEq)]
pub struct WgCumulant {
    pub value: PolyFrac,
    pub pi: SetPartition,
    pub rho: SetPartition,
    pub sigma: SetPartition,
}

impl WgCumulant {
    /// `order(C) ≤ 2(#σ - #ρ)`; the zero function passes.
    pub fn order_check(&self) -> bool {
        wg_cumulant_order_check(self)
    }
}

pub fn wg_cumulant_order_check(c: &WgCumulant) -> bool {
    let bound = 2 * (c.sigma.block_count() as i64 - c.rho.block_count() as i64);
    c.value.order().is_none_or(|o| o <= bound)
}

/// Rows `|V|/2` of the `π`-blocks inside `block`.
fn young_inside(pi: &SetPartition, block: &[i32]) -> Result<YoungDiagram> {
    let sub = IndexSet::new(block.iter().copied())?;
    pi.restrict(&sub)?
        .half_block_young()
        .ok_or_else(|| Error::invalid("partition has an odd block"))
}

/// `Π_{V∈τ} wg(π₊|_V, π₋|_V)`, which only depends on `π = π₊∨π₋`.
fn wg_product(pi: &SetPartition, tau: &SetPartition, cap: usize) -> Result<PolyFrac> {
    let mut acc = PolyFrac::one();
    for b in tau.blocks() {
        acc = &acc * &wg_of(&young_inside(pi, &b)?, cap)?;
    }
    Ok(acc)
}

/// `C_{π,ρ,σ} = Σ_{ρ≼τ≼σ} μ(τ,σ) Π_{V∈τ} wg(π₊|_V, π₋|_V)` for
/// `π = π₊∨π₋`.
pub fn wg_cumulant(pi: &SetPartition, rho: &SetPartition, sigma: &SetPartition) -> Result<WgCumulant> {
    wg_cumulant_capped(pi, rho, sigma, DEFAULT_WG_CAP)
}

pub fn wg_cumulant_capped(
    pi: &SetPartition,
    rho: &SetPartition,
    sigma: &SetPartition,
    cap: usize,
) -> Result<WgCumulant> {
    if pi.half_block_young().is_none() {
        return Err(Error::invalid(format!("{pi} has an odd block")));
    }
    if !pi.refines(rho)? || !rho.refines(sigma)? {
        return Err(Error::invalid(format!("need {pi} ≼ {rho} ≼ {sigma}")));
    }
    let mut terms = Vec::new();
    for tau in interval(rho, sigma)? {
        let mu = mobius(&tau, sigma)?;
        let prod = wg_product(pi, &tau, cap)?;
        terms.push(&PolyFrac::from_poly(Poly::constant(mu)) * &prod);
    }
    Ok(WgCumulant {
        value: sum_polyfracs(terms.iter()),
        pi: pi.clone(),
        rho: rho.clone(),
        sigma: sigma.clone(),
    })
}

/// From pairings: `π = π₊∨π₋`.
pub fn wg_cumulant_pairings(
    p_plus: &Pairing,
    p_minus: &Pairing,
    rho: &SetPartition,
    sigma: &SetPartition,
) -> Result<WgCumulant> {
    let pi = p_plus.partition().join(p_minus.partition())?;
    wg_cumulant(&pi, rho, sigma)
}

static CONNECTED: OnceLock<Mutex<HashMap<YoungDiagram, PolyFrac>>> = OnceLock::new();

/// `C_{π,π,1}` where the blocks of `π` have half sizes `λ`:
/// `Σ_P μ(P, 1) Π_{B∈P} wg(∪_{i∈B} λ_i)` over partitions `P` of the rows.
pub fn connected_wg_cumulant(lambda: &YoungDiagram, cap: usize) -> Result<PolyFrac> {
    let cache = CONNECTED.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache lock").get(lambda) {
        return Ok(v.clone());
    }
    let rows = lambda.rows();
    let r = rows.len();
    let ground = IndexSet::range(r);
    let mut terms = Vec::new();
    for p in enumerate_partitions_capped(&ground, usize::MAX)? {
        let k = p.block_count();
        // μ(P, 1) = (-1)^{k-1} (k-1)!
        let mu: BigInt = (1..k).fold(BigInt::one(), |acc, i| acc * -BigInt::from(i));
        let mut prod = PolyFrac::from_poly(Poly::constant(mu));
        for b in p.blocks() {
            let merged = YoungDiagram::new(b.iter().map(|&i| rows[i as usize - 1]).collect());
            prod = &prod * &wg_of(&merged, cap)?;
        }
        terms.push(prod);
    }
    let v = sum_polyfracs(terms.iter());
    cache.lock().expect("cache lock").insert(lambda.clone(), v.clone());
    Ok(v)
}

/// `C_{π,π,ρ} = Π_{W∈ρ} C_{π|W, π|W, 1_W}`.
pub fn wg_cumulant_pi_pi_rho(pi: &SetPartition, rho: &SetPartition, cap: usize) -> Result<PolyFrac> {
    if !pi.refines(rho)? {
        return Err(Error::invalid(format!("need {pi} ≼ {rho}")));
    }
    let mut acc = PolyFrac::one();
    for b in rho.blocks() {
        acc = &acc * &connected_wg_cumulant(&young_inside(pi, &b)?, cap)?;
    }
    Ok(acc)
}

/// Checks `G·Wg = I` exactly. With `all_columns` every column is checked,
/// otherwise only the column of the base pairing (the others follow by
/// relabelling).
pub fn verify_gram_inverse(table: &WeingartenTable, all_columns: bool) -> Result<bool> {
    let n = table.n;
    if n == 0 {
        return Ok(true);
    }
    let total = pairing_count(n) as usize;
    let partners: Vec<Vec<usize>> = (0..total)
        .map(|i| pairing_partners_by_index(n, i as u64))
        .collect();
    let base = base_partners(n);
    let base_idx = partners.iter().position(|p| *p == base).expect("base pairing");
    let columns: Vec<usize> = if all_columns {
        (0..total).collect()
    } else {
        vec![base_idx]
    };
    let classes: Vec<&YoungDiagram> = table.entries.keys().collect();
    let class_index: HashMap<&YoungDiagram, usize> =
        classes.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let m = n / 2;
    // Entries with equal count tables agree, so each distinct table is
    // evaluated once.
    let mut distinct: BTreeSet<(Vec<Vec<u64>>, bool)> = BTreeSet::new();
    for &col in &columns {
        let sigma_class: Vec<usize> = partners
            .iter()
            .map(|s| class_index[&half_young(&join_pairings(s, &partners[col]).1)])
            .collect();
        let rows = par_map_range(total, |row| {
            let mut counts = vec![vec![0u64; m + 1]; classes.len()];
            for (s, p) in partners.iter().enumerate() {
                let k = join_pairings(&partners[row], p).0;
                counts[sigma_class[s]][k] += 1;
            }
            (counts, row == col)
        });
        distinct.extend(rows);
    }
    let distinct: Vec<(Vec<Vec<u64>>, bool)> = distinct.into_iter().collect();
    let ok = par_map(&distinct, |(counts, diag)| {
        let terms: Vec<PolyFrac> = counts
            .iter()
            .enumerate()
            .map(|(c, cnt)| &PolyFrac::from_poly(count_poly(cnt)) * &table.entries[classes[c]])
            .collect();
        let want = if *diag { PolyFrac::one() } else { PolyFrac::zero() };
        sum_polyfracs(terms.iter()) == want
    });
    if ok.iter().any(|&b| !b) {
        return Ok(false);
    }
    Ok(true)
}

/// Solves the class-quotient system at an integer `N0` over the rationals
/// and compares with the table evaluated there.
pub fn verify_at(table: &WeingartenTable, n0: i64) -> Result<bool> {
    if table.n == 0 {
        return Ok(true);
    }
    let data = class_data(table.n);
    let c = data.classes.len();
    let x = BigRational::from_integer(BigInt::from(n0));
    let mut a: Vec<Vec<BigRational>> = (0..c)
        .map(|mu| {
            (0..c)
                .map(|nu| count_poly(&data.counts[mu][nu]).eval_rational(&x))
                .collect()
        })
        .collect();
    let mut b: Vec<BigRational> = (0..c)
        .map(|mu| BigRational::from_integer(BigInt::from((mu == c - 1) as i64)))
        .collect();
    let sol = match rational_solve(&mut a, &mut b) {
        Some(s) => s,
        None => return Ok(false),
    };
    for (lambda, v) in data.classes.iter().zip(sol) {
        if table.entries[lambda].eval_i64(n0)? != v {
            return Ok(false);
        }
    }
    Ok(true)
}

fn rational_solve(a: &mut [Vec<BigRational>], b: &mut [BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    for k in 0..n {
        let piv = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
            let t = &f * &b[k];
            b[i] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for j in i + 1..n {
            s -= &a[i][j] * &x[j];
        }
        x[i] = s / &a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setpart::enumerate_pairings;

    fn yd(rows: &[usize]) -> YoungDiagram {
        YoungDiagram::new(rows.to_vec())
    }

    fn frac(s: &str) -> BigRational {
        crate::scalar::parse_rational(s).unwrap()
    }

    #[test]
    fn gram_small() {
        assert_eq!(gram_matrix(2).unwrap(), vec![vec![1]]);
        let g4 = gram_matrix(4).unwrap();
        for (i, row) in g4.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert_eq!(e, if i == j { 2 } else { 1 });
            }
        }
        let g6 = gram_matrix(6).unwrap();
        assert_eq!(g6.len(), 15);
        let mut seen: Vec<usize> = g6.iter().flatten().copied().collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen, vec![1, 2, 3]);
        assert!(matches!(gram_matrix(3), Err(Error::Invalid(_))));
        assert!(matches!(gram_matrix(12), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn small_tables() {
        let t2 = weingarten_table(2).unwrap();
        assert_eq!(t2.get(&yd(&[1])).unwrap().to_string(), "1/N");
        let t4 = weingarten_table(4).unwrap();
        assert_eq!(t4.get(&yd(&[1, 1])).unwrap().to_string(), "(N+1)/(N*(N+2)*(N-1))");
        assert_eq!(t4.get(&yd(&[2])).unwrap().to_string(), "-1/(N*(N+2)*(N-1))");
        assert_eq!(t2.wg(&yd(&[1])).unwrap(), PolyFrac::one());
    }

    #[test]
    fn wg31_value_and_limit() {
        let w = wg_of(&yd(&[3, 1]), DEFAULT_WG_CAP).unwrap();
        assert_eq!(w.to_string(), "2*N^6/((N+1)*(N+2)*(N+6)*(N-1)*(N-2)*(N-3))");
        assert_eq!(eval_at(&w, 10).unwrap(), frac("2000000/1064448"));
        assert!(matches!(eval_at(&w, 2), Err(Error::Pole { .. })));
        assert_eq!(w.limit().unwrap(), frac("2"));
    }

    #[test]
    fn normalized_from_pairings() {
        let t4 = weingarten_table(4).unwrap();
        let a = Pairing::from_pairs(&[(1, 2), (3, 4)]).unwrap();
        let b = Pairing::from_pairs(&[(1, 3), (2, 4)]).unwrap();
        let same = wg_normalized(&t4, &a, &a).unwrap();
        assert_eq!(same.to_string(), "N*(N+1)/((N+2)*(N-1))");
        let cross = wg_normalized(&t4, &a, &b).unwrap();
        assert_eq!(cross.to_string(), "-N^2/((N+2)*(N-1))");
        let t2 = weingarten_table(2).unwrap();
        let p = Pairing::from_pairs(&[(1, 2)]).unwrap();
        assert_eq!(wg_normalized(&t2, &p, &p).unwrap(), PolyFrac::one());
        assert!(wg_normalized(&t2, &a, &a).is_err());
    }

    #[test]
    fn gram_inverse_all_columns() {
        for n in [2, 4, 6] {
            let t = weingarten_table(n).unwrap();
            assert!(verify_gram_inverse(&t, true).unwrap(), "n = {n}");
        }
        let t8 = weingarten_table(8).unwrap();
        assert!(verify_gram_inverse(&t8, false).unwrap());
        assert!(verify_gram_inverse(&t8, true).unwrap());
    }

    #[test]
    fn rational_check_at_fixed_dimension() {
        let t8 = weingarten_table(8).unwrap();
        for n0 in [4, 5, 7, 11] {
            assert!(verify_at(&t8, n0).unwrap());
        }
    }

    /// Gauss-Jordan inversion of the full Gram matrix over Q(N).
    fn full_inverse(n: usize) -> Vec<Vec<PolyFrac>> {
        let g = gram_matrix(n).unwrap();
        let m = g.len();
        let mut a: Vec<Vec<PolyFrac>> = g
            .iter()
            .map(|r| r.iter().map(|&e| PolyFrac::power_of_n(e as i64)).collect())
            .collect();
        let mut inv: Vec<Vec<PolyFrac>> = (0..m)
            .map(|i| (0..m).map(|j| PolyFrac::from_int((i == j) as i64)).collect())
            .collect();
        for k in 0..m {
            let p = (k..m).find(|&i| !a[i][k].is_zero()).unwrap();
            a.swap(k, p);
            inv.swap(k, p);
            let d = a[k][k].clone();
            for j in 0..m {
                a[k][j] = &a[k][j] / &d;
                inv[k][j] = &inv[k][j] / &d;
            }
            for i in 0..m {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in 0..m {
                    a[i][j] = &a[i][j] - &(&f * &a[k][j]);
                    inv[i][j] = &inv[i][j] - &(&f * &inv[k][j]);
                }
            }
        }
        inv
    }

    #[test]
    fn class_quotient_matches_full_inversion() {
        for n in [4, 6] {
            let t = weingarten_table(n).unwrap();
            let inv = full_inverse(n);
            let ground = IndexSet::range(n);
            let pairings: Vec<Pairing> = enumerate_pairings(&ground).collect();
            for (i, p) in pairings.iter().enumerate() {
                for (j, q) in pairings.iter().enumerate() {
                    assert_eq!(inv[i][j], t.wg_pairings(p, q).unwrap());
                    assert_eq!(inv[i][j], inv[j][i]);
                }
            }
        }
    }

    #[test]
    fn leading_order_matches_limits() {
        for k in 1..=4 {
            for lambda in young_diagrams(k) {
                let w = wg_of(&lambda, DEFAULT_WG_CAP).unwrap();
                let lo = leading_order(&lambda);
                assert_eq!(w.limit().unwrap(), BigRational::from_integer(lo.limit()), "{lambda}");
                let wg = weingarten_table(2 * k).unwrap();
                assert_eq!(wg.get(&lambda).unwrap().order(), Some(lo.exponent));
            }
        }
        let lo = leading_order(&yd(&[3, 1]));
        assert_eq!((lo.sign, lo.coefficient.clone()), (1, BigInt::from(2)));
        let lo = leading_order(&yd(&[2]));
        assert_eq!(lo.limit(), BigInt::from(-1));
        assert_eq!(
            (0..6).map(catalan).collect::<Vec<_>>(),
            [1, 1, 2, 5, 14, 42].map(BigInt::from).to_vec()
        );
    }

    fn even_partitions(n: usize) -> Vec<SetPartition> {
        enumerate_partitions_capped(&IndexSet::range(n), 12)
            .unwrap()
            .filter(|p| p.half_block_young().is_some())
            .collect()
    }

    #[test]
    fn cumulant_small_cases() {
        let pi = SetPartition::from_blocks(&[vec![1, 2], vec![3, 4]]).unwrap();
        let top = SetPartition::coarsest(pi.ground());
        let c = wg_cumulant(&pi, &pi, &pi).unwrap();
        assert_eq!(c.value, PolyFrac::one());
        let c = wg_cumulant(&pi, &pi, &top).unwrap();
        let whole = wg_of(&yd(&[1, 1]), 10).unwrap();
        assert_eq!(c.value, &whole - &PolyFrac::one());
        assert!(c.value.order().unwrap() <= -2);
        assert!(c.order_check());
        assert!(wg_cumulant(&top, &pi, &top).is_err());
    }

    #[test]
    fn cumulant_order_bound_exhaustive() {
        for n in [4, 6] {
            for pi in even_partitions(n) {
                let top = SetPartition::coarsest(pi.ground());
                for rho in interval(&pi, &top).unwrap() {
                    for sigma in interval(&rho, &top).unwrap() {
                        let c = wg_cumulant(&pi, &rho, &sigma).unwrap();
                        assert!(c.order_check(), "{pi} {rho} {sigma}: {}", c.value);
                    }
                }
            }
        }
    }

    #[test]
    fn cumulant_mobius_round_trip() {
        for n in [4, 6] {
            for pi in even_partitions(n) {
                let top = SetPartition::coarsest(pi.ground());
                for rho in interval(&pi, &top).unwrap() {
                    for sigma in interval(&rho, &top).unwrap() {
                        if sigma.block_count() > 3 {
                            continue;
                        }
                        let lhs = wg_product(&pi, &sigma, 10).unwrap();
                        let terms: Vec<PolyFrac> = interval(&rho, &sigma)
                            .unwrap()
                            .iter()
                            .map(|tau| wg_cumulant(&pi, &rho, tau).unwrap().value)
                            .collect();
                        assert_eq!(sum_polyfracs(terms.iter()), lhs);
                    }
                }
            }
        }
    }

    #[test]
    fn connected_cumulant_factorization() {
        for pi in even_partitions(6) {
            let top = SetPartition::coarsest(pi.ground());
            for rho in interval(&pi, &top).unwrap() {
                let direct = wg_cumulant(&pi, &pi, &rho).unwrap().value;
                assert_eq!(wg_cumulant_pi_pi_rho(&pi, &rho, 10).unwrap(), direct);
            }
        }
    }

    #[test]
    fn golden_round_trip() {
        let t = weingarten_table(6).unwrap();
        let g = t.to_golden();
        let text = serde_json::to_string(&g).unwrap();
        let back: GoldenTable = serde_json::from_str(&text).unwrap();
        assert_eq!(WeingartenTable::from_golden(&back).unwrap(), *t);
    }
}
