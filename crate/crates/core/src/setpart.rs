//! Set partitions of finite signed-integer ground sets, the partition
//! lattice, pairings, Young diagrams, and moment/cumulant conversion.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_PARTITION_CAP: usize = 12;
pub const DEFAULT_PAIRING_CAP: usize = 16;

/// A finite set of nonzero integers, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<i32>);

impl IndexSet {
    pub fn new(elements: impl IntoIterator<Item = i32>) -> Result<Self> {
        let mut v: Vec<i32> = elements.into_iter().collect();
        v.sort_unstable();
        if v.contains(&0) {
            return Err(Error::invalid("index sets exclude 0"));
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("index set has duplicate elements"));
        }
        Ok(IndexSet(v))
    }

    /// `{1, ..., n}`.
    pub fn range(n: usize) -> Self {
        IndexSet((1..=n as i32).collect())
    }

    /// `±I` for a set `I` of positive integers.
    pub fn symmetric(positive: &IndexSet) -> Result<Self> {
        IndexSet::new(positive.0.iter().flat_map(|&k| [k, -k]))
    }

    pub fn negated(&self) -> Self {
        let mut v: Vec<i32> = self.0.iter().map(|k| -k).collect();
        v.sort_unstable();
        IndexSet(v)
    }

    pub fn elements(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: i32) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub fn position(&self, k: i32) -> Option<usize> {
        self.0.binary_search(&k).ok()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&k| other.contains(k))
    }

    /// True when `k ∈ I` implies `-k ∈ I`.
    pub fn is_symmetric(&self) -> bool {
        self.0.iter().all(|&k| self.contains(-k))
    }

    pub fn positive_part(&self) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&k| k > 0).collect())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i32>::deserialize(d)?;
        IndexSet::new(v).map_err(serde::de::Error::custom)
    }
}

/// Union-find over `0..n` with path halving.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if ra < rb {
            self.parent[rb] = ra;
        } else {
            self.parent[ra] = rb;
        }
        true
    }

    /// Restricted-growth labels of the classes.
    pub fn labels(&mut self) -> Vec<u32> {
        let n = self.parent.len();
        let mut map = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = self.find(i);
            if map[r] == u32::MAX {
                map[r] = next;
                next += 1;
            }
            out.push(map[r]);
        }
        out
    }
}

/// Relabel arbitrary class labels into restricted-growth form.
pub(crate) fn normalize_labels<T: Ord + Copy>(raw: &[T]) -> Vec<u32> {
    let mut map = BTreeMap::new();
    raw.iter()
        .map(|x| {
            let next = map.len() as u32;
            *map.entry(*x).or_insert(next)
        })
        .collect()
}

/// A partition of an [`IndexSet`], stored as restricted-growth labels over
/// the sorted ground set. Blocks are therefore numbered by their minimum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetPartition {
    ground: IndexSet,
    labels: Vec<u32>,
    count: usize,
}

impl SetPartition {
    pub(crate) fn from_labels_unchecked(ground: IndexSet, labels: Vec<u32>) -> Self {
        let labels = normalize_labels(&labels);
        let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        SetPartition {
            ground,
            labels,
            count,
        }
    }

    pub fn from_labels(ground: IndexSet, labels: &[i64]) -> Result<Self> {
        if labels.len() != ground.len() {
            return Err(Error::invalid("label count differs from ground size"));
        }
        let labels = normalize_labels(labels);
        Ok(Self::from_labels_unchecked(ground, labels))
    }

    pub fn from_blocks(blocks: &[Vec<i32>]) -> Result<Self> {
        let ground = IndexSet::new(blocks.iter().flatten().copied())?;
        let mut labels = vec![0u32; ground.len()];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid("empty block"));
            }
            for &k in block {
                labels[ground.position(k).expect("element of ground")] = b as u32;
            }
        }
        Ok(Self::from_labels_unchecked(ground, labels))
    }

    /// Like [`from_blocks`](Self::from_blocks) but checks the union equals `ground`.
    pub fn from_blocks_on(ground: &IndexSet, blocks: &[Vec<i32>]) -> Result<Self> {
        let p = Self::from_blocks(blocks)?;
        if &p.ground != ground {
            return Err(Error::invalid("blocks do not cover the ground set"));
        }
        Ok(p)
    }

    /// `0_I`: all singletons.
    pub fn finest(ground: &IndexSet) -> Self {
        let labels = (0..ground.len() as u32).collect();
        Self::from_labels_unchecked(ground.clone(), labels)
    }

    /// `1_I`: one block.
    pub fn coarsest(ground: &IndexSet) -> Self {
        Self::from_labels_unchecked(ground.clone(), vec![0; ground.len()])
    }

    pub fn ground(&self) -> &IndexSet {
        &self.ground
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// `#(π)`.
    pub fn block_count(&self) -> usize {
        self.count
    }

    pub fn block_label(&self, k: i32) -> Option<u32> {
        self.ground.position(k).map(|i| self.labels[i])
    }

    pub fn same_block(&self, a: i32, b: i32) -> bool {
        match (self.block_label(a), self.block_label(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// Blocks in canonical order (by minimum element), each sorted.
    pub fn blocks(&self) -> Vec<Vec<i32>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(self.ground.0[i]);
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    fn check_ground(&self, other: &SetPartition) -> Result<()> {
        if self.ground != other.ground {
            return Err(Error::GroundMismatch);
        }
        Ok(())
    }

    /// `p ∨ q`.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition> {
        self.check_ground(other)?;
        let n = self.labels.len();
        let mut uf = UnionFind::new(n);
        let mut first_p = vec![usize::MAX; self.count];
        let mut first_q = vec![usize::MAX; other.count];
        for i in 0..n {
            let (lp, lq) = (self.labels[i] as usize, other.labels[i] as usize);
            if first_p[lp] == usize::MAX {
                first_p[lp] = i;
            } else {
                uf.union(first_p[lp], i);
            }
            if first_q[lq] == usize::MAX {
                first_q[lq] = i;
            } else {
                uf.union(first_q[lq], i);
            }
        }
        Ok(Self::from_labels_unchecked(self.ground.clone(), uf.labels()))
    }

    /// `p ∧ q`.
    pub fn meet(&self, other: &SetPartition) -> Result<SetPartition> {
        self.check_ground(other)?;
        let pairs: Vec<(u32, u32)> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| (a, b))
            .collect();
        Ok(Self::from_labels_unchecked(
            self.ground.clone(),
            normalize_labels(&pairs),
        ))
    }

    /// `self ≼ other`: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> Result<bool> {
        self.check_ground(other)?;
        let mut image = vec![u32::MAX; self.count];
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            let slot = &mut image[a as usize];
            if *slot == u32::MAX {
                *slot = b;
            } else if *slot != b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The partition induced on a subset of the ground set.
    pub fn restrict(&self, subset: &IndexSet) -> Result<SetPartition> {
        let mut labels = Vec::with_capacity(subset.len());
        for &k in subset.elements() {
            labels.push(
                self.block_label(k)
                    .ok_or_else(|| Error::invalid(format!("{k} not in ground set")))?,
            );
        }
        Ok(Self::from_labels_unchecked(subset.clone(), labels))
    }

    /// Block-wise Young diagram with rows `|V| / 2` (blocks must be even).
    pub fn half_block_young(&self) -> Option<YoungDiagram> {
        let sizes = self.block_sizes();
        if sizes.iter().any(|s| s % 2 == 1) {
            return None;
        }
        Some(YoungDiagram::new(sizes.into_iter().map(|s| s / 2).collect()))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.blocks().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, k) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SetPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetPartition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<Vec<i32>>::deserialize(d)?;
        SetPartition::from_blocks(&blocks).map_err(serde::de::Error::custom)
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Möbius function of the partition lattice. Zero unless `p ≼ q`; otherwise
/// the product over blocks of `q` of `(-1)^(m-1) (m-1)!`, with `m` the number
/// of `p`-blocks inside.
pub fn mobius(p: &SetPartition, q: &SetPartition) -> Result<BigInt> {
    if !p.refines(q)? {
        return Ok(BigInt::zero());
    }
    let mut inside = vec![std::collections::BTreeSet::new(); q.count];
    for (&a, &b) in p.labels.iter().zip(&q.labels) {
        inside[b as usize].insert(a);
    }
    let mut out = BigInt::one();
    for s in inside {
        let m = s.len();
        let f = factorial(m - 1);
        out *= if m % 2 == 1 { f } else { -f };
    }
    Ok(out)
}

/// Restricted-growth enumeration of all partitions of a ground set.
pub struct PartitionIter {
    ground: IndexSet,
    labels: Vec<u32>,
    maxes: Vec<u32>,
    done: bool,
}

impl PartitionIter {
    fn new(ground: IndexSet) -> Self {
        let n = ground.len();
        PartitionIter {
            ground,
            labels: vec![0; n],
            maxes: vec![0; n],
            done: false,
        }
    }
}

impl Iterator for PartitionIter {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let n = self.labels.len();
        let count = if n == 0 {
            0
        } else {
            self.maxes[n - 1] as usize + 1
        };
        let out = SetPartition {
            ground: self.ground.clone(),
            labels: self.labels.clone(),
            count,
        };
        // advance: rightmost position that can still grow
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            let bound = self.maxes[i - 1] + 1;
            if self.labels[i] < bound {
                self.labels[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// All partitions of `ground` in restricted-growth order, with the default cap.
pub fn enumerate_partitions(ground: &IndexSet) -> Result<PartitionIter> {
    enumerate_partitions_capped(ground, DEFAULT_PARTITION_CAP)
}

pub fn enumerate_partitions_capped(ground: &IndexSet, cap: usize) -> Result<PartitionIter> {
    if ground.len() > cap {
        return Err(Error::CapExceeded {
            what: "partition ground size",
            size: ground.len(),
            cap,
        });
    }
    Ok(PartitionIter::new(ground.clone()))
}

/// All `τ` with `lower ≼ τ ≼ upper`, in a deterministic order.
pub fn interval(lower: &SetPartition, upper: &SetPartition) -> Result<Vec<SetPartition>> {
    if !lower.refines(upper)? {
        return Ok(Vec::new());
    }
    // group the lower blocks by the upper block containing them
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); upper.count];
    for (&a, &b) in lower.labels.iter().zip(&upper.labels) {
        let g = &mut groups[b as usize];
        if !g.contains(&a) {
            g.push(a);
        }
    }
    let per_group: Vec<Vec<Vec<u32>>> = groups
        .iter()
        .map(|g| {
            let local = IndexSet::range(g.len());
            enumerate_partitions_capped(&local, usize::MAX)
                .expect("uncapped")
                .map(|p| p.labels)
                .collect()
        })
        .collect();
    let radices: Vec<usize> = per_group.iter().map(|g| g.len()).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; groups.len()];
    loop {
        // lower-block label -> merged label
        let mut merged = vec![0u64; lower.count];
        for (gi, g) in groups.iter().enumerate() {
            let lab = &per_group[gi][choice[gi]];
            for (j, &lb) in g.iter().enumerate() {
                merged[lb as usize] = ((gi as u64) << 32) | lab[j] as u64;
            }
        }
        let labels: Vec<u64> = lower.labels.iter().map(|&a| merged[a as usize]).collect();
        out.push(SetPartition::from_labels_unchecked(
            lower.ground.clone(),
            normalize_labels(&labels),
        ));
        if !advance_odometer(&mut choice, &radices) {
            return Ok(out);
        }
    }
}

/// Step a mixed-radix counter, least significant digit first. Returns
/// false after the last value.
pub(crate) fn advance_odometer(digits: &mut [usize], radices: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radices) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// `ker f`: blocks are the preimages of points.
pub fn kernel_of<T: Ord + Copy>(ground: &IndexSet, f: impl Fn(i32) -> T) -> SetPartition {
    let values: Vec<T> = ground.elements().iter().map(|&k| f(k)).collect();
    SetPartition::from_labels_unchecked(ground.clone(), normalize_labels(&values))
}

/// A partition all of whose blocks have two elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pairing(SetPartition);

impl Pairing {
    pub fn new(p: SetPartition) -> Result<Self> {
        if p.block_sizes().iter().any(|&s| s != 2) {
            return Err(Error::invalid("pairing blocks must have two elements"));
        }
        Ok(Pairing(p))
    }

    pub fn from_pairs(pairs: &[(i32, i32)]) -> Result<Self> {
        let blocks: Vec<Vec<i32>> = pairs.iter().map(|&(a, b)| vec![a, b]).collect();
        Pairing::new(SetPartition::from_blocks(&blocks)?)
    }

    pub fn partition(&self) -> &SetPartition {
        &self.0
    }

    pub fn ground(&self) -> &IndexSet {
        &self.0.ground
    }

    /// The other element of `k`'s pair.
    pub fn partner(&self, k: i32) -> Option<i32> {
        let i = self.0.ground.position(k)?;
        let l = self.0.labels[i];
        self.0
            .labels
            .iter()
            .enumerate()
            .find(|&(j, &m)| m == l && j != i)
            .map(|(j, _)| self.0.ground.0[j])
    }

    /// Partner positions within the ground set.
    pub fn partner_positions(&self) -> Vec<usize> {
        let mut first = vec![usize::MAX; self.0.count];
        let mut out = vec![0; self.0.labels.len()];
        for (i, &l) in self.0.labels.iter().enumerate() {
            let f = first[l as usize];
            if f == usize::MAX {
                first[l as usize] = i;
            } else {
                out[i] = f;
                out[f] = i;
            }
        }
        out
    }

    pub fn pairs(&self) -> Vec<(i32, i32)> {
        self.0.blocks().into_iter().map(|b| (b[0], b[1])).collect()
    }
}

impl Serialize for Pairing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pairing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = SetPartition::deserialize(d)?;
        Pairing::new(p).map_err(serde::de::Error::custom)
    }
}

/// `(m-1)!!` for even `m`, 0 for odd `m`.
pub fn pairing_count(m: usize) -> u64 {
    if m % 2 == 1 {
        return 0;
    }
    (1..m as u64).step_by(2).product()
}

/// Partner positions of the pairing with the given mixed-radix index: the
/// first free position is paired with the `d`-th remaining free position,
/// where `d` runs over digits of radices `m-1, m-3, ...` (first digit least
/// significant).
pub fn pairing_partners_by_index(m: usize, mut index: u64) -> Vec<usize> {
    let mut free: Vec<usize> = (0..m).collect();
    let mut out = vec![0; m];
    while !free.is_empty() {
        let a = free.remove(0);
        let radix = free.len() as u64;
        let d = (index % radix) as usize;
        index /= radix;
        let b = free.remove(d);
        out[a] = b;
        out[b] = a;
    }
    out
}

/// Enumerates all pairings of a ground set.
pub struct PairingIter {
    ground: IndexSet,
    index: u64,
    total: u64,
}

impl Iterator for PairingIter {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.index >= self.total {
            return None;
        }
        let partners = pairing_partners_by_index(self.ground.len(), self.index);
        self.index += 1;
        let labels: Vec<usize> = partners
            .iter()
            .enumerate()
            .map(|(i, &j)| i.min(j))
            .collect();
        Some(Pairing(SetPartition::from_labels_unchecked(
            self.ground.clone(),
            normalize_labels(&labels),
        )))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.total - self.index) as usize;
        (r, Some(r))
    }
}

/// All pairings of `ground`; empty when `|ground|` is odd.
pub fn enumerate_pairings(ground: &IndexSet) -> PairingIter {
    let total = pairing_count(ground.len());
    PairingIter {
        ground: ground.clone(),
        index: 0,
        total: if ground.is_empty() { 1 } else { total },
    }
}

pub fn enumerate_pairings_capped(ground: &IndexSet, cap: usize) -> Result<PairingIter> {
    if ground.len() > cap {
        return Err(Error::CapExceeded {
            what: "pairing ground size",
            size: ground.len(),
            cap,
        });
    }
    Ok(enumerate_pairings(ground))
}

/// A Young diagram: weakly decreasing positive rows.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct YoungDiagram(Vec<usize>);

impl YoungDiagram {
    /// Sorts the rows and drops zero rows.
    pub fn new(mut rows: Vec<usize>) -> Self {
        rows.retain(|&r| r > 0);
        rows.sort_unstable_by(|a, b| b.cmp(a));
        YoungDiagram(rows)
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn row_count(&self) -> usize {
        self.0.len()
    }

    /// Parses `"3,1"` or `"[3,1]"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        if s.trim().is_empty() {
            return Ok(YoungDiagram(Vec::new()));
        }
        let rows = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad row length {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.contains(&0) {
            return Err(Error::invalid("rows must be positive"));
        }
        Ok(YoungDiagram::new(rows))
    }

    /// Concatenate the rows of two diagrams.
    pub fn union(&self, other: &YoungDiagram) -> YoungDiagram {
        YoungDiagram::new(self.0.iter().chain(&other.0).copied().collect())
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl<'de> Deserialize<'de> for YoungDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<usize>::deserialize(d)?;
        if rows.contains(&0) || rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(serde::de::Error::custom("rows must be positive and descending"));
        }
        Ok(YoungDiagram(rows))
    }
}

/// All Young diagrams of weight `n`, in reverse lexicographic order.
pub fn young_diagrams(n: usize) -> Vec<YoungDiagram> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<YoungDiagram>) {
        if rem == 0 {
            out.push(YoungDiagram(cur.clone()));
            return;
        }
        for r in (1..=rem.min(max)).rev() {
            cur.push(r);
            rec(rem - r, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// `k_target = Σ_{ρ ≼ target} μ(ρ, target) a_ρ`, with `a_ρ` from the oracle.
pub fn cumulants_from_moments<T: Scalar>(
    moments: impl Fn(&SetPartition) -> Option<T>,
    target: &SetPartition,
) -> Result<T> {
    let bottom = SetPartition::finest(target.ground());
    let mut terms = Vec::new();
    for rho in interval(&bottom, target)? {
        let mu = mobius(&rho, target)?;
        let a = moments(&rho).ok_or_else(|| Error::MissingValue(format!("moment {rho}")))?;
        terms.push(T::from_bigint(&mu) * a);
    }
    Ok(T::sum_ordered(&terms))
}

/// `a_target = Σ_{ρ ≼ target} k_ρ`.
pub fn moments_from_cumulants<T: Scalar>(
    cumulants: impl Fn(&SetPartition) -> Option<T>,
    target: &SetPartition,
) -> Result<T> {
    let bottom = SetPartition::finest(target.ground());
    let mut terms = Vec::new();
    for rho in interval(&bottom, target)? {
        terms.push(cumulants(&rho).ok_or_else(|| Error::MissingValue(format!("cumulant {rho}")))?);
    }
    Ok(T::sum_ordered(&terms))
}

/// Product over blocks of a per-block functional, the multiplicative
/// extension `f_π = Π_V f(V)`.
pub fn multiplicative<T: Scalar>(
    per_block: impl Fn(&[i32]) -> Option<T>,
) -> impl Fn(&SetPartition) -> Option<T> {
    move |p: &SetPartition| {
        let mut acc = T::one();
        for b in p.blocks() {
            acc = acc * per_block(&b)?;
        }
        Some(acc)
    }
}
