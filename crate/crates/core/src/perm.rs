//! Signed permutations, premaps, and the surface data built from them.
//!
//! Composition is right to left: `s.compose(&t)` is `k ↦ s(t(k))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setpart::{
    advance_odometer, enumerate_pairings, enumerate_partitions_capped, IndexSet, Pairing, SetPartition,
    UnionFind, YoungDiagram,
};

/// A bijection of a finite set of nonzero integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    domain: IndexSet,
    /// `map[i]` is the position of the image of `domain[i]`.
    map: Vec<usize>,
}

impl SignedPermutation {
    pub fn identity(domain: &IndexSet) -> Self {
        SignedPermutation {
            domain: domain.clone(),
            map: (0..domain.len()).collect(),
        }
    }

    /// Build from cycles. Elements of `domain` not mentioned are fixed; with
    /// `domain = None` the domain is the union of the cycles.
    pub fn from_cycles(domain: Option<&IndexSet>, cycles: &[Vec<i32>]) -> Result<Self> {
        let domain = match domain {
            Some(d) => d.clone(),
            None => IndexSet::new(cycles.iter().flatten().copied())?,
        };
        let mut map: Vec<usize> = (0..domain.len()).collect();
        let mut seen = vec![false; domain.len()];
        for c in cycles {
            for (i, &k) in c.iter().enumerate() {
                let a = domain
                    .position(k)
                    .ok_or_else(|| Error::invalid(format!("{k} outside the domain")))?;
                if seen[a] {
                    return Err(Error::invalid(format!("{k} appears twice in the cycles")));
                }
                seen[a] = true;
                let next = c[(i + 1) % c.len()];
                map[a] = domain
                    .position(next)
                    .ok_or_else(|| Error::invalid(format!("{next} outside the domain")))?;
            }
        }
        Ok(SignedPermutation { domain, map })
    }

    pub fn from_fn(domain: &IndexSet, f: impl Fn(i32) -> i32) -> Result<Self> {
        let mut map = Vec::with_capacity(domain.len());
        let mut hit = vec![false; domain.len()];
        for &k in domain.elements() {
            let img = f(k);
            let p = domain
                .position(img)
                .ok_or_else(|| Error::invalid(format!("image {img} of {k} outside the domain")))?;
            if hit[p] {
                return Err(Error::invalid("map is not injective"));
            }
            hit[p] = true;
            map.push(p);
        }
        Ok(SignedPermutation {
            domain: domain.clone(),
            map,
        })
    }

    pub(crate) fn from_parts(domain: IndexSet, map: Vec<usize>) -> Self {
        debug_assert_eq!(domain.len(), map.len());
        SignedPermutation { domain, map }
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Image of `k`; panics if `k` is outside the domain.
    pub fn apply(&self, k: i32) -> i32 {
        let p = self.domain.position(k).expect("element of the domain");
        self.domain.elements()[self.map[p]]
    }

    pub fn try_apply(&self, k: i32) -> Option<i32> {
        self.domain
            .position(k)
            .map(|p| self.domain.elements()[self.map[p]])
    }

    fn check_domain(&self, other: &SignedPermutation) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.domain.elements(),
                other.domain.elements()
            )));
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPermutation) -> Result<SignedPermutation> {
        self.check_domain(other)?;
        let map = other.map.iter().map(|&j| self.map[j]).collect();
        Ok(SignedPermutation {
            domain: self.domain.clone(),
            map,
        })
    }

    pub fn inverse(&self) -> SignedPermutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        SignedPermutation {
            domain: self.domain.clone(),
            map: inv,
        }
    }

    /// `ρ ∘ self ∘ ρ⁻¹`.
    pub fn conjugate_by(&self, rho: &SignedPermutation) -> Result<SignedPermutation> {
        rho.compose(self)?.compose(&rho.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycles in canonical form: each starts at its element of smallest
    /// `|k|` (the positive one on a tie), cycles ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<i32>> {
        let el = self.domain.elements();
        let n = el.len();
        let mut seen = vec![false; n];
        let mut out: Vec<Vec<i32>> = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(el[i]);
                i = self.map[i];
            }
            let lead = (0..cyc.len())
                .min_by_key(|&j| (cyc[j].abs(), cyc[j] < 0))
                .expect("nonempty cycle");
            cyc.rotate_left(lead);
            out.push(cyc);
        }
        out.sort_by_key(|c| (c[0].abs(), c[0] < 0));
        out
    }

    /// `#(π)`.
    pub fn cycle_count(&self) -> usize {
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = self.map[i];
            }
        }
        count
    }

    /// `|π| = |I| - #(π)`.
    pub fn length(&self) -> usize {
        self.len() - self.cycle_count()
    }

    /// The orbits as a set partition of the domain.
    pub fn orbits(&self) -> SetPartition {
        let mut uf = UnionFind::new(self.map.len());
        for (i, &j) in self.map.iter().enumerate() {
            uf.union(i, j);
        }
        SetPartition::from_labels_unchecked(self.domain.clone(), uf.labels())
    }

    /// The permutation induced on `J` by first return.
    pub fn induced(&self, subset: &IndexSet) -> Result<SignedPermutation> {
        if !subset.is_subset(&self.domain) {
            return Err(Error::invalid("induced set is not inside the domain"));
        }
        let el = self.domain.elements();
        let mut map = Vec::with_capacity(subset.len());
        for &k in subset.elements() {
            let mut i = self.map[self.domain.position(k).expect("subset")];
            while !subset.contains(el[i]) {
                i = self.map[i];
            }
            map.push(subset.position(el[i]).expect("in subset"));
        }
        Ok(SignedPermutation {
            domain: subset.clone(),
            map,
        })
    }

    /// Extend by fixed points to a larger domain.
    pub fn extend_to(&self, domain: &IndexSet) -> Result<SignedPermutation> {
        if !self.domain.is_subset(domain) {
            return Err(Error::invalid("extension domain does not contain the domain"));
        }
        SignedPermutation::from_fn(domain, |k| self.try_apply(k).unwrap_or(k))
    }

    /// `δ π δ` on `-I`.
    pub fn negate_conjugate(&self) -> SignedPermutation {
        let domain = self.domain.negated();
        SignedPermutation::from_fn(&domain, |k| -self.apply(-k)).expect("bijection")
    }

    /// `δ_ε π δ_ε`, with `δ_ε(k) = ε(|k|) k`. The domain must be closed
    /// under `δ_ε`.
    pub fn sign_conjugate(&self, eps: &EpsilonSigns) -> Result<SignedPermutation> {
        let d = |k: i32| eps.apply(k);
        for &k in self.domain.elements() {
            if eps.get(k.unsigned_abs() as usize).is_none() {
                return Err(Error::invalid(format!("no sign for {k}")));
            }
            if !self.domain.contains(d(k)) {
                return Err(Error::invalid("domain is not closed under the sign map"));
            }
        }
        SignedPermutation::from_fn(&self.domain, |k| d(self.apply(d(k))))
    }

    /// Product of two permutations on disjoint domains.
    pub fn disjoint_union(&self, other: &SignedPermutation) -> Result<SignedPermutation> {
        if self.domain.elements().iter().any(|&k| other.domain.contains(k)) {
            return Err(Error::invalid("domains overlap"));
        }
        let domain = IndexSet::new(
            self.domain
                .elements()
                .iter()
                .chain(other.domain.elements())
                .copied(),
        )?;
        SignedPermutation::from_fn(&domain, |k| {
            self.try_apply(k).unwrap_or_else(|| other.apply(k))
        })
    }

    /// Whether some orbit meets both `a` and `b`.
    pub fn connects(&self, a: &IndexSet, b: &IndexSet) -> bool {
        let orb = self.orbits();
        a.elements()
            .iter()
            .any(|&x| b.elements().iter().any(|&y| orb.same_block(x, y)))
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            let parts: Vec<String> = c.iter().map(|k| k.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for SignedPermutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.cycles().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignedPermutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cycles = Vec::<Vec<i32>>::deserialize(d)?;
        SignedPermutation::from_cycles(None, &cycles).map_err(serde::de::Error::custom)
    }
}

/// Signs `ε: [n] → {±1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpsilonSigns(Vec<i8>);

impl EpsilonSigns {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("signs must be +1 or -1"));
        }
        Ok(EpsilonSigns(signs))
    }

    pub fn all_plus(n: usize) -> Self {
        EpsilonSigns(vec![1; n])
    }

    /// `ε(k) = (-1)^k`, the sign pattern of `O^T X O` blocks.
    pub fn parity(n: usize) -> Self {
        EpsilonSigns((1..=n).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `ε(k)` for `k ∈ [n]`.
    pub fn get(&self, k: usize) -> Option<i8> {
        k.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }

    /// `δ_ε(k) = ε(|k|) k`.
    pub fn apply(&self, k: i32) -> i32 {
        k * self.get(k.unsigned_abs() as usize).unwrap_or(1) as i32
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }
}

/// A premap: a permutation of `±I` with `δπδ = π⁻¹` and no cycle holding
/// both `k` and `-k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Premap(SignedPermutation);

/// Whether `s` is a premap. Errors when the domain is not of the form `±I`.
pub fn is_premap(s: &SignedPermutation) -> Result<bool> {
    if !s.domain.is_symmetric() {
        return Err(Error::invalid("premap domain must be symmetric"));
    }
    for &k in s.domain.elements() {
        let img = s.apply(k);
        if img == -k {
            return Ok(false);
        }
        // δsδ = s⁻¹  ⇔  s(-s(k)) = -k
        if s.apply(-img) != -k {
            return Ok(false);
        }
    }
    Ok(true)
}

impl Premap {
    pub fn new(s: SignedPermutation) -> Result<Self> {
        if !is_premap(&s)? {
            return Err(Error::invalid(format!("{s} is not a premap")));
        }
        Ok(Premap(s))
    }

    /// Expand particular cycles into the full premap: each `(c1..cm)` is
    /// accompanied by `(-cm..-c1)`.
    pub fn from_particular_cycles(cycles: &[Vec<i32>]) -> Result<Self> {
        let mut all = Vec::with_capacity(cycles.len() * 2);
        for c in cycles {
            all.push(c.clone());
            all.push(c.iter().rev().map(|k| -k).collect());
        }
        let s = SignedPermutation::from_cycles(None, &all)?;
        Premap::new(s)
    }

    /// Parse cycles that either cover `±I` or list particular cycles only.
    pub fn from_cycles_or_particular(cycles: &[Vec<i32>]) -> Result<Self> {
        let s = SignedPermutation::from_cycles(None, cycles)?;
        if s.domain.is_symmetric() {
            Premap::new(s)
        } else {
            Premap::from_particular_cycles(cycles)
        }
    }

    pub fn as_perm(&self) -> &SignedPermutation {
        &self.0
    }

    pub fn into_perm(self) -> SignedPermutation {
        self.0
    }

    pub fn domain(&self) -> &IndexSet {
        &self.0.domain
    }

    pub fn apply(&self, k: i32) -> i32 {
        self.0.apply(k)
    }

    pub fn inverse(&self) -> Premap {
        Premap(self.0.inverse())
    }

    pub fn sign_conjugate(&self, eps: &EpsilonSigns) -> Result<Premap> {
        Ok(Premap(self.0.sign_conjugate(eps)?))
    }

    pub fn cycle_count(&self) -> usize {
        self.0.cycle_count()
    }

    /// `α/2`: the cycles whose element of smallest `|k|` is positive, in
    /// ascending order of that element.
    pub fn particular_cycles(&self) -> Vec<Vec<i32>> {
        self.0.cycles().into_iter().filter(|c| c[0] > 0).collect()
    }

    /// `sgn α(k) = -sgn k` for all `k`.
    pub fn is_alternating(&self) -> bool {
        self.0
            .domain
            .elements()
            .iter()
            .all(|&k| (self.apply(k) > 0) != (k > 0))
    }

    /// `λ(α)`: a row of length `m/2` for each particular cycle of length `m`.
    pub fn young(&self) -> Result<YoungDiagram> {
        if !self.is_alternating() {
            return Err(Error::invalid("premap is not alternating"));
        }
        Ok(YoungDiagram::new(
            self.particular_cycles().iter().map(|c| c.len() / 2).collect(),
        ))
    }

    /// Whether the premap joins some `k ∈ I` with some element of `-I`, for
    /// `I` a subset with `I ∩ -I = ∅` inside the domain.
    pub fn connects_to_negative(&self, half: &IndexSet) -> bool {
        self.0.connects(half, &half.negated())
    }
}

impl fmt::Display for Premap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Premap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Premap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Premap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cycles = Vec::<Vec<i32>>::deserialize(d)?;
        Premap::from_cycles_or_particular(&cycles).map_err(serde::de::Error::custom)
    }
}

/// `π₋ δ π₊`, the alternating premap of a pair of pairings of a positive set.
pub fn pairings_to_premap(p_plus: &Pairing, p_minus: &Pairing) -> Result<Premap> {
    if p_plus.ground() != p_minus.ground() {
        return Err(Error::GroundMismatch);
    }
    let ground = p_plus.ground();
    if ground.elements().iter().any(|&k| k < 0) {
        return Err(Error::invalid("pairings must live on positive integers"));
    }
    let sym = IndexSet::symmetric(ground)?;
    let s = SignedPermutation::from_fn(&sym, |k| {
        if k > 0 {
            -p_plus.partner(k).expect("paired")
        } else {
            p_minus.partner(-k).expect("paired")
        }
    })?;
    Ok(Premap(s))
}

/// Inverse of [`pairings_to_premap`]: `π₊(k) = -α(k)`, `π₋(k) = α(-k)`.
pub fn premap_to_pairings(a: &Premap) -> Result<(Pairing, Pairing)> {
    if !a.is_alternating() {
        return Err(Error::invalid("premap is not alternating"));
    }
    let pos = a.domain().positive_part();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for &k in pos.elements() {
        let p = -a.apply(k);
        let m = a.apply(-k);
        if k < p {
            plus.push((k, p));
        }
        if k < m {
            minus.push((k, m));
        }
    }
    Ok((Pairing::from_pairs(&plus)?, Pairing::from_pairs(&minus)?))
}

/// `φ₊` and `φ₋` as permutations of `±I`.
pub fn phi_plus_minus(phi: &SignedPermutation) -> Result<(SignedPermutation, SignedPermutation)> {
    let dom = phi.domain();
    if dom.elements().iter().any(|&k| dom.contains(-k)) {
        return Err(Error::invalid("φ must act on a set disjoint from its negative"));
    }
    let sym = IndexSet::new(dom.elements().iter().flat_map(|&k| [k, -k]))?;
    let plus = phi.extend_to(&sym)?;
    let minus = phi.negate_conjugate().extend_to(&sym)?;
    Ok((plus, minus))
}

fn check_k_domains(phi: &SignedPermutation, a: &Premap) -> Result<()> {
    let sym = IndexSet::new(phi.domain().elements().iter().flat_map(|&k| [k, -k]))?;
    if &sym != a.domain() {
        return Err(Error::DomainMismatch(
            "premap must act on ±(domain of φ)".to_string(),
        ));
    }
    Ok(())
}

/// `K(φ, α) = φ₊⁻¹ α⁻¹ φ₋`.
pub fn k_map(phi: &SignedPermutation, a: &Premap) -> Result<Premap> {
    check_k_domains(phi, a)?;
    let (plus, minus) = phi_plus_minus(phi)?;
    let k = plus.inverse().compose(&a.0.inverse())?.compose(&minus)?;
    Ok(Premap(k))
}

/// `K(φ, α)⁻¹ = φ₋⁻¹ α φ₊`.
pub fn k_inverse(phi: &SignedPermutation, a: &Premap) -> Result<Premap> {
    check_k_domains(phi, a)?;
    let (plus, minus) = phi_plus_minus(phi)?;
    let k = minus.inverse().compose(&a.0)?.compose(&plus)?;
    Ok(Premap(k))
}

/// `χ(φ, α) = #(φ₊φ₋⁻¹)/2 + #(α)/2 + #(K(φ,α))/2 - |I|`.
pub fn euler_characteristic(phi: &SignedPermutation, a: &Premap) -> Result<i64> {
    let (plus, minus) = phi_plus_minus(phi)?;
    let faces = plus.compose(&minus.inverse())?.cycle_count();
    let k = k_map(phi, a)?;
    let total = faces + a.cycle_count() + k.cycle_count();
    debug_assert!(total.is_multiple_of(2));
    Ok(total as i64 / 2 - phi.len() as i64)
}

/// All premaps on `±I`, grouped by the partition of `I` into the absolute
/// values of particular cycles.
pub fn enumerate_premaps(positive: &IndexSet, cap: usize) -> Result<Vec<Premap>> {
    let mut out = Vec::new();
    for part in enumerate_partitions_capped(positive, cap)? {
        let blocks = part.blocks();
        let options: Vec<Vec<Vec<i32>>> = blocks.iter().map(|b| signed_cyclic_orders(b)).collect();
        let radices: Vec<usize> = options.iter().map(|o| o.len()).collect();
        let mut choice = vec![0usize; blocks.len()];
        loop {
            let cycles: Vec<Vec<i32>> = options
                .iter()
                .zip(&choice)
                .map(|(o, &c)| o[c].clone())
                .collect();
            out.push(Premap::from_particular_cycles(&cycles)?);
            if !advance_odometer(&mut choice, &radices) {
                break;
            }
        }
    }
    Ok(out)
}

/// Particular cycles on a block: the minimum first and positive, the rest
/// in every order and with every sign.
fn signed_cyclic_orders(block: &[i32]) -> Vec<Vec<i32>> {
    let first = block[0];
    let rest = &block[1..];
    let mut out = Vec::new();
    let mut perm: Vec<i32> = rest.to_vec();
    let mut orders = Vec::new();
    permutations(&mut perm, 0, &mut orders);
    for ord in orders {
        for mask in 0u32..(1 << ord.len()) {
            let mut c = vec![first];
            for (i, &k) in ord.iter().enumerate() {
                c.push(if mask >> i & 1 == 1 { -k } else { k });
            }
            out.push(c);
        }
    }
    out
}

fn permutations(v: &mut Vec<i32>, k: usize, out: &mut Vec<Vec<i32>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

/// All permutations of a domain, in a fixed order.
pub fn all_permutations(domain: &IndexSet) -> Vec<SignedPermutation> {
    let mut imgs = Vec::new();
    let mut v: Vec<i32> = (0..domain.len() as i32).collect();
    permutations(&mut v, 0, &mut imgs);
    imgs.sort();
    imgs.into_iter()
        .map(|m| {
            SignedPermutation::from_parts(domain.clone(), m.into_iter().map(|x| x as usize).collect())
        })
        .collect()
}

/// All alternating premaps on `±I`, in pairing-pair order.
pub fn enumerate_alt_premaps(positive: &IndexSet) -> Result<Vec<Premap>> {
    let pairings: Vec<Pairing> = enumerate_pairings(positive).collect();
    let mut out = Vec::with_capacity(pairings.len() * pairings.len());
    for p in &pairings {
        for m in &pairings {
            out.push(pairings_to_premap(p, m)?);
        }
    }
    Ok(out)
}
