//! Disc and annular noncrossing conditions for permutations relative to a
//! boundary permutation with one or two cycles, in definitional form and
//! via the cycle-count characterizations.

use crate::error::{Error, Result};
use crate::perm::{phi_plus_minus, Premap, SignedPermutation};
use crate::setpart::IndexSet;

/// Cycle membership and cyclic position of every domain element.
struct CycleInfo {
    domain: IndexSet,
    cycle: Vec<usize>,
    pos: Vec<usize>,
    len: Vec<usize>,
    cycles: Vec<Vec<i32>>,
}

impl CycleInfo {
    fn new(p: &SignedPermutation) -> Self {
        let cycles = p.cycles();
        let n = p.len();
        let (mut cycle, mut pos, mut len) = (vec![0; n], vec![0; n], vec![0; n]);
        for (ci, c) in cycles.iter().enumerate() {
            for (j, &k) in c.iter().enumerate() {
                let i = p.domain().position(k).expect("in domain");
                cycle[i] = ci;
                pos[i] = j;
                len[i] = c.len();
            }
        }
        CycleInfo {
            domain: p.domain().clone(),
            cycle,
            pos,
            len,
            cycles,
        }
    }

    fn idx(&self, k: i32) -> usize {
        self.domain.position(k).expect("in domain")
    }

    fn same(&self, a: i32, b: i32) -> bool {
        self.cycle[self.idx(a)] == self.cycle[self.idx(b)]
    }

    /// Distance from `a` forward to `b` along their common cycle.
    fn dist(&self, a: i32, b: i32) -> usize {
        let (ia, ib) = (self.idx(a), self.idx(b));
        (self.pos[ib] + self.len[ia] - self.pos[ia]) % self.len[ia]
    }

    /// The restriction to the listed elements is the cycle in this order.
    fn restricts_to_cycle(&self, elems: &[i32]) -> bool {
        let a = elems[0];
        if elems.iter().any(|&e| !self.same(a, e)) {
            return false;
        }
        let d: Vec<usize> = elems.iter().map(|&e| self.dist(a, e)).collect();
        d.windows(2).all(|w| w[0] < w[1])
    }
}

fn check_same_domain(phi: &SignedPermutation, a: &SignedPermutation) -> Result<()> {
    if phi.domain() != a.domain() {
        return Err(Error::DomainMismatch(format!(
            "boundary on {:?}, permutation on {:?}",
            phi.domain().elements(),
            a.domain().elements()
        )));
    }
    Ok(())
}

fn check_one_cycle(phi: &SignedPermutation) -> Result<()> {
    if phi.cycle_count() != 1 {
        return Err(Error::invalid(format!("{phi} is not a single cycle")));
    }
    Ok(())
}

/// `a, b, c` distinct with `φ|_{a,b,c} = (a,b,c) = α|_{a,b,c}`.
fn has_nonstandard_triple(phi: &CycleInfo, alpha: &CycleInfo) -> bool {
    for c in &alpha.cycles {
        for (i, &a) in c.iter().enumerate() {
            for (j, &b) in c.iter().enumerate().skip(i + 1) {
                for &cc in &c[j + 1..] {
                    // α order is (a, b, cc) by position
                    if phi.restricts_to_cycle(&[a, b, cc]) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// `α|_{a,b,c,d} = (a,c)(b,d)` for some `a, c` and `b, d` taken from two
/// distinct cycles, with `boundary` accepting the order `(a,b,c,d)`.
fn has_crossing_quad(cycles: &[Vec<i32>], boundary: impl Fn(&[i32]) -> bool) -> bool {
    for (i, c1) in cycles.iter().enumerate() {
        for c2 in &cycles[i + 1..] {
            for &a in c1 {
                for &c in c1 {
                    if a == c {
                        continue;
                    }
                    for &b in c2 {
                        for &d in c2 {
                            if b != d && boundary(&[a, b, c, d]) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// There are `a, b, c` with `φ|_{a,b,c} = α|_{a,b,c} = (a,b,c)`.
pub fn is_disc_nonstandard(phi: &SignedPermutation, a: &SignedPermutation) -> Result<bool> {
    check_same_domain(phi, a)?;
    check_one_cycle(phi)?;
    Ok(has_nonstandard_triple(&CycleInfo::new(phi), &CycleInfo::new(a)))
}

/// There are `a, b, c, d` with `φ|_{a,b,c,d} = (a,b,c,d)` but
/// `α|_{a,b,c,d} = (a,c)(b,d)`.
pub fn is_disc_crossing(phi: &SignedPermutation, a: &SignedPermutation) -> Result<bool> {
    check_same_domain(phi, a)?;
    check_one_cycle(phi)?;
    let p = CycleInfo::new(phi);
    Ok(has_crossing_quad(&CycleInfo::new(a).cycles, |q| p.restricts_to_cycle(q)))
}

/// Neither disc nonstandard nor disc crossing.
pub fn is_disc_noncrossing(phi: &SignedPermutation, a: &SignedPermutation) -> Result<bool> {
    Ok(!is_disc_nonstandard(phi, a)? && !is_disc_crossing(phi, a)?)
}

/// `#(α) + #(φ⁻¹α⁻¹) = |I| + 1`.
pub fn biane_criterion(phi: &SignedPermutation, a: &SignedPermutation) -> Result<bool> {
    check_same_domain(phi, a)?;
    check_one_cycle(phi)?;
    let k = phi.inverse().compose(&a.inverse())?;
    Ok(a.cycle_count() + k.cycle_count() == a.len() + 1)
}

/// A boundary permutation with two cycles of at least two elements each.
#[derive(Clone, Debug)]
pub struct AnnularFrame {
    phi: SignedPermutation,
    ext: Vec<i32>,
    int: Vec<i32>,
}

impl AnnularFrame {
    /// The cycle through the first domain element is `φ_ext`.
    pub fn new(phi: SignedPermutation) -> Result<Self> {
        let cycles = phi.cycles();
        if cycles.len() != 2 {
            return Err(Error::invalid(format!("{phi} does not have exactly two cycles")));
        }
        if cycles.iter().any(|c| c.len() < 2) {
            return Err(Error::invalid(format!("{phi} has a cycle with fewer than two elements")));
        }
        let first = phi.domain().elements()[0];
        let (ext, int) = if cycles[0].contains(&first) {
            (cycles[0].clone(), cycles[1].clone())
        } else {
            (cycles[1].clone(), cycles[0].clone())
        };
        Ok(AnnularFrame { phi, ext, int })
    }

    pub fn phi(&self) -> &SignedPermutation {
        &self.phi
    }

    pub fn ext(&self) -> &[i32] {
        &self.ext
    }

    pub fn int(&self) -> &[i32] {
        &self.int
    }

    /// `λ_{x,y}` on `I ∖ {x, y}`: `φ⁻¹(x) ↦ φ(y)`, `φ⁻¹(y) ↦ φ(x)`, and `φ`
    /// elsewhere. It is a single cycle.
    pub fn lambda(&self, x: i32, y: i32) -> Result<SignedPermutation> {
        if !self.ext.contains(&x) || !self.int.contains(&y) {
            return Err(Error::invalid(format!("need x in φ_ext and y in φ_int, got {x}, {y}")));
        }
        let rest = IndexSet::new(self.phi.domain().elements().iter().copied().filter(|&k| k != x && k != y))?;
        let (px, py) = (self.phi.inverse().apply(x), self.phi.inverse().apply(y));
        let (fx, fy) = (self.phi.apply(x), self.phi.apply(y));
        SignedPermutation::from_fn(&rest, |k| {
            if k == px {
                fy
            } else if k == py {
                fx
            } else {
                self.phi.apply(k)
            }
        })
    }
}

fn frame_domain_check(frame: &AnnularFrame, a: &SignedPermutation) -> Result<()> {
    check_same_domain(&frame.phi, a)
}

/// Nonstandard condition 1 (a three-cycle in the same order as `φ`) or
/// condition 2 (`φ|_{a,b,c,d} = (a,b)(c,d)` but `α|_{a,b,c,d} = (a,c,b,d)`).
pub fn is_annular_nonstandard(frame: &AnnularFrame, a: &SignedPermutation) -> Result<bool> {
    frame_domain_check(frame, a)?;
    let p = CycleInfo::new(&frame.phi);
    let al = CycleInfo::new(a);
    if has_nonstandard_triple(&p, &al) {
        return Ok(true);
    }
    for c in &al.cycles {
        for &x in c {
            for &y in c {
                for &z in c {
                    for &w in c {
                        let q = [x, z, y, w];
                        if distinct(&q)
                            && al.restricts_to_cycle(&q)
                            && p.same(x, y)
                            && p.same(z, w)
                            && !p.same(x, z)
                        {
                            return Ok(true);
                        }
                    }
                }
            }
        }
    }
    Ok(false)
}

fn distinct(v: &[i32]) -> bool {
    v.iter().enumerate().all(|(i, a)| !v[i + 1..].contains(a))
}

/// Any of the three annular crossing conditions.
pub fn is_annular_crossing(frame: &AnnularFrame, a: &SignedPermutation) -> Result<bool> {
    frame_domain_check(frame, a)?;
    let p = CycleInfo::new(&frame.phi);
    let al = CycleInfo::new(a);
    if has_crossing_quad(&al.cycles, |q| p.restricts_to_cycle(q)) {
        return Ok(true);
    }
    for &x in &frame.ext {
        for &y in &frame.int {
            // α|_{..,x,y} contains the 2-cycle (x,y): they share an α-cycle
            // and the other named points lie elsewhere.
            if !al.same(x, y) {
                continue;
            }
            let lam = CycleInfo::new(&frame.lambda(x, y)?);
            let xc = al.cycle[al.idx(x)];
            // condition 2
            for (ci, c) in al.cycles.iter().enumerate() {
                if ci == xc {
                    continue;
                }
                for (i, &u) in c.iter().enumerate() {
                    for (j, &v) in c.iter().enumerate().skip(i + 1) {
                        for &w in &c[j + 1..] {
                            if lam.restricts_to_cycle(&[u, v, w]) {
                                return Ok(true);
                            }
                        }
                    }
                }
            }
            // condition 3
            let others: Vec<Vec<i32>> = al
                .cycles
                .iter()
                .enumerate()
                .filter(|(ci, _)| *ci != xc)
                .map(|(_, c)| c.clone())
                .collect();
            if has_crossing_quad(&others, |q| lam.restricts_to_cycle(q)) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Connected, annular standard and not annular crossing: membership in
/// the connected annular-noncrossing set. A non-connecting `α` is not a
/// member.
pub fn is_annular_noncrossing(frame: &AnnularFrame, a: &SignedPermutation) -> Result<bool> {
    frame_domain_check(frame, a)?;
    if !connects_frame(frame, a)? {
        return Ok(false);
    }
    Ok(!is_annular_nonstandard(frame, a)? && !is_annular_crossing(frame, a)?)
}

pub fn connects_frame(frame: &AnnularFrame, a: &SignedPermutation) -> Result<bool> {
    Ok(a.connects(&IndexSet::new(frame.ext.iter().copied())?, &IndexSet::new(frame.int.iter().copied())?))
}

/// `#(α) + #(φ⁻¹α⁻¹) = |I|`, for `α` connecting the two cycles.
pub fn mingo_nica_criterion(frame: &AnnularFrame, a: &SignedPermutation) -> Result<bool> {
    frame_domain_check(frame, a)?;
    if !connects_frame(frame, a)? {
        return Err(Error::invalid(format!("{a} does not connect the cycles of {}", frame.phi)));
    }
    let k = frame.phi.inverse().compose(&a.inverse())?;
    Ok(a.cycle_count() + k.cycle_count() == a.len())
}

/// For a one-cycle `φ` on `I` and a premap on `±I`: `α` does not connect
/// `I` with `-I` and `α|_I` is disc noncrossing.
pub fn premap_chi2_disc(phi: &SignedPermutation, a: &Premap) -> Result<bool> {
    check_one_cycle(phi)?;
    let pos = phi.domain();
    if a.domain() != &IndexSet::symmetric(pos)? {
        return Err(Error::DomainMismatch(format!("premap is not on ±{:?}", pos.elements())));
    }
    if a.as_perm().connects(pos, &pos.negated()) {
        return Ok(false);
    }
    is_disc_noncrossing(phi, &a.as_perm().induced(pos)?)
}

/// For `φ` with orbits `V₁, V₂` and a premap connecting `±V₁` with `±V₂`:
/// for some sign `ε`, `α` does not connect `S = V₁ ∪ εV₂` with `-S`, and
/// `α|_S` is connected annular noncrossing relative to `φ₊φ₋⁻¹|_S`.
pub fn premap_chi2_annular(phi: &SignedPermutation, a: &Premap) -> Result<bool> {
    let cycles = phi.cycles();
    if cycles.len() != 2 {
        return Err(Error::invalid(format!("{phi} does not have exactly two cycles")));
    }
    let full = IndexSet::symmetric(phi.domain())?;
    if a.domain() != &full {
        return Err(Error::DomainMismatch(format!("premap is not on ±{:?}", phi.domain().elements())));
    }
    let v1: Vec<i32> = cycles[0].clone();
    let v2: Vec<i32> = cycles[1].clone();
    let pm = |v: &[i32]| IndexSet::new(v.iter().flat_map(|&k| [k, -k]));
    if !a.as_perm().connects(&pm(&v1)?, &pm(&v2)?) {
        return Err(Error::invalid(format!("{a} does not connect ±V₁ and ±V₂")));
    }
    let (pp, pmi) = phi_plus_minus(phi)?;
    let boundary = pp.compose(&pmi.inverse())?;
    for eps in [1, -1] {
        let s = IndexSet::new(v1.iter().copied().chain(v2.iter().map(|&k| eps * k)))?;
        if a.as_perm().connects(&s, &s.negated()) {
            continue;
        }
        let frame = AnnularFrame::new(boundary.induced(&s)?)?;
        if is_annular_noncrossing(&frame, &a.as_perm().induced(&s)?)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All `k` with `α⁻¹(k) = φ(k)`.
pub fn phi_neighbors(phi: &SignedPermutation, a: &SignedPermutation) -> Result<Vec<i32>> {
    check_same_domain(phi, a)?;
    let inv = a.inverse();
    Ok(phi
        .domain()
        .elements()
        .iter()
        .copied()
        .filter(|&k| inv.apply(k) == phi.apply(k))
        .collect())
}

/// Some `k` with `α⁻¹(k) = φ(k)` when the neighbour lemmas apply: for a
/// one-cycle `φ`, `α` disc noncrossing without fixed points; for a
/// two-cycle `φ`, `α` annular standard and not crossing without fixed
/// points, with two points sharing both a `φ`-cycle and an `α`-cycle.
/// Otherwise `None`.
pub fn find_phi_neighbor(phi: &SignedPermutation, a: &SignedPermutation) -> Result<Option<i32>> {
    check_same_domain(phi, a)?;
    let fixed_free = a.domain().elements().iter().all(|&k| a.apply(k) != k);
    if !fixed_free {
        return Ok(None);
    }
    let applies = match phi.cycle_count() {
        1 => is_disc_noncrossing(phi, a)?,
        2 => {
            let frame = AnnularFrame::new(phi.clone())?;
            let pi = CycleInfo::new(phi);
            let ai = CycleInfo::new(a);
            let els = phi.domain().elements();
            let shared = els.iter().enumerate().any(|(i, &x)| {
                els[i + 1..].iter().any(|&y| pi.same(x, y) && ai.same(x, y))
            });
            shared && !is_annular_nonstandard(&frame, a)? && !is_annular_crossing(&frame, a)?
        }
        _ => false,
    };
    if !applies {
        return Ok(None);
    }
    Ok(phi_neighbors(phi, a)?.first().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, enumerate_premaps, euler_characteristic};
    use crate::weingarten::catalan;

    fn perm(dom: &IndexSet, cycles: &[&[i32]]) -> SignedPermutation {
        let c: Vec<Vec<i32>> = cycles.iter().map(|c| c.to_vec()).collect();
        SignedPermutation::from_cycles(Some(dom), &c).unwrap()
    }

    fn long_cycle(n: usize) -> SignedPermutation {
        let dom = IndexSet::range(n);
        let c: Vec<i32> = (1..=n as i32).collect();
        SignedPermutation::from_cycles(Some(&dom), &[c]).unwrap()
    }

    fn two_cycles(p: usize, q: usize) -> SignedPermutation {
        let dom = IndexSet::range(p + q);
        let a: Vec<i32> = (1..=p as i32).collect();
        let b: Vec<i32> = (p as i32 + 1..=(p + q) as i32).collect();
        SignedPermutation::from_cycles(Some(&dom), &[a, b]).unwrap()
    }

    #[test]
    fn disc_examples() {
        let d3 = IndexSet::range(3);
        let phi = long_cycle(3);
        assert!(is_disc_nonstandard(&phi, &perm(&d3, &[&[1, 2, 3]])).unwrap());
        assert!(!is_disc_nonstandard(&phi, &perm(&d3, &[&[1, 3, 2]])).unwrap());
        assert!(!is_disc_nonstandard(&phi, &SignedPermutation::identity(&d3)).unwrap());
        let d4 = IndexSet::range(4);
        let phi4 = long_cycle(4);
        let cross = perm(&d4, &[&[1, 3], &[2, 4]]);
        assert!(!is_disc_noncrossing(&phi4, &cross).unwrap());
        assert!(!biane_criterion(&phi4, &cross).unwrap());
        assert!(is_disc_noncrossing(&phi4, &SignedPermutation::identity(&d4)).unwrap());
        assert!(biane_criterion(&phi4, &SignedPermutation::identity(&d4)).unwrap());
        assert!(is_disc_noncrossing(&two_cycles(2, 2), &cross).is_err());
    }

    #[test]
    fn biane_agrees_exhaustively() {
        for n in 1..=6 {
            let phi = long_cycle(n);
            let mut count = 0u64;
            for a in all_permutations(phi.domain()) {
                let def = is_disc_noncrossing(&phi, &a).unwrap();
                assert_eq!(def, biane_criterion(&phi, &a).unwrap(), "{phi} {a}");
                count += def as u64;
            }
            assert_eq!(num_bigint::BigInt::from(count), catalan(n));
        }
    }

    #[test]
    fn annular_examples() {
        let frame = AnnularFrame::new(two_cycles(2, 2)).unwrap();
        let d = IndexSet::range(4);
        let spoke = perm(&d, &[&[1, 3], &[2, 4]]);
        assert!(is_annular_noncrossing(&frame, &spoke).unwrap());
        assert!(mingo_nica_criterion(&frame, &spoke).unwrap());
        let twisted = perm(&d, &[&[1, 3, 2, 4]]);
        assert!(is_annular_nonstandard(&frame, &twisted).unwrap());
        assert!(!is_annular_noncrossing(&frame, &twisted).unwrap());
        assert!(!mingo_nica_criterion(&frame, &twisted).unwrap());
        let apart = perm(&d, &[&[1, 2], &[3, 4]]);
        assert!(!is_annular_noncrossing(&frame, &apart).unwrap());
        assert!(mingo_nica_criterion(&frame, &apart).is_err());
        assert!(AnnularFrame::new(long_cycle(4)).is_err());
        assert!(AnnularFrame::new(two_cycles(1, 3)).is_err());
    }

    #[test]
    fn lambda_is_one_cycle() {
        let frame = AnnularFrame::new(two_cycles(3, 2)).unwrap();
        let lam = frame.lambda(2, 5).unwrap();
        assert_eq!(lam.cycle_count(), 1);
        assert_eq!(lam.apply(1), 4);
        assert_eq!(lam.apply(4), 3);
        assert!(frame.lambda(5, 2).is_err());
    }

    #[test]
    fn mingo_nica_agrees_up_to_six() {
        for (p, q) in [(2, 2), (2, 3), (3, 3), (2, 4)] {
            let frame = AnnularFrame::new(two_cycles(p, q)).unwrap();
            for a in all_permutations(frame.phi().domain()) {
                if !connects_frame(&frame, &a).unwrap() {
                    continue;
                }
                assert_eq!(
                    is_annular_noncrossing(&frame, &a).unwrap(),
                    mingo_nica_criterion(&frame, &a).unwrap(),
                    "{} {a}",
                    frame.phi()
                );
            }
        }
    }

    #[test]
    fn unoriented_disc_matches_euler() {
        for n in 1..=4 {
            let phi = long_cycle(n);
            for a in enumerate_premaps(phi.domain(), 8).unwrap() {
                let chi = euler_characteristic(&phi, &a).unwrap();
                assert_eq!(premap_chi2_disc(&phi, &a).unwrap(), chi == 2, "{a}");
            }
        }
        let phi = long_cycle(2);
        let twist = Premap::from_particular_cycles(&[vec![1, -2]]).unwrap();
        assert!(!premap_chi2_disc(&phi, &twist).unwrap());
        assert!(euler_characteristic(&phi, &twist).unwrap() < 2);
    }

    #[test]
    fn unoriented_annulus_matches_euler() {
        for (p, q) in [(2, 2), (3, 2)] {
            let phi = two_cycles(p, q);
            let v1 = IndexSet::new((1..=p as i32).flat_map(|k| [k, -k])).unwrap();
            let v2 = IndexSet::new((p as i32 + 1..=(p + q) as i32).flat_map(|k| [k, -k])).unwrap();
            let (mut hits, mut low) = (0, 0);
            for a in enumerate_premaps(phi.domain(), 10).unwrap() {
                if !a.as_perm().connects(&v1, &v2) {
                    continue;
                }
                let chi = euler_characteristic(&phi, &a).unwrap();
                let pred = premap_chi2_annular(&phi, &a).unwrap();
                assert_eq!(pred, chi == 2, "{a} χ = {chi}");
                hits += pred as usize;
                low += (chi <= 0) as usize;
            }
            assert!(hits > 0 && low > 0);
        }
        let phi = two_cycles(2, 2);
        let spoke = Premap::from_particular_cycles(&[vec![1, -3], vec![2, -4]]).unwrap();
        assert_eq!(euler_characteristic(&phi, &spoke).unwrap(), 2);
        assert!(premap_chi2_annular(&phi, &spoke).unwrap());
    }

    #[test]
    fn neighbor_examples() {
        let d4 = IndexSet::range(4);
        let phi = long_cycle(4);
        let a = perm(&d4, &[&[1, 2], &[3, 4]]);
        assert_eq!(phi_neighbors(&phi, &a).unwrap(), vec![1, 3]);
        assert_eq!(find_phi_neighbor(&phi, &a).unwrap(), Some(1));
        assert_eq!(find_phi_neighbor(&phi, &SignedPermutation::identity(&d4)).unwrap(), None);
    }

    #[test]
    fn neighbor_lemmas_exhaustive() {
        let phi = long_cycle(5);
        for a in all_permutations(phi.domain()) {
            if find_phi_neighbor(&phi, &a).unwrap().is_some() {
                assert!(phi_neighbors(&phi, &a).unwrap().len() >= 2, "{a}");
            } else if is_disc_noncrossing(&phi, &a).unwrap()
                && a.domain().elements().iter().all(|&k| a.apply(k) != k)
            {
                panic!("no neighbour for {a}");
            }
        }
        for (p, q) in [(3, 3), (2, 4)] {
            let phi = two_cycles(p, q);
            let frame = AnnularFrame::new(phi.clone()).unwrap();
            for a in all_permutations(phi.domain()) {
                let fixed_free = a.domain().elements().iter().all(|&k| a.apply(k) != k);
                let standard = !is_annular_nonstandard(&frame, &a).unwrap()
                    && !is_annular_crossing(&frame, &a).unwrap();
                let found = find_phi_neighbor(&phi, &a).unwrap();
                if let Some(k) = found {
                    assert_eq!(a.inverse().apply(k), phi.apply(k));
                } else if fixed_free && standard {
                    // the lemma needs a pair sharing both cycles
                    let els = phi.domain().elements();
                    let shared = els.iter().any(|&x| {
                        els.iter().any(|&y| x != y && frame.ext().contains(&x) == frame.ext().contains(&y)
                            && a.connects(&IndexSet::new([x]).unwrap(), &IndexSet::new([y]).unwrap()))
                    });
                    assert!(!shared, "no neighbour for {a}");
                }
            }
        }
    }
}
