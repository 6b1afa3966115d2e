//! Integer polynomials in the dimension `N` and reduced fractions of them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense integer polynomial, coefficients from the constant term upward.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly(Vec<BigInt>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: BigInt) -> Self {
        Poly::new(vec![c])
    }

    /// `N^k`.
    pub fn monomial(k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = BigInt::one();
        Poly(v)
    }

    /// `N - r`.
    pub fn linear(r: i64) -> Self {
        Poly::from_i64s(&[-r, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.0
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }

    /// gcd of the coefficients, nonnegative.
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect())
    }

    /// Divide every coefficient by `k`, which must divide them all.
    pub fn div_scalar_exact(&self, k: &BigInt) -> Poly {
        Poly::new(self.0.iter().map(|c| c / k).collect())
    }

    /// Content removed and leading coefficient made positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        self.div_scalar_exact(&c)
    }

    /// Pseudo-remainder of `self` by `d`.
    fn pseudo_rem(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("nonzero divisor");
        let lc = d.leading();
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            let rl = r.leading();
            let mut coeffs: Vec<BigInt> = r.0.iter().map(|c| c * &lc).collect();
            for (i, c) in d.0.iter().enumerate() {
                coeffs[i + shift] -= c * &rl;
            }
            r = Poly::new(coeffs);
        }
        r
    }

    /// Primitive gcd over `Z[N]` with positive leading coefficient.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.primitive();
        }
        if other.is_zero() {
            return self.primitive();
        }
        let cont = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive(), other.primitive());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive().scale(&cont)
    }

    /// Exact quotient `self / d`; the caller guarantees divisibility over Z.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("nonzero divisor");
        let lc = d.leading();
        let Some(sd) = self.degree() else {
            return Poly::default();
        };
        if sd < dd {
            return Poly::default();
        }
        let mut r = self.0.clone();
        let mut q = vec![BigInt::zero(); sd - dd + 1];
        for i in (0..=sd - dd).rev() {
            let c = &r[i + dd] / &lc;
            for (j, dc) in d.0.iter().enumerate() {
                r[i + j] -= &c * dc;
            }
            q[i] = c;
        }
        debug_assert!(r.iter().all(|c| c.is_zero()), "inexact polynomial division");
        Poly::new(q)
    }

    /// Multiplicity of `N - r` as a factor.
    fn root_multiplicity(&self, r: &BigInt) -> usize {
        let mut p = self.clone();
        let lin = Poly::new(vec![-r.clone(), BigInt::one()]);
        let mut m = 0;
        while !p.is_zero() && p.eval(r).is_zero() {
            p = p.div_exact(&lin);
            m += 1;
        }
        m
    }

    /// Lowest power of `N` dividing the polynomial.
    fn low_order(&self) -> usize {
        self.0.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    fn shift_down(&self, k: usize) -> Poly {
        Poly::new(self.0[k..].to_vec())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).cloned().unwrap_or_default();
            let b = o.0.get(i).cloned().unwrap_or_default();
            v.push(a + b);
        }
        Poly::new(v)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::default();
        }
        let mut v = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

fn poly_term(c: &BigInt, k: usize, first: bool) -> String {
    let mut s = String::new();
    let neg = c.is_negative();
    let mag = c.abs();
    if first {
        if neg {
            s.push('-');
        }
    } else {
        s.push(if neg { '-' } else { '+' });
    }
    let var = match k {
        0 => String::new(),
        1 => "N".to_string(),
        _ => format!("N^{k}"),
    };
    if var.is_empty() {
        s.push_str(&mag.to_string());
    } else if mag.is_one() {
        s.push_str(&var);
    } else {
        s.push_str(&format!("{mag}*{var}"));
    }
    s
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            write!(f, "{}", poly_term(c, k, first))?;
            first = false;
        }
        Ok(())
    }
}

/// A reduced fraction of integer polynomials in `N`. The numerator and
/// denominator share no polynomial factor, their coefficients have joint
/// content 1, and the denominator's leading coefficient is positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyFrac {
    num: Poly,
    den: Poly,
}

impl PolyFrac {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return PolyFrac {
                num,
                den: Poly::constant(BigInt::one()),
            };
        }
        let g = num.gcd(&den).primitive();
        let (mut num, mut den) = if g.degree().unwrap_or(0) > 0 {
            (num.div_exact(&g), den.div_exact(&g))
        } else {
            (num, den)
        };
        let mut c = num.content().gcd(&den.content());
        if den.leading().is_negative() {
            c = -c;
        }
        if !c.is_one() {
            num = num.div_scalar_exact(&c);
            den = den.div_scalar_exact(&c);
        }
        PolyFrac { num, den }
    }

    pub fn from_poly(p: Poly) -> Self {
        PolyFrac {
            num: p,
            den: Poly::constant(BigInt::one()),
        }
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(Poly::constant(BigInt::from(c)))
    }

    /// `N^k` for any integer `k`.
    pub fn power_of_n(k: i64) -> Self {
        if k >= 0 {
            Self::from_poly(Poly::monomial(k as usize))
        } else {
            PolyFrac {
                num: Poly::constant(BigInt::one()),
                den: Poly::monomial((-k) as usize),
            }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg num - deg den`, the growth order as `N → ∞`.
    pub fn order(&self) -> Option<i64> {
        Some(self.num.degree()? as i64 - self.den.degree()? as i64)
    }

    /// `lim_{N→∞}`; `None` when the fraction grows without bound.
    pub fn limit(&self) -> Option<BigRational> {
        match self.order() {
            None => Some(BigRational::zero()),
            Some(o) if o < 0 => Some(BigRational::zero()),
            Some(0) => Some(BigRational::new(self.num.leading(), self.den.leading())),
            Some(_) => None,
        }
    }

    /// Leading term `c N^k` as `N → ∞`.
    pub fn leading_term(&self) -> Option<(BigRational, i64)> {
        let o = self.order()?;
        Some((BigRational::new(self.num.leading(), self.den.leading()), o))
    }

    /// Exact value at an integer `N`.
    pub fn eval(&self, n: &BigInt) -> Result<BigRational> {
        let d = self.den.eval(n);
        if d.is_zero() {
            return Err(Error::Pole {
                at: n.clone(),
                factor: format!("(N{})", signed_offset(&-n)),
                context: Some(self.to_string()),
            });
        }
        Ok(BigRational::new(self.num.eval(n), d))
    }

    pub fn eval_i64(&self, n: i64) -> Result<BigRational> {
        self.eval(&BigInt::from(n))
    }

    pub fn eval_f64(&self, n: i64) -> Result<f64> {
        Ok(self.eval_i64(n)?.to_f64().unwrap_or(f64::NAN))
    }

    /// `N^k · self`.
    pub fn mul_power_of_n(&self, k: i64) -> PolyFrac {
        self * &PolyFrac::power_of_n(k)
    }

    /// Integer roots of the denominator, i.e. the dimensions where this
    /// value is undefined.
    pub fn poles(&self) -> Vec<BigInt> {
        let (_, factors, _) = factor_integer_roots(&self.den);
        let mut out: Vec<BigInt> = factors.into_iter().map(|(r, _)| r).collect();
        if self.den.low_order() > 0 {
            out.push(BigInt::zero());
        }
        out.sort();
        out
    }
}

fn signed_offset(c: &BigInt) -> String {
    if c.is_negative() {
        format!("-{}", c.abs())
    } else {
        format!("+{c}")
    }
}

/// Candidate integer roots: divisors of the constant term up to a bound.
fn integer_root_candidates(c0: &BigInt) -> Vec<BigInt> {
    let c0 = c0.abs();
    let mut out = Vec::new();
    let limit = c0.to_u64().map_or(10_000, |c| c.min(10_000));
    for d in 1..=limit {
        if (&c0 % d).is_zero() {
            out.push(BigInt::from(d));
            out.push(-BigInt::from(d));
        }
    }
    out
}

/// Split `p = N^k · Π (N - r)^m · rest`. Returns `(k, [(r, m)], rest)`.
fn factor_integer_roots(p: &Poly) -> (usize, Vec<(BigInt, usize)>, Poly) {
    if p.is_zero() {
        return (0, Vec::new(), p.clone());
    }
    let k = p.low_order();
    let mut rest = p.shift_down(k);
    let mut factors = Vec::new();
    if rest.degree().unwrap_or(0) > 0 {
        for r in integer_root_candidates(&rest.0[0]) {
            let m = rest.root_multiplicity(&r);
            if m > 0 {
                let lin = Poly::new(vec![-r.clone(), BigInt::one()]);
                for _ in 0..m {
                    rest = rest.div_exact(&lin);
                }
                factors.push((r, m));
            }
            if rest.degree().unwrap_or(0) == 0 {
                break;
            }
        }
    }
    // (N+a) factors first, ascending a, then (N-a) ascending a
    factors.sort_by(|(a, _), (b, _)| match (a.is_negative(), b.is_negative()) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => b.cmp(a),
        (false, false) => a.cmp(b),
    });
    (k, factors, rest)
}

/// Product pieces `[N^k, (N+a), ..., (rest)]` and the integer factor left in `rest`.
fn factored_pieces(p: &Poly) -> (BigInt, Vec<String>) {
    let (k, factors, rest) = factor_integer_roots(p);
    let mut pieces = Vec::new();
    match k {
        0 => {}
        1 => pieces.push("N".to_string()),
        _ => pieces.push(format!("N^{k}")),
    }
    for (r, m) in factors {
        let base = format!("(N{})", signed_offset(&-r));
        pieces.push(if m == 1 { base } else { format!("{base}^{m}") });
    }
    let scalar;
    if rest.degree().unwrap_or(0) == 0 {
        scalar = rest.leading();
    } else {
        let c = rest.content();
        let c = if rest.leading().is_negative() { -c } else { c };
        let prim = rest.div_scalar_exact(&c);
        pieces.push(format!("({prim})"));
        scalar = c;
    }
    (scalar, pieces)
}

impl fmt::Display for PolyFrac {
    /// Factored form, for example `2*N^6/((N+1)*(N+2)*(N+6)*(N-1)*(N-2)*(N-3))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            return write!(f, "0");
        }
        let (cn, mut np) = factored_pieces(&self.num);
        let (cd, mut dp) = factored_pieces(&self.den);
        let c = BigRational::new(cn, cd);
        let (p, q) = (c.numer().clone(), c.denom().clone());
        let neg = p.is_negative();
        let p = p.abs();
        if !p.is_one() || np.is_empty() {
            np.insert(0, p.to_string());
        }
        if !q.is_one() {
            dp.insert(0, q.to_string());
        }
        let sign = if neg { "-" } else { "" };
        let num = np.join("*");
        match dp.len() {
            0 => write!(f, "{sign}{num}"),
            1 => write!(f, "{sign}{num}/{}", dp[0]),
            _ => write!(f, "{sign}{num}/({})", dp.join("*")),
        }
    }
}

impl Add for PolyFrac {
    type Output = PolyFrac;
    fn add(self, o: PolyFrac) -> PolyFrac {
        &self + &o
    }
}

impl Add for &PolyFrac {
    type Output = PolyFrac;
    fn add(self, o: &PolyFrac) -> PolyFrac {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return PolyFrac::normalized(&self.num + &o.num, self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        let a = self.den.div_exact(&g);
        let b = o.den.div_exact(&g);
        let num = &(&self.num * &b) + &(&o.num * &a);
        let den = &a * &o.den;
        PolyFrac::normalized(num, den)
    }
}

impl Sub for PolyFrac {
    type Output = PolyFrac;
    fn sub(self, o: PolyFrac) -> PolyFrac {
        &self + &(-&o)
    }
}

impl Sub for &PolyFrac {
    type Output = PolyFrac;
    fn sub(self, o: &PolyFrac) -> PolyFrac {
        self + &(-o)
    }
}

impl Neg for PolyFrac {
    type Output = PolyFrac;
    fn neg(self) -> PolyFrac {
        -&self
    }
}

impl Neg for &PolyFrac {
    type Output = PolyFrac;
    fn neg(self) -> PolyFrac {
        PolyFrac {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for PolyFrac {
    type Output = PolyFrac;
    fn mul(self, o: PolyFrac) -> PolyFrac {
        &self * &o
    }
}

impl Mul for &PolyFrac {
    type Output = PolyFrac;
    fn mul(self, o: &PolyFrac) -> PolyFrac {
        if self.is_zero() || o.is_zero() {
            return PolyFrac::zero();
        }
        // cross-cancel before multiplying to keep degrees small
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let num = &self.num.div_exact(&g1) * &o.num.div_exact(&g2);
        let den = &self.den.div_exact(&g2) * &o.den.div_exact(&g1);
        PolyFrac::normalized(num, den)
    }
}

impl Div for PolyFrac {
    type Output = PolyFrac;
    fn div(self, o: PolyFrac) -> PolyFrac {
        &self / &o
    }
}

impl Div for &PolyFrac {
    type Output = PolyFrac;
    /// Panics on division by the zero fraction.
    fn div(self, o: &PolyFrac) -> PolyFrac {
        assert!(!o.is_zero(), "division by zero rational function");
        let inv = PolyFrac::normalized(o.den.clone(), o.num.clone());
        self * &inv
    }
}

impl Zero for PolyFrac {
    fn zero() -> Self {
        PolyFrac::from_poly(Poly::default())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for PolyFrac {
    fn one() -> Self {
        PolyFrac::from_int(1)
    }
}

impl Scalar for PolyFrac {
    fn from_bigint(v: &BigInt) -> Self {
        PolyFrac::from_poly(Poly::constant(v.clone()))
    }

    fn from_rational(v: &BigRational) -> Self {
        PolyFrac::normalized(Poly::constant(v.numer().clone()), Poly::constant(v.denom().clone()))
    }

    /// Sums by grouping equal denominators first.
    fn sum_ordered(values: &[Self]) -> Self {
        sum_polyfracs(values.iter())
    }
}

/// Sum fractions, adding numerators over shared denominators before
/// combining distinct denominators. The order of first appearance fixes
/// the combination order.
pub fn sum_polyfracs<'a>(values: impl IntoIterator<Item = &'a PolyFrac>) -> PolyFrac {
    let mut groups: Vec<(Poly, Poly)> = Vec::new();
    for v in values {
        if v.is_zero() {
            continue;
        }
        match groups.iter_mut().find(|(d, _)| *d == v.den) {
            Some((_, n)) => *n = &*n + &v.num,
            None => groups.push((v.den.clone(), v.num.clone())),
        }
    }
    groups
        .into_iter()
        .map(|(d, n)| PolyFrac::normalized(n, d))
        .fold(PolyFrac::zero(), |acc, v| &acc + &v)
}

/// Integer polynomial proportional to the given rational coefficients.
fn clear_denominators(coeffs: &[BigRational]) -> Poly {
    let d = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    Poly::new(coeffs.iter().map(|c| c.numer() * (&d / c.denom())).collect())
}

/// The rational function `p/q` with `deg p ≤ num_deg`, `deg q = den_deg`
/// and `q` monic through exactly `num_deg + den_deg + 1` points, by exact
/// elimination. Fails if the system is singular or the interpolant has a
/// pole at one of the nodes.
pub fn rational_interpolate(points: &[(BigInt, BigRational)], num_deg: usize, den_deg: usize) -> Result<PolyFrac> {
    let unknowns = num_deg + 1 + den_deg;
    if points.len() != unknowns {
        return Err(Error::invalid(format!(
            "type ({num_deg},{den_deg}) needs {unknowns} points, got {}",
            points.len()
        )));
    }
    let mut rows: Vec<Vec<BigRational>> = points
        .iter()
        .map(|(x, y)| {
            let x = BigRational::from_integer(x.clone());
            let powers: Vec<BigRational> = (0..=num_deg.max(den_deg)).map(|k| num_traits::pow(x.clone(), k)).collect();
            let mut row: Vec<BigRational> = powers[..=num_deg].to_vec();
            row.extend(powers[..den_deg].iter().map(|p| -(y * p)));
            row.push(y * &powers[den_deg]);
            row
        })
        .collect();
    for col in 0..unknowns {
        let pivot = (col..unknowns)
            .find(|&r| !rows[r][col].is_zero())
            .ok_or_else(|| Error::invalid("interpolation system is singular"))?;
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for v in rows[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..unknowns {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..=unknowns {
                    let t = &f * &rows[col][c];
                    rows[r][c] -= t;
                }
            }
        }
    }
    let sol: Vec<BigRational> = rows.iter().map(|r| r[unknowns].clone()).collect();
    let num = clear_denominators(&sol[..=num_deg]);
    let mut den_coeffs = sol[num_deg + 1..].to_vec();
    den_coeffs.push(BigRational::one());
    let den = clear_denominators(&den_coeffs);
    let num_scale = sol[..=num_deg].iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let den_scale = den_coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let f = PolyFrac::new(num.scale(&den_scale), den.scale(&num_scale))?;
    for (x, y) in points {
        if &f.eval(x)? != y {
            return Err(Error::invalid(format!("interpolant misses the node N = {x}")));
        }
    }
    Ok(f)
}
