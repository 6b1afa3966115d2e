//! Trace expressions: products of traces of words `O_{w(k)}^{ε(k)} X_k`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::perm::{EpsilonSigns, SignedPermutation};
use crate::scalar::parse_rational;
use crate::setpart::{kernel_of, IndexSet, SetPartition};

/// One factor `O_color^eps · X`, where `X` is the labelled matrix (its
/// transpose for a negative label) or the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub color: u32,
    #[serde(with = "eps_serde")]
    pub eps: i8,
    /// Matrix label; negative means transposed, `None` or `0` the identity.
    #[serde(default, with = "slot_serde")]
    pub slot: Option<i32>,
}

impl Slot {
    pub fn new(color: u32, eps: i8, slot: Option<i32>) -> Self {
        Slot { color, eps, slot }
    }
}

mod eps_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &i8, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(*v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i8, D::Error> {
        let v = i8::deserialize(d)?;
        if v != 1 && v != -1 {
            return Err(serde::de::Error::custom(format!("eps must be 1 or -1, got {v}")));
        }
        Ok(v)
    }
}

mod slot_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<i32>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_i32(*x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<i32>, D::Error> {
        Ok(Option::<i32>::deserialize(d)?.filter(|&x| x != 0))
    }
}

/// A product of traces. Positions are numbered `1..=n` through the traces
/// in order; `φ` has one cycle per trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceExpression {
    pub traces: Vec<Vec<Slot>>,
}

impl TraceExpression {
    pub fn new(traces: Vec<Vec<Slot>>) -> Result<Self> {
        if traces.iter().any(|t| t.is_empty()) {
            return Err(Error::invalid("empty trace"));
        }
        Ok(TraceExpression { traces })
    }

    /// A single trace.
    pub fn single(slots: Vec<Slot>) -> Result<Self> {
        Self::new(vec![slots])
    }

    pub fn n(&self) -> usize {
        self.traces.iter().map(|t| t.len()).sum()
    }

    pub fn trace_count(&self) -> usize {
        self.traces.len()
    }

    pub fn slots(&self) -> Vec<Slot> {
        self.traces.iter().flatten().copied().collect()
    }

    /// The slot at position `k` (1-based).
    pub fn slot(&self, k: usize) -> Slot {
        self.slots()[k - 1]
    }

    pub fn phi(&self) -> SignedPermutation {
        let dom = IndexSet::range(self.n());
        let mut cycles = Vec::new();
        let mut start = 1i32;
        for t in &self.traces {
            cycles.push((start..start + t.len() as i32).collect::<Vec<_>>());
            start += t.len() as i32;
        }
        SignedPermutation::from_cycles(Some(&dom), &cycles).expect("consecutive cycles")
    }

    pub fn eps(&self) -> EpsilonSigns {
        EpsilonSigns::new(self.slots().iter().map(|s| s.eps).collect()).expect("validated signs")
    }

    pub fn word(&self) -> Vec<u32> {
        self.slots().iter().map(|s| s.color).collect()
    }

    /// Distinct colours in increasing order.
    pub fn colors(&self) -> Vec<u32> {
        let mut c = self.word();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Positions of each colour, in increasing order.
    pub fn positions_by_color(&self) -> BTreeMap<u32, Vec<i32>> {
        let mut out: BTreeMap<u32, Vec<i32>> = BTreeMap::new();
        for (i, s) in self.slots().iter().enumerate() {
            out.entry(s.color).or_default().push(i as i32 + 1);
        }
        out
    }

    /// `ker w` on `[n]`.
    pub fn color_kernel(&self) -> SetPartition {
        let w = self.word();
        kernel_of(&IndexSet::range(self.n()), |k| w[k as usize - 1])
    }

    /// Matrix labels referenced by slots, positive and deduplicated.
    pub fn labels(&self) -> Vec<u32> {
        let mut l: Vec<u32> = self
            .slots()
            .iter()
            .filter_map(|s| s.slot.map(|x| x.unsigned_abs()))
            .collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Matrix at signed position `k`: slot `|k|`, transposed for `k < 0`.
    /// `None` is the identity.
    pub fn resolve(&self, k: i32) -> Option<(u32, bool)> {
        let s = self.slot(k.unsigned_abs() as usize);
        s.slot.map(|l| (l.unsigned_abs(), (l < 0) != (k < 0)))
    }

    /// `tr(O^T X_1 O O^T X_2 O ...)` for one colour per `X`: positions
    /// alternate `O^T X_i` and `O · I`.
    pub fn conjugated_word(colors: &[u32], labels: &[i32]) -> Vec<Slot> {
        colors
            .iter()
            .zip(labels)
            .flat_map(|(&c, &l)| [Slot::new(c, -1, Some(l)), Slot::new(c, 1, None)])
            .collect()
    }
}

/// Matrices keyed by positive label.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSet<T> {
    pub dim: usize,
    pub matrices: BTreeMap<u32, DenseMatrix<T>>,
}

impl<T: crate::scalar::Scalar> MatrixSet<T> {
    pub fn new(dim: usize) -> Self {
        MatrixSet {
            dim,
            matrices: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, label: u32, m: DenseMatrix<T>) -> Result<()> {
        if label == 0 {
            return Err(Error::invalid("matrix label 0 is reserved for the identity"));
        }
        if m.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "matrix {label} is {0}x{0}, expected {1}x{1}",
                m.dim(),
                self.dim
            )));
        }
        self.matrices.insert(label, m);
        Ok(())
    }

    pub fn get(&self, label: u32) -> Result<&DenseMatrix<T>> {
        self.matrices
            .get(&label)
            .ok_or_else(|| Error::MissingValue(format!("matrix {label}")))
    }

    /// Every label the expression uses is present.
    pub fn check_covers(&self, expr: &TraceExpression) -> Result<()> {
        for l in expr.labels() {
            self.get(l)?;
        }
        Ok(())
    }

    pub fn map<U: crate::scalar::Scalar>(&self, f: impl Fn(&T) -> U) -> MatrixSet<U> {
        MatrixSet {
            dim: self.dim,
            matrices: self.matrices.iter().map(|(&l, m)| (l, m.map(&f))).collect(),
        }
    }
}

impl MatrixSet<BigRational> {
    pub fn to_f64(&self) -> MatrixSet<f64> {
        self.map(<f64 as crate::scalar::Scalar>::from_rational)
    }
}

/// On-disk expression: `{traces: [[{color, eps, slot}]], matrices: {label: [[entry]]}}`.
/// Entries are rational strings (`"3/4"`, `"-2"`, `"0.25"`) or JSON numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpressionFile {
    pub traces: Vec<Vec<Slot>>,
    #[serde(default)]
    pub matrices: BTreeMap<String, Vec<Vec<serde_json::Value>>>,
}

impl ExpressionFile {
    pub fn expression(&self) -> Result<TraceExpression> {
        TraceExpression::new(self.traces.clone())
    }

    fn rows(&self) -> Result<Vec<(u32, &Vec<Vec<serde_json::Value>>)>> {
        self.matrices
            .iter()
            .map(|(k, v)| {
                let l: u32 = k
                    .parse()
                    .map_err(|_| Error::invalid(format!("matrix label {k:?} is not a positive integer")))?;
                Ok((l, v))
            })
            .collect()
    }

    fn dim(&self) -> Result<usize> {
        let dims: Vec<usize> = self.matrices.values().map(|m| m.len()).collect();
        match dims.first() {
            None => Err(Error::MissingValue("no matrices given".into())),
            Some(&d) if dims.iter().all(|&x| x == d) => Ok(d),
            Some(_) => Err(Error::Dimension("matrices have different sizes".into())),
        }
    }

    /// Exact entries; JSON floats are rejected.
    pub fn exact_matrices(&self) -> Result<MatrixSet<BigRational>> {
        let dim = self.dim()?;
        let mut set = MatrixSet::new(dim);
        for (l, rows) in self.rows()? {
            let mut data = Vec::with_capacity(dim * dim);
            for row in rows {
                if row.len() != dim {
                    return Err(Error::Dimension(format!("matrix {l} is not square")));
                }
                for v in row {
                    data.push(exact_entry(v)?);
                }
            }
            set.insert(l, DenseMatrix::new(dim, data)?)?;
        }
        Ok(set)
    }

    pub fn float_matrices(&self) -> Result<MatrixSet<f64>> {
        let dim = self.dim()?;
        let mut set = MatrixSet::new(dim);
        for (l, rows) in self.rows()? {
            let mut data = Vec::with_capacity(dim * dim);
            for row in rows {
                if row.len() != dim {
                    return Err(Error::Dimension(format!("matrix {l} is not square")));
                }
                for v in row {
                    data.push(float_entry(v)?);
                }
            }
            set.insert(l, DenseMatrix::new(dim, data)?)?;
        }
        Ok(set)
    }
}

fn exact_entry(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::String(s) => {
            parse_rational(s).ok_or_else(|| Error::invalid(format!("bad rational {s:?}")))
        }
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigRational::from_integer(BigInt::from(i))),
            None => Err(Error::invalid(format!(
                "entry {n} is a float; exact mode needs integers or rational strings"
            ))),
        },
        other => Err(Error::invalid(format!("matrix entry {other} is not a number"))),
    }
}

fn float_entry(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::String(s) => {
            let r = parse_rational(s).ok_or_else(|| Error::invalid(format!("bad rational {s:?}")))?;
            Ok(<f64 as crate::scalar::Scalar>::from_rational(&r))
        }
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::invalid(format!("entry {n} is not representable"))),
        other => Err(Error::invalid(format!("matrix entry {other} is not a number"))),
    }
}
