//! Measurement bases built from pair partitions, and the fixed outcome
//! ordering that the simulator, reconstruction and circuits all share.
//!
//! For a partition with pairs `(j, k)` the plus-type basis `B_t` holds
//! `(|j> ± |k>)/√2` and the i-type basis `C_t` holds `(|j> ± i|k>)/√2`, in
//! pair order with `+` first, followed by the singleton `|c>` for odd `d`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::partitions::{construct_partitions, IndexPair, Partition, PartitionSet};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Powers of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_quarter_turns(n: i64) -> Self {
        match n.rem_euclid(4) {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn quarter_turns(self) -> i64 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn value(self) -> C64 {
        match self {
            Phase::One => C64::new(1.0, 0.0),
            Phase::I => C64::new(0.0, 1.0),
            Phase::MinusOne => C64::new(-1.0, 0.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_quarter_turns(self.quarter_turns() + rhs.quarter_turns())
    }
}

/// Exact amplitude `phase` or `phase/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Amplitude {
    pub phase: Phase,
    pub halved: bool,
}

impl Amplitude {
    pub const ONE: Amplitude = Amplitude {
        phase: Phase::One,
        halved: false,
    };

    pub fn half(phase: Phase) -> Self {
        Self { phase, halved: true }
    }

    pub fn value(self) -> C64 {
        let v = self.phase.value();
        if self.halved {
            v * H
        } else {
            v
        }
    }
}

impl fmt::Display for SparseKet {
    /// `(|0> + i|2>)/√2` style; single terms print bare.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        for (n, (i, a)) in self.terms.iter().enumerate() {
            let sign = match (n, a.phase) {
                (0, Phase::One) => "",
                (0, Phase::I) => "i",
                (0, Phase::MinusOne) => "-",
                (0, Phase::MinusI) => "-i",
                (_, Phase::One) => " + ",
                (_, Phase::I) => " + i",
                (_, Phase::MinusOne) => " - ",
                (_, Phase::MinusI) => " - i",
            };
            body.push_str(&format!("{sign}|{i}>"));
        }
        if self.terms.iter().any(|(_, a)| a.halved) {
            write!(f, "({body})/√2")
        } else {
            f.write_str(&body)
        }
    }
}

/// Unit vector with one or two nonzero entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseKet {
    pub dim: usize,
    pub terms: Vec<(usize, Amplitude)>,
}

impl SparseKet {
    pub fn basis(dim: usize, i: usize) -> Self {
        Self {
            dim,
            terms: vec![(i, Amplitude::ONE)],
        }
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim];
        for &(i, a) in &self.terms {
            v[i] = a.value();
        }
        v
    }

    /// `<v|M|v>` using only the nonzero terms.
    pub fn expectation(&self, m: &ComplexMatrix) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for &(a, x) in &self.terms {
            for &(b, y) in &self.terms {
                s += x.value().conj() * m[(a, b)] * y.value();
            }
        }
        s
    }

    pub fn inner(&self, other: &SparseKet) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for &(a, x) in &self.terms {
            for &(b, y) in &other.terms {
                if a == b {
                    s += x.value().conj() * y.value();
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// Real superpositions, `B_t`.
    Plus,
    /// Imaginary superpositions, `C_t`.
    Imag,
}

impl Flavor {
    fn alpha(self) -> Phase {
        match self {
            Flavor::Plus => Phase::One,
            Flavor::Imag => Phase::I,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisLabel {
    /// Computational basis.
    B0,
    B(usize),
    C(usize),
}

impl BasisLabel {
    pub fn partition_index(self) -> Option<usize> {
        match self {
            BasisLabel::B0 => None,
            BasisLabel::B(t) | BasisLabel::C(t) => Some(t),
        }
    }

    pub fn flavor(self) -> Option<Flavor> {
        match self {
            BasisLabel::B0 => None,
            BasisLabel::B(_) => Some(Flavor::Plus),
            BasisLabel::C(_) => Some(Flavor::Imag),
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::B0 => f.write_str("B0"),
            BasisLabel::B(t) => write!(f, "B{t}"),
            BasisLabel::C(t) => write!(f, "C{t}"),
        }
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLabel(s.to_string());
        let s = s.trim();
        let (head, tail) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        if tail.is_empty() || !tail.bytes().all(|b| b.is_ascii_digit()) || (tail.len() > 1 && tail.starts_with('0')) {
            return Err(bad());
        }
        let t: usize = tail.parse().map_err(|_| bad())?;
        match (head, t) {
            ("B", 0) => Ok(BasisLabel::B0),
            ("B", t) => Ok(BasisLabel::B(t)),
            ("C", t) if t > 0 => Ok(BasisLabel::C(t)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for BasisLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BasisLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdbBasis {
    pub dim: usize,
    pub label: BasisLabel,
    pub vectors: Vec<SparseKet>,
}

impl DdbBasis {
    pub fn computational(dim: usize) -> Self {
        Self {
            dim,
            label: BasisLabel::B0,
            vectors: (0..dim).map(|i| SparseKet::basis(dim, i)).collect(),
        }
    }

    /// Gram matrix of the vectors.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.vectors.len();
        ComplexMatrix::from_fn(n, n, |a, b| self.vectors[a].inner(&self.vectors[b]))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vectors: Vec<serde_json::Value> = self
            .vectors
            .iter()
            .map(|v| {
                serde_json::Value::Array(
                    v.terms
                        .iter()
                        .map(|&(i, a)| {
                            let z = a.value();
                            serde_json::json!([i, fmt_exact(z.re), fmt_exact(z.im)])
                        })
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({
            "dim": self.dim,
            "label": self.label.to_string(),
            "vectors": vectors,
        })
    }
}

/// Shortest round-trip decimal, with negative zero printed as `0`.
fn fmt_exact(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Basis for partition `p` with the given flavor and partition index `t`.
pub fn bases_from_partition(p: &Partition, t: usize, flavor: Flavor) -> DdbBasis {
    let d = p.dim;
    let alpha = flavor.alpha();
    let mut vectors = Vec::with_capacity(d);
    for pair in &p.pairs {
        for sign in [Phase::One, Phase::MinusOne] {
            vectors.push(SparseKet {
                dim: d,
                terms: vec![
                    (pair.j, Amplitude::half(Phase::One)),
                    (pair.k, Amplitude::half(sign * alpha)),
                ],
            });
        }
    }
    for &c in &p.singletons {
        vectors.push(SparseKet::basis(d, c));
    }
    let label = match flavor {
        Flavor::Plus => BasisLabel::B(t),
        Flavor::Imag => BasisLabel::C(t),
    };
    DdbBasis { dim: d, label, vectors }
}

/// The four superposition kinds and the computational states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    Diag,
}

/// All bases for one dimension plus the lookup tables for [`locate`].
#[derive(Debug, Clone)]
pub struct DdbFamily {
    pub dim: usize,
    pub partitions: PartitionSet,
    pub bases: Vec<DdbBasis>,
    by_label: HashMap<BasisLabel, usize>,
    /// pair -> (t, position of the pair inside partition t)
    pair_slot: HashMap<IndexPair, (usize, usize)>,
    /// odd d: index -> partition holding it as singleton
    singleton_slot: Vec<usize>,
}

impl DdbFamily {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        self.bases.iter().map(|b| b.label).collect()
    }

    pub fn basis(&self, label: BasisLabel) -> Option<&DdbBasis> {
        self.by_label.get(&label).map(|&i| &self.bases[i])
    }

    pub fn require(&self, label: BasisLabel) -> Result<&DdbBasis> {
        self.basis(label).ok_or_else(|| Error::InvalidLabel(format!("{label} (dimension {})", self.dim)))
    }

    pub fn projector_count(&self) -> usize {
        self.bases.iter().map(|b| b.vectors.len()).sum()
    }

    /// Basis and outcome index holding the requested vector. Pair kinds
    /// need `j < k`; `Diag` uses `j` only.
    pub fn locate(&self, kind: VectorKind, j: usize, k: usize) -> Result<(BasisLabel, usize)> {
        let d = self.dim;
        if kind == VectorKind::Diag {
            if j >= d {
                return Err(Error::invalid(format!("index {j} out of range for dimension {d}")));
            }
            if d.is_multiple_of(2) {
                return Ok((BasisLabel::B0, j));
            }
            let t = self.singleton_slot[j];
            return Ok((BasisLabel::B(t), d - 1));
        }
        if j >= k || k >= d {
            return Err(Error::invalid(format!(
                "pair ({j},{k}) needs j < k < {d}"
            )));
        }
        let (t, pos) = self.pair_slot[&IndexPair::new(j, k)];
        let (label, minus) = match kind {
            VectorKind::PhiPlus => (BasisLabel::B(t), false),
            VectorKind::PhiMinus => (BasisLabel::B(t), true),
            VectorKind::PsiPlus => (BasisLabel::C(t), false),
            VectorKind::PsiMinus => (BasisLabel::C(t), true),
            VectorKind::Diag => unreachable!(),
        };
        Ok((label, 2 * pos + usize::from(minus)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "bases": self.bases.iter().map(DdbBasis::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Even `d`: `[B0, B1..B(d-1), C1..C(d-1)]`. Odd `d`: `[B1..Bd, C1..Cd]`;
/// the singletons stand in for the computational basis.
pub fn family(d: usize) -> Result<DdbFamily> {
    let partitions = construct_partitions(d)?;
    let mut bases = Vec::new();
    if d.is_multiple_of(2) {
        bases.push(DdbBasis::computational(d));
    }
    for flavor in [Flavor::Plus, Flavor::Imag] {
        for (i, p) in partitions.partitions.iter().enumerate() {
            bases.push(bases_from_partition(p, i + 1, flavor));
        }
    }
    let by_label = bases.iter().enumerate().map(|(i, b)| (b.label, i)).collect();
    let mut pair_slot = HashMap::new();
    let mut singleton_slot = vec![0; if d % 2 == 1 { d } else { 0 }];
    for (i, p) in partitions.partitions.iter().enumerate() {
        for (pos, pair) in p.pairs.iter().enumerate() {
            pair_slot.insert(*pair, (i + 1, pos));
        }
        for &c in &p.singletons {
            singleton_slot[c] = i + 1;
        }
    }
    Ok(DdbFamily {
        dim: d,
        partitions,
        bases,
        by_label,
        pair_slot,
        singleton_slot,
    })
}

/// Column `k` of the result is vector `k` of the basis.
pub fn basis_unitary(b: &DdbBasis) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(b.dim, b.vectors.len());
    for (c, v) in b.vectors.iter().enumerate() {
        for &(i, a) in &v.terms {
            u[(i, c)] = a.value();
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn label_parsing() {
        for s in ["B0", "B3", "C5", "B12"] {
            assert_eq!(s.parse::<BasisLabel>().unwrap().to_string(), s);
        }
        for s in ["C0", "B", "X1", "B-1", "B03", "", "b1"] {
            assert!(s.parse::<BasisLabel>().is_err(), "{s}");
        }
    }

    #[test]
    fn d4_b1_and_c1() {
        let f = family(4).unwrap();
        let b1 = f.basis(BasisLabel::B(1)).unwrap();
        let dense: Vec<Vec<C64>> = b1.vectors.iter().map(SparseKet::to_dense).collect();
        assert_eq!(dense[0], vec![c(H, 0.), c(H, 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(dense[1], vec![c(H, 0.), c(-H, 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(dense[2], vec![c(0., 0.), c(0., 0.), c(H, 0.), c(H, 0.)]);
        let c1 = f.basis(BasisLabel::C(1)).unwrap();
        assert_eq!(c1.vectors[0].to_dense()[1], c(0., H));
        assert_eq!(c1.vectors[1].to_dense()[1], c(0., -H));
    }

    #[test]
    fn d7_t7_singleton_last() {
        let f = family(7).unwrap();
        let b7 = f.basis(BasisLabel::B(7)).unwrap();
        assert_eq!(b7.vectors[0].terms[0].0, 1);
        assert_eq!(b7.vectors[0].terms[1].0, 4);
        assert_eq!(b7.vectors[6], SparseKet::basis(7, 0));
    }

    #[test]
    fn family_sizes() {
        assert_eq!(family(2).unwrap().len(), 3);
        assert_eq!(family(6).unwrap().len(), 11);
        let f7 = family(7).unwrap();
        assert_eq!(f7.len(), 14);
        assert!(f7.basis(BasisLabel::B0).is_none());
        assert!(family(1).is_err());
    }

    #[test]
    fn d2_is_pauli() {
        let f = family(2).unwrap();
        let x = basis_unitary(f.basis(BasisLabel::B(1)).unwrap());
        assert_eq!(x, ComplexMatrix::from_rows(&[vec![c(H, 0.), c(H, 0.)], vec![c(H, 0.), c(-H, 0.)]]).unwrap());
        assert_eq!(basis_unitary(f.basis(BasisLabel::B0).unwrap()), ComplexMatrix::identity(2));
    }

    #[test]
    fn d4_b3_columns() {
        let u = basis_unitary(family(4).unwrap().basis(BasisLabel::B(3)).unwrap());
        assert_eq!(u.column(0), vec![c(H, 0.), c(0., 0.), c(0., 0.), c(H, 0.)]);
        assert_eq!(u.column(1), vec![c(H, 0.), c(0., 0.), c(0., 0.), c(-H, 0.)]);
        assert_eq!(u.column(2), vec![c(0., 0.), c(H, 0.), c(H, 0.), c(0., 0.)]);
        assert_eq!(u.column(3), vec![c(0., 0.), c(H, 0.), c(-H, 0.), c(0., 0.)]);
    }

    #[test]
    fn locate_examples() {
        let f4 = family(4).unwrap();
        assert_eq!(f4.locate(VectorKind::PhiPlus, 2, 3).unwrap(), (BasisLabel::B(1), 2));
        assert_eq!(f4.locate(VectorKind::Diag, 1, 0).unwrap(), (BasisLabel::B0, 1));
        let f7 = family(7).unwrap();
        assert_eq!(f7.locate(VectorKind::Diag, 0, 0).unwrap(), (BasisLabel::B(7), 6));
        assert!(f4.locate(VectorKind::PsiPlus, 3, 2).is_err());
    }

    #[test]
    fn json_dump_is_exact() {
        let f = family(4).unwrap();
        let v = f.basis(BasisLabel::B(3)).unwrap().to_json();
        assert_eq!(v["label"], "B3");
        assert_eq!(v["vectors"][1][1], serde_json::json!([3, "-0.7071067811865476", "0"]));
    }
}
