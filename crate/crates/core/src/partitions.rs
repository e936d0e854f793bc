//! Pair partitions: families of perfect (or near-perfect, for odd `d`)
//! matchings on `{0, .., d-1}` that together cover every unordered pair once.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered index pair, stored with `j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct IndexPair {
    pub j: usize,
    pub k: usize,
}

impl IndexPair {
    /// Normalizes the order of the two indices.
    pub fn new(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b, "pair of identical indices");
        Self {
            j: a.min(b),
            k: a.max(b),
        }
    }

    pub fn gap(&self) -> usize {
        self.k - self.j
    }

    pub fn contains(&self, i: usize) -> bool {
        self.j == i || self.k == i
    }

    /// The other index of the pair, if `i` is in it.
    pub fn partner(&self, i: usize) -> Option<usize> {
        if self.j == i {
            Some(self.k)
        } else if self.k == i {
            Some(self.j)
        } else {
            None
        }
    }
}

impl From<[usize; 2]> for IndexPair {
    fn from([a, b]: [usize; 2]) -> Self {
        Self {
            j: a.min(b),
            k: a.max(b),
        }
    }
}

impl From<IndexPair> for [usize; 2] {
    fn from(p: IndexPair) -> Self {
        [p.j, p.k]
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    #[serde(skip)]
    pub dim: usize,
    pub pairs: Vec<IndexPair>,
    #[serde(default)]
    pub singletons: Vec<usize>,
}

impl Partition {
    fn canonical(dim: usize, mut pairs: Vec<IndexPair>, mut singletons: Vec<usize>) -> Self {
        pairs.sort();
        singletons.sort_unstable();
        Self {
            dim,
            pairs,
            singletons,
        }
    }

    pub fn contains_pair(&self, p: IndexPair) -> bool {
        self.pairs.contains(&p)
    }

    /// Problems with the per-partition invariants, empty if there are none.
    pub fn defects(&self) -> Vec<String> {
        let d = self.dim;
        let mut out = Vec::new();
        let mut seen = vec![0usize; d];
        for p in &self.pairs {
            if p.j >= p.k || p.k >= d {
                out.push(format!("pair {p} invalid for dimension {d}"));
                continue;
            }
            seen[p.j] += 1;
            seen[p.k] += 1;
        }
        for &s in &self.singletons {
            if s >= d {
                out.push(format!("singleton {s} out of range"));
            } else {
                seen[s] += 1;
            }
        }
        for (i, &n) in seen.iter().enumerate() {
            if n != 1 {
                out.push(format!("index {i} appears {n} times"));
            }
        }
        let want_singletons = d % 2;
        if self.singletons.len() != want_singletons {
            out.push(format!(
                "{} singletons, expected {want_singletons}",
                self.singletons.len()
            ));
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.pairs {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{p}")?;
        }
        for s in &self.singletons {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{{{s}}}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawPartitionSet")]
pub struct PartitionSet {
    pub dim: usize,
    /// `partitions[t - 1]` is partition `t`.
    pub partitions: Vec<Partition>,
}

#[derive(Deserialize)]
struct RawPartitionSet {
    dim: usize,
    partitions: Vec<Partition>,
}

impl From<RawPartitionSet> for PartitionSet {
    fn from(raw: RawPartitionSet) -> Self {
        let partitions = raw
            .partitions
            .into_iter()
            .map(|mut p| {
                p.dim = raw.dim;
                p
            })
            .collect();
        Self {
            dim: raw.dim,
            partitions,
        }
    }
}

impl PartitionSet {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Partition `t`, 1-based.
    pub fn get(&self, t: usize) -> Option<&Partition> {
        t.checked_sub(1).and_then(|i| self.partitions.get(i))
    }

    /// 1-based index of the partition holding `pair`.
    pub fn index_of(&self, pair: IndexPair) -> Option<usize> {
        self.partitions
            .iter()
            .position(|p| p.contains_pair(pair))
            .map(|i| i + 1)
    }
}

pub fn expected_count(d: usize) -> usize {
    if d.is_multiple_of(2) {
        d - 1
    } else {
        d
    }
}

pub fn construct_partitions(d: usize) -> Result<PartitionSet> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "partitions need d >= 2",
        });
    }
    let partitions = if d.is_multiple_of(2) {
        even_pairs(d)
            .into_iter()
            .map(|pairs| Partition::canonical(d, pairs, Vec::new()))
            .collect()
    } else {
        // Drop index d from the (d+1)-dimensional cover; its partner becomes
        // the singleton.
        even_pairs(d + 1)
            .into_iter()
            .map(|mut pairs| {
                let pos = pairs.iter().position(|p| p.k == d).expect("perfect matching");
                let c = pairs.remove(pos).j;
                Partition::canonical(d, pairs, vec![c])
            })
            .collect()
    };
    Ok(PartitionSet { dim: d, partitions })
}

/// Pair lists of the `d - 1` perfect matchings for even `d`, in
/// construction order, each sorted.
fn even_pairs(d: usize) -> Vec<Vec<IndexPair>> {
    debug_assert!(d >= 2 && d.is_multiple_of(2));
    if d == 2 {
        return vec![vec![IndexPair::new(0, 1)]];
    }
    let h = d / 2;
    let mut out = Vec::with_capacity(d - 1);
    let first_crossed;
    if h.is_multiple_of(2) {
        // Duplicate each half-size matching into the upper half.
        for base in even_pairs(h) {
            let mut pairs = base.clone();
            pairs.extend(base.iter().map(|p| IndexPair::new(p.j + h, p.k + h)));
            pairs.sort();
            out.push(pairs);
        }
        first_crossed = h;
    } else {
        // Work from the (h+1) cover and rewire the pairs touching h.
        for base in even_pairs(h + 1) {
            let c = base
                .iter()
                .find_map(|p| p.partner(h))
                .expect("perfect matching covers h");
            let mut pairs: Vec<IndexPair> = base.iter().copied().filter(|p| !p.contains(h)).collect();
            pairs.extend(
                base.iter()
                    .filter(|p| !p.contains(h))
                    .map(|p| IndexPair::new(p.j + h, p.k + h)),
            );
            pairs.push(IndexPair::new(c, c + h));
            pairs.sort();
            out.push(pairs);
        }
        first_crossed = h + 1;
    }
    for t in first_crossed..d {
        let mut pairs: Vec<IndexPair> = (0..h).map(|j| IndexPair::new(j, h + (j + t) % h)).collect();
        pairs.sort();
        out.push(pairs);
    }
    out
}

/// Diagnostics from [`verify_cover`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub ok: bool,
    pub missing: Vec<IndexPair>,
    pub duplicated: Vec<IndexPair>,
    /// Per-partition invariant violations, `(t, message)`.
    pub defects: Vec<(usize, String)>,
    /// For odd `d`: indices not appearing exactly once as a singleton.
    pub singleton_defects: Vec<usize>,
}

pub fn verify_cover(ps: &PartitionSet) -> CoverReport {
    let d = ps.dim;
    let mut counts: BTreeMap<IndexPair, usize> = BTreeMap::new();
    let mut defects = Vec::new();
    let mut singleton_seen = vec![0usize; d];
    for (i, p) in ps.partitions.iter().enumerate() {
        for msg in p.defects() {
            defects.push((i + 1, msg));
        }
        for pair in &p.pairs {
            *counts.entry(*pair).or_default() += 1;
        }
        for &s in &p.singletons {
            if s < d {
                singleton_seen[s] += 1;
            }
        }
    }
    let mut missing = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            if !counts.contains_key(&IndexPair::new(j, k)) {
                missing.push(IndexPair::new(j, k));
            }
        }
    }
    let duplicated: Vec<IndexPair> = counts.iter().filter(|(_, &n)| n > 1).map(|(p, _)| *p).collect();
    let singleton_defects: Vec<usize> = if d % 2 == 1 {
        (0..d).filter(|&i| singleton_seen[i] != 1).collect()
    } else {
        Vec::new()
    };
    let ok = missing.is_empty() && duplicated.is_empty() && defects.is_empty() && singleton_defects.is_empty();
    CoverReport {
        ok,
        missing,
        duplicated,
        defects,
        singleton_defects,
    }
}

/// 1-based indices of the partitions holding at least one pair with
/// `k - j <= r`.
pub fn select_band_partitions(ps: &PartitionSet, r: usize) -> Result<Vec<usize>> {
    if r == 0 || r >= ps.dim {
        return Err(Error::invalid(format!(
            "band radius {r} outside 1..={}",
            ps.dim.saturating_sub(1)
        )));
    }
    Ok(ps
        .partitions
        .iter()
        .enumerate()
        .filter(|(_, p)| p.pairs.iter().any(|pair| pair.gap() <= r))
        .map(|(i, _)| i + 1)
        .collect())
}
