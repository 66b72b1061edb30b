//! Labeled undirected graphs on `k` vertices and their exact statistics.
//!
//! A graph is an [`EdgeMask`]: bit `e` is set iff edge slot `e` is present,
//! where slots are numbered by [`edge_index`]. The realizable set is built
//! by streaming every mask once and tallying distinct statistic vectors.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, ratio, Rational, RationalVector};

/// Largest vertex count accepted for exhaustive enumeration (28 edge slots).
pub const K_MAX: usize = 8;

/// Largest number of statistics per model.
pub const N_MAX: usize = 12;

pub fn edge_slots(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

pub fn graph_count(k: usize) -> u64 {
    1u64 << edge_slots(k)
}

pub fn check_vertex_count(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "vertex count must be at least 2, got {k}"
        )));
    }
    if k > K_MAX {
        return Err(Error::CapacityExceeded {
            what: "vertex count",
            value: k,
            limit: K_MAX,
        });
    }
    Ok(())
}

/// Slot of the edge `{i, j}` with `i < j < k`.
pub fn edge_index(i: usize, j: usize, k: usize) -> Result<usize> {
    if !(i < j && j < k) {
        return Err(Error::InvalidInput(format!(
            "vertex pair ({i}, {j}) is not an ordered pair below {k}"
        )));
    }
    Ok(i * k - i * (i + 1) / 2 + (j - i - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeMask {
    bits: u32,
    k: u8,
}

impl EdgeMask {
    pub fn new(bits: u32, k: usize) -> Result<Self> {
        check_vertex_count(k)?;
        let slots = edge_slots(k);
        if slots < 32 && bits >> slots != 0 {
            return Err(Error::InvalidInput(format!(
                "mask {bits:#x} sets bits beyond the {slots} edge slots of k = {k}"
            )));
        }
        Ok(EdgeMask { bits, k: k as u8 })
    }

    pub fn empty(k: usize) -> Result<Self> {
        EdgeMask::new(0, k)
    }

    pub fn complete(k: usize) -> Result<Self> {
        check_vertex_count(k)?;
        EdgeMask::new(((1u64 << edge_slots(k)) - 1) as u32, k)
    }

    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut bits = 0u32;
        for &(a, b) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            bits |= 1 << edge_index(i, j, k)?;
        }
        EdgeMask::new(bits, k)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn k(self) -> usize {
        self.k as usize
    }

    pub fn has_edge(self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        match edge_index(i, j, self.k()) {
            Ok(e) => self.bits >> e & 1 == 1,
            Err(_) => false,
        }
    }

    pub fn edge_count(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn degrees(self) -> Vec<u32> {
        let k = self.k();
        let mut deg = vec![0; k];
        for i in 0..k {
            for j in i + 1..k {
                if self.has_edge(i, j) {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        deg
    }
}

/// Every labeled graph on `k` vertices, in ascending mask order.
pub fn enumerate_graphs(k: usize) -> Result<GraphIter> {
    check_vertex_count(k)?;
    Ok(GraphIter {
        next: 0,
        end: graph_count(k),
        k: k as u8,
    })
}

#[derive(Clone, Debug)]
pub struct GraphIter {
    next: u64,
    end: u64,
    k: u8,
}

impl Iterator for GraphIter {
    type Item = EdgeMask;

    fn next(&mut self) -> Option<EdgeMask> {
        if self.next >= self.end {
            return None;
        }
        let bits = self.next as u32;
        self.next += 1;
        Some(EdgeMask { bits, k: self.k })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for GraphIter {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Edges,
    Triangles,
    TwoStars,
    MeanDegree,
    Isolates,
    MaxDegree,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 6] = [
        StatisticKind::Edges,
        StatisticKind::Triangles,
        StatisticKind::TwoStars,
        StatisticKind::MeanDegree,
        StatisticKind::Isolates,
        StatisticKind::MaxDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::Edges => "edges",
            StatisticKind::Triangles => "triangles",
            StatisticKind::TwoStars => "two_stars",
            StatisticKind::MeanDegree => "mean_degree",
            StatisticKind::Isolates => "isolates",
            StatisticKind::MaxDegree => "max_degree",
        }
    }

    fn needs_degrees(self) -> bool {
        matches!(
            self,
            StatisticKind::TwoStars | StatisticKind::Isolates | StatisticKind::MaxDegree
        )
    }

    /// Denominator relating the integer tally to the statistic's value.
    fn denominator(self, k: usize) -> i64 {
        match self {
            StatisticKind::MeanDegree => k as i64,
            _ => 1,
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::ALL
            .into_iter()
            .find(|kind| kind.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown statistic kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatisticSpec {
    pub kind: StatisticKind,
    pub label: String,
}

impl StatisticSpec {
    pub fn new(kind: StatisticKind) -> Self {
        StatisticSpec {
            kind,
            label: kind.name().to_string(),
        }
    }

    pub fn list(kinds: &[StatisticKind]) -> Vec<StatisticSpec> {
        kinds.iter().copied().map(StatisticSpec::new).collect()
    }
}

impl From<StatisticKind> for StatisticSpec {
    fn from(kind: StatisticKind) -> Self {
        StatisticSpec::new(kind)
    }
}

pub fn statistic_value(g: EdgeMask, spec: &StatisticSpec) -> Rational {
    let k = g.k();
    match spec.kind {
        StatisticKind::Edges => int(g.edge_count() as i64),
        StatisticKind::MeanDegree => ratio(2 * g.edge_count() as i64, k as i64),
        StatisticKind::Triangles => {
            let mut count = 0;
            for a in 0..k {
                for b in a + 1..k {
                    if !g.has_edge(a, b) {
                        continue;
                    }
                    for c in b + 1..k {
                        if g.has_edge(a, c) && g.has_edge(b, c) {
                            count += 1;
                        }
                    }
                }
            }
            int(count)
        }
        StatisticKind::TwoStars => {
            let pairs: u32 = g
                .degrees()
                .iter()
                .map(|&d| d * d.saturating_sub(1) / 2)
                .sum();
            int(pairs as i64)
        }
        StatisticKind::Isolates => int(g.degrees().iter().filter(|&&d| d == 0).count() as i64),
        StatisticKind::MaxDegree => int(g.degrees().into_iter().max().unwrap_or(0) as i64),
    }
}

pub fn statistic_vector(g: EdgeMask, specs: &[StatisticSpec]) -> Result<RationalVector> {
    if specs.is_empty() {
        return Err(Error::InvalidInput("no statistics requested".into()));
    }
    Ok(RationalVector(
        specs.iter().map(|s| statistic_value(g, s)).collect(),
    ))
}

/// Table-driven evaluator used for bulk enumeration. Produces each
/// statistic as a small integer tally packed one byte per coordinate.
#[derive(Clone, Debug)]
struct Tally {
    kinds: Vec<StatisticKind>,
    incident: Vec<u32>,
    triangles: Vec<u32>,
    needs_degrees: bool,
    needs_triangles: bool,
}

impl Tally {
    fn new(k: usize, specs: &[StatisticSpec]) -> Self {
        let slot = |i, j| edge_index(i, j, k).expect("i < j < k");
        let incident = (0..k)
            .map(|v| {
                (0..k)
                    .filter(|&u| u != v)
                    .fold(0u32, |m, u| m | 1 << slot(u.min(v), u.max(v)))
            })
            .collect();
        let mut triangles = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    triangles.push(1 << slot(a, b) | 1 << slot(a, c) | 1 << slot(b, c));
                }
            }
        }
        let kinds: Vec<_> = specs.iter().map(|s| s.kind).collect();
        Tally {
            needs_degrees: kinds.iter().any(|k| k.needs_degrees()),
            needs_triangles: kinds.contains(&StatisticKind::Triangles),
            kinds,
            incident,
            triangles,
        }
    }

    #[inline]
    fn key(&self, bits: u32) -> u128 {
        let edges = bits.count_ones();
        let mut tri = 0u32;
        if self.needs_triangles {
            for &m in &self.triangles {
                tri += (bits & m == m) as u32;
            }
        }
        let (mut two_stars, mut isolates, mut max_deg) = (0u32, 0u32, 0u32);
        if self.needs_degrees {
            for &m in &self.incident {
                let d = (bits & m).count_ones();
                two_stars += d * d.saturating_sub(1) / 2;
                isolates += (d == 0) as u32;
                max_deg = max_deg.max(d);
            }
        }
        let mut key = 0u128;
        for (pos, kind) in self.kinds.iter().enumerate() {
            let raw = match kind {
                StatisticKind::Edges => edges,
                StatisticKind::MeanDegree => 2 * edges,
                StatisticKind::Triangles => tri,
                StatisticKind::TwoStars => two_stars,
                StatisticKind::Isolates => isolates,
                StatisticKind::MaxDegree => max_deg,
            };
            debug_assert!(raw < 256);
            key |= (raw as u128) << (8 * pos);
        }
        key
    }
}

/// Tally of statistic vectors over a subset of the graph space. Partial
/// tallies over disjoint mask ranges merge into the full realizable set.
#[derive(Clone, Debug)]
pub struct PartialRealizableSet {
    k: usize,
    specs: Vec<StatisticSpec>,
    counts: FxHashMap<u128, u64>,
}

impl PartialRealizableSet {
    pub fn new(k: usize, specs: &[StatisticSpec]) -> Result<Self> {
        check_vertex_count(k)?;
        if specs.is_empty() {
            return Err(Error::InvalidInput("no statistics requested".into()));
        }
        if specs.len() > N_MAX {
            return Err(Error::CapacityExceeded {
                what: "statistic count",
                value: specs.len(),
                limit: N_MAX,
            });
        }
        Ok(PartialRealizableSet {
            k,
            specs: specs.to_vec(),
            counts: FxHashMap::default(),
        })
    }

    /// Adds every mask in `range` (clamped to the graph space).
    pub fn add_range(&mut self, range: Range<u64>) {
        let tally = Tally::new(self.k, &self.specs);
        let end = range.end.min(graph_count(self.k));
        for bits in range.start..end {
            *self.counts.entry(tally.key(bits as u32)).or_insert(0) += 1;
        }
    }

    pub fn merge(mut self, other: PartialRealizableSet) -> PartialRealizableSet {
        assert_eq!(self.k, other.k, "merging tallies of different k");
        assert_eq!(
            self.specs, other.specs,
            "merging tallies of different statistics"
        );
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self.counts), other.counts)
        } else {
            (other.counts, std::mem::take(&mut self.counts))
        };
        for (key, count) in small {
            *big.entry(key).or_insert(0) += count;
        }
        self.counts = big;
        self
    }

    pub fn graphs_seen(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Converts to exact points. The multiplicities must cover the whole
    /// graph space.
    pub fn finish(self) -> Result<RealizableSet> {
        let k = self.k;
        let dens: Vec<i64> = self.specs.iter().map(|s| s.kind.denominator(k)).collect();
        let rows = self
            .counts
            .into_iter()
            .map(|(key, count)| {
                let coords = dens
                    .iter()
                    .enumerate()
                    .map(|(pos, &den)| ratio((key >> (8 * pos) & 0xff) as i64, den))
                    .collect();
                (RationalVector(coords), count)
            })
            .collect();
        RealizableSet::from_rows(k, self.specs, rows)
    }
}

/// The distinct realizable statistic points with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizableSet {
    pub k: usize,
    pub specs: Vec<StatisticSpec>,
    pub points: Vec<RationalVector>,
    pub multiplicities: Vec<u64>,
    pub total: u64,
}

impl RealizableSet {
    /// Builds a set from `(point, multiplicity)` rows, sorting them and
    /// checking every invariant.
    pub fn from_rows(
        k: usize,
        specs: Vec<StatisticSpec>,
        mut rows: Vec<(RationalVector, u64)>,
    ) -> Result<Self> {
        check_vertex_count(k)?;
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput("duplicate realizable point".into()));
        }
        if rows.iter().any(|(p, m)| p.len() != specs.len() || *m == 0) {
            return Err(Error::InvalidInput(
                "realizable rows must match the statistic count and have positive multiplicity"
                    .into(),
            ));
        }
        let total: u64 = rows.iter().map(|(_, m)| m).sum();
        if total != graph_count(k) {
            return Err(Error::InvalidInput(format!(
                "multiplicities sum to {total}, expected {}",
                graph_count(k)
            )));
        }
        let (points, multiplicities) = rows.into_iter().unzip();
        Ok(RealizableSet {
            k,
            specs,
            points,
            multiplicities,
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.label.clone()).collect()
    }

    /// Exact mean statistic under the uniform distribution on graphs.
    pub fn uniform_mean(&self) -> RationalVector {
        let mut sum = RationalVector::zeros(self.dim());
        for (p, &m) in self.points.iter().zip(&self.multiplicities) {
            let weight = int(m as i64);
            for (acc, c) in sum.0.iter_mut().zip(p.iter()) {
                *acc += c * &weight;
            }
        }
        sum.scale(&ratio(1, self.total as i64))
    }

    pub fn index_of(&self, point: &RationalVector) -> Option<usize> {
        self.points.binary_search(point).ok()
    }
}

/// Masks per work unit when the enumeration is split across threads.
const CHUNK: u64 = 1 << 16;

/// Enumerates `G_k` and tallies the distinct statistic vectors.
pub fn realizable_set(k: usize, specs: &[StatisticSpec]) -> Result<RealizableSet> {
    let empty = PartialRealizableSet::new(k, specs)?;
    let total = graph_count(k);
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut acc, c| {
                acc.add_range(c * CHUNK..(c + 1) * CHUNK);
                acc
            },
        )
        .reduce(|| empty.clone(), PartialRealizableSet::merge)
        .finish()
}

/// Same as [`realizable_set`] but over `parts` explicit sequential ranges.
pub fn realizable_set_partitioned(
    k: usize,
    specs: &[StatisticSpec],
    parts: u64,
) -> Result<RealizableSet> {
    let empty = PartialRealizableSet::new(k, specs)?;
    let total = graph_count(k);
    let parts = parts.clamp(1, total);
    let step = total.div_ceil(parts);
    (0..parts)
        .map(|p| {
            let mut acc = empty.clone();
            acc.add_range(p * step..(p + 1) * step);
            acc
        })
        .fold(empty.clone(), PartialRealizableSet::merge)
        .finish()
}

/// Lowest and highest realizable value of a one-statistic set.
pub fn interval(set: &RealizableSet) -> Option<(Rational, Rational)> {
    if set.dim() != 1 || set.is_empty() {
        return None;
    }
    let lo = set.points.iter().map(|p| &p[0]).min()?;
    let hi = set.points.iter().map(|p| &p[0]).max()?;
    Some((lo.clone(), hi.clone()))
}
