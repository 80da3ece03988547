//! Weighted graphs, vertex sets, constrained instances and the cut function.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global comparison tolerance for weights and cut values.
pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected graph with nonnegative edge weights.
///
/// Edges are stored canonically (`u < v`, sorted) with parallel edges merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    total_weight: f64,
    adjacency: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<RawGraph> for WeightedGraph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        WeightedGraph::new(raw.n, raw.edges)
    }
}

impl From<WeightedGraph> for RawGraph {
    fn from(g: WeightedGraph) -> Self {
        RawGraph {
            n: g.n,
            edges: g.edges.iter().map(|e| (e.u, e.v, e.w)).collect(),
        }
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at vertex {u}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Input(format!("edge ({u}, {v}) has invalid weight {w}")));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        let edges: Vec<Edge> = merged.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect();
        Ok(Self::from_canonical(n, edges))
    }

    fn from_canonical(n: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut degrees = vec![0.0; n];
        let mut total_weight = 0.0;
        for e in &edges {
            adjacency[e.u].push((e.v, e.w));
            adjacency[e.v].push((e.u, e.w));
            degrees[e.u] += e.w;
            degrees[e.v] += e.w;
            total_weight += e.w;
        }
        WeightedGraph {
            n,
            edges,
            total_weight,
            adjacency,
            degrees,
        }
    }

    pub fn edgeless(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    /// Complete graph with every edge weighted `w`.
    pub fn complete(n: usize, w: f64) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| Edge { u, v, w })).collect();
        Self::from_canonical(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    /// Weighted degree `δ({v})`.
    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Rescales weights so they sum to one. Edgeless or zero-weight graphs are returned as is.
    pub fn normalize(&self) -> WeightedGraph {
        if self.total_weight <= 0.0 {
            return self.clone();
        }
        let scale = self.total_weight;
        let edges = self.edges.iter().map(|e| Edge { w: e.w / scale, ..*e }).collect();
        Self::from_canonical(self.n, edges)
    }

    /// Cut value of the set given as a membership mask. No range checks.
    pub fn cut_of_mask(&self, mask: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|e| mask[e.u] != mask[e.v])
            .map(|e| e.w)
            .sum()
    }

    /// Weight of edges between `v` and the members of `mask`.
    pub fn weight_to_mask(&self, v: usize, mask: &[bool]) -> f64 {
        self.adjacency[v]
            .iter()
            .filter(|(u, _)| mask[*u])
            .map(|(_, w)| w)
            .sum()
    }
}

/// Sorted, duplicate-free set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        VertexSet((0..mask.len()).filter(|&i| mask[i]).collect())
    }

    pub fn from_bits(bits: u64) -> Self {
        VertexSet((0..64).filter(|i| bits >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max_id(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.max_id() {
            Some(v) if v >= n => Err(Error::Input(format!("vertex {v} out of range for n = {n}"))),
            _ => Ok(()),
        }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.0 {
            mask[v] = true;
        }
        mask
    }

    pub fn complement(&self, n: usize) -> VertexSet {
        (0..n).filter(|&v| !self.contains(v)).collect()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.iter().filter(|&v| other.contains(v)).collect()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.iter().filter(|&v| !other.contains(v)).collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn with(&self, v: usize) -> VertexSet {
        self.iter().chain(std::iter::once(v)).collect()
    }

    pub fn without(&self, v: usize) -> VertexSet {
        self.iter().filter(|&u| u != v).collect()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut ids: Vec<usize> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        VertexSet(ids)
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(ids: Vec<usize>) -> Self {
        ids.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(ids: [usize; N]) -> Self {
        ids.into_iter().collect()
    }
}

/// Cut value `δ(S)`: total weight of edges with exactly one endpoint in `s`.
pub fn delta(g: &WeightedGraph, s: &VertexSet) -> Result<f64> {
    s.check_range(g.n())?;
    Ok(g.cut_of_mask(&s.mask(g.n())))
}

/// Total weight of edges with one endpoint in `s` and the other in `t`.
pub fn delta_between(g: &WeightedGraph, s: &VertexSet, t: &VertexSet) -> Result<f64> {
    s.check_range(g.n())?;
    t.check_range(g.n())?;
    if !s.is_disjoint(t) {
        return Err(Error::Input("delta_between needs disjoint sets".into()));
    }
    let tm = t.mask(g.n());
    Ok(s.iter().map(|u| g.weight_to_mask(u, &tm)).sum())
}

/// Vertices by decreasing weighted degree, ties by ascending id.
pub fn weighted_degree_order(g: &WeightedGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| g.degree(b).total_cmp(&g.degree(a)).then(a.cmp(&b)));
    order
}

/// Result of contracting groups of vertices into super vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction {
    pub graph: WeightedGraph,
    /// Reduced id -> original id for every kept vertex (kept vertices come first, in id order).
    pub kept: Vec<usize>,
    /// Reduced ids of the super vertices, one per contracted group.
    pub supers: Vec<usize>,
}

impl Contraction {
    pub fn reduced_id(&self, original: usize) -> Option<usize> {
        self.kept.binary_search(&original).ok()
    }

    /// Maps a set of reduced ids (excluding super vertices) back to original ids.
    pub fn lift(&self, reduced: &VertexSet) -> Result<VertexSet> {
        reduced
            .iter()
            .map(|r| {
                self.kept
                    .get(r)
                    .copied()
                    .ok_or_else(|| Error::Input(format!("reduced vertex {r} is not a kept vertex")))
            })
            .collect()
    }
}

/// Keeps `keep` and merges each group in `groups` into its own super vertex.
///
/// Edges from a kept vertex into a group become edges to that group's super vertex
/// (weights summed per kept endpoint); edges with both endpoints outside `keep` are dropped.
pub fn contract_groups(g: &WeightedGraph, keep: &VertexSet, groups: &[VertexSet]) -> Result<Contraction> {
    keep.check_range(g.n())?;
    let mut group_of = vec![None; g.n()];
    for (gi, group) in groups.iter().enumerate() {
        group.check_range(g.n())?;
        for v in group.iter() {
            if keep.contains(v) || group_of[v].is_some() {
                return Err(Error::Input(format!("vertex {v} assigned twice in contraction")));
            }
            group_of[v] = Some(gi);
        }
    }
    if let Some(v) = (0..g.n()).find(|&v| !keep.contains(v) && group_of[v].is_none()) {
        return Err(Error::Input(format!("vertex {v} neither kept nor contracted")));
    }
    let kept = keep.ids().to_vec();
    let supers: Vec<usize> = (0..groups.len()).map(|gi| kept.len() + gi).collect();
    let image = |v: usize| -> Option<usize> {
        match group_of[v] {
            Some(gi) => Some(supers[gi]),
            None => kept.binary_search(&v).ok(),
        }
    };
    let mut edges = Vec::new();
    for e in g.edges() {
        if group_of[e.u].is_some() && group_of[e.v].is_some() {
            continue;
        }
        edges.push((image(e.u).unwrap(), image(e.v).unwrap(), e.w));
    }
    let graph = WeightedGraph::new(kept.len() + groups.len(), edges)?;
    Ok(Contraction { graph, kept, supers })
}

/// Merges `V \ keep` into a single super vertex.
pub fn contract_tail(g: &WeightedGraph, keep: &VertexSet) -> Result<(Contraction, usize)> {
    if keep.len() >= g.n() {
        return Err(Error::Precondition("contraction needs a nonempty tail".into()));
    }
    let tail = keep.complement(g.n());
    let c = contract_groups(g, keep, std::slice::from_ref(&tail))?;
    let s = c.supers[0];
    Ok((c, s))
}

/// A graph with a partition `V_1..V_c` and per-part budgets `k_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ConstrainedInstance {
    graph: WeightedGraph,
    parts: Vec<VertexSet>,
    budgets: Vec<usize>,
    part_of: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    graph: WeightedGraph,
    parts: Vec<VertexSet>,
    budgets: Vec<usize>,
}

impl TryFrom<RawInstance> for ConstrainedInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        ConstrainedInstance::new(raw.graph, raw.parts, raw.budgets)
    }
}

impl From<ConstrainedInstance> for RawInstance {
    fn from(inst: ConstrainedInstance) -> Self {
        RawInstance {
            graph: inst.graph,
            parts: inst.parts,
            budgets: inst.budgets,
        }
    }
}

impl ConstrainedInstance {
    /// Validates that `parts` partition the vertex set. Budgets may exceed part sizes
    /// (the instance is then simply infeasible); see [`Self::check_half_budgets`].
    pub fn new(graph: WeightedGraph, parts: Vec<VertexSet>, budgets: Vec<usize>) -> Result<Self> {
        if parts.len() != budgets.len() {
            return Err(Error::Input(format!(
                "{} parts but {} budgets",
                parts.len(),
                budgets.len()
            )));
        }
        let mut part_of = vec![usize::MAX; graph.n()];
        for (pi, part) in parts.iter().enumerate() {
            part.check_range(graph.n())?;
            for v in part.iter() {
                if part_of[v] != usize::MAX {
                    return Err(Error::Input(format!("vertex {v} appears in two parts")));
                }
                part_of[v] = pi;
            }
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::Input(format!("vertex {v} is in no part")));
        }
        Ok(ConstrainedInstance {
            graph,
            parts,
            budgets,
            part_of,
        })
    }

    /// The cardinality-constrained problem `|S| = k` as a one-part instance.
    pub fn single(graph: WeightedGraph, k: usize) -> Self {
        let n = graph.n();
        Self::new(graph, vec![VertexSet::full(n)], vec![k]).expect("one part always partitions V")
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn total_budget(&self) -> usize {
        self.budgets.iter().sum()
    }

    /// The `k_i <= |V_i| / 2` requirement of the constrained problem.
    pub fn check_half_budgets(&self) -> Result<()> {
        for (i, (p, &k)) in self.parts.iter().zip(&self.budgets).enumerate() {
            if 2 * k > p.len() {
                return Err(Error::Precondition(format!(
                    "budget k_{i} = {k} exceeds half of |V_{i}| = {}",
                    p.len()
                )));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, s: &VertexSet) -> bool {
        if s.check_range(self.graph.n()).is_err() {
            return false;
        }
        let mut counts = vec![0usize; self.parts.len()];
        for v in s.iter() {
            counts[self.part_of[v]] += 1;
        }
        counts == self.budgets
    }

    /// Same partition and budgets over a different graph on the same vertex set.
    pub fn with_graph(&self, graph: WeightedGraph) -> Result<Self> {
        Self::new(graph, self.parts.clone(), self.budgets.clone())
    }
}

/// A returned solution with its value and the pipeline stages that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSolution {
    pub set: VertexSet,
    pub value: f64,
    pub feasible: bool,
    pub stage_trace: Vec<String>,
}

impl CutSolution {
    pub fn evaluate(inst: &ConstrainedInstance, set: VertexSet, stage_trace: Vec<String>) -> Result<Self> {
        let value = delta(inst.graph(), &set)?;
        let feasible = inst.is_feasible(&set);
        Ok(CutSolution {
            set,
            value,
            feasible,
            stage_trace,
        })
    }
}
