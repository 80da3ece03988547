//! Exhaustive solvers used as ground truth for every approximation check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{delta, ConstrainedInstance, VertexSet, WeightedGraph, TOL};
use crate::matroid::MatroidOracle;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleLimits {
    /// Largest vertex count for the Gray-code sweep over all subsets.
    pub max_gray_n: usize,
    /// Largest number of candidate sets any enumeration may visit.
    pub max_candidates: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_gray_n: 22,
            max_candidates: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub opt_value: f64,
    /// Lexicographically smallest optimal set.
    pub set: VertexSet,
    /// Number of feasible sets within tolerance of the optimum.
    pub count: u64,
}

/// Running maximum over equal-size candidate sets given as bitmasks.
struct Best {
    value: f64,
    bits: u64,
    count: u64,
    seen: bool,
}

impl Best {
    fn new() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            bits: 0,
            count: 0,
            seen: false,
        }
    }

    fn offer(&mut self, value: f64, bits: u64) {
        self.seen = true;
        if value > self.value + TOL {
            self.value = value;
            self.bits = bits;
            self.count = 1;
        } else if (value - self.value).abs() <= TOL {
            self.count += 1;
            // Equal sizes: the smaller sorted list owns the lowest differing id.
            let diff = bits ^ self.bits;
            if diff != 0 && bits & (diff & diff.wrapping_neg()) != 0 {
                self.bits = bits;
            }
            if value > self.value {
                self.value = value;
            }
        }
    }

    fn finish(self, g: &WeightedGraph) -> Result<OracleResult> {
        if !self.seen {
            return Err(Error::Infeasible("no feasible set".into()));
        }
        let set = VertexSet::from_bits(self.bits);
        let opt_value = delta(g, &set)?;
        Ok(OracleResult {
            opt_value,
            set,
            count: self.count,
        })
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `max { δ(S) : |S| = k, S ∩ forbidden = ∅ }` by a Gray-code sweep with incremental updates.
pub fn oracle_maxcut_k(g: &WeightedGraph, k: usize, forbidden: &VertexSet, limits: &OracleLimits) -> Result<OracleResult> {
    forbidden.check_range(g.n())?;
    let allowed: Vec<usize> = (0..g.n()).filter(|&v| !forbidden.contains(v)).collect();
    if allowed.len() > limits.max_gray_n {
        return Err(Error::Capacity(format!(
            "Gray-code oracle limited to {} free vertices, got {}",
            limits.max_gray_n,
            allowed.len()
        )));
    }
    if k > allowed.len() {
        return Err(Error::Infeasible(format!("k = {k} exceeds {} selectable vertices", allowed.len())));
    }
    let n = g.n();
    let mut member = vec![false; n];
    let mut inside = vec![0.0; n]; // weight from each vertex into the current set
    let mut cut = 0.0;
    let mut size = 0usize;
    let mut bits = 0u64;
    let mut best = Best::new();
    if k == 0 {
        best.offer(0.0, 0);
    }
    let m = allowed.len();
    for step in 1u64..(1u64 << m) {
        let pos = step.trailing_zeros() as usize;
        let v = allowed[pos];
        if member[v] {
            member[v] = false;
            size -= 1;
            cut -= g.degree(v) - 2.0 * inside[v];
        } else {
            cut += g.degree(v) - 2.0 * inside[v];
            member[v] = true;
            size += 1;
        }
        bits ^= 1u64 << v;
        let sign = if member[v] { 1.0 } else { -1.0 };
        for &(u, w) in g.neighbors(v) {
            inside[u] += sign * w;
        }
        if size == k {
            best.offer(cut, bits);
        }
    }
    best.finish(g)
}

/// Depth-first enumeration over per-part combinations with incremental cut updates.
struct PartSearch<'a> {
    g: &'a WeightedGraph,
    choices: Vec<Vec<usize>>,
    budgets: Vec<usize>,
    inside: Vec<f64>,
    best: Best,
}

impl PartSearch<'_> {
    fn add(&mut self, v: usize, cut: f64) -> f64 {
        let next = cut + self.g.degree(v) - 2.0 * self.inside[v];
        for &(u, w) in self.g.neighbors(v) {
            self.inside[u] += w;
        }
        next
    }

    fn remove(&mut self, v: usize) {
        for &(u, w) in self.g.neighbors(v) {
            self.inside[u] -= w;
        }
    }

    fn run(&mut self, part: usize, start: usize, left: usize, cut: f64, bits: u64) {
        if part == self.choices.len() {
            self.best.offer(cut, bits);
            return;
        }
        if left == 0 {
            let next_left = self.budgets.get(part + 1).copied().unwrap_or(0);
            self.run(part + 1, 0, next_left, cut, bits);
            return;
        }
        let avail = self.choices[part].len();
        for i in start..=avail.saturating_sub(left) {
            let v = self.choices[part][i];
            let with_v = self.add(v, cut);
            self.run(part, i + 1, left - 1, with_v, bits | 1u64 << v);
            self.remove(v);
        }
    }
}

/// Exact optimum of the partition-constrained problem, avoiding `forbidden`.
pub fn oracle_constrained(inst: &ConstrainedInstance, forbidden: &VertexSet, limits: &OracleLimits) -> Result<OracleResult> {
    let g = inst.graph();
    forbidden.check_range(g.n())?;
    if g.n() > 64 {
        return Err(Error::Capacity(format!("oracle limited to 64 vertices, got {}", g.n())));
    }
    let choices: Vec<Vec<usize>> = inst
        .parts()
        .iter()
        .map(|p| p.iter().filter(|&v| !forbidden.contains(v)).collect())
        .collect();
    let mut candidates: u64 = 1;
    for (c, &k) in choices.iter().zip(inst.budgets()) {
        if k > c.len() {
            return Err(Error::Infeasible(format!(
                "budget {k} exceeds {} selectable vertices in its part",
                c.len()
            )));
        }
        candidates = candidates.saturating_mul(binomial(c.len(), k));
    }
    if candidates > limits.max_candidates {
        return Err(Error::Capacity(format!(
            "{candidates} candidate sets exceed the limit {}",
            limits.max_candidates
        )));
    }
    let mut search = PartSearch {
        g,
        choices,
        budgets: inst.budgets().to_vec(),
        inside: vec![0.0; g.n()],
        best: Best::new(),
    };
    let first = search.budgets.first().copied().unwrap_or(0);
    search.run(0, 0, first, 0.0, 0);
    search.best.finish(g)
}

/// Exact optimum over the bases of `m`.
pub fn oracle_matroid(g: &WeightedGraph, m: &dyn MatroidOracle, limits: &OracleLimits) -> Result<OracleResult> {
    let n = g.n();
    if m.ground_size() != n {
        return Err(Error::Input("matroid ground set and graph differ in size".into()));
    }
    if n > 64 {
        return Err(Error::Capacity(format!("oracle limited to 64 vertices, got {n}")));
    }
    let rank = m.rank();
    let mut best = Best::new();
    let mut visited: u64 = 0;
    // Stack of (next element to decide, current independent set).
    let mut stack: Vec<(usize, VertexSet)> = vec![(0, VertexSet::empty())];
    while let Some((next, set)) = stack.pop() {
        visited += 1;
        if visited > limits.max_candidates {
            return Err(Error::Capacity(format!(
                "basis enumeration exceeded {} nodes",
                limits.max_candidates
            )));
        }
        if set.len() == rank {
            let bits = set.iter().fold(0u64, |acc, v| acc | 1u64 << v);
            best.offer(g.cut_of_mask(&set.mask(n)), bits);
            continue;
        }
        if next == n || set.len() + (n - next) < rank {
            continue;
        }
        stack.push((next + 1, set.clone()));
        let with = set.with(next);
        if m.is_independent(&with) {
            stack.push((next + 1, with));
        }
    }
    best.finish(g).map_err(|_| Error::Infeasible("matroid has no base".into()))
}

/// Whether some feasible set cuts every edge.
pub fn oracle_all_cut_decision(inst: &ConstrainedInstance, limits: &OracleLimits) -> Result<bool> {
    match oracle_constrained(inst, &VertexSet::empty(), limits) {
        Ok(r) => {
            let total = inst.graph().total_weight();
            Ok(r.opt_value >= total - TOL * total.max(1.0))
        }
        Err(Error::Infeasible(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::Matroid;

    fn lim() -> OracleLimits {
        OracleLimits::default()
    }

    #[test]
    fn maxcut_k_examples() {
        let k3 = WeightedGraph::complete(3, 1.0 / 3.0);
        let r = oracle_maxcut_k(&k3, 1, &VertexSet::empty(), &lim()).unwrap();
        assert!((r.opt_value - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.count, 3);
        assert_eq!(r.set, VertexSet::from([0]));
        let r = oracle_maxcut_k(&k3, 0, &VertexSet::empty(), &lim()).unwrap();
        assert_eq!((r.opt_value, r.count), (0.0, 1));
        let edge = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(oracle_maxcut_k(&edge, 1, &VertexSet::empty(), &lim()).unwrap().opt_value, 1.0);
    }

    #[test]
    fn maxcut_k_respects_forbidden_and_capacity() {
        let star = WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let r = oracle_maxcut_k(&star, 1, &[0].into(), &lim()).unwrap();
        assert_eq!(r.opt_value, 1.0);
        assert_eq!(r.set, VertexSet::from([1]));
        assert!(matches!(oracle_maxcut_k(&star, 4, &[0].into(), &lim()), Err(Error::Infeasible(_))));
        let big = WeightedGraph::edgeless(30);
        assert!(matches!(oracle_maxcut_k(&big, 2, &VertexSet::empty(), &lim()), Err(Error::Capacity(_))));
    }

    #[test]
    fn lexicographic_tie_break() {
        let c4 = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        let r = oracle_maxcut_k(&c4, 2, &VertexSet::empty(), &lim()).unwrap();
        assert_eq!(r.set, VertexSet::from([0, 2]));
        assert_eq!(r.count, 2);
        let inst = ConstrainedInstance::single(c4, 2);
        assert_eq!(oracle_constrained(&inst, &VertexSet::empty(), &lim()).unwrap().set, VertexSet::from([0, 2]));
    }

    #[test]
    fn constrained_examples() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let inst = ConstrainedInstance::new(g.clone(), vec![[0, 1].into(), [2, 3].into()], vec![1, 1]).unwrap();
        let r = oracle_constrained(&inst, &VertexSet::empty(), &lim()).unwrap();
        assert_eq!((r.opt_value, r.count), (2.0, 4));
        let zero = ConstrainedInstance::new(g, vec![[0, 1].into(), [2, 3].into()], vec![0, 0]).unwrap();
        assert_eq!(oracle_constrained(&zero, &VertexSet::empty(), &lim()).unwrap().opt_value, 0.0);
    }

    #[test]
    fn matroid_examples() {
        let edge = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let r = oracle_matroid(&edge, &Matroid::uniform(2, 1).unwrap(), &lim()).unwrap();
        assert_eq!(r.opt_value, 1.0);
        // Vertices of G are the edges of a triangle; bases are its three spanning trees.
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let r = oracle_matroid(&g, &Matroid::graphic(vec![(0, 1), (1, 2), (0, 2)]), &lim()).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.set, VertexSet::from([0, 2]));
        assert_eq!(r.opt_value, 3.0);
    }

    #[test]
    fn all_cut_decision_examples() {
        let tri = ConstrainedInstance::single(WeightedGraph::complete(3, 1.0), 1);
        assert!(!oracle_all_cut_decision(&tri, &lim()).unwrap());
        let empty = ConstrainedInstance::single(WeightedGraph::edgeless(4), 2);
        assert!(oracle_all_cut_decision(&empty, &lim()).unwrap());
        let star = WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let inst = ConstrainedInstance::single(star, 3);
        assert!(oracle_all_cut_decision(&inst, &lim()).unwrap());
    }
}
