//! Matroid-constrained Max-Cut: independence oracles, the edge LP over the base polytope,
//! and pipage rounding of the quadratic cut objective.

mod lp;
mod pipage;

pub use lp::{solve_lp, FractionalPoint};
pub use pipage::{pipage_round, PipageOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{delta, CutSolution, VertexSet, WeightedGraph, TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatroidKindTag {
    Uniform,
    Partition,
    Graphic,
    Explicit,
}

/// Independence oracle over the ground set `0..ground_size()`.
pub trait MatroidOracle {
    fn ground_size(&self) -> usize;

    fn is_independent(&self, set: &VertexSet) -> bool;

    fn kind(&self) -> MatroidKindTag;

    /// Rank of an arbitrary subset. The default runs the matroid greedy algorithm.
    fn rank_of(&self, set: &VertexSet) -> usize {
        let mut basis = VertexSet::empty();
        for v in set.iter() {
            let candidate = basis.with(v);
            if self.is_independent(&candidate) {
                basis = candidate;
            }
        }
        basis.len()
    }

    fn rank(&self) -> usize {
        self.rank_of(&VertexSet::full(self.ground_size()))
    }

    /// Disjoint blocks with capacities whose equalities describe the base polytope together
    /// with `0 <= x <= 1`. Available for uniform and partition matroids.
    fn blocks(&self) -> Option<Vec<(VertexSet, usize)>> {
        None
    }
}

/// The four concrete matroid families understood by the instance format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Matroid {
    Uniform { n: usize, k: usize },
    Partition { parts: Vec<VertexSet>, capacities: Vec<usize> },
    /// Ground element `v` is the edge `ends[v]` of an auxiliary multigraph.
    Graphic { ends: Vec<(usize, usize)> },
    /// Independent sets are the subsets of the listed sets.
    Explicit { n: usize, sets: Vec<VertexSet> },
}

impl Matroid {
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::Infeasible(format!("uniform rank {k} exceeds ground size {n}")));
        }
        Ok(Matroid::Uniform { n, k })
    }

    pub fn partition(parts: Vec<VertexSet>, capacities: Vec<usize>) -> Result<Self> {
        if parts.len() != capacities.len() {
            return Err(Error::Input("partition matroid needs one capacity per part".into()));
        }
        let n = parts.iter().map(|p| p.len()).sum::<usize>();
        let mut seen = vec![false; n];
        for v in parts.iter().flat_map(|p| p.iter()) {
            if v >= n || seen[v] {
                return Err(Error::Input("partition matroid parts must partition 0..n".into()));
            }
            seen[v] = true;
        }
        Ok(Matroid::Partition { parts, capacities })
    }

    pub fn graphic(ends: Vec<(usize, usize)>) -> Self {
        Matroid::Graphic { ends }
    }

    pub fn explicit(n: usize, sets: Vec<VertexSet>) -> Result<Self> {
        for s in &sets {
            s.check_range(n)?;
        }
        Ok(Matroid::Explicit { n, sets })
    }

    /// Whether a base exists whose parts meet every capacity exactly.
    pub fn has_base(&self) -> bool {
        match self {
            Matroid::Uniform { n, k } => k <= n,
            Matroid::Partition { parts, capacities } => {
                parts.iter().zip(capacities).all(|(p, &k)| k <= p.len())
            }
            _ => true,
        }
    }
}

fn forest(ends: &[(usize, usize)], set: &VertexSet) -> bool {
    let nodes = ends.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for v in set.iter() {
        let (a, b) = ends[v];
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

impl MatroidOracle for Matroid {
    fn ground_size(&self) -> usize {
        match self {
            Matroid::Uniform { n, .. } | Matroid::Explicit { n, .. } => *n,
            Matroid::Partition { parts, .. } => parts.iter().map(|p| p.len()).sum(),
            Matroid::Graphic { ends } => ends.len(),
        }
    }

    fn is_independent(&self, set: &VertexSet) -> bool {
        if set.check_range(self.ground_size()).is_err() {
            return false;
        }
        match self {
            Matroid::Uniform { k, .. } => set.len() <= *k,
            Matroid::Partition { parts, capacities } => parts
                .iter()
                .zip(capacities)
                .all(|(p, &k)| set.iter().filter(|&v| p.contains(v)).count() <= k),
            Matroid::Graphic { ends } => forest(ends, set),
            Matroid::Explicit { sets, .. } => sets.iter().any(|s| set.is_subset(s)),
        }
    }

    fn kind(&self) -> MatroidKindTag {
        match self {
            Matroid::Uniform { .. } => MatroidKindTag::Uniform,
            Matroid::Partition { .. } => MatroidKindTag::Partition,
            Matroid::Graphic { .. } => MatroidKindTag::Graphic,
            Matroid::Explicit { .. } => MatroidKindTag::Explicit,
        }
    }

    fn rank_of(&self, set: &VertexSet) -> usize {
        match self {
            Matroid::Uniform { k, .. } => set.len().min(*k),
            Matroid::Partition { parts, capacities } => parts
                .iter()
                .zip(capacities)
                .map(|(p, &k)| set.iter().filter(|&v| p.contains(v)).count().min(k))
                .sum(),
            Matroid::Explicit { sets, .. } => sets.iter().map(|s| set.intersection(s).len()).max().unwrap_or(0),
            Matroid::Graphic { .. } => {
                let mut basis = VertexSet::empty();
                for v in set.iter() {
                    let candidate = basis.with(v);
                    if self.is_independent(&candidate) {
                        basis = candidate;
                    }
                }
                basis.len()
            }
        }
    }

    fn blocks(&self) -> Option<Vec<(VertexSet, usize)>> {
        match self {
            Matroid::Uniform { n, k } => Some(vec![(VertexSet::full(*n), *k)]),
            Matroid::Partition { parts, capacities } => {
                Some(parts.iter().cloned().zip(capacities.iter().copied()).collect())
            }
            _ => None,
        }
    }
}

/// Largest ground set for which rank constraints are enumerated explicitly.
pub const MAX_ENUMERATED_GROUND: usize = 16;

/// Every subset of the ground set as a bitmask, with its rank. Only for small ground sets.
pub(crate) fn enumerate_ranks(m: &dyn MatroidOracle) -> Result<Vec<(u32, usize)>> {
    let n = m.ground_size();
    if n > MAX_ENUMERATED_GROUND {
        return Err(Error::Capacity(format!(
            "rank enumeration limited to {MAX_ENUMERATED_GROUND} ground elements, got {n}"
        )));
    }
    Ok((1u32..(1u32 << n))
        .map(|bits| (bits, m.rank_of(&VertexSet::from_bits(bits as u64))))
        .collect())
}

/// Whether `x` lies in the base polytope of `m` within `tol`.
pub fn in_base_polytope(m: &dyn MatroidOracle, x: &[f64], tol: f64) -> Result<bool> {
    let n = m.ground_size();
    if x.len() != n {
        return Err(Error::Input(format!("point has {} coordinates, ground set {n}", x.len())));
    }
    if x.iter().any(|&xi| !(-tol..=1.0 + tol).contains(&xi)) {
        return Ok(false);
    }
    if let Some(blocks) = m.blocks() {
        let covered: usize = blocks.iter().map(|(b, _)| b.len()).sum();
        return Ok(covered == n
            && blocks.iter().all(|(b, k)| {
                let s: f64 = b.iter().map(|v| x[v]).sum();
                (s - *k as f64).abs() <= tol
            }));
    }
    let total: f64 = x.iter().sum();
    if (total - m.rank() as f64).abs() > tol {
        return Ok(false);
    }
    Ok(enumerate_ranks(m)?.into_iter().all(|(bits, r)| {
        let s: f64 = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| x[i]).sum();
        s <= r as f64 + tol
    }))
}

/// Quadratic relaxation of the cut: `Σ w_e (x_u + x_v - 2 x_u x_v)`.
pub fn quad_value(g: &WeightedGraph, x: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.w * (x[e.u] + x[e.v] - 2.0 * x[e.u] * x[e.v]))
        .sum()
}

/// The three terms of `(x+y-2xy) <= min{x+y, 2-x-y} <= 2(x+y-2xy)` and whether both hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn check_sandwich(x: f64, y: f64) -> Result<Sandwich> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::Input(format!("sandwich inputs ({x}, {y}) outside [0, 1]")));
    }
    let lhs = x + y - 2.0 * x * y;
    let mid = (x + y).min(2.0 - x - y);
    let rhs = 2.0 * lhs;
    let ok = lhs <= mid + 1e-12 && mid <= rhs + 1e-12;
    Ok(Sandwich { lhs, mid, rhs, ok })
}

/// Full matroid pipeline: LP over the base polytope, then pipage rounding of the quadratic.
#[derive(Clone, Debug)]
pub struct MatroidSolution {
    pub solution: CutSolution,
    pub lp_value: f64,
    pub lp_point: FractionalPoint,
    pub pipage: PipageOutcome,
}

pub fn solve_matroid(g: &WeightedGraph, m: &dyn MatroidOracle) -> Result<MatroidSolution> {
    let lp_point = solve_lp(g, m)?;
    let lp_value = lp_point.value(g);
    let pipage = pipage_round(g, m, &lp_point.x)?;
    let set = pipage.base.clone();
    let value = delta(g, &set)?;
    let feasible = m.is_independent(&set) && set.len() == m.rank();
    if value + 1e-6 < 0.5 * lp_value - TOL {
        // Only reachable through numerical trouble in the LP or the rounding.
        return Err(Error::Stall(format!(
            "pipage output {value} below half the LP value {lp_value}"
        )));
    }
    Ok(MatroidSolution {
        solution: CutSolution {
            set,
            value,
            feasible,
            stage_trace: vec!["lp".into(), "pipage".into()],
        },
        lp_value,
        lp_point,
        pipage,
    })
}
