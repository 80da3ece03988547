//! Approximate kernels: keep the `ceil(k_i/ε)` highest-degree vertices of each part and
//! merge the rest of the part into a super vertex that may not be selected.
//!
//! The exchange machinery below is what makes the kernel sound: any feasible set can be
//! walked into the kept vertices one swap at a time, each swap losing at most a
//! `2/|H \ S|` fraction of the cut. It is exposed so tests can witness the guarantee.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    contract_groups, delta, delta_between, weighted_degree_order, ConstrainedInstance, VertexSet, WeightedGraph,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelResult {
    pub reduced: WeightedGraph,
    /// Reduced ids of the super vertices.
    pub forbidden: VertexSet,
    /// Reduced parts, each including its super vertex when one exists.
    pub part_map: Vec<VertexSet>,
    pub budgets: Vec<usize>,
    pub epsilon: f64,
    /// Reduced id -> original id, for every kept (non-super) vertex.
    pub vertex_bijection: Vec<usize>,
    /// Per part, the reduced id of its super vertex.
    pub supers: Vec<Option<usize>>,
}

impl KernelResult {
    pub fn reduced_instance(&self) -> Result<ConstrainedInstance> {
        ConstrainedInstance::new(self.reduced.clone(), self.part_map.clone(), self.budgets.clone())
    }

    /// Original ids of all kept vertices.
    pub fn kept(&self) -> VertexSet {
        self.vertex_bijection.iter().copied().collect()
    }

    /// Kept original vertices of part `i`.
    pub fn kept_in_part(&self, i: usize) -> VertexSet {
        self.part_map[i]
            .iter()
            .filter(|r| !self.forbidden.contains(*r))
            .map(|r| self.vertex_bijection[r])
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// Original ids of a reduced set; fails on super vertices.
    pub fn lift(&self, reduced: &VertexSet) -> Result<VertexSet> {
        reduced
            .iter()
            .map(|r| {
                if self.forbidden.contains(r) {
                    return Err(Error::Input(format!("super vertex {r} cannot be lifted")));
                }
                self.vertex_bijection
                    .get(r)
                    .copied()
                    .ok_or_else(|| Error::Input(format!("reduced vertex {r} out of range")))
            })
            .collect()
    }

    /// Reduced ids of a set of kept original vertices.
    pub fn restrict(&self, original: &VertexSet) -> Result<VertexSet> {
        original
            .iter()
            .map(|v| {
                self.vertex_bijection
                    .binary_search(&v)
                    .map_err(|_| Error::Input(format!("vertex {v} is not kept by the kernel")))
            })
            .collect()
    }
}

/// `ceil(k/ε)`, robust to the representation error of `ε`.
pub fn kernel_size(k: usize, eps: f64) -> usize {
    (k as f64 / eps - 1e-9).ceil().max(0.0) as usize
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Parameter(format!("epsilon {eps} outside (0, 1/2]")));
    }
    Ok(())
}

/// Kernel for the single constraint `|S| = k`.
pub fn kernelize_single(g: &WeightedGraph, k: usize, eps: f64) -> Result<KernelResult> {
    check_eps(eps)?;
    if k == 0 || 2 * k > g.n() {
        return Err(Error::Precondition(format!("need 1 <= k <= n/2, got k = {k}, n = {}", g.n())));
    }
    kernelize_multi(&ConstrainedInstance::single(g.clone(), k), eps)
}

/// Per-part kernel: parts with `ceil(k_i/ε) + 1 <= |V_i|` keep their top vertices by weighted
/// degree and contract the rest into `s_i`; smaller parts are kept whole.
pub fn kernelize_multi(inst: &ConstrainedInstance, eps: f64) -> Result<KernelResult> {
    check_eps(eps)?;
    inst.check_half_budgets()?;
    let g = inst.graph();
    let order = weighted_degree_order(g);
    let mut keep = Vec::new();
    let mut tails = Vec::new();
    let mut tail_part = Vec::new();
    for (i, (part, &k)) in inst.parts().iter().zip(inst.budgets()).enumerate() {
        let ranked: Vec<usize> = order.iter().copied().filter(|&v| part.contains(v)).collect();
        let h = kernel_size(k, eps);
        if h + 1 <= part.len() {
            keep.extend_from_slice(&ranked[..h]);
            tails.push(ranked[h..].iter().copied().collect::<VertexSet>());
            tail_part.push(i);
        } else {
            keep.extend_from_slice(&ranked);
        }
    }
    let keep: VertexSet = keep.into_iter().collect();
    let contraction = contract_groups(g, &keep, &tails)?;
    let mut supers = vec![None; inst.num_parts()];
    for (&i, &s) in tail_part.iter().zip(&contraction.supers) {
        supers[i] = Some(s);
    }
    let part_map = inst
        .parts()
        .iter()
        .zip(&supers)
        .map(|(part, s)| {
            part.iter()
                .filter_map(|v| contraction.reduced_id(v))
                .chain(s.iter().copied())
                .collect()
        })
        .collect();
    Ok(KernelResult {
        reduced: contraction.graph,
        forbidden: contraction.supers.iter().copied().collect(),
        part_map,
        budgets: inst.budgets().to_vec(),
        epsilon: eps,
        vertex_bijection: contraction.kept,
        supers,
    })
}

/// One swap `S -> (S - j) + i` with its guaranteed retention factor `1 - 2/|H \ S|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeStep {
    pub i: usize,
    pub j: usize,
    pub old_value: f64,
    pub new_value: f64,
    pub factor: f64,
}

impl ExchangeStep {
    pub fn satisfies_bound(&self) -> bool {
        self.new_value >= self.factor * self.old_value - 1e-12
    }
}

/// Swaps the lowest-id `j ∈ S \ H` for the `i ∈ H \ S` with least weight into `S`.
///
/// Requires `|H| > |S|` and every vertex of `H \ S` to have weighted degree at least that
/// of every vertex in `S \ H`.
pub fn local_exchange_step(g: &WeightedGraph, s: &VertexSet, h_set: &VertexSet) -> Result<ExchangeStep> {
    s.check_range(g.n())?;
    h_set.check_range(g.n())?;
    let outside = s.difference(h_set);
    let Some(j) = outside.iter().next() else {
        return Err(Error::Precondition("S is already inside H; nothing to exchange".into()));
    };
    if h_set.len() <= s.len() {
        return Err(Error::Precondition("exchange needs |H| > |S|".into()));
    }
    let candidates = h_set.difference(s);
    let min_in = candidates.iter().map(|v| g.degree(v)).fold(f64::INFINITY, f64::min);
    let max_out = outside.iter().map(|v| g.degree(v)).fold(f64::NEG_INFINITY, f64::max);
    if min_in < max_out {
        return Err(Error::Precondition("vertices of H \\ S must dominate S \\ H in degree".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for v in candidates.iter() {
        let w = delta_between(g, s, &[v].into())?;
        if best.is_none_or(|(_, bw)| w < bw) {
            best = Some((v, w));
        }
    }
    let (i, _) = best.expect("|H| > |S| leaves a candidate");
    let old_value = delta(g, s)?;
    let new_value = delta(g, &s.without(j).with(i))?;
    Ok(ExchangeStep {
        i,
        j,
        old_value,
        new_value,
        factor: 1.0 - 2.0 / candidates.len() as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Migration {
    /// Feasible set (original ids) contained in the kept vertices.
    pub set: VertexSet,
    pub steps: Vec<ExchangeStep>,
}

/// Walks a feasible set into the kernel's kept vertices, always repairing the lowest-index
/// part that still uses a contracted vertex.
pub fn migrate_to_kernel(inst: &ConstrainedInstance, s_star: &VertexSet, kernel: &KernelResult) -> Result<Migration> {
    if !inst.is_feasible(s_star) {
        return Err(Error::Precondition("starting set is not feasible".into()));
    }
    let g = inst.graph();
    let kept: Vec<VertexSet> = (0..inst.num_parts()).map(|i| kernel.kept_in_part(i)).collect();
    let mut current = s_star.clone();
    let mut steps = Vec::new();
    while let Some(p) = (0..inst.num_parts())
        .find(|&p| !current.intersection(&inst.parts()[p]).is_subset(&kept[p]))
    {
        let h_set = current.difference(&inst.parts()[p]).union(&kept[p]);
        let step = local_exchange_step(g, &current, &h_set)?;
        current = current.without(step.j).with(step.i);
        steps.push(step);
    }
    Ok(Migration { set: current, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_maxcut_k, OracleLimits};

    fn star(leaves: usize) -> WeightedGraph {
        WeightedGraph::new(leaves + 1, (1..=leaves).map(|l| (0, l, 1.0))).unwrap()
    }

    #[test]
    fn triangle_keeps_two_plus_super() {
        let k = kernelize_single(&WeightedGraph::complete(3, 1.0 / 3.0), 1, 0.5).unwrap();
        assert_eq!(k.reduced.n(), 3);
        assert_eq!(k.forbidden, VertexSet::from([2]));
        assert_eq!(k.vertex_bijection, vec![0, 1]);
        assert_eq!(k.part_map, vec![VertexSet::from([0, 1, 2])]);
    }

    #[test]
    fn large_ratio_is_identity() {
        let g = WeightedGraph::complete(4, 1.0);
        let k = kernelize_single(&g, 2, 0.5).unwrap();
        assert!(k.is_identity());
        assert_eq!(k.reduced, g);
    }

    #[test]
    fn star_kernel_preserves_optimum() {
        let g = star(9);
        let k = kernelize_single(&g, 1, 0.5).unwrap();
        assert_eq!(k.vertex_bijection, vec![0, 1]);
        assert_eq!(k.reduced.n(), 3);
        let lim = OracleLimits::default();
        let full = oracle_maxcut_k(&g, 1, &VertexSet::empty(), &lim).unwrap();
        let kern = oracle_maxcut_k(&k.reduced, 1, &k.forbidden, &lim).unwrap();
        assert_eq!(full.opt_value, 9.0);
        assert_eq!(kern.opt_value, 9.0);
        assert_eq!(k.lift(&kern.set).unwrap(), VertexSet::from([0]));
    }

    #[test]
    fn parameter_errors() {
        let g = WeightedGraph::complete(4, 1.0);
        assert!(matches!(kernelize_single(&g, 3, 0.5), Err(Error::Precondition(_))));
        assert!(matches!(kernelize_single(&g, 1, 0.6), Err(Error::Parameter(_))));
        assert!(matches!(kernelize_single(&g, 1, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn multi_two_triangles() {
        let mut edges = Vec::new();
        for base in [0, 3] {
            edges.extend([(base, base + 1, 1.0), (base + 1, base + 2, 1.0), (base, base + 2, 1.0)]);
        }
        let g = WeightedGraph::new(6, edges).unwrap();
        let inst = ConstrainedInstance::new(g, vec![[0, 1, 2].into(), [3, 4, 5].into()], vec![1, 1]).unwrap();
        let k = kernelize_multi(&inst, 0.5).unwrap();
        assert_eq!(k.forbidden.len(), 2);
        assert_eq!(k.reduced.n(), 6);
        for i in 0..2 {
            assert_eq!(k.kept_in_part(i).len(), 2);
            assert!(k.part_map[i].contains(k.supers[i].unwrap()));
        }
    }

    #[test]
    fn multi_single_part_matches_single() {
        let g = star(9);
        let a = kernelize_single(&g, 2, 0.5).unwrap();
        let b = kernelize_multi(&ConstrainedInstance::single(g, 2), 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_tiny_parts_identity() {
        let g = WeightedGraph::complete(6, 1.0);
        let inst = ConstrainedInstance::new(g, vec![[0, 1, 2].into(), [3, 4, 5].into()], vec![1, 1]).unwrap();
        let k = kernelize_multi(&inst, 0.25).unwrap();
        assert!(k.is_identity());
    }

    #[test]
    fn exchange_on_k4() {
        let g = WeightedGraph::complete(4, 1.0 / 6.0);
        let step = local_exchange_step(&g, &[3].into(), &[0, 1, 2].into()).unwrap();
        assert_eq!(step.j, 3);
        assert_eq!(step.i, 0);
        assert!((step.new_value - 0.5).abs() < 1e-12);
        assert!((step.new_value - step.old_value).abs() < 1e-12);
        assert!(step.satisfies_bound());
    }

    #[test]
    fn exchange_on_star() {
        let g = star(3);
        let step = local_exchange_step(&g, &[1].into(), &[0, 2].into()).unwrap();
        // Neither 0 nor 2 touches S = {1} except 0; 2 has zero weight into S.
        assert_eq!(step.i, 2);
        assert_eq!(step.factor, 0.0);
        assert!(step.satisfies_bound());
    }

    #[test]
    fn exchange_needs_work() {
        let g = star(3);
        assert!(matches!(
            local_exchange_step(&g, &[0].into(), &[0, 1].into()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn migrate_examples() {
        let g = WeightedGraph::complete(3, 1.0 / 3.0);
        let inst = ConstrainedInstance::single(g, 1);
        let k = kernelize_multi(&inst, 0.5).unwrap();
        let inside = migrate_to_kernel(&inst, &[1].into(), &k).unwrap();
        assert_eq!(inside.set, VertexSet::from([1]));
        assert!(inside.steps.is_empty());
        let moved = migrate_to_kernel(&inst, &[2].into(), &k).unwrap();
        assert_eq!(moved.steps.len(), 1);
        assert!((delta(inst.graph(), &moved.set).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(moved.set.is_subset(&k.kept()));
        assert!(migrate_to_kernel(&inst, &[0, 1].into(), &k).is_err());
    }
}
