//! Exhaustive optima: cardinality, partition and all-cut decisions.

use cmaxcut::graph::{ConstrainedInstance, VertexSet, WeightedGraph};
use cmaxcut::oracle::{oracle_all_cut_decision, oracle_constrained, oracle_maxcut_k, OracleLimits};

fn main() -> cmaxcut::error::Result<()> {
    let limits = OracleLimits::default();
    let k4 = WeightedGraph::complete(4, 1.0 / 6.0);
    for k in 0..=2 {
        let r = oracle_maxcut_k(&k4, k, &VertexSet::empty(), &limits)?;
        println!("K4, |S| = {k}: OPT {:.4} attained by {} sets, smallest {:?}", r.opt_value, r.count, r.set.ids());
    }

    let c6 = WeightedGraph::new(6, (0..6).map(|i| (i, (i + 1) % 6, 1.0)))?.normalize();
    let inst = ConstrainedInstance::new(c6, vec![[0, 1, 2].into(), [3, 4, 5].into()], vec![1, 2])?;
    let r = oracle_constrained(&inst, &VertexSet::empty(), &limits)?;
    println!("C6 with budgets (1, 2): OPT {:.4} at {:?}", r.opt_value, r.set.ids());
    println!("some feasible set cuts every edge: {}", oracle_all_cut_decision(&inst, &limits)?);

    let forbidden = VertexSet::from([0]);
    let r = oracle_constrained(&inst, &forbidden, &limits)?;
    println!("avoiding vertex 0: OPT {:.4} at {:?}", r.opt_value, r.set.ids());
    Ok(())
}
