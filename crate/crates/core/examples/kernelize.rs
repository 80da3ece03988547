//! Kernelize a star-heavy graph and walk the optimum into the kept vertices.

use cmaxcut::graph::{ConstrainedInstance, VertexSet, WeightedGraph};
use cmaxcut::kernel::{kernelize_single, migrate_to_kernel};
use cmaxcut::oracle::{oracle_constrained, OracleLimits};

fn main() -> cmaxcut::error::Result<()> {
    // Two hubs sharing twelve leaves, plus a short tail.
    let mut edges: Vec<(usize, usize, f64)> = (2..14).flat_map(|l| [(0, l, 1.0), (1, l, 1.0)]).collect();
    edges.push((13, 14, 1.0));
    let g = WeightedGraph::new(15, edges)?.normalize();
    let (k, eps) = (2, 0.5);

    let kernel = kernelize_single(&g, k, eps)?;
    println!("kept {:?}, super vertex {:?}", kernel.vertex_bijection, kernel.forbidden.ids());

    let inst = ConstrainedInstance::single(g.clone(), k);
    let limits = OracleLimits::default();
    let opt = oracle_constrained(&inst, &VertexSet::empty(), &limits)?;
    let dropped = kernel.kept().complement(g.n());
    let restricted = oracle_constrained(&inst, &dropped, &limits)?;
    println!("OPT = {:.4}, OPT on kept vertices = {:.4}", opt.opt_value, restricted.opt_value);

    // Start from a poor feasible set outside the kernel and migrate it in.
    let start = VertexSet::from([13, 14]);
    let walk = migrate_to_kernel(&inst, &start, &kernel)?;
    for s in &walk.steps {
        println!(
            "swap out {} for {}: {:.4} -> {:.4} (bound factor {:.3}, ok = {})",
            s.j, s.i, s.old_value, s.new_value, s.factor, s.satisfies_bound()
        );
    }
    println!("final set {:?}", walk.set.ids());
    Ok(())
}
