use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::{Deserialize, Serialize};

use super::{enumerate_ranks, MatroidOracle};
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

/// Optimal point of the edge LP: vertex values `x` in the base polytope and per-edge
/// values `y` (in `g.edges()` order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FractionalPoint {
    pub fn value(&self, g: &WeightedGraph) -> f64 {
        g.edges().iter().zip(&self.y).map(|(e, y)| e.w * y).sum()
    }
}

const MAX_CUT_ROUNDS: usize = 1000;

fn lp_error(e: minilp::Error) -> Error {
    match e {
        minilp::Error::Infeasible => Error::Infeasible("matroid LP has no feasible point".into()),
        minilp::Error::Unbounded => Error::Input("matroid LP unbounded".into()),
    }
}

/// Solves `max Σ w_e y_e` s.t. `y_uv <= x_u + x_v`, `y_uv <= 2 - x_u - x_v`, `x` in the
/// base polytope of `m`.
///
/// Uniform and partition matroids get their block equalities directly. Other matroids
/// start from `x(V) = rank(V)` and add violated rank inequalities `x(A) <= r(A)` found by
/// enumerating every subset, so their ground set is capped at
/// [`MAX_ENUMERATED_GROUND`](super::MAX_ENUMERATED_GROUND).
pub fn solve_lp(g: &WeightedGraph, m: &dyn MatroidOracle) -> Result<FractionalPoint> {
    let n = g.n();
    if m.ground_size() != n {
        return Err(Error::Input(format!(
            "matroid ground set has {} elements, graph has {n} vertices",
            m.ground_size()
        )));
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<Variable> = (0..n).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect();
    let ys: Vec<Variable> = g
        .edges()
        .iter()
        .map(|e| problem.add_var(e.w, (0.0, 1.0)))
        .collect();
    for (e, &y) in g.edges().iter().zip(&ys) {
        problem.add_constraint([(y, 1.0), (xs[e.u], -1.0), (xs[e.v], -1.0)], ComparisonOp::Le, 0.0);
        problem.add_constraint([(y, 1.0), (xs[e.u], 1.0), (xs[e.v], 1.0)], ComparisonOp::Le, 2.0);
    }

    let solution = match m.blocks() {
        Some(blocks) => {
            for (block, k) in &blocks {
                if *k > block.len() {
                    return Err(Error::Infeasible(format!(
                        "capacity {k} exceeds block of size {}",
                        block.len()
                    )));
                }
                let expr: Vec<(Variable, f64)> = block.iter().map(|v| (xs[v], 1.0)).collect();
                problem.add_constraint(expr, ComparisonOp::Eq, *k as f64);
            }
            problem.solve().map_err(lp_error)?
        }
        None => {
            let ranks = enumerate_ranks(m)?;
            let rank = m.rank();
            problem.add_constraint(xs.iter().map(|&x| (x, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, rank as f64);
            let mut solution = problem.solve().map_err(lp_error)?;
            let mut rounds = 0;
            loop {
                let x: Vec<f64> = xs.iter().map(|&v| solution[v]).collect();
                let violated = ranks
                    .iter()
                    .map(|&(bits, r)| {
                        let load: f64 = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| x[i]).sum();
                        (bits, r as f64 - load)
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                match violated {
                    Some((bits, slack)) if slack < -1e-9 => {
                        rounds += 1;
                        if rounds > MAX_CUT_ROUNDS {
                            return Err(Error::Capacity("rank separation did not settle".into()));
                        }
                        let set = VertexSet::from_bits(bits as u64);
                        let expr: Vec<(Variable, f64)> = set.iter().map(|v| (xs[v], 1.0)).collect();
                        let r = ranks[bits as usize - 1].1 as f64;
                        solution = solution
                            .add_constraint(expr, ComparisonOp::Le, r)
                            .map_err(lp_error)?;
                    }
                    _ => break,
                }
            }
            solution
        }
    };

    let clamp = |v: f64| v.clamp(0.0, 1.0);
    Ok(FractionalPoint {
        x: xs.iter().map(|&v| clamp(solution[v])).collect(),
        y: ys.iter().map(|&v| clamp(solution[v])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{in_base_polytope, Matroid};

    #[test]
    fn single_edge_rank_one() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let p = solve_lp(&g, &Matroid::uniform(2, 1).unwrap()).unwrap();
        assert!((p.value(&g) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn triangle_rank_one_at_least_two_thirds() {
        let g = WeightedGraph::complete(3, 1.0 / 3.0);
        let p = solve_lp(&g, &Matroid::uniform(3, 1).unwrap()).unwrap();
        assert!(p.value(&g) >= 2.0 / 3.0 - 1e-7);
    }

    #[test]
    fn edgeless_is_zero() {
        let g = WeightedGraph::edgeless(4);
        let m = Matroid::partition(vec![[0, 1].into(), [2, 3].into()], vec![1, 1]).unwrap();
        let p = solve_lp(&g, &m).unwrap();
        assert_eq!(p.value(&g), 0.0);
        assert!(in_base_polytope(&m, &p.x, 1e-7).unwrap());
    }

    #[test]
    fn graphic_lp_respects_rank_cuts() {
        // Ground elements 0,1 are parallel edges, so x_0 + x_1 <= 1 must be discovered.
        let g = WeightedGraph::new(3, [(0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let m = Matroid::graphic(vec![(0, 1), (0, 1), (1, 2)]);
        let p = solve_lp(&g, &m).unwrap();
        assert!(in_base_polytope(&m, &p.x, 1e-7).unwrap());
        assert!(p.x[0] + p.x[1] <= 1.0 + 1e-7);
    }

    #[test]
    fn missing_base_is_infeasible() {
        let g = WeightedGraph::complete(3, 1.0);
        let m = Matroid::Partition {
            parts: vec![[0].into(), [1, 2].into()],
            capacities: vec![2, 1],
        };
        assert!(matches!(solve_lp(&g, &m), Err(Error::Infeasible(_))));
    }
}
