use serde::{Deserialize, Serialize};

use super::{enumerate_ranks, in_base_polytope, quad_value, MatroidOracle};
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

const INTEGRAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipageOutcome {
    pub base: VertexSet,
    /// Quadratic objective before the first step and after every step.
    pub trace: Vec<f64>,
}

fn is_fractional(v: f64) -> bool {
    v > INTEGRAL_TOL && v < 1.0 - INTEGRAL_TOL
}

fn snap(v: f64) -> f64 {
    if v <= INTEGRAL_TOL {
        0.0
    } else if v >= 1.0 - INTEGRAL_TOL {
        1.0
    } else {
        v
    }
}

/// A move direction `e_u - e_v` with the largest feasible step each way.
struct Move {
    u: usize,
    v: usize,
    forward: f64,
    backward: f64,
}

fn block_move(blocks: &[(VertexSet, usize)], x: &[f64]) -> Option<Move> {
    blocks.iter().find_map(|(block, _)| {
        let mut frac = block.iter().filter(|&i| is_fractional(x[i]));
        let u = frac.next()?;
        let v = frac.next()?;
        Some(Move {
            u,
            v,
            forward: (1.0 - x[u]).min(x[v]),
            backward: x[u].min(1.0 - x[v]),
        })
    })
}

/// Moves inside the smallest tight set holding a fractional coordinate. Any tight set that
/// separated two of its fractional members would intersect it in a smaller such set, so
/// both directions have room.
fn rank_move(ranks: &[(u32, usize)], x: &[f64]) -> Result<Move> {
    let n = x.len();
    let load = |bits: u32| -> f64 { (0..n).filter(|i| bits >> i & 1 == 1).map(|i| x[i]).sum() };
    let slacks: Vec<(u32, f64)> = ranks.iter().map(|&(b, r)| (b, r as f64 - load(b))).collect();
    let frac_in = |b: u32| (0..n).filter(move |&i| b >> i & 1 == 1 && is_fractional(x[i]));
    let tight = slacks
        .iter()
        .filter(|&&(b, s)| s.abs() <= 1e-9 && frac_in(b).next().is_some())
        .min_by_key(|&&(b, _)| (b.count_ones(), b))
        .ok_or_else(|| Error::Stall("no tight set holds a fractional coordinate".into()))?
        .0;
    let mut frac = frac_in(tight);
    let u = frac.next().expect("filtered above");
    let v = frac
        .next()
        .ok_or_else(|| Error::Stall(format!("no fractional partner for coordinate {u}")))?;
    let limit = |inside: usize, outside: usize| -> f64 {
        slacks
            .iter()
            .filter(|(b, _)| b >> inside & 1 == 1 && b >> outside & 1 == 0)
            .map(|&(_, s)| s.max(0.0))
            .fold(f64::INFINITY, f64::min)
    };
    Ok(Move {
        u,
        v,
        forward: (1.0 - x[u]).min(x[v]).min(limit(u, v)),
        backward: x[u].min(1.0 - x[v]).min(limit(v, u)),
    })
}

/// Rounds a point of the base polytope to a base without decreasing [`quad_value`].
///
/// Each step moves along `±(e_u - e_v)` for two fractional coordinates sharing a tight
/// constraint, as far as the polytope allows. The objective is convex along such a line,
/// so the better endpoint is never worse than the start.
pub fn pipage_round(g: &WeightedGraph, m: &dyn MatroidOracle, x: &[f64]) -> Result<PipageOutcome> {
    let n = g.n();
    if m.ground_size() != n {
        return Err(Error::Input("matroid ground set and graph differ in size".into()));
    }
    if !in_base_polytope(m, x, 1e-7)? {
        return Err(Error::Input("point is outside the base polytope".into()));
    }
    let mut x: Vec<f64> = x.iter().map(|&v| snap(v)).collect();
    let blocks = m.blocks();
    let ranks = match blocks {
        Some(_) => Vec::new(),
        None => enumerate_ranks(m)?,
    };
    let mut trace = vec![quad_value(g, &x)];
    let max_steps = 4 * n * n + 16;
    for _ in 0..max_steps {
        if !x.iter().any(|&v| is_fractional(v)) {
            break;
        }
        let mv = match &blocks {
            Some(blocks) => block_move(blocks, &x)
                .ok_or_else(|| Error::Stall("fractional coordinate alone in its block".into()))?,
            None => rank_move(&ranks, &x)?,
        };
        if mv.forward <= 0.0 && mv.backward <= 0.0 {
            return Err(Error::Stall(format!("no room to move along e_{} - e_{}", mv.u, mv.v)));
        }
        let shifted = |t: f64| -> Vec<f64> {
            let mut y = x.clone();
            y[mv.u] = snap(y[mv.u] + t);
            y[mv.v] = snap(y[mv.v] - t);
            y
        };
        let fwd = shifted(mv.forward);
        let bwd = shifted(-mv.backward);
        let (f_fwd, f_bwd) = (quad_value(g, &fwd), quad_value(g, &bwd));
        let take_forward = if (f_fwd - f_bwd).abs() <= 1e-15 {
            // Linear direction: prefer the endpoint that makes the lower index u integral.
            !is_fractional(fwd[mv.u]) || is_fractional(bwd[mv.u])
        } else {
            f_fwd > f_bwd
        };
        x = if take_forward { fwd } else { bwd };
        trace.push(quad_value(g, &x));
    }
    if x.iter().any(|&v| is_fractional(v)) {
        return Err(Error::Stall(format!("still fractional after {max_steps} steps")));
    }
    let base: VertexSet = (0..n).filter(|&i| x[i] > 0.5).collect();
    if !m.is_independent(&base) || base.len() != m.rank() {
        return Err(Error::Stall("rounded point is not a base".into()));
    }
    Ok(PipageOutcome { base, trace })
}
