use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::info::{block_independence_score, is_block_independent, BlockScores};
use super::{condition, MomentVector};
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::seed;

/// Randomized restarts of the conditioning search.
pub const RESTARTS: usize = 64;

/// Resampling attempts when a drawn event has (numerically) zero probability.
const RESAMPLES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceOutcome {
    pub moments: MomentVector,
    /// Conditioned `(vertex, value)` pairs, in order.
    pub path: Vec<(usize, i8)>,
    pub objective: f64,
    pub scores: BlockScores,
    /// Restart that produced the result (`None` when the input already qualified).
    pub restart: Option<usize>,
}

struct Candidate {
    outcome: IndependenceOutcome,
    qualified: bool,
}

fn run_restart(
    m: &MomentVector,
    g: &WeightedGraph,
    parts: &[VertexSet],
    alpha: f64,
    budget: usize,
    seed: u64,
    floor: f64,
) -> Result<Candidate> {
    let mut rng = seed::rng(seed);
    let live: Vec<&VertexSet> = parts.iter().filter(|p| !p.is_empty()).collect();
    let mut current = m.clone();
    let mut path = Vec::new();
    let mut scores = block_independence_score(&current, parts)?;
    for _ in 0..budget {
        if is_block_independent(&scores, alpha) {
            break;
        }
        let mut step = None;
        for _ in 0..RESAMPLES {
            let part = live[rng.random_range(0..live.len())];
            let i = part.ids()[rng.random_range(0..part.len())];
            let p_plus = (1.0 + current.bias(i)) / 2.0;
            let value: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
            match condition(&current, i, value) {
                Ok((next, _)) => {
                    step = Some((i, value, next));
                    break;
                }
                Err(Error::DegenerateEvent(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        let Some((i, value, next)) = step else { break };
        current = next;
        path.push((i, value));
        scores = block_independence_score(&current, parts)?;
    }
    let objective = current.cut_value(g)?;
    let qualified = is_block_independent(&scores, alpha) && objective >= floor;
    Ok(Candidate {
        outcome: IndependenceOutcome { moments: current, path, objective, scores, restart: None },
        qualified,
    })
}

/// Conditions on up to `budget_l` sampled variables to reach α-block independence.
///
/// Each of [`RESTARTS`] restarts draws a part uniformly, a vertex uniformly inside it and a
/// value from its current marginal, stopping as soon as every part's average pairwise
/// information is at most `alpha`. A restart qualifies if it ends independent with
/// objective at least the starting objective minus `alpha`; the best qualifying objective
/// wins, ties going to the lowest restart.
pub fn make_block_independent(
    m: &MomentVector,
    g: &WeightedGraph,
    parts: &[VertexSet],
    alpha: f64,
    budget_l: usize,
    rng_seed: u64,
) -> Result<IndependenceOutcome> {
    if !(alpha > 0.0) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    if !m.is_full() && m.level() < budget_l + 2 {
        return Err(Error::Level(format!(
            "budget {budget_l} needs level >= {}, got {}",
            budget_l + 2,
            m.level()
        )));
    }
    let scores = block_independence_score(m, parts)?;
    let start = m.cut_value(g)?;
    if is_block_independent(&scores, alpha) {
        return Ok(IndependenceOutcome { moments: m.clone(), path: Vec::new(), objective: start, scores, restart: None });
    }
    let floor = start - alpha;
    let mut best: Option<IndependenceOutcome> = None;
    let mut closest: Option<IndependenceOutcome> = None;
    for r in 0..RESTARTS {
        let mut cand = run_restart(m, g, parts, alpha, budget_l, seed::derive(rng_seed, r as u64), floor)?;
        cand.outcome.restart = Some(r);
        let out = cand.outcome;
        if cand.qualified {
            if best.as_ref().is_none_or(|b| out.objective > b.objective) {
                best = Some(out);
            }
        } else if closest.as_ref().is_none_or(|c| {
            let (a, b) = (out.scores.max_part(), c.scores.max_part());
            a < b || (a == b && out.objective > c.objective)
        }) {
            closest = Some(out);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let c = closest.expect("at least one restart ran");
            Err(Error::SearchFailure { alpha, best_score: c.scores.max_part(), best: Box::new(c.moments) })
        }
    }
}
