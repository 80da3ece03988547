//! Seeded instance generators and the three-dimensional matching gadget.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConstrainedInstance, VertexSet, WeightedGraph};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightLaw {
    Unit,
    Uniform { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BudgetLaw {
    /// The same budget for every part.
    Fixed(usize),
    PerPart(Vec<usize>),
    /// Uniform in `[1, ⌊|V_i|/2⌋]` (0 for singleton parts).
    Random,
}

/// Random graph with i.i.d. edges, vertices shuffled into `c` near-equal parts.
pub fn gen_random(
    n: usize,
    edge_prob: f64,
    weight_law: &WeightLaw,
    c: usize,
    budget_law: &BudgetLaw,
    seed: u64,
) -> Result<ConstrainedInstance> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Parameter(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    if c == 0 || c > n.max(1) {
        return Err(Error::Parameter(format!("cannot split {n} vertices into {c} parts")));
    }
    if let WeightLaw::Uniform { lo, hi } = weight_law {
        if !(*lo > 0.0 && lo <= hi) {
            return Err(Error::Parameter(format!("weight range [{lo}, {hi}] must be positive")));
        }
    }
    let mut rng = seed::rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < edge_prob {
                let w = match weight_law {
                    WeightLaw::Unit => 1.0,
                    WeightLaw::Uniform { lo, hi } => rng.random_range(*lo..=*hi),
                };
                edges.push((u, v, w));
            }
        }
    }
    let graph = WeightedGraph::new(n, edges)?.normalize();

    let mut order: Vec<usize> = (0..n).collect();
    if c > 1 {
        order.shuffle(&mut rng);
    }
    let mut parts = Vec::with_capacity(c);
    let mut start = 0;
    for j in 0..c {
        let size = n / c + usize::from(j < n % c);
        parts.push(order[start..start + size].iter().copied().collect::<VertexSet>());
        start += size;
    }
    let budgets: Vec<usize> = match budget_law {
        BudgetLaw::Fixed(k) => vec![*k; c],
        BudgetLaw::PerPart(ks) if ks.len() == c => ks.clone(),
        BudgetLaw::PerPart(ks) => {
            return Err(Error::Parameter(format!("{} budgets for {c} parts", ks.len())));
        }
        BudgetLaw::Random => parts
            .iter()
            .map(|p| {
                let half = p.len() / 2;
                if half == 0 {
                    0
                } else {
                    rng.random_range(1..=half)
                }
            })
            .collect(),
    };
    for (p, &k) in parts.iter().zip(&budgets) {
        if 2 * k > p.len() {
            return Err(Error::Parameter(format!("budget {k} exceeds half of a part of size {}", p.len())));
        }
    }
    ConstrainedInstance::new(graph, parts, budgets)
}

/// Three equally sized element sets `X = Y = Z = {0, …, size−1}` (kept apart by position)
/// and a list of triples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeDMInstance {
    pub size: usize,
    pub triples: Vec<(usize, usize, usize)>,
}

impl ThreeDMInstance {
    pub fn new(size: usize, triples: Vec<(usize, usize, usize)>) -> Result<Self> {
        if let Some(t) = triples.iter().find(|t| t.0 >= size || t.1 >= size || t.2 >= size) {
            return Err(Error::Input(format!("triple {t:?} references an element outside 0..{size}")));
        }
        Ok(ThreeDMInstance { size, triples })
    }
}

/// Exhaustive search: is there a set of `size` disjoint triples covering every element?
pub fn has_perfect_matching(tdm: &ThreeDMInstance) -> bool {
    fn go(tdm: &ThreeDMInstance, x: usize, used_y: u64, used_z: u64) -> bool {
        if x == tdm.size {
            return true;
        }
        tdm.triples.iter().any(|&(a, b, c)| {
            a == x && used_y >> b & 1 == 0 && used_z >> c & 1 == 0 && go(tdm, x + 1, used_y | 1 << b, used_z | 1 << c)
        })
    }
    tdm.size < 64 && go(tdm, 0, 0, 0)
}

/// Vertex ids of triple `e`'s star: center, then the `x`, `y`, `z` leaves.
pub fn gadget_vertices(e: usize) -> [usize; 4] {
    [4 * e, 4 * e + 1, 4 * e + 2, 4 * e + 3]
}

/// One unit-weight star per triple; one budget-1 part per element holding that element's
/// leaves; all centers in a final part with budget `max(0, #triples − size)`. A set cutting
/// every edge exists iff the triples contain a perfect matching.
pub fn gadget_from_3dm(tdm: &ThreeDMInstance) -> Result<ConstrainedInstance> {
    if tdm.triples.is_empty() {
        return Err(Error::Precondition("gadget needs at least one triple".into()));
    }
    let t = tdm.triples.len();
    let mut edges = Vec::with_capacity(3 * t);
    let mut element_parts = vec![Vec::new(); 3 * tdm.size];
    for (e, &(x, y, z)) in tdm.triples.iter().enumerate() {
        let [c, lx, ly, lz] = gadget_vertices(e);
        edges.extend([(c, lx, 1.0), (c, ly, 1.0), (c, lz, 1.0)]);
        element_parts[x].push(lx);
        element_parts[tdm.size + y].push(ly);
        element_parts[2 * tdm.size + z].push(lz);
    }
    let graph = WeightedGraph::new(4 * t, edges)?.normalize();
    let mut parts: Vec<VertexSet> = element_parts.into_iter().map(VertexSet::from).collect();
    let mut budgets = vec![1; parts.len()];
    parts.push((0..t).map(|e| 4 * e).collect());
    budgets.push(t.saturating_sub(tdm.size));
    ConstrainedInstance::new(graph, parts, budgets)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Planting {
    /// Keep the planted perfect matching.
    Planted,
    /// Drop one planted triple (a matching may still survive through decoys).
    RemoveOne,
}

pub fn gen_3dm(size: usize, extra_triples: usize, seed: u64) -> Result<(ThreeDMInstance, bool)> {
    gen_3dm_with(size, extra_triples, Planting::Planted, seed)
}

/// Planted matching `(i, σ(i), τ(i))` plus distinct random decoys, shuffled. The flag comes
/// from [`has_perfect_matching`], not from the planting.
pub fn gen_3dm_with(size: usize, extra_triples: usize, planting: Planting, seed: u64) -> Result<(ThreeDMInstance, bool)> {
    if size == 0 || size > 6 {
        return Err(Error::Parameter(format!("3DM size must be in 1..=6, got {size}")));
    }
    if extra_triples + size > size * size * size {
        return Err(Error::Parameter("more decoys than distinct triples".into()));
    }
    let mut rng = seed::rng(seed);
    let mut sigma: Vec<usize> = (0..size).collect();
    let mut tau: Vec<usize> = (0..size).collect();
    sigma.shuffle(&mut rng);
    tau.shuffle(&mut rng);
    let mut triples: Vec<(usize, usize, usize)> = (0..size).map(|i| (i, sigma[i], tau[i])).collect();
    while triples.len() < size + extra_triples {
        let t = (rng.random_range(0..size), rng.random_range(0..size), rng.random_range(0..size));
        if !triples.contains(&t) {
            triples.push(t);
        }
    }
    if planting == Planting::RemoveOne {
        let drop = rng.random_range(0..size);
        triples.remove(drop);
    }
    triples.shuffle(&mut rng);
    let tdm = ThreeDMInstance::new(size, triples)?;
    let flag = has_perfect_matching(&tdm);
    Ok((tdm, flag))
}
