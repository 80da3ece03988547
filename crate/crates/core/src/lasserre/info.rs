use serde::{Deserialize, Serialize};

use super::{condition, marginals, MomentVector};
use crate::error::{Error, Result};
use crate::graph::VertexSet;

/// Shannon entropy in bits; tiny negative entries from solver noise are treated as zero.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let clean: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = clean.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    clean
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let q = p / total;
            -q * q.log2()
        })
        .sum()
}

fn pair_information(m: &MomentVector, i: usize, j: usize) -> Result<f64> {
    let d = marginals(m, &[i, j].into())?;
    let p = &d.probs;
    // Index bit 0 is the smaller id, bit 1 the larger.
    let h_joint = entropy_bits(p);
    let h_low = entropy_bits(&[p[0] + p[2], p[1] + p[3]]);
    let h_high = entropy_bits(&[p[0] + p[1], p[2] + p[3]]);
    Ok((h_low + h_high - h_joint).clamp(0.0, 1.0))
}

fn single_entropy(m: &MomentVector, i: usize) -> f64 {
    let p = ((1.0 + m.bias(i)) / 2.0).clamp(0.0, 1.0);
    entropy_bits(&[p, 1.0 - p])
}

/// `I(X_i; X_j)` in bits, from the pair's local distribution.
pub fn mutual_information(m: &MomentVector, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::Input("mutual information needs two distinct vertices".into()));
    }
    if i >= m.n() || j >= m.n() {
        return Err(Error::Input("vertex out of range".into()));
    }
    if m.marginal_limit() < 2 {
        return Err(Error::Level("mutual information needs level >= 2".into()));
    }
    pair_information(m, i, j)
}

fn check_parts(n: usize, parts: &[VertexSet]) -> Result<()> {
    let mut seen = vec![false; n];
    for p in parts {
        p.check_range(n)?;
        for v in p.iter() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Input(format!("vertex {v} appears in two parts")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Input("parts must cover every variable".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockScores {
    /// Average mutual information over unordered distinct pairs inside each part.
    pub per_part: Vec<f64>,
    /// `Σ_{j <= j'}` of the average pairwise information between parts `j` and `j'`
    /// (distinct pairs when `j = j'`).
    pub total_cross: f64,
}

impl BlockScores {
    pub fn max_part(&self) -> f64 {
        self.per_part.iter().copied().fold(0.0, f64::max)
    }
}

pub fn block_independence_score(m: &MomentVector, parts: &[VertexSet]) -> Result<BlockScores> {
    check_parts(m.n(), parts)?;
    if m.marginal_limit() < 2 && m.n() >= 2 {
        return Err(Error::Level("block scores need level >= 2".into()));
    }
    let n = m.n();
    let mut mi = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = pair_information(m, i, j)?;
            mi[i][j] = v;
            mi[j][i] = v;
        }
    }
    let per_part: Vec<f64> = parts
        .iter()
        .map(|p| {
            let ids = p.ids();
            let pairs = ids.len() * ids.len().saturating_sub(1) / 2;
            if pairs == 0 {
                return 0.0;
            }
            let sum: f64 = ids
                .iter()
                .enumerate()
                .flat_map(|(a, &i)| ids[a + 1..].iter().map(move |&j| (i, j)))
                .map(|(i, j)| mi[i][j])
                .sum();
            sum / pairs as f64
        })
        .collect();
    let mut total_cross = per_part.iter().sum::<f64>();
    for (a, pa) in parts.iter().enumerate() {
        for pb in &parts[a + 1..] {
            if pa.is_empty() || pb.is_empty() {
                continue;
            }
            let sum: f64 = pa.iter().flat_map(|i| pb.iter().map(move |j| (i, j))).map(|(i, j)| mi[i][j]).sum();
            total_cross += sum / (pa.len() * pb.len()) as f64;
        }
    }
    Ok(BlockScores { per_part, total_cross })
}

pub fn is_block_independent(scores: &BlockScores, alpha: f64) -> bool {
    scores.per_part.iter().all(|&s| s <= alpha)
}

/// Every positive-probability assignment of `given`, as `(probability, conditioned moments)`.
pub fn branches(m: &MomentVector, given: &VertexSet) -> Result<Vec<(f64, MomentVector)>> {
    given.check_range(m.n())?;
    let mut out = vec![(1.0, m.clone())];
    for v in given.iter() {
        let mut next = Vec::with_capacity(out.len() * 2);
        for (p, mv) in &out {
            for value in [1i8, -1] {
                match condition(mv, v, value) {
                    Ok((c, q)) => next.push((p * q, c)),
                    Err(Error::DegenerateEvent(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        out = next;
    }
    Ok(out)
}

/// Conditional entropies `H(X_i | X_A)` and informations `I(X_i; X_j | X_A)`, averaged over
/// the assignments of `A`. The diagonal of `information` holds the entropies.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalProfile {
    pub entropy: Vec<f64>,
    pub information: Vec<Vec<f64>>,
}

pub fn conditional_profile(m: &MomentVector, given: &VertexSet) -> Result<ConditionalProfile> {
    let n = m.n();
    let mut entropy = vec![0.0; n];
    let mut information = vec![vec![0.0; n]; n];
    for (p, c) in branches(m, given)? {
        if c.marginal_limit() < 2 && n >= 2 {
            return Err(Error::Level(format!("conditioning on {} variables leaves no pair marginals", given.len())));
        }
        for i in 0..n {
            entropy[i] += p * single_entropy(&c, i);
            for j in i + 1..n {
                let v = p * pair_information(&c, i, j)?;
                information[i][j] += v;
                information[j][i] += v;
            }
        }
    }
    for i in 0..n {
        information[i][i] = entropy[i];
    }
    Ok(ConditionalProfile { entropy, information })
}

/// `φ(A) = E_j E_{i∈V_j} H(X_i | X_A)` with parts weighted uniformly.
pub fn potential(m: &MomentVector, parts: &[VertexSet], given: &VertexSet) -> Result<f64> {
    check_parts(m.n(), parts)?;
    let prof = conditional_profile(m, given)?;
    Ok(potential_from(&prof, parts))
}

/// `Σ_{j,j'} E_{i∈V_j, i'∈V_j'} I(X_i; X_i' | X_A)` over ordered part pairs, where the
/// `i = i'` terms contribute `H(X_i | X_A)`.
pub fn cross_block_information(m: &MomentVector, parts: &[VertexSet], given: &VertexSet) -> Result<f64> {
    check_parts(m.n(), parts)?;
    let prof = conditional_profile(m, given)?;
    Ok(cross_from(&prof, parts))
}

pub(crate) fn potential_from(prof: &ConditionalProfile, parts: &[VertexSet]) -> f64 {
    let live: Vec<&VertexSet> = parts.iter().filter(|p| !p.is_empty()).collect();
    live.iter()
        .map(|p| p.iter().map(|i| prof.entropy[i]).sum::<f64>() / p.len() as f64)
        .sum::<f64>()
        / live.len().max(1) as f64
}

pub(crate) fn cross_from(prof: &ConditionalProfile, parts: &[VertexSet]) -> f64 {
    let live: Vec<&VertexSet> = parts.iter().filter(|p| !p.is_empty()).collect();
    let mut total = 0.0;
    for a in &live {
        for b in &live {
            let sum: f64 = a.iter().flat_map(|i| b.iter().map(move |j| (i, j))).map(|(i, j)| prof.information[i][j]).sum();
            total += sum / (a.len() * b.len()) as f64;
        }
    }
    total
}
