//! Bias-preserving rounding, the balance event, and the random correction step.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graph::{delta, VertexSet, WeightedGraph};
use crate::lasserre::BiasProfile;
use crate::seed::{self, Rng};

/// Shared-Gaussian halfspace rounding: vertex `i` is included iff `⟨g, u_i⟩ <= Φ⁻¹((1+b_i)/2)`,
/// where the unit vectors `u_i` are a Gram factor of the correlation matrix of the centred
/// variables. Every marginal is reproduced exactly; pairwise correlation carries over.
#[derive(Clone, Debug)]
pub struct BiasRounder {
    n: usize,
    /// `Some(in)` for vertices with `|b_i| = 1`.
    fixed: Vec<Option<bool>>,
    /// Rows are the `u_i` of the random vertices, in increasing id order.
    vectors: DMatrix<f64>,
    thresholds: Vec<f64>,
    random: Vec<usize>,
}

impl BiasRounder {
    pub fn new(bias: &BiasProfile) -> Result<Self> {
        let n = bias.n();
        let mut fixed = vec![None; n];
        let mut random = Vec::new();
        for i in 0..n {
            let var = 1.0 - bias.b[i] * bias.b[i];
            if var <= 1e-12 {
                fixed[i] = Some(bias.b[i] > 0.0);
            } else {
                random.push(i);
            }
        }
        let d = random.len();
        let corr = DMatrix::from_fn(d, d, |a, b| {
            if a == b {
                return 1.0;
            }
            let (i, j) = (random[a], random[b]);
            let cov = bias.rho[i][j] - bias.b[i] * bias.b[j];
            let var_i = 1.0 - bias.b[i] * bias.b[i];
            let var_j = 1.0 - bias.b[j] * bias.b[j];
            (cov / (var_i * var_j).sqrt()).clamp(-1.0, 1.0)
        });
        if d == 0 {
            return Ok(BiasRounder { n, fixed, vectors: DMatrix::zeros(0, 0), thresholds: Vec::new(), random });
        }
        let eig = SymmetricEigen::new(corr);
        let mut vectors = eig.eigenvectors.clone();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            // Solver output is PSD only up to tolerance.
            let scale = if lambda > -1e-7 { lambda.max(0.0).sqrt() } else { 0.0 };
            vectors.column_mut(k).scale_mut(scale);
        }
        for mut row in vectors.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let thresholds = random
            .iter()
            .map(|&i| normal.inverse_cdf(bias.inclusion_probability(i)))
            .collect();
        Ok(BiasRounder { n, fixed, vectors, thresholds, random })
    }

    pub fn sample(&self, rng: &mut Rng) -> VertexSet {
        let d = self.random.len();
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let mut out: Vec<usize> = (0..self.n).filter(|&i| self.fixed[i] == Some(true)).collect();
        for (a, &i) in self.random.iter().enumerate() {
            let dot: f64 = self.vectors.row(a).iter().zip(&g).map(|(u, x)| u * x).sum();
            if dot <= self.thresholds[a] {
                out.push(i);
            }
        }
        out.into_iter().collect()
    }
}

pub fn round_biased(bias: &BiasProfile, rng_seed: u64) -> Result<VertexSet> {
    Ok(BiasRounder::new(bias)?.sample(&mut seed::rng(rng_seed)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub sizes: Vec<usize>,
    pub flags: Vec<bool>,
    pub all: bool,
}

/// Per part, whether `|Ŝ ∩ V_i| ∈ [k_i − ε²|V_i|, k_i + ε²|V_i|]`.
pub fn check_balance(s_hat: &VertexSet, parts: &[VertexSet], budgets: &[usize], eps: f64) -> BalanceReport {
    let sizes: Vec<usize> = parts.iter().map(|p| s_hat.intersection(p).len()).collect();
    let flags: Vec<bool> = sizes
        .iter()
        .zip(parts)
        .zip(budgets)
        .map(|((&s, p), &k)| (s as f64 - k as f64).abs() <= eps * eps * p.len() as f64 + 1e-12)
        .collect();
    let all = flags.iter().all(|&f| f);
    BalanceReport { sizes, flags, all }
}

/// Vertices the correction may touch in `part`: the selected ones when there are too
/// many, otherwise the unselected non-forbidden ones.
fn correction_pool(s_hat: &VertexSet, part: &VertexSet, k: usize, forbidden: &VertexSet) -> (Vec<usize>, usize, bool) {
    let inside = s_hat.intersection(part);
    if inside.len() >= k {
        (inside.ids().to_vec(), inside.len() - k, true)
    } else {
        let pool = part.difference(s_hat).difference(forbidden);
        (pool.ids().to_vec(), k - inside.len(), false)
    }
}

/// Per-element probability of being moved by [`random_correct`].
pub fn correction_probability(s_hat: &VertexSet, part: &VertexSet, k: usize, forbidden: &VertexSet) -> f64 {
    let (pool, count, _) = correction_pool(s_hat, part, k, forbidden);
    if count == 0 {
        0.0
    } else {
        count as f64 / pool.len().max(count) as f64
    }
}

/// Removes a uniformly random surplus from `Ŝ ∩ part`, or adds a uniformly random deficit
/// from `part ∖ (Ŝ ∪ forbidden)`, so that exactly `k` vertices of `part` remain.
pub fn random_correct(
    g: &WeightedGraph,
    s_hat: &VertexSet,
    part: &VertexSet,
    k: usize,
    forbidden: &VertexSet,
    rng_seed: u64,
) -> Result<VertexSet> {
    s_hat.check_range(g.n())?;
    part.check_range(g.n())?;
    if k > part.len() {
        return Err(Error::Infeasible(format!("budget {k} exceeds part size {}", part.len())));
    }
    let (pool, count, remove) = correction_pool(s_hat, part, k, forbidden);
    if count == 0 {
        return Ok(s_hat.clone());
    }
    if pool.len() < count {
        return Err(Error::Infeasible(format!(
            "need {count} more vertices but only {} selectable",
            pool.len()
        )));
    }
    let mut rng = seed::rng(rng_seed);
    let chosen: VertexSet = sample(&mut rng, pool.len(), count).into_iter().map(|a| pool[a]).collect();
    Ok(if remove { s_hat.difference(&chosen) } else { s_hat.union(&chosen) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionBoundEstimate {
    /// Monte Carlo mean of `δ(S ∪ R) / δ(S)`.
    pub mean_ratio: f64,
    pub std_error: f64,
    /// Actual per-element inclusion probability `⌊p·|V∖S|⌋ / |V∖S|`.
    pub realized_p: f64,
    /// `δ(S) = 0`: the ratio is undefined and the bound holds trivially.
    pub vacuous: bool,
}

impl UnionBoundEstimate {
    pub fn passes(&self, p: f64) -> bool {
        self.vacuous || self.mean_ratio >= 1.0 - p - 3.0 * self.std_error - 1e-12
    }
}

/// Adds `R`, a uniform `⌊p·|V∖S|⌋`-subset of `V ∖ S`, and estimates `E[δ(S ∪ R)] / δ(S)`.
pub fn sampled_union_bound_check(
    g: &WeightedGraph,
    s: &VertexSet,
    inclusion_prob: f64,
    trials: usize,
    rng_seed: u64,
) -> Result<UnionBoundEstimate> {
    if !(0.0..=1.0).contains(&inclusion_prob) {
        return Err(Error::Parameter(format!("inclusion probability {inclusion_prob} outside [0, 1]")));
    }
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let base = delta(g, s)?;
    let rest = s.complement(g.n());
    let m = (inclusion_prob * rest.len() as f64 + 1e-12).floor() as usize;
    let realized_p = if rest.is_empty() { 0.0 } else { m as f64 / rest.len() as f64 };
    if base <= 0.0 {
        return Ok(UnionBoundEstimate { mean_ratio: 1.0, std_error: 0.0, realized_p, vacuous: true });
    }
    let mut rng = seed::rng(rng_seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..trials {
        let r: VertexSet = sample(&mut rng, rest.len(), m).into_iter().map(|a| rest.ids()[a]).collect();
        let ratio = delta(g, &s.union(&r))? / base;
        sum += ratio;
        sq += ratio * ratio;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = (sq / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
    Ok(UnionBoundEstimate { mean_ratio: mean, std_error: (var / t).sqrt(), realized_p, vacuous: false })
}
