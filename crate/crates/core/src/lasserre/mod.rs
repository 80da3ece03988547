//! Level-ℓ pseudo-distributions over `{−1, 1}^n`, stored as moments `y_S = E[∏_{i∈S} x_i]`
//! for every `|S| <= 2ℓ`. A vector whose level reaches `n` is a genuine distribution and
//! keeps its level under conditioning.

mod independence;
mod info;
mod program;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

pub use independence::{make_block_independent, IndependenceOutcome, RESTARTS};
pub use info::{
    block_independence_score, branches, conditional_profile, cross_block_information, entropy_bits,
    is_block_independent, mutual_information, potential, BlockScores, ConditionalProfile,
};
pub use program::{
    build_program, build_program_for, solve, solve_with, CardinalityConstraint, ProgramLimits, SdpProgram,
    SdpSolution, SolveOptions, ZeroSelection,
};

/// Tolerance on probabilities and eigenvalues extracted from solver output.
pub const PROB_TOL: f64 = 1e-7;

/// Masks with at most `max` of the low `n` bits set, by size and then numerically.
pub(crate) fn subsets_up_to(n: usize, max: usize) -> Vec<u64> {
    assert!(n < 64, "bitmask sets need n < 64");
    let mut out = vec![0u64];
    for size in 1..=max.min(n) {
        let mut s: u64 = (1u64 << size) - 1;
        let limit = 1u64 << n;
        while s < limit {
            out.push(s);
            // Gosper's hack: next mask with the same popcount.
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    out
}

fn bits_of(set: &VertexSet) -> u64 {
    set.iter().fold(0, |acc, v| acc | 1 << v)
}

fn count_up_to(n: usize, max: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for s in 0..=max.min(n) {
        total += c;
        c = c * (n - s) / (s + 1);
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMoments", into = "RawMoments")]
pub struct MomentVector {
    n: usize,
    level: usize,
    y: BTreeMap<u64, f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMoments {
    n: usize,
    level: usize,
    /// Keys are comma-separated vertex ids; the empty key is `y_∅`.
    y: BTreeMap<String, f64>,
}

impl TryFrom<RawMoments> for MomentVector {
    type Error = Error;

    fn try_from(raw: RawMoments) -> Result<Self> {
        let mut y = BTreeMap::new();
        for (key, value) in raw.y {
            let mut bits = 0u64;
            for part in key.split(',').filter(|p| !p.is_empty()) {
                let v: usize = part
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("bad subset key {key:?}")))?;
                if v >= raw.n {
                    return Err(Error::Input(format!("subset key {key:?} out of range")));
                }
                bits |= 1 << v;
            }
            y.insert(bits, value);
        }
        MomentVector::new(raw.n, raw.level, y)
    }
}

impl From<MomentVector> for RawMoments {
    fn from(m: MomentVector) -> Self {
        let y = m
            .y
            .iter()
            .map(|(&bits, &v)| {
                let key: Vec<String> = VertexSet::from_bits(bits).iter().map(|i| i.to_string()).collect();
                (key.join(","), v)
            })
            .collect();
        RawMoments { n: m.n, level: m.level, y }
    }
}

impl MomentVector {
    /// Checks `y_∅ = 1` and that every subset within the level bound is present.
    pub fn new(n: usize, level: usize, y: BTreeMap<u64, f64>) -> Result<Self> {
        if n >= 64 {
            return Err(Error::Capacity(format!("{n} variables exceed the 63-variable set encoding")));
        }
        let level = level.min(n);
        let max = (2 * level).min(n);
        if y.get(&0).is_none_or(|&v| (v - 1.0).abs() > 1e-9) {
            return Err(Error::Input("y_∅ must equal 1".into()));
        }
        if y.len() != count_up_to(n, max) || y.keys().any(|b| b.count_ones() as usize > max || *b >> n != 0) {
            return Err(Error::Input(format!("moments must cover exactly the subsets of size <= {max}")));
        }
        Ok(MomentVector { n, level, y })
    }

    /// Moments of an explicit distribution over subsets (a set marks the `+1` coordinates).
    pub fn from_distribution(n: usize, dist: &[(VertexSet, f64)]) -> Result<Self> {
        if n > 20 {
            return Err(Error::Capacity(format!("explicit distributions limited to 20 variables, got {n}")));
        }
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        if dist.iter().any(|(_, p)| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Input("distribution weights must be nonnegative and sum to 1".into()));
        }
        let points: Vec<(u64, f64)> = dist
            .iter()
            .map(|(s, p)| s.check_range(n).map(|_| (bits_of(s), *p)))
            .collect::<Result<_>>()?;
        let y = subsets_up_to(n, n)
            .into_iter()
            .map(|s| {
                let v = points
                    .iter()
                    .map(|&(x, p)| if (s & !x).count_ones() % 2 == 0 { p } else { -p })
                    .sum::<f64>();
                (s, v)
            })
            .collect();
        MomentVector::new(n, n, y)
    }

    pub fn uniform_over(n: usize, sets: &[VertexSet]) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Input("uniform distribution over no sets".into()));
        }
        let p = 1.0 / sets.len() as f64;
        let dist: Vec<(VertexSet, f64)> = sets.iter().map(|s| (s.clone(), p)).collect();
        MomentVector::from_distribution(n, &dist)
    }

    /// Independent coordinates with the given biases, stored at `level`.
    pub fn product(biases: &[f64], level: usize) -> Result<Self> {
        if biases.iter().any(|b| b.abs() > 1.0) {
            return Err(Error::Input("biases must lie in [-1, 1]".into()));
        }
        let n = biases.len();
        let max = (2 * level).min(n);
        let y = subsets_up_to(n, max)
            .into_iter()
            .map(|s| (s, (0..n).filter(|i| s >> i & 1 == 1).map(|i| biases[i]).product()))
            .collect();
        MomentVector::new(n, level, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Level at least `n`: the moments describe an actual distribution.
    pub fn is_full(&self) -> bool {
        self.level >= self.n
    }

    /// Largest support for which local distributions are guaranteed.
    pub fn marginal_limit(&self) -> usize {
        self.level
    }

    pub fn get_bits(&self, bits: u64) -> Option<f64> {
        self.y.get(&bits).copied()
    }

    pub fn moment(&self, s: &VertexSet) -> Result<f64> {
        s.check_range(self.n)?;
        self.get_bits(bits_of(s))
            .ok_or_else(|| Error::Level(format!("subset of size {} beyond level {}", s.len(), self.level)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.y.iter().map(|(&b, &v)| (b, v))
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.y[&(1 << i)]
    }

    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.y[&(1 << i | 1 << j)]
        }
    }

    /// Expected cut weight `Σ w_ij (1 − y_ij)/2`.
    pub fn cut_value(&self, g: &WeightedGraph) -> Result<f64> {
        if g.n() != self.n {
            return Err(Error::Input("graph and moments disagree on the vertex count".into()));
        }
        if self.level == 0 {
            return Err(Error::Level("pair moments need level >= 1".into()));
        }
        Ok(g.edges().iter().map(|e| e.w * (1.0 - self.correlation(e.u, e.v)) / 2.0).sum())
    }

    /// Moment matrix `M[I, J] = y_{I △ J}` over rows `|I| <= level`.
    pub fn moment_matrix(&self) -> (Vec<u64>, DMatrix<f64>) {
        let rows = subsets_up_to(self.n, self.level);
        let m = rows.len();
        let mat = DMatrix::from_fn(m, m, |a, b| self.y[&(rows[a] ^ rows[b])]);
        (rows, mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (_, mat) = self.moment_matrix();
        SymmetricEigen::new(mat).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Distribution over `±1` assignments of `support`; index bit `t` set means
/// `support[t]` takes `+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDistribution {
    pub support: VertexSet,
    pub probs: Vec<f64>,
}

impl LocalDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of an assignment given as `+1`/`-1` values in support order.
    pub fn prob(&self, assignment: &[i8]) -> f64 {
        let idx = assignment
            .iter()
            .enumerate()
            .fold(0usize, |acc, (t, &v)| if v > 0 { acc | 1 << t } else { acc });
        self.probs[idx]
    }

    pub fn marginalize(&self, sub: &VertexSet) -> Result<LocalDistribution> {
        if !sub.is_subset(&self.support) {
            return Err(Error::Input("marginal support must be a subset".into()));
        }
        let pos: Vec<usize> = sub
            .iter()
            .map(|v| self.support.ids().binary_search(&v).unwrap())
            .collect();
        let mut probs = vec![0.0; 1 << sub.len()];
        for (a, p) in self.probs.iter().enumerate() {
            let b = pos
                .iter()
                .enumerate()
                .fold(0usize, |acc, (t, &q)| if a >> q & 1 == 1 { acc | 1 << t } else { acc });
            probs[b] += p;
        }
        Ok(LocalDistribution { support: sub.clone(), probs })
    }
}

/// Fourier inversion `μ_S(a) = 2^{-|S|} Σ_{T⊆S} y_T ∏_{i∈T} a_i`, without clipping.
pub fn marginals_raw(m: &MomentVector, s: &VertexSet) -> Result<LocalDistribution> {
    s.check_range(m.n)?;
    if s.len() > m.marginal_limit() {
        return Err(Error::Level(format!(
            "marginal on {} variables exceeds level {}",
            s.len(),
            m.level
        )));
    }
    let ids = s.ids();
    let size = 1usize << ids.len();
    // f[T] = y_T, then a Walsh–Hadamard transform gives Σ_T y_T (−1)^{|T ∩ a|}.
    let mut f: Vec<f64> = (0..size)
        .map(|t| {
            let bits = ids
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &v)| if t >> k & 1 == 1 { acc | 1 << v } else { acc });
            m.y[&bits]
        })
        .collect();
    let mut h = 1;
    while h < size {
        for block in (0..size).step_by(2 * h) {
            for x in block..block + h {
                let (a, b) = (f[x], f[x + h]);
                f[x] = a + b;
                f[x + h] = a - b;
            }
        }
        h *= 2;
    }
    // Σ_T y_T ∏_{i∈T} a_i uses the sign (−1)^{|T ∖ a|}, i.e. the transform at the complement.
    let scale = 1.0 / size as f64;
    let probs = (0..size).map(|a| f[(size - 1) ^ a] * scale).collect();
    Ok(LocalDistribution { support: s.clone(), probs })
}

/// Local distribution with entries clipped into `[0, 1]`.
pub fn marginals(m: &MomentVector, s: &VertexSet) -> Result<LocalDistribution> {
    let mut d = marginals_raw(m, s)?;
    for p in &mut d.probs {
        *p = p.clamp(0.0, 1.0);
    }
    Ok(d)
}

/// Conditions on `X_i = value`, returning the new moments and `P(X_i = value)`.
pub fn condition(m: &MomentVector, i: usize, value: i8) -> Result<(MomentVector, f64)> {
    if value != 1 && value != -1 {
        return Err(Error::Input(format!("conditioning value must be ±1, got {value}")));
    }
    if i >= m.n {
        return Err(Error::Input(format!("vertex {i} out of range")));
    }
    if !m.is_full() && m.level < 2 {
        return Err(Error::Level(format!("conditioning needs level >= 2, got {}", m.level)));
    }
    let v = value as f64;
    let lambda = (1.0 + v * m.bias(i)) / 2.0;
    if lambda < 1e-9 {
        return Err(Error::DegenerateEvent(lambda));
    }
    let level = if m.is_full() { m.level } else { m.level - 1 };
    let max = (2 * level).min(m.n);
    let bit = 1u64 << i;
    let y = m
        .y
        .iter()
        .filter(|(b, _)| b.count_ones() as usize <= max)
        .map(|(&b, &yb)| (b, (yb + v * m.y[&(b ^ bit)]) / (2.0 * lambda)))
        .collect();
    Ok((MomentVector { n: m.n, level, y }, lambda))
}

/// First and second moments consumed by rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasProfile {
    pub b: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
}

impl BiasProfile {
    pub fn new(b: Vec<f64>, rho: Vec<Vec<f64>>) -> Result<Self> {
        let n = b.len();
        if rho.len() != n || rho.iter().any(|r| r.len() != n) {
            return Err(Error::Input("correlation matrix has the wrong shape".into()));
        }
        if b.iter().any(|x| !x.is_finite() || x.abs() > 1.0 + 1e-9) {
            return Err(Error::Input("biases must lie in [-1, 1]".into()));
        }
        for i in 0..n {
            if (rho[i][i] - 1.0).abs() > 1e-9 {
                return Err(Error::Input("correlation diagonal must be 1".into()));
            }
            for j in i + 1..n {
                if (rho[i][j] - rho[j][i]).abs() > 1e-9 {
                    return Err(Error::Input("correlation matrix must be symmetric".into()));
                }
                if pair_probs(b[i], b[j], rho[i][j]).iter().any(|&p| p < -PROB_TOL) {
                    return Err(Error::Input(format!("pair ({i}, {j}) has a negative local probability")));
                }
            }
        }
        Ok(BiasProfile { b, rho })
    }

    pub fn from_moments(m: &MomentVector) -> Result<Self> {
        if m.level == 0 {
            return Err(Error::Level("bias profile needs pair moments".into()));
        }
        let n = m.n;
        let b = (0..n).map(|i| m.bias(i)).collect();
        let rho = (0..n).map(|i| (0..n).map(|j| m.correlation(i, j)).collect()).collect();
        BiasProfile::new(b, rho)
    }

    /// Like [`Self::from_moments`], but projects solver noise away instead of failing: biases
    /// are clamped to `[-1, 1]` and each correlation to the interval that keeps its pair's
    /// local distribution nonnegative.
    pub fn from_moments_clamped(m: &MomentVector) -> Result<Self> {
        if m.level == 0 {
            return Err(Error::Level("bias profile needs pair moments".into()));
        }
        let n = m.n;
        let b: Vec<f64> = (0..n).map(|i| m.bias(i).clamp(-1.0, 1.0)).collect();
        let rho = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            return 1.0;
                        }
                        let lo = (b[i] + b[j]).abs() - 1.0;
                        let hi = 1.0 - (b[i] - b[j]).abs();
                        m.correlation(i, j).max(lo).min(hi.max(lo))
                    })
                    .collect()
            })
            .collect();
        Ok(BiasProfile { b, rho })
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn inclusion_probability(&self, i: usize) -> f64 {
        ((1.0 + self.b[i]) / 2.0).clamp(0.0, 1.0)
    }
}

/// `[P(++), P(+−), P(−+), P(−−)]` of a pair with biases `bi, bj` and correlation `rho`.
pub fn pair_probs(bi: f64, bj: f64, rho: f64) -> [f64; 4] {
    [
        (1.0 + bi + bj + rho) / 4.0,
        (1.0 + bi - bj - rho) / 4.0,
        (1.0 - bi + bj - rho) / 4.0,
        (1.0 - bi - bj + rho) / 4.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Möbius inversion over 0/1 moments `z_T = P(all of T are +1)`, written independently
    /// of the Fourier route used by [`marginals_raw`].
    fn mobius_local(m: &MomentVector, s: &VertexSet, plus: &VertexSet) -> f64 {
        let z = |t: &VertexSet| -> f64 {
            // z_T = E[∏ (1 + x_i)/2] = 2^{-|T|} Σ_{U⊆T} y_U
            let ids = t.ids();
            (0..1usize << ids.len())
                .map(|u| {
                    let sub: VertexSet = (0..ids.len()).filter(|k| u >> k & 1 == 1).map(|k| ids[k]).collect();
                    m.moment(&sub).unwrap()
                })
                .sum::<f64>()
                / (1u64 << ids.len()) as f64
        };
        let rest = s.difference(plus);
        let ids = rest.ids();
        (0..1usize << ids.len())
            .map(|u| {
                let extra: VertexSet = (0..ids.len()).filter(|k| u >> k & 1 == 1).map(|k| ids[k]).collect();
                let sign = if extra.len() % 2 == 0 { 1.0 } else { -1.0 };
                sign * z(&plus.union(&extra))
            })
            .sum()
    }

    fn pair(bi: f64, bj: f64, rho: f64) -> MomentVector {
        let y = BTreeMap::from([(0, 1.0), (1, bi), (2, bj), (3, rho)]);
        MomentVector::new(2, 1, y).unwrap()
    }

    #[test]
    fn subset_enumeration() {
        let s = subsets_up_to(4, 2);
        assert_eq!(s.len(), 1 + 4 + 6);
        assert_eq!(&s[..5], &[0, 1, 2, 4, 8]);
        assert_eq!(count_up_to(4, 2), 11);
        assert_eq!(subsets_up_to(3, 9).len(), 8);
    }

    #[test]
    fn unbiased_singleton() {
        let m = MomentVector::product(&[0.0, 0.0], 1).unwrap();
        let d = marginals(&m, &[0].into()).unwrap();
        assert_eq!(d.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn correlated_and_independent_pairs() {
        let mut m = pair(0.0, 0.0, 1.0);
        m.level = 2;
        let d = marginals(&m, &[0, 1].into()).unwrap();
        assert_eq!(d.prob(&[1, 1]), 0.5);
        assert_eq!(d.prob(&[-1, -1]), 0.5);
        assert_eq!(d.prob(&[1, -1]), 0.0);
        let mut m = pair(0.0, 0.0, 0.0);
        m.level = 2;
        let d = marginals(&m, &[0, 1].into()).unwrap();
        assert!(d.probs.iter().all(|&p| p == 0.25));
    }

    #[test]
    fn level_bound_on_marginals() {
        let m = MomentVector::product(&[0.0; 4], 1).unwrap();
        assert!(matches!(marginals(&m, &[0, 1].into()), Err(Error::Level(_))));
    }

    #[test]
    fn fourier_matches_mobius_oracle() {
        let dist = vec![
            (VertexSet::from([0, 2]), 0.3),
            (VertexSet::from([1]), 0.25),
            (VertexSet::from([0, 1, 2]), 0.15),
            (VertexSet::empty(), 0.3),
        ];
        let m = MomentVector::from_distribution(3, &dist).unwrap();
        let s = VertexSet::from([0, 1, 2]);
        let d = marginals_raw(&m, &s).unwrap();
        for a in 0..8usize {
            let plus: VertexSet = (0..3).filter(|k| a >> k & 1 == 1).collect();
            assert!((d.probs[a] - mobius_local(&m, &s, &plus)).abs() < 1e-12);
        }
        assert!((d.prob(&[1, -1, 1]) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn condition_forced_and_split() {
        let m = MomentVector::uniform_over(2, &[VertexSet::from([0, 1]), VertexSet::empty()]).unwrap();
        let (c, p) = condition(&m, 0, 1).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(c.bias(1), 1.0);
        let (d, q) = condition(&m, 0, -1).unwrap();
        for (bits, y) in m.iter() {
            let rebuilt = p * c.get_bits(bits).unwrap() + q * d.get_bits(bits).unwrap();
            assert!((rebuilt - y).abs() < 1e-12);
        }
        assert!(c.is_full());
    }

    #[test]
    fn condition_deterministic_variable() {
        let m = MomentVector::product(&[1.0, 0.2, -0.4], 2).unwrap();
        let (c, p) = condition(&m, 0, 1).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(c.level(), 1);
        for (bits, y) in c.iter() {
            assert!((m.get_bits(bits).unwrap() - y).abs() < 1e-12);
        }
        assert!(matches!(condition(&m, 0, -1), Err(Error::DegenerateEvent(_))));
        assert!(matches!(condition(&c, 1, 1), Err(Error::Level(_))));
    }

    #[test]
    fn condition_product_keeps_marginals() {
        let m = MomentVector::product(&[0.3, -0.5, 0.1], 2).unwrap();
        let (c, _) = condition(&m, 1, -1).unwrap();
        assert!((c.bias(0) - 0.3).abs() < 1e-12);
        assert!((c.bias(2) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn genuine_moments_are_psd() {
        let m = MomentVector::uniform_over(4, &[[0, 1].into(), [2, 3].into(), [0, 3].into()]).unwrap();
        assert!(m.min_eigenvalue() > -1e-12);
        let bad = pair(0.0, 0.0, 1.5);
        assert!(bad.min_eigenvalue() < 0.0);
    }

    #[test]
    fn json_round_trip() {
        let m = MomentVector::uniform_over(3, &[[0].into(), [1, 2].into()]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"1,2\""));
        let back: MomentVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn bias_profile_checks_pairs() {
        assert!(BiasProfile::new(vec![0.0, 0.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]]).is_ok());
        assert!(matches!(
            BiasProfile::new(vec![0.9, -0.9], vec![vec![1.0, 0.9], vec![0.9, 1.0]]),
            Err(Error::Input(_))
        ));
    }
}
