//! Self-check suites behind the `verify` command: kernel guarantee, sandwich grid, gadget
//! equivalence and conditioning consistency.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::forge::{gadget_from_3dm, gen_3dm_with, gen_random, has_perfect_matching, BudgetLaw, Planting, WeightLaw};
use crate::graph::{ConstrainedInstance, VertexSet};
use crate::io::InstanceFile;
use crate::kernel::{kernelize_multi, migrate_to_kernel};
use crate::lasserre::{condition, marginals_raw, MomentVector};
use crate::matroid::check_sandwich;
use crate::oracle::{oracle_all_cut_decision, oracle_constrained};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernel,
    Sandwich,
    Gadget,
    Conditioning,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Kernel, Suite::Sandwich, Suite::Gadget, Suite::Conditioning];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Sandwich => "sandwich",
            Suite::Gadget => "gadget",
            Suite::Conditioning => "conditioning",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checked: usize,
    /// Inputs refused for violating a precondition; reported, not failures.
    pub rejected: Vec<String>,
    pub failures: usize,
    /// First failing input, serialized.
    pub counterexample: Option<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport { suite, checked: 0, rejected: Vec::new(), failures: 0, counterexample: None }
    }

    fn fail(&mut self, dump: impl FnOnce() -> String) {
        self.failures += 1;
        if self.counterexample.is_none() {
            self.counterexample = Some(dump());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {}: {} checked, {} failures",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.checked,
            self.failures
        );
        for r in &self.rejected {
            s += &format!("\n  rejected (precondition): {r}");
        }
        if let Some(c) = &self.counterexample {
            s += &format!("\n  counterexample: {c}");
        }
        s
    }
}

pub fn run_suite(suite: Suite, corpus: &[(String, InstanceFile)], cfg: &Config) -> Result<SuiteReport> {
    match suite {
        Suite::Kernel => kernel_suite(corpus, cfg),
        Suite::Sandwich => Ok(sandwich_suite(cfg.seed)),
        Suite::Gadget => gadget_suite(cfg),
        Suite::Conditioning => conditioning_suite(cfg.seed),
    }
}

/// Kept-vertex optimum against `(1 − 4cε)·OPT`, plus every exchange step of the migration
/// of an optimal set into the kernel.
fn kernel_suite(corpus: &[(String, InstanceFile)], cfg: &Config) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Suite::Kernel);
    let mut cases: Vec<(String, ConstrainedInstance, f64)> = corpus
        .iter()
        .filter(|(_, f)| f.matroid.is_none())
        .flat_map(|(id, f)| [0.25, 0.5].map(|eps| (id.clone(), f.instance.clone(), eps)))
        .collect();
    for t in 0..40u64 {
        let s = seed::derive(cfg.seed, t);
        let mut rng = seed::rng(s);
        let n = rng.random_range(4..=10);
        let c = if t % 2 == 0 { 1 } else { 2 };
        let eps = if t % 4 < 2 { 0.25 } else { 0.5 };
        let inst = gen_random(n, 0.5, &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, c, &BudgetLaw::Random, s)?;
        cases.push((format!("random-{t}"), inst, eps));
    }
    let limits = cfg.oracle_limits();
    for (id, inst, eps) in cases {
        if let Err(e) = inst.check_half_budgets() {
            let note = format!("{id}: {e}");
            if !rep.rejected.contains(&note) {
                rep.rejected.push(note);
            }
            continue;
        }
        if inst.budgets().iter().all(|&k| k == 0) {
            continue;
        }
        let kernel = kernelize_multi(&inst, eps)?;
        let opt = match oracle_constrained(&inst, &VertexSet::empty(), &limits) {
            Ok(r) => r,
            Err(Error::Capacity(e)) => {
                rep.rejected.push(format!("{id}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let dropped = kernel.kept().complement(inst.graph().n());
        let restricted = oracle_constrained(&inst, &dropped, &limits)?;
        let factor = (1.0 - 4.0 * inst.num_parts() as f64 * eps).max(0.0);
        rep.checked += 1;
        let dump = || format!("{id} eps={eps} {}", serde_json::to_string(&inst).unwrap_or_default());
        if restricted.opt_value < factor * opt.opt_value - 1e-9 {
            rep.fail(dump);
            continue;
        }
        let migration = migrate_to_kernel(&inst, &opt.set, &kernel)?;
        if !migration.steps.iter().all(|s| s.satisfies_bound()) || !inst.is_feasible(&migration.set) {
            rep.fail(dump);
        }
    }
    Ok(rep)
}

fn sandwich_suite(root: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Sandwich);
    let mut pairs: Vec<(f64, f64)> = (0..=200)
        .flat_map(|a| (0..=200).map(move |b| (a as f64 / 200.0, b as f64 / 200.0)))
        .collect();
    let mut rng = seed::rng(seed::derive(root, 0x5a));
    pairs.extend((0..10_000).map(|_| (rng.random::<f64>(), rng.random::<f64>())));
    for (x, y) in pairs {
        rep.checked += 1;
        if !check_sandwich(x, y).is_ok_and(|s| s.ok) {
            rep.fail(|| format!("x={x:?} y={y:?}"));
        }
    }
    rep
}

fn gadget_suite(cfg: &Config) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Suite::Gadget);
    for size in 1..=3 {
        for extras in 0..=2 {
            for planting in [Planting::Planted, Planting::RemoveOne] {
                for s in 0..4u64 {
                    let seed = seed::derive(cfg.seed, (size * 100 + extras * 10) as u64 + s);
                    let (tdm, flag) = gen_3dm_with(size, extras.min(size * size * size - size), planting, seed)?;
                    if tdm.triples.is_empty() {
                        continue;
                    }
                    rep.checked += 1;
                    let decided = oracle_all_cut_decision(&gadget_from_3dm(&tdm)?, &cfg.oracle_limits())?;
                    if decided != flag || flag != has_perfect_matching(&tdm) {
                        rep.fail(|| serde_json::to_string(&tdm).unwrap_or_default());
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Random genuine distributions: conditioning splits must reassemble the moments, and pair
/// marginals must agree with singleton marginals.
fn conditioning_suite(root: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Suite::Conditioning);
    for t in 0..30u64 {
        let mut rng = seed::rng(seed::derive(root, 0xc0 + t));
        let n = rng.random_range(2..=6);
        let support: Vec<(VertexSet, f64)> = (0..rng.random_range(1..=8))
            .map(|_| (VertexSet::from_bits(rng.random_range(0..1u64 << n)), rng.random::<f64>() + 0.05))
            .collect();
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        let dist: Vec<(VertexSet, f64)> = support.into_iter().map(|(s, w)| (s, w / total)).collect();
        let m = MomentVector::from_distribution(n, &dist)?;
        for i in 0..n {
            rep.checked += 1;
            let dump = || format!("vertex {i} of {}", serde_json::to_string(&m).unwrap_or_default());
            let (Ok((plus, lam)), Ok((minus, _))) = (condition(&m, i, 1), condition(&m, i, -1)) else {
                // A deterministic coordinate has a zero-probability side; nothing to split.
                if m.bias(i).abs() < 1.0 - 1e-9 {
                    rep.fail(dump);
                }
                continue;
            };
            let split_ok = plus.iter().all(|(bits, yp)| {
                let ym = minus.get_bits(bits).unwrap_or(f64::NAN);
                let y = m.get_bits(bits).unwrap_or(f64::NAN);
                (lam * yp + (1.0 - lam) * ym - y).abs() <= 1e-9
            });
            let single = marginals_raw(&m, &VertexSet::from([i]))?;
            let pair_ok = (0..n).filter(|&j| j != i).all(|j| {
                marginals_raw(&m, &VertexSet::from([i.min(j), i.max(j)]))
                    .and_then(|d| d.marginalize(&VertexSet::from([i])))
                    .is_ok_and(|d| d.probs.iter().zip(&single.probs).all(|(a, b)| (a - b).abs() <= 1e-9))
            });
            if !(split_ok && pair_ok) {
                rep.fail(dump);
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    #[test]
    fn default_suites_pass() {
        let cfg = Config::default();
        for s in Suite::ALL {
            let r = run_suite(s, &[], &cfg).unwrap();
            assert!(r.passed(), "{}", r.summary());
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn bad_budget_is_rejected() {
        let bad = ConstrainedInstance::new(WeightedGraph::complete(4, 1.0 / 6.0), vec![VertexSet::full(4)], vec![3]).unwrap();
        let r = run_suite(Suite::Kernel, &[("bad".into(), InstanceFile::new(bad))], &Config::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.rejected.len(), 1);
        assert!(r.rejected[0].starts_with("bad:"));
    }
}
