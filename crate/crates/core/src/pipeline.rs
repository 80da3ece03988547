//! End-to-end constrained cut: kernel, relaxation, conditioning, rounding, correction.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{delta, weighted_degree_order, ConstrainedInstance, CutSolution, VertexSet, WeightedGraph};
use crate::kernel::{kernelize_multi, KernelResult};
use crate::lasserre::{
    build_program_for, make_block_independent, solve_with, BiasProfile, ProgramLimits, SolveOptions,
};
use crate::rounding::{check_balance, random_correct, BiasRounder};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingParams {
    pub eps: f64,
    /// Block-independence target in bits.
    pub alpha: f64,
    pub trials: usize,
    pub rng_seed: u64,
    pub level: usize,
    /// Cap on conditioning steps, applied on top of `ceil(4c²/α²)`.
    pub budget_cap: usize,
    pub max_parts: usize,
    pub limits: ProgramLimits,
    pub solver: SolveOptions,
}

impl RoundingParams {
    /// Desk-scale defaults: `α = ε⁶`, level 2, at most 12 conditioning steps, 8 trials.
    pub fn desk(eps: f64) -> Self {
        RoundingParams {
            eps,
            alpha: eps.powi(6),
            trials: 8,
            rng_seed: 0,
            level: 2,
            budget_cap: 12,
            max_parts: 4,
            limits: ProgramLimits::default(),
            solver: SolveOptions::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(Error::Parameter(format!("epsilon {} outside (0, 1/2]", self.eps)));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Parameter("alpha must be positive".into()));
        }
        Ok(())
    }

    /// `min(ceil(4c²/α²), cap)`.
    pub fn independence_budget(&self, c: usize) -> usize {
        let full = (4.0 * (c * c) as f64 / (self.alpha * self.alpha)).ceil();
        if full >= self.budget_cap as f64 {
            self.budget_cap
        } else {
            full as usize
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value: f64,
    pub balanced: bool,
    /// `|Ŝ| / |Ṽ|` before correction.
    pub raw_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub solution: CutSolution,
    pub kernel_vertices: usize,
    pub sdp_objective: f64,
    pub sdp_iterations: usize,
    pub independence_steps: usize,
    /// Largest per-part score of the moments that were rounded.
    pub independence_score: f64,
    pub trials: Vec<TrialRecord>,
    /// Wall-clock seconds per stage; not part of the deterministic output.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

/// Greedy feasible completion: per part, trims the lowest-degree extras of `seed_set` and
/// then adds the highest-degree selectable vertices until the budget is met.
pub fn greedy_feasible(
    g: &WeightedGraph,
    parts: &[VertexSet],
    budgets: &[usize],
    forbidden: &VertexSet,
    seed_set: &VertexSet,
) -> Result<VertexSet> {
    let order = weighted_degree_order(g);
    let mut out = VertexSet::empty();
    for (part, &k) in parts.iter().zip(budgets) {
        let ranked: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&v| part.contains(v) && !forbidden.contains(v))
            .collect();
        if ranked.len() < k {
            return Err(Error::Infeasible(format!("part needs {k} vertices, {} selectable", ranked.len())));
        }
        let mut chosen: Vec<usize> = ranked.iter().copied().filter(|&v| seed_set.contains(v)).collect();
        chosen.truncate(k);
        for &v in &ranked {
            if chosen.len() == k {
                break;
            }
            if !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        out = out.union(&chosen.into_iter().collect());
    }
    Ok(out)
}

/// Greedy baseline on the original instance.
pub fn solve_greedy(inst: &ConstrainedInstance) -> Result<CutSolution> {
    let set = greedy_feasible(inst.graph(), inst.parts(), inst.budgets(), &VertexSet::empty(), &VertexSet::empty())?;
    CutSolution::evaluate(inst, set, vec!["greedy".into()])
}

pub fn solve_single(g: &WeightedGraph, k: usize, params: &RoundingParams) -> Result<CutSolution> {
    if 2 * k > g.n() {
        return Err(Error::Precondition(format!("need k <= n/2, got k = {k}, n = {}", g.n())));
    }
    solve_multi(&ConstrainedInstance::single(g.clone(), k), params)
}

pub fn solve_multi(inst: &ConstrainedInstance, params: &RoundingParams) -> Result<CutSolution> {
    Ok(solve_multi_report(inst, params)?.solution)
}

pub fn solve_multi_report(inst: &ConstrainedInstance, params: &RoundingParams) -> Result<PipelineReport> {
    params.validate()?;
    let c = inst.num_parts();
    if c > params.max_parts {
        return Err(Error::Capacity(format!("{c} parts exceed the configured cap {}", params.max_parts)));
    }
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let kernel: KernelResult = kernelize_multi(inst, params.eps)?;
    let reduced = kernel.reduced_instance()?;
    let rg = reduced.graph();
    let mut trace = vec!["kernel".to_string()];
    lap("kernel", &mut timings);

    let program = build_program_for(&reduced, &kernel.forbidden, params.level, &params.limits)?;
    let sdp = solve_with(&program, &params.solver)?;
    trace.push("sdp".into());
    lap("sdp", &mut timings);

    let budget_full = params.independence_budget(c);
    let budget = if sdp.moments.is_full() {
        budget_full
    } else {
        budget_full.min(sdp.moments.level().saturating_sub(2))
    };
    let (moments, steps, score) = match make_block_independent(
        &sdp.moments,
        rg,
        &kernel.part_map,
        params.alpha,
        budget,
        seed::derive(params.rng_seed, 1),
    ) {
        Ok(out) => {
            trace.push("independence".into());
            (out.moments, out.path.len(), out.scores.max_part())
        }
        Err(Error::SearchFailure { best, best_score, .. }) => {
            trace.push("independence-unmet".into());
            let steps = sdp.moments.level() - best.level();
            (*best, steps, best_score)
        }
        Err(e) => return Err(e),
    };
    lap("independence", &mut timings);

    let bias = BiasProfile::from_moments_clamped(&moments)?;
    let rounder = BiasRounder::new(&bias)?;
    let total = rg.n() as f64;
    let mut best: Option<(f64, VertexSet, &'static str)> = None;
    let mut records = Vec::with_capacity(params.trials);
    for t in 0..params.trials {
        let trial_seed = seed::derive(params.rng_seed, 100 + t as u64);
        let mut s_hat = rounder.sample(&mut seed::rng(trial_seed));
        // Rounding never picks super vertices (bias −1), but guard against clamped noise.
        s_hat = s_hat.difference(&kernel.forbidden);
        let report = check_balance(&s_hat, &kernel.part_map, &kernel.budgets, params.eps);
        let raw_fraction = s_hat.len() as f64 / total.max(1.0);
        let (set, how) = if report.all {
            let mut s = s_hat;
            for (j, (part, &k)) in kernel.part_map.iter().zip(&kernel.budgets).enumerate() {
                s = random_correct(rg, &s, part, k, &kernel.forbidden, seed::derive(trial_seed, j as u64))?;
            }
            (s, "correction")
        } else {
            (greedy_feasible(rg, &kernel.part_map, &kernel.budgets, &kernel.forbidden, &s_hat)?, "fallback")
        };
        let value = delta(rg, &set)?;
        records.push(TrialRecord { value, balanced: report.all, raw_fraction });
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, set, how));
        }
    }
    let (_, set, how) = best.expect("at least one trial");
    trace.push("rounding".into());
    trace.push(how.into());
    lap("rounding", &mut timings);

    let solution = CutSolution::evaluate(inst, kernel.lift(&set)?, trace)?;
    if !solution.feasible {
        return Err(Error::Infeasible("pipeline produced an infeasible set".into()));
    }
    Ok(PipelineReport {
        solution,
        kernel_vertices: rg.n(),
        sdp_objective: sdp.objective,
        sdp_iterations: sdp.iterations,
        independence_steps: steps,
        independence_score: score,
        trials: records,
        timings,
    })
}
