//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs without the libtest harness so the lines always reach stdout. Exits non-zero if any
//! asserted criterion fails. Clauses that are reported but deliberately not asserted are
//! marked `(reported)`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::Rng as _;
use serde_json::json;

use cmaxcut::error::Error;
use cmaxcut::forge::{gadget_from_3dm, gen_3dm_with, gen_random, has_perfect_matching, BudgetLaw, Planting, WeightLaw};
use cmaxcut::graph::{delta, ConstrainedInstance, VertexSet, WeightedGraph};
use cmaxcut::kernel::{kernelize_multi, migrate_to_kernel, ExchangeStep};
use cmaxcut::lasserre::{
    build_program_for, condition, cross_block_information, marginals_raw, potential, solve_with, BiasProfile,
    MomentVector, ProgramLimits, SolveOptions,
};
use cmaxcut::matroid::{check_sandwich, solve_matroid, Matroid, MatroidOracle};
use cmaxcut::oracle::{oracle_all_cut_decision, oracle_constrained, oracle_matroid, OracleLimits};
use cmaxcut::pipeline::{solve_multi, solve_single, RoundingParams};
use cmaxcut::rounding::{correction_probability, random_correct, sampled_union_bound_check, BiasRounder};
use cmaxcut::seed;

const ROOT: u64 = 0xacce_0001;

// Pinned tolerances and limits.
const SANDWICH_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-7;
const DOMINANCE_TOL: f64 = 1e-6;
const LP_TOL: f64 = 1e-6;
const MONOTONE_TOL: f64 = 1e-9;
const POTENTIAL_TOL: f64 = 1e-7;
const KERNEL_TIME: Duration = Duration::from_secs(60);
const MATROID_TIME: Duration = Duration::from_secs(120);
const PIPELINE_TIME: Duration = Duration::from_secs(600);

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Line {
    fn print(&self) {
        println!("{} {:>2} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, self.detail);
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn limits() -> OracleLimits {
    OracleLimits::default()
}

// ---------------------------------------------------------------- kernels (1, 2, 3)

struct KernelRun {
    report: String,
    checked: usize,
    failures: usize,
    min_ratio: f64,
    steps: Vec<ExchangeStep>,
    migrated_infeasible: usize,
}

fn kernel_case(inst: &ConstrainedInstance, eps: f64, run: &mut KernelRun) {
    let kernel = kernelize_multi(inst, eps).expect("kernelize");
    let opt = oracle_constrained(inst, &VertexSet::empty(), &limits()).expect("oracle");
    let dropped = kernel.kept().complement(inst.graph().n());
    let restricted = oracle_constrained(inst, &dropped, &limits()).expect("restricted oracle");
    let factor = (1.0 - 4.0 * inst.num_parts() as f64 * eps).max(0.0);
    run.checked += 1;
    if restricted.opt_value < factor * opt.opt_value - 1e-12 {
        run.failures += 1;
    }
    if opt.opt_value > 0.0 {
        run.min_ratio = run.min_ratio.min(restricted.opt_value / opt.opt_value);
    }
    let migration = migrate_to_kernel(inst, &opt.set, &kernel).expect("migration");
    if !inst.is_feasible(&migration.set) || !migration.set.is_subset(&kernel.kept()) {
        run.migrated_infeasible += 1;
    }
    let _ = writeln!(
        run.report,
        "{} {eps} {:.17e} {:.17e} {} {}",
        inst.graph().n(),
        opt.opt_value,
        restricted.opt_value,
        kernel.kept().len(),
        migration.steps.len()
    );
    run.steps.extend(migration.steps);
}

fn kernel_run(parts: &[usize], count: u64, label: u64) -> KernelRun {
    let mut run = KernelRun {
        report: String::new(),
        checked: 0,
        failures: 0,
        min_ratio: f64::INFINITY,
        steps: Vec::new(),
        migrated_infeasible: 0,
    };
    for t in 0..count {
        let s = seed::derive(seed::derive(ROOT, label), t);
        let mut rng = seed::rng(s);
        let c = parts[t as usize % parts.len()];
        let n = rng.random_range((4 * c).max(4)..=12);
        let p = rng.random_range(0.3..0.8);
        let budget = if c == 1 { BudgetLaw::Fixed(rng.random_range(1..=n / 2)) } else { BudgetLaw::Random };
        let inst = gen_random(n, p, &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, c, &budget, s).expect("generator");
        let eps = if t % 2 == 0 { 0.25 } else { 0.5 };
        kernel_case(&inst, eps, &mut run);
    }
    run
}

fn criterion_1() -> (Line, KernelRun) {
    let (run, took) = timed(|| kernel_run(&[1], 200, 1));
    let pass = run.checked == 200 && run.failures == 0 && took < KERNEL_TIME;
    let detail = format!(
        "{}/{} instances meet (1-4eps)*OPT, min restricted/OPT {:.4}, {:.2?}",
        run.checked - run.failures,
        run.checked,
        run.min_ratio,
        took
    );
    (Line { id: 1, name: "kernel guarantee", pass, detail }, run)
}

fn criterion_2() -> (Line, KernelRun) {
    let (run, took) = timed(|| kernel_run(&[2, 3], 100, 2));
    let pass = run.checked == 100 && run.failures == 0 && took < KERNEL_TIME;
    let detail = format!(
        "{}/{} instances meet (1-4c*eps)+*OPT, min restricted/OPT {:.4}, {:.2?}",
        run.checked - run.failures,
        run.checked,
        run.min_ratio,
        took
    );
    (Line { id: 2, name: "multi-part kernel", pass, detail }, run)
}

fn criterion_3(runs: &[&KernelRun]) -> Line {
    let steps: Vec<&ExchangeStep> = runs.iter().flat_map(|r| &r.steps).collect();
    let violations = steps.iter().filter(|s| !s.satisfies_bound()).count();
    let infeasible: usize = runs.iter().map(|r| r.migrated_infeasible).sum();
    Line {
        id: 3,
        name: "exchange-step bound",
        pass: violations == 0 && infeasible == 0 && !steps.is_empty(),
        detail: format!("{} steps, {violations} violations, {infeasible} infeasible migrations", steps.len()),
    }
}

// ---------------------------------------------------------------- matroids (4)

fn random_matroid(kind: usize, n: usize, rng: &mut seed::Rng) -> Matroid {
    match kind {
        0 => {
            let cut = rng.random_range(1..n);
            let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| v < cut);
            let caps = vec![rng.random_range(1..=a.len()), rng.random_range(1..=b.len())];
            Matroid::partition(vec![a.into(), b.into()], caps).expect("partition matroid")
        }
        1 => Matroid::uniform(n, rng.random_range(1..n)).expect("uniform matroid"),
        _ => {
            // Ground elements are distinct edges of a random multigraph-free graph.
            let nodes = (3..).find(|h| h * (h - 1) / 2 >= n).unwrap();
            let mut pairs: Vec<(usize, usize)> = (0..nodes).flat_map(|a| (a + 1..nodes).map(move |b| (a, b))).collect();
            for i in (1..pairs.len()).rev() {
                pairs.swap(i, rng.random_range(0..=i));
            }
            pairs.truncate(n);
            Matroid::graphic(pairs)
        }
    }
}

fn matroid_run() -> (String, usize, Vec<String>, f64) {
    let mut report = String::new();
    let mut failures = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut checked = 0;
    for t in 0..200u64 {
        let s = seed::derive(seed::derive(ROOT, 4), t);
        let mut rng = seed::rng(s);
        let n = rng.random_range(4..=10);
        let g = gen_random(n, rng.random_range(0.3..0.8), &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 1, &BudgetLaw::Fixed(1), s)
            .expect("generator")
            .graph()
            .clone();
        let m = random_matroid(t as usize % 3, n, &mut rng);
        let sol = solve_matroid(&g, &m).expect("matroid pipeline");
        let opt = oracle_matroid(&g, &m, &limits()).expect("matroid oracle");
        checked += 1;
        let base = &sol.solution.set;
        let feasible = m.is_independent(base) && base.len() == m.rank_of(&VertexSet::full(n));
        let value = delta(&g, base).unwrap();
        let monotone = sol.pipage.trace.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL);
        let ok = feasible
            && value >= 0.5 * sol.lp_value - LP_TOL
            && value >= 0.5 * opt.opt_value - 1e-12
            && monotone;
        if !ok {
            failures.push(format!("#{t} kind {} feasible={feasible} value={value} lp={} opt={} monotone={monotone}", t % 3, sol.lp_value, opt.opt_value));
        }
        if opt.opt_value > 0.0 {
            min_ratio = min_ratio.min(value / opt.opt_value);
        }
        let _ = writeln!(report, "{t} {:?} {:.17e} {:.17e} {:.17e}", base.ids(), value, sol.lp_value, opt.opt_value);
    }
    (report, checked, failures, min_ratio)
}

fn criterion_4() -> (Line, String) {
    let ((report, checked, failures, min_ratio), took) = timed(matroid_run);
    let pass = checked == 200 && failures.is_empty() && took < MATROID_TIME;
    let mut detail = format!(
        "{}/{checked} instances feasible, >= 0.5*LP, >= 0.5*OPT, monotone; min value/OPT {min_ratio:.4}, {took:.2?}",
        checked - failures.len()
    );
    if let Some(f) = failures.first() {
        detail += &format!("; first failure {f}");
    }
    (Line { id: 4, name: "matroid approximation", pass, detail }, report)
}

// ---------------------------------------------------------------- sandwich (5)

fn criterion_5() -> Line {
    let mut pairs: Vec<(f64, f64)> =
        (0..=200).flat_map(|a| (0..=200).map(move |b| (a as f64 / 200.0, b as f64 / 200.0))).collect();
    let mut rng = seed::rng(seed::derive(ROOT, 5));
    pairs.extend((0..100_000).map(|_| (rng.random::<f64>(), rng.random::<f64>())));
    let failures = pairs
        .iter()
        .filter(|&&(x, y)| {
            let s = check_sandwich(x, y).expect("in range");
            !(s.ok && s.lhs <= s.mid + SANDWICH_TOL && s.mid <= s.rhs + SANDWICH_TOL)
        })
        .count();
    Line { id: 5, name: "sandwich inequality", pass: failures == 0, detail: format!("{} pairs, {failures} failures", pairs.len()) }
}

// ---------------------------------------------------------------- relaxation (6, 8)

struct Solved {
    inst: ConstrainedInstance,
    forbidden: VertexSet,
    moments: MomentVector,
    objective: f64,
}

fn solve_programs(count: u64) -> Vec<Solved> {
    let opts = SolveOptions::default();
    (0..count)
        .map(|t| {
            let s = seed::derive(seed::derive(ROOT, 6), t);
            let mut rng = seed::rng(s);
            let c = if t % 3 == 2 { 2 } else { 1 };
            let n = rng.random_range(4..=10);
            // Unit weights leave symmetric optimal faces, so the solver returns genuinely
            // fractional moments rather than a single integral cut.
            let weights = if t % 4 == 3 { WeightLaw::Uniform { lo: 0.5, hi: 2.0 } } else { WeightLaw::Unit };
            let inst = gen_random(n, rng.random_range(0.3..0.8), &weights, c, &BudgetLaw::Random, s).expect("generator");
            let eps = if t % 2 == 0 { 0.25 } else { 0.5 };
            let kernel = kernelize_multi(&inst, eps).expect("kernelize");
            let reduced = kernel.reduced_instance().expect("reduced");
            let program = build_program_for(&reduced, &kernel.forbidden, 2, &ProgramLimits::default()).expect("program");
            let sol = solve_with(&program, &opts).expect("solver");
            Solved { inst: reduced, forbidden: kernel.forbidden, moments: sol.moments, objective: sol.objective }
        })
        .collect()
}

/// Local distribution on `ids` from 0/1 moments `z_T = P(all of T selected)` by
/// inclusion–exclusion; an independent route to the same numbers as the Fourier inversion.
fn mobius_marginal(m: &MomentVector, ids: &[usize]) -> Vec<f64> {
    let k = ids.len();
    let y = |t: usize| -> f64 {
        let bits = (0..k).filter(|&a| t >> a & 1 == 1).fold(0u64, |acc, a| acc | 1 << ids[a]);
        m.get_bits(bits).expect("moment present")
    };
    // z_T = E[∏_{i∈T} (1 + x_i)/2].
    let z = |t: usize| -> f64 {
        let mut sum = 0.0;
        let mut u = t;
        loop {
            sum += y(u);
            if u == 0 {
                break;
            }
            u = (u - 1) & t;
        }
        sum / f64::from(1u32 << t.count_ones())
    };
    // Index a: bit set = vertex takes +1 (selected), matching the Fourier ordering.
    (0..1usize << k)
        .map(|a| {
            let rest = ((1 << k) - 1) & !a;
            let mut sum = 0.0;
            let mut extra = rest;
            loop {
                let sign = if extra.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * z(a | extra);
                if extra == 0 {
                    break;
                }
                extra = (extra - 1) & rest;
            }
            sum
        })
        .collect()
}

fn criterion_6(solved: &[Solved]) -> Line {
    let mut worst_marginal: f64 = 0.0;
    let mut worst_split: f64 = 0.0;
    let mut dominance_failures = 0;
    let mut splits = 0;
    for sv in solved {
        let m = &sv.moments;
        let n = m.n();
        for i in 0..n {
            let single = marginals_raw(m, &VertexSet::from([i])).expect("singleton marginal");
            let mob = mobius_marginal(m, &[i]);
            for (a, b) in single.probs.iter().zip(&mob) {
                worst_marginal = worst_marginal.max((a - b).abs());
            }
            for j in i + 1..n {
                let pair = marginals_raw(m, &VertexSet::from([i, j])).expect("pair marginal");
                for (a, b) in pair.probs.iter().zip(mobius_marginal(m, &[i, j])) {
                    worst_marginal = worst_marginal.max((a - b).abs());
                }
                for v in [i, j] {
                    let down = pair.marginalize(&VertexSet::from([v])).expect("marginalize");
                    let direct = marginals_raw(m, &VertexSet::from([v])).unwrap();
                    for (a, b) in down.probs.iter().zip(&direct.probs) {
                        worst_marginal = worst_marginal.max((a - b).abs());
                    }
                }
            }
            if let (Ok((plus, lam)), Ok((minus, _))) = (condition(m, i, 1), condition(m, i, -1)) {
                splits += 1;
                for (bits, yp) in plus.iter() {
                    let ym = minus.get_bits(bits).expect("same support");
                    let y = m.get_bits(bits).expect("parent moment");
                    worst_split = worst_split.max((lam * yp + (1.0 - lam) * ym - y).abs());
                }
            }
        }
        let opt = oracle_constrained(&sv.inst, &sv.forbidden, &limits()).expect("conditioned oracle");
        if sv.objective < opt.opt_value - DOMINANCE_TOL {
            dominance_failures += 1;
        }
    }
    let pass = worst_marginal <= CONSISTENCY_TOL && worst_split <= CONSISTENCY_TOL && dominance_failures == 0 && solved.len() == 50;
    Line {
        id: 6,
        name: "relaxation consistency",
        pass,
        detail: format!(
            "{} programs; worst marginal gap {worst_marginal:.2e}, worst split gap {worst_split:.2e} over {splits} splits, {dominance_failures} objective < OPT",
            solved.len()
        ),
    }
}

fn criterion_8(solved: &[Solved]) -> Line {
    const TRIALS: u64 = 10_000;
    let mut worst_z: f64 = 0.0;
    let mut failures = 0;
    let mut vertices = 0;
    let mut random_vertices = 0;
    let profiles: Vec<BiasProfile> = solved
        .iter()
        .map(|sv| BiasProfile::from_moments_clamped(&sv.moments).expect("bias profile"))
        .filter(|b| b.b.iter().any(|x| x.abs() < 1.0 - 1e-6))
        .take(20)
        .collect();
    for (k, bias) in profiles.iter().enumerate() {
        let rounder = BiasRounder::new(&bias).expect("rounder");
        let n = bias.n();
        let mut hits = vec![0u64; n];
        let mut rng = seed::rng(seed::derive(seed::derive(ROOT, 8), k as u64));
        for _ in 0..TRIALS {
            for v in rounder.sample(&mut rng).iter() {
                hits[v] += 1;
            }
        }
        for i in 0..n {
            vertices += 1;
            let p = bias.inclusion_probability(i);
            random_vertices += usize::from(p > 1e-6 && p < 1.0 - 1e-6);
            let freq = hits[i] as f64 / TRIALS as f64;
            let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
            let gap = (freq - p).abs();
            if gap > 4.0 * sigma + 1e-12 {
                failures += 1;
            }
            if sigma > 0.0 {
                worst_z = worst_z.max(gap / sigma);
            }
        }
    }
    Line {
        id: 8,
        name: "bias preservation",
        pass: failures == 0 && profiles.len() == 20,
        detail: format!(
            "{} instances, {vertices} vertices ({random_vertices} fractional) x {TRIALS} trials, {failures} outside 4 sigma, worst |z| {worst_z:.2}",
            profiles.len()
        ),
    }
}

// ---------------------------------------------------------------- telescoping (7)

fn criterion_7() -> Line {
    const PATHS: usize = 64;
    const STEPS: usize = 12;
    let mut failures = Vec::new();
    let mut worst_rise: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for t in 0..20u64 {
        let mut rng = seed::rng(seed::derive(seed::derive(ROOT, 7), t));
        let c = if t % 2 == 0 { 1 } else { 2 };
        let n = rng.random_range(2 * c..=6);
        let support: Vec<(VertexSet, f64)> = (0..rng.random_range(2..=12))
            .map(|_| (VertexSet::from_bits(rng.random_range(0..1u64 << n)), rng.random::<f64>() + 0.05))
            .collect();
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        let dist: Vec<(VertexSet, f64)> = support.into_iter().map(|(s, w)| (s, w / total)).collect();
        let m = MomentVector::from_distribution(n, &dist).expect("distribution");
        let cut = n / c;
        let parts: Vec<VertexSet> = if c == 1 {
            vec![VertexSet::full(n)]
        } else {
            vec![(0..cut).collect(), (cut..n).collect()]
        };
        let mut sums = Vec::with_capacity(PATHS);
        for _ in 0..PATHS {
            let mut given = VertexSet::empty();
            let mut current = m.clone();
            let mut phi = potential(&m, &parts, &given).unwrap();
            let mut sum = 0.0;
            for _ in 0..STEPS {
                sum += cross_block_information(&m, &parts, &given).unwrap();
                let part = &parts[rng.random_range(0..parts.len())];
                let v = part.ids()[rng.random_range(0..part.len())];
                let plus = (1.0 + current.bias(v)) / 2.0;
                let value = if rng.random::<f64>() < plus { 1 } else { -1 };
                current = condition(&current, v, value).expect("sampled value has positive mass").0;
                given = given.with(v);
                let next = potential(&m, &parts, &given).unwrap();
                worst_rise = worst_rise.max(next - phi);
                phi = next;
            }
            sums.push(sum);
        }
        let mean = sums.iter().sum::<f64>() / PATHS as f64;
        let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (PATHS - 1) as f64;
        let sigma = (var / PATHS as f64).sqrt();
        let bound = (c * c) as f64 + 3.0 * sigma;
        worst_margin = worst_margin.max(mean - (c * c) as f64);
        if mean > bound {
            failures.push(format!("#{t}: mean {mean:.4} > {bound:.4}"));
        }
    }
    let pass = failures.is_empty() && worst_rise <= POTENTIAL_TOL;
    let mut detail = format!(
        "20 distributions x {PATHS} paths x {STEPS} steps; max (mean - c^2) {worst_margin:.4}, max potential rise {worst_rise:.2e}"
    );
    if let Some(f) = failures.first() {
        detail += &format!("; first failure {f}");
    }
    Line { id: 7, name: "conditioning telescoping", pass, detail }
}

// ---------------------------------------------------------------- correction (9)

fn criterion_9() -> Vec<Line> {
    const TRIALS: usize = 4000;
    let mut regimes = 0;
    let mut failures = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for t in 0..24u64 {
        let s = seed::derive(seed::derive(ROOT, 9), t);
        let mut rng = seed::rng(s);
        let n = rng.random_range(6..=12);
        let g = gen_random(n, rng.random_range(0.3..0.8), &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 1, &BudgetLaw::Fixed(1), s)
            .expect("generator")
            .graph()
            .clone();
        let s_hat: VertexSet = (0..n).filter(|_| rng.random::<bool>()).collect();
        let part = VertexSet::full(n);
        for eps in [0.1, 0.25, 0.5] {
            // Additions: a uniform subset of the outside at rate ≤ ε.
            for (set, label) in [(s_hat.clone(), "add"), (s_hat.complement(n), "remove")] {
                let est = sampled_union_bound_check(&g, &set, eps, TRIALS, seed::derive(s, 17)).unwrap();
                if est.vacuous || est.realized_p > eps {
                    continue;
                }
                regimes += 1;
                worst_slack = worst_slack.min(est.mean_ratio - (1.0 - eps - 3.0 * est.std_error));
                if !est.passes(eps) {
                    failures.push(format!("#{t} {label} eps={eps}: {:.4} ± {:.4}", est.mean_ratio, est.std_error));
                }
            }
            // The pipeline's own correction: a budget off by d with d / pool ≤ ε.
            let base = delta(&g, &s_hat).unwrap();
            if base <= 0.0 {
                continue;
            }
            for k in 0..=n {
                let p = correction_probability(&s_hat, &part, k, &VertexSet::empty());
                if k == s_hat.len() || p > eps {
                    continue;
                }
                regimes += 1;
                let ratios: Vec<f64> = (0..TRIALS as u64)
                    .map(|r| {
                        let fixed = random_correct(&g, &s_hat, &part, k, &VertexSet::empty(), seed::derive(s, 1000 + r)).unwrap();
                        delta(&g, &fixed).unwrap() / base
                    })
                    .collect();
                let mean = ratios.iter().sum::<f64>() / TRIALS as f64;
                let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (TRIALS - 1) as f64;
                let sigma = (var / TRIALS as f64).sqrt();
                worst_slack = worst_slack.min(mean - (1.0 - eps - 3.0 * sigma));
                if mean < 1.0 - eps - 3.0 * sigma - 1e-12 {
                    failures.push(format!("#{t} correct to k={k} eps={eps}: {mean:.4} ± {sigma:.4}"));
                }
            }
        }
    }
    let mut detail = format!("{regimes} regimes with realized p <= eps, min slack {worst_slack:.4}");
    if let Some(f) = failures.first() {
        detail += &format!("; first failure {f}");
    }
    let main = Line { id: 9, name: "correction bound", pass: failures.is_empty() && regimes > 0, detail };

    // Tight-case clause. On the triangle the added vertex never destroys the cut, so the ratio
    // is 1, not 1 - p; the centred path 1-0-2 is where the bound is tight.
    let k3 = WeightedGraph::complete(3, 1.0 / 3.0);
    let tri = sampled_union_bound_check(&k3, &VertexSet::from([0]), 0.5, TRIALS, seed::derive(ROOT, 91)).unwrap();
    let path = WeightedGraph::new(3, [(0, 1, 0.5), (0, 2, 0.5)]).unwrap();
    let star = sampled_union_bound_check(&path, &VertexSet::from([0]), 0.5, TRIALS, seed::derive(ROOT, 92)).unwrap();
    let within = |e: &cmaxcut::rounding::UnionBoundEstimate| (e.mean_ratio - (1.0 - e.realized_p)).abs() <= 3.0 * e.std_error + 1e-12;
    let tight = Line {
        id: 9,
        name: "correction tight case (reported)",
        pass: within(&tri),
        detail: format!(
            "triangle ratio {:.4} ± {:.4} vs 1-p = {:.4}; centred path ratio {:.4} ± {:.4} vs 1-p = {:.4} ({})",
            tri.mean_ratio,
            tri.std_error,
            1.0 - tri.realized_p,
            star.mean_ratio,
            star.std_error,
            1.0 - star.realized_p,
            if within(&star) { "tight" } else { "not tight" }
        ),
    };
    vec![main, tight]
}

// ---------------------------------------------------------------- pipeline (10)

fn pipeline_corpus() -> Vec<ConstrainedInstance> {
    (0..30u64)
        .map(|t| {
            let s = seed::derive(seed::derive(ROOT, 10), t);
            let mut rng = seed::rng(s);
            match t % 3 {
                0 => gen_random(10, 0.5, &WeightLaw::Unit, 1, &BudgetLaw::Fixed(3), s),
                1 => {
                    let n = rng.random_range(6..=10);
                    gen_random(n, rng.random_range(0.3..0.8), &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 1, &BudgetLaw::Random, s)
                }
                _ => {
                    let n = rng.random_range(8..=10);
                    gen_random(n, rng.random_range(0.3..0.8), &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 2, &BudgetLaw::Random, s)
                }
            }
            .expect("generator")
        })
        .collect()
}

fn pipeline_run() -> (String, Vec<f64>, usize) {
    let corpus = pipeline_corpus();
    let mut report = String::new();
    let mut ratios = Vec::new();
    let mut infeasible = 0;
    let results: Vec<(f64, bool, Vec<usize>, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = corpus
            .iter()
            .enumerate()
            .map(|(t, inst)| {
                scope.spawn(move || {
                    let params = RoundingParams::desk(0.25).with_seed(seed::derive(ROOT, 100 + t as u64));
                    let sol = if inst.num_parts() == 1 {
                        solve_single(inst.graph(), inst.budgets()[0], &params)
                    } else {
                        solve_multi(inst, &params)
                    }
                    .expect("pipeline");
                    let opt = oracle_constrained(inst, &VertexSet::empty(), &limits()).expect("oracle");
                    (sol.value, sol.feasible && inst.is_feasible(&sol.set), sol.set.ids().to_vec(), opt.opt_value)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker")).collect()
    });
    for (t, (value, feasible, set, opt)) in results.into_iter().enumerate() {
        if !feasible {
            infeasible += 1;
        }
        ratios.push(if opt > 0.0 { value / opt } else { 1.0 });
        let _ = writeln!(report, "{t} {set:?} {value:.17e} {opt:.17e}");
    }
    (report, ratios, infeasible)
}

fn criterion_10() -> (Line, String) {
    let ((report, ratios, infeasible), took) = timed(pipeline_run);
    let half = ratios.iter().filter(|&&r| r >= 0.5 - 1e-12).count();
    let most = ratios.iter().filter(|&&r| r >= 0.8 - 1e-12).count();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = infeasible == 0 && half == ratios.len() && most * 10 >= ratios.len() * 8 && took < PIPELINE_TIME;
    let detail = format!(
        "{} instances; >= 0.5*OPT on {half}, >= 0.8*OPT on {most}; min ratio {min:.4}; {infeasible} infeasible; {took:.2?}",
        ratios.len()
    );
    (Line { id: 10, name: "pipeline ratio floor", pass, detail }, report)
}

// ---------------------------------------------------------------- gadget (11)

fn criterion_11() -> Line {
    let mut checked = 0;
    let mut mismatches = 0;
    let mut with_matching = 0;
    for size in 1..=3usize {
        for planting in [Planting::Planted, Planting::RemoveOne] {
            for s in 0..50u64 {
                let seed = seed::derive(seed::derive(ROOT, 11), (size as u64) << 32 | (planting as u64) << 16 | s);
                let extras = (s as usize % 4).min(size * size * size - size);
                let (tdm, flag) = gen_3dm_with(size, extras, planting, seed).expect("3dm generator");
                if tdm.triples.is_empty() {
                    continue;
                }
                checked += 1;
                let truth = has_perfect_matching(&tdm);
                with_matching += usize::from(truth);
                let decided = match oracle_all_cut_decision(&gadget_from_3dm(&tdm).expect("gadget"), &limits()) {
                    Ok(d) => d,
                    Err(Error::Infeasible(_)) => false,
                    Err(e) => panic!("gadget oracle: {e}"),
                };
                if decided != truth || flag != truth {
                    mismatches += 1;
                }
            }
        }
    }
    Line {
        id: 11,
        name: "hardness gadget equivalence",
        pass: mismatches == 0 && checked > 0,
        detail: format!("{checked} instances ({with_matching} with a perfect matching), {mismatches} mismatches"),
    }
}

// ---------------------------------------------------------------- determinism (12)

fn criterion_12(first: &[(&str, &str)]) -> Line {
    let second = [
        ("kernel", kernel_run(&[1], 200, 1).report),
        ("matroid", matroid_run().0),
        ("pipeline", pipeline_run().0),
    ];
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|((_, a), (_, b))| a.as_bytes() != b.as_bytes())
        .map(|((name, _), _)| *name)
        .collect();
    let digest = json!(first.iter().map(|(n, r)| (n.to_string(), r.len())).collect::<Vec<_>>());
    Line {
        id: 12,
        name: "determinism",
        pass: differing.is_empty(),
        detail: format!("reruns of kernel, matroid and pipeline reports byte-identical (bytes {digest}); differing: {differing:?}"),
    }
}

fn main() {
    let started = Instant::now();
    let mut lines = Vec::new();
    let emit = |line: Line, lines: &mut Vec<Line>| {
        line.print();
        lines.push(line);
    };

    let (l1, k1) = criterion_1();
    emit(l1, &mut lines);
    let (l2, k2) = criterion_2();
    emit(l2, &mut lines);
    emit(criterion_3(&[&k1, &k2]), &mut lines);
    let (l4, matroid_report) = criterion_4();
    emit(l4, &mut lines);
    emit(criterion_5(), &mut lines);
    let (solved, took) = timed(|| solve_programs(50));
    println!("     (50 programs solved in {took:.2?})");
    emit(criterion_6(&solved), &mut lines);
    emit(criterion_7(), &mut lines);
    emit(criterion_8(&solved), &mut lines);
    for l in criterion_9() {
        emit(l, &mut lines);
    }
    let (l10, pipeline_report) = criterion_10();
    emit(l10, &mut lines);
    emit(criterion_11(), &mut lines);
    emit(
        criterion_12(&[("kernel", &k1.report), ("matroid", &matroid_report), ("pipeline", &pipeline_report)]),
        &mut lines,
    );

    let failed: Vec<String> = lines
        .iter()
        .filter(|l| !l.pass && !l.name.ends_with("(reported)"))
        .map(|l| format!("{} {}", l.id, l.name))
        .collect();
    println!("acceptance finished in {:.2?}", started.elapsed());
    if !failed.is_empty() {
        eprintln!("asserted criteria failed: {failed:?}");
        std::process::exit(1);
    }
}
