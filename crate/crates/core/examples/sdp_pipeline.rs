//! Full constrained pipeline on a random two-part instance, compared with the oracle.

use cmaxcut::forge::{gen_random, BudgetLaw, WeightLaw};
use cmaxcut::graph::VertexSet;
use cmaxcut::oracle::{oracle_constrained, OracleLimits};
use cmaxcut::pipeline::{solve_multi_report, RoundingParams};

fn main() -> cmaxcut::error::Result<()> {
    let inst = gen_random(10, 0.5, &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 2, &BudgetLaw::Fixed(2), 7)?;
    let params = RoundingParams::desk(0.25).with_seed(1);
    let report = solve_multi_report(&inst, &params)?;
    let opt = oracle_constrained(&inst, &VertexSet::empty(), &OracleLimits::default())?;

    println!("kernel vertices: {}", report.kernel_vertices);
    println!("relaxation value: {:.4} after {} iterations", report.sdp_objective, report.sdp_iterations);
    println!("independence steps: {}, max block score {:.4}", report.independence_steps, report.independence_score);
    for (t, r) in report.trials.iter().enumerate() {
        println!("trial {t}: value {:.4}, balanced {}", r.value, r.balanced);
    }
    let sol = &report.solution;
    println!("trace: {}", sol.stage_trace.join(" > "));
    println!("chosen {:?}: {:.4} vs OPT {:.4} (ratio {:.3})", sol.set.ids(), sol.value, opt.opt_value, sol.value / opt.opt_value);
    for (stage, secs) in &report.timings {
        println!("  {stage}: {:.1} ms", secs * 1e3);
    }
    Ok(())
}
