//! Edge LP over a matroid base polytope, then pipage rounding.

use cmaxcut::forge::{gen_random, BudgetLaw, WeightLaw};
use cmaxcut::matroid::{solve_matroid, Matroid};
use cmaxcut::oracle::{oracle_matroid, OracleLimits};

fn main() -> cmaxcut::error::Result<()> {
    let g = gen_random(8, 0.6, &WeightLaw::Uniform { lo: 0.5, hi: 2.0 }, 1, &BudgetLaw::Fixed(1), 3)?.graph().clone();
    let matroids = [
        ("uniform rank 3", Matroid::uniform(8, 3)?),
        ("partition 2+1", Matroid::partition(vec![[0, 1, 2, 3].into(), [4, 5, 6, 7].into()], vec![2, 1])?),
        // Ground element v is an edge of a 4-cycle with two chords and two pendants.
        ("graphic", Matroid::graphic(vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3), (3, 4), (4, 5)])),
    ];
    for (name, m) in &matroids {
        let sol = solve_matroid(&g, m)?;
        let opt = oracle_matroid(&g, m, &OracleLimits::default())?;
        let monotone = sol.pipage.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        println!(
            "{name}: LP {:.4}, pipage {:.4} on {:?}, OPT {:.4}; {} pipage steps, monotone = {monotone}",
            sol.lp_value,
            sol.solution.value,
            sol.solution.set.ids(),
            opt.opt_value,
            sol.pipage.trace.len() - 1
        );
    }
    Ok(())
}
