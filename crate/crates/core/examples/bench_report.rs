//! Benchmark every method on a small seeded corpus and print the CSV report.

use cmaxcut::bench::{run_bench, Method};
use cmaxcut::config::Config;
use cmaxcut::forge::{gen_random, BudgetLaw, WeightLaw};
use cmaxcut::io::InstanceFile;

fn main() -> cmaxcut::error::Result<()> {
    let corpus: Vec<(String, InstanceFile)> = (0..4)
        .map(|i| {
            let inst = gen_random(8, 0.5, &WeightLaw::Unit, 1 + i % 2, &BudgetLaw::Random, i as u64)?;
            Ok((format!("rand-{i}"), InstanceFile::new(inst)))
        })
        .collect::<cmaxcut::error::Result<_>>()?;
    let report = run_bench(&corpus, &Method::ALL, &[0, 1], &Config::default());
    print!("{}", report.to_csv()?);
    for (m, a) in &report.aggregates {
        println!("{m}: min ratio {:?}, mean ratio {:?}", a.min_ratio, a.mean_ratio);
    }
    Ok(())
}
