//! Moments of an explicit distribution: marginals, conditioning and mutual information.

use cmaxcut::graph::VertexSet;
use cmaxcut::lasserre::{block_independence_score, condition, marginals, mutual_information, MomentVector};

fn main() -> cmaxcut::error::Result<()> {
    // Uniform over the 2-subsets of {0,1,2,3} that pick one of {0,1} and one of {2,3}.
    let sets: Vec<VertexSet> = vec![[0, 2].into(), [0, 3].into(), [1, 2].into(), [1, 3].into()];
    let m = MomentVector::uniform_over(4, &sets)?;
    println!("y_0 = {:.3}, y_01 = {:.3}, y_02 = {:.3}", m.bias(0), m.correlation(0, 1), m.correlation(0, 2));

    let pair = marginals(&m, &VertexSet::from([0, 1]))?;
    println!("P over (x0, x1) = {:?}", pair.probs);
    println!("I(X0; X1) = {:.4} bits, I(X0; X2) = {:.4} bits", mutual_information(&m, 0, 1)?, mutual_information(&m, 0, 2)?);

    let parts = vec![VertexSet::from([0, 1]), VertexSet::from([2, 3])];
    println!("block scores before: {:?}", block_independence_score(&m, &parts)?);

    let (plus, lambda) = condition(&m, 0, 1)?;
    let (minus, _) = condition(&m, 0, -1)?;
    println!("P(X0 = +1) = {lambda}");
    println!("after X0 = +1: bias of 1 = {:.3}; after X0 = -1: bias of 1 = {:.3}", plus.bias(1), minus.bias(1));
    println!(
        "split check: {:.3} = {:.3}",
        m.bias(1),
        lambda * plus.bias(1) + (1.0 - lambda) * minus.bias(1)
    );
    println!("block scores after: {:?}", block_independence_score(&plus, &parts)?);
    Ok(())
}
