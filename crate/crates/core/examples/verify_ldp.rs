//! Watches `-(1/n) log Pr(Y_n >= xn)` approach `I(x)` as `n` grows.

use wfa_ldp::exactdist;
use wfa_ldp::model::LinearRepresentation;
use wfa_ldp::ratefn::{self, RateFunction};

fn main() -> wfa_ldp::Result<()> {
    let rep = LinearRepresentation::golden_ratio();
    let rf = RateFunction::new(&rep)?;
    for x in [rf.beta() - 0.2, rf.beta() + 0.2] {
        let rate = rf.rate(x)?.rate;
        println!("x = {x:.4}, I(x) = {rate:.6}");
        for n in [250, 1000, 4000] {
            let empirical = exactdist::empirical_rate(&rep, n, x)?;
            println!("  n = {n:>5}  empirical {empirical:.6}  error {:.2e}", (empirical - rate).abs());
        }
    }

    // one state: the binomial case, where the gap is O(log n / n)
    let coin = LinearRepresentation::bernoulli(0.5)?;
    let b = ratefn::binomial_rate(0.5, 0.6)?;
    println!("\nBernoulli(1/2), x = 0.6, B(x) = {b:.6}");
    for n in [256, 1024, 4096] {
        let gap = (exactdist::empirical_rate(&coin, n, 0.6)? - b).abs();
        println!("  n = {n:>5}  gap {gap:.2e}  5 log(n)/n = {:.2e}", 5.0 * (n as f64).ln() / n as f64);
    }
    Ok(())
}
