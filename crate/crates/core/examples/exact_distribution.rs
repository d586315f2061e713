//! Exact law of the number of `a`s, checked against enumeration for a short
//! word length and summarized by its moments for a long one.

use wfa_ldp::exactdist;
use wfa_ldp::model::LinearRepresentation;
use wfa_ldp::spectral;

fn main() -> wfa_ldp::Result<()> {
    let rep = LinearRepresentation::golden_ratio();

    let dp = exactdist::exact_distribution(&rep, 12)?;
    let bf = exactdist::brute_force_distribution(&rep, 12)?;
    println!(" k  Pr(Y_12 = k)     enumeration");
    for k in 0..=12 {
        println!("{k:>2}  {:.12}  {:.12}", dp.probability(k), bf.probability(k));
    }

    let n = 2000;
    let point = spectral::curve_point(&rep, 0.0)?;
    let long = exactdist::exact_distribution(&rep, n)?;
    let summary = exactdist::moments(&long).with_reference_drift(point.beta);
    println!("\nn = {n}");
    println!("  E(Y_n)     = {:.6}   beta n = {:.6}", summary.mean, point.beta * n as f64);
    println!("  Var(Y_n)/n = {:.6}   gamma  = {:.6}", summary.variance_per_n, point.gamma);
    println!("  log Pr(Y_n = n/10) = {:.4}", long.log_probability(n / 10));
    Ok(())
}
