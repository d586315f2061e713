//! Perron data of `A + B` and the tilted spectral curve `y(t)` of `Ae^t + B`.

use wfa_ldp::model::LinearRepresentation;
use wfa_ldp::spectral::{self, DEFAULT_TOLERANCE};

fn main() -> wfa_ldp::Result<()> {
    let rep = LinearRepresentation::golden_ratio();
    let p = spectral::perron(&rep.combined(), DEFAULT_TOLERANCE)?;
    println!("lambda = {:.15}  (golden ratio {:.15})", p.lambda, (1.0 + 5f64.sqrt()) / 2.0);
    println!("u = {:?}", p.u);
    println!("v = {:?}", p.v);
    println!("residual = {:.2e}", p.residual);

    let limits = spectral::limits_uv(&rep)?;
    println!("drift range (U, V) = ({}, {})", limits.u, limits.v);

    println!("\n{:>6} {:>14} {:>10} {:>10} {:>8}", "t", "y(t)", "beta", "gamma", "r(t)");
    for t in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
        let c = spectral::curve_point(&rep, t)?;
        let r = spectral::quasi_power_factor(&rep, t)?;
        println!("{t:>6.1} {:>14.8} {:>10.6} {:>10.6} {r:>8.5}", c.y, c.beta, c.gamma);
    }
    Ok(())
}
