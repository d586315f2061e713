//! Exponential tilting: `(xi, Ae^t, B, eta)` reweights each word by
//! `e^{t |w|_a}`, so that `Pr(Y_n = k) = Pr(Y_n(t) = k) Psi_n(t) e^{-tk}`.

use wfa_ldp::exactdist;
use wfa_ldp::model::{self, LinearRepresentation};

fn main() -> wfa_ldp::Result<()> {
    let rep = LinearRepresentation::golden_ratio();
    let n = 100;
    let base = exactdist::exact_distribution(&rep, n)?;
    for t in [-2.0, 0.5, 2.0] {
        let tilted = exactdist::exact_distribution(&model::tilt(&rep, t)?, n)?;
        let log_psi = exactdist::moment_generating(&rep, n, t)?;
        let worst = (0..=n)
            .filter(|&k| base.log_probability(k).is_finite())
            .map(|k| {
                let rhs = tilted.log_probability(k) + log_psi - t * k as f64;
                (base.log_probability(k) - rhs).exp_m1().abs()
            })
            .fold(0.0, f64::max);
        let mean = exactdist::moments(&tilted).mean / n as f64;
        println!("t = {t:>4}: tilted mean fraction {mean:.4}, log Psi_n = {log_psi:>9.4}, identity error {worst:.1e}");
    }
    Ok(())
}
