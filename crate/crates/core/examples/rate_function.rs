//! Tabulates the large-deviation rate function as CSV, ready for plotting.
//!
//! ```text
//! cargo run --example rate_function > rate.csv
//! ```

use wfa_ldp::model::LinearRepresentation;
use wfa_ldp::ratefn::RateFunction;

fn main() -> wfa_ldp::Result<()> {
    let rep = LinearRepresentation::golden_ratio();
    let rf = RateFunction::new(&rep)?;
    let domain = rf.domain()?;
    eprintln!("beta = {:.6}, I(0+) -> {:.6}, I(1-) -> {:.6}", rf.beta(), domain.endpoint_left, domain.endpoint_right);

    println!("x,tau,I");
    let grid = domain.grid(99);
    for (x, point) in grid.iter().zip(rf.curve(&grid)) {
        match point {
            Ok(p) => println!("{x},{},{}", p.tau, p.rate),
            Err(e) => println!("{x},NA,NA # {e}"),
        }
    }
    Ok(())
}
