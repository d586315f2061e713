//! Loads a model file and reports whether it is usable.
//!
//! ```text
//! cargo run --example validate_model -- crates/core/models/swap.json
//! ```

use wfa_ldp::model;

fn main() -> wfa_ldp::Result<()> {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/golden.json").into());
    let rep = model::load_model(&path)?;
    let report = model::validate(&rep);
    println!("{path}: {} states", rep.dim());
    println!("  A+B primitive      {}", report.primitive);
    println!("  support condition  {}", report.support_ok);
    println!("  rho(A) = {:.6}, rho(B) = {:.6}", report.lambda_a, report.lambda_b);
    println!("  Wielandt bound     {}", model::wielandt_exponent(rep.dim()));
    for message in &report.messages {
        println!("  note: {message}");
    }
    if !report.is_valid() {
        std::process::exit(2);
    }
    Ok(())
}
