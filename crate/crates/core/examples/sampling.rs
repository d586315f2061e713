//! Seeded exact sampling of words and a histogram compared with the exact law.

use wfa_ldp::exactdist;
use wfa_ldp::model::LinearRepresentation;
use wfa_ldp::sampler;

fn main() -> wfa_ldp::Result<()> {
    let rep = LinearRepresentation::golden_ratio();
    let seed = 2024;
    for word in sampler::sample_words(&rep, 40, 5, seed)? {
        println!("{word}  ({} a's)", word.count_a());
    }

    let n = 50;
    let summary = sampler::sample_counts(&rep, n, 100_000, seed)?;
    let exact = exactdist::exact_distribution(&rep, n)?.probabilities();
    println!("\n{} samples of length {n}, mean {:.4}", summary.num_samples, summary.mean());
    println!("total-variation distance to the exact law: {:.4}", summary.total_variation(&exact));
    Ok(())
}
