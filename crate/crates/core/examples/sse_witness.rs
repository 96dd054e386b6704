//! A random chain of state splittings and amalgamations, with the induced
//! map on the tensor group checked at every step.

use shiftlab::ck_invariants::{e_pair_with_witness, se_witness_action};
use shiftlab::intlinalg::IntMatrix;
use shiftlab::shift_spaces::{periodic_count, random_sse_chain, verify_sse_chain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = IntMatrix::from_i64(&[&[1, 2], &[1, 1]]);
    let chain = random_sse_chain(&a, 5, 2024)?;
    println!("chain verifies: {}", verify_sse_chain(&chain)?);

    for (k, step) in chain.steps.iter().enumerate() {
        let w = e_pair_with_witness(&step.r, &step.s)?;
        println!(
            "step {}: {}x{} -> {}x{}, witness passed {}, pairs {}",
            k + 1,
            w.a.rows(),
            w.a.rows(),
            w.b.rows(),
            w.b.rows(),
            w.record.passed,
            w.comparison.verdict
        );
    }
    let counts: Vec<String> = (1..=6)
        .map(|n| periodic_count(chain.end(), n).map(|c| c.to_string()))
        .collect::<Result<_, _>>()?;
    println!("periodic counts of the last matrix: {}", counts.join(" "));

    // A shift equivalence of lag 2 from A to itself
    let w = se_witness_action(&a, &a, 2, &a, &a)?;
    println!("lag-2 self equivalence passes: {}", w.passed);
    Ok(())
}
