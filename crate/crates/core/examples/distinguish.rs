//! Two matrices with the same Bowen-Franks group and determinant that the
//! tensor class separates.

use shiftlab::ck_invariants::{compare, e_invariant};
use shiftlab::intlinalg::IntMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
    let b = IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 0], &[1, 1, 0]]);

    let c = compare(&a, &b)?;
    println!("Bowen-Franks isomorphic: {}", c.bf_isomorphic);
    println!("det(I - A) equal: {}", c.det_equal);
    println!("e-pairs: {} vs {}", e_invariant(&a)?, e_invariant(&b)?);
    println!(
        "e-pair comparison: {} ({})",
        c.e_pair.verdict, c.e_pair.certificate
    );
    println!("verdict: {}", c.verdict);
    Ok(())
}
