//! Smith and Hermite forms of an integer matrix, and lattice membership.

use shiftlab::intlinalg::{hnf, snf, to_bigints, IntMatrix, Lattice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = IntMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
    let s = snf(&m);
    println!(
        "divisors: {:?}",
        s.divisors
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
    );

    // U M V = D
    assert_eq!(s.u.mul(&m)?.mul(&s.v)?, s.d);
    println!("det = {}", m.det()?);

    let h = hnf(&m);
    println!(
        "hermite basis:\n{:?}",
        h.h.to_i64_rows().expect("small entries")
    );

    let lattice = Lattice::from_generators(&m);
    for v in [[2, -6, 10], [1, 0, 0], [0, 12, -12]] {
        println!(
            "{v:?} in column lattice: {}",
            lattice.contains_vector(&to_bigints(&v))?
        );
    }
    Ok(())
}
