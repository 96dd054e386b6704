//! Every cokernel invariant of a single matrix, including one with entries
//! above 1 whose tensor class differs from the unit class.

use num_bigint::BigInt;
use shiftlab::ck_invariants::{invariant_report, kunneth_from_k0};
use shiftlab::fgab::IsoType;
use shiftlab::intlinalg::IntMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = IntMatrix::from_i64(&[&[4, 1], &[1, 0]]);
    let r = invariant_report(&a)?;
    println!(
        "Bowen-Franks: {}  det(I - A) = {}",
        r.bf_group, r.det_id_minus_a
    );
    println!("K0: {} with unit {}", r.k0.group, r.k0.unit);
    println!("e-pair {}  unit-pair {}", r.e_pair, r.unit_pair);
    println!(
        "separated: {} ({})",
        r.e_vs_unit.verdict, r.e_vs_unit.certificate
    );
    for w in &r.spec.warnings {
        println!("warning: {w}");
    }

    // Kunneth types straight from a K0 iso type: Z + Z/2 + Z/6
    let k0 = IsoType::from_cyclic_orders(&[0, 2, 6].map(BigInt::from));
    let k = kunneth_from_k0(&k0);
    println!("K0 = {k0}: tensor K0 = {}, K1 = {}", k.k0, k.k1);
    Ok(())
}
