//! The edge graph of a nonnegative integer matrix and its factorisation.

use shiftlab::ck_invariants::{e_pair_with_witness, k0};
use shiftlab::intlinalg::IntMatrix;
use shiftlab::shift_spaces::edge_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = IntMatrix::from_i64(&[&[2, 1], &[1, 0]]);
    let g = edge_graph(&a)?;
    for (k, e) in g.edges.iter().enumerate() {
        println!(
            "edge {}: {} -> {} (copy {})",
            k + 1,
            e.source + 1,
            e.target + 1,
            e.copy
        );
    }
    println!("A = RS: {}", g.r.mul(&g.s)? == a);
    println!("A_G = SR: {}", g.s.mul(&g.r)? == g.matrix);

    let w = e_pair_with_witness(&g.r, &g.s)?;
    println!(
        "e-pairs: {} ({})",
        w.comparison.verdict, w.comparison.certificate
    );

    // S transpose carries the unit of the edge graph to the unit of A
    let (ka, kg) = (k0(&a)?, k0(&g.matrix)?);
    let image = ka
        .group
        .element(g.s.transpose().mul_vec(kg.unit.vector())?)?;
    println!("unit preserved: {}", image.equals(&ka.unit)?);
    Ok(())
}
