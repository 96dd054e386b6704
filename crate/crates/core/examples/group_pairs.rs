//! Cokernel groups, tensor products and comparison of (group, element) pairs.

use shiftlab::fgab::oracle::in_aut_orbit;
use shiftlab::fgab::{pair_equiv, tensor, FgAbGroup, PairInvariant};
use shiftlab::intlinalg::IntMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Z^2 / <(2,0), (0,4)> written in a scrambled basis
    let g = FgAbGroup::from_cokernel(&IntMatrix::from_i64(&[&[2, 4], &[2, 8]]));
    println!("G = {g}, order {:?}", g.order());

    let h = FgAbGroup::cyclic(6);
    let t = tensor(&g, &h);
    println!("G (x) Z/6 = {}", t.group);

    // elements of order 2 in Z/2 + Z/4 split into two orbits by height
    let x = g.element_i64(&[1, 0])?;
    let y = g.element_i64(&[0, 2])?;
    let (px, py) = (
        PairInvariant::new(x.clone())?,
        PairInvariant::new(y.clone())?,
    );
    println!("{px} vs {py}: {}", pair_equiv(&px, &py).verdict);
    println!("brute-force orbit check: {}", in_aut_orbit(&x, &y, 4096)?);

    let z = g.element_i64(&[1, 2])?;
    let pz = PairInvariant::new(z)?;
    println!(
        "{px} vs {pz}: {} ({})",
        pair_equiv(&px, &pz).verdict,
        pair_equiv(&px, &pz).certificate
    );
    Ok(())
}
