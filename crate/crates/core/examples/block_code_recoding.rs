//! Higher block presentations as conjugacies, checked on periodic points.

use shiftlab::block_codes::{
    higher_block_code, lag_conjugacy_report, BlockMap, BlockMapFile, PeriodicPoint,
};
use shiftlab::intlinalg::IntMatrix;
use shiftlab::shift_spaces::{periodic_count, Word};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let golden = IntMatrix::from_i64(&[&[1, 1], &[1, 0]]);
    let hb = higher_block_code(&golden, 2)?;
    let blocks: Vec<String> = hb.blocks.iter().map(|w| w.display_with(2)).collect();
    println!("2-blocks: {}", blocks.join(" "));

    let x = PeriodicPoint::new("112".parse::<Word>()?, &golden)?;
    let y = hb.phi.apply_periodic(&x)?;
    println!("{} recodes to {}", x.cycle, y.cycle);

    let r = lag_conjugacy_report(&hb.phi, &hb.psi, 0, 6)?;
    println!(
        "checked {} + {} periodic points: {}",
        r.source_points, r.target_points, r.passed
    );

    // the shift is its own inverse up to sigma^2
    let sh = BlockMap::shift(&golden)?;
    println!(
        "shift pair at lag 1: {}",
        lag_conjugacy_report(&sh, &sh, 1, 6)?.passed
    );

    let same =
        (1..=8).all(|n| periodic_count(&golden, n).ok() == periodic_count(&hb.matrix, n).ok());
    println!("periodic counts agree up to 8: {same}");

    println!(
        "{}",
        serde_json::to_string(&BlockMapFile::from_block_map(&hb.psi))?
    );
    Ok(())
}
