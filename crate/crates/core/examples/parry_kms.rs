//! Perron data, the Parry measure and the KMS value identities.

use shiftlab::intlinalg::IntMatrix;
use shiftlab::spectral::{
    kms_temperature, kms_verify, parry_consistency, perron, DEFAULT_CHECK_TOL, DEFAULT_PERRON_TOL,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let golden = IntMatrix::from_i64(&[&[1, 1], &[1, 0]]);
    let pd = perron(&golden, DEFAULT_PERRON_TOL)?;
    println!("beta = {}  a = {:?}  b = {:?}", pd.beta, pd.a, pd.b);

    for w in ["1", "12", "121", "22"] {
        let c = pd.cylinder(&golden, &w.parse()?)?;
        println!("mu[{w}] = {:.12} (admissible {})", c.measure, c.admissible);
    }
    let p = parry_consistency(&golden, 8, DEFAULT_CHECK_TOL)?;
    println!("Parry consistency to length 8: {}", p.passed);

    println!(
        "inverse temperature: {}",
        kms_temperature(&golden, DEFAULT_PERRON_TOL)?
    );
    let k = kms_verify(&golden, 8, DEFAULT_CHECK_TOL)?;
    println!("KMS identities for n <= 8: {}", k.passed);

    let swap = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
    println!(
        "swap: {}",
        kms_temperature(&swap, DEFAULT_PERRON_TOL).unwrap_err()
    );
    Ok(())
}
