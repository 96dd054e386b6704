//! Uses the report layer behind the command line to screen a batch of
//! matrices against a reference, the way a script would with `--json`.

use shiftlab::cli::{compare_report, Report};
use shiftlab::intlinalg::IntMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
    let candidates = [
        (
            "b3",
            IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 0], &[1, 1, 0]]),
        ),
        ("full3", IntMatrix::from_i64(&[&[3]])),
        ("split", IntMatrix::from_i64(&[&[1, 1], &[2, 2]])),
    ];
    for (name, m) in candidates {
        let report = Report::Compare(compare_report("ones3", &reference, name, &m)?);
        let Report::Compare(r) = &report else {
            unreachable!()
        };
        println!(
            "{name}: {} (exit code {})",
            r.comparison.verdict,
            report.exit_code()
        );
    }
    Ok(())
}
