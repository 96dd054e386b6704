//! Command-line front end: argument definitions, file loading, report types
//! and text rendering. The binary only forwards its arguments to [`main_with_args`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block_codes::{lag_conjugacy_report, BlockError, BlockMapFile, LagReport};
use crate::ck_invariants::{self, CkError, Comparison, KunnethTypes, WitnessRecord};
use crate::fgab::{IsoType, PairComparison, PairInvariant, PairSummary};
use crate::intlinalg::{self, IntMatrix};
use crate::shift_spaces::{self, MarkovShiftSpec, ShiftError, SseChain, Word};
use crate::spectral::{
    self, KmsReport, ParryReport, SpectralError, DEFAULT_CHECK_TOL, DEFAULT_PERRON_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Largest `n` for which compare lists periodic point counts.
pub const COMPARE_PERIODS: u32 = 8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error(transparent)]
    Ck(#[from] CkError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

fn file_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::File {
        path: path.display().to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "shiftlab",
    version,
    about = "Conjugacy invariants of topological Markov shifts"
)]
pub struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Tolerance for the floating-point checks.
    #[arg(long, global = true, default_value_t = DEFAULT_CHECK_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural properties of the matrix.
    Analyze { matrix: PathBuf },
    /// All cokernel invariants of one matrix.
    Invariant { matrix: PathBuf },
    /// Compare two matrices by their invariants.
    Compare { a: PathBuf, b: PathBuf },
    /// Bowen-Franks group and det(I - A).
    Bf { matrix: PathBuf },
    /// K0 group with its unit class.
    K0 { matrix: PathBuf },
    /// Kunneth iso types of the tensor square.
    Kunneth { matrix: PathBuf },
    /// Edge graph matrix and its factorisation, written as matrix files.
    EdgeGraph {
        matrix: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Strong shift equivalence chains.
    #[command(subcommand)]
    Sse(SseCommand),
    /// Shift equivalences.
    #[command(subcommand)]
    Se(SeCommand),
    /// Parry measure of a cylinder, or consistency up to a word length.
    #[command(group(ArgGroup::new("mode").required(true).args(["word", "check"])))]
    Parry {
        matrix: PathBuf,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        check: Option<usize>,
    },
    /// KMS value identities up to level nmax.
    Kms {
        matrix: PathBuf,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
    /// Perron eigenvalue and topological entropy.
    Entropy { matrix: PathBuf },
    /// Sliding block code conjugacies.
    #[command(subcommand)]
    Conjugacy(ConjugacyCommand),
}

#[derive(Debug, Subcommand)]
pub enum SseCommand {
    /// Check every step of a chain file and the action on e_A.
    Verify { chain: PathBuf },
    /// Generate a chain of random state splittings and amalgamations.
    Random {
        matrix: PathBuf,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long, env = "SHIFTLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Also write the chain file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeCommand {
    /// Check AR = RB, SA = BS, A^l = RS, B^l = SR and the action on e_A.
    Verify {
        a: PathBuf,
        b: PathBuf,
        r: PathBuf,
        s: PathBuf,
        #[arg(long, default_value_t = 1)]
        ell: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConjugacyCommand {
    /// Check that two block maps are inverse up to a power of the shift.
    Verify {
        phi: PathBuf,
        psi: PathBuf,
        #[arg(long, default_value_t = 0)]
        lag: usize,
        #[arg(long, default_value_t = 6)]
        period: usize,
    },
}

/// A matrix read from disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub rows: IntMatrix,
}

/// Integers beyond `i64` are written as strings so JSON readers keep them exact.
fn json_int(x: &BigInt) -> String {
    match x.to_i64() {
        Some(v) => v.to_string(),
        None => format!("\"{x}\""),
    }
}

impl MatrixFile {
    /// JSON with one matrix row per line.
    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .to_rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(json_int).collect::<Vec<_>>().join(",")))
            .collect();
        let mut out = String::from("{\n");
        if let Some(name) = &self.name {
            let _ = writeln!(
                out,
                "  \"name\": {},",
                serde_json::to_string(name).expect("string")
            );
        }
        let _ = write!(
            out,
            "  \"rows\": [\n    {}\n  ]\n}}\n",
            rows.join(",\n    ")
        );
        out
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Named {
        name: Option<String>,
        rows: Vec<Vec<serde_json::Value>>,
    },
    Bare(Vec<Vec<serde_json::Value>>),
}

fn parse_entry(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.to_string().parse().ok()),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn check_rows(
    rows: &[Vec<BigInt>],
    locate: impl Fn(usize, usize) -> String,
) -> Result<IntMatrix, String> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || width == 0 {
        return Err("matrix has no entries".into());
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(format!(
                "{}: row has {} entries, expected {}",
                locate(i, 0),
                row.len(),
                width
            ));
        }
        if let Some(j) = row.iter().position(Signed::is_negative) {
            return Err(format!("{}: negative entry {}", locate(i, j), row[j]));
        }
    }
    IntMatrix::from_rows(rows).map_err(|e| e.to_string())
}

/// Parses a JSON matrix document or plain-text rows.
pub fn parse_matrix(text: &str) -> Result<MatrixFile, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let doc: MatrixDoc =
            serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let (name, raw) = match doc {
            MatrixDoc::Named { name, rows } => (name, rows),
            MatrixDoc::Bare(rows) => (None, rows),
        };
        let mut rows = Vec::with_capacity(raw.len());
        for (i, r) in raw.iter().enumerate() {
            let mut row = Vec::with_capacity(r.len());
            for (j, v) in r.iter().enumerate() {
                row.push(
                    parse_entry(v).ok_or_else(|| format!("rows[{i}][{j}]: not an integer: {v}"))?,
                );
            }
            rows.push(row);
        }
        let rows = check_rows(&rows, |i, j| format!("rows[{i}][{j}]"))?;
        return Ok(MatrixFile { name, rows });
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (k, tok) in content
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            let v: BigInt = tok.parse().map_err(|_| {
                format!("line {}, entry {}: not an integer: {tok:?}", ln + 1, k + 1)
            })?;
            row.push(v);
        }
        rows.push(row);
        lines.push(ln + 1);
    }
    let rows = check_rows(&rows, |i, j| format!("line {}, entry {}", lines[i], j + 1))?;
    Ok(MatrixFile { name: None, rows })
}

/// Loads a matrix file; the name defaults to the file stem.
pub fn load_matrix(path: &Path) -> Result<MatrixFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_error(path, e.to_string()))?;
    let mut file = parse_matrix(&text).map_err(|m| file_error(path, m))?;
    if file.name.is_none() {
        file.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(file)
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_error(path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| file_error(path, format!("invalid JSON: {e}")))
}

fn name_of(f: &MatrixFile) -> String {
    f.name.clone().unwrap_or_else(|| "A".into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupView {
    pub display: String,
    pub iso_type: IsoType,
}

impl GroupView {
    fn of(t: IsoType) -> Self {
        GroupView {
            display: t.to_string(),
            iso_type: t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairView {
    pub display: String,
    pub group: String,
    /// Coordinates reduced modulo the invariant factors.
    #[serde(with = "intlinalg::bigint_vec")]
    pub element: Vec<BigInt>,
    pub summary: PairSummary,
}

impl PairView {
    fn of(p: &PairInvariant) -> Self {
        PairView {
            display: p.to_string(),
            group: p.group.to_string(),
            element: p.element.canonical_coordinates(),
            summary: p.summary.clone(),
        }
    }
}

fn order_text(o: &Option<BigInt>) -> String {
    o.as_ref().map_or("infinite".into(), ToString::to_string)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub name: String,
    pub spec: MarkovShiftSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfReport {
    pub name: String,
    pub group: GroupView,
    #[serde(
        serialize_with = "intlinalg::serialize_bigint",
        deserialize_with = "intlinalg::deserialize_bigint"
    )]
    pub det_id_minus_a: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0Report {
    pub name: String,
    pub group: GroupView,
    #[serde(with = "intlinalg::bigint_vec")]
    pub unit: Vec<BigInt>,
    pub unit_pair: PairView,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KunnethReport {
    pub name: String,
    pub k0_tensor_part: String,
    pub k0: String,
    pub k1: String,
    pub types: KunnethTypes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub name: String,
    pub spec: MarkovShiftSpec,
    pub bowen_franks: BfReport,
    pub k0: K0Report,
    pub e_pair: PairView,
    pub unit_pair: PairView,
    pub e_vs_unit: PairComparison,
    pub kunneth: KunnethReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicRow {
    pub n: u32,
    #[serde(
        serialize_with = "intlinalg::serialize_bigint",
        deserialize_with = "intlinalg::deserialize_bigint"
    )]
    pub a: BigInt,
    #[serde(
        serialize_with = "intlinalg::serialize_bigint",
        deserialize_with = "intlinalg::deserialize_bigint"
    )]
    pub b: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub a: String,
    pub b: String,
    pub bowen_franks: [BfReport; 2],
    pub e_pairs: [PairView; 2],
    pub k0_units: [PairView; 2],
    pub comparison: Comparison,
    pub periodic_counts: Vec<PeriodicRow>,
    pub periodic_counts_equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeGraphReport {
    pub name: String,
    pub states: usize,
    pub edges: usize,
    /// `(source, target)` per edge, 1-based.
    pub edge_list: Vec<(usize, usize)>,
    pub factorisation_holds: bool,
    pub e_pair: PairComparison,
    pub unit_maps_to_unit: bool,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SseVerifyReport {
    pub steps: usize,
    pub identities_hold: bool,
    pub witnesses: Vec<WitnessRecord>,
    pub periodic_counts_equal: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SseRandomReport {
    pub seed: u64,
    pub chain: SseChain,
    pub verification: SseVerifyReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeReport {
    pub ell: u32,
    pub identities_hold: bool,
    pub witness: Option<WitnessRecord>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParryWordReport {
    pub name: String,
    pub word: String,
    pub beta: f64,
    pub measure: f64,
    pub admissible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParryCheckReport {
    pub name: String,
    pub check: ParryReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsCommandReport {
    pub name: String,
    pub inverse_temperature: f64,
    pub report: KmsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub name: String,
    pub beta: f64,
    pub entropy: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub lag: LagReport,
    pub periodic_counts_equal: bool,
    pub passed: bool,
}

/// Any report the CLI can print.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Report {
    Analyze(AnalyzeReport),
    Invariant(InvariantReport),
    Compare(CompareReport),
    Bf(BfReport),
    K0(K0Report),
    Kunneth(KunnethReport),
    EdgeGraph(EdgeGraphReport),
    SseVerify(SseVerifyReport),
    SseRandom(SseRandomReport),
    SeVerify(SeReport),
    ParryWord(ParryWordReport),
    ParryCheck(ParryCheckReport),
    Kms(KmsCommandReport),
    Entropy(EntropyReport),
    Conjugacy(ConjugacyReport),
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "passed"
    } else {
        "FAILED"
    }
}

impl Report {
    /// Exit status implied by the report.
    pub fn exit_code(&self) -> i32 {
        let ok = match self {
            Report::Compare(r) => !r.comparison.distinguished,
            Report::SseVerify(r) => r.passed,
            Report::SseRandom(r) => r.verification.passed,
            Report::SeVerify(r) => r.passed,
            Report::ParryCheck(r) => r.check.passed,
            Report::Kms(r) => r.report.passed,
            Report::Conjugacy(r) => r.passed,
            Report::EdgeGraph(r) => r.factorisation_holds,
            _ => true,
        };
        if ok {
            EXIT_OK
        } else {
            EXIT_NEGATIVE
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        match self {
            Report::Analyze(r) => analyze_text(w, r),
            Report::Invariant(r) => {
                let _ = writeln!(w, "matrix: {}", r.name);
                bf_text(w, &r.bowen_franks);
                k0_text(w, &r.k0);
                let _ = writeln!(
                    w,
                    "e-pair: {} (element order {})",
                    r.e_pair.display,
                    order_text(&r.e_pair.summary.element_order)
                );
                let _ = writeln!(
                    w,
                    "unit-pair: {} (element order {})",
                    r.unit_pair.display,
                    order_text(&r.unit_pair.summary.element_order)
                );
                let _ = writeln!(
                    w,
                    "e-pair vs unit-pair: {} ({})",
                    r.e_vs_unit.verdict, r.e_vs_unit.certificate
                );
                kunneth_text(w, &r.kunneth);
                for warning in &r.spec.warnings {
                    let _ = writeln!(w, "warning: {warning}");
                }
            }
            Report::Compare(r) => {
                let [bfa, bfb] = &r.bowen_franks;
                let [ea, eb] = &r.e_pairs;
                let [ua, ub] = &r.k0_units;
                let c = &r.comparison;
                let _ = writeln!(w, "A: {}  B: {}", r.a, r.b);
                let _ = writeln!(
                    w,
                    "Bowen-Franks: {} vs {} (isomorphic: {})",
                    bfa.group.display,
                    bfb.group.display,
                    yes_no(c.bf_isomorphic)
                );
                let _ = writeln!(
                    w,
                    "det(I - A): {} vs {}",
                    bfa.det_id_minus_a, bfb.det_id_minus_a
                );
                let _ = writeln!(
                    w,
                    "K0 unit: {} ({} vs {})",
                    c.k0_unit.verdict, ua.display, ub.display
                );
                let _ = writeln!(
                    w,
                    "e-pair: {} ({} vs {})",
                    c.e_pair.verdict, ea.display, eb.display
                );
                let first_diff = r.periodic_counts.iter().find(|row| row.a != row.b);
                let _ = match first_diff {
                    None => writeln!(w, "periodic points n <= {}: equal", r.periodic_counts.len()),
                    Some(row) => writeln!(
                        w,
                        "periodic points: differ at n = {} ({} vs {})",
                        row.n, row.a, row.b
                    ),
                };
                let _ = writeln!(w, "verdict: {}", c.verdict);
            }
            Report::Bf(r) => bf_text(w, r),
            Report::K0(r) => k0_text(w, r),
            Report::Kunneth(r) => kunneth_text(w, r),
            Report::EdgeGraph(r) => {
                let _ = writeln!(
                    w,
                    "matrix: {} ({} states, {} edges)",
                    r.name, r.states, r.edges
                );
                let _ = writeln!(w, "A = RS and A_G = SR: {}", yes_no(r.factorisation_holds));
                let _ = writeln!(
                    w,
                    "e-pair(A) vs e-pair(A_G): {} ({})",
                    r.e_pair.verdict, r.e_pair.certificate
                );
                let _ = writeln!(
                    w,
                    "unit class carried to unit class: {}",
                    yes_no(r.unit_maps_to_unit)
                );
                for f in &r.files {
                    let _ = writeln!(w, "wrote {f}");
                }
            }
            Report::SseVerify(r) => sse_text(w, r),
            Report::SseRandom(r) => {
                let sizes: Vec<String> = r
                    .chain
                    .matrices
                    .iter()
                    .map(|m| m.rows().to_string())
                    .collect();
                let _ = writeln!(w, "seed: {}", r.seed);
                let _ = writeln!(w, "state counts along the chain: {}", sizes.join(" -> "));
                sse_text(w, &r.verification);
            }
            Report::SeVerify(r) => {
                let _ = writeln!(w, "lag: {}", r.ell);
                let _ = writeln!(
                    w,
                    "shift equivalence identities: {}",
                    yes_no(r.identities_hold)
                );
                if let Some(wr) = &r.witness {
                    witness_text(w, "witness", wr);
                }
                let _ = writeln!(w, "verification {}", pass_fail(r.passed));
            }
            Report::ParryWord(r) => {
                let _ = writeln!(w, "matrix: {}", r.name);
                let _ = writeln!(w, "beta: {}", r.beta);
                let _ = writeln!(
                    w,
                    "word {}: measure {} (admissible: {})",
                    r.word,
                    r.measure,
                    yes_no(r.admissible)
                );
            }
            Report::ParryCheck(r) => {
                let c = &r.check;
                let _ = writeln!(w, "matrix: {}", r.name);
                let _ = writeln!(w, "word lengths 1..={}", c.length);
                let _ = writeln!(w, "total measure error: {:e}", c.total_error);
                let _ = writeln!(w, "right additivity error: {:e}", c.right_additivity_error);
                let _ = writeln!(w, "left additivity error: {:e}", c.left_additivity_error);
                let _ = writeln!(w, "tolerance {:e}: {}", c.tol, pass_fail(c.passed));
            }
            Report::Kms(r) => {
                let k = &r.report;
                let _ = writeln!(w, "matrix: {}", r.name);
                let _ = writeln!(
                    w,
                    "beta: {}  inverse temperature log(beta): {}",
                    k.beta, r.inverse_temperature
                );
                for l in &k.levels {
                    let worst = [
                        l.scaling,
                        l.right_step,
                        l.left_step,
                        l.eigen,
                        l.row_sum,
                        l.column_sum,
                    ]
                    .into_iter()
                    .fold(0.0, f64::max);
                    let _ = writeln!(w, "n = {}: worst deviation {:e}", l.n, worst);
                }
                let _ = writeln!(w, "tolerance {:e}: {}", k.tol, pass_fail(k.passed));
            }
            Report::Entropy(r) => {
                let _ = writeln!(w, "matrix: {}", r.name);
                let _ = writeln!(w, "beta: {}", r.beta);
                let _ = writeln!(w, "entropy: {}", r.entropy);
            }
            Report::Conjugacy(r) => {
                let l = &r.lag;
                let _ = writeln!(
                    w,
                    "lag {}: checked {} source and {} target periodic points of period <= {}",
                    l.lag, l.source_points, l.target_points, l.max_period
                );
                if let Some(f) = &l.first_failure {
                    let _ = writeln!(w, "first failure: {f}");
                }
                let _ = writeln!(
                    w,
                    "periodic counts agree: {}",
                    yes_no(r.periodic_counts_equal)
                );
                let _ = writeln!(w, "verification {}", pass_fail(r.passed));
            }
        }
        s
    }
}

fn analyze_text(w: &mut String, r: &AnalyzeReport) {
    let s = &r.spec;
    let show = |o: Option<String>| o.unwrap_or_else(|| "undefined".into());
    let _ = writeln!(w, "matrix: {} ({} states)", r.name, s.alphabet_size);
    let _ = writeln!(w, "0-1: {}", yes_no(s.is_01));
    let _ = writeln!(w, "essential: {}", yes_no(s.essential));
    let _ = writeln!(w, "irreducible: {}", yes_no(s.irreducible));
    let _ = writeln!(w, "permutation: {}", yes_no(s.is_permutation));
    let _ = writeln!(w, "period: {}", show(s.period.map(|p| p.to_string())));
    let _ = writeln!(w, "aperiodic: {}", yes_no(s.aperiodic));
    let _ = writeln!(
        w,
        "primitivity exponent: {}",
        show(s.n0.map(|n| n.to_string()))
    );
    for warning in &s.warnings {
        let _ = writeln!(w, "warning: {warning}");
    }
}

fn bf_text(w: &mut String, r: &BfReport) {
    let _ = writeln!(w, "Bowen-Franks group: {}", r.group.display);
    let _ = writeln!(w, "det(I - A): {}", r.det_id_minus_a);
}

fn k0_text(w: &mut String, r: &K0Report) {
    let _ = writeln!(w, "K0: {}", r.group.display);
    let _ = writeln!(w, "K0 unit: {}", r.unit_pair.display);
}

fn kunneth_text(w: &mut String, r: &KunnethReport) {
    let _ = writeln!(w, "K0 tensor part: {}", r.k0_tensor_part);
    let _ = writeln!(w, "K0 of the tensor square: {}", r.k0);
    let _ = writeln!(w, "K1 of the tensor square: {}", r.k1);
}

fn witness_text(w: &mut String, label: &str, r: &WitnessRecord) {
    let _ = writeln!(
        w,
        "{label}: identity {}, well defined {}, isomorphism {}, e maps to e {}",
        yes_no(r.identity_holds),
        yes_no(r.well_defined),
        yes_no(r.isomorphism),
        yes_no(r.e_maps_to_e)
    );
}

fn sse_text(w: &mut String, r: &SseVerifyReport) {
    let _ = writeln!(w, "steps: {}", r.steps);
    let _ = writeln!(
        w,
        "A = RS, B = SR at every step: {}",
        yes_no(r.identities_hold)
    );
    for (i, wr) in r.witnesses.iter().enumerate() {
        witness_text(w, &format!("step {}", i + 1), wr);
    }
    let _ = writeln!(
        w,
        "periodic counts agree: {}",
        yes_no(r.periodic_counts_equal)
    );
    let _ = writeln!(w, "verification {}", pass_fail(r.passed));
}

fn bf_report(name: &str, a: &IntMatrix) -> Result<BfReport, CliError> {
    let (g, det) = ck_invariants::bowen_franks(a)?;
    Ok(BfReport {
        name: name.into(),
        group: GroupView::of(g.iso_type()),
        det_id_minus_a: det,
    })
}

fn k0_report(name: &str, a: &IntMatrix) -> Result<K0Report, CliError> {
    let k = ck_invariants::k0(a)?;
    let unit_pair = PairInvariant::new(k.unit.clone()).map_err(CkError::from)?;
    Ok(K0Report {
        name: name.into(),
        group: GroupView::of(k.group.iso_type()),
        unit: k.unit.canonical_coordinates(),
        unit_pair: PairView::of(&unit_pair),
    })
}

fn kunneth_report(name: &str, a: &IntMatrix) -> Result<KunnethReport, CliError> {
    let t = ck_invariants::kunneth(a)?;
    Ok(KunnethReport {
        name: name.into(),
        k0_tensor_part: t.k0_tensor_part.to_string(),
        k0: t.k0.to_string(),
        k1: t.k1.to_string(),
        types: t,
    })
}

pub fn invariant_report(name: &str, a: &IntMatrix) -> Result<InvariantReport, CliError> {
    let r = ck_invariants::invariant_report(a)?;
    Ok(InvariantReport {
        name: name.into(),
        spec: r.spec,
        bowen_franks: BfReport {
            name: name.into(),
            group: GroupView::of(r.bf_group.iso_type()),
            det_id_minus_a: r.det_id_minus_a,
        },
        k0: k0_report(name, a)?,
        e_pair: PairView::of(&r.e_pair),
        unit_pair: PairView::of(&r.unit_pair),
        e_vs_unit: r.e_vs_unit,
        kunneth: kunneth_report(name, a)?,
    })
}

pub fn compare_report(
    name_a: &str,
    a: &IntMatrix,
    name_b: &str,
    b: &IntMatrix,
) -> Result<CompareReport, CliError> {
    let comparison = ck_invariants::compare(a, b)?;
    let ia = invariant_report(name_a, a)?;
    let ib = invariant_report(name_b, b)?;
    let mut periodic_counts = Vec::new();
    for n in 1..=COMPARE_PERIODS {
        periodic_counts.push(PeriodicRow {
            n,
            a: shift_spaces::periodic_count(a, n)?,
            b: shift_spaces::periodic_count(b, n)?,
        });
    }
    let periodic_counts_equal = periodic_counts.iter().all(|r| r.a == r.b);
    Ok(CompareReport {
        a: name_a.into(),
        b: name_b.into(),
        bowen_franks: [ia.bowen_franks, ib.bowen_franks],
        e_pairs: [ia.e_pair, ib.e_pair],
        k0_units: [ia.k0.unit_pair, ib.k0.unit_pair],
        comparison,
        periodic_counts,
        periodic_counts_equal,
    })
}

fn counts_agree(a: &IntMatrix, b: &IntMatrix, up_to: u32) -> Result<bool, ShiftError> {
    for n in 1..=up_to {
        if shift_spaces::periodic_count(a, n)? != shift_spaces::periodic_count(b, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn sse_verify_report(chain: &SseChain) -> Result<SseVerifyReport, CliError> {
    if chain.matrices.len() != chain.steps.len() + 1 {
        return Err(CliError::Usage(format!(
            "chain has {} matrices and {} steps; expected one more matrix than steps",
            chain.matrices.len(),
            chain.steps.len()
        )));
    }
    let identities_hold = shift_spaces::verify_sse_chain(chain)?;
    let mut witnesses = Vec::new();
    if identities_hold {
        for step in &chain.steps {
            witnesses.push(ck_invariants::sse_witness_action(&step.r, &step.s)?);
        }
    }
    let periodic_counts_equal = counts_agree(chain.start(), chain.end(), COMPARE_PERIODS)?;
    let passed = identities_hold && periodic_counts_equal && witnesses.iter().all(|w| w.passed);
    Ok(SseVerifyReport {
        steps: chain.steps.len(),
        identities_hold,
        witnesses,
        periodic_counts_equal,
        passed,
    })
}

fn edge_graph_report(
    name: &str,
    a: &IntMatrix,
    out_dir: &Path,
) -> Result<EdgeGraphReport, CliError> {
    let g = shift_spaces::edge_graph(a)?;
    let factorisation_holds = shift_spaces::verify_sse_step(a, &g.matrix, &g.r, &g.s)?;
    let e_pair = ck_invariants::e_pair_with_witness(&g.r, &g.s)?.comparison;
    let ka = ck_invariants::k0(a)?;
    let kg = ck_invariants::k0(&g.matrix)?;
    let image = ka
        .group
        .element(
            g.s.transpose()
                .mul_vec(kg.unit.vector())
                .map_err(CkError::from)?,
        )
        .map_err(CkError::from)?;
    let unit_maps_to_unit = image.equals(&ka.unit).map_err(CkError::from)?;
    std::fs::create_dir_all(out_dir).map_err(|e| file_error(out_dir, e.to_string()))?;
    let mut files = Vec::new();
    for (suffix, m) in [("A_G", &g.matrix), ("R", &g.r), ("S", &g.s)] {
        let path = out_dir.join(format!("{suffix}.json"));
        let doc = MatrixFile {
            name: Some(format!("{name}_{suffix}")),
            rows: m.clone(),
        };
        std::fs::write(&path, doc.to_json()).map_err(|e| file_error(&path, e.to_string()))?;
        files.push(path.display().to_string());
    }
    Ok(EdgeGraphReport {
        name: name.into(),
        states: a.rows(),
        edges: g.edges.len(),
        edge_list: g
            .edges
            .iter()
            .map(|e| (e.source + 1, e.target + 1))
            .collect(),
        factorisation_holds,
        e_pair,
        unit_maps_to_unit,
        files,
    })
}

/// Runs one parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let tol = cli.tol;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    let load = |p: &PathBuf| -> Result<(String, IntMatrix), CliError> {
        let f = load_matrix(p)?;
        Ok((name_of(&f), f.rows))
    };
    let report = match &cli.command {
        Command::Analyze { matrix } => {
            let (name, a) = load(matrix)?;
            Report::Analyze(AnalyzeReport {
                name,
                spec: shift_spaces::analyze(&a)?,
            })
        }
        Command::Invariant { matrix } => {
            let (name, a) = load(matrix)?;
            Report::Invariant(invariant_report(&name, &a)?)
        }
        Command::Compare { a, b } => {
            let (na, ma) = load(a)?;
            let (nb, mb) = load(b)?;
            Report::Compare(compare_report(&na, &ma, &nb, &mb)?)
        }
        Command::Bf { matrix } => {
            let (name, a) = load(matrix)?;
            Report::Bf(bf_report(&name, &a)?)
        }
        Command::K0 { matrix } => {
            let (name, a) = load(matrix)?;
            Report::K0(k0_report(&name, &a)?)
        }
        Command::Kunneth { matrix } => {
            let (name, a) = load(matrix)?;
            Report::Kunneth(kunneth_report(&name, &a)?)
        }
        Command::EdgeGraph { matrix, out_dir } => {
            let (name, a) = load(matrix)?;
            Report::EdgeGraph(edge_graph_report(&name, &a, out_dir)?)
        }
        Command::Sse(SseCommand::Verify { chain }) => {
            let chain: SseChain = load_json(chain)?;
            Report::SseVerify(sse_verify_report(&chain)?)
        }
        Command::Sse(SseCommand::Random {
            matrix,
            steps,
            seed,
            out,
        }) => {
            let (_, a) = load(matrix)?;
            let chain = shift_spaces::random_sse_chain(&a, *steps, *seed)?;
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&chain).expect("chain serializes");
                std::fs::write(path, text + "\n").map_err(|e| file_error(path, e.to_string()))?;
            }
            let verification = sse_verify_report(&chain)?;
            Report::SseRandom(SseRandomReport {
                seed: *seed,
                chain,
                verification,
            })
        }
        Command::Se(SeCommand::Verify { a, b, r, s, ell }) => {
            let (_, a) = load(a)?;
            let (_, b) = load(b)?;
            let (_, r) = load(r)?;
            let (_, s) = load(s)?;
            let identities_hold = shift_spaces::verify_se(&a, &b, &r, &s, *ell)?;
            let witness = if identities_hold {
                Some(ck_invariants::se_witness_action(&r, &s, *ell, &a, &b)?)
            } else {
                None
            };
            let passed = witness.as_ref().is_some_and(|w| w.passed);
            Report::SeVerify(SeReport {
                ell: *ell,
                identities_hold,
                witness,
                passed,
            })
        }
        Command::Parry {
            matrix,
            word,
            check,
        } => {
            let (name, a) = load(matrix)?;
            match (word, check) {
                (Some(text), _) => {
                    let w: Word = text.parse()?;
                    let pd = spectral::perron(&a, DEFAULT_PERRON_TOL)?;
                    let c = pd.cylinder(&a, &w)?;
                    Report::ParryWord(ParryWordReport {
                        name,
                        word: w.display_with(a.rows()),
                        beta: pd.beta,
                        measure: c.measure,
                        admissible: c.admissible,
                    })
                }
                (None, Some(len)) => Report::ParryCheck(ParryCheckReport {
                    name,
                    check: spectral::parry_consistency(&a, *len, tol)?,
                }),
                (None, None) => {
                    return Err(CliError::Usage("parry needs --word or --check".into()))
                }
            }
        }
        Command::Kms { matrix, nmax } => {
            let (name, a) = load(matrix)?;
            Report::Kms(KmsCommandReport {
                name,
                inverse_temperature: spectral::kms_temperature(&a, DEFAULT_PERRON_TOL)?,
                report: spectral::kms_verify(&a, *nmax, tol)?,
            })
        }
        Command::Entropy { matrix } => {
            let (name, a) = load(matrix)?;
            let pd = spectral::perron(&a, DEFAULT_PERRON_TOL)?;
            Report::Entropy(EntropyReport {
                name,
                beta: pd.beta,
                entropy: pd.beta.ln(),
                residual: pd.residual,
            })
        }
        Command::Conjugacy(ConjugacyCommand::Verify {
            phi,
            psi,
            lag,
            period,
        }) => {
            let load_map = |p: &PathBuf| -> Result<_, CliError> {
                load_json::<BlockMapFile>(p)?
                    .into_block_map()
                    .map_err(|e| file_error(p, e.to_string()))
            };
            let phi = load_map(phi)?;
            let psi = load_map(psi)?;
            let lag = lag_conjugacy_report(&phi, &psi, *lag, *period)?;
            let up_to = u32::try_from(*period)
                .unwrap_or(u32::MAX)
                .min(COMPARE_PERIODS);
            let periodic_counts_equal = counts_agree(phi.source(), phi.target(), up_to)?;
            let passed = lag.passed && periodic_counts_equal;
            Report::Conjugacy(ConjugacyReport {
                lag,
                periodic_counts_equal,
                passed,
            })
        }
    };
    Ok(report)
}

/// Parses arguments, runs the command and writes its report; returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
                return EXIT_OK;
            }
            let _ = write!(err, "{text}");
            return EXIT_INPUT;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let text = if cli.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("shiftlab").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn parse_formats() {
        let j = parse_matrix(r#"{"name":"g","rows":[[1,1],[1,0]]}"#).unwrap();
        assert_eq!(j.name.as_deref(), Some("g"));
        assert_eq!(j.rows, IntMatrix::from_i64(&[&[1, 1], &[1, 0]]));
        let bare = parse_matrix("[[1,1],[1,0]]").unwrap();
        assert_eq!(bare.rows, j.rows);
        let text = parse_matrix("# golden\n1 1\n\n1 0\n").unwrap();
        assert_eq!(text.rows, j.rows);
        let big = parse_matrix(r#"{"rows":[["123456789012345678901234567890"]]}"#).unwrap();
        assert_eq!(
            big.rows.get(0, 0).to_string(),
            "123456789012345678901234567890"
        );
    }

    #[test]
    fn matrix_file_round_trip() {
        let f = MatrixFile {
            name: Some("x".into()),
            rows: IntMatrix::from_i64(&[&[1, 2, 0], &[0, 0, 7]]),
        };
        let text = f.to_json();
        assert!(text.contains("[1,2,0],\n    [0,0,7]"), "{text}");
        assert_eq!(parse_matrix(&text).unwrap(), f);
        let big: BigInt = "98765432109876543210987".parse().unwrap();
        let f = MatrixFile {
            name: None,
            rows: IntMatrix::from_rows(&[vec![big]]).unwrap(),
        };
        assert_eq!(parse_matrix(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn parse_errors_have_locations() {
        let e = parse_matrix("1 1\n1 x\n").unwrap_err();
        assert!(e.contains("line 2, entry 2"), "{e}");
        let e = parse_matrix("1 1\n\n1\n").unwrap_err();
        assert!(e.contains("line 3"), "{e}");
        let e = parse_matrix(r#"{"rows":[[1,-1],[1,0]]}"#).unwrap_err();
        assert!(e.contains("rows[0][1]"), "{e}");
        let e = parse_matrix("{\"rows\": [[1,\n 2]").unwrap_err();
        assert!(e.contains("line 2"), "{e}");
        assert!(parse_matrix("").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&[]).0, EXIT_INPUT);
        assert_eq!(run(&["bf"]).0, EXIT_INPUT);
        assert_eq!(run(&["bf", "/nonexistent/matrix.json"]).0, EXIT_INPUT);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn report_json_round_trip() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        let b = IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 0], &[1, 1, 0]]);
        let r = Report::Compare(compare_report("ones3", &a, "b3", &b).unwrap());
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.exit_code(), EXIT_NEGATIVE);
        assert!(r
            .to_text()
            .contains("e-pair: Inequivalent ((Z/2,[1]) vs (Z/2,[0]))"));
    }
}
