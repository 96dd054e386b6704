//! Perron–Frobenius data, entropy, the Parry measure on cylinders and the
//! numeric identities satisfied by the KMS values `p_n(i,j) = b_i a_j / β^{n+1}`.
//!
//! Everything here is binary64 with explicit tolerances.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlinalg::IntMatrix;
use crate::shift_spaces::{self, ShiftError, Word};

pub const DEFAULT_PERRON_TOL: f64 = 1e-12;
pub const DEFAULT_CHECK_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error("matrix is not irreducible")]
    Reducible,
    #[error("matrix is not aperiodic")]
    NotAperiodic,
    #[error("matrix is a permutation matrix")]
    Permutation,
    #[error(
        "power iteration did not converge (residual {residual:e} after {iterations} iterations)"
    )]
    NoConvergence { residual: f64, iterations: usize },
    #[error("entry too large for floating point")]
    Overflow,
    #[error("word symbol {symbol} outside alphabet of size {size}")]
    BadSymbol { symbol: usize, size: usize },
    #[error("word must be nonempty")]
    EmptyWord,
}

type Dense = Vec<Vec<f64>>;

fn to_dense(a: &IntMatrix) -> Result<Dense, SpectralError> {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| {
                    a.get(i, j)
                        .to_f64()
                        .filter(|x| x.is_finite())
                        .ok_or(SpectralError::Overflow)
                })
                .collect()
        })
        .collect()
}

fn apply(m: &Dense, x: &[f64], transpose: bool) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| if transpose { m[k][i] } else { m[i][k] } * x[k])
                .sum()
        })
        .collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronData {
    pub beta: f64,
    /// Right eigenvector, `A a = β a`, unit Euclidean norm.
    pub a: Vec<f64>,
    /// Left eigenvector, `Aᵗ b = β b`, scaled so that `Σ a_i b_i = 1`.
    pub b: Vec<f64>,
    pub residual: f64,
    pub tol: f64,
}

/// Normalised positive eigenvector of `m` (or of its transpose).
fn power_vector(m: &Dense, transpose: bool, tol: f64) -> Result<Vec<f64>, SpectralError> {
    let n = m.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let y = apply(m, &x, transpose);
        let norm = dot(&y, &y).sqrt();
        let y: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let change = max_abs_diff(&x, &y);
        x = y;
        if change < tol * 1e-3 || (change >= last && change < tol) {
            return Ok(x);
        }
        last = change;
    }
    Err(SpectralError::NoConvergence {
        residual: last,
        iterations: MAX_ITERATIONS,
    })
}

/// Solves `(M - shift·I) y = x` (or the transposed system) by Gaussian
/// elimination with partial pivoting. `None` if the system is singular.
fn shifted_solve(m: &Dense, shift: f64, x: &[f64], transpose: bool) -> Option<Vec<f64>> {
    let n = x.len();
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| {
                    (if transpose { m[j][i] } else { m[i][j] }) - if i == j { shift } else { 0.0 }
                })
                .collect();
            row.push(x[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| aug[p][col].abs().total_cmp(&aug[q][col].abs()))?;
        if aug[piv][col] == 0.0 {
            return None;
        }
        aug.swap(col, piv);
        for r in col + 1..n {
            let f = aug[r][col] / aug[col][col];
            for c in col..=n {
                aug[r][c] -= f * aug[col][c];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| aug[i][j] * y[j]).sum();
        y[i] = (aug[i][n] - s) / aug[i][i];
    }
    y.iter().all(|v| v.is_finite()).then_some(y)
}

/// A few steps of shifted inverse iteration; keeps the best residual.
fn refine(m: &Dense, x: Vec<f64>, transpose: bool) -> Vec<f64> {
    let residual = |v: &[f64]| {
        let mv = apply(m, v, transpose);
        let beta = dot(v, &mv) / dot(v, v);
        max_abs_diff(&mv, &v.iter().map(|t| beta * t).collect::<Vec<_>>())
    };
    let mut best = x.clone();
    let mut best_res = residual(&best);
    let mut cur = x;
    for _ in 0..3 {
        let mv = apply(m, &cur, transpose);
        let beta = dot(&cur, &mv) / dot(&cur, &cur);
        let Some(y) = shifted_solve(m, beta, &cur, transpose) else {
            break;
        };
        let sign = if y.iter().sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        let norm = dot(&y, &y).sqrt() * sign;
        cur = y.iter().map(|v| v / norm).collect();
        let r = residual(&cur);
        if r < best_res {
            best = cur.clone();
            best_res = r;
        }
    }
    best
}

/// Perron eigenvalue and eigenvectors of an irreducible nonnegative matrix.
///
/// Power iteration from the uniform vector; periodic matrices iterate with
/// `A + I`, which has the same Perron vectors. The vectors are then polished
/// by shifted inverse iteration.
pub fn perron(a: &IntMatrix, tol: f64) -> Result<PerronData, SpectralError> {
    let spec = shift_spaces::analyze(a)?;
    if !spec.irreducible {
        return Err(SpectralError::Reducible);
    }
    let m = to_dense(a)?;
    let mut iter_m = m.clone();
    if !spec.aperiodic {
        for (i, row) in iter_m.iter_mut().enumerate() {
            row[i] += 1.0;
        }
    }
    let right = refine(&m, power_vector(&iter_m, false, tol)?, false);
    let left = refine(&m, power_vector(&iter_m, true, tol)?, true);
    let scale = dot(&left, &right);
    let b: Vec<f64> = left.iter().map(|v| v / scale).collect();
    let beta = dot(&b, &apply(&m, &right, false));
    let ra = max_abs_diff(
        &apply(&m, &right, false),
        &right.iter().map(|v| beta * v).collect::<Vec<_>>(),
    );
    let rb = max_abs_diff(
        &apply(&m, &b, true),
        &b.iter().map(|v| beta * v).collect::<Vec<_>>(),
    );
    let residual = ra.max(rb);
    if residual >= tol || right.iter().chain(&b).any(|&v| v <= 0.0) {
        return Err(SpectralError::NoConvergence {
            residual,
            iterations: MAX_ITERATIONS,
        });
    }
    Ok(PerronData {
        beta,
        a: right,
        b,
        residual,
        tol,
    })
}

/// Topological entropy `log β`.
pub fn entropy(a: &IntMatrix, tol: f64) -> Result<f64, SpectralError> {
    Ok(perron(a, tol)?.beta.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub measure: f64,
    /// `false` when the word is not admissible; the measure is then 0.
    pub admissible: bool,
}

impl PerronData {
    /// Parry measure of the cylinder of `w`: `b_{w_1} a_{w_L} β^{-(L-1)}`.
    pub fn cylinder(&self, a: &IntMatrix, w: &Word) -> Result<Cylinder, SpectralError> {
        let size = self.a.len();
        if w.is_empty() {
            return Err(SpectralError::EmptyWord);
        }
        if let Some(&s) = w.symbols().iter().find(|&&s| s >= size) {
            return Err(SpectralError::BadSymbol {
                symbol: s + 1,
                size,
            });
        }
        if !w.is_admissible(a) {
            return Ok(Cylinder {
                measure: 0.0,
                admissible: false,
            });
        }
        let s = w.symbols();
        let measure = self.b[s[0]] * self.a[s[s.len() - 1]] * self.beta.powi(-(s.len() as i32 - 1));
        Ok(Cylinder {
            measure,
            admissible: true,
        })
    }

    fn kms_entry(&self, n: usize, i: usize, j: usize) -> f64 {
        self.b[i] * self.a[j] / self.beta.powi(n as i32 + 1)
    }
}

pub fn parry_cylinder(a: &IntMatrix, w: &Word, tol: f64) -> Result<Cylinder, SpectralError> {
    perron(a, tol)?.cylinder(a, w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParryReport {
    pub length: usize,
    /// Σ over admissible words of length L, weighted by path multiplicity.
    pub total: f64,
    pub total_error: f64,
    pub right_additivity_error: f64,
    pub left_additivity_error: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Admissible paths of length `len` with their multiplicity weights.
fn weighted_words(m: &Dense, len: usize) -> Vec<(Vec<usize>, f64)> {
    let n = m.len();
    let mut out: Vec<(Vec<usize>, f64)> = (0..n).map(|i| (vec![i], 1.0)).collect();
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|(w, wt)| {
                let last = *w.last().expect("nonempty");
                (0..n).filter(move |&j| m[last][j] > 0.0).map(move |j| {
                    let mut w2 = w.clone();
                    w2.push(j);
                    (w2, wt * m[last][j])
                })
            })
            .collect();
    }
    out
}

/// Normalisation and two-sided additivity of the Parry cylinder measure,
/// checked on all words of length at most `max_len`.
pub fn parry_consistency(
    a: &IntMatrix,
    max_len: usize,
    tol: f64,
) -> Result<ParryReport, SpectralError> {
    let pd = perron(a, DEFAULT_PERRON_TOL)?;
    let m = to_dense(a)?;
    let n = m.len();
    let mu = |w: &[usize]| pd.b[w[0]] * pd.a[w[w.len() - 1]] * pd.beta.powi(-(w.len() as i32 - 1));
    let len = max_len.max(1);
    let total: f64 = weighted_words(&m, len)
        .iter()
        .map(|(w, wt)| wt * mu(w))
        .sum();
    let mut right = 0.0f64;
    let mut left = 0.0f64;
    for l in 1..=len {
        for (w, _) in weighted_words(&m, l) {
            let last = w[w.len() - 1];
            let r: f64 = (0..n)
                .filter(|&j| m[last][j] > 0.0)
                .map(|j| {
                    let mut wj = w.clone();
                    wj.push(j);
                    m[last][j] * mu(&wj)
                })
                .sum();
            let lft: f64 = (0..n)
                .filter(|&i| m[i][w[0]] > 0.0)
                .map(|i| {
                    let mut iw = vec![i];
                    iw.extend(&w);
                    m[i][w[0]] * mu(&iw)
                })
                .sum();
            right = right.max((mu(&w) - r).abs());
            left = left.max((mu(&w) - lft).abs());
        }
    }
    let total_error = (total - 1.0).abs();
    Ok(ParryReport {
        length: len,
        total,
        total_error,
        right_additivity_error: right,
        left_additivity_error: left,
        tol,
        passed: total_error < tol && right < tol && left < tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsTable {
    pub n: usize,
    pub beta: f64,
    /// `p[i][j] = b_i a_j / β^{n+1}`.
    pub p: Vec<Vec<f64>>,
}

fn require_aperiodic(a: &IntMatrix) -> Result<shift_spaces::MarkovShiftSpec, SpectralError> {
    let spec = shift_spaces::analyze(a)?;
    if !spec.irreducible {
        return Err(SpectralError::Reducible);
    }
    if !spec.aperiodic {
        return Err(SpectralError::NotAperiodic);
    }
    Ok(spec)
}

pub fn kms_values_with(pd: &PerronData, n: usize) -> KmsTable {
    let size = pd.a.len();
    KmsTable {
        n,
        beta: pd.beta,
        p: (0..size)
            .map(|i| (0..size).map(|j| pd.kms_entry(n, i, j)).collect())
            .collect(),
    }
}

pub fn kms_values(a: &IntMatrix, n: usize, tol: f64) -> Result<KmsTable, SpectralError> {
    require_aperiodic(a)?;
    Ok(kms_values_with(&perron(a, tol)?, n))
}

/// Largest deviation of each identity at one level `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsLevel {
    pub n: usize,
    /// `p_n = β p_{n+1}`.
    pub scaling: f64,
    /// `p_n(i,j) = Σ_k A(j,k) p_{n+1}(i,k)`.
    pub right_step: f64,
    /// `p_n(i,j) = Σ_h A(h,i) p_{n+1}(h,j)`.
    pub left_step: f64,
    /// `β p_n(i,j) = Σ_k A(j,k) p_n(i,k) = Σ_h A(h,i) p_n(h,j)`.
    pub eigen: f64,
    /// `Σ_{i,j} A^{n+1}(i,j) p_n(i,j) = 1`.
    pub row_sum: f64,
    /// `Σ_{i,j} A^{n+1}(j,i) p_n(j,i) = 1`, with each `i`-term equal to `a_i b_i`.
    pub column_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsReport {
    pub beta: f64,
    pub n0: Option<usize>,
    pub n_max: usize,
    pub tol: f64,
    pub levels: Vec<KmsLevel>,
    pub passed: bool,
}

/// Checks the KMS value identities for `0 ≤ n ≤ n_max` against the supplied
/// Perron data (which may be deliberately perturbed).
pub fn kms_verify_with(
    a: &IntMatrix,
    pd: &PerronData,
    n_max: usize,
    tol: f64,
) -> Result<KmsReport, SpectralError> {
    let spec = require_aperiodic(a)?;
    let m = to_dense(a)?;
    let size = m.len();
    let beta = pd.beta;
    let mut power = m.clone(); // A^{n+1}
    let mut levels = Vec::new();
    for n in 0..=n_max {
        let p = kms_values_with(pd, n).p;
        let q = kms_values_with(pd, n + 1).p;
        let mut lvl = KmsLevel {
            n,
            scaling: 0.0,
            right_step: 0.0,
            left_step: 0.0,
            eigen: 0.0,
            row_sum: 0.0,
            column_sum: 0.0,
        };
        let mut row_total = 0.0;
        let mut col_total = 0.0;
        for i in 0..size {
            let mut col_i = 0.0;
            for j in 0..size {
                lvl.scaling = lvl.scaling.max((p[i][j] - beta * q[i][j]).abs());
                let r: f64 = (0..size).map(|k| m[j][k] * q[i][k]).sum();
                let l: f64 = (0..size).map(|h| m[h][i] * q[h][j]).sum();
                lvl.right_step = lvl.right_step.max((p[i][j] - r).abs());
                lvl.left_step = lvl.left_step.max((p[i][j] - l).abs());
                let er: f64 = (0..size).map(|k| m[j][k] * p[i][k]).sum();
                let el: f64 = (0..size).map(|h| m[h][i] * p[h][j]).sum();
                lvl.eigen = lvl
                    .eigen
                    .max((beta * p[i][j] - er).abs())
                    .max((beta * p[i][j] - el).abs());
                row_total += power[i][j] * p[i][j];
                col_i += power[j][i] * p[j][i];
            }
            lvl.column_sum = lvl.column_sum.max((col_i - pd.a[i] * pd.b[i]).abs());
            col_total += col_i;
        }
        lvl.row_sum = (row_total - 1.0).abs();
        lvl.column_sum = lvl.column_sum.max((col_total - 1.0).abs());
        levels.push(lvl);
        power = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| (0..size).map(|k| power[i][k] * m[k][j]).sum())
                    .collect()
            })
            .collect();
    }
    let passed = levels.iter().all(|l| {
        [
            l.scaling,
            l.right_step,
            l.left_step,
            l.eigen,
            l.row_sum,
            l.column_sum,
        ]
        .iter()
        .all(|e| *e < tol)
    });
    Ok(KmsReport {
        beta,
        n0: spec.n0,
        n_max,
        tol,
        levels,
        passed,
    })
}

pub fn kms_verify(a: &IntMatrix, n_max: usize, tol: f64) -> Result<KmsReport, SpectralError> {
    require_aperiodic(a)?;
    kms_verify_with(a, &perron(a, DEFAULT_PERRON_TOL)?, n_max, tol)
}

/// The only inverse temperature admitting a KMS state: `log β`.
pub fn kms_temperature(a: &IntMatrix, tol: f64) -> Result<f64, SpectralError> {
    if require_aperiodic(a)?.is_permutation {
        return Err(SpectralError::Permutation);
    }
    entropy(a, tol)
}
