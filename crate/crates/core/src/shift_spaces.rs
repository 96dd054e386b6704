//! Matrices as topological Markov shifts: structural flags, admissible words,
//! edge graphs, state splitting and amalgamation, and exact checks of strong
//! shift and shift equivalence witnesses.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlinalg::{IntLinAlgError, IntMatrix};

/// Largest state count produced by [`random_sse_chain`].
pub const MAX_CHAIN_STATES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShiftError {
    #[error(transparent)]
    LinAlg(#[from] IntLinAlgError),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a negative entry at ({row}, {col})")]
    Negative { row: usize, col: usize },
    #[error("matrix entries must be 0 or 1")]
    NotZeroOne,
    #[error("matrix is not essential (zero row or column)")]
    NotEssential,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("state count {states} exceeds the cap {cap}")]
    CapExceeded { states: usize, cap: usize },
    #[error("no strictly positive power up to exponent {0}")]
    PowerSearchCap(usize),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("lag must be at least 1")]
    ZeroLag,
}

pub(crate) fn require_square_nonnegative(a: &IntMatrix) -> Result<(), ShiftError> {
    if !a.is_square() {
        return Err(ShiftError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    require_nonnegative(a)
}

fn require_nonnegative(a: &IntMatrix) -> Result<(), ShiftError> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if a.get(i, j).is_negative() {
                return Err(ShiftError::Negative { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn support(a: &IntMatrix) -> Vec<Vec<bool>> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| !a.get(i, j).is_zero()).collect())
        .collect()
}

fn bool_mul(x: &[Vec<bool>], y: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| x[i][k] && y[k][j])).collect())
        .collect()
}

fn reachable(adj: &[Vec<bool>], from: usize, reverse: bool) -> Vec<bool> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            let edge = if reverse { adj[v][u] } else { adj[u][v] };
            if edge && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Structural description of a square nonnegative matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovShiftSpec {
    pub alphabet_size: usize,
    pub is_01: bool,
    pub essential: bool,
    pub irreducible: bool,
    pub is_permutation: bool,
    /// gcd of cycle lengths; only defined for irreducible matrices.
    pub period: Option<u64>,
    pub aperiodic: bool,
    /// Least `n` with `A^n` strictly positive.
    pub n0: Option<usize>,
    pub warnings: Vec<String>,
}

impl MarkovShiftSpec {
    /// Irreducible, non-permutation 0-1 matrix.
    pub fn standard_hypotheses_hold(&self) -> bool {
        self.is_01 && self.irreducible && !self.is_permutation
    }
}

pub fn analyze(a: &IntMatrix) -> Result<MarkovShiftSpec, ShiftError> {
    require_square_nonnegative(a)?;
    let n = a.rows();
    let adj = support(a);
    let is_01 = a.entries().iter().all(|x| x.is_zero() || x.is_one());
    let essential =
        (0..n).all(|i| adj[i].iter().any(|&x| x)) && (0..n).all(|j| (0..n).any(|i| adj[i][j]));
    let has_edge = adj.iter().any(|row| row.iter().any(|&x| x));
    let irreducible = n > 0
        && has_edge
        && reachable(&adj, 0, false).iter().all(|&x| x)
        && reachable(&adj, 0, true).iter().all(|&x| x);
    let is_permutation = is_01
        && (0..n).all(|i| adj[i].iter().filter(|&&x| x).count() == 1)
        && (0..n).all(|j| (0..n).filter(|&i| adj[i][j]).count() == 1);

    let period = irreducible.then(|| {
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if adj[u][v] && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0u64;
        for u in 0..n {
            for v in 0..n {
                if adj[u][v] {
                    let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
                    g = g.gcd(&diff);
                }
            }
        }
        g
    });

    let mut n0 = None;
    if period == Some(1) {
        let cap = n * n;
        let mut power = adj.clone();
        for k in 1..=cap {
            if power.iter().all(|row| row.iter().all(|&x| x)) {
                n0 = Some(k);
                break;
            }
            power = bool_mul(&power, &adj);
        }
        if n0.is_none() {
            return Err(ShiftError::PowerSearchCap(cap));
        }
    }
    let aperiodic = n0.is_some();

    let mut warnings = Vec::new();
    if !is_01 {
        warnings
            .push("entries are not all 0 or 1; use the edge graph for a 0-1 presentation".into());
    }
    if !essential {
        warnings.push("matrix is not essential".into());
    }
    if !irreducible {
        warnings.push("matrix is not irreducible".into());
    }
    if is_permutation {
        warnings.push("matrix is a permutation matrix".into());
    }
    if irreducible && !aperiodic {
        warnings.push(format!(
            "matrix is periodic with period {}",
            period.unwrap_or(0)
        ));
    }

    Ok(MarkovShiftSpec {
        alphabet_size: n,
        is_01,
        essential,
        irreducible,
        is_permutation,
        period,
        aperiodic,
        n0,
        warnings,
    })
}

/// Finite word over `{0, …, N-1}`; displayed 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// 1-based symbols joined without separator when all are single digits.
    pub fn display_with(&self, alphabet_size: usize) -> String {
        let parts: Vec<String> = self.0.iter().map(|s| (s + 1).to_string()).collect();
        if alphabet_size <= 9 {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    pub fn is_admissible(&self, a: &IntMatrix) -> bool {
        self.0.iter().all(|&s| s < a.rows())
            && self.0.windows(2).all(|p| !a.get(p[0], p[1]).is_zero())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.0.iter().copied().max().unwrap_or(0);
        f.write_str(&self.display_with(max + 1))
    }
}

impl FromStr for Word {
    type Err = ShiftError;

    /// `"121"`, `"1.2.1"`, `"1,2,1"` or `"1 2 1"`, all 1-based.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let tokens: Vec<&str> = if s.contains(['.', ',', ' ']) {
            s.split(['.', ',', ' ']).filter(|t| !t.is_empty()).collect()
        } else {
            s.char_indices()
                .map(|(i, c)| &s[i..i + c.len_utf8()])
                .collect()
        };
        tokens
            .into_iter()
            .map(|t| match t.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(ShiftError::InvalidWord(format!(
                    "bad symbol {t:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// All admissible words of length `n` in lexicographic order.
pub fn words(a: &IntMatrix, n: usize) -> Result<Vec<Word>, ShiftError> {
    require_square_nonnegative(a)?;
    if !a.entries().iter().all(|x| x.is_zero() || x.is_one()) {
        return Err(ShiftError::NotZeroOne);
    }
    if n == 0 {
        return Ok(vec![Word::default()]);
    }
    let mut out: Vec<Vec<usize>> = (0..a.rows()).map(|i| vec![i]).collect();
    for _ in 1..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().expect("nonempty");
                (0..a.cols())
                    .filter(move |&j| !a.get(last, j).is_zero())
                    .map(move |j| {
                        let mut w = w.clone();
                        w.push(j);
                        w
                    })
            })
            .collect();
    }
    Ok(out.into_iter().map(Word).collect())
}

/// Edge `source → target`, `copy`-th of the parallel edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub copy: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeGraph {
    pub edges: Vec<Edge>,
    /// Edge transition matrix (0-1).
    pub matrix: IntMatrix,
    /// States × edges, `R(v,e) = 1` iff `e` starts at `v`.
    pub r: IntMatrix,
    /// Edges × states, `S(e,w) = 1` iff `e` ends at `w`.
    pub s: IntMatrix,
}

pub fn edge_graph(a: &IntMatrix) -> Result<EdgeGraph, ShiftError> {
    let spec = analyze(a)?;
    if !spec.essential {
        return Err(ShiftError::NotEssential);
    }
    let n = a.rows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mult = a
                .get(i, j)
                .to_usize()
                .expect("edge multiplicity fits in memory");
            edges.extend((0..mult).map(|copy| Edge {
                source: i,
                target: j,
                copy,
            }));
        }
    }
    let e = edges.len();
    let r = IntMatrix::from_fn(n, e, |v, k| BigInt::from(u8::from(edges[k].source == v)));
    let s = IntMatrix::from_fn(e, n, |k, w| BigInt::from(u8::from(edges[k].target == w)));
    let matrix = IntMatrix::from_fn(e, e, |k, l| {
        BigInt::from(u8::from(edges[k].target == edges[l].source))
    });
    if !verify_sse_step(a, &matrix, &r, &s)? {
        unreachable!("edge graph factorisation failed");
    }
    Ok(EdgeGraph {
        edges,
        matrix,
        r,
        s,
    })
}

/// One elementary strong shift equivalence `A = R S`, `B = S R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SseStep {
    #[serde(rename = "R")]
    pub r: IntMatrix,
    #[serde(rename = "S")]
    pub s: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SseChain {
    pub matrices: Vec<IntMatrix>,
    pub steps: Vec<SseStep>,
}

impl SseChain {
    pub fn start(&self) -> &IntMatrix {
        &self.matrices[0]
    }

    pub fn end(&self) -> &IntMatrix {
        self.matrices.last().expect("nonempty chain")
    }
}

fn shape(m: &IntMatrix) -> String {
    format!("{}x{}", m.rows(), m.cols())
}

pub fn verify_sse_step(
    a: &IntMatrix,
    b: &IntMatrix,
    r: &IntMatrix,
    s: &IntMatrix,
) -> Result<bool, ShiftError> {
    let ok = a.is_square()
        && b.is_square()
        && r.rows() == a.rows()
        && s.cols() == a.rows()
        && r.cols() == b.rows()
        && s.rows() == b.rows();
    if !ok {
        return Err(ShiftError::Shape(format!(
            "A {}, B {}, R {}, S {}",
            shape(a),
            shape(b),
            shape(r),
            shape(s)
        )));
    }
    Ok(&r.mul(s)? == a && &s.mul(r)? == b)
}

pub fn verify_sse_chain(chain: &SseChain) -> Result<bool, ShiftError> {
    if chain.matrices.is_empty() || chain.steps.len() + 1 != chain.matrices.len() {
        return Err(ShiftError::Shape(format!(
            "{} matrices need {} steps, found {}",
            chain.matrices.len(),
            chain.matrices.len().saturating_sub(1),
            chain.steps.len()
        )));
    }
    for (k, step) in chain.steps.iter().enumerate() {
        if !verify_sse_step(&chain.matrices[k], &chain.matrices[k + 1], &step.r, &step.s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `A R = R B`, `S A = B S`, `A^ℓ = R S`, `B^ℓ = S R`.
pub fn verify_se(
    a: &IntMatrix,
    b: &IntMatrix,
    r: &IntMatrix,
    s: &IntMatrix,
    ell: u32,
) -> Result<bool, ShiftError> {
    if ell == 0 {
        return Err(ShiftError::ZeroLag);
    }
    let ok = a.is_square()
        && b.is_square()
        && r.rows() == a.rows()
        && r.cols() == b.rows()
        && s.rows() == b.rows()
        && s.cols() == a.rows();
    if !ok {
        return Err(ShiftError::Shape(format!(
            "A {}, B {}, R {}, S {}",
            shape(a),
            shape(b),
            shape(r),
            shape(s)
        )));
    }
    require_nonnegative(r)?;
    require_nonnegative(s)?;
    Ok(a.mul(r)? == r.mul(b)?
        && s.mul(a)? == b.mul(s)?
        && a.pow(ell)? == r.mul(s)?
        && b.pow(ell)? == s.mul(r)?)
}

/// Result of a splitting or amalgamation: `A = R S`, `B = S R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub matrix: IntMatrix,
    pub r: IntMatrix,
    pub s: IntMatrix,
}

/// Splits each state's outgoing edges; `partition[i]` lists row vectors
/// summing to row `i` of `A`.
pub fn out_split(a: &IntMatrix, partition: &[Vec<Vec<BigInt>>]) -> Result<Move, ShiftError> {
    require_square_nonnegative(a)?;
    let n = a.rows();
    if partition.len() != n {
        return Err(ShiftError::InvalidPartition(format!(
            "expected {n} states, got {}",
            partition.len()
        )));
    }
    let mut owner = Vec::new();
    let mut cells: Vec<&Vec<BigInt>> = Vec::new();
    for (i, state_cells) in partition.iter().enumerate() {
        if state_cells.is_empty() {
            return Err(ShiftError::InvalidPartition(format!(
                "state {} has no cells",
                i + 1
            )));
        }
        let mut total = vec![BigInt::zero(); n];
        for cell in state_cells {
            if cell.len() != n {
                return Err(ShiftError::InvalidPartition(format!(
                    "cell of state {} has length {}",
                    i + 1,
                    cell.len()
                )));
            }
            if cell.iter().any(Signed::is_negative) || cell.iter().all(Zero::is_zero) {
                return Err(ShiftError::InvalidPartition(format!(
                    "empty or negative cell at state {}",
                    i + 1
                )));
            }
            for (t, c) in total.iter_mut().zip(cell) {
                *t += c;
            }
            owner.push(i);
            cells.push(cell);
        }
        if total.as_slice() != a.row(i) {
            return Err(ShiftError::InvalidPartition(format!(
                "cells of state {} do not sum to its row",
                i + 1
            )));
        }
    }
    let m = cells.len();
    let d = IntMatrix::from_fn(n, m, |i, k| BigInt::from(u8::from(owner[k] == i)));
    let e = IntMatrix::from_fn(m, n, |k, j| cells[k][j].clone());
    let b = e.mul(&d)?;
    Ok(Move {
        matrix: b,
        r: d,
        s: e,
    })
}

/// Splits each state's incoming edges; `partition[j]` lists column vectors
/// summing to column `j` of `A`.
pub fn in_split(a: &IntMatrix, partition: &[Vec<Vec<BigInt>>]) -> Result<Move, ShiftError> {
    let t = out_split(&a.transpose(), partition)?;
    Ok(Move {
        matrix: t.matrix.transpose(),
        r: t.s.transpose(),
        s: t.r.transpose(),
    })
}

/// Merges states with identical nonzero columns (inverse of an out-split).
/// Returns `None` when no two states can be merged.
pub fn out_amalgamate(a: &IntMatrix) -> Result<Option<Move>, ShiftError> {
    require_square_nonnegative(a)?;
    let n = a.rows();
    let mut group_of = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for k in 0..n {
        let col = a.column(k);
        match reps
            .iter()
            .position(|&r| a.column(r) == col && col.iter().any(|x| !x.is_zero()))
        {
            Some(g) => group_of[k] = g,
            None => {
                group_of[k] = reps.len();
                reps.push(k);
            }
        }
    }
    if reps.len() == n {
        return Ok(None);
    }
    let g = reps.len();
    let d = IntMatrix::from_fn(g, n, |grp, k| BigInt::from(u8::from(group_of[k] == grp)));
    let e = IntMatrix::from_fn(n, g, |k, grp| a.get(k, reps[grp]).clone());
    let merged = d.mul(&e)?;
    Ok(Some(Move {
        matrix: merged,
        r: e,
        s: d,
    }))
}

/// Merges states with identical nonzero rows (inverse of an in-split).
pub fn in_amalgamate(a: &IntMatrix) -> Result<Option<Move>, ShiftError> {
    Ok(out_amalgamate(&a.transpose())?.map(|t| Move {
        matrix: t.matrix.transpose(),
        r: t.s.transpose(),
        s: t.r.transpose(),
    }))
}

/// Splits the multiset of entries of `row` into two nonempty random cells.
fn random_two_cells(row: &[BigInt], rng: &mut ChaCha8Rng) -> Option<Vec<Vec<BigInt>>> {
    let counts: Vec<u64> = row.iter().map(|x| x.to_u64().unwrap_or(u64::MAX)).collect();
    let total: u64 = counts.iter().fold(0u64, |a, &b| a.saturating_add(b));
    if !(2..=64).contains(&total) {
        return None;
    }
    loop {
        let first: Vec<u64> = counts.iter().map(|&c| rng.gen_range(0..=c)).collect();
        let size: u64 = first.iter().sum();
        if size > 0 && size < total {
            let second = counts
                .iter()
                .zip(&first)
                .map(|(c, f)| BigInt::from(c - f))
                .collect();
            return Some(vec![first.into_iter().map(BigInt::from).collect(), second]);
        }
    }
}

fn trivial_partition(a: &IntMatrix, rows: bool) -> Vec<Vec<Vec<BigInt>>> {
    (0..a.rows())
        .map(|i| vec![if rows { a.row(i).to_vec() } else { a.column(i) }])
        .collect()
}

/// Seeded chain of elementary equivalences built from random splittings and
/// amalgamations. Every step is verified before it is appended.
pub fn random_sse_chain(a: &IntMatrix, steps: usize, seed: u64) -> Result<SseChain, ShiftError> {
    require_square_nonnegative(a)?;
    if a.rows() > MAX_CHAIN_STATES {
        return Err(ShiftError::CapExceeded {
            states: a.rows(),
            cap: MAX_CHAIN_STATES,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = SseChain {
        matrices: vec![a.clone()],
        steps: Vec::new(),
    };
    for _ in 0..steps {
        let cur = chain.end().clone();
        let n = cur.rows();
        let mut candidates: Vec<Move> = Vec::new();
        if n < MAX_CHAIN_STATES {
            for use_rows in [true, false] {
                let splittable: Vec<usize> = (0..n)
                    .filter(|&i| {
                        let v = if use_rows {
                            cur.row(i).to_vec()
                        } else {
                            cur.column(i)
                        };
                        v.iter().fold(BigInt::zero(), |s, x| s + x) >= BigInt::from(2)
                    })
                    .collect();
                if splittable.is_empty() {
                    continue;
                }
                let state = splittable[rng.gen_range(0..splittable.len())];
                let mut partition = trivial_partition(&cur, use_rows);
                let line = partition[state][0].clone();
                if let Some(cells) = random_two_cells(&line, &mut rng) {
                    partition[state] = cells;
                    let mv = if use_rows {
                        out_split(&cur, &partition)?
                    } else {
                        in_split(&cur, &partition)?
                    };
                    candidates.push(mv);
                }
            }
        }
        if let Some(mv) = out_amalgamate(&cur)? {
            candidates.push(mv);
        }
        if let Some(mv) = in_amalgamate(&cur)? {
            candidates.push(mv);
        }
        let mv = if candidates.is_empty() {
            Move {
                matrix: cur.clone(),
                r: cur.clone(),
                s: IntMatrix::identity(n),
            }
        } else {
            candidates.swap_remove(rng.gen_range(0..candidates.len()))
        };
        debug_assert!(verify_sse_step(&cur, &mv.matrix, &mv.r, &mv.s)?);
        chain.matrices.push(mv.matrix);
        chain.steps.push(SseStep { r: mv.r, s: mv.s });
    }
    Ok(chain)
}

/// Number of points of period `n`: `tr(A^n)`.
pub fn periodic_count(a: &IntMatrix, n: u32) -> Result<BigInt, ShiftError> {
    require_square_nonnegative(a)?;
    Ok(a.pow(n)?.trace())
}
