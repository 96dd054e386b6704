//! Exact integer matrix arithmetic.
//!
//! Everything here works over arbitrary-precision integers: Smith and Hermite
//! normal forms with their unimodular transforms, integer linear solving,
//! integer kernels and lattices given by canonical Hermite bases.
//!
//! Conventions that matter for reproducibility:
//!
//! * Smith form pivoting picks the nonzero entry of smallest absolute value in
//!   the remaining block, ties broken by row index and then column index.
//! * Hermite form is column style and lower triangular: column `k` has a
//!   positive pivot in row `p_k`, zeros above it, `p_0 < p_1 < ...`, and every
//!   entry in a pivot row to the left of the pivot lies in `[0, pivot)`.
//!   Zero columns are dropped.
//! * Matrices with zero rows or zero columns are legal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntLinAlgError {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },
    #[error("matrix rows have unequal lengths (row {row} has {len} entries, expected {expected})")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
}

fn mismatch(
    op: &'static str,
    expected: impl fmt::Display,
    found: impl fmt::Display,
) -> IntLinAlgError {
    IntLinAlgError::DimensionMismatch {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Dense integer matrix, row-major, arbitrary precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self, IntLinAlgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(IntLinAlgError::Ragged {
                    row: r,
                    len: row.len(),
                    expected: cols,
                });
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix from rows, panicking on ragged input. Meant for literals.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let owned: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        Self::from_rows(&owned).expect("rectangular literal")
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entries as `i64` when they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, IntLinAlgError> {
        if self.cols != rhs.rows {
            return Err(mismatch(
                "mul",
                format!("{} rows on the right", self.cols),
                rhs.rows,
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>, IntLinAlgError> {
        if v.len() != self.cols {
            return Err(mismatch("mul_vec", self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn zip_with(
        &self,
        rhs: &IntMatrix,
        op: &'static str,
        f: impl Fn(&BigInt, &BigInt) -> BigInt,
    ) -> Result<IntMatrix, IntLinAlgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(mismatch(
                op,
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &IntMatrix) -> Result<IntMatrix, IntLinAlgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &IntMatrix) -> Result<IntMatrix, IntLinAlgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    /// `I - self`; requires a square matrix.
    pub fn identity_minus(&self) -> Result<IntMatrix, IntLinAlgError> {
        if !self.is_square() {
            return Err(mismatch(
                "identity_minus",
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        Self::identity(self.rows).sub(self)
    }

    pub fn pow(&self, n: u32) -> Result<IntMatrix, IntLinAlgError> {
        if !self.is_square() {
            return Err(mismatch(
                "pow",
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    /// Kronecker product; index `(i * rhs.rows + k, j * rhs.cols + l)`.
    pub fn kron(&self, rhs: &IntMatrix) -> IntMatrix {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            self.get(r / rhs.rows, c / rhs.cols) * rhs.get(r % rhs.rows, c % rhs.cols)
        })
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hconcat(&self, rhs: &IntMatrix) -> Result<IntMatrix, IntLinAlgError> {
        if self.rows != rhs.rows {
            return Err(mismatch("hconcat", self.rows, rhs.rows));
        }
        Ok(Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                rhs.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn select_columns(&self, cols: impl IntoIterator<Item = usize>) -> IntMatrix {
        let cols: Vec<usize> = cols.into_iter().collect();
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn select_rows(&self, rows: impl IntoIterator<Item = usize>) -> IntMatrix {
        let rows: Vec<usize> = rows.into_iter().collect();
        Self::from_fn(rows.len(), self.cols, |i, j| self.get(rows[i], j).clone())
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt, IntLinAlgError> {
        if !self.is_square() {
            return Err(mismatch(
                "det",
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !m.get(i, k).is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
            }
            prev = m.get(k, k).clone();
        }
        Ok(sign * m.get(n - 1, n - 1))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(src, j) * c;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += c * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, src) * c;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self.get(r, j);
            self.set(r, j, v);
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, c);
            self.set(i, c, v);
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IntMatrix{:?}",
            self.to_rows()
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        )
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// JSON entry: a number when it fits in `i64`, otherwise a decimal string.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    fn from_big(x: &BigInt) -> Self {
        x.to_i64()
            .map_or_else(|| JsonInt::Big(x.to_string()), JsonInt::Small)
    }

    fn into_big<E: serde::de::Error>(self) -> Result<BigInt, E> {
        match self {
            JsonInt::Small(v) => Ok(v.into()),
            JsonInt::Big(s) => s
                .parse()
                .map_err(|_| E::custom(format!("not an integer: {s:?}"))),
        }
    }
}

pub(crate) fn serialize_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    JsonInt::from_big(x).serialize(s)
}

pub(crate) fn deserialize_bigint<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    JsonInt::deserialize(d)?.into_big()
}

pub(crate) mod bigint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(JsonInt::from_big)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<JsonInt>::deserialize(d)?
            .into_iter()
            .map(JsonInt::into_big)
            .collect()
    }
}

pub(crate) mod opt_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(JsonInt::from_big).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<JsonInt>::deserialize(d)?
            .map(JsonInt::into_big)
            .transpose()
    }
}

/// Serialized as a list of rows.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<JsonInt>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(JsonInt::from_big).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<JsonInt>>::deserialize(d)?;
        let rows: Vec<Vec<BigInt>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(JsonInt::into_big)
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        IntMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `U * M * V = D` with `U`, `V` unimodular and `D` diagonal in divisor-chain form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    /// Inverse of `u`, tracked alongside it.
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
    /// Diagonal of `d` (length `min(rows, cols)`), nonnegative, `d_1 | d_2 | ...`.
    pub divisors: Vec<BigInt>,
}

/// Smith normal form with transforms.
pub fn snf(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let row_add = |a: &mut IntMatrix,
                   u: &mut IntMatrix,
                   u_inv: &mut IntMatrix,
                   dst: usize,
                   src: usize,
                   c: &BigInt| {
        a.add_row_multiple(dst, src, c);
        u.add_row_multiple(dst, src, c);
        u_inv.add_col_multiple(src, dst, &-c);
    };
    let row_swap =
        |a: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, x: usize, y: usize| {
            a.swap_rows(x, y);
            u.swap_rows(x, y);
            u_inv.swap_cols(x, y);
        };

    for t in 0..rows.min(cols) {
        // Smallest nonzero pivot in the trailing block, row-major tie-break.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = a.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        row_swap(&mut a, &mut u, &mut u_inv, t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            // Clear column t below and row t to the right.
            loop {
                let p = a.get(t, t).clone();
                for i in t + 1..rows {
                    if !a.get(i, t).is_zero() {
                        let q = a.get(i, t).div_floor(&p);
                        row_add(&mut a, &mut u, &mut u_inv, i, t, &-q);
                    }
                }
                for j in t + 1..cols {
                    if !a.get(t, j).is_zero() {
                        let q = a.get(t, j).div_floor(&p);
                        a.add_col_multiple(j, t, &-&q);
                        v.add_col_multiple(j, t, &-q);
                    }
                }
                let mut next: Option<(bool, usize)> = None;
                let mut best_abs: Option<BigInt> = None;
                for i in t + 1..rows {
                    let x = a.get(i, t);
                    if !x.is_zero() && best_abs.as_ref().is_none_or(|b| &x.abs() < b) {
                        best_abs = Some(x.abs());
                        next = Some((true, i));
                    }
                }
                for j in t + 1..cols {
                    let x = a.get(t, j);
                    if !x.is_zero() && best_abs.as_ref().is_none_or(|b| &x.abs() < b) {
                        best_abs = Some(x.abs());
                        next = Some((false, j));
                    }
                }
                match next {
                    None => break,
                    Some((true, i)) => row_swap(&mut a, &mut u, &mut u_inv, t, i),
                    Some((false, j)) => {
                        a.swap_cols(t, j);
                        v.swap_cols(t, j);
                    }
                }
            }
            // Divisibility of the trailing block by the pivot.
            let p = a.get(t, t).clone();
            let offender =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => row_add(&mut a, &mut u, &mut u_inv, t, i, &BigInt::one()),
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
    }

    let divisors = (0..rows.min(cols)).map(|i| a.get(i, i).clone()).collect();
    SmithForm {
        u,
        u_inv,
        v,
        d: a,
        divisors,
    }
}

/// Column Hermite form: `M * transform = [h | 0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteForm {
    /// Canonical basis, zero columns trimmed (`rows x rank`).
    pub h: IntMatrix,
    /// Unimodular `cols x cols`; its first `rank` columns produce `h`, the rest span the kernel.
    pub transform: IntMatrix,
    pub rank: usize,
}

pub fn hnf(m: &IntMatrix) -> HermiteForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut h = m.clone();
    let mut t = IntMatrix::identity(cols);
    let mut k = 0;
    for i in 0..rows {
        if k == cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in k..cols {
                let x = h.get(i, j);
                if !x.is_zero() && best.is_none_or(|b| x.abs() < h.get(i, b).abs()) {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            h.swap_cols(k, b);
            t.swap_cols(k, b);
            let p = h.get(i, k).clone();
            let mut done = true;
            for j in k + 1..cols {
                if !h.get(i, j).is_zero() {
                    let q = h.get(i, j).div_floor(&p);
                    h.add_col_multiple(j, k, &-&q);
                    t.add_col_multiple(j, k, &-q);
                    if !h.get(i, j).is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h.get(i, k).is_zero() {
            continue;
        }
        if h.get(i, k).is_negative() {
            h.negate_col(k);
            t.negate_col(k);
        }
        let p = h.get(i, k).clone();
        for j in 0..k {
            let q = h.get(i, j).div_floor(&p);
            if !q.is_zero() {
                h.add_col_multiple(j, k, &-&q);
                t.add_col_multiple(j, k, &-q);
            }
        }
        k += 1;
    }
    HermiteForm {
        h: h.select_columns(0..k),
        transform: t,
        rank: k,
    }
}

/// Subgroup of `Z^n` described by its canonical Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    ambient_rank: usize,
    basis: IntMatrix,
}

impl Lattice {
    /// Lattice spanned by the columns of `generators`.
    pub fn from_generators(generators: &IntMatrix) -> Self {
        Lattice {
            ambient_rank: generators.rows,
            basis: hnf(generators).h,
        }
    }

    pub fn zero(n: usize) -> Self {
        Lattice {
            ambient_rank: n,
            basis: IntMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Lattice {
            ambient_rank: n,
            basis: IntMatrix::identity(n),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.basis.cols
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    fn pivot_row(&self, k: usize) -> usize {
        (0..self.ambient_rank)
            .find(|&i| !self.basis.get(i, k).is_zero())
            .expect("hermite columns are nonzero")
    }

    /// Coefficients of `v` in the Hermite basis, if `v` lies in the lattice.
    pub fn coefficients(&self, v: &[BigInt]) -> Result<Option<Vec<BigInt>>, IntLinAlgError> {
        if v.len() != self.ambient_rank {
            return Err(mismatch("lattice membership", self.ambient_rank, v.len()));
        }
        let mut rest = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.rank());
        for k in 0..self.rank() {
            let p = self.pivot_row(k);
            let pivot = self.basis.get(p, k);
            let (q, r) = rest[p].div_mod_floor(pivot);
            if !r.is_zero() {
                return Ok(None);
            }
            if !q.is_zero() {
                for (i, x) in rest.iter_mut().enumerate().skip(p) {
                    *x -= &q * self.basis.get(i, k);
                }
            }
            coeffs.push(q);
        }
        Ok(rest.iter().all(Zero::is_zero).then_some(coeffs))
    }

    pub fn contains_vector(&self, v: &[BigInt]) -> Result<bool, IntLinAlgError> {
        Ok(self.coefficients(v)?.is_some())
    }

    /// Canonical representative of `v` modulo the lattice.
    pub fn reduce(&self, v: &[BigInt]) -> Result<Vec<BigInt>, IntLinAlgError> {
        if v.len() != self.ambient_rank {
            return Err(mismatch("lattice reduce", self.ambient_rank, v.len()));
        }
        let mut x = v.to_vec();
        for k in 0..self.rank() {
            let p = self.pivot_row(k);
            let q = x[p].div_floor(self.basis.get(p, k));
            if !q.is_zero() {
                for (i, xi) in x.iter_mut().enumerate().skip(p) {
                    *xi -= &q * self.basis.get(i, k);
                }
            }
        }
        Ok(x)
    }
}

/// True iff `inner ⊆ outer`.
pub fn lattice_contains(outer: &Lattice, inner: &Lattice) -> Result<bool, IntLinAlgError> {
    if outer.ambient_rank != inner.ambient_rank {
        return Err(mismatch(
            "lattice_contains",
            outer.ambient_rank,
            inner.ambient_rank,
        ));
    }
    for k in 0..inner.rank() {
        if !outer.contains_vector(&inner.basis.column(k))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn lattice_equal(a: &Lattice, b: &Lattice) -> Result<bool, IntLinAlgError> {
    Ok(lattice_contains(a, b)? && lattice_contains(b, a)?)
}

/// Integer lattice `{x : M x = 0}`.
pub fn kernel(m: &IntMatrix) -> Lattice {
    let hf = hnf(m);
    Lattice::from_generators(&hf.transform.select_columns(hf.rank..m.cols))
}

/// Canonical integer solution of `M x = b`, or `None` when none exists.
///
/// The returned `x` is the particular solution reduced against the Hermite
/// basis of the kernel, so it depends only on the solution coset.
pub fn solve(m: &IntMatrix, b: &[BigInt]) -> Result<Option<Vec<BigInt>>, IntLinAlgError> {
    if b.len() != m.rows {
        return Err(mismatch("solve", m.rows, b.len()));
    }
    let hf = hnf(m);
    let image = Lattice {
        ambient_rank: m.rows,
        basis: hf.h.clone(),
    };
    let Some(y) = image.coefficients(b)? else {
        return Ok(None);
    };
    let particular = hf.transform.select_columns(0..hf.rank).mul_vec(&y)?;
    let ker = Lattice::from_generators(&hf.transform.select_columns(hf.rank..m.cols));
    Ok(Some(ker.reduce(&particular)?))
}

pub fn to_bigints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
