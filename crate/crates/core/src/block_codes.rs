//! Sliding block codes between vertex shifts, as finite window tables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlinalg::IntMatrix;
use crate::shift_spaces::{self, ShiftError, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error("block codes need a square 0-1 matrix")]
    NotZeroOne,
    #[error("no table entry for window {0}")]
    Incomplete(String),
    #[error("table entry for window {0} has the wrong length or is not admissible")]
    BadWindow(String),
    #[error("symbol {symbol} outside target alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("window {0} produces an inadmissible image pair")]
    InadmissibleImage(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("word of length {len} is shorter than the window length {window}")]
    TooShort { len: usize, window: usize },
    #[error("word {0} is not admissible")]
    Inadmissible(String),
    #[error("block length must be at least 1")]
    InvalidBlockLength,
    #[error("malformed block map: {0}")]
    Parse(String),
}

fn require_01(a: &IntMatrix) -> Result<(), BlockError> {
    shift_spaces::require_square_nonnegative(a)?;
    if a.entries().iter().all(|x| x.is_zero() || x.is_one()) {
        Ok(())
    } else {
        Err(BlockError::NotZeroOne)
    }
}

/// Sliding block code `x ↦ (Φ(x_{i-m} … x_{i+n}))_i` between vertex shifts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    memory: usize,
    anticipation: usize,
    source: IntMatrix,
    target: IntMatrix,
    table: BTreeMap<Vec<usize>, usize>,
}

impl BlockMap {
    pub fn new(
        memory: usize,
        anticipation: usize,
        source: IntMatrix,
        target: IntMatrix,
        table: BTreeMap<Vec<usize>, usize>,
    ) -> Result<Self, BlockError> {
        require_01(&source)?;
        require_01(&target)?;
        let len = memory + anticipation + 1;
        let show = |w: &[usize]| Word(w.to_vec()).display_with(source.rows());
        for (w, &s) in &table {
            if w.len() != len || !Word(w.clone()).is_admissible(&source) {
                return Err(BlockError::BadWindow(show(w)));
            }
            if s >= target.rows() {
                return Err(BlockError::SymbolOutOfRange {
                    symbol: s + 1,
                    size: target.rows(),
                });
            }
        }
        for w in shift_spaces::words(&source, len)? {
            if !table.contains_key(w.symbols()) {
                return Err(BlockError::Incomplete(show(w.symbols())));
            }
        }
        for w in shift_spaces::words(&source, len + 1)? {
            let s = w.symbols();
            let (x, y) = (table[&s[..len]], table[&s[1..]]);
            if target.get(x, y).is_zero() {
                return Err(BlockError::InadmissibleImage(show(s)));
            }
        }
        Ok(BlockMap {
            memory,
            anticipation,
            source,
            target,
            table,
        })
    }

    /// Builds the table from a rule on windows.
    pub fn from_rule(
        memory: usize,
        anticipation: usize,
        source: IntMatrix,
        target: IntMatrix,
        mut rule: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self, BlockError> {
        require_01(&source)?;
        let table = shift_spaces::words(&source, memory + anticipation + 1)?
            .into_iter()
            .map(|w| {
                let s = rule(w.symbols());
                (w.0, s)
            })
            .collect();
        Self::new(memory, anticipation, source, target, table)
    }

    pub fn identity(a: &IntMatrix) -> Result<Self, BlockError> {
        Self::from_rule(0, 0, a.clone(), a.clone(), |w| w[0])
    }

    /// The shift map as a code with anticipation 1.
    pub fn shift(a: &IntMatrix) -> Result<Self, BlockError> {
        Self::from_rule(0, 1, a.clone(), a.clone(), |w| w[1])
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn anticipation(&self) -> usize {
        self.anticipation
    }

    pub fn window_len(&self) -> usize {
        self.memory + self.anticipation + 1
    }

    pub fn source(&self) -> &IntMatrix {
        &self.source
    }

    pub fn target(&self) -> &IntMatrix {
        &self.target
    }

    pub fn table(&self) -> &BTreeMap<Vec<usize>, usize> {
        &self.table
    }

    fn check_admissible(&self, w: &Word) -> Result<(), BlockError> {
        if w.is_admissible(&self.source) {
            Ok(())
        } else {
            Err(BlockError::Inadmissible(w.display_with(self.source.rows())))
        }
    }

    /// Image of a finite word; the output is `m + n` symbols shorter.
    pub fn apply_word(&self, w: &Word) -> Result<Word, BlockError> {
        let len = self.window_len();
        if w.len() < len {
            return Err(BlockError::TooShort {
                len: w.len(),
                window: len,
            });
        }
        self.check_admissible(w)?;
        Ok(Word(
            w.symbols()
                .windows(len)
                .map(|win| self.table[win])
                .collect(),
        ))
    }

    /// Image of the periodic point with the given cycle, same phase.
    pub fn apply_periodic(&self, p: &PeriodicPoint) -> Result<PeriodicPoint, BlockError> {
        p.check(&self.source)?;
        let c = p.cycle.symbols();
        let len = c.len();
        let m = self.memory % len;
        let image = (0..len)
            .map(|i| {
                let start = i + len - m;
                let win: Vec<usize> = (0..self.window_len())
                    .map(|k| c[(start + k) % len])
                    .collect();
                self.table[&win]
            })
            .collect();
        Ok(PeriodicPoint { cycle: Word(image) })
    }

    /// `Ψ ∘ Φ` with `self = Φ`.
    pub fn compose(&self, psi: &BlockMap) -> Result<BlockMap, BlockError> {
        if self.target != psi.source {
            return Err(BlockError::AlphabetMismatch(format!(
                "first map targets a {}-state shift, second map reads a {}-state shift",
                self.target.rows(),
                psi.source.rows()
            )));
        }
        let memory = self.memory + psi.memory;
        let anticipation = self.anticipation + psi.anticipation;
        let mut table = BTreeMap::new();
        for w in shift_spaces::words(&self.source, memory + anticipation + 1)? {
            let mid = self.apply_word(&w)?;
            table.insert(w.0, psi.apply_word(&mid)?.0[0]);
        }
        BlockMap::new(
            memory,
            anticipation,
            self.source.clone(),
            psi.target.clone(),
            table,
        )
    }
}

/// A periodic sequence given by one cycle, phase origin at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicPoint {
    pub cycle: Word,
}

impl PeriodicPoint {
    pub fn new(cycle: Word, a: &IntMatrix) -> Result<Self, BlockError> {
        let p = PeriodicPoint { cycle };
        p.check(a)?;
        Ok(p)
    }

    fn check(&self, a: &IntMatrix) -> Result<(), BlockError> {
        let c = self.cycle.symbols();
        let closes =
            !c.is_empty() && self.cycle.is_admissible(a) && !a.get(c[c.len() - 1], c[0]).is_zero();
        if closes {
            Ok(())
        } else {
            Err(BlockError::Inadmissible(self.cycle.display_with(a.rows())))
        }
    }

    /// `σ^k` of the point: rotation of the cycle to the left.
    pub fn shifted(&self, k: usize) -> PeriodicPoint {
        let mut c = self.cycle.0.clone();
        if !c.is_empty() {
            let r = k % c.len();
            c.rotate_left(r);
        }
        PeriodicPoint { cycle: Word(c) }
    }
}

/// All periodic points of period dividing some `p ≤ max_period`.
pub fn periodic_points(a: &IntMatrix, max_period: usize) -> Result<Vec<PeriodicPoint>, BlockError> {
    require_01(a)?;
    let mut out = Vec::new();
    for p in 1..=max_period {
        for w in shift_spaces::words(a, p)? {
            let s = w.symbols();
            if !a.get(s[p - 1], s[0]).is_zero() {
                out.push(PeriodicPoint { cycle: w });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagReport {
    pub lag: usize,
    pub max_period: usize,
    pub source_points: usize,
    pub target_points: usize,
    pub passed: bool,
    pub first_failure: Option<String>,
}

/// Checks `Ψ∘Φ = σ^{2K}` on the source and `Φ∘Ψ = σ^{2K}` on the target
/// over every periodic point of period at most `max_period`.
pub fn lag_conjugacy_report(
    phi: &BlockMap,
    psi: &BlockMap,
    lag: usize,
    max_period: usize,
) -> Result<LagReport, BlockError> {
    if phi.target != psi.source || psi.target != phi.source {
        return Err(BlockError::AlphabetMismatch(
            "maps do not run in opposite directions".into(),
        ));
    }
    let mut first_failure = None;
    let mut check = |f: &BlockMap, g: &BlockMap, side: &str| -> Result<usize, BlockError> {
        let points = periodic_points(&f.source, max_period)?;
        for x in &points {
            let back = g.apply_periodic(&f.apply_periodic(x)?)?;
            if back != x.shifted(2 * lag) && first_failure.is_none() {
                let size = f.source.rows();
                first_failure = Some(format!(
                    "{side} point {} maps to {}, expected {}",
                    x.cycle.display_with(size),
                    back.cycle.display_with(size),
                    x.shifted(2 * lag).cycle.display_with(size)
                ));
            }
        }
        Ok(points.len())
    };
    let source_points = check(phi, psi, "source")?;
    let target_points = check(psi, phi, "target")?;
    Ok(LagReport {
        lag,
        max_period,
        source_points,
        target_points,
        passed: first_failure.is_none(),
        first_failure,
    })
}

pub fn verify_lag_conjugacy(
    phi: &BlockMap,
    psi: &BlockMap,
    lag: usize,
    max_period: usize,
) -> Result<bool, BlockError> {
    Ok(lag_conjugacy_report(phi, psi, lag, max_period)?.passed)
}

/// `k`-block presentation: states are admissible `k`-words (lexicographic),
/// `Φ` reads `k` symbols forward, `Ψ` keeps the first symbol of a block.
#[derive(Clone, Debug)]
pub struct HigherBlock {
    pub matrix: IntMatrix,
    pub blocks: Vec<Word>,
    pub phi: BlockMap,
    pub psi: BlockMap,
}

pub fn higher_block_code(a: &IntMatrix, k: usize) -> Result<HigherBlock, BlockError> {
    if k == 0 {
        return Err(BlockError::InvalidBlockLength);
    }
    require_01(a)?;
    if !shift_spaces::analyze(a)?.essential {
        return Err(ShiftError::NotEssential.into());
    }
    if k == 1 {
        let id = BlockMap::identity(a)?;
        return Ok(HigherBlock {
            matrix: a.clone(),
            blocks: shift_spaces::words(a, 1)?,
            phi: id.clone(),
            psi: id,
        });
    }
    let blocks = shift_spaces::words(a, k)?;
    let index: BTreeMap<&[usize], usize> = blocks
        .iter()
        .enumerate()
        .map(|(i, w)| (w.symbols(), i))
        .collect();
    let matrix = IntMatrix::from_fn(blocks.len(), blocks.len(), |u, v| {
        BigInt::from(u8::from(
            blocks[u].symbols()[1..] == blocks[v].symbols()[..k - 1],
        ))
    });
    let phi = BlockMap::from_rule(0, k - 1, a.clone(), matrix.clone(), |w| index[w])?;
    let psi = BlockMap::from_rule(0, 0, matrix.clone(), a.clone(), |w| {
        blocks[w[0]].symbols()[0]
    })?;
    Ok(HigherBlock {
        matrix,
        blocks,
        phi,
        psi,
    })
}

/// File form: windows and symbols are 1-based. Matrices default to full
/// shifts on the stated alphabets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMapFile {
    pub m: usize,
    pub n: usize,
    pub source_alphabet: usize,
    pub target_alphabet: usize,
    pub table: BTreeMap<String, SymbolRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_matrix: Option<IntMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_matrix: Option<IntMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolRepr {
    Number(usize),
    Text(String),
}

fn full_shift(n: usize) -> IntMatrix {
    IntMatrix::from_fn(n, n, |_, _| BigInt::one())
}

impl BlockMapFile {
    pub fn into_block_map(self) -> Result<BlockMap, BlockError> {
        let source = self
            .source_matrix
            .unwrap_or_else(|| full_shift(self.source_alphabet));
        let target = self
            .target_matrix
            .unwrap_or_else(|| full_shift(self.target_alphabet));
        if source.rows() != self.source_alphabet || target.rows() != self.target_alphabet {
            return Err(BlockError::AlphabetMismatch(
                "matrix size differs from the stated alphabet".into(),
            ));
        }
        let mut table = BTreeMap::new();
        for (window, symbol) in self.table {
            // a length-1 window is one symbol, even past 9
            let key = if self.m + self.n == 0 {
                format!("{}.", window.trim())
            } else {
                window.clone()
            };
            let w: Word = key
                .parse()
                .map_err(|e: ShiftError| BlockError::Parse(e.to_string()))?;
            let s = match symbol {
                SymbolRepr::Number(k) => k,
                SymbolRepr::Text(t) => t.trim().parse::<usize>().map_err(|_| {
                    BlockError::Parse(format!("bad symbol {t:?} for window {window:?}"))
                })?,
            };
            if s == 0 {
                return Err(BlockError::Parse(format!(
                    "symbols are 1-based, got 0 for window {window:?}"
                )));
            }
            table.insert(w.0, s - 1);
        }
        BlockMap::new(self.m, self.n, source, target, table)
    }

    pub fn from_block_map(map: &BlockMap) -> Self {
        let size = map.source.rows();
        let is_full = |a: &IntMatrix| a.entries().iter().all(One::is_one);
        BlockMapFile {
            m: map.memory,
            n: map.anticipation,
            source_alphabet: size,
            target_alphabet: map.target.rows(),
            table: map
                .table
                .iter()
                .map(|(w, &s)| {
                    (
                        Word(w.clone()).display_with(size),
                        SymbolRepr::Number(s + 1),
                    )
                })
                .collect(),
            source_matrix: (!is_full(&map.source)).then(|| map.source.clone()),
            target_matrix: (!is_full(&map.target)).then(|| map.target.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift_spaces::{edge_graph, periodic_count};
    use proptest::prelude::*;

    fn golden() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1], &[1, 0]])
    }

    fn full2() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1], &[1, 1]])
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn xor() -> BlockMap {
        BlockMap::from_rule(0, 1, full2(), full2(), |w| w[0] ^ w[1]).unwrap()
    }

    #[test]
    fn apply_word_examples() {
        let id = BlockMap::identity(&golden()).unwrap();
        assert_eq!(id.apply_word(&w("12111")).unwrap(), w("12111"));
        let sh = BlockMap::shift(&full2()).unwrap();
        assert_eq!(sh.apply_word(&w("1221")).unwrap(), w("221"));
        assert_eq!(xor().apply_word(&w("1121")).unwrap(), w("122"));
        assert!(matches!(
            xor().apply_word(&w("1")),
            Err(BlockError::TooShort { .. })
        ));
        assert!(matches!(
            id.apply_word(&w("22")),
            Err(BlockError::Inadmissible(_))
        ));
    }

    #[test]
    fn apply_periodic_examples() {
        let p = PeriodicPoint::new(w("112"), &golden()).unwrap();
        assert_eq!(
            BlockMap::identity(&golden())
                .unwrap()
                .apply_periodic(&p)
                .unwrap(),
            p
        );
        assert_eq!(
            BlockMap::shift(&golden())
                .unwrap()
                .apply_periodic(&p)
                .unwrap(),
            p.shifted(1)
        );
        let hb = higher_block_code(&golden(), 2).unwrap();
        // edges e1: 1→1, e2: 1→2, e3: 2→1
        assert_eq!(hb.phi.apply_periodic(&p).unwrap().cycle, w("123"));
        assert!(PeriodicPoint::new(w("12"), &IntMatrix::from_i64(&[&[1, 1], &[0, 1]])).is_err());
    }

    #[test]
    fn table_validation() {
        let mut table = BTreeMap::new();
        table.insert(vec![0], 0);
        assert!(matches!(
            BlockMap::new(0, 0, full2(), full2(), table.clone()),
            Err(BlockError::Incomplete(_))
        ));
        table.insert(vec![1], 1);
        assert!(BlockMap::new(0, 0, full2(), golden(), table.clone()).is_err());
        assert!(BlockMap::new(0, 0, full2(), full2(), table).is_ok());
    }

    #[test]
    fn compose_examples() {
        let id = BlockMap::identity(&full2()).unwrap();
        let x = xor();
        let c = id.compose(&x).unwrap();
        for v in shift_spaces::words(&full2(), 6).unwrap() {
            assert_eq!(c.apply_word(&v).unwrap(), x.apply_word(&v).unwrap());
        }
        let sh = BlockMap::shift(&full2()).unwrap();
        let sh2 = sh.compose(&sh).unwrap();
        assert_eq!((sh2.memory(), sh2.anticipation()), (0, 2));
        assert_eq!(sh2.apply_word(&w("12112")).unwrap(), w("112"));
        let hb = higher_block_code(&golden(), 2).unwrap();
        let round = hb.phi.compose(&hb.psi).unwrap();
        for len in 2..=10 {
            for v in shift_spaces::words(&golden(), len).unwrap() {
                let out = round.apply_word(&v).unwrap();
                assert_eq!(out.symbols(), &v.symbols()[..len - 1]);
            }
        }
        assert!(x.compose(&hb.psi).is_err());
    }

    #[test]
    fn lag_examples() {
        for a in [golden(), full2()] {
            let id = BlockMap::identity(&a).unwrap();
            assert!(verify_lag_conjugacy(&id, &id, 0, 6).unwrap());
            let sh = BlockMap::shift(&a).unwrap();
            assert!(verify_lag_conjugacy(&sh, &sh, 1, 6).unwrap());
            assert!(!verify_lag_conjugacy(&sh, &sh, 0, 6).unwrap());
        }
        let hb = higher_block_code(&golden(), 2).unwrap();
        let r = lag_conjugacy_report(&hb.phi, &hb.psi, 0, 6).unwrap();
        assert!(r.passed);
        assert!(r.source_points > 0 && r.target_points > 0);
    }

    #[test]
    fn higher_block_examples() {
        let hb = higher_block_code(&golden(), 1).unwrap();
        assert_eq!(hb.matrix, golden());
        let hb = higher_block_code(&golden(), 2).unwrap();
        assert_eq!(hb.matrix, edge_graph(&golden()).unwrap().matrix);
        let hb = higher_block_code(&full2(), 3).unwrap();
        assert_eq!(hb.matrix.rows(), 8);
        assert!(verify_lag_conjugacy(&hb.phi, &hb.psi, 0, 6).unwrap());
        assert_eq!(
            higher_block_code(&full2(), 0).unwrap_err(),
            BlockError::InvalidBlockLength
        );
    }

    #[test]
    fn file_round_trip() {
        let hb = higher_block_code(&golden(), 2).unwrap();
        let file = BlockMapFile::from_block_map(&hb.phi);
        let text = serde_json::to_string(&file).unwrap();
        let back: BlockMapFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_block_map().unwrap(), hb.phi);

        let text = r#"{"m":0,"n":1,"source_alphabet":2,"target_alphabet":2,
            "table":{"11":"1","12":"2","21":2,"22":1}}"#;
        let f: BlockMapFile = serde_json::from_str(text).unwrap();
        assert_eq!(f.into_block_map().unwrap(), xor());

        // 16 states, so one-symbol keys reach "16"
        let hb = higher_block_code(&full2(), 4).unwrap();
        let text = serde_json::to_string(&BlockMapFile::from_block_map(&hb.psi)).unwrap();
        let back: BlockMapFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_block_map().unwrap(), hb.psi);
    }

    fn small_01() -> impl Strategy<Value = IntMatrix> {
        (1usize..=3)
            .prop_flat_map(|n| {
                proptest::collection::vec(0i64..=1, n * n)
                    .prop_map(move |v| IntMatrix::from_fn(n, n, |i, j| BigInt::from(v[i * n + j])))
            })
            .prop_filter("essential", |a| shift_spaces::analyze(a).unwrap().essential)
    }

    /// Random code from `a` into the full shift on `k` symbols.
    fn random_code(a: &IntMatrix, m: usize, n: usize, k: usize, seed: u64) -> BlockMap {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        BlockMap::from_rule(m, n, a.clone(), full_shift(k), |_| rng.gen_range(0..k)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn compose_matches_sequential(
            (a, m1, n1, m2, n2, s1, s2) in (small_01(), 0usize..2, 0usize..2, 0usize..2, 0usize..2, any::<u64>(), any::<u64>())
        ) {
            let phi = random_code(&a, m1, n1, 2, s1);
            let psi = random_code(&full_shift(2), m2, n2, 3, s2);
            let both = phi.compose(&psi).unwrap();
            for len in 4..=8 {
                for v in shift_spaces::words(&a, len).unwrap() {
                    if v.len() < both.window_len() {
                        continue;
                    }
                    prop_assert_eq!(both.apply_word(&v).unwrap(), psi.apply_word(&phi.apply_word(&v).unwrap()).unwrap());
                }
            }
        }

        #[test]
        fn periodic_commutes_with_rotation((a, m, n, seed) in (small_01(), 0usize..3, 0usize..3, any::<u64>())) {
            let phi = random_code(&a, m, n, 3, seed);
            for p in periodic_points(&a, 5).unwrap() {
                for r in 0..p.cycle.len() {
                    prop_assert_eq!(
                        phi.apply_periodic(&p.shifted(r)).unwrap(),
                        phi.apply_periodic(&p).unwrap().shifted(r)
                    );
                }
            }
        }

        #[test]
        fn recodings_are_conjugacies((a, k) in (small_01(), 1usize..=3)) {
            let hb = higher_block_code(&a, k).unwrap();
            prop_assert!(verify_lag_conjugacy(&hb.phi, &hb.psi, 0, 6).unwrap());
            for n in 1..=6 {
                prop_assert_eq!(periodic_count(&a, n).unwrap(), periodic_count(&hb.matrix, n).unwrap());
            }
        }
    }
}
