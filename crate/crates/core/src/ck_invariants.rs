//! Conjugacy invariants of a nonnegative integer matrix built from its
//! cokernels: the Bowen–Franks group, `K_0` with its unit class, the pair
//! `(coker(I-A) ⊗ coker(I-Aᵗ), e_A)`, Künneth iso types, and exact checks
//! that explicit (strong) shift equivalences carry `e_A` to `e_B`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fgab::{
    induced_hom, pair_equiv, pair_equiv_with_iso, tensor, FgAbGroup, GroupElement, GroupError,
    GroupHom, IsoType, PairComparison, PairInvariant, PairVerdict, TensorProduct,
};
use crate::intlinalg::{IntLinAlgError, IntMatrix};
use crate::shift_spaces::{self, require_square_nonnegative, ShiftError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CkError {
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    LinAlg(#[from] IntLinAlgError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("shift equivalence identities fail for the given R, S and lag")]
    SeAxiomsFail,
}

/// `coker(I - A)` and `det(I - A)`.
pub fn bowen_franks(a: &IntMatrix) -> Result<(FgAbGroup, BigInt), CkError> {
    require_square_nonnegative(a)?;
    let rel = a.identity_minus()?;
    Ok((FgAbGroup::from_cokernel(&rel), rel.det()?))
}

#[derive(Clone, Debug)]
pub struct K0 {
    pub group: FgAbGroup,
    /// Class of the all-ones vector.
    pub unit: GroupElement,
}

/// `coker(I - Aᵗ)` with the class of `1_N`.
pub fn k0(a: &IntMatrix) -> Result<K0, CkError> {
    require_square_nonnegative(a)?;
    let group = FgAbGroup::from_cokernel(&a.transpose().identity_minus()?);
    let unit = group.element(vec![BigInt::one(); a.rows()])?;
    Ok(K0 { group, unit })
}

/// The tensor product carrying `e_A`, with both factors.
#[derive(Clone, Debug)]
pub struct ETensor {
    pub product: TensorProduct,
    pub e: GroupElement,
}

pub fn e_tensor(a: &IntMatrix) -> Result<ETensor, CkError> {
    require_square_nonnegative(a)?;
    let left = FgAbGroup::from_cokernel(&a.identity_minus()?);
    let right = FgAbGroup::from_cokernel(&a.transpose().identity_minus()?);
    let product = tensor(&left, &right);
    let mut e = product.group.zero();
    for i in 0..a.rows() {
        e = e.add(&product.embed(&left.basis_class(i), &right.basis_class(i))?)?;
    }
    Ok(ETensor { product, e })
}

/// `(coker(I-A) ⊗ coker(I-Aᵗ), Σ [e_i] ⊗ [e_i])`.
pub fn e_invariant(a: &IntMatrix) -> Result<PairInvariant, CkError> {
    Ok(PairInvariant::new(e_tensor(a)?.e)?)
}

/// `[1_N] ⊗ [1_N]` in the same group as `e_A`.
pub fn unit_invariant(a: &IntMatrix) -> Result<GroupElement, CkError> {
    let t = e_tensor(a)?;
    let ones = vec![BigInt::one(); a.rows()];
    Ok(t.product.embed(
        &t.product.left.element(ones.clone())?,
        &t.product.right.element(ones)?,
    )?)
}

/// Iso types from the Künneth formula for the tensor square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KunnethTypes {
    /// `K_0 ⊗ K_0`, i.e. `Z^{n²} ⊕ ⊕_i (Z/m_i)^{2n+2k-2i+1}`.
    pub k0_tensor_part: IsoType,
    /// Full `K_0`: the tensor part plus `K_1 ⊗ K_1 = Z^{n²}`.
    pub k0: IsoType,
    /// `K_0⊗K_1 ⊕ K_1⊗K_0 ⊕ Tor(K_0, K_0)`.
    pub k1: IsoType,
}

pub fn kunneth_from_k0(g0: &IsoType) -> KunnethTypes {
    let n = g0.free_rank;
    let m = &g0.invariant_factors;
    let k = m.len();
    let zeros = |count: usize| vec![BigInt::zero(); count];

    let mut tensor_part = zeros(n * n);
    for (i, mi) in m.iter().enumerate() {
        tensor_part.extend(std::iter::repeat_n(
            mi.clone(),
            2 * n + 2 * k - 2 * (i + 1) + 1,
        ));
    }
    let mut full = tensor_part.clone();
    full.extend(zeros(n * n));

    let mut k1 = zeros(2 * n * n);
    for mi in m {
        k1.extend(std::iter::repeat_n(mi.clone(), 2 * n));
    }
    for mi in m {
        for mj in m {
            k1.push(mi.gcd(mj));
        }
    }
    KunnethTypes {
        k0_tensor_part: IsoType::from_cyclic_orders(&tensor_part),
        k0: IsoType::from_cyclic_orders(&full),
        k1: IsoType::from_cyclic_orders(&k1),
    }
}

pub fn kunneth(a: &IntMatrix) -> Result<KunnethTypes, CkError> {
    Ok(kunneth_from_k0(&k0(a)?.group.iso_type()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub bf_isomorphic: bool,
    pub det_equal: bool,
    pub k0_unit: PairComparison,
    pub e_pair: PairComparison,
    pub distinguished: bool,
    pub verdict: String,
}

pub const VERDICT_DISTINGUISHED: &str = "distinguished";
pub const VERDICT_NOT_DISTINGUISHED: &str = "not distinguished by these invariants";

pub fn compare(a: &IntMatrix, b: &IntMatrix) -> Result<Comparison, CkError> {
    let (bfa, da) = bowen_franks(a)?;
    let (bfb, db) = bowen_franks(b)?;
    let bf_isomorphic = bfa.is_isomorphic(&bfb);
    let det_equal = da == db;
    let k0_unit = pair_equiv(
        &PairInvariant::new(k0(a)?.unit)?,
        &PairInvariant::new(k0(b)?.unit)?,
    );
    let e_pair = pair_equiv(&e_invariant(a)?, &e_invariant(b)?);
    let distinguished = !bf_isomorphic
        || !det_equal
        || k0_unit.verdict == PairVerdict::Inequivalent
        || e_pair.verdict == PairVerdict::Inequivalent;
    Ok(Comparison {
        bf_isomorphic,
        det_equal,
        k0_unit,
        e_pair,
        distinguished,
        verdict: if distinguished {
            VERDICT_DISTINGUISHED
        } else {
            VERDICT_NOT_DISTINGUISHED
        }
        .into(),
    })
}

/// Outcome of pushing `e_A` through an explicit equivalence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    /// The integer identity expressing the image of `e_A` minus `e_B` as a relation.
    pub identity_holds: bool,
    pub well_defined: bool,
    pub isomorphism: bool,
    pub e_maps_to_e: bool,
    pub passed: bool,
}

fn basis(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

fn kron_vec(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    x.iter()
        .flat_map(|a| y.iter().map(move |b| a * b))
        .collect()
}

fn add_into(acc: &mut [BigInt], v: &[BigInt], sign: i8) {
    for (a, b) in acc.iter_mut().zip(v) {
        if sign >= 0 {
            *a += b;
        } else {
            *a -= b;
        }
    }
}

/// Checks `Σ_i X e_i ⊗ Yᵗ e_i - Σ_j f_j ⊗ f_j = Σ_j Q f_j ⊗ f_j` in `Z^{M·M}`
/// and that `m_X ⊗ m_Yᵗ` is an isomorphism carrying `e_A` to `e_B`.
fn witness(
    x: &IntMatrix,
    y_t: &IntMatrix,
    q: &IntMatrix,
    a: &IntMatrix,
    b: &IntMatrix,
) -> Result<WitnessRecord, CkError> {
    let (n, m) = (a.rows(), b.rows());
    let mut lhs = vec![BigInt::zero(); m * m];
    for i in 0..n {
        let ei = basis(n, i);
        add_into(&mut lhs, &kron_vec(&x.mul_vec(&ei)?, &y_t.mul_vec(&ei)?), 1);
    }
    let mut rhs = vec![BigInt::zero(); m * m];
    for j in 0..m {
        let fj = basis(m, j);
        add_into(&mut lhs, &kron_vec(&fj, &fj), -1);
        add_into(&mut rhs, &kron_vec(&q.mul_vec(&fj)?, &fj), 1);
    }
    let identity_holds = lhs == rhs;

    let ta = e_tensor(a)?;
    let tb = e_tensor(b)?;
    let left = induced_hom(x, &ta.product.left, &tb.product.left)?;
    let right = induced_hom(y_t, &ta.product.right, &tb.product.right)?;
    let hom = GroupHom::tensor(&left, &right);
    let well_defined = hom.well_defined;
    let isomorphism = hom.is_isomorphism();
    let e_maps_to_e = well_defined && hom.apply(&ta.e)?.equals(&tb.e)?;
    Ok(WitnessRecord {
        identity_holds,
        well_defined,
        isomorphism,
        e_maps_to_e,
        passed: identity_holds && isomorphism && e_maps_to_e,
    })
}

/// For `A = C D`, `B = D C`: `(m_D ⊗ m_Cᵗ)(e_A) = e_B`.
pub fn sse_witness_action(c: &IntMatrix, d: &IntMatrix) -> Result<WitnessRecord, CkError> {
    if c.rows() != d.cols() || c.cols() != d.rows() {
        return Err(CkError::Shape(format!(
            "C is {}x{}, D is {}x{}",
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols()
        )));
    }
    for (name, m) in [("C", c), ("D", d)] {
        if !m.is_nonnegative() {
            return Err(CkError::Shape(format!("{name} has a negative entry")));
        }
    }
    let a = c.mul(d)?;
    let b = d.mul(c)?;
    let q = b.sub(&IntMatrix::identity(b.rows()))?;
    witness(d, &c.transpose(), &q, &a, &b)
}

/// For a shift equivalence of lag `ℓ`: `(m_S ⊗ m_Rᵗ)(e_A) = e_B`.
pub fn se_witness_action(
    r: &IntMatrix,
    s: &IntMatrix,
    ell: u32,
    a: &IntMatrix,
    b: &IntMatrix,
) -> Result<WitnessRecord, CkError> {
    if !shift_spaces::verify_se(a, b, r, s, ell)? {
        return Err(CkError::SeAxiomsFail);
    }
    let m = b.rows();
    let id = IntMatrix::identity(m);
    // B^ℓ - I = (B - I)(B^{ℓ-1} + … + I)
    let mut geometric = IntMatrix::zeros(m, m);
    let mut power = id.clone();
    for _ in 0..ell {
        geometric = geometric.add(&power)?;
        power = power.mul(b)?;
    }
    let q = b.sub(&id)?.mul(&geometric)?;
    witness(s, &r.transpose(), &q, a, b)
}

/// Pair comparison for `A = C D`, `B = D C`, certified by `m_D ⊗ m_Cᵗ`.
#[derive(Clone, Debug)]
pub struct WitnessedComparison {
    pub a: IntMatrix,
    pub b: IntMatrix,
    pub record: WitnessRecord,
    pub comparison: PairComparison,
}

pub fn e_pair_with_witness(c: &IntMatrix, d: &IntMatrix) -> Result<WitnessedComparison, CkError> {
    let record = sse_witness_action(c, d)?;
    let a = c.mul(d)?;
    let b = d.mul(c)?;
    let (ta, tb) = (e_tensor(&a)?, e_tensor(&b)?);
    let hom = GroupHom::tensor(
        &induced_hom(d, &ta.product.left, &tb.product.left)?,
        &induced_hom(&c.transpose(), &ta.product.right, &tb.product.right)?,
    );
    let comparison =
        pair_equiv_with_iso(&PairInvariant::new(ta.e)?, &PairInvariant::new(tb.e)?, &hom)?;
    Ok(WitnessedComparison {
        a,
        b,
        record,
        comparison,
    })
}

/// Everything computed for a single matrix.
#[derive(Clone, Debug)]
pub struct InvariantReport {
    pub spec: shift_spaces::MarkovShiftSpec,
    pub bf_group: FgAbGroup,
    pub det_id_minus_a: BigInt,
    pub k0: K0,
    pub e_pair: PairInvariant,
    pub unit_pair: PairInvariant,
    pub e_vs_unit: PairComparison,
    pub kunneth: KunnethTypes,
}

pub fn invariant_report(a: &IntMatrix) -> Result<InvariantReport, CkError> {
    let spec = shift_spaces::analyze(a)?;
    let (bf_group, det_id_minus_a) = bowen_franks(a)?;
    let k0 = k0(a)?;
    let e_pair = e_invariant(a)?;
    let unit_pair = PairInvariant::new(unit_invariant(a)?)?;
    let e_vs_unit = pair_equiv(&e_pair, &unit_pair);
    let kunneth = kunneth_from_k0(&k0.group.iso_type());
    Ok(InvariantReport {
        spec,
        bf_group,
        det_id_minus_a,
        k0,
        e_pair,
        unit_pair,
        e_vs_unit,
        kunneth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgab::oracle::in_aut_orbit;
    use crate::intlinalg::to_bigints;
    use crate::shift_spaces::{edge_graph, random_sse_chain};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn ones3() -> IntMatrix {
        m(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]])
    }

    fn b3() -> IntMatrix {
        m(&[&[1, 1, 1], &[1, 1, 0], &[1, 1, 0]])
    }

    fn a41() -> IntMatrix {
        m(&[&[4, 1], &[1, 0]])
    }

    fn golden() -> IntMatrix {
        m(&[&[1, 1], &[1, 0]])
    }

    fn full2() -> IntMatrix {
        m(&[&[1, 1], &[1, 1]])
    }

    fn iso(factors: &[i64], free: usize) -> IsoType {
        IsoType {
            invariant_factors: to_bigints(factors),
            free_rank: free,
        }
    }

    #[test]
    fn bowen_franks_examples() {
        let (g, d) = bowen_franks(&ones3()).unwrap();
        assert_eq!((g.iso_type(), d), (iso(&[2], 0), BigInt::from(-2)));
        let (g, d) = bowen_franks(&b3()).unwrap();
        assert_eq!((g.iso_type(), d), (iso(&[2], 0), BigInt::from(-2)));
        let (g, d) = bowen_franks(&golden()).unwrap();
        assert!(g.is_trivial());
        assert_eq!(d, BigInt::from(-1));
        assert!(bowen_franks(&IntMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn k0_examples() {
        let k = k0(&a41()).unwrap();
        assert_eq!(k.group.iso_type(), iso(&[4], 0));
        assert_eq!(k.unit.order(), Some(BigInt::from(2)));
        let k = k0(&ones3()).unwrap();
        assert_eq!(k.group.iso_type(), iso(&[2], 0));
        assert_eq!(k.unit.order(), Some(BigInt::from(2)));
        let k = k0(&full2()).unwrap();
        assert!(k.group.is_trivial() && k.unit.is_zero());
    }

    #[test]
    fn e_invariant_examples() {
        let p = e_invariant(&ones3()).unwrap();
        assert_eq!(p.group.iso_type(), iso(&[2], 0));
        assert_eq!(p.summary.element_order, Some(BigInt::from(2)));
        assert_eq!(p.to_string(), "(Z/2,[1])");
        let q = e_invariant(&b3()).unwrap();
        assert_eq!(q.group.iso_type(), iso(&[2], 0));
        assert!(q.element.is_zero());
        assert_eq!(q.to_string(), "(Z/2,[0])");
        assert_eq!(pair_equiv(&p, &q).verdict, PairVerdict::Inequivalent);
        let r = e_invariant(&a41()).unwrap();
        assert_eq!(r.group.iso_type(), iso(&[4], 0));
        assert_eq!(r.summary.element_order, Some(BigInt::from(2)));
    }

    #[test]
    fn unit_invariant_examples() {
        assert!(unit_invariant(&a41()).unwrap().is_zero());
        assert!(unit_invariant(&full2()).unwrap().is_zero());
        let u = unit_invariant(&ones3()).unwrap();
        assert_eq!(u.order(), Some(BigInt::from(2)));
        let e = e_invariant(&a41()).unwrap();
        let unit = PairInvariant::new(unit_invariant(&a41()).unwrap()).unwrap();
        assert_eq!(pair_equiv(&e, &unit).verdict, PairVerdict::Inequivalent);
    }

    #[test]
    fn compare_examples() {
        let c = compare(&ones3(), &b3()).unwrap();
        assert!(c.bf_isomorphic && c.det_equal);
        assert_eq!(c.e_pair.verdict, PairVerdict::Inequivalent);
        assert_eq!(c.verdict, VERDICT_DISTINGUISHED);
        let c = compare(&ones3(), &ones3()).unwrap();
        assert_eq!(c.verdict, VERDICT_NOT_DISTINGUISHED);
        let c = compare(&full2(), &golden()).unwrap();
        assert!(!c.distinguished);
    }

    #[test]
    fn kunneth_examples() {
        let k = kunneth_from_k0(&iso(&[2], 0));
        assert_eq!(k.k0_tensor_part, iso(&[2], 0));
        assert_eq!(k.k1, iso(&[2], 0));
        let k = kunneth_from_k0(&iso(&[], 0));
        assert!(k.k0.is_trivial() && k.k1.is_trivial());
        let k = kunneth_from_k0(&iso(&[], 1));
        assert_eq!(k.k0_tensor_part, iso(&[], 1));
        assert_eq!(k.k0, iso(&[], 2));
        assert_eq!(k.k1, iso(&[], 2));
    }

    #[test]
    fn kunneth_matches_tensor_square() {
        for a in [
            ones3(),
            b3(),
            a41(),
            golden(),
            m(&[&[2, 1, 0], &[1, 3, 2], &[0, 2, 3]]),
            IntMatrix::identity(2),
        ] {
            let t = e_tensor(&a).unwrap();
            let k = kunneth(&a).unwrap();
            assert_eq!(t.product.group.iso_type(), k.k0_tensor_part, "{a}");
        }
    }

    #[test]
    fn sse_witness_examples() {
        let rec = sse_witness_action(&a41(), &IntMatrix::identity(2)).unwrap();
        assert!(rec.passed);
        let g = edge_graph(&golden()).unwrap();
        assert!(sse_witness_action(&g.r, &g.s).unwrap().passed);
        let c = m(&[&[1, 0], &[2, 1], &[0, 3]]);
        let d = m(&[&[1, 1, 0], &[0, 2, 1]]);
        assert!(sse_witness_action(&c, &d).unwrap().identity_holds);
        assert!(sse_witness_action(&c, &c).is_err());
    }

    #[test]
    fn se_witness_examples() {
        let a = golden();
        assert!(se_witness_action(&a, &a, 2, &a, &a).unwrap().passed);
        let g = edge_graph(&a).unwrap();
        assert!(
            se_witness_action(&g.r, &g.s, 1, &a, &g.matrix)
                .unwrap()
                .passed
        );
        let mut bad = g.s.clone();
        bad.set(0, 1, BigInt::from(1));
        assert_eq!(
            se_witness_action(&g.r, &bad, 1, &a, &g.matrix),
            Err(CkError::SeAxiomsFail)
        );
    }

    #[test]
    fn negative_control_flow_invariants_tie() {
        let (ga, da) = bowen_franks(&ones3()).unwrap();
        let (gb, db) = bowen_franks(&b3()).unwrap();
        assert!(ga.is_isomorphic(&gb) && da == db);
        let (p, q) = (e_invariant(&ones3()).unwrap(), e_invariant(&b3()).unwrap());
        assert!(!in_aut_orbit(
            &p.element,
            &p.group.from_coordinates(&q.element.coordinates()),
            256
        )
        .unwrap());
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=3).prop_flat_map(|n| {
            proptest::collection::vec(0i64..=2, n * n)
                .prop_map(move |v| IntMatrix::from_fn(n, n, |i, j| BigInt::from(v[i * n + j])))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn chains_preserve_e_pair((a, steps, seed) in (small_matrix(), 1usize..4, any::<u64>())) {
            prop_assume!(shift_spaces::analyze(&a).unwrap().essential);
            let chain = random_sse_chain(&a, steps, seed).unwrap();
            let v = pair_equiv(&e_invariant(chain.start()).unwrap(), &e_invariant(chain.end()).unwrap());
            prop_assert_ne!(v.verdict, PairVerdict::Inequivalent);
            let mixed = {
                let g = e_invariant(chain.start()).unwrap().group;
                g.free_rank() > 0 && !g.invariant_factors().is_empty()
            };
            if !mixed {
                prop_assert_eq!(v.verdict, PairVerdict::Equivalent);
            }
            for (k, st) in chain.steps.iter().enumerate() {
                prop_assert!(sse_witness_action(&st.r, &st.s).unwrap().passed);
                let (c, d) = (&chain.matrices[k], &chain.matrices[k + 1]);
                let step = e_pair_with_witness(&st.r, &st.s).unwrap();
                prop_assert_eq!(step.comparison.verdict, PairVerdict::Equivalent);
                prop_assert_eq!(&step.a, c);
                prop_assert_eq!(&step.b, d);
            }
        }

        #[test]
        fn bf_order_is_abs_det(a in small_matrix()) {
            let (g, d) = bowen_franks(&a).unwrap();
            if !d.is_zero() {
                prop_assert_eq!(g.order(), Some(d.magnitude().clone().into()));
            } else {
                prop_assert!(!g.is_finite());
            }
        }

        #[test]
        fn compare_reflexive_and_symmetric((a, b) in (small_matrix(), small_matrix())) {
            prop_assert!(!compare(&a, &a).unwrap().distinguished);
            prop_assert_eq!(compare(&a, &b).unwrap().distinguished, compare(&b, &a).unwrap().distinguished);
        }
    }
}
