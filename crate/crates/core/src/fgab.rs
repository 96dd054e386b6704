//! Finitely generated abelian groups given as cokernels.
//!
//! A group is stored as a quotient `Z^N / L` together with a unimodular change
//! of coordinates `U` that diagonalises the relations: `v ∈ L` exactly when
//! `(U v)_i ≡ 0 (mod m_i)` for every coordinate, where `m_i = 0` marks a free
//! coordinate and `m_i = 1` a coordinate that is always zero. Element equality
//! is this lattice-membership test, so it does not depend on which transform
//! the Smith form happened to produce.
//!
//! Tensor products keep the Kronecker structure of the coordinate change, so
//! the ambient rank can be `N·M` without ever materialising an `NM × NM`
//! transform.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlinalg::{self, kernel, snf, IntLinAlgError, IntMatrix, Lattice, SmithForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error(transparent)]
    LinAlg(#[from] IntLinAlgError),
    #[error("elements belong to different groups")]
    GroupMismatch,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("element has infinite order")]
    NotTorsion,
    #[error("group is infinite")]
    NotFinite,
    #[error("group of order {size} exceeds the enumeration bound {bound}")]
    BoundExceeded { size: BigInt, bound: usize },
    #[error("modulus {0} is too large to factor")]
    TooLargeToFactor(BigInt),
}

/// Unimodular coordinate change, possibly a Kronecker product of smaller ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coords {
    Dense { u: IntMatrix, u_inv: IntMatrix },
    Kron(Box<Coords>, Box<Coords>),
}

impl Coords {
    pub fn dim(&self) -> usize {
        match self {
            Coords::Dense { u, .. } => u.rows(),
            Coords::Kron(l, r) => l.dim() * r.dim(),
        }
    }

    pub fn to_coords(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.apply(v, false)
    }

    pub fn from_coords(&self, y: &[BigInt]) -> Vec<BigInt> {
        self.apply(y, true)
    }

    fn apply(&self, v: &[BigInt], inverse: bool) -> Vec<BigInt> {
        match self {
            Coords::Dense { u, u_inv } => {
                let m = if inverse { u_inv } else { u };
                m.mul_vec(v).expect("coordinate dimension")
            }
            Coords::Kron(l, r) => kron_apply(
                v,
                l.dim(),
                r.dim(),
                |x| l.apply(x, inverse),
                |x| r.apply(x, inverse),
            ),
        }
    }
}

/// Applies `left ⊗ right` to `vec(X)` where `X` is `a × b`, index `i*b + j`.
fn kron_apply(
    v: &[BigInt],
    a: usize,
    b: usize,
    left: impl Fn(&[BigInt]) -> Vec<BigInt>,
    right: impl Fn(&[BigInt]) -> Vec<BigInt>,
) -> Vec<BigInt> {
    debug_assert_eq!(v.len(), a * b);
    let cols: Vec<Vec<BigInt>> = (0..b)
        .map(|j| left(&(0..a).map(|i| v[i * b + j].clone()).collect::<Vec<_>>()))
        .collect();
    let a2 = cols
        .first()
        .map_or_else(|| left(&vec![BigInt::zero(); a]).len(), Vec::len);
    let mut out = Vec::new();
    for i in 0..a2 {
        let row: Vec<BigInt> = cols.iter().map(|c| c[i].clone()).collect();
        out.extend(right(&row));
    }
    out
}

#[derive(Debug)]
enum Presentation {
    Cokernel(IntMatrix),
    Tensor(FgAbGroup, FgAbGroup),
}

#[derive(Debug)]
struct GroupInner {
    ambient: usize,
    coords: Coords,
    moduli: Vec<BigInt>,
    invariant_factors: Vec<BigInt>,
    free_rank: usize,
    presentation: Presentation,
    smith: Option<SmithForm>,
    relations: OnceLock<Lattice>,
}

/// `Z^N` modulo a relation lattice. Cheap to clone.
#[derive(Clone, Debug)]
pub struct FgAbGroup(Arc<GroupInner>);

impl PartialEq for FgAbGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ambient == other.0.ambient
                && self.0.moduli == other.0.moduli
                && self.0.coords == other.0.coords)
    }
}

impl Eq for FgAbGroup {}

/// Isomorphism type: `Z^free_rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k` with `1 < d_1 | d_2 | ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsoType {
    #[serde(with = "intlinalg::bigint_vec")]
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl IsoType {
    /// Normalises an arbitrary list of cyclic orders (`0` meaning `Z`).
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        let free_rank = orders.iter().filter(|m| m.is_zero()).count();
        let finite: Vec<BigInt> = orders.iter().filter(|m| !m.is_zero()).cloned().collect();
        IsoType {
            invariant_factors: invariant_factor_chain(finite),
            free_rank,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        self.is_finite()
            .then(|| self.invariant_factors.iter().product())
    }
}

impl fmt::Display for IsoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        parts.extend(self.invariant_factors.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Turns a list of positive cyclic orders into a divisor chain, dropping 1s.
fn invariant_factor_chain(mut orders: Vec<BigInt>) -> Vec<BigInt> {
    let n = orders.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = orders[i].gcd(&orders[j]);
            let l = orders[i].lcm(&orders[j]);
            orders[i] = g;
            orders[j] = l;
        }
    }
    orders.retain(|d| !d.is_one());
    orders
}

impl FgAbGroup {
    /// `Z^N / rel·Z^k` for an `N × k` relation matrix.
    pub fn from_cokernel(rel: &IntMatrix) -> Self {
        let n = rel.rows();
        let smith = snf(rel);
        let moduli: Vec<BigInt> = (0..n)
            .map(|i| smith.divisors.get(i).cloned().unwrap_or_else(BigInt::zero))
            .collect();
        let coords = Coords::Dense {
            u: smith.u.clone(),
            u_inv: smith.u_inv.clone(),
        };
        Self::assemble(
            n,
            coords,
            moduli,
            Presentation::Cokernel(rel.clone()),
            Some(smith),
        )
    }

    /// Free group `Z^n`.
    pub fn free(n: usize) -> Self {
        Self::from_cokernel(&IntMatrix::zeros(n, 0))
    }

    /// `Z/m`.
    pub fn cyclic(m: impl Into<BigInt>) -> Self {
        Self::from_cokernel(&IntMatrix::from_rows(&[vec![m.into()]]).expect("1x1"))
    }

    fn assemble(
        ambient: usize,
        coords: Coords,
        moduli: Vec<BigInt>,
        presentation: Presentation,
        smith: Option<SmithForm>,
    ) -> Self {
        let iso = IsoType::from_cyclic_orders(
            &moduli
                .iter()
                .filter(|m| !m.is_one())
                .cloned()
                .collect::<Vec<_>>(),
        );
        FgAbGroup(Arc::new(GroupInner {
            ambient,
            coords,
            moduli,
            invariant_factors: iso.invariant_factors,
            free_rank: iso.free_rank,
            presentation,
            smith,
            relations: OnceLock::new(),
        }))
    }

    pub fn ambient_rank(&self) -> usize {
        self.0.ambient
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.0.invariant_factors
    }

    pub fn free_rank(&self) -> usize {
        self.0.free_rank
    }

    pub fn iso_type(&self) -> IsoType {
        IsoType {
            invariant_factors: self.0.invariant_factors.clone(),
            free_rank: self.0.free_rank,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.iso_type().is_trivial()
    }

    pub fn order(&self) -> Option<BigInt> {
        self.iso_type().order()
    }

    pub fn is_isomorphic(&self, other: &FgAbGroup) -> bool {
        self.iso_type() == other.iso_type()
    }

    pub fn coords(&self) -> &Coords {
        &self.0.coords
    }

    /// Diagonal moduli in the group's own coordinates (`0` = free, `1` = trivial).
    pub fn moduli(&self) -> &[BigInt] {
        &self.0.moduli
    }

    /// Smith form of the relation matrix, for cokernel presentations.
    pub fn smith_form(&self) -> Option<&SmithForm> {
        self.0.smith.as_ref()
    }

    /// Explicit relation generators as columns of an `N × k` matrix.
    pub fn relation_matrix(&self) -> IntMatrix {
        match &self.0.presentation {
            Presentation::Cokernel(rel) => rel.clone(),
            Presentation::Tensor(g, h) => {
                let left = g
                    .relation_matrix()
                    .kron(&IntMatrix::identity(h.ambient_rank()));
                let right = IntMatrix::identity(g.ambient_rank()).kron(&h.relation_matrix());
                left.hconcat(&right).expect("same ambient")
            }
        }
    }

    /// Relation lattice in canonical Hermite form; computed on first use.
    pub fn relations(&self) -> &Lattice {
        self.0
            .relations
            .get_or_init(|| Lattice::from_generators(&self.relation_matrix()))
    }

    pub fn element(&self, vector: Vec<BigInt>) -> Result<GroupElement, GroupError> {
        if vector.len() != self.ambient_rank() {
            return Err(IntLinAlgError::DimensionMismatch {
                op: "element",
                expected: self.ambient_rank().to_string(),
                found: vector.len().to_string(),
            }
            .into());
        }
        Ok(GroupElement {
            group: self.clone(),
            vector,
        })
    }

    pub fn element_i64(&self, vector: &[i64]) -> Result<GroupElement, GroupError> {
        self.element(intlinalg::to_bigints(vector))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            group: self.clone(),
            vector: vec![BigInt::zero(); self.ambient_rank()],
        }
    }

    /// Class of the `i`-th standard basis vector.
    pub fn basis_class(&self, i: usize) -> GroupElement {
        let mut v = vec![BigInt::zero(); self.ambient_rank()];
        v[i] = BigInt::one();
        GroupElement {
            group: self.clone(),
            vector: v,
        }
    }

    /// Element with the given coordinates in the diagonal decomposition.
    pub fn from_coordinates(&self, y: &[BigInt]) -> GroupElement {
        GroupElement {
            group: self.clone(),
            vector: self.0.coords.from_coords(y),
        }
    }

    fn nontrivial_indices(&self) -> Vec<usize> {
        (0..self.0.moduli.len())
            .filter(|&i| !self.0.moduli[i].is_one())
            .collect()
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.iso_type())
    }
}

/// Class of an ambient vector. Equality is relation-lattice membership.
#[derive(Clone, Debug)]
pub struct GroupElement {
    group: FgAbGroup,
    vector: Vec<BigInt>,
}

fn reduce_mod(x: &BigInt, m: &BigInt) -> BigInt {
    if m.is_zero() {
        x.clone()
    } else {
        x.mod_floor(m)
    }
}

impl GroupElement {
    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn vector(&self) -> &[BigInt] {
        &self.vector
    }

    /// Coordinates in the diagonal decomposition, reduced into `[0, m_i)`.
    pub fn coordinates(&self) -> Vec<BigInt> {
        self.group
            .0
            .coords
            .to_coords(&self.vector)
            .iter()
            .zip(&self.group.0.moduli)
            .map(|(y, m)| reduce_mod(y, m))
            .collect()
    }

    /// Reduced coordinates on the nontrivial cyclic summands only.
    pub fn canonical_coordinates(&self) -> Vec<BigInt> {
        let c = self.coordinates();
        self.group
            .nontrivial_indices()
            .into_iter()
            .map(|i| c[i].clone())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coordinates().iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &GroupElement) -> Result<(), GroupError> {
        if self.group == other.group {
            Ok(())
        } else {
            Err(GroupError::GroupMismatch)
        }
    }

    pub fn add(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_same(other)?;
        Ok(GroupElement {
            group: self.group.clone(),
            vector: self
                .vector
                .iter()
                .zip(&other.vector)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &BigInt) -> GroupElement {
        GroupElement {
            group: self.group.clone(),
            vector: self.vector.iter().map(|a| a * k).collect(),
        }
    }

    /// Equality in the quotient: `self - other` lies in the relation lattice.
    pub fn equals(&self, other: &GroupElement) -> Result<bool, GroupError> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Least `n >= 1` with `n·g = 0`; `None` for infinite order.
    pub fn order(&self) -> Option<BigInt> {
        let mut ord = BigInt::one();
        for (y, m) in self.coordinates().iter().zip(&self.group.0.moduli) {
            if m.is_zero() {
                if !y.is_zero() {
                    return None;
                }
            } else {
                ord = ord.lcm(&(m / y.gcd(m)));
            }
        }
        Some(ord)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self
            .canonical_coordinates()
            .iter()
            .map(ToString::to_string)
            .collect();
        write!(f, "[{}]", c.join(","))
    }
}

/// `G ⊗ H` on ambient `Z^{N·M}` with the Kronecker embedding of element pairs.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    pub group: FgAbGroup,
    pub left: FgAbGroup,
    pub right: FgAbGroup,
}

impl TensorProduct {
    /// Class of `v ⊗ w`.
    pub fn embed(&self, v: &GroupElement, w: &GroupElement) -> Result<GroupElement, GroupError> {
        if v.group != self.left || w.group != self.right {
            return Err(GroupError::GroupMismatch);
        }
        let vector = v
            .vector
            .iter()
            .flat_map(|a| w.vector.iter().map(move |b| a * b))
            .collect();
        Ok(GroupElement {
            group: self.group.clone(),
            vector,
        })
    }
}

/// Tensor product; relations `{r ⊗ e_j} ∪ {e_i ⊗ s}`.
pub fn tensor(g: &FgAbGroup, h: &FgAbGroup) -> TensorProduct {
    let moduli = g
        .moduli()
        .iter()
        .flat_map(|a| h.moduli().iter().map(move |b| a.gcd(b)))
        .collect();
    let coords = Coords::Kron(Box::new(g.coords().clone()), Box::new(h.coords().clone()));
    let group = FgAbGroup::assemble(
        g.ambient_rank() * h.ambient_rank(),
        coords,
        moduli,
        Presentation::Tensor(g.clone(), h.clone()),
        None,
    );
    TensorProduct {
        group,
        left: g.clone(),
        right: h.clone(),
    }
}

/// Linear map between ambient lattices, possibly a Kronecker product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearMap {
    Dense(IntMatrix),
    Kron(Box<LinearMap>, Box<LinearMap>),
}

impl LinearMap {
    pub fn rows(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.rows(),
            LinearMap::Kron(l, r) => l.rows() * r.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.cols(),
            LinearMap::Kron(l, r) => l.cols() * r.cols(),
        }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        match self {
            LinearMap::Dense(m) => m.mul_vec(v).expect("map dimension"),
            LinearMap::Kron(l, r) => {
                kron_apply(v, l.cols(), r.cols(), |x| l.apply(x), |x| r.apply(x))
            }
        }
    }

    pub fn to_dense(&self) -> IntMatrix {
        match self {
            LinearMap::Dense(m) => m.clone(),
            LinearMap::Kron(l, r) => l.to_dense().kron(&r.to_dense()),
        }
    }
}

enum CoordMatrix {
    Dense(IntMatrix),
    Kron(Box<CoordMatrix>, Box<CoordMatrix>),
}

impl CoordMatrix {
    fn rows(&self) -> usize {
        match self {
            CoordMatrix::Dense(m) => m.rows(),
            CoordMatrix::Kron(l, r) => l.rows() * r.rows(),
        }
    }

    fn cols(&self) -> usize {
        match self {
            CoordMatrix::Dense(m) => m.cols(),
            CoordMatrix::Kron(l, r) => l.cols() * r.cols(),
        }
    }

    fn entry(&self, i: usize, j: usize) -> BigInt {
        match self {
            CoordMatrix::Dense(m) => m.get(i, j).clone(),
            CoordMatrix::Kron(l, r) => {
                let a = l.entry(i / r.rows(), j / r.cols());
                if a.is_zero() {
                    a
                } else {
                    a * r.entry(i % r.rows(), j % r.cols())
                }
            }
        }
    }
}

/// Matrix of `map` between the diagonal coordinates of `src` and `dst`.
fn coordinate_matrix(src: &Coords, map: &LinearMap, dst: &Coords) -> CoordMatrix {
    match (src, map, dst) {
        (Coords::Kron(sl, sr), LinearMap::Kron(ml, mr), Coords::Kron(dl, dr))
            if ml.cols() == sl.dim()
                && ml.rows() == dl.dim()
                && mr.cols() == sr.dim()
                && mr.rows() == dr.dim() =>
        {
            CoordMatrix::Kron(
                Box::new(coordinate_matrix(sl, ml, dl)),
                Box::new(coordinate_matrix(sr, mr, dr)),
            )
        }
        (Coords::Dense { u_inv, .. }, LinearMap::Dense(s), Coords::Dense { u, .. }) => {
            CoordMatrix::Dense(
                u.mul(s)
                    .and_then(|x| x.mul(u_inv))
                    .expect("dimensions checked"),
            )
        }
        _ => {
            let n = src.dim();
            let columns: Vec<Vec<BigInt>> = (0..n)
                .map(|i| {
                    let mut e = vec![BigInt::zero(); n];
                    e[i] = BigInt::one();
                    dst.to_coords(&map.apply(&src.from_coords(&e)))
                })
                .collect();
            CoordMatrix::Dense(IntMatrix::from_columns(dst.dim(), &columns))
        }
    }
}

/// Homomorphism induced by an ambient integer matrix.
#[derive(Clone, Debug)]
pub struct GroupHom {
    pub map: LinearMap,
    pub domain: FgAbGroup,
    pub codomain: FgAbGroup,
    pub well_defined: bool,
    pub injective: bool,
    pub surjective: bool,
}

impl GroupHom {
    pub fn is_isomorphism(&self) -> bool {
        self.well_defined && self.injective && self.surjective
    }

    pub fn apply(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        if g.group != self.domain {
            return Err(GroupError::GroupMismatch);
        }
        Ok(GroupElement {
            group: self.codomain.clone(),
            vector: self.map.apply(&g.vector),
        })
    }

    /// `f ⊗ g` between the tensor products of domains and codomains.
    pub fn tensor(f: &GroupHom, g: &GroupHom) -> GroupHom {
        let domain = tensor(&f.domain, &g.domain).group;
        let codomain = tensor(&f.codomain, &g.codomain).group;
        let map = LinearMap::Kron(Box::new(f.map.clone()), Box::new(g.map.clone()));
        build_hom(map, domain, codomain)
    }
}

/// Homomorphism `G → H` induced by left multiplication with `s`.
pub fn induced_hom(s: &IntMatrix, g: &FgAbGroup, h: &FgAbGroup) -> Result<GroupHom, GroupError> {
    if s.cols() != g.ambient_rank() || s.rows() != h.ambient_rank() {
        return Err(IntLinAlgError::DimensionMismatch {
            op: "induced_hom",
            expected: format!("{}x{}", h.ambient_rank(), g.ambient_rank()),
            found: format!("{}x{}", s.rows(), s.cols()),
        }
        .into());
    }
    Ok(build_hom(LinearMap::Dense(s.clone()), g.clone(), h.clone()))
}

fn build_hom(map: LinearMap, domain: FgAbGroup, codomain: FgAbGroup) -> GroupHom {
    let phi = coordinate_matrix(domain.coords(), &map, codomain.coords());
    debug_assert_eq!(phi.rows(), codomain.ambient_rank());
    debug_assert_eq!(phi.cols(), domain.ambient_rank());
    let src_mod = domain.moduli();
    let dst_mod = codomain.moduli();
    let src_idx = domain.nontrivial_indices();
    let dst_idx = codomain.nontrivial_indices();

    // Each relation m_i·c_i of the domain must land on a relation of the codomain.
    let well_defined = dst_idx.iter().all(|&j| {
        (0..phi.cols()).all(|i| {
            if src_mod[i].is_zero() {
                return true;
            }
            let x = phi.entry(j, i) * &src_mod[i];
            reduce_mod(&x, &dst_mod[j]).is_zero()
        })
    });

    let k = src_idx.len();
    let l = dst_idx.len();
    let reduced = IntMatrix::from_fn(l, k, |r, c| phi.entry(dst_idx[r], src_idx[c]));
    let target_rel = IntMatrix::diagonal(
        &dst_idx
            .iter()
            .map(|&j| dst_mod[j].clone())
            .collect::<Vec<_>>(),
    );
    let block = reduced.hconcat(&target_rel).expect("same rows");

    let surjective = l == 0 || snf(&block).divisors.iter().filter(|d| d.is_one()).count() == l;
    let injective = well_defined && {
        let ker = kernel(&block);
        let preimage = ker.basis().select_rows(0..k);
        let source_rel = IntMatrix::diagonal(
            &src_idx
                .iter()
                .map(|&i| src_mod[i].clone())
                .collect::<Vec<_>>(),
        );
        intlinalg::lattice_equal(
            &Lattice::from_generators(&preimage),
            &Lattice::from_generators(&source_rel),
        )
        .expect("same ambient")
    };

    GroupHom {
        map,
        domain,
        codomain,
        well_defined,
        injective,
        surjective,
    }
}

// ---------------------------------------------------------------------------
// Small-integer arithmetic for the p-primary parts.

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(n: &BigInt) -> Result<Vec<u64>, GroupError> {
    let mut m = n
        .abs()
        .to_u64()
        .ok_or_else(|| GroupError::TooLargeToFactor(n.clone()))?;
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    Ok(out)
}

fn valuation(x: &BigInt, p: &BigInt) -> u32 {
    let mut x = x.clone();
    let mut k = 0;
    while !x.is_zero() && x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    k
}

/// p-heights of `g, p·g, p²·g, …` until the element vanishes.
pub fn height_sequence(g: &GroupElement, p: u64) -> Result<Vec<u32>, GroupError> {
    if !is_prime(p) {
        return Err(GroupError::NotPrime(p));
    }
    if g.order().is_none() {
        return Err(GroupError::NotTorsion);
    }
    let pb = BigInt::from(p);
    let coords = g.coordinates();
    // p-primary projection of each finite cyclic summand Z/m -> Z/p^a.
    let mut parts: Vec<(BigInt, BigInt)> = Vec::new();
    for (y, m) in coords.iter().zip(g.group.moduli()) {
        if m.is_zero() || m.is_one() {
            continue;
        }
        let a = valuation(m, &pb);
        if a == 0 {
            continue;
        }
        let pa = pb.pow(a);
        parts.push((y.mod_floor(&pa), pa));
    }
    let mut seq = Vec::new();
    while parts.iter().any(|(z, _)| !z.is_zero()) {
        let h = parts
            .iter()
            .filter(|(z, _)| !z.is_zero())
            .map(|(z, _)| valuation(z, &pb))
            .min()
            .expect("some nonzero part");
        seq.push(h);
        for (z, pa) in parts.iter_mut() {
            *z = (&*z * &pb).mod_floor(pa);
        }
    }
    Ok(seq)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeHeights {
    pub prime: u64,
    pub heights: Vec<u32>,
}

/// Automorphism-invariant description of a (group, element) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    #[serde(with = "intlinalg::bigint_vec")]
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
    /// `None` for infinite order.
    #[serde(with = "intlinalg::opt_bigint")]
    pub element_order: Option<BigInt>,
    /// Per-prime height sequences; present only for torsion elements.
    pub heights: Option<Vec<PrimeHeights>>,
    /// gcd of the element's image in `G / torsion` (0 for torsion elements).
    #[serde(
        serialize_with = "intlinalg::serialize_bigint",
        deserialize_with = "intlinalg::deserialize_bigint"
    )]
    pub free_content: BigInt,
}

#[derive(Clone, Debug)]
pub struct PairInvariant {
    pub group: FgAbGroup,
    pub element: GroupElement,
    pub summary: PairSummary,
}

impl PairInvariant {
    pub fn new(element: GroupElement) -> Result<Self, GroupError> {
        let group = element.group.clone();
        let order = element.order();
        let heights = match &order {
            Some(_) => {
                let primes = match group.invariant_factors().last() {
                    Some(exp) => prime_factors(exp)?,
                    None => Vec::new(),
                };
                let mut hs = Vec::new();
                for p in primes {
                    hs.push(PrimeHeights {
                        prime: p,
                        heights: height_sequence(&element, p)?,
                    });
                }
                Some(hs)
            }
            None => None,
        };
        let coords = element.coordinates();
        let free_content = coords
            .iter()
            .zip(group.moduli())
            .filter(|(_, m)| m.is_zero())
            .fold(BigInt::zero(), |acc, (y, _)| acc.gcd(y));
        let summary = PairSummary {
            invariant_factors: group.invariant_factors().to_vec(),
            free_rank: group.free_rank(),
            element_order: order,
            heights,
            free_content,
        };
        Ok(PairInvariant {
            group,
            element,
            summary,
        })
    }
}

impl fmt::Display for PairInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.group, self.element)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairVerdict {
    Equivalent,
    Inequivalent,
    Indeterminate,
}

impl fmt::Display for PairVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairVerdict::Equivalent => "Equivalent",
            PairVerdict::Inequivalent => "Inequivalent",
            PairVerdict::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairComparison {
    pub verdict: PairVerdict,
    pub certificate: String,
}

/// Decides whether two pairs are related by a group isomorphism.
pub fn pair_equiv(p: &PairInvariant, q: &PairInvariant) -> PairComparison {
    use PairVerdict::*;
    let (a, b) = (&p.summary, &q.summary);
    let out = |verdict, certificate: String| PairComparison {
        verdict,
        certificate,
    };
    if a.invariant_factors != b.invariant_factors || a.free_rank != b.free_rank {
        return out(
            Inequivalent,
            format!("groups differ: {} vs {}", p.group, q.group),
        );
    }
    if a.element_order != b.element_order {
        let show = |o: &Option<BigInt>| {
            o.as_ref()
                .map_or("infinite".to_string(), ToString::to_string)
        };
        return out(
            Inequivalent,
            format!(
                "element orders differ: {} vs {}",
                show(&a.element_order),
                show(&b.element_order)
            ),
        );
    }
    if a.free_content != b.free_content {
        return out(
            Inequivalent,
            format!(
                "free-part contents differ: {} vs {}",
                a.free_content, b.free_content
            ),
        );
    }
    if a.heights != b.heights {
        return out(
            Inequivalent,
            format!(
                "height sequences differ: {:?} vs {:?}",
                a.heights, b.heights
            ),
        );
    }
    let p_zero = p.element.is_zero();
    if p_zero && q.element.is_zero() {
        return out(Equivalent, "both elements are zero".into());
    }
    if a.free_rank == 0 {
        return out(
            Equivalent,
            "finite group, matching height sequences at every prime".into(),
        );
    }
    if a.invariant_factors.is_empty() {
        return out(
            Equivalent,
            format!("free group, equal content {}", a.free_content),
        );
    }
    if a.heights.is_some() {
        return out(
            Equivalent,
            "torsion elements with matching height sequences".into(),
        );
    }
    if a.free_content.is_one() {
        return out(
            Equivalent,
            "primitive free parts; torsion component can be sheared away".into(),
        );
    }
    out(
        Indeterminate,
        "mixed group with matching partial summaries".into(),
    )
}

/// Upgrades a comparison using an explicit isomorphism `hom` carrying the
/// first element to the second.
pub fn pair_equiv_with_iso(
    p: &PairInvariant,
    q: &PairInvariant,
    hom: &GroupHom,
) -> Result<PairComparison, GroupError> {
    let base = pair_equiv(p, q);
    if base.verdict != PairVerdict::Indeterminate {
        return Ok(base);
    }
    if hom.domain != p.group || hom.codomain != q.group {
        return Err(GroupError::GroupMismatch);
    }
    if hom.is_isomorphism() && hom.apply(&p.element)?.equals(&q.element)? {
        Ok(PairComparison {
            verdict: PairVerdict::Equivalent,
            certificate: "explicit isomorphism carries one element to the other".into(),
        })
    } else {
        Ok(base)
    }
}

/// Brute-force enumeration used to cross-check the structural algorithms.
pub mod oracle {
    use super::*;

    pub const DEFAULT_ELEMENT_BOUND: usize = 4096;
    pub const DEFAULT_ORBIT_BOUND: usize = 256;
    const EXHAUSTIVE_SEARCH_LIMIT: u64 = 1 << 18;

    /// A finite group as `⊕ Z/m_i` on its nontrivial coordinates.
    #[derive(Clone, Debug)]
    pub struct FiniteModel {
        group: FgAbGroup,
        indices: Vec<usize>,
        pub moduli: Vec<u64>,
    }

    impl FiniteModel {
        pub fn new(group: &FgAbGroup, bound: usize) -> Result<Self, GroupError> {
            let order = group.order().ok_or(GroupError::NotFinite)?;
            if order > BigInt::from(bound) {
                return Err(GroupError::BoundExceeded { size: order, bound });
            }
            let indices = group.nontrivial_indices();
            let moduli = indices
                .iter()
                .map(|&i| group.moduli()[i].to_u64().expect("bounded"))
                .collect();
            Ok(FiniteModel {
                group: group.clone(),
                indices,
                moduli,
            })
        }

        pub fn order(&self) -> u64 {
            self.moduli.iter().product()
        }

        pub fn tuple(&self, g: &GroupElement) -> Vec<u64> {
            let c = g.coordinates();
            self.indices
                .iter()
                .map(|&i| c[i].to_u64().expect("reduced"))
                .collect()
        }

        pub fn element(&self, t: &[u64]) -> GroupElement {
            let mut y = vec![BigInt::zero(); self.group.ambient_rank()];
            for (&i, &x) in self.indices.iter().zip(t) {
                y[i] = BigInt::from(x);
            }
            self.group.from_coordinates(&y)
        }

        pub fn all_tuples(&self) -> Vec<Vec<u64>> {
            let mut out = vec![Vec::new()];
            for &m in &self.moduli {
                out = out
                    .into_iter()
                    .flat_map(|t| {
                        (0..m).map(move |x| {
                            let mut t = t.clone();
                            t.push(x);
                            t
                        })
                    })
                    .collect();
            }
            out
        }

        fn combine(&self, coeffs: &[u64], images: &[Vec<u64>]) -> Vec<u64> {
            let mut out = vec![0u64; self.moduli.len()];
            for (c, img) in coeffs.iter().zip(images) {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = (*o + c * img[k]) % self.moduli[k];
                }
            }
            out
        }

        /// Orbit by enumerating every automorphism (images of the generators).
        pub fn orbit_exhaustive(&self, g: &[u64]) -> BTreeSet<Vec<u64>> {
            let all = self.all_tuples();
            let candidates: Vec<Vec<Vec<u64>>> = self
                .moduli
                .iter()
                .map(|&m| {
                    all.iter()
                        .filter(|x| {
                            x.iter()
                                .zip(&self.moduli)
                                .all(|(xi, mi)| (m * xi) % mi == 0)
                        })
                        .cloned()
                        .collect()
                })
                .collect();
            let mut orbit = BTreeSet::new();
            let mut images = Vec::new();
            self.search(0, &candidates, &mut images, g, &mut orbit);
            orbit
        }

        fn search(
            &self,
            depth: usize,
            candidates: &[Vec<Vec<u64>>],
            images: &mut Vec<Vec<u64>>,
            g: &[u64],
            orbit: &mut BTreeSet<Vec<u64>>,
        ) {
            if depth == self.moduli.len() {
                orbit.insert(self.combine(g, images));
                return;
            }
            for x in &candidates[depth] {
                images.push(x.clone());
                if self.injective_on_prefix(images) {
                    self.search(depth + 1, candidates, images, g, orbit);
                }
                images.pop();
            }
        }

        /// Injective on the span of the first `images.len()` generators,
        /// assuming it already was on one fewer.
        fn injective_on_prefix(&self, images: &[Vec<u64>]) -> bool {
            let j = images.len() - 1;
            let mut coeffs = vec![0u64; j + 1];
            // Enumerate coefficient vectors with a nonzero last entry.
            loop {
                for last in 1..self.moduli[j] {
                    coeffs[j] = last;
                    if self.combine(&coeffs, images).iter().all(|&x| x == 0) {
                        return false;
                    }
                }
                let mut k = 0;
                loop {
                    if k == j {
                        return true;
                    }
                    coeffs[k] += 1;
                    if coeffs[k] < self.moduli[k] {
                        break;
                    }
                    coeffs[k] = 0;
                    k += 1;
                }
            }
        }

        /// Orbit as the closure under unit scalings and elementary transvections.
        pub fn orbit_closure(&self, g: &[u64]) -> BTreeSet<Vec<u64>> {
            let k = self.moduli.len();
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::new();
            seen.insert(g.to_vec());
            queue.push_back(g.to_vec());
            while let Some(y) = queue.pop_front() {
                let mut next = Vec::new();
                for i in 0..k {
                    let m = self.moduli[i];
                    for u in (1..m).filter(|&u| u.gcd(&m) == 1) {
                        let mut z = y.clone();
                        z[i] = (z[i] * u) % m;
                        next.push(z);
                    }
                    for j in (0..k).filter(|&j| j != i) {
                        // c_i -> c_i + t c_j is a homomorphism iff m_j | m_i t.
                        let t = self.moduli[j] / self.moduli[j].gcd(&m);
                        let mut z = y.clone();
                        z[j] = (z[j] + y[i] * t) % self.moduli[j];
                        next.push(z);
                    }
                }
                for z in next {
                    if seen.insert(z.clone()) {
                        queue.push_back(z);
                    }
                }
            }
            seen
        }

        pub fn exhaustive_feasible(&self) -> bool {
            let order = self.order();
            let mut space: u64 = 1;
            for &m in &self.moduli {
                let torsion_m = self.moduli.iter().map(|&mi| m.gcd(&mi)).product::<u64>();
                space = space.saturating_mul(torsion_m);
                if space > EXHAUSTIVE_SEARCH_LIMIT.saturating_mul(order.max(1)) {
                    return false;
                }
            }
            space <= EXHAUSTIVE_SEARCH_LIMIT
        }
    }

    /// Every element of a finite group.
    pub fn oracle_elements(
        group: &FgAbGroup,
        bound: usize,
    ) -> Result<Vec<GroupElement>, GroupError> {
        let model = FiniteModel::new(group, bound)?;
        Ok(model
            .all_tuples()
            .iter()
            .map(|t| model.element(t))
            .collect())
    }

    /// Automorphism orbit of `g`, by exhaustive search when the search space is
    /// small and by closure under elementary automorphisms otherwise.
    pub fn oracle_aut_orbit(
        g: &GroupElement,
        bound: usize,
    ) -> Result<Vec<GroupElement>, GroupError> {
        let model = FiniteModel::new(g.group(), bound)?;
        let t = model.tuple(g);
        let orbit = if model.exhaustive_feasible() {
            model.orbit_exhaustive(&t)
        } else {
            model.orbit_closure(&t)
        };
        Ok(orbit.iter().map(|t| model.element(t)).collect())
    }

    /// Whether `h` lies in the automorphism orbit of `g`.
    pub fn in_aut_orbit(
        g: &GroupElement,
        h: &GroupElement,
        bound: usize,
    ) -> Result<bool, GroupError> {
        let model = FiniteModel::new(g.group(), bound)?;
        if g.group() != h.group() {
            return Err(GroupError::GroupMismatch);
        }
        let t = model.tuple(g);
        let orbit = if model.exhaustive_feasible() {
            model.orbit_exhaustive(&t)
        } else {
            model.orbit_closure(&t)
        };
        Ok(orbit.contains(&model.tuple(h)))
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::intlinalg::to_bigints;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        to_bigints(v)
    }

    fn ones3() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]])
    }

    fn diag_group(orders: &[i64]) -> FgAbGroup {
        FgAbGroup::from_cokernel(&IntMatrix::diagonal(&big(orders)))
    }

    #[test]
    fn cokernel_examples() {
        let g = FgAbGroup::from_cokernel(&ones3().identity_minus().unwrap());
        assert_eq!(g.invariant_factors(), big(&[2]).as_slice());
        assert_eq!(g.free_rank(), 0);
        let free = FgAbGroup::from_cokernel(&IntMatrix::zeros(2, 0));
        assert_eq!(free.free_rank(), 2);
        assert!(free.invariant_factors().is_empty());
        let z2 = FgAbGroup::cyclic(2);
        assert_eq!(z2.to_string(), "Z/2");
        assert!(FgAbGroup::from_cokernel(&IntMatrix::zeros(0, 0)).is_trivial());
    }

    #[test]
    fn element_equality() {
        let g = FgAbGroup::from_cokernel(&ones3().identity_minus().unwrap());
        let a = g.element_i64(&[1, 0, 0]).unwrap();
        let b = g.element_i64(&[0, 1, 0]).unwrap();
        assert!(a.equals(&a).unwrap());
        assert!(a.equals(&b).unwrap());
        let z2 = FgAbGroup::cyclic(2);
        assert!(!z2.element_i64(&[1]).unwrap().equals(&z2.zero()).unwrap());
        assert_eq!(a.equals(&z2.zero()), Err(GroupError::GroupMismatch));
    }

    #[test]
    fn orders() {
        let z2 = FgAbGroup::cyclic(2);
        assert_eq!(z2.zero().order(), Some(BigInt::one()));
        assert_eq!(z2.element_i64(&[1]).unwrap().order(), Some(BigInt::from(2)));
        assert_eq!(FgAbGroup::free(1).element_i64(&[1]).unwrap().order(), None);
    }

    #[test]
    fn tensor_examples() {
        let t = tensor(&FgAbGroup::free(2), &FgAbGroup::free(3));
        assert_eq!(t.group.free_rank(), 6);
        assert!(t.group.invariant_factors().is_empty());
        let t = tensor(&FgAbGroup::cyclic(2), &FgAbGroup::cyclic(4));
        assert_eq!(
            t.group.iso_type(),
            IsoType {
                invariant_factors: big(&[2]),
                free_rank: 0
            }
        );
        let t = tensor(&FgAbGroup::cyclic(2), &FgAbGroup::cyclic(1));
        assert!(t.group.is_trivial());
    }

    /// Tensor product by brute force: free abelian group on all element pairs
    /// modulo the bilinearity relations.
    fn brute_force_tensor(g: &FgAbGroup, h: &FgAbGroup) -> IsoType {
        let mg = FiniteModel::new(g, 64).unwrap();
        let mh = FiniteModel::new(h, 64).unwrap();
        let eg = mg.all_tuples();
        let eh = mh.all_tuples();
        let idx = |a: &Vec<u64>, b: &Vec<u64>| {
            eg.iter().position(|x| x == a).unwrap() * eh.len()
                + eh.iter().position(|x| x == b).unwrap()
        };
        let add = |m: &[u64], a: &[u64], b: &[u64]| -> Vec<u64> {
            a.iter()
                .zip(b)
                .zip(m)
                .map(|((x, y), m)| (x + y) % m)
                .collect()
        };
        let n = eg.len() * eh.len();
        let mut columns = Vec::new();
        for a in &eg {
            for a2 in &eg {
                for b in &eh {
                    let mut c = vec![BigInt::zero(); n];
                    c[idx(&add(&mg.moduli, a, a2), b)] += 1;
                    c[idx(a, b)] -= 1;
                    c[idx(a2, b)] -= 1;
                    columns.push(c);
                }
            }
        }
        for a in &eg {
            for b in &eh {
                for b2 in &eh {
                    let mut c = vec![BigInt::zero(); n];
                    c[idx(a, &add(&mh.moduli, b, b2))] += 1;
                    c[idx(a, b)] -= 1;
                    c[idx(a, b2)] -= 1;
                    columns.push(c);
                }
            }
        }
        FgAbGroup::from_cokernel(&IntMatrix::from_columns(n, &columns)).iso_type()
    }

    #[test]
    fn tensor_matches_pairwise_brute_force() {
        for (a, b) in [
            (vec![2], vec![4]),
            (vec![2, 2], vec![2]),
            (vec![3], vec![2]),
            (vec![6], vec![4]),
            (vec![1], vec![5]),
        ] {
            let (g, h) = (diag_group(&a), diag_group(&b));
            assert_eq!(
                tensor(&g, &h).group.iso_type(),
                brute_force_tensor(&g, &h),
                "{a:?} ⊗ {b:?}"
            );
        }
    }

    #[test]
    fn tensor_explicit_presentation_agrees() {
        let a = IntMatrix::from_i64(&[&[4, 1], &[1, 0]]);
        let g = FgAbGroup::from_cokernel(&a.identity_minus().unwrap());
        let h = FgAbGroup::from_cokernel(&a.transpose().identity_minus().unwrap());
        let t = tensor(&g, &h);
        let explicit = FgAbGroup::from_cokernel(&t.group.relation_matrix());
        assert_eq!(explicit.iso_type(), t.group.iso_type());
        // membership via coordinates agrees with the Hermite relation lattice
        for v in [[1i64, 0, 0, 1], [2, 0, 0, 2], [4, 0, 0, 0], [3, -1, 2, 5]] {
            let e = t.group.element_i64(&v).unwrap();
            assert_eq!(
                e.is_zero(),
                t.group.relations().contains_vector(e.vector()).unwrap()
            );
        }
    }

    #[test]
    fn induced_hom_examples() {
        let g = FgAbGroup::from_cokernel(&ones3().identity_minus().unwrap());
        let id = induced_hom(&IntMatrix::identity(3), &g, &g).unwrap();
        assert!(id.is_isomorphism());

        let z4 = FgAbGroup::cyclic(4);
        let two = induced_hom(&IntMatrix::from_i64(&[&[2]]), &z4, &z4).unwrap();
        assert!(two.well_defined);
        assert!(!two.injective);
        assert!(!two.surjective);

        // Z/2 -> Z/4 by 1 is not well defined; by 2 it is, injective, not onto.
        let z2 = FgAbGroup::cyclic(2);
        assert!(
            !induced_hom(&IntMatrix::from_i64(&[&[1]]), &z2, &z4)
                .unwrap()
                .well_defined
        );
        let emb = induced_hom(&IntMatrix::from_i64(&[&[2]]), &z2, &z4).unwrap();
        assert!(emb.well_defined && emb.injective && !emb.surjective);
        assert!(induced_hom(&IntMatrix::identity(2), &z2, &z4).is_err());
    }

    #[test]
    fn sse_transpose_hom_is_iso() {
        // A = C D, B = D C
        let c = IntMatrix::from_i64(&[&[1, 0], &[1, 1], &[0, 1]]);
        let d = IntMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 1]]);
        let a = c.mul(&d).unwrap();
        let b = d.mul(&c).unwrap();
        let ga = FgAbGroup::from_cokernel(&a.transpose().identity_minus().unwrap());
        let gb = FgAbGroup::from_cokernel(&b.transpose().identity_minus().unwrap());
        let hom = induced_hom(&c.transpose(), &ga, &gb).unwrap();
        assert!(hom.is_isomorphism());
    }

    #[test]
    fn height_examples() {
        let g = diag_group(&[2, 4]);
        assert!(height_sequence(&g.zero(), 2).unwrap().is_empty());
        assert_eq!(
            height_sequence(&g.element_i64(&[1, 0]).unwrap(), 2).unwrap(),
            vec![0]
        );
        assert_eq!(
            height_sequence(&g.element_i64(&[0, 2]).unwrap(), 2).unwrap(),
            vec![1]
        );
        assert_eq!(
            height_sequence(&g.element_i64(&[0, 1]).unwrap(), 2).unwrap(),
            vec![0, 1]
        );
        assert_eq!(height_sequence(&g.zero(), 4), Err(GroupError::NotPrime(4)));
        let z = FgAbGroup::free(1);
        assert_eq!(
            height_sequence(&z.element_i64(&[1]).unwrap(), 2),
            Err(GroupError::NotTorsion)
        );
    }

    #[test]
    fn height_matches_divisibility_search() {
        let g = diag_group(&[2, 4, 8]);
        let elems = oracle_elements(&g, 4096).unwrap();
        let model = FiniteModel::new(&g, 4096).unwrap();
        for x in &elems {
            // largest k with x in 2^k G by brute force
            let mut k = 0u32;
            while !x.is_zero() {
                let pk = BigInt::from(2u64.pow(k + 1));
                if elems.iter().any(|y| y.scale(&pk).equals(x).unwrap()) {
                    k += 1;
                } else {
                    break;
                }
            }
            let seq = height_sequence(x, 2).unwrap();
            if x.is_zero() {
                assert!(seq.is_empty());
            } else {
                assert_eq!(seq[0], k, "{:?}", model.tuple(x));
            }
        }
    }

    #[test]
    fn pair_equiv_examples() {
        let z2 = FgAbGroup::cyclic(2);
        let one = PairInvariant::new(z2.element_i64(&[1]).unwrap()).unwrap();
        let zero = PairInvariant::new(z2.zero()).unwrap();
        assert_eq!(pair_equiv(&one, &zero).verdict, PairVerdict::Inequivalent);
        assert_eq!(pair_equiv(&zero, &zero).verdict, PairVerdict::Equivalent);

        let g = diag_group(&[2, 4]);
        let p = PairInvariant::new(g.element_i64(&[1, 0]).unwrap()).unwrap();
        let q = PairInvariant::new(g.element_i64(&[0, 2]).unwrap()).unwrap();
        assert_eq!(pair_equiv(&p, &q).verdict, PairVerdict::Inequivalent);
        assert!(!in_aut_orbit(&p.element, &q.element, 256).unwrap());
        let r = PairInvariant::new(g.element_i64(&[1, 2]).unwrap()).unwrap();
        assert_eq!(pair_equiv(&q, &r).verdict, PairVerdict::Inequivalent);
        assert!(!in_aut_orbit(&q.element, &r.element, 256).unwrap());
        let s = PairInvariant::new(g.element_i64(&[0, 1]).unwrap()).unwrap();
        let t = PairInvariant::new(g.element_i64(&[1, 1]).unwrap()).unwrap();
        assert_eq!(pair_equiv(&s, &t).verdict, PairVerdict::Equivalent);
        assert!(in_aut_orbit(&s.element, &t.element, 256).unwrap());
    }

    #[test]
    fn pair_equiv_infinite_groups() {
        let z2 = FgAbGroup::free(2);
        let a = PairInvariant::new(z2.element_i64(&[2, 4]).unwrap()).unwrap();
        let b = PairInvariant::new(z2.element_i64(&[0, 2]).unwrap()).unwrap();
        let c = PairInvariant::new(z2.element_i64(&[3, 0]).unwrap()).unwrap();
        assert_eq!(pair_equiv(&a, &b).verdict, PairVerdict::Equivalent);
        assert_eq!(pair_equiv(&a, &c).verdict, PairVerdict::Inequivalent);

        // Z ⊕ Z/2
        let mixed = diag_group(&[0, 2]);
        let t = PairInvariant::new(mixed.element_i64(&[0, 1]).unwrap()).unwrap();
        let prim1 = PairInvariant::new(mixed.element_i64(&[1, 0]).unwrap()).unwrap();
        let prim2 = PairInvariant::new(mixed.element_i64(&[1, 1]).unwrap()).unwrap();
        let two1 = PairInvariant::new(mixed.element_i64(&[2, 0]).unwrap()).unwrap();
        let two2 = PairInvariant::new(mixed.element_i64(&[2, 1]).unwrap()).unwrap();
        assert_eq!(pair_equiv(&t, &t).verdict, PairVerdict::Equivalent);
        assert_eq!(pair_equiv(&prim1, &prim2).verdict, PairVerdict::Equivalent);
        assert_eq!(pair_equiv(&t, &prim1).verdict, PairVerdict::Inequivalent);
        assert_eq!(pair_equiv(&two1, &two2).verdict, PairVerdict::Indeterminate);
    }

    #[test]
    fn oracle_bounds() {
        assert_eq!(
            oracle_elements(&diag_group(&[2, 4]), 4096).unwrap().len(),
            8
        );
        assert!(matches!(
            oracle_elements(&diag_group(&[64, 128]), 4096),
            Err(GroupError::BoundExceeded { .. })
        ));
        assert_eq!(
            oracle_elements(&FgAbGroup::free(1), 10).unwrap_err(),
            GroupError::NotFinite
        );
    }

    #[test]
    fn orbit_routes_agree_on_small_groups() {
        for orders in [
            vec![2, 4],
            vec![2, 2, 2],
            vec![4, 8],
            vec![2, 6],
            vec![3, 9],
            vec![2, 2, 4],
            vec![6, 12],
        ] {
            let g = diag_group(&orders);
            let model = FiniteModel::new(&g, 256).unwrap();
            assert!(model.exhaustive_feasible(), "{orders:?}");
            for t in model.all_tuples() {
                assert_eq!(
                    model.orbit_exhaustive(&t),
                    model.orbit_closure(&t),
                    "{orders:?} {t:?}"
                );
            }
        }
    }

    fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
        let mut u = IntMatrix::identity(n);
        if n == 0 {
            return u;
        }
        for &(i, j, c) in ops {
            let (i, j) = (i % n, j % n);
            if i != j {
                let mut e = IntMatrix::identity(n);
                e.set(i, j, BigInt::from(c));
                u = e.mul(&u).unwrap();
            }
        }
        u
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn presentation_independence(
            (n, k, entries, ops_l, ops_r) in (1usize..=4, 0usize..=4).prop_flat_map(|(n, k)| (
                Just(n), Just(k),
                proptest::collection::vec(-6i64..=6, n * k),
                proptest::collection::vec((0usize..4, 0usize..4, -3i64..=3), 0..6),
                proptest::collection::vec((0usize..4, 0usize..4, -3i64..=3), 0..6),
            ))
        ) {
            let rel = IntMatrix::from_fn(n, k, |i, j| BigInt::from(entries[i * k + j]));
            let changed = unimodular(n, &ops_l).mul(&rel).unwrap().mul(&unimodular(k, &ops_r)).unwrap();
            let g1 = FgAbGroup::from_cokernel(&rel);
            let g2 = FgAbGroup::from_cokernel(&changed);
            prop_assert_eq!(g1.iso_type(), g2.iso_type());
        }

        #[test]
        fn embed_is_bilinear(
            v in proptest::collection::vec(-5i64..=5, 2),
            v2 in proptest::collection::vec(-5i64..=5, 2),
            w in proptest::collection::vec(-5i64..=5, 2),
            w2 in proptest::collection::vec(-5i64..=5, 2),
        ) {
            let a = IntMatrix::from_i64(&[&[4, 1], &[1, 0]]);
            let g = FgAbGroup::from_cokernel(&a.identity_minus().unwrap());
            let h = FgAbGroup::from_cokernel(&a.transpose().identity_minus().unwrap());
            let t = tensor(&g, &h);
            let (v, v2) = (g.element_i64(&v).unwrap(), g.element_i64(&v2).unwrap());
            let (w, w2) = (h.element_i64(&w).unwrap(), h.element_i64(&w2).unwrap());
            let lhs = t.embed(&v.add(&v2).unwrap(), &w).unwrap();
            let rhs = t.embed(&v, &w).unwrap().add(&t.embed(&v2, &w).unwrap()).unwrap();
            prop_assert!(lhs.equals(&rhs).unwrap());
            let lhs = t.embed(&v, &w.add(&w2).unwrap()).unwrap();
            let rhs = t.embed(&v, &w).unwrap().add(&t.embed(&v, &w2).unwrap()).unwrap();
            prop_assert!(lhs.equals(&rhs).unwrap());
        }

        #[test]
        fn hom_composition(
            s in proptest::collection::vec(-3i64..=3, 4),
            t in proptest::collection::vec(-3i64..=3, 4),
            x in proptest::collection::vec(-5i64..=5, 2),
        ) {
            let g = diag_group(&[2, 4]);
            let s = IntMatrix::from_fn(2, 2, |i, j| BigInt::from(s[i * 2 + j]));
            let t = IntMatrix::from_fn(2, 2, |i, j| BigInt::from(t[i * 2 + j]));
            let fs = induced_hom(&s, &g, &g).unwrap();
            let ft = induced_hom(&t, &g, &g).unwrap();
            let fts = induced_hom(&t.mul(&s).unwrap(), &g, &g).unwrap();
            let idh = induced_hom(&IntMatrix::identity(2), &g, &g).unwrap();
            prop_assert!(idh.is_isomorphism());
            let x = g.element_i64(&x).unwrap();
            if fs.well_defined && ft.well_defined {
                prop_assert!(fts.well_defined);
                let two_step = ft.apply(&fs.apply(&x).unwrap()).unwrap();
                prop_assert!(two_step.equals(&fts.apply(&x).unwrap()).unwrap());
            }
        }
    }
}
