//! Multi-matrix algebras: finite direct sums of complex matrix algebras, their
//! elements, tensor products, partial traces and Jordan products.
//!
//! An algebra is described by an ordered list of blocks `(label, dim)`; an
//! element carries one dense complex matrix per block. Commutative ("classical")
//! algebras are the special case where every block has dimension 1.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Separator used when composing block labels of tensor products. Chosen so the
/// join is flat and associative: `(a ⊗ b) ⊗ c` and `a ⊗ (b ⊗ c)` yield the same
/// composite labels.
const LABEL_JOIN: &str = "⊗";

pub fn join_labels(parts: &[&str]) -> String {
    parts.join(LABEL_JOIN)
}

/// Descriptor of a multi-matrix algebra: an ordered list of matrix blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDescriptor {
    blocks: Vec<(String, usize)>,
}

impl AlgebraDescriptor {
    pub fn new<L: Into<String>>(blocks: Vec<(L, usize)>) -> Result<Self> {
        let blocks: Vec<(String, usize)> = blocks.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("descriptor needs at least one block".into()));
        }
        for (label, dim) in &blocks {
            if *dim == 0 {
                return Err(Error::InvalidAlgebra(format!("block '{label}' has dim 0")));
            }
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if blocks[i].0 == blocks[j].0 {
                    return Err(Error::InvalidAlgebra(format!(
                        "duplicate block label '{}'",
                        blocks[i].0
                    )));
                }
            }
        }
        Ok(Self { blocks })
    }

    /// Single matrix block `M_d` with the given label.
    pub fn matrix<L: Into<String>>(label: L, dim: usize) -> Result<Self> {
        Self::new(vec![(label.into(), dim)])
    }

    /// Commutative algebra `C^X` over the given label set (all blocks 1x1).
    pub fn classical<L: Into<String>>(labels: Vec<L>) -> Result<Self> {
        Self::new(labels.into_iter().map(|l| (l, 1)).collect())
    }

    pub fn blocks(&self) -> &[(String, usize)] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self, block: usize) -> usize {
        self.blocks[block].1
    }

    pub fn label(&self, block: usize) -> &str {
        &self.blocks[block].0
    }

    /// Total dimension sum_x m_x^2 of the underlying vector space.
    pub fn total_matrix_dim(&self) -> usize {
        self.blocks.iter().map(|(_, d)| d * d).sum()
    }

    /// True when every block is 1x1.
    pub fn is_classical(&self) -> bool {
        self.blocks.iter().all(|(_, d)| *d == 1)
    }

    /// Structural compatibility: same block count and per-block dims. Labels are
    /// presentation only and do not participate in math-level checks.
    pub fn dims_match(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(other.blocks.iter())
                .all(|((_, a), (_, b))| a == b)
    }

    /// Tensor product of descriptors: Cartesian product of block sets, dims
    /// multiply, labels join in factor order, leftmost factor slowest-varying.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut blocks = Vec::with_capacity(self.blocks.len() * other.blocks.len());
        for (la, da) in &self.blocks {
            for (lb, db) in &other.blocks {
                blocks.push((join_labels(&[la, lb]), da * db));
            }
        }
        Self { blocks }
    }
}

/// An element of a multi-matrix algebra: one dense complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    algebra: AlgebraDescriptor,
    data: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn new(algebra: AlgebraDescriptor, data: Vec<CMatrix>) -> Result<Self> {
        if data.len() != algebra.num_blocks() {
            return Err(Error::InvalidElement(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                data.len()
            )));
        }
        for (i, m) in data.iter().enumerate() {
            let d = algebra.dim(i);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::InvalidElement(format!(
                    "block {} has shape {}x{}, expected {}x{}",
                    i,
                    m.nrows(),
                    m.ncols(),
                    d,
                    d
                )));
            }
            if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidElement(format!("block {i} has non-finite entries")));
            }
        }
        Ok(Self { algebra, data })
    }

    pub fn zero(algebra: AlgebraDescriptor) -> Self {
        let data = algebra
            .blocks()
            .iter()
            .map(|(_, d)| CMatrix::zeros(*d, *d))
            .collect();
        Self { algebra, data }
    }

    /// The unit 1 of the algebra (identity in every block).
    pub fn unit(algebra: AlgebraDescriptor) -> Self {
        let data = algebra
            .blocks()
            .iter()
            .map(|(_, d)| CMatrix::identity(*d, *d))
            .collect();
        Self { algebra, data }
    }

    /// Matrix unit E_ij supported in a single block.
    pub fn matrix_unit(algebra: AlgebraDescriptor, block: usize, i: usize, j: usize) -> Self {
        let mut e = Self::zero(algebra);
        e.data[block][(i, j)] = ONE;
        e
    }

    /// Dirac delta at label index `x` of a classical algebra.
    pub fn delta(algebra: AlgebraDescriptor, x: usize) -> Self {
        Self::matrix_unit(algebra, x, 0, 0)
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.data
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.data[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut CMatrix {
        &mut self.data[i]
    }

    pub fn trace(&self) -> Complex64 {
        self.data.iter().map(|m| m.trace()).sum()
    }

    pub fn dagger(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            data: self.data.iter().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            data: self.data.iter().map(|m| m * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_algebra(other)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    /// Blockwise (associative) algebra multiplication.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_algebra(other)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Largest entry magnitude across blocks.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|m| m.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.algebra.dims_match(&other.algebra) && self.distance(other) <= tol
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.distance(&self.dagger()) <= tol
    }

    /// Positivity via per-block Hermitian eigensolves; requires self-adjointness.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_selfadjoint(tol) && self.min_eigenvalue() >= -tol
    }

    pub fn is_state(&self, tol: f64) -> bool {
        self.is_positive(tol) && (self.trace() - ONE).norm() <= tol
    }

    /// Smallest eigenvalue across blocks (Hermitian part is assumed; callers
    /// check self-adjointness first when it matters).
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// All eigenvalues across blocks, unsorted, from per-block Hermitian solves.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.data
            .iter()
            .flat_map(|m| hermitian_eigenvalues(m))
            .collect()
    }

    fn check_same_algebra(&self, other: &Self) -> Result<()> {
        if !self.algebra.dims_match(&other.algebra) {
            return Err(Error::AlgebraMismatch(format!(
                "elements live on different algebras: {:?} vs {:?}",
                self.algebra
                    .blocks()
                    .iter()
                    .map(|(_, d)| *d)
                    .collect::<Vec<_>>(),
                other
                    .algebra
                    .blocks()
                    .iter()
                    .map(|(_, d)| *d)
                    .collect::<Vec<_>>()
            )));
        }
        Ok(())
    }
}

/// Tensor product of elements: blockwise Kronecker products, leftmost factor
/// slowest-varying.
pub fn tensor_elements(a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
    let algebra = a.algebra().tensor(b.algebra());
    let mut data = Vec::with_capacity(algebra.num_blocks());
    for ma in a.blocks() {
        for mb in b.blocks() {
            data.push(ma.kronecker(mb));
        }
    }
    AlgebraElement { algebra, data }
}

/// Normalized Jordan product Jor(a, b) = (ab + ba)/2.
pub fn jordan_product(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    Ok(ab.add(&ba)?.scale(Complex64::new(0.5, 0.0)))
}

/// Extended Jordan product: the right-nested fold
/// Jor(a_0, Jor(a_1, ... Jor(a_{n-1}, a_n))).
pub fn extended_jordan(items: &[AlgebraElement]) -> Result<AlgebraElement> {
    let mut iter = items.iter().rev();
    let mut acc = iter
        .next()
        .ok_or_else(|| Error::EmptyList("extended_jordan needs at least one element".into()))?
        .clone();
    for item in iter {
        acc = jordan_product(item, &acc)?;
    }
    Ok(acc)
}

/// The element mu*(1) of A (x) A, the Hilbert-Schmidt dual of multiplication
/// applied to the unit: sum_ij E_ij (x) E_ji per matrix block, sitting in the
/// (x, x) diagonal composite blocks. For a single matrix block this is SWAP;
/// for a classical algebra it is sum_x delta_x (x) delta_x.
pub fn multiplication_dual_unit(algebra: &AlgebraDescriptor) -> AlgebraElement {
    let composite = algebra.tensor(algebra);
    let nb = algebra.num_blocks();
    let mut out = AlgebraElement::zero(composite);
    for x in 0..nb {
        let d = algebra.dim(x);
        let block = out.block_mut(x * nb + x);
        for i in 0..d {
            for j in 0..d {
                // (E_ij (x) E_ji) has its single 1 at row (i*d + j), col (j*d + i).
                block[(i * d + j, j * d + i)] = ONE;
            }
        }
    }
    out
}

/// A declared tensor factorization A_0 (x) ... (x) A_n with its derived
/// composite descriptor and block-index bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFactorization {
    factors: Vec<AlgebraDescriptor>,
    composite: AlgebraDescriptor,
}

impl TensorFactorization {
    pub fn new(factors: Vec<AlgebraDescriptor>) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidAlgebra("factorization needs at least one factor".into()))?;
        let mut composite = first.clone();
        for f in iter {
            composite = composite.tensor(f);
        }
        Ok(Self { factors, composite })
    }

    pub fn factors(&self) -> &[AlgebraDescriptor] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &AlgebraDescriptor {
        &self.factors[i]
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn composite(&self) -> &AlgebraDescriptor {
        &self.composite
    }

    /// Decode a composite block index into per-factor block indices
    /// (mixed radix, leftmost factor most significant).
    pub fn block_tuple(&self, mut composite_block: usize) -> Vec<usize> {
        let mut tuple = vec![0; self.factors.len()];
        for (slot, f) in self.factors.iter().enumerate().rev() {
            tuple[slot] = composite_block % f.num_blocks();
            composite_block /= f.num_blocks();
        }
        tuple
    }

    pub fn composite_block_index(&self, tuple: &[usize]) -> usize {
        let mut idx = 0;
        for (slot, f) in self.factors.iter().enumerate() {
            idx = idx * f.num_blocks() + tuple[slot];
        }
        idx
    }

    /// The factorization formed by the kept factors, in order.
    pub fn sub_factorization(&self, keep: &[usize]) -> Result<Self> {
        for &k in keep {
            if k >= self.factors.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "factor index {k} out of range 0..{}",
                    self.factors.len()
                )));
            }
        }
        Self::new(keep.iter().map(|&k| self.factors[k].clone()).collect())
    }
}

/// Partial trace of `x` over the factors not in `keep`. `keep` must be sorted,
/// nonempty and within range; the result lives on the tensor product of the
/// kept factors in their original order.
pub fn partial_trace(
    x: &AlgebraElement,
    factorization: &TensorFactorization,
    keep: &[usize],
) -> Result<AlgebraElement> {
    let n = factorization.num_factors();
    if keep.is_empty() {
        return Err(Error::IndexOutOfRange("keep set must be nonempty".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::IndexOutOfRange("keep set must be strictly increasing".into()));
    }
    if *keep.last().unwrap() >= n {
        return Err(Error::IndexOutOfRange(format!(
            "keep index {} out of range 0..{n}",
            keep.last().unwrap()
        )));
    }
    if !x.algebra().dims_match(factorization.composite()) {
        return Err(Error::AlgebraMismatch(
            "element does not live on the factorization's composite algebra".into(),
        ));
    }

    let sub = factorization.sub_factorization(keep)?;
    let mut out = AlgebraElement::zero(sub.composite().clone());

    for cb in 0..factorization.composite().num_blocks() {
        let tuple = factorization.block_tuple(cb);
        let dims: Vec<usize> = tuple
            .iter()
            .enumerate()
            .map(|(slot, &b)| factorization.factor(slot).dim(b))
            .collect();
        let kept_tuple: Vec<usize> = keep.iter().map(|&k| tuple[k]).collect();
        let ob = sub.composite_block_index(&kept_tuple);
        let src = x.block(cb);
        let total: usize = dims.iter().product();

        // Strides of each factor within the row index of the composite block.
        let mut strides = vec![1usize; n];
        for slot in (0..n - 1).rev() {
            strides[slot] = strides[slot + 1] * dims[slot + 1];
        }
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let mut kept_strides = vec![1usize; keep.len()];
        for s in (0..keep.len().saturating_sub(1)).rev() {
            kept_strides[s] = kept_strides[s + 1] * kept_dims[s + 1];
        }

        let dst = out.block_mut(ob);
        for r in 0..total {
            for c in 0..total {
                // Contract only when all traced factor indices agree.
                let mut ok = true;
                let mut out_r = 0;
                let mut out_c = 0;
                let mut ks = 0;
                for slot in 0..n {
                    let ri = (r / strides[slot]) % dims[slot];
                    let ci = (c / strides[slot]) % dims[slot];
                    if keep.binary_search(&slot).is_ok() {
                        out_r += ri * kept_strides[ks];
                        out_c += ci * kept_strides[ks];
                        ks += 1;
                    } else if ri != ci {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    dst[(out_r, out_c)] += src[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Pads `x` with algebra units on both sides: 1 (x) .. (x) x (x) .. (x) 1.
pub fn pad_element(
    left: &[AlgebraDescriptor],
    x: &AlgebraElement,
    right: &[AlgebraDescriptor],
) -> AlgebraElement {
    let mut t = x.clone();
    if !left.is_empty() {
        let lf = TensorFactorization::new(left.to_vec()).expect("nonempty factor list");
        t = tensor_elements(&AlgebraElement::unit(lf.composite().clone()), &t);
    }
    if !right.is_empty() {
        let rf = TensorFactorization::new(right.to_vec()).expect("nonempty factor list");
        t = tensor_elements(&t, &AlgebraElement::unit(rf.composite().clone()));
    }
    t
}

/// Eigenvalues of a Hermitian matrix block.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Full Hermitian eigendecomposition of a block: (eigenvalues, eigenvectors).
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    if m.nrows() == 1 {
        return (vec![m[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Operator norm (largest singular value) of an element, via the top
/// eigenvalue of M M^dagger per block.
pub fn operator_norm(x: &AlgebraElement) -> f64 {
    x.blocks()
        .iter()
        .map(|m| {
            let mm = m * m.adjoint();
            hermitian_eigenvalues(&mm)
                .into_iter()
                .fold(0.0, f64::max)
                .max(0.0)
                .sqrt()
        })
        .fold(0.0, f64::max)
}
