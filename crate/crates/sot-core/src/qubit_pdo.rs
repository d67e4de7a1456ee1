//! Multi-qubit pseudo-density operators and their Pauli expansions.
//!
//! For a k-qubit system evolving through n steps, the (n+1)-factor state over
//! time admits a direct recursion in Jordan products,
//!     R_1 = Jor(rho~, J[E_1]),    R_m = Jor(R_{m-1} (x) 1, 1 (x) J[E_m]),
//! and a tomographic description through coefficients against Pauli strings,
//!     t = 2^{-k(n+1)} sum_s tr(t sigma_s) sigma_s,
//! with string slots ordered time-major, qubit-minor. Coefficients are read
//! off by sparse trace contraction, never by simulating measurements.

use crate::algebra::{
    jordan_product, pad_element, AlgebraDescriptor, AlgebraElement, CMatrix, TensorFactorization,
};
use crate::bloom::{bloom_apply, BloomKind};
use crate::nstep::ProcessChain;
use crate::{Complex64, Error, Result};

/// A word in the single-qubit Pauli basis. Factor values index
/// (identity, X, Y, Z) as 0..=3; slot 0 is the leftmost (most significant)
/// tensor position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    factors: Vec<u8>,
}

impl PauliString {
    pub fn new(factors: Vec<u8>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyList("a Pauli string needs at least one factor".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&f| f > 3) {
            return Err(Error::IndexOutOfRange(format!(
                "Pauli index {bad} is outside 0..=3"
            )));
        }
        Ok(Self { factors })
    }

    /// Decodes `code` as a base-4 word of the given length, most significant
    /// digit first.
    pub fn from_code(code: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyList("a Pauli string needs at least one factor".into()));
        }
        if code >= 1usize << (2 * len) {
            return Err(Error::IndexOutOfRange(format!(
                "code {code} does not fit in {len} base-4 digits"
            )));
        }
        let mut factors = vec![0u8; len];
        let mut rem = code;
        for slot in (0..len).rev() {
            factors[slot] = (rem & 3) as u8;
            rem >>= 2;
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[u8] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Column action of the string as a signed permutation: the unique row
    /// with a nonzero entry in column `col`, together with that entry.
    ///
    /// Each Pauli factor has exactly one nonzero per column, so their
    /// Kronecker product does too; this is what makes O(D) trace contraction
    /// possible on 2^len-dimensional matrices.
    fn column_action(&self, col: usize) -> (usize, Complex64) {
        let mut row = 0usize;
        let mut phase = Complex64::new(1.0, 0.0);
        for (slot, &p) in self.factors.iter().enumerate() {
            let bit = (col >> (self.factors.len() - 1 - slot)) & 1;
            let (rbit, ph) = match p {
                0 => (bit, Complex64::new(1.0, 0.0)),
                1 => (1 - bit, Complex64::new(1.0, 0.0)),
                2 => (
                    1 - bit,
                    if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    },
                ),
                3 => (
                    bit,
                    if bit == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(-1.0, 0.0)
                    },
                ),
                _ => unreachable!("validated in the constructor"),
            };
            row = (row << 1) | rbit;
            phase *= ph;
        }
        (row, phase)
    }

    /// Dense matrix of the string, dimension 2^len.
    pub fn to_matrix(&self) -> CMatrix {
        let d = 1usize << self.factors.len();
        let mut m = CMatrix::zeros(d, d);
        for col in 0..d {
            let (row, phase) = self.column_action(col);
            m[(row, col)] = phase;
        }
        m
    }

    /// tr(m * sigma_s), contracted in O(dim^2) using the signed-permutation
    /// structure (one nonzero of sigma_s per column).
    pub fn trace_against(&self, m: &CMatrix) -> Result<Complex64> {
        let d = 1usize << self.factors.len();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, Pauli string needs {d}x{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..d {
            let (row, phase) = self.column_action(col);
            // (M sigma)_{col,col} = M_{col,row} sigma_{row,col}.
            acc += m[(col, row)] * phase;
        }
        Ok(acc)
    }
}

/// The full coefficient list of an operator on (n+1) time slots of k qubits,
/// indexed by base-4 string codes (time-major, qubit-minor slots).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    pub k: usize,
    pub n: usize,
    pub coeffs: Vec<Complex64>,
}

impl PauliCoefficients {
    pub fn num_slots(&self) -> usize {
        self.k * (self.n + 1)
    }

    pub fn coefficient(&self, s: &PauliString) -> Result<Complex64> {
        if s.len() != self.num_slots() {
            return Err(Error::ShapeMismatch(format!(
                "string has {} slots, expected {}",
                s.len(),
                self.num_slots()
            )));
        }
        let mut code = 0usize;
        for &f in s.factors() {
            code = (code << 2) | f as usize;
        }
        Ok(self.coeffs[code])
    }
}

fn require_qubit_algebra(alg: &AlgebraDescriptor) -> Result<usize> {
    if alg.num_blocks() != 1 {
        return Err(Error::NotQubitAlgebra(format!(
            "expected a single full matrix block, got {} blocks",
            alg.num_blocks()
        )));
    }
    let d = alg.dim(0);
    if d == 0 || (d & (d - 1)) != 0 {
        return Err(Error::NotQubitAlgebra(format!(
            "block dimension {d} is not a power of two"
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Builds the state over time of a qubit chain by the Jordan-product
/// recursion. Agrees with the symmetric n-step construction; both routes are
/// kept and cross-checked in tests.
pub fn pdo_recursive(chain: &ProcessChain) -> Result<AlgebraElement> {
    let algebras = chain.algebras();
    let k = require_qubit_algebra(&algebras[0])?;
    for alg in &algebras[1..] {
        if require_qubit_algebra(alg)? != k {
            return Err(Error::NotQubitAlgebra(
                "all time slots must carry the same number of qubits".into(),
            ));
        }
    }

    let n = chain.len();
    // R_1 on slots {0,1}; each further step tensors a fresh slot on the right.
    let mut r = bloom_apply(BloomKind::Symmetric, &chain.channels()[0], chain.rho())?;
    for m in 2..=n {
        let lifted = pad_element(&[], &r, &algebras[m..=m]);
        let jam = pad_element(
            &algebras[..m - 1],
            chain.channels()[m - 1].jamiolkowski_element(),
            &[],
        );
        r = jordan_product(&lifted, &jam)?;
    }
    Ok(r)
}

/// Expands an operator on (n+1) slots of k qubits in the Pauli-string basis.
pub fn pauli_coefficients(
    t: &AlgebraElement,
    k: usize,
    n: usize,
) -> Result<PauliCoefficients> {
    if k == 0 {
        return Err(Error::NotQubitAlgebra("k must be at least one qubit".into()));
    }
    let slots = k * (n + 1);
    if slots > 24 {
        return Err(Error::TooLarge(format!(
            "{slots} Pauli slots means 4^{slots} coefficients"
        )));
    }
    let d = 1usize << slots;
    if t.algebra().num_blocks() != 1 || t.algebra().dim(0) != d {
        return Err(Error::ShapeMismatch(format!(
            "element must be a single {d}x{d} block for k={k}, n={n}"
        )));
    }
    let block = t.block(0);
    let count = 1usize << (2 * slots);
    let mut coeffs = Vec::with_capacity(count);
    for code in 0..count {
        let s = PauliString::from_code(code, slots)?;
        coeffs.push(s.trace_against(block)?);
    }
    Ok(PauliCoefficients { k, n, coeffs })
}

/// Reassembles the operator from its coefficient list:
/// t = 2^{-slots} sum_s c_s sigma_s.
pub fn pdo_from_coefficients(c: &PauliCoefficients) -> Result<AlgebraElement> {
    let slots = c.num_slots();
    let d = 1usize << slots;
    let expected = 1usize << (2 * slots);
    if c.coeffs.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "expected {expected} coefficients, got {}",
            c.coeffs.len()
        )));
    }
    let norm = 1.0 / d as f64;
    let mut block = CMatrix::zeros(d, d);
    for (code, &coeff) in c.coeffs.iter().enumerate() {
        if coeff.norm() == 0.0 {
            continue;
        }
        let s = PauliString::from_code(code, slots)?;
        let w = coeff * Complex64::new(norm, 0.0);
        for col in 0..d {
            let (row, phase) = s.column_action(col);
            block[(row, col)] += w * phase;
        }
    }
    let label = format!("q^{slots}");
    AlgebraElement::new(AlgebraDescriptor::matrix(&label, d)?, vec![block])
}

/// Negativity data for a self-adjoint operator: the least eigenvalue and the
/// total mass on the negative part of the spectrum.
#[derive(Debug, Clone)]
pub struct NegativityWitness {
    pub min_eigenvalue: f64,
    pub negativity: f64,
}

pub fn negativity_witness(t: &AlgebraElement, tol: f64) -> Result<NegativityWitness> {
    if !t.is_selfadjoint(tol) {
        return Err(Error::NotSelfAdjoint(
            "negativity is defined for self-adjoint operators".into(),
        ));
    }
    let eigs = t.eigenvalues();
    let min_eigenvalue = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let negativity = eigs.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok(NegativityWitness { min_eigenvalue, negativity })
}

/// Convenience: the factorization of (n+1) k-qubit slots used by
/// [`pauli_coefficients`] callers that start from a chain.
pub fn qubit_slots(k: usize, n: usize) -> Result<TensorFactorization> {
    if k == 0 {
        return Err(Error::NotQubitAlgebra("k must be at least one qubit".into()));
    }
    let factors = (0..=n)
        .map(|i| AlgebraDescriptor::matrix(&format!("t{i}"), 1 << k))
        .collect::<Result<Vec<_>>>()?;
    TensorFactorization::new(factors)
}
