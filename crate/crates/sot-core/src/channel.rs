//! Linear maps between multi-matrix algebras.
//!
//! A map E: A -> B is stored through its component functions E_yx, one per
//! (domain block x, codomain block y) pair, each as a dense action matrix on
//! row-major vectorized inputs: vec(M)[i*d + j] = M[(i, j)]. Composition is
//! then plain matrix multiplication; the Jamiolkowski and Choi matrices are
//! derived views.

use nalgebra::DVector;
use once_cell::sync::OnceCell;

use crate::algebra::{
    hermitian_eigenvalues, partial_trace, tensor_elements, AlgebraDescriptor, AlgebraElement,
    CMatrix, TensorFactorization,
};
use crate::{Complex64, Error, Result};

/// A linear map between multi-matrix algebras.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    domain: AlgebraDescriptor,
    codomain: AlgebraDescriptor,
    /// Component action matrices, indexed `x * codomain.num_blocks() + y`;
    /// the (x, y) entry has shape (n_y^2, m_x^2).
    components: Vec<CMatrix>,
    /// Lazily computed Jamiolkowski matrix. Population is idempotent; racing
    /// initializers compute the same value.
    jam: OnceCell<AlgebraElement>,
}

impl PartialEq for SuperOperator {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.codomain == other.codomain
            && self.components == other.components
    }
}

/// The Jamiolkowski matrix of a map, tagged with the map's endpoints. Lives on
/// the composite algebra `domain (x) codomain`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub value: AlgebraElement,
    pub domain: AlgebraDescriptor,
    pub codomain: AlgebraDescriptor,
}

impl SuperOperator {
    pub fn new(
        domain: AlgebraDescriptor,
        codomain: AlgebraDescriptor,
        components: Vec<CMatrix>,
    ) -> Result<Self> {
        let nx = domain.num_blocks();
        let ny = codomain.num_blocks();
        if components.len() != nx * ny {
            return Err(Error::ShapeMismatch(format!(
                "expected {} component matrices, got {}",
                nx * ny,
                components.len()
            )));
        }
        for x in 0..nx {
            for y in 0..ny {
                let k = &components[x * ny + y];
                let (rows, cols) = (codomain.dim(y).pow(2), domain.dim(x).pow(2));
                if k.nrows() != rows || k.ncols() != cols {
                    return Err(Error::ShapeMismatch(format!(
                        "component ({x},{y}) has shape {}x{}, expected {rows}x{cols}",
                        k.nrows(),
                        k.ncols()
                    )));
                }
            }
        }
        Ok(Self { domain, codomain, components, jam: OnceCell::new() })
    }

    /// Builds the map from its action on the matrix-unit basis of the domain.
    pub fn from_function<F>(
        domain: AlgebraDescriptor,
        codomain: AlgebraDescriptor,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(&AlgebraElement) -> Result<AlgebraElement>,
    {
        let nx = domain.num_blocks();
        let ny = codomain.num_blocks();
        let mut components = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                components.push(CMatrix::zeros(codomain.dim(y).pow(2), domain.dim(x).pow(2)));
            }
        }
        for x in 0..nx {
            let mx = domain.dim(x);
            for i in 0..mx {
                for j in 0..mx {
                    let e = AlgebraElement::matrix_unit(domain.clone(), x, i, j);
                    let out = f(&e)?;
                    if !out.algebra().dims_match(&codomain) {
                        return Err(Error::AlgebraMismatch(
                            "function output does not live on the declared codomain".into(),
                        ));
                    }
                    for y in 0..ny {
                        let nyd = codomain.dim(y);
                        let dst = &mut components[x * ny + y];
                        let src = out.block(y);
                        for a in 0..nyd {
                            for b in 0..nyd {
                                dst[(a * nyd + b, i * mx + j)] = src[(a, b)];
                            }
                        }
                    }
                }
            }
        }
        Self::new(domain, codomain, components)
    }

    pub fn domain(&self) -> &AlgebraDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &AlgebraDescriptor {
        &self.codomain
    }

    pub fn components(&self) -> &[CMatrix] {
        &self.components
    }

    pub fn component(&self, x: usize, y: usize) -> &CMatrix {
        &self.components[x * self.codomain.num_blocks() + y]
    }

    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if !x.algebra().dims_match(&self.domain) {
            return Err(Error::AlgebraMismatch(
                "element does not live on the map's domain".into(),
            ));
        }
        let ny = self.codomain.num_blocks();
        let mut out = AlgebraElement::zero(self.codomain.clone());
        for (xb, block) in x.blocks().iter().enumerate() {
            let mx = self.domain.dim(xb);
            let v = DVector::from_fn(mx * mx, |idx, _| block[(idx / mx, idx % mx)]);
            for y in 0..ny {
                let nyd = self.codomain.dim(y);
                let w = &self.components[xb * ny + y] * &v;
                let dst = out.block_mut(y);
                for a in 0..nyd {
                    for b in 0..nyd {
                        dst[(a, b)] += w[a * nyd + b];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Composition `self` after `e` (so `compose` as a free function reads
    /// `compose(f, e) = f . e`).
    pub fn compose_after(&self, e: &SuperOperator) -> Result<SuperOperator> {
        if !e.codomain.dims_match(&self.domain) {
            return Err(Error::AlgebraMismatch(format!(
                "cannot compose: inner codomain has {} blocks of dims {:?}, outer domain {:?}",
                e.codomain.num_blocks(),
                e.codomain.blocks().iter().map(|(_, d)| *d).collect::<Vec<_>>(),
                self.domain.blocks().iter().map(|(_, d)| *d).collect::<Vec<_>>()
            )));
        }
        let nx = e.domain.num_blocks();
        let nyi = e.codomain.num_blocks();
        let nz = self.codomain.num_blocks();
        let mut components = Vec::with_capacity(nx * nz);
        for x in 0..nx {
            for z in 0..nz {
                let mut k = CMatrix::zeros(self.codomain.dim(z).pow(2), e.domain.dim(x).pow(2));
                for y in 0..nyi {
                    k += &self.components[y * nz + z] * &e.components[x * nyi + y];
                }
                components.push(k);
            }
        }
        SuperOperator::new(e.domain.clone(), self.codomain.clone(), components)
    }

    pub fn hs_dual(&self) -> SuperOperator {
        let nx = self.domain.num_blocks();
        let ny = self.codomain.num_blocks();
        let mut components = Vec::with_capacity(nx * ny);
        for y in 0..ny {
            for x in 0..nx {
                components.push(self.components[x * ny + y].adjoint());
            }
        }
        SuperOperator::new(self.codomain.clone(), self.domain.clone(), components)
            .expect("dual shapes are transposes of valid shapes")
    }

    /// The Jamiolkowski matrix as a cached element of `domain (x) codomain`.
    pub fn jamiolkowski_element(&self) -> &AlgebraElement {
        self.jam.get_or_init(|| {
            let composite = self.domain.tensor(&self.codomain);
            let ny = self.codomain.num_blocks();
            let mut out = AlgebraElement::zero(composite);
            for x in 0..self.domain.num_blocks() {
                let mx = self.domain.dim(x);
                for y in 0..ny {
                    let nyd = self.codomain.dim(y);
                    let k = &self.components[x * ny + y];
                    let dst = out.block_mut(x * ny + y);
                    for i in 0..mx {
                        for j in 0..mx {
                            for a in 0..nyd {
                                for b in 0..nyd {
                                    // Sum over matrix units: E_ij (x) E(E_ji).
                                    dst[(i * nyd + a, j * nyd + b)] =
                                        k[(a * nyd + b, j * mx + i)];
                                }
                            }
                        }
                    }
                }
            }
            out
        })
    }

    pub fn jamiolkowski(&self) -> ChannelState {
        ChannelState {
            value: self.jamiolkowski_element().clone(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }

    /// The Choi matrix: same rearrangement as the Jamiolkowski matrix but
    /// summing E_ij (x) E(E_ij). Positive semidefinite iff the map is CP.
    pub fn choi_matrix(&self) -> AlgebraElement {
        let composite = self.domain.tensor(&self.codomain);
        let ny = self.codomain.num_blocks();
        let mut out = AlgebraElement::zero(composite);
        for x in 0..self.domain.num_blocks() {
            let mx = self.domain.dim(x);
            for y in 0..ny {
                let nyd = self.codomain.dim(y);
                let k = &self.components[x * ny + y];
                let dst = out.block_mut(x * ny + y);
                for i in 0..mx {
                    for j in 0..mx {
                        for a in 0..nyd {
                            for b in 0..nyd {
                                dst[(i * nyd + a, j * nyd + b)] = k[(a * nyd + b, i * mx + j)];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn distance(&self, other: &SuperOperator) -> f64 {
        self.components
            .iter()
            .zip(other.components.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &SuperOperator, tol: f64) -> bool {
        self.domain.dims_match(&other.domain)
            && self.codomain.dims_match(&other.codomain)
            && self.distance(other) <= tol
    }

    // Named constructors.

    pub fn identity(algebra: AlgebraDescriptor) -> Self {
        Self::from_function(algebra.clone(), algebra, |x| Ok(x.clone()))
            .expect("identity construction cannot fail")
    }

    /// The trace map into the trivial one-dimensional algebra.
    pub fn full_trace_map(domain: AlgebraDescriptor) -> Self {
        let codomain = AlgebraDescriptor::matrix("1", 1).expect("trivial algebra");
        Self::from_function(domain, codomain.clone(), move |x| {
            let mut out = AlgebraElement::zero(codomain.clone());
            out.block_mut(0)[(0, 0)] = x.trace();
            Ok(out)
        })
        .expect("trace construction cannot fail")
    }

    /// Partial trace over the factors of `fact` not in `keep`, as a map.
    pub fn partial_trace_map(fact: &TensorFactorization, keep: &[usize]) -> Result<Self> {
        let sub = fact.sub_factorization(keep)?;
        let fact = fact.clone();
        let keep = keep.to_vec();
        Self::from_function(fact.composite().clone(), sub.composite().clone(), move |x| {
            partial_trace(x, &fact, &keep)
        })
    }

    /// Depolarizing channel on a single matrix block:
    /// rho -> (1-p) rho + p tr(rho) 1/d.
    pub fn depolarizing(algebra: AlgebraDescriptor, p: f64) -> Result<Self> {
        if algebra.num_blocks() != 1 {
            return Err(Error::InvalidAlgebra(
                "depolarizing channel is defined on a single matrix block".into(),
            ));
        }
        let d = algebra.dim(0);
        let scale = Complex64::new(p / d as f64, 0.0);
        let keep = Complex64::new(1.0 - p, 0.0);
        Self::from_function(algebra.clone(), algebra.clone(), move |x| {
            let mixed = AlgebraElement::unit(algebra.clone()).scale(scale * x.trace());
            x.scale(keep).add(&mixed)
        })
    }

    /// Dephasing: rho -> (1-p) rho + p diag(rho), blockwise.
    pub fn dephasing(algebra: AlgebraDescriptor, p: f64) -> Result<Self> {
        let keep = Complex64::new(1.0 - p, 0.0);
        let pc = Complex64::new(p, 0.0);
        Self::from_function(algebra.clone(), algebra, move |x| {
            let mut out = x.scale(keep);
            for (bi, src) in x.blocks().iter().enumerate() {
                let dst = out.block_mut(bi);
                for i in 0..src.nrows() {
                    dst[(i, i)] += pc * src[(i, i)];
                }
            }
            Ok(out)
        })
    }

    /// Conjugation rho -> u rho u^dagger by a blockwise unitary element.
    pub fn unitary_conjugation(u: &AlgebraElement) -> Result<Self> {
        let unit = AlgebraElement::unit(u.algebra().clone());
        if u.mul(&u.dagger())?.distance(&unit) > 1e-8 {
            return Err(Error::InvalidElement("conjugating element is not unitary".into()));
        }
        let u = u.clone();
        let ud = u.dagger();
        Self::from_function(u.algebra().clone(), u.algebra().clone(), move |x| {
            u.mul(x)?.mul(&ud)
        })
    }

    /// Discard-and-prepare: rho -> tr(rho) sigma.
    pub fn state_preparation(domain: AlgebraDescriptor, sigma: &AlgebraElement) -> Result<Self> {
        let sigma = sigma.clone();
        Self::from_function(domain, sigma.algebra().clone(), move |x| Ok(sigma.scale(x.trace())))
    }
}

pub fn compose(f: &SuperOperator, e: &SuperOperator) -> Result<SuperOperator> {
    f.compose_after(e)
}

/// Tensor product of maps, acting factorwise on `domain(e) (x) domain(f)`.
pub fn tensor(e: &SuperOperator, f: &SuperOperator) -> SuperOperator {
    let domain = e.domain().tensor(f.domain());
    let codomain = e.codomain().tensor(f.codomain());
    let (xf, yf) = (f.domain().num_blocks(), f.codomain().num_blocks());
    let ye = e.codomain().num_blocks();
    let ny = codomain.num_blocks();
    let mut components = Vec::with_capacity(domain.num_blocks() * ny);
    for x in 0..e.domain().num_blocks() {
        let mx = e.domain().dim(x);
        for c in 0..xf {
            let mc = f.domain().dim(c);
            for y in 0..ye {
                let nyd = e.codomain().dim(y);
                for d in 0..yf {
                    let nd = f.codomain().dim(d);
                    let ke = e.component(x, y);
                    let kf = f.component(c, d);
                    let mut k = CMatrix::zeros((nyd * nd).pow(2), (mx * mc).pow(2));
                    // Row-major vectorization does not turn the Kronecker of
                    // maps into a Kronecker of action matrices; the index
                    // interleaving below is the required reshuffle.
                    for ip in 0..nyd {
                        for jp in 0..nyd {
                            for ap in 0..nd {
                                for bp in 0..nd {
                                    let row = (ip * nd + ap) * nyd * nd + (jp * nd + bp);
                                    for i in 0..mx {
                                        for j in 0..mx {
                                            for a in 0..mc {
                                                for b in 0..mc {
                                                    let col =
                                                        (i * mc + a) * mx * mc + (j * mc + b);
                                                    k[(row, col)] = ke[(ip * nyd + jp, i * mx + j)]
                                                        * kf[(ap * nd + bp, a * mc + b)];
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    components.push(k);
                }
            }
        }
    }
    SuperOperator::new(domain, codomain, components).expect("tensor shapes are consistent")
}

pub fn hs_dual(e: &SuperOperator) -> SuperOperator {
    e.hs_dual()
}

pub fn jamiolkowski(e: &SuperOperator) -> ChannelState {
    e.jamiolkowski()
}

pub fn choi_matrix(e: &SuperOperator) -> AlgebraElement {
    e.choi_matrix()
}

/// Inverse of the Jamiolkowski rearrangement: the map
/// rho -> tr_A((rho (x) 1) t) for t over a declared two-factor algebra.
pub fn jamiolkowski_inverse(
    t: &AlgebraElement,
    fact: &TensorFactorization,
) -> Result<SuperOperator> {
    if fact.num_factors() != 2 {
        return Err(Error::AlgebraMismatch(format!(
            "jamiolkowski_inverse needs a two-factor algebra, got {} factors",
            fact.num_factors()
        )));
    }
    if !t.algebra().dims_match(fact.composite()) {
        return Err(Error::AlgebraMismatch(
            "element does not live on the factorization's composite algebra".into(),
        ));
    }
    let domain = fact.factor(0).clone();
    let codomain = fact.factor(1).clone();
    let t = t.clone();
    let fact = fact.clone();
    let unit_b = AlgebraElement::unit(codomain.clone());
    SuperOperator::from_function(domain, codomain, move |rho| {
        let lifted = tensor_elements(rho, &unit_b);
        partial_trace(&lifted.mul(&t)?, &fact, &[1])
    })
}

/// Verification report for a map: trace preservation, dagger preservation
/// (direct basis check and Jamiolkowski self-adjointness, which must agree),
/// and complete positivity via the Choi spectrum.
#[derive(Debug, Clone)]
pub struct ChannelReport {
    pub trace_preserving: bool,
    /// Max deviation of hs_dual(e)(1) from 1.
    pub tp_deviation: f64,
    pub dagger_preserving: bool,
    /// Max deviation of e(a^dag)^dag from e(a) over the matrix-unit basis.
    pub dagger_direct_deviation: f64,
    pub jam_selfadjoint: bool,
    pub jam_deviation: f64,
    /// The two dagger-preservation routes should always agree; a false here
    /// would falsify the self-adjointness characterization.
    pub dagger_checks_agree: bool,
    pub completely_positive: bool,
    pub choi_min_eigenvalue: f64,
    pub choi_hermiticity_deviation: f64,
    pub cptp: bool,
}

pub fn verify(e: &SuperOperator, tol: f64) -> ChannelReport {
    // Trace preservation: the dual must fix the unit.
    let dual = e.hs_dual();
    let unit_cod = AlgebraElement::unit(e.codomain().clone());
    let unit_dom = AlgebraElement::unit(e.domain().clone());
    let tp_deviation = dual
        .apply(&unit_cod)
        .map(|u| u.distance(&unit_dom))
        .unwrap_or(f64::INFINITY);
    let trace_preserving = tp_deviation <= tol;

    // Dagger preservation, route one: directly on the matrix-unit basis.
    let mut dagger_direct_deviation: f64 = 0.0;
    for x in 0..e.domain().num_blocks() {
        let mx = e.domain().dim(x);
        for i in 0..mx {
            for j in 0..mx {
                let eij = AlgebraElement::matrix_unit(e.domain().clone(), x, i, j);
                let eji = AlgebraElement::matrix_unit(e.domain().clone(), x, j, i);
                let lhs = e.apply(&eij).expect("domain element").dagger();
                let rhs = e.apply(&eji).expect("domain element");
                dagger_direct_deviation = dagger_direct_deviation.max(lhs.distance(&rhs));
            }
        }
    }
    let dagger_direct = dagger_direct_deviation <= tol;

    // Route two: self-adjointness of the Jamiolkowski matrix.
    let jam = e.jamiolkowski_element();
    let jam_deviation = jam.distance(&jam.dagger());
    let jam_selfadjoint = jam_deviation <= tol;

    // Complete positivity: Choi spectrum of the Hermitian part.
    let choi = e.choi_matrix();
    let choi_dag = choi.dagger();
    let choi_hermiticity_deviation = choi.distance(&choi_dag);
    let herm = choi
        .add(&choi_dag)
        .expect("same algebra")
        .scale(Complex64::new(0.5, 0.0));
    let choi_min_eigenvalue = herm
        .blocks()
        .iter()
        .flat_map(hermitian_eigenvalues)
        .fold(f64::INFINITY, f64::min);
    let completely_positive =
        choi_hermiticity_deviation <= tol && choi_min_eigenvalue >= -tol;

    ChannelReport {
        trace_preserving,
        tp_deviation,
        dagger_preserving: dagger_direct && jam_selfadjoint,
        dagger_direct_deviation,
        jam_selfadjoint,
        jam_deviation,
        dagger_checks_agree: dagger_direct == jam_selfadjoint,
        completely_positive,
        choi_min_eigenvalue,
        choi_hermiticity_deviation,
        cptp: trace_preserving && completely_positive,
    }
}

impl SuperOperator {
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        verify(self, tol).trace_preserving
    }

    pub fn is_dagger_preserving(&self, tol: f64) -> bool {
        verify(self, tol).dagger_preserving
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        verify(self, tol).completely_positive
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        let r = verify(self, tol);
        r.cptp
    }
}
