//! Classical probability embedded in the multi-matrix formalism.
//!
//! Stochastic maps and probability distributions are stored in their own
//! terms, then embedded as channels and states on commutative (all 1x1 block)
//! algebras. The embedding reuses every quantum code path, so the classical
//! results double as integration checks of the general machinery.

use nalgebra::DMatrix;

use crate::algebra::{AlgebraDescriptor, AlgebraElement};
use crate::bloom::{bloom_apply, BloomKind};
use crate::channel::SuperOperator;
use crate::{Complex64, Error, Result, DEFAULT_TOL};

/// Marginal weights at or below this are treated as zero when dividing.
pub const SINGULAR_MARGINAL_TOL: f64 = 1e-12;

/// A column-stochastic map f: X -> Y, entries f_yx = P(y | x).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMap {
    source: Vec<String>,
    target: Vec<String>,
    /// Row y, column x.
    probs: DMatrix<f64>,
}

impl StochasticMap {
    pub fn new<L: Into<String>>(
        source: Vec<L>,
        target: Vec<L>,
        probs: DMatrix<f64>,
    ) -> Result<Self> {
        let source: Vec<String> = source.into_iter().map(Into::into).collect();
        let target: Vec<String> = target.into_iter().map(Into::into).collect();
        if probs.nrows() != target.len() || probs.ncols() != source.len() {
            return Err(Error::ShapeMismatch(format!(
                "probability matrix is {}x{}, expected {}x{}",
                probs.nrows(),
                probs.ncols(),
                target.len(),
                source.len()
            )));
        }
        for v in probs.iter() {
            if !(-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(v) {
                return Err(Error::InvalidElement(format!(
                    "conditional probability {v} outside [0, 1]"
                )));
            }
        }
        for x in 0..source.len() {
            let sum: f64 = probs.column(x).sum();
            if (sum - 1.0).abs() > DEFAULT_TOL {
                return Err(Error::InvalidElement(format!(
                    "column {x} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { source, target, probs })
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }

    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.probs[(y, x)]
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn source_algebra(&self) -> AlgebraDescriptor {
        AlgebraDescriptor::classical(self.source.clone()).expect("validated label set")
    }

    pub fn target_algebra(&self) -> AlgebraDescriptor {
        AlgebraDescriptor::classical(self.target.clone()).expect("validated label set")
    }
}

/// A (quasi-)probability distribution on a finite label set. `quasi` relaxes
/// nonnegativity; unit total mass is always required.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    set: Vec<String>,
    weights: Vec<f64>,
    quasi: bool,
}

impl ProbDist {
    pub fn new<L: Into<String>>(set: Vec<L>, weights: Vec<f64>) -> Result<Self> {
        let d = Self::build(set, weights, false)?;
        if let Some(w) = d.weights.iter().find(|w| **w < -DEFAULT_TOL) {
            return Err(Error::InvalidElement(format!("negative weight {w}")));
        }
        Ok(d)
    }

    pub fn new_quasi<L: Into<String>>(set: Vec<L>, weights: Vec<f64>) -> Result<Self> {
        Self::build(set, weights, true)
    }

    fn build<L: Into<String>>(set: Vec<L>, weights: Vec<f64>, quasi: bool) -> Result<Self> {
        let set: Vec<String> = set.into_iter().map(Into::into).collect();
        if set.len() != weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels vs {} weights",
                set.len(),
                weights.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidElement(format!("total mass {total}, expected 1")));
        }
        Ok(Self { set, weights, quasi })
    }

    pub fn set(&self) -> &[String] {
        &self.set
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_quasi(&self) -> bool {
        self.quasi
    }

    pub fn algebra(&self) -> AlgebraDescriptor {
        AlgebraDescriptor::classical(self.set.clone()).expect("validated label set")
    }

    /// The distribution as a diagonal element of its classical algebra.
    pub fn to_element(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zero(self.algebra());
        for (i, w) in self.weights.iter().enumerate() {
            out.block_mut(i)[(0, 0)] = Complex64::new(*w, 0.0);
        }
        out
    }

    /// Reads a classical element back as a distribution. Imaginary parts must
    /// vanish; negative weights flip the quasi flag on.
    pub fn from_element(x: &AlgebraElement) -> Result<Self> {
        if !x.algebra().is_classical() {
            return Err(Error::NotClassical("element has a block of dim > 1".into()));
        }
        let mut weights = Vec::with_capacity(x.algebra().num_blocks());
        for b in x.blocks() {
            let v = b[(0, 0)];
            if v.im.abs() > DEFAULT_TOL {
                return Err(Error::InvalidElement(format!(
                    "classical weight has imaginary part {}",
                    v.im
                )));
            }
            weights.push(v.re);
        }
        let labels: Vec<String> = x.algebra().blocks().iter().map(|(l, _)| l.clone()).collect();
        let quasi = weights.iter().any(|w| *w < -DEFAULT_TOL);
        Self::build(labels, weights, quasi)
    }
}

/// Embeds a stochastic map as a channel on commutative algebras:
/// delta_x -> sum_y f_yx delta_y.
pub fn q_embed(f: &StochasticMap) -> SuperOperator {
    let domain = f.source_algebra();
    let codomain = f.target_algebra();
    let ny = f.target.len();
    let probs = f.probs.clone();
    SuperOperator::from_function(domain, codomain.clone(), move |x| {
        let mut out = AlgebraElement::zero(codomain.clone());
        for (xi, b) in x.blocks().iter().enumerate() {
            let v = b[(0, 0)];
            for y in 0..ny {
                out.block_mut(y)[(0, 0)] += Complex64::new(probs[(y, xi)], 0.0) * v;
            }
        }
        Ok(out)
    })
    .expect("classical embedding cannot fail")
}

/// Reads the conditional probabilities back off a classical channel.
pub fn conditional_probabilities(e: &SuperOperator) -> Result<StochasticMap> {
    if !e.domain().is_classical() || !e.codomain().is_classical() {
        return Err(Error::NotClassical("channel endpoints must be commutative".into()));
    }
    let nx = e.domain().num_blocks();
    let ny = e.codomain().num_blocks();
    let mut probs = DMatrix::zeros(ny, nx);
    for x in 0..nx {
        for y in 0..ny {
            let v = e.component(x, y)[(0, 0)];
            if v.im.abs() > DEFAULT_TOL {
                return Err(Error::NotClassical(format!(
                    "component ({x},{y}) has imaginary part {}",
                    v.im
                )));
            }
            probs[(y, x)] = v.re;
        }
    }
    let source: Vec<String> = e.domain().blocks().iter().map(|(l, _)| l.clone()).collect();
    let target: Vec<String> = e.codomain().blocks().iter().map(|(l, _)| l.clone()).collect();
    StochasticMap::new(source, target, probs)
}

/// The classical bloom C^X -> C^X (x) C^Y, built directly from the component
/// scalars: delta_x -> sum_y E_yx (delta_x (x) delta_y).
pub fn classical_bloom(e: &SuperOperator) -> Result<SuperOperator> {
    if !e.domain().is_classical() || !e.codomain().is_classical() {
        return Err(Error::NotClassical(
            "classical bloom needs commutative endpoints".into(),
        ));
    }
    let domain = e.domain().clone();
    let codomain = domain.tensor(e.codomain());
    let nx = domain.num_blocks();
    let ny = e.codomain().num_blocks();
    let mut scalars = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            scalars.push(e.component(x, y)[(0, 0)]);
        }
    }
    SuperOperator::from_function(domain, codomain.clone(), move |rho| {
        let mut out = AlgebraElement::zero(codomain.clone());
        for x in 0..nx {
            let v = rho.block(x)[(0, 0)];
            for y in 0..ny {
                // Composite block (x, y) sits at index x * ny + y.
                out.block_mut(x * ny + y)[(0, 0)] += scalars[x * ny + y] * v;
            }
        }
        Ok(out)
    })
}

/// The joint distribution P(x, y) = P(x) P(y | x), labels joined x-major.
pub fn classical_state_over_time(rho: &ProbDist, f: &StochasticMap) -> Result<ProbDist> {
    if rho.set() != f.source() {
        return Err(Error::ChainMismatch(
            "distribution labels differ from the map's source".into(),
        ));
    }
    let mut labels = Vec::with_capacity(rho.set.len() * f.target.len());
    let mut weights = Vec::with_capacity(labels.capacity());
    for (x, lx) in rho.set.iter().enumerate() {
        for (y, ly) in f.target.iter().enumerate() {
            labels.push(crate::algebra::join_labels(&[lx, ly]));
            weights.push(rho.weights[x] * f.probs[(y, x)]);
        }
    }
    if rho.is_quasi() {
        ProbDist::new_quasi(labels, weights)
    } else {
        ProbDist::new(labels, weights)
    }
}

/// Inverts a joint distribution over X x Y (x-major weight order) into its
/// X-marginal and the conditional stochastic map.
pub fn classical_extract(
    joint: &ProbDist,
    source: &[String],
    target: &[String],
) -> Result<(ProbDist, StochasticMap)> {
    let (nx, ny) = (source.len(), target.len());
    if joint.weights.len() != nx * ny {
        return Err(Error::ShapeMismatch(format!(
            "joint has {} weights, expected {}x{}",
            joint.weights.len(),
            nx,
            ny
        )));
    }
    let mut marginal = vec![0.0; nx];
    for x in 0..nx {
        for y in 0..ny {
            marginal[x] += joint.weights[x * ny + y];
        }
    }
    let mut probs = DMatrix::zeros(ny, nx);
    for (x, m) in marginal.iter().enumerate() {
        if *m <= SINGULAR_MARGINAL_TOL {
            return Err(Error::SingularMarginal(format!(
                "marginal weight {m} at '{}'",
                source[x]
            )));
        }
        for y in 0..ny {
            probs[(y, x)] = joint.weights[x * ny + y] / m;
        }
    }
    let rho = ProbDist::new(source.to_vec(), marginal)?;
    let f = StochasticMap::new(source.to_vec(), target.to_vec(), probs)?;
    Ok((rho, f))
}

/// True when (rho (x) 1) commutes with J[e], in which case every bloom kind
/// produces the same state over time (and this is double-checked).
pub fn check_classical_reduction(
    rho: &AlgebraElement,
    e: &SuperOperator,
    tol: f64,
) -> Result<bool> {
    let jam = e.jamiolkowski_element();
    let lifted = crate::algebra::tensor_elements(rho, &AlgebraElement::unit(e.codomain().clone()));
    let commutator = lifted.mul(jam)?.sub(&jam.mul(&lifted)?)?;
    let commutes = commutator.max_abs() <= tol;
    if commutes {
        let right = bloom_apply(BloomKind::Right, e, rho)?;
        let left = bloom_apply(BloomKind::Left, e, rho)?;
        let sym = bloom_apply(BloomKind::Symmetric, e, rho)?;
        // The right-left gap is the commutator itself, so these can only fire
        // if the implementations drift apart.
        if right.distance(&left) > 2.0 * tol || right.distance(&sym) > 2.0 * tol {
            return Err(Error::Numerical(
                "blooms disagree despite a vanishing commutator".into(),
            ));
        }
    }
    Ok(commutes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{partial_trace, TensorFactorization, ONE};
    use crate::channel::verify;

    fn bit_flip(p: f64) -> StochasticMap {
        StochasticMap::new(
            vec!["0", "1"],
            vec!["0", "1"],
            DMatrix::from_row_slice(2, 2, &[1.0 - p, p, p, 1.0 - p]),
        )
        .unwrap()
    }

    fn half_half() -> ProbDist {
        ProbDist::new(vec!["0", "1"], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn stochastic_map_validation() {
        assert!(StochasticMap::new(
            vec!["a"],
            vec!["b"],
            DMatrix::from_row_slice(1, 1, &[0.5])
        )
        .is_err());
        assert!(StochasticMap::new(
            vec!["a", "b"],
            vec!["c"],
            DMatrix::from_row_slice(1, 1, &[1.0])
        )
        .is_err());
        assert!(bit_flip(0.25).prob(1, 0) == 0.25);
    }

    #[test]
    fn dist_validation_and_quasi() {
        assert!(ProbDist::new(vec!["a", "b"], vec![0.6, 0.6]).is_err());
        assert!(ProbDist::new(vec!["a", "b"], vec![1.2, -0.2]).is_err());
        let q = ProbDist::new_quasi(vec!["a", "b"], vec![1.2, -0.2]).unwrap();
        assert!(q.is_quasi());
        let rt = ProbDist::from_element(&q.to_element()).unwrap();
        assert_eq!(rt.weights(), q.weights());
    }

    #[test]
    fn q_embed_identity_permutation() {
        let id_map = StochasticMap::new(
            vec!["0", "1"],
            vec!["0", "1"],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let e = q_embed(&id_map);
        let alg = AlgebraDescriptor::classical(vec!["0", "1"]).unwrap();
        assert!(e.approx_eq(&SuperOperator::identity(alg), 1e-15));
    }

    #[test]
    fn q_embed_bit_flip_components() {
        let e = q_embed(&bit_flip(0.25));
        assert!((e.component(0, 0)[(0, 0)] - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        assert!((e.component(0, 1)[(0, 0)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((e.component(1, 0)[(0, 0)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((e.component(1, 1)[(0, 0)] - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        let d0 = AlgebraElement::delta(e.domain().clone(), 0);
        let out = e.apply(&d0).unwrap();
        assert!((out.block(0)[(0, 0)].re - 0.75).abs() < 1e-15);
        assert!((out.block(1)[(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn q_embed_constant_map() {
        let f = StochasticMap::new(
            vec!["0", "1"],
            vec!["a", "b"],
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]),
        )
        .unwrap();
        let e = q_embed(&f);
        for x in 0..2 {
            let d = AlgebraElement::delta(e.domain().clone(), x);
            let out = e.apply(&d).unwrap();
            assert!((out.block(0)[(0, 0)] - ONE).norm() < 1e-15);
            assert!(out.block(1)[(0, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn q_embed_is_cptp() {
        let report = verify(&q_embed(&bit_flip(0.3)), 1e-9);
        assert!(report.cptp);
        assert!(report.dagger_preserving);
    }

    #[test]
    fn q_embed_round_trips_conditionals() {
        let f = bit_flip(0.37);
        let back = conditional_probabilities(&q_embed(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn classical_bloom_of_copy() {
        let id_map = StochasticMap::new(
            vec!["0", "1"],
            vec!["0", "1"],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let bl = classical_bloom(&q_embed(&id_map)).unwrap();
        let joint = bl.apply(&half_half().to_element()).unwrap();
        let d = ProbDist::from_element(&joint).unwrap();
        assert_eq!(d.set(), ["0⊗0", "0⊗1", "1⊗0", "1⊗1"]);
        let expect = [0.5, 0.0, 0.0, 0.5];
        for (w, e) in d.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_bloom_of_bit_flip_is_the_product_joint() {
        let bl = classical_bloom(&q_embed(&bit_flip(0.25))).unwrap();
        let joint = bl.apply(&half_half().to_element()).unwrap();
        let d = ProbDist::from_element(&joint).unwrap();
        let expect = [0.375, 0.125, 0.125, 0.375];
        for (w, e) in d.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_bloom_on_a_point_mass() {
        let f = bit_flip(0.2);
        let e = q_embed(&f);
        let bl = classical_bloom(&e).unwrap();
        let d0 = AlgebraElement::delta(e.domain().clone(), 0);
        let out = bl.apply(&d0).unwrap();
        // delta_0 blooms to sum_y f_y0 (delta_0 (x) delta_y).
        for y in 0..2 {
            assert!((out.block(y)[(0, 0)].re - f.prob(y, 0)).abs() < 1e-15);
        }
        assert!(out.block(2)[(0, 0)].norm() < 1e-15);
        assert!(out.block(3)[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn classical_bloom_agrees_with_quantum_bloom() {
        let e = q_embed(&bit_flip(0.4));
        let direct = classical_bloom(&e).unwrap();
        let via_quantum = crate::bloom::bloom_as_map(BloomKind::Symmetric, &e);
        assert!(direct.approx_eq(&via_quantum, 1e-14));
    }

    #[test]
    fn classical_bloom_rejects_matrix_blocks() {
        let m2 = AlgebraDescriptor::matrix("q", 2).unwrap();
        let res = classical_bloom(&SuperOperator::identity(m2));
        assert!(matches!(res, Err(Error::NotClassical(_))));
    }

    #[test]
    fn joint_marginals() {
        let rho = half_half();
        let f = bit_flip(0.25);
        let joint = classical_state_over_time(&rho, &f).unwrap();
        let elem = joint.to_element();
        let fact = TensorFactorization::new(vec![rho.algebra(), f.target_algebra()]).unwrap();
        let first = partial_trace(&elem, &fact, &[0]).unwrap();
        assert!(first.approx_eq(&rho.to_element(), 1e-15));
        let second = partial_trace(&elem, &fact, &[1]).unwrap();
        // Pushforward: P(y) = sum_x f_yx p_x = 1/2 each here.
        assert!(second.approx_eq(&half_half().to_element(), 1e-15));
    }

    #[test]
    fn extract_bit_flip_joint() {
        // Oracle: divide each weight by its row marginal, by hand.
        let weights = [0.375_f64, 0.125, 0.125, 0.375];
        let marg = [weights[0] + weights[1], weights[2] + weights[3]];
        let oracle = [
            [weights[0] / marg[0], weights[2] / marg[1]],
            [weights[1] / marg[0], weights[3] / marg[1]],
        ];
        assert!((oracle[0][0] - 0.75).abs() < 1e-15);
        assert!((oracle[1][0] - 0.25).abs() < 1e-15);

        let labels: Vec<String> = ["0⊗0", "0⊗1", "1⊗0", "1⊗1"].map(String::from).to_vec();
        let joint = ProbDist::new(labels, weights.to_vec()).unwrap();
        let src: Vec<String> = ["0", "1"].map(String::from).to_vec();
        let (rho, f) = classical_extract(&joint, &src, &src).unwrap();
        assert!((rho.weights()[0] - 0.5).abs() < 1e-15);
        for y in 0..2 {
            for x in 0..2 {
                assert!((f.prob(y, x) - oracle[y][x]).abs() < 1e-15);
            }
        }
        assert_eq!(f, bit_flip(0.25));
    }

    #[test]
    fn extract_product_joint_gives_constant_conditional() {
        let p = [0.3, 0.7];
        let q = [0.9, 0.1];
        let mut w = Vec::new();
        let mut labels = Vec::new();
        for (x, pw) in p.iter().enumerate() {
            for (y, qw) in q.iter().enumerate() {
                w.push(pw * qw);
                labels.push(format!("{x}⊗{y}"));
            }
        }
        let joint = ProbDist::new(labels, w).unwrap();
        let src: Vec<String> = ["0", "1"].map(String::from).to_vec();
        let (rho, f) = classical_extract(&joint, &src, &src).unwrap();
        for x in 0..2 {
            assert!((rho.weights()[x] - p[x]).abs() < 1e-12);
            for y in 0..2 {
                assert!((f.prob(y, x) - q[y]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extract_perfect_correlation_gives_identity() {
        let labels: Vec<String> = ["0⊗0", "0⊗1", "1⊗0", "1⊗1"].map(String::from).to_vec();
        let joint = ProbDist::new(labels, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let src: Vec<String> = ["0", "1"].map(String::from).to_vec();
        let (rho, f) = classical_extract(&joint, &src, &src).unwrap();
        assert_eq!(rho, half_half());
        assert_eq!(f.probs(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn extract_rejects_singular_marginal() {
        let labels: Vec<String> = ["0⊗0", "0⊗1", "1⊗0", "1⊗1"].map(String::from).to_vec();
        let joint = ProbDist::new(labels, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let src: Vec<String> = ["0", "1"].map(String::from).to_vec();
        let res = classical_extract(&joint, &src, &src);
        assert!(matches!(res, Err(Error::SingularMarginal(_))));
    }

    #[test]
    fn state_over_time_extract_round_trip() {
        let rho = ProbDist::new(vec!["0", "1", "2"], vec![0.2, 0.5, 0.3]).unwrap();
        let f = StochasticMap::new(
            vec!["0", "1", "2"],
            vec!["a", "b"],
            DMatrix::from_row_slice(2, 3, &[0.1, 0.8, 0.5, 0.9, 0.2, 0.5]),
        )
        .unwrap();
        let joint = classical_state_over_time(&rho, &f).unwrap();
        let (rho2, f2) = classical_extract(&joint, rho.set(), f.target()).unwrap();
        for (a, b) in rho.weights().iter().zip(rho2.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
        for y in 0..2 {
            for x in 0..3 {
                assert!((f.prob(y, x) - f2.prob(y, x)).abs() < 1e-12);
            }
        }
        // And the other composite: extract then rebuild.
        let joint2 = classical_state_over_time(&rho2, &f2).unwrap();
        for (a, b) in joint.weights().iter().zip(joint2.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_processes_reduce() {
        let e = q_embed(&bit_flip(0.3));
        let rho = half_half().to_element();
        assert!(check_classical_reduction(&rho, &e, 1e-12).unwrap());
    }

    #[test]
    fn maximally_mixed_reduces_under_identity() {
        let m2 = AlgebraDescriptor::matrix("q", 2).unwrap();
        let rho = AlgebraElement::unit(m2.clone()).scale(Complex64::new(0.5, 0.0));
        assert!(check_classical_reduction(&rho, &SuperOperator::identity(m2), 1e-12).unwrap());
    }

    #[test]
    fn plus_state_does_not_reduce_under_identity() {
        let m2 = AlgebraDescriptor::matrix("q", 2).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let plus = AlgebraElement::new(
            m2.clone(),
            vec![nalgebra::DMatrix::from_row_slice(2, 2, &[half, half, half, half])],
        )
        .unwrap();
        // Oracle: the 4x4 commutator of kron(plus, I) with SWAP, by hand.
        let lift = crate::naive::kron(&crate::naive::from_block(plus.block(0)), &crate::naive::eye(2));
        let swap = crate::naive::from_block(
            crate::algebra::multiplication_dual_unit(&m2).block(0),
        );
        let comm = crate::naive::add(
            &crate::naive::matmul(&lift, &swap),
            &crate::naive::scale(&crate::naive::matmul(&swap, &lift), Complex64::new(-1.0, 0.0)),
        );
        let maxdev = comm
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max);
        assert!(maxdev > 0.4);

        assert!(!check_classical_reduction(&plus, &SuperOperator::identity(m2), 1e-12).unwrap());
    }

}
