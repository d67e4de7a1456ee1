//! n-step processes and their states over time.
//!
//! A process chain is an initial state plus composable trace-preserving steps
//! A_0 -> A_1 -> ... -> A_n. Its state over time is computed three independent
//! ways: the step recursion (`yinyang`), the 2^n subset sum
//! (`yinyang_sum_formula`), and the right-nested extended Jordan product
//! (`yinyang_jordan_formula`). Parenthesization blooms evaluate an arbitrary
//! binary tree over the factors; for the associative kinds every tree agrees.

use crate::algebra::{
    extended_jordan, pad_element, partial_trace, tensor_elements, AlgebraDescriptor,
    AlgebraElement, TensorFactorization,
};
use crate::bloom::{bloom_apply, bloom_as_map, BloomKind};
use crate::channel::{compose, SuperOperator};
use crate::{Complex64, Error, Result};

/// Hard cap for the 2^n subset sum.
pub const MAX_SUM_FORMULA_STEPS: usize = 20;
/// Hard cap for exhaustive parenthesization enumeration (c_8 = 1430).
pub const MAX_CATALAN_STEPS: usize = 8;

/// An n-step process: an initial state and n chained maps.
#[derive(Debug, Clone)]
pub struct ProcessChain {
    rho: AlgebraElement,
    channels: Vec<SuperOperator>,
    /// States rho_0 .. rho_n pushed forward through the chain.
    states: Vec<AlgebraElement>,
}

impl ProcessChain {
    /// Builds a chain, requiring `rho` to be a state within `tol`.
    pub fn new(rho: AlgebraElement, channels: Vec<SuperOperator>, tol: f64) -> Result<Self> {
        if !rho.is_state(tol) {
            return Err(Error::InvalidElement(
                "initial element is not a state; use new_raw for arbitrary elements".into(),
            ));
        }
        Self::new_raw(rho, channels)
    }

    /// Builds a chain without the state check; the initial element may be any
    /// algebra element.
    pub fn new_raw(rho: AlgebraElement, channels: Vec<SuperOperator>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::ChainMismatch("a chain needs at least one step".into()));
        }
        if !rho.algebra().dims_match(channels[0].domain()) {
            return Err(Error::ChainMismatch(
                "initial element does not live on the first step's domain".into(),
            ));
        }
        for w in channels.windows(2) {
            if !w[0].codomain().dims_match(w[1].domain()) {
                return Err(Error::ChainMismatch(
                    "consecutive steps have mismatched endpoints".into(),
                ));
            }
        }
        let mut states = Vec::with_capacity(channels.len() + 1);
        states.push(rho.clone());
        for e in &channels {
            let next = e.apply(states.last().expect("nonempty"))?;
            states.push(next);
        }
        Ok(Self { rho, channels, states })
    }

    pub fn rho(&self) -> &AlgebraElement {
        &self.rho
    }

    pub fn channels(&self) -> &[SuperOperator] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The pushed-forward state rho_i, 0 <= i <= n.
    pub fn state(&self, i: usize) -> &AlgebraElement {
        &self.states[i]
    }

    pub fn states(&self) -> &[AlgebraElement] {
        &self.states
    }

    /// The algebras A_0 .. A_n, read off the chain's endpoints.
    pub fn algebras(&self) -> Vec<AlgebraDescriptor> {
        let mut out = Vec::with_capacity(self.channels.len() + 1);
        out.push(self.channels[0].domain().clone());
        for e in &self.channels {
            out.push(e.codomain().clone());
        }
        out
    }

    /// The declared factorization of A_0 (x) ... (x) A_n.
    pub fn factorization(&self) -> TensorFactorization {
        TensorFactorization::new(self.algebras()).expect("chain is nonempty")
    }
}

/// A full binary tree whose leaves are the factor indices 0..=n in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParenTree {
    Leaf(usize),
    Node(Box<ParenTree>, Box<ParenTree>),
}

impl ParenTree {
    pub fn node(left: ParenTree, right: ParenTree) -> Self {
        ParenTree::Node(Box::new(left), Box::new(right))
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            ParenTree::Leaf(i) => out.push(*i),
            ParenTree::Node(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    /// Checks that the leaves are exactly 0..=n in left-to-right order.
    pub fn validate(&self, n: usize) -> Result<()> {
        let leaves = self.leaves();
        if leaves.len() != n + 1 || leaves.iter().enumerate().any(|(i, l)| i != *l) {
            return Err(Error::InvalidParenTree(format!(
                "leaves {leaves:?}, expected 0..={n} in order"
            )));
        }
        Ok(())
    }

    pub fn leftmost(&self) -> usize {
        match self {
            ParenTree::Leaf(i) => *i,
            ParenTree::Node(l, _) => l.leftmost(),
        }
    }

    /// The left-comb tree (((0,1),2),...),n).
    pub fn left_comb(n: usize) -> Self {
        let mut t = ParenTree::Leaf(0);
        for i in 1..=n {
            t = ParenTree::node(t, ParenTree::Leaf(i));
        }
        t
    }

    /// The right-comb tree (0,(1,(...,n))).
    pub fn right_comb(n: usize) -> Self {
        let mut t = ParenTree::Leaf(n);
        for i in (0..n).rev() {
            t = ParenTree::node(ParenTree::Leaf(i), t);
        }
        t
    }
}

fn enumerate_span(lo: usize, hi: usize) -> Vec<ParenTree> {
    if lo == hi {
        return vec![ParenTree::Leaf(lo)];
    }
    let mut out = Vec::new();
    for split in lo..hi {
        for l in enumerate_span(lo, split) {
            for r in enumerate_span(split + 1, hi) {
                out.push(ParenTree::node(l.clone(), r.clone()));
            }
        }
    }
    out
}

/// All parenthesizations of n+1 ordered factors; there are Catalan(n) of them.
pub fn catalan_enumerate(n: usize) -> Result<Vec<ParenTree>> {
    if n == 0 {
        return Err(Error::InvalidParenTree("need at least two factors".into()));
    }
    if n > MAX_CATALAN_STEPS {
        return Err(Error::TooLarge(format!(
            "refusing to enumerate parenthesizations for n = {n} > {MAX_CATALAN_STEPS}"
        )));
    }
    Ok(enumerate_span(0, n))
}

/// The n-step symmetric state over time, by the step recursion: bloom the
/// first map, then repeatedly bloom E_i pulled back along the trace of all
/// earlier factors.
pub fn yinyang(chain: &ProcessChain) -> Result<AlgebraElement> {
    yinyang_with_kind(chain, BloomKind::Symmetric)
}

/// The same recursion for an arbitrary bloom kind.
pub fn yinyang_with_kind(chain: &ProcessChain, kind: BloomKind) -> Result<AlgebraElement> {
    let algebras = chain.algebras();
    let mut t = bloom_apply(kind, &chain.channels()[0], chain.rho())?;
    for (i, e) in chain.channels().iter().enumerate().skip(1) {
        let fact = TensorFactorization::new(algebras[..=i].to_vec())?;
        let tr = SuperOperator::partial_trace_map(&fact, &[i])?;
        let pulled = compose(e, &tr)?;
        t = bloom_apply(kind, &pulled, &t)?;
    }
    Ok(t)
}

/// The padded operator 1 (x) .. (x) J[E_j] (x) .. (x) 1 over the full chain
/// algebra; `j` is 1-based.
fn padded_jam(algebras: &[AlgebraDescriptor], channels: &[SuperOperator], j: usize) -> AlgebraElement {
    pad_element(
        &algebras[..j - 1],
        channels[j - 1].jamiolkowski_element(),
        &algebras[j + 1..],
    )
}

fn lifted_rho(chain: &ProcessChain, algebras: &[AlgebraDescriptor]) -> Result<AlgebraElement> {
    let rest = TensorFactorization::new(algebras[1..].to_vec())?;
    Ok(tensor_elements(chain.rho(), &AlgebraElement::unit(rest.composite().clone())))
}

/// The closed-form 2^n subset sum for the symmetric state over time: for each
/// subset of step indices, multiply its padded Jamiolkowski operators in
/// descending order on the left of (rho (x) 1) and the complement in ascending
/// order on the right, then average.
pub fn yinyang_sum_formula(chain: &ProcessChain) -> Result<AlgebraElement> {
    let n = chain.len();
    if n > MAX_SUM_FORMULA_STEPS {
        return Err(Error::ChainTooLong(format!(
            "subset sum has 2^{n} terms; the cap is n = {MAX_SUM_FORMULA_STEPS}"
        )));
    }
    let algebras = chain.algebras();
    let jams: Vec<AlgebraElement> = (1..=n)
        .map(|j| padded_jam(&algebras, chain.channels(), j))
        .collect();
    let lifted = lifted_rho(chain, &algebras)?;

    let mut total = AlgebraElement::zero(lifted.algebra().clone());
    for mask in 0u32..(1u32 << n) {
        // Bit j-1 set means step j is in the subset, multiplied on the left.
        let mut term = lifted.clone();
        for j in 1..=n {
            if mask & (1 << (j - 1)) != 0 {
                // Left products stack outward, so ascending multiplication
                // leaves the highest index outermost.
                term = jams[j - 1].mul(&term)?;
            }
        }
        // Re-walk ascending for the complement on the right.
        for j in 1..=n {
            if mask & (1 << (j - 1)) == 0 {
                term = term.mul(&jams[j - 1])?;
            }
        }
        total = total.add(&term)?;
    }
    Ok(total.scale(Complex64::new(1.0 / (1u64 << n) as f64, 0.0)))
}

/// The extended-Jordan closed form: the right-nested Jordan product of
/// (rho (x) 1) with the padded Jamiolkowski operators in step order.
pub fn yinyang_jordan_formula(chain: &ProcessChain) -> Result<AlgebraElement> {
    let algebras = chain.algebras();
    let mut items = Vec::with_capacity(chain.len() + 1);
    items.push(lifted_rho(chain, &algebras)?);
    for j in 1..=chain.len() {
        items.push(padded_jam(&algebras, chain.channels(), j));
    }
    extended_jordan(&items)
}

/// Evaluates the parenthesization bloom of `tree` over an n-chain of maps,
/// producing a map A_0 -> A_0 (x) ... (x) A_n.
pub fn bloom_paren(
    kind: BloomKind,
    tree: &ParenTree,
    channels: &[SuperOperator],
) -> Result<SuperOperator> {
    if channels.is_empty() {
        return Err(Error::ChainMismatch("a chain needs at least one step".into()));
    }
    for w in channels.windows(2) {
        if !w[0].codomain().dims_match(w[1].domain()) {
            return Err(Error::ChainMismatch(
                "consecutive steps have mismatched endpoints".into(),
            ));
        }
    }
    tree.validate(channels.len())
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let mut algebras = Vec::with_capacity(channels.len() + 1);
    algebras.push(channels[0].domain().clone());
    for e in channels {
        algebras.push(e.codomain().clone());
    }
    eval_paren(kind, tree, channels, &algebras)
}

fn eval_paren(
    kind: BloomKind,
    tree: &ParenTree,
    channels: &[SuperOperator],
    algebras: &[AlgebraDescriptor],
) -> Result<SuperOperator> {
    let (left, right) = match tree {
        ParenTree::Leaf(_) => {
            return Err(Error::InvalidParenTree("cannot evaluate a bare leaf".into()))
        }
        ParenTree::Node(l, r) => (l.as_ref(), r.as_ref()),
    };
    match (left, right) {
        // Base: a single step blooms directly.
        (ParenTree::Leaf(lo), ParenTree::Leaf(_)) => Ok(bloom_as_map(kind, &channels[*lo])),
        // The left child is a bare first factor: bloom the composite of the
        // rest of the tree with the first step.
        (ParenTree::Leaf(lo), r) => {
            let inner = eval_paren(kind, r, channels, algebras)?;
            Ok(bloom_as_map(kind, &compose(&inner, &channels[*lo])?))
        }
        // The right child is a bare last factor: bloom the last step pulled
        // back along the trace onto the previous factor, after the left tree.
        (l, ParenTree::Leaf(hi)) => {
            let w = eval_paren(kind, l, channels, algebras)?;
            let lo = l.leftmost();
            let fact = TensorFactorization::new(algebras[lo..*hi].to_vec())?;
            let tr = SuperOperator::partial_trace_map(&fact, &[hi - 1 - lo])?;
            let pulled = compose(&channels[hi - 1], &tr)?;
            Ok(compose(&bloom_as_map(kind, &pulled), &w)?)
        }
        // Interior split at k = leftmost leaf of the right child.
        (l, r) => {
            let w = eval_paren(kind, l, channels, algebras)?;
            let u = eval_paren(kind, r, channels, algebras)?;
            let lo = l.leftmost();
            let k = r.leftmost();
            let fact = TensorFactorization::new(algebras[lo..k].to_vec())?;
            let tr = SuperOperator::partial_trace_map(&fact, &[k - 1 - lo])?;
            let pulled = compose(&compose(&u, &channels[k - 1])?, &tr)?;
            Ok(compose(&bloom_as_map(kind, &pulled), &w)?)
        }
    }
}

/// Partial trace of an n-step state over time onto the kept factors.
pub fn multi_marginal(
    t: &AlgebraElement,
    fact: &TensorFactorization,
    keep: &[usize],
) -> Result<AlgebraElement> {
    partial_trace(t, fact, keep)
}

/// The coarse-grained chain seen by the kept time slots: the state at the
/// first kept slot, then the composites of the dropped intermediate steps.
pub fn coarse_grained_chain(chain: &ProcessChain, keep: &[usize]) -> Result<ProcessChain> {
    if keep.len() < 2 {
        return Err(Error::IndexOutOfRange(
            "coarse graining needs at least two kept slots; use state(i) for one".into(),
        ));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || *keep.last().unwrap() > chain.len() {
        return Err(Error::IndexOutOfRange(format!(
            "keep set {keep:?} is not strictly increasing within 0..={}",
            chain.len()
        )));
    }
    let mut segments = Vec::with_capacity(keep.len() - 1);
    for w in keep.windows(2) {
        let mut seg = chain.channels()[w[0]].clone();
        for j in w[0] + 1..w[1] {
            seg = compose(&chain.channels()[j], &seg)?;
        }
        segments.push(seg);
    }
    ProcessChain::new_raw(chain.state(keep[0]).clone(), segments)
}

/// Checks that replacing steps i, i+1 by their bloomed composite (and pulling
/// the following step back along a trace) leaves the state over time fixed.
/// `i` is 1-based with 1 <= i <= n-1.
pub fn reduction_identity_check(chain: &ProcessChain, i: usize, tol: f64) -> Result<bool> {
    let n = chain.len();
    if i < 1 || i >= n {
        return Err(Error::IndexOutOfRange(format!(
            "reduction index {i} outside 1..={}",
            n - 1
        )));
    }
    let channels = chain.channels();
    let mut modified: Vec<SuperOperator> = channels[..i - 1].to_vec();
    let bloomed = bloom_as_map(BloomKind::Symmetric, &channels[i]);
    modified.push(compose(&bloomed, &channels[i - 1])?);
    if i + 1 < n {
        let fact = TensorFactorization::new(vec![
            channels[i].domain().clone(),
            channels[i].codomain().clone(),
        ])?;
        let tr = SuperOperator::partial_trace_map(&fact, &[1])?;
        modified.push(compose(&channels[i + 1], &tr)?);
        modified.extend_from_slice(&channels[i + 2..]);
    }
    let alt = ProcessChain::new_raw(chain.rho().clone(), modified)?;
    let lhs = yinyang(chain)?;
    let rhs = yinyang(&alt)?;
    Ok(lhs.distance(&rhs) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{multiplication_dual_unit, CMatrix, ONE};
    use crate::naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix("q", 2).unwrap()
    }

    fn maximally_mixed() -> AlgebraElement {
        AlgebraElement::unit(m2()).scale(Complex64::new(0.5, 0.0))
    }

    fn random_state(rng: &mut ChaCha8Rng) -> AlgebraElement {
        let g = CMatrix::from_fn(2, 2, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let gg = &g * g.adjoint();
        let tr = gg.trace();
        AlgebraElement::new(m2(), vec![gg / tr]).unwrap()
    }

    fn fixed_cptp_chain(rng: &mut ChaCha8Rng, n: usize) -> ProcessChain {
        let mut channels = Vec::new();
        for i in 0..n {
            let e = match i % 3 {
                0 => SuperOperator::dephasing(m2(), 0.2 + 0.1 * i as f64).unwrap(),
                1 => SuperOperator::depolarizing(m2(), 0.3).unwrap(),
                _ => {
                    let phase = Complex64::from_polar(1.0, rng.gen::<f64>() * 6.28);
                    let u = AlgebraElement::new(
                        m2(),
                        vec![CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                            ONE, phase,
                        ]))],
                    )
                    .unwrap();
                    SuperOperator::unitary_conjugation(&u).unwrap()
                }
            };
            channels.push(e);
        }
        ProcessChain::new(random_state(rng), channels, 1e-9).unwrap()
    }

    #[test]
    fn catalan_counts() {
        assert_eq!(catalan_enumerate(1).unwrap().len(), 1);
        assert_eq!(catalan_enumerate(2).unwrap().len(), 2);
        assert_eq!(catalan_enumerate(3).unwrap().len(), 5);
        assert_eq!(catalan_enumerate(4).unwrap().len(), 14);
        assert_eq!(catalan_enumerate(8).unwrap().len(), 1430);
        assert!(matches!(catalan_enumerate(9), Err(Error::TooLarge(_))));
    }

    #[test]
    fn paren_tree_validation() {
        let t = ParenTree::node(
            ParenTree::node(ParenTree::Leaf(0), ParenTree::Leaf(1)),
            ParenTree::Leaf(2),
        );
        assert!(t.validate(2).is_ok());
        assert!(t.validate(3).is_err());
        let bad = ParenTree::node(ParenTree::Leaf(1), ParenTree::Leaf(0));
        assert!(matches!(bad.validate(1), Err(Error::InvalidParenTree(_))));
        assert_eq!(ParenTree::left_comb(3).leaves(), vec![0, 1, 2, 3]);
        assert_eq!(ParenTree::right_comb(3).leaves(), vec![0, 1, 2, 3]);
        assert_eq!(ParenTree::right_comb(3).leftmost(), 0);
    }

    #[test]
    fn chain_validation() {
        let not_state = AlgebraElement::unit(m2());
        let id = SuperOperator::identity(m2());
        assert!(ProcessChain::new(not_state.clone(), vec![id.clone()], 1e-9).is_err());
        assert!(ProcessChain::new_raw(not_state, vec![id.clone()]).is_ok());
        assert!(matches!(
            ProcessChain::new_raw(maximally_mixed(), vec![]),
            Err(Error::ChainMismatch(_))
        ));
        let id3 = SuperOperator::identity(AlgebraDescriptor::matrix("r", 3).unwrap());
        assert!(matches!(
            ProcessChain::new_raw(maximally_mixed(), vec![id, id3]),
            Err(Error::ChainMismatch(_))
        ));
    }

    #[test]
    fn chain_states_push_forward() {
        let e00 = AlgebraElement::matrix_unit(m2(), 0, 0, 0);
        let d = SuperOperator::depolarizing(m2(), 1.0).unwrap();
        let chain = ProcessChain::new(e00.clone(), vec![d.clone(), d], 1e-9).unwrap();
        assert!(chain.state(0).approx_eq(&e00, 0.0));
        assert!(chain.state(1).approx_eq(&maximally_mixed(), 1e-15));
        assert!(chain.state(2).approx_eq(&maximally_mixed(), 1e-15));
    }

    #[test]
    fn one_step_yinyang_matches_bloom() {
        let e00 = AlgebraElement::matrix_unit(m2(), 0, 0, 0);
        let chain = ProcessChain::new(e00, vec![SuperOperator::identity(m2())], 1e-9).unwrap();
        let t = yinyang(&chain).unwrap();
        // Frozen 4x4: |00><00| + (|01><10| + |10><01|)/2.
        let half = Complex64::new(0.5, 0.0);
        assert_eq!(t.block(0)[(0, 0)], ONE);
        assert_eq!(t.block(0)[(1, 2)], half);
        assert_eq!(t.block(0)[(2, 1)], half);
        assert!((t.trace() - ONE).norm() < 1e-15);
    }

    #[test]
    fn central_jams_give_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = random_state(&mut rng);
        let d = SuperOperator::depolarizing(m2(), 1.0).unwrap();
        let chain = ProcessChain::new(rho.clone(), vec![d.clone(), d], 1e-9).unwrap();
        let t = yinyang(&chain).unwrap();
        let expected = tensor_elements(&tensor_elements(&rho, &maximally_mixed()), &maximally_mixed());
        assert!(t.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn two_step_identity_chain_matches_nested_anticommutator_oracle() {
        // Oracle: Jor(rho (x) 1 (x) 1, Jor(SWAP (x) 1, 1 (x) SWAP)) on raw
        // 8x8 arrays.
        let swap = naive::from_block(multiplication_dual_unit(&m2()).block(0));
        let j1 = naive::kron(&swap, &naive::eye(2));
        let j2 = naive::kron(&naive::eye(2), &swap);
        let rho_lift = naive::kron(&naive::scale(&naive::eye(2), Complex64::new(0.5, 0.0)), &naive::eye(4));
        let oracle = naive::jordan(&rho_lift, &naive::jordan(&j1, &j2));

        let id = SuperOperator::identity(m2());
        let chain =
            ProcessChain::new(maximally_mixed(), vec![id.clone(), id], 1e-9).unwrap();
        let got = yinyang(&chain).unwrap();
        assert!(naive::matches_block(&oracle, got.block(0), 1e-14));

        // All three formulas hit the same oracle.
        let sum = yinyang_sum_formula(&chain).unwrap();
        assert!(naive::matches_block(&oracle, sum.block(0), 1e-14));
        let jordan = yinyang_jordan_formula(&chain).unwrap();
        assert!(naive::matches_block(&oracle, jordan.block(0), 1e-14));
    }

    #[test]
    fn one_step_sum_formula_is_the_anticommutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let rho = random_state(&mut rng);
        let e = SuperOperator::dephasing(m2(), 0.3).unwrap();
        let chain = ProcessChain::new(rho.clone(), vec![e.clone()], 1e-9).unwrap();
        let sum = yinyang_sum_formula(&chain).unwrap();
        let direct = bloom_apply(BloomKind::Symmetric, &e, &rho).unwrap();
        assert!(sum.approx_eq(&direct, 1e-14));
    }

    #[test]
    fn formula_triple_equivalence_on_fixed_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=4 {
            let chain = fixed_cptp_chain(&mut rng, n);
            let a = yinyang(&chain).unwrap();
            let b = yinyang_sum_formula(&chain).unwrap();
            let c = yinyang_jordan_formula(&chain).unwrap();
            assert!(a.approx_eq(&b, 1e-12), "sum formula diverges at n = {n}");
            assert!(a.approx_eq(&c, 1e-12), "jordan formula diverges at n = {n}");
        }
    }

    #[test]
    fn sum_formula_guard_trips_before_work() {
        let c1 = AlgebraDescriptor::matrix("x", 1).unwrap();
        let id = SuperOperator::identity(c1.clone());
        let one = AlgebraElement::unit(c1);
        let chain = ProcessChain::new_raw(one, vec![id; 21]).unwrap();
        assert!(matches!(yinyang_sum_formula(&chain), Err(Error::ChainTooLong(_))));
    }

    #[test]
    fn paren_trees_for_two_steps_match_manual_compositions() {
        let e1 = SuperOperator::dephasing(m2(), 0.45).unwrap();
        let e2 = SuperOperator::depolarizing(m2(), 0.2).unwrap();
        let channels = vec![e1.clone(), e2.clone()];
        let kind = BloomKind::Symmetric;

        // Left tree ((0,1),2): bloom E2 pulled along the trace, after bloom E1.
        let left_tree = ParenTree::left_comb(2);
        let fact = TensorFactorization::new(vec![m2(), m2()]).unwrap();
        let tr = SuperOperator::partial_trace_map(&fact, &[1]).unwrap();
        let manual_left = compose(
            &bloom_as_map(kind, &compose(&e2, &tr).unwrap()),
            &bloom_as_map(kind, &e1),
        )
        .unwrap();
        let got_left = bloom_paren(kind, &left_tree, &channels).unwrap();
        assert!(got_left.approx_eq(&manual_left, 1e-13));

        // Right tree (0,(1,2)): bloom of (bloom E2 after E1).
        let right_tree = ParenTree::right_comb(2);
        let manual_right =
            bloom_as_map(kind, &compose(&bloom_as_map(kind, &e2), &e1).unwrap());
        let got_right = bloom_paren(kind, &right_tree, &channels).unwrap();
        assert!(got_right.approx_eq(&manual_right, 1e-13));

        // Symmetric kind: the two trees agree.
        assert!(got_left.approx_eq(&got_right, 1e-12));
    }

    #[test]
    fn all_five_trees_agree_for_three_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let chain = fixed_cptp_chain(&mut rng, 3);
        let trees = catalan_enumerate(3).unwrap();
        assert_eq!(trees.len(), 5);
        for kind in [BloomKind::Right, BloomKind::Left, BloomKind::Symmetric] {
            let first = bloom_paren(kind, &trees[0], chain.channels()).unwrap();
            for t in &trees[1..] {
                let other = bloom_paren(kind, t, chain.channels()).unwrap();
                assert!(
                    first.approx_eq(&other, 1e-11),
                    "trees disagree for {kind:?}: {t:?}"
                );
            }
        }
    }

    #[test]
    fn left_comb_paren_applied_to_rho_is_yinyang() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for n in 1..=3 {
            let chain = fixed_cptp_chain(&mut rng, n);
            let tree = ParenTree::left_comb(n);
            let map = bloom_paren(BloomKind::Symmetric, &tree, chain.channels()).unwrap();
            let via_map = map.apply(chain.rho()).unwrap();
            let direct = yinyang(&chain).unwrap();
            assert!(via_map.approx_eq(&direct, 1e-12), "mismatch at n = {n}");
        }
    }

    #[test]
    fn right_comb_matches_right_kind_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let chain = fixed_cptp_chain(&mut rng, 3);
        let tree = ParenTree::right_comb(3);
        let map = bloom_paren(BloomKind::Right, &tree, chain.channels()).unwrap();
        let via_map = map.apply(chain.rho()).unwrap();
        let direct = yinyang_with_kind(&chain, BloomKind::Right).unwrap();
        assert!(via_map.approx_eq(&direct, 1e-12));
    }

    #[test]
    fn bloom_paren_rejects_bad_trees() {
        let id = SuperOperator::identity(m2());
        let channels = vec![id.clone(), id];
        let too_small = ParenTree::node(ParenTree::Leaf(0), ParenTree::Leaf(1));
        assert!(matches!(
            bloom_paren(BloomKind::Symmetric, &too_small, &channels),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn marginals_of_yinyang_are_the_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let chain = fixed_cptp_chain(&mut rng, 3);
        let t = yinyang(&chain).unwrap();
        let fact = chain.factorization();
        for i in 0..=3 {
            let m = multi_marginal(&t, &fact, &[i]).unwrap();
            assert!(m.approx_eq(chain.state(i), 1e-12), "marginal {i} mismatch");
        }
    }

    #[test]
    fn compositionality_over_the_middle_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let chain = fixed_cptp_chain(&mut rng, 2);
        let t = yinyang(&chain).unwrap();
        let marg = multi_marginal(&t, &chain.factorization(), &[0, 2]).unwrap();
        let composed = compose(&chain.channels()[1], &chain.channels()[0]).unwrap();
        let squeezed =
            ProcessChain::new_raw(chain.rho().clone(), vec![composed]).unwrap();
        let direct = yinyang(&squeezed).unwrap();
        assert!(marg.approx_eq(&direct, 1e-12));
    }

    #[test]
    fn coarse_graining_matches_multi_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let chain = fixed_cptp_chain(&mut rng, 3);
        let t = yinyang(&chain).unwrap();
        for keep in [vec![0, 2], vec![1, 3], vec![0, 1, 3], vec![0, 3]] {
            let marg = multi_marginal(&t, &chain.factorization(), &keep).unwrap();
            let coarse = coarse_grained_chain(&chain, &keep).unwrap();
            let direct = yinyang(&coarse).unwrap();
            assert!(marg.approx_eq(&direct, 1e-12), "keep = {keep:?}");
        }
        assert!(coarse_grained_chain(&chain, &[1]).is_err());
        assert!(coarse_grained_chain(&chain, &[2, 1]).is_err());
    }

    #[test]
    fn reduction_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let two = fixed_cptp_chain(&mut rng, 2);
        assert!(reduction_identity_check(&two, 1, 1e-11).unwrap());

        let four = ProcessChain::new(
            random_state(&mut rng),
            vec![SuperOperator::identity(m2()); 3],
            1e-9,
        )
        .unwrap();
        assert!(reduction_identity_check(&four, 2, 1e-11).unwrap());

        let three = fixed_cptp_chain(&mut rng, 3);
        assert!(reduction_identity_check(&three, 1, 1e-11).unwrap());
        assert!(reduction_identity_check(&three, 2, 1e-11).unwrap());
        assert!(matches!(
            reduction_identity_check(&three, 0, 1e-11),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            reduction_identity_check(&three, 3, 1e-11),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn yinyang_output_is_selfadjoint_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let chain = fixed_cptp_chain(&mut rng, 3);
        let t = yinyang(&chain).unwrap();
        assert!(t.is_selfadjoint(1e-12));
        assert!((t.trace() - ONE).norm() < 1e-12);
    }
}
