//! One-step state-over-time constructions.
//!
//! A bloom sends a map E: A -> B to a map A -> A (x) B whose two partial-trace
//! compositions recover E and the identity. The right, left and symmetric
//! blooms are the lambda = 1, 0, 1/2 members of the interpolating family
//!     rho -> lambda (rho (x) 1) J[E] + (1 - lambda) J[E] (rho (x) 1),
//! all computed here through the materialized Jamiolkowski matrix J[E].

use crate::algebra::{tensor_elements, AlgebraElement, TensorFactorization};
use crate::channel::{compose, SuperOperator};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BloomKind {
    Right,
    Left,
    Symmetric,
    Lambda(Complex64),
}

impl BloomKind {
    /// Normalizing constructor: the named kinds absorb their lambda values, so
    /// `lambda(1) == Right`, `lambda(0) == Left`, `lambda(1/2) == Symmetric`.
    pub fn lambda(l: Complex64) -> Self {
        if l == Complex64::new(1.0, 0.0) {
            BloomKind::Right
        } else if l == Complex64::new(0.0, 0.0) {
            BloomKind::Left
        } else if l == Complex64::new(0.5, 0.0) {
            BloomKind::Symmetric
        } else {
            BloomKind::Lambda(l)
        }
    }

    /// The interpolation weight on the right-bloom term.
    pub fn coefficient(&self) -> Complex64 {
        match self {
            BloomKind::Right => Complex64::new(1.0, 0.0),
            BloomKind::Left => Complex64::new(0.0, 0.0),
            BloomKind::Symmetric => Complex64::new(0.5, 0.0),
            BloomKind::Lambda(l) => *l,
        }
    }

    /// Only these kinds are proven associative (tree-independent) and are
    /// asserted equal across parenthesizations.
    pub fn is_associative(&self) -> bool {
        matches!(self, BloomKind::Right | BloomKind::Left | BloomKind::Symmetric)
    }
}

impl Default for BloomKind {
    fn default() -> Self {
        BloomKind::Symmetric
    }
}

/// Applies the one-step bloom of `e` to `rho`, yielding an element of
/// `domain (x) codomain`.
pub fn bloom_apply(
    kind: BloomKind,
    e: &SuperOperator,
    rho: &AlgebraElement,
) -> Result<AlgebraElement> {
    if !rho.algebra().dims_match(e.domain()) {
        return Err(Error::AlgebraMismatch(
            "bloom input does not live on the map's domain".into(),
        ));
    }
    let jam = e.jamiolkowski_element();
    let lifted = tensor_elements(rho, &AlgebraElement::unit(e.codomain().clone()));
    let l = kind.coefficient();
    let rj = lifted.mul(jam)?;
    let jr = jam.mul(&lifted)?;
    rj.scale(l).add(&jr.scale(Complex64::new(1.0, 0.0) - l))
}

/// The bloom as a map `A -> A (x) B`.
pub fn bloom_as_map(kind: BloomKind, e: &SuperOperator) -> SuperOperator {
    let domain = e.domain().clone();
    let codomain = domain.tensor(e.codomain());
    let e = e.clone();
    SuperOperator::from_function(domain, codomain, move |rho| bloom_apply(kind, &e, rho))
        .expect("bloom construction cannot fail on its own domain")
}

/// Deviations of the two marginal identities of a bloom: tracing out the
/// domain factor must recover `e`, tracing out the codomain factor the
/// identity.
#[derive(Debug, Clone, Copy)]
pub struct BloomShriekReport {
    pub channel_deviation: f64,
    pub identity_deviation: f64,
}

impl BloomShriekReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.channel_deviation <= tol && self.identity_deviation <= tol
    }
}

pub fn check_bloom_shriek(e: &SuperOperator, kind: BloomKind) -> Result<BloomShriekReport> {
    let bl = bloom_as_map(kind, e);
    let fact = TensorFactorization::new(vec![e.domain().clone(), e.codomain().clone()])?;
    let tr_domain = SuperOperator::partial_trace_map(&fact, &[1])?;
    let tr_codomain = SuperOperator::partial_trace_map(&fact, &[0])?;
    let channel_deviation = compose(&tr_domain, &bl)?.distance(e);
    let identity_deviation =
        compose(&tr_codomain, &bl)?.distance(&SuperOperator::identity(e.domain().clone()));
    Ok(BloomShriekReport { channel_deviation, identity_deviation })
}
