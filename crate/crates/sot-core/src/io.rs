//! JSON models for the on-disk formats.
//!
//! Matrices are written as separate real and imaginary row-major grids, and
//! every conversion failure comes back as [`Error::Parse`] so callers can
//! distinguish malformed input from violated mathematical preconditions.
//! [`to_json_string`] renders floats with 17 significant digits, which is
//! enough to reproduce any binary64 value exactly and keeps repeated runs
//! byte-identical.

use crate::algebra::{AlgebraDescriptor, AlgebraElement, CMatrix, TensorFactorization};
use crate::channel::SuperOperator;
use crate::classical::{ProbDist, StochasticMap};
use crate::extract::Extraction;
use crate::nstep::{ParenTree, ProcessChain};
use crate::qubit_pdo::PauliCoefficients;
use crate::{Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

fn parse_err(context: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{context}: {e}"))
}

/// One direct summand of an algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpecJson {
    pub label: String,
    pub dim: usize,
}

pub fn algebra_to_json(alg: &AlgebraDescriptor) -> Vec<BlockSpecJson> {
    alg.blocks()
        .iter()
        .map(|(label, dim)| BlockSpecJson { label: label.clone(), dim: *dim })
        .collect()
}

pub fn algebra_from_json(blocks: &[BlockSpecJson]) -> Result<AlgebraDescriptor> {
    AlgebraDescriptor::new(
        blocks.iter().map(|b| (b.label.clone(), b.dim)).collect(),
    )
    .map_err(|e| parse_err("algebra", e))
}

/// Dense complex matrix as real/imaginary row grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let grid = |pick: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| pick(&m[(r, c)])).collect())
                .collect()
        };
        Self { re: grid(|z| z.re), im: grid(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(Error::Parse("matrix: no rows".into()));
        }
        let cols = self.re[0].len();
        if self.im.len() != rows {
            return Err(Error::Parse(format!(
                "matrix: re has {rows} rows, im has {}",
                self.im.len()
            )));
        }
        for (r, (re_row, im_row)) in self.re.iter().zip(&self.im).enumerate() {
            if re_row.len() != cols || im_row.len() != cols {
                return Err(Error::Parse(format!("matrix: ragged row {r}")));
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            Complex64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

/// Algebra element: descriptor plus one matrix per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub algebra: Vec<BlockSpecJson>,
    pub blocks: Vec<MatrixJson>,
}

impl ElementJson {
    pub fn from_element(e: &AlgebraElement) -> Self {
        Self {
            algebra: algebra_to_json(e.algebra()),
            blocks: (0..e.algebra().num_blocks())
                .map(|b| MatrixJson::from_matrix(e.block(b)))
                .collect(),
        }
    }

    pub fn to_element(&self) -> Result<AlgebraElement> {
        let alg = algebra_from_json(&self.algebra)?;
        let blocks = self
            .blocks
            .iter()
            .map(|m| m.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        AlgebraElement::new(alg, blocks).map_err(|e| parse_err("element", e))
    }
}

/// Either explicit action matrices (one per component pair, domain block
/// varying slowest) or a named constructor with its parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentsJson {
    Named(NamedChannelJson),
    Matrices(Vec<MatrixJson>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedChannelJson {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<ElementJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub domain: Vec<BlockSpecJson>,
    pub codomain: Vec<BlockSpecJson>,
    pub kind: String,
    pub components: ComponentsJson,
}

impl ChannelJson {
    pub fn from_superoperator(e: &SuperOperator) -> Self {
        Self {
            domain: algebra_to_json(e.domain()),
            codomain: algebra_to_json(e.codomain()),
            kind: "matrix".into(),
            components: ComponentsJson::Matrices(
                e.components().iter().map(MatrixJson::from_matrix).collect(),
            ),
        }
    }

    pub fn to_superoperator(&self) -> Result<SuperOperator> {
        let domain = algebra_from_json(&self.domain)?;
        let codomain = algebra_from_json(&self.codomain)?;
        match (self.kind.as_str(), &self.components) {
            ("matrix", ComponentsJson::Matrices(ms)) => {
                let components = ms
                    .iter()
                    .map(|m| m.to_matrix())
                    .collect::<Result<Vec<_>>>()?;
                SuperOperator::new(domain, codomain, components)
                    .map_err(|e| parse_err("channel", e))
            }
            ("named", ComponentsJson::Named(named)) => {
                named_channel(&domain, &codomain, named)
            }
            (kind, _) => Err(Error::Parse(format!(
                "channel: kind {kind:?} does not match the components payload"
            ))),
        }
    }
}

fn named_channel(
    domain: &AlgebraDescriptor,
    codomain: &AlgebraDescriptor,
    named: &NamedChannelJson,
) -> Result<SuperOperator> {
    if !domain.dims_match(codomain) {
        return Err(Error::Parse(format!(
            "channel: named constructor {:?} needs matching endpoints",
            named.name
        )));
    }
    let need_param = || {
        named.param.ok_or_else(|| {
            Error::Parse(format!("channel: {:?} needs a \"param\" field", named.name))
        })
    };
    match named.name.as_str() {
        "identity" => Ok(SuperOperator::identity(domain.clone())),
        "depolarizing" => SuperOperator::depolarizing(domain.clone(), need_param()?)
            .map_err(|e| parse_err("channel", e)),
        "dephasing" => SuperOperator::dephasing(domain.clone(), need_param()?)
            .map_err(|e| parse_err("channel", e)),
        "unitary" => {
            let u = named
                .unitary
                .as_ref()
                .ok_or_else(|| {
                    Error::Parse("channel: \"unitary\" needs a \"unitary\" element field".into())
                })?
                .to_element()?;
            SuperOperator::unitary_conjugation(&u).map_err(|e| parse_err("channel", e))
        }
        other => Err(Error::Parse(format!("channel: unknown named channel {other:?}"))),
    }
}

/// Initial state plus the channel list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessJson {
    pub rho: ElementJson,
    pub channels: Vec<ChannelJson>,
}

impl ProcessJson {
    pub fn from_chain(chain: &ProcessChain) -> Self {
        Self {
            rho: ElementJson::from_element(chain.rho()),
            channels: chain
                .channels()
                .iter()
                .map(ChannelJson::from_superoperator)
                .collect(),
        }
    }

    /// Structural conversion only; the element is not required to be a state
    /// and the channels are not required to be CPTP.
    pub fn to_chain(&self) -> Result<ProcessChain> {
        let rho = self.rho.to_element()?;
        let channels = self
            .channels
            .iter()
            .map(|c| c.to_superoperator())
            .collect::<Result<Vec<_>>>()?;
        ProcessChain::new_raw(rho, channels)
    }
}

/// Element with the tensor factorization that makes it a state over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdoJson {
    #[serde(flatten)]
    pub element: ElementJson,
    pub factorization: Vec<Vec<BlockSpecJson>>,
}

impl PdoJson {
    pub fn new(element: &AlgebraElement, fact: &TensorFactorization) -> Self {
        Self {
            element: ElementJson::from_element(element),
            factorization: fact.factors().iter().map(algebra_to_json).collect(),
        }
    }

    pub fn to_parts(&self) -> Result<(AlgebraElement, TensorFactorization)> {
        let element = self.element.to_element()?;
        let factors = self
            .factorization
            .iter()
            .map(|f| algebra_from_json(f))
            .collect::<Result<Vec<_>>>()?;
        let fact = TensorFactorization::new(factors).map_err(|e| parse_err("factorization", e))?;
        if !element.algebra().dims_match(fact.composite()) {
            return Err(Error::Parse(
                "factorization: factor dimensions do not multiply out to the element's algebra"
                    .into(),
            ));
        }
        Ok((element, fact))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticJson {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

impl StochasticJson {
    pub fn from_map(f: &StochasticMap) -> Self {
        Self {
            source: f.source().to_vec(),
            target: f.target().to_vec(),
            probs: (0..f.target().len())
                .map(|y| (0..f.source().len()).map(|x| f.prob(y, x)).collect())
                .collect(),
        }
    }

    pub fn to_map(&self) -> Result<StochasticMap> {
        let rows = self.target.len();
        let cols = self.source.len();
        if self.probs.len() != rows || self.probs.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse(format!(
                "stochastic map: probs must be {rows} rows of {cols}"
            )));
        }
        let probs = nalgebra::DMatrix::from_fn(rows, cols, |r, c| self.probs[r][c]);
        StochasticMap::new(self.source.clone(), self.target.clone(), probs)
            .map_err(|e| parse_err("stochastic map", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistJson {
    pub set: Vec<String>,
    pub weights: Vec<f64>,
}

impl DistJson {
    pub fn from_dist(p: &ProbDist) -> Self {
        Self { set: p.set().to_vec(), weights: p.weights().to_vec() }
    }

    pub fn to_dist(&self) -> Result<ProbDist> {
        ProbDist::new(self.set.clone(), self.weights.clone())
            .map_err(|e| parse_err("distribution", e))
    }

    /// Accepts negative weights (quasi-distributions), still requiring unit
    /// total mass.
    pub fn to_quasi_dist(&self) -> Result<ProbDist> {
        ProbDist::new_quasi(self.set.clone(), self.weights.clone())
            .map_err(|e| parse_err("distribution", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub cptp: Vec<bool>,
    pub choi_min_eig: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Extraction output: the recovered process plus per-step diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionJson {
    pub rho: ElementJson,
    pub channels: Vec<ChannelJson>,
    pub diagnostics: DiagnosticsJson,
}

impl ExtractionJson {
    pub fn from_extraction(ext: &Extraction) -> Self {
        Self {
            rho: ElementJson::from_element(ext.chain.rho()),
            channels: ext
                .chain
                .channels()
                .iter()
                .map(ChannelJson::from_superoperator)
                .collect(),
            diagnostics: DiagnosticsJson {
                cptp: ext.cptp.clone(),
                choi_min_eig: ext.choi_min_eig.clone(),
                residuals: ext.residuals.clone(),
            },
        }
    }
}

/// Pauli coefficient tensor as a flat array of [re, im] pairs in base-4
/// string-code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficientsJson {
    pub k: usize,
    pub n: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl PauliCoefficientsJson {
    pub fn from_coefficients(c: &PauliCoefficients) -> Self {
        Self {
            k: c.k,
            n: c.n,
            coeffs: c.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_coefficients(&self) -> Result<PauliCoefficients> {
        let expected = 1usize
            .checked_shl((2 * self.k * (self.n + 1)) as u32)
            .ok_or_else(|| Error::Parse("pauli coefficients: shape overflows".into()))?;
        if self.coeffs.len() != expected {
            return Err(Error::Parse(format!(
                "pauli coefficients: expected {expected} entries for k={}, n={}, got {}",
                self.k,
                self.n,
                self.coeffs.len()
            )));
        }
        Ok(PauliCoefficients {
            k: self.k,
            n: self.n,
            coeffs: self.coeffs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        })
    }
}

/// Parses a parenthesization tree from nested two-element arrays of leaf
/// indices, e.g. `[[0,1],2]`.
pub fn paren_tree_from_value(v: &Value) -> Result<ParenTree> {
    match v {
        Value::Number(n) => {
            let leaf = n
                .as_u64()
                .ok_or_else(|| Error::Parse(format!("paren tree: leaf {n} is not a nonnegative integer")))?;
            Ok(ParenTree::Leaf(leaf as usize))
        }
        Value::Array(items) if items.len() == 2 => Ok(ParenTree::node(
            paren_tree_from_value(&items[0])?,
            paren_tree_from_value(&items[1])?,
        )),
        Value::Array(items) => Err(Error::Parse(format!(
            "paren tree: nodes need exactly two children, got {}",
            items.len()
        ))),
        other => Err(Error::Parse(format!("paren tree: unexpected value {other}"))),
    }
}

pub fn paren_tree_to_value(t: &ParenTree) -> Value {
    match t {
        ParenTree::Leaf(i) => Value::from(*i),
        ParenTree::Node(l, r) => Value::Array(vec![
            paren_tree_to_value(l),
            paren_tree_to_value(r),
        ]),
    }
}

struct SignificantDigits17;

impl serde_json::ser::Formatter for SignificantDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        // 17 significant digits reproduce any binary64 value exactly.
        write!(writer, "{value:.16e}")
    }
}

/// Serializes with floats at 17 significant digits; deterministic and
/// round-trip exact for finite values.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Numerical(format!("serialization failed: {e}")))
}

pub fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| parse_err("json", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::multiplication_dual_unit;
    use crate::random::{random_cptp, random_state, seeded_rng};

    fn m2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix("q", 2).unwrap()
    }

    #[test]
    fn element_round_trip_is_exact() {
        let mut rng = seeded_rng(1);
        let alg = AlgebraDescriptor::new(vec![("a", 2), ("b", 3)]).unwrap();
        let e = random_state(&mut rng, &alg);
        let s = to_json_string(&ElementJson::from_element(&e)).unwrap();
        let back: ElementJson = from_json_str(&s).unwrap();
        let e2 = back.to_element().unwrap();
        assert_eq!(e.distance(&e2), 0.0);
    }

    #[test]
    fn seventeen_digit_floats_round_trip_awkward_values() {
        for v in [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -0.0, 2.0_f64.powi(-40) + 1.0] {
            let s = to_json_string(&vec![v]).unwrap();
            let back: Vec<f64> = from_json_str(&s).unwrap();
            assert_eq!(v.to_bits(), back[0].to_bits(), "{s}");
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let e = multiplication_dual_unit(&m2()).scale(Complex64::new(0.5, 0.0));
        let a = to_json_string(&ElementJson::from_element(&e)).unwrap();
        let b = to_json_string(&ElementJson::from_element(&e)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ragged_and_mismatched_matrices_are_parse_errors() {
        let ragged = MatrixJson { re: vec![vec![1.0, 0.0], vec![0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(matches!(ragged.to_matrix(), Err(Error::Parse(_))));
        let mismatched = MatrixJson { re: vec![vec![1.0]], im: vec![vec![0.0], vec![0.0]] };
        assert!(matches!(mismatched.to_matrix(), Err(Error::Parse(_))));
        let empty = MatrixJson { re: vec![], im: vec![] };
        assert!(matches!(empty.to_matrix(), Err(Error::Parse(_))));
    }

    #[test]
    fn bad_algebra_is_a_parse_error() {
        let blocks = vec![
            BlockSpecJson { label: "a".into(), dim: 2 },
            BlockSpecJson { label: "a".into(), dim: 3 },
        ];
        assert!(matches!(algebra_from_json(&blocks), Err(Error::Parse(_))));
    }

    #[test]
    fn channel_matrix_round_trip() {
        let mut rng = seeded_rng(2);
        let e = random_cptp(&mut rng, &m2(), &AlgebraDescriptor::matrix("r", 3).unwrap(), 3)
            .unwrap();
        let s = to_json_string(&ChannelJson::from_superoperator(&e)).unwrap();
        let back: ChannelJson = from_json_str(&s).unwrap();
        let e2 = back.to_superoperator().unwrap();
        assert!(e.approx_eq(&e2, 0.0));
    }

    #[test]
    fn named_channels_parse() {
        let dom = algebra_to_json(&m2());
        for (name, param, expect) in [
            ("identity", None, SuperOperator::identity(m2())),
            ("depolarizing", Some(0.25), SuperOperator::depolarizing(m2(), 0.25).unwrap()),
            ("dephasing", Some(0.5), SuperOperator::dephasing(m2(), 0.5).unwrap()),
        ] {
            let c = ChannelJson {
                domain: dom.clone(),
                codomain: dom.clone(),
                kind: "named".into(),
                components: ComponentsJson::Named(NamedChannelJson {
                    name: name.into(),
                    param,
                    unitary: None,
                }),
            };
            assert!(c.to_superoperator().unwrap().approx_eq(&expect, 1e-15), "{name}");
        }
    }

    #[test]
    fn named_unitary_parses_and_needs_its_field() {
        let x = AlgebraElement::new(
            m2(),
            vec![CMatrix::from_fn(2, 2, |r, c| {
                if r != c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
            })],
        )
        .unwrap();
        let dom = algebra_to_json(&m2());
        let good = ChannelJson {
            domain: dom.clone(),
            codomain: dom.clone(),
            kind: "named".into(),
            components: ComponentsJson::Named(NamedChannelJson {
                name: "unitary".into(),
                param: None,
                unitary: Some(ElementJson::from_element(&x)),
            }),
        };
        let e = good.to_superoperator().unwrap();
        assert!(e.approx_eq(&SuperOperator::unitary_conjugation(&x).unwrap(), 1e-15));

        let missing = ChannelJson {
            domain: dom.clone(),
            codomain: dom,
            kind: "named".into(),
            components: ComponentsJson::Named(NamedChannelJson {
                name: "unitary".into(),
                param: None,
                unitary: None,
            }),
        };
        assert!(matches!(missing.to_superoperator(), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_named_channel_is_a_parse_error() {
        let dom = algebra_to_json(&m2());
        let c = ChannelJson {
            domain: dom.clone(),
            codomain: dom,
            kind: "named".into(),
            components: ComponentsJson::Named(NamedChannelJson {
                name: "teleport".into(),
                param: None,
                unitary: None,
            }),
        };
        assert!(matches!(c.to_superoperator(), Err(Error::Parse(_))));
    }

    #[test]
    fn kind_and_payload_must_match() {
        let dom = algebra_to_json(&m2());
        let c = ChannelJson {
            domain: dom.clone(),
            codomain: dom,
            kind: "matrix".into(),
            components: ComponentsJson::Named(NamedChannelJson {
                name: "identity".into(),
                param: None,
                unitary: None,
            }),
        };
        assert!(matches!(c.to_superoperator(), Err(Error::Parse(_))));
    }

    #[test]
    fn process_round_trip() {
        let mut rng = seeded_rng(3);
        let chain = crate::random::random_cptp_chain(&mut rng, &[2, 3, 2]).unwrap();
        let s = to_json_string(&ProcessJson::from_chain(&chain)).unwrap();
        let back: ProcessJson = from_json_str(&s).unwrap();
        let chain2 = back.to_chain().unwrap();
        assert_eq!(chain.rho().distance(chain2.rho()), 0.0);
        for (a, b) in chain.channels().iter().zip(chain2.channels()) {
            assert!(a.approx_eq(b, 0.0));
        }
    }

    #[test]
    fn pdo_round_trip_keeps_the_factorization() {
        let t = multiplication_dual_unit(&m2()).scale(Complex64::new(0.5, 0.0));
        let fact = TensorFactorization::new(vec![m2(), m2()]).unwrap();
        let s = to_json_string(&PdoJson::new(&t, &fact)).unwrap();
        let back: PdoJson = from_json_str(&s).unwrap();
        let (t2, fact2) = back.to_parts().unwrap();
        assert_eq!(t.distance(&t2), 0.0);
        assert_eq!(fact2.num_factors(), 2);
    }

    #[test]
    fn pdo_with_wrong_factorization_is_a_parse_error() {
        let t = multiplication_dual_unit(&m2()).scale(Complex64::new(0.5, 0.0));
        let bad = PdoJson {
            element: ElementJson::from_element(&t),
            factorization: vec![algebra_to_json(&m2())],
        };
        assert!(matches!(bad.to_parts(), Err(Error::Parse(_))));
    }

    #[test]
    fn stochastic_and_dist_round_trips() {
        let mut rng = seeded_rng(4);
        let labels = |n: usize| (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>();
        let f = crate::random::random_stochastic(&mut rng, labels(2), labels(3)).unwrap();
        let s = to_json_string(&StochasticJson::from_map(&f)).unwrap();
        let f2 = from_json_str::<StochasticJson>(&s).unwrap().to_map().unwrap();
        assert_eq!(f.probs(), f2.probs());

        let p = crate::random::random_dist(&mut rng, labels(4)).unwrap();
        let s = to_json_string(&DistJson::from_dist(&p)).unwrap();
        let p2 = from_json_str::<DistJson>(&s).unwrap().to_dist().unwrap();
        assert_eq!(p.weights(), p2.weights());

        let quasi = DistJson { set: labels(2), weights: vec![1.5, -0.5] };
        assert!(quasi.to_dist().is_err());
        assert!(quasi.to_quasi_dist().unwrap().is_quasi());
    }

    #[test]
    fn paren_tree_parsing() {
        let v: Value = serde_json::from_str("[[0,1],2]").unwrap();
        let t = paren_tree_from_value(&v).unwrap();
        assert_eq!(
            t,
            ParenTree::node(
                ParenTree::node(ParenTree::Leaf(0), ParenTree::Leaf(1)),
                ParenTree::Leaf(2)
            )
        );
        assert_eq!(paren_tree_to_value(&t), v);

        for bad in ["[0]", "[0,1,2]", "0.5", "\"x\"", "[-1,0]"] {
            let v: Value = serde_json::from_str(bad).unwrap();
            assert!(paren_tree_from_value(&v).is_err(), "{bad}");
        }
    }

    #[test]
    fn pauli_coefficients_round_trip() {
        let t = multiplication_dual_unit(&m2()).scale(Complex64::new(0.5, 0.0));
        let c = crate::qubit_pdo::pauli_coefficients(&t, 1, 1).unwrap();
        let s = to_json_string(&PauliCoefficientsJson::from_coefficients(&c)).unwrap();
        let c2 = from_json_str::<PauliCoefficientsJson>(&s)
            .unwrap()
            .to_coefficients()
            .unwrap();
        assert_eq!(c, c2);

        let bad = PauliCoefficientsJson { k: 1, n: 1, coeffs: vec![[0.0, 0.0]; 3] };
        assert!(matches!(bad.to_coefficients(), Err(Error::Parse(_))));
    }

    #[test]
    fn extraction_json_carries_diagnostics() {
        let t = multiplication_dual_unit(&m2()).scale(Complex64::new(0.5, 0.0));
        let fact = TensorFactorization::new(vec![m2(), m2()]).unwrap();
        let ext = crate::extract::extract_process(&t, &fact, false, 1e-9).unwrap();
        let j = ExtractionJson::from_extraction(&ext);
        assert_eq!(j.diagnostics.cptp, vec![true]);
        let s = to_json_string(&j).unwrap();
        let back: ExtractionJson = from_json_str(&s).unwrap();
        assert_eq!(back.diagnostics.cptp, vec![true]);
    }
}

