//! Seeded generators for states, channels, and process chains.
//!
//! Everything here is deterministic given the generator state, which is what
//! the test suites rely on for reproducibility. Channels come out of Kraus
//! sampling (exactly trace preserving by construction, up to roundoff), and
//! chains meant for extraction are blended with the fully depolarizing
//! channel so every intermediate state stays boundedly invertible.

use crate::algebra::{hermitian_eigen, AlgebraDescriptor, AlgebraElement, CMatrix};
use crate::channel::SuperOperator;
use crate::classical::{ProbDist, StochasticMap};
use crate::nstep::ProcessChain;
use crate::{Complex64, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A fixed-seed generator; the single entry point tests should use.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn ginibre_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Element with independent standard complex Gaussian entries in every block.
pub fn ginibre(rng: &mut impl Rng, alg: &AlgebraDescriptor) -> AlgebraElement {
    let blocks = (0..alg.num_blocks())
        .map(|b| ginibre_matrix(rng, alg.dim(b), alg.dim(b)))
        .collect();
    AlgebraElement::new(alg.clone(), blocks).expect("shapes match by construction")
}

/// Random self-adjoint element, (G + G†)/2 blockwise.
pub fn random_selfadjoint(rng: &mut impl Rng, alg: &AlgebraDescriptor) -> AlgebraElement {
    let g = ginibre(rng, alg);
    g.add(&g.dagger())
        .expect("same algebra")
        .scale(Complex64::new(0.5, 0.0))
}

/// Random density matrix: GG† blockwise, normalized to unit total trace.
pub fn random_state(rng: &mut impl Rng, alg: &AlgebraDescriptor) -> AlgebraElement {
    let g = ginibre(rng, alg);
    let gg = g.mul(&g.dagger()).expect("same algebra");
    let tr = gg.trace();
    gg.scale(Complex64::new(1.0 / tr.re, 0.0))
}

/// Random state blended with the maximally mixed one, so the least eigenvalue
/// is at least 0.2 / tr(1).
pub fn random_invertible_state(rng: &mut impl Rng, alg: &AlgebraDescriptor) -> AlgebraElement {
    let unit = AlgebraElement::unit(alg.clone());
    let d = unit.trace().re;
    random_state(rng, alg)
        .scale(Complex64::new(0.8, 0.0))
        .add(&unit.scale(Complex64::new(0.2 / d, 0.0)))
        .expect("same algebra")
}

/// Haar-distributed unitary per block: QR of a Ginibre matrix with the phases
/// of R's diagonal folded into Q.
pub fn random_unitary(rng: &mut impl Rng, alg: &AlgebraDescriptor) -> AlgebraElement {
    let blocks = (0..alg.num_blocks())
        .map(|b| {
            let d = alg.dim(b);
            if d == 1 {
                return CMatrix::from_element(1, 1, Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU));
            }
            let qr = ginibre_matrix(rng, d, d).qr();
            let r = qr.r();
            let mut q = qr.q();
            for j in 0..d {
                let rjj = r[(j, j)];
                let phase = if rjj.norm() > 0.0 {
                    rjj / rjj.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                };
                for i in 0..d {
                    q[(i, j)] *= phase;
                }
            }
            q
        })
        .collect();
    AlgebraElement::new(alg.clone(), blocks).expect("shapes match by construction")
}

/// Random CPTP map between single-block algebras via `kraus` Ginibre Kraus
/// operators, normalized with S^{-1/2} where S = sum K† K.
pub fn random_cptp(
    rng: &mut impl Rng,
    domain: &AlgebraDescriptor,
    codomain: &AlgebraDescriptor,
    kraus: usize,
) -> Result<SuperOperator> {
    if domain.num_blocks() != 1 || codomain.num_blocks() != 1 {
        return Err(Error::InvalidAlgebra(
            "Kraus sampling is implemented for single-block endpoints".into(),
        ));
    }
    if kraus == 0 {
        return Err(Error::EmptyList("need at least one Kraus operator".into()));
    }
    let din = domain.dim(0);
    let dout = codomain.dim(0);
    let raw: Vec<CMatrix> = (0..kraus).map(|_| ginibre_matrix(rng, dout, din)).collect();
    let mut s = CMatrix::zeros(din, din);
    for k in &raw {
        s += k.adjoint() * k;
    }
    // S is positive definite almost surely; S^{-1/2} through its eigenbasis.
    let (vals, u) = hermitian_eigen(&s);
    if vals.iter().any(|&v| v <= 1e-12) {
        return Err(Error::Numerical(
            "degenerate Kraus sample, normalizer not invertible".into(),
        ));
    }
    let inv_sqrt = &u
        * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            din,
            vals.iter().map(|&v| Complex64::new(1.0 / v.sqrt(), 0.0)),
        ))
        * u.adjoint();
    let ops: Vec<CMatrix> = raw.into_iter().map(|k| k * &inv_sqrt).collect();

    let codomain_cl = codomain.clone();
    SuperOperator::from_function(domain.clone(), codomain.clone(), move |x| {
        let mut out = CMatrix::zeros(dout, dout);
        for k in &ops {
            out += k * x.block(0) * k.adjoint();
        }
        AlgebraElement::new(codomain_cl.clone(), vec![out])
    })
}

/// Random trace-preserving, dagger-preserving map. Half the samples are plain
/// CPTP; the rest are real affine combinations of two CPTP maps with a mixing
/// weight outside [0, 1], which keeps TP and dagger-preservation but
/// generically loses complete positivity.
pub fn random_tp_dagger_preserving(
    rng: &mut impl Rng,
    alg: &AlgebraDescriptor,
) -> Result<SuperOperator> {
    let e1 = random_cptp(rng, alg, alg, 3)?;
    if rng.gen::<bool>() {
        return Ok(e1);
    }
    let e2 = random_cptp(rng, alg, alg, 3)?;
    let lam = Complex64::new(1.25 + rng.gen::<f64>(), 0.0);
    let one_minus = Complex64::new(1.0, 0.0) - lam;
    SuperOperator::from_function(alg.clone(), alg.clone(), move |x| {
        e1.apply(x)?.scale(lam).add(&e2.apply(x)?.scale(one_minus))
    })
}

/// Random trace-preserving map that is not dagger-preserving: a CPTP map plus
/// i s (U . U† − V . V†) for independent Haar unitaries. The added term is
/// traceless on every input but flips sign under the adjoint. Resamples until
/// the dagger defect is bounded away from zero.
pub fn random_tp_not_dagger_preserving(
    rng: &mut impl Rng,
    alg: &AlgebraDescriptor,
) -> Result<SuperOperator> {
    loop {
        let e = random_cptp(rng, alg, alg, 3)?;
        let u = random_unitary(rng, alg);
        let v = random_unitary(rng, alg);
        let s = Complex64::new(0.0, 0.2 + 0.3 * rng.gen::<f64>());
        let candidate = SuperOperator::from_function(alg.clone(), alg.clone(), {
            let u = u.clone();
            let v = v.clone();
            move |x| {
                let skew = u
                    .mul(x)?
                    .mul(&u.dagger())?
                    .sub(&v.mul(x)?.mul(&v.dagger())?)?;
                e.apply(x)?.add(&skew.scale(s))
            }
        })?;
        let report = crate::channel::verify(&candidate, crate::DEFAULT_TOL);
        if report.dagger_direct_deviation > 1e-3 {
            return Ok(candidate);
        }
    }
}

/// Column-stochastic map with Dirichlet(1,...,1) columns.
pub fn random_stochastic(
    rng: &mut impl Rng,
    source: Vec<String>,
    target: Vec<String>,
) -> Result<StochasticMap> {
    let rows = target.len();
    let cols = source.len();
    let mut probs = nalgebra::DMatrix::<f64>::zeros(rows, cols);
    for c in 0..cols {
        let mut col: Vec<f64> = (0..rows).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
        let total: f64 = col.iter().sum();
        for v in &mut col {
            *v /= total;
        }
        for (r, v) in col.into_iter().enumerate() {
            probs[(r, c)] = v;
        }
    }
    StochasticMap::new(source, target, probs)
}

/// Distribution with Dirichlet(1,...,1) weights; strictly positive almost
/// surely.
pub fn random_dist(rng: &mut impl Rng, set: Vec<String>) -> Result<ProbDist> {
    let mut w: Vec<f64> = (0..set.len())
        .map(|_| -rng.gen::<f64>().max(1e-12).ln())
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    ProbDist::new(set, w)
}

/// Chain of `dims.len() - 1` random CPTP channels through the listed
/// single-block slot dimensions, started at a random invertible state.
pub fn random_cptp_chain(rng: &mut impl Rng, dims: &[usize]) -> Result<ProcessChain> {
    if dims.len() < 2 {
        return Err(Error::EmptyList("a chain needs at least two slots".into()));
    }
    let algebras: Vec<AlgebraDescriptor> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| AlgebraDescriptor::matrix(&format!("t{i}"), d))
        .collect::<Result<Vec<_>>>()?;
    let rho = random_invertible_state(rng, &algebras[0]);
    let channels = (1..dims.len())
        .map(|i| {
            let k = dims[i - 1] * dims[i - 1];
            random_cptp(rng, &algebras[i - 1], &algebras[i], k.max(2))
        })
        .collect::<Result<Vec<_>>>()?;
    ProcessChain::new(rho, channels, crate::DEFAULT_TOL)
}

/// Chain whose initial state and every intermediate state are invertible with
/// margin: the state and each channel are blended 0.8/0.2 with the maximally
/// mixed state and the fully depolarizing channel.
pub fn random_invertible_chain(rng: &mut impl Rng, dims: &[usize]) -> Result<ProcessChain> {
    if dims.len() < 2 {
        return Err(Error::EmptyList("a chain needs at least two slots".into()));
    }
    let algebras: Vec<AlgebraDescriptor> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| AlgebraDescriptor::matrix(&format!("t{i}"), d))
        .collect::<Result<Vec<_>>>()?;
    let rho = random_invertible_state(rng, &algebras[0]);
    let channels = (1..dims.len())
        .map(|i| {
            let e = random_cptp(rng, &algebras[i - 1], &algebras[i], 3)?;
            let cod = algebras[i].clone();
            let dout = dims[i] as f64;
            SuperOperator::from_function(algebras[i - 1].clone(), algebras[i].clone(), move |x| {
                let tr = x.trace();
                e.apply(x)?
                    .scale(Complex64::new(0.8, 0.0))
                    .add(&AlgebraElement::unit(cod.clone()).scale(tr * 0.2 / dout))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ProcessChain::new(rho, channels, crate::DEFAULT_TOL)
}

/// Classical chain over point sets of the given sizes: a random distribution
/// pushed through random stochastic maps, all embedded as 1x1-block quantum
/// objects.
pub fn random_classical_chain(rng: &mut impl Rng, sizes: &[usize]) -> Result<ProcessChain> {
    if sizes.len() < 2 {
        return Err(Error::EmptyList("a chain needs at least two slots".into()));
    }
    let labels: Vec<Vec<String>> = sizes
        .iter()
        .map(|&s| (0..s).map(|j| format!("x{j}")).collect())
        .collect();
    let dist = random_dist(rng, labels[0].clone())?;
    let rho = dist.to_element();
    let channels = (1..sizes.len())
        .map(|i| {
            let f = random_stochastic(rng, labels[i - 1].clone(), labels[i].clone())?;
            Ok(crate::classical::q_embed(&f))
        })
        .collect::<Result<Vec<_>>>()?;
    ProcessChain::new(rho, channels, crate::DEFAULT_TOL)
}
