//! Hand-rolled reference implementations used as oracles in unit tests.
//!
//! Everything here works on plain `Vec<Vec<Complex64>>` and is written
//! independently of the production code paths (no nalgebra operations), so a
//! bug in the main implementation cannot silently infect the expected values.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type NMat = Vec<Vec<Complex64>>;

pub fn zeros(n: usize, m: usize) -> NMat {
    vec![vec![Complex64::new(0.0, 0.0); m]; n]
}

pub fn eye(n: usize) -> NMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

/// 2x2 matrix unit.
pub fn unit2(i: usize, j: usize) -> NMat {
    let mut m = zeros(2, 2);
    m[i][j] = Complex64::new(1.0, 0.0);
    m
}

pub fn matmul(a: &NMat, b: &NMat) -> NMat {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = zeros(n, m);
    for r in 0..n {
        for c in 0..m {
            let mut s = Complex64::new(0.0, 0.0);
            for t in 0..k {
                s += a[r][t] * b[t][c];
            }
            out[r][c] = s;
        }
    }
    out
}

pub fn add(a: &NMat, b: &NMat) -> NMat {
    let mut out = a.clone();
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v += b[r][c];
        }
    }
    out
}

pub fn scale(a: &NMat, s: Complex64) -> NMat {
    a.iter().map(|row| row.iter().map(|v| v * s).collect()).collect()
}

pub fn jordan(a: &NMat, b: &NMat) -> NMat {
    scale(&add(&matmul(a, b), &matmul(b, a)), Complex64::new(0.5, 0.0))
}

pub fn kron(a: &NMat, b: &NMat) -> NMat {
    let (an, am) = (a.len(), a[0].len());
    let (bn, bm) = (b.len(), b[0].len());
    let mut out = zeros(an * bn, am * bm);
    for i in 0..an {
        for j in 0..am {
            for k in 0..bn {
                for l in 0..bm {
                    out[i * bn + k][j * bm + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Reads a production matrix block into the naive representation.
pub fn from_block(m: &DMatrix<Complex64>) -> NMat {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

/// Entrywise comparison of an oracle against a production block.
pub fn matches_block(oracle: &NMat, block: &DMatrix<Complex64>, tol: f64) -> bool {
    if oracle.len() != block.nrows() || oracle[0].len() != block.ncols() {
        return false;
    }
    oracle.iter().enumerate().all(|(r, row)| {
        row.iter()
            .enumerate()
            .all(|(c, v)| (v - block[(r, c)]).norm() <= tol)
    })
}

