//! Reference implementations that share no code with the library: plain
//! loops and Gaussian elimination instead of SVD.
#![allow(dead_code)]

use locc_core::{BipartiteState, ComplexMatrix, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut StdRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random matrix of the given rank: product of `rows x rank` and
/// `rank x cols` Gaussian factors.
pub fn random_of_rank(rng: &mut StdRng, rows: usize, cols: usize, rank: usize) -> ComplexMatrix {
    let l = random_matrix(rng, rows, rank);
    let r = random_matrix(rng, rank, cols);
    &l * &r
}

/// Haar-ish unitary: Gram-Schmidt on the columns of a Gaussian matrix.
pub fn random_unitary(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| gaussian(rng)).collect()).collect();
    for i in 0..n {
        for k in 0..i {
            let dot: C64 = (0..n).map(|r| cols[k][r].conj() * cols[i][r]).sum();
            for r in 0..n {
                let sub = dot * cols[k][r];
                cols[i][r] -= sub;
            }
        }
        let norm = cols[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[i].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(n, n, |r, c| cols[c][r])
}

/// Rank by Gaussian elimination with full pivoting; pivots below
/// `eps · max|entry|` count as zero.
pub fn gauss_rank(m: &ComplexMatrix, eps: f64) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<C64>> = (0..rows).map(|r| (0..cols).map(|c| m[(r, c)]).collect()).collect();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for _ in 0..rows.min(cols) {
        let mut best = (0.0, 0, 0);
        for (r, row) in a.iter().enumerate().skip(rank) {
            for (c, z) in row.iter().enumerate().skip(rank) {
                if z.norm() > best.0 {
                    best = (z.norm(), r, c);
                }
            }
        }
        if best.0 <= eps * scale {
            break;
        }
        a.swap(rank, best.1);
        for row in a.iter_mut() {
            row.swap(rank, best.2);
        }
        let p = a[rank][rank];
        for r in rank + 1..rows {
            let f = a[r][rank] / p;
            for c in rank..cols {
                let sub = f * a[rank][c];
                a[r][c] -= sub;
            }
        }
        rank += 1;
    }
    rank
}

/// Amplitudes of `Σ M[n][m] |m⟩|n⟩` at index `m·D_B + n`.
pub fn amplitudes(s: &BipartiteState) -> Vec<C64> {
    let (da, db) = s.dims();
    let mut v = Vec::with_capacity(da * db);
    for m in 0..da {
        for n in 0..db {
            v.push(s.coeff()[(n, m)]);
        }
    }
    v
}

/// `(a ⊗ b)|ψ⟩` by explicit summation.
pub fn apply_product(a: &ComplexMatrix, b: &ComplexMatrix, psi: &[C64]) -> Vec<C64> {
    let (da, db) = (a.cols(), b.cols());
    let mut out = vec![C64::new(0.0, 0.0); a.rows() * b.rows()];
    for m in 0..a.rows() {
        for n in 0..b.rows() {
            let mut acc = C64::new(0.0, 0.0);
            for m2 in 0..da {
                for n2 in 0..db {
                    acc += a[(m, m2)] * b[(n, n2)] * psi[m2 * db + n2];
                }
            }
            out[m * b.rows() + n] = acc;
        }
    }
    out
}

/// Schmidt rank of an amplitude vector on `da x db`.
pub fn schmidt_rank_of(psi: &[C64], da: usize, db: usize) -> usize {
    gauss_rank(&ComplexMatrix::from_fn(da, db, |m, n| psi[m * db + n]), 1e-9)
}

pub fn norm_sqr(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
