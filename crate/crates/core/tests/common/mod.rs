#![allow(dead_code)]

pub mod problems;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use transeig::matrix::Matrix;

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// I/2 + GᵀG / n, eigenvalues in [1/2, 1/2 + n].
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    let mut b = g
        .transpose()
        .matmul(&g)
        .scaled(1.0 / n as f64)
        .add_scaled(0.5, &Matrix::identity(n));
    b.symmetrize();
    b
}

/// Orthogonal matrix from Gram–Schmidt on random columns.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    let mut q = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            q[(i, j)] = c[i];
        }
    }
    q
}

/// Number of eigenvalues of (A, B) below σ: negative pivots of the LDLᵀ
/// factorization of A - σB (Sylvester's law of inertia).
pub fn count_below(a: &Matrix, b: &Matrix, sigma: f64) -> usize {
    let n = a.rows();
    let mut m = a.add_scaled(-sigma, b);
    let mut negatives = 0;
    for k in 0..n {
        let mut d = m[(k, k)];
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + sigma.abs());
        }
        if d < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let l = m[(i, k)] / d;
            for j in k + 1..n {
                m[(i, j)] -= l * m[(k, j)];
            }
        }
    }
    negatives
}

/// j-th smallest eigenvalue (0-based) by bisection on the inertia count.
pub fn bisect_eigenvalue(a: &Matrix, b: &Matrix, j: usize, bound: f64) -> f64 {
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(a, b, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 * bound {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues from the inertia oracle.
pub fn oracle_spectrum(a: &Matrix, b: &Matrix) -> Vec<f64> {
    // |μ| ≤ ‖A‖_F / λ_min(B) and λ_min(B) ≥ 1/2 for random_spd
    let bound = 2.0 * a.frobenius_norm() + 1.0;
    (0..a.rows())
        .map(|j| bisect_eigenvalue(a, b, j, bound))
        .collect()
}
