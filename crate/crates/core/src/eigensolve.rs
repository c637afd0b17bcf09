//! Dense symmetric-definite eigensolver for `A v = μ B v`.
//!
//! `B = L Lᵀ` reduces the pencil to the symmetric `L⁻¹ A L⁻ᵀ`, which is
//! brought to tridiagonal form by Householder reflections and diagonalized
//! by QL iteration with implicit Wilkinson-type shifts. The full spectrum is
//! computed and the lowest `K` values returned.

use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;

const PIVOT_RELATIVE_FLOOR: f64 = 1e-13;
const MAX_QL_SWEEPS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("QL iteration did not converge for eigenvalue {0}")]
    NoConvergence(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Lowest eigenvalues of a pencil, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSlice {
    pub eigenvalues: Vec<f64>,
    pub dimension: usize,
}

/// Lower-triangular `L` with `B = L Lᵀ`.
pub fn cholesky(b: &Matrix) -> Result<Matrix, EigenError> {
    if !b.is_square() {
        return Err(EigenError::DimensionMismatch(format!(
            "{}x{} is not square",
            b.rows(),
            b.cols()
        )));
    }
    let n = b.rows();
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(b[(i, i)].abs()));
    let floor = PIVOT_RELATIVE_FLOOR * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = b[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > floor) {
            return Err(EigenError::NotPositiveDefinite { row: j, pivot });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// `L⁻¹ A L⁻ᵀ` by two triangular solves.
fn reduce(a: &Matrix, l: &Matrix) -> Matrix {
    let n = a.rows();
    // X = L⁻¹ A
    let mut x = a.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    // C = X L⁻ᵀ, i.e. Cᵀ = L⁻¹ Xᵀ; rows of C solve L cᵀ = xᵀ
    let mut c = Matrix::zeros(n, n);
    for row in 0..n {
        for j in 0..n {
            let mut s = x[(row, j)];
            for k in 0..j {
                s -= l[(j, k)] * c[(row, k)];
            }
            c[(row, j)] = s / l[(j, j)];
        }
    }
    c.symmetrize();
    c
}

/// Householder reduction of symmetric `z` to tridiagonal (diag, offdiag).
/// With `accumulate`, `z` is overwritten by the orthogonal transform.
fn tridiagonalize(z: &mut Matrix, accumulate: bool) -> (Vec<f64>, Vec<f64>) {
    let n = z.rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..i).map(|k| z[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = z[(i, l)];
            } else {
                for k in 0..i {
                    z[(i, k)] /= scale;
                    h += z[(i, k)] * z[(i, k)];
                }
                let f = z[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..i {
                    if accumulate {
                        z[(j, i)] = z[(i, j)] / h;
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[(j, k)] * z[(i, k)];
                    }
                    for k in j + 1..i {
                        g += z[(k, j)] * z[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * z[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = z[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[(j, k)] -= f * e[k] + g * z[(i, k)];
                    }
                }
            }
        } else {
            e[i] = z[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if accumulate {
            if d[i] != 0.0 {
                for j in 0..i {
                    let g: f64 = (0..i).map(|k| z[(i, k)] * z[(k, j)]).sum();
                    for k in 0..i {
                        z[(k, j)] -= g * z[(k, i)];
                    }
                }
            }
            d[i] = z[(i, i)];
            z[(i, i)] = 1.0;
            for j in 0..i {
                z[(j, i)] = 0.0;
                z[(i, j)] = 0.0;
            }
        } else {
            d[i] = z[(i, i)];
        }
    }
    (d, e)
}

/// QL with implicit shifts on the tridiagonal (d, e); e[i] couples rows
/// i-1 and i on entry. Rotations are applied to `vectors` when given.
fn tridiagonal_ql(
    d: &mut [f64],
    e: &mut [f64],
    mut vectors: Option<&mut Matrix>,
) -> Result<(), EigenError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(EigenError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = vectors.as_deref_mut() {
                    for k in 0..z.rows() {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn check_pencil(a: &Matrix, b: &Matrix) -> Result<(), EigenError> {
    if !a.is_square() || a.rows() != b.rows() || b.rows() != b.cols() {
        return Err(EigenError::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Full ascending spectrum of the pencil (A, B).
pub fn generalized_eigenvalues(a: &Matrix, b: &Matrix) -> Result<Vec<f64>, EigenError> {
    check_pencil(a, b)?;
    let l = cholesky(b)?;
    let mut c = reduce(a, &l);
    let (mut d, mut e) = tridiagonalize(&mut c, false);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Lowest `k` eigenvalues of `B⁻¹A`, ascending.
pub fn lowest_k(a: &Matrix, b: &Matrix, k: usize) -> Result<SpectrumSlice, EigenError> {
    if k == 0 {
        return Err(EigenError::DimensionMismatch("K must be at least 1".into()));
    }
    let mut values = generalized_eigenvalues(a, b)?;
    let dimension = values.len();
    values.truncate(k);
    Ok(SpectrumSlice {
        eigenvalues: values,
        dimension,
    })
}

#[doc(hidden)]
/// Eigenpairs with B-orthonormal eigenvectors as columns, ascending.
/// Used to check residuals; not needed by the sweep.
pub fn generalized_eigenpairs(a: &Matrix, b: &Matrix) -> Result<(Vec<f64>, Matrix), EigenError> {
    check_pencil(a, b)?;
    let n = a.rows();
    let l = cholesky(b)?;
    let mut z = reduce(a, &l);
    let (mut d, mut e) = tridiagonalize(&mut z, true);
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;
    // v = L⁻ᵀ z, column by column
    let mut v = Matrix::zeros(n, n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = z[(i, col)];
            for k in i + 1..n {
                s -= l[(k, i)] * v[(k, col)];
            }
            v[(i, col)] = s / l[(i, i)];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut sorted = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            sorted[(r, new)] = v[(r, old)];
        }
    }
    Ok((values, sorted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_examples() {
        assert_eq!(cholesky(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let l = cholesky(&Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]])).unwrap();
        assert_eq!(l, Matrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 2.0]]));
        let bad = cholesky(&Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]));
        assert!(matches!(
            bad,
            Err(EigenError::NotPositiveDefinite { row: 1, .. })
        ));
    }

    #[test]
    fn small_pencils() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let s = lowest_k(&a, &Matrix::identity(2), 2).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 3.0).abs() < 1e-14);

        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 6.0]]);
        let b = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let s = lowest_k(&a, &b, 2).unwrap();
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-14 && (s.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert_eq!(s.dimension, 2);
    }

    #[test]
    fn truncates_to_k() {
        let a = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let s = lowest_k(&a, &Matrix::identity(3), 2).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15 && (s.eigenvalues[1] - 2.0).abs() < 1e-15);
        let all = lowest_k(&a, &Matrix::identity(3), 10).unwrap();
        assert_eq!(all.eigenvalues.len(), 3);
        assert!(lowest_k(&a, &Matrix::identity(3), 0).is_err());
    }

    #[test]
    fn one_by_one_and_mismatch() {
        let s = lowest_k(
            &Matrix::from_rows(&[vec![6.0]]),
            &Matrix::from_rows(&[vec![2.0]]),
            1,
        )
        .unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-15);
        assert!(matches!(
            lowest_k(&Matrix::identity(2), &Matrix::identity(3), 1),
            Err(EigenError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn degenerate_values_are_adjacent() {
        let s = lowest_k(&Matrix::identity(4).scaled(5.0), &Matrix::identity(4), 4).unwrap();
        assert!(s.eigenvalues.iter().all(|v| (v - 5.0).abs() < 1e-14));
    }

    #[test]
    fn second_difference_matrix_has_known_spectrum() {
        let n = 40;
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let s = lowest_k(&a, &Matrix::identity(n), n).unwrap();
        for (j, v) in s.eigenvalues.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12);
        }
    }
}
