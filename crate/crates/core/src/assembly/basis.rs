//! Clamped cubic B-splines on a union of intervals.
//!
//! Each interval carries an open uniform knot vector with `cells` cells,
//! giving `cells + 3` cubic B-splines. Dropping the first two and last two
//! leaves the `cells - 1` splines that vanish together with their first
//! derivative at both endpoints, which span the clamped (H₀²) cubic splines.

use super::AssemblyError;

const DEGREE: usize = 3;
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBasis {
    pub a: f64,
    pub b: f64,
    pub cells: usize,
    knots: Vec<f64>,
    /// Global index of this interval's first free function.
    pub offset: usize,
}

/// Values, first and second derivatives of the four splines that are
/// nonzero on one cell; entry j belongs to full spline `cell + j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalValues {
    pub value: [f64; 4],
    pub d1: [f64; 4],
    pub d2: [f64; 4],
}

impl IntervalBasis {
    fn new(a: f64, b: f64, cells: usize, offset: usize) -> Self {
        let h = (b - a) / cells as f64;
        let mut knots = Vec::with_capacity(cells + 2 * DEGREE + 1);
        knots.extend(std::iter::repeat(a).take(DEGREE));
        for j in 0..=cells {
            knots.push(if j == cells { b } else { a + j as f64 * h });
        }
        knots.extend(std::iter::repeat(b).take(DEGREE));
        Self {
            a,
            b,
            cells,
            knots,
            offset,
        }
    }

    pub fn cell_width(&self) -> f64 {
        (self.b - self.a) / self.cells as f64
    }

    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        (self.knots[cell + DEGREE], self.knots[cell + DEGREE + 1])
    }

    /// Number of unconstrained splines, `cells + 3`.
    pub fn full_count(&self) -> usize {
        self.cells + DEGREE
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Global index of full spline `full`, or `None` when it is one of the
    /// four constrained end splines.
    pub fn global_index(&self, full: usize) -> Option<usize> {
        (2..=self.cells)
            .contains(&full)
            .then(|| self.offset + full - 2)
    }

    /// Cell containing x (the last cell owns the right endpoint).
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.a && x <= self.b) {
            return None;
        }
        let c = ((x - self.a) / self.cell_width()).floor() as usize;
        Some(c.min(self.cells - 1))
    }

    /// B-spline values and derivatives on `cell` at `x` (de Boor's
    /// triangular scheme with derivative recurrences).
    pub fn local_values(&self, cell: usize, x: f64) -> LocalValues {
        let span = cell + DEGREE;
        let u = &self.knots;
        let mut ndu = [[0.0f64; DEGREE + 1]; DEGREE + 1];
        let mut left = [0.0f64; DEGREE + 1];
        let mut right = [0.0f64; DEGREE + 1];
        ndu[0][0] = 1.0;
        for j in 1..=DEGREE {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = [[0.0f64; DEGREE + 1]; 3];
        for j in 0..=DEGREE {
            ders[0][j] = ndu[j][DEGREE];
        }
        let mut a = [[0.0f64; DEGREE + 1]; 2];
        for r in 0..=DEGREE {
            let (mut s1, mut s2) = (0, 1);
            a[0][0] = 1.0;
            for k in 1..=2usize {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = DEGREE - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize {
                    k - 1
                } else {
                    DEGREE - r
                };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = DEGREE as f64;
        for (k, row) in ders.iter_mut().enumerate().skip(1) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (DEGREE - k) as f64;
        }
        LocalValues {
            value: ders[0],
            d1: ders[1],
            d2: ders[2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClampedBasis {
    pub intervals: Vec<IntervalBasis>,
    dimension: usize,
}

impl ClampedBasis {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// (u, u', u'') at x for the global coefficient vector `coeffs`; zero
    /// outside the intervals.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> (f64, f64, f64) {
        for iv in &self.intervals {
            if let Some(cell) = iv.cell_of(x) {
                return iv.combine(coeffs, cell, &iv.local_values(cell, x));
            }
        }
        (0.0, 0.0, 0.0)
    }
}

impl IntervalBasis {
    /// Σ c_i (b_i, b_i', b_i'') over the free splines of one cell.
    pub fn combine(&self, coeffs: &[f64], cell: usize, lv: &LocalValues) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for j in 0..4 {
            if let Some(g) = self.global_index(cell + j) {
                out.0 += coeffs[g] * lv.value[j];
                out.1 += coeffs[g] * lv.d1[j];
                out.2 += coeffs[g] * lv.d2[j];
            }
        }
        out
    }
}

/// Uniform clamped cubic basis with `cells` cells on every interval.
pub fn build_basis(intervals: &[(f64, f64)], cells: usize) -> Result<ClampedBasis, AssemblyError> {
    if cells < MIN_CELLS {
        return Err(AssemblyError::TooFewCells(cells));
    }
    let mut offset = 0;
    let mut out = Vec::with_capacity(intervals.len());
    for &(a, b) in intervals {
        out.push(IntervalBasis::new(a, b, cells, offset));
        offset += cells - 1;
    }
    Ok(ClampedBasis {
        intervals: out,
        dimension: offset,
    })
}
