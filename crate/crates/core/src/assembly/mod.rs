//! Galerkin assembly of the quadratic form family on interval unions.
//!
//! In one dimension the form
//! `Q_λ(u) = ⟨(-Δ + W_λ - λ)u, (1/V)(-Δ - λ)u⟩`, with `W_λ = V`
//! (Schrödinger) or `W_λ = λV` (Helmholtz), expands after integrating
//! `-∫u u''` by parts on the clamped space into six symmetric pieces:
//!
//! ```text
//! Schrödinger: A(λ) = (S + K) + λ(C - M) + λ² Minv
//! Helmholtz:   A(λ) =  S      + λ(C + K) + λ²(Minv - M)
//! ```
//!
//! with `S = ∫b''b''/V`, `C = ∫(b''b + b b'')/V`, `K = ∫b'b'`, `M = ∫b b`,
//! `Minv = ∫b b/V` and the ambient mass `Mw = ∫w b b`.
//! [`direct_form_value`] evaluates the unexpanded product pointwise and is
//! the reference the expansion is tested against.

pub mod basis;
pub mod quadrature;

use thiserror::Error;

use crate::matrix::Matrix;
use crate::model::{PotentialSpec, ProblemKind, WeightKind};

pub use basis::{build_basis, ClampedBasis, IntervalBasis, LocalValues};
pub use quadrature::{gauss_legendre, QuadratureRule};

const ASYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("at least {min} cells per interval are required (got {0})", min = basis::MIN_CELLS)]
    TooFewCells(usize),
    #[error("gauss-legendre order {0} outside 1..={max}", max = quadrature::MAX_ORDER)]
    OrderOutOfRange(usize),
    #[error("assembled {matrix} is asymmetric by {asymmetry:e}")]
    AsymmetricAssembly {
        matrix: &'static str,
        asymmetry: f64,
    },
}

/// The six matrices from which `A(λ)` is built for any λ.
#[derive(Debug, Clone, PartialEq)]
pub struct FormMatrices {
    pub s: Matrix,
    pub c: Matrix,
    pub k: Matrix,
    pub m: Matrix,
    pub minv: Matrix,
    pub mw: Matrix,
}

impl FormMatrices {
    pub fn dimension(&self) -> usize {
        self.m.rows()
    }

    fn named(&mut self) -> [(&'static str, &mut Matrix); 6] {
        [
            ("S", &mut self.s),
            ("C", &mut self.c),
            ("K", &mut self.k),
            ("M", &mut self.m),
            ("Minv", &mut self.minv),
            ("Mw", &mut self.mw),
        ]
    }
}

/// Per-cell Gauss–Legendre assembly of the six form matrices.
pub fn assemble(
    basis: &ClampedBasis,
    potential: &PotentialSpec,
    weight: &WeightKind,
    quad: &QuadratureRule,
) -> Result<FormMatrices, AssemblyError> {
    let n = basis.dimension();
    let mut out = FormMatrices {
        s: Matrix::zeros(n, n),
        c: Matrix::zeros(n, n),
        k: Matrix::zeros(n, n),
        m: Matrix::zeros(n, n),
        minv: Matrix::zeros(n, n),
        mw: Matrix::zeros(n, n),
    };
    for iv in &basis.intervals {
        for cell in 0..iv.cells {
            let (a, b) = iv.cell_bounds(cell);
            let idx: [Option<usize>; 4] = std::array::from_fn(|j| iv.global_index(cell + j));
            for (x, wq) in quad.mapped(a, b) {
                let lv = iv.local_values(cell, x);
                let inv_v = 1.0 / potential.value(x);
                let w = weight.value(x);
                for (i, gi) in idx.iter().enumerate() {
                    let Some(gi) = *gi else { continue };
                    for (j, gj) in idx.iter().enumerate() {
                        let Some(gj) = *gj else { continue };
                        let bb = lv.value[i] * lv.value[j];
                        out.s[(gi, gj)] += wq * inv_v * lv.d2[i] * lv.d2[j];
                        out.c[(gi, gj)] +=
                            wq * inv_v * (lv.d2[i] * lv.value[j] + lv.value[i] * lv.d2[j]);
                        out.k[(gi, gj)] += wq * lv.d1[i] * lv.d1[j];
                        out.m[(gi, gj)] += wq * bb;
                        out.minv[(gi, gj)] += wq * inv_v * bb;
                        out.mw[(gi, gj)] += wq * w * bb;
                    }
                }
            }
        }
    }
    for (name, mat) in out.named() {
        let asym = mat.max_asymmetry();
        if asym > ASYMMETRY_TOL * mat.max_abs().max(1.0) {
            return Err(AssemblyError::AsymmetricAssembly {
                matrix: name,
                asymmetry: asym,
            });
        }
        mat.symmetrize();
    }
    Ok(out)
}

/// The symmetric matrix of `Q_λ` on the basis span.
pub fn assemble_a(m: &FormMatrices, kind: ProblemKind, lambda: f64) -> Matrix {
    let l2 = lambda * lambda;
    match kind {
        ProblemKind::Schrodinger => {
            m.s.add_scaled(1.0, &m.k)
                .add_scaled(lambda, &m.c)
                .add_scaled(-lambda, &m.m)
                .add_scaled(l2, &m.minv)
        }
        ProblemKind::Helmholtz => {
            m.s.add_scaled(lambda, &m.c)
                .add_scaled(lambda, &m.k)
                .add_scaled(l2, &m.minv)
                .add_scaled(-l2, &m.m)
        }
    }
}

/// `∫ (-u'' + (W - λ)u) (1/V) (-u'' - λu)` by quadrature, W = V or λV.
pub fn direct_form_value(
    basis: &ClampedBasis,
    potential: &PotentialSpec,
    kind: ProblemKind,
    quad: &QuadratureRule,
    u: &[f64],
    lambda: f64,
) -> f64 {
    let mut total = 0.0;
    for iv in &basis.intervals {
        for cell in 0..iv.cells {
            let (a, b) = iv.cell_bounds(cell);
            for (x, wq) in quad.mapped(a, b) {
                let (val, _, d2) = iv.combine(u, cell, &iv.local_values(cell, x));
                let v = potential.value(x);
                let shifted = match kind {
                    ProblemKind::Schrodinger => v,
                    ProblemKind::Helmholtz => lambda * v,
                };
                let left = -d2 + (shifted - lambda) * val;
                let right = -d2 - lambda * val;
                total += wq * left * right / v;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(
        potential: PotentialSpec,
        weight: WeightKind,
    ) -> (ClampedBasis, QuadratureRule, FormMatrices) {
        let basis = build_basis(&[(-1.0, 1.5), (2.0, 3.0)], 10).unwrap();
        let quad = gauss_legendre(8).unwrap();
        let m = assemble(&basis, &potential, &weight, &quad).unwrap();
        (basis, quad, m)
    }

    #[test]
    fn constant_potential_factors_out() {
        let (_, _, m) = setup(PotentialSpec::Constant { v0: 0.75 }, WeightKind::Unweighted);
        assert!(m.minv.add_scaled(-1.0 / 0.75, &m.m).max_abs() < 1e-12);
        assert_eq!(m.mw, m.m);
    }

    #[test]
    fn agmon_mass_dominates_plain_mass() {
        let (_, _, m) = setup(
            PotentialSpec::Constant { v0: 0.75 },
            WeightKind::Agmon { alpha: 4.0 },
        );
        for i in 0..m.dimension() {
            assert!(m.mw[(i, i)] > m.m[(i, i)]);
        }
    }

    #[test]
    fn spline_integrals_match_closed_form() {
        // ∫ N_i = (t_{i+4} - t_i) / 4 for every cubic B-spline
        let basis = build_basis(&[(0.0, 1.0)], 8).unwrap();
        let quad = gauss_legendre(8).unwrap();
        let iv = &basis.intervals[0];
        let knots = iv.knots();
        let mut integrals = vec![0.0; iv.full_count()];
        for cell in 0..iv.cells {
            let (a, b) = iv.cell_bounds(cell);
            for (x, w) in quad.mapped(a, b) {
                let lv = iv.local_values(cell, x);
                for j in 0..4 {
                    integrals[cell + j] += w * lv.value[j];
                }
            }
        }
        for (i, got) in integrals.iter().enumerate() {
            let exact = (knots[i + 4] - knots[i]) / 4.0;
            assert!((got - exact).abs() < 1e-13, "spline {i}: {got} vs {exact}");
        }
    }

    #[test]
    fn a_at_zero() {
        let (_, _, m) = setup(
            PotentialSpec::PowerDecay { c: 1.0, alpha: 4.0 },
            WeightKind::Unweighted,
        );
        assert_eq!(
            assemble_a(&m, ProblemKind::Schrodinger, 0.0),
            m.s.add_scaled(1.0, &m.k)
        );
        assert_eq!(
            assemble_a(&m, ProblemKind::Helmholtz, 0.0)
                .add_scaled(-1.0, &m.s)
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn all_six_are_symmetric() {
        let (_, _, m) = setup(
            PotentialSpec::PowerDecay { c: 2.0, alpha: 3.5 },
            WeightKind::Agmon { alpha: 3.5 },
        );
        for mat in [&m.s, &m.c, &m.k, &m.m, &m.minv, &m.mw] {
            assert!(mat.max_asymmetry() <= 1e-13);
        }
    }

    #[test]
    fn expanded_form_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for potential in [
            PotentialSpec::Constant { v0: 0.75 },
            PotentialSpec::PowerDecay { c: 1.3, alpha: 4.0 },
        ] {
            let (basis, quad, m) = setup(potential, WeightKind::Unweighted);
            for kind in [ProblemKind::Schrodinger, ProblemKind::Helmholtz] {
                for lambda in [-1.0, 0.0, 0.7, 3.2] {
                    let a = assemble_a(&m, kind, lambda);
                    for _ in 0..20 {
                        let u: Vec<f64> = (0..basis.dimension())
                            .map(|_| rng.gen_range(-1.0..1.0))
                            .collect();
                        let expanded = a.quadratic_form(&u);
                        let direct = direct_form_value(&basis, &potential, kind, &quad, &u, lambda);
                        assert!((expanded - direct).abs() <= 1e-10 * (1.0 + expanded.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn direct_form_is_quadratic() {
        let (basis, quad, _) = setup(PotentialSpec::Constant { v0: 0.75 }, WeightKind::Unweighted);
        let zero = vec![0.0; basis.dimension()];
        let pot = PotentialSpec::Constant { v0: 0.75 };
        assert_eq!(
            direct_form_value(&basis, &pot, ProblemKind::Helmholtz, &quad, &zero, 2.0),
            0.0
        );
        let u: Vec<f64> = (0..basis.dimension()).map(|i| (i as f64).cos()).collect();
        let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        let q1 = direct_form_value(&basis, &pot, ProblemKind::Schrodinger, &quad, &u, 1.1);
        let q2 = direct_form_value(&basis, &pot, ProblemKind::Schrodinger, &quad, &u2, 1.1);
        assert!((q2 - 4.0 * q1).abs() <= 1e-12 * q2.abs());
    }

    #[test]
    fn order_zero_quadrature_is_rejected() {
        assert_eq!(gauss_legendre(0), Err(AssemblyError::OrderOutOfRange(0)));
    }
}
