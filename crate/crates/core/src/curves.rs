//! Eigenvalue curves μ_ν(λ) of the pencil (A(λ), Mw) and their zeros.
//!
//! μ_ν is the ν-th sorted eigenvalue. It is continuous in λ, so a sign
//! change between two grid points brackets a zero, and the zeros are
//! exactly the λ where A(λ) is singular. Since inertia of A(λ) does not
//! depend on the positive definite mass, the located λ do not depend on the
//! weight either.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::assembly::{
    assemble, assemble_a, build_basis, gauss_legendre, AssemblyError, FormMatrices,
};
use crate::eigensolve::{lowest_k, EigenError};
use crate::model::{ModelError, ProblemKind, SweepConfig, ValidatedProblem};
use crate::output;

const EXACT_ZERO: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("eigensolver failed at lambda = {lambda}: {source}")]
    Solver { lambda: f64, source: EigenError },
    #[error("curve {index} has equal signs at both ends of ({lo}, {hi})")]
    BracketInvalid { index: usize, lo: f64, hi: f64 },
}

/// Sorted lowest K eigenvalues at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub lambdas: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn num_curves(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// `lambda,mu_1,...,mu_K`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["lambda".to_string()];
        header.extend((1..=self.num_curves()).map(|i| format!("mu_{i}")));
        let rows: Vec<Vec<f64>> = self
            .lambdas
            .iter()
            .zip(&self.values)
            .map(|(&l, v)| std::iter::once(l).chain(v.iter().copied()).collect())
            .collect();
        output::to_csv(&header, &rows)
    }

    fn curve(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[index - 1])
    }
}

/// Sign change (or exact zero when `lo == hi`) of curve `index` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub index: usize,
    pub lambda: f64,
    pub bracket: (f64, f64),
    /// |μ_index| at `lambda`.
    pub residual: f64,
    /// |Δμ/Δλ| over the bracket, the curve scale the residual is judged by.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportEntry {
    pub lambda: f64,
    pub curve_index: usize,
    pub multiplicity_estimate: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridInfo {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub problem_hash: String,
    pub problem: ProblemKind,
    pub dimension: usize,
    pub num_curves: usize,
    pub grid: GridInfo,
    pub refine_tol: f64,
    pub cluster_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TEReport {
    pub transmission_eigenvalues: Vec<ReportEntry>,
    pub metadata: ReportMetadata,
}

impl TEReport {
    pub fn lambdas(&self) -> Vec<f64> {
        self.transmission_eigenvalues
            .iter()
            .map(|e| e.lambda)
            .collect()
    }

    /// Count of entries in [lo, hi] weighted by multiplicity estimate.
    pub fn weighted_count(&self, lo: f64, hi: f64) -> usize {
        self.transmission_eigenvalues
            .iter()
            .filter(|e| e.lambda >= lo && e.lambda <= hi)
            .map(|e| e.multiplicity_estimate)
            .sum()
    }
}

/// Hex SHA-256 of the problem's canonical JSON.
pub fn problem_hash(problem: &ValidatedProblem) -> String {
    let digest = Sha256::digest(output::to_json(problem).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Basis, quadrature and the six form matrices of a validated problem.
pub fn discretize(problem: &ValidatedProblem) -> Result<FormMatrices, CurveError> {
    let disc = &problem.discretization;
    let basis = build_basis(problem.intervals()?, disc.cells_per_interval)?;
    let quad = gauss_legendre(disc.quad_points)?;
    Ok(assemble(
        &basis,
        &problem.potential,
        &problem.weight,
        &quad,
    )?)
}

fn lowest(
    kind: ProblemKind,
    m: &FormMatrices,
    lambda: f64,
    k: usize,
) -> Result<Vec<f64>, CurveError> {
    lowest_k(&assemble_a(m, kind, lambda), &m.mw, k)
        .map(|s| s.eigenvalues)
        .map_err(|source| CurveError::Solver { lambda, source })
}

/// μ_index(λ), 1-based.
pub fn sorted_eigenvalue(
    kind: ProblemKind,
    m: &FormMatrices,
    lambda: f64,
    index: usize,
) -> Result<f64, CurveError> {
    Ok(lowest(kind, m, lambda, index)?[index - 1])
}

/// Lowest `num_curves` eigenvalues on the grid of `cfg`, rows in grid order.
pub fn sweep(
    kind: ProblemKind,
    matrices: &FormMatrices,
    cfg: &SweepConfig,
    num_curves: usize,
) -> Result<CurveTable, CurveError> {
    let lambdas = cfg.grid();
    let values = lambdas
        .par_iter()
        .map(|&l| lowest(kind, matrices, l, num_curves))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CurveTable { lambdas, values })
}

/// Sign-change brackets of every sorted curve, ordered by curve then λ.
pub fn find_crossings(table: &CurveTable) -> Vec<Bracket> {
    let mut out = Vec::new();
    for index in 1..=table.num_curves() {
        let mu: Vec<f64> = table.curve(index).collect();
        let scale = mu.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let zero = |v: f64| v.abs() < EXACT_ZERO * scale;
        for (i, &v) in mu.iter().enumerate() {
            let l = table.lambdas[i];
            if zero(v) {
                out.push(Bracket {
                    index,
                    lo: l,
                    hi: l,
                });
                continue;
            }
            if let Some(&w) = mu.get(i + 1) {
                if !zero(w) && v.signum() != w.signum() {
                    out.push(Bracket {
                        index,
                        lo: l,
                        hi: table.lambdas[i + 1],
                    });
                }
            }
        }
    }
    out
}

/// Bisection on λ ↦ μ_index(λ) until the bracket is narrower than `tol`.
pub fn refine(
    kind: ProblemKind,
    m: &FormMatrices,
    bracket: Bracket,
    tol: f64,
) -> Result<Crossing, CurveError> {
    let Bracket { index, lo, hi } = bracket;
    let f = |l: f64| sorted_eigenvalue(kind, m, l, index);
    if lo == hi {
        let v = f(lo)?;
        return Ok(Crossing {
            index,
            lambda: lo,
            bracket: (lo, hi),
            residual: v.abs(),
            slope: 0.0,
        });
    }
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(CurveError::BracketInvalid { index, lo, hi });
    }
    let slope = ((f_hi - f_lo) / (hi - lo)).abs();
    let (mut a, mut b) = (lo, hi);
    let sign_a = f_lo.signum();
    for _ in 0..MAX_BISECTIONS {
        if b - a < tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let v = f(mid)?;
        if v == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if v.signum() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    let lambda = 0.5 * (a + b);
    Ok(Crossing {
        index,
        lambda,
        bracket: (lo, hi),
        residual: f(lambda)?.abs(),
        slope,
    })
}

/// Merges crossings closer than `cluster_tol` (chained) into one entry whose
/// multiplicity estimate is the cluster size. Helmholtz crossings with
/// |λ| < cluster_tol are dropped.
pub fn report(
    kind: ProblemKind,
    crossings: &[Crossing],
    cluster_tol: f64,
    metadata: ReportMetadata,
) -> TEReport {
    let mut sorted: Vec<Crossing> = crossings
        .iter()
        .copied()
        .filter(|c| !(kind == ProblemKind::Helmholtz && c.lambda.abs() < cluster_tol))
        .collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.index.cmp(&b.index)));

    let mut entries = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].lambda - sorted[j - 1].lambda <= cluster_tol {
            j += 1;
        }
        let cluster = &sorted[i..j];
        let lambda = cluster.iter().map(|c| c.lambda).sum::<f64>() / cluster.len() as f64;
        entries.push(ReportEntry {
            lambda,
            curve_index: cluster.iter().map(|c| c.index).min().unwrap_or(1),
            multiplicity_estimate: cluster.len(),
            residual: cluster.iter().fold(0.0f64, |m, c| m.max(c.residual)),
        });
        i = j;
    }
    TEReport {
        transmission_eigenvalues: entries,
        metadata,
    }
}

/// Output of [`find_transmission_eigenvalues`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub table: CurveTable,
    pub crossings: Vec<Crossing>,
    pub report: TEReport,
}

/// Assemble, sweep, bracket, refine and report. A bracket that fails to
/// confirm its sign change triggers one re-sweep at doubled resolution.
pub fn find_transmission_eigenvalues(
    problem: &ValidatedProblem,
) -> Result<PipelineResult, CurveError> {
    let matrices = discretize(problem)?;
    run_on_matrices(problem, &matrices)
}

/// [`find_transmission_eigenvalues`] with precomputed matrices.
pub fn run_on_matrices(
    problem: &ValidatedProblem,
    matrices: &FormMatrices,
) -> Result<PipelineResult, CurveError> {
    let kind = problem.kind;
    let k = problem.discretization.num_curves;
    let mut cfg = problem.sweep;
    let mut attempt = 0;
    loop {
        let table = sweep(kind, matrices, &cfg, k)?;
        let refined: Result<Vec<Crossing>, CurveError> = find_crossings(&table)
            .into_par_iter()
            .map(|b| refine(kind, matrices, b, cfg.refine_tol))
            .collect();
        match refined {
            Err(CurveError::BracketInvalid { .. }) if attempt == 0 => {
                attempt += 1;
                cfg.steps = 2 * cfg.steps - 1;
            }
            Err(e) => return Err(e),
            Ok(crossings) => {
                let metadata = ReportMetadata {
                    problem_hash: problem_hash(problem),
                    problem: kind,
                    dimension: matrices.dimension(),
                    num_curves: k,
                    grid: GridInfo {
                        lambda_min: cfg.lambda_min,
                        lambda_max: cfg.lambda_max,
                        steps: cfg.steps,
                    },
                    refine_tol: cfg.refine_tol,
                    cluster_tol: cfg.cluster_tol,
                };
                let report = report(kind, &crossings, cfg.cluster_tol, metadata);
                return Ok(PipelineResult {
                    table,
                    crossings,
                    report,
                });
            }
        }
    }
}
