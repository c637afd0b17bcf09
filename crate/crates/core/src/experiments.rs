//! Experiment drivers: dilation scaling, eigenvalue counting, packing lower
//! bound, truncation stability of chain domains and the Schrödinger ball
//! root scan.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::curves::{find_transmission_eigenvalues, CurveError, TEReport};
use crate::model::{
    validate_problem, DiscretizationConfig, DomainSpec, ModelError, PotentialSpec, ProblemKind,
    ProblemSpec, ShrinkingChain, SweepConfig, WeightName, WeightSpec,
};
use crate::radial::{
    adaptive_ell_max, characteristic_determinant, scan_roots, te_list_up_to, OracleError,
    RadialProblem, LAMBDA_FLOOR,
};

pub const ORACLE_SCALING_TOL: f64 = 1e-8;
pub const GALERKIN_SCALING_TOL: f64 = 1e-3;
pub const DEFAULT_SLOPE_TOL: f64 = 0.3;
pub const PACKING_SLACK: f64 = 0.8;
// Guards floor(√(x/λ₁)) against λ₁ landing a few ulps above an exact value.
const PACKING_ROUNDING: f64 = 1e-9;
const MIN_COUNT: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "only {count} transmission eigenvalues up to x = {x}; at least 5 are needed for a fit"
    )]
    InsufficientCounts { x: f64, count: usize },
    #[error("no transmission eigenvalue found: {0}")]
    NoEigenvalue(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

/// One judged quantity: `observed` against `expected` with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub label: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(label: &str, columns: &[&str]) -> Self {
        Table {
            label: label.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub inputs: Value,
    pub tables: Vec<Table>,
    pub verdict: Verdict,
    pub margins: BTreeMap<String, Margin>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentResult {
    fn judged(
        name: &str,
        inputs: Value,
        tables: Vec<Table>,
        margins: BTreeMap<String, Margin>,
    ) -> Self {
        let verdict = if margins.values().all(|m| m.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        ExperimentResult {
            name: name.into(),
            inputs,
            tables,
            verdict,
            margins,
            notes: Vec::new(),
        }
    }
}

fn relative(observed: f64, expected: f64) -> f64 {
    (observed - expected).abs() / expected.abs()
}

fn helmholtz_ball(dim: usize, radius: f64, v0: f64) -> Result<RadialProblem, ExperimentError> {
    if !(v0 > 0.0 && v0 < 1.0) {
        return Err(ExperimentError::InvalidInput(format!(
            "v0 = {v0} must lie in (0, 1)"
        )));
    }
    let p = RadialProblem {
        kind: ProblemKind::Helmholtz,
        dim,
        radius,
        v0,
        ell: 0,
    };
    p.validate()?;
    Ok(p)
}

/// Smallest oracle transmission eigenvalue over all relevant orders.
pub fn first_oracle_te(p: &RadialProblem) -> Result<f64, ExperimentError> {
    // the first root of order ℓ lies beyond the ℓ-th free-wave zero, so
    // growing the window geometrically terminates quickly
    let mut x = 16.0 / (p.radius * p.radius);
    for _ in 0..40 {
        let ell_max = adaptive_ell_max(p, x);
        if let Some(first) = te_list_up_to(p, x, ell_max)?.first() {
            return Ok(first.lambda);
        }
        x *= 4.0;
    }
    Err(ExperimentError::NoEigenvalue(format!(
        "radius {} v0 {}",
        p.radius, p.v0
    )))
}

/// Discretization knobs for experiments that run the Galerkin pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalerkinSettings {
    pub cells: usize,
    pub num_curves: usize,
    pub steps: usize,
    pub refine_tol: f64,
}

impl Default for GalerkinSettings {
    fn default() -> Self {
        GalerkinSettings {
            cells: 64,
            num_curves: 12,
            steps: 400,
            refine_tol: 1e-8,
        }
    }
}

/// Helmholtz TE report for a constant potential on one interval.
pub fn galerkin_interval_report(
    interval: (f64, f64),
    v0: f64,
    window: (f64, f64),
    settings: GalerkinSettings,
) -> Result<TEReport, ExperimentError> {
    let spec = ProblemSpec {
        problem: ProblemKind::Helmholtz,
        domain: DomainSpec::IntervalUnion {
            intervals: vec![interval],
        },
        potential: PotentialSpec::Constant { v0 },
        weight: WeightSpec::Named(WeightName::Unweighted),
        discretization: DiscretizationConfig {
            cells_per_interval: settings.cells,
            quad_points: 8,
            num_curves: settings.num_curves,
        },
        sweep: SweepConfig {
            lambda_min: window.0,
            lambda_max: window.1,
            steps: settings.steps,
            refine_tol: settings.refine_tol,
            cluster_tol: 1e-5,
        },
    };
    let problem = validate_problem(&spec)?;
    Ok(find_transmission_eigenvalues(&problem)?.report)
}

/// First oracle TE of radius εR against λ₁(R)/ε² for each ε; with
/// `galerkin`, the same ratio from the pipeline on (-R, R) and (-εR, εR).
pub fn scaling_check(
    dim: usize,
    radius: f64,
    v0: f64,
    epsilons: &[f64],
    galerkin: Option<GalerkinSettings>,
) -> Result<ExperimentResult, ExperimentError> {
    let base = helmholtz_ball(dim, radius, v0)?;
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(ExperimentError::InvalidInput(
            "epsilons must be positive".into(),
        ));
    }
    let lambda_base = first_oracle_te(&base)?;
    let scaled = epsilons
        .par_iter()
        .map(|&eps| first_oracle_te(&base.with_radius(eps * radius)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(
        "oracle",
        &[
            "epsilon",
            "lambda_base",
            "lambda_scaled",
            "ratio",
            "relative_error",
        ],
    );
    let mut margins = BTreeMap::new();
    for (&eps, &ls) in epsilons.iter().zip(&scaled) {
        let expected = lambda_base / (eps * eps);
        let err = relative(ls, expected);
        table
            .rows
            .push(vec![eps, lambda_base, ls, ls / lambda_base, err]);
        margins.insert(
            format!("oracle_eps_{eps}"),
            Margin {
                observed: ls / lambda_base,
                expected: 1.0 / (eps * eps),
                tolerance: ORACLE_SCALING_TOL,
                pass: err <= ORACLE_SCALING_TOL,
            },
        );
    }
    let mut tables = vec![table];

    if let Some(settings) = galerkin {
        let window = |scale: f64| (0.5 * lambda_base * scale, 1.5 * lambda_base * scale);
        let first = |report: TEReport| {
            report
                .lambdas()
                .first()
                .copied()
                .ok_or_else(|| ExperimentError::NoEigenvalue("galerkin window is empty".into()))
        };
        let g_base = first(galerkin_interval_report(
            (-radius, radius),
            v0,
            window(1.0),
            settings,
        )?)?;
        let mut gt = Table::new(
            "galerkin",
            &[
                "epsilon",
                "lambda_base",
                "lambda_scaled",
                "ratio",
                "relative_error",
            ],
        );
        for &eps in epsilons {
            let s = 1.0 / (eps * eps);
            let g = first(galerkin_interval_report(
                (-eps * radius, eps * radius),
                v0,
                window(s),
                settings,
            )?)?;
            let err = relative(g / g_base, s);
            gt.rows.push(vec![eps, g_base, g, g / g_base, err]);
            margins.insert(
                format!("galerkin_eps_{eps}"),
                Margin {
                    observed: g / g_base,
                    expected: s,
                    tolerance: GALERKIN_SCALING_TOL,
                    pass: err <= GALERKIN_SCALING_TOL,
                },
            );
        }
        tables.push(gt);
    }

    let inputs =
        json!({"dim": dim, "radius": radius, "v0": v0, "epsilons": epsilons, "galerkin": galerkin});
    Ok(ExperimentResult::judged(
        "scaling_check",
        inputs,
        tables,
        margins,
    ))
}

/// Least-squares slope of ln N against ln x.
pub fn log_log_slope(xs: &[f64], counts: &[usize]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(counts)
        .map(|(&x, &n)| (x.ln(), (n as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Degeneracy-weighted oracle counts N(x) and the fitted growth exponent,
/// judged against n/2 ± `slope_tol`. `ell_max = None` picks it per x.
pub fn counting_experiment(
    dim: usize,
    radius: f64,
    v0: f64,
    x_values: &[f64],
    ell_max: Option<usize>,
    slope_tol: f64,
) -> Result<ExperimentResult, ExperimentError> {
    let base = helmholtz_ball(dim, radius, v0)?;
    if x_values.len() < 2 || x_values.iter().any(|&x| !(x > 0.0)) {
        return Err(ExperimentError::InvalidInput(
            "need at least two positive x values".into(),
        ));
    }
    let counts = x_values
        .par_iter()
        .map(|&x| {
            let lmax = ell_max.unwrap_or_else(|| adaptive_ell_max(&base, x));
            Ok((lmax, te_list_up_to(&base, x, lmax)?.weighted_count()))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    if let Some((&x, &(_, count))) = x_values.iter().zip(&counts).find(|(_, c)| c.1 < MIN_COUNT) {
        return Err(ExperimentError::InsufficientCounts { x, count });
    }
    let n: Vec<usize> = counts.iter().map(|c| c.1).collect();
    let slope = log_log_slope(x_values, &n);
    let expected = dim as f64 / 2.0;

    let mut table = Table::new("counts", &["x", "ell_max", "count"]);
    for (&x, &(lmax, count)) in x_values.iter().zip(&counts) {
        table.rows.push(vec![x, lmax as f64, count as f64]);
    }
    let mut margins = BTreeMap::new();
    margins.insert(
        "slope".to_string(),
        Margin {
            observed: slope,
            expected,
            tolerance: slope_tol,
            pass: (slope - expected).abs() <= slope_tol,
        },
    );
    let inputs = json!({"dim": dim, "radius": radius, "v0": v0, "x_values": x_values, "ell_max": ell_max, "slope_tol": slope_tol});
    Ok(ExperimentResult::judged(
        "counting_experiment",
        inputs,
        vec![table],
        margins,
    ))
}

/// Number of disjoint translates of a shrunken copy of (0, L) whose first
/// TE is ≤ x: with λ₁ the first TE of the whole interval, a copy shrunk by
/// ε has first TE λ₁/ε², so ⌊√(x/λ₁)⌋ copies of width L/⌊√(x/λ₁)⌋ fit.
/// Returns (prediction, λ₁).
pub fn packing_prediction(length: f64, v0: f64, x: f64) -> Result<(usize, f64), ExperimentError> {
    let lambda1 = first_oracle_te(&helmholtz_ball(1, 0.5 * length, v0)?)?;
    let copies = ((x / lambda1).sqrt() * (1.0 + PACKING_ROUNDING)).floor() as usize;
    Ok((copies, lambda1))
}

/// Galerkin count on (0, L) in (0, x] against the packing prediction.
pub fn packing_bound_check(
    length: f64,
    v0: f64,
    x: f64,
    settings: GalerkinSettings,
) -> Result<ExperimentResult, ExperimentError> {
    if !(length > 0.0 && x > 0.0) {
        return Err(ExperimentError::InvalidInput(
            "length and x must be positive".into(),
        ));
    }
    let (prediction, lambda1) = packing_prediction(length, v0, x)?;
    let report = galerkin_interval_report((0.0, length), v0, (1e-3 * x, x), settings)?;
    let observed = report.weighted_count(0.0, x);
    let needed = PACKING_SLACK * prediction as f64;

    let mut table = Table::new("galerkin", &["lambda", "multiplicity_estimate"]);
    for e in &report.transmission_eigenvalues {
        table
            .rows
            .push(vec![e.lambda, e.multiplicity_estimate as f64]);
    }
    let mut summary = Table::new(
        "packing",
        &["length", "x", "lambda_1", "prediction", "observed"],
    );
    summary
        .rows
        .push(vec![length, x, lambda1, prediction as f64, observed as f64]);
    let mut margins = BTreeMap::new();
    margins.insert(
        "count".to_string(),
        Margin {
            observed: observed as f64,
            expected: prediction as f64,
            tolerance: PACKING_SLACK,
            pass: observed as f64 >= needed,
        },
    );
    let inputs = json!({"length": length, "v0": v0, "x": x, "galerkin": settings});
    let mut result =
        ExperimentResult::judged("packing_bound_check", inputs, vec![summary, table], margins);
    result.notes.push(format!(
        "pass iff observed >= {PACKING_SLACK} x prediction; the slack absorbs discretization"
    ));
    Ok(result)
}

/// Largest distance from a TE of `prev` to the nearest TE of `next`
/// (0 when `prev` is empty, infinite when only `next` is empty).
pub fn persistence_drift(prev: &[f64], next: &[f64]) -> f64 {
    prev.iter()
        .map(|a| {
            next.iter()
                .map(|b| (a - b).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Inputs of [`truncation_stability`] besides the counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationSetup {
    pub kind: ProblemKind,
    pub chain: ShrinkingChain,
    pub potential: PotentialSpec,
    pub window: (f64, f64),
    pub galerkin: GalerkinSettings,
}

/// Runs the pipeline on the first `count` chain intervals for each count
/// and tabulates the TEs and the drift between consecutive truncations.
pub fn truncation_stability(
    setup: &TruncationSetup,
    counts: &[usize],
) -> Result<ExperimentResult, ExperimentError> {
    if counts.is_empty() || counts.windows(2).any(|w| w[1] < w[0]) {
        return Err(ExperimentError::InvalidInput(
            "counts must be non-empty and ascending".into(),
        ));
    }
    let g = setup.galerkin;
    let reports = counts
        .iter()
        .map(|&count| {
            let spec = ProblemSpec {
                problem: setup.kind,
                domain: DomainSpec::ShrinkingChain(ShrinkingChain {
                    count,
                    ..setup.chain
                }),
                potential: setup.potential,
                weight: WeightSpec::default(),
                discretization: DiscretizationConfig {
                    cells_per_interval: g.cells,
                    quad_points: 8,
                    num_curves: g.num_curves,
                },
                sweep: SweepConfig {
                    lambda_min: setup.window.0,
                    lambda_max: setup.window.1,
                    steps: g.steps,
                    refine_tol: g.refine_tol,
                    cluster_tol: 1e-5,
                },
            };
            let problem = validate_problem(&spec)?;
            Ok(find_transmission_eigenvalues(&problem)?.report)
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut tes = Table::new(
        "transmission_eigenvalues",
        &["count", "lambda", "multiplicity_estimate"],
    );
    for (&count, r) in counts.iter().zip(&reports) {
        for e in &r.transmission_eigenvalues {
            tes.rows
                .push(vec![count as f64, e.lambda, e.multiplicity_estimate as f64]);
        }
    }
    let mut drift = Table::new(
        "drift",
        &[
            "count_from",
            "count_to",
            "drift",
            "entries_from",
            "entries_to",
        ],
    );
    for (w, r) in counts.windows(2).zip(reports.windows(2)) {
        let (a, b) = (r[0].lambdas(), r[1].lambdas());
        drift.rows.push(vec![
            w[0] as f64,
            w[1] as f64,
            persistence_drift(&a, &b),
            a.len() as f64,
            b.len() as f64,
        ]);
    }
    let inputs = json!({"setup": setup, "counts": counts});
    Ok(ExperimentResult {
        name: "truncation_stability".into(),
        inputs,
        tables: vec![tes, drift],
        verdict: Verdict::ReportOnly,
        margins: BTreeMap::new(),
        notes: vec!["drift = max over earlier TEs of the distance to the nearest later TE".into()],
    })
}

/// Sign changes of the Schrödinger ball determinant on (1e-6, lambda_max]
/// for ℓ = 0..=ell_max, across both interior branches.
pub fn hypothesis_scan(
    dim: usize,
    radius: f64,
    v0: f64,
    lambda_max: f64,
    steps: usize,
    ell_max: usize,
) -> Result<ExperimentResult, ExperimentError> {
    let base = RadialProblem {
        kind: ProblemKind::Schrodinger,
        dim,
        radius,
        v0,
        ell: 0,
    };
    base.validate()?;
    if !(lambda_max > LAMBDA_FLOOR) || steps < 2 {
        return Err(ExperimentError::InvalidInput(
            "lambda_max must exceed 1e-6 and steps must be >= 2".into(),
        ));
    }
    let per_order = (0..=ell_max)
        .into_par_iter()
        .map(|ell| {
            let p = base.with_ell(ell);
            let roots = scan_roots(
                |l| characteristic_determinant(&p, l),
                LAMBDA_FLOOR,
                lambda_max,
                steps,
                1e-12 * lambda_max,
            )?;
            Ok((ell, roots))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut table = Table::new("roots", &["ell", "bracket_lo", "bracket_hi", "root"]);
    for (ell, roots) in &per_order {
        for r in roots {
            table
                .rows
                .push(vec![*ell as f64, r.bracket.0, r.bracket.1, r.root]);
        }
    }
    let note = if table.rows.is_empty() {
        "no sign change found".to_string()
    } else {
        format!("{} sign changes found", table.rows.len())
    };
    let inputs = json!({"dim": dim, "radius": radius, "v0": v0, "lambda_max": lambda_max, "steps": steps, "ell_max": ell_max});
    Ok(ExperimentResult {
        name: "hypothesis_scan".into(),
        inputs,
        tables: vec![table],
        verdict: Verdict::ReportOnly,
        margins: BTreeMap::new(),
        notes: vec![note],
    })
}
