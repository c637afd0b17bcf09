//! Problem definition: scattering kind, domain, potential, weight and the
//! discretization / sweep knobs, plus validation into a normalized form.
//!
//! Unbounded domains are represented by finite truncations of a chain of
//! shrinking intervals. Balls are only meaningful for the radial oracle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Agmon exponent used when the potential carries no decay exponent of its own.
pub const DEFAULT_AGMON_ALPHA: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("potential must be strictly positive (got {0})")]
    NonPositivePotential(f64),
    #[error("decay exponent alpha = {0} must exceed 3 on an unbounded domain")]
    AlphaTooSmall(f64),
    #[error("intervals ({0}, {1}) and ({2}, {3}) overlap or are malformed")]
    OverlappingIntervals(f64, f64, f64, f64),
    #[error("ball domains are handled by the radial oracle, not the Galerkin engine")]
    BallGivenToGalerkin,
    #[error("helmholtz contrast degenerates: |v0 - 1| = {0:e}")]
    HelmholtzContrastDegenerate(f64),
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Schrodinger,
    Helmholtz,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Schrodinger => "schrodinger",
            ProblemKind::Helmholtz => "helmholtz",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "schrodinger" => Ok(ProblemKind::Schrodinger),
            "helmholtz" => Ok(ProblemKind::Helmholtz),
            other => Err(format!("unknown problem kind '{other}'")),
        }
    }
}

/// A finite chain of disjoint intervals whose lengths shrink geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkingChain {
    pub count: usize,
    pub start: f64,
    pub gap: f64,
    pub first_length: f64,
    pub decay_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    IntervalUnion { intervals: Vec<(f64, f64)> },
    ShrinkingChain(ShrinkingChain),
    Ball { dim: usize, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    Constant { v0: f64 },
    PowerDecay { c: f64, alpha: f64 },
}

impl PotentialSpec {
    /// V(x); `PowerDecay` is c·⟨x⟩^{-alpha} with ⟨x⟩ = (1 + x²)^{1/2}.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            PotentialSpec::Constant { v0 } => v0,
            PotentialSpec::PowerDecay { c, alpha } => c * (1.0 + x * x).powf(-0.5 * alpha),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Constant { .. } => None,
            PotentialSpec::PowerDecay { alpha, .. } => Some(alpha),
        }
    }
}

/// Free-function form of [`PotentialSpec::value`].
pub fn potential_value(spec: &PotentialSpec, x: f64) -> f64 {
    spec.value(x)
}

/// Weight as written in a problem file: `"agmon"`, `"unweighted"`, or
/// `{"agmon": {"alpha": 4.0}}` to pin the exponent explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Named(WeightName),
    Explicit { agmon: AgmonParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightName {
    Agmon,
    Unweighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgmonParams {
    pub alpha: f64,
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Named(WeightName::Agmon)
    }
}

/// Resolved weight of the ambient L² space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// w(x) = ⟨x⟩^alpha
    Agmon {
        alpha: f64,
    },
    Unweighted,
}

impl WeightKind {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            WeightKind::Agmon { alpha } => (1.0 + x * x).powf(0.5 * alpha),
            WeightKind::Unweighted => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    pub cells_per_interval: usize,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
    #[serde(default = "default_num_curves")]
    pub num_curves: usize,
}

fn default_quad_points() -> usize {
    8
}

fn default_num_curves() -> usize {
    12
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            cells_per_interval: 64,
            quad_points: default_quad_points(),
            num_curves: default_num_curves(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default = "default_cluster_tol")]
    pub cluster_tol: f64,
}

fn default_refine_tol() -> f64 {
    1e-8
}

fn default_cluster_tol() -> f64 {
    1e-5
}

impl SweepConfig {
    /// Uniform grid with `steps` points, both endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.lambda_min, self.lambda_max, self.steps)
    }
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * (i as f64) / last
            }
        })
        .collect()
}

/// A problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub problem: ProblemKind,
    pub domain: DomainSpec,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidatedDomain {
    Intervals(Vec<(f64, f64)>),
    Ball { dim: usize, radius: f64 },
}

/// A problem that passed [`validate_problem`]: intervals sorted and
/// disjoint, chains materialized, weight exponent resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedProblem {
    pub kind: ProblemKind,
    pub domain: ValidatedDomain,
    pub potential: PotentialSpec,
    pub weight: WeightKind,
    pub discretization: DiscretizationConfig,
    pub sweep: SweepConfig,
}

impl ValidatedProblem {
    pub fn intervals(&self) -> Result<&[(f64, f64)], ModelError> {
        match &self.domain {
            ValidatedDomain::Intervals(iv) => Ok(iv),
            ValidatedDomain::Ball { .. } => Err(ModelError::BallGivenToGalerkin),
        }
    }

    /// Global Galerkin dimension for interval domains.
    pub fn galerkin_dimension(&self) -> Result<usize, ModelError> {
        Ok(self.intervals()?.len() * (self.discretization.cells_per_interval - 1))
    }
}

/// Intervals of a shrinking chain: interval j starts at
/// `start + j·gap + Σ_{i<j} ℓ_i` and has length `ℓ_j = first_length·decay_ratio^j`.
pub fn materialize_domain(chain: &ShrinkingChain) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(chain.count);
    let mut covered = 0.0;
    let mut length = chain.first_length;
    for j in 0..chain.count {
        let a = chain.start + j as f64 * chain.gap + covered;
        out.push((a, a + length));
        covered += length;
        length *= chain.decay_ratio;
    }
    out
}

fn check_finite(field: &'static str, x: f64) -> Result<(), ModelError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} is not finite")))
    }
}

fn validate_chain(chain: &ShrinkingChain) -> Result<(), ModelError> {
    for (field, x) in [
        ("chain.start", chain.start),
        ("chain.gap", chain.gap),
        ("chain.first_length", chain.first_length),
        ("chain.decay_ratio", chain.decay_ratio),
    ] {
        check_finite(field, x)?;
    }
    if chain.count == 0 {
        return Err(invalid("chain.count", "must be positive"));
    }
    if chain.gap <= 0.0 {
        return Err(invalid("chain.gap", "must be positive"));
    }
    if chain.first_length <= 0.0 {
        return Err(invalid("chain.first_length", "must be positive"));
    }
    if !(chain.decay_ratio > 0.0 && chain.decay_ratio < 1.0) {
        return Err(invalid("chain.decay_ratio", "must lie in (0, 1)"));
    }
    Ok(())
}

fn validate_intervals(intervals: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, ModelError> {
    if intervals.is_empty() {
        return Err(invalid(
            "domain.intervals",
            "at least one interval is required",
        ));
    }
    let mut sorted = intervals.to_vec();
    for &(a, b) in &sorted {
        check_finite("domain.intervals", a)?;
        check_finite("domain.intervals", b)?;
        if a >= b {
            return Err(invalid(
                "domain.intervals",
                format!("empty interval ({a}, {b})"),
            ));
        }
    }
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in sorted.windows(2) {
        let ((a0, b0), (a1, b1)) = (w[0], w[1]);
        if a1 < b0 {
            return Err(ModelError::OverlappingIntervals(a0, b0, a1, b1));
        }
    }
    Ok(sorted)
}

fn validate_potential(potential: &PotentialSpec, unbounded: bool) -> Result<(), ModelError> {
    match *potential {
        PotentialSpec::Constant { v0 } => {
            check_finite("potential.v0", v0)?;
            if v0 <= 0.0 {
                return Err(ModelError::NonPositivePotential(v0));
            }
        }
        PotentialSpec::PowerDecay { c, alpha } => {
            check_finite("potential.c", c)?;
            check_finite("potential.alpha", alpha)?;
            if c <= 0.0 {
                return Err(ModelError::NonPositivePotential(c));
            }
            if unbounded && alpha <= 3.0 {
                return Err(ModelError::AlphaTooSmall(alpha));
            }
        }
    }
    Ok(())
}

fn resolve_weight(
    weight: &WeightSpec,
    potential: &PotentialSpec,
) -> Result<WeightKind, ModelError> {
    let kind = match *weight {
        WeightSpec::Named(WeightName::Unweighted) => WeightKind::Unweighted,
        WeightSpec::Named(WeightName::Agmon) => WeightKind::Agmon {
            alpha: potential.alpha().unwrap_or(DEFAULT_AGMON_ALPHA),
        },
        WeightSpec::Explicit { agmon } => WeightKind::Agmon { alpha: agmon.alpha },
    };
    if let WeightKind::Agmon { alpha } = kind {
        check_finite("weight.alpha", alpha)?;
        if alpha <= 0.0 {
            return Err(invalid("weight.alpha", "must be positive"));
        }
    }
    Ok(kind)
}

/// Validates a problem file and normalizes it for the engines.
pub fn validate_problem(spec: &ProblemSpec) -> Result<ValidatedProblem, ModelError> {
    let (domain, unbounded) = match &spec.domain {
        DomainSpec::IntervalUnion { intervals } => (
            ValidatedDomain::Intervals(validate_intervals(intervals)?),
            false,
        ),
        DomainSpec::ShrinkingChain(chain) => {
            validate_chain(chain)?;
            (
                ValidatedDomain::Intervals(validate_intervals(&materialize_domain(chain))?),
                true,
            )
        }
        DomainSpec::Ball { dim, radius } => {
            if !(1..=3).contains(dim) {
                return Err(invalid(
                    "domain.dim",
                    format!("{dim} is not in {{1, 2, 3}}"),
                ));
            }
            check_finite("domain.radius", *radius)?;
            if *radius <= 0.0 {
                return Err(invalid("domain.radius", "must be positive"));
            }
            (
                ValidatedDomain::Ball {
                    dim: *dim,
                    radius: *radius,
                },
                false,
            )
        }
    };
    validate_potential(&spec.potential, unbounded)?;

    if let ValidatedDomain::Ball { .. } = domain {
        match spec.potential {
            PotentialSpec::Constant { v0 } => {
                if spec.problem == ProblemKind::Helmholtz && (v0 - 1.0).abs() < 1e-12 {
                    return Err(ModelError::HelmholtzContrastDegenerate((v0 - 1.0).abs()));
                }
            }
            PotentialSpec::PowerDecay { .. } => {
                return Err(invalid(
                    "potential",
                    "ball domains require a constant potential",
                ));
            }
        }
    }

    let weight = resolve_weight(&spec.weight, &spec.potential)?;

    let disc = spec.discretization;
    if disc.cells_per_interval < 4 {
        return Err(invalid(
            "discretization.cells_per_interval",
            "must be at least 4",
        ));
    }
    if disc.quad_points < 8 {
        return Err(invalid("discretization.quad_points", "must be at least 8"));
    }
    if disc.num_curves < 1 {
        return Err(invalid("discretization.num_curves", "must be at least 1"));
    }
    if let ValidatedDomain::Intervals(iv) = &domain {
        let dim = iv.len() * (disc.cells_per_interval - 1);
        if disc.num_curves > dim {
            return Err(invalid(
                "discretization.num_curves",
                format!("{} exceeds the Galerkin dimension {dim}", disc.num_curves),
            ));
        }
    }

    let sweep = spec.sweep;
    check_finite("sweep.lambda_min", sweep.lambda_min)?;
    check_finite("sweep.lambda_max", sweep.lambda_max)?;
    if sweep.lambda_max <= sweep.lambda_min {
        return Err(invalid("sweep.lambda_max", "must exceed lambda_min"));
    }
    if sweep.steps < 2 {
        return Err(invalid("sweep.steps", "must be at least 2"));
    }
    if !(sweep.refine_tol > 0.0) {
        return Err(invalid("sweep.refine_tol", "must be positive"));
    }
    if !(sweep.cluster_tol > 0.0) {
        return Err(invalid("sweep.cluster_tol", "must be positive"));
    }

    Ok(ValidatedProblem {
        kind: spec.problem,
        domain,
        potential: spec.potential,
        weight,
        discretization: disc,
        sweep,
    })
}
