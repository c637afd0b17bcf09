use transeig::model::{
    validate_problem, DiscretizationConfig, DomainSpec, PotentialSpec, ProblemKind, ProblemSpec,
    SweepConfig, ValidatedProblem, WeightName, WeightSpec,
};

/// Helmholtz with V ≡ 0.75 on (-π, π).
pub fn bounded_problem(
    cells: usize,
    steps: usize,
    window: (f64, f64),
    weight: WeightName,
) -> ValidatedProblem {
    let spec = ProblemSpec {
        problem: ProblemKind::Helmholtz,
        domain: DomainSpec::IntervalUnion {
            intervals: vec![(-std::f64::consts::PI, std::f64::consts::PI)],
        },
        potential: PotentialSpec::Constant { v0: 0.75 },
        weight: WeightSpec::Named(weight),
        discretization: DiscretizationConfig {
            cells_per_interval: cells,
            quad_points: 8,
            num_curves: 12,
        },
        sweep: SweepConfig {
            lambda_min: window.0,
            lambda_max: window.1,
            steps,
            refine_tol: 1e-8,
            cluster_tol: 1e-5,
        },
    };
    validate_problem(&spec).unwrap()
}
