//! Gauss–Legendre rules on [-1, 1].

use super::AssemblyError;

pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// P_q(x) and P_q'(x) by the three-term recurrence.
fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=q {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = q as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Order-q rule: nodes are the roots of P_q found by Newton iteration from
/// Chebyshev-like initial guesses, weights 2 / ((1 - x²) P_q'(x)²).
pub fn gauss_legendre(q: usize) -> Result<QuadratureRule, AssemblyError> {
    if q == 0 || q > MAX_ORDER {
        return Err(AssemblyError::OrderOutOfRange(q));
    }
    if q == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        });
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(q, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // descending cosines: fill symmetric pair from the outside in
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        let one = gauss_legendre(1).unwrap();
        assert_eq!((one.nodes[0], one.weights[0]), (0.0, 2.0));
        let two = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((two.nodes[0] + r).abs() < 1e-15 && (two.nodes[1] - r).abs() < 1e-15);
        assert!((two.weights[0] - 1.0).abs() < 1e-15 && (two.weights[1] - 1.0).abs() < 1e-15);
        assert!((two.nodes[0] + 0.577_350_269_2).abs() < 1e-10);
    }

    #[test]
    fn x_to_the_sixth_with_four_points() {
        let rule = gauss_legendre(4).unwrap();
        assert!((rule.integrate(-1.0, 1.0, |x| x.powi(6)) - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn order_bounds() {
        assert_eq!(gauss_legendre(0), Err(AssemblyError::OrderOutOfRange(0)));
        assert_eq!(gauss_legendre(65), Err(AssemblyError::OrderOutOfRange(65)));
        assert!(gauss_legendre(64).is_ok());
    }

    #[test]
    fn exact_for_degree_up_to_2q_minus_1() {
        for q in 1..=20 {
            let rule = gauss_legendre(q).unwrap();
            assert!(
                rule.nodes.windows(2).all(|w| w[0] < w[1]),
                "q={q} not sorted"
            );
            for (i, x) in rule.nodes.iter().enumerate() {
                assert!((x + rule.nodes[q - 1 - i]).abs() < 1e-15);
            }
            for d in 0..2 * q {
                let exact = if d % 2 == 1 {
                    0.0
                } else {
                    2.0 / (d as f64 + 1.0)
                };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(d as i32));
                assert!((got - exact).abs() < 1e-13, "q={q} d={d}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn weights_sum_to_two_up_to_max_order() {
        for q in [32, 48, 64] {
            let rule = gauss_legendre(q).unwrap();
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }
}
