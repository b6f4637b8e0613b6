//! Quadrature on the reference triangle {(x,y): x,y >= 0, x + y <= 1}.
//!
//! Rules are collapsed Gauss-Legendre products (Duffy map). The map
//! x = s, y = t(1-s) carries the unit square to the triangle with Jacobian
//! (1-s), so a rule with enough 1D points is exact for any requested total
//! polynomial degree.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("unsupported quadrature degree {0} (supported: 1..={MAX_DEGREE})")]
    UnsupportedDegree(usize),
}

pub const MAX_DEGREE: usize = 20;

/// Reference-triangle rule; points stored in barycentric coordinates
/// (l0, l1, l2) = (1-x-y, x, y), weights summing to the reference area 1/2.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cartesian reference coordinates of quadrature point i.
    pub fn xy(&self, i: usize) -> [f64; 2] {
        [self.points[i][1], self.points[i][2]]
    }
}

/// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess on [-1,1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' via recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Rule exact for all monomials x^a y^b with a + b <= degree.
pub fn quadrature_rule(degree: usize) -> Result<QuadratureRule, QuadratureError> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(QuadratureError::UnsupportedDegree(degree));
    }
    // In s the integrand has degree `degree + 1` (Jacobian factor), in t
    // degree `degree`.
    let ns = (degree + 1) / 2 + 1;
    let nt = degree / 2 + 1;
    let (s_nodes, s_weights) = gauss_legendre_unit(ns);
    let (t_nodes, t_weights) = gauss_legendre_unit(nt);
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for i in 0..ns {
        for j in 0..nt {
            let x = s_nodes[i];
            let y = t_nodes[j] * (1.0 - s_nodes[i]);
            points.push([1.0 - x - y, x, y]);
            weights.push(s_weights[i] * t_weights[j] * (1.0 - s_nodes[i]));
        }
    }
    Ok(QuadratureRule { points, weights, degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!
    fn exact_monomial(a: u32, b: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn weights_sum_to_half() {
        for degree in 1..=MAX_DEGREE {
            let rule = quadrature_rule(degree).unwrap();
            let sum: f64 = rule.weights.iter().sum();
            assert_relative_eq!(sum, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn degree_two_x_squared() {
        let rule = quadrature_rule(2).unwrap();
        let val: f64 = (0..rule.len())
            .map(|i| rule.weights[i] * rule.xy(i)[0].powi(2))
            .sum();
        assert_relative_eq!(val, 1.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn degree_four_x2y2() {
        let rule = quadrature_rule(4).unwrap();
        let val: f64 = (0..rule.len())
            .map(|i| rule.weights[i] * rule.xy(i)[0].powi(2) * rule.xy(i)[1].powi(2))
            .sum();
        assert_relative_eq!(val, 1.0 / 180.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_for_all_monomials_up_to_degree() {
        for degree in 1..=10 {
            let rule = quadrature_rule(degree).unwrap();
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let val: f64 = (0..rule.len())
                        .map(|i| {
                            let [x, y] = rule.xy(i);
                            rule.weights[i] * x.powi(a as i32) * y.powi(b as i32)
                        })
                        .sum();
                    assert_relative_eq!(
                        val,
                        exact_monomial(a as u32, b as u32),
                        epsilon = 1e-14,
                        max_relative = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(quadrature_rule(0).is_err());
        assert!(quadrature_rule(MAX_DEGREE + 1).is_err());
    }

    #[test]
    fn barycentric_points_in_triangle() {
        let rule = quadrature_rule(8).unwrap();
        for p in &rule.points {
            assert_relative_eq!(p[0] + p[1] + p[2], 1.0, epsilon = 1e-14);
            assert!(p.iter().all(|&l| l > 0.0 && l < 1.0));
        }
    }
}
