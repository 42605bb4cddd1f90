use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureDomain {
    /// `[0, 1]`
    Interval,
    /// `(0,0), (1,0), (0,1)`
    Triangle,
}

/// Points on the reference domain with positive weights. Interval rules use
/// only the first coordinate.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m <= 1 {
        return (vec![0.5], vec![1.0]);
    }
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        // Chebyshev initial guess, then Newton on P_m
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 1..m {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x.push(0.5 * (1.0 - t));
        w.push(0.5 * wt);
    }
    (x, w)
}

pub fn quadrature(domain: QuadratureDomain, order: usize) -> Result<QuadratureRule> {
    if order > 20 {
        return Err(Error::invalid(format!(
            "quadrature order {order} not supported"
        )));
    }
    Ok(match domain {
        QuadratureDomain::Interval => {
            let (x, w) = gauss_legendre((order + 1).div_ceil(2).max(1));
            QuadratureRule {
                points: x.into_iter().map(|t| [t, 0.0]).collect(),
                weights: w,
                order,
            }
        }
        QuadratureDomain::Triangle => match order {
            0 | 1 => QuadratureRule {
                points: vec![[1.0 / 3.0, 1.0 / 3.0]],
                weights: vec![0.5],
                order,
            },
            2 => QuadratureRule {
                points: vec![
                    [1.0 / 6.0, 1.0 / 6.0],
                    [2.0 / 3.0, 1.0 / 6.0],
                    [1.0 / 6.0, 2.0 / 3.0],
                ],
                weights: vec![1.0 / 6.0; 3],
                order,
            },
            _ => {
                // collapsed Gauss product: x = u, y = v (1 - u), dA = (1 - u) du dv
                let m = (order + 2).div_ceil(2);
                let (x, w) = gauss_legendre(m);
                let mut points = Vec::with_capacity(m * m);
                let mut weights = Vec::with_capacity(m * m);
                for (&u, &wu) in x.iter().zip(&w) {
                    for (&v, &wv) in x.iter().zip(&w) {
                        points.push([u, v * (1.0 - u)]);
                        weights.push(wu * wv * (1.0 - u));
                    }
                }
                QuadratureRule {
                    points,
                    weights,
                    order,
                }
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn interval_midpoint() {
        let q = quadrature(QuadratureDomain::Interval, 1).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.weights[0], 1.0);
        assert_eq!(q.points[0][0], 0.5);
    }

    #[test]
    fn triangle_centroid() {
        let q = quadrature(QuadratureDomain::Triangle, 1).unwrap();
        assert_eq!(q.weights, vec![0.5]);
    }

    #[test]
    fn triangle_x2y2() {
        let q = quadrature(QuadratureDomain::Triangle, 4).unwrap();
        let s: f64 = q.iter().map(|(p, w)| w * p[0].powi(2) * p[1].powi(2)).sum();
        assert!((s - 1.0 / 180.0).abs() < 1e-15);
    }

    #[test]
    fn monomial_exactness() {
        for order in 0..=10 {
            let q = quadrature(QuadratureDomain::Interval, order).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for p in 0..=order as i32 {
                let s: f64 = q.iter().map(|(x, w)| w * x[0].powi(p)).sum();
                assert!(
                    (s - 1.0 / (p as f64 + 1.0)).abs() < 1e-14,
                    "interval {order} {p}"
                );
            }
            let q = quadrature(QuadratureDomain::Triangle, order).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    // ∫_T x^a y^b = a! b! / (a + b + 2)!
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let s: f64 = q
                        .iter()
                        .map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32))
                        .sum();
                    assert!((s - exact).abs() < 1e-14, "triangle {order} x^{a} y^{b}");
                }
            }
        }
    }
}
