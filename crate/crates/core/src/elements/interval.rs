use crate::error::{Error, Result};

/// Cubic Hermite shape functions `(h00, h10, h01, h11)` on `[0, 1]` or their
/// derivatives with respect to `t`.
///
/// On a physical cell of length `h` the slope functions `h10`, `h11` are
/// multiplied by `h` and each `t`-derivative contributes a factor `1/h`.
pub fn hermite_eval(t: f64, deriv: usize) -> Result<[f64; 4]> {
    let (t2, t3) = (t * t, t * t * t);
    Ok(match deriv {
        0 => [
            2.0 * t3 - 3.0 * t2 + 1.0,
            t3 - 2.0 * t2 + t,
            -2.0 * t3 + 3.0 * t2,
            t3 - t2,
        ],
        1 => [
            6.0 * t2 - 6.0 * t,
            3.0 * t2 - 4.0 * t + 1.0,
            -6.0 * t2 + 6.0 * t,
            3.0 * t2 - 2.0 * t,
        ],
        2 => [
            12.0 * t - 6.0,
            6.0 * t - 4.0,
            -12.0 * t + 6.0,
            6.0 * t - 2.0,
        ],
        3 => [12.0, 6.0, -12.0, 6.0],
        _ => {
            return Err(Error::invalid(format!(
                "Hermite derivative order {deriv} not supported"
            )))
        }
    })
}

/// Linear Lagrange functions `(1 - t, t)` on `[0, 1]`, or their derivatives.
pub fn dg1d_eval(t: f64, deriv: usize) -> Result<[f64; 2]> {
    match deriv {
        0 => Ok([1.0 - t, t]),
        1 => Ok([-1.0, 1.0]),
        _ => Ok([0.0, 0.0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_values() {
        assert_eq!(hermite_eval(0.0, 0).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(hermite_eval(1.0, 1).unwrap(), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(hermite_eval(0.5, 0).unwrap(), [0.5, 0.125, 0.5, -0.125]);
        assert_eq!(hermite_eval(1.0, 0).unwrap(), [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(hermite_eval(0.0, 1).unwrap(), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn derivative_order_checked() {
        assert!(hermite_eval(0.2, 4).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 1e-6;
        for &t in &[0.1, 0.37, 0.8] {
            for d in 0..3 {
                let lo = hermite_eval(t - eps, d).unwrap();
                let hi = hermite_eval(t + eps, d).unwrap();
                let der = hermite_eval(t, d + 1).unwrap();
                for i in 0..4 {
                    assert!(((hi[i] - lo[i]) / (2.0 * eps) - der[i]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn dg1d_partition_of_unity() {
        for &t in &[0.0, 0.3, 1.0] {
            let v = dg1d_eval(t, 0).unwrap();
            assert!((v[0] + v[1] - 1.0).abs() < 1e-15);
        }
    }
}
