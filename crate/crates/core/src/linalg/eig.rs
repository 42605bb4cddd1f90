//! Dense generalized eigenproblem `J ψ = λ M ψ` with symmetric positive
//! definite `M`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::Complex;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Complex,
    pub vector: DVector<Complex>,
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "cholesky of non-square matrix",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = m.amax();
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite)
}

/// All eigenpairs of `M⁻¹J`, sorted by imaginary part then real part.
///
/// Eigenvectors are normalized to unit Euclidean norm. When `L⁻¹JL⁻ᵀ` is
/// skew-symmetric the problem is solved as a Hermitian one, which makes the
/// eigenvalues purely imaginary and the eigenvectors `M`-orthogonal.
pub fn dense_generalized_eig(m: &DMatrix<f64>, j: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = m.nrows();
    if j.nrows() != n || j.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "dense_generalized_eig operator size",
            expected: n,
            got: j.nrows().max(j.ncols()),
        });
    }
    let l = cholesky_lower(m)?;
    // A = L⁻¹ J L⁻ᵀ
    let linv_j = l
        .solve_lower_triangular(j)
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let a = l
        .solve_lower_triangular(&linv_j.transpose())
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?
        .transpose();

    let skew_defect = (&a + a.transpose()).amax();
    let mut pairs = if skew_defect <= 1e-10 * a.amax().max(f64::MIN_POSITIVE) {
        skew_eig(&a)
    } else {
        general_eig(&a)?
    };

    let lt = l.transpose().map(|v| Complex::new(v, 0.0));
    for p in &mut pairs {
        let psi = lt
            .solve_upper_triangular(&p.vector)
            .ok_or_else(|| Error::Eigen("back substitution failed".into()))?;
        let norm = psi.norm();
        p.vector = if norm > 0.0 {
            psi / Complex::new(norm, 0.0)
        } else {
            psi
        };
    }
    pairs.sort_by(|x, y| {
        x.value
            .im
            .total_cmp(&y.value.im)
            .then(x.value.re.total_cmp(&y.value.re))
    });
    Ok(pairs)
}

fn skew_eig(a: &DMatrix<f64>) -> Vec<EigenPair> {
    let n = a.nrows();
    // H = i·(A − Aᵀ)/2 is Hermitian; H v = μ v  ⇔  A v = −iμ v
    let h = DMatrix::from_fn(n, n, |r, c| {
        Complex::new(0.0, 0.5 * (a[(r, c)] - a[(c, r)]))
    });
    let eig = SymmetricEigen::new(h);
    (0..n)
        .map(|k| EigenPair {
            value: Complex::new(0.0, -eig.eigenvalues[k]),
            vector: eig.eigenvectors.column(k).into_owned(),
        })
        .collect()
}

fn general_eig(a: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = a.nrows();
    let values = a
        .clone()
        .schur()
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect::<Vec<_>>();
    let ac = a.map(|v| Complex::new(v, 0.0));
    let scale = a.amax().max(1.0);
    values
        .into_iter()
        .map(|lambda| {
            let shift = lambda + Complex::new(1e-10 * scale, 1e-10 * scale);
            let shifted = &ac - DMatrix::from_diagonal_element(n, n, shift);
            let lu = shifted.lu();
            let mut v = DVector::from_element(n, Complex::new(1.0, 0.0));
            for _ in 0..3 {
                v = lu
                    .solve(&v)
                    .ok_or_else(|| Error::Eigen("inverse iteration failed".into()))?;
                let norm = v.norm();
                if !norm.is_finite() || norm == 0.0 {
                    return Err(Error::Eigen("inverse iteration diverged".into()));
                }
                v /= Complex::new(norm, 0.0);
            }
            Ok(EigenPair {
                value: lambda,
                vector: v,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(m: &DMatrix<f64>, j: &DMatrix<f64>, p: &EigenPair) -> f64 {
        let mc = m.map(|v| Complex::new(v, 0.0));
        let jc = j.map(|v| Complex::new(v, 0.0));
        (&jc * &p.vector - (&mc * &p.vector) * p.value).norm() / p.vector.norm()
    }

    #[test]
    fn rotation_generator() {
        let m = DMatrix::identity(2, 2);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let pairs = dense_generalized_eig(&m, &j).unwrap();
        assert!((pairs[0].value - Complex::new(0.0, -1.0)).norm() < 1e-14);
        assert!((pairs[1].value - Complex::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn scaled_mass_two_by_two() {
        // M⁻¹J = [[0, 1/2], [−2, 0]], characteristic polynomial λ² + 1
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        let pairs = dense_generalized_eig(&m, &j).unwrap();
        for p in &pairs {
            assert!(p.value.re.abs() < 1e-14);
            assert!((p.value.im.abs() - 1.0).abs() < 1e-14);
            assert!(residual(&m, &j, p) < 1e-12);
        }
    }

    #[test]
    fn zero_operator() {
        let m = DMatrix::identity(3, 3);
        let j = DMatrix::zeros(3, 3);
        for p in dense_generalized_eig(&m, &j).unwrap() {
            assert_eq!(p.value.norm(), 0.0);
        }
    }

    #[test]
    fn indefinite_mass_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let j = DMatrix::zeros(2, 2);
        assert!(matches!(
            dense_generalized_eig(&m, &j),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn non_skew_operator_uses_general_path() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let j = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let pairs = dense_generalized_eig(&m, &j).unwrap();
        let mut re: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 3.0).abs() < 1e-12);
        for p in &pairs {
            assert!(residual(&m, &j, p) < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn skew_pairs_are_imaginary_with_small_residual(
            g in prop::collection::vec(-1.0f64..1.0, 36),
            s in prop::collection::vec(-1.0f64..1.0, 36),
        ) {
            let n = 6;
            let g = DMatrix::from_row_slice(n, n, &g);
            let m = &g * g.transpose() + DMatrix::identity(n, n);
            let s = DMatrix::from_row_slice(n, n, &s);
            let j = &s - s.transpose();
            let pairs = dense_generalized_eig(&m, &j).unwrap();
            prop_assert_eq!(pairs.len(), n);
            for p in &pairs {
                prop_assert!(p.value.re.abs() <= 1e-8 * p.value.norm().max(1.0));
                prop_assert!(residual(&m, &j, p) <= 1e-8);
            }
        }
    }
}
