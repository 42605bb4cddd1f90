//! Modal analysis of the coupled system `iω M ψ = J ψ` and the analytical
//! reference frequencies of both models.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, dense_generalized_eig, Complex, CsrMatrix, LuFactorization};
use crate::phcore::CoupledSystem;

/// Positive frequencies in ascending order with their eigenvectors in the
/// monolithic `(α₁, β₁, α₂, β₂)` layout.
#[derive(Clone, Debug)]
pub struct ModeSet {
    /// Angular frequencies (rad/s).
    pub omegas: Vec<f64>,
    /// Unit Euclidean norm eigenvectors.
    pub vectors: Vec<DVector<Complex>>,
    /// `‖Jψ - iωMψ‖` for each unit eigenvector.
    pub residuals: Vec<f64>,
    /// Number of discarded (numerically) zero frequencies.
    pub zero_modes: usize,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Frequencies in Hz.
    pub fn hertz(&self) -> Vec<f64> {
        self.omegas.iter().map(|w| w / (2.0 * PI)).collect()
    }
}

// ω² below this fraction of ω²_max counts as zero
const ZERO_TOL: f64 = 1e-12;

/// The `n_modes` smallest strictly positive frequencies of the coupled
/// system with zero external inputs.
///
/// The α-variables of both sides couple only to β-variables, so the problem
/// reduces to the symmetric definite problem `ω² M_X x = C M_Y⁻¹ Cᵀ x` on
/// `X = (α₁, α₂)`. Systems without that structure fall back to the dense
/// complex solver.
pub fn solve_modes(sys: &CoupledSystem, n_modes: usize) -> Result<ModeSet> {
    let [a1, b1, a2, b2] = sys.block_sizes();
    let n = sys.dim();
    // position of each monolithic index in X or Y
    let mut place = Vec::with_capacity(n);
    let (mut nx, mut ny) = (0, 0);
    for (k, &len) in [a1, b1, a2, b2].iter().enumerate() {
        for _ in 0..len {
            if k % 2 == 0 {
                place.push((true, nx));
                nx += 1;
            } else {
                place.push((false, ny));
                ny += 1;
            }
        }
    }
    let mut c = Vec::new();
    for (i, j, v) in sys.j().triplets() {
        match (place[i], place[j]) {
            ((true, x), (false, y)) => c.push((x, y, v)),
            ((false, _), (true, _)) => {}
            _ if v != 0.0 => return solve_modes_dense(sys, n_modes),
            _ => {}
        }
    }
    let mut mx = DMatrix::zeros(nx, nx);
    let mut my = Vec::new();
    for (i, j, v) in sys.m().triplets() {
        match (place[i], place[j]) {
            ((true, x), (true, z)) => mx[(x, z)] += v,
            ((false, y), (false, z)) => my.push((y, z, v)),
            _ if v != 0.0 => return solve_modes_dense(sys, n_modes),
            _ => {}
        }
    }
    let c = CsrMatrix::from_triplets(nx, ny, &c)?;
    let my = CsrMatrix::from_triplets(ny, ny, &my)?;
    let lu = LuFactorization::new(&my)?;
    // Z = M_Y⁻¹ Cᵀ, one column per X dof
    let mut z = DMatrix::zeros(ny, nx);
    let mut col = vec![0.0; ny];
    for x in 0..nx {
        col.iter_mut().for_each(|v| *v = 0.0);
        for (y, v) in c.row(x) {
            col[y] = v;
        }
        lu.solve_in_place(&mut col)?;
        z.column_mut(x).copy_from_slice(&col);
    }
    let mut k = DMatrix::zeros(nx, nx);
    for x in 0..nx {
        for (y, v) in c.row(x) {
            for xx in 0..nx {
                k[(x, xx)] += v * z[(y, xx)];
            }
        }
    }
    let k = (&k + k.transpose()) * 0.5;
    let l = cholesky_lower(&mx)?;
    let lk = l
        .solve_lower_triangular(&k)
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let a = l
        .solve_lower_triangular(&lk.transpose())
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut order: Vec<usize> = (0..nx).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let zero_modes = order
        .iter()
        .filter(|&&p| eig.eigenvalues[p] <= ZERO_TOL * lam_max)
        .count();
    let lt = l.transpose();
    let mut set = ModeSet {
        omegas: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        zero_modes,
    };
    for &p in order.iter().skip(zero_modes).take(n_modes) {
        let omega = eig.eigenvalues[p].sqrt();
        let xv = lt
            .solve_upper_triangular(&eig.eigenvectors.column(p).into_owned())
            .ok_or_else(|| Error::Eigen("back substitution failed".into()))?;
        let yv = &z * &xv / omega;
        // ψ = (x, i y) scattered back to the monolithic layout
        let mut psi = DVector::from_element(n, Complex::new(0.0, 0.0));
        for (g, &(is_x, loc)) in place.iter().enumerate() {
            psi[g] = if is_x {
                Complex::new(xv[loc], 0.0)
            } else {
                Complex::new(0.0, yv[loc])
            };
        }
        let norm = psi.norm();
        psi /= Complex::new(norm, 0.0);
        set.residuals.push(residual(sys, &psi, omega)?);
        set.omegas.push(omega);
        set.vectors.push(psi);
    }
    Ok(set)
}

fn solve_modes_dense(sys: &CoupledSystem, n_modes: usize) -> Result<ModeSet> {
    let pairs = dense_generalized_eig(&sys.m().to_nalgebra(), &sys.j().to_nalgebra())?;
    // λ = iω, keep ω > 0
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.value.norm()));
    let mut positive: Vec<_> = pairs.into_iter().filter(|p| p.value.im > 0.0).collect();
    let total = positive.len();
    positive.retain(|p| p.value.im * p.value.im > ZERO_TOL * scale * scale);
    let zero_modes = total - positive.len();
    let mut set = ModeSet {
        omegas: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        zero_modes,
    };
    for p in positive.into_iter().take(n_modes) {
        let omega = p.value.im;
        set.residuals.push(residual(sys, &p.vector, omega)?);
        set.omegas.push(omega);
        set.vectors.push(p.vector);
    }
    Ok(set)
}

fn residual(sys: &CoupledSystem, psi: &DVector<Complex>, omega: f64) -> Result<f64> {
    let re: Vec<f64> = psi.iter().map(|c| c.re).collect();
    let im: Vec<f64> = psi.iter().map(|c| c.im).collect();
    let (jr, ji) = (sys.j().spmv(&re)?, sys.j().spmv(&im)?);
    let (mr, mi) = (sys.m().spmv(&re)?, sys.m().spmv(&im)?);
    // Jψ - iωMψ = (Jr + ωMi) + i(Ji - ωMr)
    let s: f64 = (0..re.len())
        .map(|k| (jr[k] + omega * mi[k]).powi(2) + (ji[k] - omega * mr[k]).powi(2))
        .sum();
    Ok(s.sqrt())
}

/// Roots `z` of `cos z cosh z + 1 = 0`, one in each `((k-1)π, kπ)`.
pub fn cantilever_roots(n: usize) -> Vec<f64> {
    // cos z + 1/cosh z has the same sign and stays bounded
    let f = |z: f64| z.cos() + 1.0 / z.cosh();
    (1..=n)
        .map(|k| {
            let (mut lo, mut hi) = ((k - 1) as f64 * PI, k as f64 * PI);
            let flo = f(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 * hi {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Cantilever frequencies `ω_n = β_n² √(EI/ρA)` with `β_n L` the roots of
/// `cos(βL) cosh(βL) + 1 = 0`.
pub fn beam_analytical_freqs(n: usize, ei: f64, rho_a: f64, length: f64) -> Result<Vec<f64>> {
    if n == 0 || !(ei > 0.0 && rho_a > 0.0 && length > 0.0) {
        return Err(Error::invalid("need n >= 1 and positive beam parameters"));
    }
    Ok(cantilever_roots(n)
        .into_iter()
        .map(|z| (z / length).powi(2) * (ei / rho_a).sqrt())
        .collect())
}

/// The `count` smallest `(π/2L) √((2m-1)² + (2n-1)²)`, `m, n ≥ 1`, with
/// multiplicity.
pub fn wave_analytical_freqs(count: usize, length: f64) -> Result<Vec<f64>> {
    if !(length > 0.0) {
        return Err(Error::invalid("domain length must be positive"));
    }
    let mut all = Vec::new();
    for m in 1..=count + 1 {
        for n in 1..=count + 1 {
            let (a, b) = ((2 * m - 1) as f64, (2 * n - 1) as f64);
            all.push(PI / (2.0 * length) * (a * a + b * b).sqrt());
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phcore::{PHSubsystem, PortBlocks, Side};

    fn dense(rows: &[Vec<f64>]) -> CsrMatrix {
        CsrMatrix::from_dense(rows).unwrap()
    }

    fn chain() -> CoupledSystem {
        // two 2-dof subsystems with non-diagonal masses
        let ma = dense(&[vec![2.0, 0.5], vec![0.5, 1.0]]);
        let mb = dense(&[vec![1.0, 0.2], vec![0.2, 3.0]]);
        let j1 = dense(&[vec![1.0, -0.3], vec![0.4, 2.0]]);
        let j2 = dense(&[vec![-0.7, 1.1], vec![0.0, 0.9]]);
        let port = |rows: usize| PortBlocks {
            b_ext: CsrMatrix::zeros(rows, 1),
            b_int: CsrMatrix::zeros(rows, 1),
            t_ext: CsrMatrix::zeros(1, rows),
            t_int: dense(&[vec![0.0, 1.0]]),
        };
        let s1 = PHSubsystem::new(Side::One, &ma, &mb, &j1, &port(2)).unwrap();
        let s2 = PHSubsystem::new(Side::Two, &mb, &ma, &j2, &port(2)).unwrap();
        CoupledSystem::couple(s1, s2, dense(&[vec![1.5]]), 1.0).unwrap()
    }

    #[test]
    fn reduced_solver_matches_dense_complex_solver() {
        let sys = chain();
        let fast = solve_modes(&sys, 4).unwrap();
        let slow = solve_modes_dense(&sys, 4).unwrap();
        assert_eq!(fast.len(), 4);
        for (a, b) in fast.omegas.iter().zip(&slow.omegas) {
            assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
        }
        assert!(fast.residuals.iter().all(|&r| r < 1e-10));
        assert!(fast.omegas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn frequencies_ignore_coupling_sign() {
        let sys = chain();
        let flipped = CoupledSystem::couple(
            sys.sub1().clone(),
            sys.sub2().clone(),
            sys.psi().clone(),
            -1.0,
        )
        .unwrap();
        let a = solve_modes(&sys, 4).unwrap();
        let b = solve_modes(&flipped, 4).unwrap();
        for (x, y) in a.omegas.iter().zip(&b.omegas) {
            assert!((x - y).abs() < 1e-10 * x);
        }
    }

    #[test]
    fn cantilever_first_root() {
        let z = cantilever_roots(3);
        assert!((z[0] - 1.87510).abs() < 5e-6);
        assert!((z[1] - 4.69409).abs() < 5e-6);
        for &r in &z {
            assert!((r.cos() * r.cosh() + 1.0).abs() < 1e-9 * r.cosh());
        }
    }

    #[test]
    fn beam_frequencies_unit_parameters() {
        let w = beam_analytical_freqs(2, 1.0, 1.0, 1.0).unwrap();
        // high-precision roots squared
        assert!((w[0] - 3.516015269).abs() < 1e-8);
        assert!((w[1] - 22.03449156).abs() < 1e-7);
        assert!(beam_analytical_freqs(0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn wave_frequencies_and_degeneracy() {
        let w = wave_analytical_freqs(3, 1.0).unwrap();
        assert!((w[0] - PI * 2f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((w[1] - PI * 10f64.sqrt() / 2.0).abs() < 1e-14);
        assert_eq!(w[1], w[2]);
        assert!((w[0] / (2.0 * PI) - 0.3536).abs() < 5e-5);
    }
}
