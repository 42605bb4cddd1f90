//! Port-Hamiltonian subsystems and their gyrator interconnection.

use crate::assembly::interface_coupling;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Which causality a subsystem carries. Side one receives its inputs in the
/// β equation, side two in the α equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    One,
    Two,
}

/// `M ė = J e + B_ext u_ext + B_int u_int`, `y = T e`, with the state
/// ordered `(e_α, e_β)`.
#[derive(Clone, Debug)]
pub struct PHSubsystem {
    side: Side,
    n_alpha: usize,
    n_beta: usize,
    m: CsrMatrix,
    j: CsrMatrix,
    b_ext: CsrMatrix,
    b_int: CsrMatrix,
    t_ext: CsrMatrix,
    t_int: CsrMatrix,
}

/// Port blocks acting on the input-carrying variable of a subsystem.
#[derive(Clone, Debug)]
pub struct PortBlocks {
    /// `B` for the external boundary (rows: block DOFs, cols: port DOFs).
    pub b_ext: CsrMatrix,
    pub b_int: CsrMatrix,
    /// Trace matrices (rows: trace DOFs, cols: block DOFs).
    pub t_ext: CsrMatrix,
    pub t_int: CsrMatrix,
}

fn check(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}

impl PHSubsystem {
    /// `J = [[0, j_ab], [-j_abᵀ, 0]]`; the port blocks act on e_β for side
    /// one and on e_α for side two.
    pub fn new(
        side: Side,
        m_alpha: &CsrMatrix,
        m_beta: &CsrMatrix,
        j_ab: &CsrMatrix,
        ports: &PortBlocks,
    ) -> Result<Self> {
        let (na, nb) = (m_alpha.nrows(), m_beta.nrows());
        check("alpha mass", na, m_alpha.ncols())?;
        check("beta mass", nb, m_beta.ncols())?;
        check("J rows", na, j_ab.nrows())?;
        check("J cols", nb, j_ab.ncols())?;
        let m = CsrMatrix::block(
            &[na, nb],
            &[na, nb],
            &[vec![Some(m_alpha), None], vec![None, Some(m_beta)]],
        )?;
        let jt = j_ab.transpose().scale(-1.0);
        let j = CsrMatrix::block(
            &[na, nb],
            &[na, nb],
            &[vec![None, Some(j_ab)], vec![Some(&jt), None]],
        )?;
        let (b_ext, b_int, t_ext, t_int) = match side {
            Side::One => {
                let ne = ports.b_ext.ncols();
                let ni = ports.b_int.ncols();
                (
                    CsrMatrix::block(&[na, nb], &[ne], &[vec![None], vec![Some(&ports.b_ext)]])?,
                    CsrMatrix::block(&[na, nb], &[ni], &[vec![None], vec![Some(&ports.b_int)]])?,
                    CsrMatrix::block(
                        &[ports.t_ext.nrows()],
                        &[na, nb],
                        &[vec![None, Some(&ports.t_ext)]],
                    )?,
                    CsrMatrix::block(
                        &[ports.t_int.nrows()],
                        &[na, nb],
                        &[vec![None, Some(&ports.t_int)]],
                    )?,
                )
            }
            Side::Two => {
                let ne = ports.b_ext.ncols();
                let ni = ports.b_int.ncols();
                (
                    CsrMatrix::block(&[na, nb], &[ne], &[vec![Some(&ports.b_ext)], vec![None]])?,
                    CsrMatrix::block(&[na, nb], &[ni], &[vec![Some(&ports.b_int)], vec![None]])?,
                    CsrMatrix::block(
                        &[ports.t_ext.nrows()],
                        &[na, nb],
                        &[vec![Some(&ports.t_ext), None]],
                    )?,
                    CsrMatrix::block(
                        &[ports.t_int.nrows()],
                        &[na, nb],
                        &[vec![Some(&ports.t_int), None]],
                    )?,
                )
            }
        };
        Ok(PHSubsystem {
            side,
            n_alpha: na,
            n_beta: nb,
            m,
            j,
            b_ext,
            b_int,
            t_ext,
            t_int,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn m(&self) -> &CsrMatrix {
        &self.m
    }

    pub fn j(&self) -> &CsrMatrix {
        &self.j
    }

    pub fn b_ext(&self) -> &CsrMatrix {
        &self.b_ext
    }

    pub fn b_int(&self) -> &CsrMatrix {
        &self.b_int
    }

    pub fn t_ext(&self) -> &CsrMatrix {
        &self.t_ext
    }

    pub fn t_int(&self) -> &CsrMatrix {
        &self.t_int
    }

    /// `½ eᵀ M e`
    pub fn hamiltonian(&self, e: &[f64]) -> f64 {
        hamiltonian(&self.m, e)
    }

    /// Strong output on the external boundary.
    pub fn output_ext(&self, e: &[f64]) -> Result<Vec<f64>> {
        self.t_ext.spmv(e)
    }

    pub fn output_int(&self, e: &[f64]) -> Result<Vec<f64>> {
        self.t_int.spmv(e)
    }

    /// Number of external input coefficients.
    pub fn n_inputs(&self) -> usize {
        self.b_ext.ncols()
    }
}

/// `½ eᵀ M e`
pub fn hamiltonian(m: &CsrMatrix, e: &[f64]) -> f64 {
    let me = m.spmv(e).expect("state matches mass matrix");
    0.5 * crate::linalg::dot(e, &me)
}

/// Two subsystems joined by `u₁ = σ y₂`, `u₂ = -σ y₁` on the interface.
/// Monolithic state is `(e_α1, e_β1, e_α2, e_β2)`.
#[derive(Clone, Debug)]
pub struct CoupledSystem {
    sub1: PHSubsystem,
    sub2: PHSubsystem,
    sigma: f64,
    psi: CsrMatrix,
    l: CsrMatrix,
    // σ-signed coupling on full subsystem states (n1 × n2)
    g12: CsrMatrix,
    g21: CsrMatrix,
    m: CsrMatrix,
    j: CsrMatrix,
    b: CsrMatrix,
}

impl CoupledSystem {
    /// `psi[l, k]` pairs the α₂ interface trace `l` with the β₁ trace `k`.
    pub fn couple(
        sub1: PHSubsystem,
        sub2: PHSubsystem,
        psi: CsrMatrix,
        sigma: f64,
    ) -> Result<Self> {
        if sub1.side != Side::One || sub2.side != Side::Two {
            return Err(Error::invalid(
                "couple expects a side-one and a side-two subsystem",
            ));
        }
        if sigma.abs() != 1.0 {
            return Err(Error::invalid(format!("coupling sign {sigma} must be ±1")));
        }
        check("psi rows", sub2.t_int.nrows(), psi.nrows())?;
        check("psi cols", sub1.t_int.nrows(), psi.ncols())?;
        check("interface port 1", psi.nrows(), sub1.b_int.ncols())?;
        check("interface port 2", psi.ncols(), sub2.b_int.ncols())?;
        let (n1, n2) = (sub1.dim(), sub2.dim());
        let l_full = interface_coupling(&psi, &sub1.t_int, &sub2.t_int)?;
        let g12 = l_full.scale(sigma);
        let g21 = g12.transpose().scale(-1.0);
        let l = extract(&l_full, sub1.n_alpha, sub1.n_beta, 0, sub2.n_alpha);
        let m = CsrMatrix::block(
            &[n1, n2],
            &[n1, n2],
            &[vec![Some(&sub1.m), None], vec![None, Some(&sub2.m)]],
        )?;
        let j = CsrMatrix::block(
            &[n1, n2],
            &[n1, n2],
            &[
                vec![Some(&sub1.j), Some(&g12)],
                vec![Some(&g21), Some(&sub2.j)],
            ],
        )?;
        let (p1, p2) = (sub1.n_inputs(), sub2.n_inputs());
        let b = CsrMatrix::block(
            &[n1, n2],
            &[p1, p2],
            &[vec![Some(&sub1.b_ext), None], vec![None, Some(&sub2.b_ext)]],
        )?;
        Ok(CoupledSystem {
            sub1,
            sub2,
            sigma,
            psi,
            l,
            g12,
            g21,
            m,
            j,
            b,
        })
    }

    pub fn sub1(&self) -> &PHSubsystem {
        &self.sub1
    }

    pub fn sub2(&self) -> &PHSubsystem {
        &self.sub2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn psi(&self) -> &CsrMatrix {
        &self.psi
    }

    /// Unsigned interface coupling block (β₁ rows × α₂ cols).
    pub fn l(&self) -> &CsrMatrix {
        &self.l
    }

    /// `σ L` padded to full subsystem states: the force of Ω₂ on Ω₁.
    pub fn g12(&self) -> &CsrMatrix {
        &self.g12
    }

    /// `-σ Lᵀ` padded: the force of Ω₁ on Ω₂.
    pub fn g21(&self) -> &CsrMatrix {
        &self.g21
    }

    pub fn dim(&self) -> usize {
        self.sub1.dim() + self.sub2.dim()
    }

    pub fn m(&self) -> &CsrMatrix {
        &self.m
    }

    pub fn j(&self) -> &CsrMatrix {
        &self.j
    }

    /// External input matrix acting on `(u₁, u₂)`.
    pub fn b(&self) -> &CsrMatrix {
        &self.b
    }

    /// Block sizes `(α₁, β₁, α₂, β₂)`.
    pub fn block_sizes(&self) -> [usize; 4] {
        [
            self.sub1.n_alpha,
            self.sub1.n_beta,
            self.sub2.n_alpha,
            self.sub2.n_beta,
        ]
    }

    pub fn split<'a>(&self, e: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        e.split_at(self.sub1.dim())
    }

    pub fn join(&self, e1: &[f64], e2: &[f64]) -> Vec<f64> {
        let mut e = e1.to_vec();
        e.extend_from_slice(e2);
        e
    }

    /// `(H₁, H₂)` of a monolithic state.
    pub fn hamiltonians(&self, e: &[f64]) -> (f64, f64) {
        let (e1, e2) = self.split(e);
        (self.sub1.hamiltonian(e1), self.sub2.hamiltonian(e2))
    }

    /// Interface inputs `(u₁, u₂) = (σ y₂, -σ y₁)` for subsystem states.
    pub fn interface_inputs(&self, e1: &[f64], e2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let y1 = self.sub1.output_int(e1)?;
        let y2 = self.sub2.output_int(e2)?;
        Ok((
            y2.iter().map(|v| self.sigma * v).collect(),
            y1.iter().map(|v| -self.sigma * v).collect(),
        ))
    }
}

fn extract(a: &CsrMatrix, r0: usize, nr: usize, c0: usize, nc: usize) -> CsrMatrix {
    let t: Vec<_> = a
        .triplets()
        .into_iter()
        .filter(|&(i, j, _)| i >= r0 && i < r0 + nr && j >= c0 && j < c0 + nc)
        .map(|(i, j, v)| (i - r0, j - c0, v))
        .collect();
    CsrMatrix::from_triplets(nr, nc, &t).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn dense(rows: &[&[f64]]) -> CsrMatrix {
        CsrMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    // scalar α/β blocks with one interface trace each
    fn toy(sigma: f64) -> CoupledSystem {
        let one = dense(&[&[1.0]]);
        let two = dense(&[&[2.0]]);
        let p1 = PortBlocks {
            b_ext: dense(&[&[1.0]]),
            b_int: dense(&[&[3.0]]),
            t_ext: dense(&[&[1.0]]),
            t_int: dense(&[&[1.0]]),
        };
        let p2 = PortBlocks {
            b_ext: dense(&[&[1.0]]),
            b_int: dense(&[&[3.0]]),
            t_ext: dense(&[&[1.0]]),
            t_int: dense(&[&[1.0]]),
        };
        let s1 = PHSubsystem::new(Side::One, &one, &two, &dense(&[&[1.5]]), &p1).unwrap();
        let s2 = PHSubsystem::new(Side::Two, &two, &one, &dense(&[&[-0.5]]), &p2).unwrap();
        CoupledSystem::couple(s1, s2, dense(&[&[3.0]]), sigma).unwrap()
    }

    #[test]
    fn subsystem_blocks() {
        let c = toy(1.0);
        assert_eq!(
            c.sub1().j().to_dense(),
            vec![vec![0.0, 1.5], vec![-1.5, 0.0]]
        );
        assert_eq!(c.sub1().b_ext().to_dense(), vec![vec![0.0], vec![1.0]]);
        assert_eq!(c.sub2().b_ext().to_dense(), vec![vec![1.0], vec![0.0]]);
        assert_eq!(c.sub1().t_int().to_dense(), vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn monolithic_j_is_exactly_skew() {
        for sigma in [1.0, -1.0] {
            let c = toy(sigma);
            assert_eq!(c.j().skew_defect(), 0.0);
            // β₁ row, α₂ column
            assert_eq!(c.j().get(1, 2), sigma * 3.0);
            assert_eq!(c.j().get(2, 1), -sigma * 3.0);
        }
    }

    #[test]
    fn coupling_matches_feedback_through_ports() {
        let c = toy(1.0);
        let e1 = [0.3, -0.7];
        let e2 = [1.1, 0.4];
        let (u1, u2) = c.interface_inputs(&e1, &e2).unwrap();
        let f1 = c.sub1().b_int().spmv(&u1).unwrap();
        let f2 = c.sub2().b_int().spmv(&u2).unwrap();
        assert_eq!(f1, c.g12().spmv(&e2).unwrap());
        assert_eq!(f2, c.g21().spmv(&e1).unwrap());
        // interface power is neutral for equal-time states
        assert!((dot(&e1, &f1) + dot(&e2, &f2)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sign_and_sides() {
        let c = toy(1.0);
        let (s1, s2) = (c.sub1().clone(), c.sub2().clone());
        assert!(CoupledSystem::couple(s1.clone(), s2.clone(), c.psi().clone(), 0.5).is_err());
        assert!(CoupledSystem::couple(s2, s1, c.psi().clone(), 1.0).is_err());
    }

    #[test]
    fn hamiltonian_of_diagonal_mass() {
        let m = CsrMatrix::identity(2);
        assert_eq!(hamiltonian(&m, &[3.0, 4.0]), 12.5);
        assert_eq!(hamiltonian(&m, &[0.0, 0.0]), 0.0);
    }
}
