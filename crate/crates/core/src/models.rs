//! The two example problems: a cantilever Euler-Bernoulli beam split at an
//! interior point, and the wave equation on the unit square split along
//! its diagonal.

use std::sync::Arc;

use crate::assembly::{
    differential, l2_error_sq, port_matrix, psi, trace_matrix, weighted_mass, BoundarySpace,
    DiffOp, Family, FunctionSpace,
};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryTag, Mesh1D, Mesh2D, Subdomain};
use crate::phcore::{CoupledSystem, PHSubsystem, PortBlocks, Side};
use crate::timeint::Inputs;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamConfig {
    /// Bending stiffness (N·m²).
    pub ei: f64,
    /// Mass per unit length (kg/m).
    pub rho_a: f64,
    /// Length (m).
    pub length: f64,
    /// Forcing frequency (rad/s).
    pub omega: f64,
    /// Cells on Ω₁ = [x_int, L] (clamped end).
    pub n1: usize,
    /// Cells on Ω₂ = [0, x_int] (free end).
    pub n2: usize,
    pub x_int: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            ei: 1.0,
            rho_a: 1.0,
            length: 1.0,
            omega: 4.0,
            n1: 3,
            n2: 3,
            x_int: 0.5,
            dt: 1e-4,
            t_end: 1.0,
        }
    }
}

/// Exact beam deflection and the derivatives the ports and errors need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamExact {
    pub w: f64,
    pub w_x: f64,
    pub w_xx: f64,
    pub w_xxx: f64,
    pub w_xxxx: f64,
    pub w_t: f64,
    pub w_tx: f64,
    pub w_tt: f64,
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.ei, self.rho_a, self.length, self.omega, self.dt];
        if positive.iter().any(|v| !(*v > 0.0)) || !(self.t_end >= 0.0) {
            return Err(Error::invalid("beam parameters must be positive"));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::invalid("beam cell counts must be positive"));
        }
        if !(self.x_int > 0.0 && self.x_int < self.length) {
            return Err(Error::invalid("beam interface must lie inside the beam"));
        }
        Ok(())
    }

    /// Wavenumber `κ = (ω² ρA / EI)^{1/4}`.
    pub fn kappa(&self) -> f64 {
        (self.omega * self.omega * self.rho_a / self.ei).powf(0.25)
    }

    /// `w = ½[cosh κx + cos κx] sin ωt`, which solves `ρA w_tt + EI w_xxxx = 0`.
    pub fn exact(&self, x: f64, t: f64) -> BeamExact {
        let k = self.kappa();
        let (ch, c, sh, s) = ((k * x).cosh(), (k * x).cos(), (k * x).sinh(), (k * x).sin());
        let (st, ct) = ((self.omega * t).sin(), (self.omega * t).cos());
        let shape = [
            0.5 * (ch + c),
            0.5 * k * (sh - s),
            0.5 * k * k * (ch - c),
            0.5 * k.powi(3) * (sh + s),
            0.5 * k.powi(4) * (ch + c),
        ];
        BeamExact {
            w: shape[0] * st,
            w_x: shape[1] * st,
            w_xx: shape[2] * st,
            w_xxx: shape[3] * st,
            w_xxxx: shape[4] * st,
            w_t: self.omega * shape[0] * ct,
            w_tx: self.omega * shape[1] * ct,
            w_tt: -self.omega * self.omega * shape[0] * st,
        }
    }

    /// Port data `(Γ₁ at x = L, Γ₂ at x = 0)`: the clamped end receives
    /// `(w_t, w_tx)`, the free end `(EI w_xxx, -EI w_xx)`.
    pub fn boundary_data(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let end = self.exact(self.length, t);
        let free = self.exact(0.0, t);
        (
            [end.w_t, end.w_tx],
            [self.ei * free.w_xxx, -self.ei * free.w_xx],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveConfig {
    /// Cells per side of the unit square.
    pub n: usize,
    /// Polynomial degree.
    pub k: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig {
            n: 10,
            k: 1,
            dt: 1e-3,
            t_end: 1.0,
        }
    }
}

impl WaveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !(1..=2).contains(&self.k) {
            return Err(Error::invalid("wave needs n >= 1 and k in {1, 2}"));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::invalid("wave time parameters must be positive"));
        }
        Ok(())
    }
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `f(t) = 2 sin(√2 t) + 3 cos(√2 t)` and its derivative.
pub fn wave_time(t: f64) -> (f64, f64) {
    let (s, c) = ((SQRT2 * t).sin(), (SQRT2 * t).cos());
    (2.0 * s + 3.0 * c, SQRT2 * (2.0 * c - 3.0 * s))
}

/// `(e_α, e_β) = (g f', f ∇g)` with `g = cos x sin y`.
pub fn wave_exact(x: f64, y: f64, t: f64) -> (f64, [f64; 2]) {
    let (f, df) = wave_time(t);
    let g = x.cos() * y.sin();
    let grad = [-x.sin() * y.sin(), x.cos() * y.cos()];
    (g * df, [f * grad[0], f * grad[1]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Alpha1,
    Beta1,
    Alpha2,
    Beta2,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::Alpha1, Block::Beta1, Block::Alpha2, Block::Beta2];

    pub fn name(self) -> &'static str {
        match self {
            Block::Alpha1 => "alpha_1",
            Block::Beta1 => "beta_1",
            Block::Alpha2 => "alpha_2",
            Block::Beta2 => "beta_2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Beam(BeamConfig),
    Wave(WaveConfig),
}

/// A coupled system with its spaces, port spaces and exact solution.
#[derive(Clone, Debug)]
pub struct Problem {
    model: Model,
    system: CoupledSystem,
    spaces: [FunctionSpace; 4],
    gamma1: BoundarySpace,
    gamma2: BoundarySpace,
}

struct Parts {
    spaces: [FunctionSpace; 4],
    masses: [CsrMatrix; 4],
    j1: CsrMatrix,
    j2: CsrMatrix,
}

impl Problem {
    pub fn beam(cfg: &BeamConfig, sigma: f64) -> Result<Self> {
        cfg.validate()?;
        let mesh = Arc::new(Mesh1D::build_interval_decomposed(
            cfg.length, cfg.n1, cfg.n2, cfg.x_int,
        )?);
        let a1 = FunctionSpace::interval(mesh.clone(), Subdomain::Omega1, Family::Dg1d)?;
        let b1 = FunctionSpace::interval(mesh.clone(), Subdomain::Omega1, Family::Hermite)?;
        let a2 = FunctionSpace::interval(mesh.clone(), Subdomain::Omega2, Family::Hermite)?;
        let b2 = FunctionSpace::interval(mesh, Subdomain::Omega2, Family::Dg1d)?;
        let rho = cfg.rho_a;
        let flex = 1.0 / cfg.ei;
        let masses = [
            weighted_mass(&a1, &|_| rho)?,
            weighted_mass(&b1, &|_| flex)?,
            weighted_mass(&a2, &|_| rho)?,
            weighted_mass(&b2, &|_| flex)?,
        ];
        let d1 = differential(&a1, &b1, DiffOp::Dxx)?;
        let d2 = differential(&b2, &a2, DiffOp::Dxx)?;
        let parts = Parts {
            j1: d1.scale(-1.0),
            j2: d2.transpose().scale(-1.0),
            spaces: [a1, b1, a2, b2],
            masses,
        };
        Problem::assemble(Model::Beam(*cfg), parts, sigma)
    }

    pub fn wave(cfg: &WaveConfig, sigma: f64) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.k;
        let mesh = Arc::new(Mesh2D::build_square_decomposed(cfg.n)?);
        let a1 = FunctionSpace::triangle(mesh.clone(), Subdomain::Omega1, Family::Dg(k - 1))?;
        let b1 = FunctionSpace::triangle(mesh.clone(), Subdomain::Omega1, Family::Rt(k))?;
        let a2 = FunctionSpace::triangle(mesh.clone(), Subdomain::Omega2, Family::Cg(k))?;
        let b2 = FunctionSpace::triangle(mesh, Subdomain::Omega2, Family::Ned(k))?;
        let one = |_: [f64; 2]| 1.0;
        let masses = [
            weighted_mass(&a1, &one)?,
            weighted_mass(&b1, &one)?,
            weighted_mass(&a2, &one)?,
            weighted_mass(&b2, &one)?,
        ];
        let d_div = differential(&a1, &b1, DiffOp::Div)?;
        let d_grad = differential(&b2, &a2, DiffOp::Grad)?;
        let parts = Parts {
            j1: d_div,
            j2: d_grad.transpose().scale(-1.0),
            spaces: [a1, b1, a2, b2],
            masses,
        };
        Problem::assemble(Model::Wave(*cfg), parts, sigma)
    }

    fn assemble(model: Model, parts: Parts, sigma: f64) -> Result<Self> {
        let Parts {
            spaces,
            masses,
            j1,
            j2,
        } = parts;
        let [_, b1, a2, _] = &spaces;
        let gamma1 = BoundarySpace::new(b1, BoundaryTag::Gamma1)?;
        let gamma2 = BoundarySpace::new(a2, BoundaryTag::Gamma2)?;
        let int1 = BoundarySpace::new(b1, BoundaryTag::Interface)?;
        let int2 = BoundarySpace::new(a2, BoundaryTag::Interface)?;
        let ports1 = PortBlocks {
            b_ext: port_matrix(b1, &gamma1)?,
            b_int: port_matrix(b1, &int2)?,
            t_ext: trace_matrix(b1, BoundaryTag::Gamma1)?,
            t_int: trace_matrix(b1, BoundaryTag::Interface)?,
        };
        let ports2 = PortBlocks {
            b_ext: port_matrix(a2, &gamma2)?,
            b_int: port_matrix(a2, &int1)?,
            t_ext: trace_matrix(a2, BoundaryTag::Gamma2)?,
            t_int: trace_matrix(a2, BoundaryTag::Interface)?,
        };
        let s1 = PHSubsystem::new(Side::One, &masses[0], &masses[1], &j1, &ports1)?;
        let s2 = PHSubsystem::new(Side::Two, &masses[2], &masses[3], &j2, &ports2)?;
        let system = CoupledSystem::couple(s1, s2, psi(&int2, &int1)?, sigma)?;
        Ok(Problem {
            model,
            system,
            spaces,
            gamma1,
            gamma2,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn system(&self) -> &CoupledSystem {
        &self.system
    }

    pub fn space(&self, b: Block) -> &FunctionSpace {
        &self.spaces[b as usize]
    }

    pub fn gamma1(&self) -> &BoundarySpace {
        &self.gamma1
    }

    pub fn gamma2(&self) -> &BoundarySpace {
        &self.gamma2
    }

    /// Exact field of a block at time `t`. 1D fields return
    /// `[value, x-derivative]`, scalar 2D fields `[value, 0]`.
    pub fn exact(&self, b: Block, x: [f64; 2], t: f64) -> [f64; 2] {
        match self.model {
            Model::Beam(cfg) => {
                let w = cfg.exact(x[0], t);
                match b {
                    Block::Alpha1 | Block::Alpha2 => [w.w_t, w.w_tx],
                    Block::Beta1 | Block::Beta2 => [cfg.ei * w.w_xx, cfg.ei * w.w_xxx],
                }
            }
            Model::Wave(_) => {
                let (a, v) = wave_exact(x[0], x[1], t);
                match b {
                    Block::Alpha1 | Block::Alpha2 => [a, 0.0],
                    Block::Beta1 | Block::Beta2 => v,
                }
            }
        }
    }

    /// Input coefficients `(u₁, u₂)` at time `t`, projected onto the Γ₁ and
    /// Γ₂ trace spaces.
    pub fn boundary_inputs(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match self.model {
            Model::Beam(cfg) => {
                let (d1, d2) = cfg.boundary_data(t);
                Ok((
                    self.gamma1.project(&|_, _| d1)?,
                    self.gamma2.project(&|_, _| d2)?,
                ))
            }
            Model::Wave(_) => {
                let u1 = self
                    .gamma1
                    .project(&|x, _| [wave_exact(x[0], x[1], t).0, 0.0])?;
                let u2 = self.gamma2.project(&|x, n| {
                    let v = wave_exact(x[0], x[1], t).1;
                    [v[0] * n[0] + v[1] * n[1], 0.0]
                })?;
                Ok((u1, u2))
            }
        }
    }

    /// Time-dependent exact boundary data as integrator inputs.
    pub fn inputs(&self) -> Inputs<'_> {
        Inputs {
            u1: Box::new(move |t| self.boundary_inputs(t).expect("projection is well posed").0),
            u2: Box::new(move |t| self.boundary_inputs(t).expect("projection is well posed").1),
        }
    }

    /// DOF interpolant of one block's exact field.
    pub fn interpolate(&self, b: Block, t: f64) -> Vec<f64> {
        self.space(b).interpolate(&|x| self.exact(b, x, t))
    }

    /// Subsystem states interpolated from the exact solution.
    pub fn initial_state(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut e1 = self.interpolate(Block::Alpha1, t);
        e1.extend(self.interpolate(Block::Beta1, t));
        let mut e2 = self.interpolate(Block::Alpha2, t);
        e2.extend(self.interpolate(Block::Beta2, t));
        (e1, e2)
    }

    /// L² errors `[α₁, β₁, α₂, β₂]` of `e1` at `t1` and `e2` at `t2`.
    pub fn l2_errors(&self, e1: &[f64], t1: f64, e2: &[f64], t2: f64) -> Result<[f64; 4]> {
        let [na1, _, na2, _] = self.system.block_sizes();
        let parts = [
            (Block::Alpha1, &e1[..na1], t1),
            (Block::Beta1, &e1[na1..], t1),
            (Block::Alpha2, &e2[..na2], t2),
            (Block::Beta2, &e2[na2..], t2),
        ];
        let one_d = matches!(self.model, Model::Beam(_));
        let mut out = [0.0; 4];
        for (slot, (b, u, t)) in out.iter_mut().zip(parts) {
            let exact = |x: [f64; 2]| {
                let v = self.exact(b, x, t);
                if one_d {
                    [v[0], 0.0]
                } else {
                    v
                }
            };
            *slot = l2_error_sq(self.space(b), u, &exact)?.sqrt();
        }
        Ok(out)
    }
}
