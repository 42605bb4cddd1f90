//! Energy, power balance, curl and error diagnostics.

use nalgebra::DVector;

use crate::assembly::{differential, l2_error_sq, DiffOp, Family, FunctionSpace};
use crate::error::{Error, Result};
use crate::linalg::{Complex, CsrMatrix};
use crate::mesh::BoundaryTag;
use crate::models::{BeamConfig, Block, Problem, WaveConfig};
use crate::timeint::{coupling_step_limit, simulate_staggered, Bootstrap, RunOptions, Trajectory};

pub use crate::phcore::hamiltonian;

/// Per-step power-balance residuals of both subsystems. `omega2[0]` is
/// `None`: the first half step of Ω₂ is the explicit start.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PowerResiduals {
    pub omega1: Vec<f64>,
    pub omega2: Vec<Option<f64>>,
}

impl PowerResiduals {
    pub fn from_trajectory(tr: &Trajectory) -> Self {
        PowerResiduals {
            omega1: tr.power1.iter().map(|p| p.residual()).collect(),
            omega2: tr.power2.iter().map(|p| p.map(|p| p.residual())).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.omega1
            .iter()
            .chain(self.omega2.iter().flatten())
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn len(&self) -> usize {
        self.omega1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega1.is_empty()
    }
}

/// `‖curl u‖_{L²}` of a Nédélec field.
pub fn curl_norm(space: &FunctionSpace, u: &[f64]) -> Result<f64> {
    let Family::Ned(k) = space.family() else {
        return Err(Error::invalid("curl norm needs a Nedelec space"));
    };
    if u.len() != space.ndofs() {
        return Err(Error::DimensionMismatch {
            context: "curl norm",
            expected: space.ndofs(),
            got: u.len(),
        });
    }
    let mut s = 0.0;
    for c in 0..space.num_cells() {
        for (x, w) in space.cell_quadrature(c, 2 * k)? {
            s += w * space.evaluate_op(u, c, x, DiffOp::Curl)?[0].powi(2);
        }
    }
    Ok(s.sqrt())
}

/// Weak curl test on the Raviart–Thomas side: `⟨rot ψ, ∂ₜ e_β⟩` for every
/// continuous `ψ` vanishing on the subdomain boundary. `rot ψ` lies in the
/// RT space, is divergence free and has no normal trace, so the discrete
/// dynamics make this pairing vanish identically.
#[derive(Clone, Debug)]
pub struct WeakCurl {
    rot: CsrMatrix,
    interior: Vec<usize>,
}

impl WeakCurl {
    pub fn new(problem: &Problem) -> Result<Self> {
        let rt = problem.space(Block::Beta1);
        let Family::Rt(k) = rt.family() else {
            return Err(Error::invalid("weak curl needs a Raviart-Thomas space"));
        };
        let crate::assembly::MeshRef::Triangle(mesh) = rt.mesh() else {
            return Err(Error::invalid("weak curl needs a triangle mesh"));
        };
        let cg = FunctionSpace::triangle(mesh.clone(), rt.subdomain(), Family::Cg(k))?;
        let mut on_boundary = vec![false; cg.ndofs()];
        for tag in [
            BoundaryTag::Gamma1,
            BoundaryTag::Gamma2,
            BoundaryTag::Interface,
        ] {
            for (d, _) in cg.trace_dofs(tag) {
                on_boundary[d] = true;
            }
        }
        let interior = (0..cg.ndofs()).filter(|&d| !on_boundary[d]).collect();
        Ok(WeakCurl {
            rot: differential(rt, &cg, DiffOp::Rot)?.transpose(),
            interior,
        })
    }

    /// Number of test fields.
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// `max_ψ |⟨rot ψ, (β⁺ - β)/Δt⟩|`.
    pub fn residual(&self, beta: &[f64], beta_next: &[f64], dt: f64) -> Result<f64> {
        let rate: Vec<f64> = beta
            .iter()
            .zip(beta_next)
            .map(|(a, b)| (b - a) / dt)
            .collect();
        let r = self.rot.spmv(&rate)?;
        Ok(self.interior.iter().fold(0.0, |m, &d| m.max(r[d].abs())))
    }
}

pub fn l2_error(
    space: &FunctionSpace,
    u: &[f64],
    exact: &dyn Fn([f64; 2]) -> [f64; 2],
) -> Result<f64> {
    Ok(l2_error_sq(space, u, exact)?.sqrt())
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_rate(h: &[f64], err: &[f64]) -> Result<f64> {
    if h.len() != err.len() {
        return Err(Error::DimensionMismatch {
            context: "rate fit",
            expected: h.len(),
            got: err.len(),
        });
    }
    if h.len() < 3 {
        return Err(Error::invalid("rate fit needs at least three points"));
    }
    if h.iter().chain(err).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("rate fit needs positive finite data"));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs distinct mesh sizes"));
    }
    Ok(sxy / sxx)
}

/// Final-time errors of the four blocks over a mesh sequence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub h: Vec<f64>,
    /// `[α₁, β₁, α₂, β₂]` per mesh.
    pub errors: Vec<[f64; 4]>,
}

impl ConvergenceRecord {
    pub fn push(&mut self, h: f64, errors: [f64; 4]) -> Result<()> {
        if let Some(&last) = self.h.last() {
            if !(h < last) {
                return Err(Error::invalid("mesh sizes must decrease"));
            }
        }
        if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid("errors must be positive"));
        }
        self.h.push(h);
        self.errors.push(errors);
        Ok(())
    }

    pub fn column(&self, b: Block) -> Vec<f64> {
        self.errors.iter().map(|e| e[b as usize]).collect()
    }

    pub fn rates(&self) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (slot, b) in out.iter_mut().zip(Block::ALL) {
            *slot = fit_rate(&self.h, &self.column(b))?;
        }
        Ok(out)
    }
}

/// Runs the staggered scheme from the interpolated exact solution and
/// returns the final errors, Ω₂ measured at its own half-step time.
pub fn final_errors(
    problem: &Problem,
    dt: f64,
    t_end: f64,
    bootstrap: Bootstrap,
) -> Result<[f64; 4]> {
    let (e1, e2) = problem.initial_state(0.0);
    let opts = RunOptions {
        dt,
        t_end,
        bootstrap,
        stride: 0,
    };
    let tr = simulate_staggered(problem.system(), opts, &problem.inputs(), e1, e2)?;
    let st = tr
        .final_state
        .ok_or_else(|| Error::invalid("run produced no final state"))?;
    problem.l2_errors(&st.e1, st.t1(), &st.e2, st.t2())
}

/// Largest step `t_end / N` not above `target`.
pub fn fitting_step(target: f64, t_end: f64) -> Result<f64> {
    if !(target > 0.0) || !(t_end > 0.0) {
        return Err(Error::invalid("step and end time must be positive"));
    }
    Ok(t_end / (t_end / target).ceil())
}

/// Wave sweep with `n` cells per side, `h = 1/n` and `Δt = h/10`.
pub fn wave_convergence(k: usize, ns: &[usize], t_end: f64) -> Result<ConvergenceRecord> {
    let mut rec = ConvergenceRecord::default();
    for &n in ns {
        let h = 1.0 / n as f64;
        let cfg = WaveConfig {
            n,
            k,
            dt: fitting_step(h / 10.0, t_end)?,
            t_end,
        };
        let p = Problem::wave(&cfg, 1.0)?;
        rec.push(h, final_errors(&p, cfg.dt, t_end, Bootstrap::HalfStep)?)?;
    }
    Ok(rec)
}

/// Beam sweep with `n` cells on each side. The step is `h/10` or half the
/// coupling stability limit, whichever is smaller.
pub fn beam_convergence(base: &BeamConfig, ns: &[usize]) -> Result<ConvergenceRecord> {
    let mut rec = ConvergenceRecord::default();
    for &n in ns {
        let mut cfg = BeamConfig {
            n1: n,
            n2: n,
            ..*base
        };
        let h = cfg.x_int.max(cfg.length - cfg.x_int) / n as f64;
        let p = Problem::beam(&cfg, 1.0)?;
        let limit = coupling_step_limit(p.system())?;
        cfg.dt = fitting_step((h / 10.0).min(0.5 * limit), cfg.t_end)?;
        rec.push(h, final_errors(&p, cfg.dt, cfg.t_end, Bootstrap::HalfStep)?)?;
    }
    Ok(rec)
}

/// Running trapezoid integral of `v(t)` starting from `w0`.
pub fn cumulative_trapezoid(t: &[f64], v: &[f64], w0: f64) -> Result<Vec<f64>> {
    if t.len() != v.len() {
        return Err(Error::DimensionMismatch {
            context: "trapezoid samples",
            expected: t.len(),
            got: v.len(),
        });
    }
    let mut out = Vec::with_capacity(t.len());
    let mut w = w0;
    for k in 0..t.len() {
        if k > 0 {
            w += 0.5 * (t[k] - t[k - 1]) * (v[k] + v[k - 1]);
        }
        out.push(w);
    }
    Ok(out)
}

/// Relative L² mismatch on the interface between the α fields of both
/// subdomains for a complex mode in monolithic layout.
pub fn interface_mismatch(problem: &Problem, mode: &DVector<Complex>) -> Result<f64> {
    let sys = problem.system();
    if mode.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            context: "mode vector",
            expected: sys.dim(),
            got: mode.len(),
        });
    }
    let [a1, b1, a2, _] = sys.block_sizes();
    let slice = |off: usize, len: usize| -> [Vec<f64>; 2] {
        let v = mode.rows(off, len);
        [
            v.iter().map(|z| z.re).collect(),
            v.iter().map(|z| z.im).collect(),
        ]
    };
    let u1 = slice(0, a1);
    let u2 = slice(a1 + b1, a2);
    let (s1, s2) = (problem.space(Block::Alpha1), problem.space(Block::Alpha2));
    let other: Vec<(usize, usize)> = s2.facets(BoundaryTag::Interface);
    let (mut diff, mut norm) = (0.0, 0.0);
    for (f, c1) in s1.facets(BoundaryTag::Interface) {
        let &(_, c2) = other
            .iter()
            .find(|(g, _)| *g == f)
            .ok_or_else(|| Error::invalid("interface facets do not match"))?;
        for (x, w) in s1.facet_points(f) {
            for part in 0..2 {
                let v1 = s1.evaluate(&u1[part], c1, x)[0];
                let v2 = s2.evaluate(&u2[part], c2, x)[0];
                diff += w * (v1 - v2).powi(2);
                norm += w * v2.powi(2);
            }
        }
    }
    if norm == 0.0 {
        return Ok(diff.sqrt());
    }
    Ok((diff / norm).sqrt())
}
