//! Implicit midpoint stepping: the staggered two-subdomain scheme and the
//! monolithic reference integrator.

use crate::error::{Error, Result};
use crate::linalg::{dot, CsrMatrix, LuFactorization};
use crate::phcore::{hamiltonian, CoupledSystem};

/// How the half-step state of Ω₂ is started from t = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Bootstrap {
    /// One explicit Euler step of length Δt.
    #[default]
    FullStep,
    /// One explicit Euler step of length Δt/2, landing on t = Δt/2.
    HalfStep,
}

/// Cached `(M - Δt/2 J)` factorization and `(M + Δt/2 J)` for one system.
#[derive(Clone, Debug)]
pub struct MidpointStepper {
    dt: f64,
    lhs: LuFactorization,
    rhs: CsrMatrix,
}

impl MidpointStepper {
    pub fn new(m: &CsrMatrix, j: &CsrMatrix, dt: f64) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::invalid(format!(
                "time step {dt} must be finite and nonzero"
            )));
        }
        let lhs = LuFactorization::new(&m.add_scaled(1.0, j, -0.5 * dt)?)?;
        let rhs = m.add_scaled(1.0, j, 0.5 * dt)?;
        Ok(MidpointStepper { dt, lhs, rhs })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Solves `(M - Δt/2 J) e⁺ = (M + Δt/2 J) e + Δt f`.
    pub fn step(&self, e: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.rhs.spmv(e)?;
        for (ri, fi) in r.iter_mut().zip(f) {
            *ri += self.dt * fi;
        }
        self.lhs.solve_in_place(&mut r)?;
        Ok(r)
    }
}

/// Boundary input coefficients as functions of time.
pub struct Inputs<'a> {
    pub u1: Box<dyn Fn(f64) -> Vec<f64> + 'a>,
    pub u2: Box<dyn Fn(f64) -> Vec<f64> + 'a>,
}

impl<'a> Inputs<'a> {
    pub fn zero(n1: usize, n2: usize) -> Self {
        Inputs {
            u1: Box::new(move |_| vec![0.0; n1]),
            u2: Box::new(move |_| vec![0.0; n2]),
        }
    }

    pub fn for_system(sys: &CoupledSystem) -> Self {
        Inputs::zero(sys.sub1().n_inputs(), sys.sub2().n_inputs())
    }
}

#[derive(Clone, Debug)]
pub struct StaggeredState {
    /// Ω₁ state at `t1()`.
    pub e1: Vec<f64>,
    /// Ω₂ state at `t2()`.
    pub e2: Vec<f64>,
    /// Completed macro-steps.
    pub n: usize,
    pub dt: f64,
}

impl StaggeredState {
    pub fn t1(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// The bootstrap result and the state after the first step both sit
    /// at `t_{1/2}`.
    pub fn t2(&self) -> f64 {
        (self.n.max(1) as f64 - 0.5) * self.dt
    }
}

/// Power-balance terms of one midpoint step of one subsystem.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PowerTerms {
    /// `(H⁺ - H)/Δt`
    pub dh: f64,
    /// `ē ᵀ B_ext u_ext`
    pub p_ext: f64,
    /// `ē ᵀ B_int u_int`
    pub p_int: f64,
}

impl PowerTerms {
    pub fn residual(&self) -> f64 {
        self.dh - self.p_ext - self.p_int
    }
}

fn power_terms(
    m: &CsrMatrix,
    b_ext: &CsrMatrix,
    e0: &[f64],
    e1: &[f64],
    u: &[f64],
    f_int: &[f64],
    dt: f64,
) -> Result<PowerTerms> {
    let mid: Vec<f64> = e0.iter().zip(e1).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(PowerTerms {
        dh: (hamiltonian(m, e1) - hamiltonian(m, e0)) / dt,
        p_ext: dot(&mid, &b_ext.spmv(u)?),
        p_int: dot(&mid, f_int),
    })
}

/// Staggered scheme: Ω₁ advances on integer times, Ω₂ on half-integer
/// times, each by implicit midpoint with the other side's latest state as
/// explicit interface input.
#[derive(Clone, Debug)]
pub struct StaggeredIntegrator<'s> {
    sys: &'s CoupledSystem,
    s1: MidpointStepper,
    s2: MidpointStepper,
    m2: LuFactorization,
    bootstrap: Bootstrap,
}

/// What one staggered step produced.
#[derive(Clone, Debug)]
pub struct StepReport {
    /// Ω₁ balance over `[t_n, t_{n+1}]`.
    pub power1: PowerTerms,
    /// Ω₂ balance over `[t_{n-1/2}, t_{n+1/2}]`; absent on the first step,
    /// where Ω₂ was started by the explicit bootstrap.
    pub power2: Option<PowerTerms>,
}

impl<'s> StaggeredIntegrator<'s> {
    pub fn new(sys: &'s CoupledSystem, dt: f64, bootstrap: Bootstrap) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("time step {dt} must be positive")));
        }
        Ok(StaggeredIntegrator {
            sys,
            s1: MidpointStepper::new(sys.sub1().m(), sys.sub1().j(), dt)?,
            s2: MidpointStepper::new(sys.sub2().m(), sys.sub2().j(), dt)?,
            m2: LuFactorization::new(sys.sub2().m())?,
            bootstrap,
        })
    }

    pub fn dt(&self) -> f64 {
        self.s1.dt
    }

    /// Explicit Euler start of Ω₂:
    /// `M₂ e₂^{1/2} = (M₂ + τ J₂) e₂⁰ + τ (G₂₁ e₁⁰ + B₂ u₂(0))`.
    pub fn start(&self, e1: Vec<f64>, e2: Vec<f64>, inputs: &Inputs) -> Result<StaggeredState> {
        let sub2 = self.sys.sub2();
        if e1.len() != self.sys.sub1().dim() || e2.len() != sub2.dim() {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: self.sys.dim(),
                got: e1.len() + e2.len(),
            });
        }
        let tau = match self.bootstrap {
            Bootstrap::FullStep => self.dt(),
            Bootstrap::HalfStep => 0.5 * self.dt(),
        };
        let mut r = sub2.m().spmv(&e2)?;
        sub2.j().spmv_add(tau, &e2, &mut r)?;
        self.sys.g21().spmv_add(tau, &e1, &mut r)?;
        sub2.b_ext().spmv_add(tau, &(inputs.u2)(0.0), &mut r)?;
        self.m2.solve_in_place(&mut r)?;
        finite(&r, 0)?;
        Ok(StaggeredState {
            e1,
            e2: r,
            n: 0,
            dt: self.dt(),
        })
    }

    /// Advances Ω₂ to `t_{n+1/2}` (except on the first step) and then Ω₁
    /// to `t_{n+1}`.
    pub fn step(&self, state: &mut StaggeredState, inputs: &Inputs) -> Result<StepReport> {
        let dt = self.dt();
        let n = state.n;
        let (sub1, sub2) = (self.sys.sub1(), self.sys.sub2());
        let power2 = if n > 0 {
            let t = n as f64 * dt;
            let u2 = (inputs.u2)(t);
            let f_int = self.sys.g21().spmv(&state.e1)?;
            let mut f = sub2.b_ext().spmv(&u2)?;
            for (a, b) in f.iter_mut().zip(&f_int) {
                *a += b;
            }
            let e2 = self.s2.step(&state.e2, &f)?;
            finite(&e2, n)?;
            let p = power_terms(sub2.m(), sub2.b_ext(), &state.e2, &e2, &u2, &f_int, dt)?;
            state.e2 = e2;
            Some(p)
        } else {
            None
        };
        let u1 = (inputs.u1)((n as f64 + 0.5) * dt);
        let f_int = self.sys.g12().spmv(&state.e2)?;
        let mut f = sub1.b_ext().spmv(&u1)?;
        for (a, b) in f.iter_mut().zip(&f_int) {
            *a += b;
        }
        let e1 = self.s1.step(&state.e1, &f)?;
        finite(&e1, n)?;
        let power1 = power_terms(sub1.m(), sub1.b_ext(), &state.e1, &e1, &u1, &f_int, dt)?;
        state.e1 = e1;
        state.n += 1;
        Ok(StepReport { power1, power2 })
    }
}

fn finite(e: &[f64], step: usize) -> Result<()> {
    if e.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}

/// Largest stable macro step of the staggered scheme, `2/γ` with
/// `γ = ‖M₁^{-1/2} G₁₂ M₂^{-1/2}‖₂`. Only the interface rows and columns of
/// `G₁₂` are nonzero, so `γ²` is the top eigenvalue of a small dense matrix.
/// Returns infinity for uncoupled systems.
pub fn coupling_step_limit(sys: &CoupledSystem) -> Result<f64> {
    let g = sys.g12();
    let mut rows: Vec<usize> = Vec::new();
    let mut cols: Vec<usize> = Vec::new();
    let trips = g.triplets();
    for &(i, j, v) in &trips {
        if v != 0.0 {
            rows.push(i);
            cols.push(j);
        }
    }
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    if rows.is_empty() {
        return Ok(f64::INFINITY);
    }
    let inverse_block = |m: &CsrMatrix, idx: &[usize]| -> Result<nalgebra::DMatrix<f64>> {
        let lu = LuFactorization::new(m)?;
        let mut out = nalgebra::DMatrix::zeros(idx.len(), idx.len());
        for (b, &c) in idx.iter().enumerate() {
            let mut e = vec![0.0; m.nrows()];
            e[c] = 1.0;
            lu.solve_in_place(&mut e)?;
            for (a, &r) in idx.iter().enumerate() {
                out[(a, b)] = e[r];
            }
        }
        Ok(out)
    };
    let m1 = inverse_block(sys.sub1().m(), &rows)?;
    let m2 = inverse_block(sys.sub2().m(), &cols)?;
    let mut gs = nalgebra::DMatrix::zeros(rows.len(), cols.len());
    for (i, j, v) in trips {
        let a = rows.binary_search(&i);
        let b = cols.binary_search(&j);
        if let (Ok(a), Ok(b)) = (a, b) {
            gs[(a, b)] += v;
        }
    }
    // (M₁⁻¹)_RR = C Cᵀ, so the spectrum of C Cᵀ G M₂⁻¹ Gᵀ is that of Cᵀ G M₂⁻¹ Gᵀ C
    let c1 = m1.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    let k = c1.transpose() * &gs * m2 * gs.transpose() * c1;
    let k = (&k + k.transpose()) * 0.5;
    let top = k.symmetric_eigenvalues().max();
    if top <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / top.sqrt())
}

/// Number of whole steps of `dt` in `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::invalid(format!(
            "need dt > 0 and t_end >= 0, got {dt}, {t_end}"
        )));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-12 * t_end.max(1.0) {
        return Err(Error::invalid(format!(
            "t_end {t_end} is not a multiple of dt {dt}"
        )));
    }
    Ok(n as usize)
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    /// Sample times of `e1` (integer steps).
    pub t1: Vec<f64>,
    /// Sample times of `e2` (half steps).
    pub t2: Vec<f64>,
    pub e1: Vec<Vec<f64>>,
    pub e2: Vec<Vec<f64>>,
    /// `H₁` at `t1`, `H₂` at `t2`, over every step.
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub y1_ext: Vec<Vec<f64>>,
    pub y2_ext: Vec<Vec<f64>>,
    pub power1: Vec<PowerTerms>,
    pub power2: Vec<Option<PowerTerms>>,
    pub final_state: Option<StaggeredState>,
}

/// Options for [`simulate_staggered`].
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub dt: f64,
    pub t_end: f64,
    pub bootstrap: Bootstrap,
    /// Keep every `stride`-th state (0 keeps none).
    pub stride: usize,
}

/// Runs the staggered scheme to `t_end`. Ω₁ samples sit at `t_n`, Ω₂
/// samples at `t_{n+1/2}` (the first Ω₂ sample is the bootstrap result).
pub fn simulate_staggered(
    sys: &CoupledSystem,
    opts: RunOptions,
    inputs: &Inputs,
    e1: Vec<f64>,
    e2: Vec<f64>,
) -> Result<Trajectory> {
    let steps = step_count(opts.t_end, opts.dt)?;
    let integ = StaggeredIntegrator::new(sys, opts.dt, opts.bootstrap)?;
    let mut tr = Trajectory::default();
    let (sub1, sub2) = (sys.sub1(), sys.sub2());
    let record1 = |tr: &mut Trajectory, st: &StaggeredState, keep: bool| -> Result<()> {
        tr.h1.push(sub1.hamiltonian(&st.e1));
        tr.y1_ext.push(sub1.output_ext(&st.e1)?);
        if keep {
            tr.t1.push(st.t1());
            tr.e1.push(st.e1.clone());
        }
        Ok(())
    };
    let record2 = |tr: &mut Trajectory, st: &StaggeredState, keep: bool| -> Result<()> {
        tr.h2.push(sub2.hamiltonian(&st.e2));
        tr.y2_ext.push(sub2.output_ext(&st.e2)?);
        if keep {
            tr.t2.push(st.t2());
            tr.e2.push(st.e2.clone());
        }
        Ok(())
    };
    let keep = |k: usize| opts.stride > 0 && (k % opts.stride == 0);
    if steps == 0 {
        let st = StaggeredState {
            e1,
            e2,
            n: 0,
            dt: opts.dt,
        };
        record1(&mut tr, &st, opts.stride > 0)?;
        tr.final_state = Some(st);
        return Ok(tr);
    }
    let mut st = integ.start(e1, e2, inputs)?;
    record1(&mut tr, &st, keep(0))?;
    for k in 0..steps {
        let rep = integ.step(&mut st, inputs)?;
        if let Some(p) = rep.power2 {
            tr.power2.push(Some(p));
        } else {
            tr.power2.push(None);
        }
        // Ω₂ now sits at t_{k+1/2}
        record2(&mut tr, &st, keep(k))?;
        tr.power1.push(rep.power1);
        record1(&mut tr, &st, keep(k + 1) || k + 1 == steps)?;
    }
    tr.final_state = Some(st);
    Ok(tr)
}

/// Result of the monolithic midpoint run.
#[derive(Clone, Debug, Default)]
pub struct MonolithicTrajectory {
    pub t: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub power: Vec<PowerTerms>,
    pub final_state: Vec<f64>,
}

/// Implicit midpoint on the full coupled system, inputs sampled at
/// `t_{n+1/2}`.
pub fn simulate_monolithic_midpoint(
    sys: &CoupledSystem,
    dt: f64,
    t_end: f64,
    inputs: &Inputs,
    e0: Vec<f64>,
    stride: usize,
) -> Result<MonolithicTrajectory> {
    let steps = step_count(t_end, dt)?;
    let stepper = MidpointStepper::new(sys.m(), sys.j(), dt)?;
    let mut out = MonolithicTrajectory::default();
    let mut e = e0;
    out.h.push(hamiltonian(sys.m(), &e));
    if stride > 0 {
        out.t.push(0.0);
        out.e.push(e.clone());
    }
    for n in 0..steps {
        let t = (n as f64 + 0.5) * dt;
        let mut u = (inputs.u1)(t);
        u.extend((inputs.u2)(t));
        let f = sys.b().spmv(&u)?;
        let next = stepper.step(&e, &f)?;
        finite(&next, n)?;
        out.power.push(power_terms(
            sys.m(),
            sys.b(),
            &e,
            &next,
            &u,
            &vec![0.0; e.len()],
            dt,
        )?);
        e = next;
        out.h.push(hamiltonian(sys.m(), &e));
        if stride > 0 && ((n + 1) % stride == 0 || n + 1 == steps) {
            out.t.push((n + 1) as f64 * dt);
            out.e.push(e.clone());
        }
    }
    out.final_state = e;
    Ok(out)
}
