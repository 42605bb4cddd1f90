use phdd::diagnostics::{cumulative_trapezoid, PowerResiduals};
use phdd::error::Error;
use phdd::mesh::BoundaryTag;
use phdd::models::{BeamConfig, Block, Problem, WaveConfig};
use phdd::timeint::{coupling_step_limit, simulate_staggered, Bootstrap, Inputs, RunOptions};

fn free_end_velocity(p: &Problem, e2: &[f64]) -> f64 {
    let s = p.space(Block::Alpha2);
    let (_, c) = s.facets(BoundaryTag::Gamma2)[0];
    s.evaluate(&e2[..s.ndofs()], c, [0.0, 0.0])[0]
}

fn free_end_errors(cfg: &BeamConfig) -> (f64, f64, f64) {
    let p = Problem::beam(&cfg, 1.0).unwrap();
    let (e1, e2) = p.initial_state(0.0);
    let opts = RunOptions {
        dt: cfg.dt,
        t_end: cfg.t_end,
        bootstrap: Bootstrap::HalfStep,
        stride: 1,
    };
    let tr = simulate_staggered(p.system(), opts, &p.inputs(), e1, e2).unwrap();
    let v: Vec<f64> = tr.e2.iter().map(|e| free_end_velocity(&p, e)).collect();
    let mut vel_err: f64 = 0.0;
    for (t, v) in tr.t2.iter().zip(&v) {
        vel_err = vel_err.max((v - cfg.omega * (cfg.omega * t).cos()).abs());
    }
    let w = cumulative_trapezoid(&tr.t2, &v, (cfg.omega * tr.t2[0]).sin()).unwrap();
    let mut disp_err: f64 = 0.0;
    for (t, w) in tr.t2.iter().zip(&w) {
        disp_err = disp_err.max((w - (cfg.omega * t).sin()).abs());
    }
    (
        vel_err,
        disp_err,
        PowerResiduals::from_trajectory(&tr).max_abs(),
    )
}

#[test]
fn beam_tracks_exact_free_end_motion() {
    let cfg = BeamConfig::default();
    let (vel, disp, res) = free_end_errors(&cfg);
    assert!(vel < 0.1 * cfg.omega, "{vel}");
    assert!(disp < 0.01, "{disp}");
    assert!(res <= 1e-10, "{res}");
    let fine = BeamConfig {
        n1: 6,
        n2: 6,
        dt: 2.5e-5,
        ..cfg
    };
    let (vel_fine, disp_fine, _) = free_end_errors(&fine);
    assert!(vel_fine < 0.5 * vel, "{vel_fine}");
    assert!(disp_fine < disp);
}

#[test]
fn zero_data_gives_zero_residuals() {
    let p = Problem::wave(
        &WaveConfig {
            n: 3,
            ..WaveConfig::default()
        },
        1.0,
    )
    .unwrap();
    let sys = p.system();
    let opts = RunOptions {
        dt: 0.01,
        t_end: 0.2,
        bootstrap: Bootstrap::FullStep,
        stride: 1,
    };
    let tr = simulate_staggered(
        sys,
        opts,
        &Inputs::for_system(sys),
        vec![0.0; sys.sub1().dim()],
        vec![0.0; sys.sub2().dim()],
    )
    .unwrap();
    let res = PowerResiduals::from_trajectory(&tr);
    assert_eq!(res.len(), 20);
    assert_eq!(res.max_abs(), 0.0);
    assert!(res.omega2[0].is_none());
}

#[test]
fn step_above_coupling_limit_diverges() {
    let p = Problem::beam(&BeamConfig::default(), 1.0).unwrap();
    let limit = coupling_step_limit(p.system()).unwrap();
    let (e1, e2) = p.initial_state(0.0);
    let opts = RunOptions {
        dt: 3.0 * limit,
        t_end: 3.0 * limit * 5000.0,
        bootstrap: Bootstrap::FullStep,
        stride: 0,
    };
    let err = simulate_staggered(p.system(), opts, &p.inputs(), e1, e2).unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }), "{err:?}");
}

#[test]
fn both_coupling_signs_balance_power_per_subsystem() {
    for sigma in [1.0, -1.0] {
        let p = Problem::wave(
            &WaveConfig {
                n: 4,
                ..WaveConfig::default()
            },
            sigma,
        )
        .unwrap();
        let (e1, e2) = p.initial_state(0.0);
        let opts = RunOptions {
            dt: 0.01,
            t_end: 0.5,
            bootstrap: Bootstrap::FullStep,
            stride: 0,
        };
        let tr = simulate_staggered(p.system(), opts, &p.inputs(), e1, e2).unwrap();
        assert!(PowerResiduals::from_trajectory(&tr).max_abs() <= 1e-10);
    }
}

#[test]
fn half_step_start_is_more_accurate() {
    let cfg = WaveConfig {
        n: 4,
        k: 2,
        dt: 0.02,
        t_end: 0.5,
    };
    let p = Problem::wave(&cfg, 1.0).unwrap();
    let err = |b| phdd::diagnostics::final_errors(&p, cfg.dt, cfg.t_end, b).unwrap()[2];
    assert!(err(Bootstrap::HalfStep) < err(Bootstrap::FullStep));
}
