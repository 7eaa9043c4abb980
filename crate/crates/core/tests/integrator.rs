use num_complex::Complex64;
use painleve::integrator::{detour, estimate_pole, HalfPlane, OdeSystem};
use painleve::*;
use proptest::prelude::*;

/// `y'' = 6y²`, solved by `(t − t₀)⁻²`.
#[derive(Clone, Copy)]
struct DoublePole;

impl OdeSystem for DoublePole {
    fn ode_order(&self) -> usize {
        2
    }
    fn pole_order(&self) -> Option<u32> {
        Some(2)
    }
    fn rhs<T: Real>(&self, _t: num_complex::Complex<T>, y: num_complex::Complex<T>) -> num_complex::Complex<T> {
        y * y * T::lit(6.0)
    }
}

/// `y'' = 2y³`, solved by `(t − t₀)⁻¹`.
#[derive(Clone, Copy)]
struct SimplePole;

impl OdeSystem for SimplePole {
    fn ode_order(&self) -> usize {
        2
    }
    fn pole_order(&self) -> Option<u32> {
        Some(1)
    }
    fn rhs<T: Real>(&self, _t: num_complex::Complex<T>, y: num_complex::Complex<T>) -> num_complex::Complex<T> {
        y * y * y * T::lit(2.0)
    }
}

fn exact(order: u32, t: f64, t0: f64) -> State64 {
    let tau = t - t0;
    let (y, yp) = match order {
        2 => (tau.powi(-2), -2.0 * tau.powi(-3)),
        _ => (1.0 / tau, -1.0 / (tau * tau)),
    };
    State {
        t: Complex64::new(t, 0.0),
        y: Complex64::new(y, 0.0),
        yp: Complex64::new(yp, 0.0),
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn exit_error<S: OdeSystem>(system: &S, order: u32, t0: f64, r: f64, side: f64, cfg: &IntegrationConfig64) -> f64 {
    let entry = exact(order, t0 + side * r, t0);
    let exit = detour(system, &entry, Complex64::new(t0, 0.0), r, cfg).unwrap();
    let truth = exact(order, t0 - side * r, t0);
    assert_eq!(exit.t.re, truth.t.re);
    rel(exit.y, truth.y).max(rel(exit.yp, truth.yp) * r.powi(order as i32 + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn halving_the_detour_radius_keeps_the_exit_on_the_solution(
        t0 in -30.0f64..30.0,
        r in 0.1f64..0.5,
        negative in any::<bool>(),
        lower in any::<bool>(),
    ) {
        let mut cfg = IntegrationConfig64::default();
        if lower {
            cfg.half_plane = HalfPlane::Lower;
        }
        let side = if negative { 1.0 } else { -1.0 };
        let bound = 10.0 * cfg.rel_tol;
        for radius in [r, r / 2.0] {
            let e2 = exit_error(&DoublePole, 2, t0, radius, side, &cfg);
            let e1 = exit_error(&SimplePole, 1, t0, radius, side, &cfg);
            prop_assert!(e2 < bound, "double pole, r = {radius}: {e2:e}");
            prop_assert!(e1 < bound, "simple pole, r = {radius}: {e1:e}");
        }
    }

    #[test]
    fn pole_estimator_recovers_pure_laurent_data(t0 in -50.0f64..50.0, tau in 1e-3f64..0.5, left in any::<bool>()) {
        let cfg = IntegrationConfig64::default();
        let t = if left { t0 - tau } else { t0 + tau };
        for (eq, order) in [(Equation::PainleveI, 2), (Equation::PainleveII, 1)] {
            let est = estimate_pole(&eq, &exact(order, t, t0), &cfg).unwrap();
            prop_assert!((est.re - t0).abs() <= 4.0 * f64::EPSILON * (t0.abs() + 1.0), "{} vs {t0}", est.re);
            prop_assert_eq!(est.im, 0.0);
        }
    }

    #[test]
    fn painleve_ii_solutions_are_odd(y0 in -1.5f64..1.5, b in -2.0f64..2.0) {
        let cfg = IntegrationConfig64::default().with_horizon(-6.0);
        let eq = Equation::PainleveII;
        let a = integrate(&eq, InitialData::new(y0, b), Direction::NegativeT, &cfg).unwrap();
        let m = integrate(&eq, InitialData::new(-y0, -b), Direction::NegativeT, &cfg).unwrap();
        prop_assert_eq!(a.samples.len(), m.samples.len());
        for (p, q) in a.samples.iter().zip(&m.samples) {
            prop_assert_eq!(p.t, q.t);
            prop_assert_eq!(p.y, -q.y);
        }
    }
}

fn trajectory(eq: Equation, init: InitialData64, dir: Direction, horizon: f64, cfg: IntegrationConfig64) -> Trajectory64 {
    integrate(&eq, init, dir, &cfg.with_horizon(horizon)).unwrap()
}

#[test]
fn detours_in_either_half_plane_are_conjugate() {
    let cases = [
        (Equation::PainleveI, InitialData::new(0.0, 3.5), Direction::NegativeT, -8.0),
        (Equation::PainleveII, InitialData::new(0.0, 4.0), Direction::NegativeT, -12.0),
        (Equation::PainleveII, InitialData::new(2.0, 0.0), Direction::PositiveT, 6.0),
    ];
    for (eq, init, dir, h) in cases {
        let upper = trajectory(eq, init, dir, h, IntegrationConfig::default());
        let lower_cfg = IntegrationConfig {
            half_plane: HalfPlane::Lower,
            ..Default::default()
        };
        let lower = trajectory(eq, init, dir, h, lower_cfg);
        assert!(upper.pole_count() > 0);
        assert_eq!(upper.samples.len(), lower.samples.len());
        for (u, l) in upper.samples.iter().zip(&lower.samples) {
            assert_eq!(u.t, l.t.conj());
            assert!((u.y - l.y.conj()).norm() <= 1e-12 * u.y.norm().max(1.0));
        }
        assert!(upper.samples.iter().any(|s| s.t.im > 0.0));
        assert!(lower.samples.iter().all(|s| s.t.im <= 0.0));
    }
}

#[test]
fn integration_is_deterministic() {
    let cfg = IntegrationConfig::default();
    let a = trajectory(Equation::PainleveI, InitialData::new(0.0, 6.2), Direction::NegativeT, -30.0, cfg);
    let b = trajectory(Equation::PainleveI, InitialData::new(0.0, 6.2), Direction::NegativeT, -30.0, cfg);
    assert_eq!(a, b);
}

#[test]
fn tightening_the_tolerance_converges() {
    // horizons sit between poles so the last step lands on the real axis
    for (eq, init, h) in [
        (Equation::PainleveI, InitialData::new(0.0, 3.5), -6.0),
        (Equation::PainleveII, InitialData::new(0.0, 4.0), -4.3),
    ] {
        let at = |rt: f64| {
            let mut cfg = IntegrationConfig::default().with_rel_tol(rt);
            cfg.abs_tol = rt * 1e-2;
            let traj = trajectory(eq, init, Direction::NegativeT, h, cfg);
            assert!(traj.pole_count() > 0);
            assert_eq!(traj.terminal_t, h);
            traj.last_real().y.re
        };
        let (coarse, mid, fine) = (at(1e-7), at(1e-9), at(1e-12));
        let (e_coarse, e_mid) = ((coarse - fine).abs(), (mid - fine).abs());
        assert!(e_mid < e_coarse, "{eq}: {e_mid:e} vs {e_coarse:e}");
        assert!(e_mid < 1e-7 * fine.abs().max(1.0), "{eq}: {e_mid:e}");
    }
}

#[test]
fn detour_radius_does_not_move_the_solution() {
    let base = IntegrationConfig::default();
    for (eq, init, h, trigger) in [
        (Equation::PainleveI, InitialData::new(0.0, 3.5), -6.0, 12.0),
        (Equation::PainleveII, InitialData::new(0.0, 4.0), -4.3, 6.0),
    ] {
        let wide = trajectory(eq, init, Direction::NegativeT, h, base);
        let narrow_cfg = IntegrationConfig {
            pole_trigger: trigger,
            ..base
        };
        let narrow = trajectory(eq, init, Direction::NegativeT, h, narrow_cfg);
        let (rw, rn) = (wide.poles[0].detour_radius, narrow.poles[0].detour_radius);
        assert!(rn < 0.6 * rw, "{rn} vs {rw}");
        assert_eq!(wide.pole_count(), narrow.pole_count());
        for (p, q) in wide.poles.iter().zip(&narrow.poles) {
            assert!((p.location - q.location).abs() < 0.05);
        }
        assert_eq!(wide.terminal_t, narrow.terminal_t);
        let (a, b) = (wide.last_real().y.re, narrow.last_real().y.re);
        assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{eq}: {a} vs {b}");
    }
}

#[test]
fn horizon_is_reached_exactly_or_just_past_a_pole() {
    for h in [-3.0, -6.0, -9.7, -20.0] {
        let traj = trajectory(Equation::PainleveI, InitialData::new(0.0, 4.0), Direction::NegativeT, h, IntegrationConfig::default());
        assert!(traj.reached_horizon());
        assert!(traj.terminal_t <= h);
        if traj.terminal_t < h {
            let last = traj.poles.last().unwrap();
            assert!((last.location - h).abs() <= last.detour_radius);
        }
    }
}

#[test]
fn toy_model_runs_on_the_real_axis() {
    let traj = integrate(&Equation::ToyModel, InitialData::new(0.25, 0.0), Direction::PositiveT, &IntegrationConfig::default()).unwrap();
    assert!(traj.reached_horizon());
    assert_eq!(traj.pole_count(), 0);
    assert!(traj.samples.iter().all(|s| s.on_axis()));
    // after its last maximum the solution decays like 1/(2t)
    let end = traj.last_real();
    let ty: f64 = end.y.re * end.t.re;
    assert!((ty - 0.5).abs() < 0.05, "t y = {ty}");
}

#[test]
fn single_precision_trajectory() {
    let cfg = IntegrationConfig::<f32> {
        rel_tol: 1e-5,
        abs_tol: 1e-7,
        min_step: 1e-6,
        purity_tol: 1e-3,
        ..Default::default()
    };
    let t32 = integrate(&Equation::PainleveI, InitialData::new(0.0f32, 3.5), Direction::NegativeT, &cfg.with_horizon(-6.0)).unwrap();
    let t64 = trajectory(Equation::PainleveI, InitialData::new(0.0, 3.5), Direction::NegativeT, -6.0, IntegrationConfig::default());
    assert_eq!(t32.pole_count(), t64.pole_count());
    assert!((t32.poles[0].location as f64 - t64.poles[0].location).abs() < 1e-3);
}
