//! Adaptive Runge-Kutta integration along the real `t` axis with
//! semicircular detours into the complex plane around movable poles.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with a PI step-size
//! controller, run over a parameterised path `t(s)` so the same code serves
//! both the real segments and the arcs. Because the solutions of P-I and
//! P-II are meromorphic, the value reached at the far side of a detour does
//! not depend on the arc taken, only on the arc avoiding the poles.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Equation, InitialData, State};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A scalar ODE of first or second order in the complex plane.
pub trait OdeSystem: Copy {
    /// 1 for `y' = f(t, y)`, 2 for `y'' = f(t, y)`.
    fn ode_order(&self) -> usize;

    /// Order of the movable poles used by the pole estimator.
    fn pole_order(&self) -> Option<u32>;

    fn rhs<T: Real>(&self, t: Complex<T>, y: Complex<T>) -> Complex<T>;

    fn supports(&self, _direction: Direction) -> bool {
        true
    }

    /// Natural size of regular solutions near `t`; the pole trigger is
    /// measured in these units.
    fn magnitude_scale<T: Real>(&self, _t: T) -> T {
        T::one()
    }

    fn default_horizon(&self, direction: Direction) -> f64 {
        match direction {
            Direction::NegativeT => -60.0,
            Direction::PositiveT => 30.0,
        }
    }
}

impl OdeSystem for Equation {
    fn ode_order(&self) -> usize {
        Equation::ode_order(*self)
    }

    fn pole_order(&self) -> Option<u32> {
        Equation::pole_order(*self)
    }

    #[inline]
    fn rhs<T: Real>(&self, t: Complex<T>, y: Complex<T>) -> Complex<T> {
        Equation::rhs(*self, t, y)
    }

    fn supports(&self, direction: Direction) -> bool {
        matches!(
            (self, direction),
            (Equation::PainleveI, Direction::NegativeT)
                | (Equation::PainleveII, _)
                | (Equation::ToyModel, Direction::PositiveT)
        )
    }

    fn magnitude_scale<T: Real>(&self, t: T) -> T {
        match self {
            // |y| = 1/τ², so the trigger fires at τ ≈ 0.4 σ^(-1/2)
            Equation::PainleveI => T::lit(2.0) * (t.abs() / T::lit(6.0)).max(T::one()).sqrt(),
            // |y| = 1/τ, so the trigger fires at τ ≈ 0.33 / σ
            Equation::PainleveII => (t.abs() / T::lit(2.0)).max(T::one()).sqrt(),
            Equation::ToyModel => T::one(),
        }
    }

    fn default_horizon(&self, direction: Direction) -> f64 {
        match (self, direction) {
            (_, Direction::NegativeT) => -60.0,
            (Equation::ToyModel, Direction::PositiveT) => 50.0,
            (_, Direction::PositiveT) => 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    NegativeT,
    PositiveT,
}

impl Direction {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::NegativeT => -T::one(),
            Direction::PositiveT => T::one(),
        }
    }
}

/// Half of the complex plane the detour arcs are drawn in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfPlane {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// `|y|` at which a pole detour is triggered.
    pub pole_trigger: T,
    /// Largest imaginary part, relative to `max(1, |y|)`, tolerated when
    /// returning to the real axis.
    pub purity_tol: T,
    /// End of the integration; `None` selects the per-equation default.
    pub t_horizon: Option<T>,
    pub max_poles: usize,
    pub min_step: T,
    pub min_radius: T,
    pub max_radius: T,
    pub half_plane: HalfPlane,
}

impl<T: Real> Default for IntegrationConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            pole_trigger: T::lit(3.0),
            purity_tol: T::lit(1e-6),
            t_horizon: None,
            max_poles: 200,
            min_step: T::lit(1e-12),
            min_radius: T::lit(1e-3),
            max_radius: T::lit(0.5),
            half_plane: HalfPlane::Upper,
        }
    }
}

impl<T: Real> IntegrationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("purity_tol", self.purity_tol),
            ("min_step", self.min_step),
            ("min_radius", self.min_radius),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pole_trigger > T::one()) {
            return Err(Error::InvalidArgument(format!(
                "pole_trigger must exceed 1, got {}",
                self.pole_trigger
            )));
        }
        if !(self.max_radius >= self.min_radius) {
            return Err(Error::InvalidArgument("max_radius below min_radius".into()));
        }
        Ok(())
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.t_horizon = Some(horizon);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn horizon_for<S: OdeSystem>(&self, system: &S, direction: Direction) -> T {
        self.t_horizon
            .unwrap_or_else(|| T::lit(system.default_horizon(direction)))
    }
}

/// A pole crossed by a detour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleEvent<T> {
    /// Real part of the estimated pole position.
    pub location: T,
    pub order: u32,
    pub detour_radius: T,
}

/// Why the integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    Horizon,
    PoleCap,
    StepUnderflow,
}

/// Solution path from `t = 0` to the terminal point. Samples include the
/// complex points visited on detours; real-axis samples have `Im t == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub direction: Direction,
    pub samples: Vec<State<T>>,
    pub poles: Vec<PoleEvent<T>>,
    pub terminal_t: T,
    pub horizon: T,
    pub termination: Termination,
}

impl<T: Real> Trajectory<T> {
    pub fn real_samples(&self) -> impl Iterator<Item = &State<T>> + '_ {
        self.samples.iter().filter(|s| s.on_axis())
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn reached_horizon(&self) -> bool {
        self.termination == Termination::Horizon
    }

    pub fn last_real(&self) -> &State<T> {
        self.real_samples()
            .last()
            .expect("trajectory always holds its initial sample")
    }

    /// Fails with the truncation cause unless the horizon was reached.
    pub fn require_horizon(&self) -> Result<&Self> {
        match self.termination {
            Termination::Horizon => Ok(self),
            cause => Err(Error::HorizonUnreached {
                horizon: self.horizon.to_f64().unwrap_or(f64::NAN),
                cause: format!("{cause:?} at t = {}", self.terminal_t),
            }),
        }
    }
}

/// Pole position `t₀ = t + p·y/y'` from the leading Laurent term
/// `y ~ (t − t₀)^(−p)`. Exact when `y` is a pure pole of order `p`.
pub fn estimate_pole<S: OdeSystem, T: Real>(
    system: &S,
    state: &State<T>,
    cfg: &IntegrationConfig<T>,
) -> Result<Complex<T>> {
    let order = system.pole_order().ok_or(Error::UnsupportedEquation {
        operation: "estimate_pole",
        equation: "an equation without movable poles",
    })?;
    if state.yp.norm() < cfg.min_step * state.y.norm() || state.yp.norm() == T::zero() {
        return Err(Error::DegenerateDerivative {
            t: state.t.re.to_f64().unwrap_or(f64::NAN),
        });
    }
    let p = T::from_u32(order).expect("small integer");
    Ok(state.t + state.y / state.yp * p)
}

/// Integrates along the half circle of the given radius around `t0`,
/// starting from the real-axis state `entry`, and returns the state at the
/// real-axis exit point on the far side. The side of `t0` the entry lies on
/// fixes the direction of travel.
pub fn detour<S: OdeSystem, T: Real>(
    system: &S,
    entry: &State<T>,
    t0: Complex<T>,
    radius: T,
    cfg: &IntegrationConfig<T>,
) -> Result<State<T>> {
    cfg.validate()?;
    let offset = entry.t.re - t0.re;
    let slack = T::lit(1e-9) * (T::one() + radius);
    if (offset.abs() - radius).abs() > slack {
        return Err(Error::InvalidArgument(format!(
            "detour entry at distance {} from the pole, expected radius {radius}",
            offset.abs()
        )));
    }
    let direction = if offset > T::zero() {
        Direction::NegativeT
    } else {
        Direction::PositiveT
    };
    let mut runner = Runner::new(system, cfg);
    let mut samples = Vec::new();
    runner.arc(entry, t0.re, radius, direction, &mut samples)
}

/// Integrates the initial value problem from `t = 0` to the horizon in the
/// given direction, detouring around every pole met on the way.
pub fn integrate<S: OdeSystem, T: Real>(
    system: &S,
    init: InitialData<T>,
    direction: Direction,
    cfg: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    if !system.supports(direction) {
        return Err(Error::InvalidArgument(format!(
            "integration direction {direction:?} not supported for this equation"
        )));
    }
    let horizon = cfg.horizon_for(system, direction);
    let d: T = direction.sign();
    if !((horizon - init.t_start()) * d > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} does not lie in the {direction:?} direction"
        )));
    }

    let mut runner = Runner::new(system, cfg);
    let zero = Complex::new(T::zero(), T::zero());
    let mut u = [Complex::new(init.y0, T::zero()), Complex::new(init.slope0, T::zero())];
    if system.ode_order() == 1 {
        u[1] = zero;
    }
    let mut samples = vec![runner.state_at(Complex::new(init.t_start(), T::zero()), &u)];
    let mut poles: Vec<PoleEvent<T>> = Vec::new();
    let mut t_cur = init.t_start();
    let termination;

    loop {
        let remaining = (horizon - t_cur) * d;
        if remaining <= T::zero() {
            termination = Termination::Horizon;
            break;
        }
        let line = Path::line(t_cur, d);
        match runner.run(&line, remaining, &mut u, &mut samples, true)? {
            Outcome::Completed => {
                // land exactly on the horizon
                if let Some(last) = samples.last_mut() {
                    last.t = Complex::new(horizon, T::zero());
                }
                t_cur = horizon;
                termination = Termination::Horizon;
                break;
            }
            Outcome::Underflow => {
                t_cur = samples.last().map(|s| s.t.re).unwrap_or(t_cur);
                termination = Termination::StepUnderflow;
                break;
            }
            Outcome::Triggered { prev_s, prev_u } => {
                let trig = *samples.last().expect("triggered after an accepted step");
                let t0 = estimate_pole(system, &trig, cfg)?.re;
                let prev_t = t_cur + d * prev_s;
                let dist = (t0 - trig.t.re) * d;
                if dist > cfg.max_radius {
                    // the estimate is only trustworthy close in; keep stepping
                    t_cur = trig.t.re;
                    continue;
                }
                let mut radius = dist.max(cfg.min_radius).min(cfg.max_radius);
                let room = (t0 - prev_t) * d;
                if !(room > T::zero()) {
                    return Err(Error::DegenerateDerivative {
                        t: trig.t.re.to_f64().unwrap_or(f64::NAN),
                    });
                }
                if radius >= room {
                    // the pole sits closer to the last regular sample than the
                    // smallest admissible radius; shrink to fit
                    radius = room * T::lit(0.5);
                }
                let entry = t0 - d * radius;
                if (entry - horizon) * d >= T::zero() {
                    // the pole lies past the horizon: finish on the real axis
                    let seg = Path::line(trig.t.re, d);
                    let rest = (horizon - trig.t.re) * d;
                    if rest > T::zero() {
                        runner.run_exact(&seg, rest, &mut u, &mut samples)?;
                    }
                    if let Some(last) = samples.last_mut() {
                        last.t = Complex::new(horizon, T::zero());
                    }
                    t_cur = horizon;
                    termination = Termination::Horizon;
                    break;
                }
                if (entry - trig.t.re) * d < T::zero() {
                    // overshot the entry point: redo the last step
                    samples.pop();
                    u = prev_u;
                    let seg = Path::line(prev_t, d);
                    runner.run_exact(&seg, (entry - prev_t) * d, &mut u, &mut samples)?;
                } else if (entry - trig.t.re) * d > T::zero() {
                    let seg = Path::line(trig.t.re, d);
                    runner.run_exact(&seg, (entry - trig.t.re) * d, &mut u, &mut samples)?;
                }
                if let Some(last) = samples.last_mut() {
                    last.t = Complex::new(entry, T::zero());
                }
                let entry_state = runner.state_at(Complex::new(entry, T::zero()), &u);
                let exit = runner.arc(&entry_state, t0, radius, direction, &mut samples)?;
                u = [exit.y, exit.yp];
                if system.ode_order() == 1 {
                    u[1] = zero;
                }
                poles.push(PoleEvent {
                    location: t0,
                    order: system.pole_order().unwrap_or(0),
                    detour_radius: radius,
                });
                t_cur = exit.t.re;
                runner.h_line = radius * T::lit(0.1);
                if (t_cur - horizon) * d >= T::zero() {
                    // a detour straddling the horizon ends just past it
                    termination = Termination::Horizon;
                    break;
                }
                if poles.len() >= cfg.max_poles {
                    termination = Termination::PoleCap;
                    break;
                }
            }
        }
    }

    Ok(Trajectory {
        direction,
        samples,
        poles,
        terminal_t: t_cur,
        horizon,
        termination,
    })
}

#[derive(Clone, Copy, Debug)]
enum Path<T> {
    /// `t = start + dir·s`, `dir = ±1`.
    Line { start: T, dir: T },
    /// `t = center + side·r·exp(iσs)`, `s ∈ [0, π]`, with `side, σ = ±1`
    /// so that the two half-planes are exact mirror images.
    Arc {
        center: T,
        radius: T,
        side: T,
        orientation: T,
    },
}

impl<T: Real> Path<T> {
    fn line(start: T, dir: T) -> Self {
        Path::Line { start, dir }
    }

    #[inline]
    fn point(&self, s: T) -> Complex<T> {
        match *self {
            Path::Line { start, dir } => Complex::new(start + dir * s, T::zero()),
            Path::Arc {
                center,
                radius,
                side,
                orientation,
            } => {
                let r = side * radius;
                Complex::new(center + r * s.cos(), r * orientation * s.sin())
            }
        }
    }

    /// `dt/ds`.
    #[inline]
    fn velocity(&self, s: T) -> Complex<T> {
        match *self {
            Path::Line { dir, .. } => Complex::new(dir, T::zero()),
            Path::Arc {
                radius,
                side,
                orientation,
                ..
            } => {
                // i·side·r·σ·e^{iσs}
                let r = side * radius;
                Complex::new(-r * s.sin(), r * orientation * s.cos())
            }
        }
    }
}

enum Outcome<T> {
    Completed,
    Underflow,
    /// `|y|` crossed the pole trigger while growing; carries the state one
    /// accepted step earlier.
    Triggered { prev_s: T, prev_u: [Complex<T>; 2] },
}

type Vec2<T> = [Complex<T>; 2];

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Tableau<T> {
    c: [T; 4],
    a: [[T; 6]; 6],
    e: [T; 7],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let l = T::lit;
        let z = T::zero();
        Self {
            c: [l(C2), l(C3), l(C4), l(C5)],
            a: [
                [l(A21), z, z, z, z, z],
                [l(A31), l(A32), z, z, z, z],
                [l(A41), l(A42), l(A43), z, z, z],
                [l(A51), l(A52), l(A53), l(A54), z, z],
                [l(A61), l(A62), l(A63), l(A64), l(A65), z],
                [l(A71), z, l(A73), l(A74), l(A75), l(A76)],
            ],
            e: [l(E1), z, l(E3), l(E4), l(E5), l(E6), l(E7)],
        }
    }
}

struct Runner<'a, S, T> {
    system: &'a S,
    cfg: &'a IntegrationConfig<T>,
    tab: Tableau<T>,
    h_line: T,
    err_prev: T,
}

impl<'a, S: OdeSystem, T: Real> Runner<'a, S, T> {
    fn new(system: &'a S, cfg: &'a IntegrationConfig<T>) -> Self {
        Self {
            system,
            cfg,
            tab: Tableau::new(),
            h_line: T::lit(1e-3),
            err_prev: T::lit(1e-4),
        }
    }

    #[inline]
    fn field(&self, t: Complex<T>, v: Complex<T>, u: &Vec2<T>) -> Vec2<T> {
        if self.system.ode_order() == 1 {
            [self.system.rhs(t, u[0]) * v, Complex::new(T::zero(), T::zero())]
        } else {
            [u[1] * v, self.system.rhs(t, u[0]) * v]
        }
    }

    fn state_at(&self, t: Complex<T>, u: &Vec2<T>) -> State<T> {
        let yp = if self.system.ode_order() == 1 {
            self.system.rhs(t, u[0])
        } else {
            u[1]
        };
        State { t, y: u[0], yp }
    }

    /// One Dormand-Prince step of size `h` from `s`; returns the new state
    /// and the scaled error norm.
    fn step(&self, path: &Path<T>, s: T, h: T, u: &Vec2<T>) -> (Vec2<T>, T) {
        let tab = &self.tab;
        let n = self.system.ode_order();
        let ev = |sk: T, uk: &Vec2<T>| self.field(path.point(sk), path.velocity(sk), uk);
        let mut k: [Vec2<T>; 7] = [[Complex::new(T::zero(), T::zero()); 2]; 7];
        k[0] = ev(s, u);
        for stage in 1..7 {
            let mut ut = *u;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = tab.a[stage - 1][j];
                if a != T::zero() {
                    for i in 0..n {
                        ut[i] += kj[i] * (a * h);
                    }
                }
            }
            let cs = if stage <= 4 { tab.c[stage - 1] } else { T::one() };
            if stage == 6 {
                // seventh stage evaluates at the new point; ut is the 5th-order solution
                k[6] = ev(s + h, &ut);
                let mut err = T::zero();
                for i in 0..n {
                    let mut e = Complex::new(T::zero(), T::zero());
                    for (j, kj) in k.iter().enumerate() {
                        e += kj[i] * tab.e[j];
                    }
                    let e = (e * h).norm();
                    let sc = self.cfg.abs_tol + self.cfg.rel_tol * u[i].norm().max(ut[i].norm());
                    let r = e / sc;
                    err += r * r;
                }
                let err = (err / T::from_count(n)).sqrt();
                return (ut, err);
            }
            k[stage] = ev(s + cs * h, &ut);
        }
        unreachable!("the loop returns at the seventh stage")
    }

    fn next_step_factor(&mut self, err: T) -> T {
        // PI controller (Hairer & Wanner, beta = 0.04)
        let beta = T::lit(0.04);
        let expo = T::lit(0.2) - beta * T::lit(0.75);
        let err = err.max(T::lit(1e-10));
        let fac = T::lit(0.9) * err.powf(-expo) * self.err_prev.powf(beta);
        fac.max(T::lit(0.2)).min(T::lit(10.0))
    }

    /// Advances along `path` from `s = 0` to `s_end`. Every accepted step
    /// appends a sample. With `watch`, stops early when `|y|` grows past the
    /// pole trigger.
    fn run(
        &mut self,
        path: &Path<T>,
        s_end: T,
        u: &mut Vec2<T>,
        samples: &mut Vec<State<T>>,
        watch: bool,
    ) -> Result<Outcome<T>> {
        let mut s = T::zero();
        let mut h = match path {
            Path::Line { .. } => self.h_line,
            Path::Arc { .. } => T::lit(0.05),
        };
        let scale = match path {
            Path::Line { .. } => T::one(),
            Path::Arc { radius, .. } => *radius,
        };
        loop {
            let rest = s_end - s;
            if rest <= T::lit(4.0) * T::epsilon() * (T::one() + s_end.abs()) {
                return Ok(Outcome::Completed);
            }
            let last = h >= rest;
            let h_try = if last { rest } else { h };
            if h_try * scale < self.cfg.min_step && !last {
                return Ok(Outcome::Underflow);
            }
            let (u_new, err) = self.step(path, s, h_try, u);
            let finite = u_new.iter().all(|z| z.re.is_finite() && z.im.is_finite()) && err.is_finite();
            if !finite || err > T::one() {
                let fac = if finite {
                    self.next_step_factor(err).min(T::one())
                } else {
                    T::lit(0.2)
                };
                h = h_try * fac.max(T::lit(0.1));
                continue;
            }
            let fac = self.next_step_factor(err);
            self.err_prev = err.max(T::lit(1e-4));
            let prev_s = s;
            let prev_u = *u;
            s = if last { s_end } else { s + h_try };
            *u = u_new;
            h = h_try * fac;
            if let Path::Line { .. } = path {
                self.h_line = h;
            }
            let t = path.point(s);
            samples.push(self.state_at(t, u));
            if watch && self.system.pole_order().is_some() {
                let y = u[0];
                let growing = (y.re * u[1].re + y.im * u[1].im) * path.velocity(s).re > T::zero();
                if growing && y.norm() >= self.cfg.pole_trigger * self.system.magnitude_scale(t.re) {
                    return Ok(Outcome::Triggered { prev_s, prev_u });
                }
            }
            if last {
                return Ok(Outcome::Completed);
            }
        }
    }

    /// Like [`Runner::run`] without the pole watch; step underflow is an error.
    fn run_exact(&mut self, path: &Path<T>, s_end: T, u: &mut Vec2<T>, samples: &mut Vec<State<T>>) -> Result<()> {
        match self.run(path, s_end, u, samples, false)? {
            Outcome::Completed => Ok(()),
            _ => {
                let t = samples.last().map(|s| s.t).unwrap_or(path.point(T::zero()));
                Err(self.underflow(t))
            }
        }
    }

    fn underflow(&self, t: Complex<T>) -> Error {
        Error::StepUnderflow {
            t_re: t.re.to_f64().unwrap_or(f64::NAN),
            t_im: t.im.to_f64().unwrap_or(f64::NAN),
            h: self.cfg.min_step.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Half circle around `center` from the entry state to the real-axis
    /// exit point. The exit sample is cleaned of imaginary round-off.
    fn arc(
        &mut self,
        entry: &State<T>,
        center: T,
        radius: T,
        direction: Direction,
        samples: &mut Vec<State<T>>,
    ) -> Result<State<T>> {
        let d: T = direction.sign();
        let side = -d;
        let orientation = match self.cfg.half_plane {
            HalfPlane::Upper => -d,
            HalfPlane::Lower => d,
        };
        let path = Path::Arc {
            center,
            radius,
            side,
            orientation,
        };
        let mut u = [entry.y, entry.yp];
        if self.system.ode_order() == 1 {
            u[1] = Complex::new(T::zero(), T::zero());
        }
        let start = samples.len();
        self.run_exact(&path, T::PI(), &mut u, samples)?;
        let exit_t = center + d * radius;
        let im_y = u[0].im.abs();
        let im_yp = u[1].im.abs();
        let tol_y = self.cfg.purity_tol * u[0].norm().max(T::one());
        let tol_yp = self.cfg.purity_tol * u[1].norm().max(T::one());
        if im_y > tol_y || im_yp > tol_yp {
            return Err(Error::PurityViolation {
                pole: center.to_f64().unwrap_or(f64::NAN),
                im_y: im_y.to_f64().unwrap_or(f64::NAN),
                im_yp: im_yp.to_f64().unwrap_or(f64::NAN),
            });
        }
        let clean = [Complex::new(u[0].re, T::zero()), Complex::new(u[1].re, T::zero())];
        let exit = self.state_at(Complex::new(exit_t, T::zero()), &clean);
        if samples.len() > start {
            let last = samples.len() - 1;
            samples[last] = exit;
        } else {
            samples.push(exit);
        }
        Ok(exit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y'' = 6y²`, solved exactly by `(t − t₀)⁻²`.
    #[derive(Clone, Copy)]
    struct DoublePoleModel;

    impl OdeSystem for DoublePoleModel {
        fn ode_order(&self) -> usize {
            2
        }
        fn pole_order(&self) -> Option<u32> {
            Some(2)
        }
        fn rhs<T: Real>(&self, _t: Complex<T>, y: Complex<T>) -> Complex<T> {
            y * y * T::lit(6.0)
        }
    }

    fn real_state(t: f64, y: f64, yp: f64) -> State<f64> {
        State {
            t: Complex::new(t, 0.0),
            y: Complex::new(y, 0.0),
            yp: Complex::new(yp, 0.0),
        }
    }

    #[test]
    fn estimator_is_exact_on_double_pole() {
        let cfg = IntegrationConfig::default();
        for t in [4.9, 4.99, 5.2, -3.0] {
            let dt: f64 = t - 5.0;
            let s = real_state(t, dt.powi(-2), -2.0 * dt.powi(-3));
            let t0 = estimate_pole(&Equation::PainleveI, &s, &cfg).unwrap();
            assert!((t0.re - 5.0).abs() < 1e-12 * 5.0, "{t0}");
        }
    }

    #[test]
    fn estimator_is_exact_on_simple_pole() {
        let cfg = IntegrationConfig::default();
        for t in [2.999, 3.5, 0.0] {
            let dt: f64 = t - 3.0;
            let s = real_state(t, 1.0 / dt, -1.0 / (dt * dt));
            let t0 = estimate_pole(&Equation::PainleveII, &s, &cfg).unwrap();
            assert!((t0.re - 3.0).abs() < 1e-12 * 3.0, "{t0}");
        }
    }

    #[test]
    fn estimator_rejects_flat_derivative() {
        let cfg = IntegrationConfig::default();
        let s = real_state(1.0, 1e3, 0.0);
        assert!(matches!(
            estimate_pole(&Equation::PainleveI, &s, &cfg),
            Err(Error::DegenerateDerivative { .. })
        ));
        assert!(estimate_pole(&Equation::ToyModel, &real_state(1.0, 1.0, 1.0), &cfg).is_err());
    }

    #[test]
    fn detour_around_exact_double_pole_mirrors_entry() {
        let cfg = IntegrationConfig::default();
        let (t0, r) = (-2.0, 0.05);
        let entry = real_state(t0 + r, r.powi(-2), -2.0 * r.powi(-3));
        let exit = detour(&DoublePoleModel, &entry, Complex::new(t0, 0.0), r, &cfg).unwrap();
        assert_eq!(exit.t.re, t0 - r);
        assert!((exit.y.re - r.powi(-2)).abs() < 1e-8 * r.powi(-2));
        assert!((exit.yp.re - 2.0 * r.powi(-3)).abs() < 1e-8 * r.powi(-3));
    }

    #[test]
    fn detour_checks_entry_distance() {
        let cfg = IntegrationConfig::default();
        let entry = real_state(0.3, 1.0, 1.0);
        assert!(detour(&DoublePoleModel, &entry, Complex::new(0.0, 0.0), 0.1, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = IntegrationConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.pole_trigger = 0.5;
        assert!(cfg.validate().is_err());
        let cfg = IntegrationConfig::<f64> {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn direction_support() {
        let cfg = IntegrationConfig::default();
        let init = InitialData::new(0.0, 1.0);
        assert!(integrate(&Equation::PainleveI, init, Direction::PositiveT, &cfg).is_err());
        assert!(integrate(&Equation::ToyModel, init, Direction::NegativeT, &cfg).is_err());
    }

    #[test]
    fn zero_solution_stays_zero() {
        let cfg = IntegrationConfig::default().with_horizon(-10.0);
        let traj = integrate(&Equation::PainleveII, InitialData::new(0.0, 0.0), Direction::NegativeT, &cfg).unwrap();
        assert!(traj.reached_horizon());
        assert!(traj.samples.iter().all(|s| s.y.norm() == 0.0));
        assert_eq!(traj.terminal_t, -10.0);
    }
}
