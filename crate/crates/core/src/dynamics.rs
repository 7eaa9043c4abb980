//! The dynamical systems: right-hand sides, asymptotic branch curves, and
//! the energy functional together with its fluctuation integral.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Real;

/// Which initial value problem is being solved.
///
/// * `PainleveI`:  `y'' = 6y² + t`
/// * `PainleveII`: `y'' = 2y³ + ty`
/// * `ToyModel`:   `y' = cos(π t y)`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Equation {
    PainleveI,
    PainleveII,
    ToyModel,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sign selecting the upper or lower asymptotic branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn flipped(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::PainleveI => "Painleve I",
            Equation::PainleveII => "Painleve II",
            Equation::ToyModel => "toy model",
        }
    }

    /// Order of the movable poles: 2 for P-I, 1 for P-II, none for the toy model.
    pub fn pole_order(self) -> Option<u32> {
        match self {
            Equation::PainleveI => Some(2),
            Equation::PainleveII => Some(1),
            Equation::ToyModel => None,
        }
    }

    pub fn ode_order(self) -> usize {
        match self {
            Equation::PainleveI | Equation::PainleveII => 2,
            Equation::ToyModel => 1,
        }
    }

    fn unsupported(self, operation: &'static str) -> Error {
        Error::UnsupportedEquation {
            operation,
            equation: self.name(),
        }
    }

    /// Highest derivative as a function of `(t, y)`: `y''` for the
    /// Painlevé equations and `y'` for the toy model.
    #[inline]
    pub fn rhs<T: Real>(self, t: Complex<T>, y: Complex<T>) -> Complex<T> {
        match self {
            Equation::PainleveI => y * y * T::lit(6.0) + t,
            Equation::PainleveII => y * y * y * T::lit(2.0) + t * y,
            Equation::ToyModel => (t * y * T::PI()).cos(),
        }
    }

    /// The curves `±√(−t/6)` (P-I) and `±√(−t/2)` (P-II) approached by
    /// solutions as `t → −∞`.
    pub fn asymptotic_branch<T: Real>(self, t: T, sign: Branch) -> Result<T> {
        let denom = match self {
            Equation::PainleveI => T::lit(6.0),
            Equation::PainleveII => T::lit(2.0),
            Equation::ToyModel => return Err(self.unsupported("asymptotic_branch")),
        };
        if !(t < T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "asymptotic branch requires t < 0, got {t}"
            )));
        }
        let magnitude = (-t / denom).sqrt();
        Ok(match sign {
            Branch::Plus => magnitude,
            Branch::Minus => -magnitude,
        })
    }

    /// `½y'² − 2y³` for P-I and `½y'² − ½y⁴` for P-II.
    pub fn energy<T: Real>(self, y: T, yp: T) -> Result<T> {
        let half = T::lit(0.5);
        match self {
            Equation::PainleveI => Ok(half * yp * yp - T::lit(2.0) * y * y * y),
            Equation::PainleveII => Ok(half * yp * yp - half * y * y * y * y),
            Equation::ToyModel => Err(self.unsupported("energy")),
        }
    }

    /// Integrand of the fluctuation integral, `t·y'` (P-I) or `t·y·y'` (P-II).
    fn fluctuation_integrand<T: Real>(self, t: Complex<T>, y: Complex<T>, yp: Complex<T>) -> Complex<T> {
        match self {
            Equation::PainleveII => t * y * yp,
            _ => t * yp,
        }
    }

    /// Third derivative `y'''` along a solution.
    fn rhs_dt<T: Real>(self, t: Complex<T>, y: Complex<T>, yp: Complex<T>) -> Complex<T> {
        match self {
            Equation::PainleveII => y * y * yp * T::lit(6.0) + y + t * yp,
            _ => y * yp * T::lit(12.0) + T::one(),
        }
    }

    /// First and second `t`-derivatives of the fluctuation integrand.
    fn fluctuation_integrand_derivs<T: Real>(self, t: Complex<T>, y: Complex<T>, yp: Complex<T>) -> [Complex<T>; 2] {
        let ypp = self.rhs(t, y);
        let yppp = self.rhs_dt(t, y, yp);
        match self {
            Equation::PainleveII => {
                let q = yp * yp + y * ypp;
                let dq = yp * ypp * T::lit(3.0) + y * yppp;
                [y * yp + t * q, q * T::lit(2.0) + t * dq]
            }
            _ => [yp + t * ypp, ypp * T::lit(2.0) + t * yppp],
        }
    }
}

/// Initial data at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData<T> {
    pub y0: T,
    pub slope0: T,
}

impl<T: Real> InitialData<T> {
    pub fn new(y0: T, slope0: T) -> Self {
        Self { y0, slope0 }
    }

    pub fn t_start(&self) -> T {
        T::zero()
    }
}

/// Point on the integration path. For the toy model `yp` holds `y'(t)`
/// evaluated from the right-hand side rather than an integrated component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State<T> {
    pub t: Complex<T>,
    pub y: Complex<T>,
    pub yp: Complex<T>,
}

impl<T: Real> State<T> {
    /// True when the sample lies on the real `t` axis.
    pub fn on_axis(&self) -> bool {
        self.t.im == T::zero()
    }
}

/// The energy `H(x)` at a real-axis point together with the cumulative
/// fluctuation integral `I(x)` along the path from `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue<T> {
    pub t: T,
    pub h: T,
    pub i_of_x: T,
}

impl<T: Real> EnergyValue<T> {
    /// `H(x) − H(0) − I(x)`, zero along an exact solution.
    pub fn identity_defect(&self, h0: T) -> T {
        self.h - h0 - self.i_of_x
    }
}

/// Cumulative fluctuation integral `I(x)` sampled at the trajectory's
/// real-axis points, paired with the energy there.
///
/// Quadrature runs over every accepted step of the path including the
/// complex detours, using the two-point Hermite rule with first and second
/// endpoint derivatives (local error `O(h⁷)`) so that its error stays below
/// the integrator's where the integrand steepens next to a pole.
pub fn fluctuation_integral<T: Real>(eq: Equation, traj: &Trajectory<T>) -> Result<Vec<EnergyValue<T>>> {
    if eq == Equation::ToyModel {
        return Err(eq.unsupported("fluctuation_integral"));
    }
    let mut out = Vec::new();
    let mut acc = Complex::new(T::zero(), T::zero());
    let half = T::lit(0.5);
    let tenth = T::lit(0.1);
    let c3 = T::lit(1.0 / 120.0);
    for (k, s) in traj.samples.iter().enumerate() {
        if k > 0 {
            let p = &traj.samples[k - 1];
            let h = s.t - p.t;
            let f0 = eq.fluctuation_integrand(p.t, p.y, p.yp);
            let f1 = eq.fluctuation_integrand(s.t, s.y, s.yp);
            let [d0, e0] = eq.fluctuation_integrand_derivs(p.t, p.y, p.yp);
            let [d1, e1] = eq.fluctuation_integrand_derivs(s.t, s.y, s.yp);
            acc = acc + h * (f0 + f1) * half + h * h * (d0 - d1) * tenth + h * h * h * (e0 + e1) * c3;
        }
        if s.on_axis() {
            out.push(EnergyValue {
                t: s.t.re,
                h: eq.energy(s.y.re, s.yp.re)?,
                i_of_x: acc.re,
            });
        }
    }
    Ok(out)
}

/// Total variation `∫|f||dt|` of the fluctuation integrand along the path,
/// the natural scale against which the energy identity is checked.
pub fn fluctuation_scale<T: Real>(eq: Equation, traj: &Trajectory<T>) -> T {
    traj.samples
        .windows(2)
        .map(|w| {
            let h = (w[1].t - w[0].t).norm();
            let f0 = eq.fluctuation_integrand(w[0].t, w[0].y, w[0].yp).norm();
            let f1 = eq.fluctuation_integrand(w[1].t, w[1].y, w[1].yp).norm();
            h * (f0 + f1) * T::lit(0.5)
        })
        .fold(T::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(Equation::PainleveI.rhs(c(0.0), c(0.0)), c(0.0));
        assert_eq!(Equation::PainleveI.rhs(c(-6.0), c(1.0)), c(0.0));
        assert_eq!(Equation::PainleveII.rhs(c(-2.0), c(1.0)), c(0.0));
        let toy = Equation::ToyModel.rhs(c(1.0), c(0.5));
        assert!(toy.re.abs() < 1e-15 && toy.im == 0.0);
    }

    #[test]
    fn pole_orders() {
        assert_eq!(Equation::PainleveI.pole_order(), Some(2));
        assert_eq!(Equation::PainleveII.pole_order(), Some(1));
        assert_eq!(Equation::ToyModel.pole_order(), None);
        assert_eq!(Equation::ToyModel.ode_order(), 1);
    }

    #[test]
    fn branch_examples() {
        assert_eq!(Equation::PainleveI.asymptotic_branch(-6.0, Branch::Plus), Ok(1.0));
        assert_eq!(Equation::PainleveI.asymptotic_branch(-24.0, Branch::Minus), Ok(-2.0));
        assert_eq!(Equation::PainleveII.asymptotic_branch(-2.0, Branch::Plus), Ok(1.0));
        assert!(Equation::PainleveI.asymptotic_branch(0.0, Branch::Plus).is_err());
        assert!(Equation::PainleveII.asymptotic_branch(3.0, Branch::Plus).is_err());
        assert!(Equation::ToyModel.asymptotic_branch(-1.0, Branch::Plus).is_err());
    }

    #[test]
    fn energy_examples() {
        let b = 1.851854034;
        assert_eq!(Equation::PainleveI.energy(0.0, b), Ok(b * b / 2.0));
        assert_eq!(Equation::PainleveI.energy(-0.74, 0.0), Ok(-2.0 * (-0.74f64).powi(3)));
        assert_eq!(Equation::PainleveII.energy(1.2, 0.0), Ok(-(1.2f64).powi(4) / 2.0));
        assert!(Equation::ToyModel.energy(1.0, 1.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let v: f32 = Equation::PainleveI.asymptotic_branch(-6.0f32, Branch::Plus).unwrap();
        assert_eq!(v, 1.0);
    }

    proptest::proptest! {
        #[test]
        fn rhs_is_real_on_real_data(t in -100.0f64..100.0, y in -50.0f64..50.0) {
            for eq in [Equation::PainleveI, Equation::PainleveII, Equation::ToyModel] {
                proptest::prop_assert_eq!(eq.rhs(c(t), c(y)).im, 0.0);
            }
        }

        #[test]
        fn branches_are_mirror_images(t in -1.0e4f64..-1.0e-6) {
            for eq in [Equation::PainleveI, Equation::PainleveII] {
                let plus = eq.asymptotic_branch(t, Branch::Plus).unwrap();
                let minus = eq.asymptotic_branch(t, Branch::Minus).unwrap();
                proptest::prop_assert_eq!(plus, -minus);
            }
        }

        #[test]
        fn painleve_ii_is_odd_in_y(t in -100.0f64..100.0, y in -50.0f64..50.0) {
            let eq = Equation::PainleveII;
            proptest::prop_assert_eq!(eq.rhs(c(t), c(-y)), -eq.rhs(c(t), c(y)));
        }
    }
}
