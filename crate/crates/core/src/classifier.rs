//! Terminal-behaviour classification of trajectories.
//!
//! Bisection never has to recognise a separatrix: it only has to tell apart
//! the two stable classes flanking one. The separatrix tags are used to
//! validate converged eigenfunctions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Branch, Equation};
use crate::error::{Error, Result};
use crate::integrator::{Direction, Termination, Trajectory};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    SeparatrixPlus,
    SeparatrixMinus,
    StableOscillation,
    PoleCascade,
    DecayToZero,
    DivergentPositive,
    DivergentNegative,
}

impl ClassTag {
    /// Image under `y → −y`.
    pub fn mirrored(self) -> Self {
        match self {
            ClassTag::SeparatrixPlus => ClassTag::SeparatrixMinus,
            ClassTag::SeparatrixMinus => ClassTag::SeparatrixPlus,
            ClassTag::DivergentPositive => ClassTag::DivergentNegative,
            ClassTag::DivergentNegative => ClassTag::DivergentPositive,
            other => other,
        }
    }

    pub fn is_separatrix(self) -> bool {
        matches!(
            self,
            ClassTag::SeparatrixPlus | ClassTag::SeparatrixMinus | ClassTag::DecayToZero
        )
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionClass<T> {
    pub tag: ClassTag,
    pub pole_count: usize,
    /// Interval of `t` (ordered low, high) over which the tag was decided.
    pub confidence_window: (T, T),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig<T> {
    /// Length of the trailing window.
    pub window: T,
    /// Relative band around `±branch` for a separatrix.
    pub separatrix_band: T,
    /// Band, relative to `|branch|`, for the windowed mean of an oscillation.
    pub oscillation_band: T,
    /// `|y|` below which a positive-direction trajectory counts as decayed.
    pub decay_threshold: T,
}

impl<T: Real> Default for ClassifierConfig<T> {
    fn default() -> Self {
        Self {
            window: T::lit(10.0),
            separatrix_band: T::lit(1e-3),
            oscillation_band: T::lit(0.25),
            decay_threshold: T::lit(1e-6),
        }
    }
}

impl<T: Real> ClassifierConfig<T> {
    pub fn with_window(mut self, window: T) -> Self {
        self.window = window;
        self
    }
}

/// Classifies with the default windows and bands.
pub fn classify<T: Real>(eq: Equation, traj: &Trajectory<T>, direction: Direction) -> Result<SolutionClass<T>> {
    classify_with(eq, traj, direction, &ClassifierConfig::default())
}

pub fn classify_with<T: Real>(
    eq: Equation,
    traj: &Trajectory<T>,
    direction: Direction,
    cfg: &ClassifierConfig<T>,
) -> Result<SolutionClass<T>> {
    if eq == Equation::ToyModel {
        return Err(Error::UnsupportedEquation {
            operation: "classify",
            equation: eq.name(),
        });
    }
    if traj.termination == Termination::StepUnderflow {
        return Err(Error::AmbiguousClassification(format!(
            "trajectory stalled at t = {} before the horizon",
            traj.terminal_t
        )));
    }
    if traj.direction != direction {
        return Err(Error::InvalidArgument(format!(
            "trajectory integrated {:?}, classification requested {direction:?}",
            traj.direction
        )));
    }
    match direction {
        Direction::NegativeT => classify_negative(eq, traj, cfg),
        Direction::PositiveT => classify_positive(eq, traj, cfg),
    }
}

fn ordered<T: Real>(a: T, b: T) -> (T, T) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn classify_negative<T: Real>(eq: Equation, traj: &Trajectory<T>, cfg: &ClassifierConfig<T>) -> Result<SolutionClass<T>> {
    let end = traj.terminal_t;
    let start = (end + cfg.window).min(T::zero());
    let window = ordered(end, start);
    let in_window = |t: T| t >= window.0 && t <= window.1;
    let class = |tag| SolutionClass {
        tag,
        pole_count: traj.pole_count(),
        confidence_window: window,
    };

    if traj.termination == Termination::PoleCap || traj.poles.iter().any(|p| in_window(p.location)) {
        return Ok(class(ClassTag::PoleCascade));
    }

    let samples: Vec<(T, T)> = traj
        .real_samples()
        .filter(|s| in_window(s.t.re) && s.t.re < T::zero())
        .map(|s| (s.t.re, s.y.re))
        .collect();
    if samples.len() < 2 {
        return Err(Error::AmbiguousClassification(format!(
            "fewer than two real samples in the window [{}, {}]",
            window.0, window.1
        )));
    }

    for (branch, tag) in [
        (Branch::Plus, ClassTag::SeparatrixPlus),
        (Branch::Minus, ClassTag::SeparatrixMinus),
    ] {
        let mut tracks = true;
        for &(t, y) in &samples {
            let b = eq.asymptotic_branch(t, branch)?;
            if (y - b).abs() > cfg.separatrix_band * b.abs() {
                tracks = false;
                break;
            }
        }
        if tracks {
            return Ok(class(tag));
        }
    }

    // time-averaged y against the time-averaged stable centre line
    let mut area_y = T::zero();
    let mut area_b = T::zero();
    let mut span = T::zero();
    for w in samples.windows(2) {
        let (t0, y0) = w[0];
        let (t1, y1) = w[1];
        let h = (t1 - t0).abs();
        let b0 = eq.asymptotic_branch(t0, Branch::Plus)?;
        let b1 = eq.asymptotic_branch(t1, Branch::Plus)?;
        area_y += (y0 + y1) * h * T::lit(0.5);
        area_b += (b0 + b1) * h * T::lit(0.5);
        span += h;
    }
    let mean_y = area_y / span;
    let scale = area_b / span;
    let centre = match eq {
        Equation::PainleveI => -scale,
        _ => T::zero(),
    };
    if (mean_y - centre).abs() <= cfg.oscillation_band * scale {
        return Ok(class(ClassTag::StableOscillation));
    }
    Err(Error::AmbiguousClassification(format!(
        "no pole in [{}, {}] but windowed mean {mean_y} is off the centre line {centre}",
        window.0, window.1
    )))
}

fn classify_positive<T: Real>(eq: Equation, traj: &Trajectory<T>, cfg: &ClassifierConfig<T>) -> Result<SolutionClass<T>> {
    if eq != Equation::PainleveII {
        return Err(Error::UnsupportedEquation {
            operation: "positive-direction classification",
            equation: eq.name(),
        });
    }
    let end = traj.terminal_t;
    let window = (T::zero().max(end - cfg.window), end);
    let class = |tag| SolutionClass {
        tag,
        pole_count: traj.pole_count(),
        confidence_window: window,
    };

    let pole_in_window = traj
        .poles
        .iter()
        .any(|p| p.location >= window.0 && p.location <= window.1);
    if !pole_in_window {
        let mut in_window = traj.real_samples().filter(|s| s.t.re >= window.0);
        if let Some(first) = in_window.next() {
            let last = traj.last_real();
            if last.y.norm() < cfg.decay_threshold && last.y.norm() < first.y.norm() {
                return Ok(class(ClassTag::DecayToZero));
            }
        }
    }

    // sign of y on the approach to the most recent blow-up
    let sign = match traj.poles.last() {
        Some(pole) => traj
            .real_samples()
            .take_while(|s| s.t.re < pole.location)
            .last()
            .map(|s| s.y.re)
            .unwrap_or_else(T::zero),
        None => traj.last_real().y.re,
    };
    if sign > T::zero() {
        Ok(class(ClassTag::DivergentPositive))
    } else if sign < T::zero() {
        Ok(class(ClassTag::DivergentNegative))
    } else {
        Err(Error::AmbiguousClassification(
            "y vanishes on the approach to the last blow-up".into(),
        ))
    }
}

/// Number of local maxima of a toy-model trajectory on `t > 0`, located
/// by `+ → −` sign changes of `y'`.
pub fn count_toy_maxima<T: Real>(traj: &Trajectory<T>) -> usize {
    let mut count = 0;
    let mut prev: Option<T> = None;
    for s in traj.real_samples() {
        let d = s.yp.re;
        if let Some(p) = prev {
            if p > T::zero() && d <= T::zero() && s.t.re > T::zero() {
                count += 1;
            }
        }
        prev = Some(d);
    }
    count
}
