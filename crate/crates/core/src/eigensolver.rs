//! Critical initial conditions ("nonlinear eigenvalues") located by a grid
//! scan for class flips followed by bisection on the class discriminant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_with, count_toy_maxima, ClassTag, ClassifierConfig, SolutionClass};
use crate::dynamics::{Branch, Equation, InitialData};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Direction, IntegrationConfig, Trajectory};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchKind {
    /// Hold `y(0)`, vary `y'(0)`.
    SlopeEigen,
    /// Hold `y'(0)`, vary `y(0)`.
    ValueEigen,
    /// Vary `y(0)` of the first-order toy model.
    ToyEigen,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchMode<T> {
    pub kind: SearchKind,
    /// The datum held fixed; unused by `ToyEigen`.
    pub fixed_value: T,
}

impl<T: Real> SearchMode<T> {
    pub fn slope() -> Self {
        Self {
            kind: SearchKind::SlopeEigen,
            fixed_value: T::zero(),
        }
    }

    pub fn value() -> Self {
        Self {
            kind: SearchKind::ValueEigen,
            fixed_value: T::zero(),
        }
    }

    pub fn toy() -> Self {
        Self {
            kind: SearchKind::ToyEigen,
            fixed_value: T::zero(),
        }
    }

    pub fn with_fixed(mut self, fixed_value: T) -> Self {
        self.fixed_value = fixed_value;
        self
    }

    pub fn initial_data(&self, x: T) -> InitialData<T> {
        match self.kind {
            SearchKind::SlopeEigen => InitialData::new(self.fixed_value, x),
            SearchKind::ValueEigen => InitialData::new(x, self.fixed_value),
            SearchKind::ToyEigen => InitialData::new(x, T::zero()),
        }
    }
}

/// What the bisection compares at its probe points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discriminant {
    Class(ClassTag),
    /// Number of maxima of a toy-model solution.
    Maxima(usize),
}

/// Default bracket width at which bisection stops.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Equation, search mode and the numerical settings of a search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenProblem<T> {
    pub equation: Equation,
    pub mode: SearchMode<T>,
    pub direction: Direction,
    pub integration: IntegrationConfig<T>,
    pub classifier: ClassifierConfig<T>,
}

impl<T: Real> EigenProblem<T> {
    /// The canonical problems: P-I both modes and P-II slope mode integrate
    /// towards negative `t`, P-II value mode and the toy model towards
    /// positive `t`. Integration runs at `rel_tol = 10⁻¹¹` so that the
    /// default bisection tolerance [`DEFAULT_TOL`] is admissible.
    pub fn new(equation: Equation, kind: SearchKind) -> Result<Self> {
        let (mode, direction) = match (equation, kind) {
            (Equation::ToyModel, SearchKind::ToyEigen) => (SearchMode::toy(), Direction::PositiveT),
            (Equation::PainleveI, SearchKind::SlopeEigen) => (SearchMode::slope(), Direction::NegativeT),
            (Equation::PainleveI, SearchKind::ValueEigen) => (SearchMode::value(), Direction::NegativeT),
            (Equation::PainleveII, SearchKind::SlopeEigen) => (SearchMode::slope(), Direction::NegativeT),
            (Equation::PainleveII, SearchKind::ValueEigen) => (SearchMode::value(), Direction::PositiveT),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "search mode {kind:?} does not apply to {equation}"
                )))
            }
        };
        let mut integration = IntegrationConfig::default().with_rel_tol(T::lit(1e-11));
        integration.abs_tol = T::lit(1e-13);
        Ok(Self {
            equation,
            mode,
            direction,
            integration,
            classifier: ClassifierConfig::default(),
        })
    }

    pub fn with_fixed(mut self, fixed_value: T) -> Self {
        self.mode.fixed_value = fixed_value;
        self
    }

    pub fn with_integration(mut self, integration: IntegrationConfig<T>) -> Self {
        self.integration = integration;
        self
    }

    /// Integrates from the initial datum `x`.
    pub fn trajectory(&self, x: T) -> Result<Trajectory<T>> {
        integrate(&self.equation, self.mode.initial_data(x), self.direction, &self.integration)
    }

    pub fn discriminant_of(&self, traj: &Trajectory<T>) -> Result<Discriminant> {
        match self.mode.kind {
            SearchKind::ToyEigen => Ok(Discriminant::Maxima(count_toy_maxima(traj))),
            _ => Ok(Discriminant::Class(
                classify_with(self.equation, traj, self.direction, &self.classifier)?.tag,
            )),
        }
    }

    /// Integrates and evaluates the discriminant at `x`.
    pub fn probe(&self, x: T) -> Result<(Discriminant, Trajectory<T>)> {
        let fail = |e: Error| Error::ProbeFailure {
            probe: x.to_f64().unwrap_or(f64::NAN),
            reason: e.to_string(),
        };
        let traj = self.trajectory(x).map_err(fail)?;
        let disc = self.discriminant_of(&traj).map_err(fail)?;
        if let Discriminant::Class(tag) = disc {
            if tag.is_separatrix() {
                return Err(fail(Error::AmbiguousClassification(format!(
                    "probe landed on a {tag} trajectory; extend the horizon"
                ))));
            }
        }
        Ok((disc, traj))
    }

    /// Sign of the scan away from the origin: P-I value eigenvalues are
    /// negative, all others positive.
    pub fn default_scan_sign(&self) -> T {
        match (self.equation, self.mode.kind) {
            (Equation::PainleveI, SearchKind::ValueEigen) => -T::one(),
            _ => T::one(),
        }
    }

    /// Grid step used to open the scan.
    pub fn default_step(&self) -> T {
        match (self.equation, self.mode.kind) {
            (Equation::ToyModel, _) => T::lit(0.02),
            (_, SearchKind::ValueEigen) => T::lit(0.02),
            _ => T::lit(0.05),
        }
    }
}

/// Interval `[origin_side, far_side]` on whose endpoints the discriminant differs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket<T> {
    /// Endpoint nearer the scan origin.
    pub near: T,
    pub far: T,
    pub near_class: Discriminant,
    pub far_class: Discriminant,
}

impl<T: Real> Bracket<T> {
    pub fn width(&self) -> T {
        (self.far - self.near).abs()
    }

    pub fn contains(&self, x: T) -> bool {
        let (lo, hi) = if self.near <= self.far {
            (self.near, self.far)
        } else {
            (self.far, self.near)
        };
        x >= lo && x <= hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult<T> {
    pub brackets: Vec<Bracket<T>>,
    pub warnings: Vec<String>,
}

/// Grid points `start, start ± step, …` up to and including `end`.
fn grid<T: Real>(start: T, end: T, step: T) -> Vec<T> {
    let sign = if end >= start { T::one() } else { -T::one() };
    let span = (end - start).abs();
    let n = (span / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=n).map(|k| start + sign * step * T::from_count(k)).collect()
}

/// Scans `range.0 → range.1` with the given step and returns the grid cells
/// whose endpoints classify differently, ordered from the start of the range.
/// Probes run in parallel.
pub fn scan_brackets<T: Real>(problem: &EigenProblem<T>, range: (T, T), step: T) -> Result<ScanResult<T>> {
    if !(step > T::zero()) || !range.0.is_finite() || !range.1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scan needs a finite range and a positive step, got {range:?} / {step}"
        )));
    }
    let points = grid(range.0, range.1, step);
    let classes: Vec<Discriminant> = points
        .par_iter()
        .map(|&x| problem.probe(x).map(|(d, _)| d))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    let mut warnings = Vec::new();
    for k in 1..points.len() {
        if classes[k] != classes[k - 1] {
            if let (Discriminant::Maxima(a), Discriminant::Maxima(b)) = (classes[k - 1], classes[k]) {
                if a.abs_diff(b) > 1 {
                    warnings.push(format!(
                        "maxima count jumps by {} inside [{}, {}]; shrink the step",
                        a.abs_diff(b),
                        points[k - 1],
                        points[k]
                    ));
                }
            }
            brackets.push(Bracket {
                near: points[k - 1],
                far: points[k],
                near_class: classes[k - 1],
                far_class: classes[k],
            });
        }
    }
    for w in brackets.windows(2) {
        if (w[1].near - w[0].far).abs() < step {
            warnings.push(format!(
                "brackets at {} and {} are adjacent; eigenvalues may be hiding in one cell, shrink the step",
                w[0].near, w[1].near
            ));
        }
    }
    Ok(ScanResult { brackets, warnings })
}

/// Converged critical initial datum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord<T> {
    pub index: usize,
    pub equation: Equation,
    pub mode: SearchMode<T>,
    pub value: T,
    pub bracket_width: T,
    /// Poles of the eigenfunction: those shared by the solutions on both
    /// sides of the final bracket. Zero for the toy model.
    pub pole_count: usize,
    pub near_class: Discriminant,
    pub far_class: Discriminant,
}

/// Widths of the bracket after each halving.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BisectionTranscript<T> {
    pub widths: Vec<T>,
}

/// Bisects the bracket until its width is at most `tol`.
pub fn bisect<T: Real>(problem: &EigenProblem<T>, bracket: &Bracket<T>, tol: T) -> Result<EigenvalueRecord<T>> {
    bisect_with_transcript(problem, bracket, tol, 0).map(|(r, _)| r)
}

/// As [`bisect`], also returning the transcript. The bracket is kept as a
/// dyadic offset from its near end, so each halving is exact.
pub fn bisect_with_transcript<T: Real>(
    problem: &EigenProblem<T>,
    bracket: &Bracket<T>,
    tol: T,
    index: usize,
) -> Result<(EigenvalueRecord<T>, BisectionTranscript<T>)> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let floor = T::lit(10.0) * problem.integration.rel_tol;
    if problem.mode.kind != SearchKind::ToyEigen && tol < floor * T::lit(0.999) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} is below 10 x the integration tolerance"
        )));
    }
    if bracket.near_class == bracket.far_class {
        return Err(Error::InvalidBracket(format!("{:?}", bracket.near_class)));
    }
    let sign = if bracket.far >= bracket.near { T::one() } else { -T::one() };
    let origin = bracket.near;
    let at = |offset: T| origin + sign * offset;

    let (near_class, mut near_traj) = problem.probe(bracket.near)?;
    let (far_class, mut far_traj) = problem.probe(bracket.far)?;
    if near_class != bracket.near_class || far_class != bracket.far_class {
        return Err(Error::InvalidBracket(format!(
            "endpoint classes changed on re-evaluation: {near_class:?} / {far_class:?}"
        )));
    }

    let mut offset = T::zero();
    let mut width = bracket.width();
    let mut transcript = BisectionTranscript { widths: vec![width] };
    while width > tol {
        width *= T::lit(0.5);
        let mid = offset + width;
        let (class, traj) = problem.probe(at(mid))?;
        let goes_near = match (class, near_class) {
            (Discriminant::Maxima(c), Discriminant::Maxima(n)) => c <= n,
            _ if class == near_class => true,
            _ if class == far_class => false,
            _ => {
                return Err(Error::ProbeFailure {
                    probe: at(mid).to_f64().unwrap_or(f64::NAN),
                    reason: format!("class {class:?} matches neither {near_class:?} nor {far_class:?}"),
                })
            }
        };
        if goes_near {
            offset = mid;
            near_traj = traj;
        } else {
            far_traj = traj;
        }
        transcript.widths.push(width);
    }

    let value = at(offset + width * T::lit(0.5));
    let pole_count = shared_poles(problem.equation, &near_traj, &far_traj);
    Ok((
        EigenvalueRecord {
            index,
            equation: problem.equation,
            mode: problem.mode,
            value,
            bracket_width: width,
            pole_count,
            near_class,
            far_class,
        },
        transcript,
    ))
}

/// Leading poles common to both trajectories: locations within a quarter of
/// the smaller detour radius and the same sign of approach.
pub fn shared_poles<T: Real>(eq: Equation, a: &Trajectory<T>, b: &Trajectory<T>) -> usize {
    if eq == Equation::ToyModel {
        return 0;
    }
    let approach = |traj: &Trajectory<T>, loc: T| {
        let d: T = traj.direction.sign();
        traj.real_samples()
            .take_while(|s| (loc - s.t.re) * d > T::zero())
            .last()
            .map(|s| s.y.re > T::zero())
    };
    a.poles
        .iter()
        .zip(&b.poles)
        .take_while(|(p, q)| {
            let close = (p.location - q.location).abs() <= T::lit(0.25) * p.detour_radius.min(q.detour_radius);
            close && approach(a, p.location) == approach(b, q.location)
        })
        .count()
}

/// Eigenvalue table for `n = 1..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTable<T> {
    pub records: Vec<EigenvalueRecord<T>>,
    /// Set when the table is partial: the index that failed and why.
    pub failure: Option<(usize, Error)>,
    pub warnings: Vec<String>,
}

impl<T: Real> EigenTable<T> {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn values(&self) -> Vec<T> {
        self.records.iter().map(|r| r.value).collect()
    }
}

/// Probes evaluated in parallel per scan chunk.
const SCAN_CHUNK: usize = 16;

/// Finds the first `n_max` eigenvalues: an adaptive scan away from the
/// origin (step shrinking with the observed spacing) collects the brackets,
/// which are then bisected in parallel.
pub fn eigen_table<T: Real>(problem: &EigenProblem<T>, n_max: usize, tol: T) -> EigenTable<T> {
    eigen_table_signed(problem, n_max, tol, problem.default_scan_sign())
}

/// As [`eigen_table`] with an explicit scan sign (`+1` up, `−1` down).
pub fn eigen_table_signed<T: Real>(problem: &EigenProblem<T>, n_max: usize, tol: T, sign: T) -> EigenTable<T> {
    let cap = if problem.mode.kind == SearchKind::ToyEigen { 60 } else { 30 };
    let mut table = EigenTable {
        records: Vec::new(),
        failure: None,
        warnings: Vec::new(),
    };
    if n_max == 0 || n_max > cap {
        table.failure = Some((
            n_max,
            Error::InvalidArgument(format!("n_max must lie in 1..={cap}, got {n_max}")),
        ));
        return table;
    }

    let brackets = match collect_brackets(problem, n_max, sign, &mut table.warnings) {
        Ok(b) => b,
        Err((found, e)) => {
            table.failure = Some((found.len() + 1, e));
            found
        }
    };

    let results: Vec<Result<EigenvalueRecord<T>>> = brackets
        .par_iter()
        .enumerate()
        .map(|(k, b)| bisect_with_transcript(problem, b, tol, k + 1).map(|(r, _)| r))
        .collect();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => table.records.push(rec),
            Err(e) => {
                table.failure = Some((k + 1, e));
                break;
            }
        }
    }
    table
}

type PartialBrackets<T> = (Vec<Bracket<T>>, Error);

fn collect_brackets<T: Real>(
    problem: &EigenProblem<T>,
    n_max: usize,
    sign: T,
    warnings: &mut Vec<String>,
) -> std::result::Result<Vec<Bracket<T>>, PartialBrackets<T>> {
    let origin = T::zero();
    let max_span = T::lit(200.0);
    let h0 = problem.default_step();
    let mut step = h0;
    let mut brackets: Vec<Bracket<T>> = Vec::new();
    // toy counts are taken from the origin itself; the other modes start one step out
    let mut x = if problem.mode.kind == SearchKind::ToyEigen {
        origin
    } else {
        origin + sign * step
    };
    let mut prev = match problem.probe(x) {
        Ok((d, _)) => d,
        Err(e) => return Err((brackets, e)),
    };
    while brackets.len() < n_max {
        if (x - origin).abs() > max_span {
            return Err((
                brackets,
                Error::InvalidArgument(format!("no further eigenvalue within {max_span} of the origin")),
            ));
        }
        let points: Vec<T> = (1..=SCAN_CHUNK).map(|k| x + sign * step * T::from_count(k)).collect();
        let classes: Vec<Result<Discriminant>> = points.par_iter().map(|&p| problem.probe(p).map(|(d, _)| d)).collect();
        let mut last = x;
        for (p, c) in points.into_iter().zip(classes) {
            let c = match c {
                Ok(c) => c,
                Err(e) => return Err((brackets, e)),
            };
            if c != prev {
                if let (Discriminant::Maxima(a), Discriminant::Maxima(b)) = (prev, c) {
                    if a.abs_diff(b) != 1 {
                        warnings.push(format!("maxima count jumps {a} -> {b} within one step at {p}"));
                    }
                }
                brackets.push(Bracket {
                    near: last,
                    far: p,
                    near_class: prev,
                    far_class: c,
                });
                if brackets.len() == n_max {
                    break;
                }
            }
            prev = c;
            last = p;
        }
        x = last;
        // eigenvalue spacing shrinks with n; keep several probes per gap
        if let Some(spacing) = spacing_estimate(&brackets, origin) {
            step = h0.min(spacing / T::lit(8.0));
        }
    }
    Ok(brackets)
}

fn spacing_estimate<T: Real>(brackets: &[Bracket<T>], origin: T) -> Option<T> {
    let mid = |b: &Bracket<T>| (b.near + b.far) * T::lit(0.5);
    match brackets {
        [] => None,
        [only] => Some((mid(only) - origin).abs()),
        [.., a, b] => Some((mid(b) - mid(a)).abs()),
    }
}

/// Toy-model critical values `a_1..a_{n_max}`: the `n`-th is where the
/// maxima count first reaches `m₀ + n`, `m₀` being the count at `a = 0`.
pub fn toy_eigen_table<T: Real>(n_max: usize, tol: T) -> EigenTable<T> {
    let problem = EigenProblem::new(Equation::ToyModel, SearchKind::ToyEigen).expect("toy problem is valid");
    eigen_table(&problem, n_max, tol)
}

/// Checks that the eigenfunction at `record.value` is a separatrix: after
/// its last pole it tracks a branch curve within the classifier band for
/// at least `min_run` (negative direction), or decays monotonically below
/// `decay_floor` (positive direction).
pub fn validate_separatrix<T: Real>(
    problem: &EigenProblem<T>,
    record: &EigenvalueRecord<T>,
    min_run: T,
    decay_floor: T,
) -> Result<SolutionClass<T>> {
    let traj = problem.trajectory(record.value)?;
    let d: T = problem.direction.sign();
    let after = if record.pole_count == 0 {
        T::zero()
    } else {
        traj.poles
            .get(record.pole_count - 1)
            .map(|p| p.location + d * p.detour_radius)
            .ok_or_else(|| Error::AmbiguousClassification("eigenfunction lost its poles".into()))?
    };
    let next_pole = traj.poles.get(record.pole_count).map(|p| p.location);
    let tail: Vec<(T, T)> = traj
        .real_samples()
        .filter(|s| (s.t.re - after) * d >= T::zero())
        .filter(|s| next_pole.is_none_or(|np| (np - s.t.re) * d > T::zero()))
        .map(|s| (s.t.re, s.y.re))
        .collect();
    let fail = |msg: String| Error::AmbiguousClassification(msg);

    match problem.direction {
        Direction::NegativeT => {
            let mut best: Option<(T, T, Branch)> = None;
            for branch in [Branch::Plus, Branch::Minus] {
                let mut run_start: Option<T> = None;
                for &(t, y) in &tail {
                    if t >= T::zero() {
                        continue;
                    }
                    let b = problem.equation.asymptotic_branch(t, branch)?;
                    if (y - b).abs() <= problem.classifier.separatrix_band * b.abs() {
                        let s = *run_start.get_or_insert(t);
                        let len = (s - t).abs();
                        if best.is_none_or(|(a, e, _)| (a - e).abs() < len) {
                            best = Some((s, t, branch));
                        }
                    } else {
                        run_start = None;
                    }
                }
            }
            match best {
                Some((s, e, branch)) if (s - e).abs() >= min_run => Ok(SolutionClass {
                    tag: match branch {
                        Branch::Plus => ClassTag::SeparatrixPlus,
                        Branch::Minus => ClassTag::SeparatrixMinus,
                    },
                    pole_count: record.pole_count,
                    confidence_window: (e, s),
                }),
                _ => Err(fail(format!(
                    "eigenfunction at {} never tracks a branch for {min_run}",
                    record.value
                ))),
            }
        }
        Direction::PositiveT => {
            let (imin, &(t_min, y_min)) = tail
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.abs().partial_cmp(&b.1 .1.abs()).unwrap_or(std::cmp::Ordering::Equal))
                .ok_or_else(|| fail("no samples after the last pole".into()))?;
            // monotone decay from the first sample with |y| < 1 down to the minimum
            let start = tail[..=imin].iter().rposition(|&(_, y)| y.abs() >= T::one()).map_or(0, |k| k + 1);
            let monotone = tail[start..=imin].windows(2).all(|w| w[1].1.abs() <= w[0].1.abs());
            if y_min.abs() <= decay_floor && monotone && start < imin {
                Ok(SolutionClass {
                    tag: ClassTag::DecayToZero,
                    pole_count: record.pole_count,
                    confidence_window: (tail[start].0, t_min),
                })
            } else {
                Err(fail(format!(
                    "eigenfunction at {} bottoms out at |y| = {} (monotone: {monotone})",
                    record.value,
                    y_min.abs()
                )))
            }
        }
    }
}
