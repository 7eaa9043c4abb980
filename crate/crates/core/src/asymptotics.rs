//! Large-`n` behaviour of the eigenvalue tables: Richardson extrapolation
//! of `value_n / n^p` and the closed-form WKB constants it should reach.

use serde::{Deserialize, Serialize};

use crate::dynamics::Equation;
use crate::eigensolver::{EigenvalueRecord, SearchKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The PT-symmetric family `H = ½p² + g x²(ix)^ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbSpec<T> {
    pub g: T,
    pub epsilon: T,
}

impl<T: Real> WkbSpec<T> {
    pub fn new(g: T, epsilon: T) -> Result<Self> {
        if !(g > T::zero()) || !(epsilon >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "WKB family needs g > 0 and epsilon >= 0, got g = {g}, epsilon = {epsilon}"
            )));
        }
        Ok(Self { g, epsilon })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichardsonResult<T> {
    pub estimate: T,
    pub order: usize,
    /// Spread of the estimate over the last three admissible windows.
    pub stability: T,
}

#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbConstants<T> {
    pub B_I: T,
    pub C_I: T,
    pub B_II: T,
    pub C_II: T,
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler's gamma function for `x > 0` (Lanczos approximation, `g = 7`).
pub fn gamma_fn<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma_fn needs x > 0, got {x}")));
    }
    if x < T::lit(0.5) {
        return Ok(gamma_fn(x + T::one())? / x);
    }
    let z = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += T::lit(c) / (z + T::from_count(k));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    Ok((T::TAU()).sqrt() * t.powf(z + T::lit(0.5)) * (-t).exp() * a)
}

fn check_index(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("level index n must be at least 1".into()));
    }
    Ok(())
}

/// WKB estimate of the `n`-th level of `½p² + g x²(ix)^ε`.
pub fn wkb_energy<T: Real>(spec: WkbSpec<T>, n: usize) -> Result<T> {
    check_index(n)?;
    let WkbSpec { g, epsilon: e } = WkbSpec::new(spec.g, spec.epsilon)?;
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let a = one / (e + two);
    let num = gamma_fn(T::lit(1.5) + a)? * T::PI().sqrt() * T::from_count(n);
    let den = (T::PI() * a).sin() * gamma_fn(one + a)?;
    Ok(T::lit(0.5) * (two * g).powf(two / (four + e)) * (num / den).powf((two * e + four) / (e + four)))
}

/// WKB estimate of the `n`-th level of the Hermitian oscillator `½p² + ½x⁴`.
pub fn hermitian_quartic_energy<T: Real>(n: usize) -> Result<T> {
    check_index(n)?;
    let base = T::lit(3.0) * T::from_count(n) * T::PI().sqrt() * gamma_fn(T::lit(0.75))? / gamma_fn(T::lit(0.25))?;
    Ok(base.powf(T::lit(4.0 / 3.0)))
}

/// The four large-`n` constants: `b_n ~ B_I n^{3/5}`, `c_n ~ C_I n^{2/5}`
/// (P-I) and `b_{2n} ~ b_{2n+1} ~ B_II n^{2/3}`, `c_n ~ C_II n^{1/3}` (P-II).
pub fn closed_form_constants<T: Real>() -> WkbConstants<T> {
    let g = |x: f64| gamma_fn(T::lit(x)).expect("positive argument");
    let pi = T::PI();
    let cubic = (T::lit(3.0) * pi).sqrt() * g(11.0 / 6.0) / g(1.0 / 3.0);
    let quartic = T::lit(3.0) * gamma_ratio_quarter::<T>();
    WkbConstants {
        B_I: T::lit(2.0) * cubic.powf(T::lit(0.6)),
        C_I: -cubic.powf(T::lit(0.4)),
        B_II: (quartic * (T::TAU()).sqrt()).powf(T::lit(2.0 / 3.0)),
        C_II: (quartic * pi.sqrt()).cbrt(),
    }
}

fn gamma_ratio_quarter<T: Real>() -> T {
    gamma_fn(T::lit(0.75)).expect("positive argument") / gamma_fn(T::lit(0.25)).expect("positive argument")
}

fn factorial<T: Real>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, j| acc * T::from_count(j))
}

/// Order-`k` Richardson value from the window ending at `s_len` (1-based).
/// Evaluated as `s_last + Σ w_j (s_j − s_last)`.
fn richardson_window<T: Real>(seq: &[T], len: usize, k: usize, offset: T) -> T {
    let anchor = seq[len - 1];
    let mut r = T::zero();
    for j in 0..k {
        let n = len - k + j;
        let sign = if (j + k).is_multiple_of(2) { T::one() } else { -T::one() };
        let weight = (T::from_count(n) + offset).powi(k as i32) / (factorial::<T>(j) * factorial::<T>(k - j));
        r += sign * (seq[n - 1] - anchor) * weight;
    }
    anchor + r
}

/// Order-`k` Richardson extrapolation of `s_1..s_N`, assuming
/// `s_n = s_∞ + a_1/n + … + a_k/n^k + …`.
pub fn richardson<T: Real>(seq: &[T], order: usize) -> Result<RichardsonResult<T>> {
    richardson_with_offset(seq, order, T::zero())
}

/// As [`richardson`] with the tail expanded in `1/(n + offset)`.
pub fn richardson_with_offset<T: Real>(seq: &[T], order: usize, offset: T) -> Result<RichardsonResult<T>> {
    let len = seq.len();
    if order >= len {
        return Err(Error::SequenceTooShort { len, order });
    }
    let last = richardson_window(seq, len, order, offset);
    let mut lo = last;
    let mut hi = last;
    for back in 1..=2 {
        if len - back < order + 1 {
            break;
        }
        let r = richardson_window(seq, len - back, order, offset);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !last.is_finite() {
        return Err(Error::InvalidArgument("Richardson estimate is not finite".into()));
    }
    Ok(RichardsonResult {
        estimate: last,
        order,
        stability: hi - lo,
    })
}

/// Extrapolated constant from an eigenvalue table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate<T> {
    /// For split tables the mean of the two halves, with the stability
    /// widened by their disagreement.
    pub combined: RichardsonResult<T>,
    /// `b_{2n} / n^p`, present for P-II slope tables.
    pub even: Option<RichardsonResult<T>>,
    /// `b_{2n+1} / n^p`, present for P-II slope tables.
    pub odd: Option<RichardsonResult<T>>,
}

/// Richardson extrapolation of `value_n / n^p` over a table that must run
/// `n = 1, 2, …` without gaps. P-II slope tables are split into even and
/// odd halves, each extrapolated against the half-index `n`.
pub fn extract_constant<T: Real>(
    records: &[EigenvalueRecord<T>],
    exponent: T,
    order: usize,
) -> Result<ConstantEstimate<T>> {
    extract_constant_with_offset(records, exponent, order, T::zero())
}

pub fn extract_constant_with_offset<T: Real>(
    records: &[EigenvalueRecord<T>],
    exponent: T,
    order: usize,
    offset: T,
) -> Result<ConstantEstimate<T>> {
    let first = records
        .first()
        .ok_or(Error::SequenceTooShort { len: 0, order })?;
    for (k, r) in records.iter().enumerate() {
        if r.index != k + 1 {
            return Err(Error::InvalidArgument(format!(
                "table must run n = 1, 2, ... without gaps; position {} holds n = {}",
                k + 1,
                r.index
            )));
        }
        if r.equation != first.equation || r.mode.kind != first.mode.kind {
            return Err(Error::InvalidArgument("table mixes equations or search modes".into()));
        }
    }
    let scaled = |value: T, n: usize| value / T::from_count(n).powf(exponent);

    if first.equation == Equation::PainleveII && first.mode.kind == SearchKind::SlopeEigen {
        let even: Vec<T> = records
            .iter()
            .filter(|r| r.index % 2 == 0)
            .map(|r| scaled(r.value, r.index / 2))
            .collect();
        let odd: Vec<T> = records
            .iter()
            .filter(|r| r.index % 2 == 1 && r.index > 1)
            .map(|r| scaled(r.value, r.index / 2))
            .collect();
        let even = richardson_with_offset(&even, order, offset)?;
        let odd = richardson_with_offset(&odd, order, offset)?;
        let gap = (even.estimate - odd.estimate).abs();
        return Ok(ConstantEstimate {
            combined: RichardsonResult {
                estimate: (even.estimate + odd.estimate) * T::lit(0.5),
                order,
                stability: even.stability.max(odd.stability).max(gap),
            },
            even: Some(even),
            odd: Some(odd),
        });
    }

    let seq: Vec<T> = records.iter().map(|r| scaled(r.value, r.index)).collect();
    Ok(ConstantEstimate {
        combined: richardson_with_offset(&seq, order, offset)?,
        even: None,
        odd: None,
    })
}

/// The exponent `p` in `value_n ~ K n^p` for a table.
pub fn growth_exponent<T: Real>(equation: Equation, kind: SearchKind) -> Result<T> {
    match (equation, kind) {
        (Equation::PainleveI, SearchKind::SlopeEigen) => Ok(T::lit(0.6)),
        (Equation::PainleveI, SearchKind::ValueEigen) => Ok(T::lit(0.4)),
        (Equation::PainleveII, SearchKind::SlopeEigen) => Ok(T::lit(2.0 / 3.0)),
        (Equation::PainleveII, SearchKind::ValueEigen) => Ok(T::lit(1.0 / 3.0)),
        (Equation::ToyModel, SearchKind::ToyEigen) => Ok(T::lit(0.5)),
        _ => Err(Error::InvalidArgument(format!("no table of kind {kind:?} for {equation}"))),
    }
}

/// The closed-form constant a table extrapolates to.
pub fn expected_constant<T: Real>(equation: Equation, kind: SearchKind) -> Result<T> {
    let c = closed_form_constants::<T>();
    match (equation, kind) {
        (Equation::PainleveI, SearchKind::SlopeEigen) => Ok(c.B_I),
        (Equation::PainleveI, SearchKind::ValueEigen) => Ok(c.C_I),
        (Equation::PainleveII, SearchKind::SlopeEigen) => Ok(c.B_II),
        (Equation::PainleveII, SearchKind::ValueEigen) => Ok(c.C_II),
        (Equation::ToyModel, SearchKind::ToyEigen) => Ok(T::lit(2.0).powf(T::lit(5.0 / 6.0))),
        _ => Err(Error::InvalidArgument(format!("no table of kind {kind:?} for {equation}"))),
    }
}
