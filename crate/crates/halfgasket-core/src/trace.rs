//! Boundary traces on the bisection line: telescoping sequence
//! decompositions, trace-class norms and membership, the restriction
//! operator, and the two piecewise constant-Laplacian extension
//! operators (the right inverse of restriction, and the half-to-whole
//! extension), with exact normal-derivative gluing checks.
//!
//! A trace is the pair of sequences `(a_m, η_m) = (u(x_m), ∂_n u(x_m))`
//! along the axis, with `∂_n` oriented outward from the lateral cell
//! `Y_m` (the flux module's convention). Index `m = 0` of both sequences
//! is a closure slot that restates the corner pair `(u(q_1), u(q_2))` in
//! trace coordinates:
//!
//! ```text
//! u(q_1) + u(q_2) = (1/4)(5a_1 + 3a_0),    u(q_2) − u(q_1) = (1/4)(η_1 + η_0),
//! ```
//!
//! which is the `m = 0` instance of the extension formulas below. For
//! restrictions of global harmonics and of half-domain solutions these
//! closure values coincide with the data generator evaluated at 0 and
//! with the flux seed, so all module conventions agree. Norms and
//! membership verdicts always run over `m ≥ 1`.
//!
//! The two trace classes are
//!
//! * the sup class: `a_m = A₁ + A₂(3/5)^m + a′_m` with `‖5^m a′‖_∞ < ∞`
//!   and `‖3^m η_m‖_Lip < ∞` (Lip norm modulo constants), with norm
//!   `|A₁| + |A₂| + ‖5^m a′‖_∞ + ‖3^m η‖_Lip`;
//! * the square class: same split with `Σ (25/3)^m a′² < ∞` and
//!   `Σ 3^m η² < ∞`, with squared norm
//!   `|A₁|² + |A₂|² + Σ(25/3)^m a′² + Σ 3^m η²`.

use crate::bvp::ContinuousSolution;
use crate::error::{Error, Result};
use crate::flux::eta_from_data;
use crate::scalar::Scalar;
use crate::seq::{BoundarySeq, ModeSeq, NormValue, SupBound};

fn ratio_53<S: Scalar>() -> ModeSeq<S> {
    ModeSeq::geometric(S::one(), S::ratio(5, 3))
}

fn ratio_35<S: Scalar>() -> ModeSeq<S> {
    ModeSeq::geometric(S::one(), S::ratio(3, 5))
}

fn ratio_13<S: Scalar>() -> ModeSeq<S> {
    ModeSeq::geometric(S::one(), S::ratio(1, 3))
}

fn pow3<S: Scalar>() -> ModeSeq<S> {
    ModeSeq::geometric(S::one(), S::from_i64(3))
}

fn pow5<S: Scalar>() -> ModeSeq<S> {
    ModeSeq::geometric(S::one(), S::from_i64(5))
}

/// Copy of `seq` with the `m = 0` slot forced to zero (used for
/// quantities that are only meaningful from `m = 1` on).
fn mask_seed<S: Scalar>(seq: &ModeSeq<S>) -> ModeSeq<S> {
    ModeSeq::with_tail(vec![S::zero()], seq.clone())
}

fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// Sum of the degree-0, ratio-1 mode coefficients — the exact limit of a
/// generator sequence whose other modes all decay.
fn constant_part<S: Scalar>(seq: &ModeSeq<S>) -> S {
    seq.modes()
        .iter()
        .filter(|t| t.degree == 0 && t.ratio == S::one())
        .map(|t| t.coeff.clone())
        .fold(S::zero(), |acc, c| acc + c)
}

/// Ratio-test threshold for judgments made from pure samples.
fn sample_ratio_threshold<S: Scalar>() -> S {
    S::ratio(3, 5)
}

/// Detected limit of a sequence. Generator tails are read exactly: the
/// constant part is the limit, and any other surviving non-decaying mode
/// means there is none. Pure samples are judged by their window: the
/// final value is accepted when the remaining fluctuation dies off
/// geometrically across the second half of the window.
fn settled_value<S: Scalar>(seq: &ModeSeq<S>, exact: bool) -> Option<S> {
    if seq.is_zero() {
        return Some(S::zero());
    }
    if !seq.is_tail_free() {
        for t in seq.modes() {
            let drifts = t.ratio.abs() > S::one()
                || (t.ratio.abs() == S::one() && (t.degree > 0 || t.ratio != S::one()));
            if drifts {
                return None;
            }
        }
        return Some(constant_part(seq));
    }
    if exact {
        // Exact arithmetic produced a sequence with no closed tail at
        // all: it is identically zero beyond its explicit entries, so
        // its limit is exactly zero (typical after perfect cancellation).
        return Some(S::zero());
    }
    let last = seq.prefix_len().checked_sub(1)?;
    if last < 4 {
        return None;
    }
    let cand = seq.eval(last);
    let theta = sample_ratio_threshold::<S>();
    let mid = 1 + (last - 1) / 2;
    for m in mid..last {
        let r0 = (seq.eval(m) - cand.clone()).abs();
        let r1 = (seq.eval(m + 1) - cand.clone()).abs();
        if r1 > theta.clone() * r0 {
            return None;
        }
    }
    Some(cand)
}

/// Sequences derived from a pure-sample source must stay pure samples:
/// `advance(k)` shifts in `k` meaningless trailing zeros (the window
/// simply ends), and subtracting a structural correction leaves a mixed
/// representation whose closed tail would be read as exact. Re-window
/// such sequences to the source's genuine range (`k` = number of
/// trailing entries to drop). Sequences from structural sources pass
/// through unchanged.
fn trim_derived<S: Scalar>(seq: &ModeSeq<S>, source: &ModeSeq<S>, k: usize) -> ModeSeq<S> {
    if !source.is_tail_free() {
        return seq.clone();
    }
    let keep = source.prefix_len().saturating_sub(k);
    if keep == 0 {
        return ModeSeq::zero();
    }
    ModeSeq::from_values(seq.window(0, keep - 1))
}

/// For pure samples only: do the weighted magnitudes `|w^m s_m|` keep
/// growing through the second half of the window? Structural sequences
/// return false — their verdicts are exact.
fn sampled_sup_diverges<S: Scalar>(seq: &ModeSeq<S>, w: &S) -> bool {
    if !seq.is_tail_free() || seq.prefix_len() < 6 {
        return false;
    }
    let last = seq.prefix_len() - 1;
    let mid = 1 + (last - 1) / 2;
    let mut prev = (w.pow_i(mid as i32) * seq.eval(mid)).abs();
    let mut grew = false;
    for m in mid + 1..=last {
        let cur = (w.pow_i(m as i32) * seq.eval(m)).abs();
        if cur < prev {
            return false;
        }
        if cur > prev {
            grew = true;
        }
        prev = cur;
    }
    grew
}

/// For pure samples only: do the series terms `w^m s_m²` fail to decay
/// through the second half of the window (non-vanishing, nondecreasing)?
fn sampled_series_diverges<S: Scalar>(seq: &ModeSeq<S>, w: &S) -> bool {
    if !seq.is_tail_free() || seq.prefix_len() < 6 {
        return false;
    }
    let last = seq.prefix_len() - 1;
    let mid = 1 + (last - 1) / 2;
    let term = |m: usize| {
        let s = seq.eval(m);
        (w.pow_i(m as i32) * s.clone() * s).abs()
    };
    let mut prev = term(mid);
    for m in mid + 1..=last {
        let cur = term(m);
        if cur < prev {
            return false;
        }
        prev = cur;
    }
    prev > S::zero()
}

/// Which telescoping regime a decomposition runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Ratio below one: pure norm comparison, nothing extracted. The
    /// weighted square norm of the sequence is controlled by its first
    /// entry and the weighted square norm of its differences.
    BelowOne,
    /// Ratio above one — or, with a ratio below one, extraction of that
    /// geometric profile: the sequence splits as `A·r^m + residual`
    /// (`r ≥ 1` extracts the constant `A`, i.e. the limit).
    AboveOne,
}

/// Result of a single-profile telescoping decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSplit<S> {
    /// Extracted coefficient `A` (`None` when nothing is extracted or
    /// detection from samples failed).
    pub coefficient: Option<S>,
    /// `c − A·profile` (the full sequence when nothing was extracted).
    pub residual: ModeSeq<S>,
    /// The annihilating combination the norms are compared against.
    pub combination: ModeSeq<S>,
    /// `sup_{m≥1} |den^m residual_m|` (profile route only).
    pub residual_sup: Option<SupBound<S>>,
    /// `sup_{m≥1} |den^m combination_m|` (profile route only).
    pub combination_sup: Option<SupBound<S>>,
    /// `Σ_{m≥1} r^m residual²` (square routes only).
    pub residual_l2_sq: Option<NormValue<S>>,
    /// `Σ_{m≥1} r^m combination²` (square routes only).
    pub combination_l2_sq: Option<NormValue<S>>,
    /// Telescoping constants of the route, `(C₁, C₂)`.
    pub constants: (f64, f64),
    /// Whether the route's norm inequality held numerically (`None` when
    /// a side is infinite so there is nothing to compare).
    pub bound_holds: Option<bool>,
    /// Membership verdict for the route's sequence class.
    pub member: bool,
}

/// Telescoping decomposition of `c` against the geometric profile
/// `(num/den)^m`.
///
/// * `Direction::BelowOne` (needs `num < den`, ratio `r = num/den`):
///   compares `Σ r^m c²` against `(C₁|c_1| + C₂ √(Σ r^m (c_{m+1}−c_m)²))²`
///   with `C₁ = √(r/(1−r))`, `C₂ = √r/(1−√r)`. Nothing is extracted.
/// * `Direction::AboveOne` with `num > den` (`r > 1`): extracts the limit
///   `A = lim c_m`, with `Σ r^m (c−A)² ≤ C² Σ r^m (c_{m+1}−c_m)²`,
///   `C = 1/(1−r^{−1/2})`.
/// * `Direction::AboveOne` with `num < den`: extracts the `r^m` profile
///   through the weighted sequence `(den/num)^m c_m`, with the sup bound
///   `sup |den^m (c_m − A r^m)| ≤ sup |den^m (den·c_{m+1} − num·c_m)|`.
pub fn decompose<S: Scalar>(
    c: &ModeSeq<S>,
    num: i64,
    den: i64,
    direction: Direction,
) -> Result<GeometricSplit<S>> {
    if num <= 0 || den <= 0 || num == den {
        return Err(Error::Domain(format!(
            "profile ratio must be a positive non-unit fraction, got {num}/{den}"
        )));
    }
    let r = S::ratio(num, den);
    match direction {
        Direction::BelowOne => {
            if num > den {
                return Err(Error::Domain(format!(
                    "the below-one route needs a ratio < 1, got {num}/{den}"
                )));
            }
            let combination = trim_derived(&c.advance(1).sub(c), c, 1);
            let c_l2 = c.weighted_l2_sq(&r);
            let comb_l2 = combination.weighted_l2_sq(&r);
            let rf = r.to_f64();
            let constants = ((rf / (1.0 - rf)).sqrt(), rf.sqrt() / (1.0 - rf.sqrt()));
            let bound_holds = match (&c_l2, &comb_l2) {
                (NormValue::Finite(lhs), NormValue::Finite(rhs)) => {
                    let lhs = lhs.to_f64().sqrt();
                    let rhs = constants.0 * c.eval(1).abs().to_f64()
                        + constants.1 * rhs.to_f64().sqrt();
                    Some(lhs <= rhs + 1e-9 * (1.0 + rhs))
                }
                _ => None,
            };
            let member = c_l2.is_finite() && !sampled_series_diverges(c, &r);
            Ok(GeometricSplit {
                coefficient: None,
                residual: c.clone(),
                combination,
                residual_sup: None,
                combination_sup: None,
                residual_l2_sq: Some(c_l2),
                combination_l2_sq: Some(comb_l2),
                constants,
                bound_holds,
                member,
            })
        }
        Direction::AboveOne if num > den => {
            let coefficient = settled_value(c, !c.is_tail_free());
            let residual = match &coefficient {
                Some(a) => trim_derived(&c.sub(&ModeSeq::constant(a.clone())), c, 0),
                None => c.clone(),
            };
            let combination = trim_derived(&c.advance(1).sub(c), c, 1);
            let res_l2 = residual.weighted_l2_sq(&r);
            let comb_l2 = combination.weighted_l2_sq(&r);
            let cc = 1.0 / (1.0 - 1.0 / r.to_f64().sqrt());
            let bound_holds = match (&res_l2, &comb_l2) {
                _ if coefficient.is_none() => None,
                (NormValue::Finite(lhs), NormValue::Finite(rhs)) => {
                    let lhs = lhs.to_f64().sqrt();
                    let rhs = cc * rhs.to_f64().sqrt();
                    Some(lhs <= rhs + 1e-9 * (1.0 + rhs))
                }
                _ => None,
            };
            let member = coefficient.is_some()
                && res_l2.is_finite()
                && !sampled_series_diverges(&residual, &r);
            Ok(GeometricSplit {
                coefficient,
                residual,
                combination,
                residual_sup: None,
                combination_sup: None,
                residual_l2_sq: Some(res_l2),
                combination_l2_sq: Some(comb_l2),
                constants: (cc, 0.0),
                bound_holds,
                member,
            })
        }
        Direction::AboveOne => {
            // Profile extraction: weight by (den/num)^m and read the limit.
            let weighted = c.mul(&ModeSeq::geometric(S::one(), S::ratio(den, num)));
            let coefficient = settled_value(&weighted, !c.is_tail_free());
            let residual = match &coefficient {
                Some(a) => trim_derived(&c.sub(&ModeSeq::geometric(a.clone(), r.clone())), c, 0),
                None => c.clone(),
            };
            let combination = trim_derived(
                &c.advance(1)
                    .scale(&S::from_i64(den))
                    .sub(&c.scale(&S::from_i64(num))),
                c,
                1,
            );
            let den_s = S::from_i64(den);
            let res_sup = residual.sup_abs_weighted(1, &den_s);
            let comb_sup = combination.sup_abs_weighted(1, &den_s);
            let bound_holds = if coefficient.is_none() {
                None
            } else if res_sup.finite && comb_sup.finite {
                // Certified-interval comparison of sup ‖den^m residual‖ ≤
                // sup ‖den^m combination‖ (constant 1).
                Some(res_sup.lower <= comb_sup.upper)
            } else if comb_sup.finite {
                Some(false)
            } else {
                None
            };
            let member = coefficient.is_some()
                && res_sup.finite
                && !sampled_sup_diverges(&residual, &den_s);
            Ok(GeometricSplit {
                coefficient,
                residual,
                combination,
                residual_sup: Some(res_sup),
                combination_sup: Some(comb_sup),
                residual_l2_sq: None,
                combination_l2_sq: None,
                constants: (1.0, 0.0),
                bound_holds,
                member,
            })
        }
    }
}

/// Result of the affine-plus-geometric decomposition
/// `a_m = A₁ + A₂ (3/5)^m + a′_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSplit<S> {
    /// `A₁` (limit of the sequence).
    pub constant: Option<S>,
    /// `A₂` (coefficient of `(3/5)^m`).
    pub geometric: Option<S>,
    /// `a′` (the full sequence when extraction failed).
    pub residual: ModeSeq<S>,
    /// `sup_{m≥1} |5^m a′_m|`.
    pub residual_sup: SupBound<S>,
    /// `Σ_{m≥1} (25/3)^m a′²`.
    pub residual_l2_sq: NormValue<S>,
    /// `Σ_{m≥1} (25/3)^m (5a_{m+2} − 8a_{m+1} + 3a_m)²`.
    pub combination_l2_sq: NormValue<S>,
    /// `‖5^m a′‖_∞` finite (sup-class residual verdict).
    pub in_sup_class: bool,
    /// Square norm finite (square-class residual verdict).
    pub in_l2_class: bool,
    /// Square-norm inequality against the combination, verified
    /// numerically with the two-stage telescoping constant.
    pub bound_holds: Option<bool>,
}

/// Two-stage decomposition `a_m = A₁ + A₂(3/5)^m + a′_m`.
///
/// Stage one telescopes `d_m = (5/3)^m (a_{m+1} − a_m)` (limit `−(2/5)A₂`);
/// stage two telescopes `e_m = a_m + (5/2)(3/5)^m D` (limit `A₁`). The
/// combination `5a_{m+2} − 8a_{m+1} + 3a_m` annihilates both extracted
/// parts, and the two stages give
/// `‖(25/3)^{m/2} a′‖ ≤ (C_a C_b / 3) ‖(25/3)^{m/2} comb‖` with
/// `C_a = 1/(1−3^{−1/2})`, `C_b = 1/(1−(3/25)^{1/2})`.
pub fn decompose_affine<S: Scalar>(a: &ModeSeq<S>) -> AffineSplit<S> {
    let exact = !a.is_tail_free();
    let d = trim_derived(&ratio_53::<S>().mul(&a.advance(1).sub(a)), a, 1);
    let (constant, geometric) = match settled_value(&d, exact) {
        None => (None, None),
        Some(big_d) => {
            let a2 = S::ratio(-5, 2) * big_d.clone();
            let e = trim_derived(
                &a.add(&ModeSeq::geometric(S::ratio(5, 2) * big_d, S::ratio(3, 5))),
                a,
                0,
            );
            match settled_value(&e, exact) {
                None => (None, None),
                Some(a1) => (Some(a1), Some(a2)),
            }
        }
    };
    let residual = match (&constant, &geometric) {
        (Some(a1), Some(a2)) => trim_derived(
            &a.sub(&ModeSeq::constant(a1.clone()))
                .sub(&ModeSeq::geometric(a2.clone(), S::ratio(3, 5))),
            a,
            0,
        ),
        _ => a.clone(),
    };
    let combination = trim_derived(
        &a.advance(2)
            .scale(&S::from_i64(5))
            .sub(&a.advance(1).scale(&S::from_i64(8)))
            .add(&a.scale(&S::from_i64(3))),
        a,
        2,
    );
    let weight = S::ratio(25, 3);
    let residual_sup = residual.sup_abs_weighted(1, &S::from_i64(5));
    let residual_l2_sq = residual.weighted_l2_sq(&weight);
    let combination_l2_sq = combination.weighted_l2_sq(&weight);
    let c_total = {
        let ca = 1.0 / (1.0 - 1.0 / 3.0_f64.sqrt());
        let cb = 1.0 / (1.0 - (3.0 / 25.0_f64).sqrt());
        ca * cb / 3.0
    };
    let bound_holds = match (&residual_l2_sq, &combination_l2_sq) {
        _ if constant.is_none() => None,
        (NormValue::Finite(lhs), NormValue::Finite(rhs)) => {
            let lhs = lhs.to_f64().sqrt();
            let rhs = c_total * rhs.to_f64().sqrt();
            Some(lhs <= rhs + 1e-9 * (1.0 + rhs))
        }
        _ => None,
    };
    let in_sup_class = constant.is_some()
        && residual_sup.finite
        && !sampled_sup_diverges(&residual, &S::from_i64(5));
    let in_l2_class = constant.is_some()
        && residual_l2_sq.is_finite()
        && !sampled_series_diverges(&residual, &weight);
    AffineSplit {
        constant,
        geometric,
        residual,
        residual_sup,
        residual_l2_sq,
        combination_l2_sq,
        in_sup_class,
        in_l2_class,
        bound_holds,
    }
}

/// Result of the growth decomposition `η_m = A·5^m + η′_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSplit<S> {
    /// Coefficient `A` of the `5^m` mode.
    pub growth: Option<S>,
    /// `η′` (the full sequence when extraction failed).
    pub residual: ModeSeq<S>,
    /// `Σ_{m≥1} 3^m η′²`.
    pub residual_l2_sq: NormValue<S>,
    /// `Σ_{m≥1} 3^m (3η_{m+2} − 16η_{m+1} + 5η_m)²`.
    pub combination_l2_sq: NormValue<S>,
    /// `‖3^m η‖_Lip = sup_{m≥1} |3^m (3η_{m+1} − η_m)|` of the full
    /// sequence (constants have Lip norm zero).
    pub lip: SupBound<S>,
    /// Square-class residual verdict.
    pub in_l2_class: bool,
    /// Square-norm inequality
    /// `‖3^{m/2}η′‖ ≤ K₁|η₂ − 5η₁| + K₂‖3^{m/2} comb‖`, verified
    /// numerically with the telescoping constants.
    pub bound_holds: Option<bool>,
}

/// Growth decomposition `η_m = A·5^m + η′_m`, with the square norm of
/// `η′` controlled by the combination `3η_{m+2} − 16η_{m+1} + 5η_m`
/// (which annihilates both `5^m` and `3^{−m}` — hence the extra
/// first-entry term `|η₂ − 5η₁|` in the bound) and the exact Lipschitz
/// identity for `3^m η_m`.
pub fn decompose_growth<S: Scalar>(eta: &ModeSeq<S>) -> GrowthSplit<S> {
    let weighted = eta.mul(&ModeSeq::geometric(S::one(), S::ratio(1, 5)));
    let growth = settled_value(&weighted, !eta.is_tail_free());
    let residual = match &growth {
        Some(a) => trim_derived(
            &eta.sub(&ModeSeq::geometric(a.clone(), S::from_i64(5))),
            eta,
            0,
        ),
        None => eta.clone(),
    };
    let combination = trim_derived(
        &eta.advance(2)
            .scale(&S::from_i64(3))
            .sub(&eta.advance(1).scale(&S::from_i64(16)))
            .add(&eta.scale(&S::from_i64(5))),
        eta,
        2,
    );
    let three = S::from_i64(3);
    let residual_l2_sq = residual.weighted_l2_sq(&three);
    let combination_l2_sq = combination.weighted_l2_sq(&three);
    let lip = trim_derived(&eta.advance(1).scale(&three).sub(eta), eta, 1)
        .sup_abs_weighted(1, &three);
    // Constants: K = 1/(1−75^{−1/2}) from the growth stage, then the
    // below-one stage at ratio 1/3 contributes √(½) on the first entry
    // and 1/(√3−1) on the combination, scaled by the substitutions.
    let k75 = 1.0 / (1.0 - 1.0 / 75.0_f64.sqrt());
    let k1 = k75 / 5.0 * 3.0 * 0.5_f64.sqrt();
    let k2 = k75 / 5.0 / (3.0_f64.sqrt() - 1.0);
    let bound_holds = match (&residual_l2_sq, &combination_l2_sq) {
        _ if growth.is_none() => None,
        (NormValue::Finite(lhs), NormValue::Finite(rhs)) => {
            let lhs = lhs.to_f64().sqrt();
            let first = (eta.eval(2) - S::from_i64(5) * eta.eval(1)).abs().to_f64();
            let rhs = k1 * first + k2 * rhs.to_f64().sqrt();
            Some(lhs <= rhs + 1e-9 * (1.0 + rhs))
        }
        _ => None,
    };
    let in_l2_class =
        residual_l2_sq.is_finite() && !sampled_series_diverges(&residual, &three);
    GrowthSplit {
        growth,
        residual,
        residual_l2_sq,
        combination_l2_sq,
        lip,
        in_l2_class,
        bound_holds,
    }
}

/// A boundary trace: values and outward normal derivatives along the
/// axis, as exact sequences (index 0 = corner-pair closure, see the
/// module docs). Traces built from a global harmonic carry its corner
/// values so norm reports can include the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePair<S> {
    pub a: ModeSeq<S>,
    pub eta: ModeSeq<S>,
    pub harmonic_corners: Option<[S; 3]>,
}

impl<S: Scalar> TracePair<S> {
    pub fn new(a: ModeSeq<S>, eta: ModeSeq<S>) -> Self {
        TracePair { a, eta, harmonic_corners: None }
    }
}

/// Closed-form norm report for the trace of a global harmonic with
/// corner values `(b₀, b₁, b₂)` at `(q_0, q_1, q_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTraceReport<S> {
    /// Weight of the constant basis function, `A₁ = b₀`.
    pub constant_weight: S,
    /// Weight of the symmetric basis function `(0,1,1)`:
    /// `(1/2)(b₁ + b₂ − 2b₀)`.
    pub symmetric_weight: S,
    /// Weight of the skew basis function `(0,−1,1)`: `(1/2)(b₂ − b₁)`.
    pub skew_weight: S,
    /// Coefficient of `(3/5)^m` in `a_m` — equals `(4/3)` × the
    /// symmetric weight, because the symmetric basis function takes the
    /// value `4/3 · (3/5)^m` (not `(3/5)^m`) on the axis. Both
    /// conventions are reported; neither is "corrected" into the other.
    pub geometric_coefficient: S,
    /// Coefficient of `3^{−m}` in `η_m` under the outward-from-`Y_m`
    /// orientation: `6` × the skew weight. (Normalizations that rescale
    /// the normal derivative quote the bare skew weight here instead;
    /// this report always carries the directly computed value.)
    pub flux_coefficient: S,
    /// Sup-class norm in basis-weight convention:
    /// `|b₀| + (1/2)|b₁ + b₂ − 2b₀|`.
    pub sup_norm: S,
    /// Squared square-class norm in basis-weight convention:
    /// `|b₀|² + (1/4)|b₁ + b₂ − 2b₀|² + (1/8)|b₁ − b₂|²`.
    pub l2_norm_sq: S,
}

/// Norm and membership report for a trace pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceNorms<S> {
    /// Affine-plus-geometric split of the value sequence.
    pub affine: AffineSplit<S>,
    /// `‖3^m η‖_Lip` of the derivative sequence.
    pub lip: SupBound<S>,
    /// `Σ_{m≥1} 3^m η²`.
    pub eta_l2_sq: NormValue<S>,
    /// In the sup class (`‖5^m a′‖_∞` and the Lip norm both finite).
    pub in_sup_space: bool,
    /// In the square class (both square norms finite).
    pub in_l2_space: bool,
    /// `|A₁| + |A₂| + ‖5^m a′‖_∞ + ‖3^m η‖_Lip` as certified bounds.
    pub sup_space_norm: SupBound<S>,
    /// `|A₁|² + |A₂|² + Σ(25/3)^m a′² + Σ3^m η²`.
    pub l2_space_norm_sq: NormValue<S>,
    /// Closed forms, for traces tagged with harmonic corner values.
    pub harmonic: Option<HarmonicTraceReport<S>>,
}

/// Norms and membership verdicts of a trace pair in the sup and square
/// classes (sums and sups over `m ≥ 1`; the closure slot is excluded).
pub fn trace_membership<S: Scalar>(t: &TracePair<S>) -> TraceNorms<S> {
    let affine = decompose_affine(&t.a);
    let three = S::from_i64(3);
    let lip_seq = trim_derived(&t.eta.advance(1).scale(&three).sub(&t.eta), &t.eta, 1);
    let lip = lip_seq.sup_abs_weighted(1, &three);
    let eta_l2_sq = t.eta.weighted_l2_sq(&three);
    let lip_ok = lip.finite && !sampled_sup_diverges(&lip_seq, &three);
    let eta_ok = eta_l2_sq.is_finite() && !sampled_series_diverges(&t.eta, &three);
    let in_sup_space = affine.in_sup_class && lip_ok;
    let in_l2_space = affine.in_l2_class && eta_ok;
    let sup_space_norm = if in_sup_space {
        let a1 = affine.constant.clone().unwrap_or_else(S::zero).abs();
        let a2 = affine.geometric.clone().unwrap_or_else(S::zero).abs();
        SupBound {
            finite: true,
            lower: a1.clone() + a2.clone() + affine.residual_sup.lower.clone() + lip.lower.clone(),
            upper: a1 + a2 + affine.residual_sup.upper.clone() + lip.upper.clone(),
        }
    } else {
        SupBound { finite: false, lower: S::zero(), upper: S::zero() }
    };
    let l2_space_norm_sq = if in_l2_space {
        let a1 = affine.constant.clone().unwrap_or_else(S::zero);
        let a2 = affine.geometric.clone().unwrap_or_else(S::zero);
        match (&affine.residual_l2_sq, &eta_l2_sq) {
            (NormValue::Finite(r), NormValue::Finite(e)) => NormValue::Finite(
                a1.clone() * a1 + a2.clone() * a2 + r.clone() + e.clone(),
            ),
            _ => NormValue::Infinite,
        }
    } else {
        NormValue::Infinite
    };
    let harmonic = t.harmonic_corners.as_ref().map(|b| {
        let half = S::ratio(1, 2);
        let sym = half.clone() * (b[1].clone() + b[2].clone() - S::from_i64(2) * b[0].clone());
        let skew = half.clone() * (b[2].clone() - b[1].clone());
        HarmonicTraceReport {
            constant_weight: b[0].clone(),
            symmetric_weight: sym.clone(),
            skew_weight: skew.clone(),
            geometric_coefficient: S::ratio(4, 3) * sym.clone(),
            flux_coefficient: S::from_i64(6) * skew.clone(),
            sup_norm: b[0].abs() + sym.abs(),
            l2_norm_sq: b[0].clone() * b[0].clone()
                + sym.clone() * sym
                + half * skew.clone() * skew,
        }
    });
    TraceNorms {
        affine,
        lip,
        eta_l2_sq,
        in_sup_space,
        in_l2_space,
        sup_space_norm,
        l2_space_norm_sq,
        harmonic,
    }
}

/// A function assembled from constant-Laplacian pieces on the lateral
/// cells: values at the axis points, the left and right outer-edge
/// points, and the Laplacian constant per cell (left cells `Y_m`, right
/// cells `Z_m`, `m ≥ 1`). Continuity at shared corners is built into the
/// representation; normal-derivative matching is what `verify_gluing`
/// checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseBiharmonic<S> {
    axis: ModeSeq<S>,
    left: ModeSeq<S>,
    right: ModeSeq<S>,
    lap_left: ModeSeq<S>,
    lap_right: ModeSeq<S>,
}

impl<S: Scalar> PiecewiseBiharmonic<S> {
    /// Assemble from per-junction sequences. `axis`'s index 0 is the
    /// corner-pair closure slot; `left`/`right` carry the outer corner
    /// values at index 0 (`y_0 = q_1`, `z_0 = q_2`); the Laplacian
    /// sequences are meaningful from `m = 1` (index 0 is forced to 0).
    pub fn from_parts(
        axis: ModeSeq<S>,
        left: ModeSeq<S>,
        right: ModeSeq<S>,
        lap_left: ModeSeq<S>,
        lap_right: ModeSeq<S>,
    ) -> Self {
        PiecewiseBiharmonic {
            axis,
            left,
            right,
            lap_left: mask_seed(&lap_left),
            lap_right: mask_seed(&lap_right),
        }
    }

    pub fn axis(&self) -> &ModeSeq<S> {
        &self.axis
    }

    pub fn left(&self) -> &ModeSeq<S> {
        &self.left
    }

    pub fn right(&self) -> &ModeSeq<S> {
        &self.right
    }

    pub fn lap_left(&self) -> &ModeSeq<S> {
        &self.lap_left
    }

    pub fn lap_right(&self) -> &ModeSeq<S> {
        &self.lap_right
    }

    /// Common limit of the three value sequences — the value at the apex
    /// when the function is continuous there.
    pub fn apex_value(&self) -> Result<S> {
        let a = self.axis.limit()?;
        let l = self.left.limit()?;
        let r = self.right.limit()?;
        if a != l || a != r {
            return Err(Error::Consistency(format!(
                "apex limits disagree: axis {}, left {}, right {}",
                a.render(),
                l.render(),
                r.render()
            )));
        }
        Ok(a)
    }

    /// `sup_{m≥1} |Δu|` over all pieces.
    pub fn laplacian_sup(&self) -> SupBound<S> {
        let one = S::one();
        let a = self.lap_left.sup_abs_weighted(1, &one);
        let b = self.lap_right.sup_abs_weighted(1, &one);
        SupBound {
            finite: a.finite && b.finite,
            lower: max_of(a.lower, b.lower),
            upper: max_of(a.upper, b.upper),
        }
    }

    /// `‖Δu‖²_{L²} = Σ_{m≥1} 3^{−m} (C′² + C²)` (each level-`m` cell has
    /// measure `3^{−m}`).
    pub fn laplacian_l2_sq(&self) -> NormValue<S> {
        let third = S::ratio(1, 3);
        match (
            self.lap_left.weighted_l2_sq(&third),
            self.lap_right.weighted_l2_sq(&third),
        ) {
            (NormValue::Finite(a), NormValue::Finite(b)) => NormValue::Finite(a + b),
            _ => NormValue::Infinite,
        }
    }
}

/// One-sided outward normal derivative at the axis points, seen from the
/// side cells with values `side_m` and Laplacian constants `lap_m`:
/// `(5/3)^m (2·axis_m − side_m − side_{m−1}) + lap_m/3^{m+1}`.
fn one_sided_axis_flux<S: Scalar>(
    axis: &ModeSeq<S>,
    side: &ModeSeq<S>,
    lap: &ModeSeq<S>,
) -> ModeSeq<S> {
    let cell = axis
        .scale(&S::from_i64(2))
        .sub(side)
        .sub(&side.delay(&[S::zero()]));
    ratio_53::<S>()
        .mul(&cell)
        .add(&ratio_13::<S>().mul(lap).scale(&S::ratio(1, 3)))
}

/// Sum of the outward normal derivatives at an outer-edge junction
/// point `s_m`, where the level-`m` and level-`(m+1)` cells meet.
fn junction_residual<S: Scalar>(
    axis: &ModeSeq<S>,
    side: &ModeSeq<S>,
    lap: &ModeSeq<S>,
) -> ModeSeq<S> {
    let coarse_cell = side
        .scale(&S::from_i64(2))
        .sub(axis)
        .sub(&side.delay(&[S::zero()]));
    let coarse = ratio_53::<S>()
        .mul(&coarse_cell)
        .add(&ratio_13::<S>().mul(lap).scale(&S::ratio(1, 3)));
    let fine_cell = side
        .scale(&S::from_i64(2))
        .sub(&axis.advance(1))
        .sub(&side.advance(1));
    let fine = ratio_53::<S>()
        .mul(&fine_cell)
        .scale(&S::ratio(5, 3))
        .add(&ratio_13::<S>().mul(&lap.advance(1)).scale(&S::ratio(1, 9)));
    coarse.add(&fine)
}

/// Gluing check: normal-derivative matching residuals at the three
/// junction families, as exact sequences (index 0 masked — there are no
/// junctions at level 0).
#[derive(Debug, Clone, PartialEq)]
pub struct GluingReport<S> {
    /// Residual at the axis points (left cell + right cell).
    pub axis: ModeSeq<S>,
    /// Residual at the left outer-edge points (consecutive left cells).
    pub left: ModeSeq<S>,
    /// Residual at the right outer-edge points.
    pub right: ModeSeq<S>,
    /// All three residual sequences are identically zero.
    pub all_zero: bool,
    /// Largest residual magnitude over `1 ≤ m ≤ window`.
    pub max_abs: S,
}

pub fn verify_gluing<S: Scalar>(u: &PiecewiseBiharmonic<S>, window: usize) -> GluingReport<S> {
    let axis = mask_seed(
        &one_sided_axis_flux(&u.axis, &u.left, &u.lap_left)
            .add(&one_sided_axis_flux(&u.axis, &u.right, &u.lap_right)),
    );
    let left = mask_seed(&junction_residual(&u.axis, &u.left, &u.lap_left));
    let right = mask_seed(&junction_residual(&u.axis, &u.right, &u.lap_right));
    let all_zero = axis.is_zero() && left.is_zero() && right.is_zero();
    let mut max_abs = S::zero();
    for seq in [&axis, &left, &right] {
        for v in seq.window(1, window.max(1)) {
            max_abs = max_of(max_abs, v.abs());
        }
    }
    GluingReport { axis, left, right, all_zero, max_abs }
}

/// Trace of the global harmonic with corner values `(b₀, b₁, b₂)`:
/// `a_m = b₀ + (2/3)(b₁ + b₂ − 2b₀)(3/5)^m` and
/// `η_m = −3(b₁ − b₂)·3^{−m}`, both exact for all `m ≥ 0` (the closure
/// slot included).
pub fn restrict_harmonic<S: Scalar>(corners: &[S; 3]) -> TracePair<S> {
    let two = S::from_i64(2);
    let a = ModeSeq::constant(corners[0].clone()).add(&ModeSeq::geometric(
        S::ratio(2, 3) * (corners[1].clone() + corners[2].clone() - two * corners[0].clone()),
        S::ratio(3, 5),
    ));
    let eta = ModeSeq::geometric(
        S::from_i64(-3) * (corners[1].clone() - corners[2].clone()),
        S::ratio(1, 3),
    );
    TracePair { a, eta, harmonic_corners: Some(corners.clone()) }
}

/// Trace of the continuous half-domain solution with the given boundary
/// data: the value sequence is the data generator itself (its index-0
/// value is exactly the corner-pair closure — a consequence of the
/// continuous solution's junction value), and the derivative sequence is
/// the flux sequence with its seed.
pub fn restrict_bvp<S: Scalar>(data: &BoundarySeq<S>) -> Result<TracePair<S>> {
    Ok(TracePair {
        a: data.data.clone(),
        eta: eta_from_data(data)?,
        harmonic_corners: None,
    })
}

/// Trace of a piecewise constant-Laplacian function: values read off the
/// axis sequence, derivatives from the left cells' corner values and
/// Laplacian constants, and the closure slot recovered from the outer
/// corner pair.
pub fn restrict_piecewise<S: Scalar>(u: &PiecewiseBiharmonic<S>) -> TracePair<S> {
    let eta_raw = one_sided_axis_flux(u.axis(), u.left(), u.lap_left());
    let eta0 =
        S::from_i64(4) * (u.right().eval(0) - u.left().eval(0)) - eta_raw.eval(1);
    let eta = ModeSeq::with_tail(vec![eta0], eta_raw);
    let a0 = (S::from_i64(4) * (u.left().eval(0) + u.right().eval(0))
        - S::from_i64(5) * u.axis().eval(1))
        * S::ratio(1, 3);
    let a = ModeSeq::with_tail(vec![a0], u.axis().clone());
    TracePair { a, eta, harmonic_corners: None }
}

/// The mirror-symmetric and skew parts of the extension formulas:
/// `sym_m = (1/8)(5a_{m+1} + 3a_m)`,
/// `skew_m = (1/8)(3/5)^m (η_{m+1} + η_m)`.
fn extension_parts<S: Scalar>(a: &ModeSeq<S>, eta: &ModeSeq<S>) -> (ModeSeq<S>, ModeSeq<S>) {
    let eighth = S::ratio(1, 8);
    let sym = a
        .advance(1)
        .scale(&S::from_i64(5))
        .add(&a.scale(&S::from_i64(3)))
        .scale(&eighth);
    let skew = ratio_35::<S>()
        .mul(&eta.advance(1).add(eta))
        .scale(&eighth);
    (sym, skew)
}

/// The per-cell Laplacian constants of the extension formulas:
/// `sym_m = 5^m (3/8)(5a_{m+1} − 8a_m + 3a_{m−1})`,
/// `skew_m = 3^m (1/8)(3η_{m+1} − 16η_m + 5η_{m−1})` (both for `m ≥ 1`).
fn extension_laplacians<S: Scalar>(a: &ModeSeq<S>, eta: &ModeSeq<S>) -> (ModeSeq<S>, ModeSeq<S>) {
    let comb_a = a
        .advance(1)
        .scale(&S::from_i64(5))
        .sub(&a.scale(&S::from_i64(8)))
        .add(&a.delay(&[S::zero()]).scale(&S::from_i64(3)));
    let comb_eta = eta
        .advance(1)
        .scale(&S::from_i64(3))
        .sub(&eta.scale(&S::from_i64(16)))
        .add(&eta.delay(&[S::zero()]).scale(&S::from_i64(5)));
    let sym = pow5::<S>().mul(&comb_a).scale(&S::ratio(3, 8));
    let skew = pow3::<S>().mul(&comb_eta).scale(&S::ratio(1, 8));
    (sym, skew)
}

/// Extension operator: the piecewise constant-Laplacian function whose
/// trace is exactly `t` (the right inverse of [`restrict_piecewise`]).
/// Its values are
/// `u(y_m) = (1/8)(5a_{m+1}+3a_m) − (1/8)(3/5)^m(η_{m+1}+η_m)` (mirror
/// `+` for `u(z_m)`), and its Laplacian constants combine the two
/// second-order combinations with weights `5^m(3/8)` and `3^m(1/8)`. All
/// normal-derivative matching conditions hold identically.
pub fn extend_trace<S: Scalar>(t: &TracePair<S>) -> PiecewiseBiharmonic<S> {
    let (sym, skew) = extension_parts(&t.a, &t.eta);
    let (sym_lap, skew_lap) = extension_laplacians(&t.a, &t.eta);
    PiecewiseBiharmonic::from_parts(
        t.a.clone(),
        sym.sub(&skew),
        sym.add(&skew),
        sym_lap.sub(&skew_lap),
        sym_lap.add(&skew_lap),
    )
}

/// A function on the closed left half described along the axis: values
/// at the axis points and left outer-edge points, the Laplacian constant
/// per left cell, and the outward flux sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfFunction<S> {
    pub axis: ModeSeq<S>,
    pub left: ModeSeq<S>,
    pub lap_left: ModeSeq<S>,
    pub eta: ModeSeq<S>,
}

impl<S: Scalar> HalfFunction<S> {
    /// The continuous half-domain solution for the given boundary data
    /// (harmonic: zero Laplacian), with its flux sequence.
    pub fn from_bvp(data: &BoundarySeq<S>) -> Result<Self> {
        let sol = ContinuousSolution::solve(data)?;
        Ok(HalfFunction {
            axis: data.data.clone(),
            left: sol.u_y().clone(),
            lap_left: ModeSeq::zero(),
            eta: eta_from_data(data)?,
        })
    }

    /// Assemble from raw sequences; the flux is computed from the cell
    /// data, seeded at the closure slot with `eta_seed` (which only
    /// influences the mirror corner value and the first mirror cell).
    pub fn from_parts(
        axis: ModeSeq<S>,
        left: ModeSeq<S>,
        lap_left: ModeSeq<S>,
        eta_seed: S,
    ) -> Self {
        let lap_left = mask_seed(&lap_left);
        let raw = one_sided_axis_flux(&axis, &left, &lap_left);
        let eta = ModeSeq::with_tail(vec![eta_seed], raw);
        HalfFunction { axis, left, lap_left, eta }
    }

    pub fn trace(&self) -> TracePair<S> {
        TracePair::new(self.axis.clone(), self.eta.clone())
    }

    /// `‖Δu‖²_{L²}` over the half domain: `Σ_{m≥1} 3^{−m} C′²`.
    pub fn laplacian_l2_sq(&self) -> NormValue<S> {
        self.lap_left.weighted_l2_sq(&S::ratio(1, 3))
    }
}

/// A half-to-whole extension together with its membership report.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfExtension<S> {
    pub function: PiecewiseBiharmonic<S>,
    /// Trace lies in the sup class, so the extension has a bounded
    /// Laplacian. The extension is constructed either way.
    pub in_sup_domain: bool,
    /// Trace lies in the square class, so the extension's Laplacian is
    /// square-integrable.
    pub in_l2_domain: bool,
    pub norms: TraceNorms<S>,
}

/// Half-to-whole extension: keeps the function on the left half and
/// fills each mirror cell with the constant-Laplacian piece whose corner
/// values are `ū(z_m) = (1/8)(5a_{m+1}+3a_m) + (1/8)(3/5)^m(η_{m+1}+η_m)`
/// and whose Laplacian constant combines the two second-order
/// combinations. Normal-derivative matching holds identically at the
/// axis and right outer-edge points; on the left the input's own
/// junction structure is preserved.
pub fn extend_half<S: Scalar>(u: &HalfFunction<S>) -> HalfExtension<S> {
    let (sym, skew) = extension_parts(&u.axis, &u.eta);
    let (sym_lap, skew_lap) = extension_laplacians(&u.axis, &u.eta);
    let function = PiecewiseBiharmonic::from_parts(
        u.axis.clone(),
        u.left.clone(),
        sym.add(&skew),
        u.lap_left.clone(),
        sym_lap.add(&skew_lap),
    );
    let norms = trace_membership(&u.trace());
    HalfExtension {
        function,
        in_sup_domain: norms.in_sup_space,
        in_l2_domain: norms.in_l2_space,
        norms,
    }
}

/// The naive mirror extension of a half-domain solution: same values and
/// zero Laplacian on both sides. Harmonic on each half, but the normal
/// derivatives at the axis double instead of cancelling, so the gluing
/// residual there is `2η_m` — nonzero unless the solution is symmetric.
pub fn even_reflection<S: Scalar>(data: &BoundarySeq<S>) -> Result<PiecewiseBiharmonic<S>> {
    let sol = ContinuousSolution::solve(data)?;
    Ok(PiecewiseBiharmonic::from_parts(
        data.data.clone(),
        sol.u_y().clone(),
        sol.u_y().clone(),
        ModeSeq::zero(),
        ModeSeq::zero(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num::{One, Zero};

    fn rat(p: i64, q: i64) -> Rational {
        Rational::ratio(p, q)
    }

    fn geometric(c: Rational, r: Rational) -> ModeSeq<Rational> {
        ModeSeq::geometric(c, r)
    }

    /// A trace well inside both classes, with an explicit ripple at the
    /// start so nothing is accidentally a pure generator.
    fn generic_trace() -> TracePair<Rational> {
        let a = ModeSeq::with_tail(
            vec![rat(1, 2), rat(-1, 3)],
            ModeSeq::constant(rat(3, 2))
                .add(&geometric(rat(-5, 4), rat(3, 5)))
                .add(&geometric(rat(7, 8), rat(1, 5))),
        );
        let eta = ModeSeq::with_tail(
            vec![rat(-2, 1), rat(1, 4)],
            geometric(rat(4, 3), rat(1, 3)).add(&geometric(rat(-1, 6), rat(1, 5))),
        );
        TracePair::new(a, eta)
    }

    #[test]
    fn affine_split_extracts_exactly() {
        // Pure affine + geometric: zero residual.
        let a = ModeSeq::constant(rat(2, 1)).add(&geometric(rat(3, 1), rat(3, 5)));
        let split = decompose_affine(&a);
        assert_eq!(split.constant, Some(rat(2, 1)));
        assert_eq!(split.geometric, Some(rat(3, 1)));
        assert!(split.residual.is_zero());
        assert!(split.in_sup_class && split.in_l2_class);

        // With a fast tail: the residual is recovered term by term.
        let residual = geometric(rat(1, 1), rat(1, 5));
        let b = a.add(&residual);
        let split = decompose_affine(&b);
        assert_eq!(split.constant, Some(rat(2, 1)));
        assert_eq!(split.geometric, Some(rat(3, 1)));
        assert!(split.residual.sub(&residual).is_zero());
        // sup_{m≥1} 5^m · 5^{−m} = 1, attained everywhere.
        assert_eq!(split.residual_sup.lower, Rational::one());
        assert_eq!(split.residual_sup.upper, Rational::one());
        // Σ (25/3)^m 5^{−2m} = Σ 3^{−m} = 1/2.
        assert_eq!(split.residual_l2_sq, NormValue::Finite(rat(1, 2)));
        assert_eq!(split.bound_holds, Some(true));
        // Reassembly is exact.
        let rebuilt = ModeSeq::constant(split.constant.unwrap())
            .add(&geometric(split.geometric.unwrap(), rat(3, 5)))
            .add(&split.residual);
        assert!(rebuilt.sub(&b).is_zero());

        // The trace of the symmetric harmonic: (0, 4/3, 0).
        let h = geometric(rat(4, 3), rat(3, 5));
        let split = decompose_affine(&h);
        assert_eq!(split.constant, Some(Rational::zero()));
        assert_eq!(split.geometric, Some(rat(4, 3)));
        assert!(split.residual.is_zero());
    }

    #[test]
    fn affine_split_detects_from_samples() {
        // Truncated samples of 2 + 3(3/5)^m + 5^{−m}, no generator tail.
        let full = ModeSeq::constant(rat(2, 1))
            .add(&geometric(rat(3, 1), rat(3, 5)))
            .add(&geometric(rat(1, 1), rat(1, 5)));
        let sampled = ModeSeq::from_values(full.window(0, 16));
        let split = decompose_affine(&sampled);
        // Window readings absorb the leftover decay, so the extracted
        // parts are near the true values rather than exact.
        let a1 = split.constant.clone().expect("limit detected");
        let a2 = split.geometric.clone().expect("profile detected");
        assert!((a1 - rat(2, 1)).abs() < rat(1, 10000));
        assert!((a2 - rat(3, 1)).abs() < rat(1, 1000));
        assert!(split.in_sup_class && split.in_l2_class);

        // Slowly decaying samples: no limit, not in either class.
        let slow: Vec<Rational> = (0..16)
            .map(|m| if m == 0 { Rational::zero() } else { rat(1, m as i64) })
            .collect();
        let split = decompose_affine(&ModeSeq::from_values(slow));
        assert_eq!(split.constant, None);
        assert!(!split.in_sup_class && !split.in_l2_class);
    }

    #[test]
    fn geometric_split_profile_route() {
        // a_m = A (3/5)^m + c 5^{−m}: the profile route recovers A and the
        // two sup norms take the documented exact values |c| and 2|c|.
        let a = geometric(rat(7, 3), rat(3, 5)).add(&geometric(rat(-2, 1), rat(1, 5)));
        let split = decompose(&a, 3, 5, Direction::AboveOne).unwrap();
        assert_eq!(split.coefficient, Some(rat(7, 3)));
        assert!(split
            .residual
            .sub(&geometric(rat(-2, 1), rat(1, 5)))
            .is_zero());
        let res = split.residual_sup.unwrap();
        let comb = split.combination_sup.unwrap();
        assert_eq!((res.lower, res.upper), (rat(2, 1), rat(2, 1)));
        assert_eq!((comb.lower, comb.upper), (rat(4, 1), rat(4, 1)));
        assert_eq!(split.bound_holds, Some(true));
        assert!(split.member);
    }

    #[test]
    fn geometric_split_limit_route_and_failure() {
        // A constant sequence has itself as limit with zero residual.
        let c = ModeSeq::constant(rat(5, 1));
        let split = decompose(&c, 3, 1, Direction::AboveOne).unwrap();
        assert_eq!(split.coefficient, Some(rat(5, 1)));
        assert!(split.residual.is_zero());
        assert!(split.member);

        // 1/m samples against the (3/5)^m profile: the weighted sequence
        // (5/3)^m/m blows up, so detection fails and the verdict is out.
        let slow: Vec<Rational> = (0..16)
            .map(|m| if m == 0 { Rational::zero() } else { rat(1, m as i64) })
            .collect();
        let split = decompose(&ModeSeq::from_values(slow), 3, 5, Direction::AboveOne).unwrap();
        assert_eq!(split.coefficient, None);
        assert!(!split.member);
    }

    #[test]
    fn below_one_route_compares_norms() {
        let c = geometric(rat(1, 1), rat(1, 2));
        let split = decompose(&c, 1, 3, Direction::BelowOne).unwrap();
        // Σ 3^{−m} 2^{−2m} = Σ 12^{−m} = 1/11.
        assert_eq!(split.residual_l2_sq, Some(NormValue::Finite(rat(1, 11))));
        assert_eq!(split.bound_holds, Some(true));
        assert!(split.member);
        // Growing sequences have an infinite weighted norm.
        let g = geometric(rat(1, 1), rat(3, 1));
        let split = decompose(&g, 1, 3, Direction::BelowOne).unwrap();
        assert_eq!(split.residual_l2_sq, Some(NormValue::Infinite));
        assert!(!split.member);
    }

    #[test]
    fn growth_split_examples() {
        // η = −6/3^m: nothing to extract, and 3^m η_m is constant, so the
        // Lip norm vanishes.
        let eta = geometric(rat(-6, 1), rat(1, 3));
        let split = decompose_growth(&eta);
        assert_eq!(split.growth, Some(Rational::zero()));
        assert!(split.residual.sub(&eta).is_zero());
        assert_eq!((split.lip.lower, split.lip.upper), (Rational::zero(), Rational::zero()));
        assert!(split.in_l2_class);

        // η = 5^m: pure growth.
        let split = decompose_growth(&geometric(rat(1, 1), rat(5, 1)));
        assert_eq!(split.growth, Some(Rational::one()));
        assert!(split.residual.is_zero());

        // η = 3^{−m} + 2·5^m: both parts recovered exactly; the
        // combination annihilates both, so the bound rests on the
        // first-entry term.
        let eta = geometric(rat(1, 1), rat(1, 3)).add(&geometric(rat(2, 1), rat(5, 1)));
        let split = decompose_growth(&eta);
        assert_eq!(split.growth, Some(rat(2, 1)));
        assert!(split.residual.sub(&geometric(rat(1, 1), rat(1, 3))).is_zero());
        assert_eq!(split.residual_l2_sq, NormValue::Finite(rat(1, 2)));
        assert!(split.combination_l2_sq == NormValue::Finite(Rational::zero()));
        assert_eq!(split.bound_holds, Some(true));
    }

    #[test]
    fn membership_reports_both_harmonic_conventions() {
        // Corners (0, 1, 1): symmetric harmonic.
        let t = restrict_harmonic(&[Rational::zero(), Rational::one(), Rational::one()]);
        assert!(t.a.sub(&geometric(rat(4, 3), rat(3, 5))).is_zero());
        assert!(t.eta.is_zero());
        let norms = trace_membership(&t);
        assert!(norms.in_sup_space && norms.in_l2_space);
        // Decomposition convention: the geometric coefficient is 4/3.
        assert_eq!(norms.affine.geometric, Some(rat(4, 3)));
        assert_eq!(norms.l2_space_norm_sq, NormValue::Finite(rat(16, 9)));
        // Basis-weight convention: closed-form norms are both 1.
        let h = norms.harmonic.unwrap();
        assert_eq!(h.symmetric_weight, Rational::one());
        assert_eq!(h.geometric_coefficient, rat(4, 3));
        assert_eq!(h.sup_norm, Rational::one());
        assert_eq!(h.l2_norm_sq, Rational::one());

        // A skew component shows the two flux conventions: the actual
        // coefficient of 3^{−m} is 6 × the skew weight.
        let t = restrict_harmonic(&[Rational::zero(), Rational::one(), -Rational::one()]);
        let h = trace_membership(&t).harmonic.unwrap();
        assert_eq!(h.skew_weight, -Rational::one());
        assert_eq!(h.flux_coefficient, rat(-6, 1));
        assert!(t.eta.sub(&geometric(rat(-6, 1), rat(1, 3))).is_zero());
        assert_eq!(h.l2_norm_sq, rat(1, 2));
    }

    #[test]
    fn membership_rejects_slow_data() {
        let slow: Vec<Rational> = (0..16)
            .map(|m| if m == 0 { Rational::zero() } else { rat(1, m as i64) })
            .collect();
        let t = TracePair::new(ModeSeq::from_values(slow), ModeSeq::zero());
        let norms = trace_membership(&t);
        assert!(!norms.in_sup_space);
        assert!(!norms.in_l2_space);
        assert!(!norms.sup_space_norm.finite);
        assert_eq!(norms.l2_space_norm_sq, NormValue::Infinite);
    }

    #[test]
    fn harmonic_restrictions_agree_between_routes() {
        // The global harmonic with corners (0, C₁, C₂) restricted to the
        // left half is the continuous solution with data a₀ = C₁,
        // a_m = (2/3)(C₁+C₂)(3/5)^m — both routes must give the same
        // trace, sequences compared exactly.
        let (c1, c2) = (rat(1, 3), rat(-2, 5));
        let via_harmonic = restrict_harmonic(&[Rational::zero(), c1.clone(), c2.clone()]);
        let data = BoundarySeq::new(
            c1.clone(),
            geometric(rat(2, 3) * (c1 + c2), rat(3, 5)),
        );
        let via_bvp = restrict_bvp(&data).unwrap();
        assert!(via_harmonic.a.sub(&via_bvp.a).is_zero());
        assert!(via_harmonic.eta.sub(&via_bvp.eta).is_zero());
    }

    #[test]
    fn closure_slot_restates_the_corner_pair() {
        // For the continuous solution, the trace's m = 0 entries satisfy
        // the corner-pair inversion identities: 3a₀* = 8u(q₁) − 5a₁ + η₁ + η₀.
        let data = BoundarySeq::new(
            rat(-3, 4),
            ModeSeq::with_tail(
                vec![rat(2, 1), rat(5, 2)],
                ModeSeq::constant(rat(2, 1))
                    .add(&geometric(rat(-5, 7), rat(3, 5)))
                    .add(&geometric(rat(1, 3), rat(-1, 4))),
            ),
        );
        let t = restrict_bvp(&data).unwrap();
        let lhs = rat(3, 1) * t.a.eval(0);
        let rhs = rat(8, 1) * data.a0.clone() - rat(5, 1) * t.a.eval(1)
            + t.eta.eval(1)
            + t.eta.eval(0);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn extension_is_right_inverse_of_restriction() {
        let t = generic_trace();
        let u = extend_trace(&t);
        let r = restrict_piecewise(&u);
        assert!(r.a.sub(&t.a).is_zero(), "values recovered exactly");
        assert!(r.eta.sub(&t.eta).is_zero(), "derivatives recovered exactly");
    }

    #[test]
    fn extension_examples() {
        // Geometric values, zero derivative: the harmonic interpolant.
        let t = TracePair::new(geometric(Rational::one(), rat(3, 5)), ModeSeq::zero());
        let u = extend_trace(&t);
        let expected = geometric(rat(3, 4), rat(3, 5));
        assert!(u.left().sub(&expected).is_zero());
        assert!(u.right().sub(&expected).is_zero());
        assert!(u.lap_left().is_zero());
        assert!(u.lap_right().is_zero());

        // Zero values, pure derivative data: a skew extension.
        let eta = geometric(rat(2, 1), rat(1, 4));
        let t = TracePair::new(ModeSeq::zero(), eta.clone());
        let u = extend_trace(&t);
        assert!(u.right().sub(&u.left().neg()).is_zero());
        // Laplacian split: C_m − C′_m = (1/4)·3^m(3η_{m+1} − 16η_m + 5η_{m−1}).
        let comb = eta
            .advance(1)
            .scale(&rat(3, 1))
            .sub(&eta.scale(&rat(16, 1)))
            .add(&eta.delay(&[Rational::zero()]).scale(&rat(5, 1)));
        let expected = mask_seed(&pow3::<Rational>().mul(&comb).scale(&rat(1, 4)));
        assert!(u.lap_right().sub(u.lap_left()).sub(&expected).is_zero());
    }

    #[test]
    fn gluing_residuals_vanish_for_trace_extensions() {
        let u = extend_trace(&generic_trace());
        let report = verify_gluing(&u, 12);
        assert!(report.all_zero, "matching holds identically");
        assert!(report.max_abs.is_zero());
        // Continuity at the apex: all three limits agree.
        assert_eq!(u.apex_value().unwrap(), rat(3, 2));
    }

    #[test]
    fn laplacian_bounds_on_trace_extensions() {
        // Pointwise |Δu| ≤ 9 ‖5^m a′‖_∞ + 2 ‖3^m η‖_Lip: check the window
        // maximum against the certified norm bounds, exactly.
        let t = generic_trace();
        let norms = trace_membership(&t);
        let u = extend_trace(&t);
        let budget = rat(9, 1) * norms.affine.residual_sup.upper.clone()
            + rat(2, 1) * norms.lip.upper.clone();
        for m in 1..=40usize {
            assert!(u.lap_left().eval(m).abs() <= budget);
            assert!(u.lap_right().eval(m).abs() <= budget);
        }
        assert!(u.laplacian_sup().finite);
    }

    #[test]
    fn half_extension_of_harmonic_data_is_the_global_harmonic() {
        // Data a₀ = C₁, a_m = (2/3)(C₁+C₂)(3/5)^m comes from the global
        // harmonic with corners (0, C₁, C₂); the extension must fill in
        // exactly that harmonic: mirror values (C₁+C₂)/2 (3/5)^m −
        // (C₁−C₂)/2 · 5^{−m} and zero Laplacian.
        let (c1, c2) = (rat(2, 1), rat(-1, 2));
        let data = BoundarySeq::new(
            c1.clone(),
            geometric(rat(2, 3) * (c1.clone() + c2.clone()), rat(3, 5)),
        );
        let hf = HalfFunction::from_bvp(&data).unwrap();
        let ext = extend_half(&hf);
        assert!(ext.function.lap_right().is_zero());
        let expected = geometric(
            (c1.clone() + c2.clone()) * rat(1, 2),
            rat(3, 5),
        )
        .add(&geometric((c1 - c2) * rat(-1, 2), rat(1, 5)));
        assert!(ext.function.right().sub(&expected).is_zero());
        // The mirror corner value is C₂.
        assert_eq!(ext.function.right().eval(0), rat(-1, 2));
        assert!(ext.in_sup_domain && ext.in_l2_domain);
        // All matching residuals vanish (left cells too: harmonic data).
        assert!(verify_gluing(&ext.function, 10).all_zero);
    }

    #[test]
    fn half_extension_square_norm_identity() {
        // ‖Δ(extension)‖² = ‖Δu‖²(half) + Σ 3^{−m} C_m², exactly.
        let axis = ModeSeq::with_tail(
            vec![rat(0, 1), rat(1, 2)],
            geometric(rat(1, 1), rat(1, 5)),
        );
        let left = geometric(rat(3, 4), rat(1, 3));
        let lap_left = geometric(rat(1, 2), rat(1, 3));
        let hf = HalfFunction::from_parts(axis, left, lap_left, rat(1, 4));
        let ext = extend_half(&hf);
        let half = hf.laplacian_l2_sq().value().unwrap().clone();
        let mirror = ext
            .function
            .lap_right()
            .weighted_l2_sq(&rat(1, 3))
            .value()
            .unwrap()
            .clone();
        assert_eq!(
            ext.function.laplacian_l2_sq(),
            NormValue::Finite(half + mirror)
        );
        // Matching at the axis and the mirror edge holds identically even
        // for this synthetic input (the left-edge junctions need not).
        let report = verify_gluing(&ext.function, 10);
        assert!(report.axis.is_zero());
        assert!(report.right.is_zero());
    }

    #[test]
    fn even_reflection_counterexample() {
        // The skew-data solution: u ≡ 0 on the axis, u(y_m) = 5^{−m}.
        // Its naive mirror image doubles the axis flux: residual −12/3^m,
        // in particular −4 at the first axis point.
        let data = BoundarySeq::new(Rational::one(), ModeSeq::zero());
        let u = even_reflection(&data).unwrap();
        let report = verify_gluing(&u, 12);
        assert!(!report.all_zero);
        let expected = mask_seed(&geometric(rat(-12, 1), rat(1, 3)));
        assert!(report.axis.sub(&expected).is_zero());
        assert_eq!(report.axis.eval(1), rat(-4, 1));
        // Each half alone is harmonic, so the edge junctions still match.
        assert!(report.left.is_zero());
        assert!(report.right.is_zero());
    }

    #[test]
    fn half_extension_flags_traces_outside_the_classes() {
        // Slow axis samples: the extension is still produced, but both
        // membership flags are off.
        let slow: Vec<Rational> = (0..16)
            .map(|m| if m == 0 { Rational::zero() } else { rat(1, m as i64) })
            .collect();
        let hf = HalfFunction::from_parts(
            ModeSeq::from_values(slow),
            ModeSeq::zero(),
            ModeSeq::zero(),
            Rational::zero(),
        );
        let ext = extend_half(&hf);
        assert!(!ext.in_sup_domain);
        assert!(!ext.in_l2_domain);
    }
}
