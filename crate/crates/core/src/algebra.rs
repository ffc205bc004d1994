//! Exact rational verification of the linear systems behind the constraint
//! manifold and of the nonexistence threshold.
//!
//! Unknowns are always ordered `(α, β, μ, δ)` with
//! `α = a∫|Du|²`, `β = ∫u²`, `μ = b(∫|Du|²)²`, `δ = ∫|u|^{p+1}`, and `k = I(u)`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub type Matrix4 = [[Rational; 4]; 4];

/// `n/d` as a [`Rational`]. Panics if `d = 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact determinant by fraction-exact Gaussian elimination with pivot search.
pub fn det4(m: &Matrix4) -> Rational {
    let mut a: Vec<Vec<Rational>> = m.iter().map(|r| r.to_vec()).collect();
    let mut det = Rational::one();
    for col in 0..4 {
        let Some(piv) = (col..4).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..4 {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..4 {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Exact solution of `m·x = rhs`.
pub fn solve4(m: &Matrix4, rhs: &[Rational; 4]) -> Result<[Rational; 4]> {
    let mut a: Vec<Vec<Rational>> = m.iter().zip(rhs).map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect()).collect();
    for col in 0..4 {
        let piv = (col..4).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        a.swap(piv, col);
        let p = a[col][col].clone();
        for c in col..5 {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..4 {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..5 {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    Ok([a[0][4].clone(), a[1][4].clone(), a[2][4].clone(), a[3][4].clone()])
}

fn energy_row(p: &Rational) -> [Rational; 4] {
    [rat(1, 2), rat(1, 2), rat(1, 4), -(Rational::one() / (p + int(1)))]
}

fn constraint_row(p: &Rational) -> [Rational; 4] {
    [rat(3, 2), rat(5, 2), rat(3, 2), -((p + int(4)) / (p + int(1)))]
}

/// The coefficient matrix `A` of the Lagrange-multiplier system.
pub fn matrix_a(lambda: &Rational, p: &Rational) -> Result<Matrix4> {
    if (p + int(1)).is_zero() {
        return Err(Error::DivisionByZero("p = -1"));
    }
    let l3 = lambda * int(3) - int(1);
    let l5 = lambda * int(5) - int(1);
    let l6 = lambda * int(6) - int(1);
    let lp = (p + int(4)) * lambda - int(1);
    Ok([
        energy_row(p),
        constraint_row(p),
        [l3.clone(), l5.clone(), l6.clone(), -lp.clone()],
        [l3 / int(2), l5 * rat(3, 2), l6 / int(2), -(lp * int(3) / (p + int(1)))],
    ])
}

/// `λ(p−1)(2p−1−9pλ)/(8(p+1))`.
pub fn det_a_closed_form(lambda: &Rational, p: &Rational) -> Result<Rational> {
    if (p + int(1)).is_zero() {
        return Err(Error::DivisionByZero("p = -1"));
    }
    Ok(lambda * (p - int(1)) * (p * int(2) - int(1) - p * lambda * int(9)) / ((p + int(1)) * int(8)))
}

/// Determinant of `A` by elimination and by the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct DetA {
    pub eliminated: Rational,
    pub closed_form: Rational,
}

impl DetA {
    pub fn consistent(&self) -> bool {
        self.eliminated == self.closed_form
    }
}

pub fn det_a(lambda: &Rational, p: &Rational) -> Result<DetA> {
    Ok(DetA { eliminated: det4(&matrix_a(lambda, p)?), closed_form: det_a_closed_form(lambda, p)? })
}

/// `(μ, δ)` from the energy and constraint equations for given `k, α, β`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step2 {
    pub mu: Rational,
    pub delta: Rational,
    /// For `μ > 0, p > 2`: whether `(α+β)(p−1) < β(p−1) + α(p+1) < 2k(p+4)` holds. `None` when vacuous.
    pub implication: Option<bool>,
}

pub fn step2_solve(k: &Rational, alpha: &Rational, beta: &Rational, p: &Rational) -> Result<Step2> {
    let pm2 = p - int(2);
    if pm2.is_zero() {
        return Err(Error::DivisionByZero("p = 2"));
    }
    if (p + int(1)).is_zero() {
        return Err(Error::DivisionByZero("p = -1"));
    }
    let mu = (k * int(4) * (p + int(4)) - alpha * int(2) * (p + int(1)) - beta * int(2) * (p - int(1))) / &pm2;
    let delta = (k * int(6) - alpha * rat(3, 2) - beta / int(2)) / &pm2 * (p + int(1));
    let implication = (mu.is_positive() && p > &int(2)).then(|| {
        let left = (alpha + beta) * (p - int(1));
        let mid = beta * (p - int(1)) + alpha * (p + int(1));
        let right = k * int(2) * (p + int(4));
        left < mid && mid < right
    });
    Ok(Step2 { mu, delta, implication })
}

/// Outcome of one of the exact systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemVerdict {
    /// `(α, β, μ, δ)` when the system is regular.
    pub solution: Option<[Rational; 4]>,
    /// Which positivity requirement fails, if any.
    pub contradiction: Option<&'static str>,
    pub det: Rational,
    /// Whether elimination reproduced the closed forms.
    pub closed_form_match: bool,
}

fn step3_matrix(p: &Rational) -> Matrix4 {
    let p1 = p + int(1);
    let p4 = p + int(4);
    [
        energy_row(p),
        constraint_row(p),
        [int(3), int(5), int(6), -p4.clone()],
        [rat(3, 2), rat(15, 2), int(3), -(p4 * int(3) / p1)],
    ]
}

/// Closed-form solution `(10k(p+4)/(3p), 2k(p−5)(p+4)/(p(p−1)), −20k(p+4)/(3p), −20k(p+1)/(p(p−1)))`.
pub fn step3_closed_form(k: &Rational, p: &Rational) -> [Rational; 4] {
    let p1 = p + int(1);
    let p4 = p + int(4);
    let pm1 = p - int(1);
    [
        k * int(10) * &p4 / (p * int(3)),
        k * int(2) * (p - int(5)) * &p4 / (p * &pm1),
        -(k * int(20) * &p4 / (p * int(3))),
        -(k * int(20) * p1 / (p * pm1)),
    ]
}

/// Exact solution of the system obtained by supposing `G′(u) = 0` on `M`.
pub fn step3_solve(k: &Rational, p: &Rational) -> Result<SystemVerdict> {
    if p.is_zero() || p.is_one() || (p + int(1)).is_zero() {
        return Err(Error::SingularSystem);
    }
    let m = step3_matrix(p);
    let det = det4(&m);
    if det.is_zero() {
        return Err(Error::SingularSystem);
    }
    let x = solve4(&m, &[k.clone(), Rational::zero(), Rational::zero(), Rational::zero()])?;
    let closed_form_match = x == step3_closed_form(k, p);
    let contradiction = (x[2].is_negative() && x[3].is_negative()).then_some("mu < 0 and delta < 0 but both must be positive");
    Ok(SystemVerdict { solution: Some(x), contradiction, det, closed_form_match })
}

/// Closed-form `(β, δ)` for the regular case of the multiplier system.
pub fn step4_closed_form(lambda: &Rational, p: &Rational, k: &Rational) -> (Rational, Rational) {
    let den = (p - int(1)) * (p * int(2) - int(1) - p * lambda * int(9));
    let beta = -(k * int(18) * (p - int(5)) * ((p + int(4)) * lambda - int(1)) / &den);
    let delta = k * int(36) * (p + int(1)) * (lambda * int(5) - int(1)) / den;
    (beta, delta)
}

/// `(2p−1)/(9p)`, the nonzero root of `det A` in `λ`.
pub fn critical_lambda(p: &Rational) -> Rational {
    (p * int(2) - int(1)) / (p * int(9))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step4Case {
    /// `λ = 0`: the multiplier vanishes, which is the desired conclusion.
    ZeroMultiplier,
    /// `det A ≠ 0`.
    Regular {
        solution: [Rational; 4],
        closed_form_match: bool,
        /// The expected sign pattern for this λ holds.
        sign_claim: bool,
    },
    /// `λ = (2p−1)/(9p)`.
    Degenerate {
        /// Rows 3 and 4 of `A` coincide with the reduced equations.
        reduced_rows_match: bool,
        /// `row3 − 2·row4` is a nonzero multiple of `β + (p−2)δ`.
        relation_derived: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step4Verdict {
    pub case: Step4Case,
    pub det: DetA,
    /// `1/6 < (2p−1)/(9p) < 1/5`.
    pub bracket: bool,
    pub contradiction: Option<&'static str>,
}

impl Step4Verdict {
    /// Every exact check attached to this case passed.
    pub fn checks_pass(&self) -> bool {
        let case_ok = match &self.case {
            Step4Case::ZeroMultiplier => true,
            Step4Case::Regular { closed_form_match, sign_claim, .. } => *closed_form_match && *sign_claim,
            Step4Case::Degenerate { reduced_rows_match, relation_derived } => *reduced_rows_match && *relation_derived,
        };
        case_ok && self.det.consistent() && self.bracket
    }
}

pub fn step4_case_analysis(lambda: &Rational, p: &Rational, k: &Rational) -> Result<Step4Verdict> {
    if !k.is_positive() {
        return Err(Error::OutOfHypothesis("k must be positive"));
    }
    if !(p > &int(2) && p < &int(5)) {
        return Err(Error::OutOfHypothesis("p must lie in (2, 5)"));
    }
    let det = det_a(lambda, p)?;
    let lc = critical_lambda(p);
    let bracket = rat(1, 6) < lc && lc < rat(1, 5);
    if lambda.is_zero() {
        return Ok(Step4Verdict { case: Step4Case::ZeroMultiplier, det, bracket, contradiction: None });
    }
    let a = matrix_a(lambda, p)?;
    if *lambda == lc {
        let p1 = p + int(1);
        let p3 = p * int(3);
        let p9 = p * int(9);
        let p6 = p * int(6);
        let reduced = [
            [-(&p1 / &p3), (p - int(5)) / &p9, (p - int(2)) / &p3, -(&p1 * (p - int(2)) * int(2) / &p9)],
            [-(&p1 / &p6), (p - int(5)) / &p6, (p - int(2)) / &p6, -((p - int(2)) * int(2) / &p3)],
        ];
        let reduced_rows_match = a[2] == reduced[0] && a[3] == reduced[1];
        let combo: Vec<Rational> = (0..4).map(|c| &reduced[0][c] - &reduced[1][c] * int(2)).collect();
        let relation_derived = combo[0].is_zero()
            && combo[2].is_zero()
            && !combo[1].is_zero()
            && &combo[3] / &combo[1] == p - int(2);
        return Ok(Step4Verdict {
            case: Step4Case::Degenerate { reduced_rows_match, relation_derived },
            det,
            bracket,
            contradiction: Some("beta + (p-2) delta = 0 with beta, delta > 0"),
        });
    }
    let x = solve4(&a, &[k.clone(), Rational::zero(), Rational::zero(), Rational::zero()])?;
    let (beta_cf, delta_cf) = step4_closed_form(lambda, p, k);
    let closed_form_match = x[1] == beta_cf && x[3] == delta_cf;
    let sign_claim = if *lambda >= rat(1, 5) || *lambda < lc { !x[3].is_positive() } else { x[1].is_negative() };
    let contradiction = if !x[3].is_positive() {
        Some("delta <= 0 but must be positive")
    } else if !x[1].is_positive() {
        Some("beta <= 0 but must be positive")
    } else {
        None
    };
    Ok(Step4Verdict { case: Step4Case::Regular { solution: x, closed_form_match, sign_claim }, det, bracket, contradiction })
}

/// `λ₀ = 1/(4b(a−1)C³)`.
pub fn nonexistence_threshold(a: &Rational, b: &Rational, c: &Rational) -> Result<Rational> {
    if a <= &int(1) {
        return Err(Error::OutOfHypothesis("a must exceed 1"));
    }
    if !b.is_positive() || !c.is_positive() {
        return Err(Error::OutOfHypothesis("b and C must be positive"));
    }
    Ok(Rational::one() / (b * (a - int(1)) * c * c * c * int(4)))
}

/// `(∫|u|³)² ≤ 4(a−1)bλ(∫|Du|² + V u²)³`, the condition for `g(t) ≥ 0` on `t ≥ 0`.
pub fn g_nonneg_condition(a: &Rational, b: &Rational, lambda: &Rational, norm_sq: &Rational, l3_int: &Rational) -> Result<bool> {
    if a <= &int(1) {
        return Err(Error::OutOfHypothesis("a must exceed 1"));
    }
    Ok(l3_int * l3_int <= (a - int(1)) * b * lambda * norm_sq * norm_sq * norm_sq * int(4))
}

/// Whether the embedding bound `∫|u|³ ≤ C^{−3/2}‖u‖³` forces the `g` condition
/// for every `u`, i.e. `1/C³ ≤ 4(a−1)bλ`, equivalently `λ ≥ λ₀`.
pub fn g_condition_from_embedding(a: &Rational, b: &Rational, lambda: &Rational, c: &Rational) -> Result<bool> {
    if a <= &int(1) {
        return Err(Error::OutOfHypothesis("a must exceed 1"));
    }
    Ok(Rational::one() / (c * c * c) <= (a - int(1)) * b * lambda * int(4))
}

/// Falsification search for `h(t) = t² + t³ − t^{p+1} ≥ 0` on `t ∈ [10⁻⁶, 10⁶]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCheck {
    /// `h(t) > 0` at every sampled `t`, evaluated as `t²(1 + t − t^{p−1})`.
    pub grid_positive: bool,
    /// `t^{p−1} ≤ max(1, t)` at every sampled `t`, the step behind the factorized bound.
    pub factor_bound: bool,
    pub samples: usize,
}

impl HCheck {
    pub fn holds(&self) -> bool {
        self.grid_positive && self.factor_bound
    }
}

pub fn h_nonneg_check(p: &Rational) -> Result<HCheck> {
    if !(p > &int(1) && p <= &int(2)) {
        return Err(Error::OutOfHypothesis("p must lie in (1, 2]"));
    }
    let pf = to_f64(p);
    const SAMPLES: usize = 4001;
    let (mut grid_positive, mut factor_bound) = (true, true);
    for k in 0..SAMPLES {
        let t = crate::math::powf(10.0, -6.0 + 12.0 * k as f64 / (SAMPLES - 1) as f64);
        let tp = crate::math::powf(t, pf - 1.0);
        grid_positive &= t * t * (1.0 + t - tp) > 0.0;
        factor_bound &= tp <= t.max(1.0) * (1.0 + 4.0 * f64::EPSILON);
    }
    Ok(HCheck { grid_positive, factor_bound, samples: SAMPLES })
}

/// Nearest `f64` to a rational.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational equal to a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}
