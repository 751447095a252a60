//! Closed-form evaluators: regime classification, partition-function
//! estimates and bounds, the Poisson limit law of the minority side, threshold
//! windows, and the elementary inequalities (binomial concentration, truncated
//! exponentials) they rest on.
//!
//! Everything that can overflow is returned as a [`LogValue`].

use std::f64::consts::{E, LN_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::{log_sum_exp, LogValue};

/// Finite stand-ins for the asymptotic placeholders in the regime boundaries.
/// None of the defaults is canonical.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    /// Replaces a quantity tending to infinity in `1 ± ω/d`.
    pub omega_threshold: f64,
    /// Replaces the bounded constant in `|λ - 1| <= O/d`.
    pub big_o_constant: f64,
    /// The constant `c` of the lower cutoff `c log d / d^(1/3)`.
    pub c_lambda4: f64,
    /// The positive margin added to `√2` in the lower edge of R3.
    pub log_margin: f64,
}

impl Default for RegimeParams {
    fn default() -> Self {
        RegimeParams {
            omega_threshold: 10.0,
            big_o_constant: 10.0,
            c_lambda4: 10.0,
            log_margin: 1.0,
        }
    }
}

impl RegimeParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_threshold,
            self.big_o_constant,
            self.c_lambda4,
            self.log_margin,
        ];
        if all.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Precondition("regime parameters must be positive".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    R1,
    R2,
    R3,
    R4,
    /// Below the lower cutoff of R4.
    BelowR4,
    /// Above R4's upper edge but below R3's lower edge (the two edges use
    /// different stand-ins for their vanishing and positive margins).
    Gap,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::R1 => "R1",
            Regime::R2 => "R2",
            Regime::R3 => "R3",
            Regime::R4 => "R4",
            Regime::BelowR4 => "below_R4",
            Regime::Gap => "gap_R4_R3",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R1" => Ok(Regime::R1),
            "R2" => Ok(Regime::R2),
            "R3" => Ok(Regime::R3),
            "R4" => Ok(Regime::R4),
            "below_R4" => Ok(Regime::BelowR4),
            "gap_R4_R3" => Ok(Regime::Gap),
            other => Err(Error::UnknownRegime(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub primary: Regime,
    /// Every range containing λ, in priority order R1 > R2 > R3 > R4.
    pub matches: Vec<Regime>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveLambda)
    }
}

fn ln_mu(lambda: f64, d: u32) -> f64 {
    (lambda / 2.0).ln() + d as f64 * (2.0 / (1.0 + lambda)).ln()
}

/// `μ(λ, d) = (λ/2)(2/(1+λ))^d`.
pub fn minority_intensity(lambda: f64, d: u32) -> Result<LogValue> {
    check_lambda(lambda)?;
    Ok(LogValue::from_ln(ln_mu(lambda, d)))
}

/// `c log d / d^(1/3)`.
pub fn r4_lower_cutoff(d: u32, p: &RegimeParams) -> f64 {
    let d = d as f64;
    p.c_lambda4 * d.ln() / d.cbrt()
}

/// `√2 - 1 + (√2 + 1/log d) log d / d`.
pub fn r4_upper_edge(d: u32) -> f64 {
    let df = d as f64;
    let ln_d = df.ln();
    if d <= 1 {
        return f64::INFINITY;
    }
    SQRT_2 - 1.0 + (SQRT_2 + 1.0 / ln_d) * ln_d / df
}

/// `√2 - 1 + (√2 + margin) log d / d`.
pub fn r3_lower_edge(d: u32, p: &RegimeParams) -> f64 {
    let df = d as f64;
    SQRT_2 - 1.0 + (SQRT_2 + p.log_margin) * df.ln() / df
}

pub fn classify_regime(lambda: f64, d: u32, p: &RegimeParams) -> Result<Classification> {
    check_lambda(lambda)?;
    p.validate()?;
    let df = d as f64;
    let mut matches = Vec::new();
    if lambda >= 1.0 + p.omega_threshold / df {
        matches.push(Regime::R1);
    }
    if (lambda - 1.0).abs() <= p.big_o_constant / df {
        matches.push(Regime::R2);
    }
    if r3_lower_edge(d, p) <= lambda && lambda <= 1.0 - p.omega_threshold / df {
        matches.push(Regime::R3);
    }
    let cutoff = r4_lower_cutoff(d, p);
    if cutoff <= lambda && lambda <= r4_upper_edge(d) {
        matches.push(Regime::R4);
    }
    let primary = match matches.first() {
        Some(r) => *r,
        None if lambda < cutoff => Regime::BelowR4,
        None => Regime::Gap,
    };
    Ok(Classification { primary, matches })
}

fn ln_one_plus_side(lambda: f64, d: u32) -> f64 {
    // 2^(d-1) log(1+λ)
    ((d as f64 - 1.0) * LN_2).exp() * lambda.ln_1p()
}

/// Leading-order `Z_λ(Q_d)` in each regime, with vanishing corrections
/// dropped.
pub fn z_estimate(lambda: f64, d: u32, regime: Regime) -> Result<LogValue> {
    check_lambda(lambda)?;
    let base = ln_one_plus_side(lambda, d);
    let mu = ln_mu(lambda, d).exp();
    let ln = match regime {
        Regime::R1 => LN_2 + base,
        Regime::R2 | Regime::R3 => LN_2 + base + mu,
        Regime::R4 => base + mu,
        other => return Err(Error::UnknownRegime(other.to_string())),
    };
    Ok(LogValue::from_ln(ln))
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Poisson(γ_k) mass at `c`, `γ_k = e^(-k/2)/2`.
pub fn poisson_min_pmf(k: f64, c: u64) -> f64 {
    let gamma = 0.5 * (-k / 2.0).exp();
    if c == 0 {
        return (-gamma).exp();
    }
    (c as f64 * gamma.ln() - gamma - ln_factorial(c)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub regime: Regime,
    /// `λ 2^(d-1) / (1+λ)`.
    pub max_side_center: LogValue,
    pub max_side_halfwidth: LogValue,
    pub min_side_low: LogValue,
    pub min_side_high: LogValue,
    pub m_used: Option<u64>,
    pub epsilon_used: f64,
}

/// Windows for the majority and minority side sizes in the primary regime of
/// `(λ, d)`. In R2 the minority side has a limit law rather than a window, so
/// the reported window is `[0, ∞)`.
pub fn threshold_windows(
    lambda: f64,
    d: u32,
    epsilon: f64,
    m: Option<u64>,
    p: &RegimeParams,
) -> Result<WindowReport> {
    let class = classify_regime(lambda, d, p)?;
    threshold_windows_in(class.primary, lambda, d, epsilon, m)
}

/// As [`threshold_windows`] with the regime given explicitly.
pub fn threshold_windows_in(
    regime: Regime,
    lambda: f64,
    d: u32,
    epsilon: f64,
    m: Option<u64>,
) -> Result<WindowReport> {
    check_lambda(lambda)?;
    if !(epsilon > 0.0) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let df = d as f64;
    let ln_d = df.ln();
    let mu_ln = ln_mu(lambda, d);
    let mu = LogValue::from_ln(mu_ln);
    let center = LogValue::from_ln(lambda.ln() + (df - 1.0) * LN_2 - lambda.ln_1p());
    // 2^(d/2) sqrt(log d)
    let wide = LogValue::from_ln(df / 2.0 * LN_2 + 0.5 * ln_d.ln());
    let (halfwidth, low, high, m_used) = match regime {
        Regime::R1 => (wide, LogValue::ZERO, LogValue::ZERO, None),
        Regime::R2 => (wide, LogValue::ZERO, LogValue::infinity(), None),
        Regime::R3 => {
            let mu_f = mu_ln.exp();
            let spread_sq = (2.0 + epsilon) * mu_f * mu_ln;
            let spread = LogValue::from_f64(spread_sq.max(0.0).sqrt());
            (wide, mu.saturating_sub(&spread), mu.add(&spread), None)
        }
        Regime::R4 => {
            let m = match m {
                Some(m) if m >= 1 => m,
                Some(_) => return Err(Error::Precondition("m must be at least 1".into())),
                None => solve_m(lambda, d, DEFAULT_M_TOLERANCE)?,
            };
            // d (log d) (2/(1+λ))^d
            let hw = LogValue::from_ln(ln_d + ln_d.ln() + df * (2.0 / (1.0 + lambda)).ln());
            let ln_m = (m as f64).ln();
            let low = if m == 1 {
                LogValue::ZERO
            } else {
                LogValue::from_ln(mu_ln - (4.0 * ln_m).ln())
            };
            let high = LogValue::from_ln(1.0 + 2.0 * ln_m + mu_ln);
            (hw, low, high, Some(m))
        }
        other => return Err(Error::UnknownRegime(other.to_string())),
    };
    Ok(WindowReport {
        regime,
        max_side_center: center,
        max_side_halfwidth: halfwidth,
        min_side_low: low,
        min_side_high: high,
        m_used,
        epsilon_used: epsilon,
    })
}

pub const DEFAULT_M_TOLERANCE: f64 = 0.01;

/// Natural log of `(e d²)^m λ^(m+1) (1+λ)^(2m(m+1)) 2^d / (1+λ)^(d(m+1))`.
pub fn m_condition_ln(lambda: f64, d: u32, m: u64) -> f64 {
    let (df, mf) = (d as f64, m as f64);
    let l1 = lambda.ln_1p();
    mf * (1.0 + 2.0 * df.ln()) + (mf + 1.0) * lambda.ln() + 2.0 * mf * (mf + 1.0) * l1 + df * LN_2
        - df * (mf + 1.0) * l1
}

/// Smallest `m < d/√(log d)` whose size condition is at most `tolerance`.
/// λ above R4's upper edge is rejected.
pub fn solve_m(lambda: f64, d: u32, tolerance: f64) -> Result<u64> {
    check_lambda(lambda)?;
    if !(tolerance > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    if d < 2 {
        return Err(Error::MSolveFailure(format!("d={d} leaves no admissible m")));
    }
    if lambda > r4_upper_edge(d) {
        return Err(Error::MSolveFailure(format!(
            "λ={lambda} lies above the upper edge {:.6} of R4 at d={d}",
            r4_upper_edge(d)
        )));
    }
    let df = d as f64;
    let limit = df / df.ln().sqrt();
    let target = tolerance.ln();
    let mut m = 1u64;
    while (m as f64) < limit {
        if m_condition_ln(lambda, d, m) <= target {
            return Ok(m);
        }
        m += 1;
    }
    Err(Error::MSolveFailure(format!(
        "no m < {limit:.3} meets tolerance {tolerance} at λ={lambda}, d={d}"
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub bound: LogValue,
    pub e1: f64,
    pub e2: f64,
}

/// Lower bound on `Z_λ(Q_d)` from sets whose minority side has between `f`
/// and `ell` isolated vertices and whose majority side is near its mean.
pub fn partition_lower_bound(lambda: f64, d: u32, f: u64, ell: u64) -> Result<LowerBoundReport> {
    check_lambda(lambda)?;
    if d < 2 {
        return Err(Error::Range("needs d >= 2".into()));
    }
    let df = d as f64;
    let quarter = ((df - 2.0) * LN_2).exp();
    if f > ell {
        return Err(Error::Range(format!("f={f} exceeds ell={ell}")));
    }
    if ell as f64 * df * df > quarter {
        return Err(Error::Range(format!("ell={ell} exceeds 2^(d-2)/d^2 at d={d}")));
    }
    let mu_ln = ln_mu(lambda, d);
    let series = log_sum_exp((f..=ell).map(|k| LogValue::from_ln(k as f64 * mu_ln - ln_factorial(k))));
    let ellf = ell as f64;
    let ln = LN_2 + ln_one_plus_side(lambda, d) + series.ln() - ellf * ellf * df * df / quarter
        + (1.0 - 2.0 / (df * df)).ln();
    let half = ((df - 1.0) * LN_2).exp();
    let frac = lambda / (1.0 + lambda);
    let spread = (df.ln() * (half - df * f as f64)).sqrt();
    Ok(LowerBoundReport {
        bound: LogValue::from_ln(ln),
        e1: frac * (half - df * ellf) - spread,
        e2: frac * (half - df * f as f64) + spread,
    })
}

/// Upper bound `2(1+λ)^(2^(d-1)) exp{μ + λ²(1+λ)² d² 2^d / (1+λ)^(2d)}`.
/// Evaluated for every λ > 0; it is proved only above R4's lower cutoff
/// (see [`upper_bound_applies`]).
pub fn partition_upper_bound(lambda: f64, d: u32) -> Result<LogValue> {
    check_lambda(lambda)?;
    let df = d as f64;
    let l1 = lambda.ln_1p();
    let mu = ln_mu(lambda, d).exp();
    let correction = (2.0 * lambda.ln() + 2.0 * l1 + 2.0 * df.ln() + df * LN_2 - 2.0 * df * l1).exp();
    Ok(LogValue::from_ln(LN_2 + ln_one_plus_side(lambda, d) + mu + correction))
}

pub fn upper_bound_applies(lambda: f64, d: u32, p: &RegimeParams) -> bool {
    lambda > r4_lower_cutoff(d, p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoeffdingReport {
    pub lo: u64,
    pub hi: u64,
    pub exact_sum: BigRational,
    pub bound: LogValue,
    pub ok: bool,
    /// `ln(2e^(-2δ²m)) - ln(excluded fraction)`, infinite when nothing is
    /// excluded.
    pub log_margin: f64,
}

/// Binomial mass of `j` in `[⌊m(p-δ)⌋, ⌈m(p+δ)⌉]`, `p = λ/(1+λ)`, weighted by
/// `λ^j`, against `(1 - 2 e^(-2δ²m)) (1+λ)^m`.
pub fn hoeffding_check(lambda: &BigRational, delta: &BigRational, m: u64) -> Result<HoeffdingReport> {
    if !lambda.is_positive() {
        return Err(Error::NonpositiveLambda);
    }
    if !delta.is_positive() {
        return Err(Error::Precondition("δ must be positive".into()));
    }
    let one = BigRational::one();
    let p = lambda / (&one + lambda);
    let mq = BigRational::from_integer(BigInt::from(m));
    let clamp = |x: BigInt| -> u64 {
        if x.is_negative() {
            0
        } else {
            x.to_u64().unwrap_or(u64::MAX).min(m)
        }
    };
    let lo = clamp((&mq * (&p - delta)).floor().to_integer());
    let hi = clamp((&mq * (&p + delta)).ceil().to_integer());
    // λ = a/b: Σ λ^j C(m,j) = Σ a^j b^(m-j) C(m,j) / b^m, all in integers.
    let (a, b) = (lambda.numer().clone(), lambda.denom().clone());
    let mut a_pow = vec![BigInt::one(); m as usize + 1];
    let mut b_pow = vec![BigInt::one(); m as usize + 1];
    for j in 1..=m as usize {
        a_pow[j] = &a_pow[j - 1] * &a;
        b_pow[j] = &b_pow[j - 1] * &b;
    }
    let mut numer = BigInt::zero();
    let mut binom = BigInt::one();
    for j in 0..=m {
        if j >= lo && j <= hi {
            numer += &binom * &a_pow[j as usize] * &b_pow[(m - j) as usize];
        }
        binom = binom * BigInt::from(m - j) / BigInt::from(j + 1);
    }
    let full_numer = num_traits::pow(&a + &b, m as usize);
    let exact_sum = BigRational::new(numer.clone(), b_pow[m as usize].clone());
    let lam = crate::rational::to_f64(lambda);
    let del = crate::rational::to_f64(delta);
    let exponent = -2.0 * del * del * m as f64;
    let factor = 1.0 - 2.0 * exponent.exp();
    let bound = if factor <= 0.0 {
        LogValue::ZERO
    } else {
        LogValue::from_ln(factor.ln() + m as f64 * lam.ln_1p())
    };
    // exact_sum >= (1 - 2e^x)(1+λ)^m  iff  the excluded fraction is <= 2e^x;
    // the fraction is exact, so only 2e^x is rounded.
    let excluded = BigRational::new(&full_numer - &numer, full_numer);
    let log_margin = if excluded.is_zero() {
        f64::INFINITY
    } else {
        LN_2 + exponent - LogValue::from_rational(&excluded).ln()
    };
    let ok = log_margin >= 0.0;
    Ok(HoeffdingReport {
        lo,
        hi,
        exact_sum,
        bound,
        ok,
        log_margin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExp {
    /// `e_D(x) = Σ_{k<=D} x^k/k!`.
    pub value: LogValue,
    /// `exp{D log(ex/D) + log(D+1)}`, present when `D <= x`.
    pub lower_bound_rhs: Option<LogValue>,
    /// `e^x - e_D(x)`, present when `D > x`.
    pub upper_tail: Option<LogValue>,
    /// `exp{D log(ex/D) + log(x/(D-x))}`, present when `D > x`.
    pub upper_bound_rhs: Option<LogValue>,
}

fn ln_term(x: f64, k: u64, ln_fact: f64) -> LogValue {
    if k == 0 {
        LogValue::ONE
    } else {
        LogValue::from_ln(k as f64 * x.ln() - ln_fact)
    }
}

/// `D log(ex/D)`, zero at `D = 0`.
fn d_log_ex_over_d(d: u64, x: f64) -> f64 {
    if d == 0 {
        0.0
    } else {
        let df = d as f64;
        df * (E * x / df).ln()
    }
}

/// Log-space sum of `x^k/k!` for `k` in `[from, to]`.
pub fn poisson_terms_ln(x: f64, from: u64, to: u64) -> LogValue {
    let mut ln_fact = ln_factorial(from);
    let mut terms = Vec::with_capacity((to.saturating_sub(from) + 1) as usize);
    for k in from..=to {
        if k > from {
            ln_fact += (k as f64).ln();
        }
        terms.push(ln_term(x, k, ln_fact));
    }
    log_sum_exp(terms)
}

/// `e^x - e_D(x)` summed directly over `k > D`.
fn tail_ln(d: u64, x: f64) -> LogValue {
    let mut ln_fact = ln_factorial(d + 1);
    let mut terms = Vec::new();
    let mut k = d + 1;
    let mut peak = f64::NEG_INFINITY;
    loop {
        let t = ln_term(x, k, ln_fact);
        peak = peak.max(t.ln());
        terms.push(t);
        if (k as f64) > x && t.ln() < peak - 50.0 {
            break;
        }
        k += 1;
        ln_fact += (k as f64).ln();
    }
    log_sum_exp(terms)
}

pub fn truncated_exp(d: u64, x: f64) -> Result<TruncatedExp> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Range("x must be positive".into()));
    }
    let value = poisson_terms_ln(x, 0, d);
    let head = d_log_ex_over_d(d, x);
    let (lower_bound_rhs, upper_tail, upper_bound_rhs) = if (d as f64) <= x {
        (Some(LogValue::from_ln(head + ((d + 1) as f64).ln())), None, None)
    } else {
        (
            None,
            Some(tail_ln(d, x)),
            Some(exp_tail_bound(d, x)?),
        )
    };
    Ok(TruncatedExp {
        value,
        lower_bound_rhs,
        upper_tail,
        upper_bound_rhs,
    })
}

/// `exp{z log(ex/z) + log(x/(z-x))}`, defined for `z > x`.
pub fn exp_tail_bound(z: u64, x: f64) -> Result<LogValue> {
    let zf = z as f64;
    if zf <= x {
        return Err(Error::Range(format!("tail bound needs z > x (z={z}, x={x})")));
    }
    Ok(LogValue::from_ln(d_log_ex_over_d(z, x) + (x / (zf - x)).ln()))
}

/// Fraction of `e^x` carried by `x^k/k!` for `⌊(1-ε₁)x⌋ < k <= ⌈(1+ε₂)x⌉`,
/// `ε_i = sqrt(c_i log x / x)`.
pub fn central_mass_fraction(x: f64, c1: f64, c2: f64) -> f64 {
    let eps1 = (c1 * x.ln() / x).sqrt();
    let eps2 = (c2 * x.ln() / x).sqrt();
    let lo = ((1.0 - eps1) * x).floor().max(0.0) as u64;
    let hi = ((1.0 + eps2) * x).ceil() as u64;
    (poisson_terms_ln(x, lo + 1, hi).ln() - x).exp()
}
