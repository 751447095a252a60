use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logvalue::{log_sum_exp, LogValue};

/// `ln Σ_{i ≤ k} C(n, i)` with `n` rounded up and `k` rounded down;
/// `-inf` when `k < 0`.
pub fn binomial_sum_ln(n: f64, k: f64) -> f64 {
    if k < 0.0 || k.is_nan() {
        return f64::NEG_INFINITY;
    }
    let n = n.max(0.0).ceil();
    let top = k.floor().min(n) as u64;
    let mut term = 0.0;
    let mut terms = Vec::with_capacity(top as usize + 1);
    terms.push(LogValue::from_ln(0.0));
    for i in 1..=top {
        term += (n - (i - 1) as f64).ln() - (i as f64).ln();
        terms.push(LogValue::from_ln(term));
    }
    log_sum_exp(terms).ln()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveLambda)
    }
}

/// `max{(1+λ)^{g−γt}, C(3dg, ≤ 2tψ/(d−ψ)+γt)(1+λ)^{g−t}}`.
pub fn reconstruction_bound(d: u32, g: u64, t: u64, psi: f64, gamma: f64, lambda: f64) -> Result<LogValue> {
    check_lambda(lambda)?;
    let df = d as f64;
    if !(psi >= 1.0 && 2.0 * psi <= df) {
        return Err(Error::Precondition(format!("ψ={psi} outside [1, d/2]")));
    }
    let floor = -2.0 * psi / (df - psi);
    if !(gamma <= 1.0 && gamma > floor) {
        return Err(Error::Precondition(format!("γ={gamma} outside ({floor}, 1]")));
    }
    let l1 = (1.0 + lambda).ln();
    let (g, t) = (g as f64, t as f64);
    let first = (g - gamma * t) * l1;
    let second = binomial_sum_ln(3.0 * df * g, 2.0 * t * psi / (df - psi) + gamma * t) + (g - t) * l1;
    Ok(LogValue::from_ln(first.max(second)))
}

/// Size bound for the first-stage family.
#[allow(clippy::too_many_arguments)]
pub fn family_bound_a1(d: u32, g: u64, t: u64, phi: f64, c: f64, size_y: u64, m_phi: f64) -> Result<LogValue> {
    let df = d as f64;
    if d < 2 || !(phi >= 1.0 && phi <= df - 1.0) {
        return Err(Error::Precondition(format!("φ={phi} outside [1, d−1]")));
    }
    let ld = df.ln();
    let p = c * ld / (phi * df);
    if !(c > 0.0 && p < 1.0) || size_y == 0 {
        return Err(Error::Precondition(format!("C log d/(φd) = {p} is not in (0, 1)")));
    }
    let (g, t) = (g as f64, t as f64);
    let exponent = 78.0 * g * c * ld * ld / (phi * df)
        + 78.0 * g * ld * (-p * m_phi).exp()
        + 78.0 * t * ld * ld / (df - phi);
    let ln = (size_y as f64).ln()
        + exponent
        + binomial_sum_ln(3.0 * g * c * ld / phi, 3.0 * t * c * ld / phi)
        + binomial_sum_ln(df * g, df * t / (phi * (df - phi)));
    Ok(LogValue::from_ln(ln))
}

/// `exp{cx/d + ct log d/ψ}`.
pub fn family_bound_a2(x: f64, t: u64, psi: f64, c: f64, d: u32) -> LogValue {
    let df = d as f64;
    LogValue::from_ln(c * x / df + c * t as f64 * df.ln() / psi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateBounds {
    pub lemma11_rhs: LogValue,
    pub cor12_rhs: LogValue,
}

/// Right-hand sides of the container sum bound and of its small-set
/// corollary.
pub fn aggregate_bounds(lambda: f64, d: u32, a: u64, g: u64, m: u64, c_prime: f64) -> Result<AggregateBounds> {
    check_lambda(lambda)?;
    if d < 2 || a > 1u64 << (d - 2) {
        return Err(Error::Precondition(format!("a={a} exceeds 2^(d−2)")));
    }
    let df = d as f64;
    let ld = df.ln();
    if m as f64 > df / ld.sqrt() {
        return Err(Error::Precondition(format!("m={m} exceeds d/√(log d)")));
    }
    let l1 = (1.0 + lambda).ln();
    let cube = df * 2f64.ln();
    let lemma11 = cube + g as f64 * l1 - c_prime * (g as f64 - a as f64) * ld / df.powf(2.0 / 3.0);
    let mf = m as f64;
    let cor12 = (mf - 1.0) * (E * df * df).ln() + mf * lambda.ln() + 2.0 * mf * (mf - 1.0) * l1 + cube
        - mf * df * l1;
    Ok(AggregateBounds {
        lemma11_rhs: LogValue::from_ln(lemma11),
        cor12_rhs: LogValue::from_ln(cor12),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaReport {
    pub gamma: f64,
    /// `γ > −2ψ/(d−ψ)`.
    pub admissible: bool,
}

/// `γ = (log(1+λ) − 6ψ log d/(d−ψ)) / (log(1+λ) + 3 log d)`.
pub fn assembled_gamma(lambda: f64, d: u32, psi: f64) -> GammaReport {
    let df = d as f64;
    let l1 = lambda.ln_1p();
    let gamma = (l1 - 6.0 * psi * df.ln() / (df - psi)) / (l1 + 3.0 * df.ln());
    GammaReport {
        gamma,
        admissible: gamma > -2.0 * psi / (df - psi) && gamma <= 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn binomial_sums() {
        assert_eq!(binomial_sum_ln(10.0, 0.0), 0.0);
        assert!(close(binomial_sum_ln(4.0, 4.0), 16f64.ln()));
        assert!(close(binomial_sum_ln(5.0, 2.7), 16f64.ln()));
        assert!(close(binomial_sum_ln(4.2, 1.0), 6f64.ln()));
        assert_eq!(binomial_sum_ln(3.0, -0.5), f64::NEG_INFINITY);
    }

    #[test]
    fn reconstruction_bound_with_t_zero() {
        let b = reconstruction_bound(4, 6, 0, 1.0, 0.5, 1.0).unwrap();
        assert!(close(b.ln(), 6.0 * 2f64.ln()));
        assert!(reconstruction_bound(4, 6, 2, 3.0, 0.5, 1.0).is_err());
        assert!(reconstruction_bound(4, 6, 2, 1.0, -0.7, 1.0).is_err());
        assert!(reconstruction_bound(4, 6, 2, 1.0, 1.1, 1.0).is_err());
    }

    #[test]
    fn aggregate_example() {
        let r = aggregate_bounds(1.0, 4, 2, 2, 2, 1.0).unwrap();
        assert!(close(r.cor12_rhs.ln(), (16.0 * E).ln()));
        assert!(close(r.lemma11_rhs.ln(), 4.0 * 2f64.ln() + 2.0 * 2f64.ln()));
        assert!(aggregate_bounds(1.0, 4, 5, 6, 2, 1.0).is_err());
        assert!(aggregate_bounds(1.0, 4, 2, 6, 4, 1.0).is_err());
    }

    #[test]
    fn a2_trivial() {
        assert_eq!(family_bound_a2(0.0, 0, 1.0, 10.0, 4).ln(), 0.0);
    }

    #[test]
    fn gamma_limits() {
        let d = 1000u32;
        let psi = (d as f64).powf(2.0 / 3.0);
        let g = assembled_gamma(E - 1.0, d, psi);
        let ld = (d as f64).ln();
        assert!(close(g.gamma, (1.0 - 6.0 * psi * ld / (d as f64 - psi)) / (1.0 + 3.0 * ld)));
        let mid = assembled_gamma(1e10, 100, 22.0);
        let big = assembled_gamma(1e300, 100, 22.0);
        assert!(mid.gamma < big.gamma && big.gamma < 1.0);
        assert!(assembled_gamma(1.0, 100, 22.0).admissible);
    }
}
