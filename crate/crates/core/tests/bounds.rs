use hcube::asymptotics::*;
use hcube::exact::{bivariate_profile, evaluate_partition};
use hcube::logvalue::LogValue;
use hcube::rational::parse_rational;

#[test]
fn r2_estimate_at_one_matches_closed_form() {
    for d in 3..=60u32 {
        let z = z_estimate(1.0, d, Regime::R2).unwrap().ln();
        // ln(2 √e 2^(2^(d-1)))
        let want = 2f64.ln() + 0.5 + 2f64.powi(d as i32 - 1) * 2f64.ln();
        assert!((z - want).abs() <= 1e-12 * want, "d={d}");
    }
}

#[test]
fn lower_bound_below_exact_partition_function() {
    for d in [4u32, 5] {
        let p = bivariate_profile(d).unwrap();
        for l in ["1/2", "1", "2"] {
            let q = parse_rational(l).unwrap();
            let exact = LogValue::from_rational(&evaluate_partition(&p, &q).unwrap());
            let lf = hcube::rational::to_f64(&q);
            let lb = partition_lower_bound(lf, d, 0, 0).unwrap();
            assert!(lb.bound <= exact, "d={d} λ={l}");
        }
    }
}

#[test]
fn upper_bound_reported_against_exact() {
    let params = RegimeParams::default();
    for d in [4u32, 5] {
        let p = bivariate_profile(d).unwrap();
        for l in ["1/2", "1", "2"] {
            let q = parse_rational(l).unwrap();
            let exact = LogValue::from_rational(&evaluate_partition(&p, &q).unwrap());
            let ub = partition_upper_bound(hcube::rational::to_f64(&q), d).unwrap();
            if upper_bound_applies(hcube::rational::to_f64(&q), d, &params) {
                assert!(ub >= exact);
            }
            assert!(ub.ln().is_finite());
        }
    }
    let exact4 = 743f64.ln();
    assert!(partition_upper_bound(1.0, 4).unwrap().ln() >= exact4);
}

#[test]
fn hoeffding_grid() {
    for l in ["0.1", "0.3", "1", "3"] {
        let lq = parse_rational(l).unwrap();
        for i in 1..=25 {
            let delta = parse_rational(&format!("{}/50", i)).unwrap();
            for m in 10..=200u64 {
                let r = hoeffding_check(&lq, &delta, m).unwrap();
                assert!(r.ok, "λ={l} δ={i}/50 m={m} margin={}", r.log_margin);
            }
        }
    }
}

#[test]
fn truncated_exp_grid() {
    for xi in 1..=50u64 {
        let x = xi as f64;
        for d in 0..=3 * xi {
            let t = truncated_exp(d, x).unwrap();
            if let Some(rhs) = t.lower_bound_rhs {
                assert!(t.value.ln() <= rhs.ln() + 1e-12, "lower x={x} D={d}");
            }
            if let (Some(tail), Some(rhs)) = (t.upper_tail, t.upper_bound_rhs) {
                assert!(tail.ln() <= rhs.ln() + 1e-12, "upper x={x} D={d}");
            }
        }
    }
}

#[test]
fn central_mass_at_ten_thousand() {
    let frac = central_mass_fraction(1e4, 3.0, 2.0);
    assert!(frac >= 0.9, "{frac}");
}

#[test]
fn poisson_masses_sum_to_one() {
    for i in -10..=10 {
        let k = i as f64 / 2.0;
        let s: f64 = (0..=50).map(|c| poisson_min_pmf(k, c)).sum();
        assert!((s - 1.0).abs() <= 1e-10, "k={k}");
    }
}
