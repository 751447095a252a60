//! Command implementations behind the `hcube` binary. Each command returns
//! its primary artifact as text so that callers decide where it goes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use hcube::asymptotics::{
    central_mass_fraction, classify_regime, hoeffding_check, partition_lower_bound, partition_upper_bound,
    poisson_min_pmf, threshold_windows, truncated_exp, upper_bound_applies, z_estimate, Regime, RegimeParams,
};
use hcube::containers::harness::run_harness;
use hcube::containers::BipartiteRegularGraph;
use hcube::cube::{iso_scan, CubeGraph, IsoMode, Parity, VertexSet};
use hcube::exact::{bivariate_profile, evaluate_partition, min_side_pmf, BivariateProfile, MAX_PROFILE_DIM};
use hcube::logvalue::LogValue;
use hcube::rational::{parse_rational, to_f64};
use hcube::sampling::{
    chain_estimate, default_schedule, exact_sample, format_dump, inclusion_probability, summarize, GlauberChain,
    SampleSummary, SINGLE_PHASE_LABEL,
};
use hcube::Error;

/// Digits after the decimal point in every emitted number.
pub const PRECISION: usize = 12;
pub const SEED_ENV: &str = "HCUBE_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionTooLarge { .. } | Error::BudgetExceeded { .. } | Error::RetryExhausted(_) => {
                CliError::Resource(e.to_string())
            }
            Error::MSolveFailure(_) | Error::UnknownRegime(_) => CliError::Assertion(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Iso,
    Containers,
    Bounds,
    Sampler,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Exact,
    Glauber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Profile,
    ThresholdScan,
    Verify,
    Sample,
}

/// Partial settings from one source (config file or flags).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub d: Option<u32>,
    pub lambdas: Vec<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub suite: Option<Suite>,
    pub engine: Option<Engine>,
    pub n: Option<u64>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
    pub epsilon: Option<f64>,
    pub omega_threshold: Option<f64>,
    pub big_o_constant: Option<f64>,
    pub c_lambda4: Option<f64>,
    pub log_margin: Option<f64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("bad value {v:?} for {key}")))
}

/// `key = value` lines; `#` starts a comment. `lambda` takes a
/// comma-separated list.
pub fn parse_config(text: &str) -> CliResult<Overrides> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let (key, v) = (key.trim(), value.trim());
        match key {
            "d" => o.d = Some(parse_value(key, v)?),
            "lambda" => o.lambdas = v.split(',').map(|s| s.trim().to_string()).collect(),
            "seed" => o.seed = Some(parse_value(key, v)?),
            "out" => o.out = Some(PathBuf::from(v)),
            "suite" => {
                o.suite = Some(Suite::from_str(v, true).map_err(|_| CliError::Usage(format!("unknown suite {v}")))?)
            }
            "engine" => {
                o.engine =
                    Some(Engine::from_str(v, true).map_err(|_| CliError::Usage(format!("unknown engine {v}")))?)
            }
            "n" => o.n = Some(parse_value(key, v)?),
            "burn_in" => o.burn_in = Some(parse_value(key, v)?),
            "thin" => o.thin = Some(parse_value(key, v)?),
            "epsilon" => o.epsilon = Some(parse_value(key, v)?),
            "omega_threshold" => o.omega_threshold = Some(parse_value(key, v)?),
            "big_o_constant" => o.big_o_constant = Some(parse_value(key, v)?),
            "c_lambda4" => o.c_lambda4 = Some(parse_value(key, v)?),
            "log_margin" => o.log_margin = Some(parse_value(key, v)?),
            other => return Err(CliError::Usage(format!("config line {}: unknown key {other:?}", i + 1))),
        }
    }
    Ok(o)
}

/// Effective settings for one command run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub d: Option<u32>,
    pub lambdas: Vec<String>,
    pub seed: u64,
    pub params: RegimeParams,
    pub epsilon: f64,
    pub out: Option<PathBuf>,
    pub suite: Option<Suite>,
    pub engine: Engine,
    pub n: Option<u64>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
}

impl ExperimentConfig {
    /// Flags win over the config file, which wins over the seed variable.
    pub fn merge(command: Command, file: Overrides, flags: Overrides, env_seed: Option<&str>) -> CliResult<Self> {
        fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
            flag.or(file)
        }
        let env_seed = env_seed
            .map(|s| parse_value::<u64>(SEED_ENV, s.trim()))
            .transpose()?;
        let defaults = RegimeParams::default();
        let params = RegimeParams {
            omega_threshold: pick(flags.omega_threshold, file.omega_threshold).unwrap_or(defaults.omega_threshold),
            big_o_constant: pick(flags.big_o_constant, file.big_o_constant).unwrap_or(defaults.big_o_constant),
            c_lambda4: pick(flags.c_lambda4, file.c_lambda4).unwrap_or(defaults.c_lambda4),
            log_margin: pick(flags.log_margin, file.log_margin).unwrap_or(defaults.log_margin),
        };
        let cfg = ExperimentConfig {
            command,
            d: pick(flags.d, file.d),
            lambdas: if flags.lambdas.is_empty() { file.lambdas } else { flags.lambdas },
            seed: pick(flags.seed, file.seed).or(env_seed).unwrap_or(0),
            params,
            epsilon: pick(flags.epsilon, file.epsilon).unwrap_or(0.1),
            out: pick(flags.out, file.out),
            suite: pick(flags.suite, file.suite),
            engine: pick(flags.engine, file.engine).unwrap_or_default(),
            n: pick(flags.n, file.n),
            burn_in: pick(flags.burn_in, file.burn_in),
            thin: pick(flags.thin, file.thin),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        if !(self.epsilon > 0.0) {
            return Err(CliError::Usage("epsilon must be positive".into()));
        }
        for l in &self.lambdas {
            let q = parse_rational(l)?;
            if !hcube::rational::is_positive(&q) {
                return Err(CliError::Usage(format!("lambda {l} must be positive")));
            }
        }
        let needs_d = matches!(self.command, Command::Profile | Command::ThresholdScan | Command::Sample);
        if needs_d && self.d.is_none() {
            return Err(CliError::Usage("--d is required".into()));
        }
        match self.command {
            Command::ThresholdScan if self.lambdas.is_empty() => {
                Err(CliError::Usage("at least one --lambda is required".into()))
            }
            Command::Sample if self.lambdas.len() != 1 => Err(CliError::Usage("exactly one --lambda is required".into())),
            Command::Verify if self.suite.is_none() => Err(CliError::Usage("--suite is required".into())),
            _ => Ok(()),
        }
    }
}

/// Primary artifact, an optional JSON summary, and whether every hard check
/// passed.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub primary: String,
    pub summary: Option<Value>,
    pub passed: bool,
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<CommandOutput> {
    match cfg.command {
        Command::Profile => Ok(CommandOutput {
            primary: cmd_profile(cfg.d.unwrap())?,
            summary: None,
            passed: true,
        }),
        Command::ThresholdScan => {
            let rows = threshold_scan(cfg.d.unwrap(), &cfg.lambdas, cfg.epsilon, &cfg.params)?;
            Ok(CommandOutput {
                primary: scan_csv(&rows),
                summary: None,
                passed: true,
            })
        }
        Command::Verify => cmd_verify(cfg.suite.unwrap(), cfg),
        Command::Sample => cmd_sample(cfg),
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.PRECISION$}")
    } else if x > 0.0 {
        "inf".into()
    } else {
        "nan".into()
    }
}

pub fn cmd_profile(d: u32) -> CliResult<String> {
    Ok(bivariate_profile(d)?.to_text())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub lambda: String,
    /// Exact `P(min side = c)` for `c = 0..=5`.
    pub p_min: [f64; 6],
    pub mean_min: f64,
    pub mu: f64,
    pub regime: Regime,
    /// `(max center, max halfwidth, min low, min high, m)`, absent outside
    /// the regimes that have windows.
    pub windows: Option<(f64, f64, f64, f64, Option<u64>)>,
    /// `d(λ−1)`.
    pub k: f64,
    pub poisson_tv: f64,
}

/// One row per λ with the exact min-side law and the asymptotic windows.
pub fn threshold_scan(d: u32, lambdas: &[String], epsilon: f64, params: &RegimeParams) -> CliResult<Vec<ScanRow>> {
    if d > 5 {
        return Err(Error::DimensionTooLarge { d, max: 5 }.into());
    }
    let profile = bivariate_profile(d)?;
    lambdas.iter().map(|l| scan_row(&profile, d, l, epsilon, params)).collect()
}

fn scan_row(profile: &BivariateProfile, d: u32, l: &str, epsilon: f64, params: &RegimeParams) -> CliResult<ScanRow> {
    let q = parse_rational(l)?;
    let lambda = to_f64(&q);
    let pmf: BTreeMap<usize, f64> = min_side_pmf(profile, &q)?
        .into_iter()
        .map(|(c, p)| (c, p.to_f64()))
        .collect();
    let mut p_min = [0.0; 6];
    for (c, slot) in p_min.iter_mut().enumerate() {
        *slot = pmf.get(&c).copied().unwrap_or(0.0);
    }
    let mean_min = pmf.iter().map(|(c, p)| *c as f64 * p).sum();
    let k = d as f64 * (lambda - 1.0);
    let top = pmf.keys().copied().max().unwrap_or(0).max(50) as u64;
    let mut covered = 0.0;
    let mut diff = 0.0;
    for c in 0..=top {
        let pq = poisson_min_pmf(k, c);
        covered += pq;
        diff += (pmf.get(&(c as usize)).copied().unwrap_or(0.0) - pq).abs();
    }
    let poisson_tv = (0.5 * (diff + (1.0 - covered).max(0.0))).min(1.0);
    let regime = classify_regime(lambda, d, params)?.primary;
    let windows = threshold_windows(lambda, d, epsilon, None, params).ok().map(|w| {
        (
            w.max_side_center.to_f64(),
            w.max_side_halfwidth.to_f64(),
            w.min_side_low.to_f64(),
            w.min_side_high.to_f64(),
            w.m_used,
        )
    });
    Ok(ScanRow {
        lambda: l.to_string(),
        p_min,
        mean_min,
        mu: hcube::asymptotics::minority_intensity(lambda, d)?.to_f64(),
        regime,
        windows,
        k,
        poisson_tv,
    })
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(
        "lambda,p_min_0,p_min_1,p_min_2,p_min_3,p_min_4,p_min_5,mean_min,mu,regime,max_center,max_halfwidth,min_low,min_high,m,k,poisson_tv\n",
    );
    for r in rows {
        let p: Vec<String> = r.p_min.iter().map(|&x| num(x)).collect();
        let w = match r.windows {
            Some((a, b, c, e, m)) => format!(
                "{},{},{},{},{}",
                num(a),
                num(b),
                num(c),
                num(e),
                m.map_or("NA".to_string(), |m| m.to_string())
            ),
            None => "NA,NA,NA,NA,NA".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.lambda,
            p.join(","),
            num(r.mean_min),
            num(r.mu),
            r.regime,
            w,
            num(r.k),
            num(r.poisson_tv)
        );
    }
    out
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub params: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, params: String, value: f64, bound: f64, pass: bool) -> Self {
        Check {
            name: name.into(),
            params,
            value,
            bound,
            pass,
        }
    }
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = String::from("check,params,value,bound,pass\n");
    for c in checks {
        let _ = writeln!(out, "{},{},{},{},{}", c.name, c.params, num(c.value), num(c.bound), c.pass);
    }
    out
}

fn checks_output(checks: Vec<Check>) -> CommandOutput {
    let passed = checks.iter().all(|c| c.pass);
    let failed = checks.iter().filter(|c| !c.pass).count();
    CommandOutput {
        primary: checks_csv(&checks),
        summary: Some(json!({ "checks": checks.len(), "failed": failed, "pass": passed })),
        passed,
    }
}

pub fn cmd_verify(suite: Suite, cfg: &ExperimentConfig) -> CliResult<CommandOutput> {
    match suite {
        Suite::Iso => Ok(checks_output(verify_iso(cfg.d.unwrap_or(4))?)),
        Suite::Containers => {
            let d = cfg.d.unwrap_or(3);
            if !(2..=8).contains(&d) {
                return Err(CliError::Usage(format!("containers suite needs 2 <= d <= 8, got {d}")));
            }
            let g = BipartiteRegularGraph::from_cube(&CubeGraph::new(d)?);
            let random = (d > 4).then(|| cfg.n.unwrap_or(10_000) as usize);
            let rep = run_harness(&g, random, cfg.seed)?;
            let passed = rep.all_pass();
            Ok(CommandOutput {
                primary: rep.to_csv(),
                summary: Some(json!({
                    "rows": rep.rows.len(),
                    "passed_rows": rep.pass_count(),
                    "failures": rep.failures,
                    "pass": passed,
                })),
                passed,
            })
        }
        Suite::Bounds => Ok(checks_output(verify_bounds()?)),
        Suite::Sampler => Ok(checks_output(verify_sampler(cfg)?)),
    }
}

/// Strict expansion for every size up to `2^(d−2)` (exhaustive, `d <= 5`)
/// and the near-linear clause for sizes 1 and 2 (symmetry-reduced).
pub fn verify_iso(d: u32) -> CliResult<Vec<Check>> {
    let g = CubeGraph::new(d)?;
    let mut checks = Vec::new();
    if d >= 2 && d <= 5 {
        for size in 1..=(1usize << (d - 2)) {
            let r = iso_scan(&g, Parity::Even, size, IsoMode::Exhaustive, None)?;
            let ratio = *r.min_ratio.numer() as f64 / *r.min_ratio.denom() as f64;
            checks.push(Check::new("strict_expansion", format!("d={d} size={size}"), ratio, 1.0, r.lemma10_ok));
        }
    }
    for size in 1..=2usize.min(g.side_size() as usize) {
        let r = iso_scan(&g, Parity::Even, size, IsoMode::SymmetryReduced, None)?;
        let ratio = *r.min_ratio.numer() as f64 / *r.min_ratio.denom() as f64;
        let need = d as f64 - 2.0 * (size as f64 - 1.0);
        checks.push(Check::new(
            "near_linear_expansion",
            format!("d={d} size={size}"),
            ratio,
            need,
            r.lemma9_ok && ratio >= need,
        ));
    }
    Ok(checks)
}

pub fn verify_bounds() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 3..=60u32 {
        let z = z_estimate(1.0, d, Regime::R2)?.ln();
        let want = std::f64::consts::LN_2 + 0.5 + 2f64.powi(d as i32 - 1) * std::f64::consts::LN_2;
        let rel = (z - want).abs() / want;
        checks.push(Check::new("r2_identity", format!("d={d}"), rel, 1e-12, rel <= 1e-12));
    }
    let params = RegimeParams::default();
    for d in [4u32, 5] {
        let p = bivariate_profile(d)?;
        for l in ["1/2", "1", "2"] {
            let q = parse_rational(l)?;
            let exact = LogValue::from_rational(&evaluate_partition(&p, &q)?);
            let lf = to_f64(&q);
            let lb = partition_lower_bound(lf, d, 0, 0)?.bound;
            checks.push(Check::new("lower_bound", format!("d={d} lambda={l}"), lb.ln(), exact.ln(), lb <= exact));
            if upper_bound_applies(lf, d, &params) {
                let ub = partition_upper_bound(lf, d)?;
                checks.push(Check::new("upper_bound", format!("d={d} lambda={l}"), exact.ln(), ub.ln(), exact <= ub));
            }
        }
    }
    for l in ["0.1", "0.3", "1", "3"] {
        let lq = parse_rational(l)?;
        let mut worst = f64::INFINITY;
        let mut ok = true;
        for i in 1..=25 {
            let delta = parse_rational(&format!("{i}/50"))?;
            for m in 10..=200u64 {
                let r = hoeffding_check(&lq, &delta, m)?;
                ok &= r.ok;
                worst = worst.min(r.log_margin);
            }
        }
        checks.push(Check::new("hoeffding", format!("lambda={l}"), worst, 0.0, ok));
    }
    for xi in 1..=50u64 {
        let x = xi as f64;
        let mut ok = true;
        let mut worst = f64::INFINITY;
        for dd in 0..=3 * xi {
            let t = truncated_exp(dd, x)?;
            if let Some(rhs) = t.lower_bound_rhs {
                worst = worst.min(rhs.ln() - t.value.ln());
                ok &= t.value.ln() <= rhs.ln() + 1e-12;
            }
            if let (Some(tail), Some(rhs)) = (t.upper_tail, t.upper_bound_rhs) {
                worst = worst.min(rhs.ln() - tail.ln());
                ok &= tail.ln() <= rhs.ln() + 1e-12;
            }
        }
        checks.push(Check::new("truncated_exp", format!("x={xi}"), worst, 0.0, ok));
    }
    let frac = central_mass_fraction(1e4, 3.0, 2.0);
    checks.push(Check::new("central_mass", "x=10000".into(), frac, 0.9, frac >= 0.9));
    Ok(checks)
}

/// Independent sets of `Q_d` as bit masks, `d <= 2`.
fn tiny_states(d: u32) -> Vec<u64> {
    let n = 1u64 << d;
    (0u64..(1 << n))
        .filter(|s| (0..n).all(|v| s >> v & 1 == 0 || (0..d).all(|i| s >> (v ^ (1 << i)) & 1 == 0)))
        .collect()
}

/// Largest violation of `π(s)P(s,s′) = π(s′)P(s′,s)` for the heat-bath chain.
pub fn detailed_balance_error(d: u32, lambda: f64) -> CliResult<f64> {
    let g = CubeGraph::new(d)?;
    let n = g.num_vertices();
    let states = tiny_states(d);
    let pi: Vec<f64> = states.iter().map(|s| lambda.powi(s.count_ones() as i32)).collect();
    let z: f64 = pi.iter().sum();
    let index = |m: u64| states.iter().position(|&s| s == m).expect("independent");
    let mut p = vec![vec![0.0; states.len()]; states.len()];
    for (i, &s) in states.iter().enumerate() {
        let set = VertexSet::from_mask(n as usize, s);
        for v in 0..n {
            let q = inclusion_probability(&g, &set, v, lambda);
            if q > 0.0 {
                p[i][index(s | 1 << v)] += q / n as f64;
            }
            p[i][index(s & !(1 << v))] += (1.0 - q) / n as f64;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..states.len() {
        worst = worst.max((p[i].iter().sum::<f64>() - 1.0).abs());
        for j in 0..states.len() {
            worst = worst.max((pi[i] / z * p[i][j] - pi[j] / z * p[j][i]).abs());
        }
    }
    Ok(worst)
}

/// Total-variation distance between the empirical and exact min-side laws.
pub fn min_side_tv(summary: &SampleSummary, exact: &BTreeMap<usize, f64>) -> f64 {
    let freq = summary.min_side_frequencies();
    let keys: std::collections::BTreeSet<usize> = exact.keys().chain(freq.keys()).copied().collect();
    keys.iter()
        .map(|k| (exact.get(k).copied().unwrap_or(0.0) - freq.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

fn exact_min_law(d: u32, lambda: &str) -> CliResult<BTreeMap<usize, f64>> {
    let q = parse_rational(lambda)?;
    Ok(min_side_pmf(&bivariate_profile(d)?, &q)?
        .into_iter()
        .map(|(c, p)| (c, p.to_f64()))
        .collect())
}

/// Exact sampler against the exact law, Glauber chains against stationary
/// values on `Q_1` and `Q_2`, and detailed balance on `d <= 2`.
pub fn verify_sampler(cfg: &ExperimentConfig) -> CliResult<Vec<Check>> {
    let d = cfg.d.unwrap_or(4);
    let lambda = cfg.lambdas.first().cloned().unwrap_or_else(|| "1".into());
    let lf = to_f64(&parse_rational(&lambda)?);
    let n = cfg.n.unwrap_or(100_000);
    let mut checks = Vec::new();
    let g = CubeGraph::new(d)?;
    let samples = exact_sample(d, lf, cfg.seed, n as usize)?;
    let tv = min_side_tv(&summarize(&samples, &g)?, &exact_min_law(d, &lambda)?);
    checks.push(Check::new("exact_min_side_tv", format!("d={d} lambda={lambda} n={n}"), tv, 0.01, tv < 0.01));

    let steps = 1_000_000u64;
    for l in [1.0f64, 2.0] {
        let mut chain = GlauberChain::new(1, l, cfg.seed.wrapping_add(1))?;
        chain.run(1000);
        let est = chain_estimate(&mut chain, steps, 100, |s| s.contains(0) as u8 as f64);
        let exact = l / (1.0 + 2.0 * l);
        let z = (est.mean - exact).abs() / est.std_err;
        checks.push(Check::new("glauber_occupancy", format!("d=1 lambda={l}"), z, 3.0, z <= 3.0));
    }
    let mut chain = GlauberChain::new(2, 1.0, cfg.seed.wrapping_add(2))?;
    chain.run(1000);
    let est = chain_estimate(&mut chain, steps, 100, |s| s.is_empty() as u8 as f64);
    let z = (est.mean - 1.0 / 7.0).abs() / est.std_err;
    checks.push(Check::new("glauber_empty_set", "d=2 lambda=1".into(), z, 3.0, z <= 3.0));
    for dd in 1..=2 {
        for l in [0.5f64, 1.0, 2.5] {
            let err = detailed_balance_error(dd, l)?;
            checks.push(Check::new("detailed_balance", format!("d={dd} lambda={l}"), err, 1e-12, err <= 1e-12));
        }
    }
    Ok(checks)
}

/// Samples as a dump (primary) plus a JSON summary.
pub fn cmd_sample(cfg: &ExperimentConfig) -> CliResult<CommandOutput> {
    let d = cfg.d.unwrap();
    let lambda = &cfg.lambdas[0];
    let lf = to_f64(&parse_rational(lambda)?);
    let n = cfg.n.unwrap_or(10_000);
    let g = CubeGraph::new(d)?;
    let samples = match cfg.engine {
        Engine::Exact => exact_sample(d, lf, cfg.seed, n as usize)?,
        Engine::Glauber => {
            let (burn, thin) = default_schedule(d);
            let (burn, thin) = (cfg.burn_in.unwrap_or(burn), cfg.thin.unwrap_or(thin).max(1));
            let mut chain = GlauberChain::new(d, lf, cfg.seed)?;
            chain.run(burn);
            (0..n)
                .map(|_| {
                    chain.run(thin);
                    chain.current().clone()
                })
                .collect()
        }
    };
    let mut summary = SampleSummary::new();
    if cfg.engine == Engine::Glauber {
        summary.parity_gap_trace = Some(Vec::with_capacity(samples.len()));
        summary.label = Some(SINGLE_PHASE_LABEL.to_string());
    }
    for s in &samples {
        summary.record(&g, s)?;
    }
    let occupied: usize = samples.iter().map(VertexSet::len).sum();
    let occupancy = occupied as f64 / (n.max(1) as f64 * g.num_vertices() as f64);
    let tv = if d <= 5 {
        Some(num(min_side_tv(&summary, &exact_min_law(d, lambda)?)))
    } else {
        None
    };
    let hist = |h: &BTreeMap<usize, u64>| -> Value { h.iter().map(|(k, v)| json!([k, v])).collect() };
    let components: Value = summary
        .component_histogram
        .iter()
        .map(|((k, cl), v)| json!({ "k": k, "cl": cl, "count": v }))
        .collect();
    let p0 = summary.p_min_zero();
    let json = json!({
        "d": d,
        "lambda": lambda,
        "seed": cfg.seed,
        "engine": cfg.engine,
        "n": summary.n,
        "label": summary.label,
        "vertex_occupancy": num(occupancy),
        "p_min_zero": num(*p0.numer() as f64 / (*p0.denom()).max(1) as f64),
        "min_side_histogram": hist(&summary.min_side_histogram),
        "max_side_histogram": hist(&summary.max_side_histogram),
        "components": components,
        "min_side_tv_vs_exact": tv,
        "precision": PRECISION,
    });
    Ok(CommandOutput {
        primary: format_dump(d, lambda, cfg.seed, &samples),
        summary: Some(json),
        passed: true,
    })
}

/// Sidecar metadata: effective configuration and a timestamp.
pub fn metadata(cfg: &ExperimentConfig, unix_seconds: u64) -> Value {
    json!({
        "config": cfg,
        "precision": PRECISION,
        "generated_unix_seconds": unix_seconds,
        "max_profile_dim": MAX_PROFILE_DIM,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command, flags: Overrides) -> CliResult<ExperimentConfig> {
        ExperimentConfig::merge(command, Overrides::default(), flags, None)
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(matches!(parse_config("d = 3\nwidth = 2\n"), Err(CliError::Usage(_))));
        let o = parse_config("# grid\nd=4\nlambda = 1/2, 1 ,2\nseed=9\n").unwrap();
        assert_eq!(o.d, Some(4));
        assert_eq!(o.lambdas, vec!["1/2", "1", "2"]);
    }

    #[test]
    fn flags_win_over_file_and_env() {
        let file = parse_config("d=4\nseed=9\nepsilon=0.5").unwrap();
        let flags = Overrides {
            d: Some(3),
            lambdas: vec!["1".into()],
            ..Default::default()
        };
        let c = ExperimentConfig::merge(Command::ThresholdScan, file.clone(), flags.clone(), Some("5")).unwrap();
        assert_eq!((c.d, c.seed, c.epsilon), (Some(3), 9, 0.5));
        let c = ExperimentConfig::merge(Command::ThresholdScan, Overrides::default(), flags, Some("5")).unwrap();
        assert_eq!(c.seed, 5);
    }

    #[test]
    fn profile_examples() {
        let two = cmd_profile(2).unwrap();
        assert_eq!(two.lines().count(), 1 + 5);
        let one = BivariateProfile::from_text(&cmd_profile(1).unwrap()).unwrap();
        assert_eq!(one.total(), 3u32.into());
        let err = CliError::from(bivariate_profile(7).unwrap_err());
        assert_eq!(err.exit_code(), 3);
        assert_eq!(cmd_profile(3).unwrap(), cmd_profile(3).unwrap());
    }

    #[test]
    fn scan_on_q2_has_empty_minority() {
        let rows = threshold_scan(2, &["0.2".into(), "1".into(), "4".into()], 0.1, &RegimeParams::default()).unwrap();
        assert!(rows.iter().all(|r| (r.p_min[0] - 1.0).abs() < 1e-15));
        let csv = scan_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(cfg(Command::Profile, Overrides::default()), Err(CliError::Usage(_))));
        let bad = Overrides {
            d: Some(3),
            lambdas: vec!["-1".into()],
            ..Default::default()
        };
        assert!(matches!(cfg(Command::ThresholdScan, bad), Err(CliError::Usage(_))));
        assert!(matches!(cfg(Command::Verify, Overrides::default()), Err(CliError::Usage(_))));
    }

    #[test]
    fn glauber_sample_is_labelled() {
        let c = cfg(
            Command::Sample,
            Overrides {
                d: Some(10),
                lambdas: vec!["3".into()],
                engine: Some(Engine::Glauber),
                n: Some(3),
                burn_in: Some(1000),
                thin: Some(10),
                ..Default::default()
            },
        )
        .unwrap();
        let out = cmd_sample(&c).unwrap();
        assert_eq!(out.summary.unwrap()["label"], SINGLE_PHASE_LABEL);
        assert_eq!(out.primary, cmd_sample(&c).unwrap().primary);
    }

    #[test]
    fn verify_small_suites() {
        let c = cfg(
            Command::Verify,
            Overrides {
                suite: Some(Suite::Containers),
                d: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(run(&c).unwrap().passed);
        assert!(checks_output(verify_iso(4).unwrap()).passed);
    }
}
