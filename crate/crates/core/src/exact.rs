//! Exact bivariate independence profiles of `Q_d`.
//!
//! `N(a, b)` counts independent sets with `a` even and `b` odd vertices. Every
//! independent set is an arbitrary even-side subset `S` together with a subset
//! of the odd vertices outside `N(S)`, so
//! `N(a, b) = sum over |S| = a of C(2^(d-1) - |N(S)|, b)`.
//! The engine enumerates even-side subsets with incremental neighbourhood
//! masks; `d = 6` splits the 32 even vertices into two halves and combines
//! precomputed half-masks.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cube::{component_stats, CubeGraph, Parity, Vertex, VertexSet};
use crate::error::{Error, Result};
use crate::logvalue::{log_sum_exp, LogValue};

pub const MAX_ENUM_DIM: u32 = 5;
pub const MAX_PROFILE_DIM: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariateProfile {
    d: u32,
    counts: BTreeMap<(usize, usize), BigUint>,
}

impl BivariateProfile {
    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn get(&self, a: usize, b: usize) -> BigUint {
        self.counts.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Nonzero counts in `(a, b)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &BigUint)> {
        self.counts.iter()
    }

    /// Total number of independent sets.
    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    /// Renders the line-oriented profile format:
    /// `d=<d>` then `a b count` per nonzero entry, ascending `(a, b)`.
    pub fn to_text(&self) -> String {
        let mut out = format!("d={}\n", self.d);
        for ((a, b), c) in &self.counts {
            writeln!(out, "{a} {b} {c}").unwrap();
        }
        out
    }

    /// Strict inverse of [`to_text`](Self::to_text): rejects anything that
    /// would not be reproduced byte for byte.
    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let body = text
            .strip_suffix('\n')
            .ok_or_else(|| err(0, "missing trailing newline"))?;
        let mut lines = body.split('\n');
        let header = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let d: u32 = header
            .strip_prefix("d=")
            .filter(|s| canonical_decimal(s))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(1, "expected d=<dimension>"))?;
        if d == 0 || d > MAX_PROFILE_DIM {
            return Err(err(1, "dimension out of range"));
        }
        let mut counts = BTreeMap::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != 3 || !fields.iter().all(|f| canonical_decimal(f)) {
                return Err(err(n, "expected `a b count`"));
            }
            let a: usize = fields[0].parse().map_err(|_| err(n, "bad a"))?;
            let b: usize = fields[1].parse().map_err(|_| err(n, "bad b"))?;
            let c: BigUint = fields[2].parse().map_err(|_| err(n, "bad count"))?;
            if c.is_zero() {
                return Err(err(n, "zero counts are omitted"));
            }
            if last.is_some_and(|l| l >= (a, b)) {
                return Err(err(n, "entries must be strictly increasing in (a, b)"));
            }
            last = Some((a, b));
            counts.insert((a, b), c);
        }
        Ok(BivariateProfile { d, counts })
    }

    /// Checks `N(0,0) = 1`, `N(a,b) = N(b,a)` and `N(a,0) = C(2^(d-1), a)`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.get(0, 0) != BigUint::one() {
            return Err("N(0,0) != 1".into());
        }
        for ((a, b), c) in &self.counts {
            if &self.get(*b, *a) != c {
                return Err(format!("N({a},{b}) != N({b},{a})"));
            }
        }
        let half = 1usize << (self.d - 1);
        for a in 0..=half {
            if self.get(a, 0) != binomial(half, a) {
                return Err(format!("N({a},0) != C({half},{a})"));
            }
        }
        Ok(())
    }
}

fn canonical_decimal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn binomial_table(n: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0 };
        }
    }
    t
}

/// Parity classes of `Q_d` as index lists with neighbour masks (d <= 6).
struct SideIndex {
    even: Vec<Vertex>,
    odd: Vec<Vertex>,
    /// For each even index, its neighbours as a mask over odd indices.
    even_nbrs: Vec<u64>,
}

impl SideIndex {
    fn new(g: &CubeGraph) -> Self {
        let even: Vec<Vertex> = g.side_vertices(Parity::Even).collect();
        let odd: Vec<Vertex> = g.side_vertices(Parity::Odd).collect();
        let pos = |list: &[Vertex], v: Vertex| list.binary_search(&v).unwrap();
        let even_nbrs = even
            .iter()
            .map(|&v| g.neighbors(v).fold(0u64, |m, w| m | 1 << pos(&odd, w)))
            .collect();
        SideIndex {
            even,
            odd,
            even_nbrs,
        }
    }

    fn mask_of(&self, set: &VertexSet, parity: Parity) -> u64 {
        let list = match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        };
        list.iter()
            .enumerate()
            .filter(|(_, &v)| set.contains(v))
            .fold(0u64, |m, (i, _)| m | 1 << i)
    }

    fn members(&self, mask: u64, parity: Parity) -> Vec<Vertex> {
        let list = match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        };
        (0..list.len()).filter(|i| mask >> i & 1 == 1).map(|i| list[i]).collect()
    }
}

/// Neighbourhood masks of every subset of a list of vertex masks, indexed by
/// the subset's bitmask.
fn subset_unions(nbrs: &[u64]) -> Vec<u64> {
    let n = nbrs.len();
    let mut out = vec![0u64; 1 << n];
    for s in 1usize..(1 << n) {
        let low = s.trailing_zeros() as usize;
        out[s] = out[s & (s - 1)] | nbrs[low];
    }
    out
}

fn check_dim(d: u32, max: u32) -> Result<CubeGraph> {
    if d > max {
        return Err(Error::DimensionTooLarge { d, max });
    }
    CubeGraph::new(d)
}

/// Exact `N(a, b)` for `Q_d`, `d <= 6`.
pub fn bivariate_profile(d: u32) -> Result<BivariateProfile> {
    let g = check_dim(d, MAX_PROFILE_DIM)?;
    if d <= MAX_ENUM_DIM {
        let empty = g.empty_set();
        return restricted_profile(d, &empty, &empty);
    }
    let idx = SideIndex::new(&g);
    let half = idx.even.len();
    let split = half / 2;
    let lo = subset_unions(&idx.even_nbrs[..split]);
    let hi = subset_unions(&idx.even_nbrs[split..]);
    // Collapse the high half to distinct (mask, size) pairs.
    let mut hi_groups: HashMap<(u64, u32), u64> = HashMap::new();
    for (s, &m) in hi.iter().enumerate() {
        *hi_groups.entry((m, s.count_ones())).or_insert(0) += 1;
    }
    let hi_groups: Vec<(u64, u32, u64)> = hi_groups.into_iter().map(|((m, s), c)| (m, s, c)).collect();
    let mut hist = vec![vec![0u64; idx.odd.len() + 1]; half + 1];
    for (s, &m) in lo.iter().enumerate() {
        let row_base = s.count_ones();
        for &(hm, hs, c) in &hi_groups {
            hist[(row_base + hs) as usize][(m | hm).count_ones() as usize] += c;
        }
    }
    Ok(profile_from_histogram(d, &hist, idx.odd.len()))
}

fn profile_from_histogram(d: u32, hist: &[Vec<u64>], odd_size: usize) -> BivariateProfile {
    let binom = binomial_table(odd_size);
    let mut counts = BTreeMap::new();
    for (a, row) in hist.iter().enumerate() {
        let mut acc = vec![0u128; odd_size + 1];
        for (g, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let free = odd_size - g;
            for b in 0..=free {
                acc[b] += c as u128 * binom[free][b];
            }
        }
        for (b, v) in acc.into_iter().enumerate() {
            if v != 0 {
                counts.insert((a, b), BigUint::from(v));
            }
        }
    }
    BivariateProfile { d, counts }
}

/// Profile of the independent sets that contain `forced_in` and avoid
/// `forced_out` (`d <= 5`).
pub fn restricted_profile(
    d: u32,
    forced_in: &VertexSet,
    forced_out: &VertexSet,
) -> Result<BivariateProfile> {
    let g = check_dim(d, MAX_ENUM_DIM)?;
    if let Some((u, v)) = g.first_edge(forced_in) {
        return Err(Error::NotIndependent(u, v));
    }
    if !forced_in.is_disjoint(forced_out) {
        return Err(Error::Precondition("forced_in and forced_out intersect".into()));
    }
    let idx = SideIndex::new(&g);
    let in_e = idx.mask_of(forced_in, Parity::Even);
    let in_o = idx.mask_of(forced_in, Parity::Odd);
    let out_e = idx.mask_of(forced_out, Parity::Even);
    let out_o = idx.mask_of(forced_out, Parity::Odd);
    let n_e = idx.even.len();
    let n_o = idx.odd.len();
    let all_e = (1u64 << n_e) - 1;
    let free_e = all_e & !in_e & !out_e;
    let nbr_of_in = (0..n_e)
        .filter(|i| in_e >> i & 1 == 1)
        .fold(0u64, |m, i| m | idx.even_nbrs[i]);
    let in_o_size = in_o.count_ones() as usize;

    // hist[a][f]: number of admissible even sets of size a leaving f odd
    // vertices available beyond the forced ones.
    let mut hist = vec![vec![0u64; n_o + 1]; n_e + 1];
    let all_o = (1u64 << n_o) - 1;
    let mut sub = free_e;
    loop {
        let s = in_e | sub;
        let nb = (0..n_e)
            .filter(|i| sub >> i & 1 == 1)
            .fold(nbr_of_in, |m, i| m | idx.even_nbrs[i]);
        if nb & in_o == 0 {
            let avail = (all_o & !nb & !out_o & !in_o).count_ones() as usize;
            hist[s.count_ones() as usize][avail] += 1;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free_e;
    }
    let binom = binomial_table(n_o);
    let mut counts = BTreeMap::new();
    for (a, row) in hist.iter().enumerate() {
        for (avail, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for j in 0..=avail {
                let e = counts.entry((a, in_o_size + j)).or_insert_with(BigUint::zero);
                *e += BigUint::from(c as u128 * binom[avail][j]);
            }
        }
    }
    Ok(BivariateProfile { d, counts })
}

fn require_positive(lambda: &BigRational) -> Result<()> {
    if lambda.is_positive() {
        Ok(())
    } else {
        Err(Error::NonpositiveLambda)
    }
}

/// Polynomial coefficients by total size `n = a + b`.
fn size_coefficients(p: &BivariateProfile) -> Vec<BigUint> {
    let mut coeffs: Vec<BigUint> = Vec::new();
    for ((a, b), c) in &p.counts {
        let n = a + b;
        if coeffs.len() <= n {
            coeffs.resize(n + 1, BigUint::zero());
        }
        coeffs[n] += c;
    }
    coeffs
}

fn horner(coeffs: &[BigUint], lambda: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| {
        acc * lambda + BigRational::from_integer(BigInt::from(c.clone()))
    })
}

/// `Z_λ = sum N(a,b) λ^(a+b)` exactly.
pub fn evaluate_partition(p: &BivariateProfile, lambda: &BigRational) -> Result<BigRational> {
    require_positive(lambda)?;
    Ok(horner(&size_coefficients(p), lambda))
}

/// `Z_λ` in log scale for a real `λ` given as a [`LogValue`].
pub fn evaluate_partition_log(p: &BivariateProfile, lambda: LogValue) -> Result<LogValue> {
    if lambda.is_zero() {
        return Err(Error::NonpositiveLambda);
    }
    let ln_l = lambda.ln();
    Ok(log_sum_exp(size_coefficients(p).iter().enumerate().map(|(n, c)| {
        LogValue::from_biguint(c) * LogValue::from_ln(n as f64 * ln_l)
    })))
}

/// An exact probability in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactProbability(BigRational);

impl ExactProbability {
    pub fn new(value: BigRational) -> Self {
        debug_assert!(!value.is_negative() && value <= BigRational::one());
        ExactProbability(value)
    }

    pub fn zero() -> Self {
        ExactProbability(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn numerator(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denominator(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn to_f64(&self) -> f64 {
        crate::rational::to_f64(&self.0)
    }

    pub fn log_value(&self) -> LogValue {
        LogValue::from_rational(&self.0)
    }
}

/// Law of `min(|I ∩ E|, |I ∩ O|)` under hc(λ).
pub fn min_side_pmf(
    p: &BivariateProfile,
    lambda: &BigRational,
) -> Result<BTreeMap<usize, ExactProbability>> {
    require_positive(lambda)?;
    let mut by_min: BTreeMap<usize, BTreeMap<usize, BigUint>> = BTreeMap::new();
    for ((a, b), c) in &p.counts {
        let slot = by_min.entry(*a.min(b)).or_default();
        *slot.entry(a + b).or_insert_with(BigUint::zero) += c;
    }
    let weight = |m: &BTreeMap<usize, BigUint>| -> BigRational {
        m.iter()
            .map(|(n, c)| {
                BigRational::from_integer(BigInt::from(c.clone())) * crate::rational::pow(lambda, *n)
            })
            .sum()
    };
    let weights: BTreeMap<usize, BigRational> = by_min.iter().map(|(k, m)| (*k, weight(m))).collect();
    let z: BigRational = weights.values().sum();
    Ok(weights
        .into_iter()
        .map(|(k, w)| (k, ExactProbability::new(w / &z)))
        .collect())
}

/// Key of the joint structure law of the minority side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructureKey {
    pub min_size: usize,
    /// Number of 2-components of the minority side.
    pub k: usize,
    /// Largest 2-component size.
    pub cl: usize,
    pub total_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureProfile {
    pub d: u32,
    pub counts: BTreeMap<StructureKey, BigUint>,
}

impl StructureProfile {
    /// Counts of independent sets by minority-side size.
    pub fn min_side_marginal(&self) -> BTreeMap<usize, BigUint> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.counts {
            *out.entry(k.min_size).or_insert_with(BigUint::zero) += c;
        }
        out
    }
}

/// Per-subset `(k, cl)` for every subset of one side, indexed by mask.
fn side_component_table(g: &CubeGraph, idx: &SideIndex, parity: Parity) -> Vec<(u8, u8)> {
    let n = match parity {
        Parity::Even => idx.even.len(),
        Parity::Odd => idx.odd.len(),
    };
    (0u64..(1u64 << n))
        .map(|mask| {
            let (k, cl) = component_stats(g, &idx.members(mask, parity));
            (k as u8, cl as u8)
        })
        .collect()
}

/// Joint counts of (minority size, 2-component count, largest 2-component,
/// total size). Ties `|I ∩ E| = |I ∩ O|` take the even side as the minority.
pub fn structure_profile(d: u32) -> Result<StructureProfile> {
    let g = check_dim(d, MAX_ENUM_DIM)?;
    let idx = SideIndex::new(&g);
    let even_tab = side_component_table(&g, &idx, Parity::Even);
    let odd_tab = side_component_table(&g, &idx, Parity::Odd);
    let unions = subset_unions(&idx.even_nbrs);
    let all_o = (1u64 << idx.odd.len()) - 1;
    let mut counts: HashMap<StructureKey, u64> = HashMap::new();
    for (s, &nb) in unions.iter().enumerate() {
        let free = all_o & !nb;
        let a = s.count_ones() as usize;
        let mut t = free;
        loop {
            let b = t.count_ones() as usize;
            let (min_size, (k, cl)) = if a <= b {
                (a, even_tab[s])
            } else {
                (b, odd_tab[t as usize])
            };
            let key = StructureKey {
                min_size,
                k: k as usize,
                cl: cl as usize,
                total_size: a + b,
            };
            *counts.entry(key).or_insert(0) += 1;
            if t == 0 {
                break;
            }
            t = (t - 1) & free;
        }
    }
    Ok(StructureProfile {
        d,
        counts: counts.into_iter().map(|(k, c)| (k, BigUint::from(c))).collect(),
    })
}

/// Exact joint law of `(|I_min|, k(I_min), cl(I_min))` under hc(λ).
pub fn structure_pmf(
    d: u32,
    lambda: &BigRational,
) -> Result<BTreeMap<(usize, usize, usize), ExactProbability>> {
    require_positive(lambda)?;
    let prof = structure_profile(d)?;
    let mut weights: BTreeMap<(usize, usize, usize), BigRational> = BTreeMap::new();
    for (key, c) in &prof.counts {
        let w = BigRational::from_integer(BigInt::from(c.clone()))
            * crate::rational::pow(lambda, key.total_size);
        *weights.entry((key.min_size, key.k, key.cl)).or_insert_with(BigRational::zero) += w;
    }
    let z: BigRational = weights.values().sum();
    Ok(weights
        .into_iter()
        .map(|(k, w)| (k, ExactProbability::new(w / &z)))
        .collect())
}

/// `P(target ∈ I | condition ∈ I)` under hc(λ), `d <= 5`.
pub fn conditional_occupancy(
    d: u32,
    lambda: &BigRational,
    condition: Vertex,
    target: Vertex,
) -> Result<ExactProbability> {
    require_positive(lambda)?;
    let g = check_dim(d, MAX_ENUM_DIM)?;
    if condition == target {
        return Err(Error::Precondition("condition and target coincide".into()));
    }
    if condition >= g.num_vertices() || target >= g.num_vertices() {
        return Err(Error::Range("vertex outside Q_d".into()));
    }
    if g.adjacent(condition, target) {
        return Ok(ExactProbability::zero());
    }
    let out = g.empty_set();
    let cond = restricted_profile(d, &g.set_of([condition]), &out)?;
    let both = restricted_profile(d, &g.set_of([condition, target]), &out)?;
    let num = evaluate_partition(&both, lambda)?;
    let den = evaluate_partition(&cond, lambda)?;
    Ok(ExactProbability::new(num / den))
}

/// Expected value of a law over nonnegative integers.
pub fn pmf_mean(pmf: &BTreeMap<usize, ExactProbability>) -> BigRational {
    pmf.iter()
        .map(|(k, p)| p.value() * BigRational::from_integer(BigInt::from(*k)))
        .sum()
}

/// Reduces a count ratio to lowest terms as integers (used by reports).
pub fn reduced(num: &BigUint, den: &BigUint) -> (BigUint, BigUint) {
    let g = num.gcd(den);
    (num / &g, den / &g)
}

pub fn to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn lam(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn b(s: &str) -> Vertex {
        Vertex::from_str_radix(s, 2).unwrap()
    }

    #[test]
    fn small_profiles() {
        let p1 = bivariate_profile(1).unwrap();
        assert_eq!(p1.to_text(), "d=1\n0 0 1\n0 1 1\n1 0 1\n");
        let p2 = bivariate_profile(2).unwrap();
        assert_eq!(p2.to_text(), "d=2\n0 0 1\n0 1 2\n0 2 1\n1 0 2\n2 0 1\n");
        assert_eq!(p2.total(), BigUint::from(7u32));
    }

    #[test]
    fn totals_and_invariants() {
        let expected = [3u64, 7, 35, 743, 254475];
        for d in 1..=5 {
            let p = bivariate_profile(d).unwrap();
            assert_eq!(p.total(), BigUint::from(expected[d as usize - 1]));
            p.check_invariants().unwrap();
        }
        assert!(matches!(bivariate_profile(7), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn partition_values() {
        let p2 = bivariate_profile(2).unwrap();
        assert_eq!(evaluate_partition(&p2, &lam("1")).unwrap(), lam("7"));
        // 1 + 4λ + 2λ²
        assert_eq!(evaluate_partition(&p2, &lam("1/3")).unwrap(), lam("1") + lam("4/3") + lam("2/9"));
        let p1 = bivariate_profile(1).unwrap();
        assert_eq!(evaluate_partition(&p1, &lam("2")).unwrap(), lam("5"));
        let p4 = bivariate_profile(4).unwrap();
        assert_eq!(evaluate_partition(&p4, &lam("1")).unwrap(), lam("743"));
        assert_eq!(evaluate_partition(&p4, &lam("0")), Err(Error::NonpositiveLambda));
        let lz = evaluate_partition_log(&p4, LogValue::from_f64(1.0)).unwrap();
        assert!((lz.ln() - 743f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn trivial_lower_bound_holds() {
        for d in 1..=5u32 {
            let p = bivariate_profile(d).unwrap();
            for l in ["1/10", "1/2", "1", "3"] {
                let l = lam(l);
                let z = evaluate_partition(&p, &l).unwrap();
                let one = BigRational::one();
                let floor = crate::rational::pow(&(&one + &l), 1 << (d - 1)) * BigRational::from_integer(2.into()) - one;
                assert!(z >= floor);
            }
        }
    }

    #[test]
    fn restricted_examples() {
        let g = CubeGraph::new(2).unwrap();
        let r = restricted_profile(2, &g.set_of([b("11")]), &g.empty_set()).unwrap();
        assert_eq!(r.to_text(), "d=2\n1 0 1\n2 0 1\n");
        assert_eq!(
            restricted_profile(2, &g.set_of([b("00"), b("01")]), &g.empty_set()),
            Err(Error::NotIndependent(0, 1))
        );
        for d in 1..=4 {
            let g = CubeGraph::new(d).unwrap();
            let e = g.empty_set();
            assert_eq!(restricted_profile(d, &e, &e).unwrap(), bivariate_profile(d).unwrap());
        }
    }

    #[test]
    fn min_side_examples() {
        let p2 = bivariate_profile(2).unwrap();
        let pmf = min_side_pmf(&p2, &lam("1")).unwrap();
        assert_eq!(pmf.len(), 1);
        assert_eq!(pmf[&0].value(), &BigRational::one());
        let p3 = bivariate_profile(3).unwrap();
        let pmf3 = min_side_pmf(&p3, &lam("1")).unwrap();
        assert!(pmf3[&1].to_f64() > 0.0);
        let total: BigRational = pmf3.values().map(|p| p.value().clone()).sum();
        assert_eq!(total, BigRational::one());
        let p1 = bivariate_profile(1).unwrap();
        assert_eq!(min_side_pmf(&p1, &lam("1")).unwrap()[&0].value(), &BigRational::one());
    }

    #[test]
    fn structure_examples() {
        let s2 = structure_pmf(2, &lam("1")).unwrap();
        assert_eq!(s2.len(), 1);
        assert_eq!(s2[&(0, 0, 0)].value(), &BigRational::one());
        for d in 2..=4 {
            let prof = structure_profile(d).unwrap();
            let p = bivariate_profile(d).unwrap();
            let mut marginal: BTreeMap<usize, BigUint> = BTreeMap::new();
            for ((a, b), c) in p.iter() {
                *marginal.entry(*a.min(b)).or_default() += c;
            }
            assert_eq!(prof.min_side_marginal(), marginal);
            for key in prof.counts.keys() {
                if key.min_size == 0 {
                    assert_eq!((key.k, key.cl), (0, 0));
                }
            }
        }
    }

    #[test]
    fn q3_minority_components_are_singletons() {
        // Any two same-side vertices of Q_3 cover the whole opposite side, so
        // a minority side never has two vertices.
        let s3 = structure_pmf(3, &lam("1")).unwrap();
        let big: BigRational = s3
            .iter()
            .filter(|((_, _, cl), _)| *cl > 1)
            .map(|(_, p)| p.value().clone())
            .sum();
        assert_eq!(big, BigRational::zero());
    }

    #[test]
    fn conditional_examples() {
        let half = conditional_occupancy(2, &lam("1"), b("11"), b("00")).unwrap();
        assert_eq!(half.value(), &lam("1/2"));
        let zero = conditional_occupancy(2, &lam("1"), b("01"), b("00")).unwrap();
        assert_eq!(zero.value(), &BigRational::zero());
        assert!(conditional_occupancy(2, &lam("1"), 1, 1).is_err());
        assert!(matches!(
            conditional_occupancy(6, &lam("1"), 0, 3),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn text_format_is_strict() {
        let p = bivariate_profile(3).unwrap();
        let text = p.to_text();
        assert_eq!(BivariateProfile::from_text(&text).unwrap(), p);
        assert!(BivariateProfile::from_text(text.trim_end()).is_err());
        assert!(BivariateProfile::from_text("d=2\n0 0 01\n").is_err());
        assert!(BivariateProfile::from_text("d=2\n0  0 1\n").is_err());
        assert!(BivariateProfile::from_text("d=2\n1 0 2\n0 0 1\n").is_err());
        assert!(BivariateProfile::from_text("d=2\n0 0 0\n").is_err());
        assert!(BivariateProfile::from_text("d=9\n").is_err());
    }
}
