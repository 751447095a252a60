//! Container pipeline on regular bipartite graphs: greedy covers, the first
//! and second approximations, and the counting bounds that go with them.

mod bounds;
mod graph;
pub mod harness;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub use bounds::{
    aggregate_bounds, assembled_gamma, binomial_sum_ln, family_bound_a1, family_bound_a2,
    reconstruction_bound, AggregateBounds, GammaReport,
};
pub use graph::{BipartiteGraph, BipartiteRegularGraph};

pub const DEFAULT_RETRY_CAP: u32 = 1000;

/// Greedy maximum coverage: repeatedly take the `y` covering the most
/// uncovered `x`, smallest index on ties. `a` and `b` must bound the `X`
/// degrees from below and the `Y` degrees from above.
pub fn greedy_cover(g: &BipartiteGraph, a: usize, b: usize) -> Result<Vec<usize>> {
    if let Some(x) = g.x_adj.iter().position(Vec::is_empty) {
        return Err(Error::Uncoverable(x));
    }
    if a == 0 || g.min_x_degree() < a || g.max_y_degree() > b {
        return Err(Error::Precondition(format!(
            "degrees do not match a={a}, b={b}"
        )));
    }
    let mut covered = vec![false; g.nx()];
    let mut left = g.nx();
    let mut gain: Vec<usize> = g.y_adj.iter().map(Vec::len).collect();
    let mut out = Vec::new();
    while left > 0 {
        let (best, _) = gain
            .iter()
            .enumerate()
            .max_by(|(i, u), (j, v)| u.cmp(v).then(j.cmp(i)))
            .expect("uncovered x has a neighbour");
        out.push(best);
        for &x in &g.y_adj[best] {
            if !covered[x] {
                covered[x] = true;
                left -= 1;
                for &y in &g.x_adj[x] {
                    gain[y] -= 1;
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `(|Y|/a)(1 + ln b)`.
pub fn cover_size_bound(ny: usize, a: usize, b: usize) -> f64 {
    ny as f64 / a as f64 * (1.0 + (b.max(1) as f64).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    First,
    Second,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::First => "first",
            Stage::Second => "second",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainerParams {
    /// φ for the first stage, ψ for the second.
    pub phi_or_psi: usize,
    pub c: Option<f64>,
    /// Slack `td/(d−φ)` inherited from the first stage.
    pub x: Option<f64>,
    pub t: usize,
}

/// `outer ⊆ Y` and `inner ⊆ X` approximating `N(A)` and `[A]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainerPair {
    pub outer: BTreeSet<usize>,
    pub inner: BTreeSet<usize>,
    pub stage: Stage,
    pub params: ContainerParams,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproxTranscript {
    pub t0: Vec<usize>,
    pub t0_prime: Vec<usize>,
    pub t1: Vec<usize>,
    /// Edges `(y, x)` from `T0` to `X ∖ [A]`.
    pub omega: Vec<(usize, usize)>,
    pub retries: u32,
    /// Vertices `u` whose neighbourhoods were added, in order.
    pub refinement: Vec<usize>,
    /// `F′` as built by the pipeline, before refinement.
    pub f_prime: BTreeSet<usize>,
}

/// `F′` recomputed from `(T0, T0′, T1, Ω)` alone.
pub fn reconstruct_f_prime(g: &BipartiteRegularGraph, tr: &ApproxTranscript) -> BTreeSet<usize> {
    let outside: BTreeSet<usize> = tr.omega.iter().map(|&(_, x)| x).collect();
    let inside: Vec<usize> = tr
        .t0
        .iter()
        .flat_map(|&y| g.y_neighbors(y).iter().copied())
        .filter(|x| !outside.contains(x))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut f: BTreeSet<usize> = inside
        .iter()
        .flat_map(|&x| g.x_neighbors(x).iter().copied())
        .collect();
    f.extend(tr.t0_prime.iter().copied());
    f.extend(tr.t1.iter().copied());
    f
}

/// Shared facts about a source set `A`.
struct Source {
    in_na: Vec<bool>,
    na: Vec<usize>,
    in_cl: Vec<bool>,
    cl: Vec<usize>,
    t: usize,
}

impl Source {
    fn new(g: &BipartiteRegularGraph, a: &[usize]) -> Result<Source> {
        let mut a = a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.is_empty() || a.iter().any(|&x| x >= g.side_size()) {
            return Err(Error::Precondition("A must be a nonempty subset of X".into()));
        }
        if !g.is_two_linked(&a) {
            return Err(Error::Precondition("A is not 2-linked".into()));
        }
        let in_na = g.neighborhood(&a);
        let na: Vec<usize> = (0..in_na.len()).filter(|&y| in_na[y]).collect();
        let cl = g.closure(&a);
        let mut in_cl = vec![false; g.side_size()];
        for &x in &cl {
            in_cl[x] = true;
        }
        let t = na.len() - cl.len();
        Ok(Source { in_na, na, in_cl, cl, t })
    }
}

fn count_in(list: &[usize], set: &[bool]) -> usize {
    list.iter().filter(|&&v| set[v]).count()
}

fn mask_of(n: usize, items: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut m = vec![false; n];
    for i in items {
        m[i] = true;
    }
    m
}

fn set_of_mask(m: &[bool]) -> BTreeSet<usize> {
    (0..m.len()).filter(|&i| m[i]).collect()
}

/// Adds `N(u)` for the smallest `u ∈ [A]` with more than `limit` neighbours
/// outside `f`, until none is left. Returns the chosen vertices.
fn refine(g: &BipartiteRegularGraph, cl: &[usize], f: &mut [bool], limit: usize) -> Vec<usize> {
    let d = g.degree();
    let mut chosen = Vec::new();
    while let Some(&u) = cl
        .iter()
        .find(|&&u| d - count_in(g.x_neighbors(u), f) > limit)
    {
        for &y in g.x_neighbors(u) {
            f[y] = true;
        }
        chosen.push(u);
    }
    chosen
}

/// First approximation with `m_φ` supplied by the caller.
#[allow(clippy::too_many_arguments)]
pub fn first_approx_with(
    g: &BipartiteRegularGraph,
    a: &[usize],
    phi: usize,
    c: f64,
    seed: u64,
    retry_cap: u32,
    m_phi: usize,
) -> Result<(ContainerPair, ApproxTranscript)> {
    let d = g.degree();
    if phi == 0 || phi >= d {
        return Err(Error::Precondition(format!("φ={phi} outside [1, {}]", d - 1)));
    }
    let p = c * (d as f64).ln() / (phi as f64 * d as f64);
    if !(c > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("C log d/(φd) = {p} is not in (0, 1)")));
    }
    let src = Source::new(g, a)?;
    let (ny, nx) = (g.side_size(), g.side_size());
    let gsz = src.na.len() as f64;
    let t0_max = 3.0 * gsz * p;
    let omega_max = 3.0 * src.t as f64 * d as f64 * p;
    let t0p_max = 3.0 * gsz * (-p * m_phi as f64).exp();
    let n_phi: Vec<usize> = src
        .na
        .iter()
        .copied()
        .filter(|&y| count_in(g.y_neighbors(y), &src.in_cl) > phi)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = None;
    for attempt in 1..=retry_cap {
        let t0: Vec<usize> = src.na.iter().copied().filter(|_| rng.gen_bool(p)).collect();
        let omega: Vec<(usize, usize)> = t0
            .iter()
            .flat_map(|&y| g.y_neighbors(y).iter().map(move |&x| (y, x)))
            .filter(|&(_, x)| !src.in_cl[x])
            .collect();
        let inside: BTreeSet<usize> = t0
            .iter()
            .flat_map(|&y| g.y_neighbors(y).iter().copied())
            .filter(|&x| src.in_cl[x])
            .collect();
        let l1 = mask_of(ny, inside.iter().flat_map(|&x| g.x_neighbors(x).iter().copied()));
        let t0_prime: Vec<usize> = n_phi.iter().copied().filter(|&y| !l1[y]).collect();
        if t0.len() as f64 <= t0_max
            && omega.len() as f64 <= omega_max
            && t0_prime.len() as f64 <= t0p_max
        {
            found = Some((t0, omega, l1, t0_prime, attempt));
            break;
        }
    }
    let (t0, omega, mut l, t0_prime, retries) = found.ok_or(Error::RetryExhausted(retry_cap))?;
    for &y in &t0_prime {
        l[y] = true;
    }

    // Cover [A] ∖ N(L) by N(A) ∖ L.
    let n_l = mask_of(nx, (0..ny).filter(|&y| l[y]).flat_map(|y| g.y_neighbors(y).iter().copied()));
    let xs: Vec<usize> = src.cl.iter().copied().filter(|&x| !n_l[x]).collect();
    let ys: Vec<usize> = src.na.iter().copied().filter(|&y| !l[y]).collect();
    let t1: Vec<usize> = if xs.is_empty() {
        Vec::new()
    } else {
        let h = g.graph().induced(&xs, &ys);
        greedy_cover(&h, h.min_x_degree(), h.max_y_degree())?
            .into_iter()
            .map(|i| ys[i])
            .collect()
    };
    let mut f = l;
    for &y in &t1 {
        f[y] = true;
    }
    let f_prime = set_of_mask(&f);

    let refinement = refine(g, &src.cl, &mut f, phi);
    let inner: BTreeSet<usize> = (0..nx)
        .filter(|&u| count_in(g.x_neighbors(u), &f) + phi >= d)
        .collect();
    let pair = ContainerPair {
        outer: set_of_mask(&f),
        inner,
        stage: Stage::First,
        params: ContainerParams {
            phi_or_psi: phi,
            c: Some(c),
            x: None,
            t: src.t,
        },
    };
    let transcript = ApproxTranscript {
        t0,
        t0_prime,
        t1,
        omega,
        retries,
        refinement,
        f_prime,
    };
    Ok((pair, transcript))
}

/// First approximation `(F★, S★)` of a 2-linked `A ⊆ X`.
pub fn first_approx(
    g: &BipartiteRegularGraph,
    a: &[usize],
    phi: usize,
    c: f64,
    seed: u64,
    retry_cap: u32,
) -> Result<(ContainerPair, ApproxTranscript)> {
    let m = g
        .m_phi(phi)
        .ok_or_else(|| Error::Precondition(format!("φ={phi} is not below d")))?;
    first_approx_with(g, a, phi, c, seed, retry_cap, m)
}

/// Second approximation `(F, S)` from a first-stage pair.
pub fn second_approx(
    g: &BipartiteRegularGraph,
    a: &[usize],
    pair: &ContainerPair,
    psi: usize,
) -> Result<ContainerPair> {
    let d = g.degree();
    if psi == 0 || 2 * psi > d {
        return Err(Error::Precondition(format!("ψ={psi} outside [1, d/2]")));
    }
    if pair.stage != Stage::First || !check_first(g, a, pair)?.pass {
        return Err(Error::Precondition("pair is not a valid first-stage pair for A".into()));
    }
    let src = Source::new(g, a)?;
    let nx = g.side_size();
    let mut f = mask_of(nx, pair.outer.iter().copied());
    refine(g, &src.cl, &mut f, psi);

    // S is {u : d_F(u) ≥ d−ψ} minus vertices dropped below. A vertex of
    // Y ∖ F seeing more than ψ of S is either moved into F (inside N(A)) or
    // has its S-neighbours dropped; those lie outside [A].
    let mut dropped = vec![false; nx];
    loop {
        let s: Vec<bool> = (0..nx)
            .map(|u| !dropped[u] && count_in(g.x_neighbors(u), &f) + psi >= d)
            .collect();
        let bad = (0..nx).find(|&v| !f[v] && count_in(g.y_neighbors(v), &s) > psi);
        match bad {
            None => {
                let x = src.t as f64 * d as f64 / (d - pair.params.phi_or_psi) as f64;
                return Ok(ContainerPair {
                    outer: set_of_mask(&f),
                    inner: set_of_mask(&s),
                    stage: Stage::Second,
                    params: ContainerParams {
                        phi_or_psi: psi,
                        c: pair.params.c,
                        x: Some(x),
                        t: src.t,
                    },
                });
            }
            Some(v) if src.in_na[v] => f[v] = true,
            Some(v) => {
                for &u in g.y_neighbors(v) {
                    if s[u] {
                        dropped[u] = true;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractCheck {
    pub pass: bool,
    pub slack_outer: f64,
    pub slack_inner: f64,
    pub violations: Vec<String>,
}

/// Stage-first conditions: `outer ⊆ N(A)`, `inner ⊇ [A]`, and both
/// differences at most `td/(d−φ)`. Slacks are the bound minus the size.
pub fn check_first(g: &BipartiteRegularGraph, a: &[usize], pair: &ContainerPair) -> Result<ContractCheck> {
    let src = Source::new(g, a)?;
    let d = g.degree();
    let phi = pair.params.phi_or_psi;
    if phi == 0 || phi >= d {
        return Err(Error::Precondition(format!("φ={phi} outside [1, d−1]")));
    }
    let mut v = Vec::new();
    if pair.outer.iter().any(|&y| y >= g.side_size() || !src.in_na[y]) {
        v.push("outer ⊄ N(A)".to_string());
    }
    if src.cl.iter().any(|x| !pair.inner.contains(x)) {
        v.push("inner ⊉ [A]".to_string());
    }
    let missing = src.na.iter().filter(|y| !pair.outer.contains(y)).count();
    let extra = pair.inner.iter().filter(|&&x| x >= g.side_size() || !src.in_cl[x]).count();
    let budget = src.t * d;
    if missing * (d - phi) > budget {
        v.push(format!("|N(A)∖outer| = {missing} exceeds td/(d−φ)"));
    }
    if extra * (d - phi) > budget {
        v.push(format!("|inner∖[A]| = {extra} exceeds td/(d−φ)"));
    }
    let bound = budget as f64 / (d - phi) as f64;
    Ok(ContractCheck {
        pass: v.is_empty(),
        slack_outer: bound - missing as f64,
        slack_inner: bound - extra as f64,
        violations: v,
    })
}

/// Stage-second conditions. `slack_outer` is the least excess of
/// `d_{X∖inner}(v)` over `d−ψ` for `v ∉ outer`; `slack_inner` is the room
/// left in `|inner| ≤ |outer| + 2tψ/(d−ψ)`.
pub fn check_second(g: &BipartiteRegularGraph, a: &[usize], pair: &ContainerPair) -> Result<ContractCheck> {
    let src = Source::new(g, a)?;
    let d = g.degree();
    let psi = pair.params.phi_or_psi;
    if psi == 0 || 2 * psi > d {
        return Err(Error::Precondition(format!("ψ={psi} outside [1, d/2]")));
    }
    let n = g.side_size();
    let f = mask_of(n, pair.outer.iter().copied().filter(|&y| y < n));
    let s = mask_of(n, pair.inner.iter().copied().filter(|&x| x < n));
    let mut v = Vec::new();
    if pair.outer.iter().any(|&y| y >= n || !src.in_na[y]) {
        v.push("outer ⊄ N(A)".to_string());
    }
    if src.cl.iter().any(|&x| !s[x]) {
        v.push("inner ⊉ [A]".to_string());
    }
    if let Some(u) = (0..n).find(|&u| s[u] && count_in(g.x_neighbors(u), &f) + psi < d) {
        v.push(format!("inner vertex {u} has fewer than d−ψ neighbours in outer"));
    }
    let mut v_slack = d as i64;
    for y in (0..n).filter(|&y| !f[y]) {
        let free = g.y_neighbors(y).iter().filter(|&&x| !s[x]).count() as i64;
        v_slack = v_slack.min(free - (d - psi) as i64);
    }
    if v_slack < 0 {
        v.push("some v ∉ outer has fewer than d−ψ neighbours outside inner".to_string());
    }
    let (fs, ss) = (pair.outer.len(), pair.inner.len());
    if ss * (d - psi) > fs * (d - psi) + 2 * src.t * psi {
        v.push(format!("|inner| = {ss} exceeds |outer| + 2tψ/(d−ψ)"));
    }
    let room = fs as f64 + 2.0 * src.t as f64 * psi as f64 / (d - psi) as f64 - ss as f64;
    Ok(ContractCheck {
        pass: v.is_empty(),
        slack_outer: v_slack as f64,
        slack_inner: room,
        violations: v,
    })
}
