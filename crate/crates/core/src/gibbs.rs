//! Exact finite-volume Gibbs measures.
//!
//! Two independent routes are provided: exhaustive enumeration with Gray-code
//! updates for small volumes, and message passing on the tree for large ones
//! (a two-state recursion for nearest-neighbor models and a four-state one
//! that carries the parent spin when `J₂ ≠ 0`). Both accept clamped sites.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::model::{energy_from_counts, Boundary, Label, Model, Spin, MINUS, PLUS};
use crate::numerics::{logsumexp, Compensated};
use crate::tree::{self, VertexWord, Volume};

/// Largest number of free sites handled by enumeration.
pub const ENUMERATION_LIMIT: usize = 24;
/// Largest radius accepted by any engine (the tree recursions are linear
/// in `|V_n|`, enumeration and sampling are far smaller in practice).
pub const DP_RADIUS_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    pub beta: f64,
    pub model: Model,
    pub n: usize,
    pub boundary: Boundary,
}

impl GibbsParams {
    pub fn new(beta: f64, model: Model, n: usize, boundary: Boundary) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("β must be a finite non-negative number, got {beta}")));
        }
        check_dp_radius(n)?;
        boundary.validate(n)?;
        Ok(GibbsParams {
            beta,
            model,
            n,
            boundary,
        })
    }
}

/// Optional fixed spins on `V_n`, indexed canonically.
pub type Clamp = Vec<Option<Spin>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsResult {
    pub log_partition: f64,
    /// `P(σ(x) = −1)` for every `x ∈ V_n` in canonical order. For the general
    /// model this is the probability of label `v₂`.
    pub marginals: Vec<f64>,
    /// `P(σ(x) ≠ σ(parent))` for every non-root `x ∈ V_n`, when computed.
    pub pair_marginals: Option<Vec<f64>>,
}

impl GibbsResult {
    pub fn marginal(&self, v: &VertexWord) -> Option<f64> {
        let vol = Volume::new(v.len());
        self.marginals.get(vol.index_of(v)?).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Enumeration,
    Dp,
}

fn check_clamp(p: &GibbsParams, clamp: &[Option<Spin>]) -> Result<()> {
    let size = tree::ball_size(p.n);
    if clamp.len() != size {
        return Err(Error::InvalidParameter(format!(
            "clamp has {} entries, V_{} has {size}",
            clamp.len(),
            p.n
        )));
    }
    if clamp.iter().flatten().any(|&s| s != PLUS && s != MINUS) {
        return Err(Error::InvalidParameter("clamped spins must be ±1".into()));
    }
    Ok(())
}

pub fn free_clamp(n: usize) -> Clamp {
    vec![None; tree::ball_size(n)]
}

/// Exact result by the requested route.
pub fn exact(p: &GibbsParams, method: Method) -> Result<GibbsResult> {
    exact_clamped(p, &free_clamp(p.n), method)
}

pub fn exact_clamped(p: &GibbsParams, clamp: &[Option<Spin>], method: Method) -> Result<GibbsResult> {
    match method {
        Method::Enumeration => enumerate_partition_clamped(p, clamp),
        Method::Dp if p.model.is_nearest_neighbor() => dp_marginals_nn_clamped(p, clamp),
        Method::Dp => dp_marginals_nnn_clamped(p, clamp),
    }
}

// ---------------------------------------------------------------------------
// enumeration

#[derive(Clone, Debug)]
struct BlockSum {
    shift: f64,
    z: Compensated,
    sites: Vec<Compensated>,
    edges: Vec<Compensated>,
}

impl BlockSum {
    fn new(free: usize, edges: usize) -> Self {
        BlockSum {
            shift: f64::NEG_INFINITY,
            z: Compensated::default(),
            sites: vec![Compensated::default(); free],
            edges: vec![Compensated::default(); edges],
        }
    }

    fn rescale_to(&mut self, shift: f64) {
        let f = (self.shift - shift).exp();
        self.z.scale(f);
        for s in self.sites.iter_mut().chain(self.edges.iter_mut()) {
            s.scale(f);
        }
        self.shift = shift;
    }

    fn merge(&mut self, other: &BlockSum) {
        if other.shift == f64::NEG_INFINITY {
            return;
        }
        if other.shift > self.shift {
            self.rescale_to(other.shift);
        }
        let f = (other.shift - self.shift).exp();
        self.z.add_scaled(&other.z, f);
        for (a, b) in self.sites.iter_mut().zip(&other.sites) {
            a.add_scaled(b, f);
        }
        for (a, b) in self.edges.iter_mut().zip(&other.edges) {
            a.add_scaled(b, f);
        }
    }
}

/// All interacting pairs inside `V_{n+1}`, split by kind.
pub(crate) struct PairList {
    pub edges: Vec<(usize, usize)>,
    pub seconds: Vec<(usize, usize)>,
}

impl PairList {
    pub fn new(vol: &Volume) -> Self {
        let mut edges = Vec::new();
        let mut seconds = Vec::new();
        for i in 0..vol.len() {
            if let Some(p) = vol.parent(i) {
                edges.push((i, p));
                if let Some(g) = vol.parent(p) {
                    seconds.push((i, g));
                }
            }
            let kids: Vec<usize> = vol.children(i).collect();
            for a in 0..kids.len() {
                for b in a + 1..kids.len() {
                    seconds.push((kids[a], kids[b]));
                }
            }
        }
        PairList { edges, seconds }
    }

    pub fn counts(&self, model: &Model, s: &[Spin]) -> [i64; 3] {
        let mut c = [0i64; 3];
        for &(x, y) in &self.edges {
            add3(&mut c, model.edge_counts(s[x], s[y]));
        }
        for &(x, y) in &self.seconds {
            add3(&mut c, model.second_counts(s[x], s[y]));
        }
        c
    }
}

fn add3(acc: &mut [i64; 3], d: [i64; 3]) {
    for k in 0..3 {
        acc[k] += d[k];
    }
}

fn sub3(acc: &mut [i64; 3], d: [i64; 3]) {
    for k in 0..3 {
        acc[k] -= d[k];
    }
}

/// Exact log-partition and marginals by summing over every configuration.
pub fn enumerate_partition(p: &GibbsParams) -> Result<GibbsResult> {
    enumerate_partition_clamped(p, &free_clamp(p.n))
}

pub fn enumerate_partition_clamped(p: &GibbsParams, clamp: &[Option<Spin>]) -> Result<GibbsResult> {
    check_clamp(p, clamp)?;
    let inner = tree::ball_size(p.n);
    let free: Vec<usize> = (0..inner).filter(|&i| clamp[i].is_none()).collect();
    if free.len() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationCapacity {
            sites: free.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let vol = Volume::new(p.n + 1);
    let pairs = PairList::new(&vol);
    let mut base: Vec<Spin> = (0..vol.len())
        .map(|i| {
            if i < inner {
                clamp[i].unwrap_or(PLUS)
            } else {
                p.boundary.spin(i - inner)
            }
        })
        .collect();
    base.shrink_to_fit();

    // incident pairs of every free site
    let mut inc_edges: Vec<Vec<usize>> = vec![Vec::new(); vol.len()];
    for &(x, y) in &pairs.edges {
        inc_edges[x].push(y);
        inc_edges[y].push(x);
    }
    let mut inc_seconds: Vec<Vec<usize>> = vec![Vec::new(); vol.len()];
    for &(x, y) in &pairs.seconds {
        inc_seconds[x].push(y);
        inc_seconds[y].push(x);
    }
    let inner_edges: Vec<(usize, usize)> = (1..inner)
        .map(|i| (i, vol.parent(i).expect("non-root")))
        .collect();

    let coeffs = p.model.coefficients();
    let beta = p.beta;
    let model = p.model;
    let f = free.len();
    let top = f.min(6);
    let low = f - top;

    let block = |b: usize| -> BlockSum {
        let mut s = base.clone();
        for k in 0..top {
            if b >> k & 1 == 1 {
                s[free[low + k]] = MINUS;
            }
        }
        let mut counts = pairs.counts(&model, &s);
        let mut acc = BlockSum::new(f, inner_edges.len());
        let steps: u64 = 1 << low;
        for step in 0..steps {
            let logw = -beta * energy_from_counts(&coeffs, &counts);
            if logw > acc.shift {
                acc.rescale_to(logw);
            }
            let w = (logw - acc.shift).exp();
            acc.z.add(w);
            for (k, &site) in free.iter().enumerate() {
                if s[site] == MINUS {
                    acc.sites[k].add(w);
                }
            }
            for (k, &(x, y)) in inner_edges.iter().enumerate() {
                if s[x] != s[y] {
                    acc.edges[k].add(w);
                }
            }
            if step + 1 < steps {
                let site = free[(step + 1).trailing_zeros() as usize];
                let old = s[site];
                for &o in &inc_edges[site] {
                    sub3(&mut counts, model.edge_counts(old, s[o]));
                    add3(&mut counts, model.edge_counts(-old, s[o]));
                }
                for &o in &inc_seconds[site] {
                    sub3(&mut counts, model.second_counts(old, s[o]));
                    add3(&mut counts, model.second_counts(-old, s[o]));
                }
                s[site] = -old;
            }
        }
        acc
    };

    let blocks: Vec<BlockSum> = (0..1usize << top).into_par_iter().map(block).collect();
    let mut total = BlockSum::new(f, inner_edges.len());
    for b in &blocks {
        total.merge(b);
    }
    let z = total.z.value();
    let mut marginals: Vec<f64> = clamp
        .iter()
        .map(|c| if *c == Some(MINUS) { 1.0 } else { 0.0 })
        .collect();
    for (k, &site) in free.iter().enumerate() {
        marginals[site] = total.sites[k].value() / z;
    }
    let pair_marginals = Some(total.edges.iter().map(|e| e.value() / z).collect());
    Ok(GibbsResult {
        log_partition: total.shift + z.ln(),
        marginals,
        pair_marginals,
    })
}

// ---------------------------------------------------------------------------
// nearest-neighbor recursion

fn spin_of(s: usize) -> Spin {
    if s == 0 {
        PLUS
    } else {
        MINUS
    }
}

fn state_of(s: Spin) -> usize {
    usize::from(s < 0)
}

fn clamp_log(c: Option<Spin>) -> [f64; 2] {
    match c {
        None => [0.0, 0.0],
        Some(s) if s > 0 => [0.0, f64::NEG_INFINITY],
        Some(_) => [f64::NEG_INFINITY, 0.0],
    }
}

fn lse2(a: f64, b: f64) -> f64 {
    logsumexp(&[a, b])
}

fn normalize2(v: &mut [f64; 2]) -> f64 {
    let m = v[0].max(v[1]);
    v[0] -= m;
    v[1] -= m;
    m
}

/// `w[a][b] = −β·e(a, b)` for nearest-neighbor states.
fn edge_table(model: &Model, beta: f64) -> [[f64; 2]; 2] {
    let mut w = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            w[a][b] = -beta * model.edge_energy(spin_of(a), spin_of(b));
        }
    }
    w
}

/// Message a vertex with local log-weights `below` sends to its parent.
fn edge_message(w: &[[f64; 2]; 2], below: [f64; 2]) -> [f64; 2] {
    [0, 1].map(|sp| lse2(w[0][sp] + below[0], w[1][sp] + below[1]))
}

fn check_dp_radius(n: usize) -> Result<()> {
    if n > DP_RADIUS_LIMIT {
        return Err(Error::DpCapacity {
            radius: n,
            limit: DP_RADIUS_LIMIT,
        });
    }
    Ok(())
}

fn softmax_minus(v: [f64; 2]) -> f64 {
    let l = lse2(v[0], v[1]);
    (v[1] - l).exp()
}

/// Exact marginals for nearest-neighbor models by two-pass message passing.
pub fn dp_marginals_nn(p: &GibbsParams) -> Result<GibbsResult> {
    dp_marginals_nn_clamped(p, &free_clamp(p.n))
}

pub fn dp_marginals_nn_clamped(p: &GibbsParams, clamp: &[Option<Spin>]) -> Result<GibbsResult> {
    Ok(dp_nn(p, clamp)?.result)
}

/// A recursion result with `ln Z` split into per-vertex normalizers and the
/// root term, so that two runs can be compared term by term.
struct DpRun {
    result: GibbsResult,
    norms: Vec<f64>,
    root: f64,
}

impl DpRun {
    fn new(marginals: Vec<f64>, norms: Vec<f64>, root: f64) -> Self {
        let mut z = Compensated::default();
        for &x in &norms {
            z.add(x);
        }
        z.add(root);
        DpRun {
            result: GibbsResult {
                log_partition: z.value(),
                marginals,
                pair_marginals: None,
            },
            norms,
            root,
        }
    }

    /// `ln(Z_self / Z_other)` from the differences of matching terms.
    fn log_ratio(&self, other: &DpRun) -> f64 {
        let mut acc = Compensated::default();
        for (a, b) in self.norms.iter().zip(&other.norms) {
            if a != b {
                acc.add(a - b);
            }
        }
        acc.add(self.root - other.root);
        acc.value()
    }
}

fn dp_nn(p: &GibbsParams, clamp: &[Option<Spin>]) -> Result<DpRun> {
    if !p.model.is_nearest_neighbor() {
        return Err(Error::Unsupported(
            "J₂ ≠ 0 needs the second-neighbor recursion (dp_marginals_nnn)".into(),
        ));
    }
    check_dp_radius(p.n)?;
    check_clamp(p, clamp)?;
    let vol = Volume::new(p.n + 1);
    let inner = tree::ball_size(p.n);
    let w = edge_table(&p.model, p.beta);

    let mut below: Vec<[f64; 2]> = clamp.iter().map(|&c| clamp_log(c)).collect();
    let mut up: Vec<[f64; 2]> = vec![[0.0; 2]; inner];
    let mut norms = vec![0.0; inner];
    for i in (0..inner).rev() {
        for c in vol.children(i) {
            for s in 0..2 {
                below[i][s] += if c >= inner {
                    w[s][state_of(p.boundary.spin(c - inner))]
                } else {
                    up[c][s]
                };
            }
        }
        if i != 0 {
            let mut m = edge_message(&w, below[i]);
            norms[i] = normalize2(&mut m);
            up[i] = m;
        }
    }
    let root = lse2(below[0][0], below[0][1]);

    let mut down: Vec<[f64; 2]> = vec![[0.0; 2]; inner];
    let mut marginals = vec![0.0; inner];
    for i in 0..inner {
        marginals[i] = softmax_minus([below[i][0] + down[i][0], below[i][1] + down[i][1]]);
        for c in vol.children(i).filter(|&c| c < inner) {
            let rest = [0, 1].map(|s| below[i][s] - up[c][s] + down[i][s]);
            let mut d = edge_message(&w, rest);
            normalize2(&mut d);
            down[c] = d;
        }
    }
    Ok(DpRun::new(marginals, norms, root))
}

// ---------------------------------------------------------------------------
// second-neighbor recursion

fn sg(s: usize) -> f64 {
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

fn normalize4(m: &mut [[f64; 2]; 2]) -> f64 {
    let mx = m.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x -= mx;
        }
    }
    mx
}

/// Exact marginals for the competing-interaction model. Messages carry the
/// spin of the sending vertex and of its parent; the two children of a
/// vertex are summed jointly so that sibling and grandparent terms are
/// exact.
pub fn dp_marginals_nnn(p: &GibbsParams) -> Result<GibbsResult> {
    dp_marginals_nnn_clamped(p, &free_clamp(p.n))
}

pub fn dp_marginals_nnn_clamped(p: &GibbsParams, clamp: &[Option<Spin>]) -> Result<GibbsResult> {
    Ok(dp_nnn(p, clamp)?.result)
}

fn dp_nnn(p: &GibbsParams, clamp: &[Option<Spin>]) -> Result<DpRun> {
    let j = match p.model {
        Model::Competing(j) => j,
        Model::General(_) => {
            return Err(Error::Unsupported(
                "the second-neighbor recursion applies to the competing model".into(),
            ))
        }
    };
    check_dp_radius(p.n)?;
    check_clamp(p, clamp)?;
    let vol = Volume::new(p.n + 1);
    let inner = tree::ball_size(p.n);
    let a = -p.beta * j.j1;
    let b = -p.beta * j.j2;
    let cl: Vec<[f64; 2]> = clamp.iter().map(|&c| clamp_log(c)).collect();

    // candidate states of a vertex: free ones range over both values
    let states = |c: usize| -> Vec<usize> {
        if c >= inner {
            vec![state_of(p.boundary.spin(c - inner))]
        } else {
            vec![0, 1]
        }
    };
    let zero = [[0.0; 2]; 2];
    let mut msg: Vec<[[f64; 2]; 2]> = vec![zero; vol.len()];
    let mut norms = vec![0.0; inner];
    for v in (1..inner).rev() {
        let kids: Vec<usize> = vol.children(v).collect();
        let (c1, c2) = (kids[0], kids[1]);
        let mut m = [[f64::NEG_INFINITY; 2]; 2];
        for sv in 0..2 {
            for sp in 0..2 {
                let mut terms = Vec::with_capacity(4);
                for &x1 in &states(c1) {
                    for &x2 in &states(c2) {
                        terms.push(
                            a * sg(x1) * sg(sv)
                                + b * sg(x1) * sg(sp)
                                + msg[c1][x1][sv]
                                + a * sg(x2) * sg(sv)
                                + b * sg(x2) * sg(sp)
                                + msg[c2][x2][sv]
                                + b * sg(x1) * sg(x2),
                        );
                    }
                }
                m[sv][sp] = cl[v][sv] + logsumexp(&terms);
            }
        }
        norms[v] = normalize4(&mut m);
        msg[v] = m;
    }

    let rk: Vec<usize> = vol.children(0).collect();
    let mut root = [f64::NEG_INFINITY; 2];
    for se in 0..2 {
        let mut terms = Vec::with_capacity(8);
        for &x1 in &states(rk[0]) {
            for &x2 in &states(rk[1]) {
                for &x3 in &states(rk[2]) {
                    let xs = [x1, x2, x3];
                    let mut t = b * (sg(x1) * sg(x2) + sg(x1) * sg(x3) + sg(x2) * sg(x3));
                    for k in 0..3 {
                        t += a * sg(xs[k]) * sg(se) + msg[rk[k]][xs[k]][se];
                    }
                    terms.push(t);
                }
            }
        }
        root[se] = cl[0][se] + logsumexp(&terms);
    }
    let root_term = lse2(root[0], root[1]);

    let mut marginals = vec![0.0; inner];
    marginals[0] = softmax_minus(root);
    let mut down: Vec<[[f64; 2]; 2]> = vec![zero; inner];
    if inner > 1 {
        for k in 0..3 {
            let c = rk[k];
            let o1 = rk[(k + 1) % 3];
            let o2 = rk[(k + 2) % 3];
            let mut d = [[f64::NEG_INFINITY; 2]; 2];
            for xc in 0..2 {
                for se in 0..2 {
                    let mut terms = Vec::with_capacity(4);
                    for xa in 0..2 {
                        for xb in 0..2 {
                            terms.push(
                                a * sg(se) * (sg(xc) + sg(xa) + sg(xb))
                                    + msg[o1][xa][se]
                                    + msg[o2][xb][se]
                                    + b * (sg(xc) * sg(xa) + sg(xc) * sg(xb) + sg(xa) * sg(xb)),
                            );
                        }
                    }
                    d[xc][se] = cl[0][se] + logsumexp(&terms);
                }
            }
            normalize4(&mut d);
            down[c] = d;
        }
    }
    for v in 1..inner {
        let belief = [0, 1].map(|sv| lse2(down[v][sv][0] + msg[v][sv][0], down[v][sv][1] + msg[v][sv][1]));
        marginals[v] = softmax_minus(belief);
        let kids: Vec<usize> = vol.children(v).filter(|&c| c < inner).collect();
        if kids.is_empty() {
            continue;
        }
        for (k, &c) in kids.iter().enumerate() {
            let o = kids[1 - k];
            let mut d = [[f64::NEG_INFINITY; 2]; 2];
            for xc in 0..2 {
                for sv in 0..2 {
                    let mut terms = Vec::with_capacity(4);
                    for sp in 0..2 {
                        for xo in 0..2 {
                            terms.push(
                                down[v][sv][sp]
                                    + a * sg(xc) * sg(sv)
                                    + b * sg(xc) * sg(sp)
                                    + a * sg(xo) * sg(sv)
                                    + b * sg(xo) * sg(sp)
                                    + msg[o][xo][sv]
                                    + b * sg(xc) * sg(xo),
                            );
                        }
                    }
                    d[xc][sv] = cl[v][sv] + logsumexp(&terms);
                }
            }
            normalize4(&mut d);
            down[c] = d;
        }
    }
    Ok(DpRun::new(marginals, norms, root_term))
}

/// `ln P(σ agrees with every clamped site)`. The recursion route compares
/// the clamped and free runs vertex by vertex, so the result keeps full
/// relative precision even when `ln Z` is large.
pub fn log_clamp_probability(p: &GibbsParams, clamp: &[Option<Spin>], method: Method) -> Result<f64> {
    match method {
        Method::Enumeration => {
            let z = enumerate_partition(p)?.log_partition;
            Ok(enumerate_partition_clamped(p, clamp)?.log_partition - z)
        }
        Method::Dp => {
            let free = free_clamp(p.n);
            let (c, f) = if p.model.is_nearest_neighbor() {
                (dp_nn(p, clamp)?, dp_nn(p, &free)?)
            } else {
                (dp_nnn(p, clamp)?, dp_nnn(p, &free)?)
            };
            Ok(c.log_ratio(&f))
        }
    }
}

// ---------------------------------------------------------------------------
// critical inverse temperature

/// Inverse temperature at which the zero-field fixed point of the
/// nearest-neighbor recursion (two children per vertex) loses stability,
/// found by bisection on `|d/dh [2·F(h)]|_{h=0}| = 1`, where `F` maps a
/// vertex's log-ratio field to the log-ratio of the message it sends.
pub fn critical_beta(model: &Model) -> Result<f64> {
    if !model.is_nearest_neighbor() {
        return Err(Error::Unsupported("β_c is computed for nearest-neighbor models".into()));
    }
    let ratio = |beta: f64, h: f64| {
        let m = edge_message(&edge_table(model, beta), [0.5 * h, -0.5 * h]);
        m[0] - m[1]
    };
    if ratio(1.0, 0.0).abs() > 1e-12 {
        return Err(Error::Unsupported(
            "zero field is not a fixed point of the recursion for this model".into(),
        ));
    }
    let delta = 1e-5;
    let gain = |beta: f64| (2.0 * (ratio(beta, delta) - ratio(beta, -delta)) / (2.0 * delta)).abs() - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while gain(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Unsupported("no instability found for this model".into()));
        }
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if gain(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// DLR consistency

/// Largest difference, over the sixteen configurations of `V_1`, between the
/// radius-2 plus-boundary measure conditioned on `W_2 = ring` and the radius-1
/// measure with `ring` as boundary.
pub fn dlr_discrepancy(beta: f64, model: &Model, ring: &[Spin]) -> Result<f64> {
    if !model.is_nearest_neighbor() {
        return Err(Error::Unsupported(
            "a single boundary shell screens only nearest-neighbor interactions".into(),
        ));
    }
    if ring.len() != tree::sphere_size(2) {
        return Err(Error::InvalidParameter("the ring on W_2 has six vertices".into()));
    }
    let big = GibbsParams::new(beta, *model, 2, Boundary::Plus)?;
    let small = GibbsParams::new(beta, *model, 1, Boundary::Explicit(ring.to_vec()))?;
    let mut ring_clamp = free_clamp(2);
    for (k, &s) in ring.iter().enumerate() {
        ring_clamp[4 + k] = Some(s);
    }
    let z_big = enumerate_partition_clamped(&big, &ring_clamp)?.log_partition;
    let z_small = enumerate_partition(&small)?.log_partition;
    let mut worst: f64 = 0.0;
    for bits in 0..16u32 {
        let v1: Vec<Spin> = (0..4).map(|k| if bits >> k & 1 == 1 { MINUS } else { PLUS }).collect();
        let mut c_big = ring_clamp.clone();
        let mut c_small = free_clamp(1);
        for k in 0..4 {
            c_big[k] = Some(v1[k]);
            c_small[k] = Some(v1[k]);
        }
        let p_big = (enumerate_partition_clamped(&big, &c_big)?.log_partition - z_big).exp();
        let p_small = (enumerate_partition_clamped(&small, &c_small)?.log_partition - z_small).exp();
        worst = worst.max((p_big - p_small).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// contour probabilities and bounds

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourProbability {
    pub probability: f64,
    pub realizable: bool,
}

/// Probability that `g` is a contour: its interior carries the minority spin
/// and its vertices inside `V_n` the majority spin.
pub fn contour_probability(g: &Contour, p: &GibbsParams) -> Result<ContourProbability> {
    let majority = p.boundary.constant().ok_or_else(|| {
        Error::Unsupported("contour probabilities need a constant boundary".into())
    })?;
    let unrealizable = ContourProbability {
        probability: 0.0,
        realizable: false,
    };
    let vol = Volume::new(p.n + 1);
    let inner = tree::ball_size(p.n);
    let recomputed = Contour::from_interior(g.interior.iter().cloned());
    if g.interior.is_empty() || recomputed != *g {
        return Ok(unrealizable);
    }
    let mut clamp = free_clamp(p.n);
    for v in &g.interior {
        match vol.index_of(v) {
            Some(i) if i < inner => clamp[i] = Some(-majority),
            _ => return Ok(unrealizable),
        }
    }
    let idx: Vec<usize> = g.interior.iter().filter_map(|v| vol.index_of(v)).collect();
    let connected = {
        let mut seen = vec![idx[0]];
        let mut k = 0;
        while k < seen.len() {
            let v = seen[k];
            k += 1;
            for u in vol.neighbors(v) {
                if idx.contains(&u) && !seen.contains(&u) {
                    seen.push(u);
                }
            }
        }
        seen.len() == idx.len()
    };
    if !connected {
        return Ok(unrealizable);
    }
    for v in &g.boundary {
        if let Some(i) = vol.index_of(v).filter(|&i| i < inner) {
            clamp[i] = Some(majority);
        }
    }
    let z = enumerate_partition(p)?.log_partition;
    let zc = enumerate_partition_clamped(p, &clamp)?.log_partition;
    Ok(ContourProbability {
        probability: (zc - z).exp(),
        realizable: true,
    })
}

/// Upper bound on a contour probability obtained from the erasure map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourBound {
    /// Coefficient of `β|γ|` in the exponent.
    pub leading_coefficient: f64,
    pub bound: f64,
}

/// `exp{−β(c|γ| + 3(λ_own − λ_other))}` for the general model with
/// `c = λ_mix + λ_other − 2λ_own`; for the competing model with `J₂ = 0`
/// this is `exp{2βJ₁|γ|}`, i.e. `e^{−2β|γ|}` at `J₁ = −1`.
pub fn contour_bound(size: usize, p: &GibbsParams) -> Result<ContourBound> {
    let majority = p.boundary.constant().ok_or_else(|| {
        Error::Unsupported("contour bounds need a constant boundary".into())
    })?;
    match p.model {
        Model::Competing(j) if j.j2 == 0.0 => Ok(ContourBound {
            leading_coefficient: -2.0 * j.j1,
            bound: (2.0 * p.beta * j.j1 * size as f64).exp(),
        }),
        Model::Competing(_) => Err(Error::Unsupported(
            "the erasure bound is stated for nearest-neighbor couplings".into(),
        )),
        Model::General(m) => {
            let (own, other) = match Label::from_spin(majority) {
                Label::V1 => (m.lambda[0][0], m.lambda[1][1]),
                Label::V2 => (m.lambda[1][1], m.lambda[0][0]),
            };
            let c = m.mixed() + other - 2.0 * own;
            Ok(ContourBound {
                leading_coefficient: c,
                bound: (-p.beta * (c * size as f64 + 3.0 * (own - other))).exp(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// tail quantities

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailQuantities {
    pub beta: f64,
    pub volume_size: usize,
    pub c1: f64,
    /// `β > ln 12`, which is also where `144e^{−2β} < 1`.
    pub convergent: bool,
    /// Smallest admissible `C₁`, `1/(2β − ln 144)`.
    pub c1_min: Option<f64>,
    /// `|Λ|^{C₁(ln 144 − 2β)+1} / (12(1 − 144e^{−2β}))`.
    pub large_contour_bound: Option<f64>,
    /// `12⁵e^{−6β} / (1 − 144e^{−2β})²`.
    pub small_contour_term: Option<f64>,
    /// Sum of the two terms, bounding `μ⁺{σ(e) = −1}`.
    pub root_flip_bound: Option<f64>,
}

pub fn tail_quantities(beta: f64, volume_size: usize, c1: f64) -> TailQuantities {
    let convergent = beta > 12f64.ln();
    let mut out = TailQuantities {
        beta,
        volume_size,
        c1,
        convergent,
        c1_min: None,
        large_contour_bound: None,
        small_contour_term: None,
        root_flip_bound: None,
    };
    if convergent {
        let q = 144.0 * (-2.0 * beta).exp();
        let ln144 = 144f64.ln();
        let lam = volume_size as f64;
        let large = lam.powf(c1 * (ln144 - 2.0 * beta) + 1.0) / (12.0 * (1.0 - q));
        let small = 12f64.powi(5) * (-6.0 * beta).exp() / ((1.0 - q) * (1.0 - q));
        out.c1_min = Some(1.0 / (2.0 * beta - ln144));
        out.large_contour_bound = Some(large);
        out.small_contour_term = Some(small);
        out.root_flip_bound = Some(small + large);
    }
    out
}

// ---------------------------------------------------------------------------
// small deviations

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallDeviation {
    pub beta: f64,
    pub window: usize,
    /// `μ(σ ≠ φ somewhere on V_m(x))`.
    pub probability: f64,
    /// `μ(σ(e) ≠ φ(e))`.
    pub root_flip: f64,
    /// `C(m) = Σ_{A ⊆ V_m} |A| = |V_m|·2^{|V_m|−1}`.
    pub c_m: f64,
    pub bound: f64,
}

fn auto_method(p: &GibbsParams) -> Method {
    if p.n <= DP_RADIUS_LIMIT {
        Method::Dp
    } else {
        Method::Enumeration
    }
}

/// Probability that the configuration differs from the constant reference
/// state (the boundary value) somewhere in the window `V_m(x) ∩ V_n`.
pub fn small_deviation_prob(x: &VertexWord, m: usize, p: &GibbsParams) -> Result<SmallDeviation> {
    let reference = p.boundary.constant().ok_or_else(|| {
        Error::Unsupported("small deviations are measured from a constant reference state".into())
    })?;
    let vol = Volume::new(p.n);
    let xi = vol
        .index_of(x)
        .ok_or_else(|| Error::InvalidParameter(format!("vertex {x} lies outside V_{}", p.n)))?;
    let mut clamp = free_clamp(p.n);
    for i in vol.ball_around(xi, m) {
        clamp[i] = Some(reference);
    }
    let method = auto_method(p);
    let full = exact(p, method)?;
    let probability = -log_clamp_probability(p, &clamp, method)?.exp_m1();
    let root_flip = if reference == PLUS {
        full.marginals[0]
    } else {
        1.0 - full.marginals[0]
    };
    let size = tree::ball_size(m) as f64;
    let c_m = size * 2f64.powf(size - 1.0);
    Ok(SmallDeviation {
        beta: p.beta,
        window: m,
        probability,
        root_flip,
        c_m,
        bound: c_m * root_flip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hamiltonian, general_energy, Coupling, FiniteConfig, InteractionMatrix};

    fn comp(j1: f64, j2: f64) -> Model {
        Model::Competing(Coupling { j1, j2 })
    }

    /// Direct sum of `exp(−βH)` over all configurations, written without any
    /// of the machinery above.
    fn brute(p: &GibbsParams) -> (f64, Vec<f64>) {
        let size = tree::ball_size(p.n);
        let mut logs = Vec::new();
        let mut cfgs = Vec::new();
        for bits in 0u64..(1 << size) {
            let spins = (0..size).map(|k| if bits >> k & 1 == 1 { MINUS } else { PLUS }).collect();
            let cfg = FiniteConfig::new(p.n, spins, p.boundary.clone()).unwrap();
            let e = match p.model {
                Model::Competing(j) => hamiltonian(&cfg, j),
                Model::General(m) => general_energy(&cfg, &m),
            };
            logs.push(-p.beta * e);
            cfgs.push(bits);
        }
        let lz = logsumexp(&logs);
        let mut marg = vec![0.0; size];
        for (l, bits) in logs.iter().zip(&cfgs) {
            let w = (l - lz).exp();
            for k in 0..size {
                if bits >> k & 1 == 1 {
                    marg[k] += w;
                }
            }
        }
        (lz, marg)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn enumeration_matches_direct_sum() {
        for model in [comp(-1.0, 0.0), comp(-1.0, 0.5), comp(1.0, 1.0)] {
            for n in 0..=2 {
                for boundary in [Boundary::Plus, Boundary::Minus] {
                    let p = GibbsParams::new(0.7, model, n, boundary).unwrap();
                    let (lz, m) = brute(&p);
                    let r = enumerate_partition(&p).unwrap();
                    assert!((r.log_partition - lz).abs() < 1e-11, "{model:?} n={n}");
                    assert!(close(&r.marginals, &m, 1e-12));
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let p = GibbsParams::new(1e-12, Model::ising(), 1, Boundary::Plus).unwrap();
        let r = enumerate_partition(&p).unwrap();
        assert!(r.marginals.iter().all(|&m| (m - 0.5).abs() < 1e-9));
        for beta in [0.3, 1.0, 2.5] {
            for n in 0..=3 {
                let plus = enumerate_partition(&GibbsParams::new(beta, Model::ising(), n, Boundary::Plus).unwrap()).unwrap();
                let minus = enumerate_partition(&GibbsParams::new(beta, Model::ising(), n, Boundary::Minus).unwrap()).unwrap();
                assert!((plus.marginals[0] - (1.0 - minus.marginals[0])).abs() < 1e-12);
                assert!((plus.log_partition - minus.log_partition).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn capacity_error() {
        let p = GibbsParams::new(1.0, Model::ising(), 4, Boundary::Plus).unwrap();
        assert_eq!(
            enumerate_partition(&p),
            Err(Error::EnumerationCapacity { sites: 46, limit: 24 })
        );
        let err = GibbsParams::new(1.0, Model::ising(), 21, Boundary::Plus).unwrap_err();
        assert_eq!(err, Error::DpCapacity { radius: 21, limit: DP_RADIUS_LIMIT });
    }

    #[test]
    fn dp_matches_enumeration() {
        let general = Model::General(InteractionMatrix { lambda: [[-0.8, 0.3], [0.9, -0.2]] });
        for model in [comp(-1.0, 0.0), comp(0.7, 0.0), general] {
            for n in 0..=3 {
                for beta in [0.5, 1.0, 2.0] {
                    let p = GibbsParams::new(beta, model, n, Boundary::Plus).unwrap();
                    let e = enumerate_partition(&p).unwrap();
                    let d = dp_marginals_nn(&p).unwrap();
                    assert!((e.log_partition - d.log_partition).abs() < 1e-10);
                    assert!(close(&e.marginals, &d.marginals, 1e-12), "{model:?} n={n} β={beta}");
                    let d2 = dp_marginals_nnn(&p);
                    if let Model::Competing(_) = model {
                        let d2 = d2.unwrap();
                        assert!(close(&d.marginals, &d2.marginals, 1e-12));
                        assert!((d.log_partition - d2.log_partition).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn nnn_dp_matches_enumeration() {
        for (model, n, beta) in [
            (comp(-1.0, 0.5), 2, 1.0),
            (comp(1.0, 1.0), 3, 0.7),
            (comp(-0.3, -1.2), 3, 1.3),
            (comp(0.4, 0.9), 0, 1.0),
            (comp(0.4, 0.9), 1, 2.0),
        ] {
            let ring: Vec<Spin> = (0..tree::sphere_size(n + 1)).map(|k| if k % 3 == 1 { MINUS } else { PLUS }).collect();
            for boundary in [Boundary::Plus, Boundary::Minus, Boundary::Explicit(ring)] {
                let p = GibbsParams::new(beta, model, n, boundary).unwrap();
                let e = enumerate_partition(&p).unwrap();
                let d = dp_marginals_nnn(&p).unwrap();
                assert!((e.log_partition - d.log_partition).abs() < 1e-10, "{model:?} n={n}");
                assert!(close(&e.marginals, &d.marginals, 1e-12), "{model:?} n={n}");
            }
        }
    }

    #[test]
    fn clamped_routes_agree() {
        let p = GibbsParams::new(0.9, comp(-1.0, 0.4), 3, Boundary::Plus).unwrap();
        let mut clamp = free_clamp(3);
        clamp[0] = Some(MINUS);
        clamp[5] = Some(PLUS);
        clamp[12] = Some(MINUS);
        let e = enumerate_partition_clamped(&p, &clamp).unwrap();
        let d = dp_marginals_nnn_clamped(&p, &clamp).unwrap();
        assert!((e.log_partition - d.log_partition).abs() < 1e-10);
        assert!(close(&e.marginals, &d.marginals, 1e-12));
        let p = GibbsParams::new(0.9, Model::ising(), 3, Boundary::Minus).unwrap();
        let e = enumerate_partition_clamped(&p, &clamp).unwrap();
        let d = dp_marginals_nn_clamped(&p, &clamp).unwrap();
        assert!((e.log_partition - d.log_partition).abs() < 1e-10);
        assert!(close(&e.marginals, &d.marginals, 1e-12));
    }

    #[test]
    fn pair_marginals_are_edge_disagreements() {
        let p = GibbsParams::new(0.8, Model::ising(), 2, Boundary::Plus).unwrap();
        let r = enumerate_partition(&p).unwrap();
        let pm = r.pair_marginals.unwrap();
        assert_eq!(pm.len(), 9);
        // P(disagree) = P(x=−,p=+) + P(x=+,p=−); check one edge by clamping
        let vol = Volume::new(2);
        let i = 4;
        let par = vol.parent(i).unwrap();
        let mut total = 0.0;
        for (a, b) in [(PLUS, MINUS), (MINUS, PLUS)] {
            let mut c = free_clamp(2);
            c[i] = Some(a);
            c[par] = Some(b);
            total += (enumerate_partition_clamped(&p, &c).unwrap().log_partition - r.log_partition).exp();
        }
        assert!((pm[i - 1] - total).abs() < 1e-12);
    }

    #[test]
    fn critical_beta_is_atanh_half() {
        let bc = critical_beta(&Model::ising()).unwrap();
        assert!((bc - 0.5f64.atanh()).abs() < 1e-6);
        let bc = critical_beta(&Model::General(InteractionMatrix::ising())).unwrap();
        assert!((bc - 0.5f64.atanh()).abs() < 1e-6);
        assert!(critical_beta(&comp(-1.0, 1.0)).is_err());
    }

    #[test]
    fn dlr_consistency() {
        for bits in 0..64u32 {
            let ring: Vec<Spin> = (0..6).map(|k| if bits >> k & 1 == 1 { MINUS } else { PLUS }).collect();
            assert!(dlr_discrepancy(1.0, &Model::ising(), &ring).unwrap() < 1e-12);
        }
        assert!(dlr_discrepancy(1.0, &comp(-1.0, 0.5), &[PLUS; 6]).is_err());
    }

    #[test]
    fn contour_probability_examples() {
        let g = Contour::from_interior([VertexWord::root()]);
        let mut last = 1.0;
        for beta in [0.5, 1.0, 1.5, 2.0] {
            let p = GibbsParams::new(beta, Model::ising(), 2, Boundary::Plus).unwrap();
            let cp = contour_probability(&g, &p).unwrap();
            assert!(cp.realizable);
            let b = contour_bound(g.size, &p).unwrap();
            assert!((b.bound - (-2.0 * beta * 3.0f64).exp()).abs() < 1e-15);
            assert!(cp.probability <= b.bound);
            assert!(cp.probability < last);
            last = cp.probability;
        }
        let p = GibbsParams::new(1.0, Model::ising(), 1, Boundary::Plus).unwrap();
        let far = Contour::from_interior(["121".parse::<VertexWord>().unwrap()]);
        assert!(!contour_probability(&far, &p).unwrap().realizable);
    }

    #[test]
    fn tail_examples() {
        let t = tail_quantities(3.0, 94, 1.0);
        assert!(t.convergent);
        assert!(t.large_contour_bound.unwrap() < 1.0);
        let t = tail_quantities(12f64.ln(), 94, 1.0);
        assert!(!t.convergent);
        assert!(t.root_flip_bound.is_none());
        let t = tail_quantities(60.0, 94, 1.0);
        assert!(t.small_contour_term.unwrap() < 1e-60);
        assert!(t.large_contour_bound.unwrap() < 1e-60);
    }

    #[test]
    fn small_deviation_examples() {
        let p = GibbsParams::new(1.0, Model::ising(), 3, Boundary::Plus).unwrap();
        let sd = small_deviation_prob(&VertexWord::root(), 0, &p).unwrap();
        let marg = dp_marginals_nn(&p).unwrap().marginals[0];
        assert!((sd.probability - marg).abs() < 1e-12);
        let sd = small_deviation_prob(&VertexWord::root(), 1, &p).unwrap();
        assert_eq!(sd.c_m, 32.0);
        assert!(sd.probability <= sd.bound);
    }

    #[test]
    fn clamp_probability_routes_agree() {
        let clamp: Clamp = (0..10).map(|k| if k % 3 == 0 { Some(if k % 2 == 0 { PLUS } else { MINUS }) } else { None }).collect();
        for model in [comp(-1.0, 0.0), comp(0.7, -0.4)] {
            let p = GibbsParams::new(1.3, model, 2, Boundary::Minus).unwrap();
            let a = log_clamp_probability(&p, &clamp, Method::Enumeration).unwrap();
            let b = log_clamp_probability(&p, &clamp, Method::Dp).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
        let p = GibbsParams::new(2.0, Model::ising(), 14, Boundary::Plus).unwrap();
        let b = log_clamp_probability(&p, &free_clamp(14), Method::Dp).unwrap();
        assert_eq!(b, 0.0);
    }
}
