//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here calls into the library: vertices are plain letter strings,
//! adjacency is recomputed from words, and partition functions are summed
//! term by term.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

pub type Word = Vec<u8>;

pub fn word_string(w: &[u8]) -> String {
    if w.is_empty() {
        "e".to_string()
    } else {
        w.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

/// Neighbors of a reduced word in the infinite tree.
pub fn word_neighbors(w: &[u8]) -> Vec<Word> {
    let mut out = Vec::with_capacity(3);
    for g in 1..=3u8 {
        let mut v = w.to_vec();
        if v.last() == Some(&g) {
            v.pop();
        } else {
            v.push(g);
        }
        out.push(v);
    }
    out
}

/// Reduced words of length at most `n`, ordered by length then lexicographically.
pub fn words_upto(n: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Word> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 1..=3u8 {
                if w.last() != Some(&g) {
                    let mut v = w.clone();
                    v.push(g);
                    next.push(v);
                }
            }
        }
        next.sort();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// The ball `V_r` with adjacency and distance-two pairs restricted to it.
pub struct Ball {
    pub radius: usize,
    pub words: Vec<Word>,
    pub index: HashMap<Word, usize>,
    pub adj: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub seconds: Vec<(usize, usize)>,
}

impl Ball {
    pub fn new(radius: usize) -> Self {
        let words = words_upto(radius);
        let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let adj = words
            .iter()
            .map(|w| word_neighbors(w).iter().filter_map(|v| index.get(v).copied()).collect())
            .collect();
        let mut ball = Ball {
            radius,
            words,
            index,
            adj,
            edges: Vec::new(),
            seconds: Vec::new(),
        };
        ball.edges = ball.edge_list();
        ball.seconds = ball.second_pairs();
        ball
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn size_of(radius: usize) -> usize {
        if radius == 0 {
            1
        } else {
            3 * (1 << radius) - 2
        }
    }

    /// Unordered nearest-neighbor pairs.
    fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.adj.iter().enumerate() {
            for &j in a {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Unordered pairs at distance two, found through their middle vertex.
    fn second_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = BTreeSet::new();
        for a in &self.adj {
            for (p, &x) in a.iter().enumerate() {
                for &y in &a[p + 1..] {
                    out.insert((x.min(y), x.max(y)));
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Class energies `U₁..U₄` as written in closed form.
pub fn u_values(j1: f64, j2: f64) -> [f64; 4] {
    [1.5 * j1 + 3.0 * j2, 0.5 * j1 - j2, -1.5 * j1 + 3.0 * j2, -0.5 * j1 - j2]
}

/// Twice the class energies, for integer couplings.
pub fn u_doubled(j1: i64, j2: i64) -> [i64; 4] {
    [3 * j1 + 6 * j2, j1 - 2 * j2, -3 * j1 + 6 * j2, -j1 - 2 * j2]
}

/// Class index (0 for C1 .. 3 for C4) from the number of leaves agreeing
/// with the center.
pub fn class_of(center: i8, leaves: [i8; 3]) -> usize {
    match leaves.iter().filter(|&&s| s == center).count() {
        3 => 0,
        2 => 1,
        0 => 2,
        _ => 3,
    }
}

/// Ball energy: half of each center edge plus every leaf pair.
pub fn ball_energy(center: i8, leaves: [i8; 3], j1: f64, j2: f64) -> f64 {
    let edges: i32 = leaves.iter().map(|&s| i32::from(center * s)).sum();
    let pairs = i32::from(leaves[0] * leaves[1] + leaves[0] * leaves[2] + leaves[1] * leaves[2]);
    0.5 * j1 * f64::from(edges) + j2 * f64::from(pairs)
}

/// `J₁Σσσ' + J₂Σσσ''` over all pairs inside the ball.
pub fn competing_energy(ball: &Ball, spins: &[i8], j1: f64, j2: f64) -> f64 {
    let e: i64 = ball.edges.iter().map(|&(a, b)| i64::from(spins[a] * spins[b])).sum();
    let s: i64 = ball.seconds.iter().map(|&(a, b)| i64::from(spins[a] * spins[b])).sum();
    j1 * e as f64 + j2 * s as f64
}

fn label(s: i8) -> usize {
    usize::from(s != 1)
}

/// Nearest-neighbor energy with `λ` summed over both orientations of every
/// edge and halved.
pub fn general_energy(ball: &Ball, spins: &[i8], lambda: [[f64; 2]; 2]) -> f64 {
    ball.edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (label(spins[a]), label(spins[b]));
            0.5 * (lambda[x][y] + lambda[y][x])
        })
        .sum()
}

/// Minority components of `spins` on `V_n` (the first `|V_n|` entries of an
/// assignment on `ball = V_{n+1}`), each with its outer boundary in the
/// infinite tree.
pub fn components(ball: &Ball, n: usize, spins: &[i8], majority: i8) -> Vec<(BTreeSet<Word>, BTreeSet<Word>)> {
    let inner = Ball::size_of(n);
    let mut seen = vec![false; inner];
    let mut out = Vec::new();
    for s in 0..inner {
        if seen[s] || spins[s] == majority {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut comp = BTreeSet::new();
        while let Some(v) = stack.pop() {
            comp.insert(ball.words[v].clone());
            for &u in &ball.adj[v] {
                if u < inner && !seen[u] && spins[u] != majority {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        let boundary = outer_boundary(&comp);
        out.push((comp, boundary));
    }
    out
}

pub fn outer_boundary(set: &BTreeSet<Word>) -> BTreeSet<Word> {
    set.iter()
        .flat_map(|w| word_neighbors(w))
        .filter(|v| !set.contains(v))
        .collect()
}

/// Connected vertex sets of `ball` with at most `max` vertices, grown one
/// vertex at a time and deduplicated.
pub fn connected_sets(ball: &Ball, max: usize) -> Vec<Vec<Vec<u16>>> {
    let mut levels: Vec<Vec<Vec<u16>>> = vec![Vec::new(); max + 1];
    if max == 0 {
        return levels;
    }
    levels[1] = (0..ball.len() as u16).map(|i| vec![i]).collect();
    for k in 2..=max {
        let mut next: HashSet<Vec<u16>> = HashSet::new();
        for set in &levels[k - 1] {
            for &v in set {
                for &u in &ball.adj[v as usize] {
                    let u = u as u16;
                    if let Err(pos) = set.binary_search(&u) {
                        let mut grown = set.clone();
                        grown.insert(pos, u);
                        next.insert(grown);
                    }
                }
            }
        }
        let mut v: Vec<Vec<u16>> = next.into_iter().collect();
        v.sort();
        levels[k] = v;
    }
    levels
}

/// `ln Z` and `P(σ(x) = −1)` by summing every configuration on `V_n` with the
/// given boundary on `W_{n+1}`.
pub fn brute_force<E: Fn(&[i8]) -> f64>(n: usize, boundary: &[i8], beta: f64, energy: E) -> (f64, Vec<f64>) {
    let inner = Ball::size_of(n);
    assert!(inner <= 22, "brute force is limited to small volumes");
    let mut weights = Vec::with_capacity(1 << inner);
    let mut spins = vec![1i8; inner + boundary.len()];
    spins[inner..].copy_from_slice(boundary);
    for bits in 0..1u64 << inner {
        for k in 0..inner {
            spins[k] = if bits >> k & 1 == 1 { -1 } else { 1 };
        }
        weights.push(-beta * energy(&spins));
    }
    let m = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = weights.iter().map(|w| (w - m).exp()).sum();
    let mut marg = vec![0.0; inner];
    for (bits, w) in weights.iter().enumerate() {
        let p = (w - m).exp() / z;
        for (k, slot) in marg.iter_mut().enumerate() {
            if bits >> k & 1 == 1 {
                *slot += p;
            }
        }
    }
    (m + z.ln(), marg)
}

/// Cavity fields of the nearest-neighbor Ising model `H = −Σσσ'` on `V_n`
/// with constant boundary `b`: entry `L` is the field a level-`L` vertex
/// receives from its two children.
pub fn cavity_fields(beta: f64, n: usize, b: f64) -> Vec<f64> {
    let u = |h: f64| (beta.tanh() * h.tanh()).atanh();
    let mut fields = vec![0.0; n + 1];
    let mut below = 2.0 * beta * b;
    fields[n] = below;
    for level in (1..n).rev() {
        below = 2.0 * u(below);
        fields[level] = below;
    }
    fields
}

/// `P(σ(e) = −1)` for that model.
pub fn ising_root_minus(beta: f64, n: usize, b: f64) -> f64 {
    let h_root = if n == 0 {
        3.0 * beta * b
    } else {
        let f = cavity_fields(beta, n, b);
        3.0 * (beta.tanh() * f[1].tanh()).atanh()
    };
    0.5 * (1.0 - h_root.tanh())
}

/// `P(σ ≡ b on V_1)` for that model, `n ≥ 1`.
pub fn ising_window_agreement(beta: f64, n: usize, b: f64) -> f64 {
    let h = if n == 1 { 2.0 * beta * b } else { cavity_fields(beta, n, b)[1] };
    let leaf = |s0: f64| -> f64 { [1.0, -1.0].iter().map(|&s: &f64| (beta * s0 * s + h * s).exp()).sum() };
    let z = leaf(1.0).powi(3) + leaf(-1.0).powi(3);
    (3.0 * (beta + h * b)).exp() / z
}
