//! Vertex arithmetic on the order-2 Cayley tree.
//!
//! Vertices are elements of the free product of three order-2 groups,
//! written as reduced words over the generators `1`, `2`, `3`. Two words are
//! adjacent when one is the other multiplied on the right by a generator.
//!
//! [`Volume`] is an index-based view of the closed ball `V_r` that the
//! numerical modules use; its canonical order is (length, lexicographic), so
//! `V_n` is always a prefix of `V_{n+1}` and the children of the `j`-th vertex
//! of a sphere sit at positions `2j` and `2j + 1` of the next sphere.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The three generator letters.
pub const GENERATORS: [u8; 3] = [1, 2, 3];

/// A reduced word: no letter is immediately repeated.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexWord(Vec<u8>);

impl VertexWord {
    /// The root `e` (the group identity).
    pub fn root() -> Self {
        VertexWord(Vec::new())
    }

    /// Builds a word from letters that are already reduced.
    pub fn from_reduced(letters: Vec<u8>) -> Result<Self> {
        for (i, &l) in letters.iter().enumerate() {
            if !(1..=3).contains(&l) {
                return Err(Error::InvalidLetter(char::from(b'0' + l.min(9))));
            }
            if i > 0 && letters[i - 1] == l {
                return Err(Error::Contract(format!(
                    "word {letters:?} is not reduced at position {i}"
                )));
            }
        }
        Ok(VertexWord(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    /// `|x|`, the distance to the root.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// Right multiplication by a generator.
    pub fn times(&self, g: u8) -> VertexWord {
        debug_assert!((1..=3).contains(&g));
        let mut letters = self.0.clone();
        if letters.last() == Some(&g) {
            letters.pop();
        } else {
            letters.push(g);
        }
        VertexWord(letters)
    }

    /// The neighbor one step closer to the root.
    pub fn parent(&self) -> Option<VertexWord> {
        if self.0.is_empty() {
            None
        } else {
            Some(VertexWord(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// `ω_g(x)`: how many times generator `g` occurs in the word.
    pub fn count(&self, g: u8) -> usize {
        self.0.iter().filter(|&&l| l == g).count()
    }

    /// The product `self · other` in the group, reduced.
    pub fn concat(&self, other: &VertexWord) -> VertexWord {
        let mut out = self.clone();
        for &g in &other.0 {
            out = out.times(g);
        }
        out
    }
}

impl Ord for VertexWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for VertexWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VertexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VertexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VertexWord({self})")
    }
}

impl FromStr for VertexWord {
    type Err = Error;

    /// Parses `e` or a digit string over `{1,2,3}`; the result is reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(VertexWord::root());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '1' | '2' | '3' => letters.push(c as u8 - b'0'),
                other => return Err(Error::InvalidLetter(other)),
            }
        }
        reduce(&letters)
    }
}

impl Serialize for VertexWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reduces a raw letter sequence by cancelling adjacent equal pairs.
pub fn reduce(letters: &[u8]) -> Result<VertexWord> {
    let mut stack: Vec<u8> = Vec::with_capacity(letters.len());
    for &l in letters {
        if !(1..=3).contains(&l) {
            return Err(Error::InvalidLetter(char::from(b'0' + l.min(9))));
        }
        if stack.last() == Some(&l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    Ok(VertexWord(stack))
}

/// The three neighbors `reduce(v·g_i)`, in generator order.
pub fn neighbors(v: &VertexWord) -> [VertexWord; 3] {
    [v.times(1), v.times(2), v.times(3)]
}

/// Graph distance: `|x| + |y| - 2·lcp(x, y)`.
pub fn distance(x: &VertexWord, y: &VertexWord) -> usize {
    let lcp = x
        .0
        .iter()
        .zip(y.0.iter())
        .take_while(|(a, b)| a == b)
        .count();
    x.len() + y.len() - 2 * lcp
}

/// `|V_n| = 3·2^n − 2`.
pub fn ball_size(n: usize) -> usize {
    3 * (1usize << n) - 2
}

/// `|W_n| = 3·2^(n−1)` for `n ≥ 1`, and 1 for the root sphere.
pub fn sphere_size(n: usize) -> usize {
    if n == 0 {
        1
    } else {
        3 * (1usize << (n - 1))
    }
}

/// The closed ball `V_n` in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub radius: usize,
    pub vertices: Vec<VertexWord>,
}

/// The sphere `W_n` in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sphere {
    pub radius: usize,
    pub vertices: Vec<VertexWord>,
}

pub fn ball_vertices(n: usize) -> Ball {
    let vol = Volume::new(n);
    Ball {
        radius: n,
        vertices: (0..vol.len()).map(|i| vol.word(i)).collect(),
    }
}

pub fn sphere_vertices(n: usize) -> Sphere {
    let vol = Volume::new(n);
    Sphere {
        radius: n,
        vertices: vol.sphere(n).map(|i| vol.word(i)).collect(),
    }
}

/// A unit ball: a center and its three neighbors in generator order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitBall {
    pub center: VertexWord,
    pub leaves: [VertexWord; 3],
}

/// All unit balls whose centers lie in `V_{n-1}`, so the whole ball is in `V_n`.
pub fn unit_balls(n: usize) -> Vec<UnitBall> {
    if n == 0 {
        return Vec::new();
    }
    ball_vertices(n - 1)
        .vertices
        .into_iter()
        .map(|center| {
            let leaves = neighbors(&center);
            UnitBall { center, leaves }
        })
        .collect()
}

/// A homomorphism `G₂ → Z₂`, given by the images of the three generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HomSignature {
    pub eps: [u8; 3],
}

impl HomSignature {
    pub const TRIVIAL: HomSignature = HomSignature { eps: [0, 0, 0] };
    /// Kernel: words with an even number of `1`s.
    pub const H1: HomSignature = HomSignature { eps: [1, 0, 0] };
    /// Kernel: words of even length.
    pub const H2: HomSignature = HomSignature { eps: [1, 1, 1] };
    /// Kernel: words where `ω₁ + ω₂` is even.
    pub const H12: HomSignature = HomSignature { eps: [1, 1, 0] };

    pub fn new(eps: [u8; 3]) -> Result<Self> {
        if eps.iter().any(|&e| e > 1) {
            return Err(Error::InvalidParameter(format!(
                "signature entries must be 0 or 1, got {eps:?}"
            )));
        }
        Ok(HomSignature { eps })
    }

    /// All eight signatures, trivial first.
    pub fn all() -> impl Iterator<Item = HomSignature> {
        (0u8..8).map(|bits| HomSignature {
            eps: [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1],
        })
    }

    /// `Σ ε_i`.
    pub fn weight(&self) -> u8 {
        self.eps.iter().sum()
    }

    /// Image of a single generator.
    pub fn of_generator(&self, g: u8) -> u8 {
        self.eps[(g - 1) as usize]
    }
}

/// `Σ_i ε_i·ω_i(v) mod 2`.
pub fn parity(v: &VertexWord, h: HomSignature) -> u8 {
    v.letters()
        .iter()
        .fold(0u8, |acc, &g| acc ^ h.of_generator(g))
}

/// Outer vertex boundary `{x ∉ A : x has a neighbor in A}`.
pub fn boundary_set(a: &BTreeSet<VertexWord>) -> BTreeSet<VertexWord> {
    let mut out = BTreeSet::new();
    for v in a {
        for u in neighbors(v) {
            if !a.contains(&u) {
                out.insert(u);
            }
        }
    }
    out
}

/// Index-based closed ball `V_r` in canonical order.
#[derive(Clone, Debug)]
pub struct Volume {
    radius: usize,
    level_start: Vec<usize>,
    level: Vec<u8>,
    parent: Vec<u32>,
    letter: Vec<u8>,
}

const NO_PARENT: u32 = u32::MAX;

impl Volume {
    pub fn new(radius: usize) -> Self {
        assert!(radius < 30, "volume radius {radius} is too large to index");
        let size = ball_size(radius);
        let mut level_start = Vec::with_capacity(radius + 2);
        for l in 0..=radius + 1 {
            level_start.push(if l == 0 { 0 } else { ball_size(l - 1) });
        }
        let mut level = vec![0u8; size];
        let mut parent = vec![NO_PARENT; size];
        let mut letter = vec![0u8; size];
        for l in 1..=radius {
            let start = level_start[l];
            for j in 0..sphere_size(l) {
                let i = start + j;
                level[i] = l as u8;
                if l == 1 {
                    parent[i] = 0;
                    letter[i] = (j + 1) as u8;
                } else {
                    let p = level_start[l - 1] + j / 2;
                    parent[i] = p as u32;
                    let pl = letter[p];
                    let mut options = GENERATORS.iter().copied().filter(|&g| g != pl);
                    let first = options.next().unwrap();
                    let second = options.next().unwrap();
                    letter[i] = if j % 2 == 0 { first } else { second };
                }
            }
        }
        Volume {
            radius,
            level_start,
            level,
            parent,
            letter,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level(&self, i: usize) -> usize {
        self.level[i] as usize
    }

    /// Indices of `V_l` (a prefix of the volume).
    pub fn ball(&self, l: usize) -> std::ops::Range<usize> {
        0..self.level_start[l.min(self.radius) + 1]
    }

    /// Indices of `W_l`.
    pub fn sphere(&self, l: usize) -> std::ops::Range<usize> {
        assert!(l <= self.radius);
        self.level_start[l]..self.level_start[l + 1]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        let p = self.parent[i];
        (p != NO_PARENT).then_some(p as usize)
    }

    /// The last letter of the word at `i` (0 for the root).
    pub fn letter(&self, i: usize) -> u8 {
        self.letter[i]
    }

    /// Children inside the volume, in canonical order.
    pub fn children(&self, i: usize) -> std::ops::Range<usize> {
        let l = self.level(i);
        if l >= self.radius {
            return 0..0;
        }
        if l == 0 {
            return 1..4;
        }
        let j = i - self.level_start[l];
        let c = self.level_start[l + 1] + 2 * j;
        c..c + 2
    }

    /// Neighbors inside the volume: parent first, then children.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent(i).into_iter().chain(self.children(i))
    }

    /// Vertices at distance exactly 2 inside the volume.
    pub fn second_neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(6);
        if let Some(p) = self.parent(i) {
            if let Some(g) = self.parent(p) {
                out.push(g);
            }
            out.extend(self.children(p).filter(|&s| s != i));
        }
        for c in self.children(i) {
            out.extend(self.children(c));
        }
        out
    }

    pub fn word(&self, i: usize) -> VertexWord {
        let mut letters = Vec::with_capacity(self.level(i));
        let mut cur = i;
        while let Some(p) = self.parent(cur) {
            letters.push(self.letter[cur]);
            cur = p;
        }
        letters.reverse();
        VertexWord(letters)
    }

    pub fn index_of(&self, v: &VertexWord) -> Option<usize> {
        if v.len() > self.radius {
            return None;
        }
        let mut i = 0usize;
        for (depth, &g) in v.letters().iter().enumerate() {
            if depth == 0 {
                i = g as usize;
            } else {
                let c = self.children(i);
                i = if self.letter[c.start] == g {
                    c.start
                } else {
                    c.start + 1
                };
            }
        }
        Some(i)
    }

    /// Vertices within distance `m` of `i` that are inside the volume.
    pub fn ball_around(&self, i: usize, m: usize) -> Vec<usize> {
        let mut seen = vec![i];
        let mut frontier = vec![(i, usize::MAX)];
        for _ in 0..m {
            let mut next = Vec::new();
            for &(v, from) in &frontier {
                for u in self.neighbors(v) {
                    if u != from {
                        seen.push(u);
                        next.push((u, v));
                    }
                }
            }
            frontier = next;
        }
        seen.sort_unstable();
        seen
    }
}

/// Visits every connected vertex set that contains `root`, has at most
/// `max_size` vertices and uses only vertices accepted by `allowed`.
/// Each set is visited exactly once (as a slice in insertion order).
pub fn for_each_connected_set<A, F>(
    vol: &Volume,
    root: usize,
    max_size: usize,
    allowed: A,
    mut visit: F,
) where
    A: Fn(usize) -> bool,
    F: FnMut(&[usize]),
{
    if max_size == 0 || !allowed(root) {
        return;
    }
    let mut current = vec![root];
    let frontier: Vec<usize> = vol.neighbors(root).filter(|&u| allowed(u)).collect();
    extend_connected(vol, &allowed, &mut current, &frontier, max_size, &mut visit);
}

fn extend_connected<A, F>(
    vol: &Volume,
    allowed: &A,
    current: &mut Vec<usize>,
    frontier: &[usize],
    max_size: usize,
    visit: &mut F,
) where
    A: Fn(usize) -> bool,
    F: FnMut(&[usize]),
{
    visit(current);
    if current.len() == max_size {
        return;
    }
    for (k, &v) in frontier.iter().enumerate() {
        let mut next: Vec<usize> = frontier[k + 1..].to_vec();
        next.extend(
            vol.neighbors(v)
                .filter(|&u| allowed(u) && !current.contains(&u)),
        );
        current.push(v);
        extend_connected(vol, allowed, current, &next, max_size, visit);
        current.pop();
    }
}

/// Visits every connected vertex set of the volume with at most `max_size`
/// vertices, each exactly once (grouped by the vertex nearest the root).
pub fn for_each_connected_subset<F>(vol: &Volume, max_size: usize, mut visit: F)
where
    F: FnMut(&[usize]),
{
    for top in 0..vol.len() {
        let above = vol.parent(top);
        for_each_connected_set(vol, top, max_size, |u| Some(u) != above, &mut visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> VertexWord {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&[1, 1]).unwrap(), VertexWord::root());
        assert_eq!(reduce(&[1, 2, 1, 3]).unwrap(), w("1213"));
        assert_eq!(reduce(&[1, 2, 2, 3, 2]).unwrap(), w("132"));
        assert_eq!(reduce(&[1, 4]), Err(Error::InvalidLetter('4')));
        assert!("1x".parse::<VertexWord>().is_err());
    }

    #[test]
    fn neighbor_examples() {
        let mut n: Vec<_> = neighbors(&VertexWord::root()).to_vec();
        n.sort();
        assert_eq!(n, vec![w("1"), w("2"), w("3")]);
        let mut n: Vec<_> = neighbors(&w("1")).to_vec();
        n.sort();
        assert_eq!(n, vec![VertexWord::root(), w("12"), w("13")]);
        let mut n: Vec<_> = neighbors(&w("12")).to_vec();
        n.sort();
        assert_eq!(n, vec![w("1"), w("121"), w("123")]);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&VertexWord::root(), &w("121")), 3);
        assert_eq!(distance(&w("1"), &w("2")), 2);
        assert_eq!(distance(&w("123"), &w("13")), 3);
    }

    #[test]
    fn sizes() {
        assert_eq!(sphere_vertices(1).vertices.len(), 3);
        assert_eq!(ball_vertices(3).vertices.len(), 22);
        assert_eq!(sphere_vertices(3).vertices.len(), 12);
        assert_eq!(ball_vertices(0).vertices, vec![VertexWord::root()]);
        assert_eq!(unit_balls(1).len(), 1);
        assert_eq!(unit_balls(2).len(), 4);
        assert_eq!(unit_balls(3).len(), 10);
    }

    #[test]
    fn canonical_order_is_sorted_and_indexable() {
        let vol = Volume::new(5);
        let words: Vec<_> = (0..vol.len()).map(|i| vol.word(i)).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        for (i, word) in words.iter().enumerate() {
            assert_eq!(vol.index_of(word), Some(i));
            for j in vol.children(i) {
                assert_eq!(vol.parent(j), Some(i));
                assert_eq!(words[j].parent().as_ref(), Some(word));
            }
            assert_eq!(vol.second_neighbors(i).len(), {
                let mut c = 0;
                for (k, other) in words.iter().enumerate() {
                    if k != i && distance(word, other) == 2 {
                        c += 1;
                    }
                }
                c
            });
        }
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity(&w("121"), HomSignature::H1), 0);
        assert_eq!(parity(&w("121"), HomSignature::H2), 1);
        assert_eq!(parity(&w("123"), HomSignature::H12), 0);
    }

    #[test]
    fn boundary_examples() {
        let a: BTreeSet<_> = [VertexWord::root()].into();
        assert_eq!(boundary_set(&a), [w("1"), w("2"), w("3")].into());
        let a: BTreeSet<_> = [VertexWord::root(), w("1")].into();
        assert_eq!(boundary_set(&a), [w("2"), w("3"), w("12"), w("13")].into());
        let v1: BTreeSet<_> = ball_vertices(1).vertices.into_iter().collect();
        let w2: BTreeSet<_> = sphere_vertices(2).vertices.into_iter().collect();
        assert_eq!(boundary_set(&v1), w2);
    }

    #[test]
    fn each_non_root_vertex_has_one_shorter_neighbor() {
        for v in ball_vertices(4).vertices.iter().skip(1) {
            let shorter = neighbors(v).iter().filter(|u| u.len() < v.len()).count();
            assert_eq!(shorter, 1);
        }
    }

    #[test]
    fn connected_subsets_counted_once() {
        // rooted subtrees of size <= 2 in V_1: 4 singletons + 3 edges
        let vol = Volume::new(1);
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for_each_connected_subset(&vol, 2, |set| {
            let mut s = set.to_vec();
            s.sort();
            seen.insert(s);
            count += 1;
        });
        assert_eq!(count, 7);
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn ball_around_matches_distance() {
        let vol = Volume::new(5);
        let x = vol.index_of(&w("12")).unwrap();
        let got = vol.ball_around(x, 2);
        let expect: Vec<usize> = (0..vol.len())
            .filter(|&i| distance(&vol.word(i), &w("12")) <= 2)
            .collect();
        assert_eq!(got, expect);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word() -> impl Strategy<Value = VertexWord> {
            proptest::collection::vec(1u8..=3, 0..10).prop_map(|l| reduce(&l).unwrap())
        }

        proptest! {
            #[test]
            fn reduce_is_idempotent(l in proptest::collection::vec(1u8..=3, 0..16)) {
                let once = reduce(&l).unwrap();
                prop_assert_eq!(reduce(once.letters()).unwrap(), once.clone());
            }

            #[test]
            fn distance_is_a_metric(x in word(), y in word(), z in word()) {
                prop_assert_eq!(distance(&x, &y), distance(&y, &x));
                prop_assert!(distance(&x, &z) <= distance(&x, &y) + distance(&y, &z));
                prop_assert_eq!(distance(&x, &y) == 0, x == y);
                let adjacent = neighbors(&x).contains(&y);
                prop_assert_eq!(distance(&x, &y) == 1, adjacent);
            }

            #[test]
            fn parity_is_a_homomorphism(x in word(), y in word(), bits in 0u8..8) {
                let h = HomSignature { eps: [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1] };
                prop_assert_eq!(parity(&x.concat(&y), h), parity(&x, h) ^ parity(&y, h));
            }

            #[test]
            fn parity_constant_on_cosets(x in word(), y in word(), bits in 1u8..8) {
                // u, v share a coset of ker(h) iff u^{-1}v is in the kernel
                let h = HomSignature { eps: [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1] };
                let inv_x = VertexWord(x.letters().iter().rev().copied().collect());
                let same_coset = parity(&inv_x.concat(&y), h) == 0;
                prop_assert_eq!(same_coset, parity(&x, h) == parity(&y, h));
            }
        }
    }
}
