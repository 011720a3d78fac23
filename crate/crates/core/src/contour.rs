//! Contours of finite configurations with constant boundary: decomposition,
//! reconstruction, erasure, the energy identities written through contours,
//! and exact contour counting.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, FiniteConfig, InteractionMatrix, Label, Model, Spin};
use crate::tree::{self, boundary_set, for_each_connected_set, VertexWord, Volume};

/// A minority component (`interior`) and its outer vertex boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contour {
    pub interior: Vec<VertexWord>,
    pub boundary: Vec<VertexWord>,
    pub size: usize,
}

impl Contour {
    /// Builds the contour of a vertex set; the set is not checked for
    /// connectivity here.
    pub fn from_interior<I: IntoIterator<Item = VertexWord>>(interior: I) -> Contour {
        let interior: BTreeSet<VertexWord> = interior.into_iter().collect();
        let boundary: Vec<VertexWord> = boundary_set(&interior).into_iter().collect();
        Contour {
            size: boundary.len(),
            interior: interior.into_iter().collect(),
            boundary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourDecomposition {
    pub radius: usize,
    /// The boundary value; contours enclose the opposite spin.
    pub majority: Spin,
    pub contours: Vec<Contour>,
    /// `Σ|γ_i|`, a vertex next to two components counted twice.
    pub total_boundary: usize,
    pub m: usize,
}

impl ContourDecomposition {
    /// Number of distinct vertices in the union of all contours.
    pub fn distinct_boundary_size(&self) -> usize {
        self.contours
            .iter()
            .flat_map(|c| c.boundary.iter())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

fn constant_boundary(cfg: &FiniteConfig) -> Result<Spin> {
    cfg.boundary.constant().ok_or_else(|| {
        Error::Unsupported("contours are defined only for a constant boundary".into())
    })
}

/// Minority components of `spins` (over `V_n`, indices of `vol`) in order
/// of their smallest vertex, each with its boundary indices in `vol`.
pub(crate) fn components(
    vol: &Volume,
    n: usize,
    spins: &[Spin],
    majority: Spin,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let inner = tree::ball_size(n);
    let mut seen = vec![false; inner];
    let mut out = Vec::new();
    for start in 0..inner {
        if seen[start] || spins[start] == majority {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut bd = Vec::new();
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            k += 1;
            for u in vol.neighbors(v) {
                if u < inner && spins[u] != majority {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                } else {
                    bd.push(u);
                }
            }
        }
        comp.sort_unstable();
        bd.sort_unstable();
        out.push((comp, bd));
    }
    out
}

/// `(m, Σ|γ_i|)` without building vertex words.
pub(crate) fn contour_stats(vol: &Volume, n: usize, spins: &[Spin], majority: Spin) -> (usize, usize) {
    let comps = components(vol, n, spins, majority);
    (comps.len(), comps.iter().map(|(_, b)| b.len()).sum())
}

pub fn decompose(cfg: &FiniteConfig) -> Result<ContourDecomposition> {
    let majority = constant_boundary(cfg)?;
    let vol = Volume::new(cfg.radius + 1);
    let contours: Vec<Contour> = components(&vol, cfg.radius, &cfg.spins, majority)
        .into_iter()
        .map(|(comp, bd)| Contour {
            interior: comp.iter().map(|&i| vol.word(i)).collect(),
            size: bd.len(),
            boundary: bd.iter().map(|&i| vol.word(i)).collect(),
        })
        .collect();
    Ok(ContourDecomposition {
        radius: cfg.radius,
        majority,
        total_boundary: contours.iter().map(|c| c.size).sum(),
        m: contours.len(),
        contours,
    })
}

fn is_connected(vol: &Volume, set: &[usize]) -> bool {
    let members: BTreeSet<usize> = set.iter().copied().collect();
    let mut seen = BTreeSet::from([set[0]]);
    let mut stack = vec![set[0]];
    while let Some(v) = stack.pop() {
        for u in vol.neighbors(v) {
            if members.contains(&u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen.len() == members.len()
}

/// Vertices of `V_n` cut off from `W_{n+1}` once the contour vertices are
/// removed from `V_{n+1}`.
fn enclosed_by(vol: &Volume, n: usize, gamma: &[usize]) -> Vec<usize> {
    let mut blocked = vec![false; vol.len()];
    for &g in gamma {
        blocked[g] = true;
    }
    let mut reach = vec![false; vol.len()];
    let mut stack: Vec<usize> = vol.sphere(n + 1).filter(|&i| !blocked[i]).collect();
    for &i in &stack {
        reach[i] = true;
    }
    while let Some(v) = stack.pop() {
        for u in vol.neighbors(v) {
            if !blocked[u] && !reach[u] {
                reach[u] = true;
                stack.push(u);
            }
        }
    }
    vol.ball(n).filter(|&i| !blocked[i] && !reach[i]).collect()
}

/// Rebuilds the configuration from its contours. The interior of each
/// contour is recovered as the part of `V_n` that the contour separates
/// from the outer sphere, and compared with the stored interior.
pub fn reconstruct(d: &ContourDecomposition, n: usize, boundary: &Boundary) -> Result<FiniteConfig> {
    let majority = boundary.constant().ok_or_else(|| {
        Error::Unsupported("reconstruction needs a constant boundary".into())
    })?;
    if majority != d.majority {
        return Err(Error::InvalidDecomposition(
            "boundary value differs from the decomposition's majority spin".into(),
        ));
    }
    let vol = Volume::new(n + 1);
    let inner = tree::ball_size(n);
    let mut owner: Vec<Option<usize>> = vec![None; inner];
    for (k, c) in d.contours.iter().enumerate() {
        if c.interior.is_empty() {
            return Err(Error::InvalidDecomposition(format!("contour {k} has an empty interior")));
        }
        let mut idx = Vec::with_capacity(c.interior.len());
        for v in &c.interior {
            let i = vol.index_of(v).filter(|&i| i < inner).ok_or_else(|| {
                Error::InvalidDecomposition(format!("interior vertex {v} lies outside V_{n}"))
            })?;
            if let Some(other) = owner[i] {
                return Err(Error::InvalidDecomposition(format!(
                    "contours {other} and {k} share interior vertex {v}"
                )));
            }
            owner[i] = Some(k);
            idx.push(i);
        }
        if !is_connected(&vol, &idx) {
            return Err(Error::InvalidDecomposition(format!("interior of contour {k} is not connected")));
        }
        let expected: Vec<VertexWord> =
            boundary_set(&c.interior.iter().cloned().collect()).into_iter().collect();
        let mut given = c.boundary.clone();
        given.sort();
        if given != expected || c.size != expected.len() {
            return Err(Error::InvalidDecomposition(format!(
                "contour {k} is not the boundary of its interior"
            )));
        }
        let gamma: Vec<usize> = expected
            .iter()
            .map(|v| vol.index_of(v).expect("boundary of V_n lies in V_{n+1}"))
            .collect();
        let mut enclosed = enclosed_by(&vol, n, &gamma);
        enclosed.sort_unstable();
        idx.sort_unstable();
        if enclosed != idx {
            return Err(Error::InvalidDecomposition(format!(
                "interior of contour {k} is not the region it encloses"
            )));
        }
    }
    for i in 0..inner {
        if let Some(k) = owner[i] {
            if vol.neighbors(i).any(|u| u < inner && owner[u].is_some_and(|o| o != k)) {
                return Err(Error::InvalidDecomposition(format!(
                    "interiors of two contours touch at {}",
                    vol.word(i)
                )));
            }
        }
    }
    let spins = (0..inner)
        .map(|i| if owner[i].is_some() { -majority } else { majority })
        .collect();
    FiniteConfig::new(n, spins, boundary.clone())
}

/// `χ_γ`: flips the interior of `g` to the majority spin.
pub fn erase_contour(cfg: &FiniteConfig, g: &Contour) -> Result<FiniteConfig> {
    let d = decompose(cfg)?;
    if !d.contours.contains(g) {
        return Err(Error::Contract("the given contour is not a contour of the configuration".into()));
    }
    let vol = Volume::new(cfg.radius);
    let mut out = cfg.clone();
    for v in &g.interior {
        let i = vol.index_of(v).expect("interior lies in V_n");
        out.spins[i] = d.majority;
    }
    Ok(out)
}

/// Number of nearest-neighbor edges with different spins and at least one
/// endpoint in `V_n`.
pub fn disagreeing_edges(cfg: &FiniteConfig) -> usize {
    let vol = Volume::new(cfg.radius + 1);
    let s = cfg.extended();
    (1..vol.len())
        .filter(|&i| s[i] != s[vol.parent(i).expect("non-root")])
        .count()
}

/// The general-model energy written through contours, for an arbitrary
/// mixed-edge coefficient and boundary count.
pub fn general_identity(
    lambda: &InteractionMatrix,
    mixed: f64,
    boundary_count: usize,
    m: usize,
    n: usize,
    majority: Label,
) -> f64 {
    let edges = (tree::ball_size(n + 1) - 1) as f64;
    let (own, other) = match majority {
        Label::V1 => (lambda.lambda[0][0], lambda.lambda[1][1]),
        Label::V2 => (lambda.lambda[1][1], lambda.lambda[0][0]),
    };
    (mixed + other - 2.0 * own) * boundary_count as f64 + 3.0 * m as f64 * (own - other) + own * edges
}

/// Energy of the configuration described by `d`, computed from `m` and
/// `Σ|γ|` only. The competing model is supported with `J₂ = 0`.
pub fn energy_via_contours(d: &ContourDecomposition, n: usize, model: &Model) -> Result<f64> {
    let edges = (tree::ball_size(n + 1) - 1) as f64;
    match model {
        Model::Competing(j) => {
            if j.j2 != 0.0 {
                return Err(Error::Unsupported(
                    "the contour identity covers nearest-neighbor couplings only".into(),
                ));
            }
            Ok(j.j1 * edges - 2.0 * j.j1 * d.total_boundary as f64)
        }
        Model::General(lambda) => Ok(general_identity(
            lambda,
            lambda.mixed(),
            d.total_boundary,
            d.m,
            n,
            Label::from_spin(d.majority),
        )),
    }
}

/// Number of contours `γ` with `t ∈ γ` and `|γ| = r` whose interior lies in
/// `V_n`.
pub fn count_contours_through(t: &VertexWord, r: usize, n: usize) -> Result<u64> {
    if t.len() > n {
        return Err(Error::InvalidParameter(format!("vertex {t} lies outside V_{n}")));
    }
    if r < 3 {
        return Ok(0);
    }
    let vol = Volume::new(n);
    let ti = vol.index_of(t).expect("checked above");
    let k = r - 2;
    let mut count = 0u64;
    for u in vol.neighbors(ti) {
        for_each_connected_set(&vol, u, k, |x| x != ti, |set| {
            if set.len() == k {
                count += 1;
            }
        });
    }
    Ok(count)
}
