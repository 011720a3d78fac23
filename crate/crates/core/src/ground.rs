//! Phase regions of the `(J₁, J₂)` plane, periodic ground states, layered
//! ground states on the degenerate set, improper balls and the Peierls
//! condition.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    self, ball_assignment, class_energies, classify_ball, BallAssignment, BallClass, Boundary,
    Coupling, FiniteConfig, SpinField, Spin, MINUS, PLUS,
};
use crate::tree::{self, parity, HomSignature, VertexWord, Volume};

/// One of the four regions `A₁..A₄`; `A_m` is where `U_m` is minimal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    A1,
    A2,
    A3,
    A4,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A1, Region::A2, Region::A3, Region::A4];

    pub fn class(self) -> BallClass {
        BallClass::ALL[self as usize]
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", *self as usize + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSet {
    pub members: Vec<Region>,
    pub ground_classes: Vec<BallClass>,
    pub degenerate: bool,
}

impl RegionSet {
    pub fn contains(&self, r: Region) -> bool {
        self.members.contains(&r)
    }
}

fn tolerance(j: Coupling) -> f64 {
    1e-12 * (j.j1.abs() + j.j2.abs()).max(1.0)
}

/// Regions whose class energy attains the minimum of `U₁..U₄`.
pub fn phase_regions(j: Coupling) -> RegionSet {
    let u = class_energies(j);
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tolerance(j);
    let members: Vec<Region> = Region::ALL
        .into_iter()
        .filter(|r| u[*r as usize] <= min + tol)
        .collect();
    RegionSet {
        ground_classes: members.iter().map(|r| r.class()).collect(),
        degenerate: members.len() >= 2,
        members,
    }
}

/// The printed inequality description of the regions, with `A₃` and `A₄`
/// in the order that agrees with the class energies.
pub fn region_by_inequalities(j: Coupling, r: Region) -> bool {
    let (a, b) = (j.j1, j.j2);
    match r {
        Region::A1 => a <= 0.0 && a + 4.0 * b <= 0.0,
        Region::A2 => a <= 0.0 && a + 4.0 * b >= 0.0,
        Region::A3 => a >= 0.0 && a - 4.0 * b >= 0.0,
        Region::A4 => a >= 0.0 && a - 4.0 * b <= 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeierlsData {
    pub epsilon: f64,
    pub lambda: f64,
    pub degenerate: bool,
}

/// Size of `V̂(b)` used for the Peierls constant.
pub const PEIERLS_DIVISOR: f64 = 21.0;

/// Gap between the smallest and the next class energy (counted with
/// multiplicity), and `λ = ε/21`.
pub fn peierls_constants(j: Coupling) -> PeierlsData {
    let regions = phase_regions(j);
    let mut u = class_energies(j);
    u.sort_by(f64::total_cmp);
    let epsilon = if regions.degenerate { 0.0 } else { u[1] - u[0] };
    PeierlsData {
        epsilon,
        lambda: epsilon / PEIERLS_DIVISOR,
        degenerate: regions.degenerate,
    }
}

/// `x ↦ sign·(−1)^{parity(x, signature)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicGroundState {
    pub signature: HomSignature,
    pub sign: Spin,
}

impl PeriodicGroundState {
    pub fn new(signature: HomSignature, sign: Spin) -> Self {
        PeriodicGroundState { signature, sign }
    }

    pub fn plus() -> Self {
        PeriodicGroundState::new(HomSignature::TRIVIAL, PLUS)
    }

    pub fn minus() -> Self {
        PeriodicGroundState::new(HomSignature::TRIVIAL, MINUS)
    }

    /// All sixteen candidates, signatures in binary order, plus sign first.
    pub fn candidates() -> Vec<PeriodicGroundState> {
        HomSignature::all()
            .flat_map(|h| [PLUS, MINUS].map(|s| PeriodicGroundState::new(h, s)))
            .collect()
    }

    pub fn value(&self, x: &VertexWord) -> Spin {
        if parity(x, self.signature) == 1 {
            -self.sign
        } else {
            self.sign
        }
    }

    /// The class shared by all of its unit balls.
    pub fn class(&self) -> BallClass {
        match self.signature.weight() {
            0 => BallClass::C1,
            1 => BallClass::C2,
            2 => BallClass::C4,
            _ => BallClass::C3,
        }
    }

    /// Spins on `V_r` in canonical order.
    pub fn values_on(&self, vol: &Volume) -> Vec<Spin> {
        let mut out = vec![0; vol.len()];
        for i in 0..vol.len() {
            out[i] = match vol.parent(i) {
                None => self.sign,
                Some(p) => {
                    if self.signature.of_generator(vol.letter(i)) == 1 {
                        -out[p]
                    } else {
                        out[p]
                    }
                }
            };
        }
        out
    }

    /// Restriction to `V_n` with the state itself as explicit boundary.
    pub fn to_config(&self, n: usize) -> FiniteConfig {
        let vol = Volume::new(n + 1);
        let vals = self.values_on(&vol);
        let inner = tree::ball_size(n);
        let boundary = if self.signature == HomSignature::TRIVIAL {
            Boundary::from_spin(self.sign)
        } else {
            Boundary::Explicit(vals[inner..].to_vec())
        };
        FiniteConfig {
            radius: n,
            spins: vals[..inner].to_vec(),
            boundary,
        }
    }
}

impl SpinField for PeriodicGroundState {
    fn spin_at(&self, v: &VertexWord) -> Spin {
        self.value(v)
    }
}

impl fmt::Display for PeriodicGroundState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.signature.eps;
        write!(f, "(({a},{b},{c}),{:+})", self.sign)
    }
}

/// The period-≤2 configuration whose unit ball at `center` equals `b`.
pub fn periodic_extension(b: &BallAssignment, center: &VertexWord) -> PeriodicGroundState {
    let eps = [0, 1, 2].map(|k| u8::from(b.leaves[k] != b.center));
    let signature = HomSignature { eps };
    let sign = if parity(center, signature) == 1 {
        -b.center
    } else {
        b.center
    };
    PeriodicGroundState { signature, sign }
}

/// Number of assignments on the unit ball centered at the leaf in direction
/// `direction` that agree with `b` on the two shared vertices and lie in
/// `classes`.
pub fn count_compatible_extensions(b: &BallAssignment, classes: &[BallClass], direction: u8) -> usize {
    compatible_extensions(b, classes, direction).len()
}

fn compatible_extensions(b: &BallAssignment, classes: &[BallClass], direction: u8) -> Vec<BallAssignment> {
    let d = (direction - 1) as usize;
    BallAssignment::all()
        .filter(|n| n.center == b.leaves[d] && n.leaves[d] == b.center)
        .filter(|n| classes.contains(&classify_ball(n)))
        .collect()
}

/// True when some ground-class ball can be continued across one of its edges
/// into two different ground classes, which lets a configuration switch
/// patterns across a shell.
fn admits_switching(classes: &[BallClass]) -> bool {
    BallAssignment::all()
        .filter(|b| classes.contains(&classify_ball(b)))
        .any(|b| {
            (1..=3u8).any(|g| {
                let kinds: BTreeSet<BallClass> = compatible_extensions(&b, classes, g)
                    .iter()
                    .map(classify_ball)
                    .collect();
                kinds.len() >= 2
            })
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStates {
    pub regions: RegionSet,
    pub states: Vec<PeriodicGroundState>,
    pub infinite: bool,
}

/// Filters the sixteen parity candidates by the ground classes of `j`.
pub fn enumerate_ground_states(j: Coupling) -> GroundStates {
    let regions = phase_regions(j);
    let states = PeriodicGroundState::candidates()
        .into_iter()
        .filter(|s| regions.ground_classes.contains(&s.class()))
        .collect();
    let infinite = admits_switching(&regions.ground_classes);
    GroundStates {
        regions,
        states,
        infinite,
    }
}

/// Class of every unit ball centered in `V_{n−1}` of a configuration on
/// `V_n` (given as spins in canonical order over `vol`).
fn ball_at(vol: &Volume, spins: &[Spin], c: usize) -> BallAssignment {
    let mut leaves = [0; 3];
    if let Some(p) = vol.parent(c) {
        let g = vol.letter(c);
        leaves[(g - 1) as usize] = spins[p];
    }
    for k in vol.children(c) {
        let g = vol.letter(k);
        leaves[(g - 1) as usize] = spins[k];
    }
    BallAssignment::new(spins[c], leaves)
}

/// Shell-layered configuration on `V_n`: vertices at distance `|x|` follow
/// `s1` when `⌊|x|/(2t)⌋` is even and `s2` otherwise. Children are assigned
/// top-down; if the target pattern would put a ball outside `allowed`, the
/// first allowed choice for the children is taken instead. Every unit ball
/// centered in `V_n` is validated against `allowed`, and the boundary on
/// `W_{n+1}` is the one produced by the construction.
pub fn layered_state(
    s1: &PeriodicGroundState,
    s2: &PeriodicGroundState,
    t: usize,
    n: usize,
    allowed: &[BallClass],
) -> Result<FiniteConfig> {
    if t == 0 {
        return Err(Error::InvalidParameter("layer thickness t must be positive".into()));
    }
    let vol = Volume::new(n + 1);
    let a = s1.values_on(&vol);
    let b = s2.values_on(&vol);
    let target = |i: usize| {
        if (vol.level(i) / (2 * t)) % 2 == 0 {
            a[i]
        } else {
            b[i]
        }
    };
    let mut spins = vec![0 as Spin; vol.len()];
    spins[0] = target(0);
    for v in vol.ball(n) {
        let kids: Vec<usize> = vol.children(v).collect();
        let desired: Vec<Spin> = kids.iter().map(|&k| target(k)).collect();
        let mut options: Vec<u32> = (0..1u32 << kids.len()).collect();
        options.sort_by_key(|m| (m.count_ones(), *m));
        let mut placed = false;
        for mask in options {
            for (q, &k) in kids.iter().enumerate() {
                spins[k] = if mask >> q & 1 == 1 { -desired[q] } else { desired[q] };
            }
            let ball = ball_at(&vol, &spins, v);
            if allowed.contains(&classify_ball(&ball)) {
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::ClassViolation {
                center: vol.word(v).to_string(),
                class: classify_ball(&ball_at(&vol, &spins, v)).to_string(),
            });
        }
    }
    for c in vol.ball(n) {
        let class = classify_ball(&ball_at(&vol, &spins, c));
        if !allowed.contains(&class) {
            return Err(Error::ClassViolation {
                center: vol.word(c).to_string(),
                class: class.to_string(),
            });
        }
    }
    let inner = tree::ball_size(n);
    Ok(FiniteConfig {
        radius: n,
        spins: spins[..inner].to_vec(),
        boundary: Boundary::Explicit(spins[inner..].to_vec()),
    })
}

/// Classes of all unit balls of `cfg` centered in `V_n`.
pub fn ball_classes(cfg: &FiniteConfig) -> Vec<BallClass> {
    let vol = Volume::new(cfg.radius + 1);
    let spins = cfg.extended();
    vol.ball(cfg.radius)
        .map(|c| classify_ball(&ball_at(&vol, &spins, c)))
        .collect()
}

/// True if every unit ball of `state` centered in `V_n` has the minimal
/// class energy.
pub fn is_minimal_on(state: &PeriodicGroundState, j: Coupling, n: usize) -> bool {
    let u = class_energies(j);
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tolerance(j);
    tree::ball_vertices(n)
        .vertices
        .iter()
        .all(|c| model::ball_energy(&ball_assignment(state, c), j) <= min + tol)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImproperBalls {
    pub centers: Vec<VertexWord>,
    pub size: usize,
}

fn window_matches_some<F: SpinField + ?Sized>(
    sigma: &F,
    window: &[VertexWord],
    ground: &[PeriodicGroundState],
) -> bool {
    ground
        .iter()
        .any(|g| window.iter().all(|v| sigma.spin_at(v) == g.value(v)))
}

fn radius_two_window(x: &VertexWord) -> Vec<VertexWord> {
    let mut out = vec![x.clone()];
    for u in tree::neighbors(x) {
        for z in tree::neighbors(&u) {
            if &z != x {
                out.push(z);
            }
        }
        out.push(u);
    }
    out
}

/// Centers `x ∈ V_{n−2}` whose radius-2 window of `sigma` matches no ground
/// state.
pub fn improper_balls(
    sigma: &FiniteConfig,
    ground: &[PeriodicGroundState],
    n: usize,
) -> Result<ImproperBalls> {
    if n > sigma.radius + 1 {
        return Err(Error::InvalidParameter(format!(
            "configuration has radius {}, cannot inspect V_{n}",
            sigma.radius
        )));
    }
    struct Field<'a>(&'a FiniteConfig, Volume);
    impl SpinField for Field<'_> {
        fn spin_at(&self, v: &VertexWord) -> Spin {
            self.0.spin_at_index(self.1.index_of(v).expect("window inside V_{n+1}"))
        }
    }
    let field = Field(sigma, Volume::new(sigma.radius + 1));
    let centers: Vec<VertexWord> = if n < 2 {
        Vec::new()
    } else {
        tree::ball_vertices(n - 2)
            .vertices
            .into_iter()
            .filter(|x| !window_matches_some(&field, &radius_two_window(x), ground))
            .collect()
    };
    Ok(ImproperBalls {
        size: centers.len(),
        centers,
    })
}

/// Improper centers of a finite perturbation of `base`, anywhere on the tree.
/// Only centers within distance 2 of a flipped vertex can be improper.
pub fn improper_centers_of_perturbation(
    base: &PeriodicGroundState,
    flips: &BTreeSet<VertexWord>,
    ground: &[PeriodicGroundState],
) -> ImproperBalls {
    let sigma = model::Perturbed { base, flips };
    let mut candidates: BTreeSet<VertexWord> = BTreeSet::new();
    for f in flips {
        candidates.extend(radius_two_window(f));
    }
    let centers: Vec<VertexWord> = candidates
        .into_iter()
        .filter(|x| !window_matches_some(&sigma, &radius_two_window(x), ground))
        .collect();
    ImproperBalls {
        size: centers.len(),
        centers,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeierlsOutcome {
    pub h_rel: f64,
    pub improper: usize,
    pub bound: f64,
    pub pass: bool,
}

/// `H(σ, σʲ) ≥ λ·|∂(σ)|` for `σ` = `base` with `flips` reversed.
pub fn peierls_check(
    flips: &BTreeSet<VertexWord>,
    base: &PeriodicGroundState,
    j: Coupling,
) -> Result<PeierlsOutcome> {
    let data = peierls_constants(j);
    if data.degenerate {
        return Err(Error::Degenerate);
    }
    let ground = enumerate_ground_states(j).states;
    let improper = improper_centers_of_perturbation(base, flips, &ground).size;
    let h_rel = model::relative_hamiltonian(base, flips, j);
    let bound = data.lambda * improper as f64;
    Ok(PeierlsOutcome {
        h_rel,
        improper,
        bound,
        pass: h_rel >= bound - tolerance(j) * (1.0 + bound.abs()),
    })
}

/// Index-based Peierls checks for perturbations supported in `V_r`, used
/// for large randomized suites.
pub struct PeierlsSuite {
    j: Coupling,
    data: PeierlsData,
    support: usize,
    vol: Volume,
    ground: Vec<PeriodicGroundState>,
    ground_values: Vec<Vec<Spin>>,
    windows: Vec<Vec<usize>>,
}

impl PeierlsSuite {
    pub fn new(support: usize, j: Coupling) -> Result<Self> {
        let data = peierls_constants(j);
        if data.degenerate {
            return Err(Error::Degenerate);
        }
        let vol = Volume::new(support + 4);
        let ground = enumerate_ground_states(j).states;
        let ground_values = ground.iter().map(|g| g.values_on(&vol)).collect();
        let windows = vol
            .ball(support + 2)
            .map(|i| vol.ball_around(i, 2))
            .collect();
        Ok(PeierlsSuite {
            j,
            data,
            support,
            vol,
            ground,
            ground_values,
            windows,
        })
    }

    pub fn ground_states(&self) -> &[PeriodicGroundState] {
        &self.ground
    }

    pub fn support_size(&self) -> usize {
        tree::ball_size(self.support)
    }

    /// Draws a uniform number of sites in `1..=|V_r|`, then a uniform subset
    /// of that size.
    pub fn random_flips<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let size = self.support_size();
        let k = rng.random_range(1..=size);
        let mut v = sample(rng, size, k).into_vec();
        v.sort_unstable();
        v
    }

    /// Checks the perturbation of ground state number `base` that flips the
    /// given indices of `V_r`.
    pub fn check(&self, base: usize, flips: &[usize]) -> PeierlsOutcome {
        let phi = &self.ground_values[base];
        let mut sigma = phi.clone();
        let mut flipped = vec![false; self.vol.len()];
        for &f in flips {
            sigma[f] = -sigma[f];
            flipped[f] = true;
        }
        let mut h = 0i64;
        let mut h2 = 0i64;
        for &x in flips {
            for y in self.vol.neighbors(x) {
                if flipped[y] && y < x {
                    continue;
                }
                h += i64::from(sigma[x] * sigma[y] - phi[x] * phi[y]);
            }
            for z in self.vol.second_neighbors(x) {
                if flipped[z] && z < x {
                    continue;
                }
                h2 += i64::from(sigma[x] * sigma[z] - phi[x] * phi[z]);
            }
        }
        let h_rel = self.j.j1 * h as f64 + self.j.j2 * h2 as f64;

        let mut candidate = vec![false; self.windows.len()];
        for &f in flips {
            for c in self.vol.ball_around(f, 2) {
                candidate[c] = true;
            }
        }
        let improper = candidate
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .filter(|&(c, _)| {
                !self
                    .ground_values
                    .iter()
                    .any(|g| self.windows[c].iter().all(|&v| g[v] == sigma[v]))
            })
            .count();
        let bound = self.data.lambda * improper as f64;
        PeierlsOutcome {
            h_rel,
            improper,
            bound,
            pass: h_rel >= bound - tolerance(self.j) * (1.0 + bound.abs()),
        }
    }
}
