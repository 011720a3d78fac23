//! Spin configurations, the competing-interaction Hamiltonian, the general
//! two-label model and unit-ball energies.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{self, sphere_size, VertexWord, Volume};

/// A spin value, always `-1` or `+1`.
pub type Spin = i8;

pub const PLUS: Spin = 1;
pub const MINUS: Spin = -1;

/// Nearest-neighbor and distance-2 couplings `(J₁, J₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub j1: f64,
    pub j2: f64,
}

impl Coupling {
    pub fn new(j1: f64, j2: f64) -> Result<Self> {
        if !j1.is_finite() || !j2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "couplings must be finite, got ({j1}, {j2})"
            )));
        }
        Ok(Coupling { j1, j2 })
    }

    /// The ferromagnetic Ising point `(−1, 0)`.
    pub const FERRO: Coupling = Coupling { j1: -1.0, j2: 0.0 };
}

/// Integer couplings, used where energy identities must hold exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntCoupling {
    pub j1: i64,
    pub j2: i64,
}

/// The two labels of the general model. Internally `v₁` is stored as spin
/// `+1` and `v₂` as `-1`, so a `v₁` boundary plays the role of the plus
/// boundary and `v₂` is the minority label inside contours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    V1,
    V2,
}

impl Label {
    pub fn spin(self) -> Spin {
        match self {
            Label::V1 => PLUS,
            Label::V2 => MINUS,
        }
    }

    pub fn from_spin(s: Spin) -> Label {
        if s > 0 {
            Label::V1
        } else {
            Label::V2
        }
    }

    fn idx(self) -> usize {
        match self {
            Label::V1 => 0,
            Label::V2 => 1,
        }
    }
}

/// The 2×2 interaction matrix `λ_ij = λ(v_i, v_j)`. No symmetry is assumed;
/// an unordered edge carrying labels `{a, b}` contributes
/// `(λ(a,b) + λ(b,a)) / 2`, which is the only orientation-free reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub lambda: [[f64; 2]; 2],
}

impl InteractionMatrix {
    pub fn new(lambda: [[f64; 2]; 2]) -> Result<Self> {
        if lambda.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("λ entries must be finite".into()));
        }
        Ok(InteractionMatrix { lambda })
    }

    /// `λ(v_i, v_j) = −v_i·v_j`, which turns the model into the ferromagnetic
    /// Ising model.
    pub fn ising() -> Self {
        InteractionMatrix {
            lambda: [[-1.0, 1.0], [1.0, -1.0]],
        }
    }

    pub fn get(&self, a: Label, b: Label) -> f64 {
        self.lambda[a.idx()][b.idx()]
    }

    /// Energy carried by a mixed edge.
    pub fn mixed(&self) -> f64 {
        0.5 * (self.lambda[0][1] + self.lambda[1][0])
    }

    pub fn is_symmetric(&self) -> bool {
        self.lambda[0][1] == self.lambda[1][0]
    }

    /// Energy of an unordered nearest-neighbor edge, in spin encoding.
    pub fn edge(&self, a: Spin, b: Spin) -> f64 {
        match (a > 0, b > 0) {
            (true, true) => self.lambda[0][0],
            (false, false) => self.lambda[1][1],
            _ => self.mixed(),
        }
    }
}

/// Either model, as consumed by the exact and sampling engines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Competing(Coupling),
    General(InteractionMatrix),
}

impl Model {
    pub fn ising() -> Self {
        Model::Competing(Coupling::FERRO)
    }

    /// True when only nearest-neighbor terms are present.
    pub fn is_nearest_neighbor(&self) -> bool {
        match self {
            Model::Competing(c) => c.j2 == 0.0,
            Model::General(_) => true,
        }
    }

    pub fn edge_energy(&self, a: Spin, b: Spin) -> f64 {
        match self {
            Model::Competing(c) => c.j1 * f64::from(a * b),
            Model::General(m) => m.edge(a, b),
        }
    }

    pub fn second_energy(&self, a: Spin, b: Spin) -> f64 {
        match self {
            Model::Competing(c) => c.j2 * f64::from(a * b),
            Model::General(_) => 0.0,
        }
    }

    /// Integer statistics of one nearest-neighbor edge.
    pub(crate) fn edge_counts(&self, a: Spin, b: Spin) -> [i64; 3] {
        match self {
            Model::Competing(_) => [i64::from(a * b), 0, 0],
            Model::General(_) => match (a > 0, b > 0) {
                (true, true) => [1, 0, 0],
                (false, false) => [0, 1, 0],
                _ => [0, 0, 1],
            },
        }
    }

    /// Integer statistics of one distance-2 pair.
    pub(crate) fn second_counts(&self, a: Spin, b: Spin) -> [i64; 3] {
        match self {
            Model::Competing(_) => [0, i64::from(a * b), 0],
            Model::General(_) => [0, 0, 0],
        }
    }

    /// Coefficients turning the integer statistics into an energy.
    pub(crate) fn coefficients(&self) -> [f64; 3] {
        match self {
            Model::Competing(c) => [c.j1, c.j2, 0.0],
            Model::General(m) => [m.lambda[0][0], m.lambda[1][1], m.mixed()],
        }
    }
}

pub(crate) fn energy_from_counts(coeffs: &[f64; 3], counts: &[i64; 3]) -> f64 {
    coeffs[0] * counts[0] as f64 + coeffs[1] * counts[1] as f64 + coeffs[2] * counts[2] as f64
}

/// Spins on a unit ball: the center and the three leaves in generator order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BallAssignment {
    pub center: Spin,
    pub leaves: [Spin; 3],
}

impl BallAssignment {
    pub fn new(center: Spin, leaves: [Spin; 3]) -> Self {
        BallAssignment { center, leaves }
    }

    /// All sixteen assignments.
    pub fn all() -> impl Iterator<Item = BallAssignment> {
        (0u8..16).map(|bits| {
            let s = |k: u8| if bits >> k & 1 == 1 { MINUS } else { PLUS };
            BallAssignment {
                center: s(0),
                leaves: [s(1), s(2), s(3)],
            }
        })
    }

    /// Number of leaves equal to the center.
    pub fn agreements(&self) -> usize {
        self.leaves.iter().filter(|&&l| l == self.center).count()
    }

    pub fn flipped(&self) -> Self {
        BallAssignment {
            center: -self.center,
            leaves: self.leaves.map(|l| -l),
        }
    }
}

/// The four classes of unit-ball patterns under global flip and tree motions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BallClass {
    C1,
    C2,
    C3,
    C4,
}

impl BallClass {
    pub const ALL: [BallClass; 4] = [BallClass::C1, BallClass::C2, BallClass::C3, BallClass::C4];

    pub fn index(self) -> usize {
        match self {
            BallClass::C1 => 0,
            BallClass::C2 => 1,
            BallClass::C3 => 2,
            BallClass::C4 => 3,
        }
    }

    /// Class with the given number of leaves agreeing with the center.
    pub fn from_agreements(agree: usize) -> BallClass {
        match agree {
            3 => BallClass::C1,
            2 => BallClass::C2,
            1 => BallClass::C4,
            0 => BallClass::C3,
            _ => unreachable!("a unit ball has three leaves"),
        }
    }
}

impl fmt::Display for BallClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.index() + 1)
    }
}

pub fn classify_ball(b: &BallAssignment) -> BallClass {
    BallClass::from_agreements(b.agreements())
}

/// `U(σ_b) = ½J₁·Σ_edges σσ + J₂·Σ_{leaf pairs} σσ`.
pub fn ball_energy(b: &BallAssignment, j: Coupling) -> f64 {
    let edges: i32 = b.leaves.iter().map(|&l| i32::from(b.center * l)).sum();
    let [a, c, d] = b.leaves;
    let pairs = i32::from(a * c) + i32::from(a * d) + i32::from(c * d);
    0.5 * j.j1 * f64::from(edges) + j.j2 * f64::from(pairs)
}

/// Twice the ball energy, in exact integer arithmetic.
pub fn ball_energy_doubled(b: &BallAssignment, j: IntCoupling) -> i64 {
    let edges: i64 = b.leaves.iter().map(|&l| i64::from(b.center * l)).sum();
    let [a, c, d] = b.leaves;
    let pairs = i64::from(a * c) + i64::from(a * d) + i64::from(c * d);
    j.j1 * edges + 2 * j.j2 * pairs
}

/// The class energies `U₁..U₄`.
pub fn class_energy(c: BallClass, j: Coupling) -> f64 {
    match c {
        BallClass::C1 => 1.5 * j.j1 + 3.0 * j.j2,
        BallClass::C2 => 0.5 * j.j1 - j.j2,
        BallClass::C3 => -1.5 * j.j1 + 3.0 * j.j2,
        BallClass::C4 => -0.5 * j.j1 - j.j2,
    }
}

/// Twice the class energy, in exact integer arithmetic.
pub fn class_energy_doubled(c: BallClass, j: IntCoupling) -> i64 {
    match c {
        BallClass::C1 => 3 * j.j1 + 6 * j.j2,
        BallClass::C2 => j.j1 - 2 * j.j2,
        BallClass::C3 => -3 * j.j1 + 6 * j.j2,
        BallClass::C4 => -j.j1 - 2 * j.j2,
    }
}

pub fn class_energies(j: Coupling) -> [f64; 4] {
    BallClass::ALL.map(|c| class_energy(c, j))
}

/// Spins outside the finite volume, on the sphere `W_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Plus,
    Minus,
    /// Spins on `W_{n+1}` in canonical order.
    Explicit(Vec<Spin>),
}

impl Boundary {
    /// The constant boundary value, if any.
    pub fn constant(&self) -> Option<Spin> {
        match self {
            Boundary::Plus => Some(PLUS),
            Boundary::Minus => Some(MINUS),
            Boundary::Explicit(_) => None,
        }
    }

    pub fn from_spin(s: Spin) -> Boundary {
        if s > 0 {
            Boundary::Plus
        } else {
            Boundary::Minus
        }
    }

    pub fn flipped(&self) -> Boundary {
        match self {
            Boundary::Plus => Boundary::Minus,
            Boundary::Minus => Boundary::Plus,
            Boundary::Explicit(v) => Boundary::Explicit(v.iter().map(|s| -s).collect()),
        }
    }

    /// Spin of the `k`-th vertex of `W_{n+1}`.
    pub fn spin(&self, k: usize) -> Spin {
        match self {
            Boundary::Plus => PLUS,
            Boundary::Minus => MINUS,
            Boundary::Explicit(v) => v[k],
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if let Boundary::Explicit(v) = self {
            let need = sphere_size(n + 1);
            if v.len() != need {
                return Err(Error::InvalidParameter(format!(
                    "explicit boundary needs {need} spins on W_{}, got {}",
                    n + 1,
                    v.len()
                )));
            }
            if v.iter().any(|&s| s != PLUS && s != MINUS) {
                return Err(Error::InvalidParameter("boundary spins must be ±1".into()));
            }
        }
        Ok(())
    }
}

/// A spin assignment on `V_n` together with its boundary on `W_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteConfig {
    pub radius: usize,
    /// Spins on `V_n` in canonical order.
    pub spins: Vec<Spin>,
    pub boundary: Boundary,
}

impl FiniteConfig {
    pub fn new(radius: usize, spins: Vec<Spin>, boundary: Boundary) -> Result<Self> {
        if spins.len() != tree::ball_size(radius) {
            return Err(Error::InvalidParameter(format!(
                "V_{radius} has {} vertices, got {} spins",
                tree::ball_size(radius),
                spins.len()
            )));
        }
        if spins.iter().any(|&s| s != PLUS && s != MINUS) {
            return Err(Error::InvalidParameter("spins must be ±1".into()));
        }
        boundary.validate(radius)?;
        Ok(FiniteConfig {
            radius,
            spins,
            boundary,
        })
    }

    /// Every vertex of `V_n` set to `value`.
    pub fn uniform(radius: usize, value: Spin, boundary: Boundary) -> Self {
        FiniteConfig {
            radius,
            spins: vec![value; tree::ball_size(radius)],
            boundary,
        }
    }

    /// Like [`uniform`](Self::uniform) but with selected vertices set to `-value`.
    pub fn with_flips(
        radius: usize,
        value: Spin,
        boundary: Boundary,
        flips: &[VertexWord],
    ) -> Result<Self> {
        let mut cfg = FiniteConfig::uniform(radius, value, boundary);
        let vol = Volume::new(radius);
        for v in flips {
            let i = vol.index_of(v).ok_or_else(|| {
                Error::InvalidParameter(format!("vertex {v} is outside V_{radius}"))
            })?;
            cfg.spins[i] = -value;
        }
        Ok(cfg)
    }

    pub fn spin(&self, v: &VertexWord) -> Option<Spin> {
        let vol = Volume::new(self.radius + 1);
        let i = vol.index_of(v)?;
        Some(self.spin_at_index(i))
    }

    /// Spin at an index of `V_{n+1}` (the boundary occupies the tail).
    pub fn spin_at_index(&self, i: usize) -> Spin {
        if i < self.spins.len() {
            self.spins[i]
        } else {
            self.boundary.spin(i - self.spins.len())
        }
    }

    /// Spins on `V_{n+1}`, interior followed by boundary.
    pub fn extended(&self) -> Vec<Spin> {
        let total = tree::ball_size(self.radius + 1);
        (0..total).map(|i| self.spin_at_index(i)).collect()
    }

    /// Global spin flip, boundary included.
    pub fn flipped(&self) -> Self {
        FiniteConfig {
            radius: self.radius,
            spins: self.spins.iter().map(|s| -s).collect(),
            boundary: self.boundary.flipped(),
        }
    }
}

/// Options for [`hamiltonian_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HamiltonianOptions {
    /// Keep the `J₂` pairs with both endpoints on `W_{n+1}`. They do not
    /// depend on the interior spins; dropping them gives the nearest-neighbor
    /// finite-volume convention used with `J₂ = 0`.
    pub include_boundary_pairs: bool,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        HamiltonianOptions {
            include_boundary_pairs: true,
        }
    }
}

/// Integer pair sums over `V_{n+1}`: nearest-neighbor, distance-2 with an
/// interior endpoint, distance-2 inside `W_{n+1}`.
pub(crate) fn pair_sums(vol: &Volume, spins: &[Spin]) -> (i64, i64, i64) {
    let outer = vol.radius();
    let mut nn = 0i64;
    let mut nnn = 0i64;
    let mut ww = 0i64;
    for i in 0..vol.len() {
        if let Some(p) = vol.parent(i) {
            nn += i64::from(spins[i] * spins[p]);
            if let Some(g) = vol.parent(p) {
                nnn += i64::from(spins[i] * spins[g]);
            }
        }
        let kids: Vec<usize> = vol.children(i).collect();
        for a in 0..kids.len() {
            for b in a + 1..kids.len() {
                let s = i64::from(spins[kids[a]] * spins[kids[b]]);
                if vol.level(kids[a]) == outer {
                    ww += s;
                } else {
                    nnn += s;
                }
            }
        }
    }
    (nn, nnn, ww)
}

/// Finite-volume energy `H(σ_n) + U(σ_n, ω|W_{n+1})`, i.e. Eq. (1) restricted
/// to the pairs inside `V_{n+1}`.
pub fn hamiltonian(cfg: &FiniteConfig, j: Coupling) -> f64 {
    hamiltonian_with(cfg, j, HamiltonianOptions::default())
}

pub fn hamiltonian_with(cfg: &FiniteConfig, j: Coupling, opts: HamiltonianOptions) -> f64 {
    let vol = Volume::new(cfg.radius + 1);
    let spins = cfg.extended();
    let (nn, nnn, ww) = pair_sums(&vol, &spins);
    let nnn = if opts.include_boundary_pairs {
        nnn + ww
    } else {
        nnn
    };
    j.j1 * nn as f64 + j.j2 * nnn as f64
}

/// Exact integer version of [`hamiltonian`].
pub fn hamiltonian_int(cfg: &FiniteConfig, j: IntCoupling) -> i64 {
    let vol = Volume::new(cfg.radius + 1);
    let spins = cfg.extended();
    let (nn, nnn, ww) = pair_sums(&vol, &spins);
    j.j1 * nn + j.j2 * (nnn + ww)
}

/// Energy of the general model: `Σ λ(ω(x), ω(y))` over the nearest-neighbor
/// pairs with at least one endpoint in `V_n`. The boundary of `cfg` carries
/// the outer labels (`Plus` is `v₁`, `Minus` is `v₂`).
pub fn general_energy(cfg: &FiniteConfig, m: &InteractionMatrix) -> f64 {
    let vol = Volume::new(cfg.radius + 1);
    let spins = cfg.extended();
    let mut counts = [0i64; 3];
    let model = Model::General(*m);
    for i in 1..vol.len() {
        let p = vol.parent(i).expect("non-root vertex has a parent");
        let c = model.edge_counts(spins[i], spins[p]);
        for k in 0..3 {
            counts[k] += c[k];
        }
    }
    energy_from_counts(&model.coefficients(), &counts)
}

/// Anything that assigns a spin to every vertex of the tree.
pub trait SpinField {
    fn spin_at(&self, v: &VertexWord) -> Spin;
}

/// The constant configuration `φ₊` or `φ₋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantField(pub Spin);

impl SpinField for ConstantField {
    fn spin_at(&self, _: &VertexWord) -> Spin {
        self.0
    }
}

/// A reference field with finitely many spins flipped.
pub struct Perturbed<'a, F: SpinField + ?Sized> {
    pub base: &'a F,
    pub flips: &'a BTreeSet<VertexWord>,
}

impl<F: SpinField + ?Sized> SpinField for Perturbed<'_, F> {
    fn spin_at(&self, v: &VertexWord) -> Spin {
        let s = self.base.spin_at(v);
        if self.flips.contains(v) {
            -s
        } else {
            s
        }
    }
}

/// Vertices at distance exactly 2 from `x`.
fn second_shell(x: &VertexWord) -> Vec<VertexWord> {
    let mut out = Vec::with_capacity(6);
    for u in tree::neighbors(x) {
        for z in tree::neighbors(&u) {
            if &z != x {
                out.push(z);
            }
        }
    }
    out
}

/// Relative Hamiltonian `H(σ, φ)` of a finite perturbation, summed pair by
/// pair. Only pairs touching a flipped vertex contribute.
pub fn relative_hamiltonian<F: SpinField + ?Sized>(
    phi: &F,
    flips: &BTreeSet<VertexWord>,
    j: Coupling,
) -> f64 {
    let sigma = Perturbed { base: phi, flips };
    let mut total = 0.0;
    for x in flips {
        for y in tree::neighbors(x) {
            if flips.contains(&y) && y < *x {
                continue;
            }
            let d = sigma.spin_at(x) * sigma.spin_at(&y) - phi.spin_at(x) * phi.spin_at(&y);
            total += j.j1 * f64::from(d);
        }
        for z in second_shell(x) {
            if flips.contains(&z) && z < *x {
                continue;
            }
            let d = sigma.spin_at(x) * sigma.spin_at(&z) - phi.spin_at(x) * phi.spin_at(&z);
            total += j.j2 * f64::from(d);
        }
    }
    total
}

fn assignment_at<F: SpinField + ?Sized>(field: &F, center: &VertexWord) -> BallAssignment {
    let leaves = tree::neighbors(center);
    BallAssignment {
        center: field.spin_at(center),
        leaves: [
            field.spin_at(&leaves[0]),
            field.spin_at(&leaves[1]),
            field.spin_at(&leaves[2]),
        ],
    }
}

/// The same relative Hamiltonian written as a sum of ball-energy differences.
pub fn relative_hamiltonian_balls<F: SpinField + ?Sized>(
    phi: &F,
    flips: &BTreeSet<VertexWord>,
    j: Coupling,
) -> f64 {
    let sigma = Perturbed { base: phi, flips };
    let mut centers: BTreeSet<VertexWord> = flips.clone();
    for x in flips {
        centers.extend(tree::neighbors(x));
    }
    centers
        .iter()
        .map(|c| ball_energy(&assignment_at(&sigma, c), j) - ball_energy(&assignment_at(phi, c), j))
        .sum()
}

/// The spin pattern a field shows on the unit ball centered at `center`.
pub fn ball_assignment<F: SpinField + ?Sized>(field: &F, center: &VertexWord) -> BallAssignment {
    assignment_at(field, center)
}
