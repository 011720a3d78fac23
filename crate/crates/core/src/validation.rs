//! Regenerates the tables behind the acceptance criteria from library routes.
//!
//! Each criterion produces a [`CriterionReport`] with a verdict, a one-line
//! summary and a table of the quantities it was judged on. The checks here
//! compare the library against itself along independent routes (enumeration
//! against recursion, argmin against inequalities, local against global
//! energies); the integration tests carry their own brute-force oracles.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contour::{self, decompose, erase_contour, general_identity, Contour};
use crate::error::{Error, Result};
use crate::gibbs::{self, GibbsParams, Method};
use crate::ground::{self, enumerate_ground_states, layered_state, peierls_constants, PeierlsSuite, Region};
use crate::mcmc::{self, ChainSpec, Observable};
use crate::model::{
    self, ball_energy_doubled, class_energy_doubled, classify_ball, BallAssignment, Boundary, Coupling,
    FiniteConfig, IntCoupling, InteractionMatrix, Label, Model, Spin, MINUS, PLUS,
};
use crate::tree::{self, for_each_connected_subset, VertexWord, Volume};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push<I: IntoIterator<Item = Cell>>(&mut self, row: I) {
        let row: Vec<Cell> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: String,
    pub pass: bool,
    pub summary: String,
    pub table: Table,
}

pub const CRITERIA: [&str; 13] = [
    "ball energy table",
    "region partition",
    "ground-state counts",
    "Peierls suite",
    "contour energy identity",
    "boundary of connected sets",
    "contour probability bound",
    "erasure map",
    "contour counting",
    "oracle agreement",
    "two-phase separation",
    "MCMC validity",
    "small deviation",
];

pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionReport> {
    let (pass, summary, table) = match id {
        1 => ball_table(seed),
        2 => region_partition(),
        3 => ground_counts(seed)?,
        4 => peierls(seed)?,
        5 => energy_identity(seed)?,
        6 => connected_boundaries(),
        7 => probability_bounds(seed)?,
        8 => erasure(seed)?,
        9 => contour_counting()?,
        10 => oracle_agreement(seed)?,
        11 => two_phase()?,
        12 => mcmc_validity(seed)?,
        13 => small_deviation()?,
        _ => return Err(Error::InvalidParameter(format!("no criterion {id}; expected 1..=13"))),
    };
    Ok(CriterionReport {
        id,
        title: CRITERIA[id - 1].to_string(),
        pass,
        summary,
        table,
    })
}

fn spins_from_bits(bits: u64, size: usize) -> Vec<Spin> {
    (0..size).map(|k| if bits >> k & 1 == 1 { MINUS } else { PLUS }).collect()
}

fn random_spins(rng: &mut ChaCha8Rng, size: usize) -> Vec<Spin> {
    (0..size).map(|_| if rng.random::<bool>() { MINUS } else { PLUS }).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng) -> InteractionMatrix {
    let mut v = || rng.random_range(-2.0..2.0);
    InteractionMatrix {
        lambda: [[v(), v()], [v(), v()]],
    }
}

fn ball_table(seed: u64) -> (bool, String, Table) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["j1", "j2", "2U1", "2U2", "2U3", "2U4", "ok"]);
    let mut all = true;
    for _ in 0..100 {
        let j = IntCoupling {
            j1: rng.random_range(-50..=50),
            j2: rng.random_range(-50..=50),
        };
        let ok = BallAssignment::all()
            .all(|b| ball_energy_doubled(&b, j) == class_energy_doubled(classify_ball(&b), j));
        all &= ok;
        let u = model::BallClass::ALL.map(|c| class_energy_doubled(c, j));
        table.push(row![j.j1, j.j2, u[0], u[1], u[2], u[3], ok]);
    }
    (all, "16 assignments × 100 integer couplings".into(), table)
}

fn on_degenerate_lines(i: i64, k: i64) -> bool {
    i == 0 || (k >= 0 && (i == 4 * k || i == -4 * k))
}

fn region_partition() -> (bool, String, Table) {
    let mut counts = [0usize; 4];
    let mut uncovered = 0usize;
    let mut interior_multi = 0usize;
    let mut line_mismatch = 0usize;
    let mut inequality_mismatch = 0usize;
    let mut degenerate = 0usize;
    for a in -100i64..=100 {
        for b in -100i64..=100 {
            let j = Coupling {
                j1: a as f64 / 20.0,
                j2: b as f64 / 20.0,
            };
            let r = ground::phase_regions(j);
            if r.members.is_empty() {
                uncovered += 1;
            }
            for m in &r.members {
                counts[*m as usize] += 1;
            }
            let line = on_degenerate_lines(a, b);
            if r.degenerate {
                degenerate += 1;
            }
            if line != r.degenerate {
                line_mismatch += 1;
            }
            if !line && r.members.len() != 1 {
                interior_multi += 1;
            }
            if !line {
                for reg in [Region::A1, Region::A2, Region::A3, Region::A4] {
                    if r.contains(reg) != ground::region_by_inequalities(j, reg) {
                        inequality_mismatch += 1;
                    }
                }
            }
        }
    }
    let mut table = Table::new(&["quantity", "value"]);
    for (k, c) in counts.iter().enumerate() {
        table.push(row![format!("points in A{}", k + 1), *c]);
    }
    table.push(row!["uncovered points", uncovered]);
    table.push(row!["degenerate points", degenerate]);
    table.push(row!["interior points in several regions", interior_multi]);
    table.push(row!["degenerate set vs. boundary lines mismatches", line_mismatch]);
    table.push(row!["argmin vs. inequality mismatches", inequality_mismatch]);
    let pass = counts.iter().all(|&c| c > 0) && uncovered == 0 && interior_multi == 0 && line_mismatch == 0;
    (pass, "201×201 grid on [−5,5]²".into(), table)
}

/// Two ground states of different classes, or the first two states.
pub fn layering_pair(states: &[ground::PeriodicGroundState]) -> Option<(ground::PeriodicGroundState, ground::PeriodicGroundState)> {
    let first = *states.first()?;
    let second = states
        .iter()
        .find(|s| s.class() != first.class())
        .or_else(|| states.get(1))?;
    Some((first, *second))
}

/// Checks the layered states for `t = 1..=4` on `V_n`: each has all unit
/// balls in the ground classes and they are pairwise distinct.
pub fn layered_family_valid(j: Coupling, n: usize) -> bool {
    let g = enumerate_ground_states(j);
    let Some((s1, s2)) = layering_pair(&g.states) else {
        return false;
    };
    let classes = &g.regions.ground_classes;
    let mut seen = HashSet::new();
    for t in 1..=4 {
        let Ok(cfg) = layered_state(&s1, &s2, t, n, classes) else {
            return false;
        };
        if !ground::ball_classes(&cfg).iter().all(|c| classes.contains(c)) {
            return false;
        }
        if !seen.insert(cfg.spins) {
            return false;
        }
    }
    true
}

pub const DEGENERATE_SAMPLES: [(f64, f64); 5] = [(0.0, 1.0), (0.0, 0.0), (4.0, 1.0), (-4.0, 1.0), (0.0, -1.0)];

fn ground_counts(seed: u64) -> Result<(bool, String, Table)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["j1", "j2", "regions", "states", "expected", "minimal_on_v5", "infinite", "layered_ok"]);
    let expected = [2usize, 6, 2, 6];
    let mut found = [0usize; 4];
    let mut pass = true;
    while found.iter().any(|&f| f < 5) {
        let j = Coupling {
            j1: rng.random_range(-5.0..5.0),
            j2: rng.random_range(-5.0..5.0),
        };
        let g = enumerate_ground_states(j);
        if g.regions.degenerate {
            continue;
        }
        let r = g.regions.members[0] as usize;
        if found[r] >= 5 {
            continue;
        }
        found[r] += 1;
        let minimal = g.states.iter().all(|s| ground::is_minimal_on(s, j, 5));
        let ok = g.states.len() == expected[r] && g.states.len() <= 16 && minimal && !g.infinite;
        pass &= ok;
        table.push(row![j.j1, j.j2, format!("A{}", r + 1), g.states.len(), expected[r], minimal, g.infinite, "-"]);
    }
    for (j1, j2) in DEGENERATE_SAMPLES {
        let j = Coupling { j1, j2 };
        let g = enumerate_ground_states(j);
        let minimal = g.states.iter().all(|s| ground::is_minimal_on(s, j, 5));
        let layered = layered_family_valid(j, 10);
        pass &= g.infinite && layered && minimal;
        let regions: Vec<String> = g.regions.members.iter().map(|r| r.to_string()).collect();
        table.push(row![j1, j2, regions.join("+"), g.states.len(), "infinite", minimal, g.infinite, layered]);
    }
    Ok((pass, "5 interior samples per region and 5 degenerate couplings".into(), table))
}

pub const PEIERLS_COUPLINGS: [(f64, f64); 4] = [(-1.0, 0.0), (-1.0, 1.0), (2.0, 0.1), (2.0, 1.0)];

fn peierls(seed: u64) -> Result<(bool, String, Table)> {
    let mut table = Table::new(&["j1", "j2", "ground_state", "epsilon", "trials", "violations", "min_slack"]);
    let mut pass = true;
    for (j1, j2) in PEIERLS_COUPLINGS {
        let j = Coupling { j1, j2 };
        let suite = PeierlsSuite::new(4, j)?;
        let eps = peierls_constants(j).epsilon;
        for (b, g) in suite.ground_states().iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (b as u64) << 32);
            let mut violations = 0usize;
            let mut slack = f64::INFINITY;
            for _ in 0..10_000 {
                let flips = suite.random_flips(&mut rng);
                let o = suite.check(b, &flips);
                slack = slack.min(o.h_rel - o.bound);
                if !o.pass {
                    violations += 1;
                }
            }
            pass &= violations == 0;
            table.push(row![j1, j2, g.to_string(), eps, 10_000usize, violations, slack]);
        }
    }
    Ok((pass, "random perturbations supported in V_4".into(), table))
}

fn energy_identity(seed: u64) -> Result<(bool, String, Table)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ising = Coupling { j1: -1.0, j2: 0.0 };
    let mut table = Table::new(&["check", "configurations", "failures"]);
    let mut pass = true;

    let run_ising = |n: usize, cfgs: &mut dyn Iterator<Item = Vec<Spin>>| -> Result<(usize, usize)> {
        let (mut total, mut bad) = (0, 0);
        let base = 1.0 - tree::ball_size(n + 1) as f64;
        for spins in cfgs {
            let cfg = FiniteConfig::new(n, spins, Boundary::Plus)?;
            let d = decompose(&cfg)?;
            total += 1;
            if model::hamiltonian(&cfg, ising) != base + 2.0 * d.total_boundary as f64 {
                bad += 1;
            }
        }
        Ok((total, bad))
    };
    let (t, b) = run_ising(2, &mut (0..1u64 << 10).map(|x| spins_from_bits(x, 10)))?;
    pass &= b == 0;
    table.push(row!["Ising identity, n=2, exhaustive", t, b]);
    let size5 = tree::ball_size(5);
    let (t, b) = run_ising(5, &mut (0..10_000).map(|_| random_spins(&mut rng, size5)))?;
    pass &= b == 0;
    table.push(row!["Ising identity, n=5, random", t, b]);

    let (mut total, mut bad, mut literal_bad, mut set_bad) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..10 {
        let lambda = random_matrix(&mut rng);
        for bits in 0..1u64 << 10 {
            for boundary in [Boundary::Plus, Boundary::Minus] {
                let cfg = FiniteConfig::new(2, spins_from_bits(bits, 10), boundary)?;
                let d = decompose(&cfg)?;
                let direct = model::general_energy(&cfg, &lambda);
                let tol = 1e-9 * (1.0 + direct.abs());
                let via = contour::energy_via_contours(&d, 2, &Model::General(lambda))?;
                let maj = Label::from_spin(d.majority);
                let literal = general_identity(&lambda, lambda.lambda[1][0], d.total_boundary, d.m, 2, maj);
                let set = general_identity(&lambda, lambda.mixed(), d.distinct_boundary_size(), d.m, 2, maj);
                total += 1;
                bad += usize::from((via - direct).abs() > tol);
                literal_bad += usize::from((literal - direct).abs() > tol);
                set_bad += usize::from((set - direct).abs() > tol);
            }
        }
    }
    pass &= bad == 0;
    table.push(row!["general identity, symmetrized mixed coefficient, multiset count", total, bad]);
    table.push(row!["general identity, literal λ21 (documented variant)", total, literal_bad]);
    table.push(row!["general identity, distinct boundary vertices (documented variant)", total, set_bad]);
    Ok((pass, "direct energies against contour formulas".into(), table))
}

fn connected_boundaries() -> (bool, String, Table) {
    let vol = Volume::new(6);
    let mut by_size = [0u64; 9];
    let mut bad = 0u64;
    for_each_connected_subset(&vol, 8, |set| {
        by_size[set.len()] += 1;
        let words: BTreeSet<VertexWord> = set.iter().map(|&i| vol.word(i)).collect();
        if tree::boundary_set(&words).len() != set.len() + 2 {
            bad += 1;
        }
    });
    let mut table = Table::new(&["size", "sets"]);
    for (k, c) in by_size.iter().enumerate().skip(1) {
        table.push(row![k, *c]);
    }
    table.push(row!["violations", bad]);
    (bad == 0, "every connected set of at most 8 vertices in V_6".into(), table)
}

/// All contours whose interior is a connected subset of `V_n`.
pub fn realizable_contours(n: usize) -> Vec<Contour> {
    let vol = Volume::new(n);
    let mut out = Vec::new();
    for_each_connected_subset(&vol, vol.len(), |set| {
        out.push(Contour::from_interior(set.iter().map(|&i| vol.word(i))));
    });
    out
}

fn probability_bounds(seed: u64) -> Result<(bool, String, Table)> {
    let mut table = Table::new(&["model", "beta", "contours", "max_ratio", "violations"]);
    let contours = realizable_contours(2);
    let mut pass = true;
    for beta in [0.5, 1.0, 2.0] {
        let p = GibbsParams::new(beta, Model::ising(), 2, Boundary::Plus)?;
        let (mut worst, mut bad) = (0.0f64, 0usize);
        for g in &contours {
            let prob = gibbs::contour_probability(g, &p)?;
            let bound = (-2.0 * beta * g.size as f64).exp();
            worst = worst.max(prob.probability / bound);
            bad += usize::from(!prob.realizable || prob.probability > bound);
        }
        pass &= bad == 0;
        table.push(row!["ising", beta, contours.len(), worst, bad]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = 0;
    while found < 5 {
        let lambda = random_matrix(&mut rng);
        let model = Model::General(lambda);
        let p = GibbsParams::new(1.0, model, 2, Boundary::Plus)?;
        let lead = gibbs::contour_bound(3, &p)?.leading_coefficient;
        if lead <= 0.0 {
            continue;
        }
        found += 1;
        let (mut worst, mut bad) = (0.0f64, 0usize);
        for g in &contours {
            let prob = gibbs::contour_probability(g, &p)?.probability;
            let bound = gibbs::contour_bound(g.size, &p)?.bound;
            worst = worst.max(prob / bound);
            bad += usize::from(prob > bound * (1.0 + 1e-12));
        }
        pass &= bad == 0;
        let l = lambda.lambda;
        table.push(row![
            format!("general [[{:.3},{:.3}],[{:.3},{:.3}]]", l[0][0], l[0][1], l[1][0], l[1][1]),
            1.0,
            contours.len(),
            worst,
            bad
        ]);
    }
    Ok((pass, "exact contour probabilities in V_2 against erasure bounds".into(), table))
}

fn erasure(seed: u64) -> Result<(bool, String, Table)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = tree::ball_size(4);
    let (mut erasures, mut count_bad, mut boundary_bad, mut inverse_bad) = (0usize, 0usize, 0usize, 0usize);
    let mut images: HashSet<(Vec<VertexWord>, Vec<Spin>)> = HashSet::new();
    let mut collisions = 0usize;
    let vol = Volume::new(4);
    for _ in 0..1000 {
        let cfg = FiniteConfig::new(4, random_spins(&mut rng, size), Boundary::Plus)?;
        let d = decompose(&cfg)?;
        for g in &d.contours {
            let img = erase_contour(&cfg, g)?;
            let e = decompose(&img)?;
            erasures += 1;
            count_bad += usize::from(e.m + 1 != d.m);
            boundary_bad += usize::from(e.total_boundary + g.size != d.total_boundary);
            let mut back = img.clone();
            for v in &g.interior {
                let i = vol.index_of(v).expect("interior in V_4");
                back.spins[i] = -d.majority;
            }
            inverse_bad += usize::from(back != cfg);
            if !images.insert((g.interior.clone(), img.spins)) {
                collisions += 1;
            }
        }
    }
    let mut table = Table::new(&["quantity", "value"]);
    table.push(row!["erasures", erasures]);
    table.push(row!["contour count not reduced by one", count_bad]);
    table.push(row!["total boundary not reduced by |γ|", boundary_bad]);
    table.push(row!["preimage not recovered", inverse_bad]);
    table.push(row!["repeated (contour, image) pairs", collisions]);
    let pass = count_bad == 0 && boundary_bad == 0 && inverse_bad == 0;
    Ok((pass, "1000 random configurations on V_4".into(), table))
}

fn contour_counting() -> Result<(bool, String, Table)> {
    let t: VertexWord = "12".parse()?;
    let mut table = Table::new(&["r", "N_t(r)", "12^(2r-1)", "ok"]);
    let mut pass = true;
    for r in 1..=5usize {
        let count = contour::count_contours_through(&t, r, 8)?;
        let bound = 12f64.powi(2 * r as i32 - 1);
        let ok = (count as f64) <= bound && (r >= 3 || count == 0);
        pass &= ok;
        table.push(row![r, count, bound, ok]);
    }
    Ok((pass, "contours through the vertex 12".into(), table))
}

fn oracle_agreement(seed: u64) -> Result<(bool, String, Table)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["model", "n", "beta", "boundary", "max_marginal_diff", "log_z_diff"]);
    let models = [
        ("J=(-1,0)".to_string(), Model::ising()),
        ("J=(-1,0.5)".to_string(), Model::Competing(Coupling { j1: -1.0, j2: 0.5 })),
        ("general".to_string(), Model::General(random_matrix(&mut rng))),
    ];
    let mut worst = 0.0f64;
    for (name, model) in &models {
        for n in 0..=3 {
            for beta in [0.5, 1.0, 2.0] {
                for boundary in [Boundary::Plus, Boundary::Minus] {
                    let p = GibbsParams::new(beta, *model, n, boundary.clone())?;
                    let a = gibbs::exact(&p, Method::Enumeration)?;
                    let b = gibbs::exact(&p, Method::Dp)?;
                    let diff = a
                        .marginals
                        .iter()
                        .zip(&b.marginals)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    let dz = (a.log_partition - b.log_partition).abs();
                    worst = worst.max(diff);
                    let side = if boundary == Boundary::Plus { "plus" } else { "minus" };
                    table.push(row![name.as_str(), n, beta, side, diff, dz]);
                }
            }
        }
    }
    let mut dlr = 0.0f64;
    for beta in [0.5, 1.0, 2.0] {
        for bits in 0..64u64 {
            dlr = dlr.max(gibbs::dlr_discrepancy(beta, &Model::ising(), &spins_from_bits(bits, 6))?);
        }
    }
    table.push(row!["DLR n=2 against n=1", 2usize, "all", "all rings", dlr, 0.0]);
    Ok((worst < 1e-12 && dlr < 1e-12, format!("worst marginal gap {worst:.3e}, DLR gap {dlr:.3e}"), table))
}

/// `P(σ(e) = −1)` from the recursion.
fn root_minus(beta: f64, n: usize, boundary: Boundary) -> Result<f64> {
    let p = GibbsParams::new(beta, Model::ising(), n, boundary)?;
    Ok(gibbs::dp_marginals_nn(&p)?.marginals[0])
}

fn two_phase() -> Result<(bool, String, Table)> {
    let mut table = Table::new(&["beta", "n", "p_plus", "p_minus", "gap"]);
    let mut gap = |beta: f64, n: usize| -> Result<(f64, f64)> {
        let plus = root_minus(beta, n, Boundary::Plus)?;
        let minus = root_minus(beta, n, Boundary::Minus)?;
        table.push(row![beta, n, plus, minus, (minus - plus).abs()]);
        Ok(((minus - plus).abs(), plus))
    };
    let (g12, p12) = gap(1.0, 12)?;
    let (_, p10) = gap(1.0, 10)?;
    let (g_low, _) = gap(0.3, 14)?;
    let beta_c = gibbs::critical_beta(&Model::ising())?;
    let target = 0.5f64.atanh();
    table.push(row!["beta_c", 0usize, beta_c, target, (beta_c - target).abs()]);
    let pass = g12 > 0.4 && (p12 - p10).abs() < 1e-3 && g_low < 1e-3 && (beta_c - target).abs() < 1e-4;
    Ok((pass, format!("gap {g12:.4} at β=1, {g_low:.2e} at β=0.3; β_c = {beta_c:.6}"), table))
}

pub const MCMC_SWEEPS: u64 = 100_000;
pub const MCMC_BURN_IN: u64 = 1_000;

fn mcmc_validity(seed: u64) -> Result<(bool, String, Table)> {
    let mut table = Table::new(&["beta", "boundary", "estimate", "std_error", "exact", "z_score"]);
    let mut pass = true;
    for beta in [0.8, 1.2] {
        for boundary in [Boundary::Plus, Boundary::Minus] {
            let p = GibbsParams::new(beta, Model::ising(), 6, boundary.clone())?;
            let exact = 1.0 - 2.0 * gibbs::dp_marginals_nn(&p)?.marginals[0];
            let est = mcmc::metropolis_run(&ChainSpec::new(p, MCMC_SWEEPS, MCMC_BURN_IN, seed), Observable::RootSpin)?.estimate;
            let z = (est.mean - exact).abs() / est.std_error;
            pass &= z <= 3.0;
            let side = if boundary == Boundary::Plus { "plus" } else { "minus" };
            table.push(row![beta, side, est.mean, est.std_error, exact, z]);
        }
    }
    let p = GibbsParams::new(0.8, Model::ising(), 6, Boundary::Plus)?;
    let spec = ChainSpec::new(p, 2_000, 100, seed);
    let identical = mcmc::metropolis_run(&spec, Observable::RootSpin)? == mcmc::metropolis_run(&spec, Observable::RootSpin)?;
    pass &= identical;
    table.push(row!["rerun", "plus", if identical { 1.0 } else { 0.0 }, 0.0, 1.0, 0.0]);
    Ok((pass, "root spin at n=6 against the recursion".into(), table))
}

fn small_deviation() -> Result<(bool, String, Table)> {
    let mut table = Table::new(&["beta", "probability", "root_flip", "c_m", "bound", "bound_ok"]);
    let mut pass = true;
    let mut prev = f64::INFINITY;
    let root = VertexWord::root();
    for beta in [0.8, 1.2, 1.6, 2.0] {
        let p = GibbsParams::new(beta, Model::ising(), 10, Boundary::Plus)?;
        let s = gibbs::small_deviation_prob(&root, 1, &p)?;
        let ok = s.probability <= s.bound;
        pass &= ok && s.probability < prev;
        prev = s.probability;
        table.push(row![beta, s.probability, s.root_flip, s.c_m, s.bound, ok]);
    }
    pass &= prev < 1e-2;
    Ok((pass, "window V_1(e) at n=10, plus boundary".into(), table))
}
