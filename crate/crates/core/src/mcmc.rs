//! Seeded single-spin-flip Metropolis sampling.
//!
//! A sweep proposes a flip at every site of `V_n` in canonical order. The
//! uniform draw for site `k` of sweep `t` is the `k`-th output of a ChaCha8
//! stream keyed by `(seed, t)`, so runs are reproducible bit for bit and any
//! sweep can be replayed on its own.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contour::contour_stats;
use crate::error::{Error, Result};
use crate::gibbs::{self, GibbsParams, PairList};
use crate::model::{energy_from_counts, Boundary, Model, Spin, PLUS};
use crate::tree::{self, Volume};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub params: GibbsParams,
    pub sweeps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub thinning: u64,
}

impl ChainSpec {
    pub fn new(params: GibbsParams, sweeps: u64, burn_in: u64, seed: u64) -> Self {
        ChainSpec {
            params,
            sweeps,
            burn_in,
            seed,
            thinning: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.sweeps <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "sweeps ({}) must exceed burn-in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be positive".into()));
        }
        self.params.boundary.validate(self.params.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    RootSpin,
    Magnetization,
    BoundarySize,
    ContourCount,
    WindowMismatch(usize),
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::RootSpin => write!(f, "root_spin"),
            Observable::Magnetization => write!(f, "magnetization"),
            Observable::BoundarySize => write!(f, "boundary_size"),
            Observable::ContourCount => write!(f, "contour_count"),
            Observable::WindowMismatch(m) => write!(f, "window_mismatch({m})"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    /// Accepts the names printed by `Display`; the window radius may also be
    /// written as `window_mismatch:m`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "root_spin" => return Ok(Observable::RootSpin),
            "magnetization" => return Ok(Observable::Magnetization),
            "boundary_size" => return Ok(Observable::BoundarySize),
            "contour_count" => return Ok(Observable::ContourCount),
            _ => {}
        }
        let radius = s
            .strip_prefix("window_mismatch(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("window_mismatch:"));
        match radius.map(str::parse::<usize>) {
            Some(Ok(m)) => Ok(Observable::WindowMismatch(m)),
            _ => Err(Error::InvalidParameter(format!("unknown observable {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub sweep: u64,
    pub value: f64,
    pub running_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub estimate: Estimate,
    pub acceptance_rate: f64,
    pub trace: Vec<TraceRow>,
}

pub const BATCHES: usize = 30;

/// Mean and batch-means standard error over (at most) 30 equal batches.
pub fn batch_means(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let batches = BATCHES.min(n);
    if batches < 2 {
        return (mean, 0.0);
    }
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| samples[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm) * (m - bm)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

/// `min(1, e^{−βΔH})`.
pub fn acceptance_probability(beta: f64, delta: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-beta * delta).exp()
    }
}

/// State of one Metropolis chain on `V_n` with a fixed boundary.
#[derive(Clone, Debug)]
pub struct Chain {
    vol: Volume,
    inner: usize,
    model: Model,
    beta: f64,
    spins: Vec<Spin>,
    nbrs: Vec<Vec<usize>>,
    seconds: Vec<Vec<usize>>,
}

impl Chain {
    /// Starts from the constant boundary value (`+1` for an explicit one).
    pub fn new(p: &GibbsParams) -> Result<Self> {
        let init = p.boundary.constant().unwrap_or(PLUS);
        Chain::with_spins(p, &vec![init; tree::ball_size(p.n)])
    }

    pub fn with_spins(p: &GibbsParams, spins: &[Spin]) -> Result<Self> {
        p.boundary.validate(p.n)?;
        let inner = tree::ball_size(p.n);
        if spins.len() != inner {
            return Err(Error::InvalidParameter(format!(
                "need {inner} spins, got {}",
                spins.len()
            )));
        }
        let vol = Volume::new(p.n + 1);
        let mut ext = spins.to_vec();
        ext.extend((0..tree::sphere_size(p.n + 1)).map(|k| p.boundary.spin(k)));
        let nbrs = (0..inner).map(|i| vol.neighbors(i).collect()).collect();
        let seconds = if p.model.is_nearest_neighbor() {
            vec![Vec::new(); inner]
        } else {
            (0..inner).map(|i| vol.second_neighbors(i)).collect()
        };
        Ok(Chain {
            vol,
            inner,
            model: p.model,
            beta: p.beta,
            spins: ext,
            nbrs,
            seconds,
        })
    }

    /// Spins on `V_n`.
    pub fn spins(&self) -> &[Spin] {
        &self.spins[..self.inner]
    }

    /// Energy change of flipping site `i`, from its neighborhood only.
    pub fn delta_energy(&self, i: usize) -> f64 {
        let s = self.spins[i];
        let mut d = 0.0;
        for &y in &self.nbrs[i] {
            let t = self.spins[y];
            d += self.model.edge_energy(-s, t) - self.model.edge_energy(s, t);
        }
        for &z in &self.seconds[i] {
            let t = self.spins[z];
            d += self.model.second_energy(-s, t) - self.model.second_energy(s, t);
        }
        d
    }

    /// Energy of the current configuration, summed over every pair.
    pub fn energy(&self) -> f64 {
        let pairs = PairList::new(&self.vol);
        energy_from_counts(&self.model.coefficients(), &pairs.counts(&self.model, &self.spins))
    }

    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    /// One sweep with the stream for `(seed, sweep)`; returns the number of
    /// accepted flips.
    pub fn sweep(&mut self, seed: u64, sweep: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sweep);
        let mut accepted = 0;
        for i in 0..self.inner {
            let u: f64 = rng.random();
            let dh = self.delta_energy(i);
            if u < acceptance_probability(self.beta, dh) {
                self.flip(i);
                accepted += 1;
            }
        }
        accepted
    }

    fn measure(&self, obs: Observable, reference: Option<Spin>) -> Result<f64> {
        let need_ref = || {
            reference.ok_or_else(|| {
                Error::Unsupported(format!("observable {obs} needs a constant boundary"))
            })
        };
        Ok(match obs {
            Observable::RootSpin => f64::from(self.spins[0]),
            Observable::Magnetization => {
                self.spins().iter().map(|&s| f64::from(s)).sum::<f64>() / self.inner as f64
            }
            Observable::BoundarySize => {
                contour_stats(&self.vol, self.vol.radius() - 1, &self.spins, need_ref()?).1 as f64
            }
            Observable::ContourCount => {
                contour_stats(&self.vol, self.vol.radius() - 1, &self.spins, need_ref()?).0 as f64
            }
            Observable::WindowMismatch(m) => {
                let r = need_ref()?;
                let window = tree::ball_size(m).min(self.inner);
                f64::from(u8::from(self.spins[..window].iter().any(|&s| s != r)))
            }
        })
    }
}

/// Runs the chain and records `obs` after burn-in at every `thinning`-th
/// sweep.
pub fn metropolis_run(spec: &ChainSpec, obs: Observable) -> Result<RunOutput> {
    spec.validate()?;
    let reference = spec.params.boundary.constant();
    let mut chain = Chain::new(&spec.params)?;
    chain.measure(obs, reference)?;
    let mut accepted = 0usize;
    let mut samples = Vec::new();
    let mut trace = Vec::new();
    let mut running = 0.0;
    for t in 0..spec.sweeps {
        accepted += chain.sweep(spec.seed, t);
        if t >= spec.burn_in && (t - spec.burn_in) % spec.thinning == 0 {
            let v = chain.measure(obs, reference)?;
            samples.push(v);
            running += v;
            trace.push(TraceRow {
                sweep: t,
                value: v,
                running_mean: running / samples.len() as f64,
            });
        }
    }
    let (mean, std_error) = batch_means(&samples);
    let proposals = spec.sweeps as f64 * chain.inner as f64;
    Ok(RunOutput {
        estimate: Estimate {
            mean,
            std_error,
            n_samples: samples.len(),
            seed: spec.seed,
        },
        acceptance_rate: accepted as f64 / proposals,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhase {
    pub plus: Estimate,
    pub minus: Estimate,
    /// `plus.mean − minus.mean` for the root spin.
    pub gap: f64,
    /// Exact root-spin expectations, when the model admits the recursion.
    pub dp_plus: Option<f64>,
    pub dp_minus: Option<f64>,
}

/// Root-spin chains under plus and minus boundaries, seeded `seed` and
/// `seed + 1`.
pub fn two_phase_experiment(
    n: usize,
    beta: f64,
    model: Model,
    sweeps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<TwoPhase> {
    two_phase_with_seeds(n, beta, model, sweeps, burn_in, (seed, seed.wrapping_add(1)))
}

pub fn two_phase_with_seeds(
    n: usize,
    beta: f64,
    model: Model,
    sweeps: u64,
    burn_in: u64,
    seeds: (u64, u64),
) -> Result<TwoPhase> {
    let run = |boundary: Boundary, seed: u64| -> Result<(Estimate, Option<f64>)> {
        let params = GibbsParams::new(beta, model, n, boundary)?;
        let est = metropolis_run(&ChainSpec::new(params.clone(), sweeps, burn_in, seed), Observable::RootSpin)?.estimate;
        let dp = if model.is_nearest_neighbor() && n <= gibbs::DP_RADIUS_LIMIT {
            Some(1.0 - 2.0 * gibbs::dp_marginals_nn(&params)?.marginals[0])
        } else {
            None
        };
        Ok((est, dp))
    };
    let (plus, dp_plus) = run(Boundary::Plus, seeds.0)?;
    let (minus, dp_minus) = run(Boundary::Minus, seeds.1)?;
    Ok(TwoPhase {
        gap: plus.mean - minus.mean,
        plus,
        minus,
        dp_plus,
        dp_minus,
    })
}

/// Transition matrix of the single-site update at `site`, over all
/// configurations of `V_n` (bit `k` set means site `k` is `−1`).
pub fn single_site_kernel(p: &GibbsParams, site: usize) -> Result<Vec<Vec<f64>>> {
    let size = tree::ball_size(p.n);
    if size > 10 {
        return Err(Error::EnumerationCapacity { sites: size, limit: 10 });
    }
    let states = 1usize << size;
    let mut k = vec![vec![0.0; states]; states];
    for x in 0..states {
        let spins = spins_of(x, size);
        let chain = Chain::with_spins(p, &spins)?;
        let a = acceptance_probability(p.beta, chain.delta_energy(site));
        let y = x ^ (1 << site);
        k[x][y] += a;
        k[x][x] += 1.0 - a;
    }
    Ok(k)
}

/// Transition matrix of one full sweep.
pub fn sweep_kernel(p: &GibbsParams) -> Result<Vec<Vec<f64>>> {
    let size = tree::ball_size(p.n);
    let mut acc: Option<Vec<Vec<f64>>> = None;
    for site in 0..size {
        let k = single_site_kernel(p, site)?;
        acc = Some(match acc {
            None => k,
            Some(a) => matmul(&a, &k),
        });
    }
    acc.ok_or_else(|| Error::InvalidParameter("empty volume".into()))
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0.0 {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

pub fn spins_of(bits: usize, size: usize) -> Vec<Spin> {
    (0..size).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect()
}
