use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use cayley::config::parse_config;
use cayley::contour::{decompose, energy_via_contours};
use cayley::gibbs::{self, GibbsParams, Method};
use cayley::ground::{self, PeriodicGroundState};
use cayley::mcmc::{self, ChainSpec, Observable};
use cayley::model::{self, Boundary, Coupling, InteractionMatrix, Model};
use cayley::tree::{VertexWord, Volume};
use cayley::validation;

use crate::artifact::{Csv, Format, Output};
use crate::{
    BoundaryArg, BoundsArgs, ContoursArgs, CouplingArgs, DeviationArgs, ExactArgs, Failure, GroundArgs, MethodArg,
    ModelArgs, PeierlsArgs, ReportArgs, SampleArgs, TwophaseArgs,
};

fn coupling(a: &CouplingArgs) -> Result<Coupling, Failure> {
    Ok(Coupling::new(a.j1, a.j2)?)
}

fn model_of(a: &ModelArgs) -> Result<Model, Failure> {
    match &a.lambda {
        Some(l) => Ok(Model::General(InteractionMatrix::new([[l[0], l[1]], [l[2], l[3]]])?)),
        None => Ok(Model::Competing(Coupling::new(a.j1, a.j2)?)),
    }
}

fn boundary_of(b: BoundaryArg) -> Boundary {
    match b {
        BoundaryArg::Plus => Boundary::Plus,
        BoundaryArg::Minus => Boundary::Minus,
    }
}

fn state_json(s: &PeriodicGroundState) -> Value {
    json!({"eps": s.signature.eps, "sign": s.sign})
}

fn spin_string(spins: &[model::Spin]) -> String {
    spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn phase(a: &CouplingArgs) -> Result<Output, Failure> {
    let j = coupling(a)?;
    let g = ground::enumerate_ground_states(j);
    let peierls = ground::peierls_constants(j);
    Ok(Output::json(json!({
        "regions": g.regions.members,
        "ground_classes": g.regions.ground_classes,
        "epsilon": peierls.epsilon,
        "lambda": peierls.lambda,
        "infinite": g.infinite,
        "ground_states": g.states.iter().map(state_json).collect::<Vec<_>>(),
    })))
}

pub fn ground(a: &GroundArgs) -> Result<Output, Failure> {
    let j = coupling(&a.coupling)?;
    let g = ground::enumerate_ground_states(j);
    let states: Vec<Value> = g
        .states
        .iter()
        .map(|s| {
            json!({
                "eps": s.signature.eps,
                "sign": s.sign,
                "class": s.class(),
                "minimal": ground::is_minimal_on(s, j, a.n),
            })
        })
        .collect();
    let mut layered = Vec::new();
    if g.infinite {
        if let Some((s1, s2)) = validation::layering_pair(&g.states) {
            for t in 1..=a.layers {
                let cfg = ground::layered_state(&s1, &s2, t, a.n, &g.regions.ground_classes)?;
                let valid = ground::ball_classes(&cfg)
                    .iter()
                    .all(|c| g.regions.ground_classes.contains(c));
                layered.push(json!({"t": t, "valid": valid, "spins": spin_string(&cfg.spins)}));
            }
        }
    }
    Ok(Output::json(json!({
        "regions": g.regions.members,
        "ground_classes": g.regions.ground_classes,
        "infinite": g.infinite,
        "n": a.n,
        "states": states,
        "layered": layered,
    })))
}

pub fn peierls(a: &PeierlsArgs) -> Result<Output, Failure> {
    let j = coupling(&a.coupling)?;
    let data = ground::peierls_constants(j);
    let suite = ground::PeierlsSuite::new(a.support, j)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::new();
    let mut total = 0usize;
    for (base, state) in suite.ground_states().iter().enumerate() {
        let mut violations = 0usize;
        let mut min_margin = f64::INFINITY;
        for _ in 0..a.samples {
            let flips = suite.random_flips(&mut rng);
            let out = suite.check(base, &flips);
            violations += usize::from(!out.pass);
            min_margin = min_margin.min(out.h_rel - out.bound);
        }
        total += violations;
        rows.push(json!({
            "eps": state.signature.eps,
            "sign": state.sign,
            "checks": a.samples,
            "violations": violations,
            "min_margin": min_margin,
        }));
    }
    Ok(Output::json(json!({
        "epsilon": data.epsilon,
        "lambda": data.lambda,
        "ground_states": rows,
        "violations": total,
    })))
}

pub fn contours(a: &ContoursArgs) -> Result<Output, Failure> {
    let text = std::fs::read_to_string(&a.input)?;
    let cfg = parse_config(&text)?;
    if cfg.radius != a.n {
        return Err(Failure::Validation(format!(
            "configuration has radius {} but --n is {}",
            cfg.radius, a.n
        )));
    }
    let d = decompose(&cfg)?;
    let j = Coupling::new(a.j1, 0.0)?;
    let direct = model::hamiltonian(&cfg, j);
    let via = energy_via_contours(&d, a.n, &Model::Competing(j))?;
    let contours: Vec<Value> = d
        .contours
        .iter()
        .map(|c| json!({"interior": c.interior, "boundary": c.boundary}))
        .collect();
    Ok(Output::json(json!({
        "m": d.m,
        "total_boundary": d.total_boundary,
        "contours": contours,
        "energy_identity_check": {"direct": direct, "via_contours": via},
    })))
}

pub fn exact(a: &ExactArgs) -> Result<Output, Failure> {
    let p = GibbsParams::new(a.beta, model_of(&a.model)?, a.n, boundary_of(a.boundary))?;
    let method = match a.method {
        MethodArg::Enum => Method::Enumeration,
        MethodArg::Dp => Method::Dp,
    };
    let r = gibbs::exact(&p, method)?;
    let vol = Volume::new(a.n);
    let mut marginals = serde_json::Map::new();
    let mut csv = Csv::new(&["vertex", "marginal"]);
    for (i, &m) in r.marginals.iter().enumerate() {
        let w = vol.word(i).to_string();
        csv.push(vec![json!(w), json!(m)]);
        marginals.insert(w, json!(m));
    }
    Ok(Output::table(
        json!({"log_z": r.log_partition, "marginals": marginals}),
        csv,
        Format::Json,
    ))
}

fn join_words(words: &[VertexWord]) -> String {
    words.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn bounds(a: &BoundsArgs) -> Result<Output, Failure> {
    let p = GibbsParams::new(a.beta, model_of(&a.model)?, a.n, boundary_of(a.boundary))?;
    let contours = validation::realizable_contours(a.n);
    let rows: Vec<(Value, Vec<Value>, bool)> = contours
        .par_iter()
        .map(|g| -> Result<_, Failure> {
            let prob = gibbs::contour_probability(g, &p)?;
            let bound = gibbs::contour_bound(g.size, &p)?.bound;
            let ok = prob.realizable && prob.probability <= bound * (1.0 + 1e-12);
            let object = json!({
                "interior": g.interior,
                "boundary": g.boundary,
                "size": g.size,
                "p": prob.probability,
                "bound": bound,
                "ok": ok,
            });
            let row = vec![
                json!(join_words(&g.interior)),
                json!(g.size),
                json!(prob.probability),
                json!(bound),
                json!(ok),
            ];
            Ok((object, row, ok))
        })
        .collect::<Result<_, _>>()?;
    let mut csv = Csv::new(&["interior", "size", "p", "bound", "ok"]);
    let mut objects = Vec::with_capacity(rows.len());
    let mut violations = 0usize;
    for (object, row, ok) in rows {
        violations += usize::from(!ok);
        objects.push(object);
        csv.push(row);
    }
    Ok(Output::table(
        json!({"rows": objects, "violations": violations}),
        csv,
        Format::Json,
    ))
}

pub fn deviation(a: &DeviationArgs) -> Result<Output, Failure> {
    let model = model_of(&a.model)?;
    let x: VertexWord = a.vertex.parse()?;
    let results: Vec<gibbs::SmallDeviation> = a
        .beta_grid
        .par_iter()
        .map(|&beta| -> Result<_, Failure> {
            let p = GibbsParams::new(beta, model, a.n, boundary_of(a.boundary))?;
            Ok(gibbs::small_deviation_prob(&x, a.window, &p)?)
        })
        .collect::<Result<_, _>>()?;
    let mut csv = Csv::new(&["beta", "prob"]);
    let mut rows = Vec::new();
    for r in &results {
        csv.push(vec![json!(r.beta), json!(r.probability)]);
        rows.push(json!({
            "beta": r.beta,
            "prob": r.probability,
            "root_flip": r.root_flip,
            "c_m": r.c_m,
            "bound": r.bound,
        }));
    }
    Ok(Output::table(json!({"rows": rows}), csv, Format::Csv))
}

pub fn sample(a: &SampleArgs) -> Result<Output, Failure> {
    let obs: Observable = a.observable.parse()?;
    let params = GibbsParams::new(a.beta, model_of(&a.model)?, a.n, boundary_of(a.boundary))?;
    let mut spec = ChainSpec::new(params, a.sweeps, a.burnin, a.seed);
    spec.thinning = a.thinning;
    let run = mcmc::metropolis_run(&spec, obs)?;
    let mut csv = Csv::new(&["sweep", "observable", "running_mean"]);
    for row in &run.trace {
        csv.push(vec![json!(row.sweep), json!(row.value), json!(row.running_mean)]);
    }
    Ok(Output::table(
        json!({
            "observable": obs.to_string(),
            "estimate": run.estimate,
            "acceptance_rate": run.acceptance_rate,
        }),
        csv,
        Format::Csv,
    ))
}

pub fn twophase(a: &TwophaseArgs) -> Result<Output, Failure> {
    let burn_in = a.burnin.unwrap_or(a.sweeps / 100);
    let r = mcmc::two_phase_experiment(a.n, a.beta, model_of(&a.model)?, a.sweeps, burn_in, a.seed)?;
    Ok(Output::json(serde_json::to_value(&r).expect("results serialize")))
}

pub fn report(a: &ReportArgs) -> Result<Output, Failure> {
    let ids = a.criteria.clone().unwrap_or_else(|| (1..=validation::CRITERIA.len()).collect());
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > validation::CRITERIA.len()) {
        return Err(Failure::Validation(format!(
            "unknown criterion {bad}; valid ids are 1..={}",
            validation::CRITERIA.len()
        )));
    }
    let reports: Vec<validation::CriterionReport> = ids
        .par_iter()
        .map(|&id| -> Result<_, Failure> {
            let start = Instant::now();
            let r = validation::run_criterion(id, a.seed)?;
            eprintln!(
                "[{}] {:>2} {} ({:.1} s)",
                if r.pass { "PASS" } else { "FAIL" },
                r.id,
                r.title,
                start.elapsed().as_secs_f64()
            );
            Ok(r)
        })
        .collect::<Result<_, _>>()?;
    let failed: Vec<usize> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let mut csv = Csv::new(&["id", "title", "pass", "summary"]);
    for r in &reports {
        csv.push(vec![json!(r.id), json!(r.title), json!(r.pass), json!(r.summary)]);
    }
    Ok(Output::table(
        json!({
            "criteria": reports,
            "passed": reports.len() - failed.len(),
            "failed": failed,
        }),
        csv,
        Format::Json,
    ))
}
