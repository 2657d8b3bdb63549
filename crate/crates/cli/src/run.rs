//! Verb implementations: each one drives the core checks and assembles a
//! deterministic report.

use std::time::Instant;

use bethe_core::bethe::{
    action_formula, corner_action, gln_reduction_checks, rank1_action, simple_root_action,
    verify_action, zero_mode_action, BetheContext, BetheFactory,
};
use bethe_core::monodromy::{
    check_central, check_lambda_rest, check_rtt, check_transfer_commute,
    check_zero_mode_commutators, find_vacuum, SymbolicMonodromy,
};
use bethe_core::partitions::Params;
use bethe_core::rmatrix::{check_unitarity, check_yang_baxter};
use bethe_core::scalar::{C64, Rat, Scalar};
use bethe_core::spectra::run_spectrum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cache;
use crate::config::{Backend, ConfigError, Loaded};
use crate::report::{CheckStatus, Report};

pub struct Options {
    pub jobs: usize,
    pub backend: Option<Backend>,
    pub i: Option<i32>,
    pub j: Option<i32>,
}

fn rand_rat(rng: &mut ChaCha8Rng) -> Rat {
    let denoms = [3i64, 5, 7, 11, 13];
    loop {
        let p = rng.gen_range(-40..=40i64);
        let q = denoms[rng.gen_range(0..denoms.len())];
        let v = Rat::new(p, q);
        if !v.is_zero() {
            return v;
        }
    }
}

fn pairwise_generic(loaded: &Loaded, vals: &[Rat]) -> bool {
    let p = &loaded.spec.params;
    let ck = &p.c * &p.kappa();
    for a in 0..vals.len() {
        for b in 0..a {
            let d = &vals[a] - &vals[b];
            if d.is_zero() || d == ck || d == -&ck {
                return false;
            }
        }
    }
    true
}

/// Run a fallible check body, converting a core error into a failed check.
fn run_check(
    report: &mut Report,
    name: &str,
    body: impl FnOnce() -> bethe_core::Result<(bool, Option<String>)>,
) {
    match body() {
        Ok((ok, counterexample)) => report.outcome(name, ok, counterexample),
        Err(e) => report.outcome(name, false, Some(e.to_string())),
    }
}

pub fn yb_check(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(loaded.config.seed);
    let params = loaded.spec.params.clone();
    let mut done = 0;
    while done < 20 {
        let u = [rand_rat(&mut rng), rand_rat(&mut rng), rand_rat(&mut rng)];
        if !pairwise_generic(loaded, &u) {
            continue;
        }
        run_check(
            report,
            &format!("yang-baxter u=({},{},{})", u[0], u[1], u[2]),
            || Ok((check_yang_baxter(&params, &u[0], &u[1], &u[2])?, None)),
        );
        done += 1;
    }
    let mut done = 0;
    while done < 20 {
        let u = [rand_rat(&mut rng), rand_rat(&mut rng)];
        if !pairwise_generic(loaded, &u) {
            continue;
        }
        run_check(report, &format!("unitarity (u,v)=({},{})", u[0], u[1]), || {
            Ok((check_unitarity(&params, &u[0], &u[1])?, None))
        });
        done += 1;
    }
    report.time("yb-check", started);
}

fn sample_points(loaded: &Loaded, rng: &mut ChaCha8Rng, count: usize) -> Vec<(Rat, Rat)> {
    let mut out = Vec::new();
    while out.len() < count {
        let u = rand_rat(rng);
        let v = rand_rat(rng);
        let mut probe = loaded.spec.xi.clone();
        probe.push(u.clone());
        probe.push(v.clone());
        if pairwise_generic(loaded, &probe) {
            out.push((u, v));
        }
    }
    out
}

pub fn rtt_check(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let m = SymbolicMonodromy::build(loaded.spec.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(loaded.config.seed);
    for (u, v) in sample_points(loaded, &mut rng, 5) {
        run_check(report, &format!("rtt (u,v)=({u},{v})"), || {
            Ok((check_rtt(&m, &u, &v)?, None))
        });
    }
    for (u, v) in sample_points(loaded, &mut rng, 2) {
        run_check(report, &format!("transfer-commute (u,v)=({u},{v})"), || {
            Ok((check_transfer_commute(&m, &u, &v)?, None))
        });
    }
    report.time("rtt-check", started);
}

pub fn vacuum(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let m = SymbolicMonodromy::build(loaded.spec.clone());
    match find_vacuum(&m) {
        Ok(vac) => {
            let lambdas: serde_json::Map<String, serde_json::Value> = vac
                .lambdas()
                .map(|(i, f)| (i.to_string(), json!(f.to_string())))
                .collect();
            report.pass("vacuum-found");
            report.recorded("vacuum-data", json!({ "vector": vac.vector, "lambdas": lambdas }));
        }
        Err(e) => report.outcome("vacuum-found", false, Some(e.to_string())),
    }
    report.time("vacuum", started);
}

pub fn central(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let m = SymbolicMonodromy::build(loaded.spec.clone());
    match check_central(&m) {
        Ok(central) => {
            report.pass("central-relation");
            report.recorded("central-scalar", json!(central.z.to_string()));
            match find_vacuum(&m).and_then(|vac| check_lambda_rest(&m, &vac, &central)) {
                Ok(rest) => {
                    for r in rest {
                        report.recorded(
                            format!("lambda-relation j={}", r.j),
                            json!(format!("{:?}", r.mode)),
                        );
                    }
                }
                Err(e) => report.outcome("lambda-relation", false, Some(e.to_string())),
            }
        }
        Err(e) => report.outcome("central-relation", false, Some(e.to_string())),
    }
    report.time("central", started);
}

pub fn bethe_build(loaded: &Loaded, opts: &Options, report: &mut Report) {
    let started = Instant::now();
    let backend = opts.backend.unwrap_or(loaded.config.backend);
    match backend {
        Backend::Exact => {
            let key = cache::content_hash(&loaded.spec, &loaded.t, "exact");
            if let Some(vec) = cache::load(&key) {
                report.pass("bethe-build");
                report.recorded(
                    "vector",
                    json!({ "cache": "hit", "hash": key, "vector": vec }),
                );
            } else {
                let mut body = || -> bethe_core::Result<()> {
                    let ctx = BetheContext::new(loaded.spec.clone())?;
                    let f = BetheFactory::<Rat>::new(&ctx);
                    let vec = f.build(&loaded.t)?;
                    cache::store(&key, &loaded.t, &vec);
                    report.pass("bethe-build");
                    report.recorded(
                        "vector",
                        json!({ "cache": "miss", "hash": key, "vector": vec }),
                    );
                    Ok(())
                };
                if let Err(e) = body() {
                    report.outcome("bethe-build", false, Some(e.to_string()));
                }
            }
        }
        Backend::Float => {
            let mut body = || -> bethe_core::Result<()> {
                let ctx = BetheContext::new(loaded.spec.clone())?;
                let f = BetheFactory::<C64>::new(&ctx);
                let t_float = Params::from_sets(
                    loaded
                        .t
                        .sets()
                        .iter()
                        .map(|lvl| lvl.iter().map(C64::from_rat).collect())
                        .collect(),
                );
                let vec = f.build(&t_float)?;
                report.pass("bethe-build");
                report.recorded("vector", json!({ "cache": "none", "vector": vec }));
                Ok(())
            };
            if let Err(e) = body() {
                report.outcome("bethe-build", false, Some(e.to_string()));
            }
        }
    }
    report.time("bethe-build", started);
}

pub fn action_verify(
    loaded: &Loaded,
    opts: &Options,
    report: &mut Report,
) -> Result<(), ConfigError> {
    let started = Instant::now();
    let n = loaded.spec.n() as i32;
    let pairs: Vec<(i32, i32)> = match (opts.i, opts.j) {
        (Some(i), Some(j)) => vec![(i, j)],
        (None, None) => (-n..=n)
            .flat_map(|i| (-n..=n).map(move |j| (i, j)))
            .collect(),
        _ => {
            return Err(ConfigError(
                "flags '--i' and '--j' must be given together".into(),
            ))
        }
    };
    let single = pairs.len() == 1;
    let twisted = !loaded.spec.is_untwisted();
    let mut body = || -> bethe_core::Result<()> {
        let ctx = BetheContext::new(loaded.spec.clone())?;
        let f = BetheFactory::<Rat>::new(&ctx);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs.max(1))
            .build()
            .expect("thread pool");
        let results: Vec<(i32, i32, bethe_core::Result<bool>)> = pool.install(|| {
            use rayon::prelude::*;
            pairs
                .par_iter()
                .map(|&(i, j)| (i, j, verify_action(&f, i, j, &loaded.z, &loaded.t)))
                .collect()
        });
        for (i, j, res) in results {
            let name = format!("action i={i} j={j}");
            match res {
                Ok(ok) if twisted => {
                    // The action formula is established for the untwisted
                    // chain; twisted outcomes are recorded, not asserted.
                    report.recorded(name, json!({ "holds": ok }));
                }
                Ok(ok) => report.outcome(name, ok, None),
                Err(e) => report.outcome(name, false, Some(e.to_string())),
            }
        }
        if single {
            let (i, j) = pairs[0];
            let expansion = action_formula(&f, i, j, &loaded.z, &loaded.t)?;
            let terms: Vec<serde_json::Value> = expansion
                .terms
                .iter()
                .map(|(coeff, params)| {
                    json!({
                        "coefficient": coeff.to_string(),
                        "params": params
                            .sets()
                            .iter()
                            .map(|lvl| lvl.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            report.recorded("term-table", json!(terms));
        }
        Ok(())
    };
    if let Err(e) = body() {
        report.outcome("action-verify", false, Some(e.to_string()));
    }
    report.time("action-verify", started);
    Ok(())
}

pub fn zero_modes(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let mut body = || -> bethe_core::Result<()> {
        let ctx = BetheContext::new(loaded.spec.clone())?;
        let f = BetheFactory::<Rat>::new(&ctx);
        let zm_report = check_zero_mode_commutators(&ctx.monodromy, &loaded.z)?;
        report.outcome(
            "zero-mode-commutators",
            zm_report.ok,
            zm_report.counterexample,
        );
        let n = loaded.spec.n() as usize;
        let built = f.build(&loaded.t)?;
        for j in 1..=n {
            for i in 0..j {
                let expansion = zero_mode_action(&f, j, i, &loaded.t)?;
                let zm = ctx.monodromy.zero_mode(j as i8, i as i8)?;
                let direct = zm.apply(&built)?;
                report.outcome(
                    format!("zero-mode-action (j,i)=({j},{i})"),
                    direct == expansion.assembled,
                    None,
                );
                if j == i + 1 {
                    let simple = simple_root_action(&f, i, &loaded.t)?;
                    report.outcome(
                        format!("simple-root-form i={i}"),
                        simple.terms == expansion.terms,
                        None,
                    );
                }
            }
        }
        let corner = corner_action(&f, &loaded.z, &loaded.t)?;
        let direct = f
            .entry_op(-(n as i8), n as i8, &loaded.z)?
            .apply(&built)?;
        report.outcome("corner-action", direct == corner.assembled, None);
        let general = action_formula(&f, -(n as i32), n as i32, &loaded.z, &loaded.t)?;
        report.outcome("corner-vs-general", corner.terms == general.terms, None);
        Ok(())
    };
    if let Err(e) = body() {
        report.outcome("zero-modes", false, Some(e.to_string()));
    }
    report.time("zero-modes", started);
}

pub fn recursion_crosscheck(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let mut body = || -> bethe_core::Result<()> {
        let ctx = BetheContext::new(loaded.spec.clone())?;
        let f = BetheFactory::<Rat>::new(&ctx);
        let a = f.build(&loaded.t)?;
        let b = f.build_alt(&loaded.t)?;
        report.outcome("recursion-crosscheck", a == b, None);
        report.recorded("vector-nonzero", json!(!a.is_zero()));
        Ok(())
    };
    if let Err(e) = body() {
        report.outcome("recursion-crosscheck", false, Some(e.to_string()));
    }
    report.time("recursion-crosscheck", started);
}

pub fn reduce_gln(loaded: &Loaded, report: &mut Report) -> Result<(), ConfigError> {
    if !loaded.t.set(0).is_empty() {
        return Err(ConfigError(
            "field 't': reduce-gln requires an empty level-0 parameter set".into(),
        ));
    }
    let started = Instant::now();
    let mut body = || -> bethe_core::Result<()> {
        let ctx = BetheContext::new(loaded.spec.clone())?;
        let f = BetheFactory::<Rat>::new(&ctx);
        let gln = gln_reduction_checks(&f, &loaded.z, &loaded.t)?;
        report.outcome("gln-raising", gln.raising_ok, None);
        for (k, ok) in gln.simple_roots_ok.iter().enumerate() {
            report.outcome(format!("gln-simple-root i={}", k + 1), *ok, None);
        }
        Ok(())
    };
    if let Err(e) = body() {
        report.outcome("reduce-gln", false, Some(e.to_string()));
    }
    report.time("reduce-gln", started);
    Ok(())
}

pub fn reduce_o3(loaded: &Loaded, report: &mut Report) -> Result<(), ConfigError> {
    if loaded.spec.n() != 1 {
        return Err(ConfigError("field 'n': reduce-o3 requires n = 1".into()));
    }
    let started = Instant::now();
    let mut body = || -> bethe_core::Result<()> {
        let ctx = BetheContext::new(loaded.spec.clone())?;
        let f = BetheFactory::<Rat>::new(&ctx);
        for i in -1..=1 {
            for j in -1..=1 {
                let general = action_formula(&f, i, j, &loaded.z, &loaded.t)?;
                let display = rank1_action(&f, i, j, &loaded.z, &loaded.t)?;
                report.outcome(
                    format!("rank1-display i={i} j={j}"),
                    general.terms == display.terms && general.assembled == display.assembled,
                    None,
                );
            }
        }
        Ok(())
    };
    if let Err(e) = body() {
        report.outcome("reduce-o3", false, Some(e.to_string()));
    }
    report.time("reduce-o3", started);
    Ok(())
}

pub fn spectrum(loaded: &Loaded, report: &mut Report) {
    let started = Instant::now();
    let mut body = || -> bethe_core::Result<()> {
        let ctx = BetheContext::new(loaded.spec.clone())?;
        let cards = loaded.t.cardinalities();
        let spectrum = run_spectrum(&ctx, &cards, &loaded.z, loaded.config.seed)?;
        report.outcome("all-converged-roots-pass", spectrum.all_roots_pass(), None);
        report.recorded("spectrum", serde_json::to_value(&spectrum).expect("serializable"));
        Ok(())
    };
    if let Err(e) = body() {
        report.outcome("spectrum", false, Some(e.to_string()));
    }
    report.time("spectrum", started);
}

/// Dispatch helper used by main; returns the report or a config error.
pub fn dispatch(
    verb: &str,
    loaded: &Loaded,
    opts: &Options,
) -> Result<Report, ConfigError> {
    let mut report = Report::new(verb, loaded.config.clone());
    match verb {
        "yb-check" => yb_check(loaded, &mut report),
        "rtt-check" => rtt_check(loaded, &mut report),
        "vacuum" => vacuum(loaded, &mut report),
        "central" => central(loaded, &mut report),
        "bethe-build" => bethe_build(loaded, opts, &mut report),
        "action-verify" => action_verify(loaded, opts, &mut report)?,
        "zero-modes" => zero_modes(loaded, &mut report),
        "recursion-crosscheck" => recursion_crosscheck(loaded, &mut report),
        "reduce-gln" => reduce_gln(loaded, &mut report)?,
        "reduce-o3" => reduce_o3(loaded, &mut report)?,
        "spectrum" => spectrum(loaded, &mut report),
        other => return Err(ConfigError(format!("unknown verb '{other}'"))),
    }
    // Normalize: a report with only recorded checks still counts as pass.
    if report.checks.iter().all(|c| c.status != CheckStatus::Fail) && report.status != CheckStatus::Fail {
        report.status = CheckStatus::Pass;
    }
    Ok(report)
}
