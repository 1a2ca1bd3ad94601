use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::record::{now_ms, sha256_hex, CommandOutput, RunRecord, RunStatus};
use crate::action::{
    fixed_point_search, shalom_search, EnergyOptions, FixedPointOptions, FixedPointResult, ShalomOptions,
    ShalomOutcome,
};
use crate::error::{Error, Result};
use crate::group::grigorchuk::{recursive_order, RecursiveOrder};
use crate::group::{ball, BallCache, Element, Group, Limits, Order, WordMetric};
use crate::measure::walk::walk_rng;
use crate::measure::{drift_series, verify_conv_comb_bound, ConvexCombinationSpec, DriftMode, DriftSeries};
use crate::space::conformance::{check_space, check_variance_inequality};
use crate::space::WeightedPointSet;

const DEFAULT_MAX_SUPPORT: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Drift,
    ConvComb,
    FixedPoint,
    Shalom,
    GrigorchukAudit,
    SpaceCheck,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Drift,
        Command::ConvComb,
        Command::FixedPoint,
        Command::Shalom,
        Command::GrigorchukAudit,
        Command::SpaceCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Drift => "drift",
            Command::ConvComb => "conv-comb",
            Command::FixedPoint => "fixed-point",
            Command::Shalom => "shalom",
            Command::GrigorchukAudit => "grigorchuk-audit",
            Command::SpaceCheck => "space-check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.replace('_', "-");
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

struct Outcome {
    status: RunStatus,
    payload: Value,
    warnings: Vec<String>,
    csv: Vec<(String, String)>,
}

/// Runs one command. The cache argument overrides `output.cache_dir` and the
/// environment.
pub fn run(command: Command, config: &ExperimentConfig, cache: Option<&BallCache>) -> Result<CommandOutput> {
    config.check_operation(command.name())?;
    let started = now_ms();
    // output locations do not affect results
    let hashed = ExperimentConfig {
        output: Default::default(),
        ..config.clone()
    };
    let config_hash = sha256_hex(&serde_json::to_vec(&hashed)?);
    let owned_cache = match (cache, &config.output.cache_dir) {
        (Some(_), _) => None,
        (None, Some(dir)) => Some(BallCache::new(dir)?),
        (None, None) => BallCache::from_env()?,
    };
    let cache = cache.or(owned_cache.as_ref());
    let out = match command {
        Command::Drift => cmd_drift(config),
        Command::ConvComb => cmd_conv_comb(config),
        Command::FixedPoint => cmd_fixed_point(config),
        Command::Shalom => cmd_shalom(config),
        Command::GrigorchukAudit => cmd_grigorchuk_audit(config, cache),
        Command::SpaceCheck => cmd_space_check(config),
    }?;
    Ok(CommandOutput {
        record: RunRecord::new(command.name(), config_hash, started, out.status, out.payload, out.warnings),
        csv: out.csv,
    })
}

fn limits(config: &ExperimentConfig) -> Limits {
    config.params.limits.unwrap_or_default()
}

fn n_max(config: &ExperimentConfig) -> Result<usize> {
    config
        .params
        .n_max
        .ok_or_else(|| Error::Schema("params.n_max is required".into()))
}

fn series_json(s: &DriftSeries) -> Value {
    let exact = |v: &Option<Vec<crate::measure::Weight>>, n: usize| v.as_ref().map(|xs| xs[n].to_string());
    let rows: Vec<Value> = s
        .rows()
        .map(|(n, l, lt, r, se)| {
            json!({
                "n": n,
                "ln": l,
                "ltilde": lt,
                "ln_over_n": r,
                "stderr": se,
                "ln_exact": exact(&s.ln_exact, n),
                "ltilde_exact": exact(&s.ltilde_exact, n),
            })
        })
        .collect();
    json!({
        "n_max": s.n_max,
        "mode": s.mode,
        "drift_estimate": s.drift_estimate,
        "drift_argmin": s.drift_argmin,
        "drift_stderr": s.drift_stderr(),
        "drift_estimate_exact": s.drift_estimate_exact.map(|w| w.to_string()),
        "last_ratio": s.last_ratio,
        "rows": rows,
    })
}

fn drift_warnings(s: &DriftSeries, label: &str, warnings: &mut Vec<String>) {
    warnings.push(format!(
        "{label}: drift estimated by min over n <= {} of L^n/n, an upper bound of the limit",
        s.n_max
    ));
    if let DriftMode::MonteCarlo { samples, seed } = s.mode {
        warnings.push(format!(
            "{label}: Monte Carlo over {samples} walks (seed {seed}), drift {} +/- {} (1 stderr)",
            s.drift_estimate,
            s.drift_stderr()
        ));
    }
}

/// `(n, Ln, Ltilde, Ln_over_n, stderr)` series and the drift estimate.
fn cmd_drift(config: &ExperimentConfig) -> Result<Outcome> {
    let group = config.group()?;
    let gens = config.generating_set()?;
    let mu = config.measure()?;
    let metric = WordMetric::new(group, &gens, limits(config));
    let s = drift_series(
        &mu,
        &metric,
        n_max(config)?,
        config.drift_mode()?,
        config.params.max_support.unwrap_or(DEFAULT_MAX_SUPPORT),
    )?;
    let mut warnings = Vec::new();
    drift_warnings(&s, "mu", &mut warnings);
    let mut payload = series_json(&s);
    payload["group"] = json!(group.name());
    payload["subadditive"] = json!(subadditivity_holds(&s));
    Ok(Outcome {
        status: RunStatus::Complete,
        payload,
        warnings,
        csv: vec![("drift.csv".into(), s.to_csv())],
    })
}

/// `L^{m+n} ≤ L^m + L^n` on the exact series, when present.
fn subadditivity_holds(s: &DriftSeries) -> Option<bool> {
    let ln = s.ln_exact.as_ref()?;
    let n = s.n_max;
    Some((1..=n).all(|a| (1..=n - a).all(|b| ln[a + b] <= ln[a] + ln[b])))
}

/// `l(ν) ≤ (1 + Σ n a_n) l(μ)` for `ν = Σ a_n μ^{*n}`.
fn cmd_conv_comb(config: &ExperimentConfig) -> Result<Outcome> {
    let group = config.group()?;
    let gens = config.generating_set()?;
    let mu = config.measure()?;
    let metric = WordMetric::new(group, &gens, limits(config));
    let spec = ConvexCombinationSpec::new(config.coefficients()?, config.params.renormalize);
    let r = verify_conv_comb_bound(
        &mu,
        &spec,
        &metric,
        n_max(config)?,
        config.drift_mode()?,
        config.params.max_support.unwrap_or(DEFAULT_MAX_SUPPORT),
    )?;
    let mut warnings = Vec::new();
    drift_warnings(&r.mu_series, "mu", &mut warnings);
    drift_warnings(&r.nu_series, "nu", &mut warnings);
    let c = &r.combination;
    if c.renormalized {
        warnings.push(format!(
            "coefficients renormalized from total mass {}",
            c.mass_before_renormalization
        ));
    }
    if !c.covers_ball {
        warnings.push(format!(
            "supp nu does not cover ball({}) minus the identity",
            c.truncation
        ));
    }
    let per_step = r.per_step.as_ref().map(|rows| {
        rows.iter()
            .map(|p| json!({"k": p.k, "lhs": p.lhs.to_string(), "rhs": p.rhs.to_string(), "holds": p.holds}))
            .collect::<Vec<_>>()
    });
    let payload = json!({
        "group": group.name(),
        "lhs": r.lhs,
        "rhs": r.rhs,
        "factor": r.factor,
        "factor_exact": c.factor.to_string(),
        "lhs_stderr": r.lhs_stderr,
        "rhs_stderr": r.rhs_stderr,
        "holds": r.holds,
        "estimates_ordered": r.estimates_ordered,
        "truncation": c.truncation,
        "coefficients": c.coefficients.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "renormalized": c.renormalized,
        "second_moment": c.second_moment.to_string(),
        "covers_ball": c.covers_ball,
        "per_step": per_step,
        "mu": series_json(&r.mu_series),
        "nu": series_json(&r.nu_series),
    });
    Ok(Outcome {
        status: if r.holds { RunStatus::Pass } else { RunStatus::Violation },
        payload,
        warnings,
        csv: vec![
            ("drift_mu.csv".into(), r.mu_series.to_csv()),
            ("drift_nu.csv".into(), r.nu_series.to_csv()),
        ],
    })
}

/// Energy descent plus orbit circumcenter; either a fixed point or a failure report.
fn cmd_fixed_point(config: &ExperimentConfig) -> Result<Outcome> {
    let action = config.action()?;
    let space = action.space();
    let gens = config.generating_set()?;
    let mu = config.measure()?;
    let start = config.start(space)?;
    let p = &config.params;
    let defaults = EnergyOptions::default();
    let opts = FixedPointOptions {
        tol: p.tol.unwrap_or(1e-6),
        energy: EnergyOptions {
            max_iter: p.max_iter.unwrap_or(defaults.max_iter),
            theta: p.theta.unwrap_or(defaults.theta),
            tol: p.tol.map_or(defaults.tol, |t| t * 1e-3),
            ..defaults
        },
        ..FixedPointOptions::default()
    };
    let result = fixed_point_search(&action, &mu, &gens, &start, &opts)?;
    let mut warnings = Vec::new();
    let (mut payload, run) = match &result {
        FixedPointResult::Found {
            point,
            displacement,
            method,
            run,
            notes,
        } => {
            warnings.extend(notes.iter().cloned());
            (
                json!({
                    "outcome": "found",
                    "point": space.point_to_json(point),
                    "displacement": displacement,
                    "method": method,
                }),
                run,
            )
        }
        FixedPointResult::Failure { failure, run } => {
            warnings.extend(failure.notes.iter().cloned());
            warnings.push("the displacement infimum is taken over evaluated points only".into());
            (
                json!({
                    "outcome": "failure",
                    "delta_infimum": failure.delta_infimum,
                    "energy_infimum": failure.energy_infimum,
                    "escape": failure.escape,
                    "orbit_diameter": failure.orbit_diameter,
                }),
                run,
            )
        }
    };
    payload["action"] = json!(format!("{} on {}", action.group().name(), space.name()));
    payload["energy_status"] = json!(run.status);
    payload["iterations"] = json!(run.iterations);
    payload["final_energy"] = json!(run.report.energy);
    payload["final_point"] = space.point_to_json(&run.map.basepoint);
    payload["lower_bound"] = json!(run.report.lower_bound);
    if p.record_trace {
        payload["trace"] = Value::Array(run.trace.iter().map(|x| space.point_to_json(x)).collect());
    }
    let energies: String = std::iter::once("k,energy\n".to_string())
        .chain(run.energies.iter().enumerate().map(|(k, e)| format!("{k},{e}\n")))
        .collect();
    Ok(Outcome {
        status: RunStatus::Complete,
        payload,
        warnings,
        csv: vec![("energies.csv".into(), energies)],
    })
}

/// Halving search for `n = 1..=n_max`, each started from the configured start.
fn cmd_shalom(config: &ExperimentConfig) -> Result<Outcome> {
    let action = config.action()?;
    let space = action.space();
    let gens = config.generating_set()?;
    let start = config.start(space)?;
    let p = &config.params;
    let d = ShalomOptions::default();
    let opts = ShalomOptions {
        starts: p.starts.unwrap_or(d.starts),
        ball_samples: p.ball_samples.unwrap_or(d.ball_samples),
        descent_iter: p.max_iter.unwrap_or(d.descent_iter),
        budget: p.budget.unwrap_or(d.budget),
        max_stages: p.max_stages.unwrap_or(d.max_stages),
        seed: p.seed,
        ray_cap: d.ray_cap,
    };
    let mut results = Vec::new();
    let mut violated = false;
    let mut checked = 0;
    let mut csv = String::from("n,r_n,delta_at_vn,bound,sampled_min_delta,sampled_floor\n");
    for n in 1..=n_max(config)? {
        let value = match shalom_search(&action, &gens, n, &start, &opts)? {
            ShalomOutcome::Certificate(c) => {
                checked += 1;
                let (bound, floor) = (c.r_n / n as f64, c.r_n / (2.0 * n as f64));
                violated |= !(c.bound_holds() && c.sampled_holds());
                csv.push_str(&format!(
                    "{n},{},{},{bound},{},{floor}\n",
                    c.r_n, c.delta_at_vn, c.sampled_min_delta_in_ball
                ));
                json!({
                    "n": n,
                    "outcome": "certificate",
                    "v_n": space.point_to_json(&c.v_n),
                    "r_n": c.r_n,
                    "delta_at_vn": c.delta_at_vn,
                    "bound": bound,
                    "bound_holds": c.bound_holds(),
                    "sampled_min_delta_in_ball": c.sampled_min_delta_in_ball,
                    "sampled_floor": floor,
                    "sampled_holds": c.sampled_holds(),
                    "samples": c.samples,
                    "stage": c.stage,
                })
            }
            ShalomOutcome::FixedPointFound { point, delta, stages } => json!({
                "n": n,
                "outcome": "fixed_point_found",
                "point": space.point_to_json(&point),
                "delta": delta,
                "stages": stages,
            }),
            ShalomOutcome::DeltaBoundedBelow { bound, point } => json!({
                "n": n,
                "outcome": "delta_bounded_below",
                "bound": bound,
                "point": space.point_to_json(&point),
            }),
            ShalomOutcome::Inconclusive {
                reason,
                best_delta,
                evaluations,
            } => json!({
                "n": n,
                "outcome": "inconclusive",
                "reason": reason,
                "best_delta": best_delta,
                "evaluations": evaluations,
            }),
        };
        results.push(value);
    }
    let mut warnings = Vec::new();
    if checked > 0 {
        warnings.push(format!(
            "ball lower bounds are checked on sampled points only ({} samples per ball)",
            opts.ball_samples
        ));
    }
    let status = if violated {
        RunStatus::Violation
    } else if checked == results.len() {
        RunStatus::Pass
    } else {
        RunStatus::Complete
    };
    Ok(Outcome {
        status,
        payload: json!({
            "action": format!("{} on {}", action.group().name(), space.name()),
            "results": results,
        }),
        warnings,
        csv: vec![("shalom.csv".into(), csv)],
    })
}

fn order_key(o: &Order) -> String {
    match o {
        Order::Finite(n) => n.to_string(),
        Order::ExceedsCap => "exceeds_cap".into(),
    }
}

/// Orders of every element of the ball plus random words, with the
/// recursive and iterated order computations compared on each.
fn cmd_grigorchuk_audit(config: &ExperimentConfig, cache: Option<&BallCache>) -> Result<Outcome> {
    let group = Group::Grigorchuk;
    if let Some(g) = &config.group {
        if *g != group {
            return Err(Error::Schema("grigorchuk-audit needs the grigorchuk group".into()));
        }
    }
    let p = &config.params;
    let radius = p.radius.unwrap_or(2);
    let cap = p.order_cap.unwrap_or(1 << 10);
    let gens = group.generators();
    let b = ball(&group, &gens, radius, &limits(config), cache)?;

    let mut histogram: BTreeMap<u64, usize> = BTreeMap::new();
    let mut over_cap = Vec::new();
    let mut agree = 0usize;
    let mut disagree = Vec::new();
    let mut undetermined = 0usize;
    let mut audit = |g: &Element, record_over: bool| -> Result<Order> {
        let Element::Grigorchuk(portrait) = g else {
            unreachable!("grigorchuk elements")
        };
        let iterated = group.iterated_order(g, cap);
        match recursive_order(portrait, cap) {
            RecursiveOrder::Undetermined => undetermined += 1,
            rec => {
                let rec = match rec {
                    RecursiveOrder::Finite(n) => Order::Finite(n),
                    _ => Order::ExceedsCap,
                };
                if rec == iterated {
                    agree += 1;
                } else {
                    disagree.push(json!({
                        "element": group.display(g),
                        "iterated": order_key(&iterated),
                        "recursive": order_key(&rec),
                    }));
                }
            }
        }
        match iterated {
            Order::Finite(n) => *histogram.entry(n).or_default() += 1,
            Order::ExceedsCap if record_over => over_cap.push(group.display(g)),
            Order::ExceedsCap => {}
        }
        Ok(iterated)
    };
    let mut ball_over = 0usize;
    for g in b.elements.keys() {
        if audit(g, true)? == Order::ExceedsCap {
            ball_over += 1;
        }
    }
    let count = p.random_elements.unwrap_or(0);
    let len = p.random_word_length.unwrap_or(radius.max(1) * 4);
    let mut rng = walk_rng(p.seed, 0x9819);
    let letters = ['a', 'b', 'c', 'd'];
    let mut random_over = 0usize;
    for _ in 0..count {
        let word: String = (0..len).map(|_| letters[rng.gen_range(0..4)]).collect();
        let g = group.parse_word(&word)?;
        if audit(&g, false)? == Order::ExceedsCap {
            random_over += 1;
        }
    }

    let relations: Vec<(&str, bool)> = ["aa", "bb", "cc", "dd", "bcd"]
        .into_iter()
        .map(|w| Ok((w, group.is_identity(&group.parse_word(w)?))))
        .collect::<Result<_>>()?;
    let relations_pass = relations.iter().all(|(_, ok)| *ok);
    let all_powers_of_two = histogram.keys().all(|n| n.is_power_of_two());
    let max_order = histogram.keys().max().copied().unwrap_or(1);

    let mut warnings = Vec::new();
    if ball_over + random_over > 0 {
        warnings.push(format!(
            "{} elements have order above the cap {cap}; their orders are unknown",
            ball_over + random_over
        ));
    }
    if undetermined > 0 {
        warnings.push(format!(
            "{undetermined} recursive order computations were undetermined; only iterated orders were used"
        ));
    }
    if count > 0 {
        warnings.push(format!("{count} random words of length {len} were sampled (seed {})", p.seed));
    }
    let status = if !relations_pass || !all_powers_of_two || !disagree.is_empty() {
        RunStatus::Violation
    } else if ball_over + random_over > 0 {
        RunStatus::Complete
    } else {
        RunStatus::Pass
    };
    let csv: String = std::iter::once("order,count\n".to_string())
        .chain(histogram.iter().map(|(o, c)| format!("{o},{c}\n")))
        .collect();
    Ok(Outcome {
        status,
        payload: json!({
            "radius": radius,
            "order_cap": cap,
            "element_count": b.len(),
            "sphere_sizes": b.sphere_sizes(),
            "order_histogram": histogram.iter().map(|(o, c)| (o.to_string(), *c)).collect::<BTreeMap<_, _>>(),
            "exceeds_cap": over_cap,
            "random_elements": count,
            "random_exceeds_cap": random_over,
            "max_order": max_order,
            "all_orders_powers_of_two": all_powers_of_two,
            "strategies_agree": agree,
            "strategies_disagree": disagree,
            "strategies_undetermined": undetermined,
            "relations": relations.iter().map(|(w, ok)| (w.to_string(), *ok)).collect::<BTreeMap<_, _>>(),
            "relations_pass": relations_pass,
        }),
        warnings,
        csv: vec![("orders.csv".into(), csv)],
    })
}

/// Metric axioms and CN inequality on random triples, plus the variance
/// inequality on a few random weighted point sets.
fn cmd_space_check(config: &ExperimentConfig) -> Result<Outcome> {
    let space = config.space()?;
    let p = &config.params;
    let tol = p.tol.unwrap_or(1e-9);
    let scale = p.scale.unwrap_or(2.0);
    let triples = p.triples.unwrap_or(10_000);
    let report = check_space(&space, triples, scale, p.seed, tol)?;
    let mut variance = Vec::new();
    let mut rng = walk_rng(p.seed, 0xba7);
    for k in 0..4u64 {
        let pts: Vec<_> = (0..5).map(|_| space.sample_point(&mut rng, scale)).collect();
        let ws: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = ws.iter().sum();
        let set = WeightedPointSet::new(pts, ws.iter().map(|w| w / total).collect())?;
        let samples = p.samples.unwrap_or(1000);
        variance.push(check_variance_inequality(&space, &set, samples, scale, p.seed + k, 1e-7)?);
    }
    let pass = report.pass && variance.iter().all(|v| v.pass);
    Ok(Outcome {
        status: if pass { RunStatus::Pass } else { RunStatus::Violation },
        payload: json!({
            "conformance": report,
            "variance": variance,
        }),
        warnings: vec![format!(
            "all checks are sampled: {triples} triples, scale {scale}, seed {}",
            p.seed
        )],
        csv: Vec::new(),
    })
}

