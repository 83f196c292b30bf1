//! Subcommand implementations. Each returns the process exit code or an
//! error; [`exit_code`] maps errors to codes.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use ne_core::nash::{self, Constraint, NEWitness, Threshold};
use ne_core::suspect::build_arena;
use ne_core::testgen::{self, Cnf, GenClass, GenParams, PreorderKind, Qbf};
use ne_core::{ConcurrentGame, Error, PayoffVector, StateId, StateSet, Value};
use serde_json::{json, Map, Value as Json};

use crate::format::{parse_game, print_game};

/// Exit code for decided instances.
pub const EXIT_OK: i32 = 0;
/// Exit code when a witness is rejected by `verify`.
pub const EXIT_REJECTED: i32 = 1;
/// Exit code for malformed input.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for instances beyond a class guard.
pub const EXIT_GUARD: i32 = 3;

/// Worker count environment variable.
pub const WORKERS_ENV: &str = "NEGAME_WORKERS";

pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(Error::GuardExceeded(_)) => EXIT_GUARD,
        _ => EXIT_INPUT,
    }
}

/// Applies the worker count from the environment, if set.
pub fn configure_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{WORKERS_ENV} must be a positive integer"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be a positive integer");
        }
        nash::set_workers(n);
    }
    Ok(())
}

pub fn read_game(path: &Path) -> anyhow::Result<ConcurrentGame> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_game(&text).map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))
}

fn read_json(path: &Path) -> anyhow::Result<Json> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing JSON in {}", path.display()))
}

fn state_arg(game: &ConcurrentGame, name: Option<&str>) -> anyhow::Result<StateId> {
    match name {
        None => Ok(0),
        Some(n) => game.state_id(n).ok_or_else(|| Error::UnknownState(n.to_string()).into()),
    }
}

fn agent_arg(game: &ConcurrentGame, name: &str) -> anyhow::Result<usize> {
    game.agent_id(name).ok_or_else(|| Error::UnknownAgent(name.to_string()).into())
}

fn state_names(game: &ConcurrentGame, xs: &Json, field: &str) -> anyhow::Result<StateSet> {
    let arr = xs.as_array().ok_or_else(|| anyhow!("field `{field}` must be a list of state names"))?;
    arr.iter()
        .map(|x| {
            let n = x.as_str().ok_or_else(|| anyhow!("field `{field}` must contain state names"))?;
            game.state_id(n).ok_or_else(|| Error::UnknownState(n.to_string()).into())
        })
        .collect()
}

/// A threshold document: `{"payoff": "101"}` or
/// `{"occ": [states], "inf": [states]}`.
pub fn threshold_from_json(game: &ConcurrentGame, j: &Json) -> anyhow::Result<Threshold> {
    let obj = j.as_object().ok_or_else(|| anyhow!("threshold must be an object"))?;
    if let Some(p) = obj.get("payoff") {
        let bits = p.as_str().ok_or_else(|| anyhow!("field `payoff` must be a bit string"))?;
        return Ok(Threshold::Payoff(PayoffVector::parse(bits)?));
    }
    match (obj.get("occ"), obj.get("inf")) {
        (Some(o), Some(i)) => Ok(Threshold::Play { occ: state_names(game, o, "occ")?, inf: state_names(game, i, "inf")? }),
        _ => bail!("threshold needs `payoff`, or both `occ` and `inf`"),
    }
}

/// A bounds document: `{"lower": {agent: threshold}, "upper": {...}}`.
pub fn constraint_from_json(game: &ConcurrentGame, j: &Json) -> anyhow::Result<Constraint> {
    let obj = j.as_object().ok_or_else(|| anyhow!("bounds must be an object"))?;
    let mut c = Constraint::none();
    for key in obj.keys() {
        if key != "lower" && key != "upper" {
            bail!("unknown bounds field `{key}` (expected `lower` or `upper`)");
        }
    }
    for (field, lower) in [("lower", true), ("upper", false)] {
        let Some(m) = obj.get(field) else { continue };
        let m = m.as_object().ok_or_else(|| anyhow!("field `{field}` must map agent names to thresholds"))?;
        for (agent, t) in m {
            let a = agent_arg(game, agent)?;
            let t = threshold_from_json(game, t).with_context(|| format!("{field} bound of {agent}"))?;
            c = if lower { c.with_lower(a, t) } else { c.with_upper(a, t) };
        }
    }
    nash::resolve_constraint(game, &c)?;
    Ok(c)
}

fn value_json(v: &Value) -> Json {
    Json::String(v.to_string())
}

fn names_of(game: &ConcurrentGame, xs: impl IntoIterator<Item = StateId>) -> Json {
    Json::Array(xs.into_iter().map(|s| Json::String(game.state_names[s].clone())).collect())
}

/// The report printed by `ne` and `cne`.
pub fn ne_report(game: &ConcurrentGame, w: &Option<NEWitness>) -> anyhow::Result<Json> {
    let mut doc = Map::new();
    doc.insert("verdict".into(), json!(if w.is_some() { "YES" } else { "NO" }));
    if let Some(w) = w {
        let payoffs: Map<String, Json> =
            game.agent_names.iter().cloned().zip(w.payoffs.iter().map(value_json)).collect();
        doc.insert("payoffs".into(), Json::Object(payoffs));
        doc.insert(
            "lasso".into(),
            json!({
                "prefix": names_of(game, w.prefix.iter().map(|s| s.state)),
                "cycle": names_of(game, w.cycle.iter().map(|s| s.state)),
            }),
        );
        doc.insert("witness".into(), serde_json::to_value(w)?);
    }
    Ok(Json::Object(doc))
}

/// Writes to standard output. A closed pipe is not an error: the reader
/// simply stopped listening.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("writing to standard output"),
        _ => Ok(()),
    }
}

fn print_json(j: &Json) -> anyhow::Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(j)?))
}

pub fn cmd_value(
    game: &Path,
    agent: &str,
    threshold: Option<&Path>,
    payoff: Option<&str>,
    from: Option<&str>,
) -> anyhow::Result<i32> {
    let g = read_game(game)?;
    let a = agent_arg(&g, agent)?;
    let s = state_arg(&g, from)?;
    let t = match (threshold, payoff) {
        (Some(p), None) => threshold_from_json(&g, &read_json(p)?)?,
        (None, Some(bits)) => Threshold::Payoff(PayoffVector::parse(bits)?),
        _ => bail!("give exactly one of --threshold and --payoff"),
    };
    let class = nash::resolve_threshold(&g, a, &t)?;
    let v = nash::value(&g, s, a, &t)?;
    print_json(&json!({
        "verdict": if v { "YES" } else { "NO" },
        "agent": agent,
        "from": g.state_names[s],
        "threshold": class.to_string(),
    }))?;
    Ok(EXIT_OK)
}

pub fn cmd_ne(game: &Path, bounds: Option<&Path>, from: Option<&str>) -> anyhow::Result<i32> {
    let g = read_game(game)?;
    let s = state_arg(&g, from)?;
    let c = match bounds {
        Some(p) => constraint_from_json(&g, &read_json(p)?)?,
        None => Constraint::none(),
    };
    let w = nash::ne_constrained(&g, s, &c)?;
    print_json(&ne_report(&g, &w)?)?;
    Ok(EXIT_OK)
}

pub fn cmd_suspect(game: &Path, dot: Option<&Path>, from: Option<&str>) -> anyhow::Result<i32> {
    let g = read_game(game)?;
    let s = state_arg(&g, from)?;
    let a = build_arena(&g, s)?;
    let text = a.to_dot(&g);
    match dot {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&text)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(game: &Path, witness: &Path, bounds: Option<&Path>) -> anyhow::Result<i32> {
    let g = read_game(game)?;
    let doc = read_json(witness)?;
    let w_json = doc.get("witness").cloned().unwrap_or(doc);
    let w: NEWitness = serde_json::from_value(w_json).context("witness document does not match the witness format")?;
    let c = match bounds {
        Some(p) => constraint_from_json(&g, &read_json(p)?)?,
        None => Constraint::none(),
    };
    let ok = w.from < g.num_states() && nash::verify_witness(&g, w.from, &c, &w).unwrap_or(false);
    print_json(&json!({ "valid": ok }))?;
    Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
}

/// Parameters of `gen`.
pub struct GenArgs<'a> {
    pub family: &'a str,
    pub cnf: Option<&'a Path>,
    pub seed: u64,
    pub class: &'a str,
    pub states: usize,
    pub agents: usize,
    pub actions: usize,
    pub targets: usize,
    pub out: Option<&'a Path>,
}

pub fn parse_class(name: &str) -> anyhow::Result<GenClass> {
    let pre = |p: &str| -> anyhow::Result<PreorderKind> {
        Ok(match p {
            "conjunction" => PreorderKind::Conjunction,
            "disjunction" => PreorderKind::Disjunction,
            "counting" => PreorderKind::Counting,
            "subset" => PreorderKind::Subset,
            "maximise" => PreorderKind::Maximise,
            "lexicographic" => PreorderKind::Lexicographic,
            other => bail!("unknown preorder `{other}`"),
        })
    };
    Ok(match name {
        "reach" => GenClass::Reach,
        "safety" => GenClass::Safety,
        "buchi" => GenClass::Buchi,
        "cobuchi" => GenClass::CoBuchi,
        "parity" => GenClass::Parity,
        "rabin" => GenClass::Rabin,
        "streett" => GenClass::Streett,
        "muller" => GenClass::Muller,
        "circuit" => GenClass::Circuit,
        "det-buchi" => GenClass::DetBuchiAut,
        "det-rabin" => GenClass::DetRabinAut,
        n => {
            if let Some(p) = n.strip_prefix("ordered-buchi-") {
                GenClass::OrderedBuchi(pre(p)?)
            } else if let Some(p) = n.strip_prefix("ordered-reach-") {
                GenClass::OrderedReach(pre(p)?)
            } else {
                bail!("unknown class `{n}`")
            }
        }
    })
}

pub fn generate(args: &GenArgs) -> anyhow::Result<ConcurrentGame> {
    let formula_text = || -> anyhow::Result<String> {
        let p = args.cnf.ok_or_else(|| anyhow!("`gen {}` needs --cnf FILE", args.family))?;
        fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
    };
    Ok(match args.family {
        "sat" => testgen::gen_sat_reach(&Cnf::parse_dimacs(&formula_text()?)?)?,
        "cobuchi" => testgen::gen_cobuchi_sat(&Cnf::parse_dimacs(&formula_text()?)?)?,
        "counting" => testgen::gen_counting_buchi(&Cnf::parse_dimacs(&formula_text()?)?)?,
        "qsat" => testgen::gen_qsat_reach(&Qbf::parse_qdimacs(&formula_text()?)?)?,
        "random" => {
            if args.states == 0 || args.agents == 0 || args.actions == 0 || args.targets == 0 {
                bail!("--states, --agents, --actions and --targets must be positive");
            }
            let params = GenParams {
                class: parse_class(args.class)?,
                states: args.states,
                agents: args.agents,
                actions: args.actions,
                targets: args.targets,
            };
            testgen::random_game(args.seed, &params)
        }
        other => bail!("unknown family `{other}` (expected sat, cobuchi, qsat, counting or random)"),
    })
}

pub fn cmd_gen(args: &GenArgs) -> anyhow::Result<i32> {
    let g = generate(args)?;
    let text = print_game(&g);
    match args.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&text)?,
    }
    Ok(EXIT_OK)
}
