//! The game file format.
//!
//! A game file is a line-oriented text document. `#` starts a comment.
//! Header lines declare the names, in order:
//!
//! ```text
//! states l0 l1 l2
//! agents A1 A2
//! actions a b
//! ```
//!
//! The `allow` and `tab` sections list one entry per indented line:
//!
//! ```text
//! allow
//!   l0 A1 a b          # state, agent, allowed actions
//! tab
//!   l0 a b l1          # state, one action per agent, successor
//! ```
//!
//! Each agent gets one `pref <agent> <kind> ...` line, possibly followed
//! by indented parameter lines:
//!
//! ```text
//! pref A1 reach l1 l2          # also safety, buchi, cobuchi
//! pref A1 parity 0 1 2         # one priority per state
//! pref A1 rabin                # also streett
//!   pair l1 | l2               # Q states | R states
//! pref A1 muller
//!   colors 0 1 1               # one colour per state
//!   accept 0 1                 # one accepted colour set per line
//! pref A1 circuit              # circuit text format, inputs are states
//!   g0 := INPUT 1
//!   OUTPUT g0
//! pref A1 det-buchi 2 0        # automaton states, initial state
//!   delta 0 1 0                # successor of q on each game state
//!   delta 1 1 0
//!   repeat 1
//! pref A1 det-rabin 2 0
//!   delta ...
//!   pair 1 | 0                 # E | F automaton states
//! pref A1 ordered-buchi subset # also ordered-reach; preorders:
//!   target l1                  # conjunction disjunction counting subset
//!   target l2                  # maximise lexicographic circuit
//!                              # monotone-circuit (then circuit lines)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use ne_core::objectives::{AutAcceptance, DetAutomaton};
use ne_core::{BoolCircuit, ConcurrentGame, Error, Objective, Preference, Preorder, Result, StateSet};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// A logical line: its number, its tokens, and whether it was indented.
struct Line<'a> {
    no: usize,
    indented: bool,
    text: &'a str,
    toks: Vec<&'a str>,
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let t = body.trim();
            if t.is_empty() {
                return None;
            }
            Some(Line {
                no: i + 1,
                indented: body.starts_with(' ') || body.starts_with('\t'),
                text: t,
                toks: t.split_whitespace().collect(),
            })
        })
        .collect()
}

struct Names<'a> {
    states: &'a [String],
    agents: &'a [String],
    actions: &'a [String],
}

fn lookup(names: &[String], what: &str, tok: &str, line: usize) -> Result<usize> {
    names.iter().position(|n| n == tok).ok_or_else(|| perr(line, format!("unknown {what} `{tok}`")))
}

impl Names<'_> {
    fn state(&self, t: &str, l: usize) -> Result<usize> {
        lookup(self.states, "state", t, l)
    }
    fn agent(&self, t: &str, l: usize) -> Result<usize> {
        lookup(self.agents, "agent", t, l)
    }
    fn action(&self, t: &str, l: usize) -> Result<usize> {
        lookup(self.actions, "action", t, l)
    }
    fn states_of(&self, toks: &[&str], l: usize) -> Result<StateSet> {
        toks.iter().map(|t| self.state(t, l)).collect()
    }
}

fn int(t: &str, line: usize) -> Result<usize> {
    t.parse().map_err(|_| perr(line, format!("expected a number, found `{t}`")))
}

fn ints(toks: &[&str], line: usize) -> Result<Vec<usize>> {
    toks.iter().map(|t| int(t, line)).collect()
}

/// Splits `a b | c d` into the two halves.
fn pair<'a>(toks: &'a [&'a str], line: usize) -> Result<(&'a [&'a str], &'a [&'a str])> {
    let bar = toks.iter().position(|&t| t == "|").ok_or_else(|| perr(line, "expected `|` in pair"))?;
    Ok((&toks[..bar], &toks[bar + 1..]))
}

fn check_unique(names: &[String], what: &str, line: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(perr(line, format!("duplicate {what} name `{n}`")));
        }
    }
    Ok(())
}

/// Parses a game file.
pub fn parse_game(text: &str) -> Result<ConcurrentGame> {
    let ls = lines(text);
    let mut states: Option<Vec<String>> = None;
    let mut agents: Option<Vec<String>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut i = 0;
    // header
    while i < ls.len() && matches!(ls[i].toks[0], "states" | "agents" | "actions") && !ls[i].indented {
        let l = &ls[i];
        let v: Vec<String> = l.toks[1..].iter().map(|s| s.to_string()).collect();
        check_unique(&v, l.toks[0], l.no)?;
        let slot = match l.toks[0] {
            "states" => &mut states,
            "agents" => &mut agents,
            _ => &mut actions,
        };
        if v.is_empty() {
            return Err(perr(l.no, format!("a game needs at least one {}", &l.toks[0][..l.toks[0].len() - 1])));
        }
        if slot.replace(v).is_some() {
            return Err(perr(l.no, format!("`{}` declared twice", l.toks[0])));
        }
        i += 1;
    }
    let end = ls.last().map_or(1, |l| l.no);
    let states = states.ok_or_else(|| perr(end, "missing `states` line"))?;
    let agents = agents.ok_or_else(|| perr(end, "missing `agents` line"))?;
    let actions = actions.ok_or_else(|| perr(end, "missing `actions` line"))?;
    let names = Names { states: &states, agents: &agents, actions: &actions };
    let (ns, na) = (states.len(), agents.len());
    let mut allow: Vec<Vec<Option<Vec<usize>>>> = vec![vec![None; na]; ns];
    let mut tab: Vec<BTreeMap<Vec<usize>, usize>> = vec![BTreeMap::new(); ns];
    let mut prefs: Vec<Option<Preference>> = vec![None; na];
    while i < ls.len() {
        let l = &ls[i];
        if l.indented {
            return Err(perr(l.no, "indented line outside a section"));
        }
        match l.toks[0] {
            "allow" | "tab" => {
                if l.toks.len() != 1 {
                    return Err(perr(l.no, format!("`{}` takes no arguments", l.toks[0])));
                }
                let is_allow = l.toks[0] == "allow";
                i += 1;
                while i < ls.len() && ls[i].indented {
                    let e = &ls[i];
                    if is_allow {
                        if e.toks.len() < 3 {
                            return Err(perr(e.no, "expected `<state> <agent> <action>...`"));
                        }
                        let s = names.state(e.toks[0], e.no)?;
                        let a = names.agent(e.toks[1], e.no)?;
                        let mut acts = e.toks[2..].iter().map(|t| names.action(t, e.no)).collect::<Result<Vec<_>>>()?;
                        acts.sort_unstable();
                        acts.dedup();
                        if allow[s][a].replace(acts).is_some() {
                            return Err(perr(e.no, format!("allow for ({}, {}) given twice", e.toks[0], e.toks[1])));
                        }
                    } else {
                        if e.toks.len() != na + 2 {
                            return Err(perr(e.no, format!("expected a state, {na} actions and a successor")));
                        }
                        let s = names.state(e.toks[0], e.no)?;
                        let m = e.toks[1..=na].iter().map(|t| names.action(t, e.no)).collect::<Result<Vec<_>>>()?;
                        let t = names.state(e.toks[na + 1], e.no)?;
                        if tab[s].insert(m, t).is_some() {
                            return Err(perr(e.no, "duplicate table entry"));
                        }
                    }
                    i += 1;
                }
            }
            "pref" => {
                if l.toks.len() < 3 {
                    return Err(perr(l.no, "expected `pref <agent> <kind> ...`"));
                }
                let a = names.agent(l.toks[1], l.no)?;
                let start = i + 1;
                i += 1;
                while i < ls.len() && ls[i].indented {
                    i += 1;
                }
                let p = parse_pref(l, &ls[start..i], &names)?;
                if prefs[a].replace(p).is_some() {
                    return Err(perr(l.no, format!("second preference for agent `{}`", l.toks[1])));
                }
            }
            other => return Err(perr(l.no, format!("unknown section `{other}`"))),
        }
    }
    let mut allow_out = vec![vec![Vec::new(); na]; ns];
    for s in 0..ns {
        for a in 0..na {
            allow_out[s][a] = allow[s][a]
                .take()
                .ok_or_else(|| perr(end, format!("no allow entry for state `{}` and agent `{}`", states[s], agents[a])))?;
        }
    }
    let prefs = prefs
        .into_iter()
        .enumerate()
        .map(|(a, p)| p.ok_or_else(|| perr(end, format!("no preference for agent `{}`", agents[a]))))
        .collect::<Result<Vec<_>>>()?;
    let g = ConcurrentGame { state_names: states, agent_names: agents, action_names: actions, allow: allow_out, tab, prefs };
    let v = ne_core::game::validate_game(&g);
    if v.is_empty() {
        Ok(g)
    } else {
        Err(Error::InvalidGame(v))
    }
}

fn circuit_of(body: &[Line], inputs: usize, head: usize) -> Result<BoolCircuit> {
    // pad skipped lines so that parse errors report file line numbers
    let first = body.first().map_or(head + 1, |l| l.no);
    let last = body.last().map_or(first, |l| l.no);
    let mut rows = vec![""; last - first + 1];
    for l in body {
        rows[l.no - first] = l.text;
    }
    BoolCircuit::parse(&rows.join("\n"), inputs, first)
}

fn parse_preorder(toks: &[&str], body: &[Line], head: &Line, arity: usize) -> Result<Preorder> {
    let name = *toks.first().ok_or_else(|| perr(head.no, "missing preorder name"))?;
    Ok(match name {
        "conjunction" => Preorder::Conjunction,
        "disjunction" => Preorder::Disjunction,
        "counting" => Preorder::Counting,
        "subset" => Preorder::Subset,
        "maximise" => Preorder::Maximise,
        "lexicographic" => Preorder::Lexicographic,
        "circuit" | "monotone-circuit" => {
            let c = circuit_of(body, 2 * arity, head.no)?;
            if name == "circuit" {
                Preorder::Circuit(c)
            } else {
                Preorder::MonotoneCircuit(c)
            }
        }
        other => return Err(perr(head.no, format!("unknown preorder `{other}`"))),
    })
}

fn no_body(head: &Line, body: &[Line]) -> Result<()> {
    match body.first() {
        Some(l) => Err(perr(l.no, format!("`{}` preferences take no indented lines", head.toks[2]))),
        None => Ok(()),
    }
}

fn parse_pref(head: &Line, body: &[Line], names: &Names) -> Result<Preference> {
    let kind = head.toks[2];
    let args = &head.toks[3..];
    let ns = names.states.len();
    let single = |o: Objective| Ok(Preference::Single(o));
    match kind {
        "reach" | "safety" | "buchi" | "cobuchi" => {
            no_body(head, body)?;
            let t = names.states_of(args, head.no)?;
            single(match kind {
                "reach" => Objective::Reach(t),
                "safety" => Objective::Safety(t),
                "buchi" => Objective::Buchi(t),
                _ => Objective::CoBuchi(t),
            })
        }
        "parity" => {
            no_body(head, body)?;
            let p = ints(args, head.no)?;
            if p.len() != ns {
                return Err(perr(head.no, format!("parity needs {ns} priorities, found {}", p.len())));
            }
            single(Objective::Parity(p))
        }
        "rabin" | "streett" => {
            let mut pairs = Vec::new();
            for l in body {
                if l.toks[0] != "pair" {
                    return Err(perr(l.no, "expected `pair <states> | <states>`"));
                }
                let (q, r) = pair(&l.toks[1..], l.no)?;
                pairs.push((names.states_of(q, l.no)?, names.states_of(r, l.no)?));
            }
            single(if kind == "rabin" { Objective::Rabin(pairs) } else { Objective::Streett(pairs) })
        }
        "muller" => {
            let mut colors = None;
            let mut accepting = Vec::new();
            for l in body {
                match l.toks[0] {
                    "colors" => colors = Some(ints(&l.toks[1..], l.no)?),
                    "accept" => accepting.push(ints(&l.toks[1..], l.no)?.into_iter().collect::<BTreeSet<_>>()),
                    _ => return Err(perr(l.no, "expected `colors` or `accept`")),
                }
            }
            let colors = colors.ok_or_else(|| perr(head.no, "muller preference without `colors` line"))?;
            single(Objective::Muller { colors, accepting })
        }
        "circuit" => single(Objective::Circuit(circuit_of(body, ns, head.no)?)),
        "det-buchi" | "det-rabin" => {
            if args.len() != 2 {
                return Err(perr(head.no, "expected `<automaton states> <initial state>`"));
            }
            let nq = int(args[0], head.no)?;
            let init = int(args[1], head.no)?;
            let mut delta = vec![None; nq];
            let mut repeat = BTreeSet::new();
            let mut pairs = Vec::new();
            for l in body {
                match l.toks[0] {
                    "delta" => {
                        let v = ints(&l.toks[1..], l.no)?;
                        let q = *v.first().ok_or_else(|| perr(l.no, "expected `delta <q> <successors>`"))?;
                        if q >= nq {
                            return Err(perr(l.no, format!("automaton state {q} out of range")));
                        }
                        delta[q] = Some(v[1..].to_vec());
                    }
                    "repeat" if kind == "det-buchi" => repeat = ints(&l.toks[1..], l.no)?.into_iter().collect(),
                    "pair" if kind == "det-rabin" => {
                        let (e, f) = pair(&l.toks[1..], l.no)?;
                        pairs.push((ints(e, l.no)?.into_iter().collect(), ints(f, l.no)?.into_iter().collect()));
                    }
                    other => return Err(perr(l.no, format!("unexpected `{other}` in automaton"))),
                }
            }
            let delta = delta
                .into_iter()
                .enumerate()
                .map(|(q, d)| d.ok_or_else(|| perr(head.no, format!("missing `delta {q}` line"))))
                .collect::<Result<Vec<_>>>()?;
            let acceptance = if kind == "det-buchi" { AutAcceptance::Buchi(repeat) } else { AutAcceptance::Rabin(pairs) };
            let aut = DetAutomaton { num_states: nq, delta, init, acceptance };
            single(if kind == "det-buchi" { Objective::DetBuchiAut(aut) } else { Objective::DetRabinAut(aut) })
        }
        "ordered-buchi" | "ordered-reach" => {
            let split = body.iter().position(|l| l.toks[0] != "target").unwrap_or(body.len());
            let targets = body[..split]
                .iter()
                .map(|l| names.states_of(&l.toks[1..], l.no))
                .collect::<Result<Vec<_>>>()?;
            let preorder = parse_preorder(args, &body[split..], head, targets.len())?;
            if !matches!(preorder, Preorder::Circuit(_) | Preorder::MonotoneCircuit(_)) && split < body.len() {
                return Err(perr(body[split].no, "expected `target <states>`"));
            }
            Ok(if kind == "ordered-buchi" {
                Preference::OrderedBuchi { targets, preorder }
            } else {
                Preference::OrderedReach { targets, preorder }
            })
        }
        other => Err(perr(head.no, format!("unknown preference kind `{other}`"))),
    }
}

fn join_states(g: &ConcurrentGame, t: &StateSet) -> String {
    t.iter().map(|&s| g.state_names[s].as_str()).collect::<Vec<_>>().join(" ")
}

fn with_args(head: String, args: &str) -> String {
    if args.is_empty() {
        head
    } else {
        format!("{head} {args}")
    }
}

fn nums<'a>(v: impl IntoIterator<Item = &'a usize>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn indent_circuit(out: &mut String, c: &BoolCircuit) {
    for l in c.to_text().lines() {
        let _ = writeln!(out, "  {l}");
    }
}

fn print_pref(out: &mut String, g: &ConcurrentGame, agent: &str, p: &Preference) {
    let head = format!("pref {agent}");
    match p {
        Preference::Single(o) => match o {
            Objective::Reach(t) => { let _ = writeln!(out, "{}", with_args(format!("{head} reach"), &join_states(g, t))); }
            Objective::Safety(t) => { let _ = writeln!(out, "{}", with_args(format!("{head} safety"), &join_states(g, t))); }
            Objective::Buchi(t) => { let _ = writeln!(out, "{}", with_args(format!("{head} buchi"), &join_states(g, t))); }
            Objective::CoBuchi(t) => { let _ = writeln!(out, "{}", with_args(format!("{head} cobuchi"), &join_states(g, t))); }
            Objective::Parity(p) => { let _ = writeln!(out, "{head} parity {}", nums(p)); }
            Objective::Rabin(pairs) | Objective::Streett(pairs) => {
                let kind = if matches!(o, Objective::Rabin(_)) { "rabin" } else { "streett" };
                let _ = writeln!(out, "{head} {kind}");
                for (q, r) in pairs {
                    let _ = writeln!(out, "  {}", with_args(with_args("pair".into(), &join_states(g, q)) + " |", &join_states(g, r)));
                }
            }
            Objective::Muller { colors, accepting } => {
                let _ = writeln!(out, "{head} muller");
                let _ = writeln!(out, "  colors {}", nums(colors));
                for f in accepting {
                    let _ = writeln!(out, "  {}", with_args("accept".into(), &nums(f)));
                }
            }
            Objective::Circuit(c) => {
                let _ = writeln!(out, "{head} circuit");
                indent_circuit(out, c);
            }
            Objective::DetBuchiAut(a) | Objective::DetRabinAut(a) => {
                let kind = if matches!(o, Objective::DetBuchiAut(_)) { "det-buchi" } else { "det-rabin" };
                let _ = writeln!(out, "{head} {kind} {} {}", a.num_states, a.init);
                for (q, row) in a.delta.iter().enumerate() {
                    let _ = writeln!(out, "  {}", with_args(format!("delta {q}"), &nums(row)));
                }
                match &a.acceptance {
                    AutAcceptance::Buchi(r) => { let _ = writeln!(out, "  {}", with_args("repeat".into(), &nums(r))); }
                    AutAcceptance::Rabin(pairs) => {
                        for (e, f) in pairs {
                            let _ = writeln!(out, "  {}", with_args(with_args("pair".into(), &nums(e)) + " |", &nums(f)));
                        }
                    }
                }
            }
        },
        Preference::OrderedBuchi { targets, preorder } | Preference::OrderedReach { targets, preorder } => {
            let kind = if matches!(p, Preference::OrderedBuchi { .. }) { "ordered-buchi" } else { "ordered-reach" };
            let name = match preorder {
                Preorder::Conjunction => "conjunction",
                Preorder::Disjunction => "disjunction",
                Preorder::Counting => "counting",
                Preorder::Subset => "subset",
                Preorder::Maximise => "maximise",
                Preorder::Lexicographic => "lexicographic",
                Preorder::Circuit(_) => "circuit",
                Preorder::MonotoneCircuit(_) => "monotone-circuit",
            };
            let _ = writeln!(out, "{head} {kind} {name}");
            for t in targets {
                let _ = writeln!(out, "  {}", with_args("target".into(), &join_states(g, t)));
            }
            if let Preorder::Circuit(c) | Preorder::MonotoneCircuit(c) = preorder {
                indent_circuit(out, c);
            }
        }
    }
}

/// Renders a game in the file format; `parse_game` inverts it exactly.
pub fn print_game(g: &ConcurrentGame) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", g.state_names.join(" "));
    let _ = writeln!(out, "agents {}", g.agent_names.join(" "));
    let _ = writeln!(out, "actions {}", g.action_names.join(" "));
    out.push_str("allow\n");
    for s in 0..g.num_states() {
        for a in 0..g.num_agents() {
            let acts: Vec<&str> = g.allow[s][a].iter().map(|&x| g.action_names[x].as_str()).collect();
            let _ = writeln!(out, "  {} {} {}", g.state_names[s], g.agent_names[a], acts.join(" "));
        }
    }
    out.push_str("tab\n");
    for s in 0..g.num_states() {
        for (m, &t) in &g.tab[s] {
            let acts: Vec<&str> = m.iter().map(|&x| g.action_names[x].as_str()).collect();
            let _ = writeln!(out, "  {} {} {}", g.state_names[s], acts.join(" "), g.state_names[t]);
        }
    }
    for (a, p) in g.prefs.iter().enumerate() {
        print_pref(&mut out, g, &g.agent_names[a], p);
    }
    out
}
