//! Decision procedures: the value problem, NE existence and constrained
//! NE existence, one procedure per preference class, plus witness
//! assembly and verification.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{least_rotation, AgentId, AgentSet, ConcurrentGame, Lasso, MoveProfile, StateId, StateSet};
use crate::graph::{bfs_path, cycle_through, find_lasso_by_inf, tarjan_scc, GraphLasso};
use crate::objectives::{
    eval_objective, leq, preorder_is_monotone, preorder_to_circuit, AutAcceptance, BoolCircuit, Objective,
    PayoffVector, Preference, Preorder, Value,
};
use crate::reductions::{
    conjunction_automaton, coreduce_to_single_buchi, is_coreducible, lexicographic_automaton,
    product_with_automaton, prune_reachable, reduce_to_single_buchi, sequentialize_for_value,
    subset_threshold_automaton, visited_set_product, ValueArena,
};
use crate::solvers::{
    first_repetition_regions, solve_buchi, solve_cobuchi, solve_generic_inf, solve_parity_zielonka, solve_reach,
    solve_safety, solve_stay_families, Player,
};
use crate::suspect::{build_arena, eve_condition, solve_eve_condition, ConditionClass, SuspectArena, SuspectVertex};

pub use crate::graph::find_lasso_constrained;

// ---------------------------------------------------------------------------
// Thresholds and constraints

/// A threshold for one agent: a play class given by its `(occ, inf)` sets,
/// or a payoff bit vector (length 1 for single objectives).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Threshold {
    Play { occ: StateSet, inf: StateSet },
    Payoff(PayoffVector),
}

/// Per-agent optional lower and upper thresholds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Constraint {
    pub lower: Vec<Option<Threshold>>,
    pub upper: Vec<Option<Threshold>>,
}

impl Constraint {
    pub fn none() -> Constraint {
        Constraint::default()
    }

    pub fn with_lower(mut self, agent: AgentId, t: Threshold) -> Constraint {
        if self.lower.len() <= agent {
            self.lower.resize(agent + 1, None);
        }
        self.lower[agent] = Some(t);
        self
    }

    pub fn with_upper(mut self, agent: AgentId, t: Threshold) -> Constraint {
        if self.upper.len() <= agent {
            self.upper.resize(agent + 1, None);
        }
        self.upper[agent] = Some(t);
        self
    }

    /// Lower and upper bound both equal to `t`.
    pub fn with_exact(self, agent: AgentId, t: Threshold) -> Constraint {
        self.with_lower(agent, t.clone()).with_upper(agent, t)
    }
}

/// A constraint resolved to preference classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lower: Vec<Option<Value>>,
    pub upper: Vec<Option<Value>>,
}

impl Bounds {
    pub fn none(num_agents: usize) -> Bounds {
        Bounds { lower: vec![None; num_agents], upper: vec![None; num_agents] }
    }

    /// Whether `profile` lies within the bounds for every agent.
    pub fn admits(&self, game: &ConcurrentGame, profile: &[Value]) -> bool {
        profile.iter().enumerate().all(|(a, v)| {
            let p = &game.prefs[a];
            self.lower[a].as_ref().map_or(true, |l| p.leq(l, v)) && self.upper[a].as_ref().map_or(true, |u| p.leq(v, u))
        })
    }
}

/// The class of `t` for `agent`.
pub fn resolve_threshold(game: &ConcurrentGame, agent: AgentId, t: &Threshold) -> Result<Value> {
    game.check_agent(agent)?;
    let pref = &game.prefs[agent];
    match t {
        Threshold::Payoff(bits) => match pref {
            Preference::Single(_) if bits.len() == 1 => Ok(Value::Bool(bits.0[0])),
            _ if pref.is_ordered() && bits.len() == pref.arity() => Ok(Value::Vector(bits.clone())),
            _ => Err(Error::IncompatibleThreshold(format!(
                "payoff {bits} has length {} but agent {} needs {}",
                bits.len(),
                game.agent_names[agent],
                pref.arity()
            ))),
        },
        Threshold::Play { occ, inf } => {
            if !inf.is_subset(occ) || inf.is_empty() {
                return Err(Error::IncompatibleThreshold("threshold needs a nonempty inf contained in occ".into()));
            }
            if let Some(&s) = occ.iter().find(|&&s| s >= game.num_states()) {
                return Err(Error::UnknownState(s.to_string()));
            }
            pref.value_of_sets(occ, inf).map_err(|e| match e {
                Error::Unsupported(m) => Error::IncompatibleThreshold(m),
                e => e,
            })
        }
    }
}

pub fn resolve_constraint(game: &ConcurrentGame, c: &Constraint) -> Result<Bounds> {
    let n = game.num_agents();
    if c.lower.len() > n || c.upper.len() > n {
        return Err(Error::IncompatibleThreshold("constraint names more agents than the game has".into()));
    }
    let mut b = Bounds::none(n);
    for (a, t) in c.lower.iter().enumerate() {
        if let Some(t) = t {
            b.lower[a] = Some(resolve_threshold(game, a, t)?);
        }
    }
    for (a, t) in c.upper.iter().enumerate() {
        if let Some(t) = t {
            b.upper[a] = Some(resolve_threshold(game, a, t)?);
        }
    }
    Ok(b)
}

// ---------------------------------------------------------------------------
// Witnesses

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub state: StateId,
    pub mv: MoveProfile,
}

/// A deviation vertex `Eve(state, suspects)` reached from the obey
/// vertex at `position`, with a digest binding it to the witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationCertificate {
    pub position: usize,
    pub state: StateId,
    pub suspects: u32,
    pub digest: u64,
}

/// One choice of a memoryless Eve strategy in the suspect arena.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub state: StateId,
    pub suspects: u32,
    pub mv: MoveProfile,
}

/// An obey lasso of the suspect arena (given by the game states and the
/// moves Eve proposes), the realized payoffs, and deviation certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NEWitness {
    pub from: StateId,
    pub prefix: Vec<Step>,
    pub cycle: Vec<Step>,
    pub payoffs: Vec<Value>,
    pub certificates: Vec<DeviationCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Vec<StrategyEntry>>,
}

impl NEWitness {
    pub fn lasso(&self) -> Lasso {
        Lasso::new(self.prefix.iter().map(|s| s.state).collect(), self.cycle.iter().map(|s| s.state).collect())
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.prefix.iter().chain(&self.cycle)
    }
}

/// FNV-1a, used for stable certificate digests.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn certificate_digest(payoffs: &[Value], position: usize, state: StateId, suspects: u32) -> u64 {
    let text: Vec<String> = payoffs.iter().map(|v| v.to_string()).collect();
    fnv1a(format!("{}|{position}|{state}|{suspects}", text.join(",")).as_bytes())
}

/// Deviation certificates of a lasso given by its steps.
pub fn compute_certificates(arena: &SuspectArena, steps: &[Step], payoffs: &[Value]) -> Result<Vec<DeviationCertificate>> {
    let full = arena.full_agents();
    let mut out = Vec::new();
    for (pos, st) in steps.iter().enumerate() {
        let adam = arena
            .adam(st.state, full, &st.mv)
            .ok_or_else(|| Error::InvalidLasso(format!("position {pos} leaves the obey edges")))?;
        for d in arena.deviations(adam) {
            let v = &arena.vertices[d];
            let (state, suspects) = (v.state(), v.suspects().0);
            out.push(DeviationCertificate {
                position: pos,
                state,
                suspects,
                digest: certificate_digest(payoffs, pos, state, suspects),
            });
        }
    }
    Ok(out)
}

/// A lasso of game states with the proposed moves, before normalization.
#[derive(Clone, Debug)]
struct RawLasso {
    prefix: Vec<(StateId, MoveProfile)>,
    cycle: Vec<(StateId, MoveProfile)>,
    strategy: Option<Vec<StrategyEntry>>,
}

fn assemble(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, raw: RawLasso) -> Result<NEWitness> {
    let (shift, cycle) = least_rotation(&raw.cycle);
    let mut prefix = raw.prefix;
    prefix.extend_from_slice(&raw.cycle[..shift]);
    let to_steps = |v: Vec<(StateId, MoveProfile)>| -> Vec<Step> { v.into_iter().map(|(state, mv)| Step { state, mv }).collect() };
    let (prefix, cycle) = (to_steps(prefix), to_steps(cycle));
    let lasso = Lasso::new(prefix.iter().map(|s| s.state).collect(), cycle.iter().map(|s| s.state).collect());
    let payoffs: Vec<Value> = game.prefs.iter().map(|p| p.value_of_lasso(&lasso)).collect();
    let steps: Vec<Step> = prefix.iter().chain(&cycle).cloned().collect();
    let certificates = compute_certificates(arena, &steps, &payoffs)?;
    Ok(NEWitness { from, prefix, cycle, payoffs, certificates, strategy: raw.strategy })
}

/// Obey graph over game states: an edge `s -> t` is kept when some obey
/// Adam vertex `(s, Agt, m)` with `tab(s, m) = t` satisfies `ok`; the
/// first such move (in lexicographic order) labels the edge.
struct ObeyGraph {
    succ: Vec<Vec<usize>>,
    label: HashMap<(usize, usize), MoveProfile>,
}

fn obey_graph(arena: &SuspectArena, ns: usize, ok: &dyn Fn(usize) -> bool) -> ObeyGraph {
    let mut succ = vec![Vec::new(); ns];
    let mut label = HashMap::new();
    for (s, out) in succ.iter_mut().enumerate() {
        for (adam, m, t) in arena.obey_moves(s) {
            if ok(adam) && !label.contains_key(&(s, t)) {
                label.insert((s, t), m);
                out.push(t);
            }
        }
        out.sort_unstable();
    }
    ObeyGraph { succ, label }
}

fn deviations_in<'a>(arena: &'a SuspectArena, win: &'a [bool]) -> impl Fn(usize) -> bool + 'a {
    move |adam: usize| arena.deviations(adam).iter().all(|&d| win[d])
}

impl ObeyGraph {
    fn raw(&self, l: &GraphLasso) -> RawLasso {
        let seq: Vec<usize> = l.prefix.iter().chain(&l.cycle).copied().chain(std::iter::once(l.cycle[0])).collect();
        let steps: Vec<(StateId, MoveProfile)> =
            seq.windows(2).map(|w| (w[0], self.label[&(w[0], w[1])].clone())).collect();
        let (p, c) = steps.split_at(l.prefix.len());
        RawLasso { prefix: p.to_vec(), cycle: c.to_vec(), strategy: None }
    }
}

// ---------------------------------------------------------------------------
// Worker pool for order-deterministic searches

static WORKERS: AtomicUsize = AtomicUsize::new(1);

/// Sets the number of worker threads used by payoff enumerations.
pub fn set_workers(n: usize) {
    WORKERS.store(n.max(1), Ordering::Relaxed);
}

pub fn workers() -> usize {
    WORKERS.load(Ordering::Relaxed)
}

/// The result for the lowest index `i < n` with `f(i) = Some`, evaluating
/// batches of indices in parallel. Errors are reported in index order.
fn find_first<T: Send>(n: usize, f: &(dyn Fn(usize) -> Result<Option<T>> + Sync)) -> Result<Option<T>> {
    let k = workers();
    if k <= 1 {
        for i in 0..n {
            if let Some(t) = f(i)? {
                return Ok(Some(t));
            }
        }
        return Ok(None);
    }
    let mut start = 0;
    while start < n {
        let end = (start + k).min(n);
        let results: Vec<Result<Option<T>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (start..end).map(|i| scope.spawn(move || f(i))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for r in results {
            if let Some(t) = r? {
                return Ok(Some(t));
            }
        }
        start = end;
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Classes

/// Uniform preference class of a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefClass {
    Reach,
    Safety,
    Buchi,
    CoBuchi,
    RabinParity,
    Circuit,
    DetAutomata,
    OrderedBuchi,
    OrderedReach,
}

fn class_of(p: &Preference) -> PrefClass {
    match p {
        Preference::Single(o) => match o {
            Objective::Reach(_) => PrefClass::Reach,
            Objective::Safety(_) => PrefClass::Safety,
            Objective::Buchi(_) => PrefClass::Buchi,
            Objective::CoBuchi(_) => PrefClass::CoBuchi,
            Objective::Parity(_) | Objective::Rabin(_) => PrefClass::RabinParity,
            Objective::Streett(_) | Objective::Muller { .. } | Objective::Circuit(_) => PrefClass::Circuit,
            Objective::DetBuchiAut(_) | Objective::DetRabinAut(_) => PrefClass::DetAutomata,
        },
        Preference::OrderedBuchi { .. } => PrefClass::OrderedBuchi,
        Preference::OrderedReach { .. } => PrefClass::OrderedReach,
    }
}

pub fn preference_class(game: &ConcurrentGame) -> Result<PrefClass> {
    let classes: BTreeSet<String> = game.prefs.iter().map(|p| format!("{:?}", class_of(p))).collect();
    if classes.len() > 1 {
        return Err(Error::MixedClasses(classes.into_iter().collect::<Vec<_>>().join(", ")));
    }
    game.prefs
        .first()
        .map(class_of)
        .ok_or_else(|| Error::Unsupported("game without agents".into()))
}

/// Which algorithm decides ordered Büchi games.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrderedBuchiPath {
    /// Co-reducible preorders use the SSG decomposition; other monotone
    /// preorders use the downward-closed solver; the rest the general path.
    #[default]
    Auto,
    /// Payoff enumeration with improvement circuits.
    General,
    CoReducible,
    Monotone,
}

/// Which algorithm decides ordered reachability games.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrderedReachPath {
    /// Co-reducible preorders use the safety reduction, others the
    /// visited-set product with the first-repetition solver.
    #[default]
    Auto,
    General,
    Simple,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NeOptions {
    pub ordered_buchi: OrderedBuchiPath,
    pub ordered_reach: OrderedReachPath,
}

// ---------------------------------------------------------------------------
// Value problem

/// Whether `agent` can ensure, from `from`, outcomes at least as good as
/// `threshold`.
pub fn value(game: &ConcurrentGame, from: StateId, agent: AgentId, threshold: &Threshold) -> Result<bool> {
    let u = resolve_threshold(game, agent, threshold)?;
    value_of(game, from, agent, &u)
}

/// [`value`] with a class instead of a threshold encoding.
pub fn value_of(game: &ConcurrentGame, from: StateId, agent: AgentId, u: &Value) -> Result<bool> {
    game.check_state(from)?;
    game.check_agent(agent)?;
    let pref = &game.prefs[agent];
    if !pref.is_value_compatible(u) {
        return Err(Error::IncompatibleThreshold(format!("{u} for agent {}", game.agent_names[agent])));
    }
    match (pref, u) {
        (Preference::Single(_), Value::Bool(false)) => Ok(true),
        (Preference::Single(o), Value::Bool(true)) => value_single(game, from, agent, o),
        (Preference::OrderedBuchi { targets, preorder }, Value::Vector(u)) => {
            value_ordered_buchi(game, from, agent, targets, preorder, u)
        }
        (Preference::OrderedReach { .. }, Value::Vector(u)) => value_ordered_reach(game, from, agent, u),
        _ => Err(Error::IncompatibleThreshold(u.to_string())),
    }
}

fn lift_states(va: &ValueArena, set: &StateSet) -> Vec<bool> {
    va.state_of.iter().map(|s| set.contains(s)).collect()
}

/// Inf-condition over state colors, solved on the value arena: agent
/// vertices carry the color of their state, coalition vertices none.
fn value_by_colors(
    va: &ValueArena,
    from: StateId,
    state_color: &[usize],
    accept: &dyn Fn(&[usize]) -> bool,
) -> Result<bool> {
    let mut classes: Vec<usize> = state_color.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let colors: Vec<Option<usize>> = (0..va.arena.len())
        .map(|v| {
            if va.arena.owner[v] == Player::Eve {
                Some(classes.binary_search(&state_color[va.state_of[v]]).expect("known color"))
            } else {
                None
            }
        })
        .collect();
    let fixed = vec![None; va.arena.len()];
    let r = solve_generic_inf(
        &va.arena,
        &colors,
        classes.len(),
        &mut |mask| {
            let seen: Vec<usize> = (0..classes.len()).filter(|&i| mask >> i & 1 == 1).map(|i| classes[i]).collect();
            accept(&seen)
        },
        &fixed,
    )?;
    Ok(r.win[va.vertex_of_state[from]])
}

/// Compresses states into classes with equal membership in `sets`.
fn signatures(ns: usize, sets: &[&StateSet]) -> Vec<usize> {
    let sig: Vec<Vec<bool>> = (0..ns).map(|s| sets.iter().map(|t| t.contains(&s)).collect()).collect();
    let mut distinct = sig.clone();
    distinct.sort();
    distinct.dedup();
    sig.iter().map(|x| distinct.binary_search(x).expect("present")).collect()
}

fn value_single(game: &ConcurrentGame, from: StateId, agent: AgentId, o: &Objective) -> Result<bool> {
    let ns = game.num_states();
    if let Objective::DetBuchiAut(aut) | Objective::DetRabinAut(aut) = o {
        let (prod, _) = product_with_automaton(game, agent, aut)?;
        return value_of(&prod, from * aut.num_states + aut.init, agent, &Value::Bool(true));
    }
    let va = sequentialize_for_value(game, agent)?;
    let start = va.vertex_of_state[from];
    Ok(match o {
        Objective::Reach(t) => solve_reach(&va.arena, &lift_states(&va, t)).win[start],
        Objective::Safety(t) => solve_safety(&va.arena, &lift_states(&va, t)).win[start],
        Objective::Buchi(t) => solve_buchi(&va.arena, &lift_states(&va, t)).win[start],
        Objective::CoBuchi(t) => solve_cobuchi(&va.arena, &lift_states(&va, t)).win[start],
        Objective::Parity(p) => {
            let pr: Vec<usize> = va.state_of.iter().map(|&s| p[s]).collect();
            solve_parity_zielonka(&va.arena, &pr).win[start]
        }
        Objective::Rabin(pairs) | Objective::Streett(pairs) => {
            let sets: Vec<&StateSet> = pairs.iter().flat_map(|(q, r)| [q, r]).collect();
            let sig = signatures(ns, &sets);
            let rep: Vec<StateId> = {
                let mut r = vec![0; ns];
                for s in 0..ns {
                    r[sig[s]] = s;
                }
                r
            };
            value_by_colors(&va, from, &sig, &|cls| {
                let inf: StateSet = cls.iter().map(|&c| rep[c]).collect();
                eval_objective(&inf, &inf, o).expect("inf objective")
            })?
        }
        Objective::Muller { colors, .. } => value_by_colors(&va, from, colors, &|cls| {
            // any state of each seen color stands for it
            let inf: StateSet = cls.iter().map(|&c| colors.iter().position(|&x| x == c).expect("color")).collect();
            eval_objective(&inf, &inf, o).expect("inf objective")
        })?,
        Objective::Circuit(_) => {
            let ids: Vec<usize> = (0..ns).collect();
            value_by_colors(&va, from, &ids, &|cls| {
                let inf: StateSet = cls.iter().copied().collect();
                eval_objective(&inf, &inf, o).expect("inf objective")
            })?
        }
        Objective::DetBuchiAut(_) | Objective::DetRabinAut(_) => unreachable!("handled above"),
    })
}

fn payoff_of_states(targets: &[StateSet], k: &StateSet) -> PayoffVector {
    PayoffVector(targets.iter().map(|t| !t.is_disjoint(k)).collect())
}

/// Maximal unions of signature classes `Z` with `bad(payoff(K_Z))`, as
/// state sets. States are grouped by their membership in `targets`.
fn maximal_families(ns: usize, targets: &[StateSet], good: &dyn Fn(&PayoffVector) -> bool) -> Result<Vec<StateSet>> {
    let refs: Vec<&StateSet> = targets.iter().collect();
    let sig = signatures(ns, &refs);
    let nsig = sig.iter().copied().max().map_or(0, |m| m + 1);
    if nsig > 16 {
        return Err(Error::GuardExceeded(format!("{nsig} target signatures (max 16)")));
    }
    let members = |z: u32| -> StateSet { (0..ns).filter(|&s| z >> sig[s] & 1 == 1).collect() };
    let ok: Vec<bool> = (0..1u32 << nsig).map(|z| z != 0 && good(&payoff_of_states(targets, &members(z)))).collect();
    let mut out = Vec::new();
    for z in 1..1u32 << nsig {
        if ok[z as usize] && (0..nsig).all(|i| z >> i & 1 == 1 || !ok[(z | 1 << i) as usize]) {
            out.push(members(z));
        }
    }
    Ok(out)
}

fn value_ordered_buchi(
    game: &ConcurrentGame,
    from: StateId,
    agent: AgentId,
    targets: &[StateSet],
    pre: &Preorder,
    u: &PayoffVector,
) -> Result<bool> {
    let ns = game.num_states();
    let via_automaton = |aut: crate::objectives::DetAutomaton| -> Result<bool> {
        let mut g = game.clone();
        g.prefs[agent] = Preference::Single(Objective::DetBuchiAut(aut));
        value_of(&g, from, agent, &Value::Bool(true))
    };
    let with_buchi = |t: StateSet| -> Result<bool> {
        let va = sequentialize_for_value(game, agent)?;
        Ok(solve_buchi(&va.arena, &lift_states(&va, &t)).win[va.vertex_of_state[from]])
    };
    match pre {
        Preorder::Disjunction | Preorder::Maximise => with_buchi(reduce_to_single_buchi(targets, pre, u, ns)?),
        Preorder::Conjunction => {
            if u.count() < u.len() {
                Ok(true)
            } else {
                via_automaton(conjunction_automaton(targets, ns))
            }
        }
        Preorder::Subset => via_automaton(subset_threshold_automaton(targets, u, ns)?),
        Preorder::Lexicographic => via_automaton(lexicographic_automaton(targets, u, ns)?),
        _ if preorder_is_monotone(pre, targets.len()) => {
            // the opponents' condition "payoff not above u" is downward closed
            let fams = maximal_families(ns, targets, &|p| !leq(pre, u, p))?;
            let va = sequentialize_for_value(game, agent)?;
            let lifted: Vec<Vec<bool>> = fams.iter().map(|k| lift_states(&va, k)).collect();
            let all = vec![true; va.arena.len()];
            let (adam, _) = solve_stay_families(&va.arena, &all, &lifted, Player::Adam);
            Ok(!adam[va.vertex_of_state[from]])
        }
        _ => {
            let va = sequentialize_for_value(game, agent)?;
            let refs: Vec<&StateSet> = targets.iter().collect();
            let sig = signatures(ns, &refs);
            let rep: Vec<StateId> = {
                let mut r = vec![0; ns];
                for s in 0..ns {
                    r[sig[s]] = s;
                }
                r
            };
            value_by_colors(&va, from, &sig, &|cls| {
                let k: StateSet = cls.iter().map(|&c| rep[c]).collect();
                leq(pre, u, &payoff_of_states(targets, &k))
            })
        }
    }
}

fn value_ordered_reach(game: &ConcurrentGame, from: StateId, agent: AgentId, u: &PayoffVector) -> Result<bool> {
    let Preference::OrderedReach { targets, preorder } = &game.prefs[agent] else {
        unreachable!("checked by caller")
    };
    let mut g = game.clone();
    for p in g.prefs.iter_mut() {
        *p = game.prefs[agent].clone();
    }
    let (prod, nodes) = visited_set_product(&g, from)?;
    let masks: Vec<u64> = targets.iter().map(|t| t.iter().fold(0u64, |m, &s| m | 1 << s)).collect();
    let good: StateSet = (0..nodes.len())
        .filter(|&x| {
            let p = PayoffVector(masks.iter().map(|&m| nodes[x].1 & m != 0).collect());
            leq(preorder, u, &p)
        })
        .collect();
    let va = sequentialize_for_value(&prod, agent)?;
    Ok(solve_buchi(&va.arena, &lift_states(&va, &good)).win[va.vertex_of_state[0]])
}

// ---------------------------------------------------------------------------
// NE existence dispatch

/// A pure NE from `from` whose outcome lies within `constraint`, if any.
pub fn ne_constrained(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    ne_constrained_with(game, from, constraint, &NeOptions::default())
}

/// A pure NE from `from`, if any.
pub fn ne_exists(game: &ConcurrentGame, from: StateId) -> Result<Option<NEWitness>> {
    ne_constrained(game, from, &Constraint::none())
}

pub fn ne_constrained_with(
    game: &ConcurrentGame,
    from: StateId,
    constraint: &Constraint,
    opts: &NeOptions,
) -> Result<Option<NEWitness>> {
    game.check_state(from)?;
    match preference_class(game)? {
        PrefClass::Reach => ne_reach(game, from, constraint),
        PrefClass::Safety => ne_safety(game, from, constraint),
        PrefClass::Buchi => ne_buchi(game, from, constraint),
        PrefClass::CoBuchi => ne_cobuchi(game, from, constraint),
        PrefClass::RabinParity => ne_rabin_parity(game, from, constraint),
        PrefClass::Circuit => ne_circuit(game, from, constraint),
        PrefClass::DetAutomata => ne_det_automata(game, from, constraint),
        PrefClass::OrderedBuchi => ne_ordered_buchi_with(game, from, constraint, opts.ordered_buchi),
        PrefClass::OrderedReach => ne_ordered_reach_with(game, from, constraint, opts.ordered_reach),
    }
}

fn require_class(game: &ConcurrentGame, allowed: &[PrefClass]) -> Result<()> {
    let c = preference_class(game)?;
    if allowed.contains(&c) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("procedure does not handle the {c:?} class")))
    }
}

fn check_agents(game: &ConcurrentGame) -> Result<()> {
    if game.num_agents() > 20 {
        return Err(Error::GuardExceeded(format!("{} agents (max 20 for loser-set enumeration)", game.num_agents())));
    }
    Ok(())
}

/// Loser sets consistent with the bounds, by size then lexicographically.
fn loser_sets(game: &ConcurrentGame, bounds: &Bounds) -> Vec<AgentSet> {
    let n = game.num_agents();
    AgentSet::subsets_by_size(n)
        .into_iter()
        .filter(|l| bounds.admits(game, &profile_of_losers(n, *l)))
        .collect()
}

fn profile_of_losers(n: usize, l: AgentSet) -> Vec<Value> {
    (0..n).map(|a| Value::Bool(!l.contains(a))).collect()
}

fn single_target(game: &ConcurrentGame, a: AgentId) -> &StateSet {
    match &game.prefs[a] {
        Preference::Single(
            Objective::Reach(t) | Objective::Safety(t) | Objective::Buchi(t) | Objective::CoBuchi(t),
        ) => t,
        _ => unreachable!("class checked"),
    }
}

fn indicator(ns: usize, t: &StateSet) -> Vec<bool> {
    (0..ns).map(|s| t.contains(&s)).collect()
}

fn union_indicator<'a>(ns: usize, sets: impl Iterator<Item = &'a StateSet>) -> Vec<bool> {
    let mut out = vec![false; ns];
    for t in sets {
        for &s in t {
            out[s] = true;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Reachability

pub fn ne_reach(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::Reach])?;
    check_agents(game)?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let ns = game.num_states();
    for l in loser_sets(game, &bounds) {
        let cond = eve_condition(game, &arena, ConditionClass::Reach, l)?;
        let w = solve_eve_condition(&arena, &cond)?;
        let g = obey_graph(&arena, ns, &deviations_in(&arena, &w.win));
        let winners: Vec<Vec<bool>> = (0..game.num_agents())
            .filter(|&a| !l.contains(a))
            .map(|a| indicator(ns, single_target(game, a)))
            .collect();
        let forbid = union_indicator(ns, l.iter().map(|a| single_target(game, a)));
        if let Some(lasso) = find_lasso_constrained(&g.succ, from, &winners, &forbid, &[], &[], usize::MAX) {
            return assemble(game, &arena, from, g.raw(&lasso)).map(Some);
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Safety

pub fn ne_safety(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::Safety])?;
    check_agents(game)?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let ns = game.num_states();
    let n = game.num_agents();
    let full = arena.full_agents();
    let mut regions: HashMap<AgentSet, Vec<bool>> = HashMap::new();
    for l in loser_sets(game, &bounds) {
        let lose: Vec<AgentId> = l.iter().collect();
        let k = lose.len();
        // product node (s, V): V ⊆ L (as a mask over `lose`) already lost
        let hit = |s: StateId| -> u32 {
            (0..k).filter(|&i| single_target(game, lose[i]).contains(&s)).fold(0, |m, i| m | 1 << i)
        };
        let id = |s: StateId, v: u32| s * (1usize << k) + v as usize;
        let pn = ns << k;
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); pn];
        let mut label: HashMap<(usize, usize), MoveProfile> = HashMap::new();
        for s in 0..ns {
            if arena.eve(s, full).is_none() {
                continue;
            }
            for vm in 0..1u32 << k {
                let rest = (0..k).filter(|&i| vm >> i & 1 == 0).fold(AgentSet::EMPTY, |p, i| p.with(lose[i]));
                if !regions.contains_key(&rest) {
                    let cond = eve_condition(game, &arena, ConditionClass::Safety, rest)?;
                    regions.insert(rest, solve_eve_condition(&arena, &cond)?.win);
                }
                let w = &regions[&rest];
                for (adam, m, t) in arena.obey_moves(s) {
                    if !arena.deviations(adam).iter().all(|&d| w[d]) {
                        continue;
                    }
                    let (a, b) = (id(s, vm), id(t, vm | hit(t)));
                    if let std::collections::hash_map::Entry::Vacant(e) = label.entry((a, b)) {
                        e.insert(m);
                        succ[a].push(b);
                    }
                }
            }
        }
        for out in succ.iter_mut() {
            out.sort_unstable();
        }
        let project = |set: &StateSet| -> Vec<bool> { (0..pn).map(|x| set.contains(&(x >> k))).collect() };
        let must: Vec<Vec<bool>> = lose.iter().map(|&a| project(single_target(game, a))).collect();
        let winners_t: StateSet = (0..n)
            .filter(|&a| !l.contains(a))
            .flat_map(|a| single_target(game, a).iter().copied())
            .collect();
        let forbid = project(&winners_t);
        if let Some(gl) = find_lasso_constrained(&succ, id(from, hit(from)), &must, &forbid, &[], &[], usize::MAX) {
            let seq: Vec<usize> = gl.prefix.iter().chain(&gl.cycle).copied().chain(std::iter::once(gl.cycle[0])).collect();
            let steps: Vec<(StateId, MoveProfile)> =
                seq.windows(2).map(|w| (w[0] >> k, label[&(w[0], w[1])].clone())).collect();
            let (p, c) = steps.split_at(gl.prefix.len());
            let raw = RawLasso { prefix: p.to_vec(), cycle: c.to_vec(), strategy: None };
            return assemble(game, &arena, from, raw).map(Some);
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Büchi: the SSG decomposition

/// Data for the SSG search: the payoff profile of a recurrent set `K`,
/// Eve's region for a profile, and the states allowed by upper bounds.
struct Ssg<'a> {
    arena: &'a SuspectArena,
    ns: usize,
    profile_of: Box<dyn Fn(&[usize]) -> Vec<Value> + 'a>,
    region_of: Box<dyn Fn(&[Value]) -> Result<Vec<bool>> + 'a>,
    cache: HashMap<Vec<Value>, std::rc::Rc<Vec<bool>>>,
}

type Edges = BTreeSet<(usize, usize)>;

impl<'a> Ssg<'a> {
    fn region(&mut self, k: &[usize]) -> Result<std::rc::Rc<Vec<bool>>> {
        let p = (self.profile_of)(k);
        if let Some(r) = self.cache.get(&p) {
            return Ok(r.clone());
        }
        let r = std::rc::Rc::new((self.region_of)(&p)?);
        self.cache.insert(p, r.clone());
        Ok(r)
    }

    fn eve_in(&self, w: &[bool], k: usize) -> bool {
        self.arena.eve(k, self.arena.full_agents()).is_some_and(|v| w[v])
    }

    /// Whether some obey Adam vertex `(k, Agt, m)` in `w` leads to `k2`.
    fn edge_in(&self, w: &[bool], k: usize, k2: usize) -> bool {
        self.arena.obey_moves(k).iter().any(|(adam, _, t)| *t == k2 && w[*adam])
    }

    fn solve(&mut self, k: Vec<usize>, e: Edges, out: &mut Vec<(Vec<usize>, Edges)>) -> Result<()> {
        if k.is_empty() || e.is_empty() {
            return Ok(());
        }
        let w = self.region(&k)?;
        let ok3 = k.iter().all(|&x| self.eve_in(&w, x));
        let ok4 = e.iter().all(|&(a, b)| self.edge_in(&w, a, b));
        let succ = self.adjacency(&k, &e);
        let comps = tarjan_scc(&succ, &|v| k.binary_search(&v).is_ok());
        if ok3 && ok4 && comps.len() == 1 {
            out.push((k, e));
            return Ok(());
        }
        for comp in comps {
            let ce: Edges = e.iter().copied().filter(|(a, b)| comp.binary_search(a).is_ok() && comp.binary_search(b).is_ok()).collect();
            if ce.is_empty() {
                continue;
            }
            let wc = self.region(&comp)?;
            let tk: Vec<usize> = comp.iter().copied().filter(|&x| self.eve_in(&wc, x)).collect();
            let te: Edges = ce
                .into_iter()
                .filter(|&(a, b)| tk.binary_search(&a).is_ok() && tk.binary_search(&b).is_ok() && self.edge_in(&wc, a, b))
                .collect();
            self.solve(tk, te, out)?;
        }
        Ok(())
    }

    fn adjacency(&self, _k: &[usize], e: &Edges) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.ns];
        for &(a, b) in e {
            succ[a].push(b);
        }
        succ
    }

    /// `SSG` applied to the obey transition system restricted to `allowed`.
    fn decompose(&mut self, allowed: &[bool]) -> Result<Vec<(Vec<usize>, Edges)>> {
        let full = self.arena.full_agents();
        let k0: Vec<usize> = (0..self.ns).filter(|&s| allowed[s] && self.arena.eve(s, full).is_some()).collect();
        let mut e0 = Edges::new();
        for &s in &k0 {
            for (_, _, t) in self.arena.obey_moves(s) {
                if k0.binary_search(&t).is_ok() {
                    e0.insert((s, t));
                }
            }
        }
        let mut sol = Vec::new();
        self.solve(k0, e0, &mut sol)?;
        Ok(sol)
    }

    /// Runs SSG from the states in `allowed` and returns the first lasso
    /// (in the order of `Sol`) meeting the lower bounds and reachable.
    fn search(
        &mut self,
        game: &ConcurrentGame,
        from: StateId,
        allowed: &[bool],
        bounds: &Bounds,
    ) -> Result<Option<RawLasso>> {
        for (k, e) in self.decompose(allowed)? {
            let profile = (self.profile_of)(&k);
            if !bounds.admits(game, &profile) {
                continue;
            }
            let w = self.region(&k)?;
            // condition 5: reach K x {Agt} from (from, Agt) inside W
            let g = obey_graph(self.arena, self.ns, &|adam| w[adam]);
            let inside = |s: usize| self.eve_in(&w, s);
            let Some(path) = bfs_path(&g.succ, &[from], &|s| k.binary_search(&s).is_ok(), &inside) else {
                continue;
            };
            let entry = *path.last().expect("nonempty");
            let esucc = self.adjacency(&k, &e);
            let cyc = cycle_through(&esucc, &k, entry, &k);
            let gl = GraphLasso { prefix: path[..path.len() - 1].to_vec(), cycle: cyc };
            return Ok(Some(g.raw(&gl)));
        }
        Ok(None)
    }
}

pub fn ne_buchi(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::Buchi])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    match buchi_core(game, &arena, from, &bounds)? {
        Some(raw) => assemble(game, &arena, from, raw).map(Some),
        None => Ok(None),
    }
}

/// A transition subsystem `⟨K, E⟩`: a set of states and edges between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSubsystem {
    pub states: Vec<StateId>,
    pub edges: BTreeSet<(StateId, StateId)>,
}

/// The set `Sol` computed by the Büchi procedure from `from`: the SSG
/// decomposition of the obey transition system restricted by the upper
/// bounds of `constraint`, keeping the subsystems whose payoff profile
/// meets the constraint.
pub fn buchi_subsystems(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Vec<TransitionSubsystem>> {
    require_class(game, &[PrefClass::Buchi])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let mut ssg = buchi_ssg(game, &arena);
    let sol = ssg.decompose(&buchi_allowed(game, &bounds))?;
    Ok(sol
        .into_iter()
        .filter(|(k, _)| bounds.admits(game, &(ssg.profile_of)(k)))
        .map(|(states, edges)| TransitionSubsystem { states, edges })
        .collect())
}

fn buchi_allowed(game: &ConcurrentGame, bounds: &Bounds) -> Vec<bool> {
    let mut allowed = vec![true; game.num_states()];
    for a in 0..game.num_agents() {
        if bounds.upper[a] == Some(Value::Bool(false)) {
            for &s in single_target(game, a) {
                allowed[s] = false;
            }
        }
    }
    allowed
}

fn buchi_core(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    let allowed = buchi_allowed(game, bounds);
    buchi_ssg(game, arena).search(game, from, &allowed, bounds)
}

fn buchi_ssg<'a>(game: &'a ConcurrentGame, arena: &'a SuspectArena) -> Ssg<'a> {
    let ns = game.num_states();
    let n = game.num_agents();
    Ssg {
        arena,
        ns,
        profile_of: Box::new(move |k: &[usize]| {
            (0..n).map(|a| Value::Bool(k.iter().any(|s| single_target(game, a).contains(s)))).collect()
        }),
        region_of: Box::new(move |p: &[Value]| {
            let losers = (0..n).filter(|&a| p[a] == Value::Bool(false)).fold(AgentSet::EMPTY, |l, a| l.with(a));
            let cond = eve_condition(game, arena, ConditionClass::Buchi, losers)?;
            Ok(solve_eve_condition(arena, &cond)?.win)
        }),
        cache: HashMap::new(),
    }
}

// ---------------------------------------------------------------------------
// co-Büchi

pub fn ne_cobuchi(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::CoBuchi])?;
    check_agents(game)?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let ns = game.num_states();
    for l in loser_sets(game, &bounds) {
        let cond = eve_condition(game, &arena, ConditionClass::CoBuchi, l)?;
        let w = solve_eve_condition(&arena, &cond)?;
        let g = obey_graph(&arena, ns, &deviations_in(&arena, &w.win));
        let must: Vec<Vec<bool>> = l.iter().map(|a| indicator(ns, single_target(game, a))).collect();
        let forbid = union_indicator(ns, (0..game.num_agents()).filter(|&a| !l.contains(a)).map(|a| single_target(game, a)));
        if let Some(lasso) = find_lasso_constrained(&g.succ, from, &[], &[], &must, &forbid, usize::MAX) {
            return assemble(game, &arena, from, g.raw(&lasso)).map(Some);
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Rabin and parity

pub fn ne_rabin_parity(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::RabinParity])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    match rabin_core(game, &arena, from, &bounds)? {
        Some(raw) => assemble(game, &arena, from, raw).map(Some),
        None => Ok(None),
    }
}

fn inf_wins(game: &ConcurrentGame, a: AgentId, inf: &StateSet) -> bool {
    match &game.prefs[a] {
        Preference::Single(o) => eval_objective(inf, inf, o).expect("inf objective"),
        _ => unreachable!("single objective class"),
    }
}

fn rabin_core(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    check_agents(game)?;
    let ns = game.num_states();
    let n = game.num_agents();
    for l in loser_sets(game, bounds) {
        let cond = eve_condition(game, arena, ConditionClass::Rabin, l)?;
        let w = solve_eve_condition(arena, &cond)?;
        let g = obey_graph(arena, ns, &deviations_in(arena, &w.win));
        let found = find_lasso_by_inf(&g.succ, from, &|_| true, &mut |c| {
            let inf: StateSet = c.iter().copied().collect();
            (0..n).all(|a| inf_wins(game, a, &inf) != l.contains(a))
        });
        if let Some(lasso) = found {
            return Ok(Some(g.raw(&lasso)));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Circuits

pub fn ne_circuit(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::Circuit, PrefClass::Buchi, PrefClass::CoBuchi, PrefClass::RabinParity])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    match circuit_core(game, &arena, from, &bounds, None, &|_| true)? {
        Some(raw) => assemble(game, &arena, from, raw).map(Some),
        None => Ok(None),
    }
}

/// The circuit procedure on a game with Inf-only single objectives. With
/// `fixed_losers`, only that loser set is tried and the bounds are left
/// to `extra`, which must also hold on the recurrent states of the lasso.
fn circuit_core(
    game: &ConcurrentGame,
    arena: &SuspectArena,
    from: StateId,
    bounds: &Bounds,
    fixed_losers: Option<AgentSet>,
    extra: &dyn Fn(&StateSet) -> bool,
) -> Result<Option<RawLasso>> {
    check_agents(game)?;
    let ns = game.num_states();
    let n = game.num_agents();
    let sets = match fixed_losers {
        Some(l) => vec![l],
        None => loser_sets(game, bounds),
    };
    for l in sets {
        let cond = eve_condition(game, arena, ConditionClass::Circuit, l)?;
        let w = solve_eve_condition(arena, &cond)?;
        let g = obey_graph(arena, ns, &deviations_in(arena, &w.win));
        let found = find_lasso_by_inf(&g.succ, from, &|_| true, &mut |c| {
            let inf: StateSet = c.iter().copied().collect();
            (fixed_losers.is_some() || (0..n).all(|a| inf_wins(game, a, &inf) != l.contains(a))) && extra(&inf)
        });
        if let Some(lasso) = found {
            return Ok(Some(g.raw(&lasso)));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Deterministic automata

pub fn ne_det_automata(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::DetAutomata])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let mut g = game.clone();
    let mut cur = from;
    let mut proj: Vec<StateId> = (0..game.num_states()).collect();
    for a in 0..game.num_agents() {
        let aut = match &g.prefs[a] {
            Preference::Single(Objective::DetBuchiAut(x) | Objective::DetRabinAut(x)) => x.clone(),
            _ => unreachable!("class checked"),
        };
        let (p, pairs) = product_with_automaton(&g, a, &aut)?;
        let (pruned, order) = prune_reachable(&p, cur * aut.num_states + aut.init);
        proj = order.iter().map(|&x| proj[pairs[x].0]).collect();
        g = pruned;
        cur = 0;
    }
    let all_buchi = g.prefs.iter().all(|p| matches!(p, Preference::Single(Objective::Buchi(_))));
    let parena = build_arena(&g, cur)?;
    let raw = if all_buchi {
        buchi_core(&g, &parena, cur, &bounds)?
    } else {
        for p in g.prefs.iter_mut() {
            if let Preference::Single(Objective::Buchi(t)) = p {
                *p = Preference::Single(Objective::Rabin(vec![(t.clone(), StateSet::new())]));
            }
        }
        let parena = build_arena(&g, cur)?;
        rabin_core(&g, &parena, cur, &bounds)?
    };
    let Some(raw) = raw else {
        return Ok(None);
    };
    let map = |v: Vec<(StateId, MoveProfile)>| -> Vec<(StateId, MoveProfile)> { v.into_iter().map(|(s, m)| (proj[s], m)).collect() };
    let raw = RawLasso { prefix: map(raw.prefix), cycle: map(raw.cycle), strategy: None };
    assemble(game, &arena, from, raw).map(Some)
}

// ---------------------------------------------------------------------------
// Ordered Büchi

fn ordered_parts(game: &ConcurrentGame, a: AgentId) -> (&Vec<StateSet>, &Preorder) {
    match &game.prefs[a] {
        Preference::OrderedBuchi { targets, preorder } | Preference::OrderedReach { targets, preorder } => {
            (targets, preorder)
        }
        _ => unreachable!("ordered class"),
    }
}

fn vector(v: &Value) -> &PayoffVector {
    match v {
        Value::Vector(p) => p,
        Value::Bool(_) => unreachable!("ordered class"),
    }
}

/// All payoff profiles within the bounds, ordered by total popcount and
/// then lexicographically on the concatenated bits.
fn admissible_profiles(game: &ConcurrentGame, bounds: &Bounds) -> Result<Vec<Vec<Value>>> {
    let total: usize = game.prefs.iter().map(|p| p.arity()).sum();
    if total > 20 {
        return Err(Error::GuardExceeded(format!("{total} payoff bits in a profile (max 20)")));
    }
    let mut out: Vec<(usize, Vec<bool>, Vec<Value>)> = Vec::new();
    for mask in 0..1u64 << total {
        let bits: Vec<bool> = (0..total).map(|i| mask >> i & 1 == 1).collect();
        let mut off = 0;
        let profile: Vec<Value> = game
            .prefs
            .iter()
            .map(|p| {
                let k = p.arity();
                let v = match p {
                    Preference::Single(_) => Value::Bool(bits[off]),
                    _ => Value::Vector(PayoffVector(bits[off..off + k].to_vec())),
                };
                off += k;
                v
            })
            .collect();
        if bounds.admits(game, &profile) {
            out.push((mask.count_ones() as usize, bits, profile));
        }
    }
    out.sort();
    Ok(out.into_iter().map(|(_, _, p)| p).collect())
}

fn exact_payoffs(game: &ConcurrentGame, inf_or_occ: &StateSet, profile: &[Value]) -> bool {
    (0..game.num_agents()).all(|a| {
        let (targets, _) = ordered_parts(game, a);
        &payoff_of_states(targets, inf_or_occ) == vector(&profile[a])
    })
}

pub fn ne_ordered_buchi(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    ne_ordered_buchi_with(game, from, constraint, OrderedBuchiPath::Auto)
}

pub fn ne_ordered_buchi_with(
    game: &ConcurrentGame,
    from: StateId,
    constraint: &Constraint,
    path: OrderedBuchiPath,
) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::OrderedBuchi])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let n = game.num_agents();
    let all_coreducible = (0..n).all(|a| is_coreducible(ordered_parts(game, a).1));
    let all_monotone = (0..n).all(|a| {
        let (t, p) = ordered_parts(game, a);
        preorder_is_monotone(p, t.len())
    });
    let path = match path {
        OrderedBuchiPath::Auto if all_coreducible => OrderedBuchiPath::CoReducible,
        OrderedBuchiPath::Auto if all_monotone => OrderedBuchiPath::Monotone,
        OrderedBuchiPath::Auto => OrderedBuchiPath::General,
        OrderedBuchiPath::CoReducible if !all_coreducible => {
            return Err(Error::Unsupported("co-reducible path needs disjunction, maximise or subset".into()))
        }
        OrderedBuchiPath::Monotone if !all_monotone => {
            return Err(Error::Monotonicity("monotone path needs monotone preorders".into()))
        }
        p => p,
    };
    let raw = match path {
        OrderedBuchiPath::CoReducible => ordered_buchi_ssg(game, &arena, from, &bounds)?,
        OrderedBuchiPath::Monotone => ordered_buchi_monotone(game, &arena, from, &bounds)?,
        _ => ordered_buchi_general(game, &arena, from, &bounds)?,
    };
    match raw {
        Some(raw) => assemble(game, &arena, from, raw).map(Some),
        None => Ok(None),
    }
}

fn ordered_buchi_ssg(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    let ns = game.num_states();
    let n = game.num_agents();
    let mut allowed = vec![true; ns];
    for a in 0..n {
        if let Some(w) = &bounds.upper[a] {
            let (targets, pre) = ordered_parts(game, a);
            for s in coreduce_to_single_buchi(targets, pre, vector(w))? {
                allowed[s] = false;
            }
        }
    }
    let mut ssg = Ssg {
        arena,
        ns,
        profile_of: Box::new(move |k: &[usize]| {
            let ks: StateSet = k.iter().copied().collect();
            (0..n).map(|a| Value::Vector(payoff_of_states(ordered_parts(game, a).0, &ks))).collect()
        }),
        region_of: Box::new(move |p: &[Value]| {
            let hats: Vec<StateSet> = (0..n)
                .map(|a| {
                    let (targets, pre) = ordered_parts(game, a);
                    coreduce_to_single_buchi(targets, pre, vector(&p[a]))
                })
                .collect::<Result<_>>()?;
            let avoid: Vec<bool> = arena
                .vertices
                .iter()
                .map(|v| v.suspects().iter().any(|a| hats[a].contains(&v.state())))
                .collect();
            Ok(solve_cobuchi(&arena.arena, &avoid).win)
        }),
        cache: HashMap::new(),
    };
    ssg.search(game, from, &allowed, bounds)
}

/// Per-layer families of vertex sets in which Eve may stay forever for
/// profile `v`: the maximal state sets `K` with `payoff_A(K) ⪯ v^A` for
/// every suspect `A` of the layer.
fn monotone_families(game: &ConcurrentGame, arena: &SuspectArena, v: &[Value]) -> Result<Vec<Vec<bool>>> {
    let ns = game.num_states();
    let mut layers: Vec<AgentSet> = arena.vertices.iter().map(|x| x.suspects()).collect();
    layers.sort();
    layers.dedup();
    let mut fams = Vec::new();
    for p in layers {
        let agents: Vec<AgentId> = p.iter().collect();
        let all_targets: Vec<StateSet> = agents.iter().flat_map(|&a| ordered_parts(game, a).0.iter().cloned()).collect();
        let good = |bits: &PayoffVector| -> bool {
            let mut off = 0;
            agents.iter().all(|&a| {
                let (t, pre) = ordered_parts(game, a);
                let mine = PayoffVector(bits.0[off..off + t.len()].to_vec());
                off += t.len();
                leq(pre, &mine, vector(&v[a]))
            })
        };
        for k in maximal_families(ns, &all_targets, &good)? {
            fams.push(arena.vertices.iter().map(|x| x.suspects() == p && k.contains(&x.state())).collect());
        }
    }
    Ok(fams)
}

fn strategy_entries(arena: &SuspectArena, win: &[bool], strat: &[Option<usize>]) -> Vec<StrategyEntry> {
    let mut out = Vec::new();
    for (v, x) in arena.vertices.iter().enumerate() {
        if let (SuspectVertex::Eve { state, suspects }, true, Some(w)) = (x, win[v], strat[v]) {
            if let SuspectVertex::Adam { mv, .. } = &arena.vertices[w] {
                out.push(StrategyEntry { state: *state, suspects: suspects.0, mv: mv.clone() });
            }
        }
    }
    out
}

fn ordered_buchi_monotone(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    let ns = game.num_states();
    let profiles = admissible_profiles(game, bounds)?;
    find_first(profiles.len(), &|i| {
        let v = &profiles[i];
        let fams = monotone_families(game, arena, v)?;
        let all = vec![true; arena.len()];
        let (win, strat) = solve_stay_families(&arena.arena, &all, &fams, Player::Eve);
        let g = obey_graph(arena, ns, &deviations_in(arena, &win));
        let found = find_lasso_by_inf(&g.succ, from, &|_| true, &mut |c| {
            exact_payoffs(game, &c.iter().copied().collect(), v)
        });
        Ok(found.map(|l| {
            let mut raw = g.raw(&l);
            raw.strategy = Some(strategy_entries(arena, &win, &strat));
            raw
        }))
    })
}

/// Circuit with state inputs that is true iff `payoff(inf) ⋠ v`.
fn improvement_circuit(ns: usize, targets: &[StateSet], pre: &Preorder, v: &PayoffVector) -> Result<BoolCircuit> {
    let k = targets.len();
    let cmp = match pre {
        Preorder::Circuit(c) | Preorder::MonotoneCircuit(c) => c.clone(),
        _ => preorder_to_circuit(pre, k)?,
    };
    let mut c = BoolCircuit::new(ns);
    let mut ins: Vec<usize> = targets
        .iter()
        .map(|t| {
            let gs: Vec<usize> = t.iter().map(|&s| c.input(s)).collect();
            c.or_all(&gs)
        })
        .collect();
    for &b in &v.0 {
        ins.push(c.constant(b));
    }
    let le = c.embed(&cmp, &ins);
    let out = c.not(le);
    c.set_output(out);
    Ok(c)
}

fn ordered_buchi_general(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    let ns = game.num_states();
    let n = game.num_agents();
    let profiles = admissible_profiles(game, bounds)?;
    find_first(profiles.len(), &|i| {
        let v = &profiles[i];
        let mut cg = game.clone();
        for a in 0..n {
            let (targets, pre) = ordered_parts(game, a);
            cg.prefs[a] = Preference::Single(Objective::Circuit(improvement_circuit(ns, targets, pre, vector(&v[a]))?));
        }
        circuit_core(&cg, arena, from, &Bounds::none(n), Some(AgentSet::full(n)), &|inf| exact_payoffs(game, inf, v))
    })
}

// ---------------------------------------------------------------------------
// Ordered reachability

pub fn ne_ordered_reach(game: &ConcurrentGame, from: StateId, constraint: &Constraint) -> Result<Option<NEWitness>> {
    ne_ordered_reach_with(game, from, constraint, OrderedReachPath::Auto)
}

pub fn ne_ordered_reach_with(
    game: &ConcurrentGame,
    from: StateId,
    constraint: &Constraint,
    path: OrderedReachPath,
) -> Result<Option<NEWitness>> {
    require_class(game, &[PrefClass::OrderedReach])?;
    let bounds = resolve_constraint(game, constraint)?;
    let arena = build_arena(game, from)?;
    let simple = (0..game.num_agents()).all(|a| is_coreducible(ordered_parts(game, a).1));
    let raw = match path {
        OrderedReachPath::Simple if !simple => {
            return Err(Error::Unsupported("simple path needs disjunction, maximise or subset".into()))
        }
        OrderedReachPath::Simple => ordered_reach_simple(game, &arena, from, &bounds)?,
        OrderedReachPath::Auto if simple => ordered_reach_simple(game, &arena, from, &bounds)?,
        _ => ordered_reach_general(game, from, &bounds)?,
    };
    match raw {
        Some(raw) => assemble(game, &arena, from, raw).map(Some),
        None => Ok(None),
    }
}

fn ordered_reach_simple(game: &ConcurrentGame, arena: &SuspectArena, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    let ns = game.num_states();
    let n = game.num_agents();
    let profiles = admissible_profiles(game, bounds)?;
    find_first(profiles.len(), &|i| {
        let v = &profiles[i];
        let hats: Vec<StateSet> = (0..n)
            .map(|a| {
                let (targets, pre) = ordered_parts(game, a);
                coreduce_to_single_buchi(targets, pre, vector(&v[a]))
            })
            .collect::<Result<_>>()?;
        let avoid: Vec<bool> = arena
            .vertices
            .iter()
            .map(|x| x.suspects().iter().any(|a| hats[a].contains(&x.state())))
            .collect();
        let w = solve_safety(&arena.arena, &avoid);
        let g = obey_graph(arena, ns, &deviations_in(arena, &w.win));
        let mut must = Vec::new();
        let mut forbid = vec![false; ns];
        for a in 0..n {
            let (targets, _) = ordered_parts(game, a);
            for (t, &bit) in targets.iter().zip(&vector(&v[a]).0) {
                if bit {
                    must.push(indicator(ns, t));
                } else {
                    for &s in t {
                        forbid[s] = true;
                    }
                }
            }
        }
        if must.len() > 20 {
            return Err(Error::GuardExceeded(format!("{} occurrence constraints (max 20)", must.len())));
        }
        Ok(find_lasso_constrained(&g.succ, from, &must, &forbid, &[], &[], usize::MAX).map(|l| g.raw(&l)))
    })
}

fn ordered_reach_general(game: &ConcurrentGame, from: StateId, bounds: &Bounds) -> Result<Option<RawLasso>> {
    let n = game.num_agents();
    let (prod, nodes) = visited_set_product(game, from)?;
    let parena = build_arena(&prod, 0)?;
    // Vertices without suspects may sit at any product state; they are won
    // by Eve, so they share one top component that keeps edges monotone.
    let comps: Vec<(u64, u32)> = parena
        .vertices
        .iter()
        .map(|x| if x.suspects().is_empty() { (u64::MAX, 0) } else { (nodes[x.state()].1, x.suspects().0) })
        .collect();
    let masks: Vec<Vec<u64>> = (0..n)
        .map(|a| ordered_parts(game, a).0.iter().map(|t| t.iter().fold(0u64, |m, &s| m | 1 << s)).collect())
        .collect();
    let payoff = |a: AgentId, set: u64| PayoffVector(masks[a].iter().map(|&m| set & m != 0).collect());
    let profiles = admissible_profiles(game, bounds)?;
    find_first(profiles.len(), &|i| {
        let v = &profiles[i];
        let target: Vec<bool> = parena
            .vertices
            .iter()
            .map(|x| {
                let set = nodes[x.state()].1;
                x.suspects().iter().all(|a| leq(ordered_parts(game, a).1, &payoff(a, set), vector(&v[a])))
            })
            .collect();
        let won = first_repetition_regions(&parena.arena, &comps, &target)?;
        let mut ok_adam: HashMap<usize, bool> = HashMap::new();
        for s in 0..prod.num_states() {
            for (adam, _, _) in parena.obey_moves(s) {
                ok_adam.insert(adam, parena.deviations(adam).iter().all(|&d| won[d]));
            }
        }
        let g = obey_graph(&parena, prod.num_states(), &|adam| ok_adam.get(&adam).copied().unwrap_or(false));
        let found = find_lasso_by_inf(&g.succ, 0, &|_| true, &mut |c| {
            let set = nodes[c[0]].1;
            (0..n).all(|a| &payoff(a, set) == vector(&v[a]))
        });
        Ok(found.map(|l| {
            let raw = g.raw(&l);
            let map = |x: Vec<(StateId, MoveProfile)>| x.into_iter().map(|(s, m)| (nodes[s].0, m)).collect();
            RawLasso { prefix: map(raw.prefix), cycle: map(raw.cycle), strategy: None }
        }))
    })
}

// ---------------------------------------------------------------------------
// Verification

/// Re-checks a witness: obey structure, payoffs against the constraint,
/// every deviation certificate against an independently computed winning
/// region, and the strategy certificate when present.
pub fn verify_witness(game: &ConcurrentGame, from: StateId, constraint: &Constraint, w: &NEWitness) -> Result<bool> {
    let bounds = resolve_constraint(game, constraint)?;
    crate::oracle::check_witness(game, from, &bounds, w)
}

/// Acceptance of a Büchi- or Rabin-type automaton from the automaton
/// states seen infinitely often.
pub fn automaton_accepts_states(acc: &AutAcceptance, inf_q: &BTreeSet<usize>) -> bool {
    match acc {
        AutAcceptance::Buchi(r) => !r.is_disjoint(inf_q),
        AutAcceptance::Rabin(pairs) => pairs.iter().any(|(e, f)| !e.is_disjoint(inf_q) && f.is_disjoint(inf_q)),
    }
}
