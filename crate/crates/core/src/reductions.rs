//! Rewritings of objectives and games: single-Büchi (co-)reductions,
//! threshold automata, Inf-circuits, automaton and visited-set products,
//! game simulation checks, and the sequentialization used for values.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::game::{AgentId, ConcurrentGame, StateId, StateSet};
use crate::objectives::{
    parity_to_rabin, AutAcceptance, BoolCircuit, DetAutomaton, Objective, PayoffVector, Preference, Preorder,
};
use crate::solvers::{Player, TurnArena};
use crate::suspect::suspects_unchecked;

fn union_of<'a>(sets: impl Iterator<Item = &'a StateSet>) -> StateSet {
    sets.flat_map(|s| s.iter().copied()).collect()
}

fn check_arity(targets: &[StateSet], v: &PayoffVector) -> Result<()> {
    if targets.len() != v.len() {
        return Err(Error::ArityMismatch { expected: targets.len(), got: v.len() });
    }
    Ok(())
}

/// `T̂(v)` with `inf ∩ T̂(v) ≠ ∅` iff `v ⪯ payoff(inf)`.
pub fn reduce_to_single_buchi(
    targets: &[StateSet],
    pre: &Preorder,
    v: &PayoffVector,
    num_states: usize,
) -> Result<StateSet> {
    check_arity(targets, v)?;
    let all: StateSet = (0..num_states).collect();
    let top = v.0.iter().rposition(|&b| b);
    match pre {
        Preorder::Disjunction => Ok(match top {
            None => all,
            Some(_) => union_of(targets.iter()),
        }),
        Preorder::Maximise => Ok(match top {
            None => all,
            Some(i0) => union_of(targets[i0..].iter()),
        }),
        _ => Err(Error::Unsupported(format!("{} preorder is not reducible here", pre.name()))),
    }
}

/// `T̂(v)` with `inf ∩ T̂(v) ≠ ∅` iff `payoff(inf) ⋠ v`.
pub fn coreduce_to_single_buchi(targets: &[StateSet], pre: &Preorder, v: &PayoffVector) -> Result<StateSet> {
    check_arity(targets, v)?;
    let top = v.0.iter().rposition(|&b| b);
    match pre {
        Preorder::Subset => Ok(union_of(
            targets.iter().zip(&v.0).filter(|(_, &b)| !b).map(|(t, _)| t),
        )),
        Preorder::Disjunction => Ok(match top {
            None => union_of(targets.iter()),
            Some(_) => StateSet::new(),
        }),
        Preorder::Maximise => Ok(match top {
            None => union_of(targets.iter()),
            Some(i0) => union_of(targets[i0 + 1..].iter()),
        }),
        _ => Err(Error::Unsupported(format!("{} preorder is not co-reducible", pre.name()))),
    }
}

pub fn is_coreducible(pre: &Preorder) -> bool {
    matches!(pre, Preorder::Subset | Preorder::Disjunction | Preorder::Maximise)
}

/// Büchi automaton accepting iff every target is visited infinitely often.
pub fn conjunction_automaton(targets: &[StateSet], num_states: usize) -> DetAutomaton {
    let n = targets.len();
    let mut delta = vec![vec![0; num_states]; n + 1];
    for i in 1..=n {
        for s in 0..num_states {
            delta[i - 1][s] = if targets[i - 1].contains(&s) { i } else { i - 1 };
        }
    }
    for s in 0..num_states {
        delta[n][s] = 0;
    }
    if n == 0 {
        delta[0] = vec![0; num_states];
    }
    DetAutomaton { num_states: n + 1, delta, init: 0, acceptance: AutAcceptance::Buchi([n].into()) }
}

/// Büchi automaton accepting iff `u ⪯ payoff` for the subset preorder.
pub fn subset_threshold_automaton(targets: &[StateSet], u: &PayoffVector, num_states: usize) -> Result<DetAutomaton> {
    check_arity(targets, u)?;
    let kept: Vec<StateSet> = targets
        .iter()
        .zip(&u.0)
        .filter(|(_, &b)| b)
        .map(|(t, _)| t.clone())
        .collect();
    Ok(conjunction_automaton(&kept, num_states))
}

/// Büchi automaton accepting iff `u ⪯ payoff` lexicographically.
/// Automaton state `j` stands for `q0` (`j = 0`) or `q_i` for the `j`-th
/// index `i` (1-based) with `u_i = 1`; advancing on `T_i` takes priority
/// over resetting.
pub fn lexicographic_automaton(targets: &[StateSet], u: &PayoffVector, num_states: usize) -> Result<DetAutomaton> {
    check_arity(targets, u)?;
    // I = {0} ∪ {i | u_i = 1}, with 1-based target indices
    let mut idx: Vec<usize> = vec![0];
    idx.extend((1..=targets.len()).filter(|&i| u.0[i - 1]));
    let pos_of: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    let succ = |i: usize| -> usize { idx.iter().copied().find(|&j| j > i).unwrap_or(0) };
    let nq = idx.len();
    let mut delta = vec![vec![0; num_states]; nq];
    for s in 0..num_states {
        delta[0][s] = pos_of[&succ(0)];
    }
    for &i in &idx[1..] {
        let q = pos_of[&i];
        for s in 0..num_states {
            delta[q][s] = if targets[i - 1].contains(&s) {
                pos_of[&succ(i)]
            } else if (1..i).any(|k| !u.0[k - 1] && targets[k - 1].contains(&s)) {
                0
            } else {
                q
            };
        }
    }
    Ok(DetAutomaton { num_states: nq, delta, init: 0, acceptance: AutAcceptance::Buchi([0].into()) })
}

/// A circuit over state inputs that is true on the indicator of `inf`
/// exactly when the Inf-only objective holds.
pub fn objective_to_inf_circuit(obj: &Objective, num_states: usize) -> Result<BoolCircuit> {
    let mut c = BoolCircuit::new(num_states);
    let ins: Vec<usize> = (0..num_states).map(|s| c.input(s)).collect();
    let any = |c: &mut BoolCircuit, set: &StateSet| {
        let gs: Vec<usize> = set.iter().map(|&s| ins[s]).collect();
        c.or_all(&gs)
    };
    let out = match obj {
        Objective::Buchi(t) => any(&mut c, t),
        Objective::CoBuchi(t) => {
            let a = any(&mut c, t);
            c.not(a)
        }
        Objective::Parity(p) => return objective_to_inf_circuit(&Objective::Rabin(parity_to_rabin(p)), num_states),
        Objective::Rabin(pairs) => {
            let parts: Vec<usize> = pairs
                .iter()
                .map(|(q, r)| {
                    let a = any(&mut c, q);
                    let b = any(&mut c, r);
                    let nb = c.not(b);
                    c.and(a, nb)
                })
                .collect();
            c.or_all(&parts)
        }
        Objective::Streett(pairs) => {
            let parts: Vec<usize> = pairs
                .iter()
                .map(|(q, r)| {
                    let a = any(&mut c, q);
                    let b = any(&mut c, r);
                    c.implies(a, b)
                })
                .collect();
            c.and_all(&parts)
        }
        Objective::Muller { colors, accepting } => {
            let used: BTreeSet<usize> = colors.iter().copied().collect();
            let seen: BTreeMap<usize, usize> = used
                .iter()
                .map(|&col| {
                    let states: StateSet = (0..num_states).filter(|&s| colors[s] == col).collect();
                    (col, any(&mut c, &states))
                })
                .collect();
            let parts: Vec<usize> = accepting
                .iter()
                .map(|f| {
                    let mut lits = Vec::new();
                    for (&col, &g) in &seen {
                        lits.push(if f.contains(&col) { g } else { c.not(g) });
                    }
                    if f.iter().any(|col| !used.contains(col)) {
                        lits.push(c.constant(false));
                    }
                    c.and_all(&lits)
                })
                .collect();
            c.or_all(&parts)
        }
        Objective::Circuit(inner) => {
            if inner.num_inputs != num_states {
                return Err(Error::ArityMismatch { expected: num_states, got: inner.num_inputs });
            }
            return Ok(inner.clone());
        }
        Objective::Reach(_) | Objective::Safety(_) => {
            return Err(Error::Unsupported("reachability/safety objectives depend on Occ".into()))
        }
        Objective::DetBuchiAut(_) | Objective::DetRabinAut(_) => {
            return Err(Error::Unsupported("automaton objectives go through the product".into()))
        }
    };
    c.set_output(out);
    Ok(c)
}

/// The product `G ⋉ A` for agent `agent`: states `(s, q)` numbered
/// `s·|Q| + q`; `tab'((s,q), m) = (tab(s,m), δ(q,s))`. The agent's
/// preference becomes Büchi (repeated states) or Rabin (pairs) over the
/// product; other preferences are lifted through the projection.
pub fn product_with_automaton(
    game: &ConcurrentGame,
    agent: AgentId,
    aut: &DetAutomaton,
) -> Result<(ConcurrentGame, Vec<(StateId, usize)>)> {
    game.check_agent(agent)?;
    let ns = game.num_states();
    if aut.alphabet_size() != ns {
        return Err(Error::ArityMismatch { expected: ns, got: aut.alphabet_size() });
    }
    aut.check(ns)?;
    let nq = aut.num_states;
    let pairs: Vec<(StateId, usize)> = (0..ns).flat_map(|s| (0..nq).map(move |q| (s, q))).collect();
    let id = |s: StateId, q: usize| s * nq + q;
    let lift_q = |qs: &BTreeSet<usize>| -> StateSet {
        pairs.iter().enumerate().filter(|(_, (_, q))| qs.contains(q)).map(|(i, _)| i).collect()
    };
    let own = match &aut.acceptance {
        AutAcceptance::Buchi(r) => Objective::Buchi(lift_q(r)),
        AutAcceptance::Rabin(ps) => Objective::Rabin(ps.iter().map(|(e, f)| (lift_q(e), lift_q(f))).collect()),
    };
    let project: Vec<StateId> = pairs.iter().map(|&(s, _)| s).collect();
    let prefs = game
        .prefs
        .iter()
        .enumerate()
        .map(|(a, p)| if a == agent { Preference::Single(own.clone()) } else { p.lift(&project, pairs.len()) })
        .collect();
    let prod = ConcurrentGame {
        state_names: pairs.iter().map(|&(s, q)| format!("{}.q{}", game.state_names[s], q)).collect(),
        agent_names: game.agent_names.clone(),
        action_names: game.action_names.clone(),
        allow: pairs.iter().map(|&(s, _)| game.allow[s].clone()).collect(),
        tab: pairs
            .iter()
            .map(|&(s, q)| {
                game.tab[s]
                    .iter()
                    .map(|(m, &t)| (m.clone(), id(t, aut.delta[q][s])))
                    .collect()
            })
            .collect(),
        prefs,
    };
    Ok((prod, pairs))
}

/// Restricts `game` to the states reachable from `from`. Returns the
/// pruned game and, for each new state, its old index.
pub fn prune_reachable(game: &ConcurrentGame, from: StateId) -> (ConcurrentGame, Vec<StateId>) {
    let keep: Vec<StateId> = game.reachable_from(from).into_iter().collect();
    let mut new_of = vec![usize::MAX; game.num_states()];
    // keep `from` first so that it becomes state 0
    let mut order = vec![from];
    order.extend(keep.iter().copied().filter(|&s| s != from));
    for (i, &s) in order.iter().enumerate() {
        new_of[s] = i;
    }
    let remap_set = |t: &StateSet| -> StateSet { t.iter().filter(|&&s| new_of[s] != usize::MAX).map(|&s| new_of[s]).collect() };
    let prefs = game.prefs.iter().map(|p| restrict_pref(p, &order, &remap_set)).collect();
    let g = ConcurrentGame {
        state_names: order.iter().map(|&s| game.state_names[s].clone()).collect(),
        agent_names: game.agent_names.clone(),
        action_names: game.action_names.clone(),
        allow: order.iter().map(|&s| game.allow[s].clone()).collect(),
        tab: order
            .iter()
            .map(|&s| game.tab[s].iter().map(|(m, &t)| (m.clone(), new_of[t])).collect())
            .collect(),
        prefs,
    };
    (g, order)
}

fn restrict_pref(p: &Preference, order: &[StateId], remap: &dyn Fn(&StateSet) -> StateSet) -> Preference {
    let pairs = |ps: &Vec<(StateSet, StateSet)>| ps.iter().map(|(q, r)| (remap(q), remap(r))).collect();
    let aut = |a: &DetAutomaton| DetAutomaton {
        num_states: a.num_states,
        delta: a.delta.iter().map(|row| order.iter().map(|&s| row[s]).collect()).collect(),
        init: a.init,
        acceptance: a.acceptance.clone(),
    };
    match p {
        Preference::Single(o) => Preference::Single(match o {
            Objective::Reach(t) => Objective::Reach(remap(t)),
            Objective::Safety(t) => Objective::Safety(remap(t)),
            Objective::Buchi(t) => Objective::Buchi(remap(t)),
            Objective::CoBuchi(t) => Objective::CoBuchi(remap(t)),
            Objective::Parity(pr) => Objective::Parity(order.iter().map(|&s| pr[s]).collect()),
            Objective::Rabin(ps) => Objective::Rabin(pairs(ps)),
            Objective::Streett(ps) => Objective::Streett(pairs(ps)),
            Objective::Muller { colors, accepting } => Objective::Muller {
                colors: order.iter().map(|&s| colors[s]).collect(),
                accepting: accepting.clone(),
            },
            Objective::Circuit(c) => {
                // unreachable states are never visited: their inputs are false
                let mut nc = BoolCircuit::new(order.len());
                let ins: Vec<usize> = (0..c.num_inputs)
                    .map(|k| match order.iter().position(|&s| s == k) {
                        Some(i) => nc.input(i),
                        None => nc.constant(false),
                    })
                    .collect();
                let out = nc.embed(c, &ins);
                nc.set_output(out);
                Objective::Circuit(nc)
            }
            Objective::DetBuchiAut(a) => Objective::DetBuchiAut(aut(a)),
            Objective::DetRabinAut(a) => Objective::DetRabinAut(aut(a)),
        }),
        Preference::OrderedBuchi { targets, preorder } => Preference::OrderedBuchi {
            targets: targets.iter().map(remap).collect(),
            preorder: preorder.clone(),
        },
        Preference::OrderedReach { targets, preorder } => Preference::OrderedReach {
            targets: targets.iter().map(remap).collect(),
            preorder: preorder.clone(),
        },
    }
}

/// Product tracking the set of visited states, reachable from
/// `(from, {from})` (which becomes state 0). Ordered reachability
/// preferences become ordered Büchi preferences over
/// `T'_i = {(s,S) | S ∩ T_i ≠ ∅}`.
pub fn visited_set_product(game: &ConcurrentGame, from: StateId) -> Result<(ConcurrentGame, Vec<(StateId, u64)>)> {
    game.check_state(from)?;
    let ns = game.num_states();
    if ns > 64 {
        return Err(Error::GuardExceeded(format!("{ns} states for the visited-set product (max 64)")));
    }
    for p in &game.prefs {
        if !matches!(p, Preference::OrderedReach { .. }) {
            return Err(Error::Unsupported("visited-set product needs ordered reachability preferences".into()));
        }
    }
    let mut ids: HashMap<(StateId, u64), usize> = HashMap::new();
    let mut nodes: Vec<(StateId, u64)> = vec![(from, 1u64 << from)];
    ids.insert(nodes[0], 0);
    let mut tab: Vec<BTreeMap<Vec<usize>, StateId>> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (s, set) = nodes[i];
        let mut row = BTreeMap::new();
        for (m, &t) in &game.tab[s] {
            let key = (t, set | 1u64 << t);
            let id = *ids.entry(key).or_insert_with(|| {
                nodes.push(key);
                nodes.len() - 1
            });
            row.insert(m.clone(), id);
        }
        tab.push(row);
        i += 1;
    }
    let prefs = game
        .prefs
        .iter()
        .map(|p| match p {
            Preference::OrderedReach { targets, preorder } => Preference::OrderedBuchi {
                targets: targets
                    .iter()
                    .map(|t| {
                        let tm = t.iter().fold(0u64, |m, &s| m | 1u64 << s);
                        (0..nodes.len()).filter(|&k| nodes[k].1 & tm != 0).collect()
                    })
                    .collect(),
                preorder: preorder.clone(),
            },
            _ => unreachable!("checked above"),
        })
        .collect();
    let names = nodes
        .iter()
        .map(|&(s, set)| {
            let members: Vec<&str> = (0..ns).filter(|&x| set >> x & 1 == 1).map(|x| game.state_names[x].as_str()).collect();
            format!("{}[{}]", game.state_names[s], members.join(","))
        })
        .collect();
    let g = ConcurrentGame {
        state_names: names,
        agent_names: game.agent_names.clone(),
        action_names: game.action_names.clone(),
        allow: nodes.iter().map(|&(s, _)| game.allow[s].clone()).collect(),
        tab,
        prefs,
    };
    Ok((g, nodes))
}

/// Checks that `relation` is a game simulation of `g1` by `g2`: for each
/// related pair `(s, s')` and move `m`, some move `m'` keeps the
/// successors related and shrinks every suspect set as required.
pub fn check_game_simulation(g1: &ConcurrentGame, g2: &ConcurrentGame, relation: &[(StateId, StateId)]) -> bool {
    if g1.num_agents() != g2.num_agents() {
        return false;
    }
    let rel: BTreeSet<(StateId, StateId)> = relation.iter().copied().collect();
    for &(s, s2) in &rel {
        for m in g1.legal_moves(s) {
            let t1 = g1.succ(s, &m);
            let ok = g2.legal_moves(s2).into_iter().any(|m2| {
                if !rel.contains(&(t1, g2.succ(s2, &m2))) {
                    return false;
                }
                (0..g2.num_states()).all(|t2| {
                    let sp2 = suspects_unchecked(g2, s2, t2, &m2);
                    rel.iter()
                        .filter(|&&(_, y)| y == t2)
                        .any(|&(t, _)| sp2.is_subset(suspects_unchecked(g1, s, t, &m)))
                })
            });
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Two-player arena for the value problem of `agent`: vertex `s` (owned by
/// Eve, standing for the agent) for each state, and a coalition vertex for
/// each `(s, a)` with `a` allowed to the agent.
#[derive(Clone, Debug)]
pub struct ValueArena {
    pub arena: TurnArena,
    /// Game state each vertex projects to.
    pub state_of: Vec<StateId>,
    /// `vertex_of_state[s]` is the agent vertex of `s`.
    pub vertex_of_state: Vec<usize>,
}

pub fn sequentialize_for_value(game: &ConcurrentGame, agent: AgentId) -> Result<ValueArena> {
    game.check_agent(agent)?;
    let ns = game.num_states();
    let mut owner = vec![Player::Eve; ns];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); ns];
    let mut state_of: Vec<StateId> = (0..ns).collect();
    for s in 0..ns {
        for &a in &game.allow[s][agent] {
            let v = owner.len();
            owner.push(Player::Adam);
            state_of.push(s);
            succ[s].push(v);
            let outs: BTreeSet<StateId> = game.tab[s]
                .iter()
                .filter(|(m, _)| m[agent] == a)
                .map(|(_, &t)| t)
                .collect();
            succ.push(outs.into_iter().collect());
        }
    }
    Ok(ValueArena { arena: TurnArena::new(owner, succ)?, state_of, vertex_of_state: (0..ns).collect() })
}
