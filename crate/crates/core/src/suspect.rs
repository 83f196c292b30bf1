//! The suspect arena: Eve proposes moves, Adam picks successors, and the
//! suspect set records which agents could have caused each deviation.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{AgentSet, ConcurrentGame, MoveProfile, StateId, StateSet};
use crate::objectives::{BoolCircuit, Objective, Preference};
use crate::objectives::parity_to_rabin;
use crate::reductions::objective_to_inf_circuit;
use crate::solvers::{
    solve_by_layers, solve_cobuchi, solve_conj_buchi, solve_conj_reach, solve_generic_inf, solve_safety,
    Player, TurnArena, WinningRegion,
};

/// Agents that could have sent `s` to `s2` by changing only their own
/// action in `m`.
pub fn suspects(game: &ConcurrentGame, s: StateId, s2: StateId, m: &[usize]) -> Result<AgentSet> {
    game.check_state(s)?;
    game.check_state(s2)?;
    if !game.is_legal(s, m) {
        return Err(Error::IllegalMove(format!("{m:?} at state {}", game.state_names[s])));
    }
    Ok(suspects_unchecked(game, s, s2, m))
}

pub(crate) fn suspects_unchecked(game: &ConcurrentGame, s: StateId, s2: StateId, m: &[usize]) -> AgentSet {
    let mut out = AgentSet::EMPTY;
    let mut alt = m.to_vec();
    for a in 0..game.num_agents() {
        for &act in &game.allow[s][a] {
            alt[a] = act;
            if game.tab[s][&alt] == s2 {
                out.insert(a);
                break;
            }
        }
        alt[a] = m[a];
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SuspectVertex {
    Eve { state: StateId, suspects: AgentSet },
    Adam { state: StateId, suspects: AgentSet, mv: MoveProfile },
}

impl SuspectVertex {
    pub fn state(&self) -> StateId {
        match self {
            SuspectVertex::Eve { state, .. } | SuspectVertex::Adam { state, .. } => *state,
        }
    }

    pub fn suspects(&self) -> AgentSet {
        match self {
            SuspectVertex::Eve { suspects, .. } | SuspectVertex::Adam { suspects, .. } => *suspects,
        }
    }

    pub fn is_eve(&self) -> bool {
        matches!(self, SuspectVertex::Eve { .. })
    }
}

/// The reachable part of the suspect game from `Eve(from, Agt)`.
#[derive(Clone, Debug)]
pub struct SuspectArena {
    pub vertices: Vec<SuspectVertex>,
    pub arena: TurnArena,
    pub index: HashMap<SuspectVertex, usize>,
    pub initial: usize,
    /// For Adam vertices, the successor reached by obeying.
    pub obey: Vec<Option<usize>>,
    pub num_agents: usize,
}

impl SuspectArena {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn eve(&self, state: StateId, suspects: AgentSet) -> Option<usize> {
        self.index.get(&SuspectVertex::Eve { state, suspects }).copied()
    }

    pub fn adam(&self, state: StateId, suspects: AgentSet, mv: &[usize]) -> Option<usize> {
        self.index
            .get(&SuspectVertex::Adam { state, suspects, mv: mv.to_vec() })
            .copied()
    }

    pub fn full_agents(&self) -> AgentSet {
        AgentSet::full(self.num_agents)
    }

    /// Layer key of each vertex: its suspect set.
    pub fn layers(&self) -> Vec<u64> {
        self.vertices.iter().map(|v| v.suspects().0 as u64).collect()
    }

    /// Obey moves at `Eve(s, Agt)`: (Adam vertex, move, successor state).
    pub fn obey_moves(&self, s: StateId) -> Vec<(usize, MoveProfile, StateId)> {
        let Some(e) = self.eve(s, self.full_agents()) else {
            return Vec::new();
        };
        self.arena.succ[e]
            .iter()
            .map(|&a| match &self.vertices[a] {
                SuspectVertex::Adam { mv, .. } => {
                    let o = self.obey[a].expect("adam vertex");
                    (a, mv.clone(), self.vertices[o].state())
                }
                SuspectVertex::Eve { .. } => unreachable!("eve successor of eve vertex"),
            })
            .collect()
    }

    /// Non-obey successors of an Adam vertex.
    pub fn deviations(&self, adam: usize) -> Vec<usize> {
        let o = self.obey[adam];
        self.arena.succ[adam].iter().copied().filter(|&w| Some(w) != o).collect()
    }

    pub fn to_dot(&self, game: &ConcurrentGame) -> String {
        let set = |p: AgentSet| -> String {
            let names: Vec<&str> = p.iter().map(|a| game.agent_names[a].as_str()).collect();
            format!("{{{}}}", names.join(","))
        };
        let mut s = String::from("digraph suspect {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            match v {
                SuspectVertex::Eve { state, suspects } => {
                    let _ = writeln!(
                        s,
                        "  v{i} [shape=ellipse, label=\"{} | {}\"];",
                        game.state_names[*state],
                        set(*suspects)
                    );
                }
                SuspectVertex::Adam { state, suspects, mv } => {
                    let _ = writeln!(
                        s,
                        "  v{i} [shape=box, label=\"{} | {} | {}\"];",
                        game.state_names[*state],
                        set(*suspects),
                        game.move_label(mv)
                    );
                }
            }
        }
        for v in 0..self.len() {
            for &w in &self.arena.succ[v] {
                if self.obey[v] == Some(w) {
                    let _ = writeln!(s, "  v{v} -> v{w} [style=bold];");
                } else {
                    let _ = writeln!(s, "  v{v} -> v{w};");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Builds the suspect arena reachable from `Eve(from, Agt)`.
pub fn build_arena(game: &ConcurrentGame, from: StateId) -> Result<SuspectArena> {
    game.check_state(from)?;
    if game.num_agents() == 0 {
        return Err(Error::Unsupported("game without agents".into()));
    }
    let ns = game.num_states();
    let moves: Vec<Vec<MoveProfile>> = (0..ns).map(|s| game.legal_moves(s)).collect();
    // susp[s][mi][t]
    let susp: Vec<Vec<Vec<AgentSet>>> = (0..ns)
        .map(|s| {
            moves[s]
                .iter()
                .map(|m| (0..ns).map(|t| suspects_unchecked(game, s, t, m)).collect())
                .collect()
        })
        .collect();
    let mut vertices: Vec<SuspectVertex> = Vec::new();
    let mut index: HashMap<SuspectVertex, usize> = HashMap::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut obey: Vec<Option<usize>> = Vec::new();
    let mut intern = |v: SuspectVertex, vertices: &mut Vec<SuspectVertex>| -> usize {
        if let Some(&i) = index.get(&v) {
            return i;
        }
        vertices.push(v.clone());
        index.insert(v, vertices.len() - 1);
        vertices.len() - 1
    };
    let root = intern(SuspectVertex::Eve { state: from, suspects: game.all_agents() }, &mut vertices);
    let mut i = 0;
    while i < vertices.len() {
        let v = vertices[i].clone();
        let (out, ob) = match &v {
            SuspectVertex::Eve { state, suspects } => {
                let out = moves[*state]
                    .iter()
                    .map(|m| {
                        intern(
                            SuspectVertex::Adam { state: *state, suspects: *suspects, mv: m.clone() },
                            &mut vertices,
                        )
                    })
                    .collect();
                (out, None)
            }
            SuspectVertex::Adam { state, suspects, mv } => {
                let mi = moves[*state].iter().position(|m| m == mv).expect("legal move");
                let target = game.succ(*state, mv);
                let mut out = Vec::with_capacity(ns);
                let mut ob = None;
                for t in 0..ns {
                    let p = suspects.intersect(susp[*state][mi][t]);
                    let w = intern(SuspectVertex::Eve { state: t, suspects: p }, &mut vertices);
                    if t == target {
                        ob = Some(w);
                    }
                    out.push(w);
                }
                (out, ob)
            }
        };
        succ.push(out);
        obey.push(ob);
        i += 1;
    }
    let owner = vertices
        .iter()
        .map(|v| if v.is_eve() { Player::Eve } else { Player::Adam })
        .collect();
    let arena = TurnArena::new(owner, succ)?;
    Ok(SuspectArena { vertices, arena, index, initial: root, obey, num_agents: game.num_agents() })
}

/// The bound `(|Stat|+|Tab|)·(1+(|Stat|+|Tab|)·|Tab|)` on reachable vertices.
pub fn arena_size_bound(game: &ConcurrentGame) -> usize {
    let st = game.num_states() + game.tab_size();
    st * (1 + st * game.tab_size())
}

/// Eve's winning condition in the suspect arena for a fixed reference
/// class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EveWinCondition {
    SafetyT(Vec<bool>),
    ConjReach(Vec<Vec<bool>>),
    CoBuchiT(Vec<bool>),
    ConjBuchi(Vec<Vec<bool>>),
    StreettPairs(Vec<(Vec<bool>, Vec<bool>)>),
    InfCircuit(BoolCircuit),
}

/// Objective classes with a loser-set based Eve condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionClass {
    Reach,
    Safety,
    Buchi,
    CoBuchi,
    Rabin,
    Circuit,
}

fn single(game: &ConcurrentGame, a: usize) -> Result<&Objective> {
    match &game.prefs[a] {
        Preference::Single(o) => Ok(o),
        _ => Err(Error::Unsupported("ordered preference in a single-objective class".into())),
    }
}

fn target_of(game: &ConcurrentGame, a: usize) -> Result<&StateSet> {
    match single(game, a)? {
        Objective::Reach(t) | Objective::Safety(t) | Objective::Buchi(t) | Objective::CoBuchi(t) => Ok(t),
        _ => Err(Error::Unsupported("objective does not match the condition class".into())),
    }
}

/// Rabin pairs of an agent whose objective is Rabin or parity.
pub fn rabin_pairs(game: &ConcurrentGame, a: usize) -> Result<Vec<(StateSet, StateSet)>> {
    match single(game, a)? {
        Objective::Rabin(p) => Ok(p.clone()),
        Objective::Parity(p) => Ok(parity_to_rabin(p)),
        _ => Err(Error::Unsupported("objective is neither Rabin nor parity".into())),
    }
}

/// Eve's condition in `H(G, L)` for loser set `losers`.
pub fn eve_condition(
    game: &ConcurrentGame,
    arena: &SuspectArena,
    class: ConditionClass,
    losers: AgentSet,
) -> Result<EveWinCondition> {
    let n = arena.len();
    let verts = &arena.vertices;
    let hit_losers = |sets: &[(usize, &StateSet)]| -> Vec<bool> {
        verts
            .iter()
            .map(|v| {
                sets.iter()
                    .any(|(a, t)| v.suspects().contains(*a) && t.contains(&v.state()))
            })
            .collect()
    };
    let lose_list: Vec<usize> = losers.iter().filter(|&a| a < game.num_agents()).collect();
    Ok(match class {
        ConditionClass::Reach | ConditionClass::Buchi => {
            let sets: Vec<(usize, &StateSet)> =
                lose_list.iter().map(|&a| Ok((a, target_of(game, a)?))).collect::<Result<_>>()?;
            let t = hit_losers(&sets);
            if class == ConditionClass::Reach {
                EveWinCondition::SafetyT(t)
            } else {
                EveWinCondition::CoBuchiT(t)
            }
        }
        ConditionClass::Safety | ConditionClass::CoBuchi => {
            let mut lists = Vec::new();
            for &a in &lose_list {
                let t = target_of(game, a)?;
                lists.push(
                    verts
                        .iter()
                        .map(|v| !v.suspects().contains(a) || t.contains(&v.state()))
                        .collect(),
                );
            }
            if class == ConditionClass::Safety {
                EveWinCondition::ConjReach(lists)
            } else {
                EveWinCondition::ConjBuchi(lists)
            }
        }
        ConditionClass::Rabin => {
            let mut pairs = Vec::new();
            for &a in &lose_list {
                for (q, r) in rabin_pairs(game, a)? {
                    let qv = verts
                        .iter()
                        .map(|v| v.is_eve() && v.suspects().contains(a) && q.contains(&v.state()))
                        .collect();
                    let rv = verts
                        .iter()
                        .map(|v| v.is_eve() && (!v.suspects().contains(a) || r.contains(&v.state())))
                        .collect();
                    pairs.push((qv, rv));
                }
            }
            EveWinCondition::StreettPairs(pairs)
        }
        ConditionClass::Circuit => {
            let mut c = BoolCircuit::new(n);
            let mut layers: Vec<AgentSet> = verts.iter().filter(|v| v.is_eve()).map(|v| v.suspects()).collect();
            layers.sort();
            layers.dedup();
            let mut negs = Vec::new();
            for &a in &lose_list {
                let ca = objective_to_inf_circuit(single(game, a)?, game.num_states())?;
                let mut ds = Vec::new();
                for &p in layers.iter().filter(|p| p.contains(a)) {
                    let ins: Vec<usize> = (0..game.num_states())
                        .map(|s| match arena.eve(s, p) {
                            Some(v) => c.input(v),
                            None => c.constant(false),
                        })
                        .collect();
                    let body = c.embed(&ca, &ins);
                    let active = c.or_all(&ins);
                    ds.push(c.and(body, active));
                }
                let e = c.or_all(&ds);
                negs.push(c.not(e));
            }
            let out = c.and_all(&negs);
            c.set_output(out);
            EveWinCondition::InfCircuit(c)
        }
    })
}

/// Solves Eve's condition on the suspect arena.
pub fn solve_eve_condition(arena: &SuspectArena, cond: &EveWinCondition) -> Result<WinningRegion> {
    let a = &arena.arena;
    match cond {
        EveWinCondition::SafetyT(t) => Ok(solve_safety(a, t)),
        EveWinCondition::ConjReach(ts) => solve_conj_reach(a, ts),
        EveWinCondition::CoBuchiT(t) => Ok(solve_cobuchi(a, t)),
        EveWinCondition::ConjBuchi(ts) => solve_conj_buchi(a, ts),
        EveWinCondition::StreettPairs(pairs) => {
            // colors are signatures of Eve vertices over all pair sets
            let sig = |v: usize| -> u64 {
                pairs.iter().enumerate().fold(0u64, |m, (i, (q, r))| {
                    m | (q[v] as u64) << (2 * i) | (r[v] as u64) << (2 * i + 1)
                })
            };
            if pairs.len() > 32 {
                return Err(Error::GuardExceeded(format!("{} Streett pairs (max 32)", pairs.len())));
            }
            let win = solve_layers_by_signature(arena, &|v| sig(v), &|sigs: &[u64]| {
                pairs.iter().enumerate().all(|(i, _)| {
                    let seen_q = sigs.iter().any(|s| s >> (2 * i) & 1 == 1);
                    let seen_r = sigs.iter().any(|s| s >> (2 * i + 1) & 1 == 1);
                    !seen_q || seen_r
                })
            })?;
            Ok(WinningRegion { win, strategy: None })
        }
        EveWinCondition::InfCircuit(c) => {
            let win = solve_layers_by_signature(arena, &|v| v as u64, &|vs: &[u64]| {
                let mut ins = vec![false; c.num_inputs];
                for &v in vs {
                    ins[v as usize] = true;
                }
                c.eval_raw(&ins)
            })?;
            Ok(WinningRegion { win, strategy: None })
        }
    }
}

/// Layer-by-layer generic Inf solving where each Eve vertex gets the
/// color class `sig(v)` (Adam vertices are uncolored) and `accept`
/// receives the distinct signatures seen infinitely often.
pub fn solve_layers_by_signature(
    arena: &SuspectArena,
    sig: &dyn Fn(usize) -> u64,
    accept: &dyn Fn(&[u64]) -> bool,
) -> Result<Vec<bool>> {
    let layers = arena.layers();
    solve_by_layers(
        &arena.arena,
        &layers,
        &|k| k.count_ones() as u64,
        &mut |sub, orig, fixed| {
            let mut classes: Vec<u64> = Vec::new();
            let colors: Vec<Option<usize>> = orig
                .iter()
                .map(|o| {
                    let v = (*o)?;
                    if !arena.vertices[v].is_eve() {
                        return None;
                    }
                    let s = sig(v);
                    Some(match classes.iter().position(|&x| x == s) {
                        Some(i) => i,
                        None => {
                            classes.push(s);
                            classes.len() - 1
                        }
                    })
                })
                .collect();
            let nc = classes.len();
            let r = solve_generic_inf(
                sub,
                &colors,
                nc,
                &mut |mask| {
                    let seen: Vec<u64> = (0..nc).filter(|&i| mask >> i & 1 == 1).map(|i| classes[i]).collect();
                    accept(&seen)
                },
                fixed,
            )?;
            Ok(r.win)
        },
    )
}

/// Deviation vertices along an obey lasso: for each position (index into
/// `steps`), every non-obey successor of the Adam vertex taken there.
pub fn deviation_targets(
    arena: &SuspectArena,
    steps: &[(StateId, MoveProfile)],
) -> Result<Vec<(usize, usize)>> {
    let full = arena.full_agents();
    let mut out = Vec::new();
    for (pos, (s, m)) in steps.iter().enumerate() {
        let adam = arena
            .adam(*s, full, m)
            .ok_or_else(|| Error::InvalidLasso(format!("position {pos} leaves the obey edges")))?;
        for d in arena.deviations(adam) {
            out.push((pos, d));
        }
    }
    Ok(out)
}
