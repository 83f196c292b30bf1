//! Brute-force reference procedures for tiny games, written without the
//! suspect-game solvers: an expanded arena that tracks suspects, visited
//! relevant states and automaton states, solved layer by layer with a
//! McNaughton–Zielonka recursion for explicit Muller conditions.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::game::{AgentId, ConcurrentGame, Lasso, MoveProfile, StateId, StateSet};
use crate::nash::{compute_certificates, Bounds, NEWitness, Step};
use crate::objectives::{eval_objective, payoff_vector, leq, Objective, PayoffVector, Preference, Value};
use crate::solvers::check_memoryless_winning;
use crate::suspect::build_arena;

/// Limits of [`brute_force_ne`].
pub const MAX_STATES: usize = 5;
pub const MAX_AGENTS: usize = 3;
pub const MAX_ACTIONS: usize = 2;
/// Limit on expanded-arena vertices for witness checking.
pub const MAX_EXPANDED: usize = 400_000;
const MAX_LAYER_COLORS: usize = 14;

// ---------------------------------------------------------------------------
// Layered Muller games

/// A turn-based arena whose vertices are grouped into layers, where edges
/// only stay in a layer or go to a layer with a smaller index, and every
/// vertex carries a color.
struct LayeredArena {
    eve: Vec<bool>,
    succ: Vec<Vec<usize>>,
    layer: Vec<usize>,
    color: Vec<usize>,
    num_layers: usize,
}

/// Eve's winning vertices; `acc(layer, colors)` decides plays that stay in
/// `layer` and see exactly `colors` (sorted) infinitely often.
fn solve_layered(a: &LayeredArena, acc: &mut dyn FnMut(usize, &[usize]) -> bool) -> Result<Vec<bool>> {
    let n = a.eve.len();
    let mut by_layer: Vec<Vec<usize>> = vec![Vec::new(); a.num_layers];
    for v in 0..n {
        by_layer[a.layer[v]].push(v);
    }
    let mut win: Vec<Option<bool>> = vec![None; n];
    for (l, verts) in by_layer.iter().enumerate() {
        if verts.is_empty() {
            continue;
        }
        let local: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut palette: Vec<usize> = verts.iter().map(|&v| a.color[v]).collect();
        palette.sort_unstable();
        palette.dedup();
        if palette.len() > MAX_LAYER_COLORS {
            return Err(Error::GuardExceeded(format!("{} colors in one layer (max {MAX_LAYER_COLORS})", palette.len())));
        }
        let m = verts.len();
        let (win_sink, lose_sink) = (m, m + 1);
        let (cw, cl) = (palette.len(), palette.len() + 1);
        let mut g = Muller { eve: Vec::new(), succ: Vec::new(), color: Vec::new(), memo: HashMap::new() };
        for &v in verts {
            let mut out = Vec::new();
            for &w in &a.succ[v] {
                match local.get(&w) {
                    Some(&i) => out.push(i),
                    None => {
                        if a.layer[w] >= l {
                            return Err(Error::Unsupported("layer order violated".into()));
                        }
                        out.push(if win[w].expect("earlier layer") { win_sink } else { lose_sink });
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            g.eve.push(a.eve[v]);
            g.succ.push(out);
            g.color.push(palette.binary_search(&a.color[v]).expect("palette"));
        }
        g.eve.extend([true, true]);
        g.succ.push(vec![win_sink]);
        g.succ.push(vec![lose_sink]);
        g.color.extend([cw, cl]);
        let mut local_acc = |mask: u32| -> bool {
            let real: Vec<usize> = (0..palette.len()).filter(|&i| mask >> i & 1 == 1).map(|i| palette[i]).collect();
            let w = mask >> cw & 1 == 1;
            let lo = mask >> cl & 1 == 1;
            match (real.is_empty(), w, lo) {
                (true, true, false) => true,
                (true, _, _) => false,
                _ => acc(l, &real),
            }
        };
        let all = vec![true; m + 2];
        let res = g.solve(&all, &mut local_acc);
        for (i, &v) in verts.iter().enumerate() {
            win[v] = Some(res[i]);
        }
    }
    Ok(win.into_iter().map(|b| b.expect("solved")).collect())
}

struct Muller {
    eve: Vec<bool>,
    succ: Vec<Vec<usize>>,
    color: Vec<usize>,
    memo: HashMap<u32, bool>,
}

impl Muller {
    fn acc(&mut self, mask: u32, f: &mut dyn FnMut(u32) -> bool) -> bool {
        if let Some(&b) = self.memo.get(&mask) {
            return b;
        }
        let b = f(mask);
        self.memo.insert(mask, b);
        b
    }

    /// Vertices of `within` from which `player` forces a visit to `target`.
    fn attr(&self, within: &[bool], target: &[bool], player_eve: bool) -> Vec<bool> {
        let mut out: Vec<bool> = (0..within.len()).map(|v| within[v] && target[v]).collect();
        loop {
            let mut changed = false;
            for v in 0..within.len() {
                if !within[v] || out[v] {
                    continue;
                }
                let succs = self.succ[v].iter().filter(|&&w| within[w]);
                let take = if self.eve[v] == player_eve {
                    succs.clone().any(|&w| out[w])
                } else {
                    succs.clone().all(|&w| out[w])
                };
                if take {
                    out[v] = true;
                    changed = true;
                }
            }
            if !changed {
                return out;
            }
        }
    }

    /// Eve's winning part of the subgame `g`.
    fn solve(&mut self, g: &[bool], f: &mut dyn FnMut(u32) -> bool) -> Vec<bool> {
        let n = g.len();
        if !g.iter().any(|&b| b) {
            return vec![false; n];
        }
        let cmask = (0..n).filter(|&v| g[v]).fold(0u32, |m, v| m | 1 << self.color[v]);
        let sigma_eve = self.acc(cmask, f);
        let target_acc = !sigma_eve;
        // children: maximal D ⊊ C with acc(D) != acc(C)
        let mut family = Vec::new();
        let mut d = (cmask.wrapping_sub(1)) & cmask;
        while d != 0 {
            if self.acc(d, f) == target_acc {
                family.push(d);
            }
            d = (d - 1) & cmask;
        }
        let children: Vec<u32> = family
            .iter()
            .copied()
            .filter(|&x| !family.iter().any(|&y| y != x && x & y == x))
            .collect();
        let mut cur = g.to_vec();
        let mut opp = vec![false; n];
        'outer: loop {
            for &dm in &children {
                let outside: Vec<bool> = (0..n).map(|v| cur[v] && dm >> self.color[v] & 1 == 0).collect();
                let a = self.attr(&cur, &outside, sigma_eve);
                let x: Vec<bool> = (0..n).map(|v| cur[v] && !a[v]).collect();
                if !x.iter().any(|&b| b) {
                    continue;
                }
                let sub_eve = self.solve(&x, f);
                let opp_part: Vec<bool> = (0..n).map(|v| x[v] && sub_eve[v] == !sigma_eve).collect();
                if opp_part.iter().any(|&b| b) {
                    let b = self.attr(&cur, &opp_part, !sigma_eve);
                    for v in 0..n {
                        if b[v] {
                            opp[v] = true;
                            cur[v] = false;
                        }
                    }
                    if !cur.iter().any(|&b| b) {
                        break 'outer;
                    }
                    continue 'outer;
                }
            }
            break;
        }
        (0..n).map(|v| if sigma_eve { cur[v] } else { opp[v] }).collect()
    }
}

// ---------------------------------------------------------------------------
// Expanded deviation arena

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    state: StateId,
    suspects: u32,
    visited: u64,
    qs: Vec<usize>,
    mv: Option<usize>,
}

/// Relevant-state mask and automaton agents of a game.
struct Tracking {
    relevant: u64,
    auto_agents: Vec<AgentId>,
}

fn tracking(game: &ConcurrentGame) -> Result<Tracking> {
    if game.num_states() > 64 {
        return Err(Error::GuardExceeded("more than 64 states".into()));
    }
    let mut relevant = 0u64;
    let mut auto_agents = Vec::new();
    for (a, p) in game.prefs.iter().enumerate() {
        match p {
            Preference::Single(Objective::Reach(t) | Objective::Safety(t)) => {
                relevant |= t.iter().fold(0, |m, &s| m | 1 << s)
            }
            Preference::OrderedReach { targets, .. } => {
                for t in targets {
                    relevant |= t.iter().fold(0, |m, &s| m | 1 << s);
                }
            }
            Preference::Single(Objective::DetBuchiAut(_) | Objective::DetRabinAut(_)) => auto_agents.push(a),
            _ => {}
        }
    }
    Ok(Tracking { relevant, auto_agents })
}

struct Expanded {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    succ: Vec<Vec<usize>>,
    moves: Vec<Vec<MoveProfile>>,
    track: Tracking,
}

fn automaton(game: &ConcurrentGame, a: AgentId) -> &crate::objectives::DetAutomaton {
    match &game.prefs[a] {
        Preference::Single(Objective::DetBuchiAut(x) | Objective::DetRabinAut(x)) => x,
        _ => unreachable!("automaton agent"),
    }
}

fn own_suspects(game: &ConcurrentGame, s: StateId, t: StateId, m: &[usize]) -> u32 {
    let mut out = 0;
    for a in 0..game.num_agents() {
        let mut alt = m.to_vec();
        if game.allow[s][a].iter().any(|&b| {
            alt[a] = b;
            game.tab[s].get(&alt) == Some(&t)
        }) {
            out |= 1 << a;
        }
    }
    out
}

fn expand(game: &ConcurrentGame, from: StateId, limit: usize) -> Result<Expanded> {
    let track = tracking(game)?;
    let ns = game.num_states();
    let moves: Vec<Vec<MoveProfile>> = (0..ns).map(|s| game.legal_moves(s)).collect();
    let full = (1u32 << game.num_agents()) - 1;
    let init = Node {
        state: from,
        suspects: full,
        visited: (1u64 << from) & track.relevant,
        qs: track.auto_agents.iter().map(|&a| automaton(game, a).init).collect(),
        mv: None,
    };
    let mut ex = Expanded { nodes: vec![init.clone()], index: HashMap::from([(init, 0)]), succ: Vec::new(), moves, track };
    let mut i = 0;
    while i < ex.nodes.len() {
        if ex.nodes.len() > limit {
            return Err(Error::GuardExceeded(format!("expanded arena exceeds {limit} vertices")));
        }
        let x = ex.nodes[i].clone();
        let mut targets = Vec::new();
        match x.mv {
            None => {
                for mi in 0..ex.moves[x.state].len() {
                    targets.push(Node { mv: Some(mi), ..x.clone() });
                }
            }
            Some(mi) => {
                let m = ex.moves[x.state][mi].clone();
                let qs: Vec<usize> = ex
                    .track
                    .auto_agents
                    .iter()
                    .zip(&x.qs)
                    .map(|(&a, &q)| automaton(game, a).delta[q][x.state])
                    .collect();
                for t in 0..ns {
                    targets.push(Node {
                        state: t,
                        suspects: x.suspects & own_suspects(game, x.state, t, &m),
                        visited: x.visited | ((1u64 << t) & ex.track.relevant),
                        qs: qs.clone(),
                        mv: None,
                    });
                }
            }
        }
        let mut out = Vec::new();
        for y in targets {
            let id = match ex.index.get(&y) {
                Some(&id) => id,
                None => {
                    ex.nodes.push(y.clone());
                    ex.index.insert(y, ex.nodes.len() - 1);
                    ex.nodes.len() - 1
                }
            };
            out.push(id);
        }
        ex.succ.push(out);
        i += 1;
    }
    Ok(ex)
}

impl Expanded {
    fn obey_successor(&self, game: &ConcurrentGame, adam: usize) -> usize {
        let x = &self.nodes[adam];
        let m = &self.moves[x.state][x.mv.expect("adam node")];
        let t = game.succ(x.state, m);
        self.succ[adam][t]
    }

    fn layered(&self) -> (LayeredArena, Vec<(u32, u64)>, HashMap<(StateId, Vec<usize>), usize>) {
        let mut keys: Vec<(u32, u64)> = self.nodes.iter().map(|x| (x.suspects, x.visited)).collect();
        keys.sort_by_key(|&(p, s)| (p.count_ones(), std::cmp::Reverse(s.count_ones()), p, s));
        keys.dedup();
        let layer_of: HashMap<(u32, u64), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut colors: HashMap<(StateId, Vec<usize>), usize> = HashMap::new();
        let color = self
            .nodes
            .iter()
            .map(|x| {
                let k = (x.state, x.qs.clone());
                let next = colors.len();
                *colors.entry(k).or_insert(next)
            })
            .collect();
        let arena = LayeredArena {
            eve: self.nodes.iter().map(|x| x.mv.is_none()).collect(),
            succ: self.succ.clone(),
            layer: self.nodes.iter().map(|x| layer_of[&(x.suspects, x.visited)]).collect(),
            color,
            num_layers: keys.len(),
        };
        (arena, keys, colors)
    }
}

/// Value of `agent` for a play that ends in visited set `visited`, sees
/// `inf` infinitely often, and whose automaton components see `qsets`.
fn value_in(
    game: &ConcurrentGame,
    track: &Tracking,
    agent: AgentId,
    visited: u64,
    inf: &StateSet,
    qsets: &[BTreeSet<usize>],
) -> Value {
    let occ: StateSet = (0..game.num_states()).filter(|&s| visited >> s & 1 == 1).chain(inf.iter().copied()).collect();
    match &game.prefs[agent] {
        Preference::Single(Objective::DetBuchiAut(x) | Objective::DetRabinAut(x)) => {
            let k = track.auto_agents.iter().position(|&a| a == agent).expect("tracked");
            Value::Bool(x.accepts_inf(&qsets[k]))
        }
        Preference::Single(o) => Value::Bool(eval_objective(&occ, inf, o).expect("non-automaton")),
        p => Value::Vector(payoff_vector(&occ, inf, p).expect("ordered")),
    }
}

/// Eve's winning nodes of the expanded arena for the payoff profile `v`.
fn deviation_region(game: &ConcurrentGame, ex: &Expanded, v: &[Value]) -> Result<Vec<bool>> {
    let (arena, keys, colors) = ex.layered();
    let mut desc: Vec<(StateId, Vec<usize>)> = vec![(0, Vec::new()); colors.len()];
    for (k, &c) in &colors {
        desc[c] = k.clone();
    }
    let nq = ex.track.auto_agents.len();
    solve_layered(&arena, &mut |l, cs| {
        let (p, visited) = keys[l];
        let inf: StateSet = cs.iter().map(|&c| desc[c].0).collect();
        let mut qsets = vec![BTreeSet::new(); nq];
        for &c in cs {
            for (k, &q) in desc[c].1.iter().enumerate() {
                qsets[k].insert(q);
            }
        }
        (0..game.num_agents())
            .filter(|&a| p >> a & 1 == 1)
            .all(|a| game.prefs[a].leq(&value_in(game, &ex.track, a, visited, &inf, &qsets), &v[a]))
    })
}

// ---------------------------------------------------------------------------
// Brute-force NE search

/// The reference answer: the realized payoff profile and outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    pub payoffs: Vec<Value>,
    pub lasso: Lasso,
    pub steps: Vec<Step>,
}

fn all_profiles(game: &ConcurrentGame, bounds: &Bounds) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for p in &game.prefs {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                p.all_values().into_iter().map(move |v| {
                    let mut x = prefix.clone();
                    x.push(v);
                    x
                })
            })
            .collect();
    }
    out.retain(|prof| bounds.admits(game, prof));
    out
}

/// Searches NE outcomes by enumerating payoff profiles; only for games with
/// at most [`MAX_STATES`] states, [`MAX_AGENTS`] agents and
/// [`MAX_ACTIONS`] actions.
pub fn brute_force_ne(game: &ConcurrentGame, from: StateId, bounds: &Bounds) -> Result<Option<OracleOutcome>> {
    game.check_state(from)?;
    if game.num_states() > MAX_STATES || game.num_agents() > MAX_AGENTS || game.action_names.len() > MAX_ACTIONS {
        return Err(Error::GuardExceeded(format!(
            "oracle handles at most {MAX_STATES} states, {MAX_AGENTS} agents, {MAX_ACTIONS} actions"
        )));
    }
    let ex = expand(game, from, MAX_EXPANDED)?;
    let full = (1u32 << game.num_agents()) - 1;
    for v in all_profiles(game, bounds) {
        let w = deviation_region(game, &ex, &v)?;
        if let Some(found) = exact_lasso(game, &ex, &w, full, &v)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// An obey lasso from the initial node with exactly the payoffs `v`, using
/// only Adam nodes whose deviations are all in `w`.
fn exact_lasso(game: &ConcurrentGame, ex: &Expanded, w: &[bool], full: u32, v: &[Value]) -> Result<Option<OracleOutcome>> {
    // obey graph over Eve nodes with suspects = Agt
    let mut edges: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    let mut seen = vec![false; ex.nodes.len()];
    let mut order = vec![0usize];
    seen[0] = true;
    let mut qi = 0;
    while qi < order.len() {
        let x = order[qi];
        qi += 1;
        let mut out = Vec::new();
        for &adam in &ex.succ[x] {
            let o = ex.obey_successor(game, adam);
            if ex.succ[adam].iter().all(|&d| d == o || w[d]) {
                out.push((o, adam));
                if !seen[o] {
                    seen[o] = true;
                    order.push(o);
                }
            }
        }
        edges.insert(x, out);
    }
    debug_assert!(order.iter().all(|&x| ex.nodes[x].suspects == full));
    let nq = ex.track.auto_agents.len();
    // candidate cycles: strongly connected node subsets, small ones first
    let local: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let adj: Vec<Vec<usize>> = order.iter().map(|x| edges[x].iter().map(|(o, _)| local[o]).collect()).collect();
    for comp in sccs(&adj) {
        if comp.len() > 16 {
            return Err(Error::GuardExceeded(format!("obey component of {} nodes", comp.len())));
        }
        let mut subsets: Vec<u32> = (1..1u32 << comp.len()).collect();
        subsets.sort_by_key(|m| (m.count_ones(), *m));
        for mask in subsets {
            let members: Vec<usize> = (0..comp.len()).filter(|&i| mask >> i & 1 == 1).map(|i| comp[i]).collect();
            if !strongly_connected(&adj, &members) {
                continue;
            }
            let visited = ex.nodes[order[members[0]]].visited;
            let inf: StateSet = members.iter().map(|&i| ex.nodes[order[i]].state).collect();
            let mut qsets = vec![BTreeSet::new(); nq];
            for &i in &members {
                for (k, &q) in ex.nodes[order[i]].qs.iter().enumerate() {
                    qsets[k].insert(q);
                }
            }
            if (0..game.num_agents()).all(|a| value_in(game, &ex.track, a, visited, &inf, &qsets) == v[a]) {
                return Ok(Some(build_outcome(ex, &order, &adj, &edges, &members, v)));
            }
        }
    }
    Ok(None)
}

fn build_outcome(
    ex: &Expanded,
    order: &[usize],
    adj: &[Vec<usize>],
    edges: &HashMap<usize, Vec<(usize, usize)>>,
    members: &[usize],
    v: &[Value],
) -> OracleOutcome {
    let inside = |i: usize| members.contains(&i);
    let path = shortest(adj, 0, &|i| inside(i), &|_| true);
    let entry = *path.last().expect("path");
    // cycle from entry through every member, staying inside
    let mut cycle = vec![entry];
    let mut cur = entry;
    let mut stops: Vec<usize> = members.iter().copied().filter(|&m| m != entry).collect();
    stops.push(entry);
    for stop in stops {
        let starts: Vec<usize> = adj[cur].iter().copied().filter(|&w| inside(w)).collect();
        let mut best: Option<Vec<usize>> = None;
        for s in starts {
            let p = shortest(adj, s, &|i| i == stop, &inside);
            if !p.is_empty() && best.as_ref().map_or(true, |b| p.len() < b.len()) {
                best = Some(p);
            }
        }
        let seg = best.expect("strongly connected");
        cycle.extend_from_slice(&seg);
        cur = stop;
    }
    cycle.pop();
    let label = |a: usize, b: usize| -> MoveProfile {
        let (_, adam) = edges[&order[a]].iter().find(|(o, _)| *o == order[b]).expect("edge");
        let n = &ex.nodes[*adam];
        ex.moves[n.state][n.mv.expect("adam")].clone()
    };
    let seq: Vec<usize> = path.iter().copied().chain(cycle.iter().skip(1).copied()).chain([cycle[0]]).collect();
    let steps: Vec<Step> = seq.windows(2).map(|w| Step { state: ex.nodes[order[w[0]]].state, mv: label(w[0], w[1]) }).collect();
    let pl = path.len() - 1;
    let states: Vec<StateId> = steps.iter().map(|s| s.state).collect();
    OracleOutcome { payoffs: v.to_vec(), lasso: Lasso::new(states[..pl].to_vec(), states[pl..].to_vec()), steps }
}

/// BFS path (vertex list) from `s` to a `goal` vertex through `allowed`
/// vertices; empty if none.
fn shortest(adj: &[Vec<usize>], s: usize, goal: &dyn Fn(usize) -> bool, allowed: &dyn Fn(usize) -> bool) -> Vec<usize> {
    if !allowed(s) {
        return Vec::new();
    }
    let mut parent = vec![usize::MAX; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut q = VecDeque::from([s]);
    seen[s] = true;
    while let Some(v) = q.pop_front() {
        if goal(v) {
            let mut p = vec![v];
            let mut c = v;
            while parent[c] != usize::MAX {
                c = parent[c];
                p.push(c);
            }
            p.reverse();
            return p;
        }
        for &w in &adj[v] {
            if !seen[w] && allowed(w) {
                seen[w] = true;
                parent[w] = v;
                q.push_back(w);
            }
        }
    }
    Vec::new()
}

fn reach_set(adj: &[Vec<usize>], from: usize, members: &[usize], reverse: bool) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &w in members {
            let edge = if reverse { adj[w].contains(&v) } else { adj[v].contains(&w) };
            if edge && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

fn strongly_connected(adj: &[Vec<usize>], members: &[usize]) -> bool {
    let first = members[0];
    if members.len() == 1 {
        return adj[first].contains(&first);
    }
    reach_set(adj, first, members, false).len() == members.len() && reach_set(adj, first, members, true).len() == members.len()
}

/// Plain SCC decomposition by mutual reachability, in order of the
/// smallest member.
fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let all: Vec<usize> = (0..n).collect();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        if assigned[v] {
            continue;
        }
        let fwd = reach_set(adj, v, &all, false);
        let bwd = reach_set(adj, v, &all, true);
        let comp: Vec<usize> = fwd.intersection(&bwd).copied().collect();
        for &c in &comp {
            assigned[c] = true;
        }
        out.push(comp);
    }
    out
}

// ---------------------------------------------------------------------------
// Value problem reference

/// Whether `agent` can ensure a class at least `u` from `from`, solved on
/// an explicit agent-versus-coalition arena.
pub fn brute_force_value(game: &ConcurrentGame, from: StateId, agent: AgentId, u: &Value) -> Result<bool> {
    game.check_state(from)?;
    game.check_agent(agent)?;
    if !game.prefs[agent].is_value_compatible(u) {
        return Err(Error::IncompatibleThreshold(u.to_string()));
    }
    let track = tracking(game)?;
    let ns = game.num_states();
    // nodes: (state, visited, qs, Option<own action>)
    type VNode = (StateId, u64, Vec<usize>, Option<usize>);
    let init: VNode = (
        from,
        (1u64 << from) & track.relevant,
        track.auto_agents.iter().map(|&a| automaton(game, a).init).collect(),
        None,
    );
    let mut nodes = vec![init.clone()];
    let mut index: HashMap<VNode, usize> = HashMap::from([(init, 0)]);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        if nodes.len() > MAX_EXPANDED {
            return Err(Error::GuardExceeded("value arena too large".into()));
        }
        let (s, vis, qs, act) = nodes[i].clone();
        let targets: Vec<VNode> = match act {
            None => game.allow[s][agent].iter().map(|&b| (s, vis, qs.clone(), Some(b))).collect(),
            Some(b) => {
                let nq: Vec<usize> =
                    track.auto_agents.iter().zip(&qs).map(|(&a, &q)| automaton(game, a).delta[q][s]).collect();
                let mut ts: Vec<StateId> =
                    game.legal_moves(s).into_iter().filter(|m| m[agent] == b).map(|m| game.succ(s, &m)).collect();
                ts.sort_unstable();
                ts.dedup();
                ts.into_iter().map(|t| (t, vis | ((1u64 << t) & track.relevant), nq.clone(), None)).collect()
            }
        };
        let mut out = Vec::new();
        for y in targets {
            let id = *index.entry(y.clone()).or_insert_with(|| {
                nodes.push(y);
                nodes.len() - 1
            });
            out.push(id);
        }
        succ.push(out);
        i += 1;
    }
    let mut keys: Vec<u64> = nodes.iter().map(|n| n.1).collect();
    keys.sort_by_key(|&s| (std::cmp::Reverse(s.count_ones()), s));
    keys.dedup();
    let mut colors: HashMap<(StateId, Vec<usize>), usize> = HashMap::new();
    let color: Vec<usize> = nodes
        .iter()
        .map(|n| {
            let next = colors.len();
            *colors.entry((n.0, n.2.clone())).or_insert(next)
        })
        .collect();
    let mut desc = vec![(0usize, Vec::new()); colors.len()];
    for (k, &c) in &colors {
        desc[c] = k.clone();
    }
    let arena = LayeredArena {
        eve: nodes.iter().map(|n| n.3.is_none()).collect(),
        succ,
        layer: nodes.iter().map(|n| keys.iter().position(|&k| k == n.1).expect("key")).collect(),
        color,
        num_layers: keys.len(),
    };
    let _ = ns;
    let nq = track.auto_agents.len();
    let win = solve_layered(&arena, &mut |l, cs| {
        let inf: StateSet = cs.iter().map(|&c| desc[c].0).collect();
        let mut qsets = vec![BTreeSet::new(); nq];
        for &c in cs {
            for (k, &q) in desc[c].1.iter().enumerate() {
                qsets[k].insert(q);
            }
        }
        game.prefs[agent].leq(u, &value_in(game, &track, agent, keys[l], &inf, &qsets))
    })?;
    Ok(win[0])
}

// ---------------------------------------------------------------------------
// Witness checking

/// Independent check of a witness: legality and shape, payoffs and
/// bounds, every deviation along the unrolled outcome winning for Eve,
/// certificate list, and the strategy certificate when present.
pub fn check_witness(game: &ConcurrentGame, from: StateId, bounds: &Bounds, w: &NEWitness) -> Result<bool> {
    game.check_state(from)?;
    if w.from != from || w.cycle.is_empty() || w.payoffs.len() != game.num_agents() {
        return Ok(false);
    }
    let steps: Vec<&Step> = w.steps().collect();
    if steps[0].state != from {
        return Ok(false);
    }
    for (i, st) in steps.iter().enumerate() {
        if st.state >= game.num_states() || st.mv.len() != game.num_agents() || !game.is_legal(st.state, &st.mv) {
            return Ok(false);
        }
        let next = if i + 1 < steps.len() { steps[i + 1].state } else { w.cycle[0].state };
        if game.succ(st.state, &st.mv) != next {
            return Ok(false);
        }
    }
    let lasso = w.lasso();
    let recomputed: Vec<Value> = game.prefs.iter().map(|p| p.value_of_lasso(&lasso)).collect();
    if recomputed != w.payoffs || !bounds.admits(game, &w.payoffs) {
        return Ok(false);
    }
    let ex = expand(game, from, MAX_EXPANDED)?;
    let win = deviation_region(game, &ex, &w.payoffs)?;
    // unroll until (cycle position, node) repeats
    let plen = w.prefix.len();
    let mut node = 0usize;
    let mut pos = 0usize;
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    loop {
        if pos >= plen && !seen.insert((pos - plen, node)) {
            break;
        }
        let st = steps[pos];
        let x = &ex.nodes[node];
        if x.state != st.state {
            return Ok(false);
        }
        let mi = ex.moves[st.state].iter().position(|m| *m == st.mv).expect("legal move");
        let adam = ex.succ[node][mi];
        let o = ex.obey_successor(game, adam);
        if !ex.succ[adam].iter().all(|&d| d == o || win[d]) {
            return Ok(false);
        }
        node = o;
        pos = if pos + 1 < steps.len() { pos + 1 } else { plen };
    }
    let arena = build_arena(game, from)?;
    let owned: Vec<Step> = steps.iter().map(|s| (*s).clone()).collect();
    if compute_certificates(&arena, &owned, &w.payoffs)? != w.certificates {
        return Ok(false);
    }
    if let Some(strategy) = &w.strategy {
        return check_strategy(game, &arena, w, strategy);
    }
    Ok(true)
}

fn check_strategy(
    game: &ConcurrentGame,
    arena: &crate::suspect::SuspectArena,
    w: &NEWitness,
    strategy: &[crate::nash::StrategyEntry],
) -> Result<bool> {
    if !game.prefs.iter().all(|p| matches!(p, Preference::OrderedBuchi { .. })) {
        return Err(Error::Unsupported("strategy certificates are checked for ordered Büchi games".into()));
    }
    let mut strat: Vec<Option<usize>> = vec![None; arena.len()];
    for e in strategy {
        let p = crate::game::AgentSet(e.suspects);
        let (Some(v), Some(a)) = (arena.eve(e.state, p), arena.adam(e.state, p, &e.mv)) else {
            return Ok(false);
        };
        strat[v] = Some(a);
    }
    let starts: Vec<usize> = w
        .certificates
        .iter()
        .map(|c| arena.eve(c.state, crate::game::AgentSet(c.suspects)).expect("certificate vertex"))
        .collect();
    if starts.is_empty() {
        return Ok(true);
    }
    let mut cond = |comp: &[usize]| -> bool {
        let p = arena.vertices[comp[0]].suspects();
        let inf: StateSet = comp.iter().map(|&v| arena.vertices[v].state()).collect();
        p.iter().all(|a| match (&game.prefs[a], &w.payoffs[a]) {
            (Preference::OrderedBuchi { targets, preorder }, Value::Vector(v)) => {
                let got = PayoffVector(targets.iter().map(|t| !t.is_disjoint(&inf)).collect());
                leq(preorder, &got, v)
            }
            _ => false,
        })
    };
    check_memoryless_winning(&arena.arena, &strat, &starts, &mut cond, true)
}
