//! Concurrent game model: states, agents, actions, the explicit transition
//! table and lasso plays.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::objectives::Preference;

pub type StateId = usize;
pub type AgentId = usize;
pub type ActionId = usize;

/// One action per agent, indexed by agent id.
pub type MoveProfile = Vec<ActionId>;

pub type StateSet = BTreeSet<StateId>;

/// Maximum number of agents; agent sets are stored as a 32-bit mask.
pub const MAX_AGENTS: usize = 32;

/// A set of agents encoded as a bit mask (bit `i` is agent `i`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AgentSet(pub u32);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    pub fn full(n: usize) -> AgentSet {
        if n >= 32 {
            AgentSet(u32::MAX)
        } else {
            AgentSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(a: AgentId) -> AgentSet {
        AgentSet(1 << a)
    }

    pub fn contains(self, a: AgentId) -> bool {
        self.0 >> a & 1 == 1
    }

    pub fn insert(&mut self, a: AgentId) {
        self.0 |= 1 << a;
    }

    pub fn remove(&mut self, a: AgentId) {
        self.0 &= !(1 << a);
    }

    pub fn with(self, a: AgentId) -> AgentSet {
        AgentSet(self.0 | 1 << a)
    }

    pub fn intersect(self, o: AgentSet) -> AgentSet {
        AgentSet(self.0 & o.0)
    }

    pub fn union(self, o: AgentSet) -> AgentSet {
        AgentSet(self.0 | o.0)
    }

    pub fn minus(self, o: AgentSet) -> AgentSet {
        AgentSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: AgentSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = AgentId> {
        (0..32).filter(move |&a| self.contains(a))
    }

    /// All subsets of `Agt` (with `n` agents) ordered by size, then by
    /// the lexicographic order of their member lists.
    pub fn subsets_by_size(n: usize) -> Vec<AgentSet> {
        let mut all: Vec<AgentSet> = (0..(1u32 << n)).map(AgentSet).collect();
        all.sort_by_key(|s| (s.len(), s.iter().collect::<Vec<_>>()));
        all
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite concurrent game with an explicit transition table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrentGame {
    pub state_names: Vec<String>,
    pub agent_names: Vec<String>,
    pub action_names: Vec<String>,
    /// `allow[s][a]` is the sorted list of actions agent `a` may play at `s`.
    pub allow: Vec<Vec<Vec<ActionId>>>,
    /// `tab[s]` maps each legal move profile at `s` to its successor.
    pub tab: Vec<BTreeMap<MoveProfile, StateId>>,
    pub prefs: Vec<Preference>,
}

impl ConcurrentGame {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agent_names.len()
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::full(self.num_agents())
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agent_names.iter().position(|n| n == name)
    }

    pub fn check_state(&self, s: StateId) -> Result<()> {
        if s < self.num_states() {
            Ok(())
        } else {
            Err(Error::UnknownState(s.to_string()))
        }
    }

    pub fn check_agent(&self, a: AgentId) -> Result<()> {
        if a < self.num_agents() {
            Ok(())
        } else {
            Err(Error::UnknownAgent(a.to_string()))
        }
    }

    /// Legal move profiles at `s` in lexicographic order.
    pub fn legal_moves(&self, s: StateId) -> Vec<MoveProfile> {
        let mut out = vec![Vec::new()];
        for a in 0..self.num_agents() {
            let mut next = Vec::new();
            for prefix in &out {
                for &act in &self.allow[s][a] {
                    let mut m = prefix.clone();
                    m.push(act);
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    pub fn is_legal(&self, s: StateId, m: &[ActionId]) -> bool {
        m.len() == self.num_agents()
            && m.iter()
                .enumerate()
                .all(|(a, act)| self.allow[s][a].binary_search(act).is_ok())
    }

    /// Successor of `s` under the legal move `m`.
    pub fn succ(&self, s: StateId, m: &[ActionId]) -> StateId {
        self.tab[s][m]
    }

    pub fn try_succ(&self, s: StateId, m: &[ActionId]) -> Result<StateId> {
        self.tab
            .get(s)
            .and_then(|t| t.get(m))
            .copied()
            .ok_or_else(|| Error::IllegalMove(format!("{m:?} at state {s}")))
    }

    /// Number of explicit table entries (legal move profiles over all states).
    pub fn tab_size(&self) -> usize {
        self.tab.iter().map(|t| t.len()).sum()
    }

    /// Game size as the sum of states and table entries; every entry is
    /// stored explicitly.
    pub fn size(&self) -> usize {
        self.num_states() + self.tab_size()
    }

    pub fn successors(&self, s: StateId) -> StateSet {
        self.tab[s].values().copied().collect()
    }

    pub fn reachable_from(&self, from: StateId) -> StateSet {
        let mut seen = StateSet::new();
        let mut stack = vec![from];
        seen.insert(from);
        while let Some(s) = stack.pop() {
            for &t in self.tab[s].values() {
                if seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        seen
    }

    pub fn move_label(&self, m: &[ActionId]) -> String {
        let parts: Vec<&str> = m.iter().map(|&a| self.action_names[a].as_str()).collect();
        format!("<{}>", parts.join(","))
    }
}

/// Lists every violated invariant of `game`; empty iff the game is valid.
pub fn validate_game(game: &ConcurrentGame) -> Vec<String> {
    let mut out = Vec::new();
    let ns = game.num_states();
    let na = game.num_agents();
    if game.prefs.len() != na {
        out.push(format!(
            "{} preferences given for {} agents",
            game.prefs.len(),
            na
        ));
    }
    if game.allow.len() != ns || game.tab.len() != ns {
        out.push("allow/tab not indexed by every state".to_string());
        return out;
    }
    let mut allow_ok = true;
    for s in 0..ns {
        if game.allow[s].len() != na {
            out.push(format!("allow of state {} does not list every agent", game.state_names[s]));
            allow_ok = false;
            continue;
        }
        for a in 0..na {
            let acts = &game.allow[s][a];
            if acts.is_empty() {
                out.push(format!(
                    "allow({}, {}) is empty",
                    game.state_names[s], game.agent_names[a]
                ));
                allow_ok = false;
            }
            if let Some(&bad) = acts.iter().find(|&&x| x >= game.action_names.len()) {
                out.push(format!(
                    "allow({}, {}) references unknown action {bad}",
                    game.state_names[s], game.agent_names[a]
                ));
                allow_ok = false;
            }
            if acts.windows(2).any(|w| w[0] >= w[1]) {
                out.push(format!(
                    "allow({}, {}) is not a sorted set",
                    game.state_names[s], game.agent_names[a]
                ));
                allow_ok = false;
            }
        }
    }
    if !allow_ok {
        return out;
    }
    for s in 0..ns {
        for m in game.legal_moves(s) {
            match game.tab[s].get(&m) {
                None => out.push(format!(
                    "tab missing entry for state {} move {}",
                    game.state_names[s],
                    game.move_label(&m)
                )),
                Some(&t) if t >= ns => out.push(format!(
                    "tab({}, {}) references unknown state {t}",
                    game.state_names[s],
                    game.move_label(&m)
                )),
                _ => {}
            }
        }
        for m in game.tab[s].keys() {
            if !game.is_legal(s, m) {
                out.push(format!(
                    "tab entry for illegal move {m:?} at state {}",
                    game.state_names[s]
                ));
            }
        }
    }
    for (a, p) in game.prefs.iter().enumerate() {
        for v in p.violations(ns) {
            out.push(format!("preference of {}: {v}", game.agent_names.get(a).map_or("?", |x| x)));
        }
    }
    out
}

/// Whether some legal move at `s` leads to `t`.
pub fn edge_exists(game: &ConcurrentGame, s: StateId, t: StateId) -> Result<bool> {
    game.check_state(s)?;
    game.check_state(t)?;
    Ok(game.tab[s].values().any(|&x| x == t))
}

/// An ultimately periodic play `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Lasso {
    pub prefix: Vec<StateId>,
    pub cycle: Vec<StateId>,
}

impl Lasso {
    pub fn new(prefix: Vec<StateId>, cycle: Vec<StateId>) -> Lasso {
        Lasso { prefix, cycle }
    }

    /// Rotates the cycle to its lexicographically least rotation, moving
    /// the skipped cycle states onto the end of the prefix.
    pub fn normalized(&self) -> Lasso {
        let (shift, _) = least_rotation(&self.cycle);
        let mut prefix = self.prefix.clone();
        prefix.extend_from_slice(&self.cycle[..shift]);
        let mut cycle = self.cycle[shift..].to_vec();
        cycle.extend_from_slice(&self.cycle[..shift]);
        Lasso { prefix, cycle }
    }

    pub fn occ(&self) -> StateSet {
        self.prefix.iter().chain(&self.cycle).copied().collect()
    }

    pub fn inf(&self) -> StateSet {
        self.cycle.iter().copied().collect()
    }

    /// The full sequence prefix followed by one copy of the cycle.
    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.prefix.iter().chain(&self.cycle).copied()
    }
}

/// Index of the lexicographically least rotation of `v` and that rotation.
pub fn least_rotation<T: Ord + Clone>(v: &[T]) -> (usize, Vec<T>) {
    let n = v.len();
    let mut best = 0;
    for i in 1..n {
        let a = v[i..].iter().chain(&v[..i]);
        let b = v[best..].iter().chain(&v[..best]);
        if a.lt(b) {
            best = i;
        }
    }
    let mut rot = v[best..].to_vec();
    rot.extend_from_slice(&v[..best]);
    (best, rot)
}

/// Checks every consecutive pair of `lasso` (including the seam and the
/// wrap-around) against the table.
pub fn check_lasso(game: &ConcurrentGame, lasso: &Lasso) -> Result<()> {
    if lasso.cycle.is_empty() {
        return Err(Error::InvalidLasso("empty cycle".into()));
    }
    let seq: Vec<StateId> = lasso.states().chain(std::iter::once(lasso.cycle[0])).collect();
    for &s in &seq {
        game.check_state(s)?;
    }
    for w in seq.windows(2) {
        if !edge_exists(game, w[0], w[1])? {
            return Err(Error::InvalidLasso(format!(
                "no move from {} to {}",
                game.state_names[w[0]], game.state_names[w[1]]
            )));
        }
    }
    Ok(())
}

/// Occurrence and recurrence sets of a valid lasso.
pub fn lasso_sets(game: &ConcurrentGame, lasso: &Lasso) -> Result<(StateSet, StateSet)> {
    check_lasso(game, lasso)?;
    Ok((lasso.occ(), lasso.inf()))
}

/// Builder for games whose transition table is given per state.
#[derive(Clone, Debug, Default)]
pub struct GameBuilder {
    state_names: Vec<String>,
    agent_names: Vec<String>,
    action_names: Vec<String>,
    allow: Vec<Vec<Vec<ActionId>>>,
    tab: Vec<BTreeMap<MoveProfile, StateId>>,
}

impl GameBuilder {
    pub fn new(states: &[&str], agents: &[&str], actions: &[&str]) -> GameBuilder {
        GameBuilder::with_names(
            states.iter().map(|s| s.to_string()).collect(),
            agents.iter().map(|s| s.to_string()).collect(),
            actions.iter().map(|s| s.to_string()).collect(),
        )
    }

    /// Every agent is allowed only the first action everywhere until
    /// `allow` is called.
    pub fn with_names(states: Vec<String>, agents: Vec<String>, actions: Vec<String>) -> GameBuilder {
        let ns = states.len();
        let na = agents.len();
        GameBuilder {
            allow: vec![vec![vec![0]; na]; ns],
            tab: vec![BTreeMap::new(); ns],
            state_names: states,
            agent_names: agents,
            action_names: actions,
        }
    }

    pub fn allow(&mut self, s: StateId, a: AgentId, acts: &[ActionId]) -> &mut Self {
        let mut v = acts.to_vec();
        v.sort_unstable();
        v.dedup();
        self.allow[s][a] = v;
        self
    }

    pub fn set(&mut self, s: StateId, m: &[ActionId], t: StateId) -> &mut Self {
        self.tab[s].insert(m.to_vec(), t);
        self
    }

    /// Turn-based helper: `owner` picks among `succs` (action `i` leads to
    /// `succs[i]`), everyone else has the single action 0.
    pub fn turn(&mut self, s: StateId, owner: AgentId, succs: &[StateId]) -> &mut Self {
        let na = self.agent_names.len();
        for a in 0..na {
            self.allow[s][a] = vec![0];
        }
        self.allow[s][owner] = (0..succs.len()).collect();
        self.tab[s].clear();
        for (i, &t) in succs.iter().enumerate() {
            let mut m = vec![0; na];
            m[owner] = i;
            self.tab[s].insert(m, t);
        }
        self
    }

    pub fn build(&self, prefs: Vec<Preference>) -> Result<ConcurrentGame> {
        let g = ConcurrentGame {
            state_names: self.state_names.clone(),
            agent_names: self.agent_names.clone(),
            action_names: self.action_names.clone(),
            allow: self.allow.clone(),
            tab: self.tab.clone(),
            prefs,
        };
        let v = validate_game(&g);
        if v.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidGame(v))
        }
    }
}

/// Builds a game from a successor function over all legal profiles.
pub fn game_from_fn(
    state_names: Vec<String>,
    agent_names: Vec<String>,
    action_names: Vec<String>,
    allow: Vec<Vec<Vec<ActionId>>>,
    mut tab: impl FnMut(StateId, &[ActionId]) -> StateId,
    prefs: Vec<Preference>,
) -> Result<ConcurrentGame> {
    let mut g = ConcurrentGame {
        tab: vec![BTreeMap::new(); state_names.len()],
        state_names,
        agent_names,
        action_names,
        allow,
        prefs,
    };
    for s in 0..g.num_states() {
        for m in g.legal_moves(s) {
            let t = tab(s, &m);
            g.tab[s].insert(m, t);
        }
    }
    let v = validate_game(&g);
    if v.is_empty() {
        Ok(g)
    } else {
        Err(Error::InvalidGame(v))
    }
}
