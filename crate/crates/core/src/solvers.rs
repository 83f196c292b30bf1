//! Two-player turn-based solvers: attractors, safety/reachability,
//! Büchi/co-Büchi, conjunctions, parity (Zielonka), generic Inf-conditions
//! via latest appearance records, the first-repetition search, and
//! memoryless strategy checking.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{has_cycle, strongly_connected_subsets, tarjan_scc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }
}

/// A turn-based arena without dead ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnArena {
    pub owner: Vec<Player>,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
}

impl TurnArena {
    /// Successor lists are sorted and deduplicated. Fails on dead ends.
    pub fn new(owner: Vec<Player>, mut succ: Vec<Vec<usize>>) -> Result<TurnArena> {
        let n = owner.len();
        if succ.len() != n {
            return Err(Error::Unsupported("owner/successor length mismatch".into()));
        }
        let mut pred = vec![Vec::new(); n];
        for (v, s) in succ.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::Unsupported(format!("vertex {v} has no successor")));
            }
            for &w in s.iter() {
                if w >= n {
                    return Err(Error::Unsupported(format!("edge to unknown vertex {w}")));
                }
                pred[w].push(v);
            }
        }
        Ok(TurnArena { owner, succ, pred })
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }
}

/// Vertices won by Eve, with an optional memoryless Eve strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinningRegion {
    pub win: Vec<bool>,
    pub strategy: Option<Vec<Option<usize>>>,
}

fn full(n: usize) -> Vec<bool> {
    vec![true; n]
}

/// Attractor of `target` for `player` inside the subgame `within`, with
/// an attracting choice of `player` (strictly decreasing the attractor
/// rank) for vertices outside `target`.
pub fn attractor_in(
    arena: &TurnArena,
    within: &[bool],
    target: &[bool],
    player: Player,
) -> (Vec<bool>, Vec<Option<usize>>) {
    attractor_ranked(arena, within, target, player)
}

/// Attractor of `target` for `player` over the whole arena.
pub fn attractor(arena: &TurnArena, target: &[bool], player: Player) -> Vec<bool> {
    attractor_in(arena, &full(arena.len()), target, player).0
}

fn attractor_ranked(
    arena: &TurnArena,
    within: &[bool],
    target: &[bool],
    player: Player,
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = arena.len();
    let mut rank = vec![usize::MAX; n];
    let mut count: Vec<usize> = (0..n)
        .map(|v| arena.succ[v].iter().filter(|&&w| within[w]).count())
        .collect();
    let mut frontier = Vec::new();
    for v in 0..n {
        if within[v] && target[v] {
            rank[v] = 0;
            frontier.push(v);
        }
    }
    let mut r = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &w in &frontier {
            for &v in &arena.pred[w] {
                if !within[v] || rank[v] != usize::MAX {
                    continue;
                }
                if arena.owner[v] == player {
                    rank[v] = r + 1;
                    next.push(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        rank[v] = r + 1;
                        next.push(v);
                    }
                }
            }
        }
        frontier = next;
        r += 1;
    }
    let attr: Vec<bool> = rank.iter().map(|&x| x != usize::MAX).collect();
    let mut choice = vec![None; n];
    for v in 0..n {
        if attr[v] && rank[v] > 0 && arena.owner[v] == player {
            choice[v] = arena.succ[v].iter().copied().find(|&w| within[w] && rank[w] < rank[v]);
        }
    }
    (attr, choice)
}

fn lowest_in(arena: &TurnArena, v: usize, set: &[bool]) -> Option<usize> {
    arena.succ[v].iter().copied().find(|&w| set[w])
}

pub fn solve_reach(arena: &TurnArena, target: &[bool]) -> WinningRegion {
    let all = full(arena.len());
    let (win, mut choice) = attractor_ranked(arena, &all, target, Player::Eve);
    for v in 0..arena.len() {
        if win[v] && target[v] && arena.owner[v] == Player::Eve {
            choice[v] = lowest_in(arena, v, &win).or(Some(arena.succ[v][0]));
        }
        if arena.owner[v] != Player::Eve || !win[v] {
            choice[v] = None;
        }
    }
    WinningRegion { win, strategy: Some(choice) }
}

pub fn solve_safety(arena: &TurnArena, avoid: &[bool]) -> WinningRegion {
    let lose = attractor(arena, avoid, Player::Adam);
    let win: Vec<bool> = lose.iter().map(|&b| !b).collect();
    let strategy = (0..arena.len())
        .map(|v| {
            if win[v] && arena.owner[v] == Player::Eve {
                lowest_in(arena, v, &win)
            } else {
                None
            }
        })
        .collect();
    WinningRegion { win, strategy: Some(strategy) }
}

/// Region of `player` for the Büchi condition `target` inside `within`
/// (which must be a trap for neither player to leave), with a memoryless
/// strategy for `player`.
pub fn buchi_for(
    arena: &TurnArena,
    within: &[bool],
    target: &[bool],
    player: Player,
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = arena.len();
    let mut w = within.to_vec();
    loop {
        let t: Vec<bool> = (0..n).map(|v| w[v] && target[v]).collect();
        let (reach, choice) = attractor_ranked(arena, &w, &t, player);
        let rest: Vec<bool> = (0..n).map(|v| w[v] && !reach[v]).collect();
        if !rest.iter().any(|&b| b) {
            let mut strat = choice;
            for v in 0..n {
                if w[v] && t[v] && arena.owner[v] == player {
                    strat[v] = lowest_in(arena, v, &w);
                }
                if !w[v] || arena.owner[v] != player {
                    strat[v] = None;
                }
            }
            return (w, strat);
        }
        let (drop, _) = attractor_ranked(arena, &w, &rest, player.opponent());
        for v in 0..n {
            if drop[v] {
                w[v] = false;
            }
        }
    }
}

pub fn solve_buchi(arena: &TurnArena, target: &[bool]) -> WinningRegion {
    let (win, strat) = buchi_for(arena, &full(arena.len()), target, Player::Eve);
    WinningRegion { win, strategy: Some(strat) }
}

/// Region of `player` for "eventually stay forever inside one of
/// `families`" (a downward-closed Inf condition), with a memoryless
/// strategy. `within` restricts the subgame.
pub fn solve_stay_families(
    arena: &TurnArena,
    within: &[bool],
    families: &[Vec<bool>],
    player: Player,
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = arena.len();
    let mut x = vec![false; n];
    let mut strat: Vec<Option<usize>> = vec![None; n];
    loop {
        let mut y = x.clone();
        let mut safe_choice: Vec<Option<usize>> = vec![None; n];
        for k in families {
            let outside: Vec<bool> = (0..n).map(|v| within[v] && !(k[v] || x[v])).collect();
            let bad = attractor_ranked(arena, within, &outside, player.opponent()).0;
            let safe: Vec<bool> = (0..n).map(|v| within[v] && !bad[v]).collect();
            for v in 0..n {
                if safe[v] && !y[v] {
                    y[v] = true;
                    if arena.owner[v] == player {
                        safe_choice[v] = arena.succ[v].iter().copied().find(|&w| safe[w] && within[w]);
                    }
                }
            }
        }
        let (nx, attr_choice) = attractor_ranked(arena, within, &y, player);
        let grew = (0..n).any(|v| nx[v] && !x[v]);
        for v in 0..n {
            if nx[v] && !x[v] && arena.owner[v] == player {
                strat[v] = if y[v] { safe_choice[v] } else { attr_choice[v] };
            }
        }
        x = nx;
        if !grew {
            break;
        }
    }
    (x, strat)
}

pub fn solve_cobuchi(arena: &TurnArena, avoid_inf: &[bool]) -> WinningRegion {
    let k: Vec<bool> = avoid_inf.iter().map(|&b| !b).collect();
    let (win, strat) = solve_stay_families(arena, &full(arena.len()), &[k], Player::Eve);
    WinningRegion { win, strategy: Some(strat) }
}

/// Conjunction of reachability objectives via the visited-subset
/// expansion; the region is read at the initial subset of each vertex.
pub fn solve_conj_reach(arena: &TurnArena, targets: &[Vec<bool>]) -> Result<WinningRegion> {
    let k = targets.len();
    if k > 20 {
        return Err(Error::GuardExceeded(format!("{k} reachability targets (max 20)")));
    }
    let n = arena.len();
    let fullmask = (1u32 << k) - 1;
    let mask_of = |v: usize| (0..k).filter(|&i| targets[i][v]).fold(0u32, |m, i| m | 1 << i);
    let mut ids: HashMap<(usize, u32), usize> = HashMap::new();
    let mut nodes: Vec<(usize, u32)> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let key = (v, mask_of(v));
        if !ids.contains_key(&key) {
            ids.insert(key, nodes.len());
            nodes.push(key);
        }
    }
    let mut i = 0;
    while i < nodes.len() {
        let (v, m) = nodes[i];
        let mut out = Vec::new();
        for &w in &arena.succ[v] {
            let key = (w, m | mask_of(w));
            let id = *ids.entry(key).or_insert_with(|| {
                nodes.push(key);
                nodes.len() - 1
            });
            out.push(id);
        }
        succ.push(out);
        i += 1;
    }
    let owner = nodes.iter().map(|&(v, _)| arena.owner[v]).collect();
    let prod = TurnArena::new(owner, succ)?;
    let target: Vec<bool> = nodes.iter().map(|&(_, m)| m == fullmask).collect();
    let r = solve_reach(&prod, &target);
    let win = (0..n).map(|v| r.win[ids[&(v, mask_of(v))]]).collect();
    Ok(WinningRegion { win, strategy: None })
}

/// Conjunction of Büchi objectives via the counter product:
/// `(v, i) -> (w, i')` with `i' = i+1 mod k` when `v ∈ T_i`.
pub fn solve_conj_buchi(arena: &TurnArena, targets: &[Vec<bool>]) -> Result<WinningRegion> {
    let k = targets.len();
    let n = arena.len();
    if k == 0 {
        return Ok(WinningRegion { win: full(n), strategy: None });
    }
    let id = |v: usize, i: usize| v * k + i;
    let mut owner = Vec::with_capacity(n * k);
    let mut succ = Vec::with_capacity(n * k);
    let mut acc = Vec::with_capacity(n * k);
    for v in 0..n {
        for i in 0..k {
            let ni = if targets[i][v] { (i + 1) % k } else { i };
            owner.push(arena.owner[v]);
            succ.push(arena.succ[v].iter().map(|&w| id(w, ni)).collect());
            acc.push(i == k - 1 && targets[i][v]);
        }
    }
    let prod = TurnArena::new(owner, succ)?;
    let r = solve_buchi(&prod, &acc);
    Ok(WinningRegion { win: (0..n).map(|v| r.win[id(v, 0)]).collect(), strategy: None })
}

/// Result of a parity game: Eve's region and both memoryless strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParitySolution {
    pub win: Vec<bool>,
    pub eve_strategy: Vec<Option<usize>>,
    pub adam_strategy: Vec<Option<usize>>,
}

/// Min-even parity game solved by Zielonka's recursion.
pub fn solve_parity_zielonka(arena: &TurnArena, priorities: &[usize]) -> ParitySolution {
    let n = arena.len();
    let mut choice = vec![None; n];
    let win_eve = zielonka(arena, &full(n), priorities, &mut choice);
    let mut eve_strategy = vec![None; n];
    let mut adam_strategy = vec![None; n];
    for v in 0..n {
        match (arena.owner[v], win_eve[v]) {
            (Player::Eve, true) => eve_strategy[v] = choice[v],
            (Player::Adam, false) => adam_strategy[v] = choice[v],
            _ => {}
        }
    }
    ParitySolution { win: win_eve, eve_strategy, adam_strategy }
}

fn player_of_priority(p: usize) -> Player {
    if p % 2 == 0 {
        Player::Eve
    } else {
        Player::Adam
    }
}

/// Returns Eve's region inside `g`; writes, for every vertex won by its
/// owner, that owner's choice.
fn zielonka(arena: &TurnArena, g: &[bool], prio: &[usize], choice: &mut [Option<usize>]) -> Vec<bool> {
    let n = arena.len();
    let Some(p) = (0..n).filter(|&v| g[v]).map(|v| prio[v]).min() else {
        return vec![false; n];
    };
    let sigma = player_of_priority(p);
    let u: Vec<bool> = (0..n).map(|v| g[v] && prio[v] == p).collect();
    let (a, a_choice) = attractor_ranked(arena, g, &u, sigma);
    let rest: Vec<bool> = (0..n).map(|v| g[v] && !a[v]).collect();
    let sub_eve = zielonka(arena, &rest, prio, choice);
    let sub_opp: Vec<bool> = (0..n)
        .map(|v| rest[v] && (sub_eve[v] != (sigma == Player::Eve)))
        .collect();
    if !sub_opp.iter().any(|&b| b) {
        for v in 0..n {
            if a[v] && arena.owner[v] == sigma {
                choice[v] = if u[v] { lowest_in(arena, v, g) } else { a_choice[v] };
            }
        }
        return (0..n).map(|v| g[v] && sigma == Player::Eve).collect();
    }
    let opp = sigma.opponent();
    let (b, b_choice) = attractor_ranked(arena, g, &sub_opp, opp);
    for v in 0..n {
        if b[v] && !sub_opp[v] && arena.owner[v] == opp {
            choice[v] = b_choice[v];
        }
    }
    let rest2: Vec<bool> = (0..n).map(|v| g[v] && !b[v]).collect();
    let sub2_eve = zielonka(arena, &rest2, prio, choice);
    (0..n)
        .map(|v| {
            if !g[v] {
                false
            } else if b[v] {
                opp == Player::Eve
            } else {
                sub2_eve[v]
            }
        })
        .collect()
}

/// Maximum number of colors accepted by [`solve_generic_inf`].
pub const GENERIC_INF_MAX_COLORS: usize = 9;

/// Inf-condition over colors: Eve wins a play iff `accept` holds on the
/// set of colors (as a bit mask) seen infinitely often. Vertices with
/// `fixed = Some(b)` are absorbing sinks won by Eve iff `b`. Solved by a
/// latest-appearance-record expansion to a parity game.
pub fn solve_generic_inf(
    arena: &TurnArena,
    colors: &[Option<usize>],
    num_colors: usize,
    accept: &mut dyn FnMut(u32) -> bool,
    fixed: &[Option<bool>],
) -> Result<WinningRegion> {
    if num_colors > GENERIC_INF_MAX_COLORS {
        return Err(Error::GuardExceeded(format!(
            "{num_colors} colors for the appearance-record expansion (max {GENERIC_INF_MAX_COLORS})"
        )));
    }
    let n = arena.len();
    let mut memo: HashMap<u32, bool> = HashMap::new();
    let mut acc = |m: u32| *memo.entry(m).or_insert_with(|| accept(m));
    let base = if acc(0) { 0 } else { 1 };
    let top = 2 * num_colors + 2;
    // record encoding: 4 bits per entry (color + 1), most recent first
    let rec_push = |rec: u64, c: usize| -> (u64, Option<usize>) {
        let mut items = Vec::new();
        let mut r = rec;
        while r != 0 {
            items.push((r & 15) as usize - 1);
            r >>= 4;
        }
        let hit = items.iter().position(|&x| x == c);
        if let Some(h) = hit {
            items.remove(h);
        }
        items.insert(0, c);
        let code = items.iter().rev().fold(0u64, |acc, &x| acc << 4 | (x as u64 + 1));
        (code, hit)
    };
    let prefix_mask = |rec: u64, len: usize| -> u32 {
        let mut m = 0;
        let mut r = rec;
        for _ in 0..len {
            m |= 1 << ((r & 15) - 1);
            r >>= 4;
        }
        m
    };
    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    struct Key {
        v: usize,
        rec: u64,
        prio: usize,
    }
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let enter = |v: usize, rec: u64, acc: &mut dyn FnMut(u32) -> bool| -> Key {
        if let Some(b) = fixed[v] {
            return Key { v, rec: 0, prio: if b { top } else { top + 1 } };
        }
        match colors[v] {
            None => Key { v, rec, prio: base },
            Some(c) => {
                let (nrec, hit) = rec_push(rec, c);
                let prio = match hit {
                    None => base,
                    Some(h) => 2 * (h + 1) + usize::from(!acc(prefix_mask(nrec, h + 1))),
                };
                Key { v, rec: nrec, prio }
            }
        }
    };
    let mut init = Vec::with_capacity(n);
    for v in 0..n {
        let k = enter(v, 0, &mut acc);
        let id = *ids.entry(k).or_insert_with(|| {
            keys.push(k);
            keys.len() - 1
        });
        init.push(id);
    }
    let mut i = 0;
    while i < keys.len() {
        let k = keys[i];
        let mut out = Vec::new();
        if fixed[k.v].is_some() {
            out.push(i);
        } else {
            for &w in &arena.succ[k.v] {
                let nk = enter(w, k.rec, &mut acc);
                let id = *ids.entry(nk).or_insert_with(|| {
                    keys.push(nk);
                    keys.len() - 1
                });
                out.push(id);
            }
        }
        succ.push(out);
        i += 1;
    }
    let owner = keys.iter().map(|k| arena.owner[k.v]).collect();
    let prod = TurnArena::new(owner, succ)?;
    // max-even priorities turned into min-even ones
    let d = top + 2;
    let prio: Vec<usize> = keys.iter().map(|k| d - k.prio).collect();
    let sol = solve_parity_zielonka(&prod, &prio);
    Ok(WinningRegion { win: init.iter().map(|&id| sol.win[id]).collect(), strategy: None })
}

/// Runs `solve_layer` on each layer of an arena whose edges only go to
/// layers ranked lower or to the same layer. Exits from a layer lead to
/// fixed sinks carrying the already computed result. `solve_layer` gets
/// the sub-arena, the original vertex of each sub-vertex (`None` for the
/// two sinks) and the fixed sink values, and returns Eve's region.
pub fn solve_by_layers(
    arena: &TurnArena,
    layer_of: &[u64],
    rank_of: &dyn Fn(u64) -> u64,
    solve_layer: &mut dyn FnMut(&TurnArena, &[Option<usize>], &[Option<bool>]) -> Result<Vec<bool>>,
) -> Result<Vec<bool>> {
    let n = arena.len();
    let mut layers: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        layers.entry((rank_of(layer_of[v]), layer_of[v])).or_default().push(v);
    }
    let mut win: Vec<Option<bool>> = vec![None; n];
    for ((rank, key), verts) in layers {
        let mut local = vec![usize::MAX; n];
        for (i, &v) in verts.iter().enumerate() {
            local[v] = i;
        }
        let m = verts.len();
        let (win_sink, lose_sink) = (m, m + 1);
        let mut owner = Vec::with_capacity(m + 2);
        let mut succ = Vec::with_capacity(m + 2);
        for &v in &verts {
            owner.push(arena.owner[v]);
            let mut out = Vec::new();
            for &w in &arena.succ[v] {
                if layer_of[w] == key {
                    out.push(local[w]);
                } else {
                    if rank_of(layer_of[w]) > rank {
                        return Err(Error::Unsupported("edge to a higher layer".into()));
                    }
                    out.push(if win[w].expect("lower layer solved") { win_sink } else { lose_sink });
                }
            }
            succ.push(out);
        }
        owner.push(Player::Eve);
        succ.push(vec![win_sink]);
        owner.push(Player::Eve);
        succ.push(vec![lose_sink]);
        let sub = TurnArena::new(owner, succ)?;
        let mut orig: Vec<Option<usize>> = verts.iter().map(|&v| Some(v)).collect();
        orig.push(None);
        orig.push(None);
        let mut fixed = vec![None; m];
        fixed.push(Some(true));
        fixed.push(Some(false));
        let res = solve_layer(&sub, &orig, &fixed)?;
        for (i, &v) in verts.iter().enumerate() {
            win[v] = Some(res[i]);
        }
    }
    Ok(win.into_iter().map(|b| b.expect("all layers solved")).collect())
}

/// Alternating search on an arena whose vertices carry monotone
/// components `(S, P)` (S non-decreasing, P non-increasing along every
/// edge): each branch stops at the first repeated vertex and is won by
/// Eve iff that vertex is in `target`.
pub fn first_repetition_solve(
    arena: &TurnArena,
    components: &[(u64, u32)],
    init: usize,
    target: &[bool],
) -> Result<bool> {
    check_monotone_components(arena, components)?;
    if let Some(win) = solve_constant_classes(arena, components, target) {
        return Ok(win[init]);
    }
    let mut memo: HashMap<(usize, Vec<usize>), bool> = HashMap::new();
    Ok(first_rep(arena, components, target, init, &mut Vec::new(), &mut memo))
}

/// [`first_repetition_solve`] from every vertex at once.
pub fn first_repetition_regions(arena: &TurnArena, components: &[(u64, u32)], target: &[bool]) -> Result<Vec<bool>> {
    check_monotone_components(arena, components)?;
    if let Some(win) = solve_constant_classes(arena, components, target) {
        return Ok(win);
    }
    let mut memo: HashMap<(usize, Vec<usize>), bool> = HashMap::new();
    Ok((0..arena.len()).map(|v| first_rep(arena, components, target, v, &mut Vec::new(), &mut memo)).collect())
}

fn check_monotone_components(arena: &TurnArena, components: &[(u64, u32)]) -> Result<()> {
    for v in 0..arena.len() {
        let (s, p) = components[v];
        for &w in &arena.succ[v] {
            let (s2, p2) = components[w];
            if s & !s2 != 0 || p2 & !p != 0 {
                return Err(Error::Monotonicity(format!("edge {v} -> {w} breaks monotone components")));
            }
        }
    }
    Ok(())
}

/// When the target is constant on each component class, a branch that
/// stays in a class repeats there and gets the class value, so each class
/// is an attractor game towards its exits. Classes are solved in
/// decreasing order of `|S| - |P|`, which strictly grows along edges
/// between classes. Returns `None` if the target is not class-constant.
fn solve_constant_classes(arena: &TurnArena, components: &[(u64, u32)], target: &[bool]) -> Option<Vec<bool>> {
    let mut classes: BTreeMap<(u64, u32), (bool, Vec<usize>)> = BTreeMap::new();
    for v in 0..arena.len() {
        let e = classes.entry(components[v]).or_insert((target[v], Vec::new()));
        if e.0 != target[v] {
            return None;
        }
        e.1.push(v);
    }
    let key = |&(s, p): &(u64, u32)| s.count_ones() as i64 - p.count_ones() as i64;
    let mut order: Vec<(&(u64, u32), &(bool, Vec<usize>))> = classes.iter().collect();
    order.sort_by_key(|(c, _)| std::cmp::Reverse(key(c)));
    let mut win: Vec<Option<bool>> = vec![None; arena.len()];
    for (comp, (stay, verts)) in order {
        // `decided[v]`: the opponent of the class value forces an exit
        // with the opposite outcome from v
        let flip = !*stay;
        let mut decided: HashMap<usize, bool> = HashMap::new();
        loop {
            let mut changed = false;
            for &v in verts {
                if decided.contains_key(&v) {
                    continue;
                }
                let good = |w: &usize| -> bool {
                    if components[*w] == *comp {
                        decided.contains_key(w)
                    } else {
                        win[*w].expect("later class solved") == flip
                    }
                };
                // the player who profits from `flip` is Eve iff flip is true
                let forcer_is_eve = flip;
                let mine = (arena.owner[v] == Player::Eve) == forcer_is_eve;
                let hit = if mine { arena.succ[v].iter().any(good) } else { arena.succ[v].iter().all(good) };
                if hit {
                    decided.insert(v, true);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for &v in verts {
            win[v] = Some(if decided.contains_key(&v) { flip } else { *stay });
        }
    }
    Some(win.into_iter().map(|b| b.expect("all classes solved")).collect())
}

fn first_rep(
    arena: &TurnArena,
    comps: &[(u64, u32)],
    target: &[bool],
    v: usize,
    path: &mut Vec<usize>,
    memo: &mut HashMap<(usize, Vec<usize>), bool>,
) -> bool {
    if path.contains(&v) {
        return target[v];
    }
    // vertices of earlier layers can never be revisited
    let mut layer_path: Vec<usize> = path.iter().copied().filter(|&u| comps[u] == comps[v]).collect();
    layer_path.sort_unstable();
    let key = (v, layer_path);
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let saved = std::mem::take(path);
    path.extend(key.1.iter().copied());
    path.push(v);
    let eve = arena.owner[v] == Player::Eve;
    let mut result = !eve;
    for &w in &arena.succ[v] {
        let r = first_rep(arena, comps, target, w, path, memo);
        if r == eve {
            result = eve;
            break;
        }
    }
    *path = saved;
    memo.insert(key, result);
    result
}

/// Checks a memoryless Eve strategy from `from`: every cycle structure of
/// the restricted graph reachable from `from` must satisfy `condition`
/// (given the set of vertices visited infinitely often). With
/// `downward_closed`, checking each reachable SCC's full vertex set
/// suffices; otherwise every strongly connected subset is checked.
pub fn check_memoryless_winning(
    arena: &TurnArena,
    strategy: &[Option<usize>],
    from: &[usize],
    condition: &mut dyn FnMut(&[usize]) -> bool,
    downward_closed: bool,
) -> Result<bool> {
    let n = arena.len();
    let mut restricted: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    for &f in from {
        if !seen[f] {
            seen[f] = true;
            stack.push(f);
        }
    }
    while let Some(v) = stack.pop() {
        let out = if arena.owner[v] == Player::Eve {
            match strategy.get(v).copied().flatten() {
                Some(w) if arena.succ[v].contains(&w) => vec![w],
                Some(w) => return Err(Error::Unsupported(format!("strategy picks non-edge {v} -> {w}"))),
                None => return Err(Error::Unsupported(format!("strategy undefined at vertex {v}"))),
            }
        } else {
            arena.succ[v].clone()
        };
        for &w in &out {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
        restricted[v] = out;
    }
    for comp in tarjan_scc(&restricted, &|v| seen[v]) {
        if !has_cycle(&restricted, &comp) {
            continue;
        }
        if downward_closed {
            if !condition(&comp) {
                return Ok(false);
            }
        } else {
            if comp.len() > 16 {
                return Err(Error::GuardExceeded(format!("component of {} vertices", comp.len())));
            }
            for sub in strongly_connected_subsets(&restricted, &comp) {
                if !condition(&sub) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
