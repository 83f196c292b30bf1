//! Plain directed-graph utilities: SCCs, shortest paths, and lasso search
//! under occurrence/recurrence constraints.

use std::collections::{HashMap, VecDeque};

/// Strongly connected components restricted to `alive` vertices, each
/// sorted, listed in reverse topological order (sinks first).
pub fn tarjan_scc(succ: &[Vec<usize>], alive: &dyn Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if !alive(root) || index[root] != usize::MAX {
            continue;
        }
        // iterative Tarjan: frames of (vertex, next successor position)
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if !alive(w) {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(u, _)) = frames.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Whether the induced subgraph on `comp` (assumed strongly connected)
/// contains at least one edge.
pub fn has_cycle(succ: &[Vec<usize>], comp: &[usize]) -> bool {
    comp.len() > 1 || comp.first().is_some_and(|&v| succ[v].contains(&v))
}

/// Shortest path (as a vertex list, both ends included) from one of
/// `sources` to a vertex satisfying `goal`, using only vertices satisfying
/// `allowed`. Ties are broken towards lower indices.
pub fn bfs_path(
    succ: &[Vec<usize>],
    sources: &[usize],
    goal: &dyn Fn(usize) -> bool,
    allowed: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if allowed(s) && !parent.contains_key(&s) {
            parent.insert(s, usize::MAX);
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = vec![v];
            let mut cur = v;
            while parent[&cur] != usize::MAX {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &succ[v] {
            if allowed(w) && !parent.contains_key(&w) {
                parent.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

/// A cycle inside the vertex set `within` (strongly connected, with an
/// edge) that starts at `entry` and passes through every vertex in
/// `through`. The returned list starts at `entry` and does not repeat it.
pub fn cycle_through(succ: &[Vec<usize>], within: &[usize], entry: usize, through: &[usize]) -> Vec<usize> {
    let inside = |v: usize| within.binary_search(&v).is_ok();
    let mut cycle = vec![entry];
    let mut cur = entry;
    let mut stops: Vec<usize> = through.iter().copied().filter(|&t| t != entry).collect();
    stops.sort_unstable();
    stops.dedup();
    stops.push(entry);
    for stop in stops {
        // path of length >= 1 from cur to stop
        let starts: Vec<usize> = succ[cur].iter().copied().filter(|&w| inside(w)).collect();
        let path = bfs_path(succ, &starts, &|v| v == stop, &inside).expect("strongly connected component");
        cycle.extend_from_slice(&path);
        cur = stop;
    }
    cycle.pop();
    cycle
}

/// A lasso in a plain graph: `prefix` then `cycle` repeated; the edge from
/// the last prefix vertex (or last cycle vertex) leads to `cycle[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphLasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// Searches a lasso from `start` that visits a vertex of every set in
/// `occ_must`, never visits `occ_forbid`, whose cycle meets every set in
/// `inf_must` and avoids `inf_forbid`. Prefix and cycle lengths are
/// limited by `length_bound`.
pub fn find_lasso_constrained(
    succ: &[Vec<usize>],
    start: usize,
    occ_must: &[Vec<bool>],
    occ_forbid: &[bool],
    inf_must: &[Vec<bool>],
    inf_forbid: &[bool],
    length_bound: usize,
) -> Option<GraphLasso> {
    let n = succ.len();
    let k = occ_must.len();
    assert!(k <= 20, "too many occurrence constraints");
    let full = (1u32 << k) - 1;
    let forbid = |v: usize| occ_forbid.get(v).copied().unwrap_or(false);
    let mask_of = |v: usize| -> u32 {
        (0..k).filter(|&i| occ_must[i][v]).fold(0, |m, i| m | 1 << i)
    };
    if forbid(start) {
        return None;
    }
    // product over (vertex, satisfied occurrence constraints)
    let mut ids: HashMap<(usize, u32), usize> = HashMap::new();
    let mut nodes: Vec<(usize, u32)> = Vec::new();
    let mut psucc: Vec<Vec<usize>> = Vec::new();
    let init = (start, mask_of(start));
    ids.insert(init, 0);
    nodes.push(init);
    let mut i = 0;
    while i < nodes.len() {
        let (v, m) = nodes[i];
        let mut out = Vec::new();
        for &w in &succ[v] {
            if forbid(w) {
                continue;
            }
            let key = (w, m | mask_of(w));
            let id = *ids.entry(key).or_insert_with(|| {
                nodes.push(key);
                nodes.len() - 1
            });
            out.push(id);
        }
        psucc.push(out);
        i += 1;
    }
    let pn = nodes.len();
    let cyc_ok = |p: usize| nodes[p].1 == full && !inf_forbid.get(nodes[p].0).copied().unwrap_or(false);
    let comps = tarjan_scc(&psucc, &cyc_ok);
    let mut good = vec![usize::MAX; pn];
    for (ci, comp) in comps.iter().enumerate() {
        if !has_cycle(&psucc, comp) {
            continue;
        }
        if inf_must.iter().all(|set| comp.iter().any(|&p| set[nodes[p].0])) {
            for &p in comp {
                good[p] = ci;
            }
        }
    }
    let path = bfs_path(&psucc, &[0], &|p| good[p] != usize::MAX, &|_| true)?;
    let entry = *path.last().expect("nonempty path");
    let comp = &comps[good[entry]];
    let through: Vec<usize> = inf_must
        .iter()
        .map(|set| *comp.iter().find(|&&p| set[nodes[p].0]).expect("checked above"))
        .collect();
    let cyc = cycle_through(&psucc, comp, entry, &through);
    let prefix: Vec<usize> = path[..path.len() - 1].iter().map(|&p| nodes[p].0).collect();
    let cycle: Vec<usize> = cyc.iter().map(|&p| nodes[p].0).collect();
    let _ = n;
    if prefix.len() > length_bound || cycle.len() > length_bound {
        return None;
    }
    Some(GraphLasso { prefix, cycle })
}

/// Nonempty subsets of the vertices of `comp` whose induced subgraph is
/// strongly connected and contains an edge, by increasing size. Only
/// valid for components with at most 20 vertices.
pub fn strongly_connected_subsets(succ: &[Vec<usize>], comp: &[usize]) -> Vec<Vec<usize>> {
    let k = comp.len();
    assert!(k <= 20, "component too large for subset enumeration");
    let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<u32> = comp
        .iter()
        .map(|&v| {
            succ[v]
                .iter()
                .filter_map(|w| local.get(w))
                .fold(0u32, |m, &j| m | 1 << j)
        })
        .collect();
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut out = Vec::new();
    for m in masks {
        if induced_strongly_connected(&adj, m) {
            out.push((0..k).filter(|&i| m >> i & 1 == 1).map(|i| comp[i]).collect());
        }
    }
    out
}

fn reach_within(adj: &[u32], mask: u32, from: usize, reverse: bool) -> u32 {
    let mut seen = 1u32 << from;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        for i in 0..adj.len() {
            if frontier >> i & 1 == 0 {
                continue;
            }
            if reverse {
                for j in 0..adj.len() {
                    if mask >> j & 1 == 1 && adj[j] >> i & 1 == 1 {
                        next |= 1 << j;
                    }
                }
            } else {
                next |= adj[i] & mask;
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen
}

fn induced_strongly_connected(adj: &[u32], mask: u32) -> bool {
    let first = mask.trailing_zeros() as usize;
    if mask.count_ones() == 1 {
        return adj[first] >> first & 1 == 1;
    }
    reach_within(adj, mask, first, false) & mask == mask && reach_within(adj, mask, first, true) & mask == mask
}

/// Searches a lasso from `start` inside the `allowed` vertices whose cycle
/// vertex set `C` satisfies `accept(C)`. All strongly connected vertex
/// sets of reachable components are tried (smallest first), components in
/// order of their distance from `start`.
pub fn find_lasso_by_inf(
    succ: &[Vec<usize>],
    start: usize,
    allowed: &dyn Fn(usize) -> bool,
    accept: &mut dyn FnMut(&[usize]) -> bool,
) -> Option<GraphLasso> {
    if !allowed(start) {
        return None;
    }
    // BFS order of reachable vertices gives a deterministic component order
    let mut order = Vec::new();
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &succ[v] {
            if allowed(w) && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let comps = tarjan_scc(succ, &|v| seen[v]);
    let mut comp_of = vec![usize::MAX; succ.len()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let mut done = vec![false; comps.len()];
    for &v in &order {
        let ci = comp_of[v];
        if done[ci] {
            continue;
        }
        done[ci] = true;
        let comp = &comps[ci];
        if !has_cycle(succ, comp) {
            continue;
        }
        for sub in strongly_connected_subsets(succ, comp) {
            if !accept(&sub) {
                continue;
            }
            let inside = |x: usize| sub.binary_search(&x).is_ok();
            let path = bfs_path(succ, &[start], &inside, &|x| seen[x]).expect("reachable");
            let entry = *path.last().expect("nonempty");
            let cyc = cycle_through(succ, &sub, entry, &sub);
            return Some(GraphLasso { prefix: path[..path.len() - 1].to_vec(), cycle: cyc });
        }
    }
    None
}
