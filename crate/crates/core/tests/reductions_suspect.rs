use std::collections::BTreeMap;

use ne_core::nash::value_of;
use ne_core::objectives::{leq, AutAcceptance};
use ne_core::oracle::brute_force_value;
use ne_core::reductions::{
    check_game_simulation, conjunction_automaton, coreduce_to_single_buchi, lexicographic_automaton,
    objective_to_inf_circuit, product_with_automaton, prune_reachable, reduce_to_single_buchi,
    sequentialize_for_value, subset_threshold_automaton, visited_set_product,
};
use ne_core::solvers::Player;
use ne_core::suspect::{
    arena_size_bound, build_arena, deviation_targets, eve_condition, suspects, ConditionClass, EveWinCondition,
    SuspectVertex,
};
use ne_core::testgen::{self, GenClass, GenParams, PreorderKind};
use ne_core::{
    AgentSet, ConcurrentGame, DetAutomaton, GameBuilder, Lasso, Objective, PayoffVector, Preference, Preorder,
    StateSet, Value,
};
use proptest::prelude::*;

fn set(xs: &[usize]) -> StateSet {
    xs.iter().copied().collect()
}

fn pv(bits: &str) -> PayoffVector {
    PayoffVector::parse(bits).unwrap()
}

fn agents(xs: &[usize]) -> AgentSet {
    let mut p = AgentSet::EMPTY;
    for &a in xs {
        p.insert(a);
    }
    p
}

/// Every lasso of `g` from `from` with prefix and cycle of length at most `max`.
fn lassos(g: &ConcurrentGame, from: usize, max: usize) -> Vec<Lasso> {
    let mut out = vec![];
    let mut paths = vec![vec![from]];
    while let Some(p) = paths.pop() {
        let last = *p.last().unwrap();
        for t in g.successors(last) {
            if let Some(i) = p.iter().position(|&s| s == t) {
                out.push(Lasso::new(p[..i].to_vec(), p[i..].to_vec()));
            } else if p.len() < 2 * max {
                let mut q = p.clone();
                q.push(t);
                paths.push(q);
            }
        }
    }
    out
}

// reductions

#[test]
fn reduction_examples() {
    let t = vec![set(&[0]), set(&[1, 2]), set(&[3])];
    assert_eq!(reduce_to_single_buchi(&t, &Preorder::Disjunction, &pv("010"), 5).unwrap(), set(&[0, 1, 2, 3]));
    assert_eq!(reduce_to_single_buchi(&t, &Preorder::Disjunction, &pv("000"), 5).unwrap(), set(&[0, 1, 2, 3, 4]));
    assert_eq!(reduce_to_single_buchi(&t, &Preorder::Maximise, &pv("110"), 5).unwrap(), set(&[1, 2, 3]));
    assert!(reduce_to_single_buchi(&t, &Preorder::Subset, &pv("110"), 5).is_err());
    assert!(reduce_to_single_buchi(&t, &Preorder::Disjunction, &pv("11"), 5).is_err());
}

#[test]
fn coreduction_examples() {
    let t = vec![set(&[0]), set(&[1, 2]), set(&[3])];
    assert_eq!(coreduce_to_single_buchi(&t, &Preorder::Subset, &pv("101")).unwrap(), set(&[1, 2]));
    assert_eq!(coreduce_to_single_buchi(&t, &Preorder::Subset, &pv("111")).unwrap(), set(&[]));
    assert_eq!(coreduce_to_single_buchi(&t, &Preorder::Disjunction, &pv("100")).unwrap(), set(&[]));
    assert_eq!(coreduce_to_single_buchi(&t, &Preorder::Disjunction, &pv("000")).unwrap(), set(&[0, 1, 2, 3]));
    assert_eq!(coreduce_to_single_buchi(&t, &Preorder::Maximise, &pv("010")).unwrap(), set(&[3]));
    assert!(coreduce_to_single_buchi(&t, &Preorder::Counting, &pv("010")).is_err());
}

#[test]
fn conjunction_automaton_examples() {
    let t = vec![set(&[0]), set(&[1]), set(&[2])];
    let a = conjunction_automaton(&t, 4);
    assert_eq!(a.num_states, 4);
    assert_eq!(a.acceptance, AutAcceptance::Buchi([3].into()));
    assert_eq!(a.delta[0][0], 1);
    assert_eq!(a.delta[0][1], 0);
    assert_eq!(a.delta[1][1], 2);
    assert_eq!(a.delta[2][2], 3);
    assert!((0..4).all(|s| a.delta[3][s] == 0));
    // Looping on a state in no target is rejected.
    assert!(!a.accepts_lasso(&Lasso::new(vec![0, 1, 2], vec![3])));
    assert!(a.accepts_lasso(&Lasso::new(vec![3], vec![0, 1, 2])));
    assert!(!a.accepts_lasso(&Lasso::new(vec![], vec![0, 1])));
}

/// Lassos over a complete arena: prefixes and cycles are arbitrary words.
fn words(ns: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = vec![];
        for w in &frontier {
            for s in 0..ns {
                let mut v: Vec<usize> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn conjunction_automaton_with_one_target_is_buchi() {
    let ns = 5;
    for tmask in 0u32..1 << ns {
        let t = (0..ns).filter(|&s| tmask >> s & 1 == 1).collect::<StateSet>();
        let a = conjunction_automaton(std::slice::from_ref(&t), ns);
        for cycle in words(ns, 3).into_iter().filter(|w| !w.is_empty()) {
            let l = Lasso::new(vec![0], cycle);
            assert_eq!(a.accepts_lasso(&l), !l.inf().is_disjoint(&t));
        }
    }
}

#[test]
fn lexicographic_automaton_examples() {
    let t: Vec<StateSet> = (0..7).map(|i| set(&[i])).collect();
    let a = lexicographic_automaton(&t, &pv("0100110"), 7).unwrap();
    assert_eq!(a.num_states, 4);
    assert_eq!(a.acceptance, AutAcceptance::Buchi([0].into()));
    let zero = lexicographic_automaton(&t, &pv("0000000"), 7).unwrap();
    assert_eq!(zero.num_states, 1);
    assert!(zero.accepts_lasso(&Lasso::new(vec![], vec![6])));
}

#[test]
fn threshold_automata_match_compare_on_small_arenas() {
    let ns = 4;
    let ws = words(ns, 3);
    let cycles: Vec<&Vec<usize>> = ws.iter().filter(|w| !w.is_empty()).collect();
    let target_lists = [
        vec![set(&[0]), set(&[1, 2]), set(&[3])],
        vec![set(&[0, 1]), set(&[1]), set(&[2, 3])],
        vec![set(&[2]), set(&[])],
    ];
    for targets in &target_lists {
        let n = targets.len();
        for u in PayoffVector::all(n) {
            let lex = lexicographic_automaton(targets, &u, ns).unwrap();
            let sub = subset_threshold_automaton(targets, &u, ns).unwrap();
            for cycle in &cycles {
                let l = Lasso::new(vec![1], cycle.to_vec());
                let pay = PayoffVector(targets.iter().map(|t| !t.is_disjoint(&l.inf())).collect());
                assert_eq!(lex.accepts_lasso(&l), leq(&Preorder::Lexicographic, &u, &pay), "{u} {l:?}");
                assert_eq!(sub.accepts_lasso(&l), leq(&Preorder::Subset, &u, &pay), "{u} {l:?}");
            }
        }
    }
    let t = vec![set(&[0]), set(&[1])];
    let sub = subset_threshold_automaton(&t, &pv("11"), ns).unwrap();
    let conj = conjunction_automaton(&t, ns);
    assert_eq!(sub, conj);
    let zero = subset_threshold_automaton(&t, &pv("00"), ns).unwrap();
    assert!(zero.accepts_lasso(&Lasso::new(vec![], vec![3])));
}

#[test]
fn inf_circuit_examples() {
    let c = objective_to_inf_circuit(&Objective::Parity(vec![1, 0, 3]), 3).unwrap();
    assert!(c.eval_raw(&[true, true, false]));
    assert!(!c.eval_raw(&[true, false, true]));
    assert!(c.eval_raw(&[false, true, false]));
    assert!(objective_to_inf_circuit(&Objective::Reach(set(&[0])), 3).is_err());
    assert!(objective_to_inf_circuit(&Objective::Safety(set(&[0])), 3).is_err());
    let empty = Objective::Muller { colors: vec![0, 1, 1], accepting: vec![] };
    let c = objective_to_inf_circuit(&empty, 3).unwrap();
    assert!((0..8u32).all(|m| !c.eval_raw(&[m & 1 == 1, m & 2 == 2, m & 4 == 4])));
    let rabin = Objective::Rabin(vec![(set(&[0, 1]), set(&[2]))]);
    let c = objective_to_inf_circuit(&rabin, 3).unwrap();
    assert!(c.eval_raw(&[true, false, false]));
    assert!(!c.eval_raw(&[true, false, true]));
}

#[test]
fn product_with_trivial_automaton_is_isomorphic() {
    let g = testgen::mac_game();
    let (p, map) = product_with_automaton(&g, 0, &DetAutomaton::trivial(g.num_states())).unwrap();
    assert_eq!(p.num_states(), g.num_states());
    assert_eq!(p.tab_size(), g.tab_size());
    let rel: Vec<(usize, usize)> = map.iter().enumerate().map(|(i, &(s, _))| (s, i)).collect();
    let back: Vec<(usize, usize)> = rel.iter().map(|&(a, b)| (b, a)).collect();
    assert!(check_game_simulation(&g, &p, &rel));
    assert!(check_game_simulation(&p, &g, &back));
    assert!(product_with_automaton(&g, 0, &DetAutomaton::trivial(3)).is_err());
}

#[test]
fn product_with_conjunction_automaton() {
    let g = testgen::suspect_example_game();
    let aut = conjunction_automaton(&[set(&[1]), set(&[2])], g.num_states());
    let (p, map) = product_with_automaton(&g, 0, &aut).unwrap();
    assert_eq!(p.num_states(), g.num_states() * aut.num_states);
    assert!(ne_core::game::validate_game(&p).is_empty());
    let rel: Vec<(usize, usize)> = map.iter().enumerate().map(|(i, &(s, _))| (s, i)).collect();
    let back: Vec<(usize, usize)> = rel.iter().map(|&(a, b)| (b, a)).collect();
    assert!(check_game_simulation(&g, &p, &rel));
    assert!(check_game_simulation(&p, &g, &back));
    let (pruned, old) = prune_reachable(&p, map.iter().position(|&x| x == (0, aut.init)).unwrap());
    assert!(pruned.num_states() <= p.num_states());
    assert_eq!(map[old[0]], (0, aut.init));
}

#[test]
fn visited_set_product_of_chain() {
    let mut b = GameBuilder::new(&["s0", "s1"], &["A"], &["a"]);
    b.set(0, &[0], 1).set(1, &[0], 1);
    let g = b
        .build(vec![Preference::OrderedReach { targets: vec![set(&[1])], preorder: Preorder::Conjunction }])
        .unwrap();
    let (p, map) = visited_set_product(&g, 0).unwrap();
    assert_eq!(map, vec![(0, 0b01), (1, 0b11)]);
    assert_eq!(p.num_states(), 2);
    match &p.prefs[0] {
        Preference::OrderedBuchi { targets, preorder } => {
            assert_eq!(targets, &vec![set(&[1])]);
            assert_eq!(preorder, &Preorder::Conjunction);
        }
        other => panic!("{other:?}"),
    }
    let buchi = testgen::mac_game();
    assert!(visited_set_product(&buchi, 0).is_err());
}

/// The image of `l` in the visited-set product.
fn image(l: &Lasso, map: &[(usize, u64)], from: usize) -> Lasso {
    let index: BTreeMap<(usize, u64), usize> = map.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut visited = 1u64 << from;
    let mut word = vec![];
    // After one pass over the cycle the visited set is stable.
    for &s in l.prefix.iter().chain(&l.cycle).skip(1) {
        word.push(s);
    }
    let mut prefix = vec![index[&(from, visited)]];
    for &s in &word {
        visited |= 1 << s;
        prefix.push(index[&(s, visited)]);
    }
    let cycle: Vec<usize> = l.cycle.iter().map(|&s| index[&(s, visited)]).collect();
    // `prefix` ends at the last cycle state; drop it so the cycle starts cleanly.
    prefix.pop();
    let rot = l.cycle.len() - 1;
    let mut c = cycle[rot..].to_vec();
    c.extend_from_slice(&cycle[..rot]);
    Lasso::new(prefix, c)
}

#[test]
fn visited_set_product_simulates_and_preserves_payoffs() {
    for seed in 0..40 {
        let kind = [PreorderKind::Subset, PreorderKind::Counting, PreorderKind::Lexicographic][seed as usize % 3];
        let params = GenParams { class: GenClass::OrderedReach(kind), states: 4, agents: 2, actions: 2, targets: 2 };
        // The backward simulation relates every state of `g` to some product
        // state, so the game is first restricted to what is reachable.
        let g = prune_reachable(&testgen::random_game(seed, &params), 0).0;
        let (p, map) = visited_set_product(&g, 0).unwrap();
        assert!(ne_core::game::validate_game(&p).is_empty());
        let rel: Vec<(usize, usize)> = map.iter().enumerate().map(|(i, &(s, _))| (s, i)).collect();
        let back: Vec<(usize, usize)> = rel.iter().map(|&(a, b)| (b, a)).collect();
        assert!(check_game_simulation(&g, &p, &rel), "seed {seed}");
        assert!(check_game_simulation(&p, &g, &back), "seed {seed}");
        for l in lassos(&g, 0, 3) {
            let li = image(&l, &map, 0);
            ne_core::game::check_lasso(&p, &li).unwrap();
            for a in 0..g.num_agents() {
                assert_eq!(g.prefs[a].value_of_lasso(&l), p.prefs[a].value_of_lasso(&li), "seed {seed} {l:?}");
            }
        }
    }
}

fn turn_based(seed: u64) -> ConcurrentGame {
    // Reuse a random game but give every state a single owner.
    let params = GenParams { class: GenClass::Buchi, states: 4, agents: 2, actions: 2, targets: 1 };
    let mut g = testgen::random_game(seed, &params);
    for s in 0..g.num_states() {
        let owner = s % g.num_agents();
        for a in 0..g.num_agents() {
            if a != owner {
                g.allow[s][a].truncate(1);
            }
        }
        let allow = g.allow[s].clone();
        g.tab[s].retain(|m, _| m.iter().enumerate().all(|(a, x)| allow[a].contains(x)));
    }
    assert!(ne_core::game::validate_game(&g).is_empty());
    g
}

#[test]
fn sequentialized_value_matches_brute_force_on_turn_based_games() {
    for seed in 0..30 {
        let g = turn_based(seed);
        for a in 0..g.num_agents() {
            for u in [Value::Bool(true), Value::Bool(false)] {
                assert_eq!(value_of(&g, 0, a, &u).unwrap(), brute_force_value(&g, 0, a, &u).unwrap(), "seed {seed}");
            }
        }
    }
}

#[test]
fn matching_pennies_agent_cannot_force_head() {
    let g = testgen::matching_pennies_reach();
    assert!(!value_of(&g, 0, 0, &Value::Bool(true)).unwrap());
    assert!(!brute_force_value(&g, 0, 0, &Value::Bool(true)).unwrap());
    let va = sequentialize_for_value(&g, 0).unwrap();
    let v0 = va.vertex_of_state[0];
    assert_eq!(va.arena.owner[v0], Player::Eve);
    for &c in &va.arena.succ[v0] {
        assert_eq!(va.arena.owner[c], Player::Adam);
        assert_eq!(va.arena.succ[c].len(), 2);
    }
}

#[test]
fn single_agent_sequentialization_has_one_coalition_successor() {
    let params = GenParams { class: GenClass::Reach, states: 4, agents: 1, actions: 2, targets: 1 };
    let g = testgen::random_game(3, &params);
    let va = sequentialize_for_value(&g, 0).unwrap();
    for v in 0..va.arena.len() {
        if va.arena.owner[v] == Player::Adam {
            assert_eq!(va.arena.succ[v].len(), 1);
        }
    }
}

// suspect game

#[test]
fn suspects_examples() {
    let g = testgen::suspect_example_game();
    assert_eq!(suspects(&g, 0, 2, &[0, 0]).unwrap(), agents(&[1]));
    assert_eq!(suspects(&g, 0, 0, &[0, 0]).unwrap(), agents(&[]));
    assert_eq!(suspects(&g, 0, 1, &[0, 0]).unwrap(), agents(&[0, 1]));
    assert!(suspects(&g, 1, 1, &[1, 0]).is_err());
}

#[test]
fn suspect_example_arena() {
    let g = testgen::suspect_example_game();
    let a = build_arena(&g, 0).unwrap();
    let full = agents(&[0, 1]);
    let root = a.eve(0, full).unwrap();
    assert_eq!(root, a.initial);
    assert_eq!(a.arena.succ[root].len(), 4);
    let adam = a.adam(0, full, &[1, 1]).unwrap();
    let succ = &a.arena.succ[adam];
    for (s, p) in [(1, agents(&[])), (2, agents(&[0])), (3, agents(&[1])), (0, full)] {
        let e = a.eve(s, p).unwrap();
        assert!(succ.contains(&e), "missing ({s}, {p:?})");
    }
    assert_eq!(a.obey[adam], a.eve(0, full));
    assert!(a.len() <= arena_size_bound(&g));
}

#[test]
fn eve_condition_examples() {
    let g = testgen::mac_game();
    let a = build_arena(&g, 0).unwrap();
    let losers = agents(&[0]);
    let t = set(&[2, 3]);
    let expect: Vec<bool> = a.vertices.iter().map(|v| t.contains(&v.state()) && v.suspects().contains(0)).collect();
    assert_eq!(eve_condition(&g, &a, ConditionClass::Reach, losers).unwrap(), EveWinCondition::SafetyT(expect.clone()));

    let mut gb = g.clone();
    for p in gb.prefs.iter_mut() {
        if let Preference::Single(Objective::Reach(t)) = p {
            *p = Preference::Single(Objective::Buchi(t.clone()));
        }
    }
    let ab = build_arena(&gb, 0).unwrap();
    assert_eq!(eve_condition(&gb, &ab, ConditionClass::Buchi, losers).unwrap(), EveWinCondition::CoBuchiT(expect));

    match eve_condition(&g, &a, ConditionClass::Reach, AgentSet::EMPTY).unwrap() {
        EveWinCondition::SafetyT(avoid) => assert!(avoid.iter().all(|&b| !b)),
        other => panic!("{other:?}"),
    }
    assert!(eve_condition(&g, &a, ConditionClass::Rabin, losers).is_err());
}

#[test]
fn deviation_target_examples() {
    let g = testgen::suspect_example_game();
    let a = build_arena(&g, 0).unwrap();
    let devs = deviation_targets(&a, &[(0, vec![0, 0]), (1, vec![0, 0])]).unwrap();
    let at0: Vec<usize> = devs.iter().filter(|d| d.0 == 0).map(|d| d.1).collect();
    assert!(at0.contains(&a.eve(2, agents(&[1])).unwrap()));
    assert!(at0.contains(&a.eve(3, agents(&[0])).unwrap()));
    assert!(devs.len() <= 2 * (g.num_states() - 1));
    assert!(deviation_targets(&a, &[(3, vec![1, 0])]).is_err());

    let mut b = GameBuilder::new(&["s"], &["A"], &["a"]);
    b.set(0, &[0], 0);
    let one = b.build(vec![Preference::Single(Objective::Reach(set(&[0])))]).unwrap();
    let a1 = build_arena(&one, 0).unwrap();
    assert!(deviation_targets(&a1, &[(0, vec![0])]).unwrap().is_empty());
}

#[test]
fn suspect_dot_styling() {
    let g = testgen::suspect_example_game();
    let dot = build_arena(&g, 0).unwrap().to_dot(&g);
    assert!(dot.contains("shape=ellipse, label=\"l0 | {A1,A2}\""));
    assert!(dot.contains("shape=box, label=\"l0 | {A1,A2} | <1,1>\""));
    assert!(dot.contains("bold"));
}

fn arb_game() -> impl Strategy<Value = ConcurrentGame> {
    (any::<u64>(), 1usize..=4, 1usize..=3, 1usize..=2).prop_map(|(seed, states, agents, actions)| {
        testgen::random_game(seed, &GenParams { class: GenClass::Reach, states, agents, actions, targets: 1 })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn obeyed_successor_has_every_suspect(g in arb_game()) {
        for s in 0..g.num_states() {
            for m in g.legal_moves(s) {
                prop_assert_eq!(suspects(&g, s, g.succ(s, &m), &m).unwrap(), g.all_agents());
            }
        }
    }

    #[test]
    fn arena_structure(g in arb_game()) {
        let a = build_arena(&g, 0).unwrap();
        prop_assert!(a.len() <= arena_size_bound(&g));
        for (v, vx) in a.vertices.iter().enumerate() {
            let p = vx.suspects();
            match vx {
                SuspectVertex::Eve { state, .. } => {
                    let mut expect: Vec<usize> = g.legal_moves(*state).iter().map(|m| a.adam(*state, p, m).unwrap()).collect();
                    let mut got = a.arena.succ[v].clone();
                    expect.sort();
                    got.sort();
                    prop_assert_eq!(got, expect);
                }
                SuspectVertex::Adam { state, mv, .. } => {
                    prop_assert!(g.is_legal(*state, mv));
                    let mut expect: Vec<usize> = (0..g.num_states())
                        .map(|t| a.eve(t, p.intersect(suspects(&g, *state, t, mv).unwrap())).unwrap())
                        .collect();
                    expect.sort();
                    expect.dedup();
                    let mut got = a.arena.succ[v].clone();
                    got.sort();
                    prop_assert_eq!(got, expect);
                    let o = a.obey[v].unwrap();
                    prop_assert_eq!(a.vertices[o].suspects(), p);
                    prop_assert_eq!(a.vertices[o].state(), g.succ(*state, mv));
                }
            }
            for &w in &a.arena.succ[v] {
                prop_assert!(a.vertices[w].suspects().is_subset(p));
            }
        }
    }

    #[test]
    fn turn_based_arenas_have_at_most_one_suspect(seed in 0u64..500) {
        let g = turn_based(seed);
        let a = build_arena(&g, 0).unwrap();
        for v in &a.vertices {
            let p = v.suspects();
            prop_assert!(p == g.all_agents() || p.len() <= 1);
        }
    }
}
