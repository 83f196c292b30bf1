use ne_core::reductions::visited_set_product;
use ne_core::solvers::{
    attractor, check_memoryless_winning, first_repetition_regions, first_repetition_solve, solve_buchi,
    solve_cobuchi, solve_conj_buchi, solve_conj_reach, solve_generic_inf, solve_parity_zielonka, solve_reach,
    solve_safety, Player, TurnArena, WinningRegion,
};
use ne_core::suspect::build_arena;
use ne_core::testgen::{self, GenClass, GenParams, PreorderKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_arena(rng: &mut impl Rng, n: usize) -> TurnArena {
    let owner = (0..n).map(|_| if rng.gen_bool(0.5) { Player::Eve } else { Player::Adam }).collect();
    let succ = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=n.min(3));
            (0..k).map(|_| rng.gen_range(0..n)).collect()
        })
        .collect();
    TurnArena::new(owner, succ).unwrap()
}

fn random_set(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(0.4)).collect()
}

/// The unique lasso from `v` under memoryless choices `pick` (one successor per vertex).
fn play(pick: &[usize], v: usize) -> (Vec<usize>, Vec<usize>) {
    let mut path = vec![v];
    loop {
        let next = pick[*path.last().unwrap()];
        if let Some(i) = path.iter().position(|&x| x == next) {
            return (path[..i].to_vec(), path[i..].to_vec());
        }
        path.push(next);
    }
}

/// All memoryless choice functions of `player`, with the other player's
/// vertices fixed to their first successor (to be overwritten).
fn choices(arena: &TurnArena, player: Player) -> Vec<Vec<usize>> {
    let mut out = vec![arena.succ.iter().map(|s| s[0]).collect::<Vec<usize>>()];
    for v in 0..arena.len() {
        if arena.owner[v] != player {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|c| {
                arena.succ[v].iter().map(move |&w| {
                    let mut c = c.clone();
                    c[v] = w;
                    c
                })
            })
            .collect();
    }
    out
}

/// Eve's region by enumerating memoryless strategies of both players.
/// Exact for conditions where both players have memoryless winning
/// strategies; `win(prefix, cycle)` decides a lasso.
fn brute_memoryless(arena: &TurnArena, win: &dyn Fn(&[usize], &[usize]) -> bool) -> Vec<bool> {
    let eve = choices(arena, Player::Eve);
    let adam = choices(arena, Player::Adam);
    (0..arena.len())
        .map(|v| {
            eve.iter().any(|e| {
                adam.iter().all(|a| {
                    let pick: Vec<usize> =
                        (0..arena.len()).map(|u| if arena.owner[u] == Player::Eve { e[u] } else { a[u] }).collect();
                    let (p, c) = play(&pick, v);
                    win(&p, &c)
                })
            })
        })
        .collect()
}

/// Eve's region for an Inf condition under which Adam has memoryless
/// winning strategies (e.g. Streett for Eve): Eve wins iff against every
/// memoryless Adam strategy some reachable strongly connected set satisfies
/// the condition.
fn brute_adam_memoryless(arena: &TurnArena, cond: &dyn Fn(&[usize]) -> bool) -> Vec<bool> {
    let n = arena.len();
    let adam = choices(arena, Player::Adam);
    (0..n)
        .map(|v| {
            adam.iter().all(|a| {
                let succ: Vec<Vec<usize>> = (0..n)
                    .map(|u| if arena.owner[u] == Player::Adam { vec![a[u]] } else { arena.succ[u].clone() })
                    .collect();
                let mut reach = vec![false; n];
                let mut stack = vec![v];
                reach[v] = true;
                while let Some(u) = stack.pop() {
                    for &w in &succ[u] {
                        if !reach[w] {
                            reach[w] = true;
                            stack.push(w);
                        }
                    }
                }
                (1u32..1 << n).any(|m| {
                    let set: Vec<usize> = (0..n).filter(|&u| m >> u & 1 == 1).collect();
                    set.iter().all(|&u| reach[u]) && strongly_connected(&succ, &set) && cond(&set)
                })
            })
        })
        .collect()
}

fn strongly_connected(succ: &[Vec<usize>], set: &[usize]) -> bool {
    let inside = |u: usize| set.contains(&u);
    set.iter().all(|&a| {
        let mut seen = vec![a];
        let mut stack = vec![a];
        let mut cyc = false;
        while let Some(u) = stack.pop() {
            for &w in &succ[u] {
                if inside(w) {
                    if w == a {
                        cyc = true;
                    }
                    if !seen.contains(&w) {
                        seen.push(w);
                        stack.push(w);
                    }
                }
            }
        }
        cyc && set.iter().all(|u| seen.contains(u))
    })
}

fn hits(set: &[bool], xs: &[usize]) -> bool {
    xs.iter().any(|&v| set[v])
}

fn min_even(prio: &[usize], cycle: &[usize]) -> bool {
    cycle.iter().map(|&v| prio[v]).min().unwrap() % 2 == 0
}

/// Eve regions are closed: Eve keeps a successor inside, Adam cannot leave.
fn assert_closed(arena: &TurnArena, win: &[bool]) {
    for v in 0..arena.len() {
        if !win[v] {
            continue;
        }
        match arena.owner[v] {
            Player::Eve => assert!(arena.succ[v].iter().any(|&w| win[w])),
            Player::Adam => assert!(arena.succ[v].iter().all(|&w| win[w])),
        }
    }
}

fn strategy_of(r: &WinningRegion) -> Vec<Option<usize>> {
    r.strategy.clone().expect("strategy extracted")
}

#[test]
fn attractor_examples() {
    let chain = TurnArena::new(vec![Player::Eve; 3], vec![vec![1], vec![2], vec![2]]).unwrap();
    assert_eq!(attractor(&chain, &[false; 3], Player::Eve), vec![false; 3]);
    assert_eq!(attractor(&chain, &[true; 3], Player::Eve), vec![true; 3]);
    assert_eq!(attractor(&chain, &[false, false, true], Player::Eve), vec![true; 3]);
    let split = TurnArena::new(vec![Player::Adam, Player::Eve, Player::Eve], vec![vec![1, 2], vec![1], vec![2]]).unwrap();
    assert_eq!(attractor(&split, &[false, true, false], Player::Eve), vec![false, true, false]);
    assert_eq!(attractor(&split, &[false, true, false], Player::Adam), vec![true, true, false]);
}

#[test]
fn safety_reach_buchi_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_arena(&mut rng, 5);
    assert_eq!(solve_safety(&a, &[false; 5]).win, vec![true; 5]);
    assert_eq!(solve_safety(&a, &[true; 5]).win, vec![false; 5]);
    let lone = TurnArena::new(vec![Player::Adam], vec![vec![0]]).unwrap();
    assert_eq!(solve_buchi(&lone, &[true]).win, vec![true]);
    assert_eq!(solve_cobuchi(&lone, &[true]).win, vec![false]);
    let chain = TurnArena::new(vec![Player::Eve; 3], vec![vec![1], vec![1], vec![1]]).unwrap();
    assert_eq!(solve_buchi(&chain, &[false, false, false]).win, vec![false; 3]);
    assert_eq!(solve_reach(&chain, &[false, true, false]).win, vec![true; 3]);
    let stuck = TurnArena::new(vec![Player::Eve; 2], vec![vec![0], vec![1]]).unwrap();
    assert_eq!(solve_reach(&stuck, &[false, true]).win, vec![false, true]);
}

#[test]
fn parity_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let a = random_arena(&mut rng, 6);
        assert_eq!(solve_parity_zielonka(&a, &[0, 2, 4, 0, 2, 2]).win, vec![true; 6]);
        assert_eq!(solve_parity_zielonka(&a, &[1, 3, 1, 5, 1, 1]).win, vec![false; 6]);
    }
}

#[test]
fn conjunction_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.gen_range(1..=6);
        let a = random_arena(&mut rng, n);
        let t = random_set(&mut rng, n);
        assert_eq!(solve_conj_reach(&a, std::slice::from_ref(&t)).unwrap().win, solve_reach(&a, &t).win);
        assert_eq!(solve_conj_buchi(&a, std::slice::from_ref(&t)).unwrap().win, solve_buchi(&a, &t).win);
    }
    // Eve alone walks 0 -> 1 -> 2 -> 2 and meets both targets in turn.
    let a = TurnArena::new(vec![Player::Eve; 3], vec![vec![0, 1], vec![2], vec![2, 0]]).unwrap();
    let r = solve_conj_reach(&a, &[vec![false, true, false], vec![false, false, true]]).unwrap();
    assert_eq!(r.win, vec![true; 3]);
    let too_many = vec![vec![false; 3]; 21];
    assert!(solve_conj_reach(&a, &too_many).is_err());
}

#[test]
fn generic_inf_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let n = rng.gen_range(1..=5);
        let a = random_arena(&mut rng, n);
        let colors: Vec<Option<usize>> = (0..n).map(Some).collect();
        let fixed = vec![None; n];
        let t = random_set(&mut rng, n);
        let tm: u32 = (0..n).filter(|&v| t[v]).map(|v| 1 << v).sum();
        let g = solve_generic_inf(&a, &colors, n, &mut |m| m & tm != 0, &fixed).unwrap();
        assert_eq!(g.win, solve_buchi(&a, &t).win);
        let all = solve_generic_inf(&a, &colors, n, &mut |_| true, &fixed).unwrap();
        assert_eq!(all.win, vec![true; n]);
    }
    let a = random_arena(&mut rng, 10);
    let colors: Vec<Option<usize>> = (0..10).map(Some).collect();
    assert!(solve_generic_inf(&a, &colors, 10, &mut |_| true, &[None; 10]).is_err());
}

#[test]
fn solvers_agree_with_memoryless_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let a = random_arena(&mut rng, n);
        let t = random_set(&mut rng, n);
        let occ_hit = |p: &[usize], c: &[usize]| hits(&t, p) || hits(&t, c);

        let reach = solve_reach(&a, &t);
        assert_eq!(reach.win, brute_memoryless(&a, &|p, c| occ_hit(p, c)));
        let safety = solve_safety(&a, &t);
        assert_eq!(safety.win, brute_memoryless(&a, &|p, c| !occ_hit(p, c)));
        let buchi = solve_buchi(&a, &t);
        assert_eq!(buchi.win, brute_memoryless(&a, &|_, c| hits(&t, c)));
        let cobuchi = solve_cobuchi(&a, &t);
        assert_eq!(cobuchi.win, brute_memoryless(&a, &|_, c| !hits(&t, c)));
        let prio: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let parity = solve_parity_zielonka(&a, &prio);
        assert_eq!(parity.win, brute_memoryless(&a, &|_, c| min_even(&prio, c)));

        // Büchi as a two-priority parity game.
        let two: Vec<usize> = t.iter().map(|&b| if b { 0 } else { 1 }).collect();
        assert_eq!(solve_parity_zielonka(&a, &two).win, buchi.win);

        for r in [&safety, &buchi, &cobuchi] {
            assert_closed(&a, &r.win);
        }
        assert_closed(&a, &parity.win);
    }
}

#[test]
fn conj_buchi_and_streett_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let a = random_arena(&mut rng, n);
        let targets: Vec<Vec<bool>> = (0..rng.gen_range(1..=3)).map(|_| random_set(&mut rng, n)).collect();
        let colors: Vec<Option<usize>> = (0..n).map(Some).collect();
        let fixed = vec![None; n];
        let masks: Vec<u32> =
            targets.iter().map(|t| (0..n).filter(|&v| t[v]).map(|v| 1u32 << v).sum()).collect();
        let conj = solve_conj_buchi(&a, &targets).unwrap();
        let generic = solve_generic_inf(&a, &colors, n, &mut |m| masks.iter().all(|&t| m & t != 0), &fixed).unwrap();
        assert_eq!(conj.win, generic.win);
        assert_eq!(conj.win, brute_adam_memoryless(&a, &|s| targets.iter().all(|t| hits(t, s))));

        if n <= 4 {
            let pairs: Vec<(u32, u32)> = (0..2).map(|_| (rng.gen_range(0..1 << n), rng.gen_range(0..1 << n))).collect();
            // Streett: every pair with Q seen infinitely often also sees R infinitely often.
            let streett = |m: u32| pairs.iter().all(|&(q, r)| m & q == 0 || m & r != 0);
            let g = solve_generic_inf(&a, &colors, n, &mut |m| streett(m), &fixed).unwrap();
            let brute = brute_adam_memoryless(&a, &|s| streett(s.iter().map(|&v| 1u32 << v).sum()));
            assert_eq!(g.win, brute);
            assert_closed(&a, &g.win);
        }
    }
}

/// Checks a memoryless Eve strategy by playing it against every memoryless Adam reply.
fn playout_winning(a: &TurnArena, strat: &[Option<usize>], from: usize, win: &dyn Fn(&[usize]) -> bool) -> bool {
    choices(a, Player::Adam).iter().all(|adam| {
        let pick: Vec<usize> = (0..a.len())
            .map(|u| if a.owner[u] == Player::Eve { strat[u].unwrap_or(a.succ[u][0]) } else { adam[u] })
            .collect();
        win(&play(&pick, from).1)
    })
}

#[test]
fn memoryless_check_examples_and_agreement() {
    // Eve at 0 chooses the winning loop at 1 or the losing sink 2.
    let a = TurnArena::new(vec![Player::Eve, Player::Eve, Player::Eve], vec![vec![1, 2], vec![1], vec![2]]).unwrap();
    let t = [false, true, false];
    let mut buchi = |inf: &[usize]| inf.iter().any(|&v| t[v]);
    assert!(check_memoryless_winning(&a, &[Some(1), Some(1), Some(2)], &[0], &mut buchi, false).unwrap());
    assert!(!check_memoryless_winning(&a, &[Some(2), Some(1), Some(2)], &[0], &mut buchi, false).unwrap());
    let adam = TurnArena::new(vec![Player::Adam, Player::Eve, Player::Eve], vec![vec![1, 2], vec![1], vec![2]]).unwrap();
    assert!(!check_memoryless_winning(&adam, &[None, Some(1), Some(2)], &[0], &mut buchi, false).unwrap());
    assert!(check_memoryless_winning(&a, &[None, Some(1), Some(2)], &[0], &mut buchi, false).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let a = random_arena(&mut rng, n);
        let t = random_set(&mut rng, n);
        let prio: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        for strat in choices(&a, Player::Eve) {
            let s: Vec<Option<usize>> =
                (0..n).map(|v| if a.owner[v] == Player::Eve { Some(strat[v]) } else { None }).collect();
            let from = rng.gen_range(0..n);
            let mut b = |inf: &[usize]| inf.iter().any(|&v| t[v]);
            assert_eq!(
                check_memoryless_winning(&a, &s, &[from], &mut b, false).unwrap(),
                playout_winning(&a, &s, from, &|c| hits(&t, c))
            );
            let mut p = |inf: &[usize]| min_even(&prio, inf);
            assert_eq!(
                check_memoryless_winning(&a, &s, &[from], &mut p, false).unwrap(),
                playout_winning(&a, &s, from, &|c| min_even(&prio, c))
            );
        }
    }
}

#[test]
fn extracted_strategies_are_winning() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let a = random_arena(&mut rng, n);
        let t = random_set(&mut rng, n);
        let prio: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let won = |w: &[bool]| (0..n).filter(|&v| w[v]).collect::<Vec<usize>>();

        let b = solve_buchi(&a, &t);
        let from = won(&b.win);
        if !from.is_empty() {
            assert!(check_memoryless_winning(&a, &strategy_of(&b), &from, &mut |i| hits(&t, i), false).unwrap());
        }
        let c = solve_cobuchi(&a, &t);
        let from = won(&c.win);
        if !from.is_empty() {
            assert!(check_memoryless_winning(&a, &strategy_of(&c), &from, &mut |i| !hits(&t, i), true).unwrap());
        }
        let p = solve_parity_zielonka(&a, &prio);
        let from = won(&p.win);
        if !from.is_empty() {
            let s = p.eve_strategy.clone();
            assert!(check_memoryless_winning(&a, &s, &from, &mut |i| min_even(&prio, i), false).unwrap());
        }
        // Safety and reachability are checked on play-outs (the prefix matters).
        let s = solve_safety(&a, &t);
        let r = solve_reach(&a, &t);
        for v in 0..n {
            if s.win[v] {
                let st = strategy_of(&s);
                assert!(choices(&a, Player::Adam).iter().all(|adam| {
                    let pick: Vec<usize> =
                        (0..n).map(|u| if a.owner[u] == Player::Eve { st[u].unwrap_or(a.succ[u][0]) } else { adam[u] }).collect();
                    let (pre, cyc) = play(&pick, v);
                    !hits(&t, &pre) && !hits(&t, &cyc)
                }));
            }
            if r.win[v] {
                let st = strategy_of(&r);
                assert!(choices(&a, Player::Adam).iter().all(|adam| {
                    let pick: Vec<usize> =
                        (0..n).map(|u| if a.owner[u] == Player::Eve { st[u].unwrap_or(a.succ[u][0]) } else { adam[u] }).collect();
                    let (pre, cyc) = play(&pick, v);
                    hits(&t, &pre) || hits(&t, &cyc)
                }));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regions_partition_vertices(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_arena(&mut rng, n);
        let t = random_set(&mut rng, n);
        // Eve's region for a condition and the swapped arena's region for
        // the complementary condition partition the vertices.
        let b = swap(&a);
        prop_assert!(solve_buchi(&a, &t).win.iter().zip(solve_cobuchi(&b, &t).win.iter()).all(|(x, y)| x != y));
        prop_assert!(solve_reach(&a, &t).win.iter().zip(solve_safety(&b, &t).win.iter()).all(|(x, y)| x != y));
        let prio: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let shifted: Vec<usize> = prio.iter().map(|p| p + 1).collect();
        let p1 = solve_parity_zielonka(&a, &prio).win;
        let p2 = solve_parity_zielonka(&swap(&a), &shifted).win;
        prop_assert_eq!(p1.iter().map(|&b| !b).collect::<Vec<bool>>(), p2);
    }
}

/// The same arena with the players swapped.
fn swap(a: &TurnArena) -> TurnArena {
    TurnArena::new(a.owner.iter().map(|p| p.opponent()).collect(), a.succ.clone()).unwrap()
}

// first repetition

/// Naive alternating search: a branch ends at its first repeated vertex.
fn naive_first_rep(a: &TurnArena, target: &[bool], v: usize, path: &mut Vec<usize>) -> bool {
    if path.contains(&v) {
        return target[v];
    }
    path.push(v);
    let mut it = a.succ[v].iter();
    let r = match a.owner[v] {
        Player::Eve => it.any(|&w| naive_first_rep(a, target, w, &mut path.clone())),
        Player::Adam => it.all(|&w| naive_first_rep(a, target, w, &mut path.clone())),
    };
    path.pop();
    r
}

/// Random arena over three component classes `S = ∅ ⊂ {0} ⊂ {0,1}` with
/// edges only towards equal or larger classes.
fn random_monotone(rng: &mut impl Rng, n: usize) -> (TurnArena, Vec<(u64, u32)>) {
    let class: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let owner = (0..n).map(|_| if rng.gen_bool(0.5) { Player::Eve } else { Player::Adam }).collect();
    let succ = (0..n)
        .map(|v| {
            let ok: Vec<usize> = (0..n).filter(|&w| class[w] >= class[v]).collect();
            (0..rng.gen_range(1..=3)).map(|_| ok[rng.gen_range(0..ok.len())]).collect()
        })
        .collect();
    let comps = class.iter().map(|&c| ((1u64 << c) - 1, 0u32)).collect();
    (TurnArena::new(owner, succ).unwrap(), comps)
}

#[test]
fn first_repetition_examples() {
    let one = TurnArena::new(vec![Player::Eve], vec![vec![0]]).unwrap();
    assert!(first_repetition_solve(&one, &[(0, 0)], 0, &[true]).unwrap());
    assert!(!first_repetition_solve(&one, &[(0, 0)], 0, &[false]).unwrap());
    let back = TurnArena::new(vec![Player::Eve; 2], vec![vec![1], vec![0]]).unwrap();
    assert!(first_repetition_solve(&back, &[(0, 0), (1, 0)], 0, &[true, true]).is_err());
}

#[test]
fn first_repetition_matches_naive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let n = rng.gen_range(1..=7);
        let (a, comps) = random_monotone(&mut rng, n);
        let t = random_set(&mut rng, n);
        let regions = first_repetition_regions(&a, &comps, &t).unwrap();
        for v in 0..n {
            let naive = naive_first_rep(&a, &t, v, &mut vec![]);
            assert_eq!(first_repetition_solve(&a, &comps, v, &t).unwrap(), naive);
            assert_eq!(regions[v], naive);
        }
        // A class-constant target makes the search a Büchi game.
        let ct: Vec<bool> = comps.iter().map(|c| c.0 % 2 == 1).collect();
        let regions = first_repetition_regions(&a, &comps, &ct).unwrap();
        assert_eq!(regions, solve_buchi(&a, &ct).win);
    }
}

#[test]
fn first_repetition_matches_generic_on_visited_set_suspect_arenas() {
    for seed in 0..40 {
        let kind = [PreorderKind::Subset, PreorderKind::Counting][seed as usize % 2];
        let params = GenParams { class: GenClass::OrderedReach(kind), states: 3, agents: 2, actions: 2, targets: 2 };
        let g = testgen::random_game(seed, &params);
        let (p, map) = visited_set_product(&g, 0).unwrap();
        let arena = build_arena(&p, 0).unwrap();
        let comps: Vec<(u64, u32)> = arena
            .vertices
            .iter()
            .map(|v| if v.suspects().is_empty() { (u64::MAX, 0) } else { (map[v.state()].1, v.suspects().0) })
            .collect();
        // The target depends on the visited set and the suspects only.
        let t: Vec<bool> = comps.iter().map(|&(s, q)| (s.count_ones() + q.count_ones() + seed as u32) % 2 == 0).collect();
        let fr = first_repetition_regions(&arena.arena, &comps, &t).unwrap();

        let class_ids: Vec<(u64, u32)> = {
            let mut c = comps.clone();
            c.sort();
            c.dedup();
            c
        };
        let layer: Vec<u64> = comps.iter().map(|c| class_ids.binary_search(c).unwrap() as u64).collect();
        let rank = |l: u64| {
            let (s, q) = class_ids[l as usize];
            u64::from(s.count_ones()) * 64 + 32 - u64::from(q.count_ones())
        };
        let generic = ne_core::solvers::solve_by_layers(&arena.arena, &layer, &|l| u64::MAX - rank(l), &mut |sub, orig, fixed| {
            let colors: Vec<Option<usize>> =
                orig.iter().map(|o| o.map(|v| usize::from(t[v]))).collect();
            Ok(solve_generic_inf(sub, &colors, 2, &mut |m| m & 2 != 0, fixed)?.win)
        })
        .unwrap();
        assert_eq!(fr, generic, "seed {seed}");
    }
}
