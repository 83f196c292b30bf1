#![allow(dead_code)]

use ne_core::nash::{resolve_constraint, Constraint, Threshold};
use ne_core::testgen::{random_game, GenClass, GenParams, PreorderKind};
use ne_core::{ConcurrentGame, PayoffVector, Preference, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The shapes used for randomized cross-checks against the oracle.
pub fn shape(seed: u64, class: GenClass, max_targets: usize) -> GenParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    GenParams {
        class,
        states: rng.gen_range(1..=4),
        agents: rng.gen_range(1..=3),
        actions: rng.gen_range(1..=2),
        targets: rng.gen_range(1..=max_targets),
    }
}

pub fn game_for(seed: u64, class: GenClass, max_targets: usize) -> ConcurrentGame {
    random_game(seed, &shape(seed, class, max_targets))
}

pub fn threshold_of(v: &Value) -> Threshold {
    match v {
        Value::Bool(b) => Threshold::Payoff(PayoffVector(vec![*b])),
        Value::Vector(p) => Threshold::Payoff(p.clone()),
    }
}

/// A random constraint: each agent gets a lower bound with probability
/// 1/3 and an upper bound with probability 1/6.
pub fn random_constraint(seed: u64, game: &ConcurrentGame) -> Constraint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut c = Constraint::none();
    for (a, p) in game.prefs.iter().enumerate() {
        let vals = p.all_values();
        if rng.gen_bool(1.0 / 3.0) {
            c = c.with_lower(a, threshold_of(&vals[rng.gen_range(0..vals.len())]));
        }
        if rng.gen_bool(1.0 / 6.0) {
            c = c.with_upper(a, threshold_of(&vals[rng.gen_range(0..vals.len())]));
        }
    }
    c
}

/// Outcome of one differential comparison.
pub struct Agreement {
    pub agree: bool,
    pub witness_ok: bool,
    pub exists: bool,
}

/// Runs the solver and the oracle on one instance. A produced witness must
/// also pass the independent checker.
pub fn compare(game: &ConcurrentGame, c: &Constraint, solve: impl Fn(&ConcurrentGame, &Constraint) -> Option<ne_core::nash::NEWitness>) -> Agreement {
    let bounds = resolve_constraint(game, c).expect("constraint resolves");
    let oracle = ne_core::oracle::brute_force_ne(game, 0, &bounds).expect("oracle runs");
    let got = solve(game, c);
    let witness_ok = match &got {
        Some(w) => ne_core::oracle::check_witness(game, 0, &bounds, w).expect("checker runs"),
        None => true,
    };
    Agreement { agree: oracle.is_some() == got.is_some(), witness_ok, exists: oracle.is_some() }
}

pub const BASIC_CLASSES: [(GenClass, &str, usize); 9] = [
    (GenClass::Reach, "reach", 1),
    (GenClass::Safety, "safety", 1),
    (GenClass::Buchi, "buchi", 1),
    (GenClass::CoBuchi, "cobuchi", 1),
    (GenClass::Parity, "parity", 1),
    (GenClass::OrderedBuchi(PreorderKind::Subset), "ordered-buchi-subset", 2),
    (GenClass::OrderedBuchi(PreorderKind::Counting), "ordered-buchi-counting", 2),
    (GenClass::OrderedReach(PreorderKind::Disjunction), "ordered-reach-disjunction", 2),
    (GenClass::OrderedReach(PreorderKind::Subset), "ordered-reach-subset", 2),
];

pub fn is_ordered(g: &ConcurrentGame) -> bool {
    g.prefs.iter().any(Preference::is_ordered)
}
