//! Instance generators: seeded random games per preference class, the
//! hardness-reduction games (SAT, co-Büchi SAT, QSAT, counting), the two
//! matching-pennies wrappers, and the worked example games.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{AgentId, ConcurrentGame, GameBuilder, StateId, StateSet};
use crate::objectives::{
    AutAcceptance, BoolCircuit, DetAutomaton, Objective, Preference, Preorder, Value,
};

// ---------------------------------------------------------------------------
// Formulas

/// A literal: `+k` is `x_k`, `-k` is `¬x_k` (variables numbered from 1),
/// and `0` is the constant false.
pub type Lit = i32;

/// A 3-CNF formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<[Lit; 3]>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<[Lit; 3]>) -> Result<Cnf> {
        for c in &clauses {
            if let Some(l) = c.iter().find(|l| l.unsigned_abs() as usize > num_vars) {
                return Err(Error::Parse { line: 0, msg: format!("literal {l} exceeds {num_vars} variables") });
            }
        }
        Ok(Cnf { num_vars, clauses })
    }

    /// Parses the DIMACS subset with clauses of exactly three literals.
    pub fn parse_dimacs(text: &str) -> Result<Cnf> {
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<Lit> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if t.starts_with('p') {
                let f: Vec<&str> = t.split_whitespace().collect();
                if f.len() != 4 || f[1] != "cnf" {
                    return Err(err(line, "expected `p cnf <vars> <clauses>`"));
                }
                let v = f[2].parse().map_err(|_| err(line, "bad variable count"))?;
                let c = f[3].parse().map_err(|_| err(line, "bad clause count"))?;
                header = Some((v, c));
                continue;
            }
            let (nv, _) = header.ok_or_else(|| err(line, "clause before the `p cnf` header"))?;
            for tok in t.split_whitespace() {
                let l: Lit = tok.parse().map_err(|_| err(line, &format!("bad literal `{tok}`")))?;
                if l == 0 {
                    if pending.len() != 3 {
                        return Err(err(line, &format!("clause with {} literals (exactly 3 required)", pending.len())));
                    }
                    clauses.push([pending[0], pending[1], pending[2]]);
                    pending.clear();
                } else if l.unsigned_abs() as usize > nv {
                    return Err(err(line, &format!("literal {l} exceeds {nv} variables")));
                } else {
                    pending.push(l);
                }
            }
        }
        if !pending.is_empty() {
            return Err(err(last_line, "unterminated clause"));
        }
        let (nv, nc) = header.ok_or_else(|| err(last_line, "missing `p cnf` header"))?;
        if nc != clauses.len() {
            return Err(err(last_line, &format!("header announces {nc} clauses, found {}", clauses.len())));
        }
        Ok(Cnf { num_vars: nv, clauses })
    }

    /// DIMACS text. A constant `⊥` literal is written as another literal
    /// of its clause (`ℓ ∨ ⊥` is `ℓ ∨ ℓ`); a clause made only of `⊥` has
    /// no three-literal form and is rejected.
    pub fn to_dimacs(&self) -> Result<String> {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        self.push_clauses(&mut s)?;
        Ok(s)
    }

    fn push_clauses(&self, out: &mut String) -> Result<()> {
        for c in &self.clauses {
            let fill = *c
                .iter()
                .find(|&&l| l != 0)
                .ok_or_else(|| Error::Unsupported("a clause of constant literals has no DIMACS form".into()))?;
            let l: Vec<Lit> = c.iter().map(|&l| if l == 0 { fill } else { l }).collect();
            out.push_str(&format!("{} {} {} 0\n", l[0], l[1], l[2]));
        }
        Ok(())
    }

    /// Value of a literal under `assignment` (index `k - 1` for `x_k`).
    pub fn lit_value(l: Lit, assignment: &[bool]) -> bool {
        match l {
            0 => false,
            l if l > 0 => assignment[l as usize - 1],
            l => !assignment[(-l) as usize - 1],
        }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| Cnf::lit_value(l, assignment)))
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lit = |l: Lit| match l {
            0 => "⊥".to_string(),
            l if l > 0 => format!("x{l}"),
            l => format!("¬x{}", -l),
        };
        let parts: Vec<String> =
            self.clauses.iter().map(|c| format!("({} ∨ {} ∨ {})", lit(c[0]), lit(c[1]), lit(c[2]))).collect();
        write!(f, "{}", parts.join(" ∧ "))
    }
}

/// Satisfiability by enumerating all assignments.
pub fn sat_brute_force(cnf: &Cnf) -> bool {
    (0..1u64 << cnf.num_vars).any(|m| {
        let a: Vec<bool> = (0..cnf.num_vars).map(|k| m >> k & 1 == 1).collect();
        cnf.eval(&a)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// A prenex quantified 3-CNF `Q_1 x_1 ... Q_p x_p. φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qbf {
    pub quantifiers: Vec<Quantifier>,
    pub matrix: Cnf,
}

impl Qbf {
    pub fn new(quantifiers: Vec<Quantifier>, matrix: Cnf) -> Result<Qbf> {
        if quantifiers.len() != matrix.num_vars {
            return Err(Error::Parse { line: 0, msg: "one quantifier per variable required".into() });
        }
        Ok(Qbf { quantifiers, matrix })
    }
}

impl Qbf {
    /// Parses DIMACS with quantifier lines `e <vars> 0` / `a <vars> 0`
    /// before the clauses. Variables must be quantified once each, in
    /// increasing order starting from 1.
    pub fn parse_qdimacs(text: &str) -> Result<Qbf> {
        let mut quantifiers = Vec::new();
        let mut rest = String::new();
        for (i, raw) in text.lines().enumerate() {
            let t = raw.trim();
            let q = match t.split_whitespace().next() {
                Some("e") => Quantifier::Exists,
                Some("a") => Quantifier::Forall,
                _ => {
                    rest.push_str(raw);
                    rest.push('\n');
                    continue;
                }
            };
            rest.push('\n');
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let toks: Vec<&str> = t.split_whitespace().skip(1).collect();
            if toks.last() != Some(&"0") {
                return Err(err("quantifier line must end with 0".into()));
            }
            for tok in &toks[..toks.len() - 1] {
                let v: usize = tok.parse().map_err(|_| err(format!("bad variable `{tok}`")))?;
                if v != quantifiers.len() + 1 {
                    return Err(err(format!("variable {v} quantified out of order (expected {})", quantifiers.len() + 1)));
                }
                quantifiers.push(q);
            }
        }
        let matrix = Cnf::parse_dimacs(&rest)?;
        if quantifiers.len() != matrix.num_vars {
            let line = text.lines().count();
            return Err(Error::Parse {
                line,
                msg: format!("{} of {} variables quantified", quantifiers.len(), matrix.num_vars),
            });
        }
        Ok(Qbf { quantifiers, matrix })
    }

    /// QDIMACS text, with constant literals handled as in [`Cnf::to_dimacs`].
    pub fn to_qdimacs(&self) -> Result<String> {
        let mut s = format!("p cnf {} {}\n", self.matrix.num_vars, self.matrix.clauses.len());
        for (k, q) in self.quantifiers.iter().enumerate() {
            s.push_str(&format!("{} {} 0\n", if *q == Quantifier::Exists { "e" } else { "a" }, k + 1));
        }
        self.matrix.push_clauses(&mut s)?;
        Ok(s)
    }
}

/// Validity by expanding the quantifier prefix.
pub fn qbf_brute_force(q: &Qbf) -> bool {
    fn go(q: &Qbf, a: &mut Vec<bool>) -> bool {
        let k = a.len();
        if k == q.quantifiers.len() {
            return q.matrix.eval(a);
        }
        let branch = |b: bool, a: &mut Vec<bool>| {
            a.push(b);
            let r = go(q, a);
            a.pop();
            r
        };
        match q.quantifiers[k] {
            Quantifier::Exists => branch(false, a) || branch(true, a),
            Quantifier::Forall => branch(false, a) && branch(true, a),
        }
    }
    go(q, &mut Vec::new())
}

/// `∀x1.∃x2.∀x3.∃x4. (x1 ∨ ¬x2 ∨ ¬x3) ∧ (x1 ∨ x2 ∨ x4) ∧ (¬x4 ∨ ⊥ ∨ ⊥)`.
pub fn qbf_invalid_example() -> Qbf {
    use Quantifier::*;
    let m = Cnf { num_vars: 4, clauses: vec![[1, -2, -3], [1, 2, 4], [-4, 0, 0]] };
    Qbf { quantifiers: vec![Forall, Exists, Forall, Exists], matrix: m }
}

/// `∃x. (x ∨ x ∨ x)`.
pub fn qbf_trivially_valid() -> Qbf {
    Qbf { quantifiers: vec![Quantifier::Exists], matrix: Cnf { num_vars: 1, clauses: vec![[1, 1, 1]] } }
}

/// `(x1 ∨ x2 ∨ ¬x3) ∧ (¬x1 ∨ x2 ∨ ¬x3)`.
pub fn cnf_counting_example() -> Cnf {
    Cnf { num_vars: 3, clauses: vec![[1, 2, -3], [-1, 2, -3]] }
}

/// Random 3-CNF with literals over `num_vars` variables.
pub fn random_cnf(rng: &mut impl Rng, num_vars: usize, num_clauses: usize) -> Cnf {
    let clauses = (0..num_clauses)
        .map(|_| {
            let mut c = [0; 3];
            for l in c.iter_mut() {
                let v = rng.gen_range(1..=num_vars) as Lit;
                *l = if rng.gen_bool(0.5) { v } else { -v };
            }
            c
        })
        .collect();
    Cnf { num_vars, clauses }
}

fn lit_name(l: Lit) -> String {
    if l > 0 {
        format!("x{l}")
    } else {
        format!("-x{}", -l)
    }
}

// ---------------------------------------------------------------------------
// Reduction games

/// The SAT reachability game: `A` picks a literal for each variable in
/// turn, clause player `C_i` wants to reach a state of one of its literals.
/// States: the initial choice state, the `2p` literal states (each also
/// acting as the next choice point), and a final sink.
pub fn gen_sat_reach(phi: &Cnf) -> Result<ConcurrentGame> {
    let p = phi.num_vars;
    if p == 0 {
        return Err(Error::Unsupported("formula without variables".into()));
    }
    let mut names = vec!["init".to_string()];
    for k in 1..=p {
        names.push(format!("x{k}"));
        names.push(format!("-x{k}"));
    }
    names.push("sink".into());
    let sink = 2 * p + 1;
    let pos = |k: usize| 2 * k - 1;
    let neg = |k: usize| 2 * k;
    let mut agents = vec!["A".to_string()];
    agents.extend((1..=phi.clauses.len()).map(|i| format!("C{i}")));
    let mut b = GameBuilder::with_names(names, agents.clone(), vec!["0".into(), "1".into()]);
    b.turn(0, 0, &[pos(1), neg(1)]);
    for k in 1..=p {
        let next: Vec<StateId> = if k < p { vec![pos(k + 1), neg(k + 1)] } else { vec![sink] };
        b.turn(pos(k), 0, &next);
        b.turn(neg(k), 0, &next);
    }
    b.turn(sink, 0, &[sink]);
    let state_of = |l: Lit| -> Option<StateId> {
        match l {
            0 => None,
            l if l > 0 => Some(pos(l as usize)),
            l => Some(neg((-l) as usize)),
        }
    };
    let mut prefs = vec![Preference::Single(Objective::Reach(StateSet::new()))];
    for c in &phi.clauses {
        prefs.push(Preference::Single(Objective::Reach(c.iter().filter_map(|&l| state_of(l)).collect())));
    }
    b.build(prefs)
}

/// The co-Büchi SAT game: module M(φ) cycled back to its first clause.
/// `A1` owns the clause states and wants to avoid `⊥`; `B_k` owns the
/// `¬x_k` literal states (with an edge to `⊥`) and wants to see `x_k`
/// literal states only finitely often.
pub fn gen_cobuchi_sat(phi: &Cnf) -> Result<ConcurrentGame> {
    let n = phi.clauses.len();
    let p = phi.num_vars;
    if n == 0 {
        return Err(Error::Unsupported("formula without clauses".into()));
    }
    if phi.clauses.iter().flatten().any(|&l| l == 0) {
        return Err(Error::Unsupported("constant literals are not supported by this generator".into()));
    }
    // c_1..c_{n+1}, then l_{i,j}, then bottom
    let clause = |i: usize| i - 1;
    let lit = |i: usize, j: usize| n + 1 + 3 * (i - 1) + j;
    let bot = n + 1 + 3 * n;
    let mut names: Vec<String> = (1..=n + 1).map(|i| format!("c{i}")).collect();
    for (i, c) in phi.clauses.iter().enumerate() {
        for (j, &l) in c.iter().enumerate() {
            names.push(format!("l{}_{}:{}", i + 1, j + 1, lit_name(l)));
        }
    }
    names.push("bot".into());
    let mut agents = vec!["A1".to_string()];
    agents.extend((1..=p).map(|k| format!("B{k}")));
    let mut b = GameBuilder::with_names(names, agents, vec!["0".into(), "1".into(), "2".into()]);
    for i in 1..=n {
        b.turn(clause(i), 0, &[lit(i, 0), lit(i, 1), lit(i, 2)]);
        for j in 0..3 {
            let l = phi.clauses[i - 1][j];
            if l < 0 {
                b.turn(lit(i, j), (-l) as AgentId, &[clause(i + 1), bot]);
            } else {
                b.turn(lit(i, j), 0, &[clause(i + 1)]);
            }
        }
    }
    b.turn(clause(n + 1), 0, &[clause(1)]);
    b.turn(bot, 0, &[bot]);
    let mut prefs = vec![Preference::Single(Objective::CoBuchi([bot].into()))];
    for k in 1..=p as Lit {
        let xs: StateSet = (1..=n)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| phi.clauses[i - 1][j] == k)
            .map(|(i, j)| lit(i, j))
            .collect();
        prefs.push(Preference::Single(Objective::CoBuchi(xs)));
    }
    b.build(prefs)
}

/// The QSAT game: a chain of quantifier states (owned by `A` for `∃`, by
/// `B` for `∀`) each choosing a literal state, ending in the sink `top`.
/// `A` has one ordered reachability target per clause (its literal
/// states) under the conjunction preorder; `B` has a single empty target.
pub fn gen_qsat_reach(q: &Qbf) -> Result<ConcurrentGame> {
    let p = q.quantifiers.len();
    if p == 0 || p != q.matrix.num_vars {
        return Err(Error::Unsupported("quantifier prefix must cover every variable".into()));
    }
    let quant = |k: usize| 3 * (k - 1);
    let pos = |k: usize| 3 * (k - 1) + 1;
    let neg = |k: usize| 3 * (k - 1) + 2;
    let top = 3 * p;
    let mut names = Vec::new();
    for k in 1..=p {
        let sym = if q.quantifiers[k - 1] == Quantifier::Exists { "E" } else { "A" };
        names.push(format!("{sym}{k}"));
        names.push(format!("x{k}"));
        names.push(format!("-x{k}"));
    }
    names.push("top".into());
    let mut b = GameBuilder::with_names(names, vec!["A".into(), "B".into()], vec!["0".into(), "1".into()]);
    for k in 1..=p {
        let owner = if q.quantifiers[k - 1] == Quantifier::Exists { 0 } else { 1 };
        b.turn(quant(k), owner, &[pos(k), neg(k)]);
        let next = if k < p { quant(k + 1) } else { top };
        b.turn(pos(k), 0, &[next]);
        b.turn(neg(k), 0, &[next]);
    }
    b.turn(top, 0, &[top]);
    let targets: Vec<StateSet> = q
        .matrix
        .clauses
        .iter()
        .map(|c| {
            c.iter()
                .filter(|&&l| l != 0)
                .map(|&l| if l > 0 { pos(l as usize) } else { neg((-l) as usize) })
                .collect()
        })
        .collect();
    if targets.is_empty() {
        return Err(Error::Unsupported("formula without clauses".into()));
    }
    b.build(vec![
        Preference::OrderedReach { targets, preorder: Preorder::Conjunction },
        Preference::OrderedReach { targets: vec![StateSet::new()], preorder: Preorder::Conjunction },
    ])
}

/// The counting game: `B` owns every state and walks round-robin through
/// `s0`, one layer `{x_k, ¬x_k}` per variable and one layer
/// `{t_j1, t_j2, t_j3}` per clause. `A` has the `2p` Büchi targets
/// `{x_k} ∪ {t_jq | ℓ_jq = x_k}` and `{¬x_k} ∪ {t_jq | ℓ_jq = ¬x_k}` under
/// the counting preorder. `B` has a single empty target.
pub fn gen_counting_buchi(phi: &Cnf) -> Result<ConcurrentGame> {
    let p = phi.num_vars;
    let m = phi.clauses.len();
    if p == 0 {
        return Err(Error::Unsupported("formula without variables".into()));
    }
    let mut layers: Vec<Vec<StateId>> = vec![vec![0]];
    let mut names = vec!["s0".to_string()];
    for k in 1..=p {
        layers.push(vec![names.len(), names.len() + 1]);
        names.push(format!("x{k}"));
        names.push(format!("-x{k}"));
    }
    for j in 1..=m {
        let base = names.len();
        layers.push(vec![base, base + 1, base + 2]);
        for q in 1..=3 {
            names.push(format!("t{j}_{q}"));
        }
    }
    let mut b = GameBuilder::with_names(names, vec!["A".into(), "B".into()], vec!["0".into(), "1".into(), "2".into()]);
    for l in 0..layers.len() {
        let next = &layers[(l + 1) % layers.len()];
        for &s in &layers[l] {
            b.turn(s, 1, next);
        }
    }
    let mut targets = Vec::new();
    for k in 1..=p as Lit {
        for sign in [k, -k] {
            let own = if sign > 0 { layers[k as usize][0] } else { layers[k as usize][1] };
            let mut t: StateSet = [own].into();
            for (j, c) in phi.clauses.iter().enumerate() {
                for (q, &l) in c.iter().enumerate() {
                    if l == sign {
                        t.insert(layers[p + 1 + j][q]);
                    }
                }
            }
            targets.push(t);
        }
    }
    b.build(vec![
        Preference::OrderedBuchi { targets, preorder: Preorder::Counting },
        Preference::OrderedBuchi { targets: vec![StateSet::new()], preorder: Preorder::Counting },
    ])
}

// ---------------------------------------------------------------------------
// Matching-pennies wrappers

/// Adds `s0` (matching pennies between `a` and `b`: equal actions go to
/// the sink `s1`, different actions to `from`) and the sink `s1`. Returns
/// the game and the index of `s0`; `s1` is the last state.
fn add_init_module(game: &ConcurrentGame, from: StateId, a: AgentId, b2: AgentId) -> (GameBuilder, StateId, StateId) {
    let ns = game.num_states();
    let na = game.num_agents();
    let mut names = game.state_names.clone();
    let fresh = |base: &str| -> String {
        let mut n = base.to_string();
        while game.state_names.contains(&n) {
            n.push('\'');
        }
        n
    };
    names.push(fresh("s0"));
    names.push(fresh("s1"));
    let mut actions = game.action_names.clone();
    while actions.len() < 2 {
        actions.push(format!("a{}", actions.len()));
    }
    let mut bld = GameBuilder::with_names(names, game.agent_names.clone(), actions);
    for s in 0..ns {
        for x in 0..na {
            bld.allow(s, x, &game.allow[s][x]);
        }
        for (m, &t) in &game.tab[s] {
            bld.set(s, m, t);
        }
    }
    let (s0, s1) = (ns, ns + 1);
    bld.allow(s0, a, &[0, 1]).allow(s0, b2, &[0, 1]);
    for i in 0..2 {
        for j in 0..2 {
            let mut m = vec![0; na];
            m[a] = i;
            m[b2] = j;
            bld.set(s0, &m, if i == j { s1 } else { from });
        }
    }
    bld.set(s1, &vec![0; na], s1);
    (bld, s0, s1)
}

/// Rewrites `pref` so that the play ending in the sink `s1` gets class
/// `class`; the plays of the original game keep their classes. The state
/// `s0` is visited once and never counts.
fn with_sink_class(pref: &Preference, s1: StateId, class: &Value) -> Result<Preference> {
    let ins = |t: &StateSet, yes: bool| -> StateSet {
        let mut t = t.clone();
        if yes {
            t.insert(s1);
        }
        t
    };
    Ok(match (pref, class) {
        (Preference::Single(o), Value::Bool(win)) => Preference::Single(match o {
            Objective::Reach(t) => Objective::Reach(ins(t, *win)),
            Objective::Safety(t) => Objective::Safety(ins(t, !win)),
            Objective::Buchi(t) => Objective::Buchi(ins(t, *win)),
            Objective::CoBuchi(t) => Objective::CoBuchi(ins(t, !win)),
            Objective::Parity(p) => {
                let mut p = p.clone();
                p.push(1);
                p.push(if *win { 0 } else { 1 });
                Objective::Parity(p)
            }
            _ => return Err(Error::Unsupported("wrapper supports reach, safety, Büchi, co-Büchi and parity".into())),
        }),
        (Preference::OrderedBuchi { targets, preorder }, Value::Vector(v)) => Preference::OrderedBuchi {
            targets: targets.iter().zip(&v.0).map(|(t, &bit)| ins(t, bit)).collect(),
            preorder: preorder.clone(),
        },
        (Preference::OrderedReach { targets, preorder }, Value::Vector(v)) => Preference::OrderedReach {
            targets: targets.iter().zip(&v.0).map(|(t, &bit)| ins(t, bit)).collect(),
            preorder: preorder.clone(),
        },
        _ => return Err(Error::IncompatibleThreshold(format!("class {class} for this preference"))),
    })
}

/// A preference of the same kind as `like` that is won exactly by the
/// plays ending in `s1` (when `sink_wins`) or by all other plays.
fn sink_preference(like: &Preference, ns_total: usize, s0: StateId, s1: StateId, sink_wins: bool) -> Result<Preference> {
    let sink: StateSet = [s1].into();
    let rest: StateSet = (0..ns_total).filter(|&s| s != s0 && s != s1).collect();
    let (good, bad) = if sink_wins { (sink.clone(), rest.clone()) } else { (rest.clone(), sink.clone()) };
    Ok(match like {
        Preference::Single(o) => Preference::Single(match o {
            Objective::Reach(_) => Objective::Reach(good),
            Objective::Safety(_) => Objective::Safety(bad),
            Objective::Buchi(_) => Objective::Buchi(good),
            Objective::CoBuchi(_) => Objective::CoBuchi(bad),
            Objective::Parity(_) => Objective::Parity(
                (0..ns_total).map(|s| if good.contains(&s) { 0 } else { 1 }).collect(),
            ),
            _ => return Err(Error::Unsupported("wrapper supports reach, safety, Büchi, co-Büchi and parity".into())),
        }),
        Preference::OrderedBuchi { .. } => Preference::OrderedBuchi { targets: vec![good], preorder: Preorder::Conjunction },
        Preference::OrderedReach { .. } => Preference::OrderedReach { targets: vec![good], preorder: Preorder::Conjunction },
    })
}

/// The highest class strictly below `u` for `pref`, if it is unique up to
/// equivalence (it exists for the total preorders used here).
pub fn class_just_below(pref: &Preference, u: &Value) -> Result<Value> {
    let below: Vec<Value> = pref.all_values().into_iter().filter(|w| pref.leq(w, u) && !pref.leq(u, w)).collect();
    let top: Vec<&Value> = below.iter().filter(|w| below.iter().all(|x| pref.leq(x, w))).collect();
    top.first()
        .map(|w| (*w).clone())
        .ok_or_else(|| Error::IncompatibleThreshold(format!("no greatest class below {u}")))
}

/// The game `G_π` for a two-player game: `agent` prefers any play of the
/// original game at least as good as `u` over the sink, which counts as
/// the class just below `u`; the other player only wants the sink.
/// Returns the game and its initial state `s0`.
pub fn wrap_value_as_ne(game: &ConcurrentGame, from: StateId, agent: AgentId, u: &Value) -> Result<(ConcurrentGame, StateId)> {
    game.check_state(from)?;
    game.check_agent(agent)?;
    if game.num_agents() != 2 {
        return Err(Error::Unsupported("the value wrapper needs a two-player game".into()));
    }
    let other = 1 - agent;
    let below = class_just_below(&game.prefs[agent], u)?;
    let (bld, s0, s1) = add_init_module(game, from, agent, other);
    let ns_total = game.num_states() + 2;
    let mut prefs = vec![Preference::Single(Objective::Reach(StateSet::new())); 2];
    prefs[agent] = with_sink_class(&game.prefs[agent], s1, &below)?;
    prefs[other] = sink_preference(&game.prefs[other], ns_total, s0, s1, true)?;
    Ok((bld.build(prefs)?, s0))
}

/// The game `E(G, A_i, A_j, ρ)`: `ai` and `aj` play matching pennies in
/// `s0`; the sink gets class `rho[k]` for every `k ≠ aj`, and `aj` prefers
/// every play of the original game over the sink. `aj`'s preference over
/// the original plays is replaced, which is exact when `aj` is indifferent
/// among them (for example an agent added without objective).
pub fn wrap_constraint_as_ne(
    game: &ConcurrentGame,
    from: StateId,
    ai: AgentId,
    aj: AgentId,
    rho: &[Value],
) -> Result<(ConcurrentGame, StateId)> {
    game.check_state(from)?;
    game.check_agent(ai)?;
    game.check_agent(aj)?;
    if ai == aj {
        return Err(Error::Unsupported("the constraint wrapper needs two distinct agents".into()));
    }
    if rho.len() != game.num_agents() {
        return Err(Error::ArityMismatch { expected: game.num_agents(), got: rho.len() });
    }
    let (bld, s0, s1) = add_init_module(game, from, ai, aj);
    let ns_total = game.num_states() + 2;
    let mut prefs = Vec::with_capacity(game.num_agents());
    for (k, p) in game.prefs.iter().enumerate() {
        prefs.push(if k == aj {
            sink_preference(p, ns_total, s0, s1, false)?
        } else {
            with_sink_class(p, s1, &rho[k])?
        });
    }
    Ok((bld.build(prefs)?, s0))
}

// ---------------------------------------------------------------------------
// Worked examples

/// The two-agent concurrent game with states ℓ0..ℓ3 used to illustrate
/// the suspect game (actions `1` and `2`; every agent loses everywhere).
pub fn suspect_example_game() -> ConcurrentGame {
    let mut b = GameBuilder::new(&["l0", "l1", "l2", "l3"], &["A1", "A2"], &["1", "2"]);
    b.allow(0, 0, &[0, 1]).allow(0, 1, &[0, 1]);
    b.set(0, &[0, 0], 1).set(0, &[0, 1], 2).set(0, &[1, 0], 3).set(0, &[1, 1], 0);
    b.allow(1, 1, &[0, 1]);
    b.set(1, &[0, 0], 1).set(1, &[0, 1], 2);
    b.set(2, &[0, 0], 0);
    b.set(3, &[0, 0], 3);
    let none = Preference::Single(Objective::Reach(StateSet::new()));
    b.build(vec![none.clone(), none]).expect("valid example game")
}

/// The medium-access game: states `(e1,s1,e2,s2)` with the energy left
/// and successes of both agents; each agent wants to reach a state where
/// its own transmission succeeded.
pub fn mac_game() -> ConcurrentGame {
    let names = ["1010", "1001", "0110", "0101", "0000"];
    let mut b = GameBuilder::new(&names, &["P1", "P2"], &["wait", "transmit"]);
    b.allow(0, 0, &[0, 1]).allow(0, 1, &[0, 1]);
    b.set(0, &[0, 0], 0).set(0, &[0, 1], 1).set(0, &[1, 0], 2).set(0, &[1, 1], 4);
    b.allow(1, 0, &[0, 1]);
    b.set(1, &[0, 0], 1).set(1, &[1, 0], 3);
    b.allow(2, 1, &[0, 1]);
    b.set(2, &[0, 0], 2).set(2, &[0, 1], 3);
    b.set(3, &[0, 0], 3);
    b.set(4, &[0, 0], 4);
    b.build(vec![
        Preference::Single(Objective::Reach([2, 3].into())),
        Preference::Single(Objective::Reach([1, 3].into())),
    ])
    .expect("valid example game")
}

/// Matching pennies with opposite reachability objectives: equal actions
/// lead to `head`, different ones to `tail`; `A` wants `head`, `B` `tail`.
pub fn matching_pennies_reach() -> ConcurrentGame {
    let mut b = GameBuilder::new(&["start", "head", "tail"], &["A", "B"], &["0", "1"]);
    b.allow(0, 0, &[0, 1]).allow(0, 1, &[0, 1]);
    b.set(0, &[0, 0], 1).set(0, &[1, 1], 1).set(0, &[0, 1], 2).set(0, &[1, 0], 2);
    b.set(1, &[0, 0], 1).set(2, &[0, 0], 2);
    b.build(vec![
        Preference::Single(Objective::Reach([1].into())),
        Preference::Single(Objective::Reach([2].into())),
    ])
    .expect("valid example game")
}

// ---------------------------------------------------------------------------
// Random games

/// Preference families of the random generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenClass {
    Reach,
    Safety,
    Buchi,
    CoBuchi,
    Parity,
    Rabin,
    Streett,
    Muller,
    Circuit,
    DetBuchiAut,
    DetRabinAut,
    OrderedBuchi(PreorderKind),
    OrderedReach(PreorderKind),
}

/// Named preorders for generated ordered objectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreorderKind {
    Conjunction,
    Disjunction,
    Counting,
    Subset,
    Maximise,
    Lexicographic,
}

impl PreorderKind {
    pub fn preorder(self) -> Preorder {
        match self {
            PreorderKind::Conjunction => Preorder::Conjunction,
            PreorderKind::Disjunction => Preorder::Disjunction,
            PreorderKind::Counting => Preorder::Counting,
            PreorderKind::Subset => Preorder::Subset,
            PreorderKind::Maximise => Preorder::Maximise,
            PreorderKind::Lexicographic => Preorder::Lexicographic,
        }
    }
}

/// Shape of a random game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub class: GenClass,
    pub states: usize,
    pub agents: usize,
    pub actions: usize,
    /// Number of targets of ordered objectives.
    pub targets: usize,
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, p: f64) -> StateSet {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

fn random_automaton(rng: &mut ChaCha8Rng, ns: usize, rabin: bool) -> DetAutomaton {
    let nq = 2;
    let delta = (0..nq).map(|_| (0..ns).map(|_| rng.gen_range(0..nq)).collect()).collect();
    let pick = |rng: &mut ChaCha8Rng| -> BTreeSet<usize> { (0..nq).filter(|_| rng.gen_bool(0.5)).collect() };
    let acceptance = if rabin {
        AutAcceptance::Rabin(vec![(pick(rng), pick(rng))])
    } else {
        AutAcceptance::Buchi(pick(rng))
    };
    DetAutomaton { num_states: nq, delta, init: 0, acceptance }
}

fn random_circuit(rng: &mut ChaCha8Rng, ns: usize) -> BoolCircuit {
    let mut c = BoolCircuit::new(ns);
    let mut gates: Vec<usize> = (0..ns).map(|k| c.input(k)).collect();
    for _ in 0..ns + 1 {
        let a = *gates.choose(rng).expect("inputs");
        let b = *gates.choose(rng).expect("inputs");
        let g = match rng.gen_range(0..3) {
            0 => c.and(a, b),
            1 => c.or(a, b),
            _ => c.not(a),
        };
        gates.push(g);
    }
    c.set_output(*gates.last().expect("gate"));
    c
}

fn random_preference(rng: &mut ChaCha8Rng, class: GenClass, ns: usize, k: usize) -> Preference {
    match class {
        GenClass::Reach => Preference::Single(Objective::Reach(random_subset(rng, ns, 0.3))),
        GenClass::Safety => Preference::Single(Objective::Safety(random_subset(rng, ns, 0.3))),
        GenClass::Buchi => Preference::Single(Objective::Buchi(random_subset(rng, ns, 0.4))),
        GenClass::CoBuchi => Preference::Single(Objective::CoBuchi(random_subset(rng, ns, 0.4))),
        GenClass::Parity => Preference::Single(Objective::Parity((0..ns).map(|_| rng.gen_range(0..4.min(2 * ns + 1))).collect())),
        GenClass::Rabin | GenClass::Streett => {
            let pairs = (0..rng.gen_range(1..=2))
                .map(|_| (random_subset(rng, ns, 0.4), random_subset(rng, ns, 0.3)))
                .collect();
            Preference::Single(if class == GenClass::Rabin { Objective::Rabin(pairs) } else { Objective::Streett(pairs) })
        }
        GenClass::Muller => {
            let nc = 2;
            let colors = (0..ns).map(|_| rng.gen_range(0..nc)).collect();
            let accepting = (1..1usize << nc)
                .filter(|_| rng.gen_bool(0.5))
                .map(|m| (0..nc).filter(|&c| m >> c & 1 == 1).collect())
                .collect();
            Preference::Single(Objective::Muller { colors, accepting })
        }
        GenClass::Circuit => Preference::Single(Objective::Circuit(random_circuit(rng, ns))),
        GenClass::DetBuchiAut => Preference::Single(Objective::DetBuchiAut(random_automaton(rng, ns, false))),
        GenClass::DetRabinAut => Preference::Single(Objective::DetRabinAut(random_automaton(rng, ns, true))),
        GenClass::OrderedBuchi(kind) => Preference::OrderedBuchi {
            targets: (0..k).map(|_| random_subset(rng, ns, 0.35)).collect(),
            preorder: kind.preorder(),
        },
        GenClass::OrderedReach(kind) => Preference::OrderedReach {
            targets: (0..k).map(|_| random_subset(rng, ns, 0.3)).collect(),
            preorder: kind.preorder(),
        },
    }
}

/// A seeded random game: allowed actions are uniform nonempty subsets,
/// table entries uniform over states, and preferences drawn per class.
pub fn random_game(seed: u64, params: &GenParams) -> ConcurrentGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let GenParams { class, states: ns, agents: na, actions: nact, targets } = *params;
    assert!(ns >= 1 && na >= 1 && nact >= 1, "random_game needs at least one state, agent and action");
    let names: Vec<String> = (0..ns).map(|s| format!("s{s}")).collect();
    let agents: Vec<String> = (0..na).map(|a| format!("P{}", a + 1)).collect();
    let actions: Vec<String> = (0..nact).map(|i| format!("a{i}")).collect();
    let mut b = GameBuilder::with_names(names, agents, actions);
    let allow: Vec<Vec<Vec<usize>>> = (0..ns)
        .map(|_| {
            (0..na)
                .map(|_| {
                    let mask = rng.gen_range(1..1u32 << nact);
                    (0..nact).filter(|&i| mask >> i & 1 == 1).collect()
                })
                .collect()
        })
        .collect();
    for (s, row) in allow.iter().enumerate() {
        for (a, acts) in row.iter().enumerate() {
            b.allow(s, a, acts);
        }
        for m in cartesian(row) {
            let t = rng.gen_range(0..ns);
            b.set(s, &m, t);
        }
    }
    let prefs = (0..na).map(|_| random_preference(&mut rng, class, ns, targets.max(1))).collect();
    b.build(prefs).expect("random games are well formed")
}

fn cartesian(row: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for acts in row {
        out = out
            .into_iter()
            .flat_map(|p| {
                acts.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}
