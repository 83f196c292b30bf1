//! Objectives, preorders and ordered preferences, evaluated on the
//! `(occ, inf)` sets of a play.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Lasso, StateId, StateSet};

/// A gate of a Boolean circuit. Operands refer to earlier gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(usize),
    Const(bool),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
}

/// A Boolean circuit with gates in topological order and a single output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolCircuit {
    pub num_inputs: usize,
    pub gates: Vec<Gate>,
    pub output: usize,
}

impl BoolCircuit {
    pub fn new(num_inputs: usize) -> BoolCircuit {
        BoolCircuit { num_inputs, gates: Vec::new(), output: 0 }
    }

    fn push(&mut self, g: Gate) -> usize {
        self.gates.push(g);
        self.output = self.gates.len() - 1;
        self.output
    }

    pub fn input(&mut self, k: usize) -> usize {
        self.push(Gate::Input(k))
    }

    pub fn constant(&mut self, b: bool) -> usize {
        self.push(Gate::Const(b))
    }

    pub fn not(&mut self, g: usize) -> usize {
        self.push(Gate::Not(g))
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::And(a, b))
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::Or(a, b))
    }

    pub fn implies(&mut self, a: usize, b: usize) -> usize {
        let na = self.not(a);
        self.or(na, b)
    }

    pub fn iff(&mut self, a: usize, b: usize) -> usize {
        let ab = self.implies(a, b);
        let ba = self.implies(b, a);
        self.and(ab, ba)
    }

    /// Conjunction of `gs`; the constant true gate when empty.
    pub fn and_all(&mut self, gs: &[usize]) -> usize {
        match gs.split_first() {
            None => self.constant(true),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &g| self.and(acc, g)),
        }
    }

    /// Disjunction of `gs`; the constant false gate when empty.
    pub fn or_all(&mut self, gs: &[usize]) -> usize {
        match gs.split_first() {
            None => self.constant(false),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &g| self.or(acc, g)),
        }
    }

    pub fn set_output(&mut self, g: usize) {
        self.output = g;
    }

    /// Copies the gates of `other` into `self`, replacing each input `k`
    /// of `other` by the gate `inputs[k]`. Returns the copied output gate.
    pub fn embed(&mut self, other: &BoolCircuit, inputs: &[usize]) -> usize {
        let mut map = Vec::with_capacity(other.gates.len());
        for g in &other.gates {
            let id = match *g {
                Gate::Input(k) => inputs[k],
                Gate::Const(b) => self.constant(b),
                Gate::Not(a) => self.not(map[a]),
                Gate::And(a, b) => self.and(map[a], map[b]),
                Gate::Or(a, b) => self.or(map[a], map[b]),
            };
            map.push(id);
        }
        map[other.output]
    }

    pub fn check(&self) -> Result<()> {
        if self.gates.is_empty() || self.output >= self.gates.len() {
            return Err(Error::InvalidPreference("circuit has no output gate".into()));
        }
        for (i, g) in self.gates.iter().enumerate() {
            let ok = match *g {
                Gate::Input(k) => k < self.num_inputs,
                Gate::Const(_) => true,
                Gate::Not(a) => a < i,
                Gate::And(a, b) | Gate::Or(a, b) => a < i && b < i,
            };
            if !ok {
                return Err(Error::InvalidPreference(format!("gate g{i} is ill-formed")));
            }
        }
        Ok(())
    }

    /// Evaluates without checking the input length.
    pub fn eval_raw(&self, inputs: &[bool]) -> bool {
        let mut val: Vec<bool> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let b = match *g {
                Gate::Input(k) => inputs[k],
                Gate::Const(b) => b,
                Gate::Not(a) => !val[a],
                Gate::And(a, b) => val[a] && val[b],
                Gate::Or(a, b) => val[a] || val[b],
            };
            val.push(b);
        }
        val[self.output]
    }

    /// Renders the circuit in the line-based text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, g) in self.gates.iter().enumerate() {
            let rhs = match *g {
                Gate::Input(k) => format!("INPUT {k}"),
                Gate::Const(b) => format!("CONST {}", b as u8),
                Gate::Not(a) => format!("NOT g{a}"),
                Gate::And(a, b) => format!("AND g{a} g{b}"),
                Gate::Or(a, b) => format!("OR g{a} g{b}"),
            };
            s.push_str(&format!("g{i} := {rhs}\n"));
        }
        s.push_str(&format!("OUTPUT g{}\n", self.output));
        s
    }

    /// Parses the text format; `first_line` is used for error positions.
    pub fn parse(text: &str, num_inputs: usize, first_line: usize) -> Result<BoolCircuit> {
        let mut ids: BTreeMap<String, usize> = BTreeMap::new();
        let mut c = BoolCircuit::new(num_inputs);
        let mut output = None;
        for (off, raw) in text.lines().enumerate() {
            let line = first_line + off;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line, msg: msg.to_string() };
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks[0] == "OUTPUT" {
                if toks.len() != 2 {
                    return Err(err("expected OUTPUT g<id>"));
                }
                output = Some(*ids.get(toks[1]).ok_or_else(|| err("unknown output gate"))?);
                continue;
            }
            if output.is_some() {
                return Err(err("gate after OUTPUT"));
            }
            if toks.len() < 3 || toks[1] != ":=" || !toks[0].starts_with('g') {
                return Err(err("expected g<id> := ..."));
            }
            let r = |t: &str| ids.get(t).copied().ok_or_else(|| err(&format!("gate {t} used before definition")));
            let int = |t: &str| t.parse::<usize>().map_err(|_| err(&format!("bad integer {t}")));
            let g = match (toks[2], toks.len()) {
                ("INPUT", 4) => {
                    let k = int(toks[3])?;
                    if k >= num_inputs {
                        return Err(err(&format!("input {k} out of range (circuit has {num_inputs} inputs)")));
                    }
                    Gate::Input(k)
                }
                ("CONST", 4) => match toks[3] {
                    "0" => Gate::Const(false),
                    "1" => Gate::Const(true),
                    _ => return Err(err("CONST expects 0 or 1")),
                },
                ("NOT", 4) => Gate::Not(r(toks[3])?),
                ("AND", 5) => Gate::And(r(toks[3])?, r(toks[4])?),
                ("OR", 5) => Gate::Or(r(toks[3])?, r(toks[4])?),
                _ => return Err(err("unknown gate form")),
            };
            if ids.contains_key(toks[0]) {
                return Err(err(&format!("gate {} defined twice", toks[0])));
            }
            ids.insert(toks[0].to_string(), c.gates.len());
            c.gates.push(g);
        }
        let line = first_line + text.lines().count();
        c.output = output.ok_or(Error::Parse { line, msg: "missing OUTPUT line".into() })?;
        c.check()?;
        Ok(c)
    }
}

/// Evaluates `c` on `inputs`, which must have exactly `c.num_inputs` bits.
pub fn eval_circuit(c: &BoolCircuit, inputs: &[bool]) -> Result<bool> {
    if inputs.len() != c.num_inputs {
        return Err(Error::ArityMismatch { expected: c.num_inputs, got: inputs.len() });
    }
    c.check()?;
    Ok(c.eval_raw(inputs))
}

/// Acceptance condition of a deterministic automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutAcceptance {
    /// Accept iff some repeated state occurs infinitely often.
    Buchi(BTreeSet<usize>),
    /// Accept iff for some pair `(e, f)`, `e` is visited infinitely often
    /// and `f` only finitely often.
    Rabin(Vec<(BTreeSet<usize>, BTreeSet<usize>)>),
}

/// A deterministic automaton reading game states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetAutomaton {
    pub num_states: usize,
    /// `delta[q][s]` is the successor of `q` on letter (game state) `s`.
    pub delta: Vec<Vec<usize>>,
    pub init: usize,
    pub acceptance: AutAcceptance,
}

impl DetAutomaton {
    pub fn alphabet_size(&self) -> usize {
        self.delta.first().map_or(0, |r| r.len())
    }

    pub fn check(&self, num_letters: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidPreference(m.to_string()));
        if self.num_states == 0 || self.init >= self.num_states || self.delta.len() != self.num_states {
            return bad("automaton states/initial state inconsistent");
        }
        if self.delta.iter().any(|r| r.len() != num_letters || r.iter().any(|&q| q >= self.num_states)) {
            return bad("automaton transition function not total over the game states");
        }
        let in_range = |s: &BTreeSet<usize>| s.iter().all(|&q| q < self.num_states);
        match &self.acceptance {
            AutAcceptance::Buchi(r) if !in_range(r) => bad("repeated set references unknown state"),
            AutAcceptance::Rabin(p) if p.is_empty() => bad("Rabin automaton needs at least one pair"),
            AutAcceptance::Rabin(p) if !p.iter().all(|(e, f)| in_range(e) && in_range(f)) => {
                bad("Rabin pair references unknown state")
            }
            _ => Ok(()),
        }
    }

    /// Whether a run visiting exactly `inf` infinitely often is accepting.
    pub fn accepts_inf(&self, inf: &BTreeSet<usize>) -> bool {
        match &self.acceptance {
            AutAcceptance::Buchi(r) => !r.is_disjoint(inf),
            AutAcceptance::Rabin(pairs) => pairs
                .iter()
                .any(|(e, f)| !e.is_disjoint(inf) && f.is_disjoint(inf)),
        }
    }

    /// Runs the automaton on `lasso`, reading each state when leaving it,
    /// iterating the cycle until a (cycle position, automaton state) pair
    /// repeats, and reads acceptance off the detected loop.
    pub fn accepts_lasso(&self, lasso: &Lasso) -> bool {
        let mut q = self.init;
        for &s in &lasso.prefix {
            q = self.delta[q][s];
        }
        let k = lasso.cycle.len();
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut trace = Vec::new();
        let mut pos = 0;
        loop {
            if let Some(&start) = seen.get(&(pos, q)) {
                let inf: BTreeSet<usize> = trace[start..].iter().copied().collect();
                return self.accepts_inf(&inf);
            }
            seen.insert((pos, q), trace.len());
            trace.push(q);
            q = self.delta[q][lasso.cycle[pos]];
            pos = (pos + 1) % k;
        }
    }

    /// A one-state automaton accepting every word.
    pub fn trivial(num_letters: usize) -> DetAutomaton {
        DetAutomaton {
            num_states: 1,
            delta: vec![vec![0; num_letters]],
            init: 0,
            acceptance: AutAcceptance::Buchi([0].into()),
        }
    }
}

/// A single objective over the states of a game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Objective {
    Reach(StateSet),
    Safety(StateSet),
    Buchi(StateSet),
    CoBuchi(StateSet),
    /// Min-even parity: `priorities[s]` for every state.
    Parity(Vec<usize>),
    Rabin(Vec<(StateSet, StateSet)>),
    Streett(Vec<(StateSet, StateSet)>),
    Muller { colors: Vec<usize>, accepting: Vec<BTreeSet<usize>> },
    Circuit(BoolCircuit),
    DetBuchiAut(DetAutomaton),
    DetRabinAut(DetAutomaton),
}

/// A preorder on payoff vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preorder {
    Conjunction,
    Disjunction,
    Counting,
    Subset,
    Maximise,
    Lexicographic,
    Circuit(BoolCircuit),
    MonotoneCircuit(BoolCircuit),
}

impl Preorder {
    pub fn name(&self) -> &'static str {
        match self {
            Preorder::Conjunction => "conjunction",
            Preorder::Disjunction => "disjunction",
            Preorder::Counting => "counting",
            Preorder::Subset => "subset",
            Preorder::Maximise => "maximise",
            Preorder::Lexicographic => "lexicographic",
            Preorder::Circuit(_) => "circuit",
            Preorder::MonotoneCircuit(_) => "monotone-circuit",
        }
    }

    pub fn is_total_named(&self) -> bool {
        matches!(
            self,
            Preorder::Conjunction
                | Preorder::Disjunction
                | Preorder::Counting
                | Preorder::Maximise
                | Preorder::Lexicographic
        )
    }

    /// Checks the circuit variants for arity `n`: `2n` inputs, and for
    /// `n <= 4` reflexivity and transitivity by exhaustion.
    pub fn validate(&self, n: usize) -> Result<()> {
        let c = match self {
            Preorder::Circuit(c) | Preorder::MonotoneCircuit(c) => c,
            _ => return Ok(()),
        };
        c.check()?;
        if c.num_inputs != 2 * n {
            return Err(Error::InvalidPreference(format!(
                "preorder circuit has {} inputs, expected {}",
                c.num_inputs,
                2 * n
            )));
        }
        if let Preorder::MonotoneCircuit(c) = self {
            for g in &c.gates {
                if let Gate::Not(a) = *g {
                    if !matches!(c.gates[a], Gate::Input(k) if k < n) {
                        return Err(Error::InvalidPreference(
                            "monotone circuit negates something other than a first-half input".into(),
                        ));
                    }
                }
            }
        }
        if n > 4 {
            log::warn!("preorder circuit of arity {n} accepted without reflexivity/transitivity check");
            return Ok(());
        }
        let all = PayoffVector::all(n);
        let leq = |v: &PayoffVector, w: &PayoffVector| c.eval_raw(&concat(v, w));
        for v in &all {
            if !leq(v, v) {
                return Err(Error::InvalidPreference(format!("preorder circuit not reflexive at {v}")));
            }
        }
        for u in &all {
            for v in &all {
                if !leq(u, v) {
                    continue;
                }
                for w in &all {
                    if leq(v, w) && !leq(u, w) {
                        return Err(Error::InvalidPreference(format!(
                            "preorder circuit not transitive at {u}, {v}, {w}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn concat(v: &PayoffVector, w: &PayoffVector) -> Vec<bool> {
    v.0.iter().chain(&w.0).copied().collect()
}

/// Payoff bit vector; index 0 is the leftmost (most significant) target.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PayoffVector(pub Vec<bool>);

impl PayoffVector {
    pub fn zeros(n: usize) -> PayoffVector {
        PayoffVector(vec![false; n])
    }

    pub fn ones(n: usize) -> PayoffVector {
        PayoffVector(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn from_mask(mask: u64, n: usize) -> PayoffVector {
        PayoffVector((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().enumerate().fold(0, |m, (i, &b)| m | (b as u64) << i)
    }

    /// All `2^n` vectors ordered by number of ones, then lexicographically
    /// (a 0 before a 1 at the first difference).
    pub fn all(n: usize) -> Vec<PayoffVector> {
        let mut v: Vec<PayoffVector> = (0..1u64 << n).map(|m| PayoffVector::from_mask(m, n)).collect();
        v.sort_by(|a, b| a.count().cmp(&b.count()).then_with(|| a.0.cmp(&b.0)));
        v
    }

    pub fn parse(s: &str) -> Result<PayoffVector> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::IncompatibleThreshold(format!("bad payoff bitstring {s:?}"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(PayoffVector)
    }
}

impl fmt::Display for PayoffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PayoffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The preference of one agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preference {
    Single(Objective),
    OrderedBuchi { targets: Vec<StateSet>, preorder: Preorder },
    OrderedReach { targets: Vec<StateSet>, preorder: Preorder },
}

/// The class of a play for one agent: win/lose for single objectives, a
/// payoff vector for ordered ones.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Vector(PayoffVector),
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", *b as u8),
            Value::Vector(v) => write!(f, "{v}"),
        }
    }
}

impl Preference {
    pub fn is_ordered(&self) -> bool {
        !matches!(self, Preference::Single(_))
    }

    pub fn arity(&self) -> usize {
        match self {
            Preference::Single(_) => 1,
            Preference::OrderedBuchi { targets, .. } | Preference::OrderedReach { targets, .. } => targets.len(),
        }
    }

    /// Invariant violations for a game with `ns` states.
    pub fn violations(&self, ns: usize) -> Vec<String> {
        let mut out = Vec::new();
        let check_set = |s: &StateSet, out: &mut Vec<String>| {
            if let Some(&x) = s.iter().find(|&&x| x >= ns) {
                out.push(format!("references unknown state {x}"));
            }
        };
        match self {
            Preference::Single(o) => match o {
                Objective::Reach(t) | Objective::Safety(t) | Objective::Buchi(t) | Objective::CoBuchi(t) => {
                    check_set(t, &mut out)
                }
                Objective::Parity(p) => {
                    if p.len() != ns {
                        out.push("parity priorities must cover every state".into());
                    }
                    if p.iter().any(|&x| x > 2 * ns) {
                        out.push("parity priority exceeds 2|Stat|".into());
                    }
                }
                Objective::Rabin(pairs) | Objective::Streett(pairs) => {
                    if pairs.is_empty() {
                        out.push("pair list is empty".into());
                    }
                    for (q, r) in pairs {
                        check_set(q, &mut out);
                        check_set(r, &mut out);
                    }
                }
                Objective::Muller { colors, .. } => {
                    if colors.len() != ns {
                        out.push("Muller coloring must cover every state".into());
                    }
                }
                Objective::Circuit(c) => {
                    if c.num_inputs != ns {
                        out.push(format!("circuit has {} inputs for {ns} states", c.num_inputs));
                    }
                    if let Err(e) = c.check() {
                        out.push(e.to_string());
                    }
                }
                Objective::DetBuchiAut(a) | Objective::DetRabinAut(a) => {
                    if let Err(e) = a.check(ns) {
                        out.push(e.to_string());
                    }
                    let ok = matches!(
                        (o, &a.acceptance),
                        (Objective::DetBuchiAut(_), AutAcceptance::Buchi(_))
                            | (Objective::DetRabinAut(_), AutAcceptance::Rabin(_))
                    );
                    if !ok {
                        out.push("automaton acceptance does not match objective kind".into());
                    }
                }
            },
            Preference::OrderedBuchi { targets, preorder } | Preference::OrderedReach { targets, preorder } => {
                if targets.is_empty() {
                    out.push("ordered objective with no targets".into());
                }
                for t in targets {
                    check_set(t, &mut out);
                }
                if let Err(e) = preorder.validate(targets.len()) {
                    out.push(e.to_string());
                }
            }
        }
        out
    }

    /// Class of a play with the given `(occ, inf)`; automaton objectives
    /// need the full lasso (see [`Preference::value_of_lasso`]).
    pub fn value_of_sets(&self, occ: &StateSet, inf: &StateSet) -> Result<Value> {
        match self {
            Preference::Single(o) => eval_objective(occ, inf, o).map(Value::Bool),
            _ => payoff_vector(occ, inf, self).map(Value::Vector),
        }
    }

    pub fn value_of_lasso(&self, lasso: &Lasso) -> Value {
        match self {
            Preference::Single(Objective::DetBuchiAut(a)) | Preference::Single(Objective::DetRabinAut(a)) => {
                Value::Bool(a.accepts_lasso(lasso))
            }
            _ => self
                .value_of_sets(&lasso.occ(), &lasso.inf())
                .expect("non-automaton preference"),
        }
    }

    /// `a ⪯ b` for two classes of this preference.
    pub fn leq(&self, a: &Value, b: &Value) -> bool {
        match (self, a, b) {
            (Preference::Single(_), Value::Bool(x), Value::Bool(y)) => !x || *y,
            (
                Preference::OrderedBuchi { preorder, .. } | Preference::OrderedReach { preorder, .. },
                Value::Vector(v),
                Value::Vector(w),
            ) => leq(preorder, v, w),
            _ => panic!("value kind does not match preference"),
        }
    }

    /// All classes of this preference, in enumeration order.
    pub fn all_values(&self) -> Vec<Value> {
        match self {
            Preference::Single(_) => vec![Value::Bool(false), Value::Bool(true)],
            _ => PayoffVector::all(self.arity()).into_iter().map(Value::Vector).collect(),
        }
    }

    pub fn is_value_compatible(&self, v: &Value) -> bool {
        match (self, v) {
            (Preference::Single(_), Value::Bool(_)) => true,
            (_, Value::Vector(p)) => self.is_ordered() && p.len() == self.arity(),
            _ => false,
        }
    }

    /// Rewrites every state reference through `lift`, which maps a state of
    /// the original game to its preimage states in a derived game with
    /// `new_ns` states; `project` maps each derived state back.
    pub fn lift(&self, project: &[StateId], new_ns: usize) -> Preference {
        let lift_set = |t: &StateSet| -> StateSet { (0..new_ns).filter(|&s| t.contains(&project[s])).collect() };
        let lift_pairs = |p: &Vec<(StateSet, StateSet)>| p.iter().map(|(q, r)| (lift_set(q), lift_set(r))).collect();
        let lift_aut = |a: &DetAutomaton| DetAutomaton {
            num_states: a.num_states,
            delta: a.delta.iter().map(|row| (0..new_ns).map(|s| row[project[s]]).collect()).collect(),
            init: a.init,
            acceptance: a.acceptance.clone(),
        };
        match self {
            Preference::Single(o) => Preference::Single(match o {
                Objective::Reach(t) => Objective::Reach(lift_set(t)),
                Objective::Safety(t) => Objective::Safety(lift_set(t)),
                Objective::Buchi(t) => Objective::Buchi(lift_set(t)),
                Objective::CoBuchi(t) => Objective::CoBuchi(lift_set(t)),
                Objective::Parity(p) => Objective::Parity((0..new_ns).map(|s| p[project[s]]).collect()),
                Objective::Rabin(p) => Objective::Rabin(lift_pairs(p)),
                Objective::Streett(p) => Objective::Streett(lift_pairs(p)),
                Objective::Muller { colors, accepting } => Objective::Muller {
                    colors: (0..new_ns).map(|s| colors[project[s]]).collect(),
                    accepting: accepting.clone(),
                },
                Objective::Circuit(c) => {
                    let mut nc = BoolCircuit::new(new_ns);
                    let ins: Vec<usize> = (0..c.num_inputs)
                        .map(|k| {
                            let pre: Vec<usize> = (0..new_ns).filter(|&s| project[s] == k).collect();
                            let gs: Vec<usize> = pre.iter().map(|&s| nc.input(s)).collect();
                            nc.or_all(&gs)
                        })
                        .collect();
                    let out = nc.embed(c, &ins);
                    nc.set_output(out);
                    Objective::Circuit(nc)
                }
                Objective::DetBuchiAut(a) => Objective::DetBuchiAut(lift_aut(a)),
                Objective::DetRabinAut(a) => Objective::DetRabinAut(lift_aut(a)),
            }),
            Preference::OrderedBuchi { targets, preorder } => Preference::OrderedBuchi {
                targets: targets.iter().map(lift_set).collect(),
                preorder: preorder.clone(),
            },
            Preference::OrderedReach { targets, preorder } => Preference::OrderedReach {
                targets: targets.iter().map(lift_set).collect(),
                preorder: preorder.clone(),
            },
        }
    }
}

/// Whether a play with exactly these `occ`/`inf` sets satisfies `obj`.
pub fn eval_objective(occ: &StateSet, inf: &StateSet, obj: &Objective) -> Result<bool> {
    Ok(match obj {
        Objective::Reach(t) => !occ.is_disjoint(t),
        Objective::Safety(t) => occ.is_disjoint(t),
        Objective::Buchi(t) => !inf.is_disjoint(t),
        Objective::CoBuchi(t) => inf.is_disjoint(t),
        Objective::Parity(p) => inf.iter().map(|&s| p[s]).min().is_some_and(|m| m % 2 == 0),
        Objective::Rabin(pairs) => pairs.iter().any(|(q, r)| !inf.is_disjoint(q) && inf.is_disjoint(r)),
        Objective::Streett(pairs) => pairs.iter().all(|(q, r)| inf.is_disjoint(q) || !inf.is_disjoint(r)),
        Objective::Muller { colors, accepting } => {
            let seen: BTreeSet<usize> = inf.iter().map(|&s| colors[s]).collect();
            accepting.contains(&seen)
        }
        Objective::Circuit(c) => {
            let ins: Vec<bool> = (0..c.num_inputs).map(|k| inf.contains(&k)).collect();
            c.eval_raw(&ins)
        }
        Objective::DetBuchiAut(_) | Objective::DetRabinAut(_) => {
            return Err(Error::Unsupported(
                "automaton objectives are evaluated on lassos or through the product".into(),
            ))
        }
    })
}

/// Payoff vector of an ordered preference for a play with these sets.
pub fn payoff_vector(occ: &StateSet, inf: &StateSet, pref: &Preference) -> Result<PayoffVector> {
    match pref {
        Preference::OrderedBuchi { targets, .. } => {
            Ok(PayoffVector(targets.iter().map(|t| !inf.is_disjoint(t)).collect()))
        }
        Preference::OrderedReach { targets, .. } => {
            Ok(PayoffVector(targets.iter().map(|t| !occ.is_disjoint(t)).collect()))
        }
        Preference::Single(_) => Err(Error::Unsupported("payoff vector of a single objective".into())),
    }
}

/// Outcome of comparing two payoff vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Equivalent,
    Greater,
    Incomparable,
}

fn max_index(v: &PayoffVector) -> Option<usize> {
    v.0.iter().rposition(|&b| b)
}

/// `v ⪯ w` under `pre`; arities are assumed to match.
pub fn leq(pre: &Preorder, v: &PayoffVector, w: &PayoffVector) -> bool {
    let all = |x: &PayoffVector| x.0.iter().all(|&b| b);
    let any = |x: &PayoffVector| x.0.iter().any(|&b| b);
    match pre {
        Preorder::Conjunction => !all(v) || all(w),
        Preorder::Disjunction => !any(v) || any(w),
        Preorder::Counting => v.count() <= w.count(),
        Preorder::Subset => v.0.iter().zip(&w.0).all(|(&a, &b)| !a || b),
        Preorder::Maximise => match (max_index(v), max_index(w)) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        },
        Preorder::Lexicographic => v.0 <= w.0,
        Preorder::Circuit(c) | Preorder::MonotoneCircuit(c) => c.eval_raw(&concat(v, w)),
    }
}

pub fn compare(pre: &Preorder, v: &PayoffVector, w: &PayoffVector) -> Result<Comparison> {
    if v.len() != w.len() {
        return Err(Error::ArityMismatch { expected: v.len(), got: w.len() });
    }
    if let Preorder::Circuit(c) | Preorder::MonotoneCircuit(c) = pre {
        if c.num_inputs != 2 * v.len() {
            return Err(Error::ArityMismatch { expected: c.num_inputs, got: 2 * v.len() });
        }
    }
    Ok(match (leq(pre, v, w), leq(pre, w, v)) {
        (true, true) => Comparison::Equivalent,
        (true, false) => Comparison::Less,
        (false, true) => Comparison::Greater,
        (false, false) => Comparison::Incomparable,
    })
}

/// A circuit with inputs `v · w` (2n bits) computing `v ⪯ w`.
pub fn preorder_to_circuit(pre: &Preorder, n: usize) -> Result<BoolCircuit> {
    let mut c = BoolCircuit::new(2 * n);
    let v: Vec<usize> = (0..n).map(|i| c.input(i)).collect();
    let w: Vec<usize> = (0..n).map(|i| c.input(n + i)).collect();
    let out = match pre {
        Preorder::Conjunction => {
            let av = c.and_all(&v);
            let aw = c.and_all(&w);
            c.implies(av, aw)
        }
        Preorder::Disjunction => {
            let ov = c.or_all(&v);
            let ow = c.or_all(&w);
            c.implies(ov, ow)
        }
        Preorder::Subset => {
            let parts: Vec<usize> = (0..n).map(|i| c.implies(v[i], w[i])).collect();
            c.and_all(&parts)
        }
        Preorder::Maximise => {
            let parts: Vec<usize> = (0..n)
                .map(|i| {
                    let above = c.or_all(&w[i..]);
                    c.implies(v[i], above)
                })
                .collect();
            c.and_all(&parts)
        }
        Preorder::Lexicographic => {
            let mut le = c.constant(true);
            for i in (0..n).rev() {
                let nv = c.not(v[i]);
                let strict = c.and(nv, w[i]);
                let eq = c.iff(v[i], w[i]);
                let keep = c.and(eq, le);
                le = c.or(strict, keep);
            }
            le
        }
        Preorder::Counting => {
            let at_least_v = at_least_counts(&mut c, &v);
            let at_least_w = at_least_counts(&mut c, &w);
            let parts: Vec<usize> = (1..=n).map(|k| c.implies(at_least_v[k], at_least_w[k])).collect();
            c.and_all(&parts)
        }
        Preorder::Circuit(_) | Preorder::MonotoneCircuit(_) => {
            return Err(Error::Unsupported("preorder is already a circuit".into()))
        }
    };
    c.set_output(out);
    Ok(c)
}

/// `res[k]` is a gate that is true iff at least `k` of `xs` are true.
fn at_least_counts(c: &mut BoolCircuit, xs: &[usize]) -> Vec<usize> {
    let n = xs.len();
    let t = c.constant(true);
    let f = c.constant(false);
    let mut cnt = vec![f; n + 1];
    cnt[0] = t;
    for &x in xs {
        let mut next = cnt.clone();
        for k in 1..=n {
            let step = c.and(cnt[k - 1], x);
            next[k] = c.or(cnt[k], step);
        }
        cnt = next;
    }
    cnt
}

/// Exhaustive check that bitwise `v ≤ w` implies `v ⪯ w`.
pub fn is_monotone(pre: &Preorder, n: usize) -> Result<bool> {
    if n > 10 {
        return Err(Error::GuardExceeded(format!("monotonicity check for arity {n} (max 10)")));
    }
    for vm in 0..1u64 << n {
        let v = PayoffVector::from_mask(vm, n);
        let mut rest = !vm & ((1u64 << n) - 1);
        // enumerate supersets w of v
        loop {
            let w = PayoffVector::from_mask(vm | rest, n);
            if !leq(pre, &v, &w) {
                return Ok(false);
            }
            if rest == 0 {
                break;
            }
            rest = (rest - 1) & !vm & ((1u64 << n) - 1);
        }
    }
    Ok(true)
}

/// Whether the preorder is one of the shipped monotone preorders, or a
/// circuit that passes the exhaustive check.
pub fn preorder_is_monotone(pre: &Preorder, n: usize) -> bool {
    match pre {
        Preorder::Circuit(_) | Preorder::MonotoneCircuit(_) => is_monotone(pre, n).unwrap_or(false),
        _ => true,
    }
}

/// Rabin pairs equivalent to the min-even parity condition `p`:
/// `Q_i = p^{-1}(2i)` and `R_i = p^{-1}{2j+1 | j < i}`.
pub fn parity_to_rabin(p: &[usize]) -> Vec<(StateSet, StateSet)> {
    let max = p.iter().copied().max().unwrap_or(0);
    (0..=max / 2)
        .map(|i| {
            let q: StateSet = (0..p.len()).filter(|&s| p[s] == 2 * i).collect();
            let r: StateSet = (0..p.len()).filter(|&s| p[s] % 2 == 1 && p[s] < 2 * i).collect();
            (q, r)
        })
        .collect()
}
