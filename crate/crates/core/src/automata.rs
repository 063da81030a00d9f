//! Alternating automata over regular labeled trees.
//!
//! Letters and directions are indices. A run reads the label of a node in
//! some state and sends copies to children according to a positive Boolean
//! formula over atoms `(direction, state)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::composition::RegularTree;
use crate::error::{Error, Result};
use crate::games::{solve_parity_game, Arena};
use crate::mdp::{Label, LabelTriple};
use crate::model::{Composer, Direction, ExitControlRelation};

pub type Atom = (Direction, usize);

/// Positive Boolean formula over atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Direction, usize),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(d: Direction, q: usize) -> Formula {
        Formula::Atom(d, q)
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items = BTreeSet::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => items.extend(inner),
                other => {
                    items.insert(other);
                }
            }
        }
        // a ∧ (a ∨ b) = a
        let absorbed: Vec<Formula> = items
            .iter()
            .filter(|x| matches!(x, Formula::Or(ds) if ds.iter().any(|d| items.contains(d))))
            .cloned()
            .collect();
        for x in &absorbed {
            items.remove(x);
        }
        match items.len() {
            0 => Formula::True,
            1 => items.into_iter().next().unwrap(),
            _ => Formula::And(items.into_iter().collect()),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items = BTreeSet::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => items.extend(inner),
                other => {
                    items.insert(other);
                }
            }
        }
        let absorbed: Vec<Formula> = items
            .iter()
            .filter(|x| matches!(x, Formula::And(cs) if cs.iter().any(|c| items.contains(c))))
            .cloned()
            .collect();
        for x in &absorbed {
            items.remove(x);
        }
        match items.len() {
            0 => Formula::False,
            1 => items.into_iter().next().unwrap(),
            _ => Formula::Or(items.into_iter().collect()),
        }
    }

    /// Swaps conjunction with disjunction and `True` with `False`.
    pub fn dual(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(d, q) => Formula::Atom(*d, *q),
            Formula::And(xs) => Formula::Or(xs.iter().map(Formula::dual).collect()),
            Formula::Or(xs) => Formula::And(xs.iter().map(Formula::dual).collect()),
        }
    }

    /// Replaces every atom, simplifying constants on the way.
    pub fn substitute(&self, f: &mut impl FnMut(Direction, usize) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(d, q) => f(*d, *q),
            Formula::And(xs) => Formula::and(xs.iter().map(|x| x.substitute(f)).collect::<Vec<_>>()),
            Formula::Or(xs) => Formula::or(xs.iter().map(|x| x.substitute(f)).collect::<Vec<_>>()),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(d, q) => {
                out.insert((*d, *q));
            }
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.collect_atoms(out)),
            _ => {}
        }
    }

    pub fn eval(&self, set: &BTreeSet<Atom>) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(d, q) => set.contains(&(*d, *q)),
            Formula::And(xs) => xs.iter().all(|x| x.eval(set)),
            Formula::Or(xs) => xs.iter().any(|x| x.eval(set)),
        }
    }

    /// Minimal satisfying atom sets, each sorted. `True` has the single
    /// model `[]`; `False` has none.
    pub fn models(&self) -> Vec<Vec<Atom>> {
        match self {
            Formula::True => vec![Vec::new()],
            Formula::False => Vec::new(),
            Formula::Atom(d, q) => vec![vec![(*d, *q)]],
            Formula::Or(xs) => minimize(xs.iter().flat_map(Formula::models).collect()),
            Formula::And(xs) => {
                let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
                for x in xs {
                    let ms = x.models();
                    let mut next = Vec::with_capacity(acc.len() * ms.len());
                    for a in &acc {
                        for m in &ms {
                            let mut u = a.clone();
                            u.extend_from_slice(m);
                            u.sort_unstable();
                            u.dedup();
                            next.push(u);
                        }
                    }
                    acc = minimize(next);
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Whether every model is a single conjunction of atoms (no choice).
    pub fn is_conjunctive(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => true,
            Formula::And(xs) => xs.iter().all(Formula::is_conjunctive),
            Formula::Or(_) => false,
        }
    }
}

fn minimize(mut sets: Vec<Vec<Atom>>) -> Vec<Vec<Atom>> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<Vec<Atom>> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| m.iter().all(|x| s.binary_search(x).is_ok())) {
            out.push(s);
        }
    }
    out.sort();
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(d, q) => write!(f, "({d},{q})"),
            Formula::And(xs) | Formula::Or(xs) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Acceptance condition on the branches of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Acceptance {
    /// Accepting states must recur.
    Buchi(Vec<bool>),
    /// Rejecting states must eventually stop occurring.
    CoBuchi(Vec<bool>),
    /// Least priority seen infinitely often must be even.
    Parity(Vec<u32>),
}

impl Acceptance {
    pub fn len(&self) -> usize {
        match self {
            Acceptance::Buchi(v) | Acceptance::CoBuchi(v) => v.len(),
            Acceptance::Parity(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether a branch that eventually stays in `q` is accepting.
    pub fn accepts_loop(&self, q: usize) -> bool {
        match self {
            Acceptance::Buchi(b) => b[q],
            Acceptance::CoBuchi(r) => !r[q],
            Acceptance::Parity(c) => c[q] % 2 == 0,
        }
    }

    /// Acceptance on states renumbered by `origin[new] = old`, with `fresh`
    /// for states without origin.
    fn remap(&self, origin: &[Option<usize>]) -> Acceptance {
        match self {
            Acceptance::Buchi(b) => Acceptance::Buchi(origin.iter().map(|o| o.is_some_and(|q| b[q])).collect()),
            Acceptance::CoBuchi(r) => Acceptance::CoBuchi(origin.iter().map(|o| o.is_some_and(|q| r[q])).collect()),
            Acceptance::Parity(c) => {
                let top = c.iter().copied().max().unwrap_or(0);
                let fresh = top + 1 + top % 2;
                Acceptance::Parity(origin.iter().map(|o| o.map_or(fresh, |q| c[q])).collect())
            }
        }
    }

    /// Priority of `q` for a max-even game in which player 0 plays for
    /// acceptance. `top` is the largest min-even priority in use.
    fn game_priority(&self, q: usize, top: u32) -> u32 {
        match self {
            Acceptance::Buchi(b) => {
                if b[q] {
                    2
                } else {
                    1
                }
            }
            Acceptance::CoBuchi(r) => {
                if r[q] {
                    1
                } else {
                    0
                }
            }
            Acceptance::Parity(c) => top + top % 2 + 2 - c[q],
        }
    }
}

/// Alternating tree automaton. `delta[q][letter]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeAutomaton {
    pub num_letters: usize,
    pub num_dirs: usize,
    pub states: Vec<String>,
    pub start: usize,
    pub delta: Vec<Vec<Formula>>,
    pub acceptance: Acceptance,
}

impl TreeAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Whether every transition is a conjunction (no nondeterminism).
    pub fn is_universal(&self) -> bool {
        self.delta.iter().flatten().all(Formula::is_conjunctive)
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.start >= self.len() || self.acceptance.len() != self.len() || self.delta.len() != self.len() {
            return Err(Error::Shape("state tables have mismatched lengths".into()));
        }
        for row in &self.delta {
            if row.len() != self.num_letters {
                return Err(Error::Shape("transition function is not total".into()));
            }
            for f in row {
                if f.atoms().iter().any(|&(d, q)| d >= self.num_dirs || q >= self.len()) {
                    return Err(Error::Shape("atom out of range".into()));
                }
            }
        }
        Ok(())
    }

    /// Replaces states that behave like constants (accepting or rejecting
    /// sinks, states whose every transition is constant) by those constants,
    /// then drops unreachable states.
    pub fn simplify(&self) -> TreeAutomaton {
        let mut delta = self.delta.clone();
        let mut value: Vec<Option<bool>> = vec![None; self.len()];
        loop {
            let mut changed = false;
            for q in 0..self.len() {
                if value[q].is_some() {
                    continue;
                }
                let row = &delta[q];
                let only_self = row.iter().all(|f| f.atoms().iter().all(|&(_, t)| t == q));
                let v = if row.iter().all(|f| *f == Formula::True) {
                    Some(true)
                } else if row.iter().all(|f| *f == Formula::False) {
                    Some(false)
                } else if only_self && self.acceptance.accepts_loop(q) && !row.contains(&Formula::False) {
                    Some(true)
                } else if only_self && !self.acceptance.accepts_loop(q) && !row.contains(&Formula::True) {
                    Some(false)
                } else {
                    None
                };
                if v.is_some() {
                    value[q] = v;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            for row in delta.iter_mut() {
                for f in row.iter_mut() {
                    *f = f.substitute(&mut |d, t| match value[t] {
                        Some(true) => Formula::True,
                        Some(false) => Formula::False,
                        None => Formula::Atom(d, t),
                    });
                }
            }
        }
        let folded = TreeAutomaton { delta, ..self.clone() };
        folded.merge_bisimilar().reachable_part()
    }

    /// Merges states with the same acceptance whose transitions coincide up
    /// to merged states.
    pub fn merge_bisimilar(&self) -> TreeAutomaton {
        let key = |q: usize| match &self.acceptance {
            Acceptance::Buchi(v) | Acceptance::CoBuchi(v) => v[q] as u32,
            Acceptance::Parity(c) => c[q],
        };
        let mut class: Vec<usize> = renumber_by(&(0..self.len()).map(key).collect::<Vec<_>>());
        loop {
            let signatures: Vec<(usize, Vec<Formula>)> = (0..self.len())
                .map(|q| {
                    let row = self.delta[q]
                        .iter()
                        .map(|f| f.substitute(&mut |d, t| Formula::Atom(d, class[t])))
                        .collect();
                    (class[q], row)
                })
                .collect();
            let refined = renumber_by(&signatures);
            let before = class.iter().max().map_or(0, |m| m + 1);
            let after = refined.iter().max().map_or(0, |m| m + 1);
            class = refined;
            if after == before {
                break;
            }
        }
        let count = class.iter().max().map_or(0, |m| m + 1);
        let mut origin: Vec<Option<usize>> = vec![None; count];
        for q in 0..self.len() {
            origin[class[q]].get_or_insert(q);
        }
        TreeAutomaton {
            num_letters: self.num_letters,
            num_dirs: self.num_dirs,
            states: origin.iter().map(|o| self.states[o.unwrap()].clone()).collect(),
            start: class[self.start],
            delta: origin
                .iter()
                .map(|o| {
                    self.delta[o.unwrap()]
                        .iter()
                        .map(|f| f.substitute(&mut |d, t| Formula::Atom(d, class[t])))
                        .collect()
                })
                .collect(),
            acceptance: self.acceptance.remap(&origin),
        }
    }

    /// Restriction to the states reachable from the start.
    fn reachable_part(&self) -> TreeAutomaton {
        let delta = &self.delta;
        let mut keep = vec![false; self.len()];
        let mut stack = vec![self.start];
        keep[self.start] = true;
        while let Some(q) = stack.pop() {
            for f in &delta[q] {
                for (_, t) in f.atoms() {
                    if !keep[t] {
                        keep[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        let origin: Vec<Option<usize>> = (0..self.len()).filter(|&q| keep[q]).map(Some).collect();
        let mut renumber = vec![usize::MAX; self.len()];
        for (i, o) in origin.iter().enumerate() {
            renumber[o.unwrap()] = i;
        }
        TreeAutomaton {
            num_letters: self.num_letters,
            num_dirs: self.num_dirs,
            states: origin.iter().map(|o| self.states[o.unwrap()].clone()).collect(),
            start: renumber[self.start],
            delta: origin
                .iter()
                .map(|o| {
                    delta[o.unwrap()]
                        .iter()
                        .map(|f| f.substitute(&mut |d, t| Formula::Atom(d, renumber[t])))
                        .collect()
                })
                .collect(),
            acceptance: self.acceptance.remap(&origin),
        }
    }
}

/// Choice function: a label for every composer instance.
pub type ChoiceFunction = Vec<Label>;

/// Checks that `g` labels every instance with a label of its component.
pub fn check_choice(c: &Composer, g: &[Label], gamma: &BTreeSet<LabelTriple>) -> Result<()> {
    if g.len() != c.len() {
        return Err(Error::Choice(format!("{} labels for {} instances", g.len(), c.len())));
    }
    for (m, l) in g.iter().enumerate() {
        let t = LabelTriple {
            exits: l.exits,
            priority: l.priority,
            component: c.component[m],
        };
        if !gamma.contains(&t) {
            return Err(Error::Choice(format!(
                "({}, {}) is not a label of the component of instance {}",
                l.exits, l.priority, c.instances[m]
            )));
        }
    }
    Ok(())
}

/// Graph `G_{C,g}`: instance `m` has an edge along every selected exit.
pub fn choice_graph(c: &Composer, g: &[Label]) -> crate::graph::SupportGraph {
    let mut graph = crate::graph::SupportGraph::new(c.len());
    for (m, l) in g.iter().enumerate() {
        for d in l.exits.iter() {
            graph.add_edge(m, c.next[m][d]);
        }
    }
    graph
}

/// The ranks of `g`: highest priorities of the reachable ergodic sets of
/// `G_{C,g}`.
pub fn choice_rank(c: &Composer, g: &[Label]) -> Result<BTreeSet<u32>> {
    if g.len() != c.len() {
        return Err(Error::Choice(format!("{} labels for {} instances", g.len(), c.len())));
    }
    if g.iter().any(|l| l.exits.iter().any(|d| d >= c.next[0].len())) {
        return Err(Error::Choice(
            "exit set names a direction outside the library width".into(),
        ));
    }
    let graph = choice_graph(c, g);
    let reach = graph.reachable_from(c.start);
    Ok(graph
        .bottom_sccs()
        .into_iter()
        .filter(|e| reach[e[0]])
        .map(|e| e.iter().map(|&m| g[m].priority).max().unwrap())
        .collect())
}

pub const SEARCH: usize = 0;
pub const CUT: usize = 1;
pub const WAIT: usize = 2;
pub const REACH: usize = 3;
pub const VISIT: usize = 4;
pub const ERR: usize = 5;
pub const ACC: usize = 6;

const RANK_STATES: [&str; 7] = ["search", "cut", "wait", "reach", "visit", "err", "acc"];

fn fan(width: usize, mut state_at: impl FnMut(Direction) -> usize) -> Formula {
    Formula::and((0..width).map(|d| Formula::atom(d, state_at(d))).collect::<Vec<_>>())
}

fn marked_step(p: u32, width: usize, l: Label) -> Formula {
    let x = l.exits;
    if l.priority > p {
        fan(width, |_| ERR)
    } else if x.is_empty() {
        if l.priority == p {
            fan(width, |_| ACC)
        } else {
            Formula::False
        }
    } else if l.priority == p {
        fan(width, |d| if x.contains(d) { VISIT } else { CUT })
    } else {
        Formula::or(
            x.iter()
                .map(|r| {
                    fan(width, |d| {
                        if d == r {
                            REACH
                        } else if x.contains(d) {
                            WAIT
                        } else {
                            CUT
                        }
                    })
                })
                .collect::<Vec<_>>(),
        )
    }
}

fn search_step(p: u32, width: usize, l: Label) -> Formula {
    let x = l.exits;
    let mut options: Vec<Formula> = x
        .iter()
        .map(|s| fan(width, |d| if d == s { SEARCH } else { CUT }))
        .collect();
    if x.is_empty() && l.priority == p {
        options.push(fan(width, |_| ACC));
    } else if !x.is_empty() && l.priority <= p {
        options.push(fan(width, |d| if x.contains(d) { WAIT } else { CUT }));
    }
    Formula::or(options)
}

/// Büchi automaton over the letters `gamma` accepting `tree(C, g)` iff
/// `g` has rank `p`.
pub fn build_rank_nbt(p: u32, width: usize, gamma: &[LabelTriple]) -> TreeAutomaton {
    let mut delta = vec![Vec::with_capacity(gamma.len()); RANK_STATES.len()];
    for t in gamma {
        let l = t.label();
        delta[SEARCH].push(search_step(p, width, l));
        delta[CUT].push(fan(width, |_| CUT));
        for q in [WAIT, REACH, VISIT] {
            delta[q].push(marked_step(p, width, l));
        }
        delta[ERR].push(fan(width, |_| ERR));
        delta[ACC].push(fan(width, |_| ACC));
    }
    let accepting = (0..RANK_STATES.len())
        .map(|q| matches!(q, VISIT | WAIT | CUT | ACC))
        .collect();
    TreeAutomaton {
        num_letters: gamma.len(),
        num_dirs: width,
        states: RANK_STATES.iter().map(|s| s.to_string()).collect(),
        start: SEARCH,
        delta,
        acceptance: Acceptance::Buchi(accepting),
    }
}

/// Reads components instead of labels, guessing the label of each node:
/// `δ'(q, M)` is the disjunction of `δ(q, ℓ)` over the labels `ℓ` of `M`.
pub fn project_labels(a: &TreeAutomaton, gamma: &[LabelTriple], num_components: usize) -> TreeAutomaton {
    let delta = a
        .delta
        .iter()
        .map(|row| {
            (0..num_components)
                .map(|m| {
                    Formula::or(
                        gamma
                            .iter()
                            .enumerate()
                            .filter(|(_, t)| t.component == m)
                            .map(|(i, _)| row[i].clone())
                            .collect::<Vec<_>>(),
                    )
                })
                .collect()
        })
        .collect();
    TreeAutomaton {
        num_letters: num_components,
        delta,
        ..a.clone()
    }
}

fn shifted(f: &Formula, offset: usize) -> Formula {
    f.substitute(&mut |d, q| Formula::Atom(d, q + offset))
}

/// Disjoint union with a fresh start choosing one member.
pub fn union(automata: &[TreeAutomaton], num_letters: usize, num_dirs: usize) -> Result<TreeAutomaton> {
    let mut states = vec!["union".to_string()];
    let mut start_row = vec![Vec::new(); num_letters];
    let mut delta: Vec<Vec<Formula>> = Vec::new();
    let mut accepting = vec![false];
    for (i, a) in automata.iter().enumerate() {
        let Acceptance::Buchi(b) = &a.acceptance else {
            return Err(Error::Shape("union expects Büchi automata".into()));
        };
        if a.num_letters != num_letters || a.num_dirs != num_dirs {
            return Err(Error::Shape("union members differ in alphabet or directions".into()));
        }
        let offset = states.len();
        for (letter, f) in a.delta[a.start].iter().enumerate() {
            start_row[letter].push(shifted(f, offset));
        }
        states.extend(a.states.iter().map(|s| format!("{i}.{s}")));
        delta.extend(
            a.delta
                .iter()
                .map(|row| row.iter().map(|f| shifted(f, offset)).collect::<Vec<_>>()),
        );
        accepting.extend(b.iter().copied());
    }
    let mut all = vec![start_row.into_iter().map(Formula::or).collect::<Vec<_>>()];
    all.extend(delta);
    Ok(TreeAutomaton {
        num_letters,
        num_dirs,
        states,
        start: 0,
        delta: all,
        acceptance: Acceptance::Buchi(accepting),
    })
}

/// Complement by dualization.
pub fn dualize(a: &TreeAutomaton) -> TreeAutomaton {
    let acceptance = match &a.acceptance {
        Acceptance::Buchi(b) => Acceptance::CoBuchi(b.clone()),
        Acceptance::CoBuchi(r) => Acceptance::Buchi(r.clone()),
        Acceptance::Parity(c) => Acceptance::Parity(c.iter().map(|x| x + 1).collect()),
    };
    TreeAutomaton {
        delta: a
            .delta
            .iter()
            .map(|row| row.iter().map(Formula::dual).collect())
            .collect(),
        acceptance,
        ..a.clone()
    }
}

/// Safety automaton accepting `tree(C)` iff `C` is compatible with
/// `relation`. State `0` is the start, state `1 + i` expects a component
/// allowed after exit `i`.
pub fn build_safety(relation: &ExitControlRelation, width: usize, num_components: usize) -> TreeAutomaton {
    let spread = fan(width, |d| 1 + d);
    let mut delta = vec![vec![spread.clone(); num_components]];
    for i in 0..width {
        delta.push(
            (0..num_components)
                .map(|m| {
                    if relation.allows(i, m) {
                        spread.clone()
                    } else {
                        Formula::False
                    }
                })
                .collect(),
        );
    }
    let mut states = vec!["start".to_string()];
    states.extend((0..width).map(|i| format!("after{i}")));
    TreeAutomaton {
        num_letters: num_components,
        num_dirs: width,
        start: 0,
        acceptance: Acceptance::Buchi(vec![true; width + 1]),
        states,
        delta,
    }
}

impl Acceptance {
    fn is_trivial(&self) -> bool {
        match self {
            Acceptance::Buchi(b) => b.iter().all(|&x| x),
            Acceptance::CoBuchi(r) => r.iter().all(|&x| !x),
            Acceptance::Parity(c) => c.iter().all(|x| x % 2 == 0),
        }
    }

    /// An everywhere-accepting condition of the same kind as `self`.
    fn trivial_like(&self, n: usize) -> Acceptance {
        match self {
            Acceptance::Buchi(_) => Acceptance::Buchi(vec![true; n]),
            Acceptance::CoBuchi(_) => Acceptance::CoBuchi(vec![false; n]),
            Acceptance::Parity(_) => Acceptance::Parity(vec![0; n]),
        }
    }

    fn concat(&self, other: &Acceptance) -> Option<Acceptance> {
        Some(match (self, other) {
            (Acceptance::Buchi(a), Acceptance::Buchi(b)) => Acceptance::Buchi([a.as_slice(), b].concat()),
            (Acceptance::CoBuchi(a), Acceptance::CoBuchi(b)) => Acceptance::CoBuchi([a.as_slice(), b].concat()),
            (Acceptance::Parity(a), Acceptance::Parity(b)) => Acceptance::Parity([a.as_slice(), b].concat()),
            _ => return None,
        })
    }
}

/// Intersection: a fresh start that runs both automata from the root.
/// Acceptance kinds must agree unless one side accepts every infinite
/// branch (as safety automata do).
pub fn intersect(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton> {
    if a.num_letters != b.num_letters || a.num_dirs != b.num_dirs {
        return Err(Error::Shape("intersection of automata over different alphabets".into()));
    }
    let (acc_a, acc_b) = if a.acceptance.is_trivial() {
        (b.acceptance.trivial_like(a.len()), b.acceptance.clone())
    } else if b.acceptance.is_trivial() {
        (a.acceptance.clone(), a.acceptance.trivial_like(b.len()))
    } else {
        (a.acceptance.clone(), b.acceptance.clone())
    };
    let both = acc_a
        .concat(&acc_b)
        .ok_or_else(|| Error::Shape("intersection of automata with different acceptance kinds".into()))?;
    let fresh = both.trivial_like(1);
    let acceptance = fresh.concat(&both).unwrap();
    let off_a = 1;
    let off_b = 1 + a.len();
    let start_row = (0..a.num_letters)
        .map(|letter| {
            Formula::and([
                shifted(&a.delta[a.start][letter], off_a),
                shifted(&b.delta[b.start][letter], off_b),
            ])
        })
        .collect();
    let mut delta = vec![start_row];
    delta.extend(
        a.delta
            .iter()
            .map(|row| row.iter().map(|f| shifted(f, off_a)).collect::<Vec<_>>()),
    );
    delta.extend(
        b.delta
            .iter()
            .map(|row| row.iter().map(|f| shifted(f, off_b)).collect::<Vec<_>>()),
    );
    let mut states = vec!["both".to_string()];
    states.extend(a.states.iter().map(|s| format!("l.{s}")));
    states.extend(b.states.iter().map(|s| format!("r.{s}")));
    Ok(TreeAutomaton {
        num_letters: a.num_letters,
        num_dirs: a.num_dirs,
        states,
        start: 0,
        delta,
        acceptance,
    })
}

/// Turns an automaton over letters `z·|Y| + y` and directions `x·|Y| + y`
/// into one over letters `z` and directions `x` that accepts `T` iff the
/// original accepts `xray(Y, wide_Y(T))` with root tag `root_y`. State
/// `(q, y)` has index `q·|Y| + y` and remembers the tag of the node it reads.
pub fn narrow(b: &TreeAutomaton, ny: usize, root_y: usize) -> Result<TreeAutomaton> {
    if ny == 0 || !b.num_letters.is_multiple_of(ny) || !b.num_dirs.is_multiple_of(ny) || root_y >= ny {
        return Err(Error::Shape(format!(
            "automaton with {} letters and {} directions cannot be narrowed by |Y| = {ny}",
            b.num_letters, b.num_dirs
        )));
    }
    let nz = b.num_letters / ny;
    let mut states = Vec::with_capacity(b.len() * ny);
    let mut delta = Vec::with_capacity(b.len() * ny);
    let mut origin = Vec::with_capacity(b.len() * ny);
    for q in 0..b.len() {
        for y in 0..ny {
            states.push(format!("{}/{y}", b.states[q]));
            origin.push(Some(q));
            delta.push(
                (0..nz)
                    .map(|z| b.delta[q][z * ny + y].substitute(&mut |xy, q2| Formula::Atom(xy / ny, q2 * ny + xy % ny)))
                    .collect(),
            );
        }
    }
    Ok(TreeAutomaton {
        num_letters: nz,
        num_dirs: b.num_dirs / ny,
        states,
        start: b.start * ny + root_y,
        delta,
        acceptance: b.acceptance.remap(&origin),
    })
}

/// Decides whether `a` accepts the regular tree `t` by solving the
/// membership game on (automaton state, generator state) pairs.
pub fn membership(a: &TreeAutomaton, t: &RegularTree) -> Result<bool> {
    if a.num_dirs != t.num_dirs || t.labels.iter().any(|&l| l >= a.num_letters) {
        return Err(Error::Shape(
            "tree does not match the automaton's alphabet or directions".into(),
        ));
    }
    let top = match &a.acceptance {
        Acceptance::Parity(c) => c.iter().copied().max().unwrap_or(0),
        _ => 0,
    };
    let mut models_cache: std::collections::HashMap<(usize, usize), Vec<Vec<Atom>>> = Default::default();
    let mut arena = Arena::default();
    let win = arena.add_vertex(0, 0);
    arena.add_edge(win, win);
    let mut index = std::collections::HashMap::new();
    let root = arena.add_vertex(0, a.acceptance.game_priority(a.start, top));
    index.insert((a.start, t.start), root);
    let mut work = vec![(a.start, t.start, root)];
    while let Some((q, v, id)) = work.pop() {
        let letter = t.labels[v];
        let models = models_cache
            .entry((q, letter))
            .or_insert_with(|| a.delta[q][letter].models())
            .clone();
        for model in models {
            if model.is_empty() {
                arena.add_edge(id, win);
                continue;
            }
            let choice = arena.add_vertex(1, 0);
            arena.add_edge(id, choice);
            for (d, q2) in model {
                let v2 = t.next[v][d];
                let target = *index.entry((q2, v2)).or_insert_with(|| {
                    let nid = arena.add_vertex(0, a.acceptance.game_priority(q2, top));
                    work.push((q2, v2, nid));
                    nid
                });
                arena.add_edge(choice, target);
            }
        }
    }
    arena.close_dead_ends();
    Ok(solve_parity_game(&arena).winner[root] == 0)
}

/// Numbers distinct values in order of first occurrence.
fn renumber_by<T: Ord + Clone>(values: &[T]) -> Vec<usize> {
    let mut ids = std::collections::BTreeMap::new();
    values
        .iter()
        .map(|v| {
            let next = ids.len();
            *ids.entry(v.clone()).or_insert(next)
        })
        .collect()
}
