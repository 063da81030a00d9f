//! Domain types: components, libraries, index functions, exit control
//! relations, composers, parity monitors and memoryless strategies.
//!
//! Everything is index based. States, letters, directions and components are
//! `usize` positions into the owning vectors; names are kept only for
//! diagnostics and rendering.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::Error;

/// Exact probability value.
pub type Rational = num_rational::Rational64;

/// Index into the exit sequence of a component (an element of `D`).
pub type Direction = usize;

/// Sparse probability distribution over target states.
pub type Distribution = Vec<(usize, Rational)>;

/// A set of exit directions, stored as a bit mask (at most 64 directions).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExitSet(pub u64);

impl ExitSet {
    pub const EMPTY: ExitSet = ExitSet(0);

    pub fn singleton(d: Direction) -> Self {
        ExitSet(1 << d)
    }

    pub fn full(width: usize) -> Self {
        if width >= 64 {
            ExitSet(u64::MAX)
        } else {
            ExitSet((1u64 << width) - 1)
        }
    }

    pub fn contains(self, d: Direction) -> bool {
        d < 64 && self.0 & (1 << d) != 0
    }

    pub fn insert(&mut self, d: Direction) {
        self.0 |= 1 << d;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: ExitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        (0..64).filter(move |&d| self.contains(d))
    }

    /// All subsets of `{0, .., width-1}` in increasing mask order.
    pub fn all(width: usize) -> impl Iterator<Item = ExitSet> {
        (0..=ExitSet::full(width).0).map(ExitSet)
    }
}

impl FromIterator<Direction> for ExitSet {
    fn from_iter<I: IntoIterator<Item = Direction>>(iter: I) -> Self {
        let mut set = ExitSet::EMPTY;
        for d in iter {
            set.insert(d);
        }
        set
    }
}

impl fmt::Display for ExitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, d) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

/// A probabilistic transducer with an ordered sequence of exit states.
///
/// A transducer without exits (such as a composition) is a component whose
/// `exits` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub states: Vec<String>,
    pub start: usize,
    /// `exits[d]` is the exit state in direction `d`.
    pub exits: Vec<usize>,
    /// Output letter (index into `outputs`) of each state.
    pub output: Vec<usize>,
    /// `transitions[q]` is `None` for exit states, otherwise one
    /// distribution per input letter.
    pub transitions: Vec<Option<Vec<Distribution>>>,
}

impl Component {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn width(&self) -> usize {
        self.exits.len()
    }

    pub fn is_exit(&self, q: usize) -> bool {
        self.transitions[q].is_none()
    }

    /// Direction of each state that is an exit.
    pub fn exit_directions(&self) -> Vec<Option<Direction>> {
        let mut dirs = vec![None; self.num_states()];
        for (d, &q) in self.exits.iter().enumerate() {
            dirs[q] = Some(d);
        }
        dirs
    }

    /// Targets reachable with positive probability from `q` on letter `a`.
    /// Exit states are absorbing.
    pub fn successors(&self, q: usize, a: usize) -> Vec<usize> {
        match &self.transitions[q] {
            None => vec![q],
            Some(rows) => {
                let mut out: Vec<usize> = rows[a].iter().filter(|(_, p)| !p.is_zero()).map(|&(t, _)| t).collect();
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }

    /// Support of every (state, letter) pair, precomputed.
    pub fn support_table(&self) -> Vec<Vec<Vec<usize>>> {
        (0..self.num_states())
            .map(|q| (0..self.num_inputs()).map(|a| self.successors(q, a)).collect())
            .collect()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

/// A set of components sharing alphabets and exit width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Library {
    pub width: usize,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub components: Vec<Component>,
}

impl Library {
    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Priority of every state of every component (max-even reading).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexFunction {
    pub priorities: Vec<Vec<u32>>,
}

impl IndexFunction {
    pub fn new(priorities: Vec<Vec<u32>>) -> Self {
        IndexFunction { priorities }
    }

    pub fn of(&self, component: usize) -> &[u32] {
        &self.priorities[component]
    }

    /// Highest assigned priority, `0` for an empty library.
    pub fn max_priority(&self) -> u32 {
        self.priorities
            .iter()
            .flat_map(|p| p.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// Allowed `(direction, target component)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExitControlRelation {
    pub allowed: BTreeSet<(Direction, usize)>,
}

impl ExitControlRelation {
    pub fn total(width: usize, components: usize) -> Self {
        let allowed = (0..width).flat_map(|d| (0..components).map(move |m| (d, m))).collect();
        ExitControlRelation { allowed }
    }

    pub fn allows(&self, d: Direction, component: usize) -> bool {
        self.allowed.contains(&(d, component))
    }
}

/// Deterministic controller routing control between component instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composer {
    pub instances: Vec<String>,
    pub start: usize,
    /// Library component of each instance.
    pub component: Vec<usize>,
    /// `next[m][d]` is the instance entered when instance `m` leaves by exit `d`.
    pub next: Vec<Vec<usize>>,
}

impl Composer {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Checks that every route targets a component allowed by `relation`.
    pub fn is_compatible(&self, relation: &ExitControlRelation) -> bool {
        self.next.iter().all(|row| {
            row.iter()
                .enumerate()
                .all(|(d, &t)| relation.allows(d, self.component[t]))
        })
    }

    pub fn check_shape(&self, lib: &Library) -> Result<(), Error> {
        let n = self.instances.len();
        if n == 0 || self.start >= n {
            return Err(Error::Composer("composer has no start instance".into()));
        }
        if self.component.len() != n || self.next.len() != n {
            return Err(Error::Composer("instance tables have mismatched lengths".into()));
        }
        for (m, &c) in self.component.iter().enumerate() {
            if c >= lib.len() {
                return Err(Error::DanglingComponent(self.instances[m].clone()));
            }
            if self.next[m].len() != lib.width {
                return Err(Error::Composer(format!(
                    "instance {} routes {} directions, library width is {}",
                    self.instances[m],
                    self.next[m].len(),
                    lib.width
                )));
            }
            if self.next[m].iter().any(|&t| t >= n) {
                return Err(Error::Composer(format!(
                    "instance {} routes to an unknown instance",
                    self.instances[m]
                )));
            }
        }
        Ok(())
    }
}

/// Deterministic parity word automaton over the output alphabet.
/// Priorities are read max-even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dpw {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub start: usize,
    /// `next[s][letter]`.
    pub next: Vec<Vec<usize>>,
    pub priority: Vec<u32>,
}

impl Dpw {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn step(&self, s: usize, letter: usize) -> usize {
        self.next[s][letter]
    }

    /// Converts priorities authored under the min-even reading into the
    /// max-even reading used throughout the crate. The result keeps the
    /// parity of every priority and reverses their order; all values are at
    /// least 2.
    pub fn from_min_even(mut self) -> Self {
        let top = self.priority.iter().copied().max().unwrap_or(0);
        let k = top + top % 2 + 1;
        for p in &mut self.priority {
            *p = k + 1 - *p;
        }
        self
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.states.is_empty() || self.start >= self.states.len() {
            out.push(Diagnostic::error(None, None, "monitor has no start state"));
        }
        if self.priority.len() != self.states.len() || self.next.len() != self.states.len() {
            out.push(Diagnostic::error(None, None, "monitor tables have mismatched lengths"));
            return out;
        }
        for (s, row) in self.next.iter().enumerate() {
            if row.len() != self.alphabet.len() {
                out.push(Diagnostic::error(
                    None,
                    Some(self.states[s].clone()),
                    "monitor transition map is not total",
                ));
            }
            if row.iter().any(|&t| t >= self.states.len()) {
                out.push(Diagnostic::error(
                    None,
                    Some(self.states[s].clone()),
                    "edge to unknown state",
                ));
            }
            if self.priority[s] == 0 {
                out.push(Diagnostic::error(
                    None,
                    Some(self.states[s].clone()),
                    "priority 0 is reserved",
                ));
            }
        }
        out
    }
}

/// Memoryless strategy: the letters played with positive probability in
/// each state, with optional explicit weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessStrategy {
    /// Sorted letter indices per state; empty for exit states.
    pub support: Vec<Vec<usize>>,
    pub weights: Option<Vec<Vec<Rational>>>,
}

impl MemorylessStrategy {
    pub fn from_support(support: Vec<Vec<usize>>) -> Self {
        MemorylessStrategy { support, weights: None }
    }

    /// Uniform choice over all letters in every non-exit state.
    pub fn full_support(m: &Component) -> Self {
        let support = (0..m.num_states())
            .map(|q| {
                if m.is_exit(q) {
                    Vec::new()
                } else {
                    (0..m.num_inputs()).collect()
                }
            })
            .collect();
        MemorylessStrategy { support, weights: None }
    }

    pub fn is_pure(&self) -> bool {
        self.support.iter().all(|s| s.len() <= 1)
    }

    pub fn check(&self, m: &Component) -> Result<(), Error> {
        if self.support.len() != m.num_states() {
            return Err(Error::Strategy(format!(
                "strategy covers {} states, component {} has {}",
                self.support.len(),
                m.name,
                m.num_states()
            )));
        }
        for q in 0..m.num_states() {
            if !m.is_exit(q) && self.support[q].is_empty() {
                return Err(Error::Strategy(format!("no letter chosen in state {}", m.states[q])));
            }
            if self.support[q].iter().any(|&a| a >= m.num_inputs()) {
                return Err(Error::Strategy(format!("unknown letter in state {}", m.states[q])));
            }
        }
        if let Some(w) = &self.weights {
            for (q, row) in w.iter().enumerate() {
                if m.is_exit(q) {
                    continue;
                }
                let sum: Rational = row.iter().copied().sum();
                if row.len() != self.support[q].len()
                    || row.iter().any(|p| *p <= Rational::zero())
                    || sum != Rational::one()
                {
                    return Err(Error::Strategy(format!(
                        "weights in state {} do not form a distribution over the support",
                        m.states[q]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A validation finding; errors make the input unusable, warnings do not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub component: Option<String>,
    pub state: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(component: Option<&str>, state: Option<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            component: component.map(str::to_owned),
            state,
            message: message.into(),
        }
    }

    pub fn warning(component: Option<&str>, state: Option<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            component: component.map(str::to_owned),
            state,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}")?;
        if let Some(c) = &self.component {
            write!(f, " [component {c}")?;
            if let Some(s) = &self.state {
                write!(f, ", state {s}")?;
            }
            write!(f, "]")?;
        } else if let Some(s) = &self.state {
            write!(f, " [state {s}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Checks every structural invariant of a library. The result is empty iff
/// the library is well formed.
pub fn validate_library(lib: &Library) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for m in &lib.components {
        let name = Some(m.name.as_str());
        if !seen.insert(m.name.clone()) {
            out.push(Diagnostic::error(name, None, "duplicate component name"));
        }
        if m.inputs != lib.inputs || m.outputs != lib.outputs {
            out.push(Diagnostic::error(
                name,
                None,
                "alphabets differ from the library alphabets",
            ));
        }
        if m.width() != lib.width {
            out.push(Diagnostic::error(
                name,
                None,
                format!("width mismatch: {} exits, library width {}", m.width(), lib.width),
            ));
        }
        validate_component(m, &mut out);
    }
    out
}

fn validate_component(m: &Component, out: &mut Vec<Diagnostic>) {
    let name = Some(m.name.as_str());
    let n = m.num_states();
    if n == 0 || m.start >= n {
        out.push(Diagnostic::error(name, None, "component has no start state"));
        return;
    }
    if m.output.len() != n || m.transitions.len() != n {
        out.push(Diagnostic::error(name, None, "state tables have mismatched lengths"));
        return;
    }
    let mut exit_set = BTreeSet::new();
    for &e in &m.exits {
        if e >= n {
            out.push(Diagnostic::error(name, None, "exit refers to an unknown state"));
            continue;
        }
        if !exit_set.insert(e) {
            out.push(Diagnostic::error(
                name,
                Some(m.states[e].clone()),
                "state is used as two exits",
            ));
        }
    }
    for q in 0..n {
        let st = Some(m.states[q].clone());
        if m.output[q] >= m.outputs.len() {
            out.push(Diagnostic::error(name, st.clone(), "unknown output letter"));
        }
        match (&m.transitions[q], exit_set.contains(&q)) {
            (Some(_), true) => {
                out.push(Diagnostic::error(name, st, "exit state has outgoing transitions"));
            }
            (None, false) => {
                out.push(Diagnostic::error(name, st, "non-exit state has no transitions"));
            }
            (None, true) => {}
            (Some(rows), false) => {
                if rows.len() != m.num_inputs() {
                    out.push(Diagnostic::error(
                        name,
                        st.clone(),
                        "missing transition row for some input letter",
                    ));
                }
                for (a, dist) in rows.iter().enumerate() {
                    let letter = m.inputs.get(a).cloned().unwrap_or_else(|| a.to_string());
                    if dist.iter().any(|&(t, _)| t >= n) {
                        out.push(Diagnostic::error(
                            name,
                            st.clone(),
                            format!("distribution on {letter} targets an unknown state"),
                        ));
                    }
                    if dist.iter().any(|(_, p)| *p < Rational::zero() || *p > Rational::one()) {
                        out.push(Diagnostic::error(
                            name,
                            st.clone(),
                            format!("probability outside [0,1] on {letter}"),
                        ));
                    }
                    let sum: Rational = dist.iter().map(|&(_, p)| p).sum();
                    if sum != Rational::one() {
                        out.push(Diagnostic::error(
                            name,
                            st.clone(),
                            format!("distribution sum ≠ 1 on {letter} (sum is {sum})"),
                        ));
                    }
                }
            }
        }
    }
}

/// Checks an index function against its library.
pub fn validate_index(lib: &Library, alpha: &IndexFunction) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if alpha.priorities.len() != lib.len() {
        out.push(Diagnostic::error(
            None,
            None,
            "index function does not cover every component",
        ));
        return out;
    }
    let mut largest = 0;
    for (m, prios) in lib.components.iter().zip(&alpha.priorities) {
        largest = largest.max(m.num_states());
        if prios.len() != m.num_states() {
            out.push(Diagnostic::error(
                Some(&m.name),
                None,
                "priority missing for some state",
            ));
            continue;
        }
        for (q, &p) in prios.iter().enumerate() {
            if p == 0 {
                out.push(Diagnostic::error(
                    Some(&m.name),
                    Some(m.states[q].clone()),
                    "priority 0 is reserved; priorities start at 1",
                ));
            }
        }
    }
    let bound = 2 * largest as u32;
    if alpha.max_priority() > bound {
        out.push(Diagnostic::warning(
            None,
            None,
            format!(
                "maximal priority {} exceeds twice the largest component size ({bound})",
                alpha.max_priority()
            ),
        ));
    }
    out
}

/// Checks that `relation` only mentions directions and components of `lib`.
pub fn validate_relation(lib: &Library, relation: &ExitControlRelation) -> Vec<Diagnostic> {
    relation
        .allowed
        .iter()
        .filter(|&&(d, m)| d >= lib.width || m >= lib.len())
        .map(|&(d, m)| Diagnostic::error(None, None, format!("allow pair ({d}, {m}) is out of range")))
        .collect()
}

/// Adds unreachable exit states until the component has `target` exits.
/// Each padding exit copies the output of the start state.
pub fn pad_exits(component: &Component, target: usize) -> Result<Component, Error> {
    let width = component.width();
    if width > target {
        return Err(Error::TooWide {
            component: component.name.clone(),
            width,
            target,
        });
    }
    let mut padded = component.clone();
    for d in width..target {
        let q = padded.states.len();
        let mut name = format!("pad{d}");
        while padded.state_index(&name).is_some() {
            name.push('_');
        }
        padded.states.push(name);
        padded.output.push(component.output[component.start]);
        padded.transitions.push(None);
        padded.exits.push(q);
    }
    Ok(padded)
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! Small hand-built components shared by unit tests.
    use super::*;

    pub fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    pub fn one() -> Rational {
        Rational::one()
    }

    pub fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    /// `s --a--> e0`, `s --b--> e1`; priorities s:2, e0:2, e1:1.
    pub fn m_good() -> (Component, Vec<u32>) {
        let c = Component {
            name: "good".into(),
            inputs: names(&["a", "b"]),
            outputs: names(&["x"]),
            states: names(&["s", "e0", "e1"]),
            start: 0,
            exits: vec![1, 2],
            output: vec![0, 0, 0],
            transitions: vec![Some(vec![vec![(1, one())], vec![(2, one())]]), None, None],
        };
        (c, vec![2, 2, 1])
    }

    /// `s --a--> e0`, `s --b--> s`; priorities s:1, exits 2.
    pub fn m_risky() -> (Component, Vec<u32>) {
        let c = Component {
            name: "risky".into(),
            inputs: names(&["a", "b"]),
            outputs: names(&["x"]),
            states: names(&["s", "e0", "e1"]),
            start: 0,
            exits: vec![1, 2],
            output: vec![0, 0, 0],
            transitions: vec![Some(vec![vec![(1, one())], vec![(0, one())]]), None, None],
        };
        (c, vec![1, 2, 2])
    }

    /// `s --a--> s`, `s --b--> e0`; priorities s:2, exits 2.
    pub fn m_evensink() -> (Component, Vec<u32>) {
        let c = Component {
            name: "evensink".into(),
            inputs: names(&["a", "b"]),
            outputs: names(&["x"]),
            states: names(&["s", "e0", "e1"]),
            start: 0,
            exits: vec![1, 2],
            output: vec![0, 0, 0],
            transitions: vec![Some(vec![vec![(0, one())], vec![(1, one())]]), None, None],
        };
        (c, vec![2, 2, 2])
    }

    /// One state emitting `letter`, then exit 0 on every input. Outputs `{x, y}`.
    pub fn emitter(letter: usize) -> (Component, Vec<u32>) {
        let c = Component {
            name: ["mx", "my"][letter].into(),
            inputs: names(&["a"]),
            outputs: names(&["x", "y"]),
            states: names(&["s", "e"]),
            start: 0,
            exits: vec![1],
            output: vec![letter, letter],
            transitions: vec![Some(vec![vec![(1, one())]]), None],
        };
        (c, vec![1, 1])
    }

    /// Records the last output; priority 2 after `y`, 1 after `x`.
    pub fn y_infinitely_often() -> Dpw {
        Dpw {
            alphabet: names(&["x", "y"]),
            states: names(&["sx", "sy"]),
            start: 0,
            next: vec![vec![0, 1], vec![0, 1]],
            priority: vec![1, 2],
        }
    }

    pub fn library(parts: Vec<(Component, Vec<u32>)>) -> (Library, IndexFunction) {
        let (components, prios): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let lib = Library {
            width: components.first().map_or(2, |c| c.width()),
            inputs: components.first().map_or_else(Vec::new, |c| c.inputs.clone()),
            outputs: components.first().map_or_else(Vec::new, |c| c.outputs.clone()),
            components,
        };
        (lib, IndexFunction::new(prios))
    }
}
