//! Compositions, monitor products, augmented libraries and composers, and
//! the regular trees generated by composers and choice functions.

use std::collections::{HashMap, VecDeque};

use num_traits::One;

use crate::error::{Error, Result};
use crate::mdp::{Label, LabelTriple};
use crate::model::{
    Component, Composer, Direction, Distribution, Dpw, ExitControlRelation, IndexFunction, Library, Rational,
};

/// The exitless transducer induced by a composer, with the map from its
/// states back to (instance, component state).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition {
    pub transducer: Component,
    /// `origin[v] = (instance, state)`.
    pub origin: Vec<(usize, usize)>,
    /// First state of each instance block.
    pub offset: Vec<usize>,
}

impl Composition {
    /// Priorities of the composition states, lifted from `alpha`.
    pub fn priorities(&self, composer: &Composer, alpha: &IndexFunction) -> Vec<u32> {
        self.origin
            .iter()
            .map(|&(i, q)| alpha.of(composer.component[i])[q])
            .collect()
    }
}

pub fn compose(c: &Composer, lib: &Library) -> Result<Composition> {
    c.check_shape(lib)?;
    let mut offset = Vec::with_capacity(c.len());
    let mut origin = Vec::new();
    for (i, &k) in c.component.iter().enumerate() {
        offset.push(origin.len());
        origin.extend((0..lib.components[k].num_states()).map(|q| (i, q)));
    }
    let mut states = Vec::with_capacity(origin.len());
    let mut output = Vec::with_capacity(origin.len());
    let mut transitions = Vec::with_capacity(origin.len());
    for &(i, q) in &origin {
        let m = &lib.components[c.component[i]];
        states.push(format!("{}.{}", c.instances[i], m.states[q]));
        output.push(m.output[q]);
        let rows = match &m.transitions[q] {
            Some(rows) => rows
                .iter()
                .map(|d| d.iter().map(|&(t, p)| (offset[i] + t, p)).collect())
                .collect(),
            None => {
                let d = m.exits.iter().position(|&e| e == q).expect("exit state");
                let k = c.next[i][d];
                let target = offset[k] + lib.components[c.component[k]].start;
                vec![vec![(target, Rational::one())]; lib.inputs.len()]
            }
        };
        transitions.push(Some(rows));
    }
    let transducer = Component {
        name: "composition".into(),
        inputs: lib.inputs.clone(),
        outputs: lib.outputs.clone(),
        states,
        start: offset[c.start] + lib.components[c.component[c.start]].start,
        exits: Vec::new(),
        output,
        transitions,
    };
    Ok(Composition {
        transducer,
        origin,
        offset,
    })
}

/// Product `M × A_s`. State `(q, t)` has index `q·|Q_A| + t`, where `t` is
/// the monitor state after reading the output of `q`. Exit `(d, t)` has
/// direction `d·|Q_A| + t`.
pub fn product_with_monitor(m: &Component, a: &Dpw, s: usize) -> Result<Component> {
    if m.outputs != a.alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "component {} outputs {:?}, monitor reads {:?}",
            m.name, m.outputs, a.alphabet
        )));
    }
    let na = a.num_states();
    let idx = |q: usize, t: usize| q * na + t;
    let mut states = Vec::with_capacity(m.num_states() * na);
    let mut output = Vec::with_capacity(m.num_states() * na);
    let mut transitions = Vec::with_capacity(m.num_states() * na);
    for q in 0..m.num_states() {
        for t in 0..na {
            states.push(format!("{}|{}", m.states[q], a.states[t]));
            output.push(m.output[q]);
            transitions.push(m.transitions[q].as_ref().map(|rows| {
                rows.iter()
                    .map(|d| -> Distribution {
                        d.iter().map(|&(q2, p)| (idx(q2, a.step(t, m.output[q2])), p)).collect()
                    })
                    .collect()
            }));
        }
    }
    let exits = m.exits.iter().flat_map(|&e| (0..na).map(move |t| idx(e, t))).collect();
    Ok(Component {
        name: format!("{}@{}", m.name, a.states[s]),
        inputs: m.inputs.clone(),
        outputs: m.outputs.clone(),
        states,
        start: idx(m.start, a.step(s, m.output[m.start])),
        exits,
        output,
        transitions,
    })
}

/// Priorities of a product `M × A_s`: each state takes the monitor's.
pub fn product_priorities(m: &Component, a: &Dpw) -> Vec<u32> {
    (0..m.num_states()).flat_map(|_| a.priority.iter().copied()).collect()
}

/// `L_A`, `R_A`, `α_A`. Component `(i, s)` has index `i·|Q_A| + s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedLibrary {
    pub library: Library,
    pub index: IndexFunction,
    pub relation: ExitControlRelation,
    pub monitor_states: usize,
}

impl AugmentedLibrary {
    pub fn component(&self, base: usize, s: usize) -> usize {
        base * self.monitor_states + s
    }

    pub fn direction(&self, d: Direction, s: usize) -> Direction {
        d * self.monitor_states + s
    }
}

/// Augments `lib` by the monitor. `relation` restricts which base
/// components may follow which exits; the augmented relation allows
/// `(d, s) → M × A_s` exactly when `(d, M)` is allowed.
pub fn augment_library(lib: &Library, relation: &ExitControlRelation, a: &Dpw) -> Result<AugmentedLibrary> {
    let na = a.num_states();
    let mut components = Vec::with_capacity(lib.len() * na);
    let mut priorities = Vec::with_capacity(lib.len() * na);
    for m in &lib.components {
        for s in 0..na {
            let p = product_with_monitor(m, a, s)?;
            priorities.push(product_priorities(m, a));
            components.push(p);
        }
    }
    let mut allowed = std::collections::BTreeSet::new();
    for &(d, k) in &relation.allowed {
        for s in 0..na {
            allowed.insert((d * na + s, k * na + s));
        }
    }
    Ok(AugmentedLibrary {
        library: Library {
            width: lib.width * na,
            inputs: lib.inputs.clone(),
            outputs: lib.outputs.clone(),
            components,
        },
        index: IndexFunction::new(priorities),
        relation: ExitControlRelation { allowed },
        monitor_states: na,
    })
}

/// `C_A`: instance `(m, s)` has index `m·|Q_A| + s` and runs `λ(m) × A_s`.
pub fn augment_composer(c: &Composer, a: &Dpw) -> Composer {
    let na = a.num_states();
    let mut instances = Vec::new();
    let mut component = Vec::new();
    let mut next = Vec::new();
    for m in 0..c.len() {
        for s in 0..na {
            instances.push(format!("{}@{}", c.instances[m], a.states[s]));
            component.push(c.component[m] * na + s);
            next.push(
                (0..c.next[m].len() * na)
                    .map(|ds| c.next[m][ds / na] * na + ds % na)
                    .collect(),
            );
        }
    }
    Composer {
        instances,
        start: c.start * na + a.start,
        component,
        next,
    }
}

/// Generator of a regular tree: a deterministic automaton over directions
/// whose states carry labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularTree {
    pub num_dirs: usize,
    pub start: usize,
    /// `next[v][d]`.
    pub next: Vec<Vec<usize>>,
    /// Letter index of each generator state.
    pub labels: Vec<usize>,
}

impl RegularTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Generator state reached by a node, given as its direction word.
    pub fn node(&self, word: &[Direction]) -> usize {
        word.iter().fold(self.start, |v, &d| self.next[v][d])
    }

    pub fn label_at(&self, word: &[Direction]) -> usize {
        self.labels[self.node(word)]
    }

    /// Whether two generators unwind to the same tree.
    pub fn bisimilar(&self, other: &RegularTree) -> bool {
        if self.num_dirs != other.num_dirs {
            return false;
        }
        let mut seen = HashMap::new();
        let mut queue = VecDeque::from([(self.start, other.start)]);
        seen.insert((self.start, other.start), ());
        while let Some((u, v)) = queue.pop_front() {
            if self.labels[u] != other.labels[v] {
                return false;
            }
            for d in 0..self.num_dirs {
                let pair = (self.next[u][d], other.next[v][d]);
                if seen.insert(pair, ()).is_none() {
                    queue.push_back(pair);
                }
            }
        }
        true
    }
}

/// `tree(C)`: labels are component indices.
pub fn tree_of_composer(c: &Composer) -> RegularTree {
    RegularTree {
        num_dirs: c.next.first().map_or(0, Vec::len),
        start: c.start,
        next: c.next.clone(),
        labels: c.component.clone(),
    }
}

/// `tree(C, g)`: labels are positions in `gamma` of `(g(m), λ(m))`.
pub fn tree_of_choice(c: &Composer, g: &[Label], gamma: &[LabelTriple]) -> Result<RegularTree> {
    if g.len() != c.len() {
        return Err(Error::Choice(format!(
            "choice function covers {} of {} instances",
            g.len(),
            c.len()
        )));
    }
    let labels = (0..c.len())
        .map(|m| {
            let triple = LabelTriple {
                exits: g[m].exits,
                priority: g[m].priority,
                component: c.component[m],
            };
            gamma.iter().position(|t| *t == triple).ok_or_else(|| {
                Error::Choice(format!(
                    "label ({}, {}) is not a label of the component of instance {}",
                    g[m].exits, g[m].priority, c.instances[m]
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegularTree {
        labels,
        ..tree_of_composer(c)
    })
}

/// Nodes of `tree(C, g)` reachable through selected exits only, as
/// generator states (the marked part of the tree).
pub fn marked_instances(c: &Composer, g: &[Label]) -> Vec<bool> {
    let mut marked = vec![false; c.len()];
    let mut stack = vec![c.start];
    marked[c.start] = true;
    while let Some(m) = stack.pop() {
        for d in g[m].exits.iter() {
            let t = c.next[m][d];
            if !marked[t] {
                marked[t] = true;
                stack.push(t);
            }
        }
    }
    marked
}

/// `wide_Y(T)`: directions become `x·|Y| + y` and the `y` part is ignored.
pub fn wide(t: &RegularTree, ny: usize) -> RegularTree {
    RegularTree {
        num_dirs: t.num_dirs * ny,
        start: t.start,
        next: t
            .next
            .iter()
            .map(|row| (0..t.num_dirs * ny).map(|xy| row[xy / ny]).collect())
            .collect(),
        labels: t.labels.clone(),
    }
}

/// `hide_Y(w)`: drops the `y` part of every direction `x·|Y| + y`.
pub fn hide(word: &[Direction], ny: usize) -> Vec<Direction> {
    word.iter().map(|&xy| xy / ny).collect()
}

/// `xray(Y, T)` over directions `x·|Y| + y`: each node's label `l` becomes
/// `l·|Y| + y`, with `y` the Y-part of the node's last direction and
/// `root_y` at the root.
pub fn xray(t: &RegularTree, ny: usize, root_y: usize) -> Result<RegularTree> {
    if ny == 0 || !t.num_dirs.is_multiple_of(ny) {
        return Err(Error::Shape(format!(
            "{} directions cannot be split by |Y| = {ny}",
            t.num_dirs
        )));
    }
    let idx = |v: usize, y: usize| v * ny + y;
    let mut next = Vec::with_capacity(t.len() * ny);
    let mut labels = Vec::with_capacity(t.len() * ny);
    for v in 0..t.len() {
        for y in 0..ny {
            labels.push(t.labels[v] * ny + y);
            next.push((0..t.num_dirs).map(|xy| idx(t.next[v][xy], xy % ny)).collect());
        }
    }
    Ok(RegularTree {
        num_dirs: t.num_dirs,
        start: idx(t.start, root_y),
        next,
        labels,
    })
}

/// Smallest composer with the same unfolding: instances reachable from the
/// start, with bisimilar instances merged. Instances are renumbered in
/// breadth-first order and named `i0`, `i1`, ...
pub fn minimize(c: &Composer) -> Composer {
    let mut class: Vec<usize> = c.component.clone();
    let mut classes = 0;
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let refined: Vec<usize> = (0..c.len())
            .map(|i| {
                let sig = (class[i], c.next[i].iter().map(|&t| class[t]).collect());
                let next = ids.len();
                *ids.entry(sig).or_insert(next)
            })
            .collect();
        class = refined;
        if ids.len() == classes {
            break;
        }
        classes = ids.len();
    }
    let mut rep = vec![None; classes];
    for i in 0..c.len() {
        rep[class[i]].get_or_insert(i);
    }
    let mut order = vec![usize::MAX; classes];
    let mut queue = VecDeque::from([class[c.start]]);
    let mut visited = Vec::new();
    order[class[c.start]] = 0;
    while let Some(k) = queue.pop_front() {
        visited.push(k);
        for &t in &c.next[rep[k].unwrap()] {
            if order[class[t]] == usize::MAX {
                order[class[t]] = visited.len() + queue.len();
                queue.push_back(class[t]);
            }
        }
    }
    Composer {
        instances: (0..visited.len()).map(|i| format!("i{i}")).collect(),
        start: 0,
        component: visited.iter().map(|&k| c.component[rep[k].unwrap()]).collect(),
        next: visited
            .iter()
            .map(|&k| c.next[rep[k].unwrap()].iter().map(|&t| order[class[t]]).collect())
            .collect(),
    }
}
