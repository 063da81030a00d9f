//! Qualitative analysis of a single probabilistic transducer: induced
//! graphs, ergodic sets, end components, sink classification and label
//! membership.
//!
//! Only supports of distributions are consulted. Exit states are absorbing.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graph::SupportGraph;
use crate::model::{Component, ExitSet, IndexFunction, Library, MemorylessStrategy};

/// A label `(X, j)` of a component, with `X` the exits reached and `j` the
/// summarized priority.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub exits: ExitSet,
    pub priority: u32,
}

/// A label together with the component it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelTriple {
    pub exits: ExitSet,
    pub priority: u32,
    pub component: usize,
}

impl LabelTriple {
    pub fn label(&self) -> Label {
        Label {
            exits: self.exits,
            priority: self.priority,
        }
    }
}

/// Closed, strongly connected sub-MDP. `letters[i]` belongs to `states[i]`
/// and is empty for exit states (which loop on themselves).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndComponent {
    pub states: Vec<usize>,
    pub letters: Vec<Vec<usize>>,
}

pub fn induced_graph(m: &Component, f: &MemorylessStrategy) -> Result<SupportGraph> {
    f.check(m)?;
    Ok(graph_of_supports(m, &f.support))
}

fn graph_of_supports(m: &Component, support: &[Vec<usize>]) -> SupportGraph {
    let mut g = SupportGraph::new(m.num_states());
    for (q, acts) in support.iter().enumerate().take(m.num_states()) {
        if m.is_exit(q) {
            g.add_edge(q, q);
            continue;
        }
        for &a in acts {
            for t in m.successors(q, a) {
                g.add_edge(q, t);
            }
        }
    }
    g
}

pub fn full_support_graph(m: &Component) -> SupportGraph {
    graph_of_supports(m, &MemorylessStrategy::full_support(m).support)
}

pub fn ergodic_sets(g: &SupportGraph) -> Vec<Vec<usize>> {
    g.bottom_sccs()
}

fn max_priority(set: &[usize], prios: &[u32]) -> u32 {
    set.iter().map(|&q| prios[q]).max().unwrap_or(0)
}

/// Reachable ergodic sets of the graph, from `start`.
fn reachable_ergodic(g: &SupportGraph, start: usize) -> Vec<Vec<usize>> {
    let reach = g.reachable_from(start);
    g.bottom_sccs().into_iter().filter(|e| reach[e[0]]).collect()
}

pub fn environment_wins_memoryless(m: &Component, prios: &[u32], f: &MemorylessStrategy) -> Result<bool> {
    let g = induced_graph(m, f)?;
    Ok(reachable_ergodic(&g, m.start)
        .iter()
        .any(|e| max_priority(e, prios) % 2 == 1))
}

/// Maximal end components inside the states marked by `allowed`.
pub fn maximal_end_components(m: &Component, allowed: &[bool]) -> Vec<EndComponent> {
    let n = m.num_states();
    let succ = m.support_table();
    let mut alive: Vec<bool> = allowed.to_vec();
    let mut letters: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..n {
        if alive[q] && !m.is_exit(q) {
            letters[q] = (0..m.num_inputs()).collect();
        }
    }
    loop {
        let mut changed = false;
        // Drop letters that can leave the live set, and states left without letters.
        loop {
            let mut inner = false;
            for q in 0..n {
                if !alive[q] || m.is_exit(q) {
                    continue;
                }
                let before = letters[q].len();
                letters[q].retain(|&a| succ[q][a].iter().all(|&t| alive[t]));
                if letters[q].len() != before {
                    inner = true;
                }
                if letters[q].is_empty() {
                    alive[q] = false;
                    inner = true;
                }
            }
            if !inner {
                break;
            }
            changed = true;
        }
        let g = graph_of_supports(m, &letters);
        let comps = g.sccs(Some(&alive));
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in comps.iter().enumerate() {
            for &q in c {
                comp_of[q] = i;
            }
        }
        for q in 0..n {
            if !alive[q] || m.is_exit(q) {
                continue;
            }
            let before = letters[q].len();
            letters[q].retain(|&a| succ[q][a].iter().all(|&t| comp_of[t] == comp_of[q]));
            if letters[q].len() != before {
                changed = true;
            }
            if letters[q].is_empty() {
                alive[q] = false;
                changed = true;
            }
        }
        if !changed {
            return comps
                .into_iter()
                .map(|states| {
                    let letters = states.iter().map(|&q| letters[q].clone()).collect();
                    EndComponent { states, letters }
                })
                .collect();
        }
    }
}

/// Pure strategy that stays inside `ec` and visits `target` infinitely
/// often from every state of `ec`. Other states are left unset.
fn confine_to(m: &Component, ec: &EndComponent, target: usize, choice: &mut [Option<usize>]) {
    let succ = m.support_table();
    let inside: BTreeSet<usize> = ec.states.iter().copied().collect();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    done.insert(target);
    if !m.is_exit(target) {
        let i = ec.states.iter().position(|&q| q == target).unwrap();
        choice[target] = Some(ec.letters[i][0]);
    }
    loop {
        let mut layer = Vec::new();
        for (i, &q) in ec.states.iter().enumerate() {
            if done.contains(&q) {
                continue;
            }
            if let Some(&a) = ec.letters[i]
                .iter()
                .find(|&&a| succ[q][a].iter().any(|t| done.contains(t)))
            {
                layer.push((q, a));
            }
        }
        if layer.is_empty() {
            break;
        }
        for (q, a) in layer {
            done.insert(q);
            choice[q] = Some(a);
        }
    }
    debug_assert!(inside.iter().all(|q| done.contains(q)));
}

/// Completes a partial pure choice: every unset state that can reach a
/// target takes the lowest letter on a shortest path toward it; states that
/// cannot take letter 0.
fn steer(m: &Component, mut target: Vec<bool>, mut choice: Vec<Option<usize>>) -> MemorylessStrategy {
    let succ = m.support_table();
    let n = m.num_states();
    loop {
        let layer: Vec<(usize, usize)> = (0..n)
            .filter(|&q| !target[q] && !m.is_exit(q))
            .filter_map(|q| {
                (0..m.num_inputs())
                    .find(|&a| succ[q][a].iter().any(|&t| target[t]))
                    .map(|a| (q, a))
            })
            .collect();
        if layer.is_empty() {
            break;
        }
        for (q, a) in layer {
            target[q] = true;
            choice[q] = Some(a);
        }
    }
    let support = (0..n)
        .map(|q| {
            if m.is_exit(q) {
                Vec::new()
            } else {
                vec![choice[q].unwrap_or(0)]
            }
        })
        .collect();
    MemorylessStrategy::from_support(support)
}

/// Searches an end component among `eligible` states whose maximum is odd
/// and which is reachable from the start; returns a pure witness.
fn odd_end_component_witness(m: &Component, prios: &[u32], eligible: &[bool]) -> Option<MemorylessStrategy> {
    let reach = full_support_graph(m).reachable_from(m.start);
    let top = prios.iter().copied().max().unwrap_or(0);
    let mut p = if top % 2 == 1 { top } else { top.saturating_sub(1) };
    while p >= 1 {
        let allowed: Vec<bool> = (0..m.num_states()).map(|q| eligible[q] && prios[q] <= p).collect();
        for ec in maximal_end_components(m, &allowed) {
            let Some(&target) = ec.states.iter().find(|&&q| prios[q] == p) else {
                continue;
            };
            if !ec.states.iter().any(|&q| reach[q]) {
                continue;
            }
            let mut choice = vec![None; m.num_states()];
            confine_to(m, &ec, target, &mut choice);
            let mut fixed = vec![false; m.num_states()];
            for &q in &ec.states {
                fixed[q] = true;
            }
            return Some(steer(m, fixed, choice));
        }
        if p < 2 {
            break;
        }
        p -= 2;
    }
    None
}

/// A pure memoryless strategy under which some reachable ergodic set has
/// an odd maximum, if any strategy at all wins for the environment.
pub fn environment_can_win(m: &Component, prios: &[u32]) -> Option<MemorylessStrategy> {
    let eligible = vec![true; m.num_states()];
    odd_end_component_witness(m, prios, &eligible)
}

pub fn satisfies_index(m: &Component, prios: &[u32]) -> bool {
    environment_can_win(m, prios).is_none()
}

/// Pure witness that `m` is an odd sink.
pub fn odd_sink_witness(m: &Component, prios: &[u32]) -> Option<MemorylessStrategy> {
    let eligible: Vec<bool> = (0..m.num_states()).map(|q| !m.is_exit(q)).collect();
    odd_end_component_witness(m, prios, &eligible)
}

pub fn is_odd_sink(m: &Component, prios: &[u32]) -> bool {
    odd_sink_witness(m, prios).is_some()
}

/// What a memoryless strategy does inside a component, as far as labels
/// are concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrategySummary {
    pub exits: ExitSet,
    /// Highest priority of a reachable state, exits included.
    pub highest: u32,
    pub odd_sink: bool,
    pub even_sink: bool,
}

impl StrategySummary {
    /// The label this strategy contributes to LABELS.
    pub fn label(&self, max_alpha: u32) -> Label {
        let priority = if self.even_sink { 2 * max_alpha } else { self.highest };
        Label {
            exits: self.exits,
            priority,
        }
    }
}

/// Summarizes the strategy with the given per-state supports; states
/// without a support must be unreachable.
pub fn summarize(m: &Component, prios: &[u32], support: &[Vec<usize>]) -> StrategySummary {
    let g = graph_of_supports(m, support);
    let reach = g.reachable_from(m.start);
    let dirs = m.exit_directions();
    let mut summary = StrategySummary {
        exits: ExitSet::EMPTY,
        highest: 0,
        odd_sink: false,
        even_sink: false,
    };
    for q in (0..m.num_states()).filter(|&q| reach[q]) {
        summary.highest = summary.highest.max(prios[q]);
        if let Some(d) = dirs[q] {
            summary.exits.insert(d);
        }
    }
    for e in g.bottom_sccs() {
        if !reach[e[0]] || e.iter().any(|&q| m.is_exit(q)) {
            continue;
        }
        if max_priority(&e, prios) % 2 == 1 {
            summary.odd_sink = true;
        } else {
            summary.even_sink = true;
        }
    }
    summary
}

/// Enumerates every memoryless strategy restricted to the states it
/// reaches. Each restriction is produced once; unreached states carry an
/// empty support. Stops early when `visit` returns `true`, and reports
/// whether it did.
pub fn for_each_reachable_support(m: &Component, visit: &mut dyn FnMut(&[Vec<usize>]) -> bool) -> bool {
    let succ = m.support_table();
    let mut support = vec![Vec::new(); m.num_states()];
    let mut reached = vec![false; m.num_states()];
    reached[m.start] = true;
    descend(m, &succ, &mut support, &mut reached, visit)
}

fn descend(
    m: &Component,
    succ: &[Vec<Vec<usize>>],
    support: &mut [Vec<usize>],
    reached: &mut [bool],
    visit: &mut dyn FnMut(&[Vec<usize>]) -> bool,
) -> bool {
    let Some(q) = (0..m.num_states()).find(|&q| reached[q] && !m.is_exit(q) && support[q].is_empty()) else {
        return visit(support);
    };
    let k = m.num_inputs();
    for mask in 1u32..(1 << k) {
        support[q] = (0..k).filter(|&a| mask & (1 << a) != 0).collect();
        let mut fresh = Vec::new();
        for &a in &support[q] {
            for &t in &succ[q][a] {
                if !reached[t] {
                    reached[t] = true;
                    fresh.push(t);
                }
            }
        }
        let stop = descend(m, succ, support, reached, visit);
        for t in fresh {
            reached[t] = false;
        }
        if stop {
            support[q].clear();
            return true;
        }
    }
    support[q].clear();
    false
}

/// LABELS of one component, by enumeration of memoryless strategies.
pub fn component_labels(m: &Component, prios: &[u32], max_alpha: u32) -> BTreeSet<Label> {
    let mut out = BTreeSet::new();
    for_each_reachable_support(m, &mut |s| {
        out.insert(summarize(m, prios, s).label(max_alpha));
        false
    });
    out
}

/// The label `(∅, 2·max(α) − 1)` stands for "the environment can trap
/// control in an odd sink". Adding it to the labels of odd sinks lets the
/// rank construction handle libraries that still contain them.
pub fn odd_sink_label(max_alpha: u32) -> Label {
    Label {
        exits: ExitSet::EMPTY,
        priority: 2 * max_alpha - 1,
    }
}

/// LABELS plus the odd-sink label for components that are odd sinks.
pub fn extended_component_labels(m: &Component, prios: &[u32], max_alpha: u32) -> BTreeSet<Label> {
    let mut out = component_labels(m, prios, max_alpha);
    if is_odd_sink(m, prios) {
        out.insert(odd_sink_label(max_alpha));
    }
    out
}

pub fn even_sink_feasible(m: &Component, prios: &[u32], exits: ExitSet) -> bool {
    for_each_reachable_support(m, &mut |s| {
        let summary = summarize(m, prios, s);
        summary.even_sink && summary.exits == exits
    })
}

/// Sound shortcut for non-sink labels: the largest region with priorities
/// at most `j` and no exit outside `exits`, played with full support.
fn region_fast_path(m: &Component, prios: &[u32], exits: ExitSet, j: u32) -> bool {
    let n = m.num_states();
    let succ = m.support_table();
    let dirs = m.exit_directions();
    let mut alive: Vec<bool> = (0..n)
        .map(|q| prios[q] <= j && dirs[q].is_none_or(|d| exits.contains(d)))
        .collect();
    let mut letters: Vec<Vec<usize>> = (0..n)
        .map(|q| {
            if m.is_exit(q) {
                Vec::new()
            } else {
                (0..m.num_inputs()).collect()
            }
        })
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            if !alive[q] || m.is_exit(q) {
                continue;
            }
            let before = letters[q].len();
            letters[q].retain(|&a| succ[q][a].iter().all(|&t| alive[t]));
            changed |= letters[q].len() != before;
            if letters[q].is_empty() {
                alive[q] = false;
                changed = true;
            }
        }
    }
    if !alive[m.start] {
        return false;
    }
    let summary = summarize(m, prios, &letters);
    !summary.odd_sink && !summary.even_sink && summary.exits == exits && summary.highest == j
}

/// Whether `(X, j)` is a label of `m`.
pub fn label_member(exits: ExitSet, j: u32, m: &Component, prios: &[u32], max_alpha: u32) -> bool {
    if j == 0 || j > 2 * max_alpha {
        return false;
    }
    if region_fast_path(m, prios, exits, j) {
        return true;
    }
    let target = Label { exits, priority: j };
    for_each_reachable_support(m, &mut |s| summarize(m, prios, s).label(max_alpha) == target)
}

fn collect_labels(
    lib: &Library,
    alpha: &IndexFunction,
    per_component: fn(&Component, &[u32], u32) -> BTreeSet<Label>,
) -> BTreeSet<LabelTriple> {
    let max_alpha = alpha.max_priority();
    let mut out = BTreeSet::new();
    for (i, m) in lib.components.iter().enumerate() {
        for l in per_component(m, alpha.of(i), max_alpha) {
            out.insert(LabelTriple {
                exits: l.exits,
                priority: l.priority,
                component: i,
            });
        }
    }
    out
}

/// LABELS(L).
pub fn labels(lib: &Library, alpha: &IndexFunction) -> BTreeSet<LabelTriple> {
    collect_labels(lib, alpha, component_labels)
}

/// LABELS(L) with odd-sink labels added; equal to [`labels`] when no
/// component is an odd sink.
pub fn extended_labels(lib: &Library, alpha: &IndexFunction) -> BTreeSet<LabelTriple> {
    collect_labels(lib, alpha, extended_component_labels)
}

/// Indices of the components that are odd sinks.
pub fn odd_sinks(lib: &Library, alpha: &IndexFunction) -> Vec<usize> {
    (0..lib.len())
        .filter(|&i| is_odd_sink(&lib.components[i], alpha.of(i)))
        .collect()
}

/// The library without its odd sinks, with the index function restricted
/// accordingly.
pub fn remove_odd_sinks(lib: &Library, alpha: &IndexFunction) -> (Library, IndexFunction) {
    let sinks = odd_sinks(lib, alpha);
    let keep: Vec<usize> = (0..lib.len()).filter(|i| !sinks.contains(i)).collect();
    let library = Library {
        width: lib.width,
        inputs: lib.inputs.clone(),
        outputs: lib.outputs.clone(),
        components: keep.iter().map(|&i| lib.components[i].clone()).collect(),
    };
    let index = IndexFunction::new(keep.iter().map(|&i| alpha.priorities[i].clone()).collect());
    (library, index)
}

/// Reachable exits of `m` under full support, in direction order.
pub fn reachable_exits(m: &Component) -> ExitSet {
    let reach = full_support_graph(m).reachable_from(m.start);
    m.exit_directions()
        .iter()
        .enumerate()
        .filter_map(|(q, d)| d.filter(|_| reach[q]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    fn strat(s: Vec<Vec<usize>>) -> MemorylessStrategy {
        MemorylessStrategy::from_support(s)
    }

    /// `s --a--> ½ e0 + ½ e1`, `s --b--> e1`.
    fn split() -> Component {
        let (mut c, _) = m_good();
        c.transitions[0] = Some(vec![vec![(1, r(1, 2)), (2, r(1, 2))], vec![(2, one())]]);
        c
    }

    #[test]
    fn induced_graph_examples() {
        let c = split();
        let g = induced_graph(&c, &strat(vec![vec![0], vec![], vec![]])).unwrap();
        let mut edges: Vec<_> = g.edges().collect();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 1), (2, 2)]);

        let (good, _) = m_good();
        let g = induced_graph(&good, &strat(vec![vec![0], vec![], vec![]])).unwrap();
        let mut edges: Vec<_> = g.edges().collect();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (1, 1), (2, 2)]);

        assert!(induced_graph(&good, &strat(vec![vec![0]])).is_err());
    }

    #[test]
    fn environment_wins_examples() {
        let (risky, p) = m_risky();
        assert!(environment_wins_memoryless(&risky, &p, &strat(vec![vec![1], vec![], vec![]])).unwrap());
        assert!(!environment_wins_memoryless(&risky, &[2, 2, 2], &strat(vec![vec![1], vec![], vec![]])).unwrap());
    }

    #[test]
    fn risky_witness_plays_b() {
        let (risky, p) = m_risky();
        let w = environment_can_win(&risky, &p).unwrap();
        assert!(w.is_pure());
        assert_eq!(w.support[0], vec![1]);
        assert!(!satisfies_index(&risky, &p));
        assert!(environment_can_win(&risky, &[2, 2, 2]).is_none());
    }

    #[test]
    fn odd_loop_behind_probabilistic_branch() {
        // s --a--> ½ t + ½ u, s --b--> u; t loops (prio 1), u loops (prio 2).
        let c = Component {
            name: "branch".into(),
            inputs: names(&["a", "b"]),
            outputs: names(&["o"]),
            states: names(&["s", "t", "u"]),
            start: 0,
            exits: vec![],
            output: vec![0; 3],
            transitions: vec![
                Some(vec![vec![(1, r(1, 2)), (2, r(1, 2))], vec![(2, one())]]),
                Some(vec![vec![(1, one())], vec![(1, one())]]),
                Some(vec![vec![(2, one())], vec![(2, one())]]),
            ],
        };
        let p = [2, 1, 2];
        let w = environment_can_win(&c, &p).unwrap();
        assert_eq!(w.support[0], vec![0]);
        assert!(environment_wins_memoryless(&c, &p, &w).unwrap());
    }

    #[test]
    fn good_loop_composition_satisfies() {
        let (mut c, p) = m_good();
        c.exits.clear();
        c.transitions[1] = Some(vec![vec![(0, one())], vec![(0, one())]]);
        c.transitions[2] = Some(vec![vec![(0, one())], vec![(0, one())]]);
        assert!(satisfies_index(&c, &p));
    }

    #[test]
    fn sink_classification() {
        let (risky, p) = m_risky();
        assert!(is_odd_sink(&risky, &p));
        let (even, p) = m_evensink();
        assert!(even_sink_feasible(&even, &p, ExitSet::EMPTY));
        assert!(!is_odd_sink(&even, &p));
        let (good, p) = m_good();
        assert!(!is_odd_sink(&good, &p));
        assert!(ExitSet::all(2).all(|x| !even_sink_feasible(&good, &p, x)));
    }

    #[test]
    fn labels_of_good() {
        let (good, p) = m_good();
        let got = component_labels(&good, &p, 2);
        let want: BTreeSet<Label> = [(vec![0], 2), (vec![1], 2), (vec![0, 1], 2)]
            .into_iter()
            .map(|(x, j)| Label {
                exits: x.into_iter().collect(),
                priority: j,
            })
            .collect();
        assert_eq!(got, want);
        for x in ExitSet::all(2) {
            for j in 1..=4 {
                let member = want.contains(&Label { exits: x, priority: j });
                assert_eq!(label_member(x, j, &good, &p, 2), member, "{x} {j}");
            }
        }
        assert!(!label_member(ExitSet::full(2), 5, &good, &p, 2));
    }

    #[test]
    fn even_sink_label() {
        let (even, p) = m_evensink();
        assert!(label_member(ExitSet::EMPTY, 4, &even, &p, 2));
        let got = component_labels(&even, &p, 2);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn library_labels_union() {
        let (lib, alpha) = library(vec![m_good(), m_evensink()]);
        let all = labels(&lib, &alpha);
        assert_eq!(all.len(), 5);
        assert!(all.len() <= 2 * 2 * 4);
        assert_eq!(labels(&library(vec![]).0, &IndexFunction::new(vec![])).len(), 0);
    }

    #[test]
    fn extended_labels_add_odd_sink_label() {
        let (lib, alpha) = library(vec![m_good(), m_risky()]);
        let ext = extended_labels(&lib, &alpha);
        let plain = labels(&lib, &alpha);
        let extra: Vec<_> = ext.difference(&plain).collect();
        assert_eq!(extra.len(), 1);
        assert_eq!(extra[0].component, 1);
        assert_eq!(extra[0].priority, 3);
        assert!(extra[0].exits.is_empty());
    }

    #[test]
    fn odd_sink_removal() {
        let (lib, alpha) = library(vec![m_good(), m_risky()]);
        let (kept, index) = remove_odd_sinks(&lib, &alpha);
        assert_eq!(kept.components.len(), 1);
        assert_eq!(kept.components[0].name, "good");
        assert_eq!(index.priorities, vec![vec![2, 2, 1]]);
        let (only, alpha) = library(vec![m_risky()]);
        assert!(remove_odd_sinks(&only, &alpha).0.is_empty());
    }

    #[test]
    fn end_components_of_evensink() {
        let (even, _) = m_evensink();
        let ecs = maximal_end_components(&even, &[true, true, true]);
        assert_eq!(ecs.len(), 3);
        let s = ecs.iter().find(|e| e.states == vec![0]).unwrap();
        assert_eq!(s.letters, vec![vec![0]]);
    }
}
