//! Brute-force ground truth for small instances: strategy, support and
//! choice-function enumeration, a bounded-horizon path analysis, and
//! exhaustive composer search. Meant for cross-checking, not for scale.

use std::collections::BTreeSet;

use crate::automata::{choice_rank, ChoiceFunction};
use crate::error::Result;
use crate::mdp::{environment_wins_memoryless, summarize, Label, LabelTriple};
use crate::model::{Component, Composer, Dpw, ExitControlRelation, IndexFunction, Library, MemorylessStrategy};
use crate::synthesis::{verify_dpw, verify_embedded};

/// Mixed-radix counter over `radices`, least significant digit last.
/// An empty radix list yields a single empty tuple; a zero radix yields
/// nothing.
#[derive(Clone, Debug)]
pub struct Odometer {
    radices: Vec<usize>,
    digits: Option<Vec<usize>>,
}

impl Odometer {
    pub fn new(radices: Vec<usize>) -> Self {
        let digits = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Odometer { radices, digits }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.digits.clone()?;
        let digits = self.digits.as_mut().unwrap();
        let mut i = digits.len();
        loop {
            if i == 0 {
                self.digits = None;
                break;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < self.radices[i] {
                break;
            }
            digits[i] = 0;
        }
        Some(current)
    }
}

fn non_exit_states(m: &Component) -> Vec<usize> {
    (0..m.num_states()).filter(|&q| !m.is_exit(q)).collect()
}

/// Every pure memoryless strategy, `|Σ_I|^{|Q∖F|}` of them.
pub fn enumerate_pure_memoryless(m: &Component) -> impl Iterator<Item = MemorylessStrategy> + '_ {
    let states = non_exit_states(m);
    Odometer::new(vec![m.num_inputs(); states.len()]).map(move |digits| {
        let mut support = vec![Vec::new(); m.num_states()];
        for (&q, &a) in states.iter().zip(&digits) {
            support[q] = vec![a];
        }
        MemorylessStrategy::from_support(support)
    })
}

/// Every support assignment, `∏(2^{|Σ_I|} − 1)` of them.
pub fn enumerate_supports(m: &Component) -> impl Iterator<Item = MemorylessStrategy> + '_ {
    let states = non_exit_states(m);
    let k = m.num_inputs();
    let masks = (1usize << k) - 1;
    Odometer::new(vec![masks; states.len()]).map(move |digits| {
        let mut support = vec![Vec::new(); m.num_states()];
        for (&q, &mask) in states.iter().zip(&digits) {
            support[q] = (0..k).filter(|a| (mask + 1) >> a & 1 == 1).collect();
        }
        MemorylessStrategy::from_support(support)
    })
}

/// Cartesian product over instances of the labels of their components.
pub fn enumerate_choice_functions<'a>(
    c: &'a Composer,
    gamma: &BTreeSet<LabelTriple>,
) -> impl Iterator<Item = ChoiceFunction> + 'a {
    let per_instance: Vec<Vec<Label>> = c
        .component
        .iter()
        .map(|&k| gamma.iter().filter(|t| t.component == k).map(|t| t.label()).collect())
        .collect();
    Odometer::new(per_instance.iter().map(Vec::len).collect())
        .map(move |digits| digits.iter().enumerate().map(|(i, &j)| per_instance[i][j]).collect())
}

/// LABELS of one component computed over all full support assignments.
pub fn labels_by_supports(m: &Component, prios: &[u32], max_alpha: u32) -> BTreeSet<Label> {
    enumerate_supports(m)
        .map(|f| summarize(m, prios, &f.support).label(max_alpha))
        .collect()
}

/// A pure memoryless strategy under which the environment wins, found by
/// trying all of them.
pub fn winning_pure_strategy(m: &Component, prios: &[u32]) -> Option<MemorylessStrategy> {
    enumerate_pure_memoryless(m).find(|f| environment_wins_memoryless(m, prios, f).unwrap_or(false))
}

fn bounded_reach(succ: &[Vec<usize>], from: usize, horizon: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut frontier = vec![from];
    for _ in 0..horizon {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}

/// Whether `f` lets the environment win, decided from paths of at most
/// `horizon` steps: a state recurs when every state it reaches can reach it
/// back, and the environment wins when a reachable recurrent state sees an
/// odd maximum among the states it reaches.
pub fn bounded_horizon_env_wins(m: &Component, prios: &[u32], f: &MemorylessStrategy, horizon: usize) -> bool {
    let n = m.num_states();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|q| {
            if m.is_exit(q) {
                return vec![q];
            }
            let mut out: Vec<usize> = f.support[q].iter().flat_map(|&a| m.successors(q, a)).collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let reach: Vec<Vec<bool>> = (0..n).map(|q| bounded_reach(&succ, q, horizon)).collect();
    (0..n)
        .filter(|&v| v == m.start || reach[m.start][v])
        .filter(|&v| reach[v][v] && (0..n).all(|w| !reach[v][w] || reach[w][v]))
        .any(|v| (0..n).filter(|&w| reach[v][w]).map(|w| prios[w]).max().unwrap_or(0) % 2 == 1)
}

/// Whether some choice function over `gamma` gives `c` an odd rank.
pub fn odd_rank_exists(c: &Composer, gamma: &BTreeSet<LabelTriple>) -> Result<bool> {
    for g in enumerate_choice_functions(c, gamma) {
        if choice_rank(c, &g)?.iter().any(|p| p % 2 == 1) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Visits every composer with at most `bound` instances whose routes
/// respect `relation`, once per instance renaming (instances are numbered
/// in breadth-first order from the start). Stops when `visit` returns
/// `true` and reports whether it did.
pub fn for_each_composer(
    num_components: usize,
    width: usize,
    relation: &ExitControlRelation,
    bound: usize,
    visit: &mut dyn FnMut(&Composer) -> bool,
) -> bool {
    let mut state = Partial {
        component: Vec::new(),
        next: Vec::new(),
    };
    if bound == 0 {
        return false;
    }
    for k in 0..num_components {
        state.component.push(k);
        state.next.push(vec![0; width]);
        if extend(&mut state, 0, num_components, width, relation, bound, visit) {
            return true;
        }
        state.component.pop();
        state.next.pop();
    }
    false
}

struct Partial {
    component: Vec<usize>,
    next: Vec<Vec<usize>>,
}

fn extend(
    p: &mut Partial,
    slot: usize,
    num_components: usize,
    width: usize,
    relation: &ExitControlRelation,
    bound: usize,
    visit: &mut dyn FnMut(&Composer) -> bool,
) -> bool {
    let count = p.component.len();
    if slot == count * width {
        let c = Composer {
            instances: (0..count).map(|i| format!("i{i}")).collect(),
            start: 0,
            component: p.component.clone(),
            next: p.next.clone(),
        };
        return visit(&c);
    }
    let (i, d) = (slot / width, slot % width);
    for t in 0..count {
        if relation.allows(d, p.component[t]) {
            p.next[i][d] = t;
            if extend(p, slot + 1, num_components, width, relation, bound, visit) {
                return true;
            }
        }
    }
    if count < bound {
        for k in (0..num_components).filter(|&k| relation.allows(d, k)) {
            p.component.push(k);
            p.next.push(vec![0; width]);
            p.next[i][d] = count;
            let stop = extend(p, slot + 1, num_components, width, relation, bound, visit);
            p.component.pop();
            p.next.pop();
            if stop {
                return true;
            }
        }
    }
    false
}

/// What a searched composer must achieve.
#[derive(Clone, Copy, Debug)]
pub enum Objective<'a> {
    Index(&'a IndexFunction),
    Monitor(&'a Dpw),
}

/// The first composer with at most `bound` instances, compatible with
/// `relation`, that satisfies the objective.
pub fn bounded_composer_search(
    lib: &Library,
    relation: &ExitControlRelation,
    objective: Objective<'_>,
    bound: usize,
) -> Result<Option<Composer>> {
    let mut found = None;
    let mut failure = None;
    for_each_composer(lib.len(), lib.width, relation, bound, &mut |c| {
        let verdict = match objective {
            Objective::Index(alpha) => verify_embedded(c, lib, alpha),
            Objective::Monitor(a) => verify_dpw(c, lib, a),
        };
        match verdict {
            Ok(true) => {
                found = Some(c.clone());
                true
            }
            Ok(false) => false,
            Err(e) => {
                failure = Some(e);
                true
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{component_labels, environment_can_win, extended_labels};
    use crate::model::fixtures::*;

    #[test]
    fn odometer_edge_cases() {
        assert_eq!(Odometer::new(vec![]).count(), 1);
        assert_eq!(Odometer::new(vec![2, 0]).count(), 0);
        let all: Vec<_> = Odometer::new(vec![2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], vec![0, 1]);
    }

    #[test]
    fn strategy_counts() {
        let (m, _) = m_good();
        assert_eq!(enumerate_pure_memoryless(&m).count(), 2);
        assert_eq!(enumerate_supports(&m).count(), 3);
        let mut two = m.clone();
        two.states.push("t".into());
        two.output.push(0);
        two.transitions.push(Some(vec![vec![(1, one())], vec![(2, one())]]));
        assert_eq!(enumerate_pure_memoryless(&two).count(), 4);
        assert_eq!(enumerate_supports(&two).count(), 9);
    }

    #[test]
    fn labels_agree_with_reachable_enumeration() {
        for (m, prios) in [m_good(), m_risky(), m_evensink()] {
            assert_eq!(labels_by_supports(&m, &prios, 2), component_labels(&m, &prios, 2));
        }
    }

    #[test]
    fn pure_enumeration_matches_polynomial_check() {
        for (m, prios) in [m_good(), m_risky(), m_evensink()] {
            assert_eq!(
                winning_pure_strategy(&m, &prios).is_some(),
                environment_can_win(&m, &prios).is_some()
            );
        }
    }

    #[test]
    fn horizon_analysis_matches_ergodic_sets() {
        for (m, prios) in [m_good(), m_risky(), m_evensink()] {
            for f in enumerate_supports(&m) {
                assert_eq!(
                    bounded_horizon_env_wins(&m, &prios, &f, 10_000),
                    environment_wins_memoryless(&m, &prios, &f).unwrap()
                );
            }
        }
    }

    #[test]
    fn choice_function_counts() {
        let (lib, alpha) = library(vec![m_good(), m_evensink()]);
        let gamma = extended_labels(&lib, &alpha);
        let c = Composer {
            instances: names(&["a", "b"]),
            start: 0,
            component: vec![0, 1],
            next: vec![vec![1, 1], vec![0, 0]],
        };
        assert_eq!(enumerate_choice_functions(&c, &gamma).count(), 3 * 2);
    }

    #[test]
    fn composer_enumeration_is_canonical() {
        let total = ExitControlRelation::total(1, 1);
        let mut seen = Vec::new();
        for_each_composer(1, 1, &total, 3, &mut |c| {
            seen.push(c.next.clone());
            false
        });
        // Chains 0, 0→0, 0→1→{0,1}, 0→1→2→{0,1,2}: 1 + 2 + 3 shapes.
        assert_eq!(seen.len(), 6);
        let distinct: BTreeSet<_> = seen.iter().collect();
        assert_eq!(distinct.len(), seen.len());
    }

    #[test]
    fn search_finds_good_and_rejects_odd() {
        let (lib, alpha) = library(vec![m_good()]);
        let r = ExitControlRelation::total(2, 1);
        let c = bounded_composer_search(&lib, &r, Objective::Index(&alpha), 1).unwrap();
        assert_eq!(c.unwrap().len(), 1);
        let odd = IndexFunction::new(vec![vec![1, 1, 1]]);
        for b in 1..=3 {
            assert!(bounded_composer_search(&lib, &r, Objective::Index(&odd), b)
                .unwrap()
                .is_none());
        }
    }
}
