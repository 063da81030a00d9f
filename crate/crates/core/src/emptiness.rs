//! Emptiness of alternating co-Büchi tree automata.
//!
//! The automaton is turned, on the fly, into a nondeterministic Büchi
//! automaton whose states are rank-annotated sets of automaton states with
//! a breakpoint set. Emptiness of that automaton is a Büchi game between
//! a player choosing letters and transitions and a player choosing
//! directions; a memoryless winning strategy is a regular witness tree.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use crate::automata::{Acceptance, Atom, Formula, TreeAutomaton};
use crate::composition::RegularTree;
use crate::error::{Error, Result};
use crate::games::{solve_buchi_game, solve_parity_game, Arena};

/// Default bound on explored game vertices.
pub const DEFAULT_LIMIT: usize = 2_000_000;

/// Successor constraint of a transition in one direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Succ<S> {
    /// No copy is sent; any subtree is accepted.
    Any,
    /// One of these states must accept the subtree.
    OneOf(Vec<S>),
}

/// A transition: for every direction, the successor alternatives.
pub type Move<S> = Vec<Succ<S>>;

/// A nondeterministic Büchi tree automaton given by its successor function.
pub trait Nbt {
    type State: Clone + Eq + Hash;

    fn num_letters(&self) -> usize;
    fn num_dirs(&self) -> usize;
    /// Alternatives for the root state.
    fn initial(&self) -> Vec<Self::State>;
    fn moves(&self, s: &Self::State, letter: usize) -> Vec<Move<Self::State>>;
    fn accepting(&self, s: &Self::State) -> bool;
}

/// An explicit nondeterministic automaton: every model of every transition
/// sends at most one copy in each direction.
pub struct ExplicitNbt<'a> {
    pub automaton: &'a TreeAutomaton,
    accepting: Vec<bool>,
}

impl<'a> ExplicitNbt<'a> {
    pub fn new(automaton: &'a TreeAutomaton) -> Result<Self> {
        let Acceptance::Buchi(b) = &automaton.acceptance else {
            return Err(Error::Shape("expected a Büchi automaton".into()));
        };
        for row in &automaton.delta {
            for f in row {
                for m in f.models() {
                    let dirs: BTreeSet<usize> = m.iter().map(|a| a.0).collect();
                    if dirs.len() != m.len() {
                        return Err(Error::Shape("transition sends two copies in one direction".into()));
                    }
                }
            }
        }
        Ok(ExplicitNbt {
            automaton,
            accepting: b.clone(),
        })
    }
}

impl Nbt for ExplicitNbt<'_> {
    type State = usize;

    fn num_letters(&self) -> usize {
        self.automaton.num_letters
    }

    fn num_dirs(&self) -> usize {
        self.automaton.num_dirs
    }

    fn initial(&self) -> Vec<usize> {
        vec![self.automaton.start]
    }

    fn moves(&self, s: &usize, letter: usize) -> Vec<Move<usize>> {
        self.automaton.delta[*s][letter]
            .models()
            .into_iter()
            .map(|m| {
                (0..self.num_dirs())
                    .map(|d| match m.iter().find(|a| a.0 == d) {
                        Some(&(_, q)) => Succ::OneOf(vec![q]),
                        None => Succ::Any,
                    })
                    .collect()
            })
            .collect()
    }

    fn accepting(&self, s: &usize) -> bool {
        self.accepting[*s]
    }
}

/// Rank of a state that can never reach a rejecting state.
const FREE: u32 = u32::MAX;

/// State of the ranked construction: sorted `(state, rank, obligation)`.
pub type RankedSet = Vec<(usize, u32, bool)>;

/// The ranked breakpoint construction over an alternating co-Büchi
/// automaton, explored lazily.
pub struct RankedNbt<'a> {
    pub automaton: &'a TreeAutomaton,
    rejecting: Vec<bool>,
    free: Vec<bool>,
    /// Rank bound per state: twice the number of non-free states it reaches.
    cap: Vec<u32>,
    top: u32,
    models: HashMap<(usize, usize), Vec<Vec<Atom>>>,
}

/// Builds the ranked construction for a co-Büchi automaton. The language
/// is preserved.
pub fn uct_to_nbt(u: &TreeAutomaton) -> Result<RankedNbt<'_>> {
    let Acceptance::CoBuchi(rejecting) = &u.acceptance else {
        return Err(Error::Shape("expected a co-Büchi automaton".into()));
    };
    u.check_shape()?;
    // A state is free when no rejecting state is reachable from it.
    let n = u.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (row, out) in u.delta.iter().zip(&mut succ) {
        for f in row {
            out.extend(f.atoms().into_iter().map(|a| a.1));
        }
    }
    let mut bad = rejecting.clone();
    loop {
        let mut changed = false;
        for q in 0..n {
            if !bad[q] && succ[q].iter().any(|&t| bad[t]) {
                bad[q] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let free: Vec<bool> = bad.iter().map(|b| !b).collect();
    let ranked = bad.iter().filter(|&&b| b).count() as u32;
    // A vertex's rank depends only on its descendants, whose run DAG is no
    // wider than the set of non-free states reachable from it.
    let cap: Vec<u32> = (0..n)
        .map(|q| {
            let mut seen = vec![false; n];
            let mut stack = vec![q];
            seen[q] = true;
            while let Some(u) = stack.pop() {
                for &t in &succ[u] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            2 * (0..n).filter(|&t| seen[t] && bad[t]).count() as u32
        })
        .collect();
    let mut models = HashMap::new();
    for q in 0..n {
        for letter in 0..u.num_letters {
            models.insert((q, letter), u.delta[q][letter].models());
        }
    }
    Ok(RankedNbt {
        automaton: u,
        rejecting: rejecting.clone(),
        free,
        cap,
        top: 2 * ranked,
        models,
    })
}

impl RankedNbt<'_> {
    /// Highest useful ranks of a state whose parents allow at most `bound`.
    fn rank_options(&self, q: usize, bound: u32) -> Vec<u32> {
        if self.free[q] {
            return vec![FREE];
        }
        let bound = bound.min(self.cap[q]);
        let even = bound - bound % 2;
        if self.rejecting[q] {
            vec![even]
        } else if bound % 2 == 1 {
            vec![bound]
        } else if bound == 0 {
            vec![0]
        } else {
            vec![bound, bound - 1]
        }
    }

    /// All ranked sets for `targets` (state → rank bound), with obligations
    /// derived from `obliged` (states whose parents were all outside the
    /// breakpoint set are not obliged unless the set was empty).
    fn rankings(&self, targets: &[(usize, u32, bool)], reset: bool) -> Vec<RankedSet> {
        let mut out: Vec<RankedSet> = vec![Vec::new()];
        for &(q, bound, from_obligation) in targets {
            let opts = self.rank_options(q, bound);
            let mut next = Vec::with_capacity(out.len() * opts.len());
            for partial in &out {
                for &r in &opts {
                    let obliged = r != FREE && r % 2 == 0 && (reset || from_obligation);
                    let mut s = partial.clone();
                    s.push((q, r, obliged));
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }
}

impl Nbt for RankedNbt<'_> {
    type State = RankedSet;

    fn num_letters(&self) -> usize {
        self.automaton.num_letters
    }

    fn num_dirs(&self) -> usize {
        self.automaton.num_dirs
    }

    fn initial(&self) -> Vec<RankedSet> {
        self.rankings(&[(self.automaton.start, self.top, false)], true)
            .into_iter()
            .map(|s| s.into_iter().map(|(q, r, _)| (q, r, false)).collect())
            .collect()
    }

    fn moves(&self, s: &RankedSet, letter: usize) -> Vec<Move<RankedSet>> {
        let reset = s.iter().all(|e| !e.2);
        let mut combos: Vec<Vec<&Vec<Atom>>> = vec![Vec::new()];
        for &(q, _, _) in s {
            let ms = &self.models[&(q, letter)];
            if ms.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::with_capacity(combos.len() * ms.len());
            for c in &combos {
                for m in ms {
                    let mut c2 = c.clone();
                    c2.push(m);
                    next.push(c2);
                }
            }
            combos = next;
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for combo in combos {
            // Per direction: state → (rank bound, has an obliged parent).
            let mut per_dir: Vec<std::collections::BTreeMap<usize, (u32, bool)>> =
                vec![Default::default(); self.num_dirs()];
            for (&(_, rank, obliged), model) in s.iter().zip(&combo) {
                for &(d, q2) in model.iter() {
                    let e = per_dir[d].entry(q2).or_insert((u32::MAX, false));
                    e.0 = e.0.min(rank);
                    e.1 |= obliged;
                }
            }
            let key: Vec<Vec<(usize, u32, bool)>> = per_dir
                .iter()
                .map(|m| m.iter().map(|(&q, &(b, o))| (q, b, o)).collect())
                .collect();
            if !seen.insert(key.clone()) {
                continue;
            }
            let mv: Move<RankedSet> = key
                .iter()
                .map(|targets| {
                    if targets.is_empty() {
                        Succ::Any
                    } else {
                        let targets: Vec<_> = targets
                            .iter()
                            .map(|&(q, b, o)| (q, if b == FREE { self.top } else { b }, o))
                            .collect();
                        Succ::OneOf(self.rankings(&targets, reset))
                    }
                })
                .collect();
            out.push(mv);
        }
        out
    }

    fn accepting(&self, s: &RankedSet) -> bool {
        s.iter().all(|e| !e.2)
    }
}

/// State of the counting construction: sorted `(state, rejecting visits)`.
pub type CountedSet = Vec<(usize, u32)>;

/// The co-Büchi automaton restricted to runs whose threads visit rejecting
/// states at most `k` times, as a safety automaton. Its language is
/// contained in the original one and grows with `k`.
pub struct CountingNbt<'a> {
    pub automaton: &'a TreeAutomaton,
    rejecting: Vec<bool>,
    free: Vec<bool>,
    k: u32,
    models: Vec<Vec<Vec<Vec<Atom>>>>,
}

pub fn uct_to_counting(u: &TreeAutomaton, k: u32) -> Result<CountingNbt<'_>> {
    let nbt = uct_to_nbt(u)?;
    Ok(CountingNbt {
        automaton: u,
        rejecting: nbt.rejecting,
        free: nbt.free,
        k,
        models: u
            .delta
            .iter()
            .map(|row| row.iter().map(Formula::models).collect())
            .collect(),
    })
}

impl CountingNbt<'_> {
    /// Visits recorded for `q` entered with `count` earlier visits; `None`
    /// past the bound. Free states never visit rejecting states again, so
    /// their count is dropped.
    fn visit(&self, q: usize, count: u32) -> Option<u32> {
        if self.free[q] {
            return Some(0);
        }
        let c = count + u32::from(self.rejecting[q]);
        (c <= self.k).then_some(c)
    }
}

impl Nbt for CountingNbt<'_> {
    type State = CountedSet;

    fn num_letters(&self) -> usize {
        self.automaton.num_letters
    }

    fn num_dirs(&self) -> usize {
        self.automaton.num_dirs
    }

    fn initial(&self) -> Vec<CountedSet> {
        let q = self.automaton.start;
        self.visit(q, 0).map(|c| vec![(q, c)]).into_iter().collect()
    }

    fn moves(&self, s: &CountedSet, letter: usize) -> Vec<Move<CountedSet>> {
        let mut combos: Vec<Vec<&Vec<Atom>>> = vec![Vec::new()];
        for &(q, _) in s {
            let ms = &self.models[q][letter];
            if ms.is_empty() {
                return Vec::new();
            }
            combos = combos
                .iter()
                .flat_map(|c| {
                    ms.iter().map(move |m| {
                        let mut c2 = c.clone();
                        c2.push(m);
                        c2
                    })
                })
                .collect();
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        'combo: for combo in combos {
            let mut per_dir: Vec<std::collections::BTreeMap<usize, u32>> = vec![Default::default(); self.num_dirs()];
            for (&(_, count), model) in s.iter().zip(&combo) {
                for &(d, q2) in model.iter() {
                    let Some(c) = self.visit(q2, count) else {
                        continue 'combo;
                    };
                    let e = per_dir[d].entry(q2).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            let key: Vec<CountedSet> = per_dir.into_iter().map(|m| m.into_iter().collect()).collect();
            if !seen.insert(key.clone()) {
                continue;
            }
            out.push(
                key.into_iter()
                    .map(|t| if t.is_empty() { Succ::Any } else { Succ::OneOf(vec![t]) })
                    .collect(),
            );
        }
        out
    }

    fn accepting(&self, _: &CountedSet) -> bool {
        true
    }
}

/// Whether the pathfinder wins the thread game of a co-Büchi automaton:
/// the automaton picks a letter and a model for the current state, the
/// pathfinder one atom of it, and rejecting states must not recur. The
/// automaton may pick different letters for threads that share a node, so
/// a pathfinder win shows the language is empty.
pub fn thread_game_refutes(u: &TreeAutomaton) -> Result<bool> {
    let Acceptance::CoBuchi(rejecting) = &u.acceptance else {
        return Err(Error::Shape("expected a co-Büchi automaton".into()));
    };
    u.check_shape()?;
    let mut arena = Arena::default();
    for &r in rejecting {
        arena.add_vertex(0, u32::from(r));
    }
    let accept = arena.add_vertex(0, 0);
    arena.add_edge(accept, accept);
    for q in 0..u.len() {
        for f in &u.delta[q] {
            for model in f.models() {
                if model.is_empty() {
                    arena.add_edge(q, accept);
                    continue;
                }
                let c = arena.add_vertex(1, 0);
                arena.add_edge(q, c);
                for &(_, t) in &model {
                    arena.add_edge(c, t);
                }
            }
        }
    }
    arena.close_dead_ends();
    Ok(solve_parity_game(&arena).winner[u.start] == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key<S> {
    Root,
    Node(S),
    Choice(usize, usize, usize),
    Dir(usize, usize, usize, usize),
    Any,
}

/// Result of an emptiness check: the witness tree, if any, and how many
/// game vertices were explored.
#[derive(Clone, Debug)]
pub struct Emptiness {
    pub witness: Option<RegularTree>,
    pub explored: usize,
}

/// Decides emptiness of `nbt`. Gives up with [`Error::Limit`] after
/// `limit` game vertices.
pub fn nbt_emptiness<N: Nbt>(nbt: &N, limit: usize) -> Result<Emptiness> {
    let mut arena = Arena::default();
    let mut keys: Vec<Key<N::State>> = Vec::new();
    let mut index: HashMap<Key<N::State>, usize> = HashMap::new();
    let mut accepting: Vec<bool> = Vec::new();
    // Moves of each node, by letter, kept for witness extraction.
    let mut node_moves: HashMap<usize, Vec<Vec<Move<N::State>>>> = HashMap::new();
    // Target of each direction at a choice vertex.
    let mut choice_targets: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut work: Vec<usize> = Vec::new();

    let mut intern = |key: Key<N::State>,
                      owner: u8,
                      acc: bool,
                      arena: &mut Arena,
                      keys: &mut Vec<Key<N::State>>,
                      accepting: &mut Vec<bool>,
                      work: &mut Vec<usize>|
     -> Result<usize> {
        if let Some(&v) = index.get(&key) {
            return Ok(v);
        }
        if arena.len() >= limit {
            return Err(Error::Limit(limit));
        }
        let v = arena.add_vertex(owner, 0);
        index.insert(key.clone(), v);
        keys.push(key);
        accepting.push(acc);
        work.push(v);
        Ok(v)
    };

    let root = intern(Key::Root, 0, false, &mut arena, &mut keys, &mut accepting, &mut work)?;
    let any = intern(Key::Any, 0, true, &mut arena, &mut keys, &mut accepting, &mut work)?;
    while let Some(v) = work.pop() {
        match keys[v].clone() {
            Key::Root => {
                for s in nbt.initial() {
                    let acc = nbt.accepting(&s);
                    let w = intern(Key::Node(s), 0, acc, &mut arena, &mut keys, &mut accepting, &mut work)?;
                    arena.add_edge(v, w);
                }
            }
            Key::Any => arena.add_edge(v, v),
            Key::Node(s) => {
                let all: Vec<Vec<Move<N::State>>> = (0..nbt.num_letters()).map(|l| nbt.moves(&s, l)).collect();
                for (letter, moves) in all.iter().enumerate() {
                    for (i, mv) in moves.iter().enumerate() {
                        let c = intern(
                            Key::Choice(v, letter, i),
                            1,
                            false,
                            &mut arena,
                            &mut keys,
                            &mut accepting,
                            &mut work,
                        )?;
                        arena.add_edge(v, c);
                        debug_assert_eq!(mv.len(), nbt.num_dirs());
                    }
                }
                node_moves.insert(v, all);
            }
            Key::Choice(node, letter, i) => {
                let mv = node_moves[&node][letter][i].clone();
                let mut targets = Vec::with_capacity(mv.len());
                for (d, succ) in mv.iter().enumerate() {
                    let w = match succ {
                        Succ::Any => any,
                        Succ::OneOf(states) if states.len() == 1 => {
                            let acc = nbt.accepting(&states[0]);
                            intern(
                                Key::Node(states[0].clone()),
                                0,
                                acc,
                                &mut arena,
                                &mut keys,
                                &mut accepting,
                                &mut work,
                            )?
                        }
                        Succ::OneOf(_) => intern(
                            Key::Dir(node, letter, i, d),
                            0,
                            false,
                            &mut arena,
                            &mut keys,
                            &mut accepting,
                            &mut work,
                        )?,
                    };
                    arena.add_edge(v, w);
                    targets.push(w);
                }
                choice_targets.insert(v, targets);
            }
            Key::Dir(node, letter, i, d) => {
                let Succ::OneOf(states) = node_moves[&node][letter][i][d].clone() else {
                    unreachable!()
                };
                for s in states {
                    let acc = nbt.accepting(&s);
                    let w = intern(Key::Node(s), 0, acc, &mut arena, &mut keys, &mut accepting, &mut work)?;
                    arena.add_edge(v, w);
                }
            }
        }
    }
    for (v, acc) in accepting.iter_mut().enumerate() {
        if arena.succ[v].is_empty() {
            arena.add_edge(v, v);
            *acc = arena.owner[v] == 1;
        }
    }
    let explored = arena.len();
    let solution = solve_buchi_game(&arena, &accepting);
    if solution.winner[root] != 0 {
        return Ok(Emptiness {
            witness: None,
            explored,
        });
    }

    // Read the witness off the strategy: generator states are the Node
    // vertices (and the unconstrained sink) met under the strategy.
    let dirs = nbt.num_dirs();
    let first = solution.strategy[root].expect("winning root has a move");
    let mut gen_of: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![first];
    gen_of.insert(first, 0);
    let mut labels = Vec::new();
    let mut next = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        if v == any {
            labels.push(0);
            next.push(vec![gen_of[&any]; dirs]);
            continue;
        }
        let c = solution.strategy[v].expect("winning node has a move");
        let Key::Choice(_, letter, _) = keys[c] else {
            unreachable!()
        };
        labels.push(letter);
        let mut row = Vec::with_capacity(dirs);
        for &w in &choice_targets[&c] {
            let target = match keys[w] {
                Key::Dir(..) => solution.strategy[w].expect("winning direction vertex has a move"),
                _ => w,
            };
            let g = *gen_of.entry(target).or_insert_with(|| {
                order.push(target);
                order.len() - 1
            });
            row.push(g);
        }
        next.push(row);
    }
    Ok(Emptiness {
        witness: Some(RegularTree {
            num_dirs: dirs,
            start: 0,
            next,
            labels,
        }),
        explored,
    })
}

/// Builds the explicit Büchi automaton of a lazily given one, giving up
/// after `limit` states. Meant for small cases and tests.
pub fn materialize<N: Nbt>(nbt: &N, limit: usize) -> Result<TreeAutomaton>
where
    N::State: std::fmt::Debug,
{
    let mut index: HashMap<N::State, usize> = HashMap::new();
    let mut states: Vec<N::State> = Vec::new();
    let mut delta: Vec<Vec<Formula>> = Vec::new();
    let init = nbt.initial();
    let mut lookup = |s: &N::State, states: &mut Vec<N::State>| -> Result<usize> {
        if let Some(&i) = index.get(s) {
            return Ok(i);
        }
        if states.len() >= limit {
            return Err(Error::Limit(limit));
        }
        index.insert(s.clone(), states.len() + 1);
        states.push(s.clone());
        Ok(states.len())
    };
    // State 0 is a fresh start choosing among the initial states.
    let init_ids: Vec<usize> = init.iter().map(|s| lookup(s, &mut states)).collect::<Result<_>>()?;
    let mut done = 0;
    while done < states.len() {
        let s = states[done].clone();
        done += 1;
        let mut row = Vec::with_capacity(nbt.num_letters());
        for letter in 0..nbt.num_letters() {
            let mut options = Vec::new();
            for mv in nbt.moves(&s, letter) {
                let mut conj = Vec::new();
                for (d, succ) in mv.iter().enumerate() {
                    match succ {
                        Succ::Any => {}
                        Succ::OneOf(alts) => {
                            let ids: Vec<usize> = alts.iter().map(|a| lookup(a, &mut states)).collect::<Result<_>>()?;
                            conj.push(Formula::or(
                                ids.into_iter().map(|t| Formula::atom(d, t)).collect::<Vec<_>>(),
                            ));
                        }
                    }
                }
                options.push(Formula::and(conj));
            }
            row.push(Formula::or(options));
        }
        delta.push(row);
    }
    // The fresh start reads the root like each initial state would.
    let start_row: Vec<Formula> = (0..nbt.num_letters())
        .map(|l| Formula::or(init_ids.iter().map(|&i| delta[i - 1][l].clone()).collect::<Vec<_>>()))
        .collect();
    let mut all = vec![start_row];
    all.extend(delta);
    let mut accepting = vec![false];
    accepting.extend(states.iter().map(|s| nbt.accepting(s)));
    let mut names = vec!["init".to_string()];
    names.extend(states.iter().map(|s| format!("{s:?}")));
    Ok(TreeAutomaton {
        num_letters: nbt.num_letters(),
        num_dirs: nbt.num_dirs(),
        states: names,
        start: 0,
        delta: all,
        acceptance: Acceptance::Buchi(accepting),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::membership;
    use crate::model::fixtures::names;

    fn single(f: Formula, acceptance: Acceptance) -> TreeAutomaton {
        TreeAutomaton {
            num_letters: 1,
            num_dirs: 2,
            states: names(&["q"]),
            start: 0,
            delta: vec![vec![f]],
            acceptance,
        }
    }

    fn both(q: usize) -> Formula {
        Formula::and([Formula::atom(0, q), Formula::atom(1, q)])
    }

    #[test]
    fn trivial_co_buchi_cases() {
        let yes = single(both(0), Acceptance::CoBuchi(vec![false]));
        let found = nbt_emptiness(&uct_to_nbt(&yes).unwrap(), DEFAULT_LIMIT).unwrap();
        let w = found.witness.unwrap();
        assert!(membership(&yes, &w).unwrap());

        let no = single(Formula::False, Acceptance::CoBuchi(vec![false]));
        assert!(nbt_emptiness(&uct_to_nbt(&no).unwrap(), DEFAULT_LIMIT)
            .unwrap()
            .witness
            .is_none());

        let rejecting_loop = single(both(0), Acceptance::CoBuchi(vec![true]));
        assert!(nbt_emptiness(&uct_to_nbt(&rejecting_loop).unwrap(), DEFAULT_LIMIT)
            .unwrap()
            .witness
            .is_none());
    }

    #[test]
    fn explicit_nbt_cases() {
        let a = single(both(0), Acceptance::Buchi(vec![true]));
        let e = nbt_emptiness(&ExplicitNbt::new(&a).unwrap(), DEFAULT_LIMIT).unwrap();
        let w = e.witness.unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.next, vec![vec![0, 0]]);
        let f = single(Formula::False, Acceptance::Buchi(vec![true]));
        assert!(nbt_emptiness(&ExplicitNbt::new(&f).unwrap(), DEFAULT_LIMIT)
            .unwrap()
            .witness
            .is_none());
        let wrong = single(both(0), Acceptance::CoBuchi(vec![true]));
        assert!(ExplicitNbt::new(&wrong).is_err());
    }

    #[test]
    fn letter_choice_matters() {
        // Letter 0 leads to a rejecting loop, letter 1 to acceptance; the
        // rejecting state may only be left by reading letter 1.
        let u = TreeAutomaton {
            num_letters: 2,
            num_dirs: 1,
            states: names(&["q", "r"]),
            start: 0,
            delta: vec![
                vec![Formula::atom(0, 1), Formula::atom(0, 0)],
                vec![Formula::atom(0, 1), Formula::True],
            ],
            acceptance: Acceptance::CoBuchi(vec![false, true]),
        };
        let e = nbt_emptiness(&uct_to_nbt(&u).unwrap(), DEFAULT_LIMIT).unwrap();
        let w = e.witness.unwrap();
        assert!(membership(&u, &w).unwrap());
        let explicit = materialize(&uct_to_nbt(&u).unwrap(), 10_000).unwrap();
        assert!(membership(&explicit, &w).unwrap());
    }

    #[test]
    fn counting_bounds_rejecting_visits() {
        // The rejecting start is visited once, then a safe loop follows.
        let u = TreeAutomaton {
            num_letters: 1,
            num_dirs: 2,
            states: names(&["r", "q"]),
            start: 0,
            delta: vec![vec![Formula::atom(0, 1)], vec![both(1)]],
            acceptance: Acceptance::CoBuchi(vec![true, false]),
        };
        let none = nbt_emptiness(&uct_to_counting(&u, 0).unwrap(), DEFAULT_LIMIT).unwrap();
        assert!(none.witness.is_none());
        let w = nbt_emptiness(&uct_to_counting(&u, 1).unwrap(), DEFAULT_LIMIT)
            .unwrap()
            .witness
            .unwrap();
        assert!(membership(&u, &w).unwrap());
        let rejecting_loop = single(both(0), Acceptance::CoBuchi(vec![true]));
        for k in 0..4 {
            let e = nbt_emptiness(&uct_to_counting(&rejecting_loop, k).unwrap(), DEFAULT_LIMIT).unwrap();
            assert!(e.witness.is_none());
        }
    }

    #[test]
    fn thread_game_refutation_is_only_sufficient() {
        assert!(thread_game_refutes(&single(both(0), Acceptance::CoBuchi(vec![true]))).unwrap());
        assert!(!thread_game_refutes(&single(both(0), Acceptance::CoBuchi(vec![false]))).unwrap());
        // Two copies meet at the child: `a` needs letter 0 there, `b` needs
        // letter 1. Each thread alone can be satisfied, the tree cannot.
        let u = TreeAutomaton {
            num_letters: 2,
            num_dirs: 1,
            states: names(&["s", "a", "b", "r"]),
            start: 0,
            delta: vec![
                vec![Formula::and([Formula::atom(0, 1), Formula::atom(0, 2)]), Formula::False],
                vec![Formula::True, Formula::atom(0, 3)],
                vec![Formula::atom(0, 3), Formula::True],
                vec![Formula::atom(0, 3), Formula::atom(0, 3)],
            ],
            acceptance: Acceptance::CoBuchi(vec![false, false, false, true]),
        };
        assert!(!thread_game_refutes(&u).unwrap());
        assert!(nbt_emptiness(&uct_to_nbt(&u).unwrap(), DEFAULT_LIMIT)
            .unwrap()
            .witness
            .is_none());
    }

    #[test]
    fn limit_is_reported() {
        let yes = single(both(0), Acceptance::CoBuchi(vec![false]));
        assert!(matches!(
            nbt_emptiness(&uct_to_nbt(&yes).unwrap(), 1),
            Err(Error::Limit(1))
        ));
    }
}
