//! End-to-end synthesis for index-function objectives and parity monitors,
//! and the verifiers for candidate composers.

use std::time::{Duration, Instant};

use crate::automata::{build_rank_nbt, build_safety, dualize, intersect, narrow, project_labels, union, TreeAutomaton};
use crate::composition::{
    augment_composer, augment_library, compose, minimize, product_priorities, product_with_monitor, RegularTree,
};
use crate::emptiness::{nbt_emptiness, thread_game_refutes, uct_to_counting, uct_to_nbt};
use crate::error::{Error, Result};
use crate::graph::SupportGraph;
use crate::mdp::{extended_labels, odd_sinks, satisfies_index, Label, LabelTriple};
use crate::model::{
    validate_index, validate_library, validate_relation, Composer, Dpw, ExitControlRelation, IndexFunction, Library,
};
use crate::oracle::Odometer;

/// Outcome of a synthesis run.
#[derive(Clone, Debug)]
pub struct Synthesis {
    /// A realizing composer, or `None` when the objective is unrealizable.
    pub composer: Option<Composer>,
    /// Human-readable notes (odd sinks found, sizes).
    pub diagnostics: Vec<String>,
    pub labels: usize,
    pub automaton_states: usize,
    pub explored: usize,
    pub elapsed: Duration,
}

/// Options shared by both pipelines.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Bound on explored game vertices.
    pub limit: usize,
    /// Try to refute the objective with a fixed label per component before
    /// the emptiness check.
    pub refute: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            limit: crate::emptiness::DEFAULT_LIMIT,
            refute: true,
        }
    }
}

fn check_inputs(lib: &Library, relation: &ExitControlRelation, alpha: &IndexFunction) -> Result<()> {
    let diags: Vec<_> = validate_library(lib)
        .into_iter()
        .chain(validate_index(lib, alpha))
        .chain(validate_relation(lib, relation))
        .filter(|d| d.is_error())
        .collect();
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(diags))
    }
}

/// Odd ranks the environment may realize: odd priorities up to `max(α)` and
/// the odd-sink marker `2·max(α) − 1`.
fn odd_ranks(max_alpha: u32) -> Vec<u32> {
    let mut ps: Vec<u32> = (1..=max_alpha).filter(|p| p % 2 == 1).collect();
    if max_alpha > 0 && !ps.contains(&(2 * max_alpha - 1)) {
        ps.push(2 * max_alpha - 1);
    }
    ps
}

/// Co-Büchi automaton over component letters accepting `tree(C)` iff `C`
/// is compatible with `relation` and satisfies `alpha`.
pub fn embedded_automaton(
    lib: &Library,
    relation: &ExitControlRelation,
    alpha: &IndexFunction,
) -> Result<(TreeAutomaton, Vec<LabelTriple>)> {
    let gamma: Vec<LabelTriple> = extended_labels(lib, alpha).into_iter().collect();
    let width = lib.width;
    let parts: Vec<TreeAutomaton> = odd_ranks(alpha.max_priority())
        .into_iter()
        .map(|p| project_labels(&build_rank_nbt(p, width, &gamma), &gamma, lib.len()).simplify())
        .collect();
    let violated = union(&parts, lib.len(), width)?.simplify();
    let satisfied = dualize(&violated);
    let b = intersect(&build_safety(relation, width, lib.len()), &satisfied)?.simplify();
    Ok((b, gamma))
}

/// Label choices tried by [`label_refutation`] before it gives up.
const REFUTATION_BUDGET: usize = 20_000;

/// A small Markov decision process: per state, actions given by their
/// priority and their (uniformly random) successors.
type Mdp = Vec<Vec<(u32, Vec<usize>)>>;

/// States that lie in an end component whose highest action priority is
/// even, using only actions of at most that priority.
fn good_end_components(mdp: &Mdp) -> Vec<bool> {
    let n = mdp.len();
    let mut good = vec![false; n];
    let mut evens: Vec<u32> = mdp.iter().flatten().map(|a| a.0).filter(|p| p % 2 == 0).collect();
    evens.sort_unstable();
    evens.dedup();
    for p in evens {
        let mut allowed: Vec<Vec<bool>> = mdp.iter().map(|acts| acts.iter().map(|a| a.0 <= p).collect()).collect();
        loop {
            let alive: Vec<bool> = allowed.iter().map(|row| row.contains(&true)).collect();
            let mut g = SupportGraph::new(n);
            for (u, acts) in mdp.iter().enumerate() {
                for (a, (_, succ)) in acts.iter().enumerate() {
                    if allowed[u][a] {
                        for &v in succ {
                            g.add_edge(u, v);
                        }
                    }
                }
            }
            let mut comp = vec![usize::MAX; n];
            for (c, scc) in g.sccs(Some(&alive)).into_iter().enumerate() {
                for v in scc {
                    comp[v] = c;
                }
            }
            let mut changed = false;
            for (u, acts) in mdp.iter().enumerate() {
                for (a, (_, succ)) in acts.iter().enumerate() {
                    if allowed[u][a] && succ.iter().any(|&v| comp[v] != comp[u]) {
                        allowed[u][a] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                let mut top: Vec<u32> = vec![0; n];
                for (u, acts) in mdp.iter().enumerate() {
                    for (a, &(q, _)) in acts.iter().enumerate() {
                        if allowed[u][a] && comp[u] != usize::MAX {
                            top[comp[u]] = top[comp[u]].max(q);
                        }
                    }
                }
                for u in 0..n {
                    if alive[u] && allowed[u].contains(&true) && top[comp[u]] == p {
                        good[u] = true;
                    }
                }
                break;
            }
        }
    }
    good
}

/// Whether some strategy reaches `target` with probability 1 from `start`.
fn almost_surely_reaches(mdp: &Mdp, target: &[bool], start: usize) -> bool {
    let n = mdp.len();
    let mut inside = vec![true; n];
    loop {
        let mut reach: Vec<bool> = (0..n).map(|u| target[u] && inside[u]).collect();
        loop {
            let mut grew = false;
            for u in 0..n {
                if inside[u]
                    && !reach[u]
                    && mdp[u]
                        .iter()
                        .any(|(_, succ)| succ.iter().all(|&v| inside[v]) && succ.iter().any(|&v| reach[v]))
                {
                    reach[u] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if reach == inside {
            return inside[start];
        }
        inside = reach;
    }
}

/// Whether fixing one label per component already defeats every composer.
/// With labels fixed, exits are taken at random among the label's exits and
/// the composer is a strategy in a Markov decision process over the last
/// exit taken, where memoryless strategies suffice. `None` when no choice
/// within the budget refutes.
fn label_refutation(
    num_components: usize,
    width: usize,
    relation: &ExitControlRelation,
    gamma: &[LabelTriple],
) -> Option<bool> {
    // Position 0 is the start, position 1 + d is entered through exit d.
    let options: Vec<Vec<usize>> = std::iter::once((0..num_components).collect())
        .chain((0..width).map(|d| (0..num_components).filter(|&k| relation.allows(d, k)).collect()))
        .collect();
    if options.iter().any(Vec::is_empty) {
        return Some(true);
    }
    // Labels that favour the environment come first.
    let by_component: Vec<Vec<Label>> = (0..num_components)
        .map(|k| {
            let mut ls: Vec<Label> = gamma.iter().filter(|t| t.component == k).map(|t| t.label()).collect();
            ls.sort_by_key(|l| (l.priority % 2 == 0, std::cmp::Reverse(l.priority)));
            ls
        })
        .collect();
    let positions = width + 1;
    for (tried, fixed) in Odometer::new(by_component.iter().map(Vec::len).collect()).enumerate() {
        if tried == REFUTATION_BUDGET {
            return None;
        }
        // Sink states follow the positions, one per component.
        let mut mdp: Mdp = options
            .iter()
            .map(|ks| {
                ks.iter()
                    .map(|&k| {
                        let l = by_component[k][fixed[k]];
                        let succ: Vec<usize> = if l.exits.is_empty() {
                            vec![positions + k]
                        } else {
                            l.exits.iter().map(|d| 1 + d).collect()
                        };
                        (l.priority, succ)
                    })
                    .collect()
            })
            .collect();
        for k in 0..num_components {
            let p = by_component[k][fixed[k]].priority;
            mdp.push(vec![(p, vec![positions + k])]);
        }
        let good = good_end_components(&mdp);
        if !almost_surely_reaches(&mdp, &good, 0) {
            return Some(true);
        }
    }
    Some(false)
}

const REFUTED: &str = "a fixed label per component defeats every composer";

/// Reads a minimal composer off a generator whose labels are component
/// indices.
pub fn composer_from_tree(t: &RegularTree) -> Composer {
    minimize(&Composer {
        instances: (0..t.len()).map(|i| format!("i{i}")).collect(),
        start: t.start,
        component: t.labels.clone(),
        next: t.next.clone(),
    })
}

/// Rejecting-visit bounds tried before the exact construction.
const VISIT_BOUNDS: [u32; 4] = [0, 1, 2, 4];

/// Emptiness of the co-Büchi automaton `b`. A cheap refutation and
/// witnesses with few rejecting visits per thread are tried first; the
/// ranked construction settles the rest.
fn solve(b: &TreeAutomaton, options: Options) -> Result<(Option<Composer>, usize)> {
    if thread_game_refutes(b)? {
        return Ok((None, 0));
    }
    let mut explored = 0;
    let budget = |explored: usize| (options.limit / 4).saturating_sub(explored);
    for k in VISIT_BOUNDS {
        match nbt_emptiness(&uct_to_counting(b, k)?, budget(explored)) {
            Ok(e) => {
                explored += e.explored;
                if let Some(t) = e.witness {
                    return Ok((Some(composer_from_tree(&t)), explored));
                }
            }
            Err(Error::Limit(_)) => break,
            Err(e) => return Err(e),
        }
    }
    let e = nbt_emptiness(&uct_to_nbt(b)?, options.limit.saturating_sub(explored)).map_err(|e| match e {
        Error::Limit(_) => Error::Limit(options.limit),
        e => e,
    })?;
    Ok((e.witness.as_ref().map(composer_from_tree), explored + e.explored))
}

/// Synthesizes a composer over `lib`, compatible with `relation`, whose
/// composition satisfies `alpha` with probability 1 against every
/// environment.
pub fn synth_embedded(
    lib: &Library,
    relation: &ExitControlRelation,
    alpha: &IndexFunction,
    options: Options,
) -> Result<Synthesis> {
    let clock = Instant::now();
    check_inputs(lib, relation, alpha)?;
    let mut diagnostics: Vec<String> = odd_sinks(lib, alpha)
        .into_iter()
        .map(|i| {
            format!(
                "component {} is an odd sink; composers that reach it are rejected",
                lib.components[i].name
            )
        })
        .collect();
    if lib.is_empty() {
        diagnostics.push("library is empty".into());
        return Ok(Synthesis {
            composer: None,
            diagnostics,
            labels: 0,
            automaton_states: 0,
            explored: 0,
            elapsed: clock.elapsed(),
        });
    }
    let (b, gamma) = embedded_automaton(lib, relation, alpha)?;
    let (composer, explored) =
        if options.refute && label_refutation(lib.len(), lib.width, relation, &gamma) == Some(true) {
            diagnostics.push(REFUTED.into());
            (None, 0)
        } else {
            solve(&b, options)?
        };
    Ok(Synthesis {
        composer,
        diagnostics,
        labels: gamma.len(),
        automaton_states: b.len(),
        explored,
        elapsed: clock.elapsed(),
    })
}

fn check_monitor(lib: &Library, a: &Dpw) -> Result<()> {
    if lib.outputs != a.alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "library outputs {:?}, monitor reads {:?}",
            lib.outputs, a.alphabet
        )));
    }
    let diags: Vec<_> = a.validate().into_iter().filter(|d| d.is_error()).collect();
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(diags))
    }
}

/// Synthesizes a composer over `lib`, compatible with `relation`, whose
/// output satisfies the monitor `a` with probability 1.
pub fn synth_dpw(lib: &Library, relation: &ExitControlRelation, a: &Dpw, options: Options) -> Result<Synthesis> {
    let clock = Instant::now();
    let diags: Vec<_> = validate_library(lib)
        .into_iter()
        .chain(validate_relation(lib, relation))
        .filter(|d| d.is_error())
        .collect();
    if !diags.is_empty() {
        return Err(Error::Invalid(diags));
    }
    check_monitor(lib, a)?;
    if lib.is_empty() {
        return Ok(Synthesis {
            composer: None,
            diagnostics: vec!["library is empty".into()],
            labels: 0,
            automaton_states: 0,
            explored: 0,
            elapsed: clock.elapsed(),
        });
    }
    let aug = augment_library(lib, relation, a)?;
    let mut diagnostics: Vec<String> = odd_sinks(&aug.library, &aug.index)
        .into_iter()
        .map(|i| {
            format!(
                "augmented component {} is an odd sink; composers that reach it are rejected",
                aug.library.components[i].name
            )
        })
        .collect();
    let (b, gamma) = embedded_automaton(&aug.library, &aug.relation, &aug.index)?;
    let narrowed = narrow(&b, a.num_states(), a.start)?.simplify();
    let refuted =
        options.refute && label_refutation(aug.library.len(), aug.library.width, &aug.relation, &gamma) == Some(true);
    let (composer, explored) = if refuted {
        diagnostics.push(REFUTED.into());
        (None, 0)
    } else {
        solve(&narrowed, options)?
    };
    Ok(Synthesis {
        composer,
        diagnostics,
        labels: gamma.len(),
        automaton_states: narrowed.len(),
        explored,
        elapsed: clock.elapsed(),
    })
}

/// Whether the composition of `c` satisfies `alpha`.
pub fn verify_embedded(c: &Composer, lib: &Library, alpha: &IndexFunction) -> Result<bool> {
    let t = compose(c, lib)?;
    Ok(satisfies_index(&t.transducer, &t.priorities(c, alpha)))
}

/// Whether the output of the composition of `c` satisfies `a`, computed on
/// the augmented composer (first) and on the product of the composition
/// with the monitor (second).
pub fn verify_dpw_routes(c: &Composer, lib: &Library, a: &Dpw) -> Result<(bool, bool)> {
    check_monitor(lib, a)?;
    let aug = augment_library(lib, &ExitControlRelation::total(lib.width, lib.len()), a)?;
    let augmented = verify_embedded(&augment_composer(c, a), &aug.library, &aug.index)?;
    let t = compose(c, lib)?;
    let product = product_with_monitor(&t.transducer, a, a.start)?;
    let direct = satisfies_index(&product, &product_priorities(&t.transducer, a));
    Ok((augmented, direct))
}

pub fn verify_dpw(c: &Composer, lib: &Library, a: &Dpw) -> Result<bool> {
    let (augmented, direct) = verify_dpw_routes(c, lib, a)?;
    debug_assert_eq!(augmented, direct, "verification routes disagree");
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use std::collections::BTreeSet;

    fn opts() -> Options {
        Options::default()
    }

    #[test]
    fn end_components_and_almost_sure_reach() {
        // 0 chooses between an odd loop and a coin flip into 1 (even loop)
        // or back to 0.
        let mdp: Mdp = vec![
            vec![(1, vec![0]), (0, vec![0, 1])],
            vec![(2, vec![1])],
            vec![(3, vec![2])],
        ];
        assert_eq!(good_end_components(&mdp), vec![false, true, false]);
        assert!(almost_surely_reaches(&mdp, &[false, true, false], 0));
        // From 0 the only action risks the odd sink 2.
        let risky: Mdp = vec![vec![(0, vec![1, 2])], vec![(2, vec![1])], vec![(3, vec![2])]];
        assert!(!almost_surely_reaches(&risky, &good_end_components(&risky), 0));
    }

    #[test]
    fn single_good_component_is_realizable() {
        let (lib, alpha) = library(vec![m_good()]);
        let r = ExitControlRelation::total(2, 1);
        let s = synth_embedded(&lib, &r, &alpha, opts()).unwrap();
        let c = s.composer.expect("realizable");
        assert!(c.is_compatible(&r));
        assert!(verify_embedded(&c, &lib, &alpha).unwrap());
    }

    #[test]
    fn all_odd_library_is_unrealizable() {
        let (m, _) = m_good();
        let (lib, alpha) = library(vec![(m, vec![1, 1, 1])]);
        let s = synth_embedded(&lib, &ExitControlRelation::total(2, 1), &alpha, opts()).unwrap();
        assert!(s.composer.is_none());
    }

    #[test]
    fn risky_component_is_avoided() {
        let (lib, alpha) = library(vec![m_risky(), m_good()]);
        let total = ExitControlRelation::total(2, 2);
        let s = synth_embedded(&lib, &total, &alpha, opts()).unwrap();
        let c = s.composer.expect("realizable");
        assert!(verify_embedded(&c, &lib, &alpha).unwrap());
        assert!(s.diagnostics.iter().any(|d| d.contains("risky")));

        let forced = ExitControlRelation {
            allowed: BTreeSet::from([(0, 0), (1, 0)]),
        };
        let s = synth_embedded(&lib, &forced, &alpha, opts()).unwrap();
        assert!(s.composer.is_none());
    }

    #[test]
    fn emitters_satisfy_monitor() {
        let (lib, _) = library(vec![emitter(0), emitter(1)]);
        let a = y_infinitely_often();
        let r = ExitControlRelation::total(1, 2);
        let s = synth_dpw(&lib, &r, &a, opts()).unwrap();
        let c = s.composer.expect("realizable");
        assert!(c.is_compatible(&r));
        assert_eq!(verify_dpw_routes(&c, &lib, &a).unwrap(), (true, true));
    }

    #[test]
    fn x_only_library_fails_monitor() {
        let (lib, _) = library(vec![emitter(0)]);
        let a = y_infinitely_often();
        let s = synth_dpw(&lib, &ExitControlRelation::total(1, 1), &a, opts()).unwrap();
        assert!(s.composer.is_none());
        let loop_x = Composer {
            instances: names(&["i0"]),
            start: 0,
            component: vec![0],
            next: vec![vec![0]],
        };
        assert_eq!(verify_dpw_routes(&loop_x, &lib, &a).unwrap(), (false, false));
    }

    #[test]
    fn relation_can_force_alternation() {
        // x must be followed by y and y by x.
        let (lib, _) = library(vec![emitter(0), emitter(1)]);
        let a = y_infinitely_often();
        let r = ExitControlRelation {
            allowed: BTreeSet::from([(0, 1)]),
        };
        let s = synth_dpw(&lib, &r, &a, opts()).unwrap();
        let c = s.composer.expect("realizable");
        assert!(c.is_compatible(&r));
        assert!(verify_dpw(&c, &lib, &a).unwrap());
    }

    #[test]
    fn monitor_alphabet_must_match() {
        let (lib, _) = library(vec![m_good()]);
        let err = synth_dpw(&lib, &ExitControlRelation::total(2, 1), &y_infinitely_often(), opts()).unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch(_)));
    }
}
