//! Seeded generators of small random instances shared by the integration
//! tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use compsynth::automata::{Acceptance, Formula, TreeAutomaton};
use compsynth::composition::RegularTree;
use compsynth::format::{load_library, parse_dpw, LibraryFile};
use compsynth::{Component, Composer, Dpw, ExitControlRelation, IndexFunction, Library, Rational};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Size limits for random components.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    /// Upper bound on states, exits included.
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub width: usize,
    pub max_prio: u32,
}

impl Shape {
    pub const SMALL: Shape = Shape {
        states: 6,
        inputs: 3,
        outputs: 1,
        width: 2,
        max_prio: 4,
    };

    /// Random shape within the limits of `self`; at least one input and
    /// one direction.
    pub fn sample(&self, rng: &mut StdRng) -> Shape {
        let width = rng.gen_range(1..=self.width);
        Shape {
            states: rng.gen_range(width + 1..=self.states.max(width + 1)),
            inputs: rng.gen_range(1..=self.inputs),
            outputs: self.outputs,
            width,
            max_prio: self.max_prio,
        }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn distribution(rng: &mut StdRng, n: usize) -> Vec<(usize, Rational)> {
    let mut targets: Vec<usize> = (0..n).collect();
    targets.shuffle(rng);
    if n == 1 || rng.gen_bool(0.5) {
        return vec![(targets[0], Rational::from_integer(1))];
    }
    let d = rng.gen_range(2..=4);
    vec![(targets[0], Rational::new(1, d)), (targets[1], Rational::new(d - 1, d))]
}

/// A component with exactly `shape.states` states: internal states first,
/// then one exit per direction.
pub fn component(rng: &mut StdRng, name: &str, shape: Shape) -> (Component, Vec<u32>) {
    let n = shape.states.max(shape.width + 1);
    let internal = n - shape.width;
    let transitions = (0..n)
        .map(|q| (q < internal).then(|| (0..shape.inputs).map(|_| distribution(rng, n)).collect()))
        .collect();
    let mut states = names("s", internal);
    states.extend(names("e", shape.width));
    let c = Component {
        name: name.to_string(),
        inputs: names("a", shape.inputs),
        outputs: names("o", shape.outputs),
        states,
        start: 0,
        exits: (internal..n).collect(),
        output: (0..n).map(|_| rng.gen_range(0..shape.outputs)).collect(),
        transitions,
    };
    let prios = (0..n).map(|_| rng.gen_range(1..=shape.max_prio)).collect();
    (c, prios)
}

/// A library of `count` components sharing the alphabets and width of
/// `shape`; state counts vary up to `shape.states`.
pub fn library(rng: &mut StdRng, count: usize, shape: Shape) -> (Library, IndexFunction) {
    let mut components = Vec::new();
    let mut prios = Vec::new();
    for k in 0..count {
        let s = Shape {
            states: rng.gen_range(shape.width + 1..=shape.states.max(shape.width + 1)),
            ..shape
        };
        let (c, p) = component(rng, &format!("m{k}"), s);
        components.push(c);
        prios.push(p);
    }
    let lib = Library {
        width: shape.width,
        inputs: names("a", shape.inputs),
        outputs: names("o", shape.outputs),
        components,
    };
    (lib, IndexFunction::new(prios))
}

/// Total half of the time, otherwise a random non-empty set of pairs.
pub fn relation(rng: &mut StdRng, width: usize, count: usize) -> ExitControlRelation {
    if rng.gen_bool(0.5) {
        return ExitControlRelation::total(width, count);
    }
    let mut allowed = BTreeSet::new();
    for d in 0..width {
        for k in 0..count {
            if rng.gen_bool(0.6) {
                allowed.insert((d, k));
            }
        }
        if !allowed.iter().any(|&(e, _)| e == d) {
            allowed.insert((d, rng.gen_range(0..count)));
        }
    }
    ExitControlRelation { allowed }
}

pub fn composer(rng: &mut StdRng, lib: &Library, max_instances: usize) -> Composer {
    let n = rng.gen_range(1..=max_instances);
    Composer {
        instances: names("i", n),
        start: 0,
        component: (0..n).map(|_| rng.gen_range(0..lib.len())).collect(),
        next: (0..n)
            .map(|_| (0..lib.width).map(|_| rng.gen_range(0..n)).collect())
            .collect(),
    }
}

pub fn dpw(rng: &mut StdRng, alphabet: &[String], max_states: usize, max_prio: u32) -> Dpw {
    let n = rng.gen_range(1..=max_states);
    Dpw {
        alphabet: alphabet.to_vec(),
        states: names("t", n),
        start: 0,
        next: (0..n)
            .map(|_| alphabet.iter().map(|_| rng.gen_range(0..n)).collect())
            .collect(),
        priority: (0..n).map(|_| rng.gen_range(1..=max_prio)).collect(),
    }
}

pub fn tree(rng: &mut StdRng, letters: usize, dirs: usize, max_states: usize) -> RegularTree {
    let n = rng.gen_range(1..=max_states);
    RegularTree {
        num_dirs: dirs,
        start: 0,
        next: (0..n)
            .map(|_| (0..dirs).map(|_| rng.gen_range(0..n)).collect())
            .collect(),
        labels: (0..n).map(|_| rng.gen_range(0..letters)).collect(),
    }
}

fn formula(rng: &mut StdRng, dirs: usize, states: usize, depth: u32) -> Formula {
    let roll = rng.gen_range(0..10);
    if depth == 0 || roll < 4 {
        return match roll {
            0 if depth < 2 => Formula::True,
            1 if depth < 2 => Formula::False,
            _ => Formula::atom(rng.gen_range(0..dirs), rng.gen_range(0..states)),
        };
    }
    let parts: Vec<Formula> = (0..rng.gen_range(2..=3))
        .map(|_| formula(rng, dirs, states, depth - 1))
        .collect();
    if roll < 7 {
        Formula::and(parts)
    } else {
        Formula::or(parts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Buchi,
    CoBuchi,
    Parity,
}

pub fn automaton(rng: &mut StdRng, kind: Kind, letters: usize, dirs: usize, max_states: usize) -> TreeAutomaton {
    let n = rng.gen_range(1..=max_states);
    let delta = (0..n)
        .map(|_| (0..letters).map(|_| formula(rng, dirs, n, 2)).collect())
        .collect();
    let flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let acceptance = match kind {
        Kind::Buchi => Acceptance::Buchi(flags),
        Kind::CoBuchi => Acceptance::CoBuchi(flags),
        Kind::Parity => Acceptance::Parity((0..n).map(|_| rng.gen_range(0..=4)).collect()),
    };
    TreeAutomaton {
        num_letters: letters,
        num_dirs: dirs,
        states: names("q", n),
        start: 0,
        delta,
        acceptance,
    }
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn files(dir: PathBuf, ext: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

/// Every library of the corpus, by file stem.
pub fn corpus_libraries() -> Vec<(String, LibraryFile)> {
    files(corpus_dir(), "lib")
        .into_iter()
        .map(|(name, text)| {
            let file = load_library(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, file)
        })
        .collect()
}

pub fn corpus_monitors() -> Vec<(String, Dpw)> {
    files(corpus_dir().join("monitors"), "dpw")
        .into_iter()
        .map(|(name, text)| {
            let a = parse_dpw(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, a)
        })
        .collect()
}
