mod common;

use std::collections::BTreeSet;

use common::{rng, Shape};
use compsynth::format::{
    parse_composer, parse_dpw, parse_library, render_composer, render_dpw, render_library, LibraryFile,
};
use compsynth::mdp::full_support_graph;
use compsynth::{pad_exits, validate_library, Rational};
use num_traits::One;
use proptest::prelude::*;

proptest! {
    #[test]
    fn random_libraries_are_valid(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape::SMALL.sample(&mut r);
        let (lib, _) = common::library(&mut r, 3, shape);
        prop_assert!(validate_library(&lib).iter().all(|d| !d.is_error()));
        for c in &lib.components {
            for row in c.transitions.iter().flatten() {
                for dist in row {
                    let sum: Rational = dist.iter().map(|p| p.1).sum();
                    prop_assert_eq!(sum, Rational::one());
                }
            }
        }
    }

    #[test]
    fn broken_sums_are_reported(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape::SMALL.sample(&mut r);
        let (mut lib, _) = common::library(&mut r, 1, shape);
        let row = lib.components[0].transitions[0].as_mut().unwrap();
        row[0][0].1 /= Rational::from_integer(2);
        prop_assert!(validate_library(&lib).iter().any(|d| d.is_error()));
    }

    #[test]
    fn padding_keeps_the_reachable_fragment(seed in any::<u64>(), extra in 1usize..3) {
        let mut r = rng(seed);
        let shape = Shape::SMALL.sample(&mut r);
        let (m, _) = common::component(&mut r, "m", shape);
        let padded = pad_exits(&m, m.width() + extra).unwrap();
        prop_assert_eq!(padded.width(), m.width() + extra);
        let edges = |g: &compsynth::graph::SupportGraph, start: usize| -> BTreeSet<(usize, usize)> {
            let reach = g.reachable_from(start);
            g.edges().filter(|&(u, _)| reach[u]).collect()
        };
        prop_assert_eq!(
            edges(&full_support_graph(&m), m.start),
            edges(&full_support_graph(&padded), padded.start)
        );
    }

    #[test]
    fn formats_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape { outputs: 2, ..Shape::SMALL.sample(&mut r) };
        let (library, index) = common::library(&mut r, 3, shape);
        let relation = common::relation(&mut r, library.width, library.len());
        let file = LibraryFile { library, index, relation };
        let back = parse_library(&render_library(&file)).unwrap();
        prop_assert_eq!(&back, &file);

        let c = common::composer(&mut r, &file.library, 4);
        prop_assert_eq!(parse_composer(&render_composer(&c, &file.library), &file.library).unwrap(), c);

        let a = common::dpw(&mut r, &file.library.outputs, 3, 4);
        prop_assert_eq!(parse_dpw(&render_dpw(&a)).unwrap(), a);
    }
}

#[test]
fn zero_probabilities_are_rejected_by_the_parser() {
    let text = "library width=1 inputs=a outputs=x\ncomponent m\n state s out=x prio=1\n exit e out=x prio=1 dir=0\n trans s a -> e:0\n";
    assert!(parse_library(text).is_err());
}
