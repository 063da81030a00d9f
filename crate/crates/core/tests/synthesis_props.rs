mod common;

use common::{rng, Shape};
use compsynth::format::{parse_composer, render_composer};
use compsynth::oracle::{bounded_composer_search, Objective};
use compsynth::synthesis::{synth_dpw, synth_embedded, verify_dpw_routes, verify_embedded, Options};
use compsynth::{ExitControlRelation, IndexFunction, Library};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;

const OPTS: Options = Options {
    limit: 2_000_000,
    refute: true,
};

fn shape(r: &mut StdRng, outputs: usize) -> Shape {
    Shape {
        states: 4,
        inputs: 2,
        outputs,
        ..Shape::SMALL
    }
    .sample(r)
}

fn instance(seed: u64, outputs: usize) -> (StdRng, Library, IndexFunction, ExitControlRelation) {
    let mut r = rng(seed);
    let s = shape(&mut r, outputs);
    let count = r.gen_range(1..=3);
    let (lib, alpha) = common::library(&mut r, count, s);
    let rel = common::relation(&mut r, lib.width, lib.len());
    (r, lib, alpha, rel)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn embedded_witnesses_verify(seed in any::<u64>()) {
        let (_, lib, alpha, rel) = instance(seed, 1);
        let s = synth_embedded(&lib, &rel, &alpha, OPTS).unwrap();
        if let Some(c) = s.composer {
            c.check_shape(&lib).unwrap();
            prop_assert!(c.is_compatible(&rel));
            prop_assert!(verify_embedded(&c, &lib, &alpha).unwrap());
            let back = parse_composer(&render_composer(&c, &lib), &lib).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert!(verify_embedded(&back, &lib, &alpha).unwrap());
        }
    }

    #[test]
    fn monitor_witnesses_verify(seed in any::<u64>()) {
        let (mut r, lib, _, rel) = instance(seed, 2);
        let a = common::dpw(&mut r, &lib.outputs, 3, 4);
        let s = synth_dpw(&lib, &rel, &a, OPTS).unwrap();
        if let Some(c) = s.composer {
            prop_assert!(c.is_compatible(&rel));
            prop_assert_eq!(verify_dpw_routes(&c, &lib, &a).unwrap(), (true, true));
        }
    }

    #[test]
    fn small_witnesses_are_found(seed in any::<u64>()) {
        let (_, lib, alpha, rel) = instance(seed, 1);
        let found = bounded_composer_search(&lib, &rel, Objective::Index(&alpha), 2).unwrap();
        let s = synth_embedded(&lib, &rel, &alpha, OPTS).unwrap();
        if found.is_some() {
            prop_assert!(s.composer.is_some());
        }
    }

    #[test]
    fn small_monitor_witnesses_are_found(seed in any::<u64>()) {
        let (mut r, lib, _, rel) = instance(seed, 2);
        let a = common::dpw(&mut r, &lib.outputs, 3, 4);
        let found = bounded_composer_search(&lib, &rel, Objective::Monitor(&a), 2).unwrap();
        let s = synth_dpw(&lib, &rel, &a, OPTS).unwrap();
        if found.is_some() {
            prop_assert!(s.composer.is_some());
        }
    }

    #[test]
    fn refutation_agrees_with_emptiness(seed in any::<u64>()) {
        let (_, lib, alpha, rel) = instance(seed, 1);
        let fast = synth_embedded(&lib, &rel, &alpha, OPTS).unwrap();
        let exact = Options { limit: 300_000, refute: false };
        if let Ok(slow) = synth_embedded(&lib, &rel, &alpha, exact) {
            prop_assert_eq!(fast.composer.is_some(), slow.composer.is_some());
        }
    }

    #[test]
    fn odd_everywhere_is_unrealizable(seed in any::<u64>()) {
        let (_, lib, alpha, rel) = instance(seed, 1);
        let odd = IndexFunction::new(
            (0..lib.len()).map(|k| alpha.of(k).iter().map(|p| p | 1).collect()).collect(),
        );
        prop_assert!(synth_embedded(&lib, &rel, &odd, OPTS).unwrap().composer.is_none());
    }
}

const EMBEDDED: &[(&str, bool)] = &[
    ("all_odd", false),
    ("chooser", true),
    ("emitters", false),
    ("evensink", true),
    ("family", true),
    ("forced", false),
    ("gamble", true),
    ("good", true),
    ("retry", true),
    ("risky", false),
    ("routed", true),
    ("server", true),
    ("toggle", true),
    ("x_only", false),
];

const MONITORED: &[(&str, &str, bool)] = &[
    ("chooser", "alternate", false),
    ("chooser", "finitely_many_x", false),
    ("chooser", "y_infinitely_often", true),
    ("emitters", "alternate", false),
    ("emitters", "finitely_many_x", true),
    ("emitters", "y_infinitely_often", true),
    ("toggle", "alternate", true),
    ("toggle", "finitely_many_x", false),
    ("toggle", "y_infinitely_often", true),
    ("x_only", "alternate", false),
    ("x_only", "finitely_many_x", false),
    ("x_only", "y_infinitely_often", false),
];

#[test]
fn corpus_verdicts() {
    let libs = common::corpus_libraries();
    let names: Vec<&str> = libs.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, EMBEDDED.iter().map(|e| e.0).collect::<Vec<_>>());
    for ((name, file), &(_, expected)) in libs.iter().zip(EMBEDDED) {
        let s = synth_embedded(&file.library, &file.relation, &file.index, OPTS).unwrap();
        assert_eq!(s.composer.is_some(), expected, "{name}");
        if let Some(c) = s.composer {
            assert!(c.is_compatible(&file.relation), "{name}");
            assert!(verify_embedded(&c, &file.library, &file.index).unwrap(), "{name}");
        }
    }
    let monitors = common::corpus_monitors();
    let mut pairs = Vec::new();
    for (name, file) in &libs {
        for (mname, a) in &monitors {
            if file.library.outputs != a.alphabet {
                continue;
            }
            let s = synth_dpw(&file.library, &file.relation, a, OPTS).unwrap();
            if let Some(c) = &s.composer {
                assert!(c.is_compatible(&file.relation), "{name} {mname}");
                assert_eq!(
                    verify_dpw_routes(c, &file.library, a).unwrap(),
                    (true, true),
                    "{name} {mname}"
                );
            }
            pairs.push((name.as_str(), mname.as_str(), s.composer.is_some()));
        }
    }
    assert_eq!(pairs, MONITORED);
}

#[test]
fn family_reports_its_odd_sink() {
    let file = common::corpus_libraries()
        .into_iter()
        .find(|(n, _)| n == "family")
        .unwrap()
        .1;
    let s = synth_embedded(&file.library, &file.relation, &file.index, OPTS).unwrap();
    assert!(s
        .diagnostics
        .iter()
        .any(|d| d.contains("risky") && d.contains("odd sink")));
    let c = s.composer.unwrap();
    let risky = file.library.components.iter().position(|m| m.name == "risky").unwrap();
    assert!(!c.component.contains(&risky));
}
