mod common;

use common::{rng, Kind, Shape};
use compsynth::automata::{build_rank_nbt, choice_rank, dualize, intersect, membership, narrow, project_labels, union};
use compsynth::composition::{compose, tree_of_choice, wide, xray, RegularTree};
use compsynth::mdp::{environment_can_win, extended_labels, LabelTriple};
use compsynth::oracle::{enumerate_choice_functions, odd_rank_exists};
use proptest::prelude::*;
use rand::Rng;

const KINDS: [Kind; 3] = [Kind::Buchi, Kind::CoBuchi, Kind::Parity];

fn rank_shape() -> Shape {
    Shape {
        states: 4,
        inputs: 2,
        outputs: 1,
        width: 2,
        max_prio: 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_automata_detect_ranks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let count = r.gen_range(1..=2);
        let (lib, alpha) = common::library(&mut r, count, rank_shape());
        let c = common::composer(&mut r, &lib, 3);
        let gamma_set = extended_labels(&lib, &alpha);
        let gamma: Vec<LabelTriple> = gamma_set.iter().copied().collect();
        let max = alpha.max_priority();
        let automata: Vec<_> = (1..=2 * max).map(|p| build_rank_nbt(p, lib.width, &gamma)).collect();
        for g in enumerate_choice_functions(&c, &gamma_set) {
            let ranks = choice_rank(&c, &g).unwrap();
            let t = tree_of_choice(&c, &g, &gamma).unwrap();
            for (i, a) in automata.iter().enumerate() {
                let p = i as u32 + 1;
                prop_assert_eq!(membership(a, &t).unwrap(), ranks.contains(&p), "p = {}, g = {:?}", p, g);
            }
        }
    }

    #[test]
    fn odd_rank_iff_environment_wins(seed in any::<u64>()) {
        let mut r = rng(seed);
        let count = r.gen_range(1..=3);
        let (lib, alpha) = common::library(&mut r, count, rank_shape());
        let c = common::composer(&mut r, &lib, 3);
        let t = compose(&c, &lib).unwrap();
        let wins = environment_can_win(&t.transducer, &t.priorities(&c, &alpha)).is_some();
        prop_assert_eq!(odd_rank_exists(&c, &extended_labels(&lib, &alpha)).unwrap(), wins);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn dual_complements(seed in any::<u64>()) {
        let mut r = rng(seed);
        let kind = KINDS[r.gen_range(0..3)];
        let a = common::automaton(&mut r, kind, 2, 2, 6);
        let t = common::tree(&mut r, 2, 2, 3);
        prop_assert_eq!(membership(&dualize(&a), &t).unwrap(), !membership(&a, &t).unwrap());
    }

    #[test]
    fn boolean_identities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let kind = KINDS[r.gen_range(0..3)];
        let a = common::automaton(&mut r, kind, 2, 2, 6);
        let b = common::automaton(&mut r, kind, 2, 2, 6);
        let t = common::tree(&mut r, 2, 2, 3);
        let (ma, mb) = (membership(&a, &t).unwrap(), membership(&b, &t).unwrap());
        prop_assert_eq!(membership(&intersect(&a, &b).unwrap(), &t).unwrap(), ma && mb);
        if kind == Kind::Buchi {
            prop_assert_eq!(membership(&union(&[a, b], 2, 2).unwrap(), &t).unwrap(), ma || mb);
        }
    }

    #[test]
    fn projection_accepts_relabelings(seed in any::<u64>()) {
        let mut r = rng(seed);
        // Letters of the inner automaton are labels; labels 2k and 2k+1
        // belong to component k, except that component 1 owns only label 2.
        let owners = [0usize, 0, 1];
        let gamma: Vec<LabelTriple> = owners
            .iter()
            .map(|&k| LabelTriple { exits: compsynth::ExitSet::EMPTY, priority: 0, component: k })
            .collect();
        let kind = KINDS[r.gen_range(0..3)];
        let a = common::automaton(&mut r, kind, 3, 2, 5);
        let t = common::tree(&mut r, 3, 2, 3);
        let components = RegularTree { labels: t.labels.iter().map(|&l| owners[l]).collect(), ..t.clone() };
        let projected = project_labels(&a, &gamma, 2);
        if membership(&a, &t).unwrap() {
            prop_assert!(membership(&projected, &components).unwrap());
        }
        if components.labels.iter().all(|&k| k == 1) {
            prop_assert_eq!(membership(&projected, &components).unwrap(), membership(&a, &t).unwrap());
        }
    }

    #[test]
    fn narrow_reads_xray_of_wide(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nz, nx, ny) = (r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=2));
        let kind = KINDS[r.gen_range(0..3)];
        let b = common::automaton(&mut r, kind, nz * ny, nx * ny, 6);
        let t = common::tree(&mut r, nz, nx, 3);
        let y0 = r.gen_range(0..ny);
        let lhs = membership(&narrow(&b, ny, y0).unwrap(), &t).unwrap();
        let rhs = membership(&b, &xray(&wide(&t, ny), ny, y0).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
