use std::fs;
use std::path::Path;

use anyhow::Context;
use compsynth::automata::{check_choice, choice_rank};
use compsynth::dot::{component_dot, composer_dot};
use compsynth::format::{
    load_library, parse_choices, parse_composer, parse_dpw, parse_library, render_composer, render_library, LibraryFile,
};
use compsynth::mdp::{component_labels, extended_labels, label_member, odd_sinks, remove_odd_sinks};
use compsynth::oracle::{bounded_composer_search, labels_by_supports, Objective};
use compsynth::synthesis::{synth_dpw, synth_embedded, verify_dpw_routes, verify_embedded, Options};
use compsynth::{Composer, Dpw, ExitControlRelation, ExitSet, Library, Severity};

use crate::{Failure, SynthArgs};

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn library(path: &Path) -> anyhow::Result<LibraryFile> {
    load_library(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn monitor(path: &Path) -> anyhow::Result<Dpw> {
    let a = parse_dpw(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let errors: Vec<String> = a
        .validate()
        .iter()
        .filter(|d| d.is_error())
        .map(|d| d.to_string())
        .collect();
    if !errors.is_empty() {
        anyhow::bail!("in {}: {}", path.display(), errors.join("; "));
    }
    Ok(a)
}

fn composer(path: &Path, lib: &Library) -> anyhow::Result<Composer> {
    let c = parse_composer(&read(path)?, lib).with_context(|| format!("in {}", path.display()))?;
    c.check_shape(lib)?;
    Ok(c)
}

pub fn validate(path: &Path) -> Outcome {
    let file = parse_library(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let diags = file.diagnostics();
    for d in &diags {
        println!("{d}");
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    println!(
        "{} components, {} errors, {} warnings",
        file.library.len(),
        errors,
        diags.len() - errors
    );
    if errors > 0 {
        return Err(Failure::Input(anyhow::anyhow!("{} is invalid", path.display())));
    }
    Ok(true)
}

pub fn labels(path: &Path, oracle: bool) -> Outcome {
    let file = library(path)?;
    let (lib, alpha) = (&file.library, &file.index);
    let max = alpha.max_priority();
    let all = extended_labels(lib, alpha);
    for (k, m) in lib.components.iter().enumerate() {
        let own: Vec<String> = all
            .iter()
            .filter(|t| t.component == k)
            .map(|t| format!("({}, {})", t.exits, t.priority))
            .collect();
        println!("{}: {}", m.name, own.join(" "));
    }
    let plain = compsynth::mdp::labels(lib, alpha).len();
    let bound = (max as usize * lib.len()) << lib.width;
    println!("|LABELS| = {plain}, bound max(α)·|L|·2^|D| = {bound}");
    if all.len() > plain {
        println!("{} odd-sink labels added", all.len() - plain);
    }
    if oracle {
        for (k, m) in lib.components.iter().enumerate() {
            let prios = alpha.of(k);
            let truth = labels_by_supports(m, prios, max);
            if truth != component_labels(m, prios, max) {
                return Err(Failure::Disagreement(format!(
                    "labels of {} differ from support enumeration",
                    m.name
                )));
            }
            for exits in ExitSet::all(lib.width) {
                for j in 0..=2 * max {
                    let expected = truth.iter().any(|l| l.exits == exits && l.priority == j);
                    if label_member(exits, j, m, prios, max) != expected {
                        return Err(Failure::Disagreement(format!(
                            "membership of ({exits}, {j}) in the labels of {} differs from enumeration",
                            m.name
                        )));
                    }
                }
            }
        }
        println!("oracle: fast path and enumeration agree");
    }
    Ok(plain <= bound)
}

pub fn preprocess(path: &Path, out: Option<&Path>) -> Outcome {
    let file = library(path)?;
    let sinks = odd_sinks(&file.library, &file.index);
    for &k in &sinks {
        println!("odd sink: {}", file.library.components[k].name);
    }
    println!("{} of {} components removed", sinks.len(), file.library.len());
    if let Some(out) = out {
        let (library, index) = remove_odd_sinks(&file.library, &file.index);
        let kept: Vec<usize> = (0..file.library.len()).filter(|k| !sinks.contains(k)).collect();
        let relation = ExitControlRelation {
            allowed: file
                .relation
                .allowed
                .iter()
                .filter_map(|&(d, k)| kept.iter().position(|&x| x == k).map(|n| (d, n)))
                .collect(),
        };
        let text = render_library(&LibraryFile {
            library,
            index,
            relation,
        });
        fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(sinks.len() < file.library.len())
}

pub fn synth(path: &Path, monitor_path: Option<&Path>, args: &SynthArgs) -> Outcome {
    let file = library(path)?;
    let lib = &file.library;
    let a = monitor_path.map(monitor).transpose()?;
    let options = Options {
        limit: args.limit,
        refute: !args.no_refute,
    };
    let result = match &a {
        None => synth_embedded(lib, &file.relation, &file.index, options)?,
        Some(a) => synth_dpw(lib, &file.relation, a, options)?,
    };
    for d in &result.diagnostics {
        eprintln!("note: {d}");
    }
    eprintln!(
        "labels {}, automaton states {}, explored {}, {:.1} ms",
        result.labels,
        result.automaton_states,
        result.explored,
        result.elapsed.as_secs_f64() * 1e3
    );
    if args.oracle {
        cross_check(&file, a.as_ref(), result.composer.as_ref(), args.oracle_bound)?;
    }
    let Some(c) = result.composer else {
        println!("unrealizable");
        return Ok(false);
    };
    let text = render_composer(&c, lib);
    match &args.out {
        Some(out) => {
            fs::write(out, &text).with_context(|| format!("cannot write {}", out.display()))?;
            println!(
                "realizable: composer with {} instances written to {}",
                c.len(),
                out.display()
            );
        }
        None => {
            println!("realizable");
            print!("{text}");
        }
    }
    if let Some(dir) = &args.dot {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        fs::write(dir.join("composer.dot"), composer_dot(&c, lib))?;
        for (k, m) in lib.components.iter().enumerate() {
            fs::write(dir.join(format!("{}.dot", m.name)), component_dot(m, file.index.of(k)))?;
        }
    }
    Ok(true)
}

fn cross_check(file: &LibraryFile, a: Option<&Dpw>, found: Option<&Composer>, bound: usize) -> Result<(), Failure> {
    let lib = &file.library;
    match found {
        Some(c) => {
            if !c.is_compatible(&file.relation) {
                return Err(Failure::Disagreement(
                    "synthesized composer violates the relation".into(),
                ));
            }
            let ok = match a {
                None => verify_embedded(c, lib, &file.index)?,
                Some(a) => {
                    let (augmented, direct) = verify_dpw_routes(c, lib, a)?;
                    if augmented != direct {
                        return Err(Failure::Disagreement("verification routes disagree".into()));
                    }
                    direct
                }
            };
            if !ok {
                return Err(Failure::Disagreement("synthesized composer fails verification".into()));
            }
            eprintln!("oracle: composer verified");
        }
        None => {
            let objective = match a {
                None => Objective::Index(&file.index),
                Some(a) => Objective::Monitor(a),
            };
            if let Some(c) = bounded_composer_search(lib, &file.relation, objective, bound)? {
                return Err(Failure::Disagreement(format!(
                    "bounded search found a composer:\n{}",
                    render_composer(&c, lib)
                )));
            }
            eprintln!("oracle: no composer with at most {bound} instances");
        }
    }
    Ok(())
}

pub fn verify(composer_path: &Path, path: &Path, monitor_path: Option<&Path>) -> Outcome {
    let file = library(path)?;
    let c = composer(composer_path, &file.library)?;
    if !c.is_compatible(&file.relation) {
        println!("refuted: composer routes violate the library's allow lines");
        return Ok(false);
    }
    let ok = match monitor_path {
        None => verify_embedded(&c, &file.library, &file.index)?,
        Some(p) => {
            let a = monitor(p)?;
            let (augmented, direct) = verify_dpw_routes(&c, &file.library, &a)?;
            if augmented != direct {
                return Err(Failure::Disagreement("verification routes disagree".into()));
            }
            direct
        }
    };
    println!("{}", if ok { "verified" } else { "refuted" });
    Ok(ok)
}

/// Exit 1 when the choice function has an odd rank, which refutes the
/// composer.
pub fn rank(composer_path: &Path, choices: &Path, path: &Path) -> Outcome {
    let file = library(path)?;
    let c = composer(composer_path, &file.library)?;
    let g = parse_choices(&read(choices)?, &c).with_context(|| format!("in {}", choices.display()))?;
    check_choice(&c, &g, &extended_labels(&file.library, &file.index))?;
    let ranks = choice_rank(&c, &g)?;
    let shown: Vec<String> = ranks.iter().map(u32::to_string).collect();
    println!("ranks: {{{}}}", shown.join(","));
    let odd = ranks.iter().any(|p| p % 2 == 1);
    if odd {
        println!("odd rank: the environment wins against this composer");
    }
    Ok(!odd)
}
