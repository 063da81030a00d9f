//! Graphviz export for components and composers.

use std::fmt::Write as _;

use crate::model::{Component, Composer, Library};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Component states with their priorities; exits are drawn as double
/// circles labeled with their direction.
pub fn component_dot(m: &Component, prios: &[u32]) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {} {{", quote(&m.name)).unwrap();
    writeln!(s, "  rankdir=LR;").unwrap();
    let dirs = m.exit_directions();
    for q in 0..m.num_states() {
        let label = match dirs[q] {
            Some(d) => format!(
                "{} / {}\\nprio {} exit {d}",
                m.states[q], m.outputs[m.output[q]], prios[q]
            ),
            None => format!("{} / {}\\nprio {}", m.states[q], m.outputs[m.output[q]], prios[q]),
        };
        let shape = if dirs[q].is_some() { "doublecircle" } else { "circle" };
        writeln!(s, "  n{q} [label={}, shape={shape}];", quote(&label)).unwrap();
    }
    writeln!(s, "  init [shape=point];\n  init -> n{};", m.start).unwrap();
    for (q, row) in m.transitions.iter().enumerate() {
        for (a, dist) in row.iter().flatten().enumerate() {
            for (t, p) in dist {
                writeln!(s, "  n{q} -> n{t} [label={}];", quote(&format!("{} {p}", m.inputs[a]))).unwrap();
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Instances labeled with their components; routes labeled with directions.
pub fn composer_dot(c: &Composer, lib: &Library) -> String {
    let mut s = String::new();
    s.push_str("digraph composer {\n");
    for (i, name) in c.instances.iter().enumerate() {
        let label = format!("{name}: {}", lib.components[c.component[i]].name);
        writeln!(s, "  i{i} [label={}, shape=box];", quote(&label)).unwrap();
    }
    writeln!(s, "  init [shape=point];\n  init -> i{};", c.start).unwrap();
    for (i, row) in c.next.iter().enumerate() {
        for (d, t) in row.iter().enumerate() {
            writeln!(s, "  i{i} -> i{t} [label=\"{d}\"];").unwrap();
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    #[test]
    fn dot_mentions_every_state_and_route() {
        let (m, prios) = m_good();
        let d = component_dot(&m, &prios);
        assert!(d.contains("n2 [label=\"e1 / x\\nprio 1 exit 1\", shape=doublecircle]"));
        assert_eq!(d.matches(" -> ").count(), 3);
        let (lib, _) = library(vec![m_good()]);
        let c = Composer {
            instances: names(&["i0"]),
            start: 0,
            component: vec![0],
            next: vec![vec![0, 0]],
        };
        assert_eq!(composer_dot(&c, &lib).matches("i0 -> i0").count(), 2);
    }
}
