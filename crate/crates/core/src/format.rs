//! Text formats for libraries, parity monitors, composers and choice
//! functions. Every parser reports the line and column of the first
//! problem; every renderer produces text its parser reads back.
//!
//! ```text
//! library width=2 inputs=a,b outputs=x
//! allow all
//! component good
//!   state s out=x prio=2
//!   exit e0 out=x prio=2 dir=0
//!   exit e1 out=x prio=1 dir=1
//!   trans s a -> e0:1
//!   trans s b -> e0:1/2 e1:1/2
//! ```
//!
//! `#` starts a comment. The first `state` or `exit` line of a component
//! names its start state. Without `allow` lines every direction may lead to
//! every component; `allow none` forbids all routes.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mdp::Label;
use crate::model::{
    validate_index, validate_library, validate_relation, Component, Composer, Diagnostic, Dpw, ExitControlRelation,
    ExitSet, IndexFunction, Library, Rational,
};

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Token<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    /// Splits `key=value`, checking the key.
    fn value(&self, key: &str) -> Result<Token<'a>> {
        match self.text.split_once('=') {
            Some((k, v)) if k == key => Ok(Token {
                text: v,
                line: self.line,
                column: self.column + k.len() + 1,
            }),
            _ => Err(self.error(format!("expected {key}=…, found '{}'", self.text))),
        }
    }

    fn number(&self) -> Result<usize> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected a number, found '{}'", self.text)))
    }

    fn list(&self) -> Vec<String> {
        if self.text.is_empty() || self.text == "-" {
            return Vec::new();
        }
        self.text.split(',').map(str::to_string).collect()
    }
}

/// Non-empty lines split into tokens, comments removed.
fn scan(text: &str) -> Vec<Vec<Token<'_>>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut offset = 0;
        for piece in body.split_whitespace() {
            let at = body[offset..].find(piece).unwrap() + offset;
            tokens.push(Token {
                text: piece,
                line: i + 1,
                column: body[..at].chars().count() + 1,
            });
            offset = at + piece.len();
        }
        if !tokens.is_empty() {
            lines.push(tokens);
        }
    }
    lines
}

/// Key/value fields of a line after its keyword (and positional tokens).
fn fields<'a>(line: &[Token<'a>], keys: &[&str]) -> Result<HashMap<String, Token<'a>>> {
    let mut out = HashMap::new();
    for tok in line {
        let Some((k, _)) = tok.text.split_once('=') else {
            return Err(tok.error(format!("unexpected '{}'", tok.text)));
        };
        if !keys.contains(&k) {
            return Err(tok.error(format!("unknown field '{k}'")));
        }
        if out.insert(k.to_string(), tok.value(k)?).is_some() {
            return Err(tok.error(format!("field '{k}' given twice")));
        }
    }
    Ok(out)
}

fn required<'a>(f: &HashMap<String, Token<'a>>, key: &str, at: &Token<'_>) -> Result<Token<'a>> {
    f.get(key)
        .copied()
        .ok_or_else(|| at.error(format!("missing field {key}=")))
}

fn lookup(names: &[String], tok: &Token<'_>, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == tok.text)
        .ok_or_else(|| tok.error(format!("unknown {what} '{}'", tok.text)))
}

fn arity(line: &[Token<'_>], n: usize, usage: &str) -> Result<()> {
    if line.len() < n {
        let last = line.last().unwrap();
        return Err(Error::Parse {
            line: last.line,
            column: last.column + last.text.chars().count(),
            message: format!("incomplete line, expected: {usage}"),
        });
    }
    Ok(())
}

fn parse_rational(tok: &Token<'_>) -> Result<Rational> {
    if tok.text.contains(['.', 'e', 'E']) {
        return Err(tok.error(format!("'{}' is not an exact rational; write it as n/d", tok.text)));
    }
    let r = Rational::from_str(tok.text).map_err(|_| tok.error(format!("malformed rational '{}'", tok.text)))?;
    if r <= Rational::zero() {
        return Err(tok.error("probabilities must be positive"));
    }
    Ok(r)
}

/// A parsed library file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryFile {
    pub library: Library,
    pub index: IndexFunction,
    pub relation: ExitControlRelation,
}

impl LibraryFile {
    /// Validation diagnostics of the library, index function and relation.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = validate_library(&self.library);
        out.extend(validate_index(&self.library, &self.index));
        out.extend(validate_relation(&self.library, &self.relation));
        out
    }
}

struct PendingTrans<'a> {
    state: Token<'a>,
    letter: Token<'a>,
    targets: Vec<(Token<'a>, Rational)>,
}

struct ComponentDraft<'a> {
    header: Token<'a>,
    states: Vec<String>,
    output: Vec<usize>,
    prios: Vec<u32>,
    exits: Vec<(usize, usize, Token<'a>)>,
    trans: Vec<PendingTrans<'a>>,
}

impl<'a> ComponentDraft<'a> {
    fn finish(self, inputs: &[String], outputs: &[String]) -> Result<(Component, Vec<u32>)> {
        if self.states.is_empty() {
            return Err(self
                .header
                .error(format!("component {} has no states", self.header.text)));
        }
        let mut exits = self.exits;
        exits.sort_by_key(|e| e.0);
        for (i, (d, _, tok)) in exits.iter().enumerate() {
            if *d != i {
                let message = if i > 0 && exits[i - 1].0 == *d {
                    format!("direction {d} has two exits")
                } else {
                    format!("directions must be numbered from 0 without gaps; direction {i} is missing")
                };
                return Err(tok.error(message));
            }
        }
        let exit_states: Vec<usize> = exits.iter().map(|e| e.1).collect();
        let mut transitions: Vec<Option<Vec<_>>> = (0..self.states.len())
            .map(|q| (!exit_states.contains(&q)).then(|| vec![Vec::new(); inputs.len()]))
            .collect();
        for t in self.trans {
            let q = lookup(&self.states, &t.state, "state")?;
            let a = lookup(inputs, &t.letter, "input letter")?;
            let Some(row) = transitions[q].as_mut() else {
                return Err(t
                    .state
                    .error(format!("exit state {} cannot have transitions", t.state.text)));
            };
            if !row[a].is_empty() {
                return Err(t
                    .letter
                    .error(format!("second transition for {} on {}", t.state.text, t.letter.text)));
            }
            for (target, p) in t.targets {
                let r = lookup(&self.states, &target, "state")?;
                if row[a].iter().any(|&(s, _)| s == r) {
                    return Err(target.error(format!("{} listed twice", target.text)));
                }
                row[a].push((r, p));
            }
        }
        Ok((
            Component {
                name: self.header.text.to_string(),
                inputs: inputs.to_vec(),
                outputs: outputs.to_vec(),
                states: self.states,
                start: 0,
                exits: exit_states,
                output: self.output,
                transitions,
            },
            self.prios,
        ))
    }
}

/// Parses a library file without validating it; see [`load_library`].
pub fn parse_library(text: &str) -> Result<LibraryFile> {
    let lines = scan(text);
    let Some(header) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty file, expected a library line".into(),
        });
    };
    if header[0].text != "library" {
        return Err(header[0].error("expected a library line"));
    }
    let f = fields(&header[1..], &["width", "inputs", "outputs"])?;
    let width = required(&f, "width", &header[0])?.number()?;
    let inputs = required(&f, "inputs", &header[0])?.list();
    let outputs = required(&f, "outputs", &header[0])?.list();

    let mut drafts: Vec<ComponentDraft<'_>> = Vec::new();
    let mut allows: Vec<(usize, Token<'_>)> = Vec::new();
    let mut allow_mode: Option<&str> = None;
    for line in &lines[1..] {
        let kw = line[0];
        match kw.text {
            "allow" => {
                arity(line, 2, "allow dir=<n> component=<id> | allow all | allow none")?;
                if line.len() == 2 && (line[1].text == "all" || line[1].text == "none") {
                    allow_mode = Some(line[1].text);
                    continue;
                }
                let f = fields(&line[1..], &["dir", "component"])?;
                let d = required(&f, "dir", &kw)?;
                let dir = d.number()?;
                if dir >= width {
                    return Err(d.error(format!("direction {dir} is not below the width {width}")));
                }
                allows.push((dir, required(&f, "component", &kw)?));
            }
            "component" => {
                arity(line, 2, "component <id>")?;
                if line.len() > 2 {
                    return Err(line[2].error("unexpected text after the component name"));
                }
                if drafts.iter().any(|c| c.header.text == line[1].text) {
                    return Err(line[1].error(format!("component {} declared twice", line[1].text)));
                }
                drafts.push(ComponentDraft {
                    header: line[1],
                    states: Vec::new(),
                    output: Vec::new(),
                    prios: Vec::new(),
                    exits: Vec::new(),
                    trans: Vec::new(),
                });
            }
            "state" | "exit" | "trans" => {
                let Some(c) = drafts.last_mut() else {
                    return Err(kw.error(format!("{} outside a component", kw.text)));
                };
                if kw.text == "trans" {
                    arity(line, 5, "trans <state> <letter> -> <state>:<rational> ...")?;
                    if line[3].text != "->" {
                        return Err(line[3].error("expected '->'"));
                    }
                    let mut targets = Vec::new();
                    for tok in &line[4..] {
                        let Some((s, p)) = tok.text.rsplit_once(':') else {
                            return Err(tok.error("expected <state>:<rational>"));
                        };
                        let target = Token { text: s, ..*tok };
                        let prob = Token {
                            text: p,
                            column: tok.column + s.chars().count() + 1,
                            ..*tok
                        };
                        targets.push((target, parse_rational(&prob)?));
                    }
                    c.trans.push(PendingTrans {
                        state: line[1],
                        letter: line[2],
                        targets,
                    });
                    continue;
                }
                arity(line, 2, "state <id> out=<id> prio=<n>")?;
                let name = line[1];
                if c.states.iter().any(|s| s == name.text) {
                    return Err(name.error(format!("state {} declared twice", name.text)));
                }
                let keys: &[&str] = if kw.text == "exit" {
                    &["out", "prio", "dir"]
                } else {
                    &["out", "prio"]
                };
                let f = fields(&line[2..], keys)?;
                let out = lookup(&outputs, &required(&f, "out", &kw)?, "output letter")?;
                let prio = required(&f, "prio", &kw)?.number()? as u32;
                if kw.text == "exit" {
                    let dir = required(&f, "dir", &kw)?.number()?;
                    c.exits.push((dir, c.states.len(), name));
                }
                c.states.push(name.text.to_string());
                c.output.push(out);
                c.prios.push(prio);
            }
            other => return Err(kw.error(format!("unknown keyword '{other}'"))),
        }
    }

    let names: Vec<String> = drafts.iter().map(|c| c.header.text.to_string()).collect();
    let mut components = Vec::new();
    let mut priorities = Vec::new();
    for draft in drafts {
        let (c, p) = draft.finish(&inputs, &outputs)?;
        components.push(c);
        priorities.push(p);
    }
    let relation = match allow_mode {
        Some("none") if allows.is_empty() => ExitControlRelation {
            allowed: BTreeSet::new(),
        },
        Some("all") | None if allows.is_empty() => ExitControlRelation::total(width, components.len()),
        _ if allow_mode.is_some() => {
            let tok = allows[0].1;
            return Err(tok.error("allow all/none cannot be combined with allow dir=… lines"));
        }
        _ => {
            let mut allowed = BTreeSet::new();
            for (d, tok) in &allows {
                allowed.insert((*d, lookup(&names, tok, "component")?));
            }
            ExitControlRelation { allowed }
        }
    };
    Ok(LibraryFile {
        library: Library {
            width,
            inputs,
            outputs,
            components,
        },
        index: IndexFunction::new(priorities),
        relation,
    })
}

/// Parses and validates a library file; validation errors are returned as
/// [`Error::Invalid`].
pub fn load_library(text: &str) -> Result<LibraryFile> {
    let file = parse_library(text)?;
    let errors: Vec<Diagnostic> = file.diagnostics().into_iter().filter(|d| d.is_error()).collect();
    if errors.is_empty() {
        Ok(file)
    } else {
        Err(Error::Invalid(errors))
    }
}

fn join(xs: &[String]) -> String {
    if xs.is_empty() {
        "-".into()
    } else {
        xs.join(",")
    }
}

pub fn render_library(file: &LibraryFile) -> String {
    let lib = &file.library;
    let mut s = String::new();
    writeln!(
        s,
        "library width={} inputs={} outputs={}",
        lib.width,
        join(&lib.inputs),
        join(&lib.outputs)
    )
    .unwrap();
    if file.relation.allowed.is_empty() {
        writeln!(s, "allow none").unwrap();
    } else if file.relation != ExitControlRelation::total(lib.width, lib.len()) {
        for &(d, k) in &file.relation.allowed {
            writeln!(s, "allow dir={d} component={}", lib.components[k].name).unwrap();
        }
    }
    for (k, c) in lib.components.iter().enumerate() {
        let prios = file.index.of(k);
        writeln!(s, "component {}", c.name).unwrap();
        let dirs = c.exit_directions();
        let mut order: Vec<usize> = (0..c.num_states()).collect();
        order.retain(|&q| q != c.start);
        order.insert(0, c.start);
        for q in order {
            let out = &c.outputs[c.output[q]];
            match dirs[q] {
                Some(d) => writeln!(s, "  exit {} out={out} prio={} dir={d}", c.states[q], prios[q]).unwrap(),
                None => writeln!(s, "  state {} out={out} prio={}", c.states[q], prios[q]).unwrap(),
            }
        }
        for (q, row) in c.transitions.iter().enumerate() {
            for (a, dist) in row.iter().flatten().enumerate() {
                if dist.is_empty() {
                    continue;
                }
                write!(s, "  trans {} {} ->", c.states[q], c.inputs[a]).unwrap();
                for (t, p) in dist {
                    write!(s, " {}:{p}", c.states[*t]).unwrap();
                }
                s.push('\n');
            }
        }
    }
    s
}

/// Parses a monitor file. Priorities given with `convention=min-even` are
/// converted to the max-even reading.
///
/// ```text
/// dpw inputs=x,y convention=max-even
/// state sx prio=1 start
/// state sy prio=2
/// edge sx x -> sx
/// ```
pub fn parse_dpw(text: &str) -> Result<Dpw> {
    let lines = scan(text);
    let Some(header) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty file, expected a dpw line".into(),
        });
    };
    if header[0].text != "dpw" {
        return Err(header[0].error("expected a dpw line"));
    }
    let f = fields(&header[1..], &["inputs", "convention"])?;
    let alphabet = required(&f, "inputs", &header[0])?.list();
    let min_even = match f.get("convention") {
        None => false,
        Some(t) if t.text == "max-even" => false,
        Some(t) if t.text == "min-even" => true,
        Some(t) => return Err(t.error(format!("unknown convention '{}'", t.text))),
    };
    let mut states: Vec<String> = Vec::new();
    let mut priority = Vec::new();
    let mut start: Option<usize> = None;
    let mut edges = Vec::new();
    for line in &lines[1..] {
        let kw = line[0];
        match kw.text {
            "state" => {
                arity(line, 3, "state <id> prio=<n> [start]")?;
                let mut rest = &line[2..];
                if rest.last().is_some_and(|t| t.text == "start") {
                    let tok = rest[rest.len() - 1];
                    if start.is_some() {
                        return Err(tok.error("second start state"));
                    }
                    start = Some(states.len());
                    rest = &rest[..rest.len() - 1];
                }
                if states.iter().any(|s| s == line[1].text) {
                    return Err(line[1].error(format!("state {} declared twice", line[1].text)));
                }
                let f = fields(rest, &["prio"])?;
                priority.push(required(&f, "prio", &kw)?.number()? as u32);
                states.push(line[1].text.to_string());
            }
            "edge" => {
                arity(line, 5, "edge <state> <letter> -> <state>")?;
                if line[3].text != "->" {
                    return Err(line[3].error("expected '->'"));
                }
                if line.len() > 5 {
                    return Err(line[5].error("a monitor edge has a single target"));
                }
                edges.push((line[1], line[2], line[4]));
            }
            other => return Err(kw.error(format!("unknown keyword '{other}'"))),
        }
    }
    if states.is_empty() {
        return Err(header[0].error("monitor has no states"));
    }
    let mut next = vec![vec![usize::MAX; alphabet.len()]; states.len()];
    for (s, a, t) in &edges {
        let s_ix = lookup(&states, s, "state")?;
        let a_ix = lookup(&alphabet, a, "letter")?;
        if next[s_ix][a_ix] != usize::MAX {
            return Err(a.error(format!("second edge from {} on {}", s.text, a.text)));
        }
        next[s_ix][a_ix] = lookup(&states, t, "state")?;
    }
    for (s, row) in next.iter().enumerate() {
        if let Some(a) = row.iter().position(|&t| t == usize::MAX) {
            let last = lines.last().unwrap()[0];
            return Err(last.error(format!("no edge from {} on {}", states[s], alphabet[a])));
        }
    }
    let dpw = Dpw {
        alphabet,
        states,
        start: start.unwrap_or(0),
        next,
        priority,
    };
    Ok(if min_even { dpw.from_min_even() } else { dpw })
}

pub fn render_dpw(a: &Dpw) -> String {
    let mut s = String::new();
    writeln!(s, "dpw inputs={} convention=max-even", join(&a.alphabet)).unwrap();
    for (q, name) in a.states.iter().enumerate() {
        let mark = if q == a.start { " start" } else { "" };
        writeln!(s, "state {name} prio={}{mark}", a.priority[q]).unwrap();
    }
    for (q, row) in a.next.iter().enumerate() {
        for (l, &t) in row.iter().enumerate() {
            writeln!(s, "edge {} {} -> {}", a.states[q], a.alphabet[l], a.states[t]).unwrap();
        }
    }
    s
}

/// Parses a composer over `lib`.
///
/// ```text
/// composer start=i0
/// instance i0 component=good
/// route i0 dir=0 -> i0
/// ```
pub fn parse_composer(text: &str, lib: &Library) -> Result<Composer> {
    let lines = scan(text);
    let Some(header) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty file, expected a composer line".into(),
        });
    };
    if header[0].text != "composer" {
        return Err(header[0].error("expected a composer line"));
    }
    let start = required(&fields(&header[1..], &["start"])?, "start", &header[0])?;
    let mut instances: Vec<String> = Vec::new();
    let mut component = Vec::new();
    let mut routes = Vec::new();
    for line in &lines[1..] {
        let kw = line[0];
        match kw.text {
            "instance" => {
                arity(line, 3, "instance <id> component=<id>")?;
                if instances.iter().any(|s| s == line[1].text) {
                    return Err(line[1].error(format!("instance {} declared twice", line[1].text)));
                }
                let c = required(&fields(&line[2..], &["component"])?, "component", &kw)?;
                let k = lib
                    .component_index(c.text)
                    .ok_or_else(|| c.error(format!("unknown component '{}'", c.text)))?;
                instances.push(line[1].text.to_string());
                component.push(k);
            }
            "route" => {
                arity(line, 5, "route <id> dir=<n> -> <id>")?;
                if line[3].text != "->" {
                    return Err(line[3].error("expected '->'"));
                }
                if line.len() > 5 {
                    return Err(line[5].error("a route has a single target"));
                }
                routes.push((line[1], line[2].value("dir")?, line[4]));
            }
            other => return Err(kw.error(format!("unknown keyword '{other}'"))),
        }
    }
    let mut next = vec![vec![usize::MAX; lib.width]; instances.len()];
    for (from, dir, to) in &routes {
        let i = lookup(&instances, from, "instance")?;
        let d = dir.number()?;
        if d >= lib.width {
            return Err(dir.error(format!("direction {d} is not below the width {}", lib.width)));
        }
        if next[i][d] != usize::MAX {
            return Err(dir.error(format!("second route from {} in direction {d}", from.text)));
        }
        next[i][d] = lookup(&instances, to, "instance")?;
    }
    for (i, row) in next.iter().enumerate() {
        if let Some(d) = row.iter().position(|&t| t == usize::MAX) {
            return Err(header[0].error(format!("instance {} has no route in direction {d}", instances[i])));
        }
    }
    let c = Composer {
        start: lookup(&instances, &start, "instance")?,
        instances,
        component,
        next,
    };
    Ok(c)
}

pub fn render_composer(c: &Composer, lib: &Library) -> String {
    let mut s = String::new();
    writeln!(s, "composer start={}", c.instances[c.start]).unwrap();
    for (i, name) in c.instances.iter().enumerate() {
        writeln!(s, "instance {name} component={}", lib.components[c.component[i]].name).unwrap();
    }
    for (i, row) in c.next.iter().enumerate() {
        for (d, &t) in row.iter().enumerate() {
            writeln!(s, "route {} dir={d} -> {}", c.instances[i], c.instances[t]).unwrap();
        }
    }
    s
}

/// Parses a choice function for `c`: one line per instance.
///
/// ```text
/// choice i0 exits=0,1 prio=2
/// choice i1 exits=- prio=4
/// ```
pub fn parse_choices(text: &str, c: &Composer) -> Result<Vec<Label>> {
    let mut g: Vec<Option<Label>> = vec![None; c.len()];
    let lines = scan(text);
    for line in &lines {
        let kw = line[0];
        if kw.text != "choice" {
            return Err(kw.error(format!("unknown keyword '{}'", kw.text)));
        }
        arity(line, 4, "choice <instance> exits=<n,...> prio=<n>")?;
        let i = lookup(&c.instances, &line[1], "instance")?;
        if g[i].is_some() {
            return Err(line[1].error(format!("second choice for {}", line[1].text)));
        }
        let f = fields(&line[2..], &["exits", "prio"])?;
        let ex = required(&f, "exits", &kw)?;
        let mut exits = ExitSet::EMPTY;
        for d in ex.list() {
            let tok = Token { text: &d, ..ex };
            let d = tok.number()?;
            if d >= 64 {
                return Err(ex.error("direction out of range"));
            }
            exits.insert(d);
        }
        let priority = required(&f, "prio", &kw)?.number()? as u32;
        g[i] = Some(Label { exits, priority });
    }
    g.into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| Error::Parse {
                line: lines.last().map_or(1, |l| l[0].line),
                column: 1,
                message: format!("no choice for instance {}", c.instances[i]),
            })
        })
        .collect()
}

pub fn render_choices(c: &Composer, g: &[Label]) -> String {
    let mut s = String::new();
    for (i, l) in g.iter().enumerate() {
        let exits: Vec<String> = l.exits.iter().map(|d| d.to_string()).collect();
        writeln!(
            s,
            "choice {} exits={} prio={}",
            c.instances[i],
            join(&exits),
            l.priority
        )
        .unwrap();
    }
    s
}
