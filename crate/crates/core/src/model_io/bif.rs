//! BIF 0.3, discrete subset.

use std::collections::HashMap;
use std::fmt::Write as _;

use log::debug;

use super::{NamedNetwork, NetworkPayload};
use crate::discrete::{Cpt, DiscreteCbn};
use crate::error::{Error, Result};
use crate::graph::Dag;

/// Rows summing further than this from 1 are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<(Vec<Token>, (usize, usize))> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    let advance = |c: char, line: &mut usize, column: &mut usize| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, column);
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut line, &mut column);
        } else if c == '/' && starts_comment(&chars) {
            chars.next();
            advance(c, &mut line, &mut column);
            match chars.peek() {
                Some('/') => {
                    while let Some(&d) = chars.peek() {
                        if d == '\n' {
                            break;
                        }
                        chars.next();
                        advance(d, &mut line, &mut column);
                    }
                }
                Some('*') => {
                    chars.next();
                    advance('*', &mut line, &mut column);
                    let mut prev = ' ';
                    let mut closed = false;
                    for d in chars.by_ref() {
                        advance(d, &mut line, &mut column);
                        if prev == '*' && d == '/' {
                            closed = true;
                            break;
                        }
                        prev = d;
                    }
                    if !closed {
                        return Err(syntax(l0, c0, "unterminated comment"));
                    }
                }
                _ => unreachable!(),
            }
        } else if "{}()[],;|".contains(c) {
            chars.next();
            advance(c, &mut line, &mut column);
            out.push(Token {
                tok: Tok::Punct(c),
                line: l0,
                column: c0,
            });
        } else if c == '"' {
            chars.next();
            advance(c, &mut line, &mut column);
            let mut word = String::new();
            let mut closed = false;
            for d in chars.by_ref() {
                advance(d, &mut line, &mut column);
                if d == '"' {
                    closed = true;
                    break;
                }
                word.push(d);
            }
            if !closed {
                return Err(syntax(l0, c0, "unterminated string"));
            }
            out.push(Token {
                tok: Tok::Word(word),
                line: l0,
                column: c0,
            });
        } else {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_whitespace() || "{}()[],;|\"".contains(d) || (d == '/' && starts_comment(&chars)) {
                    break;
                }
                word.push(d);
                chars.next();
                advance(d, &mut line, &mut column);
            }
            out.push(Token {
                tok: Tok::Word(word),
                line: l0,
                column: c0,
            });
        }
    }
    Ok((out, (line, column)))
}

/// A `/` opens a comment only before `/` or `*`; elsewhere it is part of a
/// name, as in state `Asy/Patch`.
fn starts_comment(chars: &std::iter::Peekable<std::str::Chars<'_>>) -> bool {
    let mut ahead = chars.clone();
    ahead.next();
    matches!(ahead.peek(), Some('/' | '*'))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.column))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        let message = message.into();
        if self.peek().is_none() {
            syntax(l, c, format!("{message}, found end of input"))
        } else {
            syntax(l, c, message)
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn word(&mut self) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Word(w),
                line,
                column,
            }) => {
                let out = (w.clone(), *line, *column);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), .. }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn punct(&mut self, p: char) -> Result<()> {
        match self.peek() {
            Some(Token { tok: Tok::Punct(q), .. }) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{p}`"))),
        }
    }

    fn is_punct(&self, p: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w == kw)
    }

    fn number(&mut self) -> Result<f64> {
        let (w, l, c) = self.word()?;
        w.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| syntax(l, c, format!("expected a number, found {w:?}")))
    }

    /// `a, b, c` up to (not including) `end`.
    fn word_list(&mut self, end: char) -> Result<Vec<String>> {
        let mut out = vec![self.word()?.0];
        while self.is_punct(',') {
            self.pos += 1;
            out.push(self.word()?.0);
        }
        if !self.is_punct(end) {
            return Err(self.err(format!("expected `,` or `{end}`")));
        }
        Ok(out)
    }

    fn number_list(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![self.number()?];
        while self.is_punct(',') {
            self.pos += 1;
            out.push(self.number()?);
        }
        self.punct(';')?;
        Ok(out)
    }

    /// `property ... ;`
    fn skip_property(&mut self) -> Result<()> {
        self.keyword("property")?;
        loop {
            match self.next() {
                Some(Token { tok: Tok::Punct(';'), .. }) => return Ok(()),
                Some(_) => {}
                None => return Err(self.err("unterminated property")),
            }
        }
    }
}

struct Variable {
    name: String,
    states: Vec<String>,
}

enum Entry {
    Table(Vec<f64>),
    Row(Vec<String>, Vec<f64>, (usize, usize)),
    Default(Vec<f64>),
}

struct Probability {
    child: String,
    parents: Vec<String>,
    entries: Vec<Entry>,
    at: (usize, usize),
}

pub fn parse_bif(text: &str) -> Result<NamedNetwork> {
    let (tokens, eof) = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, eof };

    p.keyword("network")?;
    let name = if p.is_punct('{') { String::from("unknown") } else { p.word()?.0 };
    p.punct('{')?;
    while p.is_word("property") {
        p.skip_property()?;
    }
    p.punct('}')?;

    let mut variables: Vec<Variable> = Vec::new();
    let mut probabilities: Vec<Probability> = Vec::new();
    while let Some(t) = p.peek() {
        let at = (t.line, t.column);
        if p.is_word("variable") {
            p.pos += 1;
            let (name, _, _) = p.word()?;
            p.punct('{')?;
            let mut states = None;
            loop {
                if p.is_word("property") {
                    p.skip_property()?;
                } else if p.is_word("type") {
                    p.pos += 1;
                    let (kind, l, c) = p.word()?;
                    if kind != "discrete" {
                        return Err(Error::Unsupported(format!(
                            "variable {name:?} has type {kind:?} at line {l}, column {c}; only discrete variables are supported"
                        )));
                    }
                    p.punct('[')?;
                    let (count, l, c) = p.word()?;
                    let count: usize = count
                        .parse()
                        .map_err(|_| syntax(l, c, format!("expected a state count, found {count:?}")))?;
                    p.punct(']')?;
                    p.punct('{')?;
                    let names = p.word_list('}')?;
                    p.punct('}')?;
                    p.punct(';')?;
                    if names.len() != count {
                        return Err(syntax(
                            l,
                            c,
                            format!("variable {name:?} declares {count} states but lists {}", names.len()),
                        ));
                    }
                    states = Some(names);
                } else if p.is_punct('}') {
                    p.pos += 1;
                    break;
                } else {
                    return Err(p.err("expected `type`, `property` or `}`"));
                }
            }
            let states = states.ok_or_else(|| syntax(at.0, at.1, format!("variable {name:?} has no type")))?;
            variables.push(Variable { name, states });
        } else if p.is_word("probability") {
            p.pos += 1;
            p.punct('(')?;
            let child = p.word()?.0;
            let mut parents = Vec::new();
            if p.is_punct('|') {
                p.pos += 1;
                parents = p.word_list(')')?;
            }
            p.punct(')')?;
            p.punct('{')?;
            let mut entries = Vec::new();
            loop {
                if p.is_punct('}') {
                    p.pos += 1;
                    break;
                } else if p.is_word("table") {
                    p.pos += 1;
                    entries.push(Entry::Table(p.number_list()?));
                } else if p.is_word("default") {
                    p.pos += 1;
                    entries.push(Entry::Default(p.number_list()?));
                } else if p.is_word("property") {
                    p.skip_property()?;
                } else if p.is_punct('(') {
                    let here = p.here();
                    p.pos += 1;
                    let values = p.word_list(')')?;
                    p.punct(')')?;
                    entries.push(Entry::Row(values, p.number_list()?, here));
                } else {
                    return Err(p.err("expected `table`, `default`, a parent row or `}`"));
                }
            }
            probabilities.push(Probability {
                child,
                parents,
                entries,
                at,
            });
        } else {
            return Err(p.err("expected `variable` or `probability`"));
        }
    }
    build(name, variables, probabilities)
}

fn malformed(at: (usize, usize), msg: impl std::fmt::Display) -> Error {
    Error::MalformedModel(format!("line {}, column {}: {msg}", at.0, at.1))
}

fn normalize(row: &mut [f64], what: &str, at: (usize, usize)) -> Result<()> {
    if let Some(x) = row.iter().find(|x| **x < 0.0) {
        return Err(malformed(at, format!("{what} has negative entry {x}")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(malformed(at, format!("{what} sums to {sum}")));
    }
    if sum != 1.0 {
        debug!("renormalizing {what}: sum was {sum}");
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    Ok(())
}

fn build(name: String, variables: Vec<Variable>, probabilities: Vec<Probability>) -> Result<NamedNetwork> {
    let n = variables.len();
    let index: HashMap<&str, usize> = variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    if index.len() != n {
        return Err(Error::MalformedModel("duplicate variable names".into()));
    }
    let lookup = |name: &str, at| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| malformed(at, format!("unknown variable {name:?}")))
    };

    let mut by_child: Vec<Option<&Probability>> = vec![None; n];
    let mut edges = Vec::new();
    for prob in &probabilities {
        let c = lookup(&prob.child, prob.at)?;
        if by_child[c].replace(prob).is_some() {
            return Err(malformed(prob.at, format!("second probability block for {:?}", prob.child)));
        }
        for parent in &prob.parents {
            edges.push((lookup(parent, prob.at)?, c));
        }
    }
    if let Some(v) = by_child.iter().position(Option::is_none) {
        return Err(Error::MalformedModel(format!(
            "variable {:?} has no probability block",
            variables[v].name
        )));
    }
    let dag = Dag::new(n, edges).map_err(|e| Error::MalformedModel(format!("invalid structure: {e}")))?;
    let sizes: Vec<usize> = variables.iter().map(|v| v.states.len()).collect();

    let mut cpts = Vec::with_capacity(n);
    for (c, prob) in by_child.iter().map(|p| p.expect("checked above")).enumerate() {
        let d = sizes[c];
        // Parents as declared in the block, and the sorted order used internally.
        let declared: Vec<usize> = prob.parents.iter().map(|p| index[p.as_str()]).collect();
        let sorted = dag.parents(c);
        let mut stride = vec![0usize; n];
        let mut s = 1;
        for &q in sorted {
            stride[q] = s;
            s *= sizes[q];
        }
        let rows = s;
        let mut table: Vec<Option<Vec<f64>>> = vec![None; rows];
        let mut default = None;
        for entry in &prob.entries {
            match entry {
                Entry::Table(values) => {
                    if values.len() != rows * d {
                        return Err(malformed(
                            prob.at,
                            format!("table for {:?} has {} entries, expected {}", prob.child, values.len(), rows * d),
                        ));
                    }
                    // Child value slowest; parent configurations with the
                    // last declared parent fastest.
                    let per_value = rows;
                    for k in 0..per_value {
                        let mut rem = k;
                        let mut config = 0;
                        for &q in declared.iter().rev() {
                            config += (rem % sizes[q]) * stride[q];
                            rem /= sizes[q];
                        }
                        let row = (0..d).map(|x| values[x * per_value + k]).collect();
                        table[config] = Some(row);
                    }
                }
                Entry::Row(labels, values, at) => {
                    if labels.len() != declared.len() {
                        return Err(malformed(*at, format!("row has {} parent values", labels.len())));
                    }
                    if values.len() != d {
                        return Err(malformed(*at, format!("row has {} probabilities, expected {d}", values.len())));
                    }
                    let mut config = 0;
                    for (label, &q) in labels.iter().zip(&declared) {
                        let x = variables[q]
                            .states
                            .iter()
                            .position(|s| s == label)
                            .ok_or_else(|| malformed(*at, format!("{label:?} is not a state of {:?}", variables[q].name)))?;
                        config += x * stride[q];
                    }
                    table[config] = Some(values.clone());
                }
                Entry::Default(values) => {
                    if values.len() != d {
                        return Err(malformed(prob.at, format!("default row has {} probabilities", values.len())));
                    }
                    default = Some(values.clone());
                }
            }
        }
        let mut flat = Vec::with_capacity(rows * d);
        for (config, row) in table.into_iter().enumerate() {
            let mut row = row.or_else(|| default.clone()).ok_or_else(|| {
                malformed(prob.at, format!("{:?} is missing parent configuration {config}", prob.child))
            })?;
            normalize(&mut row, &format!("row {config} of {:?}", prob.child), prob.at)?;
            flat.extend(row);
        }
        cpts.push(Cpt::new(d, flat)?);
    }

    let cbn = DiscreteCbn::new(dag, sizes, cpts)?;
    let net = NamedNetwork {
        name,
        node_names: variables.iter().map(|v| v.name.clone()).collect(),
        state_names: Some(variables.into_iter().map(|v| v.states).collect()),
        payload: NetworkPayload::Discrete(cbn),
    };
    net.validate_labels()?;
    Ok(net)
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty() || s.chars().any(|c| c.is_whitespace() || "{}()[],;|\"/".contains(c))
}

fn label(s: &str) -> String {
    if needs_quotes(s) {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}

/// Writes a discrete network in row form, parents in node order.
pub fn write_bif(net: &NamedNetwork) -> Result<String> {
    let cbn = net
        .discrete()
        .ok_or_else(|| Error::Unsupported("BIF output needs a discrete network".into()))?;
    net.validate_labels()?;
    let states: Vec<Vec<String>> = match &net.state_names {
        Some(s) => s.clone(),
        None => cbn
            .domain_sizes()
            .iter()
            .map(|&d| (0..d).map(|x| format!("s{x}")).collect())
            .collect(),
    };
    let mut out = String::new();
    let _ = writeln!(out, "network {} {{\n}}", label(&net.name));
    for (v, name) in net.node_names.iter().enumerate() {
        let list: Vec<String> = states[v].iter().map(|s| label(s)).collect();
        let _ = writeln!(
            out,
            "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}",
            label(name),
            states[v].len(),
            list.join(", ")
        );
    }
    for v in 0..cbn.n() {
        let parents = cbn.dag().parents(v);
        let fmt_row = |row: &[f64]| row.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(", ");
        if parents.is_empty() {
            let _ = writeln!(
                out,
                "probability ( {} ) {{\n  table {};\n}}",
                label(&net.node_names[v]),
                fmt_row(cbn.cpt(v).row(0))
            );
            continue;
        }
        let plist: Vec<String> = parents.iter().map(|&q| label(&net.node_names[q])).collect();
        let _ = writeln!(
            out,
            "probability ( {} | {} ) {{",
            label(&net.node_names[v]),
            plist.join(", ")
        );
        for config in 0..cbn.cpt(v).row_count() {
            let mut rem = config;
            let mut vals = Vec::new();
            for &q in parents {
                vals.push(label(&states[q][rem % states[q].len()]));
                rem /= states[q].len();
            }
            let _ = writeln!(out, "  ({}) {};", vals.join(", "), fmt_row(cbn.cpt(v).row(config)));
        }
        out.push_str("}\n");
    }
    Ok(out)
}
