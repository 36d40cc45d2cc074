//! Edge lists, DOT and CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::discrete::DiscreteCbn;
use crate::error::{Error, Result};
use crate::graph::Dag;

/// `n <count>` then one `i j` pair per line. Blank lines and `#` comments
/// are ignored.
pub fn parse_edge_list(text: &str) -> Result<Dag> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let syntax = |line, message: String| Error::Syntax {
        line,
        column: 1,
        message,
    };
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "missing `n <count>` header".into()))?;
    let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["n", count] => count
            .parse::<usize>()
            .map_err(|_| syntax(hl, format!("bad vertex count {count:?}")))?,
        _ => return Err(syntax(hl, format!("expected `n <count>`, found {header:?}"))),
    };
    let mut edges = Vec::new();
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = parts[..] else {
            return Err(syntax(ln, format!("expected `i j`, found {line:?}")));
        };
        let parse = |s: &str| s.parse::<usize>().map_err(|_| syntax(ln, format!("bad vertex {s:?}")));
        edges.push((parse(a)?, parse(b)?));
    }
    Dag::new(n, edges)
}

pub fn write_edge_list(g: &Dag) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with edges in lexicographic order. Nodes are labelled with
/// `names` when given, else with their ids.
pub fn export_dot(g: &Dag, names: Option<&[String]>) -> Result<String> {
    if let Some(names) = names {
        if names.len() != g.n() {
            return Err(Error::invalid(format!("{} names for {} nodes", names.len(), g.n())));
        }
    }
    let label = |v: usize| match names {
        Some(names) => dot_id(&names[v]),
        None => v.to_string(),
    };
    let mut out = String::from("digraph G {\n");
    for v in 0..g.n() {
        let _ = writeln!(out, "  {};", label(v));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  {} -> {};", label(u), label(v));
    }
    out.push_str("}\n");
    Ok(out)
}

/// One point of a phase-transition curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub c: f64,
    pub m: u64,
    pub trials: usize,
    pub successes: usize,
}

impl CurveRow {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

pub fn write_curve_csv(rows: &[CurveRow]) -> Result<String> {
    let mut out = String::from("n,C,m,trials,successes,frequency\n");
    for r in rows {
        if r.trials == 0 {
            return Err(Error::Validation(format!("curve row n={} C={} has zero trials", r.n, r.c)));
        }
        if r.successes > r.trials {
            return Err(Error::Validation(format!(
                "curve row n={} C={} has more successes than trials",
                r.n, r.c
            )));
        }
        let _ = writeln!(out, "{},{},{},{},{},{}", r.n, r.c, r.m, r.trials, r.successes, r.frequency());
    }
    Ok(out)
}

/// Long-format CPT dump: `node,parent_config,value,probability`.
pub fn cpt_csv(cbn: &DiscreteCbn) -> String {
    let mut out = String::from("node,parent_config,value,probability\n");
    for v in 0..cbn.n() {
        for (config, row) in cbn.cpt(v).rows().enumerate() {
            for (x, p) in row.iter().enumerate() {
                let _ = writeln!(out, "{v},{config},{x},{p}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = Dag::new(4, [(2, 0), (0, 1), (2, 3)]).unwrap();
        let text = write_edge_list(&g);
        assert_eq!(text, "n 4\n0 1\n2 0\n2 3\n");
        assert_eq!(parse_edge_list(&text).unwrap(), g);
        assert_eq!(parse_edge_list("# g\nn 2\n\n0 1 # edge\n").unwrap().edges(), vec![(0, 1)]);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(parse_edge_list(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_edge_list("4\n"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_edge_list("n 3\n0 1\n1\n"), Err(Error::Syntax { line: 3, .. })));
        assert!(matches!(parse_edge_list("n 2\n0 1\n1 0\n"), Err(Error::Cycle(_))));
    }

    #[test]
    fn dot_output() {
        let chain = Dag::new(3, [(1, 2), (0, 1)]).unwrap();
        let dot = export_dot(&chain, None).unwrap();
        let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges, vec!["  0 -> 1;", "  1 -> 2;"]);
        let empty = export_dot(&Dag::empty(2), None).unwrap();
        assert_eq!(empty, "digraph G {\n  0;\n  1;\n}\n");
        let names = vec!["a \"q\"".to_string(), "b".into(), "c".into()];
        assert!(export_dot(&chain, Some(&names)).unwrap().contains("\"a \\\"q\\\"\" -> \"b\";"));
    }

    #[test]
    fn curve_csv() {
        let row = CurveRow {
            n: 20,
            c: 16.0,
            m: 100,
            trials: 40,
            successes: 40,
        };
        assert_eq!(write_curve_csv(&[row]).unwrap(), "n,C,m,trials,successes,frequency\n20,16,100,40,40,1\n");
        let third = CurveRow { successes: 1, trials: 3, ..row };
        assert!(write_curve_csv(&[third]).unwrap().ends_with(&format!(",{}\n", 1.0 / 3.0)));
        assert!(write_curve_csv(&[CurveRow { trials: 0, successes: 0, ..row }]).is_err());
    }
}
