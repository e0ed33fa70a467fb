//! Text formats: graph edge lists and amplitude listings.
//!
//! Edge list, one statement per line, `#` starts a comment:
//!
//! ```text
//! fiberloom/1 graph
//! 0 1
//! 1 2
//! vertex 7
//! group 2 3
//! frame 1 Z
//! ```
//!
//! Amplitudes, global phase fixed so the first nonzero entry is real-positive:
//!
//! ```text
//! fiberloom/1 amplitudes
//! qubits 0 1
//! 00 0.500000000000 0.000000000000
//! ```
//!
//! Photonic listings use occupation labels such as `|r0b0-:1,r1b1-:1>` and
//! omit the `qubits` line.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::PhotonicState;
use crate::graphstate::{GraphState, VertexId};
use crate::logical::{LogicalState, Pauli};
use crate::FORMAT_HEADER;

/// Largest vertex id accepted by the edge-list parser.
pub const MAX_VERTEX_ID: VertexId = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

fn strip_comment(l: &str) -> &str {
    l.split('#').next().unwrap_or("").trim()
}

fn vertex(tok: &str, line: usize) -> Result<VertexId, FormatError> {
    let v: VertexId = tok.parse().map_err(|_| err(line, format!("`{tok}` is not a vertex id")))?;
    if v > MAX_VERTEX_ID {
        return Err(err(line, format!("vertex id {v} exceeds {MAX_VERTEX_ID}")));
    }
    Ok(v)
}

/// Parses an edge list. The header line is optional.
pub fn parse_edge_list(text: &str) -> Result<GraphState, FormatError> {
    parse_edge_list_at(text, 0)
}

/// Parses an edge list whose first line is line `offset + 1` of a larger file.
pub fn parse_edge_list_at(text: &str, offset: usize) -> Result<GraphState, FormatError> {
    let mut g = GraphState::new([]);
    let mut frames = Vec::new();
    let mut groups = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = offset + i + 1;
        let l = strip_comment(raw);
        if l.is_empty() || (i == 0 && l.starts_with(FORMAT_HEADER)) {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        let ensure = |g: &GraphState, v: VertexId| {
            if g.vertices().contains(&v) {
                g.clone()
            } else {
                g.add_vertex(v).expect("absent vertex")
            }
        };
        match toks[0] {
            "vertex" => {
                if toks.len() < 2 {
                    return Err(err(line, "`vertex` needs at least one id"));
                }
                for t in &toks[1..] {
                    g = ensure(&g, vertex(t, line)?);
                }
            }
            "group" => {
                if toks.len() < 3 {
                    return Err(err(line, "`group` needs at least two ids"));
                }
                let members = toks[1..].iter().map(|t| vertex(t, line)).collect::<Result<Vec<_>, _>>()?;
                groups.push((line, members));
            }
            "frame" => {
                let [_, v, p] = toks[..] else {
                    return Err(err(line, "expected `frame <vertex> <I|X|Y|Z>`"));
                };
                let v = vertex(v, line)?;
                let mut cs = p.chars();
                let pauli = match (cs.next().and_then(Pauli::from_symbol), cs.next()) {
                    (Some(p), None) => p,
                    _ => return Err(err(line, format!("`{p}` is not a Pauli (I, X, Y, Z)"))),
                };
                frames.push((line, v, pauli));
            }
            _ => {
                let [a, b] = toks[..] else {
                    return Err(err(line, "expected `<vertex> <vertex>`"));
                };
                let (a, b) = (vertex(a, line)?, vertex(b, line)?);
                if a == b {
                    return Err(err(line, format!("self-loop on vertex {a}")));
                }
                g = ensure(&ensure(&g, a), b);
                if g.has_edge(a, b) {
                    return Err(err(line, format!("duplicate edge {a} {b}")));
                }
                g = g.apply_cz(a, b).map_err(|e| err(line, e.to_string()))?;
            }
        }
    }
    for (line, members) in groups {
        g = g.with_group(members).map_err(|e| err(line, e.to_string()))?;
    }
    for (line, v, p) in frames {
        g = g.with_pauli(v, p).map_err(|e| err(line, e.to_string()))?;
    }
    Ok(g)
}

/// Writes an edge list. Local operators from measurement rules have no text
/// form; graphs carrying them are rejected.
pub fn write_edge_list(g: &GraphState) -> Result<String, FormatError> {
    if g.has_local_ops() {
        return Err(err(0, "graph carries non-Pauli local operators"));
    }
    let mut s = format!("{FORMAT_HEADER} graph\n");
    let isolated: Vec<String> = g.vertices().iter().filter(|&&v| g.degree(v) == 0).map(|v| v.to_string()).collect();
    if !isolated.is_empty() {
        let _ = writeln!(s, "vertex {}", isolated.join(" "));
    }
    for (a, b) in g.edges() {
        let _ = writeln!(s, "{a} {b}");
    }
    for grp in g.groups() {
        let m: Vec<String> = grp.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "group {}", m.join(" "));
    }
    for (v, p) in g.frame() {
        let _ = writeln!(s, "frame {v} {}", p.symbol());
    }
    Ok(s)
}

fn num(x: f64) -> String {
    // avoid "-0.000000000000"
    let r = format!("{x:.12}");
    if r.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        r.trim_start_matches('-').to_string()
    } else {
        r
    }
}

fn phase_fix(amps: &[Complex64]) -> Vec<Complex64> {
    match amps.iter().find(|a| a.norm() > 1e-12) {
        Some(z) => {
            let f = z.conj() / z.norm();
            amps.iter().map(|a| a * f).collect()
        }
        None => amps.to_vec(),
    }
}

/// One line per basis state of a logical register.
pub fn write_logical_amplitudes(s: &LogicalState) -> String {
    let mut out = format!("{FORMAT_HEADER} amplitudes\n");
    let q: Vec<String> = s.qubits().iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "qubits {}", q.join(" "));
    for (i, a) in phase_fix(s.amplitudes()).iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", s.label(i), num(a.re), num(a.im));
    }
    out
}

/// One line per occupation-basis term, in canonical occupation order.
pub fn write_fock_amplitudes(s: &PhotonicState) -> String {
    let mut out = format!("{FORMAT_HEADER} amplitudes\n");
    let (occs, amps): (Vec<_>, Vec<_>) = s.terms().map(|(o, a)| (o.to_string(), *a)).unzip();
    for (o, a) in occs.iter().zip(phase_fix(&amps)) {
        let _ = writeln!(out, "{o} {} {}", num(a.re), num(a.im));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTable {
    pub qubits: Option<Vec<VertexId>>,
    pub entries: Vec<(String, Complex64)>,
}

impl AmplitudeTable {
    /// Rebuilds a logical register; labels must be complete bit strings.
    pub fn to_logical(&self) -> Result<LogicalState, FormatError> {
        let qubits = self.qubits.clone().ok_or_else(|| err(0, "no `qubits` line"))?;
        let n = qubits.len();
        if n > 20 {
            return Err(err(0, "too many qubits"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (label, a) in &self.entries {
            if label.len() != n || !label.chars().all(|c| c == '0' || c == '1') {
                return Err(err(0, format!("label `{label}` is not a {n}-bit string")));
            }
            amps[usize::from_str_radix(label, 2).expect("bit string")] = *a;
        }
        LogicalState::new(qubits, amps).map_err(|e| err(0, e.to_string()))
    }
}

pub fn parse_amplitudes(text: &str) -> Result<AmplitudeTable, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == format!("{FORMAT_HEADER} amplitudes") => {}
        _ => return Err(err(1, format!("expected header `{FORMAT_HEADER} amplitudes`"))),
    }
    let mut table = AmplitudeTable {
        qubits: None,
        entries: Vec::new(),
    };
    for (i, raw) in lines {
        let line = i + 1;
        let l = strip_comment(raw);
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks[0] == "qubits" {
            if table.qubits.is_some() || !table.entries.is_empty() {
                return Err(err(line, "`qubits` must come once, before the amplitudes"));
            }
            table.qubits = Some(toks[1..].iter().map(|t| vertex(t, line)).collect::<Result<_, _>>()?);
            continue;
        }
        let [label, re, im] = toks[..] else {
            return Err(err(line, "expected `<label> <re> <im>`"));
        };
        let parse = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(line, format!("`{t}` is not a finite number")))
        };
        table.entries.push((label.to_string(), Complex64::new(parse(re)?, parse(im)?)));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_roundtrip() {
        let g = GraphState::chain(&[0, 1, 2])
            .add_vertex(9)
            .unwrap()
            .add_vertex(3)
            .unwrap()
            .with_group([2, 3])
            .unwrap()
            .with_pauli(1, Pauli::Z)
            .unwrap();
        let text = write_edge_list(&g).unwrap();
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        assert_eq!(parse_edge_list("0 1\n1 1\n").unwrap_err().line, 2);
        assert_eq!(parse_edge_list("0 1\n\n0 x\n").unwrap_err().line, 3);
        assert_eq!(parse_edge_list("0 1\n1 0\n").unwrap_err().line, 2);
        assert_eq!(parse_edge_list("frame 0 Q\n").unwrap_err().line, 1);
        assert_eq!(parse_edge_list("frame 4 Z\n").unwrap_err().line, 1);
        assert_eq!(parse_edge_list("0 1 2\n").unwrap_err().line, 1);
    }

    #[test]
    fn seed_amplitudes_roundtrip() {
        let s = GraphState::chain(&[0, 1]).to_statevector().unwrap();
        let text = write_logical_amplitudes(&s);
        assert!(text.contains("11 -0.500000000000 0.000000000000"));
        let back = parse_amplitudes(&text).unwrap().to_logical().unwrap();
        assert!(back.fidelity(&s).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn amplitude_errors() {
        assert_eq!(parse_amplitudes("nope\n").unwrap_err().line, 1);
        assert_eq!(parse_amplitudes("fiberloom/1 amplitudes\n00 1 nan\n").unwrap_err().line, 2);
    }

    #[test]
    fn negative_zero_is_written_plain() {
        assert_eq!(num(-0.0), "0.000000000000");
        assert_eq!(num(-1e-15), "0.000000000000");
    }
}
