//! Line-based text format for factorizations.
//!
//! ```text
//! # comment
//! surface g=2 b=1
//! hyperelliptic
//! basepoints 1
//! curve C hom=[0,0,0,0] sep=true splitgenus=1 word="a1 b1 ~a1 ~b1"
//! disjoint C x1
//! commutes C : x1 x2
//! word: x1 ~C conj(x1^-2 C){ x2 x3^2 }
//! target: d1
//! ```
//!
//! Blocks `conj(φ){ … }` nest; the inner twists are conjugated by the
//! composite. `word:` may be repeated and the pieces are concatenated.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::factorizations::{ConjugationWord, CurveModel, Factorization, Target, Twist};
use crate::surfaces::{Curve, FreeWord, HomologyClass, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Every diagnostic of a rejected input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostics(pub Vec<Diagnostic>);

impl fmt::Display for ParseDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseDiagnostics {}

struct Parser {
    diags: Vec<Diagnostic>,
    line: usize,
}

impl Parser {
    fn err(&mut self, column: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            line: self.line,
            column,
            message: message.into(),
            severity: Severity::Error,
        });
    }
}

/// Whitespace-separated tokens with their 1-based columns; quoted strings
/// and bracketed lists stay in one token.
fn tokens(text: &str, offset: usize) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut quote = false;
    let mut depth = 0usize;
    for (k, ch) in text.chars().enumerate() {
        if ch.is_whitespace() && !quote && depth == 0 {
            if !cur.is_empty() {
                out.push((start, std::mem::take(&mut cur)));
            }
            continue;
        }
        if cur.is_empty() {
            start = offset + k + 1;
        }
        match ch {
            '"' => quote = !quote,
            '[' if !quote => depth += 1,
            ']' if !quote => depth = depth.saturating_sub(1),
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        out.push((start, cur));
    }
    out
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_alphanumeric() || "'_@!.".contains(c))
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

/// `name`, `~name`, `name^k`, `~name^k`.
fn parse_power(tok: &str) -> std::result::Result<(String, i64), String> {
    let (neg, rest) = match tok.strip_prefix('~') {
        Some(r) => (true, r),
        None => (false, tok),
    };
    let (name, exp) = match rest.split_once('^') {
        Some((n, e)) => (n, e.parse::<i64>().map_err(|_| format!("malformed exponent `{e}`"))?),
        None => (rest, 1),
    };
    if !is_name(name) {
        return Err(format!("malformed twist `{tok}`"));
    }
    if exp == 0 {
        return Err(format!("zero exponent in `{tok}`"));
    }
    Ok((name.to_string(), if neg { -exp } else { exp }))
}

pub fn parse(src: &str) -> std::result::Result<Factorization, ParseDiagnostics> {
    let mut p = Parser { diags: Vec::new(), line: 0 };
    let mut model: Option<CurveModel> = None;
    let mut base_points = None;
    let mut target: Option<Target> = None;
    let mut twists: Vec<Twist> = Vec::new();
    let mut conjugations: Vec<ConjugationWord> = Vec::new();
    let mut pending_facts: Vec<(usize, usize, String, Vec<String>)> = Vec::new();
    let mut pending_disjoint: Vec<(usize, usize, String, String)> = Vec::new();
    let mut word_lines: Vec<(usize, usize, String)> = Vec::new();

    for (i, raw) in src.lines().enumerate() {
        p.line = i + 1;
        let text = match raw.find('#') {
            Some(k) if !raw[..k].contains('"') || raw[..k].matches('"').count() % 2 == 0 => &raw[..k],
            _ => raw,
        };
        if text.trim().is_empty() {
            continue;
        }
        if let Some(k) = text.find("word:") {
            if text[..k].trim().is_empty() {
                word_lines.push((p.line, k + 6, text[k + 5..].to_string()));
                continue;
            }
        }
        if let Some(k) = text.find("target:") {
            if text[..k].trim().is_empty() {
                let toks = tokens(&text[k + 7..], k + 7);
                target = parse_target(&mut p, &toks, model.as_ref());
                continue;
            }
        }
        let toks = tokens(text, 0);
        let (col, kw) = toks[0].clone();
        let args = &toks[1..];
        match kw.as_str() {
            "surface" => {
                if model.is_some() {
                    p.err(col, "surface declared twice");
                    continue;
                }
                let mut g = None;
                let mut b = None;
                for (c, a) in args {
                    match a.split_once('=') {
                        Some(("g", v)) => g = v.parse::<usize>().ok(),
                        Some(("b", v)) => b = v.parse::<usize>().ok(),
                        _ => p.err(*c, format!("unexpected `{a}` in surface line")),
                    }
                }
                match (g, b) {
                    (Some(g), Some(b)) => model = Some(CurveModel::new(Surface::new(g, b))),
                    _ => p.err(col, "surface needs g=<int> b=<int>"),
                }
            }
            "hyperelliptic" => match model.as_mut() {
                Some(m) => m.hyperelliptic = true,
                None => p.err(col, "hyperelliptic before surface"),
            },
            "basepoints" => match args.first().and_then(|(_, v)| v.parse::<usize>().ok()) {
                Some(m) if args.len() == 1 => base_points = Some(m),
                _ => p.err(col, "basepoints needs one nonnegative integer"),
            },
            "curve" => match model.as_mut() {
                Some(m) => parse_curve(&mut p, m, col, args),
                None => p.err(col, "curve before surface"),
            },
            "disjoint" => {
                if args.len() != 2 {
                    p.err(col, "disjoint needs two curve names");
                } else {
                    pending_disjoint.push((p.line, args[1].0, args[0].1.clone(), args[1].1.clone()));
                }
            }
            "commutes" => {
                if args.len() < 3 || args[1].1 != ":" {
                    p.err(col, "commutes needs `<curve> : <curve>+`");
                } else {
                    let block = args[2..].iter().map(|(_, s)| s.clone()).collect();
                    pending_facts.push((p.line, args[0].0, args[0].1.clone(), block));
                }
            }
            other => p.err(col, format!("unknown directive `{other}`")),
        }
    }

    let Some(mut model) = model else {
        p.line = 1;
        p.err(1, "missing `surface g=<int> b=<int>` line");
        return Err(ParseDiagnostics(p.diags));
    };
    for (line, col, a, b) in pending_disjoint {
        p.line = line;
        if let Err(e) = model.declare_disjoint(&a, &b) {
            p.err(col, e.to_string());
        }
    }
    for (line, col, c, block) in pending_facts {
        p.line = line;
        let refs: Vec<&str> = block.iter().map(String::as_str).collect();
        if let Err(e) = model.add_fact(&c, &refs) {
            p.err(col, e.to_string());
        }
    }
    for (line, col, text) in word_lines {
        p.line = line;
        parse_word(&mut p, &model, &text, col, &mut twists, &mut conjugations);
    }
    if p.diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(ParseDiagnostics(p.diags));
    }
    let f = Factorization {
        model,
        twists,
        target: target.unwrap_or(Target::Identity),
        conjugations,
        base_points,
    };
    f.checked().map_err(|e| {
        ParseDiagnostics(vec![Diagnostic {
            line: 1,
            column: 1,
            message: e.to_string(),
            severity: Severity::Error,
        }])
    })
}

fn parse_target(p: &mut Parser, toks: &[(usize, String)], model: Option<&CurveModel>) -> Option<Target> {
    if toks.len() == 1 && toks[0].1 == "identity" {
        return Some(Target::Identity);
    }
    if toks.is_empty() {
        p.err(1, "empty target");
        return None;
    }
    let m = model.map(|m| m.surface.boundary_count).unwrap_or(0);
    let mut v = Vec::new();
    for (c, t) in toks {
        match t.strip_prefix('d').and_then(|n| n.parse::<usize>().ok()) {
            Some(i) if i >= 1 && i <= m => v.push(i),
            Some(i) => p.err(*c, format!("boundary d{i} out of range (surface has {m})")),
            None => p.err(*c, format!("target expects `identity` or d<i>, got `{t}`")),
        }
    }
    Some(Target::boundary(v))
}

fn parse_curve(p: &mut Parser, m: &mut CurveModel, col: usize, args: &[(usize, String)]) {
    let Some((ncol, name)) = args.first().cloned() else {
        p.err(col, "curve needs a name");
        return;
    };
    if !is_name(&name) {
        p.err(ncol, format!("malformed curve name `{name}`"));
        return;
    }
    let genus = m.surface.genus;
    let mut hom = None;
    let mut sep = None;
    let mut word = None;
    let mut split = None;
    let mut boundary = None;
    for (c, a) in &args[1..] {
        let Some((k, v)) = a.split_once('=') else {
            p.err(*c, format!("expected key=value, got `{a}`"));
            continue;
        };
        match k {
            "hom" => {
                let inner = v.strip_prefix('[').and_then(|s| s.strip_suffix(']'));
                let parsed: Option<Vec<i64>> = inner.and_then(|s| {
                    if s.trim().is_empty() {
                        return Some(Vec::new());
                    }
                    s.split(',').map(|x| x.trim().parse::<i64>().ok()).collect()
                });
                match parsed {
                    Some(xs) if xs.len() == 2 * genus => hom = Some(HomologyClass::new(xs)),
                    Some(xs) => p.err(*c, format!("hom has {} entries, surface needs {}", xs.len(), 2 * genus)),
                    None => p.err(*c, format!("malformed homology vector `{v}`")),
                }
            }
            "sep" => match v {
                "true" => sep = Some(true),
                "false" => sep = Some(false),
                _ => p.err(*c, format!("sep must be true or false, got `{v}`")),
            },
            "word" => {
                let inner = v.strip_prefix('"').and_then(|s| s.strip_suffix('"'));
                match inner.map(|s| FreeWord::parse(s, &m.surface.generators())) {
                    Some(Ok(w)) => word = Some(w),
                    Some(Err(e)) => p.err(*c, e.to_string()),
                    None => p.err(*c, "word must be quoted"),
                }
            }
            "splitgenus" => match v.parse::<usize>() {
                Ok(h) => split = Some(h),
                Err(_) => p.err(*c, format!("malformed split genus `{v}`")),
            },
            "boundary" => match v.parse::<usize>() {
                Ok(b) => boundary = Some(b),
                Err(_) => p.err(*c, format!("malformed boundary index `{v}`")),
            },
            _ => p.err(*c, format!("unknown curve attribute `{k}`")),
        }
    }
    let (Some(homology), Some(separating)) = (hom, sep) else {
        p.err(col, "curve needs hom=[...] and sep=<bool>");
        return;
    };
    let c = Curve { name, homology, separating, word, boundary_index: boundary, split_genus: split };
    if m.curves.get(&c.name).is_some_and(|old| old.boundary_index.is_some()) {
        m.curves.remove(&c.name);
    }
    if let Err(e) = m.add_curve(c) {
        p.err(ncol, e.to_string());
    }
}

fn parse_conj_word(p: &mut Parser, model: &CurveModel, text: &str, col: usize) -> ConjugationWord {
    let mut factors = Vec::new();
    for (c, t) in tokens(text, col - 1) {
        match parse_power(&t) {
            Ok((name, e)) if model.curves.contains_key(&name) => factors.push((name, e)),
            Ok((name, _)) => p.err(c, format!("unknown curve `{name}`")),
            Err(msg) => p.err(c, msg),
        }
    }
    ConjugationWord { factors }
}

fn parse_word(
    p: &mut Parser,
    model: &CurveModel,
    text: &str,
    col: usize,
    twists: &mut Vec<Twist>,
    conjugations: &mut Vec<ConjugationWord>,
) {
    let chars: Vec<char> = text.chars().collect();
    let at = |k: usize| col + k;
    // open blocks: (column, composite word, its index in `conjugations`)
    let mut stack: Vec<(usize, ConjugationWord, usize)> = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        if ch.is_whitespace() {
            k += 1;
            continue;
        }
        if ch == '}' {
            if stack.pop().is_none() {
                p.err(at(k), "unbalanced `}`");
            }
            k += 1;
            continue;
        }
        let start = k;
        if chars[k..].starts_with(&['c', 'o', 'n', 'j', '(']) {
            let open = k + 5;
            let Some(close) = chars[open..].iter().position(|&c| c == ')').map(|x| open + x) else {
                p.err(at(start), "unbalanced conj block: missing `)`");
                return;
            };
            let inner: String = chars[open..close].iter().collect();
            let phi = parse_conj_word(p, model, &inner, at(open));
            let mut j = close + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '{' {
                p.err(at(close + 1), "expected `{` after conj(...)");
                return;
            }
            let composite = match stack.last() {
                Some((_, outer, _)) => outer.compose(&phi),
                None => phi,
            };
            conjugations.push(composite.clone());
            stack.push((at(start), composite, conjugations.len() - 1));
            k = j + 1;
            continue;
        }
        while k < chars.len() && !chars[k].is_whitespace() && chars[k] != '{' && chars[k] != '}' {
            k += 1;
        }
        let tok: String = chars[start..k].iter().collect();
        if k < chars.len() && chars[k] == '{' {
            p.err(at(k), format!("unexpected `{{` after `{tok}`"));
            k += 1;
            continue;
        }
        match parse_power(&tok) {
            Ok((name, e)) if model.curves.contains_key(&name) => twists.push(Twist {
                curve: name,
                exponent: e,
                conj: stack.last().map(|(_, _, idx)| *idx),
            }),
            Ok((name, _)) => p.err(at(start), format!("unknown curve `{name}`")),
            Err(msg) => p.err(at(start), msg),
        }
    }
    for (c, _, _) in stack {
        p.err(c, "unbalanced conj block: missing `}`");
    }
}

fn fmt_twist(t: &Twist) -> String {
    let mut s = if t.exponent < 0 { format!("~{}", t.curve) } else { t.curve.clone() };
    if t.exponent.abs() != 1 {
        s = format!("{s}^{}", t.exponent.abs());
    }
    s
}

/// Like [`FreeWord::render`] but with runs written as powers, `~b1^3`.
fn render_runs(w: &FreeWord, gens: &[String]) -> String {
    let mut parts = Vec::new();
    let letters = w.letters();
    let mut k = 0;
    while k < letters.len() {
        let l = letters[k];
        let run = letters[k..].iter().take_while(|&&x| x == l).count();
        let sym = &gens[l.unsigned_abs() as usize - 1];
        let mut s = if l < 0 { format!("~{sym}") } else { sym.clone() };
        if run > 1 {
            s = format!("{s}^{run}");
        }
        parts.push(s);
        k += run;
    }
    parts.join(" ")
}

fn is_default_boundary(c: &Curve, genus: usize) -> bool {
    c.boundary_index
        .is_some_and(|i| *c == Curve::boundary(&format!("d{i}"), genus, i))
}

pub fn serialize(f: &Factorization) -> String {
    let m = &f.model;
    let g = m.surface.genus;
    let gens = m.surface.generators();
    let mut out = format!("surface g={g} b={}\n", m.surface.boundary_count);
    if m.hyperelliptic {
        out.push_str("hyperelliptic\n");
    }
    if let Some(bp) = f.base_points {
        out.push_str(&format!("basepoints {bp}\n"));
    }
    for c in m.curves.values() {
        if is_default_boundary(c, g) {
            continue;
        }
        let hom: Vec<String> = c.homology.coeffs.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("curve {} hom=[{}] sep={}", c.name, hom.join(","), c.separating));
        if let Some(h) = c.split_genus {
            out.push_str(&format!(" splitgenus={h}"));
        }
        if let Some(b) = c.boundary_index {
            out.push_str(&format!(" boundary={b}"));
        }
        if let Some(w) = &c.word {
            out.push_str(&format!(" word=\"{}\"", render_runs(w, &gens)));
        }
        out.push('\n');
    }
    for (a, b) in &m.disjoint {
        out.push_str(&format!("disjoint {a} {b}\n"));
    }
    let facts: BTreeSet<_> = m.facts.iter().collect();
    for fact in facts {
        out.push_str(&format!("commutes {} : {}\n", fact.curve, fact.block.join(" ")));
    }
    let mut parts: Vec<String> = Vec::new();
    let mut k = 0;
    while k < f.twists.len() {
        match f.twists[k].conj {
            None => {
                parts.push(fmt_twist(&f.twists[k]));
                k += 1;
            }
            Some(c) => {
                let mut inner = Vec::new();
                while k < f.twists.len() && f.twists[k].conj == Some(c) {
                    inner.push(fmt_twist(&f.twists[k]));
                    k += 1;
                }
                let phi: Vec<String> = f.conjugations[c]
                    .factors
                    .iter()
                    .map(|(n, e)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
                    .collect();
                parts.push(format!("conj({}){{ {} }}", phi.join(" "), inner.join(" ")));
            }
        }
    }
    out.push_str(&format!("word: {}\n", parts.join(" ")));
    match f.target.indices() {
        [] => out.push_str("target: identity\n"),
        v => {
            let ds: Vec<String> = v.iter().map(|i| format!("d{i}")).collect();
            out.push_str(&format!("target: {}\n", ds.join(" ")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = "surface g=1 b=0\n\
        curve a hom=[1,0] sep=false word=\"a1\"\n\
        curve b hom=[0,1] sep=false\n";

    #[test]
    fn trivial_pair() {
        let f = parse(&format!("{TORUS}word: a ~a\ntarget: identity\n")).unwrap();
        assert_eq!(f.len(), 2);
        assert!(crate::symplectic::verify(&f).pass);
    }

    #[test]
    fn unknown_curve_is_located() {
        let err = parse(&format!("{TORUS}word: a Bogus\n")).unwrap_err();
        assert_eq!(err.0.len(), 1);
        let d = &err.0[0];
        assert_eq!((d.line, d.column), (4, 9));
        assert!(d.message.contains("unknown curve"), "{}", d.message);
    }

    #[test]
    fn malformed_exponent() {
        let err = parse(&format!("{TORUS}word: a^x\n")).unwrap_err();
        assert!(err.0[0].message.contains("malformed exponent"));
        assert_eq!(err.0[0].column, 7);
    }

    #[test]
    fn unbalanced_conj() {
        for w in ["conj(a){ b", "b }", "conj(a b"] {
            let err = parse(&format!("{TORUS}word: {w}\n")).unwrap_err();
            assert!(err.0.iter().any(|d| d.message.contains("unbalanced")), "{w}: {err}");
        }
    }

    #[test]
    fn nested_conj_composes() {
        let f = parse(&format!("{TORUS}word: conj(a){{ b conj(b^-1){{ a }} }}\n")).unwrap();
        assert_eq!(f.conjugations.len(), 2);
        assert_eq!(f.conjugations[1].to_string(), "a b^-1");
    }

    #[test]
    fn round_trip_small() {
        let src = format!("{TORUS}word: a b conj(a^2){{ b }} ~b^2\ntarget: identity\n");
        let f = parse(&src).unwrap();
        let again = parse(&serialize(&f)).unwrap();
        assert_eq!(f, again);
        assert_eq!(serialize(&f), serialize(&again));
    }

    #[test]
    fn comments_and_missing_surface() {
        let err = parse("# nothing here\n").unwrap_err();
        assert!(err.0[0].message.contains("surface"));
    }
}
