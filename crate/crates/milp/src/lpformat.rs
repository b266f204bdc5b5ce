//! Plain-text LP export and import (a subset of the CPLEX LP dialect).
//!
//! The writer lists every variable in the objective (zero coefficients
//! included) and gives explicit bounds for each, so `parse_lp(write_lp(m))`
//! reproduces `m` with the same variable order.

use std::fmt::Write as _;

use crate::error::MilpError;
use crate::model::{Model, Sense, VarKind};

const TERMS_PER_LINE: usize = 8;

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

fn write_terms<'a>(out: &mut String, terms: impl Iterator<Item = (&'a str, f64)>) {
    for (k, (name, a)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        if a < 0.0 || (a == 0.0 && a.is_sign_negative()) {
            let _ = write!(out, " - {} {}", fmt_num(-a), name);
        } else {
            let _ = write!(out, " + {} {}", fmt_num(a), name);
        }
    }
}

pub fn write_lp(model: &Model) -> String {
    let mut out = String::new();
    out.push_str("\\ layout-milp export\n");
    out.push_str("Minimize\n obj:");
    write_terms(
        &mut out,
        model.vars.iter().map(|v| (v.name.as_str(), v.objective)),
    );
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        if row.terms.is_empty() {
            out.push_str(" 0");
        }
        write_terms(
            &mut out,
            row.terms
                .iter()
                .map(|&(j, a)| (model.vars[j].name.as_str(), a)),
        );
        let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, fmt_num(v.lower));
        } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_num(v.lower),
                v.name,
                fmt_num(v.upper)
            );
        }
    }
    let binaries: Vec<&str> = model
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_keyword(line: &str) -> Option<Result<Section, String>> {
    let lower = line.trim().to_ascii_lowercase();
    let squashed: String = lower.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(Ok(match squashed.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Section::Objective,
        "maximize" | "maximise" | "maximum" | "max" => {
            return Some(Err("only minimization models are supported".into()))
        }
        "subject to" | "such that" | "st" | "s.t." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "generals" | "general" | "gen" | "integers" | "semi-continuous" | "sos" => {
            return Some(Err(format!("unsupported section `{}`", line.trim())))
        }
        "end" => Section::End,
        _ => return None,
    }))
}

fn parse_number(word: &str) -> Option<f64> {
    let lower = word.to_ascii_lowercase();
    let v = match lower.as_str() {
        "inf" | "infinity" | "+inf" | "+infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => {
            let first = lower.chars().next()?;
            if !(first.is_ascii_digit() || first == '.') {
                return None;
            }
            lower.parse::<f64>().ok()?
        }
    };
    (!v.is_nan()).then_some(v)
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, MilpError> {
    let mut toks = Vec::new();
    let mut word = String::new();
    let chars: Vec<char> = line.chars().collect();
    let flush = |word: &mut String, toks: &mut Vec<Tok>| {
        if !word.is_empty() {
            let w = std::mem::take(word);
            match parse_number(&w) {
                Some(v) => toks.push(Tok::Num(v)),
                None => toks.push(Tok::Word(w)),
            }
        }
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => flush(&mut word, &mut toks),
            '+' | '-' => {
                let exponent = (word.ends_with('e') || word.ends_with('E'))
                    && word
                        .chars()
                        .next()
                        .is_some_and(|f| f.is_ascii_digit() || f == '.');
                if exponent {
                    word.push(c);
                } else {
                    flush(&mut word, &mut toks);
                    toks.push(if c == '+' { Tok::Plus } else { Tok::Minus });
                }
            }
            ':' => {
                flush(&mut word, &mut toks);
                toks.push(Tok::Colon);
            }
            '<' | '>' | '=' => {
                flush(&mut word, &mut toks);
                let next = chars.get(i + 1).copied();
                let (sense, width) = match (c, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (Sense::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (Sense::Ge, 2),
                    ('<', _) => (Sense::Le, 1),
                    ('>', _) => (Sense::Ge, 1),
                    _ => (Sense::Eq, 1),
                };
                toks.push(Tok::Cmp(sense));
                i += width;
                continue;
            }
            c if c.is_control() => {
                return Err(MilpError::parse(lineno, "control character in input"));
            }
            _ => word.push(c),
        }
        i += 1;
    }
    flush(&mut word, &mut toks);
    Ok(toks)
}

#[derive(Default)]
struct VarDraft {
    name: String,
    lower: Option<f64>,
    upper: Option<f64>,
    objective: f64,
    binary: bool,
}

#[derive(Default)]
struct Draft {
    vars: Vec<VarDraft>,
    index: std::collections::HashMap<String, usize>,
    rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)>,
}

impl Draft {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.vars.len();
        self.vars.push(VarDraft {
            name: name.to_string(),
            ..Default::default()
        });
        self.index.insert(name.to_string(), j);
        j
    }
}

type Located = (Tok, usize);

/// Parses `[+|-]* [coef] var` terms until a comparison or the end.
fn parse_expr(
    toks: &[Located],
    pos: &mut usize,
    draft: &mut Draft,
) -> Result<Vec<(usize, f64)>, MilpError> {
    let mut terms = Vec::new();
    while *pos < toks.len() {
        if matches!(toks[*pos].0, Tok::Cmp(_)) {
            break;
        }
        let line = toks[*pos].1;
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some((Tok::Plus | Tok::Minus, _)) = toks.get(*pos) {
            if toks[*pos].0 == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            *pos += 1;
        }
        let mut coef = 1.0;
        if let Some((Tok::Num(v), _)) = toks.get(*pos) {
            coef = *v;
            *pos += 1;
        }
        match toks.get(*pos) {
            Some((Tok::Word(name), _)) => {
                if !coef.is_finite() {
                    return Err(MilpError::parse(line, "infinite coefficient"));
                }
                let j = draft.var(name);
                terms.push((j, sign * coef));
                *pos += 1;
            }
            Some((Tok::Cmp(_), _)) | None if !saw_sign && coef == 0.0 => {
                // A lone `0` stands for an empty expression.
            }
            _ => {
                return Err(MilpError::parse(line, "expected a variable name in expression"));
            }
        }
    }
    Ok(terms)
}

fn parse_signed_number(toks: &[Located], pos: &mut usize) -> Option<f64> {
    let mut sign = 1.0;
    while let Some((Tok::Plus | Tok::Minus, _)) = toks.get(*pos) {
        if toks[*pos].0 == Tok::Minus {
            sign = -sign;
        }
        *pos += 1;
    }
    match toks.get(*pos) {
        Some((Tok::Num(v), _)) => {
            *pos += 1;
            Some(sign * v)
        }
        _ => None,
    }
}

fn optional_label(toks: &[Located], pos: &mut usize) -> Option<String> {
    if let (Some((Tok::Word(w), _)), Some((Tok::Colon, _))) = (toks.get(*pos), toks.get(*pos + 1)) {
        *pos += 2;
        return Some(w.clone());
    }
    None
}

fn parse_constraints(toks: &[Located], draft: &mut Draft) -> Result<(), MilpError> {
    let mut pos = 0;
    while pos < toks.len() {
        let line = toks[pos].1;
        let label = optional_label(toks, &mut pos);
        let terms = parse_expr(toks, &mut pos, draft)?;
        let sense = match toks.get(pos) {
            Some((Tok::Cmp(s), _)) => *s,
            _ => return Err(MilpError::parse(line, "constraint without comparison")),
        };
        pos += 1;
        let rhs = parse_signed_number(toks, &mut pos)
            .ok_or_else(|| MilpError::parse(line, "constraint without numeric right-hand side"))?;
        if !rhs.is_finite() {
            return Err(MilpError::parse(line, "infinite right-hand side"));
        }
        let name = label.unwrap_or_else(|| format!("r{}", draft.rows.len()));
        draft.rows.push((name, terms, sense, rhs));
    }
    Ok(())
}

fn parse_bound_line(toks: &[Tok], line: usize, draft: &mut Draft) -> Result<(), MilpError> {
    let num = |t: &[Tok]| -> Option<f64> {
        match t {
            [Tok::Num(v)] => Some(*v),
            [Tok::Minus, Tok::Num(v)] => Some(-v),
            [Tok::Plus, Tok::Num(v)] => Some(*v),
            _ => None,
        }
    };
    let bad = || MilpError::parse(line, "unrecognized bound");
    let cmp_at: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Tok::Cmp(_)))
        .map(|(k, _)| k)
        .collect();
    match (toks, cmp_at.as_slice()) {
        ([Tok::Word(name), Tok::Word(kw)], []) if kw.eq_ignore_ascii_case("free") => {
            let j = draft.var(name);
            draft.vars[j].lower = Some(f64::NEG_INFINITY);
            draft.vars[j].upper = Some(f64::INFINITY);
        }
        (_, [a, b]) => {
            let lo = num(&toks[..*a]).ok_or_else(bad)?;
            let hi = num(&toks[b + 1..]).ok_or_else(bad)?;
            let name = match &toks[a + 1..*b] {
                [Tok::Word(n)] => n,
                _ => return Err(bad()),
            };
            let (sa, sb) = match (&toks[*a], &toks[*b]) {
                (Tok::Cmp(x), Tok::Cmp(y)) => (*x, *y),
                _ => return Err(bad()),
            };
            let j = draft.var(name);
            match (sa, sb) {
                (Sense::Le, Sense::Le) => {
                    draft.vars[j].lower = Some(lo);
                    draft.vars[j].upper = Some(hi);
                }
                (Sense::Ge, Sense::Ge) => {
                    draft.vars[j].lower = Some(hi);
                    draft.vars[j].upper = Some(lo);
                }
                _ => return Err(bad()),
            }
        }
        (_, [a]) => {
            let sense = match &toks[*a] {
                Tok::Cmp(s) => *s,
                _ => return Err(bad()),
            };
            let (name, value, var_left) = match (&toks[..*a], num(&toks[a + 1..])) {
                ([Tok::Word(n)], Some(v)) => (n, v, true),
                (left, _) => match (num(left), &toks[a + 1..]) {
                    (Some(v), [Tok::Word(n)]) => (n, v, false),
                    _ => return Err(bad()),
                },
            };
            let j = draft.var(name);
            let sense = match (sense, var_left) {
                (s, true) => s,
                (Sense::Le, false) => Sense::Ge,
                (Sense::Ge, false) => Sense::Le,
                (Sense::Eq, false) => Sense::Eq,
            };
            match sense {
                Sense::Le => draft.vars[j].upper = Some(value),
                Sense::Ge => draft.vars[j].lower = Some(value),
                Sense::Eq => {
                    draft.vars[j].lower = Some(value);
                    draft.vars[j].upper = Some(value);
                }
            }
        }
        _ => return Err(bad()),
    }
    Ok(())
}

pub fn parse_lp(text: &str) -> Result<Model, MilpError> {
    let mut draft = Draft::default();
    let mut section = Section::Preamble;
    let mut objective: Vec<Located> = Vec::new();
    let mut constraints: Vec<Located> = Vec::new();
    let mut seen_objective = false;
    let mut bound_lines: Vec<(Vec<Tok>, usize)> = Vec::new();
    let mut binary_names: Vec<(Tok, usize)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let content = raw.split('\\').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_keyword(content) {
            let next = next.map_err(|m| MilpError::parse(lineno, m))?;
            if next == Section::Objective {
                if seen_objective {
                    return Err(MilpError::parse(lineno, "second objective section"));
                }
                seen_objective = true;
            }
            section = next;
            continue;
        }
        let toks = tokenize(content, lineno)?;
        match section {
            Section::Preamble => {
                return Err(MilpError::parse(lineno, "content before the objective section"))
            }
            Section::End => return Err(MilpError::parse(lineno, "content after End")),
            Section::Objective => objective.extend(toks.into_iter().map(|t| (t, lineno))),
            Section::Constraints => constraints.extend(toks.into_iter().map(|t| (t, lineno))),
            Section::Bounds => bound_lines.push((toks, lineno)),
            Section::Binaries => binary_names.extend(toks.into_iter().map(|t| (t, lineno))),
        }
    }
    if !seen_objective {
        return Err(MilpError::parse(0, "missing objective section"));
    }

    let mut pos = 0;
    optional_label(&objective, &mut pos);
    let obj_terms = parse_expr(&objective, &mut pos, &mut draft)?;
    if pos < objective.len() {
        return Err(MilpError::parse(objective[pos].1, "comparison inside objective"));
    }
    for (j, a) in obj_terms {
        draft.vars[j].objective += a;
    }
    // Variables are registered in order of first appearance: objective,
    // constraints, bounds, binaries.
    parse_constraints(&constraints, &mut draft)?;
    for (toks, lineno) in &bound_lines {
        parse_bound_line(toks, *lineno, &mut draft)?;
    }
    for (t, lineno) in binary_names {
        match t {
            Tok::Word(name) => {
                let j = draft.var(&name);
                draft.vars[j].binary = true;
            }
            _ => return Err(MilpError::parse(lineno, "expected variable names")),
        }
    }

    let mut model = Model::new();
    for v in &draft.vars {
        let (default_lo, default_hi) = if v.binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        let lo = v.lower.unwrap_or(default_lo);
        let hi = v.upper.unwrap_or(default_hi);
        let kind = if v.binary { VarKind::Binary } else { VarKind::Continuous };
        model.add_var(v.name.clone(), lo, hi, v.objective, kind)?;
    }
    let mut names = std::collections::HashSet::new();
    for (name, terms, sense, rhs) in draft.rows {
        if !names.insert(name.clone()) {
            return Err(MilpError::parse(0, format!("duplicate row name `{name}`")));
        }
        model.add_row(name, terms, sense, rhs)?;
    }
    Ok(model)
}
