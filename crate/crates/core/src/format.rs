//! Text formats.
//!
//! * Profile: first line `n m`, then one line per agent with whitespace
//!   separated 1-based house labels. Fewer than `m` labels make a partial list.
//! * Utilities: `n` lines of `m` values, each `p/q`, an integer or a decimal
//!   literal. Decimals are read exactly (`0.1` is `1/10`).
//! * Assignment: tab separated rows of rational strings, or JSON with the same
//!   strings.
//!
//! Lines starting with `#` are comments in every format.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Assignment, PreferenceList, Profile, UtilityProfile};
use crate::scalar::Rational;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace separated tokens of one line with their 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out.into_iter()
}

/// Numbered content lines with comments dropped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
}

fn parse_usize(tok: &str, line: usize, column: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| {
        parse_err(
            line,
            column,
            format!("expected a non-negative integer, found `{tok}`"),
        )
    })
}

pub fn parse_profile(text: &str) -> Result<Profile> {
    let mut lines = content_lines(text);
    let (hline, header) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some(x) => break x,
            None => return Err(parse_err(1, 1, "empty profile")),
        }
    };
    let head: Vec<_> = tokens(header).collect();
    if head.len() != 2 {
        return Err(parse_err(hline, 1, "header must be `n m`"));
    }
    let n = parse_usize(head[0].1, hline, head[0].0)?;
    let m = parse_usize(head[1].1, hline, head[1].0)?;
    let mut lists = Vec::with_capacity(n);
    for agent in 0..n {
        let (lno, line) = lines.next().ok_or_else(|| {
            parse_err(
                hline + agent + 1,
                1,
                format!("missing list for agent {}", agent + 1),
            )
        })?;
        let mut order = Vec::new();
        let mut seen = vec![false; m];
        for (col, tok) in tokens(line) {
            let label = parse_usize(tok, lno, col)?;
            if label == 0 || label > m {
                return Err(Error::InvalidList {
                    agent: agent + 1,
                    message: format!(
                        "house {label} out of range 1..={m} (line {lno}, column {col})"
                    ),
                });
            }
            if std::mem::replace(&mut seen[label - 1], true) {
                return Err(Error::InvalidList {
                    agent: agent + 1,
                    message: format!("house {label} listed twice (line {lno}, column {col})"),
                });
            }
            order.push(label - 1);
        }
        if order.len() > m {
            return Err(parse_err(lno, 1, "list longer than the number of houses"));
        }
        lists.push(PreferenceList::from_parts_unchecked(order, m));
    }
    for (lno, line) in lines {
        if !line.trim().is_empty() {
            return Err(parse_err(lno, 1, "unexpected content after the last agent"));
        }
    }
    Profile::new(lists, m)
}

pub fn render_profile(profile: &Profile) -> String {
    let mut out = format!("{} {}\n", profile.agents(), profile.houses());
    for list in profile.lists() {
        out.push_str(&list.to_string());
        out.push('\n');
    }
    out
}

/// Parses `p/q`, an integer, or a decimal literal such as `-7.25` exactly.
pub fn parse_rational(tok: &str) -> Option<Rational> {
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.parse().ok()?;
        let q: BigInt = q.parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok.strip_prefix('+').unwrap_or(tok)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let r = Rational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Number of digits after the decimal point in a decimal literal; `None` for
/// fractions and integers.
pub fn decimal_places(tok: &str) -> Option<usize> {
    if tok.contains('/') {
        return None;
    }
    tok.split_once('.').map(|(_, f)| f.len())
}

fn parse_matrix(text: &str, what: &str) -> Result<Vec<Vec<Rational>>> {
    let mut rows = Vec::new();
    for (lno, line) in content_lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        let row = tokens(line)
            .map(|(col, tok)| {
                parse_rational(tok)
                    .ok_or_else(|| parse_err(lno, col, format!("invalid {what} value `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            let first: &Vec<Rational> = first;
            if first.len() != row.len() {
                return Err(parse_err(
                    lno,
                    1,
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_utilities(text: &str) -> Result<UtilityProfile> {
    UtilityProfile::from_rows(parse_matrix(text, "utility")?)
}

pub fn render_utilities(utilities: &UtilityProfile) -> String {
    render_rows(utilities.rows(), " ")
}

fn render_rows(rows: &[Vec<Rational>], sep: &str) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(sep));
        out.push('\n');
    }
    out
}

/// Tab separated rows of exact rational strings.
pub fn render_assignment(assignment: &Assignment) -> String {
    render_rows(assignment.rows(), "\t")
}

pub fn parse_assignment(text: &str) -> Result<Assignment> {
    let rows = parse_matrix(text, "share")?;
    for (i, row) in rows.iter().enumerate() {
        if row
            .iter()
            .any(|x| *x < Rational::zero() || *x > Rational::one())
        {
            return Err(parse_err(i + 1, 1, "shares must lie in [0, 1]"));
        }
    }
    Assignment::from_rows(rows)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct AssignmentJson {
    agents: usize,
    houses: usize,
    shares: Vec<Vec<String>>,
}

pub fn assignment_to_json(assignment: &Assignment) -> String {
    let doc = AssignmentJson {
        agents: assignment.agents(),
        houses: assignment.houses(),
        shares: assignment
            .rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("assignment serializes")
}

pub fn assignment_from_json(text: &str) -> Result<Assignment> {
    let doc: AssignmentJson =
        serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.column(), e.to_string()))?;
    let rows = doc
        .shares
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| {
                    parse_rational(s).ok_or_else(|| parse_err(1, 1, format!("invalid share `{s}`")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != doc.agents || rows.iter().any(|r| r.len() != doc.houses) {
        return Err(Error::DimensionMismatch(
            "JSON header disagrees with share matrix".into(),
        ));
    }
    Assignment::from_rows(rows)
}
