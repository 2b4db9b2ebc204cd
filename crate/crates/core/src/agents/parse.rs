//! Extraction of "Disease (NN%)" style predictions from free text.
//!
//! Recognized shapes, all case-insensitive and tolerant of markdown emphasis
//! and list markers:
//!
//! - inline parenthesized: `Dengue Fever (60%), Chikungunya (25%), and Zika Virus (15%)`
//! - colon separated: `Hepatitis C (HCV): 40%`
//! - dash separated list items: `1. Hepatitis C (HCV) - 35%`
//!
//! Parenthetical qualifiers inside a disease name (abbreviations, "due to ..."
//! notes) are dropped so that `Cirrhosis (due to ...)` and `Cirrhosis` name
//! the same label.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;

use crate::probdist::{Label, PredictionSet, NORMALIZED_TOLERANCE};

/// Sum tolerance under which parsed percentages count as normalized.
pub const PARSE_SUM_TOLERANCE: f64 = 1e-6;

const MAX_NAME_CHARS: usize = 80;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("no prediction patterns found")]
    NoPredictions,
    #[error("parsed masses sum to {sum:.4}, which exceeds 1")]
    MassSumExceedsOne { sum: f64 },
}

fn percent_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(\d{1,3}(?:\.\d+)?)\s*%").expect("valid regex"))
}

fn list_marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*•+]|\d{1,2}[.)]|[a-z][.)])\s+").expect("valid regex"))
}

/// Parses the predictions in `raw`. Masses are the stated percentages divided
/// by 100; the set is flagged normalized when they sum to one within
/// [`PARSE_SUM_TOLERANCE`]. The first mention of a label wins.
pub fn parse_predictions(raw: &str) -> Result<PredictionSet, ParseError> {
    let mut found: Vec<(Label, f64)> = Vec::new();
    for line in raw.lines() {
        let line = list_marker_re().replace(line, "");
        let line = line.replace(['*', '_', '`'], "");
        for m in percent_re().captures_iter(&line) {
            let whole = m.get(0).expect("group 0");
            let Ok(pct) = m[1].parse::<f64>() else {
                continue;
            };
            if pct > 100.0 {
                continue;
            }
            let Some(name) = name_before(&line, whole.start(), whole.end()) else {
                continue;
            };
            let Ok(label) = Label::new(&name) else {
                continue;
            };
            if found.iter().any(|(l, _)| *l == label) {
                continue;
            }
            found.push((label, pct / 100.0));
        }
    }
    if found.is_empty() {
        return Err(ParseError::NoPredictions);
    }
    let sum: f64 = found.iter().map(|(_, m)| m).sum();
    if sum > 1.0 + PARSE_SUM_TOLERANCE {
        return Err(ParseError::MassSumExceedsOne { sum });
    }
    let mut entries: BTreeMap<Label, f64> = found.into_iter().collect();
    let normalized = (sum - 1.0).abs() <= PARSE_SUM_TOLERANCE;
    if normalized && (sum - 1.0).abs() > NORMALIZED_TOLERANCE {
        // inside the parse tolerance but outside the set invariant: rescale
        for m in entries.values_mut() {
            *m /= sum;
        }
    }
    Ok(PredictionSet::from_raw_parts(entries, normalized))
}

/// Finds the disease name attached to the percentage spanning `start..end`,
/// or `None` when the percentage is not in a recognized prediction position.
fn name_before(line: &str, start: usize, end: usize) -> Option<String> {
    let before = &line[..start];
    let after = &line[end..];
    let trimmed = before.trim_end();

    let name_end = if trimmed.ends_with('(') && after.trim_start().starts_with(')') {
        trimmed.len() - 1
    } else {
        trimmed
            .strip_suffix(':')
            .or_else(|| trimmed.strip_suffix(" -"))
            .or_else(|| trimmed.strip_suffix(" –"))
            .or_else(|| trimmed.strip_suffix(" —"))
            .or_else(|| trimmed.strip_suffix('='))?
            .len()
    };

    let head = &line[..name_end];
    let name_start = scan_back_to_delimiter(head);
    clean_name(&head[name_start..])
}

/// Walks backwards from the end of `head` to just after the nearest
/// top-level delimiter (comma, semicolon, colon) or line start. Delimiters
/// inside parentheses do not count.
fn scan_back_to_delimiter(head: &str) -> usize {
    let mut depth = 0i32;
    for (i, c) in head.char_indices().rev() {
        match c {
            ')' => depth += 1,
            '(' => depth -= 1,
            ',' | ';' | ':' if depth <= 0 => return i + c.len_utf8(),
            _ => {}
        }
    }
    0
}

fn strip_parentheticals(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn clean_name(raw: &str) -> Option<String> {
    let mut name = strip_parentheticals(raw);
    name = name
        .trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '-' || c == '.')
        .trim()
        .to_string();
    for prefix in ["and ", "or ", "And ", "Or "] {
        if let Some(rest) = name.strip_prefix(prefix) {
            name = rest.trim().to_string();
        }
    }
    if name.is_empty()
        || name.chars().count() > MAX_NAME_CHARS
        || !name.chars().any(|c| c.is_alphabetic())
    {
        return None;
    }
    Some(name)
}

/// The reasoning part of a response: text after a "Justification(s)" /
/// "Reasoning" heading when one exists on its own line, else the whole text.
pub fn extract_justification(raw: &str) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"(?im)^[\s*_#]*(?:justifications?|reasoning|rationale)[\s*_]*:?[\s*_]*$")
            .expect("valid regex")
    });
    match re.find(raw) {
        Some(m) if !raw[m.end()..].trim().is_empty() => raw[m.end()..].trim().to_string(),
        _ => raw.trim().to_string(),
    }
}
