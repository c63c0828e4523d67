//! `.frs` rule-set text format.
//!
//! ```text
//! # comment
//! elements 4
//! levels 16
//! antecedents 1
//! rule
//! A1 15 8 0 0
//! C 0 5 10 15
//! ```
//!
//! The three header directives come first, in any order. Each `rule` block
//! holds one `A<i>` row per antecedent (`i` from 1) and one `C` row.

use std::fmt::Write as _;

use thiserror::Error;

use crate::fuzzy::{FuzzyError, FuzzyVector, Grade, Rule, RuleSet, LEVELS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("grade `{0}` is outside 0..=15")]
    GradeRange(String),
    #[error("`{0}` is not an integer")]
    NotAnInteger(String),
    #[error("row has {found} grades, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("rule is missing its consequent row `C`")]
    MissingConsequent,
    #[error("rule is missing antecedent row A{0}")]
    MissingAntecedent(usize),
    #[error("row `{0}` appears twice in one rule")]
    DuplicateRow(String),
    #[error("antecedent row A{index} out of range 1..={count}")]
    AntecedentIndex { index: usize, count: usize },
    #[error("row outside of a `rule` block")]
    RowOutsideRule,
    #[error("directive `{0}` repeated")]
    DuplicateDirective(String),
    #[error("directive `{0}` must precede the first rule")]
    LateDirective(String),
    #[error("missing directive `{0}`")]
    MissingDirective(&'static str),
    #[error("`{directive}` expects one integer argument")]
    BadArgument { directive: String },
    #[error("levels must be {LEVELS}, got {0}")]
    Levels(u64),
    #[error("antecedent count must be at least 1")]
    ZeroAntecedents,
    #[error("no rules defined")]
    NoRules,
    #[error("{0}")]
    Invalid(FuzzyError),
}

/// A parse failure with the 1-based line it was detected on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_grades(line: usize, tokens: &[&str], expected: usize) -> Result<FuzzyVector, ParseError> {
    if tokens.len() != expected {
        return err(
            line,
            ParseErrorKind::RowLength {
                expected,
                found: tokens.len(),
            },
        );
    }
    let grades = tokens
        .iter()
        .map(|t| parse_grade(line, t))
        .collect::<Result<Vec<_>, _>>()?;
    FuzzyVector::new(grades).map_err(|e| ParseError {
        line,
        kind: ParseErrorKind::Invalid(e),
    })
}

fn parse_grade(line: usize, token: &str) -> Result<Grade, ParseError> {
    let value: i64 = match token.parse() {
        Ok(v) => v,
        // digits that overflow i64 are still a range problem, not a syntax one
        Err(_) if token.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()) && !token.is_empty() => {
            return err(line, ParseErrorKind::GradeRange(token.to_string()))
        }
        Err(_) => return err(line, ParseErrorKind::NotAnInteger(token.to_string())),
    };
    Grade::try_from(value).or_else(|_| err(line, ParseErrorKind::GradeRange(token.to_string())))
}

#[derive(Default)]
struct PendingRule {
    line: usize,
    antecedents: Vec<Option<FuzzyVector>>,
    consequent: Option<FuzzyVector>,
}

impl PendingRule {
    fn finish(self, end_line: usize) -> Result<Rule, ParseError> {
        let mut antecedents = Vec::with_capacity(self.antecedents.len());
        for (i, a) in self.antecedents.into_iter().enumerate() {
            match a {
                Some(v) => antecedents.push(v),
                None => return err(end_line, ParseErrorKind::MissingAntecedent(i + 1)),
            }
        }
        let Some(consequent) = self.consequent else {
            return err(end_line, ParseErrorKind::MissingConsequent);
        };
        Rule::new(antecedents, consequent).map_err(|e| ParseError {
            line: self.line,
            kind: ParseErrorKind::Invalid(e),
        })
    }
}

fn directive_value(line: usize, name: &str, args: &[&str]) -> Result<u64, ParseError> {
    match args {
        [v] => v.parse().or_else(|_| {
            err(
                line,
                ParseErrorKind::BadArgument {
                    directive: name.to_string(),
                },
            )
        }),
        _ => err(
            line,
            ParseErrorKind::BadArgument {
                directive: name.to_string(),
            },
        ),
    }
}

/// Parses and validates an `.frs` document.
pub fn parse_ruleset(text: &str) -> Result<RuleSet, ParseError> {
    let mut elements: Option<usize> = None;
    let mut levels: Option<u64> = None;
    let mut antecedents: Option<usize> = None;
    let mut rules = Vec::new();
    let mut current: Option<PendingRule> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let (head, args) = (tokens[0], &tokens[1..]);
        let in_rules = current.is_some() || !rules.is_empty();

        match head {
            "elements" | "levels" | "antecedents" => {
                if in_rules {
                    return err(line, ParseErrorKind::LateDirective(head.to_string()));
                }
                let value = directive_value(line, head, args)?;
                let slot_taken = match head {
                    "elements" => elements.replace(value as usize).is_some(),
                    "levels" => {
                        if value != LEVELS as u64 {
                            return err(line, ParseErrorKind::Levels(value));
                        }
                        levels.replace(value).is_some()
                    }
                    _ => {
                        if value == 0 {
                            return err(line, ParseErrorKind::ZeroAntecedents);
                        }
                        antecedents.replace(value as usize).is_some()
                    }
                };
                if slot_taken {
                    return err(line, ParseErrorKind::DuplicateDirective(head.to_string()));
                }
                if head == "elements" {
                    FuzzyVector::zeros(value as usize).map_err(|e| ParseError {
                        line,
                        kind: ParseErrorKind::Invalid(e),
                    })?;
                }
            }
            "rule" => {
                if !args.is_empty() {
                    return err(
                        line,
                        ParseErrorKind::BadArgument {
                            directive: "rule".into(),
                        },
                    );
                }
                let k = match (elements, levels, antecedents) {
                    (None, _, _) => return err(line, ParseErrorKind::MissingDirective("elements")),
                    (_, None, _) => return err(line, ParseErrorKind::MissingDirective("levels")),
                    (_, _, None) => return err(line, ParseErrorKind::MissingDirective("antecedents")),
                    (_, _, Some(k)) => k,
                };
                if let Some(done) = current.take() {
                    rules.push(done.finish(line)?);
                }
                current = Some(PendingRule {
                    line,
                    antecedents: vec![None; k],
                    consequent: None,
                });
            }
            "C" => {
                let Some(rule) = current.as_mut() else {
                    return err(line, ParseErrorKind::RowOutsideRule);
                };
                if rule.consequent.is_some() {
                    return err(line, ParseErrorKind::DuplicateRow("C".into()));
                }
                rule.consequent = Some(parse_grades(line, args, elements.unwrap_or(0))?);
            }
            h if h.starts_with('A') && h.len() > 1 && h[1..].chars().all(|c| c.is_ascii_digit()) => {
                let Some(rule) = current.as_mut() else {
                    return err(line, ParseErrorKind::RowOutsideRule);
                };
                let index: usize = h[1..].parse().unwrap_or(0);
                let count = rule.antecedents.len();
                if index == 0 || index > count {
                    return err(line, ParseErrorKind::AntecedentIndex { index, count });
                }
                if rule.antecedents[index - 1].is_some() {
                    return err(line, ParseErrorKind::DuplicateRow(h.to_string()));
                }
                rule.antecedents[index - 1] = Some(parse_grades(line, args, elements.unwrap_or(0))?);
            }
            other => return err(line, ParseErrorKind::UnknownDirective(other.to_string())),
        }
    }

    let end = last_line.max(1);
    match current {
        Some(done) => rules.push(done.finish(end)?),
        None => {
            if elements.is_none() {
                return err(end, ParseErrorKind::MissingDirective("elements"));
            }
            if levels.is_none() {
                return err(end, ParseErrorKind::MissingDirective("levels"));
            }
            if antecedents.is_none() {
                return err(end, ParseErrorKind::MissingDirective("antecedents"));
            }
            return err(end, ParseErrorKind::NoRules);
        }
    }
    RuleSet::new(rules).map_err(|e| ParseError {
        line: end,
        kind: ParseErrorKind::Invalid(e),
    })
}

/// Canonical text for a rule set: header directives in a fixed order, one
/// space between tokens, `\n` line endings.
pub fn serialize_ruleset(rules: &RuleSet) -> String {
    let mut out = String::new();
    writeln!(out, "elements {}", rules.universe_size()).unwrap();
    writeln!(out, "levels {LEVELS}").unwrap();
    writeln!(out, "antecedents {}", rules.antecedent_count()).unwrap();
    for rule in rules.rules() {
        out.push_str("rule\n");
        for (i, a) in rule.antecedents().iter().enumerate() {
            writeln!(out, "A{} {a}", i + 1).unwrap();
        }
        writeln!(out, "C {}", rule.consequent()).unwrap();
    }
    out
}

/// Parses an observation file: one grade row per antecedent variable, blank
/// lines and `#` comments ignored.
pub fn parse_observations(text: &str, elements: usize) -> Result<Vec<FuzzyVector>, ParseError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        rows.push(parse_grades(idx + 1, &tokens, elements)?);
    }
    Ok(rows)
}
