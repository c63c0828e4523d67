//! Discretized min-max approximate reasoning.
//!
//! Membership grades are 4-bit integers (0 = no membership, 15 = full
//! membership). Intersection is the pointwise minimum, union the pointwise
//! maximum. A rule fires with the weight `w = min_m max_x (A'_m ∩ A_m)` and
//! contributes `w ∩ C`; the conclusion is the union of all contributions.

use std::fmt;

use thiserror::Error;

/// Number of distinct membership levels.
pub const LEVELS: u8 = 16;
/// Smallest supported universe of discourse.
pub const MIN_ELEMENTS: usize = 2;
/// Largest supported universe of discourse.
pub const MAX_ELEMENTS: usize = 64;
/// Universe size of the fabricated 16-rule chip.
pub const DEFAULT_ELEMENTS: usize = 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzyError {
    #[error("grade {0} is outside 0..=15")]
    GradeOutOfRange(i64),
    #[error("universe size {0} is outside {MIN_ELEMENTS}..={MAX_ELEMENTS}")]
    UniverseSize(usize),
    #[error("dimension mismatch: {left} vs {right} elements")]
    Dimension { left: usize, right: usize },
    #[error("rule has no antecedents")]
    NoAntecedents,
    #[error("rule set is empty")]
    EmptyRuleSet,
    #[error("rule {rule} has {found} antecedents, expected {expected}")]
    Arity {
        rule: usize,
        expected: usize,
        found: usize,
    },
    #[error("rule weight needs at least one match degree")]
    NoMatchDegrees,
}

/// A membership degree on the 16-level scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Grade(u8);

impl Grade {
    pub const ZERO: Grade = Grade(0);
    pub const FULL: Grade = Grade(LEVELS - 1);

    pub fn new(value: u8) -> Result<Self, FuzzyError> {
        if value < LEVELS {
            Ok(Grade(value))
        } else {
            Err(FuzzyError::GradeOutOfRange(value as i64))
        }
    }

    /// Keeps the low four bits. Only for values already known to be in range.
    pub(crate) const fn from_nibble(value: u8) -> Self {
        Grade(value & 0x0f)
    }

    pub const fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<i64> for Grade {
    type Error = FuzzyError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        if (0..LEVELS as i64).contains(&value) {
            Ok(Grade(value as u8))
        } else {
            Err(FuzzyError::GradeOutOfRange(value))
        }
    }
}

impl From<Grade> for u8 {
    fn from(g: Grade) -> u8 {
        g.0
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn check_universe(len: usize) -> Result<(), FuzzyError> {
    if (MIN_ELEMENTS..=MAX_ELEMENTS).contains(&len) {
        Ok(())
    } else {
        Err(FuzzyError::UniverseSize(len))
    }
}

/// A fuzzy subset of a finite universe `0..E`, one grade per element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FuzzyVector {
    grades: Vec<Grade>,
}

impl FuzzyVector {
    pub fn new(grades: Vec<Grade>) -> Result<Self, FuzzyError> {
        check_universe(grades.len())?;
        Ok(Self { grades })
    }

    /// Builds a vector from raw integers, rejecting anything outside 0..=15.
    pub fn from_values(values: &[u8]) -> Result<Self, FuzzyError> {
        let grades = values
            .iter()
            .map(|&v| Grade::new(v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(grades)
    }

    pub fn zeros(elements: usize) -> Result<Self, FuzzyError> {
        Self::new(vec![Grade::ZERO; elements])
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn grades(&self) -> &[Grade] {
        &self.grades
    }

    pub fn get(&self, index: usize) -> Option<Grade> {
        self.grades.get(index).copied()
    }

    pub fn values(&self) -> Vec<u8> {
        self.grades.iter().map(|g| g.value()).collect()
    }

    fn zip_with(
        &self,
        other: &FuzzyVector,
        f: impl Fn(Grade, Grade) -> Grade,
    ) -> Result<FuzzyVector, FuzzyError> {
        same_len(self, other)?;
        Ok(FuzzyVector {
            grades: self
                .grades
                .iter()
                .zip(&other.grades)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl fmt::Display for FuzzyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.grades.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

fn same_len(a: &FuzzyVector, b: &FuzzyVector) -> Result<(), FuzzyError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(FuzzyError::Dimension {
            left: a.len(),
            right: b.len(),
        })
    }
}

/// Pointwise minimum.
pub fn intersect(a: &FuzzyVector, b: &FuzzyVector) -> Result<FuzzyVector, FuzzyError> {
    a.zip_with(b, Grade::min)
}

/// Pointwise maximum.
pub fn union(a: &FuzzyVector, b: &FuzzyVector) -> Result<FuzzyVector, FuzzyError> {
    a.zip_with(b, Grade::max)
}

/// Largest grade in the vector.
pub fn height(a: &FuzzyVector) -> Grade {
    a.grades.iter().copied().max().unwrap_or(Grade::ZERO)
}

/// Degree to which `observation` matches `antecedent`: the height of their
/// intersection.
pub fn match_degree(observation: &FuzzyVector, antecedent: &FuzzyVector) -> Result<Grade, FuzzyError> {
    same_len(observation, antecedent)?;
    Ok(observation
        .grades
        .iter()
        .zip(&antecedent.grades)
        .map(|(&a, &b)| a.min(b))
        .max()
        .unwrap_or(Grade::ZERO))
}

/// Combines per-antecedent match degrees into a rule weight (their minimum).
pub fn rule_weight(alphas: &[Grade]) -> Result<Grade, FuzzyError> {
    alphas
        .iter()
        .copied()
        .min()
        .ok_or(FuzzyError::NoMatchDegrees)
}

/// Limits every grade of `consequent` to `weight`.
pub fn clip(consequent: &FuzzyVector, weight: Grade) -> FuzzyVector {
    FuzzyVector {
        grades: consequent.grades.iter().map(|&g| g.min(weight)).collect(),
    }
}

/// `if x_1 is A_1 and ... and x_k is A_k then z is C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    antecedents: Vec<FuzzyVector>,
    consequent: FuzzyVector,
}

impl Rule {
    pub fn new(antecedents: Vec<FuzzyVector>, consequent: FuzzyVector) -> Result<Self, FuzzyError> {
        if antecedents.is_empty() {
            return Err(FuzzyError::NoAntecedents);
        }
        for a in &antecedents {
            same_len(a, &consequent)?;
        }
        Ok(Self {
            antecedents,
            consequent,
        })
    }

    /// Single-antecedent rule, the shape the chip stores.
    pub fn simple(antecedent: FuzzyVector, consequent: FuzzyVector) -> Result<Self, FuzzyError> {
        Self::new(vec![antecedent], consequent)
    }

    pub fn antecedents(&self) -> &[FuzzyVector] {
        &self.antecedents
    }

    pub fn consequent(&self) -> &FuzzyVector {
        &self.consequent
    }

    pub fn universe_size(&self) -> usize {
        self.consequent.len()
    }

    /// Weight of this rule for the given observations, one per antecedent.
    pub fn weight(&self, observations: &[FuzzyVector]) -> Result<Grade, FuzzyError> {
        if observations.len() != self.antecedents.len() {
            return Err(FuzzyError::Arity {
                rule: 0,
                expected: self.antecedents.len(),
                found: observations.len(),
            });
        }
        let alphas = observations
            .iter()
            .zip(&self.antecedents)
            .map(|(obs, ant)| match_degree(obs, ant))
            .collect::<Result<Vec<_>, _>>()?;
        rule_weight(&alphas)
    }
}

/// Non-empty, ordered collection of rules sharing one universe size and arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleSet {
    rules: Vec<Rule>,
    universe_size: usize,
    antecedent_count: usize,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<Self, FuzzyError> {
        let first = rules.first().ok_or(FuzzyError::EmptyRuleSet)?;
        let universe_size = first.universe_size();
        let antecedent_count = first.antecedents.len();
        for (i, rule) in rules.iter().enumerate() {
            if rule.universe_size() != universe_size {
                return Err(FuzzyError::Dimension {
                    left: universe_size,
                    right: rule.universe_size(),
                });
            }
            if rule.antecedents.len() != antecedent_count {
                return Err(FuzzyError::Arity {
                    rule: i,
                    expected: antecedent_count,
                    found: rule.antecedents.len(),
                });
            }
        }
        Ok(Self {
            rules,
            universe_size,
            antecedent_count,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn antecedent_count(&self) -> usize {
        self.antecedent_count
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }
}

/// Runs the compositional rule of inference over every rule and returns the
/// fuzzy conclusion `C'`.
pub fn infer(rules: &RuleSet, observations: &[FuzzyVector]) -> Result<FuzzyVector, FuzzyError> {
    if observations.len() != rules.antecedent_count {
        return Err(FuzzyError::Arity {
            rule: 0,
            expected: rules.antecedent_count,
            found: observations.len(),
        });
    }
    for obs in observations {
        if obs.len() != rules.universe_size {
            return Err(FuzzyError::Dimension {
                left: rules.universe_size,
                right: obs.len(),
            });
        }
    }

    let mut out = vec![Grade::ZERO; rules.universe_size];
    for rule in &rules.rules {
        let w = rule.weight(observations)?;
        for (o, &c) in out.iter_mut().zip(&rule.consequent.grades) {
            *o = (*o).max(c.min(w));
        }
    }
    Ok(FuzzyVector { grades: out })
}
