use crate::bitserial::{SerialWord, WORD_BITS};
use crate::chip::{ChipConfig, ChipError};
use crate::fuzzy::{FuzzyVector, Grade, Rule, RuleSet, MAX_ELEMENTS, MIN_ELEMENTS};

/// Which of the two on-chip memories a bit lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Module {
    Antecedent,
    Conclusion,
}

/// Contents of the rule memories.
///
/// Each module holds `rule_count * elements * 4` bits: rule 0's grades in
/// universe order, each grade MSB first, then rule 1, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RomImage {
    rule_count: usize,
    elements: usize,
    antecedent: Vec<bool>,
    conclusion: Vec<bool>,
}

impl RomImage {
    pub fn new(
        rule_count: usize,
        elements: usize,
        antecedent: Vec<bool>,
        conclusion: Vec<bool>,
    ) -> Result<Self, ChipError> {
        if rule_count == 0 {
            return Err(ChipError::EmptyRom);
        }
        if !(MIN_ELEMENTS..=MAX_ELEMENTS).contains(&elements) {
            return Err(ChipError::Elements(elements));
        }
        let expected = rule_count * elements * WORD_BITS;
        for module in [&antecedent, &conclusion] {
            if module.len() != expected {
                return Err(ChipError::RomLength {
                    expected,
                    found: module.len(),
                });
            }
        }
        Ok(Self {
            rule_count,
            elements,
            antecedent,
            conclusion,
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rule_count
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Bits occupied by one rule in each module.
    pub fn bits_per_rule(&self) -> usize {
        self.elements * WORD_BITS
    }

    pub fn module(&self, module: Module) -> &[bool] {
        match module {
            Module::Antecedent => &self.antecedent,
            Module::Conclusion => &self.conclusion,
        }
    }

    /// Bit `offset` of `rule` within `module`.
    pub fn bit(&self, module: Module, rule: usize, offset: usize) -> bool {
        self.module(module)[rule * self.bits_per_rule() + offset]
    }

    pub fn grade(&self, module: Module, rule: usize, element: usize) -> Grade {
        let start = rule * self.bits_per_rule() + element * WORD_BITS;
        let bits = &self.module(module)[start..start + WORD_BITS];
        SerialWord::from_bits([bits[0], bits[1], bits[2], bits[3]]).decode()
    }

    fn vector(&self, module: Module, rule: usize) -> FuzzyVector {
        let grades = (0..self.elements).map(|e| self.grade(module, rule, e)).collect();
        FuzzyVector::new(grades).expect("image element count is validated")
    }

    /// Decodes the image back into single-antecedent rules, padding included.
    pub fn to_rules(&self) -> RuleSet {
        let rules = (0..self.rule_count)
            .map(|r| {
                Rule::simple(
                    self.vector(Module::Antecedent, r),
                    self.vector(Module::Conclusion, r),
                )
                .expect("equal lengths")
            })
            .collect();
        RuleSet::new(rules).expect("non-empty")
    }

    /// Inverts one stored bit. Used to check that the equivalence harness
    /// notices memory faults.
    pub fn flip_bit(&mut self, module: Module, index: usize) {
        let bits = match module {
            Module::Antecedent => &mut self.antecedent,
            Module::Conclusion => &mut self.conclusion,
        };
        bits[index] = !bits[index];
    }
}

fn pack(bits: &mut Vec<bool>, v: &FuzzyVector) {
    for &g in v.grades() {
        bits.extend_from_slice(&SerialWord::from(g).bits());
    }
}

/// Packs a single-antecedent rule set into the two rule memories of a chip,
/// padding unused data paths with all-zero rules.
pub fn build_rom(rules: &RuleSet, config: ChipConfig) -> Result<RomImage, ChipError> {
    if rules.antecedent_count() != 1 {
        return Err(ChipError::UnsupportedRuleShape {
            antecedents: rules.antecedent_count(),
        });
    }
    if rules.len() > config.capacity() {
        return Err(ChipError::Capacity {
            rules: rules.len(),
            capacity: config.capacity(),
        });
    }
    if rules.universe_size() != config.elements() {
        return Err(ChipError::Dimension {
            expected: config.elements(),
            found: rules.universe_size(),
        });
    }

    let len = config.capacity() * config.elements() * WORD_BITS;
    let mut antecedent = Vec::with_capacity(len);
    let mut conclusion = Vec::with_capacity(len);
    for rule in rules.rules() {
        pack(&mut antecedent, &rule.antecedents()[0]);
        pack(&mut conclusion, rule.consequent());
    }
    antecedent.resize(len, false);
    conclusion.resize(len, false);
    RomImage::new(config.capacity(), config.elements(), antecedent, conclusion)
}
