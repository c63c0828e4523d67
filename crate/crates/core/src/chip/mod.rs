//! Cycle-accurate model of the bit-serial inference engine.
//!
//! The chip has one data path per rule. Each path contains a serial min unit
//! that intersects the incoming observation with the stored antecedent, an
//! α register that keeps the running maximum of that intersection, a ROM word
//! register, and a second min unit that clips the stored consequent by α. The
//! clipped streams of all paths meet in a registered binary tree of max units.
//!
//! Schedule for `E` elements and `R` data paths (`log2 R` tree levels):
//!
//! | cycle                       | activity                                    |
//! |-----------------------------|---------------------------------------------|
//! | 1                           | reset                                       |
//! | 2                           | idle                                        |
//! | 3 ..= 2+4E                  | observation in, antecedent ROM, α update    |
//! | 3+4E ..= 2+8E               | conclusion ROM addressed                    |
//! | 5+4E+log2 R ..= 4+8E+log2 R | `C'` out, `valid` high                      |
//!
//! A conclusion bit read on cycle `t` passes the ROM word register (`t+1`), the
//! clip register (`t+2`) and the tree levels, reaching the output pin on
//! `t + 2 + log2 R`. With `E = 31` and `R = 16` that is cycles 133 through 256.

mod rom;

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::bitserial::{
    serial_min_step, tree_depth, AlphaRegister, ComparatorState, MaxTree, SerialWord, StreamBit,
    WORD_BITS,
};
use crate::fuzzy::{FuzzyVector, Grade, RuleSet, DEFAULT_ELEMENTS, MAX_ELEMENTS, MIN_ELEMENTS};

pub use rom::{build_rom, Module, RomImage};

/// Data paths on the fabricated chip.
pub const DEFAULT_CAPACITY: usize = 16;
pub const MIN_CAPACITY: usize = 2;
pub const MAX_CAPACITY: usize = 64;
/// Cycle on which the first observation bit is sampled.
pub const INPUT_START_CYCLE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChipError {
    #[error("chip supports single-antecedent rules only, got {antecedents} antecedents")]
    UnsupportedRuleShape { antecedents: usize },
    #[error("{rules} rules exceed the chip capacity of {capacity} data paths")]
    Capacity { rules: usize, capacity: usize },
    #[error("data path count {0} must be a power of two in {MIN_CAPACITY}..={MAX_CAPACITY}")]
    InvalidCapacity(usize),
    #[error("element count {0} is outside {MIN_ELEMENTS}..={MAX_ELEMENTS}")]
    Elements(usize),
    #[error("expected {expected} elements, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("ROM module holds {found} bits, expected {expected}")]
    RomLength { expected: usize, found: usize },
    #[error("ROM image holds no rules")]
    EmptyRom,
    #[error("clock tick after the inference finished; reset the chip first")]
    TickAfterDone,
    #[error("output window delivered {found} bits, expected {expected}")]
    OutputLength { expected: usize, found: usize },
}

/// Element count and data path count of a simulated chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChipConfig {
    elements: usize,
    capacity: usize,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            elements: DEFAULT_ELEMENTS,
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl ChipConfig {
    pub fn new(elements: usize, capacity: usize) -> Result<Self, ChipError> {
        if !(MIN_ELEMENTS..=MAX_ELEMENTS).contains(&elements) {
            return Err(ChipError::Elements(elements));
        }
        if !(MIN_CAPACITY..=MAX_CAPACITY).contains(&capacity) || !capacity.is_power_of_two() {
            return Err(ChipError::InvalidCapacity(capacity));
        }
        Ok(Self { elements, capacity })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn schedule(&self) -> Schedule {
        Schedule::new(*self)
    }
}

/// Cycle numbers of the inference protocol. Cycle 1 is the reset cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub input_start: u64,
    pub input_end: u64,
    pub conclusion_start: u64,
    pub conclusion_end: u64,
    pub pipeline_latency: u64,
    pub first_valid: u64,
    pub last_cycle: u64,
}

impl Schedule {
    pub fn new(config: ChipConfig) -> Self {
        let stream = (config.elements * WORD_BITS) as u64;
        // ROM word register + clip register + one register per tree level
        let latency = 2 + tree_depth(config.capacity) as u64;
        let input_start = INPUT_START_CYCLE;
        let input_end = input_start + stream - 1;
        let conclusion_start = input_end + 1;
        let conclusion_end = conclusion_start + stream - 1;
        Self {
            input_start,
            input_end,
            conclusion_start,
            conclusion_end,
            pipeline_latency: latency,
            first_valid: conclusion_start + latency,
            last_cycle: conclusion_end + latency,
        }
    }

    /// Clock cycles per inference, reset cycle included.
    pub fn cycles_per_inference(&self) -> u64 {
        self.last_cycle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    Antecedent,
    Conclusion,
    Done,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Antecedent => "antecedent",
            Phase::Conclusion => "conclusion",
            Phase::Done => "done",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the controller drives during one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Drive {
    phase: Phase,
    antecedent: Option<usize>,
    conclusion: Option<usize>,
}

/// Cycle counter plus one bit-address counter per rule memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Controller {
    schedule: Schedule,
    cycle: u64,
    antecedent_addr: usize,
    conclusion_addr: usize,
    phase: Phase,
}

impl Controller {
    fn new(schedule: Schedule) -> Self {
        Self {
            schedule,
            cycle: 1,
            antecedent_addr: 0,
            conclusion_addr: 0,
            phase: Phase::Idle,
        }
    }

    fn reset(&mut self) {
        *self = Self::new(self.schedule);
    }

    /// Last completed cycle.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn antecedent_addr(&self) -> usize {
        self.antecedent_addr
    }

    pub fn conclusion_addr(&self) -> usize {
        self.conclusion_addr
    }

    fn advance(&mut self) -> Drive {
        self.cycle += 1;
        let s = &self.schedule;
        let c = self.cycle;
        let mut drive = Drive {
            phase: Phase::Idle,
            antecedent: None,
            conclusion: None,
        };
        if (s.input_start..=s.input_end).contains(&c) {
            drive.phase = Phase::Antecedent;
            drive.antecedent = Some(self.antecedent_addr);
            self.antecedent_addr += 1;
        } else if c >= s.conclusion_start {
            drive.phase = Phase::Conclusion;
            if c <= s.conclusion_end {
                drive.conclusion = Some(self.conclusion_addr);
                self.conclusion_addr += 1;
            }
        }
        self.phase = if c >= s.last_cycle { Phase::Done } else { drive.phase };
        drive
    }
}

/// One rule's slice of the inference processor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct DataPath {
    intersect: ComparatorState,
    alpha: AlphaRegister,
    rom_word: StreamBit,
    clip: ComparatorState,
    clip_out: StreamBit,
}

/// Observable signals of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickOutput {
    pub output_bit: bool,
    pub valid: bool,
}

/// Per-cycle record for traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub cycle: u64,
    pub phase: Phase,
    pub input_bit: bool,
    pub output_bit: bool,
    pub valid: bool,
    /// α register contents after the cycle's clock edge.
    pub alphas: Vec<Grade>,
}

/// Result of one full inference on the simulated chip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inference {
    pub result: FuzzyVector,
    pub cycles: u64,
}

/// Full register state of the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipState {
    controller: Controller,
    paths: Vec<DataPath>,
    tree: MaxTree,
    valid: bool,
}

impl ChipState {
    fn new(config: ChipConfig) -> Self {
        Self {
            controller: Controller::new(config.schedule()),
            paths: vec![DataPath::default(); config.capacity],
            tree: MaxTree::new(config.capacity),
            valid: false,
        }
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn valid(&self) -> bool {
        self.valid
    }

    pub fn alphas(&self) -> Vec<Grade> {
        self.paths.iter().map(|p| p.alpha.value()).collect()
    }

    pub fn comparators_idle(&self) -> bool {
        self.paths.iter().all(|p| {
            p.intersect == ComparatorState::Undecided && p.clip == ComparatorState::Undecided
        })
    }
}

/// A chip with its rule memories programmed.
#[derive(Debug, Clone)]
pub struct Chip {
    config: ChipConfig,
    rom: RomImage,
    state: ChipState,
}

impl Chip {
    /// Builds a chip around a ROM image. The image's rule count becomes the
    /// data path count, so it must be a power of two.
    pub fn new(rom: RomImage) -> Result<Self, ChipError> {
        let config = ChipConfig::new(rom.elements(), rom.rule_count())?;
        Ok(Self {
            config,
            rom,
            state: ChipState::new(config),
        })
    }

    pub fn with_rules(rules: &RuleSet, config: ChipConfig) -> Result<Self, ChipError> {
        Self::new(build_rom(rules, config)?)
    }

    pub fn config(&self) -> ChipConfig {
        self.config
    }

    pub fn rom(&self) -> &RomImage {
        &self.rom
    }

    pub fn state(&self) -> &ChipState {
        &self.state
    }

    pub fn schedule(&self) -> Schedule {
        self.config.schedule()
    }

    /// Last completed cycle; 1 right after reset.
    pub fn cycle(&self) -> u64 {
        self.state.controller.cycle
    }

    pub fn phase(&self) -> Phase {
        self.state.controller.phase
    }

    /// Clears every register. The reset pulse itself occupies cycle 1.
    pub fn reset(&mut self) {
        self.state.controller.reset();
        for p in &mut self.state.paths {
            *p = DataPath::default();
        }
        self.state.tree.clear();
        self.state.valid = false;
    }

    /// Advances one clock cycle. `input_bit` is sampled only during the
    /// antecedent window.
    pub fn tick(&mut self, input_bit: bool) -> Result<TickOutput, ChipError> {
        if self.state.controller.phase == Phase::Done {
            return Err(ChipError::TickAfterDone);
        }
        let drive = self.state.controller.advance();

        let clipped: Vec<StreamBit> = self.state.paths.iter().map(|p| p.clip_out).collect();
        let out = self.state.tree.tick(&clipped);

        for (rule, path) in self.state.paths.iter_mut().enumerate() {
            path.clip_out = if path.rom_word.valid {
                let alpha_bit = path.alpha.recirculate();
                let (state, bit) = serial_min_step(
                    path.clip,
                    alpha_bit,
                    path.rom_word.bit,
                    path.rom_word.word_start,
                );
                path.clip = state;
                StreamBit { bit, ..path.rom_word }
            } else {
                StreamBit::IDLE
            };

            path.rom_word = match drive.conclusion {
                Some(addr) => StreamBit {
                    bit: self.rom.bit(Module::Conclusion, rule, addr),
                    word_start: addr % WORD_BITS == 0,
                    valid: true,
                },
                None => StreamBit::IDLE,
            };

            if let Some(addr) = drive.antecedent {
                let word_start = addr % WORD_BITS == 0;
                let stored = self.rom.bit(Module::Antecedent, rule, addr);
                let (state, bit) = serial_min_step(path.intersect, input_bit, stored, word_start);
                path.intersect = state;
                path.alpha.accumulate_bit(bit, word_start);
            }
        }

        self.state.valid = out.valid;
        Ok(TickOutput {
            output_bit: out.valid && out.bit,
            valid: out.valid,
        })
    }

    fn check_observation(&self, observation: &FuzzyVector) -> Result<Vec<bool>, ChipError> {
        if observation.len() != self.config.elements {
            return Err(ChipError::Dimension {
                expected: self.config.elements,
                found: observation.len(),
            });
        }
        Ok(observation
            .grades()
            .iter()
            .flat_map(|&g| SerialWord::from(g).bits())
            .collect())
    }

    fn drive<F>(&mut self, observation: &FuzzyVector, mut record: F) -> Result<Inference, ChipError>
    where
        F: FnMut(&ChipState, bool, TickOutput),
    {
        let stream = self.check_observation(observation)?;
        let schedule = self.schedule();
        self.reset();

        let mut out_bits = Vec::with_capacity(stream.len());
        while self.phase() != Phase::Done {
            let next = self.cycle() + 1;
            let input_bit = if (schedule.input_start..=schedule.input_end).contains(&next) {
                stream[(next - schedule.input_start) as usize]
            } else {
                false
            };
            let out = self.tick(input_bit)?;
            if out.valid {
                out_bits.push(out.output_bit);
            }
            record(&self.state, input_bit, out);
        }

        if out_bits.len() != stream.len() {
            return Err(ChipError::OutputLength {
                expected: stream.len(),
                found: out_bits.len(),
            });
        }
        let grades = out_bits
            .chunks_exact(WORD_BITS)
            .map(|c| SerialWord::from_bits([c[0], c[1], c[2], c[3]]).decode())
            .collect();
        Ok(Inference {
            result: FuzzyVector::new(grades).expect("element count validated"),
            cycles: self.cycle(),
        })
    }

    /// Drives the whole protocol (reset, idle cycle, serial input, pipeline,
    /// serial output) and decodes the conclusion.
    pub fn run_inference(&mut self, observation: &FuzzyVector) -> Result<Inference, ChipError> {
        self.drive(observation, |_, _, _| {})
    }

    /// As [`Chip::run_inference`], also recording one row per cycle, the
    /// reset cycle included.
    pub fn run_traced(
        &mut self,
        observation: &FuzzyVector,
    ) -> Result<(Inference, Vec<TraceRow>), ChipError> {
        let mut rows = vec![TraceRow {
            cycle: 1,
            phase: Phase::Idle,
            input_bit: false,
            output_bit: false,
            valid: false,
            alphas: vec![Grade::ZERO; self.config.capacity],
        }];
        let inference = self.drive(observation, |state, input_bit, out| {
            let phase = match state.controller.phase {
                // the row describes the cycle that just ran
                Phase::Done => Phase::Conclusion,
                p => p,
            };
            rows.push(TraceRow {
                cycle: state.controller.cycle,
                phase,
                input_bit,
                output_bit: out.output_bit,
                valid: out.valid,
                alphas: state.alphas(),
            });
        })?;
        Ok((inference, rows))
    }
}

/// Writes a trace as comma-separated text with a header row.
pub fn write_trace<W: Write>(rows: &[TraceRow], mut out: W) -> io::Result<()> {
    let paths = rows.first().map_or(0, |r| r.alphas.len());
    write!(out, "cycle,phase,input_bit,output_bit,valid")?;
    for i in 0..paths {
        write!(out, ",alpha_{i}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(
            out,
            "{},{},{},{},{}",
            row.cycle,
            row.phase,
            row.input_bit as u8,
            row.output_bit as u8,
            row.valid as u8
        )?;
        for a in &row.alphas {
            write!(out, ",{a}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{infer, match_degree, Rule};

    fn v(values: &[u8]) -> FuzzyVector {
        FuzzyVector::from_values(values).unwrap()
    }

    fn two_rules() -> RuleSet {
        RuleSet::new(vec![
            Rule::simple(v(&[15, 8, 0, 0]), v(&[0, 5, 10, 15])).unwrap(),
            Rule::simple(v(&[0, 8, 15, 4]), v(&[15, 10, 5, 0])).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ChipConfig::new(31, 16).is_ok());
        assert_eq!(ChipConfig::new(31, 12), Err(ChipError::InvalidCapacity(12)));
        assert_eq!(ChipConfig::new(31, 1), Err(ChipError::InvalidCapacity(1)));
        assert_eq!(ChipConfig::new(31, 128), Err(ChipError::InvalidCapacity(128)));
        assert_eq!(ChipConfig::new(1, 16), Err(ChipError::Elements(1)));
    }

    #[test]
    fn fabricated_schedule() {
        let s = ChipConfig::default().schedule();
        assert_eq!(s.input_start, 3);
        assert_eq!(s.input_end, 126);
        assert_eq!(s.pipeline_latency, 6);
        assert_eq!(s.first_valid, 133);
        assert_eq!(s.last_cycle, 256);

        let small = ChipConfig::new(4, 16).unwrap().schedule();
        assert_eq!((small.first_valid, small.last_cycle), (25, 40));
    }

    #[test]
    fn two_rule_example_matches_golden() {
        let rules = two_rules();
        let mut chip = Chip::with_rules(&rules, ChipConfig::new(4, 16).unwrap()).unwrap();
        let obs = v(&[4, 15, 6, 0]);
        let run = chip.run_inference(&obs).unwrap();
        assert_eq!(run.result, v(&[8, 8, 8, 8]));
        assert_eq!(run.result, infer(&rules, &[obs]).unwrap());
        assert_eq!(run.cycles, 40);
    }

    #[test]
    fn zero_observation_gives_zero_stream() {
        let mut chip = Chip::with_rules(&two_rules(), ChipConfig::new(4, 16).unwrap()).unwrap();
        let (run, trace) = chip.run_traced(&v(&[0, 0, 0, 0])).unwrap();
        assert_eq!(run.result, v(&[0, 0, 0, 0]));
        assert!(trace.iter().all(|r| !r.output_bit));
    }

    #[test]
    fn reset_clears_state() {
        let mut chip = Chip::with_rules(&two_rules(), ChipConfig::new(4, 16).unwrap()).unwrap();
        let obs = v(&[4, 15, 6, 0]);
        let fresh = chip.clone().run_traced(&obs).unwrap();

        chip.reset();
        for bit in [true, true, true, false, true, true, true, true, true, true, false, true, true, true, true] {
            chip.tick(bit).unwrap();
        }
        assert!(chip.state().alphas().iter().any(|a| a.value() > 0));
        chip.reset();
        assert!(chip.state().alphas().iter().all(|a| a.value() == 0));
        assert!(!chip.state().valid());
        assert!(chip.state().comparators_idle());
        assert_eq!(chip.cycle(), 1);
        assert_eq!(chip.phase(), Phase::Idle);

        assert_eq!(chip.run_traced(&obs).unwrap(), fresh);
    }

    #[test]
    fn tick_after_done_is_an_error() {
        let mut chip = Chip::with_rules(&two_rules(), ChipConfig::new(4, 16).unwrap()).unwrap();
        chip.run_inference(&v(&[1, 2, 3, 4])).unwrap();
        assert_eq!(chip.phase(), Phase::Done);
        assert_eq!(chip.tick(false), Err(ChipError::TickAfterDone));
    }

    #[test]
    fn dimension_error() {
        let mut chip = Chip::with_rules(&two_rules(), ChipConfig::new(4, 16).unwrap()).unwrap();
        assert_eq!(
            chip.run_inference(&v(&[1, 2, 3])).unwrap_err(),
            ChipError::Dimension { expected: 4, found: 3 }
        );
    }

    #[test]
    fn trace_shape_and_alphas() {
        let rules = two_rules();
        let mut chip = Chip::with_rules(&rules, ChipConfig::new(4, 16).unwrap()).unwrap();
        let obs = v(&[4, 15, 6, 0]);
        let (run, trace) = chip.run_traced(&obs).unwrap();
        assert_eq!(trace.len() as u64, run.cycles);
        for (i, row) in trace.iter().enumerate() {
            assert_eq!(row.cycle, i as u64 + 1);
            assert_eq!(row.valid, row.cycle >= 25);
        }
        let after_antecedents = &trace[18 - 1];
        assert_eq!(after_antecedents.cycle, 18);
        for (i, rule) in rules.rules().iter().enumerate() {
            let alpha = match_degree(&obs, &rule.antecedents()[0]).unwrap();
            assert_eq!(after_antecedents.alphas[i], alpha);
        }
        // α values survive the conclusion phase
        assert_eq!(trace.last().unwrap().alphas[0].value(), 8);

        let mut text = Vec::new();
        write_trace(&trace, &mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("cycle,phase,input_bit,output_bit,valid,alpha_0,"));
        assert!(header.ends_with(",alpha_15"));
        assert_eq!(lines.count(), 40);
    }

    #[test]
    fn input_before_cycle_three_is_ignored() {
        let rules = two_rules();
        let obs = v(&[4, 15, 6, 0]);
        let mut chip = Chip::with_rules(&rules, ChipConfig::new(4, 16).unwrap()).unwrap();
        chip.reset();
        let out = chip.tick(true).unwrap();
        assert!(!out.valid);
        assert!(chip.state().alphas().iter().all(|a| a.value() == 0));
        let expected = chip.clone().run_inference(&obs).unwrap();
        assert_eq!(expected.result, v(&[8, 8, 8, 8]));
    }
}
