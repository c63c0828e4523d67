//! Seeded equivalence checking and throughput measurement.
//!
//! Random rule sets draw every grade independently and uniformly from 0..=15.
//! Trial `i` of a run seeded with `s` uses a ChaCha8 stream keyed by `s` on
//! stream number `i`, so any single trial can be replayed on its own and the
//! report does not depend on how trials are scheduled across threads.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chip::{build_rom, Chip, ChipConfig, ChipError, Module};
use crate::fuzzy::{infer, FuzzyVector, Grade, Rule, RuleSet, LEVELS};
use crate::io::serialize_ruleset;

/// Chip clock measured on the fabricated part, in Hz.
pub const DEFAULT_CLOCK_HZ: u64 = 20_800_000;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, elements: usize) -> FuzzyVector {
    let grades = (0..elements)
        .map(|_| Grade::new(rng.gen_range(0..LEVELS)).expect("in range"))
        .collect();
    FuzzyVector::new(grades).expect("caller passes a valid element count")
}

pub fn random_ruleset<R: Rng + ?Sized>(
    rng: &mut R,
    rules: usize,
    elements: usize,
    antecedents: usize,
) -> RuleSet {
    let rules = (0..rules)
        .map(|_| {
            let ants = (0..antecedents).map(|_| random_vector(rng, elements)).collect();
            Rule::new(ants, random_vector(rng, elements)).expect("consistent shapes")
        })
        .collect();
    RuleSet::new(rules).expect("at least one rule")
}

/// A single inverted ROM bit, injected after the image is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RomFault {
    pub module: Module,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub trials: u64,
    pub seed: u64,
    pub chip: ChipConfig,
    pub fault: Option<RomFault>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            chip: ChipConfig::default(),
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trial: u64,
    pub rules: RuleSet,
    pub observation: FuzzyVector,
    pub golden: FuzzyVector,
    pub chip: FuzzyVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub trials: u64,
    pub seed: u64,
    pub elements: usize,
    pub capacity: usize,
    pub failures: u64,
    pub first_failure: Option<Counterexample>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "elements={}", self.elements)?;
        writeln!(f, "rules={}", self.capacity)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "trials={}", self.trials)?;
        writeln!(f, "failures={}", self.failures)?;
        writeln!(f, "verdict={}", if self.passed() { "pass" } else { "fail" })?;
        if let Some(cx) = &self.first_failure {
            writeln!(f, "counterexample_trial={}", cx.trial)?;
            writeln!(f, "observation={}", cx.observation)?;
            writeln!(f, "golden={}", cx.golden)?;
            writeln!(f, "chip={}", cx.chip)?;
            for line in serialize_ruleset(&cx.rules).lines() {
                writeln!(f, "# {line}")?;
            }
        }
        Ok(())
    }
}

fn run_trial(
    trial: u64,
    fixed: Option<&RuleSet>,
    cfg: &CheckConfig,
) -> Result<Option<Counterexample>, ChipError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let elements = cfg.chip.elements();
    let rules = match fixed {
        Some(r) => r.clone(),
        None => random_ruleset(&mut rng, cfg.chip.capacity(), elements, 1),
    };
    let observation = random_vector(&mut rng, elements);

    let mut rom = build_rom(&rules, cfg.chip)?;
    if let Some(fault) = cfg.fault {
        rom.flip_bit(fault.module, fault.index);
    }
    let chip_out = Chip::new(rom)?.run_inference(&observation)?.result;
    let golden = infer(&rules, std::slice::from_ref(&observation)).expect("shapes checked by build_rom");
    Ok((chip_out != golden).then_some(Counterexample {
        trial,
        rules,
        observation,
        golden,
        chip: chip_out,
    }))
}

/// Compares the chip simulation with the golden model on seeded trials.
/// Trials run in parallel; results are merged in trial order.
pub fn check_equivalence(
    fixed: Option<&RuleSet>,
    cfg: &CheckConfig,
) -> Result<CheckReport, ChipError> {
    if let Some(rules) = fixed {
        build_rom(rules, cfg.chip)?;
    }
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(t, fixed, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let failures = outcomes.iter().filter(|o| o.is_some()).count() as u64;
    let first_failure = outcomes.into_iter().flatten().next();
    Ok(CheckReport {
        trials: cfg.trials,
        seed: cfg.seed,
        elements: cfg.chip.elements(),
        capacity: cfg.chip.capacity(),
        failures,
        first_failure,
    })
}

/// Inferences per second of the modeled hardware, kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulatedFlips {
    pub clock_hz: u64,
    pub cycles_per_inference: u64,
}

impl SimulatedFlips {
    pub fn new(clock_hz: u64, cycles_per_inference: u64) -> Self {
        assert!(cycles_per_inference > 0);
        Self {
            clock_hz,
            cycles_per_inference,
        }
    }

    pub fn whole(&self) -> u64 {
        self.clock_hz / self.cycles_per_inference
    }

    pub fn remainder(&self) -> u64 {
        self.clock_hz % self.cycles_per_inference
    }

    pub fn is_exact(&self) -> bool {
        self.remainder() == 0
    }

    pub fn as_f64(&self) -> f64 {
        self.clock_hz as f64 / self.cycles_per_inference as f64
    }
}

impl fmt::Display for SimulatedFlips {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.whole())
        } else {
            write!(f, "{:.3}", self.as_f64())
        }
    }
}

/// Host throughput over several timed repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipsRange {
    pub min: f64,
    pub max: f64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub elements: usize,
    pub capacity: usize,
    pub cycles_per_inference: u64,
    pub simulated: SimulatedFlips,
    pub host_golden: FlipsRange,
    pub host_chip: FlipsRange,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "elements={}", self.elements)?;
        writeln!(f, "rules={}", self.capacity)?;
        writeln!(f, "cycles_per_inference={}", self.cycles_per_inference)?;
        writeln!(f, "simulated_clock_hz={}", self.simulated.clock_hz)?;
        writeln!(f, "simulated_flips={}", self.simulated)?;
        for (name, r) in [("golden", self.host_golden), ("chip", self.host_chip)] {
            writeln!(f, "host_{name}_flips_min={:.0}", r.min)?;
            writeln!(f, "host_{name}_flips_max={:.0}", r.max)?;
            writeln!(f, "host_{name}_repetitions={}", r.repetitions)?;
        }
        Ok(())
    }
}

fn time_reps(total: Duration, reps: usize, mut step: impl FnMut(usize)) -> FlipsRange {
    let slice = total / reps as u32;
    let mut rates = Vec::with_capacity(reps);
    let mut i = 0usize;
    for _ in 0..reps {
        let start = Instant::now();
        let mut count = 0u64;
        loop {
            step(i);
            i += 1;
            count += 1;
            if start.elapsed() >= slice {
                break;
            }
        }
        rates.push(count as f64 / start.elapsed().as_secs_f64());
    }
    FlipsRange {
        min: rates.iter().copied().fold(f64::INFINITY, f64::min),
        max: rates.iter().copied().fold(0.0, f64::max),
        repetitions: reps,
    }
}

/// Times the golden model and the chip simulation on the same rule set, each
/// for `duration` split over `repetitions` timed slices, and reports them next
/// to the exact simulated-hardware figure.
pub fn bench(
    rules: &RuleSet,
    chip: ChipConfig,
    clock_hz: u64,
    duration: Duration,
    repetitions: usize,
    seed: u64,
) -> Result<BenchReport, ChipError> {
    let repetitions = repetitions.max(1);
    let mut sim = Chip::with_rules(rules, chip)?;
    let mut rng = trial_rng(seed, 0);
    let observations: Vec<FuzzyVector> = (0..64)
        .map(|_| random_vector(&mut rng, chip.elements()))
        .collect();

    let host_golden = time_reps(duration, repetitions, |i| {
        let obs = &observations[i % observations.len()];
        std::hint::black_box(infer(rules, std::slice::from_ref(obs)).expect("shapes checked"));
    });
    let host_chip = time_reps(duration, repetitions, |i| {
        let obs = &observations[i % observations.len()];
        std::hint::black_box(sim.run_inference(obs).expect("shapes checked"));
    });

    let cycles = chip.schedule().cycles_per_inference();
    Ok(BenchReport {
        elements: chip.elements(),
        capacity: chip.capacity(),
        cycles_per_inference: cycles,
        simulated: SimulatedFlips::new(clock_hz, cycles),
        host_golden,
        host_chip,
    })
}
