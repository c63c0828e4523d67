//! `flips`: run the golden model, simulate the chip, cross-check the two and
//! benchmark throughput.
//!
//! Exit codes: 0 success, 1 equivalence check failed, 2 usage or validation
//! error, 3 I/O error.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use flips_core::chip::{build_rom, write_trace, Chip, ChipConfig, Module, DEFAULT_CAPACITY};
use flips_core::fuzzy::{infer, FuzzyVector, RuleSet, DEFAULT_ELEMENTS};
use flips_core::harness::{
    bench, check_equivalence, random_ruleset, trial_rng, CheckConfig, RomFault, DEFAULT_CLOCK_HZ,
};
use flips_core::io::{parse_observations, parse_ruleset, rom_dump, rom_load, serialize_ruleset};

#[derive(Parser)]
#[command(name = "flips", version, about = "Bit-serial fuzzy inference engine: golden model and cycle-accurate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Golden-model inference; prints C' as space-separated grades.
    Run {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Cycle-accurate chip simulation; prints C' and the cycle count.
    Sim {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Write a per-cycle trace (comma-separated, with header).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
    },
    /// Compare chip simulation and golden model on seeded random trials.
    Check(CheckArgs),
    /// Measure host throughput and report simulated-hardware FLIPS.
    Bench {
        /// Rule set to time; a seeded random full chip is used when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Total seconds per model, split over three timed repetitions.
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = DEFAULT_CLOCK_HZ)]
        clock_hz: u64,
        #[arg(long, default_value_t = DEFAULT_ELEMENTS)]
        elements: usize,
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pack a rule set into a FROM ROM image.
    Romdump {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
    },
    /// Read a FROM ROM image and print its rules in .frs form.
    Romload {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Fixed rule set; random rule sets are drawn per trial when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ELEMENTS)]
    elements: usize,
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    capacity: usize,
    /// Invert one conclusion-ROM bit before simulating.
    #[arg(long, hide = true)]
    flip_rom_bit: Option<usize>,
}

enum CliError {
    Io(PathBuf, io::Error),
    Invalid(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io(..) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Invalid(msg) => f.write_str(msg),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_rules(path: &Path) -> Result<RuleSet, CliError> {
    let text = read_text(path)?;
    parse_ruleset(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_observations(path: &Path, rules: &RuleSet) -> Result<Vec<FuzzyVector>, CliError> {
    let text = read_text(path)?;
    let obs = parse_observations(&text, rules.universe_size())
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if obs.len() != rules.antecedent_count() {
        return Err(CliError::Invalid(format!(
            "{}: {} observation rows, rule set has {} antecedents",
            path.display(),
            obs.len(),
            rules.antecedent_count()
        )));
    }
    Ok(obs)
}

fn chip_config(elements: usize, capacity: usize) -> Result<ChipConfig, CliError> {
    ChipConfig::new(elements, capacity).map_err(invalid)
}

fn execute(command: Command, out: &mut impl Write) -> Result<u8, CliError> {
    let stdout_err = |e| CliError::Io(PathBuf::from("<stdout>"), e);
    match command {
        Command::Run { rules, input } => {
            let rules = load_rules(&rules)?;
            let obs = load_observations(&input, &rules)?;
            let result = infer(&rules, &obs).map_err(invalid)?;
            writeln!(out, "{result}").map_err(stdout_err)?;
        }
        Command::Sim {
            rules,
            input,
            trace,
            capacity,
        } => {
            let rules = load_rules(&rules)?;
            let obs = load_observations(&input, &rules)?;
            let config = chip_config(rules.universe_size(), capacity)?;
            let mut chip = Chip::with_rules(&rules, config).map_err(invalid)?;
            let run = match trace {
                Some(path) => {
                    let (run, rows) = chip.run_traced(&obs[0]).map_err(invalid)?;
                    let file = fs::File::create(&path).map_err(|e| CliError::Io(path.clone(), e))?;
                    let mut w = BufWriter::new(file);
                    write_trace(&rows, &mut w)
                        .and_then(|_| w.flush())
                        .map_err(|e| CliError::Io(path.clone(), e))?;
                    run
                }
                None => chip.run_inference(&obs[0]).map_err(invalid)?,
            };
            writeln!(out, "{}", run.result).map_err(stdout_err)?;
            writeln!(out, "cycles={}", run.cycles).map_err(stdout_err)?;
        }
        Command::Check(args) => {
            let fixed = args.rules.as_deref().map(load_rules).transpose()?;
            let elements = fixed.as_ref().map_or(args.elements, |r| r.universe_size());
            if args.trials == 0 {
                return Err(invalid("--trials must be at least 1"));
            }
            let chip = chip_config(elements, args.capacity)?;
            let bits = chip.capacity() * chip.elements() * 4;
            let fault = match args.flip_rom_bit {
                Some(index) if index >= bits => {
                    return Err(CliError::Invalid(format!(
                        "--flip-rom-bit {index} outside the {bits}-bit conclusion module"
                    )))
                }
                Some(index) => Some(RomFault {
                    module: Module::Conclusion,
                    index,
                }),
                None => None,
            };
            let cfg = CheckConfig {
                trials: args.trials,
                seed: args.seed,
                chip,
                fault,
            };
            let report = check_equivalence(fixed.as_ref(), &cfg).map_err(invalid)?;
            write!(out, "{report}").map_err(stdout_err)?;
            if !report.passed() {
                return Ok(1);
            }
        }
        Command::Bench {
            rules,
            duration,
            clock_hz,
            elements,
            capacity,
            seed,
        } => {
            if !(duration >= 1.0 && duration.is_finite()) {
                return Err(invalid("--duration must be at least 1 second"));
            }
            if clock_hz == 0 {
                return Err(invalid("--clock-hz must be positive"));
            }
            let rules = match rules {
                Some(path) => load_rules(&path)?,
                None => {
                    chip_config(elements, capacity)?;
                    random_ruleset(&mut trial_rng(seed, u64::MAX), capacity, elements, 1)
                }
            };
            let config = chip_config(rules.universe_size(), capacity)?;
            let report = bench(
                &rules,
                config,
                clock_hz,
                Duration::from_secs_f64(duration),
                3,
                seed,
            )
            .map_err(invalid)?;
            write!(out, "{report}").map_err(stdout_err)?;
        }
        Command::Romdump {
            rules,
            output,
            capacity,
        } => {
            let rules = load_rules(&rules)?;
            let config = chip_config(rules.universe_size(), capacity)?;
            let image = build_rom(&rules, config).map_err(invalid)?;
            let bytes = rom_dump(&image).map_err(invalid)?;
            fs::write(&output, &bytes).map_err(|e| CliError::Io(output.clone(), e))?;
            writeln!(out, "rules={}", image.rule_count()).map_err(stdout_err)?;
            writeln!(out, "elements={}", image.elements()).map_err(stdout_err)?;
            writeln!(out, "bits_per_rule={}", image.bits_per_rule()).map_err(stdout_err)?;
            writeln!(out, "bytes={}", bytes.len()).map_err(stdout_err)?;
        }
        Command::Romload { input } => {
            let bytes = fs::read(&input).map_err(|e| CliError::Io(input.clone(), e))?;
            let image =
                rom_load(&bytes).map_err(|e| CliError::Invalid(format!("{}: {e}", input.display())))?;
            writeln!(out, "# rules={}", image.rule_count()).map_err(stdout_err)?;
            writeln!(out, "# elements={}", image.elements()).map_err(stdout_err)?;
            write!(out, "{}", serialize_ruleset(&image.to_rules())).map_err(stdout_err)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
