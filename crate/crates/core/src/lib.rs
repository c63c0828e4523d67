//! Golden model and cycle-accurate simulator for a bit-serial min-max fuzzy
//! inference engine.
//!
//! - [`fuzzy`]: reference min-max inference over 4-bit grades.
//! - [`bitserial`]: serial min/max units, the α register and the max tree.
//! - [`chip`]: ROM images and the cycle-by-cycle engine model.
//! - [`io`]: `.frs` rule-set text and the `FROM` ROM container.
//! - [`harness`]: seeded equivalence checks and throughput measurement.

pub mod bitserial;
pub mod chip;
pub mod fuzzy;
pub mod harness;
pub mod io;

pub use chip::{build_rom, Chip, ChipConfig, ChipError, Inference, Phase, RomImage, TraceRow};
pub use fuzzy::{
    clip, height, infer, intersect, match_degree, rule_weight, union, FuzzyError, FuzzyVector,
    Grade, Rule, RuleSet,
};
