//! Rule-set text documents and ROM image files.

mod romfile;
mod text;

pub use romfile::{rom_dump, rom_load, RomFileError, HEADER_LEN, MAGIC, VERSION};
pub use text::{parse_observations, parse_ruleset, serialize_ruleset, ParseError, ParseErrorKind};
