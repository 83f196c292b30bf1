//! Library side of the `negame` command: the game file format, the JSON
//! encodings of thresholds, bounds and witnesses, and the subcommands.

pub mod commands;
pub mod format;

pub use format::{parse_game, print_game};
