//! Network parsing, serialization and benchmark generators.

pub mod bif;
pub mod generate;
pub mod native;

use std::path::Path;

pub use bif::parse_bif_subset;
pub use generate::{generate, BenchmarkSpec};
pub use native::{parse_native, serialize_native, NetworkDocument};

use crate::error::{Error, Result};
use crate::network::Network;

/// Loads a network file, choosing the BIF reader for `.bif` files and the
/// native JSON reader otherwise.
pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_bif = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("bif"));
    if is_bif {
        parse_bif_subset(&text)
    } else {
        parse_native(&text)
    }
}

pub fn save_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, serialize_native(net)).map_err(|e| Error::io(path, e))
}
