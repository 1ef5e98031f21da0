//! Run manifests: the full [`RunConfig`] as TOML, defaults included.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::experiment::RunConfig;

pub fn write_manifest<W: Write>(config: &RunConfig, mut sink: W) -> Result<()> {
    config.validate()?;
    let text = toml::to_string(config).map_err(|e| Error::Validation(e.to_string()))?;
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}

/// Every field is required; a missing or unknown key is a validation error.
pub fn read_manifest<R: Read>(mut source: R) -> Result<RunConfig> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let config: RunConfig = toml::from_str(&text).map_err(|e| Error::Validation(e.to_string()))?;
    config.validate()?;
    Ok(config)
}
