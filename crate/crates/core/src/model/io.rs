use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{ModelSpec, SmdpModel};
use crate::error::{Error, Result};

pub(crate) fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Parse(e.to_string()))
}

pub(crate) fn from_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub(crate) fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub(crate) fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_toml(value)?)?;
    Ok(())
}

impl ModelSpec {
    pub fn to_toml_string(&self) -> Result<String> {
        to_toml(self)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        from_toml(text)
    }
}

/// Reads and validates a model file.
pub fn read_model(path: impl AsRef<Path>) -> Result<SmdpModel> {
    SmdpModel::new(read_toml(path.as_ref())?)
}

pub fn write_model(path: impl AsRef<Path>, model: &SmdpModel) -> Result<()> {
    write_toml(path.as_ref(), model.spec())
}
