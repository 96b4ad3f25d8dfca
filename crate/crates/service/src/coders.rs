use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::ServiceError;

/// Coder tokens from a TOML file:
///
/// ```toml
/// [coders]
/// "token-for-first-coder" = 1
/// ```
#[derive(Debug, Clone, Default)]
pub struct Coders {
    by_token: HashMap<String, u32>,
}

#[derive(Deserialize)]
struct CoderFile {
    coders: HashMap<String, u32>,
}

impl Coders {
    pub fn new(by_token: HashMap<String, u32>) -> Self {
        Coders { by_token }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ServiceError> {
        let file: CoderFile = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        if let Some(t) = file.coders.keys().find(|t| t.trim().is_empty()) {
            return Err(ServiceError::Config(format!("empty token {t:?}")));
        }
        Ok(Coders::new(file.coders))
    }

    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn coder_for(&self, token: &str) -> Option<u32> {
        self.by_token.get(token).copied()
    }

    pub fn ids(&self) -> BTreeSet<u32> {
        self.by_token.values().copied().collect()
    }
}
