//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::RuleSet;

pub const MODEL_FORMAT: &str = "ruleforge-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    rule_set: RuleSet,
}

pub fn model_to_string(rs: &RuleSet) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        rule_set: rs.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Model(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_str(text: &str) -> Result<RuleSet> {
    #[derive(Deserialize)]
    struct Header {
        format: String,
        version: u32,
    }
    let header: Header = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
    if header.format != MODEL_FORMAT {
        return Err(Error::Model(format!("not a model file (format {:?})", header.format)));
    }
    if header.version != MODEL_VERSION {
        return Err(Error::Model(format!("unsupported model version {}", header.version)));
    }
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
    Ok(file.rule_set)
}

pub fn save_model(rs: &RuleSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(rs)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RuleSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
