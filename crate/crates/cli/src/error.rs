use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Config { message: String, key: Option<String> },

    #[error(transparent)]
    Core(#[from] quasilevel::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Text between the backticks following `marker` in a serde message.
fn quoted_after<'a>(msg: &'a str, marker: &str) -> Option<&'a str> {
    let rest = &msg[msg.find(marker)? + marker.len()..];
    let rest = rest.strip_prefix('`')?;
    Some(&rest[..rest.find('`')?])
}

impl CliError {
    pub fn config(message: impl Into<String>, key: Option<&str>) -> Self {
        CliError::Config {
            message: message.into(),
            key: key.map(str::to_owned),
        }
    }

    pub fn from_parse(e: serde_json::Error) -> Self {
        let msg = e.to_string();
        let key = quoted_after(&msg, "unknown field ").or_else(|| quoted_after(&msg, "missing field "));
        CliError::config(format!("config: {msg}"), key)
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Config { key, .. } => key.as_deref(),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        use quasilevel::Error as E;
        match self {
            CliError::Config { .. } => "config",
            CliError::Core(E::InvalidArgument(_) | E::DimensionMismatch { .. }) => "config",
            CliError::Core(E::ResourceCap { .. }) => "resource_cap",
            CliError::Core(E::BracketInvalid(_)) => "bracket",
            CliError::Core(E::Precondition(_)) => "precondition",
            CliError::Core(E::NotFound { .. }) => "not_found",
            CliError::Core(E::Overflow) => "overflow",
            CliError::Io { .. } => "io",
        }
    }

    /// 2 config, 3 resource cap, 4 bracket or precondition, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "resource_cap" => 3,
            "bracket" | "precondition" => 4,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let Some(k) = self.key() {
            body["key"] = json!(k);
        }
        json!({ "error": body })
    }
}
