//! Experiment configuration files.
//!
//! Configs are JSON with a versioned `schema` field. Which fields are
//! required depends on the command; see the README for worked examples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::security::Security;
use crate::state::SpinState;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Run,
    AllStates,
    Sweep,
    Classify,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Run => "run",
            Mode::AllStates => "all-states",
            Mode::Sweep => "sweep",
            Mode::Classify => "classify",
            Mode::Verify => "verify",
        }
    }
}

/// A true state, either as a bitmask or as explicit spins `[1, -1, ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Bits(u32),
    Spins(Vec<i8>),
}

impl StateSpec {
    pub fn resolve(&self, n: u32) -> Result<SpinState> {
        match self {
            StateSpec::Bits(bits) => SpinState::new(n, *bits),
            StateSpec::Spins(spins) => {
                let s = SpinState::from_spins(spins)?;
                if s.n_players() != n {
                    return Err(Error::InvalidArgument(format!(
                        "true state lists {} spins but the experiment has {n} players",
                        s.n_players()
                    )));
                }
                Ok(s)
            }
        }
    }
}

/// One experiment definition. Identical configs (and seeds) produce
/// byte-identical outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// Optional mode tag; when present it must match the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Optional player count; when present it must match the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub security: Option<Security>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Prior>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_state: Option<StateSpec>,
    /// Sweep grid: securities × (priors + seeded random priors).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub securities: Vec<Security>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub priors: Vec<Prior>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub random_priors: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
    /// Verification suite name (`verify` mode): `A1`..`A9` or `all`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Default output path; the `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("config does not match the schema: {e}")))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    /// Enforces the optional mode tag against the invoked subcommand.
    pub fn check_mode(&self, invoked: Mode) -> Result<()> {
        if let Some(mode) = self.mode {
            if mode != invoked {
                return Err(Error::InvalidArgument(format!(
                    "config is tagged for mode '{}' but the '{}' command was invoked",
                    mode.name(),
                    invoked.name()
                )));
            }
        }
        Ok(())
    }

    /// Checks the optional explicit player count against the instance.
    pub fn check_n(&self, actual: u32) -> Result<()> {
        if let Some(n) = self.n {
            if n != actual {
                return Err(Error::InvalidArgument(format!(
                    "config declares n={n} but the instance has {actual} players"
                )));
            }
        }
        Ok(())
    }
}
