//! Settings resolution. Each value comes from the first source that sets
//! it: command-line flag, then environment variable, then the JSON config
//! file, then the built-in default.
//!
//! | setting     | env var          | default     |
//! |-------------|------------------|-------------|
//! | seed        | `GLC_SEED`       | 0           |
//! | host        | `GLC_HOST`       | `127.0.0.1` |
//! | port        | `GLC_PORT`       | 8080        |
//! | state_dir   | `GLC_STATE_DIR`  | none        |
//! | row_cap     | `GLC_ROW_CAP`    | 1000000     |
//! | restarts    | `GLC_RESTARTS`   | 16          |
//! | cors_origin | `GLC_CORS_ORIGIN`| any         |

use std::path::{Path, PathBuf};
use std::str::FromStr;

use glc_core::render::RenderSpec;
use glc_core::rules::FspConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub host: Option<String>,
    pub port: Option<u16>,
    pub state_dir: Option<PathBuf>,
    pub row_cap: Option<usize>,
    pub restarts: Option<usize>,
    pub cors_origin: Option<String>,
    pub cache_entries: Option<usize>,
    pub grid: Option<usize>,
    pub fsp: Option<FspConfig>,
    pub render: Option<RenderSpec>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct FlagConfig {
    pub seed: Option<u64>,
    pub host: Option<String>,
    pub port: Option<u16>,
    pub state_dir: Option<PathBuf>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub host: String,
    pub port: u16,
    pub state_dir: Option<PathBuf>,
    pub row_cap: usize,
    pub restarts: usize,
    pub cors_origin: Option<String>,
    pub cache_entries: usize,
    pub grid: usize,
    pub fsp: FspConfig,
    pub render: RenderSpec,
}

impl Default for Settings {
    fn default() -> Self {
        Self::resolve(&FlagConfig::default(), |_| None, &FileConfig::default()).expect("defaults resolve")
    }
}

fn from_env<T: FromStr>(env: &impl Fn(&str) -> Option<String>, key: &str) -> CliResult<Option<T>> {
    match env(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{key}={v} is not valid"))),
    }
}

impl Settings {
    /// `env` is a lookup such as `|k| std::env::var(k).ok()`.
    pub fn resolve(flags: &FlagConfig, env: impl Fn(&str) -> Option<String>, file: &FileConfig) -> CliResult<Self> {
        macro_rules! pick {
            ($flag:expr, $key:literal, $file:expr, $default:expr) => {
                match $flag {
                    Some(v) => v,
                    None => match from_env(&env, $key)? {
                        Some(v) => v,
                        None => $file.unwrap_or($default),
                    },
                }
            };
        }
        let state_dir = match flags.state_dir.clone() {
            Some(p) => Some(p),
            None => env("GLC_STATE_DIR").map(PathBuf::from).or_else(|| file.state_dir.clone()),
        };
        let cors_origin = env("GLC_CORS_ORIGIN").or_else(|| file.cors_origin.clone());
        let seed = pick!(flags.seed, "GLC_SEED", file.seed, 0);
        // one seed drives every seeded pipeline
        let fsp = FspConfig {
            seed,
            ..file.fsp.clone().unwrap_or_default()
        };
        Ok(Self {
            seed,
            host: pick!(flags.host.clone(), "GLC_HOST", file.host.clone(), "127.0.0.1".to_string()),
            port: pick!(flags.port, "GLC_PORT", file.port, 8080),
            state_dir,
            row_cap: pick!(None::<usize>, "GLC_ROW_CAP", file.row_cap, 1_000_000),
            restarts: pick!(flags.restarts, "GLC_RESTARTS", file.restarts, 16),
            cors_origin,
            cache_entries: file.cache_entries.unwrap_or(256),
            grid: file.grid.unwrap_or(glc_core::cpcr::DEFAULT_GRID),
            fsp,
            render: file.render.clone().unwrap_or_default(),
        })
    }
}
