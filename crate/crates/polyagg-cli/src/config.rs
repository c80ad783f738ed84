//! Run configuration: the optional TOML config file, seed resolution, and
//! the effective-config echo written next to every command's outputs.
//!
//! Precedence for every parameter is command-line flag, then config file,
//! then built-in default. The global seed adds one more fallback level: the
//! `POLYAGG_SEED` environment variable sits between the config file and the
//! default of 0.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polyagg::{write_atomic, Error, Result};
use serde::{Deserialize, Serialize};

/// Environment variable consulted for the seed when neither `--seed` nor the
/// config file provides one.
pub const SEED_ENV_VAR: &str = "POLYAGG_SEED";

/// Parsed contents of a `--config` TOML file. Every field is optional; a
/// command reads its own section and ignores the rest. Unknown keys are
/// rejected so typos surface instead of being silently dropped.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub generate: Option<GenerateSection>,
    pub train: Option<TrainSection>,
    pub agglomerate: Option<AgglomerateSection>,
    pub hierarchy: Option<HierarchySection>,
    pub metrics: Option<MetricsSection>,
    pub bench: Option<BenchSection>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub kind: Option<String>,
    pub n: Option<usize>,
    pub count: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub manifest: Option<PathBuf>,
    pub val_manifest: Option<PathBuf>,
    pub learning_rate: Option<f64>,
    pub l2_coeff: Option<f64>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgglomerateSection {
    pub mesh: Option<PathBuf>,
    pub method: Option<String>,
    pub h_target: Option<String>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySection {
    pub mesh: Option<PathBuf>,
    pub method: Option<String>,
    pub factors: Option<Vec<f64>>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub mesh: Option<PathBuf>,
    pub agglomerations: Option<Vec<PathBuf>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub min_elements: Option<usize>,
    pub max_elements: Option<usize>,
    pub sizes: Option<usize>,
    pub samples: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Loads and parses a config file: JSON when the extension is `.json`, TOML
/// otherwise. Relative paths inside the file are interpreted relative to the
/// process working directory, not the file.
pub fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e
                .span()
                .map(|s| line_of_offset(&text, s.start))
                .unwrap_or(1),
            message: e.message().to_string(),
        })
    }
}

/// 1-based line number of byte `offset` in `text`.
fn line_of_offset(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

/// Resolves the run seed: `--seed` flag, then the config file's `seed` key,
/// then the `POLYAGG_SEED` environment variable, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file {
        return Ok(s);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!(
                "{SEED_ENV_VAR} must be an unsigned integer, got {raw:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::InvalidConfig(format!(
            "{SEED_ENV_VAR} is not valid unicode"
        ))),
    }
}

/// Returns `value` or a missing-parameter error naming both the flag and the
/// config-file key that could supply it.
pub fn require<T>(value: Option<T>, command: &str, key: &str) -> Result<T> {
    value.ok_or_else(|| {
        let flag = key.replace('_', "-");
        Error::InvalidConfig(format!(
            "{command}: missing required parameter `{key}` \
             (pass --{flag} or set [{command}].{key} in the config file)"
        ))
    })
}

/// Agglomeration size target: either an absolute diameter or a multiple of
/// the mesh size h₀, written `<k>h0` (e.g. `4h0`, `2.5h0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HTarget {
    Absolute(f64),
    RelativeToH0(f64),
}

impl HTarget {
    /// The absolute diameter this target denotes on a mesh of size `h0`.
    pub fn resolve(self, h0: f64) -> f64 {
        match self {
            HTarget::Absolute(h) => h,
            HTarget::RelativeToH0(k) => k * h0,
        }
    }
}

impl FromStr for HTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<HTarget> {
        let bad = || {
            Error::InvalidConfig(format!(
                "invalid size target {s:?}; expected a positive number \
                 (absolute diameter) or `<k>h0` (multiple of the mesh size)"
            ))
        };
        let (text, relative) = match s.trim().strip_suffix("h0") {
            Some(prefix) => (prefix, true),
            None => (s.trim(), false),
        };
        let value: f64 = text.parse().map_err(|_| bad())?;
        if !value.is_finite() || value <= 0.0 {
            return Err(bad());
        }
        Ok(if relative {
            HTarget::RelativeToH0(value)
        } else {
            HTarget::Absolute(value)
        })
    }
}

impl fmt::Display for HTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HTarget::Absolute(h) => write!(f, "{h}"),
            HTarget::RelativeToH0(k) => write!(f, "{k}h0"),
        }
    }
}

/// Path of the effective-config echo written next to `primary`: the same
/// file name with `.effective.toml` appended.
pub fn echo_path(primary: &Path) -> PathBuf {
    let name = primary
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    primary.with_file_name(format!("{name}.effective.toml"))
}

/// Writes the effective-config echo for a run: the command name, the
/// resolved seed, and the merged parameters the command actually used. The
/// echo lands next to the command's primary output (see [`echo_path`]) and
/// contains no timestamps, so identical runs produce identical echoes.
pub fn write_echo<T: Serialize>(primary: &Path, command: &str, seed: u64, params: &T) -> Result<()> {
    let encode = |e: toml::ser::Error| {
        Error::InvalidConfig(format!("cannot encode effective config: {e}"))
    };
    let mut doc = toml::Table::new();
    doc.insert("command".into(), toml::Value::String(command.into()));
    doc.insert("seed".into(), seed_value(seed));
    doc.insert(
        command.into(),
        toml::Value::try_from(params).map_err(encode)?,
    );
    let text = toml::to_string_pretty(&doc).map_err(encode)?;
    write_atomic(echo_path(primary), text.as_bytes())
}

/// TOML integers are signed; seeds beyond `i64::MAX` are echoed as strings.
fn seed_value(seed: u64) -> toml::Value {
    match i64::try_from(seed) {
        Ok(v) => toml::Value::Integer(v),
        Err(_) => toml::Value::String(seed.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_target_parses_absolute_and_relative_forms() {
        assert_eq!("0.25".parse::<HTarget>().unwrap(), HTarget::Absolute(0.25));
        assert_eq!(
            "4h0".parse::<HTarget>().unwrap(),
            HTarget::RelativeToH0(4.0)
        );
        assert_eq!(
            "2.5h0".parse::<HTarget>().unwrap(),
            HTarget::RelativeToH0(2.5)
        );
        assert_eq!(
            " 8h0 ".parse::<HTarget>().unwrap(),
            HTarget::RelativeToH0(8.0)
        );
    }

    #[test]
    fn h_target_rejects_garbage_and_nonpositive_values() {
        for bad in ["", "h0", "abc", "abch0", "-1", "0", "-2h0", "0h0", "infh0"] {
            assert!(bad.parse::<HTarget>().is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn h_target_resolves_against_the_mesh_size() {
        assert_eq!(HTarget::Absolute(0.3).resolve(0.1), 0.3);
        assert_eq!(HTarget::RelativeToH0(4.0).resolve(0.1), 0.4);
    }

    #[test]
    fn h_target_display_round_trips() {
        for s in ["0.25", "4h0", "2.5h0"] {
            let t: HTarget = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
            assert_eq!(t.to_string().parse::<HTarget>().unwrap(), t);
        }
    }

    #[test]
    fn echo_path_appends_the_suffix() {
        assert_eq!(
            echo_path(Path::new("out/model.json")),
            Path::new("out/model.json.effective.toml")
        );
        assert_eq!(
            echo_path(Path::new("manifest.json")),
            Path::new("manifest.json.effective.toml")
        );
    }

    #[test]
    fn large_seeds_are_echoed_as_strings() {
        assert_eq!(seed_value(7), toml::Value::Integer(7));
        assert_eq!(
            seed_value(u64::MAX),
            toml::Value::String(u64::MAX.to_string())
        );
    }

    #[test]
    fn config_files_parse_and_reject_unknown_keys() {
        let cfg: FileConfig = toml::from_str(
            "seed = 11\n[generate]\nkind = \"squares\"\nn = 8\ncount = 2\nout = \"meshes\"\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(11));
        let gen = cfg.generate.unwrap();
        assert_eq!(gen.kind.as_deref(), Some("squares"));
        assert_eq!(gen.n, Some(8));

        assert!(toml::from_str::<FileConfig>("[generate]\nknid = \"squares\"\n").is_err());
    }

    #[test]
    fn json_config_files_are_recognized_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            "{\"seed\": 4, \"agglomerate\": {\"method\": \"gnn\", \"h_target\": \"2h0\"}}",
        )
        .unwrap();
        let cfg = load_file_config(&path).unwrap();
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.agglomerate.unwrap().method.as_deref(), Some("gnn"));
    }

    #[test]
    fn parse_errors_carry_the_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "seed = 1\n[generate]\nn = \"not a number\"\n").unwrap();
        let err = load_file_config(&path).unwrap_err();
        match err {
            Error::Parse { path: p, line, .. } => {
                assert!(p.contains("bad.toml"));
                assert_eq!(line, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_parameters_name_flag_and_config_key() {
        let err = require::<usize>(None, "generate", "out").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("--out"), "{msg}");
        assert!(msg.contains("[generate].out"), "{msg}");
        assert_eq!(require(Some(3), "generate", "n").unwrap(), 3);
    }
}
