use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use margulis_core::fuchsian::{genus2_group, schottky_group, GroupPresentation, Word};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("config file is for command {file}, not {cli}")]
    CommandMismatch { file: Command, cli: Command },
    #[error("{field} = {value} is out of range: {expected}")]
    OutOfRange {
        field: &'static str,
        value: String,
        expected: &'static str,
    },
    #[error("bad word {word:?}: {reason}")]
    BadWord { word: String, reason: String },
    #[error("invalid group parameters: {0}")]
    Group(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Flatness,
    RepCheck,
    Margulis,
    Obstruct,
    Survey,
    Symmetry,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Flatness => "flatness",
            Command::RepCheck => "rep-check",
            Command::Margulis => "margulis",
            Command::Obstruct => "obstruct",
            Command::Survey => "survey",
            Command::Symmetry => "symmetry",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GroupName {
    Schottky,
    Genus2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TranslationMode {
    /// All generator translations zero.
    Zero,
    /// Seeded uniform entries in [-1, 1].
    Random,
    /// Holonomy of the bundle-valued form built from the Poincaré series.
    Holomorphic,
}

/// Partial configuration. The same fields are read from the JSON file and
/// from the command line; a flag replaces the file value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    /// Command the file was written for; checked against the subcommand.
    #[arg(skip)]
    pub command: Option<Command>,
    /// Bundle ranks n (comma separated). Dimension is 2n+1.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub group: Option<GroupName>,
    /// Schottky translation length.
    #[arg(long)]
    pub t: Option<f64>,
    /// Schottky angular separation of the generator axes.
    #[arg(long)]
    pub separation: Option<f64>,
    /// Longest word in class enumerations.
    #[arg(long)]
    pub maxlen: Option<usize>,
    /// Explicit word list (comma separated, e.g. aB,abC). Empty means enumerate.
    #[arg(long, value_delimiter = ',')]
    pub words: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// RK4 step for parallel transport.
    #[arg(long)]
    pub step: Option<f64>,
    /// Side of the square loops (flatness).
    #[arg(long)]
    pub side: Option<f64>,
    /// Word-length depth of the Poincaré series.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Degree m of the seed w^m of the Poincaré series.
    #[arg(long)]
    pub seed_degree: Option<u32>,
    /// Sample or word count, meaning depends on the command.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub translations: Option<TranslationMode>,
    /// Global sign applied to all neutral vectors (1 or -1).
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Directory for the report files.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Field-wise `self` over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            command: self.command.or(base.command),
            n: self.n.or(base.n),
            group: self.group.or(base.group),
            t: self.t.or(base.t),
            separation: self.separation.or(base.separation),
            maxlen: self.maxlen.or(base.maxlen),
            words: self.words.or(base.words),
            seed: self.seed.or(base.seed),
            step: self.step.or(base.step),
            side: self.side.or(base.side),
            depth: self.depth.or(base.depth),
            seed_degree: self.seed_degree.or(base.seed_degree),
            samples: self.samples.or(base.samples),
            translations: self.translations.or(base.translations),
            epsilon: self.epsilon.or(base.epsilon),
            output: self.output.or(base.output),
        }
    }
}

/// Fully resolved and validated configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: Vec<usize>,
    pub group: GroupName,
    pub t: f64,
    pub separation: f64,
    pub maxlen: usize,
    pub words: Vec<String>,
    pub seed: u64,
    pub step: f64,
    pub side: f64,
    pub depth: usize,
    pub seed_degree: u32,
    pub samples: usize,
    pub translations: TranslationMode,
    pub epsilon: f64,
    pub output: PathBuf,
}

pub const MAX_N: usize = 8;
pub const MAX_DEPTH: usize = 7;
pub const MAX_MAXLEN: usize = 10;
pub const MAX_SAMPLES: usize = 10_000_000;

fn out_of_range(
    field: &'static str,
    value: impl fmt::Debug,
    expected: &'static str,
) -> ConfigError {
    ConfigError::OutOfRange {
        field,
        value: format!("{value:?}"),
        expected,
    }
}

impl ExperimentConfig {
    /// Fills unset fields with the defaults of `command` and validates.
    pub fn resolve(command: Command, o: Overrides) -> Result<Self, ConfigError> {
        if let Some(file) = o.command {
            if file != command {
                return Err(ConfigError::CommandMismatch { file, cli: command });
            }
        }
        use Command::*;
        let (n, group, maxlen, samples, translations, depth) = match command {
            Flatness => (
                vec![1, 2, 3, 5],
                GroupName::Schottky,
                4,
                100,
                TranslationMode::Zero,
                6,
            ),
            RepCheck => (
                vec![1, 2, 3, 4],
                GroupName::Schottky,
                4,
                50,
                TranslationMode::Zero,
                6,
            ),
            Margulis => (
                vec![1, 2, 3],
                GroupName::Schottky,
                4,
                20,
                TranslationMode::Random,
                6,
            ),
            Obstruct => (
                vec![1],
                GroupName::Schottky,
                3,
                0,
                TranslationMode::Random,
                6,
            ),
            Survey => (
                vec![1],
                GroupName::Genus2,
                8,
                200,
                TranslationMode::Holomorphic,
                6,
            ),
            Symmetry => (
                vec![1],
                GroupName::Genus2,
                1,
                100_000,
                TranslationMode::Zero,
                6,
            ),
        };
        let cfg = ExperimentConfig {
            command,
            n: o.n.unwrap_or(n),
            group: o.group.unwrap_or(group),
            t: o.t.unwrap_or(2.0),
            separation: o.separation.unwrap_or(1.0),
            maxlen: o.maxlen.unwrap_or(maxlen),
            words: o.words.unwrap_or_default(),
            seed: o.seed.unwrap_or(1),
            step: o.step.unwrap_or(1e-3),
            side: o.side.unwrap_or(0.5),
            depth: o.depth.unwrap_or(depth),
            seed_degree: o.seed_degree.unwrap_or(0),
            samples: o.samples.unwrap_or(samples),
            translations: o.translations.unwrap_or(translations),
            epsilon: o.epsilon.unwrap_or(1.0),
            output: o.output.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n.is_empty() || self.n.iter().any(|&n| n == 0 || n > MAX_N) {
            return Err(out_of_range(
                "n",
                &self.n,
                "non-empty list of ranks in 1..=8",
            ));
        }
        if !(self.step > 0.0 && self.step <= 0.1) {
            return Err(out_of_range("step", self.step, "0 < step <= 0.1"));
        }
        if !(self.side > 0.0 && self.side <= 2.0) {
            return Err(out_of_range("side", self.side, "0 < side <= 2"));
        }
        if self.maxlen == 0 || self.maxlen > MAX_MAXLEN {
            return Err(out_of_range("maxlen", self.maxlen, "1..=10"));
        }
        if self.depth > MAX_DEPTH {
            return Err(out_of_range("depth", self.depth, "0..=7"));
        }
        if self.seed_degree > 64 {
            return Err(out_of_range("seed-degree", self.seed_degree, "0..=64"));
        }
        if self.samples > MAX_SAMPLES {
            return Err(out_of_range("samples", self.samples, "at most 10^7"));
        }
        if self.epsilon != 1.0 && self.epsilon != -1.0 {
            return Err(out_of_range("epsilon", self.epsilon, "1 or -1"));
        }
        if self.group == GroupName::Schottky {
            if !(self.t > 0.0 && self.t <= 20.0) {
                return Err(out_of_range("t", self.t, "0 < t <= 20"));
            }
            if !(self.separation > 0.0 && self.separation < std::f64::consts::PI) {
                return Err(out_of_range(
                    "separation",
                    self.separation,
                    "0 < separation < pi",
                ));
            }
        }
        let rank = self.group()?.rank();
        self.parsed_words(rank)?;
        match self.command {
            Command::RepCheck if self.samples < 1 => {
                return Err(out_of_range("samples", self.samples, "at least 1"));
            }
            Command::Margulis if self.samples < 1 && self.words.is_empty() => {
                return Err(out_of_range("samples", self.samples, "at least 1 word"));
            }
            Command::Survey | Command::Symmetry => {
                if self.group != GroupName::Genus2 {
                    return Err(ConfigError::Unsupported(format!(
                        "{} needs the genus-2 group",
                        self.command
                    )));
                }
                if self.depth < 1 {
                    return Err(out_of_range("depth", self.depth, "1..=7"));
                }
            }
            _ => {}
        }
        if self.command == Command::Symmetry {
            if self.n.iter().any(|n| n % 2 == 0) {
                return Err(out_of_range("n", &self.n, "odd ranks (q = n + 1 even)"));
            }
            if self.samples < 2 {
                return Err(out_of_range("samples", self.samples, "at least 2"));
            }
        }
        if self.translations == TranslationMode::Holomorphic && self.group != GroupName::Genus2 {
            return Err(ConfigError::Unsupported(String::from(
                "holomorphic translations need the genus-2 group",
            )));
        }
        Ok(())
    }

    pub fn group(&self) -> Result<GroupPresentation, ConfigError> {
        match self.group {
            GroupName::Genus2 => Ok(genus2_group()),
            GroupName::Schottky => schottky_group(self.t, self.separation)
                .map_err(|e| ConfigError::Group(e.to_string())),
        }
    }

    /// The explicit word list, each letter checked against the group rank.
    pub fn parsed_words(&self, rank: usize) -> Result<Vec<Word>, ConfigError> {
        let mut out = Vec::with_capacity(self.words.len());
        for s in &self.words {
            let w = Word::from_str(s).map_err(|e| ConfigError::BadWord {
                word: s.clone(),
                reason: e.to_string(),
            })?;
            if w.is_empty() {
                return Err(ConfigError::BadWord {
                    word: s.clone(),
                    reason: String::from("reduces to the identity"),
                });
            }
            if w.letters().iter().any(|l| l.unsigned_abs() as usize > rank) {
                return Err(ConfigError::BadWord {
                    word: s.clone(),
                    reason: format!("uses a generator beyond rank {rank}"),
                });
            }
            out.push(w);
        }
        Ok(out)
    }

    /// All fields set, suitable for writing back as a config file.
    pub fn to_overrides(&self) -> Overrides {
        Overrides {
            command: Some(self.command),
            n: Some(self.n.clone()),
            group: Some(self.group),
            t: Some(self.t),
            separation: Some(self.separation),
            maxlen: Some(self.maxlen),
            words: Some(self.words.clone()),
            seed: Some(self.seed),
            step: Some(self.step),
            side: Some(self.side),
            depth: Some(self.depth),
            seed_degree: Some(self.seed_degree),
            samples: Some(self.samples),
            translations: Some(self.translations),
            epsilon: Some(self.epsilon),
            output: Some(self.output.clone()),
        }
    }
}
