//! Run configuration in a small `key = value` format with `[section]` headers.
//!
//! ```text
//! # comments run to end of line
//! [wedge]
//! n = 3
//!
//! [packet]
//! center = 5, 3
//! momentum = 0, 0
//! beta = 1
//! m = 1
//! hbar = 1
//!
//! [times]
//! values = 0, 5, 10, 15       # or start:stop:step
//!
//! [grid]
//! k_sigma = 8                 # or explicit: x = 0, 12, 241 and y = 0, 10, 201
//!
//! [output]
//! artifacts = density, series, momentum1d, images
//! dir = out
//! gamma = 0.5
//!
//! [momentum1d]
//! n_samples = 65536
//! x_max = 120                 # optional, default x0 + 12 widths per time
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::gaussian::GaussianPacket2D;
use crate::images::WedgeSystem;
use crate::wavefunction::GridSpec;

/// Largest wedge index accepted from a configuration file.
pub const MAX_WEDGE_N: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },

    #[error("`{key}`: {message}")]
    Range { key: String, message: String },

    #[error("`{key}` must be strictly increasing")]
    Ordering { key: String },

    #[error("missing required key `{key}`")]
    Missing { key: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Artifact {
    Density,
    Series,
    Momentum1d,
    Images,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::Density => "density",
            Artifact::Series => "series",
            Artifact::Momentum1d => "momentum1d",
            Artifact::Images => "images",
        }
    }

    fn parse(s: &str) -> Option<Artifact> {
        match s {
            "density" => Some(Artifact::Density),
            "series" => Some(Artifact::Series),
            "momentum1d" => Some(Artifact::Momentum1d),
            "images" => Some(Artifact::Images),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridChoice {
    Auto { k_sigma: f64 },
    Explicit(GridSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSettings {
    pub n_samples: usize,
    pub x_max: Option<f64>,
}

impl Default for MomentumSettings {
    fn default() -> Self {
        MomentumSettings {
            n_samples: crate::momentum::DEFAULT_SAMPLES,
            x_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wedge_n: usize,
    pub center: (f64, f64),
    pub momentum: (f64, f64),
    pub beta: f64,
    pub m: f64,
    pub hbar: f64,
    pub times: Vec<f64>,
    pub grid: GridChoice,
    pub outputs: Vec<Artifact>,
    pub output_dir: PathBuf,
    pub gamma: f64,
    pub momentum1d: MomentumSettings,
}

impl RunConfig {
    pub fn packet(&self) -> crate::Result<GaussianPacket2D> {
        GaussianPacket2D::isotropic(self.center, self.momentum, self.beta, self.m, self.hbar)
    }

    pub fn system(&self) -> crate::Result<WedgeSystem> {
        WedgeSystem::new(self.wedge_n, self.packet()?)
    }

    /// Canonical text form; parses back to an equal value.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(out, "[wedge]\nn = {}\n", self.wedge_n);
        let _ = writeln!(
            out,
            "[packet]\ncenter = {:?}, {:?}\nmomentum = {:?}, {:?}\nbeta = {:?}\nm = {:?}\nhbar = {:?}\n",
            self.center.0, self.center.1, self.momentum.0, self.momentum.1, self.beta, self.m, self.hbar
        );
        let _ = writeln!(out, "[times]\nvalues = {}\n", list(&self.times));
        match self.grid {
            GridChoice::Auto { k_sigma } => {
                let _ = writeln!(out, "[grid]\nk_sigma = {k_sigma:?}\n");
            }
            GridChoice::Explicit(g) => {
                let _ = writeln!(
                    out,
                    "[grid]\nx = {:?}, {:?}, {}\ny = {:?}, {:?}, {}\n",
                    g.x_min, g.x_max, g.nx, g.y_min, g.y_max, g.ny
                );
            }
        }
        let artifacts: Vec<&str> = self.outputs.iter().map(|a| a.name()).collect();
        let _ = writeln!(
            out,
            "[output]\nartifacts = {}\ndir = {}\ngamma = {:?}\n",
            artifacts.join(", "),
            self.output_dir.display(),
            self.gamma
        );
        let _ = writeln!(
            out,
            "[momentum1d]\nn_samples = {}",
            self.momentum1d.n_samples
        );
        if let Some(x_max) = self.momentum1d.x_max {
            let _ = writeln!(out, "x_max = {x_max:?}");
        }
        out
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("wedge", &["n"]),
    ("packet", &["center", "momentum", "beta", "m", "hbar"]),
    ("times", &["values"]),
    ("grid", &["k_sigma", "x", "y"]),
    ("output", &["artifacts", "dir", "gamma"]),
    ("momentum1d", &["n_samples", "x_max"]),
];

struct Entry {
    line: usize,
    value: String,
}

#[derive(Default)]
struct Document {
    entries: Vec<((String, String), Entry)>,
}

impl Document {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|((s, k), _)| s == section && k == key)
            .map(|(_, e)| e)
    }
}

fn tokenize(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::default();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let Some(section) = section.as_deref() else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("key `{key}` appears before any [section]"),
            });
        };
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, k)| *k)
            .unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                section: section.to_string(),
                key: key.to_string(),
            });
        }
        if doc.get(section, key).is_some() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("empty value for `{key}`"),
            });
        }
        doc.entries.push((
            (section.to_string(), key.to_string()),
            Entry {
                line,
                value: value.to_string(),
            },
        ));
    }
    Ok(doc)
}

fn qualified(section: &str, key: &str) -> String {
    format!("{section}.{key}")
}

fn parse_number(entry: &Entry, token: &str) -> Result<f64, ConfigError> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| ConfigError::Syntax {
            line: entry.line,
            message: format!("`{}` is not a number", token.trim()),
        })
}

fn parse_count(entry: &Entry, token: &str) -> Result<usize, ConfigError> {
    token
        .trim()
        .parse::<usize>()
        .map_err(|_| ConfigError::Syntax {
            line: entry.line,
            message: format!("`{}` is not a non-negative integer", token.trim()),
        })
}

fn numbers(entry: &Entry) -> Result<Vec<f64>, ConfigError> {
    entry
        .value
        .split(',')
        .map(|t| parse_number(entry, t))
        .collect()
}

fn finite(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Range {
            key: key.into(),
            message: format!("must be finite, got {v}"),
        })
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::Range {
            key: key.into(),
            message: format!("must be positive, got {v}"),
        })
    }
}

fn pair(doc: &Document, section: &str, key: &str) -> Result<Option<(f64, f64)>, ConfigError> {
    let Some(entry) = doc.get(section, key) else {
        return Ok(None);
    };
    let v = numbers(entry)?;
    if v.len() != 2 {
        return Err(ConfigError::Syntax {
            line: entry.line,
            message: format!("`{key}` needs two comma-separated values"),
        });
    }
    Ok(Some((finite(key, v[0])?, finite(key, v[1])?)))
}

fn scalar(doc: &Document, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
    doc.get(section, key)
        .map(|entry| parse_number(entry, &entry.value))
        .transpose()
}

const MAX_TIMES: usize = 100_000;

fn parse_times(entry: &Entry) -> Result<Vec<f64>, ConfigError> {
    let value = entry.value.trim();
    let times = if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError::Syntax {
                line: entry.line,
                message: "range must be start:stop:step".into(),
            });
        }
        let start = finite("times", parse_number(entry, parts[0])?)?;
        let stop = finite("times", parse_number(entry, parts[1])?)?;
        let step = positive("times.step", parse_number(entry, parts[2])?)?;
        let count = ((stop - start) / step + 1e-9).floor();
        if !(count >= 0.0) || count > MAX_TIMES as f64 {
            return Err(ConfigError::Range {
                key: "times".into(),
                message: format!("range yields {count} steps"),
            });
        }
        (0..=count as usize)
            .map(|k| start + k as f64 * step)
            .collect()
    } else {
        numbers(entry)?
            .into_iter()
            .map(|t| finite("times", t))
            .collect::<Result<Vec<_>, _>>()?
    };
    if times.len() > MAX_TIMES {
        return Err(ConfigError::Range {
            key: "times".into(),
            message: format!("at most {MAX_TIMES} values"),
        });
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ConfigError::Ordering {
            key: "times".into(),
        });
    }
    Ok(times)
}

fn parse_axis(entry: &Entry, key: &str) -> Result<(f64, f64, usize), ConfigError> {
    let parts: Vec<&str> = entry.value.split(',').collect();
    if parts.len() != 3 {
        return Err(ConfigError::Syntax {
            line: entry.line,
            message: format!("`{key}` needs min, max, count"),
        });
    }
    let lo = finite(key, parse_number(entry, parts[0])?)?;
    let hi = finite(key, parse_number(entry, parts[1])?)?;
    let n = parse_count(entry, parts[2])?;
    Ok((lo, hi, n))
}

/// Largest explicit grid accepted from a configuration file.
const MAX_GRID_SAMPLES: usize = 1 << 26;

pub fn parse_run_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc = tokenize(text)?;
    let require = |section: &str, key: &str| {
        doc.get(section, key).ok_or_else(|| ConfigError::Missing {
            key: qualified(section, key),
        })
    };

    let n_entry = require("wedge", "n")?;
    let wedge_n = parse_count(n_entry, &n_entry.value)?;
    if !(1..=MAX_WEDGE_N).contains(&wedge_n) {
        return Err(ConfigError::Range {
            key: "n".into(),
            message: format!("wedge index must be in 1..={MAX_WEDGE_N}, got {wedge_n}"),
        });
    }

    require("packet", "center")?;
    let center = pair(&doc, "packet", "center")?.unwrap_or_default();
    let momentum = pair(&doc, "packet", "momentum")?.unwrap_or((0.0, 0.0));
    let beta = positive("beta", scalar(&doc, "packet", "beta")?.unwrap_or(1.0))?;
    let m = positive("m", scalar(&doc, "packet", "m")?.unwrap_or(1.0))?;
    let hbar = positive("hbar", scalar(&doc, "packet", "hbar")?.unwrap_or(1.0))?;

    let times = parse_times(require("times", "values")?)?;
    if times.is_empty() {
        return Err(ConfigError::Missing {
            key: "times.values".into(),
        });
    }

    let grid = match (doc.get("grid", "x"), doc.get("grid", "y")) {
        (Some(xe), Some(ye)) => {
            if doc.get("grid", "k_sigma").is_some() {
                return Err(ConfigError::Syntax {
                    line: xe.line,
                    message: "give either k_sigma or explicit x/y axes, not both".into(),
                });
            }
            let (x_min, x_max, nx) = parse_axis(xe, "x")?;
            let (y_min, y_max, ny) = parse_axis(ye, "y")?;
            if nx.saturating_mul(ny) > MAX_GRID_SAMPLES {
                return Err(ConfigError::Range {
                    key: "grid".into(),
                    message: format!("at most {MAX_GRID_SAMPLES} samples"),
                });
            }
            let spec = GridSpec::new(x_min, x_max, y_min, y_max, nx, ny).map_err(|e| {
                ConfigError::Range {
                    key: "grid".into(),
                    message: e.to_string(),
                }
            })?;
            GridChoice::Explicit(spec)
        }
        (None, None) => {
            let k_sigma =
                scalar(&doc, "grid", "k_sigma")?.unwrap_or(crate::observables::DEFAULT_K_SIGMA);
            if !(k_sigma >= 6.0 && k_sigma.is_finite()) {
                return Err(ConfigError::Range {
                    key: "k_sigma".into(),
                    message: format!("must be at least 6, got {k_sigma}"),
                });
            }
            GridChoice::Auto { k_sigma }
        }
        (Some(_), None) => {
            return Err(ConfigError::Missing {
                key: "grid.y".into(),
            })
        }
        (None, Some(_)) => {
            return Err(ConfigError::Missing {
                key: "grid.x".into(),
            })
        }
    };

    let outputs = match doc.get("output", "artifacts") {
        Some(entry) => {
            let mut list = Vec::new();
            for token in entry.value.split(',') {
                let token = token.trim();
                let artifact = Artifact::parse(token).ok_or_else(|| ConfigError::Syntax {
                    line: entry.line,
                    message: format!("unknown artifact `{token}`"),
                })?;
                if !list.contains(&artifact) {
                    list.push(artifact);
                }
            }
            list
        }
        None => vec![Artifact::Density],
    };
    let output_dir = doc
        .get("output", "dir")
        .map(|e| PathBuf::from(&e.value))
        .unwrap_or_else(|| PathBuf::from("out"));
    let gamma = positive("gamma", scalar(&doc, "output", "gamma")?.unwrap_or(1.0))?;

    let mut momentum1d = MomentumSettings::default();
    if let Some(entry) = doc.get("momentum1d", "n_samples") {
        let n = parse_count(entry, &entry.value)?;
        if n < crate::momentum::MIN_SAMPLES || !n.is_power_of_two() || n > 1 << 24 {
            return Err(ConfigError::Range {
                key: "n_samples".into(),
                message: format!("must be a power of two in [2^12, 2^24], got {n}"),
            });
        }
        momentum1d.n_samples = n;
    }
    if let Some(x_max) = scalar(&doc, "momentum1d", "x_max")? {
        momentum1d.x_max = Some(positive("x_max", x_max)?);
    }

    Ok(RunConfig {
        wedge_n,
        center,
        momentum,
        beta,
        m,
        hbar,
        times,
        grid,
        outputs,
        output_dir,
        gamma,
        momentum1d,
    })
}
