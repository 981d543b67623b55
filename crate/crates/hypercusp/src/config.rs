//! Flat `key = value` run configuration with command-line overrides.

use std::path::{Path, PathBuf};

use hypercusp_core::clifford::MAX_DIM;
use hypercusp_core::diffops::StencilSpec;
use hypercusp_core::fourier::DEFAULT_HEIGHTS;
use hypercusp_core::series::{SeriesKind, SeriesSpec, Summation};
use hypercusp_core::HalfSpacePoint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {value:?}")]
    BadValue { key: String, value: String },
    #[error("guard violated: {0}")]
    Guard(String),
    #[error("cannot read {0}: {1}")]
    Io(String, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub k: i32,
    pub p: usize,
    pub level: i64,
    pub radius: f64,
    /// Stencil step; `None` picks a step per operator.
    pub h: Option<f64>,
    pub order: u8,
    pub heights: Vec<f64>,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            k: -2,
            p: 2,
            level: 3,
            radius: 5.0,
            h: None,
            order: 4,
            heights: DEFAULT_HEIGHTS.to_vec(),
            grid: 24,
            samples: 1_000_000,
            seed: 1,
            output: None,
            format: OutputFormat::Json,
        }
    }
}

pub const KEYS: [&str; 13] = ["n", "k", "p", "N", "radius", "h", "order", "heights", "grid", "samples", "seed", "output", "format"];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

impl RunConfig {
    /// Defaults, then the file, then the overrides; validated at the end.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.into(),
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "n" => self.n = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "N" | "level" => self.level = parse(key, value)?,
            "radius" => self.radius = parse(key, value)?,
            "h" => self.h = if value == "auto" { None } else { Some(parse(key, value)?) },
            "order" => self.order = parse(key, value)?,
            "heights" => {
                self.heights = value.split(',').map(|s| parse(key, s.trim())).collect::<Result<_, _>>()?;
            }
            "grid" => self.grid = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "output" => self.output = if value.is_empty() || value == "-" { None } else { Some(PathBuf::from(value)) },
            "format" => {
                self.format = match value {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    _ => return Err(ConfigError::BadValue { key: key.into(), value: value.into() }),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Guards shared by all subcommands.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let guard = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(ConfigError::Guard(msg.into())) };
        guard(self.n >= 1 && self.n <= MAX_DIM, "n out of range")?;
        guard(self.k % 2 == 0, "k must be even")?;
        guard(self.p < self.n, "p must be at most n-1")?;
        guard(self.level >= 3, "level N must be at least 3")?;
        guard(self.radius > 0.0 && self.radius.is_finite(), "radius must be positive")?;
        self.stencil(0)?;
        guard(self.heights.iter().all(|h| *h > 0.0 && h.is_finite()), "heights must be positive")?;
        let mut hs = self.heights.clone();
        hs.sort_by(f64::total_cmp);
        guard(hs.windows(2).all(|w| w[0] != w[1]), "heights must be distinct")?;
        guard(self.grid >= 2, "grid must be at least 2")?;
        guard(self.samples >= 64, "samples must be at least 64")?;
        Ok(())
    }

    /// Stencil for an operator containing ∆^j.
    pub fn stencil(&self, j: u32) -> Result<StencilSpec, ConfigError> {
        let h = self.h.unwrap_or(StencilSpec::for_laplacian_power(j).h);
        StencilSpec::new(h, self.order).map_err(|e| ConfigError::Guard(e.to_string()))
    }

    /// Series spec for this config, with the series guards checked.
    pub fn series(&self, kind: SeriesKind, w: Option<HalfSpacePoint>, periodized: bool) -> Result<SeriesSpec, ConfigError> {
        let mut s = SeriesSpec::eisenstein(self.n, self.k, self.p, self.level, self.radius).with_kind(kind);
        s.w = w;
        if periodized {
            s = s.with_summation(Summation::Periodized);
        }
        s.validate().map_err(|e| ConfigError::Guard(e.to_string()))?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nn = 2\nk=-4\nheights = 0.5, 1, 2 # inline\nformat = csv\n", "t").unwrap();
        assert_eq!((c.n, c.k, c.format), (2, -4, OutputFormat::Csv));
        assert_eq!(c.heights, vec![0.5, 1.0, 2.0]);
        c.set("k", "-2").unwrap();
        assert_eq!(c.k, -2);
    }

    #[test]
    fn odd_k_names_the_guard() {
        let e = RunConfig::load(None, &[("k".into(), "3".into())]).unwrap_err();
        assert_eq!(e.to_string(), "guard violated: k must be even");
    }

    #[test]
    fn bad_lines() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("n 3", "f"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.set("colour", "red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.set("n", "three"), Err(ConfigError::BadValue { .. })));
        assert!(RunConfig::load(None, &[("order".into(), "3".into())]).is_err());
    }

    #[test]
    fn eisenstein_guard() {
        let c = RunConfig::load(None, &[("k".into(), "0".into())]).unwrap();
        let e = c.series(SeriesKind::Eisenstein, None, false).unwrap_err();
        assert!(e.to_string().contains("k < n-p-1"));
    }
}
