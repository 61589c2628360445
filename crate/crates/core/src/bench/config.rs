//! Flat `key = value` experiment configuration.
//!
//! Lines are `dotted.key = value`; `#` starts a comment; lists are
//! comma-separated. Unknown keys are rejected so typos surface early.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frames::TightFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Random,
    Harmonic,
    Identity,
    /// `random(n − k, N − k) ⊕ I_k` with `k = dict.identity_rows`.
    RandomPlusIdentity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictParams {
    pub construction: Construction,
    pub n: usize,
    pub big_n: usize,
    pub seed: u64,
    pub identity_rows: usize,
}

impl DictParams {
    pub fn build(&self) -> Result<TightFrame> {
        match self.construction {
            Construction::Random => TightFrame::random(self.n, self.big_n, self.seed),
            Construction::Harmonic => TightFrame::harmonic(self.n, self.big_n),
            Construction::Identity => TightFrame::identity(self.n),
            Construction::RandomPlusIdentity => {
                let k = self.identity_rows;
                if k == 0 || k >= self.n {
                    return Err(Error::Config(format!(
                        "dict.identity_rows must be in 1..{}, got {k}",
                        self.n
                    )));
                }
                let top = TightFrame::random(self.n - k, self.big_n - k, self.seed)?;
                Ok(TightFrame::block_diagonal(&top, &TightFrame::identity(k)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalClass {
    Synthesis,
    AnalysisEffective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    LpDirection,
    HtDirection,
    LpFull,
    SocpFull,
    HtFull,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::LpDirection,
        Algorithm::HtDirection,
        Algorithm::LpFull,
        Algorithm::SocpFull,
        Algorithm::HtFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LpDirection => "lp_direction",
            Algorithm::HtDirection => "ht_direction",
            Algorithm::LpFull => "lp_full",
            Algorithm::SocpFull => "socp_full",
            Algorithm::HtFull => "ht_full",
        }
    }

    /// Whether the algorithm estimates magnitude and needs thresholds.
    pub fn is_full(self) -> bool {
        matches!(self, Algorithm::LpFull | Algorithm::SocpFull | Algorithm::HtFull)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dict: DictParams,
    pub signal_class: SignalClass,
    pub s: usize,
    pub r: f64,
    pub m_grid: Vec<usize>,
    pub sigma: f64,
    pub dithered: bool,
    pub algorithms: Vec<Algorithm>,
    /// Level for `ht_direction`; `None` derives it from `epsilon` and `κ`.
    pub t: Option<usize>,
    /// Level for `ht_full`; `None` derives it from `epsilon`, `κ`, `r`, `σ`.
    pub t_full: Option<usize>,
    pub epsilon: f64,
    /// Ball radius for `socp_full`; defaults to `r`.
    pub radius: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub timing: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Spep,
    Rip1,
    Tes,
    Width,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropsConfig {
    pub dict: DictParams,
    pub s: usize,
    pub m_grid: Vec<usize>,
    pub properties: Vec<PropertyKind>,
    pub samples: usize,
    pub epsilon: f64,
    pub analysis_sphere: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "dict.construction",
    "dict.n",
    "dict.N",
    "dict.seed",
    "dict.identity_rows",
    "signal.class",
    "signal.s",
    "signal.r",
    "measure.m",
    "measure.sigma",
    "measure.dithered",
    "recover.algorithms",
    "recover.t",
    "recover.t_full",
    "recover.epsilon",
    "recover.radius",
    "run.trials",
    "run.seed",
    "run.out",
    "run.timing",
    "run.threads",
    "props.properties",
    "props.m",
    "props.s",
    "props.samples",
    "props.epsilon",
    "props.sphere",
    "props.seed",
    "props.out",
];

/// Parsed key-value pairs with line numbers for error messages.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {line_no}: expected `key = value`"))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {line_no}: unknown key {key:?}")));
            }
            if entries
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Config(format!("line {line_no}: duplicate key {key:?}")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        RawConfig::parse(&std::fs::read_to_string(path)?)
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| {
                Error::Config(format!("line {line}: cannot parse {key} = {v:?}"))
            }),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|item| {
                    item.trim().parse().map_err(|_| {
                        Error::Config(format!("line {line}: bad list item {item:?} in {key}"))
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some((line, v)) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::Config(format!("line {line}: {key} must be true or false"))),
            },
        }
    }

    fn dict(&self) -> Result<DictParams> {
        let construction = match self.get_or::<String>("dict.construction", "random".into())?.as_str() {
            "random" => Construction::Random,
            "harmonic" => Construction::Harmonic,
            "identity" => Construction::Identity,
            "random-plus-identity" => Construction::RandomPlusIdentity,
            other => return Err(Error::Config(format!("unknown dict.construction {other:?}"))),
        };
        let n: usize = self.require("dict.n")?;
        let big_n = match construction {
            Construction::Identity => self.get_or("dict.N", n)?,
            _ => self.require("dict.N")?,
        };
        Ok(DictParams {
            construction,
            n,
            big_n,
            seed: self.get_or("dict.seed", 0)?,
            identity_rows: self.get_or("dict.identity_rows", 0)?,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let signal_class = match self.get_or::<String>("signal.class", "synthesis".into())?.as_str() {
            "synthesis" => SignalClass::Synthesis,
            "analysis-effective" => SignalClass::AnalysisEffective,
            other => return Err(Error::Config(format!("unknown signal.class {other:?}"))),
        };
        let cfg = ExperimentConfig {
            dict: self.dict()?,
            signal_class,
            s: self.require("signal.s")?,
            r: self.get_or("signal.r", 1.0)?,
            m_grid: self.list("measure.m")?.ok_or_else(|| Error::Config("missing required key measure.m".into()))?,
            sigma: self.get_or("measure.sigma", 1.0)?,
            dithered: self.flag("measure.dithered", false)?,
            algorithms: self
                .list::<String>("recover.algorithms")?
                .ok_or_else(|| Error::Config("missing required key recover.algorithms".into()))?
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()?,
            t: self.get("recover.t")?,
            t_full: self.get("recover.t_full")?,
            epsilon: self.get_or("recover.epsilon", 0.5)?,
            radius: self.get("recover.radius")?,
            trials: self.get_or("run.trials", 1)?,
            seed: self.get_or("run.seed", 0)?,
            out: self.get::<String>("run.out")?.map(PathBuf::from),
            timing: self.flag("run.timing", true)?,
            threads: self.get("run.threads")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn props(&self) -> Result<PropsConfig> {
        let properties = self
            .list::<String>("props.properties")?
            .ok_or_else(|| Error::Config("missing required key props.properties".into()))?
            .iter()
            .map(|p| match p.as_str() {
                "spep" => Ok(PropertyKind::Spep),
                "rip1" => Ok(PropertyKind::Rip1),
                "tes" => Ok(PropertyKind::Tes),
                "width" => Ok(PropertyKind::Width),
                other => Err(Error::Config(format!("unknown property {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let analysis_sphere = match self.get_or::<String>("props.sphere", "synthesis".into())?.as_str() {
            "synthesis" => false,
            "analysis" => true,
            other => return Err(Error::Config(format!("unknown props.sphere {other:?}"))),
        };
        let cfg = PropsConfig {
            dict: self.dict()?,
            s: self.require("props.s")?,
            m_grid: self.list("props.m")?.ok_or_else(|| Error::Config("missing required key props.m".into()))?,
            properties,
            samples: self.get_or("props.samples", 200)?,
            epsilon: self.get_or("props.epsilon", 0.5)?,
            analysis_sphere,
            seed: self.get_or("props.seed", 0)?,
            out: self.get::<String>("props.out")?.map(PathBuf::from),
        };
        if cfg.m_grid.is_empty() || cfg.m_grid.contains(&0) {
            return Err(Error::Config("props.m must list positive sizes".into()));
        }
        if cfg.samples == 0 || cfg.properties.is_empty() || cfg.s == 0 {
            return Err(Error::Config("props needs samples ≥ 1, s ≥ 1 and a property".into()));
        }
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.experiment()
    }

    pub fn read(path: &Path) -> Result<Self> {
        RawConfig::read(path)?.experiment()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return bad("measure.m must list positive sizes".into());
        }
        if self.algorithms.is_empty() {
            return bad("recover.algorithms is empty".into());
        }
        if self.trials == 0 {
            return bad("run.trials must be at least 1".into());
        }
        if self.s == 0 {
            return bad("signal.s must be at least 1".into());
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return bad(format!("signal.r must be non-negative, got {}", self.r));
        }
        if self.dithered && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("measure.sigma must be positive, got {}", self.sigma));
        }
        if !self.dithered && self.algorithms.iter().any(|a| a.is_full()) {
            return bad("full-recovery algorithms need measure.dithered = true".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("recover.epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if self.t == Some(0) || self.t_full == Some(0) {
            return bad("threshold levels must be at least 1".into());
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return bad(format!("recover.radius must be positive, got {r}"));
            }
        }
        if self.threads == Some(0) {
            return bad("run.threads must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "
        # direction recovery
        dict.construction = random
        dict.n = 8
        dict.N = 12
        signal.s = 2
        measure.m = 50, 100
        recover.algorithms = ht_direction,lp_direction
        run.trials = 3
    ";

    #[test]
    fn parses_lists_defaults_and_comments() {
        let cfg = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.m_grid, vec![50, 100]);
        assert_eq!(
            cfg.algorithms,
            vec![Algorithm::HtDirection, Algorithm::LpDirection]
        );
        assert_eq!(cfg.r, 1.0);
        assert!(cfg.timing && !cfg.dithered);
        assert_eq!(cfg.dict.build().unwrap().cols(), 12);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            "dict.n = 8\ndict.N = 12\nsignal.s = 2\nmeasure.m = 50\nrecover.algorithms = lp_full",
            "dict.n = 8\ndict.N = 12\nsignal.s = 2\nmeasure.m = 50\nrecover.algorithms = ht_direction\nrun.trials = 0",
            "dict.n = 8\ndict.N = 12\nsignal.s = 2\nrecover.algorithms = ht_direction",
            "dict.n = 8\ndict.N = 12\nsignal.s = 2\nmeasure.m = 50\nrecover.algorithms = magic",
            "dict.n = 8\ndict.N = 12\nsignal.s = 2\nmeasure.m = 50\nrecover.algorithms = lp_full\nmeasure.dithered = true\nmeasure.sigma = 0",
            "dict.n = 8\nmesure.m = 50",
            "dict.n = 8\ndict.n = 9",
            "dict.n = eight",
            "no equals sign",
        ];
        for text in cases {
            assert!(
                matches!(ExperimentConfig::parse(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn block_construction() {
        let text = "dict.construction = random-plus-identity\ndict.n = 32\ndict.N = 48\ndict.identity_rows = 16\nsignal.s = 2\nmeasure.m = 10\nrecover.algorithms = ht_direction";
        let d = ExperimentConfig::parse(text).unwrap().dict.build().unwrap();
        assert_eq!((d.rows(), d.cols()), (32, 48));
        assert_eq!(d.matrix()[(31, 47)], 1.0);
    }

    #[test]
    fn props_section() {
        let text = "dict.n = 8\ndict.N = 12\nprops.properties = spep, tes\nprops.m = 100\nprops.s = 2\nprops.sphere = analysis";
        let p = RawConfig::parse(text).unwrap().props().unwrap();
        assert_eq!(p.properties, vec![PropertyKind::Spep, PropertyKind::Tes]);
        assert!(p.analysis_sphere);
    }
}
