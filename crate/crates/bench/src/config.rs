//! Flat `key = value` experiment configuration.

use singctrl_core::cascade::{Profile, Shape};
use singctrl_core::signals::WeightFn;
use std::fmt;
use std::path::PathBuf;

/// Sweep used when no `eps` list is configured.
pub const DESK_EPS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 5e-5, 1e-5];

/// Rows added by `--deep`.
pub const DEEP_EPS: [f64; 2] = [5e-6, 1e-6];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Named initial position; the initial velocity is always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Sin4,
    Zero,
    /// `sin(kπx)`.
    Sine(u32),
}

impl InitialData {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "sin4" => Ok(InitialData::Sin4),
            "zero" => Ok(InitialData::Zero),
            _ => s
                .strip_prefix("sine")
                .and_then(|k| k.parse::<u32>().ok())
                .filter(|k| *k > 0)
                .map(InitialData::Sine)
                .ok_or_else(|| ConfigError(format!("unknown initial data {s:?}"))),
        }
    }

    pub fn profile(self) -> Profile {
        match self {
            InitialData::Sin4 => Profile::new(Shape::Sin4, 1.0),
            InitialData::Zero => Profile::ZERO,
            InitialData::Sine(k) => Profile::new(Shape::Sine(k), 1.0),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Sin4 => write!(f, "sin4"),
            InitialData::Zero => write!(f, "zero"),
            InitialData::Sine(k) => write!(f, "sine{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub t_final: f64,
    pub a: f64,
    pub p: f64,
    pub data: InitialData,
    /// Explicit sweep; `None` selects [`DESK_EPS`], extended by [`DEEP_EPS`] under `deep`.
    pub eps: Option<Vec<f64>>,
    pub deep: bool,
    pub wave_elements: usize,
    /// Overrides the per-ε beam mesh; still subject to the resolution rule.
    pub beam_elements: Option<usize>,
    pub beam_steps: Option<usize>,
    /// `dt/h` of the wave grids built by `verify`; anything but 1 is refused by the solver.
    pub wave_courant: f64,
    pub out: PathBuf,
    pub seed: u64,
    /// When false the `seconds` column is written as 0 so outputs are byte-reproducible.
    pub timings: bool,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            t_final: 2.5,
            a: 40.0,
            p: 3.0,
            data: InitialData::Sin4,
            eps: None,
            deep: false,
            wave_elements: singctrl_core::cascade::DEFAULT_WAVE_ELEMENTS,
            beam_elements: None,
            beam_steps: None,
            wave_courant: 1.0,
            out: PathBuf::from("out"),
            seed: 2024,
            timings: true,
            jobs: 1,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError(format!("{key}: cannot parse {v:?}")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = ExperimentConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", no + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "T" => self.t_final = parse_num(key, v)?,
            "a" => self.a = parse_num(key, v)?,
            "p" => self.p = parse_num(key, v)?,
            "data" => self.data = InitialData::parse(v)?,
            "eps" => {
                let list = v.split(',').map(|s| parse_num(key, s.trim())).collect::<Result<Vec<f64>, _>>()?;
                self.eps = Some(list);
            }
            "deep" => self.deep = parse_num(key, v)?,
            "wave_elements" => self.wave_elements = parse_num(key, v)?,
            "beam_elements" => self.beam_elements = Some(parse_num(key, v)?),
            "beam_steps" => self.beam_steps = Some(parse_num(key, v)?),
            "wave_courant" => self.wave_courant = parse_num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seed = parse_num(key, v)?,
            "timings" => self.timings = parse_num(key, v)?,
            "jobs" => self.jobs = parse_num(key, v)?,
            _ => return Err(ConfigError(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_final > 2.0) {
            return Err(ConfigError(format!("T = {} must exceed 2", self.t_final)));
        }
        if let Some(list) = &self.eps {
            if list.is_empty() || list.iter().any(|e| !(*e > 0.0)) {
                return Err(ConfigError("eps list must be nonempty and positive".into()));
            }
        }
        if self.wave_elements < 2 || self.jobs == 0 {
            return Err(ConfigError("wave_elements ≥ 2 and jobs ≥ 1 required".into()));
        }
        if !(self.wave_courant > 0.0) {
            return Err(ConfigError("wave_courant must be positive".into()));
        }
        WeightFn::new(self.t_final, self.a, self.p).map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    pub fn weight(&self) -> WeightFn {
        WeightFn::new(self.t_final, self.a, self.p).expect("validated weight")
    }

    /// Effective sweep, largest ε first.
    pub fn eps_list(&self) -> Vec<f64> {
        let mut list = match &self.eps {
            Some(l) => l.clone(),
            None if self.deep => DESK_EPS.iter().chain(&DEEP_EPS).copied().collect(),
            None => DESK_EPS.to_vec(),
        };
        list.sort_by(|a, b| b.total_cmp(a));
        list.dedup();
        list
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_overrides() {
        let c = ExperimentConfig::parse("# sweep\nT = 3.0\neps = 1e-2, 1e-3 # two rows\n\ndata = sine2\n").unwrap();
        assert_eq!(c.t_final, 3.0);
        assert_eq!(c.eps_list(), vec![1e-2, 1e-3]);
        assert_eq!(c.data, InitialData::Sine(2));
        assert_eq!(c.a, 40.0);
    }

    #[test]
    fn bad_lines_are_rejected() {
        assert!(ExperimentConfig::parse("T 2.5").is_err());
        assert!(ExperimentConfig::parse("T = 1.5").is_err());
        assert!(ExperimentConfig::parse("eps = 1e-2, -1").is_err());
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("data = cos").is_err());
    }

    #[test]
    fn deep_extends_the_default_sweep() {
        let mut c = ExperimentConfig::default();
        assert_eq!(*c.eps_list().last().unwrap(), 1e-5);
        c.deep = true;
        assert_eq!(*c.eps_list().last().unwrap(), 1e-6);
        assert_eq!(c.eps_list().len(), 8);
    }

    #[test]
    fn data_names_round_trip() {
        for d in [InitialData::Sin4, InitialData::Zero, InitialData::Sine(3)] {
            assert_eq!(InitialData::parse(&d.to_string()).unwrap(), d);
        }
    }
}
