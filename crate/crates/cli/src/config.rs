//! Flat `key = value` configuration files.
//!
//! ```text
//! # reference junction
//! junction.l0_nH    = 25
//! junction.c0_pF    = 1.2
//! junction.dc_ratio = 0.544
//! junction.fm_MHz   = 110
//! junction.q0       = 50      # or "inf" for a lossless junction
//! junction.z0_ohm   = 50
//! spec.alpha_dB     = 3
//! spec.beta_dB      = 20
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use stmcirc_core::junction::{JunctionParams, QReference, Quality};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: key.map(str::to_string),
            message: message.into(),
        }
    }

    fn key(key: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key '{k}': {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key '{k}': {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Explicit analysis grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub f_start: f64,
    pub f_stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub fm_range: (f64, f64),
    pub fm_points: usize,
    pub dc_range: (f64, f64),
    pub dc_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        use stmcirc_core::sweep::{DEFAULT_AXIS_POINTS, DEFAULT_DC_RANGE, DEFAULT_FM_RANGE};
        Self {
            fm_range: DEFAULT_FM_RANGE,
            fm_points: DEFAULT_AXIS_POINTS,
            dc_range: DEFAULT_DC_RANGE,
            dc_points: DEFAULT_AXIS_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub junction: JunctionParams,
    pub alpha_db: f64,
    pub beta_db: f64,
    pub grid: Option<GridConfig>,
    /// Fixed matching offset, Hz; `None` optimizes it.
    pub df: Option<f64>,
    /// Midpoint of the matching frequencies, Hz; defaults to the `B = 0` center.
    pub f_center: Option<f64>,
    /// Element quality factor applied when composing (synthesis stays lossless).
    pub filter_q: Option<f64>,
    pub sweep: SweepConfig,
}

const KNOWN_KEYS: &[&str] = &[
    "junction.l0_nH",
    "junction.c0_pF",
    "junction.dc_ratio",
    "junction.fm_MHz",
    "junction.q0",
    "junction.z0_ohm",
    "junction.q_reference",
    "spec.alpha_dB",
    "spec.beta_dB",
    "grid.f_start_MHz",
    "grid.f_stop_MHz",
    "grid.points",
    "synth.df_MHz",
    "synth.f_center_MHz",
    "synth.filter_q",
    "sweep.fm_min",
    "sweep.fm_max",
    "sweep.fm_points",
    "sweep.dc_min",
    "sweep.dc_max",
    "sweep.dc_points",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| ConfigError::at(*line, Some(key), format!("'{v}' is not a finite number"))),
        }
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.number(key)?
            .ok_or_else(|| ConfigError::key(key, "required key is missing"))
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError::at(*line, Some(key), format!("'{v}' is not a non-negative integer"))),
        }
    }

    fn positive(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v > 0.0 {
            Ok(v)
        } else {
            let line = self.raw(key).map(|(l, _)| *l);
            Err(ConfigError {
                line,
                key: Some(key.to_string()),
                message: format!("must be positive, got {v}"),
            })
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, None, format!("expected 'key = value', found '{content}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::at(line, Some(k), "empty key or value"));
        }
        if !KNOWN_KEYS.contains(&k) {
            return Err(ConfigError::at(line, Some(k), "unknown key"));
        }
        if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
            return Err(ConfigError::at(line, Some(k), format!("duplicate key (first set on line {first})")));
        }
    }
    Ok(Entries { map })
}

pub fn parse_config(text: &str) -> Result<DesignConfig, ConfigError> {
    let e = tokenize(text)?;
    const MHZ: f64 = 1e6;

    let l0 = e.positive("junction.l0_nH", e.required("junction.l0_nH")?)? / 1e9;
    let c0 = e.positive("junction.c0_pF", e.required("junction.c0_pF")?)? / 1e12;
    let dc = e.required("junction.dc_ratio")?;
    let fm = e.positive("junction.fm_MHz", e.required("junction.fm_MHz")?)? * MHZ;
    let q0 = match e.raw("junction.q0") {
        None => return Err(ConfigError::key("junction.q0", "required key is missing")),
        Some((_, v)) if v.eq_ignore_ascii_case("inf") => Quality::Lossless,
        Some(_) => Quality::Finite(e.positive("junction.q0", e.required("junction.q0")?)?),
    };
    let z0 = e.positive("junction.z0_ohm", e.required("junction.z0_ohm")?)?;
    let q_reference = match e.raw("junction.q_reference") {
        None => QReference::default(),
        Some((_, v)) if v == "modulated" => QReference::Modulated,
        Some((_, v)) if v == "static" => QReference::Static,
        Some((line, v)) => {
            return Err(ConfigError::at(
                *line,
                Some("junction.q_reference"),
                format!("expected 'modulated' or 'static', found '{v}'"),
            ))
        }
    };
    let junction = JunctionParams::new(l0, c0, dc, fm, q0, z0)
        .map_err(|err| ConfigError {
            line: None,
            key: Some("junction".into()),
            message: err.to_string(),
        })?
        .with_q_reference(q_reference);

    let alpha_db = e.positive("spec.alpha_dB", e.required("spec.alpha_dB")?)?;
    let beta_db = e.positive("spec.beta_dB", e.required("spec.beta_dB")?)?;

    let grid_keys = ["grid.f_start_MHz", "grid.f_stop_MHz", "grid.points"];
    let present = grid_keys.iter().filter(|k| e.raw(k).is_some()).count();
    let grid = match present {
        0 => None,
        3 => {
            let f_start = e.required("grid.f_start_MHz")? * MHZ;
            let f_stop = e.required("grid.f_stop_MHz")? * MHZ;
            let points = e.count("grid.points")?.unwrap_or(0);
            if !(f_start > 0.0 && f_stop > f_start) || points < 2 {
                return Err(ConfigError::key(
                    "grid",
                    "need 0 < f_start_MHz < f_stop_MHz and at least 2 points",
                ));
            }
            Some(GridConfig { f_start, f_stop, points })
        }
        _ => {
            return Err(ConfigError::key(
                "grid",
                "grid.f_start_MHz, grid.f_stop_MHz and grid.points must be given together",
            ))
        }
    };

    let df = match e.number("synth.df_MHz")? {
        Some(v) => Some(e.positive("synth.df_MHz", v)? * MHZ),
        None => None,
    };
    let f_center = match e.number("synth.f_center_MHz")? {
        Some(v) => Some(e.positive("synth.f_center_MHz", v)? * MHZ),
        None => None,
    };
    if f_center.is_some() && df.is_none() {
        return Err(ConfigError::key("synth.f_center_MHz", "requires synth.df_MHz"));
    }
    let filter_q = match e.number("synth.filter_q")? {
        Some(v) => Some(e.positive("synth.filter_q", v)?),
        None => None,
    };

    let d = SweepConfig::default();
    let sweep = SweepConfig {
        fm_range: (
            e.number("sweep.fm_min")?.unwrap_or(d.fm_range.0),
            e.number("sweep.fm_max")?.unwrap_or(d.fm_range.1),
        ),
        fm_points: e.count("sweep.fm_points")?.unwrap_or(d.fm_points),
        dc_range: (
            e.number("sweep.dc_min")?.unwrap_or(d.dc_range.0),
            e.number("sweep.dc_max")?.unwrap_or(d.dc_range.1),
        ),
        dc_points: e.count("sweep.dc_points")?.unwrap_or(d.dc_points),
    };

    Ok(DesignConfig {
        junction,
        alpha_db,
        beta_db,
        grid,
        df,
        f_center,
        filter_q,
        sweep,
    })
}

pub fn load_config(path: &Path) -> Result<DesignConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "junction.l0_nH = 25\njunction.c0_pF = 1.2\njunction.dc_ratio = 0.544\n\
                        junction.fm_MHz = 110\njunction.q0 = 50\njunction.z0_ohm = 50\n\
                        spec.alpha_dB = 3\nspec.beta_dB = 20\n";

    #[test]
    fn parses_reference_config() {
        let c = parse_config(BASE).unwrap();
        assert_eq!(c.junction, JunctionParams::reference());
        assert_eq!((c.alpha_db, c.beta_db), (3.0, 20.0));
        assert!(c.df.is_none() && c.grid.is_none() && c.filter_q.is_none());
    }

    #[test]
    fn comments_and_lossless() {
        let text = BASE.replace("junction.q0 = 50", "junction.q0 = inf  # ideal tanks") + "# trailing\n\n";
        let c = parse_config(&text).unwrap();
        assert_eq!(c.junction.q0, Quality::Lossless);
    }

    #[test]
    fn diagnostics_carry_line_and_key() {
        let err = parse_config(&BASE.replace("spec.beta_dB = 20", "spec.beta_dB = twenty")).unwrap_err();
        assert_eq!(err.line, Some(8));
        assert_eq!(err.key.as_deref(), Some("spec.beta_dB"));

        let err = parse_config(&format!("{BASE}junction.bogus = 1\n")).unwrap_err();
        assert_eq!(err.line, Some(9));

        let err = parse_config(&BASE.replace("junction.z0_ohm = 50\n", "")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("junction.z0_ohm"));

        let err = parse_config(&format!("{BASE}spec.alpha_dB = 2\n")).unwrap_err();
        assert!(err.message.contains("duplicate"));

        assert!(parse_config(&format!("{BASE}grid.points = 11\n")).is_err());
        assert!(parse_config(&format!("{BASE}synth.f_center_MHz = 1000\n")).is_err());
        assert!(parse_config("no equals sign\n").is_err());
    }

    #[test]
    fn units_are_converted() {
        let c = parse_config(&format!(
            "{BASE}synth.df_MHz = 73\nsynth.f_center_MHz = 1008.5\n\
             grid.f_start_MHz = 900\ngrid.f_stop_MHz = 1100\ngrid.points = 201\n"
        ))
        .unwrap();
        assert_eq!(c.df, Some(73e6));
        assert_eq!(c.f_center, Some(1008.5e6));
        assert_eq!(c.grid.unwrap().points, 201);
    }
}
