//! Run configuration: figure preset, then `key = value` file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use casimir_polder::{AtomParams, QuadratureConfig, ReleaseDistance, Units};

use crate::error::CliError;
use crate::grid::GridSpec;

/// Keys accepted in configuration files; flags use the same names with dashes.
pub const KEYS: [&str; 15] = [
    "preset",
    "omega0",
    "alpha0",
    "units",
    "r",
    "r0",
    "tau",
    "r_grid",
    "tau_grid",
    "trajectory",
    "out",
    "snapshot_out",
    "kmax",
    "tol",
    "tolerance_scale",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig1" => Some(Preset::Fig1),
            "fig2" => Some(Preset::Fig2),
            _ => None,
        }
    }

    fn defaults(self) -> Vec<(&'static str, String)> {
        let p = AtomParams::figure_preset();
        let mut v = vec![
            ("omega0", p.omega0.to_string()),
            ("alpha0", p.alpha0.to_string()),
            ("units", "c1".to_string()),
        ];
        match self {
            Preset::Fig1 => {
                v.push(("r", "3000".into()));
                v.push(("tau_grid", "0:12000:201".into()));
            }
            Preset::Fig2 => {
                v.push(("tau", "6000".into()));
                v.push(("r_grid", "100:6000:60:lin".into()));
            }
        }
        v
    }
}

/// Raw settings keyed by config name; later layers overwrite earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer(pub BTreeMap<String, String>);

impl Layer {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_owned(), value.to_string());
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut layer = Layer::default();
        for (no, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let bad = |reason: String| CliError::Config {
                file: origin.to_path_buf(),
                line: no + 1,
                reason,
            };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, found '{body}'")))?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(bad(format!("unknown key '{key}'")));
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(bad(format!("key '{key}' has no value")));
            }
            layer.set(&key, value);
        }
        Ok(layer)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: AtomParams,
    pub quadrature: QuadratureConfig,
    pub r: Option<f64>,
    pub r0: Option<ReleaseDistance>,
    pub tau: Option<f64>,
    pub r_grid: Option<GridSpec>,
    pub tau_grid: Option<GridSpec>,
    pub trajectory: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub snapshot_out: Option<PathBuf>,
    pub tolerance_scale: f64,
    /// Resolved raw settings, echoed into output headers.
    pub echo: BTreeMap<String, String>,
}

fn number(layer: &Layer, key: &str) -> Result<Option<f64>, CliError> {
    layer
        .get(key)
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{key}: '{s}' is not a number")))
        })
        .transpose()
}

impl RunConfig {
    /// Merges `preset < file < flags`; the preset itself may come from either.
    pub fn resolve(file: Option<Layer>, flags: Layer) -> Result<Self, CliError> {
        let file = file.unwrap_or_default();
        let preset = flags.get("preset").or(file.get("preset"));
        let mut merged = Layer::default();
        if let Some(name) = preset {
            let preset = Preset::parse(name)
                .ok_or_else(|| CliError::Usage(format!("unknown preset '{name}' (fig1 or fig2)")))?;
            for (k, v) in preset.defaults() {
                merged.set(k, v);
            }
        }
        for layer in [&file, &flags] {
            for (k, v) in &layer.0 {
                merged.set(k, v);
            }
        }

        let units = match merged.get("units").unwrap_or("c1") {
            "c1" => Units::LightUnits,
            "atomic" => Units::Atomic,
            other => return Err(CliError::Usage(format!("units: '{other}' is not c1 or atomic"))),
        };
        let omega0 = number(&merged, "omega0")?.unwrap_or(1.0);
        let alpha0 = number(&merged, "alpha0")?.unwrap_or(1.0);
        let params = AtomParams::with_units(omega0, alpha0, units)?;

        let mut quadrature = QuadratureConfig::default();
        if let Some(k) = number(&merged, "kmax")? {
            quadrature.k_max = k;
        }
        if let Some(t) = number(&merged, "tol")? {
            quadrature.rel_tol = t;
        }
        quadrature.validate()?;

        let r0 = merged
            .get("r0")
            .map(|s| ReleaseDistance::parse(s).ok_or_else(|| CliError::Usage(format!("r0: '{s}' is not a distance or inf"))))
            .transpose()?;
        let r_grid = merged.get("r_grid").map(GridSpec::parse_r).transpose()?;
        let tau_grid = merged.get("tau_grid").map(GridSpec::parse_tau).transpose()?;
        let path = |k: &str| merged.get(k).map(PathBuf::from);

        Ok(RunConfig {
            params,
            quadrature,
            r: number(&merged, "r")?,
            r0,
            tau: number(&merged, "tau")?,
            r_grid,
            tau_grid,
            trajectory: path("trajectory"),
            out: path("out"),
            snapshot_out: path("snapshot_out"),
            tolerance_scale: number(&merged, "tolerance_scale")?.unwrap_or(1.0),
            echo: merged.0,
        })
    }

    /// Distances from `r_grid`, else the single `r`.
    pub fn distances(&self) -> Result<Vec<f64>, CliError> {
        match (&self.r_grid, self.r) {
            (Some(g), _) => g.points(),
            (None, Some(r)) => Ok(vec![r]),
            (None, None) => Err(CliError::Usage("need --r or --r-grid".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Layer, CliError> {
        Layer::parse(text, Path::new("run.cfg"))
    }

    #[test]
    fn parses_comments_and_dashes() {
        let l = parse("# header\nomega0 = 2.5  # trailing\n\nr-grid=1:2:3:log\n").unwrap();
        assert_eq!(l.get("omega0"), Some("2.5"));
        assert_eq!(l.get("r_grid"), Some("1:2:3:log"));
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        match parse("omega0 = 1\nomga0 = 2\n") {
            Err(CliError::Config { line, reason, .. }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("omga0"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("just words\n"), Err(CliError::Config { line: 1, .. })));
    }

    #[test]
    fn flags_beat_file_beat_preset() {
        let mut file = Layer::default();
        file.set("preset", "fig1");
        file.set("r", "2000");
        file.set("alpha0", "5");
        let mut flags = Layer::default();
        flags.set("r", "1000");
        let cfg = RunConfig::resolve(Some(file), flags).unwrap();
        assert_eq!(cfg.r, Some(1000.0));
        assert_eq!(cfg.params.alpha0, 5.0);
        assert_eq!(cfg.params.omega0, AtomParams::figure_preset().omega0);
        assert_eq!(cfg.tau_grid.unwrap().points().unwrap().len(), 201);
    }
}
