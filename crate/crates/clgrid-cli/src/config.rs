//! Scenario configuration: TOML schema, validation, and resolution into the
//! library's typed inputs.
//!
//! Validation failures carry the offending key in the message; they map to
//! exit code 2.

use serde::{Deserialize, Serialize};

use clgrid::{Axis, DiffusionMode, ModelParams, StateSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn default_mass() -> f64 {
    1.0
}

fn default_hbar() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub params: ParamsSection,
    pub state: StateSection,
    pub grid: GridSection,
    pub times: TimesSection,
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub audit: AuditSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "default_mass")]
    pub mass: f64,
    pub gamma: f64,
    /// Zero selects the free-particle solution.
    pub omega: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub diffusion: DiffusionSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionSection {
    /// `D = 8 m gamma kt`
    HighTemperature { kt: f64 },
    /// `D = 8 m gamma hbar omega (n + 1/2)` with the Bose occupation at `kt`
    OscillatorBath { kt: f64 },
    /// `D` given directly
    Explicit { d: f64 },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSection {
    Gaussian {
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        p0: f64,
        sigma: f64,
    },
    Cat {
        #[serde(default)]
        x0: f64,
        separation: f64,
        #[serde(default)]
        p0: f64,
        sigma: f64,
        #[serde(default)]
        phase: f64,
    },
    Fock {
        n: usize,
    },
    Thermal {
        kt: f64,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub center_points: usize,
    pub offset_points: usize,
    pub center_halfwidth: f64,
    pub offset_halfwidth: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum TimesSection {
    List { values: Vec<f64> },
    Range { start: f64, stop: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    Observables,
    Density,
    Char,
    Wigner,
    Spectrum,
    Audit,
    OracleCompare,
}

fn default_spectrum_cutoff() -> usize {
    32
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub outputs: Vec<OutputKind>,
    /// Highest oscillator level kept in spectral projections.
    #[serde(default = "default_spectrum_cutoff")]
    pub spectrum_cutoff: usize,
}

fn default_stencil() -> u32 {
    4
}

fn default_safety() -> f64 {
    0.8
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_stencil")]
    pub stencil_order: u32,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Fixed step; omitted means the stability-bound automatic step.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub k_points: Option<usize>,
    #[serde(default)]
    pub r_points: Option<usize>,
    #[serde(default)]
    pub k_halfwidth: Option<f64>,
    #[serde(default)]
    pub r_halfwidth: Option<f64>,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            stencil_order: 4,
            safety: 0.8,
            dt: None,
            k_points: None,
            r_points: None,
            k_halfwidth: None,
            r_halfwidth: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub samples: usize,
    pub seed: u64,
    pub k_half: f64,
    pub r_half: f64,
    pub t_max: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0x0051_a7e5,
            k_half: 3.0,
            r_half: 3.0,
            t_max: 2.0,
        }
    }
}

/// A parsed, validated, fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ConfigFile,
    pub params: ModelParams,
    pub state: StateSpec,
    pub center: Axis,
    pub offset: Axis,
    pub times: Vec<f64>,
    pub outputs: Vec<OutputKind>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ConfigFile = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        Self::from_config(config)
    }

    pub fn from_config(config: ConfigFile) -> Result<Self, ConfigError> {
        let p = &config.params;
        let mode = match p.diffusion {
            DiffusionSection::HighTemperature { kt } => DiffusionMode::HighTemperature { kt },
            DiffusionSection::OscillatorBath { kt } => DiffusionMode::OscillatorBath { kt },
            DiffusionSection::Explicit { d } => DiffusionMode::Explicit { d },
        };
        let params = ModelParams::new(p.mass, p.gamma, p.omega, p.hbar, mode)
            .map_err(|e| ConfigError(format!("params: {e}")))?;

        let state = match config.state {
            StateSection::Gaussian { x0, p0, sigma } => StateSpec::Gaussian { x0, p0, sigma },
            StateSection::Cat {
                x0,
                separation,
                p0,
                sigma,
                phase,
            } => StateSpec::Cat {
                x0,
                separation,
                p0,
                sigma,
                phase,
            },
            StateSection::Fock { n } => StateSpec::Fock { n },
            StateSection::Thermal { kt } => StateSpec::Thermal { kt },
        };
        match &state {
            StateSpec::Gaussian { sigma, .. } if !(sigma.is_finite() && *sigma > 0.0) => {
                return Err(ConfigError("state.sigma must be positive".into()));
            }
            StateSpec::Cat {
                sigma, separation, ..
            } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(ConfigError("state.sigma must be positive".into()));
                }
                if !(separation.is_finite() && *separation > 0.0) {
                    return Err(ConfigError("state.separation must be positive".into()));
                }
            }
            StateSpec::Thermal { kt } if !(kt.is_finite() && *kt >= 0.0) => {
                return Err(ConfigError("state.kt must be nonnegative".into()));
            }
            _ => {}
        }

        let g = &config.grid;
        for (key, n) in [
            ("grid.center_points", g.center_points),
            ("grid.offset_points", g.offset_points),
        ] {
            if !n.is_power_of_two() || !(16..=1 << 16).contains(&n) {
                return Err(ConfigError(format!(
                    "{key} must be a power of two in [16, 65536] (got {n})"
                )));
            }
        }
        for (key, v) in [
            ("grid.center_halfwidth", g.center_halfwidth),
            ("grid.offset_halfwidth", g.offset_halfwidth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError(format!("{key} must be positive (got {v})")));
            }
        }
        let center = Axis::symmetric(g.center_points, g.center_halfwidth)
            .map_err(|e| ConfigError(format!("grid: {e}")))?;
        let offset = Axis::symmetric(g.offset_points, g.offset_halfwidth)
            .map_err(|e| ConfigError(format!("grid: {e}")))?;

        let times = match &config.times {
            TimesSection::List { values } => {
                if values.is_empty() {
                    return Err(ConfigError("times.values must not be empty".into()));
                }
                values.clone()
            }
            TimesSection::Range { start, stop, count } => {
                if !(1..=1_000_000).contains(count) {
                    return Err(ConfigError("times.count must lie in [1, 1000000]".into()));
                }
                if stop < start {
                    return Err(ConfigError(
                        "times.stop must not precede times.start".into(),
                    ));
                }
                (0..*count)
                    .map(|i| {
                        if *count == 1 {
                            *start
                        } else {
                            start + (stop - start) * i as f64 / (*count - 1) as f64
                        }
                    })
                    .collect()
            }
        };
        for (i, t) in times.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(ConfigError(format!(
                    "times[{i}] must be nonnegative (got {t})"
                )));
            }
            if i > 0 && times[i - 1] > *t {
                return Err(ConfigError(format!("times[{i}] breaks the sorted order")));
            }
        }

        if config.pipeline.outputs.is_empty() {
            return Err(ConfigError(
                "pipeline.outputs must name at least one output".into(),
            ));
        }
        if config.pipeline.spectrum_cutoff > 64 {
            return Err(ConfigError(format!(
                "pipeline.spectrum_cutoff must be <= 64 (got {})",
                config.pipeline.spectrum_cutoff
            )));
        }
        if !matches!(config.oracle.stencil_order, 2 | 4) {
            return Err(ConfigError(format!(
                "oracle.stencil_order must be 2 or 4 (got {})",
                config.oracle.stencil_order
            )));
        }
        let safety_ok = config.oracle.safety > 0.0 && config.oracle.safety <= 1.0;
        if !safety_ok {
            return Err(ConfigError(format!(
                "oracle.safety must lie in (0, 1] (got {})",
                config.oracle.safety
            )));
        }
        if let Some(dt) = config.oracle.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(ConfigError(format!(
                    "oracle.dt must be positive (got {dt})"
                )));
            }
        }
        for (key, n) in [
            ("oracle.k_points", config.oracle.k_points),
            ("oracle.r_points", config.oracle.r_points),
        ] {
            if let Some(n) = n {
                if !n.is_power_of_two() || n < 16 {
                    return Err(ConfigError(format!(
                        "{key} must be a power of two >= 16 (got {n})"
                    )));
                }
            }
        }
        if !(1..=1_000_000).contains(&config.audit.samples) {
            return Err(ConfigError("audit.samples must lie in [1, 1000000]".into()));
        }

        let mut outputs = config.pipeline.outputs.clone();
        outputs.sort();
        outputs.dedup();

        Ok(Scenario {
            params,
            state,
            center,
            offset,
            times,
            outputs,
            config,
        })
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }
}
