//! Run configuration: a flat TOML document merged with command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{invalid, QslError, Result};
use crate::filtering::FilterOp;
use crate::models::{ChannelSpec, OhmicSpec, RtnSpec};
use crate::qsl::{QuadConfig, SweepSpec, Variant};

pub const DEFAULT_OMEGA_C: f64 = 1.0;
pub const DEFAULT_S: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_TAU_D: f64 = 1.0;
pub const DEFAULT_TAU_START: f64 = 0.0;
pub const DEFAULT_TAU_END: f64 = 10.0;
pub const DEFAULT_STEPS: usize = 400;
pub const DEFAULT_KS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(invalid("format", format!("expected csv, json or svg, got `{other}`"))),
        }
    }
}

/// Every optional setting, as read from a config file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub model: Option<String>,
    pub s: Option<f64>,
    pub omega_c: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub k: Option<Vec<f64>>,
    pub tau_start: Option<f64>,
    pub tau_end: Option<f64>,
    pub steps: Option<usize>,
    pub tau_d: Option<f64>,
    pub variant: Option<String>,
    pub points: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a config file; failures are reported against the `config` key.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| invalid("config", format!("{}: {}", path.display(), e.message())))
    }

    /// Fields set in `self` take precedence over `base`.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            model: self.model.or(base.model),
            s: self.s.or(base.s),
            omega_c: self.omega_c.or(base.omega_c),
            alpha: self.alpha.or(base.alpha),
            delta: self.delta.or(base.delta),
            k: self.k.or(base.k),
            tau_start: self.tau_start.or(base.tau_start),
            tau_end: self.tau_end.or(base.tau_end),
            steps: self.steps.or(base.steps),
            tau_d: self.tau_d.or(base.tau_d),
            variant: self.variant.or(base.variant),
            points: self.points.or(base.points),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }
}

/// A fully validated sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub channel: ChannelSpec,
    pub ks: Vec<f64>,
    pub tau_start: f64,
    pub tau_end: f64,
    pub steps: usize,
    pub tau_d: f64,
    pub variant: Variant,
    pub quad: QuadConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn reject_foreign(value: Option<f64>, key: &'static str, model: &str) -> Result<()> {
    match value {
        Some(_) => Err(invalid(key, format!("does not apply to model `{model}`"))),
        None => Ok(()),
    }
}

fn finite(value: f64, key: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, format!("must be finite, got {value}")))
    }
}

fn named(key: &'static str, r: Result<ChannelSpec>) -> Result<ChannelSpec> {
    r.map_err(|e| match e {
        QslError::InvalidParameter { reason, .. } => invalid(key, reason),
        other => other,
    })
}

impl RunConfig {
    pub fn resolve(p: PartialConfig) -> Result<Self> {
        let model = p.model.as_deref().unwrap_or("phase-damping");
        let channel = match model {
            "phase-damping" => {
                reject_foreign(p.alpha, "alpha", model)?;
                reject_foreign(p.delta, "delta", model)?;
                let s = p.s.unwrap_or(DEFAULT_S);
                let omega_c = p.omega_c.unwrap_or(DEFAULT_OMEGA_C);
                named("s", OhmicSpec::new(s, DEFAULT_OMEGA_C).map(ChannelSpec::PhaseDamping))?;
                named("omega_c", OhmicSpec::new(s, omega_c).map(ChannelSpec::PhaseDamping))?
            }
            "rtn" => {
                reject_foreign(p.s, "s", model)?;
                reject_foreign(p.omega_c, "omega_c", model)?;
                let alpha = p.alpha.ok_or_else(|| invalid("alpha", "required for model `rtn`"))?;
                let delta = p.delta.unwrap_or(DEFAULT_DELTA);
                named("alpha", RtnSpec::new(alpha, DEFAULT_DELTA).map(ChannelSpec::Rtn))?;
                named("delta", RtnSpec::new(alpha, delta).map(ChannelSpec::Rtn))?
            }
            other => {
                return Err(invalid(
                    "model",
                    format!("expected `phase-damping` or `rtn`, got `{other}`"),
                ))
            }
        };

        let ks = p.k.unwrap_or_else(|| DEFAULT_KS.to_vec());
        if ks.is_empty() {
            return Err(invalid("k", "at least one filter parameter is required"));
        }
        for &k in &ks {
            FilterOp::new(k).map_err(|_| invalid("k", format!("each value must lie in (0, 1), got {k}")))?;
        }
        let mut sorted = ks.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("k", "values must be distinct"));
        }

        let tau_start = finite(p.tau_start.unwrap_or(DEFAULT_TAU_START), "tau_start")?;
        let tau_end = finite(p.tau_end.unwrap_or(DEFAULT_TAU_END), "tau_end")?;
        if tau_start < 0.0 {
            return Err(invalid("tau_start", format!("must be nonnegative, got {tau_start}")));
        }
        if tau_end < tau_start {
            return Err(invalid(
                "tau_end",
                format!("must not precede tau_start = {tau_start}, got {tau_end}"),
            ));
        }
        let steps = p.steps.unwrap_or(DEFAULT_STEPS);
        if steps > MAX_STEPS {
            return Err(invalid("steps", format!("at most {MAX_STEPS}, got {steps}")));
        }
        if steps > 0 && tau_end == tau_start {
            return Err(invalid("steps", "must be 0 when tau_end equals tau_start"));
        }
        let tau_d = finite(p.tau_d.unwrap_or(DEFAULT_TAU_D), "tau_d")?;
        if tau_d <= 0.0 {
            return Err(invalid("tau_d", format!("must be positive, got {tau_d}")));
        }
        let variant: Variant = p.variant.as_deref().unwrap_or("paper").parse()?;
        let default_quad = QuadConfig::default();
        let quad = QuadConfig::new(
            p.points.unwrap_or(default_quad.points_per_window),
            default_quad.tolerance,
        )?;
        let format: Format = p.format.as_deref().unwrap_or("csv").parse()?;

        Ok(Self {
            channel,
            ks,
            tau_start,
            tau_end,
            steps,
            tau_d,
            variant,
            quad,
            out: p.out,
            format,
        })
    }

    /// Window starts `τ_start + i(τ_end − τ_start)/steps`, `i = 0..=steps`.
    pub fn taus(&self) -> Vec<f64> {
        if self.steps == 0 {
            return vec![self.tau_start];
        }
        let span = self.tau_end - self.tau_start;
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.tau_end
                } else {
                    self.tau_start + span * i as f64 / self.steps as f64
                }
            })
            .collect()
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            channel: self.channel,
            ks: self.ks.clone(),
            taus: self.taus(),
            tau_d: self.tau_d,
            cfg: self.quad,
        }
    }

    /// The configuration as TOML `key = value` lines, sorted as written.
    /// Output paths and format are omitted; they do not change the numbers.
    pub fn to_toml_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        match self.channel {
            ChannelSpec::PhaseDamping(spec) => {
                lines.push("model = \"phase-damping\"".to_string());
                lines.push(format!("s = {:?}", spec.s()));
                lines.push(format!("omega_c = {:?}", spec.omega_c()));
            }
            ChannelSpec::Rtn(spec) => {
                lines.push("model = \"rtn\"".to_string());
                lines.push(format!("alpha = {:?}", spec.alpha()));
                lines.push(format!("delta = {:?}", spec.delta()));
            }
        }
        let mut k = String::from("k = [");
        for (i, v) in self.ks.iter().enumerate() {
            if i > 0 {
                k.push_str(", ");
            }
            let _ = write!(k, "{v:?}");
        }
        k.push(']');
        lines.push(k);
        lines.push(format!("tau_start = {:?}", self.tau_start));
        lines.push(format!("tau_end = {:?}", self.tau_end));
        lines.push(format!("steps = {}", self.steps));
        lines.push(format!("tau_d = {:?}", self.tau_d));
        lines.push(format!("variant = \"{}\"", self.variant.as_str()));
        lines.push(format!("points = {}", self.quad.points_per_window));
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = RunConfig::resolve(PartialConfig::default()).unwrap();
        assert_eq!(cfg.taus().len(), 401);
        assert_eq!(cfg.ks, DEFAULT_KS.to_vec());
        assert_eq!(cfg.variant, Variant::Paper);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = PartialConfig::from_toml("model = \"rtn\"\nalpah = 2.0\n").unwrap_err();
        assert!(err.message().contains("alpah"), "{}", err.message());
    }

    #[test]
    fn errors_name_the_key() {
        let bad = |p: PartialConfig| match RunConfig::resolve(p).unwrap_err() {
            QslError::InvalidParameter { name, .. } => name,
            other => panic!("{other:?}"),
        };
        assert_eq!(
            bad(PartialConfig {
                s: Some(-1.5),
                ..Default::default()
            }),
            "s"
        );
        assert_eq!(
            bad(PartialConfig {
                omega_c: Some(0.0),
                ..Default::default()
            }),
            "omega_c"
        );
        assert_eq!(
            bad(PartialConfig {
                model: Some("rtn".into()),
                ..Default::default()
            }),
            "alpha"
        );
        assert_eq!(
            bad(PartialConfig {
                alpha: Some(1.0),
                ..Default::default()
            }),
            "alpha"
        );
        assert_eq!(
            bad(PartialConfig {
                k: Some(vec![0.5, 1.0]),
                ..Default::default()
            }),
            "k"
        );
        assert_eq!(
            bad(PartialConfig {
                tau_end: Some(-1.0),
                ..Default::default()
            }),
            "tau_end"
        );
        assert_eq!(
            bad(PartialConfig {
                tau_d: Some(0.0),
                ..Default::default()
            }),
            "tau_d"
        );
        assert_eq!(
            bad(PartialConfig {
                variant: Some("mt".into()),
                ..Default::default()
            }),
            "variant"
        );
        assert_eq!(
            bad(PartialConfig {
                points: Some(10),
                ..Default::default()
            }),
            "points"
        );
        assert_eq!(
            bad(PartialConfig {
                model: Some("bath".into()),
                ..Default::default()
            }),
            "model"
        );
    }

    #[test]
    fn flags_override_file() {
        let file = PartialConfig::from_toml("s = 0.5\nsteps = 3\nk = [0.2]\n").unwrap();
        let flags = PartialConfig {
            s: Some(3.5),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!(
            cfg.channel,
            ChannelSpec::PhaseDamping(OhmicSpec::new(3.5, 1.0).unwrap())
        );
        assert_eq!(cfg.steps, 3);
        assert_eq!(cfg.ks, vec![0.2]);
    }

    #[test]
    fn header_lines_round_trip() {
        let p = PartialConfig {
            model: Some("rtn".into()),
            alpha: Some(0.2),
            k: Some(vec![0.3, 0.7]),
            steps: Some(0),
            tau_start: Some(2.5),
            tau_end: Some(2.5),
            variant: Some("ml".into()),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(p).unwrap();
        let text = cfg.to_toml_lines().join("\n");
        let again = RunConfig::resolve(PartialConfig::from_toml(&text).unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(cfg.taus(), vec![2.5]);
    }
}
