//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::model::{BatteryParams, Drive};
use crate::propagate::Protocol;
use crate::sweep::{GridSpec, SurfaceMode};
use crate::{Error, Result};

/// Every field is optional; commands fill in their own defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub delta: Option<f64>,
    pub amp: Option<f64>,
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
    pub n: Option<usize>,
    pub drive: Option<Drive>,
    pub protocol: Option<Protocol>,
    pub t_range: Option<GridSpec>,
    pub a_range: Option<GridSpec>,
    pub omega_range: Option<GridSpec>,
    pub lambda_range: Option<GridSpec>,
    pub n_list: Option<Vec<usize>>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub mode: Option<SurfaceMode>,
}

pub const KEYS: [&str; 15] = [
    "delta",
    "amp",
    "omega",
    "lambda",
    "n",
    "drive",
    "protocol",
    "t_range",
    "a_range",
    "omega_range",
    "lambda_range",
    "n_list",
    "workers",
    "out",
    "mode",
];

pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad atom number `{p}`")))
        })
        .collect()
}

fn mode_name(m: SurfaceMode) -> &'static str {
    match m {
        SurfaceMode::AnalyticLocked => "analytic",
        SurfaceMode::Numeric => "numeric",
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Config {
                    line,
                    key: body.into(),
                    msg: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(Error::Config {
                    line,
                    key: key.into(),
                    msg: "duplicate key".into(),
                });
            }
            cfg.set(key, value).map_err(|e| Error::Config {
                line,
                key: key.into(),
                msg: match e {
                    Error::Invalid(m) => m,
                    other => other.to_string(),
                },
            })?;
            seen.push(KEYS.iter().find(|k| **k == key).copied().unwrap_or(""));
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let float = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Invalid(format!("expected a number, got `{v}`")))
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Invalid(format!("expected a non-negative integer, got `{v}`")))
        };
        match key {
            "delta" => self.delta = Some(float(value)?),
            "amp" => self.amp = Some(float(value)?),
            "omega" => self.omega = Some(float(value)?),
            "lambda" => self.lambda = Some(float(value)?),
            "n" => self.n = Some(count(value)?),
            "drive" => self.drive = Some(value.parse()?),
            "protocol" => self.protocol = Some(value.parse()?),
            "t_range" => self.t_range = Some(value.parse()?),
            "a_range" => self.a_range = Some(value.parse()?),
            "omega_range" => self.omega_range = Some(value.parse()?),
            "lambda_range" => self.lambda_range = Some(value.parse()?),
            "n_list" => self.n_list = Some(parse_n_list(value)?),
            "workers" => self.workers = Some(count(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "mode" => self.mode = Some(value.parse()?),
            _ => return Err(Error::Invalid("unknown key".into())),
        }
        Ok(())
    }

    /// Fields set in `other` replace those here.
    pub fn overlay(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(
            delta,
            amp,
            omega,
            lambda,
            n,
            drive,
            protocol,
            t_range,
            a_range,
            omega_range,
            lambda_range,
            n_list,
            workers,
            out,
            mode
        );
    }

    /// Set fields only, one per line, in [`KEYS`] order.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        };
        put("delta", self.delta.map(|v| v.to_string()));
        put("amp", self.amp.map(|v| v.to_string()));
        put("omega", self.omega.map(|v| v.to_string()));
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("drive", self.drive.map(|v| v.as_str().to_string()));
        put("protocol", self.protocol.map(|v| v.as_str().to_string()));
        put("t_range", self.t_range.map(|v| v.to_string()));
        put("a_range", self.a_range.map(|v| v.to_string()));
        put("omega_range", self.omega_range.map(|v| v.to_string()));
        put("lambda_range", self.lambda_range.map(|v| v.to_string()));
        put(
            "n_list",
            self.n_list
                .as_ref()
                .map(|l| l.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
        );
        put("workers", self.workers.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("mode", self.mode.map(|m| mode_name(m).to_string()));
        s
    }

    /// Battery parameters with `default_n` atoms unless `n` is set.
    pub fn params(&self, default_n: usize) -> Result<BatteryParams> {
        let delta = self.delta.unwrap_or(1.0);
        let p = BatteryParams {
            delta,
            amp: self.amp.unwrap_or(1.0),
            omega: self.omega.unwrap_or(delta),
            g: self.lambda.unwrap_or(0.0) * delta,
            n_atoms: self.n.unwrap_or(default_n),
            drive: self.drive.unwrap_or(Drive::Harmonic),
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            delta: Some(1.0),
            amp: Some(0.1 + 0.2),
            omega: Some(0.7),
            lambda: Some(-1.2),
            n: Some(140),
            drive: Some(Drive::Static),
            protocol: Some(Protocol::FixedFrequency),
            t_range: Some(GridSpec::new(0.5, 30.0, 400)),
            a_range: Some(GridSpec::new(0.05, 2.0, 80)),
            omega_range: Some(GridSpec::new(0.05, 1.5, 120)),
            lambda_range: Some(GridSpec::new(-2.0, 2.0, 81)),
            n_list: Some(vec![20, 40, 60]),
            workers: Some(3),
            out: Some("runs/a b.csv".into()),
            mode: Some(SurfaceMode::Numeric),
        };
        let text = cfg.to_config_string();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::parse("# header\n\n n = 8 # atoms\namp=0.5\n").unwrap();
        assert_eq!(cfg.n, Some(8));
        assert_eq!(cfg.amp, Some(0.5));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::parse("n = 2\nampl = 1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Config {
                line: 2,
                key: "ampl".into(),
                msg: "unknown key".into()
            }
        );
    }

    #[test]
    fn bad_values_report_line() {
        for (text, line) in [
            ("amp = x", 1),
            ("\n\nt_range = 1:2", 3),
            ("n = -4", 1),
            ("n = 1\nn = 2", 2),
        ] {
            match RunConfig::parse(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            RunConfig::parse("just words"),
            Err(Error::Config { line: 1, .. })
        ));
    }

    #[test]
    fn overlay_prefers_other() {
        let mut base = RunConfig::parse("n = 2\namp = 1").unwrap();
        base.overlay(&RunConfig::parse("amp = 0.5").unwrap());
        assert_eq!(base.n, Some(2));
        assert_eq!(base.amp, Some(0.5));
    }
}
