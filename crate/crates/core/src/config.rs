//! Flat `key = value` run configuration. `#` starts a comment.

use std::path::Path;

use crate::error::{Error, Result};
use crate::invariant::{PulseDesign, Step2Mode};
use crate::model::SystemParams;
use crate::protocol::ProtocolSpec;

/// Optional overrides; unset fields keep their defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub g: Option<f64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub epsilon: Option<f64>,
    pub t_f: Option<f64>,
    pub winding: Option<u32>,
    pub n_max: Option<usize>,
    pub chi: Option<f64>,
    pub dt: Option<f64>,
    pub step2_duration: Option<f64>,
    pub step2_mode: Option<Step2Mode>,
    pub open: Option<bool>,
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config { line, reason: format!("bad value '{v}' for {key}") })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Config { line, reason: format!("expected key = value, got '{body}'") })?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "g" => c.g = Some(num(line, key, v)?),
                "eta" => c.eta = Some(num(line, key, v)?),
                "gamma" => c.gamma = Some(num(line, key, v)?),
                "kappa" => c.kappa = Some(num(line, key, v)?),
                "epsilon" => c.epsilon = Some(num(line, key, v)?),
                "t_f" | "tf" => c.t_f = Some(num(line, key, v)?),
                "winding" | "N" => c.winding = Some(num(line, key, v)?),
                "n_max" | "nmax" => c.n_max = Some(num(line, key, v)?),
                "chi" => c.chi = Some(num(line, key, v)?),
                "dt" => c.dt = Some(num(line, key, v)?),
                "step2_duration" => c.step2_duration = Some(num(line, key, v)?),
                "step2_mode" => c.step2_mode = Some(num(line, key, v)?),
                "open" => c.open = Some(num(line, key, v)?),
                _ => return Err(Error::Config { line, reason: format!("unknown key '{key}'") }),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `other` win.
    pub fn merged(&self, other: &RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(g, eta, gamma, kappa, epsilon, t_f, winding, n_max, chi, dt, step2_duration, step2_mode, open)
    }

    /// System parameters. An explicit `winding` without `epsilon` selects the
    /// matching default angle.
    pub fn params(&self) -> Result<SystemParams> {
        let mut p = SystemParams::default();
        if let Some(n) = self.winding {
            p.winding = n;
            p.epsilon = crate::invariant::choose_epsilon(n);
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { p.$f = v; })* };
        }
        set!(g, eta, gamma, kappa, epsilon, t_f, n_max);
        p.validate()?;
        Ok(p)
    }

    pub fn spec(&self) -> Result<ProtocolSpec> {
        let params = self.params()?;
        let mut spec = ProtocolSpec::new(params.clone())?;
        if let Some(chi) = self.chi {
            spec.design = PulseDesign::new(params.epsilon, params.t_f, params.winding, chi)?;
        }
        if let Some(d) = self.step2_duration {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter { name: "step2_duration", reason: format!("{d} must be positive") });
            }
            spec.step2_duration = d;
        }
        if let Some(m) = self.step2_mode {
            spec.step2_mode = m;
        }
        if let Some(o) = self.open {
            spec.open = o;
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter { name: "dt", reason: format!("{dt} must be positive") });
            }
            spec.integrator = spec.integrator.with_dt(dt);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let c = RunConfig::parse("# run\neta = 1.5\nN=2 # winding\n\nt_f=20\nstep2_mode = stretched\n").unwrap();
        assert_eq!(c.eta, Some(1.5));
        let s = c.spec().unwrap();
        assert_eq!(s.params.winding, 2);
        assert_eq!(s.params.epsilon, crate::invariant::choose_epsilon(2));
        assert_eq!(s.step2_duration, 40.0);
        assert_eq!(s.step2_mode, Step2Mode::Stretched);
    }

    #[test]
    fn reports_line_numbers() {
        match RunConfig::parse("eta=1\nbogus=3\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse("eta=x"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(RunConfig::parse("eta"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn merge_prefers_other() {
        let a = RunConfig { eta: Some(1.0), kappa: Some(0.2), ..Default::default() };
        let b = RunConfig { eta: Some(2.0), ..Default::default() };
        let m = a.merged(&b);
        assert_eq!(m.eta, Some(2.0));
        assert_eq!(m.kappa, Some(0.2));
    }
}
