//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. List-valued keys take
//! comma-separated values. Command-line overrides use the same keys and
//! replace file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{Error, Result};

/// Every key the drivers understand, with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("problem", "sh | disk"),
    ("mode", "gmres | one-sweep"),
    ("omega", "angular frequency, list allowed"),
    ("layers", "number of layers J; single value or one per omega (default from omega)"),
    ("order", "polynomial order p (default 4)"),
    ("n_theta", "angular element count (default 2J)"),
    ("surface", "pml | free, list allowed"),
    ("dtn", "moving-pml | tensor | exact-schur"),
    ("source", "dirac | random"),
    ("seed", "random source seed"),
    ("source_r", "dirac radius"),
    ("source_theta", "dirac angle"),
    ("zero_source_in_pml", "true | false: drop random load in the surface PML"),
    ("perturbation", "none | trig | constant"),
    ("epsilon", "relative velocity perturbation, list allowed"),
    ("alpha", "disk layer contrast, list allowed"),
    ("gamma", "damping shift of the moving-PML preconditioner"),
    ("pml_sigma0", "surface PML strength (default from the one-way attenuation target)"),
    ("pml_exponent", "PML profile exponent"),
    ("pml_attenuation", "one-way amplitude decay exponent used for default PML strengths"),
    ("mpml_sigma0", "moving PML strength (default from the one-way attenuation target)"),
    ("velocity_scale", "factor applied to the SH velocity profile"),
    ("profile", "path of a radial profile file (SH)"),
    ("tolerance", "GMRES relative residual tolerance"),
    ("maxit", "GMRES iteration cap"),
    ("interface", "modal study interface index j (default J)"),
    ("a", "1D interval length"),
    ("omega_min", "1D frequency grid start"),
    ("omega_max", "1D frequency grid end"),
    ("n_omega", "1D frequency grid size"),
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(Error::config(key, "unknown key"))
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("expected `key = value`, found `{line}`"),
                });
            };
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        check_key(key)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `key=value` overrides (a leading `--` is accepted).
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref().trim_start_matches("--");
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(o, "override must have the form key=value"))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        self.values.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(Error::config(key, format!("`{v}` is not a boolean"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Comma-separated list; `None` when the key is absent.
    pub fn list(&self, key: &str) -> Option<Vec<&str>> {
        self.get(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.list(key) {
            None => Ok(default.to_vec()),
            Some(items) if items.is_empty() => Err(Error::config(key, "empty list")),
            Some(items) => items.into_iter().map(|v| parse_f64(key, v)).collect(),
        }
    }

    /// Choice from a fixed set of names.
    pub fn choice<'a>(&'a self, key: &str, default: &'a str, allowed: &[&str]) -> Result<&'a str> {
        let v = self.str_or(key, default);
        if allowed.contains(&v) {
            Ok(v)
        } else {
            Err(Error::config(key, format!("`{v}` is not one of {}", allowed.join(", "))))
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::config(key, format!("`{v}` is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(key, format!("`{v}` is not finite")))
    }
}
