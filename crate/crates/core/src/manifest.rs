//! Run manifests: `key = value` text files with per-experiment presets.
//!
//! ```text
//! # comment
//! experiment = orszag-tang
//! n = 16
//! tau = 0.005
//! T = 0.05
//! meshes = 8, 16, 32
//! n_ref = 64
//! ```

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scheme::{Experiment, InitialData, SchemeConfig};
use crate::sparse::SolverMethod;

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub name: String,
    pub experiment: Experiment,
    pub config: SchemeConfig,
    pub out: PathBuf,
    /// Spatial study resolutions, strictly increasing.
    pub meshes: Vec<usize>,
    /// Temporal study steps, strictly decreasing.
    pub taus: Vec<f64>,
    pub n_ref: Option<usize>,
    pub tau_ref: Option<f64>,
    /// Comparison time of the studies; defaults to `T`.
    pub t_cmp: Option<f64>,
    pub jobs: usize,
    /// Write a VTK file every this many steps (0: initial and final only).
    pub vtk_every: usize,
}

impl RunManifest {
    pub fn preset(exp: Experiment) -> Self {
        let (n, tau, t) = match exp {
            Experiment::Abc3d => (8, 0.01, 0.1),
            Experiment::OrszagTang => (16, 0.005, 0.05),
            Experiment::Harris => (8, 0.01, 0.25),
            Experiment::Custom => (8, 0.01, 0.1),
        };
        let (meshes, n_ref) = match exp {
            Experiment::OrszagTang => (vec![8, 16, 32], 64),
            _ => (vec![2, 4], 8),
        };
        Self {
            name: exp.name().to_string(),
            experiment: exp,
            config: SchemeConfig::preset(exp, n, tau, t),
            out: PathBuf::from("out"),
            meshes,
            taus: vec![1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0],
            n_ref: Some(n_ref),
            tau_ref: None,
            t_cmp: None,
            jobs: 1,
            vtk_every: 0,
        }
    }

    /// Parses a manifest; `experiment`, when present, selects the preset the
    /// other keys override, wherever it appears.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let exp = match pairs.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => parse_experiment(v)?,
            None => Experiment::Custom,
        };
        let mut m = Self::preset(exp);
        for (k, v) in &pairs {
            if k != "experiment" {
                m.set(k, v)?;
            }
        }
        Ok(m)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Overrides one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let c = &mut self.config;
        match key {
            "experiment" => {
                let keep = self.clone();
                *self = Self::preset(parse_experiment(value)?);
                self.out = keep.out;
                self.jobs = keep.jobs;
            }
            "name" => self.name = value.to_string(),
            "n" => c.n = num(key, value)?,
            "tau" => c.tau = num(key, value)?,
            "T" | "t_final" => c.t_final = num(key, value)?,
            "nu" => c.nu = num(key, value)?,
            "sigma" => c.sigma = num(key, value)?,
            "eta" => c.eta = num(key, value)?,
            "alpha1" => c.alpha1 = num(key, value)?,
            "alpha2" => c.alpha2 = num(key, value)?,
            "solver" => {
                c.solver.method = match value {
                    "gmres" => SolverMethod::Gmres,
                    "dense" => SolverMethod::DenseLu,
                    "lu" | "sparse-lu" => SolverMethod::SparseLu,
                    "auto" => SolverMethod::Auto,
                    _ => return Err(Error::Config(format!("unknown solver '{value}'"))),
                }
            }
            "tol" => c.solver.tolerance = num(key, value)?,
            "max_iterations" => c.solver.max_iterations = num(key, value)?,
            "restart" => c.solver.restart = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "meshes" => self.meshes = list(key, value)?,
            "taus" => self.taus = list(key, value)?,
            "n_ref" => self.n_ref = Some(num(key, value)?),
            "tau_ref" => self.tau_ref = Some(num(key, value)?),
            "t_cmp" => self.t_cmp = Some(num(key, value)?),
            "jobs" => self.jobs = num(key, value)?,
            "vtk_every" => self.vtk_every = num(key, value)?,
            "harris_b0" | "harris_delta" => {
                let (mut b0, mut delta) = match c.initial {
                    InitialData::Harris { b0, delta } => (b0, delta),
                    _ => {
                        return Err(Error::Config(format!(
                            "{key} applies to the harris experiment only"
                        )))
                    }
                };
                if key == "harris_b0" {
                    b0 = num(key, value)?;
                } else {
                    delta = num(key, value)?;
                }
                c.initial = InitialData::Harris { b0, delta };
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Reference step of the temporal study: the smallest listed step / 5
    /// unless given.
    pub fn tau_reference(&self) -> f64 {
        self.tau_ref
            .unwrap_or_else(|| self.taus.iter().cloned().fold(f64::INFINITY, f64::min) / 5.0)
    }

    pub fn n_reference(&self) -> usize {
        self.n_ref
            .unwrap_or_else(|| 2 * self.meshes.iter().cloned().fold(1, lcm))
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.meshes.is_empty() || self.meshes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "meshes must be a nonempty strictly increasing list".into(),
            ));
        }
        if let Some(n) = self
            .meshes
            .iter()
            .find(|n| **n == 0 || self.n_reference() % **n != 0)
        {
            return Err(Error::NotNested {
                coarse: *n,
                fine: self.n_reference(),
            });
        }
        if self.taus.is_empty()
            || self.taus.windows(2).any(|w| w[0] <= w[1])
            || self.taus.iter().any(|t| *t <= 0.0)
        {
            return Err(Error::Config(
                "taus must be a nonempty strictly decreasing list of positive steps".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn parse_experiment(v: &str) -> Result<Experiment> {
    Experiment::parse(v).ok_or_else(|| Error::Config(format!("unknown experiment '{v}'")))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num(key, s))
        .collect()
}
