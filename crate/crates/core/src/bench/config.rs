use crate::build::H2Config;
use crate::error::{Error, Result};
use crate::kernel::{KernelParams, Shape, DEFAULT_DENSE_CAP, DEFAULT_EPS_R};
use crate::linalg::{CompressionParams, Scalar};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Iterative,
    Direct,
    Both,
}

impl SolverKind {
    pub fn iterative(self) -> bool {
        matches!(self, SolverKind::Iterative | SolverKind::Both)
    }

    pub fn direct(self) -> bool {
        matches!(self, SolverKind::Direct | SolverKind::Both)
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterative" => Ok(SolverKind::Iterative),
            "direct" => Ok(SolverKind::Direct),
            "both" => Ok(SolverKind::Both),
            _ => Err(Error::Config(format!("unknown solver '{s}' (iterative|direct|both)"))),
        }
    }
}

/// Parameters of one bench run.
///
/// Read from a flat `key = value` file (`#` starts a comment) and patched
/// with `--set key=value` overrides. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub shape: Shape,
    /// Sweep of electrical sizes in wavelengths (cube count per edge for cube arrays).
    pub extents: Vec<f64>,
    pub voxels_per_wavelength: f64,
    pub eps_r: f64,
    pub k0: f64,
    pub n_min: usize,
    pub eta: f64,
    pub eps_aca: f64,
    pub eps_acc: f64,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub dense_cap: usize,
    pub output: PathBuf,
    pub solution: PathBuf,
    pub seed: u64,
    /// Electrical sizes of the two separated cubes in the SVD rank study.
    pub svd_sizes: Vec<f64>,
    /// Voxels per cube edge in the SVD rank study.
    pub svd_lattice: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            shape: Shape::Rod,
            extents: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            voxels_per_wavelength: 20.0,
            eps_r: DEFAULT_EPS_R,
            k0: 2.0 * PI,
            n_min: 32,
            eta: 1.0,
            eps_aca: 1e-4,
            eps_acc: 1e-4,
            solver: SolverKind::Both,
            tol: 1e-3,
            max_iter: 200,
            dense_cap: DEFAULT_DENSE_CAP,
            output: PathBuf::from("bench.csv"),
            solution: PathBuf::from("solution.txt"),
            seed: 7,
            svd_sizes: vec![0.25, 0.5, 1.0, 2.0],
            svd_lattice: 12,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse value '{v}' for key '{key}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        self.validate()
    }

    /// Applies one `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{pair}'")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "shape" | "geometry" => self.shape = parse(key, v)?,
            "extents" | "extent" => self.extents = parse_list(key, v)?,
            "voxels_per_wavelength" | "vpw" => self.voxels_per_wavelength = parse(key, v)?,
            "eps_r" => self.eps_r = parse(key, v)?,
            "k0" => self.k0 = parse(key, v)?,
            "frequency" => self.k0 = 2.0 * PI * parse::<f64>(key, v)? / SPEED_OF_LIGHT,
            "n_min" => self.n_min = parse(key, v)?,
            "eta" => self.eta = parse(key, v)?,
            "eps_aca" => self.eps_aca = parse(key, v)?,
            "eps_acc" => self.eps_acc = parse(key, v)?,
            "solver" => self.solver = parse(key, v)?,
            "tol" => self.tol = parse(key, v)?,
            "max_iter" => self.max_iter = parse(key, v)?,
            "dense_cap" | "dense_oracle_cap" => self.dense_cap = parse(key, v)?,
            "output" => self.output = PathBuf::from(v),
            "solution" => self.solution = PathBuf::from(v),
            "seed" => self.seed = parse(key, v)?,
            "svd_sizes" => self.svd_sizes = parse_list(key, v)?,
            "svd_lattice" => self.svd_lattice = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {x}")))
            }
        };
        unit("eps_aca", self.eps_aca)?;
        unit("eps_acc", self.eps_acc)?;
        unit("tol", self.tol)?;
        if self.eps_acc > self.eps_aca {
            return Err(Error::Config("eps_acc must not exceed eps_aca".into()));
        }
        if self.extents.iter().any(|&e| !(e > 0.0)) || self.svd_sizes.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("sizes must be positive".into()));
        }
        if self.n_min == 0 || self.max_iter == 0 || self.svd_lattice == 0 {
            return Err(Error::Config("n_min, max_iter and svd_lattice must be positive".into()));
        }
        if !(self.k0 > 0.0 && self.k0.is_finite()) || !self.eps_r.is_finite() {
            return Err(Error::Config("k0 and eps_r must be finite, k0 positive".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }

    pub fn kernel_params(&self) -> Result<KernelParams> {
        KernelParams::new(self.k0, Scalar::new(self.eps_r, 0.0))
    }

    pub fn h2_config(&self) -> Result<H2Config> {
        Ok(H2Config {
            n_min: self.n_min,
            eta: self.eta,
            compression: CompressionParams::new(self.eps_aca, self.eps_acc)?,
        })
    }
}
