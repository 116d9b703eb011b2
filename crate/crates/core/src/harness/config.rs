use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Am,
    Rapt,
    Rapt2,
    Raptor,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Raptor,
        Algorithm::Rapt,
        Algorithm::Rapt2,
        Algorithm::Am,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Am => "am",
            Algorithm::Rapt => "rapt",
            Algorithm::Rapt2 => "rapt2",
            Algorithm::Raptor => "raptor",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "am" => Ok(Algorithm::Am),
            "rapt" => Ok(Algorithm::Rapt),
            "rapt2" => Ok(Algorithm::Rapt2),
            "raptor" => Ok(Algorithm::Raptor),
            other => Err(format!(
                "unknown algorithm `{other}` (am, rapt, rapt2, raptor)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetConfig {
    GaussMix {
        xi: f64,
        d: f64,
        s: f64,
        dim: usize,
    },
    Banana {
        b: f64,
        dim: usize,
    },
    /// `None` selects the bundled synthetic data set.
    Loh {
        data: Option<PathBuf>,
    },
}

impl TargetConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            TargetConfig::GaussMix { .. } => "gaussmix",
            TargetConfig::Banana { .. } => "banana",
            TargetConfig::Loh { .. } => "loh",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetConfig::GaussMix { dim, .. } | TargetConfig::Banana { dim, .. } => *dim,
            TargetConfig::Loh { .. } => 4,
        }
    }
}

/// How chain starting points are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StartRule {
    /// `N(m, 2C)` around the target's whole-space mean and covariance (exact
    /// for the Gaussian mixture, preliminary-run estimates otherwise).
    Gaussian,
    /// Uniform on the cube `[lo, hi]^d`.
    Uniform { lo: f64, hi: f64 },
    /// Halton points on `[0.1, 0.9]³ × [−20, 20]` in natural LOH coordinates.
    Halton,
}

impl fmt::Display for StartRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartRule::Gaussian => f.write_str("gaussian"),
            StartRule::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            StartRule::Halton => f.write_str("halton"),
        }
    }
}

impl FromStr for StartRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["gaussian"] => Ok(StartRule::Gaussian),
            ["halton"] => Ok(StartRule::Halton),
            ["uniform", lo, hi] => {
                let lo: f64 = lo.parse().map_err(|_| format!("bad bound `{lo}`"))?;
                let hi: f64 = hi.parse().map_err(|_| format!("bad bound `{hi}`"))?;
                if lo < hi {
                    Ok(StartRule::Uniform { lo, hi })
                } else {
                    Err("uniform start needs lo < hi".into())
                }
            }
            _ => Err(format!(
                "unknown start rule `{s}` (gaussian, halton, uniform:LO:HI)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub target: TargetConfig,
    pub algorithms: Vec<Algorithm>,
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub replications: usize,
    pub alpha: f64,
    pub k: usize,
    pub seed: u64,
    pub start: StartRule,
    /// Pseudo-observation count given to every estimator's initial state.
    pub prior_weight: usize,
    /// Per-chain length of the preliminary random walk; 0 when the scenario has none.
    pub prelim_iterations: usize,
    /// Oracle draws for D̂_n; 0 disables it.
    pub oracle_size: usize,
    /// Reference draws standing in for a missing closed-form CDF.
    pub reference_size: usize,
    /// Pooled post-burn-in sample counts at which D̂_n is also evaluated.
    pub dn_checkpoints: Vec<usize>,
    pub raster_res: usize,
    pub traces: bool,
    pub out_dir: PathBuf,
}

pub const PRESETS: [&str; 4] = ["gaussmix-d3s1", "gaussmix-d0s4", "banana5", "loh"];

impl ScenarioConfig {
    /// Desk-scale preset.
    pub fn preset(name: &str) -> Option<Self> {
        let gaussmix = |d: f64, s: f64| ScenarioConfig {
            name: name.to_string(),
            target: TargetConfig::GaussMix {
                xi: 0.5,
                d,
                s,
                dim: 5,
            },
            algorithms: Algorithm::ALL.to_vec(),
            chains: 10,
            iterations: 10_000,
            burn_in: 5_000,
            replications: 20,
            alpha: 0.2,
            k: 2,
            seed: 20100101,
            start: StartRule::Gaussian,
            prior_weight: 100,
            prelim_iterations: 0,
            oracle_size: 10_000,
            reference_size: 0,
            dn_checkpoints: vec![100, 1_000, 10_000],
            raster_res: 300,
            traces: false,
            out_dir: PathBuf::from("out").join(name),
        };
        match name {
            "gaussmix-d3s1" => Some(gaussmix(3.0, 1.0)),
            "gaussmix-d0s4" => Some(gaussmix(0.0, 4.0)),
            "banana5" => Some(ScenarioConfig {
                target: TargetConfig::Banana { b: 0.1, dim: 5 },
                burn_in: 4_000,
                replications: 50,
                start: StartRule::Uniform { lo: -2.0, hi: 2.0 },
                prelim_iterations: 4_000,
                reference_size: 1_000_000,
                ..gaussmix(0.0, 1.0)
            }),
            "loh" => Some(ScenarioConfig {
                target: TargetConfig::Loh { data: None },
                algorithms: vec![Algorithm::Raptor],
                iterations: 20_000,
                burn_in: 10_000,
                replications: 1,
                alpha: 0.7,
                start: StartRule::Halton,
                prelim_iterations: 4_000,
                oracle_size: 0,
                dn_checkpoints: Vec::new(),
                traces: true,
                ..gaussmix(0.0, 1.0)
            }),
            _ => None,
        }
    }

    /// Long replication counts and run lengths.
    pub fn full_scale(&mut self) {
        match self.target {
            TargetConfig::GaussMix { .. } => self.replications = 200,
            TargetConfig::Banana { .. } => self.replications = 500,
            TargetConfig::Loh { .. } => self.iterations = 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::config(field, msg));
        if self.algorithms.is_empty() {
            return fail("algorithms", "at least one algorithm is required".into());
        }
        if self.chains == 0 {
            return fail("chains", "need at least one chain".into());
        }
        if self.burn_in >= self.iterations {
            return fail(
                "burn_in",
                format!(
                    "burn_in {} must be below iterations {}",
                    self.burn_in, self.iterations
                ),
            );
        }
        if self.replications == 0 {
            return fail("replications", "need at least one replicate".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail("alpha", format!("{} not in (0,1)", self.alpha));
        }
        if self.k == 0 {
            return fail("k", "need at least one component".into());
        }
        if self.raster_res == 0 {
            return fail("raster_res", "must be positive".into());
        }
        match &self.target {
            TargetConfig::GaussMix { xi, s, dim, .. } => {
                if !(*xi > 0.0 && *xi < 1.0) {
                    return fail("xi", format!("{xi} not in (0,1)"));
                }
                if !(*s > 0.0) {
                    return fail("s", format!("{s} must be positive"));
                }
                if *dim < 2 {
                    return fail("dim", "gaussmix scenarios need dim >= 2".into());
                }
                if self.k != 2 {
                    return fail(
                        "k",
                        "gaussmix starting values define exactly two components".into(),
                    );
                }
            }
            TargetConfig::Banana { dim, .. } => {
                if *dim < 2 {
                    return fail("dim", "banana needs dim >= 2".into());
                }
                if self.prelim_iterations == 0 {
                    return fail(
                        "prelim_iterations",
                        "banana starts from a preliminary run".into(),
                    );
                }
            }
            TargetConfig::Loh { .. } => {
                if self.prelim_iterations == 0 {
                    return fail(
                        "prelim_iterations",
                        "loh starts from a preliminary run".into(),
                    );
                }
                if matches!(self.start, StartRule::Gaussian) {
                    return fail("start", "loh has no preset Gaussian start".into());
                }
            }
        }
        if matches!(self.start, StartRule::Halton)
            && !matches!(self.target, TargetConfig::Loh { .. })
        {
            return fail("start", "halton starts are defined for loh only".into());
        }
        Ok(())
    }

    /// Canonical `key = value` form; parsing it gives back the same config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("target", self.target.kind().into());
        kv("name", self.name.clone());
        match &self.target {
            TargetConfig::GaussMix { xi, d, s, dim } => {
                kv("xi", xi.to_string());
                kv("d", d.to_string());
                kv("s", s.to_string());
                kv("dim", dim.to_string());
            }
            TargetConfig::Banana { b, dim } => {
                kv("b", b.to_string());
                kv("dim", dim.to_string());
            }
            TargetConfig::Loh { data } => {
                kv(
                    "data",
                    data.as_ref()
                        .map_or("bundled".into(), |p| p.display().to_string()),
                );
            }
        }
        let algs: Vec<&str> = self.algorithms.iter().map(|a| a.name()).collect();
        kv("algorithms", algs.join(","));
        kv("chains", self.chains.to_string());
        kv("iterations", self.iterations.to_string());
        kv("burn_in", self.burn_in.to_string());
        kv("replications", self.replications.to_string());
        kv("alpha", self.alpha.to_string());
        kv("k", self.k.to_string());
        kv("seed", self.seed.to_string());
        kv("start", self.start.to_string());
        kv("prior_weight", self.prior_weight.to_string());
        kv("prelim_iterations", self.prelim_iterations.to_string());
        kv("oracle_size", self.oracle_size.to_string());
        kv("reference_size", self.reference_size.to_string());
        let cps: Vec<String> = self.dn_checkpoints.iter().map(|c| c.to_string()).collect();
        kv("dn_checkpoints", cps.join(","));
        kv("raster_res", self.raster_res.to_string());
        kv("traces", self.traces.to_string());
        kv("out", self.out_dir.display().to_string());
        out
    }

    /// Short SHA-256 of the rendered config, excluding the seed and output directory.
    pub fn hash(&self) -> String {
        let body: String = self
            .render()
            .lines()
            .filter(|l| !l.starts_with("out ") && !l.starts_with("seed "))
            .map(|l| format!("{l}\n"))
            .collect();
        let digest = Sha256::digest(body.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Parses a `key = value` file. A `preset` key, if present, must come first
    /// and supplies defaults; otherwise `target` must come first.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Option<ScenarioConfig> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |field: &str, message: String| Error::Config {
                line: Some(line_no),
                field: field.to_string(),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("", format!("expected `key = value`, found `{line}`")))?;
            match (key, cfg.as_mut()) {
                ("preset", None) => {
                    cfg = Some(
                        Self::preset(value)
                            .ok_or_else(|| err(key, format!("unknown preset `{value}`")))?,
                    );
                }
                ("target", None) => {
                    let base = match value {
                        "gaussmix" => "gaussmix-d3s1",
                        "banana" => "banana5",
                        "loh" => "loh",
                        other => return Err(err(key, format!("unknown target `{other}`"))),
                    };
                    let mut c = Self::preset(base).expect("built-in preset");
                    c.name = value.to_string();
                    cfg = Some(c);
                }
                ("preset" | "target", Some(_)) => {
                    return Err(err(key, "must be the first setting".into()));
                }
                (_, None) => {
                    return Err(err(
                        key,
                        "the first setting must be `preset` or `target`".into(),
                    ))
                }
                (_, Some(c)) => c.set(key, value).map_err(|m| err(key, m))?,
            }
        }
        let cfg = cfg.ok_or_else(|| Error::config("target", "config file sets no target"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<V: FromStr>(v: &str) -> std::result::Result<V, String> {
            v.parse().map_err(|_| format!("cannot parse `{v}`"))
        }
        match (key, &mut self.target) {
            ("name", _) => self.name = value.to_string(),
            ("xi", TargetConfig::GaussMix { xi, .. }) => *xi = num(value)?,
            ("d", TargetConfig::GaussMix { d, .. }) => *d = num(value)?,
            ("s", TargetConfig::GaussMix { s, .. }) => *s = num(value)?,
            ("dim", TargetConfig::GaussMix { dim, .. } | TargetConfig::Banana { dim, .. }) => {
                *dim = num(value)?
            }
            ("b", TargetConfig::Banana { b, .. }) => *b = num(value)?,
            ("data", TargetConfig::Loh { data }) => {
                *data = (value != "bundled").then(|| PathBuf::from(value));
            }
            ("xi" | "d" | "s" | "dim" | "b" | "data", t) => {
                return Err(format!("not a setting of the {} target", t.kind()));
            }
            ("algorithms", _) => {
                self.algorithms = value
                    .split(',')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()?;
            }
            ("chains", _) => self.chains = num(value)?,
            ("iterations", _) => self.iterations = num(value)?,
            ("burn_in", _) => self.burn_in = num(value)?,
            ("replications", _) => self.replications = num(value)?,
            ("alpha", _) => self.alpha = num(value)?,
            ("k", _) => self.k = num(value)?,
            ("seed", _) => self.seed = num(value)?,
            ("start", _) => self.start = value.parse()?,
            ("prior_weight", _) => self.prior_weight = num(value)?,
            ("prelim_iterations", _) => self.prelim_iterations = num(value)?,
            ("oracle_size", _) => self.oracle_size = num(value)?,
            ("reference_size", _) => self.reference_size = num(value)?,
            ("dn_checkpoints", _) => {
                self.dn_checkpoints = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|v| num(v.trim()))
                        .collect::<std::result::Result<_, _>>()?
                };
            }
            ("raster_res", _) => self.raster_res = num(value)?,
            ("traces", _) => self.traces = num(value)?,
            ("out", _) => self.out_dir = PathBuf::from(value),
            _ => return Err(format!("unknown setting `{key}`")),
        }
        Ok(())
    }
}
