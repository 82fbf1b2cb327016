//! Flat `key = value` run configuration.
//!
//! Every key has a default. Values come from, in increasing precedence: the
//! defaults, the config file, `HALFSTOKES_*` environment variables (key
//! upper-cased, `.` replaced by `_`), and the command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use halfstokes::besov::NormKind;
use halfstokes::boundary::{make_atom, Atom, Profile};
use halfstokes::kernels::{DerivOrder, KernelRegistry, QuadratureConfig, SpaceTimePoint};
use halfstokes::verify::{CheckRegistry, VerifySettings, DEFAULT_CHECKS};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_PREFIX: &str = "HALFSTOKES_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {reason}")]
    Key { key: String, reason: String },
    #[error("unknown config key `{0}`")]
    Unknown(String),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn bad(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::Key {
        key: key.into(),
        reason: reason.to_string(),
    }
}

/// `(key, default, unit and meaning)`.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("dim", "3", "spatial dimension n, integer >= 3"),
    ("alpha", "0.5", "data smoothness, dimensionless, in (0, 1)"),
    ("p", "2", "integrability exponent, dimensionless, 1 < p < inf"),
    ("beta", "0", "weight exponent of the T-scaling integral, > -1"),
    ("T", "4", "time horizon, time units"),
    (
        "atoms",
        "1 0,0 0 poly3 1",
        "atoms separated by `;`, each `r center t0 profile direction`: r in length units, center as comma-separated tangential coordinates, t0 in time units, profile poly3|poly4, direction 1..n (n means normal data)",
    ),
    ("grid.half_width", "2", "half-width L of the sampled tangential box, length units"),
    ("grid.h", "0.125", "tangential grid spacing, length units"),
    ("grid.tau", "0.0625", "time step of sampled data, time units"),
    ("quad.rel_tol", "1e-8", "target relative quadrature error for kernel-table, solve and norms"),
    ("quad.trunc_sigma", "8", "Gaussian truncation radius, units of sqrt(t)"),
    ("quad.max_depth", "40", "adaptive bisection depth cap, integer"),
    ("kernel.strategy", "subordination", "kernel evaluation strategy by name"),
    ("kernel.lambda", "2", "dilation of the paired kernel-table rows; 1 disables pairing"),
    ("kernel.pairs", "1,1;3,1", "(i, j) index pairs of K and G in the kernel table, `;`-separated"),
    ("points", "0.3,-0.2,0.5,1", "evaluation points `x1,..,x(n-1),xn,t`, `;`-separated, length and time units"),
    ("points.random", "0", "extra seeded random interior points, integer"),
    ("orders", "", "derivative orders such as l1k0m0 or l0k1m0d2, comma-separated"),
    ("solve.residual_h", "0", "finite-difference step of the Stokes residual, length units; 0 disables"),
    ("verify.checks", "default", "checks to run, comma-separated; `default` for the atom-response suite, `all` for every check"),
    ("verify.rel_tol", "1e-4", "relative quadrature error of the solver inside verify"),
    ("verify.kernel_rel_tol", "1e-6", "relative quadrature error of kernel checks inside verify"),
    ("verify.profile", "poly3", "profile of the verification atom"),
    ("verify.radii", "0.5,1,2", "atom radii, length units"),
    ("verify.horizons", "4,8,16,32", "horizons of the T-scaling fit, time units"),
    ("verify.weighted_orders", "l1k0m0,l0k0m1,l1k0m1", "orders of the weighted integral check"),
    ("verify.drift_tol", "0.1", "largest relative change under grid refinement"),
    ("verify.scale_tol", "0.02", "largest relative change under parabolic dilation"),
    ("verify.uniformity_tol", "3", "largest max/min of the weighted integral over radii"),
    ("verify.main_spread_tol", "4", "largest max/min of the norm ratios over radii"),
    ("verify.slope_margin", "0.2", "allowed excess of the fitted T exponent over the stated one"),
    ("verify.slope_band", "0.3", "allowed distance of the fitted T exponent from the scaling one"),
    ("verify.homogeneity_tol", "1e-3", "largest relative homogeneity defect of the kernels"),
    ("verify.moment_tol", "1e-4", "largest normalized tangential moment of G"),
    ("norms.kinds", "anisotropic", "besov_space, besov_time, anisotropic, weighted_low, weighted_high; comma-separated"),
    ("norms.refine", "false", "also report data norms on the grid with h and tau halved"),
    ("out", "out", "output directory"),
    ("seed", "2024", "seed of the random points, integer"),
    ("threads", "1", "worker threads for plane batches, integer"),
];

/// Keys that do not influence results and stay out of the config hash.
const UNHASHED: [&str; 2] = ["out", "threads"];

#[derive(Clone, Debug, PartialEq)]
pub struct AtomSpec {
    pub atom: Atom,
    /// 1-based; `n` is the normal component.
    pub direction: usize,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: usize,
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub t_end: f64,
    pub atoms: Vec<AtomSpec>,
    pub half_width: f64,
    pub h: f64,
    pub tau: f64,
    pub quad: QuadratureConfig,
    pub strategy: String,
    pub lambda: f64,
    pub pairs: Vec<(usize, usize)>,
    pub points: Vec<SpaceTimePoint>,
    pub random_points: usize,
    pub orders: Vec<DerivOrder>,
    pub residual_h: f64,
    pub checks: Vec<String>,
    pub verify: VerifySettings,
    pub verify_rel_tol: f64,
    pub kernel_rel_tol: f64,
    pub norm_kinds: Vec<NormKind>,
    pub norms_refine: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
    /// Resolved key-value pairs.
    pub raw: BTreeMap<String, String>,
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut m = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let k = k.trim();
        if !KEYS.iter().any(|(key, _, _)| *key == k) {
            return Err(ConfigError::Unknown(k.into()));
        }
        m.insert(k.to_string(), v.trim().to_string());
    }
    Ok(m)
}

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase().replace('.', "_"))
}

/// Defaults, then `file`, then environment overrides.
pub fn resolve(file: Option<&str>) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut m: BTreeMap<String, String> = KEYS.iter().map(|(k, d, _)| (k.to_string(), d.to_string())).collect();
    if let Some(text) = file {
        m.extend(parse_text(text)?);
    }
    for (k, _, _) in KEYS {
        if let Ok(v) = std::env::var(env_name(k)) {
            m.insert(k.to_string(), v);
        }
    }
    Ok(m)
}

fn num(m: &BTreeMap<String, String>, key: &str) -> Result<f64, ConfigError> {
    let v: f64 = m[key].parse().map_err(|_| bad(key, format!("`{}` is not a number", m[key])))?;
    if !v.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(v)
}

fn int(m: &BTreeMap<String, String>, key: &str) -> Result<u64, ConfigError> {
    m[key].parse().map_err(|_| bad(key, format!("`{}` is not a non-negative integer", m[key])))
}

fn list(v: &str, sep: char) -> impl Iterator<Item = &str> {
    v.split(sep).map(str::trim).filter(|s| !s.is_empty())
}

fn nums(m: &BTreeMap<String, String>, key: &str) -> Result<Vec<f64>, ConfigError> {
    list(&m[key], ',')
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(key, format!("`{s}` is not a number"))))
        .collect()
}

fn orders(m: &BTreeMap<String, String>, key: &str, dim: usize) -> Result<Vec<DerivOrder>, ConfigError> {
    list(&m[key], ',')
        .map(|s| {
            let d: DerivOrder = s.parse().map_err(|e| bad(key, e))?;
            d.validate(dim).map_err(|e| bad(key, e))?;
            Ok(d)
        })
        .collect()
}

fn core(key: &str) -> impl Fn(halfstokes::Error) -> ConfigError + '_ {
    move |e| match e {
        halfstokes::Error::Param { field, reason } => bad(field, reason),
        other => bad(key, other),
    }
}

impl RunConfig {
    pub fn from_map(m: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let dim = int(&m, "dim")? as usize;
        if dim < 3 {
            return Err(bad("dim", "must be at least 3"));
        }
        let alpha = num(&m, "alpha")?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(bad("alpha", "must lie in (0, 1)"));
        }
        let p = num(&m, "p")?;
        if p <= 1.0 {
            return Err(bad("p", "must satisfy 1 < p < infinity"));
        }
        let beta = num(&m, "beta")?;
        if beta <= -1.0 {
            return Err(bad("beta", "must exceed -1"));
        }
        let t_end = num(&m, "T")?;
        if t_end <= 0.0 {
            return Err(bad("T", "must be positive"));
        }

        let mut atoms = Vec::new();
        for spec in list(&m["atoms"], ';') {
            let f: Vec<&str> = spec.split_whitespace().collect();
            if f.len() != 5 {
                return Err(bad("atoms", format!("`{spec}` needs 5 fields: r center t0 profile direction")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|_| bad("atoms", format!("`{s}` is not a number")));
            let center = f[1].split(',').map(|s| parse(s.trim())).collect::<Result<Vec<_>, _>>()?;
            if center.len() != dim - 1 {
                return Err(bad("atoms", format!("center `{}` needs {} coordinates", f[1], dim - 1)));
            }
            let profile = Profile::parse(f[3]).map_err(|_| bad("atoms", format!("unknown profile `{}`", f[3])))?;
            let atom = make_atom(parse(f[0])?, center, parse(f[2])?, alpha, p, profile).map_err(core("atoms"))?;
            let direction: usize = f[4].parse().map_err(|_| bad("atoms", format!("direction `{}` is not an integer", f[4])))?;
            if !(1..=dim).contains(&direction) {
                return Err(bad("atoms", format!("direction must lie in 1..={dim}")));
            }
            atoms.push(AtomSpec { atom, direction });
        }

        let (half_width, h, tau) = (num(&m, "grid.half_width")?, num(&m, "grid.h")?, num(&m, "grid.tau")?);
        for (k, v) in [("grid.half_width", half_width), ("grid.h", h), ("grid.tau", tau)] {
            if v <= 0.0 {
                return Err(bad(k, "must be positive"));
            }
        }
        let quad = QuadratureConfig {
            rel_tol: num(&m, "quad.rel_tol")?,
            trunc_sigma: num(&m, "quad.trunc_sigma")?,
            max_depth: int(&m, "quad.max_depth")? as u32,
            dim,
        };
        quad.validate().map_err(|e| match e {
            halfstokes::Error::Param { field, reason } => bad(&format!("quad.{field}"), reason),
            other => bad("quad", other),
        })?;
        let strategy = m["kernel.strategy"].clone();
        KernelRegistry::with_builtins().get(&strategy).map_err(|e| bad("kernel.strategy", e))?;
        let lambda = num(&m, "kernel.lambda")?;
        if lambda <= 0.0 {
            return Err(bad("kernel.lambda", "must be positive"));
        }
        let mut pairs = Vec::new();
        for s in list(&m["kernel.pairs"], ';') {
            let ij: Vec<usize> = s.split(',').filter_map(|v| v.trim().parse().ok()).collect();
            match ij[..] {
                [i, j] if (1..=dim).contains(&i) && (1..dim).contains(&j) => pairs.push((i, j)),
                _ => return Err(bad("kernel.pairs", format!("`{s}` must be `i,j` with 1 <= i <= n, 1 <= j < n"))),
            }
        }

        let mut points = Vec::new();
        for s in list(&m["points"], ';') {
            let v = s
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad("points", format!("`{x}` is not a number"))))
                .collect::<Result<Vec<_>, _>>()?;
            if v.len() != dim + 1 {
                return Err(bad("points", format!("`{s}` needs {} coordinates", dim + 1)));
            }
            let pt = SpaceTimePoint::new(v[..dim - 1].to_vec(), v[dim - 1], v[dim]);
            pt.check_interior().map_err(|e| bad("points", e))?;
            points.push(pt);
        }
        let random_points = int(&m, "points.random")? as usize;
        let orders_ = orders(&m, "orders", dim)?;
        let residual_h = num(&m, "solve.residual_h")?;
        if residual_h < 0.0 {
            return Err(bad("solve.residual_h", "must be non-negative"));
        }

        let registry = CheckRegistry::with_builtins();
        let checks: Vec<String> = match m["verify.checks"].as_str() {
            "default" => DEFAULT_CHECKS.iter().map(|s| s.to_string()).collect(),
            "all" => registry.names(),
            v => list(v, ',').map(String::from).collect(),
        };
        for c in &checks {
            registry.get(c).map_err(|e| bad("verify.checks", e))?;
        }
        let positive = |key: &str| -> Result<f64, ConfigError> {
            let v = num(&m, key)?;
            if v < 0.0 {
                return Err(bad(key, "must be non-negative"));
            }
            Ok(v)
        };
        let radii = nums(&m, "verify.radii")?;
        let horizons = nums(&m, "verify.horizons")?;
        if radii.is_empty() || radii.iter().any(|r| *r <= 0.0) {
            return Err(bad("verify.radii", "needs positive radii"));
        }
        if horizons.len() < 2 || horizons.iter().any(|r| *r <= 0.0) {
            return Err(bad("verify.horizons", "needs at least two positive horizons"));
        }
        let verify = VerifySettings {
            dim,
            alpha,
            p,
            beta,
            t_end,
            profile: Profile::parse(&m["verify.profile"]).map_err(|e| bad("verify.profile", e))?,
            radii,
            horizons,
            weighted_orders: orders(&m, "verify.weighted_orders", dim)?,
            drift_tol: positive("verify.drift_tol")?,
            scale_tol: positive("verify.scale_tol")?,
            uniformity_tol: positive("verify.uniformity_tol")?,
            main_spread_tol: positive("verify.main_spread_tol")?,
            slope_margin: positive("verify.slope_margin")?,
            slope_band: positive("verify.slope_band")?,
            homogeneity_tol: positive("verify.homogeneity_tol")?,
            moment_tol: positive("verify.moment_tol")?,
            seed: int(&m, "seed")?,
            ..VerifySettings::default()
        };
        let rel = |key: &str| -> Result<f64, ConfigError> {
            let v = num(&m, key)?;
            if !(v > 0.0 && v <= 1e-2) {
                return Err(bad(key, "must lie in (0, 1e-2]"));
            }
            Ok(v)
        };
        let norm_kinds = list(&m["norms.kinds"], ',')
            .map(|s| NormKind::parse(s).map_err(|_| bad("norms.kinds", format!("unknown norm kind `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let norms_refine = match m["norms.refine"].as_str() {
            "true" => true,
            "false" => false,
            v => return Err(bad("norms.refine", format!("`{v}` is not true or false"))),
        };
        let threads = int(&m, "threads")? as usize;
        if threads == 0 {
            return Err(bad("threads", "must be at least 1"));
        }
        Ok(RunConfig {
            dim,
            alpha,
            p,
            beta,
            t_end,
            atoms,
            half_width,
            h,
            tau,
            quad,
            strategy,
            lambda,
            pairs,
            points,
            random_points,
            orders: orders_,
            residual_h,
            checks,
            verify,
            verify_rel_tol: rel("verify.rel_tol")?,
            kernel_rel_tol: rel("verify.kernel_rel_tol")?,
            norm_kinds,
            norms_refine,
            out: PathBuf::from(&m["out"]),
            seed: int(&m, "seed")?,
            threads,
            raw: m,
        })
    }

    /// Load `path` (if any), apply the environment, then `overrides`.
    pub fn load(path: Option<&std::path::Path>, overrides: &[(&str, String)]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?),
            None => None,
        };
        let mut m = resolve(text.as_deref())?;
        for (k, v) in overrides {
            m.insert(k.to_string(), v.clone());
        }
        Self::from_map(m)
    }

    /// SHA-256 over the resolved keys that affect results.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.raw {
            if !UNHASHED.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n"));
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
