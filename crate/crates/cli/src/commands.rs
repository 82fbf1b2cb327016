//! The four subcommands. Each writes its files under the output directory
//! and returns whether its acceptance predicate held.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use halfstokes::besov::{norm_report, weighted_report, NormKind, SpaceTimeSamples};
use halfstokes::boundary::{AtomExpansion, BoundaryField};
use halfstokes::kernels::{homogeneity_exponent, DerivOrder, KernelEvaluator, KernelKind, QuadratureConfig, SpaceTimePoint};
use halfstokes::solver::{samples_to_csv, Solver, TangentialSource};
use halfstokes::verify::{interior_samples, random_points, CheckRegistry, IntegralGrid, Probe, VerifyContext};
use halfstokes::{fmt_num, MODULES, VERSION};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] halfstokes::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration and usage errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use halfstokes::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(E::Accuracy { .. } | E::Singularity | E::OutsideGrid(_) | E::Domain(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Header lines shared by every output file.
fn header_lines(cfg: &RunConfig, command: &str) -> Vec<String> {
    let modules: Vec<String> = MODULES.iter().map(|m| format!("{m} {VERSION}")).collect();
    vec![
        format!("halfstokes {command}"),
        format!("config_sha256 {}", cfg.hash()),
        format!("modules {}", modules.join(", ")),
    ]
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// CSV with a `#` header block.
pub fn write_csv(cfg: &RunConfig, command: &str, name: &str, body: &str) -> CliResult<PathBuf> {
    let mut s = String::new();
    for l in header_lines(cfg, command) {
        let _ = writeln!(s, "# {l}");
    }
    s.push_str(body);
    let path = cfg.out.join(name);
    write(&path, &s)?;
    Ok(path)
}

/// JSON lines; the first object is the header.
pub fn write_jsonl(cfg: &RunConfig, command: &str, name: &str, records: &[Value]) -> CliResult<PathBuf> {
    let versions: serde_json::Map<String, Value> = MODULES.iter().map(|m| (m.to_string(), json!(VERSION))).collect();
    let head = json!({ "header": { "command": command, "config_sha256": cfg.hash(), "modules": versions } });
    let mut s = String::new();
    for r in std::iter::once(&head).chain(records) {
        s.push_str(&serde_json::to_string(r).unwrap_or_default());
        s.push('\n');
    }
    let path = cfg.out.join(name);
    write(&path, &s)?;
    Ok(path)
}

fn all_points(cfg: &RunConfig) -> Vec<SpaceTimePoint> {
    let mut pts = cfg.points.clone();
    pts.extend(random_points(cfg.dim, cfg.random_points, cfg.seed));
    pts
}

fn solver(cfg: &RunConfig, quad: QuadratureConfig) -> CliResult<Solver> {
    Ok(Solver::new(quad)?.with_threads(cfg.threads))
}

/// Kernel values, dilated partners and bound ratios.
pub fn cmd_kernel_table(cfg: &RunConfig) -> CliResult<bool> {
    let kev = KernelEvaluator::named(cfg.quad, &cfg.strategy)?;
    let n = cfg.dim;
    let mut probes: Vec<Probe> = cfg.pairs.iter().map(|&(i, j)| Probe::K(i, j)).collect();
    probes.extend(cfg.pairs.iter().map(|&(i, j)| Probe::G(i, j)));
    probes.push(Probe::A);
    if let Some(&(_, j)) = cfg.pairs.first() {
        probes.push(Probe::PressureSmooth(j));
    }
    let orders = if cfg.orders.is_empty() { vec![DerivOrder::ZERO] } else { cfg.orders.clone() };
    let lambdas: Vec<f64> = if cfg.lambda == 1.0 { vec![1.0] } else { vec![1.0, cfg.lambda] };

    let mut s = String::new();
    for a in 1..n {
        let _ = write!(s, "x{a},");
    }
    s.push_str("xn,t,lambda,order");
    for pr in &probes {
        let _ = write!(s, ",{}", pr.name());
    }
    for pr in &probes {
        let _ = write!(s, ",{}_scaled", pr.name());
    }
    for &(i, j) in &cfg.pairs {
        let _ = write!(s, ",K{i}{j}_ratio");
    }
    s.push_str(",A_ratio\n");
    for base in all_points(cfg) {
        for &d in &orders {
            for &l in &lambdas {
                let pt = base.dilate(l);
                let mut row: Vec<String> = pt.x_tan.iter().map(|v| fmt_num(*v)).collect();
                row.extend([fmt_num(pt.x_n), fmt_num(pt.t), fmt_num(l), d.to_string()]);
                let vals = probes.iter().map(|pr| pr.eval(&kev, &pt, d)).collect::<Result<Vec<_>, _>>()?;
                row.extend(vals.iter().map(|v| fmt_num(*v)));
                for (pr, v) in probes.iter().zip(&vals) {
                    let kind = match pr {
                        Probe::K(..) => KernelKind::K,
                        Probe::G(..) => KernelKind::G,
                        Probe::A => KernelKind::A,
                        Probe::PressureSmooth(_) => KernelKind::PressureSmooth,
                    };
                    row.push(fmt_num(l.powi(homogeneity_exponent(kind, n, d)) * v));
                }
                for &(i, j) in &cfg.pairs {
                    row.push(fmt_num(kev.kernel_bound_ratio(i, j, &pt, d)?));
                }
                row.push(fmt_num(kev.a_bound_ratio(&pt, d)?));
                s.push_str(&row.join(","));
                s.push('\n');
            }
        }
    }
    write_csv(cfg, "kernel-table", "kernel_table.csv", &s)?;
    Ok(true)
}

fn has_normal_data(cfg: &RunConfig) -> bool {
    cfg.atoms.iter().any(|a| a.direction == cfg.dim)
}

fn expansion(cfg: &RunConfig) -> AtomExpansion {
    let mut e = AtomExpansion::default();
    for a in cfg.atoms.iter().filter(|a| a.direction < cfg.dim) {
        e.push(a.atom.clone(), 1.0, a.direction);
    }
    e
}

/// The configured data sampled on the boundary grid, normal atoms included.
fn sampled_data(cfg: &RunConfig, h: f64, tau: f64) -> CliResult<BoundaryField> {
    let n = cfg.dim;
    let atoms = cfg.atoms.clone();
    Ok(BoundaryField::from_fn(n, cfg.half_width, h, tau, cfg.t_end, |y, s| {
        let mut g = vec![0.0; n];
        for a in &atoms {
            g[a.direction - 1] += a.atom.value(y, s);
        }
        g
    })?)
}

fn tangential_source(cfg: &RunConfig) -> CliResult<TangentialSource> {
    let e = expansion(cfg);
    Ok(if e.atoms.is_empty() {
        TangentialSource::zero(cfg.dim)
    } else {
        TangentialSource::from_atoms(&e)?
    })
}

/// Velocity, pressure and requested derivatives at the configured points.
pub fn cmd_solve(cfg: &RunConfig) -> CliResult<bool> {
    let s = solver(cfg, cfg.quad)?;
    let pts = all_points(cfg);
    let samples = if has_normal_data(cfg) {
        let g = sampled_data(cfg, cfg.h, cfg.tau)?;
        pts.iter().map(|pt| s.full_solve(&g, pt, &cfg.orders)).collect::<Result<Vec<_>, _>>()?
    } else {
        let src = tangential_source(cfg)?;
        pts.iter().map(|pt| s.evaluate_tangential(&src, pt, &cfg.orders)).collect::<Result<Vec<_>, _>>()?
    };
    write_csv(cfg, "solve", "samples.csv", &samples_to_csv(&samples))?;
    if cfg.residual_h > 0.0 {
        if has_normal_data(cfg) {
            return Err(ConfigError::Key {
                key: "solve.residual_h".into(),
                reason: "residuals are available for tangential data only".into(),
            }
            .into());
        }
        let src = tangential_source(cfg)?;
        let mut body = String::new();
        for a in 1..cfg.dim {
            let _ = write!(body, "x{a},");
        }
        body.push_str("xn,t,h,momentum,divergence\n");
        for pt in &pts {
            for h in [cfg.residual_h, cfg.residual_h / 2.0] {
                let r = s.residual_check(&src, pt, h)?;
                let mut row: Vec<String> = pt.x_tan.iter().map(|v| fmt_num(*v)).collect();
                row.extend([pt.x_n, pt.t, h, r.momentum_norm(), r.divergence_norm()].map(fmt_num));
                body.push_str(&row.join(","));
                body.push('\n');
            }
        }
        write_csv(cfg, "solve", "residuals.csv", &body)?;
    }
    Ok(true)
}

/// Runs the configured checks; passes iff every check passes.
pub fn cmd_verify(cfg: &RunConfig) -> CliResult<bool> {
    let s = solver(
        cfg,
        QuadratureConfig {
            rel_tol: cfg.verify_rel_tol,
            ..cfg.quad
        },
    )?;
    let kev = KernelEvaluator::named(
        QuadratureConfig {
            rel_tol: cfg.kernel_rel_tol,
            ..cfg.quad
        },
        &cfg.strategy,
    )?;
    let ctx = VerifyContext {
        solver: &s,
        kernels: &kev,
        settings: &cfg.verify,
    };
    let registry = CheckRegistry::with_builtins();
    let mut records = Vec::new();
    let mut all = true;
    for name in &cfg.checks {
        let outcome = registry.get(name)?.run(&ctx)?;
        all &= outcome.passed;
        for r in outcome.records {
            let mut obj = serde_json::Map::new();
            obj.insert("check".into(), json!(outcome.name));
            if let Value::Object(m) = r {
                obj.extend(m);
            }
            records.push(Value::Object(obj));
        }
        if let Some((head, body)) = outcome.csv {
            write_csv(cfg, "verify", &format!("{name}_ratios.csv"), &format!("{head}\n{body}"))?;
        }
    }
    records.push(json!({ "summary": { "checks": cfg.checks, "passed": all } }));
    write_jsonl(cfg, "verify", "verify_report.jsonl", &records)?;
    Ok(all)
}

/// Norms of the sampled data and weighted functionals of the solution.
pub fn cmd_norms(cfg: &RunConfig) -> CliResult<bool> {
    let (alpha, p) = (cfg.alpha, cfg.p);
    let mut records = Vec::new();
    let besov: Vec<NormKind> = cfg
        .norm_kinds
        .iter()
        .copied()
        .filter(|k| matches!(k, NormKind::BesovSpace | NormKind::BesovTime | NormKind::Anisotropic))
        .collect();
    if !besov.is_empty() {
        let mut grids = vec![(cfg.h, cfg.tau)];
        if cfg.norms_refine {
            grids.push((cfg.h / 2.0, cfg.tau / 2.0));
        }
        for (h, tau) in grids {
            let g = sampled_data(cfg, h, tau)?;
            let st = SpaceTimeSamples::from_boundary(&g)?;
            for &k in &besov {
                let r = norm_report(&st, k, alpha, p)?;
                let mut v = serde_json::to_value(&r).unwrap_or(Value::Null);
                if let Value::Object(m) = &mut v {
                    m.insert("target".into(), json!("data"));
                }
                records.push(v);
            }
        }
    }
    let weighted: Vec<NormKind> = cfg
        .norm_kinds
        .iter()
        .copied()
        .filter(|k| matches!(k, NormKind::WeightedLow | NormKind::WeightedHigh))
        .collect();
    if !weighted.is_empty() {
        if has_normal_data(cfg) {
            return Err(ConfigError::Key {
                key: "norms.kinds".into(),
                reason: "weighted functionals of the solution need tangential data".into(),
            }
            .into());
        }
        let s = solver(cfg, cfg.quad)?;
        let src = tangential_source(cfg)?;
        let r = cfg.atoms.iter().map(|a| a.atom.r).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut center = vec![0.0; cfg.dim - 1];
        for a in &cfg.atoms {
            for (c, v) in center.iter_mut().zip(&a.atom.center_tan) {
                *c += v / cfg.atoms.len() as f64;
            }
        }
        let high = weighted.contains(&NormKind::WeightedHigh);
        // a lone atom is mirror symmetric about its centre, which |·|^p cannot see
        let mirrored = cfg.atoms.len() == 1;
        let samples = interior_samples(&s, &src, &center, r, cfg.t_end, &IntegralGrid::default(), mirrored, high)?;
        // trace smoothness of the solution
        let smooth = alpha + 1.0 / p;
        for k in weighted {
            let mut rep = weighted_report(&samples, k, smooth, p)?;
            rep.t_end = cfg.t_end;
            let mut v = serde_json::to_value(&rep).unwrap_or(Value::Null);
            if let Value::Object(m) = &mut v {
                m.insert("target".into(), json!("solution"));
            }
            records.push(v);
        }
    }
    write_jsonl(cfg, "norms", "norms.jsonl", &records)?;
    Ok(true)
}
