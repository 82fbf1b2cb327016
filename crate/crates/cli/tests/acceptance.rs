//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,4,10` restricts the run to the listed criteria; 6 to 9
//! and 11 share the two default `verify` runs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use halfstokes::boundary::{make_atom, tangential_trace_check, AtomExpansion, BoundaryField, GradientLift, Profile};
use halfstokes::kernels::{all_orders, DerivOrder, KernelEvaluator, QuadratureConfig, SpaceTimePoint};
use halfstokes::solver::{Solver, TangentialSource};
use halfstokes::verify::{kernel_decay, kernel_homogeneity, moment_zero, Probe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 2024;

fn cfg(rel_tol: f64) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol,
        ..Default::default()
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn homogeneity() -> Outcome {
    let kev = KernelEvaluator::new(cfg(1e-8)).unwrap();
    let oracle = KernelEvaluator::named(cfg(1e-8), "nested").unwrap();
    let r = kernel_homogeneity(&kev, &oracle, &Probe::defaults(3), DerivOrder::ZERO, SEED, 20, &[0.5, 2.0, 4.0]).unwrap();
    let parts: Vec<String> = r.max_rel_err.iter().map(|(k, e)| format!("{k} {e:.1e}")).collect();
    outcome(r.worst <= 1e-3, format!("max |λ^ν F(λx,λ²t)/F − 1| per kernel: {}", parts.join(", ")))
}

fn moments() -> Outcome {
    let kev = KernelEvaluator::new(cfg(1e-6)).unwrap();
    let pairs = [(0.25, 1.0), (0.5, 0.5), (1.0, 0.25), (2.0, 1.0), (0.5, 4.0)];
    let mut worst = 0.0f64;
    for (k, &(x_n, t)) in pairs.iter().enumerate() {
        // cycle through the components
        let i = 1 + k % 3;
        let m = moment_zero(&kev, i, 1, x_n, t, 256.0, 32).unwrap();
        worst = worst.max(m.defect);
    }
    outcome(
        worst <= 1e-4,
        format!("max |∫G dy′| / (sup|G| · area) = {worst:.2e} over 5 (x_n, t) pairs, box half-width 256"),
    )
}

fn decay() -> Outcome {
    let kev = KernelEvaluator::new(cfg(1e-6)).unwrap();
    let reps = kernel_decay(&kev, &[(1, 1), (2, 1), (3, 1)], &all_orders(), 4, 4).unwrap();
    let worst = reps.iter().map(|r| r.refinement_drift).fold(0.0, f64::max);
    let sup = reps.iter().map(|r| r.refined_sup).fold(0.0, f64::max);
    let finite = reps.iter().all(|r| r.sup_ratio.is_finite());
    outcome(
        finite && worst < 0.1,
        format!("{} orders, largest sup ratio {sup:.3}, largest refinement drift {:.1}%", reps.len(), 100.0 * worst),
    )
}

fn unit_source(dir: usize) -> TangentialSource {
    let atom = make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
    TangentialSource::from_atoms(&AtomExpansion::single(atom, dir)).unwrap()
}

fn residual() -> Outcome {
    let s = Solver::new(cfg(1e-11)).unwrap();
    let src = unit_source(1);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_res, mut worst_div) = (0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..10 {
        let pt = SpaceTimePoint::new(
            vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
            rng.gen_range(0.4..1.5),
            rng.gen_range(0.5..1.5),
        );
        // step tied to the local length scale, so every point sees the same resolution
        let h = 0.02 * pt.x_n.min(pt.t.sqrt()).min(1.0);
        let a = s.residual_check(&src, &pt, h).unwrap();
        let b = s.residual_check(&src, &pt, h / 2.0).unwrap();
        let ratio = a.momentum_norm() / b.momentum_norm();
        worst_res = worst_res.max(a.momentum_norm());
        worst_div = worst_div.max(a.divergence_norm());
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    outcome(
        worst_res <= 1e-2 && worst_div <= 1e-3 && lo >= 3.0 && hi <= 5.0,
        format!(
            "10 points, step 0.02·min(1, x_n, √t) then half: residual ≤ {worst_res:.2e}, divergence ≤ {worst_div:.2e}, halving ratios in [{lo:.2}, {hi:.2}]"
        ),
    )
}

fn trace() -> Outcome {
    let s = Solver::new(cfg(1e-8)).unwrap();
    let atom = make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
    let sup = AtomExpansion::single(atom, 1).peak();
    let rows = s.trace_recovery(&unit_source(1), &[0.0, 0.0], 0.9, &[0.4, 0.2, 0.1, 0.05]).unwrap();
    let mono = rows.windows(2).all(|w| w[1].tangential < w[0].tangential);
    let last = rows[3].tangential / sup;
    let normal = rows.iter().map(|r| r.normal).fold(0.0, f64::max) / sup;
    let errs: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.tangential / sup)).collect();
    outcome(
        mono && last <= 0.05 && normal <= 1e-2,
        format!("|u − g|/sup|a| at h = 0.4..0.05: {}; max |u_n|/sup|a| = {normal:.1e}", errs.join(", ")),
    )
}

fn lift() -> Outcome {
    let half = 16.0;
    let k = PI / half;
    let g = BoundaryField::from_fn(3, half, 1.0, 0.25, 1.0, move |y, s| vec![0.0, 0.0, (k * (y[0] + y[1])).cos() * s * s])
        .unwrap();
    let x = [0.7, -1.3];
    let riesz = GradientLift::new(&g).unwrap().riesz_at(&x, 0.6).unwrap();
    // R_j of a single mode is a quarter-period shift, so its amplitude is the mode's
    let scale = 0.36 / 2f64.sqrt();
    let e1 = tangential_trace_check(&g, &x, 0.6, 0.1).unwrap();
    let e2 = tangential_trace_check(&g, &x, 0.6, 0.05).unwrap();
    let order = (e1 / e2).log2();
    let rel = e2 / scale;
    outcome(
        rel <= 0.02 && (0.8..=1.2).contains(&order),
        format!(
            "|∂_jφ − R_j g_n| / |R_j g_n| = {rel:.4} at h = 0.05 (R_j g_n = {:.4}, {:.4}), observed order {order:.3}",
            riesz[0], riesz[1]
        ),
    )
}

fn run_verify(out: &Path) -> (bool, f64) {
    let t0 = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_halfstokes"))
        .args(["verify", "--out"])
        .arg(out)
        .env_remove("HALFSTOKES_VERIFY_CHECKS")
        .status()
        .expect("run halfstokes verify");
    (status.success(), t0.elapsed().as_secs_f64())
}

fn read_report(out: &Path) -> Vec<Value> {
    let text = std::fs::read_to_string(out.join("verify_report.jsonl")).unwrap_or_default();
    text.lines().filter_map(|l| serde_json::from_str(l).ok()).collect()
}

fn records<'a>(report: &'a [Value], check: &str) -> Vec<&'a Value> {
    report.iter().filter(|r| r["check"] == check).collect()
}

fn passed(rs: &[&Value]) -> bool {
    !rs.is_empty() && rs.iter().all(|r| r["passed"] == true)
}

fn bounds(report: &[Value]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for c in ["far_field", "near_field", "tangential_derivs", "normal_derivs"] {
        let rs = records(report, c);
        ok &= passed(&rs);
        for r in rs {
            let scale = if r["scale_checked"] == true {
                format!("{:.1e}", r["scale_drift"].as_f64().unwrap_or(f64::NAN))
            } else {
                "n/a".into()
            };
            parts.push(format!(
                "{} sup {:.3} drift {:.3} scale {}",
                r["bound_id"].as_str().unwrap_or("?"),
                r["sup_ratio"].as_f64().unwrap_or(f64::NAN),
                r["refinement_drift"].as_f64().unwrap_or(f64::NAN),
                scale
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn uniformity(report: &[Value]) -> Outcome {
    let rs = records(report, "weighted_integral");
    let parts: Vec<String> = rs
        .iter()
        .map(|r| format!("{} max/min {:.4}", r["order"].as_str().unwrap_or("?"), r["uniformity_ratio"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    outcome(passed(&rs), parts.join(", "))
}

fn t_scaling(report: &[Value]) -> Outcome {
    let rs = records(report, "t_scaling");
    let detail = rs
        .first()
        .map(|r| {
            format!(
                "slope {:.4} vs stated {} and scaling {} ({})",
                r["fitted_exponent"].as_f64().unwrap_or(f64::NAN),
                r["stated_exponent"],
                r["derived_exponent"],
                r["note"].as_str().unwrap_or("")
            )
        })
        .unwrap_or_default();
    outcome(passed(&rs), detail)
}

fn main_estimate(report: &[Value], secs: f64) -> Outcome {
    let rs = records(report, "main_estimate");
    let detail = rs
        .first()
        .map(|r| {
            let ratios: Vec<String> = r["ratios"]
                .as_array()
                .map(|a| a.iter().map(|v| format!("{:.4}", v.as_f64().unwrap_or(f64::NAN))).collect())
                .unwrap_or_default();
            format!(
                "ratios {} at r = 1/2, 1, 2, max/min {:.4}; whole verify run {secs:.0} s",
                ratios.join(", "),
                r["spread"].as_f64().unwrap_or(f64::NAN)
            )
        })
        .unwrap_or_default();
    outcome(passed(&rs) && secs <= 1800.0, detail)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut m = BTreeMap::new();
    if let Ok(rd) = std::fs::read_dir(dir) {
        for e in rd.flatten() {
            if let Ok(b) = std::fs::read(e.path()) {
                m.insert(e.file_name().to_string_lossy().into_owned(), b);
            }
        }
    }
    m
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let want = |c: u32| only.as_ref().is_none_or(|o| o.contains(&c));
    let names = [
        "kernel homogeneity",
        "moment-zero of G",
        "kernel decay bound",
        "PDE consistency",
        "trace recovery",
        "atom-response bounds",
        "weighted integral uniformity",
        "T-scaling",
        "main estimate",
        "lift consistency",
        "determinism",
    ];
    let mut failed = 0;
    let mut report_line = |c: u32, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} {c:>2} {}: {}", names[c as usize - 1], o.detail);
    };
    let fns: [(u32, fn() -> Outcome); 6] = [(1, homogeneity), (2, moments), (3, decay), (4, residual), (5, trace), (10, lift)];
    for (c, f) in fns {
        if want(c) {
            report_line(c, f());
        }
    }
    if (6..=9).chain([11]).any(want) {
        let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
        let _ = std::fs::remove_dir_all(&root);
        let (a, b) = (root.join("run1"), root.join("run2"));
        let (ok, secs) = run_verify(&a);
        let report = read_report(&a);
        if !ok {
            eprintln!("verify exited unsuccessfully");
        }
        if want(6) {
            report_line(6, bounds(&report));
        }
        if want(7) {
            report_line(7, uniformity(&report));
        }
        if want(8) {
            report_line(8, t_scaling(&report));
        }
        if want(9) {
            report_line(9, main_estimate(&report, secs));
        }
        if want(11) {
            let (ok2, _) = run_verify(&b);
            let (fa, fb) = (files(&a), files(&b));
            let same = !fa.is_empty() && fa == fb;
            report_line(
                11,
                outcome(
                    ok && ok2 && same,
                    format!("{} output files, byte-identical across two runs: {same}", fa.len()),
                ),
            );
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
