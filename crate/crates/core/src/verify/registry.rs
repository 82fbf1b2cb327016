//! Named checks selected at run time, each with its own pass predicate.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::*;
use crate::boundary::{make_atom, Atom, Profile};
use crate::kernels::{DerivOrder, KernelEvaluator};
use crate::solver::Solver;
use crate::Result;

/// Parameters and tolerances of the verification suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySettings {
    pub dim: usize,
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub profile: Profile,
    pub radii: Vec<f64>,
    pub horizons: Vec<f64>,
    pub weighted_orders: Vec<DerivOrder>,
    pub drift_tol: f64,
    pub scale_tol: f64,
    pub uniformity_tol: f64,
    pub main_spread_tol: f64,
    pub slope_margin: f64,
    pub slope_band: f64,
    pub integral_grid: IntegralGrid,
    pub norm_grid: NormGrid,
    pub seed: u64,
    pub homogeneity_points: usize,
    pub lambdas: Vec<f64>,
    pub homogeneity_tol: f64,
    /// Strategy that evaluates the dilated side of the homogeneity check.
    pub oracle: String,
    /// `(x_n, t)` pairs for the moment check.
    pub moment_pairs: Vec<(f64, f64)>,
    pub moment_half_width: f64,
    pub moment_tol: f64,
    /// Decay grid `2^{−k..k}` with exponent step `1/decay_subdiv`.
    pub decay_k: i32,
    pub decay_subdiv: i32,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            dim: 3,
            alpha: 0.5,
            p: 2.0,
            beta: 0.0,
            t_end: 4.0,
            profile: Profile::Poly3,
            radii: vec![0.5, 1.0, 2.0],
            horizons: vec![4.0, 8.0, 16.0, 32.0],
            weighted_orders: vec![DerivOrder::new(1, 0, 0), DerivOrder::new(0, 0, 1), DerivOrder::new(1, 0, 1)],
            drift_tol: 0.1,
            scale_tol: 0.02,
            uniformity_tol: 3.0,
            main_spread_tol: 4.0,
            slope_margin: 0.2,
            slope_band: 0.3,
            integral_grid: IntegralGrid::default(),
            norm_grid: NormGrid::default(),
            seed: 2024,
            homogeneity_points: 20,
            lambdas: vec![0.5, 2.0, 4.0],
            homogeneity_tol: 1e-3,
            oracle: "nested".into(),
            moment_pairs: vec![(0.25, 1.0), (0.5, 0.5), (1.0, 0.25), (2.0, 1.0), (0.5, 4.0)],
            moment_half_width: 256.0,
            moment_tol: 1e-4,
            decay_k: 4,
            decay_subdiv: 4,
        }
    }
}

impl VerifySettings {
    /// Unit atom centred at the origin, switched on at `t = 0`.
    pub fn template(&self) -> Result<Atom> {
        make_atom(1.0, vec![0.0; self.dim - 1], 0.0, self.alpha, self.p, self.profile)
    }
}

pub struct VerifyContext<'a> {
    pub solver: &'a Solver,
    pub kernels: &'a KernelEvaluator,
    pub settings: &'a VerifySettings,
}

/// Result of one check: JSON records for the report and optional raw CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub records: Vec<Value>,
    /// `(header, body)` of the raw data.
    pub csv: Option<(String, String)>,
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome>;
}

fn record<T: Serialize>(v: &T, passed: bool) -> Value {
    let mut v = serde_json::to_value(v).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut v {
        m.insert("passed".into(), Value::Bool(passed));
    }
    v
}

struct BoundCheck(BoundKind);

impl Check for BoundCheck {
    fn name(&self) -> &'static str {
        self.0.id()
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let atom = s.template()?;
        let fam = check_family(ctx.solver, &atom, self.0, &self.0.default_orders(), &self.0.default_sweep())?;
        let mut header = "family,order,region".to_string();
        for a in 1..s.dim {
            header.push_str(&format!(",x{a}"));
        }
        header.push_str(",xn,t,r,value,bound,ratio");
        let mut body = String::new();
        let mut records = Vec::new();
        let mut passed = true;
        for (report, rows) in &fam {
            let ok = report.passes(s.drift_tol, s.scale_tol);
            passed &= ok;
            records.push(record(report, ok));
            body.push_str(&rows_to_csv(BoundKind::from_id(report.bound_id), rows));
        }
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records,
            csv: Some((header, body)),
        })
    }
}

struct WeightedIntegralCheck;

impl Check for WeightedIntegralCheck {
    fn name(&self) -> &'static str {
        "weighted_integral"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let atom = s.template()?;
        let mut records = Vec::new();
        let mut passed = true;
        for &d in &s.weighted_orders {
            let r = weighted_integral_theorem(ctx.solver, &atom, &s.radii, d, &s.integral_grid)?;
            let ok = r.values.iter().all(|v| v.is_finite()) && r.uniformity_ratio <= s.uniformity_tol;
            passed &= ok;
            records.push(record(&r, ok));
        }
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records,
            csv: None,
        })
    }
}

struct TScalingCheck;

impl Check for TScalingCheck {
    fn name(&self) -> &'static str {
        "t_scaling"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let r = low_order_t_scaling(ctx.solver, &s.template()?, s.beta, &s.horizons, &s.integral_grid)?;
        let passed = match r.fitted_exponent {
            Some(k) => k <= r.stated_exponent + s.slope_margin && (k - r.derived_exponent).abs() <= s.slope_band,
            None => r.values.iter().all(|v| *v == 0.0),
        };
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records: vec![record(&r, passed)],
            csv: None,
        })
    }
}

struct MainEstimateCheck;

impl Check for MainEstimateCheck {
    fn name(&self) -> &'static str {
        "main_estimate"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let r = main_estimate(ctx.solver, &s.template()?, &s.radii, s.t_end, &Route::Direct, &s.norm_grid)?;
        let passed = r.ratios.iter().all(|v| v.is_finite()) && r.spread <= s.main_spread_tol;
        let mut rec = record(&r, passed);
        if let Value::Object(m) = &mut rec {
            m.insert("route".into(), json!("direct"));
        }
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records: vec![rec],
            csv: None,
        })
    }
}

struct HomogeneityCheck;

impl Check for HomogeneityCheck {
    fn name(&self) -> &'static str {
        "kernel_homogeneity"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let oracle = KernelEvaluator::named(ctx.kernels.cfg, &s.oracle)?;
        let r = kernel_homogeneity(
            ctx.kernels,
            &oracle,
            &Probe::defaults(s.dim),
            DerivOrder::ZERO,
            s.seed,
            s.homogeneity_points,
            &s.lambdas,
        )?;
        let passed = r.worst <= s.homogeneity_tol;
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records: vec![record(&r, passed)],
            csv: None,
        })
    }
}

struct MomentCheck;

impl Check for MomentCheck {
    fn name(&self) -> &'static str {
        "moment_zero"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let mut records = Vec::new();
        let mut passed = true;
        for &(x_n, t) in &s.moment_pairs {
            let m = moment_zero(ctx.kernels, 1, 1, x_n, t, s.moment_half_width, 32)?;
            let ok = m.defect <= s.moment_tol;
            passed &= ok;
            records.push(record(&m, ok));
        }
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records,
            csv: None,
        })
    }
}

struct DecayCheck;

impl Check for DecayCheck {
    fn name(&self) -> &'static str {
        "kernel_decay"
    }

    fn run(&self, ctx: &VerifyContext) -> Result<CheckOutcome> {
        let s = ctx.settings;
        let n = s.dim;
        let reports = kernel_decay(ctx.kernels, &[(1, 1), (2, 1), (n, 1)], &decay_orders(), s.decay_k, s.decay_subdiv)?;
        let mut passed = true;
        let records = reports
            .iter()
            .map(|r| {
                let ok = r.sup_ratio.is_finite() && r.refinement_drift < s.drift_tol;
                passed &= ok;
                record(r, ok)
            })
            .collect();
        Ok(CheckOutcome {
            name: self.name().into(),
            passed,
            records,
            csv: None,
        })
    }
}

/// Checks by name.
#[derive(Clone)]
pub struct CheckRegistry {
    entries: BTreeMap<String, Arc<dyn Check>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        for kind in [
            BoundKind::FarField,
            BoundKind::NearField,
            BoundKind::TangentialDerivs,
            BoundKind::NormalDerivs,
        ] {
            r.register(Arc::new(BoundCheck(kind)));
        }
        r.register(Arc::new(WeightedIntegralCheck));
        r.register(Arc::new(TScalingCheck));
        r.register(Arc::new(MainEstimateCheck));
        r.register(Arc::new(HomogeneityCheck));
        r.register(Arc::new(MomentCheck));
        r.register(Arc::new(DecayCheck));
        r
    }

    pub fn register(&mut self, c: Arc<dyn Check>) {
        self.entries.insert(c.name().to_string(), c);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Check>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            crate::Error::param("verify.checks", format!("unknown check `{name}` (known: {})", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

/// The suite run when no checks are named: the atom-response checks.
pub const DEFAULT_CHECKS: [&str; 7] = [
    "far_field",
    "near_field",
    "tangential_derivs",
    "normal_derivs",
    "weighted_integral",
    "t_scaling",
    "main_estimate",
];

/// The kernel-level checks.
pub const KERNEL_CHECKS: [&str; 3] = ["kernel_homogeneity", "moment_zero", "kernel_decay"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_cover_the_suites() {
        let r = CheckRegistry::with_builtins();
        for name in DEFAULT_CHECKS.iter().chain(&KERNEL_CHECKS) {
            assert_eq!(r.get(name).unwrap().name(), *name);
        }
        assert!(matches!(r.get("nope"), Err(crate::Error::Param { field: "verify.checks", .. })));
    }
}
