//! Pipelines behind each scenario kind.

use serde::Serialize;
use serde_json::{json, Value};

use crate::calculus::{
    calculus_oracle, circle_generator, hofer_length, verify_loop_closure, LengthConfig, LoopGenerator,
    OracleConfig, StandardExtremizer,
};
use crate::disjoin::{default_flow, verify_disc, Collars, DiscDisjoiner, DisjoinSpec};
use crate::error::Result;
use crate::flows::{self, FlowConfig};
use crate::index::{d_radius, embed_deformation, hessian_at_origin, length_sweep, DeformationParams};
use crate::phase::{EllipsoidModel, WeightVector};
use crate::quadrature;
use crate::shorten::{theorem_isolated_pipeline, Check, CloudConfig, PipelineConfig, ShorteningScenario};

use super::config::{ScenarioConfig, ScenarioKind};

/// Plot-ready table: one row per sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub config: ScenarioConfig,
    /// Every tolerance a check was judged against.
    pub tolerances: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Tolerance of the index quadratic-form coefficients (relative).
pub const INDEX_COEFFICIENT_TOL: f64 = 5e-3;
pub const OFF_DIAGONAL_TOL: f64 = 1e-6;
pub const CLOSURE_TOL: f64 = 1e-5;
pub const AUDIT_TOL: f64 = 1e-5;
pub const FIXED_TOL: f64 = 1e-9;
/// Relative tolerance of the undeformed circle-action length.
pub const LENGTH_TOL: f64 = 0.01;
/// Finite-difference step of the index Hessian.
pub const HESSIAN_STEP: f64 = 1e-3;
/// Points at which the disc disjoiner is audited.
pub const AUDIT_POINTS: usize = 50;
/// Random directions probed when sizing the deformation neighbourhood.
pub const RADIUS_DIRECTIONS: usize = 8;

fn model(cfg: &ScenarioConfig) -> Result<EllipsoidModel> {
    EllipsoidModel::new(WeightVector::new(cfg.weights.clone())?, cfg.alpha, 0.0)
}

/// Runs the scenario. Errors are configuration or numerical failures;
/// failed checks are reported in the outcome.
pub fn run(cfg: &ScenarioConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.kind {
        ScenarioKind::CalculusCheck => calculus_check(cfg),
        ScenarioKind::Disjoin => disjoin(cfg),
        ScenarioKind::Shorten => shorten(cfg),
        ScenarioKind::Index => index(cfg),
        ScenarioKind::Length => length(cfg),
    }
}

fn calculus_check(cfg: &ScenarioConfig) -> Result<Outcome> {
    let oracle = OracleConfig {
        dim: cfg.weights.len(),
        samples: cfg.samples,
        seed: cfg.seed,
        flow: FlowConfig::rk4(cfg.steps),
        ..Default::default()
    };
    let r = calculus_oracle(&oracle)?;
    let sign = flows::sign_convention_self_test();
    let checks = vec![
        Check::new(
            "composition",
            r.composition_residual <= r.tolerance,
            format!("max flow residual {:.3e}", r.composition_residual),
        ),
        Check::new(
            "conjugation",
            r.conjugation_residual <= r.tolerance,
            format!("max flow residual {:.3e}", r.conjugation_residual),
        ),
        Check::new(
            "sign-convention",
            sign.is_ok(),
            sign.err().map_or("−π|z|² rotates by e^{−2πit}".into(), |e| e.to_string()),
        ),
    ];
    Ok(Outcome {
        config: cfg.clone(),
        tolerances: json!({ "flow_residual": r.tolerance }),
        result: json!({ "oracle": oracle, "report": r }),
        checks,
        table: None,
    })
}

fn disjoin(cfg: &ScenarioConfig) -> Result<Outcome> {
    let spec = DisjoinSpec {
        collars: cfg.delta.map(Collars::uniform),
        ..DisjoinSpec::new(cfg.area, cfg.eps)
    };
    let construction = default_flow();
    let disj = DiscDisjoiner::new(&spec, &construction)?;
    let flow = FlowConfig::rk4(cfg.steps);
    let v = verify_disc(&disj, cfg.samples, AUDIT_POINTS, cfg.seed, &flow)?;
    let checks = vec![
        Check::new(
            "landing",
            v.landed == v.samples,
            format!(
                "{}/{} in ({}, {}); image actions [{:.6}, {:.6}]",
                v.landed, v.samples, v.annulus.0, v.annulus.1, v.min_image_action, v.max_image_action
            ),
        ),
        Check::new(
            "exterior-fixed",
            v.exterior_displacement <= FIXED_TOL,
            format!("max displacement {:.3e}", v.exterior_displacement),
        ),
        Check::new("area-audit", v.audit < AUDIT_TOL, format!("max ‖JᵀJ₀J − J₀‖ {:.3e}", v.audit)),
    ];
    Ok(Outcome {
        config: cfg.clone(),
        tolerances: json!({ "fixed": FIXED_TOL, "audit": AUDIT_TOL, "audit_points": AUDIT_POINTS }),
        result: json!({
            "spec": spec,
            "collars": disj.collars,
            "stage_time": disj.stage_time,
            "construction_flow": construction,
            "flow": flow,
            "verification": v,
        }),
        checks,
        table: None,
    })
}

fn shorten(cfg: &ScenarioConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let canonical = ShorteningScenario::canonical(m.clone(), cfg.d)?;
    let scenario = match (cfg.a, cfg.b) {
        (Some(a), Some(b)) => ShorteningScenario::with_split(m, canonical.lead, a, b, cfg.d)?,
        _ => canonical,
    };
    let pc = PipelineConfig {
        length: LengthConfig {
            t_nodes: cfg.t_nodes,
            ..Default::default()
        },
        flow: FlowConfig::rk4(cfg.steps),
        eps_bar: cfg.eps_bar,
        cloud: CloudConfig {
            levels: cfg.grid,
            samples: cfg.samples,
            ..Default::default()
        },
        seed: cfg.seed,
        ..Default::default()
    };
    let report = theorem_isolated_pipeline(&scenario, &pc)?.report;
    let table = Table {
        columns: ["u", "ell_plus", "ell_minus", "max", "min"].map(String::from).to_vec(),
        rows: report
            .path
            .iter()
            .map(|p| vec![p.u, p.report.ell_plus, p.report.ell_minus, p.max, p.min])
            .collect(),
    };
    Ok(Outcome {
        config: cfg.clone(),
        tolerances: json!({ "drop": pc.tol }),
        checks: report.checks.clone(),
        result: json!({ "pipeline": pc, "report": report }),
        table: Some(table),
    })
}

fn index(cfg: &ScenarioConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let hess = hessian_at_origin(&m.weights, HESSIAN_STEP, cfg.t_nodes)?;
    let mut checks = vec![
        Check::new(
            "coefficients",
            hess.max_relative_deviation <= INDEX_COEFFICIENT_TOL,
            format!("max relative deviation {:.3e}", hess.max_relative_deviation),
        ),
        Check::new(
            "off-diagonal",
            hess.max_off_diagonal < OFF_DIAGONAL_TOL,
            format!("max |H_ij| {:.3e}", hess.max_off_diagonal),
        ),
    ];
    let dim = DeformationParams::zeros(&m.weights).real_dim();
    let eps_bar = cfg.eps_bar.unwrap_or(0.25 * cfg.alpha);
    let mut result = json!({ "hessian": hess, "eps_bar": eps_bar });
    let mut table = None;
    if dim > 0 {
        let radius = d_radius(&m.weights, eps_bar, cfg.t_nodes, RADIUS_DIRECTIONS, cfg.seed)?;
        let mut x = vec![0.0; dim];
        x[0] = radius;
        let params = DeformationParams::from_reals(&m.weights, &x)?;
        let lp = embed_deformation(&m, &params, eps_bar, cfg.t_nodes)?;
        let residual = verify_loop_closure(&lp, cfg.samples, &FlowConfig::rk4(cfg.steps), cfg.seed)?;
        checks.push(Check::new(
            "embedded-closure",
            residual < CLOSURE_TOL,
            format!("time-1 residual {residual:.3e} at |λ| = {radius:.4e}"),
        ));
        let grid = quadrature::nodes(-2.0 * radius, 2.0 * radius, cfg.grid);
        let coeff = hess.analytic_coefficients[0];
        table = Some(Table {
            columns: ["lambda", "length", "quadratic_model"].map(String::from).to_vec(),
            rows: length_sweep(&m.weights, 0, &grid, cfg.t_nodes)?
                .into_iter()
                .map(|(s, l)| vec![s, l, coeff * s * s])
                .collect(),
        });
        result["d_radius"] = json!(radius);
        result["closure_residual"] = json!(residual);
    }
    Ok(Outcome {
        config: cfg.clone(),
        tolerances: json!({
            "coefficient_relative": INDEX_COEFFICIENT_TOL,
            "off_diagonal": OFF_DIAGONAL_TOL,
            "closure": CLOSURE_TOL,
            "hessian_step": HESSIAN_STEP,
            "radius_directions": RADIUS_DIRECTIONS,
        }),
        result,
        checks,
        table,
    })
}

fn length(cfg: &ScenarioConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let speeds: Vec<f64> = cfg.weights.iter().map(|&k| k as f64).collect();
    let lp = if cfg.lambda == 0.0 {
        LoopGenerator::new(circle_generator(&speeds), m.clone())?
    } else {
        let dim = DeformationParams::zeros(&m.weights).real_dim();
        if dim == 0 {
            return Err(crate::Error::InvalidParameter(
                "lambda needs a weight ≥ 2 to deform".into(),
            ));
        }
        let mut x = vec![0.0; dim];
        x[0] = cfg.lambda;
        let params = DeformationParams::from_reals(&m.weights, &x)?;
        embed_deformation(&m, &params, cfg.eps_bar.unwrap_or(0.25 * cfg.alpha), cfg.t_nodes)?
    };
    let lc = LengthConfig {
        t_nodes: cfg.t_nodes,
        ..Default::default()
    };
    let r = hofer_length(&lp, &lc, &StandardExtremizer::default())?;
    let residual = verify_loop_closure(&lp, cfg.samples, &FlowConfig::rk4(cfg.steps), cfg.seed)?;
    let mut checks = vec![Check::new(
        "closure",
        residual < CLOSURE_TOL,
        format!("time-1 residual {residual:.3e}"),
    )];
    if cfg.lambda == 0.0 {
        let dev = (r.total - cfg.alpha).abs() / cfg.alpha;
        checks.push(Check::new(
            "undeformed-length",
            dev <= LENGTH_TOL,
            format!("total {:.6} against α = {}", r.total, cfg.alpha),
        ));
    }
    Ok(Outcome {
        config: cfg.clone(),
        tolerances: json!({ "closure": CLOSURE_TOL, "length_relative": LENGTH_TOL }),
        result: json!({ "length": lc, "report": r, "closure_residual": residual }),
        checks,
        table: None,
    })
}
