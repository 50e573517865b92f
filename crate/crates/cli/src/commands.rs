use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mdrepair::closed_form::two_node_optimal;
use mdrepair::explorer::sweep::{fmt_sig, linspace};
use mdrepair::explorer::{
    brute_force_oracle, sweep, three_node_optimal, three_node_regime_optima, OptimizerConfig, OracleGrid,
};
use mdrepair::sim::{run_experiment, SimConfig};
use mdrepair::{prop1_rate, prp_rate, theorem3_rates, theorem4_rates, ChannelParams, DistortionSpec, RateEvaluation, RatePoint, Regime};
use serde::Serialize;

use crate::args::{
    Distortions, EntropyArgs, Expr, Format, OracleArgs, SimulateArgs, SweepArgs, ThreeNodeArgs, TwoNodeArgs,
};

/// Bad input from the command line; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn spec(d: &Distortions) -> Result<DistortionSpec> {
    DistortionSpec::new(d.d1, d.d2).map_err(|e| usage(e.to_string()))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

const POINT_HEADER: &str = "regime,r,r_repair,r_total,rho,sigma_u_sq,sigma_q_sq,top_sigma_sq";

fn point_fields(p: &RatePoint) -> Vec<(&'static str, String)> {
    let mut fields = vec![
        ("regime", p.regime.map_or_else(|| "-".to_string(), |r| r.to_string())),
        ("r", fmt_sig(p.r)),
        ("r_repair", fmt_sig(p.r_repair)),
        ("r_total", fmt_sig(p.r_total)),
    ];
    let params = p.params.as_ref();
    let layer = params.and_then(|c| c.layers.first());
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt_sig);
    fields.push(("rho", opt(layer.map(|l| l.rho))));
    fields.push(("sigma_u_sq", opt(layer.map(|l| l.sigma_u_sq))));
    fields.push(("sigma_q_sq", opt(layer.map(|l| l.sigma_q_sq))));
    fields.push(("top_sigma_sq", opt(params.map(|c| c.top_sigma_sq))));
    fields
}

fn point_text(p: &RatePoint) -> String {
    point_fields(p).iter().map(|(k, v)| format!("{k:<13}{v}\n")).collect()
}

fn point_row(p: &RatePoint) -> String {
    point_fields(p).into_iter().map(|(_, v)| v).collect::<Vec<_>>().join(",")
}

fn render_point(p: &RatePoint, format: Format) -> String {
    match format {
        Format::Text => point_text(p),
        Format::Json => json(p),
        Format::Csv => format!("{POINT_HEADER}\n{}\n", point_row(p)),
    }
}

pub fn two_node(args: &TwoNodeArgs) -> Result<String> {
    let point = two_node_optimal(&spec(&args.d)?)?;
    Ok(render_point(&point, args.format))
}

#[derive(Serialize)]
struct RegimeOptimum {
    regime: Regime,
    point: Option<RatePoint>,
}

#[derive(Serialize)]
struct ThreeNodeOutput {
    regimes: Vec<RegimeOptimum>,
    best: RatePoint,
}

pub fn three_node(args: &ThreeNodeArgs) -> Result<String> {
    let spec = spec(&args.d)?;
    let cfg = OptimizerConfig::default().with_grid_points(args.grid as usize);
    let regimes = three_node_regime_optima(&spec, &cfg)?
        .into_iter()
        .map(|(regime, point)| RegimeOptimum { regime, point })
        .collect();
    let out = ThreeNodeOutput { regimes, best: three_node_optimal(&spec, &cfg)? };
    Ok(match args.format {
        Format::Json => json(&out),
        Format::Text => {
            let mut s = String::new();
            for o in &out.regimes {
                match &o.point {
                    Some(p) => writeln!(s, "{:<18}R={} R_r={} R_t={}", o.regime.as_str(), fmt_sig(p.r), fmt_sig(p.r_repair), fmt_sig(p.r_total)),
                    None => writeln!(s, "{:<18}infeasible", o.regime.as_str()),
                }
                .unwrap();
            }
            s + "best\n" + &point_text(&out.best)
        }
        Format::Csv => {
            let mut s = format!("kind,{POINT_HEADER}\n");
            for o in &out.regimes {
                match &o.point {
                    Some(p) => writeln!(s, "regime,{}", point_row(p)),
                    None => writeln!(s, "regime,{},,,,,,,", o.regime),
                }
                .unwrap();
            }
            s + "best," + &point_row(&out.best) + "\n"
        }
    })
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<()> {
    if args.d2_min > args.d2_max {
        return Err(usage(format!("--d2-min {} exceeds --d2-max {}", args.d2_min, args.d2_max)));
    }
    if args.d2_max > args.d1 {
        return Err(usage(format!("--d2-max {} exceeds --d1 {}", args.d2_max, args.d1)));
    }
    let cfg = OptimizerConfig::default().with_grid_points(args.grid as usize);
    let result = sweep(args.d1, &linspace(args.d2_min, args.d2_max, args.steps as usize), &cfg)?;
    emit(&result.to_csv(), args.out.as_deref())
}

pub fn oracle(args: &OracleArgs) -> Result<String> {
    let spec = spec(&args.d)?;
    let grid = OracleGrid {
        rho_points: args.rho_points,
        sigma_u_points: args.sigma_u_points,
        top_points: args.top_points,
        ..OracleGrid::default()
    };
    let point = brute_force_oracle(&spec, args.nodes as usize, &grid)?;
    Ok(render_point(&point, args.format))
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = spec(&args.d)?;
    if !(args.overhead > 0.0 && args.overhead.is_finite()) {
        return Err(usage(format!("--overhead {} must be positive", args.overhead)));
    }
    let cfg = SimConfig::for_spec(args.nodes as usize, spec, args.samples as usize, args.seed)?
        .with_overhead(args.overhead);
    let report = run_experiment(&cfg, args.trials as usize)?;
    emit(&json(&report), args.out.as_deref())?;
    if !report.all_repairs_exact() {
        bail!("repair was not exact in {:.4}% of failures", 100.0 * (1.0 - report.repair_exact_rate));
    }
    Ok(())
}

pub fn entropy(args: &EntropyArgs) -> Result<String> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("cannot read {}", args.config.display()))?;
    let params = ChannelParams::from_json(&text).map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
    params.validate().map_err(|e| usage(e.to_string()))?;
    let eval = match args.expr {
        Expr::Thm3 => theorem3_rates(&params),
        Expr::Thm4 => theorem4_rates(&params),
        Expr::Prop1 => prop1_rate(&params),
        Expr::Prp => prp_rate(&params),
    }?;
    Ok(render_evaluation(&eval, args.format))
}

fn render_evaluation(e: &RateEvaluation, format: Format) -> String {
    let terms = e.terms.iter().map(|t| ("r", t)).chain(e.repair_terms.iter().map(|t| ("r_repair", t)));
    match format {
        Format::Json => json(e),
        Format::Text => {
            let mut s = format!("R   = {}\nR_r = {}\nR_t = {}\n", fmt_sig(e.r), fmt_sig(e.r_repair), fmt_sig(e.r_total));
            for (kind, t) in terms {
                writeln!(s, "  {kind:<9}{:<13}{}", t.name, fmt_sig(t.value)).unwrap();
            }
            s
        }
        Format::Csv => {
            let mut s = format!("rate,term,value\nr,total,{}\nr_repair,total,{}\n", fmt_sig(e.r), fmt_sig(e.r_repair));
            for (kind, t) in terms {
                writeln!(s, "{kind},{},{}", t.name, fmt_sig(t.value)).unwrap();
            }
            s
        }
    }
}
