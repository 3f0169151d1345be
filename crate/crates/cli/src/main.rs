use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hks_core::grid::Grid;
use hks_core::riemann::{det_grad_w, eigen, invert_w, w_detail, CharOdeConfig, PhasePoint};
use hks_core::scenarios::{
    run_cone_experiment, run_scenario, run_simulation, write_outputs, ExperimentReport, ScenarioConfig, ScenarioKind,
};
use serde_json::json;

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON scenario configuration (field names as in the report's `config`)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for report.json and the CSV files
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cells per axis (keeps dimension and domain)
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    cfl: Option<f64>,
    /// Artificial viscosity
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Target blow-up radius window `lo,hi` for the rescaled scenario
    #[arg(long, global = true, value_parser = parse_interval)]
    target_interval: Option<(f64, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Plain solver run with norm tracking
    Simulate {
        /// Preset used when no --config is given
        #[arg(long, default_value = "remark11")]
        scenario: String,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Riemann invariants, their gradient and the inversion at one state
    RiemannCheck {
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
    },
    /// 1D blow-up study (characteristic trace, Riccati bound, classification)
    Blowup {
        #[arg(long, default_value = "remark11")]
        scenario: String,
    },
    /// Bump-versus-background run checked against the propagation cone
    Propagation {
        #[arg(long, default_value = "remark11")]
        scenario: String,
        /// Cone centre, comma separated (defaults to the far corner of the domain)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.6)]
        t_star: f64,
    },
    /// Runs a named preset
    Scenario {
        name: String,
        /// Print the preset configuration instead of running it
        #[arg(long)]
        dump_config: bool,
    },
    /// Runs one scenario on several resolutions concurrently
    Sweep {
        #[arg(long, default_value = "remark11")]
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "512,1024,2048")]
        ns: Vec<usize>,
    },
}

#[derive(Parser)]
#[command(name = "hks", version, about = "Keller-Segel consumption system: simulations and blow-up experiments")]
struct Top {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo >= 0.0 && hi > lo) {
        return Err("need 0 <= lo < hi".into());
    }
    Ok((lo, hi))
}

fn load_config(common: &Common, preset: &str) -> Result<ScenarioConfig<f64>> {
    let mut c = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ScenarioConfig::preset(ScenarioKind::from_name(preset)?),
    };
    if let Some(n) = common.grid_n {
        let g = c.grid;
        c.grid = Grid::new(g.dim(), n, g.half_width(), g.boundary())?;
    }
    if let Some(v) = common.cfl {
        c.solver.cfl = v;
    }
    if let Some(v) = common.epsilon {
        c.solver.epsilon = v;
    }
    if let Some(t) = common.target_interval {
        c.target_interval = Some(t);
    }
    c.validate()?;
    Ok(c)
}

fn finish(common: &Common, report: &ExperimentReport<f64>) -> Result<()> {
    if let Some(dir) = &common.out {
        let files = write_outputs(dir, report)?;
        eprintln!("wrote {} files to {}", files.len(), dir.display());
    }
    println!("{}", serde_json::to_string_pretty(&summary(report))?);
    Ok(())
}

fn summary(r: &ExperimentReport<f64>) -> serde_json::Value {
    json!({
        "scenario": r.scenario,
        "config_hash": r.config_hash,
        "cells_per_axis": r.grid.n(),
        "dim": r.grid.dim(),
        "verdict": r.verdict,
        "steps": r.steps,
        "t_final": r.t_final,
        "classification": r.blowup.as_ref().map(|b| b.classification),
        "t_estimate": r.blowup.as_ref().and_then(|b| b.t_estimate),
        "riccati_t_upper": r.blowup.as_ref().and_then(|b| b.riccati_t_upper),
        "slice": r.slice,
        "localization": r.localization,
        "constant_check": r.constant_check,
        "notes": r.notes,
    })
}

fn riemann_check(rho: f64, q: f64) -> Result<serde_json::Value> {
    let cfg = CharOdeConfig::default();
    let p = PhasePoint::new(rho, q)?;
    let e = eigen(p)?;
    let d = w_detail(p, &cfg)?;
    let back = invert_w(d.w, &cfg)?;
    Ok(json!({
        "rho": rho,
        "q": q,
        "lambda": [e.lambda1, e.lambda2],
        "w": [d.w.w1, d.w.w2],
        "f": [d.f1, d.f2],
        "grad_w": [[d.f1, -e.lambda1 * d.f1], [d.f2, -e.lambda2 * d.f2]],
        "det_grad_w": det_grad_w(p, &cfg)?,
        "continued": d.continued,
        "roundtrip_error": (back.z1 - rho).abs().max((back.z2 - q).abs()),
    }))
}

fn sweep(common: &Common, preset: &str, ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        bail!("--ns is empty");
    }
    let configs = ns
        .iter()
        .map(|&n| load_config(&Common { grid_n: Some(n), ..common.clone() }, preset))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<Result<ExperimentReport<f64>>> = thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_scenario(c).map_err(anyhow::Error::from))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("worker panicked")))).collect()
    });
    let mut rows = Vec::new();
    let mut csv = String::from("n,verdict,t_final,steps,t_estimate,riccati_t_upper,classification\n");
    for (n, r) in ns.iter().zip(reports) {
        let r = r?;
        if let Some(dir) = &common.out {
            write_outputs(&dir.join(format!("n{n}")), &r)?;
        }
        let b = r.blowup.as_ref();
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        csv.push_str(&format!(
            "{n},{},{:e},{},{},{},{}\n",
            json!(r.verdict).as_str().unwrap_or_default(),
            r.t_final,
            r.steps,
            opt(b.and_then(|b| b.t_estimate)),
            opt(b.and_then(|b| b.riccati_t_upper)),
            b.map_or(String::new(), |b| json!(b.classification).as_str().unwrap_or_default().to_string()),
        ));
        rows.push(summary(&r));
    }
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.csv"), &csv)?;
    }
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(())
}

fn write_json(dir: Option<&Path>, name: &str, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let top = Top::parse();
    let common = &top.common;
    match top.command {
        Command::Simulate { scenario, t_end } => {
            let mut c = load_config(common, &scenario)?;
            if t_end.is_some() {
                c.t_end = t_end;
            }
            finish(common, &run_simulation(&c)?)
        }
        Command::RiemannCheck { rho, q } => {
            let v = riemann_check(rho, q)?;
            write_json(common.out.as_deref(), "riemann.json", &v)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(())
        }
        Command::Blowup { scenario } => {
            let c = load_config(common, &scenario)?;
            if c.grid.dim() != 1 {
                bail!("the blow-up study is one-dimensional");
            }
            finish(common, &run_scenario(&c)?)
        }
        Command::Propagation { scenario, center, t_star } => {
            let c = load_config(common, &scenario)?;
            let center = center.unwrap_or_else(|| vec![c.grid.half_width(); c.grid.dim()]);
            let e = run_cone_experiment(&c, center, t_star)?;
            let v = serde_json::to_value(&e)?;
            write_json(common.out.as_deref(), "report.json", &v)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            if e.report.cone_violation {
                bail!("cone violation: interior difference {:e} exceeds {:e}", e.report.max_interior_diff, e.report.tol);
            }
            Ok(())
        }
        Command::Scenario { name, dump_config } => {
            let c = load_config(common, &name)?;
            if dump_config {
                println!("{}", serde_json::to_string_pretty(&c)?);
                return Ok(());
            }
            finish(common, &run_scenario(&c)?)
        }
        Command::Sweep { scenario, ns } => sweep(common, &scenario, &ns),
    }
}
