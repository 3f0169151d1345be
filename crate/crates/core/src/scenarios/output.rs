//! `report.json`, `norms.csv`, `trace.csv` and `fields_<t>.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentReport;
use crate::blowup::CharTrace;
use crate::error::Result;
use crate::real::Real;
use crate::solver::StepRecord;
use crate::state::SimState;

pub fn write_norms_csv<T: Real>(path: &Path, records: &[StepRecord<T>]) -> Result<()> {
    let mut s = String::from("t,sup_rho,sup_c,sup_grad_rho,sup_hess_c,sup_grad_log_c,X_m\n");
    for r in records {
        let n = &r.norms;
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t_scaled, n.sup_rho, n.sup_c, n.sup_grad_rho, n.sup_hess_c, n.sup_grad_log_c, n.x_m
        );
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn write_trace_csv<T: Real>(path: &Path, trace: &CharTrace<T>) -> Result<()> {
    let mut s = String::from("t,x,P,Q,P_tilde,Phi\n");
    for k in 0..trace.len() {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            trace.times[k], trace.positions[k], trace.p[k], trace.q[k], trace.p_tilde[k], trace.phi[k]
        );
    }
    fs::write(path, s)?;
    Ok(())
}

/// Cell centres followed by `ρ`, `c`, `log c` and the components of `q`.
pub fn write_fields_csv<T: Real>(path: &Path, state: &SimState<T>) -> Result<()> {
    let g = state.grid();
    let d = g.dim();
    let mut s = String::new();
    for k in 0..d {
        let _ = write!(s, "x{k},");
    }
    s.push_str("rho,c,log_c");
    for k in 0..d {
        let _ = write!(s, ",q{k}");
    }
    s.push('\n');
    for i in 0..g.len() {
        for x in g.position(i) {
            let _ = write!(s, "{x:e},");
        }
        let lc = state.log_c.values()[i];
        let _ = write!(s, "{:e},{:e},{:e}", state.rho.values()[i], lc.exp(), lc);
        for k in 0..d {
            let _ = write!(s, ",{:e}", state.q.component(k)[i]);
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

/// Writes every artefact of a report into `dir`; returns the files written.
pub fn write_outputs<T: Real + Serialize>(dir: &Path, report: &ExperimentReport<T>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let p = dir.join("report.json");
    fs::write(&p, serde_json::to_string_pretty(report)?)?;
    written.push(p);
    let p = dir.join("norms.csv");
    write_norms_csv(&p, &report.norm_series)?;
    written.push(p);
    if let Some(tr) = &report.trace {
        let p = dir.join("trace.csv");
        write_trace_csv(&p, tr)?;
        written.push(p);
    }
    for s in &report.snapshots {
        let p = dir.join(format!("fields_{:.6}.csv", s.t_scaled.to_f64_lossy()));
        write_fields_csv(&p, s)?;
        written.push(p);
    }
    Ok(written)
}
