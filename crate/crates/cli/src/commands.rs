//! One function per subcommand. Each writes its artifacts into the sink and
//! returns divergence notes; validation problems come back as errors.

use peakwidths::ballwidths::{combine_restarts, width_restart, BallWidthProblem, WidthOptions};
use peakwidths::cusp::{decay_setup, DecayOptions, DecayReport, GlobalProbe};
use peakwidths::exponents::{cube_exponent, width_exponent};
use peakwidths::hardy::{asymptotic_a_check, flatness};
use peakwidths::params::{derive_quantities, validate_regime};
use peakwidths::partition::{multiplicity_check, schedule_cardinalities, zk_levels, IntervalPartition, PartitionSchedule};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{BallWidthsSection, Config, Model};
use crate::output::{num, opt, Sink, Table};
use crate::Failure;

fn invalid(e: peakwidths::Error) -> Failure {
    Failure::Validation(e.to_string())
}

fn admissible(cfg: &Config) -> Result<Model, Failure> {
    let m = cfg.model()?;
    let violations = validate_regime(&m.params, &m.g, &m.v, &m.cusp);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Failure::Validation(format!("hypotheses violated: {}", list.join("; "))));
    }
    Ok(m)
}

pub fn exponent(cfg: &Config, sink: &mut Sink) -> Result<Vec<String>, Failure> {
    let m = admissible(cfg)?;
    let dq = derive_quantities(&m.params, &m.g, &m.v, &m.cusp);
    let pred = width_exponent(&dq, &m.params);
    let pr = &cfg.problem;
    let cube = cube_exponent(pr.p, pr.q, pr.r, pr.d, pr.kind.into()).map_err(invalid)?;
    let thetas = pred.thetas.map(|t| t.map(Some)).unwrap_or([None; 4]);
    let mut t = Table::new([
        "p", "q", "r", "d", "kind", "delta", "alpha", "qhat", "regime", "covered", "theta_star", "sigma_star", "theta1",
        "theta2", "theta3", "theta4", "cube_exponent", "note",
    ]);
    let mut row = vec![
        num(pr.p),
        num(pr.q),
        pr.r.to_string(),
        pr.d.to_string(),
        pr.kind.name().to_string(),
        num(dq.delta),
        num(dq.alpha),
        num(dq.qhat),
        pred.regime.to_string(),
        pred.covered.to_string(),
        opt(pred.theta_star),
        opt(pred.sigma_star),
    ];
    row.extend(thetas.iter().map(|&x| opt(x)));
    row.push(opt(cube));
    row.push(pred.note.to_string());
    t.push(row);
    sink.table("exponent.csv", &t)?;
    Ok(Vec::new())
}

pub fn hardy(cfg: &Config, tol: f64, sink: &mut Sink) -> Result<Vec<String>, Failure> {
    let m = admissible(cfg)?;
    let h = &cfg.hardy;
    if h.points < 2 || h.log2_tau_min >= h.log2_tau_max || h.log2_tau_max > -2 {
        return Err(Failure::Validation(format!(
            "tau grid needs at least 2 points and log2_tau_min < log2_tau_max <= -2, got {h:?}"
        )));
    }
    let span = (h.log2_tau_max - h.log2_tau_min) as f64;
    let taus: Vec<f64> = (0..h.points)
        .map(|k| (h.log2_tau_min as f64 + span * k as f64 / (h.points - 1) as f64).exp2())
        .collect();
    let rows = taus
        .par_iter()
        .map(|&tau| asymptotic_a_check(&m.g, &m.v, &m.cusp, &m.params, &[tau], tol).map(|r| r.rows[0]))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid)?;
    let mut t = Table::new(["tau", "a", "ratio"]);
    for r in &rows {
        t.push(vec![num(r.tau), num(r.a), num(r.ratio)]);
    }
    sink.table("hardy.csv", &t)?;
    let mut notes = Vec::new();
    if let Some(r) = rows.iter().find(|r| !r.a.is_finite()) {
        notes.push(format!("embedding constant diverges at tau = {}", r.tau));
    }
    let max_over_min = flatness(rows.iter().map(|r| r.ratio));
    sink.json("hardy_summary.json", &json!({ "max_over_min": max_over_min, "points": rows.len() }))?;
    Ok(notes)
}

pub fn partition(cfg: &Config, sink: &mut Sink) -> Result<Vec<String>, Failure> {
    let m = admissible(cfg)?;
    let pc = &cfg.partition;
    let dq = derive_quantities(&m.params, &m.g, &m.v, &m.cusp);
    let sched = PartitionSchedule::auto(pc.n, m.params.d, dq.delta, dq.alpha, Some(dq.qhat)).map_err(invalid)?;
    let table = schedule_cardinalities(&sched);
    let mut t = Table::new(["t", "m_star", "l", "slabs", "cells"]);
    for r in &table.rows {
        t.push(vec![
            r.t.to_string(),
            r.m_star.to_string(),
            r.l.to_string(),
            r.slabs.to_string(),
            r.cells.to_string(),
        ]);
    }
    sink.table("partition.csv", &t)?;
    let zk = zk_levels(&m.cusp, 0.5, pc.depth).map_err(invalid)?;
    let cert = IntervalPartition::new(zk)
        .and_then(|p| multiplicity_check(&p, &m.cusp, pc.c_hat))
        .map_err(invalid)?;
    sink.json(
        "partition_summary.json",
        &json!({
            "level": sched.level(),
            "eps": sched.eps,
            "t_star": sched.t_star,
            "tail_cells": table.tail_cells,
            "total": table.total,
            "ratio": table.ratio,
            "depth": pc.depth,
            "c_hat": pc.c_hat,
            "max_overlap": cert.max_overlap,
            "histogram": cert.histogram,
        }),
    )?;
    Ok(Vec::new())
}

pub fn ballwidths(bw: &BallWidthsSection, seed: u64, sink: &mut Sink) -> Result<Vec<String>, Failure> {
    let prob = BallWidthProblem::new(bw.nu, bw.n, bw.p, bw.q, bw.kind.ball_kind()).map_err(invalid)?;
    let opts = WidthOptions {
        restarts: bw.restarts.max(1),
        samples: bw.samples.max(1),
        seed,
        ..WidthOptions::default()
    };
    let results: Vec<_> = (0..opts.restarts).into_par_iter().map(|k| width_restart(&prob, &opts, k)).collect();
    let est = combine_restarts(&prob, &opts, &results).map_err(invalid)?;
    let mut t = Table::new(["nu", "n", "p", "q", "kind", "upper", "inner_sup", "best_restart"]);
    t.push(vec![
        bw.nu.to_string(),
        bw.n.to_string(),
        num(bw.p),
        num(bw.q),
        bw.kind.name().to_string(),
        num(est.upper),
        num(est.inner_sup),
        est.best_restart.to_string(),
    ]);
    sink.table("ballwidths.csv", &t)?;
    let mut r = Table::new(["restart", "value"]);
    for res in &results {
        r.push(vec![res.restart.to_string(), num(res.value)]);
    }
    sink.table("ballwidths_restarts.csv", &r)?;
    Ok(Vec::new())
}

/// Doubling sequence from `nmin` up to `nmax`.
pub fn targets(nmin: usize, nmax: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = nmin.max(1);
    while n <= nmax {
        out.push(n);
        n *= 2;
    }
    out
}

/// Root-mean-square residual of the fit in log coordinates.
fn log_residual(rep: &DecayReport) -> Option<f64> {
    let (s, c) = (rep.slope?, rep.intercept?);
    let pts: Vec<(f64, f64)> = rep.n_values().iter().zip(rep.errors()).map(|(&n, e)| ((n as f64).ln(), e.ln())).collect();
    let ss: f64 = pts.iter().map(|(x, y)| (y - c - s * x).powi(2)).sum();
    Some((ss / pts.len() as f64).sqrt())
}

pub fn decay(cfg: &Config, sink: &mut Sink) -> Result<Vec<String>, Failure> {
    let m = admissible(cfg)?;
    let dc = &cfg.decay;
    let n_list = targets(dc.nmin, dc.nmax);
    if n_list.len() < 2 {
        return Err(Failure::Validation(format!("need nmax >= 2 nmin, got [{}, {}]", dc.nmin, dc.nmax)));
    }
    let options = DecayOptions {
        probes: GlobalProbe::defaults().into_iter().take(dc.probes).collect(),
        bumps: dc.bumps,
        ..DecayOptions::default()
    };
    let (setup, levels) = decay_setup(&m.params, &m.g, &m.v, &m.cusp, &n_list, options).map_err(invalid)?;
    let points = levels
        .par_iter()
        .map(|&l| setup.point(l))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid)?;
    let rep = setup.summarize(points);
    let probe_names: Vec<String> = setup.probes.iter().map(|(p, _)| p.name()).collect();
    let mut header = vec!["n".to_string(), "level".into(), "worst_error".into(), "bump_error".into(), "bump_slab".into()];
    header.extend(probe_names.iter().cloned());
    let mut t = Table::new(header);
    for p in &rep.points {
        let mut row = vec![
            p.cells.to_string(),
            p.level.to_string(),
            num(p.worst()),
            opt(p.bump_error.map(|b| b.1)),
            p.bump_error.map(|b| b.0.to_string()).unwrap_or_default(),
        ];
        row.extend(p.probe_errors.iter().map(|&e| num(e)));
        t.push(row);
    }
    sink.table("decay.csv", &t)?;
    sink.json(
        "decay_summary.json",
        &json!({
            "slope": rep.slope,
            "intercept": rep.intercept,
            "r2": rep.r2,
            "residual": log_residual(&rep),
            "predicted_exponent": rep.predicted,
            "log_factor": rep.log_factor,
            "verdict": rep.verdict.to_string(),
            "targets": n_list,
        }),
    )?;
    let mut notes = Vec::new();
    if rep.errors().iter().any(|e| !e.is_finite()) {
        notes.push("non-finite approximation error".to_string());
    }
    Ok(notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_targets() {
        assert_eq!(targets(64, 4096), vec![64, 128, 256, 512, 1024, 2048, 4096]);
        assert_eq!(targets(64, 100), vec![64]);
        assert!(targets(10, 5).is_empty());
    }
}
