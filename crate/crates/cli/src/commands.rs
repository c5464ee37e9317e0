use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

use hardy_core::diagnostics::{e_r_measure, non_blaschke_curve, stolz_membership};
use hardy_core::disc::{Configuration, DiscPoint, QWeight};
use hardy_core::extremal::{
    envelope_build, extremal_exhaustive, extremal_records, greedy_records, rate_fit, Envelope,
    ExtremalRecord, PointSet, RateFit,
};
use hardy_core::io::{parse_point_set, ExperimentConfig, MethodChoice};
use hardy_core::models::{model_eval, model_hp_norm, HardyModel, HpNorm};
use hardy_core::recovery::{PIndex, RecoveryOperator};
use hardy_core::stability::{stability_report, Budgets, ReportExtras, StabilityReport};
use hardy_core::uniqueness::{eta_weights, uniqueness_audit, BlockPartition, UniquenessAudit};
use hardy_core::{Complex64, Error};

use crate::output::{nodes, num, write_json, Table};
use crate::{CliError, Context};

fn load_set(ctx: &Context, allow_closure: bool) -> Result<PointSet, CliError> {
    Ok(parse_point_set(&ctx.read_input()?, &ctx.label(), allow_closure)?.set)
}

fn records_for(
    set: &PointSet,
    q: &QWeight,
    config: &ExperimentConfig,
    n_max: usize,
) -> Result<Vec<ExtremalRecord>, Error> {
    let budget = config.extremal.budget as u128;
    match config.extremal.method {
        MethodChoice::Auto => extremal_records(set, q, n_max, budget),
        MethodChoice::Exhaustive => (1..=n_max)
            .map(|n| extremal_exhaustive(set, q, n, budget))
            .collect(),
        MethodChoice::Greedy => greedy_records(set, q, n_max),
    }
}

fn clamp_n_max(requested: usize, set: &PointSet) -> (usize, Option<String>) {
    if requested > set.len() {
        let msg = format!(
            "warning: n_max {requested} clamped to |E| = {}",
            set.len()
        );
        warn!("{msg}");
        (set.len(), Some(msg))
    } else {
        (requested, None)
    }
}

#[derive(Serialize)]
struct ExtremalReport<'a> {
    input: String,
    q: &'a QWeight,
    n_requested: usize,
    n_max: usize,
    records: &'a [ExtremalRecord],
    envelope: Envelope,
    rate_fit: Option<RateFit>,
}

pub fn extremal(ctx: &Context) -> Result<(), CliError> {
    let set = load_set(ctx, false)?;
    let cfg = &ctx.config;
    let q = cfg.q_weight()?;
    let (n_max, warning) = clamp_n_max(cfg.extremal.n_max, &set);
    let records = records_for(&set, &q, cfg, n_max)?;

    let mut table = Table::new(&["n", "method", "V", "V_root", "M", "mu", "mu_min", "ties", "nodes"]);
    if let Some(w) = &warning {
        table.comment(w);
    }
    for r in &records {
        table.row([
            r.n.to_string(),
            r.method.as_str().to_string(),
            num(r.v),
            num(r.v_root()),
            num(r.m),
            num(r.mu),
            num(r.mu_min),
            r.ties.to_string(),
            nodes(r.config.nodes()),
        ]);
    }
    table.save(&ctx.out_dir, "extremal.csv")?;

    let fit = if records.len() >= 4 {
        rate_fit(&records, 1)
            .map_err(|e| warn!("no rate fit: {e}"))
            .ok()
    } else {
        None
    };
    write_json(
        &ctx.out_dir,
        "extremal.json",
        &ExtremalReport {
            input: ctx.label(),
            q: &q,
            n_requested: cfg.extremal.n_max,
            n_max,
            records: &records,
            envelope: envelope_build(&records)?,
            rate_fit: fit,
        },
    )
}

#[derive(Serialize)]
struct StabilityFile<'a> {
    input: String,
    p: PIndex,
    radius: f64,
    q: &'a QWeight,
    budgets: Budgets,
    envelope: Option<&'a Envelope>,
    rate_fit: Option<&'a RateFit>,
    reports: &'a [StabilityReport],
}

pub fn stability(ctx: &Context) -> Result<(), CliError> {
    let set = load_set(ctx, false)?;
    let cfg = &ctx.config;
    let q = cfg.q_weight()?;
    let budgets = cfg.budgets();

    let needs_records = cfg.stability.envelope || cfg.stability.rate_fit_n_min.is_some();
    let records = if needs_records {
        let (n_max, _) = clamp_n_max(cfg.extremal.n_max, &set);
        records_for(&set, &q, cfg, n_max)?
    } else {
        Vec::new()
    };
    let envelope = if cfg.stability.envelope {
        let env = envelope_build(&records)?;
        Some(match cfg.stability.power_law_sigma {
            Some(sigma) => env.with_power_law(sigma),
            None => env,
        })
    } else {
        None
    };
    let fit = match cfg.stability.rate_fit_n_min {
        Some(n_min) => Some(rate_fit(&records, n_min)?),
        None => None,
    };

    let mut eps_list = cfg.eps_list.clone();
    eps_list.sort_by(|a, b| b.total_cmp(a));
    let reports = eps_list
        .iter()
        .map(|&eps| {
            stability_report(
                &set,
                &q,
                eps,
                cfg.radius,
                cfg.p,
                &budgets,
                ReportExtras {
                    envelope: envelope.as_ref(),
                    fit: fit.as_ref(),
                    r_max: Some(cfg.stability.r_max),
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["eps", "lower", "upper", "cap", "phi_eps"]);
    for r in &reports {
        table.row([
            num(r.eps),
            num(r.lower),
            num(r.upper),
            num(r.cap),
            r.phi_eps.map(num).unwrap_or_default(),
        ]);
    }
    table.save(&ctx.out_dir, "stability_sweep.csv")?;
    write_json(
        &ctx.out_dir,
        "stability.json",
        &StabilityFile {
            input: ctx.label(),
            p: cfg.p,
            radius: cfg.radius,
            q: &q,
            budgets,
            envelope: envelope.as_ref(),
            rate_fit: fit.as_ref(),
            reports: &reports,
        },
    )
}

fn require_model(cfg: &ExperimentConfig, cmd: &str) -> Result<HardyModel, CliError> {
    cfg.model
        .clone()
        .ok_or_else(|| CliError::Usage(format!("{cmd} needs a \"model\" in the configuration")))
}

#[derive(Serialize)]
struct RecoverSummary<'a> {
    input: String,
    model: &'a HardyModel,
    p: PIndex,
    norm: HpNorm,
    seed: u64,
    probe_radius: f64,
    probe_count: usize,
    max_residual: f64,
    max_bound_ratio: f64,
    violations: usize,
    max_node_residual: f64,
}

pub fn recover(ctx: &Context) -> Result<(), CliError> {
    let set = load_set(ctx, false)?;
    let cfg = &ctx.config;
    let model = require_model(cfg, "recover")?;
    let radius = cfg.recover.probe_radius;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::OutOfRange {
            name: "probe_radius",
            value: radius,
            range: "(0, 1)".into(),
        }
        .into());
    }
    let config = Configuration::new(set.disc_points())?;
    let op = RecoveryOperator::new(&config, cfg.p)?;
    let samples = set
        .disc_points()
        .into_iter()
        .map(|z| model_eval(&model, z))
        .collect::<Result<Vec<_>, _>>()?;
    let norm = model_hp_norm(&model, cfg.p);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probes: Vec<DiscPoint> = (0..cfg.recover.probe_count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            DiscPoint::from_polar(r, TAU * rng.gen::<f64>())
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&[
        "re", "im", "f_re", "f_im", "recovered_re", "recovered_im", "residual", "bound",
    ]);
    let (mut max_residual, mut max_ratio, mut violations) = (0.0f64, 0.0f64, 0);
    for z in probes {
        let exact = model_eval(&model, z)?;
        let rec = op.recover_with_bound(&samples, z, norm.upper())?;
        let residual = (exact - rec.value).norm();
        max_residual = max_residual.max(residual);
        if rec.error_bound > 0.0 {
            max_ratio = max_ratio.max(residual / rec.error_bound);
        }
        if residual > rec.error_bound + 1e-9 {
            violations += 1;
        }
        table.row([
            num(z.value().re),
            num(z.value().im),
            num(exact.re),
            num(exact.im),
            num(rec.value.re),
            num(rec.value.im),
            num(residual),
            num(rec.error_bound),
        ]);
    }
    table.save(&ctx.out_dir, "recover.csv")?;

    let mut nodes_table = Table::new(&["j", "re", "im", "residual"]);
    let mut max_node = 0.0f64;
    for (j, z) in set.disc_points().into_iter().enumerate() {
        let rec = op.recover(&samples, z)?;
        let residual = (samples[j] - rec).norm();
        max_node = max_node.max(residual);
        nodes_table.row([
            (j + 1).to_string(),
            num(z.value().re),
            num(z.value().im),
            num(residual),
        ]);
    }
    nodes_table.save(&ctx.out_dir, "node_residuals.csv")?;

    write_json(
        &ctx.out_dir,
        "recover.json",
        &RecoverSummary {
            input: ctx.label(),
            model: &model,
            p: cfg.p,
            norm,
            seed: cfg.seed,
            probe_radius: radius,
            probe_count: cfg.recover.probe_count,
            max_residual,
            max_bound_ratio: max_ratio,
            violations,
            max_node_residual: max_node,
        },
    )
}

#[derive(Serialize)]
struct AuditFile<'a> {
    input: String,
    model: Option<&'a HardyModel>,
    boundaries: Vec<usize>,
    partition: &'a BlockPartition,
    audit: &'a UniquenessAudit,
    verdict_text: &'static str,
}

pub fn uniqueness(ctx: &Context) -> Result<(), CliError> {
    let set = load_set(ctx, false)?;
    let cfg = &ctx.config;
    let points = set.disc_points();
    let weights = eta_weights(&points)?;
    let samples: Vec<Complex64> = match &cfg.model {
        Some(m) => points
            .iter()
            .map(|&z| model_eval(m, z))
            .collect::<Result<_, _>>()?,
        None => vec![Complex64::new(0.0, 0.0); points.len()],
    };
    let audit = uniqueness_audit(&points, &samples, &weights, cfg.uniqueness.probe)?;
    let partition = &weights.partition;

    let mut blocks = Table::new(&["k", "n_k", "n_next", "m_k", "mass", "ratio_max", "bound"]);
    for (b, range) in audit.blocks.iter().zip(partition.blocks()) {
        blocks.row([
            b.k.to_string(),
            (range.start + 1).to_string(),
            (range.end + 1).to_string(),
            b.len.to_string(),
            num(b.mass),
            num(b.ratio_max),
            num(b.bound),
        ]);
    }
    blocks.save(&ctx.out_dir, "blocks.csv")?;

    let mut eta = Table::new(&["j", "block", "re", "im", "eta", "log_eta"]);
    for (k, range) in partition.blocks().enumerate() {
        for j in range {
            eta.row([
                (j + 1).to_string(),
                (k + 1).to_string(),
                num(points[j].value().re),
                num(points[j].value().im),
                num(weights.eta[j]),
                num(weights.log_eta[j]),
            ]);
        }
    }
    eta.save(&ctx.out_dir, "eta.csv")?;

    write_json(
        &ctx.out_dir,
        "audit.json",
        &AuditFile {
            input: ctx.label(),
            model: cfg.model.as_ref(),
            boundaries: partition.boundaries_one_based(),
            partition,
            audit: &audit,
            verdict_text: audit.verdict.describe(),
        },
    )
}

#[derive(Serialize)]
struct MeasureRow {
    r: f64,
    measure: f64,
    arcs: usize,
    contains_zero: bool,
}

#[derive(Serialize)]
struct DiagnoseFile {
    input: String,
    points: usize,
    mass_total: f64,
    stolz_k: f64,
    stolz_vertices: Vec<f64>,
    stolz_inside: Vec<usize>,
    e_r: Vec<MeasureRow>,
}

pub fn diagnose(ctx: &Context) -> Result<(), CliError> {
    let set = load_set(ctx, true)?;
    let cfg = &ctx.config.diagnose;
    let points = set.disc_points();

    let curve = non_blaschke_curve(&points);
    let mut bsum = Table::new(&["j", "modulus", "partial_sum"]);
    for (j, (p, s)) in points.iter().zip(&curve).enumerate() {
        bsum.row([(j + 1).to_string(), num(p.modulus()), num(*s)]);
    }
    bsum.save(&ctx.out_dir, "bsum.csv")?;

    let mut stolz = Table::new(&["j", "re", "im", "vertex_theta", "k", "inside"]);
    let mut inside_counts = Vec::with_capacity(cfg.stolz_vertices.len());
    for &theta in &cfg.stolz_vertices {
        let vertex = DiscPoint::new(Complex64::from_polar(1.0, theta))?;
        let mut count = 0;
        for (j, &z) in points.iter().enumerate() {
            let inside = stolz_membership(z, vertex, cfg.stolz_k)?;
            count += inside as usize;
            stolz.row([
                (j + 1).to_string(),
                num(z.value().re),
                num(z.value().im),
                num(theta),
                num(cfg.stolz_k),
                (inside as u8).to_string(),
            ]);
        }
        inside_counts.push(count);
    }
    stolz.save(&ctx.out_dir, "stolz.csv")?;

    let mut measures = Table::new(&["r", "measure", "arcs"]);
    let mut arcs_table = Table::new(&["r", "theta_lo", "theta_hi"]);
    let mut rows = Vec::with_capacity(cfg.r_list.len());
    for &r in &cfg.r_list {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                range: "[0, 1)".into(),
            }
            .into());
        }
        let (arcs, measure) = e_r_measure(&set, r);
        measures.row([num(r), num(measure), arcs.intervals().len().to_string()]);
        for &(lo, hi) in arcs.intervals() {
            arcs_table.row([num(r), num(lo), num(hi)]);
        }
        rows.push(MeasureRow {
            r,
            measure,
            arcs: arcs.intervals().len(),
            contains_zero: arcs.contains_zero(),
        });
    }
    measures.save(&ctx.out_dir, "er_measure.csv")?;
    arcs_table.save(&ctx.out_dir, "arcs.csv")?;

    write_json(
        &ctx.out_dir,
        "diagnose.json",
        &DiagnoseFile {
            input: ctx.label(),
            points: points.len(),
            mass_total: curve.last().copied().unwrap_or(0.0),
            stolz_k: cfg.stolz_k,
            stolz_vertices: cfg.stolz_vertices.clone(),
            stolz_inside: inside_counts,
            e_r: rows,
        },
    )
}
