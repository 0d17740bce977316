//! The five analysis commands. Each returns the process exit code: 0 for
//! success, 1 for invalid input, 2 for an analysis failure (aborted
//! simulation or no certificate).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use ratrec::{
    boundedness_by_exponent, characteristic_polynomial, check_certificate_general,
    check_certificate_q1, classify_equilibria, classify_structure, detect_divergence,
    detect_oscillation, envelope_windowed, equilibrium_interval_bounds, equilibrium_residual,
    find_equilibria, inverse_bounds, rouche_compare, schur_stable, search_certificate, simulate,
    CharPolynomial, CoefficientBands, EnvelopeSide, EquilibriumPoint, ExponentBoundedness,
    IntervalBounds, LagPairing, LimitSpec, RecurrenceSpec, SearchBox, Trajectory,
};

use crate::config::AnalysisConfig;
use crate::report::{
    CertificateSection, EnvelopePolySection, EquilibriaSection, PointStability, ReportRecord,
    SimulationSection, StabilitySection,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

pub struct CommandContext {
    pub config: AnalysisConfig,
    pub config_hash: String,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

impl CommandContext {
    fn record(&self, command: &str) -> ReportRecord {
        ReportRecord::new(command, self.config_hash.clone(), self.config.run.seed)
    }

    fn write_file(
        &self,
        record: &mut ReportRecord,
        enabled: bool,
        name: &str,
        contents: &str,
    ) -> Result<()> {
        let Some(dir) = &self.out_dir else { return Ok(()) };
        if !enabled {
            return Ok(());
        }
        fs::create_dir_all(dir)
            .with_context(|| format!("could not create output directory {}", dir.display()))?;
        let path = dir.join(name);
        fs::write(&path, contents)
            .with_context(|| format!("could not write {}", path.display()))?;
        record.outputs.insert(name.to_string(), path.display().to_string());
        Ok(())
    }

    fn emit(&self, record: &mut ReportRecord) -> Result<()> {
        // Record the report path first so file and stdout agree byte for byte.
        let report_path = match (&self.out_dir, self.config.outputs.report_json) {
            (Some(dir), true) => {
                let path = dir.join("report.json");
                record.outputs.insert("report.json".to_string(), path.display().to_string());
                Some(path)
            }
            _ => None,
        };
        let json = record.to_json();
        if let Some(path) = report_path {
            fs::create_dir_all(path.parent().expect("report path has a parent"))?;
            fs::write(&path, &json)
                .with_context(|| format!("could not write {}", path.display()))?;
        }
        match self.format {
            OutputFormat::Json => print!("{json}"),
            OutputFormat::Csv => print!("{}", record.to_kv_csv()),
        }
        Ok(())
    }
}

fn csv_string(write: impl Fn(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    write(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf-8")
}

fn simulation_section(
    ctx: &CommandContext,
    traj: &Trajectory,
    steps: usize,
    record: &mut ReportRecord,
) -> SimulationSection {
    let mut section = SimulationSection::from_trajectory(traj, steps);
    section.divergence = detect_divergence(traj, ctx.config.run.divergence_threshold);
    match detect_oscillation(traj, ctx.config.run.oscillation_window_cap) {
        Ok(report) => {
            section.oscillatory = Some(report.oscillatory);
            section.oscillation_witnesses = Some(report.witnesses.len());
        }
        Err(_) => {
            record.notes.push("trajectory too short for the oscillation scan".to_string());
        }
    }
    section
}

pub fn cmd_simulate(ctx: &CommandContext) -> Result<i32> {
    let spec = ctx.config.build_spec()?;
    let init = ctx
        .config
        .build_init()?
        .context("simulate needs an init block with the window values")?;
    let steps = ctx.config.run.steps;
    if steps == 0 {
        bail!("steps must be >= 1");
    }
    let mut record = ctx.record("simulate");
    let admissibility = spec.check_admissible(&init)?;
    if !admissibility.admissible {
        record.admissibility = Some(admissibility);
        record.notes.push("initial window is inadmissible".to_string());
        ctx.emit(&mut record)?;
        return Ok(EXIT_INVALID);
    }
    record.admissibility = Some(admissibility);

    let traj = simulate(&spec, &init, steps, ctx.config.run.seed)?;
    let section = simulation_section(ctx, &traj, steps, &mut record);
    let halted = traj.halt().is_some();
    record.simulation = Some(section);
    let csv = csv_string(|buf| traj.write_csv(buf));
    ctx.write_file(&mut record, ctx.config.outputs.trajectory_csv, "trajectory.csv", &csv)?;
    ctx.emit(&mut record)?;
    Ok(if halted { EXIT_FAILED } else { EXIT_OK })
}

fn certificate_section(
    ctx: &CommandContext,
    spec: &RecurrenceSpec,
) -> Result<(CertificateSection, bool)> {
    let bands = CoefficientBands::from_spec(spec);
    let exponent_criterion = match boundedness_by_exponent(spec) {
        ExponentBoundedness::Bounded => "bounded-by-exponent-criterion".to_string(),
        ExponentBoundedness::Inconclusive => "inconclusive".to_string(),
    };
    let run = &ctx.config.run;
    let (mode, cert) = match run.certificate {
        Some(interval) => {
            let cert = check_certificate_general(spec, interval.m, interval.big_m, &bands)?;
            ("check", Some(cert))
        }
        None => {
            let mut search_box = SearchBox::from_bands(&bands);
            if let Some(overrides) = run.search {
                if let Some(v) = overrides.m_low {
                    search_box.m_range.0 = v;
                }
                if let Some(v) = overrides.m_high {
                    search_box.m_range.1 = v;
                }
                if let Some(v) = overrides.big_m_low {
                    search_box.big_m_range.0 = v;
                }
                if let Some(v) = overrides.big_m_high {
                    search_box.big_m_range.1 = v;
                }
                search_box.per_axis = overrides.grid;
            }
            ("search", search_certificate(spec, &bands, &search_box)?)
        }
    };

    let single_term_verdicts = match (&cert, spec.q()) {
        (Some(cert), 1) => {
            Some(check_certificate_q1(spec, cert.m, cert.big_m, &bands)?.verdicts)
        }
        _ => None,
    };

    let section = match cert {
        Some(cert) => CertificateSection {
            mode,
            accepted: cert.accepted,
            m: Some(cert.m),
            big_m: Some(cert.big_m),
            inverse_bounds: cert.accepted.then(|| inverse_bounds(&cert)).transpose()?,
            selection: cert.selection,
            verdicts: cert.verdicts,
            single_term_verdicts,
            exponent_criterion,
        },
        None => CertificateSection {
            mode,
            accepted: false,
            m: None,
            big_m: None,
            inverse_bounds: None,
            selection: None,
            verdicts: BTreeMap::new(),
            single_term_verdicts: None,
            exponent_criterion,
        },
    };
    let accepted = section.accepted;
    Ok((section, accepted))
}

pub fn cmd_certify(ctx: &CommandContext) -> Result<i32> {
    let spec = ctx.config.build_spec()?;
    let mut record = ctx.record("certify");
    let (section, accepted) = certificate_section(ctx, &spec)?;
    if !accepted {
        record.notes.push("no accepted certificate".to_string());
    }
    record.certificate = Some(section);
    ctx.emit(&mut record)?;
    Ok(if accepted { EXIT_OK } else { EXIT_FAILED })
}

struct EquilibriaOutcome {
    limits: LimitSpec,
    interval: IntervalBounds,
    points: Vec<EquilibriumPoint>,
    section: EquilibriaSection,
}

fn equilibria_range(ctx: &CommandContext, limits: &LimitSpec, interval: &IntervalBounds) -> (f64, f64) {
    let lo = limits.a() * (1.0 - 1e-9);
    let hi = ctx.config.run.range_high.unwrap_or_else(|| {
        let cap = interval.v_cap.unwrap_or(1.0).max(1.0);
        (10.0 * (limits.a() + limits.b_sum() * cap)).max(1e3)
    });
    (lo, hi)
}

fn equilibria_outcome(ctx: &CommandContext, spec: &RecurrenceSpec) -> Result<EquilibriaOutcome> {
    let limits = LimitSpec::from_spec(spec)
        .context("equilibrium analysis needs declared coefficient limits")?;
    let structure = classify_structure(&limits);
    let interval = equilibrium_interval_bounds(&limits);
    let range = equilibria_range(ctx, &limits, &interval);
    let located = find_equilibria(&limits, range, ctx.config.run.grid_points)?;
    let (stable, unstable) =
        classify_equilibria(&limits, &located, ctx.config.run.margin_band)?;
    let mut points: Vec<EquilibriumPoint> =
        stable.iter().chain(unstable.iter()).cloned().collect();
    points.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    let section = EquilibriaSection {
        a: limits.a(),
        b: limits.terms().iter().map(|t| t.b).collect(),
        b_sum: limits.b_sum(),
        structure,
        interval,
        points: points.clone(),
        stable_points: stable.iter().map(|p| p.x).collect(),
        unstable_points: unstable.iter().map(|p| p.x).collect(),
    };
    Ok(EquilibriaOutcome { limits, interval, points, section })
}

fn residual_csv(ctx: &CommandContext, limits: &LimitSpec, interval: &IntervalBounds) -> String {
    let (lo, hi) = equilibria_range(ctx, limits, interval);
    let samples = 512usize;
    let mut out = String::from("x,g\n");
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / samples as f64;
    for i in 0..=samples {
        let x = if i == samples { hi } else { (log_lo + step * i as f64).exp() };
        let g = equilibrium_residual(limits, x).unwrap_or(f64::NAN);
        out.push_str(&format!("{x:.16e},{g:.16e}\n"));
    }
    out
}

pub fn cmd_equilibria(ctx: &CommandContext) -> Result<i32> {
    let spec = ctx.config.build_spec()?;
    let mut record = ctx.record("equilibria");
    let outcome = equilibria_outcome(ctx, &spec)?;
    let csv = residual_csv(ctx, &outcome.limits, &outcome.interval);
    ctx.write_file(&mut record, ctx.config.outputs.residual_csv, "residual.csv", &csv)?;
    record.equilibria = Some(outcome.section);
    ctx.emit(&mut record)?;
    Ok(EXIT_OK)
}

fn stability_section(ctx: &CommandContext, outcome: &EquilibriaOutcome) -> Result<StabilitySection> {
    let run = &ctx.config.run;
    let limits = &outcome.limits;
    let all_unit_lags = limits.terms().iter().all(|t| t.ell == 1 && t.s == 1);
    let (rho, _) = limits.rho_delta();

    let mut points = Vec::with_capacity(outcome.points.len());
    for point in &outcome.points {
        let poly = characteristic_polynomial(limits, point.x, LagPairing::Gradient)?;
        let verdict = schur_stable(&poly, run.margin_band)?;
        let origin = CharPolynomial::new(vec![0.0; poly.degree()])?;
        let comparison = rouche_compare(&poly, &origin, run.rouche_samples)?;
        let first_order = if all_unit_lags && rho < 0.0 {
            Some(ratrec::first_order_stability_condition(limits, point.x, rho)?)
        } else {
            None
        };
        points.push(PointStability {
            x: point.x,
            polynomial: poly.coeff_strings(),
            verdict,
            comparison_vs_origin: Some(comparison),
            first_order,
        });
    }

    let envelope_section = |side: EnvelopeSide, point: Option<f64>| -> Result<Option<EnvelopePolySection>> {
        let Some(point) = point else { return Ok(None) };
        let polys = ratrec::envelope_polynomials(limits, side, Some(point), LagPairing::Gradient)?;
        let mut verdicts = Vec::with_capacity(polys.len());
        for poly in &polys {
            verdicts.push(schur_stable(poly, run.margin_band)?);
        }
        Ok(Some(EnvelopePolySection {
            point,
            polynomials: polys.iter().map(|p| p.coeff_strings()).collect(),
            verdicts,
        }))
    };

    Ok(StabilitySection {
        margin_band: run.margin_band,
        pairing: "gradient",
        points,
        envelope_lower: envelope_section(EnvelopeSide::Lower, outcome.interval.omega)?,
        envelope_upper: envelope_section(EnvelopeSide::Upper, outcome.interval.v)?,
    })
}

pub fn cmd_stability(ctx: &CommandContext) -> Result<i32> {
    let spec = ctx.config.build_spec()?;
    let mut record = ctx.record("stability");
    let outcome = equilibria_outcome(ctx, &spec)?;
    record.stability = Some(stability_section(ctx, &outcome)?);
    record.equilibria = Some(outcome.section);
    ctx.emit(&mut record)?;
    Ok(EXIT_OK)
}

pub fn cmd_report(ctx: &CommandContext) -> Result<i32> {
    let spec = ctx.config.build_spec()?;
    let mut record = ctx.record("report");
    let mut severity = EXIT_OK;

    // Trajectory analysis, when an initial window is configured.
    let mut trajectory: Option<Trajectory> = None;
    match ctx.config.build_init()? {
        None => record.notes.push("no init block; simulation skipped".to_string()),
        Some(init) => {
            if ctx.config.run.steps == 0 {
                bail!("steps must be >= 1");
            }
            let admissibility = spec.check_admissible(&init)?;
            if admissibility.admissible {
                record.admissibility = Some(admissibility);
                let traj = simulate(&spec, &init, ctx.config.run.steps, ctx.config.run.seed)?;
                let section = simulation_section(ctx, &traj, ctx.config.run.steps, &mut record);
                if traj.halt().is_some() {
                    severity = severity.max(EXIT_FAILED);
                }
                record.simulation = Some(section);
                let csv = csv_string(|buf| traj.write_csv(buf));
                ctx.write_file(
                    &mut record,
                    ctx.config.outputs.trajectory_csv,
                    "trajectory.csv",
                    &csv,
                )?;
                trajectory = Some(traj);
            } else {
                record.admissibility = Some(admissibility);
                record.notes.push("initial window is inadmissible".to_string());
                severity = severity.max(EXIT_INVALID);
            }
        }
    }

    // Certificates.
    let (certificate, accepted) = certificate_section(ctx, &spec)?;
    if !accepted {
        record.notes.push("no accepted certificate".to_string());
        severity = severity.max(EXIT_FAILED);
    }
    record.certificate = Some(certificate);

    // Equilibria and stability need declared limits.
    match equilibria_outcome(ctx, &spec) {
        Ok(outcome) => {
            record.stability = Some(stability_section(ctx, &outcome)?);
            let csv = residual_csv(ctx, &outcome.limits, &outcome.interval);
            ctx.write_file(&mut record, ctx.config.outputs.residual_csv, "residual.csv", &csv)?;

            // Envelope pair alongside the trajectory, for plotting.
            if let (Some(_traj), Some(init)) = (&trajectory, ctx.config.build_init()?) {
                let pair = envelope_windowed(&outcome.limits, &init, ctx.config.run.steps)?;
                let csv = csv_string(|buf| pair.write_csv(buf));
                ctx.write_file(&mut record, ctx.config.outputs.envelope_csv, "envelope.csv", &csv)?;
            }
            record.equilibria = Some(outcome.section);
        }
        Err(err) => {
            record.notes.push(format!("equilibrium analysis skipped: {err:#}"));
            severity = severity.max(EXIT_INVALID);
        }
    }

    ctx.emit(&mut record)?;
    Ok(severity)
}

pub fn run(command: &str, ctx: &CommandContext) -> Result<i32> {
    match command {
        "simulate" => cmd_simulate(ctx),
        "certify" => cmd_certify(ctx),
        "equilibria" => cmd_equilibria(ctx),
        "stability" => cmd_stability(ctx),
        "report" => cmd_report(ctx),
        other => bail!("unknown command {other}"),
    }
}
