//! The four subcommands. Each resolves its configuration (flags over config
//! file), runs the corresponding library operations, and embeds the resolved
//! configuration in its outputs.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use serde_json::json;

use confband::{
    build_band, check_theorem1_conditions, check_theorem2_conditions,
    check_translation_conditions, check_truncation_conditions, fit_log_level, kde_on_grid,
    preset_bickel_rosenblatt, preset_thinner_mse, preset_thinner_sup, preset_translated,
    simulate_noncoverage, sup_on_grid, BandFamily, BandSpec, ConditionReport, Density, Error,
    EvaluationGrid, GridSpec, Kernel, RateSequence, Sample, ScheduleSet, TruncationMode,
    ZeroCorrection,
};

use crate::args::{BandArgs, CheckArgs, KdeArgs, ScheduleArgs, SimulateArgs};
use crate::config::{
    parse_c_bounds, parse_n_list, parse_region, parse_spacing, Resolver,
};
use crate::CliError;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn write_output(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Data(e.to_string())),
        None => {
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::Data(e.to_string()))
        }
    }
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

/// Resolves the rate schedule from a preset or four explicit rate strings;
/// the two forms are mutually exclusive.
pub fn resolve_schedule(
    r: &mut Resolver,
    args: &ScheduleArgs,
    d: usize,
) -> Result<ScheduleSet, CliError> {
    let preset_set = r.is_set("preset", &args.preset);
    let explicit_keys = [
        ("h", &args.h),
        ("hstar", &args.hstar),
        ("v", &args.v),
        ("eps", &args.eps),
    ];
    let any_explicit = explicit_keys.iter().any(|(k, f)| r.is_set(k, f));
    if preset_set && any_explicit {
        return Err(CliError::Usage(
            "--preset and explicit rates (--h/--hstar/--v/--eps) are mutually exclusive".into(),
        ));
    }
    if preset_set {
        let preset = r.required_str("preset", &args.preset)?;
        let e: Option<f64> = r.optional("e", &args.e)?;
        let schedule = match preset.as_str() {
            "bickel_rosenblatt" | "br" => {
                if d != 1 {
                    return Err(CliError::Usage(format!(
                        "preset '{preset}' is one-dimensional, data has d={d}"
                    )));
                }
                let a: f64 = r.required("a", &args.a)?;
                preset_bickel_rosenblatt(a, e)?
            }
            "translated" => {
                let a: f64 = r.required("a", &args.a)?;
                preset_translated(a, d, e)?
            }
            "thinner_mse" => {
                let a: f64 = r.required("a", &args.a)?;
                let e = e.ok_or_else(|| CliError::Usage("missing required option --e".into()))?;
                let c_star: f64 = r.with_default("cstar", &args.cstar, 1.0)?;
                let v_star: f64 = r.with_default("vstar", &args.vstar, 1.0)?;
                let hc: Option<f64> = r.optional("hc", &args.hc)?;
                preset_thinner_mse(d, c_star, v_star, a, e, hc)?
            }
            "thinner_sup" => {
                let a: f64 = r.required("a", &args.a)?;
                let e = e.ok_or_else(|| CliError::Usage("missing required option --e".into()))?;
                let c_star: f64 = r.with_default("cstar", &args.cstar, 1.0)?;
                let v_star: f64 = r.with_default("vstar", &args.vstar, 1.0)?;
                preset_thinner_sup(d, c_star, v_star, a, e)?
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown preset '{other}' (expected bickel_rosenblatt, translated, \
                     thinner_mse, or thinner_sup)"
                )))
            }
        };
        Ok(schedule)
    } else {
        let mut rates = Vec::with_capacity(4);
        for (key, flag) in explicit_keys {
            let text = r.required_str(key, flag)?;
            rates.push(RateSequence::parse(&text)?);
        }
        Ok(ScheduleSet::new(rates[0], rates[1], rates[2], rates[3], d)?)
    }
}

fn resolve_grid_for_sample(
    r: &mut Resolver,
    region_flag: &Option<String>,
    spacing_flag: &Option<String>,
    sample: &Sample,
    default_spacing: f64,
) -> Result<Arc<EvaluationGrid>, CliError> {
    let d = sample.dimension();
    let bounds = match r.optional_str("region", region_flag) {
        Some(text) => {
            let b = parse_region(&text)?;
            if b.len() != d {
                return Err(CliError::Usage(format!(
                    "region lists {} axes for {}-dimensional data",
                    b.len(),
                    d
                )));
            }
            b
        }
        None => sample.bounding_box(),
    };
    let spacing = match r.optional_str("spacing", spacing_flag) {
        Some(text) => parse_spacing(&text, d)?,
        None => vec![default_spacing; d],
    };
    Ok(EvaluationGrid::new(&bounds, &spacing)?)
}

pub fn run_kde(args: &KdeArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let input = r.required_str("input", &args.input)?;
    let sample = Sample::from_csv_path(&input)?;
    let d = sample.dimension();
    let kernel_name = r.required_str("kernel", &args.kernel)?;
    let kernel = Kernel::from_name(&kernel_name, d)?;
    let h: f64 = r.required("h", &args.h)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(CliError::Usage(format!("bandwidth --h must be positive, got {h}")));
    }
    let grid = resolve_grid_for_sample(&mut r, &args.region, &args.spacing, &sample, h / 4.0)?;
    let estimate = kde_on_grid(&sample, &kernel, h, &grid)?;
    let max = sup_on_grid(&estimate)?;

    let out = r.required_str("out", &args.out)?;
    let mut csv = Vec::new();
    estimate.write_csv(&mut csv)?;
    std::fs::write(&out, &csv).map_err(|e| CliError::Data(e.to_string()))?;

    let summary = json!({
        "n": sample.n(),
        "d": d,
        "h": h,
        "sup_f": max.value,
        "sup_at": max.point,
        "grid_points": grid.len(),
        "out": out,
        "config": r.echo_json(),
    });
    write_output(None, &json_bytes(&summary))?;
    Ok(())
}

pub fn run_band(args: &BandArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let input = r.required_str("input", &args.input)?;
    let sample = Sample::from_csv_path(&input)?;
    let d = sample.dimension();
    let n = sample.n() as u64;
    let kernel_name = r.required_str("kernel", &args.kernel)?;
    let kernel = Kernel::from_name(&kernel_name, d)?;
    let family: BandFamily = r.required("family", &args.family)?;
    let schedule = resolve_schedule(&mut r, &args.schedule, d)?;
    let spec = resolve_band_spec(&mut r, args, family)?;

    let h_n = schedule.h.eval(n)?;
    let h_star_n = schedule.h_star.eval(n)?;
    let grid = resolve_grid_for_sample(
        &mut r,
        &args.region,
        &args.spacing,
        &sample,
        h_n.min(h_star_n) / 4.0,
    )?;

    let fdens = kde_on_grid(&sample, &kernel, h_n, &grid)?;
    let fstar = if matches!(family, BandFamily::BickelRosenblatt) {
        fdens.clone()
    } else {
        kde_on_grid(&sample, &kernel, h_star_n, &grid)?
    };
    let band = build_band(&spec, &fstar, &fdens, &kernel, &schedule, n)?;

    let out = r.required_str("out", &args.out)?;
    let mut csv = Vec::new();
    band.write_csv(&mut csv)?;
    std::fs::write(&out, &csv).map_err(|e| CliError::Data(e.to_string()))?;

    let summary = json!({
        "family": family.as_str(),
        "n": n,
        "d": d,
        "h_n": h_n,
        "h_star_n": h_star_n,
        "grid_points": band.len(),
        "max_half_width": band.max_half_width(),
        "min_half_width": band.min_half_width(),
        "truncation_fraction": band.truncation_fraction(),
        "out": out,
        "config": r.echo_json(),
    });
    write_output(args.summary.as_ref(), &json_bytes(&summary))?;
    Ok(())
}

/// Resolves delta/alpha/truncation, enforcing the family's parameterization.
fn resolve_band_spec(
    r: &mut Resolver,
    args: &BandArgs,
    family: BandFamily,
) -> Result<BandSpec, CliError> {
    let mut spec = BandSpec::new(family);
    let alpha_family = matches!(
        family,
        BandFamily::BickelRosenblatt | BandFamily::Translated
    );
    if alpha_family {
        if r.is_set("delta", &args.delta) {
            return Err(CliError::Usage(format!(
                "family '{}' takes --alpha, not --delta",
                family.as_str()
            )));
        }
        spec.alpha = Some(r.required("alpha", &args.alpha)?);
        if r.is_set("trunc", &args.trunc) {
            return Err(CliError::Usage(format!(
                "family '{}' does not take --trunc",
                family.as_str()
            )));
        }
    } else {
        if r.is_set("alpha", &args.alpha) {
            return Err(CliError::Usage(format!(
                "family '{}' takes --delta, not --alpha",
                family.as_str()
            )));
        }
        spec.delta = r.with_default("delta", &args.delta, SQRT_2)?;
        let default_trunc = match family {
            BandFamily::Check | BandFamily::Truncated => "sup",
            _ => "none",
        };
        spec.trunc = r.with_default("trunc", &args.trunc, default_trunc.to_string())?.parse()?;
    }
    if let Some(text) = r.optional_str("cbounds", &args.cbounds) {
        spec.c_bounds = Some(parse_c_bounds(&text)?);
    }
    spec.validate()?;
    Ok(spec)
}

fn report_json(report: &ConditionReport) -> serde_json::Value {
    json!({
        "label": report.label,
        "holds": report.holds(),
        "almost_sure_holds": report.almost_sure_holds(),
        "checks": report.checks,
    })
}

pub fn run_check(args: &CheckArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let d: usize = r.with_default("d", &args.d, 1usize)?;
    let schedule = resolve_schedule(&mut r, &args.schedule, d)?;

    let mut reports = vec![
        report_json(&check_theorem1_conditions(&schedule)?),
        report_json(&check_theorem2_conditions(&schedule)?),
        report_json(&check_truncation_conditions(&schedule)?),
    ];
    // translation conditions are stated for pure-power h only
    if let Ok(translation) = check_translation_conditions(&schedule) {
        reports.push(report_json(&translation));
    }
    let output = json!({
        "schedule": schedule,
        "reports": reports,
        "config": r.echo_json(),
    });
    write_output(args.out.as_ref(), &json_bytes(&output))?;
    Ok(())
}

pub fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let d: usize = r.with_default("d", &args.d, 1usize)?;
    let density_name = r.required_str("density", &args.density)?;
    let density = Density::by_name(&density_name, d)?;
    let kernel_name = r.with_default("kernel", &args.kernel, "epanechnikov".to_string())?;
    let kernel = Kernel::from_name(&kernel_name, d)?;
    let schedule = resolve_schedule(&mut r, &args.schedule, d)?;

    let family: BandFamily = r.required("family", &args.family)?;
    let mut spec = BandSpec::new(family);
    let alpha_family = matches!(
        family,
        BandFamily::BickelRosenblatt | BandFamily::Translated
    );
    if alpha_family {
        spec.alpha = Some(r.required("alpha", &args.alpha)?);
        spec.trunc = TruncationMode::None;
        if r.is_set("delta", &args.delta) {
            return Err(CliError::Usage(format!(
                "family '{}' takes --alpha, not --delta",
                family.as_str()
            )));
        }
    } else {
        if r.is_set("alpha", &args.alpha) {
            return Err(CliError::Usage(format!(
                "family '{}' takes --delta, not --alpha",
                family.as_str()
            )));
        }
        spec.delta = r.with_default("delta", &args.delta, SQRT_2)?;
        let default_trunc = match family {
            BandFamily::Check | BandFamily::Truncated => "sup",
            _ => "none",
        };
        spec.trunc = r.with_default("trunc", &args.trunc, default_trunc.to_string())?.parse()?;
    }
    if let Some(text) = r.optional_str("cbounds", &args.cbounds) {
        spec.c_bounds = Some(parse_c_bounds(&text)?);
    }
    spec.validate()?;

    let n_list = parse_n_list(&r.required_str("n", &args.n)?)?;
    let reps: u32 = r.required("reps", &args.reps)?;
    let seed: u64 = r.with_default("seed", &args.seed, 0u64)?;
    let correction = match r.with_default("correction", &args.correction, "half".to_string())?.as_str()
    {
        "half" => ZeroCorrection::Half,
        "none" => ZeroCorrection::None,
        other => {
            return Err(CliError::Usage(format!(
                "unknown correction '{other}' (expected none or half)"
            )))
        }
    };

    let mut grid_spec = GridSpec::default();
    if let Some(text) = r.optional_str("region", &args.region) {
        grid_spec.bounds = Some(parse_region(&text)?);
    }
    if let Some(text) = r.optional_str("spacing", &args.spacing) {
        grid_spec.spacing = Some(parse_spacing(&text, d)?);
    }

    let out = r.required_str("out", &args.out)?;
    let report = simulate_noncoverage(
        &density, &kernel, &schedule, &spec, &grid_spec, &n_list, reps, seed,
    )?;
    let fit = match fit_log_level(&report, correction) {
        Ok(fit) => Some(fit),
        Err(Error::InsufficientFitPoints(_)) => None,
        Err(e) => return Err(e.into()),
    };

    let output = json!({
        "config": r.echo_json(),
        "entries": report.entries,
        "fit": fit.as_ref().map(|f| json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "corrected": f.corrected,
        })),
    });
    std::fs::write(&out, json_bytes(&output)).map_err(|e| CliError::Data(e.to_string()))?;

    if let Some(plot) = &args.plot_csv {
        let mut csv = String::from("w_n,phat,log_phat\n");
        let corrected = fit.as_ref().map(|f| f.corrected).unwrap_or(false);
        for e in &report.entries {
            let p = if corrected {
                (e.misses as f64 + 0.5) / (e.reps as f64 + 1.0)
            } else {
                e.phat
            };
            if p > 0.0 {
                csv.push_str(&format!("{},{},{}\n", e.w_n, e.phat, p.ln()));
            }
        }
        std::fs::write(plot, csv).map_err(|e| CliError::Data(e.to_string()))?;
    }

    // exit code 0 regardless of the coverage outcome; the report carries it
    Ok(())
}
