//! The batch commands. Each renders its whole CSV in memory so a failed run
//! never leaves a partial file behind.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use cislunar_core::linkbudget::snr;
use cislunar_core::linkselect::{
    run_timeseries_with, step, visible_links, Execution, Scenario, SimError, StepRecord,
};
use cislunar_core::ris::{apply_misalignment, effective_area, AreaMode};

use crate::error::CliError;
use crate::table::float;

pub const TIMESERIES_HEADER: &str = "t_s,geo_id,llo_id,visible_count,d_er_km,d_rm_km,phi_opt_deg,a_eff_m2,p_r_w,snr_db,feasible,outage";
pub const SNR_ELEMENTS_HEADER: &str =
    "case,geo_id,llo_id,d_er_km,d_rm_km,phi_opt_deg,m,area_mode,a_eff_m2,p_r_w,snr_db,feasible";
pub const MISALIGN_HEADER: &str =
    "delta_deg,geo_id,llo_id,phi_opt_deg,a_eff_m2,p_r_w,snr_db,feasible";

/// Largest grid accepted by `--delta-grid`.
const MAX_GRID_POINTS: usize = 1_000_000;

pub fn timeseries_csv(scenario: &Scenario, execution: Execution) -> Result<String, SimError> {
    let records = run_timeseries_with(scenario, execution)?;
    let mut out = String::with_capacity(records.len() * 160);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for rec in &records {
        push_timeseries_row(&mut out, rec);
    }
    Ok(out)
}

fn push_timeseries_row(out: &mut String, rec: &StepRecord) {
    match &rec.link {
        Some(link) => {
            let g = &link.geometry;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},false",
                float(rec.time),
                link.sample.geo_id,
                link.sample.llo_id,
                rec.visible_count,
                float(g.d_er),
                float(g.d_rm),
                float(g.phi_opt.to_degrees()),
                float(link.a_eff.value()),
                float(link.snr.received_power),
                float(link.snr.snr_db),
                link.snr.feasible,
            );
        }
        None => {
            let _ = writeln!(
                out,
                "{},,,{},,,,,,,false,true",
                float(rec.time),
                rec.visible_count
            );
        }
    }
}

/// Scenario copy whose horizon covers the reference epoch `at`.
fn at_epoch(scenario: &Scenario, at: f64) -> Result<Scenario, CliError> {
    if !(at.is_finite() && at >= 0.0) {
        return Err(CliError::Usage(format!(
            "--at must be a non-negative time, got {at}"
        )));
    }
    let mut s = scenario.clone();
    s.duration = s.duration.max(at);
    Ok(s)
}

/// SNR at the aligned configuration for every element count and every link
/// visible at `at`. Case 0 is the selected (shortest) link.
pub fn snr_elements_csv(
    scenario: &Scenario,
    element_counts: &[usize],
    at: f64,
) -> Result<String, CliError> {
    if element_counts.is_empty() || element_counts.contains(&0) {
        return Err(CliError::Usage(
            "--m-list needs at least one element count, each >= 1".into(),
        ));
    }
    let mut counts = element_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();

    let s = at_epoch(scenario, at)?;
    let links = visible_links(&s, at)?;
    if links.is_empty() {
        return Err(SimError::InvalidScenario(format!("no visible link at t = {at} s")).into());
    }
    let mut out = String::new();
    out.push_str(SNR_ELEMENTS_HEADER);
    out.push('\n');
    for (case, (sample, geometry)) in links.iter().enumerate() {
        for &m in &counts {
            let ris = s.ris.with_elements(m);
            let config = ris.optimal_for(geometry.phi_opt).map_err(SimError::from)?;
            let a_eff = effective_area(&config, geometry.phi_opt);
            let result =
                snr(&s.budget, a_eff, geometry.d_er, geometry.d_rm).map_err(SimError::from)?;
            let _ = writeln!(
                out,
                "{case},{},{},{},{},{},{m},{},{},{},{},{}",
                sample.geo_id,
                sample.llo_id,
                float(geometry.d_er),
                float(geometry.d_rm),
                float(geometry.phi_opt.to_degrees()),
                ris.area_mode,
                float(a_eff.value()),
                float(result.received_power),
                float(result.snr_db),
                result.feasible,
            );
        }
    }
    Ok(out)
}

/// SNR against a uniform phase error `Δφ` (degrees) on every element, at the
/// link selected at `at`.
pub fn misalignment_csv(
    scenario: &Scenario,
    deltas_deg: &[f64],
    at: f64,
) -> Result<String, CliError> {
    if deltas_deg.is_empty() {
        return Err(CliError::Usage("--delta-grid produced no points".into()));
    }
    if let Some(bad) = deltas_deg
        .iter()
        .find(|d| !(d.is_finite() && (-180.0..=180.0).contains(*d)))
    {
        return Err(CliError::Usage(format!(
            "misalignment {bad} deg lies outside [-180, 180]"
        )));
    }
    let s = at_epoch(scenario, at)?;
    let rec = step(&s, at)?;
    let link = rec
        .link
        .ok_or_else(|| SimError::InvalidScenario(format!("no visible link at t = {at} s")))?;
    let geometry = link.geometry;
    let aligned = s
        .ris
        .optimal_for(geometry.phi_opt)
        .map_err(SimError::from)?;

    let mut out = String::new();
    out.push_str(MISALIGN_HEADER);
    out.push('\n');
    for &delta in deltas_deg {
        let config = apply_misalignment(&aligned, delta.to_radians());
        let a_eff = effective_area(&config, geometry.phi_opt);
        let result = snr(&s.budget, a_eff, geometry.d_er, geometry.d_rm).map_err(SimError::from)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            float(delta),
            link.sample.geo_id,
            link.sample.llo_id,
            float(geometry.phi_opt.to_degrees()),
            float(a_eff.value()),
            float(result.received_power),
            float(result.snr_db),
            result.feasible,
        );
    }
    Ok(out)
}

/// Parses `start:stop:step` (degrees, inclusive of `stop` when it lies on the
/// grid). Values are snapped to 1e-9 deg so `0` and `±90` land exactly.
pub fn parse_delta_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let usage = |msg: String| CliError::Usage(format!("--delta-grid {spec:?}: {msg}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step_size] = parts.as_slice() else {
        return Err(usage("expected start:stop:step".into()));
    };
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| usage(format!("{s:?} is not a number")))
    };
    let (start, stop, step_size) = (num(start)?, num(stop)?, num(step_size)?);
    if step_size <= 0.0 {
        return Err(usage("step must be positive".into()));
    }
    if start > stop {
        return Err(usage("start must not exceed stop".into()));
    }
    if start < -180.0 || stop > 180.0 {
        return Err(usage("grid must stay within [-180, 180] degrees".into()));
    }
    if (stop - start) / step_size >= MAX_GRID_POINTS as f64 {
        return Err(usage(format!("more than {MAX_GRID_POINTS} grid points")));
    }
    let n = cislunar_core::linkselect::step_count(stop - start, step_size);
    Ok((0..n)
        .map(|k| {
            let x = start + k as f64 * step_size;
            ((x * 1e9).round() / 1e9).clamp(-180.0, 180.0)
        })
        .collect())
}

pub fn parse_element_counts(spec: &str) -> Result<Vec<usize>, CliError> {
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .ok()
                .filter(|&m| m >= 1)
                .ok_or_else(|| {
                    CliError::Usage(format!("--m-list: {part:?} is not a positive integer"))
                })
        })
        .collect()
}

pub fn parse_area_mode(s: &str) -> Result<AreaMode, CliError> {
    s.parse().map_err(CliError::Usage)
}

/// Writes through a temporary sibling file and renames it into place.
/// Symlinks and non-regular targets (devices, pipes) are written in place so
/// the rename never replaces them.
pub fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    let output_err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    if let Ok(meta) = std::fs::symlink_metadata(path) {
        if !meta.is_file() {
            let mut file = std::fs::OpenOptions::new()
                .write(true)
                .truncate(true)
                .open(path)
                .map_err(output_err)?;
            return file.write_all(contents.as_bytes()).map_err(output_err);
        }
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(output_err)?;
    tmp.write_all(contents.as_bytes()).map_err(output_err)?;
    tmp.as_file().sync_all().map_err(output_err)?;
    tmp.persist(path).map_err(|e| output_err(e.error))?;
    Ok(())
}
